use dimgen::sim::Lfsr32;

/// Rows: seed, the first eight words, the state after those eight words.
/// Generated once by a separate script from the tap definition.
const GOLDEN: &str = include_str!("vectors/lfsr_words.txt");

fn hex(s: &str) -> u32 {
    u32::from_str_radix(s, 16).unwrap()
}

#[test]
fn golden_words() {
    let mut rows = 0;
    for line in GOLDEN.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
        let cols: Vec<u32> = line.split_whitespace().map(hex).collect();
        assert_eq!(cols.len(), 10, "{line}");
        let mut l = Lfsr32::new(cols[0]).unwrap();
        let words: Vec<u32> = (0..8).map(|_| l.next_word()).collect();
        assert_eq!(words, cols[1..9], "seed {:08x}", cols[0]);
        assert_eq!(l.state(), cols[9]);
        rows += 1;
    }
    assert_eq!(rows, 4);
}

/// One LFSR step as a 32×32 matrix over GF(2), stored by columns.
type Gf2Matrix = [u32; 32];

fn apply(m: &Gf2Matrix, v: u32) -> u32 {
    (0..32).filter(|&j| v >> j & 1 == 1).fold(0, |acc, j| acc ^ m[j])
}

fn mul(a: &Gf2Matrix, b: &Gf2Matrix) -> Gf2Matrix {
    let mut c = [0u32; 32];
    for j in 0..32 {
        c[j] = apply(a, b[j]);
    }
    c
}

fn pow(m: &Gf2Matrix, mut e: u64) -> Gf2Matrix {
    let mut result: Gf2Matrix = std::array::from_fn(|j| 1u32 << j);
    let mut base = *m;
    while e > 0 {
        if e & 1 == 1 {
            result = mul(&result, &base);
        }
        base = mul(&base, &base);
        e >>= 1;
    }
    result
}

#[test]
fn period_is_maximal() {
    let step: Gf2Matrix = std::array::from_fn(|j| {
        let mut l = Lfsr32::new(1 << j).unwrap();
        l.step();
        l.state()
    });
    let identity: Gf2Matrix = std::array::from_fn(|j| 1u32 << j);
    let period: u64 = (1 << 32) - 1;
    assert_eq!(pow(&step, period), identity);
    // 2^32 - 1 = 3 · 5 · 17 · 257 · 65537
    let primes = [3u64, 5, 17, 257, 65537];
    assert_eq!(primes.iter().product::<u64>(), period);
    for q in primes {
        assert_ne!(pow(&step, period / q), identity, "order divides (2^32-1)/{q}");
    }
}

#[test]
fn matrix_agrees_with_shift_register() {
    let step: Gf2Matrix = std::array::from_fn(|j| {
        let mut l = Lfsr32::new(1 << j).unwrap();
        l.step();
        l.state()
    });
    let jump = pow(&step, 1000);
    for seed in [1u32, 0xACE1, 0xDEAD_BEEF, u32::MAX] {
        let mut l = Lfsr32::new(seed).unwrap();
        for _ in 0..1000 {
            l.step();
        }
        assert_eq!(apply(&jump, seed), l.state());
    }
}
