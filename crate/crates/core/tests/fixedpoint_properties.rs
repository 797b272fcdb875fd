use dimgen::fixedpoint::{decode, encode, fx_div, fx_mul, FxError, FxValue, QFormat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn formats() -> impl Strategy<Value = QFormat> {
    prop_oneof![
        Just((16u32, 7u32)),
        Just((16, 0)),
        Just((24, 15)),
        Just((24, 12)),
        Just((32, 15)),
        Just((32, 30)),
        Just((40, 20)),
        Just((48, 24)),
        Just((64, 31)),
        Just((64, 62)),
    ]
    .prop_map(|(w, f)| QFormat::new(w, f).unwrap())
}

/// Raw values biased toward the edges of the range and toward small magnitudes.
fn raw(format: QFormat) -> impl Strategy<Value = i64> {
    let (lo, hi) = (format.min_raw(), format.max_raw());
    let one = format.one_raw();
    let small = one.saturating_mul(4).min(hi);
    prop_oneof![
        lo..=hi,
        -small..=small,
        prop::sample::select(vec![lo, hi, 0, 1, -1, one, -one, lo + 1, hi - 1]),
    ]
}

fn operands() -> impl Strategy<Value = (QFormat, i64, i64)> {
    formats().prop_flat_map(|f| (Just(f), raw(f), raw(f)))
}

fn fits(format: QFormat, v: &BigInt) -> bool {
    *v >= BigInt::from(format.min_raw()) && *v <= BigInt::from(format.max_raw())
}

fn fx(format: QFormat, raw: i64) -> FxValue {
    format.from_raw(raw).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5000))]

    #[test]
    fn mul_matches_wide_oracle((format, a, b) in operands()) {
        let product = BigInt::from(a) * BigInt::from(b);
        let scale = BigInt::one() << format.frac();
        let expected = product.div_floor(&scale);
        match fx_mul(fx(format, a), fx(format, b)) {
            Ok(v) => {
                prop_assert!(fits(format, &expected));
                prop_assert_eq!(BigInt::from(v.raw()), expected.clone());
                // Flooring error lies in [0, 2^-F).
                let residual = product - BigInt::from(v.raw()) * &scale;
                prop_assert!(!residual.is_negative() && residual < scale);
            }
            Err(e) => {
                prop_assert_eq!(e, FxError::Overflow);
                prop_assert!(!fits(format, &expected));
            }
        }
    }

    #[test]
    fn div_matches_wide_oracle((format, a, b) in operands()) {
        let result = fx_div(fx(format, a), fx(format, b));
        if b == 0 {
            prop_assert_eq!(result, Err(FxError::DivideByZero));
            return Ok(());
        }
        let numerator = BigInt::from(a) << format.frac();
        // BigInt division truncates toward zero.
        let expected = &numerator / BigInt::from(b);
        match result {
            Ok(v) => {
                prop_assert!(fits(format, &expected));
                prop_assert_eq!(BigInt::from(v.raw()), expected);
                // |q·b − a·2^F| < |b|, i.e. the error is below 2^-F.
                let residual = numerator - BigInt::from(v.raw()) * BigInt::from(b);
                prop_assert!(residual.abs() < BigInt::from(b).abs());
                prop_assert!(residual.is_zero() || residual.signum() == BigInt::from(a).signum());
            }
            Err(e) => {
                prop_assert_eq!(e, FxError::Overflow);
                prop_assert!(!fits(format, &expected));
            }
        }
    }

    #[test]
    fn one_is_an_identity((format, a, _b) in operands()) {
        let x = fx(format, a);
        let one = fx(format, format.one_raw());
        prop_assert_eq!(fx_mul(x, one), Ok(x));
        prop_assert_eq!(fx_mul(one, x), Ok(x));
        prop_assert_eq!(fx_div(x, one), Ok(x));
        prop_assert_eq!(fx_div(x, fx(format, 0)), Err(FxError::DivideByZero));
    }

    /// decode is exact in f64 while |raw| ≤ 2^53.
    #[test]
    fn encode_inverts_decode((format, a, _b) in operands()) {
        prop_assume!(a.unsigned_abs() <= 1 << 53);
        let x = fx(format, a);
        prop_assert_eq!(encode(decode(x), format), Ok(x));
    }

    #[test]
    fn encode_rounds_half_away_from_zero(format in formats(), k in -1000i64..1000) {
        // (k + 1/2)·2^-F lies exactly halfway between raws k and k+1.
        let x = (k as f64 + 0.5) * format.resolution();
        let expected = if k >= 0 { k + 1 } else { k };
        prop_assert_eq!(encode(x, format).unwrap().raw(), expected);
    }
}

#[test]
fn extremes_of_every_width() {
    for (w, f) in [(16, 7), (24, 15), (32, 15), (64, 31)] {
        let q = QFormat::new(w, f).unwrap();
        let min = fx(q, q.min_raw());
        let neg_one = fx(q, -q.one_raw());
        // -min does not fit in W bits.
        assert_eq!(fx_mul(min, neg_one), Err(FxError::Overflow));
        assert_eq!(fx_div(min, neg_one), Err(FxError::Overflow));
        assert_eq!(fx_div(fx(q, q.max_raw()), fx(q, q.max_raw())), Ok(fx(q, q.one_raw())));
        assert_eq!(fx_mul(fx(q, 0), min), Ok(fx(q, 0)));
        // The smallest negative product floors to -1 raw, not 0.
        assert_eq!(fx_mul(fx(q, -1), fx(q, 1)).unwrap().raw(), -1);
    }
}

#[test]
fn decode_is_exact_at_53_bits() {
    let q = QFormat::new(64, 31).unwrap();
    let edge = fx(q, (1 << 53) - 1);
    assert_eq!(encode(decode(edge), q), Ok(edge));
}
