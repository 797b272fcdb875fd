use dimgen::dimension::DimensionVector;
use dimgen::pi::{synthesize_from_matrix, DimensionalMatrix, PiError};
use proptest::prelude::*;

/// Determinant by permutation expansion, for small integer matrices.
fn det(m: &[Vec<i64>]) -> i64 {
    fn permute(m: &[Vec<i64>], row: usize, used: &mut Vec<bool>, sign: i64, acc: i64, out: &mut i64) {
        if row == m.len() {
            *out += sign * acc;
            return;
        }
        let mut s = sign;
        // Sign flips with each skipped unused column to the left.
        for c in 0..m.len() {
            if used[c] {
                continue;
            }
            if m[row][c] != 0 {
                used[c] = true;
                permute(m, row + 1, used, s, acc * m[row][c], out);
                used[c] = false;
            }
            s = -s;
        }
    }
    let mut out = 0;
    permute(m, 0, &mut vec![false; m.len()], 1, 1, &mut out);
    out
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    if n < r {
        return vec![];
    }
    let mut with: Vec<Vec<usize>> = subsets(n - 1, r - 1);
    for s in &mut with {
        s.push(n - 1);
    }
    with.extend(subsets(n - 1, r));
    with
}

/// Largest r with a nonzero r×r minor.
fn rank_by_minors(rows: &[Vec<i64>]) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    for r in (1..=rows.len().min(cols)).rev() {
        for rs in subsets(rows.len(), r) {
            for cs in subsets(cols, r) {
                let minor: Vec<Vec<i64>> = rs.iter().map(|&i| cs.iter().map(|&j| rows[i][j]).collect()).collect();
                if det(&minor) != 0 {
                    return r;
                }
            }
        }
    }
    0
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Columns as 7-vectors; only the first `active` base dimensions are used so
/// that null spaces are usually nontrivial.
fn matrix() -> impl Strategy<Value = (Vec<[i64; 7]>, usize)> {
    (1usize..=6, 1usize..=4).prop_flat_map(|(k, active)| {
        let col = prop::collection::vec(-3i64..=3, active).prop_map(move |v| {
            let mut c = [0i64; 7];
            c[..v.len()].copy_from_slice(&v);
            c
        });
        (prop::collection::vec(col, k), 0..k)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn basis_laws((cols, target) in matrix()) {
        let k = cols.len();
        let names: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
        let m = DimensionalMatrix::from_dimensions(
            "P",
            names.iter().cloned().zip(cols.iter().map(|c| DimensionVector::from_ints(*c))),
        );
        let rows: Vec<Vec<i64>> = (0..7).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        let rank = rank_by_minors(&rows);
        let others: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != target).map(|(_, &x)| x).collect()).collect();
        let target_in_span = rank_by_minors(&others) == rank;

        match synthesize_from_matrix(&m, &names[target]) {
            Err(PiError::NoProducts(_)) => prop_assert_eq!(rank, k),
            Err(PiError::TargetNotIsolable(_)) => {
                prop_assert!(rank < k);
                prop_assert!(!target_in_span);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
            Ok(basis) => {
                prop_assert!(target_in_span);
                prop_assert_eq!(basis.rank, rank);
                prop_assert_eq!(basis.n(), k - rank);
                let exps: Vec<Vec<i64>> = basis.groups.iter().map(|g| g.exponent_vector(&basis.columns)).collect();
                for e in &exps {
                    // D·e = 0
                    for row in &rows {
                        prop_assert_eq!(row.iter().zip(e).map(|(a, b)| a * b).sum::<i64>(), 0);
                    }
                    prop_assert_eq!(e.iter().fold(0, |g, &x| gcd(g, x)), 1);
                }
                prop_assert_eq!(rank_by_minors(&exps), exps.len(), "groups dependent");
                let carriers: Vec<usize> = (0..exps.len()).filter(|&i| exps[i][target] != 0).collect();
                prop_assert_eq!(carriers, vec![exps.len() - 1]);
                prop_assert!(exps[exps.len() - 1][target] > 0);
                prop_assert_eq!(basis.target_group(), exps.len() - 1);
                let again = synthesize_from_matrix(&m, &names[target]).unwrap();
                prop_assert_eq!(again.to_kv(), basis.to_kv());
            }
        }
    }
}

#[test]
fn minor_rank_oracle_examples() {
    assert_eq!(det(&[vec![1, 2], vec![3, 4]]), -2);
    assert_eq!(det(&[vec![2, 0, 0], vec![0, 3, 0], vec![0, 0, 4]]), 24);
    assert_eq!(det(&[vec![0, 1], vec![1, 0]]), -1);
    assert_eq!(det(&[vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]), -1);
    assert_eq!(rank_by_minors(&[vec![1, 2], vec![2, 4]]), 1);
    assert_eq!(rank_by_minors(&[vec![0, 0], vec![0, 0]]), 0);
    // glider: L, M, T rows over (h, v, m, v0, g)
    let glider = [vec![1, 1, 0, 1, 1], vec![0, 0, 1, 0, 0], vec![0, -1, 0, -1, -2]];
    assert_eq!(rank_by_minors(&glider), 3);
}
