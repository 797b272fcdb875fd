//! Dimensionless-product synthesis.
//!
//! A system of k signals whose dimensions span r independent base dimensions
//! has k − r independent dimensionless monomials. They are the integer
//! null-space vectors of the dimensional matrix (rows: base dimensions,
//! columns: signals). The basis is made canonical by a fixed elimination order
//! and then rearranged so that the target signal occurs in exactly one group.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::dimension::{
    eval_unit_expr, BaseDimension, DimensionError, DimensionVector, Rational, UnitTable, BASE_COUNT,
};
use crate::dsl::{InvariantDecl, SourceSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PiError {
    #[error("specification declares no invariant")]
    NoInvariant,
    #[error("invariant `{0}` not found")]
    InvariantNotFound(String),
    #[error("specification declares several invariants ({}); choose one", .0.join(", "))]
    AmbiguousInvariant(Vec<String>),
    #[error("target `{target}` is not a parameter of invariant `{invariant}`")]
    TargetNotParameter { target: String, invariant: String },
    #[error("cannot integerize the zero vector")]
    ZeroVector,
    #[error("target `{0}` cannot be isolated: it appears in no dimensionless product")]
    TargetNotIsolable(String),
    #[error("no dimensionless products: the {0} signal(s) are dimensionally independent")]
    NoProducts(usize),
    #[error("exponent of `{0}` does not fit in 64 bits")]
    ExponentOverflow(String),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalKind {
    /// A sensor signal: an invariant parameter.
    Parameter,
    /// A declared or prelude constant with its SI value.
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalColumn {
    pub name: String,
    pub kind: SignalKind,
    pub dimension: DimensionVector,
    /// Position in canonical column order.
    pub index: usize,
}

impl SignalColumn {
    pub fn is_constant(&self) -> bool {
        matches!(self.kind, SignalKind::Constant { .. })
    }
}

/// One column per signal; row `r` of column `c` is the exponent of base
/// dimension `r` in signal `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionalMatrix {
    pub invariant: String,
    pub columns: Vec<SignalColumn>,
}

impl DimensionalMatrix {
    /// Matrix over explicit dimension vectors, all treated as parameters.
    pub fn from_dimensions<S: Into<String>>(
        invariant: &str,
        columns: impl IntoIterator<Item = (S, DimensionVector)>,
    ) -> Self {
        let columns = columns
            .into_iter()
            .enumerate()
            .map(|(index, (name, dimension))| SignalColumn {
                name: name.into(),
                kind: SignalKind::Parameter,
                dimension,
                index,
            })
            .collect();
        DimensionalMatrix { invariant: invariant.to_string(), columns }
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn entry(&self, row: BaseDimension, col: usize) -> &Rational {
        self.columns[col].dimension.exponent(row)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Dense row-major copy (7 rows).
    pub fn rows(&self) -> Vec<Vec<Rational>> {
        BaseDimension::ALL
            .iter()
            .map(|&d| self.columns.iter().map(|c| c.dimension.exponent(d).clone()).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiFactor {
    pub signal: String,
    pub exponent: i64,
}

/// A dimensionless monomial. Factors are kept in canonical column order and
/// zero exponents are omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiGroup {
    pub factors: Vec<PiFactor>,
}

impl PiGroup {
    pub fn exponent(&self, signal: &str) -> i64 {
        self.factors.iter().find(|f| f.signal == signal).map_or(0, |f| f.exponent)
    }

    pub fn contains(&self, signal: &str) -> bool {
        self.exponent(signal) != 0
    }

    /// Dense exponent vector over `columns`.
    pub fn exponent_vector(&self, columns: &[SignalColumn]) -> Vec<i64> {
        columns.iter().map(|c| self.exponent(&c.name)).collect()
    }

    fn from_vector(columns: &[SignalColumn], v: &[BigInt]) -> Result<Self, PiError> {
        let mut factors = Vec::new();
        for (col, e) in columns.iter().zip(v) {
            if e.is_zero() {
                continue;
            }
            let exponent = e.to_i64().ok_or_else(|| PiError::ExponentOverflow(col.name.clone()))?;
            factors.push(PiFactor { signal: col.name.clone(), exponent });
        }
        Ok(PiGroup { factors })
    }
}

impl fmt::Display for PiGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.factors.iter().map(|x| format!("{}^{}", x.signal, x.exponent)).collect();
        f.write_str(&parts.join(" * "))
    }
}

/// Canonical basis of dimensionless products with the target isolated in the
/// last group.
#[derive(Debug, Clone, PartialEq)]
pub struct PiBasis {
    pub invariant: String,
    pub columns: Vec<SignalColumn>,
    pub groups: Vec<PiGroup>,
    pub target: String,
    pub rank: usize,
}

impl PiBasis {
    /// Number of dimensionless products N.
    pub fn n(&self) -> usize {
        self.groups.len()
    }

    /// Index of the group that contains the target.
    pub fn target_group(&self) -> usize {
        self.groups.iter().position(|g| g.contains(&self.target)).unwrap_or(self.groups.len() - 1)
    }

    /// Columns whose exponent is zero in every group.
    pub fn unused_signals(&self) -> Vec<&SignalColumn> {
        self.columns.iter().filter(|c| self.groups.iter().all(|g| !g.contains(&c.name))).collect()
    }

    /// Line-oriented key-value form.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("invariant={}\n", self.invariant));
        out.push_str(&format!("target={}\n", self.target));
        out.push_str(&format!("k={}\n", self.columns.len()));
        out.push_str(&format!("rank={}\n", self.rank));
        out.push_str(&format!("n={}\n", self.n()));
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&format!("columns={}\n", names.join(",")));
        for (i, g) in self.groups.iter().enumerate() {
            let exps: Vec<String> =
                g.exponent_vector(&self.columns).iter().map(i64::to_string).collect();
            out.push_str(&format!("pi_{}={}\n", i + 1, exps.join(",")));
        }
        out.push_str(&format!("target_pi={}\n", self.target_group() + 1));
        out
    }
}

impl fmt::Display for PiBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.groups.iter().enumerate() {
            writeln!(f, "PI_{} = {}", i + 1, g)?;
        }
        Ok(())
    }
}

/// Picks the named invariant, or the only one when no name is given.
pub fn select_invariant<'a>(
    spec: &'a SourceSpec,
    name: Option<&str>,
) -> Result<&'a InvariantDecl, PiError> {
    match name {
        Some(name) => spec.invariant(name).ok_or_else(|| PiError::InvariantNotFound(name.to_string())),
        None => match spec.invariants.as_slice() {
            [] => Err(PiError::NoInvariant),
            [only] => Ok(only),
            many => Err(PiError::AmbiguousInvariant(many.iter().map(|i| i.name.clone()).collect())),
        },
    }
}

/// Columns: every invariant parameter in declared order, then each constant
/// in order of first reference in the relations.
pub fn build_matrix(
    spec: &SourceSpec,
    invariant: Option<&str>,
    target: &str,
) -> Result<DimensionalMatrix, PiError> {
    let inv = select_invariant(spec, invariant)?;
    if inv.param(target).is_none() {
        return Err(PiError::TargetNotParameter {
            target: target.to_string(),
            invariant: inv.name.clone(),
        });
    }
    let table = UnitTable::builtin_prelude();
    let mut columns: Vec<SignalColumn> = Vec::new();

    for p in &inv.params {
        let dimension = table
            .signal_type(&p.signal_type)
            .cloned()
            .ok_or_else(|| DimensionError::NotFound(p.signal_type.clone()))?;
        columns.push(SignalColumn {
            name: p.name.clone(),
            kind: SignalKind::Parameter,
            dimension,
            index: columns.len(),
        });
    }

    let referenced = inv.relations.iter().flat_map(|r| std::iter::once(&r.lhs).chain(&r.rhs));
    for name in referenced {
        if columns.iter().any(|c| &c.name == name) {
            continue;
        }
        let (dimension, value) = if let Some(decl) = spec.constant(name) {
            (eval_unit_expr(&decl.unit, &table)?, decl.value)
        } else if let Some(k) = table.constant(name) {
            (k.dimension.clone(), k.value)
        } else {
            return Err(DimensionError::NotFound(name.clone()).into());
        };
        columns.push(SignalColumn {
            name: name.clone(),
            kind: SignalKind::Constant { value },
            dimension,
            index: columns.len(),
        });
    }
    Ok(DimensionalMatrix { invariant: inv.name.clone(), columns })
}

/// Reduced row echelon form by exact elimination. Columns are scanned in
/// order; the pivot is the first unresolved row with a nonzero entry. Returns
/// the reduced rows and the pivot column of each leading row.
fn reduce(m: &DimensionalMatrix) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut a = m.rows();
    let cols = m.cols();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == BASE_COUNT {
            break;
        }
        let Some(found) = (row..BASE_COUNT).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(found, row);
        let pivot = a[row][col].clone();
        for x in a[row].iter_mut() {
            *x = &*x / &pivot;
        }
        for r in 0..BASE_COUNT {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..cols {
                let delta = &factor * &a[row][c];
                a[r][c] -= delta;
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

pub fn rank(m: &DimensionalMatrix) -> usize {
    reduce(m).1.len()
}

/// Basis of {e : D·e = 0}. Basis vector i sets the i-th free column to 1 and
/// every other free column to 0.
pub fn null_space_rational(m: &DimensionalMatrix) -> Vec<Vec<Rational>> {
    let (a, pivots) = reduce(m);
    let cols = m.cols();
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rational::zero(); cols];
            v[free] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][free].clone();
            }
            v
        })
        .collect()
}

/// Scales a rational vector to coprime integers whose first nonzero entry is
/// positive.
pub fn integerize(v: &[Rational]) -> Result<Vec<BigInt>, PiError> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    normalize(ints)
}

fn normalize(mut v: Vec<BigInt>) -> Result<Vec<BigInt>, PiError> {
    let gcd = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if gcd.is_zero() {
        return Err(PiError::ZeroVector);
    }
    let negate = v.iter().find(|x| !x.is_zero()).is_some_and(Signed::is_negative);
    for x in v.iter_mut() {
        *x = &*x / &gcd;
        if negate {
            *x = -&*x;
        }
    }
    Ok(v)
}

/// Recombines an independent integer basis so that `target` has a nonzero
/// exponent in exactly one vector. That vector is signed so the target's
/// exponent is positive and placed last.
pub fn isolate_target(
    m: &DimensionalMatrix,
    basis: Vec<Vec<BigInt>>,
    target: &str,
) -> Result<PiBasis, PiError> {
    let t = m.column_index(target).ok_or_else(|| PiError::TargetNotParameter {
        target: target.to_string(),
        invariant: m.invariant.clone(),
    })?;
    let Some(pivot) = basis.iter().position(|v| !v[t].is_zero()) else {
        return Err(PiError::TargetNotIsolable(target.to_string()));
    };
    let mut pivot_vec = basis[pivot].clone();
    if pivot_vec[t].is_negative() {
        pivot_vec.iter_mut().for_each(|x| *x = -&*x);
    }

    let mut groups = Vec::with_capacity(basis.len());
    for (j, v) in basis.iter().enumerate() {
        if j == pivot {
            continue;
        }
        let v = if v[t].is_zero() {
            v.clone()
        } else {
            let ct = &pivot_vec[t];
            let cj = &v[t];
            let combined: Vec<BigInt> =
                v.iter().zip(&pivot_vec).map(|(x, p)| ct * x - cj * p).collect();
            normalize(combined)?
        };
        groups.push(PiGroup::from_vector(&m.columns, &v)?);
    }
    groups.push(PiGroup::from_vector(&m.columns, &pivot_vec)?);

    Ok(PiBasis {
        invariant: m.invariant.clone(),
        columns: m.columns.clone(),
        groups,
        target: target.to_string(),
        rank: m.cols() - basis.len(),
    })
}

/// Matrix, null space, integerization and target isolation in one step.
pub fn synthesize_pi(
    spec: &SourceSpec,
    invariant: Option<&str>,
    target: &str,
) -> Result<PiBasis, PiError> {
    let m = build_matrix(spec, invariant, target)?;
    synthesize_from_matrix(&m, target)
}

pub fn synthesize_from_matrix(m: &DimensionalMatrix, target: &str) -> Result<PiBasis, PiError> {
    let null = null_space_rational(m);
    if null.is_empty() {
        return Err(PiError::NoProducts(m.cols()));
    }
    let ints = null.iter().map(|v| integerize(v)).collect::<Result<Vec<_>, _>>()?;
    isolate_target(m, ints, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_spec, NoIncludes};

    const GLIDER: &str = r#"include "NewtonBaseSignals.nt"

v0	: constant = 0 (meter*second**-1);

UAVglider: invariant(
					h: distance,
					v: speed,
					m: mass) =
{
	h ~ {v, m, v0, kNewtonUnithave_AccelerationDueToGravity}
}
"#;

    const PENDULUM: &str = r#"include "NewtonBaseSignals.nt"
Pendulum : invariant(t: time, l: distance, m: mass) =
{
	t ~ {l, m, kNewtonUnithave_AccelerationDueToGravity}
}
"#;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn qv(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| q(x)).collect()
    }

    fn iv(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| x.into()).collect()
    }

    fn glider_matrix() -> DimensionalMatrix {
        build_matrix(&parse_spec(GLIDER, &NoIncludes).unwrap(), None, "h").unwrap()
    }

    #[test]
    fn glider_matrix_columns_and_rows() {
        let m = glider_matrix();
        let names: Vec<_> = m.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["h", "v", "m", "v0", "kNewtonUnithave_AccelerationDueToGravity"]);
        let rows = m.rows();
        assert_eq!(rows[BaseDimension::Length.index()], qv(&[1, 1, 0, 1, 1]));
        assert_eq!(rows[BaseDimension::Time.index()], qv(&[0, -1, 0, -1, -2]));
        assert_eq!(rows[BaseDimension::Mass.index()], qv(&[0, 0, 1, 0, 0]));
        for d in [3, 4, 5, 6] {
            assert!(rows[d].iter().all(Zero::is_zero));
        }
        assert_eq!(m.columns[3].kind, SignalKind::Constant { value: 0.0 });
        assert_eq!(m.columns[4].kind, SignalKind::Constant { value: 9.80665 });
    }

    #[test]
    fn matrix_errors() {
        let spec = parse_spec(GLIDER, &NoIncludes).unwrap();
        assert!(matches!(build_matrix(&spec, None, "q"), Err(PiError::TargetNotParameter { .. })));
        assert!(matches!(build_matrix(&spec, None, "v0"), Err(PiError::TargetNotParameter { .. })));
        assert_eq!(
            build_matrix(&spec, Some("Nope"), "h"),
            Err(PiError::InvariantNotFound("Nope".into()))
        );
        let single = parse_spec("S : invariant(x: distance) = { x ~ {x} }", &NoIncludes).unwrap();
        let m = build_matrix(&single, None, "x").unwrap();
        assert_eq!(m.cols(), 1);
        assert_eq!(m.rows()[0], qv(&[1]));
    }

    #[test]
    fn glider_null_space() {
        let basis = null_space_rational(&glider_matrix());
        assert_eq!(basis, vec![qv(&[0, -1, 0, 1, 0]), qv(&[1, -2, 0, 0, 1])]);
    }

    #[test]
    fn degenerate_null_spaces() {
        let zero = DimensionalMatrix::from_dimensions(
            "Z",
            [("a", DimensionVector::dimensionless()), ("b", DimensionVector::dimensionless())],
        );
        assert_eq!(null_space_rational(&zero), vec![qv(&[1, 0]), qv(&[0, 1])]);
        let one = DimensionalMatrix::from_dimensions(
            "O",
            [("x", DimensionVector::base(BaseDimension::Length))],
        );
        assert!(null_space_rational(&one).is_empty());
    }

    #[test]
    fn integerize_examples() {
        assert_eq!(integerize(&qv(&[0, -1, 0, 1, 0])).unwrap(), iv(&[0, 1, 0, -1, 0]));
        let half = vec![Rational::new(1.into(), 2.into()), q(-1)];
        assert_eq!(integerize(&half).unwrap(), iv(&[1, -2]));
        assert_eq!(integerize(&qv(&[3, 6])).unwrap(), iv(&[1, 2]));
        assert_eq!(integerize(&qv(&[0, 0])), Err(PiError::ZeroVector));
    }

    #[test]
    fn glider_basis() {
        let spec = parse_spec(GLIDER, &NoIncludes).unwrap();
        let basis = synthesize_pi(&spec, None, "h").unwrap();
        assert_eq!(basis.n(), 2);
        assert_eq!(basis.rank, 3);
        assert_eq!(basis.groups[0].to_string(), "v^1 * v0^-1");
        assert_eq!(
            basis.groups[1].to_string(),
            "h^1 * v^-2 * kNewtonUnithave_AccelerationDueToGravity^1"
        );
        assert_eq!(basis.target_group(), 1);
        let unused: Vec<_> = basis.unused_signals().iter().map(|c| c.name.clone()).collect();
        assert_eq!(unused, vec!["m"]);
    }

    #[test]
    fn pendulum_basis() {
        let spec = parse_spec(PENDULUM, &NoIncludes).unwrap();
        let basis = synthesize_pi(&spec, None, "t").unwrap();
        assert_eq!(basis.n(), 1);
        assert_eq!(
            basis.groups[0].exponent_vector(&basis.columns),
            vec![2, -1, 0, 1],
            "t^2 l^-1 g^1"
        );
        assert_eq!(basis.groups[0].exponent("m"), 0);
    }

    #[test]
    fn target_outside_span_is_rejected() {
        let spec = parse_spec(PENDULUM, &NoIncludes).unwrap();
        assert_eq!(synthesize_pi(&spec, None, "m"), Err(PiError::TargetNotIsolable("m".into())));
    }

    #[test]
    fn target_spread_over_several_vectors_is_combined() {
        // Every null-space vector of this system contains x.
        let m = DimensionalMatrix::from_dimensions(
            "S",
            [
                ("x", DimensionVector::base(BaseDimension::Length)),
                ("a", DimensionVector::base(BaseDimension::Length)),
                ("b", DimensionVector::base(BaseDimension::Length)),
            ],
        );
        let basis = synthesize_from_matrix(&m, "b").unwrap();
        let vectors: Vec<_> = basis.groups.iter().map(|g| g.exponent_vector(&basis.columns)).collect();
        assert_eq!(vectors, vec![vec![1, -1, 0], vec![-1, 0, 1]]);

        let basis = synthesize_from_matrix(&m, "x").unwrap();
        let vectors: Vec<_> = basis.groups.iter().map(|g| g.exponent_vector(&basis.columns)).collect();
        // a/b (x eliminated), then x/a with x positive.
        assert_eq!(vectors, vec![vec![0, 1, -1], vec![1, -1, 0]]);
    }

    #[test]
    fn no_products() {
        let spec = parse_spec("S : invariant(x: distance) = { x ~ {x} }", &NoIncludes).unwrap();
        assert_eq!(synthesize_pi(&spec, None, "x"), Err(PiError::NoProducts(1)));
    }

    #[test]
    fn all_dimensionless_signals() {
        let spec =
            parse_spec("S : invariant(a: angle, b: dimensionless, c: angle) = { a ~ {b, c} }", &NoIncludes)
                .unwrap();
        let basis = synthesize_pi(&spec, None, "a").unwrap();
        assert_eq!(basis.n(), 3);
        let texts: Vec<_> = basis.groups.iter().map(ToString::to_string).collect();
        assert_eq!(texts, vec!["b^1", "c^1", "a^1"]);
    }

    #[test]
    fn ambiguous_invariant() {
        let spec = parse_spec(
            "A : invariant(x: distance) = { x ~ {x} }\nB : invariant(y: time) = { y ~ {y} }",
            &NoIncludes,
        )
        .unwrap();
        assert!(matches!(build_matrix(&spec, None, "x"), Err(PiError::AmbiguousInvariant(_))));
        assert!(build_matrix(&spec, Some("B"), "y").is_ok());
    }

    #[test]
    fn kv_serialization_is_stable() {
        let spec = parse_spec(GLIDER, &NoIncludes).unwrap();
        let a = synthesize_pi(&spec, None, "h").unwrap().to_kv();
        let b = synthesize_pi(&spec, None, "h").unwrap().to_kv();
        assert_eq!(a, b);
        assert!(a.contains("pi_1=0,1,0,-1,0\n"));
        assert!(a.contains("pi_2=1,-2,0,0,1\n"));
        assert!(a.ends_with("target_pi=2\n"));
    }
}
