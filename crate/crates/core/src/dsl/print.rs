use std::fmt;

use super::{ConstantDecl, InvariantDecl, SourceSpec, UnitExpr, PRELUDE_NAME};

impl fmt::Display for UnitExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            f.write_str(&factor.unit)?;
            if factor.exponent != 1 {
                write!(f, "**{}", factor.exponent)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for ConstantDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{:?}` keeps a decimal point or exponent, so the value re-lexes as a real.
        write!(f, "{} : constant = {:?} ({});", self.name, self.value, self.unit)
    }
}

impl fmt::Display for InvariantDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : invariant(", self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", p.name, p.signal_type)?;
        }
        f.write_str(") =\n{\n")?;
        for (i, r) in self.relations.iter().enumerate() {
            write!(f, "\t{} ~ {{{}}}", r.lhs, r.rhs.join(", "))?;
            f.write_str(if i + 1 < self.relations.len() { ",\n" } else { "\n" })?;
        }
        f.write_str("}")
    }
}

/// Prints a flattened specification: the prelude include (if any) followed by
/// every declaration, with the contents of other includes inlined.
impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.includes.iter().any(|i| i == PRELUDE_NAME) {
            writeln!(f, "include \"{PRELUDE_NAME}\"\n")?;
        }
        for c in &self.constants {
            writeln!(f, "{c}")?;
        }
        for inv in &self.invariants {
            writeln!(f, "\n{inv}")?;
        }
        Ok(())
    }
}
