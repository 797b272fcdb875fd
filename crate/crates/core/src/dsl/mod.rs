//! Front end for the Newton specification subset: constants with unit
//! annotations, invariants over typed signals, and `~` relations.
//!
//! ```text
//! include "NewtonBaseSignals.nt"
//!
//! v0 : constant = 0 (meter*second**-1);
//!
//! UAVglider : invariant(h: distance, v: speed, m: mass) =
//! {
//!     h ~ {v, m, v0, kNewtonUnithave_AccelerationDueToGravity}
//! }
//! ```

mod lexer;
mod parser;
mod print;
mod resolve;

use std::path::PathBuf;

use thiserror::Error;

pub use lexer::{tokenize, Pos, Token, TokenKind};
pub use parser::{parse_file, parse_spec, parse_spec_named, parse_unit_expr};
pub use resolve::{FsResolver, IncludeResolver, MapResolver, NoIncludes, Resolved};

/// Include name that maps to the built-in prelude.
pub const PRELUDE_NAME: &str = "NewtonBaseSignals.nt";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitFactor {
    pub unit: String,
    pub exponent: i64,
}

/// Product of base-unit powers, e.g. `meter*second**-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitExpr {
    pub factors: Vec<UnitFactor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantDecl {
    pub name: String,
    pub value: f64,
    pub unit: UnitExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub signal_type: String,
}

/// `lhs ~ {rhs...}`: the left-hand signal is related to every name on the right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub lhs: String,
    pub rhs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub relations: Vec<Relation>,
}

impl InvariantDecl {
    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// Declarations of a specification after include resolution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceSpec {
    pub constants: Vec<ConstantDecl>,
    pub invariants: Vec<InvariantDecl>,
    /// Every include that was resolved, in the order encountered.
    pub includes: Vec<String>,
}

impl SourceSpec {
    pub fn constant(&self, name: &str) -> Option<&ConstantDecl> {
        self.constants.iter().find(|c| c.name == name)
    }

    pub fn invariant(&self, name: &str) -> Option<&InvariantDecl> {
        self.invariants.iter().find(|i| i.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("{pos}: lexical error: {message}")]
    Lex { pos: Pos, message: String },
    #[error("{pos}: syntax error: expected {expected}, found {found}")]
    Syntax { pos: Pos, expected: String, found: String },
    #[error("{pos}: unsupported construct `{construct}` (only constants, invariants and `~` relations are supported)")]
    Unsupported { pos: Pos, construct: String },
    #[error("{pos}: zero exponent on unit `{unit}`")]
    ZeroExponent { pos: Pos, unit: String },
    #[error("{pos}: unresolved include \"{name}\"")]
    UnresolvedInclude { pos: Pos, name: String },
    #[error("cyclic include: {}", chain.join(" -> "))]
    CyclicInclude { chain: Vec<String> },
    #[error("{pos}: duplicate declaration of `{name}`")]
    Duplicate { pos: Pos, name: String },
    #[error("{pos}: `{name}` is not a parameter, declared constant, or prelude constant")]
    Undeclared { pos: Pos, name: String },
    #[error("{pos}: unknown unit `{name}`")]
    UnknownUnit { pos: Pos, name: String },
    #[error("{pos}: unknown signal type `{name}`")]
    UnknownSignalType { pos: Pos, name: String },
    #[error("in \"{file}\": {source}")]
    InInclude {
        file: String,
        #[source]
        source: Box<DslError>,
    },
}

#[derive(Debug, Error)]
pub enum SpecFileError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: DslError },
}
