use super::lexer::{tokenize, Pos, Token, TokenKind};
use std::path::Path;

use super::resolve::{FsResolver, IncludeResolver};
use super::{
    ConstantDecl, DslError, InvariantDecl, Param, Relation, SourceSpec, SpecFileError, UnitExpr,
    UnitFactor, PRELUDE_NAME,
};
use crate::dimension::UnitTable;

/// Id given to the root text when the caller does not name it.
const ROOT_ID: &str = "<input>";

/// Parses and resolves a specification. Non-prelude includes are looked up
/// through `resolver` relative to an anonymous root.
pub fn parse_spec(text: &str, resolver: &dyn IncludeResolver) -> Result<SourceSpec, DslError> {
    parse_spec_named(ROOT_ID, text, resolver)
}

/// Like [`parse_spec`], but the root text is identified by `root_id` (for
/// filesystem resolution this is the path of the root file).
pub fn parse_spec_named(
    root_id: &str,
    text: &str,
    resolver: &dyn IncludeResolver,
) -> Result<SourceSpec, DslError> {
    let table = UnitTable::builtin_prelude();
    let mut builder = Builder {
        spec: SourceSpec::default(),
        refs: Vec::new(),
        stack: vec![root_id.to_string()],
        table: &table,
        resolver,
    };
    builder.parse_file(root_id, text)?;
    builder.check_references()?;
    Ok(builder.spec)
}

/// Reads and parses a specification file; includes resolve relative to it.
pub fn parse_file(path: &Path) -> Result<SourceSpec, SpecFileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SpecFileError::Io { path: path.to_path_buf(), source })?;
    parse_spec_named(&path.to_string_lossy(), &text, &FsResolver)
        .map_err(|source| SpecFileError::Parse { path: path.to_path_buf(), source })
}

/// Parses a bare unit expression such as `meter*second**-2`.
pub fn parse_unit_expr(text: &str) -> Result<UnitExpr, DslError> {
    let tokens = tokenize(text)?;
    let mut p = Parser::new(&tokens, text);
    let expr = p.unit_expr()?;
    p.expect_end()?;
    Ok(expr)
}

/// A name used in a relation, checked once every declaration is known.
struct PendingRef {
    invariant: usize,
    name: String,
    pos: Pos,
    chain: Vec<String>,
}

struct Builder<'a> {
    spec: SourceSpec,
    refs: Vec<PendingRef>,
    /// Ids of the files currently being parsed, outermost first.
    stack: Vec<String>,
    table: &'a UnitTable,
    resolver: &'a dyn IncludeResolver,
}

impl Builder<'_> {
    fn parse_file(&mut self, id: &str, text: &str) -> Result<(), DslError> {
        let tokens = tokenize(text).map_err(|e| self.locate(e))?;
        let mut p = Parser::new(&tokens, text);
        while !p.at_end() {
            match p.item().map_err(|e| self.locate(e))? {
                Item::Include { name, pos } => self.include(id, &name, pos)?,
                Item::Constant(decl, pos) => {
                    self.check_unit(&decl.unit, pos).map_err(|e| self.locate(e))?;
                    self.declare(&decl.name, pos).map_err(|e| self.locate(e))?;
                    self.spec.constants.push(decl);
                }
                Item::Invariant(decl, pos, sites) => {
                    self.declare(&decl.name, pos).map_err(|e| self.locate(e))?;
                    if let Some((name, pos)) =
                        sites.types.iter().find(|(t, _)| self.table.signal_type(t).is_none())
                    {
                        let err = DslError::UnknownSignalType { pos: *pos, name: name.clone() };
                        return Err(self.locate(err));
                    }
                    let index = self.spec.invariants.len();
                    let chain = self.include_chain();
                    self.refs.extend(sites.names.into_iter().map(|(name, pos)| PendingRef {
                        invariant: index,
                        name,
                        pos,
                        chain: chain.clone(),
                    }));
                    self.spec.invariants.push(decl);
                }
            }
        }
        Ok(())
    }

    fn include(&mut self, including: &str, name: &str, pos: Pos) -> Result<(), DslError> {
        if name == PRELUDE_NAME {
            if !self.spec.includes.iter().any(|n| n == PRELUDE_NAME) {
                self.spec.includes.push(name.to_string());
            }
            return Ok(());
        }
        let Some(resolved) = self.resolver.resolve(including, name) else {
            return Err(self.locate(DslError::UnresolvedInclude { pos, name: name.to_string() }));
        };
        if self.stack.contains(&resolved.id) {
            let mut chain = self.stack.clone();
            chain.push(resolved.id);
            return Err(DslError::CyclicInclude { chain });
        }
        self.spec.includes.push(name.to_string());
        self.stack.push(resolved.id.clone());
        let result = self.parse_file(&resolved.id, &resolved.text);
        self.stack.pop();
        result
    }

    fn declare(&self, name: &str, pos: Pos) -> Result<(), DslError> {
        let taken = self.spec.constant(name).is_some()
            || self.spec.invariant(name).is_some()
            || self.table.constant(name).is_some();
        if taken {
            Err(DslError::Duplicate { pos, name: name.to_string() })
        } else {
            Ok(())
        }
    }

    fn check_unit(&self, unit: &UnitExpr, pos: Pos) -> Result<(), DslError> {
        match unit.factors.iter().find(|f| self.table.unit(&f.unit).is_none()) {
            Some(f) => Err(DslError::UnknownUnit { pos, name: f.unit.clone() }),
            None => Ok(()),
        }
    }

    fn include_chain(&self) -> Vec<String> {
        self.stack[1..].to_vec()
    }

    /// Wraps an error raised while parsing the innermost file on the stack.
    fn locate(&self, err: DslError) -> DslError {
        wrap(&self.include_chain(), err)
    }

    fn check_references(&self) -> Result<(), DslError> {
        for r in &self.refs {
            let inv = &self.spec.invariants[r.invariant];
            let known = inv.param(&r.name).is_some()
                || self.spec.constant(&r.name).is_some()
                || self.table.constant(&r.name).is_some();
            if !known {
                let err = DslError::Undeclared { pos: r.pos, name: r.name.clone() };
                return Err(wrap(&r.chain, err));
            }
        }
        Ok(())
    }
}

fn wrap(chain: &[String], err: DslError) -> DslError {
    chain.iter().rev().fold(err, |source, file| DslError::InInclude {
        file: file.clone(),
        source: Box::new(source),
    })
}

enum Item {
    Include { name: String, pos: Pos },
    Constant(ConstantDecl, Pos),
    Invariant(InvariantDecl, Pos, Sites),
}

/// Source positions of the identifiers an invariant refers to.
struct Sites {
    /// Every name used in a relation.
    names: Vec<(String, Pos)>,
    /// Every parameter signal type.
    types: Vec<(String, Pos)>,
}

struct Parser<'t> {
    tokens: &'t [Token],
    next: usize,
    end: Pos,
}

impl<'t> Parser<'t> {
    fn new(tokens: &'t [Token], text: &str) -> Self {
        let mut end = Pos { line: 1, column: 1 };
        for c in text.chars() {
            if c == '\n' {
                end.line += 1;
                end.column = 1;
            } else {
                end.column += 1;
            }
        }
        Parser { tokens, next: 0, end }
    }

    fn at_end(&self) -> bool {
        self.next >= self.tokens.len()
    }

    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.next)
    }

    fn peek_kind(&self, n: usize) -> Option<&'t TokenKind> {
        self.tokens.get(self.next + n).map(|t| &t.kind)
    }

    fn error(&self, expected: &str) -> DslError {
        match self.peek() {
            Some(tok) => DslError::Syntax {
                pos: tok.pos,
                expected: expected.to_string(),
                found: tok.kind.describe(),
            },
            None => DslError::Syntax {
                pos: self.end,
                expected: expected.to_string(),
                found: "end of input".into(),
            },
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<&'t Token, DslError> {
        match self.peek() {
            Some(tok) if tok.kind == kind => {
                self.next += 1;
                Ok(tok)
            }
            _ => Err(self.error(&kind.describe())),
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), DslError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Ident(name), pos, .. }) => {
                self.next += 1;
                Ok((name.clone(), *pos))
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn expect_end(&self) -> Result<(), DslError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn item(&mut self) -> Result<Item, DslError> {
        if let Some(TokenKind::Include) = self.peek_kind(0) {
            let pos = self.expect(TokenKind::Include)?.pos;
            return match self.peek() {
                Some(Token { kind: TokenKind::Str(name), .. }) => {
                    self.next += 1;
                    Ok(Item::Include { name: name.clone(), pos })
                }
                _ => Err(self.error("string")),
            };
        }
        let (name, pos) = self.ident().map_err(|_| self.error("`include` or a declaration"))?;
        self.expect(TokenKind::Colon)?;
        match self.peek() {
            Some(Token { kind: TokenKind::Constant, .. }) => {
                self.next += 1;
                self.constant_body(name).map(|decl| Item::Constant(decl, pos))
            }
            Some(Token { kind: TokenKind::Invariant, .. }) => {
                self.next += 1;
                let (decl, sites) = self.invariant_body(name)?;
                Ok(Item::Invariant(decl, pos, sites))
            }
            Some(Token { kind: TokenKind::Ident(other), pos, .. }) => {
                Err(DslError::Unsupported { pos: *pos, construct: other.clone() })
            }
            _ => Err(self.error("`constant` or `invariant`")),
        }
    }

    fn constant_body(&mut self, name: String) -> Result<ConstantDecl, DslError> {
        self.expect(TokenKind::Eq)?;
        let value = match self.peek_kind(0) {
            Some(TokenKind::Int(v)) => *v as f64,
            Some(TokenKind::Real(v)) => *v,
            _ => return Err(self.error("number")),
        };
        self.next += 1;
        self.expect(TokenKind::LParen)?;
        let unit = self.unit_expr()?;
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Semi)?;
        Ok(ConstantDecl { name, value, unit })
    }

    fn invariant_body(
        &mut self,
        name: String,
    ) -> Result<(InvariantDecl, Sites), DslError> {
        self.expect(TokenKind::LParen)?;
        let mut params: Vec<Param> = Vec::new();
        let mut types = Vec::new();
        loop {
            let (pname, ppos) = self.ident()?;
            self.expect(TokenKind::Colon)?;
            let (signal_type, tpos) = self.ident()?;
            if params.iter().any(|p| p.name == pname) {
                return Err(DslError::Duplicate { pos: ppos, name: pname });
            }
            types.push((signal_type.clone(), tpos));
            params.push(Param { name: pname, signal_type });
            if self.expect(TokenKind::Comma).is_err() {
                break;
            }
        }
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Eq)?;
        self.expect(TokenKind::LBrace)?;

        let mut relations = Vec::new();
        let mut sites = Vec::new();
        // An empty body declares signals without relating them.
        let empty = matches!(self.peek_kind(0), Some(TokenKind::RBrace));
        if !empty {
            loop {
                let (lhs, lpos) = self.ident()?;
                self.expect(TokenKind::Tilde)?;
                self.expect(TokenKind::LBrace)?;
                sites.push((lhs.clone(), lpos));
                let mut rhs = Vec::new();
                loop {
                    let (n, npos) = self.ident()?;
                    sites.push((n.clone(), npos));
                    rhs.push(n);
                    if self.expect(TokenKind::Comma).is_err() {
                        break;
                    }
                }
                self.expect(TokenKind::RBrace)?;
                relations.push(Relation { lhs, rhs });
                if self.expect(TokenKind::Comma).is_err() {
                    break;
                }
            }
        }
        self.expect(TokenKind::RBrace)?;
        Ok((InvariantDecl { name, params, relations }, Sites { names: sites, types }))
    }

    fn unit_expr(&mut self) -> Result<UnitExpr, DslError> {
        let mut factors = vec![self.unit_factor()?];
        while let Some(TokenKind::Star) = self.peek_kind(0) {
            self.next += 1;
            factors.push(self.unit_factor()?);
        }
        Ok(UnitExpr { factors })
    }

    fn unit_factor(&mut self) -> Result<UnitFactor, DslError> {
        let (unit, pos) = self.ident()?;
        let mut exponent = 1;
        if let Some(TokenKind::StarStar) = self.peek_kind(0) {
            self.next += 1;
            match self.peek_kind(0) {
                Some(TokenKind::Int(e)) => {
                    exponent = *e;
                    self.next += 1;
                }
                _ => return Err(self.error("integer exponent")),
            }
            if exponent == 0 {
                return Err(DslError::ZeroExponent { pos, unit });
            }
        }
        Ok(UnitFactor { unit, exponent })
    }
}
