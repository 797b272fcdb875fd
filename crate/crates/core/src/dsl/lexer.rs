use std::fmt;
use std::ops::Range;

use super::DslError;

/// 1-based line/column of a token or error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    Colon,
    Semi,
    Comma,
    Eq,
    Tilde,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Star,
    StarStar,
    Include,
    Constant,
    Invariant,
}

impl TokenKind {
    /// Short human description used in syntax errors.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Int(v) => format!("integer `{v}`"),
            TokenKind::Real(v) => format!("number `{v}`"),
            TokenKind::Str(s) => format!("string \"{s}\""),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Semi => "`;`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Eq => "`=`".into(),
            TokenKind::Tilde => "`~`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::StarStar => "`**`".into(),
            TokenKind::Include => "keyword `include`".into(),
            TokenKind::Constant => "keyword `constant`".into(),
            TokenKind::Invariant => "keyword `invariant`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub pos: Pos,
    /// Byte range of the lexeme in the source text.
    pub span: Range<usize>,
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.offset..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }
}

/// Splits `text` into tokens. Whitespace and `#` comments are skipped; the
/// byte ranges in [`Token::span`] together with the skipped gaps cover the
/// whole input.
pub fn tokenize(text: &str) -> Result<Vec<Token>, DslError> {
    let mut cur = Cursor { src: text, offset: 0, line: 1, column: 1 };
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            cur.eat_while(|c| c != '\n');
            continue;
        }

        let start = cur.offset;
        let pos = cur.pos();
        let kind = match c {
            ':' => single(&mut cur, TokenKind::Colon),
            ';' => single(&mut cur, TokenKind::Semi),
            ',' => single(&mut cur, TokenKind::Comma),
            '=' => single(&mut cur, TokenKind::Eq),
            '~' => single(&mut cur, TokenKind::Tilde),
            '(' => single(&mut cur, TokenKind::LParen),
            ')' => single(&mut cur, TokenKind::RParen),
            '{' => single(&mut cur, TokenKind::LBrace),
            '}' => single(&mut cur, TokenKind::RBrace),
            '*' => {
                cur.bump();
                if cur.peek() == Some('*') {
                    cur.bump();
                    TokenKind::StarStar
                } else {
                    TokenKind::Star
                }
            }
            '"' => lex_string(&mut cur, pos)?,
            '+' | '-' if cur.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => {
                lex_number(&mut cur, pos)?
            }
            c if c.is_ascii_digit() => lex_number(&mut cur, pos)?,
            c if c.is_ascii_alphabetic() || c == '_' => {
                cur.eat_while(|c| c.is_ascii_alphanumeric() || c == '_');
                match &text[start..cur.offset] {
                    "include" => TokenKind::Include,
                    "constant" => TokenKind::Constant,
                    "invariant" => TokenKind::Invariant,
                    word => TokenKind::Ident(word.to_string()),
                }
            }
            other => {
                return Err(DslError::Lex {
                    pos,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        tokens.push(Token {
            kind,
            lexeme: text[start..cur.offset].to_string(),
            pos,
            span: start..cur.offset,
        });
    }
    Ok(tokens)
}

fn single(cur: &mut Cursor<'_>, kind: TokenKind) -> TokenKind {
    cur.bump();
    kind
}

fn lex_string(cur: &mut Cursor<'_>, pos: Pos) -> Result<TokenKind, DslError> {
    cur.bump();
    let start = cur.offset;
    loop {
        match cur.peek() {
            Some('"') => break,
            Some('\n') | None => {
                return Err(DslError::Lex { pos, message: "unterminated string literal".into() })
            }
            Some(_) => {
                cur.bump();
            }
        }
    }
    let body = cur.src[start..cur.offset].to_string();
    cur.bump();
    Ok(TokenKind::Str(body))
}

fn lex_number(cur: &mut Cursor<'_>, pos: Pos) -> Result<TokenKind, DslError> {
    let start = cur.offset;
    if matches!(cur.peek(), Some('+' | '-')) {
        cur.bump();
    }
    cur.eat_while(|c| c.is_ascii_digit());
    let mut real = false;
    if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
        real = true;
        cur.bump();
        cur.eat_while(|c| c.is_ascii_digit());
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let digit_at = if matches!(cur.peek_at(1), Some('+' | '-')) { 2 } else { 1 };
        if cur.peek_at(digit_at).is_some_and(|d| d.is_ascii_digit()) {
            real = true;
            for _ in 0..digit_at {
                cur.bump();
            }
            cur.eat_while(|c| c.is_ascii_digit());
        }
    }
    if cur.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
        return Err(DslError::Lex {
            pos,
            message: format!("malformed number starting `{}`", &cur.src[start..cur.offset]),
        });
    }
    let lexeme = &cur.src[start..cur.offset];
    if real {
        lexeme
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(TokenKind::Real)
            .ok_or_else(|| DslError::Lex { pos, message: format!("number `{lexeme}` out of range") })
    } else {
        lexeme
            .parse::<i64>()
            .map(TokenKind::Int)
            .map_err(|_| DslError::Lex { pos, message: format!("integer `{lexeme}` out of range") })
    }
}
