//! Reader for the CNF problem format: a subset of TPTP `cnf(...)` with an extra
//! `theory_axiom(<name>)` role for clauses from a shared theory library.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use super::term::{display_literals, Literal, Signature, Term};

/// Origin label given to every clause that is not a theory axiom.
pub const INPUT_ORIGIN: &str = "input";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Role {
    Axiom,
    Hypothesis,
    NegatedConjecture,
    TheoryAxiom(String),
}

impl Role {
    /// Axiom-origin label used for the clause's derivation leaf.
    pub fn origin(&self) -> &str {
        match self {
            Role::TheoryAxiom(name) => name,
            _ => INPUT_ORIGIN,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Axiom => f.write_str("axiom"),
            Role::Hypothesis => f.write_str("hypothesis"),
            Role::NegatedConjecture => f.write_str("negated_conjecture"),
            Role::TheoryAxiom(n) => write!(f, "theory_axiom({n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputClause {
    pub name: String,
    pub role: Role,
    pub literals: Vec<Literal>,
}

impl InputClause {
    pub fn origin(&self) -> &str {
        self.role.origin()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown role `{role}`")]
    UnknownRole { line: usize, col: usize, role: String },
    #[error("{line}:{col}: symbol `{symbol}` used with arity {found}, previously {expected}")]
    Arity { line: usize, col: usize, symbol: String, expected: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Lower(String),
    Upper(String),
    Dollar(String),
    Quoted(String),
    Int(String),
    LParen,
    RParen,
    Comma,
    Pipe,
    Tilde,
    Dot,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lower(s) | Tok::Upper(s) | Tok::Int(s) => write!(f, "`{s}`"),
            Tok::Dollar(s) => write!(f, "`${s}`"),
            Tok::Quoted(s) => write!(f, "'{s}'"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Dot => f.write_str("`.`"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn advance(n: usize, i: &mut usize, col: &mut usize) {
    *i += n;
    *col += n;
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let ident_char = |c: char| c.is_ascii_alphanumeric() || c == '_';
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i, &mut col);
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' | ')' | ',' | '|' | '~' | '.' => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '|' => Tok::Pipe,
                    '~' => Tok::Tilde,
                    _ => Tok::Dot,
                };
                advance(1, &mut i, &mut col);
                out.push(Spanned { tok, line: start_line, col: start_col });
            }
            '\'' => {
                let mut s = String::new();
                advance(1, &mut i, &mut col);
                loop {
                    match chars.get(i) {
                        None | Some('\n') => {
                            return Err(ParseError::Syntax {
                                line: start_line,
                                col: start_col,
                                msg: "unterminated quoted name".into(),
                            })
                        }
                        Some('\'') => {
                            advance(1, &mut i, &mut col);
                            break;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            advance(1, &mut i, &mut col);
                        }
                    }
                }
                out.push(Spanned { tok: Tok::Quoted(s), line: start_line, col: start_col });
            }
            '$' => {
                advance(1, &mut i, &mut col);
                let begin = i;
                while i < chars.len() && ident_char(chars[i]) {
                    advance(1, &mut i, &mut col);
                }
                let s: String = chars[begin..i].iter().collect();
                out.push(Spanned { tok: Tok::Dollar(s), line: start_line, col: start_col });
            }
            c if c.is_ascii_alphanumeric() => {
                let begin = i;
                while i < chars.len() && ident_char(chars[i]) {
                    advance(1, &mut i, &mut col);
                }
                let s: String = chars[begin..i].iter().collect();
                let tok = if c.is_ascii_digit() {
                    Tok::Int(s)
                } else if c.is_ascii_uppercase() {
                    Tok::Upper(s)
                } else {
                    Tok::Lower(s)
                };
                out.push(Spanned { tok, line: start_line, col: start_col });
            }
            '_' => {
                let begin = i;
                while i < chars.len() && ident_char(chars[i]) {
                    advance(1, &mut i, &mut col);
                }
                let s: String = chars[begin..i].iter().collect();
                out.push(Spanned { tok: Tok::Upper(s), line: start_line, col: start_col });
            }
            other => return Err(ParseError::Syntax { line, col, msg: format!("unexpected character `{other}`") }),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    sig: &'a Signature,
    vars: HashMap<String, u32>,
    eof: (usize, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.col)).unwrap_or(self.eof)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, msg: msg.into() })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let msg = format!("expected {want}, found {t}");
                self.err(msg)
            }
            None => self.err(format!("expected {want}, found end of input")),
        }
    }

    fn clause(&mut self) -> Result<InputClause, ParseError> {
        match self.next() {
            Some(Tok::Lower(k)) if k == "cnf" => {}
            _ => {
                self.pos -= 1;
                return self.err("expected `cnf`");
            }
        }
        self.expect(Tok::LParen)?;
        let name = match self.next() {
            Some(Tok::Lower(s)) | Some(Tok::Int(s)) | Some(Tok::Quoted(s)) | Some(Tok::Upper(s)) => s,
            _ => {
                self.pos -= 1;
                return self.err("expected formula name");
            }
        };
        self.expect(Tok::Comma)?;
        let role = self.role()?;
        self.expect(Tok::Comma)?;
        self.vars.clear();
        let literals = self.disjunction()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Dot)?;
        Ok(InputClause { name, role, literals })
    }

    fn role(&mut self) -> Result<Role, ParseError> {
        let (line, col) = self.here();
        let word = match self.next() {
            Some(Tok::Lower(s)) => s,
            _ => {
                self.pos -= 1;
                return self.err("expected role");
            }
        };
        match word.as_str() {
            "axiom" => Ok(Role::Axiom),
            "hypothesis" => Ok(Role::Hypothesis),
            "negated_conjecture" => Ok(Role::NegatedConjecture),
            "theory_axiom" => {
                self.expect(Tok::LParen)?;
                let name = match self.next() {
                    Some(Tok::Lower(s)) => s,
                    _ => {
                        self.pos -= 1;
                        return self.err("expected theory axiom name");
                    }
                };
                self.expect(Tok::RParen)?;
                Ok(Role::TheoryAxiom(name))
            }
            _ => Err(ParseError::UnknownRole { line, col, role: word }),
        }
    }

    fn disjunction(&mut self) -> Result<Vec<Literal>, ParseError> {
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let lits = self.disjunction()?;
            self.expect(Tok::RParen)?;
            return Ok(lits);
        }
        let mut lits = Vec::new();
        loop {
            if let Some(lit) = self.literal()? {
                lits.push(lit);
            }
            if self.peek() == Some(&Tok::Pipe) {
                self.pos += 1;
            } else {
                return Ok(lits);
            }
        }
    }

    /// `None` for `$false`, which contributes no literal.
    fn literal(&mut self) -> Result<Option<Literal>, ParseError> {
        let mut positive = true;
        while self.peek() == Some(&Tok::Tilde) {
            self.pos += 1;
            positive = !positive;
        }
        if let Some(Tok::Dollar(w)) = self.peek() {
            if w == "false" && positive {
                self.pos += 1;
                return Ok(None);
            }
            let msg = format!("unsupported literal `${w}`");
            return self.err(msg);
        }
        let (line, col) = self.here();
        let name = match self.next() {
            Some(Tok::Lower(s)) | Some(Tok::Quoted(s)) => s,
            _ => {
                self.pos -= 1;
                return self.err("expected predicate");
            }
        };
        let args = self.args()?;
        let pred = self.intern(&name, args.len(), line, col)?;
        Ok(Some(Literal::new(positive, pred, args)))
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        if self.peek() != Some(&Tok::LParen) {
            return Ok(Vec::new());
        }
        self.pos += 1;
        let mut args = vec![self.term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (line, col) = self.here();
        match self.next() {
            Some(Tok::Upper(v)) => {
                let next = self.vars.len() as u32;
                Ok(Term::Var(*self.vars.entry(v).or_insert(next)))
            }
            Some(Tok::Lower(s)) | Some(Tok::Quoted(s)) | Some(Tok::Int(s)) => {
                let args = self.args()?;
                let sym = self.intern(&s, args.len(), line, col)?;
                Ok(Term::App(sym, args))
            }
            _ => {
                self.pos -= 1;
                self.err("expected term")
            }
        }
    }

    fn intern(&self, name: &str, arity: usize, line: usize, col: usize) -> Result<super::term::Sym, ParseError> {
        self.sig.intern(name, arity).map_err(|e| ParseError::Arity {
            line,
            col,
            symbol: e.symbol,
            expected: e.expected,
            found: e.found,
        })
    }
}

/// Parses a problem, interning symbols into `sig`. Variables are numbered per clause
/// in order of first occurrence.
pub fn parse_problem(text: &str, sig: &Signature) -> Result<Vec<InputClause>, ParseError> {
    let toks = lex(text)?;
    let last_line = text.lines().count().max(1);
    let last_col = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
    let mut parser = Parser { toks, pos: 0, sig, vars: HashMap::new(), eof: (last_line, last_col) };
    let mut out = Vec::new();
    while parser.peek().is_some() {
        out.push(parser.clause()?);
    }
    Ok(out)
}

fn is_plain_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() => {}
        _ => return false,
    }
    let all_digits = s.chars().all(|c| c.is_ascii_digit());
    let ident = s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    ident && (all_digits || !s.starts_with(|c: char| c.is_ascii_digit()))
}

/// Writes clauses back in the input syntax.
pub fn print_problem(clauses: &[InputClause], sig: &Signature) -> String {
    let mut out = String::new();
    for c in clauses {
        let name = if is_plain_name(&c.name) { c.name.clone() } else { format!("'{}'", c.name) };
        let _ = writeln!(out, "cnf({}, {}, {}).", name, c.role, display_literals(&c.literals, sig));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axiom_clause() {
        let sig = Signature::new();
        let cs = parse_problem("cnf(a1, axiom, p(X) | ~q(X)).", &sig).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].origin(), "input");
        let p = sig.lookup("p").unwrap();
        let q = sig.lookup("q").unwrap();
        assert_eq!(
            cs[0].literals,
            vec![Literal::new(true, p, vec![Term::Var(0)]), Literal::new(false, q, vec![Term::Var(0)])]
        );
    }

    #[test]
    fn theory_axiom_label() {
        let sig = Signature::new();
        let cs = parse_problem("cnf(t1, theory_axiom(assoc), eq(f(f(X,Y),Z), f(X,f(Y,Z)))).", &sig).unwrap();
        assert_eq!(cs[0].origin(), "assoc");
        assert_eq!(cs[0].role, Role::TheoryAxiom("assoc".into()));
        assert_eq!(cs[0].literals.len(), 1);
    }

    #[test]
    fn empty_file() {
        let sig = Signature::new();
        assert!(parse_problem("", &sig).unwrap().is_empty());
        assert!(parse_problem("% only a comment\n\n", &sig).unwrap().is_empty());
    }

    #[test]
    fn comments_parens_and_false() {
        let sig = Signature::new();
        let text = "% header\ncnf(c1, hypothesis, (p(a) | q)). % trailing\ncnf(c2, negated_conjecture, $false).\n";
        let cs = parse_problem(text, &sig).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].role, Role::Hypothesis);
        assert!(cs[1].literals.is_empty());
    }

    #[test]
    fn syntax_error_position() {
        let sig = Signature::new();
        let err = parse_problem("cnf(a, axiom, p(X).\n", &sig).unwrap_err();
        assert_eq!(err, ParseError::Syntax { line: 1, col: 19, msg: "expected `)`, found `.`".into() });
        let err = parse_problem("\ncnf(a, axiom, p(X) & q).", &sig).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, col: 20, .. }), "{err:?}");
    }

    #[test]
    fn unknown_role() {
        let sig = Signature::new();
        let err = parse_problem("cnf(a, lemma, p).", &sig).unwrap_err();
        assert_eq!(err, ParseError::UnknownRole { line: 1, col: 8, role: "lemma".into() });
    }

    #[test]
    fn arity_mismatch() {
        let sig = Signature::new();
        let err = parse_problem("cnf(a, axiom, p(X)).\ncnf(b, axiom, p(X, Y)).", &sig).unwrap_err();
        assert!(matches!(err, ParseError::Arity { line: 2, expected: 1, found: 2, .. }), "{err:?}");
    }

    #[test]
    fn print_reparses() {
        let sig = Signature::new();
        let text = "cnf(a1, axiom, p(X) | ~q(f(X, Y), b)).\ncnf('odd name', theory_axiom(comm), r(Y, X) | ~r(X, Y)).\ncnf(3, negated_conjecture, $false).";
        let cs = parse_problem(text, &sig).unwrap();
        let printed = print_problem(&cs, &sig);
        let again = parse_problem(&printed, &sig).unwrap();
        assert_eq!(cs, again);
    }
}
