//! The text format for curve data.
//!
//! Sections `[field]`, `[curve]`, `[pdelta]`, `[basis]`, `[end <label>]`
//! and `[options]` hold `key = value` lines; `#` starts a comment.
//! Coefficients are integer expressions in the generator `g` of Z_q.
//!
//! ```text
//! [field]
//! p = 5
//! [curve]
//! builtin = hyperelliptic
//! Q = x^3 + 1
//! ```
//!
//! A `builtin` key (hyperelliptic, hyperelliptic-localized, hyperbola,
//! elliptic-plane) builds everything else; otherwise the file lists the
//! variables, equations, genus, polytope vectors, P and Δ entries
//! (`P(i,j)`, `D2(i,j)`, 1-based), basis forms `(num)/(den) dx + ...` and
//! per-end expansions:
//!
//! ```text
//! x = -2 : 1 | exact        # t^-2, a Laurent polynomial
//! y = sqrt(x^3 + 1) shift 3 # t^-3 sqrt(t^6 (x^3 + 1))
//! z = inv(2*y)
//! w = -1 : 1, 0, 4 | 12     # known below t^12
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::laurent::{LaurentSeries, EXACT_HI};
use crate::model::{
    build_elliptic_plane, build_hyperbola, build_hyperelliptic, pdelta_scale, CurveSpec, EndData,
    Family, ModelError, SpecOptions, VarExpansion,
};
use crate::padic::{Ctx, PadicError, PrecisionContext, ZqElement};
use crate::pairing::{DifferentialForm, FormTerm};
use crate::poly::{default_names, MultiPoly, PolytopeBounds};

/// Working precision when the file does not set one.
pub const DEFAULT_PRECISION: u32 = 12;

/// Depth at which parsed expansions are checked against the equations.
const CHECK_DEPTH: i64 = 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

fn perr<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError::Parse {
        line,
        column,
        message: message.into(),
    })
}

// ---------------------------------------------------------------------
// tokens

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn tokenize(s: &str, line: usize, col0: usize) -> Result<Vec<Token>, SpecError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let v: String = chars[st..i].iter().collect();
            out.push(Token {
                tok: Tok::Int(v.parse().expect("digits")),
                col,
            });
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[st..i].iter().collect()),
                col,
            });
        } else if "+-*^/(),:|".contains(c) {
            out.push(Token {
                tok: Tok::Sym(c),
                col,
            });
            i += 1;
        } else {
            return perr(line, col, format!("unexpected character '{c}'"));
        }
    }
    Ok(out)
}

/// Recursive descent over a token list; polynomials come out at the
/// context's working precision.
struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    line: usize,
    end_col: usize,
    ctx: &'a Ctx,
    names: &'a [String],
}

impl<'a> Parser<'a> {
    fn new(
        text: &str,
        line: usize,
        col0: usize,
        ctx: &'a Ctx,
        names: &'a [String],
    ) -> Result<Self, SpecError> {
        Ok(Parser {
            toks: tokenize(text, line, col0)?,
            pos: 0,
            line,
            end_col: col0 + text.len(),
            ctx,
            names,
        })
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, SpecError> {
        perr(self.line, self.col(), msg)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_sym(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Sym(c))
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek_sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), SpecError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.fail(format!("expected '{c}'"))
        }
    }

    fn ident(&mut self) -> Result<String, SpecError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail("expected a name"),
        }
    }

    fn int(&mut self) -> Result<BigInt, SpecError> {
        let neg = self.eat_sym('-');
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            _ => self.fail("expected an integer"),
        }
    }

    fn small_int(&mut self) -> Result<i64, SpecError> {
        let col = self.col();
        let v = self.int()?;
        i64::try_from(v).or_else(|_| perr(self.line, col, "integer out of range"))
    }

    fn done(&self) -> Result<(), SpecError> {
        if self.pos < self.toks.len() {
            return self.fail("unexpected trailing input");
        }
        Ok(())
    }

    fn prec(&self) -> u32 {
        self.ctx.n_work()
    }

    fn constant(&self, c: ZqElement) -> MultiPoly {
        MultiPoly::constant(&c, self.names.len())
    }

    fn expr(&mut self) -> Result<MultiPoly, SpecError> {
        let neg = self.eat_sym('-');
        let mut acc = self.term()?;
        if neg {
            acc = acc.neg();
        }
        loop {
            if self.eat_sym('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat_sym('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly, SpecError> {
        let mut acc = self.power()?;
        loop {
            if self.eat_sym('*') {
                acc = acc.mul(&self.power()?);
            } else if self.peek_sym('/') {
                self.pos += 1;
                let col = self.col();
                let d = self.power()?;
                let c = match d.terms().iter().next() {
                    Some((e, c)) if d.terms().len() == 1 && e.iter().all(|&k| k == 0) => c.clone(),
                    _ => return perr(self.line, col, "divisor must be a nonzero constant"),
                };
                let inv = c
                    .inv()
                    .or_else(|_| perr(self.line, col, "divisor is not a unit"))?;
                acc = acc.scale(&inv);
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<MultiPoly, SpecError> {
        let base = self.atom()?;
        if self.eat_sym('^') {
            let col = self.col();
            let k = self.small_int()?;
            let k = u32::try_from(k).or_else(|_| {
                perr(
                    self.line,
                    col,
                    "exponent must be a small nonnegative integer",
                )
            })?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly, SpecError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(self.constant(self.ctx.from_bigint(&v, self.prec())))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                if let Some(i) = self.names.iter().position(|n| *n == s) {
                    return Ok(MultiPoly::var(self.ctx, self.names.len(), i, self.prec()));
                }
                if s == "g" {
                    if self.ctx.l() == 1 {
                        return perr(self.line, col, "g is only available over extension fields");
                    }
                    return Ok(self.constant(self.ctx.generator(self.prec())));
                }
                perr(self.line, col, format!("unknown variable '{s}'"))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            _ => self.fail("expected a number, a variable or '('"),
        }
    }

    fn scalar(&mut self) -> Result<ZqElement, SpecError> {
        let col = self.col();
        let e = self.expr()?;
        if e.total_degree() > 0 {
            return perr(self.line, col, "expected a constant");
        }
        Ok(e.coeff(&vec![0; self.names.len()]))
    }

    /// `(num)/(den) dvar + ...`
    fn form(&mut self) -> Result<DifferentialForm, SpecError> {
        let mut terms = Vec::new();
        loop {
            self.expect_sym('(')?;
            let num = self.expr()?;
            self.expect_sym(')')?;
            let den = if self.eat_sym('/') {
                self.expect_sym('(')?;
                let d = self.expr()?;
                self.expect_sym(')')?;
                d
            } else {
                MultiPoly::int(self.ctx, self.names.len(), 1, self.prec())
            };
            let col = self.col();
            let dv = self.ident()?;
            let dvar = dv
                .strip_prefix('d')
                .and_then(|v| self.names.iter().position(|n| n == v))
                .map_or_else(
                    || perr(self.line, col, format!("expected d<variable>, got '{dv}'")),
                    Ok,
                )?;
            terms.push(FormTerm { num, den, dvar });
            if !self.eat_sym('+') {
                break;
            }
        }
        self.done()?;
        Ok(DifferentialForm { terms })
    }

    /// `lo : c, c, ... | exact` or `| hi`, `sqrt(R) shift k`, `inv(D)`.
    fn expansion(&mut self) -> Result<VarExpansion, SpecError> {
        let neg = self.peek_sym('-')
            && self
                .toks
                .get(self.pos + 1)
                .is_some_and(|t| t.tok == Tok::Ident("sqrt".into()));
        if neg {
            self.pos += 1;
        }
        match self.peek().cloned() {
            Some(Tok::Ident(k)) if k == "sqrt" => {
                self.pos += 1;
                self.expect_sym('(')?;
                let radicand = self.expr()?;
                self.expect_sym(')')?;
                if self.ident()? != "shift" {
                    self.pos -= 1;
                    return self.fail("expected 'shift'");
                }
                let shift = self.small_int()?;
                self.done()?;
                Ok(VarExpansion::Sqrt {
                    radicand,
                    shift,
                    sign: if neg { -1 } else { 1 },
                })
            }
            Some(Tok::Ident(k)) if k == "inv" => {
                self.pos += 1;
                self.expect_sym('(')?;
                let den = self.expr()?;
                self.expect_sym(')')?;
                self.done()?;
                Ok(VarExpansion::Reciprocal { den })
            }
            _ => {
                let lo = self.small_int()?;
                self.expect_sym(':')?;
                let mut coeffs = vec![self.scalar()?];
                while self.eat_sym(',') {
                    coeffs.push(self.scalar()?);
                }
                let mut hi = lo + coeffs.len() as i64;
                let mut exact = false;
                if self.eat_sym('|') {
                    match self.peek() {
                        Some(Tok::Ident(k)) if k == "exact" => {
                            self.pos += 1;
                            exact = true;
                        }
                        _ => {
                            let col = self.col();
                            hi = self.small_int()?;
                            if hi < lo + coeffs.len() as i64 {
                                return perr(
                                    self.line,
                                    col,
                                    "window ends before the listed coefficients",
                                );
                            }
                        }
                    }
                }
                self.done()?;
                let s = LaurentSeries::new(
                    self.ctx,
                    lo,
                    if exact { EXACT_HI } else { hi },
                    self.prec(),
                    &coeffs,
                )
                .map_err(|e| SpecError::Parse {
                    line: self.line,
                    column: self.col(),
                    message: e.to_string(),
                })?;
                Ok(if exact {
                    VarExpansion::Exact(s)
                } else {
                    VarExpansion::Fixed(s)
                })
            }
        }
    }
}

// ---------------------------------------------------------------------
// sections

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
}

#[derive(Debug, Clone)]
struct Section {
    name: String,
    arg: Option<String>,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn all(&self, key: &str) -> impl Iterator<Item = &Entry> {
        let key = key.to_string();
        self.entries.iter().filter(move |e| e.key == key)
    }

    fn require(&self, key: &str) -> Result<&Entry, SpecError> {
        self.get(key).map_or_else(
            || perr(self.line, 1, format!("[{}] needs '{key}'", self.name)),
            Ok,
        )
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), SpecError> {
        for e in &self.entries {
            if !allowed.contains(&e.key.as_str()) {
                return perr(
                    e.line,
                    e.key_col,
                    format!("unknown key '{}' in [{}]", e.key, self.name),
                );
            }
        }
        Ok(())
    }
}

const SECTIONS: [&str; 6] = ["field", "curve", "pdelta", "basis", "end", "options"];

fn split_sections(text: &str) -> Result<Vec<Section>, SpecError> {
    let mut out: Vec<Section> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len();
        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                return perr(line, indent + 1, "unterminated section header");
            };
            let mut parts = inner.split_whitespace();
            let name = parts.next().unwrap_or("").to_string();
            let arg = parts.next().map(str::to_string);
            if !SECTIONS.contains(&name.as_str()) {
                return perr(line, indent + 2, format!("unknown section [{name}]"));
            }
            if parts.next().is_some() || (name == "end") != arg.is_some() {
                return perr(line, indent + 1, format!("malformed header for [{name}]"));
            }
            let dup = out.iter().any(|s| s.name == name && s.arg == arg);
            if dup {
                return perr(line, indent + 1, format!("duplicate section [{inner}]"));
            }
            out.push(Section {
                name,
                arg,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(sec) = out.last_mut() else {
            return perr(line, indent + 1, "entry outside any section");
        };
        let Some(eq) = body.find('=') else {
            return perr(line, indent + 1, "expected 'key = value'");
        };
        let key = body[..eq].trim().to_string();
        if key.is_empty() {
            return perr(line, indent + 1, "missing key");
        }
        let vstart = eq + 1 + (body[eq + 1..].len() - body[eq + 1..].trim_start().len());
        sec.entries.push(Entry {
            key,
            value: body[eq + 1..].trim().to_string(),
            line,
            key_col: indent + 1,
            value_col: vstart + 1,
        });
    }
    Ok(out)
}

fn parse_u64(e: &Entry) -> Result<u64, SpecError> {
    e.value.parse().or_else(|_| {
        perr(
            e.line,
            e.value_col,
            format!("'{}' expects a nonnegative integer", e.key),
        )
    })
}

fn parse_i64(e: &Entry) -> Result<i64, SpecError> {
    e.value.parse().or_else(|_| {
        perr(
            e.line,
            e.value_col,
            format!("'{}' expects an integer", e.key),
        )
    })
}

fn list(e: &Entry) -> Vec<String> {
    e.value.split(',').map(|s| s.trim().to_string()).collect()
}

/// `P(i,j)` or `D<k>(i,j)` with 1-based indices.
fn matrix_key(e: &Entry) -> Result<(String, usize, usize), SpecError> {
    let bad = || {
        perr(
            e.line,
            e.key_col,
            format!("expected P(i,j) or Dk(i,j), got '{}'", e.key),
        )
    };
    let Some(open) = e.key.find('(') else {
        return bad();
    };
    let Some(inner) = e.key[open + 1..].strip_suffix(')') else {
        return bad();
    };
    let idx: Vec<&str> = inner.split(',').map(str::trim).collect();
    let [i, j] = idx.as_slice() else { return bad() };
    match (i.parse::<usize>(), j.parse::<usize>()) {
        (Ok(i), Ok(j)) if i > 0 && j > 0 => Ok((e.key[..open].trim().to_string(), i - 1, j - 1)),
        _ => bad(),
    }
}

fn field_ctx(sec: &Section, precision: Option<u32>) -> Result<Ctx, SpecError> {
    sec.check_keys(&["p", "degree", "modulus", "precision"])?;
    let p = parse_u64(sec.require("p")?)?;
    let l = sec.get("degree").map(parse_u64).transpose()?.unwrap_or(1) as usize;
    let modulus = match sec.get("modulus") {
        Some(e) => Some(
            list(e)
                .iter()
                .map(|c| c.parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .or_else(|_| {
                    perr(
                        e.line,
                        e.value_col,
                        "modulus lists nonnegative integers, lowest degree first",
                    )
                })?,
        ),
        None => None,
    };
    let file_prec = match sec.get("precision") {
        Some(e) => Some(
            u32::try_from(parse_u64(e)?)
                .or_else(|_| perr(e.line, e.value_col, "precision too large"))?,
        ),
        None => None,
    };
    let n_work = precision.or(file_prec).unwrap_or(DEFAULT_PRECISION);
    Ok(PrecisionContext::new(p, l, n_work, modulus)?)
}

fn parse_options(sec: Option<&Section>) -> Result<SpecOptions, SpecError> {
    let mut o = SpecOptions::default();
    if let Some(sec) = sec {
        sec.check_keys(&["margin", "depth_guard"])?;
        if let Some(e) = sec.get("margin") {
            o.margin = u32::try_from(parse_u64(e)?)
                .or_else(|_| perr(e.line, e.value_col, "margin too large"))?;
        }
        if let Some(e) = sec.get("depth_guard") {
            o.depth_guard = parse_i64(e)?;
        }
    }
    Ok(o)
}

/// Parses and validates a spec; `precision` overrides the file's working
/// precision.
pub fn parse_spec_with(text: &str, precision: Option<u32>) -> Result<CurveSpec, SpecError> {
    let sections = split_sections(text)?;
    let find = |name: &str| sections.iter().find(|s| s.name == name);
    let field = find("field").ok_or_else(|| ModelError::NamedSection("field".into()))?;
    let curve = find("curve").ok_or_else(|| ModelError::NamedSection("curve".into()))?;
    let ctx = field_ctx(field, precision)?;
    let options = parse_options(find("options"))?;
    let mut spec = if let Some(b) = curve.get("builtin") {
        if let Some(s) = sections
            .iter()
            .find(|s| !["field", "curve", "options"].contains(&s.name.as_str()))
        {
            return perr(
                s.line,
                1,
                format!("[{}] conflicts with a builtin curve", s.name),
            );
        }
        builtin(curve, b, &ctx)?
    } else {
        explicit(&sections, curve, &ctx)?
    };
    spec.options = options;
    Ok(spec)
}

pub fn parse_spec(text: &str) -> Result<CurveSpec, SpecError> {
    parse_spec_with(text, None)
}

fn builtin(curve: &Section, b: &Entry, ctx: &Ctx) -> Result<CurveSpec, SpecError> {
    let hyper = |localized: bool| -> Result<CurveSpec, SpecError> {
        curve.check_keys(&["builtin", "Q"])?;
        let e = curve.require("Q")?;
        let names = default_names(1);
        let mut p = Parser::new(&e.value, e.line, e.value_col, ctx, &names)?;
        let q = p.expr()?;
        p.done()?;
        Ok(build_hyperelliptic(&q.univariate_coeffs(), localized)?)
    };
    match b.value.as_str() {
        "hyperelliptic" => hyper(false),
        "hyperelliptic-localized" => hyper(true),
        "hyperbola" => {
            curve.check_keys(&["builtin"])?;
            Ok(build_hyperbola(ctx)?)
        }
        "elliptic-plane" => {
            curve.check_keys(&["builtin"])?;
            Ok(build_elliptic_plane(ctx)?)
        }
        other => perr(b.line, b.value_col, format!("unknown builtin '{other}'")),
    }
}

fn explicit(sections: &[Section], curve: &Section, ctx: &Ctx) -> Result<CurveSpec, SpecError> {
    curve.check_keys(&["variables", "equation", "genus", "polytope", "family", "Q"])?;
    let ve = curve.require("variables")?;
    let names = list(ve);
    if names.len() < 2
        || names.iter().any(|n| {
            n.is_empty() || n == "g" || !n.chars().all(|c| c.is_alphanumeric() || c == '_')
        })
    {
        return perr(
            ve.line,
            ve.value_col,
            "need at least two variable names other than g",
        );
    }
    let n = names.len();
    let poly = |e: &Entry| -> Result<MultiPoly, SpecError> {
        let mut p = Parser::new(&e.value, e.line, e.value_col, ctx, &names)?;
        let f = p.expr()?;
        p.done()?;
        Ok(f)
    };
    let equations: Vec<MultiPoly> = curve.all("equation").map(poly).collect::<Result<_, _>>()?;
    let genus = u32::try_from(parse_u64(curve.require("genus")?)?).unwrap_or(u32::MAX);
    let mut dvecs = Vec::new();
    for e in curve.all("polytope") {
        let v = list(e)
            .iter()
            .map(|s| BigRational::from_str(s))
            .collect::<Result<Vec<_>, _>>()
            .or_else(|_| perr(e.line, e.value_col, "polytope vectors list rationals"))?;
        dvecs.push(v);
    }
    if dvecs.is_empty() {
        return perr(
            curve.line,
            1,
            "[curve] needs at least one 'polytope' vector",
        );
    }
    let family = match curve.get("family").map(|e| (e, e.value.as_str())) {
        None | Some((_, "plane")) => Family::Plane,
        Some((_, f @ ("hyperelliptic" | "hyperelliptic-localized"))) => {
            let e = curve.require("Q")?;
            let one = [names[0].clone()];
            let mut p = Parser::new(&e.value, e.line, e.value_col, ctx, &one)?;
            let q = p.expr()?;
            p.done()?;
            Family::Hyperelliptic {
                q,
                localized: f.ends_with("localized"),
            }
        }
        Some((e, other)) => return perr(e.line, e.value_col, format!("unknown family '{other}'")),
    };

    let pd = sections
        .iter()
        .find(|s| s.name == "pdelta")
        .ok_or_else(|| ModelError::NamedSection("delta".into()))?;
    let zero = MultiPoly::zero(ctx, n, ctx.n_work());
    let mut p_mat = vec![vec![zero.clone(); n - 1]; n];
    let mut delta = vec![vec![vec![zero.clone(); n - 1]; n - 1]; n - 1];
    for e in &pd.entries {
        let (m, i, j) = matrix_key(e)?;
        let slot = if m == "P" {
            p_mat.get_mut(i).and_then(|r| r.get_mut(j))
        } else {
            match m.strip_prefix('D').and_then(|k| k.parse::<usize>().ok()) {
                Some(k) if k >= 2 => delta
                    .get_mut(k - 2)
                    .and_then(|d| d.get_mut(i))
                    .and_then(|r| r.get_mut(j)),
                _ => None,
            }
        };
        let Some(slot) = slot else {
            return perr(
                e.line,
                e.key_col,
                format!("entry '{}' is outside the matrix shapes", e.key),
            );
        };
        *slot = poly(e)?;
    }

    let basis: Vec<DifferentialForm> = match sections.iter().find(|s| s.name == "basis") {
        Some(sec) => {
            sec.check_keys(&["form"])?;
            sec.entries
                .iter()
                .map(|e| Parser::new(&e.value, e.line, e.value_col, ctx, &names)?.form())
                .collect::<Result<_, _>>()?
        }
        None if genus == 0 => Vec::new(),
        None => return Err(ModelError::NamedSection("basis".into()).into()),
    };

    let mut ends = Vec::new();
    for sec in sections.iter().filter(|s| s.name == "end") {
        let mut vars: Vec<Option<VarExpansion>> = vec![None; n];
        for e in &sec.entries {
            let Some(i) = names.iter().position(|v| *v == e.key) else {
                return perr(e.line, e.key_col, format!("unknown variable '{}'", e.key));
            };
            if vars[i].is_some() {
                return perr(e.line, e.key_col, format!("'{}' given twice", e.key));
            }
            vars[i] = Some(Parser::new(&e.value, e.line, e.value_col, ctx, &names)?.expansion()?);
        }
        let label = sec.arg.clone().expect("end sections carry a label");
        let vars = vars
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.map_or_else(
                    || perr(sec.line, 1, format!("[end {label}] lacks '{}'", names[i])),
                    Ok,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        ends.push(EndData { label, vars });
    }
    if ends.is_empty() {
        return Err(ModelError::NamedSection("end".into()).into());
    }

    let pb = PolytopeBounds::new(dvecs);
    let d = pdelta_scale(&pb, &p_mat, &delta);
    let spec = CurveSpec {
        ctx: ctx.clone(),
        names,
        equations,
        p_mat,
        delta,
        genus,
        basis,
        ends,
        pb,
        d,
        family,
        options: SpecOptions::default(),
    };
    spec.validate()?;
    spec.check_ends(CHECK_DEPTH, ctx.n_work())?;
    Ok(spec)
}

// ---------------------------------------------------------------------
// output

fn series_line(s: &LaurentSeries) -> String {
    let end = if s.is_exact() {
        s.support_end()
    } else {
        s.hi()
    };
    let lo = if s.is_zero() { end.min(0) } else { s.lo() };
    let coeffs: Vec<String> = (lo..end.max(lo + 1))
        .map(|m| {
            s.coeff(m)
                .map_or_else(|_| "0".to_string(), |c| c.to_string())
        })
        .collect();
    let tail = if s.is_exact() {
        "exact".to_string()
    } else {
        s.hi().to_string()
    };
    format!("{} : {} | {}", lo, coeffs.join(", "), tail)
}

fn form_line(f: &DifferentialForm, names: &[String]) -> String {
    let parts: Vec<String> = f
        .terms
        .iter()
        .map(|t| {
            format!(
                "({})/({}) d{}",
                t.num.display(names),
                t.den.display(names),
                names[t.dvar]
            )
        })
        .collect();
    parts.join(" + ")
}

/// The explicit form of a spec; `parse_spec` reads it back unchanged.
pub fn serialize_spec(spec: &CurveSpec) -> String {
    let ctx = &spec.ctx;
    let names = &spec.names;
    let mut s = String::new();
    let _ = writeln!(s, "[field]\np = {}", ctx.p());
    if ctx.l() > 1 {
        let m: Vec<String> = ctx.modulus().iter().map(u64::to_string).collect();
        let _ = writeln!(s, "degree = {}\nmodulus = {}", ctx.l(), m.join(", "));
    }
    let _ = writeln!(s, "precision = {}\n", ctx.n_work());
    let _ = writeln!(s, "[curve]\nvariables = {}", names.join(", "));
    match &spec.family {
        Family::Plane => {
            let _ = writeln!(s, "family = plane");
        }
        Family::Hyperelliptic { q, localized } => {
            let f = if *localized {
                "hyperelliptic-localized"
            } else {
                "hyperelliptic"
            };
            let _ = writeln!(s, "family = {f}\nQ = {}", q.display(&names[..1]));
        }
    }
    for f in &spec.equations {
        let _ = writeln!(s, "equation = {}", f.display(names));
    }
    let _ = writeln!(s, "genus = {}", spec.genus);
    for d in &spec.pb.dvecs {
        let v: Vec<String> = d.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "polytope = {}", v.join(", "));
    }
    let _ = writeln!(s, "\n[pdelta]");
    for (i, row) in spec.p_mat.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            if !e.is_zero() {
                let _ = writeln!(s, "P({},{}) = {}", i + 1, j + 1, e.display(names));
            }
        }
    }
    for (k, m) in spec.delta.iter().enumerate() {
        for (i, row) in m.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if !e.is_zero() {
                    let _ = writeln!(s, "D{}({},{}) = {}", k + 2, i + 1, j + 1, e.display(names));
                }
            }
        }
    }
    if !spec.basis.is_empty() {
        let _ = writeln!(s, "\n[basis]");
        for f in &spec.basis {
            let _ = writeln!(s, "form = {}", form_line(f, names));
        }
    }
    for end in &spec.ends {
        let _ = writeln!(s, "\n[end {}]", end.label);
        for (name, v) in names.iter().zip(&end.vars) {
            let rhs = match v {
                VarExpansion::Exact(x) | VarExpansion::Fixed(x) => series_line(x),
                VarExpansion::Sqrt {
                    radicand,
                    shift,
                    sign,
                } => {
                    format!(
                        "{}sqrt({}) shift {}",
                        if *sign < 0 { "-" } else { "" },
                        radicand.display(names),
                        shift
                    )
                }
                VarExpansion::Reciprocal { den } => format!("inv({})", den.display(names)),
            };
            let _ = writeln!(s, "{name} = {rhs}");
        }
    }
    let o = &spec.options;
    let _ = writeln!(
        s,
        "\n[options]\nmargin = {}\ndepth_guard = {}",
        o.margin, o.depth_guard
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const ELLIPTIC: &str = "[field]\np = 5\n\n[curve]\nbuiltin = hyperelliptic\nQ = x^3 + 1\n";

    #[test]
    fn test_builtin_and_round_trip() {
        let spec = parse_spec(ELLIPTIC).unwrap();
        assert_eq!(spec.genus, 1);
        let text = serialize_spec(&spec);
        let back = parse_spec(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(serialize_spec(&back), text);
    }

    #[test]
    fn test_round_trip_other_builtins() {
        for b in [
            "builtin = hyperbola\n",
            "builtin = elliptic-plane\n",
            "builtin = hyperelliptic-localized\nQ = x^5 + x + 1\n",
        ] {
            let text = format!("[field]\np = 5\nprecision = 6\n[curve]\n{b}");
            let spec = parse_spec(&text).unwrap();
            assert_eq!(parse_spec(&serialize_spec(&spec)).unwrap(), spec, "{b}");
        }
    }

    #[test]
    fn test_extension_field_coefficients() {
        let text = "[field]\np = 5\ndegree = 2\n[curve]\nbuiltin = hyperelliptic\nQ = x^3 + (0+1*g)*x + 1\n";
        let spec = parse_spec(text).unwrap();
        assert_eq!(parse_spec(&serialize_spec(&spec)).unwrap(), spec);
    }

    #[test]
    fn test_missing_delta() {
        let spec = parse_spec(ELLIPTIC).unwrap();
        let text = serialize_spec(&spec);
        let start = text.find("[pdelta]").unwrap();
        let stop = text.find("[basis]").unwrap();
        let cut = format!("{}{}", &text[..start], &text[stop..]);
        assert_eq!(
            parse_spec(&cut).unwrap_err(),
            SpecError::Model(ModelError::NamedSection("delta".into()))
        );
    }

    #[test]
    fn test_inconsistent_end() {
        let c = PrecisionContext::new(5, 1, 6, None).unwrap();
        let spec = build_elliptic_plane(&c).unwrap();
        let text =
            serialize_spec(&spec).replace("y = sqrt(x^3 + 1) shift 3", "y = -3 : 1, 0, 0, 1 | 9");
        assert!(matches!(
            parse_spec(&text),
            Err(SpecError::Model(ModelError::EndInconsistent { .. }))
        ));
    }

    #[test]
    fn test_parse_error_positions() {
        let err = parse_spec("[field]\np = 5\n[curve]\nbuiltin = hyperelliptic\nQ = x^3 + $\n")
            .unwrap_err();
        assert_eq!(
            err,
            SpecError::Parse {
                line: 5,
                column: 11,
                message: "unexpected character '$'".into()
            }
        );
        let err = parse_spec("[field]\np = 5\n[curve]\nbuiltin = hyperelliptic\nQ = x^3 + w\n")
            .unwrap_err();
        assert!(matches!(
            err,
            SpecError::Parse {
                line: 5,
                column: 11,
                ..
            }
        ));
        assert!(matches!(
            parse_spec("p = 5\n"),
            Err(SpecError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn test_rational_division() {
        let c = PrecisionContext::new(5, 1, 4, None).unwrap();
        let names = default_names(2);
        let mut p = Parser::new("x/2 + 1", 1, 1, &c, &names).unwrap();
        let f = p.expr().unwrap();
        assert_eq!(f.coeff(&[1, 0]).mul_int(2), c.int(1, 4));
    }
}
