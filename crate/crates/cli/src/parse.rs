//! Text formats: moment sequences, measure specs, family specs, grids and boxes.

use std::fs;
use std::path::Path;

use momentlab::measure::{binomial, dirac, lognormal, normal, poisson, uniform};
use momentlab::{Atom, BoxRegion, MeasureFamily, MeasureRep, MomentSequence};

use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(head, _)| head).trim()
}

/// One value per line, or a single bracketed array. Blank lines and `#`
/// comments are ignored.
pub fn parse_moment_sequence(path: &Path) -> Result<MomentSequence, CliError> {
    let text = read(path)?;
    parse_moment_text(&text).map_err(|(line, message)| CliError::Parse {
        path: path.display().to_string(),
        line,
        message,
    })
}

pub fn parse_moment_text(text: &str) -> Result<MomentSequence, (usize, String)> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let Some(&(first_line, first)) = lines.first() else {
        return Err((0, "no moments found".into()));
    };
    let mut values = Vec::new();
    if first.starts_with('[') {
        let (last_line, last) = *lines.last().expect("non-empty");
        if !last.ends_with(']') {
            return Err((last_line, "unterminated `[`".into()));
        }
        for &(line, body) in &lines {
            let body = body.trim_start_matches('[').trim_end_matches(']');
            for token in body.split(',').map(str::trim) {
                if token.is_empty() {
                    continue;
                }
                values.push(number(token).map_err(|m| (line, m))?);
            }
        }
        if values.is_empty() {
            return Err((first_line, "empty array".into()));
        }
    } else {
        for &(line, body) in &lines {
            values.push(number(body).map_err(|m| (line, m))?);
        }
    }
    MomentSequence::new(values).map_err(|e| (first_line, e.to_string()))
}

fn number(token: &str) -> Result<f64, String> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(format!("non-finite value `{v}`")),
        Err(_) => Err(format!("not a number: `{token}`")),
    }
}

// ---------------------------------------------------------------------------
// expressions

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    K,
    Neg(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>),
    Call(String, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, k: Option<f64>) -> Result<f64, String> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::K => k.ok_or("`k` is only allowed in family members")?,
            Expr::Neg(e) => -e.eval(k)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(k)?, b.eval(k)?);
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' => a / b,
                    _ => a.powf(b),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(k)?;
                match f.as_str() {
                    "sqrt" => v.sqrt(),
                    "exp" => v.exp(),
                    "ln" => v.ln(),
                    _ => unreachable!("checked by the parser"),
                }
            }
        })
    }
}

/// Parsed measure spec; numeric arguments stay symbolic until a value of k
/// is supplied.
#[derive(Debug, Clone, PartialEq)]
pub enum Spec {
    Builtin { name: String, args: Vec<Expr> },
    Atoms(Vec<(Vec<Expr>, Expr)>),
    Mixture(Vec<(Expr, Spec)>),
    Product(Vec<Spec>),
}

const BUILTINS: [(&str, usize, usize); 6] = [
    ("dirac", 1, 1),
    ("uniform", 2, 2),
    ("normal", 2, 2),
    ("lognormal", 1, 1),
    ("binomial", 2, 2),
    ("poisson", 1, 2),
];

impl Spec {
    pub fn build(&self, k: Option<f64>) -> Result<MeasureRep, String> {
        match self {
            Spec::Builtin { name, args } => {
                let v = args.iter().map(|a| a.eval(k)).collect::<Result<Vec<f64>, _>>()?;
                let built = match name.as_str() {
                    "dirac" => Ok(dirac(v[0])),
                    "uniform" => uniform(v[0], v[1]),
                    "normal" => normal(v[0], v[1]),
                    "lognormal" => lognormal(v[0]),
                    "binomial" => binomial(count(v[0], "binomial trials")?, v[1]),
                    "poisson" => {
                        let n = match v.get(1) {
                            Some(&n) => Some(count(n, "poisson truncation")? as usize),
                            None => None,
                        };
                        poisson(v[0], n)
                    }
                    _ => unreachable!("checked by the parser"),
                };
                built.map_err(|e| e.to_string())
            }
            Spec::Atoms(list) => {
                let atoms = list
                    .iter()
                    .map(|(pos, w)| {
                        let x = pos.iter().map(|e| e.eval(k)).collect::<Result<Vec<f64>, _>>()?;
                        Ok(Atom::new(x, w.eval(k)?))
                    })
                    .collect::<Result<Vec<Atom>, String>>()?;
                MeasureRep::atomic(atoms).map_err(|e| e.to_string())
            }
            Spec::Mixture(parts) => {
                let comps = parts
                    .iter()
                    .map(|(c, s)| Ok((c.eval(k)?, s.build(k)?)))
                    .collect::<Result<Vec<_>, String>>()?;
                MeasureRep::mixture(comps).map_err(|e| e.to_string())
            }
            Spec::Product(factors) => {
                let fs = factors.iter().map(|s| s.build(k)).collect::<Result<Vec<_>, _>>()?;
                MeasureRep::product(fs).map_err(|e| e.to_string())
            }
        }
    }
}

fn count(v: f64, what: &str) -> Result<u64, String> {
    let r = v.round();
    if v >= 0.0 && (v - r).abs() <= 1e-9 * r.max(1.0) {
        Ok(r as u64)
    } else {
        Err(format!("{what} must be a non-negative integer, got {v}"))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), String> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", c as char)))
        }
    }

    fn unexpected(&mut self, wanted: &str) -> String {
        match self.peek() {
            Some(c) => format!("expected {wanted} at offset {}, found `{}`", self.pos, c as char),
            None => format!("expected {wanted}, found end of input"),
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start || self.src[start].is_ascii_digit() {
            self.pos = start;
            return None;
        }
        Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn done(&mut self) -> Result<(), String> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of input")),
        }
    }

    fn spec(&mut self) -> Result<Spec, String> {
        let name = self.ident().ok_or_else(|| self.unexpected("a measure name"))?;
        self.expect(b'(')?;
        let spec = match name.as_str() {
            "atoms" => {
                let items = self.list(|p| {
                    let pos = if p.eat(b'(') {
                        let v = p.list(Parser::expr)?;
                        p.expect(b')')?;
                        v
                    } else {
                        vec![p.expr()?]
                    };
                    p.expect(b':')?;
                    Ok((pos, p.expr()?))
                })?;
                Spec::Atoms(items)
            }
            "mixture" => Spec::Mixture(self.list(|p| {
                let c = p.expr()?;
                p.expect(b':')?;
                Ok((c, p.spec()?))
            })?),
            "product" => Spec::Product(self.list(Parser::spec)?),
            _ => {
                let &(_, lo, hi) = BUILTINS
                    .iter()
                    .find(|(n, _, _)| *n == name)
                    .ok_or_else(|| format!("unknown measure `{name}`"))?;
                let args = self.list(Parser::expr)?;
                if args.len() < lo || args.len() > hi {
                    return Err(format!(
                        "`{name}` takes {} argument(s), got {}",
                        if lo == hi { lo.to_string() } else { format!("{lo}-{hi}") },
                        args.len()
                    ));
                }
                Spec::Builtin { name, args }
            }
        };
        self.expect(b')')?;
        Ok(spec)
    }

    /// Comma-separated, possibly empty, terminated by `)` (not consumed).
    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, String>) -> Result<Vec<T>, String> {
        let mut out = Vec::new();
        if self.peek() == Some(b')') {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if !self.eat(b',') {
                return Ok(out);
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => '+',
                Some(b'-') => '-',
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, String> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => '*',
                Some(b'/') => '/',
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, String> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Expr::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, String> {
        if self.eat(b'(') {
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if let Some(name) = self.ident() {
            return match name.as_str() {
                "k" => Ok(Expr::K),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "inf" => Ok(Expr::Num(f64::INFINITY)),
                "sqrt" | "exp" | "ln" => {
                    self.expect(b'(')?;
                    let e = self.expr()?;
                    self.expect(b')')?;
                    Ok(Expr::Call(name, Box::new(e)))
                }
                _ => Err(format!("unknown name `{name}` in expression")),
            };
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let exp_sign = (c == b'-' || c == b'+')
                && self.pos > start
                && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let token = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if token.is_empty() {
            return Err(self.unexpected("a number"));
        }
        token
            .parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| format!("not a number: `{token}`"))
    }
}

fn without_comments(text: &str) -> String {
    text.lines().map(strip_comment).collect::<Vec<_>>().join("\n")
}

pub fn parse_spec_text(text: &str) -> Result<Spec, String> {
    let clean = without_comments(text);
    let mut p = Parser::new(&clean);
    let spec = p.spec()?;
    p.done()?;
    Ok(spec)
}

/// A measure built from one spec expression.
pub fn parse_measure_text(text: &str) -> Result<MeasureRep, String> {
    parse_spec_text(text)?.build(None)
}

pub fn parse_measure_spec(path: &Path) -> Result<MeasureRep, CliError> {
    let text = read(path)?;
    parse_measure_text(&text).map_err(|message| CliError::Spec {
        path: path.display().to_string(),
        message,
    })
}

/// Two lines, `member: <spec in k>` and `limit: <spec>`.
pub fn parse_family_text(text: &str) -> Result<MeasureFamily, String> {
    let mut member = None;
    let mut limit = None;
    for line in text.lines().map(strip_comment).filter(|l| !l.is_empty()) {
        let (key, body) = line
            .split_once(':')
            .ok_or_else(|| format!("expected `member:` or `limit:`, found `{line}`"))?;
        let slot = match key.trim() {
            "member" => &mut member,
            "limit" => &mut limit,
            other => return Err(format!("unknown family key `{other}`")),
        };
        if slot.is_some() {
            return Err(format!("duplicate `{}` line", key.trim()));
        }
        *slot = Some(body.trim().to_string());
    }
    let member = member.ok_or("missing `member:` line")?;
    let limit = limit.ok_or("missing `limit:` line")?;
    let spec = parse_spec_text(&member)?;
    let limit = parse_measure_text(&limit)?;
    spec.build(Some(1.0))?;
    Ok(MeasureFamily::new(member, limit, move |k| {
        spec.build(Some(k as f64))
            .map_err(momentlab::Error::InvalidMeasure)
    }))
}

pub fn parse_family_spec(path: &Path) -> Result<MeasureFamily, CliError> {
    let text = read(path)?;
    parse_family_text(&text).map_err(|message| CliError::Spec {
        path: path.display().to_string(),
        message,
    })
}

// ---------------------------------------------------------------------------
// small flag grammars

pub fn number_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| number(t.trim())).collect()
}

/// `half:lo,hi` (points j + 1/2 for lo ≤ j < hi), `lin:a,b,n` (n evenly
/// spaced points) or an explicit comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("half:") {
        let v = number_list(rest)?;
        let [lo, hi] = v[..] else {
            return Err("`half:` takes lo,hi".into());
        };
        if lo.fract() != 0.0 || hi.fract() != 0.0 || lo >= hi {
            return Err("`half:` bounds must be integers with lo < hi".into());
        }
        return Ok(momentlab::convergence::half_integer_grid(lo as i64, hi as i64));
    }
    if let Some(rest) = s.strip_prefix("lin:") {
        let v = number_list(rest)?;
        let [a, b, n] = v[..] else {
            return Err("`lin:` takes a,b,n".into());
        };
        let n = count(n, "grid size")? as usize;
        if n < 2 || a >= b {
            return Err("`lin:` needs a < b and n ≥ 2".into());
        }
        return Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect());
    }
    let v = number_list(s)?;
    if v.is_empty() {
        return Err("empty grid".into());
    }
    Ok(v)
}

/// `a1,…,ad:b1,…,bd`
pub fn parse_box(s: &str) -> Result<BoxRegion, String> {
    let (a, b) = s.split_once(':').ok_or("box must look like a1,...,ad:b1,...,bd")?;
    let parse = |t: &str| -> Result<Vec<f64>, String> {
        t.split(',')
            .map(|x| {
                let x = x.trim();
                match x {
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "inf" => Ok(f64::INFINITY),
                    _ => x.parse::<f64>().map_err(|_| format!("not a number: `{x}`")),
                }
            })
            .collect()
    };
    BoxRegion::new(parse(a)?, parse(b)?).map_err(|e| e.to_string())
}

pub fn parse_ks(s: &str) -> Result<Vec<u64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<u64>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(format!("family index must be a positive integer, got `{t}`")),
            }
        })
        .collect()
}
