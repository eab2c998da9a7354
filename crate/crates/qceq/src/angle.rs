//! Affine angle expressions: `c0 + Σ ci·param_i`, used for numeric gate
//! angles and for the parameter slots of rule schemas.

use std::f64::consts::PI;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Affine {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Affine {
    pub fn konst(v: f64) -> Self {
        Affine { terms: vec![], constant: v }
    }

    pub fn param(i: usize) -> Self {
        Affine { terms: vec![(i, 1.0)], constant: 0.0 }
    }

    pub fn eval(&self, params: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, c)| c * params[i]).sum::<f64>() + self.constant
    }

    pub fn is_const(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(param, coefficient)` when the expression mentions exactly one parameter.
    pub fn single(&self) -> Option<(usize, f64)> {
        match self.terms.as_slice() {
            [(i, c)] => Some((*i, *c)),
            _ => None,
        }
    }

    pub fn params(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().map(|t| t.0)
    }

    fn add(mut self, other: Affine, sign: f64) -> Affine {
        for (i, c) in other.terms {
            match self.terms.iter_mut().find(|t| t.0 == i) {
                Some(t) => t.1 += sign * c,
                None => self.terms.push((i, sign * c)),
            }
        }
        self.terms.retain(|t| t.1 != 0.0);
        self.constant += sign * other.constant;
        self
    }

    fn scale(mut self, k: f64) -> Affine {
        for t in &mut self.terms {
            t.1 *= k;
        }
        self.terms.retain(|t| t.1 != 0.0);
        self.constant *= k;
        self
    }

    /// Render with parameter names, e.g. `p1+p2`, `-t/2`.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        for &(i, c) in &self.terms {
            let name = &names[i];
            let piece = if c == 1.0 {
                name.clone()
            } else if c == -1.0 {
                format!("-{name}")
            } else if (1.0 / c).fract() == 0.0 && c.abs() < 1.0 {
                format!("{}{name}/{}", if c < 0.0 { "-" } else { "" }, (1.0 / c).abs())
            } else {
                format!("{c}*{name}")
            };
            if !out.is_empty() && !piece.starts_with('-') {
                out.push('+');
            }
            out.push_str(&piece);
        }
        if self.constant != 0.0 || out.is_empty() {
            let k = format_angle(self.constant);
            if !out.is_empty() && !k.starts_with('-') {
                out.push('+');
            }
            out.push_str(&k);
        }
        out
    }
}

/// Shortest round-trip float, with common multiples of π spelled out.
pub fn format_angle(v: f64) -> String {
    for (num, den) in [(1, 1), (1, 2), (1, 4), (-1, 1), (-1, 2), (-1, 4), (2, 1), (3, 2)] {
        if v == num as f64 * PI / den as f64 {
            let sign = if num < 0 { "-" } else { "" };
            let n = (num as i32).abs();
            let head = if n == 1 { "pi".to_string() } else { format!("{n}*pi") };
            return if den == 1 { format!("{sign}{head}") } else { format!("{sign}{head}/{den}") };
        }
    }
    format!("{v:?}")
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..64).map(|i| format!("${i}")).collect();
        write!(f, "{}", self.render(&names))
    }
}

/// Parameter name table. When `open` is false, unknown identifiers are errors.
#[derive(Clone, Debug, Default)]
pub struct ParamTable {
    pub names: Vec<String>,
    pub open: bool,
}

impl ParamTable {
    pub fn closed() -> Self {
        ParamTable { names: vec![], open: false }
    }

    pub fn open() -> Self {
        ParamTable { names: vec![], open: true }
    }

    pub fn index(&mut self, name: &str) -> Option<usize> {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return Some(i);
        }
        if self.open {
            self.names.push(name.to_string());
            Some(self.names.len() - 1)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = vec![];
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            if i < cs.len() && (cs[i] == 'e' || cs[i] == 'E') {
                let save = i;
                i += 1;
                if i < cs.len() && (cs[i] == '+' || cs[i] == '-') {
                    i += 1;
                }
                if i < cs.len() && cs[i].is_ascii_digit() {
                    while i < cs.len() && cs[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let text: String = cs[start..i].iter().collect();
            out.push(Tok::Num(text.parse().map_err(|_| format!("bad number `{text}`"))?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_' || cs[i] == '\'') {
                i += 1;
            }
            out.push(Tok::Ident(cs[start..i].iter().collect()));
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    table: &'a mut ParamTable,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<Affine, String> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = acc.add(rhs, if c == '+' { 1.0 } else { -1.0 });
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Affine, String> {
        let mut acc = self.factor()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = if c == '*' {
                if acc.is_const() {
                    rhs.scale(acc.constant)
                } else if rhs.is_const() {
                    acc.scale(rhs.constant)
                } else {
                    return Err("product of two parameters is not affine".into());
                }
            } else {
                if !rhs.is_const() {
                    return Err("division by a parameter is not affine".into());
                }
                if rhs.constant == 0.0 {
                    return Err("division by zero".into());
                }
                acc.scale(1.0 / rhs.constant)
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Affine, String> {
        let tok = self.peek().cloned().ok_or("unexpected end of expression")?;
        self.pos += 1;
        match tok {
            Tok::Op('-') => Ok(self.factor()?.scale(-1.0)),
            Tok::Op('+') => self.factor(),
            Tok::Op('(') => {
                let e = self.expr()?;
                if self.peek() != Some(&Tok::Op(')')) {
                    return Err("missing `)`".into());
                }
                self.pos += 1;
                Ok(e)
            }
            Tok::Num(v) => Ok(Affine::konst(v)),
            Tok::Ident(name) if name == "pi" || name == "π" => Ok(Affine::konst(PI)),
            Tok::Ident(name) => match self.table.index(&name) {
                Some(i) => Ok(Affine::param(i)),
                None => Err(format!("unknown identifier `{name}`")),
            },
            Tok::Op(c) => Err(format!("unexpected `{c}`")),
        }
    }
}

pub fn parse_affine(s: &str, table: &mut ParamTable) -> Result<Affine, String> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err("empty expression".into());
    }
    let mut p = Parser { toks, pos: 0, table };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err("trailing tokens in expression".into());
    }
    Ok(e)
}

/// Numeric expression such as `pi/4`, `-3*pi/2`, `0.25e-1`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    Ok(parse_affine(s, &mut ParamTable::closed())?.constant)
}

/// Reduce into `[0, period)`.
pub fn wrap(v: f64, period: f64) -> f64 {
    let r = v.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Distance between two angles modulo `period`.
pub fn angle_dist(a: f64, b: f64, period: f64) -> f64 {
    let d = wrap(a - b, period);
    d.min(period - d)
}
