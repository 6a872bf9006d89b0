//! Exact-form generator entries such as `"sqrt(2)"`, `"3*sqrt(2)"`,
//! `"sqrt(2)+pi"` or `"1/3"`.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | number | 'pi' | 'sqrt' '(' expr ')' | '(' expr ')'
//! ```

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// A generator matrix entry: a plain decimal, or an exact form kept verbatim
/// next to its double-precision value.
#[derive(Clone, Debug, PartialEq)]
pub enum Entry {
    Number(f64),
    Exact { form: String, value: f64 },
}

impl Entry {
    pub fn parse_form(form: &str) -> Result<Self> {
        let value = evaluate(form)?;
        log::debug!("exact form {form:?} evaluated to {value:.17e}");
        Ok(Entry::Exact {
            form: form.to_string(),
            value,
        })
    }

    pub fn value(&self) -> f64 {
        match self {
            Entry::Number(v) => *v,
            Entry::Exact { value, .. } => *value,
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Number(v) => write!(f, "{v}"),
            Entry::Exact { form, .. } => f.write_str(form),
        }
    }
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Entry::Number(v) => s.serialize_f64(*v),
            Entry::Exact { form, .. } => s.serialize_str(form),
        }
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Form(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Entry::Number(v)),
            Raw::Form(s) => Entry::parse_form(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Evaluates an exact form to double precision.
pub fn evaluate(src: &str) -> Result<f64> {
    let mut p = Parser { src, pos: 0 };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.error("trailing input"));
    }
    if !v.is_finite() {
        return Err(Error::Parse(format!("{src:?} is not finite")));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at offset {} in {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        loop {
            if self.eat("+") {
                v += self.term()?;
            } else if self.eat("-") {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.factor()?;
        loop {
            if self.eat("*") {
                v *= self.factor()?;
            } else if self.eat("/") {
                let d = self.factor()?;
                if d == 0.0 {
                    return Err(self.error("division by zero"));
                }
                v /= d;
            } else {
                return Ok(v);
            }
        }
    }

    fn factor(&mut self) -> Result<f64> {
        if self.eat("-") {
            return Ok(-self.factor()?);
        }
        if self.eat("(") {
            let v = self.expr()?;
            if !self.eat(")") {
                return Err(self.error("expected ')'"));
            }
            return Ok(v);
        }
        if self.eat("pi") {
            return Ok(PI);
        }
        if self.eat("sqrt") {
            if !self.eat("(") {
                return Err(self.error("expected '(' after sqrt"));
            }
            let v = self.expr()?;
            if !self.eat(")") {
                return Err(self.error("expected ')'"));
            }
            if v < 0.0 {
                return Err(self.error("square root of a negative number"));
            }
            return Ok(v.sqrt());
        }
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E'))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.error("expected a number, pi, sqrt or '('"));
        }
        let lit = &self.rest()[..len];
        let v: f64 = lit.parse().map_err(|_| self.error("malformed number"))?;
        self.pos += len;
        Ok(v)
    }
}
