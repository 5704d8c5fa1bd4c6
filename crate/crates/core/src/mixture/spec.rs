use super::{Component, Mixture};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Family {
    Dirac,
    Gauss,
    Unif,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, position: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { position, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            let found = self.peek().map_or("end of input".to_string(), |f| format!("'{f}'"));
            self.err(self.pos, format!("expected '{c}', found {found}"))
        }
    }

    fn family(&mut self) -> Result<Family> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        let family = match &self.text[start..self.pos] {
            "dirac" => Family::Dirac,
            "gauss" => Family::Gauss,
            "unif" => Family::Unif,
            "" => return self.err(start, "expected a family name (dirac, gauss, unif)"),
            other => return self.err(start, format!("unknown family '{other}'")),
        };
        self.expect(':')?;
        Ok(family)
    }

    fn number(&mut self) -> Result<(f64, usize)> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() {
            let b = bytes[self.pos];
            let sign_ok = (b == b'-' || b == b'+') && (self.pos == start || matches!(bytes[self.pos - 1], b'e' | b'E'));
            if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || sign_ok {
                self.pos += 1;
            } else {
                break;
            }
        }
        let token = &self.text[start..self.pos];
        if token.is_empty() {
            return self.err(start, "expected a number");
        }
        match token.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((v, start)),
            _ => self.err(start, format!("invalid number '{token}'")),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<Mixture> {
    let mut cur = Cursor { text, pos: 0 };
    let mut parts = Vec::new();
    loop {
        let family = cur.family()?;
        loop {
            let (w, wpos) = cur.number()?;
            if !(w > 0.0) {
                return cur.err(wpos, format!("weight {w} must be positive"));
            }
            cur.expect('@')?;
            let (a, _) = cur.number()?;
            let component = match family {
                Family::Dirac => Component::Dirac { location: a },
                Family::Gauss => {
                    cur.expect(':')?;
                    let (v, vpos) = cur.number()?;
                    if v < 0.0 {
                        return cur.err(vpos, format!("variance {v} must be >= 0"));
                    }
                    Component::Gauss { mean: a, variance: v }
                }
                Family::Unif => {
                    cur.expect(':')?;
                    let (b, bpos) = cur.number()?;
                    if !(a < b) {
                        return cur.err(bpos, format!("uniform bounds need lo < hi, got [{a}, {b}]"));
                    }
                    Component::Unif { lo: a, hi: b }
                }
            };
            parts.push((w, component));
            if !cur.eat(',') {
                break;
            }
        }
        if !cur.eat('+') {
            break;
        }
    }
    cur.skip_ws();
    if cur.pos != text.len() {
        return cur.err(cur.pos, format!("unexpected trailing input '{}'", &text[cur.pos..]));
    }
    Mixture::new(parts)
}
