//! Minimal s-expression reader for terms and formulas typed on the command line.
//!
//! A word immediately followed by `(` (no space) absorbs the parenthesised
//! argument list, so atom labels such as `w(1,0,1,1)` read as single words.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Word(String, usize),
    List(Vec<SExpr>, usize),
}

impl SExpr {
    pub fn offset(&self) -> usize {
        match self {
            SExpr::Word(_, o) | SExpr::List(_, o) => *o,
        }
    }
}

pub fn parse_error(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

pub fn parse(input: &str) -> Result<SExpr> {
    let mut reader = Reader {
        src: input.as_bytes(),
        pos: 0,
    };
    let expr = reader.expr()?;
    reader.skip_ws();
    if reader.pos != reader.src.len() {
        return Err(parse_error(reader.pos, "trailing input"));
    }
    Ok(expr)
}

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<SExpr> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            None => Err(parse_error(start, "unexpected end of input")),
            Some(b')') => Err(parse_error(start, "unexpected `)`")),
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.src.get(self.pos) {
                        None => return Err(parse_error(start, "unclosed `(`")),
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(SExpr::List(items, start));
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
            }
            Some(_) => {
                while self.pos < self.src.len() {
                    let c = self.src[self.pos];
                    if c.is_ascii_whitespace() || c == b')' {
                        break;
                    }
                    if c == b'(' {
                        let close = self.src[self.pos..]
                            .iter()
                            .position(|&c| c == b')')
                            .ok_or_else(|| parse_error(self.pos, "unclosed label arguments"))?;
                        self.pos += close + 1;
                        break;
                    }
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos])
                    .map_err(|_| parse_error(start, "invalid utf-8"))?;
                Ok(SExpr::Word(word.to_string(), start))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str, o: usize) -> SExpr {
        SExpr::Word(s.into(), o)
    }

    #[test]
    fn labels_are_single_words() {
        assert_eq!(
            parse("(comp r(1,1) w(1,0,1,1))").unwrap(),
            SExpr::List(vec![w("comp", 1), w("r(1,1)", 6), w("w(1,0,1,1)", 13)], 0)
        );
        assert_eq!(parse("  id ").unwrap(), w("id", 2));
    }

    #[test]
    fn errors_carry_offsets() {
        assert!(matches!(parse("(a b"), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(parse("a b"), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(parse(")"), Err(Error::Parse { offset: 0, .. })));
        assert!(parse("").is_err());
    }
}
