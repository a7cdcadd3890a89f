use crate::grammar::Grammar;
use crate::term::{Nonterminal, Term};

/// A character cursor shared by the term and rule parsers.
pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    pub(crate) fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    pub(crate) fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub(crate) fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub(crate) fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub(crate) fn ident(&mut self) -> Result<&'a str, String> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let mut end = 0;
        for (i, c) in rest.char_indices() {
            let ok = if i == 0 { c.is_ascii_alphabetic() || c == '_' } else { c.is_ascii_alphanumeric() || c == '_' };
            if !ok {
                break;
            }
            end = i + c.len_utf8();
        }
        if end == 0 {
            return Err(match rest.chars().next() {
                Some(c) => format!("expected identifier, found `{c}`"),
                None => "expected identifier, found end of input".to_string(),
            });
        }
        self.pos += end;
        Ok(&rest[..end])
    }

    /// Parses one term. Nonterminal arities are taken from the number of
    /// children written.
    pub(crate) fn term(&mut self) -> Result<Term, String> {
        let name = self.ident()?;
        if let Some(index) = variable_index(name) {
            return Term::var(index).map_err(|e| e.to_string());
        }
        let mut args = Vec::new();
        if self.eat('(') {
            loop {
                args.push(self.term()?);
                if self.eat(')') {
                    break;
                }
                if !self.eat(',') {
                    return Err(format!("expected `,` or `)` in arguments of `{name}`"));
                }
            }
        }
        let head = Nonterminal::new(name, args.len()).map_err(|e| e.to_string())?;
        Term::app(head, args).map_err(|e| e.to_string())
    }
}

/// `Some(i)` for names of the reserved form `x<digits>`.
pub(crate) fn variable_index(name: &str) -> Option<u32> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(digits.parse().unwrap_or(u32::MAX))
}

/// Parses a standalone term such as `A(I(Bot),x2)`.
pub fn parse_term(text: &str) -> Result<Term, String> {
    let mut c = Cursor::new(text);
    let t = c.term()?;
    if !c.at_end() {
        return Err(format!("unexpected trailing input `{}`", c.rest().trim()));
    }
    Ok(t)
}

/// Parses a closed term and checks it against the grammar's declarations.
pub fn parse_term_in(g: &Grammar, text: &str) -> Result<Term, String> {
    let t = parse_term(text)?;
    g.check_closed(&t).map_err(|e| e.to_string())?;
    Ok(t)
}
