use super::term::LambdaTerm;
use thiserror::Error;

/// Malformed term text. `offset` counts characters from the start of the
/// input, so `λ` and its `\` alias occupy the same width.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

/// Parses the term grammar
///
/// ```text
/// term := var | "λ" var "." term | "(" term ")" term
/// var  := [a-z][a-z0-9]*
/// ```
///
/// `\` is accepted for `λ` and whitespace between tokens is ignored.
pub fn parse(text: &str) -> Result<LambdaTerm, SyntaxError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let term = p.term()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(term)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, message: &str) -> SyntaxError {
        SyntaxError {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, want: char) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(self.error(&format!("expected '{want}'"))),
            None => Err(self.error(&format!("expected '{want}', found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() => {}
            Some(_) => return Err(self.error("expected identifier")),
            None => return Err(self.error("expected identifier, found end of input")),
        }
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    // Abstraction bodies and application arguments extend to the end of the
    // enclosing term, so only the function position of an application needs
    // brackets. Loop instead of recursing on the right spine.
    fn term(&mut self) -> Result<LambdaTerm, SyntaxError> {
        enum Frame {
            Abs(String),
            AppArg(LambdaTerm),
        }
        let mut frames = Vec::new();
        let mut done = loop {
            match self.peek() {
                Some('λ') | Some('\\') => {
                    self.pos += 1;
                    let x = self.ident()?;
                    self.expect('.')?;
                    frames.push(Frame::Abs(x));
                }
                Some('(') => {
                    self.pos += 1;
                    let f = self.term()?;
                    self.expect(')')?;
                    frames.push(Frame::AppArg(f));
                }
                Some(_) => break LambdaTerm::var(self.ident()?),
                None => return Err(self.error("expected term, found end of input")),
            }
        };
        while let Some(frame) = frames.pop() {
            done = match frame {
                Frame::Abs(x) => LambdaTerm::abs(x, done),
                Frame::AppArg(f) => LambdaTerm::app(f, done),
            };
        }
        Ok(done)
    }
}
