//! Tokenizer for the clause reader.

use std::ops::Range;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Name(String),
    Var(String),
    Number,
    Str,
    /// One of `( ) [ ] { } , |`.
    Punct(char),
    /// `^REL_ID` definition reference suffix.
    DefRef(String),
    /// Clause-terminating period.
    End,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Range<usize>,
    /// Whitespace or a comment precedes this token.
    pub layout_before: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct LexError {
    pub offset: usize,
    pub message: String,
    pub unsupported: bool,
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

fn is_symbol(c: char) -> bool {
    SYMBOL_CHARS.contains(c)
}

fn is_alnum(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    Lexer {
        src,
        pos: 0,
        out: Vec::new(),
    }
    .run()
}

struct Lexer<'s> {
    src: &'s str,
    pos: usize,
    out: Vec<Token>,
}

impl<'s> Lexer<'s> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat_while(&mut self, f: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn err(&self, offset: usize, message: impl Into<String>) -> LexError {
        LexError {
            offset,
            message: message.into(),
            unsupported: false,
        }
    }

    /// Skips whitespace and comments; returns whether anything was skipped.
    fn layout(&mut self) -> Result<bool, LexError> {
        let start = self.pos;
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => self.eat_while(|c| c != '\n'),
                Some('/') if self.peek_at(1) == Some('*') => {
                    let open = self.pos;
                    self.pos += 2;
                    match self.src[self.pos..].find("*/") {
                        Some(i) => self.pos += i + 2,
                        None => return Err(self.err(open, "unterminated block comment")),
                    }
                }
                _ => break,
            }
        }
        Ok(self.pos > start)
    }

    fn push(&mut self, tok: Tok, start: usize, layout_before: bool) {
        self.out.push(Token {
            tok,
            span: start..self.pos,
            layout_before,
        });
    }

    fn quoted(&mut self, q: char) -> Result<String, LexError> {
        let open = self.pos;
        self.bump();
        let mut text = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err(open, format!("unterminated {q}-quoted text"))),
                Some(c) if c == q => {
                    if self.peek() == Some(q) {
                        self.bump();
                        text.push(q);
                    } else {
                        return Ok(text);
                    }
                }
                Some('\\') => match self.bump() {
                    Some(c) => {
                        text.push('\\');
                        text.push(c);
                    }
                    None => return Err(self.err(open, format!("unterminated {q}-quoted text"))),
                },
                Some(c) => text.push(c),
            }
        }
    }

    fn number(&mut self) -> Result<(), LexError> {
        let start = self.pos;
        if self.peek() == Some('0') {
            match self.peek_at(1) {
                Some('\'') => {
                    return Err(LexError {
                        offset: start,
                        message: "character code literals are not supported".into(),
                        unsupported: true,
                    })
                }
                Some('x') if self.peek_at(2).is_some_and(|c| c.is_ascii_hexdigit()) => {
                    self.pos += 2;
                    self.eat_while(|c| c.is_ascii_hexdigit());
                    return Ok(());
                }
                Some('o') if self.peek_at(2).is_some_and(|c| c.is_digit(8)) => {
                    self.pos += 2;
                    self.eat_while(|c| c.is_digit(8));
                    return Ok(());
                }
                Some('b') if self.peek_at(2).is_some_and(|c| c.is_digit(2)) => {
                    self.pos += 2;
                    self.eat_while(|c| c.is_digit(2));
                    return Ok(());
                }
                _ => {}
            }
        }
        self.eat_while(|c| c.is_ascii_digit());
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            self.eat_while(|c| c.is_ascii_digit());
            if matches!(self.peek(), Some('e' | 'E')) {
                let save = self.pos;
                self.bump();
                if matches!(self.peek(), Some('+' | '-')) {
                    self.bump();
                }
                if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.eat_while(|c| c.is_ascii_digit());
                } else {
                    self.pos = save;
                }
            }
        }
        if self.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
            return Err(self.err(start, "malformed number"));
        }
        Ok(())
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        loop {
            let layout = self.layout()?;
            let start = self.pos;
            let Some(c) = self.peek() else { break };
            match c {
                'a'..='z' => {
                    self.eat_while(is_alnum);
                    let name = self.src[start..self.pos].to_owned();
                    self.push(Tok::Name(name), start, layout);
                }
                'A'..='Z' | '_' => {
                    self.eat_while(is_alnum);
                    let name = self.src[start..self.pos].to_owned();
                    self.push(Tok::Var(name), start, layout);
                }
                '0'..='9' => {
                    self.number()?;
                    self.push(Tok::Number, start, layout);
                }
                '\'' => {
                    let name = self.quoted('\'')?;
                    self.push(Tok::Name(name), start, layout);
                }
                '"' | '`' => {
                    self.quoted(c)?;
                    self.push(Tok::Str, start, layout);
                }
                '(' | ')' | '[' | ']' | '{' | '}' | ',' | '|' => {
                    self.bump();
                    self.push(Tok::Punct(c), start, layout);
                }
                '!' | ';' => {
                    self.bump();
                    self.push(Tok::Name(c.to_string()), start, layout);
                }
                '^' if self.peek_at(1).is_some_and(|c| c.is_ascii_alphabetic() || c == '_') => {
                    self.bump();
                    let id_start = self.pos;
                    self.eat_while(is_alnum);
                    let id = self.src[id_start..self.pos].to_owned();
                    self.push(Tok::DefRef(id), start, layout);
                }
                '.' if self
                    .peek_at(1)
                    .map_or(true, |n| n.is_whitespace() || n == '%') =>
                {
                    self.bump();
                    self.push(Tok::End, start, layout);
                }
                c if is_symbol(c) => {
                    self.eat_while(is_symbol);
                    let name = self.src[start..self.pos].to_owned();
                    self.push(Tok::Name(name), start, layout);
                }
                c => return Err(self.err(start, format!("unexpected character `{c}`"))),
            }
        }
        Ok(self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn def_ref_suffix_is_one_token() {
        let toks = kinds("b(X)^R_b, c.");
        assert!(toks.contains(&Tok::DefRef("R_b".into())));
        assert_eq!(toks.last(), Some(&Tok::End));
    }

    #[test]
    fn period_inside_symbols_is_not_an_end() {
        let toks = kinds("X =.. L.");
        assert_eq!(toks[1], Tok::Name("=..".into()));
        assert_eq!(toks.iter().filter(|t| **t == Tok::End).count(), 1);
    }

    #[test]
    fn comments_are_layout() {
        let toks = tokenize("a. % one\n/* two */ b.").unwrap();
        assert_eq!(toks.len(), 4);
        assert!(toks[2].layout_before);
    }

    #[test]
    fn floats_and_quoted_atoms() {
        let toks = kinds("x(1.5e3, 'it''s', \"s\").");
        assert_eq!(toks[2], Tok::Number);
        assert_eq!(toks[4], Tok::Name("it's".into()));
        assert_eq!(toks[6], Tok::Str);
    }

    #[test]
    fn char_codes_are_unsupported() {
        let e = tokenize("x(0'a).").unwrap_err();
        assert!(e.unsupported);
    }

    #[test]
    fn unterminated_quote() {
        assert!(tokenize("x('abc).").is_err());
        assert!(tokenize("x. /* open").is_err());
    }
}
