use super::ast::{Pos, Span};
use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Char,
    Str,
    Punct,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punct && self.text == p
    }

    pub fn is_word(&self, w: &str) -> bool {
        self.kind == TokenKind::Ident && self.text == w
    }

    pub fn is_wordlike(&self) -> bool {
        matches!(self.kind, TokenKind::Ident | TokenKind::Number)
    }
}

// Longest first. `>` is always emitted alone (except `>=`) so that nested
// type arguments close correctly; the parser reassembles shift operators.
const PUNCTS: &[&str] = &[
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "<<", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@", "=",
    ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn pos(&self) -> Pos {
        Pos { offset: self.offset, line: self.line, col: self.col }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.offset..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.rest().chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn bump_n(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { src, offset: 0, line: 1, col: 1 };
    let mut tokens = Vec::new();
    loop {
        skip_trivia(&mut cur)?;
        let start = cur.pos();
        let Some(c) = cur.peek() else {
            tokens.push(Token { kind: TokenKind::Eof, text: String::new(), span: Span::empty(start) });
            return Ok(tokens);
        };
        let kind = if c.is_alphabetic() || c == '_' || c == '$' {
            while cur.peek().is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '$') {
                cur.bump();
            }
            TokenKind::Ident
        } else if c.is_ascii_digit() || (c == '.' && cur.peek2().is_some_and(|d| d.is_ascii_digit())) {
            lex_number(&mut cur);
            TokenKind::Number
        } else if c == '"' {
            if cur.rest().starts_with("\"\"\"") {
                lex_text_block(&mut cur, start)?;
            } else {
                lex_quoted(&mut cur, '"', start)?;
            }
            TokenKind::Str
        } else if c == '\'' {
            lex_quoted(&mut cur, '\'', start)?;
            TokenKind::Char
        } else if let Some(p) = PUNCTS.iter().find(|p| cur.rest().starts_with(**p)) {
            cur.bump_n(p.len());
            TokenKind::Punct
        } else {
            return Err(ParseError::new(start, format!("unexpected character `{c}`")));
        };
        let end = cur.pos();
        tokens.push(Token { kind, text: src[start.offset..end.offset].to_string(), span: Span::new(start, end) });
    }
}

fn skip_trivia(cur: &mut Cursor<'_>) -> Result<(), ParseError> {
    loop {
        match cur.peek() {
            Some(c) if c.is_whitespace() => {
                cur.bump();
            }
            Some('/') if cur.peek2() == Some('/') => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            }
            Some('/') if cur.peek2() == Some('*') => {
                let start = cur.pos();
                cur.bump_n(2);
                loop {
                    if cur.rest().starts_with("*/") {
                        cur.bump_n(2);
                        break;
                    }
                    if cur.bump().is_none() {
                        return Err(ParseError::new(start, "unterminated block comment"));
                    }
                }
            }
            _ => return Ok(()),
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>) {
    let rest = cur.rest();
    if rest.starts_with("0x") || rest.starts_with("0X") || rest.starts_with("0b") || rest.starts_with("0B") {
        cur.bump_n(2);
        while cur.peek().is_some_and(|c| c.is_ascii_hexdigit() || c == '_') {
            cur.bump();
        }
    } else {
        while cur.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
            cur.bump();
        }
        if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
            while cur.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
                cur.bump();
            }
        } else if cur.peek() == Some('.') && !cur.peek2().is_some_and(|c| c.is_alphabetic() || c == '.') {
            // `1.` is a valid double literal
            cur.bump();
        }
        if matches!(cur.peek(), Some('e' | 'E')) {
            cur.bump();
            if matches!(cur.peek(), Some('+' | '-')) {
                cur.bump();
            }
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
            }
        }
    }
    if matches!(cur.peek(), Some('l' | 'L' | 'f' | 'F' | 'd' | 'D')) {
        cur.bump();
    }
}

fn lex_quoted(cur: &mut Cursor<'_>, quote: char, start: Pos) -> Result<(), ParseError> {
    cur.bump();
    loop {
        match cur.bump() {
            Some('\\') => {
                cur.bump();
            }
            Some(c) if c == quote => return Ok(()),
            Some('\n') | None => return Err(ParseError::new(start, "unterminated literal")),
            Some(_) => {}
        }
    }
}

fn lex_text_block(cur: &mut Cursor<'_>, start: Pos) -> Result<(), ParseError> {
    cur.bump_n(3);
    loop {
        if cur.rest().starts_with("\"\"\"") {
            cur.bump_n(3);
            return Ok(());
        }
        match cur.bump() {
            Some('\\') => {
                cur.bump();
            }
            Some(_) => {}
            None => return Err(ParseError::new(start, "unterminated text block")),
        }
    }
}

/// Joins token texts, inserting a space only where two tokens would
/// otherwise lex differently.
pub fn join_tokens<'a>(tokens: impl IntoIterator<Item = &'a Token>) -> String {
    const SAFE: &[&str] = &["<", ">", ",", "(", ")", "[", "]", ".", "@", "?", "{", "}", ";"];
    let mut out = String::new();
    let mut prev: Option<&Token> = None;
    for t in tokens {
        if let Some(p) = prev {
            let both_words = p.is_wordlike() && t.is_wordlike();
            let both_punct = p.kind == TokenKind::Punct
                && t.kind == TokenKind::Punct
                && !(SAFE.contains(&p.text.as_str()) || SAFE.contains(&t.text.as_str()));
            let after_sep = (p.is_punct(",") || p.is_punct("?")) && t.is_wordlike() || p.is_punct(",") && t.is_punct("?");
            let merges = p.is_punct(">") && t.text.starts_with('=');
            if both_words || both_punct || after_sep || merges {
                out.push(' ');
            }
        }
        out.push_str(&t.text);
        prev = Some(t);
    }
    out
}
