//! Tokens with line/column positions.

use super::Diagnostic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Unsigned decimal literal as written.
    Number(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const SYMBOLS: [&str; 18] = [
    "<=", ">=", "!=", "{", "}", "(", ")", "[", "]", ";", ":", ",", "+", "-", "*", "/", "^", "=",
];
const SINGLE: [&str; 2] = ["<", ">"];

struct Cursor {
    chars: Vec<char>,
    i: usize,
    line: usize,
    column: usize,
}

impl Cursor {
    fn at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn span(&self) -> Span {
        Span {
            line: self.line,
            column: self.column,
        }
    }

    fn advance(&mut self) -> char {
        let c = self.chars[self.i];
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        c
    }

    fn take_while(&mut self, s: &mut String, f: impl Fn(char) -> bool) {
        while self.at(0).is_some_and(&f) {
            s.push(self.advance());
        }
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor {
        chars: text.chars().collect(),
        i: 0,
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.at(0) {
        let span = cur.span();
        if c.is_whitespace() {
            cur.advance();
            continue;
        }
        if c == '#' || (c == '/' && cur.at(1) == Some('/')) {
            while cur.at(0).is_some_and(|c| c != '\n') {
                cur.advance();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            cur.take_while(&mut s, |c| {
                c.is_ascii_alphanumeric() || c == '_' || c == '\''
            });
            out.push(Token {
                tok: Tok::Ident(s),
                span,
            });
            continue;
        }
        let digit = |c: Option<char>| c.is_some_and(|c| c.is_ascii_digit());
        if c.is_ascii_digit() || (c == '.' && digit(cur.at(1))) {
            let mut s = String::new();
            cur.take_while(&mut s, |c| c.is_ascii_digit());
            if cur.at(0) == Some('.') {
                s.push(cur.advance());
                cur.take_while(&mut s, |c| c.is_ascii_digit());
            }
            if matches!(cur.at(0), Some('e' | 'E')) {
                let sign = matches!(cur.at(1), Some('+' | '-'));
                let skip = if sign { 2 } else { 1 };
                if digit(cur.at(skip)) {
                    for _ in 0..skip {
                        s.push(cur.advance());
                    }
                    cur.take_while(&mut s, |c| c.is_ascii_digit());
                }
            }
            out.push(Token {
                tok: Tok::Number(s),
                span,
            });
            continue;
        }
        let rest: String = [cur.at(0), cur.at(1)].iter().flatten().collect();
        if let Some(sym) = SYMBOLS
            .iter()
            .chain(SINGLE.iter())
            .find(|s| rest.starts_with(**s))
        {
            for _ in 0..sym.len() {
                cur.advance();
            }
            out.push(Token {
                tok: Tok::Sym(sym),
                span,
            });
            continue;
        }
        return Err(Diagnostic::syntax(
            span,
            format!("unexpected character `{}`", c.escape_debug()),
            vec![],
        ));
    }
    out.push(Token {
        tok: Tok::Eof,
        span: cur.span(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_symbols() {
        let t = tokenize("a <= 1.5e-3 # note\n  D[x](u)").unwrap();
        assert_eq!(t[1].tok, Tok::Sym("<="));
        assert_eq!(t[2].tok, Tok::Number("1.5e-3".into()));
        assert_eq!(t[3].span, Span { line: 2, column: 3 });
        let e = tokenize("x @ y").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
    }
}
