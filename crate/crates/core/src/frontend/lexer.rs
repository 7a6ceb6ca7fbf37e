use std::fmt;

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Let,
    In,
    Mkref,
    Ifz,
    Then,
    Else,
    Alias,
    Assert,
    True,
    False,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Assign,
    Star,
    Plus,
    Minus,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Implies,
    Nondet,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Int(n) => return write!(f, "integer `{n}`"),
            Tok::Let => "`let`",
            Tok::In => "`in`",
            Tok::Mkref => "`mkref`",
            Tok::Ifz => "`ifz`",
            Tok::Then => "`then`",
            Tok::Else => "`else`",
            Tok::Alias => "`alias`",
            Tok::Assert => "`assert`",
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Assign => "`:=`",
            Tok::Star => "`*`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Eq => "`=`",
            Tok::Ne => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Bang => "`!`",
            Tok::Implies => "`=>`",
            Tok::Nondet => "`_`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! advance {
        ($n:expr) => {{
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance!(1);
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance!(1);
            }
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse::<i64>()
                .map_err(|_| ParseError::new(pos, format!("integer literal `{text}` out of range")))?;
            out.push(Token { tok: Tok::Int(n), pos });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance!(1);
            }
            // generated names carry a `$<digits>` suffix
            if i < chars.len() && chars[i] == '$' {
                let dollar = i;
                advance!(1);
                let digits_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance!(1);
                }
                if i == digits_start {
                    return Err(ParseError::new(
                        Pos { line, col },
                        "expected digits after `$` in identifier".to_string(),
                    ));
                }
                debug_assert!(dollar > start);
            }
            let text: String = chars[start..i].iter().collect();
            let tok = match text.as_str() {
                "let" => Tok::Let,
                "in" => Tok::In,
                "mkref" => Tok::Mkref,
                "ifz" => Tok::Ifz,
                "then" => Tok::Then,
                "else" => Tok::Else,
                "alias" => Tok::Alias,
                "assert" => Tok::Assert,
                "true" => Tok::True,
                "false" => Tok::False,
                "_" => Tok::Nondet,
                _ => Tok::Ident(text),
            };
            out.push(Token { tok, pos });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            (':', Some('=')) => (Tok::Assign, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('=', Some('>')) => (Tok::Implies, 2),
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            ('*', _) => (Tok::Star, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('=', _) => (Tok::Eq, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('!', _) => (Tok::Bang, 1),
            ('⋆', _) | ('★', _) => (Tok::Nondet, 1),
            _ => return Err(ParseError::new(pos, format!("unexpected character `{c}`"))),
        };
        advance!(len);
        out.push(Token { tok, pos });
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn keywords_and_operators() {
        assert_eq!(
            toks("let x = mkref _ in x := *x + 1"),
            vec![
                Tok::Let,
                Tok::Ident("x".into()),
                Tok::Eq,
                Tok::Mkref,
                Tok::Nondet,
                Tok::In,
                Tok::Ident("x".into()),
                Tok::Assign,
                Tok::Star,
                Tok::Ident("x".into()),
                Tok::Plus,
                Tok::Int(1),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn star_alias_and_generated_names() {
        assert_eq!(toks("⋆ t$12"), vec![Tok::Nondet, Tok::Ident("t$12".into()), Tok::Eof]);
        assert!(tokenize("x$").is_err());
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("// header\n  foo").unwrap();
        assert_eq!(t[0].pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("let x = #").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 9 });
    }
}
