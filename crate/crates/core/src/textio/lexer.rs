use super::{ParseError, ParseErrorKind, Pos};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Numeric literal kept as written; converted exactly by the parser.
    Number(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Underscore,
    Comma,
    Semi,
    Equals,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::Underscore => "_",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Equals => "=",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            _ => "",
        }
    }
}

/// Splits source text into tokens with 1-based positions. `#` starts a
/// comment running to the end of the line.
pub(crate) fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let pos = Pos { line, col };
        let start = k;
        let tok = match c {
            '\n' => {
                k += 1;
                line += 1;
                col = 1;
                out.push((Tok::Newline, pos));
                continue;
            }
            c if c.is_whitespace() => {
                k += 1;
                col += 1;
                continue;
            }
            '#' => {
                while k < chars.len() && chars[k] != '\n' {
                    k += 1;
                }
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while k < chars.len() && chars[k].is_ascii_alphanumeric() {
                    k += 1;
                }
                Tok::Ident(chars[start..k].iter().collect())
            }
            c if c.is_ascii_digit()
                || (c == '.' && chars.get(k + 1).is_some_and(char::is_ascii_digit)) =>
            {
                k = scan_number(&chars, k);
                Tok::Number(chars[start..k].iter().collect())
            }
            _ => {
                k += 1;
                match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '_' => Tok::Underscore,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '=' => Tok::Equals,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    other => return Err(ParseError::new(pos, ParseErrorKind::Lexical(other))),
                }
            }
        };
        col += k - start;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

fn scan_number(chars: &[char], mut k: usize) -> usize {
    let digits = |k: &mut usize| {
        while *k < chars.len() && chars[*k].is_ascii_digit() {
            *k += 1;
        }
    };
    digits(&mut k);
    if k < chars.len() && chars[k] == '.' {
        k += 1;
        digits(&mut k);
    }
    // An exponent needs at least one digit, so `2e` stays a number followed
    // by an identifier.
    if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
        let mut j = k + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            k = j;
            digits(&mut k);
        }
    }
    k
}
