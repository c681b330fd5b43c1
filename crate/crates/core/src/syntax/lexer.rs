use super::error::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Unsigned numeric literal as written, e.g. `3` or `0.25`.
    Number(String),
    LParen,
    RParen,
    Comma,
    Dot,
    DotDot,
    Colon,
    Slash,
    Arrow,
    Bar,
    Amp,
    Tilde,
    Bang,
    Question,
    Semi,
    Eq,
    Ne,
    Lt,
    Le,
    Plus,
    Minus,
    At,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Colon => ":",
            Tok::Slash => "/",
            Tok::Arrow => "<-",
            Tok::Bar => "|",
            Tok::Amp => "&",
            Tok::Tilde => "~",
            Tok::Bang => "!",
            Tok::Question => "?",
            Tok::Semi => ";",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::At => "@",
            Tok::Ident(_) | Tok::Number(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let peek = chars.get(i + 1).copied();
        let (tok, len) = if c.is_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            (Tok::Ident(chars[start..j].iter().collect()), j - start)
        } else if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            (Tok::Number(chars[start..j].iter().collect()), j - start)
        } else {
            match (c, peek) {
                ('<', Some('-')) => (Tok::Arrow, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('!', Some('=')) => (Tok::Ne, 2),
                ('.', Some('.')) => (Tok::DotDot, 2),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                (':', _) => (Tok::Colon, 1),
                ('/', _) => (Tok::Slash, 1),
                ('|', _) | ('∨', _) => (Tok::Bar, 1),
                ('&', _) | ('∧', _) => (Tok::Amp, 1),
                ('~', _) | ('¬', _) => (Tok::Tilde, 1),
                ('!', _) | ('∀', _) => (Tok::Bang, 1),
                ('?', _) | ('∃', _) => (Tok::Question, 1),
                (';', _) => (Tok::Semi, 1),
                ('=', _) => (Tok::Eq, 1),
                ('≠', _) => (Tok::Ne, 1),
                ('≤', _) => (Tok::Le, 1),
                ('<', _) => (Tok::Lt, 1),
                ('←', _) => (Tok::Arrow, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('@', _) => (Tok::At, 1),
                _ => {
                    return Err(SyntaxError::Lex { line, col, msg: format!("unexpected character `{c}`") });
                }
            }
        };
        out.push(Spanned { tok, pos });
        i += len;
        col += len;
    }
    out.push(Spanned { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn range_dots_are_not_decimals() {
        assert_eq!(
            toks("1..3."),
            vec![Tok::Number("1".into()), Tok::DotDot, Tok::Number("3".into()), Tok::Dot, Tok::Eof]
        );
        assert_eq!(toks("0.25)"), vec![Tok::Number("0.25".into()), Tok::RParen, Tok::Eof]);
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("% hello\n  P <- Q.").unwrap();
        assert_eq!(t[0].pos, Pos { line: 2, col: 3 });
        assert_eq!(t[1].tok, Tok::Arrow);
        assert_eq!(t[1].pos, Pos { line: 2, col: 5 });
    }

    #[test]
    fn unicode_alternates() {
        assert_eq!(toks("¬P ∧ Q ← ∃"), vec![
            Tok::Tilde,
            Tok::Ident("P".into()),
            Tok::Amp,
            Tok::Ident("Q".into()),
            Tok::Arrow,
            Tok::Question,
            Tok::Eof
        ]);
    }

    #[test]
    fn bad_character() {
        let e = tokenize("P # Q").unwrap_err();
        assert_eq!(e.position(), (1, 3));
        assert_eq!(e.code(), "lex");
    }
}
