//! Tokenizer for `.fj` sources. Tracks line and column (both 1-based) for
//! every token; `//` starts a comment running to end of line.

use std::fmt;

use super::Diagnostic;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Tok {
    Ident(String),
    KwClass,
    KwExtends,
    KwLet,
    KwIn,
    KwIf,
    KwElse,
    KwNull,
    KwNew,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    /// `=`
    Eq,
    /// `==`
    EqEq,
    /// `:=`
    Assign,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::KwClass => write!(f, "`class`"),
            Tok::KwExtends => write!(f, "`extends`"),
            Tok::KwLet => write!(f, "`let`"),
            Tok::KwIn => write!(f, "`in`"),
            Tok::KwIf => write!(f, "`if`"),
            Tok::KwElse => write!(f, "`else`"),
            Tok::KwNull => write!(f, "`null`"),
            Tok::KwNew => write!(f, "`new`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::EqEq => write!(f, "`==`"),
            Tok::Assign => write!(f, "`:=`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

/// Tokenizes `source`, ending the stream with an `Eof` token. Stops at the
/// first lexical error.
pub fn lex(source: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut tokens = Vec::new();
    let mut chars = source.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    loop {
        let Some(&c) = chars.peek() else { break };
        let (tok_line, tok_col) = (line, col);
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' {
            bump!();
            if chars.peek() == Some(&'/') {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
                continue;
            }
            return Err(Diagnostic::new(tok_line, tok_col, "unexpected character `/`"));
        }
        if is_ident_start(c) {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if is_ident_continue(c) {
                    word.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            let tok = match word.as_str() {
                "class" => Tok::KwClass,
                "extends" => Tok::KwExtends,
                "let" => Tok::KwLet,
                "in" => Tok::KwIn,
                "if" => Tok::KwIf,
                "else" => Tok::KwElse,
                "null" => Tok::KwNull,
                "new" => Tok::KwNew,
                _ => Tok::Ident(word),
            };
            tokens.push(Token { tok, line: tok_line, col: tok_col });
            continue;
        }
        bump!();
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '=' => {
                if chars.peek() == Some(&'=') {
                    bump!();
                    Tok::EqEq
                } else {
                    Tok::Eq
                }
            }
            ':' => {
                if chars.peek() == Some(&'=') {
                    bump!();
                    Tok::Assign
                } else {
                    return Err(Diagnostic::new(
                        tok_line,
                        tok_col,
                        "unexpected character `:` (did you mean `:=`?)",
                    ));
                }
            }
            other => {
                return Err(Diagnostic::new(
                    tok_line,
                    tok_col,
                    format!("unexpected character `{other}`"),
                ));
            }
        };
        tokens.push(Token { tok, line: tok_line, col: tok_col });
    }
    tokens.push(Token { tok: Tok::Eof, line, col });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(source: &str) -> Vec<Tok> {
        lex(source).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn keywords_punctuation_and_identifiers() {
        assert_eq!(
            kinds("let x = y.f := z in x"),
            vec![
                Tok::KwLet,
                Tok::Ident("x".into()),
                Tok::Eq,
                Tok::Ident("y".into()),
                Tok::Dot,
                Tok::Ident("f".into()),
                Tok::Assign,
                Tok::Ident("z".into()),
                Tok::KwIn,
                Tok::Ident("x".into()),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn double_equals_is_one_token() {
        assert_eq!(
            kinds("x == y"),
            vec![Tok::Ident("x".into()), Tok::EqEq, Tok::Ident("y".into()), Tok::Eof]
        );
    }

    #[test]
    fn comments_run_to_end_of_line() {
        assert_eq!(
            kinds("x // the rest vanishes := ;\ny"),
            vec![Tok::Ident("x".into()), Tok::Ident("y".into()), Tok::Eof]
        );
    }

    #[test]
    fn positions_are_one_based_lines_and_columns() {
        let tokens = lex("class A\n  extends B").unwrap();
        assert_eq!((tokens[0].line, tokens[0].col), (1, 1));
        assert_eq!((tokens[1].line, tokens[1].col), (1, 7));
        assert_eq!((tokens[2].line, tokens[2].col), (2, 3));
    }

    #[test]
    fn stray_characters_are_reported_with_position() {
        let err = lex("x\n  ? y").unwrap_err();
        assert_eq!((err.line, err.col), (2, 3));
        assert!(err.message.contains("unexpected character"));
    }

    #[test]
    fn lone_colon_is_rejected_with_a_hint() {
        let err = lex("x.f : y").unwrap_err();
        assert!(err.message.contains(":="));
    }
}
