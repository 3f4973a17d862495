//! Tokenizer for program and goal text.

use super::SyntaxError;

/// Token kinds. Identifiers start lowercase, variables start with an
/// uppercase letter or underscore, and `%` begins a comment running to the
/// end of the line.
#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Var(String),
    Num(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Period,
    ColonDash,
    Tilde,
    Equals,
}

impl Tok {
    /// Short description used in parse error messages.
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Var(s) => format!("variable {s:?}"),
            Tok::Num(s) => format!("number {s:?}"),
            Tok::LParen => "\"(\"".into(),
            Tok::RParen => "\")\"".into(),
            Tok::LBracket => "\"[\"".into(),
            Tok::RBracket => "\"]\"".into(),
            Tok::Comma => "\",\"".into(),
            Tok::Period => "\".\"".into(),
            Tok::ColonDash => "\":-\"".into(),
            Tok::Tilde => "\"~\"".into(),
            Tok::Equals => "\"=\"".into(),
        }
    }
}

/// A token with its 1-based source position.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

/// Split source text into tokens, rejecting characters outside the
/// language with a positioned error.
pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! push {
        ($tok:expr, $start_col:expr) => {
            tokens.push(Token {
                tok: $tok,
                line,
                col: $start_col,
            })
        };
    }

    while let Some(&ch) = chars.peek() {
        let start_col = col;
        match ch {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '%' => {
                // Comment: skip to end of line (the newline itself is
                // handled on the next loop turn).
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                chars.next();
                col += 1;
                push!(Tok::LParen, start_col);
            }
            ')' => {
                chars.next();
                col += 1;
                push!(Tok::RParen, start_col);
            }
            '[' => {
                chars.next();
                col += 1;
                push!(Tok::LBracket, start_col);
            }
            ']' => {
                chars.next();
                col += 1;
                push!(Tok::RBracket, start_col);
            }
            ',' => {
                chars.next();
                col += 1;
                push!(Tok::Comma, start_col);
            }
            '~' => {
                chars.next();
                col += 1;
                push!(Tok::Tilde, start_col);
            }
            '=' => {
                chars.next();
                col += 1;
                push!(Tok::Equals, start_col);
            }
            ':' => {
                chars.next();
                col += 1;
                match chars.peek() {
                    Some('-') => {
                        chars.next();
                        col += 1;
                        push!(Tok::ColonDash, start_col);
                    }
                    _ => {
                        return Err(SyntaxError::Lex {
                            line,
                            col: start_col,
                            ch: ':',
                        })
                    }
                }
            }
            '.' => {
                chars.next();
                col += 1;
                push!(Tok::Period, start_col);
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        text.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                // A dot is part of the number only when a digit follows;
                // otherwise it is the clause terminator.
                let mut lookahead = chars.clone();
                if lookahead.next() == Some('.') {
                    if let Some(d) = lookahead.next() {
                        if d.is_ascii_digit() {
                            text.push('.');
                            chars.next();
                            col += 1;
                            while let Some(&f) = chars.peek() {
                                if f.is_ascii_digit() {
                                    text.push(f);
                                    chars.next();
                                    col += 1;
                                } else {
                                    break;
                                }
                            }
                        }
                    }
                }
                push!(Tok::Num(text), start_col);
            }
            c if c.is_ascii_lowercase() => {
                let word = take_word(&mut chars, &mut col);
                push!(Tok::Ident(word), start_col);
            }
            c if c.is_ascii_uppercase() || c == '_' => {
                let word = take_word(&mut chars, &mut col);
                push!(Tok::Var(word), start_col);
            }
            other => {
                return Err(SyntaxError::Lex {
                    line,
                    col: start_col,
                    ch: other,
                })
            }
        }
    }
    Ok(tokens)
}

fn take_word(chars: &mut std::iter::Peekable<std::str::Chars>, col: &mut u32) -> String {
    let mut word = String::new();
    while let Some(&c) = chars.peek() {
        if c.is_ascii_alphanumeric() || c == '_' {
            word.push(c);
            chars.next();
            *col += 1;
        } else {
            break;
        }
    }
    word
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<Tok> {
        tokenize(text).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn tokenizes_an_annotated_fact() {
        assert_eq!(
            kinds("q(a)[0.8,0.9]."),
            vec![
                Tok::Ident("q".into()),
                Tok::LParen,
                Tok::Ident("a".into()),
                Tok::RParen,
                Tok::LBracket,
                Tok::Num("0.8".into()),
                Tok::Comma,
                Tok::Num("0.9".into()),
                Tok::RBracket,
                Tok::Period,
            ]
        );
    }

    #[test]
    fn tokenizes_a_rule_with_variables() {
        assert_eq!(
            kinds("p(X) :- q(X)."),
            vec![
                Tok::Ident("p".into()),
                Tok::LParen,
                Tok::Var("X".into()),
                Tok::RParen,
                Tok::ColonDash,
                Tok::Ident("q".into()),
                Tok::LParen,
                Tok::Var("X".into()),
                Tok::RParen,
                Tok::Period,
            ]
        );
    }

    #[test]
    fn tokenizes_proximity_equations() {
        assert_eq!(
            kinds("love~passion=[0.25,0.8]."),
            vec![
                Tok::Ident("love".into()),
                Tok::Tilde,
                Tok::Ident("passion".into()),
                Tok::Equals,
                Tok::LBracket,
                Tok::Num("0.25".into()),
                Tok::Comma,
                Tok::Num("0.8".into()),
                Tok::RBracket,
                Tok::Period,
            ]
        );
    }

    #[test]
    fn distinguishes_terminator_dot_from_decimal_point() {
        assert_eq!(
            kinds("p(3). q(1.5)."),
            vec![
                Tok::Ident("p".into()),
                Tok::LParen,
                Tok::Num("3".into()),
                Tok::RParen,
                Tok::Period,
                Tok::Ident("q".into()),
                Tok::LParen,
                Tok::Num("1.5".into()),
                Tok::RParen,
                Tok::Period,
            ]
        );
    }

    #[test]
    fn skips_comments_and_whitespace() {
        assert_eq!(
            kinds("% a comment\n  p. % trailing\nq."),
            vec![
                Tok::Ident("p".into()),
                Tok::Period,
                Tok::Ident("q".into()),
                Tok::Period,
            ]
        );
    }

    #[test]
    fn reports_position_of_illegal_characters() {
        let err = tokenize("p(a).\nq(?).").unwrap_err();
        assert_eq!(
            err,
            SyntaxError::Lex {
                line: 2,
                col: 3,
                ch: '?'
            }
        );
    }

    #[test]
    fn bare_colon_is_rejected() {
        assert!(matches!(
            tokenize("p :"),
            Err(SyntaxError::Lex { ch: ':', .. })
        ));
    }
}
