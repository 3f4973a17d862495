//! Recursive-descent parser for programs and goals.

use crate::interval::Interval;

use super::ast::{Atom, Clause, Goal, Program, ProximityEquation, Term};
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;

/// A non-fatal condition noticed while parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseWarning {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

/// A parsed program together with any warnings it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub program: Program,
    pub warnings: Vec<ParseWarning>,
}

/// Parse a whole program text.
pub fn parse_program(text: &str) -> Result<Parsed, SyntaxError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser::new(tokens);
    let mut program = Program::new();
    let mut lambda_seen = false;

    while !parser.at_end() {
        match parser.peek_tok() {
            Some(Tok::ColonDash) => {
                let (value, pos) = parser.directive()?;
                if lambda_seen {
                    parser.warnings.push(ParseWarning {
                        line: pos.0,
                        col: pos.1,
                        message: format!(
                            "lambdaCutIVFS given more than once; overwriting previous value with {value}"
                        ),
                    });
                }
                program.lambda_cut = value;
                lambda_seen = true;
            }
            Some(Tok::Ident(_)) if parser.peek_tok_at(1) == Some(&Tok::Tilde) => {
                program.proximities.push(parser.proximity()?);
            }
            _ => {
                program.clauses.push(parser.clause()?);
            }
        }
    }

    Ok(Parsed {
        program,
        warnings: parser.warnings,
    })
}

/// Parse a conjunctive goal such as `tall(X), fast(X)`. A trailing period
/// is allowed but not required.
pub fn parse_goal(text: &str) -> Result<Goal, SyntaxError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser::new(tokens);
    let mut atoms = vec![parser.atom()?];
    while parser.eat(&Tok::Comma) {
        atoms.push(parser.atom()?);
    }
    parser.eat(&Tok::Period);
    if !parser.at_end() {
        return Err(parser.unexpected("end of goal"));
    }
    Ok(Goal { atoms })
}

struct Parser {
    tokens: Vec<Token>,
    position: usize,
    anon_counter: usize,
    warnings: Vec<ParseWarning>,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Parser {
            tokens,
            position: 0,
            anon_counter: 0,
            warnings: Vec::new(),
        }
    }

    fn at_end(&self) -> bool {
        self.position >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.position)
    }

    fn peek_tok(&self) -> Option<&Tok> {
        self.peek().map(|t| &t.tok)
    }

    fn peek_tok_at(&self, offset: usize) -> Option<&Tok> {
        self.tokens.get(self.position + offset).map(|t| &t.tok)
    }

    fn advance(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.position).cloned();
        if tok.is_some() {
            self.position += 1;
        }
        tok
    }

    fn eat(&mut self, expected: &Tok) -> bool {
        if self.peek_tok() == Some(expected) {
            self.position += 1;
            true
        } else {
            false
        }
    }

    /// Last consumed position, or the current token's, for error reporting.
    fn here(&self) -> (u32, u32) {
        if let Some(t) = self.peek() {
            (t.line, t.col)
        } else if let Some(t) = self.tokens.last() {
            (t.line, t.col)
        } else {
            (1, 1)
        }
    }

    fn unexpected(&self, expected: &str) -> SyntaxError {
        let (line, col) = self.here();
        let found = match self.peek_tok() {
            Some(tok) => tok.describe(),
            None => "end of input".to_string(),
        };
        SyntaxError::Parse {
            line,
            col,
            expected: expected.to_string(),
            found,
        }
    }

    fn expect(&mut self, wanted: &Tok, expected: &str) -> Result<Token, SyntaxError> {
        if self.peek_tok() == Some(wanted) {
            Ok(self.advance().unwrap())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn directive(&mut self) -> Result<(Interval, (u32, u32)), SyntaxError> {
        let colon = self.expect(&Tok::ColonDash, "\":-\"")?;
        let pos = (colon.line, colon.col);
        match self.advance() {
            Some(Token {
                tok: Tok::Ident(name),
                line,
                col,
            }) => {
                if name != "lambdaCutIVFS" {
                    return Err(SyntaxError::Parse {
                        line,
                        col,
                        expected: "directive lambdaCutIVFS".to_string(),
                        found: format!("identifier {name:?}"),
                    });
                }
            }
            _ => {
                self.position = self.position.saturating_sub(1);
                return Err(self.unexpected("directive name"));
            }
        }
        self.expect(&Tok::LParen, "\"(\"")?;
        let value = self.interval()?;
        self.expect(&Tok::RParen, "\")\"")?;
        self.expect(&Tok::Period, "\".\"")?;
        Ok((value, pos))
    }

    fn proximity(&mut self) -> Result<ProximityEquation, SyntaxError> {
        let (left, line, col) = self.symbol()?;
        self.expect(&Tok::Tilde, "\"~\"")?;
        let (right, _, _) = self.symbol()?;
        self.expect(&Tok::Equals, "\"=\"")?;
        let degree = self.interval()?;
        self.expect(&Tok::Period, "\".\"")?;
        if left == right {
            return Err(SyntaxError::Parse {
                line,
                col,
                expected: "two distinct symbols (reflexive proximity is implicit at [1,1])"
                    .to_string(),
                found: format!("{left}~{right}"),
            });
        }
        Ok(ProximityEquation {
            left,
            right,
            degree,
        })
    }

    fn symbol(&mut self) -> Result<(String, u32, u32), SyntaxError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(name),
                line,
                col,
            }) => {
                let out = (name.clone(), *line, *col);
                self.position += 1;
                Ok(out)
            }
            _ => Err(self.unexpected("symbol")),
        }
    }

    fn clause(&mut self) -> Result<Clause, SyntaxError> {
        let head = self.atom()?;
        if self.eat(&Tok::ColonDash) {
            return self.rule_tail(head);
        }
        let annotation = if self.peek_tok() == Some(&Tok::LBracket) {
            self.interval()?
        } else {
            Interval::TOP
        };
        self.expect(&Tok::Period, "\".\" or \"[\" or \":-\"")?;
        Ok(Clause::fact(head, annotation))
    }

    /// Body atoms with optional guard intervals. A single interval before
    /// the final period is the clause annotation; when two appear there,
    /// the first guards the last body atom and the second annotates the
    /// clause.
    fn rule_tail(&mut self, head: Atom) -> Result<Clause, SyntaxError> {
        let mut body = Vec::new();
        let mut guards = Vec::new();
        let mut annotation = Interval::TOP;
        loop {
            let atom = self.atom()?;
            let first = if self.peek_tok() == Some(&Tok::LBracket) {
                Some(self.interval()?)
            } else {
                None
            };
            if self.eat(&Tok::Comma) {
                body.push(atom);
                guards.push(first);
                continue;
            }
            if self.peek_tok() == Some(&Tok::LBracket) {
                // Two trailing intervals: guard, then clause annotation.
                annotation = self.interval()?;
                body.push(atom);
                guards.push(first);
            } else {
                body.push(atom);
                match first {
                    Some(value) => {
                        annotation = value;
                        guards.push(None);
                    }
                    None => guards.push(None),
                }
            }
            self.expect(&Tok::Period, "\".\" or \",\"")?;
            break;
        }
        Ok(Clause {
            head,
            body,
            annotation,
            body_guards: guards,
        })
    }

    fn atom(&mut self) -> Result<Atom, SyntaxError> {
        match self.peek_tok().cloned() {
            Some(Tok::Ident(_)) => {}
            Some(Tok::Var(_)) => {
                return Err(self.unexpected("predicate symbol (predicates cannot be variables)"))
            }
            _ => return Err(self.unexpected("predicate symbol")),
        }
        let (predicate, _, _) = self.symbol()?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            args.push(self.term()?);
            while self.eat(&Tok::Comma) {
                args.push(self.term()?);
            }
            self.expect(&Tok::RParen, "\")\" or \",\"")?;
        }
        Ok(Atom { predicate, args })
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek_tok().cloned() {
            Some(Tok::Var(name)) => {
                self.position += 1;
                if name == "_" {
                    let fresh = format!("_#{}", self.anon_counter);
                    self.anon_counter += 1;
                    Ok(Term::Var(fresh))
                } else {
                    Ok(Term::Var(name))
                }
            }
            Some(Tok::Num(text)) => {
                self.position += 1;
                Ok(Term::Const(text))
            }
            Some(Tok::Ident(name)) => {
                self.position += 1;
                if self.eat(&Tok::LParen) {
                    let mut args = vec![self.term()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.term()?);
                    }
                    self.expect(&Tok::RParen, "\")\" or \",\"")?;
                    Ok(Term::Compound(name, args))
                } else {
                    Ok(Term::Const(name))
                }
            }
            _ => Err(self.unexpected("term")),
        }
    }

    fn interval(&mut self) -> Result<Interval, SyntaxError> {
        let open = self.expect(&Tok::LBracket, "\"[\"")?;
        let lo = self.number()?;
        self.expect(&Tok::Comma, "\",\"")?;
        let hi = self.number()?;
        self.expect(&Tok::RBracket, "\"]\"")?;
        Interval::new(lo, hi).map_err(|source| SyntaxError::InvalidInterval {
            line: open.line,
            col: open.col,
            source,
        })
    }

    fn number(&mut self) -> Result<f64, SyntaxError> {
        match self.peek_tok().cloned() {
            Some(Tok::Num(text)) => {
                self.position += 1;
                text.parse().map_err(|_| self.unexpected("numeric literal"))
            }
            _ => Err(self.unexpected("numeric literal")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn parse(text: &str) -> Program {
        parse_program(text).unwrap().program
    }

    #[test]
    fn parses_facts_rules_and_default_annotations() {
        let program = parse("q(a)[0.8,0.9]. q(b)[0.7,0.8]. p(X):-q(X).");
        assert_eq!(program.clauses.len(), 3);
        assert_eq!(program.clauses[0].annotation, iv(0.8, 0.9));
        assert_eq!(program.clauses[1].annotation, iv(0.7, 0.8));
        let rule = &program.clauses[2];
        assert_eq!(rule.annotation, Interval::TOP);
        assert_eq!(rule.head, Atom::new("p", vec![Term::Var("X".into())]));
        assert_eq!(rule.body, vec![Atom::new("q", vec![Term::Var("X".into())])]);
        assert_eq!(rule.body_guards, vec![None]);
    }

    #[test]
    fn trailing_interval_after_last_body_atom_is_the_clause_annotation() {
        let program = parse("h(X):-b(X) [0.7,0.9].");
        let rule = &program.clauses[0];
        assert_eq!(rule.annotation, iv(0.7, 0.9));
        assert_eq!(rule.body_guards, vec![None]);
    }

    #[test]
    fn two_trailing_intervals_are_guard_then_annotation() {
        let program = parse("h(X):-b(X)[0.5,0.6][0.7,0.9].");
        let rule = &program.clauses[0];
        assert_eq!(rule.annotation, iv(0.7, 0.9));
        assert_eq!(rule.body_guards, vec![Some(iv(0.5, 0.6))]);
    }

    #[test]
    fn guards_attach_to_non_final_body_atoms() {
        let program = parse("h(X):-a(X)[0.8,0.9], b(X)[0.4,0.6], c(X).");
        let rule = &program.clauses[0];
        assert_eq!(
            rule.body_guards,
            vec![Some(iv(0.8, 0.9)), Some(iv(0.4, 0.6)), None]
        );
        assert_eq!(rule.annotation, Interval::TOP);
    }

    #[test]
    fn parses_lambda_cut_directive() {
        let program = parse(":-lambdaCutIVFS([0.5,0.5]). p(a).");
        assert_eq!(program.lambda_cut, iv(0.5, 0.5));
    }

    #[test]
    fn duplicate_lambda_directive_overwrites_with_warning() {
        let parsed =
            parse_program(":-lambdaCutIVFS([0.5,0.5]). :-lambdaCutIVFS([0.2,0.4]). p(a).").unwrap();
        assert_eq!(parsed.program.lambda_cut, iv(0.2, 0.4));
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].message.contains("more than once"));
    }

    #[test]
    fn unknown_directives_are_rejected() {
        assert!(matches!(
            parse_program(":-dynamic(p)."),
            Err(SyntaxError::Parse { .. })
        ));
    }

    #[test]
    fn parses_proximity_equations() {
        let program = parse("loves~passion=[0.25,0.8]. loves(mary,mountaineering).");
        assert_eq!(
            program.proximities,
            vec![ProximityEquation {
                left: "loves".into(),
                right: "passion".into(),
                degree: iv(0.25, 0.8),
            }]
        );
        assert_eq!(program.clauses.len(), 1);
    }

    #[test]
    fn reflexive_proximity_is_an_error() {
        assert!(matches!(
            parse_program("p~p=[0.5,0.5]."),
            Err(SyntaxError::Parse { .. })
        ));
    }

    #[test]
    fn inverted_annotation_bounds_are_invalid_intervals() {
        assert!(matches!(
            parse_program("p(a)[0.9,0.2]."),
            Err(SyntaxError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn numbers_are_constants_in_term_position() {
        let program = parse("age(peter, 31).");
        assert_eq!(
            program.clauses[0].head.args,
            vec![Term::Const("peter".into()), Term::Const("31".into())]
        );
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let program = parse("p(_, _).");
        let args = &program.clauses[0].head.args;
        assert_ne!(args[0], args[1]);
        assert!(matches!(&args[0], Term::Var(v) if v.starts_with("_#")));
    }

    #[test]
    fn missing_period_is_a_parse_error() {
        let err = parse_program("p(a)").unwrap_err();
        assert!(matches!(err, SyntaxError::Parse { .. }));
    }

    #[test]
    fn goal_parsing_accepts_conjunctions() {
        let goal = parse_goal("tall(X), fast(X)").unwrap();
        assert_eq!(goal.atoms.len(), 2);
        assert_eq!(goal.variables(), vec!["X"]);
    }

    #[test]
    fn goal_allows_optional_trailing_period() {
        assert_eq!(parse_goal("good_player(X)."), parse_goal("good_player(X)"));
    }

    #[test]
    fn variable_predicates_are_rejected_in_goals() {
        assert!(matches!(parse_goal("X(a)"), Err(SyntaxError::Parse { .. })));
    }

    #[test]
    fn compound_terms_nest() {
        let program = parse("t(f(g(b), X)).");
        assert_eq!(
            program.clauses[0].head.args[0],
            Term::Compound(
                "f".into(),
                vec![
                    Term::Compound("g".into(), vec![Term::Const("b".into())]),
                    Term::Var("X".into()),
                ]
            )
        );
    }
}
