//! Text listings of code images.
//!
//! [`disassemble`] renders an image one instruction per line as
//! `address:label:opcode operands`, the label being the predicate name at
//! block entry points (or `query` at the query block) and empty elsewhere:
//!
//! ```text
//! 00:good_player:trust_me [1,1]
//! 01::allocate
//! 02::get_variable Y0 A0
//! ...
//! ```
//!
//! [`assemble`] parses that format back into a [`CodeImage`]. The two are
//! mutually inverse: assembling a disassembly reproduces the image exactly,
//! block directory included. Block arities are reconstructed from the code
//! itself (the head-matching `get_*` instructions of a block of arity *n*
//! touch argument registers `A0` .. `A(n-1)`), so listings carry no
//! directory beyond their labels.

use crate::interval::Interval;
use thiserror::Error;

use super::instr::{CodeImage, Instr, Reg};

/// A syntax error in a listing.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("listing line {line}: {message}")]
pub struct ListingError {
    /// 1-based source line.
    pub line: usize,
    pub message: String,
}

fn reg_text(reg: Reg) -> String {
    match reg {
        Reg::A(i) => format!("A{i}"),
        Reg::X(i) => format!("X{i}"),
        Reg::Y(i) => format!("Y{i}"),
        Reg::Q(i) => format!("Q{i}"),
    }
}

fn instr_text(instr: &Instr) -> String {
    match instr {
        Instr::TryMeElse { alt, degree } => format!("try_me_else {alt} {degree}"),
        Instr::RetryMeElse { alt, degree } => format!("retry_me_else {alt} {degree}"),
        Instr::TrustMe { degree } => format!("trust_me {degree}"),
        Instr::Allocate => "allocate".into(),
        Instr::Deallocate => "deallocate".into(),
        Instr::GetVariable { reg, arg } => {
            format!("get_variable {} {}", reg_text(*reg), reg_text(*arg))
        }
        Instr::GetValue { reg, arg } => {
            format!("get_value {} {}", reg_text(*reg), reg_text(*arg))
        }
        Instr::GetConstant { name, arg } => format!("get_constant {name} {}", reg_text(*arg)),
        Instr::GetStructure {
            functor,
            arity,
            arg,
        } => format!("get_structure {functor}/{arity} {}", reg_text(*arg)),
        Instr::UnifyVariable { reg } => format!("unify_variable {}", reg_text(*reg)),
        Instr::UnifyValue { reg } => format!("unify_value {}", reg_text(*reg)),
        Instr::PutVariable { reg, arg } => {
            format!("put_variable {} {}", reg_text(*reg), reg_text(*arg))
        }
        Instr::PutValue { reg, arg } => {
            format!("put_value {} {}", reg_text(*reg), reg_text(*arg))
        }
        Instr::PutConstant { name, arg } => format!("put_constant {name} {}", reg_text(*arg)),
        Instr::PutStructure {
            functor,
            arity,
            arg,
        } => format!("put_structure {functor}/{arity} {}", reg_text(*arg)),
        Instr::CreateVariable { reg, name } => {
            format!("create_variable {} {name}", reg_text(*reg))
        }
        Instr::Call { predicate, arity } => format!("call {predicate}/{arity}"),
        Instr::GuardEnter { guard } => format!("guard_enter {guard}"),
        Instr::GuardExit => "guard_exit".into(),
        Instr::Proceed => "proceed".into(),
        Instr::Halt => "halt".into(),
    }
}

/// Renders `image` as a text listing, one instruction per line.
pub fn disassemble(image: &CodeImage) -> String {
    let width = image.code.len().saturating_sub(1).to_string().len().max(2);
    let mut out = String::new();
    for (addr, instr) in image.code.iter().enumerate() {
        let label = if image.query_entry == Some(addr) {
            "query"
        } else {
            image.label_at(addr).unwrap_or("")
        };
        out.push_str(&format!(
            "{addr:0width$}:{label}:{}\n",
            instr_text(instr),
            width = width,
        ));
    }
    out
}

struct LineParser<'a> {
    line: usize,
    fields: std::str::SplitWhitespace<'a>,
}

impl<'a> LineParser<'a> {
    fn err(&self, message: impl Into<String>) -> ListingError {
        ListingError {
            line: self.line,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str, ListingError> {
        self.fields
            .next()
            .ok_or_else(|| self.err(format!("missing {what}")))
    }

    fn finish(mut self) -> Result<(), ListingError> {
        match self.fields.next() {
            Some(extra) => Err(self.err(format!("unexpected trailing field {extra:?}"))),
            None => Ok(()),
        }
    }

    fn address(&mut self, what: &str) -> Result<usize, ListingError> {
        let text = self.next(what)?;
        text.parse()
            .map_err(|_| self.err(format!("{what} {text:?} is not an address")))
    }

    fn interval(&mut self, what: &str) -> Result<Interval, ListingError> {
        let text = self.next(what)?;
        text.parse()
            .map_err(|e| self.err(format!("bad {what}: {e}")))
    }

    fn reg(&mut self, what: &str) -> Result<Reg, ListingError> {
        let text = self.next(what)?;
        let (bank, index) = text.split_at(1);
        let index: usize = index
            .parse()
            .map_err(|_| self.err(format!("{what} {text:?} is not a register")))?;
        match bank {
            "A" => Ok(Reg::A(index)),
            "X" => Ok(Reg::X(index)),
            "Y" => Ok(Reg::Y(index)),
            "Q" => Ok(Reg::Q(index)),
            _ => Err(self.err(format!("{what} {text:?} names no register bank"))),
        }
    }

    fn name(&mut self, what: &str) -> Result<String, ListingError> {
        Ok(self.next(what)?.to_string())
    }

    fn functor(&mut self, what: &str) -> Result<(String, usize), ListingError> {
        let text = self.next(what)?;
        let (name, arity) = text
            .rsplit_once('/')
            .ok_or_else(|| self.err(format!("{what} {text:?} is not name/arity")))?;
        let arity: usize = arity
            .parse()
            .map_err(|_| self.err(format!("bad arity in {text:?}")))?;
        Ok((name.to_string(), arity))
    }
}

/// Parses a listing produced by [`disassemble`] back into a [`CodeImage`].
pub fn assemble(text: &str) -> Result<CodeImage, ListingError> {
    let mut code = Vec::new();
    let mut labels: Vec<(String, usize)> = Vec::new();
    for (line_index, raw) in text.lines().enumerate() {
        let line_no = line_index + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, ':');
        let (addr_text, label, rest) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(l), Some(r)) => (a, l, r),
            _ => {
                return Err(ListingError {
                    line: line_no,
                    message: "expected address:label:instruction".into(),
                })
            }
        };
        let addr: usize = addr_text.trim().parse().map_err(|_| ListingError {
            line: line_no,
            message: format!("bad address {addr_text:?}"),
        })?;
        if addr != code.len() {
            return Err(ListingError {
                line: line_no,
                message: format!("address {addr} out of order (expected {})", code.len()),
            });
        }
        let label = label.trim();
        if !label.is_empty() {
            labels.push((label.to_string(), addr));
        }
        let mut p = LineParser {
            line: line_no,
            fields: rest.split_whitespace(),
        };
        let opcode = p.next("opcode")?;
        let instr = match opcode {
            "try_me_else" => Instr::TryMeElse {
                alt: p.address("alternative address")?,
                degree: p.interval("clause annotation")?,
            },
            "retry_me_else" => Instr::RetryMeElse {
                alt: p.address("alternative address")?,
                degree: p.interval("clause annotation")?,
            },
            "trust_me" => Instr::TrustMe {
                degree: p.interval("clause annotation")?,
            },
            "allocate" => Instr::Allocate,
            "deallocate" => Instr::Deallocate,
            "get_variable" => Instr::GetVariable {
                reg: p.reg("register")?,
                arg: p.reg("argument register")?,
            },
            "get_value" => Instr::GetValue {
                reg: p.reg("register")?,
                arg: p.reg("argument register")?,
            },
            "get_constant" => Instr::GetConstant {
                name: p.name("constant")?,
                arg: p.reg("argument register")?,
            },
            "get_structure" => {
                let (functor, arity) = p.functor("functor")?;
                Instr::GetStructure {
                    functor,
                    arity,
                    arg: p.reg("argument register")?,
                }
            }
            "unify_variable" => Instr::UnifyVariable {
                reg: p.reg("register")?,
            },
            "unify_value" => Instr::UnifyValue {
                reg: p.reg("register")?,
            },
            "put_variable" => Instr::PutVariable {
                reg: p.reg("register")?,
                arg: p.reg("argument register")?,
            },
            "put_value" => Instr::PutValue {
                reg: p.reg("register")?,
                arg: p.reg("argument register")?,
            },
            "put_constant" => Instr::PutConstant {
                name: p.name("constant")?,
                arg: p.reg("argument register")?,
            },
            "put_structure" => {
                let (functor, arity) = p.functor("functor")?;
                Instr::PutStructure {
                    functor,
                    arity,
                    arg: p.reg("argument register")?,
                }
            }
            "create_variable" => Instr::CreateVariable {
                reg: p.reg("query register")?,
                name: p.name("variable name")?,
            },
            "call" => {
                let (predicate, arity) = p.functor("predicate")?;
                Instr::Call { predicate, arity }
            }
            "guard_enter" => Instr::GuardEnter {
                guard: p.interval("guard")?,
            },
            "guard_exit" => Instr::GuardExit,
            "proceed" => Instr::Proceed,
            "halt" => Instr::Halt,
            other => {
                return Err(ListingError {
                    line: line_no,
                    message: format!("unknown opcode {other:?}"),
                })
            }
        };
        p.finish()?;
        code.push(instr);
    }

    // Rebuild the block directory. A label opens a block that runs to the
    // next label (or the end of the code). The block labelled `query` that
    // contains `halt` is the query block; every other label is a predicate
    // block whose arity is the highest argument register its head-matching
    // instructions touch.
    let mut blocks = Vec::new();
    let mut query_entry = None;
    for (i, (label, start)) in labels.iter().enumerate() {
        let end = labels
            .get(i + 1)
            .map(|(_, next)| *next)
            .unwrap_or(code.len());
        let span = &code[*start..end];
        if label == "query" && span.contains(&Instr::Halt) {
            query_entry = Some(*start);
            continue;
        }
        let arity = span
            .iter()
            .filter_map(|instr| match instr {
                Instr::GetVariable { arg: Reg::A(i), .. }
                | Instr::GetValue { arg: Reg::A(i), .. }
                | Instr::GetConstant { arg: Reg::A(i), .. }
                | Instr::GetStructure { arg: Reg::A(i), .. } => Some(*i + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        blocks.push(((label.clone(), arity), *start));
    }

    Ok(CodeImage {
        code,
        blocks,
        query_entry,
    })
}

#[cfg(test)]
mod tests {
    use super::super::compile::{compile, compile_query};
    use super::*;
    use crate::syntax::{parse_goal, parse_program};

    fn image_for(source: &str, goal_text: &str) -> CodeImage {
        let program = parse_program(source).expect("program parses").program;
        let goal = parse_goal(goal_text).expect("goal parses");
        compile_query(&goal, &compile(&program))
    }

    #[test]
    fn listing_starts_with_labelled_entry() {
        let image = image_for(
            "good_player(X) :- tall(X), fast(X), coordinate(X).
             tall(a)[0.8,0.9]. fast(a)[0.9,1.0]. coordinate(a)[0.2,0.4].",
            "good_player(X)",
        );
        let listing = disassemble(&image);
        let first = listing.lines().next().expect("nonempty");
        assert_eq!(first, "00:good_player:trust_me [1,1]");
        assert!(listing.lines().any(|l| l.starts_with("20:query:")));
    }

    #[test]
    fn assembles_its_own_output_exactly() {
        let sources = [
            (
                "good_player(X) :- tall(X), fast(X), coordinate(X).
                 tall(a)[0.8,0.9]. fast(a)[0.9,1.0]. coordinate(a)[0.2,0.4].",
                "good_player(X)",
            ),
            ("p(X) :- q(X). q(a)[0.8,0.9]. q(b)[0.7,0.8].", "p(X)"),
            ("t(g(f(b), c)). p(X) :- t(f(X)).", "t(g(X, Y))"),
            (
                "s(X) :- q(X)[0.5,0.8][1,1]. q(a)[0.3,0.4]. q(b)[0.6,0.9].",
                "s(X)",
            ),
            ("r. s :- r.", "s"),
        ];
        for (source, goal) in sources {
            let image = image_for(source, goal);
            let listing = disassemble(&image);
            let rebuilt = assemble(&listing).expect("assembles");
            assert_eq!(rebuilt, image, "round trip failed for goal {goal}");
        }
    }

    #[test]
    fn rejects_out_of_order_addresses() {
        let err = assemble("01::halt").expect_err("bad address");
        assert_eq!(err.line, 1);
        assert!(err.message.contains("out of order"));
    }

    #[test]
    fn rejects_unknown_opcodes_with_line_numbers() {
        let err = assemble("00::trust_me [1,1]\n01::fly_me [0,1]").expect_err("bad opcode");
        assert_eq!(err.line, 2);
        assert!(err.message.contains("fly_me"));
    }

    #[test]
    fn rejects_trailing_junk() {
        let err = assemble("00::proceed now").expect_err("trailing field");
        assert!(err.message.contains("trailing"));
    }

    #[test]
    fn block_arity_is_recovered_from_head_instructions() {
        let image = image_for("pair(a, b). single(c).", "pair(X, Y)");
        let rebuilt = assemble(&disassemble(&image)).expect("assembles");
        assert_eq!(
            rebuilt.block_address("pair", 2),
            image.block_address("pair", 2)
        );
        assert_eq!(
            rebuilt.block_address("single", 1),
            image.block_address("single", 1)
        );
        assert_eq!(rebuilt.query_entry, image.query_entry);
    }

    #[test]
    fn zero_arity_blocks_round_trip() {
        let image = image_for("r. s :- r.", "s");
        let rebuilt = assemble(&disassemble(&image)).expect("assembles");
        assert_eq!(rebuilt, image);
    }
}
