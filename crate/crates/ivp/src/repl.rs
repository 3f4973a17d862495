//! Interactive shell: load programs, pose goals, enumerate answers.
//!
//! A bare input line is a goal; after each printed answer a line holding
//! `;` requests the next one (anything else returns to the prompt), and an
//! exhausted search prints `no`. Session state is adjusted with commands:
//!
//! ```text
//! :load <file>        load a program (replacing the current one)
//! :lambda [l,u]       set the session lambda-cut (overrides the file's)
//! :lambda default     drop the override, back to the file's directive
//! :engine <name>      wam | sld | fixpoint
//! :model              print the least declarative model
//! :code <pred>/<n>    disassemble one predicate's compiled block
//! :quit               leave
//! ```
//!
//! The loop reads any `BufRead` and writes any `Write`, so sessions can be
//! scripted and tested end to end.

use crate::engine::{run_query, EngineKind, QueryOptions};
use crate::interval::Interval;
use crate::semantics::{herbrand, least_model, render_model};
use crate::syntax::{parse_goal, parse_program, Program};
use crate::wam::{compile, disassemble};
use std::io::{self, BufRead, Write};

/// Shell state across input lines.
pub struct Repl {
    program: Option<Program>,
    program_name: String,
    engine: EngineKind,
    lambda: Option<Interval>,
    depth_bound: usize,
}

impl Repl {
    /// A fresh session with no program loaded. `depth_bound` truncates the
    /// ground universe used by `:model` and the fixpoint engine.
    pub fn new(depth_bound: usize) -> Repl {
        Repl {
            program: None,
            program_name: String::new(),
            engine: EngineKind::default(),
            lambda: None,
            depth_bound,
        }
    }

    /// Runs the shell until `:quit` or end of input.
    pub fn run<R: BufRead, W: Write>(&mut self, input: R, output: &mut W) -> io::Result<()> {
        writeln!(
            output,
            "ivp shell -- :load <file> to load a program, :quit to leave"
        )?;
        let mut lines = input.lines();
        loop {
            write!(output, "?- ")?;
            output.flush()?;
            let Some(line) = lines.next() else { break };
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            if let Some(rest) = text.strip_prefix(':') {
                if !self.command(rest, output)? {
                    break;
                }
            } else {
                self.goal(text, &mut lines, output)?;
            }
        }
        Ok(())
    }

    /// Handles one `:command` line; returns `false` to leave the shell.
    fn command<W: Write>(&mut self, text: &str, output: &mut W) -> io::Result<bool> {
        let mut words = text.split_whitespace();
        let name = words.next().unwrap_or("");
        let rest = words.collect::<Vec<_>>().join(" ");
        match name {
            "quit" | "q" => return Ok(false),
            "load" => {
                if rest.is_empty() {
                    writeln!(output, "usage: :load <file>")?;
                    return Ok(true);
                }
                match std::fs::read_to_string(&rest) {
                    Err(e) => writeln!(output, "error: {rest}: {e}")?,
                    Ok(source) => match parse_program(&source) {
                        Err(e) => writeln!(output, "{rest}:{e}")?,
                        Ok(parsed) => {
                            for w in &parsed.warnings {
                                writeln!(
                                    output,
                                    "{rest}:{}:{}: warning: {}",
                                    w.line, w.col, w.message
                                )?;
                            }
                            let clauses = parsed.program.clauses.len();
                            self.program = Some(parsed.program);
                            self.program_name = rest.clone();
                            writeln!(output, "loaded {rest} ({clauses} clauses)")?;
                        }
                    },
                }
            }
            "lambda" => {
                if rest == "default" {
                    self.lambda = None;
                    writeln!(output, "lambda-cut reset to the program's directive")?;
                } else {
                    match rest.parse::<Interval>() {
                        Ok(iv) => {
                            self.lambda = Some(iv);
                            writeln!(output, "lambda-cut set to {iv}")?;
                        }
                        Err(e) => writeln!(output, "error: {e}")?,
                    }
                }
            }
            "engine" => match rest.parse::<EngineKind>() {
                Ok(kind) => {
                    self.engine = kind;
                    writeln!(output, "engine set to {kind}")?;
                }
                Err(e) => writeln!(output, "error: {e}")?,
            },
            "model" => match &self.program {
                None => writeln!(output, "no program loaded (use :load <file>)")?,
                Some(program) => match herbrand(program, self.depth_bound)
                    .and_then(|space| least_model(program, &space).map(|m| (space, m)))
                {
                    Err(e) => writeln!(output, "error: {e}")?,
                    Ok((space, (model, iterations))) => {
                        if space.truncated {
                            writeln!(
                                output,
                                "note: universe truncated at depth {}; model is partial",
                                self.depth_bound
                            )?;
                        }
                        writeln!(output, "fixpoint reached at iteration {iterations}")?;
                        let rendered = render_model(&model, &space);
                        if !rendered.is_empty() {
                            writeln!(output, "{rendered}")?;
                        }
                    }
                },
            },
            "code" => match &self.program {
                None => writeln!(output, "no program loaded (use :load <file>)")?,
                Some(program) => match rest.rsplit_once('/') {
                    None => writeln!(output, "usage: :code <predicate>/<arity>")?,
                    Some((pred, arity_text)) => match arity_text.parse::<usize>() {
                        Err(_) => writeln!(output, "error: bad arity {arity_text:?}")?,
                        Ok(arity) => {
                            let image = compile(program);
                            match image.block_address(pred, arity) {
                                None => writeln!(output, "no code block for {pred}/{arity}")?,
                                Some(start) => {
                                    let end = image
                                        .blocks
                                        .iter()
                                        .map(|(_, addr)| *addr)
                                        .filter(|addr| *addr > start)
                                        .min()
                                        .unwrap_or(image.code.len());
                                    for line in
                                        disassemble(&image).lines().skip(start).take(end - start)
                                    {
                                        writeln!(output, "{line}")?;
                                    }
                                }
                            }
                        }
                    },
                },
            },
            other => writeln!(
                output,
                "unknown command :{other} (try :load :lambda :engine :model :code :quit)"
            )?,
        }
        Ok(true)
    }

    /// Proves one goal, enumerating further answers while the user keeps
    /// typing `;`.
    fn goal<W: Write, L: Iterator<Item = io::Result<String>>>(
        &mut self,
        text: &str,
        lines: &mut L,
        output: &mut W,
    ) -> io::Result<()> {
        let Some(program) = &self.program else {
            writeln!(output, "no program loaded (use :load <file>)")?;
            return Ok(());
        };
        let goal = match parse_goal(text) {
            Ok(goal) => goal,
            Err(e) => {
                writeln!(output, "error: {e}")?;
                return Ok(());
            }
        };
        let options = QueryOptions {
            lambda: self.lambda,
            depth_bound: self.depth_bound,
            ..QueryOptions::default()
        };
        let mut answers = match run_query(program, &goal, self.engine, &options) {
            Ok(answers) => answers,
            Err(e) => {
                writeln!(output, "error: {e}")?;
                return Ok(());
            }
        };
        loop {
            match answers.next() {
                None => {
                    if let Some(fault) = answers.failure() {
                        writeln!(output, "error: {fault}")?;
                    } else {
                        writeln!(output, "no")?;
                    }
                    return Ok(());
                }
                Some(answer) => {
                    writeln!(output, "{answer}")?;
                    output.flush()?;
                    match lines.next() {
                        Some(line) => {
                            if line?.trim() != ";" {
                                return Ok(());
                            }
                        }
                        None => return Ok(()),
                    }
                }
            }
        }
    }
}
