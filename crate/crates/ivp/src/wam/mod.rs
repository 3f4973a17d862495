//! A WAM-style compiled engine for annotated programs.
//!
//! Programs are translated to a flat instruction image ([`compile`]) in which
//! every clause entry point carries the clause's annotation as an interval
//! operand on its chain instruction (`try_me_else` / `retry_me_else` /
//! `trust_me`). The [`Machine`] executes an image while maintaining a degree
//! register alongside the usual heap / registers / environments / choice
//! points / trail; choice points save the degree (and the guard stack) so
//! backtracking restores approximation state exactly as it restores bindings.
//! A lambda-cut threshold is checked at every degree update, pruning branches
//! as soon as they become too imprecise.
//!
//! [`disassemble`] renders an image as a stable text listing and
//! [`assemble`] parses that listing back; the two are mutually inverse.

mod compile;
mod instr;
mod listing;
mod machine;

pub use compile::{compile, compile_query, compile_with, CompileError};
pub use instr::{CodeImage, Instr, Reg};
pub use listing::{assemble, disassemble, ListingError};
pub use machine::{Machine, MachineFault, MachineOptions};
