//! An interval-valued fuzzy logic programming language.
//!
//! Truth degrees are closed subintervals of the unit interval rather than
//! single numbers, so a program can state how imprecise its own confidence
//! is. The crate provides:
//!
//! * [`interval`] -- the degree lattice and its arithmetic,
//! * [`syntax`] -- lexer, parser and pretty-printer for annotated programs,
//! * [`semantics`] -- bottom-up declarative semantics (least models),
//! * [`resolution`] -- goal-directed resolution with proximity-based
//!   weak unification,
//! * [`wam`] -- a compiler and abstract machine executing the same
//!   operational semantics on bytecode,
//! * [`cli`] -- the `ivp` command line driver and interactive shell.

pub mod answer;
pub mod cli;
pub mod engine;
pub mod interval;
pub mod repl;
pub mod resolution;
pub mod semantics;
pub mod syntax;
pub mod wam;

pub use answer::Answer;
pub use interval::{Bounds, Interval, IntervalError, TNormKind};
pub use syntax::{Atom, Clause, Goal, Program, ProximityEquation, Term};
