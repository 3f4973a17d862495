//! Instruction set and code images for the abstract machine.

use crate::interval::Interval;

/// A machine register. `A` registers carry call arguments, `X` registers
/// are clause-local temporaries, `Y` registers live in environment frames,
/// and `Q` registers hold the query's variables for answer extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reg {
    A(usize),
    X(usize),
    Y(usize),
    Q(usize),
}

/// One abstract-machine instruction.
///
/// The clause-chaining instructions (`TryMeElse`/`RetryMeElse`/`TrustMe`)
/// carry the clause's annotation and meet it into the degree register on
/// entry. `GuardEnter`/`GuardExit` bracket a guarded body call: enter opens
/// a fresh degree accumulator, exit checks it against the guard.
#[derive(Debug, Clone, PartialEq)]
pub enum Instr {
    /// First clause of a multi-clause predicate: push a choice point whose
    /// next alternative is `alt`, then apply the clause annotation.
    TryMeElse {
        alt: usize,
        degree: Interval,
    },
    /// Middle clause: retarget the current choice point at `alt`, then
    /// apply the clause annotation.
    RetryMeElse {
        alt: usize,
        degree: Interval,
    },
    /// Only or last clause: discard the exhausted choice point if this is
    /// its final alternative, then apply the clause annotation.
    TrustMe {
        degree: Interval,
    },
    Allocate,
    Deallocate,
    GetVariable {
        reg: Reg,
        arg: Reg,
    },
    GetValue {
        reg: Reg,
        arg: Reg,
    },
    GetConstant {
        name: String,
        arg: Reg,
    },
    GetStructure {
        functor: String,
        arity: usize,
        arg: Reg,
    },
    UnifyVariable {
        reg: Reg,
    },
    UnifyValue {
        reg: Reg,
    },
    PutVariable {
        reg: Reg,
        arg: Reg,
    },
    PutValue {
        reg: Reg,
        arg: Reg,
    },
    PutConstant {
        name: String,
        arg: Reg,
    },
    PutStructure {
        functor: String,
        arity: usize,
        arg: Reg,
    },
    /// Create an unbound query variable named `name` in query register
    /// `reg`; its final binding is reported in answers.
    CreateVariable {
        reg: Reg,
        name: String,
    },
    Call {
        predicate: String,
        arity: usize,
    },
    /// Open a degree accumulator for a guarded body call.
    GuardEnter {
        guard: Interval,
    },
    /// Close the innermost accumulator and fail unless it reached the
    /// guard recorded by the matching `GuardEnter`.
    GuardExit,
    Proceed,
    Halt,
}

/// Compiled code: a flat instruction sequence, one labelled block per
/// predicate (in first-occurrence order), and the entry point of the most
/// recently compiled query.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CodeImage {
    pub code: Vec<Instr>,
    /// `(predicate, arity)` → block start address, in emission order.
    pub blocks: Vec<((String, usize), usize)>,
    /// Start of the query block, once a query has been compiled in.
    pub query_entry: Option<usize>,
}

impl CodeImage {
    /// Address of the code block for `predicate/arity`, if one exists.
    pub fn block_address(&self, predicate: &str, arity: usize) -> Option<usize> {
        self.blocks
            .iter()
            .find(|((name, n), _)| name == predicate && *n == arity)
            .map(|(_, addr)| *addr)
    }

    /// The label owning this address, if the address starts a block.
    pub fn label_at(&self, addr: usize) -> Option<&str> {
        self.blocks
            .iter()
            .find(|(_, start)| *start == addr)
            .map(|((name, _), _)| name.as_str())
    }
}
