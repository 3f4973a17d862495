//! The abstract machine executing compiled code images.
//!
//! Alongside the classical storage areas (heap, argument / temporary /
//! permanent registers, environment frames, choice points, trail) the
//! machine keeps a *degree register*: the interval truth degree of the
//! derivation built so far. Every clause entry meets the clause annotation
//! into the register, every proximity step (predicate dispatch, constant or
//! functor mismatch tolerated by the proximity table) meets the
//! corresponding proximity degree, and each update is immediately checked
//! against the lambda-cut threshold — a branch whose degree is not at least
//! the threshold is abandoned exactly as a unification failure would be.
//! Choice points save the degree register and the guard stack so that
//! backtracking restores them together with the bindings.
//!
//! The machine is a lazy [`Iterator`] over [`Answer`]s: each call to
//! `next` resumes execution until the next `halt` with an empty goal stack
//! (an answer) or until the search space is exhausted.

use crate::answer::{Answer, AnswerSource, Canonicalizer};
use crate::interval::{Interval, TNormKind};
use crate::resolution::ProximityTable;
use crate::syntax::{is_anonymous, Term};
use thiserror::Error;

use super::instr::{CodeImage, Instr, Reg};

/// Runtime options for a [`Machine`].
#[derive(Debug, Clone, PartialEq)]
pub struct MachineOptions {
    /// Lambda-cut threshold checked at every degree update. Branches whose
    /// degree drops below (or incomparable to) this interval are pruned.
    /// [`Interval::BOTTOM`] disables pruning.
    pub lambda: Interval,
    /// Triangular norm used to combine degrees.
    pub tnorm: TNormKind,
    /// Maximum number of clause entries on one derivation branch. `None`
    /// leaves the search unbounded.
    pub depth_limit: Option<usize>,
}

impl Default for MachineOptions {
    fn default() -> MachineOptions {
        MachineOptions {
            lambda: Interval::BOTTOM,
            tnorm: TNormKind::default(),
            depth_limit: None,
        }
    }
}

/// A runtime error: the image was malformed or referred to storage that
/// does not exist. Well-formed images produced by the compiler never fault.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("machine fault: {0}")]
pub struct MachineFault(pub String);

/// One heap cell.
#[derive(Debug, Clone, PartialEq)]
enum Cell {
    /// A reference; a cell referring to its own address is an unbound
    /// variable.
    Ref(usize),
    /// A structure: points at the functor cell of a compound term.
    Str(usize),
    /// The functor cell of a compound term; its `arity` argument cells
    /// follow contiguously.
    Functor(String, usize),
    /// A constant.
    Con(String),
}

/// Unification mode while head-matching a structure.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    /// Matching against an existing structure; `s` is the next argument
    /// cell to visit.
    Read { s: usize },
    /// Building a new structure on the heap.
    Write,
}

/// An environment frame for a rule body. Frames live in an arena rather
/// than a stack: a choice point may protect a frame that has already been
/// deallocated by the deterministic continuation, so frames are only
/// discarded when backtracking truncates the arena.
#[derive(Debug, Clone)]
struct EnvFrame {
    prev: Option<usize>,
    saved_continuation: usize,
    y: Vec<Cell>,
}

/// What a choice point still has to offer.
#[derive(Debug, Clone)]
enum Alternatives {
    /// Later clauses of the same predicate: the address of the next
    /// `retry_me_else` / `trust_me` in the chain.
    ClauseChain { next: usize },
    /// Other predicate blocks reachable through the proximity table, each
    /// paired with its proximity degree. `idx` is the next one to try.
    Blocks {
        alts: Vec<(usize, Interval)>,
        idx: usize,
    },
}

/// Saved machine state to restore on backtracking.
#[derive(Debug, Clone)]
struct ChoicePoint {
    args: Vec<Cell>,
    env: Option<usize>,
    envs_len: usize,
    continuation: usize,
    trail_mark: usize,
    heap_mark: usize,
    degree: Interval,
    guards: Vec<(Interval, Interval)>,
    depth: usize,
    alternatives: Alternatives,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    /// Not started: the next `next()` enters the query block.
    Start,
    /// An answer was produced: the next `next()` backtracks first.
    Redo,
    /// Exhausted or faulted.
    Done,
}

/// What executing one instruction asks the main loop to do.
enum Flow {
    /// Keep executing (the instruction has set `pc`).
    Continue,
    /// The current branch failed; backtrack.
    Fail,
    /// `halt` was reached: emit this answer.
    Emit(Answer),
}

/// The abstract machine. Construct with [`Machine::new`] and pull answers
/// through the [`Iterator`] implementation.
pub struct Machine {
    image: CodeImage,
    table: ProximityTable,
    lambda: Interval,
    tnorm: TNormKind,
    depth_limit: Option<usize>,

    pc: usize,
    continuation: usize,
    degree: Interval,
    mode: Option<Mode>,
    heap: Vec<Cell>,
    a: Vec<Cell>,
    x: Vec<Cell>,
    /// Query variables in creation order: surface name and heap address.
    q: Vec<(String, usize)>,
    envs: Vec<EnvFrame>,
    env: Option<usize>,
    cps: Vec<ChoicePoint>,
    trail: Vec<usize>,
    /// Active guard accumulators, innermost last: `(threshold, accumulated
    /// degree of the guarded call)`.
    guards: Vec<(Interval, Interval)>,
    depth: usize,

    phase: Phase,
    fault: Option<MachineFault>,
    incomplete: bool,
    trace: Vec<Interval>,
}

/// Poison value written into register slots created by growth; any read
/// of such a slot faults on dereference instead of silently succeeding.
const UNSET: Cell = Cell::Ref(usize::MAX);

impl Machine {
    /// Prepares a machine over `image` (which must contain a query block)
    /// with the given proximity table and options. No code runs until the
    /// first `next()`.
    pub fn new(image: CodeImage, table: ProximityTable, options: MachineOptions) -> Machine {
        Machine {
            image,
            table,
            lambda: options.lambda,
            tnorm: options.tnorm,
            depth_limit: options.depth_limit,
            pc: 0,
            continuation: usize::MAX,
            degree: Interval::TOP,
            mode: None,
            heap: Vec::new(),
            a: Vec::new(),
            x: Vec::new(),
            q: Vec::new(),
            envs: Vec::new(),
            env: None,
            cps: Vec::new(),
            trail: Vec::new(),
            guards: Vec::new(),
            depth: 0,
            phase: Phase::Start,
            fault: None,
            incomplete: false,
            trace: Vec::new(),
        }
    }

    /// The fault that stopped the machine, if any.
    pub fn fault(&self) -> Option<&MachineFault> {
        self.fault.as_ref()
    }

    /// Degree register values recorded at each clause entry, in execution
    /// order (the value *after* meeting that clause's annotation).
    pub fn degree_trace(&self) -> &[Interval] {
        &self.trace
    }

    /// Number of live heap cells (0 once the search is exhausted).
    pub fn heap_cells(&self) -> usize {
        self.heap.len()
    }

    /// Number of trail entries (0 once the search is exhausted).
    pub fn trail_entries(&self) -> usize {
        self.trail.len()
    }

    /// Number of environment frames (0 once the search is exhausted).
    pub fn environment_frames(&self) -> usize {
        self.envs.len()
    }

    /// Number of live choice points (0 once the search is exhausted).
    pub fn choice_points(&self) -> usize {
        self.cps.len()
    }

    /// Meets `contribution` into the degree register and every active
    /// guard accumulator, then checks the lambda-cut. Returns `false` when
    /// the branch must be abandoned.
    fn meet_degree(&mut self, contribution: &Interval) -> bool {
        self.degree = self.tnorm.apply(&self.degree, contribution);
        for (_, acc) in &mut self.guards {
            *acc = self.tnorm.apply(acc, contribution);
        }
        self.lambda.leq(&self.degree)
    }

    /// Clause entry bookkeeping shared by the three chain instructions:
    /// depth bound, annotation meet, trace, lambda-cut. The query block's
    /// own entry instruction neither counts against the depth bound nor
    /// appears in the trace (it is not a clause).
    fn enter_clause(&mut self, annotation: &Interval) -> Flow {
        let is_clause = Some(self.pc) != self.image.query_entry;
        if is_clause {
            if let Some(limit) = self.depth_limit {
                if self.depth >= limit {
                    self.incomplete = true;
                    return Flow::Fail;
                }
            }
            self.depth += 1;
        }
        let alive = self.meet_degree(annotation);
        if is_clause {
            self.trace.push(self.degree);
        }
        if alive {
            self.pc += 1;
            Flow::Continue
        } else {
            Flow::Fail
        }
    }

    fn push_choice_point(&mut self, alternatives: Alternatives) {
        self.cps.push(ChoicePoint {
            args: self.a.clone(),
            env: self.env,
            envs_len: self.envs.len(),
            continuation: self.continuation,
            trail_mark: self.trail.len(),
            heap_mark: self.heap.len(),
            degree: self.degree,
            guards: self.guards.clone(),
            depth: self.depth,
            alternatives,
        });
    }

    /// Backtracks to the most recent choice point with work left, restoring
    /// bindings, registers, environments, degree, guards and depth, and
    /// positions `pc` at the next alternative. Returns `false` when no
    /// choice point remains: the machine is then reset to its pristine
    /// state (empty heap / trail / environments / choice points).
    fn backtrack(&mut self) -> bool {
        loop {
            if self.cps.is_empty() {
                self.reset_storage();
                return false;
            }
            {
                let cp = self.cps.last().expect("non-empty checked above");
                let trail_mark = cp.trail_mark;
                let heap_mark = cp.heap_mark;
                let args = cp.args.clone();
                let env = cp.env;
                let envs_len = cp.envs_len;
                let continuation = cp.continuation;
                let degree = cp.degree;
                let guards = cp.guards.clone();
                let depth = cp.depth;
                for addr in self.trail.drain(trail_mark..).rev() {
                    if addr < self.heap.len() {
                        self.heap[addr] = Cell::Ref(addr);
                    }
                }
                self.heap.truncate(heap_mark);
                self.a = args;
                self.env = env;
                self.envs.truncate(envs_len);
                self.continuation = continuation;
                self.degree = degree;
                self.guards = guards;
                self.depth = depth;
                self.mode = None;
            }
            enum Next {
                Jump(usize),
                Dispatch {
                    addr: usize,
                    degree: Interval,
                    exhausted: bool,
                },
                Drop,
            }
            let next = {
                let cp = self.cps.last_mut().expect("non-empty checked above");
                match &mut cp.alternatives {
                    Alternatives::ClauseChain { next } => Next::Jump(*next),
                    Alternatives::Blocks { alts, idx } => {
                        if *idx >= alts.len() {
                            Next::Drop
                        } else {
                            let (addr, degree) = alts[*idx];
                            *idx += 1;
                            Next::Dispatch {
                                addr,
                                degree,
                                exhausted: *idx >= alts.len(),
                            }
                        }
                    }
                }
            };
            match next {
                Next::Jump(addr) => {
                    // The retry_me_else / trust_me at `addr` updates or pops
                    // this choice point itself.
                    self.pc = addr;
                    return true;
                }
                Next::Dispatch {
                    addr,
                    degree,
                    exhausted,
                } => {
                    if exhausted {
                        self.cps.pop();
                    }
                    if !self.meet_degree(&degree) {
                        // Too imprecise after the proximity step: keep
                        // backtracking (the same choice point, if not yet
                        // exhausted, offers its next block on the next spin).
                        continue;
                    }
                    self.pc = addr;
                    return true;
                }
                Next::Drop => {
                    self.cps.pop();
                }
            }
        }
    }

    /// Clears every storage area, returning the machine to the state it had
    /// before the query block ran.
    fn reset_storage(&mut self) {
        self.heap.clear();
        self.a.clear();
        self.x.clear();
        self.q.clear();
        self.envs.clear();
        self.env = None;
        self.cps.clear();
        self.trail.clear();
        self.guards.clear();
        self.degree = Interval::TOP;
        self.depth = 0;
        self.mode = None;
        self.continuation = usize::MAX;
    }

    fn heap_at(&self, addr: usize) -> Result<&Cell, MachineFault> {
        self.heap
            .get(addr)
            .ok_or_else(|| MachineFault(format!("heap address {addr} out of range")))
    }

    /// Follows reference chains to an unbound reference, constant or
    /// structure cell.
    fn deref(&self, mut cell: Cell) -> Result<Cell, MachineFault> {
        loop {
            match cell {
                Cell::Ref(addr) => {
                    let target = self.heap_at(addr)?.clone();
                    match target {
                        Cell::Ref(next) if next == addr => return Ok(Cell::Ref(addr)),
                        Cell::Ref(next) => cell = Cell::Ref(next),
                        Cell::Functor(name, _) => {
                            return Err(MachineFault(format!(
                                "reference into the middle of structure {name}"
                            )))
                        }
                        other => return Ok(other),
                    }
                }
                other => return Ok(other),
            }
        }
    }

    /// Binds the unbound variable at `addr` and records it on the trail.
    fn bind(&mut self, addr: usize, cell: Cell) {
        self.heap[addr] = cell;
        self.trail.push(addr);
    }

    fn read_reg(&self, reg: Reg) -> Result<Cell, MachineFault> {
        let (bank, slot) = match reg {
            Reg::A(i) => (self.a.get(i), format!("A{i}")),
            Reg::X(i) => (self.x.get(i), format!("X{i}")),
            Reg::Y(i) => {
                let frame = self
                    .env
                    .ok_or_else(|| MachineFault(format!("Y{i} read without an environment")))?;
                let env = self
                    .envs
                    .get(frame)
                    .ok_or_else(|| MachineFault(format!("environment {frame} out of range")))?;
                (env.y.get(i), format!("Y{i}"))
            }
            Reg::Q(i) => {
                return self
                    .q
                    .get(i)
                    .map(|(_, addr)| Cell::Ref(*addr))
                    .ok_or_else(|| MachineFault(format!("Q{i} read before create_variable")));
            }
        };
        match bank {
            Some(cell) if *cell != UNSET => Ok(cell.clone()),
            _ => Err(MachineFault(format!("register {slot} read before set"))),
        }
    }

    fn write_reg(&mut self, reg: Reg, cell: Cell) -> Result<(), MachineFault> {
        let bank = match reg {
            Reg::A(i) => {
                if self.a.len() <= i {
                    self.a.resize(i + 1, UNSET);
                }
                &mut self.a[i]
            }
            Reg::X(i) => {
                if self.x.len() <= i {
                    self.x.resize(i + 1, UNSET);
                }
                &mut self.x[i]
            }
            Reg::Y(i) => {
                let frame = self
                    .env
                    .ok_or_else(|| MachineFault(format!("Y{i} written without an environment")))?;
                let y = &mut self
                    .envs
                    .get_mut(frame)
                    .ok_or_else(|| MachineFault(format!("environment {frame} out of range")))?
                    .y;
                if y.len() <= i {
                    y.resize(i + 1, UNSET);
                }
                &mut y[i]
            }
            Reg::Q(i) => {
                return Err(MachineFault(format!(
                    "Q{i} written outside create_variable"
                )))
            }
        };
        *bank = cell;
        Ok(())
    }

    /// General unification of two cells, tolerating constant and functor
    /// mismatches that the proximity table relates (their degree is met
    /// into the degree register). Returns `Ok(false)` on failure, including
    /// a lambda-cut prune.
    fn unify(&mut self, c1: Cell, c2: Cell) -> Result<bool, MachineFault> {
        let mut pending = vec![(c1, c2)];
        while let Some((a, b)) = pending.pop() {
            let a = self.deref(a)?;
            let b = self.deref(b)?;
            match (a, b) {
                (Cell::Ref(x), Cell::Ref(y)) => {
                    if x != y {
                        // Bind the younger cell to the older so truncating
                        // the heap on backtracking cannot leave a dangling
                        // reference.
                        let (young, old) = if x > y { (x, y) } else { (y, x) };
                        self.bind(young, Cell::Ref(old));
                    }
                }
                (Cell::Ref(x), other) | (other, Cell::Ref(x)) => {
                    self.bind(x, other);
                }
                (Cell::Con(c), Cell::Con(d)) => {
                    if c != d {
                        match self.table.degree_between(&c, &d) {
                            Some(degree) => {
                                if !self.meet_degree(&degree) {
                                    return Ok(false);
                                }
                            }
                            None => return Ok(false),
                        }
                    }
                }
                (Cell::Str(m), Cell::Str(k)) => {
                    let (f, n) = match self.heap_at(m)?.clone() {
                        Cell::Functor(f, n) => (f, n),
                        _ => {
                            return Err(MachineFault(
                                "structure cell does not point at a functor".into(),
                            ))
                        }
                    };
                    let (g, nn) = match self.heap_at(k)?.clone() {
                        Cell::Functor(g, nn) => (g, nn),
                        _ => {
                            return Err(MachineFault(
                                "structure cell does not point at a functor".into(),
                            ))
                        }
                    };
                    if n != nn {
                        return Ok(false);
                    }
                    if f != g {
                        match self.table.degree_between(&f, &g) {
                            Some(degree) => {
                                if !self.meet_degree(&degree) {
                                    return Ok(false);
                                }
                            }
                            None => return Ok(false),
                        }
                    }
                    for i in (1..=n).rev() {
                        pending.push((Cell::Ref(m + i), Cell::Ref(k + i)));
                    }
                }
                (Cell::Con(_), Cell::Str(_)) | (Cell::Str(_), Cell::Con(_)) => return Ok(false),
                (Cell::Functor(name, _), _) | (_, Cell::Functor(name, _)) => {
                    return Err(MachineFault(format!(
                        "naked functor cell {name} reached unification"
                    )))
                }
            }
        }
        Ok(true)
    }

    /// Candidate blocks for a call: the exact predicate first (degree top),
    /// then same-arity blocks whose name the proximity table relates to the
    /// called name, in image block order.
    fn dispatch_candidates(&self, predicate: &str, arity: usize) -> Vec<(usize, Interval)> {
        let mut candidates = Vec::new();
        if let Some(addr) = self.image.block_address(predicate, arity) {
            candidates.push((addr, Interval::TOP));
        }
        for ((name, n), addr) in &self.image.blocks {
            if *n == arity && name != predicate {
                if let Some(degree) = self.table.degree_between(predicate, name) {
                    candidates.push((*addr, degree));
                }
            }
        }
        candidates
    }

    /// Builds the answer emitted at `halt`: the query variables (anonymous
    /// ones excluded) with their extracted bindings, residual variables
    /// renamed to `_0`, `_1`, ... in order of appearance.
    fn build_answer(&self) -> Result<Answer, MachineFault> {
        let mut canon = Canonicalizer::new();
        let mut bindings = Vec::new();
        for (name, addr) in &self.q {
            if is_anonymous(name) {
                continue;
            }
            let term = self.extract(Cell::Ref(*addr), &mut canon, &mut Vec::new())?;
            bindings.push((name.clone(), term));
        }
        Ok(Answer {
            bindings,
            degree: self.degree,
        })
    }

    /// Reads a heap term back into surface syntax. Unbound cells become
    /// canonically numbered variables; a structure reached again while its
    /// own arguments are being read (a cyclic term, only constructible
    /// because the occurs check is optional) is rendered as a variable.
    fn extract(
        &self,
        cell: Cell,
        canon: &mut Canonicalizer,
        visiting: &mut Vec<usize>,
    ) -> Result<Term, MachineFault> {
        let cell = self.deref(cell)?;
        match cell {
            Cell::Ref(addr) => Ok(Term::Var(canon.name_for(&format!("heap:{addr}")))),
            Cell::Con(name) => Ok(Term::Const(name)),
            Cell::Str(m) => {
                if visiting.contains(&m) {
                    return Ok(Term::Var(canon.name_for(&format!("cycle:{m}"))));
                }
                let (functor, arity) = match self.heap_at(m)? {
                    Cell::Functor(f, n) => (f.clone(), *n),
                    _ => {
                        return Err(MachineFault(
                            "structure cell does not point at a functor".into(),
                        ))
                    }
                };
                visiting.push(m);
                let mut args = Vec::with_capacity(arity);
                for i in 1..=arity {
                    args.push(self.extract(Cell::Ref(m + i), canon, visiting)?);
                }
                visiting.pop();
                Ok(Term::Compound(functor, args))
            }
            Cell::Functor(name, _) => Err(MachineFault(format!(
                "naked functor cell {name} reached term extraction"
            ))),
        }
    }

    /// Executes the instruction at `pc`.
    fn execute(&mut self, instr: Instr) -> Result<Flow, MachineFault> {
        match instr {
            Instr::TryMeElse { alt, degree } => {
                if alt >= self.image.code.len() {
                    return Err(MachineFault(format!(
                        "try_me_else target {alt} out of range"
                    )));
                }
                self.push_choice_point(Alternatives::ClauseChain { next: alt });
                Ok(self.enter_clause(&degree))
            }
            Instr::RetryMeElse { alt, degree } => {
                if alt >= self.image.code.len() {
                    return Err(MachineFault(format!(
                        "retry_me_else target {alt} out of range"
                    )));
                }
                match self.cps.last_mut() {
                    Some(cp) => match &mut cp.alternatives {
                        Alternatives::ClauseChain { next } => *next = alt,
                        Alternatives::Blocks { .. } => {
                            return Err(MachineFault(
                                "retry_me_else over a dispatch choice point".into(),
                            ))
                        }
                    },
                    None => {
                        return Err(MachineFault("retry_me_else without a choice point".into()))
                    }
                }
                Ok(self.enter_clause(&degree))
            }
            Instr::TrustMe { degree } => {
                // Pop the clause-chain choice point that brought us here. A
                // fresh (non-backtracked) entry at a multi-clause block's
                // trust_me is impossible, so the guard `next == pc` only
                // protects against popping an unrelated choice point when a
                // single-clause block starts with trust_me.
                if let Some(cp) = self.cps.last() {
                    if matches!(cp.alternatives, Alternatives::ClauseChain { next } if next == self.pc)
                    {
                        self.cps.pop();
                    }
                }
                Ok(self.enter_clause(&degree))
            }
            Instr::Allocate => {
                self.envs.push(EnvFrame {
                    prev: self.env,
                    saved_continuation: self.continuation,
                    y: Vec::new(),
                });
                self.env = Some(self.envs.len() - 1);
                self.pc += 1;
                Ok(Flow::Continue)
            }
            Instr::Deallocate => {
                let frame = self
                    .env
                    .ok_or_else(|| MachineFault("deallocate without an environment".into()))?;
                let env = self
                    .envs
                    .get(frame)
                    .ok_or_else(|| MachineFault(format!("environment {frame} out of range")))?;
                self.continuation = env.saved_continuation;
                self.env = env.prev;
                self.pc += 1;
                Ok(Flow::Continue)
            }
            Instr::GetVariable { reg, arg } => {
                let cell = self.read_reg(arg)?;
                self.write_reg(reg, cell)?;
                self.pc += 1;
                Ok(Flow::Continue)
            }
            Instr::GetValue { reg, arg } => {
                let left = self.read_reg(reg)?;
                let right = self.read_reg(arg)?;
                if self.unify(left, right)? {
                    self.pc += 1;
                    Ok(Flow::Continue)
                } else {
                    Ok(Flow::Fail)
                }
            }
            Instr::GetConstant { name, arg } => {
                let cell = self.read_reg(arg)?;
                match self.deref(cell)? {
                    Cell::Ref(addr) => {
                        self.bind(addr, Cell::Con(name));
                        self.pc += 1;
                        Ok(Flow::Continue)
                    }
                    Cell::Con(c) if c == name => {
                        self.pc += 1;
                        Ok(Flow::Continue)
                    }
                    Cell::Con(c) => match self.table.degree_between(&name, &c) {
                        Some(degree) => {
                            if self.meet_degree(&degree) {
                                self.pc += 1;
                                Ok(Flow::Continue)
                            } else {
                                Ok(Flow::Fail)
                            }
                        }
                        None => Ok(Flow::Fail),
                    },
                    _ => Ok(Flow::Fail),
                }
            }
            Instr::GetStructure {
                functor,
                arity,
                arg,
            } => {
                let cell = self.read_reg(arg)?;
                match self.deref(cell)? {
                    Cell::Ref(addr) => {
                        let m = self.heap.len();
                        self.heap.push(Cell::Functor(functor, arity));
                        self.bind(addr, Cell::Str(m));
                        self.mode = Some(Mode::Write);
                        self.pc += 1;
                        Ok(Flow::Continue)
                    }
                    Cell::Str(m) => {
                        let (g, n) = match self.heap_at(m)? {
                            Cell::Functor(g, n) => (g.clone(), *n),
                            _ => {
                                return Err(MachineFault(
                                    "structure cell does not point at a functor".into(),
                                ))
                            }
                        };
                        if n != arity {
                            return Ok(Flow::Fail);
                        }
                        if g != functor {
                            match self.table.degree_between(&functor, &g) {
                                Some(degree) => {
                                    if !self.meet_degree(&degree) {
                                        return Ok(Flow::Fail);
                                    }
                                }
                                None => return Ok(Flow::Fail),
                            }
                        }
                        self.mode = Some(Mode::Read { s: m + 1 });
                        self.pc += 1;
                        Ok(Flow::Continue)
                    }
                    _ => Ok(Flow::Fail),
                }
            }
            Instr::UnifyVariable { reg } => {
                match self.mode {
                    Some(Mode::Read { s }) => {
                        let cell = self.heap_at(s)?.clone();
                        self.write_reg(reg, cell)?;
                        self.mode = Some(Mode::Read { s: s + 1 });
                    }
                    Some(Mode::Write) => {
                        let addr = self.heap.len();
                        self.heap.push(Cell::Ref(addr));
                        self.write_reg(reg, Cell::Ref(addr))?;
                    }
                    None => {
                        return Err(MachineFault(
                            "unify_variable outside structure matching".into(),
                        ))
                    }
                }
                self.pc += 1;
                Ok(Flow::Continue)
            }
            Instr::UnifyValue { reg } => match self.mode {
                Some(Mode::Read { s }) => {
                    let cell = self.heap_at(s)?.clone();
                    self.mode = Some(Mode::Read { s: s + 1 });
                    let other = self.read_reg(reg)?;
                    if self.unify(other, cell)? {
                        self.pc += 1;
                        Ok(Flow::Continue)
                    } else {
                        Ok(Flow::Fail)
                    }
                }
                Some(Mode::Write) => {
                    let cell = self.read_reg(reg)?;
                    self.heap.push(cell);
                    self.pc += 1;
                    Ok(Flow::Continue)
                }
                None => Err(MachineFault(
                    "unify_value outside structure matching".into(),
                )),
            },
            Instr::PutVariable { reg, arg } => {
                let addr = self.heap.len();
                self.heap.push(Cell::Ref(addr));
                self.write_reg(reg, Cell::Ref(addr))?;
                self.write_reg(arg, Cell::Ref(addr))?;
                self.pc += 1;
                Ok(Flow::Continue)
            }
            Instr::PutValue { reg, arg } => {
                let cell = self.read_reg(reg)?;
                self.write_reg(arg, cell)?;
                self.pc += 1;
                Ok(Flow::Continue)
            }
            Instr::PutConstant { name, arg } => {
                self.write_reg(arg, Cell::Con(name))?;
                self.pc += 1;
                Ok(Flow::Continue)
            }
            Instr::PutStructure {
                functor,
                arity,
                arg,
            } => {
                let m = self.heap.len();
                self.heap.push(Cell::Functor(functor, arity));
                self.write_reg(arg, Cell::Str(m))?;
                self.mode = Some(Mode::Write);
                self.pc += 1;
                Ok(Flow::Continue)
            }
            Instr::CreateVariable { reg, name } => {
                let index = match reg {
                    Reg::Q(i) => i,
                    other => {
                        return Err(MachineFault(format!(
                            "create_variable target must be a query register, got {other:?}"
                        )))
                    }
                };
                if index != self.q.len() {
                    return Err(MachineFault(format!(
                        "query registers must be created in order (got Q{index}, expected Q{})",
                        self.q.len()
                    )));
                }
                let addr = self.heap.len();
                self.heap.push(Cell::Ref(addr));
                self.q.push((name, addr));
                self.pc += 1;
                Ok(Flow::Continue)
            }
            Instr::Call { predicate, arity } => {
                self.continuation = self.pc + 1;
                let candidates = self.dispatch_candidates(&predicate, arity);
                match candidates.len() {
                    0 => Ok(Flow::Fail),
                    1 => {
                        let (addr, degree) = candidates[0];
                        if self.meet_degree(&degree) {
                            self.pc = addr;
                            Ok(Flow::Continue)
                        } else {
                            Ok(Flow::Fail)
                        }
                    }
                    _ => {
                        let (addr, degree) = candidates[0];
                        self.push_choice_point(Alternatives::Blocks {
                            alts: candidates,
                            idx: 1,
                        });
                        if self.meet_degree(&degree) {
                            self.pc = addr;
                            Ok(Flow::Continue)
                        } else {
                            Ok(Flow::Fail)
                        }
                    }
                }
            }
            Instr::GuardEnter { guard } => {
                self.guards.push((guard, Interval::TOP));
                self.pc += 1;
                Ok(Flow::Continue)
            }
            Instr::GuardExit => {
                let (guard, acc) = self
                    .guards
                    .pop()
                    .ok_or_else(|| MachineFault("guard_exit without guard_enter".into()))?;
                if guard.leq(&acc) {
                    self.pc += 1;
                    Ok(Flow::Continue)
                } else {
                    Ok(Flow::Fail)
                }
            }
            Instr::Proceed => {
                self.pc = self.continuation;
                Ok(Flow::Continue)
            }
            Instr::Halt => {
                let answer = self.build_answer()?;
                Ok(Flow::Emit(answer))
            }
        }
    }

    /// Runs from the current `pc` until an answer, exhaustion, or a fault.
    fn run(&mut self) -> Option<Answer> {
        loop {
            if self.pc >= self.image.code.len() {
                self.fault = Some(MachineFault(format!(
                    "program counter {} ran past the end of the code",
                    self.pc
                )));
                self.phase = Phase::Done;
                return None;
            }
            let instr = self.image.code[self.pc].clone();
            match self.execute(instr) {
                Ok(Flow::Continue) => {}
                Ok(Flow::Fail) => {
                    if !self.backtrack() {
                        self.phase = Phase::Done;
                        return None;
                    }
                }
                Ok(Flow::Emit(answer)) => {
                    self.phase = Phase::Redo;
                    return Some(answer);
                }
                Err(fault) => {
                    self.fault = Some(fault);
                    self.phase = Phase::Done;
                    return None;
                }
            }
        }
    }
}

impl Iterator for Machine {
    type Item = Answer;

    fn next(&mut self) -> Option<Answer> {
        match self.phase {
            Phase::Done => None,
            Phase::Start => match self.image.query_entry {
                Some(entry) => {
                    self.pc = entry;
                    self.run()
                }
                None => {
                    self.fault = Some(MachineFault("code image has no query block".into()));
                    self.phase = Phase::Done;
                    None
                }
            },
            Phase::Redo => {
                if self.backtrack() {
                    self.run()
                } else {
                    self.phase = Phase::Done;
                    None
                }
            }
        }
    }
}

impl AnswerSource for Machine {
    fn incomplete(&self) -> bool {
        self.incomplete
    }

    fn failure(&self) -> Option<String> {
        self.fault.as_ref().map(|f| f.to_string())
    }
}
