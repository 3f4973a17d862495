//! Goal-directed resolution with proximity-based weak unification.
//!
//! Selection is leftmost, clauses are tried in source order, and
//! backtracking is chronological, so for crisp programs the search behaves
//! exactly like classical SLD resolution. Each resolution step meets the
//! clause's annotation and the unifier's proximity degree into the
//! derivation degree, and derivations whose degree stops dominating the
//! lambda-cut are pruned.

mod solve;
mod subst;
mod table;
mod unify;

pub use solve::{resolve_step, solve, SldAnswers, SolveOptions, StepError};
pub use subst::Substitution;
pub use table::ProximityTable;
pub use unify::{unify, weak_unify, weak_unify_terms, UnifyError};
