//! Classical and proximity-based weak unification.

use crate::interval::Interval;
use crate::syntax::{Atom, Term};

use super::subst::Substitution;
use super::table::ProximityTable;

/// Unification failure. Both variants drive backtracking rather than
/// being reported as errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnifyError {
    /// Symbols or shapes that neither match nor sit in the proximity table.
    Clash,
    /// A variable would capture a term containing itself (occurs check on).
    OccursCheck,
}

/// Classical first-order unification extending `subst`.
pub fn unify(
    a: &Term,
    b: &Term,
    subst: &Substitution,
    occurs_check: bool,
) -> Result<Substitution, UnifyError> {
    let empty = ProximityTable::new();
    let (out, degree) = weak_unify_terms(a, b, subst, &empty, occurs_check)?;
    debug_assert_eq!(degree, Interval::TOP);
    Ok(out)
}

/// Weak unification of two terms: symbol clashes are forgiven when the
/// proximity table relates the symbols, and all proximity degrees used
/// are met together into the returned degree.
pub fn weak_unify_terms(
    a: &Term,
    b: &Term,
    subst: &Substitution,
    table: &ProximityTable,
    occurs_check: bool,
) -> Result<(Substitution, Interval), UnifyError> {
    let mut out = subst.clone();
    let mut degree = Interval::TOP;
    weak(a, b, &mut out, &mut degree, table, occurs_check)?;
    Ok((out, degree))
}

/// Weak unification of two atoms: the predicate symbols must be identical
/// or proximate (same arity), then the arguments unify pairwise.
pub fn weak_unify(
    a: &Atom,
    b: &Atom,
    table: &ProximityTable,
    subst: &Substitution,
    occurs_check: bool,
) -> Result<(Substitution, Interval), UnifyError> {
    if a.arity() != b.arity() {
        return Err(UnifyError::Clash);
    }
    let mut degree = match table.degree_between(&a.predicate, &b.predicate) {
        Some(d) => d,
        None => return Err(UnifyError::Clash),
    };
    let mut out = subst.clone();
    for (x, y) in a.args.iter().zip(&b.args) {
        weak(x, y, &mut out, &mut degree, table, occurs_check)?;
    }
    Ok((out, degree))
}

fn weak(
    a: &Term,
    b: &Term,
    subst: &mut Substitution,
    degree: &mut Interval,
    table: &ProximityTable,
    occurs_check: bool,
) -> Result<(), UnifyError> {
    let a = subst.resolve(a);
    let b = subst.resolve(b);
    match (a.term(), b.term()) {
        (Term::Var(x), Term::Var(y)) if x == y => Ok(()),
        (Term::Var(x), other) | (other, Term::Var(x)) => {
            if occurs_check && occurs(x, other, subst) {
                return Err(UnifyError::OccursCheck);
            }
            subst.bind(x.clone(), other.clone());
            Ok(())
        }
        (Term::Const(c1), Term::Const(c2)) => match table.degree_between(c1, c2) {
            Some(d) => {
                *degree = degree.meet(&d);
                Ok(())
            }
            None => Err(UnifyError::Clash),
        },
        (Term::Compound(f, fargs), Term::Compound(g, gargs)) => {
            if fargs.len() != gargs.len() {
                return Err(UnifyError::Clash);
            }
            match table.degree_between(f, g) {
                Some(d) => *degree = degree.meet(&d),
                None => return Err(UnifyError::Clash),
            }
            for (x, y) in fargs.iter().zip(gargs) {
                weak(x, y, subst, degree, table, occurs_check)?;
            }
            Ok(())
        }
        _ => Err(UnifyError::Clash),
    }
}

fn occurs(var: &str, term: &Term, subst: &Substitution) -> bool {
    match subst.resolve(term).term() {
        Term::Var(name) => name == var,
        Term::Const(_) => false,
        Term::Compound(_, args) => args.iter().any(|arg| occurs(var, arg, subst)),
    }
}
