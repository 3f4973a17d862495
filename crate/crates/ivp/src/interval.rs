//! Closed subintervals of `[0,1]` used as truth degrees.
//!
//! Intervals are ordered componentwise: `[a,b] <= [c,d]` iff `a <= c` and
//! `b <= d`. That order is partial (e.g. `[0.1,0.9]` and `[0.2,0.3]` are
//! incomparable) and forms a complete lattice with bottom `[0,0]`, top
//! `[1,1]`, and componentwise min/max as meet/join.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors from constructing or operating on degree intervals.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("invalid interval [{lower},{upper}]: bounds must satisfy 0 <= lower <= upper <= 1")]
    InvalidInterval { lower: f64, upper: f64 },
    #[error("negative exponent {0} is not allowed for interval powers")]
    NegativeExponent(f64),
    #[error("malformed interval literal {0:?}, expected \"[l,u]\"")]
    Malformed(String),
}

/// A pair of raw real endpoints with `lo <= hi`, not necessarily inside
/// `[0,1]`. Arithmetic on [`Interval`] values produces `Bounds` so callers
/// can decide whether to clamp back into the degree lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    /// Clamp both endpoints into `[0,1]`, yielding a lattice element again.
    pub fn clamp_unit(self) -> Interval {
        Interval {
            lo: self.lo.clamp(0.0, 1.0),
            hi: self.hi.clamp(0.0, 1.0),
        }
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// A closed subinterval of the unit interval: one truth degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

// Construction rejects NaN, so reflexive equality holds for every value.
impl Eq for Interval {}

impl Interval {
    /// The least degree, `[0,0]` (definitely false).
    pub const BOTTOM: Interval = Interval { lo: 0.0, hi: 0.0 };
    /// The greatest degree, `[1,1]` (definitely true).
    pub const TOP: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Build an interval, checking `0 <= lo <= hi <= 1`.
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= 1.0 {
            Ok(Interval { lo, hi })
        } else {
            Err(IntervalError::InvalidInterval {
                lower: lo,
                upper: hi,
            })
        }
    }

    pub fn lower(&self) -> f64 {
        self.lo
    }

    pub fn upper(&self) -> f64 {
        self.hi
    }

    /// Componentwise (partial) lattice order.
    pub fn leq(&self, other: &Interval) -> bool {
        self.lo <= other.lo && self.hi <= other.hi
    }

    /// Strict version of [`Interval::leq`].
    pub fn lt(&self, other: &Interval) -> bool {
        self.leq(other) && self != other
    }

    /// Greatest lower bound: componentwise minimum.
    pub fn meet(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    /// Least upper bound: componentwise maximum.
    pub fn join(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// The involutive complement `[1-hi, 1-lo]`. Flipping the endpoints is
    /// what keeps the result a well-formed interval and makes the De Morgan
    /// laws hold against meet and join.
    pub fn complement(&self) -> Interval {
        Interval {
            lo: 1.0 - self.hi,
            hi: 1.0 - self.lo,
        }
    }

    /// Endpoint sum. May exceed 1, hence the raw result.
    pub fn add(&self, other: &Interval) -> Bounds {
        Bounds {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }

    /// Interval difference `[a-d, b-c]` for `[a,b] - [c,d]`. May go
    /// negative, hence the raw result.
    pub fn sub(&self, other: &Interval) -> Bounds {
        Bounds {
            lo: self.lo - other.hi,
            hi: self.hi - other.lo,
        }
    }

    /// Interval product: min and max over the four endpoint products.
    pub fn mul(&self, other: &Interval) -> Bounds {
        let products = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        let mut lo = products[0];
        let mut hi = products[0];
        for p in &products[1..] {
            lo = lo.min(*p);
            hi = hi.max(*p);
        }
        Bounds { lo, hi }
    }

    /// Componentwise power for a non-negative exponent.
    pub fn pow(&self, r: f64) -> Result<Bounds, IntervalError> {
        if r.is_nan() || r < 0.0 {
            return Err(IntervalError::NegativeExponent(r));
        }
        Ok(Bounds {
            lo: self.lo.powf(r),
            hi: self.hi.powf(r),
        })
    }

    /// Componentwise comparison within `tol`, for tests and goldens.
    pub fn approx_eq(&self, other: &Interval, tol: f64) -> bool {
        (self.lo - other.lo).abs() <= tol && (self.hi - other.hi).abs() <= tol
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // f64's Display already picks the shortest decimal form that
        // round-trips, so `[0.2,0.4]` prints exactly like its source text.
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

impl FromStr for Interval {
    type Err = IntervalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|rest| rest.strip_suffix(']'))
            .ok_or_else(|| IntervalError::Malformed(s.to_string()))?;
        let (lo_text, hi_text) = inner
            .split_once(',')
            .ok_or_else(|| IntervalError::Malformed(s.to_string()))?;
        let lo: f64 = lo_text
            .trim()
            .parse()
            .map_err(|_| IntervalError::Malformed(s.to_string()))?;
        let hi: f64 = hi_text
            .trim()
            .parse()
            .map_err(|_| IntervalError::Malformed(s.to_string()))?;
        Interval::new(lo, hi)
    }
}

/// Named scalar t-norms lifted componentwise to intervals. `Min` is the
/// default and the one every golden in this crate is pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TNormKind {
    #[default]
    Min,
}

impl TNormKind {
    pub fn from_name(name: &str) -> Option<TNormKind> {
        match name {
            "min" => Some(TNormKind::Min),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TNormKind::Min => "min",
        }
    }

    /// Apply the scalar t-norm to both endpoints.
    pub fn apply(&self, a: &Interval, b: &Interval) -> Interval {
        match self {
            TNormKind::Min => a.meet(b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-9;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn construction_accepts_point_and_proper_intervals() {
        assert_eq!(iv(0.2, 0.4).lower(), 0.2);
        assert_eq!(iv(0.2, 0.4).upper(), 0.4);
        assert_eq!(iv(0.5, 0.5), iv(0.5, 0.5));
    }

    #[test]
    fn construction_rejects_inverted_or_out_of_range_bounds() {
        assert!(matches!(
            Interval::new(0.9, 0.8),
            Err(IntervalError::InvalidInterval { .. })
        ));
        assert!(Interval::new(-0.1, 0.5).is_err());
        assert!(Interval::new(0.5, 1.1).is_err());
        assert!(Interval::new(f64::NAN, 0.5).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn order_is_componentwise_and_partial() {
        assert!(iv(0.2, 0.4).leq(&iv(0.3, 0.5)));
        assert!(!iv(0.2, 0.6).leq(&iv(0.3, 0.5)));
        // Overlapping but incomparable: neither direction holds.
        assert!(!iv(0.1, 0.9).leq(&iv(0.2, 0.3)));
        assert!(!iv(0.2, 0.3).leq(&iv(0.1, 0.9)));
        // Strict order excludes equality.
        assert!(iv(0.2, 0.4).lt(&iv(0.2, 0.5)));
        assert!(!iv(0.2, 0.4).lt(&iv(0.2, 0.4)));
    }

    #[test]
    fn bottom_and_top_bound_everything() {
        for x in [iv(0.0, 0.0), iv(0.3, 0.7), iv(1.0, 1.0)] {
            assert!(Interval::BOTTOM.leq(&x));
            assert!(x.leq(&Interval::TOP));
        }
    }

    #[test]
    fn meet_and_join_match_componentwise_min_max() {
        assert_eq!(iv(0.2, 0.4).meet(&iv(0.9, 1.0)), iv(0.2, 0.4));
        assert_eq!(iv(0.2, 0.6).meet(&iv(0.3, 0.5)), iv(0.2, 0.5));
        assert_eq!(iv(0.2, 0.6).join(&iv(0.3, 0.5)), iv(0.3, 0.6));
    }

    #[test]
    fn complement_flips_and_shifts_endpoints() {
        assert!(iv(0.2, 0.4).complement().approx_eq(&iv(0.6, 0.8), TOL));
        assert_eq!(Interval::BOTTOM.complement(), Interval::TOP);
        assert_eq!(Interval::TOP.complement(), Interval::BOTTOM);
    }

    #[test]
    fn arithmetic_matches_endpoint_formulas() {
        let a = iv(0.1, 0.2);
        let b = iv(0.3, 0.4);
        let sum = a.add(&b);
        assert!((sum.lo - 0.4).abs() <= TOL && (sum.hi - 0.6).abs() <= TOL);

        let diff = a.sub(&b);
        assert!((diff.lo - (0.1 - 0.4)).abs() <= TOL);
        assert!((diff.hi - (0.2 - 0.3)).abs() <= TOL);

        let prod = a.mul(&b);
        assert!((prod.lo - 0.03).abs() <= TOL && (prod.hi - 0.08).abs() <= TOL);

        let sq = iv(0.5, 0.6).pow(2.0).unwrap();
        assert!((sq.lo - 0.25).abs() <= TOL && (sq.hi - 0.36).abs() <= TOL);
    }

    #[test]
    fn raw_results_are_unclamped_but_clampable() {
        let over = iv(0.8, 0.9).add(&iv(0.8, 0.9));
        assert!(over.hi > 1.0);
        assert_eq!(over.clamp_unit(), Interval::TOP);

        let under = iv(0.1, 0.2).sub(&iv(0.8, 0.9));
        assert!(under.lo < 0.0);
        assert_eq!(under.clamp_unit(), Interval::BOTTOM);
    }

    #[test]
    fn pow_rejects_negative_exponents() {
        assert_eq!(
            iv(0.5, 0.6).pow(-1.0),
            Err(IntervalError::NegativeExponent(-1.0))
        );
    }

    #[test]
    fn display_round_trips_through_parse() {
        for text in ["[0.2,0.4]", "[0,0]", "[1,1]", "[0.25,0.8]"] {
            let parsed: Interval = text.parse().unwrap();
            assert_eq!(parsed.to_string(), text);
        }
        // Whitespace and long forms normalize.
        let v: Interval = "[ 0.50 , 1.0 ]".parse().unwrap();
        assert_eq!(v.to_string(), "[0.5,1]");
    }

    #[test]
    fn parse_reports_malformed_and_invalid_literals() {
        assert!(matches!(
            "0.2,0.4".parse::<Interval>(),
            Err(IntervalError::Malformed(_))
        ));
        assert!(matches!(
            "[0.9,0.2]".parse::<Interval>(),
            Err(IntervalError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn tnorm_registry_knows_min() {
        let t = TNormKind::from_name("min").unwrap();
        assert_eq!(t.name(), "min");
        assert_eq!(t.apply(&iv(0.2, 0.6), &iv(0.3, 0.5)), iv(0.2, 0.5));
        assert!(TNormKind::from_name("product").is_none());
    }

    prop_compose! {
        fn arb_interval()(lo in 0.0f64..=1.0, hi in 0.0f64..=1.0) -> Interval {
            if lo <= hi { iv(lo, hi) } else { iv(hi, lo) }
        }
    }

    proptest! {
        #[test]
        fn meet_join_are_commutative(a in arb_interval(), b in arb_interval()) {
            prop_assert_eq!(a.meet(&b), b.meet(&a));
            prop_assert_eq!(a.join(&b), b.join(&a));
        }

        #[test]
        fn meet_join_are_associative(a in arb_interval(), b in arb_interval(), c in arb_interval()) {
            prop_assert_eq!(a.meet(&b).meet(&c), a.meet(&b.meet(&c)));
            prop_assert_eq!(a.join(&b).join(&c), a.join(&b.join(&c)));
        }

        #[test]
        fn meet_join_are_idempotent_with_identities(a in arb_interval()) {
            prop_assert_eq!(a.meet(&a), a);
            prop_assert_eq!(a.join(&a), a);
            prop_assert_eq!(a.meet(&Interval::TOP), a);
            prop_assert_eq!(a.join(&Interval::BOTTOM), a);
        }

        #[test]
        fn absorption_laws_hold(a in arb_interval(), b in arb_interval()) {
            prop_assert_eq!(a.meet(&a.join(&b)), a);
            prop_assert_eq!(a.join(&a.meet(&b)), a);
        }

        #[test]
        fn meet_is_the_greatest_lower_bound(
            a in arb_interval(), b in arb_interval(), c in arb_interval()
        ) {
            let m = a.meet(&b);
            prop_assert!(m.leq(&a) && m.leq(&b));
            if c.leq(&a) && c.leq(&b) {
                prop_assert!(c.leq(&m));
            }
        }

        #[test]
        fn join_is_the_least_upper_bound(
            a in arb_interval(), b in arb_interval(), c in arb_interval()
        ) {
            let j = a.join(&b);
            prop_assert!(a.leq(&j) && b.leq(&j));
            if a.leq(&c) && b.leq(&c) {
                prop_assert!(j.leq(&c));
            }
        }

        #[test]
        fn complement_is_involutive_and_de_morgan(a in arb_interval(), b in arb_interval()) {
            prop_assert!(a.complement().complement().approx_eq(&a, TOL));
            prop_assert!(a.meet(&b).complement().approx_eq(&a.complement().join(&b.complement()), TOL));
            prop_assert!(a.join(&b).complement().approx_eq(&a.complement().meet(&b.complement()), TOL));
        }

        #[test]
        fn complement_is_antitone(a in arb_interval(), b in arb_interval()) {
            if a.leq(&b) {
                prop_assert!(b.complement().leq(&a.complement()));
            }
        }

        #[test]
        fn arithmetic_preserves_endpoint_order(a in arb_interval(), b in arb_interval(), r in 0.0f64..4.0) {
            let results = [a.add(&b), a.sub(&b), a.mul(&b), a.pow(r).unwrap()];
            for bounds in results {
                prop_assert!(bounds.lo <= bounds.hi + TOL);
            }
        }

        #[test]
        fn clamped_arithmetic_stays_in_the_lattice(a in arb_interval(), b in arb_interval()) {
            for bounds in [a.add(&b), a.sub(&b), a.mul(&b)] {
                let clamped = bounds.clamp_unit();
                prop_assert!(Interval::BOTTOM.leq(&clamped) && clamped.leq(&Interval::TOP));
            }
        }

        #[test]
        fn display_parse_round_trip(a in arb_interval()) {
            let back: Interval = a.to_string().parse().unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
