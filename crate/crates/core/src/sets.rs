//! Elementary sets on the half-line and the metric isotony acting on them.
//!
//! Intervals are stored half-open `(a, b)`, or `[0, b)` when clipped at the
//! origin. Every quantity computed here is a Lebesgue measure, so endpoint
//! types never change a result; they are kept only for display.

use std::fmt;

use serde_json::Value;

use crate::error::{invalid, BcError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    /// May be `f64::INFINITY`.
    pub b: f64,
    /// Only ever true when `a == 0`.
    pub closed_left: bool,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(invalid(format!("left endpoint must be finite and >= 0, got {a}")));
        }
        if !(b > a) {
            return Err(invalid(format!("degenerate interval ({a}, {b})")));
        }
        Ok(Self { a, b, closed_left: false })
    }

    pub fn closed_at_zero(b: f64) -> Result<Self> {
        let mut iv = Self::new(0.0, b)?;
        iv.closed_left = true;
        Ok(iv)
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    fn overlap(&self, other: &Interval) -> f64 {
        let lo = self.a.max(other.a);
        let hi = self.b.min(other.b);
        if hi > lo {
            hi - lo
        } else {
            0.0
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.closed_left { '[' } else { '(' };
        if self.b.is_infinite() {
            write!(f, "{l}{},inf)", self.a)
        } else {
            write!(f, "{l}{},{})", self.a, self.b)
        }
    }
}

/// Finite union of non-degenerate intervals with positive gaps, in
/// increasing order. The empty list is the empty set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ElementarySet {
    intervals: Vec<Interval>,
}

impl ElementarySet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a set from arbitrary intervals, merging any that overlap or
    /// touch.
    pub fn new(intervals: Vec<Interval>) -> Self {
        Self::normalized(intervals, 0.0)
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let ivs = pairs.iter().map(|&(a, b)| Interval::new(a, b)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(ivs))
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Ok(Self { intervals: vec![Interval::new(a, b)?] })
    }

    fn normalized(mut ivs: Vec<Interval>, weld_tol: f64) -> Self {
        ivs.sort_by(|x, y| x.a.total_cmp(&y.a));
        let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            match out.last_mut() {
                Some(last) if iv.a - last.b <= weld_tol => {
                    if iv.b > last.b {
                        last.b = iv.b;
                    }
                    last.closed_left |= iv.closed_left && iv.a == last.a;
                }
                _ => out.push(iv),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    /// `m(E ∩ (0, L))`.
    pub fn measure_within(&self, l: f64) -> f64 {
        let window = Interval { a: 0.0, b: l, closed_left: false };
        self.intervals.iter().map(|iv| iv.overlap(&window)).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| (x > iv.a || (iv.closed_left && x == iv.a)) && x < iv.b)
    }

    /// Distance from `x` to the set (infinite for the empty set).
    pub fn dist(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|iv| {
                if x < iv.a {
                    iv.a - x
                } else if x > iv.b {
                    x - iv.b
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `m(E ∩ F)` computed by a merge sweep.
    pub fn intersection_measure(&self, other: &ElementarySet) -> f64 {
        self.intersection_measure_within(other, f64::INFINITY)
    }

    fn intersection_measure_within(&self, other: &ElementarySet, l: f64) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        let (p, q) = (&self.intervals, &other.intervals);
        while i < p.len() && j < q.len() {
            let lo = p[i].a.max(q[j].a);
            let hi = p[i].b.min(q[j].b).min(l);
            if hi > lo {
                acc += hi - lo;
            }
            if p[i].b < q[j].b {
                i += 1;
            } else {
                j += 1;
            }
        }
        acc
    }

    /// Inclusion up to null sets.
    pub fn is_subset_of(&self, other: &ElementarySet) -> bool {
        self.intervals.iter().all(|iv| other.intervals.iter().any(|ov| ov.a <= iv.a && iv.b <= ov.b))
    }

    pub fn union(&self, other: &ElementarySet) -> ElementarySet {
        let mut ivs = self.intervals.clone();
        ivs.extend_from_slice(&other.intervals);
        Self::new(ivs)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.intervals
                .iter()
                .map(|iv| {
                    let b = if iv.b.is_infinite() { Value::from("inf") } else { Value::from(iv.b) };
                    Value::Array(vec![Value::from(iv.a), b])
                })
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| BcError::Parse("elementary set must be a JSON array".into()))?;
        let mut ivs = Vec::with_capacity(arr.len());
        for pair in arr {
            let p = pair
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| BcError::Parse(format!("expected [a, b], got {pair}")))?;
            let a = json_endpoint(&p[0])?;
            let b = json_endpoint(&p[1])?;
            ivs.push(Interval::new(a, b)?);
        }
        Ok(Self::new(ivs))
    }

    /// Parses either one set (`[[a,b],...]`) or a list of sets
    /// (`[[[a,b],...], ...]`).
    pub fn many_from_json(v: &Value) -> Result<Vec<Self>> {
        let arr = v.as_array().ok_or_else(|| BcError::Parse("expected a JSON array".into()))?;
        let nested = arr.first().and_then(Value::as_array).and_then(|first| first.first()).is_some_and(Value::is_array);
        if nested {
            arr.iter().map(Self::from_json).collect()
        } else {
            Ok(vec![Self::from_json(v)?])
        }
    }
}

fn json_endpoint(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| BcError::Parse(format!("bad endpoint {n}"))),
        Value::String(s) if s == "inf" || s == "+inf" || s == "infinity" => Ok(f64::INFINITY),
        _ => Err(BcError::Parse(format!("bad endpoint {v}"))),
    }
}

impl fmt::Display for ElementarySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        for (k, iv) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, "U")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

/// The subspace `L2(E)`; a null set describes the zero subspace.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubspaceDescriptor {
    pub set: ElementarySet,
}

impl SubspaceDescriptor {
    pub fn new(set: ElementarySet) -> Self {
        Self { set }
    }

    pub fn is_zero(&self) -> bool {
        self.set.measure() == 0.0
    }
}

/// `E^r = {x >= 0 : dist(x, E) < r}` with components welded when they touch.
pub fn neighborhood(e: &ElementarySet, r: f64) -> ElementarySet {
    neighborhood_with_tol(e, r, 0.0)
}

/// As [`neighborhood`], merging components whose gap is at most `weld_tol`.
pub fn neighborhood_with_tol(e: &ElementarySet, r: f64, weld_tol: f64) -> ElementarySet {
    assert!(r > 0.0, "neighborhood radius must be positive, got {r}");
    let dilated = e
        .intervals
        .iter()
        .map(|iv| {
            let a = iv.a - r;
            let b = iv.b + r;
            if a < 0.0 || iv.closed_left {
                Interval { a: 0.0, b, closed_left: true }
            } else {
                Interval { a, b, closed_left: false }
            }
        })
        .collect();
    ElementarySet::normalized(dilated, weld_tol)
}

/// `{x}^r`: `(x - r, x + r)` when `x >= r`, else `[0, x + r)`.
pub fn point_neighborhood(x: f64, r: f64) -> ElementarySet {
    assert!(x >= 0.0 && r > 0.0);
    let iv = if x >= r {
        Interval { a: x - r, b: x + r, closed_left: false }
    } else {
        Interval { a: 0.0, b: x + r, closed_left: true }
    };
    ElementarySet { intervals: vec![iv] }
}

/// The wave isotony on elementary subspaces: `I^0 = id`,
/// `I^T L2(E) = L2(E^T)`.
pub fn isotony_apply(s: &SubspaceDescriptor, t: f64) -> SubspaceDescriptor {
    assert!(t >= 0.0, "isotony time must be non-negative, got {t}");
    if t == 0.0 {
        s.clone()
    } else {
        SubspaceDescriptor::new(neighborhood(&s.set, t))
    }
}

/// `m((E △ F) ∩ (0, L))`, exact from the endpoints.
pub fn sym_diff_measure(e: &ElementarySet, f: &ElementarySet, l: f64) -> f64 {
    assert!(l > 0.0, "L must be positive");
    let me = e.measure_within(l);
    let mf = f.measure_within(l);
    let both = e.intersection_measure_within(f, l);
    (me + mf - 2.0 * both).max(0.0)
}

/// Set-level convergence `L2(E_n) -> L2(E)`: for every `L` the last half of
/// the sequence stays within `tol` in `m((E_n △ E) ∩ (0, L))`.
pub fn converges(seq: &[ElementarySet], e: &ElementarySet, ls: &[f64], tol: f64) -> bool {
    assert!(!seq.is_empty(), "sequence must be non-empty");
    let start = seq.len() / 2;
    ls.iter().all(|&l| seq[start..].iter().all(|en| sym_diff_measure(en, e, l) < tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(pairs: &[(f64, f64)]) -> ElementarySet {
        ElementarySet::from_pairs(pairs).unwrap()
    }

    #[test]
    fn neighborhood_examples() {
        let n = neighborhood(&set(&[(2.0, 3.0)]), 1.0);
        assert_eq!(n.intervals(), &[Interval { a: 1.0, b: 4.0, closed_left: false }]);
        let n = neighborhood(&set(&[(0.5, 1.0)]), 1.0);
        assert_eq!(n.intervals(), &[Interval { a: 0.0, b: 2.0, closed_left: true }]);
        let n = neighborhood(&set(&[(1.0, 2.0), (2.5, 3.0)]), 0.3);
        assert_eq!(n.intervals().len(), 1);
        assert!((n.intervals()[0].a - 0.7).abs() < 1e-15);
        assert!((n.intervals()[0].b - 3.3).abs() < 1e-15);
        assert!(neighborhood(&ElementarySet::empty(), 2.0).is_empty());
    }

    #[test]
    fn infinite_right_endpoint_saturates() {
        let e = set(&[(3.0, f64::INFINITY)]);
        let n = neighborhood(&e, 1.0);
        assert_eq!(n.intervals()[0].a, 2.0);
        assert!(n.intervals()[0].b.is_infinite());
        assert_eq!(sym_diff_measure(&e, &n, 10.0), 1.0);
        assert!(e.measure().is_infinite());
    }

    #[test]
    fn isotony_examples() {
        let s = SubspaceDescriptor::new(set(&[(1.0, 2.0)]));
        assert_eq!(isotony_apply(&s, 0.0), s);
        assert_eq!(isotony_apply(&s, 0.5).set, set(&[(0.5, 2.5)]));
        let z = SubspaceDescriptor::default();
        assert!(isotony_apply(&z, 3.0).is_zero());
    }

    #[test]
    fn sym_diff_examples() {
        let a = set(&[(0.0, 1.0)]);
        assert_eq!(sym_diff_measure(&a, &a, 5.0), 0.0);
        assert_eq!(sym_diff_measure(&a, &set(&[(0.0, 2.0)]), 5.0), 1.0);
        assert_eq!(sym_diff_measure(&set(&[(0.0, 3.0)]), &set(&[(1.0, 2.0)]), 1.5), 1.0);
    }

    #[test]
    fn convergence_examples() {
        let target = set(&[(0.0, 1.0)]);
        let seq: Vec<_> = (1..=400).map(|n| set(&[(0.0, 1.0 + 1.0 / n as f64)])).collect();
        assert!(converges(&seq, &target, &[2.0], 1e-2));
        let runaway: Vec<_> = (1..=40).map(|n| set(&[(n as f64, n as f64 + 1.0)])).collect();
        assert!(converges(&runaway, &ElementarySet::empty(), &[10.0], 1e-12));
        let alternating: Vec<_> =
            (0..40).map(|n| if n % 2 == 0 { set(&[(0.0, 1.0)]) } else { set(&[(2.0, 3.0)]) }).collect();
        assert!(!converges(&alternating, &target, &[4.0], 1e-3));
    }

    #[test]
    fn point_neighborhood_measure() {
        for &(x, r) in &[(2.0, 1.0), (0.0, 1.0), (0.5, 1.0), (3.0, 0.25)] {
            let m = point_neighborhood(x, r).measure();
            assert_eq!(m, r + f64::min(r, x));
        }
    }

    #[test]
    fn json_round_trip_with_infinity() {
        let e = set(&[(0.0, 1.0), (2.0, f64::INFINITY)]);
        let v = e.to_json();
        assert_eq!(v.to_string(), r#"[[0.0,1.0],[2.0,"inf"]]"#);
        assert_eq!(ElementarySet::from_json(&v).unwrap(), e);
        let many = ElementarySet::many_from_json(&serde_json::json!([[[0, 1]], [[2, 3], [4, 5]]])).unwrap();
        assert_eq!(many.len(), 2);
        let one = ElementarySet::many_from_json(&serde_json::json!([[0, 1], [2, 3]])).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn invalid_intervals_rejected() {
        assert!(Interval::new(2.0, 2.0).is_err());
        assert!(Interval::new(-1.0, 2.0).is_err());
        assert!(Interval::new(f64::NAN, 2.0).is_err());
    }

    fn arb_set() -> impl Strategy<Value = ElementarySet> {
        prop::collection::vec((0.0f64..10.0, 0.01f64..2.0), 0..5)
            .prop_map(|v| ElementarySet::new(v.into_iter().map(|(a, l)| Interval::new(a, a + l).unwrap()).collect()))
    }

    proptest! {
        #[test]
        fn isotony_is_monotone(e in arb_set(), extra in arb_set(), t in 0.01f64..3.0, dt in 0.0f64..2.0) {
            let f = e.union(&extra);
            let small = neighborhood(&e, t);
            let big = neighborhood(&f, t + dt);
            prop_assert!(small.is_subset_of(&big));
        }

        #[test]
        fn isotony_is_a_semigroup(e in arb_set(), s in 0.01f64..2.0, t in 0.01f64..2.0) {
            let twice = neighborhood(&neighborhood(&e, s), t);
            let once = neighborhood(&e, s + t);
            for l in [1.0, 5.0, 20.0] {
                prop_assert!(sym_diff_measure(&twice, &once, l) < 1e-12);
            }
        }

        #[test]
        fn dilated_measure_grows(e in arb_set(), t in 0.01f64..2.0, dt in 0.0f64..1.0, l in 1.0f64..15.0) {
            let m1 = neighborhood(&e, t).measure_within(l + t);
            let m2 = neighborhood(&e, t + dt).measure_within(l + t + dt);
            prop_assert!(m2 >= m1 - 1e-12);
        }

        #[test]
        fn sym_diff_is_a_pseudometric(a in arb_set(), b in arb_set(), c in arb_set(), l in 0.5f64..15.0) {
            let ab = sym_diff_measure(&a, &b, l);
            prop_assert!((ab - sym_diff_measure(&b, &a, l)).abs() < 1e-12);
            prop_assert!(ab <= sym_diff_measure(&a, &c, l) + sym_diff_measure(&c, &b, l) + 1e-12);
        }
    }
}
