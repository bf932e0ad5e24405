//! Element algebras.
//!
//! Every kernel in this crate is generic over a [`Semiring`]: an element type
//! with an associative, commutative `add` (identity `zero`), an associative
//! `mul` (identity `one`), where `zero` annihilates under `mul` and `mul`
//! distributes over `add`. No additive inverses are assumed anywhere, which is
//! what lets the same kernels run over `(bool, |, &)` or tropical algebras.
//!
//! Zero testing is exact equality with `zero()`; entries that compare equal to
//! zero after any accumulation are dropped from stored matrices so that nnz
//! counts stay meaningful.

use std::fmt::Debug;

/// A semiring over a copyable element type.
pub trait Semiring: Copy + Send + Sync + 'static {
    type Elem: Copy + PartialEq + Debug + Send + Sync + 'static;

    fn add(&self, x: Self::Elem, y: Self::Elem) -> Self::Elem;
    fn mul(&self, x: Self::Elem, y: Self::Elem) -> Self::Elem;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;

    #[inline]
    fn is_zero(&self, x: Self::Elem) -> bool {
        x == self.zero()
    }
}

/// Ordinary arithmetic over `f64`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct PlusTimes;

impl Semiring for PlusTimes {
    type Elem = f64;

    #[inline]
    fn add(&self, x: f64, y: f64) -> f64 {
        x + y
    }
    #[inline]
    fn mul(&self, x: f64, y: f64) -> f64 {
        x * y
    }
    #[inline]
    fn zero(&self) -> f64 {
        0.0
    }
    #[inline]
    fn one(&self) -> f64 {
        1.0
    }
}

/// Ordinary arithmetic over `i64`; handy where exact equality is wanted.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct PlusTimesI64;

impl Semiring for PlusTimesI64 {
    type Elem = i64;

    #[inline]
    fn add(&self, x: i64, y: i64) -> i64 {
        x + y
    }
    #[inline]
    fn mul(&self, x: i64, y: i64) -> i64 {
        x * y
    }
    #[inline]
    fn zero(&self) -> i64 {
        0
    }
    #[inline]
    fn one(&self) -> i64 {
        1
    }
}

/// Boolean semiring `(or, and)`; matrix product computes reachability.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct BoolOrAnd;

impl Semiring for BoolOrAnd {
    type Elem = bool;

    #[inline]
    fn add(&self, x: bool, y: bool) -> bool {
        x || y
    }
    #[inline]
    fn mul(&self, x: bool, y: bool) -> bool {
        x && y
    }
    #[inline]
    fn zero(&self) -> bool {
        false
    }
    #[inline]
    fn one(&self) -> bool {
        true
    }
}

/// Tropical `(min, +)` semiring over `f64`; `+inf` is the additive identity.
/// Matrix product computes shortest path lengths.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct MinPlus;

impl Semiring for MinPlus {
    type Elem = f64;

    #[inline]
    fn add(&self, x: f64, y: f64) -> f64 {
        x.min(y)
    }
    #[inline]
    fn mul(&self, x: f64, y: f64) -> f64 {
        x + y
    }
    #[inline]
    fn zero(&self) -> f64 {
        f64::INFINITY
    }
    #[inline]
    fn one(&self) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(x: f64, y: f64) -> bool {
        if x == y {
            return true;
        }
        (x - y).abs() <= 1e-12 * x.abs().max(y.abs())
    }

    /// Axiom suite over sampled elements; `eq` is exact for discrete carriers
    /// and a relative tolerance for floating point ones.
    fn check_axioms<S: Semiring>(sr: S, samples: &[S::Elem], eq: impl Fn(S::Elem, S::Elem) -> bool) {
        let z = sr.zero();
        let o = sr.one();
        for &x in samples {
            assert!(eq(sr.add(x, z), x), "zero is not an add identity for {x:?}");
            assert!(eq(sr.add(z, x), x));
            assert!(eq(sr.mul(x, o), x), "one is not a mul identity for {x:?}");
            assert!(eq(sr.mul(o, x), x));
            assert!(sr.is_zero(sr.mul(x, z)), "zero does not annihilate {x:?}");
            assert!(sr.is_zero(sr.mul(z, x)));
            for &y in samples {
                assert!(eq(sr.add(x, y), sr.add(y, x)), "add not commutative");
                for &w in samples {
                    assert!(eq(sr.add(sr.add(x, y), w), sr.add(x, sr.add(y, w))), "add not associative");
                    assert!(eq(sr.mul(sr.mul(x, y), w), sr.mul(x, sr.mul(y, w))), "mul not associative");
                    assert!(
                        eq(sr.mul(x, sr.add(y, w)), sr.add(sr.mul(x, y), sr.mul(x, w))),
                        "mul does not distribute over add"
                    );
                    assert!(eq(sr.mul(sr.add(y, w), x), sr.add(sr.mul(y, x), sr.mul(w, x))));
                }
            }
        }
    }

    #[test]
    fn plus_times_axioms() {
        let samples = [0.0, 1.0, -1.0, 0.5, 2.0, -3.25, 17.0, 1e3, -2e-3];
        check_axioms(PlusTimes, &samples, approx);
    }

    #[test]
    fn plus_times_i64_axioms() {
        let samples = [0i64, 1, -1, 2, -3, 7, 100];
        check_axioms(PlusTimesI64, &samples, |x, y| x == y);
    }

    #[test]
    fn bool_axioms() {
        check_axioms(BoolOrAnd, &[false, true], |x, y| x == y);
    }

    #[test]
    fn min_plus_axioms() {
        let samples = [f64::INFINITY, 0.0, 1.0, 2.5, 10.0, 0.125, 7.75];
        check_axioms(MinPlus, &samples, approx);
    }
}
