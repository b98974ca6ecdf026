//! Rational interval enclosures of natural logarithms, for certifying
//! inequalities between powers too large to expand.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::scalar::{rational_to_f64, Rational};

/// Closed interval [lo, hi] with rational endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn point(x: Rational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn neg(&self) -> Self {
        Self { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Multiplication by a nonnegative exact scalar.
    pub fn scale(&self, k: &Rational) -> Self {
        debug_assert!(!k.is_negative());
        Self { lo: &self.lo * k, hi: &self.hi * k }
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.lo.is_negative()
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (rational_to_f64(&self.lo) + rational_to_f64(&self.hi))
    }

    /// Rounds outward to multiples of 2^-bits to keep endpoints small.
    pub fn rounded(&self, bits: u64) -> Self {
        let scale = Rational::from_integer(BigInt::one() << bits);
        let lo = (&self.lo * &scale).floor() / &scale;
        let hi = (&self.hi * &scale).ceil() / &scale;
        Self { lo, hi }
    }

    pub fn summary(&self) -> IntervalSummary {
        IntervalSummary { lo: rational_to_f64(&self.lo), hi: rational_to_f64(&self.hi) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntervalSummary {
    pub lo: f64,
    pub hi: f64,
}

/// Working precision for log enclosures, in bits.
pub const LOG_BITS: u64 = 256;

/// 2·atanh(y) for 0 ≤ y ≤ 1/3, enclosed using the alternating-free series
/// and the geometric tail bound y^{2J+1} / ((2J+1)(1 − y²)).
fn two_atanh(y: &Rational) -> Interval {
    if y.is_zero() {
        return Interval::point(Rational::zero());
    }
    let y2 = y * y;
    let mut term = y.clone();
    let mut sum = Rational::zero();
    let eps = Rational::new(BigInt::one(), BigInt::one() << (LOG_BITS + 8));
    let mut j = 0u64;
    loop {
        sum += &term / Rational::from_integer(BigInt::from(2 * j + 1));
        term *= &y2;
        j += 1;
        let tail = &term / (Rational::from_integer(BigInt::from(2 * j + 1)) * (Rational::one() - &y2));
        if tail < eps {
            let two = Rational::from_integer(BigInt::from(2));
            return Interval { lo: &sum * &two, hi: (sum + tail) * two }.rounded(LOG_BITS);
        }
        // keep the running power short
        term = round_down(&term, LOG_BITS + 64);
    }
}

fn round_down(x: &Rational, bits: u64) -> Rational {
    let scale = Rational::from_integer(BigInt::one() << bits);
    (x * &scale).floor() / scale
}

/// Enclosure of ln 2.
pub fn ln2() -> Interval {
    two_atanh(&Rational::new(BigInt::one(), BigInt::from(3)))
}

/// Enclosure of ln x for x > 0, to about 2^-250 absolute.
pub fn ln_enclosure(x: &Rational) -> Interval {
    assert!(x.is_positive(), "logarithm of a nonpositive number");
    // x = 2^e · m with 1 ≤ m < 2
    let mut e: i64 = x.numer().bits() as i64 - x.denom().bits() as i64;
    let mut m = shift(x, -e);
    let two = Rational::from_integer(BigInt::from(2));
    while m >= two {
        m /= &two;
        e += 1;
    }
    while m < Rational::one() {
        m *= &two;
        e -= 1;
    }
    let y = (&m - Rational::one()) / (&m + Rational::one());
    let lm = two_atanh(&y);
    let l2 = ln2();
    let scaled = if e >= 0 {
        l2.scale(&Rational::from_integer(BigInt::from(e)))
    } else {
        l2.scale(&Rational::from_integer(BigInt::from(-e))).neg()
    };
    scaled.add(&lm)
}

fn shift(x: &Rational, e: i64) -> Rational {
    if e >= 0 {
        x * Rational::from_integer(BigInt::one() << e as u64)
    } else {
        x / Rational::from_integer(BigInt::one() << (-e) as u64)
    }
}

/// Exact ℓ-th root of a positive rational when it is rational.
pub fn exact_root(x: &Rational, l: u32) -> Option<Rational> {
    if l == 0 || !x.is_positive() {
        return None;
    }
    let root = |z: &BigInt| -> Option<BigInt> {
        let r = num_integer::Roots::nth_root(z, l);
        (num_traits::Pow::pow(&r, l) == *z).then_some(r)
    };
    let (n, d) = (x.numer(), x.denom());
    let g = n.gcd(d);
    debug_assert!(g.is_one());
    Some(Rational::new(root(n)?, root(d)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn ln2_encloses_reference() {
        let l = ln2();
        assert!(l.lo < l.hi);
        assert!(rational_to_f64(&l.lo) <= std::f64::consts::LN_2);
        assert!(rational_to_f64(&l.hi) >= std::f64::consts::LN_2);
        let width = &l.hi - &l.lo;
        assert!(width < Rational::new(BigInt::one(), BigInt::one() << 200));
    }

    #[test]
    fn logs_of_various_magnitudes() {
        for (p, q) in [(3, 1), (1, 3), (262_144, 1), (63, 62), (1, 1_000_000), (1, 1)] {
            let l = ln_enclosure(&rational(p, q));
            let expect = (p as f64 / q as f64).ln();
            assert!((l.midpoint() - expect).abs() <= 1e-14 * expect.abs().max(1.0), "{p}/{q}");
            assert!(l.lo <= l.hi);
        }
        assert_eq!(ln_enclosure(&rational(1, 1)).hi, Rational::zero());
    }

    #[test]
    fn log_identities_hold_within_enclosures() {
        // ln(6) = ln 2 + ln 3
        let six = ln_enclosure(&rational(6, 1));
        let sum = ln_enclosure(&rational(2, 1)).add(&ln_enclosure(&rational(3, 1)));
        assert!(six.lo <= sum.hi && sum.lo <= six.hi);
    }

    #[test]
    fn exact_roots() {
        assert_eq!(exact_root(&rational(27, 8), 3), Some(rational(3, 2)));
        assert_eq!(exact_root(&rational(1, 2), 2), None);
        assert_eq!(exact_root(&rational(5, 7), 1), Some(rational(5, 7)));
    }
}
