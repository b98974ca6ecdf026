//! Univariate polynomials (ascending coefficients) and Sturm sequences for
//! exact real-root counting.

use num_traits::{One, Signed, Zero};

use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    /// `coeffs[k]` multiplies `z^k`; trailing zeros are kept only when the
    /// caller asked for them.
    pub coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Self { coeffs }
    }

    pub fn eval(&self, z: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    /// Degree ignoring negligible coefficients (relative to the largest
    /// coefficient in float mode). `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let scale = self.coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max);
        self.coeffs.iter().rposition(|c| !c.is_negligible(scale))
    }

    pub fn trimmed(&self) -> Self {
        let d = self.degree().map_or(0, |d| d + 1);
        Self { coeffs: self.coeffs[..d].to_vec() }
    }

    pub fn coefficient_sum(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc + c.clone())
    }

    /// Reversal z^d p(1/z) for the given formal degree d.
    pub fn reversed(&self, d: usize) -> Self {
        let mut c = vec![T::zero(); d + 1];
        for (k, a) in self.coeffs.iter().enumerate() {
            if k <= d {
                c[d - k] = a.clone();
            }
        }
        Self { coeffs: c }
    }
}

fn trim_exact(c: &mut Vec<Rational>) {
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
}

/// Remainder of exact polynomial division a mod b (b nonzero).
fn rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut r = a.to_vec();
    trim_exact(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let f = r.last().unwrap().clone() / lead.clone();
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = r[shift + i].clone() - f.clone() * bi.clone();
        }
        r.pop();
        trim_exact(&mut r);
    }
    r
}

fn derivative(a: &[Rational]) -> Vec<Rational> {
    a.iter().enumerate().skip(1).map(|(k, c)| c.clone() * Rational::from_usize(k)).collect()
}

fn monic(mut a: Vec<Rational>) -> Vec<Rational> {
    if let Some(l) = a.last().cloned() {
        let l = Signed::abs(&l);
        for c in a.iter_mut() {
            *c = c.clone() / l.clone();
        }
    }
    a
}

/// Exact division by (z - r) when r is a root; returns the quotient.
fn deflate(a: &[Rational], r: &Rational) -> Vec<Rational> {
    // synthetic division, high to low
    let n = a.len();
    let mut q = vec![Rational::zero(); n - 1];
    let mut carry = Rational::zero();
    for k in (1..n).rev() {
        carry = a[k].clone() + carry * r.clone();
        q[k - 1] = carry.clone();
    }
    q
}

/// Sturm chain for a squarefree-or-not polynomial; counts distinct real roots.
pub struct Sturm {
    chain: Vec<Vec<Rational>>,
}

impl Sturm {
    pub fn new(p: &Poly<Rational>) -> Self {
        let mut p0 = p.coeffs.clone();
        trim_exact(&mut p0);
        let mut chain = vec![p0.clone()];
        if p0.len() > 1 {
            let mut a = p0;
            let mut b = derivative(&a);
            trim_exact(&mut b);
            while !b.is_empty() {
                chain.push(b.clone());
                let r: Vec<Rational> = rem(&a, &b).into_iter().map(|x| -x).collect();
                a = b;
                b = monic(r);
            }
        }
        Self { chain }
    }

    fn sign_changes(values: impl Iterator<Item = Rational>) -> usize {
        let mut last = 0i8;
        let mut changes = 0;
        for v in values {
            let s = if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            };
            if s != 0 {
                if last != 0 && s != last {
                    changes += 1;
                }
                last = s;
            }
        }
        changes
    }

    fn at(&self, x: &Rational) -> usize {
        Self::sign_changes(self.chain.iter().map(|c| Poly::new(c.clone()).eval(x)))
    }

    fn at_pos_infinity(&self) -> usize {
        Self::sign_changes(self.chain.iter().filter(|c| !c.is_empty()).map(|c| c.last().unwrap().clone()))
    }

    /// Distinct real roots in (a, +inf); `a` must not be a root.
    fn above_nonroot(&self, a: &Rational) -> usize {
        self.at(a) - self.at_pos_infinity()
    }

    /// Distinct real roots in (a, b]; neither endpoint a root.
    fn between_nonroots(&self, a: &Rational, b: &Rational) -> usize {
        self.at(a) - self.at(b)
    }
}

/// Number of distinct real roots of `p` strictly greater than `a`.
pub fn count_roots_above(p: &Poly<Rational>, a: &Rational) -> usize {
    let mut c = p.coeffs.clone();
    trim_exact(&mut c);
    if c.len() <= 1 {
        return 0;
    }
    while Poly::new(c.clone()).eval(a).is_zero() {
        c = deflate(&c, a);
        if c.len() <= 1 {
            return 0;
        }
    }
    Sturm::new(&Poly::new(c)).above_nonroot(a)
}

/// True when `a` is a root of `p`.
pub fn is_root(p: &Poly<Rational>, a: &Rational) -> bool {
    p.eval(a).is_zero()
}

/// Encloses the largest real root of `p` in [lo, hi] with hi - lo <= width,
/// given an a-priori upper bound `upper` strictly above every real root and a
/// lower bound `lower` at or below the largest one. Returns `None` when `p`
/// has no real root above `lower`.
pub fn largest_root_enclosure(
    p: &Poly<Rational>,
    lower: &Rational,
    upper: &Rational,
    width: &Rational,
) -> Option<(Rational, Rational)> {
    let mut c = p.coeffs.clone();
    trim_exact(&mut c);
    if c.len() <= 1 {
        return None;
    }
    if Poly::new(c.clone()).eval(upper).is_zero() {
        return Some((upper.clone(), upper.clone()));
    }
    let mut lo = lower.clone();
    let mut hi = upper.clone();
    if Poly::new(c.clone()).eval(&lo).is_zero() {
        if count_roots_above(&Poly::new(c.clone()), &lo) == 0 {
            return Some((lo.clone(), lo));
        }
        // divide out the root at the lower end; roots above it are unchanged
        while Poly::new(c.clone()).eval(&lo).is_zero() {
            c = deflate(&c, &lo);
        }
    }
    let sturm = Sturm::new(&Poly::new(c.clone()));
    let q = Poly::new(c);
    if sturm.between_nonroots(&lo, &hi) == 0 {
        return None;
    }
    let two = Rational::from_usize(2);
    while hi.clone() - lo.clone() > *width {
        let mid = (lo.clone() + hi.clone()) / two.clone();
        if q.eval(&mid).is_zero() {
            // mid is a root; it is the largest iff nothing lies above it.
            if count_roots_above(&q, &mid) == 0 {
                return Some((mid.clone(), mid));
            }
            lo = mid;
            continue;
        }
        if sturm.between_nonroots(&mid, &hi) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo, hi))
}

pub fn one_rational() -> Rational {
    Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn p(c: &[(i64, i64)]) -> Poly<Rational> {
        Poly::new(c.iter().map(|&(a, b)| rational(a, b)).collect())
    }

    #[test]
    fn counts_roots_of_quadratic() {
        // z^2 - 1/4, roots ±1/2
        let q = p(&[(-1, 4), (0, 1), (1, 1)]);
        assert_eq!(count_roots_above(&q, &rational(-1, 1)), 2);
        assert_eq!(count_roots_above(&q, &rational(0, 1)), 1);
        assert_eq!(count_roots_above(&q, &rational(1, 2)), 0);
        assert_eq!(count_roots_above(&q, &rational(-1, 2)), 1);
    }

    #[test]
    fn repeated_roots_counted_once() {
        // (z-1)^2 (z+2) = z^3 - 3z + 2
        let q = p(&[(2, 1), (-3, 1), (0, 1), (1, 1)]);
        assert_eq!(count_roots_above(&q, &rational(-3, 1)), 2);
        assert_eq!(count_roots_above(&q, &rational(1, 1)), 0);
    }

    #[test]
    fn encloses_sqrt_two() {
        let q = p(&[(-2, 1), (0, 1), (1, 1)]);
        let w = rational(1, 1_000_000_000);
        let (lo, hi) = largest_root_enclosure(&q, &rational(0, 1), &rational(2, 1), &w).unwrap();
        assert!(lo.to_f64() <= std::f64::consts::SQRT_2 && hi.to_f64() >= std::f64::consts::SQRT_2 - 1e-12);
        assert!(hi - lo <= w);
    }

    #[test]
    fn exact_root_is_returned_as_point() {
        let q = p(&[(-1, 4), (0, 1), (1, 1)]);
        let (lo, hi) =
            largest_root_enclosure(&q, &rational(0, 1), &rational(1, 1), &rational(1, 1 << 20)).unwrap();
        assert_eq!(lo, rational(1, 2));
        assert_eq!(hi, rational(1, 2));
    }

    #[test]
    fn degree_ignores_trailing_zeros() {
        let q = p(&[(1, 1), (0, 1), (-1, 4), (0, 1)]);
        assert_eq!(q.degree(), Some(2));
        assert_eq!(q.coefficient_sum(), rational(3, 4));
        assert_eq!(Poly::<f64>::new(vec![1.0, 1e-20]).degree(), Some(0));
    }
}
