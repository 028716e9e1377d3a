//! Exact univariate polynomials over the rationals and Sturm sequences.

use num_traits::{One, Signed, Zero};

use super::field::{int, sign};
use crate::Rational;

/// Dense coefficient vector, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new(
            (0..n)
                .map(|i| {
                    let a = self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                    let b = other.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                    a - b
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut c = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        UniPoly::new(c)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        UniPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Euclidean division `self = q·d + r`; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.leading();
        let mut r = self.coeffs.clone();
        let mut q = vec![Rational::zero(); self.coeffs.len().saturating_sub(dd).max(1)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let f = r.last().unwrap() / &lead;
            for (i, c) in d.coeffs.iter().enumerate() {
                r[k + i] -= &f * c;
            }
            q[k] = f;
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        (UniPoly::new(q), UniPoly::new(r))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().recip())
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// The canonical Sturm sequence `p, p', -rem(p, p'), ...`.
    pub fn sturm_sequence(&self) -> Vec<UniPoly> {
        let mut seq = vec![self.clone()];
        if self.is_zero() {
            return seq;
        }
        let d = self.derivative();
        if d.is_zero() {
            return seq;
        }
        seq.push(d);
        loop {
            let n = seq.len();
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.scale(&-Rational::one()));
        }
        seq
    }

    /// Number of distinct real roots, by sign changes of the Sturm sequence at ±∞.
    pub fn count_distinct_real_roots(&self) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let seq = self.sturm_sequence();
        let at_neg: Vec<i32> = seq
            .iter()
            .map(|p| {
                let s = sign(&p.leading());
                if p.degree().unwrap_or(0) % 2 == 1 {
                    -s
                } else {
                    s
                }
            })
            .collect();
        let at_pos: Vec<i32> = seq.iter().map(|p| sign(&p.leading())).collect();
        sign_changes(&at_neg) - sign_changes(&at_pos)
    }

    /// Distinct real roots in the half-open interval `(a, b]`.
    pub fn count_roots_in(&self, a: &Rational, b: &Rational) -> usize {
        let seq = self.sturm_sequence();
        let va: Vec<i32> = seq.iter().map(|p| sign(&p.eval(a))).collect();
        let vb: Vec<i32> = seq.iter().map(|p| sign(&p.eval(b))).collect();
        sign_changes(&va).saturating_sub(sign_changes(&vb))
    }

    /// Real roots counted with multiplicity, via repeated square-free splitting.
    pub fn count_real_roots_with_multiplicity(&self) -> usize {
        let mut total = 0;
        let mut p = self.clone();
        while p.degree().unwrap_or(0) > 0 {
            total += p.count_distinct_real_roots();
            p = p.gcd(&p.derivative());
        }
        total
    }

    /// Square-free part `p / gcd(p, p')`.
    pub fn square_free(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0
    }

    /// Cauchy bound: every real root lies in `[-B, B]`.
    pub fn root_bound(&self) -> Rational {
        let lead = self.leading().abs();
        let m = self
            .coeffs
            .iter()
            .rev()
            .skip(1)
            .map(|c| c.abs() / &lead)
            .fold(Rational::zero(), |a, b| if b > a { b } else { a });
        m + Rational::one()
    }

    /// Disjoint rational intervals `(a, b]`, each holding exactly one distinct real root.
    pub fn isolate_real_roots(&self) -> Vec<(Rational, Rational)> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let sf = self.square_free();
        let b = sf.root_bound();
        let mut out = Vec::new();
        let mut stack = vec![(-b.clone(), b)];
        while let Some((lo, hi)) = stack.pop() {
            let n = sf.count_roots_in(&lo, &hi);
            if n == 0 {
                continue;
            }
            if n == 1 {
                out.push((lo, hi));
                continue;
            }
            let mid = (&lo + &hi) / int(2);
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
        out.sort();
        out
    }
}

fn sign_changes(signs: &[i32]) -> usize {
    let nz: Vec<i32> = signs.iter().copied().filter(|&s| s != 0).collect();
    nz.windows(2).filter(|w| w[0] != w[1]).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> UniPoly {
        UniPoly::new(c.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn counts_real_roots() {
        // t^2 - 1
        assert_eq!(p(&[-1, 0, 1]).count_distinct_real_roots(), 2);
        // t^2 + 1
        assert_eq!(p(&[1, 0, 1]).count_distinct_real_roots(), 0);
        // t^3 - t
        assert_eq!(p(&[0, -1, 0, 1]).count_distinct_real_roots(), 3);
    }

    #[test]
    fn multiplicity_counts() {
        // (t-1)^2 (t^2+1)
        let q = p(&[-1, 1]).mul(&p(&[-1, 1])).mul(&p(&[1, 0, 1]));
        assert_eq!(q.count_distinct_real_roots(), 1);
        assert_eq!(q.count_real_roots_with_multiplicity(), 2);
        assert_eq!(p(&[0, 0, 1]).count_real_roots_with_multiplicity(), 2);
    }

    #[test]
    fn isolation_separates_roots() {
        let q = p(&[-2, 0, 1]); // ±sqrt 2
        let iv = q.isolate_real_roots();
        assert_eq!(iv.len(), 2);
        for (a, b) in iv {
            assert!(a < b);
            assert_eq!(q.count_roots_in(&a, &b), 1);
        }
    }

    #[test]
    fn gcd_and_division() {
        let a = p(&[-1, 0, 1]);
        let b = p(&[1, 1]);
        assert_eq!(a.gcd(&b), p(&[1, 1]));
        let (q, r) = a.div_rem(&b);
        assert!(r.is_zero());
        assert_eq!(q, p(&[-1, 1]));
    }
}
