//! Truncated power series in one variable with exact coefficients.

use num_traits::{One, Zero};

use crate::Rational;

/// Coefficients `a_0..a_{len-1}` of a series truncated after `len` terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Series(pub Vec<Rational>);

impl Series {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.len().min(other.len());
        let mut out = vec![Rational::zero(); n];
        for (i, a) in self.0.iter().enumerate().take(n) {
            for (j, b) in other.0.iter().enumerate().take(n - i) {
                out[i + j] += a * b;
            }
        }
        Series(out)
    }

    /// `log f` for `f(0) = 1`.
    pub fn log(&self) -> Series {
        assert!(self.0[0].is_one(), "log needs constant term 1");
        let n = self.len();
        let mut g = self.clone();
        g.0[0] = Rational::zero();
        let mut out = Series(vec![Rational::zero(); n]);
        let mut power = g.clone();
        for k in 1..n {
            let c = Rational::new(
                if k % 2 == 1 { 1.into() } else { (-1).into() },
                (k as i64).into(),
            );
            for (o, p) in out.0.iter_mut().zip(&power.0) {
                *o += &c * p;
            }
            power = power.mul(&g);
        }
        out
    }
}

pub fn factorial(k: usize) -> Rational {
    (1..=k).fold(Rational::one(), |acc, i| {
        acc * Rational::from_integer((i as i64).into())
    })
}

/// Bernoulli numbers `B_0..B_{n-1}` with `B_1 = −1/2`.
pub fn bernoulli(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n);
    for m in 0..n {
        if m == 0 {
            b.push(Rational::one());
            continue;
        }
        // Σ_{k<m+1} C(m+1, k) B_k = 0
        let mut acc = Rational::zero();
        let mut binom = Rational::one();
        for (k, bk) in b.iter().enumerate() {
            acc += &binom * bk;
            binom = binom * Rational::from_integer(((m + 1 - k) as i64).into())
                / Rational::from_integer(((k + 1) as i64).into());
        }
        b.push(-acc / Rational::from_integer(((m + 1) as i64).into()));
    }
    b
}

/// `e^x`.
pub fn exp_series(len: usize) -> Series {
    Series((0..len).map(|k| factorial(k).recip()).collect())
}

/// `x / (1 − e^{−x}) = Σ (−1)^k B_k x^k / k!`.
pub fn todd_series(len: usize) -> Series {
    Series(
        bernoulli(len)
            .into_iter()
            .enumerate()
            .map(|(k, b)| {
                if k % 2 == 1 {
                    -b / factorial(k)
                } else {
                    b / factorial(k)
                }
            })
            .collect(),
    )
}
