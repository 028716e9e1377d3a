//! Complex gamma, incomplete gamma, Riemann zeta and Dedekind eta.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C;
use num_traits::ToPrimitive;

use crate::index::series::bernoulli;

use super::TorsionError;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// A value together with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounded {
    pub value: C,
    pub bound: f64,
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Truncation error of the Lanczos series, relative.
const LANCZOS_TRUNCATION: f64 = 2e-15;

/// Relative error bound for [`gamma`] and [`rgamma`] at `z`.
pub fn gamma_rel_error(z: C) -> f64 {
    let eps = f64::EPSILON;
    if z.re < 0.5 {
        let w = PI * z;
        let cot = (w.cos() / w.sin()).norm();
        return gamma_rel_error(1.0 - z) + eps * (6.0 + 2.0 * w.norm() * cot);
    }
    let z = z - 1.0;
    let mut x = C::new(LANCZOS[0], 0.0);
    let mut mag = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        let term = c / (z + i as f64);
        x += term;
        mag += term.norm();
    }
    let t = z + LANCZOS_G + 0.5;
    LANCZOS_TRUNCATION * (1.0 + z.im.abs())
        + eps * (6.0 * mag / x.norm() + 4.0 * ((z + 0.5) * t.ln()).norm() + 4.0 * t.norm() + 10.0)
}

pub fn gamma(z: C) -> C {
    if z.re < 0.5 {
        PI / ((PI * z).sin() * gamma(1.0 - z))
    } else {
        let z = z - 1.0;
        let mut x = C::new(LANCZOS[0], 0.0);
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            x += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
    }
}

/// `1/Γ(z)`, entire.
pub fn rgamma(z: C) -> C {
    if z.re < 0.5 {
        (PI * z).sin() * gamma(1.0 - z) / PI
    } else {
        1.0 / gamma(z)
    }
}

/// Bernoulli numbers `B_0..B_63` as floats.
pub fn bernoulli_f64() -> &'static [f64] {
    static B: OnceLock<Vec<f64>> = OnceLock::new();
    B.get_or_init(|| {
        bernoulli(64)
            .iter()
            .map(|b| b.to_f64().unwrap_or(f64::NAN))
            .collect()
    })
}

fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `E_1(x) = Γ(0, x)` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    if x >= 1.0 {
        return upper_gamma_cf(C::new(0.0, 0.0), x).re;
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < 1e-18 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Upper incomplete gamma `Γ(a, x)` for complex `a` and `x > 0`.
pub fn upper_gamma(a: C, x: f64) -> C {
    if x >= 1.0 + a.re.max(0.0) {
        upper_gamma_cf(a, x)
    } else if a.norm() < 1e-13 {
        C::new(exp_integral_e1(x), 0.0)
    } else if a.re < 0.5 {
        // Γ(a, x) = (Γ(a+1, x) − x^a e^{−x}) / a
        (upper_gamma(a + 1.0, x) - (a * x.ln() - x).exp()) / a
    } else {
        gamma(a) - lower_gamma_series(a, x)
    }
}

fn upper_gamma_cf(a: C, x: f64) -> C {
    const TINY: f64 = 1e-300;
    let mut b = C::new(x + 1.0, 0.0) - a;
    let mut c = C::new(1.0 / TINY, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..20_000 {
        let fi = i as f64;
        let an = -fi * (C::new(fi, 0.0) - a);
        b += 2.0;
        d = an * d + b;
        if d.norm() < TINY {
            d = C::new(TINY, 0.0);
        }
        c = b + an / c;
        if c.norm() < TINY {
            c = C::new(TINY, 0.0);
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (a * x.ln() - x).exp() * h
}

fn lower_gamma_series(a: C, x: f64) -> C {
    let mut term = 1.0 / a;
    let mut sum = term;
    for n in 1..20_000 {
        term *= x / (a + n as f64);
        sum += term;
        if term.norm() < sum.norm() * 1e-17 {
            break;
        }
    }
    sum * (a * x.ln() - x).exp()
}

const EM_TERMS: usize = 12;

fn em_cutoff(s: C) -> usize {
    16 + s.norm().ceil() as usize
}

/// `|R_p|` of the Euler–Maclaurin tail with `p` correction terms at cutoff `n`,
/// evaluated with the radius `r` of a disk around `s` folded in.
fn em_remainder_bound(s: C, n: usize, r: f64) -> f64 {
    let b = bernoulli_f64();
    let p = EM_TERMS;
    let sigma = s.re - r;
    let denom = sigma + (2 * p + 1) as f64;
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    let mut poch = 1.0;
    for j in 0..=2 * p {
        poch *= (s + j as f64).norm() + r;
    }
    poch * b[2 * p + 2].abs() / (factorial_f64(2 * p + 2) * denom)
        * (n as f64).powf(-sigma - (2 * p + 1) as f64)
}

/// `ζ(s)` by Euler–Maclaurin summation with a remainder bound.
pub fn riemann_zeta(s: C) -> Result<Bounded, TorsionError> {
    if (s - 1.0).norm() < 1e-12 {
        return Err(TorsionError::Pole {
            s: s.re,
            residue: 1.0,
        });
    }
    if s.re < 0.0 {
        // ζ(s) = 2^s π^{s−1} sin(πs/2) Γ(1−s) ζ(1−s)
        let mirror = riemann_zeta(1.0 - s)?;
        let chi = (s * (2.0 * PI).ln()).exp() / PI * (0.5 * PI * s).sin() * gamma(1.0 - s);
        let value = chi * mirror.value;
        let rel = gamma_rel_error(1.0 - s) + f64::EPSILON * (16.0 + 8.0 * s.norm());
        return Ok(Bounded {
            value,
            bound: chi.norm() * mirror.bound + rel * value.norm(),
        });
    }
    let n = em_cutoff(s);
    let b = bernoulli_f64();
    let mut sum = C::new(0.0, 0.0);
    let mut rounding = 0.0;
    for k in 1..n {
        let l = (k as f64).ln();
        let t = (-s * l).exp();
        sum += t;
        rounding += t.norm() * (n as f64 + 4.0 + 2.0 * s.norm() * l);
    }
    let nf = n as f64;
    let n_s = (-s * nf.ln()).exp();
    let head = nf * n_s / (s - 1.0) + 0.5 * n_s;
    sum += head;
    rounding += head.norm() * (n as f64 + 8.0 + 2.0 * s.norm() * nf.ln());
    // B_{2k}/(2k)! · s(s+1)…(s+2k−2) · N^{−s−2k+1}
    let mut poch = s;
    let mut npow = n_s / nf;
    let mut fact = 2.0;
    for k in 1..=EM_TERMS {
        sum += b[2 * k] / fact * poch * npow;
        poch *= (s + (2 * k - 1) as f64) * (s + (2 * k) as f64);
        npow /= nf * nf;
        fact *= ((2 * k + 1) * (2 * k + 2)) as f64;
    }
    let bound = em_remainder_bound(s, n, 0.0)
        + f64::EPSILON * (rounding + (EM_TERMS as f64 + 4.0) * sum.norm());
    Ok(Bounded { value: sum, bound })
}

/// `ζ′(s)` from the term-wise derivative of the Euler–Maclaurin expansion.
pub fn riemann_zeta_derivative(s: C) -> Result<Bounded, TorsionError> {
    if (s - 1.0).norm() < 1e-12 {
        return Err(TorsionError::Pole {
            s: s.re,
            residue: 1.0,
        });
    }
    let n = em_cutoff(s) + 1;
    let b = bernoulli_f64();
    let nf = n as f64;
    let ln_n = nf.ln();
    let mut sum = C::new(0.0, 0.0);
    let mut rounding = 0.0;
    for k in 2..n {
        let l = (k as f64).ln();
        let t = l * (-s * l).exp();
        sum -= t;
        rounding += t.norm() * (nf + 5.0 + 2.0 * s.norm() * l);
    }
    let n_s = (-s * ln_n).exp();
    let sm1 = s - 1.0;
    let head = -ln_n * nf * n_s / sm1 - nf * n_s / (sm1 * sm1) - 0.5 * ln_n * n_s;
    sum += head;
    rounding += (ln_n * nf * n_s / sm1).norm() * (nf + 10.0 + 2.0 * s.norm() * ln_n)
        + (nf * n_s / (sm1 * sm1)).norm() * (nf + 12.0 + 2.0 * s.norm() * ln_n);
    let mut fact = 2.0;
    for k in 1..=EM_TERMS {
        // P(s) = Π_{j=0}^{2k−2} (s + j)
        let factors: Vec<C> = (0..=2 * k - 2).map(|j| s + j as f64).collect();
        let p: C = factors.iter().product();
        let mut dp = C::new(0.0, 0.0);
        for skip in 0..factors.len() {
            dp += factors
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != skip)
                .map(|(_, f)| *f)
                .product::<C>();
        }
        let npow = (-(s + (2 * k - 1) as f64) * ln_n).exp();
        sum += b[2 * k] / fact * (dp - ln_n * p) * npow;
        fact *= ((2 * k + 1) * (2 * k + 2)) as f64;
    }
    let r = 0.25;
    let bound = em_remainder_bound(s, n, r) / r
        + f64::EPSILON * (rounding + (EM_TERMS as f64 + 4.0) * sum.norm());
    Ok(Bounded { value: sum, bound })
}

/// `ln |η(τ)|` for `Im τ > 0`, with a bound on the truncated product.
pub fn ln_abs_dedekind_eta(tau: C) -> (f64, f64) {
    let q = (2.0 * PI * C::i() * tau).exp();
    let qa = q.norm();
    let mut acc = -PI * tau.im / 12.0;
    let mut qn = q;
    let mut n = 1;
    while qn.norm() > 1e-18 && n < 100_000 {
        acc += (1.0 - qn).norm().ln();
        qn *= q;
        n += 1;
    }
    let bound = 2.0 * qn.norm() / (1.0 - qa) + 1e-16 * acc.abs();
    (acc, bound)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(c(5.0)).re - 24.0).abs() < 1e-12);
        assert!((gamma(c(0.5)).re - PI.sqrt()).abs() < 1e-13);
        assert!((gamma(c(-0.5)).re + 2.0 * PI.sqrt()).abs() < 1e-12);
        assert!(rgamma(c(0.0)).norm() < 1e-15);
        assert!((rgamma(c(-2.0))).norm() < 1e-14);
    }

    #[test]
    fn gamma_error_bound_covers_reference_values() {
        let reference = [
            (
                C::new(0.6, 5.0),
                C::new(-0.001_140_014_520_415_792_7, -0.000_079_961_697_585_801_742),
            ),
            (
                C::new(-1.3, 9.0),
                C::new(2.777_875_973_085_078_6e-9, 3.432_253_287_047_892_2e-8),
            ),
            (
                C::new(0.45, 20.0),
                C::new(-2.637_336_233_470_538e-14, 4.130_789_472_473_678e-14),
            ),
            (C::new(7.3, 0.0), C::new(1_271.423_633_663_908_8, 0.0)),
            (
                C::new(-2.05, 0.5),
                C::new(0.203_650_601_366_861_7, -0.650_907_910_055_716_2),
            ),
        ];
        for (z, want) in reference {
            let rel = gamma_rel_error(z);
            assert!(rel < 1e-12);
            assert!((gamma(z) - want).norm() <= rel * want.norm(), "Γ({z})");
            assert!((rgamma(z) * want - 1.0).norm() <= rel, "1/Γ({z})");
        }
    }

    #[test]
    fn incomplete_gamma_identities() {
        // Γ(1, x) = e^{−x}; Γ(1/2, x) = √π erfc(√x)
        for x in [0.3, 1.0, 2.5, 7.0] {
            assert!((upper_gamma(c(1.0), x).re - (-x as f64).exp()).abs() < 1e-14);
        }
        let v = upper_gamma(c(0.5), 0.2).re;
        let want = PI.sqrt() * 0.527_089_256_865_538_1;
        assert!((v - want).abs() < 1e-12, "{v} vs {want}");
        // E_1(1) = 0.219383934395520…
        assert!((exp_integral_e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-14);
        assert!((exp_integral_e1(0.5) - 0.559_773_594_776_160_8).abs() < 1e-14);
        // recurrence branch at a negative argument: Γ(−1/2, x) = 2(x^{−1/2}e^{−x} − Γ(1/2, x))
        let x = 0.4;
        let lhs = upper_gamma(c(-0.5), x).re;
        let rhs = 2.0 * (x.powf(-0.5) * (-x).exp() - upper_gamma(c(0.5), x).re);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn zeta_special_values() {
        let z0 = riemann_zeta(c(0.0)).unwrap();
        assert!((z0.value.re + 0.5).abs() < 1e-14 && z0.bound < 1e-12);
        let z2 = riemann_zeta(c(2.0)).unwrap();
        assert!((z2.value.re - PI * PI / 6.0).abs() < 1e-13);
        let zm1 = riemann_zeta(c(-1.0)).unwrap();
        assert!((zm1.value.re + 1.0 / 12.0).abs() < 1e-13);
        let d0 = riemann_zeta_derivative(c(0.0)).unwrap();
        assert!(
            (d0.value.re + 0.5 * (2.0 * PI).ln()).abs() < 1e-13,
            "{}",
            d0.value
        );
        assert!(matches!(
            riemann_zeta(c(1.0)),
            Err(TorsionError::Pole { .. })
        ));
        // first nontrivial zero
        let z = riemann_zeta(C::new(0.5, 14.134_725_141_734_693)).unwrap();
        assert!(z.value.norm() < 1e-9);
    }

    #[test]
    fn eta_at_i() {
        // |η(i)| = Γ(1/4) / (2 π^{3/4})
        let (l, b) = ln_abs_dedekind_eta(C::new(0.0, 1.0));
        let want = (3.625_609_908_221_908_3 / (2.0 * PI.powf(0.75))).ln();
        assert!((l - want).abs() < 1e-14 && b < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(20);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((s - 2.0 / 39.0).abs() < 1e-14);
    }
}
