//! Laplacian spectra of flat model spaces and user-supplied lists.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use super::TorsionError;

/// Normalization of the Laplacian on a flat torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TorusLaplacian {
    /// `−∂_z ∂_z̄`, eigenvalues `π²|γ*|²`.
    #[default]
    Dolbeault,
    /// `dd* + d*d` on functions, eigenvalues `4π²|γ*|²`.
    DeRham,
}

impl TorusLaplacian {
    pub fn factor(self) -> f64 {
        match self {
            TorusLaplacian::Dolbeault => PI * PI,
            TorusLaplacian::DeRham => 4.0 * PI * PI,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumKind {
    /// Functions on `ℝ/Lℤ`: `(2πn/L)²`, `n ∈ ℤ`.
    Circle { length: f64 },
    /// Functions on `ℝ²/Λ` with `gram` the Gram matrix of a basis of `Λ`.
    FlatTorus {
        gram: [[f64; 2]; 2],
        #[serde(default)]
        laplacian: TorusLaplacian,
    },
    /// Functions on the periodic `a × b` rectangle.
    Rectangle { a: f64, b: f64 },
    /// `λ + μ` over pairs, multiplicities multiplied.
    Product {
        left: Box<SpectrumModel>,
        right: Box<SpectrumModel>,
    },
    /// Every eigenvalue repeated `count` times.
    Copies {
        base: Box<SpectrumModel>,
        count: u64,
    },
    /// `(eigenvalue, multiplicity)` pairs; zero entries are harmonic.
    Explicit { eigenvalues: Vec<(f64, u64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumModel {
    #[serde(flatten)]
    pub kind: SpectrumKind,
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

/// Eigenvalues `kᵀ M k`, `k ∈ ℤ^r`, each repeated `copies` times.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpectrum {
    pub form: Vec<Vec<f64>>,
    pub copies: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Resolved {
    Lattice(LatticeSpectrum),
    Finite(Vec<(f64, u64)>),
    /// Enumerable but without a continuation.
    Other,
}

impl SpectrumModel {
    fn new(kind: SpectrumKind) -> Self {
        SpectrumModel { kind, scale: 1.0 }
    }

    pub fn circle(length: f64) -> Self {
        Self::new(SpectrumKind::Circle { length })
    }

    /// Torus `ℂ/(ω ℤ + ω τ ℤ)` of the given area.
    pub fn flat_torus_tau(tau: C, area: f64, laplacian: TorusLaplacian) -> Self {
        let w2 = area / tau.im;
        let gram = [[w2, w2 * tau.re], [w2 * tau.re, w2 * tau.norm_sqr()]];
        Self::new(SpectrumKind::FlatTorus { gram, laplacian })
    }

    pub fn flat_torus(gram: [[f64; 2]; 2], laplacian: TorusLaplacian) -> Self {
        Self::new(SpectrumKind::FlatTorus { gram, laplacian })
    }

    pub fn rectangle(a: f64, b: f64) -> Self {
        Self::new(SpectrumKind::Rectangle { a, b })
    }

    pub fn product(left: SpectrumModel, right: SpectrumModel) -> Self {
        Self::new(SpectrumKind::Product {
            left: Box::new(left),
            right: Box::new(right),
        })
    }

    pub fn copies(base: SpectrumModel, count: u64) -> Self {
        Self::new(SpectrumKind::Copies {
            base: Box::new(base),
            count,
        })
    }

    pub fn explicit(eigenvalues: Vec<(f64, u64)>) -> Self {
        Self::new(SpectrumKind::Explicit { eigenvalues })
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self
    }

    pub fn validate(&self) -> Result<(), TorsionError> {
        let bad = |m: &str| Err(TorsionError::InvalidArgument(m.to_string()));
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return bad("scale must be a positive real");
        }
        match &self.kind {
            SpectrumKind::Circle { length } if !(length.is_finite() && *length > 0.0) => {
                bad("circle length must be positive")
            }
            SpectrumKind::Rectangle { a, b }
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) =>
            {
                bad("rectangle sides must be positive")
            }
            SpectrumKind::FlatTorus { gram, .. } => {
                let ok = gram.iter().flatten().all(|v| v.is_finite())
                    && (gram[0][1] - gram[1][0]).abs()
                        <= 1e-12 * gram[0][0].abs().max(gram[1][1].abs())
                    && gram[0][0] > 0.0
                    && gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0] > 0.0;
                if ok {
                    Ok(())
                } else {
                    bad("torus Gram matrix must be symmetric positive definite")
                }
            }
            SpectrumKind::Product { left, right } => {
                left.validate()?;
                right.validate()
            }
            SpectrumKind::Copies { base, count } => {
                if *count == 0 {
                    return bad("copy count must be at least 1");
                }
                base.validate()
            }
            SpectrumKind::Explicit { eigenvalues } => {
                if eigenvalues
                    .iter()
                    .any(|(l, m)| !(l.is_finite() && *l >= 0.0) || *m == 0)
                {
                    bad("explicit eigenvalues must be finite and nonnegative with multiplicity ≥ 1")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// The spectrum as a lattice form or a finite list, scale applied.
    pub fn resolve(&self) -> Resolved {
        let c = self.scale;
        let scaled = |m: Vec<Vec<f64>>| {
            m.into_iter()
                .map(|r| r.into_iter().map(|v| v * c).collect())
                .collect()
        };
        match &self.kind {
            SpectrumKind::Circle { length } => Resolved::Lattice(LatticeSpectrum {
                form: scaled(vec![vec![4.0 * PI * PI / (length * length)]]),
                copies: 1,
            }),
            SpectrumKind::Rectangle { a, b } => Resolved::Lattice(LatticeSpectrum {
                form: scaled(vec![
                    vec![4.0 * PI * PI / (a * a), 0.0],
                    vec![0.0, 4.0 * PI * PI / (b * b)],
                ]),
                copies: 1,
            }),
            SpectrumKind::FlatTorus { gram, laplacian } => {
                let det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0];
                let f = laplacian.factor() / det;
                let inv = vec![
                    vec![gram[1][1] * f, -gram[0][1] * f],
                    vec![-gram[1][0] * f, gram[0][0] * f],
                ];
                Resolved::Lattice(LatticeSpectrum {
                    form: scaled(inv),
                    copies: 1,
                })
            }
            SpectrumKind::Copies { base, count } => match base.resolve() {
                Resolved::Lattice(l) => Resolved::Lattice(LatticeSpectrum {
                    form: scaled(l.form),
                    copies: l.copies * count,
                }),
                Resolved::Finite(v) => {
                    Resolved::Finite(v.into_iter().map(|(l, m)| (l * c, m * count)).collect())
                }
                Resolved::Other => Resolved::Other,
            },
            SpectrumKind::Explicit { eigenvalues } => {
                Resolved::Finite(eigenvalues.iter().map(|(l, m)| (l * c, *m)).collect())
            }
            SpectrumKind::Product { left, right } => match (left.resolve(), right.resolve()) {
                (Resolved::Lattice(a), Resolved::Lattice(b)) => {
                    let (ra, rb) = (a.form.len(), b.form.len());
                    let mut form = vec![vec![0.0; ra + rb]; ra + rb];
                    for i in 0..ra {
                        for j in 0..ra {
                            form[i][j] = a.form[i][j] * c;
                        }
                    }
                    for i in 0..rb {
                        for j in 0..rb {
                            form[ra + i][ra + j] = b.form[i][j] * c;
                        }
                    }
                    Resolved::Lattice(LatticeSpectrum {
                        form,
                        copies: a.copies * b.copies,
                    })
                }
                (Resolved::Finite(a), Resolved::Finite(b)) => {
                    let mut out = Vec::with_capacity(a.len() * b.len());
                    for (la, ma) in &a {
                        for (lb, mb) in &b {
                            out.push(((la + lb) * c, ma * mb));
                        }
                    }
                    Resolved::Finite(out)
                }
                _ => Resolved::Other,
            },
        }
    }

    /// Dimension of the kernel.
    pub fn harmonic_dim(&self) -> u64 {
        match &self.kind {
            SpectrumKind::Circle { .. }
            | SpectrumKind::FlatTorus { .. }
            | SpectrumKind::Rectangle { .. } => 1,
            SpectrumKind::Copies { base, count } => base.harmonic_dim() * count,
            SpectrumKind::Product { left, right } => left.harmonic_dim() * right.harmonic_dim(),
            SpectrumKind::Explicit { eigenvalues } => eigenvalues
                .iter()
                .filter(|(l, _)| *l == 0.0)
                .map(|(_, m)| m)
                .sum(),
        }
    }

    /// Nonzero eigenvalues `≤ cutoff` with multiplicities, increasing.
    pub fn eigenvalues_up_to(&self, cutoff: f64) -> Vec<(f64, u64)> {
        let all = self.all_up_to(cutoff);
        all.into_iter().filter(|(l, _)| *l > 0.0).collect()
    }

    fn all_up_to(&self, cutoff: f64) -> Vec<(f64, u64)> {
        let raw = match &self.kind {
            SpectrumKind::Product { left, right } => {
                let c = self.scale;
                let a = left.all_up_to(cutoff / c);
                let b = right.all_up_to(cutoff / c);
                let mut out = Vec::new();
                for (la, ma) in &a {
                    for (lb, mb) in &b {
                        let v = (la + lb) * c;
                        if v <= cutoff {
                            out.push((v, ma * mb));
                        }
                    }
                }
                out
            }
            SpectrumKind::Copies { base, count } => {
                let c = self.scale;
                base.all_up_to(cutoff / c)
                    .into_iter()
                    .map(|(l, m)| (l * c, m * count))
                    .collect()
            }
            _ => match self.resolve() {
                Resolved::Lattice(l) => {
                    let mut out = lattice_points_up_to(&l.form, cutoff);
                    out.push((0.0, 1));
                    out.into_iter().map(|(v, m)| (v, m * l.copies)).collect()
                }
                Resolved::Finite(v) => v.into_iter().filter(|(l, _)| *l <= cutoff).collect(),
                Resolved::Other => Vec::new(),
            },
        };
        group(raw)
    }
}

fn group(mut v: Vec<(f64, u64)>) -> Vec<(f64, u64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, u64)> = Vec::new();
    for (l, m) in v {
        match out.last_mut() {
            Some(last) if (last.0 - l).abs() <= 1e-12 * l.abs().max(1.0) => last.1 += m,
            _ => out.push((l, m)),
        }
    }
    out
}

pub fn quadratic_form(form: &[Vec<f64>], k: &[i64]) -> f64 {
    let mut acc = 0.0;
    for (i, row) in form.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            acc += v * (k[i] * k[j]) as f64;
        }
    }
    acc
}

/// Extreme eigenvalues of a symmetric form.
pub fn form_eigen_range(form: &[Vec<f64>]) -> (f64, f64) {
    let r = form.len();
    let m = DMatrix::from_fn(r, r, |i, j| form[i][j]);
    let ev = m.symmetric_eigen().eigenvalues;
    (ev.min(), ev.max())
}

pub fn form_det(form: &[Vec<f64>]) -> f64 {
    let r = form.len();
    DMatrix::from_fn(r, r, |i, j| form[i][j]).determinant()
}

pub fn form_inverse(form: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, TorsionError> {
    let r = form.len();
    let inv = DMatrix::from_fn(r, r, |i, j| form[i][j])
        .try_inverse()
        .ok_or_else(|| TorsionError::Numeric("singular lattice form".into()))?;
    Ok((0..r)
        .map(|i| (0..r).map(|j| 0.5 * (inv[(i, j)] + inv[(j, i)])).collect())
        .collect())
}

/// Calls `f` on every nonzero `k ∈ ℤ^r` with `max |k_i| ≤ radius`, in a fixed order.
pub fn for_each_box_point(r: usize, radius: i64, mut f: impl FnMut(&[i64])) {
    let mut k = vec![-radius; r];
    loop {
        if k.iter().any(|&v| v != 0) {
            f(&k);
        }
        let mut i = 0;
        loop {
            if i == r {
                return;
            }
            if k[i] < radius {
                k[i] += 1;
                break;
            }
            k[i] = -radius;
            i += 1;
        }
    }
}

fn lattice_points_up_to(form: &[Vec<f64>], cutoff: f64) -> Vec<(f64, u64)> {
    let (mu, _) = form_eigen_range(form);
    let radius = (cutoff / mu).sqrt().floor() as i64;
    let mut out = Vec::new();
    for_each_box_point(form.len(), radius, |k| {
        let q = quadratic_form(form, k);
        if q <= cutoff {
            out.push((q, 1));
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_counts() {
        let l = 3.7;
        let s = SpectrumModel::circle(l);
        for cutoff in [0.5, 10.0, 123.4] {
            let n: u64 = s.eigenvalues_up_to(cutoff).iter().map(|(_, m)| m).sum();
            let want = 2 * (l * f64::sqrt(cutoff) / (2.0 * PI)).floor() as u64;
            assert_eq!(n, want);
        }
        let e = s.eigenvalues_up_to(50.0);
        assert!(e.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(e.iter().all(|(_, m)| *m == 2));
    }

    #[test]
    fn torus_tau_i_is_square() {
        let s = SpectrumModel::flat_torus_tau(C::new(0.0, 1.0), 1.0, TorusLaplacian::DeRham);
        let first = s.eigenvalues_up_to(4.0 * PI * PI * 2.0 + 1e-9);
        // |k|² ∈ {1, 2} with multiplicities 4 and 4
        assert_eq!(first.len(), 2);
        assert_eq!(first[0].1, 4);
        assert!((first[0].0 - 4.0 * PI * PI).abs() < 1e-9);
        assert_eq!(s.harmonic_dim(), 1);
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(SpectrumModel::circle(-1.0).validate().is_err());
        assert!(SpectrumModel::explicit(vec![(1.0, 0)]).validate().is_err());
        assert!(
            SpectrumModel::flat_torus([[1.0, 2.0], [2.0, 1.0]], TorusLaplacian::DeRham)
                .validate()
                .is_err()
        );
        assert!(SpectrumModel::circle(1.0).scaled(0.0).validate().is_err());
    }

    #[test]
    fn product_resolves_to_block_form() {
        let p = SpectrumModel::product(SpectrumModel::circle(1.0), SpectrumModel::circle(2.0));
        let Resolved::Lattice(l) = p.resolve() else {
            panic!()
        };
        assert_eq!(l.form.len(), 2);
        assert_eq!(p.harmonic_dim(), 1);
    }
}
