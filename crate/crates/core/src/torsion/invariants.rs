//! Ray–Singer and BCOV torsion, lattice covolumes and Quillen norms.

use std::collections::BTreeSet;

use num_complex::Complex64 as C;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{QMatrix, Rational};

use super::spectrum::{SpectrumModel, TorusLaplacian};
use super::zeta::{zeta_at_zero, ZetaMethod};
use super::TorsionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DegreeLabel {
    Degree {
        k: usize,
    },
    Hodge {
        p: usize,
        q: usize,
    },
    /// Strand `Δ_k^{r−i, i}` of a Spencer complex.
    Strand {
        k: usize,
        r: usize,
        i: usize,
    },
}

impl DegreeLabel {
    /// Form degree carried by the label.
    pub fn form_degree(&self) -> usize {
        match *self {
            DegreeLabel::Degree { k } => k,
            DegreeLabel::Hodge { q, .. } => q,
            DegreeLabel::Strand { i, .. } => i,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TorsionConvention {
    /// `Π det′(Δ_i)^{(−1)^{i+2} i/2}`
    ProductExponents,
    /// `exp{−Σ_q (−1)^q q ζ′_q(0)}`
    Exponential,
    /// `Π det′(Δ_j)^{w_j}` with caller-supplied integers
    Weighted { weights: Vec<i64> },
    /// `exp{−Σ_{p,q} (−1)^{p+q} p q ζ′_{p,q}(0)}`
    Bcov,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeEntry {
    pub label: DegreeLabel,
    /// Exponent applied to `det′`.
    pub exponent: f64,
    pub zeta0: f64,
    pub dzeta0: f64,
    pub log_det: f64,
    pub method: ZetaMethod,
    pub error_bound: f64,
    pub harmonic_dim: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorsionReport {
    pub convention: TorsionConvention,
    pub degrees: Vec<DegreeEntry>,
    pub log_torsion: f64,
    pub torsion: f64,
    pub log_error_bound: f64,
    pub error_bound: f64,
    pub inputs: Vec<(DegreeLabel, SpectrumModel)>,
}

fn arg<T>(msg: impl Into<String>) -> Result<T, TorsionError> {
    Err(TorsionError::InvalidArgument(msg.into()))
}

fn sign(e: usize) -> f64 {
    if e % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_contiguous(labels: &[DegreeLabel]) -> Result<(), TorsionError> {
    let ks: BTreeSet<usize> = labels
        .iter()
        .map(|l| match l {
            DegreeLabel::Degree { k } => Ok(*k),
            other => arg(format!("expected plain degree labels, found {other:?}")),
        })
        .collect::<Result<_, _>>()?;
    if ks.len() != labels.len() {
        return arg("repeated degree");
    }
    let top = *ks.iter().next_back().expect("nonempty");
    if ks.len() != top + 1 {
        return arg(format!("degrees must cover 0..={top} exactly, got {ks:?}"));
    }
    Ok(())
}

fn exponents(
    family: &[(DegreeLabel, SpectrumModel)],
    convention: &TorsionConvention,
) -> Result<Vec<f64>, TorsionError> {
    if family.is_empty() {
        return arg("empty spectrum family");
    }
    let labels: Vec<DegreeLabel> = family.iter().map(|(l, _)| *l).collect();
    let distinct: BTreeSet<&DegreeLabel> = labels.iter().collect();
    if distinct.len() != labels.len() {
        return arg("repeated degree label");
    }
    match convention {
        TorsionConvention::Exponential => {
            check_contiguous(&labels)?;
            Ok(labels
                .iter()
                .map(|l| sign(l.form_degree()) * l.form_degree() as f64)
                .collect())
        }
        TorsionConvention::ProductExponents => {
            if labels
                .iter()
                .all(|l| matches!(l, DegreeLabel::Degree { .. }))
            {
                check_contiguous(&labels)?;
            } else if !labels
                .iter()
                .all(|l| matches!(l, DegreeLabel::Strand { .. }))
            {
                return arg("labels must be all plain degrees or all Spencer strands");
            }
            Ok(labels
                .iter()
                .map(|l| sign(l.form_degree() + 2) * l.form_degree() as f64 / 2.0)
                .collect())
        }
        TorsionConvention::Weighted { weights } => {
            if weights.len() != family.len() {
                return arg(format!(
                    "{} weights for {} spectra",
                    weights.len(),
                    family.len()
                ));
            }
            Ok(weights.iter().map(|&w| w as f64).collect())
        }
        TorsionConvention::Bcov => {
            let mut pq = BTreeSet::new();
            for l in &labels {
                match l {
                    DegreeLabel::Hodge { p, q } => {
                        pq.insert((*p, *q));
                    }
                    other => {
                        return arg(format!("BCOV torsion needs (p,q) labels, found {other:?}"))
                    }
                }
            }
            let n = pq
                .iter()
                .map(|(p, q)| (*p).max(*q))
                .max()
                .expect("nonempty");
            if pq.len() != (n + 1) * (n + 1) {
                return arg(format!(
                    "(p,q) range must be the full square 0..={n} × 0..={n}; {} of {} present",
                    pq.len(),
                    (n + 1) * (n + 1)
                ));
            }
            Ok(labels
                .iter()
                .map(|l| {
                    let DegreeLabel::Hodge { p, q } = *l else {
                        unreachable!()
                    };
                    sign(p + q) * (p * q) as f64
                })
                .collect())
        }
    }
}

fn assemble(
    family: &[(DegreeLabel, SpectrumModel)],
    convention: TorsionConvention,
) -> Result<TorsionReport, TorsionError> {
    let exps = exponents(family, &convention)?;
    let zs: Vec<_> = family
        .par_iter()
        .map(|(_, s)| zeta_at_zero(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut degrees = Vec::with_capacity(family.len());
    let (mut log_t, mut bound) = (0.0, 0.0);
    for (((label, spec), z), e) in family.iter().zip(zs).zip(exps) {
        let log_det = -z.dzeta0;
        log_t += e * log_det;
        bound += e.abs() * z.error_bound;
        degrees.push(DegreeEntry {
            label: *label,
            exponent: e,
            zeta0: z.zeta0,
            dzeta0: z.dzeta0,
            log_det,
            method: z.method,
            error_bound: z.error_bound,
            harmonic_dim: spec.harmonic_dim(),
        });
    }
    let torsion = log_t.exp();
    Ok(TorsionReport {
        convention,
        degrees,
        log_torsion: log_t,
        torsion,
        log_error_bound: bound,
        error_bound: torsion * bound.exp_m1(),
        inputs: family.to_vec(),
    })
}

pub fn ray_singer_torsion(
    family: &[(DegreeLabel, SpectrumModel)],
    convention: TorsionConvention,
) -> Result<TorsionReport, TorsionError> {
    if convention == TorsionConvention::Bcov {
        return arg("use bcov_torsion for the BCOV combination");
    }
    assemble(family, convention)
}

/// `family` entries are `(p, q, Δ_{p,q})`.
pub fn bcov_torsion(
    family: &[(usize, usize, SpectrumModel)],
) -> Result<TorsionReport, TorsionError> {
    let labeled: Vec<(DegreeLabel, SpectrumModel)> = family
        .iter()
        .map(|(p, q, s)| (DegreeLabel::Hodge { p: *p, q: *q }, s.clone()))
        .collect();
    assemble(&labeled, TorsionConvention::Bcov)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovolumeReport {
    #[serde(serialize_with = "crate::algebra::ser::rational")]
    pub value: Rational,
    pub approx: f64,
    pub rank: usize,
}

/// `det(⟨e_i, e_j⟩)` for the columns `e_i` of `basis` under `gram`.
pub fn l2_covolume(basis: &QMatrix, gram: &QMatrix) -> Result<CovolumeReport, TorsionError> {
    let r = gram.rows();
    if gram.cols() != r || basis.rows() != r || basis.cols() != r || r == 0 {
        return arg(format!(
            "need square matrices of one rank, got basis {}×{} and Gram {}×{}",
            basis.rows(),
            basis.cols(),
            r,
            gram.cols()
        ));
    }
    if (0..r).any(|i| (0..r).any(|j| !basis.get(i, j).is_integer())) {
        return arg("lattice basis must have integer entries");
    }
    if (0..r).any(|i| (0..i).any(|j| gram.get(i, j) != gram.get(j, i))) {
        return arg("Gram matrix must be symmetric");
    }
    if let Some((k, m)) = gram
        .leading_minors()
        .iter()
        .enumerate()
        .find(|(_, m)| !m.is_positive())
    {
        return arg(format!(
            "Gram matrix is not positive definite: leading minor {} is {m}",
            k + 1
        ));
    }
    let value = basis.transpose().mul(gram).mul(basis).determinant();
    if value.is_zero() {
        return arg("lattice basis is degenerate");
    }
    Ok(CovolumeReport {
        approx: value.to_f64().unwrap_or(f64::NAN),
        value,
        rank: r,
    })
}

/// `‖·‖_{L²} · exp[½ Σ_k (−1)^{k+1} k log det′Δ_k]`.
pub fn quillen_norm(l2_norm: f64, dets: &[(usize, f64)]) -> Result<f64, TorsionError> {
    if !(l2_norm.is_finite() && l2_norm > 0.0) {
        return arg("L² norm must be positive");
    }
    if dets.iter().any(|(_, d)| !(d.is_finite() && *d > 0.0)) {
        return arg("determinants must be positive");
    }
    let ks: BTreeSet<usize> = dets.iter().map(|(k, _)| *k).collect();
    if ks.len() != dets.len() {
        return arg("repeated degree");
    }
    let e: f64 = dets
        .iter()
        .map(|(k, d)| sign(k + 1) * *k as f64 * d.ln())
        .sum();
    Ok(l2_norm * (0.5 * e).exp())
}

/// Flat elliptic curve analogue of the BCOV invariant, factor by factor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BcovModelReport {
    pub tau: C,
    pub area: f64,
    pub euler_number: i64,
    pub vol: f64,
    pub vol_exponent: f64,
    pub vol_l2: f64,
    pub t_bcov: TorsionReport,
    pub bott_chern: f64,
    pub assembled: f64,
    /// De Rham torsion of the same torus in the product-exponent convention.
    pub spencer_torsion: TorsionReport,
}

pub fn bcov_invariant_model(tau: C, area: f64) -> Result<BcovModelReport, TorsionError> {
    if !(tau.im > 0.0 && tau.re.is_finite() && tau.im.is_finite()) {
        return arg("tau must lie in the upper half plane");
    }
    if !(area.is_finite() && area > 0.0) {
        return arg("area must be positive");
    }
    let euler_number = 0i64;
    let vol_exponent = -3.0 + euler_number as f64 / 12.0;
    let dolbeault = SpectrumModel::flat_torus_tau(tau, area, TorusLaplacian::Dolbeault);
    let hodge: Vec<(usize, usize, SpectrumModel)> = [(0, 0), (0, 1), (1, 0), (1, 1)]
        .into_iter()
        .map(|(p, q)| (p, q, dolbeault.clone()))
        .collect();
    let t_bcov = bcov_torsion(&hodge)?;
    // the fundamental class has harmonic representative ω/area
    let inv_area = Rational::from_float(1.0 / area)
        .ok_or_else(|| TorsionError::InvalidArgument("area not representable".into()))?;
    let vol_l2 = l2_covolume(
        &QMatrix::identity(1),
        &QMatrix::from_rows(vec![vec![inv_area]]),
    )?
    .approx;
    let vol = area;
    let bott_chern = 1.0;
    let assembled = vol.powf(vol_exponent) / vol_l2 * t_bcov.torsion * bott_chern;
    let de_rham = SpectrumModel::flat_torus_tau(tau, area, TorusLaplacian::DeRham);
    let spencer_torsion = ray_singer_torsion(
        &[
            (DegreeLabel::Degree { k: 0 }, de_rham.clone()),
            (
                DegreeLabel::Degree { k: 1 },
                SpectrumModel::copies(de_rham.clone(), 2),
            ),
            (DegreeLabel::Degree { k: 2 }, de_rham),
        ],
        TorsionConvention::ProductExponents,
    )?;
    Ok(BcovModelReport {
        tau,
        area,
        euler_number,
        vol,
        vol_exponent,
        vol_l2,
        t_bcov,
        bott_chern,
        assembled,
        spencer_torsion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::int;
    use std::f64::consts::{E, PI};

    fn deg(k: usize) -> DegreeLabel {
        DegreeLabel::Degree { k }
    }

    #[test]
    fn circle_conventions() {
        let l = 3.0;
        let c = SpectrumModel::circle(l);
        let fam = vec![(deg(0), c.clone()), (deg(1), c)];
        let exp = ray_singer_torsion(&fam, TorsionConvention::Exponential).unwrap();
        assert!((exp.torsion - l.powi(-2)).abs() < 1e-12);
        let prod = ray_singer_torsion(&fam, TorsionConvention::ProductExponents).unwrap();
        assert!((prod.torsion - 1.0 / l).abs() < 1e-12);
    }

    #[test]
    fn torus_de_rham_cancels() {
        let t = SpectrumModel::flat_torus_tau(C::new(0.2, 1.3), 2.0, TorusLaplacian::DeRham);
        let fam = vec![
            (deg(0), t.clone()),
            (deg(1), SpectrumModel::copies(t.clone(), 2)),
            (deg(2), t),
        ];
        for conv in [
            TorsionConvention::Exponential,
            TorsionConvention::ProductExponents,
        ] {
            let r = ray_singer_torsion(&fam, conv).unwrap();
            assert!((r.torsion - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn degree_ranges_checked() {
        let c = SpectrumModel::circle(1.0);
        assert!(ray_singer_torsion(
            &[(deg(0), c.clone()), (deg(2), c.clone())],
            TorsionConvention::Exponential
        )
        .is_err());
        assert!(ray_singer_torsion(
            &[(deg(0), c.clone()), (deg(0), c.clone())],
            TorsionConvention::Exponential
        )
        .is_err());
        assert!(ray_singer_torsion(&[], TorsionConvention::Exponential).is_err());
        assert!(bcov_torsion(&[(0, 0, c.clone()), (1, 1, c.clone())]).is_err());
        let w = TorsionConvention::Weighted {
            weights: vec![1, -1],
        };
        let r = ray_singer_torsion(&[(deg(0), c.clone()), (deg(1), c)], w).unwrap();
        assert!((r.torsion - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bcov_weights() {
        let e = SpectrumModel::explicit(vec![(3.0, 1)]);
        let fam: Vec<_> = (0..3)
            .flat_map(|p| (0..3).map(move |q| (p, q)))
            .map(|(p, q)| (p, q, e.clone()))
            .collect();
        let r = bcov_torsion(&fam).unwrap();
        // W = Σ (−1)^{p+q} pq over 0..=2 = (Σ_p (−1)^p p)² = (−1 + 2)² = 1
        assert!((r.log_torsion - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn covolumes() {
        let id = QMatrix::identity(2);
        assert_eq!(l2_covolume(&id, &id).unwrap().value, int(1));
        let two = QMatrix::from_rows(vec![vec![int(2)]]);
        assert_eq!(
            l2_covolume(&two, &QMatrix::identity(1)).unwrap().value,
            int(4)
        );
        let g = QMatrix::from_rows(vec![vec![int(2), int(1)], vec![int(1), int(2)]]);
        assert_eq!(l2_covolume(&id, &g).unwrap().value, int(3));
        let bad = QMatrix::from_rows(vec![vec![int(1), int(2)], vec![int(2), int(1)]]);
        assert!(l2_covolume(&id, &bad).is_err());
    }

    #[test]
    fn quillen_examples() {
        assert_eq!(quillen_norm(2.5, &[(0, 1.0), (1, 1.0)]).unwrap(), 2.5);
        assert!((quillen_norm(1.5, &[(1, E * E)]).unwrap() - 1.5 * E).abs() < 1e-14);
        let l: f64 = 4.0;
        assert!((quillen_norm(1.0, &[(0, l * l), (1, l * l)]).unwrap() - l).abs() < 1e-13);
        assert!(quillen_norm(1.0, &[(0, -1.0)]).is_err());
    }

    #[test]
    fn bcov_model_at_i() {
        let r = bcov_invariant_model(C::new(0.0, 1.0), 1.0).unwrap();
        let want = 3.625_609_908_221_908_3f64.powi(4) / (4.0 * PI.powi(3));
        assert!((r.t_bcov.torsion - want).abs() < 1e-9);
        assert_eq!(r.vol, 1.0);
        assert_eq!(r.bott_chern, 1.0);
        assert!((r.spencer_torsion.torsion - 1.0).abs() < 1e-9);
        assert!(bcov_invariant_model(C::new(0.0, 0.0), 1.0).is_err());
    }
}
