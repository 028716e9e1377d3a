//! Hyperbolicity in a direction `θ`: `t ↦ σ(tθ + η)` is real-rooted for every
//! `η` not parallel to `θ`, checked with exact Sturm sequences.

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::{var_list, MultiPoly, UniPoly};
use crate::jet::PdeSystem;
use crate::{QPoly, Rational};

use super::char_variety::{characteristic_ideal, CharVariety};
use super::grid::{base_points, compass_directions, directions, CovectorSample};
use super::MicrolocalError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperbolicStatus {
    Hyperbolic,
    NotHyperbolic,
    /// `σ(θ) = 0`: the symbol loses degree along the direction.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SturmCertificate {
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub x: Vec<Rational>,
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub eta: Vec<Rational>,
    /// Coefficients of `σ(tθ + η)` in increasing powers of `t`.
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub coefficients: Vec<Rational>,
    pub degree: usize,
    pub real_roots: usize,
    pub distinct_real_roots: usize,
}

impl SturmCertificate {
    pub fn real_rooted(&self) -> bool {
        self.real_roots == self.degree
    }

    pub fn strictly_real_rooted(&self) -> bool {
        self.distinct_real_roots == self.degree
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointHyperbolicity {
    pub status: HyperbolicStatus,
    /// All roots real and simple.
    pub strict: bool,
    pub certificates: Vec<SturmCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperbolicityReport {
    pub status: HyperbolicStatus,
    pub strict: bool,
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub direction: Vec<Rational>,
    pub certificates: Vec<SturmCertificate>,
    pub counterexample: Option<SturmCertificate>,
    pub degenerate_points: Vec<Vec<String>>,
}

fn parallel(a: &[Rational], b: &[Rational]) -> bool {
    (0..a.len()).all(|i| (i + 1..a.len()).all(|j| (&a[i] * &b[j] - &a[j] * &b[i]).is_zero()))
}

/// `σ(tθ + η)` as a univariate polynomial.
pub fn directional_slice(p: &QPoly, theta: &[Rational], eta: &[Rational]) -> UniPoly {
    let ring = var_list(&["t"]);
    let images: Vec<QPoly> = theta
        .iter()
        .zip(eta)
        .map(|(a, b)| {
            let mut q = MultiPoly::zero(ring.clone());
            q.add_term(vec![1], a.clone());
            q.add_term(vec![0], b.clone());
            q
        })
        .collect();
    let s = p.substitute(&images);
    let deg = s.total_degree().unwrap_or(0) as usize;
    let mut coeffs = vec![Rational::zero(); deg + 1];
    for (m, c) in s.terms() {
        coeffs[m[0] as usize] += c;
    }
    UniPoly::new(coeffs)
}

/// The hyperbolicity test for one fiber polynomial `p(ξ)`.
pub fn hyperbolic_at(
    p: &QPoly,
    x: &[Rational],
    theta: &[Rational],
    etas: &[Vec<Rational>],
) -> PointHyperbolicity {
    if p.eval(theta).is_zero() {
        return PointHyperbolicity {
            status: HyperbolicStatus::Degenerate,
            strict: false,
            certificates: Vec::new(),
        };
    }
    let degree = p.total_degree().unwrap_or(0) as usize;
    let mut certificates = Vec::new();
    for eta in etas.iter().filter(|e| !parallel(theta, e)) {
        let u = directional_slice(p, theta, eta);
        let cert = SturmCertificate {
            x: x.to_vec(),
            eta: eta.clone(),
            coefficients: u.coeffs().to_vec(),
            degree,
            real_roots: u.count_real_roots_with_multiplicity(),
            distinct_real_roots: u.count_distinct_real_roots(),
        };
        let ok = cert.real_rooted();
        certificates.push(cert);
        if !ok {
            return PointHyperbolicity {
                status: HyperbolicStatus::NotHyperbolic,
                strict: false,
                certificates,
            };
        }
    }
    let strict = certificates
        .iter()
        .all(SturmCertificate::strictly_real_rooted);
    PointHyperbolicity {
        status: HyperbolicStatus::Hyperbolic,
        strict,
        certificates,
    }
}

/// The single symbol polynomial a hyperbolicity test needs.
pub(crate) fn scalar_symbol(cv: &CharVariety) -> Result<(), MicrolocalError> {
    if cv.generators().len() != 1 {
        return Err(MicrolocalError::Unsupported(
            "hyperbolicity needs a scalar or determined system (one characteristic generator)"
                .into(),
        ));
    }
    Ok(())
}

pub fn is_hyperbolic(
    sys: &PdeSystem,
    direction: &[Rational],
    grid: &[CovectorSample],
) -> Result<HyperbolicityReport, MicrolocalError> {
    let n = sys.n();
    if direction.len() != n || direction.iter().all(Zero::is_zero) {
        return Err(MicrolocalError::InvalidArgument(
            "hyperbolicity direction must be a nonzero covector".into(),
        ));
    }
    let cv = characteristic_ideal(sys)?;
    scalar_symbol(&cv)?;
    let points = if sys.is_constant_coefficient() || grid.is_empty() {
        vec![sys.point()]
    } else {
        base_points(grid)
    };
    let mut etas = compass_directions(n, None);
    for d in directions(grid) {
        if !etas.contains(&d) {
            etas.push(d);
        }
    }
    let mut certificates = Vec::new();
    let mut degenerate_points = Vec::new();
    let mut strict = true;
    for x in &points {
        let p = cv.fiber_generators(x).remove(0);
        let at = hyperbolic_at(&p, x, direction, &etas);
        match at.status {
            HyperbolicStatus::NotHyperbolic => {
                let counterexample = at.certificates.last().cloned();
                certificates.extend(at.certificates);
                return Ok(HyperbolicityReport {
                    status: HyperbolicStatus::NotHyperbolic,
                    strict: false,
                    direction: direction.to_vec(),
                    certificates,
                    counterexample,
                    degenerate_points,
                });
            }
            HyperbolicStatus::Degenerate => {
                degenerate_points.push(x.iter().map(crate::algebra::rational_string).collect());
                strict = false;
            }
            HyperbolicStatus::Hyperbolic => {
                strict &= at.strict;
                certificates.extend(at.certificates);
            }
        }
    }
    let status = if degenerate_points.is_empty() {
        HyperbolicStatus::Hyperbolic
    } else {
        HyperbolicStatus::Degenerate
    };
    Ok(HyperbolicityReport {
        status,
        strict,
        direction: direction.to_vec(),
        certificates,
        counterexample: None,
        degenerate_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::int;
    use crate::jet::catalog;

    #[test]
    fn wave_in_time() {
        let r = is_hyperbolic(&catalog::wave(), &[int(1), int(0)], &[]).unwrap();
        assert_eq!(r.status, HyperbolicStatus::Hyperbolic);
        assert!(r.strict);
        assert!(r.certificates.iter().all(|c| c.real_roots == 2));
    }

    #[test]
    fn laplace_is_not_hyperbolic() {
        let r = is_hyperbolic(&catalog::laplace(2), &[int(1), int(0)], &[]).unwrap();
        assert_eq!(r.status, HyperbolicStatus::NotHyperbolic);
        assert_eq!(r.counterexample.unwrap().real_roots, 0);
    }

    #[test]
    fn heat_is_degenerate() {
        let r = is_hyperbolic(&catalog::heat(), &[int(1), int(0)], &[]).unwrap();
        assert_eq!(r.status, HyperbolicStatus::Degenerate);
    }

    #[test]
    fn zero_direction_is_rejected() {
        assert!(matches!(
            is_hyperbolic(&catalog::wave(), &[int(0), int(0)], &[]),
            Err(MicrolocalError::InvalidArgument(_))
        ));
    }
}
