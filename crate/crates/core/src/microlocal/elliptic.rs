//! Ellipticity: no nonzero real covector annihilates the principal symbol.

use serde::Serialize;

use crate::jet::PdeSystem;
use crate::Rational;

use super::char_variety::{characteristic_ideal, ellipticity_polynomial, CharVariety};
use super::definiteness::{
    decide_real_zeros, RealZeroDecision, RealZeroWitness, ZeroFreeCertificate,
};
use super::grid::{base_points, directions, CovectorSample};
use super::MicrolocalError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointCertificate {
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub x: Vec<Rational>,
    pub certificate: ZeroFreeCertificate,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub x: Vec<Rational>,
    pub witness: RealZeroWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub elliptic: bool,
    /// `false` when some point was only verified on the supplied directions.
    pub exact: bool,
    pub constant_coefficient: bool,
    pub certificates: Vec<PointCertificate>,
    pub counterexample: Option<Counterexample>,
}

/// Real-zero decision for the characteristic fiber over `x`.
pub fn decide_at(cv: &CharVariety, x: &[Rational], dirs: &[Vec<Rational>]) -> RealZeroDecision {
    decide_real_zeros(&ellipticity_polynomial(&cv.fiber_generators(x)), dirs)
}

pub fn is_elliptic(
    sys: &PdeSystem,
    grid: &[CovectorSample],
) -> Result<EllipticityReport, MicrolocalError> {
    if grid.is_empty() {
        return Err(MicrolocalError::InvalidArgument(
            "ellipticity needs a nonempty covector grid".into(),
        ));
    }
    let cv = characteristic_ideal(sys)?;
    let constant = sys.is_constant_coefficient();
    let points = if constant {
        vec![sys.point()]
    } else {
        base_points(grid)
    };
    let dirs = directions(grid);
    let mut certificates = Vec::new();
    for x in points {
        match decide_at(&cv, &x, &dirs) {
            RealZeroDecision::ZeroFree { certificate, exact } => {
                certificates.push(PointCertificate {
                    x,
                    certificate,
                    exact,
                })
            }
            RealZeroDecision::HasZero(witness) => {
                return Ok(EllipticityReport {
                    elliptic: false,
                    exact: true,
                    constant_coefficient: constant,
                    certificates,
                    counterexample: Some(Counterexample { x, witness }),
                })
            }
        }
    }
    let exact = certificates.iter().all(|c| c.exact);
    Ok(EllipticityReport {
        elliptic: true,
        exact,
        constant_coefficient: constant,
        certificates,
        counterexample: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::int;
    use crate::jet::catalog;
    use crate::microlocal::grid::{compass_directions, tensor};

    fn grid(n: usize) -> Vec<CovectorSample> {
        tensor(&[vec![int(0); n]], &compass_directions(n, None))
    }

    #[test]
    fn laplace_is_elliptic() {
        let r = is_elliptic(&catalog::laplace(2), &grid(2)).unwrap();
        assert!(r.elliptic && r.exact);
        assert!(matches!(
            r.certificates[0].certificate,
            ZeroFreeCertificate::DefiniteQuadratic { sign: 1, .. }
        ));
    }

    #[test]
    fn heat_has_real_characteristic() {
        let r = is_elliptic(&catalog::heat(), &grid(2)).unwrap();
        assert!(!r.elliptic);
        match r.counterexample.unwrap().witness {
            RealZeroWitness::Zero { xi } => assert_eq!(xi, vec![int(1), int(0)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cauchy_riemann_is_elliptic() {
        assert!(
            is_elliptic(&catalog::cauchy_riemann(), &grid(2))
                .unwrap()
                .elliptic
        );
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(is_elliptic(&catalog::laplace(2), &[]).is_err());
    }
}
