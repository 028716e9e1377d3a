//! Restriction to linear subspaces `L ↪ ℝⁿ` and the noncharacteristic test.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::algebra::{var_list, Matrix, MonomialOrder, MultiPoly, PolyIdeal, VarList};
use crate::jet::{Jet, LinearEquation, PdeSystem};
use crate::{QPoly, Rational};

use super::char_variety::{characteristic_ideal, covector_names, ellipticity_polynomial};
use super::definiteness::{decide_real_zeros, RealZeroDecision, RealZeroWitness};
use super::MicrolocalError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestrictionReport {
    pub noncharacteristic: bool,
    pub codimension: usize,
    pub subspace_vars: Vec<String>,
    /// Rows span the conormal space of `L`.
    #[serde(serialize_with = "crate::algebra::ser::vecs")]
    pub conormal_basis: Vec<Vec<Rational>>,
    #[serde(serialize_with = "crate::algebra::ser::opt_vec")]
    pub violating_conormal: Option<Vec<Rational>>,
    /// Zero witness in conormal-basis coordinates.
    pub witness: Option<RealZeroWitness>,
    /// Rank of the Cauchy data; `None` when it is infinite.
    pub cauchy_rank: Option<usize>,
    #[serde(skip)]
    pub restricted: Option<PdeSystem>,
    pub restricted_system: Option<String>,
}

fn subspace_names(sys: &PdeSystem, e: &Matrix<Rational>) -> VarList {
    let (n, d) = (e.rows(), e.cols());
    let names: Vec<String> = (0..d)
        .map(|j| {
            let col = e.column(j);
            let support: Vec<usize> = (0..n).filter(|&i| !col[i].is_zero()).collect();
            match support.as_slice() {
                [i] if col[*i].is_one() => sys.indep_vars()[*i].clone(),
                _ => format!("s{}", j + 1),
            }
        })
        .collect();
    var_list(&names)
}

fn linear_form(ring: &VarList, coeffs: &[(usize, Rational)]) -> QPoly {
    let mut p = MultiPoly::zero(ring.clone());
    for (i, c) in coeffs {
        let mut m = vec![0u32; ring.len()];
        m[*i] = 1;
        p.add_term(m, c.clone());
    }
    p
}

/// `L` is the column span of `embedding` (`n × d`, full column rank).
pub fn noncharacteristic_restrict(
    sys: &PdeSystem,
    embedding: &Matrix<Rational>,
) -> Result<RestrictionReport, MicrolocalError> {
    let n = sys.n();
    let d = embedding.cols();
    if embedding.rows() != n || d == 0 || embedding.rank() < d {
        return Err(MicrolocalError::InvalidArgument(
            "subspace embedding must be injective with n rows".into(),
        ));
    }
    let cv = characteristic_ideal(sys)?;
    let names = subspace_names(sys, embedding);
    let conormals = embedding.transpose().kernel_basis();
    let c = conormals.len();
    let point = base_point_on(sys, embedding);
    let fiber = cv.fiber_generators(&point);
    let mut report = RestrictionReport {
        noncharacteristic: true,
        codimension: c,
        subspace_vars: names.to_vec(),
        conormal_basis: conormals.clone(),
        violating_conormal: None,
        witness: None,
        cauchy_rank: Some(0),
        restricted: None,
        restricted_system: None,
    };
    if c == 0 {
        report.restricted_system = Some(sys.to_string());
        report.restricted = Some(sys.clone());
        return Ok(report);
    }

    // ξ = Σ_j c_j ν_j
    let cring = var_list(&(1..=c).map(|j| format!("c{j}")).collect::<Vec<_>>());
    let images: Vec<QPoly> = (0..n)
        .map(|i| {
            linear_form(
                &cring,
                &(0..c)
                    .map(|j| (j, conormals[j][i].clone()))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let on_conormals: Vec<QPoly> = fiber.iter().map(|g| g.substitute(&images)).collect();
    match decide_real_zeros(&ellipticity_polynomial(&on_conormals), &[]) {
        RealZeroDecision::ZeroFree { .. } => {}
        RealZeroDecision::HasZero(w) => {
            if let RealZeroWitness::Zero { xi } = &w {
                let v: Vec<Rational> = (0..n)
                    .map(|i| {
                        (0..c).fold(Rational::zero(), |acc, j| acc + &xi[j] * &conormals[j][i])
                    })
                    .collect();
                report.violating_conormal = Some(v);
            }
            report.noncharacteristic = false;
            report.witness = Some(w);
            report.cauchy_rank = None;
            return Ok(report);
        }
    }

    if c > 1 {
        report.cauchy_rank = None;
        return Ok(report);
    }
    if sys.m() > 1 {
        report.cauchy_rank = (sys.m() == sys.equations().len())
            .then(|| fiber[0].total_degree().unwrap_or(0) as usize);
        return Ok(report);
    }
    let restricted = restricted_scalar(sys, &fiber, embedding, &conormals[0], names)?;
    report.cauchy_rank = Some(restricted.m());
    report.restricted_system = Some(restricted.to_string());
    report.restricted = Some(restricted);
    Ok(report)
}

fn base_point_on(sys: &PdeSystem, e: &Matrix<Rational>) -> Vec<Rational> {
    let p = sys.point();
    let on_l = e.transpose().kernel_basis().iter().all(|nu| {
        nu.iter()
            .zip(&p)
            .fold(Rational::zero(), |a, (x, y)| a + x * y)
            .is_zero()
    });
    if on_l {
        p
    } else {
        vec![Rational::zero(); sys.n()]
    }
}

/// Cauchy-data system: unknowns `w_a = ∂_ν^a u|_L` for `a < s`, with the
/// relations of the symbol ideal of degree below `s` in the normal variable.
fn restricted_scalar(
    sys: &PdeSystem,
    fiber: &[QPoly],
    e: &Matrix<Rational>,
    nu: &[Rational],
    names: VarList,
) -> Result<PdeSystem, MicrolocalError> {
    let (n, d) = (e.rows(), e.cols());
    let mut ring_names = vec!["t".to_string()];
    ring_names.extend(covector_names(&names));
    let ring = var_list(&ring_names);
    // E (EᵀE)⁻¹
    let et = e.transpose();
    let gram_inv = et
        .mul(e)
        .inverse()
        .ok_or_else(|| MicrolocalError::InvalidArgument("singular embedding".into()))?;
    let lift = e.mul(&gram_inv);
    let images: Vec<QPoly> = (0..n)
        .map(|i| {
            let mut terms: Vec<(usize, Rational)> =
                (0..d).map(|j| (j + 1, lift.get(i, j).clone())).collect();
            terms.push((0, nu[i].clone()));
            linear_form(&ring, &terms)
        })
        .collect();
    let pulled: Vec<QPoly> = fiber.iter().map(|g| g.substitute(&images)).collect();
    let ideal = PolyIdeal::new(ring.clone(), pulled)?.groebner_basis(MonomialOrder::Lex);
    let gb = ideal.basis();
    let s = gb
        .leading_monomials()
        .iter()
        .filter(|m| m[1..].iter().all(|&x| x == 0))
        .map(|m| m[0] as usize)
        .min()
        .ok_or_else(|| {
            MicrolocalError::Unsupported("restricted symbol has no monic normal power".into())
        })?;
    let u = &sys.unknowns()[0];
    let unknowns: Vec<String> = (0..s).map(|a| format!("{u}_n{a}")).collect();
    let mut equations = Vec::new();
    for g in &gb.polys {
        let dt = g.degree_in(0) as usize;
        for j in 0..s.saturating_sub(dt) {
            let mut eq = LinearEquation::new(std::iter::empty());
            for (m, coeff) in g.terms() {
                let a = m[0] as usize + j;
                let jet = Jet::new(a, m[1..].to_vec());
                eq.add(jet, &MultiPoly::constant(names.clone(), coeff.clone()));
            }
            if !eq.is_zero() && !equations.contains(&eq) {
                equations.push(eq);
            }
        }
    }
    let name = format!("{}_restricted", sys.name());
    if equations.is_empty() {
        let names_ref: Vec<&str> = names.iter().map(String::as_str).collect();
        let unknowns_ref: Vec<&str> = unknowns.iter().map(String::as_str).collect();
        return Ok(PdeSystem::free(&names_ref, &unknowns_ref, 1).with_name(name));
    }
    Ok(PdeSystem::new(name, names, unknowns, equations)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::int;
    use crate::jet::catalog;

    fn embed(cols: &[&[i64]]) -> Matrix<Rational> {
        let cols: Vec<Vec<Rational>> = cols
            .iter()
            .map(|c| c.iter().map(|&x| int(x)).collect())
            .collect();
        Matrix::from_columns(&cols, cols[0].len())
    }

    #[test]
    fn laplace_on_x_axis() {
        let r = noncharacteristic_restrict(&catalog::laplace(2), &embed(&[&[1, 0]])).unwrap();
        assert!(r.noncharacteristic);
        assert_eq!(r.cauchy_rank, Some(2));
        let restricted = r.restricted.unwrap();
        assert!(restricted.is_free());
        assert_eq!(restricted.indep_vars().to_vec(), vec!["x".to_string()]);
    }

    #[test]
    fn wave_on_initial_surface() {
        let r = noncharacteristic_restrict(&catalog::wave(), &embed(&[&[0, 1]])).unwrap();
        assert!(r.noncharacteristic);
        assert_eq!(r.cauchy_rank, Some(2));
    }

    #[test]
    fn wave_on_light_ray_is_characteristic() {
        let r = noncharacteristic_restrict(&catalog::wave(), &embed(&[&[1, 1]])).unwrap();
        assert!(!r.noncharacteristic);
        let v = r.violating_conormal.unwrap();
        assert_eq!(&v[0] * &v[0], &v[1] * &v[1]);
        assert!(r.restricted.is_none());
    }

    #[test]
    fn gradient_zero_restricts_to_constant_line_system() {
        let r = noncharacteristic_restrict(&catalog::gradient_zero(), &embed(&[&[1, 0]])).unwrap();
        assert!(r.noncharacteristic);
        let restricted = r.restricted.unwrap();
        assert_eq!(restricted.m(), 1);
        assert_eq!(restricted.equations().len(), 1);
    }

    #[test]
    fn dependent_embedding_is_rejected() {
        assert!(
            noncharacteristic_restrict(&catalog::laplace(2), &embed(&[&[1, 0], &[2, 0]])).is_err()
        );
    }

    #[test]
    fn point_in_plane_has_infinite_cauchy_data() {
        let r = noncharacteristic_restrict(&catalog::laplace(3), &embed(&[&[1, 0, 0]])).unwrap();
        assert!(r.noncharacteristic);
        assert_eq!(r.codimension, 2);
        assert_eq!(r.cauchy_rank, None);
    }
}
