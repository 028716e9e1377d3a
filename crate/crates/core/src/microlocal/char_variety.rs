//! Characteristic ideals in `T*ℝⁿ = {(x, ξ)}`.

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::poly::{combinations, poly_det};
use crate::algebra::{
    ideal_dimension, var_list, IdealDimension, MonomialOrder, MultiPoly, PolyIdeal, VarList,
};
use crate::jet::symbol::check_nondegenerate;
use crate::jet::PdeSystem;
use crate::{QIdeal, QPoly, Rational};

use super::MicrolocalError;

/// The ideal of the characteristic variety over base coordinates `x` and fiber coordinates `ξ`.
#[derive(Clone, Debug)]
pub struct CharVariety {
    pub n: usize,
    pub base_vars: VarList,
    /// `x_1..x_n, ξ_1..ξ_n`.
    pub ambient: VarList,
    pub ideal: QIdeal,
    pub conic: bool,
    pub dimension: IdealDimension,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharVarietySummary {
    pub ambient: Vec<String>,
    pub generators: Vec<String>,
    pub conic: bool,
    pub dimension: IdealDimension,
}

/// Covector coordinate names `xi_<var>`.
pub fn covector_names(vars: &[String]) -> Vec<String> {
    vars.iter().map(|v| format!("xi_{v}")).collect()
}

/// `x ++ ξ` ring for the given base variables.
pub fn cotangent_ring(vars: &[String]) -> VarList {
    let mut names: Vec<String> = vars.to_vec();
    names.extend(covector_names(vars));
    var_list(&names)
}

/// `σ_{e,a}(x, ξ) = Σ_{|α| = q_e} c_{e,a,α}(x) ξ^α`, one row per equation.
pub fn principal_symbol_matrix(sys: &PdeSystem, ring: &VarList) -> Vec<Vec<QPoly>> {
    let (n, m) = (sys.n(), sys.m());
    let base_map: Vec<usize> = (0..n).collect();
    sys.equations()
        .iter()
        .map(|eq| {
            let mut row = vec![MultiPoly::zero(ring.clone()); m];
            for (jet, c) in eq.principal_part() {
                let mut xi = vec![0u32; 2 * n];
                xi[n..].copy_from_slice(&jet.alpha);
                let term = &c.embed(ring.clone(), &base_map)
                    * &MultiPoly::monomial(ring.clone(), xi, Rational::from_integer(1.into()));
                row[jet.unknown] = &row[jet.unknown] + &term;
            }
            row
        })
        .collect()
}

/// Maximal minors of the principal symbol matrix; the zero polynomial when
/// there are fewer equations than unknowns.
pub fn symbol_generators(sys: &PdeSystem, ring: &VarList) -> Vec<QPoly> {
    let m = sys.m();
    let mat = principal_symbol_matrix(sys, ring);
    if mat.len() < m {
        return vec![MultiPoly::zero(ring.clone())];
    }
    let mut gens = Vec::new();
    for rows in combinations(mat.len(), m) {
        let sub: Vec<Vec<QPoly>> = rows.iter().map(|&r| mat[r].clone()).collect();
        let d = if m == 1 {
            sub[0][0].clone()
        } else {
            poly_det(&sub, ring)
        };
        if !d.is_zero() && !gens.contains(&d) {
            gens.push(d);
        }
    }
    if gens.is_empty() {
        gens.push(MultiPoly::zero(ring.clone()));
    }
    gens
}

pub fn characteristic_ideal(sys: &PdeSystem) -> Result<CharVariety, MicrolocalError> {
    check_nondegenerate(sys, &sys.point())?;
    let n = sys.n();
    let ring = cotangent_ring(sys.indep_vars());
    let gens = symbol_generators(sys, &ring);
    let xi: Vec<usize> = (n..2 * n).collect();
    let conic = gens.iter().all(|g| g.is_homogeneous_in(&xi));
    let ideal = PolyIdeal::new(ring.clone(), gens)?.groebner_basis(MonomialOrder::DegRevLex);
    let dimension = ideal_dimension(&ideal);
    Ok(CharVariety {
        n,
        base_vars: sys.indep_vars().clone(),
        ambient: ring,
        ideal,
        conic,
        dimension,
    })
}

impl CharVariety {
    pub fn generators(&self) -> &[QPoly] {
        self.ideal.generators()
    }

    /// The generators at base point `x`, as polynomials in `ξ` alone.
    pub fn fiber_generators(&self, x: &[Rational]) -> Vec<QPoly> {
        let ring = var_list(&covector_names(&self.base_vars));
        self.generators()
            .iter()
            .map(|g| restrict_to_fiber(g, self.n, x, &ring))
            .collect()
    }

    /// Whether `(x; ξ)` lies on the variety.
    pub fn contains(&self, x: &[Rational], xi: &[Rational]) -> bool {
        let point: Vec<Rational> = x.iter().chain(xi).cloned().collect();
        self.generators().iter().all(|g| g.eval(&point).is_zero())
    }

    pub fn summary(&self) -> CharVarietySummary {
        CharVarietySummary {
            ambient: self.ambient.to_vec(),
            generators: self.generators().iter().map(|g| g.to_string()).collect(),
            conic: self.conic,
            dimension: self.dimension,
        }
    }
}

/// Evaluates the first `n` variables of `p` at `x`, leaving a polynomial in the last `n`.
pub fn restrict_to_fiber(p: &QPoly, n: usize, x: &[Rational], fiber_ring: &VarList) -> QPoly {
    let mut out = MultiPoly::zero(fiber_ring.clone());
    for (mono, c) in p.terms() {
        let mut coeff = c.clone();
        for i in 0..n {
            if mono[i] > 0 {
                coeff *= num_traits::pow(x[i].clone(), mono[i] as usize);
            }
        }
        if !coeff.is_zero() {
            out.add_term(mono[n..].to_vec(), coeff);
        }
    }
    out
}

/// `g` for a single generator, `Σ g_i²` otherwise: real zeros of this polynomial
/// are exactly the real common zeros of the generators.
pub fn ellipticity_polynomial(gens: &[QPoly]) -> QPoly {
    if gens.len() == 1 {
        return gens[0].clone();
    }
    let mut acc = MultiPoly::zero(gens[0].vars().clone());
    for g in gens {
        acc = &acc + &(g * g);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::catalog;

    #[test]
    fn laplace_cone() {
        let cv = characteristic_ideal(&catalog::laplace(2)).unwrap();
        assert_eq!(cv.generators().len(), 1);
        assert_eq!(cv.generators()[0].to_string(), "xi_x^2 + xi_y^2");
        assert_eq!(cv.dimension, IdealDimension::Dim(3));
        assert!(cv.conic);
    }

    #[test]
    fn first_order_zero_section() {
        let cv = characteristic_ideal(&catalog::d_x()).unwrap();
        assert_eq!(cv.dimension, IdealDimension::Dim(1));
    }

    #[test]
    fn cauchy_riemann_determinant() {
        let cv = characteristic_ideal(&catalog::cauchy_riemann()).unwrap();
        assert_eq!(cv.generators().len(), 1);
        assert_eq!(cv.dimension, IdealDimension::Dim(3));
    }

    #[test]
    fn tricomi_fiber() {
        let cv = characteristic_ideal(&catalog::tricomi()).unwrap();
        let g = cv.fiber_generators(&[Rational::zero(), Rational::from_integer((-1).into())]);
        assert_eq!(g[0].to_string(), "-xi_x^2 + xi_y^2");
    }
}
