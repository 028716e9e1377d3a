//! Geometric symbols `g^j ⊆ Sym^j(V*) ⊗ W` and their prolongations.
//!
//! Vectors are written in jet coordinates: the component at `(a, α)` is the
//! value of `u_{a,α}`. In these coordinates the derivation `∂_k` of the
//! divided-power symbol is the index shift `v ↦ v_{·+e_k}`, so prolongation
//! and the δ-map need no factorials.

use std::collections::HashMap;

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::Matrix;
use crate::{QMatrix, Rational};

use super::system::PdeSystem;
use super::JetError;

/// Multi-indices of total degree `d` in `n` variables, in descending lex order.
pub fn multi_indices(n: usize, d: usize) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=d).rev() {
            prefix.push(a);
            rec(n, d - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, d as u32, &mut Vec::new(), &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Coordinates of `Sym^d(V*) ⊗ W`: unknown-major, multi-indices in descending lex order.
#[derive(Clone, Debug)]
pub struct JetCoords {
    pub n: usize,
    pub m: usize,
    pub degree: usize,
    list: Vec<(usize, Vec<u32>)>,
    index: HashMap<(usize, Vec<u32>), usize>,
}

impl JetCoords {
    pub fn new(n: usize, m: usize, degree: usize) -> Self {
        let mis = multi_indices(n, degree);
        let list: Vec<(usize, Vec<u32>)> = (0..m)
            .flat_map(|a| mis.iter().map(move |al| (a, al.clone())))
            .collect();
        let index = list
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        JetCoords {
            n,
            m,
            degree,
            list,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn get(&self, i: usize) -> &(usize, Vec<u32>) {
        &self.list[i]
    }

    pub fn position(&self, unknown: usize, alpha: &[u32]) -> Option<usize> {
        self.index.get(&(unknown, alpha.to_vec())).copied()
    }

    /// The shift `v ↦ v_{·+e_k}` from degree `d` coordinates to degree `d−1`.
    pub fn shift_down(&self, lower: &JetCoords, k: usize, v: &[Rational]) -> Vec<Rational> {
        (0..lower.len())
            .map(|i| {
                let (a, alpha) = lower.get(i);
                let mut up = alpha.clone();
                up[k] += 1;
                v[self.position(*a, &up).expect("shifted index in range")].clone()
            })
            .collect()
    }
}

/// A subspace of `Sym^d(V*) ⊗ W`, presented as the kernel of an exact matrix.
///
/// The basis comes from reduced row echelon form: each basis vector is 1 at
/// one free position and 0 at the others, so coordinates of any member are
/// read off at `free_positions`.
#[derive(Clone, Debug)]
pub struct SymbolSpace {
    pub n: usize,
    pub m: usize,
    pub degree: usize,
    pub basis: Vec<Vec<Rational>>,
    pub free_positions: Vec<usize>,
    pub presentation: QMatrix,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SymbolSummary {
    pub degree: usize,
    pub dim: usize,
    pub ambient_dim: usize,
}

impl SymbolSpace {
    /// The kernel of `presentation` (rows over `JetCoords::new(n, m, degree)`).
    pub fn from_presentation(n: usize, m: usize, degree: usize, presentation: QMatrix) -> Self {
        let ambient = JetCoords::new(n, m, degree).len();
        assert_eq!(presentation.cols(), ambient, "presentation width");
        let rref = presentation.rref();
        let mut is_pivot = vec![false; ambient];
        for &p in &rref.pivots {
            is_pivot[p] = true;
        }
        let free_positions: Vec<usize> = (0..ambient).filter(|&j| !is_pivot[j]).collect();
        let basis = presentation.kernel_basis();
        let presentation = Matrix::from_rows(
            (0..rref.pivots.len())
                .map(|i| rref.matrix.row(i).to_vec())
                .collect::<Vec<_>>(),
        );
        let presentation = if presentation.rows() == 0 {
            Matrix::zeros(0, ambient)
        } else {
            presentation
        };
        SymbolSpace {
            n,
            m,
            degree,
            basis,
            free_positions,
            presentation,
        }
    }

    /// The full ambient space.
    pub fn full(n: usize, m: usize, degree: usize) -> Self {
        let ambient = JetCoords::new(n, m, degree).len();
        Self::from_presentation(n, m, degree, Matrix::zeros(0, ambient))
    }

    /// Subspace spanned by arbitrary vectors.
    pub fn from_spanning(n: usize, m: usize, degree: usize, vectors: &[Vec<Rational>]) -> Self {
        let ambient = JetCoords::new(n, m, degree).len();
        if vectors.is_empty() {
            return Self::from_presentation(n, m, degree, Matrix::identity(ambient));
        }
        let b = Matrix::from_rows(vectors.to_vec());
        let annihilator = b.kernel_basis();
        let pres = if annihilator.is_empty() {
            Matrix::zeros(0, ambient)
        } else {
            Matrix::from_rows(annihilator)
        };
        Self::from_presentation(n, m, degree, pres)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.m * binomial(self.degree + self.n - 1, self.n - 1)
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn coords(&self) -> JetCoords {
        JetCoords::new(self.n, self.m, self.degree)
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.presentation.mul_vec(v).iter().all(Zero::is_zero)
    }

    /// Coordinates of a member with respect to `basis`.
    pub fn coordinates_of(&self, v: &[Rational]) -> Vec<Rational> {
        self.free_positions.iter().map(|&p| v[p].clone()).collect()
    }

    pub fn summary(&self) -> SymbolSummary {
        SymbolSummary {
            degree: self.degree,
            dim: self.dim(),
            ambient_dim: JetCoords::new(self.n, self.m, self.degree).len(),
        }
    }
}

/// Rows `{ξ^β σ_e : q_e ≤ j, |β| = j − q_e}` of the degree-`j` symbol map at `point`.
pub fn symbol_matrix(sys: &PdeSystem, point: &[Rational], j: usize) -> QMatrix {
    let (n, m) = (sys.n(), sys.m());
    let coords = JetCoords::new(n, m, j);
    let mut rows = Vec::new();
    for e in 0..sys.equations().len() {
        let q = sys.equations()[e].order();
        if q > j {
            continue;
        }
        let principal = sys.principal_at(e, point);
        if principal.is_empty() {
            continue;
        }
        for beta in multi_indices(n, j - q) {
            let mut row = vec![Rational::zero(); coords.len()];
            for (jet, c) in &principal {
                let alpha: Vec<u32> = jet.alpha.iter().zip(&beta).map(|(a, b)| a + b).collect();
                let pos = coords
                    .position(jet.unknown, &alpha)
                    .expect("jet coordinate");
                row[pos] += c;
            }
            rows.push(row);
        }
    }
    if rows.is_empty() {
        Matrix::zeros(0, coords.len())
    } else {
        Matrix::from_rows(rows)
    }
}

pub(crate) fn check_nondegenerate(sys: &PdeSystem, point: &[Rational]) -> Result<(), JetError> {
    if sys.is_free() {
        return Ok(());
    }
    let k = sys.order();
    let top_nonzero = (0..sys.equations().len())
        .any(|e| sys.equations()[e].order() == k && !sys.principal_at(e, point).is_empty());
    if top_nonzero {
        Ok(())
    } else {
        Err(JetError::DegenerateSymbol {
            point: point.iter().map(|q| q.to_string()).collect(),
        })
    }
}

/// The degree-`j` symbol `g^j` at `point` (full ambient for `j` below every equation order).
pub fn symbol_at_degree(
    sys: &PdeSystem,
    point: &[Rational],
    j: usize,
) -> Result<SymbolSpace, JetError> {
    check_nondegenerate(sys, point)?;
    Ok(SymbolSpace::from_presentation(
        sys.n(),
        sys.m(),
        j,
        symbol_matrix(sys, point, j),
    ))
}

/// `g^k` at `point`, where `k` is the system order.
pub fn geometric_symbol(sys: &PdeSystem, point: &[Rational]) -> Result<SymbolSpace, JetError> {
    symbol_at_degree(sys, point, sys.order())
}

/// `(g^k)^{(ℓ)} = (Sym^ℓ V* ⊗ g^k) ∩ (Sym^{k+ℓ} V* ⊗ W)`, as the kernel of
/// all `ℓ`-fold shifts composed with the presentation of `g^k`.
pub fn prolong(sym: &SymbolSpace, ell: usize) -> SymbolSpace {
    let (n, m, k) = (sym.n, sym.m, sym.degree);
    let top = JetCoords::new(n, m, k + ell);
    let base = JetCoords::new(n, m, k);
    let mut rows = Vec::new();
    for beta in multi_indices(n, ell) {
        for r in 0..sym.presentation.rows() {
            let mut row = vec![Rational::zero(); top.len()];
            for (c, val) in sym.presentation.row(r).iter().enumerate() {
                if val.is_zero() {
                    continue;
                }
                let (a, alpha) = base.get(c);
                let up: Vec<u32> = alpha.iter().zip(&beta).map(|(x, y)| x + y).collect();
                row[top.position(*a, &up).expect("prolonged index")] += val;
            }
            rows.push(row);
        }
    }
    let pres = if rows.is_empty() {
        Matrix::zeros(0, top.len())
    } else {
        Matrix::from_rows(rows)
    };
    SymbolSpace::from_presentation(n, m, k + ell, pres)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::system::catalog;

    fn origin(n: usize) -> Vec<Rational> {
        vec![Rational::zero(); n]
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 3).len(), 4);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(2, 2)[0], vec![2, 0]);
        assert_eq!(multi_indices(1, 0), vec![vec![0]]);
    }

    #[test]
    fn laplace_symbol_and_prolongation() {
        let l = catalog::laplace(2);
        let g = geometric_symbol(&l, &origin(2)).unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(prolong(&g, 1).dim(), 2);
        assert_eq!(prolong(&g, 3).dim(), 2);
    }

    #[test]
    fn gradient_symbol_vanishes() {
        let g = geometric_symbol(&catalog::gradient_zero(), &origin(2)).unwrap();
        assert!(g.is_zero());
        assert!(prolong(&g, 2).is_zero());
    }

    #[test]
    fn free_symbol_is_ambient() {
        let f = PdeSystem::free(&["x", "y"], &["u"], 2);
        let g = geometric_symbol(&f, &origin(2)).unwrap();
        assert_eq!(g.dim(), 3);
        assert_eq!(prolong(&g, 2).dim(), 5);
    }

    #[test]
    fn degenerate_point_is_rejected() {
        let vars = crate::algebra::var_list(&["x", "y"]);
        let y = crate::algebra::MultiPoly::var(vars.clone(), 1);
        let eq = crate::jet::system::LinearEquation::new([(
            crate::jet::system::Jet::new(0, vec![2, 0]),
            y,
        )]);
        let sys = PdeSystem::new("deg", vars, vec!["u".into()], vec![eq]).unwrap();
        assert!(matches!(
            geometric_symbol(&sys, &origin(2)),
            Err(JetError::DegenerateSymbol { .. })
        ));
    }

    #[test]
    fn coordinates_read_off_free_positions() {
        let g = geometric_symbol(&catalog::laplace(2), &origin(2)).unwrap();
        for (i, b) in g.basis.iter().enumerate() {
            assert!(g.contains(b));
            let c = g.coordinates_of(b);
            for (j, x) in c.iter().enumerate() {
                assert_eq!(x.is_zero(), i != j);
            }
        }
    }
}
