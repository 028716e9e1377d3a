//! Finite-type systems: detection, the solution-dimension bound, and the
//! reduction to a flat connection on the bundle of parametric jets.

use std::collections::BTreeMap;

use num_traits::One;
use serde::Serialize;

use crate::algebra::{MultiPoly, VarList};
use crate::{QPoly, Rational};

use super::spencer::{poincare_series, DEFAULT_SEARCH_BOUND};
use super::symbol::multi_indices;
use super::system::{Jet, LinearEquation, PdeSystem};
use super::JetError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteTypeReport {
    pub finite: bool,
    /// Smallest `ℓ0 ≤ bound` with `g^{k+ℓ0+1} = 0`.
    pub ell0: Option<usize>,
    pub symbol_dims: Vec<usize>,
}

pub fn is_finite_type(sys: &PdeSystem, bound: usize) -> Result<FiniteTypeReport, JetError> {
    let k = sys.order();
    let dims = poincare_series(sys, k + bound + 1)?;
    let ell0 = (0..=bound).find(|&l| dims[k + l + 1] == 0);
    Ok(FiniteTypeReport {
        finite: ell0.is_some(),
        ell0,
        symbol_dims: dims,
    })
}

/// `Σ_j dim g^j` over `j ≤ k + ℓ0`.
pub fn solution_dim_bound(sys: &PdeSystem) -> Result<usize, JetError> {
    let ft = is_finite_type(sys, DEFAULT_SEARCH_BOUND)?;
    let ell0 = ft.ell0.ok_or(JetError::NotFiniteType {
        bound: DEFAULT_SEARCH_BOUND,
    })?;
    Ok(ft.symbol_dims[..=sys.order() + ell0].iter().sum())
}

/// `∂_i s = A_i s` on the fiber of parametric jets `s`.
#[derive(Clone, Debug)]
pub struct FlatConnectionSystem {
    pub rank: usize,
    pub vars: VarList,
    pub fiber: Vec<Jet>,
    pub connection_matrices: Vec<Vec<Vec<QPoly>>>,
    pub flatness_checked: bool,
    pub ell0: usize,
}

impl FlatConnectionSystem {
    /// `∂_i A_j − ∂_j A_i − [A_i, A_j]` for `i < j`.
    pub fn curvature(&self, i: usize, j: usize) -> Vec<Vec<QPoly>> {
        let r = self.rank;
        let (a, b) = (&self.connection_matrices[i], &self.connection_matrices[j]);
        let mut out = vec![vec![MultiPoly::zero(self.vars.clone()); r]; r];
        for p in 0..r {
            for q in 0..r {
                let mut v = &b[p][q].derivative(i) - &a[p][q].derivative(j);
                for t in 0..r {
                    v = &v - &(&a[p][t] * &b[t][q]);
                    v = &v + &(&b[p][t] * &a[t][q]);
                }
                out[p][q] = v;
            }
        }
        out
    }

    pub fn is_flat(&self) -> bool {
        let n = self.vars.len();
        (0..n).all(|i| {
            (i + 1..n).all(|j| {
                self.curvature(i, j)
                    .iter()
                    .flatten()
                    .all(MultiPoly::is_zero)
            })
        })
    }
}

/// Jets of order ≤ `top`, ranked highest order first.
fn ranked_jets(n: usize, m: usize, top: usize) -> Vec<Jet> {
    let mut out = Vec::new();
    for d in (0..=top).rev() {
        for a in 0..m {
            for alpha in multi_indices(n, d) {
                out.push(Jet::new(a, alpha));
            }
        }
    }
    out
}

/// All `D^β E` with `ord E + |β| ≤ top`.
fn prolonged_equations(sys: &PdeSystem, top: usize) -> Vec<LinearEquation> {
    let n = sys.n();
    let mut out = Vec::new();
    for eq in sys.equations() {
        let q = eq.order();
        if q > top {
            continue;
        }
        let mut layer = vec![(vec![0u32; n], eq.clone())];
        out.push(eq.clone());
        for _ in q..top {
            let mut next = Vec::new();
            for (beta, e) in &layer {
                // extend only in variables ≥ the last one used, so each β appears once
                let last = beta.iter().rposition(|&b| b > 0).unwrap_or(0);
                for i in last..n {
                    let mut b2 = beta.clone();
                    b2[i] += 1;
                    let d = e.total_derivative(i);
                    out.push(d.clone());
                    next.push((b2, d));
                }
            }
            layer = next;
        }
    }
    out
}

/// Reduces a finite-type system to `∂_i s = A_i s` on its parametric jets.
///
/// Each prolonged equation is solved for a jet of its own order, dividing
/// only by nonzero constants. Lower-order relations produced by the
/// elimination surface as curvature.
pub fn to_flat_connection(sys: &PdeSystem) -> Result<FlatConnectionSystem, JetError> {
    let ft = is_finite_type(sys, DEFAULT_SEARCH_BOUND)?;
    let ell0 = ft.ell0.ok_or(JetError::NotFiniteType {
        bound: DEFAULT_SEARCH_BOUND,
    })?;
    let (n, m) = (sys.n(), sys.m());
    let top = sys.order() + ell0 + 1;
    let vars = sys.indep_vars().clone();
    let jets = ranked_jets(n, m, top);
    let col: BTreeMap<Jet, usize> = jets
        .iter()
        .enumerate()
        .map(|(i, j)| (j.clone(), i))
        .collect();

    let equations = prolonged_equations(sys, top);
    let row_order: Vec<usize> = equations.iter().map(LinearEquation::order).collect();
    let mut rows: Vec<BTreeMap<usize, QPoly>> = equations
        .iter()
        .map(|e| e.terms().iter().map(|(j, c)| (col[j], c.clone())).collect())
        .collect();
    let mut pivot_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut used = vec![false; rows.len()];
    for c in 0..jets.len() {
        let Some(r) = (0..rows.len()).find(|&r| {
            !used[r]
                && row_order[r] == jets[c].order()
                && rows[r]
                    .get(&c)
                    .is_some_and(|v| v.is_constant() && !v.is_zero())
        }) else {
            continue;
        };
        used[r] = true;
        let inv = rows[r][&c]
            .constant_value()
            .expect("constant pivot")
            .recip();
        let pivot_row: BTreeMap<usize, QPoly> =
            rows[r].iter().map(|(k, v)| (*k, v.scale(&inv))).collect();
        rows[r] = pivot_row.clone();
        for (o, row) in rows.iter_mut().enumerate() {
            if o == r {
                continue;
            }
            let Some(f) = row.get(&c).cloned() else {
                continue;
            };
            for (k, v) in &pivot_row {
                let updated = match row.get(k) {
                    Some(cur) => cur - &(&f * v),
                    None => -(&f * v),
                };
                if updated.is_zero() {
                    row.remove(k);
                } else {
                    row.insert(*k, updated);
                }
            }
        }
        pivot_of.insert(c, r);
    }
    for (c, jet) in jets.iter().enumerate() {
        if jet.order() == top && !pivot_of.contains_key(&c) {
            return Err(JetError::Unsupported(format!(
                "jet {} cannot be solved without dividing by a nonconstant coefficient",
                jet.render(sys.indep_vars(), sys.unknowns())
            )));
        }
    }
    let mut fiber: Vec<Jet> = jets
        .iter()
        .enumerate()
        .filter(|(c, _)| !pivot_of.contains_key(c))
        .map(|(_, j)| j.clone())
        .collect();
    fiber.sort_by(|a, b| a.order().cmp(&b.order()).then(a.cmp(b)));
    let fiber_pos: BTreeMap<usize, usize> =
        fiber.iter().enumerate().map(|(i, j)| (col[j], i)).collect();
    let rank = fiber.len();
    let zero = MultiPoly::zero(vars.clone());

    // principal jet ↦ row vector over the fiber
    let express = |c: usize| -> Vec<QPoly> {
        let mut v = vec![zero.clone(); rank];
        if let Some(&p) = fiber_pos.get(&c) {
            v[p] = MultiPoly::constant(vars.clone(), Rational::one());
            return v;
        }
        let row = &rows[pivot_of[&c]];
        for (k, coeff) in row {
            if *k == c {
                continue;
            }
            let p = fiber_pos[k];
            v[p] = &v[p] - coeff;
        }
        v
    };

    let mut connection_matrices = Vec::with_capacity(n);
    for i in 0..n {
        let mat: Vec<Vec<QPoly>> = fiber
            .iter()
            .map(|jet| express(col[&jet.shifted(i)]))
            .collect();
        connection_matrices.push(mat);
    }
    let mut flat = FlatConnectionSystem {
        rank,
        vars,
        fiber,
        connection_matrices,
        flatness_checked: false,
        ell0,
    };
    for i in 0..n {
        for j in i + 1..n {
            let curv = flat.curvature(i, j);
            for (p, row) in curv.iter().enumerate() {
                for (q, entry) in row.iter().enumerate() {
                    if !entry.is_zero() {
                        return Err(JetError::Obstruction {
                            i,
                            j,
                            row: p,
                            col: q,
                            polynomial: entry.to_string(),
                        });
                    }
                }
            }
        }
    }
    // compatibility conditions not visible in the curvature
    for (r, row) in rows.iter().enumerate() {
        if !used[r] && !row.is_empty() {
            let residual: Vec<String> = row
                .iter()
                .map(|(c, v)| {
                    format!(
                        "({v})*{}",
                        jets[*c].render(sys.indep_vars(), sys.unknowns())
                    )
                })
                .collect();
            return Err(JetError::Unsupported(format!(
                "unsolved relation {}",
                residual.join(" + ")
            )));
        }
    }

    flat.flatness_checked = true;
    Ok(flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, var_list};
    use crate::jet::system::catalog;
    use crate::QMatrix;
    use num_traits::Zero;

    #[test]
    fn gradient_zero_is_finite() {
        let r = is_finite_type(&catalog::gradient_zero(), 3).unwrap();
        assert!(r.finite);
        assert_eq!(r.ell0, Some(0));
        assert_eq!(solution_dim_bound(&catalog::gradient_zero()).unwrap(), 1);
    }

    #[test]
    fn laplace_is_not_finite() {
        let r = is_finite_type(&catalog::laplace(2), 4).unwrap();
        assert!(!r.finite);
        assert!(matches!(
            solution_dim_bound(&catalog::laplace(2)),
            Err(JetError::NotFiniteType { .. })
        ));
    }

    #[test]
    fn exponential_connection() {
        let f = to_flat_connection(&catalog::scaled_exponential(int(1))).unwrap();
        assert_eq!(f.rank, 1);
        assert_eq!(
            f.connection_matrices[0][0][0].constant_value(),
            Some(int(1))
        );
        assert!(f.flatness_checked);
    }

    #[test]
    fn mixed_connection_is_flat() {
        let v = var_list(&["x", "y"]);
        let sys = catalog::frobenius(MultiPoly::var(v.clone(), 1), MultiPoly::var(v, 0));
        let f = to_flat_connection(&sys).unwrap();
        assert_eq!(f.rank, 1);
        assert!(f.is_flat());
    }

    #[test]
    fn incompatible_system_is_obstructed() {
        let v = var_list(&["x", "y"]);
        let sys = catalog::frobenius(MultiPoly::var(v.clone(), 1), MultiPoly::zero(v));
        assert!(matches!(
            to_flat_connection(&sys),
            Err(JetError::Obstruction { .. })
        ));
    }

    #[test]
    fn second_order_line() {
        let v = var_list(&["x"]);
        let eq = LinearEquation::new([(Jet::new(0, vec![2]), MultiPoly::one(v.clone()))]);
        let sys = PdeSystem::new("uxx", v, vec!["u".into()], vec![eq]).unwrap();
        assert_eq!(solution_dim_bound(&sys).unwrap(), 2);
        assert_eq!(to_flat_connection(&sys).unwrap().rank, 2);
    }

    #[test]
    fn matrix_ode_rank() {
        let a = QMatrix::from_rows(vec![vec![int(1), int(2)], vec![int(0), int(-1)]]);
        let f = to_flat_connection(&catalog::linear_ode(&a)).unwrap();
        assert_eq!(f.rank, 2);
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(
                    f.connection_matrices[0][r][c]
                        .constant_value()
                        .unwrap_or_else(Rational::zero),
                    a.get(r, c).clone()
                );
            }
        }
    }
}
