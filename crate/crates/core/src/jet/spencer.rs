//! Spencer δ-complexes, their cohomology, and the Cartan-test search.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::poly::combinations;
use crate::algebra::Matrix;
use crate::{QMatrix, Rational};

use super::symbol::{binomial, symbol_at_degree, SymbolSpace};
use super::system::PdeSystem;
use super::JetError;

/// `(j, i)`: the slot `g^j ⊗ Λ^i V*`.
pub type Slot = (usize, usize);

/// Default number of prolongations searched by the Cartan test and finite-type detection.
pub const DEFAULT_SEARCH_BOUND: usize = 6;

/// The δ-complex `g^j ⊗ Λ^i → g^{j−1} ⊗ Λ^{i+1}`, `δ(v⊗ω) = Σ_k ∂_k v ⊗ dx_k∧ω`.
///
/// Slot `(j, i)` has basis ordered form-major: index `s·dim g^j + b` for the
/// `s`-th sorted `i`-subset and the `b`-th symbol basis vector.
#[derive(Debug)]
pub struct SpencerComplex {
    pub n: usize,
    pub m: usize,
    pub order: usize,
    pub depth: usize,
    pub max_order: usize,
    pub symbols: Vec<SymbolSpace>,
    pub differentials: BTreeMap<Slot, QMatrix>,
    pub delta_squared_verified: bool,
    ranks: Mutex<HashMap<Slot, usize>>,
}

fn subset_index(n: usize, i: usize) -> HashMap<Vec<usize>, usize> {
    combinations(n, i)
        .into_iter()
        .enumerate()
        .map(|(k, s)| (s, k))
        .collect()
}

/// Matrix of δ from `(j, i)` into `(j−1, i+1)` in the symbol bases.
fn delta_matrix(upper: &SymbolSpace, lower: &SymbolSpace, i: usize) -> QMatrix {
    let n = upper.n;
    let (cu, cl) = (upper.coords(), lower.coords());
    let src_subsets = combinations(n, i);
    let tgt_index = subset_index(n, i + 1);
    let (du, dl) = (upper.dim(), lower.dim());
    let mut mat = Matrix::<Rational>::zeros(dl * binomial(n, i + 1), du * src_subsets.len());
    // ∂_k b expressed in the lower basis, per (b, k)
    let shifted: Vec<Vec<Vec<Rational>>> = upper
        .basis
        .iter()
        .map(|b| {
            (0..n)
                .map(|k| lower.coordinates_of(&cu.shift_down(&cl, k, b)))
                .collect()
        })
        .collect();
    for (s_idx, s) in src_subsets.iter().enumerate() {
        for k in (0..n).filter(|k| !s.contains(k)) {
            let mut t = s.clone();
            t.push(k);
            t.sort_unstable();
            let sign_neg = s.iter().filter(|&&x| x < k).count() % 2 == 1;
            let t_idx = tgt_index[&t];
            for b in 0..du {
                for (r, val) in shifted[b][k].iter().enumerate() {
                    if val.is_zero() {
                        continue;
                    }
                    let row = t_idx * dl + r;
                    let col = s_idx * du + b;
                    let v = if sign_neg { -val.clone() } else { val.clone() };
                    let cur = mat.get(row, col).clone();
                    mat.set(row, col, cur + v);
                }
            }
        }
    }
    mat
}

impl SpencerComplex {
    /// Builds all `g^j` for `j ≤ max_order` at the system's base point and the
    /// δ-maps out of form degrees `i ≤ depth`.
    pub fn build(sys: &PdeSystem, depth: usize, max_order: usize) -> Result<Self, JetError> {
        if max_order < sys.order() {
            return Err(JetError::InvalidArgument(format!(
                "max_order {max_order} is below the system order {}",
                sys.order()
            )));
        }
        let point = sys.point();
        let symbols: Result<Vec<SymbolSpace>, JetError> = (0..=max_order)
            .into_par_iter()
            .map(|j| symbol_at_degree(sys, &point, j))
            .collect();
        let mut cx = SpencerComplex {
            n: sys.n(),
            m: sys.m(),
            order: sys.order(),
            depth: depth.min(sys.n()),
            max_order: 0,
            symbols: Vec::new(),
            differentials: BTreeMap::new(),
            delta_squared_verified: false,
            ranks: Mutex::new(HashMap::new()),
        };
        cx.push_symbols(symbols?);
        cx.delta_squared_verified = cx.verify_delta_squared();
        if !cx.delta_squared_verified {
            return Err(JetError::Internal("δ∘δ ≠ 0".into()));
        }
        Ok(cx)
    }

    fn push_symbols(&mut self, symbols: Vec<SymbolSpace>) {
        let start = self.symbols.len();
        self.symbols.extend(symbols);
        self.max_order = self.symbols.len() - 1;
        let top_i = self.depth.min(self.n.saturating_sub(1));
        let keys: Vec<Slot> = (start.max(1)..=self.max_order)
            .flat_map(|j| (0..=top_i).map(move |i| (j, i)))
            .filter(|_| self.n > 0)
            .collect();
        let maps: Vec<(Slot, QMatrix)> = keys
            .par_iter()
            .map(|&(j, i)| {
                (
                    (j, i),
                    delta_matrix(&self.symbols[j], &self.symbols[j - 1], i),
                )
            })
            .collect();
        self.differentials.extend(maps);
    }

    /// Extends the complex with higher symbol degrees.
    pub fn extend_to(&mut self, sys: &PdeSystem, max_order: usize) -> Result<(), JetError> {
        if max_order <= self.max_order {
            return Ok(());
        }
        let point = sys.point();
        let symbols: Result<Vec<SymbolSpace>, JetError> = (self.max_order + 1..=max_order)
            .into_par_iter()
            .map(|j| symbol_at_degree(sys, &point, j))
            .collect();
        self.push_symbols(symbols?);
        self.delta_squared_verified = self.verify_delta_squared();
        Ok(())
    }

    pub fn space_dim(&self, j: usize, i: usize) -> usize {
        if j > self.max_order || i > self.n {
            return 0;
        }
        self.symbols[j].dim() * binomial(self.n, i)
    }

    pub fn differential(&self, j: usize, i: usize) -> Option<&QMatrix> {
        self.differentials.get(&(j, i))
    }

    /// Exact check that every composable pair of δ-maps composes to zero.
    pub fn verify_delta_squared(&self) -> bool {
        self.differentials.par_iter().all(|(&(j, i), d1)| {
            match self.differentials.get(&(j - 1, i + 1)) {
                Some(d2) if d2.cols() > 0 && d1.cols() > 0 && d2.rows() > 0 => d2.mul(d1).is_zero(),
                _ => true,
            }
        })
    }

    fn rank(&self, slot: Slot) -> usize {
        if let Some(r) = self.ranks.lock().expect("rank cache").get(&slot) {
            return *r;
        }
        let r = self.differentials.get(&slot).map_or(0, |d| d.rank());
        self.ranks.lock().expect("rank cache").insert(slot, r);
        r
    }

    fn has_outgoing(&self, j: usize, i: usize) -> bool {
        j == 0 || i == self.n || self.differentials.contains_key(&(j, i))
    }

    fn has_incoming(&self, j: usize, i: usize) -> bool {
        i == 0 || (j < self.max_order && self.differentials.contains_key(&(j + 1, i - 1)))
    }

    /// `dim H^{j,i}` when both adjacent maps are available.
    pub fn cohomology_entry(&self, j: usize, i: usize) -> Option<CohomologyEntry> {
        if j > self.max_order || i > self.n || !self.has_outgoing(j, i) || !self.has_incoming(j, i)
        {
            return None;
        }
        let space = self.space_dim(j, i);
        let out_rank = if j == 0 || i == self.n {
            0
        } else {
            self.rank((j, i))
        };
        let in_rank = if i == 0 { 0 } else { self.rank((j + 1, i - 1)) };
        let kernel = space - out_rank;
        Some(CohomologyEntry {
            j,
            i,
            space,
            kernel,
            image: in_rank,
            dim: kernel - in_rank,
        })
    }

    fn warm_ranks(&self, slots: &[Slot]) {
        let missing: Vec<Slot> = {
            let cache = self.ranks.lock().expect("rank cache");
            slots
                .iter()
                .copied()
                .filter(|s| !cache.contains_key(s) && self.differentials.contains_key(s))
                .collect()
        };
        let computed: Vec<(Slot, usize)> = missing
            .par_iter()
            .map(|&s| (s, self.differentials[&s].rank()))
            .collect();
        self.ranks.lock().expect("rank cache").extend(computed);
    }

    /// Euler characteristics of the strand `j + i = d` over spaces and over
    /// cohomology; `None` when the strand is truncated.
    pub fn strand_euler(&self, d: usize) -> Option<(i64, i64)> {
        let top = d.min(self.n);
        if d > self.max_order || top > self.depth {
            return None;
        }
        let mut spaces = 0i64;
        let mut cohom = 0i64;
        for i in 0..=top {
            let e = self.cohomology_entry(d - i, i)?;
            let s = if i % 2 == 0 { 1 } else { -1 };
            spaces += s * e.space as i64;
            cohom += s * e.dim as i64;
        }
        Some((spaces, cohom))
    }
}

/// One slot of a δ-cohomology table with its rank-nullity data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyEntry {
    pub j: usize,
    pub i: usize,
    pub space: usize,
    pub kernel: usize,
    pub image: usize,
    pub dim: usize,
}

/// `dim H^{j,i}` over the slots where the complex is not truncated.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DeltaCohomologyTable {
    pub entries: BTreeMap<Slot, CohomologyEntry>,
}

impl DeltaCohomologyTable {
    /// A table given directly by cohomology dimensions in form degrees `0, 1, …`.
    pub fn from_degrees(dims: &[usize]) -> Self {
        let entries = dims
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                (
                    (0, i),
                    CohomologyEntry {
                        j: 0,
                        i,
                        space: d,
                        kernel: d,
                        image: 0,
                        dim: d,
                    },
                )
            })
            .collect();
        DeltaCohomologyTable { entries }
    }

    pub fn get(&self, j: usize, i: usize) -> Option<usize> {
        self.entries.get(&(j, i)).map(|e| e.dim)
    }

    pub fn rows(&self) -> Vec<CohomologyEntry> {
        self.entries.values().copied().collect()
    }

    /// `Σ (−1)^i dim H^{j,i}` over all entries.
    pub fn euler_characteristic(&self) -> i64 {
        self.entries
            .values()
            .map(|e| {
                if e.i % 2 == 0 {
                    e.dim as i64
                } else {
                    -(e.dim as i64)
                }
            })
            .sum()
    }

    /// `Σ (−1)^i dim C^{j,i}` over all entries.
    pub fn space_euler_characteristic(&self) -> i64 {
        self.entries
            .values()
            .map(|e| {
                if e.i % 2 == 0 {
                    e.space as i64
                } else {
                    -(e.space as i64)
                }
            })
            .sum()
    }

    /// The entries of total degree `j + i = d`.
    pub fn strand(&self, d: usize) -> DeltaCohomologyTable {
        DeltaCohomologyTable {
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| k.0 + k.1 == d)
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }

    /// `true` when every entry with `j` in `range` vanishes.
    pub fn vanishes_for(&self, range: std::ops::RangeInclusive<usize>) -> bool {
        self.entries
            .values()
            .filter(|e| range.contains(&e.j))
            .all(|e| e.dim == 0)
    }
}

/// Cohomology over every untruncated slot of the complex.
pub fn delta_cohomology(cx: &SpencerComplex) -> DeltaCohomologyTable {
    let slots: Vec<Slot> = (0..=cx.max_order)
        .flat_map(|j| (0..=cx.depth).map(move |i| (j, i)))
        .collect();
    let all_maps: Vec<Slot> = cx.differentials.keys().copied().collect();
    cx.warm_ranks(&all_maps);
    let entries = slots
        .into_iter()
        .filter_map(|(j, i)| cx.cohomology_entry(j, i).map(|e| ((j, i), e)))
        .collect();
    DeltaCohomologyTable { entries }
}

/// Outcome of the Cartan-test search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvolutivityReport {
    /// `None` is the not-found sentinel.
    pub ell0: Option<usize>,
    pub search_bound: usize,
    pub table: DeltaCohomologyTable,
}

/// Smallest `ℓ ≤ bound` with `H^{j,i} = 0` for `j ∈ {k+ℓ, k+ℓ+1}` and every `i`.
pub fn involutivity_degree(sys: &PdeSystem, bound: usize) -> Result<InvolutivityReport, JetError> {
    let k = sys.order();
    let n = sys.n();
    let mut cx = SpencerComplex::build(sys, n, k + 2)?;
    for ell in 0..=bound {
        cx.extend_to(sys, k + ell + 2)?;
        let slots: Vec<Slot> = (k + ell..=k + ell + 2)
            .flat_map(|j| (0..=n).map(move |i| (j, i)))
            .collect();
        cx.warm_ranks(&slots);
        let clean = (k + ell..=k + ell + 1)
            .all(|j| (0..=n).all(|i| cx.cohomology_entry(j, i).is_some_and(|e| e.dim == 0)));
        if clean {
            return Ok(InvolutivityReport {
                ell0: Some(ell),
                search_bound: bound,
                table: delta_cohomology(&cx),
            });
        }
    }
    Ok(InvolutivityReport {
        ell0: None,
        search_bound: bound,
        table: delta_cohomology(&cx),
    })
}

/// Dimensions `dim g^j` for `j = 0..=max_k`: the coefficients of the Poincaré series.
pub fn poincare_series(sys: &PdeSystem, max_k: usize) -> Result<Vec<usize>, JetError> {
    let point = sys.point();
    (0..=max_k)
        .into_par_iter()
        .map(|j| symbol_at_degree(sys, &point, j).map(|g| g.dim()))
        .collect()
}

/// Degree of the polynomial that the tail `coeffs[start..]` follows, if
/// finite differences vanish within the available data.
pub fn polynomial_tail_degree(coeffs: &[usize], start: usize) -> Option<usize> {
    let mut diff: Vec<i64> = coeffs.iter().skip(start).map(|&c| c as i64).collect();
    let mut degree = 0;
    while diff.len() >= 2 {
        if diff.iter().all(|&d| d == diff[0]) {
            return Some(degree);
        }
        diff = diff.windows(2).map(|w| w[1] - w[0]).collect();
        degree += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::system::catalog;

    #[test]
    fn free_module_is_exact() {
        let f = PdeSystem::free(&["x", "y"], &["u"], 1);
        let cx = SpencerComplex::build(&f, 2, 5).unwrap();
        let t = delta_cohomology(&cx);
        assert_eq!(t.get(0, 0), Some(1));
        assert!(t
            .entries
            .values()
            .filter(|e| (e.j, e.i) != (0, 0))
            .all(|e| e.dim == 0));
    }

    #[test]
    fn laplace_slots() {
        let cx = SpencerComplex::build(&catalog::laplace(2), 2, 4).unwrap();
        assert!(cx.delta_squared_verified);
        assert_eq!(cx.space_dim(2, 0), 2);
        let t = delta_cohomology(&cx);
        assert_eq!(t.get(2, 0), Some(0));
        assert_eq!(t.get(2, 1), Some(0));
        assert_eq!(t.get(2, 2), Some(0));
    }

    #[test]
    fn strands_balance() {
        let cx = SpencerComplex::build(&catalog::pure_second_derivatives(), 2, 5).unwrap();
        for d in 0..=5 {
            let (s, h) = cx.strand_euler(d).unwrap();
            assert_eq!(s, h, "strand {d}");
        }
    }

    #[test]
    fn involutivity_examples() {
        assert_eq!(
            involutivity_degree(&catalog::laplace(2), 6).unwrap().ell0,
            Some(0)
        );
        let r = involutivity_degree(&catalog::pure_second_derivatives(), 6).unwrap();
        assert_eq!(r.ell0, Some(1));
    }

    #[test]
    fn tail_degree_detection() {
        assert_eq!(polynomial_tail_degree(&[1, 2, 3, 4, 5], 0), Some(1));
        assert_eq!(polynomial_tail_degree(&[1, 2, 2, 2, 2], 1), Some(0));
        assert_eq!(polynomial_tail_degree(&[1, 0, 0, 0], 1), Some(0));
    }
}
