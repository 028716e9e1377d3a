//! Logarithmic Spencer complexes `D_(X,D) ⊗ Λ^p Θ(−log D) ⊗ M → …`.
//!
//! Operators are stored in the normal-ordered basis `x^α θ^β`, where
//! `θ_i = x_i ∂_i` on divisor axes and `θ_i = ∂_i` elsewhere. The coordinate
//! fields commute, so `θ^β θ_s = θ^{β+e_s}` and the differential on basis
//! chains is a signed index shift. The general formula with the `θ_i m` and
//! bracket terms is implemented separately for arbitrary polynomial fields
//! and sections, and both are checked against each other.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::algebra::poly::{combinations, poly_det};
use crate::algebra::{int, var_list, Matrix, MultiPoly, VarList};
use crate::{QMatrix, QPoly, Rational};

use super::symbol::multi_indices;

/// `(x-exponent, θ-exponent)`.
pub type LogTerm = (Vec<u32>, Vec<u32>);

/// An element `Σ c·x^α θ^β` of the log-PBW algebra.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LogOp {
    pub terms: BTreeMap<LogTerm, Rational>,
}

impl LogOp {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, key: LogTerm, c: Rational) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.remove(&key).unwrap_or_else(Rational::zero) + c;
        if !v.is_zero() {
            self.terms.insert(key, v);
        }
    }

    pub fn add(&self, other: &LogOp) -> LogOp {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> LogOp {
        let mut out = LogOp::default();
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * c);
        }
        out
    }
}

/// A log vector field `Σ f_i θ_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogField {
    pub coeffs: Vec<QPoly>,
}

/// An operator in Weyl normal form `Σ c·x^a ∂^b`.
pub type WeylOp = BTreeMap<(Vec<u32>, Vec<u32>), Rational>;

fn falling(c: u32, k: u32) -> Rational {
    (0..k).fold(Rational::one(), |acc, i| acc * int((c - i) as i64))
}

fn binom(b: u32, k: u32) -> Rational {
    let mut r = Rational::one();
    for i in 0..k {
        r = r * int((b - i) as i64) / int((i + 1) as i64);
    }
    r
}

/// The log-PBW algebra on `n` axes, some of them logarithmic.
#[derive(Clone, Debug)]
pub struct LogAlgebra {
    pub n: usize,
    pub log_axes: Vec<bool>,
    pub vars: VarList,
}

impl LogAlgebra {
    /// `divisor_axes` are 1-based axis labels.
    pub fn new(n: usize, divisor_axes: &[usize]) -> Self {
        let log_axes = (1..=n).map(|i| divisor_axes.contains(&i)).collect();
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        LogAlgebra {
            n,
            log_axes,
            vars: var_list(&names),
        }
    }

    /// `θ_i^b x_i^c` in normal order, as `(x power, θ power, coefficient)` triples.
    fn commute_axis(&self, i: usize, b: u32, c: u32) -> Vec<(u32, u32, Rational)> {
        if self.log_axes[i] {
            // θ x^c = x^c (θ + c)
            (0..=b)
                .map(|k| {
                    (
                        c,
                        k,
                        binom(b, k) * num_traits::pow(int(c as i64), (b - k) as usize),
                    )
                })
                .collect()
        } else {
            (0..=b.min(c))
                .map(|k| (c - k, b - k, binom(b, k) * falling(c, k)))
                .collect()
        }
    }

    pub fn mul(&self, a: &LogOp, b: &LogOp) -> LogOp {
        let mut out = LogOp::default();
        for ((xa, ta), ca) in &a.terms {
            for ((xb, tb), cb) in &b.terms {
                // x^xa (θ^ta x^xb) θ^tb, axis by axis
                let mut partial: Vec<(Vec<u32>, Vec<u32>, Rational)> =
                    vec![(xa.clone(), vec![0; self.n], ca * cb)];
                for i in 0..self.n {
                    let pieces = self.commute_axis(i, ta[i], xb[i]);
                    let mut next = Vec::with_capacity(partial.len() * pieces.len());
                    for (x, t, c) in &partial {
                        for (px, pt, pc) in &pieces {
                            let mut x2 = x.clone();
                            let mut t2 = t.clone();
                            x2[i] += px;
                            t2[i] = pt + tb[i];
                            next.push((x2, t2, c * pc));
                        }
                    }
                    partial = next;
                }
                for (x, t, c) in partial {
                    out.add_term((x, t), c);
                }
            }
        }
        out
    }

    pub fn function(&self, g: &QPoly) -> LogOp {
        let mut out = LogOp::default();
        for (m, c) in g.terms() {
            out.add_term((m.clone(), vec![0; self.n]), c.clone());
        }
        out
    }

    pub fn theta(&self, i: usize) -> LogOp {
        let mut t = vec![0; self.n];
        t[i] = 1;
        let mut out = LogOp::default();
        out.add_term((vec![0; self.n], t), Rational::one());
        out
    }

    pub fn field_op(&self, v: &LogField) -> LogOp {
        let mut out = LogOp::default();
        for (i, f) in v.coeffs.iter().enumerate() {
            out = out.add(&self.mul(&self.function(f), &self.theta(i)));
        }
        out
    }

    /// `θ_i(g)`.
    pub fn theta_apply(&self, i: usize, g: &QPoly) -> QPoly {
        let d = g.derivative(i);
        if self.log_axes[i] {
            &MultiPoly::var(self.vars.clone(), i) * &d
        } else {
            d
        }
    }

    pub fn field_apply(&self, v: &LogField, g: &QPoly) -> QPoly {
        let mut out = MultiPoly::zero(self.vars.clone());
        for (i, f) in v.coeffs.iter().enumerate() {
            out = &out + &(f * &self.theta_apply(i, g));
        }
        out
    }

    /// `[v, w]`, again a log field because the coordinate fields commute.
    pub fn bracket(&self, v: &LogField, w: &LogField) -> LogField {
        let coeffs = (0..self.n)
            .map(|j| &self.field_apply(v, &w.coeffs[j]) - &self.field_apply(w, &v.coeffs[j]))
            .collect();
        LogField { coeffs }
    }

    /// Weyl normal form `Σ c x^a ∂^b`.
    pub fn to_weyl(&self, op: &LogOp) -> WeylOp {
        let mut out: WeylOp = BTreeMap::new();
        for ((x, t), c) in &op.terms {
            let mut partial: Vec<(Vec<u32>, Vec<u32>, Rational)> =
                vec![(x.clone(), vec![0; self.n], c.clone())];
            for i in 0..self.n {
                let axis: Vec<(u32, u32, Rational)> = if self.log_axes[i] {
                    weyl_power_of_euler(t[i])
                } else {
                    vec![(0, t[i], Rational::one())]
                };
                let mut next = Vec::new();
                for (px, pd, pc) in &partial {
                    for (ax, ad, ac) in &axis {
                        let mut x2 = px.clone();
                        let mut d2 = pd.clone();
                        x2[i] += ax;
                        d2[i] += ad;
                        next.push((x2, d2, pc * ac));
                    }
                }
                partial = next;
            }
            for (x, d, c) in partial {
                let e = out.entry((x, d)).or_insert_with(Rational::zero);
                *e += c;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }
}

/// `(x∂)^k` in one variable, by repeated right multiplication with `x∂`.
fn weyl_power_of_euler(k: u32) -> Vec<(u32, u32, Rational)> {
    let mut cur: BTreeMap<u32, Rational> = BTreeMap::from([(0, Rational::one())]);
    for _ in 0..k {
        // x^j ∂^j · x ∂ = x^j (x ∂^j + j ∂^{j−1}) ∂ = x^{j+1}∂^{j+1} + j x^j ∂^j
        let mut next: BTreeMap<u32, Rational> = BTreeMap::new();
        for (j, c) in &cur {
            *next.entry(j + 1).or_insert_with(Rational::zero) += c.clone();
            if *j > 0 {
                *next.entry(*j).or_insert_with(Rational::zero) += c * int(*j as i64);
            }
        }
        cur = next;
    }
    cur.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (j, j, c))
        .collect()
}

/// `Σ P_{S,c} ⊗ θ_S ⊗ f_c` over sorted subsets `S` and module basis index `c`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LogChain {
    pub terms: BTreeMap<(Vec<usize>, usize), LogOp>,
}

impl LogChain {
    fn accumulate(&mut self, key: (Vec<usize>, usize), op: LogOp) {
        if op.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&key) {
            Some(old) => old.add(&op),
            None => op,
        };
        if !merged.is_zero() {
            self.terms.insert(key, merged);
        }
    }

    pub fn add(&self, other: &LogChain) -> LogChain {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.accumulate(k.clone(), v.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `P ⊗ (v_1 ∧ … ∧ v_p) ⊗ m` with arbitrary fields and section `m ∈ O^r`.
#[derive(Clone, Debug)]
pub struct PureChain {
    pub op: LogOp,
    pub fields: Vec<LogField>,
    pub section: Vec<QPoly>,
}

impl LogAlgebra {
    /// Rewrites a pure chain in the basis `θ_S ⊗ f_c`, moving functions into `P`.
    pub fn normalize(&self, pure: &PureChain) -> LogChain {
        let p = pure.fields.len();
        let mut out = LogChain::default();
        for s in combinations(self.n, p) {
            let g = if p == 0 {
                MultiPoly::one(self.vars.clone())
            } else {
                let rows: Vec<Vec<QPoly>> = pure
                    .fields
                    .iter()
                    .map(|v| s.iter().map(|&i| v.coeffs[i].clone()).collect())
                    .collect();
                poly_det(&rows, &self.vars)
            };
            if g.is_zero() {
                continue;
            }
            for (c, h) in pure.section.iter().enumerate() {
                let f = &g * h;
                if f.is_zero() {
                    continue;
                }
                out.accumulate((s.clone(), c), self.mul(&pure.op, &self.function(&f)));
            }
        }
        out
    }

    /// The three-term differential on a pure chain.
    pub fn epsilon_general(&self, pure: &PureChain) -> LogChain {
        let p = pure.fields.len();
        let mut out = LogChain::default();
        for i in 0..p {
            let sign = if i % 2 == 0 {
                Rational::one()
            } else {
                -Rational::one()
            };
            let rest: Vec<LogField> = pure
                .fields
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, v)| v.clone())
                .collect();
            let first = PureChain {
                op: self
                    .mul(&pure.op, &self.field_op(&pure.fields[i]))
                    .scale(&sign),
                fields: rest.clone(),
                section: pure.section.clone(),
            };
            out = out.add(&self.normalize(&first));
            let acted: Vec<QPoly> = pure
                .section
                .iter()
                .map(|h| self.field_apply(&pure.fields[i], h))
                .collect();
            let second = PureChain {
                op: pure.op.scale(&-sign),
                fields: rest,
                section: acted,
            };
            out = out.add(&self.normalize(&second));
        }
        for i in 0..p {
            for j in i + 1..p {
                let sign = if (i + j) % 2 == 0 {
                    Rational::one()
                } else {
                    -Rational::one()
                };
                let mut fields = vec![self.bracket(&pure.fields[i], &pure.fields[j])];
                fields.extend(
                    pure.fields
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != i && *k != j)
                        .map(|(_, v)| v.clone()),
                );
                let third = PureChain {
                    op: pure.op.scale(&sign),
                    fields,
                    section: pure.section.clone(),
                };
                out = out.add(&self.normalize(&third));
            }
        }
        out
    }

    /// The differential on basis chains: `P ⊗ θ_S ⊗ f ↦ Σ (−1)^k P θ_{s_k} ⊗ θ_{S∖s_k} ⊗ f`.
    pub fn epsilon_basis(&self, chain: &LogChain) -> LogChain {
        let mut out = LogChain::default();
        for ((s, c), op) in &chain.terms {
            for (k, &axis) in s.iter().enumerate() {
                let sign = if k % 2 == 0 {
                    Rational::one()
                } else {
                    -Rational::one()
                };
                let rest: Vec<usize> = s.iter().copied().filter(|&x| x != axis).collect();
                out.accumulate((rest, *c), self.mul(op, &self.theta(axis)).scale(&sign));
            }
        }
        out
    }

    /// A random pure chain with small integer data.
    pub fn random_pure<R: Rng>(
        &self,
        rng: &mut R,
        p: usize,
        rank: usize,
        degree: u32,
    ) -> PureChain {
        let rand_poly = |rng: &mut R| {
            let mut g = MultiPoly::zero(self.vars.clone());
            for _ in 0..3 {
                let exps: Vec<u32> = (0..self.n).map(|_| rng.gen_range(0..=degree)).collect();
                g.add_term(exps, int(rng.gen_range(-3..=3)));
            }
            g
        };
        let mut op = LogOp::default();
        for _ in 0..2 {
            let x: Vec<u32> = (0..self.n).map(|_| rng.gen_range(0..=degree)).collect();
            let t: Vec<u32> = (0..self.n).map(|_| rng.gen_range(0..=1)).collect();
            op.add_term((x, t), int(rng.gen_range(1..=3)));
        }
        let fields = (0..p)
            .map(|_| LogField {
                coeffs: (0..self.n).map(|_| rand_poly(rng)).collect(),
            })
            .collect();
        let section = (0..rank).map(|_| rand_poly(rng)).collect();
        PureChain {
            op,
            fields,
            section,
        }
    }
}

/// Basis element `x^α θ^β ⊗ θ_S ⊗ f_c` of a truncated slot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LogBasisElement {
    pub x: Vec<u32>,
    pub theta: Vec<u32>,
    pub wedge: Vec<usize>,
    pub component: usize,
}

/// Truncation parameters for the matrix form of the complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LogSpencerOptions {
    /// Largest operator order `|β|` kept.
    pub max_order: usize,
    /// Largest monomial degree `|α|` kept.
    pub x_degree: usize,
}

impl Default for LogSpencerOptions {
    fn default() -> Self {
        LogSpencerOptions {
            max_order: 3,
            x_degree: 0,
        }
    }
}

/// Slots `(t, p)` hold `x^α θ^β ⊗ θ_S ⊗ f_c` with `|β| = t`, `|S| = p`;
/// the differential maps `(t, p) → (t+1, p−1)`.
#[derive(Clone, Debug)]
pub struct LogSpencerComplex {
    pub algebra: LogAlgebra,
    pub rank: usize,
    pub depth: usize,
    pub options: LogSpencerOptions,
    pub bases: BTreeMap<(usize, usize), Vec<LogBasisElement>>,
    pub differentials: BTreeMap<(usize, usize), QMatrix>,
    pub delta_squared_verified: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LogCohomologyEntry {
    pub order: usize,
    pub wedge: usize,
    pub space: usize,
    pub dim: usize,
}

fn monomials_up_to(n: usize, d: usize) -> Vec<Vec<u32>> {
    (0..=d).flat_map(|k| multi_indices(n, k)).collect()
}

pub fn build_log_spencer(
    module_rank: usize,
    n: usize,
    divisor_axes: &[usize],
    depth: usize,
    options: LogSpencerOptions,
) -> LogSpencerComplex {
    let algebra = LogAlgebra::new(n, divisor_axes);
    let depth = depth.min(n);
    let xs = monomials_up_to(n, options.x_degree);
    let mut bases = BTreeMap::new();
    for t in 0..=options.max_order {
        for p in 0..=depth {
            let mut b = Vec::new();
            for wedge in combinations(n, p) {
                for theta in multi_indices(n, t) {
                    for x in &xs {
                        for component in 0..module_rank {
                            b.push(LogBasisElement {
                                x: x.clone(),
                                theta: theta.clone(),
                                wedge: wedge.clone(),
                                component,
                            });
                        }
                    }
                }
            }
            bases.insert((t, p), b);
        }
    }
    let mut differentials = BTreeMap::new();
    for t in 0..options.max_order {
        for p in 1..=depth {
            let src = &bases[&(t, p)];
            let tgt = &bases[&(t + 1, p - 1)];
            let index: HashMap<&LogBasisElement, usize> =
                tgt.iter().enumerate().map(|(i, e)| (e, i)).collect();
            let mut mat = Matrix::zeros(tgt.len(), src.len());
            for (col, e) in src.iter().enumerate() {
                for (k, &axis) in e.wedge.iter().enumerate() {
                    let mut theta = e.theta.clone();
                    theta[axis] += 1;
                    let wedge: Vec<usize> =
                        e.wedge.iter().copied().filter(|&a| a != axis).collect();
                    let image = LogBasisElement {
                        x: e.x.clone(),
                        theta,
                        wedge,
                        component: e.component,
                    };
                    let row = index[&image];
                    mat.set(
                        row,
                        col,
                        if k % 2 == 0 {
                            Rational::one()
                        } else {
                            -Rational::one()
                        },
                    );
                }
            }
            differentials.insert((t, p), mat);
        }
    }
    let mut cx = LogSpencerComplex {
        algebra,
        rank: module_rank,
        depth,
        options,
        bases,
        differentials,
        delta_squared_verified: false,
    };
    cx.delta_squared_verified = cx.verify_delta_squared();
    cx
}

impl LogSpencerComplex {
    pub fn space_dim(&self, t: usize, p: usize) -> usize {
        self.bases.get(&(t, p)).map_or(0, Vec::len)
    }

    pub fn verify_delta_squared(&self) -> bool {
        self.differentials.iter().all(|(&(t, p), d1)| {
            match self.differentials.get(&(t + 1, p.wrapping_sub(1))) {
                Some(d2) if p >= 2 => d2.mul(d1).is_zero(),
                _ => true,
            }
        })
    }

    /// Cohomology at every slot whose incoming and outgoing maps are both present.
    pub fn cohomology(&self) -> Vec<LogCohomologyEntry> {
        let mut out = Vec::new();
        for (&(t, p), basis) in &self.bases {
            let out_rank = if p == 0 {
                0
            } else {
                match self.differentials.get(&(t, p)) {
                    Some(d) => d.rank(),
                    None => continue,
                }
            };
            let in_rank = if t == 0 || p == self.algebra.n {
                0
            } else {
                match self.differentials.get(&(t - 1, p + 1)) {
                    Some(d) => d.rank(),
                    None => continue,
                }
            };
            out.push(LogCohomologyEntry {
                order: t,
                wedge: p,
                space: basis.len(),
                dim: basis.len() - out_rank - in_rank,
            });
        }
        out
    }

    /// The matrix of the basis differential applied to a chain given in slot
    /// `(t, p)` coordinates, for cross-checking against [`LogAlgebra::epsilon_basis`].
    pub fn chain_to_vector(&self, t: usize, p: usize, chain: &LogChain) -> Option<Vec<Rational>> {
        let basis = self.bases.get(&(t, p))?;
        let index: HashMap<&LogBasisElement, usize> =
            basis.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut v = vec![Rational::zero(); basis.len()];
        for ((wedge, c), op) in &chain.terms {
            for ((x, theta), coeff) in &op.terms {
                let e = LogBasisElement {
                    x: x.clone(),
                    theta: theta.clone(),
                    wedge: wedge.clone(),
                    component: *c,
                };
                v[*index.get(&e)?] += coeff;
            }
        }
        Some(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn euler_commutation() {
        let a = LogAlgebra::new(1, &[1]);
        let x = a.function(&MultiPoly::var(a.vars.clone(), 0));
        // θ x = x θ + x
        let lhs = a.mul(&a.theta(0), &x);
        let rhs = a.mul(&x, &a.theta(0)).add(&x);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn plain_commutation() {
        let a = LogAlgebra::new(1, &[]);
        let x = a.function(&MultiPoly::var(a.vars.clone(), 0));
        let one = a.function(&MultiPoly::one(a.vars.clone()));
        assert_eq!(a.mul(&a.theta(0), &x), a.mul(&x, &a.theta(0)).add(&one));
    }

    #[test]
    fn general_formula_matches_basis_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for axes in [vec![], vec![1], vec![1, 2]] {
            let a = LogAlgebra::new(2, &axes);
            for p in 0..=2 {
                for _ in 0..4 {
                    let pure = a.random_pure(&mut rng, p, 2, 1);
                    let lhs = a.epsilon_general(&pure);
                    let rhs = a.epsilon_basis(&a.normalize(&pure));
                    assert_eq!(lhs, rhs, "axes {axes:?}, p {p}");
                }
            }
        }
    }

    #[test]
    fn matrices_square_to_zero() {
        let cx = build_log_spencer(
            1,
            2,
            &[1],
            2,
            LogSpencerOptions {
                max_order: 3,
                x_degree: 1,
            },
        );
        assert!(cx.delta_squared_verified);
    }

    fn stirling2(k: usize, j: usize) -> i64 {
        let mut t = vec![vec![0i64; k + 1]; k + 1];
        t[0][0] = 1;
        for a in 1..=k {
            for b in 1..=a {
                t[a][b] = b as i64 * t[a - 1][b] + t[a - 1][b - 1];
            }
        }
        t[k][j]
    }

    #[test]
    fn euler_powers_match_stirling_expansion() {
        let a = LogAlgebra::new(1, &[1]);
        for k in 1..=6usize {
            let chain = LogChain {
                terms: BTreeMap::from([(
                    (vec![0], 0),
                    LogOp {
                        terms: BTreeMap::from([((vec![0], vec![k as u32 - 1]), Rational::one())]),
                    },
                )]),
            };
            let image = a.epsilon_basis(&chain);
            let op = &image.terms[&(vec![], 0)];
            let weyl = a.to_weyl(op);
            for j in 0..=k {
                let expected = int(stirling2(k, j));
                let got = weyl
                    .get(&(vec![j as u32], vec![j as u32]))
                    .cloned()
                    .unwrap_or_else(Rational::zero);
                assert_eq!(got, expected, "k={k} j={j}");
            }
            assert_eq!(weyl.len(), k);
        }
    }

    #[test]
    fn free_module_resolution_is_exact() {
        for axes in [vec![], vec![1], vec![1, 2]] {
            let cx = build_log_spencer(
                2,
                2,
                &axes,
                2,
                LogSpencerOptions {
                    max_order: 3,
                    x_degree: 1,
                },
            );
            for e in cx.cohomology() {
                let expected = if e.order == 0 && e.wedge == 0 {
                    e.space
                } else {
                    0
                };
                assert_eq!(e.dim, expected, "{e:?}");
            }
        }
    }
}
