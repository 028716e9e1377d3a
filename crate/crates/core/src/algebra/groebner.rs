//! Polynomial ideals and Buchberger completion.
//!
//! Polynomials are converted to term vectors sorted by the active monomial
//! order for the duration of a completion, which keeps reduction steps to a
//! single merge pass.

use std::cmp::Ordering;

use thiserror::Error;

use super::field::Field;
use super::poly::{
    monomial_divides, monomial_lcm, var_list, Monomial, MonomialOrder, MultiPoly, VarList,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("ambient mismatch: polynomial ring [{found}] differs from ideal ring [{expected}]")]
    AmbientMismatch { expected: String, found: String },
}

/// A reduced Gröbner basis tagged with the order it was computed for.
#[derive(Clone, PartialEq)]
pub struct GroebnerBasis<F> {
    pub order: MonomialOrder,
    pub polys: Vec<MultiPoly<F>>,
}

impl<F: Field> GroebnerBasis<F> {
    pub fn is_unit(&self) -> bool {
        self.polys.iter().any(|p| !p.is_zero() && p.is_constant())
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.polys
            .iter()
            .filter_map(|p| p.leading_term(self.order).map(|(m, _)| m.clone()))
            .collect()
    }
}

/// Krull dimension of `k[vars]/I`, or the empty-variety sentinel for the unit ideal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdealDimension {
    EmptyVariety,
    Dim(usize),
}

impl IdealDimension {
    pub fn value(&self) -> Option<usize> {
        match self {
            IdealDimension::Dim(d) => Some(*d),
            IdealDimension::EmptyVariety => None,
        }
    }
}

#[derive(Clone)]
pub struct PolyIdeal<F> {
    vars: VarList,
    generators: Vec<MultiPoly<F>>,
    cache: Option<GroebnerBasis<F>>,
}

type Terms<F> = Vec<(Monomial, F)>;

fn sorted_terms<F: Field>(p: &MultiPoly<F>, order: MonomialOrder) -> Terms<F> {
    let mut t: Terms<F> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
    t.sort_by(|a, b| order.cmp(&b.0, &a.0));
    t
}

fn from_terms<F: Field>(vars: &VarList, t: Terms<F>) -> MultiPoly<F> {
    MultiPoly::from_terms(vars.clone(), t)
}

/// `a - c·x^shift·b`, both sorted descending.
fn sub_scaled<F: Field>(
    a: &Terms<F>,
    b: &Terms<F>,
    c: &F,
    shift: &[u32],
    order: MonomialOrder,
) -> Terms<F> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let shifted = b.iter().map(|(m, k)| {
        let e: Monomial = m.iter().zip(shift).map(|(x, y)| x + y).collect();
        (e, k.clone() * c.clone())
    });
    let mut ia = a.iter().peekable();
    let mut ib = shifted.peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => break,
            (Some(_), None) => out.push(ia.next().unwrap().clone()),
            (None, Some(_)) => {
                let (m, k) = ib.next().unwrap();
                out.push((m, -k));
            }
            (Some((ma, _)), Some((mb, _))) => match order.cmp(ma, mb) {
                Ordering::Greater => out.push(ia.next().unwrap().clone()),
                Ordering::Less => {
                    let (m, k) = ib.next().unwrap();
                    out.push((m, -k));
                }
                Ordering::Equal => {
                    let (m, ka) = ia.next().unwrap().clone();
                    let (_, kb) = ib.next().unwrap();
                    let v = ka - kb;
                    if !v.is_negligible() {
                        out.push((m, v));
                    }
                }
            },
        }
    }
    out
}

/// Full reduction of `p` by `basis` (each basis element monic, sorted).
fn reduce_terms<F: Field>(mut p: Terms<F>, basis: &[Terms<F>], order: MonomialOrder) -> Terms<F> {
    let mut rem: Terms<F> = Vec::new();
    while let Some((lm, lc)) = p.first().cloned() {
        let divisor = basis.iter().find(|g| monomial_divides(&g[0].0, &lm));
        match divisor {
            Some(g) => {
                let shift: Monomial = lm.iter().zip(&g[0].0).map(|(a, b)| a - b).collect();
                let c = lc / g[0].1.clone();
                p = sub_scaled(&p, g, &c, &shift, order);
            }
            None => {
                rem.push(p.remove(0));
            }
        }
    }
    rem
}

fn monic_terms<F: Field>(mut t: Terms<F>) -> Terms<F> {
    if let Some((_, lc)) = t.first().cloned() {
        let inv = lc.inv();
        for (_, c) in t.iter_mut() {
            *c = c.clone() * inv.clone();
        }
    }
    t
}

fn s_polynomial<F: Field>(a: &Terms<F>, b: &Terms<F>, order: MonomialOrder) -> Terms<F> {
    let l = monomial_lcm(&a[0].0, &b[0].0);
    let sa: Monomial = l.iter().zip(&a[0].0).map(|(x, y)| x - y).collect();
    let sb: Monomial = l.iter().zip(&b[0].0).map(|(x, y)| x - y).collect();
    let zero: Terms<F> = Vec::new();
    let left = sub_scaled(&zero, a, &(-F::one()), &sa, order);
    sub_scaled(&left, b, &F::one(), &sb, order)
}

fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

/// Buchberger completion returning a reduced, monic, sorted basis.
fn buchberger<F: Field>(
    vars: &VarList,
    gens: &[MultiPoly<F>],
    order: MonomialOrder,
) -> Vec<MultiPoly<F>> {
    let mut basis: Vec<Terms<F>> = Vec::new();
    for g in gens {
        let t = reduce_terms(sorted_terms(g, order), &basis, order);
        if !t.is_empty() {
            basis.push(monic_terms(t));
        }
    }
    if basis.iter().any(|g| g[0].0.iter().all(|&e| e == 0)) {
        return vec![MultiPoly::one(vars.clone())];
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    while !pairs.is_empty() {
        // normal selection strategy: smallest lcm first
        let (idx, _) = pairs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let la = monomial_lcm(&basis[a.0][0].0, &basis[a.1][0].0);
                let lb = monomial_lcm(&basis[b.0][0].0, &basis[b.1][0].0);
                order.cmp(&la, &lb).then(a.cmp(b))
            })
            .unwrap();
        let (i, j) = pairs.swap_remove(idx);
        let (li, lj) = (&basis[i][0].0, &basis[j][0].0);
        if coprime(li, lj) {
            continue;
        }
        let l = monomial_lcm(li, lj);
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && monomial_divides(&basis[k][0].0, &l)
                && !pairs.contains(&(i.min(k), i.max(k)))
                && !pairs.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }
        let s = s_polynomial(&basis[i], &basis[j], order);
        let r = reduce_terms(s, &basis, order);
        if r.is_empty() {
            continue;
        }
        let r = monic_terms(r);
        if r[0].0.iter().all(|&e| e == 0) {
            return vec![MultiPoly::one(vars.clone())];
        }
        let n = basis.len();
        basis.push(r);
        for k in 0..n {
            pairs.push((k, n));
        }
    }
    // interreduce
    let mut keep: Vec<Terms<F>> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let redundant = basis.iter().enumerate().any(|(j, h)| {
            j != i && monomial_divides(&h[0].0, &g[0].0) && (h[0].0 != g[0].0 || j < i)
        });
        if !redundant {
            keep.push(g.clone());
        }
    }
    let mut reduced = Vec::with_capacity(keep.len());
    for i in 0..keep.len() {
        let others: Vec<Terms<F>> = keep
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, g)| g.clone())
            .collect();
        let head = keep[i][0].clone();
        let tail = reduce_terms(keep[i][1..].to_vec(), &others, order);
        let mut t = vec![head];
        t.extend(tail);
        reduced.push(monic_terms(t));
    }
    reduced.sort_by(|a, b| order.cmp(&a[0].0, &b[0].0));
    reduced.into_iter().map(|t| from_terms(vars, t)).collect()
}

impl<F: Field> PolyIdeal<F> {
    pub fn new(vars: VarList, generators: Vec<MultiPoly<F>>) -> Result<Self, AlgebraError> {
        for g in &generators {
            if g.vars() != &vars {
                return Err(AlgebraError::AmbientMismatch {
                    expected: vars.join(","),
                    found: g.vars().join(","),
                });
            }
        }
        Ok(PolyIdeal {
            vars,
            generators,
            cache: None,
        })
    }

    pub fn vars(&self) -> &VarList {
        &self.vars
    }

    pub fn generators(&self) -> &[MultiPoly<F>] {
        &self.generators
    }

    pub fn cached_basis(&self) -> Option<&GroebnerBasis<F>> {
        self.cache.as_ref()
    }

    /// Returns a copy of the ideal with the Gröbner cache filled for `order`.
    pub fn groebner_basis(&self, order: MonomialOrder) -> PolyIdeal<F> {
        if let Some(c) = &self.cache {
            if c.order == order {
                return self.clone();
            }
        }
        let polys = buchberger(&self.vars, &self.generators, order);
        PolyIdeal {
            vars: self.vars.clone(),
            generators: self.generators.clone(),
            cache: Some(GroebnerBasis { order, polys }),
        }
    }

    /// The cached basis, computing a degrevlex one when absent.
    pub fn basis(&self) -> GroebnerBasis<F> {
        match &self.cache {
            Some(c) => c.clone(),
            None => GroebnerBasis {
                order: MonomialOrder::DegRevLex,
                polys: buchberger(&self.vars, &self.generators, MonomialOrder::DegRevLex),
            },
        }
    }

    fn check(&self, p: &MultiPoly<F>) -> Result<(), AlgebraError> {
        if p.vars() != &self.vars {
            return Err(AlgebraError::AmbientMismatch {
                expected: self.vars.join(","),
                found: p.vars().join(","),
            });
        }
        Ok(())
    }

    pub fn normal_form(&self, p: &MultiPoly<F>) -> Result<MultiPoly<F>, AlgebraError> {
        self.check(p)?;
        let gb = self.basis();
        let terms: Vec<Terms<F>> = gb.polys.iter().map(|g| sorted_terms(g, gb.order)).collect();
        Ok(from_terms(
            &self.vars,
            reduce_terms(sorted_terms(p, gb.order), &terms, gb.order),
        ))
    }

    pub fn is_unit(&self) -> bool {
        self.basis().is_unit()
    }

    /// Whether some power of `p` lies in the ideal (Rabinowitsch trick).
    pub fn radical_member(&self, p: &MultiPoly<F>) -> Result<bool, AlgebraError> {
        self.check(p)?;
        if p.is_zero() {
            return Ok(true);
        }
        if self.normal_form(p)?.is_zero() {
            return Ok(true);
        }
        let mut names: Vec<String> = self.vars.iter().cloned().collect();
        let mut fresh = String::from("_t");
        while names.contains(&fresh) {
            fresh.push('_');
        }
        names.push(fresh);
        let ext = var_list(&names);
        let map: Vec<usize> = (0..self.vars.len()).collect();
        let mut gens: Vec<MultiPoly<F>> = self
            .generators
            .iter()
            .map(|g| g.embed(ext.clone(), &map))
            .collect();
        let t = MultiPoly::var(ext.clone(), self.vars.len());
        gens.push(&MultiPoly::one(ext.clone()) - &(&t * &p.embed(ext.clone(), &map)));
        Ok(buchberger(&ext, &gens, MonomialOrder::DegRevLex)
            .iter()
            .any(|g| g.is_constant() && !g.is_zero()))
    }

    /// `other ⊆ self` at the level of ideals.
    pub fn contains_ideal(&self, other: &PolyIdeal<F>) -> Result<bool, AlgebraError> {
        for g in &other.generators {
            if !self.normal_form(g)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `V(self) ⊆ V(other)`, i.e. `other ⊆ √self`.
    pub fn variety_contained_in(&self, other: &PolyIdeal<F>) -> Result<bool, AlgebraError> {
        for g in &other.generators {
            if !self.radical_member(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Checks the Buchberger criterion on the cached basis.
    pub fn verify_cache(&self) -> bool {
        let Some(gb) = &self.cache else { return false };
        let terms: Vec<Terms<F>> = gb
            .polys
            .iter()
            .filter(|p| !p.is_zero())
            .map(|g| sorted_terms(g, gb.order))
            .collect();
        for j in 0..terms.len() {
            for i in 0..j {
                let s = s_polynomial(&terms[i], &terms[j], gb.order);
                if !reduce_terms(s, &terms, gb.order).is_empty() {
                    return false;
                }
            }
        }
        self.generators
            .iter()
            .all(|g| reduce_terms(sorted_terms(g, gb.order), &terms, gb.order).is_empty())
    }
}

impl<F: Field> std::fmt::Debug for GroebnerBasis<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroebnerBasis")
            .field("order", &self.order)
            .field("polys", &self.polys)
            .finish()
    }
}

impl<F: Field> std::fmt::Debug for PolyIdeal<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolyIdeal")
            .field("generators", &self.generators)
            .field("cache", &self.cache)
            .finish()
    }
}

/// Membership test by normal form.
pub fn ideal_member<F: Field>(
    p: &MultiPoly<F>,
    ideal: &PolyIdeal<F>,
) -> Result<bool, AlgebraError> {
    Ok(ideal.normal_form(p)?.is_zero())
}

/// Krull dimension from the leading-monomial ideal: the largest set of
/// variables containing the support of no leading monomial.
pub fn ideal_dimension<F: Field>(ideal: &PolyIdeal<F>) -> IdealDimension {
    let gb = ideal.basis();
    if gb.is_unit() {
        return IdealDimension::EmptyVariety;
    }
    let n = ideal.vars().len();
    assert!(n <= 24, "dimension search limited to 24 variables");
    let supports: Vec<u32> = gb
        .leading_monomials()
        .iter()
        .map(|m| {
            m.iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .fold(0u32, |acc, (i, _)| acc | (1 << i))
        })
        .collect();
    let mut best = 0;
    for mask in 0u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        if supports.iter().all(|&s| s & !mask != 0) {
            best = size;
        }
    }
    IdealDimension::Dim(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::int;
    use crate::Rational;

    fn ring(names: &[&str]) -> VarList {
        var_list(names)
    }

    fn v(r: &VarList, i: usize) -> MultiPoly<Rational> {
        MultiPoly::var(r.clone(), i)
    }

    #[test]
    fn principal_ideal_basis() {
        let r = ring(&["x", "y"]);
        let i = PolyIdeal::new(r.clone(), vec![v(&r, 0)])
            .unwrap()
            .groebner_basis(MonomialOrder::DegRevLex);
        assert_eq!(i.cached_basis().unwrap().polys, vec![v(&r, 0)]);
        assert!(i.verify_cache());
    }

    #[test]
    fn unit_ideal_basis() {
        let r = ring(&["x"]);
        let one = MultiPoly::<Rational>::one(r.clone());
        let i = PolyIdeal::new(r.clone(), vec![one.clone()])
            .unwrap()
            .groebner_basis(MonomialOrder::Lex);
        assert_eq!(i.cached_basis().unwrap().polys, vec![one]);
        assert_eq!(ideal_dimension(&i), IdealDimension::EmptyVariety);
    }

    #[test]
    fn twisted_cubic_style_membership() {
        let r = ring(&["x", "y"]);
        let (x, y) = (v(&r, 0), v(&r, 1));
        let i = PolyIdeal::new(r.clone(), vec![&(&x * &x) - &y, &(&y * &y) - &x]).unwrap();
        let x4 = &x.pow(4) - &x;
        assert!(ideal_member(&x4, &i).unwrap());
        for order in [MonomialOrder::DegRevLex, MonomialOrder::Lex] {
            let g = i.groebner_basis(order);
            assert!(g.verify_cache());
            assert!(g.normal_form(&x4).unwrap().is_zero());
        }
    }

    #[test]
    fn membership_examples() {
        let r = ring(&["x", "y"]);
        let (x, y) = (v(&r, 0), v(&r, 1));
        let i = PolyIdeal::new(r.clone(), vec![x.clone()]).unwrap();
        assert!(ideal_member(&MultiPoly::zero(r.clone()), &i).unwrap());
        assert!(ideal_member(&(&x * &y), &i).unwrap());
        assert!(!ideal_member(&(&x + &MultiPoly::one(r.clone())), &i).unwrap());
        let other = ring(&["x", "z"]);
        assert!(matches!(
            ideal_member(&v(&other, 0), &i),
            Err(AlgebraError::AmbientMismatch { .. })
        ));
    }

    #[test]
    fn dimensions() {
        let r = ring(&["x", "y"]);
        let both = PolyIdeal::new(r.clone(), vec![v(&r, 0), v(&r, 1)]).unwrap();
        assert_eq!(ideal_dimension(&both), IdealDimension::Dim(0));
        let line = PolyIdeal::new(r.clone(), vec![v(&r, 0)]).unwrap();
        assert_eq!(ideal_dimension(&line), IdealDimension::Dim(1));
        let r3 = ring(&["x", "y", "z"]);
        let zero =
            PolyIdeal::new(r3.clone(), vec![MultiPoly::<Rational>::zero(r3.clone())]).unwrap();
        assert_eq!(ideal_dimension(&zero), IdealDimension::Dim(3));
    }

    #[test]
    fn radical_membership() {
        let r = ring(&["x", "y"]);
        let x = v(&r, 0);
        let i = PolyIdeal::new(r.clone(), vec![x.pow(3)]).unwrap();
        assert!(!ideal_member(&x, &i).unwrap());
        assert!(i.radical_member(&x).unwrap());
        assert!(!i.radical_member(&v(&r, 1)).unwrap());
    }

    #[test]
    fn scaled_generators_share_a_basis() {
        let r = ring(&["x", "y"]);
        let (x, y) = (v(&r, 0), v(&r, 1));
        let a = PolyIdeal::new(r.clone(), vec![&(&x * &y) - &y, y.pow(2)]).unwrap();
        let b = PolyIdeal::new(
            r.clone(),
            vec![
                (&(&x * &y) - &y).scale(&int(3)),
                &y.pow(2) + &(&(&x * &y) - &y),
            ],
        )
        .unwrap();
        assert_eq!(a.basis().polys, b.basis().polys);
    }
}
