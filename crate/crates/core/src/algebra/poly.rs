//! Sparse multivariate polynomials with canonical term storage.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::Field;

/// Exponent vector, one entry per ring variable.
pub type Monomial = Vec<u32>;

/// Ordered variable names shared by every polynomial of a ring.
pub type VarList = Arc<[String]>;

pub fn var_list<S: AsRef<str>>(names: &[S]) -> VarList {
    names
        .iter()
        .map(|s| s.as_ref().to_string())
        .collect::<Vec<_>>()
        .into()
}

/// Monomial orders supported by the Gröbner kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MonomialOrder {
    /// Graded reverse lexicographic; ties go to the smaller last exponent.
    #[default]
    DegRevLex,
    Lex,
}

impl MonomialOrder {
    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        match self {
            MonomialOrder::Lex => a.cmp(b),
            MonomialOrder::DegRevLex => {
                let da: u64 = a.iter().map(|&e| e as u64).sum();
                let db: u64 = b.iter().map(|&e| e as u64).sum();
                da.cmp(&db).then_with(|| {
                    for (x, y) in a.iter().zip(b).rev() {
                        if x != y {
                            return y.cmp(x);
                        }
                    }
                    Ordering::Equal
                })
            }
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            MonomialOrder::DegRevLex => "degrevlex",
            MonomialOrder::Lex => "lex",
        }
    }
}

pub fn monomial_degree(m: &[u32]) -> u32 {
    m.iter().sum()
}

pub fn monomial_divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn monomial_lcm(a: &[u32], b: &[u32]) -> Monomial {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

/// A polynomial over `F` in a named, ordered set of variables.
///
/// Terms live in a `BTreeMap` keyed by exponent vector, so two equal
/// polynomials always iterate (and print) identically.
#[derive(Clone, PartialEq)]
pub struct MultiPoly<F> {
    vars: VarList,
    terms: BTreeMap<Monomial, F>,
}

impl<F: Field> MultiPoly<F> {
    pub fn zero(vars: VarList) -> Self {
        MultiPoly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: VarList, c: F) -> Self {
        let n = vars.len();
        Self::monomial(vars, vec![0; n], c)
    }

    pub fn one(vars: VarList) -> Self {
        Self::constant(vars, F::one())
    }

    pub fn var(vars: VarList, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::monomial(vars, e, F::one())
    }

    pub fn monomial(vars: VarList, exps: Monomial, c: F) -> Self {
        assert_eq!(
            exps.len(),
            vars.len(),
            "exponent vector length must match the ring"
        );
        let mut terms = BTreeMap::new();
        if !c.is_negligible() {
            terms.insert(exps, c);
        }
        MultiPoly { vars, terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, F)>>(vars: VarList, terms: I) -> Self {
        let mut p = Self::zero(vars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &VarList {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &F)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &[u32]) -> F {
        self.terms.get(m).cloned().unwrap_or_else(F::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    /// The constant value when the polynomial has no variable terms.
    pub fn constant_value(&self) -> Option<F> {
        if self.is_constant() {
            Some(self.coefficient(&vec![0; self.nvars()]))
        } else {
            None
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| monomial_degree(m)).max()
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m[i]).max().unwrap_or(0)
    }

    /// Adds `c·x^m` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: F) {
        debug_assert_eq!(m.len(), self.nvars());
        if c.is_negligible() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_negligible() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn same_ring(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars
    }

    fn check_ring(&self, other: &Self) {
        assert!(
            self.same_ring(other),
            "polynomial ring mismatch: {:?} vs {:?}",
            self.vars,
            other.vars
        );
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_negligible() {
            return Self::zero(self.vars.clone());
        }
        Self::from_terms(
            self.vars.clone(),
            self.terms
                .iter()
                .map(|(m, a)| (m.clone(), a.clone() * c.clone())),
        )
    }

    pub fn mul_term(&self, m: &[u32], c: &F) -> Self {
        Self::from_terms(
            self.vars.clone(),
            self.terms.iter().map(|(e, a)| {
                (
                    e.iter().zip(m).map(|(x, y)| x + y).collect(),
                    a.clone() * c.clone(),
                )
            }),
        )
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.vars.clone());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn leading_term(&self, order: MonomialOrder) -> Option<(&Monomial, &F)> {
        self.terms.iter().max_by(|a, b| order.cmp(a.0, b.0))
    }

    pub fn eval(&self, point: &[F]) -> F {
        assert_eq!(point.len(), self.nvars());
        let mut acc = F::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m) {
                for _ in 0..e {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Replaces each variable by a polynomial of a (possibly different) ring.
    pub fn substitute(&self, images: &[MultiPoly<F>]) -> MultiPoly<F> {
        assert_eq!(images.len(), self.nvars());
        let target = images
            .first()
            .map(|p| p.vars.clone())
            .unwrap_or_else(|| self.vars.clone());
        let mut out = MultiPoly::zero(target.clone());
        let mut power_cache: Vec<Vec<MultiPoly<F>>> = images
            .iter()
            .map(|p| vec![MultiPoly::one(p.vars.clone())])
            .collect();
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(target.clone(), c.clone());
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while power_cache[i].len() <= e as usize {
                    let next = power_cache[i].last().unwrap() * &images[i];
                    power_cache[i].push(next);
                }
                t = &t * &power_cache[i][e as usize];
            }
            out = &out + &t;
        }
        out
    }

    /// Substitutes a value for variable `i`, keeping the ring unchanged.
    pub fn partial_eval(&self, i: usize, value: &F) -> Self {
        let mut out = Self::zero(self.vars.clone());
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for _ in 0..m[i] {
                t = t * value.clone();
            }
            let mut e = m.clone();
            e[i] = 0;
            out.add_term(e, t);
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Self {
        Self::from_terms(
            self.vars.clone(),
            self.terms.iter().filter(|(m, _)| m[i] > 0).map(|(m, c)| {
                let mut e = m.clone();
                e[i] -= 1;
                (e, c.clone() * F::from_i64(m[i] as i64))
            }),
        )
    }

    /// Re-embeds into `target`, sending variable `i` to `target[map[i]]`.
    pub fn embed(&self, target: VarList, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.nvars());
        let n = target.len();
        Self::from_terms(
            target,
            self.terms.iter().map(|(m, c)| {
                let mut e = vec![0; n];
                for (i, &x) in m.iter().enumerate() {
                    e[map[i]] += x;
                }
                (e, c.clone())
            }),
        )
    }

    /// Degree of homogeneity in the variables of `subset`, if homogeneous there.
    pub fn homogeneous_degree_in(&self, subset: &[usize]) -> Option<u32> {
        let mut deg = None;
        for m in self.terms.keys() {
            let d: u32 = subset.iter().map(|&i| m[i]).sum();
            match deg {
                None => deg = Some(d),
                Some(d0) if d0 != d => return None,
                _ => {}
            }
        }
        Some(deg.unwrap_or(0))
    }

    pub fn is_homogeneous_in(&self, subset: &[usize]) -> bool {
        self.homogeneous_degree_in(subset).is_some()
    }

    /// Scales so the leading coefficient under `order` is one.
    pub fn monic(&self, order: MonomialOrder) -> Self {
        match self.leading_term(order) {
            Some((_, c)) => self.scale(&c.inv()),
            None => self.clone(),
        }
    }

    pub fn map_coefficients<G: Field>(&self, f: impl Fn(&F) -> G) -> MultiPoly<G> {
        MultiPoly::from_terms(
            self.vars.clone(),
            self.terms.iter().map(|(m, c)| (m.clone(), f(c))),
        )
    }
}

impl<F: Field> fmt::Display for MultiPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by(|a, b| MonomialOrder::DegRevLex.cmp(b.0, a.0));
        for (k, (m, c)) in ordered.into_iter().enumerate() {
            let text = c.to_string();
            let (negative, mag) = match text.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, text),
            };
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let factors: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        self.vars[i].clone()
                    } else {
                        format!("{}^{}", self.vars[i], e)
                    }
                })
                .collect();
            let unit = mag == "1";
            if factors.is_empty() {
                write!(f, "{}", mag)?;
            } else if unit {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl<F: Field> fmt::Debug for MultiPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.vars.join(","), self)
    }
}

impl<'a, F: Field> Add<&'a MultiPoly<F>> for &'a MultiPoly<F> {
    type Output = MultiPoly<F>;
    fn add(self, rhs: &'a MultiPoly<F>) -> MultiPoly<F> {
        self.check_ring(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a, F: Field> Sub<&'a MultiPoly<F>> for &'a MultiPoly<F> {
    type Output = MultiPoly<F>;
    fn sub(self, rhs: &'a MultiPoly<F>) -> MultiPoly<F> {
        self.check_ring(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a, F: Field> Mul<&'a MultiPoly<F>> for &'a MultiPoly<F> {
    type Output = MultiPoly<F>;
    fn mul(self, rhs: &'a MultiPoly<F>) -> MultiPoly<F> {
        self.check_ring(rhs);
        let mut out = MultiPoly::zero(self.vars.clone());
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let e: Monomial = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<F: Field> Neg for &MultiPoly<F> {
    type Output = MultiPoly<F>;
    fn neg(self) -> MultiPoly<F> {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl<F: Field> $tr<MultiPoly<F>> for MultiPoly<F> {
            type Output = MultiPoly<F>;
            fn $method(self, rhs: MultiPoly<F>) -> MultiPoly<F> {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<F: Field> Neg for MultiPoly<F> {
    type Output = MultiPoly<F>;
    fn neg(self) -> MultiPoly<F> {
        -&self
    }
}

/// Determinant of a square matrix of polynomials by cofactor expansion.
pub fn poly_det<F: Field>(rows: &[Vec<MultiPoly<F>>], vars: &VarList) -> MultiPoly<F> {
    let n = rows.len();
    if n == 0 {
        return MultiPoly::one(vars.clone());
    }
    if n == 1 {
        return rows[0][0].clone();
    }
    if n == 2 {
        return &(&rows[0][0] * &rows[1][1]) - &(&rows[0][1] * &rows[1][0]);
    }
    let mut acc = MultiPoly::zero(vars.clone());
    for j in 0..n {
        if rows[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<MultiPoly<F>>> = rows[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = &rows[0][j] * &poly_det(&minor, vars);
        acc = if j % 2 == 0 {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    acc
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::{int, rat};
    use crate::Rational;

    fn ring() -> VarList {
        var_list(&["x", "y"])
    }

    fn x() -> MultiPoly<Rational> {
        MultiPoly::var(ring(), 0)
    }
    fn y() -> MultiPoly<Rational> {
        MultiPoly::var(ring(), 1)
    }

    #[test]
    fn degrevlex_breaks_ties_on_last_variable() {
        let o = MonomialOrder::DegRevLex;
        // x*z < y^2 in degrevlex on (x,y,z)
        assert_eq!(o.cmp(&[1, 0, 1], &[0, 2, 0]), Ordering::Less);
        assert_eq!(o.cmp(&[2, 0, 0], &[1, 1, 0]), Ordering::Greater);
        assert_eq!(
            MonomialOrder::Lex.cmp(&[1, 0, 0], &[0, 5, 5]),
            Ordering::Greater
        );
    }

    #[test]
    fn arithmetic_and_display() {
        let p = &(&x() * &x()) - &y().scale(&rat(1, 2));
        assert_eq!(p.to_string(), "x^2 - 1/2*y");
        let q = &p - &p;
        assert!(q.is_zero());
        assert_eq!(p.derivative(0).to_string(), "2*x");
        assert_eq!(p.eval(&[int(2), int(4)]), int(2));
    }

    #[test]
    fn substitution_and_embedding() {
        let p = &x() * &y();
        let big = var_list(&["a", "x", "b", "y"]);
        let e = p.embed(big.clone(), &[1, 3]);
        assert_eq!(e.to_string(), "x*y");
        let s = p.substitute(&[&x() + &y(), &x() - &y()]);
        assert_eq!(s, &(&x() * &x()) - &(&y() * &y()));
    }

    #[test]
    fn determinant_of_polynomial_matrix() {
        let m = vec![vec![x(), y()], vec![-&y(), x()]];
        let d = poly_det(&m, &ring());
        assert_eq!(d, &(&x() * &x()) + &(&y() * &y()));
    }

    #[test]
    fn homogeneity_detection() {
        let p = &(&x() * &x()) + &(&x() * &y());
        assert_eq!(p.homogeneous_degree_in(&[0, 1]), Some(2));
        assert_eq!(p.homogeneous_degree_in(&[1]), None);
    }

    #[test]
    fn combinations_enumerate_subsets() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }
}
