//! Cohomology ring presentations used as integration targets.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::algebra::{var_list, MultiPoly, VarList};
use crate::{QPoly, Rational};

use super::IndexError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelGenerator {
    pub name: String,
    /// Complex degree.
    pub degree: u32,
    /// `g^{nilpotency} = 0`.
    pub nilpotency: u32,
}

/// A truncated polynomial ring with monomial relations and a top class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohomologyRingModel {
    pub name: String,
    pub generators: Vec<ModelGenerator>,
    pub top_degree: u32,
    pub top: Vec<u32>,
    /// Virtual Chern roots of the tangent bundle (Euler-sequence style).
    #[serde(skip)]
    pub tangent_roots: Vec<QPoly>,
    /// `true` when `tangent_roots` are the roots of an honest splitting.
    pub split_tangent: bool,
    #[serde(skip)]
    pub ring: VarList,
}

impl CohomologyRingModel {
    fn build(
        name: &str,
        generators: Vec<ModelGenerator>,
        top: Vec<u32>,
        roots: impl Fn(&VarList) -> Vec<QPoly>,
        split: bool,
    ) -> Arc<Self> {
        let names: Vec<String> = generators.iter().map(|g| g.name.clone()).collect();
        let ring = var_list(&names);
        let top_degree = top.iter().zip(&generators).map(|(e, g)| e * g.degree).sum();
        let tangent_roots = roots(&ring);
        Arc::new(CohomologyRingModel {
            name: name.into(),
            generators,
            top_degree,
            top,
            tangent_roots,
            split_tangent: split,
            ring,
        })
    }

    /// `ℙⁿ`: `H = ℚ[h]/(h^{n+1})`, tangent roots `n+1` copies of `h`.
    pub fn projective(n: u32) -> Arc<Self> {
        let g = ModelGenerator {
            name: "h".into(),
            degree: 1,
            nilpotency: n + 1,
        };
        Self::build(
            &format!("P{n}"),
            vec![g],
            vec![n],
            |r| vec![MultiPoly::var(r.clone(), 0); n as usize + 1],
            n == 1,
        )
    }

    /// Flat elliptic curve: `ℚ[ω]/(ω²)`, trivial tangent bundle.
    pub fn elliptic_curve() -> Arc<Self> {
        let g = ModelGenerator {
            name: "w".into(),
            degree: 1,
            nilpotency: 2,
        };
        Self::build(
            "E",
            vec![g],
            vec![1],
            |r| vec![MultiPoly::zero(r.clone())],
            true,
        )
    }

    /// The 2-sphere as the complex curve `ℙ¹`.
    pub fn sphere() -> Arc<Self> {
        let g = ModelGenerator {
            name: "h".into(),
            degree: 1,
            nilpotency: 2,
        };
        Self::build(
            "S2",
            vec![g],
            vec![1],
            |r| vec![MultiPoly::var(r.clone(), 0).scale(&Rational::from_integer(2.into()))],
            true,
        )
    }

    /// Complex torus `E^n` with even cohomology generated by `w1..wn`.
    pub fn torus(n: u32) -> Arc<Self> {
        let gens: Vec<ModelGenerator> = (1..=n)
            .map(|i| ModelGenerator {
                name: format!("w{i}"),
                degree: 1,
                nilpotency: 2,
            })
            .collect();
        Self::build(
            &format!("T{n}"),
            gens,
            vec![1; n as usize],
            |r| vec![MultiPoly::zero(r.clone()); n as usize],
            true,
        )
    }

    pub fn product(a: &CohomologyRingModel, b: &CohomologyRingModel) -> Arc<Self> {
        let rename = |g: &ModelGenerator, other: &CohomologyRingModel, tag: char| {
            let clash = other.generators.iter().any(|o| o.name == g.name);
            ModelGenerator {
                name: if clash {
                    format!("{}{tag}", g.name)
                } else {
                    g.name.clone()
                },
                ..g.clone()
            }
        };
        let mut gens: Vec<ModelGenerator> =
            a.generators.iter().map(|g| rename(g, b, '1')).collect();
        gens.extend(b.generators.iter().map(|g| rename(g, a, '2')));
        let mut top = a.top.clone();
        top.extend(&b.top);
        let na = a.generators.len();
        let nb = b.generators.len();
        let (ra, rb) = (a.tangent_roots.clone(), b.tangent_roots.clone());
        Self::build(
            &format!("{}x{}", a.name, b.name),
            gens,
            top,
            move |r| {
                let ma: Vec<usize> = (0..na).collect();
                let mb: Vec<usize> = (na..na + nb).collect();
                ra.iter()
                    .map(|p| p.embed(r.clone(), &ma))
                    .chain(rb.iter().map(|p| p.embed(r.clone(), &mb)))
                    .collect()
            },
            a.split_tangent && b.split_tangent,
        )
    }

    /// `P<n>`, `E`, `S2`, `T<n>`, or `A*B` / `AxB` products.
    pub fn by_name(name: &str) -> Result<Arc<Self>, IndexError> {
        let name = name.trim();
        if let Some((a, b)) = name
            .split_once(['*', 'x'])
            .filter(|(a, b)| !a.is_empty() && !b.is_empty())
        {
            return Ok(Self::product(&*Self::by_name(a)?, &*Self::by_name(b)?));
        }
        let parse_dim = |s: &str| s.parse::<u32>().ok().filter(|&n| (1..=6).contains(&n));
        match name {
            "E" => Ok(Self::elliptic_curve()),
            "S2" => Ok(Self::sphere()),
            _ => {
                if let Some(n) = name.strip_prefix('P').and_then(parse_dim) {
                    Ok(Self::projective(n))
                } else if let Some(n) = name.strip_prefix('T').and_then(parse_dim) {
                    Ok(Self::torus(n))
                } else {
                    Err(IndexError::InvalidArgument(format!(
                        "unknown cohomology model `{name}`"
                    )))
                }
            }
        }
    }

    pub fn relations(&self) -> Vec<String> {
        self.generators
            .iter()
            .map(|g| format!("{}^{} = 0", g.name, g.nilpotency))
            .collect()
    }

    pub fn weight(&self, m: &[u32]) -> u32 {
        m.iter()
            .zip(&self.generators)
            .map(|(e, g)| e * g.degree)
            .sum()
    }

    /// Drops monomials killed by the relations or above the top degree.
    pub fn reduce(&self, p: &QPoly) -> QPoly {
        MultiPoly::from_terms(
            self.ring.clone(),
            p.terms()
                .filter(|(m, _)| {
                    m.iter()
                        .zip(&self.generators)
                        .all(|(e, g)| *e < g.nilpotency)
                        && self.weight(m) <= self.top_degree
                })
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    pub fn integrate_poly(&self, p: &QPoly) -> Rational {
        p.coefficient(&self.top)
    }
}

/// An element of a model ring.
#[derive(Clone, PartialEq)]
pub struct CharacterClass {
    pub model: Arc<CohomologyRingModel>,
    pub poly: QPoly,
}

impl fmt::Debug for CharacterClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CharacterClass[{}]({})", self.model.name, self.poly)
    }
}

impl fmt::Display for CharacterClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}

impl CharacterClass {
    pub fn new(model: &Arc<CohomologyRingModel>, poly: QPoly) -> Result<Self, IndexError> {
        if poly.vars() != &model.ring {
            return Err(IndexError::InvalidArgument(format!(
                "class ring differs from model {}",
                model.name
            )));
        }
        Ok(CharacterClass {
            poly: model.reduce(&poly),
            model: model.clone(),
        })
    }

    pub fn constant(model: &Arc<CohomologyRingModel>, c: Rational) -> Self {
        CharacterClass {
            poly: MultiPoly::constant(model.ring.clone(), c),
            model: model.clone(),
        }
    }

    pub fn zero(model: &Arc<CohomologyRingModel>) -> Self {
        Self::constant(model, Rational::zero())
    }

    pub fn one(model: &Arc<CohomologyRingModel>) -> Self {
        Self::constant(model, Rational::one())
    }

    /// `c · g_i`.
    pub fn generator(model: &Arc<CohomologyRingModel>, i: usize, c: Rational) -> Self {
        CharacterClass {
            poly: MultiPoly::var(model.ring.clone(), i).scale(&c),
            model: model.clone(),
        }
        .reduced()
    }

    fn reduced(mut self) -> Self {
        self.poly = self.model.reduce(&self.poly);
        self
    }

    fn check(&self, other: &Self) -> Result<(), IndexError> {
        if self.model.name != other.model.name {
            return Err(IndexError::InvalidArgument(format!(
                "classes live in different models ({} and {})",
                self.model.name, other.model.name
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, IndexError> {
        self.check(other)?;
        Ok(CharacterClass {
            poly: &self.poly + &other.poly,
            model: self.model.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, IndexError> {
        self.check(other)?;
        Ok(CharacterClass {
            poly: &self.poly - &other.poly,
            model: self.model.clone(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, IndexError> {
        self.check(other)?;
        Ok(CharacterClass {
            poly: &self.poly * &other.poly,
            model: self.model.clone(),
        }
        .reduced())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        CharacterClass {
            poly: self.poly.scale(c),
            model: self.model.clone(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(&self.model), |acc, _| {
            acc.mul(self).expect("same model")
        })
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn constant_term(&self) -> Rational {
        self.poly.coefficient(&vec![0; self.model.generators.len()])
    }

    /// Graded pieces in degrees `0..=top_degree`.
    pub fn components(&self) -> Vec<CharacterClass> {
        let d = self.model.top_degree as usize;
        let mut out = vec![Self::zero(&self.model); d + 1];
        for (m, c) in self.poly.terms() {
            out[self.model.weight(m) as usize]
                .poly
                .add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn integrate(&self) -> Rational {
        self.model.integrate_poly(&self.poly)
    }

    /// Evaluates a power series at this class, which must be nilpotent.
    pub fn apply_series(&self, coeffs: &[Rational]) -> Result<Self, IndexError> {
        if !self.constant_term().is_zero() {
            return Err(IndexError::InvalidArgument(
                "series argument must have no constant term".into(),
            ));
        }
        let mut acc = Self::zero(&self.model);
        let mut power = Self::one(&self.model);
        for c in coeffs {
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power.scale(c))?;
            power = power.mul(self)?;
        }
        Ok(acc)
    }

    /// Inverse of a class with invertible constant term.
    pub fn inverse(&self) -> Result<Self, IndexError> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(IndexError::InvalidArgument(
                "class with zero constant term is not invertible".into(),
            ));
        }
        // (c0 (1 + n))^{-1} = c0^{-1} Σ (−n)^k
        let n = self.scale(&c0.recip()).sub(&Self::one(&self.model))?;
        let coeffs: Vec<Rational> = (0..=self.model.top_degree)
            .map(|k| {
                if k % 2 == 0 {
                    Rational::one()
                } else {
                    -Rational::one()
                }
            })
            .collect();
        Ok(n.apply_series(&coeffs)?.scale(&c0.recip()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::int;

    #[test]
    fn top_classes_integrate_to_one() {
        for name in ["P1", "P2", "P3", "E", "S2", "T2", "P1xP1", "P1*E"] {
            let m = CohomologyRingModel::by_name(name).unwrap();
            let top = CharacterClass::new(
                &m,
                MultiPoly::monomial(m.ring.clone(), m.top.clone(), int(1)),
            )
            .unwrap();
            assert_eq!(top.integrate(), int(1), "{name}");
        }
    }

    #[test]
    fn relations_truncate_products() {
        let m = CohomologyRingModel::projective(2);
        let h = CharacterClass::generator(&m, 0, int(1));
        assert!(!h.pow(2).is_zero());
        assert!(h.pow(3).is_zero());
    }

    #[test]
    fn product_names_are_suffixed() {
        let m = CohomologyRingModel::by_name("P1xP1").unwrap();
        assert_eq!(m.ring.to_vec(), vec!["h1", "h2"]);
        assert_eq!(m.top_degree, 2);
    }

    #[test]
    fn inverse_of_unipotent_class() {
        let m = CohomologyRingModel::projective(3);
        let x = CharacterClass::one(&m)
            .add(&CharacterClass::generator(&m, 0, int(2)))
            .unwrap();
        assert_eq!(
            x.mul(&x.inverse().unwrap()).unwrap(),
            CharacterClass::one(&m)
        );
    }
}
