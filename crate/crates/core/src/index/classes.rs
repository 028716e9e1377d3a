//! Chern characters, Todd classes and symbol difference classes.

use std::sync::Arc;

use num_traits::One;
use serde::Serialize;

use crate::Rational;

use super::model::{CharacterClass, CohomologyRingModel};
use super::series::{exp_series, todd_series};
use super::IndexError;

fn series_len(model: &CohomologyRingModel) -> usize {
    model.top_degree as usize + 1
}

fn common_model(
    classes: &[CharacterClass],
    model: &Arc<CohomologyRingModel>,
) -> Result<(), IndexError> {
    if let Some(c) = classes.iter().find(|c| c.model.name != model.name) {
        return Err(IndexError::InvalidArgument(format!(
            "class in model {} used with model {}",
            c.model.name, model.name
        )));
    }
    Ok(())
}

/// `ch = Σ e^{a_i}` over the Chern roots.
pub fn chern_character(
    model: &Arc<CohomologyRingModel>,
    roots: &[CharacterClass],
) -> Result<CharacterClass, IndexError> {
    common_model(roots, model)?;
    let exp = exp_series(series_len(model));
    roots
        .iter()
        .try_fold(CharacterClass::zero(model), |acc, a| {
            acc.add(&a.apply_series(&exp.0)?)
        })
}

/// Power sums `p_1..p_d` from elementary classes `c_1..c_r` (Newton's identities).
pub fn power_sums(
    model: &Arc<CohomologyRingModel>,
    chern: &[CharacterClass],
) -> Result<Vec<CharacterClass>, IndexError> {
    common_model(chern, model)?;
    let d = model.top_degree as usize;
    let c = |k: usize| {
        if k >= 1 && k <= chern.len() {
            chern[k - 1].clone()
        } else {
            CharacterClass::zero(model)
        }
    };
    let mut p: Vec<CharacterClass> = Vec::with_capacity(d);
    for k in 1..=d {
        let sign = |i: usize| {
            if i % 2 == 0 {
                Rational::one()
            } else {
                -Rational::one()
            }
        };
        let mut v = c(k).scale(&(sign(k - 1) * Rational::from_integer((k as i64).into())));
        for i in 1..k {
            v = v.add(&c(i).mul(&p[k - i - 1])?.scale(&sign(i - 1)))?;
        }
        p.push(v);
    }
    Ok(p)
}

/// `ch = r + Σ_k p_k / k!` from the Chern classes of a rank-`r` bundle.
pub fn chern_character_from_classes(
    model: &Arc<CohomologyRingModel>,
    rank: usize,
    chern: &[CharacterClass],
) -> Result<CharacterClass, IndexError> {
    let p = power_sums(model, chern)?;
    let mut ch = CharacterClass::constant(model, Rational::from_integer((rank as i64).into()));
    for (k, pk) in p.iter().enumerate() {
        ch = ch.add(&pk.scale(&super::series::factorial(k + 1).recip()))?;
    }
    Ok(ch)
}

/// `Td = Π a_i / (1 − e^{−a_i})`.
pub fn todd_class(
    model: &Arc<CohomologyRingModel>,
    roots: &[CharacterClass],
) -> Result<CharacterClass, IndexError> {
    common_model(roots, model)?;
    let td = todd_series(series_len(model));
    roots.iter().try_fold(CharacterClass::one(model), |acc, a| {
        acc.mul(&a.apply_series(&td.0)?)
    })
}

/// Todd class from Chern classes via `Td = exp(Σ_k λ_k p_k)`, `λ = log(x/(1−e^{−x}))`.
pub fn todd_from_chern_classes(
    model: &Arc<CohomologyRingModel>,
    chern: &[CharacterClass],
) -> Result<CharacterClass, IndexError> {
    let p = power_sums(model, chern)?;
    let lambda = todd_series(series_len(model)).log();
    let mut log_td = CharacterClass::zero(model);
    for (k, pk) in p.iter().enumerate() {
        log_td = log_td.add(&pk.scale(&lambda.0[k + 1]))?;
    }
    log_td.apply_series(&exp_series(series_len(model)).0)
}

/// Elementary symmetric classes `c_1..c_r` of the given roots.
pub fn chern_classes(
    model: &Arc<CohomologyRingModel>,
    roots: &[CharacterClass],
) -> Result<Vec<CharacterClass>, IndexError> {
    common_model(roots, model)?;
    let mut e = vec![CharacterClass::one(model)];
    for a in roots {
        let mut next = e.clone();
        next.push(CharacterClass::zero(model));
        for k in 1..next.len() {
            next[k] = next[k].add(&e[k - 1].mul(a)?)?;
        }
        e = next;
    }
    Ok(e.into_iter().skip(1).collect())
}

pub fn tangent_roots(model: &Arc<CohomologyRingModel>) -> Vec<CharacterClass> {
    model
        .tangent_roots
        .iter()
        .map(|p| CharacterClass {
            model: model.clone(),
            poly: p.clone(),
        })
        .collect()
}

pub fn tangent_todd(model: &Arc<CohomologyRingModel>) -> Result<CharacterClass, IndexError> {
    todd_class(model, &tangent_roots(model))
}

/// `c_top(T)`, whose integral is the Euler characteristic.
pub fn euler_class(model: &Arc<CohomologyRingModel>) -> Result<CharacterClass, IndexError> {
    let c = chern_classes(model, &tangent_roots(model))?;
    Ok(c.get(model.top_degree as usize - 1)
        .cloned()
        .unwrap_or_else(|| CharacterClass::zero(model)))
}

/// `ch L` for the line bundle with first Chern class `Σ d_i g_i`.
pub fn line_bundle(
    model: &Arc<CohomologyRingModel>,
    degrees: &[i64],
) -> Result<CharacterClass, IndexError> {
    if degrees.len() != model.generators.len() {
        return Err(IndexError::InvalidArgument(format!(
            "model {} needs {} twist degrees, got {}",
            model.name,
            model.generators.len(),
            degrees.len()
        )));
    }
    let c1 = degrees
        .iter()
        .enumerate()
        .fold(CharacterClass::zero(model), |acc, (i, &d)| {
            acc.add(&CharacterClass::generator(
                model,
                i,
                Rational::from_integer(d.into()),
            ))
            .expect("same model")
        });
    chern_character(model, &[c1])
}

/// Zero-section pullback of a symbol class, as `ch(E⁺) − ch(E⁻)` on the model.
#[derive(Clone, Debug)]
pub struct SymbolClass {
    pub label: String,
    pub plus: CharacterClass,
    pub minus: CharacterClass,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolClassSummary {
    pub label: String,
    pub model: String,
    pub plus: String,
    pub minus: String,
}

impl SymbolClass {
    pub fn new(
        label: impl Into<String>,
        plus: CharacterClass,
        minus: CharacterClass,
    ) -> Result<Self, IndexError> {
        plus.sub(&minus)?;
        Ok(SymbolClass {
            label: label.into(),
            plus,
            minus,
        })
    }

    pub fn difference(&self) -> CharacterClass {
        self.plus.sub(&self.minus).expect("checked at construction")
    }

    /// Dolbeault operator twisted by a line bundle of the given degrees.
    pub fn dolbeault(model: &Arc<CohomologyRingModel>, twist: &[i64]) -> Result<Self, IndexError> {
        Self::new(
            format!("dolbeault{twist:?}"),
            line_bundle(model, twist)?,
            CharacterClass::zero(model),
        )
    }

    /// De Rham complex: `Σ (−1)^p ch Λ^p T*` divided through by the Todd class,
    /// using `Π (1 − e^{−a_i})` when the tangent bundle splits.
    pub fn de_rham(model: &Arc<CohomologyRingModel>) -> Result<Self, IndexError> {
        if model.split_tangent {
            let exp = exp_series(series_len(model));
            let mut even = CharacterClass::one(model);
            let mut odd = CharacterClass::zero(model);
            for a in tangent_roots(model) {
                let e = a.scale(&-Rational::one()).apply_series(&exp.0)?;
                let (ne, no) = (even.add(&odd.mul(&e)?)?, odd.add(&even.mul(&e)?)?);
                even = ne;
                odd = no;
            }
            return Self::new("de_rham", even, odd);
        }
        let plus = euler_class(model)?.mul(&tangent_todd(model)?.inverse()?)?;
        Self::new("de_rham", plus, CharacterClass::zero(model))
    }

    pub fn summary(&self) -> SymbolClassSummary {
        SymbolClassSummary {
            label: self.label.clone(),
            model: self.plus.model.name.clone(),
            plus: self.plus.to_string(),
            minus: self.minus.to_string(),
        }
    }
}

/// Whether every monomial sits at or below the top degree.
pub fn truncated(c: &CharacterClass) -> bool {
    c.poly
        .terms()
        .all(|(m, _)| c.model.weight(m) <= c.model.top_degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat};

    #[test]
    fn line_bundle_on_p1() {
        let m = CohomologyRingModel::projective(1);
        let ch = line_bundle(&m, &[3]).unwrap();
        assert_eq!(ch.components()[0].constant_term(), int(1));
        assert_eq!(ch.integrate(), int(3));
        let sum = line_bundle(&m, &[1])
            .unwrap()
            .add(&line_bundle(&m, &[-1]).unwrap())
            .unwrap();
        assert_eq!(sum, CharacterClass::constant(&m, int(2)));
    }

    #[test]
    fn todd_of_p2() {
        let m = CohomologyRingModel::projective(2);
        let td = tangent_todd(&m).unwrap();
        let h = CharacterClass::generator(&m, 0, int(1));
        let expected = CharacterClass::one(&m)
            .add(&h.scale(&rat(3, 2)))
            .unwrap()
            .add(&h.pow(2))
            .unwrap();
        assert_eq!(td, expected);
    }

    #[test]
    fn todd_from_classes_matches_roots() {
        let m = CohomologyRingModel::projective(3);
        let roots = tangent_roots(&m);
        let c = chern_classes(&m, &roots).unwrap();
        assert_eq!(
            todd_from_chern_classes(&m, &c).unwrap(),
            todd_class(&m, &roots).unwrap()
        );
    }

    #[test]
    fn chern_character_from_classes_matches_roots() {
        let m = CohomologyRingModel::projective(3);
        let h = CharacterClass::generator(&m, 0, int(1));
        let roots = vec![
            h.scale(&int(2)),
            h.scale(&int(-1)),
            CharacterClass::zero(&m),
        ];
        let c = chern_classes(&m, &roots).unwrap();
        assert_eq!(
            chern_character_from_classes(&m, 3, &c).unwrap(),
            chern_character(&m, &roots).unwrap()
        );
    }

    #[test]
    fn de_rham_class_on_sphere() {
        let m = CohomologyRingModel::sphere();
        let s = SymbolClass::de_rham(&m).unwrap();
        assert_eq!(s.difference().integrate(), int(2));
    }
}
