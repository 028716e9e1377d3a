//! Mixed-type classification over a semialgebraic base region.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::rational_string;
use crate::jet::PdeSystem;
use crate::{QPoly, Rational};

use super::char_variety::{characteristic_ideal, ellipticity_polynomial, CharVariety};
use super::cone::ConeSpec;
use super::definiteness::decide_real_zeros;
use super::grid::{base_points, compass_directions, directions, CovectorSample};
use super::hyperbolic::{hyperbolic_at, HyperbolicStatus};
use super::MicrolocalError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignCondition {
    Positive,
    NonNegative,
    Negative,
    NonPositive,
    Zero,
    NonZero,
}

impl SignCondition {
    pub fn holds(self, v: &Rational) -> bool {
        match self {
            SignCondition::Positive => v.is_positive(),
            SignCondition::NonNegative => !v.is_negative(),
            SignCondition::Negative => v.is_negative(),
            SignCondition::NonPositive => !v.is_positive(),
            SignCondition::Zero => v.is_zero(),
            SignCondition::NonZero => !v.is_zero(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            SignCondition::Positive => "> 0",
            SignCondition::NonNegative => ">= 0",
            SignCondition::Negative => "< 0",
            SignCondition::NonPositive => "<= 0",
            SignCondition::Zero => "= 0",
            SignCondition::NonZero => "!= 0",
        }
    }
}

/// Conjunction of sign conditions on polynomials in the base variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Region {
    pub conditions: Vec<(QPoly, SignCondition)>,
}

impl Region {
    pub fn everywhere() -> Self {
        Region::default()
    }

    pub fn with(mut self, p: QPoly, s: SignCondition) -> Self {
        self.conditions.push((p, s));
        self
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.conditions.iter().all(|(p, s)| s.holds(&p.eval(x)))
    }

    pub fn describe(&self) -> Vec<String> {
        self.conditions
            .iter()
            .map(|(p, s)| format!("{p} {}", s.symbol()))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Label {
    Elliptic,
    Hyperbolic { direction: Vec<String> },
    Characteristic,
    Degenerate,
}

impl Label {
    pub fn tag(&self) -> &'static str {
        match self {
            Label::Elliptic => "elliptic",
            Label::Hyperbolic { .. } => "hyperbolic",
            Label::Characteristic => "characteristic",
            Label::Degenerate => "degenerate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumKind {
    Elliptic,
    Hyperbolic,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabeledSample {
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub x: Vec<Rational>,
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub xi: Vec<Rational>,
    pub label: Label,
    pub characteristic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointStratum {
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub x: Vec<Rational>,
    pub kind: StratumKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationCounterexample {
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub x: Vec<Rational>,
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub xi: Vec<Rational>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeCheck {
    pub cones: Vec<String>,
    pub disjoint_away_from_zero: bool,
    /// Characteristic samples per cone, in declaration order.
    pub hits: Vec<usize>,
    pub outside: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub region: Vec<String>,
    pub samples: Vec<LabeledSample>,
    pub strata: Vec<PointStratum>,
    pub summary: BTreeMap<String, usize>,
    pub cone_check: Option<ConeCheck>,
    pub counterexamples: Vec<ClassificationCounterexample>,
}

impl ClassificationReport {
    pub fn count(&self, tag: &str) -> usize {
        self.summary.get(tag).copied().unwrap_or(0)
    }
}

fn point_stratum(
    cv: &CharVariety,
    x: &[Rational],
    direction: Option<&[Rational]>,
    dirs: &[Vec<Rational>],
    etas: &[Vec<Rational>],
) -> StratumKind {
    let fiber = cv.fiber_generators(x);
    if decide_real_zeros(&ellipticity_polynomial(&fiber), dirs).zero_free() {
        return StratumKind::Elliptic;
    }
    if let (Some(theta), [p]) = (direction, fiber.as_slice()) {
        let h = hyperbolic_at(p, x, theta, etas);
        if h.status == HyperbolicStatus::Hyperbolic && h.strict {
            return StratumKind::Hyperbolic;
        }
    }
    StratumKind::Degenerate
}

/// Labels every sample by the stratum of its base point, refining degenerate
/// points into characteristic and degenerate covectors.
pub fn classify_mixed(
    sys: &PdeSystem,
    region: &Region,
    grid: &[CovectorSample],
    direction: Option<&[Rational]>,
    cones: &[ConeSpec],
) -> Result<ClassificationReport, MicrolocalError> {
    let n = sys.n();
    if let Some(theta) = direction {
        if theta.len() != n || theta.iter().all(Zero::is_zero) {
            return Err(MicrolocalError::InvalidArgument(
                "classification direction must be a nonzero covector".into(),
            ));
        }
    }
    if cones.iter().any(|c| c.dim() != n) {
        return Err(MicrolocalError::InvalidArgument(
            "cone dimension differs from the number of variables".into(),
        ));
    }
    let cv = characteristic_ideal(sys)?;
    let dirs = directions(grid);
    let mut etas = compass_directions(n, None);
    for d in &dirs {
        if !etas.contains(d) {
            etas.push(d.clone());
        }
    }
    let points = base_points(grid);
    let strata: Vec<PointStratum> = points
        .par_iter()
        .map(|x| PointStratum {
            x: x.clone(),
            kind: point_stratum(&cv, x, direction, &dirs, &etas),
        })
        .collect();
    let kind_at: BTreeMap<&Vec<Rational>, StratumKind> =
        strata.iter().map(|s| (&s.x, s.kind)).collect();
    let direction_label: Vec<String> = direction
        .map(|t| t.iter().map(rational_string).collect())
        .unwrap_or_default();

    let mut samples = Vec::with_capacity(grid.len());
    let mut summary: BTreeMap<String, usize> = BTreeMap::new();
    let mut counterexamples = Vec::new();
    for s in grid {
        let characteristic = cv.contains(&s.x, &s.xi);
        let label = match kind_at[&s.x] {
            StratumKind::Elliptic => Label::Elliptic,
            StratumKind::Hyperbolic => Label::Hyperbolic {
                direction: direction_label.clone(),
            },
            StratumKind::Degenerate if characteristic => Label::Characteristic,
            StratumKind::Degenerate => Label::Degenerate,
        };
        *summary.entry(label.tag().to_string()).or_default() += 1;
        if !region.contains(&s.x) {
            counterexamples.push(ClassificationCounterexample {
                x: s.x.clone(),
                xi: s.xi.clone(),
                reason: "sample outside the declared region".into(),
            });
        }
        samples.push(LabeledSample {
            x: s.x.clone(),
            xi: s.xi.clone(),
            label,
            characteristic,
        });
    }

    let cone_check = (!cones.is_empty()).then(|| {
        let disjoint = cones
            .iter()
            .enumerate()
            .all(|(i, a)| cones[i + 1..].iter().all(|b| a.intersects_only_at_zero(b)));
        let mut hits = vec![0; cones.len()];
        let mut outside = 0;
        for s in samples.iter().filter(|s| s.characteristic) {
            let mut inside = false;
            for (h, c) in hits.iter_mut().zip(cones) {
                if c.contains(&s.xi) {
                    *h += 1;
                    inside = true;
                }
            }
            if !inside {
                outside += 1;
                counterexamples.push(ClassificationCounterexample {
                    x: s.x.clone(),
                    xi: s.xi.clone(),
                    reason: "characteristic covector outside the declared cones".into(),
                });
            }
        }
        if !disjoint {
            counterexamples.push(ClassificationCounterexample {
                x: Vec::new(),
                xi: Vec::new(),
                reason: "declared cones meet away from the zero section".into(),
            });
        }
        ConeCheck {
            cones: cones.iter().map(|c| c.name.clone()).collect(),
            disjoint_away_from_zero: disjoint,
            hits,
            outside,
            passed: disjoint && outside == 0,
        }
    });

    Ok(ClassificationReport {
        region: region.describe(),
        samples,
        strata,
        summary,
        cone_check,
        counterexamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat};
    use crate::jet::catalog;
    use crate::microlocal::cone::ConeKind;
    use crate::microlocal::grid::regular_grid;

    #[test]
    fn tricomi_strata_follow_sign_of_y() {
        let grid = regular_grid(2, 5, &int(-1), &rat(1, 2), &compass_directions(2, None));
        let theta = [int(0), int(1)];
        let r = classify_mixed(
            &catalog::tricomi(),
            &Region::everywhere(),
            &grid,
            Some(&theta),
            &[],
        )
        .unwrap();
        for s in &r.samples {
            let y = &s.x[1];
            let expected = if y.is_positive() {
                "elliptic"
            } else if y.is_negative() {
                "hyperbolic"
            } else if s.characteristic {
                "characteristic"
            } else {
                "degenerate"
            };
            assert_eq!(s.label.tag(), expected, "at {:?} {:?}", s.x, s.xi);
        }
        assert!(r.counterexamples.is_empty());
    }

    #[test]
    fn wave_characteristics_split_into_light_cones() {
        let one = |a: i64, b: i64| vec![int(a), int(b)];
        let future =
            ConeSpec::new("future", vec![one(1, 1), one(1, -1)], ConeKind::Closed).unwrap();
        let past = ConeSpec::new("past", vec![one(-1, 1), one(-1, -1)], ConeKind::Closed).unwrap();
        let grid = regular_grid(2, 2, &int(0), &int(1), &compass_directions(2, None));
        let theta = [int(1), int(0)];
        let r = classify_mixed(
            &catalog::wave(),
            &Region::everywhere(),
            &grid,
            Some(&theta),
            &[future, past],
        )
        .unwrap();
        let cc = r.cone_check.as_ref().unwrap();
        assert!(cc.passed);
        assert_eq!(cc.hits, vec![8, 8]);
        assert_eq!(r.count("hyperbolic"), grid.len());
    }

    #[test]
    fn region_violations_are_reported() {
        let grid = regular_grid(2, 2, &int(0), &int(1), &compass_directions(2, None));
        let v = crate::algebra::var_list(&["x", "y"]);
        let region = Region::everywhere().with(
            crate::algebra::MultiPoly::var(v, 0),
            SignCondition::Positive,
        );
        let r = classify_mixed(&catalog::laplace(2), &region, &grid, None, &[]).unwrap();
        assert_eq!(r.count("elliptic"), grid.len());
        assert_eq!(r.counterexamples.len(), 16);
    }
}
