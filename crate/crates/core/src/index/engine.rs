//! Index computations over Spencer tables and model cohomology rings.

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::jet::{to_flat_connection, DeltaCohomologyTable, PdeSystem, SpencerComplex};
use crate::microlocal::{is_elliptic, CovectorSample};
use crate::Rational;

use super::classes::{tangent_todd, SymbolClass, SymbolClassSummary};
use super::model::{CharacterClass, CohomologyRingModel};
use super::IndexError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexMethod {
    EulerChar,
    GrrIntegral,
    Boundary,
    AsSpecialization,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeContribution {
    pub symbol_degree: u32,
    pub todd_degree: u32,
    #[serde(serialize_with = "crate::algebra::ser::rational")]
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexReport {
    pub index: i64,
    pub method: IndexMethod,
    pub model: Option<String>,
    pub breakdown: Vec<DegreeContribution>,
    pub symbol: Option<SymbolClassSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EulerReport {
    pub index: i64,
    /// `Σ (−1)^i dim C` over the same slots.
    pub space_euler: i64,
    pub slots: usize,
}

/// `Σ (−1)^i dim H^{j,i}` over the table.
pub fn spencer_euler_characteristic(table: &DeltaCohomologyTable) -> EulerReport {
    EulerReport {
        index: table.euler_characteristic(),
        space_euler: table.space_euler_characteristic(),
        slots: table.entries.len(),
    }
}

/// Euler characteristic of the strand `j + i = d` of a complex, checked
/// against the alternating sum of its space dimensions.
pub fn strand_euler_characteristic(cx: &SpencerComplex, d: usize) -> Result<i64, IndexError> {
    let (spaces, cohom) = cx.strand_euler(d).ok_or_else(|| {
        IndexError::InvalidArgument(format!("strand {d} is truncated in this complex"))
    })?;
    if spaces != cohom {
        return Err(IndexError::Internal(format!(
            "strand {d}: space Euler {spaces} differs from cohomology Euler {cohom}"
        )));
    }
    Ok(cohom)
}

fn to_integer(value: &Rational, what: &str) -> Result<i64, IndexError> {
    if !value.is_integer() {
        return Err(IndexError::Internal(format!(
            "{what} evaluated to the non-integer {value}"
        )));
    }
    i64::try_from(value.to_integer())
        .map_err(|_| IndexError::Internal(format!("{what} overflows i64")))
}

/// `∫ symbol · todd` with its degree breakdown.
pub fn grr_index(
    symbol: &CharacterClass,
    todd: &CharacterClass,
    model: &CohomologyRingModel,
) -> Result<IndexReport, IndexError> {
    if symbol.model.name != model.name || todd.model.name != model.name {
        return Err(IndexError::InvalidArgument(
            "symbol and Todd classes must live in the integration model".into(),
        ));
    }
    let d = model.top_degree;
    let (s, t) = (symbol.components(), todd.components());
    let mut breakdown = Vec::new();
    let mut total = Rational::zero();
    for k in 0..=d {
        let value = s[k as usize].mul(&t[(d - k) as usize])?.integrate();
        total += &value;
        breakdown.push(DegreeContribution {
            symbol_degree: k,
            todd_degree: d - k,
            value,
        });
    }
    debug_assert_eq!(total, symbol.mul(todd)?.integrate());
    Ok(IndexReport {
        index: to_integer(&total, "GRR integral")?,
        method: IndexMethod::GrrIntegral,
        model: Some(model.name.clone()),
        breakdown,
        symbol: None,
    })
}

/// Index of an elliptic system from the zero-section pullback of its symbol class.
pub fn atiyah_singer_index(
    sys: &PdeSystem,
    grid: &[CovectorSample],
    symbol: &SymbolClass,
) -> Result<IndexReport, IndexError> {
    let ell = is_elliptic(sys, grid)?;
    if !ell.elliptic {
        return Err(IndexError::Precondition(format!(
            "system `{}` is not elliptic",
            sys.name()
        )));
    }
    let model = symbol.plus.model.clone();
    let mut report = grr_index(&symbol.difference(), &tangent_todd(&model)?, &model)?;
    report.method = IndexMethod::AsSpecialization;
    report.symbol = Some(symbol.summary());
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryIndexReport {
    pub index: i64,
    pub boundary_index: i64,
    pub relative_index: i64,
    pub method: IndexMethod,
}

/// `Ind_rel = Ind − Ind_∂`.
pub fn boundary_index(
    interior: &DeltaCohomologyTable,
    boundary: &DeltaCohomologyTable,
) -> BoundaryIndexReport {
    let index = interior.euler_characteristic();
    let boundary_index = boundary.euler_characteristic();
    BoundaryIndexReport {
        index,
        boundary_index,
        relative_index: index - boundary_index,
        method: IndexMethod::Boundary,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdditivityReport {
    pub total: i64,
    pub gauge: i64,
    pub base: i64,
    pub additive: bool,
}

/// `χ(total) = χ(gauge) + χ(base)` for a short exact triple.
pub fn additivity_check(
    total: &DeltaCohomologyTable,
    gauge: &DeltaCohomologyTable,
    base: &DeltaCohomologyTable,
) -> AdditivityReport {
    let (t, g, b) = (
        total.euler_characteristic(),
        gauge.euler_characteristic(),
        base.euler_characteristic(),
    );
    AdditivityReport {
        total: t,
        gauge: g,
        base: b,
        additive: t == g + b,
    }
}

/// One member of a family over rational base samples.
#[derive(Clone, Debug)]
pub enum Fiber {
    /// Finite-type system; its index is the flat-connection rank.
    System { s: Rational, system: PdeSystem },
    Table {
        s: Rational,
        table: DeltaCohomologyTable,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberIndex {
    #[serde(serialize_with = "crate::algebra::ser::rational")]
    pub s: Rational,
    pub index: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberwiseReport {
    pub fibers: Vec<FiberIndex>,
    pub locally_constant: bool,
}

pub fn fiberwise_index(family: &[Fiber]) -> Result<FiberwiseReport, IndexError> {
    let fibers: Vec<FiberIndex> = family
        .par_iter()
        .map(|f| match f {
            Fiber::System { s, system } => Ok(FiberIndex {
                s: s.clone(),
                index: to_flat_connection(system)?.rank as i64,
            }),
            Fiber::Table { s, table } => Ok(FiberIndex {
                s: s.clone(),
                index: table.euler_characteristic(),
            }),
        })
        .collect::<Result<_, IndexError>>()?;
    let locally_constant = fibers.windows(2).all(|w| w[0].index == w[1].index);
    Ok(FiberwiseReport {
        fibers,
        locally_constant,
    })
}

/// `∫ ch(O(d)) Td` on a model, the Riemann–Roch count of sections.
pub fn twisted_index(
    model: &std::sync::Arc<CohomologyRingModel>,
    twist: &[i64],
) -> Result<IndexReport, IndexError> {
    let symbol = SymbolClass::dolbeault(model, twist)?;
    let mut report = grr_index(&symbol.difference(), &tangent_todd(model)?, model)?;
    report.symbol = Some(symbol.summary());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::int;
    use crate::jet::catalog;
    use crate::microlocal::grid::{compass_directions, tensor};

    #[test]
    fn riemann_roch_on_p1() {
        let m = CohomologyRingModel::projective(1);
        for d in 0..=5 {
            assert_eq!(twisted_index(&m, &[d]).unwrap().index, d + 1);
        }
    }

    #[test]
    fn elliptic_curve_structure_sheaf() {
        let m = CohomologyRingModel::elliptic_curve();
        assert_eq!(twisted_index(&m, &[0]).unwrap().index, 0);
    }

    #[test]
    fn non_integer_integral_is_rejected() {
        let m = CohomologyRingModel::projective(1);
        let half = CharacterClass::generator(&m, 0, crate::algebra::rat(1, 2));
        assert!(matches!(
            grr_index(&half, &CharacterClass::one(&m), &m),
            Err(IndexError::Internal(_))
        ));
    }

    #[test]
    fn boundary_relation() {
        let r = boundary_index(
            &DeltaCohomologyTable::from_degrees(&[1]),
            &DeltaCohomologyTable::from_degrees(&[2]),
        );
        assert_eq!((r.index, r.boundary_index, r.relative_index), (1, 2, -1));
    }

    #[test]
    fn cauchy_riemann_on_p1() {
        let grid = tensor(&[vec![int(0), int(0)]], &compass_directions(2, None));
        let m = CohomologyRingModel::projective(1);
        let r = atiyah_singer_index(
            &catalog::cauchy_riemann(),
            &grid,
            &SymbolClass::dolbeault(&m, &[0]).unwrap(),
        )
        .unwrap();
        assert_eq!(r.index, 1);
        let heat = atiyah_singer_index(
            &catalog::heat(),
            &grid,
            &SymbolClass::dolbeault(&m, &[0]).unwrap(),
        );
        assert!(matches!(heat, Err(IndexError::Precondition(_))));
    }

    #[test]
    fn exponential_family_is_constant() {
        let family: Vec<Fiber> = (0..3)
            .map(|s| Fiber::System {
                s: int(s),
                system: catalog::scaled_exponential(int(s)),
            })
            .collect();
        let r = fiberwise_index(&family).unwrap();
        assert!(r.locally_constant);
        assert!(r.fibers.iter().all(|f| f.index == 1));
    }
}
