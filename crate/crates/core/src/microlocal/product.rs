//! External products, the Künneth identity for characteristic varieties, and
//! factorization checks for external powers.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{var_list, IdealDimension, MultiPoly, PolyIdeal, VarList};
use crate::jet::{Jet, LinearEquation, PdeSystem};
use crate::{QIdeal, QPoly};

use super::char_variety::{characteristic_ideal, CharVariety, CharVarietySummary};
use super::MicrolocalError;

/// Copy of `sys` with its independent variables renamed.
pub fn rename_vars(sys: &PdeSystem, names: &[String]) -> Result<PdeSystem, MicrolocalError> {
    let ring = var_list(names);
    let map: Vec<usize> = (0..names.len()).collect();
    if sys.is_free() {
        let unknowns: Vec<&str> = sys.unknowns().iter().map(String::as_str).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        return Ok(PdeSystem::free(&names, &unknowns, sys.order()).with_name(sys.name()));
    }
    let eqs = sys
        .equations()
        .iter()
        .map(|e| {
            LinearEquation::new(
                e.terms()
                    .iter()
                    .map(|(j, c)| (j.clone(), c.embed(ring.clone(), &map))),
            )
        })
        .collect();
    let out = PdeSystem::new(sys.name(), ring, sys.unknowns().to_vec(), eqs)?;
    Ok(match sys.base_point() {
        Some(p) => out.with_base_point(p.to_vec())?,
        None => out,
    })
}

fn product_var_names(a: &VarList, b: &VarList) -> (Vec<String>, Vec<String>) {
    let rename = |v: &String, other: &VarList, tag: char| {
        if other.contains(v) {
            format!("{v}{tag}")
        } else {
            v.clone()
        }
    };
    (
        a.iter().map(|v| rename(v, b, '1')).collect(),
        b.iter().map(|v| rename(v, a, '2')).collect(),
    )
}

/// `a ⊠ b` on `ℝⁿ × ℝᵖ` with unknowns `u_a ⊗ u_b`.
pub fn external_product(a: &PdeSystem, b: &PdeSystem) -> Result<PdeSystem, MicrolocalError> {
    let (n, p) = (a.n(), b.n());
    let (ma, mb) = (a.m(), b.m());
    let (na, nb) = product_var_names(a.indep_vars(), b.indep_vars());
    let mut names = na;
    names.extend(nb);
    let ring = var_list(&names);
    let unknowns: Vec<String> = if ma == 1 && mb == 1 {
        vec![a.unknowns()[0].clone()]
    } else {
        a.unknowns()
            .iter()
            .flat_map(|x| b.unknowns().iter().map(move |y| format!("{x}{y}")))
            .collect()
    };
    let map_a: Vec<usize> = (0..n).collect();
    let map_b: Vec<usize> = (n..n + p).collect();
    let mut equations = Vec::new();
    for e in a.equations() {
        for j in 0..mb {
            equations.push(LinearEquation::new(e.terms().iter().map(|(jet, c)| {
                let mut alpha = jet.alpha.clone();
                alpha.extend(std::iter::repeat(0).take(p));
                (
                    Jet::new(jet.unknown * mb + j, alpha),
                    c.embed(ring.clone(), &map_a),
                )
            })));
        }
    }
    for e in b.equations() {
        for i in 0..ma {
            equations.push(LinearEquation::new(e.terms().iter().map(|(jet, c)| {
                let mut alpha = vec![0; n];
                alpha.extend_from_slice(&jet.alpha);
                (
                    Jet::new(i * mb + jet.unknown, alpha),
                    c.embed(ring.clone(), &map_b),
                )
            })));
        }
    }
    let name = format!("{}x{}", a.name(), b.name());
    let sys = if equations.is_empty() {
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let unknowns: Vec<&str> = unknowns.iter().map(String::as_str).collect();
        PdeSystem::free(&names, &unknowns, a.order().max(b.order())).with_name(name)
    } else {
        PdeSystem::new(name, ring, unknowns, equations)?
    };
    let point: Vec<_> = a.point().into_iter().chain(b.point()).collect();
    if a.base_point().is_some() || b.base_point().is_some() {
        return Ok(sys.with_base_point(point)?);
    }
    Ok(sys)
}

/// Embeds the generators of `cv` into `target` by variable name.
fn embed_by_name(cv: &CharVariety, target: &VarList) -> Result<Vec<QPoly>, MicrolocalError> {
    let map: Vec<usize> = cv
        .ambient
        .iter()
        .map(|v| {
            target.iter().position(|t| t == v).ok_or_else(|| {
                MicrolocalError::InvalidArgument(format!(
                    "variable {v} missing from the product ring"
                ))
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(cv
        .generators()
        .iter()
        .map(|g| g.embed(target.clone(), &map))
        .collect())
}

/// `V(I) = V(J)` by two-sided radical containment.
fn same_variety(i: &QIdeal, j: &QIdeal) -> Result<(bool, bool), MicrolocalError> {
    Ok((i.variety_contained_in(j)?, j.variety_contained_in(i)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KunnethReport {
    pub product: CharVarietySummary,
    pub join_generators: Vec<String>,
    pub product_in_join: bool,
    pub join_in_product: bool,
    pub kunneth_ok: bool,
    pub dimensions: [Option<usize>; 3],
    pub dimension_additive: bool,
}

/// The characteristic variety of `a ⊠ b` and its comparison with
/// `Char(a) × Char(b)`.
pub fn external_product_char(
    a: &PdeSystem,
    b: &PdeSystem,
) -> Result<(CharVariety, KunnethReport), MicrolocalError> {
    let (na, nb) = product_var_names(a.indep_vars(), b.indep_vars());
    let a = rename_vars(a, &na)?;
    let b = rename_vars(b, &nb)?;
    let prod = external_product(&a, &b)?;
    let cv = characteristic_ideal(&prod)?;
    let (ca, cb) = (characteristic_ideal(&a)?, characteristic_ideal(&b)?);
    let mut join = embed_by_name(&ca, &cv.ambient)?;
    join.extend(embed_by_name(&cb, &cv.ambient)?);
    join.retain(|g| !g.is_zero());
    if join.is_empty() {
        join.push(MultiPoly::zero(cv.ambient.clone()));
    }
    let join_ideal = PolyIdeal::new(cv.ambient.clone(), join.clone())?
        .groebner_basis(crate::algebra::MonomialOrder::DegRevLex);
    let (product_in_join, join_in_product) = same_variety(&join_ideal, &cv.ideal)?;
    let dims = [
        ca.dimension.value(),
        cb.dimension.value(),
        cv.dimension.value(),
    ];
    let dimension_additive = match dims {
        [Some(x), Some(y), Some(z)] => x + y == z,
        _ => cv.dimension == IdealDimension::EmptyVariety,
    };
    let report = KunnethReport {
        product: cv.summary(),
        join_generators: join.iter().map(|g| g.to_string()).collect(),
        product_in_join,
        join_in_product,
        kunneth_ok: product_in_join && join_in_product,
        dimensions: dims,
        dimension_additive,
    };
    Ok((cv, report))
}

/// `M^{⊠k}` with variables `{v}{i}` for `i = 1..=k` over the index set `idx`.
pub fn external_power(m: &PdeSystem, idx: &[usize]) -> Result<PdeSystem, MicrolocalError> {
    let copy = |i: usize| -> Result<PdeSystem, MicrolocalError> {
        let names: Vec<String> = m.indep_vars().iter().map(|v| format!("{v}{i}")).collect();
        rename_vars(m, &names)
    };
    let mut acc = copy(idx[0])?;
    for &i in &idx[1..] {
        acc = external_product(&acc, &copy(i)?)?;
    }
    Ok(acc.with_name(format!("{}^{}", m.name(), idx.len())))
}

/// Set partitions of `0..n` as block indices (restricted growth strings).
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            prefix.push(b);
            go(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationCheck {
    pub kind: String,
    pub index_set: Vec<usize>,
    pub detail: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub system: String,
    pub max_size: usize,
    pub checks: Vec<FactorizationCheck>,
    pub passed: bool,
}

fn block_string(blocks: &[Vec<usize>]) -> String {
    blocks
        .iter()
        .map(|b| {
            format!(
                "{{{}}}",
                b.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
            )
        })
        .collect::<Vec<_>>()
        .join("|")
}

fn split_check(
    m: &PdeSystem,
    size: usize,
    mask: usize,
) -> Result<FactorizationCheck, MicrolocalError> {
    let all: Vec<usize> = (1..=size).collect();
    let i1: Vec<usize> = all
        .iter()
        .copied()
        .filter(|i| mask & (1 << (i - 1)) != 0)
        .collect();
    let i2: Vec<usize> = all
        .iter()
        .copied()
        .filter(|i| mask & (1 << (i - 1)) == 0)
        .collect();
    let whole = characteristic_ideal(&external_power(m, &all)?)?;
    let (c1, c2) = (
        characteristic_ideal(&external_power(m, &i1)?)?,
        characteristic_ideal(&external_power(m, &i2)?)?,
    );
    let mut join = embed_by_name(&c1, &whole.ambient)?;
    join.extend(embed_by_name(&c2, &whole.ambient)?);
    let join = PolyIdeal::new(whole.ambient.clone(), join)?;
    let (a, b) = same_variety(&join, &whole.ideal)?;
    Ok(FactorizationCheck {
        kind: "split".into(),
        index_set: all,
        detail: block_string(&[i1, i2]),
        passed: a && b,
    })
}

fn diagonal_check(
    m: &PdeSystem,
    size: usize,
    partition: &[usize],
) -> Result<FactorizationCheck, MicrolocalError> {
    let n = m.n();
    let all: Vec<usize> = (1..=size).collect();
    let nblocks = partition.iter().max().map_or(0, |b| b + 1);
    let whole = characteristic_ideal(&external_power(m, &all)?)?;
    let target = characteristic_ideal(&external_power(m, &(1..=nblocks).collect::<Vec<_>>())?)?;
    let ring = target.ambient.clone();
    let (big, small) = (size * n, nblocks * n);
    let is_block_min = |i: usize| partition[..i].iter().all(|&b| b != partition[i]);
    let mut images = vec![MultiPoly::zero(ring.clone()); 2 * big];
    for i in 0..size {
        let blk = partition[i];
        for v in 0..n {
            images[i * n + v] = MultiPoly::var(ring.clone(), blk * n + v);
            if is_block_min(i) {
                images[big + i * n + v] = MultiPoly::var(ring.clone(), small + blk * n + v);
            }
        }
    }
    let mut passed = true;
    for g in whole.generators() {
        if !target.ideal.radical_member(&g.substitute(&images))? {
            passed = false;
            break;
        }
    }
    let mut blocks = vec![Vec::new(); nblocks];
    for (i, &b) in partition.iter().enumerate() {
        blocks[b].push(i + 1);
    }
    Ok(FactorizationCheck {
        kind: "diagonal".into(),
        index_set: all,
        detail: block_string(&blocks),
        passed,
    })
}

/// Split and diagonal compatibility of `M^I` for all `|I| ≤ max_size ≤ 3`.
pub fn factorization_check(
    m: &PdeSystem,
    max_size: usize,
) -> Result<FactorizationReport, MicrolocalError> {
    if !(1..=3).contains(&max_size) {
        return Err(MicrolocalError::InvalidArgument(
            "factorization checks support index sets of size 1 to 3".into(),
        ));
    }
    enum Task {
        Split(usize, usize),
        Diagonal(usize, Vec<usize>),
    }
    let mut tasks = Vec::new();
    for size in 2..=max_size {
        // masks with bit 0 set: I1 holds the minimum
        for mask in (1..(1usize << size) - 1).filter(|m| m & 1 == 1) {
            tasks.push(Task::Split(size, mask));
        }
        for p in set_partitions(size) {
            if p.iter().max().map_or(0, |b| b + 1) < size {
                tasks.push(Task::Diagonal(size, p));
            }
        }
    }
    let checks: Vec<FactorizationCheck> = tasks
        .par_iter()
        .map(|t| match t {
            Task::Split(size, mask) => split_check(m, *size, *mask),
            Task::Diagonal(size, p) => diagonal_check(m, *size, p),
        })
        .collect::<Result<_, _>>()?;
    let passed = checks.iter().all(|c| c.passed);
    Ok(FactorizationReport {
        system: m.name().to_string(),
        max_size,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::catalog;

    #[test]
    fn product_of_derivatives_is_zero_section() {
        let (cv, r) = external_product_char(&catalog::d_x(), &catalog::d_y()).unwrap();
        assert!(r.kunneth_ok && r.dimension_additive);
        assert_eq!(cv.dimension, IdealDimension::Dim(2));
        assert_eq!(cv.ambient.to_vec(), vec!["x", "y", "xi_x", "xi_y"]);
    }

    #[test]
    fn clashing_names_are_suffixed() {
        let p = external_product(&catalog::laplace(2), &catalog::laplace(2)).unwrap();
        assert_eq!(p.indep_vars().to_vec(), vec!["x1", "y1", "x2", "y2"]);
        assert_eq!(p.equations().len(), 2);
    }

    #[test]
    fn laplace_square() {
        let (_, r) = external_product_char(&catalog::laplace(2), &catalog::laplace(2)).unwrap();
        assert!(r.kunneth_ok);
        assert_eq!(r.dimensions, [Some(3), Some(3), Some(6)]);
    }

    #[test]
    fn partitions_are_bell_numbers() {
        let counts: Vec<usize> = (1..=4).map(|n| set_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 15]);
    }

    #[test]
    fn derivative_family_factorizes() {
        let r = factorization_check(&catalog::d_x(), 2).unwrap();
        assert!(r.passed);
        assert_eq!(r.checks.len(), 2);
    }
}
