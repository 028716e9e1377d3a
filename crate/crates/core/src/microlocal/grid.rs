//! Covector samples `(x; ξ)` used by the semi-decision procedures.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{int, rat};
use crate::Rational;

use super::MicrolocalError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CovectorSample {
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub x: Vec<Rational>,
    #[serde(serialize_with = "crate::algebra::ser::vec")]
    pub xi: Vec<Rational>,
}

impl CovectorSample {
    pub fn new(x: Vec<Rational>, xi: Vec<Rational>) -> Result<Self, MicrolocalError> {
        if x.len() != xi.len() {
            return Err(MicrolocalError::InvalidArgument(
                "base point and covector differ in dimension".into(),
            ));
        }
        if xi.iter().all(Zero::is_zero) {
            return Err(MicrolocalError::InvalidArgument(
                "covector must be nonzero".into(),
            ));
        }
        Ok(CovectorSample { x, xi })
    }
}

/// Nonzero vectors of `{−1, 0, 1}ⁿ` in lexicographic order, truncated to `count`.
pub fn compass_directions(n: usize, count: Option<usize>) -> Vec<Vec<Rational>> {
    let total = 3usize.pow(n as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let v: Vec<Rational> = (0..n)
            .map(|_| {
                let d = (c % 3) as i64 - 1;
                c /= 3;
                int(d)
            })
            .rev()
            .collect();
        if v.iter().any(|q| !q.is_zero()) {
            out.push(v);
        }
    }
    if let Some(k) = count {
        out.truncate(k);
    }
    out
}

/// `per_axis` equally spaced values `lo, lo + step, …` on each axis, times the directions.
pub fn regular_grid(
    n: usize,
    per_axis: usize,
    lo: &Rational,
    step: &Rational,
    directions: &[Vec<Rational>],
) -> Vec<CovectorSample> {
    let axis: Vec<Rational> = (0..per_axis).map(|i| lo + step * int(i as i64)).collect();
    let mut points: Vec<Vec<Rational>> = vec![Vec::new()];
    for _ in 0..n {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |a| {
                    let mut q = p.clone();
                    q.push(a.clone());
                    q
                })
            })
            .collect();
    }
    tensor(&points, directions)
}

/// Every base point paired with every direction.
pub fn tensor(points: &[Vec<Rational>], directions: &[Vec<Rational>]) -> Vec<CovectorSample> {
    points
        .iter()
        .flat_map(|x| {
            directions.iter().map(move |xi| CovectorSample {
                x: x.clone(),
                xi: xi.clone(),
            })
        })
        .collect()
}

/// Seeded random small rationals: base coordinates in `[−2, 2]`, covector entries in `[−3, 3]`.
pub fn random_grid(n: usize, points: usize, directions: usize, seed: u64) -> Vec<CovectorSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(points * directions);
    for _ in 0..points {
        let x: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(-8..=8), 4)).collect();
        for _ in 0..directions {
            let xi = loop {
                let v: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(-3..=3))).collect();
                if v.iter().any(|q| !q.is_zero()) {
                    break v;
                }
            };
            out.push(CovectorSample { x: x.clone(), xi });
        }
    }
    out
}

/// Distinct base points in order of first appearance.
pub fn base_points(grid: &[CovectorSample]) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::new();
    for s in grid {
        if !out.contains(&s.x) {
            out.push(s.x.clone());
        }
    }
    out
}

/// Distinct covectors in order of first appearance.
pub fn directions(grid: &[CovectorSample]) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::new();
    for s in grid {
        if !out.contains(&s.xi) {
            out.push(s.xi.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compass_counts() {
        assert_eq!(compass_directions(2, None).len(), 8);
        assert_eq!(compass_directions(3, None).len(), 26);
    }

    #[test]
    fn regular_grid_size() {
        let g = regular_grid(2, 10, &rat(-1, 1), &rat(1, 4), &compass_directions(2, None));
        assert_eq!(g.len(), 800);
        assert!(base_points(&g).iter().any(|p| p[1].is_zero()));
    }

    #[test]
    fn random_grid_is_seeded() {
        assert_eq!(random_grid(2, 3, 2, 9), random_grid(2, 3, 2, 9));
        assert!(random_grid(2, 3, 2, 9)
            .iter()
            .all(|s| s.xi.iter().any(|q| !q.is_zero())));
    }
}
