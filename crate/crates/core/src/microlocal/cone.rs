//! Polyhedral cones with exact membership.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::poly::combinations;
use crate::algebra::Matrix;
use crate::Rational;

use super::MicrolocalError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    OpenConvex,
    Closed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeSpec {
    pub name: String,
    #[serde(serialize_with = "crate::algebra::ser::vecs")]
    pub generators: Vec<Vec<Rational>>,
    pub kind: ConeKind,
}

fn columns_matrix(cols: &[&Vec<Rational>], rows: usize) -> Matrix<Rational> {
    let owned: Vec<Vec<Rational>> = cols.iter().map(|c| (*c).clone()).collect();
    Matrix::from_columns(&owned, rows)
}

fn independent(cols: &[&Vec<Rational>], rows: usize) -> bool {
    cols.is_empty() || columns_matrix(cols, rows).rank() == cols.len()
}

/// Unique solution of `Σ λ_i c_i = v` for independent columns, if any.
fn solve_independent(cols: &[&Vec<Rational>], v: &[Rational]) -> Option<Vec<Rational>> {
    let rows = v.len();
    if cols.is_empty() {
        return v.iter().all(Zero::is_zero).then(Vec::new);
    }
    let a = columns_matrix(cols, rows);
    let at = a.transpose();
    let lambda = at.mul(&a).solve(&at.mul_vec(v))?;
    (a.mul_vec(&lambda) == v).then_some(lambda)
}

impl ConeSpec {
    pub fn new(
        name: impl Into<String>,
        generators: Vec<Vec<Rational>>,
        kind: ConeKind,
    ) -> Result<Self, MicrolocalError> {
        let name = name.into();
        let Some(dim) = generators.first().map(Vec::len) else {
            return Err(MicrolocalError::InvalidArgument(format!(
                "cone {name} has no generators"
            )));
        };
        if generators
            .iter()
            .any(|g| g.len() != dim || g.iter().all(Zero::is_zero))
        {
            return Err(MicrolocalError::InvalidArgument(format!(
                "cone {name} needs nonzero generators of one length"
            )));
        }
        if kind == ConeKind::OpenConvex {
            let refs: Vec<&Vec<Rational>> = generators.iter().collect();
            if !independent(&refs, dim) {
                return Err(MicrolocalError::InvalidArgument(format!(
                    "open cone {name} has dependent generators"
                )));
            }
            for (i, a) in generators.iter().enumerate() {
                for b in &generators[i + 1..] {
                    let neg: Vec<Rational> = b.iter().map(|x| -x).collect();
                    if solve_independent(&[a], &neg).is_some_and(|l| l[0].is_positive()) {
                        return Err(MicrolocalError::InvalidArgument(format!(
                            "open cone {name} contains an opposite pair"
                        )));
                    }
                }
            }
        }
        Ok(ConeSpec {
            name,
            generators,
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.generators[0].len()
    }

    /// Exact membership; closed cones by Carathéodory over independent subsets.
    pub fn contains(&self, v: &[Rational]) -> bool {
        if v.len() != self.dim() {
            return false;
        }
        let refs: Vec<&Vec<Rational>> = self.generators.iter().collect();
        match self.kind {
            ConeKind::OpenConvex => {
                solve_independent(&refs, v).is_some_and(|l| l.iter().all(Signed::is_positive))
            }
            ConeKind::Closed => {
                if v.iter().all(Zero::is_zero) {
                    return true;
                }
                let k = refs.len().min(self.dim());
                (1..=k).any(|size| {
                    combinations(refs.len(), size).into_iter().any(|subset| {
                        let cols: Vec<&Vec<Rational>> = subset.iter().map(|&i| refs[i]).collect();
                        independent(&cols, self.dim())
                            && solve_independent(&cols, v)
                                .is_some_and(|l| l.iter().all(|x| !x.is_negative()))
                    })
                })
            }
        }
    }

    /// Whether the closures meet only at the origin. Checks every vertex of
    /// `{z ≥ 0, Gλ − Hμ = 0, Σz = 1}` for `Gλ ≠ 0`.
    pub fn intersects_only_at_zero(&self, other: &ConeSpec) -> bool {
        let n = self.dim();
        if other.dim() != n {
            return true;
        }
        let mut cols: Vec<Vec<Rational>> = Vec::new();
        for g in &self.generators {
            let mut c = g.clone();
            c.push(Rational::one());
            cols.push(c);
        }
        for h in &other.generators {
            let mut c: Vec<Rational> = h.iter().map(|x| -x).collect();
            c.push(Rational::one());
            cols.push(c);
        }
        let mut target = vec![Rational::zero(); n];
        target.push(Rational::one());
        let split = self.generators.len();
        let refs: Vec<&Vec<Rational>> = cols.iter().collect();
        let rank = columns_matrix(&refs, n + 1).rank();
        for size in 1..=rank {
            for subset in combinations(cols.len(), size) {
                let sub: Vec<&Vec<Rational>> = subset.iter().map(|&i| refs[i]).collect();
                if !independent(&sub, n + 1) {
                    continue;
                }
                let Some(z) = solve_independent(&sub, &target) else {
                    continue;
                };
                if z.iter().any(Signed::is_negative) {
                    continue;
                }
                let mut image = vec![Rational::zero(); n];
                for (&i, zi) in subset.iter().zip(&z) {
                    if i < split {
                        for (acc, g) in image.iter_mut().zip(&self.generators[i]) {
                            *acc += zi * g;
                        }
                    }
                }
                if image.iter().any(|x| !x.is_zero()) {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::int;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    fn future() -> ConeSpec {
        ConeSpec::new("future", vec![v(&[1, 1]), v(&[1, -1])], ConeKind::Closed).unwrap()
    }

    fn past() -> ConeSpec {
        ConeSpec::new("past", vec![v(&[-1, 1]), v(&[-1, -1])], ConeKind::Closed).unwrap()
    }

    #[test]
    fn closed_membership() {
        let c = future();
        assert!(c.contains(&v(&[1, 1])));
        assert!(c.contains(&v(&[3, 0])));
        assert!(c.contains(&v(&[0, 0])));
        assert!(!c.contains(&v(&[1, 2])));
        assert!(!c.contains(&v(&[-1, 0])));
    }

    #[test]
    fn open_membership_excludes_boundary() {
        let c = ConeSpec::new("open", vec![v(&[1, 1]), v(&[1, -1])], ConeKind::OpenConvex).unwrap();
        assert!(c.contains(&v(&[2, 1])));
        assert!(!c.contains(&v(&[1, 1])));
    }

    #[test]
    fn light_cones_meet_at_origin() {
        assert!(future().intersects_only_at_zero(&past()));
        let half = ConeSpec::new("half", vec![v(&[1, 0]), v(&[0, 1])], ConeKind::Closed).unwrap();
        assert!(!future().intersects_only_at_zero(&half));
    }

    #[test]
    fn open_cone_validation() {
        assert!(ConeSpec::new("bad", vec![v(&[1, 0]), v(&[-1, 0])], ConeKind::OpenConvex).is_err());
        assert!(ConeSpec::new(
            "bad",
            vec![v(&[1, 0]), v(&[0, 1]), v(&[1, 1])],
            ConeKind::OpenConvex
        )
        .is_err());
    }
}
