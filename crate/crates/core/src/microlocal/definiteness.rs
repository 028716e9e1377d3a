//! Deciding whether a homogeneous polynomial has a nonzero real zero.
//!
//! Exact for constants, one variable, quadratic forms (Lagrange
//! diagonalization), two variables (Sturm sequences) and odd degree (sign
//! flip under `ξ ↦ −ξ`). Everything else falls back to the supplied
//! directions and is flagged as non-exact.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::algebra::{rational_string, UniPoly};
use crate::{QPoly, Rational};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ZeroFreeCertificate {
    NonzeroConstant {
        #[serde(serialize_with = "crate::algebra::ser::rational")]
        value: Rational,
    },
    SingleVariable,
    /// `p = Σ d_i L_i(ξ)²` with all `d_i` of one sign.
    DefiniteQuadratic {
        sign: i32,
        #[serde(serialize_with = "crate::algebra::ser::vec")]
        diagonal: Vec<Rational>,
    },
    /// `p(1, t)` has no real root and `p(0, 1) ≠ 0`.
    SturmNoRealRoots {
        sturm_length: usize,
    },
    GridVerified {
        directions: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RealZeroWitness {
    Zero {
        #[serde(serialize_with = "crate::algebra::ser::vec")]
        xi: Vec<Rational>,
    },
    SignChange {
        #[serde(serialize_with = "crate::algebra::ser::vec")]
        positive: Vec<Rational>,
        #[serde(serialize_with = "crate::algebra::ser::vec")]
        negative: Vec<Rational>,
    },
    /// A root `ξ = (1, t)` with `t ∈ (lo, hi]`.
    RootInterval {
        #[serde(serialize_with = "crate::algebra::ser::rational")]
        lo: Rational,
        #[serde(serialize_with = "crate::algebra::ser::rational")]
        hi: Rational,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum RealZeroDecision {
    ZeroFree {
        certificate: ZeroFreeCertificate,
        exact: bool,
    },
    HasZero(RealZeroWitness),
}

impl RealZeroDecision {
    pub fn zero_free(&self) -> bool {
        matches!(self, RealZeroDecision::ZeroFree { .. })
    }

    pub fn exact(&self) -> bool {
        match self {
            RealZeroDecision::ZeroFree { exact, .. } => *exact,
            RealZeroDecision::HasZero(_) => true,
        }
    }
}

/// Symmetric matrix of a quadratic form, `p = ξᵀ S ξ`.
fn quadratic_matrix(p: &QPoly) -> Vec<Vec<Rational>> {
    let n = p.nvars();
    let mut s = vec![vec![Rational::zero(); n]; n];
    let half = Rational::new(1.into(), 2.into());
    for (m, c) in p.terms() {
        let idx: Vec<usize> = m
            .iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat(i).take(e as usize))
            .collect();
        let (i, j) = (idx[0], idx[1]);
        if i == j {
            s[i][i] += c;
        } else {
            s[i][j] += c * &half;
            s[j][i] += c * &half;
        }
    }
    s
}

/// Congruence diagonalization: returns `(d, v)` with `p(v_i) = d_i` and the `v_i` a basis.
pub fn lagrange_diagonalize(s: &[Vec<Rational>]) -> (Vec<Rational>, Vec<Vec<Rational>>) {
    let n = s.len();
    let mut a: Vec<Vec<Rational>> = s.to_vec();
    // columns of q are the basis vectors
    let mut q: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let add_col = |a: &mut Vec<Vec<Rational>>,
                   q: &mut Vec<Vec<Rational>>,
                   dst: usize,
                   src: usize,
                   c: &Rational| {
        // v_dst += c v_src
        for row in q.iter_mut() {
            let t = &row[src] * c;
            row[dst] += t;
        }
        for i in 0..n {
            let t = &a[i][src] * c;
            a[i][dst] += t;
        }
        for j in 0..n {
            let t = &a[src][j] * c;
            a[dst][j] += t;
        }
    };
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
                for row in q.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                add_col(&mut a, &mut q, k, j, &Rational::one());
            } else {
                continue;
            }
        }
        let pivot = a[k][k].clone();
        for j in k + 1..n {
            if a[k][j].is_zero() {
                continue;
            }
            let c = -(&a[k][j] / &pivot);
            add_col(&mut a, &mut q, j, k, &c);
        }
    }
    let d = (0..n).map(|i| a[i][i].clone()).collect();
    let v = (0..n)
        .map(|j| q.iter().map(|row| row[j].clone()).collect())
        .collect();
    (d, v)
}

fn first_nonzero(p: &QPoly, dirs: &[Vec<Rational>]) -> Option<(Vec<Rational>, Rational)> {
    dirs.iter()
        .map(|d| (d.clone(), p.eval(d)))
        .find(|(_, v)| !v.is_zero())
}

fn unit_vectors(n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// Decides whether `p(ξ) = 0` has a real solution `ξ ≠ 0`; `p` must be homogeneous.
pub fn decide_real_zeros(p: &QPoly, directions: &[Vec<Rational>]) -> RealZeroDecision {
    let n = p.nvars();
    if p.is_zero() {
        let mut xi = vec![Rational::zero(); n];
        xi[0] = Rational::one();
        return RealZeroDecision::HasZero(RealZeroWitness::Zero { xi });
    }
    let d = p.total_degree().unwrap_or(0);
    if d == 0 {
        let value = p.constant_value().unwrap_or_else(Rational::zero);
        return RealZeroDecision::ZeroFree {
            certificate: ZeroFreeCertificate::NonzeroConstant { value },
            exact: true,
        };
    }
    if n == 1 {
        return RealZeroDecision::ZeroFree {
            certificate: ZeroFreeCertificate::SingleVariable,
            exact: true,
        };
    }
    if d % 2 == 1 {
        let mut probes = unit_vectors(n);
        probes.extend_from_slice(directions);
        return match first_nonzero(p, &probes) {
            Some((v, val)) => {
                let neg: Vec<Rational> = v.iter().map(|c| -c).collect();
                let (positive, negative) = if val.is_positive() {
                    (v, neg)
                } else {
                    (neg, v)
                };
                RealZeroDecision::HasZero(RealZeroWitness::SignChange { positive, negative })
            }
            None => RealZeroDecision::HasZero(RealZeroWitness::Zero {
                xi: probes[0].clone(),
            }),
        };
    }
    if d == 2 {
        let (diag, vecs) = lagrange_diagonalize(&quadratic_matrix(p));
        if let Some(i) = diag.iter().position(Zero::is_zero) {
            return RealZeroDecision::HasZero(RealZeroWitness::Zero {
                xi: vecs[i].clone(),
            });
        }
        let pos = diag.iter().position(Signed::is_positive);
        let neg = diag.iter().position(Signed::is_negative);
        return match (pos, neg) {
            (Some(i), Some(j)) => RealZeroDecision::HasZero(RealZeroWitness::SignChange {
                positive: vecs[i].clone(),
                negative: vecs[j].clone(),
            }),
            _ => RealZeroDecision::ZeroFree {
                certificate: ZeroFreeCertificate::DefiniteQuadratic {
                    sign: if pos.is_some() { 1 } else { -1 },
                    diagonal: diag,
                },
                exact: true,
            },
        };
    }
    if n == 2 {
        let mut at_infinity = vec![Rational::zero(); 2];
        at_infinity[1] = Rational::one();
        if p.eval(&at_infinity).is_zero() {
            return RealZeroDecision::HasZero(RealZeroWitness::Zero { xi: at_infinity });
        }
        let mut coeffs = vec![Rational::zero(); d as usize + 1];
        for (m, c) in p.terms() {
            coeffs[m[1] as usize] += c;
        }
        let u = UniPoly::new(coeffs);
        if u.count_distinct_real_roots() == 0 {
            return RealZeroDecision::ZeroFree {
                certificate: ZeroFreeCertificate::SturmNoRealRoots {
                    sturm_length: u.sturm_sequence().len(),
                },
                exact: true,
            };
        }
        let (lo, hi) = u.isolate_real_roots().remove(0);
        if u.eval(&hi).is_zero() {
            return RealZeroDecision::HasZero(RealZeroWitness::Zero {
                xi: vec![Rational::one(), hi],
            });
        }
        return RealZeroDecision::HasZero(RealZeroWitness::RootInterval { lo, hi });
    }
    let mut probes = unit_vectors(n);
    probes.extend_from_slice(directions);
    let mut positive = None;
    let mut negative = None;
    for v in &probes {
        let val = p.eval(v);
        if val.is_zero() {
            return RealZeroDecision::HasZero(RealZeroWitness::Zero { xi: v.clone() });
        }
        if val.is_positive() {
            positive.get_or_insert_with(|| v.clone());
        } else {
            negative.get_or_insert_with(|| v.clone());
        }
    }
    match (positive, negative) {
        (Some(positive), Some(negative)) => {
            RealZeroDecision::HasZero(RealZeroWitness::SignChange { positive, negative })
        }
        _ => RealZeroDecision::ZeroFree {
            certificate: ZeroFreeCertificate::GridVerified {
                directions: probes.len(),
            },
            exact: false,
        },
    }
}

/// Pretty form of a covector for diagnostics.
pub fn covector_string(xi: &[Rational]) -> String {
    let parts: Vec<String> = xi.iter().map(rational_string).collect();
    format!("({})", parts.join(", "))
}
