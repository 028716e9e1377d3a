//! Spectral zeta functions, their continuation to `s = 0`, and determinants.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use super::special::{
    bernoulli_f64, exp_integral_e1, gamma, gamma_rel_error, gauss_legendre, ln_abs_dedekind_eta,
    rgamma, riemann_zeta, riemann_zeta_derivative, upper_gamma, Bounded, EULER_GAMMA,
};
use super::spectrum::{
    for_each_box_point, form_det, form_eigen_range, form_inverse, quadratic_form, LatticeSpectrum,
    Resolved, SpectrumModel,
};
use super::TorsionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaMethod {
    ClosedForm,
    MellinTheta,
    EulerMaclaurin,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZetaValue {
    pub s: C,
    pub value: C,
    pub method: ZetaMethod,
    pub error_bound: f64,
}

/// `ζ(0)` and `ζ′(0)`; the bound applies to `ζ′(0)`, `ζ(0)` being exact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZetaAtZero {
    pub zeta0: f64,
    pub dzeta0: f64,
    pub method: ZetaMethod,
    pub error_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetReport {
    pub det: f64,
    pub log_det: f64,
    pub zeta0: f64,
    pub dzeta0: f64,
    pub method: ZetaMethod,
    pub error_bound: f64,
    pub log_error_bound: f64,
    pub harmonic_dim: u64,
}

fn unsupported<T>(msg: impl Into<String>) -> Result<T, TorsionError> {
    Err(TorsionError::Unsupported(msg.into()))
}

fn resolved(spec: &SpectrumModel) -> Result<Resolved, TorsionError> {
    spec.validate()?;
    match spec.resolve() {
        Resolved::Other => {
            unsupported("no continuation for a product of a lattice spectrum with an explicit list")
        }
        r => Ok(r),
    }
}

/// Methods able to evaluate `ζ(s)` for this spectrum at generic `s`.
pub fn available_methods(spec: &SpectrumModel) -> Vec<ZetaMethod> {
    match spec.resolve() {
        Resolved::Finite(_) => vec![ZetaMethod::ClosedForm],
        Resolved::Lattice(l) if l.form.len() <= 2 => {
            vec![ZetaMethod::MellinTheta, ZetaMethod::EulerMaclaurin]
        }
        Resolved::Lattice(_) => vec![ZetaMethod::MellinTheta],
        Resolved::Other => vec![],
    }
}

pub fn zeta_at(spec: &SpectrumModel, s: C) -> Result<ZetaValue, TorsionError> {
    let method = match resolved(spec)? {
        Resolved::Finite(_) => ZetaMethod::ClosedForm,
        Resolved::Lattice(l) if l.form.len() == 1 => {
            if rank1_closed_available(s) {
                ZetaMethod::ClosedForm
            } else {
                ZetaMethod::EulerMaclaurin
            }
        }
        Resolved::Lattice(_) if s == C::new(0.0, 0.0) => ZetaMethod::ClosedForm,
        _ => ZetaMethod::MellinTheta,
    };
    zeta_at_with(spec, s, method)
}

pub fn zeta_at_with(
    spec: &SpectrumModel,
    s: C,
    method: ZetaMethod,
) -> Result<ZetaValue, TorsionError> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(TorsionError::InvalidArgument("s must be finite".into()));
    }
    let b = match resolved(spec)? {
        Resolved::Finite(list) => {
            if method != ZetaMethod::ClosedForm {
                return unsupported("explicit spectra are summed directly");
            }
            let mut v = C::new(0.0, 0.0);
            let mut mag = 0.0;
            for (l, m) in list.iter().filter(|(l, _)| *l > 0.0) {
                let t = *m as f64 * (-s * l.ln()).exp();
                v += t;
                mag += t.norm();
            }
            Bounded {
                value: v,
                bound: 1e-15 * mag,
            }
        }
        Resolved::Lattice(l) => lattice_zeta(&l, s, method)?,
        Resolved::Other => unreachable!(),
    };
    Ok(ZetaValue {
        s,
        value: b.value,
        method,
        error_bound: b.bound,
    })
}

pub fn zeta_at_zero(spec: &SpectrumModel) -> Result<ZetaAtZero, TorsionError> {
    let method = match resolved(spec)? {
        Resolved::Lattice(l) if l.form.len() > 2 => ZetaMethod::MellinTheta,
        _ => ZetaMethod::ClosedForm,
    };
    zeta_at_zero_with(spec, method)
}

pub fn zeta_at_zero_with(
    spec: &SpectrumModel,
    method: ZetaMethod,
) -> Result<ZetaAtZero, TorsionError> {
    match resolved(spec)? {
        Resolved::Finite(list) => {
            if method != ZetaMethod::ClosedForm {
                return unsupported("explicit spectra are summed directly");
            }
            let pos: Vec<&(f64, u64)> = list.iter().filter(|(l, _)| *l > 0.0).collect();
            let zeta0 = pos.iter().map(|(_, m)| *m as f64).sum();
            let dzeta0: f64 = -pos.iter().map(|(l, m)| *m as f64 * l.ln()).sum::<f64>();
            let mag: f64 = pos.iter().map(|(l, m)| *m as f64 * l.ln().abs()).sum();
            Ok(ZetaAtZero {
                zeta0,
                dzeta0,
                method,
                error_bound: 1e-15 * mag,
            })
        }
        Resolved::Lattice(l) => {
            let (d, bound) = lattice_dz0(&l.form, method)?;
            let c = l.copies as f64;
            Ok(ZetaAtZero {
                zeta0: -c,
                dzeta0: c * d,
                method,
                error_bound: c * bound,
            })
        }
        Resolved::Other => unreachable!(),
    }
}

pub fn regularized_det(spec: &SpectrumModel) -> Result<DetReport, TorsionError> {
    det_from_zero(spec, zeta_at_zero(spec)?)
}

pub fn regularized_det_with(
    spec: &SpectrumModel,
    method: ZetaMethod,
) -> Result<DetReport, TorsionError> {
    det_from_zero(spec, zeta_at_zero_with(spec, method)?)
}

fn det_from_zero(spec: &SpectrumModel, z: ZetaAtZero) -> Result<DetReport, TorsionError> {
    let log_det = -z.dzeta0;
    let det = log_det.exp();
    if !det.is_finite() || !z.error_bound.is_finite() {
        return Err(TorsionError::Numeric(format!(
            "ζ′(0) = {} with bound {} gives no finite determinant",
            z.dzeta0, z.error_bound
        )));
    }
    Ok(DetReport {
        det,
        log_det,
        zeta0: z.zeta0,
        dzeta0: z.dzeta0,
        method: z.method,
        error_bound: det * z.error_bound.exp_m1(),
        log_error_bound: z.error_bound,
        harmonic_dim: spec.harmonic_dim(),
    })
}

fn lattice_zeta(l: &LatticeSpectrum, s: C, method: ZetaMethod) -> Result<Bounded, TorsionError> {
    let r = l.form.len();
    let half = r as f64 / 2.0;
    let form = reduced(&l.form);
    if (s - half).norm() < 1e-12 {
        let residue = l.copies as f64 * PI.powf(half)
            / (gamma(C::new(half, 0.0)).re * form_det(&form).sqrt());
        return Err(TorsionError::Pole { s: half, residue });
    }
    let z = match method {
        ZetaMethod::ClosedForm => {
            if s == C::new(0.0, 0.0) {
                Bounded {
                    value: C::new(-1.0, 0.0),
                    bound: 0.0,
                }
            } else if r == 1 && rank1_closed_available(s) {
                let m = form[0][0];
                let v = 2.0 * (-s * m.ln()).exp() * riemann_closed(2.0 * s.re);
                Bounded {
                    value: v,
                    bound: 1e-15 * v.norm(),
                }
            } else {
                return unsupported(format!(
                    "no closed form for rank-{r} lattice zeta at s = {s}"
                ));
            }
        }
        ZetaMethod::MellinTheta => {
            let (t0, norm) = normalize(&form);
            let z = mellin_value(&norm, s)?;
            let f = (-s * t0.ln()).exp();
            Bounded {
                value: f * z.value,
                bound: f.norm() * z.bound,
            }
        }
        ZetaMethod::EulerMaclaurin => match r {
            1 => {
                let m = form[0][0];
                let zr = riemann_zeta(2.0 * s)?;
                let f = 2.0 * (-s * m.ln()).exp();
                Bounded {
                    value: f * zr.value,
                    bound: f.norm() * zr.bound,
                }
            }
            2 => em_rank2(&form, s)?,
            _ => return unsupported("Euler–Maclaurin continuation handles rank ≤ 2"),
        },
    };
    let c = l.copies as f64;
    Ok(Bounded {
        value: c * z.value,
        bound: c * z.bound,
    })
}

/// `Z′(0)` for `Z(s) = Σ' Q(k)^{−s}`.
fn lattice_dz0(form: &[Vec<f64>], method: ZetaMethod) -> Result<(f64, f64), TorsionError> {
    let r = form.len();
    let form = reduced(form);
    match method {
        ZetaMethod::ClosedForm => match r {
            1 => Ok((
                form[0][0].ln() - 2.0 * (2.0 * PI).ln(),
                1e-15 * (1.0 + form[0][0].ln().abs()),
            )),
            2 => Ok(kronecker_dz0(&form)),
            _ => unsupported(format!("no closed form for ζ′(0) of a rank-{r} lattice")),
        },
        ZetaMethod::MellinTheta => {
            let (t0, norm) = normalize(&form);
            let (d, b) = mellin_dz0(&norm)?;
            Ok((t0.ln() + d, b + 1e-15 * t0.ln().abs()))
        }
        ZetaMethod::EulerMaclaurin => match r {
            1 => {
                let m = form[0][0];
                let z0 = riemann_zeta(C::new(0.0, 0.0))?;
                let d0 = riemann_zeta_derivative(C::new(0.0, 0.0))?;
                let v = -2.0 * m.ln() * z0.value.re + 4.0 * d0.value.re;
                Ok((v, 2.0 * m.ln().abs() * z0.bound + 4.0 * d0.bound))
            }
            2 => em_rank2_dz0(&form),
            _ => unsupported("Euler–Maclaurin continuation handles rank ≤ 2"),
        },
    }
}

fn rank1_closed_available(s: C) -> bool {
    if s.im != 0.0 {
        return false;
    }
    let t = 2.0 * s.re;
    t.fract() == 0.0 && (t <= 0.0 || (t as i64) % 2 == 0) && t.abs() < 60.0
}

/// `ζ_R(t)` at `t ∈ ℤ_{≤0} ∪ 2ℤ_{>0}` from Bernoulli numbers.
fn riemann_closed(t: f64) -> f64 {
    let b = bernoulli_f64();
    let k = t as i64;
    if k <= 0 {
        let n = (-k) as usize;
        // ζ(−n) = (−1)^n B_{n+1}/(n+1)
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sign * b[n + 1] / (n + 1) as f64
    } else {
        let j = (k / 2) as i32;
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        let fact: f64 = (1..=k).map(|v| v as f64).product();
        sign * b[k as usize] * (2.0 * PI).powi(k as i32) / (2.0 * fact)
    }
}

/// Gauss reduction of binary forms; other ranks unchanged.
fn reduced(form: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if form.len() != 2 {
        return form.to_vec();
    }
    let (mut a, mut b, mut c) = (form[0][0], 2.0 * form[0][1], form[1][1]);
    for _ in 0..200 {
        if c < a {
            std::mem::swap(&mut a, &mut c);
            b = -b;
        }
        if b.abs() > a {
            let k = (b / (2.0 * a)).round();
            c = c - b * k + a * k * k;
            b -= 2.0 * a * k;
        } else if c >= a {
            break;
        }
    }
    vec![vec![a, b / 2.0], vec![b / 2.0, c]]
}

/// `(t0, form/t0)` with `det(form/t0) = 1`.
fn normalize(form: &[Vec<f64>]) -> (f64, Vec<Vec<f64>>) {
    let r = form.len();
    let t0 = form_det(form).powf(1.0 / r as f64);
    (
        t0,
        form.iter()
            .map(|row| row.iter().map(|v| v / t0).collect())
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// theta / Mellin split at t = 1

/// Smallest box radius whose complement contributes less than `1e−17`,
/// given `Γ(a, x) x^{−a} ≤ 2e^{−x}/x` for `x ≥ max(1, 2(a − 1))`.
fn theta_radius(mu: f64, r: usize, a_re: f64) -> Result<(i64, f64), TorsionError> {
    let tail = |k: i64| -> f64 {
        let mut acc = 0.0;
        for j in k + 1..k + 400 {
            let x = PI * mu * (j * j) as f64;
            let shell = ((2 * j + 1) as f64).powi(r as i32) - ((2 * j - 1) as f64).powi(r as i32);
            let t = shell * 2.0 * (-x).exp() / x;
            acc += t;
            if t < 1e-30 * acc.max(1e-300) {
                break;
            }
        }
        acc
    };
    let need = 1.0f64.max(2.0 * (a_re - 1.0));
    let mut k = 1i64;
    loop {
        if PI * mu * ((k + 1) * (k + 1)) as f64 >= need {
            let t = tail(k);
            if t < 1e-17 {
                return Ok((k, t));
            }
        }
        k += 1;
        if ((2 * k + 1) as f64).powi(r as i32) > 4e6 {
            return Err(TorsionError::Numeric(format!(
                "theta sum needs box radius {k} in rank {r}; the lattice is too skewed (minimal eigenvalue {mu:.3e})"
            )));
        }
    }
}

/// `Z(s)` for a form of determinant 1:
/// `π^{−s}Γ(s)Z(s) = Σ' Γ(s,πQ)(πQ)^{−s} + Σ' Γ(r/2−s,πQ*)(πQ*)^{s−r/2} + 1/(s−r/2) − 1/s`.
fn mellin_value(form: &[Vec<f64>], s: C) -> Result<Bounded, TorsionError> {
    if s == C::new(0.0, 0.0) {
        return Ok(Bounded {
            value: C::new(-1.0, 0.0),
            bound: 0.0,
        });
    }
    let r = form.len();
    let half = r as f64 / 2.0;
    let dual = form_inverse(form)?;
    let (mu, _) = form_eigen_range(form);
    let (mu_d, _) = form_eigen_range(&dual);
    let (ka, ta) = theta_radius(mu, r, s.re)?;
    let (kb, tb) = theta_radius(mu_d, r, half - s.re)?;
    let (mut a, mut mag) = (C::new(0.0, 0.0), 0.0);
    for_each_box_point(r, ka, |k| {
        let x = PI * quadratic_form(form, k);
        let t = upper_gamma(s, x) * (-s * x.ln()).exp();
        a += t;
        mag += t.norm();
    });
    let sd = C::new(half, 0.0) - s;
    let mut b = C::new(0.0, 0.0);
    for_each_box_point(r, kb, |k| {
        let x = PI * quadratic_form(&dual, k);
        let t = upper_gamma(sd, x) * (-sd * x.ln()).exp();
        b += t;
        mag += t.norm();
    });
    let poles = 1.0 / (s - half) - 1.0 / s;
    let f = a + b + poles;
    let pref = (s * PI.ln()).exp() * rgamma(s);
    let bound = pref.norm() * (ta + tb + 1e-14 * (mag + poles.norm()))
        + gamma_rel_error(s) * (pref * f).norm();
    Ok(Bounded {
        value: pref * f,
        bound,
    })
}

/// `Z′(0) = −ln π − γ + Σ' E₁(πQ) + Σ' Γ(r/2, πQ*)(πQ*)^{−r/2} − 2/r` for a determinant-1 form.
fn mellin_dz0(form: &[Vec<f64>]) -> Result<(f64, f64), TorsionError> {
    let r = form.len();
    let half = r as f64 / 2.0;
    let dual = form_inverse(form)?;
    let (mu, _) = form_eigen_range(form);
    let (mu_d, _) = form_eigen_range(&dual);
    let (ka, ta) = theta_radius(mu, r, 0.0)?;
    let (kb, tb) = theta_radius(mu_d, r, half)?;
    let mut a = 0.0;
    for_each_box_point(r, ka, |k| {
        a += exp_integral_e1(PI * quadratic_form(form, k))
    });
    let mut b = 0.0;
    for_each_box_point(r, kb, |k| {
        let x = PI * quadratic_form(&dual, k);
        b += upper_gamma(C::new(half, 0.0), x).re * x.powf(-half);
    });
    let v = -PI.ln() - EULER_GAMMA + a + b - 2.0 / r as f64;
    Ok((v, ta + tb + 1e-14 * (a.abs() + b.abs() + 3.0)))
}

// ---------------------------------------------------------------------------
// closed form for binary forms

/// Kronecker's limit formula: `Z′(0) = ln a − 2 ln 2π − 4 ln|η(τ_Q)|`, `τ_Q = (−b + i√D)/(2a)`.
fn kronecker_dz0(form: &[Vec<f64>]) -> (f64, f64) {
    let (a, b, c) = (form[0][0], 2.0 * form[0][1], form[1][1]);
    let d = 4.0 * a * c - b * b;
    let tau = C::new(-b / (2.0 * a), d.sqrt() / (2.0 * a));
    let (le, bound) = ln_abs_dedekind_eta(tau);
    let v = a.ln() - 2.0 * (2.0 * PI).ln() - 4.0 * le;
    (v, 4.0 * bound + 1e-15 * (1.0 + v.abs()))
}

// ---------------------------------------------------------------------------
// Euler–Maclaurin along lattice rows

const ROW_HALF_WIDTH: i64 = 30;
const ROW_EM_TERMS: usize = 10;
const GL_NODES: usize = 20;

#[derive(Clone, Copy)]
enum RowFn {
    /// `P^{−s}`
    Power(C),
    /// `−ln P`, the `s`-derivative of `P^{−s}` at `0`
    NegLog,
}

fn gl() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(GL_NODES))
}

/// Row `Σ_m f(a(m+x)² + y)`.
struct Row {
    a: f64,
    x: f64,
    y: f64,
}

impl Row {
    fn kappa(&self) -> f64 {
        (self.y / self.a).sqrt()
    }

    /// Taylor coefficients of `f` at `t`, orders `0..=order`.
    fn taylor(&self, f: RowFn, t: f64, order: usize) -> Vec<C> {
        let u = t + self.x;
        let a = self.a;
        let big_a = a * u * u + self.y;
        let big_b = 2.0 * a * u;
        let mut h = vec![C::new(0.0, 0.0); order + 1];
        match f {
            RowFn::Power(s) => {
                // P h′ = −s P′ h
                h[0] = (-s * big_a.ln()).exp();
                for k in 0..order {
                    let prev = if k == 0 { C::new(0.0, 0.0) } else { h[k - 1] };
                    h[k + 1] = -((s + k as f64) * big_b * h[k]
                        + a * (s * 2.0 + (k as f64 - 1.0)) * prev)
                        / ((k + 1) as f64 * big_a);
                }
            }
            RowFn::NegLog => {
                // P(u+ε) = a(ε − r)(ε − r̄), r = −u + iκ
                h[0] = C::new(-big_a.ln(), 0.0);
                let root = C::new(-u, self.kappa());
                let inv = 1.0 / root;
                let mut pw = inv;
                for (j, hj) in h.iter_mut().enumerate().skip(1) {
                    *hj = C::new(2.0 * pw.re / j as f64, 0.0);
                    pw *= inv;
                }
            }
        }
        h
    }

    /// Bound on `max |f|` over a Bernstein ellipse around a unit panel.
    fn panel_bound(&self, f: RowFn, center: f64) -> f64 {
        let kappa = self.kappa();
        let h = 0.5;
        let b_e = 0.9 * kappa;
        let rho = b_e / h + ((b_e / h).powi(2) + 1.0).sqrt();
        let a_e = h * (rho + 1.0 / rho) / 2.0;
        let umax = (center + self.x).abs() + a_e;
        let lo = self.a * (kappa - b_e).powi(2);
        let hi = self.a * (umax + b_e + kappa).powi(2);
        let mx = match f {
            RowFn::Power(s) => (PI * s.im.abs()).exp() * lo.powf(-s.re).max(hi.powf(-s.re)),
            RowFn::NegLog => lo.ln().abs().max(hi.ln().abs()) + PI,
        };
        64.0 / 15.0 * mx * h / ((rho * rho - 1.0) * rho.powi(2 * GL_NODES as i32))
    }

    /// Euler–Maclaurin remainder over both tails `|u| ≥ big_u`.
    fn tail_bound(&self, f: RowFn, big_u: f64) -> f64 {
        let p = ROW_EM_TERMS;
        let fact: f64 = (1..=2 * p).map(|v| v as f64).product();
        let pref = 2.0 * 2.01 * fact / PI.powi(2 * p as i32);
        let kappa = self.kappa();
        let spread = (9.0 / 4.0 + kappa * kappa / (big_u * big_u)).ln();
        match f {
            RowFn::Power(s) => {
                let sigma = s.re;
                let kc = (PI * s.im.abs()).exp()
                    * if sigma >= 0.0 {
                        (self.a / 4.0).powf(-sigma)
                    } else {
                        (self.a * spread.exp()).powf(-sigma)
                    };
                let e = 2.0 * p as f64 + 2.0 * sigma - 1.0;
                pref * kc * big_u.powf(-e) / e
            }
            RowFn::NegLog => {
                let l0 = self.a.ln().abs() + 4f64.ln() + spread + PI;
                let e = 2.0 * p as f64 - 1.0;
                let up = big_u.powf(-e);
                pref * (l0 * up / e + 2.0 * (up * big_u.ln() / e + up / (e * e)))
            }
        }
    }

    /// `f(c + dt) − f(c)` without cancellation against `f(c)`.
    fn delta(&self, f: RowFn, c: f64, dt: f64) -> C {
        let uc = c + self.x;
        let pc = self.a * uc * uc + self.y;
        let l = (self.a * dt * (2.0 * uc + dt) / pc).ln_1p();
        match f {
            RowFn::Power(s) => {
                let w = -s * l;
                let em1 = C::new(
                    w.re.exp_m1() * w.im.cos() - 2.0 * (0.5 * w.im).sin().powi(2),
                    w.re.exp() * w.im.sin(),
                );
                (-s * pc.ln()).exp() * em1
            }
            RowFn::NegLog => C::new(-l, 0.0),
        }
    }

    /// `Σ_m f(m) − ∫ f` over the whole line, panel by panel.
    fn defect(&self, f: RowFn) -> Bounded {
        let m0 = (-self.x).round() as i64;
        let (m1, m2) = (m0 - ROW_HALF_WIDTH, m0 + ROW_HALF_WIDTH);
        let (nodes, weights) = gl();
        let mut mag = 0.0;
        let mut sum = CompensatedSum::default();
        let mut quad_bound = 0.0;
        for m in m1..m2 {
            let center = m as f64 + 0.5;
            // trapezoid minus Gauss–Legendre on [m, m+1], relative to f(center)
            let (lo, hi) = (self.delta(f, center, -0.5), self.delta(f, center, 0.5));
            let mut panel = 0.5 * (lo + hi);
            let mut panel_mag = 0.5 * (lo.norm() + hi.norm());
            for (xi, wi) in nodes.iter().zip(weights) {
                let v = self.delta(f, center, 0.5 * xi);
                panel -= 0.5 * wi * v;
                panel_mag += 0.5 * wi * v.norm();
            }
            sum.add(panel);
            mag += panel_mag;
            quad_bound += self.panel_bound(f, center);
        }
        let b = bernoulli_f64();
        let h1 = self.taylor(f, m1 as f64, 2 * ROW_EM_TERMS - 1);
        let h2 = self.taylor(f, m2 as f64, 2 * ROW_EM_TERMS - 1);
        for k in 1..=ROW_EM_TERMS {
            // B_{2k}/(2k)! · f^{(2k−1)} = B_{2k}/(2k) · h_{2k−1}
            let t = b[2 * k] / (2 * k) as f64 * (h2[2 * k - 1] - h1[2 * k - 1]);
            sum.add(-t);
            mag += t.norm();
        }
        let big_u = (m1 as f64 + self.x).abs().min((m2 as f64 + self.x).abs());
        let bound = self.tail_bound(f, big_u) + quad_bound + 1e-15 * mag + sum.bound();
        Bounded {
            value: sum.value(),
            bound,
        }
    }
}

/// Neumaier summation of complex terms.
#[derive(Default)]
struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
    abs: f64,
}

impl CompensatedSum {
    fn step((s, c): (f64, f64), x: f64) -> (f64, f64) {
        let t = s + x;
        let c = if s.abs() >= x.abs() {
            c + ((s - t) + x)
        } else {
            c + ((x - t) + s)
        };
        (t, c)
    }

    fn add(&mut self, z: C) {
        self.re = Self::step(self.re, z.re);
        self.im = Self::step(self.im, z.im);
        self.abs += z.norm();
    }

    fn value(&self) -> C {
        C::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }

    fn bound(&self) -> f64 {
        4.0 * f64::EPSILON * self.abs
    }
}

/// Poisson bound on `|Σ_m f − ∫ f|` for row `n`.
fn row_poisson_bound(f: RowFn, a: f64, kappa: f64) -> f64 {
    let mut acc = 0.0;
    for k in 1..10_000 {
        let x = 2.0 * PI * k as f64 * kappa;
        let t = match f {
            RowFn::Power(s) => {
                // |K_ν(x)| ≤ K_{3/2}(x) for |Re ν| ≤ 3/2
                let k32 = (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 1.0 / x);
                let pref = 2.0
                    * (-s * a.ln()).exp().norm()
                    * 2.0
                    * ((s * PI.ln()).exp() * rgamma(s)).norm();
                pref * (k as f64 / kappa).powf(s.re - 0.5) * k32
            }
            RowFn::NegLog => 2.0 * (-x).exp() / k as f64,
        };
        acc += t;
        if t < 1e-30 {
            break;
        }
    }
    acc
}

/// Rows `1..=n_max` evaluated; rows beyond bounded through Poisson summation.
fn row_sum(form: &[Vec<f64>], f: RowFn) -> Bounded {
    let (a, b, c) = (form[0][0], 2.0 * form[0][1], form[1][1]);
    let d = 4.0 * a * c - b * b;
    let kappa1 = d.sqrt() / (2.0 * a);
    let mut n_max = 1usize;
    let tail = |from: usize| -> f64 {
        let mut acc = 0.0;
        for n in from.. {
            let t = 2.0 * row_poisson_bound(f, a, n as f64 * kappa1);
            acc += t;
            if t < 1e-30 || n > from + 10_000 {
                break;
            }
        }
        acc
    };
    let mut t = tail(n_max + 1);
    while t > 1e-16 && n_max < 60 {
        n_max += 1;
        t = tail(n_max + 1);
    }
    let mut value = C::new(0.0, 0.0);
    let mut bound = t;
    for n in 1..=n_max {
        let nf = n as f64;
        let row = Row {
            a,
            x: b * nf / (2.0 * a),
            y: nf * nf * d / (4.0 * a),
        };
        let dn = row.defect(f);
        value += 2.0 * dn.value;
        bound += 2.0 * dn.bound;
    }
    Bounded { value, bound }
}

/// `Z(s) = 2a^{−s}ζ(2s) + 2a^{−1/2}√π Γ(s−½)/Γ(s) (D/4a)^{1/2−s} ζ(2s−1) + Σ_{n≠0} (row defects)`.
fn em_rank2(form: &[Vec<f64>], s: C) -> Result<Bounded, TorsionError> {
    if !(-1.0..=2.0).contains(&s.re) {
        return unsupported("lattice Euler–Maclaurin continuation covers −1 ≤ Re s ≤ 2");
    }
    if (s - 0.5).norm() < 1e-6 || (s + 0.5).norm() < 1e-6 {
        return unsupported("lattice Euler–Maclaurin continuation excludes s = ±1/2");
    }
    let (a, b, c) = (form[0][0], 2.0 * form[0][1], form[1][1]);
    let d = 4.0 * a * c - b * b;
    let z2s = riemann_zeta(2.0 * s)?;
    let f0 = 2.0 * (-s * a.ln()).exp();
    let z2s1 = riemann_zeta(2.0 * s - 1.0)?;
    let g = if s == C::new(0.0, 0.0) {
        C::new(0.0, 0.0)
    } else {
        gamma(s - 0.5) * rgamma(s)
    };
    let f1 = 2.0 / a.sqrt() * PI.sqrt() * g * ((0.5 - s) * (d / (4.0 * a)).ln()).exp();
    let rows = if s == C::new(0.0, 0.0) {
        Bounded {
            value: C::new(0.0, 0.0),
            bound: 0.0,
        }
    } else {
        row_sum(form, RowFn::Power(s))
    };
    Ok(Bounded {
        value: f0 * z2s.value + f1 * z2s1.value + rows.value,
        bound: f0.norm() * z2s.bound
            + f1.norm() * z2s1.bound
            + 2.0 * gamma_rel_error(s) * (f1 * z2s1.value).norm()
            + rows.bound,
    })
}

fn em_rank2_dz0(form: &[Vec<f64>]) -> Result<(f64, f64), TorsionError> {
    let (a, b, c) = (form[0][0], 2.0 * form[0][1], form[1][1]);
    let d = 4.0 * a * c - b * b;
    let zero = C::new(0.0, 0.0);
    let z0 = riemann_zeta(zero)?;
    let dz0 = riemann_zeta_derivative(zero)?;
    let zm1 = riemann_zeta(C::new(-1.0, 0.0))?;
    let row0 = -2.0 * a.ln() * z0.value.re + 4.0 * dz0.value.re;
    // 2a^{−1/2}√π Γ(−1/2) (D/4a)^{1/2} = −2π√D/a
    let s0 = -2.0 * PI * d.sqrt() / a * zm1.value.re;
    let rows = row_sum(form, RowFn::NegLog);
    let v = row0 + s0 + rows.value.re;
    let bound = 2.0 * a.ln().abs() * z0.bound
        + 4.0 * dz0.bound
        + 2.0 * PI * d.sqrt() / a * zm1.bound
        + rows.bound;
    Ok((v, bound))
}

#[cfg(test)]
mod tests {
    use super::super::spectrum::TorusLaplacian;
    use super::*;

    const TORUS_DET: f64 = 1.393_203_929_685_676_9;

    fn real(v: f64) -> C {
        C::new(v, 0.0)
    }

    #[test]
    fn circle_values() {
        let c = SpectrumModel::circle(2.0 * PI);
        let z = zeta_at(&c, real(0.0)).unwrap();
        assert_eq!(z.method, ZetaMethod::ClosedForm);
        assert!((z.value.re + 1.0).abs() < 1e-15);
        let d = regularized_det(&c).unwrap();
        assert!((d.det - 4.0 * PI * PI).abs() < 1e-9);
        for m in [ZetaMethod::EulerMaclaurin, ZetaMethod::MellinTheta] {
            let d2 = regularized_det_with(&c, m).unwrap();
            assert!(
                (d2.det - d.det).abs() <= d.error_bound + d2.error_bound + 1e-12,
                "{m:?} {}",
                d2.det
            );
        }
        // ζ(1) = 2ζ_R(2) for L = 2π
        let z1 = zeta_at(&c, real(1.0)).unwrap();
        assert!((z1.value.re - PI * PI / 3.0).abs() < 1e-12);
        assert!(
            matches!(zeta_at(&c, real(0.5)), Err(TorsionError::Pole { residue, .. }) if (residue - 1.0).abs() < 1e-12)
        );
    }

    #[test]
    fn torus_three_ways() {
        let t = SpectrumModel::flat_torus_tau(C::new(0.0, 1.0), 1.0, TorusLaplacian::Dolbeault);
        let mut dets = Vec::new();
        for m in [
            ZetaMethod::ClosedForm,
            ZetaMethod::MellinTheta,
            ZetaMethod::EulerMaclaurin,
        ] {
            let d = regularized_det_with(&t, m).unwrap();
            assert!(
                (d.det - TORUS_DET).abs() < 1e-9,
                "{m:?}: {} ± {}",
                d.det,
                d.error_bound
            );
            assert!(d.error_bound < 1e-9);
            dets.push(d);
        }
        for s in [real(0.1), C::new(-0.3, 2.0), real(1.5), C::new(0.7, -0.4)] {
            let a = zeta_at_with(&t, s, ZetaMethod::MellinTheta).unwrap();
            let b = zeta_at_with(&t, s, ZetaMethod::EulerMaclaurin).unwrap();
            assert!(
                (a.value - b.value).norm() <= a.error_bound + b.error_bound + 1e-13,
                "{s}: {} vs {}",
                a.value,
                b.value
            );
        }
    }

    #[test]
    fn skewed_torus_methods_agree() {
        let t = SpectrumModel::flat_torus_tau(C::new(0.31, 0.45), 2.5, TorusLaplacian::DeRham);
        let a = regularized_det_with(&t, ZetaMethod::ClosedForm).unwrap();
        let b = regularized_det_with(&t, ZetaMethod::MellinTheta).unwrap();
        let c = regularized_det_with(&t, ZetaMethod::EulerMaclaurin).unwrap();
        assert!((a.log_det - b.log_det).abs() < 1e-10);
        assert!((a.log_det - c.log_det).abs() < 1e-10);
        let s = C::new(2.0, 0.0);
        let za = zeta_at_with(&t, s, ZetaMethod::MellinTheta).unwrap();
        let zb = zeta_at_with(&t, s, ZetaMethod::EulerMaclaurin).unwrap();
        assert!((za.value - zb.value).norm() < 1e-10);
    }

    #[test]
    fn explicit_spectra() {
        let e = SpectrumModel::explicit(vec![(1.0, 2), (2.0, 1)]);
        let z = zeta_at(&e, real(1.0)).unwrap();
        assert!((z.value.re - 2.5).abs() < 1e-15);
        let d = regularized_det(&SpectrumModel::explicit(vec![(2.0, 1), (0.0, 3)])).unwrap();
        assert!((d.det - 2.0).abs() < 1e-15);
        assert_eq!(d.harmonic_dim, 3);
    }

    #[test]
    fn rank_three_product() {
        // circle × torus is a rank-3 lattice; its ζ(0) is −1
        let p = SpectrumModel::product(
            SpectrumModel::circle(1.0),
            SpectrumModel::rectangle(1.0, 1.0),
        );
        let z = zeta_at_zero(&p).unwrap();
        assert_eq!(z.method, ZetaMethod::MellinTheta);
        assert_eq!(z.zeta0, -1.0);
        assert!(z.error_bound < 1e-10);
        assert!(matches!(
            zeta_at(&p, real(1.5)),
            Err(TorsionError::Pole { .. })
        ));
        // ζ of the cube at s = 2 against a direct sum with a tail estimate
        let direct: f64 = p
            .eigenvalues_up_to(4.0 * PI * PI * 400.0)
            .iter()
            .map(|(l, m)| *m as f64 / (l * l))
            .sum();
        let v = zeta_at(&p, real(2.0)).unwrap().value.re;
        // tail ≈ ∫_{R}^∞ 4πr² (4π²r²)^{−2} dr = 1/(4π³R) at R = 20
        assert!(
            (v - direct - 1.0 / (4.0 * PI.powi(3) * 20.0)).abs() < 1e-5,
            "{v} {direct}"
        );
    }
}
