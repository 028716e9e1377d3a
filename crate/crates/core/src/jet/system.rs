//! Linear PDE systems in jet coordinates.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::algebra::{int, var_list, Field, MultiPoly, VarList};
use crate::{QMatrix, QPoly, Rational};

use super::JetError;

/// The jet coordinate `u_{a,α}`: unknown index plus a multi-index of derivative counts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Jet {
    pub unknown: usize,
    pub alpha: Vec<u32>,
}

impl Jet {
    pub fn new(unknown: usize, alpha: Vec<u32>) -> Self {
        Jet { unknown, alpha }
    }

    pub fn order(&self) -> usize {
        self.alpha.iter().map(|&a| a as usize).sum()
    }

    pub fn shifted(&self, i: usize) -> Jet {
        let mut alpha = self.alpha.clone();
        alpha[i] += 1;
        Jet {
            unknown: self.unknown,
            alpha,
        }
    }

    /// `D[x,x](u)`-style rendering; plain `u` at order zero.
    pub fn render(&self, vars: &[String], unknowns: &[String]) -> String {
        if self.order() == 0 {
            return unknowns[self.unknown].clone();
        }
        let mut names = Vec::new();
        for (i, &a) in self.alpha.iter().enumerate() {
            for _ in 0..a {
                names.push(vars[i].as_str());
            }
        }
        format!("D[{}]({})", names.join(","), unknowns[self.unknown])
    }
}

/// `Σ c_J(x)·u_J = 0` with polynomial coefficients in the independent variables.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearEquation {
    terms: BTreeMap<Jet, QPoly>,
}

impl LinearEquation {
    pub fn new<I: IntoIterator<Item = (Jet, QPoly)>>(terms: I) -> Self {
        let mut eq = LinearEquation {
            terms: BTreeMap::new(),
        };
        for (j, c) in terms {
            eq.add(j, &c);
        }
        eq
    }

    pub fn add(&mut self, jet: Jet, c: &QPoly) {
        if c.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&jet) {
            Some(old) => &old + c,
            None => c.clone(),
        };
        if !merged.is_zero() {
            self.terms.insert(jet, merged);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Jet, QPoly> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn order(&self) -> usize {
        self.terms.keys().map(Jet::order).max().unwrap_or(0)
    }

    /// Terms of maximal order.
    pub fn principal_part(&self) -> impl Iterator<Item = (&Jet, &QPoly)> {
        let q = self.order();
        self.terms.iter().filter(move |(j, _)| j.order() == q)
    }

    /// Total derivative `D_i`.
    pub fn total_derivative(&self, i: usize) -> LinearEquation {
        let mut out = LinearEquation {
            terms: BTreeMap::new(),
        };
        for (jet, c) in &self.terms {
            out.add(jet.clone(), &c.derivative(i));
            out.add(jet.shifted(i), c);
        }
        out
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.terms.values().all(|c| c.is_constant())
    }
}

/// A linear PDE system with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeSystem {
    name: String,
    indep_vars: VarList,
    unknowns: Vec<String>,
    equations: Vec<LinearEquation>,
    order: usize,
    base_point: Option<Vec<Rational>>,
}

impl PdeSystem {
    pub fn new(
        name: impl Into<String>,
        indep_vars: VarList,
        unknowns: Vec<String>,
        equations: Vec<LinearEquation>,
    ) -> Result<Self, JetError> {
        let name = name.into();
        if indep_vars.is_empty() {
            return Err(JetError::InvalidSystem(format!(
                "system `{name}` has no independent variables"
            )));
        }
        if unknowns.is_empty() {
            return Err(JetError::InvalidSystem(format!(
                "system `{name}` has no unknowns"
            )));
        }
        let n = indep_vars.len();
        for eq in &equations {
            for (jet, c) in eq.terms() {
                if jet.alpha.len() != n || jet.unknown >= unknowns.len() {
                    return Err(JetError::InvalidSystem(format!(
                        "malformed jet in system `{name}`"
                    )));
                }
                if c.vars() != &indep_vars {
                    return Err(JetError::InvalidSystem(format!(
                        "coefficient ring mismatch in system `{name}`"
                    )));
                }
            }
        }
        let equations: Vec<LinearEquation> =
            equations.into_iter().filter(|e| !e.is_zero()).collect();
        let order = equations
            .iter()
            .map(LinearEquation::order)
            .max()
            .unwrap_or(0);
        if equations.is_empty() {
            return Err(JetError::InvalidSystem(format!(
                "system `{name}` has no equations; use a free system"
            )));
        }
        if order == 0 {
            return Err(JetError::InvalidSystem(format!(
                "system `{name}` has only order-0 equations"
            )));
        }
        Ok(PdeSystem {
            name,
            indep_vars,
            unknowns,
            equations,
            order,
            base_point: None,
        })
    }

    /// The empty system of the given order: every jet is free.
    pub fn free<S: AsRef<str>>(vars: &[S], unknowns: &[S], order: usize) -> Self {
        PdeSystem {
            name: "free".into(),
            indep_vars: var_list(vars),
            unknowns: unknowns.iter().map(|s| s.as_ref().to_string()).collect(),
            equations: Vec::new(),
            order: order.max(1),
            base_point: None,
        }
    }

    pub fn with_base_point(mut self, point: Vec<Rational>) -> Result<Self, JetError> {
        if point.len() != self.indep_vars.len() {
            return Err(JetError::InvalidSystem(format!(
                "base point has {} coordinates, expected {}",
                point.len(),
                self.indep_vars.len()
            )));
        }
        self.base_point = Some(point);
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn indep_vars(&self) -> &VarList {
        &self.indep_vars
    }

    pub fn unknowns(&self) -> &[String] {
        &self.unknowns
    }

    pub fn equations(&self) -> &[LinearEquation] {
        &self.equations
    }

    pub fn n(&self) -> usize {
        self.indep_vars.len()
    }

    pub fn m(&self) -> usize {
        self.unknowns.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_free(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn base_point(&self) -> Option<&[Rational]> {
        self.base_point.as_deref()
    }

    /// Declared base point, or the origin.
    pub fn point(&self) -> Vec<Rational> {
        self.base_point
            .clone()
            .unwrap_or_else(|| vec![Rational::zero(); self.n()])
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.equations
            .iter()
            .all(LinearEquation::is_constant_coefficient)
    }

    /// Principal coefficients of equation `e` evaluated at `point`.
    pub fn principal_at(&self, e: usize, point: &[Rational]) -> Vec<(Jet, Rational)> {
        self.equations[e]
            .principal_part()
            .map(|(j, c)| (j.clone(), c.eval(point)))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    /// Applies the constant linear change `ξ = P·η` of covector coordinates,
    /// i.e. `∂_{x_i} = Σ_j P_ij ∂_{y_j}`; constant-coefficient systems only.
    pub fn linear_change(&self, p: &QMatrix, new_vars: VarList) -> Result<PdeSystem, JetError> {
        let n = self.n();
        if !self.is_constant_coefficient() {
            return Err(JetError::Unsupported(
                "linear change requires constant coefficients".into(),
            ));
        }
        if p.rows() != n || p.cols() != n || new_vars.len() != n || p.determinant().is_zero() {
            return Err(JetError::InvalidSystem(
                "linear change must be an invertible n×n matrix".into(),
            ));
        }
        let xi_names: Vec<String> = (0..n).map(|i| format!("_e{i}")).collect();
        let ring = var_list(&xi_names);
        let images: Vec<QPoly> = (0..n)
            .map(|i| {
                let mut acc = MultiPoly::zero(ring.clone());
                for j in 0..n {
                    acc = &acc + &MultiPoly::var(ring.clone(), j).scale(p.get(i, j));
                }
                acc
            })
            .collect();
        let mut equations = Vec::new();
        for eq in &self.equations {
            let mut out = LinearEquation {
                terms: BTreeMap::new(),
            };
            for (jet, c) in eq.terms() {
                let c = c.constant_value().unwrap_or_else(Rational::zero);
                let mut op = MultiPoly::constant(ring.clone(), c);
                for (i, &a) in jet.alpha.iter().enumerate() {
                    op = &op * &images[i].pow(a);
                }
                for (m, k) in op.terms() {
                    out.add(
                        Jet::new(jet.unknown, m.clone()),
                        &MultiPoly::constant(new_vars.clone(), k.clone()),
                    );
                }
            }
            equations.push(out);
        }
        if self.is_free() {
            let mut f = self.clone();
            f.indep_vars = new_vars;
            return Ok(f);
        }
        PdeSystem::new(
            self.name.clone(),
            new_vars,
            self.unknowns.clone(),
            equations,
        )
    }
}

impl fmt::Display for PdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name)?;
        let eqs: Vec<String> = self
            .equations
            .iter()
            .map(|e| {
                let parts: Vec<String> = e
                    .terms()
                    .iter()
                    .map(|(j, c)| format!("({c})*{}", j.render(&self.indep_vars, &self.unknowns)))
                    .collect();
                format!("{} = 0", parts.join(" + "))
            })
            .collect();
        write!(f, "{}", eqs.join("; "))
    }
}

/// Small constructors for the classical systems used throughout tests and the CLI.
pub mod catalog {
    use super::*;

    fn c(vars: &VarList, v: i64) -> QPoly {
        MultiPoly::constant(vars.clone(), int(v))
    }

    fn jet(n: usize, unknown: usize, derivs: &[usize]) -> Jet {
        let mut alpha = vec![0; n];
        for &d in derivs {
            alpha[d] += 1;
        }
        Jet::new(unknown, alpha)
    }

    fn scalar(name: &str, names: &[&str], terms: &[(i64, &[usize])]) -> PdeSystem {
        let vars = var_list(names);
        let eq = LinearEquation::new(
            terms
                .iter()
                .map(|(k, d)| (jet(names.len(), 0, d), c(&vars, *k))),
        );
        PdeSystem::new(name, vars, vec!["u".into()], vec![eq]).expect("catalog system")
    }

    /// `Σ ∂_i² u = 0` in `n` variables.
    pub fn laplace(n: usize) -> PdeSystem {
        let names: Vec<String> = if n <= 3 {
            ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
        } else {
            (1..=n).map(|i| format!("x{i}")).collect()
        };
        let vars = var_list(&names);
        let eq = LinearEquation::new((0..n).map(|i| (jet(n, 0, &[i, i]), c(&vars, 1))));
        PdeSystem::new("laplace", vars, vec!["u".into()], vec![eq]).expect("catalog system")
    }

    pub fn wave() -> PdeSystem {
        scalar("wave", &["t", "x"], &[(1, &[0, 0]), (-1, &[1, 1])])
    }

    pub fn heat() -> PdeSystem {
        scalar("heat", &["t", "x"], &[(1, &[0]), (-1, &[1, 1])])
    }

    /// `u_x = 0` on the line.
    pub fn d_x() -> PdeSystem {
        scalar("dx", &["x"], &[(1, &[0])])
    }

    /// `u_y = 0` on the line with coordinate `y`.
    pub fn d_y() -> PdeSystem {
        scalar("dy", &["y"], &[(1, &[0])])
    }

    /// `y·u_xx + u_yy = 0`.
    pub fn tricomi() -> PdeSystem {
        let vars = var_list(&["x", "y"]);
        let y = MultiPoly::var(vars.clone(), 1);
        let eq = LinearEquation::new([(jet(2, 0, &[0, 0]), y), (jet(2, 0, &[1, 1]), c(&vars, 1))]);
        PdeSystem::new("tricomi", vars, vec!["u".into()], vec![eq]).expect("catalog system")
    }

    /// `{u_x = 0, u_y = 0}`.
    pub fn gradient_zero() -> PdeSystem {
        let vars = var_list(&["x", "y"]);
        let eqs = vec![
            LinearEquation::new([(jet(2, 0, &[0]), c(&vars, 1))]),
            LinearEquation::new([(jet(2, 0, &[1]), c(&vars, 1))]),
        ];
        PdeSystem::new("gradient_zero", vars, vec!["u".into()], eqs).expect("catalog system")
    }

    /// `{u_xx = 0, u_yy = 0}`.
    pub fn pure_second_derivatives() -> PdeSystem {
        let vars = var_list(&["x", "y"]);
        let eqs = vec![
            LinearEquation::new([(jet(2, 0, &[0, 0]), c(&vars, 1))]),
            LinearEquation::new([(jet(2, 0, &[1, 1]), c(&vars, 1))]),
        ];
        PdeSystem::new("uxx_uyy", vars, vec!["u".into()], eqs).expect("catalog system")
    }

    /// Real form of the Cauchy–Riemann operator: `u_x − v_y = 0`, `u_y + v_x = 0`.
    pub fn cauchy_riemann() -> PdeSystem {
        let vars = var_list(&["x", "y"]);
        let eqs = vec![
            LinearEquation::new([
                (jet(2, 0, &[0]), c(&vars, 1)),
                (jet(2, 1, &[1]), c(&vars, -1)),
            ]),
            LinearEquation::new([
                (jet(2, 0, &[1]), c(&vars, 1)),
                (jet(2, 1, &[0]), c(&vars, 1)),
            ]),
        ];
        PdeSystem::new("cauchy_riemann", vars, vec!["u".into(), "v".into()], eqs)
            .expect("catalog system")
    }

    /// `u' = A·u` on the line, one equation per component.
    pub fn linear_ode(a: &QMatrix) -> PdeSystem {
        let m = a.rows();
        let vars = var_list(&["x"]);
        let unknowns: Vec<String> = (0..m).map(|i| format!("u{}", i + 1)).collect();
        let eqs = (0..m)
            .map(|r| {
                let mut terms = vec![(Jet::new(r, vec![1]), c(&vars, 1))];
                for col in 0..m {
                    terms.push((
                        Jet::new(col, vec![0]),
                        MultiPoly::constant(vars.clone(), -a.get(r, col).clone()),
                    ));
                }
                LinearEquation::new(terms)
            })
            .collect();
        PdeSystem::new("linear_ode", vars, unknowns, eqs).expect("catalog system")
    }

    /// `u_x = a·u`, `u_y = b·u` with polynomial `a`, `b` in `x, y`.
    pub fn frobenius(a: QPoly, b: QPoly) -> PdeSystem {
        let vars = a.vars().clone();
        let eqs = vec![
            LinearEquation::new([(jet(2, 0, &[0]), c(&vars, 1)), (jet(2, 0, &[]), -a)]),
            LinearEquation::new([(jet(2, 0, &[1]), c(&vars, 1)), (jet(2, 0, &[]), -b)]),
        ];
        PdeSystem::new("frobenius", vars, vec!["u".into()], eqs).expect("catalog system")
    }

    /// `u' = s·u` on the line.
    pub fn scaled_exponential(s: Rational) -> PdeSystem {
        let vars = var_list(&["x"]);
        let eq = LinearEquation::new([
            (Jet::new(0, vec![1]), c(&vars, 1)),
            (Jet::new(0, vec![0]), MultiPoly::constant(vars.clone(), -s)),
        ]);
        PdeSystem::new("exp_family", vars, vec!["u".into()], vec![eq]).expect("catalog system")
    }

    /// Coefficient helper for equation terms with a rational constant.
    pub fn constant(vars: &VarList, v: Rational) -> QPoly {
        MultiPoly::constant(vars.clone(), v)
    }

    pub fn unit(vars: &VarList) -> QPoly {
        MultiPoly::constant(vars.clone(), <Rational as Field>::from_i64(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_and_flags() {
        let l = catalog::laplace(2);
        assert_eq!(l.order(), 2);
        assert!(l.is_constant_coefficient());
        assert!(!catalog::tricomi().is_constant_coefficient());
        assert_eq!(catalog::heat().order(), 2);
    }

    #[test]
    fn total_derivative_uses_leibniz() {
        let t = catalog::tricomi();
        let d = t.equations()[0].total_derivative(1);
        // D_y(y u_xx + u_yy) = u_xx + y u_xxy + u_yyy
        assert_eq!(d.terms().len(), 3);
        assert_eq!(d.order(), 3);
    }

    #[test]
    fn rejects_order_zero() {
        let vars = var_list(&["x"]);
        let eq = LinearEquation::new([(Jet::new(0, vec![0]), catalog::unit(&vars))]);
        assert!(PdeSystem::new("bad", vars, vec!["u".into()], vec![eq]).is_err());
    }

    #[test]
    fn jets_render_in_dsl_form() {
        let vars: Vec<String> = vec!["x".into(), "y".into()];
        let u: Vec<String> = vec!["u".into()];
        assert_eq!(Jet::new(0, vec![2, 1]).render(&vars, &u), "D[x,x,y](u)");
        assert_eq!(Jet::new(0, vec![0, 0]).render(&vars, &u), "u");
    }
}
