//! Recursive-descent parser producing a [`Document`].

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::{parse_rational, var_list, MultiPoly, VarList};
use crate::index::CohomologyRingModel;
use crate::jet::{Jet, LinearEquation, PdeSystem};
use crate::microlocal::{ConeKind, ConeSpec, Region, SignCondition};
use crate::torsion::TorusLaplacian;
use crate::{QPoly, Rational};

use super::lexer::{tokenize, Span, Tok, Token};
use super::{Diagnostic, Document, Item, ModelDecl, RegionDecl, SpectrumBody, SpectrumDecl};

pub const MAX_DEPTH: usize = 64;
pub const MAX_EXPONENT: u32 = 64;
pub const MAX_DEGREE: u32 = 1024;
pub const MAX_DECIMAL_EXPONENT: i64 = 30;
pub const MAX_TERMS: usize = 100_000;

const KEYWORDS: [&str; 5] = ["system", "region", "cone", "spectrum", "model"];

pub fn parse_pde_dsl(text: &str) -> Result<Document, Diagnostic> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let mut doc = Document {
        source: text.to_string(),
        ..Default::default()
    };
    loop {
        let t = p.peek().clone();
        let kw = match &t.tok {
            Tok::Eof => break,
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => s.clone(),
            other => {
                return Err(Diagnostic::syntax(
                    t.span,
                    format!("unexpected {}", other.describe()),
                    KEYWORDS.iter().map(|k| format!("`{k}`")).collect(),
                ))
            }
        };
        p.bump();
        let (name, name_span) = p.ident()?;
        if doc.spans.contains_key(&(kw.clone(), name.clone())) {
            return Err(Diagnostic::semantic(
                name_span,
                format!("duplicate {kw} `{name}`"),
            ));
        }
        p.expect("{")?;
        let item = match kw.as_str() {
            "system" => Item::System(p.system(name.clone(), t.span)?),
            "region" => Item::Region(p.region(name.clone())?),
            "cone" => Item::Cone(p.cone(name.clone(), t.span)?),
            "spectrum" => Item::Spectrum(p.spectrum(name.clone(), t.span, &doc)?),
            _ => Item::Model(p.model(name.clone(), t.span)?),
        };
        doc.items.push(item);
        doc.spans.insert((kw, name), t.span);
    }
    Ok(doc)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
}

/// Ring context for expressions: independent variables and unknown names.
struct Scope<'a> {
    vars: &'a VarList,
    unknowns: &'a [String],
}

/// `src + Σ c_J u_J`.
#[derive(Clone)]
struct Lin {
    src: QPoly,
    jets: BTreeMap<Jet, QPoly>,
}

impl Lin {
    fn constant(vars: &VarList, c: Rational) -> Lin {
        Lin {
            src: MultiPoly::constant(vars.clone(), c),
            jets: BTreeMap::new(),
        }
    }

    fn is_linear_part_zero(&self) -> bool {
        self.jets.values().all(QPoly::is_zero)
    }

    fn add(mut self, other: Lin, sign: bool) -> Lin {
        self.src = if sign {
            &self.src + &other.src
        } else {
            &self.src - &other.src
        };
        for (j, c) in other.jets {
            let c = if sign { c } else { -c };
            let merged = match self.jets.remove(&j) {
                Some(old) => &old + &c,
                None => c,
            };
            if !merged.is_zero() {
                self.jets.insert(j, merged);
            }
        }
        self
    }

    fn neg(self) -> Lin {
        Lin {
            src: -self.src,
            jets: self.jets.into_iter().map(|(j, c)| (j, -c)).collect(),
        }
    }

    fn degree(&self) -> u32 {
        std::iter::once(&self.src)
            .chain(self.jets.values())
            .filter_map(QPoly::total_degree)
            .max()
            .unwrap_or(0)
    }

    fn terms(&self) -> usize {
        self.src.num_terms() + self.jets.values().map(QPoly::num_terms).sum::<usize>()
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, Diagnostic> {
        let t = self.peek();
        Err(Diagnostic::syntax(
            t.span,
            format!("unexpected {}", t.tok.describe()),
            expected.iter().map(|e| e.to_string()).collect(),
        ))
    }

    fn expect(&mut self, s: &str) -> Result<Span, Diagnostic> {
        if self.at_sym(s) {
            Ok(self.bump().span)
        } else {
            self.fail(&[&format!("`{s}`")])
        }
    }

    fn ident(&mut self) -> Result<(String, Span), Diagnostic> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.bump().span))
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn keyword(&mut self, allowed: &[&str]) -> Result<(String, Span), Diagnostic> {
        match &self.peek().tok {
            Tok::Ident(s) if allowed.contains(&s.as_str()) => {
                let s = s.clone();
                Ok((s, self.bump().span))
            }
            _ => self.fail(
                &allowed
                    .iter()
                    .map(|a| format!("`{a}`"))
                    .collect::<Vec<_>>()
                    .iter()
                    .map(String::as_str)
                    .collect::<Vec<_>>(),
            ),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<(String, Span)>, Diagnostic> {
        let mut out = vec![self.ident()?];
        while self.eat(",") {
            out.push(self.ident()?);
        }
        self.expect(";")?;
        Ok(out)
    }

    fn number(&mut self) -> Result<(String, Span), Diagnostic> {
        match &self.peek().tok {
            Tok::Number(s) => {
                let s = s.clone();
                Ok((s, self.bump().span))
            }
            _ => self.fail(&["number"]),
        }
    }

    fn exact_number(&mut self) -> Result<Rational, Diagnostic> {
        let (text, span) = self.number()?;
        exact_decimal(&text).ok_or_else(|| {
            Diagnostic::semantic(
                span,
                format!(
                    "number `{text}` exceeds the decimal exponent limit ±{MAX_DECIMAL_EXPONENT}"
                ),
            )
        })
    }

    /// `[-] number [/ number]`
    fn signed_rational(&mut self) -> Result<Rational, Diagnostic> {
        let negative = if self.eat("-") {
            true
        } else {
            self.eat("+");
            false
        };
        let mut q = self.exact_number()?;
        if self.at_sym("/") {
            let span = self.bump().span;
            let d = self.exact_number()?;
            if d.is_zero() {
                return Err(Diagnostic::semantic(span, "division by zero"));
            }
            q /= d;
        }
        Ok(if negative { -q } else { q })
    }

    fn rational_list(&mut self) -> Result<Vec<Rational>, Diagnostic> {
        let mut out = vec![self.signed_rational()?];
        while self.eat(",") {
            out.push(self.signed_rational()?);
        }
        self.expect(";")?;
        Ok(out)
    }

    fn real(&mut self) -> Result<f64, Diagnostic> {
        let negative = self.eat("-");
        let (text, span) = self.number()?;
        let v: f64 = text
            .parse()
            .map_err(|_| Diagnostic::semantic(span, format!("malformed number `{text}`")))?;
        if !v.is_finite() {
            return Err(Diagnostic::semantic(
                span,
                format!("number `{text}` is not finite"),
            ));
        }
        Ok(if negative { -v } else { v })
    }

    fn count(&mut self) -> Result<u64, Diagnostic> {
        let (text, span) = self.number()?;
        text.parse().map_err(|_| {
            Diagnostic::semantic(
                span,
                format!("expected a non-negative integer, found `{text}`"),
            )
        })
    }

    fn real_list(&mut self) -> Result<(Vec<f64>, Span), Diagnostic> {
        let span = self.peek().span;
        let mut out = vec![self.real()?];
        while self.eat(",") {
            out.push(self.real()?);
        }
        self.expect(";")?;
        Ok((out, span))
    }

    fn names(
        &self,
        list: &[(String, Span)],
        taken: &mut BTreeSet<String>,
    ) -> Result<Vec<String>, Diagnostic> {
        let mut out = Vec::new();
        for (n, span) in list {
            if n == "D" || KEYWORDS.contains(&n.as_str()) {
                return Err(Diagnostic::semantic(*span, format!("`{n}` is reserved")));
            }
            if !taken.insert(n.clone()) {
                return Err(Diagnostic::semantic(
                    *span,
                    format!("name `{n}` declared twice"),
                ));
            }
            out.push(n.clone());
        }
        Ok(out)
    }

    fn system(&mut self, name: String, at: Span) -> Result<PdeSystem, Diagnostic> {
        let mut vars: Option<VarList> = None;
        let mut unknowns: Option<Vec<String>> = None;
        let mut point: Option<(Vec<Rational>, Span)> = None;
        let mut eqs: Vec<LinearEquation> = Vec::new();
        let mut taken = BTreeSet::new();
        let stmts = ["`vars`", "`unknowns`", "`point`", "`eq`", "`}`"];
        loop {
            if self.eat("}") {
                break;
            }
            let (kw, span) = match &self.peek().tok {
                Tok::Ident(s) if ["vars", "unknowns", "point", "eq"].contains(&s.as_str()) => {
                    let s = s.clone();
                    (s, self.bump().span)
                }
                _ => return self.fail(&stmts),
            };
            match kw.as_str() {
                "vars" | "unknowns" => {
                    let list = self.ident_list()?;
                    let dup = if kw == "vars" {
                        vars.is_some()
                    } else {
                        unknowns.is_some()
                    };
                    if dup {
                        return Err(Diagnostic::semantic(span, format!("`{kw}` declared twice")));
                    }
                    let names = self.names(&list, &mut taken)?;
                    if kw == "vars" {
                        vars = Some(var_list(&names));
                    } else {
                        unknowns = Some(names);
                    }
                }
                "point" => {
                    let v = self.rational_list()?;
                    point = Some((v, span));
                }
                _ => {
                    self.expect(":")?;
                    let (Some(vs), Some(us)) = (&vars, &unknowns) else {
                        return Err(Diagnostic::semantic(
                            span,
                            "declare `vars` and `unknowns` before equations",
                        ));
                    };
                    let scope = Scope {
                        vars: vs,
                        unknowns: us,
                    };
                    let lhs = self.expr(&scope)?;
                    let eq_span = self.expect("=")?;
                    let rhs = self.expr(&scope)?;
                    self.expect(";")?;
                    let lin = lhs.add(rhs, false);
                    if !lin.src.is_zero() {
                        return Err(Diagnostic::semantic(
                            eq_span,
                            format!("source term `{}` is not supported; equations must be homogeneous in the unknowns", lin.src),
                        ));
                    }
                    if lin.is_linear_part_zero() {
                        return Err(Diagnostic::semantic(
                            eq_span,
                            "equation does not involve any unknown",
                        ));
                    }
                    eqs.push(LinearEquation::new(lin.jets));
                }
            }
        }
        let vars = vars.ok_or_else(|| {
            Diagnostic::semantic(at, format!("system `{name}` declares no `vars`"))
        })?;
        let unknowns = unknowns.ok_or_else(|| {
            Diagnostic::semantic(at, format!("system `{name}` declares no `unknowns`"))
        })?;
        let mut sys = PdeSystem::new(name, vars, unknowns, eqs)
            .map_err(|e| Diagnostic::semantic(at, e.to_string()))?;
        if let Some((p, span)) = point {
            sys = sys
                .with_base_point(p)
                .map_err(|e| Diagnostic::semantic(span, e.to_string()))?;
        }
        Ok(sys)
    }

    fn region(&mut self, name: String) -> Result<RegionDecl, Diagnostic> {
        let (kw, span) = self.keyword(&["vars"])?;
        debug_assert_eq!(kw, "vars");
        let list = self.ident_list()?;
        let names = self.names(&list, &mut BTreeSet::new())?;
        let _ = span;
        let vars = var_list(&names);
        let scope = Scope {
            vars: &vars,
            unknowns: &[],
        };
        let mut region = Region::everywhere();
        while !self.eat("}") {
            let lhs = self.expr(&scope)?;
            let t = self.peek().clone();
            let cond = match &t.tok {
                Tok::Sym(">") => SignCondition::Positive,
                Tok::Sym(">=") => SignCondition::NonNegative,
                Tok::Sym("<") => SignCondition::Negative,
                Tok::Sym("<=") => SignCondition::NonPositive,
                Tok::Sym("=") => SignCondition::Zero,
                Tok::Sym("!=") => SignCondition::NonZero,
                _ => return self.fail(&["`<`", "`<=`", "`>`", "`>=`", "`=`", "`!=`"]),
            };
            self.bump();
            let rhs = self.expr(&scope)?;
            self.expect(";")?;
            region = region.with(lhs.add(rhs, false).src, cond);
        }
        Ok(RegionDecl {
            name,
            vars: names,
            region,
        })
    }

    fn cone(&mut self, name: String, at: Span) -> Result<ConeSpec, Diagnostic> {
        let mut kind = None;
        let mut gens = Vec::new();
        while !self.eat("}") {
            let (kw, span) = self.keyword(&["kind", "gen", "}"])?;
            if kw == "kind" {
                let (k, _) = self.keyword(&["open", "closed"])?;
                self.expect(";")?;
                if kind.is_some() {
                    return Err(Diagnostic::semantic(span, "`kind` declared twice"));
                }
                kind = Some(if k == "open" {
                    ConeKind::OpenConvex
                } else {
                    ConeKind::Closed
                });
            } else {
                let g = self.rational_list()?;
                if gens
                    .first()
                    .is_some_and(|f: &Vec<Rational>| f.len() != g.len())
                {
                    return Err(Diagnostic::semantic(
                        span,
                        "generators of different dimensions",
                    ));
                }
                gens.push(g);
            }
        }
        let kind = kind.unwrap_or(ConeKind::Closed);
        ConeSpec::new(name, gens, kind).map_err(|e| Diagnostic::semantic(at, e.to_string()))
    }

    fn spectrum(
        &mut self,
        name: String,
        at: Span,
        doc: &Document,
    ) -> Result<SpectrumDecl, Diagnostic> {
        let keys = [
            "kind",
            "length",
            "tau",
            "area",
            "gram",
            "sides",
            "eigenvalues",
            "of",
            "count",
            "laplacian",
            "scale",
        ];
        let mut kind: Option<String> = None;
        let mut reals: BTreeMap<&str, (Vec<f64>, Span)> = BTreeMap::new();
        let mut eigen: Option<Vec<(f64, u64)>> = None;
        let mut refs: Option<(Vec<(String, Span)>, Span)> = None;
        let mut count: Option<u64> = None;
        let mut laplacian = TorusLaplacian::default();
        let mut seen = BTreeSet::new();
        while !self.eat("}") {
            let (kw, span) = self.keyword(&keys)?;
            if !seen.insert(kw.clone()) {
                return Err(Diagnostic::semantic(span, format!("`{kw}` declared twice")));
            }
            match kw.as_str() {
                "kind" => {
                    let (k, _) = self.keyword(&[
                        "circle",
                        "torus",
                        "gram",
                        "rectangle",
                        "explicit",
                        "product",
                        "copies",
                    ])?;
                    self.expect(";")?;
                    kind = Some(k);
                }
                "laplacian" => {
                    let (l, _) = self.keyword(&["dolbeault", "de_rham"])?;
                    self.expect(";")?;
                    laplacian = if l == "dolbeault" {
                        TorusLaplacian::Dolbeault
                    } else {
                        TorusLaplacian::DeRham
                    };
                }
                "eigenvalues" => {
                    let mut list = Vec::new();
                    loop {
                        let l = self.real()?;
                        let m = if self.eat(":") { self.count()? } else { 1 };
                        list.push((l, m));
                        if !self.eat(",") {
                            break;
                        }
                    }
                    self.expect(";")?;
                    eigen = Some(list);
                }
                "of" => {
                    refs = Some((self.ident_list()?, span));
                }
                "count" => {
                    count = Some(self.count()?);
                    self.expect(";")?;
                }
                _ => {
                    let key = keys.iter().find(|k| **k == kw).copied().unwrap_or("scale");
                    reals.insert(key, self.real_list()?);
                }
            }
        }
        let Some(kind) = kind else {
            return Err(Diagnostic::semantic(
                at,
                format!("spectrum `{name}` declares no `kind`"),
            ));
        };
        let want = |key: &str, n: usize| -> Result<Vec<f64>, Diagnostic> {
            match reals.get(key) {
                Some((v, _)) if v.len() == n => Ok(v.clone()),
                Some((_, span)) => Err(Diagnostic::semantic(
                    *span,
                    format!("`{key}` takes {n} value(s)"),
                )),
                None => Err(Diagnostic::semantic(
                    at,
                    format!("{kind} spectrum `{name}` needs `{key}`"),
                )),
            }
        };
        let reference = |target: &(String, Span)| -> Result<String, Diagnostic> {
            if doc.spectrum_decl(&target.0).is_some() {
                Ok(target.0.clone())
            } else {
                Err(Diagnostic::semantic(
                    target.1,
                    format!(
                        "unknown spectrum `{}`; references must name an earlier spectrum",
                        target.0
                    ),
                ))
            }
        };
        let body = match kind.as_str() {
            "circle" => SpectrumBody::Circle {
                length: want("length", 1)?[0],
            },
            "torus" => {
                let tau = want("tau", 2)?;
                let area = if reals.contains_key("area") {
                    want("area", 1)?[0]
                } else {
                    1.0
                };
                SpectrumBody::Torus {
                    tau: (tau[0], tau[1]),
                    area,
                    laplacian,
                }
            }
            "gram" => {
                let g = want("gram", 4)?;
                SpectrumBody::Gram {
                    gram: [[g[0], g[1]], [g[2], g[3]]],
                    laplacian,
                }
            }
            "rectangle" => {
                let s = want("sides", 2)?;
                SpectrumBody::Rectangle { a: s[0], b: s[1] }
            }
            "explicit" => SpectrumBody::Explicit {
                eigenvalues: eigen.ok_or_else(|| {
                    Diagnostic::semantic(
                        at,
                        format!("explicit spectrum `{name}` needs `eigenvalues`"),
                    )
                })?,
            },
            "product" => match &refs {
                Some((r, _)) if r.len() == 2 => SpectrumBody::Product {
                    left: reference(&r[0])?,
                    right: reference(&r[1])?,
                },
                Some((_, span)) => {
                    return Err(Diagnostic::semantic(
                        *span,
                        "a product takes exactly two spectra",
                    ))
                }
                None => {
                    return Err(Diagnostic::semantic(
                        at,
                        format!("product spectrum `{name}` needs `of`"),
                    ))
                }
            },
            _ => match &refs {
                Some((r, _)) if r.len() == 1 => SpectrumBody::Copies {
                    base: reference(&r[0])?,
                    count: count.ok_or_else(|| {
                        Diagnostic::semantic(at, format!("copies spectrum `{name}` needs `count`"))
                    })?,
                },
                Some((_, span)) => {
                    return Err(Diagnostic::semantic(
                        *span,
                        "copies take exactly one spectrum",
                    ))
                }
                None => {
                    return Err(Diagnostic::semantic(
                        at,
                        format!("copies spectrum `{name}` needs `of`"),
                    ))
                }
            },
        };
        let scale = if reals.contains_key("scale") {
            want("scale", 1)?[0]
        } else {
            1.0
        };
        let decl = SpectrumDecl {
            name: name.clone(),
            body,
            scale,
        };
        let mut probe = Document {
            items: doc.items.clone(),
            ..Default::default()
        };
        probe.items.push(Item::Spectrum(decl.clone()));
        let model = probe
            .spectrum(&name)
            .ok_or_else(|| Diagnostic::semantic(at, "unresolved spectrum reference"))?;
        model
            .validate()
            .map_err(|e| Diagnostic::semantic(at, e.to_string()))?;
        Ok(decl)
    }

    fn model(&mut self, name: String, at: Span) -> Result<ModelDecl, Diagnostic> {
        self.keyword(&["space"])?;
        let (space, span) = self.ident()?;
        self.expect(";")?;
        self.expect("}")?;
        CohomologyRingModel::by_name(&space)
            .map_err(|e| Diagnostic::semantic(span, e.to_string()))?;
        let _ = at;
        Ok(ModelDecl { name, space })
    }

    fn enter(&mut self) -> Result<(), Diagnostic> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Diagnostic::syntax(
                self.peek().span,
                format!("expression nested deeper than {MAX_DEPTH}"),
                vec![],
            ));
        }
        Ok(())
    }

    fn expr(&mut self, scope: &Scope) -> Result<Lin, Diagnostic> {
        self.enter()?;
        let mut acc = self.term(scope)?;
        loop {
            let sign = if self.eat("+") {
                true
            } else if self.eat("-") {
                false
            } else {
                break;
            };
            let rhs = self.term(scope)?;
            acc = acc.add(rhs, sign);
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self, scope: &Scope) -> Result<Lin, Diagnostic> {
        let mut acc = self.factor(scope)?;
        loop {
            if self.at_sym("*") {
                let span = self.bump().span;
                let rhs = self.factor(scope)?;
                acc = multiply(acc, rhs, span)?;
            } else if self.at_sym("/") {
                let span = self.bump().span;
                let rhs = self.factor(scope)?;
                let d = match (rhs.is_linear_part_zero(), rhs.src.constant_value()) {
                    (true, Some(c)) if !c.is_zero() => c,
                    (true, Some(_)) => return Err(Diagnostic::semantic(span, "division by zero")),
                    _ => {
                        return Err(Diagnostic::semantic(
                            span,
                            "division is only allowed by a nonzero constant",
                        ))
                    }
                };
                let inv = Lin::constant(scope.vars, Rational::one() / d);
                acc = multiply(acc, inv, span)?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self, scope: &Scope) -> Result<Lin, Diagnostic> {
        self.enter()?;
        let out = if self.eat("-") {
            self.factor(scope)?.neg()
        } else if self.eat("+") {
            self.factor(scope)?
        } else {
            let base = self.atom(scope)?;
            if self.at_sym("^") {
                let span = self.bump().span;
                let (text, nspan) = self.number()?;
                let k: u32 = text
                    .parse()
                    .ok()
                    .filter(|k| *k <= MAX_EXPONENT)
                    .ok_or_else(|| {
                        Diagnostic::semantic(
                            nspan,
                            format!("exponent must be an integer in 0..={MAX_EXPONENT}"),
                        )
                    })?;
                power(base, k, scope.vars, span)?
            } else {
                base
            }
        };
        self.depth -= 1;
        Ok(out)
    }

    fn atom(&mut self, scope: &Scope) -> Result<Lin, Diagnostic> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Number(_) => Ok(Lin::constant(scope.vars, self.exact_number()?)),
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr(scope)?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(name)
                if name == "D"
                    && matches!(
                        self.toks.get(self.pos + 1),
                        Some(Token {
                            tok: Tok::Sym("["),
                            ..
                        })
                    ) =>
            {
                self.bump();
                self.bump();
                let mut alpha = vec![0u32; scope.vars.len()];
                let mut total = 0u32;
                loop {
                    let (v, span) = self.ident()?;
                    let Some(i) = scope.vars.iter().position(|x| *x == v) else {
                        return Err(self.unknown_name(&v, span, scope, "independent variable"));
                    };
                    alpha[i] += 1;
                    total += 1;
                    if total > MAX_EXPONENT {
                        return Err(Diagnostic::semantic(
                            span,
                            format!("derivative order exceeds {MAX_EXPONENT}"),
                        ));
                    }
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect("]")?;
                self.expect("(")?;
                let (u, span) = self.ident()?;
                self.expect(")")?;
                let Some(a) = scope.unknowns.iter().position(|x| *x == u) else {
                    return Err(self.unknown_name(&u, span, scope, "unknown"));
                };
                Ok(jet_lin(scope.vars, Jet::new(a, alpha)))
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(i) = scope.vars.iter().position(|x| x == name) {
                    return Ok(Lin {
                        src: MultiPoly::var(scope.vars.clone(), i),
                        jets: BTreeMap::new(),
                    });
                }
                if let Some(a) = scope.unknowns.iter().position(|x| x == name) {
                    return Ok(jet_lin(scope.vars, Jet::new(a, vec![0; scope.vars.len()])));
                }
                Err(self.unknown_name(name, t.span, scope, "identifier"))
            }
            _ => self.fail(&["number", "identifier", "`D[`", "`(`", "`-`"]),
        }
    }

    fn unknown_name(&self, name: &str, span: Span, scope: &Scope, what: &str) -> Diagnostic {
        let mut msg = format!(
            "unknown {what} `{name}`; variables are [{}]",
            scope.vars.join(", ")
        );
        if !scope.unknowns.is_empty() {
            msg.push_str(&format!(", unknowns are [{}]", scope.unknowns.join(", ")));
        }
        Diagnostic::semantic(span, msg)
    }
}

fn jet_lin(vars: &VarList, jet: Jet) -> Lin {
    Lin {
        src: MultiPoly::zero(vars.clone()),
        jets: BTreeMap::from([(jet, MultiPoly::one(vars.clone()))]),
    }
}

fn check_size(l: &Lin, span: Span) -> Result<(), Diagnostic> {
    if l.degree() > MAX_DEGREE {
        return Err(Diagnostic::semantic(
            span,
            format!("polynomial degree exceeds {MAX_DEGREE}"),
        ));
    }
    Ok(())
}

fn multiply(a: Lin, b: Lin, span: Span) -> Result<Lin, Diagnostic> {
    let (lin, scalar) = match (a.is_linear_part_zero(), b.is_linear_part_zero()) {
        (false, false) => {
            return Err(Diagnostic::semantic(
                span,
                "non-linear term: both factors involve the unknowns; only linear systems with polynomial coefficients are supported",
            ))
        }
        (true, _) => (b, a.src),
        (false, true) => (a, b.src),
    };
    let degree = lin.degree() + scalar.total_degree().unwrap_or(0);
    if degree > MAX_DEGREE {
        return Err(Diagnostic::semantic(
            span,
            format!("polynomial degree exceeds {MAX_DEGREE}"),
        ));
    }
    if lin.terms().saturating_mul(scalar.num_terms()) > MAX_TERMS {
        return Err(Diagnostic::semantic(
            span,
            format!("expression expands to more than {MAX_TERMS} terms"),
        ));
    }
    let out = Lin {
        src: &lin.src * &scalar,
        jets: lin
            .jets
            .iter()
            .map(|(j, c)| (j.clone(), c * &scalar))
            .filter(|(_, c)| !c.is_zero())
            .collect(),
    };
    check_size(&out, span)?;
    Ok(out)
}

fn power(base: Lin, k: u32, vars: &VarList, span: Span) -> Result<Lin, Diagnostic> {
    if !base.is_linear_part_zero() && k >= 2 {
        return Err(Diagnostic::semantic(
            span,
            "non-linear term: a power of an expression in the unknowns",
        ));
    }
    if base.degree().saturating_mul(k) > MAX_DEGREE {
        return Err(Diagnostic::semantic(
            span,
            format!("polynomial degree exceeds {MAX_DEGREE}"),
        ));
    }
    let mut acc = Lin::constant(vars, Rational::one());
    for _ in 0..k {
        acc = multiply(acc, base.clone(), span)?;
    }
    Ok(acc)
}

/// Exact value of an unsigned decimal literal such as `1.25e-3`.
pub fn exact_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    if exp.abs() > MAX_DECIMAL_EXPONENT {
        return None;
    }
    let m = if mantissa.ends_with('.') {
        parse_rational(&format!("{mantissa}0"))?
    } else {
        parse_rational(mantissa)?
    };
    let p = Rational::from_integer(num_traits::pow(
        BigInt::from(10),
        exp.unsigned_abs() as usize,
    ));
    Some(if exp >= 0 { m * p } else { m / p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::dsl::DiagnosticKind;
    use crate::jet::catalog;

    #[test]
    fn laplace_order_two() {
        let d = parse_pde_dsl(
            "system laplace { vars x,y; unknowns u; eq: D[x,x](u) + D[y,y](u) = 0; }",
        )
        .unwrap();
        let s = d.system("laplace").unwrap();
        assert_eq!(s.order(), 2);
        assert_eq!(s.n(), 2);
        assert_eq!(s.m(), 1);
        assert_eq!(s, &catalog::laplace(2));
    }

    #[test]
    fn wave_matches_catalog() {
        let d =
            parse_pde_dsl("system wave { vars t,x; unknowns u; eq: D[t,t](u) - D[x,x](u) = 0; }")
                .unwrap();
        assert_eq!(d.system("wave").unwrap(), &catalog::wave());
    }

    #[test]
    fn nonlinear_rejected() {
        let e = parse_pde_dsl("system s { vars x; unknowns u; eq: u*u = 0; }").unwrap_err();
        assert_eq!(e.kind, DiagnosticKind::Semantic);
        assert!(e.message.contains("non-linear"), "{}", e.message);
        assert_eq!((e.line, e.column), (1, 37));
        let e = parse_pde_dsl("system s { vars x; unknowns u; eq: D[x](u)^2 = 0; }").unwrap_err();
        assert!(e.message.contains("non-linear"));
    }

    #[test]
    fn coefficients_and_rhs() {
        let d = parse_pde_dsl(
            "system t { vars x,y; unknowns u; eq: y*D[x,x](u) + (x - 1/2)*D[y](u) = 3*u; }",
        )
        .unwrap();
        let s = d.system("t").unwrap();
        let eq = &s.equations()[0];
        assert_eq!(eq.terms().len(), 3);
        let u0 = Jet::new(0, vec![0, 0]);
        assert_eq!(eq.terms()[&u0].constant_value(), Some(rat(-3, 1)));
    }

    #[test]
    fn diagnostics_are_positioned() {
        let e =
            parse_pde_dsl("system s {\n vars x;\n unknowns u;\n eq: D[z](u) = 0; }").unwrap_err();
        assert_eq!((e.line, e.column), (4, 8));
        assert!(e.message.contains("`z`"));
        let e = parse_pde_dsl("system s { vars x; unknowns u; eq: D[x](u) 0; }").unwrap_err();
        assert_eq!(e.kind, DiagnosticKind::Syntax);
        assert!(e.expected.contains(&"`=`".to_string()));
        let e = parse_pde_dsl("system s { vars x; unknowns u; eq: u = 0; }").unwrap_err();
        assert!(e.message.contains("order-0"), "{}", e.message);
        let e = parse_pde_dsl("system s { vars x; unknowns u; eq: D[x](u) = 1; }").unwrap_err();
        assert!(e.message.contains("source term"));
        let e = parse_pde_dsl("bogus").unwrap_err();
        assert_eq!(e.expected.len(), 5);
    }

    #[test]
    fn limits() {
        let deep = format!(
            "system s {{ vars x; unknowns u; eq: {}D[x](u){} = 0; }}",
            "(".repeat(200),
            ")".repeat(200)
        );
        assert!(parse_pde_dsl(&deep).unwrap_err().message.contains("nested"));
        let e =
            parse_pde_dsl("system s { vars x; unknowns u; eq: x^65*D[x](u) = 0; }").unwrap_err();
        assert!(e.message.contains("exponent"));
        let e = parse_pde_dsl("system s { vars x; unknowns u; eq: (x^64)^64*D[x](u) = 0; }")
            .unwrap_err();
        assert!(e.message.contains("degree"));
        assert!(exact_decimal("1e31").is_none());
        assert_eq!(exact_decimal("1.5e-1"), Some(rat(3, 20)));
    }

    #[test]
    fn other_blocks() {
        let src = "region h { vars x, y; y > 0; x^2 + y^2 <= 4; }\n\
                   cone c { kind open; gen 1, 0; gen 1, 1; }\n\
                   spectrum s { kind circle; length 6.283185307179586; }\n\
                   spectrum t { kind torus; tau 0, 1; }\n\
                   spectrum st { kind product; of s, t; scale 2; }\n\
                   spectrum e { kind explicit; eigenvalues 1:2, 4; }\n\
                   model m { space P1xP1; }";
        let d = parse_pde_dsl(src).unwrap();
        assert_eq!(d.region("h").unwrap().region.conditions.len(), 2);
        assert_eq!(
            d.region("h").unwrap().region.conditions[0].1,
            SignCondition::Positive
        );
        assert_eq!(d.cone("c").unwrap().kind, ConeKind::OpenConvex);
        assert!(d.spectrum("st").unwrap().validate().is_ok());
        assert_eq!(d.spectrum("e").unwrap().harmonic_dim(), 0);
        assert_eq!(d.model("m").unwrap().space, "P1xP1");
        assert!(parse_pde_dsl("spectrum p { kind product; of a, b; }")
            .unwrap_err()
            .message
            .contains("unknown spectrum"));
        assert!(parse_pde_dsl("spectrum c { kind circle; length -1; }").is_err());
        assert!(parse_pde_dsl("model m { space Q7; }").is_err());
    }
}
