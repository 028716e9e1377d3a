//! Canonical text rendering; `parse_pde_dsl(print_document(d)) == d`.

use std::fmt::Write;

use num_traits::One;

use crate::jet::{LinearEquation, PdeSystem};
use crate::microlocal::ConeKind;
use crate::torsion::TorusLaplacian;
use crate::Rational;

use super::{Document, Item, SpectrumBody, SpectrumDecl};

pub fn print_document(doc: &Document) -> String {
    let mut out = String::new();
    for item in &doc.items {
        match item {
            Item::System(s) => print_system(&mut out, s),
            Item::Region(r) => {
                let _ = writeln!(out, "region {} {{\n  vars {};", r.name, r.vars.join(", "));
                for (p, c) in &r.region.conditions {
                    let _ = writeln!(out, "  {p} {};", c.symbol());
                }
                out.push_str("}\n");
            }
            Item::Cone(c) => {
                let kind = match c.kind {
                    ConeKind::OpenConvex => "open",
                    ConeKind::Closed => "closed",
                };
                let _ = writeln!(out, "cone {} {{\n  kind {kind};", c.name);
                for g in &c.generators {
                    let _ = writeln!(out, "  gen {};", rationals(g));
                }
                out.push_str("}\n");
            }
            Item::Spectrum(s) => print_spectrum(&mut out, s),
            Item::Model(m) => {
                let _ = writeln!(out, "model {} {{\n  space {};\n}}", m.name, m.space);
            }
        }
    }
    out
}

fn rationals(v: &[Rational]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn real(x: f64) -> String {
    format!("{x:?}")
}

pub fn render_equation(sys: &PdeSystem, eq: &LinearEquation) -> String {
    let vars: Vec<String> = sys.indep_vars().to_vec();
    let parts: Vec<String> = eq
        .terms()
        .iter()
        .map(|(j, c)| {
            let jet = j.render(&vars, sys.unknowns());
            if c.constant_value().is_some_and(|v| v.is_one()) {
                jet
            } else {
                format!("({c})*{jet}")
            }
        })
        .collect();
    format!("{} = 0", parts.join(" + "))
}

fn print_system(out: &mut String, s: &PdeSystem) {
    let _ = writeln!(out, "system {} {{", s.name());
    let _ = writeln!(out, "  vars {};", s.indep_vars().join(", "));
    let _ = writeln!(out, "  unknowns {};", s.unknowns().join(", "));
    if let Some(p) = s.base_point() {
        let _ = writeln!(out, "  point {};", rationals(p));
    }
    for eq in s.equations() {
        let _ = writeln!(out, "  eq: {};", render_equation(s, eq));
    }
    out.push_str("}\n");
}

fn laplacian(l: TorusLaplacian) -> &'static str {
    match l {
        TorusLaplacian::Dolbeault => "dolbeault",
        TorusLaplacian::DeRham => "de_rham",
    }
}

fn print_spectrum(out: &mut String, s: &SpectrumDecl) {
    let _ = writeln!(out, "spectrum {} {{", s.name);
    match &s.body {
        SpectrumBody::Circle { length } => {
            let _ = writeln!(out, "  kind circle;\n  length {};", real(*length));
        }
        SpectrumBody::Torus {
            tau,
            area,
            laplacian: l,
        } => {
            let _ = writeln!(
                out,
                "  kind torus;\n  tau {}, {};\n  area {};\n  laplacian {};",
                real(tau.0),
                real(tau.1),
                real(*area),
                laplacian(*l)
            );
        }
        SpectrumBody::Gram { gram, laplacian: l } => {
            let g: Vec<String> = gram.iter().flatten().map(|x| real(*x)).collect();
            let _ = writeln!(
                out,
                "  kind gram;\n  gram {};\n  laplacian {};",
                g.join(", "),
                laplacian(*l)
            );
        }
        SpectrumBody::Rectangle { a, b } => {
            let _ = writeln!(
                out,
                "  kind rectangle;\n  sides {}, {};",
                real(*a),
                real(*b)
            );
        }
        SpectrumBody::Explicit { eigenvalues } => {
            let e: Vec<String> = eigenvalues
                .iter()
                .map(|(l, m)| format!("{}:{m}", real(*l)))
                .collect();
            let _ = writeln!(out, "  kind explicit;\n  eigenvalues {};", e.join(", "));
        }
        SpectrumBody::Product { left, right } => {
            let _ = writeln!(out, "  kind product;\n  of {left}, {right};");
        }
        SpectrumBody::Copies { base, count } => {
            let _ = writeln!(out, "  kind copies;\n  of {base};\n  count {count};");
        }
    }
    if s.scale != 1.0 {
        let _ = writeln!(out, "  scale {};", real(s.scale));
    }
    out.push_str("}\n");
}
