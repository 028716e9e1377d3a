//! Text format for systems, regions, cones, spectra and cohomology models.
//!
//! ```text
//! system laplace { vars x, y; unknowns u; eq: D[x,x](u) + D[y,y](u) = 0; }
//! region upper { vars x, y; y > 0; }
//! cone forward { kind open; gen 1, 0; gen 1, 1; }
//! spectrum s1 { kind circle; length 6.283185307179586; }
//! model p2 { space P2; }
//! ```

pub mod lexer;
pub mod parser;
pub mod printer;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::index::CohomologyRingModel;
use crate::jet::PdeSystem;
use crate::microlocal::{ConeSpec, Region};
use crate::torsion::{SpectrumModel, TorusLaplacian};

pub use lexer::Span;
pub use parser::parse_pde_dsl;
pub use printer::print_document;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Syntax,
    Semantic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// Token descriptions acceptable at the error position.
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub fn syntax(at: Span, message: impl Into<String>, expected: Vec<String>) -> Self {
        Diagnostic {
            kind: DiagnosticKind::Syntax,
            line: at.line,
            column: at.column,
            message: message.into(),
            expected,
        }
    }

    pub fn semantic(at: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            kind: DiagnosticKind::Semantic,
            line: at.line,
            column: at.column,
            message: message.into(),
            expected: vec![],
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::Syntax => "syntax error",
            DiagnosticKind::Semantic => "error",
        };
        write!(f, "{}:{}: {kind}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionDecl {
    pub name: String,
    pub vars: Vec<String>,
    pub region: Region,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumBody {
    Circle {
        length: f64,
    },
    Torus {
        tau: (f64, f64),
        area: f64,
        laplacian: TorusLaplacian,
    },
    Gram {
        gram: [[f64; 2]; 2],
        laplacian: TorusLaplacian,
    },
    Rectangle {
        a: f64,
        b: f64,
    },
    Explicit {
        eigenvalues: Vec<(f64, u64)>,
    },
    Product {
        left: String,
        right: String,
    },
    Copies {
        base: String,
        count: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumDecl {
    pub name: String,
    pub body: SpectrumBody,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelDecl {
    pub name: String,
    pub space: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    System(PdeSystem),
    Region(RegionDecl),
    Cone(ConeSpec),
    Spectrum(SpectrumDecl),
    Model(ModelDecl),
}

impl Item {
    pub fn name(&self) -> &str {
        match self {
            Item::System(s) => s.name(),
            Item::Region(r) => &r.name,
            Item::Cone(c) => &c.name,
            Item::Spectrum(s) => &s.name,
            Item::Model(m) => &m.name,
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            Item::System(_) => "system",
            Item::Region(_) => "region",
            Item::Cone(_) => "cone",
            Item::Spectrum(_) => "spectrum",
            Item::Model(_) => "model",
        }
    }
}

/// Parsed declarations in source order. Equality ignores source text and spans.
#[derive(Clone, Debug, Default)]
pub struct Document {
    pub source: String,
    pub items: Vec<Item>,
    /// `(keyword, name)` of each declaration to its opening position.
    pub spans: BTreeMap<(String, String), Span>,
}

impl PartialEq for Document {
    fn eq(&self, other: &Self) -> bool {
        self.items == other.items
    }
}

impl Document {
    pub fn systems(&self) -> impl Iterator<Item = &PdeSystem> {
        self.items.iter().filter_map(|i| match i {
            Item::System(s) => Some(s),
            _ => None,
        })
    }

    pub fn system(&self, name: &str) -> Option<&PdeSystem> {
        self.systems().find(|s| s.name() == name)
    }

    pub fn region(&self, name: &str) -> Option<&RegionDecl> {
        self.items.iter().find_map(|i| match i {
            Item::Region(r) if r.name == name => Some(r),
            _ => None,
        })
    }

    pub fn regions(&self) -> impl Iterator<Item = &RegionDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Region(r) => Some(r),
            _ => None,
        })
    }

    pub fn cone(&self, name: &str) -> Option<&ConeSpec> {
        self.cones().find(|c| c.name == name)
    }

    pub fn cones(&self) -> impl Iterator<Item = &ConeSpec> {
        self.items.iter().filter_map(|i| match i {
            Item::Cone(c) => Some(c),
            _ => None,
        })
    }

    pub fn spectrum_decl(&self, name: &str) -> Option<&SpectrumDecl> {
        self.spectra().find(|s| s.name == name)
    }

    pub fn spectra(&self) -> impl Iterator<Item = &SpectrumDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Spectrum(s) => Some(s),
            _ => None,
        })
    }

    /// The declared spectrum with references to earlier spectra inlined.
    pub fn spectrum(&self, name: &str) -> Option<SpectrumModel> {
        let decl = self.spectrum_decl(name)?;
        let base = match &decl.body {
            SpectrumBody::Circle { length } => SpectrumModel::circle(*length),
            SpectrumBody::Torus {
                tau,
                area,
                laplacian,
            } => SpectrumModel::flat_torus_tau(
                num_complex::Complex64::new(tau.0, tau.1),
                *area,
                *laplacian,
            ),
            SpectrumBody::Gram { gram, laplacian } => SpectrumModel::flat_torus(*gram, *laplacian),
            SpectrumBody::Rectangle { a, b } => SpectrumModel::rectangle(*a, *b),
            SpectrumBody::Explicit { eigenvalues } => SpectrumModel::explicit(eigenvalues.clone()),
            SpectrumBody::Product { left, right } => {
                SpectrumModel::product(self.spectrum(left)?, self.spectrum(right)?)
            }
            SpectrumBody::Copies { base, count } => {
                SpectrumModel::copies(self.spectrum(base)?, *count)
            }
        };
        Some(if decl.scale == 1.0 {
            base
        } else {
            base.scaled(decl.scale)
        })
    }

    pub fn model(&self, name: &str) -> Option<&ModelDecl> {
        self.models().find(|m| m.name == name)
    }

    pub fn models(&self) -> impl Iterator<Item = &ModelDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Model(m) => Some(m),
            _ => None,
        })
    }

    pub fn cohomology_model(&self, name: &str) -> Option<std::sync::Arc<CohomologyRingModel>> {
        CohomologyRingModel::by_name(&self.model(name)?.space).ok()
    }

    pub fn span_of(&self, keyword: &str, name: &str) -> Option<Span> {
        self.spans
            .get(&(keyword.to_string(), name.to_string()))
            .copied()
    }
}
