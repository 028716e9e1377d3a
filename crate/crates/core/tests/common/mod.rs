#![allow(dead_code)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spencer_lab::dsl::{parse_pde_dsl, print_document};

pub fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/dsl_corpus");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pde"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

/// Parse, print, reparse: the documents agree and printing is a fixed point.
pub fn round_trip(text: &str) -> Result<(), String> {
    let doc = parse_pde_dsl(text).map_err(|d| format!("parse: {d}"))?;
    let printed = print_document(&doc);
    let again = parse_pde_dsl(&printed).map_err(|d| format!("reparse: {d}\n{printed}"))?;
    if doc != again {
        return Err(format!("documents differ after printing:\n{printed}"));
    }
    let twice = print_document(&again);
    if printed != twice {
        return Err(format!(
            "printing is not idempotent:\n{printed}\n---\n{twice}"
        ));
    }
    Ok(())
}

/// The parser returns a document or a diagnostic positioned inside the input.
pub fn parses_or_diagnose(text: &str) -> Result<(), String> {
    let outcome = catch_unwind(AssertUnwindSafe(|| parse_pde_dsl(text)));
    match outcome {
        Err(_) => Err(format!("parser panicked on {text:?}")),
        Ok(Ok(_)) => Ok(()),
        Ok(Err(d)) => {
            let lines = text.split('\n').count();
            if d.line == 0 || d.column == 0 || d.line > lines {
                Err(format!("diagnostic {d} outside input {text:?}"))
            } else if d.message.is_empty() {
                Err(format!("empty diagnostic message for {text:?}"))
            } else {
                Ok(())
            }
        }
    }
}

const FRAGMENTS: &[&str] = &[
    "system",
    "region",
    "cone",
    "spectrum",
    "model",
    "vars",
    "unknowns",
    "point",
    "eq",
    ":",
    ";",
    ",",
    "{",
    "}",
    "(",
    ")",
    "[",
    "]",
    "D",
    "D[x]",
    "D[x,y]",
    "(u)",
    "u",
    "v",
    "x",
    "y",
    "=",
    "+",
    "-",
    "*",
    "/",
    "^",
    "0",
    "1",
    "1/2",
    "3.5e2",
    "1e400",
    "-7",
    "kind",
    "open",
    "closed",
    "gen",
    "circle",
    "torus",
    "tau",
    "area",
    "laplacian",
    "de_rham",
    "length",
    "scale",
    "of",
    "count",
    "copies",
    "explicit",
    "eigenvalues",
    "2:3",
    "space",
    "P1",
    "P2",
    "<",
    ">",
    "<=",
    ">=",
    "!=",
    "#",
    "//",
    "\n",
    " ",
    "\t",
    "é",
    "∂",
    "\u{0}",
    "99999999999999999999999",
    "x^64",
    "^^",
];

fn mutate(rng: &mut ChaCha8Rng, base: &str) -> String {
    let mut chars: Vec<char> = base.chars().collect();
    for _ in 0..rng.gen_range(1..=4) {
        let len = chars.len();
        match rng.gen_range(0..5) {
            0 if len > 0 => {
                let i = rng.gen_range(0..len);
                chars.remove(i);
            }
            1 => {
                let i = rng.gen_range(0..=len);
                let frag = FRAGMENTS.choose(rng).unwrap();
                for (k, c) in frag.chars().enumerate() {
                    chars.insert(i + k, c);
                }
            }
            2 if len > 0 => {
                let i = rng.gen_range(0..len);
                chars[i] = char::from_u32(rng.gen_range(0..0x300)).unwrap_or('?');
            }
            3 if len > 0 => {
                let cut = rng.gen_range(0..len);
                chars.truncate(cut);
            }
            _ if len > 1 => {
                let (i, j) = (rng.gen_range(0..len), rng.gen_range(0..len));
                chars.swap(i, j);
            }
            _ => {}
        }
    }
    chars.into_iter().collect()
}

fn soup(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(0..40);
    let mut out = String::new();
    for _ in 0..n {
        out.push_str(FRAGMENTS.choose(rng).unwrap());
        if rng.gen_bool(0.5) {
            out.push(' ');
        }
    }
    out
}

fn noise(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(0..64);
    (0..n)
        .map(|_| char::from_u32(rng.gen_range(0..0x2000)).unwrap_or('\u{fffd}'))
        .collect()
}

/// Seeded fuzz inputs: corpus mutations, fragment soup and raw character noise.
pub fn fuzz_inputs(count: usize, seed: u64) -> Vec<String> {
    let corpus: Vec<String> = corpus().into_iter().map(|(_, t)| t).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| match i % 4 {
            0 | 1 => {
                let base = corpus.choose(&mut rng).unwrap().clone();
                mutate(&mut rng, &base)
            }
            2 => soup(&mut rng),
            _ => noise(&mut rng),
        })
        .collect()
}
