//! `serialize_with` helpers rendering exact rationals as `"num/den"` strings.

use serde::ser::{SerializeSeq, Serializer};

use super::field::rational_string;
use crate::Rational;

pub fn rational<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(q))
}

pub fn vec<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for q in v {
        seq.serialize_element(&rational_string(q))?;
    }
    seq.end()
}

pub fn vecs<S: Serializer>(v: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for row in v {
        let r: Vec<String> = row.iter().map(rational_string).collect();
        seq.serialize_element(&r)?;
    }
    seq.end()
}

pub fn opt_vec<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => vec(v, s),
        None => s.serialize_none(),
    }
}
