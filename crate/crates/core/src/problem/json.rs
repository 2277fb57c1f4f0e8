//! JSON instance format. Matrices are arrays of rows; infinities are the
//! strings `"inf"` and `"-inf"`. An empty array stands for a zero matrix of
//! the implied shape.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use super::{MboProblem, ProblemError, ProblemParts};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NumVisitor;
        impl Visitor<'_> for NumVisitor {
            type Value = Num;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or \"inf\" / \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                match v {
                    "inf" | "+inf" => Ok(Num(f64::INFINITY)),
                    "-inf" => Ok(Num(f64::NEG_INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(NumVisitor)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ProblemDoc {
    n_bin: usize,
    n_cont: usize,
    #[serde(rename = "Q", default)]
    q: Vec<Vec<Num>>,
    #[serde(default)]
    a: Vec<Num>,
    #[serde(rename = "P_u", default)]
    p_u: Vec<Vec<Num>>,
    #[serde(default)]
    r_u: Vec<Num>,
    #[serde(default = "zero")]
    c_u: Num,
    #[serde(rename = "G_eq", default)]
    g_eq: Vec<Vec<Num>>,
    #[serde(default)]
    b_eq: Vec<Num>,
    #[serde(rename = "G_in", default)]
    g_in: Vec<Vec<Num>>,
    #[serde(default)]
    h_in: Vec<Num>,
    #[serde(rename = "L_z", default)]
    l_z: Vec<Vec<Num>>,
    #[serde(rename = "L_u", default)]
    l_u: Vec<Vec<Num>>,
    #[serde(default)]
    h_l: Vec<Num>,
    #[serde(default)]
    u_lb: Vec<Num>,
    #[serde(default)]
    u_ub: Vec<Num>,
}

fn zero() -> Num {
    Num(0.0)
}

fn matrix(what: &'static str, rows: &[Vec<Num>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>, ProblemError> {
    if rows.is_empty() {
        return Ok(DMatrix::zeros(nrows, ncols));
    }
    if rows.len() != nrows {
        return Err(ProblemError::Format(format!(
            "{what} has {} rows, expected {nrows}",
            rows.len()
        )));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(ProblemError::Format(format!(
                "{what} row {i} has {} entries, expected {ncols}",
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j].0))
}

fn vector(what: &'static str, v: &[Num], len: usize, fill: f64) -> Result<DVector<f64>, ProblemError> {
    if v.is_empty() {
        return Ok(DVector::from_element(len, fill));
    }
    if v.len() != len {
        return Err(ProblemError::Format(format!(
            "{what} has {} entries, expected {len}",
            v.len()
        )));
    }
    Ok(DVector::from_iterator(len, v.iter().map(|n| n.0)))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<Num>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Num(m[(i, j)])).collect())
        .collect()
}

fn entries(v: &DVector<f64>) -> Vec<Num> {
    v.iter().map(|&x| Num(x)).collect()
}

impl From<&MboProblem> for ProblemDoc {
    fn from(p: &MboProblem) -> Self {
        Self {
            n_bin: p.n_bin,
            n_cont: p.n_cont,
            q: rows_of(&p.q),
            a: entries(&p.a),
            p_u: rows_of(&p.p_u),
            r_u: entries(&p.r_u),
            c_u: Num(p.c_u),
            g_eq: rows_of(&p.g_eq),
            b_eq: entries(&p.b_eq),
            g_in: rows_of(&p.g_in),
            h_in: entries(&p.h_in),
            l_z: rows_of(&p.l_z),
            l_u: rows_of(&p.l_u),
            h_l: entries(&p.h_l),
            u_lb: entries(&p.u_lb),
            u_ub: entries(&p.u_ub),
        }
    }
}

impl TryFrom<ProblemDoc> for MboProblem {
    type Error = ProblemError;

    fn try_from(d: ProblemDoc) -> Result<Self, ProblemError> {
        let (n, l) = (d.n_bin, d.n_cont);
        let (ne, ni, nl) = (d.b_eq.len(), d.h_in.len(), d.h_l.len());
        MboProblem::from_parts(ProblemParts {
            n_bin: n,
            n_cont: l,
            q: matrix("Q", &d.q, n, n)?,
            a: vector("a", &d.a, n, 0.0)?,
            p_u: matrix("P_u", &d.p_u, l, l)?,
            r_u: vector("r_u", &d.r_u, l, 0.0)?,
            c_u: d.c_u.0,
            g_eq: matrix("G_eq", &d.g_eq, ne, n)?,
            b_eq: vector("b_eq", &d.b_eq, ne, 0.0)?,
            g_in: matrix("G_in", &d.g_in, ni, n)?,
            h_in: vector("h_in", &d.h_in, ni, 0.0)?,
            l_z: matrix("L_z", &d.l_z, nl, n)?,
            l_u: matrix("L_u", &d.l_u, nl, l)?,
            h_l: vector("h_l", &d.h_l, nl, 0.0)?,
            u_lb: vector("u_lb", &d.u_lb, l, f64::NEG_INFINITY)?,
            u_ub: vector("u_ub", &d.u_ub, l, f64::INFINITY)?,
        })
    }
}

impl MboProblem {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProblemDoc::from(self)).expect("problem documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        let doc: ProblemDoc = serde_json::from_str(text).map_err(|e| ProblemError::Format(e.to_string()))?;
        doc.try_into()
    }
}

pub fn read_problem(path: impl AsRef<Path>) -> Result<MboProblem, ProblemError> {
    MboProblem::from_json(&fs::read_to_string(path)?)
}

pub fn write_problem(path: impl AsRef<Path>, p: &MboProblem) -> Result<(), ProblemError> {
    fs::write(path, p.to_json())?;
    Ok(())
}
