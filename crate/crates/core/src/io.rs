//! Self-describing JSON files for algorithms.
//!
//! Coefficients are written as `[row, col, "num/den"]` triples in row-major
//! order, so identical algorithms always produce identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algorithm::{BilinearAlgorithm, Certificate, Dims, RowTag};
use crate::decomposed::DecomposedAlgorithm;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sparse::SparseMatrix;

pub const FORMAT: &str = "triagg-algorithm";
pub const VERSION: u32 = 1;

type Entry = (usize, usize, Rational);

fn entries(m: &SparseMatrix) -> Vec<Entry> {
    m.iter().map(|(r, c, v)| (r, c, v.clone())).collect()
}

fn matrix(name: &str, rows: usize, cols: usize, e: Vec<Entry>) -> Result<SparseMatrix> {
    SparseMatrix::from_entries(rows, cols, e).map_err(|err| Error::Format(format!("{name}: {err}")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Bilinear,
    Decomposed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgorithmFile {
    format: String,
    version: u32,
    kind: Kind,
    m: usize,
    n: usize,
    p: usize,
    t: usize,
    field: String,
    #[serde(rename = "U")]
    u: Vec<Entry>,
    #[serde(rename = "V")]
    v: Vec<Entry>,
    #[serde(rename = "W")]
    w: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tags: Option<Vec<RowTag>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    verified: Option<Certificate>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecomposedFile {
    format: String,
    version: u32,
    kind: Kind,
    n0: usize,
    s0: usize,
    t: usize,
    field: String,
    phi: Vec<Entry>,
    #[serde(rename = "U_phi")]
    u_phi: Vec<Entry>,
    #[serde(rename = "V_phi")]
    v_phi: Vec<Entry>,
    #[serde(rename = "W_phi")]
    w_phi: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tags: Option<Vec<RowTag>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    verified: Option<Certificate>,
}

fn all_untagged(tags: &[RowTag]) -> bool {
    tags.iter().all(|t| *t == RowTag::Untagged)
}

fn check_header(format: &str, version: u32, field: &str) -> Result<()> {
    if format != FORMAT {
        return Err(Error::Format(format!("unknown format {format:?}")));
    }
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    if field != "rational" {
        return Err(Error::Format(format!("unsupported field {field:?}")));
    }
    Ok(())
}

pub fn to_json(alg: &BilinearAlgorithm) -> String {
    let Dims { m, n, p } = alg.dims();
    let file = AlgorithmFile {
        format: FORMAT.into(),
        version: VERSION,
        kind: Kind::Bilinear,
        m,
        n,
        p,
        t: alg.t(),
        field: "rational".into(),
        u: entries(alg.u()),
        v: entries(alg.v()),
        w: entries(alg.w()),
        tags: (!all_untagged(alg.tags())).then(|| alg.tags().to_vec()),
        verified: alg.certificate().cloned(),
    };
    serde_json::to_string(&file).expect("algorithm files serialize")
}

pub fn from_json(s: &str) -> Result<BilinearAlgorithm> {
    let f: AlgorithmFile = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    check_header(&f.format, f.version, &f.field)?;
    if f.kind != Kind::Bilinear {
        return Err(Error::Format("expected a bilinear algorithm, found a decomposed one".into()));
    }
    let dims = Dims::new(f.m, f.n, f.p);
    if dims.a_len() == 0 || dims.b_len() == 0 {
        return Err(Error::Format("dimensions must be positive".into()));
    }
    let tags = f.tags.unwrap_or_else(|| vec![RowTag::Untagged; f.t]);
    let mut alg = BilinearAlgorithm::with_tags(
        dims,
        matrix("U", f.t, dims.a_len(), f.u)?,
        matrix("V", f.t, dims.b_len(), f.v)?,
        matrix("W", f.t, dims.c_len(), f.w)?,
        tags,
    )
    .map_err(|e| Error::Format(e.to_string()))?;
    alg.set_certificate(f.verified);
    Ok(alg)
}

pub fn decomposed_to_json(alg: &DecomposedAlgorithm) -> String {
    let file = DecomposedFile {
        format: FORMAT.into(),
        version: VERSION,
        kind: Kind::Decomposed,
        n0: alg.n0(),
        s0: alg.s0(),
        t: alg.t(),
        field: "rational".into(),
        phi: entries(alg.phi()),
        u_phi: entries(alg.u_phi()),
        v_phi: entries(alg.v_phi()),
        w_phi: entries(alg.w_phi()),
        tags: (!all_untagged(alg.tags())).then(|| alg.tags().to_vec()),
        verified: alg.certificate().cloned(),
    };
    serde_json::to_string(&file).expect("algorithm files serialize")
}

pub fn decomposed_from_json(s: &str) -> Result<DecomposedAlgorithm> {
    let f: DecomposedFile = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    check_header(&f.format, f.version, &f.field)?;
    if f.kind != Kind::Decomposed {
        return Err(Error::Format("expected a decomposed algorithm".into()));
    }
    let tags = f.tags.unwrap_or_else(|| vec![RowTag::Untagged; f.t]);
    let mut alg = DecomposedAlgorithm::new(
        f.n0,
        matrix("phi", f.s0, f.n0 * f.n0, f.phi)?,
        matrix("U_phi", f.t, f.s0, f.u_phi)?,
        matrix("V_phi", f.t, f.s0, f.v_phi)?,
        matrix("W_phi", f.t, f.s0, f.w_phi)?,
        tags,
    )
    .map_err(|e| Error::Format(e.to_string()))?;
    alg.set_certificate(f.verified);
    Ok(alg)
}

/// Either kind of algorithm file.
#[derive(Clone, Debug)]
pub enum AnyAlgorithm {
    Bilinear(BilinearAlgorithm),
    Decomposed(DecomposedAlgorithm),
}

impl AnyAlgorithm {
    pub fn to_json(&self) -> String {
        match self {
            AnyAlgorithm::Bilinear(a) => to_json(a),
            AnyAlgorithm::Decomposed(d) => decomposed_to_json(d),
        }
    }

    /// The plain algorithm, multiplying out a decomposition if needed.
    pub fn into_bilinear(self) -> Result<BilinearAlgorithm> {
        match self {
            AnyAlgorithm::Bilinear(a) => Ok(a),
            AnyAlgorithm::Decomposed(d) => d.to_full(),
        }
    }
}

pub fn any_from_json(s: &str) -> Result<AnyAlgorithm> {
    #[derive(Deserialize)]
    struct Probe {
        kind: Kind,
    }
    let probe: Probe = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    match probe.kind {
        Kind::Bilinear => from_json(s).map(AnyAlgorithm::Bilinear),
        Kind::Decomposed => decomposed_from_json(s).map(AnyAlgorithm::Decomposed),
    }
}

pub fn read(path: &Path) -> Result<AnyAlgorithm> {
    any_from_json(&std::fs::read_to_string(path)?)
}

pub fn write(path: &Path, alg: &AnyAlgorithm) -> Result<()> {
    std::fs::write(path, alg.to_json())?;
    Ok(())
}

/// Reads a bilinear algorithm, multiplying out a decomposition if needed.
pub fn read_bilinear(path: &Path) -> Result<BilinearAlgorithm> {
    read(path)?.into_bilinear()
}

/// Dense rational matrices as text: one row per line, entries separated by
/// whitespace.
pub fn parse_dense(s: &str) -> Result<crate::dense::Matrix<Rational>> {
    let rows: Vec<Vec<Rational>> = s
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(str::parse).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Format("ragged matrix rows".into()));
    }
    crate::dense::Matrix::from_vec(rows.len(), cols, rows.into_iter().flatten().collect())
}

pub fn render_dense<T: Clone + std::fmt::Display>(m: &crate::dense::Matrix<T>) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| m.get(i, j).to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}
