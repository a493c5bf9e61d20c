//! The on-disk object format: one JSON document per object, with exact
//! scalars written as canonical `"p/q"` strings and a SHA-256 seal over the
//! rest of the document.
//!
//! ```json
//! { "format_version": "1", "kind": "complex", "ring": "Q",
//!   "payload": { ... }, "seal": "9f2c..." }
//! ```
//!
//! Rings are written `"Z"`, `"Q"`, `{"loc": [2, 3]}` or `{"Fp": 7}`.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::cellular::{Cell, CellMorphism, CellPresentation, NcPoly, RetractWitness};
use crate::complexes::{ChainMap, CohomologyReport, Complex, DegreeCohomology, Homotopy, PrimePower};
use crate::descent::{DescentResult, QuasiIsoDescent, SplitDescent};
use crate::dga::{DgAlgebra, DgModule, ProperCertificate};
use crate::error::{Error, Result};
use crate::karoubi::{HomotopyIdempotent, SplittingCertificate};
use crate::linalg::Matrix;
use crate::perfect::{BuildStep, PerfectPresentation};
use crate::rings::{CoefficientRing, ExactData, RingMap, Scalar};
use crate::smooth::{NotSmoothCertificate, SmoothCertificate};

pub const FORMAT_VERSION: &str = "1";

pub const KINDS: [&str; 10] = [
    "complex",
    "chain_map",
    "homotopy",
    "dg_algebra",
    "dg_module",
    "cell_presentation",
    "retract_witness",
    "homotopy_idempotent",
    "certificate",
    "descent_result",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Splitting(SplittingCertificate),
    Smooth(SmoothCertificate),
    NotSmooth(NotSmoothCertificate),
    Proper(ProperCertificate),
    Perfect(PerfectPresentation),
    QuasiIsoDescent(QuasiIsoDescent),
    SplitDescent(SplitDescent),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Descended {
    Complex(DescentResult<Complex>),
    ChainMap(DescentResult<ChainMap>),
    Homotopy(DescentResult<Homotopy>),
    DgAlgebra(DescentResult<DgAlgebra>),
    DgModule(DescentResult<DgModule>),
    CellPresentation(DescentResult<CellPresentation>),
    RetractWitness(DescentResult<RetractWitness>),
    HomotopyIdempotent(DescentResult<HomotopyIdempotent>),
}

/// Every kind of object that can live in a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Object {
    Complex(Complex),
    ChainMap(ChainMap),
    Homotopy(Homotopy),
    DgAlgebra(DgAlgebra),
    DgModule(DgModule),
    CellPresentation(CellPresentation),
    RetractWitness(RetractWitness),
    HomotopyIdempotent(HomotopyIdempotent),
    Certificate(Certificate),
    Descent(Descended),
}

impl Certificate {
    pub fn name(&self) -> &'static str {
        match self {
            Certificate::Splitting(_) => "splitting",
            Certificate::Smooth(_) => "smooth",
            Certificate::NotSmooth(_) => "not_smooth",
            Certificate::Proper(_) => "proper",
            Certificate::Perfect(_) => "perfect",
            Certificate::QuasiIsoDescent(_) => "quasi_iso_descent",
            Certificate::SplitDescent(_) => "split_descent",
        }
    }

    pub fn ring(&self) -> &CoefficientRing {
        match self {
            Certificate::Splitting(c) => c.ring(),
            Certificate::Smooth(c) => c.ring(),
            Certificate::NotSmooth(c) => c.ring(),
            Certificate::Proper(c) => c.algebra.ring(),
            Certificate::Perfect(c) => c.ring(),
            Certificate::QuasiIsoDescent(c) => c.morphism.input.ring(),
            Certificate::SplitDescent(c) => c.idempotent.ring(),
        }
    }

    pub fn verify(&self) -> Result<()> {
        match self {
            Certificate::Splitting(c) => c.verify(),
            Certificate::Smooth(c) => c.verify(),
            Certificate::NotSmooth(c) => c.verify(),
            Certificate::Proper(c) => c.verify(),
            Certificate::Perfect(c) => c.verify(),
            Certificate::QuasiIsoDescent(c) => c.verify(),
            Certificate::SplitDescent(c) => c.verify_against_witness(),
        }
    }
}

macro_rules! each_descended {
    ($d:expr, $r:ident => $body:expr) => {
        match $d {
            Descended::Complex($r) => $body,
            Descended::ChainMap($r) => $body,
            Descended::Homotopy($r) => $body,
            Descended::DgAlgebra($r) => $body,
            Descended::DgModule($r) => $body,
            Descended::CellPresentation($r) => $body,
            Descended::RetractWitness($r) => $body,
            Descended::HomotopyIdempotent($r) => $body,
        }
    };
}

impl Descended {
    pub fn object_kind(&self) -> &'static str {
        match self {
            Descended::Complex(_) => "complex",
            Descended::ChainMap(_) => "chain_map",
            Descended::Homotopy(_) => "homotopy",
            Descended::DgAlgebra(_) => "dg_algebra",
            Descended::DgModule(_) => "dg_module",
            Descended::CellPresentation(_) => "cell_presentation",
            Descended::RetractWitness(_) => "retract_witness",
            Descended::HomotopyIdempotent(_) => "homotopy_idempotent",
        }
    }

    pub fn stage(&self) -> &CoefficientRing {
        each_descended!(self, r => &r.stage)
    }

    pub fn input_ring(&self) -> &CoefficientRing {
        each_descended!(self, r => r.input.coefficient_ring())
    }

    pub fn verify(&self) -> Result<()> {
        each_descended!(self, r => r.verify())
    }
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Complex(_) => "complex",
            Object::ChainMap(_) => "chain_map",
            Object::Homotopy(_) => "homotopy",
            Object::DgAlgebra(_) => "dg_algebra",
            Object::DgModule(_) => "dg_module",
            Object::CellPresentation(_) => "cell_presentation",
            Object::RetractWitness(_) => "retract_witness",
            Object::HomotopyIdempotent(_) => "homotopy_idempotent",
            Object::Certificate(_) => "certificate",
            Object::Descent(_) => "descent_result",
        }
    }

    pub fn ring(&self) -> &CoefficientRing {
        match self {
            Object::Complex(x) => x.ring(),
            Object::ChainMap(x) => x.ring(),
            Object::Homotopy(x) => x.ring(),
            Object::DgAlgebra(x) => x.ring(),
            Object::DgModule(x) => x.ring(),
            Object::CellPresentation(x) => x.ring(),
            Object::RetractWitness(x) => x.ring(),
            Object::HomotopyIdempotent(x) => x.ring(),
            Object::Certificate(c) => c.ring(),
            Object::Descent(d) => d.input_ring(),
        }
    }

    /// Checks the invariants of the kind: `d∘d = 0`, commutation, homotopy
    /// equations, algebra and module axioms, cell boundaries, `r∘i = id`,
    /// idempotence up to homotopy; certificates are verified.
    pub fn validate(&self) -> Result<()> {
        match self {
            Object::Complex(x) => x.check(),
            Object::ChainMap(x) => x.check(),
            Object::Homotopy(x) => x.check(),
            Object::DgAlgebra(x) => x.check(),
            Object::DgModule(x) => x.check(),
            Object::CellPresentation(x) => x.validate(),
            Object::RetractWitness(x) => {
                if crate::cellular::verify_retract(x)? {
                    Ok(())
                } else {
                    Err(Error::InvalidWitness("r ∘ i is not the identity".into()))
                }
            }
            Object::HomotopyIdempotent(x) => {
                if crate::karoubi::verify_idempotent(x)? {
                    Ok(())
                } else {
                    Err(Error::InvalidIdempotent("e∘e - e ≠ dh + hd".into()))
                }
            }
            Object::Certificate(c) => c.verify(),
            Object::Descent(d) => d.verify(),
        }
    }

    /// Base change of a plain object or of a certificate that is a single
    /// piece of exact data.
    pub fn base_change(&self, m: &RingMap) -> Result<Object> {
        Ok(match self {
            Object::Complex(x) => Object::Complex(x.base_change(m)?),
            Object::ChainMap(x) => Object::ChainMap(x.base_change(m)?),
            Object::Homotopy(x) => Object::Homotopy(x.base_change(m)?),
            Object::DgAlgebra(x) => Object::DgAlgebra(x.base_change(m)?),
            Object::DgModule(x) => Object::DgModule(x.base_change(m)?),
            Object::CellPresentation(x) => Object::CellPresentation(x.base_change(m)?),
            Object::RetractWitness(x) => Object::RetractWitness(x.base_change(m)?),
            Object::HomotopyIdempotent(x) => Object::HomotopyIdempotent(x.base_change(m)?),
            Object::Certificate(Certificate::Splitting(c)) => Object::Certificate(Certificate::Splitting(c.base_change(m)?)),
            Object::Certificate(Certificate::Smooth(c)) => Object::Certificate(Certificate::Smooth(c.base_change(m)?)),
            Object::Certificate(Certificate::NotSmooth(c)) => {
                Object::Certificate(Certificate::NotSmooth(c.base_change(m)?))
            }
            Object::Certificate(Certificate::Perfect(c)) => Object::Certificate(Certificate::Perfect(c.base_change(m)?)),
            other => {
                return Err(Error::InvalidObject(format!("base change is not defined for {}", describe(other))));
            }
        })
    }
}

fn describe(o: &Object) -> String {
    match o {
        Object::Certificate(c) => format!("{} certificates", c.name()),
        Object::Descent(_) => "descent results".into(),
        x => x.kind().into(),
    }
}

/// A parsed file before its payload is decoded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectFile {
    pub format_version: String,
    pub kind: String,
    pub ring: CoefficientRing,
    pub payload: Value,
    pub seal: String,
}

impl ObjectFile {
    pub fn from_object(o: &Object) -> ObjectFile {
        let payload = encode_object(o);
        let mut f = ObjectFile {
            format_version: FORMAT_VERSION.into(),
            kind: o.kind().into(),
            ring: o.ring().clone(),
            payload,
            seal: String::new(),
        };
        f.seal = f.compute_seal();
        f
    }

    fn unsealed(&self) -> Value {
        json!({
            "format_version": self.format_version,
            "kind": self.kind,
            "ring": encode_ring(&self.ring),
            "payload": self.payload,
        })
    }

    pub fn compute_seal(&self) -> String {
        let text = serde_json::to_string(&self.unsealed()).expect("json values serialize");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn reseal(&mut self) {
        self.seal = self.compute_seal();
    }

    pub fn seal_ok(&self) -> bool {
        self.seal == self.compute_seal()
    }

    pub fn to_value(&self) -> Value {
        let mut v = self.unsealed();
        v["seal"] = Value::String(self.seal.clone());
        v
    }

    /// Pretty-printed with sorted keys and a trailing newline.
    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("json values serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<ObjectFile> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("not JSON: {e}")))?;
        ObjectFile::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<ObjectFile> {
        let format_version = string(field(v, "format_version")?, "format_version")?;
        if format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported format_version {format_version:?}")));
        }
        let kind = string(field(v, "kind")?, "kind")?;
        if !KINDS.contains(&kind.as_str()) {
            return Err(Error::Parse(format!("unknown kind {kind:?}")));
        }
        let ring = decode_ring(field(v, "ring")?)?;
        let payload = field(v, "payload")?.clone();
        let seal = match v.get("seal") {
            Some(s) => string(s, "seal")?,
            None => String::new(),
        };
        Ok(ObjectFile { format_version, kind, ring, payload, seal })
    }

    pub fn decode(&self) -> Result<Object> {
        let o = decode_object(&self.kind, &self.ring, &self.payload)?;
        if o.ring() != &self.ring {
            return Err(Error::Parse(format!("header ring {} differs from the payload ring {}", self.ring, o.ring())));
        }
        Ok(o)
    }
}

pub fn write_object(o: &Object) -> String {
    ObjectFile::from_object(o).to_text()
}

/// Parses and decodes without checking the seal or validating.
pub fn read_object(text: &str) -> Result<Object> {
    ObjectFile::parse(text)?.decode()
}

// rings and scalars

pub fn encode_ring(r: &CoefficientRing) -> Value {
    match r {
        CoefficientRing::Integers => json!("Z"),
        CoefficientRing::Rationals => json!("Q"),
        CoefficientRing::LocalizedIntegers(ps) => json!({ "loc": ps }),
        CoefficientRing::PrimeField(p) => json!({ "Fp": p }),
    }
}

pub fn decode_ring(v: &Value) -> Result<CoefficientRing> {
    let bad = || Error::Parse(format!("not a ring: {v}"));
    match v {
        Value::String(s) if s == "Z" => Ok(CoefficientRing::Integers),
        Value::String(s) if s == "Q" => Ok(CoefficientRing::Rationals),
        Value::Object(m) if m.len() == 1 => {
            if let Some(ps) = m.get("loc") {
                let ps = ps.as_array().ok_or_else(bad)?;
                let ps = ps.iter().map(|p| p.as_u64().ok_or_else(bad)).collect::<Result<Vec<_>>>()?;
                if ps.is_empty() || ps.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Parse("localization primes must be nonempty and strictly increasing".into()));
                }
                CoefficientRing::localized(ps)
            } else if let Some(p) = m.get("Fp") {
                CoefficientRing::prime_field(p.as_u64().ok_or_else(bad)?)
            } else {
                Err(bad())
            }
        }
        _ => Err(bad()),
    }
}

/// Ring names as typed on the command line: `Z`, `Q`, `F_7`, `Z[1/2,1/3]`.
pub fn parse_ring_name(s: &str) -> Result<CoefficientRing> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("not a ring name: {s:?}"));
    match t.as_str() {
        "Z" => return Ok(CoefficientRing::Integers),
        "Q" => return Ok(CoefficientRing::Rationals),
        _ => {}
    }
    if let Some(p) = t.strip_prefix("F_").or_else(|| t.strip_prefix('F')) {
        return CoefficientRing::prime_field(p.parse().map_err(|_| bad())?);
    }
    if let Some(inner) = t.strip_prefix("Z[").and_then(|x| x.strip_suffix(']')) {
        let ps = inner
            .split(',')
            .map(|x| x.strip_prefix("1/").and_then(|p| p.parse::<u64>().ok()).ok_or_else(bad))
            .collect::<Result<Vec<_>>>()?;
        return CoefficientRing::localized(ps);
    }
    Err(bad())
}

pub fn encode_scalar(x: &Scalar) -> Value {
    Value::String(x.to_string())
}

/// Only canonical forms are accepted: `"-3"`, `"5/7"`, never `"10/14"` or `"3/1"`.
pub fn decode_scalar(v: &Value) -> Result<Scalar> {
    let s = v.as_str().ok_or_else(|| Error::Parse(format!("scalar must be a string, found {v}")))?;
    let x = Scalar::from_str(s).map_err(|_| Error::Parse(format!("not a rational number: {s:?}")))?;
    if x.to_string() != s {
        return Err(Error::Parse(format!("scalar {s:?} is not in canonical form {x}")));
    }
    Ok(x)
}

fn field<'a>(v: &'a Value, k: &str) -> Result<&'a Value> {
    v.get(k).ok_or_else(|| Error::Parse(format!("missing field {k:?}")))
}

fn string(v: &Value, what: &str) -> Result<String> {
    v.as_str().map(str::to_string).ok_or_else(|| Error::Parse(format!("{what} must be a string")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("{what} must be an array")))
}

fn uint(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| Error::Parse(format!("{what} must be a nonnegative integer")))
}

fn sint(v: &Value, what: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| Error::Parse(format!("{what} must be an integer")))
}

fn list<T>(v: &Value, what: &str, f: impl Fn(&Value) -> Result<T>) -> Result<Vec<T>> {
    array(v, what)?.iter().map(f).collect()
}

// matrices

pub fn encode_matrix(m: &Matrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| Value::Array((0..m.cols()).map(|j| encode_scalar(&m[(i, j)])).collect()))
        .collect();
    json!({ "shape": [m.rows(), m.cols()], "rows": rows })
}

/// Entries must lie in `ring` as written.
pub fn decode_matrix(v: &Value, ring: &CoefficientRing) -> Result<Matrix> {
    let shape = array(field(v, "shape")?, "shape")?;
    if shape.len() != 2 {
        return Err(Error::Parse("shape must have two entries".into()));
    }
    let (r, c) = (uint(&shape[0], "rows")?, uint(&shape[1], "cols")?);
    let rows = array(field(v, "rows")?, "rows")?;
    if rows.len() != r {
        return Err(Error::Parse(format!("matrix declares {r} rows, has {}", rows.len())));
    }
    let mut data = Vec::with_capacity(r * c);
    for row in rows {
        let row = array(row, "row")?;
        if row.len() != c {
            return Err(Error::Parse(format!("matrix row has {} entries, expected {c}", row.len())));
        }
        for x in row {
            let x = decode_scalar(x)?;
            ring.check_scalar(&x)?;
            data.push(x);
        }
    }
    Matrix::from_vec(r, c, data)
}

fn encode_matrices(ms: &[Matrix]) -> Value {
    Value::Array(ms.iter().map(encode_matrix).collect())
}

fn decode_matrices(v: &Value, ring: &CoefficientRing) -> Result<Vec<Matrix>> {
    list(v, "matrix list", |x| decode_matrix(x, ring))
}

fn encode_components(c: &BTreeMap<i64, Matrix>) -> Value {
    Value::Array(c.iter().map(|(n, m)| json!({ "degree": n, "matrix": encode_matrix(m) })).collect())
}

fn decode_components(v: &Value, ring: &CoefficientRing) -> Result<BTreeMap<i64, Matrix>> {
    let mut out = BTreeMap::new();
    for x in array(v, "components")? {
        let n = sint(field(x, "degree")?, "degree")?;
        if out.insert(n, decode_matrix(field(x, "matrix")?, ring)?).is_some() {
            return Err(Error::Parse(format!("degree {n} given twice")));
        }
    }
    Ok(out)
}

// complexes, maps, homotopies

pub fn encode_complex(c: &Complex) -> Value {
    json!({ "lo": c.lo(), "ranks": c.ranks(), "differentials": encode_matrices(c.differentials()) })
}

pub fn decode_complex(v: &Value, ring: &CoefficientRing) -> Result<Complex> {
    let lo = sint(field(v, "lo")?, "lo")?;
    let ranks = list(field(v, "ranks")?, "ranks", |x| uint(x, "rank"))?;
    let diffs = decode_matrices(field(v, "differentials")?, ring)?;
    Complex::new(ring.clone(), lo, ranks, diffs)
}

pub fn encode_chain_map(f: &ChainMap) -> Value {
    json!({
        "src": encode_complex(f.src()),
        "dst": encode_complex(f.dst()),
        "components": encode_components(f.components()),
    })
}

pub fn decode_chain_map(v: &Value, ring: &CoefficientRing) -> Result<ChainMap> {
    let src = decode_complex(field(v, "src")?, ring)?;
    let dst = decode_complex(field(v, "dst")?, ring)?;
    ChainMap::new(&src, &dst, decode_components(field(v, "components")?, ring)?)
}

pub fn encode_homotopy(h: &Homotopy) -> Value {
    json!({
        "from": encode_chain_map(h.from()),
        "to": encode_chain_map(h.to()),
        "components": encode_components(h.components()),
    })
}

pub fn decode_homotopy(v: &Value, ring: &CoefficientRing) -> Result<Homotopy> {
    let f = decode_chain_map(field(v, "from")?, ring)?;
    let g = decode_chain_map(field(v, "to")?, ring)?;
    Homotopy::new(&f, &g, decode_components(field(v, "components")?, ring)?)
}

fn encode_idempotent(p: &HomotopyIdempotent) -> Value {
    json!({ "e": encode_chain_map(&p.e), "h": encode_homotopy(&p.h) })
}

fn decode_idempotent(v: &Value, ring: &CoefficientRing) -> Result<HomotopyIdempotent> {
    let e = decode_chain_map(field(v, "e")?, ring)?;
    let h = decode_homotopy(field(v, "h")?, ring)?;
    HomotopyIdempotent::new(e, h)
}

fn encode_report(r: &CohomologyReport) -> Value {
    let degrees: Vec<Value> = r
        .degrees
        .iter()
        .map(|d| {
            let torsion: Vec<Value> =
                d.torsion.iter().map(|t| json!({ "prime": t.prime, "exponent": t.exponent })).collect();
            json!({ "degree": d.degree, "betti": d.betti, "torsion": torsion })
        })
        .collect();
    json!({ "ring": encode_ring(&r.ring), "degrees": degrees })
}

fn decode_report(v: &Value) -> Result<CohomologyReport> {
    let ring = decode_ring(field(v, "ring")?)?;
    let degrees = list(field(v, "degrees")?, "degrees", |d| {
        Ok(DegreeCohomology {
            degree: sint(field(d, "degree")?, "degree")?,
            betti: uint(field(d, "betti")?, "betti")?,
            torsion: list(field(d, "torsion")?, "torsion", |t| {
                Ok(PrimePower {
                    prime: uint(field(t, "prime")?, "prime")? as u64,
                    exponent: uint(field(t, "exponent")?, "exponent")? as u32,
                })
            })?,
        })
    })?;
    Ok(CohomologyReport { ring, degrees })
}

// algebras and modules

pub fn encode_algebra(a: &DgAlgebra) -> Value {
    json!({
        "underlying": encode_complex(a.underlying()),
        "left": encode_matrices(a.left_all()),
        "unit": encode_matrix(a.unit()),
    })
}

pub fn decode_algebra(v: &Value, ring: &CoefficientRing) -> Result<DgAlgebra> {
    let c = decode_complex(field(v, "underlying")?, ring)?;
    let left = decode_matrices(field(v, "left")?, ring)?;
    let unit = decode_matrix(field(v, "unit")?, ring)?;
    DgAlgebra::new(c, left, unit)
}

pub fn encode_module(m: &DgModule) -> Value {
    json!({
        "algebra": encode_algebra(m.algebra()),
        "underlying": encode_complex(m.underlying()),
        "act": encode_matrices(m.actions()),
    })
}

pub fn decode_module(v: &Value, ring: &CoefficientRing) -> Result<DgModule> {
    let a = decode_algebra(field(v, "algebra")?, ring)?;
    let c = decode_complex(field(v, "underlying")?, ring)?;
    DgModule::new(&a, c, decode_matrices(field(v, "act")?, ring)?)
}

// cells

fn encode_poly(p: &NcPoly, names: &[&str]) -> Value {
    Value::Array(
        p.terms()
            .map(|(w, c)| {
                let word: Vec<&str> = w.iter().map(|&i| names[i]).collect();
                json!({ "coefficient": encode_scalar(c), "word": word })
            })
            .collect(),
    )
}

fn decode_poly(v: &Value, names: &[String], ring: &CoefficientRing) -> Result<NcPoly> {
    let mut p = NcPoly::zero();
    for t in array(v, "polynomial")? {
        let c = decode_scalar(field(t, "coefficient")?)?;
        ring.check_scalar(&c)?;
        let word = list(field(t, "word")?, "word", |x| {
            let x = x.as_str().ok_or_else(|| Error::Parse("cell names must be strings".into()))?;
            names
                .iter()
                .position(|n| n == x)
                .ok_or_else(|| Error::InvalidPresentation(format!("unknown cell {x:?}")))
        })?;
        p.add_term(word, &c);
    }
    Ok(p)
}

fn names(p: &CellPresentation) -> Vec<&str> {
    p.cells().iter().map(|c| c.name.as_str()).collect()
}

pub fn encode_cells(p: &CellPresentation) -> Value {
    let n = names(p);
    let cells: Vec<Value> = p
        .cells()
        .iter()
        .map(|c| json!({ "name": c.name, "degree": c.degree, "boundary": encode_poly(&c.boundary, &n) }))
        .collect();
    json!({ "cells": cells })
}

pub fn decode_cells(v: &Value, ring: &CoefficientRing) -> Result<CellPresentation> {
    let raw = array(field(v, "cells")?, "cells")?;
    let names = raw.iter().map(|c| string(field(c, "name")?, "name")).collect::<Result<Vec<_>>>()?;
    let cells = raw
        .iter()
        .zip(&names)
        .map(|(c, name)| {
            Ok(Cell {
                name: name.clone(),
                degree: sint(field(c, "degree")?, "degree")?,
                boundary: decode_poly(field(c, "boundary")?, &names, ring)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CellPresentation::new(ring.clone(), cells)
}

fn encode_morphism(f: &CellMorphism, dst: &CellPresentation) -> Value {
    let n = names(dst);
    Value::Array(f.images.iter().map(|p| encode_poly(p, &n)).collect())
}

fn decode_morphism(v: &Value, dst: &CellPresentation) -> Result<CellMorphism> {
    let n: Vec<String> = dst.cells().iter().map(|c| c.name.clone()).collect();
    Ok(CellMorphism { images: list(v, "images", |p| decode_poly(p, &n, dst.ring()))? })
}

pub fn encode_witness(w: &RetractWitness) -> Value {
    json!({
        "target": encode_cells(&w.target),
        "ambient": encode_cells(&w.ambient),
        "section": encode_morphism(&w.section, &w.ambient),
        "retraction": encode_morphism(&w.retraction, &w.target),
    })
}

pub fn decode_witness(v: &Value, ring: &CoefficientRing) -> Result<RetractWitness> {
    let target = decode_cells(field(v, "target")?, ring)?;
    let ambient = decode_cells(field(v, "ambient")?, ring)?;
    let section = decode_morphism(field(v, "section")?, &ambient)?;
    let retraction = decode_morphism(field(v, "retraction")?, &target)?;
    if section.images.len() != target.len() || retraction.images.len() != ambient.len() {
        return Err(Error::ShapeMismatch("one image per generator is required".into()));
    }
    Ok(RetractWitness { target, ambient, section, retraction })
}

// certificates

fn encode_step(s: &BuildStep) -> Value {
    match s {
        BuildStep::Free { degree, rank } => json!({ "step": "free", "degree": degree, "rank": rank }),
        BuildStep::Cone { degree, rank, images } => {
            json!({ "step": "cone", "degree": degree, "rank": rank, "images": encode_matrix(images) })
        }
        BuildStep::Shift { by } => json!({ "step": "shift", "by": by }),
        BuildStep::Retract { idempotent, section, retraction } => json!({
            "step": "retract",
            "idempotent": encode_matrix(idempotent),
            "section": encode_matrix(section),
            "retraction": encode_matrix(retraction),
        }),
    }
}

fn decode_step(v: &Value, ring: &CoefficientRing) -> Result<BuildStep> {
    let m = |k: &str| decode_matrix(field(v, k)?, ring);
    Ok(match string(field(v, "step")?, "step")?.as_str() {
        "free" => BuildStep::Free { degree: sint(field(v, "degree")?, "degree")?, rank: uint(field(v, "rank")?, "rank")? },
        "cone" => BuildStep::Cone {
            degree: sint(field(v, "degree")?, "degree")?,
            rank: uint(field(v, "rank")?, "rank")?,
            images: m("images")?,
        },
        "shift" => BuildStep::Shift { by: sint(field(v, "by")?, "by")? },
        "retract" => BuildStep::Retract { idempotent: m("idempotent")?, section: m("section")?, retraction: m("retraction")? },
        s => return Err(Error::Parse(format!("unknown build step {s:?}"))),
    })
}

fn encode_splitting(c: &SplittingCertificate) -> Value {
    json!({
        "input": encode_idempotent(&c.input),
        "a": encode_complex(&c.a),
        "i": encode_chain_map(&c.i),
        "r": encode_chain_map(&c.r),
        "h_ri": encode_homotopy(&c.h_ri),
        "h_ir": encode_homotopy(&c.h_ir),
    })
}

fn decode_splitting(v: &Value, ring: &CoefficientRing) -> Result<SplittingCertificate> {
    Ok(SplittingCertificate {
        input: decode_idempotent(field(v, "input")?, ring)?,
        a: decode_complex(field(v, "a")?, ring)?,
        i: decode_chain_map(field(v, "i")?, ring)?,
        r: decode_chain_map(field(v, "r")?, ring)?,
        h_ri: decode_homotopy(field(v, "h_ri")?, ring)?,
        h_ir: decode_homotopy(field(v, "h_ir")?, ring)?,
    })
}

fn encode_certificate(c: &Certificate) -> Value {
    let mut body = match c {
        Certificate::Splitting(c) => encode_splitting(c),
        Certificate::Smooth(c) => json!({
            "algebra": encode_algebra(&c.algebra),
            "length": c.length,
            "differentials": encode_matrices(&c.differentials),
            "syzygy": encode_matrix(&c.syzygy),
            "projection": encode_matrix(&c.projection),
            "section": encode_matrix(&c.section),
        }),
        Certificate::NotSmooth(c) => json!({
            "algebra": encode_algebra(&c.algebra),
            "period": [c.period.0, c.period.1],
            "source": encode_matrix(&c.source),
            "target": encode_matrix(&c.target),
            "isomorphism": encode_matrix(&c.isomorphism),
            "inverse": encode_matrix(&c.inverse),
        }),
        Certificate::Proper(c) => json!({ "algebra": encode_algebra(&c.algebra), "report": encode_report(&c.report) }),
        Certificate::Perfect(c) => json!({
            "module": encode_module(&c.module),
            "builder": Value::Array(c.builder.iter().map(encode_step).collect()),
            "quasi_iso": encode_matrix(&c.quasi_iso),
        }),
        Certificate::QuasiIsoDescent(c) => json!({
            "morphism": encode_descent(&Descended::ChainMap(c.morphism.clone())),
            "cone": encode_report(&c.cone),
        }),
        Certificate::SplitDescent(c) => json!({
            "witness": encode_witness(&c.witness),
            "weight": c.weight,
            "idempotent": encode_idempotent(&c.idempotent),
            "stage": encode_ring(&c.stage),
            "certificate": encode_splitting(&c.certificate),
        }),
    };
    body["type"] = json!(c.name());
    body
}

fn decode_certificate(v: &Value, ring: &CoefficientRing) -> Result<Certificate> {
    let m = |k: &str| decode_matrix(field(v, k)?, ring);
    Ok(match string(field(v, "type")?, "certificate type")?.as_str() {
        "splitting" => Certificate::Splitting(decode_splitting(v, ring)?),
        "smooth" => Certificate::Smooth(SmoothCertificate {
            algebra: decode_algebra(field(v, "algebra")?, ring)?,
            length: uint(field(v, "length")?, "length")?,
            differentials: decode_matrices(field(v, "differentials")?, ring)?,
            syzygy: m("syzygy")?,
            projection: m("projection")?,
            section: m("section")?,
        }),
        "not_smooth" => {
            let p = list(field(v, "period")?, "period", |x| uint(x, "period"))?;
            if p.len() != 2 {
                return Err(Error::Parse("period must have two entries".into()));
            }
            Certificate::NotSmooth(NotSmoothCertificate {
                algebra: decode_algebra(field(v, "algebra")?, ring)?,
                period: (p[0], p[1]),
                source: m("source")?,
                target: m("target")?,
                isomorphism: m("isomorphism")?,
                inverse: m("inverse")?,
            })
        }
        "proper" => Certificate::Proper(ProperCertificate {
            algebra: decode_algebra(field(v, "algebra")?, ring)?,
            report: decode_report(field(v, "report")?)?,
        }),
        "perfect" => Certificate::Perfect(PerfectPresentation {
            module: decode_module(field(v, "module")?, ring)?,
            builder: list(field(v, "builder")?, "builder", |s| decode_step(s, ring))?,
            quasi_iso: m("quasi_iso")?,
        }),
        "quasi_iso_descent" => {
            let morphism = match decode_descent(field(v, "morphism")?, ring)? {
                Descended::ChainMap(d) => d,
                d => return Err(Error::Parse(format!("expected a descended chain map, found {}", d.object_kind()))),
            };
            Certificate::QuasiIsoDescent(QuasiIsoDescent { morphism, cone: decode_report(field(v, "cone")?)? })
        }
        "split_descent" => {
            let stage = decode_ring(field(v, "stage")?)?;
            Certificate::SplitDescent(SplitDescent {
                witness: decode_witness(field(v, "witness")?, ring)?,
                weight: uint(field(v, "weight")?, "weight")?,
                idempotent: decode_idempotent(field(v, "idempotent")?, ring)?,
                certificate: decode_splitting(field(v, "certificate")?, &stage)?,
                stage,
            })
        }
        t => return Err(Error::Parse(format!("unknown certificate type {t:?}"))),
    })
}

// descent results

fn encode_plain(o: &Object) -> Value {
    match o {
        Object::Complex(x) => encode_complex(x),
        Object::ChainMap(x) => encode_chain_map(x),
        Object::Homotopy(x) => encode_homotopy(x),
        Object::DgAlgebra(x) => encode_algebra(x),
        Object::DgModule(x) => encode_module(x),
        Object::CellPresentation(x) => encode_cells(x),
        Object::RetractWitness(x) => encode_witness(x),
        Object::HomotopyIdempotent(x) => encode_idempotent(x),
        Object::Certificate(c) => encode_certificate(c),
        Object::Descent(d) => encode_descent(d),
    }
}

fn encode_descent(d: &Descended) -> Value {
    fn body<T: Clone>(r: &DescentResult<T>, wrap: fn(T) -> Object) -> (Value, Value) {
        (encode_plain(&wrap(r.input.clone())), encode_plain(&wrap(r.model.clone())))
    }
    let (input, model) = match d {
        Descended::Complex(r) => body(r, Object::Complex),
        Descended::ChainMap(r) => body(r, Object::ChainMap),
        Descended::Homotopy(r) => body(r, Object::Homotopy),
        Descended::DgAlgebra(r) => body(r, Object::DgAlgebra),
        Descended::DgModule(r) => body(r, Object::DgModule),
        Descended::CellPresentation(r) => body(r, Object::CellPresentation),
        Descended::RetractWitness(r) => body(r, Object::RetractWitness),
        Descended::HomotopyIdempotent(r) => body(r, Object::HomotopyIdempotent),
    };
    json!({
        "object_kind": d.object_kind(),
        "stage": encode_ring(d.stage()),
        "input": input,
        "model": model,
    })
}

fn decode_descent(v: &Value, ring: &CoefficientRing) -> Result<Descended> {
    let kind = string(field(v, "object_kind")?, "object_kind")?;
    let stage = decode_ring(field(v, "stage")?)?;
    let input = decode_object(&kind, ring, field(v, "input")?)?;
    let model = decode_object(&kind, &stage, field(v, "model")?)?;
    macro_rules! pair {
        ($variant:ident) => {
            match (input, model) {
                (Object::$variant(input), Object::$variant(model)) => {
                    Descended::$variant(DescentResult { stage, input, model })
                }
                _ => unreachable!("decoded with the same kind"),
            }
        };
    }
    Ok(match kind.as_str() {
        "complex" => pair!(Complex),
        "chain_map" => pair!(ChainMap),
        "homotopy" => pair!(Homotopy),
        "dg_algebra" => pair!(DgAlgebra),
        "dg_module" => pair!(DgModule),
        "cell_presentation" => pair!(CellPresentation),
        "retract_witness" => pair!(RetractWitness),
        "homotopy_idempotent" => pair!(HomotopyIdempotent),
        k => return Err(Error::Parse(format!("descent results of kind {k:?} are not supported"))),
    })
}

pub fn encode_object(o: &Object) -> Value {
    encode_plain(o)
}

pub fn decode_object(kind: &str, ring: &CoefficientRing, v: &Value) -> Result<Object> {
    Ok(match kind {
        "complex" => Object::Complex(decode_complex(v, ring)?),
        "chain_map" => Object::ChainMap(decode_chain_map(v, ring)?),
        "homotopy" => Object::Homotopy(decode_homotopy(v, ring)?),
        "dg_algebra" => Object::DgAlgebra(decode_algebra(v, ring)?),
        "dg_module" => Object::DgModule(decode_module(v, ring)?),
        "cell_presentation" => Object::CellPresentation(decode_cells(v, ring)?),
        "retract_witness" => Object::RetractWitness(decode_witness(v, ring)?),
        "homotopy_idempotent" => Object::HomotopyIdempotent(decode_idempotent(v, ring)?),
        "certificate" => Object::Certificate(decode_certificate(v, ring)?),
        "descent_result" => Object::Descent(decode_descent(v, ring)?),
        k => return Err(Error::Parse(format!("unknown kind {k:?}"))),
    })
}

/// Paths (as JSON pointers) of every scalar string in a payload, in
/// document order.
pub fn scalar_paths(payload: &Value) -> Vec<String> {
    fn walk(v: &Value, path: &str, in_scalar_slot: bool, out: &mut Vec<String>) {
        match v {
            Value::String(_) if in_scalar_slot => out.push(path.to_string()),
            Value::Array(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    walk(x, &format!("{path}/{i}"), in_scalar_slot, out);
                }
            }
            Value::Object(m) => walk_map(m, path, out),
            _ => {}
        }
    }
    fn walk_map(m: &Map<String, Value>, path: &str, out: &mut Vec<String>) {
        for (k, x) in m {
            let scalar_slot = k == "rows" || k == "coefficient";
            walk(x, &format!("{path}/{k}"), scalar_slot, out);
        }
    }
    let mut out = Vec::new();
    walk(payload, "", false, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::{frac, int};

    fn q() -> CoefficientRing {
        CoefficientRing::Rationals
    }

    fn roundtrip(o: Object) {
        let text = write_object(&o);
        let f = ObjectFile::parse(&text).unwrap();
        assert!(f.seal_ok());
        assert_eq!(f.decode().unwrap(), o);
        assert_eq!(write_object(&f.decode().unwrap()), text);
    }

    fn interval() -> Complex {
        let d = Matrix::from_vec(1, 1, vec![frac(3, 2)]).unwrap();
        Complex::from_differentials(q(), -1, vec![d]).unwrap()
    }

    #[test]
    fn complexes_and_maps_roundtrip() {
        let c = interval();
        roundtrip(Object::Complex(c.clone()));
        let f = c.identity().scale(&int(-2));
        roundtrip(Object::ChainMap(f.clone()));
        roundtrip(Object::Homotopy(Homotopy::zero(&f)));
    }

    #[test]
    fn algebras_modules_cells_roundtrip() {
        let a = DgAlgebra::matrix_algebra(q(), 2);
        roundtrip(Object::DgAlgebra(a));
        roundtrip(Object::DgModule(DgModule::column_module(q(), 2)));
        let p = CellPresentation::from_named(
            q(),
            &[("x", 0, vec![]), ("y", 1, vec![(frac(1, 3), vec!["x", "x"])])],
        )
        .unwrap();
        roundtrip(Object::CellPresentation(p.clone()));
        roundtrip(Object::RetractWitness(RetractWitness::identity(&p)));
    }

    #[test]
    fn rings_encode_as_documented() {
        for r in [
            CoefficientRing::Integers,
            CoefficientRing::Rationals,
            CoefficientRing::localized([2, 5]).unwrap(),
            CoefficientRing::prime_field(7).unwrap(),
        ] {
            assert_eq!(decode_ring(&encode_ring(&r)).unwrap(), r);
            assert_eq!(parse_ring_name(&r.to_string()).unwrap(), r);
        }
        assert_eq!(encode_ring(&CoefficientRing::localized([3]).unwrap()), json!({"loc": [3]}));
        assert!(decode_ring(&json!({"loc": [4]})).is_err());
    }

    #[test]
    fn scalars_must_be_canonical() {
        assert_eq!(decode_scalar(&json!("-3/4")).unwrap(), frac(-3, 4));
        assert!(decode_scalar(&json!("6/8")).is_err());
        assert!(decode_scalar(&json!("2/1")).is_err());
        assert!(decode_scalar(&json!(2)).is_err());
    }

    #[test]
    fn header_errors() {
        let mut v = ObjectFile::from_object(&Object::Complex(interval())).to_value();
        v["kind"] = json!("spaceship");
        assert!(matches!(ObjectFile::from_value(&v), Err(Error::Parse(m)) if m.contains("unknown kind")));
        v["kind"] = json!("complex");
        v["format_version"] = json!("2");
        assert!(ObjectFile::from_value(&v).is_err());
    }

    #[test]
    fn tampering_breaks_the_seal() {
        let mut f = ObjectFile::from_object(&Object::Complex(interval()));
        let path = scalar_paths(&f.payload)[0].clone();
        *f.payload.pointer_mut(&path).unwrap() = json!("5/2");
        assert!(!f.seal_ok());
        f.reseal();
        assert!(f.seal_ok());
    }

    #[test]
    fn entries_outside_the_ring_are_rejected() {
        let text = write_object(&Object::Complex(interval())).replace("\"Q\"", "\"Z\"");
        assert!(matches!(read_object(&text), Err(Error::NotInRing { .. })));
    }
}
