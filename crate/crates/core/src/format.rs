//! Text documents: instances, certificates, reports, point clouds.
//!
//! All floats are written with 17 significant digits so that reading a file
//! back reproduces every number bit for bit.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::certsearch::{DualWitness, FarkasCertificate, LinearRow, PdlcWitness, PsdCombination};
use crate::error::{Error, Result};
use crate::hull::{SeparationCertificate, SeparationChecks};
use crate::quadcore::{QuadConstraint, QuadSystem, Sense, SymMatrix};

/// Maximum relative asymmetry accepted when loading a matrix.
pub const ASYMMETRY_TOL: f64 = 1e-12;

/// Pretty JSON with every float as `d.ddddddddddddddddde±x`.
pub struct FloatFormatter {
    inner: PrettyFormatter<'static>,
}

impl Default for FloatFormatter {
    fn default() -> Self {
        FloatFormatter {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Formatter for FloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(fmt_f64(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes with [`FloatFormatter`], trailing newline included.
pub fn to_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FloatFormatter::default());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Format(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Argument(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let res = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    res.map_err(Error::from)
}

#[derive(Serialize, Deserialize)]
struct RawConstraint {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    n: usize,
    sense: String,
    constraints: Vec<RawConstraint>,
}

/// Parses an instance document, symmetrizing each `A`.
pub fn parse_instance(text: &str) -> Result<QuadSystem> {
    let raw: RawInstance = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let sense = Sense::parse(&raw.sense).map_err(|e| Error::Format(e.to_string()))?;
    if raw.constraints.is_empty() {
        return Err(Error::Format("instance has no constraints".into()));
    }
    let mut cons = Vec::with_capacity(raw.constraints.len());
    for (i, rc) in raw.constraints.iter().enumerate() {
        let bad = |what: &str| Error::Format(format!("constraint {i}: {what}"));
        if rc.a.len() != raw.n || rc.a.iter().any(|r| r.len() != raw.n) {
            return Err(bad(&format!("A must be {0}x{0}", raw.n)));
        }
        if rc.b.len() != raw.n {
            return Err(bad(&format!("b must have length {}", raw.n)));
        }
        let a = SymMatrix::symmetrized(&rc.a, ASYMMETRY_TOL).map_err(|e| bad(&e.to_string()))?;
        let q =
            QuadConstraint::new(a, rc.b.clone(), rc.c, sense).map_err(|e| bad(&e.to_string()))?;
        cons.push(q);
    }
    QuadSystem::new(cons).map_err(|e| Error::Format(e.to_string()))
}

pub fn instance_to_string(sys: &QuadSystem) -> Result<String> {
    let raw = RawInstance {
        n: sys.n(),
        sense: sys.sense().as_str().to_string(),
        constraints: sys
            .constraints()
            .iter()
            .map(|q| RawConstraint {
                a: q.a.to_rows(),
                b: q.b.clone(),
                c: q.c,
            })
            .collect(),
    };
    to_string(&raw)
}

pub fn read_instance(path: &Path) -> Result<QuadSystem> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn write_instance(path: &Path, sys: &QuadSystem) -> Result<()> {
    write_atomic(path, instance_to_string(sys)?.as_bytes())
}

/// Every certificate kind the tools emit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    Pdlc {
        theta: Vec<f64>,
        margin: f64,
    },
    Dual {
        #[serde(rename = "W")]
        w: Vec<Vec<f64>>,
        inner: Vec<f64>,
        trace: f64,
    },
    PsdCombination {
        lambda: Vec<f64>,
        margin: f64,
    },
    Farkas {
        multipliers: Vec<f64>,
        derived: LinearRow,
    },
    Separation {
        alpha: Vec<f64>,
        beta: f64,
        lambda: Vec<f64>,
        checks: SeparationChecks,
        query_value: f64,
        nu_homogenized: usize,
    },
    Exclusion {
        lambda: Vec<f64>,
    },
    StrictPoint {
        x: Vec<f64>,
    },
    /// No certificate at the requested resolution.
    Inconclusive {
        detail: String,
    },
}

impl From<&PdlcWitness> for Certificate {
    fn from(w: &PdlcWitness) -> Self {
        Certificate::Pdlc {
            theta: w.theta.clone(),
            margin: w.margin,
        }
    }
}

impl From<&DualWitness> for Certificate {
    fn from(d: &DualWitness) -> Self {
        Certificate::Dual {
            w: d.w.to_rows(),
            inner: d.inner.clone(),
            trace: d.trace,
        }
    }
}

impl From<&PsdCombination> for Certificate {
    fn from(c: &PsdCombination) -> Self {
        Certificate::PsdCombination {
            lambda: c.lambda.clone(),
            margin: c.margin,
        }
    }
}

impl From<&FarkasCertificate> for Certificate {
    fn from(f: &FarkasCertificate) -> Self {
        Certificate::Farkas {
            multipliers: f.multipliers.clone(),
            derived: f.derived.clone(),
        }
    }
}

impl From<&SeparationCertificate> for Certificate {
    fn from(s: &SeparationCertificate) -> Self {
        Certificate::Separation {
            alpha: s.alpha.clone(),
            beta: s.beta,
            lambda: s.lambda.values().to_vec(),
            checks: s.checks,
            query_value: s.query_value,
            nu_homogenized: s.nu_homogenized,
        }
    }
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Pdlc { .. } => "pdlc",
            Certificate::Dual { .. } => "dual",
            Certificate::PsdCombination { .. } => "psd-combination",
            Certificate::Farkas { .. } => "farkas",
            Certificate::Separation { .. } => "separation",
            Certificate::Exclusion { .. } => "exclusion",
            Certificate::StrictPoint { .. } => "strict-point",
            Certificate::Inconclusive { .. } => "inconclusive",
        }
    }

    /// The dual matrix, symmetrized under the load tolerance.
    pub fn dual_matrix(&self) -> Result<Option<SymMatrix>> {
        match self {
            Certificate::Dual { w, .. } => SymMatrix::symmetrized(w, ASYMMETRY_TOL).map(Some),
            _ => Ok(None),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    certificate: Certificate,
}

pub fn certificate_to_string(c: &Certificate) -> Result<String> {
    to_string(&Envelope {
        certificate: c.clone(),
    })
}

pub fn parse_certificate(text: &str) -> Result<Certificate> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    Ok(env.certificate)
}

pub fn write_certificate(path: &Path, c: &Certificate) -> Result<()> {
    write_atomic(path, certificate_to_string(c)?.as_bytes())
}

pub fn read_certificate(path: &Path) -> Result<Certificate> {
    parse_certificate(&std::fs::read_to_string(path)?)
}

/// One point per line, coordinates separated by single spaces.
pub fn points_to_string(points: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for p in points {
        let line: Vec<String> = p.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))
                })
                .collect()
        })
        .collect()
}

pub fn write_points(path: &Path, points: &[Vec<f64>]) -> Result<()> {
    write_atomic(path, points_to_string(points).as_bytes())
}
