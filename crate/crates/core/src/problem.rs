//! JSON problem files: basic situations, master-function data, tuples and
//! polynomial systems. Every scalar is a string so exact values survive.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bethe::{translate_master, BetheError, MasterData, SectorSpec};
use crate::field::{make_extension, Complex64, ExtElem, FieldError, FieldSpec, Rational};
use crate::multiplicity::{MultError, MultivariateSystem};
use crate::poly::Poly;
use crate::ramification::{validate_basic, BasicSituation, RamError};
use crate::reproduction::FertileTuple;
use crate::text::{parse_expr, parse_poly, parse_scalar, ParseError};

/// The exact scalar used for problem data: rationals, or elements of the
/// problem's extension field.
pub type Exact = ExtElem;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot parse {what}: {source}")]
    Parse { what: String, source: ParseError },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Ram(#[from] RamError),
    #[error(transparent)]
    Bethe(#[from] BetheError),
    #[error(transparent)]
    Mult(#[from] MultError),
    #[error("invalid problem: {0}")]
    Invalid(String),
}

impl ProblemError {
    /// Errors raised by inconsistent ramification data rather than syntax.
    pub fn is_dimension_error(&self) -> bool {
        matches!(
            self,
            ProblemError::Ram(_) | ProblemError::Bethe(BetheError::Ram(_))
        )
    }
}

fn parse_err(what: impl Into<String>) -> impl FnOnce(ParseError) -> ProblemError {
    let what = what.into();
    move |source| ProblemError::Parse { what, source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    #[serde(default = "rational_kind")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minpoly: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    /// Named elements written in terms of the generator, e.g. `{"w": "a"}`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub named: BTreeMap<String, String>,
    /// Approximate value of the generator selecting the complex embedding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<[f64; 2]>,
}

fn rational_kind() -> String {
    "rational".into()
}

impl Default for FieldJson {
    fn default() -> Self {
        FieldJson {
            kind: rational_kind(),
            minpoly: None,
            generator: None,
            named: BTreeMap::new(),
            embedding: None,
        }
    }
}

impl FieldJson {
    /// Parses `rational` or `extension:<minpoly>`.
    pub fn from_flag(s: &str) -> Result<Self, ProblemError> {
        if s == "rational" {
            return Ok(FieldJson::default());
        }
        match s.strip_prefix("extension:") {
            Some(mp) => Ok(FieldJson {
                kind: "extension".into(),
                minpoly: Some(mp.to_string()),
                ..Default::default()
            }),
            None => Err(ProblemError::Invalid(format!(
                "field must be 'rational' or 'extension:<minpoly>', got '{}'",
                s
            ))),
        }
    }

    pub fn build(&self) -> Result<FieldSpec, ProblemError> {
        match self.kind.as_str() {
            "rational" => Ok(FieldSpec::Rational),
            "extension" => {
                let mp = self
                    .minpoly
                    .as_deref()
                    .ok_or_else(|| ProblemError::Invalid("extension field needs a minpoly".into()))?;
                let minpoly: Poly<Rational> =
                    parse_poly(mp, &FieldSpec::Rational).map_err(parse_err("minpoly"))?;
                let generator = self.generator.clone().unwrap_or_else(|| "a".into());
                let mut named = Vec::new();
                for (name, expr) in &self.named {
                    let e = parse_expr(expr).map_err(parse_err(format!("named root {}", name)))?;
                    let p: Poly<Rational> = e
                        .eval(&|s: &str| (s == generator).then(Poly::x))
                        .map_err(parse_err(format!("named root {}", name)))?;
                    named.push((name.clone(), p.coeffs().to_vec()));
                }
                let hint = self.embedding.map(|[re, im]| Complex64::new(re, im));
                Ok(FieldSpec::Extension(make_extension(&minpoly, &generator, &named, hint)?))
            }
            other => Err(ProblemError::Invalid(format!("unknown field kind '{}'", other))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamPointJson {
    pub z: String,
    pub ram: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfinityJson {
    pub ram: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicJson {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldJson>,
    pub points: Vec<RamPointJson>,
    pub infinity: InfinityJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterPointJson {
    pub z: String,
    pub m: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub l: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldJson>,
    pub points: Vec<MasterPointJson>,
}

/// A problem file as written.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProblemJson {
    Basic(BasicJson),
    Master(MasterJson),
}

impl ProblemJson {
    pub fn parse(s: &str) -> Result<Self, ProblemError> {
        let v: Value = serde_json::from_str(s)?;
        if v.get("d").is_some() {
            Ok(ProblemJson::Basic(serde_json::from_value(v)?))
        } else if v.get("l").is_some() {
            Ok(ProblemJson::Master(serde_json::from_value(v)?))
        } else {
            Err(ProblemError::Invalid(
                "expected a basic situation (with \"d\") or master data (with \"l\")".into(),
            ))
        }
    }

    pub fn field_json(&self) -> Option<&FieldJson> {
        match self {
            ProblemJson::Basic(b) => b.field.as_ref(),
            ProblemJson::Master(m) => m.field.as_ref(),
        }
    }
}

fn scalar(s: &str, field: &FieldSpec, what: &str) -> Result<Exact, ProblemError> {
    parse_scalar(s, field).map_err(parse_err(what))
}

/// A parsed problem: a basic situation, and the master data it came from
/// when given in that form.
#[derive(Debug, Clone)]
pub struct Problem {
    pub field: FieldSpec,
    pub basic: BasicSituation<Exact>,
    /// Present when the file held master-function data.
    pub master: Option<(MasterData<Exact>, SectorSpec)>,
    pub source: ProblemJson,
}

impl Problem {
    /// Parses a problem; `field_override` replaces the file's field.
    pub fn parse(s: &str, field_override: Option<&FieldJson>) -> Result<Self, ProblemError> {
        let source = ProblemJson::parse(s)?;
        let fj = field_override.or(source.field_json()).cloned().unwrap_or_default();
        let field = fj.build()?;
        match &source {
            ProblemJson::Basic(b) => {
                let points = b
                    .points
                    .iter()
                    .map(|p| Ok((scalar(&p.z, &field, "point")?, p.ram.clone())))
                    .collect::<Result<Vec<_>, ProblemError>>()?;
                let basic = validate_basic(b.d, b.n, points, b.infinity.ram.clone())?;
                Ok(Problem {
                    field,
                    basic,
                    master: None,
                    source,
                })
            }
            ProblemJson::Master(m) => {
                let points = m
                    .points
                    .iter()
                    .map(|p| scalar(&p.z, &field, "point"))
                    .collect::<Result<Vec<_>, _>>()?;
                let mult = m.points.iter().map(|p| p.m.clone()).collect();
                let data = MasterData::new(m.n, m.l.clone(), points, mult)?;
                let (basic, sector) = translate_master(&data)?;
                Ok(Problem {
                    field,
                    basic,
                    master: Some((data, sector)),
                    source,
                })
            }
        }
    }
}

/// Renders a basic situation back into the file format.
pub fn basic_to_json(basic: &BasicSituation<Exact>, field: Option<FieldJson>) -> BasicJson {
    BasicJson {
        d: basic.d,
        n: basic.n,
        field,
        points: basic
            .points
            .iter()
            .zip(&basic.ram)
            .map(|(z, a)| RamPointJson {
                z: z.to_string(),
                ram: a.entries().to_vec(),
            })
            .collect(),
        infinity: InfinityJson {
            ram: basic.infinity.entries().to_vec(),
        },
    }
}

/// A tuple file: either explicit `T_0..T_N` or a basic situation supplying
/// them, plus `y_1..y_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldJson>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<BasicJson>,
    pub y: Vec<String>,
    /// Extra points at which to report exponents.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<String>,
}

pub fn parse_tuple(
    s: &str,
    field_override: Option<&FieldJson>,
) -> Result<(FieldSpec, FertileTuple<Exact>), ProblemError> {
    let tj: TupleJson = serde_json::from_str(s)?;
    let fj = field_override
        .or(tj.field.as_ref())
        .or(tj.problem.as_ref().and_then(|p| p.field.as_ref()))
        .cloned()
        .unwrap_or_default();
    let field = fj.build()?;
    let y = tj
        .y
        .iter()
        .map(|p| parse_poly(p, &field).map_err(parse_err("y")))
        .collect::<Result<Vec<Poly<Exact>>, _>>()?;
    let mut points = tj
        .points
        .iter()
        .map(|p| scalar(p, &field, "point"))
        .collect::<Result<Vec<_>, _>>()?;
    let t = match (&tj.t, &tj.problem) {
        (Some(t), None) => t
            .iter()
            .map(|p| parse_poly(p, &field).map_err(parse_err("T")))
            .collect::<Result<Vec<_>, _>>()?,
        (None, Some(b)) => {
            let pts = b
                .points
                .iter()
                .map(|p| Ok((scalar(&p.z, &field, "point")?, p.ram.clone())))
                .collect::<Result<Vec<_>, ProblemError>>()?;
            let basic = validate_basic(b.d, b.n, pts, b.infinity.ram.clone())?;
            for z in &basic.points {
                if !points.contains(z) {
                    points.push(z.clone());
                }
            }
            basic.t.clone()
        }
        _ => {
            return Err(ProblemError::Invalid(
                "a tuple needs exactly one of \"T\" or \"problem\"".into(),
            ))
        }
    };
    if t.len() != y.len() + 1 {
        return Err(ProblemError::Invalid(format!(
            "{} polynomials y need {} polynomials T, got {}",
            y.len(),
            y.len() + 1,
            t.len()
        )));
    }
    Ok((field, FertileTuple::new(y, t, points)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldJson>,
    pub vars: Vec<String>,
    pub polys: Vec<String>,
}

pub fn parse_system(
    s: &str,
    field_override: Option<&FieldJson>,
) -> Result<(FieldSpec, MultivariateSystem<Exact>), ProblemError> {
    let sj: SystemJson = serde_json::from_str(s)?;
    let fj = field_override.or(sj.field.as_ref()).cloned().unwrap_or_default();
    let field = fj.build()?;
    let sys = MultivariateSystem::parse(&sj.vars, &sj.polys, &field)?;
    Ok((field, sys))
}

/// Parses comma-separated coordinates.
pub fn parse_point(s: &str, field: &FieldSpec) -> Result<Vec<Exact>, ProblemError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|c| scalar(c.trim(), field, "coordinate")).collect()
}
