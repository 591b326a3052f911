use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use wronski_core::bethe::{
    certify_divisibility, group_components, infinity_labels, all_sectors, solve_critical, MasterData, SectorSpec, SolveOptions,
};
use wronski_core::field::{Complex64, FieldSpec, Scalar};
use wronski_core::multiplicity::{
    clear_denominators, local_multiplicity, sliced_multiplicity, MultError, MultOptions, MultiplicityResult,
};
use wronski_core::poly::wronskian;
use wronski_core::problem::{
    basic_to_json, parse_point, parse_system, parse_tuple, BasicJson, FieldJson, Problem, ProblemError,
    ProblemJson,
};
use wronski_core::ramification::{ram_from_exponents, Place};
use wronski_core::reproduction::{build_space, q_witness};
use wronski_core::schubert::{intersection_number, lr_coefficient, multiply, Partition};
use wronski_core::text::parse_poly;
use wronski_core::verify::{
    certify_candidate, format_complex, run_verify, select_sectors, SectorChoice, Verdict, VerifyOptions,
};
use wronski_core::wronskian_eq::{solvable, solve};
use wronski_core::ExtPoly;

use crate::SolveArgs;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_DIMENSION: u8 = 3;
pub const EXIT_UNDERCOUNT: u8 = 4;
pub const EXIT_OVERCOUNT: u8 = 5;
pub const EXIT_USAGE: u8 = 64;

pub struct Output {
    pub json: String,
    pub text: String,
    pub code: u8,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        let code = if e.is_dimension_error() { EXIT_DIMENSION } else { EXIT_PARSE };
        CliError::new(code, e.to_string())
    }
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::new(EXIT_FAILURE, e.to_string())
}

fn output<T: Serialize>(value: &T, text: String) -> Result<Output, CliError> {
    Ok(Output {
        json: serde_json::to_string_pretty(value).map_err(failure)?,
        text,
        code: 0,
    })
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_PARSE, format!("cannot read {}: {}", path.display(), e)))
}

pub fn field_flag(s: &str) -> Result<FieldJson, CliError> {
    FieldJson::from_flag(s).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))
}

fn load_problem(path: &Path, field: Option<&FieldJson>) -> Result<Problem, CliError> {
    Ok(Problem::parse(&read(path)?, field)?)
}

fn sector_choice(s: &str) -> Result<SectorChoice, CliError> {
    SectorChoice::parse(s).ok_or_else(|| CliError::new(EXIT_USAGE, format!("bad sector '{}'", s)))
}

fn strings<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

#[derive(Serialize)]
struct ValidateReport {
    field: String,
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    grassmannian_dim: usize,
    #[serde(rename = "K")]
    k: Vec<String>,
    #[serde(rename = "T")]
    t: Vec<String>,
    l: Vec<usize>,
    infinity_labels: Vec<usize>,
    sectors: Vec<SectorSpec>,
    intersection_number: u64,
}

pub fn validate(path: &Path, field: Option<&FieldJson>) -> Result<Output, CliError> {
    let p = load_problem(path, field)?;
    let b = &p.basic;
    let target = intersection_number(b).map_err(|e| CliError::new(EXIT_DIMENSION, e.to_string()))?;
    let report = ValidateReport {
        field: p.field.describe(),
        d: b.d,
        n: b.n,
        grassmannian_dim: b.grassmannian_dim(),
        k: strings(&b.k),
        t: strings(&b.t),
        l: b.l.clone(),
        infinity_labels: infinity_labels(b),
        sectors: all_sectors(b),
        intersection_number: target,
    };
    let mut text = format!(
        "field {}  d = {}  N = {}  dim Gr = {}  intersection number = {}\n",
        report.field, b.d, b.n, report.grassmannian_dim, target
    );
    let _ = writeln!(text, "{:>3}  {:<24} {:<24} {:>4}", "i", "K_i", "T_i", "l_i");
    for i in 0..=b.n + 1 {
        let t = b.t.get(i).map(|p| p.to_string()).unwrap_or_default();
        let l = if (1..=b.n).contains(&i) { b.l[i - 1].to_string() } else { String::new() };
        let _ = writeln!(text, "{:>3}  {:<24} {:<24} {:>4}", i, b.k[i].to_string(), t, l);
    }
    for s in &report.sectors {
        let _ = writeln!(text, "sector w = {:?}: lengths {:?}", s.w, s.lengths);
    }
    output(&report, text)
}

fn partition(s: &str) -> Result<Partition, CliError> {
    let parts = if s.trim().is_empty() {
        Vec::new()
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::new(EXIT_USAGE, format!("bad partition '{}': {}", s, e)))?
    };
    Partition::new(parts).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))
}

#[derive(Serialize)]
struct Term {
    partition: Vec<usize>,
    coefficient: u64,
}

pub fn lr(
    problem: Option<&Path>,
    lambda: Option<String>,
    mu: Option<String>,
    nu: Option<String>,
    box_dims: Option<Vec<usize>>,
    field: Option<&FieldJson>,
) -> Result<Output, CliError> {
    if let Some(path) = problem {
        let p = load_problem(path, field)?;
        let n = intersection_number(&p.basic).map_err(|e| CliError::new(EXIT_DIMENSION, e.to_string()))?;
        return output(&serde_json::json!({ "intersection_number": n }), format!("{}\n", n));
    }
    let (Some(lambda), Some(mu), Some(dims)) = (lambda, mu, box_dims) else {
        return Err(CliError::new(EXIT_USAGE, "lr needs --problem, or --lambda, --mu and --box"));
    };
    let (lambda, mu) = (partition(&lambda)?, partition(&mu)?);
    let (rows, cols) = (dims[0], dims[1]);
    let bad_box = |e: wronski_core::schubert::SchubertError| CliError::new(EXIT_DIMENSION, e.to_string());
    match nu {
        Some(nu) => {
            let nu = partition(&nu)?;
            let c = lr_coefficient(&lambda, &mu, &nu, rows, cols).map_err(bad_box)?;
            output(&serde_json::json!({ "coefficient": c }), format!("{}\n", c))
        }
        None => {
            let prod = multiply(&lambda, &mu, rows, cols).map_err(bad_box)?;
            let terms: Vec<Term> = prod
                .iter()
                .map(|(p, &c)| Term {
                    partition: p.parts().to_vec(),
                    coefficient: c,
                })
                .collect();
            let mut text = String::new();
            for (p, c) in &prod {
                let _ = writeln!(text, "{:>6}  {}", c, p);
            }
            output(&serde_json::json!({ "product": terms }), text)
        }
    }
}

fn solve_options(args: &SolveArgs) -> SolveOptions {
    SolveOptions {
        starts: args.starts.max(1),
        seed: args.seed,
        tol: args.tol,
        ..Default::default()
    }
}

#[derive(Serialize)]
struct OrbitRow {
    point: Vec<Vec<String>>,
    residual: f64,
    hits: usize,
    certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    multiplicity: Option<MultiplicityResult>,
}

#[derive(Serialize)]
struct SectorRows {
    w: Vec<usize>,
    lengths: Vec<usize>,
    converged: usize,
    diverged: usize,
    stalled: usize,
    orbits: Vec<OrbitRow>,
}

#[derive(Serialize)]
struct Candidate {
    tuple: Vec<String>,
    multiplicity: MultiplicityResult,
}

pub fn bethe_solve(
    path: &Path,
    args: &SolveArgs,
    candidate: Option<&str>,
    field: Option<&FieldJson>,
    timing: bool,
) -> Result<Output, CliError> {
    let start = Instant::now();
    let p = load_problem(path, field)?;
    let specs = select_sectors(&p, &sector_choice(&args.sector)?).map_err(failure)?;
    if let Some(c) = candidate {
        let spec = specs.first().ok_or_else(|| failure("no sector"))?;
        let coords = parse_point(c, &p.field)?;
        let (tuple, multiplicity) = certify_candidate(&p, spec, &coords, &MultOptions::default())
            .map_err(|e| failure(format!("candidate not certified: {}", e)))?;
        let text = format!(
            "certified: y = {}  multiplicity {}\n",
            tuple.join(", "),
            multiplicity.multiplicity
        );
        return output(&Candidate { tuple, multiplicity }, text);
    }
    let opts = solve_options(args);
    let target = intersection_number(&p.basic).map_err(failure)? as usize;
    let mut rows = Vec::new();
    let mut text = String::new();
    for spec in &specs {
        let data = MasterData::from_basic(&p.basic, spec).map_err(failure)?.to_complex();
        let out = solve_critical(&data, &opts);
        let system = clear_denominators(&data);
        let _ = writeln!(
            text,
            "sector w = {:?}  lengths {:?}  converged {}  diverged {}  stalled {}",
            spec.w, spec.lengths, out.converged, out.diverged, out.stalled
        );
        let families = group_components(&out.orbits, &data.t, 1e-6);
        let mut orbits = Vec::new();
        for (k, o) in out.orbits.iter().enumerate() {
            let in_family = families.iter().any(|g| g.members.len() > 1 && g.members.contains(&k));
            let mult_opts = MultOptions {
                tol: 1e-6,
                point_tol: 1e-6,
                slices: usize::from(in_family),
                max_order: MultOptions::default().max_order.min(target + 1),
            };
            let y = wronski_core::bethe::gamma(&o.point);
            let certified = certify_divisibility(&y, &data.t, 1e-8).is_ok();
            let flat: Vec<Complex64> = o.point.iter().flatten().copied().collect();
            let multiplicity = sliced_multiplicity(&system, &flat, &mult_opts, opts.seed).ok();
            let point: Vec<Vec<String>> =
                o.point.iter().map(|l| l.iter().map(|z| format_complex(*z)).collect()).collect();
            let _ = writeln!(
                text,
                "  {:<50} residual {:.2e}  mult {}  {}",
                format!("{:?}", point),
                o.residual,
                multiplicity.as_ref().map_or("?".to_string(), |m| m.multiplicity.to_string()),
                if certified { "certified" } else { "UNCERTIFIED" }
            );
            orbits.push(OrbitRow {
                point,
                residual: o.residual,
                hits: o.hits,
                certified,
                multiplicity,
            });
        }
        rows.push(SectorRows {
            w: spec.w.clone(),
            lengths: spec.lengths.clone(),
            converged: out.converged,
            diverged: out.diverged,
            stalled: out.stalled,
            orbits,
        });
    }
    let mut json = serde_json::json!({ "sectors": rows });
    if timing {
        json["timing_ms"] = (start.elapsed().as_millis() as u64).into();
    }
    output(&json, text)
}

pub fn mult(
    path: &Path,
    point: &str,
    mode: &str,
    slice: bool,
    max_order: usize,
    field: Option<&FieldJson>,
) -> Result<Output, CliError> {
    let (fs, system) = parse_system(&read(path)?, field)?;
    let coords = parse_point(point, &fs)?;
    let opts = MultOptions {
        max_order,
        ..Default::default()
    };
    let result: Result<MultiplicityResult, MultError> = if mode == "numeric" {
        let sys = system.map(|c| c.to_c64());
        let p: Vec<Complex64> = coords.iter().map(|c| c.to_c64()).collect();
        if slice {
            sliced_multiplicity(&sys, &p, &opts, 0)
        } else {
            local_multiplicity(&sys, &p, &opts)
        }
    } else if slice {
        sliced_multiplicity(&system, &coords, &opts, 0)
    } else {
        local_multiplicity(&system, &coords, &opts)
    };
    let r = result.map_err(failure)?;
    let text = format!(
        "multiplicity {}  (dual space dimensions {:?}, order {}, {} slices)\n",
        r.multiplicity, r.trace, r.order, r.slices
    );
    output(&r, text)
}

#[derive(Serialize)]
struct WronskianRow {
    i: usize,
    kappa: String,
    #[serde(rename = "K")]
    k: String,
    y: String,
    wronskian: String,
}

#[derive(Serialize)]
struct ExponentRow {
    point: String,
    measured: Vec<Vec<usize>>,
    predicted: Vec<usize>,
    agrees: bool,
    ram: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct ReproduceReport {
    field: String,
    fertile: bool,
    basis: Vec<String>,
    cascades: Vec<Vec<(usize, i64)>>,
    wronskians: Vec<WronskianRow>,
    q: Vec<String>,
    exponents: Vec<ExponentRow>,
}

pub fn reproduce(path: &Path, field: Option<&FieldJson>) -> Result<Output, CliError> {
    let (fs, tuple) = parse_tuple(&read(path)?, field)?;
    let space = build_space(&tuple).map_err(failure)?;
    let n = tuple.n();
    let d = space.basis.iter().map(|p| p.deg()).max().unwrap_or(0);
    let wronskians = (1..=n + 1)
        .map(|i| WronskianRow {
            i,
            kappa: space.kappa[i].to_string(),
            k: space.k[i].to_string(),
            y: tuple.y_ext(i).to_string(),
            wronskian: wronskian(&space.basis[..i]).to_string(),
        })
        .collect();
    let q = (1..=n)
        .map(|i| q_witness(&space, i).map(|p| p.to_string()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(failure)?;
    let mut exponents: Vec<ExponentRow> = space
        .finite
        .iter()
        .map(|t| {
            let top = wronski_core::ramification::ExponentSet(t.measured.last().cloned().unwrap_or_default());
            ExponentRow {
                point: t.point.as_ref().map(|z| z.to_string()).unwrap_or_default(),
                measured: t.measured.clone(),
                predicted: t.predicted.clone(),
                agrees: t.agrees(),
                ram: ram_from_exponents(&top, d, Place::Finite).ok().map(|a| a.entries().to_vec()),
            }
        })
        .collect();
    let inf = &space.infinity;
    let top = wronski_core::ramification::ExponentSet(inf.measured.last().cloned().unwrap_or_default());
    exponents.push(ExponentRow {
        point: "infinity".into(),
        measured: inf.measured.clone(),
        predicted: inf.predicted.clone(),
        agrees: inf.agrees(),
        ram: ram_from_exponents(&top, d, Place::Infinity).ok().map(|a| a.entries().to_vec()),
    });
    let report = ReproduceReport {
        field: fs.describe(),
        fertile: true,
        basis: strings(&space.basis),
        cascades: space.cascades.clone(),
        wronskians,
        q,
        exponents,
    };
    let mut text = String::new();
    for (i, u) in report.basis.iter().enumerate() {
        let _ = writeln!(text, "u_{} = {}", i + 1, u);
    }
    for w in &report.wronskians {
        let _ = writeln!(text, "Wr(u_1..u_{}) = {} * ({}) * ({})", w.i, w.kappa, w.k, w.y);
    }
    for e in &report.exponents {
        let _ = writeln!(
            text,
            "{:<12} exponents {:?}  predicted {:?}  {}",
            e.point,
            e.measured.last().cloned().unwrap_or_default(),
            e.predicted,
            if e.agrees { "ok" } else { "MISMATCH" }
        );
    }
    output(&report, text)
}

#[derive(Serialize)]
struct WronskianSolveReport {
    solvable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    particular: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    homogeneous: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cancellation: Option<bool>,
}

fn field_spec(field: Option<&FieldJson>) -> Result<FieldSpec, CliError> {
    Ok(field.cloned().unwrap_or_default().build()?)
}

pub fn wronskian_solve(y: &str, t: &str, field: Option<&FieldJson>) -> Result<Output, CliError> {
    let fs = field_spec(field)?;
    let parse = |s: &str| -> Result<ExtPoly, CliError> {
        parse_poly(s, &fs).map_err(|e| CliError::new(EXIT_PARSE, format!("cannot parse '{}': {}", s, e)))
    };
    let (y, t) = (parse(y)?, parse(t)?);
    let ok = solvable(&y, &t).map_err(failure)?;
    let report = if ok {
        let s = solve(&y, &t).map_err(failure)?;
        WronskianSolveReport {
            solvable: true,
            family: Some(format!("{} + c*({})", paren(&s.particular), s.homogeneous)),
            particular: Some(s.particular.to_string()),
            homogeneous: Some(s.homogeneous.to_string()),
            cancellation: Some(s.cancellation),
        }
    } else {
        WronskianSolveReport {
            solvable: false,
            particular: None,
            homogeneous: None,
            family: None,
            cancellation: None,
        }
    };
    let text = match &report.family {
        Some(f) => format!("u = {}\n", f),
        None => "no polynomial solution\n".to_string(),
    };
    output(&report, text)
}

fn paren(p: &ExtPoly) -> String {
    let s = p.to_string();
    if s.contains(' ') {
        format!("({})", s)
    } else {
        s
    }
}

#[derive(Serialize)]
struct FromMasterReport {
    problem: BasicJson,
    sector: SectorSpec,
}

pub fn from_master(path: &Path, field: Option<&FieldJson>) -> Result<Output, CliError> {
    let p = load_problem(path, field)?;
    let Some((_, sector)) = &p.master else {
        return Err(CliError::new(EXIT_PARSE, "expected master-function data (with \"l\")"));
    };
    let fj = match &p.source {
        ProblemJson::Master(m) => m.field.clone(),
        ProblemJson::Basic(_) => None,
    };
    let report = FromMasterReport {
        problem: basic_to_json(&p.basic, fj.or_else(|| field.cloned())),
        sector: sector.clone(),
    };
    let b = &p.basic;
    let mut text = format!("d = {}  N = {}\n", b.d, b.n);
    for (z, a) in b.points.iter().zip(&b.ram) {
        let _ = writeln!(text, "  a({}) = {}", z, a);
    }
    let _ = writeln!(text, "  a(infinity) = {}", b.infinity);
    let _ = writeln!(text, "sector w = {:?}  labels {:?}  lengths {:?}", sector.w, sector.c, sector.lengths);
    output(&report, text)
}

pub fn verify(
    path: &Path,
    args: &SolveArgs,
    build_space: bool,
    field: Option<&FieldJson>,
    timing: bool,
) -> Result<Output, CliError> {
    let p = load_problem(path, field)?;
    let opts = VerifyOptions {
        solve: solve_options(args),
        sector: sector_choice(&args.sector)?,
        build_space,
        timing,
        ..Default::default()
    };
    let report = run_verify(&p, &opts).map_err(|e| match e {
        wronski_core::verify::VerifyError::Schubert(s) => CliError::new(EXIT_DIMENSION, s.to_string()),
        other => failure(other),
    })?;
    let mut text = format!("target {}  field {}\n", report.target, report.field);
    for s in &report.sectors {
        let _ = writeln!(
            text,
            "sector w = {:?}  lengths {:?}  orbits {}  sum {}  {}",
            s.w, s.lengths, s.orbits, s.multiplicity_sum, s.verdict
        );
        for c in &s.components {
            let point = c.exact.as_ref().unwrap_or(&c.representative);
            let _ = writeln!(
                text,
                "  {:<40} y = {:<30} mult {}  {:?}{}",
                format!("{:?}", point),
                c.tuple.join(", "),
                c.multiplicity.as_ref().map_or("?".to_string(), |m| m.multiplicity.to_string()),
                c.status,
                if c.exact_certificate { " (exact)" } else { "" }
            );
            if let Some(sp) = &c.space {
                let _ = writeln!(text, "    V = span{{{}}}", sp.basis.join(", "));
            }
        }
    }
    for w in &report.warnings {
        let _ = writeln!(text, "warning: {}", w);
    }
    if let Some(ms) = report.timing_ms {
        let _ = writeln!(text, "time {} ms", ms);
    }
    let _ = writeln!(text, "{}", report.verdict);
    let code = match report.verdict {
        Verdict::Match => 0,
        Verdict::Undercount => EXIT_UNDERCOUNT,
        Verdict::Overcount => EXIT_OVERCOUNT,
    };
    let mut out = output(&report, text)?;
    out.code = code;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse_or_exit_64() {
        assert!(field_flag("rational").is_ok());
        assert!(field_flag("extension:x^2 - 3").is_ok());
        assert_eq!(field_flag("quaternion").unwrap_err().code, EXIT_USAGE);
        assert_eq!(sector_choice("2,1").unwrap(), SectorChoice::Explicit(vec![2, 1]));
        assert_eq!(sector_choice("w").unwrap(), SectorChoice::Smallest);
        assert_eq!(sector_choice("sideways").unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn dimension_errors_map_to_3() {
        let broken = r#"{"d":3,"N":1,"points":[{"z":"0","ram":[1,0]}],"infinity":{"ram":[1,0]}}"#;
        let e: CliError = Problem::parse(broken, None).unwrap_err().into();
        assert_eq!(e.code, EXIT_DIMENSION);
        let e: CliError = Problem::parse("{\"d\":", None).unwrap_err().into();
        assert_eq!(e.code, EXIT_PARSE);
    }
}
