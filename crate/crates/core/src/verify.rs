//! End-to-end check of a problem: the Schubert intersection number against
//! the multiplicity-weighted count of certified critical points.

use std::time::Instant;

use num_traits::Zero;
use serde::Serialize;

use crate::bethe::{
    all_sectors, certify_divisibility, gamma, group_components, identity_sector, sector,
    smallest_sector, solve_critical, BetheError, MasterData, Point, SectorSpec, SolveOptions,
};
use crate::field::{rational_from_f64, Complex64, ExtElem, FieldSpec, Rational, Scalar};
use crate::multiplicity::{clear_denominators, sliced_multiplicity, MultOptions, MultiplicityResult};
use crate::poly::Poly;
use crate::problem::{basic_to_json, BasicJson, Problem, ProblemJson};
use crate::ramification::{exponents_at, exponents_at_infinity, ram_from_exponents, BasicSituation, Place};
use crate::reproduction::{build_space, theta_with, FertileTuple};
use crate::schubert::{intersection_number, SchubertError};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SectorChoice {
    /// The non-empty sector with the fewest variables.
    #[default]
    Smallest,
    Identity,
    All,
    Explicit(Vec<usize>),
}

impl SectorChoice {
    /// Parses `w`, `smallest`, `identity`, `all` or a permutation such as `2,1`.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "w" | "smallest" => Some(SectorChoice::Smallest),
            "identity" => Some(SectorChoice::Identity),
            "all" => Some(SectorChoice::All),
            _ => s
                .split(',')
                .map(|p| p.trim().parse().ok())
                .collect::<Option<Vec<usize>>>()
                .map(SectorChoice::Explicit),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub solve: SolveOptions,
    pub sector: SectorChoice,
    pub mult: MultOptions,
    /// Relative remainder bound for numeric divisibility certificates.
    pub cert_tol: f64,
    /// Projector distance below which two orbits give the same space.
    pub group_radius: f64,
    /// Run the reproduction procedure on exactly recognized tuples.
    pub build_space: bool,
    pub timing: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            solve: SolveOptions::default(),
            sector: SectorChoice::default(),
            // points on non-reduced components are only accurate to about
            // the square root of the working precision
            mult: MultOptions { tol: 1e-6, point_tol: 1e-6, ..Default::default() },
            cert_tol: 1e-8,
            group_radius: 1e-6,
            build_space: true,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Match,
    Undercount,
    Overcount,
}

impl Verdict {
    pub fn of(sum: usize, target: u64) -> Self {
        match (sum as u64).cmp(&target) {
            std::cmp::Ordering::Equal => Verdict::Match,
            std::cmp::Ordering::Less => Verdict::Undercount,
            std::cmp::Ordering::Greater => Verdict::Overcount,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Match => "MATCH",
            Verdict::Undercount => "UNDERCOUNT",
            Verdict::Overcount => "OVERCOUNT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Certified,
    Uncertified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaceRam {
    pub point: String,
    pub ram: Vec<usize>,
}

/// Reproduction run on an exactly certified tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceReport {
    pub basis: Vec<String>,
    pub ramification: Vec<PlaceRam>,
    pub infinity: Vec<usize>,
    /// Ramification of the space equals the problem's at every marked point.
    pub ramification_matches: bool,
    pub exponents_agree: bool,
    /// Wronskians of the flag give back the tuple.
    pub round_trip: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    /// Floating-point coordinates of the representative orbit, by level.
    pub representative: Vec<Vec<String>>,
    /// The same point recognized in the coefficient field, when that
    /// succeeded and the exact point is critical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<Vec<String>>>,
    /// `y_1..y_N`, exact when recognized.
    pub tuple: Vec<String>,
    pub residual: f64,
    /// Number of distinct orbits grouped into this component.
    pub orbits: usize,
    pub hits: usize,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<MultiplicityResult>,
    /// Whether the divisibility certificate was exact.
    pub exact_certificate: bool,
    pub remainder_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorReport {
    pub w: Vec<usize>,
    pub lengths: Vec<usize>,
    pub starts: usize,
    pub converged: usize,
    pub diverged: usize,
    pub stalled: usize,
    pub orbits: usize,
    pub components: Vec<ComponentReport>,
    pub multiplicity_sum: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub field: String,
    pub input: ProblemJson,
    pub problem: BasicJson,
    pub target: u64,
    pub seed: u64,
    pub sectors: Vec<SectorReport>,
    /// Sum for the reported sector; with several sectors, the first one
    /// that disagrees with the target (or the first sector).
    pub multiplicity_sum: usize,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Schubert(#[from] SchubertError),
    #[error(transparent)]
    Bethe(#[from] BetheError),
}

/// Formats a complex number, dropping parts below `1e-14` of its size.
pub fn format_complex(z: Complex64) -> String {
    let scale = z.norm().max(1.0);
    let clean = |v: f64| if v.abs() < 1e-14 * scale { 0.0 } else { v };
    let fmt = |v: f64| {
        let s = format!("{:.12}", v);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".to_string() } else { s.to_string() }
    };
    let (re, im) = (clean(z.re), clean(z.im));
    match (re == 0.0, im == 0.0) {
        (_, true) => fmt(re),
        (true, false) => format!("{}i", fmt(im)),
        (false, false) if im < 0.0 => format!("{} - {}i", fmt(re), fmt(-im)),
        _ => format!("{} + {}i", fmt(re), fmt(im)),
    }
}

fn format_cpoly(p: &Poly<Complex64>) -> String {
    let mut out = String::new();
    for (k, c) in p.coeffs().iter().enumerate().rev() {
        let s = format_complex(*c);
        if s == "0" {
            continue;
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) if !rest.contains(' ') => (true, rest.to_string()),
            _ => (false, s),
        };
        let body = if body.contains(' ') { format!("({})", body) } else { body };
        let mono = match k {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{}", k),
        };
        let term = match (body.as_str(), mono.is_empty()) {
            (_, true) => body.clone(),
            ("1", false) => mono,
            (_, false) => format!("{}*{}", body, mono),
        };
        if out.is_empty() {
            out = if neg { format!("-{}", term) } else { term };
        } else {
            out.push_str(if neg { " - " } else { " + " });
            out.push_str(&term);
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

/// Recognizes a floating-point value as an element of the field:
/// a rational, or `p + q*a` in a quadratic extension with non-real `a`.
pub fn recognize(z: Complex64, field: &FieldSpec) -> Option<ExtElem> {
    const MAX_DEN: u64 = 1000;
    const TOL: f64 = 1e-7;
    let scale = z.norm().max(1.0);
    if z.im.abs() < TOL * scale {
        if let Some(q) = rational_from_f64(z.re, MAX_DEN, TOL) {
            return Some(match field.extension() {
                Some(f) => ExtElem::new(f, vec![q]),
                None => ExtElem::rational(q),
            });
        }
    }
    let f = field.extension()?;
    let a = f.embedding();
    if f.degree() != 2 || a.im.abs() < 1e-9 {
        return None;
    }
    let q = z.im / a.im;
    let p = z.re - q * a.re;
    let q = rational_from_f64(q, MAX_DEN, TOL)?;
    let p = rational_from_f64(p, MAX_DEN, TOL)?;
    let e = ExtElem::new(f, vec![p, q]);
    ((e.to_complex() - z).norm() < 1e-6 * scale).then_some(e)
}

fn recognize_point(point: &Point<Complex64>, field: &FieldSpec) -> Option<Point<ExtElem>> {
    point
        .iter()
        .map(|level| level.iter().map(|z| recognize(*z, field)).collect())
        .collect()
}

fn space_report(
    basic: &BasicSituation<ExtElem>,
    y: &[Poly<ExtElem>],
) -> Result<SpaceReport, String> {
    let tuple = FertileTuple::from_basic(basic, y.to_vec());
    let space = build_space(&tuple).map_err(|e| e.to_string())?;
    let mut ramification = Vec::new();
    let mut matches = true;
    for (z, expected) in basic.points.iter().zip(&basic.ram) {
        let e = exponents_at(&space.basis, z).map_err(|e| e.to_string())?;
        let a = ram_from_exponents(&e, basic.d, Place::Finite).map_err(|e| e.to_string())?;
        matches &= a == *expected;
        ramification.push(PlaceRam {
            point: z.to_string(),
            ram: a.entries().to_vec(),
        });
    }
    let e = exponents_at_infinity(&space.basis).map_err(|e| e.to_string())?;
    let inf = ram_from_exponents(&e, basic.d, Place::Infinity).map_err(|e| e.to_string())?;
    matches &= inf == basic.infinity;
    let round_trip = theta_with(&space.basis, &basic.k).map(|t| t == y).unwrap_or(false);
    Ok(SpaceReport {
        basis: space.basis.iter().map(|p| p.to_string()).collect(),
        ramification,
        infinity: inf.entries().to_vec(),
        ramification_matches: matches,
        exponents_agree: space.finite.iter().all(|t| t.agrees()) && space.infinity.agrees(),
        round_trip,
    })
}

/// Exact certification of a candidate point: the residual must vanish
/// identically and the divisibility conditions hold exactly.
pub fn certify_exact(
    data: &MasterData<ExtElem>,
    point: &Point<ExtElem>,
    opts: &MultOptions,
    seed: u64,
) -> Result<MultiplicityResult, String> {
    let r = data.residual(point).map_err(|e| e.to_string())?;
    if let Some((k, v)) = r.iter().enumerate().find(|(_, v)| !v.is_zero()) {
        return Err(format!("equation {} has residual {}", k + 1, v));
    }
    let y = gamma(point);
    certify_divisibility(&y, &data.t, 0.0).map_err(|e| e.to_string())?;
    let flat: Vec<ExtElem> = point.iter().flatten().cloned().collect();
    sliced_multiplicity(&clear_denominators(data), &flat, opts, seed).map_err(|e| e.to_string())
}

fn run_sector(
    problem: &Problem,
    spec: &SectorSpec,
    target: u64,
    opts: &VerifyOptions,
    warnings: &mut Vec<String>,
) -> Result<SectorReport, VerifyError> {
    let basic = &problem.basic;
    let exact = MasterData::from_basic(basic, spec)?;
    let data = exact.to_complex();
    let t_complex: Vec<Poly<Complex64>> = basic.t.iter().map(|p| p.map(|c| c.to_c64())).collect();
    let outcome = solve_critical(&data, &opts.solve);
    let groups = group_components(&outcome.orbits, &t_complex, opts.group_radius);
    let system = clear_denominators(&data);
    let seed = opts.solve.seed;

    let mut components = Vec::with_capacity(groups.len());
    let mut min_mult = usize::MAX;
    for g in &groups {
        let orbit = &outcome.orbits[g.representative];
        let mut notes = Vec::new();
        let mut status = Status::Certified;

        let exact_point = recognize_point(&orbit.point, &problem.field).and_then(|p| {
            match certify_exact(&exact, &p, &opts.mult, seed) {
                Ok(m) => Some((p, m)),
                Err(e) => {
                    notes.push(format!("exact recognition rejected: {}", e));
                    None
                }
            }
        });

        let (tuple, exact_certificate, remainder_norm, multiplicity, space, exact_repr) =
            match exact_point {
                Some((p, m)) => {
                    let y = gamma(&p);
                    let space = if opts.build_space {
                        match space_report(basic, &y) {
                            Ok(s) => Some(s),
                            Err(e) => {
                                notes.push(format!("reproduction failed: {}", e));
                                None
                            }
                        }
                    } else {
                        None
                    };
                    let repr = p
                        .iter()
                        .map(|l| l.iter().map(|c| c.to_string()).collect())
                        .collect();
                    (
                        y.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                        true,
                        0.0,
                        Some(m),
                        space,
                        Some(repr),
                    )
                }
                None => {
                    let y = gamma(&orbit.point);
                    let norm = match certify_divisibility(&y, &data.t, opts.cert_tol) {
                        Ok(c) => c.remainder_norms.iter().cloned().fold(0.0, f64::max),
                        Err(e) => {
                            status = Status::Uncertified;
                            notes.push(e.to_string());
                            f64::NAN
                        }
                    };
                    let flat: Vec<Complex64> = orbit.point.iter().flatten().copied().collect();
                    // several orbits with one space: the points move in a family
                    let mult_opts = MultOptions {
                        slices: usize::from(g.members.len() > 1),
                        // an isolated point stabilizes by order m, and m above
                        // the target is an overcount either way
                        max_order: opts.mult.max_order.min(target as usize + 1),
                        ..opts.mult.clone()
                    };
                    let m = match sliced_multiplicity(&system, &flat, &mult_opts, seed) {
                        Ok(m) => Some(m),
                        Err(e) => {
                            status = Status::Uncertified;
                            notes.push(format!("multiplicity: {}", e));
                            None
                        }
                    };
                    (y.iter().map(format_cpoly).collect(), false, norm, m, None, None)
                }
            };
        if let Some(m) = &multiplicity {
            min_mult = min_mult.min(m.multiplicity);
        }
        components.push(ComponentReport {
            representative: orbit
                .point
                .iter()
                .map(|l| l.iter().map(|z| format_complex(*z)).collect())
                .collect(),
            exact: exact_repr,
            tuple,
            residual: orbit.residual,
            orbits: g.members.len(),
            hits: g.members.iter().map(|&k| outcome.orbits[k].hits).sum(),
            status,
            multiplicity,
            exact_certificate,
            remainder_norm,
            space,
            notes,
        });
    }

    let sum: usize = components
        .iter()
        .filter(|c| c.status == Status::Certified)
        .filter_map(|c| c.multiplicity.as_ref().map(|m| m.multiplicity))
        .sum();
    let n_orbits = outcome.orbits.len();
    if min_mult == usize::MAX || (n_orbits * min_mult) < target as usize {
        warnings.push(format!(
            "sector {:?}: {} orbits cannot reach the target {} at minimum multiplicity {}",
            spec.w,
            n_orbits,
            target,
            if min_mult == usize::MAX { 0 } else { min_mult }
        ));
    }
    Ok(SectorReport {
        w: spec.w.clone(),
        lengths: spec.lengths.clone(),
        starts: opts.solve.starts,
        converged: outcome.converged,
        diverged: outcome.diverged,
        stalled: outcome.stalled,
        orbits: n_orbits,
        components,
        multiplicity_sum: sum,
        verdict: Verdict::of(sum, target),
    })
}

/// Sectors selected by `choice`; master-data problems default to the
/// sector they were given in.
pub fn select_sectors(problem: &Problem, choice: &SectorChoice) -> Result<Vec<SectorSpec>, BetheError> {
    let basic = &problem.basic;
    Ok(match choice {
        SectorChoice::Smallest => match &problem.master {
            Some((_, s)) => vec![s.clone()],
            None => vec![smallest_sector(basic)?],
        },
        SectorChoice::Identity => vec![identity_sector(basic)?],
        SectorChoice::All => all_sectors(basic),
        SectorChoice::Explicit(w) => vec![sector(basic, w)?],
    })
}

/// Runs the whole pipeline. The report is a pure function of the problem
/// and the options (timing aside, which is only recorded on request).
pub fn run_verify(problem: &Problem, opts: &VerifyOptions) -> Result<VerifyReport, VerifyError> {
    let start = Instant::now();
    let target = intersection_number(&problem.basic)?;
    let specs = select_sectors(problem, &opts.sector)?;
    let mut warnings = Vec::new();
    let sectors = specs
        .iter()
        .map(|s| run_sector(problem, s, target, opts, &mut warnings))
        .collect::<Result<Vec<_>, _>>()?;
    let headline = sectors
        .iter()
        .find(|s| s.verdict != Verdict::Match)
        .or(sectors.first());
    let multiplicity_sum = headline.map_or(0, |s| s.multiplicity_sum);
    let field_json = problem.source.field_json().cloned();
    Ok(VerifyReport {
        field: problem.field.describe(),
        input: problem.source.clone(),
        problem: basic_to_json(&problem.basic, field_json),
        target,
        seed: opts.solve.seed,
        sectors,
        multiplicity_sum,
        verdict: Verdict::of(multiplicity_sum, target),
        warnings,
        timing_ms: opts.timing.then(|| start.elapsed().as_millis() as u64),
    })
}

/// Exactly certifies user-supplied coordinates (flattened level by level).
pub fn certify_candidate(
    problem: &Problem,
    spec: &SectorSpec,
    coords: &[ExtElem],
    opts: &MultOptions,
) -> Result<(Vec<String>, MultiplicityResult), String> {
    let data = MasterData::from_basic(&problem.basic, spec).map_err(|e| e.to_string())?;
    if coords.len() != data.num_vars() {
        return Err(format!("expected {} coordinates, got {}", data.num_vars(), coords.len()));
    }
    let point = data.unflatten(coords);
    let m = certify_exact(&data, &point, opts, 0)?;
    Ok((gamma(&point).iter().map(|p| p.to_string()).collect(), m))
}

/// Rationals with small denominators, for tests and recognition checks.
pub fn small_rational(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE: &str = r#"{"d":3,"N":1,
        "field":{"kind":"extension","minpoly":"x^2+x+1","generator":"a","named":{"w":"a"}},
        "points":[{"z":"1","ram":[1,0]},{"z":"w","ram":[1,0]},{"z":"-1-w","ram":[1,0]}],
        "infinity":{"ram":[1,0]}}"#;

    const VARIANT: &str = r#"{"d":3,"N":1,
        "points":[{"z":"0","ram":[1,0]},{"z":"1","ram":[1,0]},{"z":"-1","ram":[1,0]}],
        "infinity":{"ram":[1,0]}}"#;

    fn quick() -> VerifyOptions {
        VerifyOptions {
            solve: SolveOptions { starts: 40, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn example_matches_with_one_double_point() {
        let p = Problem::parse(EXAMPLE, None).unwrap();
        let r = run_verify(&p, &quick()).unwrap();
        assert_eq!(r.target, 2);
        assert_eq!(r.verdict, Verdict::Match);
        let s = &r.sectors[0];
        assert_eq!(s.w, vec![2, 1]);
        assert_eq!(s.components.len(), 1);
        let c = &s.components[0];
        assert_eq!(c.exact.as_ref().unwrap(), &vec![vec!["0".to_string()]]);
        assert_eq!(c.multiplicity.as_ref().unwrap().multiplicity, 2);
        let space = c.space.as_ref().unwrap();
        assert!(space.ramification_matches && space.round_trip && space.exponents_agree);
        assert_eq!(space.basis, vec!["x", "x^3 + 2"]);
    }

    #[test]
    fn rational_variant_has_two_simple_points() {
        let p = Problem::parse(VARIANT, None).unwrap();
        let r = run_verify(&p, &quick()).unwrap();
        assert_eq!(r.verdict, Verdict::Match);
        let s = &r.sectors[0];
        assert_eq!(s.components.len(), 2);
        for c in &s.components {
            assert_eq!(c.status, Status::Certified);
            assert!(c.exact.is_none());
            assert_eq!(c.multiplicity.as_ref().unwrap().multiplicity, 1);
        }
    }

    #[test]
    fn identity_sector_groups_curves() {
        let p = Problem::parse(VARIANT, None).unwrap();
        let opts = VerifyOptions {
            sector: SectorChoice::Identity,
            solve: SolveOptions { starts: 60, ..Default::default() },
            ..Default::default()
        };
        let r = run_verify(&p, &opts).unwrap();
        let s = &r.sectors[0];
        assert_eq!(s.lengths, vec![3]);
        assert_eq!(s.components.len(), 2, "{:#?}", s.components);
        assert_eq!(r.verdict, Verdict::Match, "{}", serde_json::to_string_pretty(&r).unwrap());
        assert!(s.components.iter().all(|c| c.multiplicity.as_ref().unwrap().slices == 1));
    }

    #[test]
    fn report_is_byte_stable() {
        let p = Problem::parse(VARIANT, None).unwrap();
        let a = serde_json::to_string(&run_verify(&p, &quick()).unwrap()).unwrap();
        let b = serde_json::to_string(&run_verify(&p, &quick()).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recognition() {
        let f = FieldSpec::Rational;
        assert_eq!(recognize(Complex64::new(0.5 + 1e-12, 0.0), &f).unwrap().to_string(), "1/2");
        assert!(recognize(Complex64::new(1.0 / 3f64.sqrt(), 0.0), &f).is_none());
        let p = Problem::parse(EXAMPLE, None).unwrap();
        let w = p.field.embedding().unwrap();
        let e = recognize(w * 2.0 + 1.0, &p.field).unwrap();
        assert_eq!(e.to_complex(), w * 2.0 + 1.0);
    }

    #[test]
    fn candidate_certification() {
        let p = Problem::parse(EXAMPLE, None).unwrap();
        let spec = smallest_sector(&p.basic).unwrap();
        let zero = ExtElem::rational(small_rational(0, 1));
        let (y, m) = certify_candidate(&p, &spec, &[zero], &MultOptions::default()).unwrap();
        assert_eq!(y, vec!["x"]);
        assert_eq!(m.multiplicity, 2);
        let one = ExtElem::rational(small_rational(1, 2));
        assert!(certify_candidate(&p, &spec, &[one], &MultOptions::default()).is_err());
    }

    #[test]
    fn complex_formatting() {
        assert_eq!(format_complex(Complex64::new(0.5, 1e-17)), "0.5");
        assert_eq!(format_complex(Complex64::new(-0.5, -2.0)), "-0.5 - 2i");
        assert_eq!(format_complex(Complex64::new(-1e-20, 0.0)), "0");
        let p = Poly::new(vec![Complex64::new(-0.5, 0.0), Complex64::new(0.0, 2.0), Complex64::new(1.0, 0.0)]);
        assert_eq!(format_cpoly(&p), "x^2 + 2i*x - 0.5");
    }
}
