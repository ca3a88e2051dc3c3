use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use dhg_core::darboux::{
    assemble_z3, bianchi, darboux_from_section, ds_cube_check, max_holonomy_deviation, prolong, verify_multiratio,
    CubeReport, DarbouxTransform, MultiRatioReport, Prolongation,
};
use dhg_core::holo::{induced_structure, HolomorphicStructure, Immersion};
use dhg_core::io::{
    coeff_table, curves_obj, derived_csv, read_json, samples_csv, to_json, triangles_csv, vertices_csv, write_text,
    ImmersionFile, ObjProjection, PolygonFile, SpectralReport, TransformFile,
};
use dhg_core::mesh::{
    build_regular_torus, derive, fundamental_domain, is_isomorphism, thin_torus, FundamentalDomain, LatticeBasis,
    RegularTorus,
};
use dhg_core::polygon::{hmax_degree, polygon_flow, polygon_spectral, DiscreteCurve};
use dhg_core::quatlin::{HPoint, Quaternion, C64};
use dhg_core::random::{random_immersion, random_polygon_values, rng, ValueKind};
use dhg_core::spectral::{eigen_section, lambda_branches, linear_components, spectral_data, Multiplier};
use dhg_core::suite::{run_suite, SuiteConfig};
use dhg_core::Error;

use crate::{Common, ImmersionArgs, TorusArgs};

/// Default pass/fail gate for verification reports.
const DEFAULT_TOL: f64 = 1e-8;

/// Exit code 2 for configuration problems, 3 for mathematical degeneracy.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Math(Error),
    Invariant { message: String, details: serde_json::Value },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Math(e)
    }
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Math(
                Error::InvalidInput(_)
                | Error::NonPositiveBasis
                | Error::NonRegularQuotient
                | Error::NotAdapted
                | Error::TooSmall { .. },
            ) => 2,
            Failure::Math(_) | Failure::Invariant { .. } => 3,
        }
    }

    /// One-line JSON object for stderr.
    pub fn diagnostic(&self) -> String {
        let (message, error) = match self {
            Failure::Config(m) => (m.clone(), json!({"kind": "Config"})),
            Failure::Math(e) => (e.to_string(), serde_json::to_value(e).expect("errors serialize")),
            Failure::Invariant { message, details } => (message.clone(), json!({"kind": "InvariantFailure", "details": details})),
        };
        json!({"exit_code": self.code(), "error": error, "message": message}).to_string()
    }
}

type Outcome = Result<u8, Failure>;

fn write(common: &Common, name: &str, text: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(&common.out_dir).map_err(|e| Failure::Config(format!("{}: {e}", common.out_dir.display())))?;
    let path = common.out_dir.join(name);
    write_text(&path, text)?;
    Ok(path)
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn basis_from(args: &TorusArgs) -> Result<Option<LatticeBasis>, Failure> {
    match (&args.gamma, &args.eta) {
        (Some(g), Some(e)) => Ok(Some(LatticeBasis::new([g[0], g[1]], [e[0], e[1]]))),
        (None, None) => Ok(None),
        _ => Err(Failure::Config("--gamma and --eta go together".into())),
    }
}

#[derive(Serialize)]
struct AdaptedRecord {
    direction: usize,
    gamma: [i64; 2],
    eta: [i64; 2],
    length: usize,
    thickness: usize,
}

#[derive(Serialize)]
struct MeshReport {
    basis: LatticeBasis,
    vertices: usize,
    black: usize,
    white: usize,
    adapted: Vec<AdaptedRecord>,
    valence_six: bool,
    derivation_period_three: bool,
}

pub fn mesh(common: &Common, args: &TorusArgs, thin: Option<usize>) -> Outcome {
    let torus = match (thin, basis_from(args)?) {
        (Some(n), _) => thin_torus(n)?,
        (None, Some(b)) => build_regular_torus(b)?,
        (None, None) => return Err(Failure::Config("give --gamma and --eta, or --thin".into())),
    };
    let mut incidence = vec![0usize; torus.len()];
    for t in torus.black.iter().chain(torus.white.iter()) {
        for &v in t {
            incidence[v] += 1;
        }
    }
    let d1 = derive(&torus);
    let d2 = d1.derive();
    let d3 = d2.derive();
    let map: Vec<usize> = (0..torus.len())
        .map(|v| d1.white_to_parent_vertex[d2.black_to_parent_white[d3.vertex_to_parent_black[v]]])
        .collect();
    let mut adapted = Vec::new();
    for d in 0..3 {
        let b = torus.adapted_basis(d);
        let fd = fundamental_domain(&torus, &b, 0)?;
        adapted.push(AdaptedRecord { direction: d, gamma: b.gamma, eta: b.eta, length: fd.length, thickness: fd.thickness });
    }
    let report = MeshReport {
        basis: torus.basis,
        vertices: torus.vertices.len(),
        black: torus.black.len(),
        white: torus.white.len(),
        adapted,
        valence_six: incidence.iter().all(|&c| c == 6),
        derivation_period_three: is_isomorphism(&d3.torus, &torus, &map),
    };
    write(common, "torus.json", &to_json(&torus.basis))?;
    write(common, "vertices.csv", &vertices_csv(&torus)?)?;
    write(common, "black.csv", &triangles_csv(&torus, &torus.black)?)?;
    write(common, "white.csv", &triangles_csv(&torus, &torus.white)?)?;
    write(common, "derived.csv", &derived_csv(&d1)?)?;
    let text = to_json(&report);
    write(common, "mesh_report.json", &text)?;
    print!("{text}");
    let counts = report.vertices == report.black && report.black == report.white;
    if !(counts && report.valence_six && report.derivation_period_three) {
        return Err(Failure::Invariant {
            message: "mesh invariants failed".into(),
            details: json!({"counts": counts, "valence_six": report.valence_six, "derivation_period_three": report.derivation_period_three}),
        });
    }
    Ok(0)
}

struct Surface {
    torus: RegularTorus,
    f: Immersion,
    hs: HolomorphicStructure,
}

/// The immersion from `--input`, or a seeded random one written to `immersion.json`.
fn load_surface(common: &Common, args: &ImmersionArgs) -> Result<Surface, Failure> {
    let flags = basis_from(&args.torus)?;
    let (torus, f) = match &args.input {
        Some(path) => {
            let file: ImmersionFile = read_json(path)?;
            let basis = match (file.torus(), flags) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Failure::Config(format!("torus in {} differs from the flags", path.display())))
                }
                (Some(a), _) => a,
                (None, Some(b)) => b,
                (None, None) => return Err(Failure::Config("immersion file has no torus; give --gamma and --eta".into())),
            };
            (build_regular_torus(basis)?, file.immersion()?)
        }
        None => {
            let torus = build_regular_torus(flags.unwrap_or(LatticeBasis::new([3, 0], [0, 3])))?;
            let kind = if args.complex { ValueKind::Complex } else { ValueKind::Quaternionic };
            let f = random_immersion(&torus, &mut rng(common.seed), kind);
            write(common, "immersion.json", &to_json(&ImmersionFile::new(&torus, &f)))?;
            (torus, f)
        }
    };
    if f.len() != torus.len() {
        return Err(Failure::Config(format!("{} values for a torus with {} vertices", f.len(), torus.len())));
    }
    let hs = induced_structure(&torus, &f)?;
    Ok(Surface { torus, f, hs })
}

pub fn spectrum(common: &Common, args: &ImmersionArgs, samples: usize) -> Outcome {
    let s = load_surface(common, args)?;
    let data = spectral_data(&s.hs, &s.torus, samples)?;
    let report = SpectralReport::new(&data, &linear_components(&data.poly));
    write(common, "spectrum.json", &to_json(&report))?;
    write(common, "samples.csv", &samples_csv(&data.samples)?)?;
    let summary = json!({
        "generic": report.generic,
        "end_count": report.end_count,
        "splits": report.splits,
        "lambda_lines": report.lambda_lines,
    });
    println!("{summary}");
    Ok(0)
}

#[derive(Serialize)]
struct DarbouxReport {
    mu: [f64; 2],
    lambda: [f64; 2],
    constant_prolongation: bool,
    prolongation_residual: f64,
    #[serde(flatten)]
    verification: MultiRatioReport,
    holonomy_deviation: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct BianchiReport {
    chi_deviation: f64,
    monodromy_deviation: f64,
    against_first: MultiRatioReport,
    against_second: MultiRatioReport,
    cube: CubeReport,
    tolerance: f64,
    passed: bool,
}

fn prolongation(s: &Surface, fd: &FundamentalDomain, mu: C64, lambda: Option<C64>, branch: usize) -> Result<Prolongation, Failure> {
    let lambda = match lambda {
        Some(l) => l,
        None => *lambda_branches(&s.hs, fd, mu)
            .get(branch)
            .ok_or_else(|| Failure::Config(format!("branch {branch} out of range")))?,
    };
    let section = eigen_section(&s.hs, fd, Multiplier::new(mu, lambda))?;
    Ok(prolong(&section, &s.hs, &s.f)?)
}

fn spread(p: &Prolongation) -> f64 {
    let first = p.values[0];
    let scale = p.values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    p.values.iter().map(|v| (*v - first).norm()).fold(0.0, f64::max) / scale
}

/// Transform as an immersion on the same torus; black `b` of `M` is vertex `b`.
fn transform_report(s: &Surface, p: &Prolongation, ft: &DarbouxTransform, tol: f64) -> Result<DarbouxReport, Failure> {
    let verification = verify_multiratio(&s.torus, &s.f, ft)?;
    let (holonomy_deviation, _) = max_holonomy_deviation(&s.torus, &s.f, ft)?;
    let passed = verification.max_multiratio_dev <= tol && verification.regularity_violations.is_empty();
    Ok(DarbouxReport {
        mu: pair(p.multiplier.mu),
        lambda: pair(p.multiplier.lambda),
        constant_prolongation: spread(p) < 1e-8,
        prolongation_residual: p.max_residual,
        verification,
        holonomy_deviation,
        tolerance: tol,
        passed,
    })
}

pub fn darboux(common: &Common, args: &ImmersionArgs, first: (C64, Option<C64>, usize), second: Option<(C64, Option<C64>, usize)>) -> Outcome {
    let s = load_surface(common, args)?;
    let fd = fundamental_domain(&s.torus, &s.torus.adapted_basis(0), 0)?;
    let tol = common.tol.unwrap_or(DEFAULT_TOL);
    let p = prolongation(&s, &fd, first.0, first.1, first.2)?;
    let ft = darboux_from_section(&p, &s.f)?;
    let report = transform_report(&s, &p, &ft, tol)?;
    if report.constant_prolongation {
        eprintln!("warning: the prolongation is constant; the section lies in the linear system and the transform is a point");
    }
    write(common, "darboux_transform.json", &to_json(&TransformFile::new(&s.torus, &ft)))?;
    write(common, "darboux_report.json", &to_json(&report))?;
    println!("{}", json!({"max_multiratio_dev": report.verification.max_multiratio_dev, "passed": report.passed}));
    if !report.passed {
        return Err(Failure::Invariant {
            message: "transform fails the multi-ratio condition".into(),
            details: json!({"worst_white_triangle": report.verification.worst_white_triangle, "max_multiratio_dev": report.verification.max_multiratio_dev}),
        });
    }
    let Some((mu2, lambda2, branch2)) = second else {
        return Ok(0);
    };
    let p2 = prolongation(&s, &fd, mu2, lambda2, branch2)?;
    let ft2 = darboux_from_section(&p2, &s.f)?;
    let bt = bianchi(&s.torus, &p, &p2)?;
    let against_first = verify_multiratio(&s.torus, &ft.as_immersion(), &bt.transform)?;
    let against_second = verify_multiratio(&s.torus, &ft2.as_immersion(), &bt.transform)?;
    let levels: [&[HPoint]; 3] = [&s.f.points, &ft.points, &bt.transform.points];
    let cube = ds_cube_check(&assemble_z3(&s.torus, &levels, [5, 5, 5], 5)?)?;
    let passed = against_first.max_multiratio_dev.max(against_second.max_multiratio_dev) <= tol
        && bt.chi_deviation <= tol
        && cube.max_deviation <= tol.max(1e-7);
    let report = BianchiReport {
        chi_deviation: bt.chi_deviation,
        monodromy_deviation: bt.monodromy_deviation,
        against_first,
        against_second,
        cube,
        tolerance: tol,
        passed,
    };
    write(common, "bianchi_transform.json", &to_json(&TransformFile::new(&s.torus, &bt.transform)))?;
    write(common, "bianchi_report.json", &to_json(&report))?;
    println!("{}", json!({"chi_deviation": report.chi_deviation, "cube_deviation": report.cube.max_deviation, "passed": passed}));
    if !passed {
        return Err(Failure::Invariant {
            message: "Bianchi transform fails verification".into(),
            details: json!({"worst_white_triangle": [report.against_first.worst_white_triangle, report.against_second.worst_white_triangle]}),
        });
    }
    Ok(0)
}

pub enum PolygonSource {
    File(PathBuf),
    Regular(usize),
    Random(usize, ValueKind),
    Missing,
}

impl PolygonSource {
    pub fn new(input: Option<PathBuf>, regular: Option<usize>, random: Option<usize>, complex: bool) -> Self {
        match (input, regular, random) {
            (Some(p), _, _) => PolygonSource::File(p),
            (_, Some(n), _) => PolygonSource::Regular(n),
            (_, _, Some(n)) => PolygonSource::Random(n, if complex { ValueKind::Complex } else { ValueKind::Quaternionic }),
            _ => PolygonSource::Missing,
        }
    }

    fn curve(&self, seed: u64) -> Result<DiscreteCurve, Failure> {
        match self {
            PolygonSource::File(path) => Ok(read_json::<PolygonFile>(path)?.curve()?),
            PolygonSource::Regular(n) => {
                let values: Vec<Quaternion> = (0..*n)
                    .map(|k| Quaternion::from_complex(C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / *n as f64)))
                    .collect();
                Ok(DiscreteCurve::from_affine(&values, true)?)
            }
            PolygonSource::Random(n, kind) => Ok(DiscreteCurve::new(random_polygon_values(*n, &mut rng(seed), *kind), true)?),
            PolygonSource::Missing => Err(Failure::Config("give --input, --regular or --random".into())),
        }
    }
}

#[derive(Serialize)]
struct FlowReport {
    lambda: [f64; 2],
    index: usize,
    steps: usize,
    closed_at_every_step: bool,
}

#[derive(Serialize)]
struct PolygonReport {
    n: usize,
    /// `coeffs[j][k]` multiplies `mu^j lambda^k` in `det(mu - H(lambda))`.
    coeffs: Vec<Vec<[f64; 2]>>,
    simple_eigenvalues: bool,
    h0_kernel_residual: f64,
    hmax_degree: usize,
    hmax_nilpotent: bool,
    hmax_condition: f64,
    splits: bool,
    conjugate_deviation: Option<f64>,
    flow: Option<FlowReport>,
}

pub fn polygon(common: &Common, source: &PolygonSource, lambda: C64, steps: usize, index: usize, axis: Quaternion) -> Outcome {
    let curve = source.curve(common.seed)?;
    if !curve.closed {
        return Err(Failure::Config("the polygon must be closed".into()));
    }
    let sp = polygon_spectral(&curve)?;
    let curves = if steps > 0 { polygon_flow(&curve, lambda, steps, index)? } else { vec![curve.clone()] };
    let flow = (steps > 0).then(|| FlowReport {
        lambda: pair(lambda),
        index,
        steps: curves.len() - 1,
        closed_at_every_step: curves.iter().all(|c| c.closed && c.len() == curve.len()),
    });
    let report = PolygonReport {
        n: curve.len(),
        coeffs: coeff_table(&sp.poly),
        simple_eigenvalues: sp.simple_eigenvalues,
        h0_kernel_residual: sp.h0_kernel_residual,
        hmax_degree: hmax_degree(curve.len()),
        hmax_nilpotent: sp.hmax_nilpotent,
        hmax_condition: sp.hmax_condition,
        splits: sp.splits.is_some(),
        conjugate_deviation: sp.splits.as_ref().map(|s| s.conjugate_deviation),
        flow,
    };
    write(common, "polygon.json", &to_json(&PolygonFile::new(&curve)))?;
    write(common, "polygon_report.json", &to_json(&report))?;
    write(common, "flow.obj", &curves_obj(&curves, &ObjProjection { axis })?)?;
    println!(
        "{}",
        json!({"n": report.n, "simple_eigenvalues": report.simple_eigenvalues, "hmax_nilpotent": report.hmax_nilpotent, "steps": curves.len() - 1})
    );
    Ok(0)
}

pub fn verify(common: &Common, criteria: Vec<String>) -> Outcome {
    let cfg = SuiteConfig { seed: common.seed, tol: common.tol, criteria };
    let report = run_suite(&cfg).map_err(Failure::Config)?;
    for r in &report.results {
        println!("{}", r.summary());
    }
    write(common, "verify_report.json", &to_json(&report))?;
    if report.passed {
        Ok(0)
    } else {
        eprintln!("{}", json!({"exit_code": 1, "failed": report.failed()}));
        Ok(1)
    }
}
