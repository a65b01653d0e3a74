//! `epilip`: certify, verify and sweep local epigraph representations.
//!
//! Exit codes: 0 success, 1 input error, 2 degenerate point, 3 lemma-check or
//! monotonicity failure, 4 verification seed reused.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use epilip::catalog;
use epilip::epirep::{certify, CertifyFailure, Chart, EpigraphCertificate};
use epilip::signed_distance::check_theorem2;
use epilip::space::dot;
use epilip::verify::{run_suite, SuiteOptions, VerifyError};
use epilip::{NormedSpace, NumericConfig, ProblemInstance};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "epilip", version, about = "Local epigraph certificates for level sets of Lipschitz functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and self-check an epigraph certificate at a boundary point.
    Certify {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Re-run the lemma suite on a certificate with a fresh seed.
    Verify {
        #[command(flatten)]
        target: OptionalTarget,
        #[arg(long)]
        certificate: PathBuf,
        /// Also run the signed-distance nondegeneracy check (informational).
        #[arg(long)]
        theorem2: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Test nondegeneracy of the signed distance function at a boundary point.
    Theorem2 {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Certify the Rockafellar truncations at 0 and tabulate the constants.
    SweepRockafellar {
        /// Comma-separated truncation dimensions, e.g. "1,2,4,8".
        #[arg(long)]
        d_list: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// List the built-in instances.
    ListCatalog {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Target {
    /// Instance file (JSON).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Built-in instance id.
    #[arg(long)]
    catalog: Option<String>,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct OptionalTarget {
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    catalog: Option<String>,
}

#[derive(Args)]
struct PointArgs {
    /// Comma-separated coordinates of the boundary point.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Index into the instance's declared boundary points.
    #[arg(long, conflicts_with = "point")]
    boundary_index: Option<usize>,
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

/// A failed command: exit code plus a machine-readable error object.
struct Failure {
    code: u8,
    body: Value,
}

impl Failure {
    fn input(msg: impl ToString) -> Self {
        Self { code: 1, body: json!({ "error": "input", "message": msg.to_string() }) }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Certify { target, point, out } => cmd_certify(&target, &point, &out),
        Command::Verify { target, certificate, theorem2, out } => cmd_verify(&target, &certificate, theorem2, &out),
        Command::Theorem2 { target, point, out } => cmd_theorem2(&target, &point, &out),
        Command::SweepRockafellar { d_list, seed, out, format } => cmd_sweep(&d_list, seed, out.as_deref(), format),
        Command::ListCatalog { format } => cmd_list(format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.body);
            ExitCode::from(f.code)
        }
    }
}

fn load_instance(instance: Option<&Path>, catalog_id: Option<&str>) -> Result<ProblemInstance, Failure> {
    match (instance, catalog_id) {
        (Some(p), _) => ProblemInstance::from_path(p).map_err(Failure::input),
        (None, Some(id)) => catalog::load(id).map(|e| e.instance).map_err(Failure::input),
        (None, None) => Err(Failure::input("one of --instance or --catalog is required")),
    }
}

fn resolve_point(inst: &ProblemInstance, p: &PointArgs) -> Result<Vec<f64>, Failure> {
    let x = match (&p.point, p.boundary_index) {
        (Some(s), _) => parse_list::<f64>(s, "--point")?,
        (None, Some(i)) => inst
            .boundary_points
            .get(i)
            .map(|b| b.0.clone())
            .ok_or_else(|| Failure::input(format!("boundary index {i} out of range ({} declared)", inst.boundary_points.len())))?,
        (None, None) => return Err(Failure::input("a --point or --boundary-index is required")),
    };
    if x.len() != inst.space.dim {
        return Err(Failure::input(format!("point has dimension {}, instance has {}", x.len(), inst.space.dim)));
    }
    Ok(x)
}

fn parse_list<T: std::str::FromStr>(s: &str, flag: &str) -> Result<Vec<T>, Failure> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if items.is_empty() {
        return Err(Failure::input(format!("{flag} is empty")));
    }
    items.iter().map(|t| t.parse::<T>().map_err(|_| Failure::input(format!("{flag}: cannot parse `{t}`")))).collect()
}

fn config_for(inst: &ProblemInstance, seed: Option<u64>) -> NumericConfig {
    let cfg = inst.effective_config(&NumericConfig::default());
    match seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    }
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn certify_failure(f: CertifyFailure) -> Failure {
    let stage = f.stage();
    let message = f.to_string();
    match f {
        CertifyFailure::DegeneratePoint { min_norm_value, reason } => Failure {
            code: 2,
            body: json!({ "error": stage, "message": message, "min_norm_value": min_norm_value, "reason": reason }),
        },
        CertifyFailure::RadiusUnderflow { floor } => {
            Failure { code: 2, body: json!({ "error": stage, "message": message, "floor": floor }) }
        }
        CertifyFailure::LemmaCheckFailure { lemma, margin, certificate } => Failure {
            code: 3,
            body: json!({ "error": stage, "message": message, "lemma": lemma, "margin": margin, "lemma_report": certificate.lemma_report }),
        },
        CertifyFailure::BracketViolation { point, f_lower, f_upper } => Failure {
            code: 3,
            body: json!({ "error": stage, "message": message, "point": point, "f_lower": f_lower, "f_upper": f_upper }),
        },
        CertifyFailure::Config(_) | CertifyFailure::Oracle(_) | CertifyFailure::NotOnBoundary(_) => {
            Failure { code: 1, body: json!({ "error": stage, "message": message }) }
        }
    }
}

fn cmd_certify(target: &Target, point: &PointArgs, out: &Output) -> CmdResult {
    let inst = load_instance(target.instance.as_deref(), target.catalog.as_deref())?;
    let x = resolve_point(&inst, point)?;
    let cfg = config_for(&inst, out.seed);
    let cert = certify(&inst, &x, &cfg).map_err(certify_failure)?;
    let text = match out.format {
        Format::Json => cert.to_json(),
        Format::Csv => lambda_slice_csv(&inst, &cert, &cfg)?,
        Format::Table => certificate_table(&cert),
    };
    emit(out.out.as_deref(), &text)
}

fn certificate_table(cert: &EpigraphCertificate) -> String {
    let w = &cert.witness;
    let mut s = String::new();
    let _ = writeln!(s, "instance           {}", cert.instance);
    let _ = writeln!(s, "x                  {:?}", w.x.0);
    let _ = writeln!(s, "v                  {:?}", w.v.coords());
    for (name, value) in [
        ("alpha", w.alpha),
        ("r", w.r),
        ("k", w.k),
        ("epsilon", w.epsilon),
        ("lipschitz_bound", cert.lipschitz_bound),
        ("measured_lipschitz", cert.measured_lipschitz),
    ] {
        let _ = writeln!(s, "{name:<18} {value:.9}");
    }
    let _ = writeln!(s);
    let _ = write!(s, "{}", cert.lemma_report);
    s
}

/// `λ` on a 21×21 grid of the plane through `x` spanned by one direction of
/// `ker φ` and either a second such direction or `v` (in two dimensions).
fn lambda_slice_csv(inst: &ProblemInstance, cert: &EpigraphCertificate, cfg: &NumericConfig) -> Result<String, Failure> {
    let w = &cert.witness;
    let phi = cert.phi();
    let chart = Chart { f: inst.f.as_ref(), space: &inst.space, witness: w, phi: &phi, tol_bisect: cfg.tol_bisect };
    let kernel = kernel_directions(&inst.space, &cert.phi_weights, w.v.coords());
    let (u1, u2, range2) = match kernel.as_slice() {
        [a, b, ..] => (a.clone(), b.clone(), 0.45 * w.epsilon),
        [a] => (a.clone(), w.v.coords().to_vec(), 0.25 * w.r),
        [] => return Err(Failure::input("a plot slice needs dimension at least 2")),
    };
    let range1 = 0.45 * w.epsilon;
    let n = 21;
    let mut s = String::from("s1,s2,");
    for i in 0..inst.space.dim {
        let _ = write!(s, "y{},", i + 1);
    }
    s.push_str("lambda\n");
    for i in 0..n {
        for j in 0..n {
            let s1 = range1 * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
            let s2 = range2 * (2.0 * j as f64 / (n - 1) as f64 - 1.0);
            let y: Vec<f64> = (0..inst.space.dim).map(|c| w.x[c] + s1 * u1[c] + s2 * u2[c]).collect();
            let l = chart.lambda(&y).map_err(|e| Failure { code: 3, body: json!({ "error": "lambda", "message": e.to_string() }) })?;
            let _ = write!(s, "{s1},{s2},");
            for c in &y {
                let _ = write!(s, "{c},");
            }
            let _ = writeln!(s, "{l}");
        }
    }
    Ok(s)
}

/// Unit-norm projections `π(e_i)` of the coordinate axes onto `ker φ`, keeping
/// only those linearly independent of the ones already chosen.
fn kernel_directions(space: &NormedSpace, phi: &[f64], v: &[f64]) -> Vec<Vec<f64>> {
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for i in 0..space.dim {
        let e = space.basis(i);
        let p: Vec<f64> = e.iter().zip(v).map(|(a, b)| a - phi[i] * b).collect();
        let mut g = p.clone();
        for q in &ortho {
            let c = dot(&g, q);
            g.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        let gn = dot(&g, &g).sqrt();
        if gn < 1e-8 {
            continue;
        }
        ortho.push(g.iter().map(|a| a / gn).collect());
        if let Some(u) = space.normalize(&p) {
            chosen.push(u);
        }
        if chosen.len() == 2 {
            break;
        }
    }
    chosen
}

fn cmd_verify(target: &OptionalTarget, certificate: &Path, theorem2: bool, out: &Output) -> CmdResult {
    let text = std::fs::read_to_string(certificate)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", certificate.display())))?;
    let cert = EpigraphCertificate::from_json(&text).map_err(|e| Failure::input(format!("invalid certificate: {e}")))?;
    let inst = match (&target.instance, &target.catalog) {
        (None, None) => load_instance(None, Some(&cert.instance))?,
        (i, c) => load_instance(i.as_deref(), c.as_deref())?,
    };
    if cert.witness.x.len() != inst.space.dim || cert.witness.v.coords().len() != inst.space.dim {
        return Err(Failure::input("certificate dimension does not match the instance"));
    }
    let cfg = config_for(&inst, Some(out.seed.unwrap_or(cert.seed.wrapping_add(1))));
    let opts = SuiteOptions { theorem2, ..SuiteOptions::default() };
    let report = run_suite(&inst, &cert, &cfg, &opts).map_err(|e| match e {
        VerifyError::SeedReuse(s) => Failure { code: 4, body: json!({ "error": "seed-reuse", "message": e.to_string(), "seed": s }) },
    })?;
    let text = match out.format {
        Format::Table => report.to_string(),
        _ => report.to_json(),
    };
    emit(out.out.as_deref(), &text)?;
    if report.overall {
        Ok(())
    } else {
        let (lemma, margin) = report.first_failure().expect("a failed report names a lemma");
        Err(Failure {
            code: 3,
            body: json!({ "error": "lemma-check-failure", "message": format!("lemma check {lemma} failed"), "lemma": lemma, "margin": margin }),
        })
    }
}

fn cmd_theorem2(target: &Target, point: &PointArgs, out: &Output) -> CmdResult {
    let inst = load_instance(target.instance.as_deref(), target.catalog.as_deref())?;
    let x = resolve_point(&inst, point)?;
    let cfg = config_for(&inst, out.seed);
    let check = check_theorem2(&inst, &x, &cfg).map_err(Failure::input)?;
    let text = match out.format {
        Format::Table => {
            let mut s = format!("nondegenerate      {}\n", check.nondegenerate);
            if let Some(w) = &check.result.witness {
                let _ = writeln!(s, "v                  {:?}", w.v.coords());
                let _ = writeln!(s, "alpha              {:.9}", w.alpha);
            }
            let _ = writeln!(s, "hull_min_norm      {:.3e}", check.result.hull.min_norm_value);
            let _ = write!(s, "probe_resolution   {:.3e}", check.probe_resolution);
            s
        }
        _ => serde_json::to_string_pretty(&check).expect("finite report"),
    };
    emit(out.out.as_deref(), &text)?;
    if check.nondegenerate {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            body: json!({ "error": "degenerate-point", "message": "signed distance has no descent direction", "min_norm_value": check.result.hull.min_norm_value }),
        })
    }
}

const SWEEP_COLUMNS: [&str; 7] = ["d", "alpha", "r", "k", "epsilon", "lipschitz_bound", "measured_lipschitz"];

fn cmd_sweep(d_list: &str, seed: Option<u64>, out: Option<&Path>, format: Format) -> CmdResult {
    let mut ds = parse_list::<usize>(d_list, "--d-list")?;
    if ds.contains(&0) {
        return Err(Failure::input("--d-list entries must be at least 1"));
    }
    ds.sort_unstable();
    if ds.windows(2).any(|p| p[0] == p[1]) {
        return Err(Failure::input("--d-list has duplicate entries"));
    }
    let cfg = NumericConfig::default().with_seed(seed.unwrap_or(NumericConfig::default().rng_seed));
    let mut rows: Vec<[f64; 7]> = Vec::with_capacity(ds.len());
    for &d in &ds {
        let e = catalog::rockafellar_truncation(d);
        let cert = certify(&e.instance, &vec![0.0; d + 1], &cfg).map_err(certify_failure)?;
        let w = &cert.witness;
        rows.push([d as f64, w.alpha, w.r, w.k, w.epsilon, cert.lipschitz_bound, cert.measured_lipschitz]);
    }
    let text = match format {
        Format::Csv => {
            let mut s = SWEEP_COLUMNS.join(",") + "\n";
            for r in &rows {
                let _ = writeln!(s, "{},{},{},{},{},{},{}", r[0] as usize, r[1], r[2], r[3], r[4], r[5], r[6]);
            }
            s
        }
        Format::Json => {
            let arr: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut m = serde_json::Map::new();
                    m.insert("d".into(), json!(r[0] as usize));
                    for (name, value) in SWEEP_COLUMNS.iter().zip(r).skip(1) {
                        m.insert((*name).into(), json!(value));
                    }
                    Value::Object(m)
                })
                .collect();
            serde_json::to_string_pretty(&arr).expect("finite rows")
        }
        Format::Table => {
            let mut s = format!("{:>5} {:>8} {:>8} {:>12} {:>14} {:>16} {:>18}\n", "d", "alpha", "r", "k", "epsilon", "lipschitz_bound", "measured_lipschitz");
            for r in &rows {
                let _ = writeln!(s, "{:>5} {:>8.4} {:>8.4} {:>12.4} {:>14.6e} {:>16.4} {:>18.4}", r[0] as usize, r[1], r[2], r[3], r[4], r[5], r[6]);
            }
            s
        }
    };
    emit(out, &text)?;
    if let Some(p) = rows.windows(2).find(|p| !(p[1][4] < p[0][4])) {
        return Err(Failure {
            code: 3,
            body: json!({ "error": "monotonicity", "message": format!("epsilon does not decrease from d={} to d={}", p[0][0], p[1][0]) }),
        });
    }
    Ok(())
}

fn cmd_list(format: Format) -> CmdResult {
    let mut entries = Vec::new();
    for id in catalog::FIXED_IDS {
        let e = catalog::load(id).map_err(Failure::input)?;
        entries.push(json!({
            "id": id,
            "dim": e.instance.space.dim,
            "norm": e.instance.space.norm_kind,
            "function": e.instance.f.descriptor(),
            "boundary_points": e.instance.boundary_points,
            "certifiable_at": e.expected.certifiable_at,
            "degenerate_at": e.expected.degenerate_at,
        }));
    }
    entries.push(json!({
        "id": "rockafellar_<d>",
        "dim": "d + 1",
        "norm": "euclidean",
        "function": "sum_j j*xi_j^2 - t",
        "boundary_points": [["0"]],
        "certifiable_at": [["0"]],
        "degenerate_at": [],
    }));
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&entries).expect("finite"),
        _ => {
            let mut s = format!("{:<18} {:>5}  {:<10} {}\n", "id", "dim", "norm", "function");
            for e in &entries {
                let dim = match &e["dim"] {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let norm = e["norm"].as_str().unwrap_or_default();
                let _ = writeln!(s, "{:<18} {:>5}  {:<10} {}", e["id"].as_str().unwrap_or_default(), dim, norm, e["function"].as_str().unwrap_or_default());
            }
            s
        }
    };
    emit(None, &text)
}
