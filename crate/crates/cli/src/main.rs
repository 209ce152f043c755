//! `roundsphere` — command-line front end.
//!
//! Reads versioned JSON artifacts, runs one pipeline per invocation and writes
//! a JSON artifact (or CSV) to `--out` or standard output.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 invalid input or flags,
//! 3 solver non-convergence (diagnostics JSON on standard error).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::Vector3;
use roundsphere::gcmgeom::{angular_momentum, gcm_leading_solve, hawking_mass, kerr_model_sphere, KerrProfile};
use roundsphere::io::{
    field_to_csv, from_json_str, provenance_tag, to_json_string, AngmomDoc, CalibrationJson, CenteringDoc, CompareDoc,
    FieldDoc, FieldJson, GcmInputDoc, GcmSolutionDoc, MapDoc, MetricDoc, MetricJson, ModeFieldsJson, ModesDoc,
    OneFormJson, ResultDoc, SphereDataDoc, SCHEMA_VERSION,
};
use roundsphere::modes::{canonical_modes, curvature_mode_cancellation, gram, laplacian_defect, project_ell1};
use roundsphere::moebius::conformal_factor_compose;
use roundsphere::s2field::{analyze, integrate, make_grid, resample, ConformalMetric, ScalarField};
use roundsphere::selftest::{run_all, run_criterion, SelftestConfig, CRITERIA};
use roundsphere::stability::{calibrated_report, compare_report, CalibrationFrame, SphereMap};
use roundsphere::uniformize::{center, uniformize};
use roundsphere::{Error, GcmInput, SphereData, Tolerances};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "roundsphere", version, about = "Effective uniformization of nearly round spheres")]
struct Cli {
    /// Band limit override: inputs are resampled to this band limit
    /// (default for generated data and the self-test: 64).
    #[arg(long = "L", global = true, value_name = "L")]
    band_limit: Option<usize>,

    /// Newton residual target of the Liouville solve.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Output path (standard output when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Metric JSON → uniformization result JSON.
    Uniformize { metric: PathBuf },
    /// Field JSON → centering solve JSON.
    Center { field: PathBuf },
    /// Uniformization result JSON → canonical modes, Gram matrix and diagnostics.
    Modes { result: PathBuf },
    /// Two metrics (and an optional identification map) → stability report.
    Compare {
        metric1: PathBuf,
        metric2: PathBuf,
        /// Map JSON with the identification Ψ (identity when absent).
        #[arg(long)]
        psi: Option<PathBuf>,
    },
    /// Stability report → the same report with a calibration section.
    Calibrate {
        report: PathBuf,
        /// Calibration frame "n1,n2,n3,v1,v2,v3" or six separate values (default N = e3, v = e1).
        #[arg(long, value_delimiter = ',', num_args = 1..=6, allow_hyphen_values = true)]
        frame: Option<Vec<f64>>,
    },
    /// Sphere data JSON → angular momentum report.
    Angmom { data: PathBuf },
    /// GCM input JSON → leading-order Λ, Λ̄.
    GcmSolve { input: PathBuf },
    /// Kerr model sphere data for (a, m, r).
    KerrModel {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        r: f64,
        /// Rotation axis "x,y,z" or three separate values (default e3).
        #[arg(long, value_delimiter = ',', num_args = 1..=3, allow_hyphen_values = true)]
        axis: Option<Vec<f64>>,
        /// Also write the GCM input derived from the model to this path.
        #[arg(long)]
        gcm_out: Option<PathBuf>,
    },
    /// Field JSON → CSV (theta, phi, value).
    DumpCsv {
        field: PathBuf,
        /// Dump the field stored under this key of any artifact
        /// (e.g. `u` of a result, `w` of a metric, `kappa` of sphere data).
        #[arg(long)]
        key: Option<String>,
    },
    /// Seeded property suite, one line per criterion.
    Selftest {
        #[arg(long, default_value_t = SelftestConfig::default().seed)]
        seed: u64,
        /// Run only these criteria (comma separated); criterion 13 re-runs the suite.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u32>>,
    },
}

/// Failure of one invocation.
enum Failure {
    Invalid(String),
    Solver(Error),
    Selftest,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_non_convergence() {
            Failure::Solver(e)
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("roundsphere: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            eprint!("{}", solver_diagnostics(&e));
            ExitCode::from(3)
        }
        Err(Failure::Selftest) => ExitCode::from(1),
    }
}

fn solver_diagnostics(e: &Error) -> String {
    let (kind, history) = match e {
        Error::AlmostRoundViolation { history, .. } => ("almost_round_violation", history.clone()),
        Error::Centering { trace, .. } => ("centering", trace.clone()),
        Error::Decomposition(_) => ("decomposition", Vec::new()),
        _ => ("solver", Vec::new()),
    };
    let doc = json!({"schema": SCHEMA_VERSION, "error": kind, "message": e.to_string(), "history": history});
    to_json_string(&doc).unwrap_or_else(|_| format!("{e}\n"))
}

fn configure_threads() -> Outcome<()> {
    let Ok(v) = std::env::var("ROUNDSPHERE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Invalid(format!("ROUNDSPHERE_THREADS must be a positive integer (got {v:?})")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Invalid(format!("cannot configure thread pool: {e}")))
}

/// Exactly `N` numbers from a comma- or space-separated option.
fn components<const N: usize>(flag: &str, v: &[f64]) -> Outcome<[f64; N]> {
    v.try_into().map_err(|_| Failure::Invalid(format!("{flag} takes {N} numbers, got {}", v.len())))
}

fn tolerances(cli: &Cli) -> Outcome<Tolerances> {
    let mut tol = Tolerances::default();
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(Failure::Invalid(format!("--tol must lie in (0, 1) (got {t})")));
        }
        tol.liouville_residual = t;
    }
    Ok(tol)
}

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Outcome<T> {
    from_json_str(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn emit(cli: &Cli, text: &str) -> Outcome<()> {
    write_to(cli.out.as_deref(), text)
}

fn write_to(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> Outcome<String> {
    Ok(to_json_string(v)?)
}

/// Applies the `--L` override to a field.
fn rebanded(cli: &Cli, f: ScalarField) -> Outcome<ScalarField> {
    match cli.band_limit {
        Some(l) if l != f.grid().band_limit() => Ok(resample(&analyze(&f), &make_grid(l)?)),
        _ => Ok(f),
    }
}

fn load_metric(cli: &Cli, path: &Path) -> Outcome<ConformalMetric> {
    let doc: MetricDoc = load(path)?;
    metric_from(cli, &doc.metric)
}

fn metric_from(cli: &Cli, m: &MetricJson) -> Outcome<ConformalMetric> {
    let g = m.to_metric()?;
    let w = rebanded(cli, g.conformal_factor().clone())?;
    Ok(ConformalMetric::new(g.radius(), w, g.precompose().cloned())?)
}

fn band_limit_or_default(cli: &Cli) -> Outcome<usize> {
    let l = cli.band_limit.unwrap_or(64);
    make_grid(l)?;
    Ok(l)
}

fn run(cli: &Cli) -> Outcome<()> {
    configure_threads()?;
    let tol = tolerances(cli)?;
    match &cli.command {
        Command::Uniformize { metric } => {
            let g = load_metric(cli, metric)?;
            emit(cli, &json(&ResultDoc::new(&uniformize(&g, &tol)?))?)
        }
        Command::Center { field } => {
            let doc: FieldDoc = load(field)?;
            let u = rebanded(cli, doc.field.to_field()?)?;
            let c = center(&u, &tol)?;
            let centered = conformal_factor_compose(&analyze(&u), &c.map, u.grid());
            emit(cli, &json(&CenteringDoc::new(&c, &centered))?)
        }
        Command::Modes { result } => {
            let doc: ResultDoc = load(result)?;
            let res = doc.to_result()?;
            res.check_invariants(&tol)?;
            let metric = res.chart_metric()?;
            let basis = canonical_modes(&res, &tol)?;
            let g = gram(&basis, &metric)?;
            let means: Vec<f64> = basis.fields.iter().map(|j| integrate(j, &metric)).collect::<Result<_, _>>()?;
            let projection = if metric.precompose().is_none() {
                Some(curvature_mode_cancellation(&metric, &res)?.into())
            } else {
                None
            };
            let out = ModesDoc {
                schema: SCHEMA_VERSION,
                provenance: provenance_tag(&basis),
                modes: ModeFieldsJson::from_basis(&basis),
                gram: std::array::from_fn(|i| std::array::from_fn(|j| g[(i, j)])),
                zero_mean: [means[0], means[1], means[2]].into(),
                laplacian_defect: laplacian_defect(&basis, &metric).ok(),
                curvature_projection: projection,
            };
            emit(cli, &json(&out)?)
        }
        Command::Compare { metric1, metric2, psi } => {
            let g1 = load_metric(cli, metric1)?;
            let g2 = load_metric(cli, metric2)?;
            let psi = match psi {
                Some(p) => load::<MapDoc>(p)?.map.to_map()?,
                None => SphereMap::identity(),
            };
            let res1 = uniformize(&g1, &tol)?;
            let res2 = uniformize(&g2, &tol)?;
            let rep = compare_report(&g1, &res1, &psi, &g2, &res2, &tol)?;
            emit(cli, &json(&CompareDoc::new(&g1, &psi, &g2, &rep))?)
        }
        Command::Calibrate { report, frame } => {
            let mut doc: CompareDoc = load(report)?;
            let frame = match frame.as_deref().map(|v| components::<6>("--frame", v)).transpose()? {
                Some(v) => CalibrationFrame::new(Vector3::new(v[0], v[1], v[2]), Vector3::new(v[3], v[4], v[5]))?,
                None => CalibrationFrame::default(),
            };
            let g1 = metric_from(cli, &doc.metric1)?;
            let g2 = metric_from(cli, &doc.metric2)?;
            let psi = doc.psi.to_map()?;
            let res1 = uniformize(&g1, &tol)?;
            let res2 = uniformize(&g2, &tol)?;
            let (_, rep) = calibrated_report(&res1, &psi, &res2, &frame, &tol)?;
            doc.calibration = Some(CalibrationJson::new(&frame, &rep));
            emit(cli, &json(&doc)?)
        }
        Command::Angmom { data } => {
            let doc: SphereDataDoc = load(data)?;
            let metric = metric_from(cli, &doc.metric)?;
            let kappa = rebanded(cli, doc.kappa.to_field()?)?;
            let kappa_bar = rebanded(cli, doc.kappa_bar.to_field()?)?;
            let beta = doc.beta.to_form()?;
            if !beta.grid().same_as(metric.grid()) {
                return Err(Failure::Invalid("beta must live on the metric grid (--L cannot resample 1-forms)".into()));
            }
            let modes = canonical_modes(&uniformize(&metric, &tol)?, &tol)?;
            let data = SphereData::new(metric, kappa, kappa_bar, beta, modes, doc.r, doc.m)?;
            let am = angular_momentum(&data)?;
            let mass = hawking_mass(&data.kappa, &data.kappa_bar, &data.metric)?;
            emit(cli, &json(&AngmomDoc::new(&am, mass))?)
        }
        Command::GcmSolve { input } => {
            let doc: GcmInputDoc = load(input)?;
            let g = doc.to_input()?;
            emit(cli, &json(&GcmSolutionDoc::new(&gcm_leading_solve(&g)?, g.upsilon))?)
        }
        Command::KerrModel { a, m, r, axis, gcm_out } => {
            let grid = make_grid(band_limit_or_default(cli)?)?;
            let axis = axis.as_deref().map(|v| components::<3>("--axis", v)).transpose()?;
            let axis = axis.map_or(Vector3::z(), |v| Vector3::new(v[0], v[1], v[2]));
            let data = kerr_model_sphere(*a, *m, *r, &grid, &axis, &KerrProfile::default(), &tol)?;
            let doc = SphereDataDoc {
                schema: SCHEMA_VERSION,
                metric: MetricJson::from_metric(&data.metric),
                kappa: FieldJson::from_field(&data.kappa),
                kappa_bar: FieldJson::from_field(&data.kappa_bar),
                beta: OneFormJson::from_form(&data.beta),
                r: data.r,
                m: data.m,
            };
            if let Some(p) = gcm_out {
                let ups = 1.0 - 2.0 * data.m / data.r;
                let check = |f: &ScalarField, background: f64| f.map(|v| v - background);
                let kc = check(&data.kappa, 2.0 / data.r);
                let kbc = check(&data.kappa_bar, -2.0 * ups / data.r);
                let input = GcmInput::new(
                    [0.0; 3],
                    project_ell1(&kc, &data.modes, &data.metric)?,
                    project_ell1(&kbc, &data.modes, &data.metric)?,
                    data.r,
                    data.m,
                );
                write_to(Some(p), &json(&GcmInputDoc::new(&input))?)?;
            }
            emit(cli, &json(&doc)?)
        }
        Command::DumpCsv { field, key } => {
            let f = match key {
                None => load::<FieldDoc>(field)?.field,
                Some(k) => {
                    let doc: serde_json::Value = load(field)?;
                    let entry = doc
                        .get(k.as_str())
                        .or_else(|| doc.get("metric").and_then(|m| m.get(k.as_str())))
                        .ok_or_else(|| Failure::Invalid(format!("{}: no field `{k}`", field.display())))?;
                    serde_json::from_value::<FieldJson>(entry.clone())
                        .map_err(|e| Failure::Invalid(format!("{}: field `{k}`: {e}", field.display())))?
                }
            };
            emit(cli, &field_to_csv(&rebanded(cli, f.to_field()?)?))
        }
        Command::Selftest { seed, only } => {
            let cfg = SelftestConfig { band_limit: band_limit_or_default(cli)?, seed: *seed, tol };
            let report = match only {
                None => run_all(&cfg),
                Some(ids) => {
                    if let Some(bad) = ids.iter().find(|i| !(1..=CRITERIA).contains(i)) {
                        return Err(Failure::Invalid(format!("no criterion {bad} (valid: 1..={CRITERIA})")));
                    }
                    let criteria: Vec<_> = ids.iter().map(|&id| run_criterion(id, &cfg)).collect();
                    let passed = criteria.iter().all(|c| c.passed);
                    let seconds = criteria.iter().map(|c| c.seconds).sum();
                    roundsphere::selftest::SelftestReport {
                        schema: SCHEMA_VERSION,
                        config: cfg,
                        criteria,
                        passed,
                        seconds,
                    }
                }
            };
            for c in &report.criteria {
                eprintln!("{}", c.line());
            }
            emit(cli, &json(&report)?)?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Selftest)
            }
        }
    }
}
