//! Seeded property suite: one check per acceptance criterion.
//!
//! Every criterion draws its inputs from its own ChaCha8 stream derived from
//! the suite seed, generates all inputs sequentially and only then evaluates
//! them (possibly in parallel), so reports are byte-reproducible.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcmgeom::{
    angular_momentum, gcm_leading_solve, hawking_mass, kerr_model_expansions, kerr_model_sphere,
    schwarzschild_expansions, GcmInput, GcmSolution, KerrProfile,
};
use crate::modes::{canonical_modes, curvature_mode_cancellation, gram, project_ell1, triple_to_vector};
use crate::moebius::{conformal_factor_compose, Diffeo, MoebiusMap};
use crate::random::{random_moebius, random_rotation, random_shape, rng, TestRng};
use crate::s2field::{analyze, gauss_curvature, integrate, make_grid, ConformalMetric, GridSpec, ScalarField};
use crate::stability::{calibrated_report, metric_distance, transitivity_check, CalibrationFrame, SphereMap};
use crate::tolerance::Tolerances;
use crate::uniformize::{
    center_of_mass, centering_jacobian, check_onofri, onofri_functional, uniformize, uniformize_in_gauge,
    uniqueness_gap,
};

/// Number of criteria in the suite.
pub const CRITERIA: u32 = 13;

/// Suite configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelftestConfig {
    /// Band limit of every grid.
    pub band_limit: usize,
    /// Master seed.
    pub seed: u64,
    /// Solver tolerances.
    pub tol: Tolerances,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self { band_limit: 64, seed: 2022, tol: Tolerances::default() }
    }
}

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    /// One-line human summary.
    pub summary: String,
    /// Measured quantities (worst cases, fitted constants, ...).
    pub metrics: BTreeMap<String, f64>,
    /// Wall-clock time; excluded from the reproducible digest.
    pub seconds: f64,
}

impl CriterionOutcome {
    /// `criterion N [PASS|FAIL] name: summary (t s)`.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}: {} ({:.2} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.summary,
            self.seconds
        )
    }
}

/// Full suite report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub schema: u32,
    pub config: SelftestConfig,
    pub criteria: Vec<CriterionOutcome>,
    pub passed: bool,
    pub seconds: f64,
}

impl SelftestReport {
    /// Serialized report with every timing zeroed: identical seeds must give
    /// identical bytes.
    pub fn digest(&self) -> String {
        let mut r = self.clone();
        r.seconds = 0.0;
        for c in &mut r.criteria {
            c.seconds = 0.0;
        }
        crate::io::to_json_string(&r).unwrap_or_default()
    }
}

/// Human-readable names, indexed by criterion id − 1.
pub const NAMES: [&str; 13] = [
    "Gauss-Bonnet",
    "Onofri invariance",
    "Onofri inequality",
    "centering Jacobian",
    "uniformization bound",
    "uniqueness up to O(3)",
    "canonical modes",
    "quadratic curvature cancellation",
    "stability and calibration",
    "Kerr angular momentum",
    "Schwarzschild Hawking mass",
    "GCM leading solve",
    "suite runtime and reproducibility",
];

type Metrics = BTreeMap<String, f64>;

struct Check {
    passed: bool,
    summary: String,
    metrics: Metrics,
}

fn stream(cfg: &SelftestConfig, id: u32) -> TestRng {
    rng(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(u64::from(id)))
}

fn uniform(r: &mut TestRng, lo: f64, hi: f64) -> f64 {
    use rand::Rng;
    lo + (hi - lo) * r.random::<f64>()
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

/// ε = ‖(r^S)² K − 1‖∞ with r^S the area radius.
pub fn curvature_deviation(metric: &ConformalMetric) -> f64 {
    let rs = metric.area_radius();
    max_of(gauss_curvature(metric).values().iter().map(|k| (rs * rs * k - 1.0).abs()))
}

/// w ↦ w∘Φ + ½ log J_Φ: the same metric seen through a Möbius chart change.
fn disguise(w: &ScalarField, m: &MoebiusMap) -> ScalarField {
    conformal_factor_compose(&analyze(w), m, w.grid())
}

/// Amplitude s with ‖(r^S)²K − 1‖∞ = ε for w = s·shape, by secant.
pub fn amplitude_for(shape: &ScalarField, radius: f64, epsilon: f64) -> Result<f64> {
    let eps_of = |s: f64| -> Result<f64> {
        Ok(curvature_deviation(&ConformalMetric::new(radius, shape.map(|v| s * v), None)?) - epsilon)
    };
    let probe = 1e-3;
    let mut s0 = probe;
    let mut f0 = eps_of(s0)?;
    let mut s1 = probe * epsilon / (f0 + epsilon);
    let mut f1 = eps_of(s1)?;
    for _ in 0..30 {
        if f1.abs() <= 1e-6 * epsilon {
            return Ok(s1);
        }
        let s2 = s1 - f1 * (s1 - s0) / (f1 - f0);
        (s0, f0) = (s1, f1);
        s1 = s2;
        f1 = eps_of(s1)?;
    }
    Err(Error::Inconsistency(format!("amplitude search for epsilon = {epsilon} did not converge")))
}

/// Runs one criterion; errors are reported as failures.
pub fn run_criterion(id: u32, cfg: &SelftestConfig) -> CriterionOutcome {
    let start = Instant::now();
    let check = match id {
        1 => gauss_bonnet(cfg),
        2 => onofri_invariance(cfg),
        3 => onofri_inequality(cfg),
        4 => centering_jacobian_check(cfg),
        5 => uniformization_bound(cfg),
        6 => uniqueness(cfg),
        7 => canonical_mode_properties(cfg),
        8 => quadratic_cancellation(cfg),
        9 => stability(cfg),
        10 => kerr_angular_momentum(cfg),
        11 => schwarzschild_mass(cfg),
        12 => gcm_solve(cfg),
        13 => reproducibility(cfg),
        _ => Err(Error::Config(format!("no criterion {id}"))),
    };
    let check =
        check.unwrap_or_else(|e| Check { passed: false, summary: format!("error: {e}"), metrics: Metrics::new() });
    let seconds = start.elapsed().as_secs_f64();
    let name = NAMES.get(id as usize - 1).copied().unwrap_or("unknown").to_string();
    let mut passed = check.passed;
    let mut summary = check.summary;
    if id == 1 && seconds >= 30.0 {
        passed = false;
        summary.push_str(&format!("; runtime {seconds:.1} s exceeds 30 s"));
    }
    if id == 5 && seconds >= 120.0 {
        passed = false;
        summary.push_str(&format!("; runtime {seconds:.1} s exceeds 120 s"));
    }
    CriterionOutcome { id, name, passed, summary, metrics: check.metrics, seconds }
}

/// Runs criteria 1–12 (criterion 13 wraps the suite itself).
pub fn run_suite(cfg: &SelftestConfig) -> SelftestReport {
    let start = Instant::now();
    let criteria: Vec<_> = (1..CRITERIA).map(|id| run_criterion(id, cfg)).collect();
    let passed = criteria.iter().all(|c| c.passed);
    SelftestReport {
        schema: crate::io::SCHEMA_VERSION,
        config: *cfg,
        criteria,
        passed,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs criteria 1–12 and then criterion 13, which re-runs the suite on a
/// single-threaded pool and compares digests.
pub fn run_all(cfg: &SelftestConfig) -> SelftestReport {
    let mut report = run_suite(cfg);
    let start = Instant::now();
    let check = verify_reproducible(cfg, &report);
    let seconds = start.elapsed().as_secs_f64();
    let total = report.seconds + seconds;
    let within = report.seconds < 300.0;
    let metrics = Metrics::new();
    let (passed, summary) = match check {
        Ok(same) => (
            same && within,
            format!(
                "suite {} 5 min; single-thread rerun {}",
                if within { "within" } else { "exceeds" },
                if same { "byte-identical" } else { "DIFFERS" }
            ),
        ),
        Err(e) => (false, format!("error: {e}")),
    };
    report.criteria.push(CriterionOutcome {
        id: CRITERIA,
        name: NAMES[CRITERIA as usize - 1].into(),
        passed,
        summary,
        metrics,
        seconds,
    });
    report.passed = report.criteria.iter().all(|c| c.passed);
    report.seconds = total;
    report
}

fn verify_reproducible(cfg: &SelftestConfig, first: &SelftestReport) -> Result<bool> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| Error::Config(e.to_string()))?;
    let second = pool.install(|| run_suite(cfg));
    Ok(second.digest() == first.digest())
}

fn reproducibility(cfg: &SelftestConfig) -> Result<Check> {
    let first = run_suite(cfg);
    let same = verify_reproducible(cfg, &first)?;
    let within = first.seconds < 300.0;
    Ok(Check {
        passed: same && within,
        summary: format!(
            "suite {}; rerun {}",
            if within { "within 5 min" } else { "exceeds 5 min" },
            if same { "byte-identical" } else { "DIFFERS" }
        ),
        metrics: Metrics::new(),
    })
}

// ---------------------------------------------------------------------------
// 1–4: identities and the centering map

fn gauss_bonnet(cfg: &SelftestConfig) -> Result<Check> {
    let grid = make_grid(cfg.band_limit)?;
    let mut r = stream(cfg, 1);
    let inputs: Vec<_> = (0..50)
        .map(|_| {
            let amp = uniform(&mut r, 0.05, 0.5);
            let radius = uniform(&mut r, 0.5, 3.0);
            (random_shape(&mut r, &grid, 0, 8).map(|v| amp * v), radius)
        })
        .collect();
    let errs: Vec<f64> = inputs
        .par_iter()
        .map(|(w, radius)| -> Result<f64> {
            let g = ConformalMetric::new(*radius, w.clone(), None)?;
            Ok((integrate(&gauss_curvature(&g), &g)? - 4.0 * PI).abs() / (4.0 * PI))
        })
        .collect::<Result<_>>()?;
    let worst = max_of(errs);
    Ok(Check {
        passed: worst <= 1e-8,
        summary: format!("50 metrics, worst relative defect {worst:.2e} (bound 1e-8)"),
        metrics: [("worst_relative_defect".to_string(), worst)].into(),
    })
}

fn onofri_invariance(cfg: &SelftestConfig) -> Result<Check> {
    let grid = make_grid(cfg.band_limit)?;
    let mut r = stream(cfg, 2);
    let inputs: Vec<_> = (0..100)
        .map(|_| {
            let amp = uniform(&mut r, 0.05, 0.5);
            (random_shape(&mut r, &grid, 0, 6).map(|v| amp * v), random_moebius(&mut r, 1.6))
        })
        .collect();
    let errs: Vec<f64> = inputs
        .par_iter()
        .map(|(u, m)| {
            let s = onofri_functional(u);
            let s_phi = onofri_functional(&conformal_factor_compose(&analyze(u), m, &grid));
            (s_phi - s).abs() / (1.0 + s.abs())
        })
        .collect();
    let worst = max_of(errs);
    Ok(Check {
        passed: worst <= 1e-8,
        summary: format!("100 pairs, worst |S[u_Phi]-S[u]|/(1+|S[u]|) = {worst:.2e} (bound 1e-8)"),
        metrics: [("worst_relative_change".to_string(), worst)].into(),
    })
}

fn onofri_inequality(cfg: &SelftestConfig) -> Result<Check> {
    let grid = make_grid(cfg.band_limit)?;
    let mut r = stream(cfg, 3);
    let random: Vec<_> = (0..100)
        .map(|_| {
            let amp = uniform(&mut r, 0.05, 1.0);
            random_shape(&mut r, &grid, 0, 8).map(|v| amp * v)
        })
        .collect();
    let orbit: Vec<_> = (0..20).map(|_| random_moebius(&mut r, 2.5)).collect();
    let min_slack = random.par_iter().map(check_onofri).reduce(|| f64::INFINITY, f64::min);
    let zero = analyze(&ScalarField::constant(&grid, 0.0));
    let orbit_slack: Vec<f64> =
        orbit.par_iter().map(|m| check_onofri(&conformal_factor_compose(&zero, m, &grid)).abs()).collect();
    let worst_orbit = max_of(orbit_slack);
    Ok(Check {
        passed: min_slack >= -1e-9 && worst_orbit <= 1e-8,
        summary: format!(
            "min slack {min_slack:.2e} over 100 factors (bound -1e-9); max |slack| {worst_orbit:.2e} on 20 orbit factors (bound 1e-8)"
        ),
        metrics: [("min_slack".to_string(), min_slack), ("worst_orbit_slack".to_string(), worst_orbit)].into(),
    })
}

fn centering_jacobian_check(cfg: &SelftestConfig) -> Result<Check> {
    let grid = make_grid(cfg.band_limit)?;
    let mut r = stream(cfg, 4);
    let eps = 1e-3;
    // Area-normalized factors: ∫ e^{2u} dΩ = 4π.
    let shapes: Vec<_> = (0..5)
        .map(|_| {
            let u = random_shape(&mut r, &grid, 0, 6).map(|v| eps * v);
            let mean = crate::s2field::integrate_round(&u.map(|v| (2.0 * v).exp())) / (4.0 * PI);
            u.map(|v| v - 0.5 * mean.ln())
        })
        .collect();
    let devs: Vec<f64> = shapes
        .par_iter()
        .map(|u| -> Result<f64> {
            let j = centering_jacobian(u, [1.0, 1.0, 1.0], 1e-5)?;
            Ok((j + Matrix3::identity() * (8.0 * PI / 3.0)).norm())
        })
        .collect::<Result<_>>()?;
    let worst = max_of(devs);
    Ok(Check {
        passed: worst <= 1e-2,
        summary: format!("5 factors at eps = 1e-3, worst |dTheta + (8pi/3)I| = {worst:.2e} (bound 1e-2)"),
        metrics: [("worst_jacobian_deviation".to_string(), worst)].into(),
    })
}

// ---------------------------------------------------------------------------
// 5–8: uniformization and canonical modes

/// Metric at curvature deviation ε with a random shape, radius and Möbius
/// chart change.
struct FamilyMember {
    metric: ConformalMetric,
    epsilon: f64,
}

fn family_inputs(r: &mut TestRng, grid: &GridSpec, n: usize) -> Vec<(ScalarField, f64, MoebiusMap)> {
    (0..n)
        .map(|_| {
            let shape = random_shape(r, grid, 2, 6);
            let radius = uniform(r, 0.5, 3.0);
            (shape, radius, random_moebius(r, 1.5))
        })
        .collect()
}

fn family_member(shape: &ScalarField, radius: f64, chart: &MoebiusMap, epsilon: f64) -> Result<FamilyMember> {
    let s = amplitude_for(shape, radius, epsilon)?;
    let w = disguise(&shape.map(|v| s * v), chart);
    let metric = ConformalMetric::new(radius, w, None)?;
    let epsilon = curvature_deviation(&metric);
    Ok(FamilyMember { metric, epsilon })
}

const EPSILONS: [f64; 3] = [1e-1, 1e-2, 1e-3];

fn uniformization_bound(cfg: &SelftestConfig) -> Result<Check> {
    let grid = make_grid(cfg.band_limit)?;
    let mut r = stream(cfg, 5);
    let shapes = family_inputs(&mut r, &grid, 5);
    let jobs: Vec<_> = EPSILONS.iter().flat_map(|&e| shapes.iter().map(move |s| (e, s))).collect();
    let rows: Vec<(f64, f64, f64)> = jobs
        .par_iter()
        .map(|(eps, (shape, radius, chart))| -> Result<(f64, f64, f64)> {
            let fm = family_member(shape, *radius, chart, *eps)?;
            let res = uniformize(&fm.metric, &cfg.tol)?;
            Ok((res.u.sup_norm() / fm.epsilon, center_of_mass(&res.u).norm(), res.diagnostics.residual))
        })
        .collect::<Result<_>>()?;
    let ratio = max_of(rows.iter().map(|r| r.0));
    let cm = max_of(rows.iter().map(|r| r.1));
    let res = max_of(rows.iter().map(|r| r.2));
    Ok(Check {
        passed: ratio <= 5.0 && cm <= 1e-9 && res <= 1e-7,
        summary: format!(
            "15 metrics: max |u|/eps = {ratio:.3} (bound 5), max |CM| = {cm:.2e} (1e-9), max residual = {res:.2e} (1e-7)"
        ),
        metrics: [
            ("max_u_over_eps".to_string(), ratio),
            ("max_cm".to_string(), cm),
            ("max_residual".to_string(), res),
        ]
        .into(),
    })
}

fn uniqueness(cfg: &SelftestConfig) -> Result<Check> {
    let grid = make_grid(cfg.band_limit)?;
    let mut r = stream(cfg, 6);
    let shapes = family_inputs(&mut r, &grid, 10);
    let seeds: Vec<_> = (0..10).map(|_| (random_rotation(&mut r), random_rotation(&mut r))).collect();
    let gaps: Vec<(f64, f64)> = shapes
        .par_iter()
        .zip(&seeds)
        .map(|((shape, radius, chart), (o1, o2))| -> Result<(f64, f64)> {
            let fm = family_member(shape, *radius, chart, 0.05)?;
            let a = uniformize_in_gauge(&fm.metric, &cfg.tol, Some(o1))?;
            let b = uniformize_in_gauge(&fm.metric, &cfg.tol, Some(o2))?;
            let (rot, _) = crate::stability::nearest_rotation(&b.phi.inverse()?.compose(&a.phi)?, &grid)?;
            Ok((uniqueness_gap(&a, &b)?, (rot.matrix() - Matrix3::identity()).norm()))
        })
        .collect::<Result<_>>()?;
    let worst = max_of(gaps.iter().map(|g| g.0));
    let min_gauge = gaps.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    Ok(Check {
        passed: worst <= 1e-6,
        summary: format!("10 metrics, worst gap {worst:.2e} (bound 1e-6); gauges differ by at least {min_gauge:.2}"),
        metrics: [("worst_gap".to_string(), worst), ("min_gauge_separation".to_string(), min_gauge)].into(),
    })
}

fn canonical_mode_properties(cfg: &SelftestConfig) -> Result<Check> {
    let grid = make_grid(cfg.band_limit)?;
    let mut r = stream(cfg, 7);
    let shapes = family_inputs(&mut r, &grid, 3);
    let jobs: Vec<_> = EPSILONS.iter().flat_map(|&e| shapes.iter().map(move |s| (e, s))).collect();
    let rows: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|(eps, (shape, radius, chart))| -> Result<(f64, f64)> {
            let fm = family_member(shape, *radius, chart, *eps)?;
            let res = uniformize(&fm.metric, &cfg.tol)?;
            let basis = canonical_modes(&res, &cfg.tol)?;
            let area = fm.metric.area();
            let mean =
                basis.fields.iter().map(|j| integrate(j, &fm.metric).map(f64::abs)).collect::<Result<Vec<_>>>()?;
            let rs2 = res.radius * res.radius;
            let g = gram(&basis, &fm.metric)?;
            let dev = (g - Matrix3::identity() * (4.0 * PI / 3.0 * rs2)).norm() / (fm.epsilon * rs2);
            Ok((max_of(mean) / area, dev))
        })
        .collect::<Result<_>>()?;
    let zero_mean = max_of(rows.iter().map(|r| r.0));
    let gram_dev = max_of(rows.iter().map(|r| r.1));
    Ok(Check {
        passed: zero_mean <= 1e-9 && gram_dev <= 10.0,
        summary: format!(
            "9 metrics: max |mean|/area = {zero_mean:.2e} (bound 1e-9), max Gram deviation/eps = {gram_dev:.3} (bound 10)"
        ),
        metrics: [("max_zero_mean".to_string(), zero_mean), ("max_gram_over_eps".to_string(), gram_dev)].into(),
    })
}

fn quadratic_cancellation(cfg: &SelftestConfig) -> Result<Check> {
    let grid = make_grid(cfg.band_limit)?;
    let mut r = stream(cfg, 8);
    let shapes = family_inputs(&mut r, &grid, 5);
    let ratios: Vec<f64> = shapes
        .par_iter()
        .map(|(shape, radius, chart)| -> Result<f64> {
            let s = amplitude_for(shape, *radius, 0.02)?;
            let proj = |amp: f64| -> Result<f64> {
                let metric = ConformalMetric::new(*radius, disguise(&shape.map(|v| amp * v), chart), None)?;
                let res = uniformize(&metric, &cfg.tol)?;
                Ok(triple_to_vector(&curvature_mode_cancellation(&metric, &res)?).norm())
            };
            Ok(proj(s)? / proj(0.5 * s)?)
        })
        .collect::<Result<_>>()?;
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = max_of(ratios.iter().copied());
    Ok(Check {
        passed: lo >= 3.5 && hi <= 4.5,
        summary: format!("5 shapes at eps = 0.02, halving ratios in [{lo:.4}, {hi:.4}] (bound [3.5, 4.5])"),
        metrics: [("min_ratio".to_string(), lo), ("max_ratio".to_string(), hi)].into(),
    })
}

// ---------------------------------------------------------------------------
// 9: stability and calibration

const DELTAS: [f64; 3] = [1e-2, 1e-3, 1e-4];

fn stability(cfg: &SelftestConfig) -> Result<Check> {
    let grid = make_grid(cfg.band_limit)?;
    let mut r = stream(cfg, 9);
    let tol = &cfg.tol;
    let frame = CalibrationFrame::default();
    let radius = uniform(&mut r, 0.8, 2.0);
    let base = random_shape(&mut r, &grid, 2, 6);
    let s1 = amplitude_for(&base, radius, 0.05)?;
    let w1 = base.map(|v| s1 * v);
    let g1 = ConformalMetric::new(radius, w1.clone(), None)?;
    let res1 = uniformize(&g1, tol)?;

    // Two perturbation families: a conformal and a non-conformal identification.
    let families: Vec<(ScalarField, Diffeo, crate::moebius::Rotation3)> = vec![
        (random_shape(&mut r, &grid, 0, 6), Diffeo::Moebius(random_moebius(&mut r, 1.3)), random_rotation(&mut r)),
        (random_shape(&mut r, &grid, 0, 6), Diffeo::Twist { amplitude: 0.4 }, random_rotation(&mut r)),
    ];
    let member = |h: &ScalarField, psi: &Diffeo, gauge: &crate::moebius::Rotation3, amp: f64| -> Result<_> {
        let w2 = w1.zip_with(h, |a, b| a + amp * b)?;
        let g2 = ConformalMetric::new(radius, w2, Some(psi.inverse()))?;
        let psi_map = SphereMap::diffeo(psi.clone());
        let res2 = uniformize_in_gauge(&g2, tol, Some(gauge))?;
        let d = metric_distance(&g1, &psi_map, &g2)?;
        Ok((g2, psi_map, res2, d))
    };

    let jobs: Vec<_> = families.iter().flat_map(|f| DELTAS.iter().map(move |&d| (f, d))).collect();
    let rows: Vec<[f64; 5]> = jobs
        .par_iter()
        .map(|((h, psi, gauge), delta)| -> Result<[f64; 5]> {
            // Scale the perturbation so the measured distance is δ.
            let (_, _, _, unit) = member(h, psi, gauge, 1e-4)?;
            let amp = 1e-4 * delta / unit;
            let (_, psi_map, res2, d) = member(h, psi, gauge, amp)?;
            let (_, rep) = calibrated_report(&res1, &psi_map, &res2, &frame, tol)?;
            Ok([d, rep.psi_hat_defect / d, rep.u_gap / d, rep.mode_gap / d, rep.calibration_defect])
        })
        .collect::<Result<_>>()?;
    let c_psi = max_of(rows.iter().map(|r| r[1]));
    let c_u = max_of(rows.iter().map(|r| r[2]));
    let c_mode = max_of(rows.iter().map(|r| r[3]));
    let dmin = rows.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min);
    let dmax = max_of(rows.iter().map(|r| r[0]));

    // Transitivity through the two families at δ = 10⁻³.
    let (h2, psi2, o2) = &families[0];
    let (h3, psi3, o3) = &families[1];
    let (_, psi12, res2, _) = member(h2, psi2, o2, 5e-4)?;
    let (_, psi13, res3, _) = member(h3, psi3, o3, 5e-4)?;
    let (res2c, _) = calibrated_report(&res1, &psi12, &res2, &frame, tol)?;
    let (res3c, _) = calibrated_report(&res1, &psi13, &res3, &frame, tol)?;
    let trans = transitivity_check(&res1, &res2c, &res3c, &psi12, &psi13, &frame)?;

    Ok(Check {
        passed: c_psi <= 20.0 && c_u <= 20.0 && c_mode <= 20.0 && trans <= 1e-8,
        summary: format!(
            "d in [{dmin:.1e}, {dmax:.1e}]: C(psi_hat) = {c_psi:.3}, C(u) = {c_u:.3}, C(modes) = {c_mode:.3} (bound 20); transitivity {trans:.1e} (1e-8)"
        ),
        metrics: [
            ("c_psi_hat".to_string(), c_psi),
            ("c_u".to_string(), c_u),
            ("c_modes".to_string(), c_mode),
            ("transitivity_defect".to_string(), trans),
        ]
        .into(),
    })
}

// ---------------------------------------------------------------------------
// 10–12: quasi-local quantities

fn kerr_angular_momentum(cfg: &SelftestConfig) -> Result<Check> {
    let grid = make_grid(cfg.band_limit)?;
    let mut r = stream(cfg, 10);
    let axes: Vec<Vector3<f64>> = (0..5).map(|_| random_rotation(&mut r).apply(&Vector3::z())).collect();
    let profile = KerrProfile::default();
    let mut a_err = 0.0_f64;
    let mut pm = 0.0_f64;
    let mut rot_err = 0.0_f64;
    for (a, m, rad) in [(0.1, 1.0, 100.0), (0.3, 1.0, 30.0)] {
        let data = kerr_model_sphere(a, m, rad, &grid, &Vector3::z(), &profile, &cfg.tol)?;
        let am = angular_momentum(&data)?;
        a_err = a_err.max((am.a_s - a).abs());
        let vnorm = triple_to_vector(&am.v).norm();
        pm = pm.max(am.rotated_pm[0].abs().max(am.rotated_pm[1].abs()) / vnorm);
        for axis in &axes {
            let mut rotated = data.clone();
            rotated.beta = crate::gcmgeom::kerr_model_beta_about(a, m, rad, &grid, axis);
            let amr = angular_momentum(&rotated)?;
            rot_err = rot_err.max((amr.a_s - am.a_s).abs());
            let vn = triple_to_vector(&amr.v).norm();
            pm = pm.max(amr.rotated_pm[0].abs().max(amr.rotated_pm[1].abs()) / vn);
        }
    }
    Ok(Check {
        passed: a_err <= 1e-6 && pm <= 1e-9 && rot_err <= 1e-10,
        summary: format!(
            "|a_S - a| = {a_err:.2e} (1e-6); rotated +/- projections {pm:.2e}|V| (1e-9); pre-rotated spread {rot_err:.2e} (1e-10)"
        ),
        metrics: [
            ("a_error".to_string(), a_err),
            ("rotated_pm_relative".to_string(), pm),
            ("prerotated_spread".to_string(), rot_err),
        ]
        .into(),
    })
}

fn schwarzschild_mass(cfg: &SelftestConfig) -> Result<Check> {
    let grid = make_grid(cfg.band_limit)?;
    let mass = 1.0;
    let mut worst = 0.0_f64;
    for ratio in [3.0, 10.0, 100.0] {
        let r = ratio * mass;
        let metric = ConformalMetric::round(&grid, r)?;
        let (k, kb) = schwarzschild_expansions(mass, r, &grid);
        worst = worst.max((hawking_mass(&k, &kb, &metric)? - mass).abs() / mass);
    }
    Ok(Check {
        passed: worst <= 1e-12,
        summary: format!("r/M in {{3, 10, 100}}: worst relative error {worst:.2e} (bound 1e-12)"),
        metrics: [("worst_relative_error".to_string(), worst)].into(),
    })
}

fn gcm_solve(cfg: &SelftestConfig) -> Result<Check> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let grid = make_grid(cfg.band_limit)?;
    let mut r = stream(cfg, 12);
    let triple = |r: &mut TestRng| -> [f64; 3] { std::array::from_fn(|_| r.sample(StandardNormal)) };

    // Superposition.
    let mut lin = 0.0_f64;
    for _ in 0..20 {
        let rad = uniform(&mut r, 3.0, 100.0);
        let m = uniform(&mut r, 0.2, 1.0);
        let (x, y) =
            ([triple(&mut r), triple(&mut r), triple(&mut r)], [triple(&mut r), triple(&mut r), triple(&mut r)]);
        let (a, b) = (uniform(&mut r, -2.0, 2.0), uniform(&mut r, -2.0, 2.0));
        let mix = |p: [f64; 3], q: [f64; 3]| -> [f64; 3] { std::array::from_fn(|i| a * p[i] + b * q[i]) };
        let sx = gcm_leading_solve(&GcmInput::new(x[0], x[1], x[2], rad, m))?;
        let sy = gcm_leading_solve(&GcmInput::new(y[0], y[1], y[2], rad, m))?;
        let sxy = gcm_leading_solve(&GcmInput::new(mix(x[0], y[0]), mix(x[1], y[1]), mix(x[2], y[2]), rad, m))?;
        let parts = |s: &GcmSolution| [s.lambda, s.lambda_bar].concat();
        let (px, py, pxy) = (parts(&sx), parts(&sy), parts(&sxy));
        let scale = px.iter().chain(&py).fold(0.0_f64, |acc, v| acc.max(v.abs())) * (a.abs() + b.abs());
        for i in 0..6 {
            lin = lin.max((pxy[i] - a * px[i] - b * py[i]).abs() / scale);
        }
    }
    let zero = gcm_leading_solve(&GcmInput::new([0.0; 3], [0.0; 3], [0.0; 3], 10.0, 1.0))?;
    let zero_ok = zero.lambda == [0.0; 3] && zero.lambda_bar == [0.0; 3];

    // Kerr-model inputs: ℓ = 1 modes of the expansions scale like m₀a₀²/r².
    let (m0, rad) = (1.0, 30.0);
    let profile = KerrProfile { c3: 1.0, cb3: -1.0, ..KerrProfile::default() };
    let metric = ConformalMetric::round(&grid, rad)?;
    let modes = canonical_modes(&uniformize(&metric, &cfg.tol)?, &cfg.tol)?;
    let mut mode_ratios = Vec::new();
    let mut gap_ratios = Vec::new();
    for a0 in [0.05, 0.1, 0.2] {
        let (k, kb) = kerr_model_expansions(a0, m0, rad, &grid, &profile);
        let km = project_ell1(&k, &modes, &metric)?;
        let kbm = project_ell1(&kb, &modes, &metric)?;
        let bound = m0 * a0 * a0 / (rad * rad);
        mode_ratios.push(triple_to_vector(&km).norm().max(triple_to_vector(&kbm).norm()) / bound);
        let input = GcmInput::new([0.0; 3], km, kbm, rad, m0);
        let s = gcm_leading_solve(&input)?;
        let gap: Vec<f64> = (0..3).map(|p| s.lambda_bar[p] - input.upsilon * s.lambda[p]).collect();
        gap_ratios.push(gap.iter().map(|v| v * v).sum::<f64>().sqrt() / (a0 * a0));
    }
    let spread = |v: &[f64]| {
        let hi = max_of(v.iter().copied());
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        (hi - lo) / hi
    };
    let mode_c = max_of(mode_ratios.iter().copied());
    let gap_spread = spread(&gap_ratios);
    Ok(Check {
        passed: lin <= 1e-12 && zero_ok && mode_c <= 10.0 && gap_spread <= 1e-6 && gap_ratios[0] > 0.0,
        summary: format!(
            "superposition defect {lin:.2e} (1e-12); mode/(m a^2/r^2) <= {mode_c:.3}; |LambdaBar - Upsilon Lambda|/a^2 = {:.4e}, spread {gap_spread:.1e}",
            gap_ratios[0]
        ),
        metrics: [
            ("superposition_defect".to_string(), lin),
            ("mode_constant".to_string(), mode_c),
            ("gap_over_a2".to_string(), gap_ratios[0]),
            ("gap_spread".to_string(), gap_spread),
        ]
        .into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitude_search_hits_target() {
        let grid = make_grid(16).unwrap();
        let shape = random_shape(&mut rng(3), &grid, 2, 5);
        let s = amplitude_for(&shape, 1.5, 0.01).unwrap();
        let g = ConformalMetric::new(1.5, shape.map(|v| s * v), None).unwrap();
        assert!((curvature_deviation(&g) - 0.01).abs() < 1e-7);
    }

    #[test]
    fn cheap_criteria_pass_at_low_band_limit() {
        let cfg = SelftestConfig { band_limit: 24, ..SelftestConfig::default() };
        for id in [2, 3, 11, 12] {
            let o = run_criterion(id, &cfg);
            assert!(o.passed, "{}", o.line());
        }
    }
}
