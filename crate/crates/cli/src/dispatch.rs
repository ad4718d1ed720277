//! One function per experiment kind; each writes its artifacts and returns
//! the hard assertions it evaluated.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use landau_core::blowup::{fit_blowup_rate, symmetry_residual};
use landau_core::coefficients::verify;
use landau_core::estimates::{
    coercivity_bound_check, convolution_bound_check, gronwall_envelope, level_set_report,
    riccati_check, sample_set, sup_a_bound_check, BoundReport, LevelRule, Quadrature,
};
use landau_core::evolution::{self, Trajectory};
use landau_core::hydro::{
    entropy_max_principle_check, euler_run, maxwellian_sup_bound_check, preset, specific_entropy,
};
use landau_core::linalg::eigenvalues;
use landau_core::snapshot::{read_distribution, write_coefficients};
use landau_core::{profiles, CoefficientSolver, Distribution, VelocityGrid};
use serde::Serialize;

use crate::artifacts::{
    blob_hash, header, load_trajectory, num, save_trajectory, Artifacts, Check, Manifest,
};
use crate::config::{emit_config, InitialCondition, Kind, LevelKind, RunConfig};
use crate::CliError;

/// Default artifact root when neither `--out` nor `output` is given.
pub const OUTPUT_ROOT_ENV: &str = "LANDAU_OUTPUT_ROOT";

/// Convolution ratios may move this much under quadrature doubling.
const DOUBLING_TOLERANCE: f64 = 0.02;
const MASS_TOLERANCE: f64 = 1e-8;
const ENTROPY_TOLERANCE: f64 = 1e-8;
const GRONWALL_ENERGY_FRACTION: f64 = 1e-6;
const TRACE_TOLERANCE: f64 = 1e-10;
const POISSON_TOLERANCE: f64 = 1e-6;
const PROFILE_TOLERANCE: f64 = 1e-4;
const SUP_BOUND_NOISE: f64 = 1e-6;
const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.manifest.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }
}

/// The configuration as echoed into `config.toml`, without the output path
/// so that the artifact tree does not depend on where it was written.
fn echo(cfg: &RunConfig) -> String {
    let mut c = cfg.clone();
    c.output = None;
    emit_config(&c)
}

/// `--out`, then `output`, then `$LANDAU_OUTPUT_ROOT/<kind>-<hash>`, then
/// `landau-out/<kind>-<hash>`.
pub fn output_dir(cfg: &RunConfig, cli_override: Option<&Path>) -> PathBuf {
    if let Some(p) = cli_override {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.output {
        return p.clone();
    }
    let root = std::env::var_os(OUTPUT_ROOT_ENV)
        .map_or_else(|| PathBuf::from("landau-out"), PathBuf::from);
    root.join(format!(
        "{}-{}",
        cfg.kind.name(),
        &blob_hash(echo(cfg).as_bytes())[..12]
    ))
}

pub fn dispatch(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    match cfg.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Failure(format!("thread pool: {e}")))?
            .install(|| run_kind(cfg, out)),
        None => run_kind(cfg, out),
    }
}

struct Work {
    out: Artifacts,
    inputs: BTreeMap<String, String>,
    checks: Vec<Check>,
}

fn run_kind(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let mut work = Work {
        out: Artifacts::create(dir)?,
        inputs: BTreeMap::new(),
        checks: Vec::new(),
    };
    let config = echo(cfg);
    work.out.write("config.toml", config.as_bytes())?;
    match cfg.kind {
        Kind::Run => run(cfg, &mut work)?,
        Kind::VerifyCoefficients => verify_coefficients(cfg, &mut work)?,
        Kind::VerifyEstimates => verify_estimates(cfg, &mut work)?,
        Kind::Classify => classify(cfg, &mut work)?,
        Kind::Hydro => hydro(cfg, &mut work)?,
        Kind::Symmetry => symmetry(cfg, &mut work)?,
    }
    for c in work.checks.iter().filter(|c| !c.pass) {
        log::warn!(
            "check `{}` failed: {} against {}",
            c.name,
            c.value,
            c.threshold
        );
    }
    let manifest = work
        .out
        .finish(cfg.kind.name(), &config, work.inputs, work.checks)?;
    Ok(Outcome {
        dir: dir.to_path_buf(),
        manifest,
    })
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn read_input(
    path: &Path,
    label: &str,
    inputs: &mut BTreeMap<String, String>,
) -> Result<Vec<u8>, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    inputs.insert(label.into(), blob_hash(&bytes));
    Ok(bytes)
}

fn initial(
    cfg: &RunConfig,
    inputs: &mut BTreeMap<String, String>,
) -> Result<Distribution, CliError> {
    let g = cfg.grid.ok_or_else(|| usage("missing [grid] table"))?;
    let grid = VelocityGrid::new(g.n, g.extent).map_err(usage)?;
    let ic = cfg
        .initial
        .as_ref()
        .ok_or_else(|| usage("missing [initial] table"))?;
    match ic {
        InitialCondition::Maxwellian { rho, u, theta } => {
            profiles::maxwellian(*rho, *u, *theta, &grid).map_err(usage)
        }
        InitialCondition::Bimodal => Ok(profiles::bimodal(&grid)),
        InitialCondition::FatTail { m, amplitude } => {
            profiles::fat_tail(*m, *amplitude, &grid).map_err(usage)
        }
        InitialCondition::PointMass { center } => {
            profiles::point_mass(&grid, center.unwrap_or([g.n / 2; 3])).map_err(usage)
        }
        InitialCondition::FromFile { path } => {
            let bytes = read_input(path, "initial", inputs)?;
            let f = read_distribution(&mut bytes.as_slice())
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            if !f.grid().same_as(&grid) {
                return Err(usage(format!(
                    "{} holds an n = {}, L = {} lattice but [grid] says n = {}, L = {}",
                    path.display(),
                    f.grid().n(),
                    f.grid().extent(),
                    g.n,
                    g.extent
                )));
            }
            Ok(f)
        }
    }
}

/// Mass drift after boundary and clipping bookkeeping, relative to `mass(0)`.
fn mass_drift(traj: &Trajectory) -> f64 {
    let mass0 = traj.diagnostics[0].moments.mass;
    let drift = traj
        .diagnostics
        .iter()
        .map(|d| (d.moments.mass - mass0 - d.boundary.mass - d.clipped_mass).abs())
        .fold(0.0, f64::max);
    if mass0 > 0.0 {
        drift / mass0
    } else {
        drift
    }
}

/// Largest one-step increase of `∫ f log f`, relative to `|H(0)|`.
fn entropy_rise(traj: &Trajectory) -> f64 {
    let h0 = traj.diagnostics[0].moments.entropy.abs();
    let rise = traj
        .diagnostics
        .windows(2)
        .map(|w| w[1].moments.entropy - w[0].moments.entropy)
        .fold(0.0, f64::max);
    if h0 > 0.0 {
        rise / h0
    } else {
        rise
    }
}

#[derive(Serialize)]
struct RunSummary {
    stop: evolution::StopReason,
    /// Reported, not asserted: near equilibrium the lattice drift of the
    /// Maxwellian moves the entropy by O(h²) in either direction.
    entropy_rise: f64,
    entropy_tolerance: f64,
    negativity_flagged: bool,
    steps: usize,
    final_time: f64,
    snapshots: usize,
}

fn run(cfg: &RunConfig, work: &mut Work) -> Result<(), CliError> {
    let f0 = initial(cfg, &mut work.inputs)?;
    let solver = cfg.solver.clone().unwrap_or_default().to_solver();
    let traj = evolution::run(&f0, &solver)?;
    save_trajectory(&mut work.out, &traj)?;
    let last = traj.diagnostics.last().expect("initial row");
    work.out.json(
        "run.json",
        &RunSummary {
            stop: traj.stop,
            entropy_rise: entropy_rise(&traj),
            entropy_tolerance: ENTROPY_TOLERANCE,
            negativity_flagged: traj.negativity_flagged,
            steps: last.step,
            final_time: last.t,
            snapshots: traj.snapshots.len(),
        },
    )?;
    work.checks.push(Check::at_most(
        "mass drift / mass(0)",
        mass_drift(&traj),
        MASS_TOLERANCE,
    ));
    Ok(())
}

/// Nodes on the positive `v_x` axis through the origin node.
fn axis(grid: &VelocityGrid) -> impl Iterator<Item = (f64, usize)> + '_ {
    let c = grid.n() / 2;
    (c..grid.n()).map(move |i| (grid.coord(i), grid.index(i, c, c)))
}

fn verify_coefficients(cfg: &RunConfig, work: &mut Work) -> Result<(), CliError> {
    let f = initial(cfg, &mut work.inputs)?;
    let check = verify::check(&f)?;
    let field = CoefficientSolver::new(f.grid()).compute(&f)?;
    let mut bin = Vec::new();
    write_coefficients(&mut bin, &field, f.time())?;
    work.out.write("coefficients.bin", &bin)?;
    work.out.json("coefficients.json", &check)?;
    work.checks.push(Check::at_most(
        "trace(A) - a, relative",
        check.trace_defect,
        TRACE_TOLERANCE,
    ));
    work.checks.push(Check::at_most(
        "Δa + f, relative interior L2",
        check.poisson_residual,
        POISSON_TOLERANCE,
    ));
    if let Some(InitialCondition::Maxwellian { rho, u, theta }) = &cfg.initial {
        if *u == [0.0; 3] {
            // a = ρ erf(r / √(2θ)) / (4πr) for a centred Maxwellian.
            let grid = *f.grid();
            let upper = 6.0f64.min(0.75 * grid.extent());
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for (r, idx) in axis(&grid).filter(|&(r, _)| r > 0.0) {
                let exact = rho * libm::erf(r / (2.0 * theta).sqrt()) / (4.0 * PI * r);
                let a = field.a()[idx];
                if (0.5..=upper).contains(&r) {
                    worst = worst.max((a - exact).abs() / exact);
                }
                rows.push(vec![num(r), num(a), num(exact)]);
            }
            work.out
                .csv("a_profile.csv", &header(&["r", "a", "closed_form"]), rows)?;
            work.checks.push(Check::at_most(
                "a vs closed form on [0.5, 6]",
                worst,
                PROFILE_TOLERANCE,
            ));
        }
    }
    Ok(())
}

fn bound_rows(reports: &[BoundReport]) -> Vec<Vec<String>> {
    let opt = |x: Option<f64>| x.map_or_else(String::new, num);
    reports
        .iter()
        .flat_map(|rep| {
            rep.samples.iter().zip(&rep.ratios).map(move |(v, ratio)| {
                vec![
                    rep.label.clone(),
                    opt(rep.alpha),
                    opt(rep.m),
                    opt(rep.p),
                    num(v[0]),
                    num(v[1]),
                    num(v[2]),
                    num(*ratio),
                ]
            })
        })
        .collect()
}

fn bound_header() -> Vec<String> {
    header(&["label", "alpha", "m", "p", "vx", "vy", "vz", "ratio"])
}

fn verify_estimates(cfg: &RunConfig, work: &mut Work) -> Result<(), CliError> {
    let est = cfg.estimates.clone().unwrap_or_default();
    let traj = match &est.trajectory {
        Some(dir) => {
            let (traj, hashes) = load_trajectory(dir)?;
            work.inputs.extend(hashes);
            traj
        }
        None => {
            let f0 = initial(cfg, &mut work.inputs)?;
            let traj = evolution::run(&f0, &cfg.solver.clone().unwrap_or_default().to_solver())?;
            save_trajectory(&mut work.out, &traj)?;
            traj
        }
    };
    for m in &est.m {
        if traj.weight_index(*m).is_none() {
            return Err(usage(format!(
                "estimates.m = {m} was not recorded by the trajectory"
            )));
        }
    }
    let grid = traj.grid;
    let samples = sample_set(&grid);

    let quad = Quadrature::default();
    let mut conv = Vec::new();
    for &[alpha, m] in &est.convolution {
        let base = convolution_bound_check(alpha, m, &samples, quad).map_err(usage)?;
        let fine = convolution_bound_check(alpha, m, &samples, quad.doubled()).map_err(usage)?;
        let change = (fine.sup_ratio - base.sup_ratio).abs() / fine.sup_ratio.abs();
        work.checks.push(Check::finite(
            format!("convolution sup ratio (α={alpha}, m={m})"),
            base.sup_ratio,
        ));
        work.checks.push(Check::at_most(
            format!("convolution doubling change (α={alpha}, m={m})"),
            change,
            DOUBLING_TOLERANCE,
        ));
        conv.push(base);
    }
    work.out.json("convolution.json", &conv)?;
    work.out
        .csv("convolution.csv", &bound_header(), bound_rows(&conv))?;

    let h = &traj
        .snapshots
        .first()
        .ok_or_else(|| usage("trajectory has no snapshots"))?
        .f;
    let mut bounds = Vec::new();
    for &m in &[2.5, 3.5, 4.5] {
        let rep = coercivity_bound_check(h, m, &samples)?;
        work.checks.push(Check::finite(
            format!("coercivity sup ratio (m={m})"),
            rep.sup_ratio,
        ));
        bounds.push(rep);
    }
    for &[p, m] in &est.sup_a {
        let rep = sup_a_bound_check(h, p, m).map_err(usage)?;
        work.checks.push(Check::finite(
            format!("sup a ratio (p={p}, m={m})"),
            rep.sup_ratio,
        ));
        bounds.push(rep);
    }
    work.out.json("coefficient_bounds.json", &bounds)?;
    work.out.csv(
        "coefficient_bounds.csv",
        &bound_header(),
        bound_rows(&bounds),
    )?;

    let riccati = riccati_check(&traj)?;
    work.checks.push(Check::at_most(
        "Riccati worst relative margin",
        riccati.worst_margin,
        est.riccati_tolerance,
    ));
    work.out.json("riccati.json", &riccati)?;
    work.out.csv(
        "riccati.csv",
        &header(&["t", "sup", "margin"]),
        traj.diagnostics
            .iter()
            .zip(&riccati.margins)
            .map(|(d, margin)| vec![num(d.t), num(d.sup), num(*margin)]),
    )?;

    for &m in &est.m {
        let envelope = gronwall_envelope(&traj, m)?;
        let sup_k = envelope.sup_k_hat.unwrap_or(f64::NAN);
        work.checks
            .push(Check::finite(format!("sup K̂ (m={m})"), sup_k));
        work.out.json(&format!("envelope_m{m}.json"), &envelope)?;
        let opt = |x: Option<f64>| x.map_or_else(String::new, num);
        work.out.csv(
            &format!("envelope_m{m}.csv"),
            &header(&["t", "k_hat", "running_sup"]),
            envelope
                .times
                .iter()
                .zip(&envelope.k_hat)
                .zip(&envelope.running_sup)
                .map(|((t, k), s)| vec![num(*t), opt(*k), opt(*s)]),
        )?;

        let idx = traj.weight_index(m).expect("checked above");
        let ell0 = est
            .level
            .ell0
            .unwrap_or(traj.diagnostics[0].weighted_sup[idx]);
        let rule = match est.level.rule {
            LevelKind::Constant => LevelRule::Constant { ell0 },
            LevelKind::Gronwall => LevelRule::Gronwall {
                ell0,
                k_hat: est
                    .level
                    .k_hat
                    .unwrap_or(if sup_k.is_finite() { sup_k } else { 0.0 }),
            },
        };
        let report = level_set_report(&traj, m, rule).map_err(usage)?;
        work.checks
            .push(Check::finite(format!("sup Ĉ (m={m})"), report.sup_c_hat));
        if est.level.rule == LevelKind::Gronwall {
            let fraction = if report.initial_g_energy > 0.0 {
                report.max_g_ell_energy / report.initial_g_energy
            } else {
                report.max_g_ell_energy
            };
            work.checks.push(Check::at_most(
                format!("max ∫g_ℓ² / ∫g²(0) (m={m})"),
                fraction,
                GRONWALL_ENERGY_FRACTION,
            ));
        }
        work.out.json(&format!("level_set_m{m}.json"), &report)?;
        work.out.csv(
            &format!("level_set_m{m}.csv"),
            &header(&[
                "t",
                "ell",
                "lhs",
                "rhs1",
                "rhs2",
                "c_hat",
                "dissipation",
                "g_ell_mass",
                "g_ell_energy",
            ]),
            report.rows.iter().map(|r| {
                [
                    r.t,
                    r.ell,
                    r.lhs,
                    r.rhs1,
                    r.rhs2,
                    r.c_hat,
                    r.dissipation,
                    r.g_ell_mass,
                    r.g_ell_energy,
                ]
                .map(num)
                .to_vec()
            }),
        )?;
    }
    Ok(())
}

fn classify(cfg: &RunConfig, work: &mut Work) -> Result<(), CliError> {
    let c = cfg
        .classify
        .as_ref()
        .ok_or_else(|| usage("missing [classify] table"))?;
    let bytes = read_input(&c.input, "series", &mut work.inputs)?;
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let headers = reader.headers().map_err(usage)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| usage(format!("{}: no column `{name}`", c.input.display())))
    };
    let (ti, vi) = (column(&c.t_column)?, column(&c.value_column)?);
    let mut series = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(usage)?;
        let parse = |i: usize| -> Result<f64, CliError> {
            record
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| {
                    usage(format!(
                        "{}: row {} is not numeric",
                        c.input.display(),
                        line + 2
                    ))
                })
        };
        series.push((parse(ti)?, parse(vi)?));
    }
    let fit = fit_blowup_rate(&series, c.hint).map_err(usage)?;
    work.out.json("rate_fit.json", &fit)?;
    Ok(())
}

#[derive(Serialize)]
struct HydroSummary {
    preset: String,
    cells: usize,
    t_end: f64,
    steps: usize,
    max_principle: landau_core::hydro::MaxPrincipleReport,
    sup_bound: landau_core::hydro::SupBoundReport,
}

fn hydro(cfg: &RunConfig, work: &mut Work) -> Result<(), CliError> {
    let h = cfg
        .hydro
        .as_ref()
        .ok_or_else(|| usage("missing [hydro] table"))?;
    let t_end = h.t_end.unwrap_or(h.preset.default_t_end());
    let state = preset(h.preset, h.cells).map_err(usage)?;
    let run = euler_run(&state, t_end)?;
    let last = run.states.len() - 1;
    let mut rows = Vec::new();
    for (k, s) in run.states.iter().enumerate() {
        if k % h.profile_stride != 0 && k != last {
            continue;
        }
        let entropy = specific_entropy(s);
        for (i, sb) in entropy.iter().enumerate() {
            rows.push(vec![
                num(s.time),
                num(s.x(i)),
                num(s.density(i)),
                num(s.velocity(i)),
                num(s.pressure(i)),
                num(*sb),
            ]);
        }
    }
    work.out.csv(
        "profiles.csv",
        &header(&["t", "x", "rho", "u", "p", "s_bar"]),
        rows,
    )?;
    let tr = &run.trace;
    work.out.csv(
        "entropy_trace.csv",
        &header(&["t", "sup_s_bar", "peak", "identity_defect"]),
        (0..tr.times.len()).map(|k| {
            vec![
                num(tr.times[k]),
                num(tr.sup_s[k]),
                num(tr.peak[k]),
                num(tr.identity_defect[k]),
            ]
        }),
    )?;
    let max_principle = entropy_max_principle_check(tr);
    let sup_bound = maxwellian_sup_bound_check(tr);
    work.checks.push(Check::at_most(
        "sup S̄ rise",
        max_principle.margin,
        max_principle.tolerance,
    ));
    work.checks.push(Check::at_most(
        "Maxwellian peak over bound",
        sup_bound.worst_margin,
        SUP_BOUND_NOISE,
    ));
    work.checks.push(Check::at_most(
        "per-cell identity defect",
        sup_bound.identity_defect,
        IDENTITY_TOLERANCE,
    ));
    work.out.json(
        "hydro.json",
        &HydroSummary {
            preset: h.preset.name().into(),
            cells: h.cells,
            t_end,
            steps: last,
            max_principle,
            sup_bound,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct SymmetrySummary {
    mu: f64,
    lambda: f64,
    t_end: f64,
    n: usize,
    #[serde(rename = "L")]
    extent: f64,
    residual: f64,
}

fn symmetry(cfg: &RunConfig, work: &mut Work) -> Result<(), CliError> {
    let s = cfg
        .symmetry
        .as_ref()
        .ok_or_else(|| usage("missing [symmetry] table"))?;
    let f = initial(cfg, &mut work.inputs)?;
    let solver = cfg.solver.clone().unwrap_or_default().to_solver();
    let residual = symmetry_residual(&f, s.mu, s.lambda, s.t_end, &solver)?;
    work.checks
        .push(Check::at_most("symmetry residual", residual, s.tolerance));
    work.out.json(
        "symmetry.json",
        &SymmetrySummary {
            mu: s.mu,
            lambda: s.lambda,
            t_end: s.t_end,
            n: f.grid().n(),
            extent: f.grid().extent(),
            residual,
        },
    )?;
    Ok(())
}

/// Radial profiles of `a` and of the sorted eigenvalues of `A` along the
/// positive `v_x` axis of a stored distribution.
pub fn dump_radial(snapshot: &Path, dir: &Path) -> Result<Outcome, CliError> {
    let mut inputs = BTreeMap::new();
    let bytes = read_input(snapshot, "snapshot", &mut inputs)?;
    let f = read_distribution(&mut bytes.as_slice())
        .map_err(|e| usage(format!("{}: {e}", snapshot.display())))?;
    let field = CoefficientSolver::new(f.grid()).compute(&f)?;
    let mut out = Artifacts::create(dir)?;
    let grid = *f.grid();
    let points: Vec<(f64, usize)> = axis(&grid).collect();
    let rv = |value: &dyn Fn(usize) -> f64| -> Vec<Vec<String>> {
        points
            .iter()
            .map(|&(r, idx)| vec![num(r), num(value(idx))])
            .collect()
    };
    let cols = header(&["r", "value"]);
    out.csv("a.csv", &cols, rv(&|idx| field.a()[idx]))?;
    for (k, name) in ["eig_min.csv", "eig_mid.csv", "eig_max.csv"]
        .iter()
        .enumerate()
    {
        out.csv(name, &cols, rv(&|idx| eigenvalues(&field.matrix()[idx])[k]))?;
    }
    let config = format!("snapshot = {:?}\n", blob_hash(&bytes));
    let manifest = out.finish("dump-radial", &config, inputs, Vec::new())?;
    Ok(Outcome {
        dir: dir.to_path_buf(),
        manifest,
    })
}
