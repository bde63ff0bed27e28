//! Subcommands. Each writes its outputs plus the resolved config into the
//! output directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use scalarfield::coeffs::{
    check_decay, check_orbital, check_sign_conditions, check_vacuum_admissible, AdmissibilityReport, Condition,
};
use scalarfield::evolve::{evolve, Model, RunOutput, SpongeProfile};
use scalarfield::greensolve::{construct_steady_state, verify_decay, DecayReport, SteadyState};
use scalarfield::potentials::{vacuum_info, VacuumInfo};
use scalarfield::virial::{summarize, IntervalDecay, VirialSummary};

use crate::config::RunConfig;
use crate::io;

/// Parity is considered preserved below this even-part size.
pub const PARITY_TOL: f64 = 1e-8;

fn prepare(out: &Path, cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    io::write_json(&out.join("config.json"), cfg)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckOutput {
    pub pass: bool,
    pub reports: Vec<AdmissibilityReport>,
}

pub fn check(cfg: &RunConfig) -> Result<CheckOutput> {
    let grid = cfg.grid()?;
    let field = cfg.field()?;
    let reports = cfg
        .checks
        .iter()
        .map(|c| match c {
            Condition::VacuumCoercive => check_vacuum_admissible(&field, &grid, cfg.lambda),
            Condition::SignConditions => check_sign_conditions(&field, &grid),
            Condition::Orbital => check_orbital(&field, &grid, &cfg.potential, cfg.xi),
            Condition::ExpDecay => check_decay(&field, &grid),
        })
        .collect::<scalarfield::Result<Vec<_>>>()?;
    Ok(CheckOutput {
        pass: reports.iter().all(|r| r.pass),
        reports,
    })
}

pub fn cmd_check(cfg: &RunConfig, out: &Path) -> Result<CheckOutput> {
    prepare(out, cfg)?;
    let result = check(cfg)?;
    io::write_json(&out.join("check.json"), &result)?;
    Ok(result)
}

/// Vacuum and steady state for a config.
pub struct Background {
    pub vacuum: VacuumInfo,
    pub state: SteadyState,
}

pub fn steady_state(cfg: &RunConfig) -> Result<Background> {
    let vacuum = vacuum_info(&cfg.potential, cfg.xi)?;
    let state = construct_steady_state(&cfg.field()?, &cfg.potential, &vacuum, &cfg.steady)?;
    Ok(Background { vacuum, state })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteadySummary {
    pub xi: f64,
    pub mass: f64,
    pub sigma: f64,
    pub shifted: bool,
    pub iterations: usize,
    pub contraction_ratio: f64,
    pub residual_sup: f64,
    pub x_norm: f64,
    pub first_iterate_norm: f64,
    pub in_contraction_ball: bool,
    pub u_delta_sup: f64,
    /// `U_delta` identically zero.
    pub trivial: bool,
    pub decay_rate: f64,
    pub abel_deviation: Option<f64>,
    pub normalized_w0: Option<f64>,
    pub xi_size: f64,
    pub c_size: f64,
    pub decay: Option<DecayReport>,
}

pub fn steady_summary(bg: &Background, decay_k: Option<f64>) -> SteadySummary {
    let s = &bg.state;
    let sup = s.u_delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    SteadySummary {
        xi: s.xi,
        mass: bg.vacuum.mass,
        sigma: s.sigma,
        shifted: s.sigma != 0.0,
        iterations: s.iterations,
        contraction_ratio: s.contraction_ratio,
        residual_sup: s.residual_sup,
        x_norm: s.x_norm,
        first_iterate_norm: s.first_iterate_norm,
        in_contraction_ball: s.in_contraction_ball(),
        u_delta_sup: sup,
        trivial: sup == 0.0,
        decay_rate: s.decay_rate,
        abel_deviation: s.abel_deviation,
        normalized_w0: s.normalized_w0,
        xi_size: s.xi_size,
        c_size: s.c_size,
        decay: decay_k.map(|k| verify_decay(s, k, bg.vacuum.mass)),
    }
}

pub fn cmd_steady(cfg: &RunConfig, out: &Path) -> Result<SteadySummary> {
    prepare(out, cfg)?;
    let bg = steady_state(cfg)?;
    io::write_steady(&out.join("steady.csv"), &bg.state)?;
    let summary = steady_summary(&bg, cfg.decay_k);
    io::write_json(&out.join("steady_summary.json"), &summary)?;
    Ok(summary)
}

/// Evolution model for a config, with the steady background resampled
/// onto the evolution grid.
pub fn build_model(cfg: &RunConfig) -> Result<Model> {
    let grid = cfg.grid()?;
    let field = cfg.field()?;
    let bg = steady_state(cfg)?;
    let (u_delta, _) = bg.state.resample(&grid, bg.vacuum.mass);
    let background = u_delta.iter().map(|v| cfg.xi + v).collect();
    let sponge = if cfg.sponge.enabled {
        SpongeProfile::new(&grid, cfg.sponge.width, cfg.sponge.gamma_max)?
    } else {
        SpongeProfile::off(&grid)
    };
    Ok(Model::new(grid, &field, cfg.potential.clone(), cfg.xi, background)?
        .with_sponge(sponge)
        .with_nonlinearity(cfg.nonlinearity)
        .with_exec(cfg.exec()))
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let model = build_model(cfg)?;
    let (v1, v2) = cfg.data.generate(&model.grid, cfg.seed)?;
    Ok(evolve(&model, &cfg.evolve_settings(), &v1, &v2)?)
}

/// The part of a run summary recoverable from the diagnostics CSV alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub records: usize,
    pub t_final: f64,
    pub decay: Vec<IntervalDecay>,
    pub floor: f64,
    pub min_neg_didt: f64,
    pub cum_integral: f64,
    pub virial_initial: f64,
    pub virial_final: f64,
    pub cum_bound: f64,
    pub energy_drift: f64,
}

impl From<VirialSummary> for ReportSummary {
    fn from(s: VirialSummary) -> Self {
        ReportSummary {
            records: s.records,
            t_final: s.t_final,
            decay: s.decay,
            floor: s.floor,
            min_neg_didt: s.min_neg_didt,
            cum_integral: s.cum_integral,
            virial_initial: s.virial_initial,
            virial_final: s.virial_final,
            cum_bound: s.cum_bound,
            energy_drift: s.energy_drift,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolveSummary {
    pub dt: f64,
    pub steps: usize,
    pub c_run: f64,
    pub background_energy: f64,
    pub omega_tail: f64,
    pub parity_preserved: Option<bool>,
    pub run: VirialSummary,
    /// Recomputed from the written diagnostics CSV, as `report` would.
    pub report: ReportSummary,
}

pub fn cmd_evolve(cfg: &RunConfig, out: &Path) -> Result<EvolveSummary> {
    prepare(out, cfg)?;
    let output = run(cfg)?;
    let diag = out.join("diagnostics.csv");
    io::write_diagnostics(&diag, &output.records, &cfg.intervals)?;
    io::write_terms(&out.join("virial_terms.csv"), &output.records)?;
    if cfg.time.snap_every.is_some() {
        io::write_snapshots(&out.join("snapshots.ndjson"), &output.snapshots)?;
    }
    let parity_preserved = (cfg.data.parity == scalarfield::evolve::Parity::Odd)
        .then_some(output.summary.max_even_part < PARITY_TOL);
    let summary = EvolveSummary {
        dt: output.dt,
        steps: output.steps,
        c_run: output.c_run,
        background_energy: output.background_energy,
        omega_tail: output.omega_tail,
        parity_preserved,
        run: output.summary,
        report: report(&diag)?,
    };
    io::write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Summary of a diagnostics CSV (or a run directory containing one).
pub fn report(path: &Path) -> Result<ReportSummary> {
    let file = diagnostics_path(path);
    let table = io::read_diagnostics(&file)?;
    Ok(summarize(&table.records, &table.intervals)?.into())
}

fn diagnostics_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("diagnostics.csv")
    } else {
        path.to_path_buf()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub quantity: String,
    pub a: f64,
    pub b: f64,
    /// `b / a`.
    pub ratio: f64,
}

/// Side-by-side ratios of two run summaries.
pub fn compare(a: &ReportSummary, b: &ReportSummary) -> Result<Vec<Ratio>> {
    if a.decay.len() != b.decay.len() {
        bail!("runs have different interval sets");
    }
    let mut rows = vec![
        ("floor", a.floor, b.floor),
        ("min_neg_didt", a.min_neg_didt, b.min_neg_didt),
        ("cum_integral", a.cum_integral, b.cum_integral),
        ("cum_bound", a.cum_bound, b.cum_bound),
        ("energy_drift", a.energy_drift, b.energy_drift),
    ];
    let names: Vec<String> = a
        .decay
        .iter()
        .map(|d| format!("decay_{}", io::local_column(d.interval.0, d.interval.1)))
        .collect();
    for (k, name) in names.iter().enumerate() {
        rows.push((name.as_str(), a.decay[k].factor, b.decay[k].factor));
    }
    Ok(rows
        .into_iter()
        .map(|(q, x, y)| Ratio {
            quantity: q.to_string(),
            a: x,
            b: y,
            ratio: y / x,
        })
        .collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportOutput {
    Single(ReportSummary),
    Comparison { a: ReportSummary, b: ReportSummary, ratios: Vec<Ratio> },
}

pub fn cmd_report(paths: &[PathBuf], out: Option<&Path>) -> Result<ReportOutput> {
    let result = match paths {
        [one] => ReportOutput::Single(report(one)?),
        [a, b] => {
            let (a, b) = (report(a)?, report(b)?);
            let ratios = compare(&a, &b)?;
            ReportOutput::Comparison { a, b, ratios }
        }
        _ => bail!("report takes one or two diagnostics paths"),
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        io::write_json(&dir.join("report.json"), &result)?;
    }
    Ok(result)
}
