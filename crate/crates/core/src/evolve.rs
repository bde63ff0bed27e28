//! Leapfrog evolution of `u_tt = u_yy + b u_y + c u - F'(u)` on `[-L, L]`
//! with Dirichlet data `u = xi`, an optional damping sponge near the ends,
//! the weighted energy, initial-data families and the diagnostics driver.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coeffs::{fit_decay, CoefficientField, Sampled};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::greensolve::integral_from_center;
use crate::grid::{trapezoid_range, trapezoid_with, Grid};
use crate::potentials::Potential;
use crate::virial::{
    damping_rates, sech_cross, sech_cross_constant, sech_cross_rate_with, summarize, virial_rate_with, virial_with,
    weighted_norms_with, DiagnosticsRecord, Frame, Nonlinearity, VirialSummary,
};

/// Damping rate `gamma(y)`: zero on the interior, a `3s^2 - 2s^3` ramp to
/// `gamma_max` over the outer `width_fraction * 2L` on each side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpongeProfile {
    pub gamma: Vec<f64>,
    pub width_fraction: f64,
    pub gamma_max: f64,
}

impl SpongeProfile {
    pub fn new(grid: &Grid, width_fraction: f64, gamma_max: f64) -> Result<Self> {
        if !(width_fraction > 0.0 && width_fraction < 0.5) {
            return Err(Error::param("sponge.width", "must lie in (0, 0.5)"));
        }
        if !(gamma_max.is_finite() && gamma_max >= 0.0) {
            return Err(Error::param("sponge.gamma_max", "must be finite and non-negative"));
        }
        let l = grid.half_width();
        let width = width_fraction * 2.0 * l;
        let start = l - width;
        let gamma = grid.sample(|y| {
            let s = ((y.abs() - start) / width).clamp(0.0, 1.0);
            gamma_max * s * s * (3.0 - 2.0 * s)
        });
        Ok(SpongeProfile {
            gamma,
            width_fraction,
            gamma_max,
        })
    }

    pub fn off(grid: &Grid) -> Self {
        SpongeProfile {
            gamma: vec![0.0; grid.len()],
            width_fraction: 0.0,
            gamma_max: 0.0,
        }
    }

    pub fn is_off(&self) -> bool {
        self.gamma.iter().all(|g| *g == 0.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `u = xi` at both ends.
    #[default]
    Dirichlet,
    /// Node `N` identified with node `0`; used for plane-wave checks.
    Periodic,
}

/// Everything the stepper needs, sampled on the evolution grid.
#[derive(Clone, Debug)]
pub struct Model {
    pub grid: Grid,
    pub coeffs: Sampled,
    pub potential: Potential,
    pub xi: f64,
    /// Background state `U = xi + U_delta`.
    pub background: Vec<f64>,
    pub sponge: SpongeProfile,
    pub boundary: Boundary,
    pub nonlinearity: Nonlinearity,
    pub exec: Exec,
    /// `omega = exp(int_{-inf}^y b)` at nodes and at cell midpoints.
    pub omega: Vec<f64>,
    pub omega_mid: Vec<f64>,
    /// Estimate of `int_{-inf}^{-L} b` from the decay fit of `b`.
    pub omega_tail: f64,
}

impl Model {
    pub fn new(
        grid: Grid,
        field: &CoefficientField,
        potential: Potential,
        xi: f64,
        background: Vec<f64>,
    ) -> Result<Self> {
        if background.len() != grid.len() {
            return Err(Error::Malformed("background does not match the grid".into()));
        }
        potential.validate()?;
        field.validate(&grid)?;
        let coeffs = field.sample(&grid);
        let (omega, omega_mid, omega_tail) = weight(&grid, field, &coeffs.b)?;
        Ok(Model {
            sponge: SpongeProfile::off(&grid),
            grid,
            coeffs,
            potential,
            xi,
            background,
            boundary: Boundary::Dirichlet,
            nonlinearity: Nonlinearity::Full,
            exec: Exec::default(),
            omega,
            omega_mid,
            omega_tail,
        })
    }

    /// Model around the constant state `u = xi`.
    pub fn constant(grid: Grid, field: &CoefficientField, potential: Potential, xi: f64) -> Result<Self> {
        let bg = vec![xi; grid.len()];
        Model::new(grid, field, potential, xi, bg)
    }

    pub fn with_sponge(mut self, sponge: SpongeProfile) -> Self {
        self.sponge = sponge;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_nonlinearity(mut self, nonlinearity: Nonlinearity) -> Self {
        self.nonlinearity = nonlinearity;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// `-F'(u)`, or its linearization about the background.
    #[inline]
    fn force(&self, i: usize, u: f64) -> f64 {
        let p = &self.potential;
        let bg = self.background[i];
        match self.nonlinearity {
            Nonlinearity::Full => -(p.d1(u) - p.d1(self.xi)),
            Nonlinearity::Linear => -(p.d1(bg) - p.d1(self.xi)) - p.d2(bg) * (u - bg),
            Nonlinearity::Off => -(p.d1(bg) - p.d1(self.xi)),
        }
    }

    /// Potential energy density matching [`Model::force`], zero at `xi`.
    fn potential_energy(&self, i: usize, u: f64) -> f64 {
        let p = &self.potential;
        let bg = self.background[i];
        let base = p.f(bg) - p.f(self.xi) - p.d1(self.xi) * (bg - self.xi);
        let slope = p.d1(bg) - p.d1(self.xi);
        match self.nonlinearity {
            Nonlinearity::Full => p.f(u) - p.f(self.xi) - p.d1(self.xi) * (u - self.xi),
            Nonlinearity::Linear => base + slope * (u - bg) + 0.5 * p.d2(bg) * (u - bg) * (u - bg),
            Nonlinearity::Off => base + slope * (u - bg),
        }
    }

    #[inline]
    fn neighbors(&self, i: usize) -> Option<(usize, usize)> {
        let n = self.grid.len();
        match self.boundary {
            Boundary::Dirichlet => (i > 0 && i < n - 1).then(|| (i - 1, i + 1)),
            Boundary::Periodic => {
                let last = n - 1;
                let i = if i == last { 0 } else { i };
                Some((if i == 0 { last - 1 } else { i - 1 }, i + 1))
            }
        }
    }

    /// `u_yy + b u_y + c u - F'(u)` at node `i`, second-order stencils.
    #[inline]
    fn rhs(&self, u: &[f64], i: usize) -> f64 {
        let Some((l, r)) = self.neighbors(i) else {
            return 0.0;
        };
        let dy = self.grid.dy();
        let c = if self.boundary == Boundary::Periodic && i == u.len() - 1 { 0 } else { i };
        let d2 = (u[l] - 2.0 * u[c] + u[r]) / (dy * dy);
        let d1 = (u[r] - u[l]) / (2.0 * dy);
        d2 + self.coeffs.b[c] * d1 + self.coeffs.c[c] * u[c] + self.force(c, u[c])
    }

    /// Largest `max(F'' - c)` the linearized dynamics can see, over a unit
    /// band around the background.
    pub fn max_stiffness(&self) -> f64 {
        let (lo, hi) = self
            .background
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), u| (a.min(*u), b.max(*u)));
        let f2 = match self.nonlinearity {
            Nonlinearity::Off => 0.0,
            _ => self.potential.sup_derivative(2, lo - 1.0, hi + 1.0),
        };
        let neg_c = self.coeffs.c.iter().fold(f64::NEG_INFINITY, |m, c| m.max(-c));
        (f2 + neg_c).max(0.0)
    }

    /// Leapfrog stability limit `2 / sqrt(4/dy^2 + max(F'' - c))`.
    pub fn stability_bound(&self) -> f64 {
        let dy = self.grid.dy();
        2.0 / (4.0 / (dy * dy) + self.max_stiffness()).sqrt()
    }

    /// `min(factor dy, 0.9 * stability bound)`.
    pub fn time_step(&self, factor: f64) -> Result<f64> {
        if !(factor > 0.0 && factor <= 0.4) {
            return Err(Error::Cfl {
                dt: factor * self.grid.dy(),
                bound: 0.4 * self.grid.dy(),
                reason: "dt must not exceed 0.4 dy (unit wave speed)",
            });
        }
        Ok((factor * self.grid.dy()).min(0.9 * self.stability_bound()))
    }

    /// `E = int [ut^2/2 + uy^2/2 - c u^2/2 + F(u) - F(xi)] omega`; the
    /// gradient term uses forward differences weighted at cell midpoints.
    pub fn energy(&self, u: &[f64], ut: &[f64]) -> f64 {
        let dy = self.grid.dy();
        let n = self.grid.len();
        let pointwise = trapezoid_with(self.exec, n, dy, |i| {
            (0.5 * ut[i] * ut[i] - 0.5 * self.coeffs.c[i] * u[i] * u[i] + self.potential_energy(i, u[i]))
                * self.omega[i]
        });
        let gradient = self.exec.sum(n - 1, |i| {
            let d = u[i + 1] - u[i];
            self.omega_mid[i] * d * d
        }) * 0.5
            / dy;
        pointwise + gradient
    }

    /// Energy of the background at rest.
    pub fn background_energy(&self) -> f64 {
        self.energy(&self.background, &vec![0.0; self.grid.len()])
    }
}

fn weight(grid: &Grid, field: &CoefficientField, b: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let decay = fit_decay(grid, b)?;
    let l = grid.half_width();
    let tail = if decay.is_negligible() || !(decay.rate > 0.0) {
        0.0
    } else {
        field.b(-l) / decay.rate
    };
    let from_center = integral_from_center(grid, |y| field.b(y));
    let left = from_center[0];
    let omega: Vec<f64> = from_center.iter().map(|v| (tail + v - left).exp()).collect();
    let mid = omega.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
    Ok((omega, mid, tail))
}

/// Three-level leapfrog with a look-ahead level, so the central velocity
/// `(u^{n+1} - u^{n-1}) / 2dt` is available at the current level.
#[derive(Clone, Debug)]
pub struct Leapfrog<'a> {
    model: &'a Model,
    dt: f64,
    step: usize,
    prev: Vec<f64>,
    cur: Vec<f64>,
    next: Vec<f64>,
}

impl<'a> Leapfrog<'a> {
    /// Start from `(u0, u1)` with the Taylor level
    /// `u^{-1} = u0 - dt u1 + dt^2/2 (rhs(u0) - gamma u1)`.
    pub fn new(model: &'a Model, u0: Vec<f64>, u1: &[f64], dt: f64) -> Result<Self> {
        let n = model.grid.len();
        if u0.len() != n || u1.len() != n {
            return Err(Error::Malformed("initial data does not match the grid".into()));
        }
        let bound = model.stability_bound();
        if !(dt > 0.0 && dt <= bound) {
            return Err(Error::Cfl {
                dt,
                bound,
                reason: "leapfrog stability including the mass term",
            });
        }
        if dt > 0.4 * model.grid.dy() * (1.0 + 1e-12) {
            return Err(Error::Cfl {
                dt,
                bound: 0.4 * model.grid.dy(),
                reason: "dt must not exceed 0.4 dy (unit wave speed)",
            });
        }
        let gamma = &model.sponge.gamma;
        let mut prev = vec![0.0; n];
        model.exec.fill(&mut prev, |i| {
            if model.neighbors(i).is_none() {
                return u0[i];
            }
            let a = model.rhs(&u0, i) - gamma[i] * u1[i];
            u0[i] - dt * u1[i] + 0.5 * dt * dt * a
        });
        let mut lf = Leapfrog {
            model,
            dt,
            step: 0,
            prev,
            cur: u0,
            next: vec![0.0; n],
        };
        lf.compute_next();
        Ok(lf)
    }

    fn compute_next(&mut self) {
        let m = self.model;
        let dt = self.dt;
        let (prev, cur) = (&self.prev, &self.cur);
        let gamma = &m.sponge.gamma;
        let xi = m.xi;
        let last = cur.len() - 1;
        m.exec.fill(&mut self.next, |i| {
            if m.neighbors(i).is_none() {
                return xi;
            }
            let g = 0.5 * gamma[i] * dt;
            (2.0 * cur[i] - (1.0 - g) * prev[i] + dt * dt * m.rhs(cur, i)) / (1.0 + g)
        });
        if m.boundary == Boundary::Periodic {
            self.next[last] = self.next[0];
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn t(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn u(&self) -> &[f64] {
        &self.cur
    }

    pub fn u_next(&self) -> &[f64] {
        &self.next
    }

    /// Central velocity at the current level.
    pub fn ut(&self) -> Vec<f64> {
        let inv = 0.5 / self.dt;
        let mut out = vec![0.0; self.cur.len()];
        self.model
            .exec
            .fill(&mut out, |i| (self.next[i] - self.prev[i]) * inv);
        out
    }

    pub fn advance(&mut self) -> Result<()> {
        std::mem::swap(&mut self.prev, &mut self.cur);
        std::mem::swap(&mut self.cur, &mut self.next);
        self.step += 1;
        self.compute_next();
        if self.step % 32 == 0 {
            let peak = self.model.exec.max(self.next.len(), |i| self.next[i].abs());
            if !(peak.is_finite() && peak < 1e8) {
                return Err(Error::BlowUp { t: self.t() });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    #[default]
    Any,
    Odd,
    Even,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DataFamily {
    Zero,
    /// `v1 = sech(beta y)`, `v2 = 0`.
    Sech { beta: f64 },
    /// `v1 = y exp(-beta y^2)`, `v2 = 0`.
    OddGauss { beta: f64 },
    /// Sums of random cubic B-spline bumps for both `v1` and `v2`.
    RandomSpline { bumps: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    #[serde(flatten)]
    pub family: DataFamily,
    /// Target `||v1||_{H1} + ||v2||_{L2}`.
    pub eps: f64,
    #[serde(default)]
    pub parity: Parity,
}

/// Cubic B-spline on `[-2, 2]`, C^2 with unit peak at 0 scaled to 2/3.
fn bspline(t: f64) -> f64 {
    let a = t.abs();
    if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        (2.0 - a).powi(3) / 6.0
    } else {
        2.0 / 3.0 - a * a + 0.5 * a * a * a
    }
}

fn random_spline(grid: &Grid, rng: &mut ChaCha8Rng, bumps: usize) -> Vec<f64> {
    let terms: Vec<(f64, f64, f64)> = (0..bumps)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.75..2.0),
            )
        })
        .collect();
    grid.sample(|y| terms.iter().map(|(a, c, w)| a * bspline((y - c) / w)).sum())
}

fn impose_parity(grid: &Grid, v: &mut [f64], parity: Parity) {
    let sign = match parity {
        Parity::Any => return,
        Parity::Odd => -1.0,
        Parity::Even => 1.0,
    };
    let orig = v.to_vec();
    for (i, vi) in v.iter_mut().enumerate() {
        *vi = 0.5 * (orig[i] + sign * orig[grid.mirror(i)]);
    }
    if parity == Parity::Odd {
        v[grid.center()] = 0.0;
    }
}

/// `sqrt(int v^2 + v'^2)` and `sqrt(int v^2)` on the grid.
pub fn h1_norm(grid: &Grid, v: &[f64]) -> f64 {
    let d = crate::grid::diff8(v, grid.dy());
    trapezoid_with(Exec::Sequential, v.len(), grid.dy(), |i| v[i] * v[i] + d[i] * d[i]).sqrt()
}

pub fn l2_norm(grid: &Grid, v: &[f64]) -> f64 {
    trapezoid_with(Exec::Sequential, v.len(), grid.dy(), |i| v[i] * v[i]).sqrt()
}

impl InitialData {
    pub fn zero() -> Self {
        InitialData {
            family: DataFamily::Zero,
            eps: 0.0,
            parity: Parity::Any,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(Error::param("eps", "must be finite and non-negative"));
        }
        match &self.family {
            DataFamily::Sech { beta } | DataFamily::OddGauss { beta } if !(*beta > 0.0) => {
                Err(Error::param("beta", "must be positive"))
            }
            DataFamily::RandomSpline { bumps } if *bumps == 0 => {
                Err(Error::param("bumps", "need at least one bump"))
            }
            _ => Ok(()),
        }
    }

    /// Perturbation `(v1, v2)` scaled so `||v1||_{H1} + ||v2||_{L2} = eps`.
    pub fn generate(&self, grid: &Grid, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate()?;
        let n = grid.len();
        let (mut v1, mut v2) = match &self.family {
            DataFamily::Zero => (vec![0.0; n], vec![0.0; n]),
            DataFamily::Sech { beta } => (grid.sample(|y| 1.0 / (beta * y).cosh()), vec![0.0; n]),
            DataFamily::OddGauss { beta } => (grid.sample(|y| y * (-beta * y * y).exp()), vec![0.0; n]),
            DataFamily::RandomSpline { bumps } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_spline(grid, &mut rng, *bumps);
                let b = random_spline(grid, &mut rng, *bumps);
                (a, b)
            }
        };
        impose_parity(grid, &mut v1, self.parity);
        impose_parity(grid, &mut v2, self.parity);
        let size = h1_norm(grid, &v1) + l2_norm(grid, &v2);
        if size == 0.0 || self.eps == 0.0 {
            return Ok((vec![0.0; n], vec![0.0; n]));
        }
        let k = self.eps / size;
        v1.iter_mut().chain(v2.iter_mut()).for_each(|v| *v *= k);
        Ok((v1, v2))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveSettings {
    pub t_final: f64,
    pub dt_factor: f64,
    /// Diagnostics interval (rounded to whole steps).
    pub diag_every: f64,
    /// Snapshot interval; `None` disables snapshots.
    pub snap_every: Option<f64>,
    pub snap_stride: usize,
    pub intervals: Vec<(f64, f64)>,
    pub lambda: f64,
    /// Enforce the reflection guard for sponge-free energy checks.
    pub conservation_mode: bool,
}

impl Default for EvolveSettings {
    fn default() -> Self {
        EvolveSettings {
            t_final: 60.0,
            dt_factor: 0.4,
            diag_every: 0.1,
            snap_every: None,
            snap_stride: 10,
            intervals: vec![(-5.0, 5.0)],
            lambda: 13.0,
            conservation_mode: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub dt: f64,
    pub steps: usize,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    pub summary: VirialSummary,
    pub background_energy: f64,
    pub omega_tail: f64,
    /// Frozen constant of the sech-cross lower bound.
    pub c_run: f64,
}

struct Probe {
    virial: f64,
    sech: f64,
}

/// Evolve `u = U + v1`, `u_t = v2` to `t_final` and record diagnostics.
pub fn evolve(model: &Model, settings: &EvolveSettings, v1: &[f64], v2: &[f64]) -> Result<RunOutput> {
    let grid = &model.grid;
    let n = grid.len();
    if v1.len() != n || v2.len() != n {
        return Err(Error::Malformed("perturbation does not match the grid".into()));
    }
    if !(settings.t_final > 0.0 && settings.t_final.is_finite()) {
        return Err(Error::param("t_final", "must be positive"));
    }
    if !(settings.diag_every > 0.0) {
        return Err(Error::param("diag_every", "must be positive"));
    }
    let l = grid.half_width();
    for &(a, b) in &settings.intervals {
        if !(a < b && a >= -l && b <= l) {
            return Err(Error::param("intervals", format!("[{a}, {b}] is not inside the grid")));
        }
    }
    if settings.conservation_mode && model.sponge.is_off() {
        let reach = settings
            .intervals
            .iter()
            .map(|(a, b)| a.abs().max(b.abs()))
            .fold(0.0, f64::max);
        let limit = 0.8 * (l - reach);
        if settings.t_final > limit {
            return Err(Error::ReflectionGuard {
                t_final: settings.t_final,
                limit,
            });
        }
    }

    let frame = Frame::new(grid, settings.lambda)?.with_exec(model.exec);
    let dt = model.time_step(settings.dt_factor)?;
    let last_level = (settings.t_final / dt).round() as usize;
    let diag_stride = ((settings.diag_every / dt).round() as usize).max(1);
    let snap_stride = settings
        .snap_every
        .map(|s| ((s / dt).round() as usize).max(1));
    let is_diag = |k: usize| k % diag_stride == 0 || k == last_level;
    let needs_probe = |k: usize| {
        is_diag(k) || (k >= 1 && is_diag(k - 1)) || (k + 1 <= last_level && is_diag(k + 1)) || k == 2
    };

    let u0: Vec<f64> = (0..n).map(|i| model.background[i] + v1[i]).collect();
    let mut lf = Leapfrog::new(model, u0, v2, dt)?;
    let c_run = sech_cross_constant(&model.coeffs, &model.potential, &model.background);
    let interval_idx: Vec<(usize, usize)> = settings
        .intervals
        .iter()
        .map(|&(a, b)| grid.index_range(a, b).ok_or_else(|| Error::param("intervals", "empty interval")))
        .collect::<Result<_>>()?;

    let mut probes: HashMap<usize, Probe> = HashMap::new();
    let mut pending: Vec<(usize, DiagnosticsRecord)> = Vec::new();
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut cum = (0.0, 0.0);
    let mut prev_rate: Option<(f64, f64, f64)> = None;
    let dy = grid.dy();

    for level in 0..=last_level + 1 {
        if level > 0 {
            lf.advance()?;
        }
        let t = level as f64 * dt;
        let snap_due = level <= last_level && snap_stride.is_some_and(|s| level % s == 0);
        if !(needs_probe(level) || snap_due) {
            continue;
        }
        let u = lf.u();
        let ut = lf.ut();
        let p1: Vec<f64> = (0..n).map(|i| u[i] - model.background[i]).collect();
        let d1 = frame.derivative(&p1);
        if snap_due {
            let stride = settings.snap_stride.max(1);
            let pick = |v: &[f64]| v.iter().step_by(stride).copied().collect::<Vec<f64>>();
            snapshots.push(Snapshot {
                t,
                y: pick(&grid.nodes()),
                u: pick(u),
                ut: pick(&ut),
            });
        }
        if !needs_probe(level) {
            continue;
        }
        probes.insert(
            level,
            Probe {
                virial: virial_with(&frame, &p1, &d1, &ut),
                sech: sech_cross(&frame, &p1, &ut),
            },
        );
        if level <= last_level && is_diag(level) {
            let norms = weighted_norms_with(&frame, &p1, &d1, &ut);
            let mut terms = virial_rate_with(
                &frame,
                &p1,
                &d1,
                &model.coeffs,
                &model.potential,
                &model.background,
                model.nonlinearity,
            );
            let sech_rate = sech_cross_rate_with(
                &frame,
                &p1,
                &d1,
                &ut,
                &model.coeffs,
                &model.potential,
                &model.background,
                model.nonlinearity,
            );
            let mut sech_damping = 0.0;
            if !model.sponge.is_off() {
                let (dv, ds) = damping_rates(&frame, &p1, &d1, &ut, &model.sponge.gamma);
                terms.damping = dv;
                sech_damping = ds;
            }
            let local = interval_idx
                .iter()
                .map(|&(lo, hi)| {
                    let h1: Vec<f64> = (0..n).map(|i| p1[i] * p1[i] + d1[i] * d1[i]).collect();
                    let l2: Vec<f64> = ut.iter().map(|v| v * v).collect();
                    trapezoid_range(&h1, dy, lo, hi).sqrt() + trapezoid_range(&l2, dy, lo, hi).sqrt()
                })
                .collect();
            let full = norms.h1w_v1 + norms.l2w_v2;
            if let Some((t0, f0, v0)) = prev_rate {
                cum.0 += 0.5 * (t - t0) * (f0 + full);
                cum.1 += 0.5 * (t - t0) * (v0 + norms.h1w_v1);
            }
            prev_rate = Some((t, full, norms.h1w_v1));
            let orbital = trapezoid_with(model.exec, n, dy, |i| p1[i] * p1[i] + d1[i] * d1[i]).sqrt()
                + trapezoid_with(model.exec, n, dy, |i| ut[i] * ut[i]).sqrt();
            let even_part = model.exec.max(n, |i| {
                let j = grid.mirror(i);
                (0.5 * (p1[i] + p1[j])).abs().max((0.5 * (ut[i] + ut[j])).abs())
            });
            let record = DiagnosticsRecord {
                t,
                energy: model.energy(u, &ut),
                virial: probes[&level].virial,
                didt_fd: f64::NAN,
                didt_formula: terms.total,
                h1w_v1: norms.h1w_v1,
                l2w_v1: norms.l2w_v1,
                l2w_v2: norms.l2w_v2,
                sech_cross: probes[&level].sech,
                sech_rate_fd: f64::NAN,
                sech_rate_formula: sech_rate,
                sech_rate_damping: sech_damping,
                sech_lower: norms.l2w_v2 - c_run * norms.h1w_v1,
                cum_integral: cum.0,
                cum_v1: cum.1,
                local,
                terms,
                orbital,
                even_part,
            };
            pending.push((level, record));
        }
        // Close records whose finite differences are now available.
        let mut still = Vec::new();
        for (k, mut rec) in pending.drain(..) {
            let fd = |get: &dyn Fn(&Probe) -> f64| -> Option<f64> {
                if k == 0 {
                    let (a, b, c) = (probes.get(&0)?, probes.get(&1)?, probes.get(&2)?);
                    Some((-3.0 * get(a) + 4.0 * get(b) - get(c)) / (2.0 * dt))
                } else {
                    let (a, b) = (probes.get(&(k - 1))?, probes.get(&(k + 1))?);
                    Some((get(b) - get(a)) / (2.0 * dt))
                }
            };
            match (fd(&|p| p.virial), fd(&|p| p.sech)) {
                (Some(di), Some(ds)) => {
                    rec.didt_fd = di;
                    rec.sech_rate_fd = ds;
                    records.push(rec);
                }
                _ => still.push((k, rec)),
            }
        }
        pending = still;
        let oldest = pending.iter().map(|(k, _)| *k).min().unwrap_or(level).min(level);
        probes.retain(|k, _| *k + 1 >= oldest || *k <= 2 && oldest <= 2);
    }

    let summary = summarize(&records, &settings.intervals)?;
    Ok(RunOutput {
        dt,
        steps: last_level,
        records,
        snapshots,
        summary,
        background_energy: model.background_energy(),
        omega_tail: model.omega_tail,
        c_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::Profile;
    use std::f64::consts::PI;

    #[test]
    fn vacuum_is_an_exact_equilibrium() {
        let g = Grid::with_spacing(10.0, 0.05).unwrap();
        let m = Model::constant(g.clone(), &CoefficientField::flat(), Potential::SineGordon, 2.0 * PI).unwrap();
        let zero = vec![0.0; g.len()];
        let mut lf = Leapfrog::new(&m, vec![2.0 * PI; g.len()], &zero, 0.02).unwrap();
        for _ in 0..200 {
            lf.advance().unwrap();
        }
        assert!(lf.u().iter().all(|u| *u == 2.0 * PI));
        assert_eq!(m.energy(lf.u(), &lf.ut()), 0.0);
    }

    #[test]
    fn cfl_violations_are_rejected() {
        let g = Grid::with_spacing(10.0, 0.05).unwrap();
        let m = Model::constant(g.clone(), &CoefficientField::flat(), Potential::SineGordon, 0.0).unwrap();
        let z = vec![0.0; g.len()];
        assert!(matches!(Leapfrog::new(&m, z.clone(), &z, 0.03), Err(Error::Cfl { .. })));
        assert!(matches!(m.time_step(0.5), Err(Error::Cfl { .. })));
    }

    #[test]
    fn sponge_profile_shape() {
        let g = Grid::with_spacing(80.0, 0.01).unwrap();
        let s = SpongeProfile::new(&g, 0.2, 1.0).unwrap();
        for i in 0..g.len() {
            let y = g.y(i);
            if y.abs() <= 48.0 {
                assert_eq!(s.gamma[i], 0.0);
            }
            assert!(s.gamma[i] >= 0.0 && s.gamma[i] <= 1.0);
        }
        assert_eq!(s.gamma[0], 1.0);
        // C^1: neighbouring differences stay small.
        let jump = s.gamma.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        assert!(jump < 1e-3);
    }

    #[test]
    fn weight_of_sech_squared_drift() {
        let g = Grid::with_spacing(40.0, 0.01).unwrap();
        let f = CoefficientField::new(Profile::Sech2 { amp: 1.0, scale: 1.0 }, Profile::Zero);
        let m = Model::constant(g.clone(), &f, Potential::SineGordon, 0.0).unwrap();
        let ratio = m.omega[g.len() - 1] / m.omega[0];
        assert!((ratio - 2f64.exp()).abs() < 1e-6 * 2f64.exp());
    }

    #[test]
    fn initial_data_is_normalized_and_has_parity() {
        let g = Grid::with_spacing(20.0, 0.01).unwrap();
        let spec = InitialData {
            family: DataFamily::RandomSpline { bumps: 4 },
            eps: 0.01,
            parity: Parity::Odd,
        };
        let (v1, v2) = spec.generate(&g, 7).unwrap();
        assert!((h1_norm(&g, &v1) + l2_norm(&g, &v2) - 0.01).abs() < 1e-12);
        for i in 0..g.len() {
            let j = g.mirror(i);
            assert_eq!(v1[i], -v1[j]);
            assert_eq!(v2[i], -v2[j]);
        }
        let again = spec.generate(&g, 7).unwrap();
        assert_eq!(again.0, v1);
        let (z1, z2) = InitialData::zero().generate(&g, 1).unwrap();
        assert!(z1.iter().chain(&z2).all(|v| *v == 0.0));
    }

    #[test]
    fn bspline_is_a_partition_of_unity() {
        for k in 0..20 {
            let t = k as f64 / 20.0;
            let s: f64 = (-3..=3).map(|j| bspline(t - j as f64)).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }
}
