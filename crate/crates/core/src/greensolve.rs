//! Jost solutions, Wronskian and Green's function of
//! `L = -d^2 - b d + (m^2 - sigma) - c`, and the Picard construction of the
//! near-constant steady state `U = xi + U_delta`.
//!
//! Jost solutions are stored with their exponential factor removed:
//! `Y+ = e^{-m y} (p, q)` and `Y- = e^{m y} (r, s)`, which keeps both well
//! scaled over the whole grid and lets the Green's kernel be applied with
//! bounded running sums.

use serde::{Deserialize, Serialize};

use crate::coeffs::{fit_decay, CoefficientField};
use crate::error::{Error, Result};
use crate::grid::{self, Grid};
use crate::potentials::{nonlinear_remainder, Potential, VacuumInfo};

const OVERFLOW: f64 = 1e12;
const SUBSTEPS: usize = 4;

/// Jost pair on a grid, in scaled form.
#[derive(Clone, Debug)]
pub struct JostPair {
    pub grid: Grid,
    /// `m~ = sqrt(m^2 - sigma)`.
    pub mass: f64,
    pub sigma: f64,
    /// `e^{m~ y} Y+` and `e^{m~ y} Y+'`.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// `e^{-m~ y} Y-` and `e^{-m~ y} Y-'`.
    pub r: Vec<f64>,
    pub s: Vec<f64>,
}

impl JostPair {
    pub fn y_plus(&self, i: usize) -> (f64, f64) {
        let e = (-self.mass * self.grid.y(i)).exp();
        (e * self.p[i], e * self.q[i])
    }

    pub fn y_minus(&self, i: usize) -> (f64, f64) {
        let e = (self.mass * self.grid.y(i)).exp();
        (e * self.r[i], e * self.s[i])
    }
}

fn rk4<F>(f: F, y0: f64, h: f64, state: (f64, f64)) -> (f64, f64)
where
    F: Fn(f64, f64, f64) -> (f64, f64),
{
    let (a, b) = state;
    let k1 = f(y0, a, b);
    let k2 = f(y0 + 0.5 * h, a + 0.5 * h * k1.0, b + 0.5 * h * k1.1);
    let k3 = f(y0 + 0.5 * h, a + 0.5 * h * k2.0, b + 0.5 * h * k2.1);
    let k4 = f(y0 + h, a + h * k3.0, b + h * k3.1);
    (
        a + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        b + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Coefficients must be negligible at the truncation points for the pure
/// exponential start data to be accurate.
fn check_tails(field: &CoefficientField, grid: &Grid, mass2: f64) -> Result<()> {
    let limit = 1e-10 * mass2;
    let l = grid.half_width();
    let c = grid.sample(|y| field.c(y));
    let decay = fit_decay(grid, &c)?;
    if !decay.is_negligible() {
        if !(decay.rate > 0.0) {
            return Err(Error::NonDecaying(format!(
                "fitted decay rate of c is {:.3e}",
                decay.rate
            )));
        }
        let tail = decay.envelope * (-decay.rate * l).exp();
        if tail >= limit {
            return Err(Error::NonDecaying(format!(
                "K e^(-k L) = {tail:.3e} is not below 1e-10 m^2 at L = {l}"
            )));
        }
    }
    for y in [-l, l] {
        let (b, c) = (field.b(y).abs(), field.c(y).abs());
        if b.max(c) >= limit {
            return Err(Error::NonDecaying(format!(
                "|b|, |c| = {b:.3e}, {c:.3e} at y = {y}"
            )));
        }
    }
    Ok(())
}

/// Integrate the Jost solutions inward from `+-L` with RK4 at step `dy/4`.
pub fn solve_jost(field: &CoefficientField, grid: &Grid, mass: f64, sigma: f64) -> Result<JostPair> {
    if !(sigma <= 0.0) {
        return Err(Error::param("sigma", "spectral shift must be <= 0"));
    }
    let m2 = mass * mass - sigma;
    if !(mass > 0.0 && m2 > 0.0) {
        return Err(Error::param("mass", "m^2 - sigma must be positive"));
    }
    check_tails(field, grid, mass * mass)?;
    let mt = m2.sqrt();
    let n = grid.len();
    let h = grid.dy() / SUBSTEPS as f64;

    let plus = |y: f64, p: f64, q: f64| (mt * p + q, (mt - field.b(y)) * q + (m2 - field.c(y)) * p);
    let minus = |y: f64, r: f64, s: f64| (-mt * r + s, -(mt + field.b(y)) * s + (m2 - field.c(y)) * r);

    let (mut p, mut q) = (vec![0.0; n], vec![0.0; n]);
    p[n - 1] = 1.0;
    q[n - 1] = -mt;
    for i in (0..n - 1).rev() {
        let y1 = grid.y(i + 1);
        let mut st = (p[i + 1], q[i + 1]);
        for j in 0..SUBSTEPS {
            st = rk4(plus, y1 - j as f64 * h, -h, st);
        }
        if !(st.0.abs() < OVERFLOW && st.1.abs() < OVERFLOW) {
            return Err(Error::Overflow { y: grid.y(i) });
        }
        p[i] = st.0;
        q[i] = st.1;
    }

    let (mut r, mut s) = (vec![0.0; n], vec![0.0; n]);
    r[0] = 1.0;
    s[0] = mt;
    for i in 1..n {
        let y0 = grid.y(i - 1);
        let mut st = (r[i - 1], s[i - 1]);
        for j in 0..SUBSTEPS {
            st = rk4(minus, y0 + j as f64 * h, h, st);
        }
        if !(st.0.abs() < OVERFLOW && st.1.abs() < OVERFLOW) {
            return Err(Error::Overflow { y: grid.y(i) });
        }
        r[i] = st.0;
        s[i] = st.1;
    }

    Ok(JostPair {
        grid: grid.clone(),
        mass: mt,
        sigma,
        p,
        q,
        r,
        s,
    })
}

/// Wronskian samples and the Abel-formula consistency check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbelReport {
    /// `W = Y- Y+' - Y-' Y+` at every node.
    pub w: Vec<f64>,
    pub w0: f64,
    /// `|W(0)| / (|Y-(0)| |Y+(0)|)`, the degeneracy measure.
    pub normalized_w0: f64,
    /// `max |W(y) - W(0) exp(-int_0^y b)| / |W(0)|`.
    pub deviation: f64,
}

/// Since `W' = -b W`, Abel's formula reads `W(y) = W(0) exp(-int_0^y b)`.
pub fn wronskian(jost: &JostPair, field: &CoefficientField) -> AbelReport {
    let g = &jost.grid;
    let n = g.len();
    let w: Vec<f64> = (0..n).map(|i| jost.r[i] * jost.q[i] - jost.s[i] * jost.p[i]).collect();
    let c = g.center();
    let w0 = w[c];
    let norm = |a: f64, b: f64| (a * a + b * b).sqrt();
    let normalized_w0 = w0.abs() / (norm(jost.r[c], jost.s[c]) * norm(jost.p[c], jost.q[c]));
    let integral = integral_from_center(g, |y| field.b(y));
    let deviation = (0..n)
        .map(|i| (w[i] - w0 * (-integral[i]).exp()).abs() / w0.abs())
        .fold(0.0, f64::max);
    AbelReport {
        w,
        w0,
        normalized_w0,
        deviation,
    }
}

/// `int_0^{y_i} f` by per-cell Simpson on the closed form.
pub(crate) fn integral_from_center(g: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = g.len();
    let dy = g.dy();
    let cell = |i: usize| {
        let (a, b) = (g.y(i), g.y(i + 1));
        dy / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    };
    let c = g.center();
    let mut out = vec![0.0; n];
    for i in c..n - 1 {
        out[i + 1] = out[i] + cell(i);
    }
    for i in (0..c).rev() {
        out[i] = out[i + 1] - cell(i);
    }
    out
}

/// Green's operator of `L - sigma`.
#[derive(Clone, Debug)]
pub struct GreenOperator {
    pub jost: JostPair,
    pub abel: AbelReport,
    degeneracy_threshold: f64,
    decay: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenOptions {
    pub degeneracy_threshold: f64,
    /// Retry with a spectral shift when the Wronskian is degenerate.
    pub allow_shift: bool,
}

impl Default for GreenOptions {
    fn default() -> Self {
        GreenOptions {
            degeneracy_threshold: 1e-6,
            allow_shift: true,
        }
    }
}

/// `sigma = -min(0.1, m^2 / 10)`.
pub fn default_shift(mass: f64) -> f64 {
    -(0.1f64).min(mass * mass / 10.0)
}

impl GreenOperator {
    pub fn new(jost: JostPair, field: &CoefficientField, degeneracy_threshold: f64) -> Self {
        let abel = wronskian(&jost, field);
        let decay = (-jost.mass * jost.grid.dy()).exp();
        GreenOperator {
            jost,
            abel,
            degeneracy_threshold,
            decay,
        }
    }

    /// Unshifted operator, or the shifted one if the Wronskian degenerates.
    pub fn build(field: &CoefficientField, grid: &Grid, mass: f64, opts: GreenOptions) -> Result<Self> {
        Self::build_with_shift(field, grid, mass, 0.0, opts)
    }

    pub fn build_with_shift(
        field: &CoefficientField,
        grid: &Grid,
        mass: f64,
        sigma: f64,
        opts: GreenOptions,
    ) -> Result<Self> {
        let op = GreenOperator::new(solve_jost(field, grid, mass, sigma)?, field, opts.degeneracy_threshold);
        if op.is_degenerate() && sigma == 0.0 && opts.allow_shift {
            let shifted = solve_jost(field, grid, mass, default_shift(mass))?;
            return Ok(GreenOperator::new(shifted, field, opts.degeneracy_threshold));
        }
        Ok(op)
    }

    pub fn sigma(&self) -> f64 {
        self.jost.sigma
    }

    pub fn grid(&self) -> &Grid {
        &self.jost.grid
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.abel.normalized_w0 >= self.degeneracy_threshold)
    }

    /// `g = int G(., w) eta(w) dw` and `g'`, with
    /// `G(y, w) = -Y-(min) Y+(max) / W(w)`.
    pub fn apply(&self, eta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let j = &self.jost;
        let n = j.grid.len();
        if eta.len() != n {
            return Err(Error::Malformed("eta does not match the grid".into()));
        }
        if self.is_degenerate() && self.sigma() == 0.0 {
            return Err(Error::DegenerateWronskian {
                normalized: self.abel.normalized_w0,
            });
        }
        let dy = j.grid.dy();
        let e = self.decay;
        let w = &self.abel.w;
        let fm = |i: usize| j.r[i] * eta[i] / w[i];
        let fp = |i: usize| j.p[i] * eta[i] / w[i];

        // a_i = int_{-L}^{y_i} e^{-m(y_i - w)} r eta / W
        let mut a = vec![0.0; n];
        for i in 0..n - 1 {
            a[i + 1] = e * a[i] + 0.5 * dy * (e * fm(i) + fm(i + 1));
        }
        // b_i = int_{y_i}^{L} e^{-m(w - y_i)} p eta / W
        let mut b = vec![0.0; n];
        for i in (0..n - 1).rev() {
            b[i] = e * b[i + 1] + 0.5 * dy * (fp(i) + e * fp(i + 1));
        }
        let g = (0..n).map(|i| -(j.p[i] * a[i] + j.r[i] * b[i])).collect();
        let dg = (0..n).map(|i| -(j.q[i] * a[i] + j.s[i] * b[i])).collect();
        Ok((g, dg))
    }
}

pub fn greens_apply(op: &GreenOperator, eta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    op.apply(eta)
}

/// Second-order discrete `-g'' - b g' + (m^2 - sigma - c) g` at interior
/// nodes (zero at the ends).
pub fn apply_operator(grid: &Grid, field: &CoefficientField, mass2: f64, g: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let dy = grid.dy();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let y = grid.y(i);
        let d2 = (g[i + 1] - 2.0 * g[i] + g[i - 1]) / (dy * dy);
        let d1 = (g[i + 1] - g[i - 1]) / (2.0 * dy);
        out[i] = -d2 - field.b(y) * d1 + (mass2 - field.c(y)) * g[i];
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyOptions {
    pub half_width: f64,
    pub dy: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub stall_ratio: f64,
    pub stall_window: usize,
    pub green: GreenOptions,
    /// `|y|` window for the decay-rate regression of `|U_delta|`.
    pub fit_window: (f64, f64),
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            half_width: 60.0,
            dy: 0.00125,
            tol: 1e-12,
            max_iter: 100,
            stall_ratio: 0.9,
            stall_window: 5,
            green: GreenOptions::default(),
            fit_window: (10.0, 30.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub xi: f64,
    pub grid: Grid,
    pub u_delta: Vec<f64>,
    pub du_delta: Vec<f64>,
    /// Discrete residual of `-U'' - b U' - c U + F'(U)`.
    pub residual: Vec<f64>,
    pub residual_sup: f64,
    /// `||U_delta||_{L1} + ||U_delta||_{Linf}`.
    pub x_norm: f64,
    /// `||T 0||_X`, the measured `C0 delta`.
    pub first_iterate_norm: f64,
    /// Sup-change of each Picard map.
    pub changes: Vec<f64>,
    /// Last ratio of successive changes (0 when fewer than two maps ran).
    pub contraction_ratio: f64,
    pub iterations: usize,
    pub sigma: f64,
    /// Fitted exponential rate of `|U_delta|` over the fit window.
    pub decay_rate: f64,
    pub abel_deviation: Option<f64>,
    pub normalized_w0: Option<f64>,
    /// Advisory hypotheses: `|xi|` and `||c||_X`.
    pub xi_size: f64,
    pub c_size: f64,
}

impl SteadyState {
    pub fn in_contraction_ball(&self) -> bool {
        self.x_norm <= 2.0 * self.first_iterate_norm + 1e-15
    }

    /// `U_delta` and `U_delta'` on another grid: cubic Hermite inside,
    /// exponential tail `e^{-m(|y| - L)}` outside.
    pub fn resample(&self, target: &Grid, mass: f64) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let l = g.half_width();
        let dy = g.dy();
        let last = g.len() - 1;
        let eval = |y: f64| -> (f64, f64) {
            if y >= l || y <= -l {
                let i = if y > 0.0 { last } else { 0 };
                let e = (-mass * (y.abs() - l)).exp();
                let v = self.u_delta[i] * e;
                return (v, -mass * y.signum() * v);
            }
            let k = (((y + l) / dy).floor() as usize).min(last - 1);
            let (x0, x1) = (g.y(k), g.y(k + 1));
            let args = (x0, x1, self.u_delta[k], self.u_delta[k + 1], self.du_delta[k], self.du_delta[k + 1]);
            (
                grid::hermite(args.0, args.1, args.2, args.3, args.4, args.5, y),
                grid::hermite_slope(args.0, args.1, args.2, args.3, args.4, args.5, y),
            )
        };
        let pairs: Vec<(f64, f64)> = (0..target.len()).map(|i| eval(target.y(i))).collect();
        pairs.into_iter().unzip()
    }
}

fn x_norm(v: &[f64], dy: f64) -> f64 {
    let l1 = grid::trapezoid_with(crate::Exec::Sequential, v.len(), dy, |i| v[i].abs());
    l1 + v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Fitted rate `k` of `|v| ~ e^{-k|y|}` over `lo <= |y| <= hi`.
pub fn fitted_rate(grid: &Grid, v: &[f64], lo: f64, hi: f64) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (mut u, mut w) = (Vec::new(), Vec::new());
    for (i, vi) in v.iter().enumerate() {
        let ay = grid.y(i).abs();
        if ay >= lo && ay <= hi && vi.abs() > 1e-14 * scale {
            u.push(ay);
            w.push(vi.abs().ln());
        }
    }
    match grid::linear_fit(&u, &w) {
        Some((_, slope)) => -slope,
        None => f64::INFINITY,
    }
}

fn residual(
    grid: &Grid,
    field: &CoefficientField,
    potential: &Potential,
    xi: f64,
    u_delta: &[f64],
) -> Vec<f64> {
    let n = grid.len();
    let dy = grid.dy();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let y = grid.y(i);
        let d2 = (u_delta[i + 1] - 2.0 * u_delta[i] + u_delta[i - 1]) / (dy * dy);
        let d1 = (u_delta[i + 1] - u_delta[i - 1]) / (2.0 * dy);
        let u = xi + u_delta[i];
        // F'(xi) = 0 is subtracted to drop its rounding error.
        out[i] = -d2 - field.b(y) * d1 - field.c(y) * u + (potential.d1(u) - potential.d1(xi));
    }
    out
}

/// Picard iteration `U <- G_sigma[c xi + N(U) - sigma U]` from `U = 0`.
pub fn construct_steady_state(
    field: &CoefficientField,
    potential: &Potential,
    vacuum: &VacuumInfo,
    opts: &SteadyOptions,
) -> Result<SteadyState> {
    let grid = Grid::with_spacing(opts.half_width, opts.dy)?;
    field.validate(&grid)?;
    let xi = vacuum.xi;
    let c = grid.sample(|y| field.c(y));
    let forcing: Vec<f64> = c.iter().map(|ci| ci * xi).collect();
    let forcing_zero = forcing.iter().all(|f| *f == 0.0);
    let dy = grid.dy();

    let op = match GreenOperator::build(field, &grid, vacuum.mass, opts.green) {
        Ok(op) => Some(op),
        // With no forcing the fixed point is zero and the operator is not needed.
        Err(e) if forcing_zero && e.is_numerical() => None,
        Err(e) => return Err(e),
    };

    let base = SteadyState {
        xi,
        grid: grid.clone(),
        u_delta: vec![0.0; grid.len()],
        du_delta: vec![0.0; grid.len()],
        residual: vec![0.0; grid.len()],
        residual_sup: 0.0,
        x_norm: 0.0,
        first_iterate_norm: 0.0,
        changes: Vec::new(),
        contraction_ratio: 0.0,
        iterations: 0,
        sigma: op.as_ref().map_or(0.0, |o| o.sigma()),
        decay_rate: f64::INFINITY,
        abel_deviation: op.as_ref().map(|o| o.abel.deviation),
        normalized_w0: op.as_ref().map(|o| o.abel.normalized_w0),
        xi_size: xi.abs(),
        c_size: x_norm(&c, dy),
    };
    if forcing_zero {
        let residual = residual(&grid, field, potential, xi, &base.u_delta);
        let residual_sup = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        return Ok(SteadyState {
            residual,
            residual_sup,
            ..base
        });
    }
    let op = op.expect("operator exists when forcing is nonzero");

    match picard(&op, &grid, field, potential, xi, &forcing, opts, base.clone()) {
        Err(Error::NonContraction { .. }) if op.sigma() < 0.0 => {
            let halved = op.sigma() / 2.0;
            let op2 = GreenOperator::build_with_shift(field, &grid, vacuum.mass, halved, opts.green)?;
            let base = SteadyState {
                sigma: op2.sigma(),
                abel_deviation: Some(op2.abel.deviation),
                normalized_w0: Some(op2.abel.normalized_w0),
                ..base
            };
            picard(&op2, &grid, field, potential, xi, &forcing, opts, base)
        }
        other => other,
    }
}

#[allow(clippy::too_many_arguments)]
fn picard(
    op: &GreenOperator,
    grid: &Grid,
    field: &CoefficientField,
    potential: &Potential,
    xi: f64,
    forcing: &[f64],
    opts: &SteadyOptions,
    base: SteadyState,
) -> Result<SteadyState> {
    let n = grid.len();
    let dy = grid.dy();
    let sigma = op.sigma();
    let mut u = vec![0.0; n];
    let mut du = vec![0.0; n];
    let mut changes = Vec::new();
    let mut first_norm = 0.0;
    let mut stalled = 0;
    let mut ratio = 0.0;
    let mut converged = false;
    for it in 0..opts.max_iter {
        let rhs: Vec<f64> = (0..n)
            .map(|i| forcing[i] + nonlinear_remainder(potential, xi, u[i]) - sigma * u[i])
            .collect();
        let (next, dnext) = op.apply(&rhs)?;
        let change = sup_diff(&next, &u);
        if !change.is_finite() {
            return Err(Error::NonContraction {
                ratio: f64::INFINITY,
                window: it + 1,
            });
        }
        if it == 0 {
            first_norm = x_norm(&next, dy);
        }
        if let Some(prev) = changes.last().copied() {
            ratio = if prev > 0.0 { change / prev } else { 0.0 };
            if ratio >= opts.stall_ratio && change >= opts.tol {
                stalled += 1;
                if stalled >= opts.stall_window {
                    return Err(Error::NonContraction {
                        ratio,
                        window: opts.stall_window,
                    });
                }
            } else {
                stalled = 0;
            }
        }
        changes.push(change);
        u = next;
        du = dnext;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            iterations: changes.len(),
            change: changes.last().copied().unwrap_or(f64::NAN),
        });
    }
    let residual = residual(grid, field, potential, xi, &u);
    let residual_sup = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let iterations = changes.iter().filter(|c| **c >= opts.tol).count();
    let decay_rate = fitted_rate(grid, &u, opts.fit_window.0, opts.fit_window.1);
    Ok(SteadyState {
        x_norm: x_norm(&u, dy),
        u_delta: u,
        du_delta: du,
        residual,
        residual_sup,
        first_iterate_norm: first_norm,
        changes,
        contraction_ratio: ratio,
        iterations,
        decay_rate,
        ..base
    })
}

/// Weighted sup-norms `sup e^{k|y|} |U_delta|`, `sup e^{k|y|} |U_delta'|`
/// over the trusted window `|y| <= L/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub k: f64,
    pub sup_u: f64,
    pub sup_du: f64,
    pub fitted_rate: f64,
    /// Set when `k >= m~`, where the bound is not guaranteed.
    pub warning: Option<String>,
}

pub fn verify_decay(state: &SteadyState, k: f64, mass: f64) -> DecayReport {
    let g = &state.grid;
    let half = 0.5 * g.half_width();
    let mt = (mass * mass - state.sigma).sqrt();
    let (mut sup_u, mut sup_du) = (0.0f64, 0.0f64);
    for i in 0..g.len() {
        let ay = g.y(i).abs();
        if ay <= half {
            let w = (k * ay).exp();
            sup_u = sup_u.max(w * state.u_delta[i].abs());
            sup_du = sup_du.max(w * state.du_delta[i].abs());
        }
    }
    let warning = (k >= mt).then(|| {
        format!("k = {k} is not below m = {mt}; the weighted bound is not guaranteed (the hypothesis is stated as k < F''(xi), the construction needs k < m)")
    });
    DecayReport {
        k,
        sup_u,
        sup_du,
        fitted_rate: state.decay_rate,
        warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::Profile;
    use crate::potentials::vacuum_info;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::with_spacing(20.0, 0.01).unwrap()
    }

    #[test]
    fn free_jost_solutions_are_exponentials() {
        let g = grid();
        let j = solve_jost(&CoefficientField::flat(), &g, 1.0, 0.0).unwrap();
        for i in (0..g.len()).step_by(97) {
            let y = g.y(i);
            let (yp, dyp) = j.y_plus(i);
            assert!((yp - (-y).exp()).abs() <= 1e-9 * (-y).exp());
            assert!((dyp + (-y).exp()).abs() <= 1e-9 * (-y).exp());
        }
        let w = wronskian(&j, &CoefficientField::flat());
        assert!(w.w.iter().all(|v| (v + 2.0).abs() < 1e-12));
        assert!((w.normalized_w0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_free_solution() {
        let g = grid();
        let j = solve_jost(&CoefficientField::flat(), &g, 1.0, -0.25).unwrap();
        let k = 1.25f64.sqrt();
        assert!((j.mass - k).abs() < 1e-15);
        for i in (0..g.len()).step_by(101) {
            let y = g.y(i);
            assert!((j.y_plus(i).0 - (-k * y).exp()).abs() <= 1e-9 * (-k * y).exp());
        }
    }

    #[test]
    fn abel_formula_with_drift() {
        let g = grid();
        let f = CoefficientField::new(Profile::Sech2 { amp: 1.0, scale: 1.0 }, Profile::Zero);
        let j = solve_jost(&f, &g, 1.0, 0.0).unwrap();
        let a = wronskian(&j, &f);
        assert!(a.deviation < 1e-6, "{}", a.deviation);
        for i in (0..g.len()).step_by(50) {
            let y = g.y(i);
            assert!((a.w[i] / a.w0 - (-y.tanh()).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_non_decaying_coefficients() {
        let f = CoefficientField::new(Profile::Zero, Profile::Constant { value: 0.3 });
        assert!(matches!(
            solve_jost(&f, &grid(), 1.0, 0.0),
            Err(Error::NonDecaying(_))
        ));
    }

    #[test]
    fn apply_inverts_free_operator_to_second_order() {
        let err = |dy: f64| {
            let g = Grid::with_spacing(20.0, dy).unwrap();
            let op = GreenOperator::build(&CoefficientField::flat(), &g, 1.0, GreenOptions::default()).unwrap();
            let eta = g.sample(|y| 1.0 / y.cosh());
            let (u, _) = op.apply(&eta).unwrap();
            let back = apply_operator(&g, &CoefficientField::flat(), 1.0, &u);
            (1..g.len() - 1).fold(0.0f64, |m, i| m.max((back[i] - eta[i]).abs()))
        };
        let (coarse, fine) = (err(0.01), err(0.005));
        assert!(coarse < 2e-5, "{coarse}");
        let order = (coarse / fine).log2();
        assert!((order - 2.0).abs() < 0.1, "observed order {order}");
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let g = grid();
        let op = GreenOperator::build(&CoefficientField::flat(), &g, 1.0, GreenOptions::default()).unwrap();
        let (z, dz) = op.apply(&vec![0.0; g.len()]).unwrap();
        assert!(z.iter().chain(&dz).all(|v| *v == 0.0));
    }

    #[test]
    fn zero_forcing_gives_zero_state() {
        let vac = vacuum_info(&Potential::SineGordon, 6.0).unwrap();
        let f = CoefficientField::new(Profile::TanhSech { amp: -0.1, scale: 1.0 }, Profile::Zero);
        let s = construct_steady_state(&f, &Potential::SineGordon, &vac, &SteadyOptions {
            dy: 0.01,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(s.iterations, 0);
        assert!(s.u_delta.iter().all(|v| *v == 0.0));
        assert!((s.xi - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn decay_gate_warns_above_mass() {
        let vac = vacuum_info(&Potential::SineGordon, 6.0).unwrap();
        let s = construct_steady_state(&CoefficientField::flat(), &Potential::SineGordon, &vac, &SteadyOptions {
            dy: 0.01,
            ..Default::default()
        })
        .unwrap();
        let r = verify_decay(&s, 1.5, 1.0);
        assert!(r.warning.is_some());
        assert_eq!((r.sup_u, r.sup_du), (0.0, 0.0));
        assert!(verify_decay(&s, 0.9, 1.0).warning.is_none());
    }

    #[test]
    fn near_eigenvalue_triggers_shift() {
        // -d^2 - alpha sech^2 has the eigenvalue -1 exactly at alpha = 2.
        let g = grid();
        let w0 = |alpha: f64| {
            let f = CoefficientField::new(Profile::Zero, Profile::Sech2 { amp: alpha, scale: 1.0 });
            let op = GreenOperator::new(solve_jost(&f, &g, 1.0, 0.0).unwrap(), &f, 1e-6);
            (op.abel.w0, op.abel.normalized_w0)
        };
        let (mut lo, mut hi) = (1.5, 2.5);
        assert!(w0(lo).0 * w0(hi).0 < 0.0);
        let mut alpha = 0.5 * (lo + hi);
        while w0(alpha).1 >= 1e-6 {
            if w0(alpha).0 * w0(lo).0 > 0.0 {
                lo = alpha;
            } else {
                hi = alpha;
            }
            alpha = 0.5 * (lo + hi);
        }
        assert!((alpha - 2.0).abs() < 1e-4, "alpha {alpha}");
        let f = CoefficientField::new(Profile::Zero, Profile::Sech2 { amp: alpha, scale: 1.0 });
        let op = GreenOperator::build(&f, &g, 1.0, GreenOptions::default()).unwrap();
        assert_eq!(op.sigma(), default_shift(1.0));
        assert!(!op.is_degenerate());
        let strict = GreenOptions {
            allow_shift: false,
            ..GreenOptions::default()
        };
        let op = GreenOperator::build(&f, &g, 1.0, strict).unwrap();
        assert!(matches!(op.apply(&vec![0.0; g.len()]), Err(Error::DegenerateWronskian { .. })));
    }
}
