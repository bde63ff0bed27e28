//! Coefficient functions `b(y)`, `c(y)`: parametric families with analytic
//! derivatives, tabulated data, the `x -> y` change of variables and the
//! admissibility checks on `(b, c)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid, Pchip};
use crate::potentials::Potential;

fn sech(x: f64) -> f64 {
    if x.abs() > 700.0 {
        0.0
    } else {
        1.0 / x.cosh()
    }
}

fn sgn(y: f64) -> f64 {
    if y > 0.0 {
        1.0
    } else if y < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn one() -> f64 {
    1.0
}

/// Closed-form coefficient profiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Profile {
    Zero,
    Constant { value: f64 },
    /// `amp * sech(y / scale)`
    Sech {
        amp: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `amp * sech^2(y / scale)`
    Sech2 {
        amp: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `amp * exp(-rate |y|)`
    Exp { amp: f64, rate: f64 },
    /// `amp * exp(-(y / width)^2)`
    Gaussian {
        amp: f64,
        #[serde(default = "one")]
        width: f64,
    },
    /// `amp * tanh(y / scale)`
    Tanh {
        amp: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `amp * tanh(y / scale) sech(y / scale)`
    TanhSech {
        amp: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `amp * y exp(-y^2)`
    YGauss { amp: f64 },
    /// `slope * y`
    Linear { slope: f64 },
    /// `16 y` on `|y| < 1/lambda`, `sgn(y) (16/lambda) exp(-(10/lambda)(|y| - 1/lambda))`
    /// outside, times `factor`.
    LinearCoreDecay {
        lambda: f64,
        #[serde(default = "one")]
        factor: f64,
    },
    /// `-8 lambda^4 sech(2 y / lambda)`
    DeepSech { lambda: f64 },
    Sum { terms: Vec<Profile> },
}

impl Profile {
    pub fn value(&self, y: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Constant { value } => *value,
            Profile::Sech { amp, scale } => amp * sech(y / scale),
            Profile::Sech2 { amp, scale } => amp * sech(y / scale).powi(2),
            Profile::Exp { amp, rate } => amp * (-rate * y.abs()).exp(),
            Profile::Gaussian { amp, width } => amp * (-(y / width).powi(2)).exp(),
            Profile::Tanh { amp, scale } => amp * (y / scale).tanh(),
            Profile::TanhSech { amp, scale } => amp * (y / scale).tanh() * sech(y / scale),
            Profile::YGauss { amp } => amp * y * (-y * y).exp(),
            Profile::Linear { slope } => slope * y,
            Profile::LinearCoreDecay { lambda, factor } => {
                let knee = 1.0 / lambda;
                factor
                    * if y.abs() <= knee {
                        16.0 * y
                    } else {
                        sgn(y) * (16.0 / lambda) * (-(10.0 / lambda) * (y.abs() - knee)).exp()
                    }
            }
            Profile::DeepSech { lambda } => -8.0 * lambda.powi(4) * sech(2.0 * y / lambda),
            Profile::Sum { terms } => terms.iter().map(|t| t.value(y)).sum(),
        }
    }

    /// Analytic derivative; at a kink the inner (small-`|y|`) branch is used.
    pub fn derivative(&self, y: f64) -> f64 {
        match self {
            Profile::Zero | Profile::Constant { .. } => 0.0,
            Profile::Sech { amp, scale } => {
                let s = y / scale;
                -amp / scale * sech(s) * s.tanh()
            }
            Profile::Sech2 { amp, scale } => {
                let s = y / scale;
                -2.0 * amp / scale * sech(s).powi(2) * s.tanh()
            }
            Profile::Exp { amp, rate } => -rate * sgn(y) * amp * (-rate * y.abs()).exp(),
            Profile::Gaussian { amp, width } => {
                -2.0 * y / (width * width) * amp * (-(y / width).powi(2)).exp()
            }
            Profile::Tanh { amp, scale } => amp / scale * sech(y / scale).powi(2),
            Profile::TanhSech { amp, scale } => {
                let s = y / scale;
                let (t, h) = (s.tanh(), sech(s));
                amp / scale * h * (h * h - t * t)
            }
            Profile::YGauss { amp } => amp * (1.0 - 2.0 * y * y) * (-y * y).exp(),
            Profile::Linear { slope } => *slope,
            Profile::LinearCoreDecay { lambda, factor } => {
                let knee = 1.0 / lambda;
                factor
                    * if y.abs() <= knee {
                        16.0
                    } else {
                        -(160.0 / (lambda * lambda))
                            * (-(10.0 / lambda) * (y.abs() - knee)).exp()
                    }
            }
            Profile::DeepSech { lambda } => {
                let s = 2.0 * y / lambda;
                16.0 * lambda.powi(3) * sech(s) * s.tanh()
            }
            Profile::Sum { terms } => terms.iter().map(|t| t.derivative(y)).sum(),
        }
    }

    /// Points where the profile is not C^1.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Profile::Exp { rate, .. } if *rate != 0.0 => vec![0.0],
            Profile::LinearCoreDecay { lambda, .. } => vec![-1.0 / lambda, 1.0 / lambda],
            Profile::Sum { terms } => terms.iter().flat_map(|t| t.kinks()).collect(),
            _ => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, "must be finite and positive"))
            }
        };
        match self {
            Profile::Sech { scale, .. }
            | Profile::Sech2 { scale, .. }
            | Profile::Tanh { scale, .. }
            | Profile::TanhSech { scale, .. } => positive("scale", *scale),
            Profile::Gaussian { width, .. } => positive("width", *width),
            Profile::Exp { rate, .. } => {
                if rate.is_finite() && *rate >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::param("rate", "must be finite and non-negative"))
                }
            }
            Profile::LinearCoreDecay { lambda, .. } | Profile::DeepSech { lambda } => positive("lambda", *lambda),
            Profile::Sum { terms } => terms.iter().try_for_each(Profile::validate),
            _ => Ok(()),
        }
    }
}

/// Tabulated samples on strictly increasing knots, interpolated monotonically
/// and zero outside the knot range.
#[derive(Clone, Debug)]
pub struct Table {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    value_interp: Pchip,
    slope_interp: Pchip,
}

impl Table {
    /// Derivative samples are second-order differences (one-sided at the ends).
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 3 || knots.len() != values.len() {
            return Err(Error::Malformed(
                "a table needs at least three aligned (y, value) rows".into(),
            ));
        }
        if values.iter().chain(&knots).any(|v| !v.is_finite()) {
            return Err(Error::Malformed("non-finite table entry".into()));
        }
        let slopes = nonuniform_diff(&knots, &values);
        let value_interp = Pchip::new(knots.clone(), values.clone())?;
        let slope_interp = Pchip::new(knots.clone(), slopes.clone())?;
        Ok(Table {
            knots,
            values,
            slopes,
            value_interp,
            slope_interp,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn inside(&self, y: f64) -> bool {
        let (lo, hi) = self.value_interp.range();
        y >= lo && y <= hi
    }

    pub fn value(&self, y: f64) -> f64 {
        if self.inside(y) {
            self.value_interp.eval(y)
        } else {
            0.0
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        if self.inside(y) {
            self.slope_interp.eval(y)
        } else {
            0.0
        }
    }
}

fn nonuniform_diff(x: &[f64], v: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        d[i] = (h0 * h0 * v[i + 1] - h1 * h1 * v[i - 1] + (h1 * h1 - h0 * h0) * v[i])
            / (h0 * h1 * (h0 + h1));
    }
    let one_sided = |i0: usize, i1: usize, i2: usize| {
        let (h0, h1) = (x[i1] - x[i0], x[i2] - x[i0]);
        // Quadratic through three points, differentiated at x[i0].
        let a = (v[i1] - v[i0]) / h0;
        let b = (v[i2] - v[i0]) / h1;
        (a * h1 - b * h0) / (h1 - h0)
    };
    d[0] = one_sided(0, 1, 2);
    d[n - 1] = one_sided(n - 1, n - 2, n - 3);
    d
}

/// One coefficient: closed form or table.
#[derive(Clone, Debug)]
pub enum Coefficient {
    Parametric(Profile),
    Tabulated(Table),
}

impl Coefficient {
    pub fn value(&self, y: f64) -> f64 {
        match self {
            Coefficient::Parametric(p) => p.value(y),
            Coefficient::Tabulated(t) => t.value(y),
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        match self {
            Coefficient::Parametric(p) => p.derivative(y),
            Coefficient::Tabulated(t) => t.derivative(y),
        }
    }

    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Coefficient::Parametric(p) => p.kinks(),
            Coefficient::Tabulated(_) => Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Parametric(Profile::Zero))
    }
}

impl From<Profile> for Coefficient {
    fn from(p: Profile) -> Self {
        Coefficient::Parametric(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    ParametricFamily,
    Tabulated,
}

/// The pair `(b, c)` in the `y` variable.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    pub b: Coefficient,
    pub c: Coefficient,
}

/// `b, c, b', c'` at the nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampled {
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub db: Vec<f64>,
    pub dc: Vec<f64>,
}

impl CoefficientField {
    pub fn new(b: impl Into<Coefficient>, c: impl Into<Coefficient>) -> Self {
        CoefficientField {
            b: b.into(),
            c: c.into(),
        }
    }

    pub fn flat() -> Self {
        CoefficientField::new(Profile::Zero, Profile::Zero)
    }

    /// The example family with `b` decaying exponentially off a linear core
    /// and `c = -8 lambda^4 sech(2y/lambda)`.
    pub fn vacuum_example(lambda: f64) -> Self {
        CoefficientField::new(
            Profile::LinearCoreDecay {
                lambda,
                factor: 1.0,
            },
            Profile::DeepSech { lambda },
        )
    }

    pub fn kind(&self) -> FieldKind {
        match (&self.b, &self.c) {
            (Coefficient::Parametric(_), Coefficient::Parametric(_)) => FieldKind::ParametricFamily,
            _ => FieldKind::Tabulated,
        }
    }

    pub fn b(&self, y: f64) -> f64 {
        self.b.value(y)
    }

    pub fn c(&self, y: f64) -> f64 {
        self.c.value(y)
    }

    pub fn db(&self, y: f64) -> f64 {
        self.b.derivative(y)
    }

    pub fn dc(&self, y: f64) -> f64 {
        self.c.derivative(y)
    }

    pub fn kinks(&self) -> Vec<f64> {
        let mut k = self.b.kinks();
        k.extend(self.c.kinks());
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    pub fn sample(&self, grid: &Grid) -> Sampled {
        Sampled {
            b: grid.sample(|y| self.b(y)),
            c: grid.sample(|y| self.c(y)),
            db: grid.sample(|y| self.db(y)),
            dc: grid.sample(|y| self.dc(y)),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for c in [&self.b, &self.c] {
            if let Coefficient::Parametric(p) = c {
                p.validate()?;
            }
        }
        let s = self.sample(grid);
        for (name, v) in [("b", &s.b), ("c", &s.c), ("b'", &s.db), ("c'", &s.dc)] {
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::Malformed(format!(
                    "{name} is not finite at y = {}",
                    grid.y(i)
                )));
            }
        }
        Ok(())
    }
}

/// Output of [`transform_to_y`].
#[derive(Clone, Debug)]
pub struct Transformed {
    pub field: CoefficientField,
    /// Uniform `y` nodes the field was resampled onto.
    pub y: Vec<f64>,
    /// Images `y(x_i)` of the input nodes.
    pub image: Vec<f64>,
    /// Transformed `b` at the input nodes, before resampling.
    pub b_image: Vec<f64>,
}

/// Change variables `y = int_0^x a^{-1/2}` for `a u_xx + b u_x + c u`.
///
/// The first-order coefficient becomes `a^{-1/2} (b - a_x / 2)` and `c` is
/// carried along characteristics. Both are resampled by monotone cubics onto a
/// uniform `y` grid with the same node count that contains `y = 0`.
pub fn transform_to_y(x: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> Result<Transformed> {
    let n = x.len();
    if n < 5 || a.len() != n || b.len() != n || c.len() != n {
        return Err(Error::Malformed(
            "x, a, b, c must be aligned with at least five samples".into(),
        ));
    }
    let dx = x[1] - x[0];
    if !(dx > 0.0) || x.windows(2).any(|w| ((w[1] - w[0]) - dx).abs() > 1e-9 * dx.abs().max(1.0)) {
        return Err(Error::Malformed("x grid must be uniform and increasing".into()));
    }
    if !(x[0] <= 0.0 && x[n - 1] >= 0.0) {
        return Err(Error::Malformed("x grid must contain x = 0".into()));
    }
    for (i, &ai) in a.iter().enumerate() {
        if !(ai > 0.0) {
            return Err(Error::NonPositiveA { x: x[i], value: ai });
        }
    }
    let g: Vec<f64> = a.iter().map(|v| v.powf(-0.5)).collect();
    let dg = grid::diff8(&g, dx);
    let da = grid::diff8(a, dx);

    // Cell integrals of the cubic Hermite interpolant of a^{-1/2}: fourth order.
    let mut image = Vec::with_capacity(n);
    let mut acc = 0.0;
    image.push(0.0);
    for i in 0..n - 1 {
        acc += 0.5 * dx * (g[i] + g[i + 1]) + dx * dx / 12.0 * (dg[i] - dg[i + 1]);
        image.push(acc);
    }
    let origin = {
        let k = ((-x[0]) / dx).floor() as usize;
        let k = k.min(n - 2);
        grid::hermite(x[k], x[k + 1], image[k], image[k + 1], g[k], g[k + 1], 0.0)
    };
    image.iter_mut().for_each(|v| *v -= origin);

    let x_span = x[n - 1] - x[0];
    let span = image[n - 1] - image[0];
    if !(span > 1e-3 * x_span) {
        return Err(Error::RangeCollapse { span, x_span });
    }

    let b_image: Vec<f64> = (0..n).map(|i| g[i] * (b[i] - 0.5 * da[i])).collect();

    let h = span / (n - 1) as f64;
    let k_lo = (image[0] / h).ceil() as i64;
    let k_hi = (image[n - 1] / h).floor() as i64;
    let y: Vec<f64> = (k_lo..=k_hi).map(|k| k as f64 * h).collect();
    let bi = Pchip::new(image.clone(), b_image.clone())?;
    let ci = Pchip::new(image.clone(), c.to_vec())?;
    let bt = Table::new(y.clone(), y.iter().map(|&t| bi.eval(t)).collect())?;
    let ct = Table::new(y.clone(), y.iter().map(|&t| ci.eval(t)).collect())?;
    Ok(Transformed {
        field: CoefficientField::new(Coefficient::Tabulated(bt), Coefficient::Tabulated(ct)),
        y,
        image,
        b_image,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    VacuumCoercive,
    SignConditions,
    Orbital,
    ExpDecay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub condition: Condition,
    pub pass: bool,
    pub worst_margin: f64,
    pub worst_location: f64,
    /// The three smallest `(y, margin)` pairs, ascending by margin.
    pub smallest: Vec<(f64, f64)>,
    /// Kinks of the coefficients inside the grid; nodes sitting on one are
    /// not evaluated.
    pub kinks: Vec<f64>,
    pub skipped_nodes: Vec<f64>,
    /// `lambda` for the vacuum check, `mu` for the orbital check.
    pub parameter: Option<f64>,
}

const KINK_TOL: f64 = 1e-12;

fn summarize(
    condition: Condition,
    grid: &Grid,
    field: &CoefficientField,
    parameter: Option<f64>,
    skip_origin: bool,
    margin: impl Fn(f64) -> f64,
) -> AdmissibilityReport {
    let kinks: Vec<f64> = field
        .kinks()
        .into_iter()
        .filter(|k| k.abs() <= grid.half_width())
        .collect();
    let mut skipped = Vec::new();
    let mut margins: Vec<(f64, f64)> = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let y = grid.y(i);
        if skip_origin && y == 0.0 {
            continue;
        }
        if kinks.iter().any(|k| (k - y).abs() <= KINK_TOL) {
            skipped.push(y);
            continue;
        }
        margins.push((y, margin(y)));
    }
    // Stable sort keeps the leftmost node among ties.
    let mut sorted = margins.clone();
    sorted.sort_by(|p, q| p.1.total_cmp(&q.1));
    let (worst_location, worst_margin) = sorted.first().copied().unwrap_or((0.0, 0.0));
    AdmissibilityReport {
        condition,
        pass: worst_margin >= 0.0,
        worst_margin,
        worst_location,
        smallest: sorted.into_iter().take(3).collect(),
        kinks,
        skipped_nodes: skipped,
        parameter,
    }
}

/// Pointwise margin of the vacuum coercivity conditions (positive means
/// satisfied): the smaller of
/// `sech^2(y/l) - 4 l tanh(y/l) b` and
/// `2 l tanh(y/l) c' + (sech^2(y/l) b)' - 8 sech^2(y/l)`.
pub fn vacuum_margin(field: &CoefficientField, lambda: f64, y: f64) -> f64 {
    let t = (y / lambda).tanh();
    let s2 = sech(y / lambda).powi(2);
    let b = field.b(y);
    let first = s2 - 4.0 * lambda * t * b;
    let ds2 = -2.0 / lambda * s2 * t;
    let second = 2.0 * lambda * t * field.dc(y) + ds2 * b + s2 * field.db(y) - 8.0 * s2;
    first.min(second)
}

pub fn check_vacuum_admissible(
    field: &CoefficientField,
    grid: &Grid,
    lambda: f64,
) -> Result<AdmissibilityReport> {
    if !(lambda.is_finite() && lambda > 2.0) {
        return Err(Error::param("lambda", "must exceed 2"));
    }
    field.validate(grid)?;
    Ok(summarize(
        Condition::VacuumCoercive,
        grid,
        field,
        Some(lambda),
        false,
        |y| vacuum_margin(field, lambda, y),
    ))
}

/// Smallest of `-sgn(y) b`, `sgn(y) b'`, `sgn(y) c'`.
pub fn sign_margin(field: &CoefficientField, y: f64) -> f64 {
    let s = sgn(y);
    (-s * field.b(y)).min(s * field.db(y)).min(s * field.dc(y))
}

pub fn check_sign_conditions(field: &CoefficientField, grid: &Grid) -> Result<AdmissibilityReport> {
    field.validate(grid)?;
    Ok(summarize(
        Condition::SignConditions,
        grid,
        field,
        None,
        true,
        |y| sign_margin(field, y),
    ))
}

/// `mu = F''(xi) - max c`; passes iff `mu > 0`.
pub fn check_orbital(
    field: &CoefficientField,
    grid: &Grid,
    potential: &Potential,
    xi: f64,
) -> Result<AdmissibilityReport> {
    field.validate(grid)?;
    let curvature = potential.d2(xi);
    let mut report = summarize(Condition::Orbital, grid, field, None, false, |y| {
        curvature - field.c(y)
    });
    report.pass = report.worst_margin > 0.0;
    report.parameter = Some(report.worst_margin);
    Ok(report)
}

pub fn orbital_margin(field: &CoefficientField, potential: &Potential, xi: f64, y: f64) -> f64 {
    potential.d2(xi) - field.c(y)
}

/// Exponential envelope `|c(y)| <= K e^{-k|y|}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    /// Fitted `K` (intercept of the log-linear fit).
    pub amplitude: f64,
    /// Fitted `k`; `+inf` when the tail is negligible.
    pub rate: f64,
    /// `1.01 * amplitude`, the constant actually verified.
    pub envelope: f64,
    /// Whether `|c| <= envelope e^{-rate |y|}` at every node.
    pub bound_holds: bool,
}

impl Decay {
    pub fn negligible() -> Self {
        Decay {
            amplitude: 0.0,
            rate: f64::INFINITY,
            envelope: 0.0,
            bound_holds: true,
        }
    }

    pub fn is_negligible(&self) -> bool {
        self.rate.is_infinite()
    }

    /// `K e^{-k y}`.
    pub fn at(&self, y: f64) -> f64 {
        if self.is_negligible() {
            0.0
        } else {
            self.envelope * (-self.rate * y.abs()).exp()
        }
    }
}

/// Least-squares fit of `log|c|` against `|y|` over `L/4 <= |y| <= L/2`.
pub fn fit_decay(grid: &Grid, c: &[f64]) -> Result<Decay> {
    if c.len() != grid.len() {
        return Err(Error::Malformed("samples do not match the grid".into()));
    }
    let l = grid.half_width();
    let (mut u, mut v) = (Vec::new(), Vec::new());
    for (i, ci) in c.iter().enumerate() {
        let ay = grid.y(i).abs();
        if ay >= 0.25 * l && ay <= 0.5 * l && ci.abs() >= 1e-14 {
            u.push(ay);
            v.push(ci.abs().ln());
        }
    }
    let Some((intercept, slope)) = (u.len() >= 2).then(|| grid::linear_fit(&u, &v)).flatten() else {
        return Ok(Decay::negligible());
    };
    let amplitude = intercept.exp();
    let rate = -slope;
    let envelope = 1.01 * amplitude;
    let bound_holds = rate > 0.0
        && c
            .iter()
            .enumerate()
            .all(|(i, ci)| ci.abs() <= envelope * (-rate * grid.y(i).abs()).exp());
    Ok(Decay {
        amplitude,
        rate,
        envelope,
        bound_holds,
    })
}

/// Decay check as a report: margin `K e^{-k|y|} - |c(y)|`.
pub fn check_decay(field: &CoefficientField, grid: &Grid) -> Result<AdmissibilityReport> {
    field.validate(grid)?;
    let c = grid.sample(|y| field.c(y));
    let decay = fit_decay(grid, &c)?;
    let mut report = summarize(Condition::ExpDecay, grid, field, None, false, |y| {
        decay.at(y) - field.c(y).abs()
    });
    report.parameter = Some(decay.rate);
    if decay.is_negligible() {
        report.pass = c.iter().all(|v| v.abs() < 1e-14) || report.worst_margin >= 0.0;
    } else {
        report.pass = decay.rate > 0.0 && report.worst_margin >= 0.0;
    }
    Ok(report)
}
