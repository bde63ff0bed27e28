//! Virial functional `I(v) = int (psi v1' + psi'/2 v1) v2` with
//! `psi = lambda tanh(y/lambda)`, its time-derivative decomposition, the
//! bilinear form `B`, the `sech`-weighted norms and the estimate-level ratio
//! monitors.
//!
//! Spatial derivatives of sampled fields use the eighth-order stencil so that
//! integration-by-parts identities hold to near round-off; all integrals are
//! trapezoid sums on the grid.

use serde::{Deserialize, Serialize};

use crate::coeffs::Sampled;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::{diff8_into, trapezoid_with, Grid};
use crate::potentials::Potential;

fn sech(x: f64) -> f64 {
    if x.abs() > 700.0 {
        0.0
    } else {
        1.0 / x.cosh()
    }
}

/// `psi`, `zeta = sech(y/lambda)` and the `sech(y)` weight with closed-form
/// derivatives, sampled on a grid.
#[derive(Clone, Debug)]
pub struct Frame {
    pub grid: Grid,
    pub lambda: f64,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub d2psi: Vec<f64>,
    pub d3psi: Vec<f64>,
    pub zeta: Vec<f64>,
    pub dzeta: Vec<f64>,
    pub weight: Vec<f64>,
    pub dweight: Vec<f64>,
    pub d2weight: Vec<f64>,
    pub exec: Exec,
}

impl Frame {
    pub fn new(grid: &Grid, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 2.0) {
            return Err(Error::param("lambda", "must exceed 2"));
        }
        let s = |y: f64| y / lambda;
        let l2 = lambda * lambda;
        Ok(Frame {
            grid: grid.clone(),
            lambda,
            psi: grid.sample(|y| lambda * s(y).tanh()),
            dpsi: grid.sample(|y| sech(s(y)).powi(2)),
            d2psi: grid.sample(|y| -2.0 / lambda * sech(s(y)).powi(2) * s(y).tanh()),
            d3psi: grid.sample(|y| {
                let (t, h) = (s(y).tanh(), sech(s(y)));
                2.0 / l2 * h * h * (2.0 * t * t - h * h)
            }),
            zeta: grid.sample(|y| sech(s(y))),
            dzeta: grid.sample(|y| -sech(s(y)) * s(y).tanh() / lambda),
            weight: grid.sample(sech),
            dweight: grid.sample(|y| -sech(y) * y.tanh()),
            d2weight: grid.sample(|y| {
                let h = sech(y);
                h - 2.0 * h * h * h
            }),
            exec: Exec::default(),
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn dy(&self) -> f64 {
        self.grid.dy()
    }

    /// Trapezoid rule over the frame grid.
    pub fn integrate(&self, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
        trapezoid_with(self.exec, self.grid.len(), self.dy(), f)
    }

    pub fn derivative(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        diff8_into(self.exec, v, self.dy(), &mut out);
        out
    }
}

/// `I(v) = int (psi v1' + psi'/2 v1) v2`.
pub fn virial(frame: &Frame, v1: &[f64], v2: &[f64]) -> f64 {
    let d = frame.derivative(v1);
    virial_with(frame, v1, &d, v2)
}

pub(crate) fn virial_with(frame: &Frame, v1: &[f64], dv1: &[f64], v2: &[f64]) -> f64 {
    frame.integrate(|i| (frame.psi[i] * dv1[i] + 0.5 * frame.dpsi[i] * v1[i]) * v2[i])
}

/// Which nonlinearity enters the perturbation equation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nonlinearity {
    /// `N(U, v) = F'(U) - F'(U + v)`.
    #[default]
    Full,
    /// Linearization about the background: `N = -F''(U) v`.
    Linear,
    /// `N` dropped.
    Off,
}

impl Nonlinearity {
    pub fn eval(self, potential: &Potential, u: f64, v: f64) -> f64 {
        match self {
            Nonlinearity::Full => potential.d1(u) - potential.d1(u + v),
            Nonlinearity::Linear => -potential.d2(u) * v,
            Nonlinearity::Off => 0.0,
        }
    }
}

/// Terms of `dI/dt`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RateTerms {
    /// `-B(v1) = -int psi' v1'^2 + 1/4 int psi''' v1^2`.
    pub neg_b: f64,
    /// `int (psi b v1'^2 + psi'/2 c v1^2)`.
    pub coef_quadratic: f64,
    /// `int (psi'/2 b + psi c) v1' v1`.
    pub cross: f64,
    /// `J = int (psi v1' + psi'/2 v1) N(U, v1)`.
    pub nonlinear: f64,
    pub total: f64,
    /// Sponge contribution `-int (psi v1' + psi'/2 v1) gamma v2`, kept out of `total`.
    #[serde(default)]
    pub damping: f64,
}

impl RateTerms {
    pub fn magnitude(&self) -> f64 {
        self.neg_b.abs() + self.coef_quadratic.abs() + self.cross.abs() + self.nonlinear.abs()
    }
}

pub fn virial_rate(
    frame: &Frame,
    v1: &[f64],
    coeffs: &Sampled,
    potential: &Potential,
    background: &[f64],
    nonlinearity: Nonlinearity,
) -> RateTerms {
    let d = frame.derivative(v1);
    virial_rate_with(frame, v1, &d, coeffs, potential, background, nonlinearity)
}

pub(crate) fn virial_rate_with(
    frame: &Frame,
    v1: &[f64],
    d: &[f64],
    coeffs: &Sampled,
    potential: &Potential,
    background: &[f64],
    nonlinearity: Nonlinearity,
) -> RateTerms {
    let f = frame;
    let neg_b = f.integrate(|i| -f.dpsi[i] * d[i] * d[i] + 0.25 * f.d3psi[i] * v1[i] * v1[i]);
    let coef_quadratic = f.integrate(|i| {
        f.psi[i] * coeffs.b[i] * d[i] * d[i] + 0.5 * f.dpsi[i] * coeffs.c[i] * v1[i] * v1[i]
    });
    let cross = f.integrate(|i| {
        (0.5 * f.dpsi[i] * coeffs.b[i] + f.psi[i] * coeffs.c[i]) * d[i] * v1[i]
    });
    let nonlinear = f.integrate(|i| {
        (f.psi[i] * d[i] + 0.5 * f.dpsi[i] * v1[i]) * nonlinearity.eval(potential, background[i], v1[i])
    });
    RateTerms {
        neg_b,
        coef_quadratic,
        cross,
        nonlinear,
        total: neg_b + coef_quadratic + cross + nonlinear,
        damping: 0.0,
    }
}

/// Rate contributions of a damping term `-gamma v_t`: `(dI/dt, d/dt int sech v1 v2)`.
pub fn damping_rates(frame: &Frame, v1: &[f64], d: &[f64], v2: &[f64], gamma: &[f64]) -> (f64, f64) {
    let f = frame;
    let virial = f.integrate(|i| -(f.psi[i] * d[i] + 0.5 * f.dpsi[i] * v1[i]) * gamma[i] * v2[i]);
    let sech = f.integrate(|i| -f.weight[i] * gamma[i] * v1[i] * v2[i]);
    (virial, sech)
}

/// `B(v)` in direct form and in the `w = zeta v` form
/// `int w'^2 - 1/(2 lambda^2) sech^2(y/lambda) w^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearB {
    pub direct: f64,
    pub w_form: f64,
    /// `int w'^2`.
    pub dw_sq: f64,
}

impl BilinearB {
    /// `B(v) - 3/4 int w'^2`, non-negative for odd `v`.
    pub fn odd_margin(&self) -> f64 {
        self.direct - 0.75 * self.dw_sq
    }

    pub fn relative_gap(&self) -> f64 {
        let scale = self.direct.abs().max(self.w_form.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.direct - self.w_form).abs() / scale
        }
    }
}

pub fn bilinear_b(frame: &Frame, v: &[f64]) -> BilinearB {
    let f = frame;
    let dv = f.derivative(v);
    let direct = f.integrate(|i| f.dpsi[i] * dv[i] * dv[i] - 0.25 * f.d3psi[i] * v[i] * v[i]);
    let w: Vec<f64> = v.iter().zip(&f.zeta).map(|(a, z)| a * z).collect();
    let dw = f.derivative(&w);
    let dw_sq = f.integrate(|i| dw[i] * dw[i]);
    let c = 0.5 / (f.lambda * f.lambda);
    let w_form = dw_sq - f.integrate(|i| c * f.dpsi[i] * w[i] * w[i]);
    BilinearB {
        direct,
        w_form,
        dw_sq,
    }
}

/// Squared `sech(y)`-weighted norms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorms {
    pub h1w_v1: f64,
    pub l2w_v1: f64,
    pub l2w_v2: f64,
}

pub fn weighted_norms(frame: &Frame, v1: &[f64], v2: &[f64]) -> WeightedNorms {
    let d = frame.derivative(v1);
    weighted_norms_with(frame, v1, &d, v2)
}

pub(crate) fn weighted_norms_with(frame: &Frame, v1: &[f64], d: &[f64], v2: &[f64]) -> WeightedNorms {
    let w = &frame.weight;
    let l2w_v1 = frame.integrate(|i| w[i] * v1[i] * v1[i]);
    let dsq = frame.integrate(|i| w[i] * d[i] * d[i]);
    WeightedNorms {
        h1w_v1: dsq + l2w_v1,
        l2w_v1,
        l2w_v2: frame.integrate(|i| w[i] * v2[i] * v2[i]),
    }
}

/// `int sech(y) v1 v2`.
pub fn sech_cross(frame: &Frame, v1: &[f64], v2: &[f64]) -> f64 {
    frame.integrate(|i| frame.weight[i] * v1[i] * v2[i])
}

/// `d/dt int sech v1 v2` after integrating by parts:
/// `int sech (v2^2 - v1'^2 + v1 N) + sech''/2 v1^2 + (sech c - (sech b)'/2) v1^2`.
#[allow(clippy::too_many_arguments)]
pub fn sech_cross_rate(
    frame: &Frame,
    v1: &[f64],
    v2: &[f64],
    coeffs: &Sampled,
    potential: &Potential,
    background: &[f64],
    nonlinearity: Nonlinearity,
) -> f64 {
    let d = frame.derivative(v1);
    sech_cross_rate_with(frame, v1, &d, v2, coeffs, potential, background, nonlinearity)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn sech_cross_rate_with(
    frame: &Frame,
    v1: &[f64],
    d: &[f64],
    v2: &[f64],
    coeffs: &Sampled,
    potential: &Potential,
    background: &[f64],
    nonlinearity: Nonlinearity,
) -> f64 {
    let f = frame;
    f.integrate(|i| {
        let (w, dw, d2w) = (f.weight[i], f.dweight[i], f.d2weight[i]);
        let n = nonlinearity.eval(potential, background[i], v1[i]);
        w * (v2[i] * v2[i] - d[i] * d[i] + v1[i] * n)
            + 0.5 * d2w * v1[i] * v1[i]
            + (w * coeffs.c[i] - 0.5 * (dw * coeffs.b[i] + w * coeffs.db[i])) * v1[i] * v1[i]
    })
}

/// Constant `C` in `d/dt int sech v1 v2 >= ||v2||^2 - C ||v1||_{H1w}^2`,
/// assembled from pointwise bounds on the coefficients.
pub fn sech_cross_constant(coeffs: &Sampled, potential: &Potential, background: &[f64]) -> f64 {
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let neg_c = coeffs.c.iter().fold(0.0f64, |m, x| m.max(-x));
    let (lo, hi) = background
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), u| (a.min(*u), b.max(*u)));
    let f2 = potential.sup_derivative(2, lo - 1.0, hi + 1.0);
    1.5 + 0.5 * (max_abs(&coeffs.b) + max_abs(&coeffs.db)) + neg_c + f2
}

/// A measured "lhs <= C envelope" instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub lhs: f64,
    pub envelope: f64,
    pub ratio: f64,
}

fn ratio(lhs: f64, envelope: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / envelope
    }
}

/// `int psi' |v|^{2+q}` against `lambda^2 ||v||_inf^q ||w||_{H1}^2`.
pub fn psi_prime_check(frame: &Frame, v: &[f64], q: f64) -> Result<RatioCheck> {
    if !(q > 0.0) {
        return Err(Error::param("q", "must be positive"));
    }
    let f = frame;
    let lhs = f.integrate(|i| f.dpsi[i] * v[i].abs().powf(2.0 + q));
    let w: Vec<f64> = v.iter().zip(&f.zeta).map(|(a, z)| a * z).collect();
    let dw = f.derivative(&w);
    let w_h1 = f.integrate(|i| w[i] * w[i] + dw[i] * dw[i]);
    let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let envelope = f.lambda * f.lambda * sup.powf(q) * w_h1;
    Ok(RatioCheck {
        lhs,
        envelope,
        ratio: ratio(lhs, envelope),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum FtermCase {
    /// `U = 0`, `c = 0`.
    Vacuum,
    /// Sine-Gordon about `2 k pi` with a steady state of measured size `delta`.
    SineGordonNear2kPi { delta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtermReport {
    pub j: f64,
    pub envelope: f64,
    pub ratio: f64,
    /// `int psi' |v1|^3`, the cubic smallness in the vacuum case.
    pub cubic: f64,
}

/// `J = int (F'(U) - F'(U + v1)) (psi v1' + psi'/2 v1)` against
/// `lambda^2 (||v1||_inf ||w'||^2 + delta ||v1||_{H1w}^2)`.
pub fn fterm_check(
    frame: &Frame,
    v1: &[f64],
    potential: &Potential,
    background: &[f64],
    case: FtermCase,
) -> Result<FtermReport> {
    let delta = match case {
        FtermCase::Vacuum => {
            if background.iter().any(|u| *u != 0.0) {
                return Err(Error::Unsupported(
                    "vacuum case requires U = 0".into(),
                ));
            }
            0.0
        }
        FtermCase::SineGordonNear2kPi { delta } => {
            if !potential.is_sine_gordon() {
                return Err(Error::Unsupported(
                    "the near-2k pi case is specific to sine-Gordon".into(),
                ));
            }
            delta
        }
    };
    let f = frame;
    let d = f.derivative(v1);
    let j = f.integrate(|i| {
        (potential.d1(background[i]) - potential.d1(background[i] + v1[i]))
            * (f.psi[i] * d[i] + 0.5 * f.dpsi[i] * v1[i])
    });
    let w: Vec<f64> = v1.iter().zip(&f.zeta).map(|(a, z)| a * z).collect();
    let dw = f.derivative(&w);
    let dw_sq = f.integrate(|i| dw[i] * dw[i]);
    let h1w = weighted_norms_with(f, v1, &d, v1).h1w_v1;
    let sup = v1.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let envelope = f.lambda * f.lambda * (sup * dw_sq + delta * h1w);
    let cubic = f.integrate(|i| f.dpsi[i] * v1[i].abs().powi(3));
    Ok(FtermReport {
        j,
        envelope,
        ratio: ratio(j.abs(), envelope),
        cubic,
    })
}

/// One row of the diagnostics time series.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub virial: f64,
    pub didt_fd: f64,
    pub didt_formula: f64,
    pub h1w_v1: f64,
    pub l2w_v1: f64,
    pub l2w_v2: f64,
    pub sech_cross: f64,
    pub sech_rate_fd: f64,
    pub sech_rate_formula: f64,
    /// Sponge contribution to the sech-cross rate, kept out of `sech_rate_formula`.
    pub sech_rate_damping: f64,
    /// `||v2||^2_{L2w} - C_run ||v1||^2_{H1w}`.
    pub sech_lower: f64,
    /// `int_0^t (||v1||^2_{H1w} + ||v2||^2_{L2w})`.
    pub cum_integral: f64,
    /// `int_0^t ||v1||^2_{H1w}`.
    pub cum_v1: f64,
    /// `||v1||_{H1(I)} + ||v2||_{L2(I)}` per configured interval.
    pub local: Vec<f64>,
    pub terms: RateTerms,
    /// `||v1||_{H1} + ||v2||_{L2}` over the whole grid.
    pub orbital: f64,
    /// Largest even part of `v1`, `v2` (parity monitor).
    pub even_part: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalDecay {
    pub interval: (f64, f64),
    pub peak: f64,
    pub last: f64,
    /// `peak / last`; infinite when the last value is zero.
    pub factor: f64,
}

/// Run-level summary of a diagnostics series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirialSummary {
    pub records: usize,
    pub t_final: f64,
    pub decay: Vec<IntervalDecay>,
    /// `min (-dI/dt) / ||v1||^2_{H1w}` over records with nonzero norm.
    pub floor: f64,
    /// `min -dI/dt` over the series.
    pub min_neg_didt: f64,
    pub cum_integral: f64,
    pub cum_v1: f64,
    pub virial_initial: f64,
    pub virial_final: f64,
    /// `(I(0) - I(T)) / floor`.
    pub cum_bound: f64,
    pub max_orbital: f64,
    pub max_even_part: f64,
    pub energy_drift: f64,
}

pub fn summarize(records: &[DiagnosticsRecord], intervals: &[(f64, f64)]) -> Result<VirialSummary> {
    let (first, last) = match (records.first(), records.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Malformed("empty diagnostics series".into())),
    };
    let decay = intervals
        .iter()
        .enumerate()
        .map(|(k, iv)| {
            let peak = records.iter().map(|r| r.local[k]).fold(0.0, f64::max);
            let end = last.local[k];
            IntervalDecay {
                interval: *iv,
                peak,
                last: end,
                factor: if end > 0.0 { peak / end } else if peak > 0.0 { f64::INFINITY } else { 1.0 },
            }
        })
        .collect();
    let floor = records
        .iter()
        .filter(|r| r.h1w_v1 > 0.0)
        .map(|r| -r.didt_formula / r.h1w_v1)
        .fold(f64::INFINITY, f64::min);
    let min_neg_didt = records.iter().map(|r| -r.didt_formula).fold(f64::INFINITY, f64::min);
    let e0 = first.energy;
    let energy_drift = records
        .iter()
        .map(|r| (r.energy - e0).abs())
        .fold(0.0, f64::max)
        / e0.abs().max(1e-12);
    Ok(VirialSummary {
        records: records.len(),
        t_final: last.t,
        decay,
        floor,
        min_neg_didt,
        cum_integral: last.cum_integral,
        cum_v1: last.cum_v1,
        virial_initial: first.virial,
        virial_final: last.virial,
        cum_bound: (first.virial - last.virial) / floor,
        max_orbital: records.iter().map(|r| r.orbital).fold(0.0, f64::max),
        max_even_part: records.iter().map(|r| r.even_part).fold(0.0, f64::max),
        energy_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::with_spacing(80.0, 0.01).unwrap()
    }

    #[test]
    fn frame_identities() {
        let f = Frame::new(&grid(), 13.0).unwrap();
        for i in 0..f.grid.len() {
            assert!((f.dpsi[i] - f.zeta[i] * f.zeta[i]).abs() < 1e-12);
        }
        assert!(Frame::new(&grid(), 2.0).is_err());
    }

    #[test]
    fn virial_vanishes_on_diagonal_and_zero_velocity() {
        let g = grid();
        let f = Frame::new(&g, 4.0).unwrap();
        let h = g.sample(|y| (-(y - 0.7) * (y - 0.7)).exp() + 0.3 / y.cosh());
        assert_eq!(virial(&f, &h, &vec![0.0; g.len()]), 0.0);
        assert!(virial(&f, &h, &h).abs() < 1e-10);
    }

    #[test]
    fn weighted_norm_oracles() {
        let g = grid();
        let f = Frame::new(&g, 4.0).unwrap();
        let ones = vec![1.0; g.len()];
        assert!((weighted_norms(&f, &ones, &ones).l2w_v2 - PI).abs() < 1e-10);
        let s = g.sample(|y| 1.0 / y.cosh());
        assert!((weighted_norms(&f, &s, &s).l2w_v1 - PI / 2.0).abs() < 1e-8);
        assert!((sech_cross(&f, &s, &s) - PI / 2.0).abs() < 1e-8);
        let z = vec![0.0; g.len()];
        assert_eq!(weighted_norms(&f, &z, &z), WeightedNorms::default());
    }

    #[test]
    fn rate_reduces_to_minus_b_without_coefficients() {
        let g = grid();
        let f = Frame::new(&g, 4.0).unwrap();
        let zero = vec![0.0; g.len()];
        let coeffs = Sampled {
            b: zero.clone(),
            c: zero.clone(),
            db: zero.clone(),
            dc: zero.clone(),
        };
        let v = g.sample(|y| 1.0 / y.cosh());
        let r = virial_rate(&f, &v, &coeffs, &Potential::SineGordon, &zero, Nonlinearity::Off);
        assert_eq!((r.coef_quadratic, r.cross, r.nonlinear), (0.0, 0.0, 0.0));
        assert!((r.total + bilinear_b(&f, &v).direct).abs() < 1e-14);
        let r0 = virial_rate(&f, &zero, &coeffs, &Potential::SineGordon, &zero, Nonlinearity::Full);
        assert_eq!(r0.total, 0.0);
    }

    #[test]
    fn b_forms_agree() {
        let g = grid();
        let f = Frame::new(&g, 4.0).unwrap();
        let v = g.sample(|y| 1.0 / y.cosh());
        let b = bilinear_b(&f, &v);
        assert!(b.relative_gap() < 1e-6, "{b:?}");
        let odd = Frame::new(&g, 100.0).unwrap();
        let v = g.sample(|y| y.tanh() / y.cosh());
        let b = bilinear_b(&odd, &v);
        assert!(b.odd_margin() >= 0.0, "{b:?}");
        let z = bilinear_b(&f, &vec![0.0; g.len()]);
        assert_eq!((z.direct, z.w_form), (0.0, 0.0));
    }

    #[test]
    fn ratio_monitors_handle_zero_input() {
        let g = grid();
        let f = Frame::new(&g, 4.0).unwrap();
        let z = vec![0.0; g.len()];
        assert_eq!(psi_prime_check(&f, &z, 1.0).unwrap().ratio, 0.0);
        let r = fterm_check(&f, &z, &Potential::SineGordon, &z, FtermCase::Vacuum).unwrap();
        assert_eq!(r.j, 0.0);
        let bg = vec![2.0 * PI; g.len()];
        assert!(matches!(
            fterm_check(&f, &z, &Potential::SineGordon, &bg, FtermCase::Vacuum),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn summary_rejects_empty_series() {
        assert!(summarize(&[], &[(-5.0, 5.0)]).is_err());
    }
}
