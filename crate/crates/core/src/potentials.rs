//! Potentials `F` with derivatives up to third order, vacuum points and the
//! nonlinear remainders used by the steady-state map and the evolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Potential {
    /// `F(u) = 1 - cos u`.
    SineGordon,
    /// `F(u) = sum_k coeffs[k] u^k`, degree at least two.
    Polynomial { coeffs: Vec<f64> },
    /// `F(origin + u) - F(origin)`: the base potential re-centred at `origin`.
    Shifted { base: Box<Potential>, origin: f64 },
}

impl Potential {
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        let p = Potential::Polynomial { coeffs };
        p.validate()?;
        Ok(p)
    }

    /// `(1 - u^2)^2 / 4`, wells at `u = +-1` with `F'' = 2`.
    pub fn double_well() -> Self {
        Potential::Polynomial {
            coeffs: vec![0.25, 0.0, -0.5, 0.0, 0.25],
        }
    }

    pub fn shifted(self, origin: f64) -> Self {
        Potential::Shifted {
            base: Box::new(self),
            origin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Potential::SineGordon => Ok(()),
            Potential::Polynomial { coeffs } => {
                let degree = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
                if degree < 2 {
                    return Err(Error::param(
                        "coeffs",
                        "polynomial potential needs degree >= 2",
                    ));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::param("coeffs", "non-finite coefficient"));
                }
                Ok(())
            }
            Potential::Shifted { base, origin } => {
                if !origin.is_finite() {
                    return Err(Error::param("origin", "must be finite"));
                }
                base.validate()
            }
        }
    }

    /// `F^{(order)}(u)` for `order` in `0..=3`.
    pub fn derivative(&self, order: usize, u: f64) -> f64 {
        match self {
            Potential::SineGordon => match order % 4 {
                0 if order == 0 => 1.0 - u.cos(),
                0 => -u.cos(),
                1 => u.sin(),
                2 => u.cos(),
                _ => -u.sin(),
            },
            Potential::Polynomial { coeffs } => poly_derivative(coeffs, order, u),
            Potential::Shifted { base, origin } => {
                let v = base.derivative(order, origin + u);
                if order == 0 {
                    v - base.derivative(0, *origin)
                } else {
                    v
                }
            }
        }
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        self.derivative(0, u)
    }

    #[inline]
    pub fn d1(&self, u: f64) -> f64 {
        self.derivative(1, u)
    }

    #[inline]
    pub fn d2(&self, u: f64) -> f64 {
        self.derivative(2, u)
    }

    #[inline]
    pub fn d3(&self, u: f64) -> f64 {
        self.derivative(3, u)
    }

    /// `max |F^{(order)}|` over `[lo, hi]`, by dense sampling.
    pub fn sup_derivative(&self, order: usize, lo: f64, hi: f64) -> f64 {
        let n = 2000;
        (0..=n)
            .map(|k| self.derivative(order, lo + (hi - lo) * k as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_sine_gordon(&self) -> bool {
        match self {
            Potential::SineGordon => true,
            Potential::Shifted { base, .. } => base.is_sine_gordon(),
            Potential::Polynomial { .. } => false,
        }
    }
}

fn poly_derivative(coeffs: &[f64], order: usize, u: f64) -> f64 {
    // Horner on the differentiated coefficients.
    let mut acc = 0.0;
    for k in (order..coeffs.len()).rev() {
        let falling: f64 = (0..order).map(|j| (k - j) as f64).product();
        acc = acc * u + coeffs[k] * falling;
    }
    acc
}

/// A vacuum state `u = xi` with `F'(xi) = 0`, `F''(xi) = m^2 > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VacuumInfo {
    pub xi: f64,
    pub mass: f64,
    pub curvature: f64,
    /// Raw `F(xi)`; energies subtract it so the vacuum has zero energy.
    pub f_value: f64,
    /// `F'(xi) = 0` to 1e-10 (and `F(xi) = 0` once `f_value` is subtracted).
    pub shift_valid: bool,
}

const ROOT_TOL: f64 = 1e-12;
const MIN_CURVATURE: f64 = 1e-8;

/// Locate the vacuum nearest `guess` (within 0.5) and compute its mass.
pub fn vacuum_info(potential: &Potential, guess: f64) -> Result<VacuumInfo> {
    potential.validate()?;
    let xi = find_root(potential, guess)?;
    let curvature = potential.d2(xi);
    if curvature <= MIN_CURVATURE {
        return Err(Error::DegenerateVacuum { xi, curvature });
    }
    Ok(VacuumInfo {
        xi,
        mass: curvature.sqrt(),
        curvature,
        f_value: potential.f(xi),
        shift_valid: potential.d1(xi).abs() < 1e-10,
    })
}

fn find_root(p: &Potential, guess: f64) -> Result<f64> {
    let g = |u: f64| p.d1(u);
    if g(guess) == 0.0 {
        return Ok(guess);
    }
    // Plain Newton first; accept if it stays in the window and converges.
    let mut u = guess;
    for _ in 0..50 {
        let d = p.d2(u);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = u - g(u) / d;
        if (next - guess).abs() > 0.5 {
            break;
        }
        u = next;
        if g(u).abs() < ROOT_TOL {
            return Ok(u);
        }
    }
    // Bracket the sign change closest to the guess, then safeguarded Newton.
    let samples = 200;
    let mut best: Option<(f64, f64)> = None;
    let mut prev = (guess - 0.5, g(guess - 0.5));
    for k in 1..=samples {
        let x = guess - 0.5 + k as f64 / samples as f64;
        let gx = g(x);
        if prev.1 == 0.0 || prev.1.signum() != gx.signum() {
            let mid = 0.5 * (prev.0 + x);
            let closer = best.is_none_or(|(a, b)| (mid - guess).abs() < (0.5 * (a + b) - guess).abs());
            if closer {
                best = Some((prev.0, x));
            }
        }
        prev = (x, gx);
    }
    let (mut lo, mut hi) = best.ok_or(Error::NoRoot { guess })?;
    if g(lo) == 0.0 {
        return Ok(lo);
    }
    if g(hi) == 0.0 {
        return Ok(hi);
    }
    let rising = g(hi) > 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx.abs() < ROOT_TOL {
            return Ok(x);
        }
        if (gx > 0.0) == rising {
            hi = x;
        } else {
            lo = x;
        }
        let d = p.d2(x);
        let newton = if d != 0.0 { x - gx / d } else { f64::NAN };
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    if g(x).abs() < 1e-10 {
        Ok(x)
    } else {
        Err(Error::NoRoot { guess })
    }
}

/// `-F'(xi + eta) + F''(xi) eta`, the remainder in the steady-state equation.
///
/// `F'(xi)` is subtracted explicitly: it vanishes in exact arithmetic, and
/// removing its rounding error keeps the remainder exactly zero at `eta = 0`.
pub fn nonlinear_remainder(potential: &Potential, xi: f64, eta: f64) -> f64 {
    -(potential.d1(xi + eta) - potential.d1(xi)) + potential.d2(xi) * eta
}

/// Pointwise `F'(U) - F'(U + v1)`, the nonlinearity of the perturbation
/// equation.
pub fn evolution_nonlinearity(potential: &Potential, background: &[f64], v1: &[f64]) -> Vec<f64> {
    assert_eq!(background.len(), v1.len(), "sample arrays must be aligned");
    background
        .iter()
        .zip(v1)
        .map(|(u, v)| potential.d1(*u) - potential.d1(u + v))
        .collect()
}
