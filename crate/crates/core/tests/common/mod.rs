//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solve a tridiagonal system in place (Thomas algorithm).
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - lower[i] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / den;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Damped Newton on the collocation equations
/// `-U'' - b U' - c U + f1(U) = 0`, `U(+-L) = xi`, second-order stencils.
pub fn newton_bvp(
    y: &[f64],
    b: impl Fn(f64) -> f64,
    c: impl Fn(f64) -> f64,
    f1: impl Fn(f64) -> f64,
    f2: impl Fn(f64) -> f64,
    xi: f64,
) -> Vec<f64> {
    let n = y.len();
    let h = y[1] - y[0];
    let m = n - 2;
    let mut u = vec![xi; n];
    let resid = |u: &[f64]| -> Vec<f64> {
        (1..n - 1)
            .map(|i| {
                let d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
                let d1 = (u[i + 1] - u[i - 1]) / (2.0 * h);
                -d2 - b(y[i]) * d1 - c(y[i]) * u[i] + f1(u[i])
            })
            .collect()
    };
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for _ in 0..50 {
        let r = resid(&u);
        let r0 = norm(&r);
        if r0 < 1e-13 {
            break;
        }
        let mut lo = vec![0.0; m];
        let mut di = vec![0.0; m];
        let mut up = vec![0.0; m];
        for k in 0..m {
            let i = k + 1;
            lo[k] = -1.0 / (h * h) + b(y[i]) / (2.0 * h);
            up[k] = -1.0 / (h * h) - b(y[i]) / (2.0 * h);
            di[k] = 2.0 / (h * h) - c(y[i]) + f2(u[i]);
        }
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let du = thomas(&lo, &di, &up, &neg);
        let mut step = 1.0;
        loop {
            let mut trial = u.clone();
            for k in 0..m {
                trial[k + 1] += step * du[k];
            }
            if norm(&resid(&trial)) < r0 || step < 1e-4 {
                u = trial;
                break;
            }
            step *= 0.5;
        }
    }
    u
}

/// Composite Simpson on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Smooth random test function: a sum of Gaussian bumps, optionally made
/// odd by antisymmetrization.
pub struct Bumps {
    pub terms: Vec<(f64, f64, f64)>,
    pub odd: bool,
}

impl Bumps {
    pub fn random(seed: u64, odd: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=4);
        let terms = (0..k)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(1.0..2.0),
                )
            })
            .collect();
        Bumps { terms, odd }
    }

    fn raw(&self, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(a, c, w)| a * (-((y - c) / w).powi(2)).exp())
            .sum()
    }

    fn raw_d(&self, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(a, c, w)| -2.0 * (y - c) / (w * w) * a * (-((y - c) / w).powi(2)).exp())
            .sum()
    }

    pub fn value(&self, y: f64) -> f64 {
        if self.odd {
            self.raw(y) - self.raw(-y)
        } else {
            self.raw(y)
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        if self.odd {
            self.raw_d(y) + self.raw_d(-y)
        } else {
            self.raw_d(y)
        }
    }
}
