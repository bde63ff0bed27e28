//! Uniform symmetric grids and the finite-difference / quadrature helpers
//! shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

/// Uniform grid on `[-L, L]` with an even number of intervals, so `y = 0`
/// is always a node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    intervals: usize,
}

impl Grid {
    pub fn new(half_width: f64, intervals: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::param("half_width", "must be finite and positive"));
        }
        if intervals < 4 || intervals % 2 != 0 {
            return Err(Error::param(
                "intervals",
                format!("must be even and at least 4, got {intervals}"),
            ));
        }
        Ok(Grid {
            half_width,
            intervals,
        })
    }

    /// Grid with spacing as close as possible to `dy` (rounded to an even
    /// interval count).
    pub fn with_spacing(half_width: f64, dy: f64) -> Result<Self> {
        if !(dy.is_finite() && dy > 0.0) {
            return Err(Error::param("dy", "must be finite and positive"));
        }
        let n = (2.0 * half_width / dy).round() as usize;
        Grid::new(half_width, n + n % 2)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_width / self.intervals as f64
    }

    pub fn center(&self) -> usize {
        self.intervals / 2
    }

    #[inline]
    pub fn y(&self, i: usize) -> f64 {
        // Symmetric construction keeps y(N - i) == -y(i) bit for bit.
        let c = self.center() as isize;
        (i as isize - c) as f64 * self.dy()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.y(i)).collect()
    }

    /// Index of the node nearest to `y`, if `y` lies on the grid.
    pub fn nearest(&self, y: f64) -> Option<usize> {
        if y.abs() > self.half_width * (1.0 + 1e-12) {
            return None;
        }
        let k = ((y + self.half_width) / self.dy()).round() as usize;
        Some(k.min(self.intervals))
    }

    /// Index of the mirror node `-y(i)`.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.intervals - i
    }

    /// Inclusive index range covering `[a, b]`.
    pub fn index_range(&self, a: f64, b: f64) -> Option<(usize, usize)> {
        let lo = self.nearest(a.max(-self.half_width))?;
        let hi = self.nearest(b.min(self.half_width))?;
        (lo < hi).then_some((lo, hi))
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.y(i))).collect()
    }
}

/// Composite trapezoid rule over all nodes.
pub fn trapezoid(values: &[f64], dy: f64) -> f64 {
    trapezoid_with(Exec::Sequential, values.len(), dy, |i| values[i])
}

/// Trapezoid rule of `f(i)` over `n` nodes.
pub fn trapezoid_with<F>(exec: Exec, n: usize, dy: f64, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if n < 2 {
        return 0.0;
    }
    let ends = 0.5 * (f(0) + f(n - 1));
    dy * (exec.sum(n, &f) - ends)
}

/// Trapezoid rule restricted to nodes `lo..=hi`.
pub fn trapezoid_range(values: &[f64], dy: f64, lo: usize, hi: usize) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let inner: f64 = values[lo..=hi].iter().sum();
    dy * (inner - 0.5 * (values[lo] + values[hi]))
}

/// Running trapezoid integral from the first node.
pub fn cumulative_trapezoid(values: &[f64], dy: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dy * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Second-order central first derivative, one-sided second-order at the ends.
pub fn diff2(values: &[f64], dy: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 3 {
        return out;
    }
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dy);
    }
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dy);
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dy);
    out
}

/// Second-order central second derivative on interior nodes (ends set to 0).
pub fn second_diff2(values: &[f64], dy: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    for i in 1..n.saturating_sub(1) {
        out[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (dy * dy);
    }
    out
}

// Central-difference weights for orders 2, 4, 6, 8 (offsets 1..=k).
const CENTRAL: [&[f64]; 4] = [
    &[1.0 / 2.0],
    &[2.0 / 3.0, -1.0 / 12.0],
    &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
    &[4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
];

/// Eighth-order central first derivative, degrading to lower-order central
/// stencils near the ends and one-sided second order at the end nodes.
///
/// Used by the diagnostics, where integration-by-parts identities are tested
/// to near machine precision.
pub fn diff8(values: &[f64], dy: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    diff8_into(Exec::Sequential, values, dy, &mut out);
    out
}

pub fn diff8_into(exec: Exec, values: &[f64], dy: f64, out: &mut [f64]) {
    let n = values.len();
    assert_eq!(out.len(), n);
    if n < 3 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    exec.fill(out, |i| {
        if i == 0 {
            return (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dy);
        }
        if i == n - 1 {
            return (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dy);
        }
        let reach = i.min(n - 1 - i).min(4);
        let w = CENTRAL[reach - 1];
        let mut s = 0.0;
        for (k, wk) in w.iter().enumerate() {
            let o = k + 1;
            s += wk * (values[i + o] - values[i - o]);
        }
        s / dy
    });
}

/// Monotone piecewise-cubic (Fritsch–Carlson) interpolant through
/// strictly increasing knots.
#[derive(Clone, Debug)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Malformed(
                "interpolation needs at least two aligned knots".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Malformed("knots must be strictly increasing".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] <= 0.0 {
                    d[k] = 0.0;
                } else {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Pchip { x, y, d })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value at `t`; outside the knot range the end values are held.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let k = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(k) => return self.y[k],
            Err(k) => k - 1,
        };
        hermite(
            self.x[k],
            self.x[k + 1],
            self.y[k],
            self.y[k + 1],
            self.d[k],
            self.d[k + 1],
            t,
        )
    }
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

/// Cubic Hermite interpolation on `[x0, x1]`.
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = x1 - x0;
    let s = (t - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Derivative of the cubic Hermite interpolant on `[x0, x1]`.
pub fn hermite_slope(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = x1 - x0;
    let s = (t - x0) / h;
    let s2 = s * s;
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = (-6.0 * s2 + 6.0 * s) / h;
    let dh11 = 3.0 * s2 - 2.0 * s;
    dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1
}

/// Least-squares line `v = a + s u`; returns `(a, s)`.
pub fn linear_fit(u: &[f64], v: &[f64]) -> Option<(f64, f64)> {
    let n = u.len();
    if n < 2 || v.len() != n {
        return None;
    }
    let mu = u.iter().sum::<f64>() / n as f64;
    let mv = v.iter().sum::<f64>() / n as f64;
    let suu: f64 = u.iter().map(|x| (x - mu) * (x - mu)).sum();
    if suu <= 0.0 {
        return None;
    }
    let suv: f64 = u.iter().zip(v).map(|(x, y)| (x - mu) * (y - mv)).sum();
    let s = suv / suu;
    Some((mv - s * mu, s))
}
