//! Cubic splines with per-segment end conditions.
//!
//! A [`PiecewiseSpline`] chains independent splines so that velocity kinks
//! can sit exactly on segment boundaries. Evaluation is right-continuous at
//! those boundaries.

use crate::error::{Error, Result};

/// Interpolating cubic spline over strictly increasing knots.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    ms: Vec<f64>,
}

impl CubicSpline {
    /// Builds the spline. `end_slopes` clamps the first derivative at both
    /// ends; `None` gives the natural spline.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, end_slopes: Option<(f64, f64)>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::contract(
                "spline needs at least two (x, y) pairs of equal length",
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::contract("spline knots must be strictly increasing"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::contract("spline samples must be finite"));
        }

        // Tridiagonal system for the second derivatives (Thomas algorithm).
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut lower = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        match end_slopes {
            Some((s0, _)) => {
                let h = xs[1] - xs[0];
                diag[0] = h / 3.0;
                upper[0] = h / 6.0;
                rhs[0] = (ys[1] - ys[0]) / h - s0;
            }
            None => diag[0] = 1.0,
        }
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            lower[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            upper[i] = h1 / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        match end_slopes {
            Some((_, s1)) => {
                let h = xs[n - 1] - xs[n - 2];
                lower[n - 1] = h / 6.0;
                diag[n - 1] = h / 3.0;
                rhs[n - 1] = s1 - (ys[n - 1] - ys[n - 2]) / h;
            }
            None => diag[n - 1] = 1.0,
        }
        for i in 1..n {
            let w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut ms = vec![0.0; n];
        ms[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            ms[i] = (rhs[i] - upper[i] * ms[i + 1]) / diag[i];
        }
        Ok(CubicSpline { xs, ys, ms })
    }

    pub fn start(&self) -> f64 {
        self.xs[0]
    }

    pub fn end(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    /// Value and first three derivatives at `x`, extrapolating the end cubics.
    pub fn eval(&self, x: f64) -> [f64; 4] {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.ms[i], self.ms[i + 1]);
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 =
            (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2 = a * m0 + b * m1;
        let d3 = (m1 - m0) / h;
        [value, d1, d2, d3]
    }
}

/// Consecutive splines sharing their boundary knots.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSpline {
    segments: Vec<CubicSpline>,
}

impl PiecewiseSpline {
    pub fn new(segments: Vec<CubicSpline>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::contract(
                "piecewise spline needs at least one segment",
            ));
        }
        for w in segments.windows(2) {
            let gap = (w[1].start() - w[0].end()).abs();
            if gap > 1e-12 * w[0].end().abs().max(1.0) {
                return Err(Error::contract("spline segments must share boundary knots"));
            }
        }
        Ok(PiecewiseSpline { segments })
    }

    pub fn start(&self) -> f64 {
        self.segments[0].start()
    }

    pub fn end(&self) -> f64 {
        self.segments.last().unwrap().end()
    }

    pub fn segments(&self) -> &[CubicSpline] {
        &self.segments
    }

    /// Value and derivatives, right-continuous at segment boundaries.
    pub fn eval(&self, x: f64) -> [f64; 4] {
        let idx = self
            .segments
            .partition_point(|s| s.start() <= x)
            .saturating_sub(1);
        self.segments[idx].eval(x)
    }
}
