//! Third-order jets of scalar maps and the Schwarzian derivative.

use crate::error::{Error, Result};

/// Value and first three derivatives of a map at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet3 {
    pub const fn new(value: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Jet3 { value, d1, d2, d3 }
    }

    /// Jet of the identity map at `x`.
    pub const fn identity(x: f64) -> Self {
        Jet3 {
            value: x,
            d1: 1.0,
            d2: 0.0,
            d3: 0.0,
        }
    }

    /// Jet of `outer ∘ inner`, where `outer` is taken at `inner.value`.
    pub fn compose(outer: &Jet3, inner: &Jet3) -> Jet3 {
        let g1 = inner.d1;
        Jet3 {
            value: outer.value,
            d1: outer.d1 * g1,
            d2: outer.d2 * g1 * g1 + outer.d1 * inner.d2,
            d3: outer.d3 * g1 * g1 * g1 + 3.0 * outer.d2 * g1 * inner.d2 + outer.d1 * inner.d3,
        }
    }

    /// Jet of the inverse map at `self.value`.
    pub fn inverse(&self) -> Result<Jet3> {
        if self.d1 == 0.0 {
            return Err(Error::Singular(self.d1));
        }
        let p = self.d1;
        Ok(Jet3 {
            value: f64::NAN,
            d1: 1.0 / p,
            d2: -self.d2 / (p * p * p),
            d3: (3.0 * self.d2 * self.d2 - p * self.d3) / p.powi(5),
        })
    }

    /// `S = f⃛/ḟ − (3/2)(f̈/ḟ)²`.
    pub fn schwarzian(&self) -> Result<f64> {
        schwarzian(self.d1, self.d2, self.d3)
    }
}

/// Schwarzian derivative from the first three derivatives.
pub fn schwarzian(d1: f64, d2: f64, d3: f64) -> Result<f64> {
    if d1 == 0.0 || !d1.is_finite() {
        return Err(Error::Singular(d1));
    }
    let r = d2 / d1;
    Ok(d3 / d1 - 1.5 * r * r)
}

/// Schwarzian of any thrice-differentiable map given as a jet function.
pub fn schwarzian_of<F: Fn(f64) -> Jet3>(g: F, x: f64) -> Result<f64> {
    g(x).schwarzian()
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}
