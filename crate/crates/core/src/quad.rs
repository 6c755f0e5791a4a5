//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.
//!
//! Integrands are fallible because each sample may run a root solve. The
//! partition is shared by all components, so an energy series over many
//! bounce counts is integrated from a single set of ray traces.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
    pub intervals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

fn gk15<F>(f: &F, a: f64, b: f64, dim: usize) -> Result<Panel>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let mut add = |x: f64, wk: f64, wg: f64| -> Result<()> {
        let v = f(x)?;
        if v.len() != dim {
            return Err(Error::contract("integrand changed dimension"));
        }
        for i in 0..dim {
            kronrod[i] += wk * v[i];
            gauss[i] += wg * v[i];
        }
        Ok(())
    };
    add(c, WGK[7], WG[3])?;
    for j in 0..7 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        add(c - h * XGK[j], WGK[j], wg)?;
        add(c + h * XGK[j], WGK[j], wg)?;
    }
    let value: Vec<f64> = kronrod.iter().map(|k| k * h).collect();
    let error = kronrod
        .iter()
        .zip(&gauss)
        .map(|(k, g)| ((k - g) * h).abs())
        .collect();
    Ok(Panel { a, b, value, error })
}

impl Quadrature {
    fn accepted(&self, value: &[f64], error: &[f64]) -> bool {
        value
            .iter()
            .zip(error)
            .all(|(v, e)| *e <= self.abs_tol.max(self.rel_tol * v.abs()))
    }

    /// Integrates `f` over `[a, b]`, with forced panel edges at `breakpoints`.
    pub fn integrate_vec<F>(
        &self,
        f: F,
        a: f64,
        b: f64,
        dim: usize,
        breakpoints: &[f64],
    ) -> Result<QuadResult>
    where
        F: Fn(f64) -> Result<Vec<f64>>,
    {
        if !(b > a) {
            return Err(Error::contract(format!(
                "empty integration interval [{a}, {b}]"
            )));
        }
        let mut edges = vec![a];
        let mut inner: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&x| x > a && x < b)
            .collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        edges.extend(inner);
        edges.push(b);

        let mut panels = Vec::new();
        for w in edges.windows(2) {
            panels.push(gk15(&f, w[0], w[1], dim)?);
        }
        loop {
            let (value, error) = totals(&panels, dim);
            if self.accepted(&value, &error) {
                return Ok(QuadResult {
                    value,
                    error,
                    intervals: panels.len(),
                });
            }
            if panels.len() >= self.max_intervals {
                let worst = (0..dim)
                    .max_by(|&i, &j| {
                        (error[i] / value[i].abs().max(1e-300))
                            .total_cmp(&(error[j] / value[j].abs().max(1e-300)))
                    })
                    .unwrap_or(0);
                return Err(Error::Quadrature {
                    estimate: value[worst],
                    error_bound: error[worst],
                });
            }
            // Split the panel with the largest error relative to its component's tolerance.
            let scale: Vec<f64> = value
                .iter()
                .map(|v| self.abs_tol.max(self.rel_tol * v.abs()))
                .collect();
            let idx = (0..panels.len())
                .max_by(|&i, &j| {
                    let si = panels[i]
                        .error
                        .iter()
                        .zip(&scale)
                        .map(|(e, s)| e / s)
                        .fold(0.0, f64::max);
                    let sj = panels[j]
                        .error
                        .iter()
                        .zip(&scale)
                        .map(|(e, s)| e / s)
                        .fold(0.0, f64::max);
                    si.total_cmp(&sj)
                })
                .unwrap();
            let p = panels.swap_remove(idx);
            let mid = 0.5 * (p.a + p.b);
            if mid <= p.a || mid >= p.b {
                return Err(Error::Quadrature {
                    estimate: value[0],
                    error_bound: error[0],
                });
            }
            panels.push(gk15(&f, p.a, mid, dim)?);
            panels.push(gk15(&f, mid, p.b, dim)?);
        }
    }

    /// Scalar convenience wrapper.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64, breakpoints: &[f64]) -> Result<(f64, f64)>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let r = self.integrate_vec(|x| f(x).map(|v| vec![v]), a, b, 1, breakpoints)?;
        Ok((r.value[0], r.error[0]))
    }
}

fn totals(panels: &[Panel], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut value = vec![0.0; dim];
    let mut error = vec![0.0; dim];
    // Sum in position order so results do not depend on refinement history.
    let mut order: Vec<usize> = (0..panels.len()).collect();
    order.sort_by(|&i, &j| panels[i].a.total_cmp(&panels[j].a));
    for i in order {
        for k in 0..dim {
            value[k] += panels[i].value[k];
            error[k] += panels[i].error[k];
        }
    }
    (value, error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = Quadrature::default();
        let (v, _) = q.integrate(|x| Ok(x.powi(5) - x), 0.0, 2.0, &[]).unwrap();
        assert!((v - (64.0 / 6.0 - 2.0)).abs() < 1e-13);
    }

    #[test]
    fn sharp_peak_converges() {
        let q = Quadrature::default();
        let w = 1e-4;
        let (v, _) = q
            .integrate(
                |x| Ok((-(x - 0.3) * (x - 0.3) / (2.0 * w * w)).exp()),
                -1.0,
                1.0,
                &[0.29, 0.3, 0.31],
            )
            .unwrap();
        let exact = w * (2.0 * std::f64::consts::PI).sqrt();
        assert!(((v - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn vector_components_each_converge() {
        let q = Quadrature::default();
        let r = q
            .integrate_vec(|x| Ok(vec![x.exp(), 1e8 * x.cos()]), 0.0, 1.0, 2, &[])
            .unwrap();
        assert!((r.value[0] - (1f64.exp() - 1.0)).abs() < 1e-12);
        assert!((r.value[1] / 1e8 - 1f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let q = Quadrature {
            max_intervals: 3,
            ..Default::default()
        };
        let err = q
            .integrate(|x| Ok(1.0 / x.abs().sqrt()), -1.0, 1.0, &[])
            .unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
