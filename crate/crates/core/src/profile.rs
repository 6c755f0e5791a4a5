//! Seed energy-density profiles on one light-crossing interval.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Linear,
    CubicMonotone,
}

/// Sampled density `ρ(τ) = φ̇²(τ)` on a seed interval `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFunction {
    taus: Vec<f64>,
    rhos: Vec<f64>,
    slopes: Vec<f64>,
    interpolation: Interpolation,
}

impl ProfileFunction {
    pub fn from_samples(
        taus: Vec<f64>,
        rhos: Vec<f64>,
        interpolation: Interpolation,
    ) -> Result<Self> {
        if taus.len() < 2 || taus.len() != rhos.len() {
            return Err(Error::contract("profile needs at least two (τ, ρ) samples"));
        }
        if taus.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::contract(
                "profile sample times must be strictly increasing",
            ));
        }
        if let Some(bad) = rhos.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::contract(format!(
                "classical density must be finite and non-negative, got {bad}"
            )));
        }
        let slopes = match interpolation {
            Interpolation::Linear => Vec::new(),
            Interpolation::CubicMonotone => pchip_slopes(&taus, &rhos),
        };
        Ok(ProfileFunction {
            taus,
            rhos,
            slopes,
            interpolation,
        })
    }

    /// Samples `seed` at `samples` evenly spaced points of `[a, b]`.
    pub fn sample(
        seed: &dyn SeedProfile,
        a: f64,
        b: f64,
        samples: usize,
        interpolation: Interpolation,
    ) -> Result<Self> {
        if samples < 2 || !(b > a) {
            return Err(Error::contract(
                "seed sampling needs b > a and at least two samples",
            ));
        }
        let taus: Vec<f64> = (0..samples)
            .map(|i| a + (b - a) * i as f64 / (samples - 1) as f64)
            .collect();
        let rhos = taus.iter().map(|&t| seed.density(t)).collect();
        Self::from_samples(taus, rhos, interpolation)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.taus[0], *self.taus.last().unwrap())
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Interpolated density; arguments are clamped to the seed interval.
    pub fn eval(&self, tau: f64) -> f64 {
        let (a, b) = self.interval();
        let x = tau.clamp(a, b);
        let n = self.taus.len();
        let i = self.taus.partition_point(|&t| t <= x).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.taus[i], self.taus[i + 1]);
        let (y0, y1) = (self.rhos[i], self.rhos[i + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        match self.interpolation {
            Interpolation::Linear => y0 + s * (y1 - y0),
            Interpolation::CubicMonotone => {
                let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
                let s2 = s * s;
                let s3 = s2 * s;
                (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                    + (s3 - 2.0 * s2 + s) * h * m0
                    + (-2.0 * s3 + 3.0 * s2) * y1
                    + (s3 - s2) * h * m1
            }
        }
    }
}

/// Fritsch–Carlson slopes; the interpolant is monotone between samples,
/// hence non-negative for non-negative data.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1)
        .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
        .collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
        }
    }
    m
}

/// An analytic initial density profile.
pub trait SeedProfile: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn density(&self, tau: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSeed {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl SeedProfile for GaussianSeed {
    fn name(&self) -> &'static str {
        "gaussian"
    }
    fn density(&self, tau: f64) -> f64 {
        let z = (tau - self.center) / self.width;
        self.amplitude * (-0.5 * z * z).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformSeed {
    pub value: f64,
}

impl SeedProfile for UniformSeed {
    fn name(&self) -> &'static str {
        "uniform"
    }
    fn density(&self, _tau: f64) -> f64 {
        self.value
    }
}

/// `φ(τ) = sin(kπτ/L)`, so `ρ = (kπ/L)² cos²(kπτ/L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSeed {
    pub k: f64,
    pub length: f64,
}

impl SeedProfile for ModeSeed {
    fn name(&self) -> &'static str {
        "mode"
    }
    fn density(&self, tau: f64) -> f64 {
        let q = self.k * PI / self.length;
        let c = (q * tau).cos();
        q * q * c * c
    }
}

/// Named seed parameters, as read from a `[seed]` section.
pub type SeedParams = BTreeMap<String, f64>;

type SeedBuilder = fn(&SeedParams, f64) -> Result<Box<dyn SeedProfile>>;

/// Seed kinds selectable by name.
#[derive(Clone)]
pub struct SeedRegistry {
    builders: BTreeMap<&'static str, SeedBuilder>,
}

fn param(p: &SeedParams, key: &str, default: Option<f64>) -> Result<f64> {
    p.get(key)
        .copied()
        .or(default)
        .ok_or_else(|| Error::config(None, Some(key), "missing seed parameter"))
}

impl Default for SeedRegistry {
    fn default() -> Self {
        let mut r = SeedRegistry {
            builders: BTreeMap::new(),
        };
        r.register("gaussian", |p, _| {
            let width = param(p, "width", Some(0.2))?;
            if !(width > 0.0) {
                return Err(Error::config(
                    None,
                    Some("width"),
                    "gaussian width must be positive",
                ));
            }
            Ok(Box::new(GaussianSeed {
                center: param(p, "center", Some(0.0))?,
                width,
                amplitude: param(p, "amplitude", Some(1.0))?,
            }))
        });
        r.register("uniform", |p, _| {
            Ok(Box::new(UniformSeed {
                value: param(p, "value", Some(1.0))?,
            }))
        });
        r.register("mode", |p, length| {
            Ok(Box::new(ModeSeed {
                k: param(p, "k", Some(1.0))?,
                length,
            }))
        });
        r
    }
}

impl SeedRegistry {
    pub fn register(&mut self, name: &'static str, builder: SeedBuilder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.builders.keys().copied()
    }

    /// Builds the seed `name`; `length` is the cavity rest length.
    pub fn build(
        &self,
        name: &str,
        params: &SeedParams,
        length: f64,
    ) -> Result<Box<dyn SeedProfile>> {
        let builder = self.builders.get(name).ok_or_else(|| {
            let known: Vec<_> = self.names().collect();
            Error::config(
                None,
                Some("kind"),
                format!("unknown seed kind `{name}` (known: {})", known.join(", ")),
            )
        })?;
        builder(params, length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_seed_density() {
        let s = ModeSeed {
            k: 2.0,
            length: 1.0,
        };
        assert!((s.density(0.0) - 4.0 * PI * PI).abs() < 1e-12);
        assert!(s.density(0.25).abs() < 1e-12);
    }

    #[test]
    fn cubic_monotone_stays_non_negative() {
        let seed = GaussianSeed {
            center: 0.0,
            width: 0.01,
            amplitude: 1.0,
        };
        let p =
            ProfileFunction::sample(&seed, -1.0, 1.0, 101, Interpolation::CubicMonotone).unwrap();
        for i in 0..=10_000 {
            let t = -1.0 + 2.0 * i as f64 / 10_000.0;
            assert!(p.eval(t) >= 0.0);
        }
    }

    #[test]
    fn interpolation_accuracy() {
        let seed = GaussianSeed {
            center: 0.1,
            width: 0.2,
            amplitude: 2.0,
        };
        let p =
            ProfileFunction::sample(&seed, -1.0, 1.0, 8193, Interpolation::CubicMonotone).unwrap();
        for &t in &[-0.33, 0.0, 0.1234, 0.5] {
            assert!((p.eval(t) - seed.density(t)).abs() < 1e-8);
        }
        let lin = ProfileFunction::sample(&seed, -1.0, 1.0, 8193, Interpolation::Linear).unwrap();
        assert!((lin.eval(0.1234) - seed.density(0.1234)).abs() < 1e-6);
    }

    #[test]
    fn negative_density_rejected() {
        assert!(ProfileFunction::from_samples(
            vec![0.0, 1.0],
            vec![1.0, -1.0],
            Interpolation::Linear
        )
        .is_err());
    }

    #[test]
    fn registry_lookup() {
        let r = SeedRegistry::default();
        let s = r
            .build("uniform", &SeedParams::from([("value".into(), 3.0)]), 1.0)
            .unwrap();
        assert_eq!(s.density(0.4), 3.0);
        assert!(r.build("sawtooth", &SeedParams::new(), 1.0).is_err());
        assert_eq!(
            r.names().collect::<Vec<_>>(),
            vec!["gaussian", "mode", "uniform"]
        );
    }
}
