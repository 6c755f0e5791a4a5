//! Vacuum energy of the cavity from Moore's function and the Schwarzian chain.
//!
//! `R` solves `R(τ) − R(f(τ)) = 2` with the static branch `R(τ) = τ/L`. The
//! vacuum density is `ϱ = −(π/48)Ṙ² − S[R]/(24π)`, and along a ray path it
//! evolves as `ϱ(T_n) = (ϱ + A_n)·D_n²` with the cumulative anomaly
//! `A_n = S[T_n]/(24π) = −(1/24π) Σ D_k⁻² S[f](T_k)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::billiard::{BilliardMap, BounceMap};
use crate::classical::{BounceEnergy, MAX_PULLBACK_STEPS};
use crate::error::{Error, Result};
use crate::jet::{CompensatedSum, Jet3};
use crate::quad::Quadrature;

/// `R` together with its first three derivatives at one label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MooreJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    /// Pull-back steps taken to reach the static branch.
    pub steps: usize,
}

impl MooreJet {
    pub fn schwarzian(&self) -> Result<f64> {
        crate::jet::schwarzian(self.d1, self.d2, self.d3)
    }

    /// `ϱ = −(π/48)Ṙ² − S[R]/(24π)`.
    pub fn density(&self) -> Result<f64> {
        Ok(-PI / 48.0 * self.d1 * self.d1 - self.schwarzian()? / (24.0 * PI))
    }
}

/// Moore's function of a bounce map, normalised so that `R(τ) = 2τ/T₀` on the
/// static branch (`T₀` the rest round trip, so `τ/L` for one wall).
#[derive(Clone, Copy)]
pub struct MooreFunction<'a> {
    map: &'a dyn BounceMap,
}

impl<'a> MooreFunction<'a> {
    pub fn new(map: &'a dyn BounceMap) -> Self {
        MooreFunction { map }
    }

    pub fn map(&self) -> &'a dyn BounceMap {
        self.map
    }

    /// Labels at or below this use the closed-form branch.
    pub fn static_region_end(&self) -> f64 {
        self.map.static_until()
    }

    fn static_slope(&self) -> f64 {
        2.0 / self.map.rest_round_trip()
    }

    /// `R(τ) = R(f^k(τ)) + 2k`.
    pub fn eval(&self, tau: f64) -> Result<f64> {
        let end = self.static_region_end();
        let mut t = tau;
        let mut k = 0usize;
        while t > end {
            t = self.map.backward(t)?.to;
            k += 1;
            if k > MAX_PULLBACK_STEPS {
                return Err(Error::Domain(format!(
                    "pull-back of τ = {tau} did not reach the static region"
                )));
            }
        }
        Ok(self.static_slope() * t + 2.0 * k as f64)
    }

    /// `R` and its derivatives, composing the jets of `f` along the pull-back.
    pub fn jet(&self, tau: f64) -> Result<MooreJet> {
        let end = self.static_region_end();
        let mut t = tau;
        let mut acc = Jet3::identity(tau);
        let mut k = 0usize;
        while t > end {
            let j = self.map.jet(t)?;
            acc = Jet3::compose(&j, &acc);
            t = j.value;
            k += 1;
            if k > MAX_PULLBACK_STEPS {
                return Err(Error::Domain(format!(
                    "pull-back of τ = {tau} did not reach the static region"
                )));
            }
        }
        let c = self.static_slope();
        Ok(MooreJet {
            value: c * t + 2.0 * k as f64,
            d1: c * acc.d1,
            d2: c * acc.d2,
            d3: c * acc.d3,
            steps: k,
        })
    }

    pub fn schwarzian(&self, tau: f64) -> Result<f64> {
        self.jet(tau)?.schwarzian()
    }

    /// Vacuum energy profile `ϱ(τ)`; `⟨T₀₀(t, x)⟩ = ϱ(t + x) + ϱ(t − x)`.
    pub fn quantum_density(&self, tau: f64) -> Result<f64> {
        self.jet(tau)?.density()
    }

    /// `R(τ) − R(f(τ)) − 2`.
    pub fn residual(&self, tau: f64) -> Result<f64> {
        let back = self.map.backward(tau)?.to;
        Ok(self.eval(tau)? - self.eval(back)? - 2.0)
    }
}

/// Static density `−π/(48L²)` of a cavity with rest round trip `2L`.
pub fn static_density(map: &dyn BounceMap) -> f64 {
    let l = 0.5 * map.rest_round_trip();
    -PI / (48.0 * l * l)
}

/// `A_n(τ) = −(1/24π) Σ_{k=1}^n D_k⁻²(τ) S[f](T_k(τ))`, compensated summation.
pub fn cumulative_anomaly(map: &dyn BounceMap, tau: f64, n: usize) -> Result<f64> {
    Ok(anomaly_series(map, tau, n)?
        .last()
        .map_or(0.0, |s| s.anomaly))
}

/// `A_n = S[T_n](τ)/(24π)` from the composed jets of `f⁻¹`.
pub fn cumulative_anomaly_direct(map: &dyn BounceMap, tau: f64, n: usize) -> Result<f64> {
    let mut acc = Jet3::identity(tau);
    let mut t = tau;
    for _ in 0..n {
        let j = map.inverse_jet(t)?;
        acc = Jet3::compose(&j, &acc);
        t = j.value;
    }
    Ok(acc.schwarzian()? / (24.0 * PI))
}

/// One entry of an anomaly series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnomalyStep {
    pub label: f64,
    pub log_doppler: f64,
    pub anomaly: f64,
}

/// `(T_k, ln D_k, A_k)` for `k = 1..=n`.
pub fn anomaly_series(map: &dyn BounceMap, tau: f64, n: usize) -> Result<Vec<AnomalyStep>> {
    let mut out = Vec::with_capacity(n);
    let mut sum = CompensatedSum::default();
    let mut t = tau;
    let mut log_d = 0.0;
    for _ in 0..n {
        let s = map.forward(t)?;
        t = s.to;
        log_d += s.log_doppler;
        let sf = map.jet(t)?.schwarzian()?;
        sum.add(-(-2.0 * log_d).exp() * sf / (24.0 * PI));
        out.push(AnomalyStep {
            label: t,
            log_doppler: log_d,
            anomaly: sum.value(),
        });
    }
    Ok(out)
}

/// Terms of `ϱ(T_n) = ϱ(τ)D_n² + A_n D_n²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumEvolution {
    pub label: f64,
    pub seed_density: f64,
    pub anomaly: f64,
    pub log_doppler: f64,
    pub doppler_term: f64,
    pub anomaly_term: f64,
    pub density: f64,
}

impl QuantumEvolution {
    /// `|A_n/ϱ(τ)|`; near one the anomaly competes with the Doppler growth.
    pub fn anomaly_ratio(&self) -> f64 {
        (self.anomaly / self.seed_density).abs()
    }
}

/// Evolves the vacuum density at `τ` through `n` round trips.
pub fn quantum_evolution(map: &dyn BounceMap, tau: f64, n: usize) -> Result<QuantumEvolution> {
    let seed_density = MooreFunction::new(map).quantum_density(tau)?;
    let (label, log_doppler, anomaly) = match anomaly_series(map, tau, n)?.last() {
        Some(s) => (s.label, s.log_doppler, s.anomaly),
        None => (tau, 0.0, 0.0),
    };
    let d2 = (2.0 * log_doppler).exp();
    Ok(QuantumEvolution {
        label,
        seed_density,
        anomaly,
        log_doppler,
        doppler_term: seed_density * d2,
        anomaly_term: anomaly * d2,
        density: (seed_density + anomaly) * d2,
    })
}

/// Vacuum energy inside a cavity.
pub struct QuantumField<'a> {
    moore: MooreFunction<'a>,
    single: Option<&'a BilliardMap>,
    pub quadrature: Quadrature,
}

impl<'a> QuantumField<'a> {
    pub fn new(map: &'a BilliardMap) -> Self {
        QuantumField {
            moore: MooreFunction::new(map),
            single: Some(map),
            quadrature: Quadrature::default(),
        }
    }

    pub fn with_map(map: &'a dyn BounceMap) -> Self {
        QuantumField {
            moore: MooreFunction::new(map),
            single: None,
            quadrature: Quadrature::default(),
        }
    }

    pub fn moore(&self) -> &MooreFunction<'a> {
        &self.moore
    }

    /// `E_n = ∫_a^b [ϱ(σ) + A_n(σ)] D_n(σ) dσ` over the seed interval, `n = 0..=n_max`.
    pub fn energy_series(&self, n_max: usize, spots: &[f64]) -> Result<Vec<BounceEnergy>> {
        let map = self.moore.map();
        let (a, b) = crate::classical::seed_interval(map);
        let integrand = |sigma: f64| -> Result<Vec<f64>> {
            let rho = self.moore.quantum_density(sigma)?;
            let mut out = Vec::with_capacity(n_max + 1);
            out.push(rho);
            for s in anomaly_series(map, sigma, n_max)? {
                out.push((rho + s.anomaly) * s.log_doppler.exp());
            }
            Ok(out)
        };
        let r = self
            .quadrature
            .integrate_vec(integrand, a, b, n_max + 1, spots)?;
        let labels = crate::billiard::forward_series(map, b, n_max)?;
        Ok((0..=n_max)
            .map(|n| BounceEnergy {
                bounce: n,
                label: if n == 0 { b } else { labels[n - 1].0 },
                energy: r.value[n],
                error_bound: r.error[n],
            })
            .collect())
    }

    /// `E(t) = ∫ ϱ` over `[t − L(t), t + L(t)]` (single-wall fields only).
    pub fn direct_energy(&self, t: f64, breakpoints: &[f64]) -> Result<f64> {
        let single = self.single.ok_or_else(|| {
            Error::contract("direct energy needs the wall trajectory of a single-wall field")
        })?;
        if t < 0.0 {
            return Err(Error::contract(format!(
                "total energy needs t ≥ 0, got {t}"
            )));
        }
        let len = single.trajectory().position(t);
        let (v, _) = self.quadrature.integrate(
            |tau| self.moore.quantum_density(tau),
            t - len,
            t + len,
            breakpoints,
        )?;
        Ok(v)
    }
}
