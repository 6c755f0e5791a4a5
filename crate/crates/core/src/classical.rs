//! Classical energy densities evolved along optical paths.
//!
//! The profile obeys `ρ(τ) = ρ(f(τ))·ḟ(τ)²`, so the density at any late
//! label is found by pulling the label back into the seed interval and
//! multiplying by the squared cumulative Doppler factor. The field energy at
//! time `t` is `∫ ρ(τ) dτ` over `[t − L(t), t + L(t)]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::billiard::{BilliardMap, BounceMap};
use crate::error::{Error, Result};
use crate::profile::ProfileFunction;
use crate::quad::Quadrature;

/// Pull-backs longer than this are treated as leaving the computable domain.
pub const MAX_PULLBACK_STEPS: usize = 1_000_000;

/// Below this bounce count the peak asymptotics are flagged as unreliable.
pub const ASYMPTOTIC_MIN_BOUNCES: usize = 20;

/// Boundary condition on both walls. Only the field sign depends on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    /// Sign in `A(t,x) = φ(t+x) ∓ φ(t−x)`.
    pub fn field_sign(self) -> f64 {
        match self {
            BoundaryCondition::Dirichlet => -1.0,
            BoundaryCondition::Neumann => 1.0,
        }
    }
}

/// `T₀₀ = ½(∂ₜA)² + ½(∂ₓA)²` from the profile slopes on both light cones.
pub fn energy_density_from_slopes(
    phi_dot_plus: f64,
    phi_dot_minus: f64,
    bc: BoundaryCondition,
) -> f64 {
    let s = bc.field_sign();
    let a_t = phi_dot_plus + s * phi_dot_minus;
    let a_x = phi_dot_plus - s * phi_dot_minus;
    0.5 * (a_t * a_t + a_x * a_x)
}

/// The seed interval `[a, f⁻¹(a)]` covering one light crossing before the motion.
pub fn seed_interval(map: &dyn BounceMap) -> (f64, f64) {
    let b = map.static_until();
    (b - map.rest_round_trip(), b)
}

/// Energy of the field at a bounce time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BounceEnergy {
    pub bounce: usize,
    /// Light-cone label `T_n(b)` closing the bounce window.
    pub label: f64,
    pub energy: f64,
    pub error_bound: f64,
}

/// Total energy near a requested time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TotalEnergy {
    pub requested_time: f64,
    pub bounce: usize,
    pub bounce_time: f64,
    pub bounce_energy: f64,
    /// `E(t)` by direct quadrature of the instantaneous density, when asked for.
    pub direct_energy: Option<f64>,
}

/// Predicted and exact peak (or trough) shapes at bounce `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakProfile {
    pub bounce: usize,
    pub positions: Vec<f64>,
    pub predicted: Vec<f64>,
    pub exact: Vec<f64>,
    pub below_asymptotic_regime: bool,
}

/// A seed density evolved by a bounce map.
pub struct ClassicalField<'a> {
    seed: ProfileFunction,
    map: &'a dyn BounceMap,
    single: Option<&'a BilliardMap>,
    pub quadrature: Quadrature,
}

impl<'a> ClassicalField<'a> {
    /// Field inside a single-wall cavity.
    pub fn new(seed: ProfileFunction, map: &'a BilliardMap) -> Result<Self> {
        let mut field = Self::with_map(seed, map)?;
        field.single = Some(map);
        Ok(field)
    }

    /// Field evolved by an arbitrary bounce map, e.g. one two-wall family.
    pub fn with_map(seed: ProfileFunction, map: &'a dyn BounceMap) -> Result<Self> {
        let (a, b) = seed.interval();
        let image = map.forward(a)?.to;
        let scale = map.rest_round_trip();
        if (image - b).abs() > 1e-9 * scale {
            return Err(Error::contract(format!(
                "seed interval [{a}, {b}] must span one bounce: f⁻¹({a}) = {image}"
            )));
        }
        Ok(ClassicalField {
            seed,
            map,
            single: None,
            quadrature: Quadrature::default(),
        })
    }

    pub fn seed(&self) -> &ProfileFunction {
        &self.seed
    }

    /// `ρ(τ)` at any label, by pull-back into (or push-forward onto) the seed.
    pub fn density(&self, tau: f64) -> Result<f64> {
        let (a, b) = self.seed.interval();
        let slack = 1e-12 * self.map.rest_round_trip();
        let mut t = tau;
        let mut log_scale = 0.0;
        let mut steps = 0;
        while t >= b {
            let s = self.map.backward(t)?;
            log_scale += 2.0 * s.log_doppler;
            t = s.to;
            steps += 1;
            if steps > MAX_PULLBACK_STEPS {
                return Err(Error::Domain(format!(
                    "pull-back of τ = {tau} exceeded {MAX_PULLBACK_STEPS} steps"
                )));
            }
        }
        while t < a - slack {
            let s = self.map.forward(t)?;
            log_scale -= 2.0 * s.log_doppler;
            t = s.to;
            steps += 1;
            if steps > MAX_PULLBACK_STEPS || t >= b {
                return Err(Error::Domain(format!(
                    "push-forward of τ = {tau} left the seed interval"
                )));
            }
        }
        let rho = self.seed.eval(t);
        Ok(if rho == 0.0 {
            0.0
        } else {
            rho * log_scale.exp()
        })
    }

    /// `(T_n(τ), ρ(T_n(τ)) = ρ₀(τ)·D_n(τ)²)` for `τ` in the seed interval.
    pub fn evolve_density(&self, tau: f64, n: usize) -> Result<(f64, f64)> {
        let (a, b) = self.seed.interval();
        if !(a..=b).contains(&tau) {
            return Err(Error::Domain(format!(
                "τ = {tau} lies outside the seed interval [{a}, {b}]"
            )));
        }
        let (t, log_d) = crate::billiard::iterate_forward(self.map, tau, n)?;
        Ok((t, self.seed.eval(tau) * (2.0 * log_d).exp()))
    }

    /// `T₀₀(t, x) = ρ(t + x) + ρ(t − x)` on a grid of `0 ≤ x ≤ L(t)`.
    pub fn density_field(&self, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
        if let Some(single) = self.single {
            let len = single.trajectory().position(t);
            let tol = 1e-12 * len;
            if let Some(x) = xs.iter().find(|&&x| x < -tol || x > len + tol) {
                return Err(Error::Domain(format!(
                    "x = {x} lies outside the cavity [0, {len}] at t = {t}"
                )));
            }
        }
        xs.par_iter()
            .map(|&x| Ok(self.density(t + x)? + self.density(t - x)?))
            .collect()
    }

    /// `∫ ρ(τ) dτ` over `[lo, hi]`.
    pub fn energy_between(&self, lo: f64, hi: f64, breakpoints: &[f64]) -> Result<f64> {
        let (v, _) = self
            .quadrature
            .integrate(|tau| self.density(tau), lo, hi, breakpoints)?;
        Ok(v)
    }

    /// `E(t)` by direct quadrature over `[t − L(t), t + L(t)]` (single-wall fields only).
    pub fn direct_energy(&self, t: f64) -> Result<f64> {
        let single = self.single.ok_or_else(|| {
            Error::contract("direct energy needs the wall trajectory of a single-wall field")
        })?;
        let len = single.trajectory().position(t);
        // Panel edges at bounce images of the seed edges keep kinks of ρ off panel interiors.
        let period = self.map.rest_round_trip();
        let (a, _) = self.seed.interval();
        let k = ((t - len - a) / period).floor();
        let breaks: Vec<f64> = (0..3).map(|i| a + (k + i as f64) * period).collect();
        self.energy_between(t - len, t + len, &breaks)
    }

    /// `E_n = ∫_a^b ρ₀(τ) D_n(τ) dτ` for every `n = 0..=n_max`, from one shared partition.
    ///
    /// `spots` are labels (such as periodic starting points) used as forced panel edges.
    pub fn energy_series(&self, n_max: usize, spots: &[f64]) -> Result<Vec<BounceEnergy>> {
        let (a, b) = self.seed.interval();
        let integrand = |sigma: f64| -> Result<Vec<f64>> {
            let rho = self.seed.eval(sigma);
            let mut out = Vec::with_capacity(n_max + 1);
            out.push(rho);
            let mut t = sigma;
            let mut log_d = 0.0;
            for _ in 0..n_max {
                let s = self.map.forward(t)?;
                t = s.to;
                log_d += s.log_doppler;
                out.push(if rho == 0.0 { 0.0 } else { rho * log_d.exp() });
            }
            Ok(out)
        };
        let r = self
            .quadrature
            .integrate_vec(integrand, a, b, n_max + 1, spots)?;
        let labels = crate::billiard::forward_series(self.map, b, n_max)?;
        Ok((0..=n_max)
            .map(|n| BounceEnergy {
                bounce: n,
                label: if n == 0 { b } else { labels[n - 1].0 },
                energy: r.value[n],
                error_bound: r.error[n],
            })
            .collect())
    }

    /// Total energy at the bounce time `T*_n(b)` nearest to `t`, optionally
    /// with the exact `E(t)` (single-wall fields only).
    pub fn total_energy(&self, t: f64, spots: &[f64], with_direct: bool) -> Result<TotalEnergy> {
        if t < 0.0 {
            return Err(Error::contract(format!(
                "total energy needs t ≥ 0, got {t}"
            )));
        }
        let single = self.single.ok_or_else(|| {
            Error::contract("total energy needs the wall trajectory of a single-wall field")
        })?;
        let (_, b) = self.seed.interval();
        let bounce_time = |label: f64| single.retarded_time(label);
        // Walk forward until the bounce times straddle t.
        let mut label = b;
        let mut n = 0usize;
        let mut time = bounce_time(label)?;
        loop {
            let next = self.map.forward(label)?.to;
            let next_time = bounce_time(next)?;
            if next_time > t {
                if (next_time - t).abs() < (t - time).abs() {
                    n += 1;
                    time = next_time;
                }
                break;
            }
            label = next;
            time = next_time;
            n += 1;
            if n > MAX_PULLBACK_STEPS {
                return Err(Error::Domain(format!(
                    "time {t} is beyond the computable horizon"
                )));
            }
        }
        let series = self.energy_series(n, spots)?;
        let direct_energy = if with_direct {
            Some(self.direct_energy(t)?)
        } else {
            None
        };
        Ok(TotalEnergy {
            requested_time: t,
            bounce: n,
            bounce_time: time,
            bounce_energy: series[n].energy,
            direct_energy,
        })
    }

    /// Peak shape near a positive periodic point `τ₊` after `n` bounces.
    ///
    /// Positions are `nT + τ₊ + ε/D_n(τ₊)`; the prediction is
    /// `ρ₀(τ₊ + ε)·D_n(τ₊ + ε)²` and the exact values come from pull-back.
    pub fn asymptotic_peak_profile(
        &self,
        tau_plus: f64,
        eps: &[f64],
        n: usize,
    ) -> Result<PeakProfile> {
        let period = self.map.rest_round_trip();
        let (_, log_d_peak) = crate::billiard::iterate_forward(self.map, tau_plus, n)?;
        let inv_d = (-log_d_peak).exp();
        let mut profile = PeakProfile {
            bounce: n,
            positions: Vec::with_capacity(eps.len()),
            predicted: Vec::with_capacity(eps.len()),
            exact: Vec::with_capacity(eps.len()),
            below_asymptotic_regime: n < ASYMPTOTIC_MIN_BOUNCES,
        };
        for &e in eps {
            let pos = n as f64 * period + tau_plus + e * inv_d;
            let (_, rho) = self.evolve_density(tau_plus + e, n)?;
            profile.positions.push(pos);
            profile.predicted.push(rho);
            profile.exact.push(self.density(pos)?);
        }
        Ok(profile)
    }

    /// Trough shape near a negative periodic point `τ₋` after `n` bounces.
    ///
    /// Positions are `nT + τ₋ + ε`; the prediction is
    /// `ρ₀(τ₋ + εD_n(τ₋))·D_n(τ₋ + εD_n(τ₋))²`.
    pub fn asymptotic_trough_profile(
        &self,
        tau_minus: f64,
        eps: &[f64],
        n: usize,
    ) -> Result<PeakProfile> {
        let period = self.map.rest_round_trip();
        let (_, log_d) = crate::billiard::iterate_forward(self.map, tau_minus, n)?;
        let d = log_d.exp();
        let mut profile = PeakProfile {
            bounce: n,
            positions: Vec::with_capacity(eps.len()),
            predicted: Vec::with_capacity(eps.len()),
            exact: Vec::with_capacity(eps.len()),
            below_asymptotic_regime: n < ASYMPTOTIC_MIN_BOUNCES,
        };
        for &e in eps {
            let pos = n as f64 * period + tau_minus + e;
            let (_, rho) = self.evolve_density(tau_minus + e * d, n)?;
            profile.positions.push(pos);
            profile.predicted.push(rho);
            profile.exact.push(self.density(pos)?);
        }
        Ok(profile)
    }
}

/// Indices of interior local maxima at least `rel_threshold` times the global maximum.
///
/// Ties on a plateau count once, at the plateau's first sample.
pub fn local_maxima(values: &[f64], rel_threshold: f64) -> Vec<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = rel_threshold * max;
    let mut out = Vec::new();
    let n = values.len();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] && values[i] >= floor {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Full width at half maximum of the peak containing the global maximum,
/// with linear interpolation between samples.
pub fn full_width_half_max(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let (imax, &ymax) = ys.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let half = 0.5 * ymax;
    let mut left = None;
    for i in (0..imax).rev() {
        if ys[i] <= half {
            let s = (half - ys[i]) / (ys[i + 1] - ys[i]);
            left = Some(xs[i] + s * (xs[i + 1] - xs[i]));
            break;
        }
    }
    let mut right = None;
    for i in imax + 1..ys.len() {
        if ys[i] <= half {
            let s = (ys[i - 1] - half) / (ys[i - 1] - ys[i]);
            right = Some(xs[i - 1] + s * (xs[i] - xs[i - 1]));
            break;
        }
    }
    Some(right? - left?)
}
