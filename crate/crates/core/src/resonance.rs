//! Periodic optical trajectories, their exponents, and resonance windows.
//!
//! A ray returns to its label after every period `T` exactly when the wall
//! meets it at a return point, `L(τ* + nT) = T/2` for all `n`. Each such
//! orbit is positive or negative according to whether the cumulative
//! Doppler factor along it grows or decays.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::billiard::{BilliardMap, BounceMap};
use crate::error::{Error, Result};
use crate::roots::bisect;
use crate::trajectory::WallTrajectory;

/// `|λ|` below this (per period) is reported as neutral.
pub const NEUTRAL_THRESHOLD: f64 = 1e-10;
/// Sign-change scan density for return points.
pub const SAMPLES_PER_PERIOD: usize = 4096;
/// Number of later periods a return point must repeat for.
pub const K_CHECK: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrajectorySign {
    Positive,
    Negative,
    Neutral,
}

impl TrajectorySign {
    pub fn from_exponent(lambda: f64) -> Self {
        if lambda > NEUTRAL_THRESHOLD {
            TrajectorySign::Positive
        } else if lambda < -NEUTRAL_THRESHOLD {
            TrajectorySign::Negative
        } else {
            TrajectorySign::Neutral
        }
    }
}

impl fmt::Display for TrajectorySign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrajectorySign::Positive => "positive",
            TrajectorySign::Negative => "negative",
            TrajectorySign::Neutral => "neutral",
        })
    }
}

/// A ray that returns to its label shifted by `T` after every round trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicTrajectory {
    pub start: f64,
    /// Wall-collision time of the first bounce.
    pub return_point: f64,
    pub period: f64,
    pub sign: TrajectorySign,
    /// `λ = ln D_n(τ₀)/n`, per period.
    pub exponent: f64,
    pub series_index: usize,
    /// Largest per-step deviation from `T_k = τ₀ + kT`.
    pub residual: f64,
}

/// Outcome of a return-point search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnPoints {
    pub points: Vec<f64>,
    /// `L(t) = T/2` on whole stretches of the interval (e.g. a static cavity).
    pub degenerate: bool,
}

impl ReturnPoints {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && !self.degenerate
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ReturnPointOptions {
    pub samples_per_period: usize,
    pub k_check: usize,
    /// Relative to the rest length.
    pub tolerance: f64,
}

impl Default for ReturnPointOptions {
    fn default() -> Self {
        ReturnPointOptions {
            samples_per_period: SAMPLES_PER_PERIOD,
            k_check: K_CHECK,
            tolerance: 1e-9,
        }
    }
}

/// Solutions of `L(τ*) = T/2` in `[lo, hi)` that repeat for `k_check` periods.
///
/// Times before the motion starts are skipped; there the wall is static.
pub fn find_return_points(
    traj: &WallTrajectory,
    period: f64,
    interval: (f64, f64),
    opts: &ReturnPointOptions,
) -> Result<ReturnPoints> {
    if !(period > 0.0) {
        return Err(Error::contract(format!(
            "return points need T > 0, got {period}"
        )));
    }
    let half = 0.5 * period;
    let tol = opts.tolerance * traj.rest_length();
    if traj.is_static() {
        let degenerate = (traj.rest_length() - half).abs() <= tol;
        return Ok(ReturnPoints {
            points: Vec::new(),
            degenerate,
        });
    }
    let lo = interval.0.max(traj.motion_start());
    let hi = interval.1;
    if !(hi > lo) {
        return Ok(ReturnPoints {
            points: Vec::new(),
            degenerate: false,
        });
    }
    let drive = traj.period().unwrap_or(period);
    let samples = ((opts.samples_per_period as f64 * (hi - lo) / drive).ceil() as usize).max(16);
    let h = (hi - lo) / samples as f64;
    let g = |t: f64| traj.position(t) - half;

    let mut candidates = Vec::new();
    let mut zero_run = 0usize;
    let mut degenerate = false;
    let mut prev = (lo, g(lo));
    if prev.1.abs() <= tol {
        candidates.push(lo);
        zero_run = 1;
    }
    for i in 1..=samples {
        let t = lo + i as f64 * h;
        let v = g(t);
        if v.abs() <= tol {
            zero_run += 1;
            if zero_run >= 3 {
                degenerate = true;
            }
            if zero_run == 1 && t < hi {
                candidates.push(t);
            }
        } else {
            if zero_run == 0 && prev.1 * v < 0.0 {
                let root = bisect(&g, prev.0, t, 1e-15 * traj.rest_length().max(t.abs()));
                if root < hi {
                    candidates.push(root);
                }
            }
            zero_run = 0;
        }
        prev = (t, v);
    }
    if degenerate {
        return Ok(ReturnPoints {
            points: Vec::new(),
            degenerate: true,
        });
    }
    let points = candidates
        .into_iter()
        .filter(|&t| (1..=opts.k_check).all(|k| g(t + k as f64 * period).abs() <= tol))
        .collect();
    Ok(ReturnPoints {
        points,
        degenerate: false,
    })
}

/// Classifies the orbit through `τ₀`.
///
/// Each step starts from the ideal label `τ₀ + kT`, so repelling orbits are
/// measured without the drift a free forward trace would pick up; the
/// largest deviation of an image from `τ₀ + (k+1)T` is the residual.
pub fn classify(
    map: &dyn BounceMap,
    tau0: f64,
    period: f64,
    n_probe: usize,
) -> Result<PeriodicTrajectory> {
    if n_probe == 0 {
        return Err(Error::contract(
            "classification needs at least one probe step",
        ));
    }
    let threshold = 1e-7 * map.rest_round_trip();
    let mut log_d = 0.0;
    let mut residual: f64 = 0.0;
    let mut first = f64::NAN;
    for k in 0..n_probe {
        let s = map.forward(tau0 + k as f64 * period)?;
        let r = (s.to - tau0 - (k + 1) as f64 * period).abs();
        residual = residual.max(r);
        if residual > threshold {
            return Err(Error::NotPeriodic {
                start: tau0,
                period,
                residual,
            });
        }
        if k == 0 {
            first = s.to;
        }
        log_d += s.log_doppler;
    }
    let exponent = log_d / n_probe as f64;
    Ok(PeriodicTrajectory {
        start: tau0,
        return_point: first - 0.5 * period,
        period,
        sign: TrajectorySign::from_exponent(exponent),
        exponent,
        series_index: 0,
        residual,
    })
}

/// Principal starting points `τ₊m = (−N+2m+1)L/N` and `τ₋m = (−N+2m)L/N`.
pub fn principal_starting_points(n: usize, length: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::contract("resonance order N must be at least 1"));
    }
    let nf = n as f64;
    let plus = (0..n)
        .map(|m| (-nf + 2.0 * m as f64 + 1.0) * length / nf)
        .collect();
    let minus = (0..n)
        .map(|m| (-nf + 2.0 * m as f64) * length / nf)
        .collect();
    Ok((plus, minus))
}

/// `ω_N = Nπ/L`.
pub fn resonant_frequency(n: usize, length: f64) -> f64 {
    n as f64 * PI / length
}

/// Cavity parameters that fix a resonance window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "walls", rename_all = "kebab-case")]
pub enum WindowParams {
    OneWall {
        length: f64,
        amplitude: f64,
    },
    TwoWall {
        length: f64,
        amplitude_right: f64,
        amplitude_left: f64,
        dephasing: f64,
        n: usize,
    },
}

/// Detuning range `lower ≤ Δω/ω ≤ upper` that keeps periodic trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceWindow {
    /// The symmetric bound quoted for the window.
    pub bound: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ResonanceWindow {
    pub fn contains(&self, ratio: f64) -> bool {
        ratio >= self.lower && ratio <= self.upper
    }
}

/// Analytic window edges.
///
/// For two walls, with `A = √(ΔL₁² + ΔL₂² + 2(−1)^N ΔL₁ΔL₂ cos δ)`, the
/// return condition admits `−(A + ΔL₂ sin δ)/L ≤ Δω/ω ≤ (A − ΔL₂ sin δ)/L`;
/// `bound` is the width of the wider side.
pub fn resonance_window(params: &WindowParams) -> ResonanceWindow {
    match *params {
        WindowParams::OneWall { length, amplitude } => {
            let b = amplitude / length;
            ResonanceWindow {
                bound: b,
                lower: -b,
                upper: b,
            }
        }
        WindowParams::TwoWall {
            length,
            amplitude_right,
            amplitude_left,
            dephasing,
            n,
        } => {
            let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
            let (a1, a2) = (amplitude_right, amplitude_left);
            let a = (a1 * a1 + a2 * a2 + 2.0 * parity * a1 * a2 * dephasing.cos())
                .max(0.0)
                .sqrt();
            let shift = a2 * dephasing.sin();
            let upper = (a - shift) / length;
            let lower = -(a + shift) / length;
            ResonanceWindow {
                bound: upper.max(-lower),
                lower,
                upper,
            }
        }
    }
}

/// Drive frequency for detuning `r = Δω/ω` around `ω_N`.
pub fn detuned_frequency(n: usize, length: f64, ratio: f64) -> f64 {
    resonant_frequency(n, length) / (1.0 - ratio)
}

/// Period of the detuned periodic orbits: `N` drive periods, `2πN/ω`.
pub fn detuned_period(n: usize, omega: f64) -> f64 {
    2.0 * PI * n as f64 / omega
}

/// Exponent of a principal orbit at detuning `r`:
/// `ln((1 + ωΔL cos θ)/(1 − ωΔL cos θ))` with `sin θ = −r·L/ΔL`.
pub fn detuned_exponent(n: usize, length: f64, amplitude: f64, ratio: f64) -> Option<f64> {
    let s = -ratio * length / amplitude;
    if s.abs() > 1.0 {
        return None;
    }
    let omega = detuned_frequency(n, length, ratio);
    let x = omega * amplitude * (1.0 - s * s).sqrt();
    Some((x.ln_1p() - (-x).ln_1p()).abs())
}

/// One series in the peak census.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakSeries {
    pub m: usize,
    /// `s_M² = (ω_N ΔL)² − (Mπ)²`.
    pub s_squared: f64,
    /// `ln((1 + s_M)/(1 − s_M))`, defined for `0 < s_M < 1`.
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakCensus {
    pub n: usize,
    pub dl_over_l: f64,
    pub num_series: usize,
    pub series: Vec<PeakSeries>,
    /// `ω_N ΔL < 1`, i.e. the wall stays subluminal.
    pub subluminal: bool,
}

/// Principal series plus one additional series for every `M ≥ 1` with
/// `M < N·ΔL/L`, in order of decreasing exponent.
pub fn peak_census(n: usize, dl_over_l: f64) -> PeakCensus {
    let x = n as f64 * PI * dl_over_l;
    let extra = {
        let r = n as f64 * dl_over_l;
        let f = r.floor();
        (if f == r { f - 1.0 } else { f }).max(0.0) as usize
    };
    let series = (0..=extra)
        .map(|m| {
            let s_squared = x * x - (m as f64 * PI).powi(2);
            let s = s_squared.sqrt();
            let exponent = (s_squared > 0.0 && s < 1.0).then(|| s.ln_1p() - (-s).ln_1p());
            PeakSeries {
                m,
                s_squared,
                exponent,
            }
        })
        .collect();
    PeakCensus {
        n,
        dl_over_l,
        num_series: extra + 1,
        series,
        subluminal: x < 1.0,
    }
}

/// One row of a detuning scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub ratio: f64,
    pub unstable: bool,
    pub return_points: usize,
    pub max_exponent: f64,
    pub predicted_exponent: Option<f64>,
    pub window_bound: f64,
}

/// Scans detunings `Δω/ω` of a sinusoidal wall around `ω_N`.
///
/// A detuning is unstable when some periodic orbit classifies positive.
pub fn scan_detuning(
    length: f64,
    amplitude: f64,
    n: usize,
    ratios: &[f64],
    n_probe: usize,
) -> Result<Vec<ScanRow>> {
    let window = resonance_window(&WindowParams::OneWall { length, amplitude });
    ratios
        .par_iter()
        .map(|&ratio| {
            let omega = detuned_frequency(n, length, ratio);
            let period = detuned_period(n, omega);
            let traj = WallTrajectory::sinusoidal(length, amplitude, omega, 0.0, 0.0)?;
            let found =
                find_return_points(&traj, period, (0.0, period), &ReturnPointOptions::default())?;
            let map = BilliardMap::new(traj);
            let mut max_exponent = f64::NEG_INFINITY;
            for &t in &found.points {
                let orbit = classify(&map, t - 0.5 * period, period, n_probe)?;
                max_exponent = max_exponent.max(orbit.exponent);
            }
            let unstable = max_exponent > NEUTRAL_THRESHOLD;
            Ok(ScanRow {
                ratio,
                unstable,
                return_points: found.points.len(),
                max_exponent: if found.points.is_empty() {
                    0.0
                } else {
                    max_exponent
                },
                predicted_exponent: detuned_exponent(n, length, amplitude, ratio),
                window_bound: window.bound,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(amplitude: f64, omega: f64) -> WallTrajectory {
        WallTrajectory::sinusoidal(1.0, amplitude, omega, 0.0, 0.0).unwrap()
    }

    #[test]
    fn return_points_at_exact_resonance() {
        let traj = sine(0.1, PI);
        let r = find_return_points(&traj, 2.0, (0.0, 2.0), &ReturnPointOptions::default()).unwrap();
        assert_eq!(r.points.len(), 2);
        assert!(r.points[0].abs() < 1e-12 && (r.points[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn static_cavity_is_degenerate() {
        let traj = WallTrajectory::static_wall(1.0).unwrap();
        let r = find_return_points(&traj, 2.0, (0.0, 2.0), &ReturnPointOptions::default()).unwrap();
        assert!(r.degenerate && r.points.is_empty());
        let r = find_return_points(&traj, 2.5, (0.0, 2.0), &ReturnPointOptions::default()).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn detuned_return_points_follow_the_window() {
        let omega = 1.05 * PI;
        let period = detuned_period(1, omega);
        let r = find_return_points(
            &sine(0.1, omega),
            period,
            (0.0, period),
            &ReturnPointOptions::default(),
        )
        .unwrap();
        assert_eq!(r.points.len(), 2);
        // A period that is not a multiple of the drive period repeats nowhere.
        let r = find_return_points(
            &sine(0.1, omega),
            2.0,
            (0.0, 2.0),
            &ReturnPointOptions::default(),
        )
        .unwrap();
        assert!(r.points.is_empty());
    }

    #[test]
    fn principal_points() {
        assert_eq!(
            principal_starting_points(1, 1.0).unwrap(),
            (vec![0.0], vec![-1.0])
        );
        assert_eq!(
            principal_starting_points(2, 1.0).unwrap(),
            (vec![-0.5, 0.5], vec![-1.0, 0.0])
        );
        assert!(principal_starting_points(0, 1.0).is_err());
    }

    #[test]
    fn classify_principal_orbits() {
        let map = BilliardMap::new(sine(0.01, PI));
        let x = 0.01 * PI;
        let expected = ((1.0 + x) / (1.0 - x)).ln();
        let plus = classify(&map, 0.0, 2.0, 50).unwrap();
        assert_eq!(plus.sign, TrajectorySign::Positive);
        assert!((plus.exponent - expected).abs() < 1e-12);
        assert!((plus.return_point - 1.0).abs() < 1e-12);
        let minus = classify(&map, -1.0, 2.0, 50).unwrap();
        assert_eq!(minus.sign, TrajectorySign::Negative);
        assert!((minus.exponent + expected).abs() < 1e-12);
        assert!(matches!(
            classify(&map, 0.3, 2.0, 5),
            Err(Error::NotPeriodic { .. })
        ));
        let still = BilliardMap::new(WallTrajectory::static_wall(1.0).unwrap());
        let c = classify(&still, 0.7, 2.0, 10).unwrap();
        assert_eq!((c.sign, c.exponent), (TrajectorySign::Neutral, 0.0));
    }

    #[test]
    fn windows() {
        let w = resonance_window(&WindowParams::OneWall {
            length: 1.0,
            amplitude: 0.05,
        });
        assert_eq!((w.bound, w.lower, w.upper), (0.05, -0.05, 0.05));
        let two = |n, delta| WindowParams::TwoWall {
            length: 1.0,
            amplitude_right: 0.01,
            amplitude_left: 0.01,
            dephasing: delta,
            n,
        };
        assert!((resonance_window(&two(2, 0.0)).bound - 0.02).abs() < 1e-15);
        assert_eq!(resonance_window(&two(1, 0.0)).bound, 0.0);
    }

    #[test]
    fn census() {
        let c = peak_census(1, 0.5);
        assert_eq!(c.num_series, 1);
        let c = peak_census(4, 0.3);
        assert_eq!(c.num_series, 2);
        assert!((c.series[1].s_squared - PI * PI * 0.44).abs() < 1e-12);
        assert!(!c.subluminal);
        let c = peak_census(2, 0.01);
        let x = 0.02 * PI;
        assert!((c.series[0].exponent.unwrap() - ((1.0 + x) / (1.0 - x)).ln()).abs() < 1e-14);
    }

    #[test]
    fn scan_edges() {
        let rows = scan_detuning(1.0, 0.05, 1, &[-0.06, -0.04, 0.0, 0.04, 0.06], 16).unwrap();
        let flags: Vec<bool> = rows.iter().map(|r| r.unstable).collect();
        assert_eq!(flags, vec![false, true, true, true, false]);
        let r = &rows[1];
        assert!((r.max_exponent - r.predicted_exponent.unwrap()).abs() < 1e-9);
    }
}
