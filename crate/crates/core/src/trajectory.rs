//! Wall-motion models.
//!
//! Every model is static before its motion start `t₀` and supplies analytic
//! derivatives through third order afterwards. Units have `c = 1`, so time
//! and length share the scale of the rest length.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spline::{CubicSpline, PiecewiseSpline};

/// Number of samples used by the constructor-time constraint scan.
pub const VALIDATION_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryKind {
    Static,
    Sinusoidal,
    TwoWallComponent,
    Tabulated,
}

impl fmt::Display for TrajectoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TrajectoryKind::Static => "static",
            TrajectoryKind::Sinusoidal => "sinusoidal",
            TrajectoryKind::TwoWallComponent => "two-wall-component",
            TrajectoryKind::Tabulated => "tabulated",
        };
        f.write_str(s)
    }
}

/// A wall law of motion for times at or after its motion start.
///
/// Implementors only describe the moving regime; [`WallTrajectory`] adds the
/// static past and the constraint checks.
pub trait WallMotion: Send + Sync + fmt::Debug {
    fn kind(&self) -> TrajectoryKind;
    fn rest_length(&self) -> f64;
    fn motion_start(&self) -> f64;
    /// `[L, L̇, L̈, L⃛]` at `t ≥ motion_start`.
    fn jet(&self, t: f64) -> [f64; 4];
    /// Time window scanned for constraint violations.
    fn validation_window(&self) -> (f64, f64);
    /// Drive period, when the motion is periodic.
    fn period(&self) -> Option<f64> {
        None
    }
    /// Harmonic parameters, when the motion is a sinusoid.
    fn harmonic(&self) -> Option<HarmonicParams> {
        None
    }
}

/// `L(t) = base + amplitude·sin(ω t + phase) + offset` for `t ≥ t₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicParams {
    pub base: f64,
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
    pub offset: f64,
    pub motion_start: f64,
}

#[derive(Debug, Clone, Copy)]
struct StaticWall {
    length: f64,
}

impl WallMotion for StaticWall {
    fn kind(&self) -> TrajectoryKind {
        TrajectoryKind::Static
    }
    fn rest_length(&self) -> f64 {
        self.length
    }
    fn motion_start(&self) -> f64 {
        0.0
    }
    fn jet(&self, _t: f64) -> [f64; 4] {
        [self.length, 0.0, 0.0, 0.0]
    }
    fn validation_window(&self) -> (f64, f64) {
        (0.0, 2.0 * self.length)
    }
}

#[derive(Debug, Clone, Copy)]
struct HarmonicWall {
    kind: TrajectoryKind,
    params: HarmonicParams,
}

impl WallMotion for HarmonicWall {
    fn kind(&self) -> TrajectoryKind {
        self.kind
    }
    fn rest_length(&self) -> f64 {
        self.params.base
    }
    fn motion_start(&self) -> f64 {
        self.params.motion_start
    }
    fn jet(&self, t: f64) -> [f64; 4] {
        let p = &self.params;
        let arg = p.omega * t + p.phase;
        let (s, c) = arg.sin_cos();
        let a = p.amplitude;
        let w = p.omega;
        [
            p.base + a * s + p.offset,
            a * w * c,
            -a * w * w * s,
            -a * w * w * w * c,
        ]
    }
    fn validation_window(&self) -> (f64, f64) {
        let t0 = self.params.motion_start;
        (t0, t0 + self.period().unwrap_or(2.0 * self.params.base))
    }
    fn period(&self) -> Option<f64> {
        (self.params.omega != 0.0).then(|| 2.0 * std::f64::consts::PI / self.params.omega.abs())
    }
    fn harmonic(&self) -> Option<HarmonicParams> {
        Some(self.params)
    }
}

#[derive(Debug, Clone)]
struct TabulatedWall {
    spline: PiecewiseSpline,
}

impl WallMotion for TabulatedWall {
    fn kind(&self) -> TrajectoryKind {
        TrajectoryKind::Tabulated
    }
    fn rest_length(&self) -> f64 {
        self.spline.segments()[0].values()[0]
    }
    fn motion_start(&self) -> f64 {
        self.spline.start()
    }
    fn jet(&self, t: f64) -> [f64; 4] {
        if t > self.spline.end() {
            // Held at the final sample beyond the table.
            [self.spline.eval(self.spline.end())[0], 0.0, 0.0, 0.0]
        } else {
            self.spline.eval(t)
        }
    }
    fn validation_window(&self) -> (f64, f64) {
        (self.spline.start(), self.spline.end())
    }
}

/// Immutable, shareable wall trajectory `x = L(t)` with a static past.
#[derive(Clone)]
pub struct WallTrajectory {
    motion: Arc<dyn WallMotion>,
}

impl fmt::Debug for WallTrajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("WallTrajectory").field(&self.motion).finish()
    }
}

impl WallTrajectory {
    /// Wraps a custom motion law after checking the wall constraints.
    pub fn from_motion(motion: Arc<dyn WallMotion>) -> Result<Self> {
        let traj = WallTrajectory { motion };
        traj.validate()?;
        Ok(traj)
    }

    pub fn static_wall(length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::trajectory(format!(
                "rest length must be positive, got {length}"
            )));
        }
        Self::from_motion(Arc::new(StaticWall { length }))
    }

    /// `L(t) = L + ΔL·sin(ω t + phase)` for `t ≥ t₀`, `L` before.
    ///
    /// The sinusoid must vanish at `t₀` so the wall position is continuous.
    pub fn sinusoidal(
        length: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
        motion_start: f64,
    ) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::trajectory(format!(
                "rest length must be positive, got {length}"
            )));
        }
        if amplitude.abs() >= length {
            return Err(Error::trajectory(format!(
                "amplitude must satisfy ΔL < L (ΔL = {amplitude}, L = {length})"
            )));
        }
        if (omega * amplitude).abs() >= 1.0 {
            return Err(Error::trajectory(format!(
                "wall must stay subluminal: ωΔL = {} ≥ 1",
                (omega * amplitude).abs()
            )));
        }
        let jump = amplitude * (omega * motion_start + phase).sin();
        if jump.abs() > 1e-12 * length {
            return Err(Error::trajectory(format!(
                "position jumps by {jump:e} at motion start t₀ = {motion_start}; choose phase with sin(ωt₀ + phase) = 0"
            )));
        }
        let params = HarmonicParams {
            base: length,
            amplitude,
            omega,
            phase,
            offset: 0.0,
            motion_start,
        };
        Self::from_motion(Arc::new(HarmonicWall {
            kind: TrajectoryKind::Sinusoidal,
            params,
        }))
    }

    /// Two-wall component `L/2 + ΔL·sin(ω t − δ) + ΔL·sin δ`, moving from `t = 0`.
    pub fn two_wall_component(
        half_length: f64,
        amplitude: f64,
        omega: f64,
        delta: f64,
    ) -> Result<Self> {
        if !(half_length > 0.0) {
            return Err(Error::trajectory(format!(
                "rest half-length must be positive, got {half_length}"
            )));
        }
        if (omega * amplitude).abs() >= 1.0 {
            return Err(Error::trajectory(format!(
                "wall must stay subluminal: ωΔL = {} ≥ 1",
                (omega * amplitude).abs()
            )));
        }
        let params = HarmonicParams {
            base: half_length,
            amplitude,
            omega,
            phase: -delta,
            offset: amplitude * delta.sin(),
            motion_start: 0.0,
        };
        Self::from_motion(Arc::new(HarmonicWall {
            kind: TrajectoryKind::TwoWallComponent,
            params,
        }))
    }

    /// Cubic interpolation of `(t, L)` samples. The first sample fixes the rest
    /// length and the motion start; beyond the last sample the wall is held.
    pub fn tabulated(
        times: Vec<f64>,
        lengths: Vec<f64>,
        end_slopes: Option<(f64, f64)>,
    ) -> Result<Self> {
        let spline = CubicSpline::new(times, lengths, end_slopes)?;
        Self::from_spline(PiecewiseSpline::new(vec![spline])?)
    }

    /// Tabulated trajectory from independently splined segments.
    pub fn from_spline(spline: PiecewiseSpline) -> Result<Self> {
        Self::from_motion(Arc::new(TabulatedWall { spline }))
    }

    fn validate(&self) -> Result<()> {
        let rest = self.rest_length();
        if !(rest > 0.0 && rest.is_finite()) {
            return Err(Error::trajectory(format!(
                "rest length must be positive, got {rest}"
            )));
        }
        let (a, b) = self.motion.validation_window();
        let mut times: Vec<f64> = (0..=VALIDATION_SAMPLES)
            .map(|i| a + (b - a) * i as f64 / VALIDATION_SAMPLES as f64)
            .collect();
        if let Some(tab) = self.knots() {
            times.extend(tab.windows(2).flat_map(|w| [w[0], 0.5 * (w[0] + w[1])]));
        }
        for t in times {
            let [l, v, ..] = self.motion.jet(t);
            if !(l > 0.0) {
                return Err(Error::trajectory(format!(
                    "L(t) > 0 violated: L({t}) = {l}"
                )));
            }
            if !(v.abs() < 1.0) {
                return Err(Error::trajectory(format!(
                    "|L̇(t)| < 1 violated: L̇({t}) = {v}"
                )));
            }
        }
        let start = self.motion.jet(self.motion_start())[0];
        if (start - rest).abs() > 1e-9 * rest {
            return Err(Error::trajectory(format!(
                "trajectory must start from rest length {rest}, starts at {start}"
            )));
        }
        Ok(())
    }

    fn knots(&self) -> Option<Vec<f64>> {
        (self.kind() == TrajectoryKind::Tabulated).then(|| {
            let (a, b) = self.motion.validation_window();
            let n = 8 * VALIDATION_SAMPLES;
            (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
        })
    }

    pub fn kind(&self) -> TrajectoryKind {
        self.motion.kind()
    }

    pub fn rest_length(&self) -> f64 {
        self.motion.rest_length()
    }

    pub fn motion_start(&self) -> f64 {
        self.motion.motion_start()
    }

    pub fn period(&self) -> Option<f64> {
        self.motion.period()
    }

    pub fn harmonic(&self) -> Option<HarmonicParams> {
        self.motion.harmonic()
    }

    pub fn is_static(&self) -> bool {
        self.kind() == TrajectoryKind::Static
            || self
                .harmonic()
                .is_some_and(|h| h.amplitude == 0.0 || h.omega == 0.0)
    }

    /// Wall position `L(t)`.
    pub fn position(&self, t: f64) -> f64 {
        if t < self.motion_start() {
            self.rest_length()
        } else {
            self.motion.jet(t)[0]
        }
    }

    /// `dᵏL/dtᵏ` for `k ∈ {1, 2, 3}`; zero in the static past, right limit at `t₀`.
    pub fn derivative(&self, t: f64, order: u8) -> Result<f64> {
        if !(1..=3).contains(&order) {
            return Err(Error::contract(format!(
                "derivative order must be 1..=3, got {order}"
            )));
        }
        Ok(self.jet(t)[order as usize])
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.jet(t)[1]
    }

    /// `[L, L̇, L̈, L⃛]` with right limits at the motion start.
    pub fn jet(&self, t: f64) -> [f64; 4] {
        if t < self.motion_start() {
            [self.rest_length(), 0.0, 0.0, 0.0]
        } else {
            self.motion.jet(t)
        }
    }

    /// Like [`jet`](Self::jet) but taking left limits at the motion start.
    pub fn jet_left(&self, t: f64) -> [f64; 4] {
        if t <= self.motion_start() {
            [self.rest_length(), 0.0, 0.0, 0.0]
        } else {
            self.motion.jet(t)
        }
    }

    /// Lower and upper bounds of `L(t)` over the validation window, and the
    /// maximum wall speed there.
    pub fn extent(&self) -> (f64, f64, f64) {
        let (a, b) = self.motion.validation_window();
        let rest = self.rest_length();
        let (mut lo, mut hi, mut vmax) = (rest, rest, 0.0f64);
        for i in 0..=VALIDATION_SAMPLES {
            let t = a + (b - a) * i as f64 / VALIDATION_SAMPLES as f64;
            let [l, v, ..] = self.motion.jet(t);
            lo = lo.min(l);
            hi = hi.max(l);
            vmax = vmax.max(v.abs());
        }
        if let Some(h) = self.harmonic() {
            lo = lo.min(h.base + h.offset - h.amplitude.abs());
            hi = hi.max(h.base + h.offset + h.amplitude.abs());
            vmax = vmax.max((h.amplitude * h.omega).abs());
        }
        (lo, hi, vmax)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine() -> WallTrajectory {
        WallTrajectory::sinusoidal(1.0, 0.1, PI, 0.0, 0.0).unwrap()
    }

    #[test]
    fn static_position_and_derivative() {
        let w = WallTrajectory::static_wall(1.0).unwrap();
        assert_eq!(w.position(7.3), 1.0);
        assert_eq!(w.derivative(7.3, 1).unwrap(), 0.0);
    }

    #[test]
    fn sinusoidal_examples() {
        let w = sine();
        assert!((w.position(0.5) - 1.1).abs() < 1e-15);
        assert_eq!(w.position(-2.0), 1.0);
        assert!((w.derivative(0.0, 1).unwrap() - 0.1 * PI).abs() < 1e-15);
        assert!((w.derivative(0.0, 3).unwrap() + 0.1 * PI.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn static_past_has_zero_derivatives() {
        let w = sine();
        for order in 1..=3 {
            assert_eq!(w.derivative(-0.25, order).unwrap(), 0.0);
        }
        assert_eq!(w.jet_left(0.0)[1], 0.0);
    }

    #[test]
    fn order_out_of_range() {
        assert!(matches!(sine().derivative(0.0, 4), Err(Error::Contract(_))));
        assert!(sine().derivative(0.0, 0).is_err());
    }

    #[test]
    fn rejects_superluminal_and_large_amplitude() {
        assert!(WallTrajectory::sinusoidal(1.0, 0.5, 3.0, 0.0, 0.0).is_err());
        assert!(WallTrajectory::sinusoidal(1.0, 1.2, 0.1, 0.0, 0.0).is_err());
        assert!(WallTrajectory::static_wall(-1.0).is_err());
    }

    #[test]
    fn rejects_discontinuous_start() {
        let err = WallTrajectory::sinusoidal(1.0, 0.1, PI, 0.3, 0.0).unwrap_err();
        assert!(err.to_string().contains("jumps"));
    }

    #[test]
    fn two_wall_component_is_continuous() {
        let w = WallTrajectory::two_wall_component(0.5, 0.01, 2.0 * PI, 0.7).unwrap();
        assert!((w.position(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(w.kind(), TrajectoryKind::TwoWallComponent);
    }

    #[test]
    fn tabulated_interpolates() {
        let ts: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
        let ls: Vec<f64> = ts.iter().map(|t| 1.0 + 0.05 * (PI * t).sin()).collect();
        let w = WallTrajectory::tabulated(ts, ls, Some((0.05 * PI, 0.05 * PI * (4.0 * PI).cos())))
            .unwrap();
        let exact = sine();
        let t = 1.2345;
        assert!((w.position(t) - (1.0 + 0.05 * (PI * t).sin())).abs() < 1e-9);
        assert!((w.velocity(t) - 0.5 * exact.velocity(t)).abs() < 1e-7);
        assert_eq!(w.kind(), TrajectoryKind::Tabulated);
        assert_eq!(w.position(-1.0), 1.0);
    }
}
