//! Cavities bounded by two moving walls.
//!
//! The right wall follows `x = L₁(t)` and the left wall `x = −L₂(t)`. Each has
//! its own billiard function `f_i(t + L_i) = t − L_i`, and a double reflection
//! composes them: `f_L = f₂∘f₁`, `f_R = f₁∘f₂`. Forward in time the left
//! family `T_{L,n} = (f_L⁻¹)ⁿ` reflects off the left wall first, then the
//! right wall; the right family does the opposite.
//!
//! ```text
//!   x = −L₂(t)                     x = L₁(t)
//!       |  <--- left mover (u = t + x)  |
//!       |  right mover (v = t − x) ---> |
//! ```

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::billiard::{log_doppler_factor, BilliardMap, BounceMap, Step};
use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::profile::ProfileFunction;
use crate::quad::Quadrature;
use crate::resonance::{
    classify, resonant_frequency, ReturnPointOptions, ReturnPoints, TrajectorySign,
};
use crate::roots::{bisect, MonotoneSolver};
use crate::spline::{CubicSpline, PiecewiseSpline};
use crate::trajectory::WallTrajectory;

/// Effective trajectories are sampled this densely per drive period.
pub const EFFECTIVE_SAMPLES_PER_PERIOD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// First reflection off the left wall.
    Left,
    /// First reflection off the right wall.
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "L",
            Side::Right => "R",
        })
    }
}

/// Which wall a per-wall billiard function belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Wall {
    /// `x = L₁(t)`.
    Right,
    /// `x = −L₂(t)`.
    Left,
}

/// Standard oscillation patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoWallMode {
    Breathing,
    Translational,
    Harmonic,
    Custom,
}

/// Parameters of the dephased harmonic pair
/// `L₁ = L/2 + ΔL₁ sin ω_R t`, `L₂ = L/2 + ΔL₂[sin(ω_L t − δ) + sin δ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicPair {
    pub length: f64,
    pub amplitude_right: f64,
    pub amplitude_left: f64,
    pub omega_right: f64,
    pub omega_left: f64,
    pub dephasing: f64,
}

/// `f = outer ∘ inner`, with both factors single-wall billiard functions.
#[derive(Debug, Clone)]
pub struct ComposedMap {
    outer: BilliardMap,
    inner: BilliardMap,
}

impl ComposedMap {
    pub fn new(outer: BilliardMap, inner: BilliardMap) -> Self {
        ComposedMap { outer, inner }
    }
}

impl BounceMap for ComposedMap {
    fn rest_round_trip(&self) -> f64 {
        self.outer.rest_round_trip() + self.inner.rest_round_trip()
    }

    fn static_until(&self) -> f64 {
        self.inner
            .static_until()
            .min(self.outer.static_until() + self.inner.rest_round_trip())
    }

    fn forward(&self, tau: f64) -> Result<Step> {
        let a = self.outer.forward(tau)?;
        let b = self.inner.forward(a.to)?;
        Ok(Step {
            to: b.to,
            log_doppler: a.log_doppler + b.log_doppler,
        })
    }

    fn backward(&self, tau: f64) -> Result<Step> {
        let a = self.inner.backward(tau)?;
        let b = self.outer.backward(a.to)?;
        Ok(Step {
            to: b.to,
            log_doppler: a.log_doppler + b.log_doppler,
        })
    }

    fn jet(&self, tau: f64) -> Result<Jet3> {
        let i = self.inner.jet(tau)?;
        let o = self.outer.jet(i.value)?;
        Ok(Jet3::compose(&o, &i))
    }

    fn inverse_jet(&self, tau: f64) -> Result<Jet3> {
        let o = self.outer.inverse_jet(tau)?;
        let i = self.inner.inverse_jet(o.value)?;
        Ok(Jet3::compose(&i, &o))
    }
}

/// A ray path through a two-wall cavity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoWallPath {
    pub start: f64,
    pub side: Side,
    /// `T_k` after each double reflection.
    pub labels: Vec<f64>,
    /// Right-wall collision times, `T* + L₁(T*)` a left-mover label.
    pub right_hits: Vec<f64>,
    /// Left-wall collision times, `T** + L₂(T**)` a right-mover label.
    pub left_hits: Vec<f64>,
    /// Cumulative `ln D_k`, both walls' factors included.
    pub log_doppler: Vec<f64>,
}

/// Exponent of one two-wall periodic orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoWallExponent {
    pub side: Side,
    /// Right-wall collision time solving the return condition.
    pub t1: f64,
    pub start: f64,
    pub sign: TrajectorySign,
    /// `ln D_n/n` from ray tracing.
    pub exact: f64,
    /// Product of the two wall factors at the return point.
    pub product: f64,
}

/// Two moving walls with a common static past.
#[derive(Debug, Clone)]
pub struct TwoWallCavity {
    right: BilliardMap,
    left: BilliardMap,
    mode: TwoWallMode,
    harmonic: Option<HarmonicPair>,
}

impl TwoWallCavity {
    /// Any pair of walls; `right` is `L₁`, `left` is `L₂`.
    pub fn custom(right: WallTrajectory, left: WallTrajectory) -> Result<Self> {
        Ok(TwoWallCavity {
            right: BilliardMap::new(right),
            left: BilliardMap::new(left),
            mode: TwoWallMode::Custom,
            harmonic: None,
        })
    }

    /// The dephased harmonic pair.
    pub fn harmonic(p: HarmonicPair) -> Result<Self> {
        let half = 0.5 * p.length;
        let right =
            WallTrajectory::two_wall_component(half, p.amplitude_right, p.omega_right, 0.0)?;
        let left =
            WallTrajectory::two_wall_component(half, p.amplitude_left, p.omega_left, p.dephasing)?;
        let mut c = Self::custom(right, left)?;
        c.mode = TwoWallMode::Harmonic;
        c.harmonic = Some(p);
        Ok(c)
    }

    /// Symmetric oscillation `L₁ = L₂` at `ω_N`.
    pub fn breathing(length: f64, amplitude: f64, n: usize) -> Result<Self> {
        let omega = resonant_frequency(n, length);
        let mut c = Self::harmonic(HarmonicPair {
            length,
            amplitude_right: amplitude,
            amplitude_left: amplitude,
            omega_right: omega,
            omega_left: omega,
            dephasing: 0.0,
        })?;
        c.mode = TwoWallMode::Breathing;
        Ok(c)
    }

    /// Rigid oscillation `L₁ + L₂ = L` with period `L`.
    pub fn translational(length: f64, amplitude: f64) -> Result<Self> {
        let omega = 2.0 * PI / length;
        let mut c = Self::harmonic(HarmonicPair {
            length,
            amplitude_right: amplitude,
            amplitude_left: amplitude,
            omega_right: omega,
            omega_left: omega,
            dephasing: PI,
        })?;
        c.mode = TwoWallMode::Translational;
        Ok(c)
    }

    pub fn mode(&self) -> TwoWallMode {
        self.mode
    }

    pub fn harmonic_params(&self) -> Option<HarmonicPair> {
        self.harmonic
    }

    /// Total rest length `L = L₁(0) + L₂(0)`.
    pub fn rest_length(&self) -> f64 {
        self.right.trajectory().rest_length() + self.left.trajectory().rest_length()
    }

    pub fn wall(&self, wall: Wall) -> &BilliardMap {
        match wall {
            Wall::Right => &self.right,
            Wall::Left => &self.left,
        }
    }

    /// `f_i(τ)`.
    pub fn eval_f_i(&self, wall: Wall, tau: f64) -> Result<f64> {
        self.wall(wall).eval_f(tau)
    }

    /// The composed double-reflection map of one family.
    pub fn map(&self, side: Side) -> ComposedMap {
        match side {
            Side::Left => ComposedMap::new(self.left.clone(), self.right.clone()),
            Side::Right => ComposedMap::new(self.right.clone(), self.left.clone()),
        }
    }

    /// `f_L(τ) = f₂(f₁(τ))` or `f_R(τ) = f₁(f₂(τ))`.
    pub fn eval_f_side(&self, side: Side, tau: f64) -> Result<f64> {
        Ok(self.map(side).backward(tau)?.to)
    }

    /// Forward trace recording both collision times of every double reflection.
    pub fn trace_two_wall(&self, side: Side, tau: f64, n: usize) -> Result<TwoWallPath> {
        if n == 0 {
            return Err(Error::contract("two-wall trace needs n ≥ 1"));
        }
        let mut path = TwoWallPath {
            start: tau,
            side,
            labels: Vec::with_capacity(n),
            right_hits: Vec::with_capacity(n),
            left_hits: Vec::with_capacity(n),
            log_doppler: Vec::with_capacity(n),
        };
        let (first, second) = match side {
            Side::Left => (&self.left, &self.right),
            Side::Right => (&self.right, &self.left),
        };
        let mut t = tau;
        let mut log_d = 0.0;
        for _ in 0..n {
            let h1 = first.advanced_time(t)?;
            let [l1, v1, ..] = first.trajectory().jet(h1);
            let mid = h1 + l1;
            let h2 = second.advanced_time(mid)?;
            let [l2, v2, ..] = second.trajectory().jet(h2);
            t = h2 + l2;
            log_d += log_doppler_factor(v1) + log_doppler_factor(v2);
            let (right_hit, left_hit) = match side {
                Side::Left => (h2, h1),
                Side::Right => (h1, h2),
            };
            path.labels.push(t);
            path.right_hits.push(right_hit);
            path.left_hits.push(left_hit);
            path.log_doppler.push(log_d);
        }
        Ok(path)
    }

    /// Shift of the left-wall collision relative to the right-wall one on a
    /// periodic orbit: `+T/2` for the left family, `−T/2` for the right.
    fn half_shift(side: Side, period: f64) -> f64 {
        match side {
            Side::Left => 0.5 * period,
            Side::Right => -0.5 * period,
        }
    }

    /// Label of the periodic orbit through a right-wall return point `t₁`.
    pub fn starting_point(&self, side: Side, t1: f64) -> f64 {
        let l1 = self.right.trajectory().position(t1);
        match side {
            Side::Left => t1 + l1,
            Side::Right => t1 - l1,
        }
    }

    /// Solutions `t₁ ≥ 0` of `L₁(t₁) + L₂(t₁ ± T/2) = T/2` in `[lo, hi)`
    /// that repeat for `k_check` periods.
    pub fn two_wall_return_points(
        &self,
        side: Side,
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
        let shift = Self::half_shift(side, period);
        let (w1, w2) = (self.right.trajectory(), self.left.trajectory());
        let g = |t: f64| w1.position(t) + w2.position(t + shift) - half;
        let tol = opts.tolerance * self.rest_length();
        // Both collisions of the orbit must lie in the moving era.
        let lo = interval.0.max(0.0).max(-shift);
        let hi = interval.1;
        if !(hi > lo) {
            return Ok(ReturnPoints {
                points: Vec::new(),
                degenerate: false,
            });
        }
        let drive = [w1.period(), w2.period()]
            .into_iter()
            .flatten()
            .fold(period, f64::min);
        let samples =
            ((opts.samples_per_period as f64 * (hi - lo) / drive).ceil() as usize).max(16);
        let h = (hi - lo) / samples as f64;
        let mut candidates = Vec::new();
        let mut zero_run = 0usize;
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
                    return Ok(ReturnPoints {
                        points: Vec::new(),
                        degenerate: true,
                    });
                }
                if zero_run == 1 && t < hi {
                    candidates.push(t);
                }
            } else {
                if zero_run == 0 && prev.1 * v < 0.0 {
                    let root = bisect(&g, prev.0, t, 1e-15 * self.rest_length().max(t.abs()));
                    if root < hi {
                        candidates.push(root);
                    }
                }
                zero_run = 0;
            }
            prev = (t, v);
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

    /// Exponents of every periodic orbit of one family with period `T`.
    pub fn two_wall_exponents(
        &self,
        side: Side,
        period: f64,
        interval: (f64, f64),
        n_probe: usize,
    ) -> Result<Vec<TwoWallExponent>> {
        let found =
            self.two_wall_return_points(side, period, interval, &ReturnPointOptions::default())?;
        let map = self.map(side);
        let shift = Self::half_shift(side, period);
        found
            .points
            .iter()
            .map(|&t1| {
                let start = self.starting_point(side, t1);
                let orbit = classify(&map, start, period, n_probe)?;
                let v1 = self.right.trajectory().velocity(t1);
                let v2 = self.left.trajectory().velocity(t1 + shift);
                Ok(TwoWallExponent {
                    side,
                    t1,
                    start,
                    sign: orbit.sign,
                    exact: orbit.exponent,
                    product: log_doppler_factor(v1) + log_doppler_factor(v2),
                })
            })
            .collect()
    }

    /// Effective single-wall trajectory whose billiard function is `f_side`,
    /// tabulated up to `horizon`. Its static past ends at `−L/2`.
    pub fn effective_trajectory(&self, side: Side, horizon: f64) -> Result<WallTrajectory> {
        let (inner, outer) = match side {
            Side::Left => (&self.right, &self.left),
            Side::Right => (&self.left, &self.right),
        };
        let effective = EffectiveMatch::new(inner, outer);
        let rest = self.rest_length();
        let s_start = inner.trajectory().motion_start();
        let t_start = effective.time(s_start)?;
        if !(horizon > t_start) {
            return Err(Error::contract(format!(
                "effective trajectory horizon {horizon} precedes its start {t_start}"
            )));
        }
        let drive = [inner.trajectory().period(), outer.trajectory().period()]
            .into_iter()
            .flatten()
            .fold(2.0 * rest, f64::min);
        // Second kink: the outer wall's collision time reaches its motion start.
        let kink = MonotoneSolver::default().solve(
            |s| {
                let [l, v, ..] = inner.trajectory().jet(s);
                (s - l, 1.0 - v)
            },
            outer.trajectory().motion_start() + outer.trajectory().rest_length(),
            s_start + rest,
            0.5 * rest,
        )?;
        let s_end = effective.inner_time_for(horizon)?;
        let mut segments = Vec::new();
        for (a, b, kinked_end) in [
            (s_start, kink.min(s_end), kink < s_end),
            (kink, s_end, false),
        ] {
            if !(b > a) {
                continue;
            }
            let span_t = effective.time(b)? - effective.time(a)?;
            let n = ((EFFECTIVE_SAMPLES_PER_PERIOD as f64 * span_t / drive).ceil() as usize).max(8);
            let mut ts = Vec::with_capacity(n + 1);
            let mut ls = Vec::with_capacity(n + 1);
            for i in 0..=n {
                let s = a + (b - a) * i as f64 / n as f64;
                let p = effective.point(s, false)?;
                ts.push(p.t);
                ls.push(p.length);
            }
            let v0 = effective.point(a, false)?.velocity;
            let v1 = effective.point(b, kinked_end)?.velocity;
            segments.push(CubicSpline::new(ts, ls, Some((v0, v1)))?);
        }
        WallTrajectory::from_spline(PiecewiseSpline::new(segments)?)
    }
}

/// One matched point of an effective trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectivePoint {
    /// Inner-wall collision time.
    pub inner_time: f64,
    /// Outer-wall collision time.
    pub outer_time: f64,
    pub t: f64,
    pub length: f64,
    pub velocity: f64,
    /// Product of the two wall Doppler factors.
    pub doppler_product: f64,
}

/// Matching relations between a double reflection and one effective wall.
///
/// With the inner wall hit at `s` and the outer one at `s'` solving
/// `s' + L_out(s') = s − L_in(s)`, the effective wall sits at
/// `t = (s + L_in + s' − L_out)/2` with `L(t) = L_in(s) + L_out(s')`.
pub struct EffectiveMatch<'a> {
    inner: &'a BilliardMap,
    outer: &'a BilliardMap,
}

impl<'a> EffectiveMatch<'a> {
    pub fn new(inner: &'a BilliardMap, outer: &'a BilliardMap) -> Self {
        EffectiveMatch { inner, outer }
    }

    /// Matched point at inner collision time `s`; `left_limit` takes the outer
    /// wall's velocity from the left, which matters only at its motion start.
    pub fn point(&self, s: f64, left_limit: bool) -> Result<EffectivePoint> {
        let [li, vi, ..] = self.inner.trajectory().jet(s);
        let s2 = self.outer.retarded_time(s - li)?;
        let [lo, vo_right, ..] = self.outer.trajectory().jet(s2);
        let vo = if left_limit {
            self.outer.trajectory().jet_left(s2)[1]
        } else {
            vo_right
        };
        let p = ((1.0 - vi) / (1.0 + vi)) * ((1.0 - vo) / (1.0 + vo));
        Ok(EffectivePoint {
            inner_time: s,
            outer_time: s2,
            t: 0.5 * (s + li + s2 - lo),
            length: li + lo,
            velocity: (1.0 - p) / (1.0 + p),
            doppler_product: p,
        })
    }

    pub fn time(&self, s: f64) -> Result<f64> {
        Ok(self.point(s, false)?.t)
    }

    /// Inner collision time matched to effective time `t` (increasing in `s`).
    pub fn inner_time_for(&self, t: f64) -> Result<f64> {
        let g = |s: f64| self.time(s).unwrap_or(f64::NAN) - t;
        let rest = self.inner.trajectory().rest_length() + self.outer.trajectory().rest_length();
        let mut lo = t - 2.0 * rest;
        let mut hi = t + 2.0 * rest;
        let mut expansions = 0;
        while !(g(lo) <= 0.0) || !(g(hi) >= 0.0) {
            lo -= rest;
            hi += rest;
            expansions += 1;
            if expansions > 64 {
                return Err(Error::RootNotBracketed {
                    target: t,
                    expansions,
                    lo,
                    hi,
                });
            }
        }
        Ok(bisect(g, lo, hi, 1e-14 * rest.max(t.abs())))
    }
}

/// Small-amplitude exponent magnitude `2ω_N|ΔL₁ + (−1)^N ΔL₂ cos δ|`.
pub fn small_amplitude_exponent(
    n: usize,
    length: f64,
    dl_right: f64,
    dl_left: f64,
    dephasing: f64,
) -> f64 {
    let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
    2.0 * resonant_frequency(n, length) * (dl_right + parity * dl_left * dephasing.cos()).abs()
}

/// Closed-form return points of the left family at exact resonance `ω = ω_N`
/// with equal amplitudes, for `k = 0..count`: `ωt₁ = 2kπ` and `π + δ + 2kπ`
/// for even `N`, `ωt₁ = (2k+1)π` and `π + δ + 2kπ` for odd `N`.
pub fn closed_form_return_points(n: usize, length: f64, dephasing: f64, count: usize) -> Vec<f64> {
    let omega = resonant_frequency(n, length);
    let mut out = Vec::with_capacity(2 * count);
    for k in 0..count {
        let base = 2.0 * PI * k as f64;
        let first = if n % 2 == 0 { base } else { base + PI };
        out.push(first / omega);
        out.push((base + PI + dephasing.rem_euclid(2.0 * PI)) / omega);
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Whether the harmonic pair detuned to `Δω/ω = ratio` around `ω_N` keeps a
/// periodic orbit of the left family.
pub fn detuned_orbit_exists(p: &HarmonicPair, n: usize, ratio: f64) -> Result<bool> {
    let omega = resonant_frequency(n, p.length) / (1.0 - ratio);
    let pair = HarmonicPair {
        omega_right: omega,
        omega_left: omega,
        ..*p
    };
    let cavity = TwoWallCavity::harmonic(pair)?;
    let period = 2.0 * PI * n as f64 / omega;
    let found = cavity.two_wall_return_points(
        Side::Left,
        period,
        (0.0, period),
        &ReturnPointOptions::default(),
    )?;
    Ok(!found.points.is_empty() || found.degenerate)
}

/// Left- and right-mover densities of a two-wall cavity, seeded on the
/// static window `[−L/2, L/2]` of light-cone labels.
pub struct TwoWallField<'a> {
    cavity: &'a TwoWallCavity,
    /// Density of right movers, labelled by `v = t − x`.
    seed_right_movers: ProfileFunction,
    /// Density of left movers, labelled by `u = t + x`.
    seed_left_movers: ProfileFunction,
    pub quadrature: Quadrature,
}

impl<'a> TwoWallField<'a> {
    pub fn new(
        cavity: &'a TwoWallCavity,
        right_movers: ProfileFunction,
        left_movers: ProfileFunction,
    ) -> Result<Self> {
        let (a, b) = Self::seed_window(cavity);
        for p in [&right_movers, &left_movers] {
            let (pa, pb) = p.interval();
            if (pa - a).abs() > 1e-12 * cavity.rest_length()
                || (pb - b).abs() > 1e-12 * cavity.rest_length()
            {
                return Err(Error::contract(format!(
                    "two-wall seeds must cover [{a}, {b}], got [{pa}, {pb}]"
                )));
            }
        }
        Ok(TwoWallField {
            cavity,
            seed_right_movers: right_movers,
            seed_left_movers: left_movers,
            quadrature: Quadrature::default(),
        })
    }

    /// Labels `[−L₂(0), L₁(0)]`, one crossing of the static cavity at `t = 0`.
    pub fn seed_window(cavity: &TwoWallCavity) -> (f64, f64) {
        (
            -cavity.left.trajectory().rest_length(),
            cavity.right.trajectory().rest_length(),
        )
    }

    fn pull_back(&self, mut label: f64, mut right_mover: bool) -> Result<f64> {
        let (a, b) = Self::seed_window(self.cavity);
        let mut log_scale = 0.0;
        let mut steps = 0;
        while label > b {
            // A right mover last reflected off the left wall, a left mover off the right wall.
            let wall = if right_mover {
                &self.cavity.left
            } else {
                &self.cavity.right
            };
            let s = wall.backward(label)?;
            log_scale += 2.0 * s.log_doppler;
            label = s.to;
            right_mover = !right_mover;
            steps += 1;
            if steps > crate::classical::MAX_PULLBACK_STEPS {
                return Err(Error::Domain(format!(
                    "pull-back of label {label} did not reach the seed window"
                )));
            }
        }
        if label < a - 1e-12 * self.cavity.rest_length() {
            return Err(Error::Domain(format!(
                "label {label} lies before the seed window [{a}, {b}]"
            )));
        }
        let seed = if right_mover {
            &self.seed_right_movers
        } else {
            &self.seed_left_movers
        };
        let rho = seed.eval(label);
        Ok(if rho == 0.0 {
            0.0
        } else {
            rho * log_scale.exp()
        })
    }

    /// Right-mover density at label `v = t − x`.
    pub fn right_mover_density(&self, v: f64) -> Result<f64> {
        self.pull_back(v, true)
    }

    /// Left-mover density at label `u = t + x`.
    pub fn left_mover_density(&self, u: f64) -> Result<f64> {
        self.pull_back(u, false)
    }

    /// `T₀₀(t, x)` for `−L₂(t) ≤ x ≤ L₁(t)`.
    pub fn density(&self, t: f64, x: f64) -> Result<f64> {
        let l1 = self.cavity.right.trajectory().position(t);
        let l2 = self.cavity.left.trajectory().position(t);
        let tol = 1e-12 * self.cavity.rest_length();
        if x < -l2 - tol || x > l1 + tol {
            return Err(Error::Domain(format!(
                "x = {x} lies outside the cavity [{}, {l1}] at t = {t}",
                -l2
            )));
        }
        Ok(self.right_mover_density(t - x)? + self.left_mover_density(t + x)?)
    }

    /// Field energy `∫ T₀₀ dx` across the cavity at time `t ≥ 0`.
    pub fn energy(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::contract(format!(
                "two-wall energy needs t ≥ 0, got {t}"
            )));
        }
        let l1 = self.cavity.right.trajectory().position(t);
        let l2 = self.cavity.left.trajectory().position(t);
        let (a, b) = Self::seed_window(self.cavity);
        let width = b - a;
        let breaks = |lo: f64, hi: f64| -> Vec<f64> {
            let k0 = ((lo - a) / width).floor() as i64;
            let k1 = ((hi - a) / width).ceil() as i64;
            (k0..=k1).map(|k| a + k as f64 * width).collect()
        };
        let (right, _) = self.quadrature.integrate(
            |v| self.right_mover_density(v),
            t - l1,
            t + l2,
            &breaks(t - l1, t + l2),
        )?;
        let (left, _) = self.quadrature.integrate(
            |u| self.left_mover_density(u),
            t - l2,
            t + l1,
            &breaks(t - l2, t + l1),
        )?;
        Ok(right + left)
    }
}
