//! Billiard functions, iterated collision maps and cumulative Doppler factors.
//!
//! For a wall `x = L(t)` facing a static wall at `x = 0`, the billiard
//! function sends the light-cone label `t + L(t)` of a ray arriving at the
//! moving wall to the label `t − L(t)` it leaves with. Its inverse is the
//! forward-time round trip `x = 0 → wall → x = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::roots::MonotoneSolver;
use crate::trajectory::WallTrajectory;

/// `ln((1 − v)/(1 + v))`, the log Doppler factor of a reflection off a wall
/// moving with velocity `v`.
pub fn log_doppler_factor(v: f64) -> f64 {
    (-v).ln_1p() - v.ln_1p()
}

/// One application of a bounce map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    /// Image of the input label.
    pub to: f64,
    /// Log of `ḟ` at the later of the two labels.
    pub log_doppler: f64,
}

/// A strictly increasing map `f` with `f(τ) < τ`, viewed as a bounce law.
///
/// Single walls, compositions of walls and two-wall families all implement
/// this, so resonance and energy analyses run on any of them.
pub trait BounceMap: Send + Sync {
    /// Round-trip time of the static configuration.
    fn rest_round_trip(&self) -> f64;
    /// For `τ` at or below this label the map is the static shift.
    fn static_until(&self) -> f64;
    /// `f⁻¹(τ)` together with `ln ḟ(f⁻¹(τ))`.
    fn forward(&self, tau: f64) -> Result<Step>;
    /// `f(τ)` together with `ln ḟ(τ)`.
    fn backward(&self, tau: f64) -> Result<Step>;
    /// Jet of `f` at `τ`.
    fn jet(&self, tau: f64) -> Result<Jet3>;
    /// Jet of `f⁻¹` at `τ`.
    fn inverse_jet(&self, tau: f64) -> Result<Jet3>;
}

/// `(T_n(τ), ln D_n(τ))` after `n` forward round trips.
pub fn iterate_forward(map: &dyn BounceMap, tau: f64, n: usize) -> Result<(f64, f64)> {
    let mut t = tau;
    let mut log_d = 0.0;
    for _ in 0..n {
        let s = map.forward(t)?;
        t = s.to;
        log_d += s.log_doppler;
    }
    Ok((t, log_d))
}

/// Every `(T_k, ln D_k)` for `k = 1..=n`.
pub fn forward_series(map: &dyn BounceMap, tau: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(n);
    let mut t = tau;
    let mut log_d = 0.0;
    for _ in 0..n {
        let s = map.forward(t)?;
        t = s.to;
        log_d += s.log_doppler;
        out.push((t, log_d));
    }
    Ok(out)
}

/// Direction of a recorded [`RayPath`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// An `n`-bounce optical path.
///
/// Forward paths satisfy `T*_k + L(T*_k) = T_k`; backward paths record the
/// collision that produced `T_k`, so `T*_k − L(T*_k) = T_k` there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayPath {
    pub start: f64,
    pub direction: Direction,
    pub collision_times: Vec<f64>,
    pub retarded_times: Vec<f64>,
    /// Cumulative `ln D_k`. Backward paths hold reciprocals of the forward factors.
    pub log_doppler: Vec<f64>,
}

impl RayPath {
    pub fn len(&self) -> usize {
        self.collision_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.collision_times.is_empty()
    }

    /// `D_k` for `k = 1..=len`.
    pub fn doppler(&self, k: usize) -> f64 {
        self.log_doppler[k - 1].exp()
    }

    /// `T_k` for `k = 1..=len`.
    pub fn time(&self, k: usize) -> f64 {
        self.collision_times[k - 1]
    }

    pub fn last_time(&self) -> Option<f64> {
        self.collision_times.last().copied()
    }

    pub fn last_log_doppler(&self) -> Option<f64> {
        self.log_doppler.last().copied()
    }
}

/// Billiard function of a single moving wall.
#[derive(Debug, Clone)]
pub struct BilliardMap {
    trajectory: WallTrajectory,
    solver: MonotoneSolver,
}

impl BilliardMap {
    /// Map with the default tolerance `1e−12·L`.
    pub fn new(trajectory: WallTrajectory) -> Self {
        let tol = 1e-12 * trajectory.rest_length();
        Self::with_tolerance(trajectory, tol, 64)
    }

    pub fn with_tolerance(
        trajectory: WallTrajectory,
        root_tolerance: f64,
        max_bracket_expansions: u32,
    ) -> Self {
        BilliardMap {
            trajectory,
            solver: MonotoneSolver {
                tolerance: root_tolerance,
                max_expansions: max_bracket_expansions,
                max_iterations: 100,
            },
        }
    }

    pub fn trajectory(&self) -> &WallTrajectory {
        &self.trajectory
    }

    pub fn root_tolerance(&self) -> f64 {
        self.solver.tolerance
    }

    /// Solves `t + sign·L(t) = τ`.
    fn solve(&self, sign: f64, tau: f64) -> Result<f64> {
        if !tau.is_finite() {
            return Err(Error::Domain(format!("non-finite light-cone label {tau}")));
        }
        let traj = &self.trajectory;
        let rest = traj.rest_length();
        let t0 = traj.motion_start();
        let guess = tau - sign * rest;
        if guess < t0 && guess + sign * rest == tau {
            // Static past: closed form, provided it stays left of the motion start.
            return Ok(guess);
        }
        let eval = |t: f64| {
            let [l, v, ..] = traj.jet(t);
            (t + sign * l, 1.0 + sign * v)
        };
        let t = self.solver.solve(eval, tau, guess, 0.5 * rest)?;
        // Roots landing on the velocity kink use the right-hand derivatives.
        if t != t0 && (t - t0).abs() <= 2.0 * self.solver.tolerance {
            let r = t0 + sign * traj.position(t0) - tau;
            if r.abs() <= 2.0 * self.solver.tolerance {
                return Ok(t0);
            }
        }
        Ok(t)
    }

    /// The collision time `t*` with `t* + L(t*) = τ`.
    pub fn retarded_time(&self, tau: f64) -> Result<f64> {
        self.solve(1.0, tau)
    }

    /// The collision time `t*` with `t* − L(t*) = τ`.
    pub fn advanced_time(&self, tau: f64) -> Result<f64> {
        self.solve(-1.0, tau)
    }

    /// `f(τ) = t* − L(t*)`.
    pub fn eval_f(&self, tau: f64) -> Result<f64> {
        let t = self.retarded_time(tau)?;
        Ok(t - self.trajectory.position(t))
    }

    /// `f⁻¹(τ) = t* + L(t*)` with `t* − L(t*) = τ`.
    pub fn eval_f_inv(&self, tau: f64) -> Result<f64> {
        let t = self.advanced_time(tau)?;
        Ok(t + self.trajectory.position(t))
    }

    /// `ḟ(τ) = (1 − L̇(t*))/(1 + L̇(t*))`.
    pub fn doppler(&self, tau: f64) -> Result<f64> {
        let t = self.retarded_time(tau)?;
        let v = self.trajectory.velocity(t);
        Ok((1.0 - v) / (1.0 + v))
    }

    /// Forward ray path `T_k = (f⁻¹)^k(τ)` with cumulative Doppler factors.
    pub fn trace(&self, tau: f64, n: usize) -> Result<RayPath> {
        let mut path = RayPath {
            start: tau,
            direction: Direction::Forward,
            collision_times: Vec::with_capacity(n),
            retarded_times: Vec::with_capacity(n),
            log_doppler: Vec::with_capacity(n),
        };
        let mut t = tau;
        let mut log_d = 0.0;
        for _ in 0..n {
            let hit = self.advanced_time(t)?;
            let [l, v, ..] = self.trajectory.jet(hit);
            t = hit + l;
            log_d += log_doppler_factor(v);
            path.collision_times.push(t);
            path.retarded_times.push(hit);
            path.log_doppler.push(log_d);
        }
        Ok(path)
    }

    /// Backward ray path `T_k = f^k(τ)`; the factors are reciprocals of the
    /// forward ones along the same segments.
    pub fn trace_backward(&self, tau: f64, n: usize) -> Result<RayPath> {
        let mut path = RayPath {
            start: tau,
            direction: Direction::Backward,
            collision_times: Vec::with_capacity(n),
            retarded_times: Vec::with_capacity(n),
            log_doppler: Vec::with_capacity(n),
        };
        let mut t = tau;
        let mut log_d = 0.0;
        for _ in 0..n {
            let hit = self.retarded_time(t)?;
            let [l, v, ..] = self.trajectory.jet(hit);
            t = hit - l;
            log_d -= log_doppler_factor(v);
            path.collision_times.push(t);
            path.retarded_times.push(hit);
            path.log_doppler.push(log_d);
        }
        Ok(path)
    }
}

impl BounceMap for BilliardMap {
    fn rest_round_trip(&self) -> f64 {
        2.0 * self.trajectory.rest_length()
    }

    fn static_until(&self) -> f64 {
        self.trajectory.motion_start() + self.trajectory.rest_length()
    }

    fn forward(&self, tau: f64) -> Result<Step> {
        let hit = self.advanced_time(tau)?;
        let [l, v, ..] = self.trajectory.jet(hit);
        Ok(Step {
            to: hit + l,
            log_doppler: log_doppler_factor(v),
        })
    }

    fn backward(&self, tau: f64) -> Result<Step> {
        let hit = self.retarded_time(tau)?;
        let [l, v, ..] = self.trajectory.jet(hit);
        Ok(Step {
            to: hit - l,
            log_doppler: log_doppler_factor(v),
        })
    }

    fn jet(&self, tau: f64) -> Result<Jet3> {
        let hit = self.retarded_time(tau)?;
        let [l, v, a, j] = self.trajectory.jet(hit);
        let p = 1.0 + v;
        Ok(Jet3 {
            value: hit - l,
            d1: (1.0 - v) / p,
            d2: -2.0 * a / p.powi(3),
            d3: -2.0 * j / p.powi(4) + 6.0 * a * a / p.powi(5),
        })
    }

    fn inverse_jet(&self, tau: f64) -> Result<Jet3> {
        let hit = self.advanced_time(tau)?;
        let [l, v, a, j] = self.trajectory.jet(hit);
        let q = 1.0 - v;
        Ok(Jet3 {
            value: hit + l,
            d1: (1.0 + v) / q,
            d2: 2.0 * a / q.powi(3),
            d3: 2.0 * j / q.powi(4) + 6.0 * a * a / q.powi(5),
        })
    }
}
