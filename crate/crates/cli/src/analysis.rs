//! Analyses selectable by name, one per subcommand.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::{json, Value};

use dce_core::billiard::{forward_series, BilliardMap, BounceMap};
use dce_core::classical::{seed_interval, ClassicalField};
use dce_core::profile::ProfileFunction;
use dce_core::quantum::{quantum_evolution, QuantumField};
use dce_core::resonance::{
    classify, detuned_period, find_return_points, peak_census, principal_starting_points,
    resonance_window, scan_detuning, ReturnPointOptions, WindowParams,
};
use dce_core::twowall::{small_amplitude_exponent, Side, TwoWallCavity, TwoWallField, Wall};
use dce_core::WallTrajectory;

use crate::config::{Cavity, Scenario};
use crate::error::{CliError, Result};
use crate::output::{num, Output};

pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub cavity: &'a Cavity,
}

impl Context<'_> {
    fn single(&self, analysis: &str) -> Result<BilliardMap> {
        match self.cavity {
            Cavity::Single(w) => {
                let tol = self.scenario.numeric.root_tolerance * w.rest_length();
                Ok(BilliardMap::with_tolerance(w.clone(), tol, 64))
            }
            Cavity::Two(_) => Err(CliError::Config(format!(
                "`{analysis}` needs a single-wall [wall] cavity"
            ))),
        }
    }

    fn two(&self, analysis: &str) -> Result<&TwoWallCavity> {
        match self.cavity {
            Cavity::Two(c) => Ok(c),
            Cavity::Single(_) => Err(CliError::Config(format!(
                "`{analysis}` needs a two-wall [cavity2] cavity"
            ))),
        }
    }

    fn grid(&self, lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![lo];
        }
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn seed_profile(&self, a: f64, b: f64) -> Result<ProfileFunction> {
        let seed = &self.scenario.seed;
        let profile = seed.build(self.cavity.rest_length())?;
        Ok(ProfileFunction::sample(
            profile.as_ref(),
            a,
            b,
            seed.samples,
            seed.interpolation()?,
        )?)
    }

    /// Periodic starting points of the principal resonance, used as quadrature edges.
    fn spots(&self) -> Vec<f64> {
        match (self.cavity, self.scenario.resonance_order()) {
            (Cavity::Single(w), Some(n)) => {
                let Ok((plus, minus)) = principal_starting_points(n, w.rest_length()) else {
                    return Vec::new();
                };
                plus.into_iter()
                    .chain(minus)
                    .map(|t| t + w.motion_start())
                    .collect()
            }
            _ => Vec::new(),
        }
    }
}

/// One analysis behind a subcommand.
pub trait Analysis: Send + Sync {
    fn name(&self) -> &'static str;
    fn aliases(&self) -> &'static [&'static str] {
        &[]
    }
    /// Writes tables into `out` and returns a summary for the metadata file.
    fn run(&self, ctx: &Context, out: &mut Output) -> Result<Value>;
}

pub struct AnalysisRegistry {
    entries: Vec<Box<dyn Analysis>>,
}

impl Default for AnalysisRegistry {
    fn default() -> Self {
        let mut r = AnalysisRegistry {
            entries: Vec::new(),
        };
        r.register(Box::new(BilliardTable));
        r.register(Box::new(Trace));
        r.register(Box::new(Resonance));
        r.register(Box::new(ClassicalEnergy));
        r.register(Box::new(QuantumEnergy));
        r.register(Box::new(DensityMap));
        r.register(Box::new(TwoWallModes));
        r
    }
}

impl AnalysisRegistry {
    pub fn register(&mut self, analysis: Box<dyn Analysis>) {
        self.entries.push(analysis);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Analysis> {
        self.entries
            .iter()
            .find(|a| a.name() == name || a.aliases().contains(&name))
            .map(|a| a.as_ref())
            .ok_or_else(|| {
                let known: Vec<_> = self.entries.iter().map(|a| a.name()).collect();
                CliError::Config(format!(
                    "unknown analysis `{name}` (known: {})",
                    known.join(", ")
                ))
            })
    }
}

struct BilliardTable;

impl Analysis for BilliardTable {
    fn name(&self) -> &'static str {
        "billiard-table"
    }

    fn run(&self, ctx: &Context, out: &mut Output) -> Result<Value> {
        let map = ctx.single(self.name())?;
        let nm = &ctx.scenario.numeric;
        let taus = ctx.grid(nm.tau_min, nm.tau_max, nm.samples);
        let rows: Vec<[f64; 5]> = taus
            .par_iter()
            .map(|&tau| {
                let t_star = map.retarded_time(tau)?;
                Ok([
                    tau,
                    map.eval_f(tau)?,
                    map.eval_f_inv(tau)?,
                    map.doppler(tau)?,
                    t_star,
                ])
            })
            .collect::<dce_core::Result<_>>()?;
        let mut table = out.table(
            "billiard_table.csv",
            &["tau", "f", "f_inv", "f_dot", "t_star"],
        )?;
        for r in &rows {
            table.row(&r.map(num))?;
        }
        table.finish()?;
        Ok(json!({ "rows": rows.len() }))
    }
}

struct Trace;

impl Analysis for Trace {
    fn name(&self) -> &'static str {
        "trace"
    }

    fn run(&self, ctx: &Context, out: &mut Output) -> Result<Value> {
        let nm = &ctx.scenario.numeric;
        match ctx.cavity {
            Cavity::Single(_) => {
                let map = ctx.single(self.name())?;
                let path = map.trace(nm.tau, nm.n)?;
                let mut table = out.table("trace.csv", &["k", "T_k", "T_star_k", "log_D_k"])?;
                for k in 0..path.len() {
                    table.row(&[
                        (k + 1).to_string(),
                        num(path.collision_times[k]),
                        num(path.retarded_times[k]),
                        num(path.log_doppler[k]),
                    ])?;
                }
                table.finish()?;
                Ok(json!({ "tau": nm.tau, "n": nm.n, "log_D_n": path.last_log_doppler() }))
            }
            Cavity::Two(c) => {
                let mut summary = serde_json::Map::new();
                for side in [Side::Left, Side::Right] {
                    let path = c.trace_two_wall(side, nm.tau, nm.n.max(1))?;
                    let name = format!("trace_{side}.csv");
                    let mut table =
                        out.table(&name, &["k", "T_k", "T_star_k", "T_star_star_k", "log_D_k"])?;
                    for k in 0..path.labels.len() {
                        table.row(&[
                            (k + 1).to_string(),
                            num(path.labels[k]),
                            num(path.right_hits[k]),
                            num(path.left_hits[k]),
                            num(path.log_doppler[k]),
                        ])?;
                    }
                    table.finish()?;
                    summary.insert(format!("log_D_n_{side}"), json!(path.log_doppler.last()));
                }
                Ok(Value::Object(summary))
            }
        }
    }
}

struct Resonance;

impl Analysis for Resonance {
    fn name(&self) -> &'static str {
        "resonance"
    }

    fn run(&self, ctx: &Context, out: &mut Output) -> Result<Value> {
        let map = ctx.single(self.name())?;
        let wall = map.trajectory().clone();
        let nm = &ctx.scenario.numeric;
        let harmonic = wall
            .harmonic()
            .ok_or_else(|| CliError::Config("`resonance` needs a sinusoidal wall".into()))?;
        let length = wall.rest_length();
        let n = ctx.scenario.resonance_order().ok_or_else(|| {
            CliError::Config("`resonance` needs a drive near some ω_N = Nπ/L".into())
        })?;
        let period = detuned_period(n, harmonic.omega);
        let opts = ReturnPointOptions {
            samples_per_period: nm.samples_per_period,
            k_check: nm.k_check,
            ..Default::default()
        };
        let start = wall.motion_start();
        let found = find_return_points(&wall, period, (start, start + period), &opts)?;
        let mut table = out.table("resonance.csv", &["tau0", "T", "sign", "lambda", "M"])?;
        let mut positive = 0;
        for &t in &found.points {
            let orbit = classify(&map, t - 0.5 * period, period, nm.n_probe)?;
            if orbit.exponent > 0.0 {
                positive += 1;
            }
            table.row(&[
                num(orbit.start),
                num(orbit.period),
                orbit.sign.to_string(),
                num(orbit.exponent),
                orbit.series_index.to_string(),
            ])?;
        }
        table.finish()?;
        let amplitude = harmonic.amplitude.abs();
        let window = resonance_window(&WindowParams::OneWall { length, amplitude });
        let census = peak_census(n, amplitude / length);
        let mut summary = json!({
            "N": n,
            "period": period,
            "return_points": found.points.len(),
            "degenerate": found.degenerate,
            "positive_trajectories": positive,
            "window": window,
            "peak_census": census,
        });
        if ctx.scenario.numeric.scan_domega {
            let steps = ((nm.scan_max - nm.scan_min) / nm.scan_step).round() as usize;
            let ratios: Vec<f64> = (0..=steps)
                .map(|i| nm.scan_min + i as f64 * nm.scan_step)
                .collect();
            let rows = scan_detuning(length, amplitude, n, &ratios, nm.n_probe)?;
            let mut table = out.table(
                "scan.csv",
                &[
                    "domega_over_omega",
                    "unstable",
                    "return_points",
                    "max_lambda",
                    "predicted_lambda",
                    "window_bound",
                ],
            )?;
            for r in &rows {
                table.row(&[
                    num(r.ratio),
                    u8::from(r.unstable).to_string(),
                    r.return_points.to_string(),
                    num(r.max_exponent),
                    r.predicted_exponent.map_or_else(|| "nan".to_string(), num),
                    num(r.window_bound),
                ])?;
            }
            table.finish()?;
            let edge = rows
                .iter()
                .filter(|r| r.unstable)
                .map(|r| r.ratio.abs())
                .fold(0.0, f64::max);
            summary["scan"] = json!({ "points": rows.len(), "largest_unstable_detuning": edge });
        }
        Ok(summary)
    }
}

struct ClassicalEnergy;

impl Analysis for ClassicalEnergy {
    fn name(&self) -> &'static str {
        "classical-energy"
    }
    fn aliases(&self) -> &'static [&'static str] {
        &["energy"]
    }

    fn run(&self, ctx: &Context, out: &mut Output) -> Result<Value> {
        let nm = &ctx.scenario.numeric;
        let length = ctx.cavity.rest_length();
        match ctx.cavity {
            Cavity::Single(_) => {
                let map = ctx.single(self.name())?;
                let (a, b) = seed_interval(&map);
                let mut field = ClassicalField::new(ctx.seed_profile(a, b)?, &map)?;
                field.quadrature.rel_tol = nm.quad_rel_tol;
                let series = field.energy_series(nm.n_max, &ctx.spots())?;
                let mut table =
                    out.table("energy.csv", &["n", "t[L]", "E[1/L]", "error_bound[1/L]"])?;
                for e in &series {
                    let t = map.retarded_time(e.label)?;
                    table.row(&[
                        e.bounce.to_string(),
                        num(t / length),
                        num(e.energy * length),
                        num(e.error_bound * length),
                    ])?;
                }
                table.finish()?;
                let growth = log_slope(&series.iter().map(|e| e.energy).collect::<Vec<_>>());
                Ok(
                    json!({ "n_max": nm.n_max, "E0": series[0].energy, "log_E_slope_per_period": growth }),
                )
            }
            Cavity::Two(c) => {
                let (a, b) = TwoWallField::seed_window(c);
                let profile = ctx.seed_profile(a, b)?;
                let mut field = TwoWallField::new(c, profile.clone(), profile)?;
                field.quadrature.rel_tol = nm.quad_rel_tol;
                let times = ctx.grid(0.0, nm.t_max, nm.nt);
                let energies: Vec<f64> = times
                    .par_iter()
                    .map(|&t| field.energy(t))
                    .collect::<dce_core::Result<_>>()?;
                let mut table = out.table("energy.csv", &["t[L]", "E[1/L]"])?;
                for (t, e) in times.iter().zip(&energies) {
                    table.row(&[num(t / length), num(e * length)])?;
                }
                table.finish()?;
                Ok(json!({ "samples": times.len(), "E0": energies.first() }))
            }
        }
    }
}

/// Least-squares slope of `ln E_n` against `n` over the second half of the series.
fn log_slope(values: &[f64]) -> Option<f64> {
    let start = values.len() / 2;
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| (i as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    Some(sxy / sxx)
}

struct QuantumEnergy;

impl Analysis for QuantumEnergy {
    fn name(&self) -> &'static str {
        "quantum-energy"
    }
    fn aliases(&self) -> &'static [&'static str] {
        &["quantum"]
    }

    fn run(&self, ctx: &Context, out: &mut Output) -> Result<Value> {
        let map = ctx.single(self.name())?;
        let nm = &ctx.scenario.numeric;
        let length = map.trajectory().rest_length();
        let mut field = QuantumField::new(&map);
        field.quadrature.rel_tol = nm.quad_rel_tol;
        let moore = *field.moore();

        let taus = ctx.grid(nm.tau_min, nm.tau_max, nm.samples);
        let profile: Vec<[f64; 5]> = taus
            .par_iter()
            .map(|&tau| {
                let j = moore.jet(tau)?;
                Ok([tau, j.value, j.d1, j.schwarzian()?, j.density()?])
            })
            .collect::<dce_core::Result<_>>()?;
        let mut table = out.table(
            "quantum_profile.csv",
            &["tau", "R", "R_dot", "S_R", "rho_quantum"],
        )?;
        for r in &profile {
            table.row(&r.map(num))?;
        }
        table.finish()?;

        // Panel edges at the forward images of the last static label, where ϱ has kinks.
        let reach = ((nm.t_max + 2.0 * length) / (2.0 * map.trajectory().extent().0)).ceil();
        let kinks: Vec<f64> = std::iter::once(map.static_until())
            .chain(
                forward_series(&map, map.static_until(), reach as usize)?
                    .into_iter()
                    .map(|(t, _)| t),
            )
            .collect();
        let times = ctx.grid(0.0, nm.t_max, nm.nt);
        let energies: Vec<f64> = times
            .par_iter()
            .map(|&t| field.direct_energy(t, &kinks))
            .collect::<dce_core::Result<_>>()?;
        let mut table = out.table("quantum_energy.csv", &["t", "E_quantum"])?;
        for (t, e) in times.iter().zip(&energies) {
            table.row(&[num(*t), num(*e)])?;
        }
        table.finish()?;

        let mut table = out.table(
            "quantum_terms.csv",
            &["n", "T_n", "log_D_n", "A_n", "doppler_term", "anomaly_term"],
        )?;
        let mut last = None;
        for n in 1..=nm.n_max {
            let ev = quantum_evolution(&map, nm.tau, n)?;
            table.row(&[
                n.to_string(),
                num(ev.label),
                num(ev.log_doppler),
                num(ev.anomaly),
                num(ev.doppler_term),
                num(ev.anomaly_term),
            ])?;
            last = Some(ev);
        }
        table.finish()?;
        Ok(json!({
            "static_casimir_energy": -PI / (24.0 * length),
            "E_first": energies.first(),
            "E_last": energies.last(),
            "anomaly_ratio_at_n_max": last.map(|e| e.anomaly_ratio()),
        }))
    }
}

struct DensityMap;

impl Analysis for DensityMap {
    fn name(&self) -> &'static str {
        "density-map"
    }

    fn run(&self, ctx: &Context, out: &mut Output) -> Result<Value> {
        let nm = &ctx.scenario.numeric;
        let times = ctx.grid(0.0, nm.t_max, nm.nt);
        let rows: Vec<Vec<[f64; 3]>> = match ctx.cavity {
            Cavity::Single(_) => {
                let map = ctx.single(self.name())?;
                let (a, b) = seed_interval(&map);
                let field = ClassicalField::new(ctx.seed_profile(a, b)?, &map)?;
                let wall: &WallTrajectory = map.trajectory();
                times
                    .iter()
                    .map(|&t| {
                        let xs = ctx.grid(0.0, wall.position(t), nm.nx);
                        let vals = field.density_field(t, &xs)?;
                        Ok(xs.iter().zip(vals).map(|(&x, v)| [t, x, v]).collect())
                    })
                    .collect::<dce_core::Result<_>>()?
            }
            Cavity::Two(c) => {
                let (a, b) = TwoWallField::seed_window(c);
                let profile = ctx.seed_profile(a, b)?;
                let field = TwoWallField::new(c, profile.clone(), profile)?;
                times
                    .iter()
                    .map(|&t| {
                        let l1 = c.wall(Wall::Right).trajectory().position(t);
                        let l2 = c.wall(Wall::Left).trajectory().position(t);
                        ctx.grid(-l2, l1, nm.nx)
                            .par_iter()
                            .map(|&x| Ok([t, x, field.density(t, x)?]))
                            .collect::<dce_core::Result<Vec<_>>>()
                    })
                    .collect::<dce_core::Result<_>>()?
            }
        };
        let mut table = out.table("density_map.csv", &["t", "x", "T00"])?;
        for r in rows.iter().flatten() {
            table.row(&r.map(num))?;
        }
        table.finish()?;
        Ok(json!({ "nt": nm.nt, "nx": nm.nx, "t_max": nm.t_max }))
    }
}

struct TwoWallModes;

impl Analysis for TwoWallModes {
    fn name(&self) -> &'static str {
        "twowall-modes"
    }
    fn aliases(&self) -> &'static [&'static str] {
        &["twowall"]
    }

    fn run(&self, ctx: &Context, out: &mut Output) -> Result<Value> {
        let cavity = ctx.two(self.name())?;
        let nm = &ctx.scenario.numeric;
        let length = cavity.rest_length();
        let n = ctx.scenario.resonance_order().unwrap_or(1);
        let omega = cavity
            .harmonic_params()
            .map(|p| p.omega_right)
            .unwrap_or_else(|| n as f64 * PI / length);
        let period = 2.0 * PI * n as f64 / omega;

        let mut table = out.table(
            "twowall_exponents.csv",
            &[
                "side",
                "t1",
                "tau0",
                "sign",
                "lambda_exact",
                "lambda_product",
            ],
        )?;
        let mut degenerate = false;
        for side in [Side::Left, Side::Right] {
            // Right-family orbits hit the left wall half a period before t1.
            let lo = if side == Side::Right {
                0.5 * period
            } else {
                0.0
            };
            let window = (lo, lo + period);
            let found = cavity.two_wall_return_points(
                side,
                period,
                window,
                &ReturnPointOptions::default(),
            )?;
            degenerate |= found.degenerate;
            for e in cavity.two_wall_exponents(side, period, window, nm.n_probe)? {
                table.row(&[
                    side.to_string(),
                    num(e.t1),
                    num(e.start),
                    e.sign.to_string(),
                    num(e.exact),
                    num(e.product),
                ])?;
            }
        }
        table.finish()?;

        let eff = cavity.effective_trajectory(Side::Left, nm.horizon)?;
        let mut table = out.table("effective_trajectory.csv", &["t", "L", "L_dot"])?;
        for t in ctx.grid(eff.motion_start(), nm.horizon, nm.samples) {
            let [l, v, ..] = eff.jet(t);
            table.row(&[num(t), num(l), num(v)])?;
        }
        table.finish()?;

        let mut summary =
            json!({ "mode": cavity.mode(), "N": n, "period": period, "degenerate": degenerate });
        if let Some(p) = cavity.harmonic_params() {
            summary["window"] = json!(resonance_window(&WindowParams::TwoWall {
                length,
                amplitude_right: p.amplitude_right,
                amplitude_left: p.amplitude_left,
                dephasing: p.dephasing,
                n,
            }));
            summary["small_amplitude_exponent"] = json!(small_amplitude_exponent(
                n,
                length,
                p.amplitude_right,
                p.amplitude_left,
                p.dephasing
            ));
        }
        Ok(summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_resolves_aliases() {
        let r = AnalysisRegistry::default();
        assert_eq!(r.get("energy").unwrap().name(), "classical-energy");
        assert_eq!(r.get("twowall").unwrap().name(), "twowall-modes");
        assert!(r.get("spectrum").is_err());
    }

    #[test]
    fn slope_of_exponential() {
        let v: Vec<f64> = (0..40).map(|n| 3.0 * (0.25 * n as f64).exp()).collect();
        assert!((log_slope(&v).unwrap() - 0.25).abs() < 1e-12);
    }
}
