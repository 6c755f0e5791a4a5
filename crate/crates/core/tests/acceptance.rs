//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dce_core::billiard::{iterate_forward, BilliardMap, BounceMap};
use dce_core::classical::{full_width_half_max, local_maxima, seed_interval, ClassicalField};
use dce_core::profile::{GaussianSeed, Interpolation, ProfileFunction, UniformSeed};
use dce_core::quantum::{
    cumulative_anomaly, cumulative_anomaly_direct, MooreFunction, QuantumField,
};
use dce_core::resonance::{
    peak_census, principal_starting_points, resonance_window, resonant_frequency, scan_detuning,
    WindowParams,
};
use dce_core::twowall::{
    detuned_orbit_exists, EffectiveMatch, HarmonicPair, Side, TwoWallCavity, TwoWallField, Wall,
};
use dce_core::WallTrajectory;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn resonant_wall(n: usize, dl_over_l: f64) -> Result<BilliardMap, String> {
    let w = WallTrajectory::sinusoidal(1.0, dl_over_l, resonant_frequency(n, 1.0), 0.0, 0.0)
        .map_err(err)?;
    Ok(BilliardMap::new(w))
}

fn profile(map: &dyn BounceMap, gaussian: bool) -> Result<ProfileFunction, String> {
    let (a, b) = seed_interval(map);
    let p = if gaussian {
        ProfileFunction::sample(
            &GaussianSeed {
                center: 0.5 * (a + b),
                width: 0.3 * (b - a),
                amplitude: 1.0,
            },
            a,
            b,
            8193,
            Interpolation::CubicMonotone,
        )
    } else {
        ProfileFunction::sample(&UniformSeed { value: 1.0 }, a, b, 2, Interpolation::Linear)
    };
    p.map_err(err)
}

fn static_cavity() -> Check {
    let mut worst_f = 0.0f64;
    let mut worst_d = 0.0f64;
    let mut worst_e = 0.0f64;
    let mut worst_q = 0.0f64;
    for &len in &[1.0, 1.7] {
        let map = BilliardMap::new(WallTrajectory::static_wall(len).map_err(err)?);
        for i in 0..=40 {
            let tau = -3.0 + 0.55 * i as f64;
            worst_f = worst_f.max((map.eval_f(tau).map_err(err)? - (tau - 2.0 * len)).abs() / len);
            let (_, log_d) = iterate_forward(&map, tau, 100).map_err(err)?;
            worst_d = worst_d.max(log_d.abs());
        }
        let field = ClassicalField::new(profile(&map, true)?, &map).map_err(err)?;
        let series = field.energy_series(100, &[]).map_err(err)?;
        let e0 = series[0].energy;
        for s in &series {
            worst_e = worst_e.max(rel(s.energy, e0));
        }
        for &t in &[0.0, 13.3, 57.9, 199.0] {
            worst_e = worst_e.max(rel(field.direct_energy(t).map_err(err)?, e0));
        }
        let q = QuantumField::new(&map);
        let density = -PI / (48.0 * len * len);
        for i in 0..=20 {
            let tau = -len + 0.73 * i as f64;
            worst_q = worst_q.max(rel(q.moore().quantum_density(tau).map_err(err)?, density));
        }
        for &t in &[0.0, 2.2, 31.0] {
            worst_q = worst_q.max(rel(
                q.direct_energy(t, &[]).map_err(err)?,
                -PI / (24.0 * len),
            ));
        }
    }
    ensure(
        worst_f < 1e-12 && worst_d < 1e-12 && worst_e < 1e-8 && worst_q < 1e-10,
        format!("|f−(τ−2L)|/L={worst_f:.1e} |ln D_n|={worst_d:.1e} ΔE/E={worst_e:.1e} quantum rel={worst_q:.1e}"),
    )
}

fn resonance_doppler() -> Check {
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for &dl in &[0.001, 0.01] {
            let map = resonant_wall(n, dl)?;
            let x = resonant_frequency(n, 1.0) * dl;
            let per = ((1.0 + x) / (1.0 - x)).ln();
            let (plus, minus) = principal_starting_points(n, 1.0).map_err(err)?;
            for (taus, sign) in [(plus, 1.0), (minus, -1.0)] {
                for tau in taus {
                    let (_, log_d) = iterate_forward(&map, tau, 50).map_err(err)?;
                    worst = worst.max((log_d - sign * 50.0 * per).exp_m1().abs());
                }
            }
        }
    }
    ensure(
        worst < 1e-9,
        format!("max rel. error of D_50 = {worst:.2e} over N∈{{1,2,3}}, ΔL/L∈{{0.001,0.01}}"),
    )
}

fn derivative_identity() -> Check {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n_res = rng.gen_range(1..=3);
        let dl = rng.gen_range(0.001..0.03);
        let map = resonant_wall(n_res, dl)?;
        let tau = rng.gen_range(-0.9..3.0);
        let k = rng.gen_range(1..=20);
        let h = 1e-4;
        let at = |x: f64| iterate_forward(&map, x, k).map(|r| r.0).map_err(err);
        let slope = (8.0 * (at(tau + h)? - at(tau - h)?)
            - (at(tau + 2.0 * h)? - at(tau - 2.0 * h)?))
            / (12.0 * h);
        let (_, log_d) = iterate_forward(&map, tau, k).map_err(err)?;
        worst = worst.max((slope * log_d.exp() - 1.0).abs());
    }
    ensure(
        worst < 1e-6,
        format!("max |D_n·Ṫ_n − 1| = {worst:.2e} over 100 random (τ, n ≤ 20)"),
    )
}

fn resonance_window_scan() -> Check {
    let step: f64 = 1e-3;
    let mut notes = Vec::new();
    let mut ok = true;
    for dl in [0.01f64, 0.05] {
        for n in [1, 2] {
            let count = (3.0 * dl / step).round() as i64;
            let ratios: Vec<f64> = (-count..=count).map(|i| i as f64 * step).collect();
            let rows = scan_detuning(1.0, dl, n, &ratios, 48).map_err(err)?;
            let unstable: Vec<f64> = rows
                .iter()
                .filter(|r| r.unstable)
                .map(|r| r.ratio)
                .collect();
            let lo = unstable.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = unstable.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let contiguous = rows
                .iter()
                .all(|r| r.unstable == (r.ratio >= lo && r.ratio <= hi));
            let hit =
                (hi - dl).abs() <= step + 1e-12 && (lo + dl).abs() <= step + 1e-12 && contiguous;
            ok &= hit;
            notes.push(format!("ΔL/L={dl},N={n}: [{lo:.3}, {hi:.3}]"));
        }
    }
    ensure(ok, format!("unstable bands {}", notes.join("; ")))
}

fn count_peaks(values: &[f64]) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let interior = local_maxima(values, 0.5).len();
    let n = values.len();
    let edge = [(values[0], values[1]), (values[n - 1], values[n - 2])]
        .iter()
        .filter(|(v, next)| v >= next && *v >= 0.5 * max)
        .count();
    interior + edge
}

fn peak_census_check() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for n in 1..=3 {
        let map = resonant_wall(n, 0.01)?;
        let field = ClassicalField::new(profile(&map, false)?, &map).map_err(err)?;
        for &t in &[40.13, 41.37, 42.71] {
            let len = map.trajectory().position(t);
            let xs: Vec<f64> = (0..=4000).map(|i| len * i as f64 / 4000.0).collect();
            let rho = field.density_field(t, &xs).map_err(err)?;
            let found = count_peaks(&rho);
            ok &= found == n;
            notes.push(format!("N={n},t={t}:{found}"));
        }
    }
    let principal = format!("principal peaks [{}]", notes.join(" "));

    // Additional series need ΔL/L > M/N, i.e. ω_N ΔL > Mπ.
    let census = peak_census(2, 0.55);
    let extra = match resonant_wall(2, 0.55) {
        Ok(_) => {
            let exps: Vec<_> = census.series.iter().skip(1).map(|s| s.exponent).collect();
            ok &= exps.iter().all(Option::is_some);
            format!("additional series exponents {exps:?}")
        }
        Err(e) => {
            ok = false;
            format!(
                "additional series (N=2, ΔL/L=0.55, {} series predicted) not realisable: {e}",
                census.num_series
            )
        }
    };
    ensure(ok, format!("{principal}; {extra}"))
}

fn peak_profile(field: &ClassicalField, basin: (f64, f64), n: usize) -> Result<(f64, f64), String> {
    let mut pts = Vec::with_capacity(200_000);
    for i in 1..200_000 {
        let sigma = basin.0 + (basin.1 - basin.0) * i as f64 / 200_000.0;
        let (t, rho) = field.evolve_density(sigma, n).map_err(err)?;
        pts.push((t, rho));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let height = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = full_width_half_max(&xs, &ys).ok_or("peak has no half-maximum crossing")?;
    Ok((height, width))
}

fn peak_asymptotics() -> Check {
    let n_res = 2;
    let map = resonant_wall(n_res, 0.01)?;
    let field = ClassicalField::new(profile(&map, true)?, &map).map_err(err)?;
    let (plus, minus) = principal_starting_points(n_res, 1.0).map_err(err)?;
    let tau_plus = plus[1];
    let basin = (minus[1], minus[1] + 2.0 / n_res as f64);
    let d1 = iterate_forward(&map, tau_plus, 1).map_err(err)?.1.exp();
    let (h50, w50) = peak_profile(&field, basin, 50)?;
    let (h51, w51) = peak_profile(&field, basin, 51)?;
    let height_err = rel(h51 / h50, d1 * d1);
    let width_err = rel(w51 / w50, 1.0 / d1);
    ensure(
        height_err < 0.01 && width_err < 0.01,
        format!(
            "height ratio {:.6} vs D₁² {:.6} ({height_err:.1e}); width ratio {:.6} vs D₁⁻¹ {:.6} ({width_err:.1e})",
            h51 / h50,
            d1 * d1,
            w51 / w50,
            1.0 / d1
        ),
    )
}

fn moore_and_anomaly() -> Check {
    let map = resonant_wall(2, 0.01)?;
    let moore = MooreFunction::new(&map);
    let mut worst_residual = 0.0f64;
    let mut label = 0.37;
    for _ in 0..50 {
        label = map.forward(label).map_err(err)?.to;
        let crossing = map.retarded_time(label).map_err(err)?;
        worst_residual = worst_residual.max(moore.residual(crossing + 1.0).map_err(err)?.abs());
        worst_residual = worst_residual.max(moore.residual(label).map_err(err)?.abs());
    }
    let mut worst_anomaly = 0.0f64;
    for &tau in &[-0.8, -0.3, 0.21, 0.66] {
        for n in 1..=20 {
            let sum = cumulative_anomaly(&map, tau, n).map_err(err)?;
            let direct = cumulative_anomaly_direct(&map, tau, n).map_err(err)?;
            worst_anomaly = worst_anomaly.max((sum - direct).abs() / direct.abs().max(1e-300));
        }
    }
    ensure(
        worst_residual < 1e-9 && worst_anomaly < 1e-7,
        format!("max Moore residual {worst_residual:.2e}; anomaly sum vs direct rel. {worst_anomaly:.2e}"),
    )
}

fn two_wall_equivalences() -> Check {
    // Breathing: the double reflection is f₁∘f₁ of a single wall.
    let breathing = TwoWallCavity::breathing(1.0, 0.01, 2).map_err(err)?;
    let f1 = breathing.wall(Wall::Right);
    let mut worst_breathing = 0.0f64;
    for &tau in &[-0.4, 0.13, 0.5, 1.7] {
        let path = breathing.trace_two_wall(Side::Left, tau, 40).map_err(err)?;
        let (mut t, mut log_d) = (tau, 0.0);
        for k in 0..40 {
            for _ in 0..2 {
                let s = f1.forward(t).map_err(err)?;
                t = s.to;
                log_d += s.log_doppler;
            }
            worst_breathing = worst_breathing.max((path.log_doppler[k] - log_d).exp_m1().abs());
            worst_breathing = worst_breathing.max((path.labels[k] - t).abs());
        }
    }

    // Translational mode of period L: f_L, f_R are static shifts and E returns every round trip.
    let trans = TwoWallCavity::translational(1.0, 0.02).map_err(err)?;
    let mut worst_shift = 0.0f64;
    for side in [Side::Left, Side::Right] {
        for &tau in &[-0.3, 0.4, 1.2, 3.3] {
            let path = trans.trace_two_wall(side, tau, 30).map_err(err)?;
            for (k, (label, log_d)) in path.labels.iter().zip(&path.log_doppler).enumerate() {
                worst_shift = worst_shift
                    .max((label - tau - 2.0 * (k + 1) as f64).abs())
                    .max(log_d.abs());
            }
        }
    }
    let (a, b) = TwoWallField::seed_window(&trans);
    let seed = GaussianSeed {
        center: 0.5 * (a + b),
        width: 0.2,
        amplitude: 1.0,
    };
    let prof =
        ProfileFunction::sample(&seed, a, b, 4097, Interpolation::CubicMonotone).map_err(err)?;
    let field = TwoWallField::new(&trans, prof.clone(), prof).map_err(err)?;
    let e0 = field.energy(0.0).map_err(err)?;
    let mut worst_trans = 0.0f64;
    for k in 1..=30 {
        worst_trans = worst_trans.max(rel(field.energy(2.0 * k as f64).map_err(err)?, e0));
    }

    // Equal amplitudes, N odd, δ = 0: the two Doppler shifts cancel.
    let mut worst_odd = 0.0f64;
    for n in [1, 3] {
        let cavity = TwoWallCavity::breathing(1.0, 0.01, n).map_err(err)?;
        for side in [Side::Left, Side::Right] {
            for &tau in &[5.3, 6.05, 7.9] {
                let path = cavity.trace_two_wall(side, tau, 60).map_err(err)?;
                worst_odd = worst_odd.max((path.log_doppler[59] / 60.0).abs());
            }
        }
    }

    // Dephased window edges from a scan of the return condition.
    let step = 1e-3;
    let mut worst_edge = 0.0f64;
    for &delta in &[0.5, 1.3, 2.5] {
        let pair = HarmonicPair {
            length: 1.0,
            amplitude_right: 0.02,
            amplitude_left: 0.01,
            omega_right: 0.0,
            omega_left: 0.0,
            dephasing: delta,
        };
        let window = resonance_window(&WindowParams::TwoWall {
            length: 1.0,
            amplitude_right: 0.02,
            amplitude_left: 0.01,
            dephasing: delta,
            n: 2,
        });
        let mut found = Vec::new();
        for i in -60..=60 {
            let ratio = i as f64 * step;
            if detuned_orbit_exists(&pair, 2, ratio).map_err(err)? {
                found.push(ratio);
            }
        }
        let lo = found.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = found.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        worst_edge = worst_edge
            .max((lo - window.lower).abs())
            .max((hi - window.upper).abs());
    }

    ensure(
        worst_breathing < 1e-10 && worst_shift < 1e-10 && worst_trans < 1e-8 && worst_odd < 1e-10 && worst_edge <= step,
        format!(
            "breathing vs f₁∘f₁ {worst_breathing:.1e}; translational |f_L−(τ−2L)|,|ln D| {worst_shift:.1e}, ΔE/E per round trip {worst_trans:.1e}; \
             N odd |λ| {worst_odd:.1e}; window edge offset {worst_edge:.1e} (grid {step:.0e})"
        ),
    )
}

fn velocity_composition() -> Check {
    let omega = resonant_frequency(2, 1.0);
    let cavity = TwoWallCavity::harmonic(HarmonicPair {
        length: 1.0,
        amplitude_right: 0.02,
        amplitude_left: 0.01,
        omega_right: omega,
        omega_left: omega,
        dephasing: 0.7,
    })
    .map_err(err)?;
    let horizon = 10.0;
    let eff = cavity
        .effective_trajectory(Side::Left, horizon)
        .map_err(err)?;
    let (inner, outer) = (cavity.wall(Wall::Right), cavity.wall(Wall::Left));
    let matcher = EffectiveMatch::new(inner, outer);
    let mut worst = 0.0f64;
    let mut samples = 0;
    for i in 0..1000 {
        let s = 0.01 + (horizon - 0.5) * i as f64 / 1000.0;
        let p = matcher.point(s, false).map_err(err)?;
        if p.t > horizon || (p.outer_time.abs() < 1e-6) {
            continue;
        }
        let doppler = |v: f64| (1.0 - v) / (1.0 + v);
        let product = doppler(inner.trajectory().velocity(s))
            * doppler(outer.trajectory().velocity(p.outer_time));
        worst = worst.max(rel(doppler(eff.velocity(p.t)), product));
        samples += 1;
    }
    ensure(
        worst < 1e-8 && samples >= 990,
        format!("max rel. error of (1−L̇)/(1+L̇) vs wall Doppler product = {worst:.2e} on {samples} samples"),
    )
}

fn energy_growth() -> Check {
    let map = resonant_wall(2, 0.01)?;
    let field = ClassicalField::new(profile(&map, true)?, &map).map_err(err)?;
    let (plus, minus) = principal_starting_points(2, 1.0).map_err(err)?;
    let spots: Vec<f64> = plus.iter().chain(&minus).copied().collect();
    let series = field.energy_series(100, &spots).map_err(err)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = series[50..]
        .iter()
        .map(|e| (e.bounce as f64, e.energy.ln()))
        .unzip();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let log_d1 = iterate_forward(&map, plus[0], 1).map_err(err)?.1;
    let target = 2.0 * log_d1;
    ensure(
        rel(slope, target) < 0.03,
        format!(
            "fitted d ln E/dn = {slope:.6} vs 2·ln D₁(τ₊) = {target:.6} (rel. {:.1e}); ln D₁(τ₊) = {log_d1:.6}",
            rel(slope, target)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("static cavity", static_cavity),
        ("exact resonance Doppler factors", resonance_doppler),
        ("derivative identity D_n = 1/Ṫ_n", derivative_identity),
        ("resonance window", resonance_window_scan),
        ("peak census", peak_census_check),
        ("peak asymptotics", peak_asymptotics),
        ("Moore residual and anomaly sum", moore_and_anomaly),
        ("two-wall equivalences", two_wall_equivalences),
        ("velocity composition", velocity_composition),
        ("exponential energy growth", energy_growth),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
