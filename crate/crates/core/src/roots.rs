//! Bracketed root finding for strictly increasing functions.
//!
//! Every equation solved in this crate has the form `t ± L(t) = τ` with a
//! derivative `1 ± L̇(t)` bounded away from zero, so a bracket always exists
//! and Newton steps are safe once they are kept inside it.

use crate::error::{Error, Result};

/// Safeguarded Newton iteration on an increasing function.
#[derive(Debug, Clone, Copy)]
pub struct MonotoneSolver {
    /// Absolute tolerance on the root.
    pub tolerance: f64,
    /// Number of geometric bracket expansions before giving up.
    pub max_expansions: u32,
    pub max_iterations: u32,
}

impl Default for MonotoneSolver {
    fn default() -> Self {
        MonotoneSolver {
            tolerance: 1e-12,
            max_expansions: 64,
            max_iterations: 100,
        }
    }
}

impl MonotoneSolver {
    /// Solves `g(t) = target` where `g` is increasing. `eval` returns `(g, g')`.
    ///
    /// The bracket is seeded at `guess` and widened by `step`, doubling each
    /// time, until it straddles the root.
    pub fn solve<F>(&self, eval: F, target: f64, guess: f64, step: f64) -> Result<f64>
    where
        F: Fn(f64) -> (f64, f64),
    {
        let residual = |t: f64| {
            let (g, d) = eval(t);
            (g - target, d)
        };

        let (mut x, mut fx_d) = (guess, residual(guess));
        if fx_d.0 == 0.0 {
            return Ok(x);
        }

        // Expand a bracket [lo, hi] with r(lo) < 0 < r(hi).
        let mut step = step.abs().max(self.tolerance);
        let (mut lo, mut hi);
        let mut expansions = 0;
        if fx_d.0 < 0.0 {
            lo = guess;
            hi = guess + step;
            while residual(hi).0 < 0.0 {
                if expansions >= self.max_expansions {
                    return Err(Error::RootNotBracketed {
                        target,
                        expansions,
                        lo,
                        hi,
                    });
                }
                lo = hi;
                step *= 2.0;
                hi += step;
                expansions += 1;
            }
        } else {
            hi = guess;
            lo = guess - step;
            while residual(lo).0 > 0.0 {
                if expansions >= self.max_expansions {
                    return Err(Error::RootNotBracketed {
                        target,
                        expansions,
                        lo,
                        hi,
                    });
                }
                hi = lo;
                step *= 2.0;
                lo -= step;
                expansions += 1;
            }
        }
        if !(lo..=hi).contains(&x) {
            x = 0.5 * (lo + hi);
            fx_d = residual(x);
        }

        for _ in 0..self.max_iterations {
            let (r, d) = fx_d;
            if r == 0.0 {
                return Ok(x);
            }
            if r < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let newton = x - r / d;
            let next = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let dx = (next - x).abs();
            x = next;
            fx_d = residual(x);
            let ulp = 4.0 * f64::EPSILON * x.abs().max(1.0);
            if dx <= (1e-3 * self.tolerance).max(ulp) || hi - lo <= ulp {
                return Ok(x);
            }
        }
        if hi - lo <= self.tolerance {
            Ok(x)
        } else {
            Err(Error::RootNotConverged {
                target,
                width: hi - lo,
            })
        }
    }
}

/// Plain bisection on a sign change in `[lo, hi]`, used for return-point scans.
pub(crate) fn bisect<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64, tolerance: f64) -> f64 {
    let mut glo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tolerance || mid == lo || mid == hi {
            return mid;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let s = MonotoneSolver::default();
        let x = s
            .solve(|t| (t * t * t + t, 3.0 * t * t + 1.0), 10.0, 0.0, 0.5)
            .unwrap();
        assert!((x - 2.0).abs() < 1e-14);
    }

    #[test]
    fn far_guess_expands_bracket() {
        let s = MonotoneSolver::default();
        let x = s.solve(|t| (t, 1.0), -1.0e6, 5.0, 1.0).unwrap();
        assert!((x + 1.0e6).abs() < 1e-9);
    }

    #[test]
    fn bracket_failure_reported() {
        let s = MonotoneSolver {
            max_expansions: 3,
            ..Default::default()
        };
        let err = s
            .solve(|t| (t.atan(), 1.0 / (1.0 + t * t)), 2.0, 0.0, 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::RootNotBracketed { .. }));
    }

    #[test]
    fn bisection_finds_sine_zero() {
        let r = bisect(f64::sin, 3.0, 3.3, 1e-15);
        assert!((r - std::f64::consts::PI).abs() < 1e-14);
    }
}
