//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};
use crate::summation::Neumaier;

/// Evaluation budget for [`adaptive_simpson`].
pub const MAX_EVALUATIONS: usize = 20_000_000;

const MAX_DEPTH: u32 = 60;
const INITIAL_PANELS: usize = 64;

struct State<'f, F> {
    f: &'f F,
    evaluations: usize,
    exhausted: bool,
}

impl<F: Fn(f64) -> f64> State<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        if self.evaluations > MAX_EVALUATIONS {
            self.exhausted = true;
        }
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (self.eval(lm), self.eval(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if self.exhausted || depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
            if depth >= MAX_DEPTH && delta.abs() > 15.0 * tol {
                self.exhausted = true;
            }
            return left + right + delta / 15.0;
        }
        self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
}

/// `∫_a^b f` to absolute tolerance `tol` by recursive Simpson refinement with
/// Richardson correction.
///
/// The interval is first cut into 64 equal panels so that a coarse first
/// estimate cannot accidentally look converged.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut state = State { f: &f, evaluations: 0, exhausted: false };
    let h = (b - a) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let mut total = Neumaier::default();
    let mut fa = state.eval(a);
    for i in 0..INITIAL_PANELS {
        let lo = a + h * i as f64;
        let hi = if i + 1 == INITIAL_PANELS { b } else { a + h * (i + 1) as f64 };
        let mid = 0.5 * (lo + hi);
        let (fm, fb) = (state.eval(mid), state.eval(hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total.add(state.refine(lo, hi, fa, fm, fb, whole, panel_tol, 0));
        fa = fb;
    }
    if state.exhausted {
        return Err(Error::NonConvergence { tol, evaluations: state.evaluations });
    }
    Ok(total.total())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_exponentials() {
        let cubic = adaptive_simpson(|x| x * x * x - x, -1.0, 2.0, 1e-14).unwrap();
        assert!((cubic - 2.25).abs() < 1e-13);
        let e = adaptive_simpson(f64::exp, 0.0, 1.0, 1e-14).unwrap();
        assert!((e - (std::f64::consts::E - 1.0)).abs() < 1e-14);
        assert_eq!(adaptive_simpson(f64::exp, 3.0, 3.0, 1e-14).unwrap(), 0.0);
    }

    #[test]
    fn reports_non_convergence() {
        // Hashed noise: no refinement ever settles.
        let noise = |x: f64| (crate::rng::splitmix64(x.to_bits()) & 1) as f64;
        let r = adaptive_simpson(noise, 0.0, 1.0, 1e-15);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
