//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

const MIN_DEPTH: u32 = 4;
const MAX_DEPTH: u32 = 40;

struct State<F> {
    f: F,
    /// Worst local error estimate among intervals that hit the depth limit.
    unconverged: f64,
}

impl<F: Fn(f64) -> f64> State<F> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = ((self.f)(lm), (self.f)(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        if depth >= MAX_DEPTH {
            self.unconverged = self.unconverged.max(delta.abs() / 15.0);
            return left + right + delta / 15.0;
        }
        self.recurse(a, m, fa, flm, fm, left, tol / 2.0, depth + 1)
            + self.recurse(m, b, fm, frm, fb, right, tol / 2.0, depth + 1)
    }
}

/// `∫_a^b f` to absolute tolerance `tol`. Fails with the achieved error
/// estimate when some subinterval does not converge within the depth limit.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut state = State { f, unconverged: 0.0 };
    let (fa, fm, fb) = ((state.f)(a), (state.f)(0.5 * (a + b)), (state.f)(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = state.recurse(a, b, fa, fm, fb, whole, tol, 0);
    if !value.is_finite() {
        return Err(Error::Quadrature { achieved: f64::INFINITY, requested: tol });
    }
    if state.unconverged > tol {
        return Err(Error::Quadrature { achieved: state.unconverged, requested: tol });
    }
    Ok(value)
}

/// Integrates over consecutive pieces split at `breaks` (which must lie in
/// `[a, b]`), sharing the tolerance equally.
pub fn integrate_pieces(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    let mut points = vec![a];
    points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    points.push(b);
    points.sort_by(f64::total_cmp);
    let share = tol / (points.len() - 1) as f64;
    let mut total = 0.0;
    for w in points.windows(2) {
        total += integrate(&f, w[0], w[1], share)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_transcendentals() {
        assert!((integrate(|x| x * x, 0.0, 3.0, 1e-10).unwrap() - 9.0).abs() < 1e-10);
        assert!((integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-9).unwrap() - 2.0).abs() < 1e-9);
        let gauss = integrate(|x| (-x * x / 2.0).exp(), -8.0, 8.0, 1e-10).unwrap();
        assert!((gauss - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn kinks_via_pieces() {
        let v = integrate_pieces(|x: f64| x.abs(), -1.0, 2.0, &[0.0], 1e-12).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
    }

    #[test]
    fn singular_integrand_reports_failure() {
        match integrate(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, 1e-12) {
            Err(Error::Quadrature { achieved, requested }) => assert!(achieved > requested),
            other => panic!("{other:?}"),
        }
    }
}
