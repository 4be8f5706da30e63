//! Error model of the upper-bound sketch.
//!
//! With `h` mappings into `m` rows and `Np` other active coordinates (in
//! expectation, each with the same value distribution `φ`/`Φ`), a value
//! decoded from the upper-bound sketch overestimates the truth with
//! probability
//!
//! ```text
//! P[X̄ > X] = ∫ [1 − exp(−(h/m)(1 − Φ(α))·Np)]^h φ(α) dα
//! ```
//!
//! and the overestimation error `Z̄ = X̄ − X` has survival function
//! `P[Z̄ > δ] = ∫ [1 − exp(−(h/m)(1 − Φ(α + δ))·Np)]^h φ(α) dα`. Everything
//! here is symmetric for the lower-bound sketch.

use std::f64::consts::SQRT_2;

use crate::analysis::dist::ValueDist;
use crate::analysis::quadrature::{integrate, integrate_pieces};
use crate::error::{Error, Result};

/// Absolute tolerance of single integrals.
pub const INNER_TOL: f64 = 1e-6;
/// Absolute tolerance of the outer integral of nested quadratures.
pub const OUTER_TOL: f64 = 1e-4;

/// Sketch geometry plus `Np`, the expected number of other active
/// coordinates in a vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchParams {
    pub m: f64,
    pub h: u32,
    pub np: f64,
}

impl SketchParams {
    pub fn new(m: f64, h: u32, np: f64) -> Result<Self> {
        if !(m >= 1.0) || h == 0 || !(np > 0.0) || !np.is_finite() {
            return Err(Error::InvalidParams(format!("need m >= 1, h >= 1, Np > 0 (m={m}, h={h}, Np={np})")));
        }
        Ok(Self { m, h, np })
    }

    /// `[1 − exp(−(h/m)·s·Np)]^h`: probability that all `h` rows of a
    /// coordinate hold a larger colliding value, when a random other value
    /// exceeds the threshold with probability `s`.
    #[inline]
    fn all_rows_exceed(&self, s: f64) -> f64 {
        let h = f64::from(self.h);
        (-(-(h / self.m) * s * self.np).exp_m1()).powi(self.h as i32)
    }
}

/// `P[Z̄ > δ]` for `δ ≥ 0`.
pub fn prob_error_exceeds(dist: &ValueDist, params: &SketchParams, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParams(format!("delta must be non-negative, got {delta}")));
    }
    match dist {
        ValueDist::Discrete { values, pmf } => {
            Ok(values.iter().zip(pmf).map(|(&v, &p)| p * params.all_rows_exceed(dist.sf(v + delta))).sum())
        }
        _ => {
            let (lo, hi) = dist.range();
            let f = |a: f64| params.all_rows_exceed(dist.sf(a + delta)) * dist.pdf(a);
            // the integrand vanishes past hi − δ; splitting there keeps the kink at a node
            integrate_pieces(f, lo, hi, &[hi - delta], INNER_TOL).map(|v| v.clamp(0.0, 1.0))
        }
    }
}

/// Probability that the upper-bound sketch overestimates a value.
pub fn prob_overestimate(dist: &ValueDist, params: &SketchParams) -> Result<f64> {
    prob_error_exceeds(dist, params, 0.0)
}

/// `P[Z̄ ≤ δ]`.
pub fn error_cdf(dist: &ValueDist, params: &SketchParams, delta: f64) -> Result<f64> {
    Ok(1.0 - prob_error_exceeds(dist, params, delta)?)
}

/// Closed form of [`prob_overestimate`] for Gaussian values:
/// `1 + Σ_{k=1}^{h} C(h,k)(−1)^k (m/(k·h·Np))(1 − e^{−k·h·Np/m})`.
pub fn prob_overestimate_gaussian(params: &SketchParams) -> f64 {
    let h = f64::from(params.h);
    let mut total = 1.0;
    let mut binom = 1.0;
    for k in 1..=params.h {
        binom *= f64::from(params.h - k + 1) / f64::from(k);
        let x = f64::from(k) * h * params.np / params.m;
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        total += sign * binom * (-(-x).exp_m1()) / x;
    }
    total
}

/// `1 − Φ′(δ)` where `Φ′` is the CDF of a zero-mean Gaussian with standard
/// deviation `σ√2` (the difference of two independent values).
fn diff_sf(sigma: f64, delta: f64) -> f64 {
    0.5 * libm::erfc(delta / (sigma * SQRT_2 * SQRT_2))
}

/// Approximate closed form of [`error_cdf`] for zero-mean Gaussian values:
/// `1 − [1 − exp(−(h·Np/m)(1 − Φ′(δ)))]^h`.
pub fn error_cdf_gaussian(sigma: f64, params: &SketchParams, delta: f64) -> f64 {
    1.0 - params.all_rows_exceed(diff_sf(sigma, delta))
}

/// Smallest `m` with `P[Z̄ > δ] ≤ ε` under [`error_cdf_gaussian`]:
/// `m > −h·Np(1 − Φ′(δ)) / ln(1 − ε^{1/h})`, at least 1.
pub fn min_sketch_rows(sigma: f64, delta: f64, epsilon: f64, h: u32, np: f64) -> Result<u64> {
    if !(delta > 0.0) || !(epsilon > 0.0 && epsilon < 1.0) || h == 0 || !(np > 0.0) || !(sigma > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need delta > 0, 0 < epsilon < 1, h >= 1, Np > 0, sigma > 0 (delta={delta}, epsilon={epsilon}, h={h}, Np={np}, sigma={sigma})"
        )));
    }
    let h_f = f64::from(h);
    let denom = (-epsilon.powf(1.0 / h_f)).ln_1p();
    let bound = -h_f * np * diff_sf(sigma, delta) / denom;
    Ok((bound.floor() as u64 + 1).max(1))
}

/// Upper limit for integrals over `δ`: the support width, or for a Gaussian
/// the first doubling of `σ` where `P[Z̄ > δ] < 1e-9` (at most `16σ`).
fn delta_limit(dist: &ValueDist, params: &SketchParams) -> Result<f64> {
    Ok(match dist {
        ValueDist::Uniform { a, b } => b - a,
        ValueDist::Discrete { values, .. } => values[values.len() - 1] - values[0],
        ValueDist::Gaussian { sigma, .. } => {
            let mut d = *sigma;
            while d < 16.0 * sigma && prob_error_exceeds(dist, params, d)? >= 1e-9 {
                d *= 2.0;
            }
            d.min(16.0 * sigma)
        }
    })
}

/// `E[Z̄]` over active coordinates, `∫₀^∞ P[Z̄ > δ] dδ`.
pub fn expected_error(dist: &ValueDist, params: &SketchParams) -> Result<f64> {
    if let ValueDist::Discrete { values, pmf } = dist {
        return Ok(discrete_moments(values, pmf, params).0);
    }
    let limit = delta_limit(dist, params)?;
    let survival = |d: f64| prob_error_exceeds(dist, params, d).unwrap_or(f64::NAN);
    integrate(survival, 0.0, limit, OUTER_TOL)
}

/// `E[Z̄²]` over active coordinates, `∫₀^∞ 2δ·P[Z̄ > δ] dδ`.
pub fn error_second_moment(dist: &ValueDist, params: &SketchParams) -> Result<f64> {
    if let ValueDist::Discrete { values, pmf } = dist {
        return Ok(discrete_moments(values, pmf, params).1);
    }
    let limit = delta_limit(dist, params)?;
    let f = |d: f64| 2.0 * d * prob_error_exceeds(dist, params, d).unwrap_or(f64::NAN);
    integrate(f, 0.0, limit, OUTER_TOL)
}

/// Conditional mean and standard deviation of `Z̄` given the coordinate is
/// active: the `μ_i`, `σ_i` used by [`zi_moments`].
pub fn error_mean_std(dist: &ValueDist, params: &SketchParams) -> Result<(f64, f64)> {
    let mean = expected_error(dist, params)?;
    let second = error_second_moment(dist, params)?;
    Ok((mean, (second - mean * mean).max(0.0).sqrt()))
}

/// Exact first and second moments of `Z̄` for a finite support. The survival
/// of the other values is a step function, so the δ-integrals reduce to sums
/// over support gaps.
fn discrete_moments(values: &[f64], pmf: &[f64], params: &SketchParams) -> (f64, f64) {
    let s = values.len();
    // g[k]: probability all rows exceed any threshold in [w_k, w_{k+1})
    let mut tail = vec![0.0; s + 1];
    for k in 0..s {
        tail[k + 1] = tail[k] + pmf[k];
    }
    let g: Vec<f64> = (0..s).map(|k| params.all_rows_exceed(1.0 - tail[k + 1])).collect();
    let mut suffix = vec![0.0; s + 1];
    for k in (0..s.saturating_sub(1)).rev() {
        suffix[k] = suffix[k + 1] + g[k] * (values[k + 1] - values[k]);
    }
    let mean = (0..s).map(|i| pmf[i] * suffix[i]).sum();
    let mut second = 0.0;
    for i in 0..s {
        let v = values[i];
        let mut acc = 0.0;
        for k in i..s - 1 {
            acc += g[k] * ((values[k + 1] - v).powi(2) - (values[k] - v).powi(2));
        }
        second += pmf[i] * acc;
    }
    (mean, second)
}

/// Unconditional moments of a coordinate's error `Z_i` when it is active
/// with probability `p` and its conditional error has mean `μ` and standard
/// deviation `σ`: `(p·μ, p·σ² + p(1 − p)·μ²)`.
pub fn zi_moments(p: f64, mu: f64, sigma: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p) || !mu.is_finite() || !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParams(format!("need p in [0,1], finite mu, sigma >= 0 (p={p}, mu={mu}, sigma={sigma})")));
    }
    Ok((p * mu, p * sigma * sigma + p * (1.0 - p) * mu * mu))
}

/// Per-coordinate error statistics for the upper-bound sketch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordStats {
    pub p: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// Standardized inner-product error
/// `Z = (⟨q, X̃ − X⟩ − Σ q_i·E[Z_i]) / sqrt(Σ q_i²·Var[Z_i])`, where the
/// moments come from [`zi_moments`]. A negative `q_i` reads the lower-bound
/// sketch, whose error has mean `−E[Z_i]` and the same variance.
pub fn z_statistic(q: &[f64], error: f64, stats: &[CoordStats]) -> Result<f64> {
    if q.len() != stats.len() {
        return Err(Error::InvalidParams(format!("{} query values for {} coordinate stats", q.len(), stats.len())));
    }
    let mut mean = 0.0;
    let mut var = 0.0;
    for (&qi, s) in q.iter().zip(stats) {
        let (e, v) = zi_moments(s.p, s.mu, s.sigma)?;
        mean += qi * if qi >= 0.0 { e } else { -e };
        var += qi * qi * v;
    }
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((error - mean) / var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: f64, h: u32) -> SketchParams {
        SketchParams::new(m, h, 120.0).unwrap()
    }

    fn uniform() -> ValueDist {
        ValueDist::uniform(-1.0, 1.0).unwrap()
    }

    fn gaussian(sigma: f64) -> ValueDist {
        ValueDist::gaussian(0.0, sigma).unwrap()
    }

    #[test]
    fn probability_table_cells() {
        for (m, want) in [(60.0, 0.57), (120.0, 0.37), (240.0, 0.21)] {
            assert!((prob_overestimate(&uniform(), &params(m, 1)).unwrap() - want).abs() <= 0.01);
            assert!((prob_overestimate(&gaussian(1.0), &params(m, 1)).unwrap() - want).abs() <= 0.01);
        }
        assert!((prob_overestimate(&gaussian(1.0), &params(240.0, 2)).unwrap() - 0.17).abs() <= 0.01);
        assert!(prob_overestimate(&uniform(), &params(1e12, 1)).unwrap() < 1e-6);
    }

    #[test]
    fn gaussian_closed_form_matches_quadrature() {
        for (m, h) in [(120.0, 1), (60.0, 2), (300.0, 3)] {
            let p = params(m, h);
            let q = prob_overestimate(&gaussian(1.0), &p).unwrap();
            assert!((prob_overestimate_gaussian(&p) - q).abs() < 1e-3);
        }
        assert!((prob_overestimate_gaussian(&params(60.0, 1)) - 0.57).abs() <= 0.01);
    }

    #[test]
    fn single_mapping_identity() {
        for (m, np) in [(10.0, 5.0), (60.0, 120.0), (123.4, 77.7), (1000.0, 3.0), (7.0, 900.0)] {
            let p = SketchParams::new(m, 1, np).unwrap();
            let direct = 1.0 - (m / np) * (1.0 - (-np / m).exp());
            assert!((prob_overestimate_gaussian(&p) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_consistency() {
        for d in [uniform(), gaussian(0.1), ValueDist::discrete([(-1.0, 0.3), (0.0, 0.3), (2.0, 0.4)]).unwrap()] {
            let p = params(90.0, 2);
            let at_zero = error_cdf(&d, &p, 0.0).unwrap() + prob_overestimate(&d, &p).unwrap();
            assert!((at_zero - 1.0).abs() < 1e-6);
            let mut prev = 0.0;
            for i in 0..40 {
                let c = error_cdf(&d, &p, i as f64 * 0.08).unwrap();
                assert!(c >= prev - 1e-9);
                prev = c;
            }
        }
        assert!((error_cdf(&uniform(), &params(60.0, 1), 2.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((error_cdf_gaussian(1.0, &params(60.0, 2), 50.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expected_error_table_cells() {
        for (m, want) in [(60.0, 0.43), (120.0, 0.26), (240.0, 0.15)] {
            assert!((expected_error(&uniform(), &params(m, 1)).unwrap() - want).abs() <= 0.02);
        }
        for (m, want) in [(60.0, 0.07), (120.0, 0.05), (240.0, 0.02)] {
            assert!((expected_error(&gaussian(0.1), &params(m, 1)).unwrap() - want).abs() <= 0.02);
        }
        // trapezoid oracle over a 40001 x 2001 grid gives 0.015673 here; the
        // published two-digit cell (0.01) sits 0.0057 away
        assert!((expected_error(&gaussian(0.1), &params(240.0, 2)).unwrap() - 0.015_673).abs() <= 1e-3);
        assert!(expected_error(&uniform(), &params(1e12, 1)).unwrap() < 1e-6);
    }

    #[test]
    fn discrete_moments_match_quadrature_on_fine_grid() {
        // a dense discrete grid approximates the continuous uniform
        let k = 2000;
        let d = ValueDist::discrete((0..k).map(|i| (-1.0 + 2.0 * (i as f64 + 0.5) / k as f64, 1.0 / k as f64))).unwrap();
        let p = params(120.0, 1);
        let (m_disc, s_disc) = (expected_error(&d, &p).unwrap(), error_second_moment(&d, &p).unwrap());
        let (m_cont, s_cont) = (expected_error(&uniform(), &p).unwrap(), error_second_moment(&uniform(), &p).unwrap());
        assert!((m_disc - m_cont).abs() < 5e-3, "{m_disc} vs {m_cont}");
        assert!((s_disc - s_cont).abs() < 5e-3, "{s_disc} vs {s_cont}");
    }

    #[test]
    fn sketch_sizing() {
        let m = min_sketch_rows(0.1, 0.2, 0.1, 2, 120.0).unwrap();
        let p = SketchParams::new(m as f64, 2, 120.0).unwrap();
        assert!(1.0 - error_cdf_gaussian(0.1, &p, 0.2) <= 0.1 + 1e-9);
        let smaller = SketchParams::new((m - 1) as f64, 2, 120.0).unwrap();
        assert!(1.0 - error_cdf_gaussian(0.1, &smaller, 0.2) > 0.1);

        // U-shape in h
        let rows: Vec<u64> = (1..=8).map(|h| min_sketch_rows(0.1, 0.2, 0.1, h, 120.0).unwrap()).collect();
        let low = rows.iter().enumerate().min_by_key(|(_, &r)| r).unwrap().0;
        assert!(rows[..=low].windows(2).all(|w| w[0] >= w[1]), "{rows:?}");
        assert!(rows[low..].windows(2).all(|w| w[0] <= w[1]), "{rows:?}");
        assert!(low > 0 && low < 7, "{rows:?}");

        assert_eq!(min_sketch_rows(0.1, 0.2, 1.0 - 1e-15, 1, 120.0).unwrap(), 1);
        assert!(min_sketch_rows(0.1, 0.0, 0.1, 1, 120.0).is_err());
        assert!(min_sketch_rows(0.1, 0.2, 1.0, 1, 120.0).is_err());
    }

    #[test]
    fn moments_and_z() {
        assert_eq!(zi_moments(1.0, 0.3, 0.2).unwrap(), (0.3, 0.2 * 0.2));
        assert_eq!(zi_moments(0.0, 0.3, 0.2).unwrap(), (0.0, 0.0));
        assert_eq!(zi_moments(0.5, 2.0, 0.0).unwrap(), (1.0, 1.0));
        assert!(zi_moments(1.5, 0.0, 0.0).is_err());

        let stats = [CoordStats { p: 1.0, mu: 0.0, sigma: 1.0 }; 2];
        assert_eq!(z_statistic(&[1.0, -2.0], 0.0, &stats).unwrap(), 0.0);
        let zero = [CoordStats { p: 0.0, mu: 0.0, sigma: 0.0 }];
        assert!(matches!(z_statistic(&[1.0], 0.0, &zero), Err(Error::ZeroVariance)));
        // a negative entry flips the sign of the mean
        let s = [CoordStats { p: 1.0, mu: 0.5, sigma: 1.0 }];
        assert_eq!(z_statistic(&[-2.0], 1.0, &s).unwrap(), 0.0);
    }
}
