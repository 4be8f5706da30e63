//! Monte-Carlo simulation of single sketches, independent of any index.
//!
//! Each trial builds the sketch of one random vector with fresh mappings
//! and decodes it exactly (32-bit values, no 16-bit rounding). Trials are
//! seeded by `(seed, trial index)`, so results do not depend on the worker
//! count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::analysis::dist::ValueDist;
use crate::analysis::formulas::{error_mean_std, z_statistic, CoordStats, SketchParams};
use crate::error::{Error, Result};
use crate::scan::segment;
use crate::sinnamon::HashMappings;

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn rows_of(params: &SketchParams) -> Result<u32> {
    if params.m.fract() != 0.0 || params.m > f64::from(u32::MAX) {
        return Err(Error::InvalidParams(format!("simulation needs an integral m, got {}", params.m)));
    }
    Ok(params.m as u32)
}

fn poisson(mean: f64) -> Result<Option<Poisson<f64>>> {
    if mean <= 0.0 {
        return Ok(None);
    }
    Poisson::new(mean).map(Some).map_err(|e| Error::InvalidParams(e.to_string()))
}

fn draw_value<R: Rng>(dist: &ValueDist, rng: &mut R) -> f32 {
    loop {
        let v = dist.sample(rng) as f32;
        if v != 0.0 {
            return v;
        }
    }
}

/// Runs `trial(rng, index)` for `trials` trials over `workers` threads and
/// returns the outputs in trial order.
fn run_trials<T: Send>(
    trials: usize,
    seed: u64,
    workers: usize,
    trial: impl Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let workers = workers.clamp(1, trials.max(1));
    let parts: Vec<Result<Vec<T>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (lo, hi) = segment(trials, workers, w);
                let trial = &trial;
                scope.spawn(move || (lo..hi).map(|t| trial(&mut trial_rng(seed, t))).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("simulation worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(trials);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// Upper-bound decoding errors `X̄ − X` of one tracked coordinate whose
/// vector has `Poisson(Np)` other active coordinates.
pub fn simulate_upper_errors(
    dist: &ValueDist,
    params: &SketchParams,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<f64>> {
    let m = rows_of(params)?;
    let others = poisson(params.np)?;
    run_trials(trials, seed, workers, |rng| {
        let maps = HashMappings::new(params.h, m, rng.random());
        let target: u32 = rng.random();
        let x = draw_value(dist, rng);
        let rows = maps.rows(target);
        let mut upper = vec![x; rows.len()];
        let k = others.as_ref().map_or(0, |p| p.sample(rng) as u64);
        for _ in 0..k {
            let coord: u32 = rng.random();
            let v = draw_value(dist, rng);
            if coord == target {
                continue;
            }
            for o in 0..params.h {
                let r = maps.map(o, coord);
                for (slot, &tr) in upper.iter_mut().zip(&rows) {
                    if tr == r {
                        *slot = slot.max(v);
                    }
                }
            }
        }
        let decoded = upper.into_iter().fold(f32::INFINITY, f32::min);
        Ok(f64::from(decoded) - f64::from(x))
    })
}

/// Setup of the inner-product error simulation.
#[derive(Debug, Clone)]
pub struct ZSimSpec {
    pub dist: ValueDist,
    pub params: SketchParams,
    /// Active query coordinates, all of them active in the document.
    pub psi_q: usize,
    pub query_dist: ValueDist,
    pub trials: usize,
    pub seed: u64,
    pub workers: usize,
}

/// Standardized inner-product errors `Z`: each trial sketches a document
/// containing every query coordinate plus `Poisson(Np − ψ_q + 1)` others,
/// decodes the query coordinates by the sign of the query entry and
/// standardizes `⟨q, X̃ − X⟩` with the model moments.
pub fn simulate_z(spec: &ZSimSpec) -> Result<Vec<f64>> {
    let m = rows_of(&spec.params)?;
    let (mu, sigma) = error_mean_std(&spec.dist, &spec.params)?;
    let stats = vec![CoordStats { p: 1.0, mu, sigma }; spec.psi_q];
    let others = poisson(spec.params.np - spec.psi_q as f64 + 1.0)?;
    let h = spec.params.h;
    run_trials(spec.trials, spec.seed, spec.workers, |rng| {
        let maps = HashMappings::new(h, m, rng.random());
        let mut upper = vec![f32::NEG_INFINITY; m as usize];
        let mut lower = vec![f32::INFINITY; m as usize];
        let mut add = |coord: u32, v: f32| {
            for o in 0..h {
                let r = maps.map(o, coord) as usize;
                upper[r] = upper[r].max(v);
                lower[r] = lower[r].min(v);
            }
        };
        let mut coords: Vec<u32> = Vec::with_capacity(spec.psi_q);
        while coords.len() < spec.psi_q {
            let c: u32 = rng.random();
            if !coords.contains(&c) {
                coords.push(c);
            }
        }
        let doc: Vec<f32> = coords.iter().map(|_| draw_value(&spec.dist, rng)).collect();
        let q: Vec<f64> = coords.iter().map(|_| f64::from(draw_value(&spec.query_dist, rng))).collect();
        for (&c, &x) in coords.iter().zip(&doc) {
            add(c, x);
        }
        let k = others.as_ref().map_or(0, |p| p.sample(rng) as u64);
        for _ in 0..k {
            let c: u32 = rng.random();
            let v = draw_value(&spec.dist, rng);
            if !coords.contains(&c) {
                add(c, v);
            }
        }
        let mut error = 0.0;
        for ((&c, &x), &qi) in coords.iter().zip(&doc).zip(&q) {
            let rows = maps.rows(c).into_iter().map(|r| r as usize);
            let decoded = if qi > 0.0 {
                rows.map(|r| upper[r]).fold(f32::INFINITY, f32::min)
            } else {
                rows.map(|r| lower[r]).fold(f32::NEG_INFINITY, f32::max)
            };
            error += qi * (f64::from(decoded) - f64::from(x));
        }
        z_statistic(&q, error, &stats)
    })
}

/// Sample mean and (unbiased) standard deviation.
pub fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Fraction of samples strictly above `threshold`.
pub fn fraction_above(samples: &[f64], threshold: f64) -> f64 {
    samples.iter().filter(|&&x| x > threshold).count() as f64 / samples.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::formulas::{error_cdf, expected_error, prob_overestimate};

    #[test]
    fn deterministic_across_worker_counts() {
        let d = ValueDist::uniform(-1.0, 1.0).unwrap();
        let p = SketchParams::new(60.0, 2, 120.0).unwrap();
        let a = simulate_upper_errors(&d, &p, 500, 9, 1).unwrap();
        let b = simulate_upper_errors(&d, &p, 500, 9, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn simulation_tracks_the_model() {
        let d = ValueDist::gaussian(0.0, 0.1).unwrap();
        let p = SketchParams::new(60.0, 1, 120.0).unwrap();
        let errs = simulate_upper_errors(&d, &p, 20_000, 1, 4).unwrap();
        assert!((fraction_above(&errs, 0.0) - prob_overestimate(&d, &p).unwrap()).abs() < 0.02);
        for delta in [0.05, 0.1, 0.2] {
            let sim = 1.0 - fraction_above(&errs, delta);
            assert!((sim - error_cdf(&d, &p, delta).unwrap()).abs() < 0.02, "delta {delta}");
        }
        assert!((mean_std(&errs).0 - expected_error(&d, &p).unwrap()).abs() < 0.01);
    }

    #[test]
    fn rejects_fractional_rows() {
        let d = ValueDist::uniform(-1.0, 1.0).unwrap();
        let p = SketchParams::new(60.5, 1, 120.0).unwrap();
        assert!(simulate_upper_errors(&d, &p, 10, 0, 1).is_err());
    }
}
