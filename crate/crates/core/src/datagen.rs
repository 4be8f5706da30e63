//! Synthetic sparse vectors: every coordinate is active independently with
//! probability `ψ/n`, and active values are drawn i.i.d. from a
//! [`ValueDist`].
//!
//! Vector `i` draws from its own ChaCha8 stream (`seed`, stream `i`), so any
//! range of vectors can be generated independently and the output does not
//! depend on how generation is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::analysis::ValueDist;
use crate::error::{Error, Result};
use crate::scan::segment;
use crate::vector::SparseVector;

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    /// Number of vectors; ext ids are `0..count`.
    pub count: u64,
    pub dims: u32,
    /// Expected number of active coordinates per vector.
    pub psi: f64,
    pub dist: ValueDist,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 || !(self.psi > 0.0) || self.psi > f64::from(self.dims) {
            return Err(Error::InvalidParams(format!(
                "need 0 < psi <= dims (psi={}, dims={})",
                self.psi, self.dims
            )));
        }
        Ok(())
    }

    /// Activation probability `ψ/n`.
    pub fn rate(&self) -> f64 {
        self.psi / f64::from(self.dims)
    }

    /// The `index`-th vector of the collection.
    pub fn vector(&self, index: u64) -> Result<SparseVector> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let gaps = Geometric::new(self.rate()).map_err(|e| Error::InvalidParams(e.to_string()))?;
        let mut coords = Vec::new();
        let mut values = Vec::new();
        // the gap to the next active coordinate is geometric
        let mut next = gaps.sample(&mut rng);
        while next < u64::from(self.dims) {
            coords.push(next as u32);
            values.push(loop {
                let v = self.dist.sample(&mut rng) as f32;
                if v != 0.0 && v.is_finite() {
                    break v;
                }
            });
            next = next.saturating_add(1).saturating_add(gaps.sample(&mut rng));
        }
        SparseVector::new(index, coords, values)
    }
}

/// All vectors of the collection, in ext-id order.
pub fn generate(spec: &GenSpec) -> Result<impl Iterator<Item = SparseVector> + '_> {
    spec.validate()?;
    Ok((0..spec.count).map(move |i| spec.vector(i).expect("validated spec")))
}

/// [`generate`] split over `threads` contiguous id ranges; identical output.
pub fn generate_parallel(spec: &GenSpec, threads: usize) -> Result<Vec<SparseVector>> {
    spec.validate()?;
    let threads = threads.max(1);
    let count = usize::try_from(spec.count).map_err(|_| Error::InvalidParams("count too large".into()))?;
    let parts: Vec<Result<Vec<SparseVector>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let (lo, hi) = segment(count, threads, t);
                scope.spawn(move || (lo..hi).map(|i| spec.vector(i as u64)).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("generator thread panicked")).collect()
    });
    let mut out = Vec::with_capacity(count);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(count: u64, dims: u32, psi: f64) -> GenSpec {
        GenSpec { count, dims, psi, dist: ValueDist::gaussian(0.0, 1.0).unwrap(), seed: 42 }
    }

    #[test]
    fn full_density() {
        for v in generate(&spec(20, 50, 50.0)).unwrap() {
            assert_eq!(v.coords(), (0..50).collect::<Vec<_>>().as_slice());
        }
    }

    #[test]
    fn deterministic_and_split_invariant() {
        let s = spec(500, 1000, 20.0);
        let a: Vec<_> = generate(&s).unwrap().collect();
        assert_eq!(a, generate(&s).unwrap().collect::<Vec<_>>());
        assert_eq!(a, generate_parallel(&s, 7).unwrap());
        assert_eq!(a[3].ext_id(), 3);
        let other = GenSpec { seed: 43, ..s };
        assert_ne!(a, generate(&other).unwrap().collect::<Vec<_>>());
    }

    #[test]
    fn activity_and_value_statistics() {
        let s = spec(100_000, 10_000, 100.0);
        let mut per_coord = vec![0u64; 10_000];
        let (mut total, mut sum, mut sum_sq) = (0u64, 0.0f64, 0.0f64);
        for v in generate_parallel(&s, 8).unwrap() {
            total += v.nnz() as u64;
            for (c, x) in v.iter() {
                per_coord[c as usize] += 1;
                sum += f64::from(x);
                sum_sq += f64::from(x) * f64::from(x);
            }
        }
        let mean_nnz = total as f64 / 1e5;
        assert!((mean_nnz - 100.0).abs() <= 1.0, "{mean_nnz}");
        for &c in &per_coord {
            assert!((c as f64 / 1e5 - 0.01).abs() <= 0.001 + 4.0 * (0.01 * 0.99 / 1e5f64).sqrt());
        }
        // chi-square uniformity of activity across coordinates, 9999 dof;
        // p = 0.001 lies near 9999 + 3.09·sqrt(2·9999)
        let expected = total as f64 / 10_000.0;
        let chi: f64 = per_coord.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi < 9999.0 + 3.09 * (2.0f64 * 9999.0).sqrt(), "{chi}");
        let n = total as f64;
        let mean = sum / n;
        let var = sum_sq / n - mean * mean;
        assert!(mean.abs() < 3.0 / n.sqrt());
        assert!((var - 1.0).abs() < 3.0 * (2.0 / n).sqrt());
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(spec(1, 10, 11.0).validate().is_err());
        assert!(spec(1, 10, 0.0).validate().is_err());
        assert!(spec(1, 0, 1.0).validate().is_err());
    }
}
