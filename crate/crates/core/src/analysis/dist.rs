//! Value distributions for the error model and the data generator.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};

/// Distribution of the value of an active coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueDist {
    Uniform { a: f64, b: f64 },
    Gaussian { mu: f64, sigma: f64 },
    /// Finite support, values strictly ascending, `pmf` summing to one.
    Discrete { values: Vec<f64>, pmf: Vec<f64> },
}

impl ValueDist {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParams(format!("uniform needs finite a < b, got [{a}, {b}]")));
        }
        Ok(ValueDist::Uniform { a, b })
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidParams(format!("gaussian needs finite mu and sigma > 0, got ({mu}, {sigma})")));
        }
        Ok(ValueDist::Gaussian { mu, sigma })
    }

    /// Pairs may come in any order; equal values are merged.
    pub fn discrete(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(Error::InvalidParams("discrete distribution needs at least one value".into()));
        }
        if pairs.iter().any(|&(v, p)| !v.is_finite() || !(p >= 0.0)) {
            return Err(Error::InvalidParams("discrete values must be finite and masses non-negative".into()));
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut pmf: Vec<f64> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            if values.last() == Some(&v) {
                *pmf.last_mut().unwrap() += p;
            } else {
                values.push(v);
                pmf.push(p);
            }
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("pmf sums to {total}, not 1")));
        }
        Ok(ValueDist::Discrete { values, pmf })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            ValueDist::Uniform { a, b } => {
                if (*a..=*b).contains(&x) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            ValueDist::Gaussian { mu, sigma } => {
                let z = (x - mu) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            }
            ValueDist::Discrete { values, pmf } => {
                values.iter().position(|&v| v == x).map_or(0.0, |i| pmf[i])
            }
        }
    }

    /// `P[X ≤ x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.sf(x)
    }

    /// Survival `P[X > x]`, computed without cancellation in the tails.
    pub fn sf(&self, x: f64) -> f64 {
        match self {
            ValueDist::Uniform { a, b } => ((b - x) / (b - a)).clamp(0.0, 1.0),
            ValueDist::Gaussian { mu, sigma } => 0.5 * libm::erfc((x - mu) / (sigma * SQRT_2)),
            ValueDist::Discrete { values, pmf } => {
                let first_above = values.partition_point(|&v| v <= x);
                pmf[first_above..].iter().sum()
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ValueDist::Uniform { a, b } => 0.5 * (a + b),
            ValueDist::Gaussian { mu, .. } => *mu,
            ValueDist::Discrete { values, pmf } => values.iter().zip(pmf).map(|(v, p)| v * p).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            ValueDist::Uniform { a, b } => (b - a).powi(2) / 12.0,
            ValueDist::Gaussian { sigma, .. } => sigma * sigma,
            ValueDist::Discrete { values, pmf } => {
                let mean = self.mean();
                values.iter().zip(pmf).map(|(v, p)| p * (v - mean).powi(2)).sum()
            }
        }
    }

    /// Integration range: the support, or `μ ± 8σ` for a Gaussian.
    pub fn range(&self) -> (f64, f64) {
        match self {
            ValueDist::Uniform { a, b } => (*a, *b),
            ValueDist::Gaussian { mu, sigma } => (mu - 8.0 * sigma, mu + 8.0 * sigma),
            ValueDist::Discrete { values, .. } => (values[0], values[values.len() - 1]),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, ValueDist::Discrete { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ValueDist::Uniform { a, b } => Uniform::new(*a, *b).expect("validated bounds").sample(rng),
            ValueDist::Gaussian { mu, sigma } => Normal::new(*mu, *sigma).expect("validated sigma").sample(rng),
            ValueDist::Discrete { values, pmf } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(pmf) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                values[values.len() - 1]
            }
        }
    }
}

impl fmt::Display for ValueDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueDist::Uniform { a, b } => write!(f, "uniform:{a},{b}"),
            ValueDist::Gaussian { mu, sigma } => write!(f, "gaussian:{mu},{sigma}"),
            ValueDist::Discrete { values, pmf } => {
                write!(f, "discrete:")?;
                for (i, (v, p)) in values.iter().zip(pmf).enumerate() {
                    write!(f, "{}{v}={p}", if i > 0 { "," } else { "" })?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `gaussian:μ,σ`, `uniform:a,b` or `discrete:v=p,v=p,...`.
impl FromStr for ValueDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("bad distribution `{s}` (expected gaussian:mu,sigma | uniform:a,b | discrete:v=p,...)"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums = |args: &str| -> Result<Vec<f64>> {
            args.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect()
        };
        match kind {
            "gaussian" | "normal" => match nums(args)?.as_slice() {
                [mu, sigma] => ValueDist::gaussian(*mu, *sigma),
                _ => Err(bad()),
            },
            "uniform" => match nums(args)?.as_slice() {
                [a, b] => ValueDist::uniform(*a, *b),
                _ => Err(bad()),
            },
            "discrete" => {
                let pairs = args
                    .split(',')
                    .map(|pair| {
                        let (v, p) = pair.split_once('=').ok_or_else(bad)?;
                        Ok((v.trim().parse().map_err(|_| bad())?, p.trim().parse().map_err(|_| bad())?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                ValueDist::discrete(pairs)
            }
            _ => Err(bad()),
        }
    }
}
