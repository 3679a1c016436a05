//! Haar-distributed orthogonal and unitary matrices, and Monte Carlo integrals.
//!
//! A standard Gaussian matrix is orthonormalized column by column (modified
//! Gram-Schmidt, applied twice). The implied `R` factor has a positive
//! diagonal, which makes `Q` exactly Haar distributed.
//!
//! Samples are drawn in fixed-size chunks; chunk `c` uses its own ChaCha stream
//! seeded with `seed + c`. Chunks run in parallel and are reduced in index
//! order, so results do not depend on the worker count.

use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::haar::Monomial;
use crate::matrix::Matrix;

/// Samples per independent random stream.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classical {
    Orthogonal,
    Unitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarSampler {
    pub group: Classical,
    pub n: usize,
    pub seed: u64,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: Complex64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    /// `|mean − target| ≤ k · stderr`.
    pub fn within(&self, target: Complex64, k: f64) -> bool {
        (self.mean - target).norm() <= k * self.stderr
    }
}

/// Running sums for the mean and variance of complex samples.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    pub sum: Complex64,
    pub sum_sq: f64,
    pub count: usize,
}

impl Moments {
    pub fn push(&mut self, x: Complex64) {
        self.sum += x;
        self.sum_sq += x.norm_sqr();
        self.count += 1;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.count += other.count;
    }

    pub fn estimate(&self) -> McEstimate {
        let n = self.count.max(1) as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq - n * mean.norm_sqr()) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        McEstimate {
            mean,
            stderr: (var / n).sqrt(),
            samples: self.count,
        }
    }
}

impl HaarSampler {
    pub fn new(group: Classical, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        Ok(HaarSampler { group, n, seed })
    }

    /// Parses `O:N` or `U:N`.
    pub fn from_id(id: &str, seed: u64) -> Result<Self> {
        let unknown = || Error::UnknownId {
            kind: "sampled group",
            given: id.to_string(),
            known: "O:<N>, U:<N>".into(),
        };
        let (name, n) = id.trim().split_once(':').ok_or_else(unknown)?;
        let group = match name {
            "O" => Classical::Orthogonal,
            "U" => Classical::Unitary,
            _ => return Err(unknown()),
        };
        let n = usize::from_str(n).map_err(|_| Error::Parse(format!("bad dimension in '{id}'")))?;
        HaarSampler::new(group, n, seed)
    }

    /// The random stream of chunk `chunk`.
    pub fn chunk_rng(&self, chunk: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(chunk as u64))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix<Complex64> {
        let n = self.n;
        let mut cols: Vec<Vec<Complex64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = match self.group {
                            Classical::Orthogonal => 0.0,
                            Classical::Unitary => rng.sample(StandardNormal),
                        };
                        Complex64::new(re, im)
                    })
                    .collect()
            })
            .collect();
        for j in 0..n {
            for _pass in 0..2 {
                for p in 0..j {
                    let (done, rest) = cols.split_at_mut(j);
                    let q = &done[p];
                    let proj: Complex64 = q.iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
                    for (x, a) in rest[0].iter_mut().zip(q) {
                        *x -= proj * a;
                    }
                }
            }
            let norm = cols[j].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            for x in &mut cols[j] {
                *x /= norm;
            }
        }
        Matrix::from_fn(n, n, |i, j| cols[j][i])
    }

    /// Runs `visit` on `samples` draws, chunk by chunk in parallel, and
    /// returns the per-chunk accumulators in chunk order.
    pub fn map_chunks<A, F>(&self, samples: usize, init: impl Fn() -> A + Sync, visit: F) -> Vec<A>
    where
        A: Send,
        F: Fn(&mut A, &mut ChaCha8Rng) + Sync,
    {
        let chunks = samples.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = self.chunk_rng(c);
                let mut acc = init();
                let count = CHUNK.min(samples - c * CHUNK);
                for _ in 0..count {
                    visit(&mut acc, &mut rng);
                }
                acc
            })
            .collect()
    }

    pub fn mc_integral(&self, m: &Monomial, samples: usize) -> Result<McEstimate> {
        Ok(self.mc_integrals(std::slice::from_ref(m), samples)?[0])
    }

    /// Several monomials evaluated on the same draws.
    pub fn mc_integrals(&self, ms: &[Monomial], samples: usize) -> Result<Vec<McEstimate>> {
        for m in ms {
            m.check_indices(self.n)?;
        }
        let chunks = self.map_chunks(
            samples,
            || vec![Moments::default(); ms.len()],
            |acc, rng| {
                let u = self.sample(rng);
                for (slot, m) in acc.iter_mut().zip(ms) {
                    slot.push(evaluate(&u, m));
                }
            },
        );
        let mut total = vec![Moments::default(); ms.len()];
        for chunk in &chunks {
            for (t, c) in total.iter_mut().zip(chunk) {
                t.merge(c);
            }
        }
        Ok(total.iter().map(Moments::estimate).collect())
    }
}

/// Value of a monomial at a concrete matrix.
pub fn evaluate(u: &Matrix<Complex64>, m: &Monomial) -> Complex64 {
    m.factors.iter().fold(Complex64::new(1.0, 0.0), |acc, f| {
        let x = *u.get(f.row - 1, f.col - 1);
        acc * if f.star { x.conj() } else { x }
    })
}

/// `max |(U*U − 1)_{ij}|`.
pub fn unitarity_residual(u: &Matrix<Complex64>) -> f64 {
    let n = u.rows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..u.cols() {
            let dot: Complex64 = (0..n).map(|k| u.get(k, i).conj() * u.get(k, j)).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}
