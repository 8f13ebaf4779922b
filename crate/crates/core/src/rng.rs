//! Random streams and the deterministic parallel Monte Carlo reduction.
//!
//! Every path draws from its own ChaCha8 substream keyed by `(seed, path index)`.
//! Paths are grouped into fixed-size chunks by index, each chunk is reduced
//! sequentially, and chunk partials are merged along a fixed binary tree, so the
//! result is bit-identical for any number of worker threads.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const CHUNK: u64 = 4096;

/// Independent random stream for path `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform on (0, 1].
#[inline]
pub fn open_unit<R: RngExt + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Exponential holding time with the given rate, by inverse CDF.
#[inline]
pub fn exponential<R: RngExt + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -open_unit(rng).ln() / rate
}

/// Running mean and centred second moment (Welford / Chan merge).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Moments {
            n,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.n as f64 * w,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            mean: self.mean,
            stderr: (self.variance() / self.n as f64).sqrt(),
            n: self.n,
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl Estimate {
    /// Distance to `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.stderr
        }
    }
}

/// Evaluates `sample(path_index)` for every path and reduces the `K` outputs
/// into per-component moments. Deterministic under any thread count.
pub fn par_moments<const K: usize, F>(n_paths: u64, sample: F) -> [Moments; K]
where
    F: Fn(u64) -> [f64; K] + Sync,
{
    let v = par_moments_dyn(n_paths, K, |index, out| out.copy_from_slice(&sample(index)));
    std::array::from_fn(|k| v[k])
}

/// As [`par_moments`] with the number of outputs chosen at run time; `sample`
/// writes its `width` outputs into the provided slice.
pub fn par_moments_dyn<F>(n_paths: u64, width: usize, sample: F) -> Vec<Moments>
where
    F: Fn(u64, &mut [f64]) + Sync,
{
    let n_chunks = n_paths.div_ceil(CHUNK);
    let partials: Vec<Vec<Moments>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Moments::default(); width];
            let mut buf = vec![0.0; width];
            let end = ((c + 1) * CHUNK).min(n_paths);
            for index in c * CHUNK..end {
                sample(index, &mut buf);
                for (m, &x) in acc.iter_mut().zip(&buf) {
                    m.push(x);
                }
            }
            acc
        })
        .collect();
    tree_merge(&partials, width)
}

fn tree_merge(parts: &[Vec<Moments>], width: usize) -> Vec<Moments> {
    match parts.len() {
        0 => vec![Moments::default(); width],
        1 => parts[0].clone(),
        len => {
            let (left, right) = parts.split_at(len / 2);
            let (a, b) = (tree_merge(left, width), tree_merge(right, width));
            a.iter().zip(&b).map(|(x, y)| x.merge(y)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.01).collect();
        let mut m = Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((m.mean - mean).abs() < 1e-13);
        assert!((m.variance() - var).abs() < 1e-13);
    }

    #[test]
    fn merge_equals_sequential() {
        let mut a = Moments::default();
        let mut b = Moments::default();
        let mut all = Moments::default();
        for i in 0..500 {
            let x = (i as f64).sin();
            all.push(x);
            if i < 123 {
                a.push(x)
            } else {
                b.push(x)
            }
        }
        let m = a.merge(&b);
        assert_eq!(m.n, all.n);
        assert!((m.mean - all.mean).abs() < 1e-14);
        assert!((m.m2 - all.m2).abs() < 1e-11);
    }

    #[test]
    fn exponential_is_positive_and_has_right_mean() {
        let mut rng = substream(1, 0);
        let mut m = Moments::default();
        for _ in 0..200_000 {
            let x = exponential(&mut rng, 2.0);
            assert!(x >= 0.0 && x.is_finite());
            m.push(x);
        }
        assert!(m.estimate().z_score(0.5) < 4.0);
    }

    #[test]
    fn substreams_differ() {
        let a: f64 = substream(7, 0).random();
        let b: f64 = substream(7, 1).random();
        let c: f64 = substream(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
