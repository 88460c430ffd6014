//! Chunked Monte Carlo means.
//!
//! Draws are split into fixed-size chunks, chunk `c` always reads from
//! substream `c`, and chunk summaries are merged in chunk order. The result is
//! therefore bit-identical whether chunks run sequentially or on a thread pool.

use rayon::prelude::*;

use crate::rng::{RngStream, SimRng};

/// Draws per chunk.
pub const CHUNK_SIZE: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy)]
struct Summary {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Summary {
    fn merge(self, other: Summary) -> Summary {
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Summary {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }
}

fn run_chunk<F>(stream: &RngStream, chunk: usize, len: usize, draw: &F) -> Summary
where
    F: Fn(&mut SimRng) -> f64,
{
    let mut rng = stream.substream(chunk as u64).rng();
    let mut buf = Vec::with_capacity(len);
    for _ in 0..len {
        buf.push(draw(&mut rng));
    }
    let mean = buf.iter().sum::<f64>() / len as f64;
    let m2 = buf.iter().map(|v| (v - mean) * (v - mean)).sum();
    Summary {
        n: len as f64,
        mean,
        m2,
    }
}

/// Mean of `n` draws of `draw`, chunked over substreams of `stream`.
pub fn chunked_mean<F>(n: usize, stream: RngStream, exec: Execution, draw: F) -> MeanEstimate
where
    F: Fn(&mut SimRng) -> f64 + Sync,
{
    if n == 0 {
        return MeanEstimate {
            mean: f64::NAN,
            std_error: f64::NAN,
            n: 0,
        };
    }
    let n_chunks = n.div_ceil(CHUNK_SIZE);
    let len_of = |c: usize| CHUNK_SIZE.min(n - c * CHUNK_SIZE);
    let summaries: Vec<Summary> = match exec {
        Execution::Sequential => (0..n_chunks)
            .map(|c| run_chunk(&stream, c, len_of(c), &draw))
            .collect(),
        Execution::Parallel => (0..n_chunks)
            .into_par_iter()
            .map(|c| run_chunk(&stream, c, len_of(c), &draw))
            .collect(),
    };
    let total = summaries.into_iter().fold(
        Summary {
            n: 0.0,
            mean: 0.0,
            m2: 0.0,
        },
        Summary::merge,
    );
    let var = if n > 1 { total.m2 / (n as f64 - 1.0) } else { 0.0 };
    MeanEstimate {
        mean: total.mean,
        std_error: (var / n as f64).sqrt(),
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn parallel_matches_sequential_bitwise() {
        let s = RngStream::new(11);
        let n = 3 * CHUNK_SIZE + 17;
        let f = |r: &mut SimRng| r.gen::<f64>().ln();
        let a = chunked_mean(n, s, Execution::Sequential, f);
        let b = chunked_mean(n, s, Execution::Parallel, f);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn uniform_mean() {
        let est = chunked_mean(200_000, RngStream::new(1), Execution::Parallel, |r| r.gen::<f64>());
        assert!((est.mean - 0.5).abs() < 4.0 * est.std_error);
        // var of U(0,1) is 1/12
        assert!((est.std_error - (1.0f64 / 12.0 / 200_000.0).sqrt()).abs() < 1e-5);
    }
}
