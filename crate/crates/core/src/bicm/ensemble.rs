use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LinkProbabilities;
use crate::error::{Error, Result};
use crate::rca::BinaryMatrix;

/// Largest `C·S` accepted by [`exact_ensemble_stats`].
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub statistic: String,
    pub samples: usize,
    pub mean: f64,
    /// Population standard deviation (divide by N).
    pub sd: f64,
    pub analytic_mean: Option<f64>,
}

/// `ln P(M | p) = Σ M ln p + (1 − M) ln(1 − p)`; `-inf` if `M` hits a
/// deterministic cell the wrong way.
pub fn matrix_log_probability(p: &LinkProbabilities, matrix: &BinaryMatrix) -> f64 {
    assert_eq!((p.rows(), p.cols()), (matrix.rows(), matrix.cols()), "dimensions");
    p.as_slice()
        .iter()
        .zip(matrix.as_slice())
        .map(|(&q, &m)| if m != 0 { q.ln() } else { (-q).ln_1p() })
        .sum()
}

fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws sample `index` into `out`. Each sample owns the ChaCha stream
/// `index` under `seed`, so it does not depend on any other sample.
pub fn fill_sample(p: &LinkProbabilities, seed: u64, index: u64, out: &mut BinaryMatrix) {
    assert_eq!((p.rows(), p.cols()), (out.rows(), out.cols()), "dimensions");
    let mut rng = sample_rng(seed, index);
    for (cell, &q) in out.as_mut_slice().iter_mut().zip(p.as_slice()) {
        // random() is in [0, 1): q = 0 never links, q = 1 always does
        let r: f64 = rng.random();
        *cell = (r < q) as u8;
    }
}

pub fn sample_one(p: &LinkProbabilities, seed: u64, index: u64) -> BinaryMatrix {
    let mut m = BinaryMatrix::zeros(p.rows(), p.cols());
    fill_sample(p, seed, index, &mut m);
    m
}

/// The first `n` ensemble samples under `seed`.
pub fn sample(p: &LinkProbabilities, n: usize, seed: u64) -> impl Iterator<Item = BinaryMatrix> + '_ {
    (0..n as u64).map(move |k| sample_one(p, seed, k))
}

/// Exact expectation of the co-specialization count under independent
/// links: `½ Σ_s [(Σ_c p_cs)² − Σ_c p_cs²]`.
pub fn analytic_motif_mean(p: &LinkProbabilities) -> f64 {
    (0..p.cols())
        .map(|s| {
            let (sum, sq) = (0..p.rows()).fold((0.0, 0.0), |(a, b), c| {
                let q = p.get(c, s);
                (a + q, b + q * q)
            });
            0.5 * (sum * sum - sq)
        })
        .sum()
}

/// Exact mean and population sd of `statistic` over all `2^(C·S)` matrices.
pub fn exact_ensemble_stats<F>(p: &LinkProbabilities, name: &str, statistic: F) -> Result<EnsembleStats>
where
    F: Fn(&BinaryMatrix) -> f64,
{
    let cells = p.rows() * p.cols();
    if cells > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            cells,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut m = BinaryMatrix::zeros(p.rows(), p.cols());
    let mut weighted = Vec::with_capacity(1 << cells);
    for mask in 0u64..(1u64 << cells) {
        for (i, cell) in m.as_mut_slice().iter_mut().enumerate() {
            *cell = ((mask >> i) & 1) as u8;
        }
        let w = matrix_log_probability(p, &m).exp();
        if w > 0.0 {
            weighted.push((w, statistic(&m)));
        }
    }
    let mean: f64 = weighted.iter().map(|(w, v)| w * v).sum();
    let var: f64 = weighted.iter().map(|(w, v)| w * (v - mean) * (v - mean)).sum();
    Ok(EnsembleStats {
        statistic: name.to_string(),
        samples: 1 << cells,
        mean,
        sd: var.max(0.0).sqrt(),
        analytic_mean: None,
    })
}

/// Sample mean and population sd of `statistic` over `n` draws.
pub fn sampled_stats<F>(p: &LinkProbabilities, n: usize, seed: u64, name: &str, statistic: F) -> Result<EnsembleStats>
where
    F: Fn(&BinaryMatrix) -> f64,
{
    if n < 2 {
        return Err(Error::TooFewSamples { required: 2, got: n });
    }
    let values: Vec<f64> = sample(p, n, seed).map(|m| statistic(&m)).collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    Ok(EnsembleStats {
        statistic: name.to_string(),
        samples: n,
        mean,
        sd: var.sqrt(),
        analytic_mean: None,
    })
}
