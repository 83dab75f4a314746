//! Second-order photon counting statistics.
//!
//! g²(0) is the normally-ordered moment ratio ⟨n(n−1)⟩/⟨n⟩². Values below 1
//! are antibunched (non-classical), above 1 bunched; a beam of N identical
//! photons gives g²(0) = 1 − 1/N.
//!
//! The two-particle (HBT) correlator C₂(p₁,p₂) = P(p₁,p₂)/P(p₁)P(p₂) is
//! estimated by Monte Carlo under a minimal chaotic-source model: emission
//! points drawn from an isotropic Gaussian with per-axis width R, pair
//! amplitude given by the symmetrized plane-wave product. That model has the
//! closed form C₂(q) = 1 + exp(−q²R²), which serves as the oracle; the
//! half-maximum width q₁/₂·R = √(ln 2) encodes the source radius.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exec::run_blocks;
use crate::fock::PhotonDistribution;

/// Half-width of the coherent-boundary classification band.
pub const CLASSIFICATION_EPSILON: f64 = 1e-9;

/// Samples per RNG stream block in the Monte Carlo estimators.
const MC_BLOCK: usize = 8192;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("invalid photon number N = {0}; need N >= 1")]
    InvalidN(i64),
    #[error("distribution has zero mean photon number")]
    ZeroMean,
    #[error("unsupported source kind for this estimator: {0}")]
    UnsupportedSource(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, StatsError>;

/// Classification of a g² value against the coherent boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bunching {
    Antibunched,
    CoherentBoundary,
    Bunched,
}

/// A g²(0) value with its classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G2Result {
    pub value: f64,
    pub classification: Bunching,
}

impl G2Result {
    fn from_value(value: f64) -> Self {
        let classification = if value < 1.0 - CLASSIFICATION_EPSILON {
            Bunching::Antibunched
        } else if value > 1.0 + CLASSIFICATION_EPSILON {
            Bunching::Bunched
        } else {
            Bunching::CoherentBoundary
        };
        Self {
            value,
            classification,
        }
    }
}

/// Photon source models for the estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceModel {
    /// Beam of N photons with identical quantum numbers.
    Fock { n: u64 },
    /// Coherent (classical) source with the given mean photon number.
    Coherent { mean: f64 },
    /// Thermal (Bose–Einstein) source with the given mean photon number.
    Thermal { mean: f64 },
    /// Chaotic source: emission points Gaussian with per-axis width `radius`;
    /// `momentum_scale` sets the natural q range of a correlation scan.
    ChaoticGaussian { radius: f64, momentum_scale: f64 },
}

/// g²(0) = 1 − 1/N for a beam of N identical photons.
pub fn g2_fock(n: i64) -> Result<G2Result> {
    if n <= 0 {
        return Err(StatsError::InvalidN(n));
    }
    Ok(G2Result::from_value(1.0 - 1.0 / n as f64))
}

/// g²(0) = Σ n(n−1)P(n) / (Σ nP(n))² from a photon-number distribution.
pub fn g2_from_distribution(dist: &PhotonDistribution) -> Result<G2Result> {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (n, &p) in dist.probs().iter().enumerate() {
        let nf = n as f64;
        m1 += nf * p;
        m2 += nf * (nf - 1.0) * p;
    }
    if m1 <= 0.0 {
        return Err(StatsError::ZeroMean);
    }
    Ok(G2Result::from_value(m2 / (m1 * m1)))
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n_samples: usize,
}

/// Two standard normals by Box–Muller from one RNG.
fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

/// Monte Carlo estimate of C₂(p₁,p₂) for a coherent or chaotic-Gaussian
/// source. Deterministic for a given seed: sample i lives in RNG stream
/// i / MC_BLOCK and block results reduce in index order, so the value is
/// independent of the thread count.
pub fn hbt_c2(
    source: &SourceModel,
    p1: [f64; 3],
    p2: [f64; 3],
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    hbt_c2_streamed(source, p1, p2, n_samples, seed, 0)
}

/// [`hbt_c2`] with an explicit stream namespace, so scans can reuse one seed
/// across q points without correlating their samples.
pub fn hbt_c2_streamed(
    source: &SourceModel,
    p1: [f64; 3],
    p2: [f64; 3],
    n_samples: usize,
    seed: u64,
    stream_namespace: u32,
) -> Result<McEstimate> {
    if n_samples < 10_000 {
        return Err(StatsError::InvalidParameter(format!(
            "need at least 1e4 samples, got {n_samples}"
        )));
    }
    let radius = match source {
        SourceModel::ChaoticGaussian { radius, .. } => {
            if !(*radius > 0.0) {
                return Err(StatsError::InvalidParameter("radius must be > 0".into()));
            }
            Some(*radius)
        }
        SourceModel::Coherent { .. } => None,
        SourceModel::Fock { .. } => return Err(StatsError::UnsupportedSource("fock")),
        SourceModel::Thermal { .. } => return Err(StatsError::UnsupportedSource("thermal")),
    };
    let q = [p1[0] - p2[0], p1[1] - p2[1], p1[2] - p2[2]];

    let n_blocks = n_samples.div_ceil(MC_BLOCK);
    let sums = run_blocks(n_blocks, |block| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((stream_namespace as u64) << 32) | block as u64);
        let count = MC_BLOCK.min(n_samples - block * MC_BLOCK);
        let mut s = 0.0f64;
        let mut s2 = 0.0f64;
        match radius {
            // pair probability factorizes for a coherent source: every
            // sample contributes exactly 1 (zero-variance estimator)
            None => {
                s = count as f64;
            }
            Some(r) => {
                // Δx = x1 - x2 has per-axis std  r √2
                let sig = r * std::f64::consts::SQRT_2;
                for _ in 0..count {
                    let (d0, d1) = normal_pair(&mut rng);
                    let (d2, _) = normal_pair(&mut rng);
                    let phase = q[0] * d0 * sig + q[1] * d1 * sig + q[2] * d2 * sig;
                    let v = 1.0 + phase.cos();
                    s += v;
                    s2 += v * v;
                }
            }
        }
        (s, s2, count)
    });
    let (mut s, mut s2, mut n) = (0.0, 0.0, 0usize);
    for (bs, bs2, bc) in sums {
        s += bs;
        s2 += bs2;
        n += bc;
    }
    let mean = s / n as f64;
    let var = (s2 / n as f64 - mean * mean).max(0.0);
    Ok(McEstimate {
        value: mean,
        std_err: (var / (n as f64 - 1.0)).sqrt(),
        n_samples: n,
    })
}

/// C₂(q) scan along a fixed axis: returns (q, c2, mc_err) rows.
pub fn c2_scan(
    source: &SourceModel,
    q_values: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64, f64)>> {
    let mut rows = Vec::with_capacity(q_values.len());
    for (i, &q) in q_values.iter().enumerate() {
        let p1 = [q / 2.0, 0.0, 0.0];
        let p2 = [-q / 2.0, 0.0, 0.0];
        let est = hbt_c2_streamed(source, p1, p2, n_samples, seed, i as u32 + 1)?;
        rows.push((q, est.value, est.std_err));
    }
    Ok(rows)
}

/// Momentum half-width q₁/₂ with C₂(q₁/₂) = 1.5 under the chaotic-Gaussian
/// model, found by bisection on the analytic correlator.
pub fn c2_halfwidth(source: &SourceModel) -> Result<f64> {
    let r = match source {
        SourceModel::ChaoticGaussian { radius, .. } if *radius > 0.0 => *radius,
        SourceModel::ChaoticGaussian { .. } => {
            return Err(StatsError::InvalidParameter("radius must be > 0".into()))
        }
        SourceModel::Fock { .. } => return Err(StatsError::UnsupportedSource("fock")),
        SourceModel::Coherent { .. } => return Err(StatsError::UnsupportedSource("coherent")),
        SourceModel::Thermal { .. } => return Err(StatsError::UnsupportedSource("thermal")),
    };
    // e^{-q²R²} - 1/2 is strictly decreasing in q
    let f = |q: f64| (-q * q * r * r).exp() - 0.5;
    let mut lo = 0.0f64;
    let mut hi = 2.0 / r;
    debug_assert!(f(lo) > 0.0 && f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.max(1.0 / r) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sampled g²(0) for coherent (Poisson) and thermal (geometric) sources,
/// with a jackknife-over-blocks standard error. Fock beams return the exact
/// 1 − 1/N with zero error.
pub fn sample_g2(source: &SourceModel, n_samples: usize, seed: u64) -> Result<McEstimate> {
    if n_samples < 10_000 {
        return Err(StatsError::InvalidParameter(format!(
            "need at least 1e4 samples, got {n_samples}"
        )));
    }
    enum Kind {
        Poisson(f64),
        Geometric(f64),
    }
    let kind = match source {
        SourceModel::Coherent { mean } if *mean > 0.0 => Kind::Poisson(*mean),
        SourceModel::Thermal { mean } if *mean > 0.0 => Kind::Geometric(*mean),
        SourceModel::Coherent { .. } | SourceModel::Thermal { .. } => {
            return Err(StatsError::InvalidParameter("mean must be > 0".into()))
        }
        SourceModel::Fock { n } => {
            if *n == 0 {
                return Err(StatsError::InvalidN(0));
            }
            return Ok(McEstimate {
                value: 1.0 - 1.0 / *n as f64,
                std_err: 0.0,
                n_samples,
            });
        }
        SourceModel::ChaoticGaussian { .. } => {
            return Err(StatsError::UnsupportedSource("chaotic_gaussian"))
        }
    };

    let n_blocks = n_samples.div_ceil(MC_BLOCK);
    let blocks = run_blocks(n_blocks, |block| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block as u64);
        let count = MC_BLOCK.min(n_samples - block * MC_BLOCK);
        let mut s1 = 0.0f64; // Σ n
        let mut s2 = 0.0f64; // Σ n(n-1)
        for _ in 0..count {
            let n = match kind {
                Kind::Geometric(mean) => {
                    let r: f64 = mean / (1.0 + mean);
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    (u.ln() / r.ln()).floor()
                }
                Kind::Poisson(mean) => {
                    // Knuth's product method; fine at desk-scale means
                    let l = (-mean).exp();
                    let mut k = 0.0f64;
                    let mut p = 1.0f64;
                    loop {
                        p *= rng.gen::<f64>();
                        if p <= l {
                            break;
                        }
                        k += 1.0;
                    }
                    k
                }
            };
            s1 += n;
            s2 += n * (n - 1.0);
        }
        (s1, s2, count as f64)
    });

    let (tot1, tot2, totn) = blocks
        .iter()
        .fold((0.0, 0.0, 0.0), |(a, b, c), (s1, s2, n)| {
            (a + s1, b + s2, c + n)
        });
    if tot1 <= 0.0 {
        return Err(StatsError::ZeroMean);
    }
    let g2 = |s1: f64, s2: f64, n: f64| (s2 / n) / (s1 / n).powi(2);
    let full = g2(tot1, tot2, totn);
    // leave-one-block-out jackknife
    let nb = blocks.len() as f64;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for (s1, s2, n) in &blocks {
        let v = g2(tot1 - s1, tot2 - s2, totn - n);
        sum += v;
        sumsq += v * v;
    }
    let mean_j = sum / nb;
    let var_j = (nb - 1.0) / nb * (sumsq - nb * mean_j * mean_j).max(0.0);
    Ok(McEstimate {
        value: full,
        std_err: var_j.sqrt(),
        n_samples,
    })
}
