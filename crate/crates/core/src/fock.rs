//! Truncated single-mode Fock-space engine.
//!
//! Implements displacement operators on a truncated number basis, displaced
//! number states and their photon distributions, and direct time integration
//! of a mode driven by a classical current,
//!
//! ```text
//! H_I(t) = -f(t) (a e^{-iωt} + a† e^{+iωt}) .
//! ```
//!
//! The exact solution of the driven evolution is a displacement times a
//! c-number phase: |ψ(t₁)⟩ = e^{iφ} D(z) |ψ(t₀)⟩ with D(z) = exp(z a† − z̄ a).
//! The displacement accumulated by the drive is
//!
//! ```text
//! z = i · conj(f̃(ω)),    f̃(ω) = ∫ dt f(t) e^{-iωt} ,
//! ```
//!
//! which reduces to z = i f̃(ω) for drives with a real Fourier amplitude.
//! This sign convention is frozen by the closed-form fidelity tests.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::exec::run_blocks;
use crate::quad::trapezoid;

/// Truncation adequacy guard: `displacement_matrix` requires |z|² ≤ dim/4.
pub const TRUNCATION_GUARD_FACTOR: f64 = 0.25;

/// Default ceiling on the reported truncation deficit of a distribution.
pub const DEFAULT_DEFICIT_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("truncation too small: {detail}")]
    TruncationTooSmall { detail: String },
    #[error("integration step too large: norm drifted by {drift:.3e} (tolerance {tol:.1e})")]
    StepTooLarge { drift: f64, tol: f64 },
    #[error("insufficient support: |f| at window edge is {edge_fraction:.3e} of max|f|")]
    InsufficientSupport { edge_fraction: f64 },
    #[error("invalid drive: {0}")]
    InvalidDrive(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, FockError>;

// ---------------------------------------------------------------------------
// domain types
// ---------------------------------------------------------------------------

/// State of the mode on the truncated number basis |0⟩ … |dim-1⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<C64>,
}

impl FockVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(FockError::InvalidState("dimension must be >= 1".into()));
        }
        Ok(Self { amps })
    }

    /// Number eigenstate |m⟩ on a basis of `dim` levels.
    pub fn number_state(m: usize, dim: usize) -> Result<Self> {
        if m >= dim {
            return Err(FockError::InvalidState(format!(
                "level {m} outside truncated basis of dim {dim}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[m] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// ⟨a⟩ = Σ √(n+1) c̄ₙ c_{n+1}.
    pub fn expectation_annihilation(&self) -> C64 {
        self.amps
            .windows(2)
            .enumerate()
            .map(|(n, w)| w[0].conj() * w[1] * ((n + 1) as f64).sqrt())
            .sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }

    /// Pointwise |cₙ|² as a distribution (no truncation check).
    pub fn photon_distribution(&self) -> PhotonDistribution {
        let probs: Vec<f64> = self.amps.iter().map(|c| c.norm_sqr()).collect();
        PhotonDistribution::from_probs(probs)
    }
}

/// Photon-number distribution P(n), n = 0..=n_max.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
    mean: f64,
}

impl PhotonDistribution {
    pub fn from_probs(probs: Vec<f64>) -> Self {
        assert!(!probs.is_empty(), "distribution needs at least one entry");
        let mean = probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        Self { probs, mean }
    }

    /// Poisson with the given mean (coherent-state statistics), truncated.
    pub fn poisson(mean: f64, n_max: usize) -> Self {
        assert!(mean >= 0.0);
        let probs = (0..=n_max)
            .map(|n| {
                if mean == 0.0 {
                    return if n == 0 { 1.0 } else { 0.0 };
                }
                (n as f64 * mean.ln() - mean - ln_gamma(n as f64 + 1.0)).exp()
            })
            .collect();
        Self::from_probs(probs)
    }

    /// Bose–Einstein (geometric) with the given mean, truncated.
    pub fn thermal(mean: f64, n_max: usize) -> Self {
        assert!(mean > 0.0);
        let r = mean / (1.0 + mean);
        let probs = (0..=n_max)
            .map(|n| (n as f64 * r.ln() - (1.0 + mean).ln()).exp())
            .collect();
        Self::from_probs(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    /// 1 − ΣP(n): probability mass lost to truncation.
    pub fn deficit(&self) -> f64 {
        1.0 - self.probs.iter().sum::<f64>()
    }
}

/// Classical current samples (t, f(t)) plus the mode frequency ω.
#[derive(Debug, Clone)]
pub struct DriveSignal {
    samples: Vec<(f64, f64)>,
    omega: f64,
}

impl DriveSignal {
    pub fn new(samples: Vec<(f64, f64)>, omega: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(FockError::InvalidDrive("need at least two samples".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(FockError::InvalidDrive(
                "sample times must be strictly increasing".into(),
            ));
        }
        if samples.iter().any(|(t, f)| !t.is_finite() || !f.is_finite()) {
            return Err(FockError::InvalidDrive("non-finite sample".into()));
        }
        Ok(Self { samples, omega })
    }

    /// Uniform sampling of `f` on [t_start, t_end] with `n` points.
    pub fn from_fn(
        f: impl Fn(f64) -> f64,
        omega: f64,
        t_start: f64,
        t_end: f64,
        n: usize,
    ) -> Result<Self> {
        if n < 2 || t_end <= t_start {
            return Err(FockError::InvalidDrive("bad sampling window".into()));
        }
        let dt = (t_end - t_start) / (n - 1) as f64;
        let samples = (0..n)
            .map(|i| {
                let t = t_start + i as f64 * dt;
                (t, f(t))
            })
            .collect();
        Self::new(samples, omega)
    }

    /// Gaussian pulse A·exp(−t²/2τ²) sampled on [t_start, t_end].
    pub fn gaussian(
        amplitude: f64,
        tau: f64,
        omega: f64,
        t_start: f64,
        t_end: f64,
        n: usize,
    ) -> Result<Self> {
        Self::from_fn(
            |t| amplitude * (-t * t / (2.0 * tau * tau)).exp(),
            omega,
            t_start,
            t_end,
            n,
        )
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn t_start(&self) -> f64 {
        self.samples[0].0
    }

    pub fn t_end(&self) -> f64 {
        self.samples[self.samples.len() - 1].0
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, &(_, f)| m.max(f.abs()))
    }

    /// f(t) by cubic Hermite interpolation (Catmull–Rom slopes); zero outside
    /// the sampled window.
    pub fn value(&self, t: f64) -> f64 {
        let s = &self.samples;
        if t < s[0].0 || t > s[s.len() - 1].0 {
            return 0.0;
        }
        // index of the interval containing t
        let i = match s.binary_search_by(|&(ti, _)| ti.partial_cmp(&t).unwrap()) {
            Ok(i) => return s[i].1,
            Err(i) => i - 1,
        };
        let (t0, y0) = s[i];
        let (t1, y1) = s[i + 1];
        let h = t1 - t0;
        let slope = |j: usize| -> f64 {
            if j == 0 {
                (s[1].1 - s[0].1) / (s[1].0 - s[0].0)
            } else if j == s.len() - 1 {
                (s[j].1 - s[j - 1].1) / (s[j].0 - s[j - 1].0)
            } else {
                (s[j + 1].1 - s[j - 1].1) / (s[j + 1].0 - s[j - 1].0)
            }
        };
        let (m0, m1) = (slope(i), slope(i + 1));
        let u = (t - t0) / h;
        let (u2, u3) = (u * u, u * u * u);
        y0 * (2.0 * u3 - 3.0 * u2 + 1.0)
            + m0 * h * (u3 - 2.0 * u2 + u)
            + y1 * (-2.0 * u3 + 3.0 * u2)
            + m1 * h * (u3 - u2)
    }

    /// Gabor-style bandwidth timescale √(2∫f² / ∫f'²); `None` for a drive
    /// with no variation.
    pub fn bandwidth_timescale(&self) -> Option<f64> {
        let f2: f64 = trapezoid(
            &self
                .samples
                .iter()
                .map(|&(t, f)| (t, f * f))
                .collect::<Vec<_>>(),
        );
        let df2: f64 = trapezoid(
            &self
                .samples
                .windows(2)
                .map(|w| {
                    let d = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                    (0.5 * (w[0].0 + w[1].0), d * d)
                })
                .collect::<Vec<_>>(),
        );
        if df2 <= 0.0 || f2 <= 0.0 {
            None
        } else {
            Some((2.0 * f2 / df2).sqrt())
        }
    }
}

/// A displacement parameter z together with the accumulated c-number phase φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub z: C64,
    pub phase: f64,
}

impl Displacement {
    pub fn new(z: C64, phase: f64) -> Result<Self> {
        if !z.re.is_finite() || !z.im.is_finite() || !phase.is_finite() {
            return Err(FockError::InvalidState("non-finite displacement".into()));
        }
        Ok(Self {
            z,
            phase: phase.rem_euclid(2.0 * std::f64::consts::PI),
        })
    }
}

// ---------------------------------------------------------------------------
// displacement operator
// ---------------------------------------------------------------------------

/// D(z) = exp(z a† − z̄ a) on the truncated basis, as the unitary exponential
/// of the truncated generator (Hermitian eigendecomposition route).
///
/// Column m holds the coefficients of |z; m⟩ = D(z)|m⟩; the matrix is unitary
/// to rounding for any z, and matches the untruncated amplitudes wherever the
/// displaced states fit well inside the basis.
pub fn displacement_matrix(z: C64, dim: usize) -> Result<DMatrix<C64>> {
    if dim == 0 {
        return Err(FockError::InvalidState("dim must be >= 1".into()));
    }
    let z2 = z.norm_sqr();
    if z2 > TRUNCATION_GUARD_FACTOR * dim as f64 {
        return Err(FockError::TruncationTooSmall {
            detail: format!(
                "|z|^2 = {:.3} exceeds dim/4 = {:.3}; raise dim to at least {}",
                z2,
                TRUNCATION_GUARD_FACTOR * dim as f64,
                (4.0 * z2).ceil() as usize + 1
            ),
        });
    }
    // H = -i (z a† - z̄ a) is Hermitian tridiagonal; D = exp(iH)
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for n in 0..dim.saturating_sub(1) {
        let s = ((n + 1) as f64).sqrt();
        let lower = C64::new(0.0, -1.0) * z * s;
        h[(n + 1, n)] = lower;
        h[(n, n + 1)] = lower.conj();
    }
    let eig = nalgebra::SymmetricEigen::new(h);
    let phases: Vec<C64> = eig
        .eigenvalues
        .iter()
        .map(|&l| C64::new(0.0, l).exp())
        .collect();
    // VP = V diag(e^{iλ}) ; column m of D is VP · conj(V[m, :])ᵀ
    let v = &eig.eigenvectors;
    let mut vp = v.clone();
    for (j, p) in phases.iter().enumerate() {
        for n in 0..dim {
            vp[(n, j)] *= *p;
        }
    }
    let cols = run_blocks(dim, |m| {
        let vm: DVector<C64> = DVector::from_iterator(dim, (0..dim).map(|j| v[(m, j)].conj()));
        &vp * vm
    });
    let mut d = DMatrix::<C64>::zeros(dim, dim);
    for (m, col) in cols.into_iter().enumerate() {
        d.set_column(m, &col);
    }
    Ok(d)
}

/// Apply a dense operator to a state.
pub fn apply_matrix(mat: &DMatrix<C64>, psi: &FockVector) -> Result<FockVector> {
    if mat.ncols() != psi.dim() {
        return Err(FockError::InvalidState(format!(
            "operator dim {} does not match state dim {}",
            mat.ncols(),
            psi.dim()
        )));
    }
    let v = DVector::from_column_slice(psi.amps());
    let out = mat * v;
    FockVector::new(out.iter().copied().collect())
}

// ---------------------------------------------------------------------------
// displaced-number-state distribution (associated-Laguerre closed form)
// ---------------------------------------------------------------------------

/// Generalized Laguerre L_k^{(α)}(x) with an explicit power-of-ten scale to
/// avoid overflow: returns (mantissa, ln_scale) with L = mantissa·e^{ln_scale}.
fn laguerre_scaled(k: usize, alpha: f64, x: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0f64;
    let mut cur = 1.0 + alpha - x;
    let mut ln_scale = 0.0f64;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        let mag = cur.abs().max(prev.abs());
        if mag > 1e250 {
            cur *= 1e-250;
            prev *= 1e-250;
            ln_scale += 250.0 * std::f64::consts::LN_10;
        }
    }
    (cur, ln_scale)
}

/// P(n) = |⟨n|D(z)|m⟩|² via the associated-Laguerre closed form, evaluated in
/// log space. Finite for all valid inputs; exact zeros are returned as 0.
pub fn displaced_number_pn(z: C64, m: usize, n: usize) -> f64 {
    let x = z.norm_sqr();
    if x == 0.0 {
        return if m == n { 1.0 } else { 0.0 };
    }
    let (mu, nu) = (m.min(n), m.max(n));
    let alpha = (nu - mu) as f64;
    let (lag, ln_scale) = laguerre_scaled(mu, alpha, x);
    if lag == 0.0 {
        return 0.0;
    }
    let ln_p = ln_gamma(mu as f64 + 1.0) - ln_gamma(nu as f64 + 1.0) + alpha * x.ln() - x
        + 2.0 * (lag.abs().ln() + ln_scale);
    ln_p.exp()
}

/// Photon distribution of the displaced number state D(z)|m⟩ up to `n_max`.
pub fn distribution(z: C64, m: usize, n_max: usize) -> Result<PhotonDistribution> {
    distribution_with_tol(z, m, n_max, DEFAULT_DEFICIT_TOL)
}

/// As [`distribution`], with an explicit ceiling on the truncation deficit.
pub fn distribution_with_tol(
    z: C64,
    m: usize,
    n_max: usize,
    deficit_tol: f64,
) -> Result<PhotonDistribution> {
    const CHUNK: usize = 64;
    let n_chunks = n_max / CHUNK + 1;
    let chunks = run_blocks(n_chunks, |c| {
        let lo = c * CHUNK;
        let hi = ((c + 1) * CHUNK - 1).min(n_max);
        (lo..=hi)
            .map(|n| displaced_number_pn(z, m, n))
            .collect::<Vec<_>>()
    });
    let probs: Vec<f64> = chunks.into_iter().flatten().collect();
    let dist = PhotonDistribution::from_probs(probs);
    let deficit = dist.deficit();
    if deficit > deficit_tol {
        return Err(FockError::TruncationTooSmall {
            detail: format!(
                "deficit {deficit:.3e} exceeds tolerance {deficit_tol:.1e} at n_max = {n_max}"
            ),
        });
    }
    Ok(dist)
}

/// Σ_m |⟨n|D(z)|m⟩|² over the truncated basis; unitarity makes this 1 for
/// every row n well inside the truncation.
pub fn column_sum_check(z: C64, dim: usize, n: usize) -> Result<f64> {
    if n >= dim {
        return Err(FockError::InvalidState(format!(
            "row {n} outside basis of dim {dim}"
        )));
    }
    let d = displacement_matrix(z, dim)?;
    Ok((0..dim).map(|m| d[(n, m)].norm_sqr()).sum())
}

/// Local extrema of P restricted to the window n ∈ [lo, hi], counting both
/// window endpoints; equivalently, one more than the number of maximal
/// monotone runs minus ... i.e. interior slope sign changes + 2.
pub fn window_extrema_count(probs: &[f64], lo: usize, hi: usize) -> usize {
    assert!(lo < hi && hi < probs.len());
    let mut count = 2; // both window endpoints
    let mut last_sign = 0i8;
    for n in lo..hi {
        let d = probs[n + 1] - probs[n];
        let sign = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                count += 1;
            }
            last_sign = sign;
        }
    }
    count
}

// ---------------------------------------------------------------------------
// Fourier amplitude of the drive
// ---------------------------------------------------------------------------

/// Options for [`fourier_amplitude_with`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Largest tolerated |f(edge)| / max|f|. Set to 1.0 for windows that are
    /// whole periods of a periodic drive.
    pub max_edge_fraction: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            max_edge_fraction: 1e-6,
        }
    }
}

/// f̃(ω) = ∫ dt f(t) e^{-iωt} by composite trapezoid over the samples.
///
/// The trapezoid rule is spectrally accurate here because the support guard
/// ensures the integrand decays at the window edges.
pub fn fourier_amplitude(drive: &DriveSignal) -> Result<C64> {
    fourier_amplitude_with(drive, QuadratureOptions::default())
}

/// As [`fourier_amplitude`], with an explicit edge-support policy.
pub fn fourier_amplitude_with(drive: &DriveSignal, opts: QuadratureOptions) -> Result<C64> {
    let fmax = drive.max_abs();
    if fmax == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let s = drive.samples();
    let edge = s[0].1.abs().max(s[s.len() - 1].1.abs()) / fmax;
    if edge > opts.max_edge_fraction {
        return Err(FockError::InsufficientSupport {
            edge_fraction: edge,
        });
    }
    let omega = drive.omega();
    let mut re = Vec::with_capacity(s.len());
    let mut im = Vec::with_capacity(s.len());
    for &(t, f) in s {
        re.push((t, f * (omega * t).cos()));
        im.push((t, -f * (omega * t).sin()));
    }
    Ok(C64::new(trapezoid(&re), trapezoid(&im)))
}

// ---------------------------------------------------------------------------
// driven evolution
// ---------------------------------------------------------------------------

/// Options for [`propagate_driven_with`] and [`timeordering_phase_with`].
#[derive(Debug, Clone, Copy)]
pub struct PropagateOptions {
    /// Upper bound on the RK4 step; `None` uses min(2π/ω, τ_drive)/50 with a
    /// stability cap from the drive strength and basis size.
    pub max_step: Option<f64>,
    /// Tolerated population in the top 10% of the basis.
    pub leak_tol: f64,
    /// Tolerated drift of the state norm (not renormalized — a diagnostic).
    pub norm_tol: f64,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            max_step: None,
            leak_tol: 1e-9,
            norm_tol: 1e-6,
        }
    }
}

fn default_step(drive: &DriveSignal, span: f64, dim: Option<usize>) -> f64 {
    let omega = drive.omega().abs();
    let mut h = span / 100.0;
    if omega > 0.0 {
        h = h.min(2.0 * std::f64::consts::PI / omega / 50.0);
    }
    if let Some(tb) = drive.bandwidth_timescale() {
        h = h.min(tb / 50.0);
    }
    if let Some(dim) = dim {
        // keep h‖H‖ well inside the RK4 stability interval
        let hnorm = 2.0 * drive.max_abs() * (dim as f64).sqrt() + omega;
        h = h.min(0.25 / (1.0 + hnorm));
    }
    h
}

/// i d|ψ⟩/dt = H_I(t)|ψ⟩ with H_I = −f(t)(a e^{−iωt} + a† e^{+iωt}),
/// integrated by fixed-step RK4 from t0 to t1.
pub fn propagate_driven(
    psi0: &FockVector,
    drive: &DriveSignal,
    t0: f64,
    t1: f64,
) -> Result<FockVector> {
    propagate_driven_with(psi0, drive, t0, t1, PropagateOptions::default())
}

/// [`propagate_driven`] with explicit step and tolerance control.
pub fn propagate_driven_with(
    psi0: &FockVector,
    drive: &DriveSignal,
    t0: f64,
    t1: f64,
    opts: PropagateOptions,
) -> Result<FockVector> {
    if t1 <= t0 {
        return Err(FockError::InvalidState("need t1 > t0".into()));
    }
    if (psi0.norm() - 1.0).abs() > 1e-8 {
        return Err(FockError::InvalidState("psi0 is not normalized".into()));
    }
    let dim = psi0.dim();
    let span = t1 - t0;
    let mut h = default_step(drive, span, Some(dim));
    if let Some(hm) = opts.max_step {
        h = h.min(hm);
    }
    let n_steps = (span / h).ceil() as usize;
    let h = span / n_steps as f64;
    let omega = drive.omega();
    let sqrt_n: Vec<f64> = (0..dim).map(|n| (n as f64).sqrt()).collect();

    // dψ/dt = -i H ψ = i f(t) (e^{-iωt} a + e^{+iωt} a†) ψ
    let rhs = |t: f64, psi: &[C64], out: &mut [C64]| {
        let f = drive.value(t);
        let phase = C64::new(0.0, 1.0) * f;
        let em = C64::from_polar(1.0, -omega * t);
        let ep = em.conj();
        for n in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            if n + 1 < dim {
                acc += em * sqrt_n[n + 1] * psi[n + 1];
            }
            if n > 0 {
                acc += ep * sqrt_n[n] * psi[n - 1];
            }
            out[n] = phase * acc;
        }
    };

    let zero = C64::new(0.0, 0.0);
    let mut psi: Vec<C64> = psi0.amps().to_vec();
    let mut k1 = vec![zero; dim];
    let mut k2 = vec![zero; dim];
    let mut k3 = vec![zero; dim];
    let mut k4 = vec![zero; dim];
    let mut tmp = vec![zero; dim];

    let leak_floor = (9 * dim).div_ceil(10);
    let check_leak = |psi: &[C64]| -> Result<()> {
        let leak: f64 = psi[leak_floor..].iter().map(|c| c.norm_sqr()).sum();
        if leak > opts.leak_tol {
            return Err(FockError::TruncationTooSmall {
                detail: format!(
                    "population {leak:.3e} in the top 10% of the basis (tolerance {:.1e})",
                    opts.leak_tol
                ),
            });
        }
        Ok(())
    };

    let mut t = t0;
    for step in 0..n_steps {
        rhs(t, &psi, &mut k1);
        for n in 0..dim {
            tmp[n] = psi[n] + 0.5 * h * k1[n];
        }
        rhs(t + 0.5 * h, &tmp, &mut k2);
        for n in 0..dim {
            tmp[n] = psi[n] + 0.5 * h * k2[n];
        }
        rhs(t + 0.5 * h, &tmp, &mut k3);
        for n in 0..dim {
            tmp[n] = psi[n] + h * k3[n];
        }
        rhs(t + h, &tmp, &mut k4);
        for n in 0..dim {
            psi[n] += h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
        }
        t = t0 + (step + 1) as f64 * h;
        if step % 1024 == 1023 {
            check_leak(&psi)?;
        }
    }
    check_leak(&psi)?;
    let out = FockVector::new(psi)?;
    let drift = (out.norm() - 1.0).abs();
    if drift > opts.norm_tol {
        return Err(FockError::StepTooLarge {
            drift,
            tol: opts.norm_tol,
        });
    }
    Ok(out)
}

/// The c-number phase of the time-ordered solution,
/// φ(t1) = ∫_{t0}^{t1} dt' f(t') Im[F(t') e^{iωt'}] with
/// F(t) = ∫_{t0}^{t} ds f(s) e^{-iωs} — the commutator double quadrature
/// reduced to a progressive integral, advanced by RK4.
pub fn timeordering_phase(drive: &DriveSignal, t0: f64, t1: f64) -> Result<f64> {
    timeordering_phase_with(drive, t0, t1, PropagateOptions::default())
}

/// [`timeordering_phase`] with explicit step control.
pub fn timeordering_phase_with(
    drive: &DriveSignal,
    t0: f64,
    t1: f64,
    opts: PropagateOptions,
) -> Result<f64> {
    let (_, phi) = drive_quadratures(drive, t0, t1, opts.max_step)?;
    Ok(phi)
}

/// Displacement accumulated by the drive on [t0, t1]:
/// z(t1) = i · conj(∫_{t0}^{t1} f(s) e^{-iωs} ds).
pub fn accumulated_displacement(drive: &DriveSignal, t0: f64, t1: f64) -> Result<C64> {
    let (f_accum, _) = drive_quadratures(drive, t0, t1, None)?;
    Ok(C64::new(0.0, 1.0) * f_accum.conj())
}

/// Joint RK4 quadrature of F(t) = ∫ f e^{-iωs} ds and the phase φ.
fn drive_quadratures(
    drive: &DriveSignal,
    t0: f64,
    t1: f64,
    max_step: Option<f64>,
) -> Result<(C64, f64)> {
    if t1 <= t0 {
        return Err(FockError::InvalidState("need t1 > t0".into()));
    }
    let span = t1 - t0;
    let mut h = default_step(drive, span, None);
    if let Some(hm) = max_step {
        h = h.min(hm);
    }
    let n_steps = (span / h).ceil() as usize;
    let h = span / n_steps as f64;
    let omega = drive.omega();

    // y = (Re F, Im F, φ)
    let rhs = |t: f64, y: &[f64; 3]| -> [f64; 3] {
        let f = drive.value(t);
        let (s, c) = (omega * t).sin_cos();
        [
            f * c,
            -f * s,
            f * (y[1] * c + y[0] * s), // Im(F e^{iωt})
        ]
    };
    let mut y = [0.0f64; 3];
    let mut t = t0;
    for step in 0..n_steps {
        let k1 = rhs(t, &y);
        let y2 = [
            y[0] + 0.5 * h * k1[0],
            y[1] + 0.5 * h * k1[1],
            y[2] + 0.5 * h * k1[2],
        ];
        let k2 = rhs(t + 0.5 * h, &y2);
        let y3 = [
            y[0] + 0.5 * h * k2[0],
            y[1] + 0.5 * h * k2[1],
            y[2] + 0.5 * h * k2[2],
        ];
        let k3 = rhs(t + 0.5 * h, &y3);
        let y4 = [y[0] + h * k3[0], y[1] + h * k3[1], y[2] + h * k3[2]];
        let k4 = rhs(t + h, &y4);
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t = t0 + (step + 1) as f64 * h;
    }
    Ok((C64::new(y[0], y[1]), y[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn identity_at_zero_displacement() {
        let d = displacement_matrix(C64::new(0.0, 0.0), 5).unwrap();
        for n in 0..5 {
            for m in 0..5 {
                let want = if n == m { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(d[(n, m)].re, want, epsilon = 1e-14);
                assert_abs_diff_eq!(d[(n, m)].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn vacuum_matrix_element_is_gaussian() {
        // ⟨0|D(z)|0⟩ = e^{-|z|²/2}
        let d = displacement_matrix(C64::new(1.0, 0.0), 64).unwrap();
        assert_relative_eq!(d[(0, 0)].re, (-0.5f64).exp(), max_relative = 1e-12);
        assert_abs_diff_eq!(d[(0, 0)].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn truncation_guard_fires() {
        let err = displacement_matrix(C64::new(4.0, 0.0), 16).unwrap_err();
        assert!(matches!(err, FockError::TruncationTooSmall { .. }));
    }

    #[test]
    fn vacuum_distribution_is_poisson() {
        let z = C64::new(2.0, -1.0);
        let x = z.norm_sqr();
        for n in 0..20 {
            let poisson = (n as f64 * x.ln() - x - ln_gamma(n as f64 + 1.0)).exp();
            assert_relative_eq!(displaced_number_pn(z, 0, n), poisson, max_relative = 1e-12);
        }
    }

    #[test]
    fn laguerre_zero_is_exact() {
        // L_1^{(48)}(49) = 0 exactly, so P(49) for m=1, |z|²=49 vanishes
        assert_eq!(displaced_number_pn(C64::new(7.0, 0.0), 1, 49), 0.0);
    }

    #[test]
    fn poisson_peak_value_near_mean() {
        // m=0, |z|²=49, n=49
        let p = displaced_number_pn(C64::new(7.0, 0.0), 0, 49);
        assert_relative_eq!(p, 0.056978, max_relative = 1e-4);
    }

    #[test]
    fn distribution_delta_without_displacement() {
        let dist = distribution(C64::new(0.0, 0.0), 3, 10).unwrap();
        assert_eq!(dist.probs()[3], 1.0);
        assert_eq!(dist.probs().iter().sum::<f64>(), 1.0);
        assert_eq!(dist.mean(), 3.0);
    }

    #[test]
    fn distribution_m1_has_single_interior_zero() {
        let dist = distribution(C64::new(7.0, 0.0), 1, 120).unwrap();
        let peak = dist.probs().iter().cloned().fold(0.0, f64::max);
        let zeros: Vec<usize> = (1..120)
            .filter(|&n| {
                let p = dist.probs();
                p[n] < 1e-12 * peak && p[n] <= p[n - 1] && p[n] <= p[n + 1]
            })
            .collect();
        assert_eq!(zeros, vec![49]);
    }

    #[test]
    fn window_extrema_counting() {
        let dist = distribution(C64::new(7.0, 0.0), 1, 120).unwrap();
        // interior extrema near 39, 49, 59 plus both window endpoints
        assert_eq!(window_extrema_count(dist.probs(), 30, 70), 5);
    }

    #[test]
    fn zero_drive_fourier_amplitude() {
        let d = DriveSignal::from_fn(|_| 0.0, 1.0, -1.0, 1.0, 32).unwrap();
        assert_eq!(fourier_amplitude(&d).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn gaussian_fourier_amplitude_matches_analytic() {
        let (a, tau, omega) = (1.3, 0.8, 1.7);
        let d = DriveSignal::gaussian(a, tau, omega, -10.0 * tau, 10.0 * tau, 4001).unwrap();
        let z = fourier_amplitude(&d).unwrap();
        let want = a * tau * (2.0 * std::f64::consts::PI).sqrt()
            * (-omega * omega * tau * tau / 2.0).exp();
        assert_relative_eq!(z.re, want, max_relative = 1e-8);
        assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-10 * want);
    }

    #[test]
    fn cosine_drive_over_whole_periods() {
        // f = cos(ωt) over W periods: z = W·T/2
        let omega = 2.0;
        let period = 2.0 * std::f64::consts::PI / omega;
        let w = 5.0;
        let d = DriveSignal::from_fn(|t| (omega * t).cos(), omega, 0.0, w * period, 20001).unwrap();
        let z = fourier_amplitude_with(
            &d,
            QuadratureOptions {
                max_edge_fraction: 1.0,
            },
        )
        .unwrap();
        assert_relative_eq!(z.re, w * period / 2.0, max_relative = 1e-8);
        assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn edge_support_guard_fires() {
        let omega = 2.0;
        let d = DriveSignal::from_fn(|t| (omega * t).cos(), omega, 0.0, 10.0, 1001).unwrap();
        assert!(matches!(
            fourier_amplitude(&d),
            Err(FockError::InsufficientSupport { .. })
        ));
    }

    #[test]
    fn free_evolution_is_identity() {
        let d = DriveSignal::from_fn(|_| 0.0, 1.0, -1.0, 1.0, 64).unwrap();
        let psi0 = FockVector::number_state(2, 8).unwrap();
        let psi = propagate_driven(&psi0, &d, -1.0, 1.0).unwrap();
        let ov = psi0.inner(&psi);
        assert_relative_eq!(ov.re, 1.0, max_relative = 1e-12);
        assert_eq!(timeordering_phase(&d, -1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn drive_must_be_strictly_increasing() {
        let err = DriveSignal::new(vec![(0.0, 1.0), (0.0, 2.0)], 1.0).unwrap_err();
        assert!(matches!(err, FockError::InvalidDrive(_)));
    }

    #[test]
    fn phase_invariant_under_drive_reflection() {
        // φ is quadratic in f, so reflecting an odd drive (f(-t) = -f(t))
        // leaves it unchanged; reversing the evolution direction would flip it.
        let omega = 1.0;
        let f_odd = |t: f64| t * (-t * t / 2.0).exp() * (1.3 * t).sin().mul_add(0.2, 1.0);
        let fwd = DriveSignal::from_fn(f_odd, omega, -8.0, 8.0, 4001).unwrap();
        let rev = DriveSignal::from_fn(|t| f_odd(-t), omega, -8.0, 8.0, 4001).unwrap();
        let p_fwd = timeordering_phase(&fwd, -8.0, 8.0).unwrap();
        let p_rev = timeordering_phase(&rev, -8.0, 8.0).unwrap();
        assert!(p_fwd.abs() > 1e-3, "test drive should accumulate phase");
        assert_relative_eq!(p_fwd, p_rev, max_relative = 1e-8);
    }

    #[test]
    fn scaled_laguerre_matches_reference_values() {
        // L_2^{(1)}(3) = 3 - 9 + 3 = ... direct: sum_{i} (-1)^i C(3, 2-i) 3^i / i!
        // L_2^{(1)}(x) = x²/2 - 3x + 3 -> at x=3: 4.5 - 9 + 3 = -1.5
        let (l, s) = laguerre_scaled(2, 1.0, 3.0);
        assert_relative_eq!(l * s.exp(), -1.5, max_relative = 1e-14);
    }
}
