//! Momentum-space geometry of massless spinning particles.
//!
//! The origin of momentum space is excluded; around it lives a monopole
//! field B(p) = p/|p|³. Translations in this geometry compose only up to a
//! phase — the two-cocycle γ[a,b;p], the monopole flux through the simplex
//! the translation pair sweeps out. Accumulating cocycle phases around a
//! closed momentum loop yields λ times the loop's solid angle: the geometric
//! (Berry) phase of a helicity-λ particle.
//!
//! The same phase is carried matrix-valued by the regular spin-1 connection
//! A_k = A^a_k S_a with A^a_k(p) = ε_{alk} p_l/|p|², (S_a)_{kl} = −iε_{akl}:
//! the path-ordered exponential of i∮A_k dp_k around a closed loop equals
//! exp(iΣΩ) with Σ = p̂·S the helicity matrix at the base point. Sweeping a
//! full sphere (Ω = 4π) must return the identity, which is the quantization
//! of helicity in half-integers.
//!
//! Orientation convention: a loop traversed counterclockwise as seen from
//! outside the sphere has positive solid angle, matching the outward flux of
//! the monopole field.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::quad::adaptive_gk;

/// Relative singularity guard: points closer to the origin than this times
/// the ambient scale are rejected.
pub const SINGULARITY_GUARD: f64 = 1e-9;

/// Absolute tolerance of the adaptive flux quadrature in [`two_cocycle`].
pub const COCYCLE_QUAD_TOL: f64 = 1e-12;

/// Phase tolerance of [`quantization_scan`].
pub const PHASE_TOL: f64 = 1e-9;

/// Largest allowed per-segment generator norm in [`holonomy`].
pub const MAX_STEP_NORM: f64 = 0.1;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("momentum at or below the singularity guard (|p| = {norm:.3e})")]
    SingularMomentum { norm: f64 },
    #[error("simplex approaches the momentum-space origin (min |p| = {min_norm:.3e})")]
    SimplexHitsSingularity { min_norm: f64 },
    #[error("path is not closed (gap {gap:.3e})")]
    PathNotClosed { gap: f64 },
    #[error("path radius varies by {spread:.3e}; constant-energy transport requires equal |p|")]
    NonConstantEnergy { spread: f64 },
    #[error("degenerate path: {0}")]
    DegeneratePath(String),
    #[error("segment too large: generator norm {norm:.3e} exceeds {max:.1e}")]
    StepTooLarge { norm: f64, max: f64 },
    #[error("helicity 2λ = {0} is not an integer")]
    InvalidHelicity(f64),
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

// ---------------------------------------------------------------------------
// domain types
// ---------------------------------------------------------------------------

/// A point of momentum space with the origin excluded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumPoint(Vector3<f64>);

impl MomentumPoint {
    pub fn new(p: Vector3<f64>) -> Result<Self> {
        if !p.iter().all(|c| c.is_finite()) || p.norm() == 0.0 {
            return Err(GeometryError::SingularMomentum { norm: p.norm() });
        }
        Ok(Self(p))
    }

    pub fn from_array(p: [f64; 3]) -> Result<Self> {
        Self::new(Vector3::from_column_slice(&p))
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// An ordered polygonal path in momentum space.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumPath {
    points: Vec<Vector3<f64>>,
    closed: bool,
}

impl MomentumPath {
    pub fn new(points: Vec<Vector3<f64>>, closed: bool) -> Result<Self> {
        if points.len() < 2 {
            return Err(GeometryError::InvalidPath("need at least two points".into()));
        }
        let scale = points.iter().fold(0.0f64, |m, p| m.max(p.norm()));
        if scale == 0.0 || points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::InvalidPath("non-finite or all-zero points".into()));
        }
        for p in &points {
            if p.norm() < SINGULARITY_GUARD * scale {
                return Err(GeometryError::SingularMomentum { norm: p.norm() });
            }
        }
        if closed {
            let gap = (points[0] - points[points.len() - 1]).norm();
            if gap > 1e-9 * scale {
                return Err(GeometryError::PathNotClosed { gap });
            }
        }
        for w in points.windows(2) {
            let cos = w[0].normalize().dot(&w[1].normalize());
            if cos <= 0.0 {
                return Err(GeometryError::InvalidPath(
                    "consecutive points subtend an angle >= pi/2".into(),
                ));
            }
        }
        Ok(Self { points, closed })
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn n_segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn scale(&self) -> f64 {
        self.points.iter().fold(0.0f64, |m, p| m.max(p.norm()))
    }

    /// max |p_i| − min |p_i|.
    pub fn radius_spread(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for p in &self.points {
            let n = p.norm();
            lo = lo.min(n);
            hi = hi.max(n);
        }
        hi - lo
    }

    /// Rigid rotation of the whole path.
    pub fn rotated(&self, rot: &nalgebra::Rotation3<f64>) -> Self {
        Self {
            points: self.points.iter().map(|p| rot * p).collect(),
            closed: self.closed,
        }
    }

    /// Reversed traversal.
    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self {
            points,
            closed: self.closed,
        }
    }
}

/// Helicity λ, stored as 2λ so that half-integer quantization is structural.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Helicity {
    two_lambda: i32,
}

impl Helicity {
    pub fn from_two_lambda(two_lambda: i32) -> Self {
        Self { two_lambda }
    }

    /// Accepts only properly quantized values (2λ integer).
    pub fn try_from_value(lambda: f64) -> Result<Self> {
        let tl = 2.0 * lambda;
        if (tl - tl.round()).abs() > 1e-12 || !tl.is_finite() {
            return Err(GeometryError::InvalidHelicity(tl));
        }
        Ok(Self {
            two_lambda: tl.round() as i32,
        })
    }

    pub fn value(&self) -> f64 {
        self.two_lambda as f64 / 2.0
    }
}

/// Path-ordered transport matrix around a closed loop (spin-1, 3×3).
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyMatrix {
    entries: Matrix3<C64>,
    base_point: MomentumPoint,
}

impl HolonomyMatrix {
    pub fn entries(&self) -> &Matrix3<C64> {
        &self.entries
    }

    pub fn base_point(&self) -> &MomentumPoint {
        &self.base_point
    }

    /// max |（U†U − I)_{ij}|.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.entries.adjoint() * self.entries - Matrix3::identity();
        g.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    /// Eigenphase multiset {−θ, 0, +θ} of the transport rotation, sorted.
    pub fn eigenphases(&self) -> [f64; 3] {
        let u = &self.entries;
        let tr = (u[(0, 0)] + u[(1, 1)] + u[(2, 2)]).re;
        let axis = Vector3::new(
            (u[(2, 1)] - u[(1, 2)]).re,
            (u[(0, 2)] - u[(2, 0)]).re,
            (u[(1, 0)] - u[(0, 1)]).re,
        ) * 0.5;
        let theta = axis.norm().atan2((tr - 1.0) / 2.0);
        [-theta, 0.0, theta]
    }

    /// Signed phases on the helicity eigenbasis at the base point, ordered
    /// (Σ=+1, Σ=0, Σ=−1). When the loop holonomy equals exp(iΣΩ) these are
    /// (+Ω, 0, −Ω).
    pub fn signed_phases(&self) -> [f64; 3] {
        let phat = self.base_point.vector().normalize();
        let (e1, e2) = orthonormal_frame(&phat);
        let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
        let u_plus = Vector3::new(
            C64::new(e1.x * sqrt_half, e2.x * sqrt_half),
            C64::new(e1.y * sqrt_half, e2.y * sqrt_half),
            C64::new(e1.z * sqrt_half, e2.z * sqrt_half),
        );
        let u_zero = Vector3::new(
            C64::new(phat.x, 0.0),
            C64::new(phat.y, 0.0),
            C64::new(phat.z, 0.0),
        );
        let u_minus = u_plus.map(|c| c.conj());
        let phase = |v: &Vector3<C64>| -> f64 {
            let w = self.entries * v;
            v.dotc(&w).arg()
        };
        [phase(&u_plus), phase(&u_zero), phase(&u_minus)]
    }
}

/// Completes p̂ to a right-handed orthonormal frame (e1, e2, p̂).
fn orthonormal_frame(phat: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let trial = if phat.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let e1 = (trial - phat * trial.dot(phat)).normalize();
    let e2 = phat.cross(&e1);
    (e1, e2)
}

// ---------------------------------------------------------------------------
// monopole field and the translation two-cocycle
// ---------------------------------------------------------------------------

/// B(p) = p/|p|³, the unit-strength monopole field.
pub fn monopole_field(p: &MomentumPoint) -> Vector3<f64> {
    let v = p.vector();
    let r = v.norm();
    v / (r * r * r)
}

/// Minimum of |p + ξ₁ a + ξ₂ b| over the simplex 0 ≤ ξ₂ ≤ ξ₁ ≤ 1
/// (exact: convex quadratic over a triangle).
fn min_norm_over_simplex(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let norm_at = |x1: f64, x2: f64| (p + a * x1 + b * x2).norm();
    let mut best = norm_at(0.0, 0.0).min(norm_at(1.0, 0.0)).min(norm_at(1.0, 1.0));

    // interior stationary point of |p + M ξ|²
    let (aa, ab, bb) = (a.dot(a), a.dot(b), b.dot(b));
    let det = aa * bb - ab * ab;
    if det > 1e-30 * (aa * bb).max(1e-300) {
        let (pa, pb) = (p.dot(a), p.dot(b));
        let x1 = (-pa * bb + pb * ab) / det;
        let x2 = (-pb * aa + pa * ab) / det;
        if (0.0..=1.0).contains(&x1) && x2 >= 0.0 && x2 <= x1 {
            best = best.min(norm_at(x1, x2));
        }
    }
    // edges: ξ₂ = 0, ξ₁ = 1, ξ₂ = ξ₁
    let edge = |q: Vector3<f64>, d: Vector3<f64>| -> f64 {
        let dd = d.dot(&d);
        if dd == 0.0 {
            return q.norm();
        }
        let t = (-q.dot(&d) / dd).clamp(0.0, 1.0);
        (q + d * t).norm()
    };
    best = best.min(edge(*p, *a));
    best = best.min(edge(p + a, *b));
    best = best.min(edge(*p, a + b));
    best
}

/// Translation two-cocycle γ[a,b;p]: λ times the monopole flux through the
/// flat simplex with vertices (p, p+a, p+a+b), oriented along the traversal,
/// computed by nested adaptive Gauss–Kronrod quadrature.
///
/// This is the exact composition phase of momentum-space translations, so the
/// cocycle identity
/// γ[a,b;p] + γ[a+b,c;p] − γ[b,c;p+a] − γ[a,b+c;p] = 0
/// holds to quadrature accuracy whenever no simplex meets the origin.
pub fn two_cocycle(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    p: &MomentumPoint,
    lambda: Helicity,
) -> Result<f64> {
    two_cocycle_with_tol(a, b, p, lambda, COCYCLE_QUAD_TOL)
}

/// [`two_cocycle`] with an explicit absolute quadrature tolerance.
pub fn two_cocycle_with_tol(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    p: &MomentumPoint,
    lambda: Helicity,
    tol: f64,
) -> Result<f64> {
    let w = a.cross(b);
    if w.norm() == 0.0 {
        return Ok(0.0); // degenerate simplex, antisymmetry
    }
    let pv = p.vector();
    let guard = SINGULARITY_GUARD * pv.norm().max(a.norm()).max(b.norm());
    let min_norm = min_norm_over_simplex(&pv, a, b);
    if min_norm <= guard {
        return Err(GeometryError::SimplexHitsSingularity { min_norm });
    }
    // flux = (a×b) · ∫₀¹ dξ₁ ∫₀^{ξ₁} dξ₂ B(p + ξ₁ a + ξ₂ b)
    let field = |x1: f64, x2: f64| -> f64 {
        let r = pv + a * x1 + b * x2;
        let n = r.norm();
        w.dot(&r) / (n * n * n)
    };
    let inner_tol = tol * 0.05;
    let outer = |x1: f64| -> f64 {
        if x1 == 0.0 {
            return 0.0;
        }
        adaptive_gk(&|x2| field(x1, x2), 0.0, x1, inner_tol)
    };
    let flux = adaptive_gk(&outer, 0.0, 1.0, tol * 0.5);
    Ok(lambda.value() * flux)
}

/// Accumulates two-cocycle phases along the closed sequence of translations:
/// each segment contributes the cocycle of its step against the translation
/// that reaches it from an apex at the same energy, tiling a cap over the
/// loop with flat simplices. For a closed constant-|p| path the result is
/// λ·Ω mod 4πλ, reported unreduced.
pub fn loop_phase_from_cocycles(path: &MomentumPath, lambda: Helicity) -> Result<f64> {
    if !path.is_closed() {
        return Err(GeometryError::PathNotClosed { gap: f64::INFINITY });
    }
    let radius = path.scale();
    let spread = path.radius_spread();
    if spread > 1e-9 * radius {
        return Err(GeometryError::NonConstantEnergy { spread });
    }
    let apex = fan_apex(path.points())? * radius;
    let apex_pt = MomentumPoint::new(apex)?;
    let mut total = 0.0;
    for w in path.points().windows(2) {
        let reach = w[0] - apex;
        let step = w[1] - w[0];
        total += two_cocycle(&reach, &step, &apex_pt, lambda)?;
    }
    Ok(total)
}

/// Unit direction the fan is anchored at: the mean path direction, falling
/// back to the loop-normal axis for balanced paths like great circles. Both
/// choices are independent of the traversal orientation, so reversing a path
/// flips the sign of the fanned area.
fn fan_apex(points: &[Vector3<f64>]) -> Result<Vector3<f64>> {
    let n = points.len();
    let centroid: Vector3<f64> = points[..n - 1]
        .iter()
        .map(|p| p.normalize())
        .sum::<Vector3<f64>>();
    if centroid.norm() > 0.1 * (n - 1) as f64 {
        return Ok(centroid.normalize());
    }
    let mut normal = Vector3::zeros();
    for w in points.windows(2) {
        normal += w[0].normalize().cross(&w[1].normalize());
    }
    if normal.norm() < 1e-12 * (n - 1) as f64 {
        return Err(GeometryError::DegeneratePath(
            "no usable fan apex: path has no mean direction or normal".into(),
        ));
    }
    // canonicalize the axis sign so the apex does not depend on orientation
    let mut axis = normal.normalize();
    for i in 0..3 {
        if axis[i].abs() > 1e-6 {
            if axis[i] < 0.0 {
                axis = -axis;
            }
            break;
        }
    }
    Ok(axis)
}

// ---------------------------------------------------------------------------
// solid angle
// ---------------------------------------------------------------------------

/// Signed solid angle of the radial projection of a closed path: spherical
/// excess (L'Huilier) summed over a triangle fan from the path's mean
/// direction, signed by each triangle's orientation. Counterclockwise seen
/// from outside is positive. Independent of |p(σ)| by construction.
pub fn solid_angle(path: &MomentumPath) -> Result<f64> {
    if !path.is_closed() {
        return Err(GeometryError::PathNotClosed { gap: f64::INFINITY });
    }
    let vs: Vec<Vector3<f64>> = path.points()[..path.points().len() - 1]
        .iter()
        .map(|p| p.normalize())
        .collect();
    for (i, w) in vs.windows(2).enumerate() {
        let d = w[0].dot(&w[1]);
        if (w[0] - w[1]).norm() < 1e-14 {
            return Err(GeometryError::DegeneratePath(format!(
                "projected points {i} and {} coincide",
                i + 1
            )));
        }
        if d < -1.0 + 1e-12 {
            return Err(GeometryError::DegeneratePath(format!(
                "projected points {i} and {} are antipodal",
                i + 1
            )));
        }
    }
    let apex = fan_apex(path.points())?;
    let mut total = 0.0;
    for i in 0..vs.len() {
        let j = (i + 1) % vs.len();
        total += signed_spherical_triangle(&apex, &vs[i], &vs[j]);
    }
    Ok(total)
}

/// Signed area of the spherical triangle (L'Huilier excess, oriented by the
/// triple product).
fn signed_spherical_triangle(v1: &Vector3<f64>, v2: &Vector3<f64>, v3: &Vector3<f64>) -> f64 {
    let side = |u: &Vector3<f64>, v: &Vector3<f64>| u.cross(v).norm().atan2(u.dot(v));
    let (a, b, c) = (side(v2, v3), side(v1, v3), side(v1, v2));
    let s = 0.5 * (a + b + c);
    let t = (0.5 * s).tan()
        * (0.5 * (s - a)).tan().max(0.0)
        * (0.5 * (s - b)).tan().max(0.0)
        * (0.5 * (s - c)).tan().max(0.0);
    let excess = 4.0 * t.max(0.0).sqrt().atan();
    let orientation = v1.dot(&v2.cross(v3));
    if orientation >= 0.0 {
        excess
    } else {
        -excess
    }
}

// ---------------------------------------------------------------------------
// Wu-Yang connection, curvature, covariant constancy
// ---------------------------------------------------------------------------

/// Spin-one generators (S_a)_{kl} = −iε_{akl}.
pub fn spin1_generators() -> [Matrix3<C64>; 3] {
    let mi = C64::new(0.0, -1.0);
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    [
        Matrix3::new(z, z, z, z, z, mi, z, i, z),
        Matrix3::new(z, z, i, z, z, z, mi, z, z),
        Matrix3::new(z, mi, z, i, z, z, z, z, z),
    ]
}

/// Real connection components A^a_k(p) = ε_{alk} p_l/|p|², returned as the
/// 3×3 real matrix A[(a, k)].
pub fn wu_yang_components(p: &MomentumPoint) -> Matrix3<f64> {
    let v = p.vector();
    let r2 = v.norm_squared();
    // eps_{alk} p_l: a row, k column
    Matrix3::new(
        0.0, -v.z / r2, v.y / r2,
        v.z / r2, 0.0, -v.x / r2,
        -v.y / r2, v.x / r2, 0.0,
    )
}

/// The three matrices A_k = A^a_k S_a of the Wu-Yang spin-1 connection.
pub fn wu_yang_connection(p: &MomentumPoint) -> [Matrix3<C64>; 3] {
    let comps = wu_yang_components(p);
    let s = spin1_generators();
    let mut out = [Matrix3::zeros(); 3];
    for k in 0..3 {
        let mut m = Matrix3::zeros();
        for a in 0..3 {
            m += s[a] * C64::new(comps[(a, k)], 0.0);
        }
        out[k] = m;
    }
    out
}

/// Helicity matrix Σ = p̂·S at p.
pub fn helicity_matrix(p: &MomentumPoint) -> Matrix3<C64> {
    let phat = p.vector().normalize();
    let s = spin1_generators();
    s[0] * C64::new(phat.x, 0.0) + s[1] * C64::new(phat.y, 0.0) + s[2] * C64::new(phat.z, 0.0)
}

/// Max deviation of the central-difference field strength
/// ∂_k A^a_l − ∂_l A^a_k − ε_{abc} A^b_k A^c_l from the closed form
/// ε_{klm} p_m p_a/|p|⁴. Vanishes as O(h²).
pub fn curvature_check(p: &MomentumPoint, h: f64) -> Result<f64> {
    let v = p.vector();
    if h <= 0.0 || h >= 0.5 * v.norm() {
        return Err(GeometryError::InvalidPath("need 0 < h << |p|".into()));
    }
    let comp_at = |q: Vector3<f64>| -> Result<Matrix3<f64>> {
        Ok(wu_yang_components(&MomentumPoint::new(q)?))
    };
    let mut deriv = [Matrix3::<f64>::zeros(); 3]; // deriv[k][(a,l)] = ∂_k A^a_l
    for k in 0..3 {
        let mut e = Vector3::zeros();
        e[k] = h;
        deriv[k] = (comp_at(v + e)? - comp_at(v - e)?) / (2.0 * h);
    }
    let a_here = comp_at(v)?;
    let eps = levi_civita();
    let r = v.norm();
    let mut worst = 0.0f64;
    for a in 0..3 {
        for k in 0..3 {
            for l in 0..3 {
                let mut commut = 0.0;
                for b in 0..3 {
                    for c in 0..3 {
                        commut += eps[a][b][c] * a_here[(b, k)] * a_here[(c, l)];
                    }
                }
                let fd = deriv[k][(a, l)] - deriv[l][(a, k)] - commut;
                let mut closed = 0.0;
                for m in 0..3 {
                    closed += eps[k][l][m] * v[m] * v[a] / r.powi(4);
                }
                worst = worst.max((fd - closed).abs());
            }
        }
    }
    Ok(worst)
}

/// Max entry magnitude of ∂_k Σ + i[A_k, Σ] by central differences; the
/// helicity matrix is covariantly constant, so this vanishes as O(h²).
pub fn covariant_constancy_residual(p: &MomentumPoint, h: f64) -> Result<f64> {
    let v = p.vector();
    if h <= 0.0 || h >= 0.5 * v.norm() {
        return Err(GeometryError::InvalidPath("need 0 < h << |p|".into()));
    }
    let a_here = wu_yang_connection(p);
    let sigma = helicity_matrix(p);
    let i = C64::new(0.0, 1.0);
    let mut worst = 0.0f64;
    for k in 0..3 {
        let mut e = Vector3::zeros();
        e[k] = h;
        let s_plus = helicity_matrix(&MomentumPoint::new(v + e)?);
        let s_minus = helicity_matrix(&MomentumPoint::new(v - e)?);
        let d_sigma = (s_plus - s_minus) / C64::new(2.0 * h, 0.0);
        let resid = d_sigma + (a_here[k] * sigma - sigma * a_here[k]) * i;
        worst = worst.max(resid.iter().fold(0.0f64, |m, c| m.max(c.norm())));
    }
    Ok(worst)
}

fn levi_civita() -> [[[f64; 3]; 3]; 3] {
    let mut e = [[[0.0; 3]; 3]; 3];
    e[0][1][2] = 1.0;
    e[1][2][0] = 1.0;
    e[2][0][1] = 1.0;
    e[0][2][1] = -1.0;
    e[2][1][0] = -1.0;
    e[1][0][2] = -1.0;
    e
}

// ---------------------------------------------------------------------------
// holonomy
// ---------------------------------------------------------------------------

/// Path-ordered exponential P exp(i ∮ A_k dp_k) over a closed path,
/// discretized by midpoint-rule step exponentials exp(i A_k(p̄_j) Δp_j).
///
/// The generator of each step is w·S with w = (p̄ × Δp)/|p̄|², whose
/// exponential is the real rotation by −|w| about ŵ; the steps are composed
/// with the first segment leftmost, the ordering under which the product of
/// a closed loop converges to exp(iΣΩ) at the base point.
pub fn holonomy(path: &MomentumPath) -> Result<HolonomyMatrix> {
    if !path.is_closed() {
        return Err(GeometryError::PathNotClosed { gap: f64::INFINITY });
    }
    let scale = path.scale();
    let mut u = Matrix3::<f64>::identity();
    for w in path.points().windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if mid.norm() < SINGULARITY_GUARD * scale {
            return Err(GeometryError::SingularMomentum { norm: mid.norm() });
        }
        let dp = w[1] - w[0];
        let gen = mid.cross(&dp) / mid.norm_squared();
        let norm = gen.norm();
        if norm > MAX_STEP_NORM {
            return Err(GeometryError::StepTooLarge {
                norm,
                max: MAX_STEP_NORM,
            });
        }
        u *= rotation_exp_i_w_dot_s(&gen);
    }
    let entries = u.map(|x| C64::new(x, 0.0));
    Ok(HolonomyMatrix {
        entries,
        base_point: MomentumPoint::new(path.points()[0])?,
    })
}

/// exp(i w·S) in the spin-1 representation: the Rodrigues rotation by −|w|
/// about ŵ (exp(i w·S) = exp(−[w]_×)).
fn rotation_exp_i_w_dot_s(w: &Vector3<f64>) -> Matrix3<f64> {
    let th = w.norm();
    if th < 1e-300 {
        return Matrix3::identity();
    }
    let k = Matrix3::new(
        0.0, w.z / th, -w.y / th,
        -w.z / th, 0.0, w.x / th,
        w.y / th, -w.x / th, 0.0,
    ); // = -[w]_x / th
    Matrix3::identity() + k * th.sin() + (k * k) * (1.0 - th.cos())
}

/// Distance between two phases on the circle, in [0, π].
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let d = (a - b).rem_euclid(two_pi);
    d.min(two_pi - d)
}

/// True iff exp(i·λ·Ω_total) = 1 within the phase tolerance; with
/// Ω_total = 4π this is the half-integer helicity quantization test.
pub fn quantization_scan(omega_total: f64, lambda_trial: f64) -> bool {
    let phase = lambda_trial * omega_total;
    let two_pi = 2.0 * std::f64::consts::PI;
    let frac = phase.rem_euclid(two_pi);
    frac.min(two_pi - frac) < PHASE_TOL
}

// ---------------------------------------------------------------------------
// path builders
// ---------------------------------------------------------------------------

/// Great-circle arc between two directions (inclusive endpoints), scaled to
/// `radius`, with `segments` chords.
pub fn geodesic_arc(
    from: Vector3<f64>,
    to: Vector3<f64>,
    radius: f64,
    segments: usize,
) -> Result<Vec<Vector3<f64>>> {
    if segments == 0 {
        return Err(GeometryError::InvalidPath("need at least one segment".into()));
    }
    let u = from.normalize();
    let v = to.normalize();
    let ang = u.cross(&v).norm().atan2(u.dot(&v));
    if ang < 1e-14 || (u + v).norm() < 1e-12 {
        return Err(GeometryError::DegeneratePath(
            "arc endpoints coincide or are antipodal".into(),
        ));
    }
    let sin_ang = ang.sin();
    Ok((0..=segments)
        .map(|i| {
            let t = i as f64 / segments as f64;
            let w = (u * ((1.0 - t) * ang).sin() + v * (t * ang).sin()) / sin_ang;
            w.normalize() * radius
        })
        .collect())
}

/// Closed octant loop +x → +y → +z → +x along geodesics at the given radius.
pub fn octant_path(radius: f64, segments_per_edge: usize) -> Result<MomentumPath> {
    let (ex, ey, ez) = (Vector3::x(), Vector3::y(), Vector3::z());
    let mut pts = geodesic_arc(ex, ey, radius, segments_per_edge)?;
    pts.pop();
    pts.extend(geodesic_arc(ey, ez, radius, segments_per_edge)?);
    pts.pop();
    pts.extend(geodesic_arc(ez, ex, radius, segments_per_edge)?);
    MomentumPath::new(pts, true)
}

/// Closed latitude circle at the given polar angle (counterclockwise seen
/// from +z), solid angle 2π(1 − cos θ).
pub fn latitude_path(radius: f64, polar_angle: f64, segments: usize) -> Result<MomentumPath> {
    if segments < 5 {
        return Err(GeometryError::InvalidPath("need at least 5 segments".into()));
    }
    let (st, ct) = polar_angle.sin_cos();
    let pts = (0..=segments)
        .map(|i| {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / segments as f64;
            Vector3::new(st * phi.cos(), st * phi.sin(), ct) * radius
        })
        .collect();
    MomentumPath::new(pts, true)
}

/// Closed lune boundary between meridians φ₀ and φ₁ through both poles,
/// solid angle 2(φ₁ − φ₀).
pub fn lune_path(
    radius: f64,
    phi0: f64,
    phi1: f64,
    segments_per_edge: usize,
) -> Result<MomentumPath> {
    let north = Vector3::z();
    let south = -Vector3::z();
    let m0 = Vector3::new(phi0.cos(), phi0.sin(), 0.0);
    let m1 = Vector3::new(phi1.cos(), phi1.sin(), 0.0);
    let mut pts = geodesic_arc(north, m0, radius, segments_per_edge)?;
    pts.pop();
    pts.extend(geodesic_arc(m0, south, radius, segments_per_edge)?);
    pts.pop();
    pts.extend(geodesic_arc(south, m1, radius, segments_per_edge)?);
    pts.pop();
    pts.extend(geodesic_arc(m1, north, radius, segments_per_edge)?);
    MomentumPath::new(pts, true)
}

/// Serializable summary of a holonomy computation (see the CLI).
#[derive(Debug, Serialize)]
pub struct HolonomyReport {
    /// Row-major entries as [re, im] pairs.
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub eigenphases: [f64; 3],
    pub signed_phases: [f64; 3],
    pub solid_angle: f64,
    pub base_point: [f64; 3],
    pub unitarity_defect: f64,
}

impl HolonomyReport {
    pub fn new(h: &HolonomyMatrix, omega: f64) -> Self {
        let m = h.entries();
        let matrix = (0..3)
            .map(|r| (0..3).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
            .collect();
        Self {
            matrix,
            eigenphases: h.eigenphases(),
            signed_phases: h.signed_phases(),
            solid_angle: omega,
            base_point: [
                h.base_point().vector().x,
                h.base_point().vector().y,
                h.base_point().vector().z,
            ],
            unitarity_defect: h.unitarity_defect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    #[test]
    fn monopole_field_values() {
        let p = MomentumPoint::from_array([0.0, 0.0, 1.0]).unwrap();
        assert_eq!(monopole_field(&p), Vector3::new(0.0, 0.0, 1.0));
        let p = MomentumPoint::from_array([0.0, 0.0, 2.0]).unwrap();
        assert_relative_eq!(monopole_field(&p).z, 0.25, max_relative = 1e-15);
        assert!(MomentumPoint::from_array([0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn cocycle_is_zero_for_parallel_translations() {
        let p = MomentumPoint::from_array([0.0, 0.0, 1.0]).unwrap();
        let a = Vector3::new(0.1, 0.0, 0.0);
        let g = two_cocycle(&a, &(a * 2.0), &p, Helicity::from_two_lambda(2)).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn small_simplex_flux_at_pole() {
        // flux of B through the simplex spanned by (εx̂, εŷ) at ẑ:
        // half the parallelogram value, B_z × ε²/2
        let eps = 1e-3;
        let p = MomentumPoint::from_array([0.0, 0.0, 1.0]).unwrap();
        let a = Vector3::new(eps, 0.0, 0.0);
        let b = Vector3::new(0.0, eps, 0.0);
        let g = two_cocycle(&a, &b, &p, Helicity::from_two_lambda(2)).unwrap();
        assert_relative_eq!(g, 0.5 * eps * eps, max_relative = 1e-6);
        // matches the solid angle subtended by the triangle (exact oracle)
        let oracle = signed_solid_triangle_oracle(
            &Vector3::new(0.0, 0.0, 1.0),
            &Vector3::new(eps, 0.0, 1.0),
            &Vector3::new(eps, eps, 1.0),
        );
        assert_relative_eq!(g, oracle, max_relative = 1e-10);
    }

    /// van Oosterom–Strackee signed solid angle of a flat triangle seen from
    /// the origin — the independent oracle for the flux quadrature.
    fn signed_solid_triangle_oracle(
        v1: &Vector3<f64>,
        v2: &Vector3<f64>,
        v3: &Vector3<f64>,
    ) -> f64 {
        let (n1, n2, n3) = (v1.normalize(), v2.normalize(), v3.normalize());
        let num = n1.dot(&n2.cross(&n3));
        let den = 1.0 + n1.dot(&n2) + n2.dot(&n3) + n3.dot(&n1);
        2.0 * num.atan2(den)
    }

    #[test]
    fn cocycle_matches_triangle_flux_oracle_at_finite_size() {
        let p = MomentumPoint::from_array([0.3, -1.1, 0.7]).unwrap();
        let a = Vector3::new(0.21, 0.05, -0.1);
        let b = Vector3::new(-0.03, 0.17, 0.08);
        let g = two_cocycle(&a, &b, &p, Helicity::from_two_lambda(2)).unwrap();
        let pv = p.vector();
        let oracle = signed_solid_triangle_oracle(&pv, &(pv + a), &(pv + a + b));
        assert_abs_diff_eq!(g, oracle, epsilon = 1e-11);
    }

    #[test]
    fn cocycle_identity_holds() {
        let lam = Helicity::from_two_lambda(2);
        let p0 = Vector3::new(0.4, -0.9, 1.3);
        let p = MomentumPoint::new(p0).unwrap();
        let a = Vector3::new(0.05, -0.02, 0.04);
        let b = Vector3::new(-0.03, 0.06, 0.01);
        let c = Vector3::new(0.02, 0.03, -0.05);
        let pa = MomentumPoint::new(p0 + a).unwrap();
        let res = two_cocycle(&a, &b, &p, lam).unwrap()
            + two_cocycle(&(a + b), &c, &p, lam).unwrap()
            - two_cocycle(&b, &c, &pa, lam).unwrap()
            - two_cocycle(&a, &(b + c), &p, lam).unwrap();
        assert_abs_diff_eq!(res, 0.0, epsilon = 1e-11);
    }

    #[test]
    fn simplex_singularity_guard_fires() {
        let p = MomentumPoint::from_array([1.0, 0.0, 0.0]).unwrap();
        // triangle (p, -p, -p + b) passes through the origin
        let a = Vector3::new(-2.0, 0.0, 0.0);
        let b = Vector3::new(0.0, 0.1, 0.0);
        assert!(matches!(
            two_cocycle(&a, &b, &p, Helicity::from_two_lambda(2)),
            Err(GeometryError::SimplexHitsSingularity { .. })
        ));
    }

    #[test]
    fn octant_loop_phase_is_quarter_turn() {
        let path = octant_path(1.0, 40).unwrap();
        let phase = loop_phase_from_cocycles(&path, Helicity::from_two_lambda(2)).unwrap();
        assert_abs_diff_eq!(phase, PI / 2.0, epsilon = 1e-8);
        let back = loop_phase_from_cocycles(&path.reversed(), Helicity::from_two_lambda(2)).unwrap();
        assert_abs_diff_eq!(back, -PI / 2.0, epsilon = 1e-8);
    }

    #[test]
    fn equator_loop_phase_reports_full_turn() {
        let path = latitude_path(1.0, PI / 2.0, 160).unwrap();
        let phase = loop_phase_from_cocycles(&path, Helicity::from_two_lambda(2)).unwrap();
        assert_abs_diff_eq!(phase, 2.0 * PI, epsilon = 1e-3);
    }

    #[test]
    fn loop_phase_scales_with_helicity() {
        let path = latitude_path(1.0, PI / 3.0, 120).unwrap();
        let l1 = loop_phase_from_cocycles(&path, Helicity::from_two_lambda(2)).unwrap();
        let lhalf = loop_phase_from_cocycles(&path, Helicity::from_two_lambda(1)).unwrap();
        assert_relative_eq!(l1, 2.0 * lhalf, max_relative = 1e-12);
    }

    #[test]
    fn loop_phase_rejects_varying_radius() {
        let mut pts = octant_path(1.0, 20).unwrap().points().to_vec();
        for (i, p) in pts.iter_mut().enumerate() {
            if i % 7 == 3 {
                *p *= 1.0 + 1e-4;
            }
        }
        let n = pts.len();
        pts[n - 1] = pts[0];
        let path = MomentumPath::new(pts, true).unwrap();
        assert!(matches!(
            loop_phase_from_cocycles(&path, Helicity::from_two_lambda(2)),
            Err(GeometryError::NonConstantEnergy { .. })
        ));
    }

    #[test]
    fn solid_angle_octant_and_equator() {
        let octant = octant_path(1.0, 60).unwrap();
        assert_abs_diff_eq!(solid_angle(&octant).unwrap(), PI / 2.0, epsilon = 1e-10);
        let equator = latitude_path(1.0, PI / 2.0, 240).unwrap();
        assert_abs_diff_eq!(solid_angle(&equator).unwrap(), 2.0 * PI, epsilon = 1e-9);
        assert_abs_diff_eq!(
            solid_angle(&equator.reversed()).unwrap(),
            -2.0 * PI,
            epsilon = 1e-9
        );
    }

    #[test]
    fn solid_angle_is_radius_independent() {
        let small = octant_path(1.0, 50).unwrap();
        let large = octant_path(7.0, 50).unwrap();
        assert_abs_diff_eq!(
            solid_angle(&small).unwrap(),
            solid_angle(&large).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn solid_angles_add_across_a_shared_edge() {
        // split the octant along the geodesic from x̂ to ẑ·-ish midpoint of
        // the (y,z) edge; the two halves must add to the whole
        let radius = 1.0;
        let (ex, ey, ez) = (Vector3::x(), Vector3::y(), Vector3::z());
        let mid = ((ey + ez) / 2.0).normalize();
        let n = 64;
        let mut half1 = geodesic_arc(ex, ey, radius, n).unwrap();
        half1.pop();
        half1.extend(geodesic_arc(ey, mid, radius, n).unwrap());
        half1.pop();
        half1.extend(geodesic_arc(mid, ex, radius, n).unwrap());
        let mut half2 = geodesic_arc(ex, mid, radius, n).unwrap();
        half2.pop();
        half2.extend(geodesic_arc(mid, ez, radius, n).unwrap());
        half2.pop();
        half2.extend(geodesic_arc(ez, ex, radius, n).unwrap());
        let o1 = solid_angle(&MomentumPath::new(half1, true).unwrap()).unwrap();
        let o2 = solid_angle(&MomentumPath::new(half2, true).unwrap()).unwrap();
        let whole = solid_angle(&octant_path(radius, n).unwrap()).unwrap();
        assert_abs_diff_eq!(o1 + o2, whole, epsilon = 1e-10);
    }

    #[test]
    fn wu_yang_fixture_at_north_pole() {
        // at p = ẑ: A_1 = S_2, A_2 = −S_1, A_3 = 0
        let p = MomentumPoint::from_array([0.0, 0.0, 1.0]).unwrap();
        let a = wu_yang_connection(&p);
        let s = spin1_generators();
        assert!((a[0] - s[1]).iter().all(|c| c.norm() < 1e-15));
        assert!((a[1] + s[0]).iter().all(|c| c.norm() < 1e-15));
        assert!(a[2].iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn connection_scales_inversely_with_momentum() {
        let p1 = MomentumPoint::from_array([0.3, -0.4, 0.9]).unwrap();
        let p2 = MomentumPoint::new(p1.vector() * 3.0).unwrap();
        let a1 = wu_yang_components(&p1);
        let a2 = wu_yang_components(&p2);
        assert_relative_eq!(a2.norm(), a1.norm() / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn connection_matrices_are_hermitian() {
        let p = MomentumPoint::from_array([0.5, 1.2, -0.3]).unwrap();
        for a in wu_yang_connection(&p) {
            let defect = (a - a.adjoint()).iter().fold(0.0f64, |m, c| m.max(c.norm()));
            assert!(defect < 1e-15);
        }
    }

    #[test]
    fn curvature_residual_is_second_order() {
        // at |p| = 1 the third-derivative scale puts the h² residual near
        // 2e-6; it falls below 1e-6 for |p| ≳ 1.5
        let p = MomentumPoint::from_array([0.0, 0.0, 1.0]).unwrap();
        let r1 = curvature_check(&p, 1e-3).unwrap();
        assert!(r1 < 4e-6, "residual {r1}");
        let far = MomentumPoint::from_array([1.0, -0.8, 1.1]).unwrap();
        assert!(curvature_check(&far, 1e-3).unwrap() < 1e-6);
        let r2 = curvature_check(&p, 5e-4).unwrap();
        let ratio = r1 / r2;
        assert!((3.0..5.0).contains(&ratio), "convergence ratio {ratio}");
    }

    #[test]
    fn covariant_constancy_residual_is_second_order() {
        let p = MomentumPoint::from_array([0.6, -0.3, 0.74]).unwrap();
        let r1 = covariant_constancy_residual(&p, 1e-4).unwrap();
        assert!(r1 < 1e-7, "residual {r1}");
        let r2 = covariant_constancy_residual(&p, 5e-5).unwrap();
        let ratio = r1 / r2;
        assert!((3.0..5.0).contains(&ratio), "convergence ratio {ratio}");
    }

    #[test]
    fn trivial_path_gives_identity_holonomy() {
        let p = Vector3::new(0.0, 0.0, 1.0);
        let path = MomentumPath::new(vec![p, p, p], true).unwrap();
        let h = holonomy(&path).unwrap();
        assert!(h.unitarity_defect() < 1e-14);
        let phases = h.eigenphases();
        assert!(phases.iter().all(|t| t.abs() < 1e-14));
    }

    #[test]
    fn octant_holonomy_eigenphases() {
        let path = octant_path(1.0, 400).unwrap();
        let h = holonomy(&path).unwrap();
        assert!(h.unitarity_defect() < 1e-12);
        let phases = h.eigenphases();
        assert_abs_diff_eq!(phases[0], -PI / 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(phases[1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(phases[2], PI / 2.0, epsilon = 1e-6);
        // signed extraction on the helicity eigenbasis
        let signed = h.signed_phases();
        assert_abs_diff_eq!(signed[0], PI / 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(signed[1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(signed[2], -PI / 2.0, epsilon = 1e-6);
    }

    #[test]
    fn holonomy_agrees_with_cocycle_route() {
        // Ω = 2π(1 − cos 1.1) ≈ 3.43 > π, so the eigenphase wraps
        let path = latitude_path(2.0, 1.1, 300).unwrap();
        let h = holonomy(&path).unwrap();
        let phase = loop_phase_from_cocycles(&path, Helicity::from_two_lambda(2)).unwrap();
        let omega = solid_angle(&path).unwrap();
        assert!(phase_distance(h.signed_phases()[0], phase) < 1e-4);
        assert_abs_diff_eq!(phase, omega, epsilon = 1e-4);
    }

    #[test]
    fn holonomy_is_gauge_covariant_under_rotations() {
        let path = octant_path(1.0, 200).unwrap();
        let rot = nalgebra::Rotation3::from_euler_angles(0.3, -0.8, 1.2);
        let h = holonomy(&path).unwrap();
        let hr = holonomy(&path.rotated(&rot)).unwrap();
        let r = rot.matrix().map(|x| C64::new(x, 0.0));
        let conj = r * h.entries() * r.transpose();
        let defect = (hr.entries() - conj)
            .iter()
            .fold(0.0f64, |m, c| m.max(c.norm()));
        assert!(defect < 1e-12, "covariance defect {defect}");
        let (a, b) = (h.eigenphases(), hr.eigenphases());
        for i in 0..3 {
            assert_abs_diff_eq!(a[i], b[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn step_norm_guard_fires() {
        // 5 segments around the equator: each chord has |w| ~ 1.2
        let path = latitude_path(1.0, PI / 2.0, 5).unwrap();
        assert!(matches!(
            holonomy(&path),
            Err(GeometryError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn quantization_scan_accepts_half_integers() {
        let four_pi = 4.0 * PI;
        assert!(quantization_scan(four_pi, 0.5));
        assert!(quantization_scan(four_pi, 1.0));
        assert!(quantization_scan(four_pi, 2.5));
        assert!(!quantization_scan(four_pi, 0.3));
        assert!(!quantization_scan(four_pi, 0.251));
    }

    #[test]
    fn helicity_construction_enforces_quantization() {
        assert!(Helicity::try_from_value(0.5).is_ok());
        assert!(Helicity::try_from_value(-1.5).is_ok());
        assert!(Helicity::try_from_value(0.3).is_err());
    }
}
