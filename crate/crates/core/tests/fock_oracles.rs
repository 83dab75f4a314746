//! Cross-checks of the Fock-space engine against independent oracles:
//! a scaling-and-squaring matrix exponential for the displacement operator,
//! and the closed-form displaced-state solution for the driven evolution.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use photonkin::fock::{
    accumulated_displacement, apply_matrix, column_sum_check, displaced_number_pn,
    displacement_matrix, distribution, fourier_amplitude, propagate_driven_with,
    timeordering_phase_with, DriveSignal, FockVector, PropagateOptions,
};

/// Matrix exponential by scaling and squaring with a Taylor series —
/// independent of the eigendecomposition route used by the implementation.
fn expm_oracle(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    let norm = m.iter().map(|c| c.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let scaled = m / C64::new(2f64.powi(squarings as i32), 0.0);
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = DMatrix::<C64>::identity(n, n);
    for k in 1..30 {
        term = (&term * &scaled) / C64::new(k as f64, 0.0);
        sum += &term;
    }
    let mut out = sum;
    for _ in 0..squarings {
        out = &out * &out;
    }
    out
}

fn generator(z: C64, dim: usize) -> DMatrix<C64> {
    let mut g = DMatrix::<C64>::zeros(dim, dim);
    for n in 0..dim - 1 {
        let s = ((n + 1) as f64).sqrt();
        g[(n + 1, n)] = z * s;
        g[(n, n + 1)] = -z.conj() * s;
    }
    g
}

#[test]
fn displacement_matches_matrix_exponential_oracle() {
    let z = C64::new(2.0, 1.0);
    let dim = 128;
    let d = displacement_matrix(z, dim).unwrap();
    let oracle = expm_oracle(&generator(z, dim));
    let max_dev = (0..dim)
        .flat_map(|r| (0..dim).map(move |c| (r, c)))
        .map(|(r, c)| (d[(r, c)] - oracle[(r, c)]).norm())
        .fold(0.0, f64::max);
    assert!(max_dev < 1e-10, "max entry deviation {max_dev}");
}

#[test]
fn displacement_is_unitary_within_guard() {
    for (z, dim) in [
        (C64::new(1.0, 0.0), 16),
        (C64::new(2.0, -2.0), 64),
        (C64::new(7.0, 0.0), 256),
    ] {
        let d = displacement_matrix(z, dim).unwrap();
        let g = d.adjoint() * &d - DMatrix::<C64>::identity(dim, dim);
        let defect = g.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(defect < 1e-10, "unitarity defect {defect} at z={z}, dim={dim}");
    }
}

#[test]
fn displacement_composition_returns_to_vacuum() {
    let z = C64::new(1.3, -0.4);
    let dim = 64;
    let d_plus = displacement_matrix(z, dim).unwrap();
    let d_minus = displacement_matrix(-z, dim).unwrap();
    let vac = FockVector::number_state(0, dim).unwrap();
    let roundtrip = apply_matrix(&d_minus, &apply_matrix(&d_plus, &vac).unwrap()).unwrap();
    assert_abs_diff_eq!(vac.inner(&roundtrip).norm(), 1.0, epsilon = 1e-10);
}

#[test]
fn closed_form_distribution_matches_matrix_column() {
    let z = C64::new(7.0, 0.0);
    let d = displacement_matrix(z, 512).unwrap();
    for m in [0usize, 1, 3] {
        for n in (0..150).step_by(7) {
            let matrix_p = d[(n, m)].norm_sqr();
            let closed = displaced_number_pn(z, m, n);
            assert_abs_diff_eq!(closed, matrix_p, epsilon = 1e-12);
        }
    }
}

#[test]
fn column_sums_are_unity_inside_truncation() {
    // unitarity of the truncated-generator exponential
    assert_abs_diff_eq!(
        column_sum_check(C64::new(0.0, 0.0), 32, 7).unwrap(),
        1.0,
        epsilon = 1e-14
    );
    assert_abs_diff_eq!(
        column_sum_check(C64::new(2.0, 0.0), 256, 4).unwrap(),
        1.0,
        epsilon = 1e-10
    );
    assert_abs_diff_eq!(
        column_sum_check(C64::new(7.0, 0.0), 512, 49).unwrap(),
        1.0,
        epsilon = 1e-8
    );
}

#[test]
fn closed_form_column_sum_is_unity() {
    // Σ_m P(n|m) over the analytic route, independent of the matrix
    let z = C64::new(7.0, 0.0);
    let s: f64 = (0..512).map(|m| displaced_number_pn(z, m, 49)).sum();
    assert_abs_diff_eq!(s, 1.0, epsilon = 1e-8);
}

#[test]
fn zero_pattern_matches_initial_level() {
    // D(z)|m⟩ has exactly m interior near-zeros for |z|² ≥ m + 2
    for m in [0usize, 1, 2, 3] {
        let z = C64::new(3.0, 0.0); // |z|² = 9
        let dist = distribution(z, m, 60).unwrap();
        let p = dist.probs();
        let peak = p.iter().cloned().fold(0.0, f64::max);
        let zeros = (1..p.len() - 1)
            .filter(|&n| p[n] < 1e-12 * peak && p[n] <= p[n - 1] && p[n] <= p[n + 1])
            .count();
        assert_eq!(zeros, m, "wrong zero count for m = {m}");
    }
}

fn gaussian_drive(target_abs_z: f64, tau: f64, omega: f64) -> (DriveSignal, f64, f64) {
    let span = 10.0 * tau;
    let gain = tau * (2.0 * std::f64::consts::PI).sqrt() * (-omega * omega * tau * tau / 2.0).exp();
    let amplitude = target_abs_z / gain;
    let drive = DriveSignal::gaussian(amplitude, tau, omega, -span, span, 4001).unwrap();
    (drive, -span, span)
}

#[test]
fn driven_vacuum_matches_displaced_vacuum_with_phase() {
    let (drive, t0, t1) = gaussian_drive(1.6, 0.7, 1.0);
    let opts = PropagateOptions {
        max_step: Some(2.5e-4),
        ..Default::default()
    };
    let psi0 = FockVector::number_state(0, 64).unwrap();
    let psi = propagate_driven_with(&psi0, &drive, t0, t1, opts).unwrap();

    // frozen convention: z = i conj(f̃(ω)), φ from the commutator quadrature
    let z = accumulated_displacement(&drive, t0, t1).unwrap();
    let z_ft = fourier_amplitude(&drive).unwrap();
    assert_abs_diff_eq!((z - C64::new(0.0, 1.0) * z_ft.conj()).norm(), 0.0, epsilon = 1e-10);
    let phi = timeordering_phase_with(&drive, t0, t1, opts).unwrap();

    let d = displacement_matrix(z, 64).unwrap();
    let reference = apply_matrix(&d, &psi0).unwrap();
    let overlap = reference.inner(&psi) * C64::from_polar(1.0, -phi);
    assert!(overlap.norm() > 1.0 - 1e-6, "fidelity {}", overlap.norm());
    assert!(overlap.arg().abs() < 1e-5, "phase defect {}", overlap.arg());
}

#[test]
fn driven_one_photon_state_matches_displaced_number_state() {
    let (drive, t0, t1) = gaussian_drive(1.6, 0.7, 1.0);
    let opts = PropagateOptions {
        max_step: Some(5e-4),
        ..Default::default()
    };
    let psi0 = FockVector::number_state(1, 64).unwrap();
    let psi = propagate_driven_with(&psi0, &drive, t0, t1, opts).unwrap();
    let z = accumulated_displacement(&drive, t0, t1).unwrap();
    let dist = distribution(z, 1, 63).unwrap();
    let numeric = psi.photon_distribution();
    for n in 0..64 {
        assert_abs_diff_eq!(numeric.probs()[n], dist.probs()[n], epsilon = 1e-6);
    }
}

#[test]
fn ehrenfest_mean_follows_classical_response() {
    // ⟨a⟩(t) of the driven vacuum equals the accumulated displacement z(t)
    let (drive, t0, _) = gaussian_drive(1.2, 0.6, 1.3);
    let opts = PropagateOptions {
        max_step: Some(5e-4),
        ..Default::default()
    };
    let psi0 = FockVector::number_state(0, 48).unwrap();
    for t in [-1.0, 0.5, 2.0] {
        let psi = propagate_driven_with(&psi0, &drive, t0, t, opts).unwrap();
        let z_t = accumulated_displacement(&drive, t0, t).unwrap();
        assert_abs_diff_eq!(
            (psi.expectation_annihilation() - z_t).norm(),
            0.0,
            epsilon = 1e-6
        );
    }
}

#[test]
fn orthogonality_survives_the_drive() {
    let (drive, t0, t1) = gaussian_drive(1.6, 0.7, 1.0);
    let opts = PropagateOptions {
        max_step: Some(5e-4),
        ..Default::default()
    };
    let from_vac =
        propagate_driven_with(&FockVector::number_state(0, 64).unwrap(), &drive, t0, t1, opts)
            .unwrap();
    let from_one =
        propagate_driven_with(&FockVector::number_state(1, 64).unwrap(), &drive, t0, t1, opts)
            .unwrap();
    assert!(from_vac.inner(&from_one).norm() < 1e-8);
}

#[test]
fn truncation_leak_is_detected() {
    // an 8-level basis cannot hold |z| ~ 1.6 worth of photons
    let (drive, t0, t1) = gaussian_drive(1.6, 0.7, 1.0);
    let psi0 = FockVector::number_state(0, 8).unwrap();
    let err = propagate_driven_with(
        &psi0,
        &drive,
        t0,
        t1,
        PropagateOptions {
            max_step: Some(1e-3),
            ..Default::default()
        },
    )
    .unwrap_err();
    assert!(matches!(
        err,
        photonkin::fock::FockError::TruncationTooSmall { .. }
    ));
}

#[test]
fn fourier_amplitude_gaussian_relative_accuracy() {
    let (a, tau) = (0.9, 1.1);
    for omega in [0.3, 1.0, 2.0] {
        let drive = DriveSignal::gaussian(a, tau, omega, -12.0 * tau, 12.0 * tau, 6001).unwrap();
        let z = fourier_amplitude(&drive).unwrap();
        let want =
            a * tau * (2.0 * std::f64::consts::PI).sqrt() * (-omega * omega * tau * tau / 2.0).exp();
        assert_relative_eq!(z.re, want, max_relative = 1e-8);
    }
}
