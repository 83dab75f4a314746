//! Adaptive Gauss–Kronrod quadrature and trapezoid helpers.

/// Kronrod-15 abscissae (positive half, descending).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

/// Kronrod-15 weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss-7 weights on the odd Kronrod abscissae.
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 panel on `[a, b]`: returns (K15 value, |K15 - G7|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let fsum = f(c - x) + f(c + x);
        resk += WGK[j] * fsum;
        if j % 2 == 1 {
            resg += WG[j / 2] * fsum;
        }
    }
    (resk * h, (resk - resg).abs() * h.abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `tol`. Panels whose embedded error estimate exceeds their share
/// of the budget are bisected, depth-first.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, e) = gk15(f, a, b);
        // the second condition stops refinement once the embedded estimate is
        // rounding-dominated and cannot shrink further
        if e <= tol || e <= 1e-14 * v.abs() || depth >= 22 {
            return v;
        }
        let c = 0.5 * (a + b);
        recurse(f, a, c, 0.5 * tol, depth + 1) + recurse(f, c, b, 0.5 * tol, depth + 1)
    }
    recurse(f, a, b, tol, 0)
}

/// Composite trapezoid over sample pairs `(t, y)`; `t` must be sorted.
pub fn trapezoid(samples: &[(f64, f64)]) -> f64 {
    samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gk_exact_on_polynomials() {
        // K15 is exact up to degree 22
        let v = adaptive_gk(&|x: f64| x.powi(9) - 3.0 * x.powi(4) + 1.0, -1.0, 2.0, 1e-14);
        let exact = (2.0f64.powi(10) - 1.0) / 10.0 - 3.0 * (2.0f64.powi(5) + 1.0) / 5.0 + 3.0;
        assert_relative_eq!(v, exact, max_relative = 1e-14);
    }

    #[test]
    fn gk_adaptive_on_peaked_integrand() {
        // integral of 1/(x^2 + 1e-4) over [-1, 1] = 2*atan(100)/1e-2
        let v = adaptive_gk(&|x: f64| 1.0 / (x * x + 1e-4), -1.0, 1.0, 1e-10);
        let exact = 2.0 * (100.0f64).atan() / 1e-2;
        assert_relative_eq!(v, exact, max_relative = 1e-10);
    }

    #[test]
    fn trapezoid_linear_is_exact() {
        let s: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64 * 0.3, 2.0 * i as f64 * 0.3 - 1.0)).collect();
        assert_relative_eq!(trapezoid(&s), 3.0 * 3.0 - 3.0, max_relative = 1e-14);
    }
}
