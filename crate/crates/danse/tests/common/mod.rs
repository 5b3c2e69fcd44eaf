//! Shared test helpers: an independent Bessel-function oracle for the
//! free-lattice solution, computed by quadrature rather than by any code
//! path under test.

use std::f64::consts::TAU;

/// Number of quadrature nodes. The rectangle rule on a periodic integrand
/// is spectrally accurate: the error of `J_n` is of the order of
/// `J_{N-n}(x)`, which is far below 1e-300 for the `x <= 200`, `|n| <= 60`
/// used in these tests.
const NODES: usize = 1024;

/// `J_n(x)` by the integral `J_n(x) = (1/2π) ∫₀^{2π} cos(nθ − x·sinθ) dθ`.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..NODES {
        let theta = TAU * j as f64 / NODES as f64;
        acc += (n as f64 * theta - x * theta.sin()).cos();
    }
    acc / NODES as f64
}

/// Density of the free-lattice evolution of a center-site excitation:
/// `|c_n(t)|² = J_n(2t)²`.
pub fn free_lattice_density(n: i64, t: f64) -> f64 {
    let j = bessel_j(n, 2.0 * t);
    j * j
}

/// Sanity checks tying the oracle to textbook values and identities; called
/// by the tests that rely on it.
pub fn assert_oracle_valid() {
    // Classical reference values.
    assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-13);
    assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-13);
    assert!((bessel_j(0, 2.0) - 0.223_890_779_141_235_7).abs() < 1e-13);
    // Symmetry J_{-n} = (-1)^n J_n.
    assert!((bessel_j(-3, 7.7) + bessel_j(3, 7.7)).abs() < 1e-13);
    assert!((bessel_j(-4, 7.7) - bessel_j(4, 7.7)).abs() < 1e-13);
    for x in [1.0, 10.0, 40.0] {
        // Completeness: Σ J_n(x)² = 1.
        let total: f64 = (-200..=200).map(|n| bessel_j(n, x).powi(2)).sum();
        assert!((total - 1.0).abs() < 1e-12, "sum rule at x = {x}: {total}");
        // Second moment: Σ n² J_n(x)² = x²/2.
        let spread: f64 = (-200..=200).map(|n| (n * n) as f64 * bessel_j(n, x).powi(2)).sum();
        assert!(
            (spread - x * x / 2.0).abs() / (x * x / 2.0) < 1e-12,
            "spread rule at x = {x}: {spread}"
        );
        // Three-term recurrence residual.
        for n in 1..8 {
            let r = bessel_j(n - 1, x) + bessel_j(n + 1, x)
                - 2.0 * n as f64 / x * bessel_j(n, x);
            assert!(r.abs() < 1e-12, "recurrence at n = {n}, x = {x}: {r}");
        }
    }
}
