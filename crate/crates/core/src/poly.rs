//! Cubic roots with complex coefficients.

use nalgebra::Matrix3;
use num_complex::Complex64;

/// Roots of `c3 w³ + c2 w² + c1 w + c0` (with `c3 ≠ 0`).
///
/// The roots are the eigenvalues of the companion matrix, each polished by a
/// few Newton steps on the original polynomial. Near a double root Newton
/// converges linearly, so polishing stops as soon as the residual stops
/// decreasing.
pub fn cubic_roots(coeffs: [Complex64; 4]) -> [Complex64; 3] {
    let [c3, c2, c1, c0] = coeffs;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let (a2, a1, a0) = (c2 / c3, c1 / c3, c0 / c3);
    let companion = Matrix3::new(
        zero, zero, -a0, //
        one, zero, -a1, //
        zero, one, -a2,
    );
    let eig = companion
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular");
    let mut roots = [eig[0], eig[1], eig[2]];
    let p = |w: Complex64| ((w + a2) * w + a1) * w + a0;
    let dp = |w: Complex64| (3.0 * w + 2.0 * a2) * w + a1;
    for r in roots.iter_mut() {
        let mut best = *r;
        let mut best_res = p(best).norm();
        for _ in 0..6 {
            let d = dp(best);
            if d.norm() == 0.0 || best_res == 0.0 {
                break;
            }
            let next = best - p(best) / d;
            let res = p(next).norm();
            if !(res < best_res) {
                break;
            }
            best = next;
            best_res = res;
        }
        *r = best;
    }
    roots
}

/// Real roots of a real cubic, in increasing order. A root counts as real
/// when its imaginary part is below `imag_tol` relative to its modulus.
pub fn real_cubic_roots(coeffs: [f64; 4], imag_tol: f64) -> Vec<f64> {
    let roots = cubic_roots(coeffs.map(|c| Complex64::new(c, 0.0)));
    let mut out: Vec<f64> = roots
        .iter()
        .filter(|r| r.im.abs() <= imag_tol * r.norm().max(1.0))
        .map(|r| r.re)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}
