//! Solve the two-qubit K* rule for its right-hand angles and convert between
//! the eight- and nine-angle forms.

use qceq::linalg::max_abs;
use qceq::solvers::{kstar_lhs_matrix, kstar_new_from_old, kstar_old_from_new, kstar_rhs_matrix, solve_kstar};
use std::f64::consts::PI;

fn main() {
    for gamma in [[0.0; 4], [0.3, 1.1, -0.7, 2.0], [0.0, 0.0, 0.0, 2.0 * PI], [PI, 0.5, PI, 0.25]] {
        let d = solve_kstar(gamma).expect("solvable");
        let err = max_abs(&(kstar_rhs_matrix(&d) - kstar_lhs_matrix(gamma)));
        let old = kstar_old_from_new(&d).expect("convertible");
        let back = kstar_new_from_old(&old).expect("convertible");
        println!("γ = {gamma:?}");
        println!("  δ = {:?}", d.delta.map(|v| (v * 1e6).round() / 1e6));
        let trip = d.delta.iter().zip(&back.delta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("  error {err:.1e}, nine-angle round trip off by {trip:.1e}");
    }
}
