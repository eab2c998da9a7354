//! Synthesize the two copy isometries |x⟩ ↦ |xx⟩ and |±⟩ ↦ |±±⟩, then a
//! random 1 → 3 qubit isometry.

use qceq::format::format_circuit;
use qceq::linalg::max_abs;
use qceq::random::random_isometry;
use qceq::semantics::eval_unitary;
use qceq::semantics::{circuit_deviation, EvalOptions};
use qceq::synth::{copy_diagonal_circuit, copy_diagonal_matrix, copy_standard_circuit, copy_standard_matrix, synth_isometry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qceq::error::Result<()> {
    for (name, reference) in [("copy", copy_standard_circuit()), ("copy ±", copy_diagonal_circuit())] {
        print!("reference {name}:\n{}", format_circuit(&reference));
    }
    let random = random_isometry(8, 2, &mut ChaCha8Rng::seed_from_u64(2));
    for (name, v) in [("copy", copy_standard_matrix()), ("copy ±", copy_diagonal_matrix()), ("random 1→3", random)] {
        let c = synth_isometry(&v)?;
        let err = max_abs(&(eval_unitary(&c)? - &v));
        println!("{name}: {} gates, error {err:.1e}", c.len());
    }
    let (_, dev) = circuit_deviation(&synth_isometry(&copy_standard_matrix())?, &copy_standard_circuit(), EvalOptions::default())?;
    println!("synthesized copy vs reference: {dev:.1e}");
    Ok(())
}
