//! Compile a random three-qubit unitary into P, Rx, H and controls.

use qceq::format::format_circuit;
use qceq::linalg::max_abs;
use qceq::random::haar_unitary;
use qceq::semantics::eval_unitary;
use qceq::synth::synth_unitary;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qceq::error::Result<()> {
    let u = haar_unitary(8, &mut ChaCha8Rng::seed_from_u64(5));
    let c = synth_unitary(&u)?;
    let err = max_abs(&(eval_unitary(&c)? - &u));
    println!("{} gates, reconstruction error {err:.1e}", c.len());
    if std::env::args().any(|a| a == "--print") {
        print!("{}", format_circuit(&c));
    }
    Ok(())
}
