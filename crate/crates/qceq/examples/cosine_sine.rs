//! Cosine–sine decomposition of a unitary whose leading 2×2 block is the
//! identity: only the remaining singular values become rotations.

use qceq::linalg::{direct_sum, max_abs};
use qceq::random::haar_unitary;
use qceq::semantics::Matrix;
use qceq::synth::csd_modified;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = direct_sum(&Matrix::identity(2, 2), &haar_unitary(6, &mut rng));
    let b = csd_modified(&u, 2).expect("leading block is the identity");
    println!("{} rotation pairs (first at row {})", b.d, b.first_pair());
    for (c, s) in b.c.iter().zip(&b.s) {
        println!("  c = {c:.6}  s = {s:.6}  c²+s² = {:.15}", c * c + s * s);
    }
    println!("reconstruction error {:.1e}", max_abs(&(b.reconstruct() - &u)));
}
