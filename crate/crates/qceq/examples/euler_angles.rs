//! Canonical P·Rx·P angles of a random single-qubit unitary, and the xzx form
//! of the same matrix.

use qceq::linalg::max_abs;
use qceq::random::haar_unitary;
use qceq::solvers::{euler_xzx, euler_zxz, xzx_matrix, zxz_matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let u = haar_unitary(2, &mut ChaCha8Rng::seed_from_u64(3));
    let z = euler_zxz(&u).expect("unitary input");
    println!("zxz  phase {:.6}  P {:.6}  Rx {:.6}  P {:.6}", z.b0, z.b1, z.b2, z.b3);
    println!("     error {:.1e}, clause violations {:?}", max_abs(&(zxz_matrix(&z) - &u)), z.violations());
    let x = euler_xzx(&u).expect("unitary input");
    println!("xzx  phase {:.6}  Rx {:.6}  P {:.6}  Rx {:.6}", x.b0, x.b1, x.b2, x.b3);
    println!("     error {:.1e}", max_abs(&(xzx_matrix(&x) - &u)));
}
