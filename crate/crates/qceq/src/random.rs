//! Seeded random matrices and circuits for tests, examples and CLI trials.

use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::circuit::{Circuit, Control, Gate, Theory};
use crate::linalg::qr;
use crate::semantics::{Matrix, C64};

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-distributed unitary (QR of a Gaussian matrix with positive diagonal R).
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> Matrix {
    qr(&gaussian_matrix(dim, dim, rng)).0
}

pub fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    haar_unitary(rows, rng).columns(0, cols).into_owned()
}

pub fn angle(rng: &mut impl Rng) -> f64 {
    rng.gen_range(-2.0 * PI..2.0 * PI)
}

/// Random angle that is a multiple of π/2 one time in four.
pub fn angle_with_specials(rng: &mut impl Rng) -> f64 {
    if rng.gen_bool(0.25) {
        rng.gen_range(-4..8) as f64 * PI / 2.0
    } else {
        angle(rng)
    }
}

fn distinct(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    rand::seq::index::sample(rng, n, k).into_vec()
}

/// A random unitary gate over `n` live wires, derived kinds and controls included.
pub fn random_gate(n: usize, allow_phase: bool, rng: &mut impl Rng) -> Gate {
    if n == 0 {
        // nothing but a scalar fits on zero wires
        return Gate::phase(angle(rng));
    }
    loop {
        let choice = rng.gen_range(0..12);
        let g = match choice {
            0 if allow_phase => Gate::phase(angle(rng)),
            1 => Gate::h(rng.gen_range(0..n)),
            2 | 3 => Gate::p(rng.gen_range(0..n), angle(rng)),
            4 => Gate::rx(rng.gen_range(0..n), angle(rng)),
            5 if n >= 2 => {
                let w = distinct(rng, n, 2);
                Gate::cnot(w[0], w[1])
            }
            6 if n >= 2 => {
                let w = distinct(rng, n, 2);
                Gate::swap(w[0], w[1])
            }
            7 => Gate::x(rng.gen_range(0..n)),
            8 => Gate::z(rng.gen_range(0..n)),
            9 if n >= 3 => {
                let w = distinct(rng, n, 3);
                if rng.gen_bool(0.5) {
                    Gate::toffoli(w[0], w[1], w[2])
                } else {
                    Gate::fredkin(w[0], w[1], w[2])
                }
            }
            10 | 11 if n >= 2 => {
                let k = rng.gen_range(1..n.min(4));
                let w = distinct(rng, n, k + 1);
                let cs: Vec<Control> = w[1..].iter().map(|&q| Control { wire: q, positive: rng.gen_bool(0.7) }).collect();
                let a = angle(rng);
                if choice == 10 {
                    Gate::p(w[0], a).ctrl(cs)
                } else {
                    Gate::rx(w[0], a).ctrl(cs)
                }
            }
            _ => continue,
        };
        return g;
    }
}

pub fn random_qc(n: usize, len: usize, rng: &mut impl Rng) -> Circuit {
    let gates = (0..len).map(|_| random_gate(n, true, rng)).collect();
    Circuit { theory: Theory::Qc, n_in: n, gates }
}

/// Random circuit of the given theory; structural gates appear only where
/// the theory allows them and are kept semantically sensible (`Free` only
/// on a wire that is provably `|0⟩`, i.e. straight after an uncomputation).
pub fn random_circuit(theory: Theory, n_in: usize, len: usize, max_width: usize, rng: &mut impl Rng) -> Circuit {
    let mut gates = vec![];
    let mut live = n_in;
    while gates.len() < len {
        let r = rng.gen_range(0..10);
        if r == 0 && theory != Theory::Qc && live < max_width {
            gates.push(Gate::init());
            live += 1;
        } else if r == 1 && theory == Theory::QcGround && live > 0 {
            gates.push(Gate::discard(rng.gen_range(0..live)));
            live -= 1;
        } else if r == 2 && theory == Theory::QcAncilla && live < max_width && live > 0 {
            // compute into an ancilla, use it, uncompute, free
            let src = rng.gen_range(0..live);
            gates.push(Gate::init());
            gates.push(Gate::cnot(src, live));
            gates.push(Gate::p(live, angle(rng)));
            gates.push(Gate::cnot(src, live));
            gates.push(Gate::free(live));
        } else if live > 0 || theory == Theory::Qc {
            // a wireless QC circuit can only hold scalars
            gates.push(random_gate(live, theory != Theory::QcGround, rng));
        }
    }
    Circuit { theory, n_in, gates }
}
