//! Synthesis from matrices: a cosine–sine decomposition that keeps a leading
//! identity block, Gray-code multiplexed rotations, and the unitary /
//! zero-controlled / isometry constructions built on them.

use std::f64::consts::FRAC_PI_2;

use crate::circuit::{controlize_with, Circuit, Control, Gate, Theory};
use crate::error::{Error, Result};
use crate::linalg::{self, block, direct_sum, ql, svd};
use crate::semantics::{isometry_deviation, max_deviation, Matrix, C64};
use crate::solvers::euler_zxz;

/// Input check tolerance for unitarity / isometry / identity blocks.
pub const INPUT_TOL: f64 = 1e-9;
/// Sines at or below this are treated as zero (the rotation is dropped).
pub const SINE_TOL: f64 = 1e-13;
pub const MAX_SYNTH_QUBITS: usize = 6;
const ZERO_ANGLE: f64 = 1e-15;

/// `U = diag(I_k, A0, A1) · R(C, S) · diag(I_k, B0, B1)` where `R` rotates the
/// index pairs `(j, j + n)` for `j = n − d .. n` by `[[c, −s], [s, c]]`.
#[derive(Clone, Debug)]
pub struct CsdBlocks {
    pub a0: Matrix,
    pub a1: Matrix,
    pub b0: Matrix,
    pub b1: Matrix,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub k: usize,
    /// Half dimension.
    pub n: usize,
    pub d: usize,
}

impl CsdBlocks {
    /// First index of the rotated pairs.
    pub fn first_pair(&self) -> usize {
        self.n - self.d
    }

    pub fn middle(&self) -> Matrix {
        let n = self.n;
        let mut m = Matrix::identity(2 * n, 2 * n);
        for i in 0..self.d {
            let j = self.first_pair() + i;
            let (c, s) = (C64::new(self.c[i], 0.0), C64::new(self.s[i], 0.0));
            m[(j, j)] = c;
            m[(j, j + n)] = -s;
            m[(j + n, j)] = s;
            m[(j + n, j + n)] = c;
        }
        m
    }

    /// `diag(I_k, A0)`, the full upper-left factor.
    pub fn a0_full(&self) -> Matrix {
        direct_sum(&Matrix::identity(self.k, self.k), &self.a0)
    }

    pub fn b0_full(&self) -> Matrix {
        direct_sum(&Matrix::identity(self.k, self.k), &self.b0)
    }

    pub fn reconstruct(&self) -> Matrix {
        let left = direct_sum(&self.a0_full(), &self.a1);
        let right = direct_sum(&self.b0_full(), &self.b1);
        left * self.middle() * right
    }

    /// Rotation angles `θ_j = 2·atan2(s_j, c_j)` indexed by `j ∈ 0..n`, zero off the pairs.
    pub fn thetas(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.n];
        for i in 0..self.d {
            t[self.first_pair() + i] = 2.0 * self.s[i].atan2(self.c[i]);
        }
        t
    }
}

fn unitary_check(u: &Matrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::ShapeMismatch(format!("{}×{} is not square", u.nrows(), u.ncols())));
    }
    let dev = isometry_deviation(u);
    if dev > INPUT_TOL {
        return Err(Error::NotUnitary(dev));
    }
    Ok(())
}

fn qubits_of(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::ShapeMismatch(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn identity_block_deviation(u: &Matrix, k: usize) -> f64 {
    max_deviation(&block(u, 0, 0, k, k), &Matrix::identity(k, k)).unwrap()
}

pub fn csd_modified(u: &Matrix, k: usize) -> Result<CsdBlocks> {
    unitary_check(u)?;
    if u.nrows() % 2 != 0 {
        return Err(Error::ShapeMismatch(format!("odd dimension {}", u.nrows())));
    }
    let n = u.nrows() / 2;
    if k > n {
        return Err(Error::ShapeMismatch(format!("identity block {k} exceeds half dimension {n}")));
    }
    let dev = identity_block_deviation(u, k);
    if dev > INPUT_TOL {
        return Err(Error::BlockNotIdentity(dev));
    }
    let m = n - k;
    let u10 = block(u, n, k, n, m);
    let u11 = block(u, n, n, n, n);
    let (a0, c0, b0) = if m == 0 {
        (Matrix::zeros(0, 0), vec![], Matrix::zeros(0, 0))
    } else {
        svd(&block(u, k, k, m, m))
    };

    let mut lower = Matrix::zeros(n, n);
    lower.view_mut((0, k), (n, m)).copy_from(&(&u10 * b0.adjoint()));
    let (a1, l) = ql(&lower);
    let x = direct_sum(&Matrix::identity(k, k), &a0).adjoint() * block(u, 0, n, n, n);

    // Sines grow along the diagonal (the SVD sorts cosines descending), so the
    // genuine rotations are a suffix.
    let d = (k..n).rev().take_while(|&j| l[(j, j)].re > SINE_TOL).count();
    let first = n - d;
    let c: Vec<f64> = (first..n).map(|j| c0[j - k]).collect();
    let s: Vec<f64> = (first..n).map(|j| l[(j, j)].re).collect();

    // Unitarity of the middle factor forces row j of the top-right block to be
    // −s_j·B1_j and of the bottom-right c_j·B1_j; combining both rows with
    // weights (c_j, −s_j) recovers B1_j without dividing by a small sine.
    let y = a1.adjoint() * &u11;
    let b1 = Matrix::from_fn(n, n, |i, j| {
        if i < k {
            y[(i, j)]
        } else {
            let (ci, si) = (c0[i - k], l[(i, i)].re);
            y[(i, j)] * ci - x[(i, j)] * si
        }
    });
    Ok(CsdBlocks { a0, a1, b0, b1, c, s, k, n, d })
}

/// Uniformly controlled `Rx` on wire 0 selected by wires `1..n`: on select
/// value `j` (wire 1 most significant) the target sees `Rx(thetas[j])`.
/// Emitted as a Gray-code ladder of `Rx` and `CZ`, since `Z Rx(a) Z = Rx(−a)`.
pub fn multiplexed_rx(n: usize, thetas: &[f64]) -> Vec<Gate> {
    let m = n - 1;
    let len = 1usize << m;
    assert_eq!(thetas.len(), len, "one angle per select value");
    let gray = |i: usize| i ^ (i >> 1);
    let alphas: Vec<f64> = (0..len)
        .map(|i| {
            let sum: f64 = (0..len)
                .map(|b| if (b & gray(i)).count_ones() % 2 == 0 { thetas[b] } else { -thetas[b] })
                .sum();
            sum / len as f64
        })
        .collect();
    let mut gates = vec![];
    for (i, &a) in alphas.iter().enumerate() {
        if a.abs() > ZERO_ANGLE {
            gates.push(Gate::rx(0, a));
        }
        if m > 0 {
            let bit = if i + 1 < len { (i + 1).trailing_zeros() as usize } else { m - 1 };
            gates.push(Gate::z(0).ctrl([Control::pos(n - 1 - bit)]));
        }
    }
    gates
}

/// The rotation layer `R(C, S)` of a decomposition on `n` wires.
fn rotation_gates(csd: &CsdBlocks, n: usize) -> Vec<Gate> {
    let thetas = csd.thetas();
    if thetas.iter().all(|t| t.abs() <= ZERO_ANGLE) {
        return vec![];
    }
    let mut gates = vec![Gate::p(0, -FRAC_PI_2)];
    gates.extend(multiplexed_rx(n, &thetas));
    gates.push(Gate::p(0, FRAC_PI_2));
    gates
}

fn shifted(gates: Vec<Gate>) -> impl Iterator<Item = Gate> {
    gates.into_iter().map(|g| g.shifted(1))
}

fn controlled(gates: Vec<Gate>, n: usize, positive: bool) -> Result<Vec<Gate>> {
    if gates.is_empty() {
        return Ok(gates);
    }
    Ok(controlize_with(&Circuit { theory: Theory::Qc, n_in: n, gates }, positive)?.gates)
}

fn unitary_gates(u: &Matrix, n: usize) -> Result<Vec<Gate>> {
    match n {
        0 => {
            let phi = u[(0, 0)].arg();
            Ok(if phi == 0.0 { vec![] } else { vec![Gate::phase(phi)] })
        }
        1 => {
            let e = euler_zxz(u)?;
            let gates = [Gate::phase(e.b0), Gate::p(0, e.b1), Gate::rx(0, e.b2), Gate::p(0, e.b3)];
            Ok(gates.into_iter().filter(|g| g.angle() != Some(0.0)).collect())
        }
        _ => {
            // diag(B0, B1) = diag(I, B1 B0†) · (I ⊗ B0), likewise for the A side.
            let csd = csd_modified(u, 0)?;
            let mut gates: Vec<Gate> = shifted(unitary_gates(&csd.b0, n - 1)?).collect();
            gates.extend(controlled(unitary_gates(&(&csd.b1 * csd.b0.adjoint()), n - 1)?, n - 1, true)?);
            gates.extend(rotation_gates(&csd, n));
            gates.extend(shifted(unitary_gates(&csd.a0, n - 1)?));
            gates.extend(controlled(unitary_gates(&(&csd.a1 * csd.a0.adjoint()), n - 1)?, n - 1, true)?);
            Ok(gates)
        }
    }
}

/// Exact synthesis, global phase included.
pub fn synth_unitary(u: &Matrix) -> Result<Circuit> {
    let n = qubits_of(u.nrows())?;
    if n > MAX_SYNTH_QUBITS {
        return Err(Error::DimensionCap { qubits: n, cap: MAX_SYNTH_QUBITS });
    }
    unitary_check(u)?;
    Ok(Circuit { theory: Theory::Qc, n_in: n, gates: unitary_gates(u, n)? })
}

fn zero_controlled_gates(u: &Matrix, n: usize, n_init: usize) -> Result<Vec<Gate>> {
    match n_init {
        0 => unitary_gates(u, n),
        1 => {
            let h = 1 << (n - 1);
            controlled(unitary_gates(&block(u, h, h, h, h), n - 1)?, n - 1, true)
        }
        _ => {
            let k = 1 << (n - n_init);
            let csd = csd_modified(u, k)?;
            let mut gates = controlled(zero_controlled_gates(&csd.b0_full(), n - 1, n_init - 1)?, n - 1, false)?;
            gates.extend(controlled(unitary_gates(&csd.b1, n - 1)?, n - 1, true)?);
            gates.extend(rotation_gates(&csd, n));
            gates.extend(controlled(zero_controlled_gates(&csd.a0_full(), n - 1, n_init - 1)?, n - 1, false)?);
            gates.extend(controlled(unitary_gates(&csd.a1, n - 1)?, n - 1, true)?);
            Ok(gates)
        }
    }
}

fn zero_controlled_check(u: &Matrix, n_init: usize) -> Result<usize> {
    let n = qubits_of(u.nrows())?;
    if n_init > n {
        return Err(Error::ShapeMismatch(format!("{n_init} initialised wires on a {n}-wire unitary")));
    }
    if n > MAX_SYNTH_QUBITS {
        return Err(Error::DimensionCap { qubits: n, cap: MAX_SYNTH_QUBITS });
    }
    unitary_check(u)?;
    let dev = identity_block_deviation(u, 1 << (n - n_init));
    if dev > INPUT_TOL {
        return Err(Error::BlockNotIdentity(dev));
    }
    Ok(n)
}

/// QC circuit for `u = diag(I_{2^(n−n_init)}, ·)` following the recursive
/// decomposition: the identity-carrying blocks recurse under a negative control.
pub fn zero_controlled_core(u: &Matrix, n_init: usize) -> Result<Circuit> {
    let n = zero_controlled_check(u, n_init)?;
    Ok(Circuit { theory: Theory::Qc, n_in: n, gates: zero_controlled_gates(u, n, n_init)? })
}

/// `n_init` initialisations moved to the front wires, followed by the core.
/// The result implements `|φ⟩ ↦ |0…0⟩ ⊗ |φ⟩`, since `u` fixes that subspace.
pub fn synth_zero_controlled(u: &Matrix, n_init: usize) -> Result<Circuit> {
    let n = zero_controlled_check(u, n_init)?;
    let n_in = n - n_init;
    let mut c = Circuit::new(Theory::QcIso, n_in);
    for _ in 0..n_init {
        c.push(Gate::init());
    }
    if n_init > 0 && n_in > 0 {
        let perm: Vec<usize> = (0..n).map(|i| if i < n_in { i + n_init } else { i - n_in }).collect();
        c.push(Gate::permute(perm));
    }
    c.gates.extend(zero_controlled_gates(u, n, n_init)?);
    Ok(c)
}

/// Unitary whose columns `j·2^k` are the columns of `v`. The other columns
/// come from pivoted Gram–Schmidt over the standard basis, so a `v` made of
/// basis vectors completes to a permutation matrix.
pub fn extend_isometry(v: &Matrix) -> Result<Matrix> {
    let (rows, cols) = v.shape();
    let out = qubits_of(rows)?;
    let inp = qubits_of(cols)?;
    if inp > out {
        return Err(Error::ShapeMismatch(format!("{rows}×{cols} has more columns than rows")));
    }
    let dev = isometry_deviation(v);
    if dev > INPUT_TOL {
        return Err(Error::NotIsometry(dev));
    }
    let mut basis = Matrix::zeros(rows, rows);
    basis.view_mut((0, 0), (rows, cols)).copy_from(v);
    linalg::complete_columns(&mut basis, cols);
    let stride = 1 << (out - inp);
    let mut w = Matrix::zeros(rows, rows);
    let mut extra = cols;
    for j in 0..rows {
        if j % stride == 0 {
            w.set_column(j, &basis.column(j / stride));
        } else {
            w.set_column(j, &basis.column(extra));
            extra += 1;
        }
    }
    Ok(w)
}

/// `k` initialisations followed by a synthesized completion of `v`.
pub fn synth_isometry(v: &Matrix) -> Result<Circuit> {
    let w = extend_isometry(v)?;
    let out = qubits_of(v.nrows())?;
    let inp = qubits_of(v.ncols())?;
    if out > MAX_SYNTH_QUBITS {
        return Err(Error::DimensionCap { qubits: out, cap: MAX_SYNTH_QUBITS });
    }
    let mut c = Circuit::new(Theory::QcIso, inp);
    for _ in inp..out {
        c.push(Gate::init());
    }
    c.gates.extend(unitary_gates(&w, out)?);
    Ok(c)
}

/// `|x⟩ ↦ |xx⟩`.
pub fn copy_standard_matrix() -> Matrix {
    let mut m = Matrix::zeros(4, 2);
    m[(0, 0)] = C64::new(1.0, 0.0);
    m[(3, 1)] = C64::new(1.0, 0.0);
    m
}

/// `|±⟩ ↦ |±±⟩`.
pub fn copy_diagonal_matrix() -> Matrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let h = Matrix::from_row_slice(2, 2, &[r, r, r, -r].map(|x| C64::new(x, 0.0)));
    h.kronecker(&h) * copy_standard_matrix() * h
}

pub fn copy_standard_circuit() -> Circuit {
    Circuit::new(Theory::QcIso, 1).with(Gate::init()).with(Gate::cnot(0, 1))
}

pub fn copy_diagonal_circuit() -> Circuit {
    Circuit::new(Theory::QcIso, 1)
        .with(Gate::h(0))
        .with(Gate::init())
        .with(Gate::cnot(0, 1))
        .with(Gate::h(0))
        .with(Gate::h(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::random::{gaussian_matrix, haar_unitary, random_isometry};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use crate::semantics::{eval_unitary, EvalOptions};
    use rand::Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn iso_eval(c: &Circuit) -> Matrix {
        crate::semantics::eval_natural(c, EvalOptions::default()).unwrap().1
    }

    fn crx(theta: f64) -> Matrix {
        // control wire 1, target wire 0
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let mut m = Matrix::identity(4, 4);
        m[(1, 1)] = C64::new(c, 0.0);
        m[(1, 3)] = C64::new(0.0, -s);
        m[(3, 1)] = C64::new(0.0, -s);
        m[(3, 3)] = C64::new(c, 0.0);
        m
    }

    #[test]
    fn one_rotation_pair() {
        let theta = 1.1;
        let b = csd_modified(&crx(theta), 1).unwrap();
        assert_eq!(b.d, 1);
        assert!((b.c[0] - (theta / 2.0).cos()).abs() < 1e-12);
        assert!((b.s[0] - (theta / 2.0).sin()).abs() < 1e-12);
        assert!(max_abs(&(b.reconstruct() - crx(theta))) < 1e-12);
    }

    #[test]
    fn block_diagonal_has_no_rotations() {
        let mut r = rng(3);
        let u = direct_sum(&haar_unitary(2, &mut r), &haar_unitary(2, &mut r));
        let b = csd_modified(&u, 0).unwrap();
        assert_eq!(b.d, 0);
        assert!(max_abs(&(b.reconstruct() - &u)) < 1e-12);
    }

    #[test]
    fn random_reconstruction() {
        let mut r = rng(4);
        for (dim, k) in [(8, 2), (8, 1), (8, 4), (16, 2), (16, 0)] {
            let u = direct_sum(&Matrix::identity(k, k), &haar_unitary(dim - k, &mut r));
            let b = csd_modified(&u, k).unwrap();
            assert!(max_abs(&(b.reconstruct() - &u)) < 1e-10, "dim {dim} k {k}");
            for i in 0..b.d {
                assert!((b.c[i].powi(2) + b.s[i].powi(2) - 1.0).abs() < 1e-12);
                assert!(b.c[i] < 1.0 && b.s[i] >= 0.0 && b.c[i] >= 0.0);
            }
            for f in [&b.a0, &b.a1, &b.b0, &b.b1] {
                assert!(isometry_deviation(f) < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_blocks() {
        let mut r = rng(5);
        let u = haar_unitary(4, &mut r);
        assert!(matches!(csd_modified(&u, 1), Err(Error::BlockNotIdentity(_))));
        let m = gaussian_matrix(4, 4, &mut r);
        assert!(matches!(csd_modified(&m, 0), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn multiplexor_matches_direct_sum() {
        let mut r = rng(6);
        for n in 1..=4 {
            let thetas: Vec<f64> = (0..1 << (n - 1)).map(|_| r.gen_range(-3.0..3.0)).collect();
            let c = Circuit { theory: Theory::Qc, n_in: n, gates: multiplexed_rx(n, &thetas) };
            let got = eval_unitary(&c).unwrap();
            let half = 1 << (n - 1);
            let mut want = Matrix::zeros(2 * half, 2 * half);
            for (j, &t) in thetas.iter().enumerate() {
                let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
                want[(j, j)] = C64::new(co, 0.0);
                want[(j, j + half)] = C64::new(0.0, -si);
                want[(j + half, j)] = C64::new(0.0, -si);
                want[(j + half, j + half)] = C64::new(co, 0.0);
            }
            assert!(max_abs(&(got - want)) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn unitary_round_trips() {
        assert!(synth_unitary(&Matrix::identity(8, 8)).unwrap().is_empty());
        let cx = eval_unitary(&Circuit::new(Theory::Qc, 2).with(Gate::cnot(0, 1))).unwrap();
        let c = synth_unitary(&cx).unwrap();
        assert!(max_abs(&(eval_unitary(&c).unwrap() - &cx)) < 1e-10);
        let mut r = rng(7);
        for n in 0..=4 {
            let u = haar_unitary(1 << n, &mut r);
            let c = synth_unitary(&u).unwrap();
            assert!(max_abs(&(eval_unitary(&c).unwrap() - &u)) < 1e-8, "n = {n}");
            assert_eq!(synth_unitary(&u).unwrap(), c);
        }
    }

    #[test]
    fn zero_controlled() {
        let mut r = rng(8);
        for (n, n_init) in [(2, 1), (3, 2), (3, 3), (4, 2), (2, 0)] {
            let k = 1 << (n - n_init);
            let dim = 1 << n;
            let u = direct_sum(&Matrix::identity(k, k), &haar_unitary(dim - k, &mut r));
            let core = zero_controlled_core(&u, n_init).unwrap();
            assert!(max_abs(&(eval_unitary(&core).unwrap() - &u)) < 1e-8, "core {n} {n_init}");
            let full = synth_zero_controlled(&u, n_init).unwrap();
            let embed = Matrix::identity(dim, k);
            assert!(max_abs(&(iso_eval(&full) - embed)) < 1e-8, "full {n} {n_init}");
        }
        let bare = synth_zero_controlled(&Matrix::identity(4, 4), 2).unwrap();
        assert_eq!(bare.gates, vec![Gate::init(), Gate::init()]);
    }

    #[test]
    fn isometries() {
        let c = synth_isometry(&Matrix::identity(2, 1)).unwrap();
        assert_eq!(c.gates, vec![Gate::init()]);
        let mut r = rng(9);
        for (inp, out) in [(1, 3), (0, 2), (2, 4), (1, 1)] {
            let v = random_isometry(1 << out, 1 << inp, &mut r);
            let c = synth_isometry(&v).unwrap();
            assert!(max_abs(&(iso_eval(&c) - &v)) < 1e-8, "{inp}→{out}");
        }
        for (m, reference) in
            [(copy_standard_matrix(), copy_standard_circuit()), (copy_diagonal_matrix(), copy_diagonal_circuit())]
        {
            let c = synth_isometry(&m).unwrap();
            assert!(max_abs(&(iso_eval(&c) - iso_eval(&reference))) < 1e-10);
        }
        assert!(matches!(synth_isometry(&gaussian_matrix(4, 2, &mut r)), Err(Error::NotIsometry(_))));
    }
}
