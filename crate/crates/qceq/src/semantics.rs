//! Dense semantics: unitaries/isometries for circuits without discard, and
//! superoperators (row-vectorised, `vec(ρ)[i·d + j] = ρ_ij`, gates lifted as
//! `U ⊗ conj(U)`) for circuits with discard.
//!
//! Gates act by index arithmetic on the basis; no `gate ⊗ I` matrix is ever built.

use nalgebra::DMatrix;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::circuit::{Circuit, Control, Gate, GateKind, Theory};
use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type Matrix = DMatrix<C64>;

pub const DEFAULT_MAX_QUBITS: usize = 12;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    pub max_qubits: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { max_qubits: DEFAULT_MAX_QUBITS }
    }
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn cis(a: f64) -> C64 {
    C64::from_polar(1.0, a)
}

/// Matrix of the target action (controls excluded), wires in target order.
pub fn local_matrix(kind: &GateKind) -> Vec<C64> {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    match kind {
        GateKind::H => vec![h, h, h, -h],
        GateKind::P(a) => vec![ONE, ZERO, ZERO, cis(*a)],
        GateKind::X => vec![ZERO, ONE, ONE, ZERO],
        GateKind::Z => vec![ONE, ZERO, ZERO, -ONE],
        GateKind::Rx(a) => {
            let (s, c) = (a / 2.0).sin_cos();
            let c = C64::new(c, 0.0);
            let mis = C64::new(0.0, -s);
            vec![c, mis, mis, c]
        }
        GateKind::Swap => {
            let mut m = vec![ZERO; 16];
            for (r, col) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
                m[r * 4 + col] = ONE;
            }
            m
        }
        _ => unreachable!("no local matrix for {:?}", kind),
    }
}

/// The target matrix and full control list of a unitary gate.
fn lower(g: &Gate) -> (Vec<C64>, Vec<usize>, Vec<Control>) {
    let mut controls = g.controls.clone();
    let t = &g.targets;
    match g.kind {
        GateKind::CNot => {
            controls.push(Control::pos(t[0]));
            (local_matrix(&GateKind::X), vec![t[1]], controls)
        }
        GateKind::Toffoli => {
            controls.extend([Control::pos(t[0]), Control::pos(t[1])]);
            (local_matrix(&GateKind::X), vec![t[2]], controls)
        }
        GateKind::Fredkin => {
            controls.push(Control::pos(t[0]));
            (local_matrix(&GateKind::Swap), vec![t[1], t[2]], controls)
        }
        _ => (local_matrix(&g.kind), t.clone(), controls),
    }
}

/// A batch of state vectors over `wires` qubits, stored column-major.
#[derive(Clone, Debug)]
struct Register {
    wires: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Register {
    fn identity(wires: usize) -> Self {
        let d = 1 << wires;
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            data[i * d + i] = ONE;
        }
        Register { wires, cols: d, data }
    }

    fn dim(&self) -> usize {
        1 << self.wires
    }

    fn bit(&self, wire: usize) -> usize {
        1 << (self.wires - 1 - wire)
    }

    fn scale(&mut self, z: C64) {
        for v in &mut self.data {
            *v *= z;
        }
    }

    fn apply(&mut self, u: &[C64], targets: &[usize], controls: &[Control], conj: bool) {
        let m = targets.len();
        let k = 1 << m;
        let offsets: Vec<usize> = (0..k)
            .map(|s| (0..m).filter(|&b| s >> (m - 1 - b) & 1 == 1).map(|b| self.bit(targets[b])).sum())
            .collect();
        let tmask: usize = targets.iter().map(|&t| self.bit(t)).sum();
        let (cmask, cval) = controls.iter().fold((0, 0), |(mk, v), c| {
            let b = self.bit(c.wire);
            (mk | b, if c.positive { v | b } else { v })
        });
        let u: Vec<C64> = if conj { u.iter().map(|z| z.conj()).collect() } else { u.to_vec() };
        let d = self.dim();
        let mut buf = vec![ZERO; k];
        for col in 0..self.cols {
            let base = col * d;
            for i in 0..d {
                if i & tmask != 0 || i & cmask != cval {
                    continue;
                }
                for s in 0..k {
                    buf[s] = self.data[base + i + offsets[s]];
                }
                for r in 0..k {
                    let mut acc = ZERO;
                    for s in 0..k {
                        acc += u[r * k + s] * buf[s];
                    }
                    self.data[base + i + offsets[r]] = acc;
                }
            }
        }
    }

    /// Insert a `|0⟩` wire so that it becomes wire `p`.
    fn insert_zero(&mut self, p: usize) {
        let nw = self.wires + 1;
        let low_bits = nw - 1 - p;
        let (od, nd) = (self.dim(), 1 << nw);
        let mut data = vec![ZERO; nd * self.cols];
        for col in 0..self.cols {
            for i in 0..od {
                let low = i & ((1 << low_bits) - 1);
                let high = i >> low_bits;
                data[col * nd + ((high << (low_bits + 1)) | low)] = self.data[col * od + i];
            }
        }
        self.wires = nw;
        self.data = data;
    }

    fn new_index(i: usize, removed_bits: &[usize]) -> usize {
        // drop the listed bit positions (descending order) from i
        let mut v = i;
        for &b in removed_bits {
            let low = v & ((1 << b) - 1);
            v = ((v >> (b + 1)) << b) | low;
        }
        v
    }

    /// Project wire `p` onto `⟨0|`.
    fn select_zero(&mut self, p: usize) {
        let b = self.wires - 1 - p;
        let (od, nd) = (self.dim(), self.dim() / 2);
        let mut data = vec![ZERO; nd * self.cols];
        for col in 0..self.cols {
            for i in 0..od {
                if i >> b & 1 == 0 {
                    data[col * nd + Self::new_index(i, &[b])] = self.data[col * od + i];
                }
            }
        }
        self.wires -= 1;
        self.data = data;
    }

    /// Sum over the diagonal of the wire pair `(p, q)` and remove both.
    fn trace_pair(&mut self, p: usize, q: usize) {
        let (bp, bq) = (self.wires - 1 - p, self.wires - 1 - q);
        let mut removed = [bp, bq];
        removed.sort_unstable_by(|a, b| b.cmp(a));
        let (od, nd) = (self.dim(), self.dim() / 4);
        let mut data = vec![ZERO; nd * self.cols];
        for col in 0..self.cols {
            for i in 0..od {
                if (i >> bp & 1) == (i >> bq & 1) {
                    data[col * nd + Self::new_index(i, &removed)] += self.data[col * od + i];
                }
            }
        }
        self.wires -= 2;
        self.data = data;
    }

    /// Move wire `w` to position `perm[w]` for every wire.
    fn permute(&mut self, perm: &[usize]) {
        let d = self.dim();
        let n = self.wires;
        let mut data = vec![ZERO; d * self.cols];
        for i in 0..d {
            let mut j = 0;
            for (w, &to) in perm.iter().enumerate() {
                if i >> (n - 1 - w) & 1 == 1 {
                    j |= 1 << (n - 1 - to);
                }
            }
            for col in 0..self.cols {
                data[col * d + j] = self.data[col * d + i];
            }
        }
        self.data = data;
    }

    fn into_matrix(self) -> Matrix {
        Matrix::from_vec(self.dim(), self.cols, self.data)
    }
}

fn check_cap(qubits: usize, cap: usize) -> Result<()> {
    if qubits > cap {
        return Err(Error::DimensionCap { qubits, cap });
    }
    Ok(())
}

pub fn eval_unitary(c: &Circuit) -> Result<Matrix> {
    eval_unitary_with(c, EvalOptions::default())
}

/// `2^{n_out} × 2^{n_in}` matrix of a circuit without discard. `Free` acts as `⟨0|`.
pub fn eval_unitary_with(c: &Circuit, opts: EvalOptions) -> Result<Matrix> {
    if c.theory == Theory::QcGround || c.gates.iter().any(|g| g.kind == GateKind::Discard) {
        return Err(Error::UnsupportedTheory { theory: c.theory.to_string(), what: "unitary semantics".into() });
    }
    check_cap(c.width(), opts.max_qubits)?;
    c.validate()?;
    let mut reg = Register::identity(c.n_in);
    for g in &c.gates {
        match &g.kind {
            GateKind::GlobalPhase(a) => reg.scale(cis(*a)),
            GateKind::Init => reg.insert_zero(reg.wires),
            GateKind::Free => reg.select_zero(g.targets[0]),
            GateKind::Permute(p) => reg.permute(p),
            GateKind::Discard => unreachable!(),
            _ => {
                let (u, targets, controls) = lower(g);
                reg.apply(&u, &targets, &controls, false);
            }
        }
    }
    Ok(reg.into_matrix())
}

/// Superoperator `4^{n_out} × 4^{n_in}` on row-vectorised density matrices.
/// Any theory is accepted; phases vanish under conjugation.
pub fn eval_cptp(c: &Circuit) -> Result<Matrix> {
    eval_cptp_with(c, EvalOptions::default())
}

pub fn eval_cptp_with(c: &Circuit, opts: EvalOptions) -> Result<Matrix> {
    check_cap(2 * c.width(), opts.max_qubits)?;
    c.validate()?;
    if c.gates.iter().any(|g| g.kind == GateKind::Free) {
        return Err(Error::UnsupportedTheory { theory: c.theory.to_string(), what: "superoperator with Free".into() });
    }
    let mut live = c.n_in;
    let mut reg = Register::identity(2 * live);
    for g in &c.gates {
        match &g.kind {
            GateKind::GlobalPhase(_) => {}
            GateKind::Init => {
                reg.insert_zero(live);
                reg.insert_zero(2 * live + 1);
                live += 1;
            }
            GateKind::Discard => {
                let k = g.targets[0];
                reg.trace_pair(k, live + k);
                live -= 1;
            }
            GateKind::Permute(p) => {
                let mut full = p.clone();
                full.extend(p.iter().map(|&x| x + live));
                reg.permute(&full);
            }
            GateKind::Free => unreachable!(),
            _ => {
                let (u, targets, controls) = lower(g);
                reg.apply(&u, &targets, &controls, false);
                let shift = |w: usize| w + live;
                let t2: Vec<usize> = targets.iter().map(|&w| shift(w)).collect();
                let c2: Vec<Control> = controls.iter().map(|c| Control { wire: shift(c.wire), ..*c }).collect();
                reg.apply(&u, &t2, &c2, true);
            }
        }
    }
    Ok(reg.into_matrix())
}

/// Superoperator `ρ ↦ VρV†` of a (possibly rectangular) linear map.
pub fn conjugation_superop(v: &Matrix) -> Matrix {
    v.kronecker(&v.map(|z| z.conj()))
}

/// Apply a superoperator to a density matrix.
pub fn apply_superop(s: &Matrix, rho: &Matrix) -> Matrix {
    let d_in = rho.nrows();
    let d_out = (s.nrows() as f64).sqrt().round() as usize;
    let v = Matrix::from_fn(d_in * d_in, 1, |k, _| rho[(k / d_in, k % d_in)]);
    let w = s * v;
    Matrix::from_fn(d_out, d_out, |i, j| w[(i * d_out + j, 0)])
}

/// Choi matrix `Σ_ij |i⟩⟨j| ⊗ S(|i⟩⟨j|)`, input factor first.
pub fn choi(s: &Matrix) -> Matrix {
    let d_in = (s.ncols() as f64).sqrt().round() as usize;
    let d_out = (s.nrows() as f64).sqrt().round() as usize;
    Matrix::from_fn(d_in * d_out, d_in * d_out, |r, c| {
        let (i, a) = (r / d_out, r % d_out);
        let (j, b) = (c / d_out, c % d_out);
        s[(a * d_out + b, i * d_in + j)]
    })
}

pub fn max_deviation(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

pub fn matrices_equal(a: &Matrix, b: &Matrix, tol: f64) -> Result<bool> {
    Ok(max_deviation(a, b)? <= tol)
}

/// Deviation of `M†M` from the identity.
pub fn isometry_deviation(m: &Matrix) -> f64 {
    let g = m.adjoint() * m;
    max_deviation(&g, &Matrix::identity(m.ncols(), m.ncols())).unwrap()
}

pub fn is_isometry(m: &Matrix, tol: f64) -> bool {
    m.nrows() >= m.ncols() && isometry_deviation(m) <= tol
}

pub fn is_unitary(m: &Matrix, tol: f64) -> bool {
    m.is_square() && isometry_deviation(m) <= tol
}

/// Trace preservation plus positivity of the Choi matrix (eigenvalues ≥ −tol).
pub fn is_cptp(s: &Matrix, tol: f64) -> bool {
    let d_in = (s.ncols() as f64).sqrt().round() as usize;
    let d_out = (s.nrows() as f64).sqrt().round() as usize;
    if d_in * d_in != s.ncols() || d_out * d_out != s.nrows() {
        return false;
    }
    let j = choi(s);
    for i in 0..d_in {
        for k in 0..d_in {
            let tr: C64 = (0..d_out).map(|a| j[(i * d_out + a, k * d_out + a)]).sum();
            let want = if i == k { ONE } else { ZERO };
            if (tr - want).norm() > tol {
                return false;
            }
        }
    }
    let herm = (&j + j.adjoint()) * C64::new(0.5, 0.0);
    if max_deviation(&herm, &j).unwrap() > tol {
        return false;
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(herm);
    eig.eigenvalues.iter().all(|&l| l >= -tol)
}

/// The same circuit with global phases removed and relabelled as a ground circuit.
pub fn to_ground(c: &Circuit) -> Circuit {
    let gates = c.gates.iter().filter(|g| !matches!(g.kind, GateKind::GlobalPhase(_))).cloned().collect();
    Circuit { theory: Theory::QcGround, n_in: c.n_in, gates }
}

/// Which semantics a comparison used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SemanticsKind {
    #[serde(rename = "unitary")]
    Unitary,
    #[serde(rename = "isometry")]
    Isometry,
    #[serde(rename = "cptp")]
    Cptp,
}

/// Evaluate in the natural semantics of the circuit's theory.
pub fn eval_natural(c: &Circuit, opts: EvalOptions) -> Result<(SemanticsKind, Matrix)> {
    let discards = c.gates.iter().any(|g| g.kind == GateKind::Discard);
    if c.theory == Theory::QcGround || discards {
        Ok((SemanticsKind::Cptp, eval_cptp_with(c, opts)?))
    } else if c.has_structural() || c.theory != Theory::Qc {
        Ok((SemanticsKind::Isometry, eval_unitary_with(c, opts)?))
    } else {
        Ok((SemanticsKind::Unitary, eval_unitary_with(c, opts)?))
    }
}

/// Max deviation between two circuits; errors on arity mismatch.
pub fn circuit_deviation(a: &Circuit, b: &Circuit, opts: EvalOptions) -> Result<(SemanticsKind, f64)> {
    if a.n_in != b.n_in || a.n_out() != b.n_out() {
        return Err(Error::ArityMismatch(format!(
            "{}→{} vs {}→{}",
            a.n_in,
            a.n_out(),
            b.n_in,
            b.n_out()
        )));
    }
    let ground = [a, b].iter().any(|c| c.theory == Theory::QcGround || c.gates.iter().any(|g| g.kind == GateKind::Discard));
    if ground {
        let sa = eval_cptp_with(a, opts)?;
        let sb = eval_cptp_with(b, opts)?;
        return Ok((SemanticsKind::Cptp, max_deviation(&sa, &sb)?));
    }
    let (ka, ma) = eval_natural(a, opts)?;
    let (_, mb) = eval_natural(b, opts)?;
    Ok((ka, max_deviation(&ma, &mb)?))
}
