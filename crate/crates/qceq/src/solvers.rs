//! Canonical angle solvers for the parameter-determined rules.
//!
//! * Euler: `u = e^{iβ0} P(β3) Rx(β2) P(β1)` (time order: phase, `P(β1)`, `Rx(β2)`, `P(β3)`)
//!   with `β1 ∈ [0,π)`, `β0, β2, β3 ∈ [0,2π)` and `β2 ∈ {0,π} ⇒ β1 = 0`.
//! * Inverse Euler: `u = e^{iβ0} Rx(β3) P(β2) Rx(β1)` with the mirrored conditions.
//! * K*: on the two last wires `a, b` (all other wires control everything),
//!   `Λ_b Rx(γ1)_a · Λ_a P(γ2)_b · Λ_a Rx(γ3)_b · Λ_b Rx(γ4)_a` equals
//!   `P(δ2)_b · Λ_a P(δ1)_b · Λ_a Rx(δ3)_b · Λ_b Rx(δ4)_a · Λ_a P(δ5)_b · Λ_a Rx(δ6)_b · Λ_a P(δ7)_b · P(δ8)_a`,
//!   all in time order. The older form appends `P(δ9)_b`.

use serde::Serialize;
use std::f64::consts::PI;

use crate::angle::wrap;
use crate::circuit::{Circuit, Control, Gate, Theory};
use crate::error::{Error, Result};
use crate::semantics::{eval_unitary, isometry_deviation, max_deviation, Matrix, C64};

const TWO_PI: f64 = 2.0 * PI;
/// Angles this close to a special value are snapped onto it.
pub const SNAP: f64 = 1e-10;
/// Tolerance of the `{0, π}`-membership tests in canonicity checks.
pub const CLAUSE_TOL: f64 = 1e-12;
/// Euler outputs are rounded onto a `2^-35` grid so that numerically different
/// factorizations of the same matrix give bitwise-identical angles. Coarser
/// grids would break the 1e−10 reconstruction bound; see the decisions ledger
/// for the residual boundary-straddling rate.
const GRID: f64 = 34_359_738_368.0;

fn cis(a: f64) -> C64 {
    C64::from_polar(1.0, a)
}

/// Angles are snapped onto multiples of π/4, which are then exempt from the grid.
const STEP: f64 = PI / 4.0;

fn is_special(v: f64) -> bool {
    let k = (v / STEP).round();
    v == k * STEP
}

/// Reduce into `[0, period)` and snap onto multiples of π/4.
pub fn snap(v: f64, period: f64) -> f64 {
    let w = wrap(v, period);
    let k = (w / STEP).round();
    if (w - k * STEP).abs() < SNAP {
        let s = k * STEP;
        if s >= period - SNAP {
            0.0
        } else {
            s
        }
    } else {
        w
    }
}

/// Snap onto the nearest multiple of π/4 without wrapping.
fn snap_near_special(v: f64) -> f64 {
    let k = (v / STEP).round();
    if (v - k * STEP).abs() < SNAP {
        k * STEP
    } else {
        v
    }
}

fn quantize(v: f64, period: f64) -> f64 {
    if is_special(v) {
        return v;
    }
    let q = (v * GRID).round() / GRID;
    if q >= period {
        0.0
    } else {
        q
    }
}

fn near(v: f64, target: f64) -> bool {
    (v - target).abs() <= CLAUSE_TOL
}

fn in_set(v: f64, set: &[f64]) -> bool {
    set.iter().any(|&t| near(v, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EulerAngles {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl EulerAngles {
    pub fn as_array(&self) -> [f64; 4] {
        [self.b0, self.b1, self.b2, self.b3]
    }

    /// Canonicity violations (empty when canonical).
    pub fn violations(&self) -> Vec<String> {
        let mut v = vec![];
        if !(0.0..PI).contains(&self.b1) {
            v.push(format!("β1 = {} not in [0,π)", self.b1));
        }
        for (name, x) in [("β0", self.b0), ("β2", self.b2), ("β3", self.b3)] {
            if !(0.0..TWO_PI).contains(&x) {
                v.push(format!("{name} = {x} not in [0,2π)"));
            }
        }
        if in_set(self.b2, &[0.0, PI]) && !near(self.b1, 0.0) {
            v.push("β2 ∈ {0,π} but β1 ≠ 0".into());
        }
        v
    }
}

fn mat2(a: C64, b: C64, c: C64, d: C64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[a, b, c, d])
}

pub fn p_matrix(a: f64) -> Matrix {
    mat2(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), cis(a))
}

pub fn rx_matrix(a: f64) -> Matrix {
    let (s, c) = (a / 2.0).sin_cos();
    mat2(C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0))
}

fn h_matrix() -> Matrix {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    mat2(h, h, h, -h)
}

/// `e^{iβ0} P(β3) Rx(β2) P(β1)`.
pub fn zxz_matrix(e: &EulerAngles) -> Matrix {
    p_matrix(e.b3) * rx_matrix(e.b2) * p_matrix(e.b1) * cis(e.b0)
}

/// `e^{iβ0} Rx(β3) P(β2) Rx(β1)`.
pub fn xzx_matrix(e: &EulerAngles) -> Matrix {
    rx_matrix(e.b3) * p_matrix(e.b2) * rx_matrix(e.b1) * cis(e.b0)
}

fn check_unitary_2x2(u: &Matrix) -> Result<()> {
    if u.shape() != (2, 2) {
        return Err(Error::ShapeMismatch(format!("expected 2×2, got {:?}", u.shape())));
    }
    let dev = isometry_deviation(u);
    if dev > 1e-9 {
        return Err(Error::NotUnitary(dev));
    }
    Ok(())
}

/// Analytic, snapped, not yet quantized.
fn zxz_raw(u: &Matrix) -> EulerAngles {
    let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let i = C64::new(0.0, 1.0);
    // magnitudes averaged over the two entries that carry them
    let c = 0.5 * (u00.norm() + u11.norm());
    let s = 0.5 * (u01.norm() + u10.norm());
    let (b0, b1, b2, b3);
    if s < SNAP {
        b0 = u00.arg();
        b1 = 0.0;
        b2 = 0.0;
        b3 = u11.arg() - b0;
    } else if c < SNAP {
        b0 = (i * u01).arg();
        b1 = 0.0;
        b2 = PI;
        b3 = (i * u10).arg() - b0;
    } else {
        let (f00, f01, f10) = (u00.arg(), (i * u01).arg(), (i * u10).arg());
        let d = snap(f01 - f00, TWO_PI);
        let flip = d >= PI;
        b0 = if flip { f00 + PI } else { f00 };
        b1 = if flip { d - PI } else { d };
        b2 = 2.0 * s.atan2(if flip { -c } else { c });
        b3 = f10 - b0;
    }
    let b2 = snap(b2, TWO_PI);
    let b1 = if b2 == 0.0 || b2 == PI { 0.0 } else { snap(b1, PI) };
    EulerAngles { b0: snap(b0, TWO_PI), b1, b2, b3: snap(b3, TWO_PI) }
}

fn quantized(e: EulerAngles) -> EulerAngles {
    EulerAngles {
        b0: quantize(e.b0, TWO_PI),
        b1: quantize(e.b1, PI),
        b2: quantize(e.b2, TWO_PI),
        b3: quantize(e.b3, TWO_PI),
    }
}

/// Canonical `(β0, β1, β2, β3)` with `u = e^{iβ0} P(β3) Rx(β2) P(β1)`.
pub fn euler_zxz(u: &Matrix) -> Result<EulerAngles> {
    check_unitary_2x2(u)?;
    Ok(quantized(zxz_raw(u)))
}

/// Canonical `(β0, β1, β2, β3)` with `u = e^{iβ0} Rx(β3) P(β2) Rx(β1)`.
pub fn euler_xzx(u: &Matrix) -> Result<EulerAngles> {
    check_unitary_2x2(u)?;
    let h = h_matrix();
    let a = quantized(zxz_raw(&(&h * u * &h)));
    let b0 = snap(a.b0 + (a.b1 + a.b3 - a.b2) / 2.0, TWO_PI);
    Ok(EulerAngles { b0: quantize(b0, TWO_PI), ..a })
}

/// Left-hand side angles `(α1, α2, α3)` with `Rx(α3) P(α2) Rx(α1) = u`, when the
/// determinant allows it (no free global phase on that side).
pub fn rx_p_rx_angles(u: &Matrix, ignore_phase: bool) -> Result<[f64; 3]> {
    let e = euler_xzx(u)?;
    let mut a1 = e.b1;
    if !ignore_phase {
        if near_angle(e.b0, PI) {
            a1 += TWO_PI;
        } else if !near_angle(e.b0, 0.0) {
            return Err(Error::BadParameters(format!("global phase {} cannot be absorbed by Rx·P·Rx", e.b0)));
        }
    }
    Ok([a1, e.b2, e.b3])
}

/// `(α1, α2, α3)` with `P(α3) Rx(α2) P(α1) = u`.
pub fn p_rx_p_angles(u: &Matrix) -> Result<[f64; 3]> {
    let e = euler_zxz(u)?;
    let mut a2 = e.b2;
    if near_angle(e.b0, PI) {
        a2 += TWO_PI;
    } else if !near_angle(e.b0, 0.0) {
        return Err(Error::BadParameters(format!("global phase {} cannot be absorbed by P·Rx·P", e.b0)));
    }
    Ok([e.b1, a2, e.b3])
}

fn near_angle(a: f64, b: f64) -> bool {
    crate::angle::angle_dist(a, b, TWO_PI) < 1e-9
}

// ---------------------------------------------------------------- K*

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KstarAngles {
    /// `δ1..δ8` stored at indices `0..8`.
    pub delta: [f64; 8],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KstarOldAngles {
    /// `δ1..δ9` stored at indices `0..9`.
    pub delta: [f64; 9],
}

fn ctl(x: &[usize], extra: Option<usize>) -> Vec<Control> {
    x.iter().copied().chain(extra).map(Control::pos).collect()
}

/// K* left-hand side on `n ≥ 2` wires.
pub fn kstar_lhs_circuit(n: usize, g: [f64; 4]) -> Circuit {
    let x: Vec<usize> = (0..n - 2).collect();
    let (a, b) = (n - 2, n - 1);
    let gates = vec![
        Gate::rx(a, g[0]).ctrl(ctl(&x, Some(b))),
        Gate::p(b, g[1]).ctrl(ctl(&x, Some(a))),
        Gate::rx(b, g[2]).ctrl(ctl(&x, Some(a))),
        Gate::rx(a, g[3]).ctrl(ctl(&x, Some(b))),
    ];
    Circuit { theory: Theory::Qc, n_in: n, gates }
}

fn kstar_rhs_gates(n: usize, d: &[f64]) -> Vec<Gate> {
    let x: Vec<usize> = (0..n - 2).collect();
    let (a, b) = (n - 2, n - 1);
    let mut gates = vec![
        Gate::p(b, d[1]).ctrl(ctl(&x, None)),
        Gate::p(b, d[0]).ctrl(ctl(&x, Some(a))),
        Gate::rx(b, d[2]).ctrl(ctl(&x, Some(a))),
        Gate::rx(a, d[3]).ctrl(ctl(&x, Some(b))),
        Gate::p(b, d[4]).ctrl(ctl(&x, Some(a))),
        Gate::rx(b, d[5]).ctrl(ctl(&x, Some(a))),
        Gate::p(b, d[6]).ctrl(ctl(&x, Some(a))),
        Gate::p(a, d[7]).ctrl(ctl(&x, None)),
    ];
    if d.len() == 9 {
        gates.push(Gate::p(b, d[8]).ctrl(ctl(&x, None)));
    }
    gates
}

pub fn kstar_rhs_circuit(n: usize, d: &KstarAngles) -> Circuit {
    Circuit { theory: Theory::Qc, n_in: n, gates: kstar_rhs_gates(n, &d.delta) }
}

pub fn kstar_old_rhs_circuit(n: usize, d: &KstarOldAngles) -> Circuit {
    Circuit { theory: Theory::Qc, n_in: n, gates: kstar_rhs_gates(n, &d.delta) }
}

pub fn kstar_lhs_matrix(g: [f64; 4]) -> Matrix {
    eval_unitary(&kstar_lhs_circuit(2, g)).unwrap()
}

pub fn kstar_rhs_matrix(d: &KstarAngles) -> Matrix {
    eval_unitary(&kstar_rhs_circuit(2, d)).unwrap()
}

pub fn kstar_old_rhs_matrix(d: &KstarOldAngles) -> Matrix {
    eval_unitary(&kstar_old_rhs_circuit(2, d)).unwrap()
}

impl KstarAngles {
    pub fn violations(&self) -> Vec<String> {
        let d = |k: usize| self.delta[k - 1];
        let mut v = vec![];
        for k in [1, 2, 5] {
            if !(0.0..PI).contains(&d(k)) {
                v.push(format!("δ{k} = {} not in [0,π)", d(k)));
            }
        }
        for k in [3, 6, 7, 8] {
            if !(0.0..TWO_PI).contains(&d(k)) {
                v.push(format!("δ{k} = {} not in [0,2π)", d(k)));
            }
        }
        if !(0.0..2.0 * TWO_PI).contains(&d(4)) {
            v.push(format!("δ4 = {} not in [0,4π)", d(4)));
        }
        let z = |k: usize| near(d(k), 0.0);
        if z(3) && !z(6) && !z(2) {
            v.push("δ3 = 0 and δ6 ≠ 0 but δ2 ≠ 0".into());
        }
        if near(d(3), PI) && !z(1) {
            v.push("δ3 = π but δ1 ≠ 0".into());
        }
        if in_set(d(4), &[0.0, TWO_PI]) && !(z(1) && z(3)) {
            v.push("δ4 ∈ {0,2π} but δ1, δ3 not both 0".into());
        }
        if in_set(d(4), &[PI, 3.0 * PI]) && !z(2) {
            v.push("δ4 ∈ {π,3π} but δ2 ≠ 0".into());
        }
        if in_set(d(4), &[PI, 3.0 * PI]) && z(3) && !z(1) {
            v.push("δ4 ∈ {π,3π} and δ3 = 0 but δ1 ≠ 0".into());
        }
        if in_set(d(6), &[0.0, PI]) && !z(5) {
            v.push("δ6 ∈ {0,π} but δ5 ≠ 0".into());
        }
        v
    }
}

impl KstarOldAngles {
    pub fn violations(&self) -> Vec<String> {
        let d = |k: usize| self.delta[k - 1];
        let mut v = vec![];
        for k in [1, 2, 5] {
            if !(0.0..PI).contains(&d(k)) {
                v.push(format!("δ{k} = {} not in [0,π)", d(k)));
            }
        }
        for k in [3, 4, 6, 7, 8, 9] {
            if !(0.0..TWO_PI).contains(&d(k)) {
                v.push(format!("δ{k} = {} not in [0,2π)", d(k)));
            }
        }
        let z = |k: usize| near(d(k), 0.0);
        if z(3) && !z(2) {
            v.push("δ3 = 0 but δ2 ≠ 0".into());
        }
        if near(d(3), PI) && !z(1) {
            v.push("δ3 = π but δ1 ≠ 0".into());
        }
        if z(4) && !(z(1) && z(2) && z(3)) {
            v.push("δ4 = 0 but δ1, δ2, δ3 not all 0".into());
        }
        if near(d(4), PI) && !z(2) {
            v.push("δ4 = π but δ2 ≠ 0".into());
        }
        if near(d(4), PI) && z(3) && !z(1) {
            v.push("δ4 = π and δ3 = 0 but δ1 ≠ 0".into());
        }
        if in_set(d(6), &[0.0, PI]) && !z(5) {
            v.push("δ6 ∈ {0,π} but δ5 ≠ 0".into());
        }
        v
    }
}

fn block_f(d1: f64, d2: f64, d3: f64) -> Matrix {
    crate::linalg::direct_sum(&p_matrix(d2), &(rx_matrix(d3) * p_matrix(d1 + d2)))
}

fn block_w(d4: f64) -> Matrix {
    // Λ_b Rx(δ4)_a: mixes |01⟩ and |11⟩
    let r = rx_matrix(d4);
    let mut w = Matrix::identity(4, 4);
    w[(1, 1)] = r[(0, 0)];
    w[(1, 3)] = r[(0, 1)];
    w[(3, 1)] = r[(1, 0)];
    w[(3, 3)] = r[(1, 1)];
    w
}

/// Analytic extraction of δ from the 4×4 restriction of the LHS.
fn kstar_from_matrix(t: &Matrix) -> Result<[f64; 8]> {
    let (t11, t12, t13) = (t[(1, 1)], t[(1, 2)], t[(1, 3)]);
    let i = C64::new(0.0, 1.0);
    let (d2, c4) = if t11.norm() < SNAP {
        (0.0, 0.0)
    } else {
        let d2 = snap(t11.arg(), PI);
        (d2, (t11 * cis(-d2)).re)
    };
    let s4abs = (t12.norm_sqr() + t13.norm_sqr()).sqrt();
    let (d1, d3, d4);
    if s4abs < SNAP {
        d1 = 0.0;
        d3 = 0.0;
        d4 = if c4 > 0.0 { 0.0 } else { TWO_PI };
    } else if t12.norm() >= SNAP {
        let s4 = if t12.re < 0.0 { s4abs } else { -s4abs };
        let s3 = -t12.re / s4;
        let z = i * t13 / s4;
        if z.norm() < SNAP {
            d1 = 0.0;
            d3 = PI;
        } else {
            d1 = snap(z.arg() - d2, PI);
            let c3 = (z * cis(-(d1 + d2))).re;
            d3 = snap(2.0 * s3.atan2(c3), TWO_PI);
        }
        d4 = snap(2.0 * s4.atan2(c4), 2.0 * TWO_PI);
    } else {
        let z = i * t13;
        d3 = 0.0;
        d1 = snap(z.arg() - d2, PI);
        let s4 = (z * cis(-(d1 + d2))).re;
        d4 = snap(2.0 * s4.atan2(c4), 2.0 * TWO_PI);
    }
    let rest = t * block_f(d1, d2, d3).adjoint() * block_w(d4).adjoint();
    let e1 = crate::linalg::block(&rest, 2, 2, 2, 2);
    let off = crate::linalg::max_abs(&crate::linalg::block(&rest, 0, 2, 2, 2))
        .max(crate::linalg::max_abs(&crate::linalg::block(&rest, 2, 0, 2, 2)));
    if off > 1e-8 {
        return Err(Error::SolveFailure(format!("residual coupling {off:.2e} after peeling F and W")));
    }
    let e = quantized(zxz_raw(&e1));
    Ok([d1, d2, d3, d4, e.b1, e.b2, e.b3, e.b0])
}

/// Canonical right-hand side of K* for left-hand side angles `γ`.
pub fn solve_kstar(gamma: [f64; 4]) -> Result<KstarAngles> {
    let t = kstar_lhs_matrix(gamma);
    let mut delta = kstar_from_matrix(&t)?;
    let residual = |d: &[f64]| {
        let k = KstarAngles { delta: d.try_into().unwrap() };
        max_deviation(&kstar_rhs_matrix(&k), &t).unwrap()
    };
    if residual(&delta) > 1e-11 {
        // bounded polish: canonical branch fixed by the analytic seed
        let polished = least_squares(
            |d| {
                let k = KstarAngles { delta: d.try_into().unwrap() };
                complex_residual(&kstar_rhs_matrix(&k), &t)
            },
            &delta,
            50,
        );
        let polished: Vec<f64> = polished.iter().map(|&v| snap_near_special(v)).collect();
        let candidate = KstarAngles { delta: polished.clone().try_into().unwrap() };
        if residual(&polished) < residual(&delta) && candidate.violations().is_empty() {
            delta = candidate.delta;
        }
    }
    let out = KstarAngles { delta };
    let res = residual(&out.delta);
    if res > 1e-9 {
        return Err(Error::SolveFailure(format!("reconstruction residual {res:.2e}")));
    }
    let v = out.violations();
    if !v.is_empty() {
        return Err(Error::SolveFailure(format!("non-canonical δ: {}", v.join("; "))));
    }
    Ok(out)
}

pub fn solve_kstar_old(gamma: [f64; 4]) -> Result<KstarOldAngles> {
    kstar_old_from_new(&solve_kstar(gamma)?)
}

/// `g`: K* tuple to the older nine-angle form.
pub fn kstar_old_from_new(dp: &KstarAngles) -> Result<KstarOldAngles> {
    let v = dp.violations();
    if !v.is_empty() {
        return Err(Error::InvalidInput(v.join("; ")));
    }
    let d = |k: usize| dp.delta[k - 1];
    let z = |k: usize| near(d(k), 0.0);
    let upper = d(4) >= TWO_PI;
    let phase_moves = z(3) && !z(2);
    let flip6 = !z(6) && upper;
    let out = [
        d(1),
        if phase_moves { 0.0 } else { d(2) },
        d(3),
        if upper { d(4) - TWO_PI } else { d(4) },
        d(5),
        if flip6 { TWO_PI - d(6) } else { d(6) },
        d(7),
        if flip6 { (d(8) + PI).rem_euclid(TWO_PI) } else { d(8) },
        match (phase_moves, upper) {
            (true, false) => d(2),
            (true, true) => d(2) + PI,
            (false, false) => 0.0,
            (false, true) => PI,
        },
    ];
    Ok(KstarOldAngles { delta: out })
}

/// `f`: older nine-angle form back to a K* tuple.
pub fn kstar_new_from_old(d9: &KstarOldAngles) -> Result<KstarAngles> {
    let v = d9.violations();
    if !v.is_empty() {
        return Err(Error::InvalidInput(v.join("; ")));
    }
    let d = |k: usize| d9.delta[k - 1];
    let nine = d(9);
    let nine_special = in_set(nine, &[0.0, PI]);
    let flip6 = near(nine, PI) && !near(d(6), 0.0);
    let out = [
        d(1),
        if nine_special {
            d(2)
        } else if nine < PI {
            nine
        } else {
            nine - PI
        },
        d(3),
        if nine < PI - CLAUSE_TOL { d(4) } else { d(4) + TWO_PI },
        d(5),
        if flip6 { TWO_PI - d(6) } else { d(6) },
        d(7),
        if flip6 { (d(8) + PI).rem_euclid(TWO_PI) } else { d(8) },
    ];
    Ok(KstarAngles { delta: out })
}

/// Left-hand side angles reproducing a given K* right-hand side (numeric fit).
pub fn kstar_lhs_from_rhs(d: &KstarAngles) -> Result<[f64; 4]> {
    let target = kstar_rhs_matrix(d);
    fit_lhs(&target, 4, |g| kstar_lhs_matrix(g.try_into().unwrap()))
        .map(|g| g.try_into().unwrap())
}

/// Deterministic multi-start least-squares fit of `build(params) ≈ target`.
pub fn fit_lhs(target: &Matrix, n: usize, build: impl Fn(&[f64]) -> Matrix) -> Result<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best = (f64::INFINITY, vec![0.0; n]);
    for attempt in 0..64 {
        let x0: Vec<f64> = if attempt == 0 { vec![0.0; n] } else { (0..n).map(|_| rng.gen_range(-PI..PI)).collect() };
        let x = least_squares(|p| complex_residual(&build(p), target), &x0, 100);
        let r = max_deviation(&build(&x), target).unwrap();
        if r < best.0 {
            best = (r, x);
        }
        if best.0 < 1e-12 {
            break;
        }
    }
    if best.0 > 1e-9 {
        return Err(Error::BadParameters(format!("no left-hand side reproduces the right-hand side (residual {:.2e})", best.0)));
    }
    Ok(best.1)
}

fn complex_residual(a: &Matrix, b: &Matrix) -> Vec<f64> {
    a.iter().zip(b.iter()).flat_map(|(x, y)| [(x - y).re, (x - y).im]).collect()
}

/// Levenberg–Marquardt with a forward-difference Jacobian.
pub fn least_squares(f: impl Fn(&[f64]) -> Vec<f64>, x0: &[f64], iters: usize) -> Vec<f64> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    for _ in 0..iters {
        if cost < 1e-28 {
            break;
        }
        let m = r.len();
        let h = 1e-7;
        let mut jac = nalgebra::DMatrix::<f64>::zeros(m, n);
        for k in 0..n {
            let mut xp = x.clone();
            xp[k] += h;
            let rp = f(&xp);
            for i in 0..m {
                jac[(i, k)] = (rp[i] - r[i]) / h;
            }
        }
        let rv = nalgebra::DVector::from_vec(r.clone());
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * rv;
        let mut improved = false;
        for _ in 0..10 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * (1.0 + jtj[(k, k)]);
            }
            let Some(step) = a.lu().solve(&jtr) else { break };
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - s).collect();
            let rn = f(&xn);
            let cn: f64 = rn.iter().map(|v| v * v).sum();
            if cn < cost {
                x = xn;
                r = rn;
                cost = cn;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::haar_unitary;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dev(a: &Matrix, b: &Matrix) -> f64 {
        max_deviation(a, b).unwrap()
    }

    #[test]
    fn euler_identity_and_phase_gate() {
        let e = euler_zxz(&Matrix::identity(2, 2)).unwrap();
        assert_eq!(e.as_array(), [0.0; 4]);
        let e = euler_zxz(&p_matrix(1.3)).unwrap();
        assert_eq!((e.b0, e.b1, e.b2), (0.0, 0.0, 0.0));
        assert!((e.b3 - 1.3).abs() < 1e-10);
    }

    #[test]
    fn euler_hadamard_matches_rule_i() {
        let e = euler_zxz(&h_matrix()).unwrap();
        assert!(dev(&zxz_matrix(&e), &h_matrix()) < 1e-10);
        assert!(e.violations().is_empty());
        // H = P(π/2) Rx(π/2) P(π/2) exactly, so the phase is 0
        assert_eq!(e.as_array(), [0.0, PI / 2.0, PI / 2.0, PI / 2.0].map(|v| quantize(v, TWO_PI)));
    }

    #[test]
    fn euler_random_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let u = haar_unitary(2, &mut rng);
            let e = euler_zxz(&u).unwrap();
            assert!(dev(&zxz_matrix(&e), &u) < 1e-10);
            assert!(e.violations().is_empty(), "{:?}", e.violations());
            let x = euler_xzx(&u).unwrap();
            assert!(dev(&xzx_matrix(&x), &u) < 1e-10);
            assert!(x.violations().is_empty());
        }
    }

    #[test]
    fn euler_rejects_non_unitary() {
        let m = Matrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(matches!(euler_zxz(&m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn xzx_of_rx() {
        let e = euler_xzx(&rx_matrix(2.1)).unwrap();
        assert!(dev(&xzx_matrix(&e), &rx_matrix(2.1)) < 1e-10);
    }

    #[test]
    fn kstar_zero_and_random() {
        assert_eq!(solve_kstar([0.0; 4]).unwrap().delta, [0.0; 8]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let g = [0; 4].map(|_| crate::random::angle_with_specials(&mut rng));
            let d = solve_kstar(g).unwrap_or_else(|e| panic!("{g:?}: {e}"));
            assert!(dev(&kstar_rhs_matrix(&d), &kstar_lhs_matrix(g)) < 1e-9);
        }
    }

    #[test]
    fn kstar_two_pi_rotation() {
        let g = [0.0, 0.0, 0.0, TWO_PI];
        let d = solve_kstar(g).unwrap();
        assert!(dev(&kstar_rhs_matrix(&d), &kstar_lhs_matrix(g)) < 1e-12);
        assert_eq!(d.delta, [0.0, 0.0, 0.0, TWO_PI, 0.0, 0.0, 0.0, 0.0]);
        // in the older form the 2π rotation becomes a trailing P(π)
        let old = kstar_old_from_new(&d).unwrap();
        assert_eq!(old.delta, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, PI]);
    }

    #[test]
    fn conversions_round_trip_and_agree_semantically() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let g = [0; 4].map(|_| if rng.gen_bool(0.3) { rng.gen_range(-3..5) as f64 * PI } else { crate::random::angle(&mut rng) });
            let d = solve_kstar(g).unwrap();
            let old = kstar_old_from_new(&d).unwrap();
            assert!(old.violations().is_empty(), "{:?}", old.violations());
            assert!(dev(&kstar_old_rhs_matrix(&old), &kstar_rhs_matrix(&d)) < 1e-9);
            let back = kstar_new_from_old(&old).unwrap();
            for k in 0..8 {
                assert!((back.delta[k] - d.delta[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lhs_fit() {
        let d = solve_kstar([0.3, -1.2, 2.0, 0.7]).unwrap();
        let g = kstar_lhs_from_rhs(&d).unwrap();
        assert!(dev(&kstar_lhs_matrix(g), &kstar_rhs_matrix(&d)) < 1e-9);
    }
}

