//! Dense factorizations with fixed phase conventions: triangular factors have
//! non-negative real diagonals, singular values are sorted descending.

use crate::semantics::{Matrix, C64};

const TINY: f64 = 1e-300;

/// Householder QR, `m = Q R` with `Q` unitary (rows×rows) and `R` upper triangular.
pub fn qr(m: &Matrix) -> (Matrix, Matrix) {
    let (rows, cols) = m.shape();
    let mut r = m.clone();
    let mut q = Matrix::identity(rows, rows);
    for k in 0..rows.min(cols) {
        let norm: f64 = (k..rows).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm < TINY {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = (k..rows).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vn < TINY {
            continue;
        }
        let f = 2.0 / vn;
        for j in k..cols {
            let s: C64 = v.iter().enumerate().map(|(a, vi)| vi.conj() * r[(k + a, j)]).sum();
            for (a, vi) in v.iter().enumerate() {
                r[(k + a, j)] -= *vi * s * f;
            }
        }
        for i in 0..rows {
            let s: C64 = v.iter().enumerate().map(|(a, vi)| q[(i, k + a)] * vi).sum();
            for (a, vi) in v.iter().enumerate() {
                q[(i, k + a)] -= s * f * vi.conj();
            }
        }
        for i in k + 1..rows {
            r[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    for k in 0..rows.min(cols) {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            for j in 0..cols {
                r[(k, j)] *= ph.conj();
            }
            r[(k, k)] = C64::new(r[(k, k)].re, 0.0);
            for i in 0..rows {
                q[(i, k)] *= ph;
            }
        }
    }
    (q, r)
}

fn reversed(m: &Matrix) -> Matrix {
    let (r, c) = m.shape();
    Matrix::from_fn(r, c, |i, j| m[(r - 1 - i, c - 1 - j)])
}

/// `m = Q L` with `L` lower triangular (square input).
pub fn ql(m: &Matrix) -> (Matrix, Matrix) {
    let (q, r) = qr(&reversed(m));
    (reversed(&q), reversed(&r))
}

/// `m = R Q` with `R` upper triangular (square input).
pub fn rq(m: &Matrix) -> (Matrix, Matrix) {
    let (q, l) = ql(&m.adjoint());
    (l.adjoint(), q.adjoint())
}

/// `m = U diag(d) V` with `d` descending, `U` and `V` unitary (square input).
///
/// One-sided Jacobi rather than the bidiagonal QR in nalgebra, whose complex
/// path loses accuracy on rank-deficient blocks (exactly the cosine blocks of
/// permutation-like unitaries). Columns of `U` belonging to (near-)zero singular
/// values are completed from the standard basis.
pub fn svd(m: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "svd expects a square matrix");
    let mut w = m.clone();
    let mut v = Matrix::identity(n, n);
    let col_dot = |a: &Matrix, p: usize, q: usize| -> C64 { (0..n).map(|i| a[(i, p)].conj() * a[(i, q)]).sum() };
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = col_dot(&w, p, p).re;
                let beta = col_dot(&w, q, q).re;
                let gamma = col_dot(&w, p, q);
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g < TINY {
                    continue;
                }
                rotated = true;
                let ph = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for a in [&mut w, &mut v] {
                    for i in 0..n {
                        let xp = a[(i, p)];
                        let xq = a[(i, q)] * ph.conj();
                        a[(i, p)] = xp * c - xq * s;
                        a[(i, q)] = xp * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| col_dot(&w, j, j).re.sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
    let d: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut u = Matrix::zeros(n, n);
    let mut filled = 0;
    for (col, &j) in order.iter().enumerate() {
        if d[col] <= TINY {
            break;
        }
        let mut x: Vec<C64> = (0..n).map(|i| w[(i, j)] / d[col]).collect();
        if orthonormalize_against(&u, filled, &mut x) > 0.5 {
            u.column_mut(filled).copy_from_slice(&x);
            filled += 1;
        } else {
            break;
        }
    }
    // tiny singular values: their direction is noise, so complete instead
    complete_columns(&mut u, filled);
    let v_adj = Matrix::from_fn(n, n, |i, j| v[(j, order[i])].conj());
    (u, d, v_adj)
}

/// Projects `x` off the first `k` columns of `basis` (twice) and normalizes;
/// returns the norm that survived the projection.
fn orthonormalize_against(basis: &Matrix, k: usize, x: &mut [C64]) -> f64 {
    let before: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for _ in 0..2 {
        for c in 0..k {
            let dot: C64 = (0..x.len()).map(|i| basis[(i, c)].conj() * x[i]).sum();
            for (i, xi) in x.iter_mut().enumerate() {
                *xi -= basis[(i, c)] * dot;
            }
        }
    }
    let after: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if after > 0.0 {
        x.iter_mut().for_each(|z| *z /= after);
    }
    if before > 0.0 { after / before } else { 0.0 }
}

/// Fills columns `k..` of `u` with an orthonormal completion of the first `k`,
/// greedily taking the standard basis vector with the largest residual.
pub fn complete_columns(u: &mut Matrix, mut k: usize) {
    let n = u.nrows();
    while k < u.ncols() {
        let (mut best, mut best_res) = (0, -1.0);
        for e in 0..n {
            let res = 1.0 - (0..k).map(|c| u[(e, c)].norm_sqr()).sum::<f64>();
            if res > best_res {
                best = e;
                best_res = res;
            }
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        x[best] = C64::new(1.0, 0.0);
        orthonormalize_against(u, k, &mut x);
        u.column_mut(k).copy_from_slice(&x);
        k += 1;
    }
}

pub fn diag(d: &[f64]) -> Matrix {
    Matrix::from_fn(d.len(), d.len(), |i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn block(m: &Matrix, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
    m.view((r0, c0), (rows, cols)).into_owned()
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn direct_sum(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut m = Matrix::zeros(ra + rb, ca + cb);
    m.view_mut((0, 0), (ra, ca)).copy_from(a);
    m.view_mut((ra, ca), (rb, cb)).copy_from(b);
    m
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::gaussian_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn upper(m: &Matrix) -> bool {
        (0..m.nrows()).all(|i| (0..m.ncols().min(i)).all(|j| m[(i, j)].norm() == 0.0))
    }

    fn lower(m: &Matrix) -> bool {
        upper(&m.transpose())
    }

    fn nonneg_diag(m: &Matrix) -> bool {
        (0..m.nrows().min(m.ncols())).all(|i| m[(i, i)].im == 0.0 && m[(i, i)].re >= 0.0)
    }

    #[test]
    fn identity_factors() {
        let i = Matrix::identity(4, 4);
        let (q, r) = qr(&i);
        assert!(max_abs(&(q - &i)) < 1e-15 && max_abs(&(r - &i)) < 1e-15);
    }

    #[test]
    fn diagonal_phases_go_to_q() {
        let d = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(0.0, 2.0), C64::new(-3.0, 0.0)]));
        let (q, r) = qr(&d);
        assert!((r[(0, 0)].re - 2.0).abs() < 1e-15 && (r[(1, 1)].re - 3.0).abs() < 1e-15);
        assert!((q[(0, 0)] - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn random_factorizations_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let m = gaussian_matrix(8, 8, &mut rng);
            let (q, r) = qr(&m);
            assert!(upper(&r) && nonneg_diag(&r));
            assert!(max_abs(&(&q * &r - &m)) < 1e-11);
            let (q, l) = ql(&m);
            assert!(lower(&l) && nonneg_diag(&l));
            assert!(max_abs(&(&q * &l - &m)) < 1e-11);
            let (r, q) = rq(&m);
            assert!(upper(&r) && nonneg_diag(&r));
            assert!(max_abs(&(&r * &q - &m)) < 1e-11);
            let (u, d, v) = svd(&m);
            assert!(d.windows(2).all(|w| w[0] >= w[1]));
            assert!(max_abs(&(&u * diag(&d) * &v - &m)) < 1e-11);
        }
    }
}
