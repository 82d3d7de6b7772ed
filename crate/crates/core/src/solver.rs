//! Linear solves behind the potential-theory operations.
//!
//! Harmonic systems here are (I − P)-type M-matrices: weakly diagonally
//! dominant with non-positive off-diagonal entries. Small systems go through
//! dense LU with partial pivoting; larger ones through a banded LU (states
//! are sorted so line chains are tridiagonal and lattice boxes banded); very
//! large unbanded systems fall back to BiCGStab with Jacobi preconditioning.

use crate::error::{Error, Result};

const DENSE_MAX: usize = 600;
const BAND_MAX: usize = 600;
const RESIDUAL_TARGET: f64 = 1e-10;

/// Dense LU with partial pivoting; `a` is row-major n×n and is consumed.
pub fn dense_lu_solve(n: usize, a: &mut [f64], b: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    let mut x = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[perm[col] * n + col].abs();
        for r in col + 1..n {
            let v = a[perm[r] * n + col].abs();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best < 1e-300 {
            return Err(Error::Solver(format!("singular pivot at column {col}")));
        }
        perm.swap(col, pivot);
        let prow = perm[col];
        let pval = a[prow * n + col];
        for r in col + 1..n {
            let row = perm[r];
            let factor = a[row * n + col] / pval;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = factor;
            for c in col + 1..n {
                a[row * n + c] -= factor * a[prow * n + c];
            }
        }
    }
    // forward solve (unit lower) then back substitution
    let mut y = vec![0.0; n];
    for r in 0..n {
        let mut s = x[perm[r]];
        for c in 0..r {
            s -= a[perm[r] * n + c] * y[c];
        }
        y[r] = s;
    }
    for r in (0..n).rev() {
        let mut s = y[r];
        for c in r + 1..n {
            s -= a[perm[r] * n + c] * x[c];
        }
        x[r] = s / a[perm[r] * n + r];
    }
    Ok(x)
}

/// LU solve of a banded system without pivoting (stable for the M-matrices
/// assembled here). `rows` holds the sparse rows of A.
fn banded_solve(n: usize, rows: &[Vec<(usize, f64)>], b: &[f64], hbw: usize) -> Result<Vec<f64>> {
    let width = 2 * hbw + 1;
    let mut band = vec![0.0; n * width];
    let at = |i: usize, j: usize| -> usize { i * width + (j + hbw - i) };
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            band[at(i, j)] += v;
        }
    }
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = band[at(col, col)];
        if pivot.abs() < 1e-300 {
            return Err(Error::Solver(format!("zero pivot at {col} in banded solve")));
        }
        let hi = (col + hbw).min(n - 1);
        for r in col + 1..=hi {
            let factor = band[at(r, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            let chi = (col + hbw).min(n - 1);
            for c in col..=chi {
                let v = band[at(col, c)];
                if v != 0.0 {
                    band[at(r, c)] -= factor * v;
                }
            }
            x[r] -= factor * x[col];
        }
    }
    for r in (0..n).rev() {
        let hi = (r + hbw).min(n - 1);
        let mut s = x[r];
        for c in r + 1..=hi {
            s -= band[at(r, c)] * x[c];
        }
        x[r] = s / band[at(r, r)];
    }
    Ok(x)
}

fn apply(rows: &[Vec<(usize, f64)>], x: &[f64], out: &mut [f64]) {
    for (i, row) in rows.iter().enumerate() {
        let mut s = 0.0;
        for &(j, v) in row {
            s += v * x[j];
        }
        out[i] = s;
    }
}

fn bicgstab(n: usize, rows: &[Vec<(usize, f64)>], b: &[f64]) -> Result<Vec<f64>> {
    let mut diag = vec![1.0; n];
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            if j == i && v.abs() > 1e-300 {
                diag[i] = v;
            }
        }
    }
    let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let max_iter = 200 + 40 * n;
    for _ in 0..max_iter {
        let rho1: f64 = r0.iter().zip(&r).map(|(a, b)| a * b).sum();
        if rho1.abs() < 1e-300 {
            break;
        }
        let beta = (rho1 / rho) * (alpha / omega);
        rho = rho1;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        for i in 0..n {
            phat[i] = p[i] / diag[i];
        }
        apply(rows, &phat, &mut v);
        let denom: f64 = r0.iter().zip(&v).map(|(a, b)| a * b).sum();
        if denom.abs() < 1e-300 {
            break;
        }
        alpha = rho / denom;
        let mut s = vec![0.0; n];
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if s.iter().fold(0.0f64, |m, v| m.max(v.abs())) < RESIDUAL_TARGET * bnorm {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            return Ok(x);
        }
        for i in 0..n {
            shat[i] = s[i] / diag[i];
        }
        apply(rows, &shat, &mut t);
        let tt: f64 = t.iter().map(|v| v * v).sum();
        if tt < 1e-300 {
            break;
        }
        omega = t.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        if r.iter().fold(0.0f64, |m, v| m.max(v.abs())) < RESIDUAL_TARGET * bnorm {
            return Ok(x);
        }
    }
    // final residual check
    apply(rows, &x, &mut t);
    let res = t
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (ax, bi)| m.max((ax - bi).abs()));
    if res <= 1e-8 * bnorm {
        Ok(x)
    } else {
        Err(Error::SolverResidual(res / bnorm))
    }
}

/// Solves A x = b for a sparse square system, choosing the method by size
/// and bandwidth; verifies the residual before returning.
pub fn solve_sparse(n: usize, rows: &[Vec<(usize, f64)>], b: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(rows.len(), n);
    assert_eq!(b.len(), n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let hbw = rows
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().map(move |(j, _)| i.abs_diff(*j)))
        .max()
        .unwrap_or(0);
    let x = if n <= DENSE_MAX {
        let mut a = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                a[i * n + j] += v;
            }
        }
        dense_lu_solve(n, &mut a, b)?
    } else if hbw <= BAND_MAX {
        banded_solve(n, rows, b, hbw)?
    } else {
        bicgstab(n, rows, b)?
    };
    let mut ax = vec![0.0; n];
    apply(rows, &x, &mut ax);
    let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let res = ax
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (a, bi)| m.max((a - bi).abs()));
    if res > 1e-7 * bnorm {
        return Err(Error::SolverResidual(res / bnorm));
    }
    Ok(x)
}
