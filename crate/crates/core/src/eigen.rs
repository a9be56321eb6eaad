//! Lowest eigenpairs of sparse symmetric matrices: dense solve for small
//! sizes, shift-invert block Krylov with a banded Cholesky factor otherwise.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Rows of a symmetric matrix as `(column, value)` lists.
#[derive(Debug, Clone)]
pub struct SparseSym {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSym {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(&self.rows) {
            *yi = row.iter().map(|&(c, w)| w * x[c]).sum();
        }
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(_, w)| w.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Gershgorin lower bound of the spectrum.
    pub fn lower_bound(&self) -> f64 {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut d = 0.0;
                let mut off = 0.0;
                for &(c, w) in row {
                    if c == i {
                        d += w;
                    } else {
                        off += w.abs();
                    }
                }
                d - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                m[(i, c)] += w;
            }
        }
        m
    }
}

/// Lower-triangular band storage: row `i` holds columns `i − bw ..= i`.
struct BandCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    fn at(&self, i: usize, k: usize) -> f64 {
        self.data[i * (self.bw + 1) + k + self.bw - i]
    }

    /// Factor `P (A − σ I) Pᵀ` where `perm[k]` is the new position of row `k`.
    fn factor(a: &SparseSym, sigma: f64, perm: &[usize]) -> Result<Self> {
        let n = a.dim();
        let mut bw = 0;
        for (i, row) in a.rows.iter().enumerate() {
            for &(c, _) in row {
                bw = bw.max(perm[i].abs_diff(perm[c]));
            }
        }
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for (i, row) in a.rows.iter().enumerate() {
            let pi = perm[i];
            for &(c, v) in row {
                let pc = perm[c];
                if pc <= pi {
                    data[pi * w + pc + bw - pi] += v;
                }
            }
            data[pi * w + bw] -= sigma;
        }
        for i in 0..n {
            let lo_i = i.saturating_sub(bw);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(bw));
                let ri = &data[i * w + lo + bw - i..i * w + j + bw - i];
                let rj = &data[j * w + lo + bw - j..j * w + bw];
                let dot: f64 = ri.iter().zip(rj).map(|(x, y)| x * y).sum();
                let s = data[i * w + j + bw - i] - dot;
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NoConvergence {
                            what: "Cholesky factorization (matrix not positive definite)",
                            residual: s,
                        });
                    }
                    data[i * w + bw] = s.sqrt();
                } else {
                    data[i * w + j + bw - i] = s / data[j * w + bw];
                }
            }
        }
        Ok(BandCholesky { n, bw, data })
    }

    /// Solves in place for a row-major `n × p` block of right-hand sides.
    fn solve_block(&self, y: &mut [f64], p: usize) {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let (head, tail) = y.split_at_mut(i * p);
            let yi = &mut tail[..p];
            for k in lo..i {
                let l = self.at(i, k);
                let yk = &head[k * p..(k + 1) * p];
                for (a, b) in yi.iter_mut().zip(yk) {
                    *a -= l * b;
                }
            }
            let d = self.at(i, i);
            yi.iter_mut().for_each(|a| *a /= d);
        }
        for i in (0..n).rev() {
            let lo = i.saturating_sub(bw);
            let d = self.at(i, i);
            let (head, tail) = y.split_at_mut(i * p);
            let yi = &mut tail[..p];
            yi.iter_mut().for_each(|a| *a /= d);
            for k in lo..i {
                let l = self.at(i, k);
                let yk = &mut head[k * p..(k + 1) * p];
                for (a, b) in yk.iter_mut().zip(yi.iter()) {
                    *a -= l * b;
                }
            }
        }
    }
}

/// `SymmetricEigen` with a residual check.
///
/// The implicit QR iteration occasionally returns a wrong decomposition for
/// nearly diagonal input; a random orthogonal similarity avoids that case.
pub fn checked_symmetric_eigen(h: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let m = h.nrows();
    let scale = h.norm().max(1e-300);
    let accept = |eig: &SymmetricEigen<f64, nalgebra::Dyn>| {
        let r = &h * &eig.eigenvectors - &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues);
        r.norm() <= 1e-11 * scale * (m as f64).sqrt()
    };
    let eig = SymmetricEigen::new(h.clone());
    if accept(&eig) {
        return Ok(eig);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
    for _ in 0..4 {
        let q = DMatrix::from_fn(m, m, |_, _| rng.gen::<f64>() - 0.5).qr().q();
        let mut rotated = q.transpose() * &h * &q;
        rotated = (&rotated + rotated.transpose()) * 0.5;
        let mut eig = SymmetricEigen::new(rotated);
        eig.eigenvectors = &q * &eig.eigenvectors;
        if accept(&eig) {
            return Ok(eig);
        }
    }
    Err(Error::NoConvergence {
        what: "dense symmetric eigensolver",
        residual: f64::NAN,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Appends the columns of `block` to `basis` after repeated Gram–Schmidt
/// (until a pass no longer cancels), dropping numerically dependent ones.
fn extend_orthonormal(basis: &mut Vec<Vec<f64>>, block: Vec<Vec<f64>>) -> usize {
    let start = basis.len();
    for mut x in block {
        let norm0 = dot(&x, &x).sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut norm = norm0;
        for _ in 0..4 {
            for b in basis.iter() {
                let c = dot(b, &x);
                axpy(-c, b, &mut x);
            }
            let before = norm;
            norm = dot(&x, &x).sqrt();
            if norm > 0.7 * before {
                break;
            }
        }
        if norm > 1e-8 * norm0 {
            x.iter_mut().for_each(|v| *v /= norm);
            basis.push(x);
        }
    }
    basis.len() - start
}

/// Options for [`lowest_eigenvalues`].
#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub dense_limit: usize,
    pub krylov_depth: usize,
    pub max_restarts: usize,
    /// Ritz residuals are accepted below `tol` times the norm bound.
    pub tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            dense_limit: 1024,
            krylov_depth: 3,
            max_restarts: 40,
            tol: 1e-10,
        }
    }
}

/// The `count` smallest eigenvalues in ascending order.
///
/// `perm` reorders unknowns to keep the factor banded; pass the identity
/// when no better ordering is known.
pub fn lowest_eigenvalues(a: &SparseSym, count: usize, perm: &[usize], opts: EigenOptions) -> Result<Vec<f64>> {
    let n = a.dim();
    let count = count.min(n);
    if n <= opts.dense_limit {
        let eig = checked_symmetric_eigen(a.to_dense())?;
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals.truncate(count);
        return Ok(vals);
    }
    let sigma = a.lower_bound() - 1.0;
    let chol = BandCholesky::factor(a, sigma, perm)?;
    let block = (count + 16).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut start: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.gen::<f64>() - 0.5).collect())
        .collect();
    let invert = |cols: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let p = cols.len();
        let mut y = vec![0.0; n * p];
        for (c, col) in cols.iter().enumerate() {
            for (k, v) in col.iter().enumerate() {
                y[perm[k] * p + c] = *v;
            }
        }
        chol.solve_block(&mut y, p);
        (0..p)
            .map(|c| (0..n).map(|k| y[perm[k] * p + c]).collect())
            .collect()
    };
    let mut worst = f64::INFINITY;
    let scale = a.norm_bound().max(1.0);
    // converged Ritz vectors stay in the basis but are not expanded further
    let mut locked: Vec<Vec<f64>> = Vec::new();
    for _ in 0..opts.max_restarts {
        let mut basis = locked.clone();
        let mut added = extend_orthonormal(&mut basis, start);
        for _ in 1..opts.krylov_depth {
            if added == 0 {
                break;
            }
            let last = basis[basis.len() - added..].to_vec();
            added = extend_orthonormal(&mut basis, invert(&last));
        }
        let m = basis.len();
        let images: Vec<Vec<f64>> = basis
            .iter()
            .map(|b| {
                let mut y = vec![0.0; n];
                a.apply(b, &mut y);
                y
            })
            .collect();
        let mut h = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = checked_symmetric_eigen(h)?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let mut ritz = Vec::with_capacity(block);
        let mut converged = 0;
        worst = 0.0;
        for (r, &idx) in order.iter().take(block.min(m)).enumerate() {
            let theta = eig.eigenvalues[idx];
            let mut y = vec![0.0; n];
            let mut ay = vec![0.0; n];
            for (j, (b, ab)) in basis.iter().zip(&images).enumerate() {
                let s = eig.eigenvectors[(j, idx)];
                axpy(s, b, &mut y);
                axpy(s, ab, &mut ay);
            }
            if r < count {
                axpy(-theta, &y, &mut ay);
                let res = dot(&ay, &ay).sqrt() / scale;
                worst = worst.max(res);
                if res <= opts.tol && converged == r {
                    converged += 1;
                }
            }
            ritz.push(y);
        }
        if converged >= count {
            let mut vals: Vec<f64> = order.iter().take(count).map(|&i| eig.eigenvalues[i]).collect();
            vals.sort_by(f64::total_cmp);
            return Ok(vals);
        }
        start = ritz.split_off(converged);
        locked = ritz;
    }
    Err(Error::NoConvergence {
        what: "block Krylov eigensolver",
        residual: worst,
    })
}

/// Position of index `i` in an ordering that keeps periodic neighbours at
/// most two places apart: `0, 2, 4, …` going up and odd slots coming back.
pub fn interleave(i: usize, n: usize) -> usize {
    if 2 * i < n {
        2 * i
    } else {
        2 * (n - 1 - i) + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn periodic_laplacian_2d(n: usize) -> SparseSym {
        let h2 = (2.0 * PI / n as f64).powi(2);
        let id = |i: isize, j: isize| (i.rem_euclid(n as isize) as usize) * n + j.rem_euclid(n as isize) as usize;
        let rows = (0..n * n)
            .map(|k| {
                let (i, j) = ((k / n) as isize, (k % n) as isize);
                vec![
                    (k, 4.0 / h2),
                    (id(i + 1, j), -1.0 / h2),
                    (id(i - 1, j), -1.0 / h2),
                    (id(i, j + 1), -1.0 / h2),
                    (id(i, j - 1), -1.0 / h2),
                ]
            })
            .collect();
        SparseSym { rows }
    }

    fn exact(n: usize, count: usize) -> Vec<f64> {
        let h = 2.0 * PI / n as f64;
        let one = |m: usize| (2.0 - 2.0 * (m as f64 * h).cos()) / (h * h);
        let mut all = Vec::new();
        for a in 0..n {
            for b in 0..n {
                all.push(one(a) + one(b));
            }
        }
        all.sort_by(f64::total_cmp);
        all.truncate(count);
        all
    }

    #[test]
    fn interleave_is_a_permutation_with_short_wraps() {
        for n in [5, 8, 9] {
            let mut seen: Vec<usize> = (0..n).map(|i| interleave(i, n)).collect();
            for i in 0..n {
                assert!(interleave(i, n).abs_diff(interleave((i + 1) % n, n)) <= 2);
            }
            seen.sort();
            assert_eq!(seen, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn krylov_matches_closed_form_with_multiplicities() {
        let n = 40;
        let a = periodic_laplacian_2d(n);
        let perm: Vec<usize> = (0..n * n).map(|k| interleave(k / n, n) * n + interleave(k % n, n)).collect();
        let got = lowest_eigenvalues(&a, 14, &perm, EigenOptions::default()).unwrap();
        for (g, e) in got.iter().zip(exact(n, 14)) {
            assert!((g - e).abs() < 1e-8, "{g} vs {e}");
        }
    }

    #[test]
    fn dense_path_agrees() {
        let n = 12;
        let a = periodic_laplacian_2d(n);
        let perm: Vec<usize> = (0..n * n).collect();
        let got = lowest_eigenvalues(&a, 10, &perm, EigenOptions::default()).unwrap();
        for (g, e) in got.iter().zip(exact(n, 10)) {
            assert!((g - e).abs() < 1e-9);
        }
    }
}
