//! Symmetric block-tridiagonal matrices and their block Cholesky solve.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BandedError {
    /// The matrix is not numerically positive definite; increase damping.
    #[error("non-positive pivot {pivot:e} in diagonal block {block}")]
    NonPositivePivot { block: usize, pivot: f64 },
}

/// Symmetric matrix with `blocks` diagonal blocks of size `n`. Only the
/// diagonal blocks and the strictly lower off-diagonal blocks are stored,
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiag {
    n: usize,
    diag: Vec<Vec<f64>>,
    lower: Vec<Vec<f64>>,
}

impl BlockTridiag {
    pub fn zeros(blocks: usize, n: usize) -> Self {
        assert!(blocks >= 1 && n >= 1);
        BlockTridiag {
            n,
            diag: vec![vec![0.0; n * n]; blocks],
            lower: vec![vec![0.0; n * n]; blocks - 1],
        }
    }

    pub fn identity(blocks: usize, n: usize) -> Self {
        let mut m = Self::zeros(blocks, n);
        m.add_diagonal(1.0);
        m
    }

    pub fn block_size(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        self.n * self.blocks()
    }

    /// Diagonal block `k`.
    pub fn diag_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.diag[k]
    }

    /// Block at (k + 1, k).
    pub fn lower_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.lower[k]
    }

    pub fn add_diagonal(&mut self, value: f64) {
        let n = self.n;
        for d in &mut self.diag {
            for i in 0..n {
                d[i * n + i] += value;
            }
        }
    }

    /// Adds `scale * v v^T` to diagonal block `k`.
    pub fn add_outer(&mut self, k: usize, v: &[f64], scale: f64) {
        let n = self.n;
        let d = &mut self.diag[k];
        for i in 0..n {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                d[i * n + j] += scale * (v[i] * v[j]);
            }
        }
    }

    /// Adds `scale * v v^T` to the off-diagonal block `(k + 1, k)` and, by
    /// symmetry, to its transpose.
    pub fn add_outer_lower(&mut self, k: usize, v: &[f64], scale: f64) {
        let n = self.n;
        let d = &mut self.lower[k];
        for i in 0..n {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                d[i * n + j] += scale * (v[i] * v[j]);
            }
        }
    }

    /// Entry `(i, j)` of the full matrix; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let n = self.n;
        let (bi, bj) = (i / n, j / n);
        let (ri, rj) = (i % n, j % n);
        if bi == bj {
            self.diag[bi][ri * n + rj]
        } else if bi == bj + 1 {
            self.lower[bj][ri * n + rj]
        } else if bj == bi + 1 {
            self.lower[bi][rj * n + ri]
        } else {
            0.0
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let m = self.dim();
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = self.get(i, j);
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; self.dim()];
        for k in 0..self.blocks() {
            let d = &self.diag[k];
            for i in 0..n {
                y[k * n + i] += (0..n).map(|j| d[i * n + j] * x[k * n + j]).sum::<f64>();
            }
        }
        for (k, b) in self.lower.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    y[(k + 1) * n + i] += b[i * n + j] * x[k * n + j];
                    y[k * n + j] += b[i * n + j] * x[(k + 1) * n + i];
                }
            }
        }
        y
    }
}

/// Lower Cholesky factor of a dense `n x n` block, in place.
fn cholesky_in_place(a: &mut [f64], n: usize, block: usize) -> Result<(), BandedError> {
    for j in 0..n {
        let mut pivot = a[j * n + j];
        for k in 0..j {
            pivot -= a[j * n + k] * a[j * n + k];
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(BandedError::NonPositivePivot { block, pivot });
        }
        let l_jj = pivot.sqrt();
        a[j * n + j] = l_jj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / l_jj;
        }
        for i in 0..j {
            a[i * n + j] = 0.0;
        }
    }
    Ok(())
}

/// Solves `L y = b` in place.
fn forward(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * b[k]).sum();
        b[i] = (b[i] - s) / l[i * n + i];
    }
}

/// Solves `L^T x = b` in place.
fn backward(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * b[k]).sum();
        b[i] = (b[i] - s) / l[i * n + i];
    }
}

/// Solves `H d = rhs` by block Cholesky in `O(blocks * n^3)`.
pub fn solve_banded(h: &BlockTridiag, rhs: &[f64]) -> Result<Vec<f64>, BandedError> {
    let n = h.n;
    let blocks = h.blocks();
    assert_eq!(rhs.len(), h.dim());
    let mut l_diag: Vec<Vec<f64>> = Vec::with_capacity(blocks);
    // m[k] = H_{k+1,k} L_k^{-T}, the sub-diagonal block of the factor.
    let mut m: Vec<Vec<f64>> = Vec::with_capacity(blocks.saturating_sub(1));
    for k in 0..blocks {
        let mut d = h.diag[k].clone();
        if k > 0 {
            let mk = &m[k - 1];
            for i in 0..n {
                for j in 0..n {
                    d[i * n + j] -= (0..n).map(|p| mk[i * n + p] * mk[j * n + p]).sum::<f64>();
                }
            }
        }
        cholesky_in_place(&mut d, n, k)?;
        if k + 1 < blocks {
            let b = &h.lower[k];
            let mut mk = vec![0.0; n * n];
            for i in 0..n {
                let mut row = b[i * n..(i + 1) * n].to_vec();
                forward(&d, n, &mut row);
                mk[i * n..(i + 1) * n].copy_from_slice(&row);
            }
            m.push(mk);
        }
        l_diag.push(d);
    }
    let mut y = rhs.to_vec();
    for k in 0..blocks {
        if k > 0 {
            let (prev, cur) = y.split_at_mut(k * n);
            let prev = &prev[(k - 1) * n..];
            let mk = &m[k - 1];
            for i in 0..n {
                cur[i] -= (0..n).map(|p| mk[i * n + p] * prev[p]).sum::<f64>();
            }
        }
        forward(&l_diag[k], n, &mut y[k * n..(k + 1) * n]);
    }
    for k in (0..blocks).rev() {
        if k + 1 < blocks {
            let (cur, next) = y.split_at_mut((k + 1) * n);
            let cur = &mut cur[k * n..];
            let mk = &m[k];
            for p in 0..n {
                cur[p] -= (0..n).map(|i| mk[i * n + p] * next[i]).sum::<f64>();
            }
        }
        backward(&l_diag[k], n, &mut y[k * n..(k + 1) * n]);
    }
    Ok(y)
}
