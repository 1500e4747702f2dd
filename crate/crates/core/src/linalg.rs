//! Dense LU factorization with partial pivoting for the boundary-element
//! systems. The trailing update is delegated to `matrixmultiply`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular at column {column}")]
    Singular { column: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

const BLOCK: usize = 64;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.n];
        for row in self.data.chunks_exact(self.n) {
            for (s, a) in sums.iter_mut().zip(row) {
                *s += a.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }
}

/// PA = LU with unit lower-triangular L, both stored in place.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    /// Row swapped with row k at step k.
    pivots: Vec<usize>,
    norm_one: f64,
}

impl LuFactors {
    pub fn factor(mut a: DenseMatrix) -> Result<Self, LinalgError> {
        let n = a.n;
        let norm_one = a.norm_one();
        let mut pivots = vec![0usize; n];
        let mut k0 = 0;
        while k0 < n {
            let kb = BLOCK.min(n - k0);
            factor_panel(&mut a, k0, kb, &mut pivots)?;
            let k1 = k0 + kb;
            if k1 < n {
                // U12 = L11^-1 A12
                for i in k0..k1 {
                    for p in k0..i {
                        let l = a.get(i, p);
                        if l != 0.0 {
                            let (src, dst) = split_rows(&mut a.data, n, p, i);
                            for j in k1..n {
                                dst[j] -= l * src[j];
                            }
                        }
                    }
                }
                // A22 -= L21 U12
                let m = n - k1;
                let ptr = a.data.as_mut_ptr();
                unsafe {
                    let l21 = ptr.add(k1 * n + k0) as *const f64;
                    let u12 = ptr.add(k0 * n + k1) as *const f64;
                    let a22 = ptr.add(k1 * n + k1);
                    matrixmultiply::dgemm(
                        m, kb, m, -1.0, l21, n as isize, 1, u12, n as isize, 1, 1.0, a22, n as isize, 1,
                    );
                }
            }
            k0 = k1;
        }
        Ok(Self { lu: a, pivots, norm_one })
    }

    pub fn dim(&self) -> usize {
        self.lu.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::Dimension { expected: n, got: b.len() });
        }
        let mut x = b.to_vec();
        for (k, &p) in self.pivots.iter().enumerate() {
            x.swap(k, p);
        }
        for i in 0..n {
            let row = &self.lu.data[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu.data[i * n..(i + 1) * n];
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }

    /// Solve A^T x = b.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::Dimension { expected: n, got: b.len() });
        }
        let mut x = b.to_vec();
        // U^T w = b
        for i in 0..n {
            x[i] /= self.lu.get(i, i);
            let xi = x[i];
            let row = &self.lu.data[i * n..(i + 1) * n];
            for j in i + 1..n {
                x[j] -= row[j] * xi;
            }
        }
        // L^T v = w
        for i in (0..n).rev() {
            let xi = x[i];
            let row = &self.lu.data[i * n..i * n + i];
            for (j, l) in row.iter().enumerate() {
                x[j] -= l * xi;
            }
        }
        for (k, &p) in self.pivots.iter().enumerate().rev() {
            x.swap(k, p);
        }
        Ok(x)
    }

    /// Hager's estimate of the 1-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        let mut last_index = usize::MAX;
        for _ in 0..5 {
            let y = match self.solve(&x) {
                Ok(y) => y,
                Err(_) => return f64::INFINITY,
            };
            estimate = y.iter().map(|v| v.abs()).sum::<f64>();
            let sign: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = match self.solve_transpose(&sign) {
                Ok(z) => z,
                Err(_) => return f64::INFINITY,
            };
            let (j, zmax) = z
                .iter()
                .enumerate()
                .fold((0, 0.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx || j == last_index {
                break;
            }
            last_index = j;
            x.iter_mut().for_each(|v| *v = 0.0);
            x[j] = 1.0;
        }
        if !estimate.is_finite() {
            return f64::INFINITY;
        }
        estimate * self.norm_one
    }
}

fn split_rows(data: &mut [f64], n: usize, src: usize, dst: usize) -> (&[f64], &mut [f64]) {
    debug_assert!(src < dst);
    let (head, tail) = data.split_at_mut(dst * n);
    (&head[src * n..(src + 1) * n], &mut tail[..n])
}

/// Unblocked LU of columns k0..k0+kb, applying row swaps to the full rows.
fn factor_panel(a: &mut DenseMatrix, k0: usize, kb: usize, pivots: &mut [usize]) -> Result<(), LinalgError> {
    let n = a.n;
    for k in k0..k0 + kb {
        let mut p = k;
        let mut best = a.get(k, k).abs();
        for i in k + 1..n {
            let v = a.get(i, k).abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(LinalgError::Singular { column: k });
        }
        pivots[k] = p;
        if p != k {
            let (first, second) = a.data.split_at_mut(p * n);
            first[k * n..(k + 1) * n].swap_with_slice(&mut second[..n]);
        }
        let pivot = a.get(k, k);
        for i in k + 1..n {
            let l = a.get(i, k) / pivot;
            a.set(i, k, l);
            if l != 0.0 {
                let (src, dst) = split_rows(&mut a.data, n, k, i);
                for j in k + 1..k0 + kb {
                    dst[j] -= l * src[j];
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn solves_random_systems_across_block_sizes() {
        for &n in &[1usize, 5, 63, 64, 65, 150] {
            let a = random_matrix(n, n as u64);
            let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let b = a.mul_vec(&x_true);
            let lu = LuFactors::factor(a.clone()).unwrap();
            let x = lu.solve(&b).unwrap();
            let err = x.iter().zip(&x_true).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "n={n} err={err}");
        }
    }

    #[test]
    fn transpose_solve_matches() {
        let n = 97;
        let a = random_matrix(n, 7);
        let at = DenseMatrix::from_fn(n, |i, j| a.get(j, i));
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 1e-2).collect();
        let b = at.mul_vec(&x_true);
        let lu = LuFactors::factor(a).unwrap();
        let x = lu.solve_transpose(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn condition_estimate_of_diagonal() {
        let a = DenseMatrix::from_fn(10, |i, j| if i == j { 10f64.powi(i as i32) } else { 0.0 });
        let c = LuFactors::factor(a).unwrap().condition_estimate();
        assert!((c / 1e9 - 1.0).abs() < 1e-9, "{c}");
    }

    #[test]
    fn detects_singular() {
        let a = DenseMatrix::from_fn(3, |i, _| i as f64);
        assert!(matches!(LuFactors::factor(a), Err(LinalgError::Singular { .. })));
    }
}
