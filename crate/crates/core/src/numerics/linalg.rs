//! Dense complex linear algebra for the scattering resolvents: column-major
//! matrix storage, LU with partial pivoting, and a cheap condition estimate.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("singular matrix: zero pivot at column {0}")]
    Singular(usize),
}

/// Column-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![Complex64::ZERO; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[c * self.n_rows + r]
    }

    /// Maximum absolute row sum (infinity norm).
    pub fn norm_inf(&self) -> f64 {
        let mut best: f64 = 0.0;
        for r in 0..self.n_rows {
            let mut sum = 0.0;
            for c in 0..self.n_cols {
                sum += self.at(r, c).norm();
            }
            best = best.max(sum);
        }
        best
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[c * self.n_rows + r]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[c * self.n_rows + r]
    }
}

/// LU factorization with partial pivoting of a square matrix.
pub struct LuFactors {
    lu: CMatrix,
    pivots: Vec<usize>,
    norm_a: f64,
}

impl LuFactors {
    pub fn new(a: CMatrix) -> Result<Self, LinalgError> {
        let n = a.n_rows;
        assert_eq!(n, a.n_cols, "LU requires a square matrix");
        let norm_a = a.norm_inf();
        let mut lu = a;
        let mut pivots = vec![0usize; n];

        for k in 0..n {
            let mut p = k;
            let mut best = lu.at(k, k).norm();
            for r in (k + 1)..n {
                let v = lu.at(r, k).norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return Err(LinalgError::Singular(k));
            }
            pivots[k] = p;
            if p != k {
                for c in 0..n {
                    lu.data.swap(c * n + k, c * n + p);
                }
            }
            let pivot = lu.at(k, k);
            for r in (k + 1)..n {
                let factor = lu.at(r, k) / pivot;
                lu[(r, k)] = factor;
                if factor != Complex64::ZERO {
                    for c in (k + 1)..n {
                        let sub = factor * lu.at(k, c);
                        lu[(r, c)] -= sub;
                    }
                }
            }
        }

        Ok(Self { lu, pivots, norm_a })
    }

    /// Solve A x = b in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.lu.n_rows;
        debug_assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.pivots[k]);
        }
        for k in 0..n {
            let bk = b[k];
            if bk != Complex64::ZERO {
                for r in (k + 1)..n {
                    b[r] -= self.lu.at(r, k) * bk;
                }
            }
        }
        for k in (0..n).rev() {
            b[k] /= self.lu.at(k, k);
            let bk = b[k];
            if bk != Complex64::ZERO {
                for r in 0..k {
                    b[r] -= self.lu.at(r, k) * bk;
                }
            }
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Rough condition estimate ‖A‖_∞ · ‖A⁻¹ e‖-style, from a few probe
    /// solves. Adequate for reporting ill-conditioning, not a rigorous bound.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.lu.n_rows;
        if n == 0 {
            return 1.0;
        }
        let mut best = 0.0f64;
        // Probe with e (all ones) and an alternating-sign vector.
        for probe in 0..2 {
            let mut b: Vec<Complex64> = (0..n)
                .map(|i| {
                    if probe == 0 || i % 2 == 0 {
                        Complex64::ONE
                    } else {
                        -Complex64::ONE
                    }
                })
                .collect();
            self.solve_in_place(&mut b);
            let norm: f64 = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
            best = best.max(norm);
        }
        self.norm_a * best
    }
}

/// C := A · B.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.n_cols, b.n_rows);
    let mut c = CMatrix::zeros(a.n_rows, b.n_cols);
    for j in 0..b.n_cols {
        for k in 0..a.n_cols {
            let bkj = b.at(k, j);
            if bkj != Complex64::ZERO {
                for i in 0..a.n_rows {
                    let add = a.at(i, k) * bkj;
                    c[(i, j)] += add;
                }
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn solves_known_system() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = Complex64::new(2.0, 0.0);
        a[(0, 1)] = Complex64::new(0.0, 1.0);
        a[(1, 0)] = Complex64::new(1.0, -1.0);
        a[(1, 1)] = Complex64::new(3.0, 0.0);
        let lu = LuFactors::new(a.clone()).unwrap();
        let x_true = [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25)];
        let b = [
            a.at(0, 0) * x_true[0] + a.at(0, 1) * x_true[1],
            a.at(1, 0) * x_true[0] + a.at(1, 1) * x_true[1],
        ];
        let x = lu.solve(&b);
        for (xi, ti) in x.iter().zip(&x_true) {
            assert_relative_eq!(xi.re, ti.re, max_relative = 1e-12);
            assert_relative_eq!(xi.im, ti.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn singular_detected() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = Complex64::ONE;
        a[(0, 1)] = Complex64::ONE;
        a[(1, 0)] = Complex64::ONE;
        a[(1, 1)] = Complex64::ONE;
        assert!(LuFactors::new(a).is_err());
    }

    proptest! {
        #[test]
        fn lu_solve_residual_small(seed in 0u64..500) {
            // Deterministic pseudo-random well-scaled matrices.
            let n = 1 + (seed % 8) as usize;
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            };
            let mut a = CMatrix::zeros(n, n);
            for c in 0..n {
                for r in 0..n {
                    a[(r, c)] = Complex64::new(next(), next());
                }
                // Diagonal dominance keeps the test matrices well conditioned.
                a[(c, c)] += Complex64::new(4.0, 0.0);
            }
            let b: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
            let lu = LuFactors::new(a.clone()).unwrap();
            let x = lu.solve(&b);
            for r in 0..n {
                let mut res = -b[r];
                for c in 0..n {
                    res += a.at(r, c) * x[c];
                }
                prop_assert!(res.norm() < 1e-10);
            }
        }
    }
}
