//! Symmetric matrices in skyline (envelope) storage and their `LDL^T`
//! factorisation.

use crate::error::{Error, Result};

/// Lower triangle of a symmetric matrix, stored row by row from the first
/// structurally nonzero column up to the diagonal. Factorisation fill stays
/// inside this envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct SkylineMatrix {
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineMatrix {
    /// Zero matrix whose row `i` spans columns `first[i]..=i`.
    pub fn with_profile(first: Vec<usize>) -> Self {
        let mut start = Vec::with_capacity(first.len() + 1);
        let mut acc = 0;
        for (i, &f) in first.iter().enumerate() {
            assert!(f <= i, "profile start beyond diagonal in row {i}");
            start.push(acc);
            acc += i - f + 1;
        }
        start.push(acc);
        SkylineMatrix {
            first,
            start,
            values: vec![0.0; acc],
        }
    }

    /// Envelope of the given (row, col) couplings.
    pub fn profile_from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Vec<usize> {
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j) in pairs {
            let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
            first[hi] = first[hi].min(lo);
        }
        first
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn profile(&self) -> &[usize] {
        &self.first
    }

    pub fn stored_len(&self) -> usize {
        self.values.len()
    }

    fn index(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        (j >= self.first[i]).then(|| self.start[i] + j - self.first[i])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.index(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to entry `(i, j)` (and its mirror).
    ///
    /// Panics if the entry lies outside the envelope.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .index(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside skyline profile"));
        self.values[k] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.values[self.start[i + 1] - 1]).collect()
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        self.diagonal().iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let f = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let mut acc = row[i - f] * x[i];
            for (k, &a) in row[..i - f].iter().enumerate() {
                let j = f + k;
                acc += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += acc;
        }
        y
    }

    /// `alpha A + beta B` for matrices with identical envelopes.
    pub fn combine(alpha: f64, a: &Self, beta: f64, b: &Self) -> Self {
        assert_eq!(a.first, b.first, "skyline profiles differ");
        SkylineMatrix {
            first: a.first.clone(),
            start: a.start.clone(),
            values: a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| alpha * x + beta * y)
                .collect(),
        }
    }

    /// Dense copy, for tests and small problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in self.first[i]..=i {
                let v = self.get(i, j);
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        d
    }

    /// `A = L D L^T` without pivoting.
    pub fn ldlt(&self) -> Result<Ldlt> {
        let n = self.dim();
        let mut f = self.clone();
        let mut d = vec![0.0; n];
        let scale = self.max_abs_diagonal().max(f64::MIN_POSITIVE);
        let mut min_pivot = f64::INFINITY;
        for i in 0..n {
            let fi = f.first[i];
            let si = f.start[i];
            // row entries become g_ij = L_ij d_j, then L_ij
            for j in fi..i {
                let fj = f.first[j];
                let sj = f.start[j];
                let lo = fi.max(fj);
                let mut acc = 0.0;
                for k in lo..j {
                    acc += f.values[si + k - fi] * f.values[sj + k - fj];
                }
                f.values[si + j - fi] -= acc;
            }
            let mut diag = f.values[si + i - fi];
            for j in fi..i {
                let g = f.values[si + j - fi];
                let l = g / d[j];
                f.values[si + j - fi] = l;
                diag -= g * l;
            }
            if !diag.is_finite() {
                return Err(Error::SolverError {
                    message: format!("non-finite pivot in row {i}"),
                    residual: f64::NAN,
                });
            }
            min_pivot = min_pivot.min(diag.abs() / scale);
            if diag == 0.0 {
                return Err(Error::SolverError {
                    message: format!("zero pivot in row {i}"),
                    residual: 0.0,
                });
            }
            d[i] = diag;
            f.values[si + i - fi] = 1.0;
        }
        Ok(Ldlt {
            factor: f,
            d,
            min_relative_pivot: min_pivot,
        })
    }
}

/// Unit lower-triangular factor and diagonal of an `LDL^T` factorisation.
#[derive(Clone, Debug)]
pub struct Ldlt {
    factor: SkylineMatrix,
    d: Vec<f64>,
    min_relative_pivot: f64,
}

impl Ldlt {
    /// Number of negative pivots: by Sylvester's law of inertia, the number
    /// of negative eigenvalues of the factored matrix.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    /// Smallest `|d_i|` relative to the largest diagonal entry of the input.
    pub fn min_relative_pivot(&self) -> f64 {
        self.min_relative_pivot
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.factor;
        let n = l.dim();
        let mut x = b.to_vec();
        for i in 0..n {
            let fi = l.first[i];
            let row = &l.values[l.start[i]..l.start[i + 1] - 1];
            let acc: f64 = row.iter().zip(&x[fi..i]).map(|(a, b)| a * b).sum();
            x[i] -= acc;
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            let fi = l.first[i];
            let xi = x[i];
            let row = &l.values[l.start[i]..l.start[i + 1] - 1];
            for (k, a) in row.iter().enumerate() {
                x[fi + k] -= a * xi;
            }
        }
        x
    }
}
