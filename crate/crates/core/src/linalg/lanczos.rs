//! Smallest eigenpairs of `K x = lambda M x` (symmetric `K`, positive
//! definite `M`) by shift-invert Lanczos in the `M` inner product.
//!
//! Converged Ritz pairs are locked; each restart works in the
//! `M`-orthogonal complement of the locked vectors. Completeness is checked
//! against the inertia of `K - t M`, so eigenvalues of higher multiplicity
//! (invisible to a single Krylov sequence) are recovered by restarting.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::skyline::SkylineMatrix;

/// Ritz residual `|beta_m y_m| / theta` of the shift-inverted operator a
/// pair must reach to be locked.
pub const RESIDUAL_TOL: f64 = 1e-9;

const MAX_RESTARTS: usize = 12;

/// One generalized eigenpair; `vector` is `M`-normalised.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Number of generalized eigenvalues strictly below `t`.
pub fn count_below(k: &SkylineMatrix, m: &SkylineMatrix, t: f64) -> Result<usize> {
    let shifted = SkylineMatrix::combine(1.0, k, -t, m);
    match shifted.ldlt() {
        Ok(f) if f.min_relative_pivot() > 1e-12 => Ok(f.negative_count()),
        Ok(_) => Err(Error::ThresholdOnEigenvalue(t)),
        Err(Error::SolverError { residual, .. }) if residual == 0.0 => {
            Err(Error::ThresholdOnEigenvalue(t))
        }
        Err(e) => Err(e),
    }
}

fn m_dot(m: &SkylineMatrix, a: &[f64], b: &[f64]) -> f64 {
    dot(&m.mul_vec(a), b)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Removes the `M`-components along `basis` (whose `M`-images are given).
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], m_basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for (q, mq) in basis.iter().zip(m_basis) {
            let c = dot(mq, w);
            axpy(w, -c, q);
        }
    }
}

/// The `count` smallest eigenpairs, ascending.
///
/// `shift` must lie below the smallest eigenvalue and must not coincide with
/// one (use a negative shift when `K` has a kernel).
pub fn smallest_eigenpairs(
    k: &SkylineMatrix,
    m: &SkylineMatrix,
    count: usize,
    shift: f64,
    seed: u64,
) -> Result<Vec<EigenPair>> {
    let n = k.dim();
    if count == 0 {
        return Ok(Vec::new());
    }
    if count > n {
        return Err(Error::InvalidArgument(format!(
            "requested {count} eigenpairs of a {n}-dimensional problem"
        )));
    }
    let factor = SkylineMatrix::combine(1.0, k, -shift, m).ldlt()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locked: Vec<EigenPair> = Vec::new();
    let mut locked_m: Vec<Vec<f64>> = Vec::new();
    let mut worst = 0.0f64;

    for _ in 0..MAX_RESTARTS {
        let free = n - locked.len();
        if free == 0 {
            break;
        }
        let want = count.saturating_sub(locked.len()).max(1);
        let mut basis_len = (2 * want + 40).min(free);
        let max_len = (16 * (2 * want + 40)).min(free);
        let mut found: Vec<EigenPair>;
        loop {
            let (pairs, complete) = lanczos_run(
                k, m, &factor, shift, basis_len, &locked, &locked_m, &mut rng,
            )?;
            // accept a prefix of converged pairs so nothing below is skipped
            found = Vec::new();
            for p in pairs {
                if p.residual < RESIDUAL_TOL {
                    found.push(p);
                } else {
                    worst = worst.max(p.residual);
                    break;
                }
            }
            if found.len() >= want || complete || basis_len == max_len {
                break;
            }
            basis_len = (basis_len * 2).min(max_len);
        }
        if found.is_empty() {
            return Err(Error::SolverError {
                message: "no Ritz pair converged".into(),
                residual: worst,
            });
        }
        for p in found {
            locked_m.push(m.mul_vec(&p.vector));
            locked.push(p);
        }
        locked.sort_by(|a, b| a.value.total_cmp(&b.value));
        locked_m = locked.iter().map(|p| m.mul_vec(&p.vector)).collect();
        if locked.len() < count {
            continue;
        }
        // completeness: nothing unlocked hides below the count-th value
        let top = locked[count - 1].value;
        let gap_above = locked.get(count).map(|p| p.value - top);
        let mut delta = 1e-7 * top.abs().max(1.0);
        if let Some(g) = gap_above {
            if g > 0.0 {
                delta = delta.min(0.5 * g);
            }
        }
        let threshold = top + delta;
        let below = count_below(k, m, threshold)?;
        let have = locked.iter().filter(|p| p.value < threshold).count();
        if below <= have {
            locked.truncate(count);
            return Ok(locked);
        }
    }
    Err(Error::SolverError {
        message: format!(
            "could not certify {count} eigenpairs after {MAX_RESTARTS} restarts ({} locked)",
            locked.len()
        ),
        residual: worst,
    })
}

/// One Lanczos sequence of length up to `len` on `(K - shift M)^{-1} M`,
/// kept `M`-orthogonal to `locked`. Returns Ritz pairs ascending in
/// eigenvalue and whether the Krylov space became invariant.
#[allow(clippy::too_many_arguments)]
fn lanczos_run(
    k: &SkylineMatrix,
    m: &SkylineMatrix,
    factor: &crate::linalg::skyline::Ldlt,
    shift: f64,
    len: usize,
    locked: &[EigenPair],
    locked_m: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<EigenPair>, bool)> {
    let n = k.dim();
    let locked_vecs: Vec<Vec<f64>> = locked.iter().map(|p| p.vector.clone()).collect();
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    orthogonalize(&mut q, &locked_vecs, locked_m);
    let nrm = m_dot(m, &q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= nrm);

    let mut qs: Vec<Vec<f64>> = vec![q];
    let mut mqs: Vec<Vec<f64>> = vec![m.mul_vec(&qs[0])];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut invariant = false;
    for j in 0..len {
        let mut w = factor.solve(&mqs[j]);
        let a = dot(&mqs[j], &w);
        alpha.push(a);
        axpy(&mut w, -a, &qs[j]);
        if j > 0 {
            axpy(&mut w, -beta[j - 1], &qs[j - 1]);
        }
        orthogonalize(&mut w, &locked_vecs, locked_m);
        orthogonalize(&mut w, &qs, &mqs);
        let b = m_dot(m, &w, &w).max(0.0).sqrt();
        if j + 1 == len {
            beta.push(b);
            break;
        }
        let scale = alpha.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        if b <= 1e-12 * scale {
            beta.push(0.0);
            invariant = true;
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        mqs.push(m.mul_vec(&w));
        qs.push(w);
    }

    let dim = alpha.len();
    let t = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let mut ritz: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &theta)| theta > 0.0)
        .map(|(i, &theta)| (shift + 1.0 / theta, i))
        .collect();
    ritz.sort_by(|a, b| a.0.total_cmp(&b.0));

    // residual of the shift-inverted operator: |beta_m y_m| / theta
    let beta_last = *beta.last().unwrap_or(&0.0);
    let mut out = Vec::with_capacity(ritz.len());
    for (value, col) in ritz {
        let y = eig.eigenvectors.column(col);
        let mut x = vec![0.0; n];
        for (coef, qv) in y.iter().zip(&qs) {
            axpy(&mut x, *coef, qv);
        }
        let nrm = m_dot(m, &x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nrm);
        let theta = eig.eigenvalues[col];
        out.push(EigenPair {
            value,
            vector: x,
            residual: (beta_last * y[dim - 1]).abs() / theta,
        });
    }
    Ok((out, invariant))
}
