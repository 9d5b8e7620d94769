//! Axisymmetric eigenvalues of the squeezed form on the notched cylinder.
//!
//! On the meridian section `D = {0 <= rho < R, 0 < y < h1}` minus the notch
//! `[0, r] x [h3, h1 - h2]` the form is
//! `int_D (u_rho v_rho + eps^-2 u_y v_y) rho d rho dy` against the mass
//! `int_D u v rho d rho dy`. As `eps -> 0` its spectrum approaches the
//! `n = 0` spectrum of the limit problem.

use rayon::prelude::*;

use crate::dispersion;
use crate::error::{Error, Result};
use crate::linalg::{smallest_eigenpairs, SkylineMatrix};
use crate::model::{AnnulusStackConfig, BoundaryCondition};

/// Largest number of eigenvalues a sweep reports per `eps`.
pub const MAX_K: usize = 12;

/// Cell counts of the tensor mesh, spread over the radial segments
/// `[0, r]`, `[r, R]` and the height segments `[0, h3]`, `[h3, h1 - h2]`,
/// `[h1 - h2, h1]` in proportion to their lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeshResolution {
    pub rho_cells: usize,
    pub y_cells: usize,
}

impl MeshResolution {
    pub fn refined(self) -> Self {
        MeshResolution {
            rho_cells: 2 * self.rho_cells,
            y_cells: 2 * self.y_cells,
        }
    }
}

impl Default for MeshResolution {
    fn default() -> Self {
        MeshResolution {
            rho_cells: 192,
            y_cells: 128,
        }
    }
}

/// Rectangular mesh of the meridian section with the notch cells removed.
#[derive(Clone, Debug)]
pub struct MeridianMesh {
    pub rho: Vec<f64>,
    pub y: Vec<f64>,
    pub epsilon: f64,
    /// `cells[i][j]`: whether cell `[rho_i, rho_i+1] x [y_j, y_j+1]` is kept.
    cells: Vec<Vec<bool>>,
    /// Node number of `(rho_i, y_j)`, column-major with `y` fastest.
    node: Vec<Vec<Option<usize>>>,
    nodes: usize,
}

fn segment(a: f64, b: f64, cells: usize, near_a: bool, near_b: bool) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    (0..=cells)
        .map(|k| {
            let t = k as f64 / cells as f64;
            // cells shrink about five-fold towards the flagged ends
            let g = match (near_a, near_b) {
                (true, true) => t - 0.8 * (tau * t).sin() / tau,
                (true, false) => 0.2 * t + 0.8 * t * t,
                (false, true) => 1.0 - (0.2 * (1.0 - t) + 0.8 * (1.0 - t) * (1.0 - t)),
                (false, false) => t,
            };
            a + (b - a) * g
        })
        .collect()
}

fn axis(breaks: &[(f64, bool)], total: usize) -> Vec<f64> {
    let span = breaks.last().unwrap().0 - breaks[0].0;
    let mut out = vec![breaks[0].0];
    for w in breaks.windows(2) {
        let ((a, fa), (b, fb)) = (w[0], w[1]);
        let cells = ((total as f64 * (b - a) / span).round() as usize).max(2);
        out.extend(segment(a, b, cells, fa, fb).into_iter().skip(1));
    }
    out
}

impl MeridianMesh {
    /// Graded tensor mesh: refined towards `rho = r` and the notch heights.
    pub fn graded(cfg: &AnnulusStackConfig, epsilon: f64, res: MeshResolution) -> Result<Self> {
        let [h1, h2, h3] = cfg.heights;
        let rho = axis(&[(0.0, false), (cfg.inner_radius, true), (cfg.outer_radius, false)], res.rho_cells);
        let y = axis(&[(0.0, false), (h3, true), (h1 - h2, true), (h1, false)], res.y_cells);
        Self::from_axes(cfg, epsilon, rho, y)
    }

    /// Mesh on explicit axes, which must contain `r`, `h3` and `h1 - h2`.
    pub fn from_axes(cfg: &AnnulusStackConfig, epsilon: f64, rho: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        let [h1, h2, h3] = cfg.heights;
        let strictly_increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if !strictly_increasing(&rho) || !strictly_increasing(&y) {
            return Err(Error::MeshError("mesh axes must be strictly increasing".into()));
        }
        let ends_ok = rho[0] == 0.0
            && *rho.last().unwrap() == cfg.outer_radius
            && y[0] == 0.0
            && *y.last().unwrap() == h1;
        if !ends_ok {
            return Err(Error::MeshError("mesh axes must span [0, R] x [0, h1]".into()));
        }
        let notch = [
            ("r", &rho, cfg.inner_radius),
            ("h3", &y, h3),
            ("h1 - h2", &y, h1 - h2),
        ];
        for (name, ax, v) in notch {
            if !ax.iter().any(|&x| x == v) {
                return Err(Error::MeshError(format!("no mesh line at the notch edge {name} = {v}")));
            }
        }
        let (nr, ny) = (rho.len(), y.len());
        let cells: Vec<Vec<bool>> = (0..nr - 1)
            .map(|i| {
                (0..ny - 1)
                    .map(|j| {
                        let rc = 0.5 * (rho[i] + rho[i + 1]);
                        let yc = 0.5 * (y[j] + y[j + 1]);
                        !(rc < cfg.inner_radius && yc > h3 && yc < h1 - h2)
                    })
                    .collect()
            })
            .collect();
        let mut node = vec![vec![None; ny]; nr];
        let mut count = 0;
        for (i, col) in node.iter_mut().enumerate() {
            for (j, slot) in col.iter_mut().enumerate() {
                let touches = (i.saturating_sub(1)..=i.min(nr - 2))
                    .any(|ci| (j.saturating_sub(1)..=j.min(ny - 2)).any(|cj| cells[ci][cj]));
                if touches {
                    *slot = Some(count);
                    count += 1;
                }
            }
        }
        Ok(MeridianMesh {
            rho,
            y,
            epsilon,
            cells,
            node,
            nodes: count,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn node_index(&self, i: usize, j: usize) -> Option<usize> {
        self.node[i][j]
    }

    pub fn cell_kept(&self, i: usize, j: usize) -> bool {
        self.cells[i][j]
    }

    /// Whether node `(i, j)` lies on the lateral boundary: the outer wall
    /// `rho = R` or the notch wall `rho = r`, `h3 <= y <= h1 - h2`.
    fn lateral(&self, cfg: &AnnulusStackConfig, i: usize, j: usize) -> bool {
        let [h1, h2, h3] = cfg.heights;
        let (x, y) = (self.rho[i], self.y[j]);
        x == cfg.outer_radius || (x == cfg.inner_radius && y >= h3 && y <= h1 - h2)
    }
}

/// Stiffness and mass of the squeezed form, with lateral Dirichlet nodes
/// eliminated when the config asks for them.
pub fn assemble_squeezed(mesh: &MeridianMesh, cfg: &AnnulusStackConfig) -> Result<(SkylineMatrix, SkylineMatrix)> {
    let nr = mesh.rho.len();
    let ny = mesh.y.len();
    let mut dof = vec![vec![None; ny]; nr];
    let mut count = 0;
    for i in 0..nr {
        for j in 0..ny {
            if mesh.node[i][j].is_none() {
                continue;
            }
            if cfg.bc == BoundaryCondition::DirichletLateral && mesh.lateral(cfg, i, j) {
                continue;
            }
            dof[i][j] = Some(count);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::MeshError("no free nodes".into()));
    }
    let cells = || {
        (0..nr - 1).flat_map(move |i| (0..ny - 1).filter(move |&j| mesh.cells[i][j]).map(move |j| (i, j)))
    };
    let corners = |i: usize, j: usize| [dof[i][j], dof[i][j + 1], dof[i + 1][j], dof[i + 1][j + 1]];
    let mut pairs = Vec::new();
    for (i, j) in cells() {
        let c = corners(i, j);
        for a in c.iter().flatten() {
            for b in c.iter().flatten() {
                pairs.push((*a, *b));
            }
        }
    }
    let profile = SkylineMatrix::profile_from_pairs(count, pairs);
    let mut k = SkylineMatrix::with_profile(profile.clone());
    let mut m = SkylineMatrix::with_profile(profile);
    let inv_eps2 = mesh.epsilon.powi(-2);
    for (i, j) in cells() {
        let (a, b) = (mesh.rho[i], mesh.rho[i + 1]);
        let hr = b - a;
        let hy = mesh.y[j + 1] - mesh.y[j];
        let mr = [[3.0 * a + b, a + b], [a + b, a + 3.0 * b]].map(|r| r.map(|v| v * hr / 12.0));
        let kr = [[1.0, -1.0], [-1.0, 1.0]].map(|r| r.map(|v: f64| v * (a + b) / (2.0 * hr)));
        let my = [[2.0, 1.0], [1.0, 2.0]].map(|r| r.map(|v: f64| v * hy / 6.0));
        let ky = [[1.0, -1.0], [-1.0, 1.0]].map(|r| r.map(|v: f64| v / hy));
        let c = corners(i, j);
        // local index = 2 * (rho offset) + (y offset)
        for p in 0..4 {
            for q in 0..=p {
                let (Some(gp), Some(gq)) = (c[p], c[q]) else {
                    continue;
                };
                let (pr, py, qr, qy) = (p / 2, p % 2, q / 2, q % 2);
                let kv = kr[pr][qr] * my[py][qy] + inv_eps2 * mr[pr][qr] * ky[py][qy];
                let mv = mr[pr][qr] * my[py][qy];
                k.add(gp, gq, kv);
                m.add(gp, gq, mv);
            }
        }
    }
    Ok((k, m))
}

/// The `k` lowest eigenvalues of the squeezed problem on `mesh`.
pub fn squeezed_eigenvalues(mesh: &MeridianMesh, cfg: &AnnulusStackConfig, k: usize) -> Result<Vec<f64>> {
    let (stiff, mass) = assemble_squeezed(mesh, cfg)?;
    let shift = match cfg.bc {
        BoundaryCondition::Neumann => -1.0,
        BoundaryCondition::DirichletLateral => 0.0,
    };
    Ok(smallest_eigenpairs(&stiff, &mass, k, shift, 0xe95)?
        .into_iter()
        .map(|p| p.value)
        .collect())
}

/// One row of a sweep: the lowest eigenvalues at one `eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub lambdas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Lowest `n = 0` eigenvalues of the limit problem, with multiplicity.
    pub targets: Vec<f64>,
}

impl SweepTable {
    /// `|lambda_k(eps) - lambda_0k|` per row.
    pub fn gaps(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.lambdas.iter().zip(&self.targets).map(|(a, b)| (a - b).abs()).collect())
            .collect()
    }

    /// CSV with header `epsilon,k,lambda,target_lambda0,abs_gap`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,k,lambda,target_lambda0,abs_gap\n");
        for row in &self.rows {
            for (k, (lam, target)) in row.lambdas.iter().zip(&self.targets).enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{:.6e}\n",
                    row.epsilon,
                    k + 1,
                    dispersion::fmt_sig15(*lam),
                    dispersion::fmt_sig15(*target),
                    (lam - target).abs()
                ));
            }
        }
        out
    }
}

/// Lowest `k` eigenvalues of the limit problem restricted to `n = 0`.
pub fn limit_targets(cfg: &AnnulusStackConfig, k: usize) -> Result<Vec<f64>> {
    let m_max = k as u32 + 1;
    let spec = dispersion::spectrum(cfg, 0, m_max, None)?;
    let mut vals: Vec<f64> = spec.modes.iter().map(|md| md.lambda).collect();
    vals.sort_by(f64::total_cmp);
    vals.truncate(k);
    Ok(vals)
}

/// Lowest `k` squeezed eigenvalues for each `eps` (given in decreasing
/// order) together with the limit targets.
pub fn sweep(cfg: &AnnulusStackConfig, eps_list: &[f64], k: usize, res: MeshResolution) -> Result<SweepTable> {
    if k == 0 || k > MAX_K {
        return Err(Error::InvalidArgument(format!("k must lie in 1..={MAX_K}, got {k}")));
    }
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("empty epsilon list".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("epsilon list must be strictly decreasing".into()));
    }
    let targets = limit_targets(cfg, k)?;
    let rows: Result<Vec<SweepRow>> = eps_list
        .par_iter()
        .map(|&epsilon| {
            let mesh = MeridianMesh::graded(cfg, epsilon, res)?;
            Ok(SweepRow {
                epsilon,
                lambdas: squeezed_eigenvalues(&mesh, cfg, k)?,
            })
        })
        .collect();
    Ok(SweepTable { rows: rows?, targets })
}
