//! Piecewise-linear finite elements for the coupled radial eigenproblem.
//!
//! Each sheet carries its own 1D mesh; element integrals of the `rho` and
//! `n^2 / rho` weights are exact. In the Neumann case the three nodes at
//! `rho = r` share one degree of freedom, so continuity holds strongly and
//! the flux balance comes out of the weak form. With lateral Dirichlet
//! conditions those nodes (and the node at `R`) are removed instead.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, SkylineMatrix};
use crate::model::branched::inverse_rho_element;
use crate::model::{
    AnnulusStackConfig, BoundaryCondition, BranchedGrid, BranchedRadialFunction, RadialGrid,
};
use crate::quad;

/// Elements per sheet: `annulus` on `(r, R)`, `disk` on each of the two
/// copies of `(0, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeshSizes {
    pub annulus: usize,
    pub disk: usize,
}

impl MeshSizes {
    pub fn uniform(elements: usize) -> Self {
        MeshSizes {
            annulus: elements,
            disk: elements,
        }
    }

    pub fn halved(self) -> Self {
        MeshSizes {
            annulus: (self.annulus / 2).max(1),
            disk: (self.disk / 2).max(1),
        }
    }
}

/// Treatment of the disk-centre nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OriginNode {
    /// Natural node (only admissible for `n = 0`).
    Free,
    Eliminated,
}

/// Assembled stiffness and mass of one angular index.
#[derive(Clone, Debug)]
pub struct CoupledRadialAssembly {
    pub n: u32,
    pub bc: BoundaryCondition,
    pub stiffness: SkylineMatrix,
    pub mass: SkylineMatrix,
    /// Global index of each mesh node, `None` where eliminated.
    pub dof_map: [Vec<Option<usize>>; 3],
    pub layout: Arc<BranchedGrid>,
}

impl CoupledRadialAssembly {
    pub fn dofs(&self) -> usize {
        self.mass.dim()
    }

    /// Nodal values (zero at eliminated nodes) of a global vector.
    pub fn profile(&self, x: &[f64]) -> BranchedRadialFunction {
        let values = std::array::from_fn(|s| {
            self.dof_map[s]
                .iter()
                .map(|d| d.map_or(0.0, |i| x[i]))
                .collect()
        });
        BranchedRadialFunction::new(self.layout.clone(), values).expect("layout matches dof map")
    }
}

/// Graded node sets for the given element counts.
pub fn mesh_nodes(cfg: &AnnulusStackConfig, mesh: MeshSizes) -> Result<[RadialGrid; 3]> {
    if mesh.annulus == 0 || mesh.disk == 0 {
        return Err(Error::InvalidArgument("mesh needs at least one element per sheet".into()));
    }
    let annulus = RadialGrid::graded(cfg.inner_radius, cfg.outer_radius, mesh.annulus + 1)?;
    let disk = RadialGrid::graded(0.0, cfg.inner_radius, mesh.disk + 1)?;
    Ok([annulus, disk.clone(), disk])
}

/// Assembles the forms of angular index `n` on graded meshes, eliminating
/// the disk centres for `n >= 1`.
pub fn assemble(n: u32, cfg: &AnnulusStackConfig, mesh: MeshSizes) -> Result<CoupledRadialAssembly> {
    let origin = if n == 0 {
        OriginNode::Free
    } else {
        OriginNode::Eliminated
    };
    assemble_on(n, cfg, mesh_nodes(cfg, mesh)?, origin)
}

/// Assembly on explicit meshes. Degrees of freedom are numbered top disk,
/// bottom disk, interface node, annulus, which keeps the skyline narrow.
pub fn assemble_on(
    n: u32,
    cfg: &AnnulusStackConfig,
    grids: [RadialGrid; 3],
    origin: OriginNode,
) -> Result<CoupledRadialAssembly> {
    if n >= 1 && origin == OriginNode::Free {
        return Err(Error::AssemblyContractViolation(format!(
            "n = {n}: basis functions must vanish at rho = 0"
        )));
    }
    let layout = BranchedGrid::new(cfg, grids)?;
    let bc = cfg.bc;
    let mut next = 0usize;
    let mut take = || {
        next += 1;
        Some(next - 1)
    };
    let mut maps: [Vec<Option<usize>>; 3] = Default::default();
    for s in [1, 2] {
        let len = layout.grid(s).len();
        maps[s] = (0..len)
            .map(|i| {
                if (i == 0 && origin == OriginNode::Eliminated) || i == len - 1 {
                    None
                } else {
                    take()
                }
            })
            .collect();
    }
    let interface = match bc {
        BoundaryCondition::Neumann => take(),
        BoundaryCondition::DirichletLateral => None,
    };
    let len1 = layout.grid(0).len();
    maps[0] = (0..len1)
        .map(|i| {
            if i == 0 {
                interface
            } else if i == len1 - 1 && bc == BoundaryCondition::DirichletLateral {
                None
            } else {
                take()
            }
        })
        .collect();
    maps[1][layout.grid(1).len() - 1] = interface;
    maps[2][layout.grid(2).len() - 1] = interface;
    let dim = next;
    if dim == 0 {
        return Err(Error::InvalidArgument("mesh has no free degrees of freedom".into()));
    }

    let pairs = (0..3).flat_map(|s| {
        maps[s]
            .windows(2)
            .filter_map(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) => Some((a, b)),
                _ => None,
            })
            .collect::<Vec<_>>()
    });
    let profile = SkylineMatrix::profile_from_pairs(dim, pairs);
    let mut k = SkylineMatrix::with_profile(profile.clone());
    let mut m = SkylineMatrix::with_profile(profile);
    let rule = quad::gauss_legendre(10);
    let n2 = f64::from(n * n);
    for s in 0..3 {
        let h = cfg.heights[s];
        let x = layout.grid(s).nodes();
        for e in 0..x.len() - 1 {
            let (a, b) = (x[e], x[e + 1]);
            let len = b - a;
            let mass = [
                [3.0 * a + b, a + b],
                [a + b, a + 3.0 * b],
            ]
            .map(|row| row.map(|v| h * len / 12.0 * v));
            let slope = h * (a + b) / (2.0 * len);
            let dofs = [maps[s][e], maps[s][e + 1]];
            let basis = [(1.0, 0.0), (0.0, 1.0)];
            for p in 0..2 {
                for q in 0..=p {
                    let (Some(i), Some(j)) = (dofs[p], dofs[q]) else {
                        continue;
                    };
                    let mut kv = if p == q { slope } else { -slope };
                    if n2 > 0.0 {
                        kv += h * n2 * inverse_rho_element(a, b, basis[p], basis[q], &rule);
                    }
                    // the (p, q) loop visits each off-diagonal pair once
                    k.add(i, j, kv);
                    m.add(i, j, mass[p][q]);
                }
            }
        }
    }
    Ok(CoupledRadialAssembly {
        n,
        bc,
        stiffness: k,
        mass: m,
        dof_map: maps,
        layout,
    })
}

/// One discrete eigenpair with its nodal profile.
#[derive(Clone, Debug)]
pub struct OracleMode {
    pub lambda: f64,
    pub vector: Vec<f64>,
    pub profile: BranchedRadialFunction,
    pub residual: f64,
}

/// The `k` smallest eigenpairs of `K x = lambda M x`, `M`-orthonormal.
pub fn solve_eigs(asm: &CoupledRadialAssembly, k: usize) -> Result<Vec<OracleMode>> {
    if k == 0 || k > asm.dofs() {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs of {} degrees of freedom",
            asm.dofs()
        )));
    }
    // a kernel exists only for n = 0 with Neumann coupling
    let shift = if asm.n == 0 && asm.bc == BoundaryCondition::Neumann {
        -1.0
    } else {
        0.0
    };
    let pairs = linalg::smallest_eigenpairs(&asm.stiffness, &asm.mass, k, shift, 0x5eed + u64::from(asm.n))?;
    Ok(pairs
        .into_iter()
        .map(|p| OracleMode {
            lambda: p.value,
            profile: asm.profile(&p.vector),
            vector: p.vector,
            residual: p.residual,
        })
        .collect())
}

/// Number of discrete eigenvalues strictly below `threshold`.
pub fn count_below(asm: &CoupledRadialAssembly, threshold: f64) -> Result<usize> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {threshold}")));
    }
    linalg::count_below(&asm.stiffness, &asm.mass, threshold)
}

/// Extrapolates a second-order quantity from meshes `h` and `h / 2`.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// The `k` smallest eigenvalues on `mesh`, Richardson-extrapolated against
/// the mesh with half as many elements.
pub fn extrapolated_eigenvalues(
    n: u32,
    cfg: &AnnulusStackConfig,
    mesh: MeshSizes,
    k: usize,
) -> Result<Vec<f64>> {
    let fine = solve_eigs(&assemble(n, cfg, mesh)?, k)?;
    let coarse = solve_eigs(&assemble(n, cfg, mesh.halved())?, k)?;
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| richardson(c.lambda, f.lambda))
        .collect())
}
