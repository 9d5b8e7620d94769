use thindom::dispersion::scan_roots;
use thindom::model::{AnnulusStackConfig, BoundaryCondition, BranchedRadialFunction, GridSpec, RadialGrid};
use thindom::quad;
use thindom::radial_oracle::{
    assemble, assemble_on, count_below, extrapolated_eigenvalues, mesh_nodes, solve_eigs, MeshSizes, OriginNode,
};
use thindom::Error;

fn cfg(bc: BoundaryCondition) -> AnnulusStackConfig {
    AnnulusStackConfig::with_grid(1.0, 2.0, [1.0, 0.3, 0.3], bc, GridSpec::default()).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn constants_span_the_neumann_kernel() {
    let asm = assemble(0, &cfg(BoundaryCondition::Neumann), MeshSizes::uniform(64)).unwrap();
    let ones = vec![1.0; asm.dofs()];
    let k1 = asm.stiffness.mul_vec(&ones);
    let knorm = asm.stiffness.max_abs_diagonal();
    assert!(dot(&k1, &k1).sqrt() < 1e-12 * knorm);
    // 1^T M 1 = sum_j h_j int rho
    let total = dot(&ones, &asm.mass.mul_vec(&ones));
    let want = 0.5 * (1.0 * (4.0 - 1.0) + 0.6 * 1.0);
    assert!((total - want).abs() < 1e-13);
}

#[test]
fn one_dof_carries_the_interface() {
    let asm = assemble(2, &cfg(BoundaryCondition::Neumann), MeshSizes::uniform(16)).unwrap();
    let i0 = asm.dof_map[0][0];
    let i1 = *asm.dof_map[1].last().unwrap();
    let i2 = *asm.dof_map[2].last().unwrap();
    assert!(i0.is_some() && i0 == i1 && i1 == i2);
    assert_eq!(asm.dof_map[1][0], None);
    let d = assemble(0, &cfg(BoundaryCondition::DirichletLateral), MeshSizes::uniform(16)).unwrap();
    assert_eq!(d.dof_map[0][0], None);
    assert_eq!(*d.dof_map[0].last().unwrap(), None);
    assert_eq!(*d.dof_map[1].last().unwrap(), None);
}

#[test]
fn element_integrals_match_quadrature() {
    // x^T K x for the interpolant of a smooth profile vanishing at 0
    let c = cfg(BoundaryCondition::Neumann);
    let n = 3;
    let asm = assemble(n, &c, MeshSizes { annulus: 5, disk: 7 }).unwrap();
    let f = |s: usize, x: f64| match s {
        0 => 0.5 + 0.3 * x,
        1 => 0.8 * x,
        _ => 0.8 * x * x,
    };
    let prof = BranchedRadialFunction::sample(asm.layout.clone(), f);
    let mut x = vec![0.0; asm.dofs()];
    for s in 0..3 {
        for (i, d) in asm.dof_map[s].iter().enumerate() {
            if let Some(d) = d {
                x[*d] = prof.values(s)[i];
            }
        }
    }
    let got = dot(&x, &asm.stiffness.mul_vec(&x));
    let rule = quad::gauss_legendre(30);
    let mut want = 0.0;
    for s in 0..3 {
        let nodes = asm.layout.grid(s).nodes();
        let v = prof.values(s);
        for e in 0..nodes.len() - 1 {
            let (a, b) = (nodes[e], nodes[e + 1]);
            let slope = (v[e + 1] - v[e]) / (b - a);
            let lin = |t: f64| v[e] + slope * (t - a);
            want += c.heights[s]
                * quad::integrate(&rule, a, b, |t| t * slope * slope + f64::from(n * n) * lin(t).powi(2) / t);
        }
    }
    assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
}

#[test]
fn nonvanishing_origin_is_rejected() {
    let c = cfg(BoundaryCondition::Neumann);
    let grids = mesh_nodes(&c, MeshSizes::uniform(8)).unwrap();
    let err = assemble_on(1, &c, grids, OriginNode::Free).unwrap_err();
    assert!(matches!(err, Error::AssemblyContractViolation(_)));
}

#[test]
fn neumann_zero_mode() {
    let c = cfg(BoundaryCondition::Neumann);
    let asm = assemble(0, &c, MeshSizes::uniform(256)).unwrap();
    let modes = solve_eigs(&asm, 3).unwrap();
    assert!(modes[0].lambda.abs() < 1e-8);
    let v = &modes[0].profile;
    let mean = v.values(0)[0];
    assert!((v.max_abs() - mean.abs()).abs() < 1e-8 * mean.abs());
    assert_eq!(count_below(&asm, 0.5 * modes[1].lambda).unwrap(), 1);
}

#[test]
fn dirichlet_disk_converges_at_second_order() {
    let c = cfg(BoundaryCondition::DirichletLateral);
    let exact = 2.404825557695773f64.powi(2);
    let err = |el: usize| {
        let asm = assemble(0, &c, MeshSizes::uniform(el)).unwrap();
        let modes = solve_eigs(&asm, 2).unwrap();
        // disk value is double: both disks carry it
        assert!((modes[0].lambda - modes[1].lambda).abs() < 1e-9 * exact);
        modes[0].lambda - exact
    };
    let (e1, e2, e3) = (err(64), err(128), err(256));
    assert!(e3.abs() < 1e-3 * exact);
    for ratio in [e1 / e2, e2 / e3] {
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn eigenvectors_are_mass_orthonormal() {
    let asm = assemble(1, &cfg(BoundaryCondition::Neumann), MeshSizes::uniform(200)).unwrap();
    let modes = solve_eigs(&asm, 10).unwrap();
    for a in &modes {
        let ma = asm.mass.mul_vec(&a.vector);
        for b in &modes {
            let want = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
            assert!((dot(&ma, &b.vector) - want).abs() < 1e-8);
        }
    }
}

#[test]
fn count_below_is_monotone_and_matches_roots() {
    let c = cfg(BoundaryCondition::Neumann);
    for n in 0..3 {
        let asm = assemble(n, &c, MeshSizes::uniform(400)).unwrap();
        let mut prev = 0;
        for t in [1.0, 5.0, 12.0, 20.0, 40.0] {
            let cnt = count_below(&asm, t).unwrap();
            assert!(cnt >= prev);
            prev = cnt;
        }
        // thresholds between converged eigenvalues
        let roots = scan_roots(n, 40.0, &c).unwrap().len();
        let extra = usize::from(n == 0);
        assert_eq!(count_below(&asm, 40.0).unwrap(), roots + extra, "n={n}");
    }
}

#[test]
fn parseval_deficit_decreases() {
    let c = cfg(BoundaryCondition::Neumann);
    let asm = assemble(0, &c, MeshSizes::uniform(400)).unwrap();
    let modes = solve_eigs(&asm, 50).unwrap();
    let prof = BranchedRadialFunction::sample(asm.layout.clone(), |s, x| match s {
        0 => (x - 1.0).cos(),
        1 => 1.0 + 0.2 * (x * x - 1.0),
        _ => 1.0 - 0.1 * (x * x - 1.0),
    });
    let mut g = vec![0.0; asm.dofs()];
    for s in 0..3 {
        for (i, d) in asm.dof_map[s].iter().enumerate() {
            if let Some(d) = d {
                g[*d] = prof.values(s)[i];
            }
        }
    }
    let mg = asm.mass.mul_vec(&g);
    let total = dot(&g, &mg);
    let mut acc = 0.0;
    let mut prev = f64::INFINITY;
    for md in &modes {
        acc += dot(&md.vector, &mg).powi(2);
        let deficit = (total - acc) / total;
        assert!(deficit <= prev + 1e-14);
        prev = deficit;
    }
    assert!(prev < 1e-4, "deficit {prev}");
}

#[test]
fn balance_condition_emerges() {
    let c = cfg(BoundaryCondition::Neumann);
    let res = |el: usize| {
        let asm = assemble(0, &c, MeshSizes::uniform(el)).unwrap();
        let md = &solve_eigs(&asm, 2).unwrap()[1];
        md.profile.balance_residual()
    };
    let (a, b) = (res(100), res(400));
    assert!(b < 0.5 * a && b < 0.05, "{a} {b}");
}

#[test]
fn oracle_agrees_with_dispersion_on_moderate_mesh() {
    let c = cfg(BoundaryCondition::Neumann);
    for n in 0..2 {
        let roots = scan_roots(n, 30.0, &c).unwrap();
        let k = roots.len() + usize::from(n == 0);
        let ex = extrapolated_eigenvalues(n, &c, MeshSizes::uniform(512), k).unwrap();
        let fem = if n == 0 { &ex[1..] } else { &ex[..] };
        for (a, b) in roots.iter().zip(fem) {
            assert!((a - b).abs() < 1e-5 * a, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn graded_meshes_are_accepted() {
    let c = cfg(BoundaryCondition::Neumann);
    let g = [
        RadialGrid::graded(1.0, 2.0, 9).unwrap(),
        RadialGrid::uniform(0.0, 1.0, 5).unwrap(),
        RadialGrid::graded(0.0, 1.0, 7).unwrap(),
    ];
    let asm = assemble_on(0, &c, g, OriginNode::Free).unwrap();
    // annulus 9 (interface included), top disk 4, bottom disk 6
    assert_eq!(asm.dofs(), 19);
}

#[test]
fn dirichlet_union_agrees_with_oracle() {
    let c = cfg(BoundaryCondition::DirichletLateral);
    let spec = thindom::dispersion::dirichlet_spectrum(&c, 1, 4).unwrap();
    for n in 0..2 {
        let vals: Vec<f64> = spec.for_n(n).map(|m| m.lambda).collect();
        let ex = extrapolated_eigenvalues(n, &c, MeshSizes::uniform(512), vals.len()).unwrap();
        for (a, b) in vals.iter().zip(&ex) {
            assert!((a - b).abs() < 1e-5 * a, "n={n}: {a} vs {b}");
        }
    }
}
