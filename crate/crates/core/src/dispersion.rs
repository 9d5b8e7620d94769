//! Analytic spectrum of the limit operator on the notched cylinder.
//!
//! For angular index `n` and `lambda = s^2 > 0` a separated eigenfunction
//! is `(c1 J(s rho) + c4 Y(s rho), c2 J(s rho), c3 J(s rho))` times the
//! angular factor, with `J = J_|n|`, `Y = Y_|n|`. The four interface and
//! end conditions form the 4x4 system assembled by [`build_matrix`]; its
//! determinant vanishes exactly at the eigenvalues.
//!
//! With lateral Dirichlet conditions the sheets decouple and the spectrum
//! is the union of two disk spectra and one annulus spectrum.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix4;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{AnnulusStackConfig, BoundaryCondition, BranchedGrid, BranchedRadialFunction};
use crate::specfun::{bessel_j_deriv, bessel_jy, BesselEval};

/// Singular values below this fraction of the largest span the nullspace.
pub const NULLSPACE_RTOL: f64 = 1e-8;
/// Interface residual above which an assembled mode is rejected.
pub const RESIDUAL_LIMIT: f64 = 1e-6;
/// Relative bracket width at which root bisection stops.
pub const ROOT_RTOL: f64 = 1e-13;
/// Eigenvalues closer than this (relative) are reported as coincident.
pub const COINCIDENCE_RTOL: f64 = 1e-9;

/// The 4x4 matrix of the interface system at `(n, lambda)`.
///
/// Columns multiply `(c1, c2, c3, c4)`; rows are, in order: Neumann end at
/// `R`, continuity annulus/top disk at `r`, continuity top/bottom disk at
/// `r`, flux balance at `r`. Derivative entries are `J'(s rho)` etc.
/// without the common factor `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersionMatrix {
    pub n: u32,
    pub lambda: f64,
    pub entries: [[f64; 4]; 4],
    /// Natural magnitude of each row (Bessel modulus of its argument).
    pub row_scale: [f64; 4],
}

pub fn build_matrix(n: u32, lambda: f64, cfg: &AnnulusStackConfig) -> Result<DispersionMatrix> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "dispersion matrix needs lambda > 0, got {lambda}"
        )));
    }
    let s = lambda.sqrt();
    let outer = bessel_jy(n, s * cfg.outer_radius)?;
    let inner = bessel_jy(n, s * cfg.inner_radius)?;
    let [h1, h2, h3] = cfg.heights;
    let (j, y, jp, yp) = (inner.j, inner.y, inner.jp, inner.yp);
    let entries = [
        [outer.jp, 0.0, 0.0, outer.yp],
        [j, -j, 0.0, y],
        [0.0, j, -j, 0.0],
        [h1 * jp, -h2 * jp, -h3 * jp, h1 * yp],
    ];
    let modulus = |a: f64, b: f64| a.hypot(b);
    let hmax = h1.max(h2).max(h3);
    let row_scale = [
        modulus(outer.jp, outer.yp),
        modulus(j, y),
        modulus(j, y),
        hmax * modulus(jp, yp),
    ];
    Ok(DispersionMatrix {
        n,
        lambda,
        entries,
        row_scale,
    })
}

impl DispersionMatrix {
    /// Determinant by full permutation expansion with compensated summation.
    pub fn det(&self) -> f64 {
        det4(&self.entries)
    }

    /// Determinant of the row-scaled matrix; of order one away from roots.
    pub fn scaled_det(&self) -> f64 {
        let mut e = self.entries;
        for (row, sc) in e.iter_mut().zip(self.row_scale) {
            row.iter_mut().for_each(|x| *x /= sc);
        }
        det4(&e)
    }
}

const PERMS: [([usize; 4], f64); 24] = {
    let mut out = [([0usize; 4], 0.0f64); 24];
    let mut idx = 0;
    let mut a = 0;
    while a < 4 {
        let mut b = 0;
        while b < 4 {
            let mut c = 0;
            while c < 4 {
                let mut d = 0;
                while d < 4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        let p = [a, b, c, d];
                        let mut inv = 0;
                        let mut i = 0;
                        while i < 4 {
                            let mut j = i + 1;
                            while j < 4 {
                                if p[i] > p[j] {
                                    inv += 1;
                                }
                                j += 1;
                            }
                            i += 1;
                        }
                        out[idx] = (p, if inv % 2 == 0 { 1.0 } else { -1.0 });
                        idx += 1;
                    }
                    d += 1;
                }
                c += 1;
            }
            b += 1;
        }
        a += 1;
    }
    out
};

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    // Neumaier summation of the 24 signed products
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (p, sign) in PERMS.iter() {
        let term = sign * m[0][p[0]] * m[1][p[1]] * m[2][p[2]] * m[3][p[3]];
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn scan_step(cfg: &AnnulusStackConfig) -> f64 {
    PI / (8.0 * cfg.outer_radius)
}

fn bisect_root<F: Fn(f64) -> Result<f64>>(f: &F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo)?;
    for _ in 0..200 {
        if hi - lo <= ROOT_RTOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sign-change roots of `s -> g(s)` on `(0, s_max]`, sampled every `step`.
fn sign_change_roots<F: Fn(f64) -> Result<f64>>(g: &F, s_max: f64, step: f64) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    let mut lo = 1e-3 * step;
    let mut flo = g(lo)?;
    while lo < s_max {
        let hi = (lo + step).min(s_max);
        let fhi = g(hi)?;
        if fhi == 0.0 {
            roots.push(hi);
        } else if flo != 0.0 && flo.signum() != fhi.signum() {
            roots.push(bisect_root(g, lo, hi)?);
        }
        lo = hi;
        flo = fhi;
    }
    Ok(roots)
}

/// `det M = J(s r) D(s)`; this is `D(s)` divided by the product of the
/// row scales, so it keeps order one while the disk factor `J(s r)` is
/// split off.
pub fn reduced_det(n: u32, s: f64, cfg: &AnnulusStackConfig) -> Result<f64> {
    let o = bessel_jy(n, s * cfg.outer_radius)?;
    let i = bessel_jy(n, s * cfg.inner_radius)?;
    let [h1, h2, h3] = cfg.heights;
    let (a, b) = (o.jp, o.yp);
    let d = h1 * i.j * (a * i.yp - b * i.jp) - (h2 + h3) * i.jp * (a * i.y - b * i.j);
    let hmax = h1.max(h2).max(h3);
    let mi = i.j.hypot(i.y);
    Ok(d / (a.hypot(b) * mi * hmax * i.jp.hypot(i.yp)))
}

/// Positive eigenvalues of angular index `n` up to `lambda_max`.
///
/// The roots of `det M` are the zeros of `J(s r)` (disk Dirichlet values)
/// together with the sign changes of [`reduced_det`] on a grid in
/// `s = sqrt(lambda)` with spacing `pi / (8 R)`, refined by bisection.
/// Roots of both factors that agree to `1e-10` are merged into one value.
pub fn scan_roots(n: u32, lambda_max: f64, cfg: &AnnulusStackConfig) -> Result<Vec<f64>> {
    if !(lambda_max > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda_max must be positive, got {lambda_max}")));
    }
    let s_max = lambda_max.sqrt();
    let g = |s: f64| reduced_det(n, s, cfg);
    let mut roots = sign_change_roots(&g, s_max, scan_step(cfg))?;
    for k in 1.. {
        let s = crate::specfun::bessel_j_zero(n, k) / cfg.inner_radius;
        if s > s_max {
            break;
        }
        roots.push(s);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() <= 1e-10 * *a);
    Ok(roots.into_iter().map(|s| s * s).collect())
}

/// As [`scan_roots`], but reconciles the count of roots below `count_limit`
/// with an independent `oracle_count`. Missing roots are searched as
/// touching zeros of `|det|`; if the counts still disagree the scan fails
/// with [`Error::SuspectedEvenRoot`].
pub fn scan_roots_checked(
    n: u32,
    lambda_max: f64,
    cfg: &AnnulusStackConfig,
    count_limit: f64,
    oracle_count: usize,
) -> Result<Vec<f64>> {
    let mut roots = scan_roots(n, lambda_max, cfg)?;
    let below = |r: &[f64]| r.iter().filter(|&&l| l < count_limit).count();
    if below(&roots) >= oracle_count {
        return Ok(roots);
    }
    let step = scan_step(cfg);
    let g = |s: f64| reduced_det(n, s, cfg);
    let s_lim = count_limit.sqrt();
    let mut s = 1e-3 * step;
    let mut samples = Vec::new();
    while s <= s_lim + step {
        samples.push((s, g(s)?));
        s += step;
    }
    for w in samples.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        let same_sign = a.1.signum() == b.1.signum() && b.1.signum() == c.1.signum();
        if same_sign && b.1.abs() < a.1.abs() && b.1.abs() < c.1.abs() {
            let (smin, fmin) = golden_min(|x| g(x).map(f64::abs), a.0, c.0)?;
            if fmin < 1e-8 * a.1.abs().max(c.1.abs()) {
                let lam = smin * smin;
                if !roots.iter().any(|r| (r - lam).abs() < 1e-9 * lam) {
                    roots.push(lam);
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    if below(&roots) < oracle_count {
        return Err(Error::SuspectedEvenRoot {
            n,
            lo: 0.0,
            hi: count_limit,
        });
    }
    Ok(roots)
}

fn golden_min<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..200 {
        if b - a <= 1e-14 * b {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 < f2 { (x1, f1) } else { (x2, f2) })
}

/// Orthonormal basis of the numerical nullspace of `M`, computed by SVD of
/// the row-scaled matrix. Each vector is signed so that its first entry of
/// largest magnitude is positive.
pub fn nullspace_coeffs(m: &DispersionMatrix) -> Result<Vec<[f64; 4]>> {
    let a = Matrix4::from_fn(|i, j| m.entries[i][j] / m.row_scale[i]);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let mut out = Vec::new();
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        if sv < NULLSPACE_RTOL * smax {
            let row = v_t.row(k);
            let mut c = [row[0], row[1], row[2], row[3]];
            let mut big = 0;
            for i in 1..4 {
                if c[i].abs() > c[big].abs() * (1.0 + 1e-12) {
                    big = i;
                }
            }
            if c[big] < 0.0 {
                c.iter_mut().for_each(|x| *x = -*x);
            }
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyNullspace {
            ratio: smin / smax,
        });
    }
    Ok(out)
}

/// Where an eigenmode comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Oracle,
}

/// One radial eigenpair of the limit operator with its angular index.
///
/// The profile is normalised in the radial weighted product
/// `sum_j h_j int rho v_j^2 = 1`; the planar eigenfunctions are
/// `profile / sqrt(2 pi)` for `n = 0` and `profile cos(n theta) / sqrt(pi)`,
/// `profile sin(n theta) / sqrt(pi)` for `n > 0`.
#[derive(Clone, Debug)]
pub struct EigenMode {
    pub n: u32,
    pub m: u32,
    pub ell: u32,
    pub lambda: f64,
    /// `(c1, c2, c3, c4)` scaled to the normalised profile; `None` for the
    /// constant mode.
    pub coeffs: Option<[f64; 4]>,
    pub profile: BranchedRadialFunction,
    pub ang_mult: u32,
    pub residual_compat: f64,
    pub residual_balance: f64,
    pub provenance: Provenance,
}

impl EigenMode {
    /// Sheets on which the profile is not identically zero.
    pub fn support(&self) -> [bool; 3] {
        match self.coeffs {
            None => [true; 3],
            Some(c) => [c[0] != 0.0 || c[3] != 0.0, c[1] != 0.0, c[2] != 0.0],
        }
    }

    /// Radial profile value at `rho` on `sheet` (evaluated analytically).
    pub fn radial_value(&self, sheet: usize, rho: f64) -> f64 {
        match self.coeffs {
            None => self.profile.values(sheet)[0],
            Some(c) => {
                let s = self.lambda.sqrt();
                match sheet {
                    0 => {
                        let e = bessel_jy(self.n, s * rho).expect("annulus radius positive");
                        c[0] * e.j + c[3] * e.y
                    }
                    1 => c[1] * bessel_j_deriv(self.n, s * rho).0,
                    _ => c[2] * bessel_j_deriv(self.n, s * rho).0,
                }
            }
        }
    }
}

fn normalize_mode(
    n: u32,
    lambda: f64,
    c: [f64; 4],
    layout: &Arc<BranchedGrid>,
) -> (BranchedRadialFunction, [f64; 4]) {
    let s = lambda.sqrt();
    let profile = BranchedRadialFunction::sample(layout.clone(), |sheet, rho| match sheet {
        0 => {
            let e = bessel_jy(n, s * rho).expect("annulus radius positive");
            c[0] * e.j + c[3] * e.y
        }
        1 => c[1] * bessel_j_deriv(n, s * rho).0,
        _ => c[2] * bessel_j_deriv(n, s * rho).0,
    });
    let norm = profile.norm();
    let mut p = profile;
    p.scale(1.0 / norm);
    (p, c.map(|x| x / norm))
}

/// Interface residuals of the analytic profile with coefficients `c`:
/// `(compatibility, max(balance, Neumann end))`, both from exact Bessel
/// values and derivatives.
fn interface_residuals(n: u32, lambda: f64, c: [f64; 4], cfg: &AnnulusStackConfig) -> Result<(f64, f64)> {
    let s = lambda.sqrt();
    let inner = bessel_jy(n, s * cfg.inner_radius)?;
    let outer = bessel_jy(n, s * cfg.outer_radius)?;
    let v1 = c[0] * inner.j + c[3] * inner.y;
    let v2 = c[1] * inner.j;
    let v3 = c[2] * inner.j;
    let compat = (v1 - v2).abs().max((v1 - v3).abs());
    let d1 = s * (c[0] * inner.jp + c[3] * inner.yp);
    let d2 = s * c[1] * inner.jp;
    let d3 = s * c[2] * inner.jp;
    let [h1, h2, h3] = cfg.heights;
    let balance = (h1 * d1 - h2 * d2 - h3 * d3).abs();
    let end = (s * (c[0] * outer.jp + c[3] * outer.yp)).abs();
    Ok((compat, balance.max(end)))
}

/// Builds the normalised mode for nullspace vector `c` at a root and
/// checks the interface conditions.
pub fn assemble_mode(
    n: u32,
    m: u32,
    ell: u32,
    lambda: f64,
    c: [f64; 4],
    cfg: &AnnulusStackConfig,
    layout: &Arc<BranchedGrid>,
) -> Result<EigenMode> {
    let (profile, c) = normalize_mode(n, lambda, c, layout);
    let (compat, balance) = interface_residuals(n, lambda, c, cfg)?;
    let worst = compat.max(balance);
    if worst > RESIDUAL_LIMIT {
        return Err(Error::ResidualTooLarge {
            n,
            lambda,
            residual: worst,
            limit: RESIDUAL_LIMIT,
        });
    }
    Ok(EigenMode {
        n,
        m,
        ell,
        lambda,
        coeffs: Some(c),
        profile,
        ang_mult: if n == 0 { 1 } else { 2 },
        residual_compat: compat,
        residual_balance: balance,
        provenance: Provenance::Analytic,
    })
}

/// The constant eigenfunction of eigenvalue zero (Neumann case).
pub fn constant_mode(cfg: &AnnulusStackConfig, layout: &Arc<BranchedGrid>) -> EigenMode {
    // radial normalisation: sum_j h_j int rho = (sum_j h_j |omega_j|) / (2 pi)
    let c = (cfg.weighted_measure() / (2.0 * PI)).powf(-0.5);
    EigenMode {
        n: 0,
        m: 0,
        ell: 1,
        lambda: 0.0,
        coeffs: None,
        profile: BranchedRadialFunction::constant(layout.clone(), [c; 3]),
        ang_mult: 1,
        residual_compat: 0.0,
        residual_balance: 0.0,
        provenance: Provenance::Analytic,
    }
}

/// Ordered eigenmodes of one boundary-condition case.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub modes: Vec<EigenMode>,
    pub bc: BoundaryCondition,
    pub config: AnnulusStackConfig,
    pub n_max: u32,
    pub m_max: u32,
    pub layout: Arc<BranchedGrid>,
}

impl Spectrum {
    fn sort(&mut self) {
        self.modes.sort_by(|a, b| {
            a.lambda
                .total_cmp(&b.lambda)
                .then(a.n.cmp(&b.n))
                .then(a.m.cmp(&b.m))
                .then(a.ell.cmp(&b.ell))
        });
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Eigenvalues counted with angular multiplicity, ascending.
    pub fn eigenvalues_with_multiplicity(&self) -> Vec<f64> {
        self.modes
            .iter()
            .flat_map(|md| std::iter::repeat(md.lambda).take(md.ang_mult as usize))
            .collect()
    }

    pub fn for_n(&self, n: u32) -> impl Iterator<Item = &EigenMode> {
        self.modes.iter().filter(move |md| md.n == n)
    }

    /// Pairs of modes with different `n` whose eigenvalues agree to within
    /// [`COINCIDENCE_RTOL`]. Reported, never merged.
    pub fn coincidences(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.modes.len() {
            for j in i + 1..self.modes.len() {
                let (a, b) = (&self.modes[i], &self.modes[j]);
                if (b.lambda - a.lambda).abs() > COINCIDENCE_RTOL * a.lambda.abs().max(1e-300) {
                    break;
                }
                if a.n != b.n {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// CSV with header
    /// `bc,n,m,ell,lambda,ang_mult,residual_compat,residual_balance`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bc,n,m,ell,lambda,ang_mult,residual_compat,residual_balance\n");
        for md in &self.modes {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.3e},{:.3e}\n",
                self.bc,
                md.n,
                md.m,
                md.ell,
                fmt_sig15(md.lambda),
                md.ang_mult,
                md.residual_compat,
                md.residual_balance
            ));
        }
        out
    }
}

/// `x` with 15 significant digits.
pub fn fmt_sig15(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000000e0".to_string();
    }
    format!("{x:.14e}")
}

/// Roots for one angular index: at most `m_max`, all below `lambda_max`
/// when given; otherwise the window grows until `m_max` roots are found.
fn roots_for_n(
    n: u32,
    m_max: u32,
    lambda_max: Option<f64>,
    cfg: &AnnulusStackConfig,
    scan: &(dyn Fn(u32, f64) -> Result<Vec<f64>> + Sync),
) -> Result<Vec<f64>> {
    let mut roots = match lambda_max {
        Some(lm) => scan(n, lm)?,
        None => {
            let mut s_max = (f64::from(m_max) + 0.5 * f64::from(n) + 2.0) * PI / cfg.outer_radius;
            loop {
                let r = scan(n, s_max * s_max)?;
                if r.len() >= m_max as usize {
                    break r;
                }
                s_max *= 1.5;
            }
        }
    };
    roots.truncate(m_max as usize);
    Ok(roots)
}

/// Coupled spectrum of the Neumann case for `n = 0..=n_max`, at most
/// `m_max` distinct eigenvalues per `n`, plus the constant mode.
pub fn neumann_spectrum(
    cfg: &AnnulusStackConfig,
    n_max: u32,
    m_max: u32,
    lambda_max: Option<f64>,
) -> Result<Spectrum> {
    let cfg = cfg.with_bc(BoundaryCondition::Neumann);
    let layout = BranchedGrid::from_config(&cfg)?;
    let per_n: Vec<Result<Vec<EigenMode>>> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let roots = roots_for_n(n, m_max, lambda_max, &cfg, &|n, lm| scan_roots(n, lm, &cfg))?;
            let mut modes = Vec::new();
            for (i, &lambda) in roots.iter().enumerate() {
                let mat = build_matrix(n, lambda, &cfg)?;
                let basis = nullspace_coeffs(&mat)?;
                let mut group = Vec::new();
                for (l, c) in basis.into_iter().enumerate() {
                    group.push(assemble_mode(n, i as u32 + 1, l as u32 + 1, lambda, c, &cfg, &layout)?);
                }
                orthonormalize_group(&mut group)?;
                modes.extend(group);
            }
            Ok(modes)
        })
        .collect();
    let mut modes = vec![constant_mode(&cfg, &layout)];
    for r in per_n {
        modes.extend(r?);
    }
    let mut spec = Spectrum {
        modes,
        bc: BoundaryCondition::Neumann,
        config: cfg,
        n_max,
        m_max,
        layout,
    };
    spec.sort();
    Ok(spec)
}

/// Gram-Schmidt in the weighted product for modes sharing one eigenvalue.
fn orthonormalize_group(group: &mut [EigenMode]) -> Result<()> {
    for i in 0..group.len() {
        for j in 0..i {
            let (done, rest) = group.split_at_mut(i);
            let proj = rest[0].profile.inner_product(&done[j].profile)?;
            rest[0].profile.axpy(-proj, &done[j].profile)?;
            if let (Some(ci), Some(cj)) = (rest[0].coeffs.as_mut(), done[j].coeffs) {
                ci.iter_mut().zip(cj).for_each(|(a, b)| *a -= proj * b);
            }
        }
        let nrm = group[i].profile.norm();
        group[i].profile.scale(1.0 / nrm);
        if let Some(c) = group[i].coeffs.as_mut() {
            c.iter_mut().for_each(|x| *x /= nrm);
        }
    }
    Ok(())
}

/// `J(s r) Y(s R) - J(s R) Y(s r)`: vanishes at the Dirichlet eigenvalues
/// of the annulus.
pub fn annulus_cross_det(n: u32, s: f64, cfg: &AnnulusStackConfig) -> Result<f64> {
    let a: BesselEval = bessel_jy(n, s * cfg.inner_radius)?;
    let b: BesselEval = bessel_jy(n, s * cfg.outer_radius)?;
    let scale = a.j.hypot(a.y) * b.j.hypot(b.y);
    Ok((a.j * b.y - b.j * a.y) / scale)
}

/// Decoupled spectrum of the lateral Dirichlet case: Dirichlet disk modes
/// on each of the two disks and Dirichlet annulus modes.
pub fn dirichlet_spectrum(cfg: &AnnulusStackConfig, n_max: u32, m_max: u32) -> Result<Spectrum> {
    let cfg = cfg.with_bc(BoundaryCondition::DirichletLateral);
    let layout = BranchedGrid::from_config(&cfg)?;
    let r = cfg.inner_radius;
    let per_n: Vec<Result<Vec<EigenMode>>> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let disk: Vec<f64> = (1..=m_max)
                .map(|k| {
                    let z = crate::specfun::bessel_j_zero(n, k) / r;
                    z * z
                })
                .collect();
            let g = |s: f64| annulus_cross_det(n, s, &cfg);
            let annulus = {
                let mut s_max = (f64::from(m_max) + 2.0) * PI / (cfg.outer_radius - r);
                loop {
                    let roots = sign_change_roots(&g, s_max, scan_step(&cfg))?;
                    if roots.len() >= m_max as usize {
                        break roots.into_iter().take(m_max as usize).map(|s| s * s).collect::<Vec<_>>();
                    }
                    s_max *= 1.5;
                }
            };
            // keep the union complete below the smaller of the two cutoffs
            let cutoff = disk.last().copied().unwrap_or(0.0).min(annulus.last().copied().unwrap_or(0.0));
            let mut entries: Vec<(f64, u8)> = disk
                .iter()
                .map(|&l| (l, 0u8))
                .chain(annulus.iter().map(|&l| (l, 1u8)))
                .filter(|&(l, _)| l <= cutoff * (1.0 + 1e-12))
                .collect();
            entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut modes = Vec::new();
            for (i, (lambda, kind)) in entries.into_iter().enumerate().take(m_max as usize) {
                let m = i as u32 + 1;
                if kind == 0 {
                    for (ell, c) in [(1, [0.0, 1.0, 0.0, 0.0]), (2, [0.0, 0.0, 1.0, 0.0])] {
                        modes.push(dirichlet_mode(n, m, ell, lambda, c, &cfg, &layout)?);
                    }
                } else {
                    let e = bessel_jy(n, lambda.sqrt() * r)?;
                    let c = [e.y, 0.0, 0.0, -e.j];
                    modes.push(dirichlet_mode(n, m, 1, lambda, c, &cfg, &layout)?);
                }
            }
            Ok(modes)
        })
        .collect();
    let mut modes = Vec::new();
    for r in per_n {
        modes.extend(r?);
    }
    let mut spec = Spectrum {
        modes,
        bc: BoundaryCondition::DirichletLateral,
        config: cfg,
        n_max,
        m_max,
        layout,
    };
    spec.sort();
    Ok(spec)
}

fn dirichlet_mode(
    n: u32,
    m: u32,
    ell: u32,
    lambda: f64,
    c: [f64; 4],
    cfg: &AnnulusStackConfig,
    layout: &Arc<BranchedGrid>,
) -> Result<EigenMode> {
    let (profile, c) = normalize_mode(n, lambda, c, layout);
    let s = lambda.sqrt();
    let inner = bessel_jy(n, s * cfg.inner_radius)?;
    let outer = bessel_jy(n, s * cfg.outer_radius)?;
    let v1r = c[0] * inner.j + c[3] * inner.y;
    let v1big = c[0] * outer.j + c[3] * outer.y;
    let traces = [v1r, v1big, c[1] * inner.j, c[2] * inner.j];
    let boundary = traces.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let compat = profile.compatibility_residual();
    if boundary > RESIDUAL_LIMIT {
        return Err(Error::ResidualTooLarge {
            n,
            lambda,
            residual: boundary,
            limit: RESIDUAL_LIMIT,
        });
    }
    Ok(EigenMode {
        n,
        m,
        ell,
        lambda,
        coeffs: Some(c),
        profile,
        ang_mult: if n == 0 { 1 } else { 2 },
        residual_compat: compat,
        residual_balance: boundary,
        provenance: Provenance::Analytic,
    })
}

/// Spectrum for the config's boundary condition.
pub fn spectrum(
    cfg: &AnnulusStackConfig,
    n_max: u32,
    m_max: u32,
    lambda_max: Option<f64>,
) -> Result<Spectrum> {
    match cfg.bc {
        BoundaryCondition::Neumann => neumann_spectrum(cfg, n_max, m_max, lambda_max),
        BoundaryCondition::DirichletLateral => {
            let mut spec = dirichlet_spectrum(cfg, n_max, m_max)?;
            if let Some(lm) = lambda_max {
                spec.modes.retain(|md| md.lambda <= lm);
            }
            Ok(spec)
        }
    }
}
