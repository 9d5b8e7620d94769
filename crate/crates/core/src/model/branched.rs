//! Branched radial functions: triples `(v1, v2, v3)` on the annulus interval
//! `(r, R)` and the two disk intervals `(0, r)`, with the weighted inner
//! product and energy forms of the limit space.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::config::AnnulusStackConfig;
use crate::model::grid::RadialGrid;
use crate::quad;

/// Values at the disk centre below this (relative to the component's
/// largest sample) count as zero when the `n^2/rho` term is present.
pub const ORIGIN_TOL: f64 = 1e-10;

/// Radial grids of the three sheets plus the sheet thicknesses.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchedGrid {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub heights: [f64; 3],
    grids: [RadialGrid; 3],
}

impl BranchedGrid {
    /// Graded grids sized by the config's `grid` section.
    pub fn from_config(cfg: &AnnulusStackConfig) -> Result<Arc<Self>> {
        let r = cfg.inner_radius;
        let annulus = RadialGrid::graded(r, cfg.outer_radius, cfg.grid.n1)?;
        let disk = RadialGrid::graded(0.0, r, cfg.grid.n2)?;
        Ok(Arc::new(BranchedGrid {
            inner_radius: r,
            outer_radius: cfg.outer_radius,
            heights: cfg.heights,
            grids: [annulus, disk.clone(), disk],
        }))
    }

    /// Explicit grids; the annulus grid must span `[r, R]` and the disk
    /// grids `[0, r]`.
    pub fn new(cfg: &AnnulusStackConfig, grids: [RadialGrid; 3]) -> Result<Arc<Self>> {
        let r = cfg.inner_radius;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * b.abs().max(1.0);
        if !close(grids[0].first(), r) || !close(grids[0].last(), cfg.outer_radius) {
            return Err(Error::InvalidGrid("annulus grid must span [r, R]".into()));
        }
        for g in &grids[1..] {
            if g.first() != 0.0 || !close(g.last(), r) {
                return Err(Error::InvalidGrid("disk grids must span [0, r]".into()));
            }
        }
        Ok(Arc::new(BranchedGrid {
            inner_radius: r,
            outer_radius: cfg.outer_radius,
            heights: cfg.heights,
            grids,
        }))
    }

    pub fn grid(&self, sheet: usize) -> &RadialGrid {
        &self.grids[sheet]
    }

    pub fn grids(&self) -> &[RadialGrid; 3] {
        &self.grids
    }

    /// Index of the node at `rho = r` on a sheet.
    pub fn interface_index(&self, sheet: usize) -> usize {
        if sheet == 0 {
            0
        } else {
            self.grids[sheet].len() - 1
        }
    }
}

/// A sampled element of the weighted space: one value vector per sheet.
#[derive(Clone, Debug)]
pub struct BranchedRadialFunction {
    layout: Arc<BranchedGrid>,
    values: [Vec<f64>; 3],
}

impl BranchedRadialFunction {
    pub fn new(layout: Arc<BranchedGrid>, values: [Vec<f64>; 3]) -> Result<Self> {
        for (s, v) in values.iter().enumerate() {
            if v.len() != layout.grids[s].len() {
                return Err(Error::InvalidGrid(format!(
                    "sheet {} has {} values for {} nodes",
                    s + 1,
                    v.len(),
                    layout.grids[s].len()
                )));
            }
        }
        Ok(BranchedRadialFunction { layout, values })
    }

    /// Samples `f(sheet, rho)` on every node.
    pub fn sample<F: Fn(usize, f64) -> f64>(layout: Arc<BranchedGrid>, f: F) -> Self {
        let values = std::array::from_fn(|s| layout.grids[s].nodes().iter().map(|&x| f(s, x)).collect());
        BranchedRadialFunction { layout, values }
    }

    pub fn constant(layout: Arc<BranchedGrid>, c: [f64; 3]) -> Self {
        Self::sample(layout, |s, _| c[s])
    }

    pub fn layout(&self) -> &Arc<BranchedGrid> {
        &self.layout
    }

    pub fn values(&self, sheet: usize) -> &[f64] {
        &self.values[sheet]
    }

    pub fn values_mut(&mut self, sheet: usize) -> &mut [f64] {
        &mut self.values[sheet]
    }

    pub fn scale(&mut self, k: f64) {
        self.values.iter_mut().flatten().for_each(|v| *v *= k);
    }

    /// `self += k * other`.
    pub fn axpy(&mut self, k: f64, other: &Self) -> Result<()> {
        self.check_layout(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += k * y);
        }
        Ok(())
    }

    fn check_layout(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.layout, &other.layout) || self.layout == other.layout {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `sum_j h_j int_{I_j} rho a_j b_j d rho`.
    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        self.check_layout(other)?;
        Ok((0..3)
            .map(|s| {
                self.layout.heights[s]
                    * self.layout.grids[s].rho_dot(&self.values[s], &other.values[s])
            })
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.inner_product(self).expect("same layout").max(0.0).sqrt()
    }

    /// The energy form of angular index `n` applied to the piecewise-linear
    /// interpolants of the samples, integrated exactly element by element.
    ///
    /// For `n != 0` both functions must vanish at the disk centre, otherwise
    /// the `n^2/rho` term is not integrable.
    pub fn energy_form(&self, other: &Self, n: u32) -> Result<f64> {
        self.check_layout(other)?;
        let n2 = f64::from(n) * f64::from(n);
        if n != 0 {
            for f in [self, other] {
                for s in 1..3 {
                    let v = &f.values[s];
                    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    if v[0].abs() > ORIGIN_TOL * scale.max(f64::MIN_POSITIVE) {
                        return Err(Error::IntegralDiverges(format!(
                            "n = {n} but sheet {} has value {:e} at rho = 0",
                            s + 1,
                            v[0]
                        )));
                    }
                }
            }
        }
        let rule = quad::gauss_legendre(10);
        let mut total = 0.0;
        for s in 0..3 {
            let x = self.layout.grids[s].nodes();
            let (a, b) = (&self.values[s], &other.values[s]);
            let mut acc = 0.0;
            for i in 0..x.len() - 1 {
                let (lo, hi) = (x[i], x[i + 1]);
                let h = hi - lo;
                let da = (a[i + 1] - a[i]) / h;
                let db = (b[i + 1] - b[i]) / h;
                acc += da * db * 0.5 * (lo + hi) * h;
                if n2 != 0.0 {
                    acc += n2 * inverse_rho_element(lo, hi, (a[i], a[i + 1]), (b[i], b[i + 1]), &rule);
                }
            }
            total += self.layout.heights[s] * acc;
        }
        Ok(total)
    }

    /// `max(|v1(r) - v2(r)|, |v1(r) - v3(r)|)`.
    pub fn compatibility_residual(&self) -> f64 {
        let [t1, t2, t3] = self.interface_traces();
        (t1 - t2).abs().max((t1 - t3).abs())
    }

    /// Values of the three sheets at `rho = r`.
    pub fn interface_traces(&self) -> [f64; 3] {
        std::array::from_fn(|s| self.values[s][self.layout.interface_index(s)])
    }

    /// One-sided derivatives of the three sheets at `rho = r`.
    pub fn interface_derivatives(&self) -> [f64; 3] {
        std::array::from_fn(|s| {
            self.layout.grids[s].derivative_at(&self.values[s], self.layout.interface_index(s))
        })
    }

    /// `|h1 v1'(r) - h2 v2'(r) - h3 v3'(r)|` from grid derivatives.
    pub fn balance_residual(&self) -> f64 {
        let d = self.interface_derivatives();
        let h = self.layout.heights;
        (h[0] * d[0] - h[1] * d[1] - h[2] * d[2]).abs()
    }

    /// Largest sample on the Dirichlet ends `rho = R` and `rho = r` of all
    /// three sheets.
    pub fn dirichlet_trace_max(&self) -> f64 {
        let t = self.interface_traces();
        let outer = *self.values[0].last().unwrap();
        t.iter().fold(outer.abs(), |m, x| m.max(x.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// `int_lo^hi (1/rho) a(rho) b(rho) d rho` for linear `a`, `b` given by
/// their endpoint values.
pub(crate) fn inverse_rho_element(
    lo: f64,
    hi: f64,
    (a0, a1): (f64, f64),
    (b0, b1): (f64, f64),
    rule: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let h = hi - lo;
    if lo == 0.0 {
        // both vanish at the origin (checked by the caller): a = a1 rho/h
        return 0.5 * a1 * b1;
    }
    if h / lo >= 0.5 {
        // closed form with logarithm; cancellation is mild in this regime
        let l = (hi / lo).ln();
        let sq = 0.5 * (hi * hi - lo * lo);
        let i00 = (hi * hi * l - 2.0 * hi * h + sq) / (h * h);
        let i11 = (sq - 2.0 * lo * h + lo * lo * l) / (h * h);
        let i01 = (-sq + (lo + hi) * h - lo * hi * l) / (h * h);
        a0 * b0 * i00 + a1 * b1 * i11 + (a0 * b1 + a1 * b0) * i01
    } else {
        quad::integrate(rule, lo, hi, |x| {
            let t = (x - lo) / h;
            let a = a0 + (a1 - a0) * t;
            let b = b0 + (b1 - b0) * t;
            a * b / x
        })
    }
}
