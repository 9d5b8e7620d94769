//! Radial sample grids and their quadrature weights.

use crate::error::{Error, Result};

/// Strength of the endpoint clustering of [`RadialGrid::graded`].
///
/// The node map is `t - a sin(2 pi t) / (2 pi)`; with `a = 1/2` the spacing
/// at either end is half the mean spacing.
pub const GRADING: f64 = 0.5;

/// Strictly increasing radial nodes together with interpolatory quadrature
/// weights for `int f(rho) d rho` over `[first, last]`.
///
/// Weights come from piecewise quadratics on consecutive node pairs
/// (composite Simpson on nonuniform nodes); an odd trailing interval is
/// closed with the quadratic through the last three nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("non-finite node".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "nodes not strictly increasing at index {}",
                i + 1
            )));
        }
        let weights = quadrature_weights(&nodes);
        Ok(RadialGrid { nodes, weights })
    }

    /// `n` nodes on `[a, b]`, clustered towards both endpoints.
    pub fn graded(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::from_nodes(graded_nodes(a, b, n, GRADING))
    }

    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::from_nodes(graded_nodes(a, b, n, 0.0))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// `int rho f(rho) g(rho) d rho` over the grid.
    pub fn rho_dot(&self, f: &[f64], g: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(f.iter().zip(g))
            .map(|((x, w), (a, b))| w * x * a * b)
            .sum()
    }

    /// Derivative of the local quadratic interpolant at node `i`: central
    /// in the interior, one-sided at the ends. Second order in both cases.
    pub fn derivative_at(&self, values: &[f64], i: usize) -> f64 {
        let n = self.nodes.len();
        debug_assert_eq!(values.len(), n);
        if n == 2 {
            return (values[1] - values[0]) / (self.nodes[1] - self.nodes[0]);
        }
        let (j0, j1, j2) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (x0, x1, x2) = (self.nodes[j0], self.nodes[j1], self.nodes[j2]);
        let x = self.nodes[i];
        // d/dx of the Lagrange basis at x
        let l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
        let l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
        let l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
        l0 * values[j0] + l1 * values[j1] + l2 * values[j2]
    }
}

/// `n` nodes `a + (b - a) g(t_k)`, `t_k = k / (n - 1)`, with
/// `g(t) = t - strength sin(2 pi t) / (2 pi)`.
pub fn graded_nodes(a: f64, b: f64, n: usize, strength: f64) -> Vec<f64> {
    assert!(n >= 2, "need at least two nodes");
    let tau = std::f64::consts::TAU;
    let mut out: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            a + (b - a) * (t - strength * (tau * t).sin() / tau)
        })
        .collect();
    out[0] = a;
    out[n - 1] = b;
    out
}

fn quadrature_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    if n == 2 {
        let h = x[1] - x[0];
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let intervals = n - 1;
    let paired = intervals - intervals % 2;
    let mut i = 0;
    while i < paired {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let s = h0 + h1;
        w[i] += s / 6.0 * (2.0 - h1 / h0);
        w[i + 1] += s * s * s / (6.0 * h0 * h1);
        w[i + 2] += s / 6.0 * (2.0 - h0 / h1);
        i += 2;
    }
    if intervals % 2 == 1 {
        // quadratic through the last three nodes, integrated over the last interval
        let a = x[n - 2] - x[n - 3];
        let b = x[n - 1] - x[n - 2];
        w[n - 3] += -b * b * b / (6.0 * a * (a + b));
        w[n - 2] += b * (3.0 * a + b) / (6.0 * a);
        w[n - 1] += b * (3.0 * a + 2.0 * b) / (6.0 * (a + b));
    }
    w
}
