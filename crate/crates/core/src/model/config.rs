use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes per radial interval when the config does not say otherwise.
pub const DEFAULT_GRID_NODES: usize = 512;

/// Lateral boundary condition of the squeezed problem.
///
/// `Neumann` is the all-natural case (coupled sheets in the limit);
/// `DirichletLateral` clamps the outer wall and the notch wall, which
/// decouples the three sheets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Neumann,
    DirichletLateral,
}

impl BoundaryCondition {
    pub fn tag(self) -> &'static str {
        match self {
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::DirichletLateral => "dirichlet_lateral",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neumann" => Ok(BoundaryCondition::Neumann),
            "dirichlet_lateral" => Ok(BoundaryCondition::DirichletLateral),
            other => Err(Error::InvalidConfig {
                field: "bc",
                reason: format!("expected \"neumann\" or \"dirichlet_lateral\", got {other:?}"),
            }),
        }
    }
}

/// Node counts of the radial sample grids: `n1` on the annulus interval
/// `(r, R)`, `n2` on each disk interval `(0, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n1: usize,
    pub n2: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n1: DEFAULT_GRID_NODES,
            n2: DEFAULT_GRID_NODES,
        }
    }
}

/// Geometry of the notched cylinder and the lateral boundary condition.
///
/// The cross-section is the disk of radius `outer_radius`; the notch removes
/// the sub-cylinder over the disk of radius `inner_radius` between heights
/// `h3` and `h1 - h2`. In the limit this leaves an annular sheet of
/// thickness `h1` and two disk sheets of thickness `h2` (top) and `h3`
/// (bottom).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnnulusStackConfig {
    #[serde(rename = "r")]
    pub inner_radius: f64,
    #[serde(rename = "R")]
    pub outer_radius: f64,
    #[serde(rename = "h")]
    pub heights: [f64; 3],
    pub bc: BoundaryCondition,
    pub grid: GridSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    r: f64,
    #[serde(rename = "R")]
    outer: f64,
    h: Vec<f64>,
    bc: String,
    #[serde(default)]
    grid: Option<RawGrid>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n1: Option<usize>,
    n2: Option<usize>,
}

impl AnnulusStackConfig {
    pub fn new(
        inner_radius: f64,
        outer_radius: f64,
        heights: [f64; 3],
        bc: BoundaryCondition,
    ) -> Result<Self> {
        Self::with_grid(inner_radius, outer_radius, heights, bc, GridSpec::default())
    }

    pub fn with_grid(
        inner_radius: f64,
        outer_radius: f64,
        heights: [f64; 3],
        bc: BoundaryCondition,
        grid: GridSpec,
    ) -> Result<Self> {
        let cfg = AnnulusStackConfig {
            inner_radius,
            outer_radius,
            heights,
            bc,
            grid,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses and validates the JSON config document.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::ConfigParse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if raw.h.len() != 3 {
            return Err(Error::InvalidConfig {
                field: "h",
                reason: format!("expected 3 heights [h1, h2, h3], got {}", raw.h.len()),
            });
        }
        let bc: BoundaryCondition = raw.bc.parse()?;
        let mut grid = GridSpec::default();
        if let Some(g) = raw.grid {
            if let Some(n1) = g.n1 {
                grid.n1 = n1;
            }
            if let Some(n2) = g.n2 {
                grid.n2 = n2;
            }
        }
        Self::with_grid(raw.r, raw.outer, [raw.h[0], raw.h[1], raw.h[2]], bc, grid)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        let bad = |field, reason: String| Err(Error::InvalidConfig { field, reason });
        let [h1, h2, h3] = self.heights;
        if !(self.inner_radius.is_finite() && self.inner_radius > 0.0) {
            return bad("r", format!("must be a positive number, got {}", self.inner_radius));
        }
        if !(self.outer_radius.is_finite() && self.outer_radius > self.inner_radius) {
            return bad(
                "R",
                format!("must exceed r = {}, got {}", self.inner_radius, self.outer_radius),
            );
        }
        for (h, name) in [(h1, "h[0]"), (h2, "h[1]"), (h3, "h[2]")] {
            if !(h.is_finite() && h > 0.0) {
                return bad(name, format!("heights must be positive, got {h}"));
            }
        }
        if h1 <= h2 + h3 {
            return bad("h", format!("need h1 > h2 + h3, got {h1} <= {}", h2 + h3));
        }
        if self.grid.n1 < 3 {
            return bad("grid.n1", format!("need at least 3 nodes, got {}", self.grid.n1));
        }
        if self.grid.n2 < 3 {
            return bad("grid.n2", format!("need at least 3 nodes, got {}", self.grid.n2));
        }
        Ok(())
    }

    pub fn h1(&self) -> f64 {
        self.heights[0]
    }

    pub fn h2(&self) -> f64 {
        self.heights[1]
    }

    pub fn h3(&self) -> f64 {
        self.heights[2]
    }

    /// Areas of the annulus and the two disks.
    pub fn sheet_areas(&self) -> [f64; 3] {
        let r2 = self.inner_radius * self.inner_radius;
        let big = PI * (self.outer_radius * self.outer_radius - r2);
        [big, PI * r2, PI * r2]
    }

    /// `sum_j h_j |omega_j|`, the weighted measure of the limit space.
    pub fn weighted_measure(&self) -> f64 {
        let a = self.sheet_areas();
        self.heights.iter().zip(a).map(|(h, a)| h * a).sum()
    }

    /// Same geometry with every thickness multiplied by `factor`.
    pub fn scaled_heights(&self, factor: f64) -> Result<Self> {
        let h = self.heights.map(|h| h * factor);
        Self::with_grid(self.inner_radius, self.outer_radius, h, self.bc, self.grid)
    }

    pub fn with_bc(&self, bc: BoundaryCondition) -> Self {
        AnnulusStackConfig { bc, ..*self }
    }

    pub fn with_grid_spec(&self, grid: GridSpec) -> Result<Self> {
        Self::with_grid(self.inner_radius, self.outer_radius, self.heights, self.bc, grid)
    }
}
