//! Reaction-diffusion flow of the limit problem in its eigenbasis.
//!
//! The state is the coefficient vector of `u` in the real orthonormal basis
//! `v(rho) / sqrt(2 pi)`, `v(rho) cos(n theta) / sqrt(pi)`,
//! `v(rho) sin(n theta) / sqrt(pi)` built from a [`Spectrum`]. The linear
//! part is diagonal; the reaction term is evaluated on a polar collocation
//! grid and projected back by quadrature. Time stepping is exponential
//! Euler, exact for the linear flow.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;

use crate::dispersion::{EigenMode, Spectrum};
use crate::error::{Error, Result};
use crate::model::{BoundaryCondition, BranchedGrid};

/// Coefficient magnitude treated as blow-up.
pub const BLOWUP_LIMIT: f64 = 1e12;

/// Polynomial reaction term `f(u) = sum_k c_k u^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReactionTerm {
    coeffs: Vec<f64>,
}

impl ReactionTerm {
    /// Validates growth (degree at most 3) and dissipativity (odd degree,
    /// negative leading coefficient). The zero polynomial is accepted as
    /// the linear heat flow.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("reaction coefficients must be finite".into()));
        }
        let mut coeffs = coeffs;
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Ok(ReactionTerm { coeffs });
        }
        let degree = coeffs.len() - 1;
        if degree > 3 {
            return Err(Error::GrowthViolation(format!(
                "degree {degree} exceeds 3: |f'(s)| must grow at most like |s|^2"
            )));
        }
        let lead = coeffs[degree];
        if degree % 2 == 0 || lead >= 0.0 {
            return Err(Error::DissipativityViolation(format!(
                "need odd degree with negative leading coefficient, got degree {degree} with leading {lead}"
            )));
        }
        Ok(ReactionTerm { coeffs })
    }

    pub fn zero() -> Self {
        ReactionTerm { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `f'(0)`.
    pub fn linear_coeff(&self) -> f64 {
        self.coeffs.get(1).copied().unwrap_or(0.0)
    }

    /// True when `f(u) = f'(0) u`.
    pub fn is_linear(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(k, c)| k == 1 || *c == 0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    /// Antiderivative with `F(0) = 0`.
    pub fn primitive(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, c)| acc * u + c / (k + 1) as f64)
            * u
    }
}

impl FromStr for ReactionTerm {
    type Err = Error;

    /// Comma-separated coefficients, constant term first.
    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad reaction coefficient {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs)
    }
}

/// Angular factor of a basis function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// One real basis function: a spectrum mode and its angular factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeKey {
    pub mode: usize,
    pub n: u32,
    pub trig: Trig,
}

/// Values of a field on the collocation grid: per sheet, radial node `i`
/// and angle `k` at index `i * n_theta + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchedField {
    pub layout: Arc<BranchedGrid>,
    pub n_theta: usize,
    pub values: [Vec<f64>; 3],
}

impl BranchedField {
    pub fn theta(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_theta as f64
    }

    pub fn get(&self, sheet: usize, i: usize, k: usize) -> f64 {
        self.values[sheet][i * self.n_theta + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest disagreement of the three traces at `rho = r`.
    pub fn compat_residual(&self) -> f64 {
        let i0 = self.layout.interface_index(0);
        let i1 = self.layout.interface_index(1);
        let i2 = self.layout.interface_index(2);
        (0..self.n_theta)
            .map(|k| {
                let a = self.get(0, i0, k);
                (a - self.get(1, i1, k)).abs().max((a - self.get(2, i2, k)).abs())
            })
            .fold(0.0, f64::max)
    }

    /// CSV with header `sheet,rho,theta,value`; sheets numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sheet,rho,theta,value\n");
        for s in 0..3 {
            for (i, rho) in self.layout.grid(s).nodes().iter().enumerate() {
                for k in 0..self.n_theta {
                    out.push_str(&format!("{},{},{},{:.12e}\n", s + 1, rho, self.theta(k), self.get(s, i, k)));
                }
            }
        }
        out
    }
}

/// Initial data for a run.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// `u = c` (projected; exact on the constant mode in the Neumann case).
    Constant(f64),
    /// `amplitude` times basis function `index`.
    Mode { index: usize, amplitude: f64 },
    /// Gaussian coefficients scaled by `amplitude / (1 + lambda)`.
    Random { seed: u64, amplitude: f64 },
    /// `amplitude (1 + rho cos(theta) / 2) exp(-rho^2 / 2)` on every sheet,
    /// projected.
    Bump { amplitude: f64 },
    Coefficients(Vec<f64>),
}

impl FromStr for InitialData {
    type Err = Error;

    /// `const:<c>`, `mode:<index>[:<amp>]`, `random:<seed>[:<amp>]`,
    /// `bump[:<amp>]` or `coeffs:<a0>;<a1>;...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad initial data spec {s:?}"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let mut parts = s.splitn(2, ':');
        let kind = parts.next().unwrap_or_default();
        let rest = parts.next();
        let fields: Vec<&str> = rest.map(|r| r.split(':').collect()).unwrap_or_default();
        match (kind, fields.as_slice()) {
            ("const", [c]) => Ok(InitialData::Constant(num(c)?)),
            ("mode", [i]) => Ok(InitialData::Mode {
                index: i.trim().parse().map_err(|_| bad())?,
                amplitude: 1.0,
            }),
            ("mode", [i, a]) => Ok(InitialData::Mode {
                index: i.trim().parse().map_err(|_| bad())?,
                amplitude: num(a)?,
            }),
            ("random", [sd]) => Ok(InitialData::Random {
                seed: sd.trim().parse().map_err(|_| bad())?,
                amplitude: 1.0,
            }),
            ("random", [sd, a]) => Ok(InitialData::Random {
                seed: sd.trim().parse().map_err(|_| bad())?,
                amplitude: num(a)?,
            }),
            ("bump", []) => Ok(InitialData::Bump { amplitude: 1.0 }),
            ("bump", [a]) => Ok(InitialData::Bump { amplitude: num(a)? }),
            ("coeffs", [list]) => Ok(InitialData::Coefficients(
                list.split(';').map(num).collect::<Result<Vec<_>>>()?,
            )),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Constant(c) => write!(f, "const:{c}"),
            InitialData::Mode { index, amplitude } => write!(f, "mode:{index}:{amplitude}"),
            InitialData::Random { seed, amplitude } => write!(f, "random:{seed}:{amplitude}"),
            InitialData::Bump { amplitude } => write!(f, "bump:{amplitude}"),
            InitialData::Coefficients(c) => {
                let list: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "coeffs:{}", list.join(";"))
            }
        }
    }
}

/// Coefficients and time.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub coeffs: Vec<f64>,
    pub t: f64,
}

/// Weighted mass, energy and interface residual of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub mass: f64,
    pub energy: f64,
    pub compat_residual: f64,
}

/// Basis, collocation grid and reaction term of one run.
#[derive(Clone, Debug)]
pub struct Simulator {
    spectrum: Spectrum,
    reaction: ReactionTerm,
    keys: Vec<ModeKey>,
    lambdas: Vec<f64>,
    n_theta: usize,
    /// `h_s w_i rho_i` per sheet.
    radial_weight: [Vec<f64>; 3],
    /// `mu_k = <1, phi_k>`.
    mass_weights: Vec<f64>,
}

impl Simulator {
    /// Collocation uses `4 n_max + 2` angles, enough to project products
    /// of three fields without aliasing.
    pub fn new(spectrum: Spectrum, reaction: ReactionTerm) -> Result<Self> {
        let n_max = spectrum.modes.iter().map(|m| m.n).max().unwrap_or(0) as usize;
        let n_theta = 4 * n_max + 2;
        Self::with_angles(spectrum, reaction, n_theta)
    }

    pub fn with_angles(spectrum: Spectrum, reaction: ReactionTerm, n_theta: usize) -> Result<Self> {
        if spectrum.modes.is_empty() {
            return Err(Error::InvalidArgument("empty basis".into()));
        }
        let n_max = spectrum.modes.iter().map(|m| m.n).max().unwrap_or(0) as usize;
        let degree = reaction.degree().max(1);
        if n_theta < (degree + 1) * n_max + 1 {
            return Err(Error::InvalidArgument(format!(
                "{n_theta} angles alias a degree-{degree} reaction with n up to {n_max}"
            )));
        }
        let mut keys = Vec::new();
        let mut lambdas = Vec::new();
        for (idx, md) in spectrum.modes.iter().enumerate() {
            let trigs: &[Trig] = if md.n == 0 { &[Trig::Cos] } else { &[Trig::Cos, Trig::Sin] };
            for &trig in trigs {
                keys.push(ModeKey {
                    mode: idx,
                    n: md.n,
                    trig,
                });
                lambdas.push(md.lambda);
            }
        }
        let layout = spectrum.layout.clone();
        let radial_weight = std::array::from_fn(|s| {
            let g = layout.grid(s);
            g.nodes()
                .iter()
                .zip(g.weights())
                .map(|(x, w)| layout.heights[s] * w * x)
                .collect()
        });
        let mut sim = Simulator {
            spectrum,
            reaction,
            keys,
            lambdas,
            n_theta,
            radial_weight,
            mass_weights: Vec::new(),
        };
        sim.mass_weights = sim
            .keys
            .iter()
            .map(|k| {
                if k.n != 0 {
                    return 0.0;
                }
                let md = &sim.spectrum.modes[k.mode];
                let radial: f64 = (0..3)
                    .filter(|&s| md.support()[s])
                    .map(|s| sim.radial_weight[s].iter().zip(md.profile.values(s)).map(|(w, v)| w * v).sum::<f64>())
                    .sum();
                radial * (2.0 * PI).sqrt()
            })
            .collect();
        Ok(sim)
    }

    pub fn keys(&self) -> &[ModeKey] {
        &self.keys
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn reaction(&self) -> &ReactionTerm {
        &self.reaction
    }

    pub fn mode(&self, key: usize) -> &EigenMode {
        &self.spectrum.modes[self.keys[key].mode]
    }

    fn angular(&self, n: u32, trig: Trig, k: usize) -> f64 {
        let theta = 2.0 * PI * k as f64 / self.n_theta as f64;
        if n == 0 {
            return (2.0 * PI).powf(-0.5);
        }
        let arg = f64::from(n) * theta;
        match trig {
            Trig::Cos => arg.cos() / PI.sqrt(),
            Trig::Sin => arg.sin() / PI.sqrt(),
        }
    }

    /// Field values of a coefficient vector on the collocation grid.
    pub fn synthesize(&self, coeffs: &[f64]) -> BranchedField {
        let layout = self.spectrum.layout.clone();
        let nt = self.n_theta;
        let mut values: [Vec<f64>; 3] = std::array::from_fn(|s| vec![0.0; layout.grid(s).len() * nt]);
        let mut ang = vec![0.0; nt];
        for (key, &a) in self.keys.iter().zip(coeffs) {
            if a == 0.0 {
                continue;
            }
            let md = &self.spectrum.modes[key.mode];
            for (k, slot) in ang.iter_mut().enumerate() {
                *slot = a * self.angular(key.n, key.trig, k);
            }
            for s in (0..3).filter(|&s| md.support()[s]) {
                let out = &mut values[s];
                for (i, v) in md.profile.values(s).iter().enumerate() {
                    let row = &mut out[i * nt..(i + 1) * nt];
                    row.iter_mut().zip(&ang).for_each(|(o, g)| *o += v * g);
                }
            }
        }
        BranchedField {
            layout,
            n_theta: nt,
            values,
        }
    }

    /// Weighted projections `<g, phi_k>` by radial quadrature and the
    /// discrete angular transform.
    pub fn project(&self, field: &BranchedField) -> Vec<f64> {
        let nt = self.n_theta;
        let dtheta = 2.0 * PI / nt as f64;
        self.keys
            .iter()
            .map(|key| {
                let md = &self.spectrum.modes[key.mode];
                let ang: Vec<f64> = (0..nt).map(|k| dtheta * self.angular(key.n, key.trig, k)).collect();
                (0..3)
                    .filter(|&s| md.support()[s])
                    .map(|s| {
                        md.profile
                            .values(s)
                            .iter()
                            .zip(&self.radial_weight[s])
                            .enumerate()
                            .map(|(i, (v, w))| {
                                let row = &field.values[s][i * nt..(i + 1) * nt];
                                let t: f64 = row.iter().zip(&ang).map(|(g, c)| g * c).sum();
                                v * w * t
                            })
                            .sum::<f64>()
                    })
                    .sum()
            })
            .collect()
    }

    /// Samples `g(sheet, rho, theta)` on the collocation grid and projects.
    pub fn project_fn<F: Fn(usize, f64, f64) -> f64>(&self, g: F) -> Vec<f64> {
        let layout = self.spectrum.layout.clone();
        let nt = self.n_theta;
        let values = std::array::from_fn(|s| {
            let mut v = Vec::with_capacity(layout.grid(s).len() * nt);
            for &rho in layout.grid(s).nodes() {
                for k in 0..nt {
                    v.push(g(s, rho, 2.0 * PI * k as f64 / nt as f64));
                }
            }
            v
        });
        self.project(&BranchedField {
            layout,
            n_theta: nt,
            values,
        })
    }

    /// Coefficient vector for the given initial data.
    pub fn initial_coeffs(&self, init: &InitialData) -> Result<Vec<f64>> {
        let len = self.keys.len();
        match init {
            InitialData::Constant(c) => {
                let constant = self
                    .spectrum
                    .modes
                    .first()
                    .filter(|m| m.lambda == 0.0 && m.coeffs.is_none());
                match constant {
                    Some(md) => {
                        let mut a = vec![0.0; len];
                        // u = c has coefficient c / (planar value of the mode)
                        a[0] = c * (2.0 * PI).sqrt() / md.profile.values(0)[0];
                        Ok(a)
                    }
                    None => Ok(self.project_fn(|_, _, _| *c)),
                }
            }
            InitialData::Mode { index, amplitude } => {
                if *index >= len {
                    return Err(Error::InvalidArgument(format!("mode index {index} out of range 0..{len}")));
                }
                let mut a = vec![0.0; len];
                a[*index] = *amplitude;
                Ok(a)
            }
            InitialData::Random { seed, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(self
                    .lambdas
                    .iter()
                    .map(|l| {
                        // Box-Muller
                        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                        let u2: f64 = rng.gen();
                        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos();
                        amplitude * z / (1.0 + l)
                    })
                    .collect())
            }
            InitialData::Bump { amplitude } => {
                Ok(self.project_fn(|_, rho, theta| amplitude * (1.0 + 0.5 * rho * theta.cos()) * (-0.5 * rho * rho).exp()))
            }
            InitialData::Coefficients(c) => {
                if c.len() > len {
                    return Err(Error::InvalidArgument(format!(
                        "{} coefficients for a basis of {len}",
                        c.len()
                    )));
                }
                let mut a = c.clone();
                a.resize(len, 0.0);
                Ok(a)
            }
        }
    }

    /// One exponential Euler step of length `dt`. The linear part of the
    /// reaction, `f'(0) u`, is integrated exactly together with the
    /// diffusion; only `f(u) - f'(0) u` is frozen over the step.
    pub fn step(&self, state: &mut SimState, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let slope = self.reaction.linear_coeff();
        let forcing = if self.reaction.is_linear() {
            None
        } else {
            let mut field = self.synthesize(&state.coeffs);
            for v in field.values.iter_mut().flatten() {
                *v = self.reaction.eval(*v) - slope * *v;
            }
            Some(self.project(&field))
        };
        for (k, a) in state.coeffs.iter_mut().enumerate() {
            let z = (slope - self.lambdas[k]) * dt;
            *a *= z.exp();
            if let Some(nl) = &forcing {
                *a += dt * phi1(z) * nl[k];
            }
        }
        state.t += dt;
        let worst = state.coeffs.iter().fold(0.0f64, |m, a| if a.is_finite() { m.max(a.abs()) } else { f64::INFINITY });
        if worst > BLOWUP_LIMIT {
            return Err(Error::BlowupDetected {
                t: state.t,
                max_coeff: worst,
            });
        }
        Ok(())
    }

    /// Mass `sum_j h_j int u_j`, energy `a(u, u) / 2 - sum_j h_j int F(u_j)`
    /// and the interface residual of the synthesized field.
    pub fn diagnostics(&self, state: &SimState) -> Diagnostics {
        let mass = state.coeffs.iter().zip(&self.mass_weights).map(|(a, m)| a * m).sum();
        let quad: f64 = 0.5 * state.coeffs.iter().zip(&self.lambdas).map(|(a, l)| l * a * a).sum::<f64>();
        let field = self.synthesize(&state.coeffs);
        let dtheta = 2.0 * PI / self.n_theta as f64;
        let potential: f64 = (0..3)
            .map(|s| {
                self.radial_weight[s]
                    .iter()
                    .enumerate()
                    .map(|(i, w)| {
                        let row = &field.values[s][i * self.n_theta..(i + 1) * self.n_theta];
                        w * dtheta * row.iter().map(|&u| self.reaction.primitive(u)).sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .sum();
        Diagnostics {
            mass,
            energy: quad - potential,
            compat_residual: field.compat_residual(),
        }
    }

    /// Integrates to `t_end` in steps of `dt` (the last one shortened to
    /// land on `t_end`), keeping every `snapshot_every`-th state and the
    /// final one.
    pub fn run(&self, initial: Vec<f64>, t_end: f64, dt: f64, snapshot_every: usize) -> Result<Trajectory> {
        if initial.len() != self.keys.len() {
            return Err(Error::InvalidArgument(format!(
                "initial state has {} coefficients, basis has {}",
                initial.len(),
                self.keys.len()
            )));
        }
        if !(t_end > 0.0) || !(dt > 0.0) || snapshot_every == 0 {
            return Err(Error::InvalidArgument("need T > 0, dt > 0 and snapshot interval >= 1".into()));
        }
        let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
        let mut state = SimState {
            coeffs: initial,
            t: 0.0,
        };
        let mut traj = Trajectory {
            snapshots: vec![state.clone()],
            series: vec![(0.0, self.diagnostics(&state))],
        };
        for step in 1..=steps {
            let h = if step == steps { t_end - dt * (steps - 1) as f64 } else { dt };
            self.step(&mut state, h)?;
            if step == steps {
                state.t = t_end;
            }
            if step % snapshot_every == 0 || step == steps {
                traj.series.push((state.t, self.diagnostics(&state)));
                traj.snapshots.push(state.clone());
            }
        }
        Ok(traj)
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        self.spectrum.bc
    }
}

/// `(e^z - 1) / z`, continued by 1 at `z = 0`.
pub fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// Snapshots (including the initial state) and their diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<SimState>,
    pub series: Vec<(f64, Diagnostics)>,
}

impl Trajectory {
    pub fn last(&self) -> &SimState {
        self.snapshots.last().expect("trajectory holds the initial state")
    }

    /// CSV with header `t,mass,energy,compat_residual`.
    pub fn series_csv(&self) -> String {
        let mut out = String::from("t,mass,energy,compat_residual\n");
        for (t, d) in &self.series {
            out.push_str(&format!("{t},{:.15e},{:.15e},{:.3e}\n", d.mass, d.energy, d.compat_residual));
        }
        out
    }
}
