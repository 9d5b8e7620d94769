use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use thindom::dispersion::{self, fmt_sig15};
use thindom::epsilon_sweep::{self, MeshResolution};
use thindom::radial_oracle::{self, MeshSizes};
use thindom::semigroup_sim::{InitialData, ReactionTerm, Simulator};

use crate::{config_params, parse_list, with_output, CmdResult, ConfigArgs, Failure};

#[derive(Args)]
pub struct EigsArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    n_max: u32,
    #[arg(long)]
    m_max: u32,
    /// Keep only eigenvalues up to this bound
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

pub fn eigs(a: EigsArgs) -> CmdResult {
    let (cfg, digest) = a.config.load()?;
    let mut params = config_params(&cfg);
    params.insert("n_max".into(), a.n_max.to_string());
    params.insert("m_max".into(), a.m_max.to_string());
    if let Some(l) = a.lambda_max {
        params.insert("lambda_max".into(), l.to_string());
    }
    with_output(&a.out, "eigs", digest, params, |dir| {
        let spec = dispersion::spectrum(&cfg, a.n_max, a.m_max, a.lambda_max)?;
        dir.write("spectrum.csv", &spec.to_csv()).map_err(Failure::Solver)?;
        println!("{} modes ({}), n <= {}", spec.len(), cfg.bc, a.n_max);
        for (i, j) in spec.coincidences() {
            println!(
                "coincidence: lambda {} at n={} and n={}",
                fmt_sig15(spec.modes[i].lambda),
                spec.modes[i].n,
                spec.modes[j].n
            );
        }
        Ok(())
    })
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    n_max: u32,
    /// Relative tolerance (absolute for a zero eigenvalue)
    #[arg(long)]
    tol: f64,
    /// Eigenvalues compared per n
    #[arg(long, default_value_t = 8)]
    m_max: u32,
    /// Finite elements per radial interval on the finer oracle mesh
    #[arg(long, default_value_t = 1024)]
    mesh: usize,
    /// Also write verify.csv and a manifest here
    #[arg(long)]
    out: Option<PathBuf>,
}

struct VerifyRow {
    n: u32,
    k: usize,
    analytic: f64,
    oracle: f64,
    gap: f64,
}

pub fn verify(a: VerifyArgs) -> CmdResult {
    let (cfg, digest) = a.config.load()?;
    if !(a.tol > 0.0) || a.m_max == 0 || a.mesh < 4 {
        return Err(Failure::Usage(anyhow!("need --tol > 0, --m-max >= 1 and --mesh >= 4")));
    }
    let spec = dispersion::spectrum(&cfg, a.n_max, a.m_max + 1, None)?;
    let mesh = MeshSizes::uniform(a.mesh);
    let mut rows = Vec::new();
    let mut counts = Vec::new();
    let mut ok = true;
    println!("{:>3} {:>3} {:>24} {:>24} {:>10} status", "n", "k", "analytic", "oracle", "gap");
    for n in 0..=a.n_max {
        let vals: Vec<f64> = spec.for_n(n).map(|m| m.lambda).collect();
        let mut k = (a.m_max as usize).min(vals.len().saturating_sub(1));
        while k > 0 && vals[k] - vals[k - 1] <= 1e-9 * vals[k] {
            k -= 1;
        }
        if k == 0 {
            return Err(Failure::Solver(anyhow!("no separated eigenvalues found for n={n}")));
        }
        let fem = radial_oracle::extrapolated_eigenvalues(n, &cfg, mesh, k)?;
        for (i, (&x, &y)) in vals.iter().zip(&fem).enumerate() {
            let gap = (x - y).abs() / x.abs().max(1.0);
            let pass = gap <= a.tol;
            ok &= pass;
            println!(
                "{n:>3} {:>3} {:>24} {:>24} {gap:>10.3e} {}",
                i + 1,
                fmt_sig15(x),
                fmt_sig15(y),
                if pass { "ok" } else { "MISMATCH" }
            );
            rows.push(VerifyRow { n, k: i + 1, analytic: x, oracle: y, gap });
        }
        let threshold = 0.5 * (vals[k - 1] + vals[k]);
        let asm = radial_oracle::assemble(n, &cfg, mesh)?;
        let got = radial_oracle::count_below(&asm, threshold)?;
        let pass = got == k;
        ok &= pass;
        println!(
            "count n={n} below {}: analytic {k} oracle {got} {}",
            fmt_sig15(threshold),
            if pass { "ok" } else { "MISMATCH" }
        );
        counts.push((n, threshold, k, got));
    }
    println!("{}", if ok { "verification passed" } else { "verification FAILED" });
    let verdict = if ok { Ok(()) } else { Err(Failure::Mismatch) };
    let Some(out) = a.out else {
        return verdict;
    };
    let mut params = config_params(&cfg);
    params.insert("n_max".into(), a.n_max.to_string());
    params.insert("m_max".into(), a.m_max.to_string());
    params.insert("tol".into(), a.tol.to_string());
    params.insert("mesh".into(), a.mesh.to_string());
    with_output(&out, "verify", digest, params, |dir| {
        let mut csv = String::from("n,k,analytic,oracle,gap\n");
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{:.6e}\n",
                r.n,
                r.k,
                fmt_sig15(r.analytic),
                fmt_sig15(r.oracle),
                r.gap
            ));
        }
        let mut cnt = String::from("n,threshold,analytic_count,oracle_count\n");
        for (n, t, k, got) in &counts {
            cnt.push_str(&format!("{n},{},{k},{got}\n", fmt_sig15(*t)));
        }
        dir.write("verify.csv", &csv).map_err(Failure::Solver)?;
        dir.write("counts.csv", &cnt).map_err(Failure::Solver)?;
        verdict
    })
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Strictly decreasing values in (0, 1]
    #[arg(long)]
    eps: String,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 192)]
    rho_cells: usize,
    #[arg(long, default_value_t = 128)]
    y_cells: usize,
    #[arg(long)]
    out: PathBuf,
}

pub fn sweep(a: SweepArgs) -> CmdResult {
    let (cfg, digest) = a.config.load()?;
    let eps: Vec<f64> = parse_list(&a.eps, "--eps")?;
    let mut params = config_params(&cfg);
    params.insert("eps".into(), a.eps.clone());
    params.insert("k".into(), a.k.to_string());
    params.insert("rho_cells".into(), a.rho_cells.to_string());
    params.insert("y_cells".into(), a.y_cells.to_string());
    let res = MeshResolution {
        rho_cells: a.rho_cells,
        y_cells: a.y_cells,
    };
    with_output(&a.out, "sweep", digest, params, |dir| {
        let table = epsilon_sweep::sweep(&cfg, &eps, a.k, res)?;
        for (row, gaps) in table.rows.iter().zip(table.gaps()) {
            let worst = gaps.iter().fold(0.0f64, |m, g| m.max(*g));
            println!("eps {:<8} max gap {worst:.4e}", row.epsilon);
        }
        dir.write("sweep.csv", &table.to_csv()).map_err(Failure::Solver)
    })
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Reaction polynomial coefficients, constant term first
    #[arg(long, allow_hyphen_values = true)]
    f: String,
    /// Final time
    #[arg(long = "T")]
    t_end: f64,
    #[arg(long)]
    dt: f64,
    /// Snapshot every this many steps
    #[arg(long)]
    snap: usize,
    /// const:<c> | mode:<i>[:<amp>] | random:<seed>[:<amp>] | bump[:<amp>] | coeffs:<a0>;<a1>;...
    #[arg(long, default_value = "bump:1", allow_hyphen_values = true)]
    init: String,
    #[arg(long, default_value_t = 8)]
    n_max: u32,
    #[arg(long, default_value_t = 16)]
    m_max: u32,
    #[arg(long)]
    out: PathBuf,
}

pub fn simulate(a: SimulateArgs) -> CmdResult {
    let (cfg, digest) = a.config.load()?;
    let reaction: ReactionTerm = a.f.parse()?;
    let init: InitialData = a.init.parse()?;
    let mut params = config_params(&cfg);
    params.insert("f".into(), a.f.clone());
    params.insert("T".into(), a.t_end.to_string());
    params.insert("dt".into(), a.dt.to_string());
    params.insert("snap".into(), a.snap.to_string());
    params.insert("init".into(), init.to_string());
    params.insert("n_max".into(), a.n_max.to_string());
    params.insert("m_max".into(), a.m_max.to_string());
    with_output(&a.out, "simulate", digest, params, |dir| {
        let spec = dispersion::spectrum(&cfg, a.n_max, a.m_max, None)?;
        let sim = Simulator::new(spec, reaction)?;
        let a0 = sim.initial_coeffs(&init)?;
        let traj = sim.run(a0, a.t_end, a.dt, a.snap)?;
        for (i, st) in traj.snapshots.iter().enumerate() {
            let csv = sim.synthesize(&st.coeffs).to_csv();
            dir.write(&format!("snapshot_{i:05}.csv"), &csv).map_err(Failure::Solver)?;
        }
        dir.write("series.csv", &traj.series_csv()).map_err(Failure::Solver)?;
        let (t, d) = traj.series.last().expect("series holds the initial state");
        println!(
            "{} basis functions, {} snapshots; t={t} mass={:.9e} energy={:.9e}",
            sim.keys().len(),
            traj.snapshots.len(),
            d.mass,
            d.energy
        );
        Ok(())
    })
}

#[derive(Args)]
pub struct ModesArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    n: u32,
    /// Radial index (0 is the constant mode)
    #[arg(long)]
    m: u32,
    /// Restrict to one member of a multiple eigenvalue
    #[arg(long)]
    ell: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

pub fn modes(a: ModesArgs) -> CmdResult {
    let (cfg, digest) = a.config.load()?;
    let mut params = config_params(&cfg);
    params.insert("n".into(), a.n.to_string());
    params.insert("m".into(), a.m.to_string());
    if let Some(l) = a.ell {
        params.insert("ell".into(), l.to_string());
    }
    with_output(&a.out, "modes", digest, params, |dir| {
        let spec = dispersion::spectrum(&cfg, a.n, a.m.max(1), None)?;
        let picked: Vec<_> = spec
            .for_n(a.n)
            .filter(|md| md.m == a.m && a.ell.map_or(true, |l| md.ell == l))
            .collect();
        if picked.is_empty() {
            return Err(Failure::Usage(anyhow!(
                "no mode with n={} m={}{} for bc {}",
                a.n,
                a.m,
                a.ell.map(|l| format!(" ell={l}")).unwrap_or_default(),
                cfg.bc
            )));
        }
        for md in picked {
            let mut csv = String::from("component,rho,value\n");
            for s in 0..3 {
                let grid = spec.layout.grid(s);
                for (rho, v) in grid.nodes().iter().zip(md.profile.values(s)) {
                    csv.push_str(&format!("{},{rho},{v:.15e}\n", s + 1));
                }
            }
            let name = format!("mode_bc-{}_n{}_m{}_ell{}.csv", cfg.bc.tag(), md.n, md.m, md.ell);
            dir.write(&name, &csv).map_err(Failure::Solver)?;
            println!("{name}: lambda {}", fmt_sig15(md.lambda));
        }
        Ok(())
    })
}

