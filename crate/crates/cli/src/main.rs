//! `maxnewt` command line: run simulations, fix up stored states, and audit
//! run artifacts without writing any Rust.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use maxnewt::charge::ChargeProfile;
use maxnewt::constraints::{constraint_report, make_admissible};
use maxnewt::diagnostics::energy;
use maxnewt::picard::global_solve;
use maxnewt::run::{initial_state, run};
use maxnewt::state_file::{load_checkpoint, save_checkpoint};
use maxnewt::{Result, RunConfig};

#[derive(Parser)]
#[command(name = "maxnewt", version, about = "Maxwell field coupled to an extended charge: certified mild-solution runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured system and write series, checkpoints, manifest
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Checkpoint file to continue from
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Override the random-field seed from the config
        #[arg(long)]
        seed: Option<u64>,
        /// Override the Sobolev index from the config
        #[arg(long)]
        s: Option<f64>,
    },
    /// Project a stored state onto the Gauss-law constraint manifold, in place
    Admissibilize {
        state: PathBuf,
    },
    /// March the same config with both solvers and tabulate the discrepancy
    CompareOracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Audit a finished run directory against its own certificates
    Check {
        out: PathBuf,
    },
    /// Print the profile norm table entering the certified step size
    Norms {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        s: Option<f64>,
    },
}

fn load_config(path: &PathBuf, seed: Option<u64>, s: Option<f64>) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(seed) = seed {
        cfg.fields.seed = seed;
    }
    if let Some(s) = s {
        cfg.picard.s = s;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn cmd_run(
    config: PathBuf,
    out: PathBuf,
    resume: Option<PathBuf>,
    seed: Option<u64>,
    s: Option<f64>,
) -> Result<()> {
    let cfg = load_config(&config, seed, s)?;
    let r = run(&cfg, &out, resume.as_deref())?;
    println!(
        "marched t = {} .. {} in {} certified steps",
        r.steps.first().map(|x| x.t_start).unwrap_or(cfg.time.t0),
        r.final_time,
        r.steps.len()
    );
    println!("manifest: {}", r.manifest.display());
    for c in &r.checkpoints {
        println!("checkpoint: {}", c.display());
    }
    Ok(())
}

fn cmd_admissibilize(state: PathBuf) -> Result<()> {
    let (header, em) = load_checkpoint(&state)?;
    let profile = ChargeProfile::gaussian(header.sigma, header.e)?;
    let before = constraint_report(&profile, &em, header.particle.xi);
    let em = make_admissible(&profile, &em, header.particle.xi);
    let after = constraint_report(&profile, &em, header.particle.xi);
    save_checkpoint(&state, &header, &em)?;
    println!("gauss_E: {:.3e} -> {:.3e}", before.gauss_e, after.gauss_e);
    println!("gauss_B: {:.3e} -> {:.3e}", before.gauss_b, after.gauss_b);
    Ok(())
}

fn cmd_compare_oracle(config: PathBuf, out: PathBuf, seed: Option<u64>) -> Result<()> {
    let cfg = load_config(&config, seed, None)?;
    let ocfg = cfg.oracle.unwrap_or(maxnewt::oracle::OracleConfig { dt: 1e-3, order: 4 });
    let (profile, u0) = initial_state(&cfg)?;

    // Picard states at a uniform comparison grid, collected from the nodes
    // nearest each sample time.
    let n_samples = 10usize;
    let span = cfg.time.t_end - cfg.time.t0;
    let sample_ts: Vec<f64> =
        (1..=n_samples).map(|i| cfg.time.t0 + span * i as f64 / n_samples as f64).collect();
    let mut nearest: Vec<(f64, Option<(f64, maxnewt::SystemState)>)> =
        sample_ts.iter().map(|&t| (t, None)).collect();
    global_solve(
        &profile,
        cfg.model,
        &u0,
        cfg.time.t0,
        cfg.time.t_end,
        &cfg.picard,
        None,
        |t, u| {
            // keep the first node at or past each sample time
            for (ts, slot) in nearest.iter_mut() {
                if slot.is_none() && t * span.signum() >= *ts * span.signum() - 1e-12 {
                    *slot = Some((t, u.clone()));
                }
            }
        },
    )?;

    std::fs::create_dir_all(&out)?;
    let table = out.join("oracle_discrepancy.csv");
    let mut text = String::from("t,distance_x0,picard_energy,oracle_energy\n");
    println!("{:>10}  {:>12}", "t", "|du|_X0");
    for (_, slot) in nearest {
        let (t, up) = slot.expect("solver visits every sample time");
        let uo = maxnewt::oracle::reference_solve(&profile, cfg.model, &u0, cfg.time.t0, t, &ocfg)?;
        let d = up.distance(&uo, cfg.model, 0.0);
        text += &format!(
            "{t:.9e},{d:.6e},{:.12e},{:.12e}\n",
            energy(cfg.model, &up),
            energy(cfg.model, &uo)
        );
        println!("{t:>10.4}  {d:>12.3e}");
    }
    std::fs::write(&table, text)?;
    println!("table: {}", table.display());
    Ok(())
}

fn cmd_check(out: PathBuf) -> Result<()> {
    use maxnewt::Error;
    let manifest_path = out.join("manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)?;
    let series_path = manifest["series"]
        .as_str()
        .ok_or_else(|| Error::Integrity("manifest records no series file".into()))?;
    let text = std::fs::read_to_string(series_path)?;

    let mut rows = 0usize;
    let mut bound_violations = 0usize;
    let mut max_continuity = 0.0f64;
    let (mut e_first, mut e_last) = (f64::NAN, f64::NAN);
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect();
        // columns: t, xi*3, v*3, energy, xs_norm_sq, growth_bound, gauss_e, gauss_b, continuity
        let (energy, norm_sq, bound, continuity) = (f[7], f[8], f[9], f[12]);
        if rows == 0 {
            e_first = energy;
        }
        e_last = energy;
        if norm_sq > bound * (1.0 + 1e-12) {
            bound_violations += 1;
        }
        max_continuity = max_continuity.max(continuity);
        rows += 1;
    }
    let drift = (e_last - e_first).abs() / (1.0 + e_first.abs());
    println!("rows:                {rows}");
    println!("energy drift:        {drift:.3e} (relative)");
    println!("growth-bound misses: {bound_violations}");
    println!("max continuity:      {max_continuity:.3e}");
    if bound_violations > 0 {
        return Err(Error::Integrity(format!(
            "{bound_violations} nodes exceed the growth certificate"
        )));
    }
    Ok(())
}

fn cmd_norms(config: PathBuf, s: Option<f64>) -> Result<()> {
    let cfg = load_config(&config, None, s)?;
    let profile = ChargeProfile::gaussian(cfg.profile.sigma, cfg.profile.e)?;
    let table = profile.norm_table(cfg.picard.s)?;
    println!("profile norms at s = {}", table.s);
    for (label, value) in &table.entries {
        println!("  {label:<12} {value:.12e}");
    }
    println!("  {:<12} {:.12e}", "M", table.m);
    println!(
        "  {:<12} {:.12e}",
        "T(1)",
        maxnewt::picard::step_size(cfg.profile.e.abs(), table.m, 1.0)
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, resume, seed, s } => cmd_run(config, out, resume, seed, s),
        Command::Admissibilize { state } => cmd_admissibilize(state),
        Command::CompareOracle { config, out, seed } => cmd_compare_oracle(config, out, seed),
        Command::Check { out } => cmd_check(out),
        Command::Norms { config, s } => cmd_norms(config, s),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
