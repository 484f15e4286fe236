mod config;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mdspde::campaign::{self, CsvStyle};
use mdspde::solver::Simulator;
use mdspde::variational::{decay_rates, exit_direction, t_star};

use crate::config::{cell_config, parse_document, validate, Overrides, RawConfig, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "mdspde",
    version,
    about = "Rare exit probabilities of small-noise stochastic reaction-diffusion equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Laplacian and linearized eigenvalues as CSV; gap report on stderr.
    Spectrum,
    /// Spectral gap conditions of the linearized operator.
    GapCheck,
    /// Exit direction, crossover time and decay rates for each horizon.
    Minimizer,
    /// One campaign at the first epsilon and horizon of the grid.
    Simulate,
    /// Campaign sweep over the epsilon x horizon grid.
    Table,
    /// Special-function self-test.
    Oracle,
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Comma-separated noise intensities.
    #[arg(long, global = true, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    /// Comma-separated time horizons.
    #[arg(long, global = true, value_delimiter = ',')]
    horizon: Option<Vec<f64>>,
    /// none, asymptotic or mollified.
    #[arg(long, global = true)]
    control: Option<String>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    #[arg(long, global = true)]
    k0: Option<usize>,
    /// Exponent rho in h(eps) = eps^-rho.
    #[arg(long, global = true)]
    h_exponent: Option<f64>,
    /// Galerkin level N.
    #[arg(long, global = true)]
    galerkin: Option<usize>,
    #[arg(long, global = true)]
    steps_per_unit: Option<usize>,
    /// Monte Carlo trajectories per cell.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, env = "MDSPDE_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Render missing values as "--".
    #[arg(long, global = true)]
    paper_style: bool,
    /// Leave wall_time_s empty for byte-reproducible output.
    #[arg(long, global = true)]
    omit_timing: bool,
    /// allen-cahn or quintic.
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// neumann, periodic or dirichlet.
    #[arg(long, global = true)]
    bc: Option<String>,
    /// Domain length.
    #[arg(long, global = true)]
    ell: Option<f64>,
    /// Equilibrium sign, + or -.
    #[arg(long, global = true, allow_hyphen_values = true)]
    sign: Option<String>,
    /// Exit radius L.
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// Write the path of trajectory 0 (simulate only).
    #[arg(long, global = true)]
    path_dump: Option<String>,
}

impl Opts {
    fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model.clone(),
            mu: self.mu,
            bc: self.bc.clone(),
            ell: self.ell,
            sign: self.sign.clone(),
            galerkin: self.galerkin,
            steps_per_unit: self.steps_per_unit,
            radius: self.radius,
            seed: self.seed,
            control: self.control.clone(),
            kappa: self.kappa,
            k0: self.k0,
            h_exponent: self.h_exponent,
            samples: self.samples,
            threads: self.threads,
            epsilon: self.epsilon.clone(),
            horizon: self.horizon.clone(),
            out: self.out.clone(),
            path_dump: self.path_dump.clone(),
            paper_style: self.paper_style,
            omit_timing: self.omit_timing,
        }
    }
}

fn load(opts: &Opts) -> Result<RunConfig> {
    let mut raw = match &opts.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            parse_document(&text).with_context(|| format!("in {path}"))?
        }
        None => RawConfig::default(),
    };
    raw.apply(opts.overrides());
    validate(raw)
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.raw.output.csv {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {path}")),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn style(cfg: &RunConfig) -> CsvStyle {
    CsvStyle {
        paper_style: cfg.raw.output.paper_style,
        omit_timing: cfg.raw.output.omit_timing,
    }
}

fn spectrum(cfg: &RunConfig) -> Result<()> {
    let b = &cfg.basis;
    let mut text = String::from("index,a_lap,a_lin\n");
    for j in 0..b.len() {
        let lin = b
            .lin_eigenvalues()
            .get(j)
            .map(|a| campaign::sci(*a))
            .unwrap_or_default();
        text.push_str(&format!(
            "{},{},{}\n",
            j + 1,
            campaign::sci(b.lap_eigenvalues()[j]),
            lin
        ));
    }
    eprintln!("{}", cfg.gap());
    emit(cfg, &text)
}

fn minimizer(cfg: &RunConfig) -> Result<()> {
    let lin = cfg.basis.lin_eigenvalues();
    let l = cfg.raw.solver.l;
    let k0 = cfg.raw.control.k0;
    let crossover = if lin.len() >= 2 && lin[1] <= 2.0 * lin[0] {
        Some(t_star(lin[0], lin[1])?)
    } else {
        None
    };
    let mut text =
        String::from("T,exit_direction,tied_directions,I_star,T_star,G_T,U0,scheme,optimal\n");
    for &t in &cfg.raw.campaign.horizon {
        let dir = exit_direction(lin, k0, t, l)?;
        let rates = decay_rates(lin[0], l, t)?;
        let tied: Vec<String> = dir.tied.iter().map(|i| i.to_string()).collect();
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            campaign::sci(t),
            dir.index,
            tied.join(" "),
            campaign::sci(dir.value),
            crossover.map(campaign::sci).unwrap_or_default(),
            campaign::sci(rates.g_t),
            campaign::sci(rates.u0),
            campaign::sci(rates.scheme),
            campaign::sci(rates.optimal),
        ));
    }
    emit(cfg, &text)
}

fn simulate(cfg: &RunConfig) -> Result<()> {
    let raw = &cfg.raw;
    let solver = cell_config(raw, raw.campaign.epsilon[0], raw.campaign.horizon[0]);
    let sim = Simulator::new(&cfg.model, &cfg.basis, &cfg.policy, &solver)?;
    let result = campaign::run_simulator(&sim, raw.campaign.samples, raw.campaign.threads)?;
    if let Some(path) = &raw.output.path_dump {
        let mut recording = solver.clone();
        recording.record_path = true;
        let rec = Simulator::new(&cfg.model, &cfg.basis, &cfg.policy, &recording)?;
        let mut ws = rec.workspace();
        let out = rec.run_trajectory(0, &mut ws);
        let csv = mdspde::solver::path_csv(
            out.path.as_deref().unwrap_or_default(),
            recording.h_step(),
            cfg.basis.len(),
        );
        fs::write(path, csv).with_context(|| format!("writing {path}"))?;
    }
    emit(cfg, &campaign::to_csv(&[result], style(cfg)))
}

fn table(cfg: &RunConfig) -> Result<()> {
    let raw = &cfg.raw;
    let template = cell_config(raw, raw.campaign.epsilon[0], raw.campaign.horizon[0]);
    let rows = campaign::sweep(
        &cfg.model,
        &cfg.basis,
        &cfg.policy,
        &template,
        &raw.campaign.epsilon,
        &raw.campaign.horizon,
        raw.solver.steps_per_unit,
        raw.campaign.samples,
        raw.campaign.threads,
    )?;
    emit(cfg, &campaign::to_csv(&rows, style(cfg)))
}

fn oracle() -> bool {
    let checks = mdspde::oracle::self_test();
    let mut ok = true;
    for c in &checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        ok &= c.passed;
    }
    ok
}

fn run(cli: Cli) -> Result<bool> {
    if let Command::Oracle = cli.command {
        return Ok(oracle());
    }
    let cfg = load(&cli.opts)?;
    match cli.command {
        Command::Spectrum => spectrum(&cfg)?,
        Command::GapCheck => println!("{}", cfg.gap()),
        Command::Minimizer => minimizer(&cfg)?,
        Command::Simulate => simulate(&cfg)?,
        Command::Table => table(&cfg)?,
        Command::Oracle => unreachable!(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
