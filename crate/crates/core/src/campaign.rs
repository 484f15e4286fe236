//! Monte Carlo campaigns over many trajectories and `(ε, T)` sweeps.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::control::ControlPolicy;
use crate::error::{config, Result};
use crate::model::ModelSpec;
use crate::solver::{steps_for, Simulator, SolverConfig};
use crate::spectral::SpectralBasis;

pub const CSV_HEADER: &str = "epsilon,R,T,estimate,rel_error_per_sample,second_moment,\
                              empirical_decay,n_exited,n_errors,M,wall_time_s";

/// Aggregate statistics of one campaign.
///
/// Equality ignores `wall_time_s`.
#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub epsilon: f64,
    pub r: f64,
    pub horizon: f64,
    pub h: f64,
    pub m: usize,
    pub mean: f64,
    pub sample_std: f64,
    /// `sample_std / mean`, i.e. `√M` times the standard error over the mean.
    pub rel_error_per_sample: Option<f64>,
    pub second_moment: f64,
    pub empirical_decay: Option<f64>,
    pub n_exited: usize,
    pub n_errors: usize,
    pub wall_time_s: f64,
}

impl PartialEq for CampaignResult {
    fn eq(&self, other: &Self) -> bool {
        self.epsilon == other.epsilon
            && self.r == other.r
            && self.horizon == other.horizon
            && self.h == other.h
            && self.m == other.m
            && self.mean == other.mean
            && self.sample_std == other.sample_std
            && self.rel_error_per_sample == other.rel_error_per_sample
            && self.second_moment == other.second_moment
            && self.empirical_decay == other.empirical_decay
            && self.n_exited == other.n_exited
            && self.n_errors == other.n_errors
    }
}

impl CampaignResult {
    /// Standard error of the mean, `sample_std/√M`.
    pub fn standard_error(&self) -> f64 {
        self.sample_std / (self.m as f64).sqrt()
    }
}

/// Per-trajectory data retained for the reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub value: f64,
    pub exited: bool,
    pub error: bool,
}

/// Reduces samples in index order.
pub fn summarize(samples: &[Sample], epsilon: f64, horizon: f64, h: f64) -> CampaignResult {
    let m = samples.len();
    let mf = m as f64;
    let mean = samples.iter().map(|s| s.value).sum::<f64>() / mf;
    let ss: f64 = samples.iter().map(|s| (s.value - mean).powi(2)).sum();
    let sample_std = if m > 1 { (ss / (mf - 1.0)).sqrt() } else { 0.0 };
    // mean² + (population variance) rather than Σv²/M keeps Q̂ ≥ mean² in floating point.
    let second_moment = mean * mean + ss / mf;
    let n_exited = samples.iter().filter(|s| s.exited).count();
    let n_errors = samples.iter().filter(|s| s.error).count();
    let rel_error_per_sample = (n_exited > 0 && mean > 0.0).then(|| sample_std / mean);
    let empirical_decay = (second_moment > 0.0).then(|| -second_moment.ln() / (h * h));
    CampaignResult {
        epsilon,
        r: epsilon.sqrt() * h,
        horizon,
        h,
        m,
        mean,
        sample_std,
        rel_error_per_sample,
        second_moment,
        empirical_decay,
        n_exited,
        n_errors,
        wall_time_s: 0.0,
    }
}

/// Runs trajectories `0..m` of `sim` on `threads` worker threads.
pub fn run_simulator(sim: &Simulator, m: usize, threads: usize) -> Result<CampaignResult> {
    if m == 0 {
        return Err(config("M: at least one trajectory is required"));
    }
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| config(format!("threads: {e}")))?;
    let samples: Vec<Sample> = pool.install(|| {
        (0..m as u64)
            .into_par_iter()
            .map_init(
                || sim.workspace(),
                |ws, i| {
                    let out = sim.run_trajectory(i, ws);
                    Sample {
                        value: out.estimator_value,
                        exited: out.exited,
                        error: out.error,
                    }
                },
            )
            .collect()
    });
    let cfg = sim.config();
    let mut result = summarize(&samples, cfg.epsilon, cfg.horizon, sim.h());
    result.wall_time_s = start.elapsed().as_secs_f64();
    if result.n_errors > 0 {
        log::warn!(
            "{} of {m} trajectories became non-finite at eps = {}, T = {}",
            result.n_errors,
            cfg.epsilon,
            cfg.horizon
        );
    }
    Ok(result)
}

/// Builds the simulator for one cell and runs `m` trajectories.
pub fn run_campaign(
    model: &ModelSpec,
    basis: &SpectralBasis,
    policy: &ControlPolicy,
    config: &SolverConfig,
    m: usize,
    threads: usize,
) -> Result<CampaignResult> {
    let sim = Simulator::new(model, basis, policy, config)?;
    run_simulator(&sim, m, threads)
}

/// One campaign per `(ε, T)` cell, rows ordered by ε then T.
///
/// Each cell copies `template` with its own ε, horizon and
/// `steps = ⌈steps_per_unit·T⌉`.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    model: &ModelSpec,
    basis: &SpectralBasis,
    policy: &ControlPolicy,
    template: &SolverConfig,
    eps_grid: &[f64],
    t_grid: &[f64],
    steps_per_unit: usize,
    m: usize,
    threads: usize,
) -> Result<Vec<CampaignResult>> {
    if eps_grid.is_empty() || t_grid.is_empty() {
        return Err(config("sweep grids must be non-empty"));
    }
    scaling_diagnostic(eps_grid, template.h_exponent);
    let mut out = Vec::with_capacity(eps_grid.len() * t_grid.len());
    for &eps in eps_grid {
        for &t in t_grid {
            let cfg = SolverConfig {
                epsilon: eps,
                horizon: t,
                steps: steps_for(t, steps_per_unit),
                ..template.clone()
            };
            let r = run_campaign(model, basis, policy, &cfg, m, threads)?;
            log::info!(
                "eps={eps:e} T={t}: estimate {:.3e}, {} exits, {:.1} s",
                r.mean,
                r.n_exited,
                r.wall_time_s
            );
            out.push(r);
        }
    }
    Ok(out)
}

/// Returns `false` (and warns) when `√ε h(ε)³` fails to decrease as ε decreases.
pub fn scaling_diagnostic(eps_grid: &[f64], h_exponent: f64) -> bool {
    let mut eps: Vec<f64> = eps_grid.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let g: Vec<f64> = eps
        .iter()
        .map(|&e| e.sqrt() * e.powf(-h_exponent).powi(3))
        .collect();
    let ok = g.windows(2).all(|w| w[1] < w[0]);
    if !ok {
        log::warn!(
            "sqrt(eps) h(eps)^3 does not decrease along the eps grid (h exponent {h_exponent}); \
             the mollified scheme's scaling condition fails"
        );
    }
    ok
}

/// Rendering options for campaign CSV.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CsvStyle {
    /// Render missing values as `--` instead of empty fields.
    pub paper_style: bool,
    /// Leave `wall_time_s` empty so output is byte-reproducible.
    pub omit_timing: bool,
}

/// C-style `%.5e`: six significant digits, two-digit signed exponent.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.5e}");
    match s.split_once('e') {
        Some((mant, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mant}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

impl CampaignResult {
    pub fn csv_row(&self, style: CsvStyle) -> String {
        let missing = if style.paper_style { "--" } else { "" };
        let opt = |v: Option<f64>| v.map(sci).unwrap_or_else(|| missing.to_string());
        let estimate = if self.n_exited == 0 {
            missing.to_string()
        } else {
            sci(self.mean)
        };
        let timing = if style.omit_timing {
            missing.to_string()
        } else {
            sci(self.wall_time_s)
        };
        let mut row = String::new();
        let _ = write!(
            row,
            "{},{},{},{},{},{},{},{},{},{},{}",
            sci(self.epsilon),
            sci(self.r),
            sci(self.horizon),
            estimate,
            opt(self.rel_error_per_sample),
            sci(self.second_moment),
            opt(self.empirical_decay),
            self.n_exited,
            self.n_errors,
            self.m,
            timing
        );
        row
    }
}

/// Header plus one row per result, newline-terminated.
pub fn to_csv(results: &[CampaignResult], style: CsvStyle) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&r.csv_row(style));
        out.push('\n');
    }
    out
}
