//! End-to-end acceptance suite.
//!
//! Prints one PASS/FAIL line per criterion followed by a summary. The process
//! exits successfully regardless of the outcome so that `cargo test` stays
//! usable; set `MDSPDE_ACCEPTANCE_STRICT=1` to turn any FAIL into a nonzero
//! exit status.
//!
//! Campaigns are cached by their full parameter set, so criteria sharing a
//! cell do not pay for it twice.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use mdspde::campaign::{run_campaign, run_simulator, CampaignResult};
use mdspde::control::{ControlKind, ControlPolicy};
use mdspde::model::{equilibrium, ModelKind, ModelSpec, Sign};
use mdspde::oracle::self_test;
use mdspde::solver::{steps_for, Simulator, SolverConfig};
use mdspde::specfun::inverse_m;
use mdspde::spectral::{laplacian_spectrum, linearized_spectrum, BoundaryCondition, SpectralBasis};
use mdspde::variational::{
    action_functional, decay_rates, exit_direction, lambda_weights, minimizer_eval, t_star,
    MinimizerPath,
};

const REFERENCE_EPS: [f64; 9] = [
    0.01, 0.004, 0.002, 0.0008, 0.0004, 0.0001, 0.00006, 0.000008, 0.000004,
];
const REFERENCE_T: [f64; 6] = [1.0, 2.0, 3.0, 4.0, 6.0, 8.0];
// Noise levels run with h-exponent 0.2, paired row by row with REFERENCE_EPS.
const RHO02_EPS: [f64; 9] = [0.08, 0.05, 0.03, 0.01, 0.008, 0.006, 0.004, 0.002, 0.001];
const DIRICHLET_ELL: f64 = 3.81828;

// Time resolution of the checks against published values. Exit monitoring at
// grid times biases the probability low by roughly O(√Δt); at the library
// default of 100 steps per unit these cells come out 12-19% low, at 400 within
// 2-12%.
const SPOT_STEPS_PER_UNIT: usize = 400;
const DEFAULT_STEPS_PER_UNIT: usize = 100;

#[derive(Debug, Clone, Copy)]
enum Bc {
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    quintic: bool,
    bc: Bc,
    ell: f64,
    galerkin: usize,
    control: ControlKind,
    kappa: f64,
    h_exponent: f64,
    epsilon: f64,
    horizon: f64,
    steps_per_unit: usize,
    m: usize,
    seed: u64,
}

impl Cell {
    fn neumann(epsilon: f64, horizon: f64, m: usize) -> Self {
        Self {
            quintic: false,
            bc: Bc::Neumann,
            ell: 1.0,
            galerkin: 50,
            control: ControlKind::Mollified,
            kappa: 0.9,
            h_exponent: 0.1,
            epsilon,
            horizon,
            steps_per_unit: DEFAULT_STEPS_PER_UNIT,
            m,
            seed: 0,
        }
    }

    fn smc(mut self, seed: u64) -> Self {
        self.control = ControlKind::None;
        self.seed = seed;
        self
    }

    fn key(&self) -> String {
        format!("{self:?}")
    }

    fn label(&self) -> String {
        let ctl = match self.control {
            ControlKind::None => "sMC",
            _ => "IS",
        };
        format!(
            "{ctl} eps={} T={} N={} dt=1/{} M={}",
            self.epsilon, self.horizon, self.galerkin, self.steps_per_unit, self.m
        )
    }

    fn model(&self) -> ModelSpec {
        let kind = if self.quintic {
            ModelKind::Quintic { mu: -0.5 }
        } else {
            ModelKind::AllenCahn
        };
        let bc = match self.bc {
            Bc::Neumann => BoundaryCondition::Neumann,
            Bc::Dirichlet => BoundaryCondition::Dirichlet,
        };
        ModelSpec::new(kind, bc, self.ell, Sign::Plus).expect("valid model")
    }
}

fn basis_for(model: &ModelSpec, n: usize) -> SpectralBasis {
    let lap = laplacian_spectrum(model.bc(), model.ell(), n).expect("laplacian spectrum");
    linearized_spectrum(model, &lap).expect("linearized spectrum")
}

struct Harness {
    threads: usize,
    cache: HashMap<String, CampaignResult>,
    outcomes: Vec<(usize, bool)>,
}

impl Harness {
    fn run(&mut self, cell: Cell) -> CampaignResult {
        if let Some(r) = self.cache.get(&cell.key()) {
            return r.clone();
        }
        let model = cell.model();
        let basis = basis_for(&model, cell.galerkin);
        let policy = match cell.control {
            ControlKind::None => ControlPolicy::none(1.0),
            kind => ControlPolicy::new(kind, 1.0, cell.kappa, &basis),
        }
        .expect("policy");
        let config = SolverConfig {
            epsilon: cell.epsilon,
            horizon: cell.horizon,
            steps: steps_for(cell.horizon, cell.steps_per_unit),
            h_exponent: cell.h_exponent,
            l: 1.0,
            seed: cell.seed,
            record_path: false,
        };
        let r =
            run_campaign(&model, &basis, &policy, &config, cell.m, self.threads).expect("campaign");
        println!(
            "    [{}] estimate {:.4e}  rel err {}  exits {}  {:.1} s",
            cell.label(),
            r.mean,
            fmt_opt(r.rel_error_per_sample),
            r.n_exited,
            r.wall_time_s
        );
        self.cache.insert(cell.key(), r.clone());
        r
    }

    fn report(&mut self, n: usize, title: &str, passed: bool, detail: &str) {
        println!(
            "{} criterion {n:>2} ({title}): {detail}",
            if passed { "PASS" } else { "FAIL" }
        );
        self.outcomes.push((n, passed));
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.2}")).unwrap_or_else(|| "--".into())
}

fn rel_dev(x: f64, target: f64) -> f64 {
    (x / target - 1.0).abs()
}

fn criterion_1(h: &mut Harness) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (eps, target) in [(0.01, 1.20e-1), (0.002, 1.98e-2)] {
        let mut cell = Cell::neumann(eps, 4.0, 50_000);
        cell.steps_per_unit = SPOT_STEPS_PER_UNIT;
        let r = h.run(cell);
        let dev = rel_dev(r.mean, target);
        ok &= dev <= 0.10;
        parts.push(format!(
            "eps={eps}: {:.4e} vs {target:.2e} ({:+.1}%, wall {:.0} s on {} thread(s))",
            r.mean,
            100.0 * (r.mean / target - 1.0),
            r.wall_time_s,
            h.threads
        ));
    }
    h.report(1, "moderate-regime reference values", ok, &parts.join("; "));
}

fn criterion_2(h: &mut Harness) {
    let mut cell = Cell::neumann(4e-6, 8.0, 50_000);
    cell.steps_per_unit = SPOT_STEPS_PER_UNIT;
    let r = h.run(cell);
    let target = 2.13e-9;
    let dev = rel_dev(r.mean, target);
    let rel = r.rel_error_per_sample;
    let ok = dev <= 0.20 && rel.is_some_and(|x| x <= 2.0);
    h.report(
        2,
        "deep tail",
        ok,
        &format!(
            "{:.4e} vs {target:.2e} ({:+.1}%), rel err per sample {}",
            r.mean,
            100.0 * (r.mean / target - 1.0),
            fmt_opt(rel)
        ),
    );
}

fn criterion_3(h: &mut Harness) {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [2.0, 4.0, 8.0] {
        let mut is_cell = Cell::neumann(0.01, t, 20_000);
        is_cell.seed = 1;
        let is = h.run(is_cell);
        let smc = h.run(Cell::neumann(0.01, t, 20_000).smc(2));
        let se = (is.standard_error().powi(2) + smc.standard_error().powi(2)).sqrt();
        let z = (is.mean - smc.mean).abs() / se;
        ok &= z <= 3.0;
        parts.push(format!(
            "T={t}: IS {:.4e} sMC {:.4e} ({z:.2} SE)",
            is.mean, smc.mean
        ));
    }
    h.report(3, "IS/sMC cross-validation", ok, &parts.join("; "));
}

fn criterion_4(h: &mut Harness) {
    let m = 10_000;
    let mut worst_is: f64 = 0.0;
    let mut is_ok = true;
    let mut smc_fail = Vec::new();
    for &eps in &REFERENCE_EPS {
        for &t in &REFERENCE_T {
            let is = h.run(Cell::neumann(eps, t, m));
            match is.rel_error_per_sample {
                Some(x) => {
                    worst_is = worst_is.max(x);
                    is_ok &= x <= 5.0;
                }
                None => is_ok = false,
            }
            if eps <= 8e-4 {
                let smc = h.run(Cell::neumann(eps, t, m).smc(3));
                if let Some(x) = smc.rel_error_per_sample {
                    if x < 20.0 {
                        smc_fail.push(format!("eps={eps} T={t}: {x:.1}"));
                    }
                }
            }
        }
    }
    let ok = is_ok && smc_fail.is_empty();
    let smc_detail = if smc_fail.is_empty() {
        "sMC >= 20 or no exits in every cell with eps <= 8e-4".to_string()
    } else {
        format!("sMC below 20 at {}", smc_fail.join(", "))
    };
    h.report(
        4,
        "relative-error regime separation",
        ok,
        &format!("max IS rel err {worst_is:.2} (M={m}); {smc_detail}"),
    );
}

fn criterion_5(h: &mut Harness) {
    let a = inverse_m(0.5 * DIRICHLET_ELL).expect("inverse_M");
    let model = ModelSpec::new(
        ModelKind::AllenCahn,
        BoundaryCondition::Dirichlet,
        DIRICHLET_ELL,
        Sign::Plus,
    )
    .expect("model");
    let basis = basis_for(&model, 50);
    let norm = equilibrium(&model, &basis).expect("equilibrium").l2_norm;
    let a1 = basis.lin_eigenvalues()[0];
    let cell = Cell {
        bc: Bc::Dirichlet,
        ell: DIRICHLET_ELL,
        steps_per_unit: SPOT_STEPS_PER_UNIT,
        ..Cell::neumann(1e-5, 4.0, 20_000)
    };
    let r = h.run(cell);
    let target = 9.23e-3;
    let checks = [
        ((a - 0.65).abs() <= 1e-3, format!("a = {a:.9}")),
        ((norm - 0.33).abs() <= 0.01, format!("|x*| = {norm:.4}")),
        ((a1 - 0.63375).abs() <= 1e-6, format!("a1 = {a1:.9}")),
        (
            rel_dev(r.mean, target) <= 0.15,
            format!(
                "estimate {:.4e} vs {target:.2e} ({:+.1}%)",
                r.mean,
                100.0 * (r.mean / target - 1.0)
            ),
        ),
    ];
    let ok = checks.iter().all(|c| c.0);
    let detail: Vec<String> = checks
        .iter()
        .map(|(p, s)| format!("{s} [{}]", if *p { "ok" } else { "off" }))
        .collect();
    h.report(5, "Dirichlet pipeline", ok, &detail.join("; "));
}

fn criterion_6(h: &mut Harness) {
    let cell = Cell {
        quintic: true,
        kappa: 0.999,
        steps_per_unit: SPOT_STEPS_PER_UNIT,
        ..Cell::neumann(0.002, 4.0, 20_000)
    };
    let r = h.run(cell);
    let target = 1.79e-3;
    h.report(
        6,
        "quintic pipeline",
        rel_dev(r.mean, target) <= 0.15,
        &format!(
            "{:.4e} vs {target:.2e} ({:+.1}%)",
            r.mean,
            100.0 * (r.mean / target - 1.0)
        ),
    );
}

fn criterion_7(h: &mut Harness) {
    let bound = 1.05 * decay_rates(2.0, 1.0, 8.0).expect("rates").optimal;
    let decays: Vec<f64> = REFERENCE_EPS
        .iter()
        .map(|&eps| {
            h.run(Cell::neumann(eps, 8.0, 10_000))
                .empirical_decay
                .unwrap_or(f64::NAN)
        })
        .collect();
    let monotone = decays.windows(2).all(|w| w[1] >= 0.98 * w[0]);
    let bounded = decays.iter().all(|&d| d <= bound);
    let list: Vec<String> = decays.iter().map(|d| format!("{d:.3}")).collect();
    h.report(
        7,
        "decay-rate trend",
        monotone && bounded,
        &format!(
            "T=8 decays [{}], nondecreasing within 2%: {monotone}, all <= {bound:.3}: {bounded}",
            list.join(", ")
        ),
    );
}

fn criterion_8(h: &mut Harness) {
    let mut wins = 0;
    let mut comparable = 0;
    let mut parts = Vec::new();
    for (&e1, &e2) in REFERENCE_EPS.iter().zip(&RHO02_EPS) {
        let low = h.run(Cell::neumann(e1, 2.0, 10_000));
        let high = h.run(Cell {
            h_exponent: 0.2,
            ..Cell::neumann(e2, 2.0, 10_000)
        });
        if let (Some(a), Some(b)) = (low.rel_error_per_sample, high.rel_error_per_sample) {
            comparable += 1;
            if a <= b {
                wins += 1;
            }
            parts.push(format!("{a:.2}/{b:.2}"));
        } else {
            parts.push("--".into());
        }
    }
    h.report(
        8,
        "h-exponent comparison",
        wins >= 7,
        &format!(
            "rho 0.1 no worse in {wins} of {comparable} comparable rows [{}]",
            parts.join(" ")
        ),
    );
}

fn criterion_9(h: &mut Harness) {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for &eps in &REFERENCE_EPS {
        let a = h.run(Cell::neumann(eps, 3.0, 10_000));
        let b = h.run(Cell {
            galerkin: 100,
            ..Cell::neumann(eps, 3.0, 10_000)
        });
        match (a.rel_error_per_sample, b.rel_error_per_sample) {
            (Some(x), Some(y)) => {
                worst = worst.max((x - y).abs());
                ok &= (x - y).abs() <= 0.2;
                parts.push(format!("{x:.2}/{y:.2}"));
            }
            _ => {
                ok = false;
                parts.push("--".into());
            }
        }
    }
    h.report(
        9,
        "Galerkin stability",
        ok,
        &format!("max |N50 - N100| = {worst:.3} [{}]", parts.join(" ")),
    );
}

fn criterion_10(h: &mut Harness) {
    let start = Instant::now();
    let checks = self_test();
    let elapsed = start.elapsed().as_secs_f64();
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    let ok = failed.is_empty() && elapsed < 1.0;
    let detail = if failed.is_empty() {
        format!("{} checks passed in {elapsed:.3} s", checks.len())
    } else {
        format!("failed: {}", failed.join(", "))
    };
    h.report(10, "special-function suite", ok, &detail);
}

fn criterion_11(h: &mut Harness) {
    let taus: Vec<f64> = (1..=100).map(|i| 0.1 * i as f64).collect();
    let mut notes = Vec::new();

    let spectra = [
        (
            "Neumann AC",
            ModelSpec::new(
                ModelKind::AllenCahn,
                BoundaryCondition::Neumann,
                1.0,
                Sign::Plus,
            ),
        ),
        (
            "quintic",
            ModelSpec::new(
                ModelKind::Quintic { mu: -0.5 },
                BoundaryCondition::Neumann,
                1.0,
                Sign::Plus,
            ),
        ),
        (
            "Dirichlet AC",
            ModelSpec::new(
                ModelKind::AllenCahn,
                BoundaryCondition::Dirichlet,
                DIRICHLET_ELL,
                Sign::Plus,
            ),
        ),
    ];
    let mut strong_ok = true;
    for (name, model) in spectra {
        let basis = basis_for(&model.expect("model"), 50);
        let bad = taus
            .iter()
            .filter(|&&t| {
                exit_direction(basis.lin_eigenvalues(), 1, t, 1.0)
                    .expect("dir")
                    .index
                    != 1
            })
            .count();
        strong_ok &= bad == 0;
        if bad > 0 {
            notes.push(format!("{name}: {bad} horizons not along e1"));
        }
    }

    let pair = [2.0, 3.0];
    let ts = t_star(pair[0], pair[1]).expect("t_star");
    let ts_ok = (ts - 4f64.ln() / 6.0).abs() <= 1e-12;
    let above_ok = taus
        .iter()
        .filter(|&&t| t > ts)
        .all(|&t| exit_direction(&pair, 1, t, 1.0).expect("dir").index == 2);
    // Brute-force scan for a sign change of λ₁ − λ₂.
    let grid: Vec<f64> = (0..=6000)
        .map(|i| 10f64.powf(-4.0 + i as f64 / 1000.0))
        .collect();
    let diff = |t: f64| {
        let l = lambda_weights(&pair, 1, t).expect("lambda");
        l[0] - l[1]
    };
    let crossover = grid
        .windows(2)
        .find(|w| diff(w[0]) * diff(w[1]) < 0.0)
        .map(|w| w[0]);
    let below_ok = match crossover {
        Some(tc) => taus
            .iter()
            .filter(|&&t| t < 0.5 * tc)
            .all(|&t| exit_direction(&pair, 1, t, 1.0).expect("dir").index == 1),
        None => true,
    };
    notes.push(format!(
        "T* = {ts:.6} (ln4/6 match: {ts_ok}); e2 above T*: {above_ok}; crossover {}",
        match crossover {
            Some(tc) => format!("near {tc:.4}, e1 below half of it: {below_ok}"),
            None => "absent on [1e-4, 1e2] (lambda2 < lambda1 throughout)".into(),
        }
    ));

    let a = [2.0_f64, 5.0];
    let z = vec![0.6, 0.8];
    let tau = 1.5;
    let exact: f64 = a
        .iter()
        .zip(&z)
        .map(|(&ak, &zk)| ak * zk * zk / (-(-2.0 * ak * tau).exp_m1()))
        .sum();
    let path = MinimizerPath::new(z, tau, a.to_vec()).expect("path");
    let err = |n: usize| {
        let dt = tau / n as f64;
        let samples: Vec<Vec<f64>> = (0..=n)
            .map(|i| minimizer_eval(&path, (i as f64 * dt).min(tau)).expect("eval"))
            .collect();
        (action_functional(&samples, dt, &a, 2).expect("action") - exact).abs()
    };
    let (e1, e2) = (err(500), err(1000));
    let order = (e1 / e2).log2();
    let action_ok = e2 <= 1e-5 * exact && order >= 1.8;
    notes.push(format!(
        "action error {e2:.2e} at n=1000, observed order {order:.2}"
    ));

    let ok = strong_ok && ts_ok && above_ok && below_ok && action_ok;
    h.report(11, "variational suite", ok, &notes.join("; "));
}

fn criterion_12(h: &mut Harness) {
    let a = 1.0;
    let eps = 0.01;
    let m = 100_000;
    let cfg = |seed: u64| SolverConfig {
        seed,
        steps: 100,
        ..SolverConfig::new(eps, 1.0)
    };
    let is_policy =
        ControlPolicy::from_modes(ControlKind::Mollified, 1.0, 0.9, vec![a], vec![vec![1.0]])
            .expect("policy");
    let none = ControlPolicy::none(1.0).expect("policy");
    let is_sim = Simulator::linear(vec![a], vec![0.0], &is_policy, &cfg(11)).expect("sim");
    let smc_sim = Simulator::linear(vec![a], vec![0.0], &none, &cfg(12)).expect("sim");
    let is = run_simulator(&is_sim, m, h.threads).expect("campaign");
    let smc = run_simulator(&smc_sim, m, h.threads).expect("campaign");
    let se = (is.standard_error().powi(2) + smc.standard_error().powi(2)).sqrt();
    let z = (is.mean - smc.mean).abs() / se;

    let model = Cell::neumann(0.002, 2.0, 0).model();
    let basis = basis_for(&model, 50);
    let policy = ControlPolicy::new(ControlKind::Mollified, 1.0, 0.9, &basis).expect("policy");
    let config = SolverConfig {
        seed: 5,
        ..SolverConfig::new(0.002, 2.0)
    };
    let runs: Vec<CampaignResult> = [1, 4, 16]
        .iter()
        .map(|&t| run_campaign(&model, &basis, &policy, &config, 300, t).expect("campaign"))
        .collect();
    let identical = runs.iter().all(|r| {
        r == &runs[0]
            && r.mean.to_bits() == runs[0].mean.to_bits()
            && r.second_moment.to_bits() == runs[0].second_moment.to_bits()
    });
    h.report(
        12,
        "unbiasedness and reproducibility",
        z <= 3.0 && identical,
        &format!(
            "OU toy IS {:.5e} vs sMC {:.5e} ({z:.2} SE, M={m}); threads 1/4/16 bit-identical: {identical}",
            is.mean, smc.mean
        ),
    );
}

fn main() -> ExitCode {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let strict = std::env::var("MDSPDE_ACCEPTANCE_STRICT").is_ok_and(|v| v != "0" && !v.is_empty());
    let mut h = Harness {
        threads,
        cache: HashMap::new(),
        outcomes: Vec::new(),
    };
    println!("acceptance suite on {threads} thread(s)");
    let start = Instant::now();
    // Cheap deterministic criteria first.
    criterion_10(&mut h);
    criterion_11(&mut h);
    criterion_12(&mut h);
    criterion_5(&mut h);
    criterion_6(&mut h);
    criterion_3(&mut h);
    criterion_9(&mut h);
    criterion_8(&mut h);
    criterion_7(&mut h);
    criterion_4(&mut h);
    criterion_2(&mut h);
    criterion_1(&mut h);

    h.outcomes.sort();
    let failed: Vec<String> = h
        .outcomes
        .iter()
        .filter(|(_, p)| !p)
        .map(|(n, _)| n.to_string())
        .collect();
    println!(
        "summary: {} of {} criteria passed in {:.0} s{}",
        h.outcomes.len() - failed.len(),
        h.outcomes.len(),
        start.elapsed().as_secs_f64(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed: {}", failed.join(", "))
        }
    );
    if strict && !failed.is_empty() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
