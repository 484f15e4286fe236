//! Exponential Euler integration of the Galerkin system under the sampling
//! measure, with Girsanov log-weight accumulation and exit detection.
//!
//! For a mode with Laplacian eigenvalue `a > 0` and step `h_s`,
//!
//! ```text
//! Θ' = e^{−a h_s} Θ + (1 − e^{−a h_s})/a · (f + √ε h u) + √ε √((1 − e^{−2a h_s})/(2a)) w
//! ```
//!
//! and modes with `a = 0` use explicit Euler. The log-weight increment is
//! `−h Σ_j u_j √h_s w_j − (h²/2)‖u‖² h_s`, with `u` evaluated at the start
//! of the step.

use crate::control::{moderate_scale, ControlPolicy};
use crate::error::{config, Result};
use crate::model::{equilibrium, ModelSpec, Nonlinearity};
use crate::rng::NoiseSource;
use crate::spectral::SpectralBasis;
use crate::transform::TransformWorkspace;

/// Default number of time steps per unit of simulated time.
pub const DEFAULT_STEPS_PER_UNIT: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub horizon: f64,
    pub steps: usize,
    pub h_exponent: f64,
    pub l: f64,
    pub seed: u64,
    pub record_path: bool,
}

impl SolverConfig {
    /// Configuration with `steps = 100·T`, `h(ε) = ε^{−0.1}` and `L = 1`.
    pub fn new(epsilon: f64, horizon: f64) -> Self {
        Self {
            epsilon,
            horizon,
            steps: steps_for(horizon, DEFAULT_STEPS_PER_UNIT),
            h_exponent: 0.1,
            l: 1.0,
            seed: 0,
            record_path: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(config(format!(
                "epsilon: must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(config(format!(
                "horizon: must be positive, got {}",
                self.horizon
            )));
        }
        if self.steps == 0 {
            return Err(config("steps: must be at least 1"));
        }
        if !(self.h_exponent > 0.0) || !self.h_exponent.is_finite() {
            return Err(config(format!(
                "h_exponent: must be positive, got {}",
                self.h_exponent
            )));
        }
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(config(format!(
                "L: exit radius must be positive, got {}",
                self.l
            )));
        }
        if self.r() >= 1.0 {
            log::warn!(
                "R = sqrt(eps) h(eps) = {:.4} >= 1 at eps = {}: the exit domain does not shrink",
                self.r(),
                self.epsilon
            );
        }
        Ok(())
    }

    /// `h(ε)`.
    pub fn h(&self) -> f64 {
        moderate_scale(self.epsilon, self.h_exponent)
    }

    /// `R = √ε h(ε)`, the physical exit radius per unit `L`.
    pub fn r(&self) -> f64 {
        self.epsilon.sqrt() * self.h()
    }

    /// Time step `T / steps`.
    pub fn h_step(&self) -> f64 {
        self.horizon / self.steps as f64
    }
}

/// `⌈T · steps_per_unit⌉`, at least 1.
pub fn steps_for(horizon: f64, steps_per_unit: usize) -> usize {
    ((horizon * steps_per_unit as f64).ceil() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutcome {
    pub exited: bool,
    /// Step index `k + 1` at which `‖η̃‖ ≥ L` was first observed.
    pub exit_step: Option<usize>,
    /// `log(dP/dP^ε)` accumulated up to exit or the horizon.
    pub log_weight: f64,
    /// `exp(log_weight)` on exit, 0 otherwise.
    pub estimator_value: f64,
    /// The state stopped being finite; counted as a non-exit.
    pub error: bool,
    pub final_eta: Option<Vec<f64>>,
    /// `η̃` at every step, starting from step 0.
    pub path: Option<Vec<Vec<f64>>>,
}

/// Per-thread buffers for [`Simulator`].
#[derive(Debug, Clone)]
pub struct Workspace {
    theta: Vec<f64>,
    eta: Vec<f64>,
    f: Vec<f64>,
    u: Vec<f64>,
    w: Vec<f64>,
    transform: Option<TransformWorkspace>,
    noise: NoiseSource,
}

/// A fully specified sampler: dynamics, change of measure and step data.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SolverConfig,
    policy: ControlPolicy,
    nonlinearity: Option<Nonlinearity>,
    eigenvalues: Vec<f64>,
    theta0: Vec<f64>,
    decay: Vec<f64>,
    drift_gain: Vec<f64>,
    noise_sd: Vec<f64>,
    h: f64,
    scale: f64,
}

impl Simulator {
    /// Simulator for `model` started at its stable equilibrium.
    pub fn new(
        model: &ModelSpec,
        basis: &SpectralBasis,
        policy: &ControlPolicy,
        config: &SolverConfig,
    ) -> Result<Self> {
        let eq = equilibrium(model, basis)?;
        let nl = Nonlinearity::for_basis(model, basis)?;
        Self::build(
            basis.lap_eigenvalues().to_vec(),
            eq.coeffs,
            Some(nl),
            policy,
            config,
        )
    }

    /// Linear system `dΘ_j = −a_j Θ_j dt + √ε dW_j` started at `theta0`.
    pub fn linear(
        eigenvalues: Vec<f64>,
        theta0: Vec<f64>,
        policy: &ControlPolicy,
        config: &SolverConfig,
    ) -> Result<Self> {
        Self::build(eigenvalues, theta0, None, policy, config)
    }

    fn build(
        eigenvalues: Vec<f64>,
        theta0: Vec<f64>,
        nonlinearity: Option<Nonlinearity>,
        policy: &ControlPolicy,
        config: &SolverConfig,
    ) -> Result<Self> {
        config.validate()?;
        if eigenvalues.is_empty() || eigenvalues.len() != theta0.len() {
            return Err(config_err(format!(
                "{} eigenvalues for a state of dimension {}",
                eigenvalues.len(),
                theta0.len()
            )));
        }
        if eigenvalues.iter().any(|&a| !(a >= 0.0)) {
            return Err(config_err("Laplacian eigenvalues must be nonnegative"));
        }
        if (policy.l() - config.l).abs() > 1e-12 * config.l {
            return Err(config_err(format!(
                "L: control radius {} differs from exit radius {}",
                policy.l(),
                config.l
            )));
        }
        let hs = config.h_step();
        let sqrt_eps = config.epsilon.sqrt();
        let mut decay = Vec::with_capacity(eigenvalues.len());
        let mut drift_gain = Vec::with_capacity(eigenvalues.len());
        let mut noise_sd = Vec::with_capacity(eigenvalues.len());
        for &a in &eigenvalues {
            if a > 0.0 {
                let e = (-a * hs).exp();
                decay.push(e);
                drift_gain.push(-(-a * hs).exp_m1() / a);
                noise_sd.push(sqrt_eps * (-(-2.0 * a * hs).exp_m1() / (2.0 * a)).sqrt());
            } else {
                decay.push(1.0);
                drift_gain.push(hs);
                noise_sd.push(sqrt_eps * hs.sqrt());
            }
        }
        let h = config.h();
        Ok(Self {
            config: config.clone(),
            policy: policy.clone(),
            nonlinearity,
            eigenvalues,
            theta0,
            decay,
            drift_gain,
            noise_sd,
            h,
            scale: sqrt_eps * h,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn policy(&self) -> &ControlPolicy {
        &self.policy
    }

    pub fn dim(&self) -> usize {
        self.theta0.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn theta0(&self) -> &[f64] {
        &self.theta0
    }

    /// `h(ε)`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn workspace(&self) -> Workspace {
        let n = self.dim();
        Workspace {
            theta: self.theta0.clone(),
            eta: vec![0.0; n],
            f: vec![0.0; n],
            u: vec![0.0; n],
            w: vec![0.0; n],
            transform: self.nonlinearity.as_ref().map(|nl| nl.workspace()),
            noise: NoiseSource::new(self.config.seed, 0, n),
        }
    }

    /// `η̃ = (Θ − Θ₀)/(√ε h)` into `eta`; returns `‖η̃‖²`.
    #[inline]
    fn eta_of(&self, theta: &[f64], eta: &mut [f64]) -> f64 {
        let inv = self.scale.recip();
        let mut sq = 0.0;
        for ((e, t), t0) in eta.iter_mut().zip(theta).zip(&self.theta0) {
            *e = (t - t0) * inv;
            sq += *e * *e;
        }
        sq
    }

    /// Advances `theta` by one step driven by the normals `w`; returns the
    /// log-weight increment. `eta` must hold `η̃` of the incoming state.
    fn advance(
        &self,
        theta: &mut [f64],
        eta: &[f64],
        w: &[f64],
        f: &mut [f64],
        u: &mut [f64],
        tws: Option<&mut TransformWorkspace>,
    ) -> f64 {
        match (&self.nonlinearity, tws) {
            (Some(nl), Some(tws)) => nl.eval(theta, f, tws),
            _ => f.fill(0.0),
        }
        let controlled = !self.policy.is_none();
        let mut incr = 0.0;
        if controlled {
            self.policy.control_eval_into(eta, self.h, u);
            let sqrt_hs = self.config.h_step().sqrt();
            let mut cross = 0.0;
            let mut sq = 0.0;
            for (uj, wj) in u.iter().zip(w) {
                cross += uj * wj;
                sq += uj * uj;
            }
            incr = -self.h * sqrt_hs * cross - 0.5 * self.h * self.h * sq * self.config.h_step();
        }
        let push = self.scale;
        for j in 0..theta.len() {
            let forcing = if controlled { f[j] + push * u[j] } else { f[j] };
            theta[j] =
                self.decay[j] * theta[j] + self.drift_gain[j] * forcing + self.noise_sd[j] * w[j];
        }
        incr
    }

    /// One scheme step from `theta` with normals `w`: returns `(Θ_{k+1}, Δ log weight)`.
    pub fn step(&self, theta: &[f64], w: &[f64], ws: &mut Workspace) -> Result<(Vec<f64>, f64)> {
        if theta.len() != self.dim() || w.len() != self.dim() {
            return Err(config_err("state and noise must match the Galerkin level"));
        }
        let mut next = theta.to_vec();
        self.eta_of(theta, &mut ws.eta);
        let incr = self.advance(
            &mut next,
            &ws.eta,
            w,
            &mut ws.f,
            &mut ws.u,
            ws.transform.as_mut(),
        );
        if next.iter().any(|x| !x.is_finite()) {
            return Err(crate::Error::Trajectory { step: 1 });
        }
        Ok((next, incr))
    }

    /// Simulates trajectory `index` with its own noise streams.
    pub fn run_trajectory(&self, index: u64, ws: &mut Workspace) -> TrajectoryOutcome {
        let mut noise = std::mem::replace(&mut ws.noise, NoiseSource::new(0, 0, 0));
        noise.reset(index);
        let out = self.run_with_noise(ws, |w| noise.fill(w), true);
        ws.noise = noise;
        out
    }

    /// `log(dP/dP^ε)` over the whole horizon with the exit test disabled.
    pub fn full_horizon_log_weight(&self, index: u64, ws: &mut Workspace) -> f64 {
        let mut noise = std::mem::replace(&mut ws.noise, NoiseSource::new(0, 0, 0));
        noise.reset(index);
        let out = self.run_with_noise(ws, |w| noise.fill(w), false);
        ws.noise = noise;
        out.log_weight
    }

    /// Simulates with normals supplied by `noise`, one call per step.
    pub fn run_with_noise(
        &self,
        ws: &mut Workspace,
        mut noise: impl FnMut(&mut [f64]),
        stop_at_exit: bool,
    ) -> TrajectoryOutcome {
        let l2 = self.config.l * self.config.l;
        ws.theta.copy_from_slice(&self.theta0);
        ws.eta.fill(0.0);
        let mut path = self.config.record_path.then(|| vec![ws.eta.clone()]);
        let mut log_weight = 0.0;
        for k in 0..self.config.steps {
            noise(&mut ws.w);
            log_weight += self.advance(
                &mut ws.theta,
                &ws.eta,
                &ws.w,
                &mut ws.f,
                &mut ws.u,
                ws.transform.as_mut(),
            );
            let sq = self.eta_of(&ws.theta, &mut ws.eta);
            if let Some(p) = path.as_mut() {
                p.push(ws.eta.clone());
            }
            if !sq.is_finite() || !log_weight.is_finite() {
                log::debug!("trajectory became non-finite at step {}", k + 1);
                return TrajectoryOutcome {
                    exited: false,
                    exit_step: None,
                    log_weight: f64::NEG_INFINITY,
                    estimator_value: 0.0,
                    error: true,
                    final_eta: None,
                    path,
                };
            }
            if stop_at_exit && sq >= l2 {
                return TrajectoryOutcome {
                    exited: true,
                    exit_step: Some(k + 1),
                    log_weight,
                    estimator_value: log_weight.exp(),
                    error: false,
                    final_eta: Some(ws.eta.clone()),
                    path,
                };
            }
        }
        TrajectoryOutcome {
            exited: false,
            exit_step: None,
            log_weight,
            estimator_value: 0.0,
            error: false,
            final_eta: Some(ws.eta.clone()),
            path,
        }
    }
}

fn config_err(msg: impl Into<String>) -> crate::Error {
    config(msg)
}

/// Renders a recorded path as `step,t,norm_eta,mode1,...,modeK`.
pub fn path_csv(path: &[Vec<f64>], h_step: f64, modes: usize) -> String {
    let mut out = String::from("step,t,norm_eta");
    for j in 1..=modes {
        out.push_str(&format!(",mode{j}"));
    }
    out.push('\n');
    for (k, eta) in path.iter().enumerate() {
        let norm = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.push_str(&format!("{k},{:.6e},{:.6e}", k as f64 * h_step, norm));
        for x in eta.iter().take(modes) {
            out.push_str(&format!(",{x:.6e}"));
        }
        out.push('\n');
    }
    out
}
