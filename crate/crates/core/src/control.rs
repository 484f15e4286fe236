//! Changes of measure: the quasipotential control along the leading `k₀`
//! linearized modes and its exponentially mollified version.
//!
//! With `p_i = ⟨η, e_i^f⟩`, the mollified subsolution is the soft minimum
//!
//! ```text
//! U^δ(η) = −δ log(e^{−F₁/δ} + e^{−F₂/δ}),  F₁ = a₁(L² − p₁²),  F₂ = a₁(L² − h^{−2κ})
//! ```
//!
//! with `δ = 2/h²`, and the control is `u = −D_η U^δ = 2 a₁ ρ p₁ e₁^f`.

use std::fmt;

use crate::error::{config, Result};
use crate::spectral::{check_spectral_gap, SpectralBasis};

/// Moderate-deviation scale `h(ε) = ε^{−ρ_h}`.
pub fn moderate_scale(epsilon: f64, h_exponent: f64) -> f64 {
    epsilon.powf(-h_exponent)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlKind {
    /// Standard Monte Carlo.
    None,
    /// Gradient of the quasipotential subsolution on the first `k0` modes.
    Asymptotic { k0: usize },
    /// Exponentially mollified control along `e₁^f`.
    Mollified,
}

impl fmt::Display for ControlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlKind::None => f.write_str("none"),
            ControlKind::Asymptotic { k0 } => write!(f, "asymptotic(k0={k0})"),
            ControlKind::Mollified => f.write_str("mollified"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlPolicy {
    kind: ControlKind,
    l: f64,
    kappa: f64,
    eigenvalues: Vec<f64>,
    /// Linearized eigenvectors in Laplacian coordinates, one per forced mode.
    eigenvectors: Vec<Vec<f64>>,
}

impl ControlPolicy {
    /// Policy on the linearized spectrum stored in `basis`.
    ///
    /// Mollified control requires the strong spectral gap; `Asymptotic(k0)`
    /// requires the weak gap with index at most `k0`.
    pub fn new(kind: ControlKind, l: f64, kappa: f64, basis: &SpectralBasis) -> Result<Self> {
        let gap = check_spectral_gap(basis.lin_eigenvalues());
        match kind {
            ControlKind::Mollified if !gap.strong => {
                return Err(config(format!(
                    "control: mollified control needs the strong spectral gap 3a1 < a2 ({:?})",
                    &basis.lin_eigenvalues()[..basis.k_lin().min(2)]
                )));
            }
            ControlKind::Asymptotic { k0 } => match gap.weak_k0 {
                Some(w) if w <= k0 => {}
                _ => {
                    return Err(config(format!(
                        "k0: asymptotic control with k0 = {k0} does not satisfy the weak gap \
                         (smallest admissible k0: {:?})",
                        gap.weak_k0
                    )));
                }
            },
            _ => {}
        }
        let forced = Self::forced_modes(kind);
        if forced > basis.k_lin() {
            return Err(config(format!(
                "k0: only {} linearized modes are available",
                basis.k_lin()
            )));
        }
        Self::from_modes(
            kind,
            l,
            kappa,
            basis.lin_eigenvalues()[..forced].to_vec(),
            basis.lin_eigenvectors()[..forced].to_vec(),
        )
    }

    /// Policy on explicitly supplied eigenpairs; no spectral-gap check.
    pub fn from_modes(
        kind: ControlKind,
        l: f64,
        kappa: f64,
        eigenvalues: Vec<f64>,
        eigenvectors: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(config(format!("L: exit radius must be positive, got {l}")));
        }
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(config(format!("kappa: must lie in (0, 1), got {kappa}")));
        }
        if let ControlKind::Asymptotic { k0 } = kind {
            if k0 == 0 {
                return Err(config("k0: must be at least 1"));
            }
        }
        let forced = Self::forced_modes(kind);
        if eigenvalues.len() < forced || eigenvectors.len() < forced {
            return Err(config(format!("control needs {forced} eigenpairs")));
        }
        if eigenvalues[..forced].iter().any(|&a| !(a > 0.0)) {
            return Err(config("linearized eigenvalues must be positive"));
        }
        Ok(Self {
            kind,
            l,
            kappa,
            eigenvalues: eigenvalues[..forced].to_vec(),
            eigenvectors: eigenvectors[..forced].to_vec(),
        })
    }

    /// Uncontrolled sampling.
    pub fn none(l: f64) -> Result<Self> {
        Self::from_modes(ControlKind::None, l, 0.5, Vec::new(), Vec::new())
    }

    fn forced_modes(kind: ControlKind) -> usize {
        match kind {
            ControlKind::None => 0,
            ControlKind::Asymptotic { k0 } => k0,
            ControlKind::Mollified => 1,
        }
    }

    pub fn kind(&self) -> ControlKind {
        self.kind
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_none(&self) -> bool {
        self.kind == ControlKind::None
    }

    /// `⟨η, e_i^f⟩` for the `i`-th forced mode.
    #[inline]
    fn project(&self, i: usize, eta: &[f64]) -> f64 {
        self.eigenvectors[i]
            .iter()
            .zip(eta)
            .map(|(v, x)| v * x)
            .sum()
    }

    /// `(F₁ − F₂)/δ` for projection `p₁` at scale `h`.
    #[inline]
    fn scaled_gap(&self, p1: f64, h: f64) -> f64 {
        let a1 = self.eigenvalues[0];
        0.5 * a1 * h * h * (h.powf(-2.0 * self.kappa) - p1 * p1)
    }

    /// `F₁(η)`, `F₂^ε` and `δ` of the mollified subsolution.
    pub fn mollifier_terms(&self, eta: &[f64], h: f64) -> (f64, f64, f64) {
        let a1 = self.eigenvalues.first().copied().unwrap_or(0.0);
        let p1 = if self.eigenvectors.is_empty() {
            0.0
        } else {
            self.project(0, eta)
        };
        let l2 = self.l * self.l;
        (
            a1 * (l2 - p1 * p1),
            a1 * (l2 - h.powf(-2.0 * self.kappa)),
            2.0 / (h * h),
        )
    }

    fn rho_from_projection(&self, p1: f64, h: f64) -> f64 {
        let x = self.scaled_gap(p1, h);
        // 1/(1 + e^x) without overflow for either sign of x.
        let rho = if x > 0.0 {
            let e = (-x).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + x.exp())
        };
        rho.clamp(0.0, 1.0)
    }

    /// Mollification weight `ρ^ε(η) = 1/(1 + e^{(F₁ − F₂)/δ})`.
    ///
    /// Only meaningful for the mollified policy; returns 0 for policies
    /// without a leading mode.
    pub fn rho_eps(&self, eta: &[f64], h: f64) -> f64 {
        if self.eigenvectors.is_empty() {
            return 0.0;
        }
        self.rho_from_projection(self.project(0, eta), h)
    }

    /// Control `u(η)` in Laplacian coordinates written into `out`.
    pub fn control_eval_into(&self, eta: &[f64], h: f64, out: &mut [f64]) {
        out.fill(0.0);
        match self.kind {
            ControlKind::None => {}
            ControlKind::Asymptotic { k0 } => {
                for i in 0..k0 {
                    let w = 2.0 * self.eigenvalues[i] * self.project(i, eta);
                    axpy(w, &self.eigenvectors[i], out);
                }
            }
            ControlKind::Mollified => {
                let p1 = self.project(0, eta);
                let w = 2.0 * self.eigenvalues[0] * self.rho_from_projection(p1, h) * p1;
                axpy(w, &self.eigenvectors[0], out);
            }
        }
    }

    pub fn control_eval(&self, eta: &[f64], h: f64) -> Vec<f64> {
        let mut out = vec![0.0; eta.len()];
        self.control_eval_into(eta, h, &mut out);
        out
    }

    /// Subsolution `U` whose negative gradient is the control.
    pub fn subsolution_value(&self, eta: &[f64], h: f64) -> f64 {
        let l2 = self.l * self.l;
        match self.kind {
            ControlKind::None => 0.0,
            ControlKind::Asymptotic { k0 } => {
                let v: f64 = (0..k0)
                    .map(|i| self.eigenvalues[i] * self.project(i, eta).powi(2))
                    .sum();
                self.eigenvalues[0] * l2 - v
            }
            ControlKind::Mollified => {
                let (f1, f2, delta) = self.mollifier_terms(eta, h);
                // −δ log(e^{−F₁/δ} + e^{−F₂/δ}) = min − δ log(1 + e^{−|F₁−F₂|/δ}).
                f1.min(f2) - delta * (-(f1 - f2).abs() / delta).exp().ln_1p()
            }
        }
    }
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
