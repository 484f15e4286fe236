//! Closed-form pieces of the limiting variational problem on the linearized
//! eigenbasis: minimizers, λ-weights, exit directions and decay rates.
//!
//! Indices of linearized modes are one-based here, as in the exit-direction
//! results they report.

use crate::error::{domain, Result};

/// Tolerance within which λ-weights count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Minimizing path `y_k(t) = z_k sinh(a_k t)/sinh(a_k τ)` from 0 to `z` in time `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerPath {
    z: Vec<f64>,
    tau: f64,
    spectrum: Vec<f64>,
}

impl MinimizerPath {
    pub fn new(z: Vec<f64>, tau: f64, spectrum: Vec<f64>) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(domain(
                "minimizer",
                format!("hitting time {tau} must be positive"),
            ));
        }
        if z.len() > spectrum.len() {
            return Err(domain(
                "minimizer",
                format!(
                    "{} endpoint coordinates for {} eigenvalues",
                    z.len(),
                    spectrum.len()
                ),
            ));
        }
        if spectrum[..z.len()].iter().any(|&a| !(a > 0.0)) {
            return Err(domain(
                "minimizer",
                "linearized eigenvalues must be positive",
            ));
        }
        Ok(Self { z, tau, spectrum })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// `‖z‖`, the exit radius the path reaches.
    pub fn radius(&self) -> f64 {
        self.z.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// `sinh(a t)/sinh(a τ)` without overflow.
fn sinh_ratio(a: f64, t: f64, tau: f64) -> f64 {
    (a * (t - tau)).exp() * (-(-2.0 * a * t).exp_m1()) / (-(-2.0 * a * tau).exp_m1())
}

/// The minimizer at time `t ∈ [0, τ]`.
pub fn minimizer_eval(path: &MinimizerPath, t: f64) -> Result<Vec<f64>> {
    if !(0.0..=path.tau).contains(&t) {
        return Err(domain(
            "minimizer_eval",
            format!("time {t} outside [0, {}]", path.tau),
        ));
    }
    if t == path.tau {
        return Ok(path.z.clone());
    }
    Ok(path
        .z
        .iter()
        .zip(&path.spectrum)
        .map(|(z, &a)| z * sinh_ratio(a, t, path.tau))
        .collect())
}

/// `λ_{k0,j}(τ) = a_j [j ≤ k0] + a_j/(1 − e^{−2 a_j τ})` for every mode.
pub fn lambda_weights(spectrum: &[f64], k0: usize, tau: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(domain(
            "lambda_weights",
            format!("time {tau} must be positive"),
        ));
    }
    Ok(spectrum
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let boundary = if i < k0 { a } else { 0.0 };
            boundary + a / (-(-2.0 * a * tau).exp_m1())
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitDirection {
    /// Smallest one-based index attaining the minimum.
    pub index: usize,
    /// All one-based indices whose λ is within [`TIE_TOL`] of the minimum.
    pub tied: Vec<usize>,
    /// Minimal value `L² λ_{k0, j*}(T)`.
    pub value: f64,
}

/// Direction of the cheapest exit by time `T` (hitting time `τ = T`).
pub fn exit_direction(spectrum: &[f64], k0: usize, horizon: f64, l: f64) -> Result<ExitDirection> {
    let lambda = lambda_weights(spectrum, k0, horizon)?;
    let (best, min) =
        lambda.iter().enumerate().fold(
            (0, f64::INFINITY),
            |(bi, bv), (i, &v)| {
                if v < bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            },
        );
    if !min.is_finite() {
        return Err(domain("exit_direction", "empty spectrum"));
    }
    let tied = lambda
        .iter()
        .enumerate()
        .filter(|(_, &v)| v - min <= TIE_TOL * min.abs().max(1.0))
        .map(|(i, _)| i + 1)
        .collect();
    Ok(ExitDirection {
        index: best + 1,
        tied,
        value: l * l * min,
    })
}

/// Crossover horizon `T* = −ln(1 − a₂/(2a₁))/(2a₂)` beyond which minimizers
/// exit along `e₂^f` when `a₂ ≤ 2a₁`.
///
/// Returns `+∞` at `a₂ = 2a₁`.
pub fn t_star(a1: f64, a2: f64) -> Result<f64> {
    if !(a1 > 0.0) || !(a2 > 0.0) {
        return Err(domain(
            "t_star",
            format!("eigenvalues ({a1}, {a2}) must be positive"),
        ));
    }
    if a2 > 2.0 * a1 {
        return Err(domain(
            "t_star",
            format!("a2 = {a2} exceeds 2 a1 = {}: no crossover", 2.0 * a1),
        ));
    }
    if a2 == 2.0 * a1 {
        return Ok(f64::INFINITY);
    }
    Ok(-(-a2 / (2.0 * a1)).ln_1p() / (2.0 * a2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    /// `G_T = a₁L²/(1 − e^{−2a₁T})`.
    pub g_t: f64,
    /// `U(0) = a₁L²`.
    pub u0: f64,
    /// Decay rate of the scheme's second moment, `U(0) + G_T`.
    pub scheme: f64,
    /// Best achievable rate `2 G_T`.
    pub optimal: f64,
}

pub fn decay_rates(a1: f64, l: f64, horizon: f64) -> Result<DecayRates> {
    if !(a1 > 0.0 && l > 0.0 && horizon > 0.0) {
        return Err(domain(
            "decay_rates",
            format!("a1 = {a1}, L = {l}, T = {horizon} must all be positive"),
        ));
    }
    let u0 = a1 * l * l;
    let g_t = u0 / (-(-2.0 * a1 * horizon).exp_m1());
    Ok(DecayRates {
        g_t,
        u0,
        scheme: u0 + g_t,
        optimal: 2.0 * g_t,
    })
}

/// Midpoint discretization of `½∫ Σ_{k ≤ k_modes} (φ̇_k + a_k φ_k)² dt` for
/// samples `φ(i·dt)` on the linearized eigenbasis.
pub fn action_functional(
    samples: &[Vec<f64>],
    dt: f64,
    spectrum: &[f64],
    k_modes: usize,
) -> Result<f64> {
    if samples.len() < 3 {
        return Err(domain(
            "action_functional",
            format!("need at least 3 time samples, got {}", samples.len()),
        ));
    }
    if !(dt > 0.0) {
        return Err(domain(
            "action_functional",
            format!("time step {dt} must be positive"),
        ));
    }
    let k = k_modes.min(spectrum.len());
    let mut total = 0.0;
    for w in samples.windows(2) {
        for j in 0..k.min(w[0].len()) {
            let rate = (w[1][j] - w[0][j]) / dt;
            let mid = 0.5 * (w[1][j] + w[0][j]);
            total += (rate + spectrum[j] * mid).powi(2);
        }
    }
    Ok(0.5 * total * dt)
}

/// `V(η) = Σ_k a_k ⟨η, e_k^f⟩²` for coordinates already on the linearized basis.
pub fn quasipotential(spectrum: &[f64], eta_coeffs: &[f64]) -> f64 {
    spectrum
        .iter()
        .zip(eta_coeffs)
        .map(|(a, c)| a * c * c)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn neumann_ac(ell: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| 2.0 + (j as f64 * PI / ell).powi(2))
            .collect()
    }

    fn sampled(path: &MinimizerPath, n: usize) -> Vec<Vec<f64>> {
        (0..=n)
            .map(|i| minimizer_eval(path, path.tau() * i as f64 / n as f64).unwrap())
            .collect()
    }

    #[test]
    fn minimizer_endpoints_and_midpoint() {
        let p = MinimizerPath::new(vec![1.0], 1.0, vec![2.0]).unwrap();
        assert_eq!(minimizer_eval(&p, 0.0).unwrap(), vec![0.0]);
        assert_eq!(minimizer_eval(&p, 1.0).unwrap(), vec![1.0]);
        let mid = minimizer_eval(&p, 0.5).unwrap()[0];
        assert!((mid - 1f64.sinh() / 2f64.sinh()).abs() < 1e-15);
        assert!((mid - 0.32403).abs() < 1e-5);
        assert!(minimizer_eval(&p, 1.5).is_err());
        assert!(minimizer_eval(&p, -0.1).is_err());
    }

    #[test]
    fn minimizer_does_not_overflow() {
        let p = MinimizerPath::new(vec![1.0], 500.0, vec![3.0]).unwrap();
        let v = minimizer_eval(&p, 499.0).unwrap()[0];
        assert!((v - (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn lambda_values() {
        let l = lambda_weights(&[2.0, 2.0 + PI * PI], 1, 1.0).unwrap();
        assert!((l[0] - 2.0 * (1.0 + 1.0 / (1.0 - (-4.0f64).exp()))).abs() < 1e-14);
        assert!((l[0] - 4.0373).abs() < 1e-4);
        let far = lambda_weights(&[2.0], 1, 100.0).unwrap();
        assert!((far[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn exit_directions() {
        let strong = neumann_ac(1.0, 10);
        for t in [0.1, 0.5, 1.0, 2.0, 10.0] {
            assert_eq!(exit_direction(&strong, 1, t, 1.0).unwrap().index, 1);
        }
        let weak = [2.0, 3.0, 6.0];
        assert_eq!(exit_direction(&weak, 1, 0.5, 1.0).unwrap().index, 2);
        let kprop = neumann_ac(4.0 * PI / 3.0, 10);
        assert_eq!(exit_direction(&kprop, 3, 2.0, 1.0).unwrap().index, 1);
    }

    #[test]
    fn periodic_pairs_tie() {
        let spectrum = [2.0, 2.0 + 4.0 * PI * PI, 2.0 + 4.0 * PI * PI];
        let d = exit_direction(&spectrum, 0, 1.0, 1.0).unwrap();
        assert_eq!(d.index, 1);
        let d = exit_direction(&spectrum[1..], 0, 1.0, 1.0).unwrap();
        assert_eq!(d.tied, vec![1, 2]);
    }

    #[test]
    fn crossover_time() {
        let t = t_star(2.0, 3.0).unwrap();
        assert!((t - 4f64.ln() / 6.0).abs() < 1e-15);
        assert!((t - 0.23105).abs() < 1e-5);
        let t = t_star(2.0, 2.1).unwrap();
        assert!((t - -(0.475f64).ln() / 4.2).abs() < 1e-15);
        assert!((t - 0.1772).abs() < 1e-4);
        assert_eq!(t_star(2.0, 4.0).unwrap(), f64::INFINITY);
        assert!(t_star(2.0, 4.5).is_err());
    }

    #[test]
    fn decay_rate_values() {
        let d = decay_rates(2.0, 1.0, 1.0).unwrap();
        assert!((d.g_t - 2.0373).abs() < 1e-4);
        let d = decay_rates(2.0, 1.0, 8.0).unwrap();
        assert!((d.scheme - 4.0).abs() < 1e-12);
        let d = decay_rates(2.0, 1.0, 60.0).unwrap();
        assert!((d.g_t - d.u0).abs() < 1e-15);
        assert_eq!(d.scheme, d.optimal);
    }

    #[test]
    fn action_of_trivial_paths() {
        let zero = vec![vec![0.0]; 10];
        assert_eq!(action_functional(&zero, 0.1, &[2.0], 1).unwrap(), 0.0);
        assert!(action_functional(&zero[..2], 0.1, &[2.0], 1).is_err());
        let n = 2000;
        let dt = 1.0 / n as f64;
        let flow: Vec<Vec<f64>> = (0..=n)
            .map(|i| vec![0.7 * (-2.0 * i as f64 * dt).exp()])
            .collect();
        assert!(action_functional(&flow, dt, &[2.0], 1).unwrap() < 1e-6);
    }

    #[test]
    fn action_of_minimizer_converges_at_second_order() {
        let (a, z, tau): (f64, f64, f64) = (2.0, 0.8, 1.5);
        let exact = a * z * z / (-(-2.0 * a * tau).exp_m1());
        let p = MinimizerPath::new(vec![z], tau, vec![a]).unwrap();
        let err = |n: usize| {
            (action_functional(&sampled(&p, n), tau / n as f64, &[a], 1).unwrap() - exact).abs()
        };
        let (e1, e2) = (err(1000), err(10_000));
        assert!(e2 < 1e-6);
        let order = (e1 / e2).log10();
        assert!((order - 2.0).abs() < 0.1, "observed order {order}");
    }

    #[test]
    fn quasipotential_values() {
        let s = neumann_ac(1.0, 3);
        assert_eq!(quasipotential(&s, &[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(quasipotential(&s, &[1.0, 0.0, 0.0]), 2.0);
        assert!((quasipotential(&s, &[1.0, 1.0, 0.0]) - 13.8696).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn direction_is_scale_invariant(t in 0.05..10.0f64, l in 0.1..10.0f64) {
            let s = [2.0, 3.0, 9.0];
            prop_assert_eq!(
                exit_direction(&s, 1, t, 1.0).unwrap().index,
                exit_direction(&s, 1, t, l).unwrap().index
            );
        }

        #[test]
        fn lambda_decreases_in_time(a in 0.1..5.0f64, t in 0.01..3.0f64, dt in 0.01..1.0f64, k0 in 0usize..2) {
            let l1 = lambda_weights(&[a], k0, t).unwrap()[0];
            let l2 = lambda_weights(&[a], k0, t + dt).unwrap()[0];
            prop_assert!(l2 < l1);
        }

        #[test]
        fn decay_rate_ordering(a1 in 0.01..20.0f64, l in 0.1..3.0f64, t in 0.01..20.0f64) {
            let d = decay_rates(a1, l, t).unwrap();
            prop_assert!(d.u0 <= d.g_t);
            prop_assert!(d.u0 <= d.scheme && d.scheme <= d.optimal);
        }

        #[test]
        fn strong_gap_exits_along_first_mode(a1 in 0.1..5.0f64, extra in 0.01..10.0f64, tau in 0.05..10.0f64) {
            let a2 = 3.0 * a1 + extra;
            let l = lambda_weights(&[a1, a2, a2 + 1.0], 1, tau).unwrap();
            prop_assert!(l[0] < l[1] && l[0] < l[2]);
        }
    }
}
