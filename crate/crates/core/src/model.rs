//! Reaction terms, stable equilibria and the Galerkin nonlinearity.

use std::fmt;

use crate::error::{config, Result};
use crate::spectral::{
    dirichlet_project, BoundaryCondition, DirichletShape, SpectralBasis, DEFAULT_QUADRATURE_FACTOR,
};
use crate::transform::{SpectralTransform, TransformWorkspace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// `f(x) = x − x³`.
    AllenCahn,
    /// `f(x) = x + μx³ − (μ + 1)x⁵` with `μ ∈ (−1, 0]`.
    Quintic { mu: f64 },
}

/// Which of the two stable equilibria `x*±` the process starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    kind: ModelKind,
    bc: BoundaryCondition,
    ell: f64,
    sign: Sign,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, bc: BoundaryCondition, ell: f64, sign: Sign) -> Result<Self> {
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(config(format!(
                "ell: domain length must be positive, got {ell}"
            )));
        }
        match kind {
            ModelKind::Quintic { mu } => {
                if !(mu > -1.0 && mu <= 0.0) {
                    return Err(config(format!("mu: must lie in (-1, 0], got {mu}")));
                }
                if bc == BoundaryCondition::Dirichlet {
                    return Err(config(
                        "bc: the quintic model is only supported with Neumann or periodic conditions",
                    ));
                }
            }
            ModelKind::AllenCahn => {
                if bc == BoundaryCondition::Dirichlet && ell <= std::f64::consts::PI {
                    return Err(config(format!(
                        "ell: Dirichlet Allen-Cahn needs ell > pi for a nonzero equilibrium, got {ell}"
                    )));
                }
            }
        }
        Ok(Self {
            kind,
            bc,
            ell,
            sign,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// Polynomial growth exponent of the reaction term.
    pub fn growth_exponent(&self) -> u32 {
        match self.kind {
            ModelKind::AllenCahn => 3,
            ModelKind::Quintic { .. } => 5,
        }
    }

    /// Pointwise reaction `f(x)`.
    #[inline]
    pub fn reaction(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::AllenCahn => x - x * x * x,
            ModelKind::Quintic { mu } => {
                let x2 = x * x;
                x * (1.0 + x2 * (mu - (mu + 1.0) * x2))
            }
        }
    }

    /// `−f'(±1)`, the shift between the Laplacian and linearized spectra
    /// about a constant equilibrium.
    pub(crate) fn linearization_shift(&self) -> f64 {
        match self.kind {
            ModelKind::AllenCahn => 2.0,
            ModelKind::Quintic { mu } => 2.0 * mu + 4.0,
        }
    }
}

/// Pointwise `f(x)` for `model`.
pub fn reaction(model: &ModelSpec, x: f64) -> f64 {
    model.reaction(x)
}

/// A stable equilibrium in Galerkin coordinates and on the physical grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub coeffs: Vec<f64>,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Quadrature L² norm of the exact profile.
    pub l2_norm: f64,
}

/// The stable equilibrium selected by `model.sign()`.
pub fn equilibrium(model: &ModelSpec, basis: &SpectralBasis) -> Result<Equilibrium> {
    if model.bc() != basis.bc() || (model.ell() - basis.ell()).abs() > 1e-12 * basis.ell() {
        return Err(config(
            "model and basis disagree on boundary condition or length",
        ));
    }
    let n = basis.len();
    let s = model.sign().value();
    let transform = SpectralTransform::for_basis(basis)?;
    let grid = transform.grid_points();
    match model.bc() {
        BoundaryCondition::Neumann | BoundaryCondition::Periodic => {
            let mut coeffs = vec![0.0; n];
            coeffs[0] = s * model.ell().sqrt();
            Ok(Equilibrium {
                coeffs,
                values: vec![s; grid.len()],
                grid,
                l2_norm: model.ell().sqrt(),
            })
        }
        BoundaryCondition::Dirichlet => {
            let shape = DirichletShape::new(model.ell())?;
            let profile = |xi: f64| s * shape.a * shape.triple(xi).sn;
            let q = DEFAULT_QUADRATURE_FACTOR * n;
            let coeffs = dirichlet_project(&profile, basis, q)?.coeffs;
            let h = model.ell() / q as f64;
            let l2 = ((1..q).map(|i| profile(i as f64 * h).powi(2)).sum::<f64>() * h).sqrt();
            Ok(Equilibrium {
                coeffs,
                values: grid.iter().map(|&x| profile(x)).collect(),
                grid,
                l2_norm: l2,
            })
        }
    }
}

/// Galerkin nonlinearity `⟨F(Σ_j θ_j e_j), e_k⟩` for `k < N` by pseudo-spectral
/// evaluation on the transform grid.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    model: ModelSpec,
    transform: SpectralTransform,
}

impl Nonlinearity {
    pub fn new(model: ModelSpec, transform: SpectralTransform) -> Result<Self> {
        if model.bc() != transform.bc() {
            return Err(config("model and transform disagree on boundary condition"));
        }
        Ok(Self { model, transform })
    }

    pub fn for_basis(model: &ModelSpec, basis: &SpectralBasis) -> Result<Self> {
        Self::new(*model, SpectralTransform::for_basis(basis)?)
    }

    pub fn modes(&self) -> usize {
        self.transform.modes()
    }

    pub fn transform(&self) -> &SpectralTransform {
        &self.transform
    }

    pub fn workspace(&self) -> TransformWorkspace {
        self.transform.workspace()
    }

    pub fn eval(&self, coeffs: &[f64], out: &mut [f64], ws: &mut TransformWorkspace) {
        let model = self.model;
        self.transform
            .apply_pointwise(coeffs, out, ws, move |x| model.reaction(x));
    }
}

/// One-shot form of [`Nonlinearity::eval`].
pub fn nonlinearity_in_modes(
    model: &ModelSpec,
    basis: &SpectralBasis,
    state_coeffs: &[f64],
) -> Result<Vec<f64>> {
    if state_coeffs.len() != basis.len() {
        return Err(config(format!(
            "state has {} coefficients, basis has {}",
            state_coeffs.len(),
            basis.len()
        )));
    }
    let nl = Nonlinearity::for_basis(model, basis)?;
    let mut ws = nl.workspace();
    let mut out = vec![0.0; basis.len()];
    nl.eval(state_coeffs, &mut out, &mut ws);
    Ok(out)
}
