//! Laplacian eigenpairs on `(0, ℓ)` and the spectrum of the linearization
//! `Δ + DF(x*)` about a stable equilibrium.
//!
//! Indices in this module are zero-based: index `0` is the first (lowest)
//! eigenpair. Linearized eigenvectors are stored as coefficient vectors in the
//! Laplacian basis truncated at the Galerkin level.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{config, Result};
use crate::model::{ModelKind, ModelSpec};
use crate::specfun::{inverse_m, jacobi_elliptic};

/// Default number of projection quadrature points per Galerkin mode.
pub const DEFAULT_QUADRATURE_FACTOR: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Neumann,
    Periodic,
    Dirichlet,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Neumann => "neumann",
            Self::Periodic => "periodic",
            Self::Dirichlet => "dirichlet",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" => Ok(Self::Neumann),
            "periodic" => Ok(Self::Periodic),
            "dirichlet" => Ok(Self::Dirichlet),
            other => Err(config(format!("unknown boundary condition '{other}'"))),
        }
    }
}

/// Periodic Fourier index `(n, sign)` of a zero-based mode index.
///
/// Degenerate pairs are ordered `+n` before `−n`.
pub(crate) fn periodic_wavenumber(index: usize) -> (usize, f64) {
    if index == 0 {
        (0, 1.0)
    } else if index % 2 == 1 {
        (index.div_ceil(2), 1.0)
    } else {
        (index / 2, -1.0)
    }
}

/// Laplacian eigenvalue of the zero-based mode `index`.
pub fn laplacian_eigenvalue(bc: BoundaryCondition, ell: f64, index: usize) -> f64 {
    match bc {
        BoundaryCondition::Neumann => (index as f64 * PI / ell).powi(2),
        BoundaryCondition::Dirichlet => ((index + 1) as f64 * PI / ell).powi(2),
        BoundaryCondition::Periodic => {
            let (n, _) = periodic_wavenumber(index);
            (2.0 * n as f64 * PI / ell).powi(2)
        }
    }
}

/// L²-normalized Laplacian eigenfunction of the zero-based mode `index` at `xi`.
pub fn laplacian_eigenfunction(bc: BoundaryCondition, ell: f64, index: usize, xi: f64) -> f64 {
    match bc {
        BoundaryCondition::Neumann => {
            if index == 0 {
                ell.powf(-0.5)
            } else {
                (2.0 / ell).sqrt() * (index as f64 * PI * xi / ell).cos()
            }
        }
        BoundaryCondition::Dirichlet => {
            (2.0 / ell).sqrt() * ((index + 1) as f64 * PI * xi / ell).sin()
        }
        BoundaryCondition::Periodic => {
            let (n, sign) = periodic_wavenumber(index);
            if n == 0 {
                ell.powf(-0.5)
            } else {
                let theta = 2.0 * n as f64 * PI * xi / ell;
                (theta.cos() + sign * theta.sin()) / ell.sqrt()
            }
        }
    }
}

/// Laplacian eigenpairs up to the Galerkin level, plus (once filled in by
/// [`linearized_spectrum`]) the leading eigenpairs of the linearized operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    bc: BoundaryCondition,
    ell: f64,
    lap_eigenvalues: Vec<f64>,
    lin_eigenvalues: Vec<f64>,
    lin_eigenvectors: Vec<Vec<f64>>,
}

impl SpectralBasis {
    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Galerkin level `N`.
    pub fn len(&self) -> usize {
        self.lap_eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lap_eigenvalues.is_empty()
    }

    pub fn lap_eigenvalues(&self) -> &[f64] {
        &self.lap_eigenvalues
    }

    pub fn lin_eigenvalues(&self) -> &[f64] {
        &self.lin_eigenvalues
    }

    pub fn lin_eigenvectors(&self) -> &[Vec<f64>] {
        &self.lin_eigenvectors
    }

    /// Number of linearized eigenpairs available.
    pub fn k_lin(&self) -> usize {
        self.lin_eigenvalues.len()
    }

    pub fn eigenfunction(&self, index: usize, xi: f64) -> f64 {
        laplacian_eigenfunction(self.bc, self.ell, index, xi)
    }

    /// `Σ_j coeffs[j] e_j(xi)`.
    pub fn synthesize_at(&self, coeffs: &[f64], xi: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.eigenfunction(j, xi))
            .sum()
    }
}

/// Laplacian eigenpairs for `bc` on `(0, ell)` truncated at level `n`.
pub fn laplacian_spectrum(bc: BoundaryCondition, ell: f64, n: usize) -> Result<SpectralBasis> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(config(format!("domain length must be positive, got {ell}")));
    }
    if n < 2 {
        return Err(config(format!(
            "Galerkin level must be at least 2, got {n}"
        )));
    }
    Ok(SpectralBasis {
        bc,
        ell,
        lap_eigenvalues: (0..n).map(|j| laplacian_eigenvalue(bc, ell, j)).collect(),
        lin_eigenvalues: Vec::new(),
        lin_eigenvectors: Vec::new(),
    })
}

fn unit_vector(n: usize, index: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[index] = 1.0;
    v
}

/// Fills in the linearized eigenpairs for `model` on `basis`.
///
/// Neumann and periodic equilibria are constant, so the linearized
/// eigenvectors are the Laplacian modes and the eigenvalues are shifted by
/// `−f'(x*)`. For Dirichlet Allen–Cahn only the first two pairs are known in
/// closed form; their eigenfunctions are projected onto the sine basis.
pub fn linearized_spectrum(model: &ModelSpec, basis: &SpectralBasis) -> Result<SpectralBasis> {
    if model.bc() != basis.bc || (model.ell() - basis.ell).abs() > 1e-12 * basis.ell {
        return Err(config(
            "model and basis disagree on boundary condition or length",
        ));
    }
    let n = basis.len();
    let mut out = basis.clone();
    match basis.bc {
        BoundaryCondition::Neumann | BoundaryCondition::Periodic => {
            let shift = model.linearization_shift();
            out.lin_eigenvalues = basis.lap_eigenvalues.iter().map(|a| a + shift).collect();
            out.lin_eigenvectors = (0..n).map(|j| unit_vector(n, j)).collect();
        }
        BoundaryCondition::Dirichlet => {
            if !matches!(model.kind(), ModelKind::AllenCahn) {
                return Err(config(
                    "linearized Dirichlet spectrum is only available for Allen-Cahn",
                ));
            }
            let shape = DirichletShape::new(basis.ell)?;
            let q = DEFAULT_QUADRATURE_FACTOR * n;
            let e1 = shape.normalized(q, |t| t.sn * t.dn)?;
            let e2 = shape.normalized(q, |t| t.sn * t.cn)?;
            let mut v1 = dirichlet_project(&e1, basis, q)?.coeffs;
            let mut v2 = dirichlet_project(&e2, basis, q)?.coeffs;
            normalize(&mut v1);
            normalize(&mut v2);
            let a2 = shape.a * shape.a;
            out.lin_eigenvalues = vec![1.5 * a2, 1.5 * (2.0 - a2)];
            out.lin_eigenvectors = vec![v1, v2];
        }
    }
    Ok(out)
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Parametrization of the Dirichlet Allen–Cahn equilibrium by its maximum `a`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DirichletShape {
    pub ell: f64,
    /// Maximum of the positive equilibrium, `a = M⁻¹(ℓ/2)`.
    pub a: f64,
    /// Elliptic parameter `a²/(2 − a²)`.
    pub m: f64,
    /// Argument scaling `√(1 − a²/2)`.
    pub speed: f64,
}

impl DirichletShape {
    pub fn new(ell: f64) -> Result<Self> {
        if !(ell > PI) {
            return Err(config(format!(
                "Dirichlet Allen-Cahn has no stable nonzero equilibrium for length {ell} <= pi"
            )));
        }
        let a = inverse_m(0.5 * ell)?;
        let a2 = a * a;
        Ok(Self {
            ell,
            a,
            m: a2 / (2.0 - a2),
            speed: (1.0 - 0.5 * a2).sqrt(),
        })
    }

    pub fn triple(&self, xi: f64) -> crate::specfun::EllipticTriple {
        jacobi_elliptic(xi * self.speed, self.m).expect("parameter checked at construction")
    }

    /// `ξ ↦ g(sn, cn, dn)` scaled to unit L² norm by trapezoid quadrature on `q` intervals.
    fn normalized<G>(&self, q: usize, g: G) -> Result<impl Fn(f64) -> f64>
    where
        G: Fn(crate::specfun::EllipticTriple) -> f64,
    {
        let shape = *self;
        let raw = move |xi: f64| g(shape.triple(xi));
        let h = self.ell / q as f64;
        let sq: f64 = (0..=q)
            .map(|i| {
                let w = if i == 0 || i == q { 0.5 } else { 1.0 };
                w * raw(i as f64 * h).powi(2)
            })
            .sum::<f64>()
            * h;
        if !(sq > 0.0) {
            return Err(config("degenerate Dirichlet eigenfunction"));
        }
        let scale = sq.sqrt().recip();
        Ok(move |xi: f64| scale * raw(xi))
    }
}

/// Result of projecting a function onto the Dirichlet sine basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coeffs: Vec<f64>,
    /// Grid L² norm of `func − Σ c_j e_j`.
    pub residual: f64,
}

/// Sine-basis coefficients `c_j = ∫₀^ℓ func e_j dξ` by the composite trapezoid
/// rule on `q` uniform intervals.
pub fn dirichlet_project(
    func: &dyn Fn(f64) -> f64,
    basis: &SpectralBasis,
    q: usize,
) -> Result<Projection> {
    if basis.bc != BoundaryCondition::Dirichlet {
        return Err(config("dirichlet_project requires a Dirichlet basis"));
    }
    let n = basis.len();
    if q < 8 * n {
        return Err(config(format!(
            "projection needs at least {} quadrature points, got {q}",
            8 * n
        )));
    }
    let h = basis.ell / q as f64;
    // Sine modes vanish at both endpoints, so the trapezoid end weights drop out.
    let nodes: Vec<(f64, f64)> = (1..q)
        .map(|i| {
            let xi = i as f64 * h;
            (xi, func(xi))
        })
        .collect();
    let coeffs: Vec<f64> = (0..n)
        .map(|j| {
            nodes
                .iter()
                .map(|&(xi, v)| v * basis.eigenfunction(j, xi))
                .sum::<f64>()
                * h
        })
        .collect();
    let endpoints = 0.5 * (func(0.0).powi(2) + func(basis.ell).powi(2));
    let interior: f64 = nodes
        .iter()
        .map(|&(xi, v)| (v - basis.synthesize_at(&coeffs, xi)).powi(2))
        .sum();
    let residual = ((endpoints + interior) * h).sqrt();
    Ok(Projection { coeffs, residual })
}

/// Spectral gap conditions on the linearized eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapReport {
    /// `3 a₁ < a₂`.
    pub strong: bool,
    /// `2 a₁ < a₂`.
    pub relaxed: bool,
    /// Smallest `k₀ ≥ 1` with `3 a₁ < a_{k₀+1}` and `a₁ < a₂`.
    pub weak_k0: Option<usize>,
}

/// Evaluates the gap conditions on a nondecreasing list of linearized eigenvalues.
pub fn check_spectral_gap(lin_eigenvalues: &[f64]) -> GapReport {
    if lin_eigenvalues.len() < 2 {
        return GapReport {
            strong: false,
            relaxed: false,
            weak_k0: None,
        };
    }
    let a1 = lin_eigenvalues[0];
    let a2 = lin_eigenvalues[1];
    let weak_k0 = if a1 < a2 {
        (1..lin_eigenvalues.len()).find(|&k0| 3.0 * a1 < lin_eigenvalues[k0])
    } else {
        None
    };
    GapReport {
        strong: 3.0 * a1 < a2,
        relaxed: 2.0 * a1 < a2,
        weak_k0,
    }
}

impl fmt::Display for GapReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "strong={}\nrelaxed={}\nweak_k0=",
            self.strong, self.relaxed
        )?;
        match self.weak_k0 {
            Some(k) => write!(f, "{k}"),
            None => Ok(()),
        }
    }
}
