//! Spectral ↔ physical grid transforms for the three boundary conditions.
//!
//! Neumann uses the midpoint grid `ξ_i = (i + ½)ℓ/G` with DCT-III/DCT-II,
//! Dirichlet the same grid with DST-III/DST-II, and periodic the uniform grid
//! `ξ_i = iℓ/G` with a complex FFT in Hartley form. Forward coefficients are
//! `c_n = (ℓ/G) Σ_i v_i e_n(ξ_i)`, which inverts synthesis exactly for every
//! mode below the Nyquist index.

use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{config, Result};
use crate::spectral::{periodic_wavenumber, BoundaryCondition, SpectralBasis};

/// Default physical grid size as a multiple of the Galerkin level.
pub const DEFAULT_GRID_FACTOR: usize = 4;

#[derive(Clone)]
enum Plan {
    Real(Arc<dyn TransformType2And3<f64>>),
    Complex {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
}

/// Immutable transform plan; per-thread buffers live in [`TransformWorkspace`].
#[derive(Clone)]
pub struct SpectralTransform {
    bc: BoundaryCondition,
    ell: f64,
    modes: usize,
    grid: usize,
    plan: Plan,
}

impl std::fmt::Debug for SpectralTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralTransform")
            .field("bc", &self.bc)
            .field("ell", &self.ell)
            .field("modes", &self.modes)
            .field("grid", &self.grid)
            .finish()
    }
}

/// Scratch space for one thread's transforms.
#[derive(Debug, Clone)]
pub struct TransformWorkspace {
    real: Vec<f64>,
    complex: Vec<Complex64>,
    scratch_real: Vec<f64>,
    scratch_complex: Vec<Complex64>,
}

impl SpectralTransform {
    /// Transform for `modes` Galerkin modes on a grid of `grid` points.
    pub fn new(bc: BoundaryCondition, ell: f64, modes: usize, grid: usize) -> Result<Self> {
        if grid < 2 * modes + 1 {
            return Err(config(format!(
                "physical grid of {grid} points aliases {modes} modes (need at least {})",
                2 * modes + 1
            )));
        }
        if !(ell > 0.0) {
            return Err(config(format!("domain length must be positive, got {ell}")));
        }
        let plan = match bc {
            BoundaryCondition::Neumann | BoundaryCondition::Dirichlet => {
                Plan::Real(DctPlanner::new().plan_dct2(grid))
            }
            BoundaryCondition::Periodic => {
                let mut planner = FftPlanner::new();
                Plan::Complex {
                    forward: planner.plan_fft_forward(grid),
                    inverse: planner.plan_fft_inverse(grid),
                }
            }
        };
        Ok(Self {
            bc,
            ell,
            modes,
            grid,
            plan,
        })
    }

    /// Transform matching `basis` with the default grid `G = 4N`.
    pub fn for_basis(basis: &SpectralBasis) -> Result<Self> {
        Self::new(
            basis.bc(),
            basis.ell(),
            basis.len(),
            DEFAULT_GRID_FACTOR * basis.len(),
        )
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn grid_len(&self) -> usize {
        self.grid
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    /// Physical grid abscissae.
    pub fn grid_points(&self) -> Vec<f64> {
        let dx = self.ell / self.grid as f64;
        match self.bc {
            BoundaryCondition::Periodic => (0..self.grid).map(|i| i as f64 * dx).collect(),
            _ => (0..self.grid).map(|i| (i as f64 + 0.5) * dx).collect(),
        }
    }

    pub fn workspace(&self) -> TransformWorkspace {
        let (scratch_real, scratch_complex) = match &self.plan {
            Plan::Real(p) => (vec![0.0; p.get_scratch_len()], Vec::new()),
            Plan::Complex { forward, inverse } => {
                let len = forward
                    .get_inplace_scratch_len()
                    .max(inverse.get_inplace_scratch_len());
                (Vec::new(), vec![Complex64::default(); len])
            }
        };
        let complex = match self.bc {
            BoundaryCondition::Periodic => vec![Complex64::default(); self.grid],
            _ => Vec::new(),
        };
        TransformWorkspace {
            real: vec![0.0; self.grid],
            complex,
            scratch_real,
            scratch_complex,
        }
    }

    /// Grid values `v_i = Σ_n coeffs[n] e_n(ξ_i)` written into `values`.
    pub fn to_grid(&self, coeffs: &[f64], values: &mut [f64], ws: &mut TransformWorkspace) {
        debug_assert_eq!(coeffs.len(), self.modes);
        debug_assert_eq!(values.len(), self.grid);
        let root = (2.0 / self.ell).sqrt();
        match (&self.plan, self.bc) {
            (Plan::Real(p), BoundaryCondition::Neumann) => {
                values.fill(0.0);
                // DCT-III halves the zeroth input.
                values[0] = 2.0 * coeffs[0] / self.ell.sqrt();
                for n in 1..self.modes {
                    values[n] = root * coeffs[n];
                }
                p.process_dct3_with_scratch(values, &mut ws.scratch_real);
            }
            (Plan::Real(p), _) => {
                values.fill(0.0);
                for n in 0..self.modes {
                    values[n] = root * coeffs[n];
                }
                p.process_dst3_with_scratch(values, &mut ws.scratch_real);
            }
            (Plan::Complex { inverse, .. }, _) => {
                let buf = &mut ws.complex;
                buf.fill(Complex64::default());
                let inv_root = self.ell.sqrt().recip();
                for n in 1..self.modes {
                    let (k, sign) = periodic_wavenumber(n);
                    let (re, im) = if sign > 0.0 {
                        (coeffs[n], -coeffs[n])
                    } else {
                        (coeffs[n], coeffs[n])
                    };
                    buf[k] += Complex64::new(re * inv_root, im * inv_root);
                }
                inverse.process_with_scratch(buf, &mut ws.scratch_complex);
                let mean = coeffs[0] * inv_root;
                for (v, z) in values.iter_mut().zip(buf.iter()) {
                    *v = z.re + mean;
                }
            }
        }
    }

    /// Coefficients `c_n = (ℓ/G) Σ_i values[i] e_n(ξ_i)`; `values` is clobbered.
    pub fn from_grid(&self, values: &mut [f64], coeffs: &mut [f64], ws: &mut TransformWorkspace) {
        debug_assert_eq!(coeffs.len(), self.modes);
        debug_assert_eq!(values.len(), self.grid);
        let dx = self.ell / self.grid as f64;
        let root = (2.0 / self.ell).sqrt();
        match (&self.plan, self.bc) {
            (Plan::Real(p), BoundaryCondition::Neumann) => {
                p.process_dct2_with_scratch(values, &mut ws.scratch_real);
                coeffs[0] = dx * values[0] / self.ell.sqrt();
                for n in 1..self.modes {
                    coeffs[n] = dx * root * values[n];
                }
            }
            (Plan::Real(p), _) => {
                p.process_dst2_with_scratch(values, &mut ws.scratch_real);
                for n in 0..self.modes {
                    coeffs[n] = dx * root * values[n];
                }
            }
            (Plan::Complex { forward, .. }, _) => {
                let buf = &mut ws.complex;
                for (z, v) in buf.iter_mut().zip(values.iter()) {
                    *z = Complex64::new(*v, 0.0);
                }
                forward.process_with_scratch(buf, &mut ws.scratch_complex);
                let scale = dx / self.ell.sqrt();
                coeffs[0] = scale * buf[0].re;
                for n in 1..self.modes {
                    let (k, sign) = periodic_wavenumber(n);
                    coeffs[n] = scale * (buf[k].re - sign * buf[k].im);
                }
            }
        }
    }

    /// Uses `ws.real` as the grid buffer so callers need no extra allocation.
    pub(crate) fn apply_pointwise(
        &self,
        coeffs: &[f64],
        out: &mut [f64],
        ws: &mut TransformWorkspace,
        f: impl Fn(f64) -> f64,
    ) {
        let mut grid = std::mem::take(&mut ws.real);
        self.to_grid(coeffs, &mut grid, ws);
        grid.iter_mut().for_each(|v| *v = f(*v));
        self.from_grid(&mut grid, out, ws);
        ws.real = grid;
    }
}
