//! Complete elliptic integral of the first kind, Jacobi elliptic functions and
//! the scaled quarter-period map used to parametrize the Dirichlet equilibrium.
//!
//! The parameter convention is the one where `m` multiplies `x²`:
//!
//! ```text
//! K(m) = ∫₀¹ dx / √((1 − x²)(1 − m x²))
//! ```
//!
//! so `K(0) = π/2` and `sn(·, 0) = sin`.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use crate::error::{domain, Result};

const AGM_TOL: f64 = 1e-16;
const AGM_MAX_ITER: usize = 40;

/// `(sn, cn, dn)` evaluated at a single argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Complete elliptic integral of the first kind, via the arithmetic-geometric mean.
pub fn elliptic_k(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(domain(
            "elliptic_k",
            format!("parameter m = {m} not in [0, 1)"),
        ));
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Ok(FRAC_PI_2 / a)
}

/// Jacobi elliptic functions `sn, cn, dn` of argument `x` and parameter `m ∈ [0, 1]`.
///
/// Uses the descending Landen (AGM) ladder; `m = 0` and `m = 1` are the
/// trigonometric and hyperbolic limits.
pub fn jacobi_elliptic(x: f64, m: f64) -> Result<EllipticTriple> {
    if !(0.0..=1.0).contains(&m) || m.is_nan() {
        return Err(domain(
            "jacobi_elliptic",
            format!("parameter m = {m} not in [0, 1]"),
        ));
    }
    if !x.is_finite() {
        return Err(domain(
            "jacobi_elliptic",
            format!("argument x = {x} is not finite"),
        ));
    }
    if m == 0.0 {
        let (s, c) = x.sin_cos();
        return Ok(EllipticTriple {
            sn: s,
            cn: c,
            dn: 1.0,
        });
    }
    if m == 1.0 {
        let sech = 1.0 / x.cosh();
        return Ok(EllipticTriple {
            sn: x.tanh(),
            cn: sech,
            dn: sech,
        });
    }

    let mut a = [0.0_f64; AGM_MAX_ITER + 1];
    let mut c = [0.0_f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    let mut b = (1.0 - m).sqrt();
    c[0] = m.sqrt();
    let mut depth = 0;
    while depth < AGM_MAX_ITER && c[depth].abs() > AGM_TOL {
        let an = a[depth];
        a[depth + 1] = 0.5 * (an + b);
        c[depth + 1] = 0.5 * (an - b);
        b = (an * b).sqrt();
        depth += 1;
    }

    let mut phi = (1u64 << depth) as f64 * a[depth] * x;
    for n in (1..=depth).rev() {
        phi = 0.5 * (phi + (c[n] / a[n] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = (1.0 - m * sn * sn).max(0.0).sqrt();
    Ok(EllipticTriple { sn, cn, dn })
}

/// Scaled quarter-period map `M(a) = √2/√(2 − a²) · K(a²/(2 − a²))` on `(0, 1)`.
///
/// The Dirichlet interval length satisfies `ℓ = 2 M(a)` where `a` is the
/// maximum of the positive stable equilibrium.
pub fn quarter_period_m(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(domain(
            "quarter_period_M",
            format!("amplitude a = {a} not in (0, 1)"),
        ));
    }
    let a2 = a * a;
    let k = elliptic_k(a2 / (2.0 - a2))?;
    Ok(SQRT_2 / (2.0 - a2).sqrt() * k)
}

/// Inverse of [`quarter_period_m`] by bracketed bisection on the increasing map.
pub fn inverse_m(target: f64) -> Result<f64> {
    if !(target > FRAC_PI_2) || !target.is_finite() {
        return Err(domain(
            "inverse_M",
            format!("target {target} has no preimage (must exceed π/2)"),
        ));
    }
    let mut lo = 0.0_f64;
    let mut hi = 0.5_f64;
    // M blows up logarithmically at a = 1; walk the upper bracket toward 1.
    let mut gap = 0.5_f64;
    while quarter_period_m(hi)? < target {
        gap *= 0.5;
        if gap < 1e-300 {
            return Err(domain(
                "inverse_M",
                format!("target {target} too large to bracket"),
            ));
        }
        lo = hi;
        hi = 1.0 - gap;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // M(0) = π/2 < target, so the lower endpoint never needs evaluation.
        let value = quarter_period_m(mid)?;
        if (value - target).abs() <= 1e-13 {
            return Ok(mid);
        }
        if value < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
