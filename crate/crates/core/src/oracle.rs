//! Independent reference computations for the special functions.
//!
//! Nothing here goes through the AGM or Landen code paths: integrals are
//! evaluated by adaptive Simpson quadrature directly from their definitions.
//! [`self_test`] backs the `oracle` CLI subcommand.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::time::Instant;

use crate::specfun::{elliptic_k, inverse_m, jacobi_elliptic, quarter_period_m};

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// One self-test outcome.
#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Deterministic xorshift stream for sampling test points without pulling in an RNG.
struct XorShift(u64);

impl XorShift {
    fn next_unit(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Runs the special-function checks: `K(0)`, AGM vs quadrature, Jacobi identities
/// on 10³ points, quarter-period values and the inverse round trip.
pub fn self_test() -> Vec<OracleCheck> {
    let start = Instant::now();
    let mut checks = Vec::new();

    let k0 = elliptic_k(0.0).unwrap_or(f64::NAN);
    checks.push(OracleCheck {
        name: "K(0) = pi/2",
        passed: (k0 - FRAC_PI_2).abs() <= 1e-14,
        detail: format!("K(0) = {k0:.17}"),
    });

    let mut worst = 0.0_f64;
    for &m in &[0.1, 0.5, 0.9, 0.99] {
        let quad = adaptive_simpson(
            &|t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(),
            0.0,
            FRAC_PI_2,
            1e-14,
        );
        let agm = elliptic_k(m).unwrap_or(f64::NAN);
        worst = worst.max(((agm - quad) / quad).abs());
    }
    checks.push(OracleCheck {
        name: "K(m) AGM vs quadrature",
        passed: worst <= 1e-12,
        detail: format!("max relative deviation {worst:.3e}"),
    });

    let mut rng = XorShift(0x9E37_79B9_7F4A_7C15);
    let mut worst_pyth = 0.0_f64;
    let mut worst_dn = 0.0_f64;
    for _ in 0..1000 {
        let x = -20.0 + 40.0 * rng.next_unit();
        let m = rng.next_unit();
        match jacobi_elliptic(x, m) {
            Ok(t) => {
                worst_pyth = worst_pyth.max((t.sn * t.sn + t.cn * t.cn - 1.0).abs());
                worst_dn = worst_dn.max((t.dn * t.dn - 1.0 + m * t.sn * t.sn).abs());
            }
            Err(_) => worst_pyth = f64::INFINITY,
        }
    }
    checks.push(OracleCheck {
        name: "sn^2 + cn^2 = 1",
        passed: worst_pyth <= 1e-12,
        detail: format!("max deviation {worst_pyth:.3e} over 1000 points"),
    });
    checks.push(OracleCheck {
        name: "dn^2 = 1 - m sn^2",
        passed: worst_dn <= 1e-12,
        detail: format!("max deviation {worst_dn:.3e} over 1000 points"),
    });

    let m = 0.4;
    let kq = adaptive_simpson(
        &|t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(),
        0.0,
        FRAC_PI_2,
        1e-14,
    );
    let sn_k = jacobi_elliptic(kq, m).map(|t| t.sn).unwrap_or(f64::NAN);
    checks.push(OracleCheck {
        name: "sn(K(m), m) = 1",
        passed: (sn_k - 1.0).abs() <= 1e-10,
        detail: format!("sn = {sn_k:.15}"),
    });

    let m_half = quarter_period_m(0.5 * SQRT_2).unwrap_or(f64::NAN);
    checks.push(OracleCheck {
        name: "2 M(sqrt(2)/2) = 4.0043",
        passed: (2.0 * m_half - 4.0043).abs() <= 1e-4,
        detail: format!("2M = {:.6}", 2.0 * m_half),
    });

    let a = inverse_m(3.81828 / 2.0).unwrap_or(f64::NAN);
    checks.push(OracleCheck {
        name: "M^-1(3.81828/2) = 0.65",
        passed: (a - 0.65).abs() <= 1e-3,
        detail: format!("a = {a:.9}"),
    });

    let mut worst_rt = 0.0_f64;
    for i in 0..100 {
        let a = 0.01 + 0.98 * i as f64 / 99.0;
        let back = quarter_period_m(a).and_then(inverse_m).unwrap_or(f64::NAN);
        worst_rt = worst_rt.max((back - a).abs());
    }
    checks.push(OracleCheck {
        name: "inverse_M round trip",
        passed: worst_rt <= 1e-9,
        detail: format!("max deviation {worst_rt:.3e} over 100 points"),
    });

    let elapsed = start.elapsed().as_secs_f64();
    checks.push(OracleCheck {
        name: "suite runtime < 1 s",
        passed: elapsed < 1.0,
        detail: format!("{elapsed:.3} s"),
    });
    checks
}
