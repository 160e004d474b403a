//! Numerical kernels: Gauss hypergeometric function on the negative axis,
//! error function, log-gamma and Simpson quadrature.

use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `erf(a) - erf(b)`, evaluated without cancellation when both arguments
/// sit in the same tail.
pub fn erf_diff(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        libm::erfc(b) - libm::erfc(a)
    } else if a < 0.0 && b < 0.0 {
        libm::erfc(-a) - libm::erfc(-b)
    } else {
        libm::erf(a) - libm::erf(b)
    }
}

pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid(format!("log_gamma requires a finite x > 0, got {x}")));
    }
    Ok(libm::lgamma(x))
}

/// `ln(n!)` for small integers.
pub fn ln_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// `Γ(l + m) / (l! Γ(m))`, the negative-binomial coefficient.
pub fn negbin_coefficient(l: usize, m: f64) -> f64 {
    (libm::lgamma(l as f64 + m) - ln_factorial(l) - libm::lgamma(m)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    /// Integrate over `[a, b]` directly.
    Identity,
    /// Integrate over `[a, ∞)` through `x = a + t / (1 - t)`, `t ∈ [0, 1)`.
    SemiInfinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Starting number of Simpson panels; must be even.
    pub panels: usize,
    pub transform: Transform,
    /// Absolute tolerance on successive estimates.
    pub tolerance: f64,
    pub max_doublings: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            panels: 64,
            transform: Transform::Identity,
            tolerance: 1e-9,
            max_doublings: 16,
        }
    }
}

impl QuadratureSpec {
    pub fn semi_infinite() -> Self {
        QuadratureSpec {
            transform: Transform::SemiInfinite,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.panels == 0 || self.panels % 2 != 0 {
            return Err(invalid(format!(
                "Simpson panel count must be even and positive, got {}",
                self.panels
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid("quadrature tolerance must be positive"));
        }
        Ok(())
    }
}

/// Composite Simpson rule on `[a, b]` with `panels` (even) subintervals.
pub fn simpson_fixed<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    debug_assert!(panels >= 2 && panels % 2 == 0);
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..panels {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Composite Simpson with panel doubling until successive estimates differ
/// by less than `spec.tolerance`.
///
/// With [`Transform::SemiInfinite`] the upper limit `b` must be `+∞`; the
/// integrand is assumed to vanish at infinity.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    match spec.transform {
        Transform::Identity => {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(invalid(format!("Simpson needs finite a < b, got [{a}, {b}]")));
            }
            simpson_doubling(&f, a, b, spec)
        }
        Transform::SemiInfinite => {
            if !a.is_finite() || b != f64::INFINITY {
                return Err(invalid("semi-infinite transform integrates over [a, +inf)"));
            }
            let g = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let u = 1.0 - t;
                let v = f(a + t / u) / (u * u);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            };
            simpson_doubling(&g, 0.0, 1.0, spec)
        }
    }
}

fn simpson_doubling<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    let mut n = spec.panels;
    let mut h = (b - a) / n as f64;
    let ends = f(a) + f(b);
    let mut even = 0.0;
    let mut odd = 0.0;
    for i in 1..n {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    let mut estimate = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
    let mut change = f64::INFINITY;
    for _ in 0..spec.max_doublings {
        // Old nodes become the even nodes of the refined rule.
        even += odd;
        n *= 2;
        h *= 0.5;
        odd = (0..n / 2).map(|j| f(a + (2 * j + 1) as f64 * h)).sum();
        let next = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
        change = (next - estimate).abs();
        estimate = next;
        if change < spec.tolerance {
            return Ok(estimate);
        }
    }
    Err(Error::QuadratureNonConvergence {
        estimate,
        change,
        panels: n,
    })
}

/// Adaptive Simpson with Richardson correction; `tol` is absolute.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut ok = true;
    let v = adaptive_step(f, a, b, fa, fm, fb, whole, tol, max_depth, &mut ok);
    if ok {
        Ok(v)
    } else {
        Err(Error::QuadratureNonConvergence {
            estimate: v,
            change: f64::NAN,
            panels: 1 << max_depth,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    ok: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // The second test stops refinement once rounding dominates.
    if delta.abs() <= 15.0 * tol || delta.abs() <= 4.0 * f64::EPSILON * (left.abs() + right.abs()) {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *ok = false;
        return left + right + delta / 15.0;
    }
    adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok)
        + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok)
}

/// Gauss hypergeometric function `₂F₁([a, b]; c; x)` for `x ≤ 0` and
/// `c > b > 0`, from the Euler integral.
///
/// The integral is split at `ν = 1/2` and each half is integrated by
/// adaptive Simpson.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if !(b > 0.0) || !(c > b) || !a.is_finite() || !c.is_finite() {
        return Err(invalid(format!(
            "2F1 Euler integral requires c > b > 0, got a = {a}, b = {b}, c = {c}"
        )));
    }
    if !(x <= 0.0) || !x.is_finite() {
        return Err(invalid(format!("2F1 is evaluated only for finite x <= 0, got {x}")));
    }
    if x == 0.0 || a == 0.0 {
        return Ok(1.0);
    }
    let d = c - b;
    let kernel = |nu: f64| (1.0 - x * nu).powf(-a);
    // Near each endpoint substitute `ν = u^k` (left) or `1 - ν = w^k`
    // (right), which turns `ν^{b-1} dν` into `k u^{kb-1} du`. With
    // `kb ≥ 4` the integrand is smooth enough for Simpson to converge
    // quickly; integer exponents need no substitution.
    let power = |e: f64| if (e - 1.0).fract() == 0.0 && e >= 1.0 { 1.0 } else { (4.0 / e).ceil() };
    let (kl, kr) = (power(b), power(d));
    let left = |u: f64| {
        let nu = u.powf(kl);
        kl * u.powf(kl * b - 1.0) * (1.0 - nu).powf(d - 1.0) * kernel(nu)
    };
    let right = |w: f64| {
        let nu = 1.0 - w.powf(kr);
        kr * w.powf(kr * d - 1.0) * nu.powf(b - 1.0) * kernel(nu)
    };
    let u_max = 0.5f64.powf(1.0 / kl);
    let w_max = 0.5f64.powf(1.0 / kr);
    // Coarse pass fixes the scale for the relative tolerance.
    let scale = (simpson_fixed(left, 0.0, u_max, 16) + simpson_fixed(right, 0.0, w_max, 16)).abs();
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let integral = adaptive_simpson(&left, 0.0, u_max, tol, 50)? + adaptive_simpson(&right, 0.0, w_max, tol, 50)?;
    let ln_norm = libm::lgamma(c) - libm::lgamma(b) - libm::lgamma(d);
    Ok(ln_norm.exp() * integral)
}
