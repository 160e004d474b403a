//! Throughput and modulation-constrained transmission capacity.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::network::Annulus;

/// Table-style units: bps/kHz per unit area is 1000 × bps/Hz per unit area.
pub const TABLE_UNITS: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TcResult {
    /// `τ′`, bps/Hz per unit area.
    pub tau_normalized: f64,
    /// `τ = τ′·B`, present when the bandwidth is given.
    pub tau_absolute: Option<f64>,
    /// Per-link throughput in bps; per Hz of total bandwidth when `B` is absent.
    pub throughput: f64,
    pub epsilon: f64,
    pub lambda: f64,
}

impl TcResult {
    pub fn tau_table_units(&self) -> f64 {
        self.tau_normalized * TABLE_UNITS
    }
}

/// Link-level inputs shared by the throughput formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkRate {
    pub rate: f64,
    /// Spectral efficiency `η(h)`, symbols/s/Hz.
    pub eta: f64,
    pub l_eff: f64,
}

impl LinkRate {
    pub fn new(rate: f64, eta: f64, l_eff: f64) -> Result<Self> {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(invalid(format!("code rate must lie in (0, 1), got {rate}")));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(invalid(format!("spectral efficiency must be positive, got {eta}")));
        }
        if !(l_eff >= 1.0 && l_eff.is_finite()) {
            return Err(invalid(format!("equivalent channel count must be at least 1, got {l_eff}")));
        }
        Ok(LinkRate { rate, eta, l_eff })
    }

    pub fn with_index(rate: f64, h: f64, l_eff: f64) -> Result<Self> {
        Self::new(rate, crate::cpfsk::spectral_efficiency(h)?, l_eff)
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eps) {
        Ok(())
    } else {
        Err(invalid(format!("outage probability must lie in [0, 1], got {eps}")))
    }
}

/// `T = R·η·B·(1 − ε)/L′` in bps.
pub fn throughput(link: &LinkRate, eps: f64, bandwidth_hz: f64) -> Result<f64> {
    check_epsilon(eps)?;
    if !(bandwidth_hz > 0.0) {
        return Err(invalid(format!("bandwidth must be positive, got {bandwidth_hz}")));
    }
    Ok(link.rate * link.eta * bandwidth_hz * (1.0 - eps) / link.l_eff)
}

/// Interferers per unit area.
pub fn density(m: usize, annulus: &Annulus) -> f64 {
    m as f64 / annulus.area()
}

/// `τ′ = λ·R·η·(1 − ε)/L′`, plus `τ = τ′·B` when a bandwidth is supplied.
pub fn normalized_tc(m: usize, annulus: &Annulus, link: &LinkRate, eps: f64, bandwidth_hz: Option<f64>) -> Result<TcResult> {
    check_epsilon(eps)?;
    annulus.validate()?;
    let lambda = density(m, annulus);
    let tau_normalized = lambda * link.rate * link.eta * (1.0 - eps) / link.l_eff;
    let (throughput, tau_absolute) = match bandwidth_hz {
        Some(b) => (throughput(link, eps, b)?, Some(tau_normalized * b)),
        None => (link.rate * link.eta * (1.0 - eps) / link.l_eff, None),
    };
    Ok(TcResult { tau_normalized, tau_absolute, throughput, epsilon: eps, lambda })
}

/// Outcome of [`tc_with_outage_constraint`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstrainedTc {
    /// `τ_c = λ*(1 − ζ)`.
    pub tau_c: f64,
    pub lambda_star: f64,
    /// Interpolated interferer count at which `ε = ζ`.
    pub m_star: f64,
    pub feasible: bool,
    pub diagnostic: Option<String>,
}

/// Largest density whose averaged outage meets `ε ≤ ζ`, found by bisection
/// over integer `M ∈ [1, m_max]` with `outage(M)` assumed nondecreasing,
/// then linear interpolation between the bracketing counts.
pub fn tc_with_outage_constraint<F>(zeta: f64, m_max: usize, annulus: &Annulus, mut outage: F) -> Result<ConstrainedTc>
where
    F: FnMut(usize) -> Result<f64>,
{
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(invalid(format!("outage constraint must lie in (0, 1), got {zeta}")));
    }
    if m_max == 0 {
        return Err(invalid("the sweep needs at least one interferer"));
    }
    annulus.validate()?;
    let area = annulus.area();
    let at = |m: f64| ConstrainedTc {
        tau_c: m / area * (1.0 - zeta),
        lambda_star: m / area,
        m_star: m,
        feasible: true,
        diagnostic: None,
    };
    let first = outage(1)?;
    if first > zeta {
        return Ok(ConstrainedTc {
            tau_c: 0.0,
            lambda_star: 0.0,
            m_star: 0.0,
            feasible: false,
            diagnostic: Some(format!("outage with one interferer is {first}, above the constraint {zeta}")),
        });
    }
    let last = outage(m_max)?;
    if last <= zeta {
        let mut r = at(m_max as f64);
        r.diagnostic = Some(format!("constraint slack at the largest tested count M = {m_max}"));
        return Ok(r);
    }
    let (mut lo, mut hi, mut eps_lo, mut eps_hi) = (1usize, m_max, first, last);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let e = outage(mid)?;
        if e <= zeta {
            lo = mid;
            eps_lo = e;
        } else {
            hi = mid;
            eps_hi = e;
        }
    }
    let frac = if eps_hi > eps_lo { (zeta - eps_lo) / (eps_hi - eps_lo) } else { 0.0 };
    Ok(at(lo as f64 + frac.clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig_annulus() -> Annulus {
        Annulus::new(0.25, 4.0).unwrap()
    }

    #[test]
    fn density_of_reference_geometry() {
        let lambda = density(50, &fig_annulus());
        assert_relative_eq!(lambda, 50.0 / (std::f64::consts::PI * 15.9375), max_relative = 1e-15);
        assert!((lambda - 0.99862).abs() < 5e-6);
    }

    #[test]
    fn throughput_limits() {
        let link = LinkRate::new(0.5, 0.8, 100.0).unwrap();
        assert_eq!(throughput(&link, 1.0, 1e6).unwrap(), 0.0);
        let double = LinkRate::new(0.5, 0.8, 200.0).unwrap();
        assert_relative_eq!(throughput(&double, 0.3, 1e6).unwrap(), 0.5 * throughput(&link, 0.3, 1e6).unwrap());
        assert!(throughput(&link, 1.2, 1e6).is_err());
    }

    #[test]
    fn throughput_composition() {
        let eta = crate::cpfsk::spectral_efficiency(1.0).unwrap();
        let link = LinkRate::with_index(0.5, 1.0, 200.0).unwrap();
        assert_eq!(throughput(&link, 0.2, 1e6).unwrap(), 0.5 * eta * 1e6 * 0.8 / 200.0);
    }

    #[test]
    fn two_routes_agree() {
        let link = LinkRate::new(0.62, 0.79, 32.0).unwrap();
        let a = fig_annulus();
        let r = normalized_tc(50, &a, &link, 0.17, Some(2e6)).unwrap();
        let via_throughput = throughput(&link, 0.17, 2e6).unwrap() / 2e6 * density(50, &a);
        assert_eq!(r.tau_normalized, via_throughput);
        assert_eq!(r.tau_absolute, Some(r.tau_normalized * 2e6));
    }

    #[test]
    fn linear_in_density() {
        let link = LinkRate::new(0.5, 0.5, 10.0).unwrap();
        let a = fig_annulus();
        let t1 = normalized_tc(10, &a, &link, 0.1, None).unwrap().tau_normalized;
        let t3 = normalized_tc(30, &a, &link, 0.1, None).unwrap().tau_normalized;
        assert_relative_eq!(t3, 3.0 * t1, max_relative = 1e-15);
    }

    #[test]
    fn constraint_slack_and_infeasible() {
        let a = fig_annulus();
        let slack = tc_with_outage_constraint(0.5, 40, &a, |m| Ok(m as f64 * 1e-3)).unwrap();
        assert_eq!(slack.lambda_star, density(40, &a));
        assert_eq!(slack.tau_c, density(40, &a) * 0.5);
        let none = tc_with_outage_constraint(0.01, 40, &a, |_| Ok(0.2)).unwrap();
        assert!(!none.feasible);
        assert_eq!(none.tau_c, 0.0);
        assert!(none.diagnostic.is_some());
    }

    #[test]
    fn constraint_inverts_linear_curve() {
        let a = fig_annulus();
        let r = tc_with_outage_constraint(0.105, 100, &a, |m| Ok(0.01 * m as f64)).unwrap();
        assert_relative_eq!(r.m_star, 10.5, epsilon = 1e-9);
    }
}
