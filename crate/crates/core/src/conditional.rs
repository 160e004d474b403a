//! Outage probability conditioned on the normalized powers `Ω`.
//!
//! With `β_0 = m_0 β / Ω_0` and `z = 1/Γ`, the complementary cdf of
//! `Z = g_0 Ω_0 / β - Σ I_i g_i Ω_i` is
//!
//! ```text
//! F̄(z | Ω) = e^{-β_0 z} Σ_{j<m_0} (β_0 z)^j Σ_{k≤j} z^{-k} H_k / (j-k)!
//! ```
//!
//! where `H_k` sums `Π_i G_{ℓ_i}(Ψ_i)` over all `(ℓ_1..ℓ_M)` with
//! `Σ ℓ_i = k`. The sum is the degree-`k` coefficient of `Π_i G_i(x)`,
//! `G_i(x) = Σ_ℓ G_ℓ(Ψ_i) x^ℓ`, so it is computed by truncated polynomial
//! multiplication.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::network::{source_shape, NormalizedPowers};
use crate::special::{ln_factorial, negbin_coefficient};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalOutageInput {
    pub omega: NormalizedPowers,
    /// Nakagami parameters, source first.
    pub m: Vec<f64>,
    /// Collision probability per interferer.
    pub p: Vec<f64>,
    /// SINR threshold, linear.
    pub beta: f64,
    /// SNR at unit distance, linear.
    pub gamma_snr: f64,
}

impl ConditionalOutageInput {
    pub fn validate(&self) -> Result<u32> {
        let n = self.omega.omega.len();
        if n == 0 || self.m.len() != n || self.p.len() + 1 != n {
            return Err(invalid(format!(
                "inconsistent lengths: {} powers, {} Nakagami parameters, {} collision probabilities",
                n,
                self.m.len(),
                self.p.len()
            )));
        }
        if !(self.beta > 0.0) || !(self.gamma_snr > 0.0) {
            return Err(invalid("SINR threshold and SNR must be positive"));
        }
        if self.omega.omega.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) || !(self.omega.source() > 0.0) {
            return Err(invalid("normalized powers must be finite and nonnegative, with Ω0 > 0"));
        }
        if self.p.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid("collision probabilities must lie in [0, 1]"));
        }
        if self.m.iter().any(|m| !(*m >= 0.5)) {
            return Err(invalid("Nakagami parameters must be >= 0.5"));
        }
        source_shape(self.m[0])
    }

    /// `β_0 = m_0 β / Ω_0`.
    pub fn beta0(&self) -> f64 {
        self.m[0] * self.beta / self.omega.source()
    }
}

/// `Ψ_i = (β_0 Ω_i / m_i + 1)^{-1}` for each interferer.
pub fn psi_vector(omega: &[f64], m: &[f64], beta0: f64) -> Vec<f64> {
    omega.iter().zip(m).map(|(w, m)| 1.0 / (beta0 * w / m + 1.0)).collect()
}

/// Coefficients `G_0(Ψ_i) .. G_{k_max}(Ψ_i)` of one interferer.
pub fn g_coefficients(omega: f64, m: f64, p: f64, beta0: f64, k_max: usize) -> Vec<f64> {
    let psi = 1.0 / (beta0 * omega / m + 1.0);
    let psi_m = psi.powf(m);
    let mut g = Vec::with_capacity(k_max + 1);
    g.push(1.0 - p * (1.0 - psi_m));
    let ratio = omega / m * psi;
    for l in 1..=k_max {
        g.push(p * negbin_coefficient(l, m) * ratio.powi(l as i32) * psi_m);
    }
    g
}

/// Multiplies `acc` by `g` in place, dropping terms above `acc.len() - 1`.
pub(crate) fn mul_truncated(acc: &mut [f64], g: &[f64]) {
    for k in (0..acc.len()).rev() {
        let mut s = 0.0;
        for (l, gl) in g.iter().enumerate().take(k + 1) {
            s += gl * acc[k - l];
        }
        acc[k] = s;
    }
}

/// `H_0 .. H_{k_max}` for the interferers described by `omega`, `m`, `p`.
pub fn hk_coefficients(omega: &[f64], m: &[f64], p: &[f64], beta0: f64, k_max: usize) -> Vec<f64> {
    let mut h = vec![0.0; k_max + 1];
    h[0] = 1.0;
    for ((&w, &mi), &pi) in omega.iter().zip(m).zip(p) {
        mul_truncated(&mut h, &g_coefficients(w, mi, pi, beta0, k_max));
    }
    h
}

/// `F̄(z)` from `H_0..H_{m_0-1}`; shared by the conditional and the
/// unshadowed spatially averaged forms.
pub(crate) fn complementary_cdf(h: &[f64], beta0: f64, z: f64) -> f64 {
    let m0 = h.len();
    let bz = beta0 * z;
    let mut total = 0.0;
    for j in 0..m0 {
        let inner: f64 = (0..=j)
            .map(|k| h[k] * z.powi(-(k as i32)) * (-ln_factorial(j - k)).exp())
            .sum();
        total += bz.powi(j as i32) * inner;
    }
    (-bz).exp() * total
}

/// Conditional outage probability for integer `m_0`.
pub fn conditional_outage(inp: &ConditionalOutageInput) -> Result<f64> {
    let m0 = inp.validate()? as usize;
    let beta0 = inp.beta0();
    let h = hk_coefficients(inp.omega.interferers(), &inp.m[1..], &inp.p, beta0, m0 - 1);
    let fbar = complementary_cdf(&h, beta0, 1.0 / inp.gamma_snr);
    Ok((1.0 - fbar).clamp(0.0, 1.0))
}

/// Conditional outage when every link, source included, is Rayleigh.
pub fn conditional_outage_rayleigh(inp: &ConditionalOutageInput) -> Result<f64> {
    inp.validate()?;
    if inp.m.iter().any(|&m| m != 1.0) {
        return Err(Error::Unsupported(
            "the Rayleigh form requires m_i = 1 for every link".into(),
        ));
    }
    let beta0 = inp.beta0();
    // Log-space product.
    let log_prod: f64 = inp
        .omega
        .interferers()
        .iter()
        .zip(&inp.p)
        .map(|(w, p)| (beta0 * (1.0 - p) * w).ln_1p() - (beta0 * w).ln_1p())
        .sum();
    let fbar = (log_prod - beta0 / inp.gamma_snr).exp();
    Ok((1.0 - fbar).clamp(0.0, 1.0))
}
