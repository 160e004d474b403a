//! Spatially averaged outage probability.
//!
//! Interferers are independent, so averaging the conditional form over
//! `Ω_1..Ω_M` replaces each `G_ℓ(Ψ_i)` by its expectation,
//!
//! ```text
//! E[G_ℓ(Ψ_i)] = (1 - p_i) δ_ℓ + p_i K_ℓ(β_0),
//! K_ℓ(β_0) = E[ Γ(ℓ+m)/(ℓ! Γ(m)) (Ω/m)^ℓ (β_0 Ω/m + 1)^{-(m+ℓ)} ],
//! ```
//!
//! and the composition sum becomes the same truncated polynomial product as
//! in the conditional case. Without shadowing `K_ℓ` has a closed form in
//! terms of ₂F₁. With shadowing, `K_ℓ` is a Simpson integral against the
//! density of `Ω_i`, and the expectation over the log-normal source power
//! `Ω_0` is taken by Monte Carlo.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::conditional::{complementary_cdf, mul_truncated};
use crate::error::{invalid, Error, Result};
use crate::exec::{stream_rng, Execution};
use crate::network::{source_shape, Annulus, DB_TO_NEPER};
use crate::special::{erf_diff, gauss_2f1, negbin_coefficient, simpson_fixed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedOutageInput {
    pub annulus: Annulus,
    pub source_distance: f64,
    pub alpha: f64,
    /// Nakagami parameters, source first; length `M + 1`.
    pub m: Vec<f64>,
    /// `c_i = P_0 / P_i`; length `M`.
    pub power_ratios: Vec<f64>,
    /// Collision probabilities; length `M`.
    pub p: Vec<f64>,
    /// SINR threshold, linear.
    pub beta: f64,
    /// SNR at unit distance, linear.
    pub gamma_snr: f64,
    /// Shadowing deviation in dB.
    pub sigma_s: f64,
}

impl AveragedOutageInput {
    /// `M` statistically identical interferers with common power and
    /// collision probability `1 / l_eff`.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(
        interferers: usize,
        annulus: Annulus,
        source_distance: f64,
        alpha: f64,
        m0: u32,
        m_interferer: f64,
        l_eff: f64,
        beta: f64,
        gamma_snr: f64,
        sigma_s: f64,
    ) -> Self {
        let mut m = vec![m_interferer; interferers + 1];
        m[0] = f64::from(m0);
        AveragedOutageInput {
            annulus,
            source_distance,
            alpha,
            m,
            power_ratios: vec![1.0; interferers],
            p: vec![1.0 / l_eff; interferers],
            beta,
            gamma_snr,
            sigma_s,
        }
    }

    pub fn num_interferers(&self) -> usize {
        self.power_ratios.len()
    }

    pub fn validate(&self) -> Result<u32> {
        self.annulus.validate()?;
        let n = self.num_interferers();
        if self.m.len() != n + 1 || self.p.len() != n {
            return Err(invalid(format!(
                "inconsistent lengths: {} Nakagami parameters, {} power ratios, {} collision probabilities",
                self.m.len(),
                n,
                self.p.len()
            )));
        }
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return Err(invalid(format!("path-loss exponent must exceed 2, got {}", self.alpha)));
        }
        if !(self.source_distance > 0.0) {
            return Err(Error::InvalidGeometry("source distance must be positive".into()));
        }
        if !(self.beta > 0.0) || !(self.gamma_snr > 0.0) {
            return Err(invalid("SINR threshold and SNR must be positive"));
        }
        if self.m.iter().any(|m| !(*m >= 0.5) || !m.is_finite()) {
            return Err(invalid("Nakagami parameters must be >= 0.5"));
        }
        if self.power_ratios.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(invalid("power ratios must be positive"));
        }
        if self.p.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid("collision probabilities must lie in [0, 1]"));
        }
        if !(self.sigma_s >= 0.0) || !self.sigma_s.is_finite() {
            return Err(invalid("shadowing deviation must be >= 0"));
        }
        source_shape(self.m[0])
    }

    /// `Ω_0` without shadowing.
    pub fn mean_source_power(&self) -> f64 {
        self.source_distance.powf(-self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    SemiNumerical { draws: usize },
    MonteCarlo { trials: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub value: f64,
    /// Standard error of a Monte Carlo component; zero for closed forms.
    pub std_error: f64,
    pub method: Method,
}

/// Settings for the shadowed evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowedConfig {
    /// Number of log-normal draws of `Ω_0`.
    pub draws: usize,
    pub seed: u64,
    /// Starting Simpson panels per integration segment.
    pub panels: usize,
    /// Absolute tolerance for the inner integrals.
    pub tolerance: f64,
    pub execution: Execution,
}

impl Default for ShadowedConfig {
    fn default() -> Self {
        ShadowedConfig {
            draws: 10_000,
            seed: 1,
            panels: 64,
            tolerance: 1e-8,
            execution: Execution::default(),
        }
    }
}

/// Minimum accepted number of outer draws.
pub const MIN_DRAWS: usize = 100;

/// Closed-form `K_ℓ(β_0)`, `ℓ = 0..=k_max`, for an interferer uniform on the
/// annulus without shadowing.
pub fn unshadowed_moments(
    annulus: &Annulus,
    alpha: f64,
    m: f64,
    c: f64,
    beta0: f64,
    k_max: usize,
) -> Result<Vec<f64>> {
    let b = m + 2.0 / alpha;
    let area = annulus.r_net * annulus.r_net - annulus.r_ex * annulus.r_ex;
    let j = |y: f64, l: usize| -> Result<f64> {
        if y == 0.0 {
            return Ok(0.0);
        }
        Ok(gauss_2f1(m + l as f64, b, b + 1.0, -m * y / beta0)? * y.powf(b))
    };
    let y_net = c * annulus.r_net.powf(alpha);
    let y_ex = c * annulus.r_ex.powf(alpha);
    (0..=k_max)
        .map(|l| {
            let diff = j(y_net, l)? - j(y_ex, l)?;
            let lead = 2.0 * negbin_coefficient(l, m) * m.powf(m)
                / (alpha * c.powf(2.0 / alpha) * area * beta0.powf(m + l as f64) * b);
            Ok(lead * diff)
        })
        .collect()
}

/// Truncated `poly^n`.
pub(crate) fn pow_truncated(poly: &[f64], mut n: usize, len: usize) -> Vec<f64> {
    let mut result = vec![0.0; len];
    result[0] = 1.0;
    let mut base: Vec<f64> = poly.iter().copied().chain(std::iter::repeat(0.0)).take(len).collect();
    while n > 0 {
        if n & 1 == 1 {
            mul_truncated(&mut result, &base);
        }
        n >>= 1;
        if n > 0 {
            let b2 = base.clone();
            mul_truncated(&mut base, &b2);
        }
    }
    result
}

/// Interferers sharing `(m, c)` share moments; those also sharing `p`
/// contribute a power of one polynomial.
#[derive(Debug, Clone)]
struct Groups {
    /// Distinct `(m, c)` pairs.
    kinds: Vec<(f64, f64)>,
    /// `(kind index, p) -> count`.
    members: BTreeMap<(usize, u64), usize>,
}

impl Groups {
    fn new(m: &[f64], c: &[f64], p: &[f64]) -> Self {
        let mut kinds: Vec<(f64, f64)> = Vec::new();
        let mut members = BTreeMap::new();
        for ((&mi, &ci), &pi) in m.iter().zip(c).zip(p) {
            let k = match kinds.iter().position(|&(a, b)| a == mi && b == ci) {
                Some(k) => k,
                None => {
                    kinds.push((mi, ci));
                    kinds.len() - 1
                }
            };
            *members.entry((k, pi.to_bits())).or_insert(0) += 1;
        }
        Groups { kinds, members }
    }

    /// `H_0..H_{len-1}` from per-kind moments.
    fn combine(&self, moments: &[Vec<f64>], len: usize) -> Vec<f64> {
        let mut h = vec![0.0; len];
        h[0] = 1.0;
        for (&(kind, p_bits), &count) in &self.members {
            let p = f64::from_bits(p_bits);
            let poly: Vec<f64> = moments[kind]
                .iter()
                .enumerate()
                .map(|(l, k)| p * k + if l == 0 { 1.0 - p } else { 0.0 })
                .collect();
            mul_truncated(&mut h, &pow_truncated(&poly, count, len));
        }
        h
    }
}

/// Spatially averaged outage without shadowing.
pub fn averaged_outage_unshadowed(inp: &AveragedOutageInput) -> Result<f64> {
    let m0 = inp.validate()? as usize;
    if inp.sigma_s != 0.0 {
        return Err(invalid("the closed form applies only without shadowing (sigma_s = 0)"));
    }
    let beta0 = f64::from(m0 as u32) * inp.beta / inp.mean_source_power();
    let groups = Groups::new(&inp.m[1..], &inp.power_ratios, &inp.p);
    let moments = groups
        .kinds
        .iter()
        .map(|&(m, c)| unshadowed_moments(&inp.annulus, inp.alpha, m, c, beta0, m0 - 1))
        .collect::<Result<Vec<_>>>()?;
    let h = groups.combine(&moments, m0);
    Ok((1.0 - complementary_cdf(&h, beta0, 1.0 / inp.gamma_snr)).clamp(0.0, 1.0))
}

/// Density of a shadowed interferer's normalized power
/// `Ω = c^{-1} 10^{ξ/10} ‖X‖^{-α}`, `‖X‖` uniform on the annulus.
///
/// With `s = σ_s ln(10)/10` and `A = r_net² - r_ex²`,
///
/// ```text
/// f(ω) = ω^{-(2+α)/α} e^{2s²/α²} [erf(u(r_net)) - erf(u(r_ex))] / (α c^{2/α} A),
/// u(r) = (ln(c ω r^α) - 2s²/α) / (s √2).
/// ```
pub fn shadowed_interferer_pdf(omega: f64, annulus: &Annulus, alpha: f64, c: f64, sigma_s: f64) -> f64 {
    if !(omega > 0.0) {
        return 0.0;
    }
    let density = ShadowDensity::new(annulus, alpha, c, sigma_s);
    density.at_log(omega.ln()) / omega
}

/// Density of `Ω_0` for a source at fixed distance with log-normal
/// shadowing.
pub fn shadowed_source_pdf(omega: f64, source_distance: f64, alpha: f64, sigma_s: f64) -> f64 {
    if !(omega > 0.0) {
        return 0.0;
    }
    let db = 10.0 * (source_distance.powf(alpha) * omega).log10();
    10.0 / ((2.0 * PI * sigma_s * sigma_s).sqrt() * std::f64::consts::LN_10 * omega)
        * (-db * db / (2.0 * sigma_s * sigma_s)).exp()
}

/// The shadowed density in the variable `v = ln ω`.
#[derive(Debug, Clone, Copy)]
struct ShadowDensity {
    alpha: f64,
    s: f64,
    ln_c: f64,
    ln_r_net: f64,
    ln_r_ex: Option<f64>,
    lead: f64,
}

impl ShadowDensity {
    fn new(annulus: &Annulus, alpha: f64, c: f64, sigma_s: f64) -> Self {
        let s = sigma_s * DB_TO_NEPER;
        let area = annulus.r_net * annulus.r_net - annulus.r_ex * annulus.r_ex;
        ShadowDensity {
            alpha,
            s,
            ln_c: c.ln(),
            ln_r_net: annulus.r_net.ln(),
            ln_r_ex: (annulus.r_ex > 0.0).then(|| annulus.r_ex.ln()),
            lead: (2.0 * s * s / (alpha * alpha)).exp() / (alpha * c.powf(2.0 / alpha) * area),
        }
    }

    /// `f(e^v) e^v`, the density of `ln Ω`.
    fn at_log(&self, v: f64) -> f64 {
        let shift = 2.0 * self.s * self.s / self.alpha;
        let u = |ln_r: f64| (self.ln_c + v + self.alpha * ln_r - shift) / (self.s * SQRT_2);
        let upper = u(self.ln_r_net);
        let bracket = match self.ln_r_ex {
            Some(l) => erf_diff(upper, u(l)),
            None => 1.0 + libm::erf(upper),
        };
        self.lead * (-2.0 * v / self.alpha).exp() * bracket
    }

    /// Integration breakpoints in `v`: outer limits with Gaussian margins
    /// and a window around each erf transition.
    fn breakpoints(&self, area: f64) -> Vec<f64> {
        let s = self.s;
        let margin = 10.0 * s;
        let shift = 2.0 * s * s / self.alpha;
        let v_net = -self.ln_c - self.alpha * self.ln_r_net;
        let lo = v_net - margin;
        let v_ex = match self.ln_r_ex {
            Some(l) => -self.ln_c - self.alpha * l,
            // P(r < r*) = r*² / A; put the cutoff where that is 1e-16.
            None => -self.ln_c - self.alpha * (1e-16 * area).sqrt().ln(),
        };
        let hi = v_ex + margin + shift;
        let mut pts = vec![lo, hi];
        for edge in [v_net + shift, v_ex + shift] {
            for k in [-9.0, -3.0, -1.0, 1.0, 3.0, 9.0] {
                pts.push(edge + k * s);
            }
        }
        pts.retain(|v| (lo..=hi).contains(v));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        pts
    }
}

/// Simpson nodes in `v = ln ω` with the density folded into the weights.
#[derive(Debug, Clone)]
struct ShadowGrid {
    omega: Vec<f64>,
    weight: Vec<f64>,
}

impl ShadowGrid {
    fn build(density: &ShadowDensity, breaks: &[f64], panels: usize) -> Self {
        let mut omega = Vec::new();
        let mut weight = Vec::new();
        for seg in breaks.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let h = (b - a) / panels as f64;
            for i in 0..=panels {
                let v = a + i as f64 * h;
                let simpson = if i == 0 || i == panels {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                omega.push(v.exp());
                weight.push(h / 3.0 * simpson * density.at_log(v));
            }
        }
        ShadowGrid { omega, weight }
    }

    fn mass(&self) -> f64 {
        self.weight.iter().sum()
    }

    /// `K_ℓ(t)` for `ℓ = 0..len`.
    fn moments(&self, m: f64, t: f64, coef: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (&w, &q) in self.omega.iter().zip(&self.weight) {
            let psi = 1.0 / (t * w / m + 1.0);
            let mut term = q * psi.powf(m);
            let ratio = w / m * psi;
            for (l, o) in out.iter_mut().enumerate() {
                if l > 0 {
                    term *= ratio;
                }
                *o += coef[l] * term;
            }
        }
    }
}

/// Precomputed machinery for repeated spatially averaged evaluations that
/// differ only in the SINR threshold and the collision probabilities.
#[derive(Debug, Clone)]
pub struct SpatialEvaluator {
    m0: usize,
    m: Vec<f64>,
    power_ratios: Vec<f64>,
    annulus: Annulus,
    alpha: f64,
    gamma_snr: f64,
    kinds: Vec<(f64, f64)>,
    shadow: Option<Shadowed>,
    mean_source_power: f64,
    execution: Execution,
}

#[derive(Debug, Clone)]
struct Shadowed {
    /// One grid per distinct power ratio.
    grids: Vec<(f64, ShadowGrid)>,
    source_draws: Vec<f64>,
}

/// Moments at a fixed threshold, ready to be combined with any collision
/// probabilities.
#[derive(Debug, Clone)]
pub struct ThresholdMoments {
    /// One entry per `Ω_0` value: `(β_0, K per kind)`.
    points: Vec<(f64, Vec<Vec<f64>>)>,
    shadowed: bool,
}

impl SpatialEvaluator {
    pub fn new(inp: &AveragedOutageInput, cfg: &ShadowedConfig) -> Result<Self> {
        let m0 = inp.validate()? as usize;
        let groups = Groups::new(&inp.m[1..], &inp.power_ratios, &inp.p);
        let shadow = if inp.sigma_s > 0.0 {
            if cfg.draws < MIN_DRAWS {
                return Err(invalid(format!(
                    "at least {MIN_DRAWS} source-power draws are required, got {}",
                    cfg.draws
                )));
            }
            if cfg.panels < 2 || cfg.panels % 2 != 0 {
                return Err(invalid("Simpson panel count must be even and positive"));
            }
            let mut ratios: Vec<f64> = groups.kinds.iter().map(|k| k.1).collect();
            ratios.sort_by(f64::total_cmp);
            ratios.dedup();
            let grids = ratios
                .into_iter()
                .map(|c| Ok((c, converged_grid(inp, c, cfg, m0)?)))
                .collect::<Result<Vec<_>>>()?;
            let normal = Normal::new(0.0, inp.sigma_s * DB_TO_NEPER).expect("finite sigma");
            let mut rng = stream_rng(cfg.seed, 0);
            let base = inp.mean_source_power();
            let source_draws = (0..cfg.draws).map(|_| base * normal.sample(&mut rng).exp()).collect();
            Some(Shadowed { grids, source_draws })
        } else {
            None
        };
        Ok(SpatialEvaluator {
            m0,
            m: inp.m.clone(),
            power_ratios: inp.power_ratios.clone(),
            annulus: inp.annulus,
            alpha: inp.alpha,
            gamma_snr: inp.gamma_snr,
            kinds: groups.kinds,
            shadow,
            mean_source_power: inp.mean_source_power(),
            execution: cfg.execution,
        })
    }

    pub fn num_interferers(&self) -> usize {
        self.power_ratios.len()
    }

    pub fn is_shadowed(&self) -> bool {
        self.shadow.is_some()
    }

    /// Interferer moments at SINR threshold `beta` (linear).
    pub fn moments(&self, beta: f64) -> Result<ThresholdMoments> {
        if !(beta > 0.0) {
            return Err(invalid("SINR threshold must be positive"));
        }
        let k_len = self.m0;
        let m0 = self.m0 as f64;
        match &self.shadow {
            None => {
                let beta0 = m0 * beta / self.mean_source_power;
                let ks = self
                    .kinds
                    .iter()
                    .map(|&(m, c)| unshadowed_moments(&self.annulus, self.alpha, m, c, beta0, k_len - 1))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ThresholdMoments {
                    points: vec![(beta0, ks)],
                    shadowed: false,
                })
            }
            Some(sh) => {
                let coefs: Vec<Vec<f64>> = self
                    .kinds
                    .iter()
                    .map(|&(m, _)| (0..k_len).map(|l| negbin_coefficient(l, m)).collect())
                    .collect();
                let points = self.execution.map(sh.source_draws.len(), |j| {
                    let beta0 = m0 * beta / sh.source_draws[j];
                    let ks = self
                        .kinds
                        .iter()
                        .zip(&coefs)
                        .map(|(&(m, c), coef)| {
                            let grid = &sh.grids.iter().find(|g| g.0 == c).expect("grid per ratio").1;
                            let mut out = vec![0.0; k_len];
                            grid.moments(m, beta0, coef, &mut out);
                            out
                        })
                        .collect();
                    (beta0, ks)
                });
                Ok(ThresholdMoments { points, shadowed: true })
            }
        }
    }

    /// Averaged outage at threshold `beta` with per-interferer collision
    /// probabilities `p`.
    pub fn outage(&self, beta: f64, p: &[f64]) -> Result<OutageEstimate> {
        let mom = self.moments(beta)?;
        self.combine(&mom, p)
    }

    /// Averaged outage from precomputed moments.
    pub fn combine(&self, mom: &ThresholdMoments, p: &[f64]) -> Result<OutageEstimate> {
        if p.len() != self.num_interferers() {
            return Err(invalid(format!(
                "expected {} collision probabilities, got {}",
                self.num_interferers(),
                p.len()
            )));
        }
        if p.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid("collision probabilities must lie in [0, 1]"));
        }
        let groups = Groups::new(&self.m[1..], &self.power_ratios, p);
        let z = 1.0 / self.gamma_snr;
        let fbar: Vec<f64> = mom
            .points
            .iter()
            .map(|(beta0, ks)| {
                // Groups built from the same (m, c) lists enumerate kinds in
                // the same order as `self.kinds`.
                let h = groups.combine(ks, self.m0);
                complementary_cdf(&h, *beta0, z)
            })
            .collect();
        let n = fbar.len() as f64;
        let mean = fbar.iter().sum::<f64>() / n;
        if !mom.shadowed {
            return Ok(OutageEstimate {
                value: (1.0 - mean).clamp(0.0, 1.0),
                std_error: 0.0,
                method: Method::ClosedForm,
            });
        }
        let var = fbar.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Ok(OutageEstimate {
            value: (1.0 - mean).clamp(0.0, 1.0),
            std_error: (var / n).sqrt(),
            method: Method::SemiNumerical { draws: fbar.len() },
        })
    }
}

/// Doubles the panels of every segment until the density mass and the
/// moments at a few thresholds stop changing.
fn converged_grid(inp: &AveragedOutageInput, c: f64, cfg: &ShadowedConfig, m0: usize) -> Result<ShadowGrid> {
    let density = ShadowDensity::new(&inp.annulus, inp.alpha, c, inp.sigma_s);
    let area = inp.annulus.r_net.powi(2) - inp.annulus.r_ex.powi(2);
    let breaks = density.breakpoints(area);
    let m_probe = inp.m[1..].iter().copied().fold(1.0, f64::max);
    let coef: Vec<f64> = (0..m0).map(|l| negbin_coefficient(l, m_probe)).collect();
    let base = m0 as f64 * inp.beta / inp.mean_source_power();
    let probes = [0.1 * base, base, 10.0 * base];
    let signature = |g: &ShadowGrid| {
        let mut sig = vec![g.mass()];
        let mut out = vec![0.0; m0];
        for &t in &probes {
            g.moments(m_probe, t, &coef, &mut out);
            sig.extend_from_slice(&out);
        }
        sig
    };
    let mut panels = cfg.panels;
    let mut grid = ShadowGrid::build(&density, &breaks, panels);
    let mut sig = signature(&grid);
    let mut change = f64::INFINITY;
    for _ in 0..12 {
        panels *= 2;
        let next = ShadowGrid::build(&density, &breaks, panels);
        let next_sig = signature(&next);
        change = sig.iter().zip(&next_sig).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        grid = next;
        sig = next_sig;
        if change < cfg.tolerance {
            let mass = grid.mass();
            if (mass - 1.0).abs() > 1e3 * cfg.tolerance {
                return Err(Error::QuadratureNonConvergence {
                    estimate: mass,
                    change: mass - 1.0,
                    panels: panels * (breaks.len() - 1),
                });
            }
            return Ok(grid);
        }
    }
    Err(Error::QuadratureNonConvergence {
        estimate: sig[0],
        change,
        panels: panels * (breaks.len() - 1),
    })
}

/// Spatially averaged outage with log-normal shadowing.
pub fn averaged_outage_shadowed(inp: &AveragedOutageInput, cfg: &ShadowedConfig) -> Result<OutageEstimate> {
    if !(inp.sigma_s > 0.0) {
        return Err(invalid("the shadowed form requires sigma_s > 0"));
    }
    SpatialEvaluator::new(inp, cfg)?.outage(inp.beta, &inp.p)
}

/// Dispatches on `sigma_s`.
pub fn averaged_outage(inp: &AveragedOutageInput, cfg: &ShadowedConfig) -> Result<OutageEstimate> {
    if inp.sigma_s == 0.0 {
        Ok(OutageEstimate {
            value: averaged_outage_unshadowed(inp)?,
            std_error: 0.0,
            method: Method::ClosedForm,
        })
    } else {
        averaged_outage_shadowed(inp, cfg)
    }
}

/// Simpson estimate of `∫ f` over `[a, b]` with the given density in `ln ω`;
/// exposed for the normalization checks.
pub fn shadowed_pdf_mass(annulus: &Annulus, alpha: f64, c: f64, sigma_s: f64) -> f64 {
    let d = ShadowDensity::new(annulus, alpha, c, sigma_s);
    let area = annulus.r_net.powi(2) - annulus.r_ex.powi(2);
    let b = d.breakpoints(area);
    b.windows(2).map(|w| simpson_fixed(|v| d.at_log(v), w[0], w[1], 2048)).sum()
}
