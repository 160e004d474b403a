//! Brute-force simulation of the outage experiment.
//!
//! Every trial draws Nakagami power gains as `Gamma(m, 1/m)` variates and
//! each interferer's channel as a Bernoulli(`p_i`) collision, then compares
//! the SINR with the threshold. Interferers that miss the source's channel
//! contribute nothing, so their gains (and, in spatial mode, positions and
//! shadowing) are drawn only on a collision; this does not change the
//! distribution of the SINR.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::averaged::AveragedOutageInput;
use crate::conditional::{conditional_outage, ConditionalOutageInput};
use crate::error::{invalid, Result};
use crate::exec::{stream_rng, Execution};
use crate::network::{shadowing_sampler, NormalizedPowers};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McMode {
    /// Fixed `Ω`; fading and collisions are random.
    Conditional,
    /// Topology and shadowing are redrawn every trial as well.
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub execution: Execution,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        McConfig {
            trials,
            seed,
            execution: Execution::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("Monte Carlo needs at least one trial"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_count(count: u64, cfg: &McConfig) -> Self {
        let n = cfg.trials as f64;
        let p = count as f64 / n;
        McEstimate {
            value: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
            trials: cfg.trials,
            seed: cfg.seed,
        }
    }
}

/// Power-gain sampler for Nakagami parameter `m`; unit mean.
fn gain(m: f64) -> Result<Gamma<f64>> {
    Gamma::new(m, 1.0 / m).map_err(|e| invalid(format!("bad Nakagami parameter {m}: {e}")))
}

/// Outage estimate at one SNR with `Ω` held fixed.
pub fn mc_conditional_outage(
    omega: &NormalizedPowers,
    m: &[f64],
    p: &[f64],
    beta: f64,
    gamma_snr: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    Ok(mc_conditional_curve(omega, m, p, beta, &[gamma_snr], cfg)?[0])
}

/// Outage estimates along an SNR sweep. All SNR points reuse the same
/// draws (common random numbers).
pub fn mc_conditional_curve(
    omega: &NormalizedPowers,
    m: &[f64],
    p: &[f64],
    beta: f64,
    gammas: &[f64],
    cfg: &McConfig,
) -> Result<Vec<McEstimate>> {
    cfg.validate()?;
    let n = omega.omega.len();
    if m.len() != n || p.len() + 1 != n {
        return Err(invalid("inconsistent lengths of powers, Nakagami parameters and collision probabilities"));
    }
    if !(beta > 0.0) || gammas.iter().any(|g| !(*g > 0.0)) {
        return Err(invalid("SINR threshold and SNR values must be positive"));
    }
    let gains = m.iter().map(|&mi| gain(mi)).collect::<Result<Vec<_>>>()?;
    let w = &omega.omega;
    let noise: Vec<f64> = gammas.iter().map(|g| 1.0 / g).collect();
    let counts = cfg.execution.map_chunks(cfg.trials, |chunk, count| {
        let mut rng = stream_rng(cfg.seed, chunk);
        let mut hits = vec![0u64; noise.len()];
        for _ in 0..count {
            let signal = gains[0].sample(&mut rng) * w[0];
            let mut interference = 0.0;
            for i in 1..n {
                if rng.gen::<f64>() < p[i - 1] {
                    interference += gains[i].sample(&mut rng) * w[i];
                }
            }
            for (h, z) in hits.iter_mut().zip(&noise) {
                if signal <= beta * (z + interference) {
                    *h += 1;
                }
            }
        }
        hits
    });
    Ok((0..gammas.len())
        .map(|k| McEstimate::from_count(counts.iter().map(|c| c[k]).sum(), cfg))
        .collect())
}

/// End-to-end estimate: topology, shadowing, fading and collisions are all
/// redrawn per trial.
pub fn mc_spatial_outage(inp: &AveragedOutageInput, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    inp.validate()?;
    let gains = inp.m.iter().map(|&mi| gain(mi)).collect::<Result<Vec<_>>>()?;
    let base = inp.mean_source_power();
    let count: u64 = cfg
        .execution
        .map_chunks(cfg.trials, |chunk, count| {
            let mut rng = stream_rng(cfg.seed, chunk);
            let mut shadow = shadowing_sampler(inp.sigma_s);
            let mut hits = 0u64;
            for _ in 0..count {
                let signal = gains[0].sample(&mut rng) * shadow(&mut rng) * base;
                let mut interference = 0.0;
                for (i, (&p, &c)) in inp.p.iter().zip(&inp.power_ratios).enumerate() {
                    if rng.gen::<f64>() < p {
                        let r = inp.annulus.sample_radius(&mut rng);
                        interference += gains[i + 1].sample(&mut rng) * shadow(&mut rng) / c * r.powf(-inp.alpha);
                    }
                }
                if signal <= inp.beta * (1.0 / inp.gamma_snr + interference) {
                    hits += 1;
                }
            }
            hits
        })
        .into_iter()
        .sum();
    Ok(McEstimate::from_count(count, cfg))
}

/// Spatial average of the exact conditional outage over `cfg.trials`
/// random topologies (and shadowing draws).
pub fn mc_topology_average(inp: &AveragedOutageInput, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    inp.validate()?;
    let base = inp.mean_source_power();
    let sums = cfg.execution.map_chunks(cfg.trials, |chunk, count| -> Result<(f64, f64)> {
        let mut rng = stream_rng(cfg.seed, chunk);
        let mut shadow = shadowing_sampler(inp.sigma_s);
        let (mut s1, mut s2) = (0.0, 0.0);
        let mut omega = vec![0.0; inp.num_interferers() + 1];
        for _ in 0..count {
            omega[0] = shadow(&mut rng) * base;
            for (w, &c) in omega[1..].iter_mut().zip(&inp.power_ratios) {
                let r = inp.annulus.sample_radius(&mut rng);
                *w = shadow(&mut rng) / c * r.powf(-inp.alpha);
            }
            let e = conditional_outage(&ConditionalOutageInput {
                omega: NormalizedPowers { omega: omega.clone() },
                m: inp.m.clone(),
                p: inp.p.clone(),
                beta: inp.beta,
                gamma_snr: inp.gamma_snr,
            })?;
            s1 += e;
            s2 += e * e;
        }
        Ok((s1, s2))
    });
    let (mut s1, mut s2) = (0.0, 0.0);
    for s in sums {
        let (a, b) = s?;
        s1 += a;
        s2 += b;
    }
    let n = cfg.trials as f64;
    let mean = s1 / n;
    let var = if cfg.trials > 1 {
        ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        trials: cfg.trials,
        seed: cfg.seed,
    })
}
