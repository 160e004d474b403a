#![allow(dead_code)]

use fhtc::averaged::ShadowedConfig;
use fhtc::cpfsk::CapacityModel;
use fhtc::network::Annulus;
use fhtc::optimizer::{NetworkScenario, Params, TcObjective};

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// `H_k` as an explicit sum over all compositions `ℓ_1 + … + ℓ_M = k` of
/// products of per-interferer terms
/// `G_ℓ = (1 - p) δ_ℓ + p Γ(ℓ + m)/(ℓ! Γ(m)) (Ω/m)^ℓ Ψ^{m+ℓ}`.
pub fn hk_by_enumeration(omega: &[f64], m: &[f64], p: &[f64], beta0: f64, k: usize) -> f64 {
    let g = |i: usize, l: usize| {
        let psi = 1.0 / (beta0 * omega[i] / m[i] + 1.0);
        let coef: f64 = (0..l).map(|j| (m[i] + j as f64) / (j + 1) as f64).product();
        let collide = p[i] * coef * (omega[i] / m[i]).powi(l as i32) * psi.powf(m[i] + l as f64);
        if l == 0 {
            1.0 - p[i] + collide
        } else {
            collide
        }
    };
    let n = omega.len();
    let mut total = 0.0;
    let mut parts = vec![0usize; n];
    loop {
        if parts.iter().sum::<usize>() == k {
            total += (0..n).map(|i| g(i, parts[i])).product::<f64>();
        }
        // Odometer over {0..=k}^n.
        let mut i = 0;
        loop {
            if i == n {
                return total;
            }
            parts[i] += 1;
            if parts[i] <= k {
                break;
            }
            parts[i] = 0;
            i += 1;
        }
    }
}

pub fn table_scenario(r_net: f64, sigma_s: f64, m0: u32, m_interferer: f64) -> NetworkScenario {
    NetworkScenario {
        interferers: 50,
        annulus: Annulus::new(0.25, r_net).unwrap(),
        source_distance: 1.0,
        alpha: 3.0,
        m0,
        m_interferer,
        gamma_snr_db: 10.0,
        sigma_s,
    }
}

/// One reference optimization result: `(r_net, σ_s, m_0, m_i, L′, R, h, τ′_opt, τ′_1, τ′_sub)`.
pub type TableRow = (f64, f64, u32, f64, f64, f64, f64, f64, f64, f64);

pub const REFERENCE_OPTIMA: [TableRow; 12] = [
    (2.0, 0.0, 1, 1.0, 32.0, 0.62, 0.59, 15.90, 13.57, 3.34),
    (2.0, 0.0, 4, 4.0, 42.0, 0.66, 0.59, 17.37, 14.67, 4.12),
    (2.0, 0.0, 4, 1.0, 36.0, 0.65, 0.59, 20.15, 16.96, 4.19),
    (2.0, 8.0, 1, 1.0, 23.0, 0.72, 0.59, 19.39, 16.68, 3.00),
    (2.0, 8.0, 4, 4.0, 28.0, 0.76, 0.59, 19.74, 16.98, 3.43),
    (2.0, 8.0, 4, 1.0, 24.0, 0.68, 0.59, 22.15, 19.23, 3.46),
    (4.0, 0.0, 1, 1.0, 12.0, 0.54, 0.59, 9.83, 7.98, 0.90),
    (4.0, 0.0, 4, 4.0, 15.0, 0.50, 0.59, 10.83, 8.63, 1.13),
    (4.0, 0.0, 4, 1.0, 13.0, 0.50, 0.59, 12.03, 9.57, 1.13),
    (4.0, 8.0, 1, 1.0, 9.0, 0.66, 0.59, 10.62, 8.94, 0.78),
    (4.0, 8.0, 4, 4.0, 10.0, 0.62, 0.59, 11.05, 9.10, 0.91),
    (4.0, 8.0, 4, 1.0, 9.0, 0.65, 0.59, 12.35, 10.41, 0.91),
];

/// Lattice `lo, lo + step, …, hi`.
pub fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| ((lo + k as f64 * step) * 1e9).round() / 1e9).collect()
}

/// Exhaustive maximization of `τ′` over a product grid. Ties keep the
/// first point in `(h, R, L′)` order.
pub fn grid_oracle(objective: &mut TcObjective<'_>, ls: &[f64], rs: &[f64], hs: &[f64]) -> (Params, f64) {
    let mut best = (Params { l_eff: ls[0], rate: rs[0], h: hs[0] }, f64::NEG_INFINITY);
    for &h in hs {
        for &rate in rs {
            for &l_eff in ls {
                let p = Params { l_eff, rate, h };
                let v = objective.evaluate(p).unwrap().tau_normalized;
                if v > best.1 {
                    best = (p, v);
                }
            }
        }
    }
    best
}

pub fn reduced_shadow(draws: usize) -> ShadowedConfig {
    ShadowedConfig { draws, ..ShadowedConfig::default() }
}

pub fn capacity() -> CapacityModel {
    CapacityModel::builtin()
}
