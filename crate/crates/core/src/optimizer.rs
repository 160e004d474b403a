//! Coordinate interval search for the `(L′, R, h)` that maximize `τ′`.

use std::collections::HashMap;

use serde::Serialize;

use crate::averaged::{AveragedOutageInput, ShadowedConfig, SpatialEvaluator, ThresholdMoments};
use crate::cpfsk::{db_to_linear, sinr_threshold, spectral_efficiency, CapacityModel};
use crate::error::{invalid, Error, Result};
use crate::network::Annulus;
use crate::tc::{normalized_tc, LinkRate, TcResult};

pub const MAX_CYCLES: usize = 200;

/// One search coordinate, held on the lattice `lower + k·tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchInterval {
    pub lo: f64,
    pub mid: f64,
    pub hi: f64,
    pub tolerance: f64,
    pub integer: bool,
}

impl SearchInterval {
    /// Interval over `[lo, hi]` with its midpoint at the center (rounded
    /// down onto the lattice).
    pub fn new(lo: f64, hi: f64, tolerance: f64, integer: bool) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(invalid(format!("search tolerance must be positive, got {tolerance}")));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(format!("search bounds must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        if integer && (lo.fract() != 0.0 || hi.fract() != 0.0 || tolerance.fract() != 0.0) {
            return Err(invalid("integer coordinates need integer bounds and tolerance"));
        }
        let mut s = SearchInterval { lo, mid: lo, hi, tolerance, integer };
        s.mid = s.value(s.steps() / 2);
        Ok(s)
    }

    /// Lattice points above `lo`.
    fn steps(&self) -> usize {
        ((self.hi - self.lo) / self.tolerance + 1e-9).floor() as usize
    }

    fn value(&self, k: usize) -> f64 {
        let v = self.lo + k as f64 * self.tolerance;
        if self.integer {
            v.round()
        } else {
            (v * 1e9).round() / 1e9
        }
    }

    fn index(&self, v: f64) -> usize {
        (((v - self.lo) / self.tolerance).round().max(0.0) as usize).min(self.steps())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchSpace {
    pub l_eff: SearchInterval,
    pub rate: SearchInterval,
    pub h: SearchInterval,
}

impl SearchSpace {
    pub fn new(l_eff: (f64, f64), rate: (f64, f64), h: (f64, f64), tolerances: [f64; 3]) -> Result<Self> {
        let space = SearchSpace {
            l_eff: SearchInterval::new(l_eff.0, l_eff.1, tolerances[0], true)?,
            rate: SearchInterval::new(rate.0, rate.1, tolerances[1], false)?,
            h: SearchInterval::new(h.0, h.1, tolerances[2], false)?,
        };
        if space.l_eff.lo < 1.0 {
            return Err(invalid("the equivalent channel count must be at least 1"));
        }
        if space.rate.lo <= 0.0 || space.rate.hi >= 1.0 {
            return Err(invalid("code-rate bounds must lie inside (0, 1)"));
        }
        if space.h.lo <= 0.0 {
            return Err(invalid("modulation-index bounds must be positive"));
        }
        Ok(space)
    }

    fn coords(&self) -> [SearchInterval; 3] {
        [self.l_eff, self.rate, self.h]
    }
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace::new((2.0, 400.0), (0.05, 0.95), (0.4, 1.0), [1.0, 0.01, 0.01]).expect("valid defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub l_eff: f64,
    pub rate: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub cycle: usize,
    pub point: Params,
    pub objective: f64,
    /// Probe half-widths used in this cycle.
    pub half_widths: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub best: Params,
    pub objective: f64,
    pub evaluations: usize,
    pub cycles: usize,
    pub trace: Vec<TracePoint>,
    pub warnings: Vec<String>,
}

/// Maximizes `objective` over the lattice of `space`.
///
/// Each visit to a coordinate probes `mid - w`, `mid`, `mid + w`
/// (clipped to the bounds), moves `mid` to a strictly better endpoint
/// (the lower one on ties), then halves `w` down to one lattice step. The
/// search stops after a cycle over `L′ → R → h` in which every probe used
/// one step and no midpoint moved.
pub fn coordinate_search<F>(space: &SearchSpace, max_cycles: usize, mut objective: F) -> Result<SearchOutcome>
where
    F: FnMut(Params) -> Result<f64>,
{
    let coords = space.coords();
    let n: Vec<usize> = coords.iter().map(SearchInterval::steps).collect();
    let mut mid: Vec<usize> = coords.iter().map(|c| c.index(c.mid)).collect();
    let mut width: Vec<usize> = n.iter().map(|&s| s.div_ceil(2).max(1)).collect();
    let mut cache: HashMap<[usize; 3], f64> = HashMap::new();
    let params = |k: &[usize]| Params {
        l_eff: coords[0].value(k[0]),
        rate: coords[1].value(k[1]),
        h: coords[2].value(k[2]),
    };
    let mut eval = |k: [usize; 3], cache: &mut HashMap<[usize; 3], f64>| -> Result<f64> {
        if let Some(&v) = cache.get(&k) {
            return Ok(v);
        }
        let v = objective(params(&k))?;
        if v.is_nan() {
            return Err(invalid(format!("objective is NaN at {:?}", params(&k))));
        }
        cache.insert(k, v);
        Ok(v)
    };

    let mut trace = Vec::new();
    let mut incumbent = eval([mid[0], mid[1], mid[2]], &mut cache)?;
    for cycle in 1..=max_cycles {
        let start = mid.clone();
        let used = width.clone();
        for i in 0..3 {
            let w = width[i];
            let mut probe = [mid[0], mid[1], mid[2]];
            probe[i] = mid[i].saturating_sub(w);
            let f_lo = eval(probe, &mut cache)?;
            probe[i] = (mid[i] + w).min(n[i]);
            let k_hi = probe[i];
            let f_hi = eval(probe, &mut cache)?;
            let k_lo = mid[i].saturating_sub(w);
            if f_lo > incumbent && f_lo >= f_hi {
                mid[i] = k_lo;
                incumbent = f_lo;
            } else if f_hi > incumbent {
                mid[i] = k_hi;
                incumbent = f_hi;
            }
            width[i] = (w / 2).max(1);
        }
        trace.push(TracePoint {
            cycle,
            point: params(&mid),
            objective: incumbent,
            half_widths: [0, 1, 2].map(|i| used[i] as f64 * coords[i].tolerance),
        });
        if mid == start && used.iter().all(|&w| w == 1) {
            let best = params(&mid);
            let mut warnings = Vec::new();
            for (i, name) in ["L_eff", "R", "h"].iter().enumerate() {
                if mid[i] == 0 || mid[i] == n[i] {
                    let msg = format!(
                        "optimum for {name} sits on the search bound {}; the bounds may be too tight",
                        coords[i].value(mid[i])
                    );
                    log::warn!("{msg}");
                    warnings.push(msg);
                }
            }
            return Ok(SearchOutcome {
                best,
                objective: incumbent,
                evaluations: cache.len(),
                cycles: cycle,
                trace,
                warnings,
            });
        }
    }
    Err(Error::NoConvergence {
        cycles: max_cycles,
        trace: trace
            .iter()
            .map(|t| format!("cycle {}: {:?} -> {}", t.cycle, t.point, t.objective))
            .collect(),
    })
}

/// Network and channel parameters that stay fixed during optimization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkScenario {
    pub interferers: usize,
    pub annulus: Annulus,
    pub source_distance: f64,
    pub alpha: f64,
    pub m0: u32,
    pub m_interferer: f64,
    pub gamma_snr_db: f64,
    pub sigma_s: f64,
}

impl NetworkScenario {
    pub fn input(&self, beta: f64, l_eff: f64) -> AveragedOutageInput {
        AveragedOutageInput::uniform(
            self.interferers,
            self.annulus,
            self.source_distance,
            self.alpha,
            self.m0,
            self.m_interferer,
            l_eff,
            beta,
            db_to_linear(self.gamma_snr_db),
            self.sigma_s,
        )
    }
}

/// `τ′(L′, R, h)` for one scenario, with the spatial machinery built once.
pub struct TcObjective<'a> {
    scenario: NetworkScenario,
    capacity: &'a CapacityModel,
    margin_db: f64,
    evaluator: SpatialEvaluator,
    last_moments: Option<(u64, ThresholdMoments)>,
    eta: HashMap<u64, f64>,
}

/// A threshold used only to place the shadowing quadrature probes.
const REFERENCE_BETA_DB: f64 = 3.7;

impl<'a> TcObjective<'a> {
    pub fn new(scenario: NetworkScenario, capacity: &'a CapacityModel, margin_db: f64, shadow: &ShadowedConfig) -> Result<Self> {
        let inp = scenario.input(db_to_linear(REFERENCE_BETA_DB), 1.0);
        let evaluator = SpatialEvaluator::new(&inp, shadow)?;
        Ok(TcObjective { scenario, capacity, margin_db, evaluator, last_moments: None, eta: HashMap::new() })
    }

    pub fn scenario(&self) -> &NetworkScenario {
        &self.scenario
    }

    fn eta(&mut self, h: f64) -> Result<f64> {
        if let Some(&e) = self.eta.get(&h.to_bits()) {
            return Ok(e);
        }
        let e = spectral_efficiency(h)?;
        self.eta.insert(h.to_bits(), e);
        Ok(e)
    }

    /// Spatially averaged outage at `L′` and threshold `beta_db`.
    pub fn outage(&mut self, l_eff: f64, beta_db: f64) -> Result<f64> {
        let beta = db_to_linear(beta_db);
        let key = beta.to_bits();
        if self.last_moments.as_ref().map(|m| m.0) != Some(key) {
            self.last_moments = Some((key, self.evaluator.moments(beta)?));
        }
        let mom = &self.last_moments.as_ref().expect("just filled").1;
        let p = vec![1.0 / l_eff; self.scenario.interferers];
        Ok(self.evaluator.combine(mom, &p)?.value)
    }

    pub fn evaluate(&mut self, p: Params) -> Result<TcResult> {
        let beta_db = sinr_threshold(p.h, p.rate, self.margin_db, self.capacity)?;
        let eps = self.outage(p.l_eff, beta_db)?;
        let link = LinkRate::new(p.rate, self.eta(p.h)?, p.l_eff)?;
        normalized_tc(self.scenario.interferers, &self.scenario.annulus, &link, eps, None)
    }
}

/// `τ′` at one parameter point.
pub fn evaluate_objective(objective: &mut TcObjective<'_>, l_eff: f64, rate: f64, h: f64) -> Result<f64> {
    Ok(objective.evaluate(Params { l_eff, rate, h })?.tau_normalized)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeConfig {
    pub space: SearchSpace,
    /// Margin applied during the search.
    pub search_margin_db: f64,
    /// Margin for the reported `τ′_1`.
    pub margin_db: f64,
    pub shadow: ShadowedConfig,
    /// Shadowed values at the optimum are re-evaluated with this many times
    /// the source-power draws.
    pub final_draws_factor: usize,
    pub max_cycles: usize,
    /// Reference point reported as `τ′_sub`.
    pub reference: Option<Params>,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            space: SearchSpace::default(),
            search_margin_db: 0.0,
            margin_db: 1.0,
            shadow: ShadowedConfig::default(),
            final_draws_factor: 10,
            max_cycles: MAX_CYCLES,
            reference: Some(Params { l_eff: 200.0, rate: 0.5, h: 1.0 }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationReport {
    pub best: Params,
    /// `τ′` at the optimum, bps/Hz per unit area.
    pub tau_opt: f64,
    pub epsilon_opt: f64,
    /// `τ′` at the optimum with the reporting margin.
    pub tau_with_margin: f64,
    pub tau_sub: Option<f64>,
    pub evaluations: usize,
    pub cycles: usize,
    pub trace: Vec<TracePoint>,
    pub warnings: Vec<String>,
}

/// Runs the search for one scenario and evaluates the reported columns.
pub fn optimize(scenario: &NetworkScenario, capacity: &CapacityModel, cfg: &OptimizeConfig) -> Result<OptimizationReport> {
    if cfg.final_draws_factor == 0 {
        return Err(invalid("final draws factor must be at least 1"));
    }
    let mut search = TcObjective::new(scenario.clone(), capacity, cfg.search_margin_db, &cfg.shadow)?;
    let outcome = coordinate_search(&cfg.space, cfg.max_cycles, |p| Ok(search.evaluate(p)?.tau_normalized))?;

    let mut final_shadow = cfg.shadow;
    if scenario.sigma_s > 0.0 {
        final_shadow.draws = cfg.shadow.draws * cfg.final_draws_factor;
    }
    let mut exact = TcObjective::new(scenario.clone(), capacity, cfg.search_margin_db, &final_shadow)?;
    let at_opt = exact.evaluate(outcome.best)?;
    let mut margin = TcObjective::new(scenario.clone(), capacity, cfg.margin_db, &final_shadow)?;
    let tau_with_margin = margin.evaluate(outcome.best)?.tau_normalized;
    let tau_sub = match cfg.reference {
        Some(p) => Some(exact.evaluate(p)?.tau_normalized),
        None => None,
    };
    Ok(OptimizationReport {
        best: outcome.best,
        tau_opt: at_opt.tau_normalized,
        epsilon_opt: at_opt.epsilon,
        tau_with_margin,
        tau_sub,
        evaluations: outcome.evaluations,
        cycles: outcome.cycles,
        trace: outcome.trace,
        warnings: outcome.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_concave_objective() {
        let space = SearchSpace::default();
        let out = coordinate_search(&space, MAX_CYCLES, |p| {
            Ok(-(p.l_eff - 40.0).powi(2) - (p.rate - 0.6).powi(2) - (p.h - 0.6).powi(2))
        })
        .unwrap();
        assert_eq!(out.best, Params { l_eff: 40.0, rate: 0.6, h: 0.6 });
        assert!(out.warnings.is_empty());
        assert!(out.trace.windows(2).all(|w| w[1].objective >= w[0].objective));
    }

    #[test]
    fn boundary_optimum_warns() {
        let space = SearchSpace::default();
        let out = coordinate_search(&space, MAX_CYCLES, |p| Ok(p.rate - (p.l_eff - 10.0).abs() - (p.h - 0.5).abs())).unwrap();
        assert_eq!(out.best.rate, 0.95);
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn cap_reports_trace() {
        let space = SearchSpace::default();
        let err = coordinate_search(&space, 2, |p| Ok(-(p.l_eff - 40.0).powi(2))).unwrap_err();
        match err {
            Error::NoConvergence { cycles, trace } => {
                assert_eq!(cycles, 2);
                assert_eq!(trace.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ties_prefer_smaller_channel_count() {
        let space = SearchSpace::new((2.0, 10.0), (0.1, 0.9), (0.5, 0.7), [1.0, 0.1, 0.1]).unwrap();
        let out = coordinate_search(&space, MAX_CYCLES, |p| Ok(if p.l_eff <= 4.0 { 1.0 } else { 0.0 })).unwrap();
        assert_eq!(out.best.l_eff, 2.0);
    }

    #[test]
    fn lattice_values_are_clean() {
        let s = SearchInterval::new(0.4, 1.0, 0.01, false).unwrap();
        assert_eq!(s.mid, 0.7);
        assert_eq!(s.value(19), 0.59);
        let l = SearchInterval::new(2.0, 400.0, 1.0, true).unwrap();
        assert_eq!(l.mid, 201.0);
        assert!(SearchInterval::new(1.0, 1.0, 0.1, false).is_err());
        assert!(SearchInterval::new(0.0, 1.0, 0.0, false).is_err());
        assert!(SearchSpace::new((2.0, 400.0), (0.05, 1.0), (0.4, 1.0), [1.0, 0.01, 0.01]).is_err());
    }

    #[test]
    fn objective_matches_direct_composition() {
        let capacity = CapacityModel::builtin();
        let scenario = NetworkScenario {
            interferers: 50,
            annulus: Annulus::new(0.25, 4.0).unwrap(),
            source_distance: 1.0,
            alpha: 3.0,
            m0: 4,
            m_interferer: 1.0,
            gamma_snr_db: 10.0,
            sigma_s: 0.0,
        };
        let mut obj = TcObjective::new(scenario.clone(), &capacity, 0.0, &ShadowedConfig::default()).unwrap();
        let tau = evaluate_objective(&mut obj, 200.0, 0.5, 1.0).unwrap();
        let beta_db = sinr_threshold(1.0, 0.5, 0.0, &capacity).unwrap();
        let eps = crate::averaged::averaged_outage_unshadowed(&scenario.input(db_to_linear(beta_db), 200.0)).unwrap();
        let link = LinkRate::with_index(0.5, 1.0, 200.0).unwrap();
        let direct = normalized_tc(50, &scenario.annulus, &link, eps, None).unwrap().tau_normalized;
        assert!((tau - direct).abs() <= 1e-12 * direct);
        let with_margin = TcObjective::new(scenario, &capacity, 1.0, &ShadowedConfig::default())
            .unwrap()
            .evaluate(Params { l_eff: 200.0, rate: 0.5, h: 1.0 })
            .unwrap();
        assert!(with_margin.tau_normalized < tau);
    }
}
