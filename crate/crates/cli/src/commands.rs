use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use fhtc::averaged::{AveragedOutageInput, SpatialEvaluator};
use fhtc::conditional::{conditional_outage, conditional_outage_rayleigh, ConditionalOutageInput};
use fhtc::cpfsk::{db_to_linear, sinr_threshold, spectral_efficiency, CapacityModel};
use fhtc::exec::Execution;
use fhtc::network::{normalized_powers, sample_topology, ChannelParams, Topology};
use fhtc::optimizer::{optimize, NetworkScenario, OptimizationReport, TcObjective};
use fhtc::oracle::{mc_conditional_curve, mc_spatial_outage, McConfig};
use fhtc::tc::TABLE_UNITS;

use crate::config::{ConfigError, ScenarioConfig, DEFAULT_BETA_DB};
use crate::CliError;

/// Text written to the output file (or stdout).
pub struct Output {
    pub body: String,
    /// Human-readable summary for stdout when the body goes to a file.
    pub summary: Option<String>,
}

fn f(x: f64) -> String {
    format!("{x:?}")
}

/// `# ` metadata lines: version, command, seeds, budgets, and the full
/// resolved configuration.
pub fn metadata(command: &str, cfg: &ScenarioConfig, capacity: Option<&CapacityModel>) -> String {
    let mut s = String::new();
    writeln!(s, "# fhtc {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(s, "# command: {command}").unwrap();
    writeln!(
        s,
        "# seeds: solver {} topology {} capacity {}",
        cfg.solver.seed, cfg.network.topology_seed, cfg.capacity.seed
    )
    .unwrap();
    writeln!(
        s,
        "# budgets: mc_trials {} shadow_draws {} avg_outage.mc_trials {} capacity.trials {}",
        cfg.solver.mc_trials, cfg.solver.shadow_draws, cfg.avg_outage.mc_trials, cfg.capacity.trials
    )
    .unwrap();
    if let Some(c) = capacity {
        writeln!(s, "# capacity model: {:?} sha256 {}", c.source, c.checksum()).unwrap();
    }
    writeln!(s, "# config:").unwrap();
    for line in cfg.to_toml().lines() {
        writeln!(s, "#   {line}").unwrap();
    }
    s
}

/// SINR threshold in dB and the capacity model it came from, if any.
fn threshold(cfg: &ScenarioConfig) -> Result<(f64, Option<CapacityModel>), CliError> {
    let l = &cfg.link;
    match (l.beta_db, l.rate, l.h) {
        (Some(b), _, _) => Ok((b, None)),
        (None, Some(rate), Some(h)) => {
            let model = cfg.capacity_model()?;
            Ok((sinr_threshold(h, rate, l.margin_db, &model)?, Some(model)))
        }
        _ => Ok((DEFAULT_BETA_DB, None)),
    }
}

fn topology(cfg: &ScenarioConfig) -> Result<Topology, CliError> {
    let n = &cfg.network;
    let annulus = cfg.annulus()?;
    Ok(match &n.topology_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.clone(), source })?;
            Topology::from_table(&text, Some((annulus, n.source_distance)))?
        }
        None => sample_topology(n.interferers, n.r_ex, n.r_net, n.source_distance, n.topology_seed)?,
    })
}

/// `Γ_dB, ε_closed, ε_mc, stderr` for a fixed topology.
pub fn outage_curve(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let gammas_db = &cfg.outage_curve.gamma_db;
    if gammas_db.is_empty() {
        return Err(ConfigError::Invalid("outage_curve.gamma_db is empty".into()).into());
    }
    let (beta_db, capacity) = threshold(cfg)?;
    let top = topology(cfg)?;
    let c = &cfg.channel;
    let n = top.num_interferers();
    let channel = ChannelParams::uniform(c.alpha, c.m0, c.m_interferer, c.sigma_s, n);
    let omega = normalized_powers(&top, &channel, cfg.network.topology_seed)?;
    let m = channel.m.clone();
    let p = vec![1.0 / cfg.l_eff()?; n];
    let beta = db_to_linear(beta_db);
    let gammas: Vec<f64> = gammas_db.iter().map(|&g| db_to_linear(g)).collect();
    let mc = if cfg.solver.mc_trials > 0 {
        let mc_cfg = McConfig::new(cfg.solver.mc_trials, cfg.solver.seed);
        Some(mc_conditional_curve(&omega, &m, &p, beta, &gammas, &mc_cfg)?)
    } else {
        None
    };
    let rayleigh = m.iter().all(|&x| x == 1.0);
    let mut s = metadata("outage-curve", cfg, capacity.as_ref());
    writeln!(s, "# beta_db = {}", f(beta_db)).unwrap();
    writeln!(s, "# interferers = {n}").unwrap();
    writeln!(s, "gamma_db,eps_closed,eps_mc,stderr").unwrap();
    for (k, (&g_db, &g)) in gammas_db.iter().zip(&gammas).enumerate() {
        let inp = ConditionalOutageInput { omega: omega.clone(), m: m.clone(), p: p.clone(), beta, gamma_snr: g };
        let closed = if rayleigh { conditional_outage_rayleigh(&inp)? } else { conditional_outage(&inp)? };
        match &mc {
            Some(est) => writeln!(s, "{},{},{},{}", f(g_db), f(closed), f(est[k].value), f(est[k].std_error)),
            None => writeln!(s, "{},{},,", f(g_db), f(closed)),
        }
        .unwrap();
    }
    Ok(Output { body: s, summary: None })
}

/// `M, L′, σ_s, ε, stderr, ε_mc, stderr_mc` over the configured grid.
pub fn avg_outage(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let a = &cfg.avg_outage;
    if a.interferers.is_empty() || a.l_eff.is_empty() || a.sigma_s.is_empty() {
        return Err(ConfigError::Invalid("avg_outage grids must be nonempty".into()).into());
    }
    let (beta_db, capacity) = threshold(cfg)?;
    let beta = db_to_linear(beta_db);
    let annulus = cfg.annulus()?;
    let c = &cfg.channel;
    let shadow = cfg.shadow();
    let input = |m: usize, l_eff: f64, sigma: f64| {
        AveragedOutageInput::uniform(
            m,
            annulus,
            cfg.network.source_distance,
            c.alpha,
            c.m0,
            c.m_interferer,
            l_eff,
            beta,
            db_to_linear(c.gamma_snr_db),
            sigma,
        )
    };
    let mut s = metadata("avg-outage", cfg, capacity.as_ref());
    writeln!(s, "# beta_db = {}", f(beta_db)).unwrap();
    writeln!(s, "interferers,l_eff,sigma_s,eps,stderr,eps_mc,stderr_mc").unwrap();
    for &sigma in &a.sigma_s {
        let mut rows: HashMap<(usize, usize), (f64, f64)> = HashMap::new();
        for &m in &a.interferers {
            let ev = SpatialEvaluator::new(&input(m, a.l_eff[0], sigma), &shadow)?;
            let mom = ev.moments(beta)?;
            for (j, &l) in a.l_eff.iter().enumerate() {
                let est = ev.combine(&mom, &vec![1.0 / l; m])?;
                rows.insert((j, m), (est.value, est.std_error));
            }
        }
        for (j, &l) in a.l_eff.iter().enumerate() {
            for &m in &a.interferers {
                let (eps, se) = rows[&(j, m)];
                write!(s, "{m},{},{},{},{}", f(l), f(sigma), f(eps), f(se)).unwrap();
                if a.mc_trials > 0 {
                    let mc = mc_spatial_outage(&input(m, l, sigma), &McConfig::new(a.mc_trials, cfg.solver.seed))?;
                    writeln!(s, ",{},{}", f(mc.value), f(mc.std_error)).unwrap();
                } else {
                    writeln!(s, ",,").unwrap();
                }
            }
        }
    }
    Ok(Output { body: s, summary: None })
}

/// `τ′` over the configured `(L′, R, h)` grid.
pub fn tc_surface(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let t = &cfg.tc_surface;
    if t.l_eff.is_empty() || t.rate.is_empty() || t.h.is_empty() {
        return Err(ConfigError::Invalid("tc_surface grids must be nonempty".into()).into());
    }
    let capacity = cfg.capacity_model()?;
    let margin = cfg.link.margin_db;
    let mut objective = TcObjective::new(cfg.scenario()?, &capacity, margin, &cfg.shadow())?;
    let mut s = metadata("tc-surface", cfg, Some(&capacity));
    writeln!(s, "# margin_db = {}", f(margin)).unwrap();
    writeln!(s, "l_eff,rate,h,beta_db,eta,epsilon,tau_normalized,tau_bps_per_khz").unwrap();
    for &h in &t.h {
        let eta = spectral_efficiency(h)?;
        for &rate in &t.rate {
            let beta_db = sinr_threshold(h, rate, margin, &capacity)?;
            for &l_eff in &t.l_eff {
                let r = objective.evaluate(fhtc::optimizer::Params { l_eff, rate, h })?;
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    f(l_eff),
                    f(rate),
                    f(h),
                    f(beta_db),
                    f(eta),
                    f(r.epsilon),
                    f(r.tau_normalized),
                    f(r.tau_table_units())
                )
                .unwrap();
            }
        }
    }
    Ok(Output { body: s, summary: None })
}

#[derive(Serialize)]
struct OptimizeRun {
    scenario: NetworkScenario,
    report: OptimizationReport,
}

#[derive(Serialize)]
struct OptimizeDocument {
    version: &'static str,
    command: &'static str,
    capacity_sha256: String,
    config: String,
    runs: Vec<OptimizeRun>,
}

/// `r_net` in {2, 4} by `σ_s` in {0, 8} by three fading pairs, keeping the
/// rest of the configured geometry and channel.
fn sweep_scenarios(base: &NetworkScenario) -> Result<Vec<NetworkScenario>, CliError> {
    let mut out = Vec::new();
    for r_net in [2.0, 4.0] {
        for sigma_s in [0.0, 8.0] {
            for (m0, mi) in [(1, 1.0), (4, 4.0), (4, 1.0)] {
                let annulus = fhtc::network::Annulus::new(base.annulus.r_ex, r_net)?;
                out.push(NetworkScenario { annulus, sigma_s, m0, m_interferer: mi, ..base.clone() });
            }
        }
    }
    Ok(out)
}

/// Runs the optimizer; returns the JSON report and one summary row per scenario.
pub fn optimize_cmd(cfg: &ScenarioConfig) -> Result<(Output, String), CliError> {
    let opt = cfg.optimize_config()?;
    let capacity = cfg.capacity_model()?;
    let base = cfg.scenario()?;
    let scenarios = if cfg.optimize.sweep { sweep_scenarios(&base)? } else { vec![base] };
    let mut rows = metadata("optimize", cfg, Some(&capacity));
    writeln!(rows, "# tau columns in bps/kHz per unit area").unwrap();
    writeln!(rows, "r_net sigma_s m0 m_i L_eff R h tau_opt tau_1 tau_sub").unwrap();
    let mut runs = Vec::new();
    for sc in scenarios {
        log::info!("optimizing r_net={} sigma_s={} m0={} m_i={}", sc.annulus.r_net, sc.sigma_s, sc.m0, sc.m_interferer);
        let report = optimize(&sc, &capacity, &opt)?;
        writeln!(
            rows,
            "{} {} {} {} {} {} {} {} {} {}",
            f(sc.annulus.r_net),
            f(sc.sigma_s),
            sc.m0,
            f(sc.m_interferer),
            f(report.best.l_eff),
            f(report.best.rate),
            f(report.best.h),
            f(report.tau_opt * TABLE_UNITS),
            f(report.tau_with_margin * TABLE_UNITS),
            report.tau_sub.map(|t| f(t * TABLE_UNITS)).unwrap_or_else(|| "-".into())
        )
        .unwrap();
        runs.push(OptimizeRun { scenario: sc, report });
    }
    let doc = OptimizeDocument {
        version: env!("CARGO_PKG_VERSION"),
        command: "optimize",
        capacity_sha256: capacity.checksum(),
        config: cfg.to_toml(),
        runs,
    };
    let json = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
    Ok((Output { body: json, summary: Some(rows.clone()) }, rows))
}

/// Estimates the capacity grid and writes it as a table file.
pub fn capacity_table(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let c = &cfg.capacity;
    let model = CapacityModel::estimate(c.h_grid.clone(), c.gamma_db_grid.clone(), c.trials, c.seed, Execution::default())?;
    let mut s = metadata("capacity-table", cfg, None);
    s.push_str(&model.to_table());
    Ok(Output { body: s, summary: None })
}
