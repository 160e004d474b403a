//! Scenario configuration: one TOML document per run, with `--set`
//! overrides applied before deserialization.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fhtc::averaged::ShadowedConfig;
use fhtc::cpfsk::{self, CapacityModel};
use fhtc::exec::Execution;
use fhtc::network::{Annulus, HoppingParams};
use fhtc::optimizer::{NetworkScenario, OptimizeConfig, Params, SearchSpace};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Parse(String),
    #[error("bad override {0:?}: expected key=value")]
    Override(String),
    #[error("config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub network: NetworkConfig,
    pub channel: ChannelConfig,
    pub hopping: HoppingConfig,
    pub link: LinkConfig,
    pub solver: SolverConfig,
    pub outage_curve: OutageCurveConfig,
    pub avg_outage: AvgOutageConfig,
    pub tc_surface: TcSurfaceConfig,
    pub optimize: OptimizeSection,
    pub capacity: CapacityConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub interferers: usize,
    pub r_ex: f64,
    pub r_net: f64,
    pub source_distance: f64,
    /// Interferer coordinates, one `x, y` pair per line.
    pub topology_file: Option<PathBuf>,
    pub topology_seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            interferers: 50,
            r_ex: 0.25,
            r_net: 4.0,
            source_distance: 1.0,
            topology_file: None,
            topology_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub alpha: f64,
    pub m0: u32,
    pub m_interferer: f64,
    pub sigma_s: f64,
    pub gamma_snr_db: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig { alpha: 3.0, m0: 4, m_interferer: 1.0, sigma_s: 0.0, gamma_snr_db: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HoppingConfig {
    pub l_eff: f64,
    /// When set, `l_eff = channels / duty`.
    pub channels: Option<f64>,
    pub duty: Option<f64>,
}

impl Default for HoppingConfig {
    fn default() -> Self {
        HoppingConfig { l_eff: 200.0, channels: None, duty: None }
    }
}

pub const DEFAULT_BETA_DB: f64 = 3.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    /// Fixed SINR threshold; mutually exclusive with `rate` and `h`. With
    /// neither given the threshold is [`DEFAULT_BETA_DB`].
    pub beta_db: Option<f64>,
    pub rate: Option<f64>,
    pub h: Option<f64>,
    pub margin_db: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig { beta_db: None, rate: None, h: None, margin_db: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub seed: u64,
    pub mc_trials: u64,
    pub shadow_draws: usize,
    pub shadow_panels: usize,
    pub shadow_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = ShadowedConfig::default();
        SolverConfig {
            seed: 1,
            mc_trials: 1_000_000,
            shadow_draws: s.draws,
            shadow_panels: s.panels,
            shadow_tolerance: s.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutageCurveConfig {
    pub gamma_db: Vec<f64>,
}

impl Default for OutageCurveConfig {
    fn default() -> Self {
        OutageCurveConfig { gamma_db: (0..=20).map(f64::from).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AvgOutageConfig {
    pub interferers: Vec<usize>,
    pub l_eff: Vec<f64>,
    pub sigma_s: Vec<f64>,
    /// End-to-end Monte Carlo trials per row; 0 disables the oracle column.
    pub mc_trials: u64,
}

impl Default for AvgOutageConfig {
    fn default() -> Self {
        AvgOutageConfig {
            interferers: (0..=50).collect(),
            l_eff: vec![50.0, 200.0],
            sigma_s: vec![0.0, 2.0, 4.0, 8.0],
            mc_trials: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TcSurfaceConfig {
    pub l_eff: Vec<f64>,
    pub rate: Vec<f64>,
    pub h: Vec<f64>,
}

impl Default for TcSurfaceConfig {
    fn default() -> Self {
        TcSurfaceConfig {
            l_eff: (1..=20).map(|k| f64::from(5 * k)).collect(),
            rate: (1..=19).map(|k| f64::from(5 * k) / 100.0).collect(),
            h: vec![0.5, 0.59, 0.7, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeSection {
    pub l_eff_bounds: [f64; 2],
    pub rate_bounds: [f64; 2],
    pub h_bounds: [f64; 2],
    pub tolerances: [f64; 3],
    pub search_margin_db: f64,
    /// Margin for the `τ′_1` column.
    pub margin_db: f64,
    pub final_draws_factor: usize,
    pub max_cycles: usize,
    /// Reference `(L′, R, h)` for the `τ′_sub` column.
    pub reference: Option<[f64; 3]>,
    /// Sweep twelve standard scenarios instead of the configured one.
    pub sweep: bool,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        let d = OptimizeConfig::default();
        let r = d.reference.expect("default reference");
        OptimizeSection {
            l_eff_bounds: [d.space.l_eff.lo, d.space.l_eff.hi],
            rate_bounds: [d.space.rate.lo, d.space.rate.hi],
            h_bounds: [d.space.h.lo, d.space.h.hi],
            tolerances: [d.space.l_eff.tolerance, d.space.rate.tolerance, d.space.h.tolerance],
            search_margin_db: d.search_margin_db,
            margin_db: d.margin_db,
            final_draws_factor: d.final_draws_factor,
            max_cycles: d.max_cycles,
            reference: Some([r.l_eff, r.rate, r.h]),
            sweep: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacitySourceKind {
    /// The table shipped with the library.
    Builtin,
    /// A table file at `capacity.table`.
    Table,
    /// Estimated at run time with `capacity.trials` and `capacity.seed`.
    Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapacityConfig {
    pub source: CapacitySourceKind,
    pub table: Option<PathBuf>,
    pub trials: usize,
    pub seed: u64,
    pub h_grid: Vec<f64>,
    pub gamma_db_grid: Vec<f64>,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        CapacityConfig {
            source: CapacitySourceKind::Builtin,
            table: None,
            trials: cpfsk::DEFAULT_CAPACITY_TRIALS,
            seed: cpfsk::DEFAULT_CAPACITY_SEED,
            h_grid: cpfsk::default_h_grid(),
            gamma_db_grid: cpfsk::default_gamma_grid(),
        }
    }
}

/// Parses a TOML document, applies `key.path=value` overrides, and checks
/// the result.
pub fn load(text: &str, overrides: &[String]) -> Result<ScenarioConfig, ConfigError> {
    let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let cfg: ScenarioConfig = toml::Value::Table(doc)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_file(path: Option<&Path>, overrides: &[String]) -> Result<ScenarioConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.to_path_buf(), source })?,
        None => String::new(),
    };
    load(&text, overrides)
}

fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| ConfigError::Override(spec.to_string()))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(spec.to_string()));
    }
    // TOML literal if it parses as one, else a bare string.
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let mut table = doc;
    for part in &path[..path.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| invalid(format!("override {key}: {part} is not a table")))?;
    }
    table.insert(path[path.len() - 1].to_string(), value);
    Ok(())
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.annulus()?;
        let n = &self.network;
        if !(n.source_distance > 0.0) {
            return Err(invalid("network.source_distance must be positive"));
        }
        let c = &self.channel;
        if !(c.alpha > 2.0) {
            return Err(invalid("channel.alpha must exceed 2"));
        }
        if c.m0 == 0 || !(c.m_interferer > 0.0) {
            return Err(invalid("Nakagami parameters must be positive (channel.m0 an integer)"));
        }
        if !(c.sigma_s >= 0.0) {
            return Err(invalid("channel.sigma_s must be nonnegative"));
        }
        if !c.gamma_snr_db.is_finite() {
            return Err(invalid("channel.gamma_snr_db must be finite"));
        }
        self.l_eff()?;
        let l = &self.link;
        match (l.beta_db, l.rate, l.h) {
            (_, None, None) | (None, Some(_), Some(_)) => {}
            _ => return Err(invalid("set either link.beta_db, or both link.rate and link.h")),
        }
        if !(l.margin_db >= 0.0) {
            return Err(invalid("link.margin_db must be nonnegative"));
        }
        let s = &self.solver;
        if s.shadow_draws < fhtc::averaged::MIN_DRAWS {
            return Err(invalid(format!("solver.shadow_draws must be at least {}", fhtc::averaged::MIN_DRAWS)));
        }
        if s.shadow_panels < 2 || s.shadow_panels % 2 != 0 {
            return Err(invalid("solver.shadow_panels must be even and at least 2"));
        }
        if !(s.shadow_tolerance > 0.0) {
            return Err(invalid("solver.shadow_tolerance must be positive"));
        }
        if self.outage_curve.gamma_db.iter().any(|g| !g.is_finite()) {
            return Err(invalid("outage_curve.gamma_db must be finite"));
        }
        let a = &self.avg_outage;
        if a.l_eff.iter().any(|&x| !(x >= 1.0)) || a.sigma_s.iter().any(|&x| !(x >= 0.0)) {
            return Err(invalid("avg_outage.l_eff must be ≥ 1 and avg_outage.sigma_s ≥ 0"));
        }
        let t = &self.tc_surface;
        if t.l_eff.iter().any(|&x| !(x >= 1.0))
            || t.rate.iter().any(|&x| !(x > 0.0 && x < 1.0))
            || t.h.iter().any(|&x| !(x > 0.0 && x <= cpfsk::MAX_INDEX))
        {
            return Err(invalid("tc_surface grids out of range"));
        }
        self.search_space()?;
        let o = &self.optimize;
        if o.final_draws_factor == 0 || o.max_cycles == 0 {
            return Err(invalid("optimize.final_draws_factor and optimize.max_cycles must be positive"));
        }
        if !(o.margin_db >= 0.0 && o.search_margin_db >= 0.0) {
            return Err(invalid("optimize margins must be nonnegative"));
        }
        let cap = &self.capacity;
        if cap.source == CapacitySourceKind::Table && cap.table.is_none() {
            return Err(invalid("capacity.source = \"table\" needs capacity.table"));
        }
        if cap.trials == 0 {
            return Err(invalid("capacity.trials must be positive"));
        }
        Ok(())
    }

    pub fn annulus(&self) -> Result<Annulus, ConfigError> {
        Annulus::new(self.network.r_ex, self.network.r_net).map_err(|e| invalid(e.to_string()))
    }

    pub fn l_eff(&self) -> Result<f64, ConfigError> {
        let h = &self.hopping;
        match (h.channels, h.duty) {
            (None, None) => {
                if h.l_eff >= 1.0 {
                    Ok(h.l_eff)
                } else {
                    Err(invalid("hopping.l_eff must be at least 1"))
                }
            }
            (Some(c), d) => HoppingParams::new(c, d.unwrap_or(1.0))
                .map(|p| p.l_eff())
                .map_err(|e| invalid(e.to_string())),
            (None, Some(_)) => Err(invalid("hopping.duty needs hopping.channels")),
        }
    }

    pub fn shadow(&self) -> ShadowedConfig {
        ShadowedConfig {
            draws: self.solver.shadow_draws,
            seed: self.solver.seed,
            panels: self.solver.shadow_panels,
            tolerance: self.solver.shadow_tolerance,
            execution: Execution::default(),
        }
    }

    pub fn search_space(&self) -> Result<SearchSpace, ConfigError> {
        let o = &self.optimize;
        SearchSpace::new(
            (o.l_eff_bounds[0], o.l_eff_bounds[1]),
            (o.rate_bounds[0], o.rate_bounds[1]),
            (o.h_bounds[0], o.h_bounds[1]),
            o.tolerances,
        )
        .map_err(|e| invalid(format!("optimize bounds: {e}")))
    }

    pub fn optimize_config(&self) -> Result<OptimizeConfig, ConfigError> {
        let o = &self.optimize;
        Ok(OptimizeConfig {
            space: self.search_space()?,
            search_margin_db: o.search_margin_db,
            margin_db: o.margin_db,
            shadow: self.shadow(),
            final_draws_factor: o.final_draws_factor,
            max_cycles: o.max_cycles,
            reference: o.reference.map(|[l_eff, rate, h]| Params { l_eff, rate, h }),
        })
    }

    pub fn scenario(&self) -> Result<NetworkScenario, ConfigError> {
        Ok(NetworkScenario {
            interferers: self.network.interferers,
            annulus: self.annulus()?,
            source_distance: self.network.source_distance,
            alpha: self.channel.alpha,
            m0: self.channel.m0,
            m_interferer: self.channel.m_interferer,
            gamma_snr_db: self.channel.gamma_snr_db,
            sigma_s: self.channel.sigma_s,
        })
    }

    pub fn capacity_model(&self) -> Result<CapacityModel, Box<dyn std::error::Error>> {
        let c = &self.capacity;
        Ok(match c.source {
            CapacitySourceKind::Builtin => CapacityModel::builtin(),
            CapacitySourceKind::Table => {
                let path = c.table.as_ref().expect("validated");
                let text = std::fs::read_to_string(path)
                    .map_err(|source| ConfigError::Read { path: path.clone(), source })?;
                CapacityModel::from_table(&text)?
            }
            CapacitySourceKind::Estimate => CapacityModel::estimate(
                c.h_grid.clone(),
                c.gamma_db_grid.clone(),
                c.trials,
                c.seed,
                Execution::default(),
            )?,
        })
    }
}
