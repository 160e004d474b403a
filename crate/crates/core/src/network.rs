//! Network geometry and normalized received powers.
//!
//! The receiver sits at the origin, the source at `(source_distance, 0)` and
//! the `M` interferers inside an annulus. Distances are in units of the
//! reference distance `d0 = 1`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Once;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::stream_rng;

/// Interferer region `r_ex ≤ ‖x‖ ≤ r_net`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub r_ex: f64,
    pub r_net: f64,
}

impl Annulus {
    pub fn new(r_ex: f64, r_net: f64) -> Result<Self> {
        let a = Annulus { r_ex, r_net };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_ex >= 0.0) || !self.r_net.is_finite() || !(self.r_net > self.r_ex) {
            return Err(Error::InvalidGeometry(format!(
                "annulus needs 0 <= r_ex < r_net, got r_ex = {}, r_net = {}",
                self.r_ex, self.r_net
            )));
        }
        if self.r_ex < 1.0 {
            static WARNED: Once = Once::new();
            WARNED.call_once(|| log::warn!("r_ex = {} is inside the reference distance d0 = 1", self.r_ex));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        PI * (self.r_net * self.r_net - self.r_ex * self.r_ex)
    }

    /// Draws a point uniformly over the annulus area by inverting the radius
    /// cdf `(r² - r_ex²) / (r_net² - r_ex²)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let r = self.sample_radius(rng);
        let theta = 2.0 * PI * rng.gen::<f64>();
        [r * theta.cos(), r * theta.sin()]
    }

    pub fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let lo = self.r_ex * self.r_ex;
        let hi = self.r_net * self.r_net;
        (lo + rng.gen::<f64>() * (hi - lo)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub source_distance: f64,
    pub interferers: Vec<[f64; 2]>,
    pub annulus: Annulus,
}

impl Topology {
    pub fn new(source_distance: f64, interferers: Vec<[f64; 2]>, annulus: Annulus) -> Result<Self> {
        annulus.validate()?;
        if !(source_distance > 0.0) || !source_distance.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "source distance must be positive, got {source_distance}"
            )));
        }
        if source_distance < 1.0 {
            static WARNED: Once = Once::new();
            WARNED.call_once(|| log::warn!("source distance {source_distance} is inside the reference distance d0 = 1"));
        }
        // Points written to a table lose the last bit or so of precision.
        let slack = 1e-9 * annulus.r_net;
        for (i, p) in interferers.iter().enumerate() {
            let d = p[0].hypot(p[1]);
            if !(d >= annulus.r_ex - slack && d <= annulus.r_net + slack) {
                return Err(Error::InvalidGeometry(format!(
                    "interferer {} at distance {d} lies outside [{}, {}]",
                    i + 1,
                    annulus.r_ex,
                    annulus.r_net
                )));
            }
        }
        Ok(Topology {
            source_distance,
            interferers,
            annulus,
        })
    }

    pub fn num_interferers(&self) -> usize {
        self.interferers.len()
    }

    pub fn interferer_distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.interferers.iter().map(|p| p[0].hypot(p[1]))
    }

    /// Multiplies every distance by `kappa`.
    pub fn scaled(&self, kappa: f64) -> Result<Self> {
        let annulus = Annulus::new(self.annulus.r_ex * kappa, self.annulus.r_net * kappa)?;
        Topology::new(
            self.source_distance * kappa,
            self.interferers.iter().map(|p| [p[0] * kappa, p[1] * kappa]).collect(),
            annulus,
        )
    }

    /// Plain-text table: `# key = value` header lines followed by one
    /// `x, y` pair per interferer.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# r_ex = {:?}", self.annulus.r_ex).unwrap();
        writeln!(s, "# r_net = {:?}", self.annulus.r_net).unwrap();
        writeln!(s, "# source_distance = {:?}", self.source_distance).unwrap();
        for p in &self.interferers {
            writeln!(s, "{:?}, {:?}", p[0], p[1]).unwrap();
        }
        s
    }

    /// Parses [`Topology::to_table`] output. Header keys missing from the
    /// text are taken from `fallback` (annulus, source distance).
    pub fn from_table(text: &str, fallback: Option<(Annulus, f64)>) -> Result<Self> {
        let mut r_ex = fallback.map(|f| f.0.r_ex);
        let mut r_net = fallback.map(|f| f.0.r_net);
        let mut d = fallback.map(|f| f.1);
        let mut points = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let parse_err = |message: String| Error::Parse { line: n + 1, message };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    let value = || {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|e| parse_err(format!("bad value for {}: {e}", k.trim())))
                    };
                    match k.trim() {
                        "r_ex" => r_ex = Some(value()?),
                        "r_net" => r_net = Some(value()?),
                        "source_distance" => d = Some(value()?),
                        _ => {}
                    }
                }
                continue;
            }
            let mut it = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty());
            let mut coord = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| parse_err("expected two coordinates".into()))?
                    .parse::<f64>()
                    .map_err(|e| parse_err(e.to_string()))
            };
            let x = coord()?;
            let y = coord()?;
            if it.next().is_some() {
                return Err(parse_err("expected exactly two coordinates".into()));
            }
            points.push([x, y]);
        }
        let missing = |k: &str| invalid(format!("topology table has no '{k}' and no fallback was given"));
        let annulus = Annulus::new(r_ex.ok_or_else(|| missing("r_ex"))?, r_net.ok_or_else(|| missing("r_net"))?)?;
        Topology::new(d.ok_or_else(|| missing("source_distance"))?, points, annulus)
    }
}

/// Places `m` interferers i.i.d. uniformly over the annulus.
pub fn sample_topology(m: usize, r_ex: f64, r_net: f64, source_distance: f64, seed: u64) -> Result<Topology> {
    let annulus = Annulus::new(r_ex, r_net)?;
    let mut rng = stream_rng(seed, 0);
    let points = (0..m).map(|_| annulus.sample(&mut rng)).collect();
    Topology::new(source_distance, points, annulus)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Path-loss exponent, `> 2`.
    pub alpha: f64,
    /// Nakagami parameters; `m[0]` is the source and must be an integer.
    pub m: Vec<f64>,
    /// Shadowing standard deviation in dB.
    pub sigma_s: f64,
    /// `c_i = P_0 / P_i` for each interferer.
    pub power_ratios: Vec<f64>,
}

impl ChannelParams {
    /// Common transmit power and common interferer fading.
    pub fn uniform(alpha: f64, m0: u32, m_interferer: f64, sigma_s: f64, interferers: usize) -> Self {
        let mut m = vec![m_interferer; interferers + 1];
        m[0] = f64::from(m0);
        ChannelParams {
            alpha,
            m,
            sigma_s,
            power_ratios: vec![1.0; interferers],
        }
    }

    pub fn num_interferers(&self) -> usize {
        self.power_ratios.len()
    }

    pub fn m0(&self) -> Result<u32> {
        source_shape(self.m[0])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return Err(invalid(format!("path-loss exponent must exceed 2, got {}", self.alpha)));
        }
        if self.m.len() != self.power_ratios.len() + 1 {
            return Err(invalid(format!(
                "need one Nakagami parameter per mobile: {} given for {} interferers",
                self.m.len(),
                self.power_ratios.len()
            )));
        }
        if let Some(m) = self.m.iter().find(|&&m| !(m >= 0.5) || !m.is_finite()) {
            return Err(invalid(format!("Nakagami parameters must be >= 0.5, got {m}")));
        }
        self.m0()?;
        if let Some(c) = self.power_ratios.iter().find(|&&c| !(c > 0.0) || !c.is_finite()) {
            return Err(invalid(format!("power ratios must be positive, got {c}")));
        }
        if !(self.sigma_s >= 0.0) || !self.sigma_s.is_finite() {
            return Err(invalid(format!("shadowing deviation must be >= 0, got {}", self.sigma_s)));
        }
        Ok(())
    }
}

/// Checks that the source Nakagami parameter is a positive integer.
pub fn source_shape(m0: f64) -> Result<u32> {
    if m0 >= 1.0 && m0.fract() == 0.0 && m0 <= f64::from(u32::MAX) {
        Ok(m0 as u32)
    } else {
        Err(Error::Unsupported(format!(
            "the closed form requires an integer-valued source Nakagami parameter m0 >= 1, got {m0}"
        )))
    }
}

/// Frequency-hopping parameters: `L` channels and duty factor `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoppingParams {
    pub channels: f64,
    pub duty: f64,
}

impl HoppingParams {
    pub fn new(channels: f64, duty: f64) -> Result<Self> {
        if !(channels >= 1.0) || !channels.is_finite() {
            return Err(invalid(format!("need at least one channel, got {channels}")));
        }
        if !(duty > 0.0 && duty <= 1.0) {
            return Err(invalid(format!("duty factor must lie in (0, 1], got {duty}")));
        }
        Ok(HoppingParams { channels, duty })
    }

    /// Hopping with the given equivalent channel count at unit duty factor.
    pub fn equivalent(l_eff: f64) -> Result<Self> {
        Self::new(l_eff, 1.0)
    }

    /// `L' = L / D`.
    pub fn l_eff(&self) -> f64 {
        self.channels / self.duty
    }

    /// Collision probability `p = D / L = 1 / L'`.
    pub fn collision_probability(&self) -> f64 {
        self.duty / self.channels
    }

    pub fn collision_vector(&self, interferers: usize) -> Vec<f64> {
        vec![self.collision_probability(); interferers]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPowers {
    /// `Ω_0` (source) followed by `Ω_1..Ω_M`.
    pub omega: Vec<f64>,
}

impl NormalizedPowers {
    pub fn source(&self) -> f64 {
        self.omega[0]
    }

    pub fn interferers(&self) -> &[f64] {
        &self.omega[1..]
    }
}

/// `10^{ξ/10}` as a natural-log scale: `ln(10)/10`.
pub const DB_TO_NEPER: f64 = std::f64::consts::LN_10 / 10.0;

/// Normalized powers with i.i.d. `N(0, σ_s²)` dB shadowing.
///
/// The source shadowing `ξ_0` is drawn first, followed by `ξ_1..ξ_M`.
pub fn normalized_powers(top: &Topology, ch: &ChannelParams, seed: u64) -> Result<NormalizedPowers> {
    ch.validate()?;
    if ch.num_interferers() != top.num_interferers() {
        return Err(invalid(format!(
            "channel parameters describe {} interferers but the topology has {}",
            ch.num_interferers(),
            top.num_interferers()
        )));
    }
    let mut rng = stream_rng(seed, 1);
    Ok(powers_with_rng(top, ch, &mut rng))
}

pub(crate) fn powers_with_rng<R: Rng + ?Sized>(top: &Topology, ch: &ChannelParams, rng: &mut R) -> NormalizedPowers {
    let mut shadow = shadowing_sampler(ch.sigma_s);
    let mut omega = Vec::with_capacity(top.num_interferers() + 1);
    omega.push(shadow(rng) * top.source_distance.powf(-ch.alpha));
    for (d, c) in top.interferer_distances().zip(&ch.power_ratios) {
        omega.push(shadow(rng) / c * d.powf(-ch.alpha));
    }
    NormalizedPowers { omega }
}

/// Returns a closure drawing the linear shadowing factor `10^{ξ/10}`.
pub(crate) fn shadowing_sampler<R: Rng + ?Sized>(sigma_s: f64) -> impl FnMut(&mut R) -> f64 {
    let normal = (sigma_s > 0.0).then(|| Normal::new(0.0, sigma_s * DB_TO_NEPER).expect("finite sigma"));
    move |rng: &mut R| match &normal {
        Some(n) => n.sample(rng).exp(),
        None => 1.0,
    }
}
