//! Binary CPFSK link abstraction: the symmetric information rate `C(h, γ)`
//! of one-symbol noncoherent detection, the SINR threshold `β = C⁻¹(R)`,
//! and the spectral efficiency `η(h)` from the 99%-power bandwidth.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::exec::{stream_rng, Execution};
use crate::special::adaptive_simpson;

/// Largest supported modulation index.
pub const MAX_INDEX: f64 = 1.5;

fn check_index(h: f64) -> Result<()> {
    if h > 0.0 && h <= MAX_INDEX {
        Ok(())
    } else {
        Err(invalid(format!("modulation index must lie in (0, {MAX_INDEX}], got {h}")))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `ln I_0(x)` for `x ≥ 0` (Abramowitz & Stegun 9.8.1–9.8.2, relative
/// error below 2e-7).
pub fn ln_bessel_i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 3.75 {
        let t = (ax / 3.75).powi(2);
        (1.0 + t * (3.515_622_9
            + t * (3.089_942_4 + t * (1.206_749_2 + t * (0.265_973_2 + t * (0.036_076_8 + t * 0.004_581_3))))))
            .ln()
    } else {
        let t = 3.75 / ax;
        let poly = 0.398_942_28
            + t * (0.013_285_92
                + t * (0.002_253_19
                    + t * (-0.001_575_65
                        + t * (0.009_162_81
                            + t * (-0.020_577_06 + t * (0.026_355_37 + t * (-0.016_476_33 + t * 0.003_923_77)))))));
        ax - 0.5 * ax.ln() + poly.ln()
    }
}

/// Correlation `<s_1, s_0>` of unit-energy tones at `±h/2` over one symbol.
fn tone_correlation(h: f64) -> Complex64 {
    let x = PI * h;
    Complex64::from_polar(x.sin() / x, x)
}

/// Noise and phase draws shared by every `(h, γ)` cell.
#[derive(Debug, Clone)]
pub struct ObservationSamples {
    /// Complex Gaussian noise on the two basis directions, unit variance.
    noise: Vec<(Complex64, Complex64)>,
    /// Unknown carrier phase.
    phase: Vec<Complex64>,
}

impl ObservationSamples {
    pub fn draw(trials: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0);
        let cn = |rng: &mut rand_chacha::ChaCha8Rng| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        };
        let mut noise = Vec::with_capacity(trials);
        let mut phase = Vec::with_capacity(trials);
        for _ in 0..trials {
            let a = cn(&mut rng);
            let b = cn(&mut rng);
            noise.push((a, b));
            phase.push(Complex64::from_polar(1.0, 2.0 * PI * rng.gen::<f64>()));
        }
        ObservationSamples { noise, phase }
    }

    pub fn len(&self) -> usize {
        self.noise.len()
    }

    pub fn is_empty(&self) -> bool {
        self.noise.is_empty()
    }

    /// Mutual information (bits/symbol) with equiprobable tones at
    /// `Es/N0 = gamma` (linear).
    ///
    /// In the orthonormal basis `e_1 = s_0`, `e_2 ∝ s_1 - ρ s_0`, the
    /// noncoherent likelihood of tone `k` is proportional to
    /// `I_0(2 √Es |<r, s_k>| / N0)`. Each noise draw is used for both
    /// transmitted tones.
    pub fn rate(&self, h: f64, gamma: f64) -> f64 {
        let rho = tone_correlation(h);
        let orth = (1.0 - rho.norm_sqr()).max(0.0).sqrt();
        let amp = gamma.sqrt();
        let scale = 2.0 * amp;
        let stats = |r1: Complex64, r2: Complex64| {
            let y0 = r1;
            let y1 = r1 * rho.conj() + r2 * orth;
            (ln_bessel_i0(scale * y0.norm()), ln_bessel_i0(scale * y1.norm()))
        };
        let mut loss = 0.0;
        for (&(n1, n2), &ph) in self.noise.iter().zip(&self.phase) {
            let a = ph * amp;
            // Tone 0 sent.
            let (l0, l1) = stats(a + n1, n2);
            loss += log2_1p_exp(l1 - l0);
            // Tone 1 sent.
            let (l0, l1) = stats(a * rho + n1, a * orth + n2);
            loss += log2_1p_exp(l0 - l1);
        }
        (1.0 - loss / (2.0 * self.noise.len() as f64)).clamp(0.0, 1.0)
    }
}

fn log2_1p_exp(x: f64) -> f64 {
    let v = if x > 35.0 { x } else { x.exp().ln_1p() };
    v / std::f64::consts::LN_2
}

/// Monte Carlo symmetric information rate of noncoherent binary CPFSK.
pub fn symmetric_rate(h: f64, gamma_db: f64, trials: usize, seed: u64) -> Result<f64> {
    check_index(h)?;
    if trials == 0 {
        return Err(invalid("need at least one Monte Carlo symbol"));
    }
    Ok(ObservationSamples::draw(trials, seed).rate(h, db_to_linear(gamma_db)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CapacitySource {
    Tabulated,
    Estimated { trials: usize, seed: u64 },
}

/// Grid of `C(h, γ)` values in bits/symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityModel {
    pub source: CapacitySource,
    pub h_grid: Vec<f64>,
    pub gamma_db_grid: Vec<f64>,
    /// `values[i][j] = C(h_grid[i], gamma_db_grid[j])`.
    pub values: Vec<Vec<f64>>,
}

/// Default grids: `h = 0.40..=1.00` step 0.05, `γ = -10..=20` dB step 0.25.
pub fn default_h_grid() -> Vec<f64> {
    (0..=12).map(|i| (40 + 5 * i) as f64 / 100.0).collect()
}

pub fn default_gamma_grid() -> Vec<f64> {
    (0..=120).map(|j| -10.0 + 0.25 * j as f64).collect()
}

pub const DEFAULT_CAPACITY_TRIALS: usize = 100_000;
pub const DEFAULT_CAPACITY_SEED: u64 = 2012;

const BUILTIN_TABLE: &str = include_str!("../data/capacity_default.txt");

/// Pool-adjacent-violators fit of a nondecreasing sequence.
pub fn isotonic(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a <= b {
                break;
            }
            blocks.pop();
            let n = na + nb;
            *blocks.last_mut().unwrap() = ((a * na as f64 + b * nb as f64) / n as f64, n);
        }
    }
    blocks.into_iter().flat_map(|(v, n)| std::iter::repeat_n(v, n)).collect()
}

impl CapacityModel {
    /// Estimates every cell from one shared set of observation draws, then
    /// makes each row nondecreasing in `γ`.
    pub fn estimate(h_grid: Vec<f64>, gamma_db_grid: Vec<f64>, trials: usize, seed: u64, exec: Execution) -> Result<Self> {
        for &h in &h_grid {
            check_index(h)?;
        }
        if trials == 0 {
            return Err(invalid("need at least one Monte Carlo symbol"));
        }
        let samples = ObservationSamples::draw(trials, seed);
        let cells = exec.map(h_grid.len() * gamma_db_grid.len(), |k| {
            let (i, j) = (k / gamma_db_grid.len(), k % gamma_db_grid.len());
            samples.rate(h_grid[i], db_to_linear(gamma_db_grid[j]))
        });
        let values = cells.chunks(gamma_db_grid.len()).map(isotonic).collect();
        let model = CapacityModel {
            source: CapacitySource::Estimated { trials, seed },
            h_grid,
            gamma_db_grid,
            values,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn estimate_default(exec: Execution) -> Result<Self> {
        Self::estimate(
            default_h_grid(),
            default_gamma_grid(),
            DEFAULT_CAPACITY_TRIALS,
            DEFAULT_CAPACITY_SEED,
            exec,
        )
    }

    /// The model shipped with the library: default grids, 10⁵ symbols per
    /// cell, seed [`DEFAULT_CAPACITY_SEED`].
    pub fn builtin() -> Self {
        Self::from_table(BUILTIN_TABLE).expect("shipped capacity table is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let increasing = |g: &[f64]| g.windows(2).all(|w| w[0] < w[1]);
        if self.h_grid.is_empty() || !increasing(&self.h_grid) {
            return Err(invalid("capacity h grid must be nonempty and strictly increasing"));
        }
        if self.gamma_db_grid.len() < 2 || !increasing(&self.gamma_db_grid) {
            return Err(invalid("capacity SNR grid needs at least two strictly increasing points"));
        }
        if self.values.len() != self.h_grid.len() || self.values.iter().any(|r| r.len() != self.gamma_db_grid.len()) {
            return Err(invalid("capacity matrix shape does not match its grids"));
        }
        for (row, h) in self.values.iter().zip(&self.h_grid) {
            if row.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(invalid(format!("capacity values at h = {h} leave [0, 1]")));
            }
            if row.windows(2).any(|w| w[1] < w[0]) {
                return Err(invalid(format!("capacity at h = {h} is not nondecreasing in SNR")));
            }
        }
        Ok(())
    }

    /// Row of `C` over the SNR grid at `h`, linear in `h` between grid rows.
    fn row_at(&self, h: f64) -> Result<Vec<f64>> {
        let g = &self.h_grid;
        let eps = 1e-12;
        if h < g[0] - eps || h > g[g.len() - 1] + eps {
            return Err(invalid(format!(
                "h = {h} is outside the capacity model range [{}, {}]",
                g[0],
                g[g.len() - 1]
            )));
        }
        if g.len() == 1 {
            return Ok(self.values[0].clone());
        }
        let i = g.partition_point(|&x| x <= h).clamp(1, g.len() - 1) - 1;
        let w = ((h - g[i]) / (g[i + 1] - g[i])).clamp(0.0, 1.0);
        Ok(self.values[i]
            .iter()
            .zip(&self.values[i + 1])
            .map(|(a, b)| a + w * (b - a))
            .collect())
    }

    /// Bilinear `C(h, γ)`.
    pub fn capacity(&self, h: f64, gamma_db: f64) -> Result<f64> {
        let row = self.row_at(h)?;
        let g = &self.gamma_db_grid;
        if gamma_db <= g[0] {
            return Ok(row[0]);
        }
        if gamma_db >= g[g.len() - 1] {
            return Ok(row[row.len() - 1]);
        }
        let j = g.partition_point(|&x| x <= gamma_db) - 1;
        let w = (gamma_db - g[j]) / (g[j + 1] - g[j]);
        Ok(row[j] + w * (row[j + 1] - row[j]))
    }

    /// Smallest `γ` (dB) with `C(h, γ) = rate` on the interpolated model.
    pub fn inverse(&self, h: f64, rate: f64) -> Result<f64> {
        let row = self.row_at(h)?;
        let (lo, hi) = (row[0], row[row.len() - 1]);
        if !(rate > lo && rate <= hi) {
            return Err(Error::RateNotBracketed { rate, h, lo, hi });
        }
        // Bisection over grid cells for the first crossing.
        let (mut a, mut b) = (0usize, row.len() - 1);
        while b - a > 1 {
            let mid = (a + b) / 2;
            if row[mid] >= rate {
                b = mid;
            } else {
                a = mid;
            }
        }
        let g = &self.gamma_db_grid;
        let w = (rate - row[a]) / (row[b] - row[a]);
        Ok(g[a] + w * (g[b] - g[a]))
    }

    /// SHA-256 of the grids and values in their table text form.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.body());
        hasher.finalize().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn body(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        writeln!(s, "h {}", join(&self.h_grid)).unwrap();
        writeln!(s, "gamma_db {}", join(&self.gamma_db_grid)).unwrap();
        for row in &self.values {
            writeln!(s, "{}", join(row)).unwrap();
        }
        s
    }

    /// Plain-text matrix: comment header, an `h` row, a `gamma_db` row,
    /// then one row of capacities per `h`.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# fhtc capacity table: binary CPFSK, one-symbol noncoherent detection").unwrap();
        match &self.source {
            CapacitySource::Estimated { trials, seed } => {
                writeln!(s, "# source = estimated").unwrap();
                writeln!(s, "# trials = {trials}").unwrap();
                writeln!(s, "# seed = {seed}").unwrap();
            }
            CapacitySource::Tabulated => writeln!(s, "# source = tabulated").unwrap(),
        }
        writeln!(s, "# sha256 = {}", self.checksum()).unwrap();
        s.push_str(&self.body());
        s
    }

    /// Parses [`CapacityModel::to_table`] output. A `sha256` header, when
    /// present, must match; rows must be nondecreasing in `γ`.
    pub fn from_table(text: &str) -> Result<Self> {
        let mut checksum = None;
        let mut header = std::collections::HashMap::new();
        let mut h_grid = None;
        let mut gamma = None;
        let mut values = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |message: String| Error::Parse { line: n + 1, message };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    header.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            let mut tokens = line.split_whitespace().peekable();
            let label = match tokens.peek() {
                Some(&"h") | Some(&"gamma_db") => tokens.next(),
                _ => None,
            };
            let nums = tokens
                .map(|t| t.parse::<f64>().map_err(|e| err(format!("{t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            match label {
                Some("h") => h_grid = Some(nums),
                Some("gamma_db") => gamma = Some(nums),
                _ => values.push(nums),
            }
        }
        checksum = header.get("sha256").cloned().or(checksum);
        let source = match (
            header.get("source").map(String::as_str),
            header.get("trials").and_then(|t| t.parse().ok()),
            header.get("seed").and_then(|t| t.parse().ok()),
        ) {
            (Some("estimated"), Some(trials), Some(seed)) => CapacitySource::Estimated { trials, seed },
            _ => CapacitySource::Tabulated,
        };
        let model = CapacityModel {
            source,
            h_grid: h_grid.ok_or_else(|| invalid("capacity table has no 'h' row"))?,
            gamma_db_grid: gamma.ok_or_else(|| invalid("capacity table has no 'gamma_db' row"))?,
            values,
        };
        model.validate()?;
        if let Some(c) = checksum {
            let actual = model.checksum();
            if c != actual {
                return Err(invalid(format!("capacity table checksum mismatch: header {c}, content {actual}")));
            }
        }
        Ok(model)
    }
}

/// `β` in dB for code rate `rate` at index `h`, plus `margin_db`.
pub fn sinr_threshold(h: f64, rate: f64, margin_db: f64, model: &CapacityModel) -> Result<f64> {
    check_index(h)?;
    if !(rate > 0.0 && rate < 1.0) {
        return Err(invalid(format!("code rate must lie in (0, 1), got {rate}")));
    }
    if !(margin_db >= 0.0) {
        return Err(invalid(format!("margin must be nonnegative, got {margin_db}")));
    }
    Ok(model.inverse(h, rate)? + margin_db)
}

/// Normalized power spectral density of binary full-response CPFSK with
/// equiprobable symbols; `f` in units of the symbol rate.
///
/// For integer `h` this is the continuous part only: half of the power then
/// sits in discrete lines at `f = ±1/2` (odd `h`) or `f = 0` (even `h`).
pub fn cpfsk_psd(h: f64, f: f64) -> f64 {
    let sinc = |x: f64| if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
    let psi = (PI * h).cos();
    let a = [sinc(f + h / 2.0), sinc(f - h / 2.0)];
    if is_integer_index(h) {
        let d = if psi < 0.0 { a[0] + a[1] } else { a[0] - a[1] };
        return 0.25 * d * d;
    }
    // Half-angle forms of `1 + ψ² - 2ψ cos 2πf` and `cos(2πf - α) - ψ cos α`
    // keep precision at the narrow peaks that appear near integer h.
    let (sf, cf) = (PI * f).sin_cos();
    let (sh, ch) = (PI * h / 2.0).sin_cos();
    let sin2 = |x: f64| x.sin().powi(2);
    let (denom, n0) = if psi < 0.0 {
        let e = 2.0 * ch * ch;
        (e * e - 4.0 * psi * cf * cf, 2.0 * (cf * cf - ch * ch))
    } else {
        let e = 2.0 * sh * sh;
        (e * e + 4.0 * psi * sf * sf, 2.0 * (sh * sh - sf * sf))
    };
    let s2h = sin2(PI * h);
    let n_minus = s2h - 2.0 * sin2(PI * f + PI * h / 2.0);
    let n_plus = s2h - 2.0 * sin2(PI * f - PI * h / 2.0);
    let num = n_minus * a[0] * a[0] + n_plus * a[1] * a[1] + 2.0 * n0 * a[0] * a[1];
    0.5 * (a[0] * a[0] + a[1] * a[1]) + 0.5 * num / denom
}

fn is_integer_index(h: f64) -> bool {
    (h - h.round()).abs() < 1e-12
}

/// Positive-frequency tail powers of one PSD.
///
/// Near integer `h` the spectrum has narrow peaks at half-integer (odd) or
/// integer (even) frequencies, so integration runs over unit segments
/// whose endpoints sit on those frequencies.
struct PsdTail {
    h: f64,
    /// Segment endpoints `offset, offset + 1, ...`.
    offset: f64,
    /// `tails[k] = ∫_{offset + k}^∞ S(f) df`.
    tails: Vec<f64>,
}

const TAIL_SEGMENTS: usize = 400;
const SUBPANELS: usize = 8;
const GRADING_DECADES: usize = 10;

impl PsdTail {
    fn new(h: f64) -> Result<Self> {
        let offset = if (PI * h).cos() < 0.0 { 0.5 } else { 0.0 };
        let mut tails = vec![0.0; TAIL_SEGMENTS + 1];
        let last = offset + TAIL_SEGMENTS as f64;
        // Beyond the last segment S(f) ~ c/f⁴ on average.
        let mean = Self::integrate(h, last - 1.0, last)?;
        tails[TAIL_SEGMENTS] = mean * last / 3.0;
        for k in (0..TAIL_SEGMENTS).rev() {
            let a = offset + k as f64;
            tails[k] = tails[k + 1] + Self::integrate(h, a, a + 1.0)?;
        }
        Ok(PsdTail { h, offset, tails })
    }

    fn integrate(h: f64, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let f = |x: f64| cpfsk_psd(h, x);
        // Geometric grading toward both ends, then uniform panels.
        let len = b - a;
        let mut cuts: Vec<f64> = (2..=GRADING_DECADES).map(|k| 10f64.powi(-(k as i32))).collect();
        cuts.reverse();
        let mut nodes = vec![0.0];
        nodes.extend(cuts.iter().map(|c| c * len));
        let (inner_lo, inner_hi) = (0.01 * len, 0.99 * len);
        nodes.extend((0..=SUBPANELS).map(|i| inner_lo + (inner_hi - inner_lo) * i as f64 / SUBPANELS as f64));
        nodes.extend(cuts.iter().rev().map(|c| len - c * len));
        nodes.push(len);
        nodes
            .windows(2)
            .map(|w| adaptive_simpson(&f, a + w[0], a + w[1], 1e-12, 40))
            .sum()
    }

    /// `∫_w^∞ S(f) df`, `w ≥ 0`.
    fn at(&self, w: f64) -> Result<f64> {
        let k = ((w - self.offset).ceil().max(0.0)) as usize;
        if k >= TAIL_SEGMENTS {
            return Err(invalid(format!("frequency {w} beyond the tabulated spectrum")));
        }
        let knot = self.offset + k as f64;
        Ok(self.tails[k] + Self::integrate(self.h, w, knot)?)
    }

    /// Power in discrete lines at frequencies `≥ w`.
    fn line_power(&self, w: f64) -> f64 {
        if !is_integer_index(self.h) {
            return 0.0;
        }
        let position = self.offset;
        match position.partial_cmp(&w) {
            Some(std::cmp::Ordering::Greater) => 0.25,
            Some(std::cmp::Ordering::Equal) if position == 0.0 => 0.25,
            _ => 0.0,
        }
    }
}

/// Two-sided bandwidth (symbol-rate units) containing `fraction` of the
/// power.
pub fn percent_power_bandwidth(h: f64, fraction: f64) -> Result<f64> {
    check_index(h)?;
    if !(fraction > 0.5 && fraction < 1.0) {
        return Err(invalid(format!("power fraction must lie in (0.5, 1), got {fraction}")));
    }
    let target = 0.5 * (1.0 - fraction);
    let tail = PsdTail::new(h)?;
    let upper = |w: f64| -> Result<f64> { Ok(tail.at(w)? + tail.line_power(w)) };
    let (mut lo, mut hi) = (0.0, 1.0);
    while upper(hi)? > target {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if upper(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + hi)
}

/// `η(h) = 1 / B_99`, symbols per second per Hz.
pub fn spectral_efficiency(h: f64) -> Result<f64> {
    spectral_efficiency_with(h, 0.99)
}

pub fn spectral_efficiency_with(h: f64, fraction: f64) -> Result<f64> {
    Ok(1.0 / percent_power_bandwidth(h, fraction)?)
}
