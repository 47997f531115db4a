//! Oracle parameters.
//!
//! Two modes exist. `Paper` evaluates the asymptotic formulas in (ε, d); the
//! resulting constants are far outside machine range for every ε < 1 (ρ alone
//! is d⁻⁶⁰ε³⁰⁰⁰), so they are carried in log₁₀ form by [`PaperParams`] and only
//! become runnable once overrides bring every field into range. `Explicit`
//! takes concrete values and is the operational default.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("parameter {field} = {value} violates {constraint}")]
    Invalid { field: &'static str, value: String, constraint: &'static str },
    #[error("parameter {field} = 10^{log10:.1} is not representable; override it to run")]
    Unrepresentable { field: &'static str, log10: f64 },
    #[error("unknown parameter override {0:?}")]
    UnknownKey(String),
    #[error("cannot parse override {key}={value:?}: {msg}")]
    BadValue { key: String, value: String, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamMode {
    Paper,
    Explicit,
}

impl FromStr for ParamMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Self::Paper),
            "explicit" => Ok(Self::Explicit),
            other => Err(format!("unknown mode {other:?} (expected paper or explicit)")),
        }
    }
}

/// Candidate size thresholds searched by the threshold finder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KCandidates {
    /// Every `k` in `1..=⌊1/ρ⌋`.
    All,
    /// Powers of two up to `⌊1/ρ⌋`.
    PowersOfTwo,
    /// Inclusive range.
    Range {
        lo: usize,
        hi: usize,
    },
    List(Vec<usize>),
}

impl KCandidates {
    pub fn resolve(&self, max_k: usize) -> Vec<usize> {
        match self {
            Self::All => (1..=max_k).collect(),
            Self::PowersOfTwo => {
                std::iter::successors(Some(1usize), |k| k.checked_mul(2)).take_while(|&k| k <= max_k).collect()
            }
            Self::Range { lo, hi } => (*lo..=*hi).collect(),
            Self::List(ks) => {
                let mut ks = ks.clone();
                ks.sort_unstable();
                ks.dedup();
                ks
            }
        }
    }
}

impl FromStr for KCandidates {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "all" => return Ok(Self::All),
            "pow2" => return Ok(Self::PowersOfTwo),
            _ => {}
        }
        if let Some((lo, hi)) = s.split_once("..") {
            let lo = lo.trim().parse().map_err(|e| format!("{e}"))?;
            let hi = hi.trim().trim_start_matches('=').parse().map_err(|e| format!("{e}"))?;
            return Ok(Self::Range { lo, hi });
        }
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::List)
    }
}

/// Which qualifying candidate becomes the phase threshold when several reach
/// the viability quota.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KSelection {
    /// Highest viable count, ties to the larger `k`.
    MostViable,
    /// Most free vertices covered by viable clusters, ties to the smaller `k`.
    MostCoverage,
    Largest,
    Smallest,
}

impl FromStr for KSelection {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "most-viable" => Ok(Self::MostViable),
            "most-coverage" => Ok(Self::MostCoverage),
            "largest" => Ok(Self::Largest),
            "smallest" => Ok(Self::Smallest),
            other => Err(format!("unknown selection {other:?}")),
        }
    }
}

impl fmt::Display for KSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MostViable => "most-viable",
            Self::MostCoverage => "most-coverage",
            Self::Largest => "largest",
            Self::Smallest => "smallest",
        })
    }
}

/// The asymptotic parameter formulas, held as base-10 logarithms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PaperParams {
    pub epsilon: f64,
    pub d: usize,
    pub log10_ell: f64,
    pub log10_rho: f64,
    pub log10_phi: f64,
    pub log10_beta: f64,
    pub log10_delta: f64,
    pub log10_alpha: f64,
    pub log10_h_bar: f64,
}

impl PaperParams {
    pub fn new(epsilon: f64, d: usize) -> Self {
        let le = epsilon.log10();
        let ld = (d as f64).log10();
        let log10_delta = -70.0 * ld + 3100.0 * le;
        // h̄ = 2δ⁻¹ ln(δ⁻¹)
        let ln_inv_delta = -log10_delta * std::f64::consts::LN_10;
        Self {
            epsilon,
            d,
            log10_ell: 6.0 * ld - 30.0 * le,
            log10_rho: -60.0 * ld + 3000.0 * le,
            log10_phi: -ld + 10.0 * le,
            log10_beta: le - 1.0,
            log10_delta,
            log10_alpha: 4.0 / 3.0 * le - 300_000f64.log10(),
            log10_h_bar: 2f64.log10() - log10_delta + ln_inv_delta.log10(),
        }
    }

    pub fn ell(&self) -> f64 {
        10f64.powf(self.log10_ell)
    }
    pub fn rho(&self) -> f64 {
        10f64.powf(self.log10_rho)
    }
    pub fn phi(&self) -> f64 {
        10f64.powf(self.log10_phi)
    }
    pub fn beta(&self) -> f64 {
        self.epsilon / 10.0
    }
    pub fn delta(&self) -> f64 {
        10f64.powf(self.log10_delta)
    }
    pub fn alpha(&self) -> f64 {
        self.epsilon.powf(4.0 / 3.0) / 300_000.0
    }
    pub fn h_bar(&self) -> f64 {
        10f64.powf(self.log10_h_bar)
    }
}

/// Operational parameter bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub mode: ParamMode,
    pub epsilon: f64,
    pub d: usize,
    /// Walk-length cap ℓ.
    pub ell: usize,
    /// Truncation threshold ρ.
    pub rho: f64,
    /// Conductance target φ.
    pub phi: f64,
    /// Free-set fraction β.
    pub beta: f64,
    /// Phase-sampling probability δ.
    pub delta: f64,
    /// Bucket-heaviness threshold α (diagnostics only).
    pub alpha: f64,
    /// Phase cap h̄.
    pub h_bar: usize,
    pub k_candidates: Vec<usize>,
    /// Uniform draws per phase in the threshold finder.
    pub sample_count: usize,
    /// A phase is skipped when at most `gate_count / 2` draws are still active.
    pub gate_count: f64,
    /// Active draws kept for the viability test.
    pub keep_count: usize,
    pub k_selection: KSelection,
}

/// Largest value a count-like paper parameter may take before it is
/// considered unrepresentable.
const MAX_COUNT: f64 = 1e9;

pub type Overrides = BTreeMap<String, String>;

impl OracleParams {
    /// Explicit-mode defaults.
    pub fn explicit(epsilon: f64, d: usize) -> Self {
        let beta = 0.1;
        Self {
            mode: ParamMode::Explicit,
            epsilon,
            d,
            ell: 20,
            rho: 1e-3,
            phi: 0.2,
            beta,
            delta: 0.2,
            alpha: epsilon.powf(4.0 / 3.0) / 300_000.0,
            h_bar: 10,
            k_candidates: (1..=50).collect(),
            sample_count: default_sample_count(beta),
            gate_count: default_gate_count(beta),
            keep_count: default_keep_count(beta),
            k_selection: KSelection::MostCoverage,
        }
    }

    /// `⌊1/ρ⌋`, the largest support a truncated diffusion can have.
    pub fn max_support(&self) -> usize {
        (1.0 / self.rho).floor() as usize
    }

    /// Minimum number of viable draws for a candidate to qualify.
    pub fn viability_quota(&self, active: usize) -> f64 {
        12.0 * self.beta.powi(4) * active as f64
    }

    /// Minimum free-set overlap for a cluster at threshold `k` to be viable.
    pub fn viability_overlap(&self, k: usize) -> f64 {
        self.beta.powi(3) * k as f64
    }

    /// Non-leakiness conductance bound `1 / (d ℓ^{1/3})`.
    pub fn leak_conductance(&self) -> f64 {
        1.0 / (self.d as f64 * (self.ell as f64).cbrt())
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        fn bad(field: &'static str, value: impl fmt::Display, constraint: &'static str) -> ParamError {
            ParamError::Invalid { field, value: value.to_string(), constraint }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(bad("epsilon", self.epsilon, "0 < epsilon < 1"));
        }
        if self.d < 2 {
            return Err(bad("d", self.d, "d >= 2"));
        }
        if self.ell < 1 {
            return Err(bad("ell", self.ell, "ell >= 1"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(bad("rho", self.rho, "0 < rho < 1"));
        }
        if !(self.phi > 0.0 && self.phi.is_finite()) {
            return Err(bad("phi", self.phi, "phi > 0"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(bad("beta", self.beta, "0 < beta < 1"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(bad("delta", self.delta, "0 < delta <= 1"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(bad("alpha", self.alpha, "alpha >= 0"));
        }
        if self.h_bar < 1 {
            return Err(bad("h_bar", self.h_bar, "h_bar >= 1"));
        }
        let max_k = self.max_support();
        if let Some(&k) = self.k_candidates.iter().find(|&&k| k == 0 || k > max_k) {
            return Err(bad("k_candidates", k, "1 <= k <= floor(1/rho)"));
        }
        if self.sample_count < 1 {
            return Err(bad("sample_count", self.sample_count, "sample_count >= 1"));
        }
        if self.keep_count < 1 {
            return Err(bad("keep_count", self.keep_count, "keep_count >= 1"));
        }
        if !(self.gate_count >= 0.0 && self.gate_count.is_finite()) {
            return Err(bad("gate_count", self.gate_count, "gate_count >= 0"));
        }
        Ok(())
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ParamError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ParamError>
        where
            T::Err: fmt::Display,
        {
            value.trim().parse::<T>().map_err(|e| ParamError::BadValue {
                key: key.into(),
                value: value.into(),
                msg: e.to_string(),
            })
        }
        match key {
            "ell" => self.ell = num(key, value)?,
            "rho" => self.rho = num(key, value)?,
            "phi" => self.phi = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "h_bar" => self.h_bar = num(key, value)?,
            "sample_count" => self.sample_count = num(key, value)?,
            "gate_count" => self.gate_count = num(key, value)?,
            "keep_count" => self.keep_count = num(key, value)?,
            "k_selection" => {
                self.k_selection =
                    value.parse().map_err(|msg| ParamError::BadValue { key: key.into(), value: value.into(), msg })?
            }
            "k_candidates" => {
                let ks: KCandidates =
                    value.parse().map_err(|msg| ParamError::BadValue { key: key.into(), value: value.into(), msg })?;
                self.k_candidates = ks.resolve(self.max_support());
            }
            other => return Err(ParamError::UnknownKey(other.into())),
        }
        Ok(())
    }
}

/// Draws per phase: β⁻⁴, the paper's β⁻¹⁰ shifted to desk scale while keeping
/// the draw : gate : keep ratios (1 : β : β²).
pub fn default_sample_count(beta: f64) -> usize {
    beta.powi(-4).ceil() as usize
}

pub fn default_gate_count(beta: f64) -> f64 {
    beta.powi(-3)
}

pub fn default_keep_count(beta: f64) -> usize {
    beta.powi(-2).ceil() as usize
}

fn representable(field: &'static str, log10: f64, max: f64, min: f64) -> Result<f64, ParamError> {
    let v = 10f64.powf(log10);
    if v.is_finite() && v <= max && v >= min && v > 0.0 {
        Ok(v)
    } else {
        Err(ParamError::Unrepresentable { field, log10 })
    }
}

/// Builds the parameter bundle. In paper mode every field starts from the
/// asymptotic formula and overrides are applied on top; any field that is
/// still out of machine range is reported as [`ParamError::Unrepresentable`].
pub fn derive_params(
    epsilon: f64,
    d: usize,
    mode: ParamMode,
    overrides: &Overrides,
) -> Result<OracleParams, ParamError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ParamError::Invalid {
            field: "epsilon",
            value: epsilon.to_string(),
            constraint: "0 < epsilon < 1",
        });
    }
    if d < 2 {
        return Err(ParamError::Invalid { field: "d", value: d.to_string(), constraint: "d >= 2" });
    }
    let params = match mode {
        ParamMode::Explicit => {
            let mut p = OracleParams::explicit(epsilon, d);
            // k_candidates resolves against rho, so apply it last.
            for (k, v) in overrides.iter().filter(|(k, _)| k.as_str() != "k_candidates") {
                p.apply(k, v)?;
            }
            if !overrides.contains_key("sample_count") {
                p.sample_count = default_sample_count(p.beta);
            }
            if !overrides.contains_key("gate_count") {
                p.gate_count = default_gate_count(p.beta);
            }
            if !overrides.contains_key("keep_count") {
                p.keep_count = default_keep_count(p.beta);
            }
            if let Some(v) = overrides.get("k_candidates") {
                p.apply("k_candidates", v)?;
            } else {
                let max_k = p.max_support();
                p.k_candidates.retain(|&k| k <= max_k);
            }
            p
        }
        ParamMode::Paper => paper_mode(epsilon, d, overrides)?,
    };
    params.validate()?;
    Ok(params)
}

fn paper_mode(epsilon: f64, d: usize, overrides: &Overrides) -> Result<OracleParams, ParamError> {
    let pp = PaperParams::new(epsilon, d);
    let has = |k: &str| overrides.contains_key(k);
    let mut p = OracleParams::explicit(epsilon, d);
    p.mode = ParamMode::Paper;
    for (k, v) in overrides.iter().filter(|(k, _)| k.as_str() != "k_candidates") {
        p.apply(k, v)?;
    }
    if !has("ell") {
        p.ell = representable("ell", pp.log10_ell, MAX_COUNT, 1.0)?.floor() as usize;
    }
    if !has("rho") {
        p.rho = representable("rho", pp.log10_rho, 1.0, f64::MIN_POSITIVE)?;
    }
    if !has("phi") {
        p.phi = representable("phi", pp.log10_phi, f64::MAX, f64::MIN_POSITIVE)?;
    }
    if !has("beta") {
        p.beta = pp.beta();
    }
    if !has("delta") {
        p.delta = representable("delta", pp.log10_delta, 1.0, f64::MIN_POSITIVE)?;
    }
    if !has("alpha") {
        p.alpha = pp.alpha();
    }
    if !has("h_bar") {
        // Recompute from the (possibly overridden) delta.
        let log10_h_bar = if has("delta") {
            let inv = 1.0 / p.delta;
            (2.0 * inv * inv.ln()).log10()
        } else {
            pp.log10_h_bar
        };
        p.h_bar = representable("h_bar", log10_h_bar, MAX_COUNT, 0.0)?.ceil().max(1.0) as usize;
    }
    let inv_beta = 1.0 / p.beta;
    if !has("sample_count") {
        p.sample_count = representable("sample_count", 10.0 * inv_beta.log10(), MAX_COUNT, 1.0)?.ceil() as usize;
    }
    if !has("gate_count") {
        p.gate_count = representable("gate_count", 9.0 * inv_beta.log10(), MAX_COUNT, 0.0)?;
    }
    if !has("keep_count") {
        p.keep_count = representable("keep_count", 8.0 * inv_beta.log10(), MAX_COUNT, 1.0)?.ceil() as usize;
    }
    let max_k = (1.0 / p.rho).floor();
    if max_k > MAX_COUNT && !has("k_candidates") {
        return Err(ParamError::Unrepresentable { field: "k_candidates", log10: max_k.log10() });
    }
    match overrides.get("k_candidates") {
        Some(v) => p.apply("k_candidates", v)?,
        None => p.k_candidates = KCandidates::All.resolve(max_k as usize),
    }
    Ok(p)
}
