//! TOML scan configuration: parsing, validation and emission.
//!
//! The file is a set of flat tables. `[scenario]` is required; exactly one
//! of `[point]`, `[grid]`, `[threshold]` picks the mode; `[finite_size]`
//! and `[output]` are optional. Unknown keys anywhere are rejected.

use serde::{Deserialize, Serialize};

use cvcka::{
    correlation_multiplicity, Distribution, EcOrdering, FiniteSizeParams64, PostCkaRow, RateKind,
    ScenarioSpec64, Scheme, SqueezerSpec64, StateKind,
};

/// Configuration error with the offending key in the message.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> CResult<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: ScenarioTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<PointTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finite_size: Option<FiniteSizeTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioTable {
    /// "ghz" | "dan" | "six_mode"
    pub state: String,
    /// 1..=5, six-mode only
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<u8>,
    /// "dr" | "rr" | "mid" (required when rate = "cka")
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    /// "cka" | "post_dr" | "dr_post_rr" | "rr_post_rr" | "post_mid" |
    /// "independent_sum"
    #[serde(default = "default_rate")]
    pub rate: String,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "one")]
    pub zeta: f64,
    pub v: f64,
    #[serde(default)]
    pub v_n: f64,
}

fn default_rate() -> String {
    "cka".into()
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointTable {
    pub t: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridTable {
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdTable {
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    #[serde(default = "default_eps_hi")]
    pub eps_hi: f64,
    #[serde(default = "default_eps_tol")]
    pub eps_tol: f64,
}

fn default_eps_hi() -> f64 {
    1.0
}

fn default_eps_tol() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSizeTable {
    pub n_total: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_key: Option<u64>,
    /// Correlation multiplicity; computed from the scenario when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default = "default_z_conf")]
    pub z_conf: f64,
    /// "ec_before_pe" | "ec_after_pe"
    #[serde(default = "default_ordering")]
    pub ordering: String,
}

fn default_z_conf() -> f64 {
    6.5
}

fn default_ordering() -> String {
    "ec_before_pe".into()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputTable {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

/// One axis of a scan grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        (0..self.steps)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanMode {
    SinglePoint { t: f64, eps: f64 },
    Grid { t: GridAxis, eps: GridAxis },
    ThresholdCurve { t: GridAxis, eps_hi: f64, eps_tol: f64 },
}

impl ScanMode {
    pub fn name(&self) -> &'static str {
        match self {
            ScanMode::SinglePoint { .. } => "point",
            ScanMode::Grid { .. } => "grid",
            ScanMode::ThresholdCurve { .. } => "threshold",
        }
    }
}

/// Fully validated scan configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub scenario: ScenarioSpec64,
    pub rate: RateKind,
    pub mode: ScanMode,
    pub finite_size: Option<(FiniteSizeParams64, EcOrdering)>,
    pub output_path: Option<String>,
    pub seed: u64,
    /// The raw file, kept for lossless emission.
    raw: ConfigFile,
}

impl ScanConfig {
    /// Serializes back to TOML; `parse_config(emit())` round-trips.
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn emit(&self) -> String {
        toml::to_string(&self.raw).expect("config serializable")
    }
}

fn parse_state(s: &str) -> CResult<StateKind> {
    match s {
        "ghz" => Ok(StateKind::GhzLike),
        "dan" => Ok(StateKind::Dan),
        "six_mode" => Ok(StateKind::SixMode),
        other => err(format!(
            "scenario.state: unknown state \"{other}\" (expected ghz | dan | six_mode)"
        )),
    }
}

fn parse_scheme(s: &str) -> CResult<Scheme> {
    match s {
        "dr" => Ok(Scheme::Dr),
        "rr" => Ok(Scheme::Rr),
        "mid" => Ok(Scheme::Mid),
        other => err(format!(
            "scenario.scheme: unknown scheme \"{other}\" (expected dr | rr | mid)"
        )),
    }
}

fn parse_rate(s: &str) -> CResult<RateKind> {
    match s {
        "cka" => Ok(RateKind::Cka),
        "post_dr" => Ok(RateKind::PostCka(PostCkaRow::PostDr)),
        "dr_post_rr" => Ok(RateKind::PostCka(PostCkaRow::DrPostRr)),
        "rr_post_rr" => Ok(RateKind::PostCka(PostCkaRow::RrPostRr)),
        "post_mid" => Ok(RateKind::PostCka(PostCkaRow::PostMid)),
        "independent_sum" => Ok(RateKind::IndependentSum),
        other => err(format!("scenario.rate: unknown rate \"{other}\"")),
    }
}

fn scheme_for(rate: RateKind, explicit: Option<Scheme>) -> CResult<Scheme> {
    match rate {
        RateKind::Cka => explicit.map_or_else(
            || err("scenario.scheme: required when rate = \"cka\""),
            Ok,
        ),
        RateKind::PostCka(row) => Ok(match row {
            PostCkaRow::PostDr => Scheme::Dr,
            PostCkaRow::DrPostRr | PostCkaRow::RrPostRr => Scheme::Rr,
            PostCkaRow::PostMid => Scheme::Mid,
        }),
        RateKind::IndependentSum => Ok(explicit.unwrap_or(Scheme::Dr)),
    }
}

fn validate_t_axis(table: &str, min: f64, max: f64, steps: usize) -> CResult<GridAxis> {
    if !(min > 0.0 && max <= 1.0) {
        return err(format!("[{table}] t_min/t_max: t range must lie in (0, 1]"));
    }
    if min > max {
        return err(format!("[{table}] t_min ({min}) > t_max ({max})"));
    }
    if steps == 0 {
        return err(format!("[{table}] t_steps must be >= 1"));
    }
    if steps == 1 && min != max {
        return err(format!("[{table}] t_steps = 1 requires t_min == t_max"));
    }
    Ok(GridAxis {
        min,
        max,
        steps,
    })
}

/// Parses and validates a scan configuration document.
pub fn parse_config(text: &str) -> CResult<ScanConfig> {
    let raw: ConfigFile = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
    let sc = &raw.scenario;
    let state = parse_state(&sc.state)?;
    let rate = parse_rate(&sc.rate)?;
    let explicit_scheme = sc.scheme.as_deref().map(parse_scheme).transpose()?;
    let scheme = scheme_for(rate, explicit_scheme)?;
    let distribution = match (state, sc.distribution) {
        (StateKind::SixMode, Some(d @ 1..=5)) => [
            Distribution::D1,
            Distribution::D2,
            Distribution::D3,
            Distribution::D4,
            Distribution::D5,
        ][(d - 1) as usize],
        (StateKind::SixMode, Some(d)) => {
            return err(format!("scenario.distribution: {d} outside 1..=5"))
        }
        (StateKind::SixMode, None) => {
            return err("scenario.distribution: required for state = \"six_mode\"")
        }
        (_, Some(_)) => {
            return err("scenario.distribution: only valid for state = \"six_mode\"")
        }
        (_, None) => Distribution::TripartiteDefault,
    };
    let squeezer = SqueezerSpec64::new(sc.v, sc.v_n)
        .map_err(|e| ConfigError(format!("scenario.v / scenario.v_n: {e}")))?;
    let scenario = ScenarioSpec64::new(state, distribution, scheme, sc.beta, sc.zeta, squeezer)
        .map_err(|e| ConfigError(format!("scenario: {e}")))?;

    let mode_tables = [raw.point.is_some(), raw.grid.is_some(), raw.threshold.is_some()];
    if mode_tables.iter().filter(|&&b| b).count() != 1 {
        return err("exactly one of [point], [grid], [threshold] must be present");
    }
    let mode = if let Some(p) = raw.point {
        if !(p.t > 0.0 && p.t <= 1.0) {
            return err("[point] t: must lie in (0, 1]");
        }
        if p.eps < 0.0 {
            return err("[point] eps: must be non-negative");
        }
        ScanMode::SinglePoint { t: p.t, eps: p.eps }
    } else if let Some(g) = raw.grid {
        let t = validate_t_axis("grid", g.t_min, g.t_max, g.t_steps)?;
        if g.eps_min < 0.0 || g.eps_min > g.eps_max {
            return err("[grid] eps_min/eps_max: need 0 <= eps_min <= eps_max");
        }
        if g.eps_steps == 0 || (g.eps_steps == 1 && g.eps_min != g.eps_max) {
            return err("[grid] eps_steps invalid for the given eps range");
        }
        ScanMode::Grid {
            t,
            eps: GridAxis {
                min: g.eps_min,
                max: g.eps_max,
                steps: g.eps_steps,
            },
        }
    } else {
        let th = raw.threshold.unwrap();
        let t = validate_t_axis("threshold", th.t_min, th.t_max, th.t_steps)?;
        if !(th.eps_hi > 0.0) {
            return err("[threshold] eps_hi: must be positive");
        }
        if !(th.eps_tol > 0.0) {
            return err("[threshold] eps_tol: must be positive");
        }
        ScanMode::ThresholdCurve {
            t,
            eps_hi: th.eps_hi,
            eps_tol: th.eps_tol,
        }
    };

    let finite_size = match &raw.finite_size {
        None => None,
        Some(f) => {
            let ordering = match f.ordering.as_str() {
                "ec_before_pe" => EcOrdering::EcBeforePe,
                "ec_after_pe" => EcOrdering::EcAfterPe,
                other => {
                    return err(format!(
                        "finite_size.ordering: unknown ordering \"{other}\""
                    ))
                }
            };
            let k = match f.k {
                Some(k) => k,
                None => correlation_multiplicity(&scenario).map_err(|e| {
                    ConfigError(format!(
                        "finite_size.k: not given and not computable for this scenario ({e})"
                    ))
                })?,
            };
            let n_key = f.n_key.unwrap_or(f.n_total);
            let mut fs = FiniteSizeParams64::new(f.n_total, n_key, k)
                .map_err(|e| ConfigError(format!("finite_size: {e}")))?;
            if !(f.z_conf >= 0.0) {
                return err("finite_size.z_conf: must be non-negative");
            }
            fs.z_conf = f.z_conf;
            Some((fs, ordering))
        }
    };

    let (output_path, seed) = raw
        .output
        .as_ref()
        .map(|o| (o.path.clone(), o.seed))
        .unwrap_or((None, 0));

    Ok(ScanConfig {
        scenario,
        rate,
        mode,
        finite_size,
        output_path,
        seed,
        raw,
    })
}
