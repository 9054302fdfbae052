//! Flat-key run configuration: `key = value` lines, `#` comments, strict
//! errors with line numbers. Command-line flags override file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub group_file: Option<PathBuf>,
    pub spectral_file: Option<PathBuf>,
    pub x: Option<f64>,
    pub x_max: Option<f64>,
    pub points: usize,
    pub y_policy: YPolicy,
    pub r: usize,
    pub delta: Option<f64>,
    pub spacing: Spacing,
    pub max_word_len: usize,
    pub prune_margin: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub quad_tol: f64,
    pub oracle_tol: f64,
    pub huber_tol: f64,
    pub period_sum_constant: Option<f64>,
    pub vol: Option<f64>,
    pub nu: f64,
    pub bench_t_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Equal,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YPolicy {
    /// Y = X^(2/3), the error-balancing default.
    TwoThirds,
    Fixed(f64),
}

impl YPolicy {
    pub fn width(&self, x: f64) -> f64 {
        match self {
            YPolicy::TwoThirds => x.powf(2.0 / 3.0),
            YPolicy::Fixed(y) => *y,
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        if text == "x23" {
            return Ok(YPolicy::TwoThirds);
        }
        if let Some(v) = text.strip_prefix("fixed:") {
            let y: f64 = v
                .parse()
                .map_err(|_| format!("cannot parse fixed width {v:?}"))?;
            if y <= 0.0 {
                return Err("fixed smoothing width must be positive".into());
            }
            return Ok(YPolicy::Fixed(y));
        }
        Err(format!("unknown y-policy {text:?}; expected x23 or fixed:<width>"))
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            group_file: None,
            spectral_file: None,
            x: None,
            x_max: None,
            points: 50,
            y_policy: YPolicy::TwoThirds,
            r: 64,
            delta: None,
            spacing: Spacing::Equal,
            max_word_len: 40,
            prune_margin: 16.0,
            seed: 0,
            out_dir: PathBuf::from("."),
            quad_tol: 1e-9,
            oracle_tol: 1e-5,
            huber_tol: 1e-4,
            period_sum_constant: None,
            vol: None,
            nu: 1.0,
            bench_t_max: 32.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut cfg = RunConfig::default();
        let base = path.parent().unwrap_or(Path::new("."));
        let mut seen = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(format!("line {line_no}: expected key = value"))?;
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            if seen.insert(key.to_string(), line_no).is_some() {
                return Err(format!("line {line_no}: duplicate key {key:?}"));
            }
            let err = |what: &str| format!("line {line_no}: cannot parse {key} = {value:?} as {what}");
            match key {
                "group_file" => cfg.group_file = Some(base.join(value)),
                "spectral_file" => cfg.spectral_file = Some(base.join(value)),
                "x" => cfg.x = Some(value.parse().map_err(|_| err("a number"))?),
                "x_max" => cfg.x_max = Some(value.parse().map_err(|_| err("a number"))?),
                "points" => cfg.points = value.parse().map_err(|_| err("an integer"))?,
                "y_policy" => cfg.y_policy = YPolicy::parse(value).map_err(|e| format!("line {line_no}: {e}"))?,
                "r" => cfg.r = value.parse().map_err(|_| err("an integer"))?,
                "delta" => cfg.delta = Some(value.parse().map_err(|_| err("a number"))?),
                "spacing" => {
                    cfg.spacing = match value {
                        "equal" => Spacing::Equal,
                        "poisson" => Spacing::Poisson,
                        other => {
                            return Err(format!(
                                "line {line_no}: unknown spacing {other:?}; expected equal or poisson"
                            ))
                        }
                    }
                }
                "max_word_len" => cfg.max_word_len = value.parse().map_err(|_| err("an integer"))?,
                "prune_margin" => cfg.prune_margin = value.parse().map_err(|_| err("a number"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| err("an integer"))?,
                "out_dir" => cfg.out_dir = base.join(value),
                "quad_tol" => cfg.quad_tol = value.parse().map_err(|_| err("a number"))?,
                "oracle_tol" => cfg.oracle_tol = value.parse().map_err(|_| err("a number"))?,
                "huber_tol" => cfg.huber_tol = value.parse().map_err(|_| err("a number"))?,
                "period_sum_constant" => {
                    cfg.period_sum_constant = Some(value.parse().map_err(|_| err("a number"))?)
                }
                "vol" => cfg.vol = Some(value.parse().map_err(|_| err("a number"))?),
                "nu" => cfg.nu = value.parse().map_err(|_| err("a number"))?,
                "bench_t_max" => cfg.bench_t_max = value.parse().map_err(|_| err("a number"))?,
                other => return Err(format!("line {line_no}: unknown key {other:?}")),
            }
        }
        Ok(cfg)
    }
}
