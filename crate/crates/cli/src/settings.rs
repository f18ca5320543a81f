//! Flags shared by every command, and the JSON config file that can supply them.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use pqpe_core::dpss::{Bandwidth, PaddingRule};
use serde_json::{Map, Value};

use crate::Failure;

/// Inclusive integer range written `LO..HI`, or a single value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntRange {
    pub lo: usize,
    pub hi: usize,
}

impl IntRange {
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.lo..=self.hi
    }

    pub fn single(&self, flag: &str) -> Result<usize, Failure> {
        if self.lo != self.hi {
            return Err(Failure::Usage(format!("{flag} takes a single value here, got {self}")));
        }
        Ok(self.lo)
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad integer `{t}`: {e}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        Ok(IntRange { lo, hi })
    }
}

/// Comma-separated list of numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number `{t}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(FloatList)
    }
}

/// `prolate`, `zeros`, or `interp:STRIDE`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Padding(pub PaddingRule);

impl FromStr for Padding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "prolate" => Ok(Padding(PaddingRule::Prolate)),
            "zeros" | "zero" => Ok(Padding(PaddingRule::Zero)),
            other => {
                let stride = other
                    .strip_prefix("interp:")
                    .ok_or_else(|| format!("unknown padding `{other}` (prolate, zeros, interp:STRIDE)"))?;
                let stride: usize = stride.parse().map_err(|e| format!("bad stride `{stride}`: {e}"))?;
                if stride == 0 {
                    return Err("interpolation stride must be positive".into());
                }
                Ok(Padding(PaddingRule::Interpolated { stride }))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandwidthArg(pub Bandwidth);

impl FromStr for BandwidthArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "standard" => Ok(BandwidthArg(Bandwidth::Standard)),
            "reference" => Ok(BandwidthArg(Bandwidth::Reference)),
            other => Err(format!("unknown bandwidth `{other}` (standard, reference)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    Full,
    Exact,
    Sampled,
}

impl FromStr for SimMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "full" => Ok(SimMode::Full),
            "exact" => Ok(SimMode::Exact),
            "sampled" => Ok(SimMode::Sampled),
            other => Err(format!("unknown mode `{other}` (full, exact, sampled)")),
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct Settings {
    /// Window length.
    #[arg(long = "dim", short = 'D', global = true)]
    pub dim: Option<usize>,
    /// Register size in qubits, or a range `LO..HI` for sweeps.
    #[arg(long, global = true)]
    pub n: Option<IntRange>,
    /// Failure probability; sweeps accept a comma-separated list.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<FloatList>,
    /// Confidence-interval half-width.
    #[arg(long, global = true)]
    pub d: Option<f64>,
    #[arg(long, global = true)]
    pub chi: Option<usize>,
    /// prolate | zeros | interp:STRIDE
    #[arg(long, global = true)]
    pub padding: Option<Padding>,
    /// standard | reference
    #[arg(long, global = true)]
    pub bandwidth: Option<BandwidthArg>,
    /// log2(1/ε) for rotation synthesis.
    #[arg(long = "eps-exp", global = true)]
    pub eps_exp: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub dither: Option<f64>,
    /// full | exact | sampled
    #[arg(long, global = true)]
    pub mode: Option<SimMode>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    #[arg(long, global = true)]
    pub dmin: Option<usize>,
    #[arg(long, global = true)]
    pub dmax: Option<usize>,
    /// Cost rows to emit: mps_eq | all
    #[arg(long, global = true)]
    pub rows: Option<String>,
    /// Amplitude CSV holding a window.
    #[arg(long, global = true)]
    pub window: Option<PathBuf>,
    /// Amplitude CSV holding an arbitrary state.
    #[arg(long, global = true)]
    pub state: Option<PathBuf>,
    #[arg(long, global = true)]
    pub mps: Option<PathBuf>,
    #[arg(long, global = true)]
    pub circuit: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub parallel: Option<usize>,
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn take<T: FromStr>(slot: &mut Option<T>, cfg: &Map<String, Value>, key: &str) -> Result<(), Failure>
where
    T::Err: fmt::Display,
{
    if slot.is_none() {
        if let Some(v) = cfg.get(key) {
            let text = value_text(v);
            *slot = Some(
                text.parse()
                    .map_err(|e| Failure::Usage(format!("config key `{key}`: {e}")))?,
            );
        }
    }
    Ok(())
}

const KEYS: &[&str] = &[
    "dim",
    "n",
    "delta",
    "d",
    "chi",
    "padding",
    "bandwidth",
    "eps-exp",
    "phi",
    "dither",
    "mode",
    "seed",
    "shots",
    "dmin",
    "dmax",
    "rows",
    "window",
    "state",
    "mps",
    "circuit",
    "out",
    "parallel",
];

impl Settings {
    /// Fills every flag left unset from the config file's JSON object.
    pub fn merge_config(&mut self, path: &Path) -> Result<(), Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        let Value::Object(cfg) = value else {
            return Err(Failure::Usage("config file must hold a JSON object".into()));
        };
        if let Some(k) = cfg.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Failure::Usage(format!("unknown config key `{k}`")));
        }
        take(&mut self.dim, &cfg, "dim")?;
        take(&mut self.n, &cfg, "n")?;
        if self.delta.is_none() {
            if let Some(Value::Array(items)) = cfg.get("delta") {
                let text: Vec<String> = items.iter().map(value_text).collect();
                self.delta = Some(
                    text.join(",")
                        .parse()
                        .map_err(|e| Failure::Usage(format!("config key `delta`: {e}")))?,
                );
            }
        }
        take(&mut self.delta, &cfg, "delta")?;
        take(&mut self.d, &cfg, "d")?;
        take(&mut self.chi, &cfg, "chi")?;
        take(&mut self.padding, &cfg, "padding")?;
        take(&mut self.bandwidth, &cfg, "bandwidth")?;
        take(&mut self.eps_exp, &cfg, "eps-exp")?;
        take(&mut self.phi, &cfg, "phi")?;
        take(&mut self.dither, &cfg, "dither")?;
        take(&mut self.mode, &cfg, "mode")?;
        take(&mut self.seed, &cfg, "seed")?;
        take(&mut self.shots, &cfg, "shots")?;
        take(&mut self.dmin, &cfg, "dmin")?;
        take(&mut self.dmax, &cfg, "dmax")?;
        take(&mut self.rows, &cfg, "rows")?;
        take(&mut self.window, &cfg, "window")?;
        take(&mut self.state, &cfg, "state")?;
        take(&mut self.mps, &cfg, "mps")?;
        take(&mut self.circuit, &cfg, "circuit")?;
        take(&mut self.out, &cfg, "out")?;
        take(&mut self.parallel, &cfg, "parallel")?;
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn single_delta(&self) -> Result<Option<f64>, Failure> {
        match &self.delta {
            None => Ok(None),
            Some(FloatList(v)) if v.len() == 1 => Ok(Some(v[0])),
            Some(_) => Err(Failure::Usage("--delta takes a single value here".into())),
        }
    }

    pub fn bandwidth(&self) -> Bandwidth {
        self.bandwidth.map_or(Bandwidth::Standard, |b| b.0)
    }
}

pub fn need<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, Failure> {
    v.clone()
        .ok_or_else(|| Failure::Usage(format!("missing required flag {flag}")))
}
