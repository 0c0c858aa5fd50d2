use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bound::BoundSpec;
use crate::functional::{default_budget, load, TuringFunctional};
use crate::infoproxy::{proxy_by_name, ComplexityProxy};
use crate::mdim::{Schedule, DEFAULT_WINDOW};
use crate::seq::{GenSpec, SequenceGen};

use super::HarnessError;

pub const MIN_EXPERIMENT_HORIZON: usize = 1024;
pub const DEFAULT_TOLERANCE: f64 = 0.1;
/// Horizon of the yield-bounded verification in reverse and sandwich runs.
pub const DEFAULT_UYB_HORIZON: u64 = 64;
pub const DEFAULT_UYB_CAP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    ForwardDpi,
    ReverseDpi,
    Sandwich,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::ForwardDpi => "forward-dpi",
            Direction::ReverseDpi => "reverse-dpi",
            Direction::Sandwich => "sandwich",
        }
    }
}

fn default_window() -> f64 {
    DEFAULT_WINDOW
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_proxy() -> String {
    "ctx".into()
}

fn default_required() -> f64 {
    1.0
}

/// One experiment. `x` and `y` are generator specs; each seed replaces their
/// `seed` parameter, so `gen:bsc?q=0.1&side=x` / `side=y` give a coupled pair
/// per seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub x: GenSpec,
    pub y: GenSpec,
    pub functional: String,
    pub direction: Direction,
    pub bound: BoundSpec,
    pub horizon: usize,
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_proxy")]
    pub proxy: String,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub schedule: Schedule,
    /// Fraction of seeds that must pass for an overall PASS.
    #[serde(default = "default_required")]
    pub required_pass_fraction: f64,
    /// Horizon of the yield-bounded verification (its uniquely-yielding
    /// clause is far costlier than the use rows, which are checked up to
    /// `horizon`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uyb_horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uyb_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
}

/// A validated config with its parts resolved.
pub struct Resolved {
    pub phi: Arc<TuringFunctional>,
    pub proxy: Box<dyn ComplexityProxy>,
    pub budget: u64,
    pub uyb_horizon: u64,
    pub uyb_cap: usize,
}

impl ExperimentConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn pair(&self, seed: u64) -> Result<(SequenceGen, SequenceGen), HarnessError> {
        let x = self.x.with_seed(seed).build()?;
        let y = self.y.with_seed(seed).build()?;
        Ok((x, y))
    }

    pub fn resolve(&self) -> Result<Resolved, HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.horizon < MIN_EXPERIMENT_HORIZON {
            return bad(format!(
                "horizon must be at least {MIN_EXPERIMENT_HORIZON}, got {}",
                self.horizon
            ));
        }
        if !(self.window > 0.0 && self.window <= 0.5) {
            return bad(format!("window must be in (0, 0.5], got {}", self.window));
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if !(self.required_pass_fraction > 0.0 && self.required_pass_fraction <= 1.0) {
            return bad(format!(
                "required_pass_fraction must be in (0, 1], got {}",
                self.required_pass_fraction
            ));
        }
        self.schedule.points(self.horizon)?;
        let (x, y) = self.pair(self.seeds[0])?;
        x.alphabet().check_same(y.alphabet())?;
        let phi = Arc::new(load(&self.functional, x.alphabet())?);
        let proxy = proxy_by_name(&self.proxy)?;
        Ok(Resolved {
            phi,
            proxy,
            budget: self.budget.unwrap_or_else(default_budget),
            uyb_horizon: self.uyb_horizon.unwrap_or(DEFAULT_UYB_HORIZON),
            uyb_cap: self.uyb_cap.unwrap_or(DEFAULT_UYB_CAP),
        })
    }

    /// Smallest number of passing seeds, out of `seeds`, that gives an
    /// overall PASS.
    pub fn required_passes(&self, seeds: usize) -> usize {
        ((self.required_pass_fraction * seeds as f64 - 1e-9).ceil() as usize).clamp(1, seeds.max(1))
    }
}
