//! Run configuration (TOML).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use sapt_exchange::asymptotics::MIN_DISTANCE;
use sapt_exchange::exchange::Formula;
use sapt_exchange::perturbation::Method;
use sapt_exchange::PrecisionContext;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Held-out distances, disjoint from the training grid.
    #[serde(default)]
    pub test: Vec<f64>,
}

impl GridSpec {
    pub fn training(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| round_r(self.start + self.step * i as f64)).collect()
    }

    /// Training and test distances, ascending.
    pub fn all(&self) -> Vec<f64> {
        let mut v = self.training();
        v.extend(self.test.iter().copied());
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// Snaps accumulated grid arithmetic to 1e-9.
fn round_r(r: f64) -> f64 {
    (r * 1e9).round() / 1e9
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MethodChoice {
    #[default]
    #[serde(rename = "HS")]
    Hs,
    #[serde(rename = "RS")]
    Rs,
    #[serde(rename = "both")]
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Hs => vec![Method::Hs],
            MethodChoice::Rs => vec![Method::Rs],
            MethodChoice::Both => vec![Method::Hs, Method::Rs],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaChoice {
    #[default]
    Volume,
    Surface,
    Both,
}

impl FormulaChoice {
    pub fn formulas(self) -> Vec<Formula> {
        match self {
            FormulaChoice::Volume => vec![Formula::Volume],
            FormulaChoice::Surface => vec![Formula::Surface],
            FormulaChoice::Both => vec![Formula::Volume, Formula::Surface],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitOptions {
    /// Fixed degree; when absent the degree is chosen on the test set.
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default = "default_candidates")]
    pub candidates: Vec<usize>,
    /// Number of `w_k` fitted when both methods are present.
    #[serde(default = "default_wk_terms")]
    pub wk_terms: usize,
}

fn default_candidates() -> Vec<usize> {
    (4..=10).collect()
}

fn default_wk_terms() -> usize {
    4
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { degree: None, candidates: default_candidates(), wk_terms: default_wk_terms() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseOptions {
    pub r: f64,
    pub omega: u32,
    /// Axis points for the local energy, placed at cell midpoints of (-1, 1).
    #[serde(default = "default_eta_points")]
    pub eta_points: usize,
}

fn default_eta_points() -> usize {
    40
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub omega: Vec<u32>,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default)]
    pub formula: FormulaChoice,
    /// HS order cap and number of RS orders generated.
    #[serde(default = "default_max_order")]
    pub max_order: usize,
    /// Fixed orders reported besides the converged value.
    #[serde(default)]
    pub orders: Vec<usize>,
    /// Also report the converged value.
    #[serde(default = "default_true")]
    pub converged: bool,
    #[serde(default)]
    pub digits: Option<u32>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_true")]
    pub cache: bool,
    #[serde(default)]
    pub fit: FitOptions,
    #[serde(default)]
    pub diagnose: Option<DiagnoseOptions>,
}

fn default_max_order() -> usize {
    200
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing run configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<(Self, String)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        Ok((cfg, text))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let g = &self.grid;
        if !(g.step > 0.0) || !(g.start <= g.stop) {
            bail!("grid needs start <= stop and a positive step");
        }
        if g.start < MIN_DISTANCE || g.test.iter().any(|r| *r < MIN_DISTANCE) {
            bail!("all distances must be at least {MIN_DISTANCE}");
        }
        let train = g.training();
        if let Some(r) = g.test.iter().find(|t| train.iter().any(|r| (*r - **t).abs() < 1e-9)) {
            bail!("test point {r} lies on the training grid");
        }
        if self.omega.is_empty() {
            bail!("omega ladder is empty");
        }
        if self.omega.windows(2).any(|w| w[1] != w[0] + 1) {
            bail!("omega ladder must be consecutive and ascending");
        }
        if !self.converged && self.orders.is_empty() {
            bail!("nothing to compute: no orders and converged = false");
        }
        if self.max_order == 0 {
            bail!("max_order must be positive");
        }
        if let Some(d) = self.digits {
            PrecisionContext::new(d)?;
        }
        if self.fit.candidates.is_empty() && self.fit.degree.is_none() {
            bail!("fit needs a degree or candidate degrees");
        }
        if let Some(d) = &self.diagnose {
            if d.r < MIN_DISTANCE || d.eta_points == 0 {
                bail!("diagnose needs R >= {MIN_DISTANCE} and at least one axis point");
            }
        }
        Ok(())
    }

    /// Working precision at distance `r`.
    pub fn context(&self, r: f64) -> PrecisionContext {
        match self.digits {
            Some(d) => PrecisionContext::new(d).expect("validated"),
            None => PrecisionContext::for_distance(r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
omega = [2]
[grid]
start = 10.0
stop = 10.0
step = 1.0
"#;

    #[test]
    fn minimal_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.grid.training(), vec![10.0]);
        assert_eq!(c.method, MethodChoice::Hs);
        assert_eq!(c.formula, FormulaChoice::Volume);
        assert!(c.cache);
        assert_eq!(c.context(10.0).digits(), 64);
    }

    #[test]
    fn desk_grid() {
        let g = GridSpec { start: 60.0, stop: 150.0, step: 6.0, test: vec![65.0, 145.0] };
        let t = g.training();
        assert_eq!(t.len(), 16);
        assert_eq!(t[15], 150.0);
        assert_eq!(g.all().len(), 18);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            MINIMAL.replace("omega = [2]", "omega = [2, 4]"),
            MINIMAL.replace("start = 10.0", "start = 3.0"),
            MINIMAL.replace("step = 1.0", "step = 1.0\ntest = [10.0]"),
            MINIMAL.replace("omega = [2]", "omega = [2]\nmystery = 1"),
            MINIMAL.replace("omega = [2]", "omega = [2]\ndigits = 8"),
        ];
        for text in bad {
            assert!(RunConfig::parse(&text).is_err(), "{text}");
        }
    }

    #[test]
    fn shipped_configs_parse() {
        for name in ["desk.toml", "full-scale.toml", "minimal.toml"] {
            let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
            RunConfig::load(&path).unwrap();
        }
    }
}
