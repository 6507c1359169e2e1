//! Monte-Carlo experiment runner: scenario description, presets, CSV output
//! and the RIS placement sweep.

mod config;
mod placement;
mod presets;
mod run;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::GaSpec;
use crate::channel::{CsiFidelity, FadingSpec};
use crate::error::{Error, Result};
use crate::metrics::ScoreVariant;
use crate::model::{Position, RadioParams, DEFAULT_CARRIER_HZ};
use crate::search::SearchBudget;

pub use config::{load_scenario, scenario_from_toml, BoundConfig, BoundMode};
pub use placement::{placement_sweep, write_placement_csv, PlacementPoint, PlacementSpec};
pub use presets::{preset, PRESET_NAMES};
pub use run::{
    aggregate, format_float, no_ris_parallel_baseline, run, run_with_threads, thread_count, write_csv, ResultRow,
    TrialId, CSV_HEADER, THREADS_ENV,
};

/// Where the receivers are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Receivers {
    Fixed {
        positions: Vec<Position>,
    },
    /// Uniform in `[0, width] x [0, height]`, redrawn every trial.
    Uniform {
        width: f64,
        height: f64,
    },
}

/// Where a centralized surface sits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    Fixed {
        center: Position,
    },
    /// Uniform in `[0, width] x [0, height]`, redrawn every trial.
    Uniform {
        width: f64,
        height: f64,
    },
}

impl Placement {
    fn resolve<R: Rng + ?Sized>(&self, rng: &mut R) -> Position {
        match *self {
            Placement::Fixed { center } => center,
            Placement::Uniform { width, height } => uniform_point(width, height, rng),
        }
    }
}

fn uniform_point<R: Rng + ?Sized>(width: f64, height: f64, rng: &mut R) -> Position {
    Position::new(rng.random::<f64>() * width, rng.random::<f64>() * height)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RisLayout {
    /// One surface holding all `M` elements.
    Centralized { placement: Placement },
    /// Surface `i` serves transmitter `i` and holds `M / K` elements.
    Distributed { centers: Vec<Position> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layout {
    pub tx: Vec<Position>,
    pub rx: Receivers,
    pub ris: RisLayout,
}

impl Layout {
    pub fn users(&self) -> usize {
        self.tx.len()
    }

    pub fn is_distributed(&self) -> bool {
        matches!(self.ris, RisLayout::Distributed { .. })
    }

    fn validate(&self) -> Result<()> {
        let k = self.users();
        if k == 0 {
            return Err(Error::Config("layout needs at least one transmitter".into()));
        }
        match &self.rx {
            Receivers::Fixed { positions } if positions.len() != k => {
                return Err(Error::Config(format!("{} receivers for {k} transmitters", positions.len())));
            }
            Receivers::Uniform { width, height } if !(*width > 0.0 && *height > 0.0) => {
                return Err(Error::Config("receiver area must be positive".into()));
            }
            _ => {}
        }
        match &self.ris {
            RisLayout::Distributed { centers } if centers.len() != k => {
                Err(Error::Config(format!("{} distributed surfaces for {k} transmitters", centers.len())))
            }
            RisLayout::Centralized { placement: Placement::Uniform { width, height } }
                if !(*width > 0.0 && *height > 0.0) =>
            {
                Err(Error::Config("placement area must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Large-scale radio parameters shared by all powers of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioSpec {
    pub carrier_hz: f64,
    pub noise_dbm: f64,
    pub c0_db: f64,
    pub alpha_direct: f64,
    pub alpha_tx_ris: f64,
    pub alpha_ris_rx: f64,
}

impl Default for RadioSpec {
    fn default() -> Self {
        let r = RadioParams::symmetric(1, 0.0);
        Self {
            carrier_hz: DEFAULT_CARRIER_HZ,
            noise_dbm: r.noise_dbm,
            c0_db: r.c0_db,
            alpha_direct: r.alpha_direct,
            alpha_tx_ris: r.alpha_tx_ris,
            alpha_ris_rx: r.alpha_ris_rx,
        }
    }
}

impl RadioSpec {
    /// Parameters with every transmitter at `power_dbm`.
    pub fn params(&self, users: usize, power_dbm: f64) -> RadioParams {
        RadioParams {
            carrier_hz: self.carrier_hz,
            noise_dbm: self.noise_dbm,
            tx_powers_dbm: vec![power_dbm; users],
            c0_db: self.c0_db,
            alpha_direct: self.alpha_direct,
            alpha_tx_ris: self.alpha_tx_ris,
            alpha_ris_rx: self.alpha_ris_rx,
        }
    }
}

/// Network objective optimized over a centralized surface. Distributed
/// surfaces always optimize each transmitter's score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    #[default]
    SumRate,
    MaxMin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Filled {
        #[serde(default)]
        budget: SearchBudget,
    },
    Sr {
        #[serde(default = "default_sr_sweeps")]
        max_sweeps: usize,
    },
    Msr {
        #[serde(default = "default_msr_sweeps")]
        sweeps: usize,
    },
    Ga {
        #[serde(default)]
        spec: GaSpec,
    },
    Ses {
        #[serde(default = "default_restarts")]
        restarts: usize,
    },
    Random,
    BruteForce {
        #[serde(default = "default_cap")]
        cap: u64,
    },
    /// Interference-free direct links, no surface.
    NoRis,
}

fn default_sr_sweeps() -> usize {
    1000
}

fn default_msr_sweeps() -> usize {
    100
}

fn default_restarts() -> usize {
    100
}

fn default_cap() -> u64 {
    crate::baselines::DEFAULT_BRUTE_FORCE_CAP
}

impl MethodSpec {
    pub fn filled() -> Self {
        MethodSpec::Filled { budget: SearchBudget::pgs() }
    }

    pub fn filled_ogs() -> Self {
        MethodSpec::Filled { budget: SearchBudget::ogs() }
    }

    pub fn sr() -> Self {
        MethodSpec::Sr { max_sweeps: default_sr_sweeps() }
    }

    pub fn msr() -> Self {
        MethodSpec::Msr { sweeps: default_msr_sweeps() }
    }

    pub fn ga() -> Self {
        MethodSpec::Ga { spec: GaSpec::default() }
    }

    pub fn ses() -> Self {
        MethodSpec::Ses { restarts: default_restarts() }
    }

    /// Name used in the `method` column.
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Filled { budget } => match budget.tau {
                10 => "filled".into(),
                1 => "filled-ogs".into(),
                t => format!("filled-tau{t}"),
            },
            MethodSpec::Sr { .. } => "sr".into(),
            MethodSpec::Msr { .. } => "msr".into(),
            MethodSpec::Ga { .. } => "ga".into(),
            MethodSpec::Ses { .. } => "ses".into(),
            MethodSpec::Random => "random".into(),
            MethodSpec::BruteForce { .. } => "brute".into(),
            MethodSpec::NoRis => "no-ris".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            MethodSpec::Filled { budget } => budget.validate(),
            MethodSpec::Ga { spec } => spec.validate(),
            MethodSpec::Ses { restarts: 0 } => Err(Error::Config("ses needs at least one restart".into())),
            _ => Ok(()),
        }
    }
}

/// Alternative layout, CSI or fading evaluated alongside the base scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Layout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csi: Option<CsiFidelity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fading: Option<FadingSpec>,
}

impl Variant {
    pub fn named(name: &str) -> Self {
        Self { name: name.into(), layout: None, csi: None, fading: None }
    }

    pub fn with_layout(mut self, layout: Layout) -> Self {
        self.layout = Some(layout);
        self
    }

    pub fn with_csi(mut self, csi: CsiFidelity) -> Self {
        self.csi = Some(csi);
        self
    }
}

fn default_trials() -> usize {
    100
}

fn default_gamma() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

fn noiseless() -> CsiFidelity {
    CsiFidelity::Noiseless
}

fn default_resolution() -> u32 {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_resolution")]
    pub resolution: u32,
    pub layout: Layout,
    /// When empty the base scenario runs alone.
    #[serde(default)]
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub radio: RadioSpec,
    #[serde(default)]
    pub fading: FadingSpec,
    #[serde(default = "noiseless")]
    pub csi: CsiFidelity,
    /// Also perturb deterministic LoS links when CSI is noisy.
    #[serde(default = "default_true")]
    pub csi_include_los: bool,
    #[serde(default)]
    pub objective: ObjectiveKind,
    #[serde(default)]
    pub score_variant: ScoreVariant,
    pub methods: Vec<MethodSpec>,
    /// Total element budgets.
    pub m_values: Vec<usize>,
    pub powers_dbm: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Outage probability for the aggregate outage rows.
    #[serde(default = "default_gamma")]
    pub outage_gamma: f64,
}

/// One concrete configuration of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedVariant {
    /// Value of the `scenario` column.
    pub label: String,
    pub layout: Layout,
    pub csi: CsiFidelity,
    pub fading: FadingSpec,
}

impl Scenario {
    pub fn users(&self) -> usize {
        self.layout.users()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.resolution < 2 {
            return Err(Error::Config("resolution must be at least 2".into()));
        }
        if self.methods.is_empty() || self.m_values.is_empty() || self.powers_dbm.is_empty() {
            return Err(Error::Config("methods, m_values and powers_dbm must be non-empty".into()));
        }
        if !(self.outage_gamma > 0.0 && self.outage_gamma < 1.0) {
            return Err(Error::Config(format!("outage_gamma {} not in (0, 1)", self.outage_gamma)));
        }
        for m in &self.methods {
            m.validate()?;
        }
        let mut labels: Vec<String> = self.methods.iter().map(MethodSpec::label).collect();
        labels.sort();
        labels.dedup();
        if labels.len() != self.methods.len() {
            return Err(Error::Config("method labels must be unique".into()));
        }
        for v in self.variants() {
            v.layout.validate()?;
            v.fading.validate()?;
            if v.layout.users() != self.users() {
                return Err(Error::Config(format!("variant {} changes the number of users", v.label)));
            }
            let k = v.layout.users();
            for &m in &self.m_values {
                if m == 0 {
                    return Err(Error::Config("element budgets must be positive".into()));
                }
                if v.layout.is_distributed() && m % k != 0 {
                    return Err(Error::Config(format!("budget {m} does not split over {k} distributed surfaces")));
                }
            }
        }
        Ok(())
    }

    /// The base scenario, or one entry per variant.
    pub fn variants(&self) -> Vec<ResolvedVariant> {
        if self.variants.is_empty() {
            return vec![ResolvedVariant {
                label: self.name.clone(),
                layout: self.layout.clone(),
                csi: self.csi,
                fading: self.fading.clone(),
            }];
        }
        self.variants
            .iter()
            .map(|v| ResolvedVariant {
                label: format!("{}:{}", self.name, v.name),
                layout: v.layout.clone().unwrap_or_else(|| self.layout.clone()),
                csi: v.csi.unwrap_or(self.csi),
                fading: v.fading.clone().unwrap_or_else(|| self.fading.clone()),
            })
            .collect()
    }
}
