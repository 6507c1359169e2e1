//! Objectives over the phase lattice, all minimized.

use num_complex::Complex64;

use crate::channel::CsiView;
use crate::error::{Error, Result};
use crate::metrics::{phasor_table, score_from_outgoing, sinr_at, ScoreVariant};
use crate::model::{LinkBudget, PhaseConfig};

/// A function `q` on `phi_N^M` to be minimized.
///
/// Every call to [`Objective::evaluate`] or [`Objective::evaluate_move`]
/// counts as exactly one evaluation.
pub trait Objective {
    fn elements(&self) -> usize;

    fn resolution(&self) -> u32;

    fn evaluate(&mut self, config: &PhaseConfig) -> f64;

    /// Value of `base` with element `m` set to `level`.
    fn evaluate_move(&mut self, base: &PhaseConfig, m: usize, level: u32) -> f64 {
        let moved = base.with_level(m, level).expect("move stays on the lattice");
        self.evaluate(&moved)
    }

    /// Total evaluations performed so far.
    fn evals(&self) -> u64;
}

impl<O: Objective + ?Sized> Objective for &mut O {
    fn elements(&self) -> usize {
        (**self).elements()
    }

    fn resolution(&self) -> u32 {
        (**self).resolution()
    }

    fn evaluate(&mut self, config: &PhaseConfig) -> f64 {
        (**self).evaluate(config)
    }

    fn evaluate_move(&mut self, base: &PhaseConfig, m: usize, level: u32) -> f64 {
        (**self).evaluate_move(base, m, level)
    }

    fn evals(&self) -> u64 {
        (**self).evals()
    }
}

/// Checks that `config` fits the objective's dimensions.
pub fn check_config<O: Objective + ?Sized>(objective: &O, config: &PhaseConfig) -> Result<()> {
    if config.len() != objective.elements() || config.resolution() != objective.resolution() {
        return Err(Error::Dimension(format!(
            "configuration is {}x{} but the objective expects {}x{}",
            config.len(),
            config.resolution(),
            objective.elements(),
            objective.resolution()
        )));
    }
    Ok(())
}

/// Independent tally of calls made through it.
#[derive(Debug, Clone)]
pub struct Counting<O> {
    inner: O,
    calls: u64,
}

impl<O: Objective> Counting<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, calls: 0 }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: Objective> Objective for Counting<O> {
    fn elements(&self) -> usize {
        self.inner.elements()
    }

    fn resolution(&self) -> u32 {
        self.inner.resolution()
    }

    fn evaluate(&mut self, config: &PhaseConfig) -> f64 {
        self.calls += 1;
        self.inner.evaluate(config)
    }

    fn evaluate_move(&mut self, base: &PhaseConfig, m: usize, level: u32) -> f64 {
        self.calls += 1;
        self.inner.evaluate_move(base, m, level)
    }

    fn evals(&self) -> u64 {
        self.inner.evals()
    }
}

/// Wraps a closure.
pub struct FnObjective<F> {
    f: F,
    elements: usize,
    resolution: u32,
    evals: u64,
}

impl<F: FnMut(&PhaseConfig) -> f64> FnObjective<F> {
    pub fn new(elements: usize, resolution: u32, f: F) -> Self {
        Self { f, elements, resolution, evals: 0 }
    }
}

impl<F: FnMut(&PhaseConfig) -> f64> Objective for FnObjective<F> {
    fn elements(&self) -> usize {
        self.elements
    }

    fn resolution(&self) -> u32 {
        self.resolution
    }

    fn evaluate(&mut self, config: &PhaseConfig) -> f64 {
        self.evals += 1;
        (self.f)(config)
    }

    fn evals(&self) -> u64 {
        self.evals
    }
}

/// A lookup table indexed by [`PhaseConfig::index`].
#[derive(Debug, Clone)]
pub struct TableObjective {
    values: Vec<f64>,
    elements: usize,
    resolution: u32,
    evals: u64,
}

impl TableObjective {
    pub fn new(values: Vec<f64>, elements: usize, resolution: u32) -> Result<Self> {
        let size = (resolution as u64).checked_pow(elements as u32);
        if size != Some(values.len() as u64) {
            return Err(Error::Dimension(format!(
                "table of {} values for {resolution}^{elements} configurations",
                values.len()
            )));
        }
        Ok(Self { values, elements, resolution, evals: 0 })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Objective for TableObjective {
    fn elements(&self) -> usize {
        self.elements
    }

    fn resolution(&self) -> u32 {
        self.resolution
    }

    fn evaluate(&mut self, config: &PhaseConfig) -> f64 {
        self.evals += 1;
        self.values[config.index() as usize]
    }

    fn evals(&self) -> u64 {
        self.evals
    }
}

/// Network metric computed from end-to-end gains.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// `-sum_i log2(1 + SINR_i)` over gains `e[j * K + i]`.
    SumRate { users: usize, budget: LinkBudget },
    /// `-min_i log2(1 + SINR_i)`.
    MaxMin { users: usize, budget: LinkBudget },
    /// `-score_tx` over outgoing gains `u[j]`.
    Score { tx: usize, power: f64, noise: f64, variant: ScoreVariant },
}

impl Metric {
    fn width(&self) -> usize {
        match self {
            Metric::SumRate { users, .. } | Metric::MaxMin { users, .. } => users * users,
            Metric::Score { .. } => 0,
        }
    }

    #[inline]
    fn value(&self, gains: &[Complex64]) -> f64 {
        match self {
            Metric::SumRate { users, budget } => {
                -(0..*users).map(|i| (1.0 + sinr_at(gains, *users, i, budget)).log2()).sum::<f64>()
            }
            Metric::MaxMin { users, budget } => {
                let worst = (0..*users).map(|i| sinr_at(gains, *users, i, budget)).fold(f64::INFINITY, f64::min);
                -(1.0 + worst).log2()
            }
            Metric::Score { tx, power, noise, variant } => -score_from_outgoing(gains, *tx, *power, *noise, *variant),
        }
    }
}

/// Objective whose gains are affine in the element phasors:
/// `gain[l] = offset[l] + sum_m coupling[m][l] e^{j theta_m}`.
///
/// Keeps the gains of the last base configuration so single-element moves
/// cost O(width).
#[derive(Debug, Clone)]
pub struct GainObjective {
    metric: Metric,
    elements: usize,
    resolution: u32,
    width: usize,
    offset: Vec<Complex64>,
    coupling: Vec<Complex64>,
    phasors: Vec<Complex64>,
    cached_levels: Vec<u32>,
    cached_gain: Vec<Complex64>,
    cache_valid: bool,
    drift_updates: u64,
    scratch: Vec<Complex64>,
    evals: u64,
}

const REFRESH_AFTER: u64 = 1 << 14;

impl GainObjective {
    /// Builds from raw parts; `coupling` is row-major `elements x width`.
    pub fn from_parts(
        metric: Metric,
        resolution: u32,
        offset: Vec<Complex64>,
        coupling: Vec<Complex64>,
    ) -> Result<Self> {
        PhaseConfig::zeros(0, resolution)?;
        let width = offset.len();
        if metric.width() != 0 && metric.width() != width {
            return Err(Error::Dimension(format!("metric needs width {} but got {width}", metric.width())));
        }
        if width == 0 || coupling.len() % width != 0 {
            return Err(Error::Dimension("coupling rows must match the offset width".into()));
        }
        let elements = coupling.len() / width;
        Ok(Self {
            metric,
            elements,
            resolution,
            width,
            offset,
            coupling,
            phasors: phasor_table(resolution),
            cached_levels: vec![0; elements],
            cached_gain: vec![Complex64::new(0.0, 0.0); width],
            cache_valid: false,
            drift_updates: 0,
            scratch: vec![Complex64::new(0.0, 0.0); width],
            evals: 0,
        })
    }

    /// Network sum-rate over all surfaces (configurations concatenated surface by surface).
    pub fn sum_rate(view: &CsiView, budget: &LinkBudget, resolution: u32) -> Result<Self> {
        let users = view.users();
        Self::network(view, Metric::SumRate { users, budget: budget.clone() }, resolution)
    }

    /// Minimum user rate over all surfaces.
    pub fn max_min(view: &CsiView, budget: &LinkBudget, resolution: u32) -> Result<Self> {
        let users = view.users();
        Self::network(view, Metric::MaxMin { users, budget: budget.clone() }, resolution)
    }

    fn network(view: &CsiView, metric: Metric, resolution: u32) -> Result<Self> {
        let ch = view.channels()?;
        let k = ch.users();
        check_budget(&metric, k)?;
        let offset = (0..k).flat_map(|j| (0..k).map(move |i| (j, i))).map(|(j, i)| ch.direct(j, i)).collect();
        let mut coupling = Vec::with_capacity(ch.total_elements() * k * k);
        for s in 0..ch.surface_count() {
            for m in 0..ch.elements(s) {
                for j in 0..k {
                    for i in 0..k {
                        coupling.push(ch.reflective(s, i)[m] * ch.incident(s, j)[m]);
                    }
                }
            }
        }
        Self::from_parts(metric, resolution, offset, coupling)
    }

    /// Per-transmitter score using only what Tx_`tx` can see.
    pub fn score(
        view: &CsiView,
        tx: usize,
        budget: &LinkBudget,
        variant: ScoreVariant,
        resolution: u32,
    ) -> Result<Self> {
        let k = view.users();
        if tx >= k {
            return Err(Error::IndexOutOfRange { index: tx, len: k });
        }
        if budget.powers.len() != k {
            return Err(Error::Dimension(format!("{} powers for {k} users", budget.powers.len())));
        }
        let surface = if view.is_distributed() { tx } else { 0 };
        let h = view.incident(surface, tx)?;
        let g: Vec<&[Complex64]> = (0..k).map(|j| view.reflective(surface, j)).collect::<Result<_>>()?;
        let offset = (0..k).map(|j| view.direct(tx, j)).collect::<Result<Vec<_>>>()?;
        let mut coupling = Vec::with_capacity(h.len() * k);
        for (m, hm) in h.iter().enumerate() {
            for gj in &g {
                coupling.push(gj[m] * hm);
            }
        }
        let metric = Metric::Score { tx, power: budget.powers[tx], noise: budget.noise, variant };
        Self::from_parts(metric, resolution, offset, coupling)
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    /// Gains for `config` computed from scratch (not counted).
    pub fn gains(&self, config: &PhaseConfig) -> Vec<Complex64> {
        let mut out = self.offset.clone();
        for (m, &l) in config.levels().iter().enumerate() {
            let p = self.phasors[l as usize];
            let row = &self.coupling[m * self.width..(m + 1) * self.width];
            for (o, c) in out.iter_mut().zip(row) {
                *o += c * p;
            }
        }
        out
    }

    fn sync(&mut self, config: &PhaseConfig) {
        let target = config.levels();
        if self.cache_valid && self.drift_updates < REFRESH_AFTER {
            let diffs = self.cached_levels.iter().zip(target).filter(|(a, b)| a != b).count();
            if diffs == 0 {
                return;
            }
            if diffs * 4 <= self.elements {
                for m in 0..self.elements {
                    let (old, new) = (self.cached_levels[m], target[m]);
                    if old != new {
                        let delta = self.phasors[new as usize] - self.phasors[old as usize];
                        let row = &self.coupling[m * self.width..(m + 1) * self.width];
                        for (g, c) in self.cached_gain.iter_mut().zip(row) {
                            *g += c * delta;
                        }
                        self.cached_levels[m] = new;
                    }
                }
                self.drift_updates += diffs as u64;
                return;
            }
        }
        self.cached_gain = self.gains(config);
        self.cached_levels.copy_from_slice(target);
        self.cache_valid = true;
        self.drift_updates = 0;
    }
}

fn check_budget(metric: &Metric, k: usize) -> Result<()> {
    if let Metric::SumRate { budget, .. } | Metric::MaxMin { budget, .. } = metric {
        if budget.powers.len() != k {
            return Err(Error::Dimension(format!("{} powers for {k} users", budget.powers.len())));
        }
    }
    Ok(())
}

impl Objective for GainObjective {
    fn elements(&self) -> usize {
        self.elements
    }

    fn resolution(&self) -> u32 {
        self.resolution
    }

    fn evaluate(&mut self, config: &PhaseConfig) -> f64 {
        debug_assert_eq!(config.len(), self.elements);
        self.evals += 1;
        self.sync(config);
        self.metric.value(&self.cached_gain)
    }

    fn evaluate_move(&mut self, base: &PhaseConfig, m: usize, level: u32) -> f64 {
        debug_assert!(m < self.elements && level < self.resolution);
        self.evals += 1;
        self.sync(base);
        let old = self.cached_levels[m];
        if old == level {
            return self.metric.value(&self.cached_gain);
        }
        let delta = self.phasors[level as usize] - self.phasors[old as usize];
        let row = &self.coupling[m * self.width..(m + 1) * self.width];
        for ((s, g), c) in self.scratch.iter_mut().zip(&self.cached_gain).zip(row) {
            *s = g + c * delta;
        }
        self.metric.value(&self.scratch)
    }

    fn evals(&self) -> u64 {
        self.evals
    }
}
