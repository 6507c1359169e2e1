//! End-to-end gains, SINR, rates, the per-transmitter score and outage capacity.

use num_complex::Complex64;

use crate::channel::{ChannelSet, CsiView};
use crate::error::{Error, Result};
use crate::model::{LinkBudget, PhaseConfig};

/// Unit phasors `e^{j 2 pi k / N}` for every lattice level.
pub fn phasor_table(resolution: u32) -> Vec<Complex64> {
    (0..resolution).map(|k| Complex64::from_polar(1.0, crate::model::level_phase(k, resolution))).collect()
}

/// End-to-end coefficients `e[j][i]` (Tx_j -> Rx_i) with per-surface partial sums.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveGains {
    users: usize,
    resolution: u32,
    phasors: Vec<Complex64>,
    direct: Vec<Complex64>,
    /// `partial[s][j * K + i] = g^{[s i]} Theta^{[s]} h^{[j s]}`
    partial: Vec<Vec<Complex64>>,
    levels: Vec<Vec<u32>>,
    total: Vec<Complex64>,
}

impl EffectiveGains {
    pub fn users(&self) -> usize {
        self.users
    }

    /// `e[tx][rx]`.
    pub fn get(&self, tx: usize, rx: usize) -> Complex64 {
        self.total[tx * self.users + rx]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.total
    }

    pub fn levels(&self, surface: usize) -> &[u32] {
        &self.levels[surface]
    }

    /// Changes element `m` of `surface` to `level` in O(K^2).
    pub fn update_one_element(&mut self, ch: &ChannelSet, surface: usize, m: usize, level: u32) -> Result<()> {
        let surfaces = self.levels.len();
        if surface >= surfaces {
            return Err(Error::IndexOutOfRange { index: surface, len: surfaces });
        }
        let len = self.levels[surface].len();
        if m >= len {
            return Err(Error::IndexOutOfRange { index: m, len });
        }
        if level >= self.resolution {
            return Err(Error::Domain(format!("level {level} is off the {}-level lattice", self.resolution)));
        }
        let old = self.levels[surface][m];
        if old == level {
            return Ok(());
        }
        let delta = self.phasors[level as usize] - self.phasors[old as usize];
        let k = self.users;
        for j in 0..k {
            let hj = ch.incident(surface, j)[m] * delta;
            for i in 0..k {
                let d = ch.reflective(surface, i)[m] * hj;
                self.partial[surface][j * k + i] += d;
            }
        }
        self.levels[surface][m] = level;
        self.refresh_total();
        Ok(())
    }

    fn refresh_total(&mut self) {
        self.total.copy_from_slice(&self.direct);
        for p in &self.partial {
            for (t, v) in self.total.iter_mut().zip(p) {
                *t += v;
            }
        }
    }
}

fn surface_partial(ch: &ChannelSet, s: usize, levels: &[u32], phasors: &[Complex64]) -> Vec<Complex64> {
    let k = ch.users();
    let mut out = vec![Complex64::new(0.0, 0.0); k * k];
    for j in 0..k {
        let h = ch.incident(s, j);
        for i in 0..k {
            let g = ch.reflective(s, i);
            out[j * k + i] = g.iter().zip(h).zip(levels).map(|((g, h), &l)| g * phasors[l as usize] * h).sum();
        }
    }
    out
}

fn build(ch: &ChannelSet, configs: &[&PhaseConfig]) -> Result<EffectiveGains> {
    let k = ch.users();
    let resolution = configs.first().map(|c| c.resolution()).unwrap_or(2);
    if configs.iter().any(|c| c.resolution() != resolution) {
        return Err(Error::Dimension("mixed phase resolutions".into()));
    }
    for (s, c) in configs.iter().enumerate() {
        if c.len() != ch.elements(s) {
            return Err(Error::Dimension(format!(
                "surface {s} has {} elements but the configuration has {}",
                ch.elements(s),
                c.len()
            )));
        }
    }
    let phasors = phasor_table(resolution);
    let direct: Vec<Complex64> =
        (0..k).flat_map(|j| (0..k).map(move |i| (j, i))).map(|(j, i)| ch.direct(j, i)).collect();
    let partial = configs.iter().enumerate().map(|(s, c)| surface_partial(ch, s, c.levels(), &phasors)).collect();
    let mut g = EffectiveGains {
        users: k,
        resolution,
        phasors,
        total: direct.clone(),
        direct,
        partial,
        levels: configs.iter().map(|c| c.levels().to_vec()).collect(),
    };
    g.refresh_total();
    Ok(g)
}

/// `e[j][i] = sum_m g_m^{[i]} e^{j theta_m} h_m^{[j]} + h_d^{[ji]}` for one shared surface.
pub fn effective_centralized(ch: &ChannelSet, theta: &PhaseConfig) -> Result<EffectiveGains> {
    if ch.is_distributed() {
        return Err(Error::UnsupportedMode("expected a centralized channel set".into()));
    }
    build(ch, &[theta])
}

/// Signals from Tx_j reach Rx_i through every surface.
pub fn effective_distributed(ch: &ChannelSet, thetas: &[PhaseConfig]) -> Result<EffectiveGains> {
    if !ch.is_distributed() {
        return Err(Error::UnsupportedMode("expected a distributed channel set".into()));
    }
    if thetas.len() != ch.surface_count() {
        return Err(Error::Dimension(format!("{} configurations for {} surfaces", thetas.len(), ch.surface_count())));
    }
    let refs: Vec<&PhaseConfig> = thetas.iter().collect();
    build(ch, &refs)
}

/// Dispatches on the channel mode; `configs` holds one entry per surface.
pub fn effective(ch: &ChannelSet, configs: &[PhaseConfig]) -> Result<EffectiveGains> {
    if ch.is_distributed() {
        effective_distributed(ch, configs)
    } else {
        match configs {
            [c] => effective_centralized(ch, c),
            _ => Err(Error::Dimension(format!("{} configurations for one surface", configs.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub sinr: Vec<f64>,
    pub rates: Vec<f64>,
    pub sum_rate: f64,
    pub min_rate: f64,
}

impl RateReport {
    pub fn from_sinr(sinr: Vec<f64>) -> Self {
        let rates: Vec<f64> = sinr.iter().map(|s| (1.0 + s).log2()).collect();
        let sum_rate = rates.iter().sum();
        let min_rate = rates.iter().copied().fold(f64::INFINITY, f64::min);
        Self { sinr, rates, sum_rate, min_rate }
    }
}

/// SINR of receiver `i` from a flat `e[j * K + i]` slice.
#[inline]
pub fn sinr_at(e: &[Complex64], k: usize, i: usize, budget: &LinkBudget) -> f64 {
    let mut interference = budget.noise;
    for j in (0..k).filter(|&j| j != i) {
        interference += budget.powers[j] * e[j * k + i].norm_sqr();
    }
    budget.powers[i] * e[i * k + i].norm_sqr() / interference
}

pub fn rates_from_slice(e: &[Complex64], k: usize, budget: &LinkBudget) -> RateReport {
    RateReport::from_sinr((0..k).map(|i| sinr_at(e, k, i, budget)).collect())
}

pub fn rates(gains: &EffectiveGains, budget: &LinkBudget) -> RateReport {
    rates_from_slice(&gains.total, gains.users, budget)
}

/// Which denominator the per-transmitter score uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreVariant {
    /// Noise plus caused interference.
    #[default]
    Full,
    /// Noise only.
    SnrOnly,
    /// Caused interference only.
    SirOnly,
}

/// Score of transmitter `tx` from its outgoing coefficients `u[j]` (Tx_tx -> Rx_j).
#[inline]
pub fn score_from_outgoing(u: &[Complex64], tx: usize, power: f64, noise: f64, variant: ScoreVariant) -> f64 {
    let signal = power * u[tx].norm_sqr();
    let interference: f64 = u.iter().enumerate().filter(|&(j, _)| j != tx).map(|(_, c)| power * c.norm_sqr()).sum();
    let denom = match variant {
        ScoreVariant::Full => noise + interference,
        ScoreVariant::SnrOnly => noise,
        ScoreVariant::SirOnly => interference,
    };
    signal / denom
}

/// Outgoing coefficients `g^{[tx j]} Theta^{[tx]} h^{[tx tx]} + h_d^{[tx j]}` from Tx_tx's local view.
pub fn outgoing_gains(view: &CsiView, tx: usize, theta: &PhaseConfig) -> Result<Vec<Complex64>> {
    let k = view.users();
    if tx >= k {
        return Err(Error::IndexOutOfRange { index: tx, len: k });
    }
    let surface = if view.is_distributed() { tx } else { 0 };
    let h = view.incident(surface, tx)?;
    if theta.len() != h.len() {
        return Err(Error::Dimension(format!("{} elements but configuration has {}", h.len(), theta.len())));
    }
    let phasors = phasor_table(theta.resolution());
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let g = view.reflective(surface, j)?;
        let refl: Complex64 = g.iter().zip(h).zip(theta.levels()).map(|((g, h), &l)| g * phasors[l as usize] * h).sum();
        out.push(refl + view.direct(tx, j)?);
    }
    Ok(out)
}

/// `P_i |e_ii|^2 / (sigma^2 + sum_{j != i} P_i |e_ij|^2)` evaluated on Tx_i's local CSIT.
pub fn score(
    view: &CsiView,
    tx: usize,
    theta: &PhaseConfig,
    budget: &LinkBudget,
    variant: ScoreVariant,
) -> Result<f64> {
    let u = outgoing_gains(view, tx, theta)?;
    Ok(score_from_outgoing(&u, tx, budget.powers[tx], budget.noise, variant))
}

/// Largest sample `R0` with at least `ceil((1 - gamma) n)` samples `>= R0`.
pub fn outage_capacity(samples: &[f64], gamma: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("outage probability {gamma} not in (0, 1)")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let need = (((1.0 - gamma) * n as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[n - need.min(n)])
}
