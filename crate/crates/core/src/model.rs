//! Geometry, radio parameters and the quantized phase lattice.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default carrier frequency (1.8 GHz).
pub const DEFAULT_CARRIER_HZ: f64 = 1.8e9;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Large-scale power gain `C0 * d^-alpha` with `C0` given in dB.
pub fn path_gain(c0_db: f64, distance: f64, exponent: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::Domain(format!("path gain needs a positive distance, got {distance}")));
    }
    Ok(db_to_linear(c0_db) * distance.powf(-exponent))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Position {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// A uniform linear array of passive reflecting elements.
///
/// Element `m` (zero based) sits at `center + m * spacing * orientation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub center: Position,
    pub element_count: usize,
    pub spacing: f64,
    pub orientation: (f64, f64),
}

impl SurfaceSpec {
    /// Surface along +x with half-wavelength spacing at `carrier_hz`.
    pub fn new(center: Position, element_count: usize, carrier_hz: f64) -> Result<Self> {
        let spacing = SPEED_OF_LIGHT / carrier_hz / 2.0;
        Self::with_geometry(center, element_count, spacing, (1.0, 0.0))
    }

    pub fn with_geometry(
        center: Position,
        element_count: usize,
        spacing: f64,
        orientation: (f64, f64),
    ) -> Result<Self> {
        if element_count == 0 {
            return Err(Error::Domain("a surface needs at least one element".into()));
        }
        if !(spacing > 0.0) {
            return Err(Error::Domain(format!("element spacing must be positive, got {spacing}")));
        }
        let norm = orientation.0.hypot(orientation.1);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Domain("orientation must be a nonzero finite vector".into()));
        }
        Ok(Self { center, element_count, spacing, orientation: (orientation.0 / norm, orientation.1 / norm) })
    }

    pub fn element_position(&self, m: usize) -> Position {
        let off = m as f64 * self.spacing;
        Position::new(self.center.x + off * self.orientation.0, self.center.y + off * self.orientation.1)
    }

    pub fn element_positions(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.element_count).map(|m| self.element_position(m))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RisMode {
    Centralized(SurfaceSpec),
    /// Surface `i` is dedicated to transmitter `i`.
    Distributed(Vec<SurfaceSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    tx: Vec<Position>,
    rx: Vec<Position>,
    mode: RisMode,
}

impl Topology {
    pub fn new(tx: Vec<Position>, rx: Vec<Position>, mode: RisMode) -> Result<Self> {
        if tx.is_empty() {
            return Err(Error::Dimension("at least one user pair is required".into()));
        }
        if tx.len() != rx.len() {
            return Err(Error::Dimension(format!("{} transmitters but {} receivers", tx.len(), rx.len())));
        }
        if let RisMode::Distributed(s) = &mode {
            if s.len() != tx.len() {
                return Err(Error::Dimension(format!("distributed mode needs {} surfaces, got {}", tx.len(), s.len())));
            }
        }
        Ok(Self { tx, rx, mode })
    }

    pub fn users(&self) -> usize {
        self.tx.len()
    }

    pub fn tx(&self) -> &[Position] {
        &self.tx
    }

    pub fn rx(&self) -> &[Position] {
        &self.rx
    }

    pub fn mode(&self) -> &RisMode {
        &self.mode
    }

    pub fn is_distributed(&self) -> bool {
        matches!(self.mode, RisMode::Distributed(_))
    }

    pub fn surfaces(&self) -> &[SurfaceSpec] {
        match &self.mode {
            RisMode::Centralized(s) => std::slice::from_ref(s),
            RisMode::Distributed(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub carrier_hz: f64,
    pub noise_dbm: f64,
    pub tx_powers_dbm: Vec<f64>,
    pub c0_db: f64,
    pub alpha_direct: f64,
    pub alpha_tx_ris: f64,
    pub alpha_ris_rx: f64,
}

impl RadioParams {
    /// Defaults used throughout the evaluation: -80 dBm noise, C0 = -30 dB,
    /// exponents 3.5 / 2 / 2.1 and a common transmit power.
    pub fn symmetric(users: usize, power_dbm: f64) -> Self {
        Self {
            carrier_hz: DEFAULT_CARRIER_HZ,
            noise_dbm: -80.0,
            tx_powers_dbm: vec![power_dbm; users],
            c0_db: -30.0,
            alpha_direct: 3.5,
            alpha_tx_ris: 2.0,
            alpha_ris_rx: 2.1,
        }
    }

    pub fn validate(&self, users: usize) -> Result<()> {
        if self.tx_powers_dbm.len() != users {
            return Err(Error::Dimension(format!("{} transmit powers for {users} users", self.tx_powers_dbm.len())));
        }
        for a in [self.alpha_direct, self.alpha_tx_ris, self.alpha_ris_rx] {
            if !(a >= 0.0) {
                return Err(Error::Domain(format!("path-loss exponent must be >= 0, got {a}")));
            }
        }
        if !(self.carrier_hz > 0.0) {
            return Err(Error::Domain("carrier frequency must be positive".into()));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn noise_watts(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    pub fn powers_watts(&self) -> Vec<f64> {
        self.tx_powers_dbm.iter().map(|&p| dbm_to_watts(p)).collect()
    }

    pub fn budget(&self) -> LinkBudget {
        LinkBudget { powers: self.powers_watts(), noise: self.noise_watts() }
    }
}

/// Powers and noise in linear watts, ready for the SINR inner loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub powers: Vec<f64>,
    pub noise: f64,
}

/// `M` phase levels on the lattice `{0, 2pi/N, ..., 2pi(N-1)/N}` with unit amplitude.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhaseConfig {
    levels: Vec<u32>,
    resolution: u32,
}

impl PhaseConfig {
    pub fn new(levels: Vec<u32>, resolution: u32) -> Result<Self> {
        check_resolution(resolution)?;
        if let Some(&bad) = levels.iter().find(|&&k| k >= resolution) {
            return Err(Error::Domain(format!("level {bad} is off the {resolution}-level lattice")));
        }
        Ok(Self { levels, resolution })
    }

    pub fn zeros(elements: usize, resolution: u32) -> Result<Self> {
        Self::new(vec![0; elements], resolution)
    }

    pub fn random<R: Rng + ?Sized>(elements: usize, resolution: u32, rng: &mut R) -> Result<Self> {
        check_resolution(resolution)?;
        let levels = (0..elements).map(|_| rng.random_range(0..resolution)).collect();
        Ok(Self { levels, resolution })
    }

    /// Decodes a base-`N` integer (element 0 is the least significant digit).
    pub fn from_index(mut index: u64, elements: usize, resolution: u32) -> Result<Self> {
        check_resolution(resolution)?;
        let n = resolution as u64;
        let levels = (0..elements)
            .map(|_| {
                let k = (index % n) as u32;
                index /= n;
                k
            })
            .collect();
        Ok(Self { levels, resolution })
    }

    pub fn index(&self) -> u64 {
        self.levels.iter().rev().fold(0u64, |acc, &k| acc * self.resolution as u64 + k as u64)
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn bits(&self) -> u32 {
        self.resolution.trailing_zeros()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, m: usize) -> Result<u32> {
        self.levels.get(m).copied().ok_or(Error::IndexOutOfRange { index: m, len: self.levels.len() })
    }

    pub fn phase_of(&self, m: usize) -> Result<f64> {
        Ok(level_phase(self.level(m)?, self.resolution))
    }

    pub fn phases(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().map(|&k| level_phase(k, self.resolution))
    }

    pub fn set_level(&mut self, m: usize, level: u32) -> Result<()> {
        if level >= self.resolution {
            return Err(Error::Domain(format!("level {level} is off the {}-level lattice", self.resolution)));
        }
        let len = self.levels.len();
        let slot = self.levels.get_mut(m).ok_or(Error::IndexOutOfRange { index: m, len })?;
        *slot = level;
        Ok(())
    }

    pub fn with_level(&self, m: usize, level: u32) -> Result<Self> {
        let mut out = self.clone();
        out.set_level(m, level)?;
        Ok(out)
    }

    /// Concatenates per-surface configurations into one global vector.
    pub fn concat(parts: &[PhaseConfig]) -> Result<Self> {
        let resolution = parts.first().map(|p| p.resolution).unwrap_or(2);
        if parts.iter().any(|p| p.resolution != resolution) {
            return Err(Error::Dimension("mixed phase resolutions".into()));
        }
        let levels = parts.iter().flat_map(|p| p.levels.iter().copied()).collect();
        Ok(Self { levels, resolution })
    }

    /// Squared Euclidean distance between the phase vectors in radians.
    ///
    /// With `circular` the per-element difference wraps onto `[-pi, pi]`.
    pub fn distance_sq(&self, other: &PhaseConfig, circular: bool) -> f64 {
        let step = 2.0 * PI / self.resolution as f64;
        let n = self.resolution as i64;
        self.levels
            .iter()
            .zip(&other.levels)
            .map(|(&a, &b)| {
                let mut d = a as i64 - b as i64;
                if circular {
                    d = d.rem_euclid(n);
                    if d > n / 2 {
                        d -= n;
                    }
                }
                let r = d as f64 * step;
                r * r
            })
            .sum()
    }
}

pub fn level_phase(level: u32, resolution: u32) -> f64 {
    2.0 * PI * level as f64 / resolution as f64
}

fn check_resolution(resolution: u32) -> Result<()> {
    if resolution < 2 || !resolution.is_power_of_two() {
        return Err(Error::Domain(format!("phase resolution must be a power of two >= 2, got {resolution}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn dbm_conversions() {
        assert!(close(dbm_to_watts(30.0), 1.0, 1e-15));
        assert!(close(dbm_to_watts(20.0), 0.1, 1e-15));
        assert!(close(dbm_to_watts(0.0), 0.001, 1e-15));
    }

    #[test]
    fn path_gain_values() {
        assert!(close(path_gain(-30.0, 1.0, 2.0).unwrap(), 1e-3, 1e-15));
        assert!(close(path_gain(0.0, 10.0, 2.0).unwrap(), 1e-2, 1e-15));
        // 50^-3.5 = 1 / (50^3 * sqrt(50))
        let hand = 1e-3 / (125_000.0 * 50f64.sqrt());
        assert!(close(path_gain(-30.0, 50.0, 3.5).unwrap(), hand, 1e-12));
        assert!(path_gain(0.0, 0.0, 2.0).is_err());
        assert!(path_gain(0.0, -1.0, 2.0).is_err());
    }

    #[test]
    fn phase_lookup() {
        let c = PhaseConfig::new(vec![0, 2], 4).unwrap();
        assert!(close(c.phase_of(1).unwrap(), PI, 1e-15));
        let c = PhaseConfig::new(vec![1], 2).unwrap();
        assert!(close(c.phase_of(0).unwrap(), PI, 1e-15));
        let c = PhaseConfig::new(vec![3], 8).unwrap();
        assert!(close(c.phase_of(0).unwrap(), 3.0 * PI / 4.0, 1e-15));
        assert!(matches!(c.phase_of(1), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn lattice_is_enforced() {
        assert!(PhaseConfig::new(vec![4], 4).is_err());
        assert!(PhaseConfig::new(vec![0], 3).is_err());
        let mut c = PhaseConfig::zeros(2, 4).unwrap();
        assert!(c.set_level(0, 4).is_err());
        assert!(c.set_level(2, 1).is_err());
        c.set_level(1, 3).unwrap();
        assert_eq!(c.levels(), &[0, 3]);
    }

    #[test]
    fn index_round_trip() {
        let c = PhaseConfig::new(vec![3, 0, 1, 2], 4).unwrap();
        let back = PhaseConfig::from_index(c.index(), 4, 4).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn surface_geometry() {
        let s = SurfaceSpec::new(Position::new(3.0, 4.0), 8, DEFAULT_CARRIER_HZ).unwrap();
        let lambda = SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ;
        assert!(close(lambda, 0.16655136555555556, 1e-12));
        let pts: Vec<_> = s.element_positions().collect();
        for w in pts.windows(2) {
            assert!(close(w[0].distance(&w[1]), lambda / 2.0, 1e-12));
            assert_eq!(w[0].y, w[1].y);
        }
        let diag = SurfaceSpec::with_geometry(Position::new(0.0, 0.0), 3, 0.5, (1.0, 1.0)).unwrap();
        let p2 = diag.element_position(2);
        assert!(close(p2.x, p2.y, 1e-15));
        assert!(close(p2.distance(&Position::new(0.0, 0.0)), 1.0, 1e-12));
        assert!(SurfaceSpec::with_geometry(Position::new(0.0, 0.0), 0, 0.5, (1.0, 0.0)).is_err());
    }

    #[test]
    fn topology_shape_checks() {
        let s = SurfaceSpec::new(Position::new(0.0, 0.0), 4, DEFAULT_CARRIER_HZ).unwrap();
        let p = Position::new(1.0, 1.0);
        assert!(Topology::new(vec![p, p], vec![p], RisMode::Centralized(s.clone())).is_err());
        assert!(Topology::new(vec![p, p], vec![p, p], RisMode::Distributed(vec![s.clone()])).is_err());
        let t = Topology::new(vec![p, p], vec![p, p], RisMode::Distributed(vec![s.clone(), s])).unwrap();
        assert_eq!(t.surfaces().len(), 2);
    }

    #[test]
    fn distance_raw_and_circular() {
        let a = PhaseConfig::new(vec![0, 0], 4).unwrap();
        let b = PhaseConfig::new(vec![3, 2], 4).unwrap();
        let step = PI / 2.0;
        assert!(close(a.distance_sq(&b, false), (9.0 + 4.0) * step * step, 1e-12));
        assert!(close(a.distance_sq(&b, true), (1.0 + 4.0) * step * step, 1e-12));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn dbm_round_trip(x in 1e-12f64..1e3) {
                let back = dbm_to_watts(watts_to_dbm(x));
                prop_assert!((back - x).abs() <= 1e-12 * x);
            }

            #[test]
            fn random_configs_stay_on_lattice(seed in any::<u64>(), m in 1usize..40, b in 1u32..5) {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let n = 1u32 << b;
                let c = PhaseConfig::random(m, n, &mut rng).unwrap();
                prop_assert!(c.levels().iter().all(|&k| k < n));
            }
        }
    }
}
