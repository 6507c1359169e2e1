//! Channel realizations and the CSI that optimizers get to see.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{db_to_linear, path_gain, Position, RadioParams, Topology};
use crate::rng::SeedStream;

/// Small-scale fading model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FadingSpec {
    /// Deterministic LoS Tx->RIS (centralized only), Rayleigh elsewhere.
    LosRayleigh,
    /// Rician Tx->RIS links with linear factor `kappa`, Rayleigh elsewhere.
    Rician { kappa: f64 },
    /// Nakagami magnitudes with uniform phases on every link; the direct
    /// distance follows the cosine law with angle `psi` (radians) at the RIS.
    Nakagami { m_direct: f64, m_tx_ris: f64, m_ris_rx: f64, psi: f64 },
}

impl Default for FadingSpec {
    fn default() -> Self {
        FadingSpec::LosRayleigh
    }
}

impl FadingSpec {
    pub fn rician_default() -> Self {
        FadingSpec::Rician { kappa: 2.0 }
    }

    pub fn nakagami_default() -> Self {
        FadingSpec::Nakagami { m_direct: 3.0, m_tx_ris: 1.5, m_ris_rx: 2.5, psi: 86f64.to_radians() }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FadingSpec::LosRayleigh => Ok(()),
            FadingSpec::Rician { kappa } if kappa >= 0.0 => Ok(()),
            FadingSpec::Rician { kappa } => Err(Error::Domain(format!("Rician factor {kappa} < 0"))),
            FadingSpec::Nakagami { m_direct, m_tx_ris, m_ris_rx, psi } => {
                if [m_direct, m_tx_ris, m_ris_rx].iter().any(|&m| !(m >= 0.5)) {
                    return Err(Error::Domain("Nakagami shape parameters must be >= 0.5".into()));
                }
                if !(psi > 0.0 && psi < PI) {
                    return Err(Error::Domain(format!("reflection angle {psi} not in (0, pi)")));
                }
                Ok(())
            }
        }
    }
}

/// Generation variance of every coefficient, laid out like the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub direct: Vec<f64>,
    pub incident: Vec<Vec<Vec<f64>>>,
    pub reflective: Vec<Vec<Vec<f64>>>,
    /// Tx->RIS links are deterministic LoS phasors (variance then holds `m_h^2`).
    pub incident_deterministic: bool,
}

impl ChannelStats {
    /// Mean direct-link variance, `sigma_hd^2` in a symmetric setting.
    pub fn mean_direct(&self) -> f64 {
        mean(self.direct.iter().copied())
    }

    pub fn mean_incident(&self) -> f64 {
        mean(self.incident.iter().flatten().flatten().copied())
    }

    pub fn mean_reflective(&self) -> f64 {
        mean(self.reflective.iter().flatten().flatten().copied())
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Complex channels for one coherence block.
///
/// * `direct[j * K + i]`: Tx_j -> Rx_i.
/// * `incident[s][j][m]`: Tx_j -> element m of surface s.
/// * `reflective[s][i][m]`: element m of surface s -> Rx_i.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    users: usize,
    distributed: bool,
    direct: Vec<Complex64>,
    incident: Vec<Vec<Vec<Complex64>>>,
    reflective: Vec<Vec<Vec<Complex64>>>,
    stats: ChannelStats,
}

impl ChannelSet {
    /// Builds a channel set from explicit coefficients.
    pub fn from_parts(
        users: usize,
        distributed: bool,
        direct: Vec<Complex64>,
        incident: Vec<Vec<Vec<Complex64>>>,
        reflective: Vec<Vec<Vec<Complex64>>>,
        stats: Option<ChannelStats>,
    ) -> Result<Self> {
        let surfaces = if distributed { users } else { 1 };
        if users == 0 || direct.len() != users * users {
            return Err(Error::Dimension(format!("direct matrix must be {users}x{users}")));
        }
        if incident.len() != surfaces || reflective.len() != surfaces {
            return Err(Error::Dimension(format!("expected {surfaces} surfaces")));
        }
        for s in 0..surfaces {
            let m = incident[s].first().map(Vec::len).unwrap_or(0);
            if incident[s].len() != users || reflective[s].len() != users {
                return Err(Error::Dimension(format!("surface {s} needs {users} links each way")));
            }
            if incident[s].iter().chain(&reflective[s]).any(|v| v.len() != m) {
                return Err(Error::Dimension(format!("surface {s} has ragged element vectors")));
            }
        }
        let all = direct.iter().chain(incident.iter().flatten().flatten()).chain(reflective.iter().flatten().flatten());
        if all.clone().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("non-finite channel coefficient".into()));
        }
        let stats = stats.unwrap_or_else(|| ChannelStats {
            direct: direct.iter().map(|c| c.norm_sqr()).collect(),
            incident: incident
                .iter()
                .map(|s| s.iter().map(|v| v.iter().map(|c| c.norm_sqr()).collect()).collect())
                .collect(),
            reflective: reflective
                .iter()
                .map(|s| s.iter().map(|v| v.iter().map(|c| c.norm_sqr()).collect()).collect())
                .collect(),
            incident_deterministic: false,
        });
        Ok(Self { users, distributed, direct, incident, reflective, stats })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn is_distributed(&self) -> bool {
        self.distributed
    }

    pub fn surface_count(&self) -> usize {
        self.incident.len()
    }

    pub fn elements(&self, surface: usize) -> usize {
        self.incident[surface].first().map(Vec::len).unwrap_or(0)
    }

    pub fn total_elements(&self) -> usize {
        (0..self.surface_count()).map(|s| self.elements(s)).sum()
    }

    pub fn direct(&self, tx: usize, rx: usize) -> Complex64 {
        self.direct[tx * self.users + rx]
    }

    pub fn incident(&self, surface: usize, tx: usize) -> &[Complex64] {
        &self.incident[surface][tx]
    }

    pub fn reflective(&self, surface: usize, rx: usize) -> &[Complex64] {
        &self.reflective[surface][rx]
    }

    pub fn stats(&self) -> &ChannelStats {
        &self.stats
    }

    /// Writes every coefficient as `link_type,surface,tx,rx,element,re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "link_type,surface,tx,rx,element,re,im")?;
        for j in 0..self.users {
            for i in 0..self.users {
                let c = self.direct(j, i);
                writeln!(w, "direct,,{j},{i},,{:e},{:e}", c.re, c.im)?;
            }
        }
        for (s, links) in self.incident.iter().enumerate() {
            for (j, v) in links.iter().enumerate() {
                for (m, c) in v.iter().enumerate() {
                    writeln!(w, "incident,{s},{j},,{m},{:e},{:e}", c.re, c.im)?;
                }
            }
        }
        for (s, links) in self.reflective.iter().enumerate() {
            for (i, v) in links.iter().enumerate() {
                for (m, c) in v.iter().enumerate() {
                    writeln!(w, "reflective,{s},,{i},{m},{:e},{:e}", c.re, c.im)?;
                }
            }
        }
        Ok(())
    }
}

/// Circularly-symmetric complex Gaussian with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Nakagami-m magnitude with spread `omega` and a uniform phase.
pub fn nakagami<R: Rng + ?Sized>(rng: &mut R, shape: f64, omega: f64) -> Result<Complex64> {
    let power =
        Gamma::new(shape, omega / shape).map_err(|e| Error::Domain(format!("Nakagami parameters: {e}")))?.sample(rng);
    let phase = rng.random_range(0.0..2.0 * PI);
    Ok(Complex64::from_polar(power.sqrt(), phase))
}

fn los_phasor(distance: f64, wavelength: f64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * distance / wavelength)
}

/// Draws a channel realization. Same inputs and seed give identical output.
pub fn generate(
    topology: &Topology,
    radio: &RadioParams,
    fading: &FadingSpec,
    seed: &SeedStream,
) -> Result<ChannelSet> {
    let k = topology.users();
    radio.validate(k)?;
    fading.validate()?;
    let lambda = radio.wavelength();
    let c0 = radio.c0_db;
    let distributed = topology.is_distributed();
    let surfaces = topology.surfaces();

    let mut rng_direct = seed.named("direct").rng();
    let mut rng_incident = seed.named("incident").rng();
    let mut rng_reflective = seed.named("reflective").rng();

    let mut direct = Vec::with_capacity(k * k);
    let mut direct_var = Vec::with_capacity(k * k);
    for (j, tx) in topology.tx().iter().enumerate() {
        for rx in topology.rx() {
            let (c, v) = match *fading {
                FadingSpec::Nakagami { m_direct, psi, .. } => {
                    let hub = surfaces[if distributed { j } else { 0 }].center;
                    let d = cosine_law_distance(tx, &hub, rx, psi);
                    let omega = path_gain(c0, d, radio.alpha_direct)?;
                    (nakagami(&mut rng_direct, m_direct, omega)?, omega)
                }
                _ => {
                    let var = path_gain(c0, tx.distance(rx), radio.alpha_direct)?;
                    (complex_gaussian(&mut rng_direct, var), var)
                }
            };
            direct.push(c);
            direct_var.push(v);
        }
    }

    let deterministic = !distributed && matches!(fading, FadingSpec::LosRayleigh);
    let mut incident = Vec::with_capacity(surfaces.len());
    let mut incident_var = Vec::with_capacity(surfaces.len());
    let mut reflective = Vec::with_capacity(surfaces.len());
    let mut reflective_var = Vec::with_capacity(surfaces.len());
    for surface in surfaces {
        let elems: Vec<Position> = surface.element_positions().collect();
        let mut inc = Vec::with_capacity(k);
        let mut inc_v = Vec::with_capacity(k);
        for tx in topology.tx() {
            let mut row = Vec::with_capacity(elems.len());
            let mut row_v = Vec::with_capacity(elems.len());
            for e in &elems {
                let d = tx.distance(e);
                let g = path_gain(c0, d, radio.alpha_tx_ris)?;
                let c = match *fading {
                    FadingSpec::LosRayleigh if deterministic => los_phasor(d, lambda) * g.sqrt(),
                    FadingSpec::LosRayleigh => complex_gaussian(&mut rng_incident, g),
                    FadingSpec::Rician { kappa } => {
                        let los = los_phasor(d, lambda) * (kappa / (kappa + 1.0)).sqrt();
                        let nlos = complex_gaussian(&mut rng_incident, 1.0) * (1.0 / (kappa + 1.0)).sqrt();
                        (los + nlos) * g.sqrt()
                    }
                    FadingSpec::Nakagami { m_tx_ris, .. } => nakagami(&mut rng_incident, m_tx_ris, g)?,
                };
                row.push(c);
                row_v.push(g);
            }
            inc.push(row);
            inc_v.push(row_v);
        }
        let mut refl = Vec::with_capacity(k);
        let mut refl_v = Vec::with_capacity(k);
        for rx in topology.rx() {
            let mut row = Vec::with_capacity(elems.len());
            let mut row_v = Vec::with_capacity(elems.len());
            for e in &elems {
                let g = path_gain(c0, e.distance(rx), radio.alpha_ris_rx)?;
                let c = match *fading {
                    FadingSpec::Nakagami { m_ris_rx, .. } => nakagami(&mut rng_reflective, m_ris_rx, g)?,
                    _ => complex_gaussian(&mut rng_reflective, g),
                };
                row.push(c);
                row_v.push(g);
            }
            refl.push(row);
            refl_v.push(row_v);
        }
        incident.push(inc);
        incident_var.push(inc_v);
        reflective.push(refl);
        reflective_var.push(refl_v);
    }

    Ok(ChannelSet {
        users: k,
        distributed,
        direct,
        incident,
        reflective,
        stats: ChannelStats {
            direct: direct_var,
            incident: incident_var,
            reflective: reflective_var,
            incident_deterministic: deterministic,
        },
    })
}

/// Effective Tx-Rx distance through a reflection point at angle `psi`.
pub fn cosine_law_distance(tx: &Position, hub: &Position, rx: &Position, psi: f64) -> f64 {
    let a = tx.distance(hub);
    let b = hub.distance(rx);
    (a * a + b * b - 2.0 * a * b * psi.cos()).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CsiFidelity {
    Noiseless,
    /// Channels learned at an estimation SNR of `p_db`; `+inf` is noiseless.
    NoisyP {
        p_db: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiScope {
    Global,
    LocalToTx(usize),
}

/// What an optimizer knows about the channels.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiView {
    channels: ChannelSet,
    fidelity: CsiFidelity,
    scope: CsiScope,
}

impl CsiView {
    pub fn perfect(channels: ChannelSet) -> Self {
        Self { channels, fidelity: CsiFidelity::Noiseless, scope: CsiScope::Global }
    }

    pub fn fidelity(&self) -> CsiFidelity {
        self.fidelity
    }

    pub fn scope(&self) -> CsiScope {
        self.scope
    }

    pub fn users(&self) -> usize {
        self.channels.users
    }

    pub fn is_distributed(&self) -> bool {
        self.channels.distributed
    }

    pub fn surface_count(&self) -> usize {
        self.channels.surface_count()
    }

    pub fn elements(&self, surface: usize) -> usize {
        self.channels.elements(surface)
    }

    pub fn stats(&self) -> &ChannelStats {
        &self.channels.stats
    }

    /// Full channel set. Only available with global scope.
    pub fn channels(&self) -> Result<&ChannelSet> {
        match self.scope {
            CsiScope::Global => Ok(&self.channels),
            CsiScope::LocalToTx(tx) => Err(Error::OutOfScope { tx, what: "global channel set".into() }),
        }
    }

    pub fn direct(&self, tx: usize, rx: usize) -> Result<Complex64> {
        self.check(tx, "direct link")?;
        Ok(self.channels.direct(tx, rx))
    }

    pub fn incident(&self, surface: usize, tx: usize) -> Result<&[Complex64]> {
        if let CsiScope::LocalToTx(own) = self.scope {
            if surface != own || tx != own {
                return Err(Error::OutOfScope { tx: own, what: format!("incident link Tx{tx} -> surface {surface}") });
            }
        }
        Ok(self.channels.incident(surface, tx))
    }

    pub fn reflective(&self, surface: usize, rx: usize) -> Result<&[Complex64]> {
        if let CsiScope::LocalToTx(own) = self.scope {
            if surface != own {
                return Err(Error::OutOfScope {
                    tx: own,
                    what: format!("reflective link surface {surface} -> Rx{rx}"),
                });
            }
        }
        Ok(self.channels.reflective(surface, rx))
    }

    fn check(&self, tx: usize, what: &str) -> Result<()> {
        match self.scope {
            CsiScope::LocalToTx(own) if own != tx => {
                Err(Error::OutOfScope { tx: own, what: format!("{what} from Tx{tx}") })
            }
            _ => Ok(()),
        }
    }
}

/// Adds CSI error `CN(0, Var(c) * 10^(-p/10))` to every coefficient.
///
/// Deterministic LoS links use `m_h^2` as their variance. Set `include_los`
/// to false to leave them exact.
pub fn corrupt<R: Rng + ?Sized>(truth: &ChannelSet, fidelity: CsiFidelity, include_los: bool, rng: &mut R) -> CsiView {
    let p_db = match fidelity {
        CsiFidelity::Noiseless => return CsiView::perfect(truth.clone()),
        CsiFidelity::NoisyP { p_db } if p_db == f64::INFINITY => {
            return CsiView { channels: truth.clone(), fidelity, scope: CsiScope::Global };
        }
        CsiFidelity::NoisyP { p_db } => p_db,
    };
    let scale = db_to_linear(-p_db);
    let mut ch = truth.clone();
    for (c, v) in ch.direct.iter_mut().zip(&truth.stats.direct) {
        *c += complex_gaussian(rng, v * scale);
    }
    if include_los || !truth.stats.incident_deterministic {
        for (cs, vs) in ch.incident.iter_mut().flatten().zip(truth.stats.incident.iter().flatten()) {
            for (c, v) in cs.iter_mut().zip(vs) {
                *c += complex_gaussian(rng, v * scale);
            }
        }
    }
    for (cs, vs) in ch.reflective.iter_mut().flatten().zip(truth.stats.reflective.iter().flatten()) {
        for (c, v) in cs.iter_mut().zip(vs) {
            *c += complex_gaussian(rng, v * scale);
        }
    }
    CsiView { channels: ch, fidelity, scope: CsiScope::Global }
}

/// Local CSIT of transmitter `tx` in a distributed deployment.
///
/// Keeps Tx_tx's direct links, Tx_tx -> RIS_tx and RIS_tx -> every Rx. All
/// other coefficients are zeroed; their statistics remain available.
pub fn restrict(view: &CsiView, tx: usize) -> Result<CsiView> {
    if !view.channels.distributed {
        return Err(Error::UnsupportedMode("local CSIT needs distributed surfaces".into()));
    }
    let k = view.channels.users;
    if tx >= k {
        return Err(Error::IndexOutOfRange { index: tx, len: k });
    }
    let mut ch = view.channels.clone();
    let zero = Complex64::new(0.0, 0.0);
    for j in (0..k).filter(|&j| j != tx) {
        for i in 0..k {
            ch.direct[j * k + i] = zero;
        }
    }
    for (s, links) in ch.incident.iter_mut().enumerate() {
        for (j, v) in links.iter_mut().enumerate() {
            if s != tx || j != tx {
                v.iter_mut().for_each(|c| *c = zero);
            }
        }
    }
    for (s, links) in ch.reflective.iter_mut().enumerate() {
        if s != tx {
            links.iter_mut().flatten().for_each(|c| *c = zero);
        }
    }
    Ok(CsiView { channels: ch, fidelity: view.fidelity, scope: CsiScope::LocalToTx(tx) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RisMode, SurfaceSpec, DEFAULT_CARRIER_HZ};

    fn central(m: usize) -> Topology {
        let s = SurfaceSpec::new(Position::new(3.0, 4.0), m, DEFAULT_CARRIER_HZ).unwrap();
        Topology::new(
            vec![Position::new(0.0, 0.0), Position::new(0.0, 2.0)],
            vec![Position::new(50.0, 0.0), Position::new(50.0, 2.0)],
            RisMode::Centralized(s),
        )
        .unwrap()
    }

    fn distributed(m: usize) -> Topology {
        let tx = vec![Position::new(0.0, 0.0), Position::new(0.0, 20.0)];
        let rx = vec![Position::new(40.0, 0.0), Position::new(40.0, 20.0)];
        let s = tx
            .iter()
            .map(|p| SurfaceSpec::new(Position::new(p.x + 3.0, p.y + 4.0), m, DEFAULT_CARRIER_HZ).unwrap())
            .collect();
        Topology::new(tx, rx, RisMode::Distributed(s)).unwrap()
    }

    #[test]
    fn unit_los_when_lossless() {
        let mut radio = RadioParams::symmetric(2, 20.0);
        radio.c0_db = 0.0;
        radio.alpha_direct = 0.0;
        radio.alpha_tx_ris = 0.0;
        radio.alpha_ris_rx = 0.0;
        let ch = generate(&central(8), &radio, &FadingSpec::LosRayleigh, &SeedStream::new(1)).unwrap();
        for j in 0..2 {
            for c in ch.incident(0, j) {
                assert!((c.norm() - 1.0).abs() < 1e-14);
            }
        }
        assert!(ch.stats().incident_deterministic);
    }

    #[test]
    fn generation_is_reproducible() {
        let radio = RadioParams::symmetric(2, 20.0);
        for fading in [FadingSpec::LosRayleigh, FadingSpec::rician_default(), FadingSpec::nakagami_default()] {
            let a = generate(&central(4), &radio, &fading, &SeedStream::new(9)).unwrap();
            let b = generate(&central(4), &radio, &fading, &SeedStream::new(9)).unwrap();
            let c = generate(&central(4), &radio, &fading, &SeedStream::new(10)).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
    }

    #[test]
    fn zero_distance_is_rejected() {
        let s = SurfaceSpec::new(Position::new(0.0, 0.0), 1, DEFAULT_CARRIER_HZ).unwrap();
        let t = Topology::new(vec![Position::new(0.0, 0.0)], vec![Position::new(5.0, 0.0)], RisMode::Centralized(s))
            .unwrap();
        let r = generate(&t, &RadioParams::symmetric(1, 0.0), &FadingSpec::LosRayleigh, &SeedStream::new(0));
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn dimensions_follow_topology() {
        let radio = RadioParams::symmetric(2, 20.0);
        let ch = generate(&distributed(3), &radio, &FadingSpec::LosRayleigh, &SeedStream::new(2)).unwrap();
        assert_eq!(ch.surface_count(), 2);
        assert_eq!(ch.elements(1), 3);
        assert!(!ch.stats().incident_deterministic);
        let ch = generate(&central(5), &radio, &FadingSpec::LosRayleigh, &SeedStream::new(2)).unwrap();
        assert_eq!(ch.surface_count(), 1);
        assert_eq!(ch.total_elements(), 5);
    }

    #[test]
    fn infinite_p_is_identity() {
        let radio = RadioParams::symmetric(2, 20.0);
        let ch = generate(&central(4), &radio, &FadingSpec::LosRayleigh, &SeedStream::new(3)).unwrap();
        let mut rng = SeedStream::new(4).rng();
        let v = corrupt(&ch, CsiFidelity::NoisyP { p_db: f64::INFINITY }, true, &mut rng);
        assert_eq!(v.channels().unwrap(), &ch);
    }

    #[test]
    fn los_links_can_be_left_exact() {
        let radio = RadioParams::symmetric(2, 20.0);
        let ch = generate(&central(4), &radio, &FadingSpec::LosRayleigh, &SeedStream::new(3)).unwrap();
        let mut rng = SeedStream::new(4).rng();
        let v = corrupt(&ch, CsiFidelity::NoisyP { p_db: 0.0 }, false, &mut rng);
        let seen = v.channels().unwrap();
        assert_eq!(seen.incident(0, 1), ch.incident(0, 1));
        assert_ne!(seen.reflective(0, 1), ch.reflective(0, 1));
    }

    #[test]
    fn restriction_hides_foreign_links() {
        let radio = RadioParams::symmetric(2, 20.0);
        let ch = generate(&distributed(3), &radio, &FadingSpec::LosRayleigh, &SeedStream::new(5)).unwrap();
        let local = restrict(&CsiView::perfect(ch.clone()), 0).unwrap();
        assert!(local.incident(1, 1).is_err());
        assert!(local.incident(0, 1).is_err());
        assert!(local.reflective(1, 0).is_err());
        assert!(local.direct(1, 0).is_err());
        assert!(local.channels().is_err());
        assert_eq!(local.incident(0, 0).unwrap(), ch.incident(0, 0));
        assert_eq!(local.reflective(0, 1).unwrap(), ch.reflective(0, 1));
        assert_eq!(local.direct(0, 1).unwrap(), ch.direct(0, 1));
        assert_eq!(local.stats(), ch.stats());
        let central_ch = generate(&central(2), &radio, &FadingSpec::LosRayleigh, &SeedStream::new(5)).unwrap();
        assert!(matches!(restrict(&CsiView::perfect(central_ch), 0), Err(Error::UnsupportedMode(_))));
    }

    #[test]
    fn single_user_restriction_keeps_everything() {
        let tx = vec![Position::new(0.0, 0.0)];
        let rx = vec![Position::new(30.0, 0.0)];
        let s = vec![SurfaceSpec::new(Position::new(2.0, 2.0), 4, DEFAULT_CARRIER_HZ).unwrap()];
        let t = Topology::new(tx, rx, RisMode::Distributed(s)).unwrap();
        let ch = generate(&t, &RadioParams::symmetric(1, 20.0), &FadingSpec::LosRayleigh, &SeedStream::new(1)).unwrap();
        let local = restrict(&CsiView::perfect(ch.clone()), 0).unwrap();
        assert_eq!(local.direct(0, 0).unwrap(), ch.direct(0, 0));
        assert_eq!(local.incident(0, 0).unwrap(), ch.incident(0, 0));
        assert_eq!(local.reflective(0, 0).unwrap(), ch.reflective(0, 0));
    }

    #[test]
    fn csv_dump_has_every_coefficient() {
        let radio = RadioParams::symmetric(2, 20.0);
        let ch = generate(&central(3), &radio, &FadingSpec::LosRayleigh, &SeedStream::new(5)).unwrap();
        let mut buf = Vec::new();
        ch.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 + 6 + 6);
        assert!(text.starts_with("link_type,surface,tx,rx,element,re,im\n"));
    }

    #[test]
    fn cosine_law_matches_geometry_at_zero_angle_offset() {
        let tx = Position::new(0.0, 0.0);
        let hub = Position::new(3.0, 4.0);
        let rx = Position::new(50.0, 0.0);
        let a = tx.distance(&hub);
        let b = hub.distance(&rx);
        // the true angle at the hub reproduces the Euclidean distance
        let cos_true = (a * a + b * b - 2500.0) / (2.0 * a * b);
        let d = cosine_law_distance(&tx, &hub, &rx, cos_true.acos());
        assert!((d - 50.0).abs() < 1e-9);
    }
}
