//! Variance and probability approximations for the cascaded RIS link and the
//! resulting lower bounds on the number of RIS elements.

mod qfunc;

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::format_float;
use crate::model::{dbm_to_watts, path_gain, RadioParams};

pub use qfunc::{erfc, q_function, q_inverse};

/// Lower end of the element range the bounds are derived for.
pub const M_MINUS: u32 = 10;
/// Upper end of the element range the bounds are derived for.
pub const M_PLUS: u32 = 512;

/// Variance of `g Θ h` for uniformly random phases: `M σ_g² m_h²`.
pub fn cascaded_variance(elements: usize, sigma_g_sq: f64, m_h: f64) -> f64 {
    elements as f64 * sigma_g_sq * m_h * m_h
}

/// Lower bound on `Pr(|g Θ h| < δ/2)`: `δ² / (2πν)`, accurate for small `δ/√ν`.
pub fn small_gain_probability(delta: f64, nu: f64) -> f64 {
    delta * delta / (2.0 * PI * nu)
}

/// Lower bound on `Pr(|h_d| < δ/2)`: `(δ / (σ_hd √(2π)))²`.
pub fn direct_small_probability(delta: f64, sigma_hd: f64) -> f64 {
    let v = delta / (sigma_hd * (2.0 * PI).sqrt());
    v * v
}

/// Lower bound on `Pr(|h_d| > Δ)`: `[2 Q(Δ/σ_hd)]²`.
pub fn direct_large_probability(big_delta: f64, sigma_hd: f64) -> f64 {
    let v = 2.0 * q_function(big_delta / sigma_hd);
    v * v
}

/// Which symmetry assumptions hold for a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symmetry {
    pub equal_power: bool,
    pub equal_direct_distance: bool,
    pub equal_tx_ris_distance: bool,
    pub equal_ris_rx_distance: bool,
}

impl Symmetry {
    pub const ALL: Self = Self {
        equal_power: true,
        equal_direct_distance: true,
        equal_tx_ris_distance: true,
        equal_ris_rx_distance: true,
    };

    pub fn holds(&self) -> bool {
        self.equal_power && self.equal_direct_distance && self.equal_tx_ris_distance && self.equal_ris_rx_distance
    }
}

impl Default for Symmetry {
    fn default() -> Self {
        Self::ALL
    }
}

/// Statistics of a symmetric network feeding the element bounds.
///
/// `nu_prime` is the per-element cascaded variance; `σ_g² m_h²` for the
/// centralized surface, or the distributed analogue set through
/// [`SymmetricScenario::with_nu_prime`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricScenario {
    pub users: usize,
    pub resolution: u32,
    pub power: f64,
    pub noise: f64,
    pub sigma_hd_sq: f64,
    pub m_h: f64,
    pub sigma_g_sq: f64,
    pub nu_prime: f64,
    pub symmetry: Symmetry,
}

impl SymmetricScenario {
    pub fn new(
        users: usize,
        resolution: u32,
        power: f64,
        noise: f64,
        sigma_hd_sq: f64,
        m_h: f64,
        sigma_g_sq: f64,
    ) -> Result<Self> {
        let s = Self {
            users,
            resolution,
            power,
            noise,
            sigma_hd_sq,
            m_h,
            sigma_g_sq,
            nu_prime: sigma_g_sq * m_h * m_h,
            symmetry: Symmetry::ALL,
        };
        s.validate()?;
        Ok(s)
    }

    /// Statistics from link distances under the large-scale model of `radio`.
    pub fn from_distances(
        users: usize,
        resolution: u32,
        radio: &RadioParams,
        d_direct: f64,
        d_tx_ris: f64,
        d_ris_rx: f64,
    ) -> Result<Self> {
        let power = *radio.tx_powers_dbm.first().ok_or_else(|| Error::Domain("no transmit power given".into()))?;
        let sigma_hd_sq = path_gain(radio.c0_db, d_direct, radio.alpha_direct)?;
        let m_h = path_gain(radio.c0_db, d_tx_ris, radio.alpha_tx_ris)?.sqrt();
        let sigma_g_sq = path_gain(radio.c0_db, d_ris_rx, radio.alpha_ris_rx)?;
        let mut s =
            Self::new(users, resolution, dbm_to_watts(power), radio.noise_watts(), sigma_hd_sq, m_h, sigma_g_sq)?;
        s.symmetry.equal_power = radio.tx_powers_dbm.iter().all(|&p| p == power);
        Ok(s)
    }

    pub fn with_nu_prime(mut self, nu_prime: f64) -> Result<Self> {
        self.nu_prime = nu_prime;
        self.validate()?;
        Ok(self)
    }

    pub fn with_power(mut self, power: f64) -> Result<Self> {
        self.power = power;
        self.validate()?;
        Ok(self)
    }

    pub fn sigma_hd(&self) -> f64 {
        self.sigma_hd_sq.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(Error::Domain("at least one user is required".into()));
        }
        if self.resolution < 2 {
            return Err(Error::Domain(format!("resolution must be at least 2, got {}", self.resolution)));
        }
        let fields = [
            ("power", self.power),
            ("noise", self.noise),
            ("sigma_hd_sq", self.sigma_hd_sq),
            ("m_h", self.m_h),
            ("sigma_g_sq", self.sigma_g_sq),
            ("nu_prime", self.nu_prime),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Element range and minimization grid for the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundOptions {
    pub m_minus: u32,
    pub m_plus: u32,
    pub a_max: f64,
    pub a_step: f64,
    pub refine_tol: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self { m_minus: M_MINUS, m_plus: M_PLUS, a_max: M_PLUS as f64, a_step: 0.25, refine_tol: 1e-3 }
    }
}

impl BoundOptions {
    pub fn validate(&self) -> Result<()> {
        if self.m_plus <= self.m_minus {
            return Err(Error::Domain(format!("need m_minus < m_plus, got {} and {}", self.m_minus, self.m_plus)));
        }
        if !(self.a_step > 0.0 && self.a_max >= 0.0 && self.a_max.is_finite()) {
            return Err(Error::Domain("a grid needs a positive step and a finite nonnegative end".into()));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::Domain("refine_tol must be positive".into()));
        }
        Ok(())
    }

    /// Grid points `0, step, 2 step, ...` up to `a_max`.
    pub fn grid(&self) -> Vec<f64> {
        let count = (self.a_max / self.a_step + 1e-9).floor() as usize;
        (0..=count).map(|i| i as f64 * self.a_step).collect()
    }

    fn smallest(&self) -> u64 {
        self.m_minus as u64 + 1
    }
}

fn check_target(target: f64) -> Result<()> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::Domain(format!("target must be positive and finite, got {target}")));
    }
    Ok(())
}

/// Centralized bracket at trade-off `a`, or `None` where it is undefined.
///
/// `K² log_N[ t 2π(K-1) M⁺ν′ / ((σ_hd Q⁻¹(1/(2N^{a/(2K)})) - N^{-(M⁻-a)/(2K²)} √(π/2 M⁺ν′))² - t σ²/P) ] + a`
pub fn centralized_bracket(s: &SymmetricScenario, sinr_target: f64, a: f64, opts: &BoundOptions) -> Option<f64> {
    let k = s.users as f64;
    let n = s.resolution as f64;
    let m_plus = opts.m_plus as f64;
    let m_minus = opts.m_minus as f64;
    let qi = q_inverse(0.5 * n.powf(-a / (2.0 * k))).ok()?;
    let spread = n.powf(-(m_minus - a) / (2.0 * k * k)) * (0.5 * PI * m_plus * s.nu_prime).sqrt();
    let big_delta = s.sigma_hd() * qi - spread;
    if !(big_delta > 0.0) {
        return None;
    }
    let den = big_delta * big_delta - sinr_target * s.noise / s.power;
    if !(den > 0.0) {
        return None;
    }
    let num = sinr_target * 2.0 * PI * (k - 1.0) * m_plus * s.nu_prime;
    Some(k * k * (num / den).ln() / n.ln() + a)
}

/// Distributed bracket at trade-off `a`, or `None` where it is undefined.
///
/// `(K-1) log_N[ t (π/2)(K-1)(σ_hd² + M⁺ν′) / ((σ_hd² + M⁻ν′) Q⁻¹(1/(2N^{a/2}))² - t σ²/P) ] + a`
pub fn distributed_bracket(s: &SymmetricScenario, score_target: f64, a: f64, opts: &BoundOptions) -> Option<f64> {
    if s.users == 1 {
        return Some(a);
    }
    let k = s.users as f64;
    let n = s.resolution as f64;
    let qi = q_inverse(0.5 * n.powf(-a / 2.0)).ok()?;
    let den = (s.sigma_hd_sq + opts.m_minus as f64 * s.nu_prime) * qi * qi - s.noise / s.power * score_target;
    if !(den > 0.0) {
        return None;
    }
    let num = score_target * 0.5 * PI * (k - 1.0) * (s.sigma_hd_sq + opts.m_plus as f64 * s.nu_prime);
    Some((k - 1.0) * (num / den).ln() / n.ln() + a)
}

/// Outcome of a minimum-element computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    /// Smallest admissible element count (at least `M⁻ + 1`).
    pub m_min: u64,
    /// Minimizing trade-off parameter, within `[0, m_min]`.
    pub a_star: f64,
    /// Bracket value at `a_star`.
    pub bound_value: f64,
    /// False when the bracket is undefined on the whole grid.
    pub feasible: bool,
    /// True when `m_min` sits at the lower end of the element range.
    pub clamped: bool,
    /// Bracket on the `a` grid (`None` where undefined).
    pub grid: Vec<(f64, Option<f64>)>,
}

impl BoundResult {
    /// `a,bound` rows; undefined points are left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "a,bound")?;
        for (a, v) in &self.grid {
            match v {
                Some(v) => writeln!(out, "{},{}", format_float(*a), format_float(*v))?,
                None => writeln!(out, "{},", format_float(*a))?,
            }
        }
        Ok(())
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Smallest integer `M ≥ M⁻ + 1` with `M ≥ min_{0 ≤ a ≤ M} f(a)` (or `>`
/// when `strict`).
fn minimize<F: Fn(f64) -> Option<f64>>(f: F, strict: bool, opts: &BoundOptions) -> BoundResult {
    let grid: Vec<(f64, Option<f64>)> = opts.grid().into_iter().map(|a| (a, f(a))).collect();
    let lowest = opts.smallest();
    if grid.iter().all(|(_, v)| v.is_none()) {
        return BoundResult {
            m_min: lowest,
            a_star: f64::NAN,
            bound_value: f64::NAN,
            feasible: false,
            clamped: false,
            grid,
        };
    }
    let relaxed = |a: f64| f(a).unwrap_or(f64::INFINITY);
    let satisfied = |m: f64, v: f64| if strict { m > v } else { m >= v };

    // best (a, value) over a <= cap
    let best_up_to = |cap: f64| -> Option<(f64, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, (a, v)) in grid.iter().enumerate() {
            if *a > cap {
                break;
            }
            if let Some(v) = v {
                if best.is_none_or(|(_, b)| *v < b) {
                    best = Some((i, *v));
                }
            }
        }
        let (i, v) = best?;
        if v == f64::NEG_INFINITY {
            return Some((grid[i].0, v));
        }
        let lo = (grid[i].0 - opts.a_step).max(0.0);
        let hi = (grid[i].0 + opts.a_step).min(cap).min(opts.a_max);
        let (ra, rv) = if hi > lo { golden_min(relaxed, lo, hi, opts.refine_tol) } else { (grid[i].0, v) };
        Some(if rv < v { (ra, rv) } else { (grid[i].0, v) })
    };

    let full = opts.a_max.ceil() as u64;
    let mut m = lowest;
    loop {
        let cap = (m as f64).min(opts.a_max);
        if let Some((a, v)) = best_up_to(cap) {
            if satisfied(m as f64, v) {
                return BoundResult { m_min: m, a_star: a, bound_value: v, feasible: true, clamped: m == lowest, grid };
            }
            if m >= full {
                // the whole grid is admissible; the minimum no longer moves
                let need = if strict { v.floor() as u64 + 1 } else { v.ceil() as u64 };
                let m_min = need.max(m);
                return BoundResult { m_min, a_star: a, bound_value: v, feasible: true, clamped: false, grid };
            }
        }
        m += 1;
    }
}

/// Minimum elements of a centralized surface reaching `sinr_target` (linear)
/// at every receiver.
pub fn min_elements_centralized(s: &SymmetricScenario, sinr_target: f64, opts: &BoundOptions) -> Result<BoundResult> {
    s.validate()?;
    opts.validate()?;
    check_target(sinr_target)?;
    Ok(minimize(|a| centralized_bracket(s, sinr_target, a, opts), false, opts))
}

/// Minimum elements per distributed surface reaching `score_target` (linear).
pub fn min_elements_distributed(s: &SymmetricScenario, score_target: f64, opts: &BoundOptions) -> Result<BoundResult> {
    s.validate()?;
    opts.validate()?;
    check_target(score_target)?;
    Ok(minimize(|a| distributed_bracket(s, score_target, a, opts), true, opts))
}
