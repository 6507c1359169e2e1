//! Sigmoid filled function and the global search built on it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::channel::CsiView;
use crate::error::{Error, Result};
use crate::metrics::ScoreVariant;
use crate::model::{LinkBudget, PhaseConfig};

use super::local::{descend, descent_cost, local_search};
use super::objective::{check_config, GainObjective, Objective};

/// Piecewise part `f_r(dq)` of the filled function.
pub fn filled_shape(dq: f64, r: f64) -> f64 {
    if dq <= -r {
        dq + r
    } else if dq < 0.0 {
        1.0 / (1.0 + ((-6.0 / r) * (dq + r / 2.0)).exp())
    } else {
        1.0
    }
}

/// `Q_r = (1 + 1 / (1 + beta d2)) f_r(dq)` with `beta = 0` iff `dq <= -r`.
pub fn filled_from_distance(dq: f64, dist_sq: f64, r: f64) -> f64 {
    let beta = if dq <= -r { 0.0 } else { 1.0 };
    (1.0 + 1.0 / (1.0 + beta * dist_sq)) * filled_shape(dq, r)
}

/// Filled function value at `theta` around the local minimizer `center`.
///
/// `dq = q(theta) - q(center)`; the distance is the raw radian distance.
pub fn filled_value(dq: f64, theta: &PhaseConfig, center: &PhaseConfig, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("filled-function radius must be positive, got {r}")));
    }
    if theta.len() != center.len() {
        return Err(Error::Dimension("configurations differ in length".into()));
    }
    Ok(filled_from_distance(dq, theta.distance_sq(center, false), r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchBudget {
    pub r0: f64,
    pub epsilon: f64,
    /// Run the true-objective local search after every `tau`-th auxiliary search.
    pub tau: u32,
    /// Rounds per local search; `None` means `M`.
    pub i_max_loc: Option<usize>,
    /// Cap on auxiliary searches; `None` means `N((N-1)M+1)(log10(r0/eps)+1)`.
    pub i_max_filled: Option<u64>,
    /// Wrap phase differences onto `[-pi, pi]` in the filled-function distance.
    pub circular_distance: bool,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { r0: 10.0, epsilon: 0.01, tau: 10, i_max_loc: None, i_max_filled: None, circular_distance: false }
    }
}

impl SearchBudget {
    /// The accelerated variant (`tau = 10`).
    pub fn pgs() -> Self {
        Self::default()
    }

    /// The original variant (`tau = 1`).
    pub fn ogs() -> Self {
        Self { tau: 1, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.r0 > self.epsilon && self.r0.is_finite()) {
            return Err(Error::Domain(format!("need r0 > epsilon > 0, got r0={} epsilon={}", self.r0, self.epsilon)));
        }
        if self.tau == 0 {
            return Err(Error::Domain("tau must be at least 1".into()));
        }
        if self.i_max_loc == Some(0) || self.i_max_filled == Some(0) {
            return Err(Error::Domain("iteration caps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn local_rounds(&self, elements: usize) -> usize {
        self.i_max_loc.unwrap_or(elements).max(1)
    }

    fn radius_steps(&self) -> f64 {
        (self.r0 / self.epsilon).log10() + 1.0
    }

    pub fn filled_cap(&self, elements: usize, resolution: u32) -> u64 {
        self.i_max_filled.unwrap_or_else(|| {
            let n = resolution as f64;
            let per_pass = (n - 1.0) * elements as f64 + 1.0;
            (n * per_pass * self.radius_steps()).ceil() as u64
        })
    }

    pub fn eval_bound(&self, elements: usize, resolution: u32) -> Result<u64> {
        complexity_bound(resolution, elements, self.tau, self.r0, self.epsilon, self.local_rounds(elements))
    }
}

/// Closed-form evaluation budget of the global search:
/// `(N-1)M i + ((tau+1)/tau) N(N-1)M((N-1)M+1)(log10(r0/eps)+1) i`.
pub fn complexity_bound(n: u32, m: usize, tau: u32, r0: f64, epsilon: f64, i_max_loc: usize) -> Result<u64> {
    if n < 2 || tau == 0 || !(epsilon > 0.0 && r0 > epsilon) {
        return Err(Error::Domain(format!(
            "complexity bound needs N >= 2, tau >= 1 and r0 > epsilon > 0 (N={n}, tau={tau}, r0={r0}, epsilon={epsilon})"
        )));
    }
    let n = n as f64;
    let m = m as f64;
    let i = i_max_loc as f64;
    let t = tau as f64;
    let nm = (n - 1.0) * m;
    let value = nm * i + ((t + 1.0) / t) * n * nm * (nm + 1.0) * ((r0 / epsilon).log10() + 1.0) * i;
    Ok(value.ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evals: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub config: PhaseConfig,
    /// Minimized objective value at `config`.
    pub value: f64,
    /// Evaluations spent by this run.
    pub evals: u64,
    /// Incumbent improvements, in evaluation order.
    pub trace: Vec<TracePoint>,
}

impl OptResult {
    /// Writes the trace as `eval_count,incumbent_value` rows.
    pub fn write_trace<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "eval_count,incumbent_value")?;
        for p in &self.trace {
            writeln!(w, "{},{:e}", p.evals, p.value)?;
        }
        Ok(())
    }
}

/// Global search with the sigmoid filled function.
///
/// Starts with a local search from `theta0`. Each pass runs an auxiliary
/// local search on `Q_r(., theta**)` from `theta**` and from each of its
/// `(N-1)M` single-element perturbations. Every `tau`-th auxiliary result is
/// refined by a local search on the true objective. An improvement resets `r`
/// to `r0` and restarts the pass; an exhausted pass divides `r` by 10. The
/// search stops once `r < epsilon`, the auxiliary-search cap is exceeded, or
/// the next local search could exceed [`complexity_bound`].
pub fn global_search<O: Objective + ?Sized>(
    objective: &mut O,
    theta0: &PhaseConfig,
    budget: &SearchBudget,
) -> Result<OptResult> {
    budget.validate()?;
    check_config(objective, theta0)?;
    let m = objective.elements();
    let n = objective.resolution();
    let rounds = budget.local_rounds(m);
    let filled_cap = budget.filled_cap(m, n);
    let eval_cap = budget.eval_bound(m, n)?;
    let start = objective.evals();
    let used = |o: &O| o.evals() - start;

    let (mut best, mut best_q) = local_search(objective, theta0, None, rounds);
    let mut trace = vec![TracePoint { evals: used(objective), value: best_q }];
    let aux_cost = descent_cost(m, n, rounds);
    let true_cost = aux_cost - 1;

    let mut r = budget.r0;
    let mut filled_total: u64 = 0;
    let mut aux_count: u64 = 0;
    let per_pass = (n as usize - 1) * m + 1;

    'passes: loop {
        let mut improved = false;
        for p in 0..per_pass {
            let (start_cfg, start_q) = if p == 0 {
                (best.clone(), Some(best_q))
            } else {
                let idx = p - 1;
                let elem = idx / (n as usize - 1);
                let offset = (idx % (n as usize - 1)) as u32 + 1;
                let level = (best.levels()[elem] + offset) % n;
                (best.with_level(elem, level)?, None)
            };
            let refine = (aux_count + 1) % budget.tau as u64 == 0;
            let worst = aux_cost + if refine { true_cost } else { 0 };
            if used(objective) + worst > eval_cap {
                break 'passes;
            }
            let center_q = best_q;
            let aux =
                descend(objective, start_cfg, start_q, rounds, Some((&best, budget.circular_distance)), |q, d2| {
                    filled_from_distance(q - center_q, d2, r)
                });
            filled_total += 1;
            aux_count += 1;
            let (cand, cand_q) =
                if refine { local_search(objective, &aux.config, Some(aux.q), rounds) } else { (aux.config, aux.q) };
            if cand_q < best_q {
                best = cand;
                best_q = cand_q;
                r = budget.r0;
                trace.push(TracePoint { evals: used(objective), value: best_q });
                improved = true;
                break;
            }
        }
        if improved {
            if filled_total > filled_cap {
                break;
            }
            continue;
        }
        r /= 10.0;
        if r < budget.epsilon || filled_total > filled_cap {
            break;
        }
    }

    Ok(OptResult { config: best, value: best_q, evals: used(objective), trace })
}

/// Independent per-transmitter searches on `-score_tx`, each seeing only
/// its own local view.
pub fn optimize_distributed(
    views: &[CsiView],
    budget: &LinkBudget,
    variant: ScoreVariant,
    starts: &[PhaseConfig],
    search: &SearchBudget,
) -> Result<Vec<OptResult>> {
    if let Some(v) = views.first() {
        if !v.is_distributed() {
            return Err(Error::UnsupportedMode("distributed optimization needs distributed surfaces".into()));
        }
    }
    if views.len() != starts.len() {
        return Err(Error::Dimension(format!("{} views but {} start configurations", views.len(), starts.len())));
    }
    views
        .iter()
        .zip(starts)
        .enumerate()
        .map(|(tx, (view, theta0))| {
            let mut obj = GainObjective::score(view, tx, budget, variant, theta0.resolution())?;
            global_search(&mut obj, theta0, search)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use crate::search::objective::{Counting, FnObjective, TableObjective};
    use rand::Rng;

    #[test]
    fn filled_unit_values() {
        let c = PhaseConfig::new(vec![1, 2, 3], 4).unwrap();
        assert_eq!(filled_value(0.0, &c, &c, 10.0).unwrap(), 2.0);
        assert_eq!(filled_value(-10.0, &c, &c, 10.0).unwrap(), 0.0);
        assert_eq!(filled_shape(-5.0, 10.0), 0.5);
        assert!(filled_value(0.0, &c, &c, 0.0).is_err());
    }

    #[test]
    fn filled_sign_and_distance() {
        let a = PhaseConfig::new(vec![0, 0], 4).unwrap();
        let b = PhaseConfig::new(vec![2, 1], 4).unwrap();
        let d2 = a.distance_sq(&b, false);
        let v = filled_value(0.5, &b, &a, 1.0).unwrap();
        assert!((v - (1.0 + 1.0 / (1.0 + d2))).abs() < 1e-15);
        // beta = 0 in the deep branch: distance has no effect
        assert_eq!(filled_value(-3.0, &b, &a, 1.0).unwrap(), 2.0 * (-3.0 + 1.0));
    }

    #[test]
    fn bound_scaling() {
        let b32 = complexity_bound(4, 32, 10, 10.0, 0.01, 32).unwrap() as f64;
        let b64 = complexity_bound(4, 64, 10, 10.0, 0.01, 64).unwrap() as f64;
        let hand = |m: f64| 3.0 * m * m + 1.1 * 4.0 * 3.0 * m * (3.0 * m + 1.0) * 4.0 * m;
        assert!((b64 / b32 - hand(64.0) / hand(32.0)).abs() < 1e-6);
        assert!((7.0..=9.0).contains(&(b64 / b32)));
        assert!(complexity_bound(4, 8, 1, 0.01, 0.01, 8).is_err());
        // tau -> infinity leaves coefficient 1 on the second term
        let big = complexity_bound(4, 8, u32::MAX, 10.0, 0.01, 8).unwrap() as f64;
        let hand = 24.0 * 8.0 + 4.0 * 24.0 * 25.0 * 4.0 * 8.0;
        assert!(big >= hand && big <= hand + 1.0, "{big} {hand}");
    }

    #[test]
    fn bound_at_table_point() {
        // 3 * 32 * 32 + 1.1 * 4 * 96 * 97 * 4 * 32, evaluated by hand
        let hand: f64 = 3072.0 + 1.1 * 4.0 * 96.0 * 97.0 * 4.0 * 32.0;
        let b = complexity_bound(4, 32, 10, 10.0, 0.01, 32).unwrap();
        assert_eq!(b, hand.ceil() as u64);
        assert!(b as f64 >= 3.63e5);
    }

    #[test]
    fn separable_reaches_zero() {
        let mut f = FnObjective::new(5, 4, |c: &PhaseConfig| c.levels().iter().map(|&k| k as f64).sum());
        let start = PhaseConfig::new(vec![3, 1, 2, 3, 2], 4).unwrap();
        let res = global_search(&mut f, &start, &SearchBudget::default()).unwrap();
        assert_eq!(res.value, 0.0);
        assert!(res.config.levels().iter().all(|&k| k == 0));
    }

    #[test]
    fn matches_enumeration_on_random_tables() {
        let mut rng = SeedStream::new(21).rng();
        let mut hits = 0;
        for _ in 0..20 {
            let values: Vec<f64> = (0..16).map(|_| rng.random()).collect();
            let mut t = Counting::new(TableObjective::new(values.clone(), 4, 2).unwrap());
            let start = PhaseConfig::random(4, 2, &mut rng).unwrap();
            let res = global_search(&mut t, &start, &SearchBudget::ogs()).unwrap();
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            hits += (res.value == min) as u32;
            assert_eq!(res.evals, t.calls());
            assert_eq!(res.value, values[res.config.index() as usize]);
            assert!(res.evals <= SearchBudget::ogs().eval_bound(4, 2).unwrap());
        }
        assert!(hits >= 19, "{hits}/20");
    }

    #[test]
    fn trace_is_monotone_and_csv() {
        let mut rng = SeedStream::new(5).rng();
        let values: Vec<f64> = (0..4096).map(|_| rng.random()).collect();
        let mut t = TableObjective::new(values, 6, 4).unwrap();
        let res = global_search(&mut t, &PhaseConfig::zeros(6, 4).unwrap(), &SearchBudget::pgs()).unwrap();
        assert!(res.trace.windows(2).all(|w| w[1].value < w[0].value && w[1].evals >= w[0].evals));
        assert_eq!(res.trace.last().unwrap().value, res.value);
        let mut buf = Vec::new();
        res.write_trace(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), res.trace.len() + 1);
    }

    #[test]
    fn budget_validation() {
        let mut b = SearchBudget::default();
        b.tau = 0;
        assert!(b.validate().is_err());
        let b = SearchBudget { r0: 0.001, ..SearchBudget::default() };
        assert!(b.validate().is_err());
        assert_eq!(SearchBudget::default().filled_cap(8, 4), (4.0f64 * 25.0 * 4.0) as u64);
    }

    mod props {
        use super::{
            filled_from_distance, filled_shape, global_search, local_search, Counting, PhaseConfig, SearchBudget,
            TableObjective,
        };
        use proptest::prelude::*;
        use rand::Rng as _;

        proptest! {
            #[test]
            fn shape_is_monotone(r in 0.01f64..100.0, a in -200.0f64..200.0, b in -200.0f64..200.0) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(filled_shape(lo, r) <= filled_shape(hi, r));
            }

            #[test]
            fn filled_sign_follows_branch(r in 0.01f64..100.0, dq in -300.0f64..300.0, d2 in 0.0f64..1e3) {
                let v = filled_from_distance(dq, d2, r);
                if dq <= -r { prop_assert!(v <= 0.0); }
                if dq >= -r { prop_assert!(v >= 0.0); }
            }

            #[test]
            fn search_stays_on_lattice_and_within_bound(seed in any::<u64>(), m in 1usize..6, b in 1u32..3, tau in 1u32..12) {
                let n = 1u32 << b;
                let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
                let size = (n as usize).pow(m as u32);
                let values: Vec<f64> = (0..size).map(|_| rng.random::<f64>()).collect();
                let mut t = Counting::new(TableObjective::new(values.clone(), m, n).unwrap());
                let start = PhaseConfig::random(m, n, &mut rng).unwrap();
                let budget = SearchBudget { tau, ..SearchBudget::default() };
                let res = global_search(&mut t, &start, &budget).unwrap();
                prop_assert!(res.config.levels().iter().all(|&k| k < n));
                prop_assert_eq!(res.evals, t.calls());
                prop_assert!(res.evals <= budget.eval_bound(m, n).unwrap());
                prop_assert_eq!(res.value, values[res.config.index() as usize]);
                let mut t2 = TableObjective::new(values, m, n).unwrap();
                let (_, local) = local_search(&mut t2, &start, None, budget.local_rounds(m));
                prop_assert!(res.value <= local);
            }
        }
    }
}
