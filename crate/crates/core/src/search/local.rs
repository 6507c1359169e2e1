//! Single-element neighborhoods and best-neighbor descent.

use crate::model::PhaseConfig;

use super::objective::Objective;

/// `theta` itself followed by every single-element change, element-major and
/// level-ascending: `M (N - 1) + 1` configurations.
pub fn neighbors(theta: &PhaseConfig) -> impl Iterator<Item = PhaseConfig> + '_ {
    let n = theta.resolution();
    std::iter::once(theta.clone()).chain((0..theta.len()).flat_map(move |m| {
        let current = theta.levels()[m];
        (0..n).filter(move |&l| l != current).map(move |l| theta.with_level(m, l).expect("level below resolution"))
    }))
}

/// Outcome of one descent.
#[derive(Debug, Clone, PartialEq)]
pub struct Descent {
    pub config: PhaseConfig,
    /// Value of the descended function at `config`.
    pub key: f64,
    /// True objective value at `config`.
    pub q: f64,
    pub rounds: usize,
}

/// Worst-case evaluations of one descent (including the start point).
pub fn descent_cost(elements: usize, resolution: u32, rounds: usize) -> u64 {
    1 + (resolution as u64 - 1) * elements as u64 * rounds as u64
}

/// Best-neighbor descent on `key(q, dist_sq)`.
///
/// Each round scans all single-element moves of the incumbent and moves to
/// the best one if it is strictly better; ties keep the first found.
/// `dist_sq` is the squared distance of the candidate from `center` (0
/// without a center). Stops after a round without change or `max_rounds`.
pub(crate) fn descend<O, K>(
    objective: &mut O,
    start: PhaseConfig,
    start_q: Option<f64>,
    max_rounds: usize,
    center: Option<(&PhaseConfig, bool)>,
    key: K,
) -> Descent
where
    O: Objective + ?Sized,
    K: Fn(f64, f64) -> f64,
{
    let n = start.resolution();
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let elem_d2 = |m: usize, level: u32| -> f64 {
        match center {
            None => 0.0,
            Some((c, circular)) => {
                let mut d = level as i64 - c.levels()[m] as i64;
                if circular {
                    d = d.rem_euclid(n as i64);
                    if d > n as i64 / 2 {
                        d -= n as i64;
                    }
                }
                let r = d as f64 * step;
                r * r
            }
        }
    };

    let mut config = start;
    let mut dist: f64 = config.levels().iter().enumerate().map(|(m, &l)| elem_d2(m, l)).sum();
    let mut q = match start_q {
        Some(q) => q,
        None => objective.evaluate(&config),
    };
    let mut best = key(q, dist);
    let mut rounds = 0;
    while rounds < max_rounds {
        rounds += 1;
        let mut pick: Option<(usize, u32, f64, f64, f64)> = None;
        let mut pick_key = best;
        for m in 0..config.len() {
            let current = config.levels()[m];
            let base_d = dist - elem_d2(m, current);
            for l in (0..n).filter(|&l| l != current) {
                let v = objective.evaluate_move(&config, m, l);
                let d = base_d + elem_d2(m, l);
                let k = key(v, d);
                if k < pick_key {
                    pick_key = k;
                    pick = Some((m, l, v, d, k));
                }
            }
        }
        match pick {
            None => break,
            Some((m, l, v, d, k)) => {
                config.set_level(m, l).expect("level below resolution");
                q = v;
                dist = d;
                best = k;
            }
        }
    }
    Descent { config, key: best, q, rounds }
}

/// Local search on the true objective.
///
/// Returns the final configuration and its value. A round costs
/// `M (N - 1)` evaluations; the start costs one more unless `start_value`
/// is supplied.
pub fn local_search<O: Objective + ?Sized>(
    objective: &mut O,
    theta0: &PhaseConfig,
    start_value: Option<f64>,
    max_rounds: usize,
) -> (PhaseConfig, f64) {
    let d = descend(objective, theta0.clone(), start_value, max_rounds, None, |q, _| q);
    (d.config, d.q)
}
