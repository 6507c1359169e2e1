//! Reference optimizers: brute force, successive refinement and its
//! fixed-budget variant, a genetic algorithm, multi-start descent and a
//! random configuration.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PhaseConfig;
use crate::search::{check_config, local_search, Objective, OptResult, TracePoint};

/// Largest search space brute force will enumerate by default.
pub const DEFAULT_BRUTE_FORCE_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaSpec {
    pub population: usize,
    pub generations: usize,
    /// Per-gene mutation probability; `None` means `1 / M`.
    pub mutation_rate: Option<f64>,
    pub tournament_k: usize,
    pub elitism: usize,
}

impl Default for GaSpec {
    fn default() -> Self {
        Self { population: 100, generations: 200, mutation_rate: None, tournament_k: 2, elitism: 1 }
    }
}

impl GaSpec {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || self.population % 2 != 0 {
            return Err(Error::Domain(format!("GA population must be even and >= 2, got {}", self.population)));
        }
        if self.tournament_k == 0 || self.elitism >= self.population {
            return Err(Error::Domain("GA needs tournament_k >= 1 and elitism < population".into()));
        }
        if let Some(p) = self.mutation_rate {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("mutation rate {p} not in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Evaluations of one run: `population * (generations + 1)`.
    pub fn evals(&self) -> u64 {
        (self.population * (self.generations + 1)) as u64
    }
}

struct Tracker {
    start: u64,
    best: Option<(PhaseConfig, f64)>,
    trace: Vec<TracePoint>,
}

impl Tracker {
    fn new<O: Objective + ?Sized>(o: &O) -> Self {
        Self { start: o.evals(), best: None, trace: Vec::new() }
    }

    fn offer<O: Objective + ?Sized>(&mut self, o: &O, config: &PhaseConfig, value: f64) {
        if self.best.as_ref().is_none_or(|(_, b)| value < *b) {
            self.best = Some((config.clone(), value));
            self.trace.push(TracePoint { evals: o.evals() - self.start, value });
        }
    }

    fn finish<O: Objective + ?Sized>(self, o: &O) -> OptResult {
        let (config, value) = self.best.expect("at least one evaluation");
        OptResult { config, value, evals: o.evals() - self.start, trace: self.trace }
    }
}

/// Exhaustive enumeration of all `N^M` configurations.
pub fn brute_force<O: Objective + ?Sized>(objective: &mut O, cap: u64) -> Result<OptResult> {
    let m = objective.elements();
    let n = objective.resolution();
    let size = (n as f64).powi(m as i32);
    if size > cap as f64 {
        return Err(Error::SearchSpaceTooLarge { configs: size, cap });
    }
    let mut t = Tracker::new(objective);
    for idx in 0..size as u64 {
        let c = PhaseConfig::from_index(idx, m, n)?;
        let v = objective.evaluate(&c);
        t.offer(objective, &c, v);
    }
    Ok(t.finish(objective))
}

fn refine_sweeps<O: Objective + ?Sized>(
    objective: &mut O,
    theta0: &PhaseConfig,
    sweeps: usize,
    stop_on_convergence: bool,
) -> Result<OptResult> {
    check_config(objective, theta0)?;
    let n = objective.resolution();
    let mut t = Tracker::new(objective);
    let mut config = theta0.clone();
    let mut value = f64::INFINITY;
    for _ in 0..sweeps {
        let mut changed = false;
        for m in 0..config.len() {
            let current = config.levels()[m];
            let mut pick = current;
            let mut pick_v = f64::INFINITY;
            let mut current_v = f64::INFINITY;
            for l in 0..n {
                let v = objective.evaluate_move(&config, m, l);
                if l == current {
                    current_v = v;
                }
                if v < pick_v {
                    pick_v = v;
                    pick = l;
                }
            }
            if pick != current && pick_v < current_v {
                config.set_level(m, pick)?;
                value = pick_v;
                changed = true;
            } else {
                value = current_v;
            }
            t.offer(objective, &config, value);
        }
        if stop_on_convergence && !changed {
            break;
        }
    }
    if t.best.is_none() {
        value = objective.evaluate(&config);
        t.offer(objective, &config, value);
    }
    let mut res = t.finish(objective);
    res.config = config;
    res.value = value;
    Ok(res)
}

/// Element-by-element refinement: each element tries all `N` levels with the
/// others fixed and keeps a strictly better one. Stops after a sweep without
/// change or `max_sweeps` sweeps; a sweep costs `N M` evaluations.
pub fn successive_refinement<O: Objective + ?Sized>(
    objective: &mut O,
    theta0: &PhaseConfig,
    max_sweeps: usize,
) -> Result<OptResult> {
    refine_sweeps(objective, theta0, max_sweeps.max(1), true)
}

/// Exactly `sweeps` refinement sweeps with no convergence check.
pub fn modified_sr<O: Objective + ?Sized>(objective: &mut O, theta0: &PhaseConfig, sweeps: usize) -> Result<OptResult> {
    refine_sweeps(objective, theta0, sweeps.max(1), false)
}

/// Generational GA starting from a uniformly random population.
pub fn genetic<O: Objective + ?Sized, R: Rng + ?Sized>(
    objective: &mut O,
    spec: &GaSpec,
    rng: &mut R,
) -> Result<OptResult> {
    spec.validate()?;
    let m = objective.elements();
    let n = objective.resolution();
    let population = (0..spec.population).map(|_| PhaseConfig::random(m, n, rng)).collect::<Result<Vec<_>>>()?;
    genetic_from(objective, population, spec, rng)
}

/// GA with an explicit initial population. Every individual of every
/// generation is evaluated, so a run costs `population * (generations + 1)`.
pub fn genetic_from<O: Objective + ?Sized, R: Rng + ?Sized>(
    objective: &mut O,
    initial: Vec<PhaseConfig>,
    spec: &GaSpec,
    rng: &mut R,
) -> Result<OptResult> {
    spec.validate()?;
    if initial.len() != spec.population {
        return Err(Error::Dimension(format!("{} individuals for population {}", initial.len(), spec.population)));
    }
    for c in &initial {
        check_config(objective, c)?;
    }
    let m = objective.elements();
    let n = objective.resolution();
    let rate = spec.mutation_rate.unwrap_or(if m == 0 { 0.0 } else { 1.0 / m as f64 });
    let mut t = Tracker::new(objective);

    let mut pop: Vec<(PhaseConfig, f64)> = initial
        .into_iter()
        .map(|c| {
            let v = objective.evaluate(&c);
            t.offer(objective, &c, v);
            (c, v)
        })
        .collect();

    for _ in 0..spec.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| pop[a].1.total_cmp(&pop[b].1));
        let mut next: Vec<PhaseConfig> = order[..spec.elitism].iter().map(|&i| pop[i].0.clone()).collect();
        let indices: Vec<usize> = (0..pop.len()).collect();
        let tournament = |rng: &mut R| -> usize {
            let mut best = *indices.choose(rng).expect("non-empty population");
            for _ in 1..spec.tournament_k {
                let c = *indices.choose(rng).expect("non-empty population");
                if pop[c].1 < pop[best].1 {
                    best = c;
                }
            }
            best
        };
        while next.len() < spec.population {
            let a = tournament(rng);
            let b = tournament(rng);
            let mut child_a = pop[a].0.levels().to_vec();
            let mut child_b = pop[b].0.levels().to_vec();
            for g in 0..m {
                if rng.random_bool(0.5) {
                    std::mem::swap(&mut child_a[g], &mut child_b[g]);
                }
            }
            for child in [child_a, child_b] {
                if next.len() == spec.population {
                    break;
                }
                let mut child = child;
                for gene in child.iter_mut() {
                    if rate > 0.0 && rng.random_bool(rate) {
                        *gene = rng.random_range(0..n);
                    }
                }
                next.push(PhaseConfig::new(child, n)?);
            }
        }
        pop = next
            .into_iter()
            .map(|c| {
                let v = objective.evaluate(&c);
                t.offer(objective, &c, v);
                (c, v)
            })
            .collect();
    }
    Ok(t.finish(objective))
}

/// Multi-start descent: `restarts` uniformly random starts, each followed by
/// a local search of at most `rounds` rounds; the best result is kept.
pub fn simplified_exhaustive<O: Objective + ?Sized, R: Rng + ?Sized>(
    objective: &mut O,
    restarts: usize,
    rounds: usize,
    rng: &mut R,
) -> Result<OptResult> {
    if restarts == 0 {
        return Err(Error::Domain("at least one restart is required".into()));
    }
    let m = objective.elements();
    let n = objective.resolution();
    let mut t = Tracker::new(objective);
    for _ in 0..restarts {
        let start = PhaseConfig::random(m, n, rng)?;
        let (c, v) = local_search(objective, &start, None, rounds.max(1));
        t.offer(objective, &c, v);
    }
    Ok(t.finish(objective))
}

/// One uniformly random configuration.
pub fn random_config<O: Objective + ?Sized, R: Rng + ?Sized>(objective: &mut O, rng: &mut R) -> Result<OptResult> {
    let c = PhaseConfig::random(objective.elements(), objective.resolution(), rng)?;
    let mut t = Tracker::new(objective);
    let v = objective.evaluate(&c);
    t.offer(objective, &c, v);
    Ok(t.finish(objective))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use crate::search::{neighbors, Counting, FnObjective, TableObjective};

    fn table(seed: u64, m: usize, n: u32) -> Vec<f64> {
        let mut rng = SeedStream::new(seed).rng();
        (0..(n as usize).pow(m as u32)).map(|_| rng.random()).collect()
    }

    fn separable(m: usize, n: u32) -> FnObjective<impl FnMut(&PhaseConfig) -> f64> {
        FnObjective::new(m, n, |c: &PhaseConfig| c.levels().iter().map(|&k| (k as f64 - 1.0).powi(2)).sum())
    }

    #[test]
    fn brute_force_small() {
        let mut f = FnObjective::new(1, 2, |c: &PhaseConfig| if c.levels()[0] == 1 { -1.0 } else { 3.0 });
        let r = brute_force(&mut f, DEFAULT_BRUTE_FORCE_CAP).unwrap();
        assert_eq!(r.evals, 2);
        assert_eq!(r.value, -1.0);
    }

    #[test]
    fn brute_force_refuses_table_scale() {
        let mut f = FnObjective::new(32, 4, |_: &PhaseConfig| 0.0);
        match brute_force(&mut f, DEFAULT_BRUTE_FORCE_CAP) {
            Err(Error::SearchSpaceTooLarge { configs, .. }) => assert!((configs / 1.84e19 - 1.0).abs() < 0.01),
            other => panic!("{other:?}"),
        }
        assert_eq!(f.evals(), 0);
    }

    #[test]
    fn brute_force_matches_enumeration() {
        for seed in 0..10 {
            let values = table(seed, 4, 2);
            let mut t = TableObjective::new(values.clone(), 4, 2).unwrap();
            let r = brute_force(&mut t, DEFAULT_BRUTE_FORCE_CAP).unwrap();
            let (mut best, mut arg) = (f64::INFINITY, 0);
            for (i, &v) in values.iter().enumerate() {
                if v < best {
                    best = v;
                    arg = i;
                }
            }
            assert_eq!(r.value, best);
            assert_eq!(r.config.index() as usize, arg);
            assert_eq!(r.evals, 16);
        }
    }

    #[test]
    fn sr_separable_one_sweep() {
        let mut f = separable(6, 4);
        let r = successive_refinement(&mut f, &PhaseConfig::zeros(6, 4).unwrap(), 1).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.evals, 24);
    }

    #[test]
    fn sr_fixed_point_and_counts() {
        for seed in 0..20 {
            let values = table(seed + 100, 4, 2);
            let mut t = Counting::new(TableObjective::new(values.clone(), 4, 2).unwrap());
            let start = PhaseConfig::from_index(seed % 16, 4, 2).unwrap();
            let r = successive_refinement(&mut t, &start, 1000).unwrap();
            assert_eq!(r.evals, t.calls());
            assert_eq!(r.evals % 8, 0);
            assert_eq!(r.value, values[r.config.index() as usize]);
            assert!(r.value <= values[start.index() as usize]);
            for nb in neighbors(&r.config) {
                assert!(r.value <= values[nb.index() as usize]);
            }
        }
    }

    #[test]
    fn msr_counts() {
        let mut f = Counting::new(FnObjective::new(32, 4, |c: &PhaseConfig| c.index() as f64));
        let r = modified_sr(&mut f, &PhaseConfig::zeros(32, 4).unwrap(), 100).unwrap();
        assert_eq!(r.evals, 12_800);
        assert_eq!(f.calls(), 12_800);
        let mut f = FnObjective::new(64, 4, |_: &PhaseConfig| 1.0);
        assert_eq!(modified_sr(&mut f, &PhaseConfig::zeros(64, 4).unwrap(), 100).unwrap().evals, 25_600);
    }

    #[test]
    fn msr_not_worse_than_one_sweep() {
        for seed in 0..10 {
            let values = table(seed + 7, 6, 4);
            let start = PhaseConfig::from_index(seed * 37, 6, 4).unwrap();
            let one =
                successive_refinement(&mut TableObjective::new(values.clone(), 6, 4).unwrap(), &start, 1).unwrap();
            let many = modified_sr(&mut TableObjective::new(values, 6, 4).unwrap(), &start, 100).unwrap();
            assert!(many.value <= one.value);
        }
    }

    #[test]
    fn ga_identical_population_is_closed() {
        let mut f = Counting::new(FnObjective::new(5, 4, |c: &PhaseConfig| c.index() as f64));
        let c = PhaseConfig::new(vec![1, 2, 3, 0, 1], 4).unwrap();
        let spec = GaSpec { population: 10, generations: 20, mutation_rate: Some(0.0), ..GaSpec::default() };
        let mut rng = SeedStream::new(1).rng();
        let r = genetic_from(&mut f, vec![c.clone(); 10], &spec, &mut rng).unwrap();
        assert_eq!(r.config, c);
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.evals, spec.evals());
        assert_eq!(f.calls(), 210);
    }

    #[test]
    fn ga_budget_is_fixed() {
        for m in [8, 32] {
            let mut f = FnObjective::new(m, 4, |c: &PhaseConfig| c.levels()[0] as f64);
            let r = genetic(&mut f, &GaSpec::default(), &mut SeedStream::new(2).rng()).unwrap();
            assert_eq!(r.evals, 20_100);
        }
    }

    #[test]
    fn ga_finds_small_optima() {
        let mut hits = 0;
        for seed in 0..20 {
            let values = table(seed + 300, 4, 2);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let mut t = TableObjective::new(values, 4, 2).unwrap();
            let r = genetic(&mut t, &GaSpec::default(), &mut SeedStream::new(seed).rng()).unwrap();
            hits += (r.value == min) as u32;
        }
        assert!(hits >= 18, "{hits}");
    }

    #[test]
    fn ses_single_restart_is_local_search() {
        let values = table(9, 5, 4);
        let mut rng = SeedStream::new(3).rng();
        let start = PhaseConfig::random(5, 4, &mut SeedStream::new(3).rng()).unwrap();
        let r = simplified_exhaustive(&mut TableObjective::new(values.clone(), 5, 4).unwrap(), 1, 5, &mut rng).unwrap();
        let (c, v) = local_search(&mut TableObjective::new(values, 5, 4).unwrap(), &start, None, 5);
        assert_eq!(r.config, c);
        assert_eq!(r.value, v);
    }

    #[test]
    fn ses_monotone_in_restarts_and_exact_on_small() {
        for seed in 0..20 {
            let values = table(seed + 500, 4, 2);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let mut prev = f64::INFINITY;
            for restarts in [1, 5, 20, 100] {
                let mut t = TableObjective::new(values.clone(), 4, 2).unwrap();
                let r = simplified_exhaustive(&mut t, restarts, 4, &mut SeedStream::new(seed).rng()).unwrap();
                assert!(r.value <= prev);
                prev = r.value;
            }
            assert_eq!(prev, min);
        }
    }

    #[test]
    fn random_config_costs_one() {
        let mut f = FnObjective::new(4, 4, |c: &PhaseConfig| c.index() as f64);
        let r = random_config(&mut f, &mut SeedStream::new(1).rng()).unwrap();
        assert_eq!(r.evals, 1);
        assert!(r.config.levels().iter().all(|&k| k < 4));
    }

    #[test]
    fn ga_spec_validation() {
        assert!(GaSpec { population: 7, ..GaSpec::default() }.validate().is_err());
        assert!(GaSpec { mutation_rate: Some(1.5), ..GaSpec::default() }.validate().is_err());
        assert_eq!(GaSpec::default().evals(), 20_100);
    }
}
