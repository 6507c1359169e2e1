use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::baselines::{
    brute_force, genetic, modified_sr, random_config, simplified_exhaustive, successive_refinement,
};
use crate::channel::{corrupt, generate, restrict, ChannelSet, CsiView};
use crate::error::{Error, Result};
use crate::metrics::{effective, outage_capacity, rates, score, RateReport};
use crate::model::{LinkBudget, PhaseConfig, Position, RisMode, SurfaceSpec, Topology};
use crate::rng::SeedStream;
use crate::search::{global_search, Counting, GainObjective, Objective, OptResult};

use super::{MethodSpec, ObjectiveKind, Receivers, ResolvedVariant, RisLayout, Scenario};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "RIS_LAB_THREADS";

pub const CSV_HEADER: &str = "scenario,trial,seed,method,K,M,N,P_dbm,metric,value";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrialId {
    Index(usize),
    /// Aggregate over all trials; sorts after every index.
    Agg,
}

impl std::fmt::Display for TrialId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrialId::Index(i) => write!(f, "{i}"),
            TrialId::Agg => f.write_str("agg"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub trial: TrialId,
    pub seed: u64,
    pub method: String,
    pub users: usize,
    pub elements: usize,
    pub resolution: u32,
    pub power_dbm: f64,
    pub metric: String,
    pub value: f64,
}

impl ResultRow {
    fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.scenario
            .cmp(&other.scenario)
            .then(self.elements.cmp(&other.elements))
            .then(self.power_dbm.total_cmp(&other.power_dbm))
            .then(self.method.cmp(&other.method))
            .then(self.trial.cmp(&other.trial))
            .then(self.metric.cmp(&other.metric))
    }
}

/// `%g`-style formatting with 9 significant digits.
pub fn format_float(v: f64) -> String {
    const DIGITS: i32 = 9;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes the header and rows in the order given.
pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.trial,
            r.seed,
            r.method,
            r.users,
            r.elements,
            r.resolution,
            format_float(r.power_dbm),
            r.metric,
            format_float(r.value)
        )?;
    }
    Ok(())
}

/// Rates of interference-free direct links: `log2(1 + P_i |h_d^{ii}|^2 / sigma^2)`.
pub fn no_ris_parallel_baseline(ch: &ChannelSet, budget: &LinkBudget) -> Vec<f64> {
    (0..ch.users()).map(|i| (1.0 + budget.powers[i] * ch.direct(i, i).norm_sqr() / budget.noise).log2()).collect()
}

/// Worker count: `explicit` (or the machine's parallelism), capped by
/// `RIS_LAB_THREADS` when set.
pub fn thread_count(explicit: Option<usize>) -> usize {
    let base = explicit.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    cap.map_or(base, |c| base.min(c)).max(1)
}

/// Runs every trial of `scenario` and returns raw and aggregate rows in
/// canonical order.
pub fn run(scenario: &Scenario) -> Result<Vec<ResultRow>> {
    run_with_threads(scenario, None)
}

pub fn run_with_threads(scenario: &Scenario, threads: Option<usize>) -> Result<Vec<ResultRow>> {
    scenario.validate()?;
    let variants = scenario.variants();
    let mut jobs = Vec::new();
    for v in &variants {
        for &m in &scenario.m_values {
            for trial in 0..scenario.trials {
                jobs.push((v, m, trial));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(threads))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let chunks: Vec<Vec<ResultRow>> =
        pool.install(|| jobs.par_iter().map(|&(v, m, trial)| run_trial(scenario, v, m, trial)).collect::<Result<_>>())?;
    let mut rows: Vec<ResultRow> = chunks.into_iter().flatten().collect();
    rows.extend(aggregate(&rows, scenario.outage_gamma, scenario.seed)?);
    rows.sort_by(ResultRow::canonical_cmp);
    Ok(rows)
}

/// Mean of every metric over trials, plus the outage capacity of the
/// per-trial minimum rates.
pub fn aggregate(rows: &[ResultRow], gamma: f64, seed: u64) -> Result<Vec<ResultRow>> {
    type Key = (String, usize, u64, String, String);
    let mut groups: BTreeMap<Key, (&ResultRow, Vec<f64>)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.trial != TrialId::Agg && r.metric != "error") {
        let key = (r.scenario.clone(), r.elements, r.power_dbm.to_bits(), r.method.clone(), r.metric.clone());
        groups.entry(key).or_insert_with(|| (r, Vec::new())).1.push(r.value);
    }
    let mut out = Vec::new();
    for ((_, _, _, _, metric), (proto, values)) in groups {
        let row = |metric: &str, value: f64| ResultRow {
            trial: TrialId::Agg,
            seed,
            metric: metric.to_string(),
            value,
            ..proto.clone()
        };
        out.push(row(&metric, values.iter().sum::<f64>() / values.len() as f64));
        if metric == "min_rate" {
            out.push(row("outage", outage_capacity(&values, gamma)?));
        }
    }
    Ok(out)
}

struct Realized {
    report: RateReport,
    score: Option<f64>,
    evals: u64,
}

fn run_trial(scenario: &Scenario, variant: &ResolvedVariant, m: usize, trial: usize) -> Result<Vec<ResultRow>> {
    let k = scenario.users();
    let n = scenario.resolution;
    let stream = SeedStream::new(scenario.seed).child(trial as u64);
    let layout = &variant.layout;

    let rx: Vec<Position> = match &layout.rx {
        Receivers::Fixed { positions } => positions.clone(),
        Receivers::Uniform { width, height } => {
            let mut rng = stream.named("receivers").rng();
            (0..k).map(|_| super::uniform_point(*width, *height, &mut rng)).collect()
        }
    };
    let carrier = scenario.radio.carrier_hz;
    let mode = match &layout.ris {
        RisLayout::Centralized { placement } => {
            let center = placement.resolve(&mut stream.named("placement").rng());
            RisMode::Centralized(SurfaceSpec::new(center, m, carrier)?)
        }
        RisLayout::Distributed { centers } => {
            RisMode::Distributed(centers.iter().map(|&c| SurfaceSpec::new(c, m / k, carrier)).collect::<Result<_>>()?)
        }
    };
    let topology = Topology::new(layout.tx.clone(), rx, mode)?;
    let radio0 = scenario.radio.params(k, scenario.powers_dbm[0]);
    let channels = generate(&topology, &radio0, &variant.fading, &stream.named("channel").child(m as u64))?;
    let view =
        corrupt(&channels, variant.csi, scenario.csi_include_los, &mut stream.named("csi").child(m as u64).rng());
    let truth = CsiView::perfect(channels.clone());

    let mut rows = Vec::new();
    for &p in &scenario.powers_dbm {
        let budget = scenario.radio.params(k, p).budget();
        for method in &scenario.methods {
            let label = method.label();
            let row = |metric: &str, value: f64| ResultRow {
                scenario: variant.label.clone(),
                trial: TrialId::Index(trial),
                seed: stream.seed(),
                method: label.clone(),
                users: k,
                elements: m,
                resolution: n,
                power_dbm: p,
                metric: metric.to_string(),
                value,
            };
            let method_stream = stream.named("method").named(&label).child(m as u64);
            match realize(scenario, method, &channels, &view, &truth, &budget, m, &stream, &method_stream) {
                Ok(r) => {
                    rows.push(row("sum_rate", r.report.sum_rate));
                    rows.push(row("min_rate", r.report.min_rate));
                    rows.push(row("evals", r.evals as f64));
                    if let Some(s) = r.score {
                        rows.push(row("score", s));
                    }
                }
                Err(Error::SearchSpaceTooLarge { .. }) => rows.push(row("error", f64::NAN)),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn realize(
    scenario: &Scenario,
    method: &MethodSpec,
    channels: &ChannelSet,
    view: &CsiView,
    truth: &CsiView,
    budget: &LinkBudget,
    m: usize,
    stream: &SeedStream,
    method_stream: &SeedStream,
) -> Result<Realized> {
    let k = channels.users();
    let n = scenario.resolution;
    if let MethodSpec::NoRis = method {
        let sinr = (0..k).map(|i| budget.powers[i] * channels.direct(i, i).norm_sqr() / budget.noise).collect();
        return Ok(Realized { report: RateReport::from_sinr(sinr), score: None, evals: 0 });
    }
    let mut start_rng = stream.named("start").child(m as u64).rng();
    let mut rng = method_stream.rng();
    if channels.is_distributed() {
        let mut configs = Vec::with_capacity(k);
        let mut evals = 0;
        for tx in 0..k {
            let theta0 = PhaseConfig::random(channels.elements(tx), n, &mut start_rng)?;
            let local = restrict(view, tx)?;
            let obj = GainObjective::score(&local, tx, budget, scenario.score_variant, n)?;
            let (res, calls) = optimize(method, obj, &theta0, &mut rng)?;
            evals += calls;
            configs.push(res.config);
        }
        let report = rates(&effective(channels, &configs)?, budget);
        let total_score =
            (0..k).map(|tx| score(truth, tx, &configs[tx], budget, scenario.score_variant)).sum::<Result<f64>>()?;
        Ok(Realized { report, score: Some(total_score), evals })
    } else {
        let theta0 = PhaseConfig::random(m, n, &mut start_rng)?;
        let obj = match scenario.objective {
            ObjectiveKind::SumRate => GainObjective::sum_rate(view, budget, n)?,
            ObjectiveKind::MaxMin => GainObjective::max_min(view, budget, n)?,
        };
        let (res, calls) = optimize(method, obj, &theta0, &mut rng)?;
        let report = rates(&effective(channels, &[res.config])?, budget);
        Ok(Realized { report, score: None, evals: calls })
    }
}

/// Runs one method; returns the result and the independently counted evaluations.
fn optimize<O: Objective, R: Rng>(
    method: &MethodSpec,
    objective: O,
    theta0: &PhaseConfig,
    rng: &mut R,
) -> Result<(OptResult, u64)> {
    let mut obj = Counting::new(objective);
    let rounds = obj.elements().max(1);
    let res = match method {
        MethodSpec::Filled { budget } => global_search(&mut obj, theta0, budget)?,
        MethodSpec::Sr { max_sweeps } => successive_refinement(&mut obj, theta0, *max_sweeps)?,
        MethodSpec::Msr { sweeps } => modified_sr(&mut obj, theta0, *sweeps)?,
        MethodSpec::Ga { spec } => genetic(&mut obj, spec, rng)?,
        MethodSpec::Ses { restarts } => simplified_exhaustive(&mut obj, *restarts, rounds, rng)?,
        MethodSpec::Random => random_config(&mut obj, rng)?,
        MethodSpec::BruteForce { cap } => brute_force(&mut obj, *cap)?,
        MethodSpec::NoRis => return Err(Error::Config("no-ris has no surface to optimize".into())),
    };
    let calls = obj.calls();
    Ok((res, calls))
}
