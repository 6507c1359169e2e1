use std::collections::{BTreeMap, BTreeSet};

use rislab::channel::generate;
use rislab::harness::{
    aggregate, no_ris_parallel_baseline, placement_sweep, preset, run_with_threads, write_csv, write_placement_csv,
    MethodSpec, Placement, PlacementSpec, Receivers, ResultRow, RisLayout, Scenario, TrialId,
};
use rislab::metrics::outage_capacity;
use rislab::{RisMode, SeedStream, SurfaceSpec, Topology};

fn small_efficiency() -> Scenario {
    let mut s = preset("fig-efficiency").unwrap();
    s.trials = 6;
    s.m_values = vec![4, 6];
    s.powers_dbm = vec![10.0, 20.0];
    s.methods = vec![MethodSpec::filled(), MethodSpec::sr(), MethodSpec::Random, MethodSpec::NoRis];
    s
}

fn csv(rows: &[ResultRow]) -> String {
    let mut out = Vec::new();
    write_csv(rows, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn every_combination_appears_once() {
    let s = small_efficiency();
    let rows = run_with_threads(&s, Some(2)).unwrap();
    let mut seen = BTreeSet::new();
    for r in rows.iter().filter(|r| r.trial != TrialId::Agg) {
        let key = (r.elements, r.power_dbm.to_bits(), r.method.clone(), r.trial, r.metric.clone());
        assert!(seen.insert(key), "duplicate row {r:?}");
    }
    let raw_per_trial = 3;
    assert_eq!(seen.len(), 2 * 2 * 4 * 6 * raw_per_trial);
    let agg = rows.iter().filter(|r| r.trial == TrialId::Agg).count();
    // three means plus the outage capacity per group
    assert_eq!(agg, 2 * 2 * 4 * 4);
}

#[test]
fn output_is_independent_of_thread_count() {
    let s = small_efficiency();
    let one = csv(&run_with_threads(&s, Some(1)).unwrap());
    let three = csv(&run_with_threads(&s, Some(3)).unwrap());
    let again = csv(&run_with_threads(&s, Some(3)).unwrap());
    assert_eq!(one, three);
    assert_eq!(three, again);
    let mut other = s.clone();
    other.seed += 1;
    assert_ne!(one, csv(&run_with_threads(&other, Some(3)).unwrap()));
}

#[test]
fn aggregates_match_recomputation() {
    let s = small_efficiency();
    let rows = run_with_threads(&s, None).unwrap();
    let mut groups: BTreeMap<(usize, u64, String, String), Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.trial != TrialId::Agg) {
        groups
            .entry((r.elements, r.power_dbm.to_bits(), r.method.clone(), r.metric.clone()))
            .or_default()
            .push(r.value);
    }
    for r in rows.iter().filter(|r| r.trial == TrialId::Agg) {
        assert_eq!(r.seed, s.seed);
        let key = |metric: &str| (r.elements, r.power_dbm.to_bits(), r.method.clone(), metric.to_string());
        if r.metric == "outage" {
            let want = outage_capacity(&groups[&key("min_rate")], s.outage_gamma).unwrap();
            assert_eq!(r.value, want);
        } else {
            let v = &groups[&key(&r.metric)];
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            assert!((r.value - mean).abs() <= 1e-9 * mean.abs().max(1.0), "{r:?}");
        }
    }
    let again = aggregate(&rows, s.outage_gamma, s.seed).unwrap();
    assert_eq!(again.len(), rows.iter().filter(|r| r.trial == TrialId::Agg).count());
}

#[test]
fn no_ris_rows_match_parallel_baseline() {
    let s = small_efficiency();
    let rows = run_with_threads(&s, None).unwrap();
    let k = s.users();
    let Receivers::Fixed { positions } = &s.layout.rx else { panic!("fixed receivers") };
    let RisLayout::Centralized { placement: Placement::Fixed { center } } = s.layout.ris else {
        panic!("fixed surface")
    };
    for r in rows.iter().filter(|r| r.method == "no-ris" && r.metric == "sum_rate") {
        let TrialId::Index(trial) = r.trial else { continue };
        let stream = SeedStream::new(s.seed).child(trial as u64);
        let surface = SurfaceSpec::new(center, r.elements, s.radio.carrier_hz).unwrap();
        let topology = Topology::new(s.layout.tx.clone(), positions.clone(), RisMode::Centralized(surface)).unwrap();
        let radio0 = s.radio.params(k, s.powers_dbm[0]);
        let ch = generate(&topology, &radio0, &s.fading, &stream.named("channel").child(r.elements as u64)).unwrap();
        let budget = s.radio.params(k, r.power_dbm).budget();
        let want: f64 = no_ris_parallel_baseline(&ch, &budget).iter().sum();
        assert!((r.value - want).abs() <= 1e-12 * want.abs().max(1.0), "trial {trial}: {} vs {want}", r.value);
    }
}

#[test]
fn optimizers_beat_a_random_configuration_on_average() {
    let rows = run_with_threads(&small_efficiency(), None).unwrap();
    let mean = |method: &str, m: usize| {
        rows.iter()
            .find(|r| {
                r.trial == TrialId::Agg
                    && r.method == method
                    && r.elements == m
                    && r.metric == "sum_rate"
                    && r.power_dbm == 20.0
            })
            .unwrap()
            .value
    };
    for m in [4, 6] {
        assert!(mean("filled", m) >= mean("random", m));
        assert!(mean("sr", m) >= mean("random", m));
    }
}

#[test]
fn distributed_rows_carry_scores_and_shared_seeds() {
    let mut s = preset("fig-dist-vs-central-sumrate").unwrap();
    s.trials = 2;
    s.m_values = vec![8];
    s.methods = vec![MethodSpec::sr(), MethodSpec::Random];
    let rows = run_with_threads(&s, None).unwrap();
    for r in rows.iter().filter(|r| r.trial != TrialId::Agg) {
        let distributed = r.scenario.ends_with(":distributed");
        if r.metric == "score" {
            assert!(distributed && r.value > 0.0, "{r:?}");
        }
        if r.method == "random" && r.metric == "evals" {
            assert_eq!(r.value, if distributed { 4.0 } else { 1.0 });
        }
    }
    let seeds: BTreeSet<(TrialId, u64)> =
        rows.iter().filter(|r| r.trial != TrialId::Agg).map(|r| (r.trial, r.seed)).collect();
    assert_eq!(seeds.len(), 2, "one seed per trial across variants");
}

#[test]
fn oversized_brute_force_records_error_rows() {
    let mut s = small_efficiency();
    s.trials = 2;
    s.m_values = vec![6];
    s.powers_dbm = vec![20.0];
    s.methods = vec![MethodSpec::BruteForce { cap: 100 }, MethodSpec::Random];
    let rows = run_with_threads(&s, None).unwrap();
    let errors: Vec<&ResultRow> = rows.iter().filter(|r| r.metric == "error").collect();
    assert_eq!(errors.len(), 2);
    assert!(errors.iter().all(|r| r.value.is_nan() && r.method == "brute"));
    assert!(!rows.iter().any(|r| r.trial == TrialId::Agg && r.method == "brute"));
    assert!(csv(&rows).contains(",error,nan\n"));
}

fn quick_placement() -> (Scenario, PlacementSpec) {
    let s = preset("fig-placement").unwrap();
    let spec = PlacementSpec {
        x_values: vec![1.0, 15.0],
        m_max: 8,
        trials: Some(2),
        methods: Some(vec![MethodSpec::sr()]),
        ..PlacementSpec::default()
    };
    (s, spec)
}

#[test]
fn zero_target_needs_the_smallest_surface() {
    let (s, mut spec) = quick_placement();
    spec.target = 0.0;
    let points = placement_sweep(&s, &spec).unwrap();
    assert_eq!(points.len(), 2);
    assert!(points.iter().all(|p| p.required_m == Some(spec.m_start)));
}

#[test]
fn unreachable_target_saturates() {
    let (s, mut spec) = quick_placement();
    spec.target = 1e6;
    let points = placement_sweep(&s, &spec).unwrap();
    assert!(points.iter().all(|p| p.saturated() && p.mean_sum_rate < 1e6));
    let mut out = Vec::new();
    write_placement_csv(&points, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "x0,sr\n1,saturated\n15,saturated\n");
}

#[test]
fn placement_needs_a_fixed_centralized_surface() {
    let (_, spec) = quick_placement();
    let s = preset("fig-dist-vs-central-sumrate").unwrap();
    assert!(placement_sweep(&s, &spec).is_err());
}

#[test]
fn found_points_reach_the_target() {
    let (s, mut spec) = quick_placement();
    spec.x_values = vec![1.0];
    for target in [0.5, 1.0, 2.0, 3.0] {
        spec.target = target;
        let p = &placement_sweep(&s, &spec).unwrap()[0];
        match p.required_m {
            Some(m) => {
                assert!(p.mean_sum_rate >= target);
                assert!(m % 2 == 0 && m <= spec.m_max);
            }
            None => assert!(p.mean_sum_rate < target),
        }
    }
}
