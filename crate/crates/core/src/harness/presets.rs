use crate::channel::{CsiFidelity, FadingSpec};
use crate::error::{Error, Result};
use crate::metrics::ScoreVariant;
use crate::model::Position;

use super::{Layout, MethodSpec, ObjectiveKind, Placement, RadioSpec, Receivers, RisLayout, Scenario, Variant};

pub const PRESET_NAMES: &[&str] = &[
    "fig-dist-vs-central-sumrate",
    "fig-power-sweep",
    "fig-outage",
    "fig-efficiency",
    "fig-minrate",
    "fig-nakagami",
    "fig-bound",
    "fig-placement",
    "fig-noisy",
];

const DEFAULT_SEED: u64 = 1;

/// Built-in scenario by name.
pub fn preset(name: &str) -> Result<Scenario> {
    match name {
        "fig-dist-vs-central-sumrate" => Ok(dist_vs_central()),
        "fig-power-sweep" => Ok(power_sweep()),
        "fig-outage" => Ok(outage()),
        "fig-efficiency" => Ok(efficiency()),
        "fig-minrate" => Ok(minrate()),
        "fig-nakagami" => Ok(nakagami()),
        "fig-bound" => Ok(bound()),
        "fig-placement" => Ok(placement()),
        "fig-noisy" => Ok(noisy()),
        _ => Err(Error::UnknownPreset { name: name.to_string(), available: PRESET_NAMES.join(", ") }),
    }
}

fn p(x: f64, y: f64) -> Position {
    Position::new(x, y)
}

fn colocated(tx: Position, rx: Position, users: usize, ris: Position) -> Layout {
    Layout {
        tx: vec![tx; users],
        rx: Receivers::Fixed { positions: vec![rx; users] },
        ris: RisLayout::Centralized { placement: Placement::Fixed { center: ris } },
    }
}

fn base(name: &str, description: &str, layout: Layout) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        resolution: 4,
        layout,
        variants: Vec::new(),
        radio: RadioSpec::default(),
        fading: FadingSpec::LosRayleigh,
        csi: CsiFidelity::Noiseless,
        csi_include_los: true,
        objective: ObjectiveKind::SumRate,
        score_variant: ScoreVariant::Full,
        methods: vec![MethodSpec::filled()],
        m_values: vec![32],
        powers_dbm: vec![20.0],
        trials: 100,
        seed: DEFAULT_SEED,
        outage_gamma: 0.1,
    }
}

fn room_tx() -> Vec<Position> {
    vec![p(50.0, 0.0), p(0.0, 50.0), p(100.0, 50.0), p(50.0, 100.0)]
}

fn room_receivers() -> Receivers {
    Receivers::Uniform { width: 100.0, height: 100.0 }
}

fn room_variants() -> Vec<Variant> {
    let centralized =
        |placement| Layout { tx: room_tx(), rx: room_receivers(), ris: RisLayout::Centralized { placement } };
    vec![
        Variant::named("distributed"),
        Variant::named("central-mid").with_layout(centralized(Placement::Fixed { center: p(50.0, 50.0) })),
        Variant::named("central-near-tx1").with_layout(centralized(Placement::Fixed { center: p(47.0, 4.0) })),
        Variant::named("central-random").with_layout(centralized(Placement::Uniform { width: 100.0, height: 100.0 })),
    ]
}

fn room_layout() -> Layout {
    Layout {
        tx: room_tx(),
        rx: room_receivers(),
        ris: RisLayout::Distributed { centers: vec![p(47.0, 4.0), p(3.0, 54.0), p(97.0, 46.0), p(53.0, 96.0)] },
    }
}

fn dist_vs_central() -> Scenario {
    let mut s = base(
        "fig-dist-vs-central-sumrate",
        "Distributed surfaces against three centralized placements, sum-rate versus total budget",
        room_layout(),
    );
    s.variants = room_variants();
    s.m_values = vec![16, 32, 64, 128];
    s
}

fn power_sweep() -> Scenario {
    let mut s = dist_vs_central();
    s.name = "fig-power-sweep".into();
    s.description = "Distributed against centralized surfaces, sum-rate versus transmit power".into();
    s.m_values = vec![32];
    s.powers_dbm = (0..=6).map(|i| 5.0 * i as f64).collect();
    s
}

fn outage() -> Scenario {
    let distributed = Layout {
        tx: room_tx(),
        rx: room_receivers(),
        ris: RisLayout::Distributed { centers: vec![p(25.0, 25.0), p(25.0, 75.0), p(75.0, 75.0), p(75.0, 25.0)] },
    };
    // distances 50 (Tx-Rx), 5 (Tx-RIS) and 47.17 (RIS-Rx)
    let centralized = colocated(p(0.0, 0.0), p(50.0, 0.0), 4, p(3.0, 4.0));
    let mut s = base("fig-outage", "Outage capacity of distributed and centralized surfaces", distributed.clone());
    s.variants = vec![
        Variant::named("distributed").with_layout(distributed),
        Variant::named("centralized").with_layout(centralized),
    ];
    s
}

fn efficiency() -> Scenario {
    let mut s = base(
        "fig-efficiency",
        "Filled-function search against SR, M-SR, SES, GA and parallel direct links",
        colocated(p(0.0, 0.0), p(50.0, 0.0), 4, p(3.0, 4.0)),
    );
    s.fading = FadingSpec::rician_default();
    s.m_values = vec![8, 16, 32, 64, 96];
    s.methods = vec![
        MethodSpec::filled(),
        MethodSpec::sr(),
        MethodSpec::msr(),
        MethodSpec::ses(),
        MethodSpec::ga(),
        MethodSpec::NoRis,
    ];
    s
}

fn minrate() -> Scenario {
    let mut s = efficiency();
    s.name = "fig-minrate".into();
    s.description = "Max-min fairness with the efficiency geometry".into();
    s.objective = ObjectiveKind::MaxMin;
    s
}

fn nakagami() -> Scenario {
    let mut s = base(
        "fig-nakagami",
        "Filled-function search against SR and M-SR under Nakagami fading",
        colocated(p(0.0, 0.0), p(50.0, 0.0), 4, p(3.0, 4.0)),
    );
    s.fading = FadingSpec::nakagami_default();
    s.radio.c0_db = -31.5;
    s.m_values = vec![8, 16, 32, 64];
    s.methods = vec![MethodSpec::filled(), MethodSpec::sr(), MethodSpec::msr()];
    s
}

fn bound() -> Scenario {
    // distances 25 (Tx-Rx), sqrt 2 (Tx-RIS) and 24.02 (RIS-Rx)
    let mut s = base(
        "fig-bound",
        "Symmetric three-user network used for the minimum-element bound",
        colocated(p(0.0, 0.0), p(25.0, 0.0), 3, p(1.0, 1.0)),
    );
    s.resolution = 8;
    s.radio.alpha_direct = 3.9;
    s.radio.alpha_tx_ris = 3.9;
    s.radio.alpha_ris_rx = 3.9;
    s.m_values = vec![24];
    s.powers_dbm = (0..=6).map(|i| 5.0 * i as f64).collect();
    s
}

fn placement() -> Scenario {
    let mut s = base(
        "fig-placement",
        "Surface between co-located transmitters and receivers; see the placement sweep",
        colocated(p(0.0, 0.0), p(30.0, 0.0), 4, p(15.0, 1.0)),
    );
    s.csi = CsiFidelity::NoisyP { p_db: 30.0 };
    s.powers_dbm = vec![30.0];
    s.m_values = vec![16];
    s.methods = vec![MethodSpec::filled(), MethodSpec::sr()];
    s
}

fn noisy() -> Scenario {
    let mut s = efficiency();
    s.name = "fig-noisy".into();
    s.description = "Sum-rate of filled-function search and SR under noisy CSI".into();
    s.m_values = vec![8, 16, 32, 64];
    s.methods = vec![MethodSpec::filled(), MethodSpec::sr()];
    s.variants = vec![Variant::named("noiseless").with_csi(CsiFidelity::Noiseless)];
    for p_db in [30.0, 20.0, 10.0, 0.0] {
        s.variants.push(Variant::named(&format!("noisy-{p_db}")).with_csi(CsiFidelity::NoisyP { p_db }));
    }
    s
}
