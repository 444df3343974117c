//! Channel gains checked against values frozen from an independent numpy
//! evaluation (`tests/oracles/channel_oracle.py`) of the reference layout.

use vlc_noma::config::ScenarioConfig;
use vlc_noma::raytrace::{first_order_contributions, los_contribution};
use vlc_noma::receiver::{build_adr, build_wide_fov};
use vlc_noma::runner::Simulation;

fn sim() -> Simulation {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/paper_scenario.toml");
    Simulation::new(ScenarioConfig::load(path).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

// (user, ap, gain)
const WIDE_LOS: [(usize, usize, f64); 8] = [
    (0, 0, 1.257520538010038e-06),
    (0, 1, 2.3097316004265995e-07),
    (1, 0, 1.257520538010038e-06),
    (1, 1, 6.027169442533316e-07),
    (2, 0, 6.027169442533316e-07),
    (2, 1, 1.257520538010038e-06),
    (3, 0, 2.3097316004265995e-07),
    (3, 1, 1.257520538010038e-06),
];

// user 0, AP 0; one entry per ADR branch
const ADR_LOS_U0_AP0: [f64; 4] = [1.3337451480747537e-06, 0.0, 0.0, 0.0];

// (user, ap, gain), 5 cm tiles
const WIDE_FIRST_ORDER: [(usize, usize, f64); 8] = [
    (0, 0, 4.185535884098969e-07),
    (0, 1, 1.0498617433041889e-07),
    (1, 0, 3.225816325754269e-07),
    (1, 1, 1.6659991084561265e-07),
    (2, 0, 1.2358891518325033e-07),
    (2, 1, 2.08409470831557e-07),
    (3, 0, 1.0119495233171936e-07),
    (3, 1, 3.199789270202123e-07),
];

// (user, ap, branch, gain), 5 cm tiles
const ADR_FIRST_ORDER: [(usize, usize, usize, f64); 32] = [
    (0, 0, 0, 0.0),
    (0, 0, 1, 9.4922235865713e-08),
    (0, 0, 2, 1.057064172936122e-07),
    (0, 0, 3, 9.492223586571299e-08),
    (0, 1, 0, 0.0),
    (0, 1, 1, 9.236111539203712e-09),
    (0, 1, 2, 1.1883364581130427e-08),
    (0, 1, 3, 1.1197989620283463e-08),
    (1, 0, 0, 0.0),
    (1, 0, 1, 6.069133570009492e-08),
    (1, 0, 2, 9.51226655055142e-08),
    (1, 0, 3, 2.1145030187260735e-09),
    (1, 1, 0, 0.0),
    (1, 1, 1, 3.86368297497206e-08),
    (1, 1, 2, 1.543908508095395e-08),
    (1, 1, 3, 9.027050341224965e-11),
    (2, 0, 0, 6.9552307332322e-11),
    (2, 0, 1, 1.7372690069796905e-10),
    (2, 0, 2, 8.896332347877477e-10),
    (2, 0, 3, 0.0),
    (2, 1, 0, 4.976306024091064e-10),
    (2, 1, 1, 4.229006037452145e-09),
    (2, 1, 2, 4.976306024091066e-10),
    (2, 1, 3, 0.0),
    (3, 0, 0, 1.0066077596425432e-08),
    (3, 0, 1, 1.1204020724112866e-08),
    (3, 0, 2, 1.3815446719007694e-10),
    (3, 0, 3, 0.0),
    (3, 1, 0, 6.069133570009492e-08),
    (3, 1, 1, 9.51226655055142e-08),
    (3, 1, 2, 2.1145030187260735e-09),
    (3, 1, 3, 0.0),
];

#[test]
fn wide_fov_los_gains() {
    let s = sim();
    for (u, a, want) in WIDE_LOS {
        let rx = build_wide_fov(&s.room, s.config.users[u].position, 85.0, &s.config.receiver).unwrap();
        let got = los_contribution(&s.aps[a], &rx.branches[0]).unwrap().gain;
        assert!(rel(got, want) < 1e-12, "user {u} ap {a}: {got} vs {want}");
    }
}

#[test]
fn adr_los_gains() {
    let s = sim();
    let rx = build_adr(&s.room, s.config.users[0].position, &s.config.receiver).unwrap();
    for (b, want) in ADR_LOS_U0_AP0.into_iter().enumerate() {
        let got = los_contribution(&s.aps[0], &rx.branches[b]).unwrap().gain;
        assert!(rel(got, want) < 1e-12, "branch {b}: {got} vs {want}");
    }
}

#[test]
fn wide_fov_first_order_gains() {
    let s = sim();
    for (u, a, want) in WIDE_FIRST_ORDER {
        let rx = build_wide_fov(&s.room, s.config.users[u].position, 85.0, &s.config.receiver).unwrap();
        let got: f64 = first_order_contributions(&s.aps[a], &rx.branches[0], &s.scene.first_order)
            .iter()
            .map(|p| p.gain)
            .sum();
        assert!(rel(got, want) < 1e-10, "user {u} ap {a}: {got} vs {want}");
    }
}

#[test]
fn adr_first_order_gains() {
    let s = sim();
    for (u, a, b, want) in ADR_FIRST_ORDER {
        let rx = build_adr(&s.room, s.config.users[u].position, &s.config.receiver).unwrap();
        let got: f64 = first_order_contributions(&s.aps[a], &rx.branches[b], &s.scene.first_order)
            .iter()
            .map(|p| p.gain)
            .sum();
        if want == 0.0 {
            assert_eq!(got, 0.0, "user {u} ap {a} branch {b}");
        } else {
            assert!(rel(got, want) < 1e-10, "user {u} ap {a} branch {b}: {got} vs {want}");
        }
    }
}
