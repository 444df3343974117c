use std::f64::consts::PI;

use proptest::prelude::*;

use vlc_noma::alloc::{AllocationProblem, Objective, DEFAULT_ENUMERATION_CAP};
use vlc_noma::noma::{
    allocate_power_grpa, data_rate, sinr_eq1, GroupMember, LinkConstants, NoiseParams, NomaGroup, NomaMode,
};
use vlc_noma::raytrace::ChannelSummary;
use vlc_noma::receiver::{build_adr, select_best_branch, BranchChannelSet, NomaContext, UserChannels};
use vlc_noma::scene::{
    angles_from_orientation, discretize, lambertian_intensity, orientation_from_angles, AccessPoint, Room, Surface,
    Vec3,
};

fn gain() -> impl Strategy<Value = f64> {
    (-8.0f64..-4.0).prop_map(|e| 10f64.powf(e))
}

fn link() -> LinkConstants {
    LinkConstants { transmit_power: 1.9, responsivity: 0.4, efficiency: 1.0 }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

proptest! {
    #[test]
    fn grpa_sums_to_one(gains in prop::collection::vec(gain(), 1..=16)) {
        let a = allocate_power_grpa(&gains).unwrap();
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(a.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn grpa_gives_weaker_users_more_power(gains in prop::collection::vec(gain(), 1..=16)) {
        let a = allocate_power_grpa(&gains).unwrap();
        for i in 0..gains.len() {
            for j in 0..gains.len() {
                if gains[i] >= gains[j] {
                    prop_assert!(a[i] <= a[j], "h{i}={} h{j}={} a{i}={} a{j}={}", gains[i], gains[j], a[i], a[j]);
                }
            }
        }
    }

    #[test]
    fn sinr_falls_as_interferer_power_rises(
        coeffs in prop::collection::vec(0.01f64..1.0, 2..=5),
        pick in any::<prop::sample::Index>(),
        victim in any::<prop::sample::Index>(),
        bump in 0.01f64..1.0,
        h in gain(),
    ) {
        let n = coeffs.len();
        let k = victim.index(n);
        let mut i = pick.index(n);
        if i == k {
            i = (i + 1) % n;
        }
        // gains only fix the member order; the coefficients are supplied
        let members = |c: &[f64]| -> Vec<GroupMember> {
            c.iter().enumerate().map(|(u, &a)| GroupMember { user: u, gain: 1.0 - u as f64 * 0.01, coefficient: a }).collect()
        };
        let base = NomaGroup::with_coefficients(0, members(&coeffs));
        let mut raised = coeffs.clone();
        raised[i] += bump;
        let more = NomaGroup::with_coefficients(0, members(&raised));
        let sigma2 = 1e-18;
        let before = sinr_eq1(base.position_of(k).unwrap(), &base, h, link(), sigma2, NomaMode::Literal);
        let after = sinr_eq1(more.position_of(k).unwrap(), &more, h, link(), sigma2, NomaMode::Literal);
        prop_assert!(after < before);
    }

    #[test]
    fn permuting_users_permutes_results(
        gains in prop::collection::vec(gain(), 1..=6),
        perm_seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let n = gains.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
        let permuted: Vec<f64> = perm.iter().map(|&p| gains[p]).collect();

        let a = allocate_power_grpa(&gains).unwrap();
        let b = allocate_power_grpa(&permuted).unwrap();
        let g1 = NomaGroup::new(0, &gains.iter().copied().enumerate().collect::<Vec<_>>()).unwrap();
        let g2 = NomaGroup::new(0, &permuted.iter().copied().enumerate().collect::<Vec<_>>()).unwrap();
        for (new, &old) in perm.iter().enumerate() {
            // distinct gains keep the ranking unambiguous
            if gains.iter().filter(|&&g| g == gains[old]).count() > 1 {
                continue;
            }
            prop_assert!(rel(a[old], b[new]) <= 1e-12);
            let s1 = sinr_eq1(g1.position_of(old).unwrap(), &g1, gains[old], link(), 1e-18, NomaMode::Literal);
            let s2 = sinr_eq1(g2.position_of(new).unwrap(), &g2, permuted[new], link(), 1e-18, NomaMode::Literal);
            prop_assert!(rel(s1, s2) <= 1e-12);
        }
    }

    #[test]
    fn data_rate_increases_in_both_arguments(s in 1e-6f64..1e6, b in 1e3f64..1e10, ds in 1e-3f64..10.0, db in 1e-3f64..10.0) {
        prop_assert!(data_rate(s * (1.0 + ds), b) > data_rate(s, b));
        prop_assert!(data_rate(s, b * (1.0 + db)) > data_rate(s, b));
    }

    #[test]
    fn orientation_round_trip(el in -89.999f64..89.999, az in 0.0f64..360.0) {
        let (el2, az2) = angles_from_orientation(orientation_from_angles(el, az));
        prop_assert!((el2 - el).abs() <= 1e-9);
        let daz = (az2 - az).abs();
        prop_assert!(daz.min(360.0 - daz) <= 1e-9);
    }

    #[test]
    fn tiling_covers_each_surface(size in 0.07f64..1.3) {
        let room = Room::default();
        let elements = discretize(&room, size, &Surface::ALL, 1.0).unwrap();
        let c = room.centroid();
        for s in Surface::ALL {
            let total: f64 = elements.iter().filter(|e| e.surface == s).map(|e| e.area).sum();
            prop_assert!(rel(total, room.surface_area(s)) <= 1e-9);
        }
        prop_assert!(elements.iter().all(|e| e.normal.dot(c - e.center) > 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lambertian_pattern_integrates_to_one(m in 0.5f64..20.0) {
        // ∫ I(θ) 2π sin θ dθ over the hemisphere, composite Simpson
        let n = 200_000;
        let h = (PI / 2.0) / n as f64;
        let f = |t: f64| lambertian_intensity(m, t) * 2.0 * PI * t.sin();
        let mut sum = f(0.0) + f(PI / 2.0);
        for i in 1..n {
            sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        prop_assert!((sum * h / 3.0 - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn best_branch_dominates_and_survives_common_scaling(
        branch_gains in prop::collection::vec(prop_oneof![Just(0.0), gain()], 4),
        other in gain(),
        k in (-3.0f64..3.0).prop_map(|e| 10f64.powf(e)),
    ) {
        prop_assume!(branch_gains.iter().any(|&g| g > 0.0));
        let room = Room::default();
        let rx = build_adr(&room, Vec3::new(2.0, 2.0, 1.0), &Default::default()).unwrap();
        let ap = AccessPoint::downward(Vec3::new(1.0, 1.0, 3.0), 1.9);
        let summary = |g: f64| ChannelSummary { dc_gain: g, bandwidth_3db: 1e8, bandwidth_limited: false, rms_delay_spread: 0.0 };
        let best = branch_gains.iter().copied().fold(0.0, f64::max);
        let group = NomaGroup::new(0, &[(0, best), (1, other)]).unwrap();

        let select = |scale: f64, noise: &NoiseParams| {
            let ch = UserChannels { receiver: rx.clone(), per_ap: vec![branch_gains.iter().map(|&g| summary(g * scale)).collect()] };
            let g = NomaGroup::with_coefficients(0, group.members.iter().map(|m| GroupMember { gain: m.gain * scale, ..*m }).collect());
            let ctx = NomaContext { group: &g, serving_ap: &ap, noise, mode: NomaMode::Literal, co_channel: &[] };
            let (b, s) = select_best_branch(0, &ch, &ctx).unwrap();
            let all: Vec<f64> = (0..4)
                .filter(|&i| branch_gains[i] > 0.0)
                .map(|i| ctx.branch_sinr(0, &rx.branches[i], i, branch_gains[i] * scale, NomaMode::Literal))
                .collect();
            (b, s, all)
        };
        let noise = NoiseParams::default();
        let (b, s, all) = select(1.0, &noise);
        prop_assert!(all.iter().all(|&x| s >= x));

        // Every noise term scaled by k² alongside gains scaled by k.
        let k2 = k * k;
        let scaled_noise = NoiseParams {
            noise_power_density: noise.noise_power_density * k2,
            dark_current: noise.dark_current * k2,
            background_power: noise.background_power * k2,
            ..noise
        };
        let (bk, _, _) = select(k, &scaled_noise);
        prop_assert_eq!(b, bk);
    }

    #[test]
    fn extra_ap_never_lowers_optimum(
        n_users in 1usize..=4,
        gains in prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => gain()], 4 * 4 * 3),
    ) {
        let room = Room::default();
        let build = |n_aps: usize| -> BranchChannelSet {
            BranchChannelSet {
                users: (0..n_users)
                    .map(|u| UserChannels {
                        receiver: build_adr(&room, Vec3::new(1.0 + u as f64, 2.0, 1.0), &Default::default()).unwrap(),
                        per_ap: (0..n_aps)
                            .map(|a| {
                                (0..4)
                                    .map(|b| ChannelSummary {
                                        dc_gain: gains[(u * 3 + a) * 4 + b],
                                        bandwidth_3db: 1e8,
                                        bandwidth_limited: false,
                                        rms_delay_spread: 0.0,
                                    })
                                    .collect()
                            })
                            .collect(),
                    })
                    .collect(),
            }
        };
        let aps: Vec<AccessPoint> = (0..3).map(|a| AccessPoint::downward(Vec3::new(1.0 + 2.0 * a as f64, 2.0, 3.0), 1.9)).collect();
        let noise = NoiseParams::default();
        let optimum = |n_aps: usize| {
            let ch = build(n_aps);
            let problem = AllocationProblem {
                aps: &aps[..n_aps],
                channels: &ch,
                noise: &noise,
                mode: NomaMode::Literal,
                objective: Objective::SumSinr,
                inter_ap_interference: false,
            };
            problem.optimize(DEFAULT_ENUMERATION_CAP).map(|a| a.score).unwrap_or(f64::NEG_INFINITY)
        };
        let (two, three) = (optimum(2), optimum(3));
        prop_assert!(three >= two, "{three} < {two}");
    }
}

#[test]
fn optimize_is_repeatable() {
    let room = Room::default();
    let ch = BranchChannelSet {
        users: (0..5)
            .map(|u| UserChannels {
                receiver: build_adr(&room, Vec3::new(0.5 + u as f64, 1.0 + 0.3 * u as f64, 1.0), &Default::default()).unwrap(),
                per_ap: (0..3)
                    .map(|a| {
                        (0..4)
                            .map(|b| ChannelSummary {
                                dc_gain: 1e-6 / (1.0 + ((u * 7 + a * 3 + b) % 5) as f64),
                                bandwidth_3db: 1e8,
                                bandwidth_limited: false,
                                rms_delay_spread: 0.0,
                            })
                            .collect()
                    })
                    .collect(),
            })
            .collect(),
    };
    let aps: Vec<AccessPoint> = (0..3).map(|a| AccessPoint::downward(Vec3::new(1.0 + 2.0 * a as f64, 2.0, 3.0), 1.9)).collect();
    let noise = NoiseParams::default();
    let problem = AllocationProblem {
        aps: &aps,
        channels: &ch,
        noise: &noise,
        mode: NomaMode::Literal,
        objective: Objective::SumSinr,
        inter_ap_interference: false,
    };
    let first = problem.optimize(DEFAULT_ENUMERATION_CAP).unwrap();
    for _ in 0..5 {
        let again = problem.optimize(DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(again.assignment, first.assignment);
        assert_eq!(again.score.to_bits(), first.score.to_bits());
    }
}
