use mcvd_core::control::{
    expected_absorbed, expected_cci, steady_state_bound, transmit_budget, transmit_budget_no_isi, ControlParams,
    SlotSchedule, TrafficModel,
};
use mcvd_core::detection::ObservationModel;
use mcvd_core::hitting::{channel_taps_for, p_two_far_deg_inf, ChannelTaps, SeriesControl};
use mcvd_core::model::derive_geometry;
use mcvd_core::{Link, MediumParams, Topology};
use proptest::prelude::*;

/// Nonincreasing taps with total mass below one.
fn decaying_taps(max_len: usize) -> impl Strategy<Value = ChannelTaps> {
    (0.0..0.5f64, prop::collection::vec(0.0..1.0f64, 1..max_len)).prop_map(|(h0, ratios)| {
        let mut taps = Vec::with_capacity(ratios.len());
        let mut h = h0;
        for r in ratios {
            taps.push(h);
            h *= r;
        }
        let total: f64 = taps.iter().sum();
        if total > 1.0 {
            taps.iter_mut().for_each(|x| *x /= total * 1.000001);
        }
        ChannelTaps::from_taps(taps).unwrap()
    })
}

fn traffic() -> impl Strategy<Value = TrafficModel> {
    (0.05..=1.0f64, 0.05..=1.0f64).prop_map(|(p, s)| TrafficModel::new(p, s).unwrap())
}

fn params() -> impl Strategy<Value = ControlParams> {
    (0u64..500, 0u64..2000, 0.0..60.0f64).prop_map(|(n, ul, um)| ControlParams::new(n, ul, um).unwrap())
}

fn fig2_topology(r_sp: f64) -> Topology {
    Topology::new([30.0, -10.0, 0.0], [30.0 - r_sp, 10.0, 0.0], [30.0, 10.0, 0.0], [10.0, 10.0, 20.0], 5.0, 5.0)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn interference_within_threshold_for_decaying_taps(h in decaying_taps(200), tr in traffic(), p in params()) {
        let s = transmit_budget(&h, &tr, &p, h.len()).unwrap();
        for l in 1..=h.len() {
            let c = expected_cci(&s, &h, &tr, l).unwrap();
            prop_assert!(c <= p.u_m, "slot {}: {} > {}", l, c, p.u_m);
            prop_assert!(s.u_s_at(l) <= p.u_l);
        }
    }

    #[test]
    fn first_slot_and_bound_grow_with_threshold(h in decaying_taps(40), tr in traffic(), p in params(), extra in 0.0..20.0f64, p_inf in 0.0..1.0f64) {
        let q = ControlParams { u_m: p.u_m + extra, ..p };
        let lo = transmit_budget(&h, &tr, &p, 1).unwrap();
        let hi = transmit_budget(&h, &tr, &q, 1).unwrap();
        prop_assert!(lo.u_s[0] <= hi.u_s[0]);
        prop_assert!(steady_state_bound(p_inf, &tr, &p).unwrap() <= steady_state_bound(p_inf, &tr, &q).unwrap());
    }

    #[test]
    fn memoryless_channel_gives_constant_budget(h0 in 0.0..1.0f64, len in 1usize..50, tr in traffic(), p in params()) {
        let mut taps = vec![0.0; len];
        taps[0] = h0;
        let h = ChannelTaps::from_taps(taps).unwrap();
        let single = transmit_budget_no_isi(&h, &tr, &p).unwrap();
        let s = transmit_budget(&h, &tr, &p, len).unwrap();
        prop_assert!(s.u_s.iter().all(|&u| u == single));
    }

    #[test]
    fn first_slot_and_bound_grow_with_distance(r1 in 11.0..60.0f64, dr in 0.0..20.0f64, um in 0.5..50.0f64) {
        let medium = MediumParams::new(100.0, 0.0, 1.0).unwrap();
        let tr = TrafficModel::new(0.5, 0.5).unwrap();
        let p = ControlParams::new(300, 300, um).unwrap();
        let ctrl = SeriesControl::default();
        let budget = |r: f64| {
            let topo = fig2_topology(r);
            let h = channel_taps_for(&topo, &medium, Link::Secondary, Link::Primary, 1, &ctrl).unwrap();
            let g = derive_geometry(&topo, Link::Secondary, Link::Primary).unwrap();
            let bound = steady_state_bound(p_two_far_deg_inf(&g, 100.0, 0.0).unwrap(), &tr, &p).unwrap();
            (transmit_budget(&h, &tr, &p, 1).unwrap().u_s[0], bound)
        };
        let (near, far) = (budget(r1), budget((r1 + dr).min(60.0)));
        prop_assert!(near.0 <= far.0 && near.1 <= far.1, "{:?} vs {:?}", near, far);
    }
}

#[test]
fn rising_taps_can_exceed_threshold() {
    // The budget only looks back: a lag-1 tap twice the lag-0 tap makes the
    // first slot's full allowance arrive doubled one slot later.
    let h = ChannelTaps::from_taps(vec![0.1, 0.2]).unwrap();
    let tr = TrafficModel::new(1.0, 1.0).unwrap();
    let p = ControlParams::new(0, 1000, 5.0).unwrap();
    let s = transmit_budget(&h, &tr, &p, 2).unwrap();
    assert_eq!(s.u_s, vec![50, 0]);
    assert_eq!(expected_cci(&s, &h, &tr, 2).unwrap(), 10.0);
}

#[test]
fn later_slots_need_not_grow_with_threshold() {
    // A larger threshold lifts slot 1 by one molecule whose residue then
    // takes a molecule away from slot 2.
    let h = ChannelTaps::from_taps(vec![0.3, 0.2]).unwrap();
    let tr = TrafficModel::new(1.0, 1.0).unwrap();
    let at = |um: f64| transmit_budget(&h, &tr, &ControlParams::new(0, 1000, um).unwrap(), 2).unwrap().u_s;
    assert_eq!(at(0.59), vec![1, 1]);
    assert_eq!(at(0.62), vec![2, 0]);
}

#[test]
fn degraded_schedule_settles_at_bound() {
    let medium = MediumParams::new(100.0, 0.5, 1.0).unwrap();
    let tr = TrafficModel::new(0.5, 0.5).unwrap();
    let p = ControlParams::new(300, 300, 5.0).unwrap();
    let topo = fig2_topology(15.0);
    let h = channel_taps_for(&topo, &medium, Link::Secondary, Link::Primary, 200, &SeriesControl::default()).unwrap();
    let s = transmit_budget(&h, &tr, &p, 200).unwrap();
    let g = derive_geometry(&topo, Link::Secondary, Link::Primary).unwrap();
    let bound = steady_state_bound(p_two_far_deg_inf(&g, 100.0, 0.5).unwrap(), &tr, &p).unwrap();
    assert_eq!(s.tail(20), mcvd_core::control::TailBehaviour::Plateau(bound));
}

#[test]
fn absorbed_count_matches_observation_mean() {
    let medium = MediumParams::new(100.0, 0.2, 2.0).unwrap();
    let tr = TrafficModel::new(0.4, 0.7).unwrap();
    let p = ControlParams::new(300, 300, 5.0).unwrap();
    let topo = Topology::new([30.0, -10.0, 0.0], [10.0, 10.0, 0.0], [30.0, 10.0, 0.0], [10.0, 10.0, 20.0], 3.0, 5.0).unwrap();
    let ctrl = SeriesControl::default();
    let taps = |tx, rx| channel_taps_for(&topo, &medium, tx, rx, 4, &ctrl).unwrap();
    let (pp, sp, ps, ss) = (
        taps(Link::Primary, Link::Primary),
        taps(Link::Secondary, Link::Primary),
        taps(Link::Primary, Link::Secondary),
        taps(Link::Secondary, Link::Secondary),
    );
    let s = transmit_budget(&sp, &tr, &p, 4).unwrap();
    for l in 1..=4 {
        let at_p = expected_absorbed(&s, &pp, &sp, &tr, l).unwrap();
        let m = ObservationModel::for_receiver(Link::Primary, l, &s, &pp, &sp, &tr).unwrap();
        let mean = tr.q1_p * m.mean(true) + (1.0 - tr.q1_p) * m.mean(false);
        assert!((at_p - mean).abs() <= 1e-12 * at_p, "P slot {l}: {at_p} vs {mean}");

        let at_s = expected_absorbed(&s, &ps, &ss, &tr, l).unwrap();
        let m = ObservationModel::for_receiver(Link::Secondary, l, &s, &ss, &ps, &tr).unwrap();
        let mean = tr.q1_s * m.mean(true) + (1.0 - tr.q1_s) * m.mean(false);
        assert!((at_s - mean).abs() <= 1e-12 * at_s, "S slot {l}: {at_s} vs {mean}");
    }
    let zero = SlotSchedule::constant(0, 0, 4);
    let fast = MediumParams::new(100.0, 1e12, 2.0).unwrap();
    let gone = channel_taps_for(&topo, &fast, Link::Primary, Link::Primary, 4, &ctrl).unwrap();
    assert_eq!(expected_absorbed(&SlotSchedule { u_p: 300, ..zero }, &gone, &gone, &tr, 4).unwrap(), 0.0);
}
