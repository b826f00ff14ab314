use mcvd_core::detection::{
    ber_convolution_oracle, ber_corollary_eta1, ber_exact, ber_no_isi, BinomialComponent, MixtureComponent,
    ObservationModel,
};
use proptest::prelude::*;

fn component(max_u: u64) -> impl Strategy<Value = MixtureComponent> {
    (0.05..=1.0f64, 0..=max_u, 0.0..0.6f64).prop_map(|(q1, u, h)| MixtureComponent { q1, u, h })
}

fn model_with(l: usize, max_u: u64) -> impl Strategy<Value = ObservationModel> {
    (
        0.05..=1.0f64,
        0..=max_u,
        0.0..0.6f64,
        prop::collection::vec(component(max_u), l - 1),
        prop::collection::vec(component(max_u), l),
    )
        .prop_map(|(q1, u, h, isi, cci)| ObservationModel { q1, current: BinomialComponent { u, h }, isi, cci })
}

fn model(max_u: u64) -> impl Strategy<Value = ObservationModel> {
    (1usize..=3).prop_flat_map(move |l| model_with(l, max_u))
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Sums the probability of every (bits, counts) outcome with count below `k`.
fn brute_force_cdf(m: &ObservationModel, bit: bool, k: u64) -> f64 {
    let mut parts: Vec<(f64, u64, f64)> = m.mixtures().map(|c| (c.q1, c.u, c.h)).collect();
    if bit {
        parts.push((1.0, m.current.u, m.current.h));
    }
    fn go(parts: &[(f64, u64, f64)], budget: i64) -> f64 {
        let Some(((q1, u, h), rest)) = parts.split_first() else {
            return if budget >= 0 { 1.0 } else { 0.0 };
        };
        let mut total = (1.0 - q1) * go(rest, budget);
        for x in 0..=*u {
            let p = binom(*u, x) * h.powi(x as i32) * (1.0 - h).powi((u - x) as i32);
            total += q1 * p * go(rest, budget - x as i64);
        }
        total
    }
    go(&parts, k as i64 - 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn closed_form_matches_convolution(m in model(30), eta in 1u32..=6) {
        let a = ber_exact(&m, eta as f64).unwrap();
        let b = ber_convolution_oracle(&m, eta as f64).unwrap();
        prop_assert!(rel_close(a.pe1, b.pe1, 1e-12), "pe1 {:e} vs {:e}", a.pe1, b.pe1);
        prop_assert!(rel_close(a.cdf0, b.cdf0, 1e-12), "cdf0 {:e} vs {:e}", a.cdf0, b.cdf0);
        prop_assert!(a.pe >= a.pe0.min(a.pe1) - 1e-15 && a.pe <= a.pe0.max(a.pe1) + 1e-15);
    }

    #[test]
    fn convolution_matches_brute_force(m in model(3), eta in 1u32..=5) {
        let b = ber_convolution_oracle(&m, eta as f64).unwrap();
        let cdf1 = brute_force_cdf(&m, true, eta as u64);
        let cdf0 = brute_force_cdf(&m, false, eta as u64);
        prop_assert!((b.pe1 - cdf1).abs() <= 1e-13);
        prop_assert!((b.cdf0 - cdf0).abs() <= 1e-13);
    }

    #[test]
    fn errors_trade_off_with_threshold(m in model(30)) {
        let mut prev = ber_convolution_oracle(&m, 1.0).unwrap();
        for eta in 2..=12 {
            let r = ber_convolution_oracle(&m, eta as f64).unwrap();
            prop_assert!(r.pe1 >= prev.pe1 - 1e-15);
            prop_assert!(r.pe0 <= prev.pe0 + 1e-15);
            prev = r;
        }
    }

    #[test]
    fn product_form_at_unit_threshold(m in model(30)) {
        let m = ObservationModel { q1: 0.5, ..m };
        let closed = ber_corollary_eta1(&m).unwrap();
        let exact = ber_exact(&m, 1.0).unwrap();
        prop_assert!(rel_close(closed, exact.pe, 1e-12), "{} vs {}", closed, exact.pe);
    }

    #[test]
    fn residue_never_helps_at_unit_threshold(m in model(30), extra in component(30)) {
        prop_assume!(extra.u > 0 && extra.h > 0.0);
        let m = ObservationModel { q1: 0.5, ..m };
        let before = ber_corollary_eta1(&m).unwrap();
        let mut more = m.clone();
        more.isi.push(extra);
        let after = ber_corollary_eta1(&more).unwrap();
        prop_assert!(after >= before - 1e-15, "{} < {}", after, before);
    }

    #[test]
    fn memoryless_form_matches(m in model(30), eta in 1u32..=6) {
        let mut m = m;
        m.isi.iter_mut().for_each(|c| c.h = 0.0);
        m.cci.iter_mut().skip(1).for_each(|c| c.h = 0.0);
        let a = ber_no_isi(&m, eta as f64).unwrap();
        let b = ber_convolution_oracle(&m, eta as f64).unwrap();
        prop_assert!(rel_close(a.pe1, b.pe1, 1e-12) && rel_close(a.cdf0, b.cdf0, 1e-12), "{:?} vs {:?}", a, b);
    }
}
