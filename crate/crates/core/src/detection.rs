//! Bit-error probability of threshold detection at a receiver.
//!
//! The count observed in slot `l` is a sum of independent components: the
//! current-slot emission of the receiver's own transmitter (binomial, present
//! only when the bit is 1), same-link residue from slots `1..l−1` and
//! cross-link arrivals from slots `1..l`. Residue and cross-link components
//! are mixtures `q0·δ₀ + q1·Binomial(u, h)` since their bits are random.
//!
//! Three evaluations are provided: the closed form obtained by expanding the
//! probability generating function over weak compositions, an exact PMF
//! convolution, and a Monte Carlo link simulation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{SlotSchedule, TrafficModel};
use crate::error::{Error, Result};
use crate::hitting::ChannelTaps;
use crate::model::Link;

/// Weak-composition enumerations above this size are refused.
pub const COMPOSITION_CAP: f64 = 1e8;

/// Largest total support the convolution oracle accepts.
pub const SUPPORT_LIMIT: u64 = 100_000;

const MC_BATCH: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialComponent {
    pub u: u64,
    pub h: f64,
}

/// Present with probability `q1`, otherwise contributes zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub q1: f64,
    pub u: u64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationModel {
    /// Probability that the receiver's own transmitter sends a 1.
    pub q1: f64,
    pub current: BinomialComponent,
    /// `isi[r − 1]`: same-link residue from `r` slots back, `r = 1..l−1`.
    pub isi: Vec<MixtureComponent>,
    /// `cci[j]`: cross-link arrivals from `j` slots back, `j = 0..l−1`.
    pub cci: Vec<MixtureComponent>,
}

impl ObservationModel {
    /// Observation at receiver `rx` in slot `l` (1-based). `taps_own` is the
    /// channel from `rx`'s own transmitter and `taps_cross` the channel from
    /// the other transmitter. The primary always emits `schedule.u_p`.
    pub fn for_receiver(
        rx: Link,
        l: usize,
        schedule: &SlotSchedule,
        taps_own: &ChannelTaps,
        taps_cross: &ChannelTaps,
        traffic: &TrafficModel,
    ) -> Result<Self> {
        traffic.validate()?;
        if l < 1 || l > schedule.u_s.len() {
            return Err(Error::Precondition(format!("slot {l} outside 1..={}", schedule.u_s.len())));
        }
        if taps_own.len() < l || taps_cross.len() < l {
            return Err(Error::Precondition(format!("taps must cover {l} lags")));
        }
        let emitted = |link: Link, k: usize| match link {
            Link::Primary => schedule.u_p,
            Link::Secondary => schedule.u_s_at(k),
        };
        let other = rx.other();
        let q_own = traffic.q1(rx);
        let q_other = traffic.q1(other);
        let isi = (1..l)
            .map(|r| MixtureComponent { q1: q_own, u: emitted(rx, l - r), h: taps_own.tap(r) })
            .collect();
        let cci = (0..l)
            .map(|j| MixtureComponent { q1: q_other, u: emitted(other, l - j), h: taps_cross.tap(j) })
            .collect();
        let model = ObservationModel {
            q1: q_own,
            current: BinomialComponent { u: emitted(rx, l), h: taps_own.tap(0) },
            isi,
            cci,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q1 > 0.0 && self.q1 <= 1.0) {
            return Err(Error::InvalidParameter(format!("q1 must lie in (0, 1], got {}", self.q1)));
        }
        if !(0.0..=1.0).contains(&self.current.h) {
            return Err(Error::InvalidParameter("current tap outside [0, 1]".into()));
        }
        for c in self.isi.iter().chain(&self.cci) {
            if !(0.0..=1.0).contains(&c.h) || !(0.0..=1.0).contains(&c.q1) {
                return Err(Error::InvalidParameter(format!("component {c:?} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Slot index the model describes.
    pub fn slot(&self) -> usize {
        self.isi.len() + 1
    }

    pub fn mixtures(&self) -> impl Iterator<Item = &MixtureComponent> {
        self.isi.iter().chain(&self.cci)
    }

    /// Expected count given the current bit.
    pub fn mean(&self, bit: bool) -> f64 {
        let background: f64 = self.mixtures().map(|c| c.q1 * c.u as f64 * c.h).sum();
        if bit {
            self.current.u as f64 * self.current.h + background
        } else {
            background
        }
    }

    pub fn support(&self) -> u64 {
        self.current.u + self.mixtures().map(|c| c.u).sum::<u64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    /// Decode 1 iff the observed count is at least `eta`.
    pub eta: f64,
}

impl DetectionConfig {
    pub fn new(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(DetectionConfig { eta })
    }

    pub fn decide(&self, count: u64) -> bool {
        count as f64 >= self.eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerResult {
    /// P(decode 1 | sent 0).
    pub pe0: f64,
    /// P(decode 0 | sent 1).
    pub pe1: f64,
    pub pe: f64,
    /// P(count < eta | sent 0). Equals `1 − pe0` but keeps full relative
    /// precision when `pe0` is close to one.
    pub cdf0: f64,
}

impl BerResult {
    fn from_cdfs(cdf0: f64, cdf1: f64, q1: f64) -> Self {
        let pe0 = (1.0 - cdf0).clamp(0.0, 1.0);
        let pe1 = cdf1.clamp(0.0, 1.0);
        BerResult { pe0, pe1, pe: (1.0 - q1) * pe0 + q1 * pe1, cdf0 }
    }
}

fn check_eta(eta: f64) -> Result<usize> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be positive and finite, got {eta}")));
    }
    Ok(eta.ceil() as usize)
}

/// `θ^{(k)}(0) / k!` for `k = 0..=kmax` of `(1 − h + h·v)^u`, i.e.
/// `u!/(u−k)! · h^k · (1 − h)^{u−k} / k!`, zero for `k > u`.
fn binomial_derivatives(u: u64, h: f64, kmax: usize) -> Vec<f64> {
    let top = (kmax as u64).min(u) as usize;
    let mut out = Vec::with_capacity(top + 1);
    let mut falling_over_fact = 1.0;
    for k in 0..=top {
        if k > 0 {
            falling_over_fact *= (u - k as u64 + 1) as f64 / k as f64;
        }
        out.push(falling_over_fact * h.powi(k as i32) * (1.0 - h).powi((u - k as u64) as i32));
    }
    out
}

fn mixture_derivatives(c: &MixtureComponent, kmax: usize) -> Vec<f64> {
    let mut out: Vec<f64> = binomial_derivatives(c.u, c.h, kmax).into_iter().map(|d| c.q1 * d).collect();
    out[0] += 1.0 - c.q1;
    out
}

/// `Σ Π coefs[j][n_j]` over all tuples with `Σ n_j ≤ budget`.
fn composition_sum(coefs: &[Vec<f64>], budget: usize) -> f64 {
    let Some((last, rest)) = coefs.split_last() else {
        return 1.0;
    };
    let mut prefix = Vec::with_capacity(budget + 1);
    let mut acc = 0.0;
    for r in 0..=budget {
        acc += last.get(r).copied().unwrap_or(0.0);
        prefix.push(acc);
    }
    fn walk(rest: &[Vec<f64>], prefix: &[f64], remaining: usize, prod: f64) -> f64 {
        match rest.split_first() {
            None => prod * prefix[remaining],
            Some((head, tail)) => {
                let mut s = 0.0;
                for (n, &c) in head.iter().enumerate().take(remaining + 1) {
                    if c != 0.0 {
                        s += walk(tail, prefix, remaining - n, prod * c);
                    }
                }
                s
            }
        }
    }
    walk(rest, &prefix, budget, 1.0)
}

fn binom_f64(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Number of weak compositions enumerated for threshold `eta` on slot `l`.
pub fn composition_count(l: usize, eta: f64) -> f64 {
    let parts = 2 * l;
    let k = eta.ceil().max(1.0) as usize;
    binom_f64(k - 1 + parts, parts)
}

/// Exact error probabilities by expanding the generating function of the
/// observed count over weak compositions of `0..ceil(eta)−1`.
pub fn ber_exact(model: &ObservationModel, eta: f64) -> Result<BerResult> {
    model.validate()?;
    let k = check_eta(eta)?;
    let count = composition_count(model.slot(), eta);
    if count > COMPOSITION_CAP {
        return Err(Error::ComplexityCap { count, cap: COMPOSITION_CAP });
    }
    let kmax = k - 1;
    let mut coefs: Vec<Vec<f64>> = model.mixtures().map(|c| mixture_derivatives(c, kmax)).collect();
    let cdf0 = composition_sum(&coefs, kmax);
    coefs.insert(0, binomial_derivatives(model.current.u, model.current.h, kmax));
    let cdf1 = composition_sum(&coefs, kmax);
    Ok(BerResult::from_cdfs(cdf0, cdf1, model.q1))
}

/// Binomial PMF on `0..=u` by a ratio recurrence started at the mode.
pub fn binomial_pmf(u: u64, h: f64) -> Vec<f64> {
    let n = u as usize;
    let mut pmf = vec![0.0; n + 1];
    if h == 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if h == 1.0 {
        pmf[n] = 1.0;
        return pmf;
    }
    let mode = (((u + 1) as f64 * h).floor() as usize).min(n);
    let ln_choose: f64 = (0..mode).map(|j| ((n - j) as f64 / (j + 1) as f64).ln()).sum();
    pmf[mode] = (ln_choose + mode as f64 * h.ln() + (n - mode) as f64 * (-h).ln_1p()).exp();
    let odds = h / (1.0 - h);
    for k in mode..n {
        pmf[k + 1] = pmf[k] * (n - k) as f64 / (k + 1) as f64 * odds;
    }
    for k in (0..mode).rev() {
        pmf[k] = pmf[k + 1] * (k + 1) as f64 / (n - k) as f64 / odds;
    }
    pmf
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact PMFs of the observed count given bit 0 and bit 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    pub pmf0: Vec<f64>,
    pub pmf1: Vec<f64>,
    pub q1: f64,
}

impl CountDistribution {
    pub fn new(model: &ObservationModel) -> Result<Self> {
        model.validate()?;
        let support = model.support();
        if support > SUPPORT_LIMIT {
            return Err(Error::SupportOverflow { support, limit: SUPPORT_LIMIT });
        }
        let mut pmf0 = vec![1.0];
        for c in model.mixtures() {
            let mut part: Vec<f64> = binomial_pmf(c.u, c.h).into_iter().map(|p| c.q1 * p).collect();
            part[0] += 1.0 - c.q1;
            pmf0 = convolve(&pmf0, &part);
        }
        let pmf1 = convolve(&pmf0, &binomial_pmf(model.current.u, model.current.h));
        Ok(CountDistribution { pmf0, pmf1, q1: model.q1 })
    }

    fn cdf(pmf: &[f64], below: usize) -> f64 {
        pmf.iter().take(below).sum()
    }

    pub fn ber(&self, eta: f64) -> Result<BerResult> {
        let k = check_eta(eta)?;
        Ok(BerResult::from_cdfs(Self::cdf(&self.pmf0, k), Self::cdf(&self.pmf1, k), self.q1))
    }
}

/// Same quantity as [`ber_exact`] from the convolved PMFs.
pub fn ber_convolution_oracle(model: &ObservationModel, eta: f64) -> Result<BerResult> {
    CountDistribution::new(model)?.ber(eta)
}

/// Closed product form for `eta = 1` with equiprobable bits on the
/// receiver's own link: the only error events are "nothing arrives given 1"
/// and "something arrives given 0".
pub fn ber_corollary_eta1(model: &ObservationModel) -> Result<f64> {
    model.validate()?;
    if model.q1 != 0.5 {
        return Err(Error::Precondition(format!("needs q1 = 1/2, got {}", model.q1)));
    }
    let silent: f64 = model.mixtures().map(|c| mixture_derivatives(c, 0)[0]).product();
    let beta0 = binomial_derivatives(model.current.u, model.current.h, 0)[0];
    Ok(0.5 * (1.0 + silent * (beta0 - 1.0)))
}

/// Closed form for a channel with no memory: only the current slot of both
/// links contributes.
pub fn ber_no_isi(model: &ObservationModel, eta: f64) -> Result<BerResult> {
    model.validate()?;
    let k = check_eta(eta)?;
    let idle = |c: &MixtureComponent| c.u == 0 || c.h == 0.0;
    if !model.isi.iter().all(idle) || !model.cci.iter().skip(1).all(idle) {
        return Err(Error::Precondition("residue from earlier slots must be zero".into()));
    }
    let kmax = k - 1;
    let beta = binomial_derivatives(model.current.u, model.current.h, kmax);
    let alpha = match model.cci.first() {
        Some(c) => mixture_derivatives(c, kmax),
        None => vec![1.0],
    };
    let coef = |v: &[f64], j: usize| v.get(j).copied().unwrap_or(0.0);
    let mut cdf1 = 0.0;
    let mut cdf0 = 0.0;
    for n in 0..k {
        for j in 0..=n {
            cdf1 += coef(&beta, n - j) * coef(&alpha, j);
        }
        cdf0 += coef(&alpha, n);
    }
    Ok(BerResult::from_cdfs(cdf0, cdf1, model.q1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    /// Poisson log-likelihood ratio closed form.
    Closed,
    /// Mean ratio undefined; integer grid search.
    GridFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChoice {
    pub eta: f64,
    pub method: ThresholdMethod,
}

/// Integer threshold in `1..=max_eta` minimizing the exact error probability.
/// Ties go to the smallest threshold.
pub fn grid_search_threshold(model: &ObservationModel, max_eta: u64) -> Result<(u64, BerResult)> {
    let dist = CountDistribution::new(model)?;
    let mut best: Option<(u64, BerResult)> = None;
    for eta in 1..=max_eta.max(1) {
        let r = dist.ber(eta as f64)?;
        if best.is_none_or(|(_, b)| r.pe < b.pe) {
            best = Some((eta, r));
        }
    }
    Ok(best.expect("grid is never empty"))
}

/// Threshold from a Poisson approximation of the count under each
/// hypothesis. Thresholds below one are raised to one. When the mean under
/// bit 0 is zero or the two means coincide the ratio is undefined and the
/// best integer threshold in `1..=fallback_max` is used instead.
pub fn suboptimal_threshold(model: &ObservationModel, fallback_max: u64) -> Result<ThresholdChoice> {
    model.validate()?;
    let lambda0 = model.mean(false);
    let lambda1 = model.mean(true);
    if lambda0 > 0.0 && lambda1 > lambda0 {
        let q0 = 1.0 - model.q1;
        let signal = model.current.h * model.current.u as f64;
        let eta = ((q0 / model.q1).ln() + signal) / (lambda1 / lambda0).ln();
        return Ok(ThresholdChoice { eta: eta.max(1.0), method: ThresholdMethod::Closed });
    }
    let (eta, _) = grid_search_threshold(model, fallback_max)?;
    Ok(ThresholdChoice { eta: eta as f64, method: ThresholdMethod::GridFallback })
}

/// Empirical error rates with 95% normal-approximation half-widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McBerResult {
    pub pe0: f64,
    pub pe1: f64,
    pub pe: f64,
    pub ci0: f64,
    pub ci1: f64,
    pub ci: f64,
    pub trials0: u64,
    pub trials1: u64,
}

fn ci95(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Draws `trials` independent slots: a fresh current bit, fresh bits for every
/// residue and cross-link component and binomial counts for those sent.
pub fn mc_link_ber(model: &ObservationModel, eta: f64, trials: u64, seed: u64) -> Result<McBerResult> {
    model.validate()?;
    check_eta(eta)?;
    if trials < 1 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let rule = DetectionConfig { eta };
    let sampler = |u: u64, h: f64| Binomial::new(u, h).map_err(|e| Error::InvalidParameter(e.to_string()));
    let current = sampler(model.current.u, model.current.h)?;
    let mixtures = model
        .mixtures()
        .map(|c| Ok((c.q1, sampler(c.u, c.h)?)))
        .collect::<Result<Vec<_>>>()?;

    let n_batches = trials.div_ceil(MC_BATCH);
    let run = |batch: u64| -> [u64; 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch);
        let count = MC_BATCH.min(trials - batch * MC_BATCH);
        // [sent 0, errors given 0, sent 1, errors given 1]
        let mut tally = [0u64; 4];
        for _ in 0..count {
            let bit = rng.random::<f64>() < model.q1;
            let mut z = if bit { rng.sample(current) } else { 0 };
            for (q1, dist) in &mixtures {
                if rng.random::<f64>() < *q1 {
                    z += rng.sample(dist);
                }
            }
            let slot = if bit { 2 } else { 0 };
            tally[slot] += 1;
            if rule.decide(z) != bit {
                tally[slot + 1] += 1;
            }
        }
        tally
    };
    let tally = (0..n_batches)
        .into_par_iter()
        .map(run)
        .reduce(|| [0; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
    let ratio = |e: u64, n: u64| if n == 0 { 0.0 } else { e as f64 / n as f64 };
    let pe0 = ratio(tally[1], tally[0]);
    let pe1 = ratio(tally[3], tally[2]);
    let pe = ratio(tally[1] + tally[3], trials);
    Ok(McBerResult {
        pe0,
        pe1,
        pe,
        ci0: ci95(pe0, tally[0]),
        ci1: ci95(pe1, tally[2]),
        ci: ci95(pe, trials),
        trials0: tally[0],
        trials1: tally[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mix(q1: f64, u: u64, h: f64) -> MixtureComponent {
        MixtureComponent { q1, u, h }
    }

    fn model(u: u64, h: f64, isi: Vec<MixtureComponent>, cci: Vec<MixtureComponent>) -> ObservationModel {
        ObservationModel { q1: 0.5, current: BinomialComponent { u, h }, isi, cci }
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()) || a == b
    }

    #[test]
    fn silent_channel() {
        let m = model(20, 0.0, vec![mix(0.5, 20, 0.0)], vec![mix(0.5, 9, 0.0), mix(0.5, 9, 0.0)]);
        for r in [ber_exact(&m, 1.0).unwrap(), ber_convolution_oracle(&m, 1.0).unwrap()] {
            assert_eq!((r.pe1, r.pe0, r.pe), (1.0, 0.0, 0.5));
        }
        assert_eq!(ber_corollary_eta1(&m).unwrap(), 0.5);
        let mc = mc_link_ber(&m, 1.0, 2000, 1).unwrap();
        assert_eq!(mc.pe1, 1.0);
    }

    #[test]
    fn single_binomial_tail() {
        let m = model(12, 0.1, vec![], vec![mix(0.5, 0, 0.3)]);
        let r = ber_exact(&m, 1.0).unwrap();
        assert!(close(r.pe1, 0.9f64.powi(12), 1e-15));
        assert_eq!(r.pe0, 0.0);
        let nisi = ber_no_isi(&m, 1.0).unwrap();
        assert!(close(nisi.pe1, r.pe1, 1e-15));
    }

    #[test]
    fn binomial_pmf_matches_direct_formula() {
        for &(u, h) in &[(0u64, 0.3), (1, 0.5), (7, 0.2), (40, 0.93), (300, 0.01)] {
            let pmf = binomial_pmf(u, h);
            let direct = binomial_derivatives(u, h, u as usize);
            for (a, b) in pmf.iter().zip(&direct).filter(|(_, b)| **b > 1e-30) {
                assert!(close(*a, *b, 1e-12), "u={u} h={h}: {a} vs {b}");
            }
            assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
        assert_eq!(binomial_pmf(3, 1.0), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn composition_sum_counts_tuples() {
        // All-ones coefficients count tuples with bounded sum.
        let ones = vec![vec![1.0; 10]; 4];
        assert_eq!(composition_sum(&ones, 5), binom_f64(5 + 4, 4));
        // Bounded supports: n_0 ≤ 1, n_1 ≤ 2, sum ≤ 2 → (0,0),(0,1),(0,2),(1,0),(1,1).
        assert_eq!(composition_sum(&[vec![1.0; 2], vec![1.0; 3]], 2), 5.0);
        assert_eq!(composition_count(1, 1.0), 1.0);
        assert_eq!(composition_count(3, 5.0), binom_f64(10, 6));
    }

    #[test]
    fn exact_agrees_with_convolution() {
        let m = model(
            25,
            0.12,
            vec![mix(0.5, 25, 0.05), mix(0.5, 25, 0.02)],
            vec![mix(0.3, 14, 0.08), mix(0.3, 11, 0.03), mix(0.3, 30, 0.01)],
        );
        for eta in [1.0, 2.0, 3.5, 6.0, 9.0] {
            let a = ber_exact(&m, eta).unwrap();
            let b = ber_convolution_oracle(&m, eta).unwrap();
            assert!(close(a.pe1, b.pe1, 1e-12), "eta {eta}: {a:?} {b:?}");
            assert!(close(a.cdf0, b.cdf0, 1e-12), "eta {eta}: {a:?} {b:?}");
        }
    }

    #[test]
    fn real_threshold_rounds_up() {
        let m = model(10, 0.3, vec![mix(0.5, 10, 0.1)], vec![mix(0.5, 5, 0.1)]);
        assert_eq!(ber_exact(&m, 2.2).unwrap(), ber_exact(&m, 3.0).unwrap());
        assert!(ber_exact(&m, 0.0).is_err());
        assert!(DetectionConfig::new(-1.0).is_err());
        assert!(DetectionConfig::new(2.5).unwrap().decide(3));
        assert!(!DetectionConfig::new(2.5).unwrap().decide(2));
    }

    #[test]
    fn complexity_cap_refuses() {
        let cci = vec![mix(0.5, 100, 0.1); 10];
        let m = model(100, 0.1, vec![mix(0.5, 100, 0.1); 9], cci);
        match ber_exact(&m, 60.0) {
            Err(Error::ComplexityCap { count, .. }) => assert!(count > COMPOSITION_CAP),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn support_limit() {
        let m = model(SUPPORT_LIMIT, 0.1, vec![], vec![mix(0.5, 1, 0.1)]);
        assert!(matches!(ber_convolution_oracle(&m, 1.0), Err(Error::SupportOverflow { .. })));
    }

    #[test]
    fn no_isi_requires_memoryless_channel() {
        let m = model(10, 0.3, vec![mix(0.5, 10, 0.1)], vec![mix(0.5, 5, 0.1)]);
        assert!(ber_no_isi(&m, 1.0).is_err());
        let m = model(10, 0.3, vec![mix(0.5, 10, 0.0)], vec![mix(0.5, 5, 0.1), mix(0.5, 0, 0.4)]);
        let a = ber_no_isi(&m, 3.0).unwrap();
        let b = ber_convolution_oracle(&m, 3.0).unwrap();
        assert!(close(a.pe1, b.pe1, 1e-13) && close(a.cdf0, b.cdf0, 1e-13));
    }

    #[test]
    fn threshold_arithmetic() {
        // λ0 = 0.5·16·0.25 = 2, λ1 = 20·0.1 + λ0 = 4.
        let m = model(20, 0.1, vec![], vec![mix(0.5, 16, 0.25)]);
        let t = suboptimal_threshold(&m, 20).unwrap();
        assert_eq!(t.method, ThresholdMethod::Closed);
        assert!(close(t.eta, 2.0 / std::f64::consts::LN_2, 1e-14));
        // Below one is raised to one: λ0 = 0.5, λ1 = 1.
        let m = model(10, 0.05, vec![], vec![mix(0.5, 4, 0.25)]);
        assert_eq!(suboptimal_threshold(&m, 20).unwrap().eta, 1.0);
        // λ1 = e·λ0 with λ0 = 1: u·h = e − 1; eta = u·h.
        let uh = std::f64::consts::E - 1.0;
        let m = model(100, uh / 100.0, vec![], vec![mix(0.5, 4, 0.5)]);
        let t = suboptimal_threshold(&m, 20).unwrap();
        assert!(close(t.eta, uh, 1e-14));
    }

    #[test]
    fn threshold_falls_back_without_background() {
        let m = model(30, 0.2, vec![], vec![mix(0.5, 0, 0.1)]);
        let t = suboptimal_threshold(&m, 20).unwrap();
        assert_eq!(t.method, ThresholdMethod::GridFallback);
        // No background: any count at all means a 1 was sent.
        assert_eq!(t.eta, 1.0);
    }

    #[test]
    fn model_from_schedule() {
        let own = ChannelTaps::from_taps(vec![0.2, 0.1, 0.05]).unwrap();
        let cross = ChannelTaps::from_taps(vec![0.03, 0.02, 0.01]).unwrap();
        let traffic = TrafficModel::new(0.5, 0.4).unwrap();
        let s = SlotSchedule { u_s: vec![7, 8, 9], u_p: 100, horizon: 3 };
        let m = ObservationModel::for_receiver(Link::Secondary, 3, &s, &own, &cross, &traffic).unwrap();
        assert_eq!(m.q1, 0.4);
        assert_eq!(m.current, BinomialComponent { u: 9, h: 0.2 });
        assert_eq!(m.isi, vec![mix(0.4, 8, 0.1), mix(0.4, 7, 0.05)]);
        assert_eq!(m.cci, vec![mix(0.5, 100, 0.03), mix(0.5, 100, 0.02), mix(0.5, 100, 0.01)]);
        assert!(ObservationModel::for_receiver(Link::Primary, 4, &s, &own, &cross, &traffic).is_err());
    }

    #[test]
    fn monte_carlo_is_repeatable() {
        let m = model(10, 0.3, vec![mix(0.5, 10, 0.1)], vec![mix(0.5, 5, 0.1)]);
        let a = mc_link_ber(&m, 2.0, 100_000, 9).unwrap();
        assert_eq!(a, mc_link_ber(&m, 2.0, 100_000, 9).unwrap());
        let exact = ber_exact(&m, 2.0).unwrap();
        assert!((a.pe - exact.pe).abs() < 1.5 * a.ci + 1e-12);
    }
}
