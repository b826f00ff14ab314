//! Secondary-transmitter budgeting under an interference cap at the primary
//! receiver, and expected-molecule accounting.
//!
//! Slots are numbered from 1. `SlotSchedule::u_s[j]` holds the budget of slot
//! `j + 1`, so the interference seen in slot `l` is
//! `q1S · Σ_{k=1..l} u_S[k]·h_SP[l − k]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hitting::ChannelTaps;
use crate::model::Link;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficModel {
    #[serde(rename = "q1P")]
    pub q1_p: f64,
    #[serde(rename = "q1S")]
    pub q1_s: f64,
}

impl TrafficModel {
    pub fn new(q1_p: f64, q1_s: f64) -> Result<Self> {
        let t = TrafficModel { q1_p, q1_s };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, q) in [("q1P", self.q1_p), ("q1S", self.q1_s)] {
            if !(q > 0.0 && q <= 1.0) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1], got {q}")));
            }
        }
        Ok(())
    }

    pub fn q1(&self, link: Link) -> f64 {
        match link {
            Link::Primary => self.q1_p,
            Link::Secondary => self.q1_s,
        }
    }

    pub fn q0(&self, link: Link) -> f64 {
        1.0 - self.q1(link)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlParams {
    /// Molecules per primary emission.
    #[serde(rename = "N")]
    pub n: u64,
    /// Secondary emission cap.
    #[serde(rename = "uL")]
    pub u_l: u64,
    /// Expected-interference threshold at the primary receiver.
    #[serde(rename = "uM")]
    pub u_m: f64,
}

impl ControlParams {
    pub fn new(n: u64, u_l: u64, u_m: f64) -> Result<Self> {
        let c = ControlParams { n, u_l, u_m };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u_m >= 0.0 && self.u_m.is_finite()) {
            return Err(Error::InvalidParameter(format!("uM must be finite and >= 0, got {}", self.u_m)));
        }
        Ok(())
    }
}

/// Long-run shape of a schedule's tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailBehaviour {
    Plateau(u64),
    Oscillating { min: u64, max: u64 },
    Drifting,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSchedule {
    /// `u_s[j]` is the secondary budget for slot `j + 1`.
    pub u_s: Vec<u64>,
    /// Primary emission per slot.
    pub u_p: u64,
    pub horizon: usize,
}

impl SlotSchedule {
    /// Fixed secondary budget `u` in every slot.
    pub fn constant(u: u64, u_p: u64, horizon: usize) -> Self {
        SlotSchedule { u_s: vec![u; horizon], u_p, horizon }
    }

    /// Budget in slot `l` (1-based).
    pub fn u_s_at(&self, l: usize) -> u64 {
        self.u_s[l - 1]
    }

    /// Classifies the last `window` slots. A plateau needs every value equal;
    /// oscillation needs the step direction to flip at least `window / 2` times.
    pub fn tail(&self, window: usize) -> TailBehaviour {
        let window = window.clamp(2, self.u_s.len().max(2));
        if self.u_s.len() < window {
            return TailBehaviour::Drifting;
        }
        let tail = &self.u_s[self.u_s.len() - window..];
        if tail.iter().all(|&u| u == tail[0]) {
            return TailBehaviour::Plateau(tail[0]);
        }
        let steps: Vec<i8> = tail
            .windows(2)
            .map(|w| w[1].cmp(&w[0]) as i8)
            .filter(|&s| s != 0)
            .collect();
        let flips = steps.windows(2).filter(|s| s[0] != s[1]).count();
        if flips >= window / 2 {
            let min = *tail.iter().min().unwrap();
            let max = *tail.iter().max().unwrap();
            TailBehaviour::Oscillating { min, max }
        } else {
            TailBehaviour::Drifting
        }
    }
}

/// `Σ_{k=1..l} u[k]·h[l − k]`, summed in increasing `k`. Every interference
/// figure goes through this order so the budget check and the reported value
/// agree bit for bit.
fn weighted_sum(u: &[u64], taps: &ChannelTaps, l: usize) -> f64 {
    u[..l]
        .iter()
        .enumerate()
        .fold(0.0, |acc, (j, &uk)| acc + uk as f64 * taps.tap(l - 1 - j))
}

/// Largest admissible budget given the interference already committed.
fn budget(partial: f64, h0: f64, traffic: &TrafficModel, params: &ControlParams) -> u64 {
    if h0 == 0.0 {
        return params.u_l;
    }
    let raw = ((params.u_m / traffic.q1_s - partial) / h0).max(0.0);
    let mut u = raw.min(params.u_l as f64).floor() as u64;
    // The division can round up by an ulp; step down until the check holds
    // with exactly the arithmetic used by `expected_cci`.
    while u > 0 && traffic.q1_s * (partial + u as f64 * h0) > params.u_m {
        u -= 1;
    }
    u
}

fn check_inputs(taps: &ChannelTaps, traffic: &TrafficModel, params: &ControlParams) -> Result<()> {
    traffic.validate()?;
    params.validate()?;
    if taps.is_empty() {
        return Err(Error::InvalidParameter("taps must not be empty".into()));
    }
    Ok(())
}

/// Slot-by-slot budget: the largest integer emission, capped at `uL`, that
/// keeps the expected interference at the primary receiver within `uM` given
/// the budgets already assigned.
///
/// A zero first tap means the primary receiver is unreachable within one
/// slot and the budget saturates at `uL`.
pub fn transmit_budget(
    taps_sp: &ChannelTaps,
    traffic: &TrafficModel,
    params: &ControlParams,
    horizon: usize,
) -> Result<SlotSchedule> {
    check_inputs(taps_sp, traffic, params)?;
    if taps_sp.len() < horizon {
        return Err(Error::Precondition(format!(
            "taps cover {} lags but the horizon is {horizon}",
            taps_sp.len()
        )));
    }
    let h0 = taps_sp.tap(0);
    let mut u_s: Vec<u64> = Vec::with_capacity(horizon);
    for l in 1..=horizon {
        u_s.push(0);
        let partial = weighted_sum(&u_s, taps_sp, l);
        u_s[l - 1] = budget(partial, h0, traffic, params);
    }
    Ok(SlotSchedule { u_s, u_p: params.n, horizon })
}

/// Budget when the channel has no memory beyond the current slot:
/// `⌊min(uL, uM / (q1S·h[0]))⌋`.
pub fn transmit_budget_no_isi(taps_sp: &ChannelTaps, traffic: &TrafficModel, params: &ControlParams) -> Result<u64> {
    check_inputs(taps_sp, traffic, params)?;
    Ok(budget(0.0, taps_sp.tap(0), traffic, params))
}

/// Constant budget that keeps long-run interference within `uM`:
/// `⌊min(uL, uM / (q1S·p∞))⌋`, where `p∞` is the eventual hitting probability
/// of the secondary-to-primary pair.
pub fn steady_state_bound(p_inf_sp: f64, traffic: &TrafficModel, params: &ControlParams) -> Result<u64> {
    traffic.validate()?;
    params.validate()?;
    if !(0.0..=1.0).contains(&p_inf_sp) {
        return Err(Error::InvalidParameter(format!("p_inf must lie in [0, 1], got {p_inf_sp}")));
    }
    if p_inf_sp == 0.0 {
        return Ok(params.u_l);
    }
    Ok((params.u_m / (traffic.q1_s * p_inf_sp)).min(params.u_l as f64).floor() as u64)
}

/// Expected interference at the primary receiver in slot `l`:
/// `q1S · Σ_{k=1..l} u_S[k]·h_SP[l − k]`.
pub fn expected_cci(schedule: &SlotSchedule, taps_sp: &ChannelTaps, traffic: &TrafficModel, l: usize) -> Result<f64> {
    if l < 1 || l > schedule.u_s.len() {
        return Err(Error::Precondition(format!("slot {l} outside 1..={}", schedule.u_s.len())));
    }
    Ok(traffic.q1_s * weighted_sum(&schedule.u_s, taps_sp, l))
}

/// Expected number of molecules absorbed by a receiver in slot `l`.
///
/// `taps_from_p` and `taps_from_s` are the channels from the primary and
/// secondary transmitters into that receiver. The primary term is
/// `N·q1P·p(l·Tb)` since the primary emits `N` in every slot.
pub fn expected_absorbed(
    schedule: &SlotSchedule,
    taps_from_p: &ChannelTaps,
    taps_from_s: &ChannelTaps,
    traffic: &TrafficModel,
    l: usize,
) -> Result<f64> {
    if l < 1 || l > schedule.u_s.len() || l >= taps_from_p.p_cum.len() {
        return Err(Error::Precondition(format!("slot {l} outside the schedule or tap horizon")));
    }
    let primary = schedule.u_p as f64 * traffic.q1_p * taps_from_p.p_cum[l];
    Ok(primary + traffic.q1_s * weighted_sum(&schedule.u_s, taps_from_s, l))
}

/// Rows `(slot, u_S, expected_cci)` for export.
pub fn schedule_table(
    schedule: &SlotSchedule,
    taps_sp: &ChannelTaps,
    traffic: &TrafficModel,
) -> Result<Vec<(usize, u64, f64)>> {
    (1..=schedule.u_s.len())
        .map(|l| expected_cci(schedule, taps_sp, traffic, l).map(|c| (l, schedule.u_s_at(l), c)))
        .collect()
}
