//! Hitting probabilities for a point source and one or two fully-absorbing
//! spherical receivers, with and without molecular degradation.
//!
//! The two-receiver expressions are image-type series in the ratio
//! `γ = a_i·a_ī / (R_miī·R_mīi)`. Each term pairs a "direct" path of length
//! `Φ(n)` with a "diverted" path of length `Ψ(n)` that first touches the
//! competing receiver; see [`TwoFarGeometry::phi_distance`] and
//! [`TwoFarGeometry::psi_distance`].

use serde::{Deserialize, Serialize};

use crate::erf::{erfc, erfcx};
use crate::error::{Error, Result};
use crate::model::{derive_geometry, Link, MediumParams, Topology, TwoFarGeometry};

/// Truncation rule for the image series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    /// Stop once the bound on a term's magnitude drops below this.
    pub tol: f64,
    /// Hard cap on the series index.
    pub n_max: u32,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { tol: 1e-12, n_max: 200 }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.n_max < 1 {
            return Err(Error::InvalidParameter(format!(
                "series control needs tol > 0 and n_max >= 1, got {:?}",
                self
            )));
        }
        Ok(())
    }
}

/// A truncated series value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// Number of indices summed.
    pub terms: u32,
    /// True when `n_max` was reached before the tolerance.
    pub truncated: bool,
}

impl SeriesSum {
    fn zero() -> Self {
        SeriesSum { value: 0.0, terms: 0, truncated: false }
    }
}

/// Single-sphere hitting probability `(a/r)·erfc((r − a)/√(4Dt))`.
pub fn p_single(t: f64, a: f64, r: f64, d: f64) -> Result<f64> {
    check_time(t)?;
    check_diffusion(d)?;
    if !(a > 0.0) || !(r > a) {
        return Err(Error::InvalidParameter(format!("need 0 < a < r, got a = {a}, r = {r}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        return Ok(a / r);
    }
    Ok(a / r * erfc((r - a) / (4.0 * d * t).sqrt()))
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")))
    }
}

fn check_diffusion(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("D must be positive, got {d}")))
    }
}

/// Sums `Σ γⁿ [w_Φ·k(Φ(n)) − w_Ψ·k(Ψ(n))]` for a non-negative kernel `k`.
fn image_series(geom: &TwoFarGeometry, ctrl: &SeriesControl, kernel: impl Fn(f64) -> f64) -> Result<SeriesSum> {
    ctrl.validate()?;
    let gamma = geom.check_convergent()?;
    let w_direct = geom.direct_weight();
    let w_diverted = geom.diverted_weight();
    let mut weight = 1.0;
    let mut value = 0.0;
    for n in 0..ctrl.n_max {
        let direct = w_direct * kernel(geom.phi_distance(n));
        let diverted = if w_diverted > 0.0 { w_diverted * kernel(geom.psi_distance(n)) } else { 0.0 };
        value += weight * (direct - diverted);
        if weight * (direct + diverted) < ctrl.tol {
            return Ok(SeriesSum { value, terms: n + 1, truncated: false });
        }
        weight *= gamma;
    }
    Ok(SeriesSum { value, terms: ctrl.n_max, truncated: true })
}

/// Probability that a molecule reaches the target receiver within `t`
/// while the other receiver competes for it (no degradation).
pub fn p_two_far(t: f64, geom: &TwoFarGeometry, d: f64, ctrl: &SeriesControl) -> Result<SeriesSum> {
    check_time(t)?;
    check_diffusion(d)?;
    geom.check_convergent()?;
    if t == 0.0 {
        return Ok(SeriesSum::zero());
    }
    if t.is_infinite() {
        let v = p_two_far_inf(geom)?;
        return Ok(SeriesSum { value: v, terms: 0, truncated: false });
    }
    let root = (4.0 * d * t).sqrt();
    let mut s = image_series(geom, ctrl, |x| erfc(x / root))?;
    s.value = s.value.clamp(0.0, 1.0);
    Ok(s)
}

/// Hitting rate `dp/dt` at time `tau > 0`, 1/s.
pub fn hitting_rate(tau: f64, geom: &TwoFarGeometry, d: f64, ctrl: &SeriesControl) -> Result<SeriesSum> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("hitting rate needs tau > 0, got {tau}")));
    }
    check_diffusion(d)?;
    if tau.is_infinite() {
        geom.check_convergent()?;
        return Ok(SeriesSum::zero());
    }
    let four_d_tau = 4.0 * d * tau;
    let norm = 1.0 / (std::f64::consts::PI * four_d_tau * tau * tau).sqrt();
    let mut s = image_series(geom, ctrl, |x| x * norm * (-x * x / four_d_tau).exp())?;
    s.value = s.value.max(0.0);
    Ok(s)
}

/// Degradation kernel
/// `f(x) = ½[erfc(A + B)·e^{2AB} + erfc(A − B)·e^{−2AB}]`
/// with `A = x/√(4Dt)`, `B = √(μt)`, so that `2AB = x√(μ/D)`.
///
/// The growing exponential is folded into `erfcx`:
/// `erfc(A + B)·e^{2AB} = erfcx(A + B)·e^{−A² − B²}`.
fn degradation_kernel(x: f64, d: f64, mu: f64, t: f64) -> f64 {
    let a = x / (4.0 * d * t).sqrt();
    let b = (mu * t).sqrt();
    let damp = -(a * a) - b * b;
    let first = erfcx(a + b) * damp.exp();
    let second = if a >= b {
        erfcx(a - b) * damp.exp()
    } else {
        erfc(a - b) * (-2.0 * a * b).exp()
    };
    0.5 * (first + second)
}

/// Probability that a molecule reaches the target receiver within `t`
/// before degrading at rate `mu`, with the other receiver competing.
pub fn p_two_far_deg(t: f64, geom: &TwoFarGeometry, d: f64, mu: f64, ctrl: &SeriesControl) -> Result<SeriesSum> {
    if !(mu >= 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be >= 0, got {mu}")));
    }
    if mu == 0.0 {
        return p_two_far(t, geom, d, ctrl);
    }
    check_time(t)?;
    check_diffusion(d)?;
    geom.check_convergent()?;
    if t == 0.0 || mu.is_infinite() {
        return Ok(SeriesSum::zero());
    }
    if t.is_infinite() {
        let v = p_two_far_deg_inf(geom, d, mu)?;
        return Ok(SeriesSum { value: v, terms: 0, truncated: false });
    }
    let mut s = image_series(geom, ctrl, |x| degradation_kernel(x, d, mu, t))?;
    s.value = s.value.clamp(0.0, 1.0);
    Ok(s)
}

/// Fraction of molecules that eventually reach the target (no degradation).
pub fn p_two_far_inf(geom: &TwoFarGeometry) -> Result<f64> {
    geom.check_convergent()?;
    let g = geom;
    let denom = g.near_target_to_other * g.near_other_to_target - g.a_target * g.a_other;
    let bracket = g.near_other_to_target / g.r_target - g.a_other / g.r_other;
    Ok((g.a_target * g.near_target_to_other / denom * bracket).clamp(0.0, 1.0))
}

/// Fraction of molecules that eventually reach the target before degrading.
pub fn p_two_far_deg_inf(geom: &TwoFarGeometry, d: f64, mu: f64) -> Result<f64> {
    check_diffusion(d)?;
    if !(mu >= 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be >= 0, got {mu}")));
    }
    geom.check_convergent()?;
    if mu.is_infinite() {
        return Ok(0.0);
    }
    let k = (mu / d).sqrt();
    let g = geom;
    let round_trip = g.gap_into_target() + g.gap_into_other();
    let denom =
        g.near_target_to_other * g.near_other_to_target - g.a_target * g.a_other * (-round_trip * k).exp();
    let direct = g.near_other_to_target / g.r_target * (-(g.r_target - g.a_target) * k).exp();
    let diverted = g.a_other / g.r_other * (-(g.r_other - g.a_other + g.gap_into_target()) * k).exp();
    Ok((g.a_target * g.near_target_to_other / denom * (direct - diverted)).clamp(0.0, 1.0))
}

/// Slotted channel for one transmitter-receiver pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelTaps {
    /// `taps[k]`: probability of arriving in the slot `k` slots after emission.
    pub taps: Vec<f64>,
    /// `p_cum[k]`: probability of having arrived by `k·Tb`, `k = 0..=L`.
    pub p_cum: Vec<f64>,
    /// `(transmitter, receiver)` when known.
    pub pair: Option<(Link, Link)>,
}

impl ChannelTaps {
    /// Wraps explicit taps; `p_cum` is their running sum.
    pub fn from_taps(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidParameter("at least one tap is required".into()));
        }
        if taps.iter().any(|h| !(0.0..=1.0).contains(h)) {
            return Err(Error::InvalidParameter("taps must lie in [0, 1]".into()));
        }
        let mut p_cum = Vec::with_capacity(taps.len() + 1);
        p_cum.push(0.0);
        let mut acc = 0.0;
        for h in &taps {
            acc += h;
            p_cum.push(acc);
        }
        if acc > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!("taps sum to {acc} > 1")));
        }
        Ok(ChannelTaps { taps, p_cum, pair: None })
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Tap at lag `k`; zero beyond the stored horizon.
    pub fn tap(&self, k: usize) -> f64 {
        self.taps.get(k).copied().unwrap_or(0.0)
    }

    /// Same taps with every lag beyond zero removed.
    pub fn without_isi(&self) -> ChannelTaps {
        let mut taps = vec![0.0; self.taps.len()];
        taps[0] = self.taps[0];
        let mut out = ChannelTaps::from_taps(taps).expect("subset of valid taps");
        out.pair = self.pair;
        out
    }
}

/// Slot taps `h[k] = p((k+1)·Tb, μ) − p(k·Tb, μ)` for `k < slots`.
///
/// Negative rounding residue is clipped to zero and `p_cum` is rebuilt as the
/// running sum of the taps, so `Σ taps == p_cum[L]` bit for bit.
pub fn channel_taps(
    geom: &TwoFarGeometry,
    d: f64,
    mu: f64,
    tb: f64,
    slots: usize,
    ctrl: &SeriesControl,
) -> Result<ChannelTaps> {
    if slots < 1 {
        return Err(Error::InvalidParameter("need at least one slot".into()));
    }
    if !(tb > 0.0 && tb.is_finite()) {
        return Err(Error::InvalidParameter(format!("Tb must be positive, got {tb}")));
    }
    let evaluated = (0..=slots)
        .map(|k| p_two_far_deg(k as f64 * tb, geom, d, mu, ctrl).map(|s| s.value))
        .collect::<Result<Vec<_>>>()?;
    let mut taps = Vec::with_capacity(slots);
    let mut p_cum = Vec::with_capacity(slots + 1);
    p_cum.push(0.0);
    let mut acc = 0.0;
    for w in evaluated.windows(2) {
        let h = (w[1] - w[0]).max(0.0);
        taps.push(h);
        acc += h;
        p_cum.push(acc);
    }
    Ok(ChannelTaps { taps, p_cum, pair: None })
}

/// [`channel_taps`] for the pair `tx → rx` of a topology.
pub fn channel_taps_for(
    topology: &Topology,
    medium: &MediumParams,
    tx: Link,
    rx: Link,
    slots: usize,
    ctrl: &SeriesControl,
) -> Result<ChannelTaps> {
    medium.validate()?;
    let geom = derive_geometry(topology, tx, rx)?;
    let mut taps = channel_taps(&geom, medium.d, medium.mu, medium.tb, slots, ctrl)?;
    taps.pair = Some((tx, rx));
    Ok(taps)
}
