//! Physical parameters, node placement and the derived two-receiver geometry.
//!
//! Units are fixed throughout the crate: lengths in μm, times in s,
//! diffusion coefficients in μm²/s and degradation rates in 1/s.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 3];

pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn dist(a: &Point, b: &Point) -> f64 {
    let d = sub(a, b);
    dot(&d, &d).sqrt()
}

/// One of the two coexisting links. Transmitters and receivers share the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Link {
    #[serde(rename = "P")]
    Primary,
    #[serde(rename = "S")]
    Secondary,
}

impl Link {
    pub const BOTH: [Link; 2] = [Link::Primary, Link::Secondary];

    pub fn other(self) -> Link {
        match self {
            Link::Primary => Link::Secondary,
            Link::Secondary => Link::Primary,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Link::Primary => 0,
            Link::Secondary => 1,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Link::Primary => "P",
            Link::Secondary => "S",
        }
    }
}

/// Propagation medium and slot timing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumParams {
    /// Diffusion coefficient, μm²/s.
    #[serde(rename = "D")]
    pub d: f64,
    /// Degradation rate constant, 1/s.
    pub mu: f64,
    /// Slot duration, s.
    #[serde(rename = "Tb")]
    pub tb: f64,
}

impl MediumParams {
    pub fn new(d: f64, mu: f64, tb: f64) -> Result<Self> {
        let m = MediumParams { d, mu, tb };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidParameter(format!("D must be positive, got {}", self.d)));
        }
        if !(self.tb > 0.0 && self.tb.is_finite()) {
            return Err(Error::InvalidParameter(format!("Tb must be positive, got {}", self.tb)));
        }
        if !(self.mu >= 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be >= 0, got {}", self.mu)));
        }
        Ok(())
    }

    /// Half-life `ln 2 / mu`; infinite when molecules do not degrade.
    pub fn half_life(&self) -> f64 {
        if self.mu > 0.0 {
            std::f64::consts::LN_2 / self.mu
        } else {
            f64::INFINITY
        }
    }
}

/// Positions of both transmitters and both receiver centres, plus radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    #[serde(rename = "x_P")]
    pub x_p: Point,
    #[serde(rename = "x_S")]
    pub x_s: Point,
    #[serde(rename = "y_P")]
    pub y_p: Point,
    #[serde(rename = "y_S")]
    pub y_s: Point,
    #[serde(rename = "a_P")]
    pub a_p: f64,
    #[serde(rename = "a_S")]
    pub a_s: f64,
}

impl Topology {
    pub fn new(x_p: Point, x_s: Point, y_p: Point, y_s: Point, a_p: f64, a_s: f64) -> Result<Self> {
        let t = Topology { x_p, x_s, y_p, y_s, a_p, a_s };
        t.validate()?;
        Ok(t)
    }

    pub fn tx(&self, link: Link) -> Point {
        match link {
            Link::Primary => self.x_p,
            Link::Secondary => self.x_s,
        }
    }

    pub fn rx(&self, link: Link) -> Point {
        match link {
            Link::Primary => self.y_p,
            Link::Secondary => self.y_s,
        }
    }

    pub fn radius(&self, link: Link) -> f64 {
        match link {
            Link::Primary => self.a_p,
            Link::Secondary => self.a_s,
        }
    }

    /// Distance between transmitter `tx` and the centre of receiver `rx`.
    pub fn distance(&self, tx: Link, rx: Link) -> f64 {
        dist(&self.tx(tx), &self.rx(rx))
    }

    /// Distance between the two receiver centres.
    pub fn separation(&self) -> f64 {
        dist(&self.y_p, &self.y_s)
    }

    /// Hard invariants: positive radii, disjoint receivers, transmitters outside both.
    pub fn validate(&self) -> Result<()> {
        let coords = [self.x_p, self.x_s, self.y_p, self.y_s];
        if coords.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidTopology("non-finite coordinate".into()));
        }
        for link in Link::BOTH {
            let a = self.radius(link);
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidTopology(format!(
                    "receiver {} radius must be positive, got {a}",
                    link.tag()
                )));
            }
        }
        let sep = self.separation();
        if sep <= self.a_p + self.a_s {
            return Err(Error::InvalidTopology(format!(
                "receivers overlap: centre separation {sep} <= a_P + a_S = {}",
                self.a_p + self.a_s
            )));
        }
        for tx in Link::BOTH {
            for rx in Link::BOTH {
                let r = self.distance(tx, rx);
                if r <= self.radius(rx) {
                    return Err(Error::InvalidTopology(format!(
                        "transmitter {} lies inside or on receiver {} (r = {r}, a = {})",
                        tx.tag(),
                        rx.tag(),
                        self.radius(rx)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Geometry seen from one transmitter looking at a target receiver `i` in the
/// presence of the other receiver `ī`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoFarGeometry {
    /// Transmitter to target centre, `r_mi`.
    pub r_target: f64,
    /// Transmitter to other centre, `r_mī`.
    pub r_other: f64,
    /// From the target's point nearest the transmitter to the other centre, `R_miī`.
    pub near_target_to_other: f64,
    /// From the other receiver's point nearest the transmitter to the target centre, `R_mīi`.
    pub near_other_to_target: f64,
    /// Angle between the two centres viewed from the transmitter, rad.
    pub phi: f64,
    pub a_target: f64,
    pub a_other: f64,
}

impl TwoFarGeometry {
    /// Builds the geometry from raw points.
    ///
    /// `a_other` may be zero, which models a single receiver (no competing
    /// absorber); the target radius must be positive.
    pub fn from_points(tx: Point, target: Point, other: Point, a_target: f64, a_other: f64) -> Result<Self> {
        if !(a_target > 0.0) || !(a_other >= 0.0) {
            return Err(Error::InvalidTopology(format!(
                "radii must satisfy a_target > 0, a_other >= 0 (got {a_target}, {a_other})"
            )));
        }
        let to_target = sub(&target, &tx);
        let to_other = sub(&other, &tx);
        let r_target = dot(&to_target, &to_target).sqrt();
        let r_other = dot(&to_other, &to_other).sqrt();
        if r_target <= a_target || r_other <= a_other {
            return Err(Error::InvalidTopology("transmitter inside a receiver".into()));
        }
        if dist(&target, &other) <= a_target + a_other {
            return Err(Error::InvalidTopology("receivers overlap".into()));
        }
        let cos_phi = (dot(&to_target, &to_other) / (r_target * r_other)).clamp(-1.0, 1.0);
        let phi = cos_phi.acos();
        let near_target_to_other = law_of_cosines(r_target - a_target, r_other, cos_phi);
        let near_other_to_target = law_of_cosines(r_other - a_other, r_target, cos_phi);
        Ok(TwoFarGeometry {
            r_target,
            r_other,
            near_target_to_other,
            near_other_to_target,
            phi,
            a_target,
            a_other,
        })
    }

    /// Image-series ratio `γ = a_i·a_ī / (R_miī·R_mīi)`.
    pub fn gamma(&self) -> f64 {
        self.a_target * self.a_other / (self.near_target_to_other * self.near_other_to_target)
    }

    /// Gap travelled on a target-bound leg, `R_mīi − a_i`.
    pub(crate) fn gap_into_target(&self) -> f64 {
        self.near_other_to_target - self.a_target
    }

    /// Gap travelled on an other-bound leg, `R_miī − a_ī`.
    pub(crate) fn gap_into_other(&self) -> f64 {
        self.near_target_to_other - self.a_other
    }

    /// `Φ(n)`: path length for direct arrival after `n` round trips.
    pub fn phi_distance(&self, n: u32) -> f64 {
        let n = n as f64;
        self.r_target - self.a_target + n * self.gap_into_target() + n * self.gap_into_other()
    }

    /// `Ψ(n)`: path length for arrival via the other receiver after `n` round trips.
    pub fn psi_distance(&self, n: u32) -> f64 {
        let n = n as f64;
        self.r_other - self.a_other + (n + 1.0) * self.gap_into_target() + n * self.gap_into_other()
    }

    /// Weight of the direct family, `a_i / r_mi`.
    pub fn direct_weight(&self) -> f64 {
        self.a_target / self.r_target
    }

    /// Weight of the diverted family, `a_i·a_ī / (r_mī·R_mīi)`.
    pub fn diverted_weight(&self) -> f64 {
        self.a_target * self.a_other / (self.r_other * self.near_other_to_target)
    }

    pub fn check_convergent(&self) -> Result<f64> {
        let g = self.gamma();
        if g.is_finite() && (0.0..1.0).contains(&g) {
            Ok(g)
        } else {
            Err(Error::NonConvergentSeries(g))
        }
    }
}

fn law_of_cosines(b: f64, c: f64, cos_phi: f64) -> f64 {
    (b * b + c * c - 2.0 * b * c * cos_phi).max(0.0).sqrt()
}

/// Geometry for transmitter `tx` aiming at receiver `target`.
pub fn derive_geometry(topology: &Topology, tx: Link, target: Link) -> Result<TwoFarGeometry> {
    topology.validate()?;
    TwoFarGeometry::from_points(
        topology.tx(tx),
        topology.rx(target),
        topology.rx(target.other()),
        topology.radius(target),
        topology.radius(target.other()),
    )
}

/// Soft far-field diagnostics. Never blocks a computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// Indexed `[tx][rx]` by [`Link::index`].
    pub far_field_ok: [[bool; 2]; 2],
    pub separation_ok: bool,
    pub messages: Vec<String>,
}

impl ValidityReport {
    pub fn all_ok(&self) -> bool {
        self.separation_ok && self.far_field_ok.iter().flatten().all(|&ok| ok)
    }
}

/// Flags transmitter-receiver pairs closer than `factor·a_i` and receiver
/// pairs separated by less than `factor·max(a_P, a_S)`.
pub fn validate_topology(topology: &Topology, factor: f64) -> ValidityReport {
    let mut far_field_ok = [[true; 2]; 2];
    let mut messages = Vec::new();
    for tx in Link::BOTH {
        for rx in Link::BOTH {
            let r = topology.distance(tx, rx);
            let a = topology.radius(rx);
            if r < factor * a {
                far_field_ok[tx.index()][rx.index()] = false;
                messages.push(format!(
                    "TX_{} is {r:.4} um from FAR_{}, below {factor}*a = {:.4} um; \
                     hitting-probability approximation may be inaccurate",
                    tx.tag(),
                    rx.tag(),
                    factor * a
                ));
            }
        }
    }
    let sep = topology.separation();
    let a_max = topology.a_p.max(topology.a_s);
    let separation_ok = sep >= factor * a_max;
    if !separation_ok {
        messages.push(format!(
            "receiver separation {sep:.4} um is below {factor}*max(a) = {:.4} um; \
             mutual-influence approximation may be inaccurate",
            factor * a_max
        ));
    }
    ValidityReport { far_field_ok, separation_ok, messages }
}
