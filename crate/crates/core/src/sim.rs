//! Particle-based Brownian simulation of molecules released from a point
//! source among fully-absorbing spheres.
//!
//! Each particle takes independent Gaussian steps with per-axis standard
//! deviation `√(2·D·dt)` and is absorbed by the first sphere it is found
//! inside at a step boundary. There is no intra-step bridge correction, so
//! absorption is biased low by `O(√dt)`. Degradation uses an exponential
//! lifetime drawn at emission.
//!
//! Particles are processed in fixed-size batches; batch `b` draws from the
//! ChaCha8 stream `b` of the master seed, so results depend only on
//! `(seed, batch_size)` and never on thread count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dist, Link, MediumParams, Point, Topology};

/// Skip-ahead safety factor: a particle at surface distance `d` may take
/// `n = ⌊(d / (JUMP_SIGMAS·σ))²⌋` steps at once. The chance that any skipped
/// boundary lies inside a sphere is below `6·P(Z > JUMP_SIGMAS/√3) ≈ 1e-11`.
const JUMP_SIGMAS: f64 = 12.0;

fn default_batch_size() -> u64 {
    4096
}

fn default_far_jumps() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Step size, s.
    pub dt: f64,
    pub n_particles: u64,
    /// Horizon, s.
    pub t_max: f64,
    pub seed: u64,
    pub n_time_bins: usize,
    /// Particles per RNG substream.
    #[serde(default = "default_batch_size")]
    pub batch_size: u64,
    /// Take several steps at once while far from every sphere.
    #[serde(default = "default_far_jumps")]
    pub far_jumps: bool,
}

impl SimConfig {
    pub fn new(dt: f64, n_particles: u64, t_max: f64, seed: u64, n_time_bins: usize) -> Self {
        SimConfig {
            dt,
            n_particles,
            t_max,
            seed,
            n_time_bins,
            batch_size: default_batch_size(),
            far_jumps: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_particles < 1 {
            return Err(Error::InvalidParameter("need at least one particle".into()));
        }
        if !(self.t_max >= self.dt && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be finite and >= dt, got {}",
                self.t_max
            )));
        }
        if self.n_time_bins < 1 {
            return Err(Error::InvalidParameter("need at least one time bin".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidParameter("batch_size must be >= 1".into()));
        }
        Ok(())
    }

    fn total_steps(&self) -> u64 {
        ((self.t_max / self.dt).round() as u64).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Point,
    pub radius: f64,
}

/// Outcome of a run. `hits[r][b]` counts particles absorbed by receiver `r`
/// at or before `bin_edges[b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub bin_edges: Vec<f64>,
    pub hits: Vec<Vec<u64>>,
    pub degraded: u64,
    pub alive: u64,
    pub n_particles: u64,
}

/// `√(p(1 − p)/n)`.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

impl SimResult {
    pub fn final_hits(&self, receiver: usize) -> u64 {
        *self.hits[receiver].last().unwrap_or(&0)
    }

    /// Empirical hitting probability at the end of bin `bin`.
    pub fn fraction(&self, receiver: usize, bin: usize) -> f64 {
        self.hits[receiver][bin] as f64 / self.n_particles as f64
    }

    /// 95% normal-approximation half-width for [`SimResult::fraction`].
    pub fn ci_halfwidth(&self, receiver: usize, bin: usize) -> f64 {
        1.96 * binomial_sigma(self.fraction(receiver, bin), self.n_particles)
    }

    /// Bin whose right edge matches `t` to within a part in 10⁹.
    pub fn bin_at(&self, t: f64) -> Option<usize> {
        self.bin_edges.iter().position(|&e| (e - t).abs() <= 1e-9 * t.abs().max(1e-12))
    }

    /// Empirical hitting probability at time `t`, which must be a bin edge.
    pub fn fraction_at(&self, receiver: usize, t: f64) -> Option<f64> {
        self.bin_at(t).map(|b| self.fraction(receiver, b))
    }

    fn accounting_holds(&self) -> bool {
        let hit: u64 = (0..self.hits.len()).map(|r| self.final_hits(r)).sum();
        hit + self.degraded + self.alive == self.n_particles
    }
}

#[derive(Default)]
struct BatchTally {
    per_bin: Vec<Vec<u64>>,
    degraded: u64,
    alive: u64,
}

enum Fate {
    Absorbed { sphere: usize, step: u64 },
    Degraded,
    Alive,
}

struct Walker<'a> {
    spheres: &'a [Sphere],
    sigma: f64,
    dt: f64,
    total_steps: u64,
    far_jumps: bool,
}

impl Walker<'_> {
    fn run(&self, start: Point, lifetime: f64, rng: &mut ChaCha8Rng) -> Fate {
        let mut pos = start;
        let mut step: u64 = 0;
        while step < self.total_steps {
            let mut nearest = 0;
            let mut gap = f64::INFINITY;
            let mut centre_dist = f64::INFINITY;
            for (k, s) in self.spheres.iter().enumerate() {
                let r = dist(&pos, &s.center);
                if r < centre_dist {
                    centre_dist = r;
                    nearest = k;
                }
                gap = gap.min(r - s.radius);
            }
            let mut n = 1u64;
            if self.far_jumps {
                let ratio = gap / (JUMP_SIGMAS * self.sigma);
                if ratio > 1.0 {
                    n = ((ratio * ratio) as u64).max(1);
                }
            }
            n = n.min(self.total_steps - step);
            let scale = self.sigma * (n as f64).sqrt();
            for c in pos.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *c += scale * z;
            }
            step += n;
            if step as f64 * self.dt > lifetime {
                return Fate::Degraded;
            }
            let mut hit: Option<usize> = None;
            for (k, s) in self.spheres.iter().enumerate() {
                let v = [pos[0] - s.center[0], pos[1] - s.center[1], pos[2] - s.center[2]];
                if v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= s.radius * s.radius {
                    hit = match hit {
                        // Nearer centre at the start of the step wins a tie.
                        Some(prev) if prev == nearest => Some(prev),
                        Some(_) if k == nearest => Some(k),
                        Some(prev) => Some(prev),
                        None => Some(k),
                    };
                }
            }
            if let Some(sphere) = hit {
                return Fate::Absorbed { sphere, step };
            }
        }
        Fate::Alive
    }
}

/// Releases `cfg.n_particles` molecules at `tx` and records first hits on `spheres`.
pub fn simulate_spheres(tx: Point, spheres: &[Sphere], medium: &MediumParams, cfg: &SimConfig) -> Result<SimResult> {
    medium.validate()?;
    cfg.validate()?;
    if spheres.is_empty() {
        return Err(Error::InvalidParameter("need at least one sphere".into()));
    }
    for s in spheres {
        if !(s.radius > 0.0) {
            return Err(Error::InvalidTopology(format!("sphere radius must be positive, got {}", s.radius)));
        }
        if dist(&tx, &s.center) <= s.radius {
            return Err(Error::InvalidTopology("transmitter inside a sphere".into()));
        }
    }

    let total_steps = cfg.total_steps();
    let n_bins = cfg.n_time_bins;
    let walker = Walker {
        spheres,
        sigma: (2.0 * medium.d * cfg.dt).sqrt(),
        dt: cfg.dt,
        total_steps,
        far_jumps: cfg.far_jumps,
    };
    let lifetimes = if medium.mu > 0.0 && medium.mu.is_finite() {
        Some(Exp::new(medium.mu).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let n_batches = cfg.n_particles.div_ceil(cfg.batch_size);

    let run_batch = |batch: u64| -> BatchTally {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(batch);
        let first = batch * cfg.batch_size;
        let count = cfg.batch_size.min(cfg.n_particles - first);
        let mut tally = BatchTally { per_bin: vec![vec![0; n_bins]; spheres.len()], ..Default::default() };
        for _ in 0..count {
            let lifetime = match (&lifetimes, medium.mu) {
                (Some(exp), _) => rng.sample(exp),
                (None, mu) if mu == 0.0 => f64::INFINITY,
                _ => 0.0,
            };
            match walker.run(tx, lifetime, &mut rng) {
                Fate::Absorbed { sphere, step } => {
                    let bin = ((step as u128 * n_bins as u128 - 1) / total_steps as u128) as usize;
                    tally.per_bin[sphere][bin] += 1;
                }
                Fate::Degraded => tally.degraded += 1,
                Fate::Alive => tally.alive += 1,
            }
        }
        tally
    };

    let tallies: Vec<BatchTally> = (0..n_batches).into_par_iter().map(run_batch).collect();

    let mut per_bin = vec![vec![0u64; n_bins]; spheres.len()];
    let mut degraded = 0;
    let mut alive = 0;
    for t in &tallies {
        for (acc, part) in per_bin.iter_mut().zip(&t.per_bin) {
            for (a, p) in acc.iter_mut().zip(part) {
                *a += p;
            }
        }
        degraded += t.degraded;
        alive += t.alive;
    }
    let hits = per_bin
        .into_iter()
        .map(|bins| {
            bins.iter()
                .scan(0u64, |acc, &c| {
                    *acc += c;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let bin_edges = (1..=n_bins)
        .map(|b| (b as u64 * total_steps) as f64 / n_bins as f64 * cfg.dt)
        .collect();
    let result = SimResult { bin_edges, hits, degraded, alive, n_particles: cfg.n_particles };
    debug_assert!(result.accounting_holds());
    Ok(result)
}

/// Simulates emissions from transmitter `tx`. Receiver order in the result
/// follows [`Link::index`]: `hits[0]` is FAR_P, `hits[1]` is FAR_S.
pub fn simulate_two_far(topology: &Topology, tx: Link, medium: &MediumParams, cfg: &SimConfig) -> Result<SimResult> {
    topology.validate()?;
    let spheres: Vec<Sphere> = Link::BOTH
        .iter()
        .map(|&l| Sphere { center: topology.rx(l), radius: topology.radius(l) })
        .collect();
    simulate_spheres(topology.tx(tx), &spheres, medium, cfg)
}

/// Empirical per-slot arrival fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotHistogram {
    pub tb: f64,
    /// `fractions[r][k]`: fraction of particles absorbed by receiver `r` in slot `k`.
    pub fractions: Vec<Vec<f64>>,
    pub n_particles: u64,
}

impl SlotHistogram {
    pub fn sigma(&self, receiver: usize, slot: usize) -> f64 {
        binomial_sigma(self.fractions[receiver][slot], self.n_particles)
    }

    pub fn cumulative(&self, receiver: usize) -> f64 {
        self.fractions[receiver].iter().sum()
    }
}

/// Empirical counterpart of the slotted channel taps over `slots` slots of `tb`.
pub fn simulate_first_hit_histogram(
    topology: &Topology,
    tx: Link,
    medium: &MediumParams,
    cfg: &SimConfig,
    tb: f64,
    slots: usize,
) -> Result<SlotHistogram> {
    if slots < 1 || !(tb > 0.0) {
        return Err(Error::InvalidParameter("need slots >= 1 and Tb > 0".into()));
    }
    let horizon = tb * slots as f64;
    if horizon > cfg.t_max * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("L*Tb = {horizon} exceeds t_max = {}", cfg.t_max)));
    }
    let run_cfg = SimConfig { t_max: horizon, n_time_bins: slots, ..*cfg };
    let res = simulate_two_far(topology, tx, medium, &run_cfg)?;
    let n = res.n_particles as f64;
    let fractions = res
        .hits
        .iter()
        .map(|cum| {
            let mut prev = 0u64;
            cum.iter()
                .map(|&c| {
                    let f = (c - prev) as f64 / n;
                    prev = c;
                    f
                })
                .collect()
        })
        .collect();
    Ok(SlotHistogram { tb, fractions, n_particles: res.n_particles })
}
