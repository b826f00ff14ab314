//! Figure recipes: default parameter sets and the computations behind them.

use std::fmt;

use mcvd_core::control::{
    expected_cci, steady_state_bound, transmit_budget, ControlParams, SlotSchedule, TrafficModel,
};
use mcvd_core::detection::{suboptimal_threshold, BerResult, CountDistribution, ObservationModel};
use mcvd_core::hitting::{channel_taps_for, p_two_far_deg, p_two_far_deg_inf, SeriesControl};
use mcvd_core::model::{derive_geometry, Link, MediumParams, Point, Topology};
use mcvd_core::sim::{simulate_two_far, SimConfig, SimResult};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{
    offset, ConfigError, ExperimentConfig, PlacementGrid, SimSettings, Sweep, SweepVariable, SCHEMA_VERSION,
};
use crate::output::{Cell, Table};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    UnknownRecipe(String),
    MissingSeed(String),
    Compute(mcvd_core::Error),
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "invalid_config",
            RunError::UnknownRecipe(_) => "unknown_recipe",
            RunError::MissingSeed(_) => "missing_seed",
            RunError::Compute(_) => "computation",
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::UnknownRecipe(name) => write!(f, "unknown recipe '{name}'"),
            RunError::MissingSeed(name) => write!(f, "recipe '{name}' is stochastic and needs --seed"),
            RunError::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<mcvd_core::Error> for RunError {
    fn from(e: mcvd_core::Error) -> Self {
        RunError::Compute(e)
    }
}

type RunResult<T> = Result<T, RunError>;

#[derive(Debug, Clone, Copy)]
pub struct Recipe {
    pub name: &'static str,
    pub description: &'static str,
    pub stochastic: bool,
    pub sweeps: &'static [SweepVariable],
}

const PHYSICAL: &[SweepVariable] = &[SweepVariable::UM, SweepVariable::RSp, SweepVariable::Mu, SweepVariable::Tb];

pub const RECIPES: [Recipe; 10] = [
    Recipe {
        name: "fig2a",
        description: "secondary budget per slot versus the interference threshold uM",
        stochastic: false,
        sweeps: PHYSICAL,
    },
    Recipe {
        name: "fig2b",
        description: "secondary budget per slot versus r_SP, Tb = 1 s",
        stochastic: false,
        sweeps: PHYSICAL,
    },
    Recipe {
        name: "fig2c",
        description: "secondary budget per slot versus r_SP, Tb = 0.4 s",
        stochastic: false,
        sweeps: PHYSICAL,
    },
    Recipe {
        name: "fig3",
        description: "hitting probability versus time, closed form against particle simulation",
        stochastic: true,
        sweeps: &[SweepVariable::T],
    },
    Recipe {
        name: "fig4",
        description: "approximation error when the competing receiver is moved around the target",
        stochastic: true,
        sweeps: &[SweepVariable::T],
    },
    Recipe {
        name: "fig5",
        description: "expected interference at the primary receiver versus r_SP, controlled and uncontrolled",
        stochastic: false,
        sweeps: PHYSICAL,
    },
    Recipe {
        name: "fig6",
        description: "bit-error probability versus detection threshold",
        stochastic: false,
        sweeps: &[SweepVariable::Eta],
    },
    Recipe {
        name: "fig7",
        description: "bit-error probability versus r_SP, adaptive and fixed thresholds",
        stochastic: false,
        sweeps: PHYSICAL,
    },
    Recipe {
        name: "fig8",
        description: "bit-error probability versus r_SP, controlled and uncontrolled secondary",
        stochastic: false,
        sweeps: PHYSICAL,
    },
    Recipe {
        name: "fig9",
        description: "bit-error probability versus r_SP for several degradation rates",
        stochastic: false,
        sweeps: PHYSICAL,
    },
];

pub fn find(name: &str) -> Option<&'static Recipe> {
    RECIPES.iter().find(|r| r.name == name)
}

/// Geometry shared by the budget and bit-error figures; `x_S` is overwritten
/// by the `r_SP` placement.
fn link_topology(a_p: f64, a_s: f64, r_sp: f64) -> Topology {
    let y_p = [30.0, 10.0, 0.0];
    Topology {
        x_p: [30.0, -10.0, 0.0],
        x_s: offset(&y_p, &[-1.0, 0.0, 0.0], r_sp),
        y_p,
        y_s: [10.0, 10.0, 20.0],
        a_p,
        a_s,
    }
}

fn base(name: &str, topology: Topology, medium: MediumParams, control: ControlParams, sweep: Sweep) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        recipe: name.to_string(),
        medium,
        topology,
        traffic: TrafficModel { q1_p: 0.5, q1_s: 0.5 },
        control,
        sim: None,
        sweep,
        slot: 3,
        horizon: 3,
        eta_max: 50,
        mu_values: Vec::new(),
        fixed_etas: Vec::new(),
        grid: None,
        r_sp_direction: [-1.0, 0.0, 0.0],
        output: format!("results/{name}"),
    }
}

const D: f64 = 100.0;

fn r_sp_sweep() -> Sweep {
    Sweep { variable: SweepVariable::RSp, start: 6.0, stop: 30.0, steps: 25 }
}

/// Parameter set for `name`, or `None` for an unknown recipe.
pub fn default_config(name: &str) -> Option<ExperimentConfig> {
    let med = |mu, tb| MediumParams { d: D, mu, tb };
    let ctl = |u_l, u_m| ControlParams { n: 300, u_l, u_m };
    let sim = SimSettings { dt: 1e-4, n_particles: 100_000, batch_size: 4096, far_jumps: true };
    let cfg = match name {
        "fig2a" => {
            let mut c = base(
                name,
                link_topology(5.0, 5.0, 15.0),
                med(0.0, 1.0),
                ctl(300, 5.0),
                Sweep { variable: SweepVariable::UM, start: 5.0, stop: 50.0, steps: 10 },
            );
            c.horizon = 20;
            c
        }
        "fig2b" | "fig2c" => {
            let tb = if name == "fig2b" { 1.0 } else { 0.4 };
            let mut c = base(name, link_topology(5.0, 5.0, 15.0), med(0.0, tb), ctl(300, 5.0), r_sp_sweep());
            c.horizon = 20;
            c
        }
        "fig3" => {
            let topo = Topology {
                x_p: [0.0; 3],
                x_s: [0.0; 3],
                y_p: [-30.0, -20.0, 0.0],
                y_s: [25.0, 10.0, 0.0],
                a_p: 3.0,
                a_s: 5.0,
            };
            let mut c = base(
                name,
                topo,
                med(0.0, 1.0),
                ctl(300, 5.0),
                Sweep { variable: SweepVariable::T, start: 0.1, stop: 2.0, steps: 20 },
            );
            c.sim = Some(sim);
            c.mu_values = vec![0.0, 0.3, 1.0];
            c
        }
        "fig4" => {
            let topo = Topology {
                x_p: [0.0; 3],
                x_s: [0.0; 3],
                y_p: [20.0, 0.0, 0.0],
                y_s: [20.0, 24.0, 0.0],
                a_p: 5.0,
                a_s: 4.0,
            };
            let mut c = base(
                name,
                topo,
                med(0.0, 1.0),
                ctl(300, 5.0),
                Sweep { variable: SweepVariable::T, start: 1.0, stop: 1.0, steps: 1 },
            );
            c.sim = Some(sim);
            c.grid = Some(PlacementGrid {
                separations: vec![9.5, 12.0, 16.0, 24.0],
                directions: vec![
                    [1.0, 0.0, 0.0],
                    [0.0, 1.0, 0.0],
                    [0.0, 0.0, 1.0],
                    [0.0, -1.0, 0.0],
                    [0.0, 0.0, -1.0],
                ],
            });
            c
        }
        "fig5" => {
            let y_p = [30.0, 0.0, 0.0];
            let topo = Topology {
                x_p: [55.0, 0.0, 0.0],
                x_s: [0.0, 0.0, 0.0],
                y_p,
                y_s: [30.0, 50.0, 0.0],
                a_p: 5.0,
                a_s: 5.0,
            };
            let mut c = base(name, topo, med(0.0, 1.0), ctl(1000, 25.0), r_sp_sweep());
            c.mu_values = vec![0.0, 0.5];
            c
        }
        "fig6" => {
            let topo = Topology { x_s: [10.0, 10.0, 0.0], ..link_topology(3.0, 5.0, 20.0) };
            base(
                name,
                topo,
                med(0.5, 2.0),
                ctl(300, 5.0),
                Sweep { variable: SweepVariable::Eta, start: 1.0, stop: 50.0, steps: 50 },
            )
        }
        "fig7" | "fig8" | "fig9" => {
            let mut c = base(name, link_topology(5.0, 5.0, 30.0), med(0.0, 5.0), ctl(300, 5.0), r_sp_sweep());
            match name {
                "fig7" => c.fixed_etas = vec![5.0, 10.0],
                "fig9" => c.mu_values = vec![0.0, 0.5],
                _ => {}
            }
            c
        }
        _ => return None,
    };
    Some(cfg)
}

/// Runs `config.recipe`. Stochastic recipes require a seed.
pub fn run(config: &ExperimentConfig, seed: Option<u64>) -> RunResult<Table> {
    config.validate()?;
    let recipe = find(&config.recipe).ok_or_else(|| RunError::UnknownRecipe(config.recipe.clone()))?;
    if !recipe.sweeps.contains(&config.sweep.variable) {
        let allowed: Vec<&str> = recipe.sweeps.iter().map(|v| v.name()).collect();
        return Err(ConfigError::invalid(format!(
            "recipe '{}' cannot sweep '{}'; allowed: {}",
            recipe.name,
            config.sweep.variable,
            allowed.join(", ")
        ))
        .into());
    }
    let seed = match (recipe.stochastic, seed) {
        (true, None) => return Err(RunError::MissingSeed(recipe.name.to_string())),
        (_, s) => s.unwrap_or(0),
    };
    match recipe.name {
        "fig2a" | "fig2b" | "fig2c" => budget_table(config),
        "fig3" => hitting_table(config, seed),
        "fig4" => placement_table(config, seed),
        "fig5" => interference_table(config),
        "fig6" => threshold_table(config),
        "fig7" | "fig8" | "fig9" => ber_table(config),
        _ => unreachable!("catalog and dispatch agree"),
    }
}

/// Independent seed for the `k`-th simulation of a recipe.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    seed ^ (k + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn series() -> SeriesControl {
    SeriesControl::default()
}

/// Sweep points with the swept value applied, in sweep order.
fn points(config: &ExperimentConfig) -> RunResult<Vec<(f64, ExperimentConfig)>> {
    config
        .sweep
        .values()
        .into_iter()
        .map(|v| Ok((v, config.with_value(config.sweep.variable, v)?)))
        .collect()
}

/// Degradation rates for a recipe with a `mu` column.
fn mu_list(config: &ExperimentConfig) -> Vec<f64> {
    if config.mu_values.is_empty() || config.sweep.variable == SweepVariable::Mu {
        vec![config.medium.mu]
    } else {
        config.mu_values.clone()
    }
}

fn with_mu(config: &ExperimentConfig, mu: f64) -> ExperimentConfig {
    let mut c = config.clone();
    c.medium.mu = mu;
    c
}

fn par_rows<F>(config: &ExperimentConfig, f: F) -> RunResult<Vec<Vec<Cell>>>
where
    F: Fn(f64, &ExperimentConfig) -> RunResult<Vec<Vec<Cell>>> + Sync,
{
    let pts = points(config)?;
    let chunks: Vec<Vec<Vec<Cell>>> = pts.par_iter().map(|(v, c)| f(*v, c)).collect::<RunResult<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn secondary_schedule(config: &ExperimentConfig, horizon: usize) -> RunResult<(SlotSchedule, mcvd_core::hitting::ChannelTaps)> {
    let taps_sp = channel_taps_for(&config.topology, &config.medium, Link::Secondary, Link::Primary, horizon, &series())?;
    let schedule = transmit_budget(&taps_sp, &config.traffic, &config.control, horizon)?;
    Ok((schedule, taps_sp))
}

fn budget_table(config: &ExperimentConfig) -> RunResult<Table> {
    let var = config.sweep.variable;
    let mut table = Table::new(["l", var.name(), "u_S", "expected_cci", "steady_state_bound"]);
    let rows = par_rows(config, |v, c| {
        let (schedule, taps_sp) = secondary_schedule(c, c.horizon)?;
        let geom = derive_geometry(&c.topology, Link::Secondary, Link::Primary)?;
        let p_inf = p_two_far_deg_inf(&geom, c.medium.d, c.medium.mu)?;
        let bound = steady_state_bound(p_inf, &c.traffic, &c.control)?;
        (1..=c.horizon)
            .map(|l| {
                let cci = expected_cci(&schedule, &taps_sp, &c.traffic, l)?;
                Ok(vec![Cell::from(l), Cell::from(v), Cell::from(schedule.u_s_at(l)), Cell::from(cci), Cell::from(bound)])
            })
            .collect()
    })?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn sim_config(config: &ExperimentConfig, t_max: f64, seed: u64) -> RunResult<SimConfig> {
    let s = config
        .sim
        .ok_or_else(|| ConfigError::invalid(format!("recipe '{}' needs a sim section", config.recipe)))?;
    let steps = (t_max / s.dt).round().max(1.0) as usize;
    let cfg = SimConfig {
        dt: s.dt,
        n_particles: s.n_particles,
        t_max,
        seed,
        n_time_bins: steps,
        batch_size: s.batch_size,
        far_jumps: s.far_jumps,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Empirical fraction and 95% half-width for receiver `rx` at time `t`.
fn empirical_at(res: &SimResult, rx: usize, t: f64) -> RunResult<(f64, f64)> {
    let b = res
        .bin_at(t)
        .ok_or_else(|| ConfigError::invalid(format!("t = {t} is not a multiple of the simulation step")))?;
    Ok((res.fraction(rx, b), res.ci_halfwidth(rx, b)))
}

fn hitting_table(config: &ExperimentConfig, seed: u64) -> RunResult<Table> {
    let mut table = Table::new(["t", "mu", "p_analytical_P", "p_analytical_S", "p_mc_P", "p_mc_S", "ci_P", "ci_S"]);
    let times = config.sweep.values();
    if times[0] <= 0.0 {
        return Err(ConfigError::invalid("sweep times must be positive").into());
    }
    let t_max = *times.last().unwrap();
    let mus = mu_list(config);
    let geoms = [
        derive_geometry(&config.topology, Link::Primary, Link::Primary)?,
        derive_geometry(&config.topology, Link::Primary, Link::Secondary)?,
    ];
    let runs = mus
        .iter()
        .enumerate()
        .map(|(k, &mu)| {
            let medium = MediumParams { mu, ..config.medium };
            let cfg = sim_config(config, t_max, derive_seed(seed, k as u64))?;
            Ok(simulate_two_far(&config.topology, Link::Primary, &medium, &cfg)?)
        })
        .collect::<RunResult<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for &t in &times {
        for (k, &mu) in mus.iter().enumerate() {
            let mut exact = [0.0; 2];
            let mut mc = [(0.0, 0.0); 2];
            for rx in 0..2 {
                exact[rx] = p_two_far_deg(t, &geoms[rx], config.medium.d, mu, &series())?.value;
                mc[rx] = empirical_at(&runs[k], rx, t)?;
                worst = worst.max((exact[rx] - mc[rx].0).abs());
            }
            table.push(
                [t, mu, exact[0], exact[1], mc[0].0, mc[1].0, mc[0].1, mc[1].1]
                    .into_iter()
                    .map(Cell::from)
                    .collect(),
            );
        }
    }
    table.summary.insert("max_abs_error".into(), json!(worst));
    table.summary.insert("n_particles".into(), json!(runs[0].n_particles));
    Ok(table)
}

fn placement_table(config: &ExperimentConfig, seed: u64) -> RunResult<Table> {
    let grid = config
        .grid
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("fig4 needs a grid section"))?;
    let times = config.sweep.values();
    if times[0] <= 0.0 {
        return Err(ConfigError::invalid("sweep times must be positive").into());
    }
    let t_max = *times.last().unwrap();
    let a_max = config.topology.a_p.max(config.topology.a_s);
    let placements: Vec<(f64, Point)> = grid
        .separations
        .iter()
        .flat_map(|&r| grid.directions.iter().map(move |&d| (r, d)))
        .collect();
    let results = placements
        .par_iter()
        .enumerate()
        .map(|(k, &(r, dir))| {
            let mut topo = config.topology;
            topo.y_s = offset(&topo.y_p, &dir, r);
            topo.validate()?;
            let geom = derive_geometry(&topo, Link::Primary, Link::Primary)?;
            let cfg = sim_config(config, t_max, derive_seed(seed, k as u64))?;
            let res = simulate_two_far(&topo, Link::Primary, &config.medium, &cfg)?;
            Ok((topo, geom, res))
        })
        .collect::<RunResult<Vec<_>>>()?;

    let mut table = Table::new([
        "t", "R", "dir_x", "dir_y", "dir_z", "y_x", "y_y", "y_z", "p_analytical", "p_mc", "abs_error", "ci", "far_field",
    ]);
    let (mut worst_far, mut worst_near) = (0.0f64, 0.0f64);
    for &t in &times {
        for ((r, dir), (topo, geom, res)) in placements.iter().zip(&results) {
            let exact = p_two_far_deg(t, geom, config.medium.d, config.medium.mu, &series())?.value;
            let (mc, ci) = empirical_at(res, 0, t)?;
            let err = (exact - mc).abs();
            let far = *r > 3.0 * a_max;
            if far {
                worst_far = worst_far.max(err);
            } else {
                worst_near = worst_near.max(err);
            }
            let mut row: Vec<Cell> = [t, *r, dir[0], dir[1], dir[2], topo.y_s[0], topo.y_s[1], topo.y_s[2], exact, mc, err, ci]
                .into_iter()
                .map(Cell::from)
                .collect();
            row.push(Cell::Int(far as i64));
            table.push(row);
        }
    }
    table.summary.insert("max_abs_error_far_field".into(), json!(worst_far));
    table.summary.insert("max_abs_error_near_field".into(), json!(worst_near));
    table.summary.insert("far_field_separation".into(), json!(3.0 * a_max));
    Ok(table)
}

fn interference_table(config: &ExperimentConfig) -> RunResult<Table> {
    let var = config.sweep.variable;
    let mut table = Table::new([var.name(), "mu", "u_S", "cci_controlled", "cci_uncontrolled"]);
    let l = config.slot;
    let mus = mu_list(config);
    let rows = par_rows(config, |v, c| {
        mus.iter()
            .map(|&mu| {
                let c = if var == SweepVariable::Mu { c.clone() } else { with_mu(c, mu) };
                let (schedule, taps_sp) = secondary_schedule(&c, c.horizon)?;
                let open = SlotSchedule::constant(c.control.u_l, c.control.n, c.horizon);
                let controlled = expected_cci(&schedule, &taps_sp, &c.traffic, l)?;
                let uncontrolled = expected_cci(&open, &taps_sp, &c.traffic, l)?;
                Ok(vec![
                    Cell::from(v),
                    Cell::from(c.medium.mu),
                    Cell::from(schedule.u_s_at(l)),
                    Cell::from(controlled),
                    Cell::from(uncontrolled),
                ])
            })
            .collect()
    })?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Observation models of both receivers in slot `config.slot`.
pub struct LinkModels {
    pub schedule: SlotSchedule,
    pub models: [ObservationModel; 2],
}

impl LinkModels {
    /// Controlled schedule when `fixed_u_s` is `None`, otherwise a constant
    /// secondary emission.
    pub fn build(config: &ExperimentConfig, fixed_u_s: Option<u64>) -> RunResult<Self> {
        let l = config.slot;
        let taps = |tx, rx| channel_taps_for(&config.topology, &config.medium, tx, rx, l, &series());
        let (pp, sp) = (taps(Link::Primary, Link::Primary)?, taps(Link::Secondary, Link::Primary)?);
        let (ss, ps) = (taps(Link::Secondary, Link::Secondary)?, taps(Link::Primary, Link::Secondary)?);
        let schedule = match fixed_u_s {
            None => transmit_budget(&sp, &config.traffic, &config.control, l)?,
            Some(u) => SlotSchedule::constant(u, config.control.n, l),
        };
        let p = ObservationModel::for_receiver(Link::Primary, l, &schedule, &pp, &sp, &config.traffic)?;
        let s = ObservationModel::for_receiver(Link::Secondary, l, &schedule, &ss, &ps, &config.traffic)?;
        Ok(LinkModels { schedule, models: [p, s] })
    }

    pub fn u_s(&self) -> u64 {
        *self.schedule.u_s.last().unwrap()
    }
}

/// Error rates of one receiver at the threshold from the Poisson rule.
pub struct Evaluated {
    pub dist: CountDistribution,
    pub eta: f64,
    pub ber: BerResult,
}

pub fn evaluate(model: &ObservationModel, eta_max: u64) -> RunResult<Evaluated> {
    let dist = CountDistribution::new(model)?;
    let eta = suboptimal_threshold(model, eta_max)?.eta;
    let ber = dist.ber(eta)?;
    Ok(Evaluated { dist, eta, ber })
}

fn threshold_table(config: &ExperimentConfig) -> RunResult<Table> {
    let links = LinkModels::build(config, None)?;
    let eval = [evaluate(&links.models[0], config.eta_max)?, evaluate(&links.models[1], config.eta_max)?];
    let mut table = Table::new(["eta", "pe_P", "pe_S", "eta_P", "eta_S", "u_S", "pe0_P", "pe1_P", "pe0_S", "pe1_S"]);
    for eta in config.sweep.values() {
        if eta < 1.0 {
            return Err(ConfigError::invalid("thresholds must be >= 1").into());
        }
        let r = [eval[0].dist.ber(eta)?, eval[1].dist.ber(eta)?];
        table.push(vec![
            Cell::from(eta),
            Cell::from(r[0].pe),
            Cell::from(r[1].pe),
            Cell::from(eval[0].eta),
            Cell::from(eval[1].eta),
            Cell::from(links.u_s()),
            Cell::from(r[0].pe0),
            Cell::from(r[0].pe1),
            Cell::from(r[1].pe0),
            Cell::from(r[1].pe1),
        ]);
    }
    let mut summary = Map::new();
    for (i, tag) in ["P", "S"].into_iter().enumerate() {
        let pe = table.column(&format!("pe_{tag}")).unwrap();
        let etas = table.column("eta").unwrap();
        let (best_i, best) = pe
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (j, &p)| if p < acc.1 { (j, p) } else { acc });
        let sub = eval[i].ber.pe;
        summary.insert(format!("best_eta_{tag}"), json!(etas[best_i]));
        summary.insert(format!("best_pe_{tag}"), json!(best));
        summary.insert(format!("suboptimal_eta_{tag}"), json!(eval[i].eta));
        summary.insert(format!("suboptimal_pe_{tag}"), json!(sub));
        summary.insert(format!("relative_excess_{tag}"), json!((sub - best) / best));
    }
    table.summary = summary;
    Ok(table)
}

fn ber_table(config: &ExperimentConfig) -> RunResult<Table> {
    let var = config.sweep.variable;
    let recipe = config.recipe.as_str();
    let mut columns: Vec<String> = vec![var.name().into()];
    if recipe == "fig9" {
        columns.push("mu".into());
    }
    columns.extend(["pe_P", "pe_S", "eta_P", "eta_S", "u_S"].map(String::from));
    if recipe == "fig7" {
        for e in &config.fixed_etas {
            columns.push(format!("pe_P_eta{e}"));
            columns.push(format!("pe_S_eta{e}"));
        }
    }
    if recipe == "fig8" {
        columns.extend(["pe_P_unc", "pe_S_unc", "eta_P_unc", "eta_S_unc", "u_S_unc"].map(String::from));
    }
    let mus = if recipe == "fig9" { mu_list(config) } else { vec![config.medium.mu] };
    let mut table = Table::new(columns);
    let rows = par_rows(config, |v, c| {
        mus.iter()
            .map(|&mu| {
                let c = if var == SweepVariable::Mu { c.clone() } else { with_mu(c, mu) };
                let links = LinkModels::build(&c, None)?;
                let ev = [evaluate(&links.models[0], c.eta_max)?, evaluate(&links.models[1], c.eta_max)?];
                let mut row = vec![Cell::from(v)];
                if recipe == "fig9" {
                    row.push(Cell::from(c.medium.mu));
                }
                row.extend([
                    Cell::from(ev[0].ber.pe),
                    Cell::from(ev[1].ber.pe),
                    Cell::from(ev[0].eta),
                    Cell::from(ev[1].eta),
                    Cell::from(links.u_s()),
                ]);
                if recipe == "fig7" {
                    for &e in &c.fixed_etas {
                        row.push(Cell::from(ev[0].dist.ber(e)?.pe));
                        row.push(Cell::from(ev[1].dist.ber(e)?.pe));
                    }
                }
                if recipe == "fig8" {
                    let open = LinkModels::build(&c, Some(c.control.u_l))?;
                    let eo = [evaluate(&open.models[0], c.eta_max)?, evaluate(&open.models[1], c.eta_max)?];
                    row.extend([
                        Cell::from(eo[0].ber.pe),
                        Cell::from(eo[1].ber.pe),
                        Cell::from(eo[0].eta),
                        Cell::from(eo[1].eta),
                        Cell::from(open.u_s()),
                    ]);
                }
                Ok(row)
            })
            .collect()
    })?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Catalog entry with its default parameter set, for `list-recipes --json`.
pub fn catalog_json() -> Value {
    Value::Array(
        RECIPES
            .iter()
            .map(|r| {
                json!({
                    "name": r.name,
                    "description": r.description,
                    "stochastic": r.stochastic,
                    "sweeps": r.sweeps.iter().map(|v| v.name()).collect::<Vec<_>>(),
                    "config": default_config(r.name),
                })
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_default_validates() {
        for r in &RECIPES {
            let c = default_config(r.name).unwrap();
            c.validate().unwrap_or_else(|e| panic!("{}: {e}", r.name));
            assert!(r.sweeps.contains(&c.sweep.variable), "{}", r.name);
        }
        assert!(default_config("fig10").is_none());
    }

    #[test]
    fn link_geometry_places_secondary_on_the_axis() {
        let c = default_config("fig8").unwrap().with_r_sp(12.0).unwrap();
        assert_eq!(c.topology.x_s, [18.0, 10.0, 0.0]);
        assert!((c.topology.distance(Link::Secondary, Link::Primary) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..4).map(|k| derive_seed(7, k)).collect();
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(s[i], s[j]);
            }
        }
    }
}
