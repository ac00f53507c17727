//! Self-verification suites.
//!
//! `quick` compares the analytic and eigenvalue concurrence and checks
//! physicality on every selected preset. `full` adds the four-atom oracle,
//! complete-positivity of the single-qubit maps and the memory-kernel solve,
//! which can also be requested on its own.
//! Every check runs to completion; failures are collected, not fatal.

use nmq_core::entanglement::concurrence_general;
use nmq_core::linalg::max_modulus;
use nmq_core::model::{
    build_generator, initial_coefficients, projector_pair, GeneratorMatrix, InitialTerm,
    ModelParams, Subsystem, C64,
};
use nmq_core::nz_kernel::{build_kernel, local_term, solve_nz, NzScheme};
use nmq_core::oracle::{
    coefficient_subsystem_map, evolve_full, partial_trace_34, FullDensityMatrix,
};
use nmq_core::presets::Preset;
use nmq_core::propagator::{propagate, TimeGrid};
use nmq_core::reconstruction::{bell_state, physicality};
use nmq_core::simulation::Simulation;
use rayon::prelude::*;

pub const CONCURRENCE_TOL: f64 = 1e-10;
pub const ORACLE_TOL: f64 = 1e-8;
pub const NZ_TOL: f64 = 2e-4;
pub const NZ_STEP: f64 = 1e-3;
pub const CHOI_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, result: Result<(bool, String), nmq_core::Error>) -> Self {
        let (pass, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
        Self {
            name: name.into(),
            pass,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Generators used by the fast path. With `sign_flip` the coupling entry
/// `L[5][6]` is negated, a deliberate corruption the oracle must catch.
fn generators(params: &ModelParams, sign_flip: bool) -> [GeneratorMatrix; 2] {
    Subsystem::BOTH.map(|k| {
        let g = build_generator(params, k);
        if sign_flip {
            let mut m = *g.matrix();
            m[(5, 6)] = -m[(5, 6)];
            GeneratorMatrix::from_matrix(m, k)
        } else {
            g
        }
    })
}

fn concurrence_check(sim: &Simulation, grid: &TimeGrid) -> Result<(bool, String), nmq_core::Error> {
    let result = sim.run(grid)?;
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        let general = concurrence_general(&result.rho12(i)?)?;
        worst = worst.max((general - result.series.concurrence[i]).abs());
    }
    Ok((
        worst <= CONCURRENCE_TOL,
        format!("max |C_general - C_x| = {worst:.3e}"),
    ))
}

fn physicality_check(sim: &Simulation, grid: &TimeGrid) -> Result<(bool, String), nmq_core::Error> {
    let (mut tr, mut herm, mut min_ev, mut x) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    for &t in grid.points() {
        let ph = physicality(&sim.rho12_at(t));
        tr = tr.max(ph.trace_error);
        herm = herm.max(ph.hermiticity);
        min_ev = min_ev.min(ph.min_eigenvalue);
        x = x.max(ph.x_residual);
    }
    Ok((
        tr <= 1e-9 && herm <= 1e-12 && min_ev >= -1e-9 && x <= 1e-9,
        format!("trace err {tr:.2e}, hermiticity {herm:.2e}, min eigenvalue {min_ev:.2e}, x-pattern {x:.2e}"),
    ))
}

fn oracle_check(sim: &Simulation, grid: &TimeGrid) -> Result<(bool, String), nmq_core::Error> {
    let params = sim.params();
    let rho0 = FullDensityMatrix::with_thermal_partners(&bell_state(), params.nbar());
    let full = evolve_full(params, &rho0, grid)?;
    let dev = full
        .iter()
        .zip(grid.points())
        .map(|(s, &t)| partial_trace_34(s).max_abs_diff(&sim.rho12_at(t)))
        .fold(0.0, f64::max);
    Ok((dev <= ORACLE_TOL, format!("oracle max deviation {dev:.3e}")))
}

fn nz_check(
    params: &ModelParams,
    generators: &[GeneratorMatrix; 2],
    t_end: f64,
) -> Result<(bool, String), nmq_core::Error> {
    let n = (t_end / NZ_STEP).round() as usize + 1;
    let grid = TimeGrid::uniform(0.0, (n - 1) as f64 * NZ_STEP, n)?;
    let pp = projector_pair();
    let mut worst = 0.0f64;
    for g in generators {
        let kernel = build_kernel(g, &pp, &grid)?;
        let local = local_term(g, &pp);
        for term in InitialTerm::ALL {
            let init = initial_coefficients(term, params.nbar());
            let nz = solve_nz(&kernel, &local, &init, &grid, NzScheme::default())?;
            let direct = propagate(g, &init, &grid)?;
            for (a, b) in nz.iter().zip(&direct) {
                worst = worst.max(max_modulus((a - pp.project_relevant(b)).iter()));
            }
        }
    }
    Ok((
        worst <= NZ_TOL,
        format!("memory-kernel max deviation {worst:.3e} at dt = {NZ_STEP}"),
    ))
}

fn choi_check() -> Result<(bool, String), nmq_core::Error> {
    let alphas = [0.25, 0.5, 1.0, 2.0, 5.0];
    let times = [0.1, 0.5, 1.0, 3.0, 10.0];
    let mut min_ev = f64::INFINITY;
    let mut worst_trace = 0.0f64;
    for nbar in [0.0, 0.2] {
        for alpha in alphas {
            let p = ModelParams::symmetric(10.0, 1.0, alpha, 0.5, nbar)?;
            for t in times {
                for k in Subsystem::BOTH {
                    let choi = coefficient_subsystem_map(&p, k, t)?.choi();
                    min_ev = min_ev.min(choi.eigenvalues()[0]);
                    worst_trace = worst_trace.max((choi.trace() - C64::from(2.0)).norm());
                }
            }
        }
    }
    Ok((
        min_ev >= -CHOI_TOL && worst_trace <= 1e-9,
        format!("min Choi eigenvalue {min_ev:.3e}, max |tr - 2| {worst_trace:.2e} over 100 maps"),
    ))
}

/// Runs the suite on `presets` and returns every check in a stable order.
pub fn run_suite(level: Level, presets: &[&Preset], with_nz: bool, sign_flip: bool) -> Vec<Check> {
    let mut checks: Vec<Check> = presets
        .par_iter()
        .map(|p| {
            let params = p.params();
            let grid = p.grid();
            let gens = generators(&params, sign_flip);
            let sim = match Simulation::from_generators(params, gens.clone()) {
                Ok(s) => s,
                Err(e) => return vec![Check::new(format!("setup[{}]", p.name), Err(e))],
            };
            let mut out = vec![
                Check::new(
                    format!("concurrence-formula[{}]", p.name),
                    concurrence_check(&sim, &grid),
                ),
                Check::new(
                    format!("physicality[{}]", p.name),
                    physicality_check(&sim, &grid),
                ),
            ];
            if level == Level::Full {
                out.push(Check::new(
                    format!("oracle[{}]", p.name),
                    oracle_check(&sim, &grid),
                ));
            }
            if level == Level::Full || with_nz {
                out.push(Check::new(
                    format!("memory-kernel[{}]", p.name),
                    nz_check(&params, &gens, grid.t_end()),
                ));
            }
            out
        })
        .flatten()
        .collect();
    if level == Level::Full {
        checks.push(Check::new("complete-positivity", choi_check()));
    }
    checks
}
