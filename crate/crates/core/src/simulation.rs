//! End-to-end pipeline: parameters → coefficient trajectories → `ρ₁₂(t)` →
//! entanglement series and events.

use crate::entanglement::{extract_events, precursor, EntanglementEvent, EntanglementSeries};
use crate::error::Result;
use crate::model::{
    build_generator, initial_coefficients, CoefficientVector, GeneratorMatrix, InitialTerm,
    ModelParams, Subsystem,
};
use crate::propagator::{trajectory, Propagator, SubsystemTrajectory, TimeGrid};
use crate::reconstruction::{
    assemble_rho12, rho12_from_coefficients, to_x_state, DensityMatrix4, XStateMatrix,
};

/// Continuous-time evaluator of the two-qubit state for one parameter set.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: ModelParams,
    propagators: [Propagator; 2],
}

impl Simulation {
    pub fn new(params: ModelParams) -> Result<Self> {
        Self::from_generators(
            params,
            [
                build_generator(&params, Subsystem::One),
                build_generator(&params, Subsystem::Two),
            ],
        )
    }

    /// Simulation driven by explicit generators; `params` only supplies the
    /// thermal occupation used for the initial state and reconstruction.
    pub fn from_generators(params: ModelParams, generators: [GeneratorMatrix; 2]) -> Result<Self> {
        Ok(Self {
            params,
            propagators: [
                Propagator::new(&generators[0])?,
                Propagator::new(&generators[1])?,
            ],
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// The four evolved coefficient vectors of subsystem `k` at time `t`.
    pub fn coefficients_at(&self, k: Subsystem, t: f64) -> [CoefficientVector; 4] {
        let prop = &self.propagators[k.slot()];
        InitialTerm::ALL.map(|term| prop.evolve(&initial_coefficients(term, self.params.nbar()), t))
    }

    pub fn rho12_at(&self, t: f64) -> DensityMatrix4 {
        rho12_from_coefficients(
            &self.coefficients_at(Subsystem::One, t),
            &self.coefficients_at(Subsystem::Two, t),
            self.params.nbar(),
        )
    }

    /// Unclamped concurrence precursor at time `t`, read straight from the
    /// X-pattern entries.
    pub fn precursor_at(&self, t: f64) -> f64 {
        let m = *self.rho12_at(t).matrix();
        precursor(&XStateMatrix {
            a: m[(0, 0)].re,
            b: m[(1, 1)].re,
            c: m[(2, 2)].re,
            d: m[(3, 3)].re,
            f: m[(0, 3)],
        })
    }

    pub fn run(&self, grid: &TimeGrid) -> Result<SimulationResult> {
        let nbar = self.params.nbar();
        let traj1 = trajectory(&self.propagators[0], Subsystem::One, nbar, grid);
        let traj2 = trajectory(&self.propagators[1], Subsystem::Two, nbar, grid);
        let states = (0..grid.len())
            .map(|i| to_x_state(&assemble_rho12(&traj1, &traj2, nbar, i)?))
            .collect::<Result<Vec<_>>>()?;
        let series = EntanglementSeries::from_x_states(grid.clone(), &states)?;
        Ok(SimulationResult {
            params: self.params,
            trajectories: [traj1, traj2],
            states,
            series,
        })
    }

    /// Events of a finished run, with crossing times bisected on the exact
    /// continuous-time solution.
    pub fn events(&self, result: &SimulationResult, threshold: f64) -> Vec<EntanglementEvent> {
        let f = |t: f64| self.precursor_at(t);
        extract_events(&result.series, threshold, Some(&f))
    }
}

/// Output of [`Simulation::run`].
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub params: ModelParams,
    pub trajectories: [SubsystemTrajectory; 2],
    pub states: Vec<XStateMatrix>,
    pub series: EntanglementSeries,
}

impl SimulationResult {
    pub fn grid(&self) -> &TimeGrid {
        &self.series.grid
    }

    /// Full 4×4 matrix at grid index `idx`, assembled on demand.
    pub fn rho12(&self, idx: usize) -> Result<DensityMatrix4> {
        assemble_rho12(
            &self.trajectories[0],
            &self.trajectories[1],
            self.params.nbar(),
            idx,
        )
    }
}

/// Convenience wrapper: simulate `params` on `grid`.
pub fn simulate(params: &ModelParams, grid: &TimeGrid) -> Result<SimulationResult> {
    Simulation::new(*params)?.run(grid)
}
