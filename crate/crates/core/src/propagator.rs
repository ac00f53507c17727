//! Exact time propagation of subsystem coefficient vectors.
//!
//! The generator is constant, so `c(t) = exp(L t) c(0)`. Each diagonal block
//! of `L` is diagonalized once; blocks whose eigenvector matrix is too badly
//! conditioned (defective or nearly so, e.g. at critical damping) fall back to
//! a dense scaling-and-squaring exponential evaluated at every requested time.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::eigen_decompose;
use crate::model::{
    build_generator, initial_coefficients, CoefficientVector, GeneratorMatrix, InitialTerm,
    ModelParams, Subsystem, BLOCKS, C64,
};

/// Eigenvector condition number above which a block is treated as defective.
pub const DEFECTIVE_CONDITION: f64 = 1e8;

/// Strictly increasing sequence of non-negative sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
    step: Option<f64>,
}

impl TimeGrid {
    /// `num_points` equally spaced times from `t_start` to `t_end` inclusive.
    pub fn uniform(t_start: f64, t_end: f64, num_points: usize) -> Result<Self> {
        if !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::NonFinite("time grid bounds"));
        }
        if t_start < 0.0 {
            return Err(Error::Grid(format!("t_start must be >= 0, got {t_start}")));
        }
        match num_points {
            0 => Err(Error::Grid("num_points must be positive".into())),
            1 if t_start == t_end => Ok(Self {
                points: vec![t_start],
                step: None,
            }),
            1 => Err(Error::Grid(
                "a single-point grid needs t_start == t_end".into(),
            )),
            n => {
                if t_end <= t_start {
                    return Err(Error::Grid(format!(
                        "t_end ({t_end}) must exceed t_start ({t_start})"
                    )));
                }
                let step = (t_end - t_start) / (n - 1) as f64;
                let mut points: Vec<f64> = (0..n).map(|i| t_start + i as f64 * step).collect();
                points[n - 1] = t_end;
                Ok(Self {
                    points,
                    step: Some(step),
                })
            }
        }
    }

    /// Arbitrary strictly increasing times.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Grid("grid has no points".into()));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("time grid"));
        }
        if points[0] < 0.0 {
            return Err(Error::Grid(format!(
                "t_start must be >= 0, got {}",
                points[0]
            )));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("points must be strictly increasing".into()));
        }
        Ok(Self { points, step: None })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.points[0]
    }

    pub fn t_end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Spacing of a grid built with [`TimeGrid::uniform`].
    pub fn uniform_step(&self) -> Option<f64> {
        self.step
    }
}

#[derive(Debug, Clone)]
enum BlockSolver {
    Spectral {
        values: DVector<C64>,
        vectors: DMatrix<C64>,
        inverse: DMatrix<C64>,
    },
    Dense(DMatrix<C64>),
}

#[derive(Debug, Clone)]
struct Block {
    indices: &'static [usize],
    solver: BlockSolver,
}

/// Precomputed `t ↦ exp(L t)` for one generator.
#[derive(Debug, Clone)]
pub struct Propagator {
    blocks: Vec<Block>,
}

impl Propagator {
    pub fn new(generator: &GeneratorMatrix) -> Result<Self> {
        let l = generator.matrix();
        if l.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("generator"));
        }
        let blocks = BLOCKS
            .iter()
            .map(|&indices| {
                let sub = DMatrix::from_fn(indices.len(), indices.len(), |r, c| {
                    l[(indices[r], indices[c])]
                });
                let solver = match eigen_decompose(&sub) {
                    Some(e) if e.condition <= DEFECTIVE_CONDITION => BlockSolver::Spectral {
                        values: e.values,
                        vectors: e.vectors,
                        inverse: e.inverse,
                    },
                    other => {
                        log::debug!(
                            "block {:?} of subsystem {} is near-defective (condition {:.3e}); using dense exponential",
                            indices,
                            generator.subsystem().label(),
                            other.map_or(f64::INFINITY, |e| e.condition)
                        );
                        BlockSolver::Dense(sub)
                    }
                };
                Block { indices, solver }
            })
            .collect();
        Ok(Self { blocks })
    }

    /// True if any block uses the dense fallback.
    pub fn uses_fallback(&self) -> bool {
        self.blocks
            .iter()
            .any(|b| matches!(b.solver, BlockSolver::Dense(_)))
    }

    /// `exp(L t) c`.
    pub fn evolve(&self, init: &CoefficientVector, t: f64) -> CoefficientVector {
        if t == 0.0 {
            return *init;
        }
        let mut out = CoefficientVector::zeros();
        for block in &self.blocks {
            let x0 = DVector::from_fn(block.indices.len(), |r, _| init[block.indices[r]]);
            if x0.iter().all(|z| *z == C64::from(0.0)) {
                continue;
            }
            let x = match &block.solver {
                BlockSolver::Spectral {
                    values,
                    vectors,
                    inverse,
                } => {
                    let mut modal = inverse * x0;
                    for (m, lambda) in modal.iter_mut().zip(values.iter()) {
                        *m *= (lambda * t).exp();
                    }
                    vectors * modal
                }
                BlockSolver::Dense(sub) => (sub * C64::from(t)).exp() * x0,
            };
            for (r, &idx) in block.indices.iter().enumerate() {
                out[idx] = x[r];
            }
        }
        out
    }
}

fn check_finite(v: &CoefficientVector) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("initial coefficient vector"))
    }
}

/// `exp(L t) c(0)` at every grid time.
pub fn propagate(
    generator: &GeneratorMatrix,
    init: &CoefficientVector,
    grid: &TimeGrid,
) -> Result<Vec<CoefficientVector>> {
    check_finite(init)?;
    let prop = Propagator::new(generator)?;
    Ok(grid
        .points()
        .iter()
        .map(|&t| prop.evolve(init, t))
        .collect())
}

/// Coefficient trajectories of all four Bell-decomposition terms for one
/// subsystem.
#[derive(Debug, Clone)]
pub struct SubsystemTrajectory {
    grid: TimeGrid,
    subsystem: Subsystem,
    terms: [Vec<CoefficientVector>; 4],
}

impl SubsystemTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn subsystem(&self) -> Subsystem {
        self.subsystem
    }

    pub fn term(&self, term: InitialTerm) -> &[CoefficientVector] {
        &self.terms[term.slot()]
    }

    /// All four coefficient vectors at grid index `idx`, ordered like
    /// [`InitialTerm::ALL`].
    pub fn at(&self, idx: usize) -> [CoefficientVector; 4] {
        [
            self.terms[0][idx],
            self.terms[1][idx],
            self.terms[2][idx],
            self.terms[3][idx],
        ]
    }
}

/// Propagates the four initial vectors of subsystem `k`.
pub fn evolve_subsystem(
    params: &ModelParams,
    k: Subsystem,
    grid: &TimeGrid,
) -> Result<SubsystemTrajectory> {
    let prop = Propagator::new(&build_generator(params, k))?;
    Ok(trajectory(&prop, k, params.nbar(), grid))
}

/// The four initial-term trajectories of subsystem `k` under `prop`.
pub fn trajectory(
    prop: &Propagator,
    k: Subsystem,
    nbar: f64,
    grid: &TimeGrid,
) -> SubsystemTrajectory {
    let mut runs: Vec<Vec<CoefficientVector>> = InitialTerm::ALL
        .par_iter()
        .map(|&term| {
            let init = initial_coefficients(term, nbar);
            grid.points()
                .iter()
                .map(|&t| prop.evolve(&init, t))
                .collect()
        })
        .collect();
    let eg = runs.pop().unwrap();
    let ge = runs.pop().unwrap();
    let gg = runs.pop().unwrap();
    let ee = runs.pop().unwrap();
    SubsystemTrajectory {
        grid: grid.clone(),
        subsystem: k,
        terms: [ee, gg, ge, eg],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> ModelParams {
        ModelParams::symmetric(10.0, 2.0, 2.0, 0.5, 0.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::uniform(0.0, 10.0, 0).is_err());
        assert!(TimeGrid::uniform(-1.0, 10.0, 5).is_err());
        assert!(TimeGrid::uniform(0.0, 0.0, 5).is_err());
        assert!(TimeGrid::uniform(2.0, 2.0, 1).is_ok());
        assert!(TimeGrid::from_points(vec![0.0, 1.0, 1.0]).is_err());

        let g = TimeGrid::uniform(0.0, 10.0, 2001).unwrap();
        assert_eq!(g.len(), 2001);
        assert_eq!(g.t_start(), 0.0);
        assert_eq!(g.t_end(), 10.0);
        assert!((g.uniform_step().unwrap() - 0.005).abs() < 1e-15);
        assert!(g.points().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn stationary_vector_is_unchanged() {
        let l = build_generator(&fig2(), Subsystem::One);
        let mut init = CoefficientVector::zeros();
        init[0] = C64::from(1.0);
        let grid = TimeGrid::uniform(0.0, 50.0, 11).unwrap();
        for c in propagate(&l, &init, &grid).unwrap() {
            assert_eq!(c, init);
        }
    }

    #[test]
    fn decoupled_population_stays_put() {
        let p = ModelParams::symmetric(10.0, 0.0, 0.0, 0.5, 0.0).unwrap();
        let l = build_generator(&p, Subsystem::One);
        let init = initial_coefficients(InitialTerm::ExcitedExcited, 0.0);
        let grid = TimeGrid::uniform(0.0, 10.0, 21).unwrap();
        for c in propagate(&l, &init, &grid).unwrap() {
            assert!((c[1] - C64::from(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_finite_input() {
        let l = build_generator(&fig2(), Subsystem::One);
        let mut init = CoefficientVector::zeros();
        init[1] = C64::new(f64::NAN, 0.0);
        let grid = TimeGrid::uniform(0.0, 1.0, 3).unwrap();
        assert!(propagate(&l, &init, &grid).is_err());
    }

    #[test]
    fn critical_damping_uses_fallback_and_stays_accurate() {
        // Block {5,6} is defective when α = γ_eff / 2 at zero detuning.
        let p = ModelParams::symmetric(10.0, 0.0, 0.25, 0.5, 0.0).unwrap();
        let l = build_generator(&p, Subsystem::One);
        let prop = Propagator::new(&l).unwrap();
        assert!(prop.uses_fallback());

        // semigroup check on the fallback path
        let init = initial_coefficients(InitialTerm::ExcitedGround, 0.0);
        let half = prop.evolve(&prop.evolve(&init, 1.3), 1.7);
        let full = prop.evolve(&init, 3.0);
        assert!((half - full).norm() < 1e-12);
    }

    #[test]
    fn zero_time_returns_initial_vectors() {
        let grid = TimeGrid::uniform(0.0, 1.0, 5).unwrap();
        let p = ModelParams::symmetric(10.0, 0.0, 2.0, 0.5, 0.2).unwrap();
        let traj = evolve_subsystem(&p, Subsystem::One, &grid).unwrap();
        for term in InitialTerm::ALL {
            assert_eq!(traj.term(term)[0], initial_coefficients(term, 0.2));
        }
    }
}
