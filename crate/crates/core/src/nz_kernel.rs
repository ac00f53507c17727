//! Projected memory-kernel equation for the relevant coefficients.
//!
//! With `P` keeping `{0, 1, 5, 7}` and `Q = 1 − P`, the relevant part obeys
//! `d(Pc)/dt = PLP·Pc(t) + ∫₀ᵗ K(t−τ)·Pc(τ) dτ` with
//! `K(τ) = PL·exp(QLQ τ)·QLP`, provided `Qc(0) = 0`, which holds for every
//! initial vector of the model. Everything here works on the effective 4×4
//! restriction.

use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::model::{
    CoefficientVector, GeneratorMatrix, Matrix9, ProjectorPair, BASIS_DIM, C64, RELEVANT_INDICES,
};
use crate::propagator::{Propagator, TimeGrid};

/// Relative tolerance when matching solver and lag steps.
const STEP_MATCH_TOL: f64 = 1e-9;

fn restrict(m: &Matrix9) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| m[(RELEVANT_INDICES[r], RELEVANT_INDICES[c])])
}

fn embed(m: &Matrix4<C64>) -> Matrix9 {
    let mut out = Matrix9::zeros();
    for (r, &i) in RELEVANT_INDICES.iter().enumerate() {
        for (c, &j) in RELEVANT_INDICES.iter().enumerate() {
            out[(i, j)] = m[(r, c)];
        }
    }
    out
}

fn restrict_vector(c: &CoefficientVector) -> Vector4<C64> {
    Vector4::from_fn(|r, _| c[RELEVANT_INDICES[r]])
}

fn embed_vector(v: &Vector4<C64>) -> CoefficientVector {
    let mut out = CoefficientVector::zeros();
    for (r, &i) in RELEVANT_INDICES.iter().enumerate() {
        out[i] = v[r];
    }
    out
}

/// `K(τ)` sampled on a uniform lag grid starting at zero.
#[derive(Debug, Clone)]
pub struct MemoryKernelSamples {
    lags: TimeGrid,
    samples: Vec<Matrix4<C64>>,
}

impl MemoryKernelSamples {
    pub fn lags(&self) -> &TimeGrid {
        &self.lags
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Restricted 4×4 sample at lag index `j` (rows/columns `{0, 1, 5, 7}`).
    pub fn restricted(&self, j: usize) -> &Matrix4<C64> {
        &self.samples[j]
    }

    /// Sample at lag index `j` embedded in the full 9×9 basis.
    pub fn embedded(&self, j: usize) -> Matrix9 {
        embed(&self.samples[j])
    }

    /// Largest entry modulus of the sample at lag index `j`.
    pub fn max_norm(&self, j: usize) -> f64 {
        self.samples[j].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Samples `K(τ) = PL·exp(QLQ τ)·QLP` on `lags`, which must be uniform and
/// start at zero.
pub fn build_kernel(
    generator: &GeneratorMatrix,
    projectors: &ProjectorPair,
    lags: &TimeGrid,
) -> Result<MemoryKernelSamples> {
    if lags.uniform_step().is_none() && lags.len() > 1 {
        return Err(Error::Grid("kernel lags must be uniform".into()));
    }
    if lags.t_start() != 0.0 {
        return Err(Error::Grid(format!(
            "kernel lags must start at 0, got {}",
            lags.t_start()
        )));
    }
    let l = generator.matrix();
    let p = projectors.p_matrix();
    let q = projectors.q_matrix();
    let qlq = GeneratorMatrix::from_matrix(q * l * q, generator.subsystem());
    let pl = p * l;
    let qlp = q * l * p;
    let memory = Propagator::new(&qlq)?;

    let samples = lags
        .points()
        .par_iter()
        .map(|&tau| {
            let mut evolved = Matrix9::zeros();
            for &col in &RELEVANT_INDICES {
                let column: CoefficientVector = qlp.column(col).into_owned();
                evolved.set_column(col, &memory.evolve(&column, tau));
            }
            restrict(&(pl * evolved))
        })
        .collect();
    Ok(MemoryKernelSamples {
        lags: lags.clone(),
        samples,
    })
}

/// `PLP` restricted to the relevant indices.
pub fn local_term(generator: &GeneratorMatrix, projectors: &ProjectorPair) -> Matrix4<C64> {
    let p = projectors.p_matrix();
    restrict(&(p * generator.matrix() * p))
}

/// Time-stepping scheme of [`solve_nz`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NzScheme {
    /// Euler predictor, trapezoid corrector on the whole right-hand side.
    Plain,
    /// The local term is propagated exactly through `exp(PLP·dt)`; the memory
    /// integral uses the same predictor-corrector pair.
    #[default]
    IntegratingFactor,
}

/// Solves the memory-kernel equation on `grid` with trapezoidal quadrature
/// of the convolution inside a second-order predictor-corrector step.
pub fn solve_nz(
    kernel: &MemoryKernelSamples,
    local: &Matrix4<C64>,
    init: &CoefficientVector,
    grid: &TimeGrid,
    scheme: NzScheme,
) -> Result<Vec<CoefficientVector>> {
    let leak = (0..BASIS_DIM)
        .filter(|i| !RELEVANT_INDICES.contains(i))
        .map(|i| init[i].norm())
        .fold(0.0, f64::max);
    if leak > 0.0 {
        return Err(domain(
            "init",
            format!("must lie in the relevant subspace (irrelevant component {leak:e})"),
        ));
    }
    let n = grid.len();
    if n == 0 {
        return Err(Error::Grid("empty time grid".into()));
    }
    let y0 = restrict_vector(init);
    if n == 1 {
        return Ok(vec![embed_vector(&y0)]);
    }
    let dt = grid
        .uniform_step()
        .ok_or_else(|| Error::Grid("memory-kernel solve needs a uniform grid".into()))?;
    match kernel.lags.uniform_step() {
        Some(lag_dt) if ((lag_dt - dt) / dt).abs() <= STEP_MATCH_TOL => {}
        other => {
            return Err(Error::Grid(format!(
                "kernel lag step {other:?} does not match solver step {dt}"
            )))
        }
    }
    if kernel.len() < n {
        return Err(Error::KernelCoverage {
            available: kernel.lags.t_end(),
            required: grid.t_end() - grid.t_start(),
        });
    }

    let k = &kernel.samples;
    let half = C64::from(0.5);
    let dtc = C64::from(dt);
    let exp_local = (*local * dtc).exp();

    // entries that are nonzero at some lag; the convolution skips the rest
    let pattern: Vec<(usize, usize)> = (0..4)
        .flat_map(|r| (0..4).map(move |c| (r, c)))
        .filter(|&(r, c)| k[..n].iter().any(|km| km[(r, c)] != C64::from(0.0)))
        .collect();

    // I_n with y_n itself excluded: dt·(½K_n y_0 + Σ_{j=1}^{n−1} K_{n−j} y_j)
    let history = |ys: &[Vector4<C64>], m: usize| -> Vector4<C64> {
        let mut acc = k[m] * ys[0] * half;
        for (j, y) in ys.iter().enumerate().take(m).skip(1) {
            let km = &k[m - j];
            for &(r, c) in &pattern {
                acc[r] += km[(r, c)] * y[c];
            }
        }
        acc * dtc
    };
    let memory = |hist: &Vector4<C64>, y: &Vector4<C64>| hist + k[0] * y * (half * dtc);

    let mut ys = Vec::with_capacity(n);
    ys.push(y0);
    let mut mem_n = Vector4::zeros();
    for m in 0..n - 1 {
        let y_n = ys[m];
        let hist_next = history(&ys, m + 1);
        let y_next = match scheme {
            NzScheme::Plain => {
                let f_n = local * y_n + mem_n;
                let pred = y_n + f_n * dtc;
                let f_pred = local * pred + memory(&hist_next, &pred);
                y_n + (f_n + f_pred) * (half * dtc)
            }
            NzScheme::IntegratingFactor => {
                let e_mem = exp_local * mem_n;
                let pred = exp_local * y_n + e_mem * dtc;
                let mem_pred = memory(&hist_next, &pred);
                exp_local * y_n + (e_mem + mem_pred) * (half * dtc)
            }
        };
        ys.push(y_next);
        mem_n = memory(&hist_next, &y_next);
    }
    Ok(ys.iter().map(embed_vector).collect())
}
