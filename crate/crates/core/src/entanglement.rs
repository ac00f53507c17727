//! Concurrence, entanglement of formation and collapse/revival events.

use nalgebra::{Matrix4, SymmetricEigen, SVD};

use crate::error::{domain, Error, Result};
use crate::model::{ModelParams, Subsystem, C64};
use crate::propagator::TimeGrid;
use crate::reconstruction::{physicality, DensityMatrix4, XStateMatrix};

/// Default level below which the precursor counts as "no entanglement".
pub const DEFAULT_EVENT_THRESHOLD: f64 = 1e-6;

/// Bisection tolerance for event times.
pub const EVENT_TIME_TOL: f64 = 1e-8;

/// Runs shorter than this many grid points make an event imprecise.
pub const MIN_RUN_POINTS: usize = 3;

/// `σy ⊗ σy`. The sign convention of `σy` cancels in the product, so the
/// matrix is the same for either single-qubit basis order.
fn sigma_yy() -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    m[(0, 3)] = C64::from(-1.0);
    m[(1, 2)] = C64::from(1.0);
    m[(2, 1)] = C64::from(1.0);
    m[(3, 0)] = C64::from(-1.0);
    m
}

/// Wootters spin flip `(σy ⊗ σy) ρ* (σy ⊗ σy)`.
pub fn spin_flip(rho: &DensityMatrix4) -> DensityMatrix4 {
    let yy = sigma_yy();
    DensityMatrix4::new(yy * rho.matrix().map(|z| z.conj()) * yy)
}

fn hermitian_sqrt(m: &Matrix4<C64>) -> Matrix4<C64> {
    let herm = (m + m.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(herm);
    let roots = eig.eigenvalues.map(|v| C64::from(v.max(0.0).sqrt()));
    let v = &eig.eigenvectors;
    v * Matrix4::from_diagonal(&roots) * v.adjoint()
}

/// Concurrence of an arbitrary two-qubit density matrix.
///
/// The `λ_i` (square roots of the eigenvalues of `ρ ρ̃`) are computed as the
/// singular values of `√ρ̃ √ρ`, which avoids taking square roots of tiny,
/// noise-dominated eigenvalues of the product.
pub fn concurrence_general(rho: &DensityMatrix4) -> Result<f64> {
    let report = physicality(rho);
    if report.trace_error > 1e-9 || report.hermiticity > 1e-10 || report.min_eigenvalue < -1e-9 {
        return Err(Error::Unphysical(format!(
            "trace error {:.2e}, hermiticity {:.2e}, min eigenvalue {:.2e}",
            report.trace_error, report.hermiticity, report.min_eigenvalue
        )));
    }
    let sqrt_rho = hermitian_sqrt(rho.matrix());
    let yy = sigma_yy();
    let sqrt_flipped = yy * sqrt_rho.map(|z| z.conj()) * yy;
    let mut lambdas: Vec<f64> = SVD::new(sqrt_flipped * sqrt_rho, false, false)
        .singular_values
        .iter()
        .cloned()
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(c.clamp(0.0, 1.0))
}

/// Unclamped `2(|f| − √(bc))`; negative values measure how far the state is
/// from being entangled.
pub fn precursor(x: &XStateMatrix) -> f64 {
    2.0 * (x.f.norm() - (x.b * x.c).max(0.0).sqrt())
}

/// Analytic concurrence of an X state.
pub fn concurrence_x(x: &XStateMatrix) -> f64 {
    precursor(x).max(0.0)
}

/// Binary entropy in bits with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// Entanglement of formation from the concurrence.
pub fn entanglement_of_formation(concurrence: f64) -> Result<f64> {
    if !concurrence.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&concurrence) {
        return Err(domain(
            "concurrence",
            format!("must lie in [0, 1], got {concurrence}"),
        ));
    }
    let c = concurrence.clamp(0.0, 1.0);
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt())))
}

/// Decay rate `α_k² / γ / (2n̄+1)²` of the memoryless limit.
pub fn markovian_rate(params: &ModelParams, k: Subsystem) -> Result<f64> {
    let gamma = params.gamma();
    if gamma == 0.0 {
        return Err(domain("gamma", "Markovian rate needs gamma > 0"));
    }
    let alpha = params.alpha(k);
    let s = 2.0 * params.nbar() + 1.0;
    Ok(alpha * alpha / gamma / (s * s))
}

/// Concurrence, precursor and entanglement of formation on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementSeries {
    pub grid: TimeGrid,
    pub concurrence: Vec<f64>,
    pub precursor: Vec<f64>,
    pub eof: Vec<f64>,
}

impl EntanglementSeries {
    /// Series of a sequence of X states, one per grid point.
    pub fn from_x_states(grid: TimeGrid, states: &[XStateMatrix]) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} states for {} grid points",
                states.len(),
                grid.len()
            )));
        }
        let precursor: Vec<f64> = states.iter().map(precursor).collect();
        let concurrence: Vec<f64> = precursor.iter().map(|p| p.clamp(0.0, 1.0)).collect();
        let eof = concurrence
            .iter()
            .map(|&c| entanglement_of_formation(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            concurrence,
            precursor,
            eof,
        })
    }

    /// Trapezoidal `∫ C(t) dt` over the grid.
    pub fn integrated_concurrence(&self) -> f64 {
        self.grid
            .points()
            .windows(2)
            .zip(self.concurrence.windows(2))
            .map(|(t, c)| 0.5 * (t[1] - t[0]) * (c[0] + c[1]))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Death,
    Revival,
    FinalDeath,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Death => "DEATH",
            EventKind::Revival => "REVIVAL",
            EventKind::FinalDeath => "FINAL_DEATH",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementEvent {
    pub kind: EventKind,
    pub time: f64,
    /// Set when the grid resolves the surrounding run with fewer than
    /// [`MIN_RUN_POINTS`] points.
    pub reduced_precision: bool,
}

/// Collapse and revival events of a precursor series.
///
/// The state counts as disentangled wherever the precursor is below
/// `threshold`. A DEATH is a downward crossing of that level, a REVIVAL an
/// upward one; the last DEATH becomes FINAL_DEATH if the precursor stays
/// below the level until the end of the grid. Crossing times are bisected
/// to [`EVENT_TIME_TOL`] on `precursor_at` when it is given, otherwise
/// linearly interpolated between grid points.
pub fn extract_events(
    series: &EntanglementSeries,
    threshold: f64,
    precursor_at: Option<&dyn Fn(f64) -> f64>,
) -> Vec<EntanglementEvent> {
    let t = series.grid.points();
    let p = &series.precursor;
    let alive: Vec<bool> = p.iter().map(|&v| v >= threshold).collect();

    let crossings: Vec<usize> = (1..alive.len())
        .filter(|&i| alive[i] != alive[i - 1])
        .collect();
    let mut events = Vec::with_capacity(crossings.len());
    for (n, &i) in crossings.iter().enumerate() {
        let kind = if alive[i - 1] {
            EventKind::Death
        } else {
            EventKind::Revival
        };
        let run_end = crossings.get(n + 1).copied().unwrap_or(alive.len());
        let run_start = if n == 0 { 0 } else { crossings[n - 1] };
        let short_run = (run_end - i < MIN_RUN_POINTS && run_end < alive.len())
            || (i - run_start < MIN_RUN_POINTS && n > 0);
        if short_run {
            log::warn!(
                "{} near t = {:.6} is resolved by fewer than {} grid points",
                kind.name(),
                t[i],
                MIN_RUN_POINTS
            );
        }
        let time = match precursor_at {
            Some(f) => bisect(|s| f(s) - threshold, t[i - 1], t[i]),
            None => {
                let (a, b) = (p[i - 1] - threshold, p[i] - threshold);
                t[i - 1] + (t[i] - t[i - 1]) * a / (a - b)
            }
        };
        events.push(EntanglementEvent {
            kind,
            time,
            reduced_precision: short_run,
        });
    }
    if let Some(last) = events.last_mut() {
        if last.kind == EventKind::Death {
            last.kind = EventKind::FinalDeath;
        }
    }
    events
}

/// Root of `g` in `[lo, hi]`, assuming a sign change.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut g_lo = g(lo);
    if g(hi).signum() == g_lo.signum() {
        // no sign change on the continuous solution: keep the grid estimate
        return 0.5 * (lo + hi);
    }
    while hi - lo > EVENT_TIME_TOL {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
