//! Reduced two-qubit density matrix from subsystem coefficient trajectories.
//!
//! Each subsystem coefficient vector `m` maps to a 2×2 single-atom operator
//! (partner atom traced out), and the two-qubit state is
//! `ρ₁₂ = ½ Σ_m M⁽¹⁾_m ⊗ M⁽²⁾_m` over the four Bell-decomposition terms.
//! Matrices use the basis order `(|11⟩, |10⟩, |01⟩, |00⟩)`.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{CoefficientVector, C64};
use crate::propagator::SubsystemTrajectory;

/// Tolerance for entries that must vanish in an X state.
pub const X_PATTERN_TOL: f64 = 1e-9;

/// Entries allowed to be nonzero in an X state (besides the diagonal).
const X_CORNERS: [(usize, usize); 2] = [(0, 3), (3, 0)];

/// Partial trace over the partner atom of one coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleAtomBlock(Matrix2<C64>);

impl SingleAtomBlock {
    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }
}

pub fn single_atom_block(m: &CoefficientVector, nbar: f64) -> SingleAtomBlock {
    let denom = 2.0 * nbar + 1.0;
    let p = nbar / denom;
    let q = (nbar + 1.0) / denom;
    SingleAtomBlock(Matrix2::new(m[0] * p + m[1], m[5], m[7], m[0] * q - m[1]))
}

/// Two-qubit density matrix in the `(|11⟩, |10⟩, |01⟩, |00⟩)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix4(Matrix4<C64>);

impl DensityMatrix4 {
    /// Wraps a matrix without checking physicality; see [`physicality`].
    pub fn new(matrix: Matrix4<C64>) -> Self {
        Self(matrix)
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix4) -> f64 {
        (self.0 - other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let herm = (self.0 + self.0.adjoint()) * C64::from(0.5);
        let ev = SymmetricEigen::new(herm).eigenvalues;
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(f64::total_cmp);
        out
    }
}

/// The maximally entangled initial state `(|00⟩ + |11⟩)/√2`.
pub fn bell_state() -> DensityMatrix4 {
    let h = C64::from(0.5);
    let mut m = Matrix4::zeros();
    m[(0, 0)] = h;
    m[(0, 3)] = h;
    m[(3, 0)] = h;
    m[(3, 3)] = h;
    DensityMatrix4(m)
}

/// Two-qubit state with only diagonal and `⟨11|ρ|00⟩` coherences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XStateMatrix {
    /// `⟨11|ρ|11⟩`
    pub a: f64,
    /// `⟨10|ρ|10⟩`
    pub b: f64,
    /// `⟨01|ρ|01⟩`
    pub c: f64,
    /// `⟨00|ρ|00⟩`
    pub d: f64,
    /// `⟨11|ρ|00⟩`
    pub f: C64,
}

impl XStateMatrix {
    pub fn to_density(&self) -> DensityMatrix4 {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = C64::from(self.a);
        m[(1, 1)] = C64::from(self.b);
        m[(2, 2)] = C64::from(self.c);
        m[(3, 3)] = C64::from(self.d);
        m[(0, 3)] = self.f;
        m[(3, 0)] = self.f.conj();
        DensityMatrix4(m)
    }

    pub fn population_sum(&self) -> f64 {
        self.a + self.b + self.c + self.d
    }

    /// Positivity of an X state: non-negative populations and
    /// `|f|² ≤ a·d`, each up to `tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|&v| v >= -tol)
            && self.f.norm_sqr() <= self.a * self.d + tol
    }
}

/// `ρ₁₂` from the four coefficient vectors of each subsystem at one time,
/// ordered like [`crate::model::InitialTerm::ALL`].
pub fn rho12_from_coefficients(
    sub1: &[CoefficientVector; 4],
    sub2: &[CoefficientVector; 4],
    nbar: f64,
) -> DensityMatrix4 {
    let mut m = Matrix4::zeros();
    for (c1, c2) in sub1.iter().zip(sub2) {
        let b1 = single_atom_block(c1, nbar).0;
        let b2 = single_atom_block(c2, nbar).0;
        m += b1.kronecker(&b2);
    }
    DensityMatrix4(m * C64::from(0.5))
}

/// `ρ₁₂` at grid index `t_index`.
pub fn assemble_rho12(
    traj1: &SubsystemTrajectory,
    traj2: &SubsystemTrajectory,
    nbar: f64,
    t_index: usize,
) -> Result<DensityMatrix4> {
    if traj1.grid() != traj2.grid() {
        return Err(Error::GridMismatch);
    }
    if t_index >= traj1.grid().len() {
        return Err(Error::Grid(format!(
            "time index {t_index} out of range for {} points",
            traj1.grid().len()
        )));
    }
    Ok(rho12_from_coefficients(
        &traj1.at(t_index),
        &traj2.at(t_index),
        nbar,
    ))
}

/// Largest entry outside the X pattern.
pub fn x_pattern_residual(rho: &DensityMatrix4) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for r in 0..4 {
        for c in 0..4 {
            if r == c || X_CORNERS.contains(&(r, c)) {
                continue;
            }
            let mag = rho.0[(r, c)].norm();
            if mag > worst.0 {
                worst = (mag, r, c);
            }
        }
    }
    worst
}

/// Extracts the X-state parameters; anything outside the X pattern must be
/// below [`X_PATTERN_TOL`].
pub fn to_x_state(rho: &DensityMatrix4) -> Result<XStateMatrix> {
    let (magnitude, row, col) = x_pattern_residual(rho);
    if magnitude >= X_PATTERN_TOL {
        return Err(Error::NotXState {
            row,
            col,
            magnitude,
        });
    }
    let m = &rho.0;
    Ok(XStateMatrix {
        a: m[(0, 0)].re,
        b: m[(1, 1)].re,
        c: m[(2, 2)].re,
        d: m[(3, 3)].re,
        f: m[(0, 3)],
    })
}

/// Diagnostic numbers for one density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    /// `|tr ρ − 1|`
    pub trace_error: f64,
    /// `max |ρ − ρ†|`
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
    /// Largest entry outside the X pattern.
    pub x_residual: f64,
}

impl Physicality {
    pub fn is_physical(&self) -> bool {
        self.trace_error <= 1e-9 && self.hermiticity <= 1e-12 && self.min_eigenvalue >= -1e-9
    }
}

pub fn physicality(rho: &DensityMatrix4) -> Physicality {
    let m = &rho.0;
    let hermiticity = (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Physicality {
        trace_error: (rho.trace() - C64::from(1.0)).norm(),
        hermiticity,
        min_eigenvalue: rho.eigenvalues()[0],
        x_residual: x_pattern_residual(rho).0,
    }
}
