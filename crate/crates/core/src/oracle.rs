//! Brute-force reference dynamics.
//!
//! The four-atom density matrix is evolved directly under the Lindblad
//! equation in the 16-dimensional Hilbert space (tensor order `1⊗2⊗3⊗4`,
//! excited-first per atom) with the adaptive integrator from [`crate::ode`],
//! then atoms 3 and 4 are traced out. Nothing here uses the operator basis
//! or matrix exponentials, so agreement with the fast path is a genuine
//! check of the whole coefficient-space pipeline.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{
    build_generator, initial_coefficients, InitialTerm, ModelParams, Subsystem, C64,
};
use crate::ode::{integrate, Tolerances};
use crate::propagator::{Propagator, TimeGrid};
use crate::reconstruction::{single_atom_block, DensityMatrix4};

/// Integrator tolerances used for every oracle run.
pub const ORACLE_TOLERANCES: Tolerances = Tolerances {
    rtol: 1e-10,
    atol: 1e-13,
    max_steps: 10_000_000,
};

fn zero() -> C64 {
    C64::from(0.0)
}

fn one() -> C64 {
    C64::from(1.0)
}

/// `σ⁺ = |1⟩⟨0|` in excited-first order.
fn sigma_plus() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[zero(), one(), zero(), zero()])
}

/// `σ⁻ = |0⟩⟨1|` in excited-first order.
fn sigma_minus() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[zero(), zero(), one(), zero()])
}

/// `|1⟩⟨1|` in excited-first order.
fn excited_projector() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[one(), zero(), zero(), zero()])
}

/// `op` acting on `site` of an `n_sites`-qubit register.
fn embed(op: &DMatrix<C64>, site: usize, n_sites: usize) -> DMatrix<C64> {
    (0..n_sites).fold(DMatrix::from_element(1, 1, one()), |acc, s| {
        if s == site {
            acc.kronecker(op)
        } else {
            acc.kronecker(&DMatrix::<C64>::identity(2, 2))
        }
    })
}

fn thermal_matrix(nbar: f64) -> DMatrix<C64> {
    let denom = 2.0 * nbar + 1.0;
    DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::from(nbar / denom),
            zero(),
            zero(),
            C64::from((nbar + 1.0) / denom),
        ],
    )
}

/// Lindblad generator `ρ ↦ −i[H, ρ] + Σ_j r_j (2 L_j ρ L_j† − L_j†L_j ρ − ρ L_j†L_j)`.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: DMatrix<C64>,
    dissipators: Vec<(f64, DMatrix<C64>)>,
}

impl LindbladModel {
    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &DMatrix<C64> {
        &self.hamiltonian
    }

    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * C64::new(0.0, -1.0);
        for (rate, l) in &self.dissipators {
            if *rate == 0.0 {
                continue;
            }
            let ld = l.adjoint();
            let ldl = &ld * l;
            out += (l * rho * &ld * C64::from(2.0) - &ldl * rho - rho * &ldl) * C64::from(*rate);
        }
        out
    }

    /// Sparse superoperator acting on column-major vectorized matrices,
    /// built column by column from [`LindbladModel::apply`].
    pub fn superoperator(&self) -> SparseSuperoperator {
        let d = self.dim();
        let n = d * d;
        let mut entries = Vec::new();
        for col in 0..n {
            let mut basis = DMatrix::<C64>::zeros(d, d);
            basis[(col % d, col / d)] = one();
            let image = self.apply(&basis);
            for (row, v) in image.as_slice().iter().enumerate() {
                if *v != zero() {
                    entries.push((row, col, *v));
                }
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_start = vec![0usize; n + 1];
        for &(r, _, _) in &entries {
            row_start[r + 1] += 1;
        }
        for r in 0..n {
            row_start[r + 1] += row_start[r];
        }
        SparseSuperoperator {
            dim: n,
            row_start,
            cols: entries.iter().map(|e| e.1).collect(),
            values: entries.iter().map(|e| e.2).collect(),
        }
    }

    /// Evolves `rho0` and records the state at each grid time.
    pub fn evolve(&self, rho0: &DMatrix<C64>, grid: &TimeGrid) -> Result<Vec<DMatrix<C64>>> {
        let d = self.dim();
        let sup = self.superoperator();
        let f = |_t: f64, y: &[C64], dy: &mut [C64]| sup.mul_into(y, dy);
        let ys = integrate(f, rho0.as_slice(), grid.points(), ORACLE_TOLERANCES)?;
        Ok(ys
            .into_iter()
            .map(|y| DMatrix::from_column_slice(d, d, &y))
            .collect())
    }
}

/// Row-compressed superoperator.
#[derive(Debug, Clone)]
pub struct SparseSuperoperator {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl SparseSuperoperator {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mul_into(&self, x: &[C64], y: &mut [C64]) {
        for (yr, bounds) in y.iter_mut().zip(self.row_start.windows(2)) {
            *yr = (bounds[0]..bounds[1])
                .map(|idx| self.values[idx] * x[self.cols[idx]])
                .fold(zero(), |a, b| a + b);
        }
    }
}

fn pair_terms(
    params: &ModelParams,
    k: Subsystem,
    system_site: usize,
    partner_site: usize,
    n_sites: usize,
) -> (DMatrix<C64>, Vec<(f64, DMatrix<C64>)>) {
    let sp = |site| embed(&sigma_plus(), site, n_sites);
    let sm = |site| embed(&sigma_minus(), site, n_sites);
    let num = |site| embed(&excited_projector(), site, n_sites);

    let alpha = params.alpha(k);
    let h = num(system_site) * C64::from(params.system_omega(k))
        + num(partner_site) * C64::from(params.partner_omega(k))
        + (sp(system_site) * sm(partner_site) + sm(system_site) * sp(partner_site))
            * C64::from(alpha);
    let g = params.gamma();
    let n = params.nbar();
    let dissipators = vec![(g * (n + 1.0), sm(partner_site)), (g * n, sp(partner_site))];
    (h, dissipators)
}

/// Generator of the complete four-atom system.
pub fn build_full_liouvillian(params: &ModelParams) -> LindbladModel {
    // sites: 0 → atom 1, 1 → atom 2, 2 → atom 3, 3 → atom 4
    let (h13, d13) = pair_terms(params, Subsystem::One, 0, 2, 4);
    let (h24, d24) = pair_terms(params, Subsystem::Two, 1, 3, 4);
    LindbladModel {
        hamiltonian: h13 + h24,
        dissipators: d13.into_iter().chain(d24).collect(),
    }
}

/// Generator of atom `k` and its partner alone (site 0: atom `k`,
/// site 1: partner).
pub fn build_pair_liouvillian(params: &ModelParams, k: Subsystem) -> LindbladModel {
    let (hamiltonian, dissipators) = pair_terms(params, k, 0, 1, 2);
    LindbladModel {
        hamiltonian,
        dissipators,
    }
}

/// Density matrix of all four atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct FullDensityMatrix(DMatrix<C64>);

impl FullDensityMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != 16 || matrix.ncols() != 16 {
            return Err(Error::Unphysical(format!(
                "expected a 16x16 matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self(matrix))
    }

    /// `ρ₁₂ ⊗ ρ̄ ⊗ ρ̄`.
    pub fn with_thermal_partners(rho12: &DensityMatrix4, nbar: f64) -> Self {
        let r12 = DMatrix::from_fn(4, 4, |r, c| rho12.entry(r, c));
        let th = thermal_matrix(nbar);
        Self(r12.kronecker(&th).kronecker(&th))
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }
}

/// Full four-atom evolution on `grid`.
pub fn evolve_full(
    params: &ModelParams,
    rho0: &FullDensityMatrix,
    grid: &TimeGrid,
) -> Result<Vec<FullDensityMatrix>> {
    let model = build_full_liouvillian(params);
    Ok(model
        .evolve(&rho0.0, grid)?
        .into_iter()
        .map(FullDensityMatrix)
        .collect())
}

/// Trace over atoms 3 and 4.
pub fn partial_trace_34(rho: &FullDensityMatrix) -> DensityMatrix4 {
    let m = &rho.0;
    let mut out = Matrix4::zeros();
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = zero();
            for env in 0..4 {
                acc += m[(4 * r + env, 4 * c + env)];
            }
            out[(r, c)] = acc;
        }
    }
    DensityMatrix4::new(out)
}

/// Single-qubit dynamical map as the images of the matrix units
/// `E_ij = |i⟩⟨j|` (excited-first indices).
#[derive(Debug, Clone, PartialEq)]
pub struct SingleQubitMap {
    images: [[nalgebra::Matrix2<C64>; 2]; 2],
}

impl SingleQubitMap {
    /// `images[i][j]` is the image of `|i⟩⟨j|`.
    pub fn from_images(images: [[nalgebra::Matrix2<C64>; 2]; 2]) -> Self {
        Self { images }
    }

    pub fn image(&self, i: usize, j: usize) -> &nalgebra::Matrix2<C64> {
        &self.images[i][j]
    }

    pub fn apply(&self, rho: &nalgebra::Matrix2<C64>) -> nalgebra::Matrix2<C64> {
        let mut out = nalgebra::Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                out += self.images[i][j] * rho[(i, j)];
            }
        }
        out
    }

    /// Choi matrix `Σ_ij E_ij ⊗ Φ(E_ij)`.
    pub fn choi(&self) -> ChoiMatrix {
        let mut m = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for r in 0..2 {
                    for c in 0..2 {
                        m[(2 * i + r, 2 * j + c)] = self.images[i][j][(r, c)];
                    }
                }
            }
        }
        ChoiMatrix(m)
    }
}

/// The map `ρ_k ↦ Tr_partner[exp(L t)(ρ_k ⊗ ρ̄)]` of subsystem `k`, from the
/// pair Lindblad equation.
pub fn subsystem_map(params: &ModelParams, k: Subsystem, t: f64) -> Result<SingleQubitMap> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Grid(format!("map time must be >= 0, got {t}")));
    }
    let model = build_pair_liouvillian(params, k);
    let th = thermal_matrix(params.nbar());
    let grid = if t == 0.0 {
        TimeGrid::from_points(vec![0.0])?
    } else {
        TimeGrid::from_points(vec![0.0, t])?
    };
    let mut images = [[nalgebra::Matrix2::zeros(); 2]; 2];
    for (i, row) in images.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let mut unit = DMatrix::<C64>::zeros(2, 2);
            unit[(i, j)] = one();
            let rho0 = unit.kronecker(&th);
            let evolved = model
                .evolve(&rho0, &grid)?
                .pop()
                .expect("grid is non-empty");
            for r in 0..2 {
                for c in 0..2 {
                    slot[(r, c)] = evolved[(2 * r, 2 * c)] + evolved[(2 * r + 1, 2 * c + 1)];
                }
            }
        }
    }
    Ok(SingleQubitMap { images })
}

/// The same map read from the coefficient-space propagator: the evolved
/// initial terms are exactly the images of the matrix units.
pub fn coefficient_subsystem_map(
    params: &ModelParams,
    k: Subsystem,
    t: f64,
) -> Result<SingleQubitMap> {
    let prop = Propagator::new(&build_generator(params, k))?;
    let image = |term| {
        *single_atom_block(
            &prop.evolve(&initial_coefficients(term, params.nbar()), t),
            params.nbar(),
        )
        .matrix()
    };
    Ok(SingleQubitMap::from_images([
        [
            image(InitialTerm::ExcitedExcited),
            image(InitialTerm::ExcitedGround),
        ],
        [
            image(InitialTerm::GroundExcited),
            image(InitialTerm::GroundGround),
        ],
    ]))
}

/// Choi matrix of a single-qubit map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiMatrix(Matrix4<C64>);

impl ChoiMatrix {
    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (self.0 - self.0.adjoint())
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

pub fn choi_of_subsystem_map(params: &ModelParams, k: Subsystem, t: f64) -> Result<ChoiMatrix> {
    Ok(subsystem_map(params, k, t)?.choi())
}

/// `(Φ₁ ⊗ Φ₂)(ρ)` for a two-qubit state.
pub fn apply_product_map(
    phi1: &SingleQubitMap,
    phi2: &SingleQubitMap,
    rho: &DensityMatrix4,
) -> DensityMatrix4 {
    let mut out = Matrix4::zeros();
    for i1 in 0..2 {
        for j1 in 0..2 {
            for i2 in 0..2 {
                for j2 in 0..2 {
                    let coef = rho.entry(2 * i1 + i2, 2 * j1 + j2);
                    if coef == zero() {
                        continue;
                    }
                    out += phi1.image(i1, j1).kronecker(phi2.image(i2, j2)) * coef;
                }
            }
        }
    }
    DensityMatrix4::new(out)
}
