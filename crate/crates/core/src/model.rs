//! Physical parameters, the thermal reference state and the nine-dimensional
//! operator-basis description of one atom + mini-reservoir subsystem.
//!
//! # Basis convention
//!
//! Every single-qubit matrix in this crate is written in the order
//! **(excited `|1⟩`, ground `|0⟩`)**. Most quantum-information code puts the
//! ground state first; here the thermal state, the initial coefficient
//! vectors and the reconstruction formula only agree with each other in the
//! excited-first order, so it is used everywhere. Two-qubit matrices follow
//! by the Kronecker product: `(|11⟩, |10⟩, |01⟩, |00⟩)`.
//!
//! # Operator basis
//!
//! The state of atom `k` together with its partner atom `k+2` is expanded in
//! nine operators `X_0 .. X_8` (with `ρ̄` the thermal state, `A = q|0⟩⟨0| − p|1⟩⟨1|`):
//!
//! | index | operator                     |
//! |-------|------------------------------|
//! | 0     | `ρ̄ ⊗ ρ̄`                      |
//! | 1     | `σz ⊗ ρ̄`                     |
//! | 2     | `σ⁻ ⊗ σ⁺ − σ⁺ ⊗ σ⁻`          |
//! | 3     | `σ⁻ ⊗ σ⁺ + σ⁺ ⊗ σ⁻`          |
//! | 4     | `ρ̄ ⊗ σz`                     |
//! | 5     | `σ⁺ ⊗ ρ̄`                     |
//! | 6     | `A ⊗ σ⁺`                     |
//! | 7     | `σ⁻ ⊗ ρ̄`                     |
//! | 8     | `A ⊗ σ⁻`                     |
//!
//! The span is invariant under the subsystem generator, whose matrix
//! ([`GeneratorMatrix`]) acts on coefficient vectors: `dc/dt = L c` with
//! `L[row][col]` the coefficient of `X_row` in `L(X_col)`.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

pub type C64 = Complex64;

/// Dimension of the operator basis of one subsystem.
pub const BASIS_DIM: usize = 9;

/// Coefficients `c_0 .. c_8` of one subsystem operator in the `X` basis.
pub type CoefficientVector = SVector<C64, BASIS_DIM>;

pub type Matrix9 = SMatrix<C64, BASIS_DIM, BASIS_DIM>;

/// Diagonal blocks of the generator; no entry of `L` couples two blocks.
pub const BLOCKS: [&[usize]; 4] = [&[0], &[1, 2, 3, 4], &[5, 6], &[7, 8]];

/// Basis indices kept by the relevant-part projector.
pub const RELEVANT_INDICES: [usize; 4] = [0, 1, 5, 7];

/// One of the two independent atom + mini-reservoir subsystems.
///
/// `One` is atom 1 with partner atom 3, `Two` is atom 2 with partner atom 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    One,
    Two,
}

impl Subsystem {
    pub const BOTH: [Subsystem; 2] = [Subsystem::One, Subsystem::Two];

    /// Zero-based slot used to index per-subsystem arrays.
    pub fn slot(self) -> usize {
        match self {
            Subsystem::One => 0,
            Subsystem::Two => 1,
        }
    }

    /// Parses the 1-based subsystem label `k`.
    pub fn from_label(k: usize) -> Result<Self> {
        match k {
            1 => Ok(Subsystem::One),
            2 => Ok(Subsystem::Two),
            _ => Err(domain(
                "k",
                format!("subsystem label must be 1 or 2, got {k}"),
            )),
        }
    }

    pub fn label(self) -> usize {
        self.slot() + 1
    }
}

/// The four single-atom operators in the Bell-state decomposition
/// `ρ₁₂(0) = ½ Σ_m M_m ⊗ M_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialTerm {
    /// `|1⟩⟨1|`
    ExcitedExcited,
    /// `|0⟩⟨0|`
    GroundGround,
    /// `|0⟩⟨1| = σ⁻`
    GroundExcited,
    /// `|1⟩⟨0| = σ⁺`
    ExcitedGround,
}

impl InitialTerm {
    pub const ALL: [InitialTerm; 4] = [
        InitialTerm::ExcitedExcited,
        InitialTerm::GroundGround,
        InitialTerm::GroundExcited,
        InitialTerm::ExcitedGround,
    ];

    pub fn slot(self) -> usize {
        match self {
            InitialTerm::ExcitedExcited => 0,
            InitialTerm::GroundGround => 1,
            InitialTerm::GroundExcited => 2,
            InitialTerm::ExcitedGround => 3,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            InitialTerm::ExcitedExcited => "EE",
            InitialTerm::GroundGround => "GG",
            InitialTerm::GroundExcited => "GE",
            InitialTerm::ExcitedGround => "EG",
        }
    }
}

/// Physical parameters of the four-atom model (ℏ = 1).
///
/// Frequencies are indexed like the atoms: `omega(1)`, `omega(2)` belong to
/// the principal qubits, `omega(3)`, `omega(4)` to their mini-reservoir
/// partners. Immutable once validated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    omega: [f64; 4],
    alpha: [f64; 2],
    gamma: f64,
    nbar: f64,
}

impl ModelParams {
    /// Builds a parameter set from absolute frequencies `ω₁..ω₄`.
    pub fn new(omega: [f64; 4], alpha: [f64; 2], gamma: f64, nbar: f64) -> Result<Self> {
        if omega.iter().chain(alpha.iter()).any(|v| !v.is_finite())
            || !gamma.is_finite()
            || !nbar.is_finite()
        {
            return Err(Error::NonFinite("model parameters"));
        }
        if gamma < 0.0 {
            return Err(domain("gamma", format!("must be >= 0, got {gamma}")));
        }
        if nbar < 0.0 {
            return Err(domain("nbar", format!("must be >= 0, got {nbar}")));
        }
        Ok(Self {
            omega,
            alpha,
            gamma,
            nbar,
        })
    }

    /// Builds a parameter set from the qubit frequencies and the detunings
    /// `Δ_k = ω_k − ω_{k+2}`.
    pub fn with_detunings(
        omega1: f64,
        omega2: f64,
        delta: [f64; 2],
        alpha: [f64; 2],
        gamma: f64,
        nbar: f64,
    ) -> Result<Self> {
        Self::new(
            [omega1, omega2, omega1 - delta[0], omega2 - delta[1]],
            alpha,
            gamma,
            nbar,
        )
    }

    /// Identical subsystems: `ω₂ = ω₁`, `Δ₁ = Δ₂`, `α₁ = α₂`.
    pub fn symmetric(omega1: f64, delta: f64, alpha: f64, gamma: f64, nbar: f64) -> Result<Self> {
        Self::with_detunings(omega1, omega1, [delta, delta], [alpha, alpha], gamma, nbar)
    }

    /// Frequency of atom `n` (1-based, `n ∈ 1..=4`).
    pub fn omega(&self, n: usize) -> f64 {
        assert!((1..=4).contains(&n), "atom index must be in 1..=4, got {n}");
        self.omega[n - 1]
    }

    pub fn omegas(&self) -> [f64; 4] {
        self.omega
    }

    /// Qubit frequency `ω_k` of subsystem `k`.
    pub fn system_omega(&self, k: Subsystem) -> f64 {
        self.omega[k.slot()]
    }

    /// Frequency `ω_{k+2}` of the mini-reservoir partner of subsystem `k`.
    pub fn partner_omega(&self, k: Subsystem) -> f64 {
        self.omega[k.slot() + 2]
    }

    pub fn alpha(&self, k: Subsystem) -> f64 {
        self.alpha[k.slot()]
    }

    pub fn alphas(&self) -> [f64; 2] {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// `Δ_k = ω_k − ω_{k+2}`.
    pub fn detuning(&self, k: Subsystem) -> f64 {
        self.system_omega(k) - self.partner_omega(k)
    }

    /// Effective decoherence rate `(2n̄ + 1)γ`.
    pub fn gamma_eff(&self) -> f64 {
        (2.0 * self.nbar + 1.0) * self.gamma
    }

    pub fn thermal_state(&self) -> ThermalState {
        ThermalState::from_valid(self.nbar)
    }

    /// Copy with the coupling of every subsystem replaced.
    pub fn with_alpha(&self, alpha: [f64; 2]) -> Result<Self> {
        Self::new(self.omega, alpha, self.gamma, self.nbar)
    }
}

/// Thermal state of a mini-reservoir atom, `diag(p, q)` in excited-first order
/// with `p = n̄/(2n̄+1)`, `q = (n̄+1)/(2n̄+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    excited: f64,
    ground: f64,
}

impl ThermalState {
    fn from_valid(nbar: f64) -> Self {
        let denom = 2.0 * nbar + 1.0;
        Self {
            excited: nbar / denom,
            ground: (nbar + 1.0) / denom,
        }
    }

    /// Excited-state population `p`.
    pub fn excited(&self) -> f64 {
        self.excited
    }

    /// Ground-state population `q`.
    pub fn ground(&self) -> f64 {
        self.ground
    }

    pub fn diagonal(&self) -> [f64; 2] {
        [self.excited, self.ground]
    }

    pub fn trace(&self) -> f64 {
        self.excited + self.ground
    }
}

/// Thermal state for mean occupation `nbar`.
pub fn thermal_state(nbar: f64) -> Result<ThermalState> {
    if !nbar.is_finite() {
        return Err(Error::NonFinite("nbar"));
    }
    if nbar < 0.0 {
        return Err(domain("nbar", format!("must be >= 0, got {nbar}")));
    }
    Ok(ThermalState::from_valid(nbar))
}

/// Matrix of the subsystem generator in the `X` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    matrix: Matrix9,
    subsystem: Subsystem,
}

impl GeneratorMatrix {
    /// Wraps an arbitrary 9×9 matrix. Used for perturbation and mutation
    /// tests; physical generators come from [`build_generator`].
    pub fn from_matrix(matrix: Matrix9, subsystem: Subsystem) -> Self {
        Self { matrix, subsystem }
    }

    pub fn matrix(&self) -> &Matrix9 {
        &self.matrix
    }

    pub fn subsystem(&self) -> Subsystem {
        self.subsystem
    }

    /// `L[row][col]`: coefficient of `X_row` in `L(X_col)`.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn apply(&self, c: &CoefficientVector) -> CoefficientVector {
        self.matrix * c
    }
}

/// Generator of subsystem `k`.
pub fn build_generator(params: &ModelParams, k: Subsystem) -> GeneratorMatrix {
    let i = C64::i();
    let alpha = params.alpha(k);
    let delta = params.detuning(k);
    let g = params.gamma_eff();
    let w_sys = params.system_omega(k);
    let w_partner = params.partner_omega(k);

    let mut m = Matrix9::zeros();
    // block {1, 2, 3, 4}
    m[(1, 2)] = -2.0 * i * alpha;
    m[(2, 1)] = -i * alpha;
    m[(2, 2)] = C64::from(-g);
    m[(2, 3)] = i * delta;
    m[(2, 4)] = i * alpha;
    m[(3, 2)] = i * delta;
    m[(3, 3)] = C64::from(-g);
    m[(4, 2)] = 2.0 * i * alpha;
    m[(4, 4)] = C64::from(-2.0 * g);
    // block {5, 6}
    m[(5, 5)] = -i * w_sys;
    m[(5, 6)] = -i * alpha;
    m[(6, 5)] = -i * alpha;
    m[(6, 6)] = -(g + i * w_partner);
    // block {7, 8}
    m[(7, 7)] = i * w_sys;
    m[(7, 8)] = i * alpha;
    m[(8, 7)] = i * alpha;
    m[(8, 8)] = -(g - i * w_partner);

    GeneratorMatrix {
        matrix: m,
        subsystem: k,
    }
}

/// Initial coefficient vector of one factor of the Bell-state decomposition.
pub fn initial_coefficients(term: InitialTerm, nbar: f64) -> CoefficientVector {
    let denom = 2.0 * nbar + 1.0;
    let mut c = CoefficientVector::zeros();
    match term {
        InitialTerm::ExcitedExcited => {
            c[0] = C64::from(1.0);
            c[1] = C64::from((nbar + 1.0) / denom);
        }
        InitialTerm::GroundGround => {
            c[0] = C64::from(1.0);
            c[1] = C64::from(-nbar / denom);
        }
        InitialTerm::GroundExcited => c[7] = C64::from(1.0),
        InitialTerm::ExcitedGround => c[5] = C64::from(1.0),
    }
    c
}

/// Relevant/irrelevant projector pair in the `X` basis, stored as 0/1
/// diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectorPair {
    relevant: [u8; BASIS_DIM],
    irrelevant: [u8; BASIS_DIM],
}

impl ProjectorPair {
    pub fn relevant_diagonal(&self) -> [u8; BASIS_DIM] {
        self.relevant
    }

    pub fn irrelevant_diagonal(&self) -> [u8; BASIS_DIM] {
        self.irrelevant
    }

    pub fn p_matrix(&self) -> Matrix9 {
        diag_matrix(&self.relevant)
    }

    pub fn q_matrix(&self) -> Matrix9 {
        diag_matrix(&self.irrelevant)
    }

    pub fn project_relevant(&self, c: &CoefficientVector) -> CoefficientVector {
        mask(c, &self.relevant)
    }

    pub fn project_irrelevant(&self, c: &CoefficientVector) -> CoefficientVector {
        mask(c, &self.irrelevant)
    }
}

fn diag_matrix(d: &[u8; BASIS_DIM]) -> Matrix9 {
    Matrix9::from_fn(|r, c| {
        if r == c {
            C64::from(f64::from(d[r]))
        } else {
            C64::from(0.0)
        }
    })
}

fn mask(c: &CoefficientVector, d: &[u8; BASIS_DIM]) -> CoefficientVector {
    CoefficientVector::from_fn(|r, _| c[r] * f64::from(d[r]))
}

pub fn projector_pair() -> ProjectorPair {
    let mut relevant = [0u8; BASIS_DIM];
    for &idx in &RELEVANT_INDICES {
        relevant[idx] = 1;
    }
    let mut irrelevant = [0u8; BASIS_DIM];
    for (q, p) in irrelevant.iter_mut().zip(relevant) {
        *q = 1 - p;
    }
    ProjectorPair {
        relevant,
        irrelevant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Schur;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn unit(idx: usize) -> CoefficientVector {
        let mut v = CoefficientVector::zeros();
        v[idx] = c(1.0, 0.0);
        v
    }

    #[test]
    fn thermal_state_limits() {
        let t = thermal_state(0.0).unwrap();
        assert_eq!(t.diagonal(), [0.0, 1.0]);

        let t = thermal_state(0.2).unwrap();
        assert!((t.excited() - 1.0 / 7.0).abs() < 1e-15);
        assert!((t.ground() - 6.0 / 7.0).abs() < 1e-15);
        assert!((t.trace() - 1.0).abs() < 1e-15);

        let t = thermal_state(1e7).unwrap();
        assert!((t.excited() - 0.5).abs() < 1e-6);
        assert!((t.ground() - 0.5).abs() < 1e-6);

        assert!(matches!(
            thermal_state(-0.1),
            Err(Error::Domain { name: "nbar", .. })
        ));
    }

    #[test]
    fn parameter_validation() {
        assert!(ModelParams::symmetric(10.0, 2.0, 2.0, -0.5, 0.0).is_err());
        assert!(ModelParams::symmetric(10.0, 2.0, 2.0, 0.5, -1.0).is_err());
        assert!(ModelParams::symmetric(10.0, -3.0, 0.0, 0.5, 0.0).is_ok());
        assert!(ModelParams::symmetric(f64::NAN, 0.0, 1.0, 0.5, 0.0).is_err());

        let p = ModelParams::with_detunings(10.0, 9.0, [2.0, -1.0], [2.0, 3.0], 0.5, 0.2).unwrap();
        assert_eq!(p.omega(3), 8.0);
        assert_eq!(p.omega(4), 10.0);
        assert_eq!(p.detuning(Subsystem::One), 2.0);
        assert_eq!(p.detuning(Subsystem::Two), -1.0);
        assert!((p.gamma_eff() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn generator_entries_for_detuned_figure_parameters() {
        let p = ModelParams::symmetric(10.0, 2.0, 2.0, 0.5, 0.0).unwrap();
        assert_eq!(p.omega(3), 8.0);
        let l = build_generator(&p, Subsystem::One);
        assert_eq!(l.entry(2, 1), c(0.0, -2.0));
        assert_eq!(l.entry(2, 2), c(-0.5, 0.0));
        assert_eq!(l.entry(1, 2), c(0.0, -4.0));
        assert_eq!(l.entry(4, 4), c(-1.0, 0.0));
    }

    #[test]
    fn generator_with_zero_coupling_is_decay_only() {
        let p = ModelParams::symmetric(10.0, 1.5, 0.0, 0.5, 0.2).unwrap();
        let g = p.gamma_eff();
        let l = build_generator(&p, Subsystem::One);
        assert_eq!(l.entry(2, 2), c(-g, 0.0));
        assert_eq!(l.entry(3, 3), c(-g, 0.0));
        assert_eq!(l.entry(4, 4), c(-2.0 * g, 0.0));
        for (r, col) in [
            (2, 1),
            (1, 2),
            (2, 4),
            (4, 2),
            (5, 6),
            (6, 5),
            (7, 8),
            (8, 7),
        ] {
            assert_eq!(l.entry(r, col), c(0.0, 0.0), "entry ({r},{col})");
        }
    }

    /// Each column of `L` must reproduce the action of the generator on the
    /// corresponding basis operator, written out term by term.
    fn check_generator_relations(p: &ModelParams, k: Subsystem) {
        let l = build_generator(p, k);
        let i = c(0.0, 1.0);
        let a = p.alpha(k);
        let d = p.detuning(k);
        let g = p.gamma_eff();
        let w = p.system_omega(k);
        let w2 = p.partner_omega(k);

        let combo = |terms: &[(usize, C64)]| {
            let mut v = CoefficientVector::zeros();
            for &(idx, coef) in terms {
                v[idx] += coef;
            }
            v
        };
        let expected = [
            combo(&[]),
            combo(&[(2, -i * a)]),
            combo(&[
                (1, -2.0 * i * a),
                (4, 2.0 * i * a),
                (2, c(-g, 0.0)),
                (3, i * d),
            ]),
            combo(&[(2, i * d), (3, c(-g, 0.0))]),
            combo(&[(2, i * a), (4, c(-2.0 * g, 0.0))]),
            combo(&[(5, -i * w), (6, -i * a)]),
            combo(&[(5, -i * a), (6, -(c(g, 0.0) + i * w2))]),
            combo(&[(7, i * w), (8, i * a)]),
            combo(&[(7, i * a), (8, -(c(g, 0.0) - i * w2))]),
        ];
        for (col, exp) in expected.iter().enumerate() {
            let got = l.apply(&unit(col));
            assert_eq!(&got, exp, "L X_{col}");
        }
    }

    #[test]
    fn generator_reproduces_basis_relations() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let p = ModelParams::with_detunings(
                rng.random_range(-20.0..20.0),
                rng.random_range(-20.0..20.0),
                [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)],
                [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)],
                rng.random_range(0.0..30.0),
                rng.random_range(0.0..3.0),
            )
            .unwrap();
            for k in Subsystem::BOTH {
                check_generator_relations(&p, k);
            }
        }
    }

    #[test]
    fn generator_block_structure() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let p = ModelParams::symmetric(
                rng.random_range(-20.0..20.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(0.0..30.0),
                rng.random_range(0.0..3.0),
            )
            .unwrap();
            let l = build_generator(&p, Subsystem::Two);
            let block_of = |idx: usize| BLOCKS.iter().position(|b| b.contains(&idx)).unwrap();
            for r in 0..BASIS_DIM {
                assert_eq!(l.entry(r, 0), c(0.0, 0.0));
                for col in 0..BASIS_DIM {
                    if block_of(r) != block_of(col) {
                        assert_eq!(l.entry(r, col), c(0.0, 0.0));
                    }
                }
            }
            for r in 0..2 {
                for col in 0..2 {
                    assert_eq!(l.entry(7 + r, 7 + col), l.entry(5 + r, 5 + col).conj());
                }
            }
        }
    }

    #[test]
    fn generator_spectrum_is_contractive() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let p = ModelParams::with_detunings(
                rng.random_range(-20.0..20.0),
                rng.random_range(-20.0..20.0),
                [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)],
                [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)],
                rng.random_range(0.0..30.0),
                rng.random_range(0.0..3.0),
            )
            .unwrap();
            for k in Subsystem::BOTH {
                let l = build_generator(&p, k);
                let ev = Schur::new(*l.matrix()).eigenvalues().unwrap();
                for e in ev.iter() {
                    assert!(e.re <= 1e-10, "eigenvalue {e} for {p:?}");
                }
            }
        }
    }

    #[test]
    fn initial_vectors() {
        let ee = initial_coefficients(InitialTerm::ExcitedExcited, 0.0);
        assert_eq!(ee[0], c(1.0, 0.0));
        assert_eq!(ee[1], c(1.0, 0.0));
        assert!(ee.iter().skip(2).all(|z| *z == c(0.0, 0.0)));

        let gg = initial_coefficients(InitialTerm::GroundGround, 0.2);
        assert_eq!(gg[0], c(1.0, 0.0));
        assert!((gg[1] - c(-1.0 / 7.0, 0.0)).norm() < 1e-15);

        assert_eq!(
            initial_coefficients(InitialTerm::GroundExcited, 0.3),
            unit(7)
        );
        assert_eq!(
            initial_coefficients(InitialTerm::ExcitedGround, 0.3),
            unit(5)
        );
    }

    #[test]
    fn projectors() {
        let pq = projector_pair();
        assert_eq!(pq.relevant_diagonal(), [1, 1, 0, 0, 0, 1, 0, 1, 0]);
        assert_eq!(pq.irrelevant_diagonal(), [0, 0, 1, 1, 1, 0, 1, 0, 1]);

        let v = initial_coefficients(InitialTerm::ExcitedExcited, 0.0);
        assert_eq!(pq.project_relevant(&v), v);
        assert_eq!(pq.project_irrelevant(&v), CoefficientVector::zeros());

        let p = pq.relevant_diagonal();
        let q = pq.irrelevant_diagonal();
        for idx in 0..BASIS_DIM {
            assert_eq!(p[idx] + q[idx], 1);
            assert_eq!(p[idx] * p[idx], p[idx]);
            assert_eq!(q[idx] * q[idx], q[idx]);
            assert_eq!(p[idx] * q[idx], 0);
        }
        assert_eq!(pq.p_matrix() + pq.q_matrix(), Matrix9::identity());
    }
}
