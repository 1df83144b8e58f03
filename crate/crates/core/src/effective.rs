//! Effective Hamiltonians on the collective two-node bases.
//!
//! Matrices are built in the interaction picture: the free-evolution diagonal
//! proportional to the bare transition frequencies is dropped for the
//! five-state models. The controlled-swap generator keeps its bare-frequency
//! diagonal and is stored as `H = -M`, where `dc/dt = iMc` is its equation of
//! motion.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::Couplings;
use crate::C64;

/// Relative tolerance for the Hermiticity invariant.
pub const HERMITIAN_RTOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollectiveBasis {
    /// |00>, |10>, |01>, |11>, (|20> + |02>)/sqrt(2)
    Five,
    /// |00>, |10>, |01>, |11>, |20>, |02>
    Six,
}

impl CollectiveBasis {
    pub fn dim(self) -> usize {
        match self {
            CollectiveBasis::Five => 5,
            CollectiveBasis::Six => 6,
        }
    }

    pub fn labels(self) -> &'static [&'static str] {
        match self {
            CollectiveBasis::Five => &["|00>", "|10>", "|01>", "|11>", "(|20>+|02>)/sqrt2"],
            CollectiveBasis::Six => &["|00>", "|10>", "|01>", "|11>", "|20>", "|02>"],
        }
    }

    /// Indices outside the computational manifold psi1..psi4.
    pub fn leakage_indices(self) -> std::ops::Range<usize> {
        4..self.dim()
    }
}

impl fmt::Display for CollectiveBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CollectiveBasis::Five => write!(f, "five-state basis"),
            CollectiveBasis::Six => write!(f, "six-state basis"),
        }
    }
}

/// Which constant diagonal terms the stored matrix omits and how its sign
/// relates to the equation of motion `dc/dt = iMc`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseConvention {
    pub free_evolution_dropped: bool,
    pub generator_sign_flipped: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveHamiltonian {
    pub basis: CollectiveBasis,
    pub matrix: DMatrix<C64>,
    pub phase_convention: PhaseConvention,
}

/// JSON form `{basis: [...], re: [[...]], im: [[...]]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HamiltonianDump {
    pub basis: Vec<String>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl EffectiveHamiltonian {
    pub fn new(basis: CollectiveBasis, matrix: DMatrix<C64>, phase_convention: PhaseConvention) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::BasisMismatch {
                expected: basis.to_string(),
                found: format!("{}x{} matrix", matrix.nrows(), matrix.ncols()),
            });
        }
        linalg::check_hermitian(&matrix, HERMITIAN_RTOL)?;
        Ok(EffectiveHamiltonian { basis, matrix, phase_convention })
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn dump(&self) -> HamiltonianDump {
        let n = self.basis.dim();
        HamiltonianDump {
            basis: self.basis.labels().iter().map(|s| s.to_string()).collect(),
            re: (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)].im).collect()).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.dump())?)
    }
}

fn require_atoms(n_atoms: u32, min: u32) -> Result<f64> {
    if n_atoms < min {
        return Err(Error::invalid("n_atoms", format!("must be at least {min}, got {n_atoms}")));
    }
    Ok(f64::from(n_atoms))
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn interaction_picture() -> PhaseConvention {
    PhaseConvention {
        free_evolution_dropped: true,
        generator_sign_flipped: false,
        note: "constant bare-frequency diagonal removed; only dispersive rates remain".into(),
    }
}

/// Shared five-state builder: diagonal rate `diag_rate`, exchange rate `omega_sigma`.
fn five_state(n: f64, omega_sigma: f64, diag_rate: f64) -> Result<EffectiveHamiltonian> {
    let mut m = DMatrix::zeros(5, 5);
    m[(1, 1)] = real(diag_rate * n);
    m[(2, 2)] = real(diag_rate * n);
    m[(1, 2)] = real(omega_sigma * n);
    m[(2, 1)] = real(omega_sigma * n);
    let pair = 2.0 * omega_sigma * (n * (n - 1.0)).sqrt();
    m[(3, 3)] = real(2.0 * diag_rate * n);
    m[(4, 4)] = real(2.0 * diag_rate * (n - 1.0));
    m[(3, 4)] = real(pair);
    m[(4, 3)] = real(pair);
    EffectiveHamiltonian::new(CollectiveBasis::Five, m, interaction_picture())
}

/// Common-cavity model: exchange through the sigma mode only.
pub fn build_h5_common(n_atoms: u32, couplings: &Couplings) -> Result<EffectiveHamiltonian> {
    let n = require_atoms(n_atoms, 1)?;
    five_state(n, couplings.omega_sigma, couplings.omega_sigma)
}

/// Two-cavity model: the diagonal carries `omega_s = omega_sigma + omega_pi`,
/// exchange still goes through the common mode.
pub fn build_h5_cde(n_atoms: u32, couplings: &Couplings) -> Result<EffectiveHamiltonian> {
    let n = require_atoms(n_atoms, 1)?;
    five_state(n, couplings.omega_sigma, couplings.omega_s)
}

/// Diagonal of the controlled-swap equation of motion `dc/dt = iMc`.
///
/// `freq1`, `freq2` are the bare node frequencies and `photons` the Fock
/// number of the common mode.
pub fn cswap_generator_diagonal(
    n_atoms: u32,
    photons: u32,
    freq1: f64,
    freq2: f64,
    omega_1: f64,
    omega_2: f64,
) -> [f64; 6] {
    let n = f64::from(n_atoms);
    let half = n / 2.0;
    let ph = f64::from(photons);
    let dressed1 = freq1 + 2.0 * ph * omega_1;
    let dressed2 = freq2 + 2.0 * ph * omega_2;
    [
        half * (dressed1 + dressed2),
        (half - 1.0) * dressed1 + half * dressed2 - n * omega_1,
        half * dressed1 + (half - 1.0) * dressed2 - n * omega_2,
        (half - 1.0) * (dressed1 + dressed2) - n * (omega_1 + omega_2),
        (half - 2.0) * dressed1,
        (half - 2.0) * dressed2,
    ]
}

/// Controlled-swap Hamiltonian on the six-state basis.
pub fn build_h6_cswap(
    n_atoms: u32,
    photons: u32,
    freq1: f64,
    freq2: f64,
    couplings: &Couplings,
) -> Result<EffectiveHamiltonian> {
    let n = require_atoms(n_atoms, 2)?;
    let diag = cswap_generator_diagonal(n_atoms, photons, freq1, freq2, couplings.omega_1, couplings.omega_2);
    let cross = couplings.omega_s_cross;

    // Generator M of dc/dt = iMc, then H = -M.
    let mut gen = DMatrix::<C64>::zeros(6, 6);
    for (i, d) in diag.iter().enumerate() {
        gen[(i, i)] = real(*d);
    }
    gen[(1, 2)] = real(-n * cross);
    gen[(2, 1)] = real(-n * cross);
    let pair = -cross * (2.0 * n * (n - 1.0)).sqrt();
    for k in [4, 5] {
        gen[(3, k)] = real(pair);
        gen[(k, 3)] = real(pair);
    }

    EffectiveHamiltonian::new(
        CollectiveBasis::Six,
        -gen,
        PhaseConvention {
            free_evolution_dropped: false,
            generator_sign_flipped: true,
            note: "equation of motion dc/dt = iMc stored as H = -M so that exp(-iHt) = exp(iMt)".into(),
        },
    )
}
