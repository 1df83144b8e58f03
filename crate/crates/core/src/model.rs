//! Physical configuration of the ensemble nodes and the cavity, and the
//! effective exchange rates obtained after eliminating virtual photons.
//!
//! Units: hbar = 1, every frequency is angular. Spatial phase factors of the
//! atom-field couplings are taken as uniform, so only |g|^2 (and |g1||g2| for
//! the cross rate) enter the effective rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Relative tolerance used when checking that two carrier frequencies coincide.
const FREQ_MATCH_RTOL: f64 = 1e-12;

/// Normalization tolerance for qubit amplitudes.
pub const NORM_TOL: f64 = 1e-12;

/// One ensemble of `n_atoms` identical two-level atoms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeConfig {
    pub n_atoms: u32,
    /// Working-transition frequency of the node.
    pub omega: f64,
    /// Coupling to the common (sigma) cavity mode.
    pub g_sigma: C64,
    /// Coupling to the node's local (pi) mode; zero when there is none.
    pub g_pi: C64,
}

impl NodeConfig {
    pub fn new(n_atoms: u32, omega: f64, g_sigma: C64, g_pi: C64) -> Result<Self> {
        let node = NodeConfig { n_atoms, omega, g_sigma, g_pi };
        node.validate()?;
        Ok(node)
    }

    /// Node coupled only to the common mode with a real coupling constant.
    pub fn common(n_atoms: u32, omega: f64, g: f64) -> Result<Self> {
        Self::new(n_atoms, omega, C64::new(g, 0.0), C64::new(0.0, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::invalid("n_atoms", "must be at least 1"));
        }
        if !self.omega.is_finite() {
            return Err(Error::invalid("omega", "must be finite"));
        }
        if !(self.g_sigma.re.is_finite() && self.g_sigma.im.is_finite()) {
            return Err(Error::invalid("g_sigma", "must be finite"));
        }
        if !(self.g_pi.re.is_finite() && self.g_pi.im.is_finite()) {
            return Err(Error::invalid("g_pi", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    /// Frequency of the common mode.
    pub omega_k0: f64,
    /// Frequency of the local pi-modes.
    pub omega_local: f64,
    /// Definite Fock number of the common mode.
    pub photon_number: u32,
}

impl CavityConfig {
    pub fn new(omega_k0: f64, omega_local: f64, photon_number: u32) -> Result<Self> {
        let c = CavityConfig { omega_k0, omega_local, photon_number };
        c.validate()?;
        Ok(c)
    }

    /// Common-mode-only cavity: the local modes sit on the common frequency.
    pub fn single_mode(omega_k0: f64) -> Result<Self> {
        Self::new(omega_k0, omega_k0, 0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_k0.is_finite() && self.omega_k0 > 0.0) {
            return Err(Error::invalid("omega_k0", "must be positive and finite"));
        }
        if !(self.omega_local.is_finite() && self.omega_local > 0.0) {
            return Err(Error::invalid("omega_local", "must be positive and finite"));
        }
        Ok(())
    }
}

/// Which physical arrangement the couplings are derived for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// Two identical nodes with equalized carriers (iSWAP, CDE, blockade).
    Symmetric,
    /// Nodes may sit at different frequencies (controlled swap).
    ControlledSwap,
}

/// Effective exchange and light-shift rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    /// Detuning of node 1 from the common mode.
    pub delta: f64,
    /// Detuning of node 1 from its local mode.
    pub delta_prime: f64,
    pub omega_sigma: f64,
    pub omega_pi: f64,
    /// Always `omega_sigma + omega_pi`.
    pub omega_s: f64,
    pub omega_1: f64,
    pub omega_2: f64,
    /// Inter-node cross rate used by the controlled-swap model.
    pub omega_s_cross: f64,
}

impl Couplings {
    /// Rates for the symmetric two-node models given directly.
    pub fn from_rates(omega_sigma: f64, omega_pi: f64) -> Self {
        Couplings {
            delta: f64::NAN,
            delta_prime: f64::NAN,
            omega_sigma,
            omega_pi,
            omega_s: omega_sigma + omega_pi,
            omega_1: omega_sigma,
            omega_2: omega_sigma,
            omega_s_cross: omega_sigma,
        }
    }

    /// Rates for the controlled-swap model given directly.
    pub fn cswap_rates(omega_1: f64, omega_2: f64, omega_s_cross: f64) -> Self {
        Couplings {
            delta: f64::NAN,
            delta_prime: f64::NAN,
            omega_sigma: omega_1,
            omega_pi: 0.0,
            omega_s: omega_1,
            omega_1,
            omega_2,
            omega_s_cross,
        }
    }
}

fn same_frequency(a: f64, b: f64) -> bool {
    (a - b).abs() <= FREQ_MATCH_RTOL * a.abs().max(b.abs())
}

/// Derive every effective rate from the microscopic constants.
///
/// The pi-mode rate is `|g_pi|^2 / delta_prime`; under the usual arrangement
/// `delta_prime = -delta` this is `-|g_pi|^2 / delta`.
pub fn derive_couplings(
    node1: &NodeConfig,
    node2: &NodeConfig,
    cavity: &CavityConfig,
    mode: CouplingMode,
) -> Result<Couplings> {
    node1.validate()?;
    node2.validate()?;
    cavity.validate()?;

    if mode == CouplingMode::Symmetric && !same_frequency(node1.omega, node2.omega) {
        return Err(Error::FrequencyMismatch(node1.omega, node2.omega));
    }

    let delta = node1.omega - cavity.omega_k0;
    let delta2 = node2.omega - cavity.omega_k0;
    if delta == 0.0 || delta2 == 0.0 {
        return Err(Error::Resonant);
    }
    let delta_prime = node1.omega - cavity.omega_local;

    let omega_sigma = node1.g_sigma.norm_sqr() / delta;
    let omega_pi = if node1.g_pi.norm_sqr() == 0.0 {
        0.0
    } else if delta_prime == 0.0 {
        return Err(Error::Resonant);
    } else {
        node1.g_pi.norm_sqr() / delta_prime
    };

    let g1 = node1.g_sigma.norm();
    let g2 = node2.g_sigma.norm();
    let omega_s_cross = match mode {
        CouplingMode::Symmetric => g1 * g2 / delta,
        CouplingMode::ControlledSwap => 0.5 * g1 * g2 * (1.0 / delta + 1.0 / delta2),
    };

    Ok(Couplings {
        delta,
        delta_prime,
        omega_sigma,
        omega_pi,
        omega_s: omega_sigma + omega_pi,
        omega_1: g1 * g1 / delta,
        omega_2: g2 * g2 / delta2,
        omega_s_cross,
    })
}

/// `|g| sqrt(N) / |delta|`; values well below one mean photon exchange is virtual.
pub fn dispersive_quality(node: &NodeConfig, cavity: &CavityConfig) -> Result<f64> {
    let delta = node.omega - cavity.omega_k0;
    if delta == 0.0 {
        return Err(Error::Resonant);
    }
    Ok(node.g_sigma.norm() * f64::from(node.n_atoms).sqrt() / delta.abs())
}

/// Input amplitudes of the two ensemble qubits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitAmplitudes {
    pub alpha1: C64,
    pub beta1: C64,
    pub alpha2: C64,
    pub beta2: C64,
}

impl QubitAmplitudes {
    pub fn new(alpha1: C64, beta1: C64, alpha2: C64, beta2: C64) -> Result<Self> {
        for n in [alpha1.norm_sqr() + beta1.norm_sqr(), alpha2.norm_sqr() + beta2.norm_sqr()] {
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized(n));
            }
        }
        Ok(QubitAmplitudes { alpha1, beta1, alpha2, beta2 })
    }

    pub fn from_real(alpha1: f64, beta1: f64, alpha2: f64, beta2: f64) -> Result<Self> {
        let c = |x| C64::new(x, 0.0);
        Self::new(c(alpha1), c(beta1), c(alpha2), c(beta2))
    }

    /// Both qubits in (|0> + |1>)/sqrt(2).
    pub fn uniform() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        QubitAmplitudes { alpha1: h, beta1: h, alpha2: h, beta2: h }
    }

    /// Computational-basis input; `excited1`/`excited2` select |1> for each node.
    pub fn computational(excited1: bool, excited2: bool) -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let pick = |e: bool| if e { (zero, one) } else { (one, zero) };
        let (alpha1, beta1) = pick(excited1);
        let (alpha2, beta2) = pick(excited2);
        QubitAmplitudes { alpha1, beta1, alpha2, beta2 }
    }

    /// Amplitudes on psi1..psi4 = |00>, |10>, |01>, |11>.
    pub fn product_amplitudes(&self) -> [C64; 4] {
        [self.alpha1 * self.alpha2, self.beta1 * self.alpha2, self.alpha1 * self.beta2, self.beta1 * self.beta2]
    }
}
