//! Gate-level analysis: unitaries on the computational manifold, target
//! gates, the elimination conditions for sqrt-iSWAP, the collective
//! blockade and the photon-number blockade of the controlled swap.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::Matrix4;
use serde::Serialize;

use crate::analysis::maximize;
use crate::dynamics::{
    analytic_blockade, analytic_cswap_pair, pair_frequency, CollectiveState, CswapPair, EffectivePropagator,
};
use crate::effective::{build_h5_cde, build_h6_cswap, CollectiveBasis, EffectiveHamiltonian};
use crate::error::{Error, Result};
use crate::model::{Couplings, QubitAmplitudes};
use crate::C64;

pub type Unitary4 = Matrix4<C64>;

const I: C64 = C64::new(0.0, 1.0);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn sign(k: u32) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateReport {
    /// `unitary[(i, j)] = <psi_i| U(t) |psi_j>` on psi1..psi4.
    pub unitary: Unitary4,
    /// Worst population outside the computational manifold over the four
    /// computational-basis inputs.
    pub leakage: f64,
    /// `|tr(V^dagger U)| / 4`.
    pub fidelity: f64,
    /// Mean over columns of `|<v_j|u_j>|`; blind to per-column phases.
    pub fidelity_phase_insensitive: f64,
    pub gate_time: f64,
}

/// Phase-sensitive overlap `|tr(V^dagger U)| / 4`.
pub fn fidelity(target: &Unitary4, u: &Unitary4) -> f64 {
    (target.ad_mul(u).trace().norm() / 4.0).min(1.0)
}

/// Column-wise overlap `(1/4) sum_j |<v_j|u_j>|`.
pub fn fidelity_phase_insensitive(target: &Unitary4, u: &Unitary4) -> f64 {
    let s: f64 = (0..4).map(|j| target.column(j).dotc(&u.column(j)).norm()).sum();
    (s / 4.0).min(1.0)
}

/// `max |U^dagger U - 1|`.
pub fn unitarity_defect(u: &Unitary4) -> f64 {
    (u.ad_mul(u) - Unitary4::identity()).iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// Propagate each computational-basis state to `t` and read off the gate.
pub fn extract_gate(h: &EffectiveHamiltonian, t: f64, target: &Unitary4) -> Result<GateReport> {
    let prop = EffectivePropagator::new(h)?;
    let mut u = Unitary4::zeros();
    let mut leakage = 0.0f64;
    for j in 0..4 {
        let out = prop.evolve(&CollectiveState::basis_state(h.basis, j), t)?;
        for i in 0..4 {
            u[(i, j)] = out.amplitude(i);
        }
        leakage = leakage.max(out.leakage());
    }
    Ok(GateReport {
        fidelity: fidelity(target, &u),
        fidelity_phase_insensitive: fidelity_phase_insensitive(target, &u),
        unitary: u,
        leakage: leakage.min(1.0),
        gate_time: t,
    })
}

/// `pi / (2 omega_sigma N)`.
pub fn iswap_time(n_atoms: u32, omega_sigma: f64) -> Result<f64> {
    if !(omega_sigma.is_finite() && omega_sigma > 0.0) {
        return Err(Error::invalid("omega_sigma", "must be positive"));
    }
    if n_atoms == 0 {
        return Err(Error::invalid("n_atoms", "must be at least 1"));
    }
    Ok(FRAC_PI_2 / (omega_sigma * f64::from(n_atoms)))
}

/// The exchange gate at the swap time: psi2 -> -psi3, psi3 -> -psi2,
/// psi1 and psi4 fixed. In the usual naming this is `(Z x Z) SWAP`.
pub fn target_iswap() -> Unitary4 {
    let mut u = Unitary4::zeros();
    u[(0, 0)] = c(1.0);
    u[(2, 1)] = c(-1.0);
    u[(1, 2)] = c(-1.0);
    u[(3, 3)] = c(1.0);
    u
}

fn check_mu(mu: u32) -> Result<()> {
    if mu > 1 {
        return Err(Error::invalid("mu", format!("must be 0 or 1, got {mu}")));
    }
    Ok(())
}

/// Entangling gate reached when the doubly excited state is eliminated,
/// with the dynamical phases `exp(-i single_phase)` on the one-excitation
/// block and `exp(-i double_phase)` on psi4. For the two-cavity model these
/// are `omega_s N t` and `omega_s (2N - 1) t`.
pub fn target_sqrt_iswap_phased(mu: u32, n: u32, k: u32, single_phase: f64, double_phase: f64) -> Result<Unitary4> {
    check_mu(mu)?;
    let a = C64::from_polar(sign(n) * FRAC_1_SQRT_2, -single_phase);
    let d = c(sign(mu));
    let mut u = Unitary4::zeros();
    u[(0, 0)] = c(1.0);
    u[(1, 1)] = a * d;
    u[(2, 1)] = a * -I;
    u[(1, 2)] = a * -I;
    u[(2, 2)] = a * d;
    u[(3, 3)] = C64::from_polar(sign(k), -double_phase);
    Ok(u)
}

/// `target_sqrt_iswap_phased` with the dynamical phases removed.
pub fn target_sqrt_iswap(mu: u32, n: u32, k: u32) -> Result<Unitary4> {
    target_sqrt_iswap_phased(mu, n, k, 0.0, 0.0)
}

/// `U` applied to a product input, on psi1..psi4.
pub fn apply_to_product(u: &Unitary4, q: &QubitAmplitudes) -> [C64; 4] {
    let v = nalgebra::Vector4::from(q.product_amplitudes());
    let out = u * v;
    [out[0], out[1], out[2], out[3]]
}

/// Parameters eliminating the doubly excited state at gate time.
///
/// `theta = omega_sigma N t` and `st = S t` are fixed by `(mu, n, k)`; the
/// light-shift angle `|omega_s| t` then follows from
/// `S^2 = 4 omega_sigma^2 N(N-1) + omega_s^2` at the given `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CdeSolution {
    pub mu: u32,
    pub n: u32,
    pub k: u32,
    pub n_atoms: u32,
    pub theta: f64,
    pub st: f64,
    /// `|omega_s| t`; zero when infeasible.
    pub omega_s_t: f64,
    /// `|omega_s| / (omega_sigma N)`; zero when infeasible.
    pub ratio: f64,
    pub feasible: bool,
    /// `|omega_s| t` for `N -> infinity`, if real.
    pub omega_s_t_limit: Option<f64>,
    pub ratio_limit: Option<f64>,
}

impl CdeSolution {
    /// Same `(mu, n, k)` conditions but with a prescribed `|omega_s| t`,
    /// for checking candidate values that did not come from the solver.
    pub fn candidate(mu: u32, n: u32, k: u32, n_atoms: u32, omega_s_t: f64) -> Result<Self> {
        let mut s = solve_cde(mu, n, k, n_atoms)?;
        s.omega_s_t = omega_s_t.abs();
        s.ratio = s.omega_s_t / s.theta;
        s.feasible = true;
        Ok(s)
    }

    /// Concrete rates realizing this solution with `omega_sigma = 1`.
    /// `omega_s` is taken negative, the sign produced by a dominant
    /// local-mode light shift.
    pub fn rates(&self) -> (f64, f64, f64) {
        let n = f64::from(self.n_atoms);
        let omega_sigma = 1.0;
        let t = self.theta / (omega_sigma * n);
        (omega_sigma, -self.omega_s_t / t, t)
    }
}

pub fn solve_cde(mu: u32, n: u32, k: u32, n_atoms: u32) -> Result<CdeSolution> {
    check_mu(mu)?;
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if n_atoms < 2 {
        return Err(Error::invalid("n_atoms", "must be at least 2"));
    }
    let nn = f64::from(n_atoms);
    let theta = PI * (0.25 + 0.5 * f64::from(mu) + f64::from(n));
    let st = PI * f64::from(k);
    let disc = st * st - 4.0 * theta * theta * (nn - 1.0) / nn;
    let feasible = disc >= 0.0;
    let omega_s_t = if feasible { disc.sqrt() } else { 0.0 };
    let disc_limit = st * st - 4.0 * theta * theta;
    let omega_s_t_limit = (disc_limit >= 0.0).then(|| disc_limit.sqrt());
    Ok(CdeSolution {
        mu,
        n,
        k,
        n_atoms,
        theta,
        st,
        omega_s_t,
        ratio: omega_s_t / theta,
        feasible,
        omega_s_t_limit,
        ratio_limit: omega_s_t_limit.map(|x| x / theta),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EliminationCheck {
    /// `|<psi5|Psi(t)>|`.
    pub residual: f64,
    /// Largest deviation of psi1..psi4 from the target gate applied to the input.
    pub pattern_error: f64,
    pub omega_sigma: f64,
    pub omega_s: f64,
    pub t: f64,
}

/// Propagate the two-cavity model at the solution's rates and measure how
/// well the doubly excited state is eliminated.
pub fn verify_elimination(sol: &CdeSolution, q: &QubitAmplitudes) -> Result<EliminationCheck> {
    if !sol.feasible {
        return Err(Error::Infeasible { mu: sol.mu, n: sol.n, k: sol.k });
    }
    let (omega_sigma, omega_s, t) = sol.rates();
    let couplings = Couplings { omega_s, ..Couplings::from_rates(omega_sigma, omega_s - omega_sigma) };
    let h = build_h5_cde(sol.n_atoms, &couplings)?;
    let psi = EffectivePropagator::new(&h)?.evolve(&CollectiveState::from_qubits(CollectiveBasis::Five, q), t)?;
    let n = f64::from(sol.n_atoms);
    let target = target_sqrt_iswap_phased(sol.mu, sol.n, sol.k, omega_s * n * t, omega_s * (2.0 * n - 1.0) * t)?;
    let expected = apply_to_product(&target, q);
    let pattern_error = (0..4).map(|i| (psi.amplitude(i) - expected[i]).norm()).fold(0.0, f64::max);
    Ok(EliminationCheck { residual: psi.amplitude(4).norm(), pattern_error, omega_sigma, omega_s, t })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockadeReport {
    pub n_atoms: u32,
    /// `|omega_pi| / (N omega_sigma)`.
    pub ratio: f64,
    pub omega_sigma: f64,
    pub omega_pi: f64,
    /// `max_t |<psi5|Psi(t)>|` over the sampled window.
    pub max_psi5: f64,
    /// `2 omega_sigma sqrt(N(N-1)) / S`.
    pub bound: f64,
    /// Largest deviation of psi1..psi4 from the ideal blockade evolution.
    pub max_deviation: f64,
}

/// Evolve each input under the two-cavity model with
/// `omega_pi = -ratio N omega_sigma` and compare with the ideal blockade.
pub fn blockade_scan(
    n_atoms: u32,
    omega_sigma: f64,
    ratio: f64,
    inputs: &[QubitAmplitudes],
    times: &[f64],
) -> Result<BlockadeReport> {
    let n = f64::from(n_atoms);
    let omega_pi = -ratio * n * omega_sigma;
    let couplings = Couplings::from_rates(omega_sigma, omega_pi);
    let h = build_h5_cde(n_atoms, &couplings)?;
    let prop = EffectivePropagator::new(&h)?;
    let (mut max_psi5, mut max_deviation) = (0.0f64, 0.0f64);
    for q in inputs {
        let psi0 = CollectiveState::from_qubits(CollectiveBasis::Five, q);
        for &t in times {
            let psi = prop.evolve(&psi0, t)?;
            let ideal = analytic_blockade(q, n_atoms, omega_sigma, couplings.omega_s, t);
            max_psi5 = max_psi5.max(psi.amplitude(4).norm());
            for i in 0..4 {
                max_deviation = max_deviation.max((psi.amplitude(i) - ideal.amplitude(i)).norm());
            }
        }
    }
    let s = pair_frequency(n_atoms, omega_sigma, couplings.omega_s);
    Ok(BlockadeReport {
        n_atoms,
        ratio,
        omega_sigma,
        omega_pi,
        max_psi5,
        bound: 2.0 * omega_sigma * (n * (n - 1.0)).sqrt() / s,
        max_deviation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CswapReport {
    pub photons: u32,
    pub n_atoms: u32,
    pub omega_1: f64,
    pub omega_s: f64,
    /// Coefficient of `c3 = C1 (e^{i r1 t} - e^{i r2 t})`.
    pub c1: f64,
    /// `max_t |c3|^2 = 4 C1^2`.
    pub max_swap_probability: f64,
    /// `4 N^2 omega_s^2 / (N^2 omega_s^2 + 4 n^2 omega_1^2)`, the form valid
    /// once `2 n omega_1 >> N omega_s`.
    pub max_swap_probability_far_detuned: f64,
    /// Peak of `|c3|^2` found by propagating the six-state model.
    pub max_swap_probability_propagated: f64,
    /// First peak time of `|c3|^2`.
    pub swap_time: f64,
    /// Swap probability with no photon divided by this one.
    pub contrast: f64,
}

/// Photon-number blockade at resonance `freq1 - freq2 + N omega_1 = 0`,
/// node 2 carrying no light shift. Bare frequencies only add phases, so
/// `freq1 = 0` is used.
pub fn cswap_analysis(n_atoms: u32, omega_1: f64, omega_s: f64, photons: &[u32]) -> Result<Vec<CswapReport>> {
    if omega_s == 0.0 {
        return Err(Error::Degenerate("omega_s = 0: the nodes do not exchange".into()));
    }
    if n_atoms < 2 {
        return Err(Error::invalid("n_atoms", "must be at least 2"));
    }
    let n = f64::from(n_atoms);
    let couplings = Couplings::cswap_rates(omega_1, 0.0, omega_s);
    let p0 = CswapPair::resonant(n_atoms, 0, 0.0, omega_1, omega_s).max_swap_probability();
    photons
        .iter()
        .map(|&photons| {
            let pair = CswapPair::resonant(n_atoms, photons, 0.0, omega_1, omega_s);
            let h = build_h6_cswap(n_atoms, photons, pair.freq1, pair.freq2, &couplings)?;
            let prop = EffectivePropagator::new(&h)?;
            let psi0 = CollectiveState::basis_state(CollectiveBasis::Six, 1);
            let period = 2.0 * pair.swap_time();
            let mut err = None;
            let (_, propagated) = maximize(
                |t| match prop.evolve(&psi0, t) {
                    Ok(s) => s.population(2),
                    Err(e) => {
                        err = Some(e);
                        0.0
                    }
                },
                0.0,
                period,
                64,
            );
            if let Some(e) = err {
                return Err(e);
            }
            let ns2 = (n * omega_s).powi(2);
            let shift2 = (2.0 * f64::from(photons) * omega_1).powi(2);
            let prob = pair.max_swap_probability();
            Ok(CswapReport {
                photons,
                n_atoms,
                omega_1,
                omega_s,
                c1: pair.c1(),
                max_swap_probability: prob,
                max_swap_probability_far_detuned: 4.0 * ns2 / (ns2 + shift2),
                max_swap_probability_propagated: propagated,
                swap_time: pair.swap_time(),
                contrast: p0 / prob,
            })
        })
        .collect()
}

/// `|c3(t)|^2` from the closed form, for plotting.
pub fn cswap_swap_probability(pair: &CswapPair, t: f64) -> f64 {
    analytic_cswap_pair(pair, t).1.norm_sqr()
}

/// Serializable gate summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateRecord {
    pub gate: String,
    #[serde(rename = "N")]
    pub n_atoms: u32,
    pub params: serde_json::Value,
    pub fidelity: f64,
    pub fidelity_phase_insensitive: f64,
    pub leakage: f64,
    pub gate_time: f64,
    pub notes: Vec<String>,
    pub unitary_re: Vec<Vec<f64>>,
    pub unitary_im: Vec<Vec<f64>>,
}

impl GateRecord {
    pub fn new(gate: &str, n_atoms: u32, params: serde_json::Value, report: &GateReport) -> Self {
        let u = &report.unitary;
        GateRecord {
            gate: gate.to_string(),
            n_atoms,
            params,
            fidelity: report.fidelity,
            fidelity_phase_insensitive: report.fidelity_phase_insensitive,
            leakage: report.leakage,
            gate_time: report.gate_time,
            notes: Vec::new(),
            unitary_re: (0..4).map(|i| (0..4).map(|j| u[(i, j)].re).collect()).collect(),
            unitary_im: (0..4).map(|i| (0..4).map(|j| u[(i, j)].im).collect()).collect(),
        }
    }
}
