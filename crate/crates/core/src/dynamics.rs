//! Time evolution on the collective bases: the exact propagator plus the
//! closed-form solutions it cross-validates.

use std::io::Write;

use nalgebra::DVector;
use serde::Serialize;

use crate::effective::{CollectiveBasis, EffectiveHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::Propagator;
use crate::model::QubitAmplitudes;
use crate::C64;

/// Tolerance on the norm of propagated states.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CollectiveState {
    pub basis: CollectiveBasis,
    pub amplitudes: DVector<C64>,
}

impl CollectiveState {
    pub fn new(basis: CollectiveBasis, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::BasisMismatch {
                expected: basis.to_string(),
                found: format!("{} amplitudes", amplitudes.len()),
            });
        }
        Ok(CollectiveState { basis, amplitudes })
    }

    pub fn basis_state(basis: CollectiveBasis, index: usize) -> Self {
        let mut amps = DVector::zeros(basis.dim());
        amps[index] = C64::new(1.0, 0.0);
        CollectiveState { basis, amplitudes: amps }
    }

    /// Product input state of the two qubits.
    pub fn from_qubits(basis: CollectiveBasis, q: &QubitAmplitudes) -> Self {
        let mut amps = DVector::zeros(basis.dim());
        for (i, a) in q.product_amplitudes().into_iter().enumerate() {
            amps[i] = a;
        }
        CollectiveState { basis, amplitudes: amps }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn amplitude(&self, i: usize) -> C64 {
        self.amplitudes[i]
    }

    pub fn population(&self, i: usize) -> f64 {
        self.amplitudes[i].norm_sqr()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Population outside psi1..psi4.
    pub fn leakage(&self) -> f64 {
        self.basis.leakage_indices().map(|i| self.population(i)).sum()
    }

    /// Largest componentwise difference; phase sensitive.
    pub fn max_amplitude_error(&self, other: &CollectiveState) -> f64 {
        self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `min_phi || a - e^{i phi} b ||`.
pub fn aligned_distance(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    let overlap = a.dotc(b).norm();
    (a.norm_squared() + b.norm_squared() - 2.0 * overlap).max(0.0).sqrt()
}

/// Propagator bound to an effective Hamiltonian; reuse it for many times.
pub struct EffectivePropagator {
    basis: CollectiveBasis,
    inner: Propagator,
}

impl EffectivePropagator {
    pub fn new(h: &EffectiveHamiltonian) -> Result<Self> {
        crate::linalg::check_hermitian(&h.matrix, crate::effective::HERMITIAN_RTOL)?;
        Ok(EffectivePropagator { basis: h.basis, inner: Propagator::from_dense(&h.matrix) })
    }

    pub fn evolve(&self, psi0: &CollectiveState, t: f64) -> Result<CollectiveState> {
        if psi0.basis != self.basis {
            return Err(Error::BasisMismatch { expected: self.basis.to_string(), found: psi0.basis.to_string() });
        }
        Ok(CollectiveState { basis: self.basis, amplitudes: self.inner.evolve(&psi0.amplitudes, t) })
    }

    pub fn trajectory(&self, psi0: &CollectiveState, times: &[f64]) -> Result<Trajectory> {
        let states = times.iter().map(|&t| self.evolve(psi0, t)).collect::<Result<Vec<_>>>()?;
        Trajectory::new(times.to_vec(), states)
    }
}

/// `exp(-iHt) psi0` by eigendecomposition of `H`.
pub fn propagate_exact(h: &EffectiveHamiltonian, psi0: &CollectiveState, t: f64) -> Result<CollectiveState> {
    EffectivePropagator::new(h)?.evolve(psi0, t)
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CollectiveState>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<CollectiveState>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::invalid("times", "one state per time point required"));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("times", "must be ascending"));
        }
        Ok(Trajectory { times, states })
    }

    pub fn max_norm_defect(&self) -> f64 {
        self.states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// CSV with columns `t, re_c1, im_c1, ..., pop_1, ...`. When `params` is
    /// given it is written first as a `# params: {json}` comment line.
    pub fn write_csv<W: Write, P: Serialize>(&self, mut out: W, params: Option<&P>) -> Result<()> {
        if let Some(p) = params {
            writeln!(out, "# params: {}", serde_json::to_string(p)?)?;
        }
        let k = self.states.first().map(|s| s.basis.dim()).unwrap_or(0);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        for i in 1..=k {
            header.push(format!("re_c{i}"));
            header.push(format!("im_c{i}"));
        }
        header.extend((1..=k).map(|i| format!("pop_{i}")));
        w.write_record(&header)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![t.to_string()];
            for a in s.amplitudes.iter() {
                row.push(a.re.to_string());
                row.push(a.im.to_string());
            }
            row.extend(s.amplitudes.iter().map(|a| a.norm_sqr().to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `S = sqrt(4 omega_sigma^2 N(N-1) + omega_s^2)`.
pub fn pair_frequency(n_atoms: u32, omega_sigma: f64, omega_s: f64) -> f64 {
    let n = f64::from(n_atoms);
    (4.0 * omega_sigma * omega_sigma * n * (n - 1.0) + omega_s * omega_s).sqrt()
}

/// `sin(x t) / x`, continuous at `x = 0`.
fn sin_over(x: f64, t: f64) -> f64 {
    if x == 0.0 {
        t
    } else {
        (x * t).sin() / x
    }
}

fn phase(angle: f64) -> C64 {
    C64::from_polar(1.0, angle)
}

const I: C64 = C64::new(0.0, 1.0);

/// Single-excitation part shared by every two-node closed form.
fn single_excitation(q: &QubitAmplitudes, n: f64, omega_sigma: f64, omega_s: f64, t: f64) -> (C64, C64) {
    let (c, s) = ((omega_sigma * n * t).cos(), (omega_sigma * n * t).sin());
    let ph = phase(-omega_s * n * t);
    let b1a2 = q.beta1 * q.alpha2;
    let a1b2 = q.alpha1 * q.beta2;
    (ph * (b1a2 * c - I * a1b2 * s), ph * (a1b2 * c - I * b1a2 * s))
}

fn five(amps: [C64; 5]) -> CollectiveState {
    CollectiveState { basis: CollectiveBasis::Five, amplitudes: DVector::from_row_slice(&amps) }
}

/// Closed-form evolution under the two-cavity five-state Hamiltonian.
///
/// The double-excitation pair oscillates at `S` about the mean diagonal
/// `omega_s (2N - 1)`; with `omega_s = omega_sigma` this is the
/// common-cavity case.
pub fn analytic_two_node(q: &QubitAmplitudes, n_atoms: u32, omega_sigma: f64, omega_s: f64, t: f64) -> CollectiveState {
    let n = f64::from(n_atoms);
    let (c2, c3) = single_excitation(q, n, omega_sigma, omega_s, t);
    let s = pair_frequency(n_atoms, omega_sigma, omega_s);
    let b1b2 = q.beta1 * q.beta2;
    let ph = phase(-omega_s * (2.0 * n - 1.0) * t);
    let sinc = sin_over(s, t);
    let c4 = ph * b1b2 * ((s * t).cos() - I * omega_s * sinc);
    let c5 = ph * b1b2 * (-I * 2.0 * omega_sigma * (n * (n - 1.0)).sqrt() * sinc);
    five([q.alpha1 * q.alpha2, c2, c3, c4, c5])
}

/// Large-N form: the pair oscillates at `2 omega_sigma N` with phase
/// `exp(-2i omega_s N t)`. Errors against the exact evolution are O(1/N)
/// for fixed `omega_s / omega_sigma`.
pub fn analytic_two_node_large_n(
    q: &QubitAmplitudes,
    n_atoms: u32,
    omega_sigma: f64,
    omega_s: f64,
    t: f64,
) -> CollectiveState {
    let n = f64::from(n_atoms);
    let (c2, c3) = single_excitation(q, n, omega_sigma, omega_s, t);
    let b1b2 = q.beta1 * q.beta2;
    let ph = phase(-2.0 * omega_s * n * t);
    let x = 2.0 * omega_sigma * n * t;
    five([q.alpha1 * q.alpha2, c2, c3, ph * b1b2 * x.cos(), ph * b1b2 * (-I * x.sin())])
}

/// Ideal collective-blockade limit: the doubly excited symmetric state is
/// never populated.
pub fn analytic_blockade(q: &QubitAmplitudes, n_atoms: u32, omega_sigma: f64, omega_s: f64, t: f64) -> CollectiveState {
    let n = f64::from(n_atoms);
    let (c2, c3) = single_excitation(q, n, omega_sigma, omega_s, t);
    let c4 = phase(-2.0 * omega_s * n * t) * q.beta1 * q.beta2;
    five([q.alpha1 * q.alpha2, c2, c3, c4, C64::new(0.0, 0.0)])
}

/// Parameters of the controlled-swap single-excitation pair in the regime
/// where node 2 carries no light shift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CswapPair {
    pub n_atoms: u32,
    /// Fock number of the control mode.
    pub photons: u32,
    /// Bare node frequencies.
    pub freq1: f64,
    pub freq2: f64,
    /// Light-shift rate of node 1.
    pub omega_1: f64,
    /// Inter-node cross rate.
    pub omega_s: f64,
}

impl CswapPair {
    /// Node 2 placed so that `freq1 - freq2 + N omega_1 = 0`.
    pub fn resonant(n_atoms: u32, photons: u32, freq1: f64, omega_1: f64, omega_s: f64) -> Self {
        let freq2 = freq1 + f64::from(n_atoms) * omega_1;
        CswapPair { n_atoms, photons, freq1, freq2, omega_1, omega_s }
    }

    fn n(&self) -> f64 {
        f64::from(self.n_atoms)
    }

    fn dressed1(&self) -> f64 {
        self.freq1 + 2.0 * f64::from(self.photons) * self.omega_1
    }

    /// Diagonal rate of c2 in `dc/dt = iMc`.
    pub fn e2(&self) -> f64 {
        let n = self.n();
        (n / 2.0 - 1.0) * self.dressed1() + n / 2.0 * self.freq2 - n * self.omega_1
    }

    /// Diagonal rate of c3 in `dc/dt = iMc`.
    pub fn e3(&self) -> f64 {
        let n = self.n();
        n / 2.0 * self.dressed1() + (n / 2.0 - 1.0) * self.freq2
    }

    /// Half the splitting `r1 - r2`.
    pub fn half_splitting(&self) -> f64 {
        let n = self.n();
        let det = self.freq1 - self.freq2 + n * self.omega_1 + 2.0 * f64::from(self.photons) * self.omega_1;
        (0.25 * det * det + n * n * self.omega_s * self.omega_s).sqrt()
    }

    /// Characteristic roots `(r1, r2)`, `r1 > r2`.
    pub fn roots(&self) -> (f64, f64) {
        let mean = 0.5 * (self.e2() + self.e3());
        let r = self.half_splitting();
        (mean + r, mean - r)
    }

    /// `C1 = -C2` fixed by `c2(0) = 1`, `c3(0) = 0`.
    pub fn c1(&self) -> f64 {
        let (r1, r2) = self.roots();
        if r1 == r2 {
            return 0.0;
        }
        -self.n() * self.omega_s / (r1 - r2)
    }

    /// Peak swap probability `max_t |c3|^2 = 4 C1^2`.
    pub fn max_swap_probability(&self) -> f64 {
        4.0 * self.c1() * self.c1()
    }

    /// First time at which `|c3|^2` peaks.
    pub fn swap_time(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 / self.half_splitting()
    }
}

/// `(c2(t), c3(t))` from `c3 = C1 e^{i r1 t} + C2 e^{i r2 t}` with
/// `c2(0) = 1`, `c3(0) = 0`.
pub fn analytic_cswap_pair(p: &CswapPair, t: f64) -> (C64, C64) {
    let ns = p.n() * p.omega_s;
    if ns == 0.0 {
        return (phase(p.e2() * t), C64::new(0.0, 0.0));
    }
    let (r1, r2) = p.roots();
    let c1 = p.c1();
    let (e1, e2) = (phase(r1 * t), phase(r2 * t));
    let c3 = c1 * (e1 - e2);
    // c2 from dc3/dt = i E3 c3 - i N Omega_s c2
    let e3 = p.e3();
    let c2 = c1 * ((e3 - r1) * e1 - (e3 - r2) * e2) / ns;
    (c2, c3)
}
