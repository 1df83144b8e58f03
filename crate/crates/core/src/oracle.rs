//! Exact simulation of the microscopic atom-cavity model on the symmetric
//! Dicke ladders of both nodes and a truncated Fock space for each mode.
//!
//! Basis `|m1>|m2>|n_sigma>` (single mode) or `|m1>|m2>|n_sigma>|n_pi1>|n_pi2>`
//! (three modes), `m_i` the number of excited atoms in node `i`. The
//! Hamiltonian is written in the frame rotating at node 1's frequency.

use nalgebra::DVector;
use serde::Serialize;

use crate::analysis::{fit_oscillation, maximize, OscillationFit};
use crate::dynamics::{aligned_distance, CollectiveState, EffectivePropagator};
use crate::effective::{CollectiveBasis, EffectiveHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::{Propagator, SparseHermitian};
use crate::model::{derive_couplings, CavityConfig, CouplingMode, Couplings, NodeConfig};
use crate::C64;

pub const DEFAULT_DIMENSION_CAP: usize = 10_000;
pub const DEFAULT_CUTOFF: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeLayout {
    /// One common mode coupled to both nodes.
    Single,
    /// Common mode plus one local mode per node.
    ThreeMode,
}

impl ModeLayout {
    pub fn count(self) -> usize {
        match self {
            ModeLayout::Single => 1,
            ModeLayout::ThreeMode => 3,
        }
    }
}

/// Occupation numbers of one basis state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Occupation {
    pub m1: u32,
    pub m2: u32,
    /// `[n_sigma, n_pi1, n_pi2]`; unused modes are zero.
    pub photons: [u32; 3],
}

impl Occupation {
    pub fn excitations(&self) -> u32 {
        self.m1 + self.m2 + self.photons.iter().sum::<u32>()
    }

    pub fn photon_count(&self) -> u32 {
        self.photons.iter().sum()
    }
}

pub struct FullModel {
    pub node1: NodeConfig,
    pub node2: NodeConfig,
    pub cavity: CavityConfig,
    pub photon_cutoff: u32,
    pub layout: ModeLayout,
    pub hamiltonian: SparseHermitian,
    radices: Vec<usize>,
}

impl FullModel {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Basis index of an occupation, `None` if it lies outside the truncation.
    pub fn index(&self, occ: Occupation) -> Option<usize> {
        let digits = [occ.m1, occ.m2, occ.photons[0], occ.photons[1], occ.photons[2]];
        if self.layout == ModeLayout::Single && (occ.photons[1] != 0 || occ.photons[2] != 0) {
            return None;
        }
        let mut idx = 0usize;
        for (d, &r) in digits.iter().zip(&self.radices) {
            if *d as usize >= r {
                return None;
            }
            idx = idx * r + *d as usize;
        }
        Some(idx)
    }

    pub fn occupation(&self, mut idx: usize) -> Occupation {
        let mut digits = [0u32; 5];
        for k in (0..self.radices.len()).rev() {
            digits[k] = (idx % self.radices[k]) as u32;
            idx /= self.radices[k];
        }
        Occupation { m1: digits[0], m2: digits[1], photons: [digits[2], digits[3], digits[4]] }
    }

    pub fn basis_state(&self, occ: Occupation) -> Result<DVector<C64>> {
        let i = self
            .index(occ)
            .ok_or_else(|| Error::invalid("occupation", format!("{occ:?} outside the truncated space")))?;
        let mut v = DVector::zeros(self.dim());
        v[i] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// Total population in states with at least one photon.
    pub fn photon_population(&self, psi: &DVector<C64>) -> f64 {
        psi.iter().enumerate().filter(|(i, _)| self.occupation(*i).photon_count() > 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn propagator(&self) -> Propagator {
        Propagator::from_sparse(&self.hamiltonian)
    }
}

/// `sqrt((N - m)(m + 1))`, the raising element of the symmetric ladder.
pub fn dicke_raise(n_atoms: u32, m: u32) -> f64 {
    (f64::from(n_atoms - m) * f64::from(m + 1)).sqrt()
}

/// Build the microscopic Hamiltonian with the default dimension cap.
pub fn build_full(
    node1: &NodeConfig,
    node2: &NodeConfig,
    cavity: &CavityConfig,
    cutoff: u32,
    layout: ModeLayout,
) -> Result<FullModel> {
    build_full_capped(node1, node2, cavity, cutoff, layout, DEFAULT_DIMENSION_CAP)
}

pub fn build_full_capped(
    node1: &NodeConfig,
    node2: &NodeConfig,
    cavity: &CavityConfig,
    cutoff: u32,
    layout: ModeLayout,
    cap: usize,
) -> Result<FullModel> {
    node1.validate()?;
    node2.validate()?;
    cavity.validate()?;
    if cutoff == 0 {
        return Err(Error::invalid("cutoff", "must be at least 1"));
    }
    let modes = layout.count();
    let mut radices = vec![node1.n_atoms as usize + 1, node2.n_atoms as usize + 1];
    radices.extend(std::iter::repeat_n(cutoff as usize + 1, modes));
    let dim = radices.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r)).unwrap_or(usize::MAX);
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }

    let mut model = FullModel {
        node1: *node1,
        node2: *node2,
        cavity: *cavity,
        photon_cutoff: cutoff,
        layout,
        hamiltonian: SparseHermitian::new(dim),
        radices,
    };

    let reference = node1.omega;
    let mode_freq = [cavity.omega_k0, cavity.omega_local, cavity.omega_local];
    let nodes = [node1, node2];
    let mut h = SparseHermitian::new(dim);
    for idx in 0..dim {
        let occ = model.occupation(idx);
        let atoms = [occ.m1, occ.m2];
        let mut energy = 0.0;
        for (node, &m) in nodes.iter().zip(&atoms) {
            energy += (node.omega - reference) * f64::from(m);
        }
        for (k, &f) in mode_freq.iter().enumerate().take(modes) {
            energy += (f - reference) * f64::from(occ.photons[k]);
        }
        h.add_diagonal(idx, energy);

        // g S+ a: raise node i, remove one photon from a mode it couples to.
        for (i, node) in nodes.iter().enumerate() {
            let m = atoms[i];
            if m >= node.n_atoms {
                continue;
            }
            let mut couplings = vec![(0usize, node.g_sigma)];
            if layout == ModeLayout::ThreeMode {
                couplings.push((1 + i, node.g_pi));
            }
            for (mode, g) in couplings {
                let nph = occ.photons[mode];
                if nph == 0 || g.norm() == 0.0 {
                    continue;
                }
                let mut up = occ;
                if i == 0 {
                    up.m1 += 1;
                } else {
                    up.m2 += 1;
                }
                up.photons[mode] -= 1;
                let j = model.index(up).expect("raised state inside truncation");
                let amp = g * dicke_raise(node.n_atoms, m) * f64::from(nph).sqrt();
                h.add_pair(j, idx, amp);
            }
        }
    }
    model.hamiltonian = h;
    Ok(model)
}

/// `exp(-iHt) psi0` for the full model.
pub fn evolve_full(model: &FullModel, psi0: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
    if psi0.len() != model.dim() {
        return Err(Error::BasisMismatch {
            expected: format!("{}-dimensional full model", model.dim()),
            found: format!("{} amplitudes", psi0.len()),
        });
    }
    Ok(model.propagator().evolve(psi0, t))
}

/// Collective state read off a full-model state, with the population that
/// did not map onto the collective basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub state: CollectiveState,
    pub leakage_out: f64,
}

/// Full-model basis states carrying psi_k, with their weights, for the given
/// photon occupations.
fn collective_components(
    model: &FullModel,
    basis: CollectiveBasis,
    photons: [u32; 3],
) -> Vec<Vec<(Option<usize>, f64)>> {
    let at = |m1, m2| model.index(Occupation { m1, m2, photons });
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut comps = vec![vec![(at(0, 0), 1.0)], vec![(at(1, 0), 1.0)], vec![(at(0, 1), 1.0)], vec![(at(1, 1), 1.0)]];
    match basis {
        CollectiveBasis::Five => comps.push(vec![(at(2, 0), h), (at(0, 2), h)]),
        CollectiveBasis::Six => {
            comps.push(vec![(at(2, 0), 1.0)]);
            comps.push(vec![(at(0, 2), 1.0)]);
        }
    }
    comps
}

/// Project onto the collective basis in the vacuum sector.
pub fn project_effective(model: &FullModel, psi: &DVector<C64>, basis: CollectiveBasis) -> Result<Projection> {
    project_effective_sector(model, psi, basis, [0, 0, 0])
}

/// Project onto the collective basis with the modes in the given Fock state.
pub fn project_effective_sector(
    model: &FullModel,
    psi: &DVector<C64>,
    basis: CollectiveBasis,
    photons: [u32; 3],
) -> Result<Projection> {
    if psi.len() != model.dim() {
        return Err(Error::BasisMismatch {
            expected: format!("{}-dimensional full model", model.dim()),
            found: format!("{} amplitudes", psi.len()),
        });
    }
    let amps: Vec<C64> = collective_components(model, basis, photons)
        .into_iter()
        .map(|terms| terms.into_iter().filter_map(|(i, w)| i.map(|i| psi[i] * w)).sum())
        .collect();
    let captured: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    Ok(Projection {
        leakage_out: (psi.norm_squared() - captured).max(0.0),
        state: CollectiveState { basis, amplitudes: DVector::from_vec(amps) },
    })
}

/// Inverse of the projection: a collective state placed in the full space.
pub fn embed(model: &FullModel, state: &CollectiveState, photons: [u32; 3]) -> Result<DVector<C64>> {
    let mut v = DVector::zeros(model.dim());
    for (k, terms) in collective_components(model, state.basis, photons).into_iter().enumerate() {
        let a = state.amplitude(k);
        for (i, w) in terms {
            match i {
                Some(i) => v[i] += a * w,
                None if a.norm() > 0.0 => {
                    return Err(Error::invalid(
                        "state",
                        format!("component {} does not fit in the truncated space", k + 1),
                    ))
                }
                None => {}
            }
        }
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// Max over the grid of the phase-aligned 2-norm distance.
    pub max_error: f64,
    /// Max over the grid of the population with real photons.
    pub max_photon_population: f64,
    /// Max over the grid of population outside the collective basis.
    pub max_leakage_out: f64,
    /// Max over the grid of the norm defect of the full evolution.
    pub max_norm_defect: f64,
    pub dim: usize,
    pub points: usize,
}

/// Run both models from the same collective input and compare trajectories.
pub fn compare_models(
    full: &FullModel,
    effective: &EffectiveHamiltonian,
    psi0: &CollectiveState,
    t_grid: &[f64],
) -> Result<ComparisonReport> {
    let eff = EffectivePropagator::new(effective)?;
    let prop = full.propagator();
    let start = embed(full, psi0, [0, 0, 0])?;
    let mut report = ComparisonReport {
        max_error: 0.0,
        max_photon_population: 0.0,
        max_leakage_out: 0.0,
        max_norm_defect: 0.0,
        dim: full.dim(),
        points: t_grid.len(),
    };
    for &t in t_grid {
        let psi = prop.evolve(&start, t);
        let proj = project_effective(full, &psi, psi0.basis)?;
        let reduced = eff.evolve(psi0, t)?;
        let err = aligned_distance(&proj.state.amplitudes, &reduced.amplitudes);
        report.max_error = report.max_error.max(err);
        report.max_photon_population = report.max_photon_population.max(full.photon_population(&psi));
        report.max_leakage_out = report.max_leakage_out.max(proj.leakage_out);
        report.max_norm_defect = report.max_norm_defect.max((psi.norm() - 1.0).abs());
    }
    Ok(report)
}

/// Frequency of the population exchange `|1,0> -> |0,1>` in the vacuum,
/// fitted inside `[omega_lo, omega_hi]`.
pub fn swap_frequency(model: &FullModel, times: &[f64], omega_lo: f64, omega_hi: f64) -> Result<OscillationFit> {
    let vac = [0, 0, 0];
    let start = model.basis_state(Occupation { m1: 1, m2: 0, photons: vac })?;
    let target = model.index(Occupation { m1: 0, m2: 1, photons: vac }).expect("single excitation fits");
    let prop = model.propagator();
    let pops: Vec<f64> = times.iter().map(|&t| prop.evolve(&start, t)[target].norm_sqr()).collect();
    Ok(fit_oscillation(times, &pops, omega_lo, omega_hi))
}

/// Controlled-swap arrangement in one common mode: node 1 couples with
/// `g1`, node 2 with `g2`, both near detuning `delta`, and node 2 sits on the
/// vacuum resonance `freq2 = freq1 + N (omega_1 - omega_2)`.
pub fn cswap_full_model(n_atoms: u32, g1: f64, g2: f64, delta: f64, cutoff: u32) -> Result<(FullModel, Couplings)> {
    if delta == 0.0 {
        return Err(Error::Resonant);
    }
    let omega_k0 = 1000.0 * delta.abs();
    let freq1 = omega_k0 + delta;
    let n = f64::from(n_atoms);
    let freq2 = freq1 + n * (g1 * g1 - g2 * g2) / delta;
    let node1 = NodeConfig::common(n_atoms, freq1, g1)?;
    let node2 = NodeConfig::common(n_atoms, freq2, g2)?;
    let cavity = CavityConfig::single_mode(omega_k0)?;
    let couplings = derive_couplings(&node1, &node2, &cavity, CouplingMode::ControlledSwap)?;
    let model = build_full(&node1, &node2, &cavity, cutoff, ModeLayout::Single)?;
    Ok((model, couplings))
}

/// Peak transfer probability `|1,0,n> -> |0,1,n>` over `[0, t_max]` with
/// `photons` quanta in the common mode.
pub fn peak_transfer(model: &FullModel, photons: u32, t_max: f64, samples: usize) -> Result<(f64, f64)> {
    let ph = [photons, 0, 0];
    let start = model.basis_state(Occupation { m1: 1, m2: 0, photons: ph })?;
    let target = model
        .index(Occupation { m1: 0, m2: 1, photons: ph })
        .ok_or_else(|| Error::invalid("cutoff", "photon number above the cutoff"))?;
    let prop = model.propagator();
    Ok(maximize(|t| prop.evolve(&start, t)[target].norm_sqr(), 0.0, t_max, samples))
}
