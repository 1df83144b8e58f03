//! Cross-checks against references that share no code with the library:
//! an atom-by-atom tensor-product model and a Taylor-series propagator.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use cavity_gates::dynamics::EffectivePropagator;
use cavity_gates::effective::{build_h5_cde, build_h5_common, build_h6_cswap};
use cavity_gates::model::{CavityConfig, NodeConfig};
use cavity_gates::oracle::{build_full, evolve_full, ModeLayout, Occupation};
use cavity_gates::{CollectiveBasis, CollectiveState, Couplings, QubitAmplitudes, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `exp(-iHt) psi` by Taylor steps short enough that 30 terms reach roundoff.
fn taylor_evolve(h: &DMatrix<C64>, psi: &DVector<C64>, t: f64) -> DVector<C64> {
    let entries: Vec<(usize, usize, C64)> = (0..h.nrows())
        .flat_map(|i| (0..h.ncols()).map(move |j| (i, j)))
        .filter(|&(i, j)| h[(i, j)].norm() > 0.0)
        .map(|(i, j)| (i, j, h[(i, j)]))
        .collect();
    let row_sum = (0..h.nrows()).map(|i| h.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(1e-300, f64::max);
    let steps = ((row_sum * t.abs()) / 0.2).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mut out = psi.clone();
    for _ in 0..steps {
        let mut term = out.clone();
        let mut acc = out.clone();
        for k in 1..30 {
            let factor = C64::new(0.0, -dt / k as f64);
            let mut next = DVector::<C64>::zeros(term.len());
            for &(i, j, v) in &entries {
                next[i] += v * term[j] * factor;
            }
            term = next;
            acc += &term;
        }
        out = acc;
    }
    out
}

/// Factor dimensions and the operator acting on one factor.
fn embed_op(dims: &[usize], k: usize, op: &DMatrix<C64>) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::identity(1, 1);
    for (i, &d) in dims.iter().enumerate() {
        let f = if i == k { op.clone() } else { DMatrix::identity(d, d) };
        m = m.kronecker(&f);
    }
    m
}

fn lowering(d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |i, j| if j == i + 1 { c((j as f64).sqrt()) } else { c(0.0) })
}

/// Two atoms per node, explicit factors: [a0, a1, b0, b1, modes...].
struct TensorModel {
    dims: Vec<usize>,
    h: DMatrix<C64>,
}

impl TensorModel {
    fn new(node1: &NodeConfig, node2: &NodeConfig, cavity: &CavityConfig, cutoff: usize, three_mode: bool) -> Self {
        let modes = if three_mode { 3 } else { 1 };
        let mut dims = vec![2, 2, 2, 2];
        dims.extend(std::iter::repeat_n(cutoff + 1, modes));
        let dim: usize = dims.iter().product();
        let sm = lowering(2);
        let a = lowering(cutoff + 1);
        let reference = node1.omega;
        let freqs = [cavity.omega_k0, cavity.omega_local, cavity.omega_local];

        let mut h = DMatrix::<C64>::zeros(dim, dim);
        for (atom, node) in [(0, node1), (1, node1), (2, node2), (3, node2)] {
            let s = embed_op(&dims, atom, &sm);
            let sp = s.adjoint();
            h += (&sp * &s) * c(node.omega - reference);
            let local = if atom < 2 { 1 } else { 2 };
            let mut links = vec![(0, node.g_sigma)];
            if three_mode {
                links.push((local, node.g_pi));
            }
            for (mode, g) in links {
                let am = embed_op(&dims, 4 + mode, &a);
                let term = (&sp * &am) * g;
                h += &term + term.adjoint();
            }
        }
        for (mode, &f) in freqs.iter().enumerate().take(modes) {
            let am = embed_op(&dims, 4 + mode, &a);
            h += (am.adjoint() * &am) * c(f - reference);
        }
        TensorModel { dims, h }
    }

    fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (&d, &r)| acc * r + d)
    }

    /// Symmetric two-atom state with `m` excitations, as (atom digits, weight).
    fn symmetric(m: u32) -> Vec<([usize; 2], f64)> {
        match m {
            0 => vec![([0, 0], 1.0)],
            1 => vec![([1, 0], std::f64::consts::FRAC_1_SQRT_2), ([0, 1], std::f64::consts::FRAC_1_SQRT_2)],
            _ => vec![([1, 1], 1.0)],
        }
    }

    /// Image of a collective-basis state of the ladder model.
    fn lift(&self, model: &cavity_gates::oracle::FullModel, psi: &DVector<C64>) -> DVector<C64> {
        let modes = self.dims.len() - 4;
        let mut out = DVector::<C64>::zeros(self.h.nrows());
        for (idx, amp) in psi.iter().enumerate() {
            let occ = model.occupation(idx);
            for (a, wa) in Self::symmetric(occ.m1) {
                for (b, wb) in Self::symmetric(occ.m2) {
                    let mut digits = vec![a[0], a[1], b[0], b[1]];
                    digits.extend(occ.photons.iter().take(modes).map(|&n| n as usize));
                    out[self.index(&digits)] += amp * (wa * wb);
                }
            }
        }
        out
    }
}

fn max_diff(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn check_against_tensor(three_mode: bool, cutoff: u32) -> f64 {
    let node1 = NodeConfig::new(2, 1001.0, C64::new(0.05, 0.01), C64::new(0.03, -0.02)).unwrap();
    let node2 = NodeConfig::new(2, 1001.3, C64::new(0.04, 0.0), C64::new(0.02, 0.0)).unwrap();
    let cavity = CavityConfig::new(1000.0, 1001.8, 0).unwrap();
    let layout = if three_mode { ModeLayout::ThreeMode } else { ModeLayout::Single };
    let full = build_full(&node1, &node2, &cavity, cutoff, layout).unwrap();
    let tensor = TensorModel::new(&node1, &node2, &cavity, cutoff as usize, three_mode);

    let mut psi0 = DVector::<C64>::zeros(full.dim());
    let photons = if three_mode { [1, 0, 1] } else { [1, 0, 0] };
    psi0[full.index(Occupation { m1: 1, m2: 0, photons }).unwrap()] = c(0.6);
    psi0[full.index(Occupation { m1: 0, m2: 1, photons: [0; 3] }).unwrap()] = C64::new(0.0, 0.8);
    let lifted0 = tensor.lift(&full, &psi0);

    let mut worst = 0.0f64;
    for t in [0.0, 3.0, 17.5, 60.0] {
        let ladder = tensor.lift(&full, &evolve_full(&full, &psi0, t).unwrap());
        let direct = taylor_evolve(&tensor.h, &lifted0, t);
        worst = worst.max(max_diff(&ladder, &direct));
    }
    worst
}

#[test]
fn ladder_model_matches_tensor_product_single_mode() {
    let err = check_against_tensor(false, 3);
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn ladder_model_matches_tensor_product_three_modes() {
    let err = check_against_tensor(true, 2);
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn ladder_spectrum_is_inside_tensor_spectrum() {
    let node = NodeConfig::common(2, 1001.0, 0.07).unwrap();
    let cavity = CavityConfig::single_mode(1000.0).unwrap();
    let full = build_full(&node, &node, &cavity, 2, ModeLayout::Single).unwrap();
    let tensor = TensorModel::new(&node, &node, &cavity, 2, false);
    let big = tensor.h.symmetric_eigenvalues();
    let small = full.hamiltonian.to_dense().symmetric_eigenvalues();
    for e in small.iter() {
        let nearest = big.iter().map(|b| (b - e).abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-10, "eigenvalue {e} missing, nearest gap {nearest:e}");
    }
}

fn couplings_strategy() -> impl Strategy<Value = (u32, f64, f64)> {
    (1u32..2000, -3.0f64..3.0, -50.0f64..50.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigen_propagator_matches_taylor((n, w, wp) in couplings_strategy(), t in 0.0f64..2.0, cde in any::<bool>()) {
        let cpl = Couplings::from_rates(w, wp);
        let h = if cde { build_h5_cde(n, &cpl) } else { build_h5_common(n, &cpl) }.unwrap();
        let q = QubitAmplitudes::from_real(0.6, 0.8, 0.8, 0.6).unwrap();
        let psi0 = CollectiveState::from_qubits(CollectiveBasis::Five, &q);
        let scale = (f64::from(n) * (w.abs() + wp.abs())).max(1.0);
        let t = t / scale;
        let got = EffectivePropagator::new(&h).unwrap().evolve(&psi0, t).unwrap();
        let want = taylor_evolve(&h.matrix, &psi0.amplitudes, t);
        prop_assert!(max_diff(&got.amplitudes, &want) < 1e-10);
    }

    #[test]
    fn cswap_propagator_matches_taylor(n in 2u32..200, photons in 0u32..4, w1 in -2.0f64..2.0, ws in -0.5f64..0.5, t in 0.0f64..2.0) {
        let nf = f64::from(n);
        let h = build_h6_cswap(n, photons, 0.0, nf * w1, &Couplings::cswap_rates(w1, 0.0, ws)).unwrap();
        let psi0 = CollectiveState::basis_state(CollectiveBasis::Six, 1);
        let scale = (nf * (w1.abs() + ws.abs()) * f64::from(photons + 1)).max(1.0);
        let t = t / scale;
        let got = EffectivePropagator::new(&h).unwrap().evolve(&psi0, t).unwrap();
        let want = taylor_evolve(&h.matrix, &psi0.amplitudes, t);
        prop_assert!(max_diff(&got.amplitudes, &want) < 1e-10);
    }

    #[test]
    fn forward_then_backward_is_identity((n, w, wp) in couplings_strategy(), t in 0.0f64..50.0) {
        let h = build_h5_cde(n, &Couplings::from_rates(w, wp)).unwrap();
        let prop = EffectivePropagator::new(&h).unwrap();
        let psi0 = CollectiveState::from_qubits(CollectiveBasis::Five, &QubitAmplitudes::uniform());
        let back = prop.evolve(&prop.evolve(&psi0, t).unwrap(), -t).unwrap();
        prop_assert!(max_diff(&back.amplitudes, &psi0.amplitudes) < 1e-9);
    }

    #[test]
    fn full_model_conserves_excitations(n in 1u32..5, g in 0.01f64..0.2, delta in 0.2f64..3.0, t in 0.0f64..200.0) {
        let node = NodeConfig::common(n, 1000.0 + delta, g).unwrap();
        let cavity = CavityConfig::single_mode(1000.0).unwrap();
        let full = build_full(&node, &node, &cavity, 3, ModeLayout::Single).unwrap();
        let mut psi0 = DVector::<C64>::zeros(full.dim());
        psi0[full.index(Occupation { m1: 1, m2: 1, photons: [0; 3] }).unwrap()] = c(1.0);
        let psi = evolve_full(&full, &psi0, t).unwrap();
        let outside: f64 = psi
            .iter()
            .enumerate()
            .filter(|(i, _)| full.occupation(*i).excitations() != 2)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        prop_assert!(outside < 1e-20);
        prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
    }
}
