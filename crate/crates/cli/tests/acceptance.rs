//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::Path;
use std::process::Command;

use cavity_gates::analysis::{fit_line, fit_oscillation, fit_through_origin, linspace};
use cavity_gates::dynamics::{
    analytic_cswap_pair, analytic_two_node, analytic_two_node_large_n, pair_frequency, CswapPair, EffectivePropagator,
};
use cavity_gates::effective::{build_h5_cde, build_h5_common, build_h6_cswap};
use cavity_gates::gates::{
    blockade_scan, cswap_analysis, extract_gate, iswap_time, solve_cde, target_iswap, verify_elimination, CdeSolution,
};
use cavity_gates::linalg::check_hermitian;
use cavity_gates::model::{CavityConfig, NodeConfig};
use cavity_gates::oracle::{build_full, compare_models, swap_frequency, ModeLayout};
use cavity_gates::{CollectiveBasis, CollectiveState, Couplings, QubitAmplitudes};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn iswap_exactness() -> Outcome {
    let mut worst_fid = 1.0f64;
    let mut worst_leak = 0.0f64;
    let mut per_n = Vec::new();
    for n in [2u32, 5, 100] {
        for w in [0.1, 1.0] {
            let h = build_h5_common(n, &Couplings::from_rates(w, 0.0)).unwrap();
            let r = extract_gate(&h, iswap_time(n, w).unwrap(), &target_iswap()).unwrap();
            worst_fid = worst_fid.min(r.fidelity);
            worst_leak = worst_leak.max(r.leakage);
            if w == 1.0 {
                per_n.push(format!("N={n}: F {:.6} leak {:.2e}", r.fidelity, r.leakage));
            }
        }
    }
    outcome(
        1.0 - worst_fid <= 1e-9 && worst_leak <= 1e-10,
        format!(
            "worst fidelity {worst_fid:.12}, worst leakage {worst_leak:.3e} (need >= 1-1e-9, <= 1e-10); {}",
            per_n.join(", ")
        ),
    )
}

fn closed_form_agreement() -> Outcome {
    let q = QubitAmplitudes::from_real(0.6, 0.8, 0.8, 0.6).unwrap();
    let (w, wp) = (1.0, 0.5);
    let c = Couplings::from_rates(w, wp);
    let mut exact_err = Vec::new();
    let mut large_n_err = Vec::new();
    for n in [100u32, 1000, 10_000] {
        let h = build_h5_cde(n, &c).unwrap();
        let prop = EffectivePropagator::new(&h).unwrap();
        let psi0 = CollectiveState::from_qubits(CollectiveBasis::Five, &q);
        let period = 2.0 * PI / pair_frequency(n, w, c.omega_s);
        let (mut e1, mut e2) = (0.0f64, 0.0f64);
        for t in linspace(0.0, period, 400) {
            let psi = prop.evolve(&psi0, t).unwrap();
            e1 = e1.max(psi.max_amplitude_error(&analytic_two_node(&q, n, w, c.omega_s, t)));
            e2 = e2.max(psi.max_amplitude_error(&analytic_two_node_large_n(&q, n, w, c.omega_s, t)));
        }
        exact_err.push(e1);
        large_n_err.push(e2);
    }

    let mut pair_err = 0.0f64;
    for (n, photons, omega_1, omega_s) in [(4u32, 0u32, 2.0, 0.3), (4, 1, 2.0, 0.3), (10, 2, 0.7, 0.05)] {
        let pair = CswapPair::resonant(n, photons, 3.0, omega_1, omega_s);
        let h =
            build_h6_cswap(n, photons, pair.freq1, pair.freq2, &Couplings::cswap_rates(omega_1, 0.0, omega_s)).unwrap();
        let prop = EffectivePropagator::new(&h).unwrap();
        let psi0 = CollectiveState::basis_state(CollectiveBasis::Six, 1);
        for t in linspace(0.0, 4.0 * pair.swap_time(), 200) {
            let psi = prop.evolve(&psi0, t).unwrap();
            let (c2, c3) = analytic_cswap_pair(&pair, t);
            pair_err = pair_err.max((psi.amplitude(1) - c2).norm()).max((psi.amplitude(2) - c3).norm());
        }
    }

    let pass = exact_err.iter().all(|&e| e <= 1e-3)
        && large_n_err[2] <= 1e-3
        && strictly_decreasing(&large_n_err)
        && pair_err <= 1e-10;
    outcome(
        pass,
        format!(
            "exact form err {:.1e}/{:.1e}/{:.1e}; large-N form err {:.2e}/{:.2e}/{:.2e} at N=1e2/1e3/1e4; controlled-swap pair err {pair_err:.1e}",
            exact_err[0], exact_err[1], exact_err[2], large_n_err[0], large_n_err[1], large_n_err[2]
        ),
    )
}

fn frequency_doubling() -> Outcome {
    let n = 10_000u32;
    let w = 1.0;
    let scale = w * f64::from(n);
    let h = build_h5_common(n, &Couplings::from_rates(w, 0.0)).unwrap();
    let q = QubitAmplitudes::from_real(0.6, 0.8, 0.8, 0.6).unwrap();
    let psi0 = CollectiveState::from_qubits(CollectiveBasis::Five, &q);
    let times = linspace(0.0, 8.0 * PI / scale, 4000);
    let traj = EffectivePropagator::new(&h).unwrap().trajectory(&psi0, &times).unwrap();
    let single: Vec<f64> = traj.states.iter().map(|s| s.population(2)).collect();
    let double: Vec<f64> = traj.states.iter().map(|s| s.population(4)).collect();
    let f1 = fit_oscillation(&times, &single, 0.2 * scale, 8.0 * scale).omega;
    let f2 = fit_oscillation(&times, &double, 0.2 * scale, 8.0 * scale).omega;
    let ratio = f2 / f1;
    outcome(
        (ratio / 2.0 - 1.0).abs() <= 1e-3,
        format!("single-excitation {f1:.6}, pair {f2:.6}, ratio {ratio:.6} (need 2 within 1e-3)"),
    )
}

fn elimination_adjudication() -> Outcome {
    let n = 10_000u32;
    let q = QubitAmplitudes::uniform();
    let quoted = [((0, 0, 1), 3f64.sqrt() * PI), ((1, 0, 2), 7f64.sqrt() * PI), ((0, 1, 3), 11f64.sqrt() * PI)];
    let mut solver_ok = true;
    let mut quoted_pass = Vec::new();
    let mut parts = Vec::new();
    for ((mu, nn, k), quoted_value) in quoted {
        let sol = solve_cde(mu, nn, k, n).unwrap();
        let chk = verify_elimination(&sol, &q).unwrap();
        solver_ok &= sol.feasible && chk.residual <= 1e-6 && chk.pattern_error <= 1e-6;
        let cand = CdeSolution::candidate(mu, nn, k, n, quoted_value).unwrap();
        let alt = verify_elimination(&cand, &q).unwrap();
        quoted_pass.push(alt.residual <= 1e-6 && alt.pattern_error <= 1e-6);
        parts.push(format!(
            "({mu},{nn},{k}) solver |ws|t={:.4} residual {:.1e} pattern {:.1e}; quoted {:.4} residual {:.2e}",
            sol.omega_s_t, chk.residual, chk.pattern_error, quoted_value, alt.residual
        ));
    }
    let quoted_family = if quoted_pass.iter().all(|&p| p) {
        "passes"
    } else if quoted_pass.iter().any(|&p| p) {
        "partially passes"
    } else {
        "fails"
    };
    outcome(
        solver_ok,
        format!("solver family passes: {solver_ok}; quoted family {quoted_family}; {}", parts.join("; ")),
    )
}

fn collective_blockade() -> Outcome {
    let (n, w) = (10u32, 1.0);
    let inputs = [
        QubitAmplitudes::computational(false, false),
        QubitAmplitudes::computational(true, false),
        QubitAmplitudes::computational(false, true),
        QubitAmplitudes::computational(true, true),
        QubitAmplitudes::uniform(),
    ];
    let times = linspace(0.0, FRAC_PI_4 / (w * f64::from(n)), 801);
    let reports: Vec<_> =
        [10.0, 30.0, 100.0].iter().map(|&r| blockade_scan(n, w, r, &inputs, &times).unwrap()).collect();
    let top = &reports[2];
    let psi5: Vec<f64> = reports.iter().map(|r| r.max_psi5).collect();
    let wide = blockade_scan(n, w, 100.0, &inputs, &linspace(0.0, FRAC_PI_2 / (w * f64::from(n)), 801)).unwrap();
    outcome(
        top.max_psi5 <= 0.021 && top.max_psi5 <= top.bound + 1e-12 && top.max_deviation <= 0.03 && strictly_decreasing(&psi5),
        format!(
            "ratio 100: max |psi5| {:.4} (bound {:.4}), deviation {:.4} over angle [0, pi/4]; max |psi5| {:.4}/{:.4}/{:.4} at ratios 10/30/100; deviation over [0, pi/2] {:.4}",
            top.max_psi5, top.bound, top.max_deviation, psi5[0], psi5[1], psi5[2], wide.max_deviation
        ),
    )
}

fn cswap_dichotomy() -> Outcome {
    let (n, omega_s) = (4u32, 0.25);
    let ns = f64::from(n) * omega_s;

    let pair = CswapPair::resonant(n, 0, 0.0, 0.0, omega_s);
    let h = build_h6_cswap(n, 0, pair.freq1, pair.freq2, &Couplings::cswap_rates(0.0, 0.0, omega_s)).unwrap();
    let psi = EffectivePropagator::new(&h)
        .unwrap()
        .evolve(&CollectiveState::basis_state(CollectiveBasis::Six, 1), PI / (2.0 * ns))
        .unwrap();
    let open = psi.population(2);

    let omega_1 = 50.0 * ns;
    let r = cswap_analysis(n, omega_1, omega_s, &[0, 1]).unwrap();
    let expected = 4.0 / (1.0 + 1e4);
    let blocked = r[1].max_swap_probability;
    let blocked_rel = (blocked / expected - 1.0).abs();
    let propagated_rel = (r[1].max_swap_probability_propagated / expected - 1.0).abs();

    let ratios = [10.0, 30.0, 100.0];
    let contrast: Vec<f64> =
        ratios.iter().map(|&x| cswap_analysis(n, x * ns / 2.0, omega_s, &[1]).unwrap()[0].contrast).collect();
    let lx: Vec<f64> = ratios.iter().map(|x: &f64| x.ln()).collect();
    let ly: Vec<f64> = contrast.iter().map(|c| c.ln()).collect();
    let (slope, _) = fit_line(&lx, &ly);

    outcome(
        (open - 1.0).abs() <= 1e-9 && blocked_rel <= 0.01 && propagated_rel <= 0.01 && (slope - 2.0).abs() <= 0.05,
        format!(
            "n=0 |c3|^2 at swap time {open:.12}; n=1 peak {blocked:.4e} (propagated {:.4e}) vs {expected:.4e}, rel {blocked_rel:.1e}; contrast exponent {slope:.4}",
            r[1].max_swap_probability_propagated
        ),
    )
}

fn oracle_run(delta: f64) -> cavity_gates::oracle::ComparisonReport {
    let (n, g, omega_k0) = (4u32, 0.05, 1000.0);
    let node = NodeConfig::common(n, omega_k0 + delta, g).unwrap();
    let cavity = CavityConfig::single_mode(omega_k0).unwrap();
    let full = build_full(&node, &node, &cavity, 3, ModeLayout::Single).unwrap();
    let w = g * g / delta;
    let h = build_h5_common(n, &Couplings::from_rates(w, 0.0)).unwrap();
    let psi0 = CollectiveState::from_qubits(CollectiveBasis::Five, &QubitAmplitudes::computational(true, false));
    let period = PI / (w * f64::from(n));
    compare_models(&full, &h, &psi0, &linspace(0.0, period, 401)).unwrap()
}

fn dispersive_reduction() -> Outcome {
    let runs: Vec<_> = [1.0, 2.0, 4.0].iter().map(|&d| oracle_run(d)).collect();
    let errs: Vec<f64> = runs.iter().map(|r| r.max_error).collect();
    outcome(
        errs[0] <= 0.15 && strictly_decreasing(&errs) && runs[0].max_photon_population <= 0.05,
        format!(
            "error {:.4}/{:.4}/{:.4} at delta 1/2/4; photon population {:.4} at delta 1",
            errs[0], errs[1], errs[2], runs[0].max_photon_population
        ),
    )
}

fn n_speedup() -> Outcome {
    let (g, delta, omega_k0) = (0.04, 1.0, 1000.0);
    let omega_sigma = g * g / delta;
    let times = linspace(0.0, 3000.0, 3001);
    let ns = [2u32, 3, 4, 5];
    let freqs: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let node = NodeConfig::common(n, omega_k0 + delta, g).unwrap();
            let cavity = CavityConfig::single_mode(omega_k0).unwrap();
            let m = build_full(&node, &node, &cavity, 3, ModeLayout::Single).unwrap();
            swap_frequency(&m, &times, 1e-3, 0.25).unwrap().omega
        })
        .collect();
    let x: Vec<f64> = ns.iter().map(|&n| f64::from(n)).collect();
    let (slope, r2) = fit_through_origin(&x, &freqs);
    let rel = (slope / (2.0 * omega_sigma) - 1.0).abs();
    outcome(
        r2 >= 0.99 && rel <= 0.15,
        format!("slope {slope:.6} vs {:.6} (rel {rel:.3}), R^2 {r2:.5}; frequencies {freqs:.5?}", 2.0 * omega_sigma),
    )
}

fn run_cli(args: &[&str], out: &Path) -> (Vec<u8>, i32) {
    let o = Command::new(env!("CARGO_BIN_EXE_sim")).args(args).arg("--out").arg(out).output().expect("binary runs");
    (o.stdout, o.status.code().unwrap_or(-1))
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism_and_structure() -> Outcome {
    let commands: [&[&str]; 6] = [
        &["iswap", "--n-atoms", "100", "--omega-sigma", "1.0", "--dump-hamiltonian"],
        &["cde-solve", "--grid", "mu=0,1", "n=0..2", "k=1..4", "--n-atoms", "10000"],
        &["blockade", "--n-atoms", "10", "--omega-sigma", "1.0"],
        &["cswap", "--n-atoms", "4", "--omega-1", "0.01", "--omega-s", "0.0005", "--cutoff", "3"],
        &["oracle-compare", "--n-atoms", "3", "--g", "0.05", "--delta", "1", "--cutoff", "3"],
        &[
            "sweep",
            "--sweep-kind",
            "iswap",
            "--sweep-param",
            "n_atoms",
            "--sweep-values",
            "2,5,100",
            "--omega-sigma",
            "1",
        ],
    ];
    let mut identical = true;
    let mut files = 0;
    for args in commands {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let (_, ca) = run_cli(args, a.path());
        let (_, cb) = run_cli(args, b.path());
        let (fa, fb) = (dir_contents(a.path()), dir_contents(b.path()));
        identical &= ca == 0 && cb == 0 && !fa.is_empty() && fa == fb;
        files += fa.len();
    }

    let mut worst_herm = 0.0f64;
    let mut herm_ok = true;
    for n in [1u32, 2, 10, 10_000] {
        for (w, wp) in [(1.0, 0.0), (0.3, -7.0), (-2.0, 0.5)] {
            let c = Couplings::from_rates(w, wp);
            for h in [build_h5_common(n, &c).unwrap(), build_h5_cde(n, &c).unwrap()] {
                herm_ok &= check_hermitian(&h.matrix, 1e-14).is_ok();
            }
            if n >= 2 {
                let h = build_h6_cswap(n, 1, 5.0, 5.0 + f64::from(n) * w, &Couplings::cswap_rates(w, wp, 0.1)).unwrap();
                herm_ok &= check_hermitian(&h.matrix, 1e-14).is_ok();
            }
        }
    }
    for layout in [ModeLayout::Single, ModeLayout::ThreeMode] {
        let node =
            NodeConfig::new(3, 101.0, cavity_gates::C64::new(0.05, 0.02), cavity_gates::C64::new(0.03, 0.0)).unwrap();
        let cavity = CavityConfig::new(100.0, 102.0, 0).unwrap();
        let m = build_full(&node, &node, &cavity, 3, layout).unwrap();
        let rel = m.hamiltonian.hermiticity_defect() / m.hamiltonian.max_abs();
        worst_herm = worst_herm.max(rel);
    }
    herm_ok &= worst_herm <= 1e-14;

    let mut worst_norm = 0.0f64;
    let q = QubitAmplitudes::from_real(0.6, 0.8, 0.8, 0.6).unwrap();
    for n in [2u32, 100, 10_000] {
        let h = build_h5_cde(n, &Couplings::from_rates(1.0, -30.0)).unwrap();
        let psi0 = CollectiveState::from_qubits(CollectiveBasis::Five, &q);
        let traj = EffectivePropagator::new(&h).unwrap().trajectory(&psi0, &linspace(0.0, 10.0, 200)).unwrap();
        worst_norm = worst_norm.max(traj.max_norm_defect());
    }
    for d in [1.0, 4.0] {
        worst_norm = worst_norm.max(oracle_run(d).max_norm_defect);
    }

    outcome(
        identical && herm_ok && worst_norm <= 1e-10,
        format!("{files} artifacts byte-identical across runs: {identical}; Hermitian to 1e-14: {herm_ok}; worst norm defect {worst_norm:.1e}"),
    )
}

fn main() {
    let criteria: &[(&str, fn() -> Outcome)] = &[
        ("iSWAP exactness", iswap_exactness),
        ("closed forms vs exact propagator", closed_form_agreement),
        ("frequency doubling", frequency_doubling),
        ("elimination adjudication", elimination_adjudication),
        ("collective blockade", collective_blockade),
        ("controlled-swap dichotomy", cswap_dichotomy),
        ("dispersive reduction vs microscopic model", dispersive_reduction),
        ("N-speedup", n_speedup),
        ("determinism and structure", determinism_and_structure),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}: {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
