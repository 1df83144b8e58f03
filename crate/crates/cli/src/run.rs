//! Scenario execution and artifact rendering.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use cavity_gates::analysis::linspace;
use cavity_gates::dynamics::EffectivePropagator;
use cavity_gates::effective::{build_h5_cde, build_h5_common, build_h6_cswap};
use cavity_gates::gates::{
    blockade_scan, cswap_analysis, extract_gate, iswap_time, solve_cde, target_iswap, verify_elimination, GateRecord,
};
use cavity_gates::model::{derive_couplings, CavityConfig, CouplingMode, NodeConfig};
use cavity_gates::oracle::{
    build_full_capped, compare_models, cswap_full_model, peak_transfer, ModeLayout, DEFAULT_CUTOFF,
    DEFAULT_DIMENSION_CAP,
};
use cavity_gates::{CollectiveBasis, CollectiveState, Couplings, QubitAmplitudes, C64};

use crate::scenario::{validate, Format, Kind, Params, Scenario, Violation, DEFAULT_OMEGA_K0};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid scenario:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<Violation>),
    #[error(transparent)]
    Model(#[from] cavity_gates::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            RunError::Model(cavity_gates::Error::DimensionCap { .. }) => 4,
            _ => 1,
        }
    }
}

impl From<Violation> for RunError {
    fn from(v: Violation) -> Self {
        RunError::Validation(vec![v])
    }
}

/// A named output file.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    /// Primary report first, then trajectories and dumps.
    pub artifacts: Vec<Artifact>,
    /// The elimination grid contained no feasible point.
    pub all_infeasible: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.all_infeasible {
            3
        } else {
            0
        }
    }

    /// Write every artifact under `dir`, returning the paths in order.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        self.artifacts
            .iter()
            .map(|a| {
                let path = dir.join(&a.name);
                std::fs::write(&path, &a.contents)?;
                Ok(path)
            })
            .collect()
    }
}

type Row = Map<String, Value>;

/// Result of one kind before rendering.
struct KindOutput {
    resolved: Params,
    rows: Vec<Row>,
    /// One record rather than a table.
    single: bool,
    extras: Vec<Artifact>,
    all_infeasible: bool,
}

fn to_row<T: Serialize>(v: &T) -> Row {
    match serde_json::to_value(v).expect("plain data serializes") {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    }
}

fn params_json(p: &Params) -> Value {
    serde_json::to_value(p).expect("params serialize")
}

/// Validate and run a scenario.
pub fn run(s: &Scenario) -> Result<Outcome, RunError> {
    let violations = validate(s);
    if !violations.is_empty() {
        return Err(RunError::Validation(violations));
    }
    let kind = Kind::parse(s.kind.as_deref().unwrap_or_default()).expect("validated");
    let with_extras = s.output.dir.is_some() || s.output.dump_hamiltonian;
    let out = run_kind(kind, &s.params, with_extras, s.output.dump_hamiltonian)?;
    let format = s.output.format.unwrap_or(kind.default_format());
    let mut resolved = Scenario { kind: s.kind.clone(), params: out.resolved.clone(), ..s.clone() };
    resolved.output.dir = None;
    let main = render(kind, &resolved, &out, format)?;
    let mut artifacts = vec![main];
    artifacts.extend(out.extras);
    Ok(Outcome { artifacts, all_infeasible: out.all_infeasible })
}

fn render(kind: Kind, s: &Scenario, out: &KindOutput, format: Format) -> Result<Artifact, RunError> {
    let params = params_json(&s.params);
    let contents = match format {
        Format::Json => {
            let doc = if out.single {
                let mut row = out.rows[0].clone();
                if !row.contains_key("params") {
                    let mut m = Map::new();
                    m.insert("kind".into(), json!(kind.name()));
                    m.insert("params".into(), params);
                    m.extend(row);
                    row = m;
                }
                Value::Object(row)
            } else {
                json!({ "kind": kind.name(), "params": params, "rows": out.rows })
            };
            let mut text = serde_json::to_string_pretty(&doc).map_err(cavity_gates::Error::from)?;
            text.push('\n');
            text
        }
        Format::Csv => csv_table(&params, &out.rows)?,
    };
    let ext = match format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    Ok(Artifact { name: format!("{}.{ext}", kind.name()), contents })
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// CSV with a leading `# params: {json}` line; nested values are JSON-encoded.
fn csv_table(params: &Value, rows: &[Row]) -> Result<String, RunError> {
    let mut header: Vec<String> = Vec::new();
    for r in rows {
        for k in r.keys() {
            if k != "params" && !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut out = format!("# params: {params}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&header).map_err(cavity_gates::Error::from)?;
        for r in rows {
            let rec: Vec<String> = header.iter().map(|k| r.get(k).map(cell).unwrap_or_default()).collect();
            w.write_record(&rec).map_err(cavity_gates::Error::from)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(out).expect("csv output is utf-8"))
}

fn json_artifact<T: Serialize>(name: &str, v: &T) -> Result<Artifact, RunError> {
    let mut contents = serde_json::to_string_pretty(v).map_err(cavity_gates::Error::from)?;
    contents.push('\n');
    Ok(Artifact { name: name.into(), contents })
}

fn run_kind(kind: Kind, p: &Params, extras: bool, dump: bool) -> Result<KindOutput, RunError> {
    match kind {
        Kind::Iswap => run_iswap(p, extras, dump),
        Kind::SqrtIswapCde => run_cde(p, dump),
        Kind::Blockade => run_blockade(p, extras),
        Kind::Cswap => run_cswap(p, dump),
        Kind::OracleCompare => run_oracle(p),
        Kind::Sweep => run_sweep(p),
    }
}

/// Rates from `omega_sigma`/`omega_pi`, or derived from `g`, `g_pi`, `delta`
/// with the common mode below the atoms and the local mode mirrored above.
fn resolve_rates(p: &Params) -> Result<Couplings, RunError> {
    if let Some(w) = p.omega_sigma {
        return Ok(Couplings::from_rates(w, p.omega_pi.unwrap_or(0.0)));
    }
    let (g, delta) = (p.g.expect("validated"), p.delta.expect("validated"));
    let omega_k0 = p.omega_k0.unwrap_or(DEFAULT_OMEGA_K0);
    let node = NodeConfig::new(
        p.n_atoms.expect("validated"),
        omega_k0 + delta,
        C64::new(g, 0.0),
        C64::new(p.g_pi.unwrap_or(0.0), 0.0),
    )?;
    let cavity = CavityConfig::new(omega_k0, omega_k0 + 2.0 * delta, 0)?;
    let mut c = derive_couplings(&node, &node, &cavity, CouplingMode::Symmetric)?;
    if let Some(w) = p.omega_pi {
        c.omega_pi = w;
        c.omega_s = c.omega_sigma + w;
    }
    Ok(c)
}

fn with_rates(p: &Params, c: &Couplings) -> Params {
    Params { omega_sigma: Some(c.omega_sigma), omega_pi: Some(c.omega_pi), ..p.clone() }
}

fn run_iswap(p: &Params, extras: bool, dump: bool) -> Result<KindOutput, RunError> {
    let n = p.n_atoms.expect("validated");
    let c = resolve_rates(p)?;
    let t = match p.t {
        Some(t) => t,
        None => iswap_time(n, c.omega_sigma)?,
    };
    let samples = p.samples.unwrap_or(101);
    let resolved = Params { t: Some(t), samples: Some(samples), ..with_rates(p, &c) };
    let h = build_h5_common(n, &c)?;
    let report = extract_gate(&h, t, &target_iswap())?;
    let mut record = GateRecord::new("iswap", n, params_json(&resolved), &report);
    record.notes.push(
        "target maps psi2 -> -psi3 and psi3 -> -psi2, fixing psi1 and psi4; this is SWAP followed by Z on both qubits"
            .into(),
    );
    record.notes.push("fidelity_phase_insensitive averages the column overlap magnitudes".into());
    if report.leakage > 1e-10 {
        record.notes.push(format!("doubly excited population {:.3e} remains at gate time", report.leakage));
    }
    let mut out = Vec::new();
    if extras {
        let prop = EffectivePropagator::new(&h)?;
        let psi0 = CollectiveState::from_qubits(CollectiveBasis::Five, &QubitAmplitudes::uniform());
        let traj = prop.trajectory(&psi0, &linspace(0.0, t, samples))?;
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, Some(&resolved))?;
        out.push(Artifact { name: "iswap_trajectory.csv".into(), contents: String::from_utf8(buf).expect("utf-8") });
    }
    if dump {
        out.push(json_artifact("hamiltonian.json", &h.dump())?);
    }
    Ok(KindOutput { resolved, rows: vec![to_row(&record)], single: true, extras: out, all_infeasible: false })
}

fn run_cde(p: &Params, dump: bool) -> Result<KindOutput, RunError> {
    let n_atoms = p.n_atoms.expect("validated");
    let grid = p.grid.clone().unwrap_or_default();
    let grid = crate::scenario::Grid {
        mu: Some(grid.mu.unwrap_or_else(|| vec![0, 1])),
        n: Some(grid.n.unwrap_or_else(|| vec![0, 1, 2])),
        k: Some(grid.k.unwrap_or_else(|| vec![1, 2, 3, 4])),
    };
    let mut points = Vec::new();
    for &mu in grid.mu.as_deref().unwrap_or_default() {
        for &n in grid.n.as_deref().unwrap_or_default() {
            for &k in grid.k.as_deref().unwrap_or_default() {
                points.push((mu, n, k));
            }
        }
    }
    let q = QubitAmplitudes::uniform();
    let rows = points
        .par_iter()
        .map(|&(mu, n, k)| -> Result<(Row, bool), RunError> {
            let sol = solve_cde(mu, n, k, n_atoms)?;
            let mut row = to_row(&sol);
            let check = if sol.feasible { Some(verify_elimination(&sol, &q)?) } else { None };
            row.insert("residual".into(), json!(check.map(|c| c.residual)));
            row.insert("pattern_error".into(), json!(check.map(|c| c.pattern_error)));
            row.insert("omega_sigma".into(), json!(check.map(|c| c.omega_sigma)));
            row.insert("omega_s".into(), json!(check.map(|c| c.omega_s)));
            row.insert("t".into(), json!(check.map(|c| c.t)));
            Ok((row, sol.feasible))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let all_infeasible = rows.iter().all(|(_, f)| !f);
    let mut extras = Vec::new();
    if dump {
        if let Some(sol) =
            points.iter().filter_map(|&(mu, n, k)| solve_cde(mu, n, k, n_atoms).ok()).find(|s| s.feasible)
        {
            let (w, ws, _) = sol.rates();
            let c = Couplings { omega_s: ws, ..Couplings::from_rates(w, ws - w) };
            extras.push(json_artifact("hamiltonian.json", &build_h5_cde(n_atoms, &c)?.dump())?);
        }
    }
    Ok(KindOutput {
        resolved: Params { grid: Some(grid), ..p.clone() },
        rows: rows.into_iter().map(|(r, _)| r).collect(),
        single: false,
        extras,
        all_infeasible,
    })
}

fn blockade_inputs() -> Vec<QubitAmplitudes> {
    vec![
        QubitAmplitudes::computational(false, false),
        QubitAmplitudes::computational(true, false),
        QubitAmplitudes::computational(false, true),
        QubitAmplitudes::computational(true, true),
        QubitAmplitudes::uniform(),
    ]
}

fn run_blockade(p: &Params, extras: bool) -> Result<KindOutput, RunError> {
    let n = p.n_atoms.expect("validated");
    let c = resolve_rates(p)?;
    let ratios = p.ratios.clone().unwrap_or_else(|| vec![10.0, 30.0, 100.0]);
    let theta_max = p.theta_max.unwrap_or(FRAC_PI_4);
    let samples = p.samples.unwrap_or(401);
    let t_end = theta_max / (c.omega_sigma * f64::from(n));
    let times = linspace(0.0, t_end, samples);
    let inputs = blockade_inputs();
    let reports = ratios
        .par_iter()
        .map(|&r| blockade_scan(n, c.omega_sigma, r, &inputs, &times))
        .collect::<Result<Vec<_>, _>>()?;
    let resolved = Params {
        omega_sigma: Some(c.omega_sigma),
        ratios: Some(ratios.clone()),
        theta_max: Some(theta_max),
        samples: Some(samples),
        ..p.clone()
    };
    let mut out = Vec::new();
    if extras {
        let last = reports.last().expect("at least one ratio");
        let h = build_h5_cde(n, &Couplings::from_rates(c.omega_sigma, last.omega_pi))?;
        let psi0 = CollectiveState::from_qubits(CollectiveBasis::Five, &QubitAmplitudes::uniform());
        let traj = EffectivePropagator::new(&h)?.trajectory(&psi0, &times)?;
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, Some(&resolved))?;
        out.push(Artifact { name: "blockade_trajectory.csv".into(), contents: String::from_utf8(buf).expect("utf-8") });
    }
    Ok(KindOutput {
        resolved,
        rows: reports.iter().map(to_row).collect(),
        single: false,
        extras: out,
        all_infeasible: false,
    })
}

fn run_cswap(p: &Params, dump: bool) -> Result<KindOutput, RunError> {
    let n = p.n_atoms.expect("validated");
    let (omega_1, omega_s) = (p.omega_1.expect("validated"), p.omega_s.expect("validated"));
    let photons = p.photons.clone().unwrap_or_else(|| vec![0, 1]);
    let reports = cswap_analysis(n, omega_1, omega_s, &photons)?;
    let mut rows: Vec<Row> = reports.iter().map(to_row).collect();

    // With a cutoff the microscopic model is run as well: g1 from omega_1 and
    // g2 from omega_s at detuning delta.
    if let Some(cutoff) = p.cutoff {
        let delta = p.delta.unwrap_or(omega_1.signum());
        if omega_1 * delta <= 0.0 {
            return Err(
                Violation::new("params.delta", "must share the sign of omega_1 for the microscopic check").into()
            );
        }
        let g1 = (omega_1 * delta).sqrt();
        let g2 = omega_s * delta / g1;
        let (model, c) = cswap_full_model(n, g1, g2, delta, cutoff)?;
        let t_max = PI / (f64::from(n) * c.omega_s_cross.abs());
        let peaks = photons
            .par_iter()
            .map(|&ph| peak_transfer(&model, ph, t_max, 400).map(|(_, v)| v))
            .collect::<Result<Vec<_>, _>>()?;
        for (row, peak) in rows.iter_mut().zip(peaks) {
            row.insert("full_model_peak".into(), json!(peak));
            row.insert("dispersive_parameter".into(), json!(g1 * f64::from(n).sqrt() / delta.abs()));
        }
    }
    let mut extras = Vec::new();
    if dump {
        let pair = cavity_gates::dynamics::CswapPair::resonant(n, photons[0], 0.0, omega_1, omega_s);
        let h = build_h6_cswap(n, photons[0], pair.freq1, pair.freq2, &Couplings::cswap_rates(omega_1, 0.0, omega_s))?;
        extras.push(json_artifact("hamiltonian.json", &h.dump())?);
    }
    Ok(KindOutput {
        resolved: Params { photons: Some(photons), ..p.clone() },
        rows,
        single: false,
        extras,
        all_infeasible: false,
    })
}

fn run_oracle(p: &Params) -> Result<KindOutput, RunError> {
    let n = p.n_atoms.expect("validated");
    let (g, delta) = (p.g.expect("validated"), p.delta.expect("validated"));
    let cutoff = p.cutoff.unwrap_or(DEFAULT_CUTOFF);
    let omega_k0 = p.omega_k0.unwrap_or(DEFAULT_OMEGA_K0);
    let cap = p.dimension_cap.unwrap_or(DEFAULT_DIMENSION_CAP);
    let samples = p.samples.unwrap_or(201);
    let omega_sigma = g * g / delta;
    let t = p.t.unwrap_or(PI / (omega_sigma.abs() * f64::from(n)));

    let node = NodeConfig::common(n, omega_k0 + delta, g)?;
    let cavity = CavityConfig::single_mode(omega_k0)?;
    let full = build_full_capped(&node, &node, &cavity, cutoff, ModeLayout::Single, cap)?;
    let eff = build_h5_common(n, &Couplings::from_rates(omega_sigma, 0.0))?;
    let input = p.input.clone().unwrap_or_else(|| "10".into());
    let q = crate::scenario::input_state(&input).expect("validated");
    let psi0 = CollectiveState::from_qubits(CollectiveBasis::Five, &q);
    let report = compare_models(&full, &eff, &psi0, &linspace(0.0, t, samples))?;

    let resolved = Params {
        cutoff: Some(cutoff),
        omega_k0: Some(omega_k0),
        dimension_cap: Some(cap),
        samples: Some(samples),
        t: Some(t),
        input: Some(input),
        ..p.clone()
    };
    let mut row = Map::new();
    row.insert("omega_sigma".into(), json!(omega_sigma));
    row.insert("dispersive_parameter".into(), json!(g * f64::from(n).sqrt() / delta.abs()));
    row.extend(to_row(&report));
    Ok(KindOutput { resolved, rows: vec![row], single: true, extras: Vec::new(), all_infeasible: false })
}

fn run_sweep(p: &Params) -> Result<KindOutput, RunError> {
    let spec = p.sweep.clone().expect("validated");
    let base = Kind::parse(&spec.kind).expect("validated");
    let column = format!("sweep_{}", spec.parameter);
    let results = spec
        .values
        .par_iter()
        .map(|&v| -> Result<(Vec<Row>, bool), RunError> {
            let point = p.with_value(&spec.parameter, v)?;
            let out = run_kind(base, &point, false, false)?;
            let rows = out
                .rows
                .into_iter()
                .map(|r| {
                    let mut m = Map::new();
                    m.insert(column.clone(), json!(v));
                    m.extend(r);
                    m
                })
                .collect();
            Ok((rows, out.all_infeasible))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let all_infeasible = base == Kind::SqrtIswapCde && results.iter().all(|(_, f)| *f);
    Ok(KindOutput {
        resolved: p.clone(),
        rows: results.into_iter().flat_map(|(r, _)| r).collect(),
        single: false,
        extras: Vec::new(),
        all_infeasible,
    })
}
