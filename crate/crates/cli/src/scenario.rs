//! Scenario documents and their validation.

use std::fmt;
use std::path::PathBuf;

use cavity_gates::QubitAmplitudes;
use serde::{Deserialize, Serialize};

pub const DEFAULT_OMEGA_K0: f64 = 1000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Iswap,
    SqrtIswapCde,
    Blockade,
    Cswap,
    OracleCompare,
    Sweep,
}

impl Kind {
    pub const ALL: [Kind; 6] =
        [Kind::Iswap, Kind::SqrtIswapCde, Kind::Blockade, Kind::Cswap, Kind::OracleCompare, Kind::Sweep];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Iswap => "iswap",
            Kind::SqrtIswapCde => "sqrt_iswap_cde",
            Kind::Blockade => "blockade",
            Kind::Cswap => "cswap",
            Kind::OracleCompare => "oracle_compare",
            Kind::Sweep => "sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Default table format for the kind.
    pub fn default_format(self) -> Format {
        match self {
            Kind::Iswap | Kind::OracleCompare => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Grid over the elimination integers; each axis is a list of values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: String,
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Every parameter any kind understands; unset fields take per-kind defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_atoms: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_k0: Option<f64>,
    /// Gate or end time; defaults to the natural time of the kind.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    /// Largest `omega_sigma N t` sampled by the blockade scan.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photons: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension_cap: Option<usize>,
    /// Qubit input: `uniform`, or a computational label `00`, `10`, `01`, `11`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub dump_hamiltonian: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputSpec,
    /// Reserved; every computation is deterministic.
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, Violation> {
        serde_json::from_str(text).map_err(|e| Violation::new("config", e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Violation { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Parameters a sweep may vary.
pub const SWEEPABLE: [&str; 11] =
    ["n_atoms", "omega_sigma", "omega_pi", "g", "g_pi", "delta", "t", "theta_max", "omega_1", "omega_s", "cutoff"];

/// Qubit amplitudes named by an input label.
pub fn input_state(label: &str) -> Option<QubitAmplitudes> {
    match label {
        "uniform" => Some(QubitAmplitudes::uniform()),
        "00" => Some(QubitAmplitudes::computational(false, false)),
        "10" => Some(QubitAmplitudes::computational(true, false)),
        "01" => Some(QubitAmplitudes::computational(false, true)),
        "11" => Some(QubitAmplitudes::computational(true, true)),
        _ => None,
    }
}

impl Params {
    /// Copy with one sweepable parameter replaced.
    pub fn with_value(&self, name: &str, v: f64) -> Result<Params, Violation> {
        let mut p = self.clone();
        let as_u32 = |v: f64| -> Result<u32, Violation> {
            if v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
                Ok(v as u32)
            } else {
                Err(Violation::new("params.sweep.values", format!("{v} is not a valid {name}")))
            }
        };
        match name {
            "n_atoms" => p.n_atoms = Some(as_u32(v)?),
            "omega_sigma" => p.omega_sigma = Some(v),
            "omega_pi" => p.omega_pi = Some(v),
            "g" => p.g = Some(v),
            "g_pi" => p.g_pi = Some(v),
            "delta" => p.delta = Some(v),
            "t" => p.t = Some(v),
            "theta_max" => p.theta_max = Some(v),
            "omega_1" => p.omega_1 = Some(v),
            "omega_s" => p.omega_s = Some(v),
            "cutoff" => p.cutoff = Some(as_u32(v)?),
            _ => {
                return Err(Violation::new(
                    "params.sweep.parameter",
                    format!("`{name}` cannot be swept; expected one of {}", SWEEPABLE.join(", ")),
                ))
            }
        }
        p.sweep = None;
        Ok(p)
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, field: &str, msg: impl Into<String>) {
        self.out.push(Violation::new(format!("params.{field}"), msg));
    }

    fn required<T>(&mut self, field: &str, v: &Option<T>) -> bool {
        if v.is_none() {
            self.push(field, "required");
            false
        } else {
            true
        }
    }

    fn atoms(&mut self, p: &Params, min: u32) {
        if let Some(n) = p.n_atoms {
            if n < min {
                self.push("n_atoms", format!("must be at least {min}"));
            }
        } else {
            self.push("n_atoms", "required");
        }
    }

    fn finite(&mut self, field: &str, v: Option<f64>) {
        if let Some(x) = v {
            if !x.is_finite() {
                self.push(field, "must be finite");
            }
        }
    }

    fn delta(&mut self, p: &Params) {
        if p.delta == Some(0.0) {
            self.push("delta", "dispersive reduction invalid");
        }
        self.finite("delta", p.delta);
    }

    /// Either `omega_sigma` directly or the microscopic pair `g`, `delta`.
    fn rates(&mut self, p: &Params) {
        match (p.omega_sigma, p.g, p.delta) {
            (Some(w), _, _) => {
                if !positive(w) {
                    self.push("omega_sigma", "must be positive");
                }
            }
            (None, Some(_), Some(_)) => self.delta(p),
            (None, None, _) => self.push("omega_sigma", "required (or give g and delta)"),
            (None, Some(_), None) => self.push("delta", "required with g"),
        }
        self.finite("omega_pi", p.omega_pi);
        self.finite("g", p.g);
        self.finite("g_pi", p.g_pi);
    }

    fn time(&mut self, p: &Params) {
        if let Some(t) = p.t {
            if !(t.is_finite() && t >= 0.0) {
                self.push("t", "must be a non-negative time");
            }
        }
    }

    fn samples(&mut self, p: &Params, min: usize) {
        if let Some(s) = p.samples {
            if s < min {
                self.push("samples", format!("must be at least {min}"));
            }
        }
    }
}

/// Every problem that would stop `kind` from running.
pub fn validate(s: &Scenario) -> Vec<Violation> {
    let Some(name) = s.kind.as_deref() else {
        return vec![Violation::new("kind", "required")];
    };
    let Some(kind) = Kind::parse(name) else {
        let known: Vec<&str> = Kind::ALL.iter().map(|k| k.name()).collect();
        return vec![Violation::new("kind", format!("unknown kind `{name}`; expected one of {}", known.join(", ")))];
    };
    validate_kind(kind, &s.params)
}

pub fn validate_kind(kind: Kind, p: &Params) -> Vec<Violation> {
    let mut c = Checker { out: Vec::new() };
    match kind {
        Kind::Iswap => {
            c.atoms(p, 1);
            c.rates(p);
            c.time(p);
            c.samples(p, 2);
        }
        Kind::SqrtIswapCde => {
            c.atoms(p, 2);
            if let Some(g) = &p.grid {
                if g.mu.iter().flatten().any(|&m| m > 1) {
                    c.push("grid.mu", "values must be 0 or 1");
                }
                if g.k.iter().flatten().any(|&k| k == 0) {
                    c.push("grid.k", "values must be at least 1");
                }
                for (axis, v) in [("mu", &g.mu), ("n", &g.n), ("k", &g.k)] {
                    if v.as_ref().is_some_and(|v| v.is_empty()) {
                        c.push(&format!("grid.{axis}"), "must not be empty");
                    }
                }
            }
        }
        Kind::Blockade => {
            c.atoms(p, 2);
            c.rates(p);
            c.samples(p, 2);
            if let Some(r) = &p.ratios {
                if r.is_empty() {
                    c.push("ratios", "must not be empty");
                }
                if !r.iter().copied().all(positive) {
                    c.push("ratios", "values must be positive");
                }
            }
            if let Some(th) = p.theta_max {
                if !positive(th) {
                    c.push("theta_max", "must be positive");
                }
            }
        }
        Kind::Cswap => {
            c.atoms(p, 2);
            if c.required("omega_1", &p.omega_1) {
                c.finite("omega_1", p.omega_1);
            }
            if c.required("omega_s", &p.omega_s) && p.omega_s == Some(0.0) {
                c.push("omega_s", "must be nonzero: the nodes would not exchange");
            }
            c.finite("omega_s", p.omega_s);
            if p.cutoff.is_some_and(|k| k < 2) {
                c.push("cutoff", "≥2 required for two-excitation states");
            }
            if p.photons.as_ref().is_some_and(|v| v.is_empty()) {
                c.push("photons", "must not be empty");
            }
        }
        Kind::OracleCompare => {
            c.atoms(p, 1);
            c.required("g", &p.g);
            c.finite("g", p.g);
            if c.required("delta", &p.delta) {
                c.delta(p);
            }
            if p.cutoff == Some(0) {
                c.push("cutoff", "must be at least 1");
            }
            c.time(p);
            c.samples(p, 2);
            if let Some(label) = &p.input {
                if input_state(label).is_none() {
                    c.push("input", format!("unknown input `{label}`; expected uniform, 00, 10, 01 or 11"));
                }
            }
            if let (Some(k0), Some(d)) = (p.omega_k0, p.delta) {
                if !positive(k0) || !positive(k0 + d) {
                    c.push("omega_k0", "cavity and atomic frequencies must be positive");
                }
            }
        }
        Kind::Sweep => match &p.sweep {
            None => c.push("sweep", "required"),
            Some(sw) => match Kind::parse(&sw.kind) {
                None | Some(Kind::Sweep) => c.push("sweep.kind", format!("`{}` cannot be swept", sw.kind)),
                Some(base) => {
                    if sw.values.is_empty() {
                        c.push("sweep.values", "must not be empty");
                    }
                    for &v in &sw.values {
                        match p.with_value(&sw.parameter, v) {
                            Err(e) => {
                                c.out.push(e);
                                break;
                            }
                            Ok(point) => {
                                let errs = validate_kind(base, &point);
                                if !errs.is_empty() {
                                    c.out.extend(errs);
                                    break;
                                }
                            }
                        }
                    }
                }
            },
        },
    }
    c.out
}
