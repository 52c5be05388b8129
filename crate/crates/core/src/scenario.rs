//! Config-driven scenario runs.
//!
//! A scenario file is TOML with exactly one table, named after the scenario:
//!
//! ```toml
//! [timing]
//! tau = 1e-3
//! L = 0.5
//! N = 7000
//! ```
//!
//! Keys are flat scalars or arrays; unknown keys are a parse error. Each run
//! writes its artifacts plus `manifest.json` into one output directory.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::Error;
use crate::grid::GridAxis;
use crate::kernel::{self, GaussianPacket, KernelParams, SlitGeometry, SlitProfile};
use crate::qubit::{self, EvolutionMap2, GramMatrix, TimeSwitch};
use crate::report::{sig17, write_atomic, CsvTable, JsonObject};
use crate::signal::{self, ReadoutExperiment, TimingScenario, SPEED_OF_LIGHT};
use crate::source::{BranchSource, Envelope};
use crate::state::{self, DetectionPattern, EntangledBranchPair, PhaseShift};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Offending parameter, e.g. `SlitGeometry.b`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl From<Error> for Diagnostic {
    fn from(e: Error) -> Self {
        let field = match &e {
            Error::InvalidParameter { name, .. } => (*name).to_owned(),
            Error::InvalidGram(_) => "GramMatrix".to_owned(),
            Error::NonUnitary { role, .. } => format!("EvolutionMap2.{role}"),
            Error::Geometry(_) => "SlitGeometry".to_owned(),
            Error::GridUnderresolved { .. } | Error::AxisMismatch(_) => "GridAxis".to_owned(),
            _ => "scenario".to_owned(),
        };
        let message = match e {
            Error::InvalidParameter { reason, .. } => reason,
            other => other.to_string(),
        };
        Diagnostic { field, message }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid scenario:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("{0}")]
    Module(#[from] Error),
    #[error("I/O error: {0}")]
    Io(String),
}

impl ScenarioError {
    /// Process exit code: 2 parse, 3 precondition, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Parse(_) => 2,
            ScenarioError::Invalid(_) | ScenarioError::Module(_) => 3,
            ScenarioError::Io(_) => 4,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> ScenarioError {
    ScenarioError::Io(format!("{}: {e}", path.display()))
}

/// `[re, im]` pair in TOML.
type ComplexPair = [f64; 2];

fn cx(p: ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct PairFields {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    /// `gaussian` or `flat-top`.
    pub envelope: String,
    pub envelope_width: f64,
    pub fringe_k: f64,
    pub x2_min: f64,
    pub x2_max: f64,
    pub n2_points: usize,
    pub partner_sigma: f64,
    /// Target `|I|`; ignored when `partner_separation` is set.
    pub partner_overlap: f64,
    pub partner_separation: Option<f64>,
    pub c1: Option<ComplexPair>,
    pub c2: Option<ComplexPair>,
}

const PAIR_KEYS: &[&str] = &[
    "x_min",
    "x_max",
    "n_points",
    "envelope",
    "envelope_width",
    "fringe_k",
    "x2_min",
    "x2_max",
    "n2_points",
    "partner_sigma",
    "partner_overlap",
    "partner_separation",
    "c1",
    "c2",
];

impl Default for PairFields {
    fn default() -> Self {
        Self {
            x_min: -10.0,
            x_max: 10.0,
            n_points: 1601,
            envelope: "gaussian".into(),
            envelope_width: 3.0,
            fringe_k: 3.0,
            x2_min: -20.0,
            x2_max: 20.0,
            n2_points: 1601,
            partner_sigma: 1.0,
            partner_overlap: 0.5,
            partner_separation: None,
            c1: None,
            c2: None,
        }
    }
}

impl PairFields {
    fn build(&self, diags: &mut Vec<Diagnostic>) -> Option<EntangledBranchPair> {
        let axis1 = collect(diags, GridAxis::new(self.x_min, self.x_max, self.n_points));
        let axis2 = collect(diags, GridAxis::new(self.x2_min, self.x2_max, self.n2_points));
        let envelope = match self.envelope.as_str() {
            "gaussian" => Some(Envelope::Gaussian {
                sigma: self.envelope_width,
            }),
            "flat-top" => Some(Envelope::FlatTop {
                half_width: self.envelope_width,
            }),
            other => {
                diags.push(Diagnostic {
                    field: "Envelope.kind".into(),
                    message: format!("unknown envelope `{other}` (gaussian | flat-top)"),
                });
                None
            }
        };
        if !(self.partner_sigma > 0.0) {
            diags.push(Diagnostic {
                field: "BranchSource.partner_sigma".into(),
                message: "must be positive".into(),
            });
            return None;
        }
        let separation = match self.partner_separation {
            Some(d) => Some(d),
            None => collect(
                diags,
                crate::source::separation_for_overlap(self.partner_sigma, self.partner_overlap),
            ),
        };
        let default_c = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let source = BranchSource {
            axis1: axis1?,
            envelope: envelope?,
            fringe_wavenumber: self.fringe_k,
            axis2: axis2?,
            partner_sigma: self.partner_sigma,
            partner_separation: separation?,
            c1: self.c1.map(cx).unwrap_or(default_c),
            c2: self.c2.map(cx).unwrap_or(default_c),
        };
        collect(diags, source.build())
    }
}

fn collect<T>(diags: &mut Vec<Diagnostic>, r: crate::Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            diags.push(e.into());
            None
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct PatternFields {
    pub phi: f64,
    pub normalize: bool,
    pub output: String,
}

impl Default for PatternFields {
    fn default() -> Self {
        Self {
            phi: 0.0,
            normalize: true,
            output: "pattern.csv".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct PhaseSweepFields {
    pub phis: Vec<f64>,
    pub reference_phi: f64,
    pub window: [f64; 2],
    pub output: String,
}

impl Default for PhaseSweepFields {
    fn default() -> Self {
        Self {
            phis: vec![0.0, 0.7, PI],
            reference_phi: 0.0,
            window: [-3.0, 3.0],
            output: "phase_sweep.csv".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct ReadoutFields {
    pub confidence: f64,
    pub trials: usize,
    pub max_n: usize,
    pub seed: u64,
    pub output: String,
}

impl Default for ReadoutFields {
    fn default() -> Self {
        Self {
            confidence: signal::DEFAULT_CONFIDENCE,
            trials: signal::DEFAULT_TRIALS,
            max_n: 4096,
            seed: 0,
            output: "readout.csv".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlitDefectConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub mass: f64,
    pub hbar: f64,
    pub x0: f64,
    pub sigma: f64,
    pub k0: f64,
    pub t_i: f64,
    pub t_c: f64,
    pub t_f: f64,
    pub profile: SlitProfile,
    pub center: f64,
    pub b_values: Vec<f64>,
    pub output: String,
}

impl Default for SlitDefectConfig {
    fn default() -> Self {
        Self {
            x_min: -40.0,
            x_max: 40.0,
            n_points: 4096,
            mass: 1.0,
            hbar: 1.0,
            x0: 0.0,
            sigma: 1.0,
            k0: 0.0,
            t_i: 0.0,
            t_c: 1.0,
            t_f: 2.0,
            profile: SlitProfile::Hard,
            center: 0.0,
            b_values: vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0],
            output: "slit_defect.csv".into(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QubitConfig {
    /// Side-1 evolution, rows of `[re, im]`; identity when absent.
    pub u1: Option<[[ComplexPair; 2]; 2]>,
    pub u2: Option<[[ComplexPair; 2]; 2]>,
    pub alpha: Option<ComplexPair>,
    pub beta: Option<ComplexPair>,
    pub gamma: Option<ComplexPair>,
    pub delta: Option<ComplexPair>,
    pub switch_time: Option<f64>,
    pub alpha0: Option<ComplexPair>,
    pub beta0: Option<ComplexPair>,
    pub gamma0: Option<ComplexPair>,
    pub delta0: Option<ComplexPair>,
    pub times: Option<Vec<f64>>,
    pub output: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingConfig {
    pub tau: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_timing_output")]
    pub output: String,
}

fn default_c() -> f64 {
    SPEED_OF_LIGHT
}

fn default_timing_output() -> String {
    "timing.json".into()
}

#[derive(Debug, Clone)]
pub enum ScenarioKind {
    Pattern(PairFields, PatternFields),
    PhaseSweep(PairFields, PhaseSweepFields),
    SlitDefect(SlitDefectConfig),
    Qubit(QubitConfig),
    Timing(TimingConfig),
    Readout(PairFields, ReadoutFields),
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Source text, echoed into the manifest.
    pub source: String,
}

impl ScenarioConfig {
    pub fn name(&self) -> &'static str {
        match self.kind {
            ScenarioKind::Pattern(..) => "pattern",
            ScenarioKind::PhaseSweep(..) => "phase-sweep",
            ScenarioKind::SlitDefect(_) => "slit-defect",
            ScenarioKind::Qubit(_) => "qubit",
            ScenarioKind::Timing(_) => "timing",
            ScenarioKind::Readout(..) => "readout",
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let doc: toml::Table = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        if doc.len() != 1 {
            let names: Vec<_> = doc.keys().cloned().collect();
            return Err(ScenarioError::Parse(format!(
                "expected exactly one scenario table, found {names:?}"
            )));
        }
        let (name, body) = doc.into_iter().next().unwrap();
        let table = match body {
            toml::Value::Table(t) => t,
            _ => return Err(ScenarioError::Parse(format!("`{name}` must be a table"))),
        };
        let kind = match name.as_str() {
            "pattern" => {
                check_keys(&name, &table, &[PAIR_KEYS, &["phi", "normalize", "output"]])?;
                ScenarioKind::Pattern(decode(&table)?, decode(&table)?)
            }
            "phase-sweep" => {
                check_keys(&name, &table, &[PAIR_KEYS, &["phis", "reference_phi", "window", "output"]])?;
                ScenarioKind::PhaseSweep(decode(&table)?, decode(&table)?)
            }
            "readout" => {
                check_keys(
                    &name,
                    &table,
                    &[PAIR_KEYS, &["confidence", "trials", "max_n", "seed", "output"]],
                )?;
                ScenarioKind::Readout(decode(&table)?, decode(&table)?)
            }
            "slit-defect" => ScenarioKind::SlitDefect(decode(&table)?),
            "qubit" => ScenarioKind::Qubit(decode(&table)?),
            "timing" => ScenarioKind::Timing(decode(&table)?),
            other => {
                return Err(ScenarioError::Parse(format!(
                    "unknown scenario `{other}` (pattern | phase-sweep | slit-defect | qubit | timing | readout)"
                )))
            }
        };
        Ok(Self {
            kind,
            source: text.to_owned(),
        })
    }
}

fn check_keys(name: &str, table: &toml::Table, allowed: &[&[&str]]) -> Result<(), ScenarioError> {
    let allowed: BTreeSet<&str> = allowed.iter().flat_map(|k| k.iter().copied()).collect();
    let unknown: Vec<_> = table.keys().filter(|k| !allowed.contains(k.as_str())).cloned().collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(ScenarioError::Parse(format!("unknown keys in [{name}]: {unknown:?}")))
    }
}

fn decode<T: DeserializeOwned>(table: &toml::Table) -> Result<T, ScenarioError> {
    toml::Value::Table(table.clone())
        .try_into()
        .map_err(|e: toml::de::Error| ScenarioError::Parse(e.to_string()))
}

/// A validated scenario ready to execute.
enum Prepared {
    Pattern {
        pair: EntangledBranchPair,
        phi: PhaseShift,
        normalize: bool,
        output: String,
    },
    PhaseSweep {
        pair: EntangledBranchPair,
        reference: DetectionPattern,
        phis: Vec<PhaseShift>,
        window: (f64, f64),
        output: String,
    },
    SlitDefect {
        packet: GaussianPacket,
        axis: GridAxis,
        params: KernelParams,
        profile: SlitProfile,
        center: f64,
        b_values: Vec<f64>,
        output: String,
    },
    Qubit {
        rows: Vec<(f64, GramMatrix)>,
        u1: EvolutionMap2,
        output: String,
    },
    Timing {
        scenario: TimingScenario,
        output: String,
    },
    Readout {
        experiment: ReadoutExperiment,
        output: String,
    },
}

fn check_output_name(diags: &mut Vec<Diagnostic>, name: &str) {
    let p = Path::new(name);
    let plain = p.components().count() == 1 && p.file_name().is_some() && name != MANIFEST_FILE;
    if !plain {
        diags.push(Diagnostic {
            field: "output".into(),
            message: format!("`{name}` must be a plain file name other than {MANIFEST_FILE}"),
        });
    }
}

fn prepare(config: &ScenarioConfig, seed_override: Option<u64>) -> Result<Prepared, Vec<Diagnostic>> {
    let mut d = Vec::new();
    let prepared = match &config.kind {
        ScenarioKind::Pattern(pair, f) => {
            check_output_name(&mut d, &f.output);
            let pair = pair.build(&mut d);
            let phi = collect(&mut d, PhaseShift::new(f.phi));
            let ok = pair.zip(phi).and_then(|(pair, phi)| {
                collect(&mut d, state::detection_pattern(&pair, phi, f.normalize)).map(|_| (pair, phi))
            });
            ok.map(|(pair, phi)| Prepared::Pattern {
                pair,
                phi,
                normalize: f.normalize,
                output: f.output.clone(),
            })
        }
        ScenarioKind::PhaseSweep(pair, f) => {
            check_output_name(&mut d, &f.output);
            let pair = pair.build(&mut d);
            let phis: Vec<_> = f.phis.iter().filter_map(|&p| collect(&mut d, PhaseShift::new(p))).collect();
            if f.phis.is_empty() {
                d.push(Diagnostic {
                    field: "phis".into(),
                    message: "need at least one phase".into(),
                });
            }
            let reference_phi = collect(&mut d, PhaseShift::new(f.reference_phi));
            let window = (f.window[0], f.window[1]);
            let reference = pair.as_ref().zip(reference_phi).and_then(|(pair, r)| {
                let pat = collect(&mut d, state::detection_pattern(pair, r, true))?;
                collect(&mut d, state::fringe_phase_shift(&pat, &pat, window))?;
                Some(pat)
            });
            match (pair, reference) {
                (Some(pair), Some(reference)) if d.is_empty() => Some(Prepared::PhaseSweep {
                    pair,
                    reference,
                    phis,
                    window,
                    output: f.output.clone(),
                }),
                _ => None,
            }
        }
        ScenarioKind::Readout(pair, f) => {
            check_output_name(&mut d, &f.output);
            let seed = seed_override.unwrap_or(f.seed);
            pair.build(&mut d).and_then(|pair| {
                let p0 = collect(&mut d, state::detection_pattern(&pair, PhaseShift::ZERO, true))?;
                let pp = collect(&mut d, state::detection_pattern(&pair, PhaseShift::new(PI).unwrap(), true))?;
                let exp = collect(
                    &mut d,
                    ReadoutExperiment::new(p0, pp, f.confidence, seed, f.max_n)
                        .and_then(|e| e.with_trials(f.trials)),
                )?;
                collect(&mut d, signal::simulate_readout(&exp, signal::Symbol::Zero, 1, 0))?;
                Some(Prepared::Readout {
                    experiment: exp,
                    output: f.output.clone(),
                })
            })
        }
        ScenarioKind::SlitDefect(c) => {
            check_output_name(&mut d, &c.output);
            let axis = collect(&mut d, GridAxis::new(c.x_min, c.x_max, c.n_points));
            let params = collect(&mut d, KernelParams::new(c.mass, c.hbar, c.t_i, c.t_c, c.t_f));
            let packet = collect(&mut d, GaussianPacket::new(c.x0, c.sigma, c.k0));
            if c.b_values.is_empty() {
                d.push(Diagnostic {
                    field: "SlitGeometry.b".into(),
                    message: "need at least one half width".into(),
                });
            }
            for &b in &c.b_values {
                collect(&mut d, SlitGeometry::new(c.profile, b, c.center));
            }
            if let (Some(axis), Some(params), Some(packet)) = (axis, params, packet) {
                // grid checks only; the propagation itself runs later
                collect(
                    &mut d,
                    kernel::propagate_free(&packet, axis, &params, kernel::Segment::InitialToFinal).map(|_| ()),
                );
                if d.is_empty() {
                    Some(Prepared::SlitDefect {
                        packet,
                        axis,
                        params,
                        profile: c.profile,
                        center: c.center,
                        b_values: c.b_values.clone(),
                        output: c.output.clone(),
                    })
                } else {
                    None
                }
            } else {
                None
            }
        }
        ScenarioKind::Qubit(q) => prepare_qubit(q, &mut d),
        ScenarioKind::Timing(t) => {
            check_output_name(&mut d, &t.output);
            collect(&mut d, TimingScenario::new(t.tau, t.length, t.n, t.c)).map(|scenario| Prepared::Timing {
                scenario,
                output: t.output.clone(),
            })
        }
    };
    match prepared {
        Some(p) if d.is_empty() => Ok(p),
        _ => {
            if d.is_empty() {
                d.push(Diagnostic {
                    field: "scenario".into(),
                    message: "scenario could not be prepared".into(),
                });
            }
            Err(d)
        }
    }
}

fn matrix_of(rows: [[ComplexPair; 2]; 2]) -> nalgebra::Matrix2<Complex64> {
    nalgebra::Matrix2::new(cx(rows[0][0]), cx(rows[0][1]), cx(rows[1][0]), cx(rows[1][1]))
}

fn prepare_qubit(q: &QubitConfig, d: &mut Vec<Diagnostic>) -> Option<Prepared> {
    let output = q.output.clone().unwrap_or_else(|| "qubit.csv".into());
    check_output_name(d, &output);
    let u1 = match q.u1 {
        Some(m) => collect(d, EvolutionMap2::side1(matrix_of(m))),
        None => Some(EvolutionMap2::identity(qubit::EvolutionRole::U1)),
    };
    let times = q.times.clone().unwrap_or_else(|| vec![0.0]);
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        d.push(Diagnostic {
            field: "times".into(),
            message: "need one or more finite times".into(),
        });
        return None;
    }
    let gram_given = [q.alpha, q.beta, q.gamma, q.delta].iter().any(Option::is_some);
    let modes = [q.u2.is_some(), gram_given, q.switch_time.is_some()];
    if modes.iter().filter(|m| **m).count() != 1 {
        d.push(Diagnostic {
            field: "qubit".into(),
            message: "give exactly one of u2, alpha/beta/gamma/delta, or switch_time".into(),
        });
        return None;
    }
    let zero = [0.0, 0.0];
    let rows: Option<Vec<(f64, GramMatrix)>> = if let Some(u2) = q.u2 {
        let u2 = collect(d, EvolutionMap2::side2(matrix_of(u2)))?;
        let g = qubit::gram(&u2);
        Some(times.iter().map(|&t| (t, g)).collect())
    } else if gram_given {
        let g = collect(
            d,
            GramMatrix::new(
                cx(q.alpha.unwrap_or([1.0, 0.0])),
                cx(q.beta.unwrap_or(zero)),
                cx(q.gamma.unwrap_or(zero)),
                cx(q.delta.unwrap_or([1.0, 0.0])),
            ),
        )?;
        Some(times.iter().map(|&t| (t, g)).collect())
    } else {
        let s = collect(
            d,
            TimeSwitch::new(
                q.switch_time.unwrap(),
                cx(q.alpha0.unwrap_or(zero)),
                cx(q.beta0.unwrap_or(zero)),
                cx(q.gamma0.unwrap_or(zero)),
                cx(q.delta0.unwrap_or(zero)),
            ),
        )?;
        times.iter().map(|&t| s.gram_at(t).ok().map(|g| (t, g))).collect()
    };
    Some(Prepared::Qubit {
        rows: rows?,
        u1: u1?,
        output,
    })
}

/// All validation failures of a config, without executing it.
pub fn validate(config: &ScenarioConfig) -> Vec<Diagnostic> {
    match prepare(config, None) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub scenario: String,
    pub config: String,
    pub artifacts: Vec<PathBuf>,
    pub tool_version: String,
    pub duration_s: f64,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let artifacts: Vec<Value> = self
            .artifacts
            .iter()
            .map(|p| Value::String(p.display().to_string()))
            .collect();
        JsonObject::new()
            .field("scenario", self.scenario.as_str())
            .field("tool_version", self.tool_version.as_str())
            .field("seed", self.seed.map(Value::from).unwrap_or(Value::Null))
            .float("duration_s", self.duration_s)
            .field("artifacts", artifacts)
            .field("config", self.config.as_str())
            .render()
    }
}

fn prepare_out_dir(opts: &RunOptions) -> Result<(), ScenarioError> {
    let dir = &opts.out_dir;
    if dir.exists() {
        let non_empty = std::fs::read_dir(dir).map_err(|e| io_err(dir, e))?.next().is_some();
        if non_empty && !opts.force {
            return Err(ScenarioError::Io(format!(
                "{} exists and is not empty; pass --force to overwrite",
                dir.display()
            )));
        }
    } else {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    Ok(())
}

/// Executes a scenario and writes its artifacts and manifest.
pub fn run(config: &ScenarioConfig, opts: &RunOptions) -> Result<RunManifest, ScenarioError> {
    let started = Instant::now();
    let prepared = prepare(config, opts.seed).map_err(ScenarioError::Invalid)?;
    prepare_out_dir(opts)?;

    let (name, contents, seed) = execute(prepared)?;
    let path = opts.out_dir.join(&name);
    write_atomic(&path, contents.as_bytes()).map_err(|e| io_err(&path, e))?;

    let manifest = RunManifest {
        scenario: config.name().to_owned(),
        config: config.source.clone(),
        artifacts: vec![PathBuf::from(name)],
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        duration_s: started.elapsed().as_secs_f64(),
        seed,
    };
    let mpath = opts.out_dir.join(MANIFEST_FILE);
    write_atomic(&mpath, manifest.to_json().as_bytes()).map_err(|e| io_err(&mpath, e))?;
    Ok(manifest)
}

/// Runs a prepared scenario, returning `(artifact name, contents, seed)`.
fn execute(prepared: Prepared) -> Result<(String, String, Option<u64>), ScenarioError> {
    Ok(match prepared {
        Prepared::Pattern {
            pair,
            phi,
            normalize,
            output,
        } => (output, state::detection_pattern(&pair, phi, normalize)?.to_csv(), None),
        Prepared::PhaseSweep {
            pair,
            reference,
            phis,
            window,
            output,
        } => {
            let mut t = CsvTable::new(&["phi", "recovered_phi"]);
            for phi in phis {
                let shifted = state::detection_pattern(&pair, phi, true)?;
                let recovered = state::fringe_phase_shift(&reference, &shifted, window)?;
                t.push_floats(&[phi.radians(), recovered]);
            }
            (output, t.render(), None)
        }
        Prepared::SlitDefect {
            packet,
            axis,
            params,
            profile,
            center,
            b_values,
            output,
        } => {
            let rows = kernel::defect_sweep(&packet, axis, &params, profile, center, &b_values)?;
            (output, kernel::defect_table(&rows).render(), None)
        }
        Prepared::Qubit { rows, u1, output } => {
            let rows = rows
                .iter()
                .map(|(t, g)| qubit::qubit_row(*t, g, &u1))
                .collect::<crate::Result<Vec<_>>>()?;
            (output, qubit::qubit_table(&rows).render(), None)
        }
        Prepared::Timing { scenario, output } => (output, signal::evaluate(&scenario)?.to_json(), None),
        Prepared::Readout { experiment, output } => {
            let search = signal::required_n(&experiment)?;
            let mut table = search.table();
            // final row repeats the answer for quick lookup
            let last = search
                .trace
                .iter()
                .find(|p| p.n == search.required_n)
                .copied()
                .expect("required_n was evaluated");
            table.push(vec![
                last.n.to_string(),
                sig17(last.accuracy_zero),
                sig17(last.accuracy_pi),
            ]);
            (output, table.render(), Some(experiment.seed))
        }
    })
}
