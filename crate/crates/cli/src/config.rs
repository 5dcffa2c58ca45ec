//! Run-config loading, dotted overrides and schema validation.
//!
//! A config is one JSON object:
//!
//! ```json
//! { "version": 1, "command": "evolve", "output": { "format": "csv", "path": "out.csv" }, ... }
//! ```
//!
//! The remaining keys are the command section: an evolution request for
//! `evolve`, a sweep request for `sweep`, a calculator call for `energetics`.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use dickelab_core::dynamics::{check_request, EvolutionRequest};
use dickelab_core::energetics::{evaluate, Calculator};
use dickelab_core::models::FAMILIES;
use dickelab_core::scaling::{Metric, SweepRequest};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const CONFIG_VERSION: u64 = 1;

const FORMULAS: &[&str] = &[
    "ev_to_kwh",
    "kwh_to_ev",
    "material_use_per_area",
    "material_use_per_watt",
    "battery_energy_density",
    "battery_power_density",
    "nuclear_transfer_rate",
    "vol_ratio",
    "magnetic_coupling",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Evolve,
    Sweep,
    Energetics,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Evolve => "evolve",
            CommandKind::Sweep => "sweep",
            CommandKind::Energetics => "energetics",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Section {
    Evolve(Box<EvolutionRequest>),
    Sweep(Box<SweepRequest>),
    Energetics(Calculator),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub output: OutputSpec,
    pub section: Section,
}

/// One schema or semantic problem, located by a dotted path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Reads and parses a config file, reporting syntax errors with line and column.
pub fn read_value(path: &Path) -> Result<Value, Violation> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Violation::new("", format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Violation::new(
            "",
            format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()),
        )
    })
}

/// Applies `a.b.c=value` overrides. The value is parsed as JSON when
/// possible and taken as a string otherwise; missing objects are created.
pub fn apply_overrides(root: &mut Value, overrides: &[String]) -> Result<(), Violation> {
    for o in overrides {
        let (path, raw) = o
            .split_once('=')
            .ok_or_else(|| Violation::new(o.as_str(), "override must look like path=value"))?;
        let path = path.trim();
        if path.is_empty() {
            return Err(Violation::new(o.as_str(), "override path is empty"));
        }
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
        let mut cur = &mut *root;
        let segments: Vec<&str> = path.split('.').collect();
        for (i, seg) in segments.iter().enumerate() {
            let last = i + 1 == segments.len();
            cur = match cur {
                Value::Object(map) => {
                    if last {
                        map.insert((*seg).to_owned(), value.clone());
                        break;
                    }
                    map.entry((*seg).to_owned()).or_insert_with(|| Value::Object(Map::new()))
                }
                Value::Array(items) => {
                    let idx: usize = seg
                        .parse()
                        .map_err(|_| Violation::new(path, format!("`{seg}` is not an array index")))?;
                    let len = items.len();
                    let slot = items
                        .get_mut(idx)
                        .ok_or_else(|| Violation::new(path, format!("index {idx} out of range (length {len})")))?;
                    if last {
                        *slot = value.clone();
                        break;
                    }
                    slot
                }
                _ => {
                    let prefix = segments[..i].join(".");
                    return Err(Violation::new(path, format!("`{prefix}` is not an object or array")));
                }
            };
        }
    }
    Ok(())
}

fn typed<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T, Violation> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, _) => inner,
            (false, ".") => prefix.to_owned(),
            (false, _) => format!("{prefix}.{inner}"),
        };
        Violation::new(path, e.into_inner().to_string())
    })
}

fn check_family(v: &Value, path: &str, out: &mut Vec<Violation>) {
    let mut cur = v;
    for seg in path.split('.') {
        match cur.get(seg) {
            Some(x) => cur = x,
            None => return,
        }
    }
    let family = match cur.get("family") {
        Some(Value::String(f)) => f,
        Some(_) => {
            out.push(Violation::new(format!("{path}.family"), "must be a string"));
            return;
        }
        None => {
            out.push(Violation::new(
                format!("{path}.family"),
                format!("missing; accepted families: {}", FAMILIES.join(", ")),
            ));
            return;
        }
    };
    if !FAMILIES.contains(&family.as_str()) {
        out.push(Violation::new(
            format!("{path}.family"),
            format!("unknown model family `{family}`; accepted families: {}", FAMILIES.join(", ")),
        ));
    }
}

fn check_request_fields(req: &EvolutionRequest, prefix: &str, out: &mut Vec<Violation>) {
    let p = |k: &str| {
        if prefix.is_empty() {
            k.to_owned()
        } else {
            format!("{prefix}.{k}")
        }
    };
    for v in req.model.validate() {
        out.push(Violation::new(p(&format!("model.{}", v.path)), v.message));
    }
    if !(req.t_max > 0.0 && req.t_max.is_finite()) {
        out.push(Violation::new(p("t_max"), format!("must be positive, got {}", req.t_max)));
    }
    if !(req.dt_output > 0.0 && req.dt_output <= req.t_max) {
        out.push(Violation::new(
            p("dt_output"),
            format!("must lie in (0, t_max], got {}", req.dt_output),
        ));
    }
    for (i, n) in req.noise.iter().enumerate() {
        if !(n.rate >= 0.0 && n.rate.is_finite()) {
            out.push(Violation::new(
                p(&format!("noise[{i}].rate")),
                format!("must be non-negative, got {}", n.rate),
            ));
        }
    }
}

/// Parses a config value into a typed run config, collecting every violation
/// that can be found without running the dynamics.
pub fn parse(mut root: Value, expected: Option<CommandKind>) -> Result<RunConfig, Vec<Violation>> {
    let mut out = Vec::new();
    let Value::Object(map) = &mut root else {
        return Err(vec![Violation::new("", "config must be a JSON object")]);
    };
    match map.remove("version") {
        Some(Value::Number(n)) if n.as_u64() == Some(CONFIG_VERSION) => {}
        Some(v) => out.push(Violation::new("version", format!("unsupported version {v}; expected {CONFIG_VERSION}"))),
        None => out.push(Violation::new("version", format!("missing; expected {CONFIG_VERSION}"))),
    }
    let command = match map.remove("command") {
        Some(v) => match typed::<CommandKind>(v, "command") {
            Ok(c) => Some(c),
            Err(e) => {
                out.push(Violation::new("command", format!("{}; expected evolve, sweep or energetics", e.message)));
                None
            }
        },
        None => {
            out.push(Violation::new("command", "missing; expected evolve, sweep or energetics"));
            None
        }
    };
    if let (Some(c), Some(e)) = (command, expected) {
        if c != e {
            out.push(Violation::new(
                "command",
                format!("config is for `{}` but was run as `{}`", c.as_str(), e.as_str()),
            ));
        }
    }
    let output = match map.remove("output") {
        Some(v) => typed::<OutputSpec>(v, "output").unwrap_or_else(|e| {
            out.push(e);
            OutputSpec::default()
        }),
        None => OutputSpec::default(),
    };
    let Some(command) = command else {
        return Err(out);
    };
    let section = Value::Object(map.clone());
    let parsed = match command {
        CommandKind::Evolve => {
            check_family(&section, "model", &mut out);
            typed::<EvolutionRequest>(section, "").map(|r| Section::Evolve(Box::new(r)))
        }
        CommandKind::Sweep => {
            check_family(&section, "template.model", &mut out);
            typed::<SweepRequest>(section, "").map(|r| Section::Sweep(Box::new(r)))
        }
        CommandKind::Energetics => {
            if let Some(Value::String(f)) = section.get("formula") {
                if !FORMULAS.contains(&f.as_str()) {
                    out.push(Violation::new(
                        "formula",
                        format!("unknown formula `{f}`; accepted formulas: {}", FORMULAS.join(", ")),
                    ));
                }
            }
            typed::<Calculator>(section, "").map(Section::Energetics)
        }
    };
    let section = match parsed {
        Ok(s) => s,
        Err(e) => {
            // the family/formula checks already explain an unknown tag
            if out.is_empty() {
                out.push(e);
            }
            return Err(out);
        }
    };
    match &section {
        Section::Evolve(req) => {
            check_request_fields(req, "", &mut out);
            if req.observables.is_empty() {
                out.push(Violation::new("observables", "list at least one observable"));
            }
            if out.is_empty() {
                if let Err(e) = check_request(req) {
                    out.push(Violation::new("", e.to_string()));
                }
            }
        }
        Section::Sweep(req) => {
            check_request_fields(&req.template, "template", &mut out);
            let mut ns = req.n_values.clone();
            ns.sort_unstable();
            ns.dedup();
            if ns.len() < 3 {
                out.push(Violation::new("n_values", format!("needs at least 3 distinct entries, got {}", ns.len())));
            }
            if ns.first() == Some(&0) {
                out.push(Violation::new("n_values", "entries must be positive"));
            }
            match req.metric {
                Metric::ChargingHalfTime if req.template.model.excitation_energy().is_none() => out.push(
                    Violation::new("metric", format!("charging_half_time is undefined for `{}`", req.template.model.family())),
                ),
                Metric::TransferHalfTime | Metric::ShortTimeTransfer
                    if req.observable.is_none() && req.template.model.acceptor_ensemble().is_none() =>
                {
                    out.push(Violation::new(
                        "metric",
                        format!("family `{}` has no acceptor ensemble", req.template.model.family()),
                    ))
                }
                _ => {}
            }
            if out.is_empty() {
                for (k, &n) in ns.iter().enumerate() {
                    match req.instantiate(n) {
                        Err(e) => out.push(Violation::new(format!("n_values ({n})"), e.to_string())),
                        Ok(r) if k == 0 => {
                            if let Err(e) = check_request(&r) {
                                out.push(Violation::new(format!("n_values ({n})"), e.to_string()));
                            }
                        }
                        Ok(_) => {}
                    }
                }
            }
        }
        Section::Energetics(calc) => {
            if let Err(e) = evaluate(calc) {
                out.push(Violation::new("", e.to_string()));
            }
        }
    }
    if out.is_empty() {
        Ok(RunConfig {
            command,
            output,
            section,
        })
    } else {
        Err(out)
    }
}
