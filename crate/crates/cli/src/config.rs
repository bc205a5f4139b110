//! Strict JSON run configuration: unknown keys are rejected, defaults are
//! filled in and every value is checked before anything is computed.

use std::fmt;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use vlasov1d_core::{
    DistributionSpec, InitialDistribution, Integrator, KernelKind, Sampling, TableGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Solve,
    Stability,
    Chaos,
    Convergence,
    Mollify,
    W1,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Solve => "solve",
            Command::Stability => "stability",
            Command::Chaos => "chaos",
            Command::Convergence => "convergence",
            Command::Mollify => "mollify",
            Command::W1 => "w1",
        }
    }

    fn needs_f0(self) -> bool {
        self != Command::W1
    }

    fn needs_n(self) -> bool {
        matches!(
            self,
            Command::Simulate | Command::Stability | Command::Chaos | Command::Mollify
        )
    }

    fn needs_grid(self) -> bool {
        matches!(
            self,
            Command::Solve | Command::Stability | Command::Chaos | Command::Convergence
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse(String),
    UnknownKey {
        path: String,
        key: String,
        suggestion: Option<String>,
    },
    Invalid {
        field: String,
        reason: String,
    },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(m) => write!(f, "malformed config: {m}"),
            ConfigError::UnknownKey {
                path,
                key,
                suggestion,
            } => {
                write!(f, "unknown key \"{key}\" in {path}")?;
                if let Some(s) = suggestion {
                    write!(f, "; did you mean \"{s}\"?")?;
                }
                Ok(())
            }
            ConfigError::Invalid { field, reason } => {
                write!(f, "invalid value for \"{field}\": {reason}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Initial distribution as written in a config. `perturbed_maxwellian` is
/// tabulated into a `table_grid` when the run starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum F0Config {
    UniformBox {
        v_half_width: f64,
    },
    TruncatedMaxwellian {
        sigma: f64,
        vcut: f64,
    },
    PerturbedMaxwellian {
        sigma: f64,
        vcut: f64,
        amplitude: f64,
        mode: u32,
        nx: usize,
        nv: usize,
    },
    TableGrid {
        nx: usize,
        nv: usize,
        vmax: f64,
        values: Vec<f64>,
    },
}

impl F0Config {
    pub fn build(&self) -> vlasov1d_core::Result<InitialDistribution> {
        let spec = match self.clone() {
            F0Config::UniformBox { v_half_width } => DistributionSpec::UniformBox { v_half_width },
            F0Config::TruncatedMaxwellian { sigma, vcut } => {
                DistributionSpec::TruncatedMaxwellian { sigma, vcut }
            }
            F0Config::PerturbedMaxwellian {
                sigma,
                vcut,
                amplitude,
                mode,
                nx,
                nv,
            } => DistributionSpec::TableGrid(TableGrid::perturbed_maxwellian(
                sigma, vcut, amplitude, mode, nx, nv,
            )?),
            F0Config::TableGrid {
                nx,
                nv,
                vmax,
                values,
            } => DistributionSpec::TableGrid(TableGrid {
                nx,
                nv,
                vmax,
                values,
            }),
        };
        InitialDistribution::new(spec)
    }
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub initial_distribution: Option<F0Config>,
    pub n: Option<usize>,
    pub t_final: Option<f64>,
    pub dt: f64,
    pub kernel: KernelKind,
    pub integrator: Integrator,
    pub sampling: Sampling,
    pub sample_every: usize,
    pub nx: usize,
    pub nv: usize,
    pub vmax: Option<f64>,
    pub grid_dt: f64,
    pub sample_interval: f64,
    pub w1_atoms: usize,
    pub margin: f64,
    pub seeds: usize,
    pub eps_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub t_snapshots: Vec<f64>,
    pub replicates: usize,
    pub mu: Option<PathBuf>,
    pub nu: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

const TOP_KEYS: &[&str] = &[
    "command",
    "seed",
    "initial_distribution",
    "n",
    "t_final",
    "dt",
    "kernel",
    "integrator",
    "sampling",
    "sample_every",
    "nx",
    "nv",
    "vmax",
    "grid_dt",
    "sample_interval",
    "w1_atoms",
    "margin",
    "seeds",
    "eps_list",
    "n_list",
    "t_snapshots",
    "replicates",
    "mu",
    "nu",
    "output_dir",
];

fn suggest(key: &str, known: &[&str]) -> Option<String> {
    known
        .iter()
        .map(|k| (strsim::jaro_winkler(key, k), *k))
        .filter(|(score, _)| *score >= 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k.to_string())
}

fn check_keys(obj: &Map<String, Value>, known: &[&str], path: &str) -> Result<(), ConfigError> {
    for key in obj.keys() {
        if !known.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey {
                path: path.to_string(),
                key: key.clone(),
                suggestion: suggest(key, known),
            });
        }
    }
    Ok(())
}

fn take<T: DeserializeOwned>(
    obj: &Map<String, Value>,
    key: &str,
) -> Result<Option<T>, ConfigError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| invalid(key, e.to_string())),
    }
}

fn parse_f0(v: &Value) -> Result<F0Config, ConfigError> {
    const FIELD: &str = "initial_distribution";
    let obj = v
        .as_object()
        .ok_or_else(|| invalid(FIELD, "expected an object with a \"kind\""))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| invalid(FIELD, "missing string field \"kind\""))?;
    let known: &[&str] = match kind {
        "uniform_box" => &["kind", "v_half_width"],
        "truncated_maxwellian" => &["kind", "sigma", "vcut"],
        "perturbed_maxwellian" => &["kind", "sigma", "vcut", "amplitude", "mode", "nx", "nv"],
        "table_grid" => &["kind", "nx", "nv", "vmax", "values"],
        other => {
            let kinds = [
                "uniform_box",
                "truncated_maxwellian",
                "perturbed_maxwellian",
                "table_grid",
            ];
            let hint = suggest(other, &kinds)
                .map(|s| format!("; did you mean \"{s}\"?"))
                .unwrap_or_default();
            return Err(invalid(
                FIELD,
                format!("unknown kind \"{other}\" (expected one of {kinds:?}){hint}"),
            ));
        }
    };
    check_keys(obj, known, FIELD)?;
    serde_json::from_value(v.clone()).map_err(|e| invalid(FIELD, e.to_string()))
}

fn parse_kernel(v: &Value) -> Result<KernelKind, ConfigError> {
    if let Some(obj) = v.as_object() {
        check_keys(obj, &["kind", "epsilon"], "kernel")?;
    }
    let k: KernelKind =
        serde_json::from_value(v.clone()).map_err(|e| invalid("kernel", e.to_string()))?;
    k.validate().map_err(|e| invalid("kernel", e.to_string()))?;
    Ok(k)
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(
            field,
            format!("must be a finite number > 0, got {v}"),
        ))
    }
}

fn at_least(field: &str, v: usize, lo: usize) -> Result<usize, ConfigError> {
    if v >= lo {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be >= {lo}, got {v}")))
    }
}

/// Whether `whole` is an integer multiple of `part`.
fn divides(part: f64, whole: f64) -> bool {
    let r = whole / part;
    r.round() >= 1.0 && (r - r.round()).abs() <= 1e-6 * r.max(1.0)
}

pub fn parse_config(text: &str, command: Command) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| ConfigError::Parse("top level must be a JSON object".into()))?;
    check_keys(obj, TOP_KEYS, "config")?;

    if let Some(c) = take::<Command>(obj, "command")? {
        if c != command {
            return Err(invalid(
                "command",
                format!(
                    "config is for \"{}\" but the command line asks for \"{}\"",
                    c.name(),
                    command.name()
                ),
            ));
        }
    }

    let initial_distribution = obj.get("initial_distribution").map(parse_f0).transpose()?;
    let kernel = obj
        .get("kernel")
        .map(parse_kernel)
        .transpose()?
        .unwrap_or(KernelKind::Exact);

    let mut cfg = RunConfig {
        command,
        seed: take(obj, "seed")?.unwrap_or(0),
        initial_distribution,
        n: take(obj, "n")?,
        t_final: take(obj, "t_final")?,
        dt: take(obj, "dt")?.unwrap_or(1e-3),
        kernel,
        integrator: take(obj, "integrator")?.unwrap_or_default(),
        sampling: take(obj, "sampling")?.unwrap_or_default(),
        sample_every: take(obj, "sample_every")?.unwrap_or(100),
        nx: take(obj, "nx")?.unwrap_or(128),
        nv: take(obj, "nv")?.unwrap_or(128),
        vmax: None,
        grid_dt: take(obj, "grid_dt")?.unwrap_or(1e-2),
        sample_interval: take(obj, "sample_interval")?.unwrap_or(0.1),
        w1_atoms: take(obj, "w1_atoms")?.unwrap_or(1024),
        margin: take(obj, "margin")?.unwrap_or(0.10),
        seeds: take(obj, "seeds")?.unwrap_or(20),
        eps_list: take(obj, "eps_list")?.unwrap_or_else(|| vec![0.1, 0.05, 0.025, 0.0125]),
        n_list: take(obj, "n_list")?.unwrap_or_default(),
        t_snapshots: Vec::new(),
        replicates: take(obj, "replicates")?.unwrap_or(5),
        mu: take(obj, "mu")?,
        nu: take(obj, "nu")?,
        output_dir: take(obj, "output_dir")?,
    };

    let vmax = match obj.get("vmax") {
        None => None,
        Some(Value::String(s)) if s == "auto" => None,
        Some(v) => Some(positive(
            "vmax",
            v.as_f64()
                .ok_or_else(|| invalid("vmax", "expected a number or \"auto\""))?,
        )?),
    };

    positive("dt", cfg.dt)?;
    positive("grid_dt", cfg.grid_dt)?;
    positive("sample_interval", cfg.sample_interval)?;
    if !(cfg.margin.is_finite() && cfg.margin >= 0.0) {
        return Err(invalid(
            "margin",
            format!("must be >= 0, got {}", cfg.margin),
        ));
    }
    at_least("nx", cfg.nx, 4)?;
    at_least("nv", cfg.nv, 4)?;
    at_least("w1_atoms", cfg.w1_atoms, 1)?;
    at_least("sample_every", cfg.sample_every, 1)?;
    at_least("replicates", cfg.replicates, 1)?;

    if command == Command::W1 {
        if cfg.mu.is_none() {
            return Err(invalid("mu", "required for w1 (path to a x,v,w CSV)"));
        }
        if cfg.nu.is_none() {
            return Err(invalid("nu", "required for w1 (path to a x,v,w CSV)"));
        }
        return Ok(cfg);
    }

    let t_final = positive(
        "t_final",
        cfg.t_final
            .ok_or_else(|| invalid("t_final", format!("required for {}", command.name())))?,
    )?;
    let f0 = cfg
        .initial_distribution
        .as_ref()
        .filter(|_| command.needs_f0())
        .ok_or_else(|| {
            invalid(
                "initial_distribution",
                format!("required for {}", command.name()),
            )
        })?
        .build()
        .map_err(|e| invalid("initial_distribution", e.to_string()))?;
    if command.needs_n() {
        let n = cfg
            .n
            .ok_or_else(|| invalid("n", format!("required for {}", command.name())))?;
        at_least("n", n, 1)?;
    }

    if command.needs_grid() {
        let vmax = vmax.unwrap_or(f0.v_support() + t_final / 2.0 + 0.5);
        let outside = f0.tail_mass(vmax - t_final / 2.0);
        if outside >= 1e-6 {
            return Err(invalid(
                "vmax",
                format!(
                    "must be at least {} so that no mass reaches the velocity boundary by t_final",
                    f0.v_support() + t_final / 2.0
                ),
            ));
        }
        cfg.vmax = Some(vmax);
        if !divides(cfg.grid_dt, t_final) {
            return Err(invalid(
                "grid_dt",
                format!("must divide t_final = {t_final}"),
            ));
        }
    }

    if matches!(
        command,
        Command::Stability | Command::Chaos | Command::Convergence | Command::Mollify
    ) {
        if !divides(cfg.sample_interval, t_final) {
            return Err(invalid(
                "sample_interval",
                format!("must divide t_final = {t_final}"),
            ));
        }
        if !divides(cfg.dt, cfg.sample_interval) {
            return Err(invalid("dt", "must divide sample_interval"));
        }
        if command != Command::Mollify && !divides(cfg.grid_dt, cfg.sample_interval) {
            return Err(invalid("grid_dt", "must divide sample_interval"));
        }
    }

    match command {
        Command::Chaos => {
            at_least("seeds", cfg.seeds, 2)?;
        }
        Command::Convergence => {
            if cfg.n_list.is_empty()
                || cfg.n_list[0] == 0
                || cfg.n_list.windows(2).any(|w| w[1] <= w[0])
            {
                return Err(invalid(
                    "n_list",
                    "required: a nonempty, strictly increasing list of positive counts",
                ));
            }
            let snaps: Option<Vec<f64>> = take(obj, "t_snapshots")?;
            cfg.t_snapshots = snaps.unwrap_or_else(|| vec![t_final]);
            for &t in &cfg.t_snapshots {
                let on_grid = t == 0.0 || divides(cfg.sample_interval, t);
                if !(t.is_finite() && (0.0..=t_final + 1e-9).contains(&t) && on_grid) {
                    return Err(invalid(
                        "t_snapshots",
                        format!("{t} is not a multiple of sample_interval in [0, t_final]"),
                    ));
                }
            }
        }
        Command::Mollify => {
            if cfg.eps_list.len() < 2 || cfg.eps_list.windows(2).any(|w| w[1] >= w[0]) {
                return Err(invalid(
                    "eps_list",
                    "needs at least two strictly decreasing values",
                ));
            }
            for &e in &cfg.eps_list {
                KernelKind::mollified(e).map_err(|err| invalid("eps_list", err.to_string()))?;
            }
        }
        _ => {}
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "command": "stability",
        "initial_distribution": {"kind": "uniform_box", "v_half_width": 0.5},
        "n": 256,
        "t_final": 1.0
    }"#;

    #[test]
    fn minimal_stability_config_gets_defaults() {
        let c = parse_config(MINIMAL, Command::Stability).unwrap();
        assert_eq!(c.dt, 1e-3);
        assert_eq!(c.margin, 0.10);
        assert_eq!(c.w1_atoms, 1024);
        // support 0.5 + t_final / 2 + 0.5
        assert_eq!(c.vmax, Some(1.5));
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn negative_dt_names_the_field() {
        let text = MINIMAL.replace("\"n\": 256", "\"n\": 256, \"dt\": -0.1");
        let err = parse_config(&text, Command::Stability).unwrap_err();
        assert!(matches!(&err, ConfigError::Invalid { field, .. } if field == "dt"));
        assert!(err.to_string().contains("\"dt\""));
    }

    #[test]
    fn unknown_key_is_rejected_with_suggestion() {
        let text = MINIMAL.replace("\"n\": 256", "\"n\": 256, \"dt_particls\": 0.01");
        let err = parse_config(&text, Command::Stability).unwrap_err();
        match &err {
            ConfigError::UnknownKey {
                key, suggestion, ..
            } => {
                assert_eq!(key, "dt_particls");
                assert!(suggestion.is_some());
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = MINIMAL.replace("\"n\": 256", "\"n\": 256, \"w1_atom\": 12");
        let err = parse_config(&text, Command::Stability).unwrap_err();
        assert!(err.to_string().contains("did you mean \"w1_atoms\""));
    }

    #[test]
    fn nested_unknown_keys_and_kinds() {
        let text = MINIMAL.replace("\"v_half_width\": 0.5", "\"v_half_widht\": 0.5");
        assert!(matches!(
            parse_config(&text, Command::Stability),
            Err(ConfigError::UnknownKey { .. })
        ));
        let text = MINIMAL.replace("uniform_box", "uniform_boxx");
        let err = parse_config(&text, Command::Stability).unwrap_err();
        assert!(err.to_string().contains("uniform_box"));
    }

    #[test]
    fn bad_values_are_rejected() {
        for (patch, field) in [
            ("\"nx\": 0", "nx"),
            ("\"vmax\": 0.6", "vmax"),
            ("\"sample_interval\": 0.3", "sample_interval"),
            ("\"margin\": -1", "margin"),
            (
                "\"kernel\": {\"kind\": \"mollified\", \"epsilon\": 0.7}",
                "kernel",
            ),
            ("\"command\": \"chaos\"", "command"),
        ] {
            let text = MINIMAL
                .replace("\"command\": \"stability\",", "")
                .replace("\"n\": 256", &format!("\"n\": 256, {patch}"));
            let err = parse_config(&text, Command::Stability).unwrap_err();
            assert!(
                matches!(&err, ConfigError::Invalid { field: f, .. } if f == field),
                "{patch}: {err}"
            );
        }
        assert!(matches!(
            parse_config("{\"n\": ", Command::Stability),
            Err(ConfigError::Parse(_))
        ));
        assert!(matches!(
            parse_config("[1, 2]", Command::Stability),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn w1_needs_both_measures() {
        let err = parse_config(r#"{"mu": "a.csv"}"#, Command::W1).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { field, .. } if field == "nu"));
        assert!(parse_config(r#"{"mu": "a.csv", "nu": "b.csv"}"#, Command::W1).is_ok());
    }

    #[test]
    fn perturbed_maxwellian_is_tabulated() {
        let f = F0Config::PerturbedMaxwellian {
            sigma: 0.5,
            vcut: 2.0,
            amplitude: 0.3,
            mode: 1,
            nx: 16,
            nv: 16,
        };
        let d = f.build().unwrap();
        assert_eq!(d.v_support(), 2.0);
    }
}
