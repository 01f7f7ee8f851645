//! Flat `key = value` run configuration.
//!
//! A config file holds one assignment per line; `#` starts a comment.
//! Command-line overrides (`--set key=value`) are applied on top, in order.
//! Every diagnostic names the line or override that caused it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use ucgs_core::problem::{InstanceSpec, ObjectiveSpec, SetSpec};
use ucgs_core::ucgs::UcgsOptions;

/// Where a setting came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override(usize),
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override(n) => write!(f, "--set #{n}"),
            Origin::Default => write!(f, "defaults"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: Origin,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(k) => write!(f, "{}: `{k}`: {}", self.origin, self.message),
            None => write!(f, "{}: {}", self.origin, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodKind {
    Cg,
    GugSliding,
    Ucgs,
}

impl MethodKind {
    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::Cg => "cg",
            MethodKind::GugSliding => "gug-sliding",
            MethodKind::Ucgs => "ucgs",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "cg" => Some(MethodKind::Cg),
            "gug-sliding" => Some(MethodKind::GugSliding),
            "ucgs" => Some(MethodKind::Ucgs),
            _ => None,
        }
    }
}

/// Which gap `compare` waits for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapMetric {
    /// The method's own computable certificate.
    Certified,
    /// `f(y) - f*` against the known optimum.
    True,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodParams {
    /// Outer iterations for fixed-budget methods.
    pub n: usize,
    /// Smoothness for `gug-sliding`; `None` takes the instance's analytic values.
    pub nu: Option<f64>,
    pub m_nu: Option<f64>,
    pub epsilon: f64,
    pub sigma: f64,
    pub sigma_cert: Option<f64>,
    pub l0: f64,
    pub eta_scale: f64,
    pub max_outer: usize,
    pub max_lmo_calls: Option<u64>,
    pub target_gap: Option<f64>,
    /// Stop `cg` once its duality certificate reaches this value.
    pub target_certified: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareSpec {
    pub methods: Vec<MethodKind>,
    pub eps_grid: Vec<f64>,
    pub budget: u64,
    pub metric: GapMetric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub instance: InstanceSpec,
    pub method: MethodKind,
    pub params: MethodParams,
    pub compare: CompareSpec,
    pub out: Option<PathBuf>,
    pub timing: bool,
    /// Random feasible points per step for the lower-model check in `certify`.
    pub certify_samples: usize,
}

/// Thirteen values from `1e-1` down to `1e-4`, four per decade.
pub fn default_eps_grid() -> Vec<f64> {
    (0..13).map(|i| 10f64.powf(-1.0 - 0.25 * i as f64)).collect()
}

const KEYS: &[&str] = &[
    "objective", "p", "dim", "rows", "seed", "set", "radius", "lo", "hi", "method", "n", "nu", "m_nu",
    "epsilon", "sigma", "sigma_cert", "l0", "eta_scale", "max_outer", "max_lmo_calls", "target_gap",
    "target_certified",
    "methods", "eps_grid", "budget", "gap", "out", "timing", "certify_samples",
];

struct Entries(BTreeMap<String, (String, Origin)>);

impl Entries {
    fn raw(&self, key: &str) -> Option<(&str, Origin)> {
        self.0.get(key).map(|(v, o)| (v.as_str(), *o))
    }

    fn origin(&self, key: &str) -> Origin {
        self.raw(key).map(|(_, o)| o).unwrap_or(Origin::Default)
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    fn opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, origin)) => v.parse().map(Some).map_err(|_| ConfigError {
                origin,
                key: Some(key.into()),
                message: format!("cannot parse {v:?}"),
            }),
        }
    }

    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError { origin: self.origin(key), key: Some(key.into()), message: message.into() }
    }
}

impl RunConfig {
    /// Parses a config file body and applies `overrides` (`key=value`) in order.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut map: BTreeMap<String, (String, Origin)> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let origin = Origin::Line(i + 1);
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = split_assignment(body, origin)?;
            if let Some((_, first)) = map.get(&k) {
                return Err(ConfigError {
                    origin,
                    key: Some(k),
                    message: format!("already set at {first}"),
                });
            }
            map.insert(k, (v, origin));
        }
        for (i, o) in overrides.iter().enumerate() {
            let origin = Origin::Override(i + 1);
            let (k, v) = split_assignment(o.trim(), origin)?;
            map.insert(k, (v, origin));
        }
        Self::from_entries(Entries(map))
    }

    fn from_entries(e: Entries) -> Result<Self, ConfigError> {
        for (k, (_, origin)) in &e.0 {
            if !KEYS.contains(&k.as_str()) {
                return Err(ConfigError { origin: *origin, key: Some(k.clone()), message: "unknown key".into() });
            }
        }

        let objective = match e.get("objective", "quadratic".to_string())?.as_str() {
            "quadratic" => {
                if e.has("p") {
                    return Err(e.err("p", "only meaningful for objective = pnorm"));
                }
                ObjectiveSpec::Quadratic
            }
            "pnorm" => {
                let p: f64 = e.get("p", 1.5)?;
                if !(p > 1.0 && p < 2.0) {
                    return Err(e.err("p", format!("must lie in (1, 2), got {p}")));
                }
                ObjectiveSpec::PNorm { p }
            }
            other => return Err(e.err("objective", format!("expected quadratic or pnorm, got {other:?}"))),
        };
        let set = match e.get("set", "simplex".to_string())?.as_str() {
            "simplex" => SetSpec::Simplex,
            "l1" => SetSpec::L1Ball { radius: positive(&e, "radius", 1.0)? },
            "l2" => SetSpec::L2Ball { radius: positive(&e, "radius", 1.0)? },
            "box" => {
                let lo: f64 = e.get("lo", -1.0)?;
                let hi: f64 = e.get("hi", 1.0)?;
                if !(lo < hi) {
                    return Err(e.err("hi", format!("box needs lo < hi, got [{lo}, {hi}]")));
                }
                SetSpec::Box { lo, hi }
            }
            other => return Err(e.err("set", format!("expected simplex, l1, l2 or box, got {other:?}"))),
        };
        let dim: usize = e.get("dim", 50)?;
        if dim < 2 {
            return Err(e.err("dim", "must be at least 2"));
        }
        let rows: usize = e.get("rows", 100)?;
        if rows == 0 {
            return Err(e.err("rows", "must be positive"));
        }
        let instance = InstanceSpec { objective, set, dim, rows, seed: e.get("seed", 1)? };

        let method_name: String = e.get("method", "ucgs".to_string())?;
        let method = MethodKind::parse(&method_name)
            .ok_or_else(|| e.err("method", format!("expected cg, gug-sliding or ucgs, got {method_name:?}")))?;

        let params = MethodParams {
            n: e.get("n", 1000)?,
            nu: e.opt("nu")?,
            m_nu: e.opt("m_nu")?,
            epsilon: positive(&e, "epsilon", 1e-3)?,
            sigma: nonnegative(&e, "sigma", 0.0)?,
            sigma_cert: match e.opt::<f64>("sigma_cert")? {
                Some(v) if !(v >= 0.0) => return Err(e.err("sigma_cert", "must be nonnegative")),
                other => other,
            },
            l0: positive(&e, "l0", 1.0)?,
            eta_scale: positive(&e, "eta_scale", 1.0)?,
            max_outer: e.get("max_outer", 1_000_000)?,
            max_lmo_calls: e.opt("max_lmo_calls")?,
            target_gap: e.opt("target_gap")?,
            target_certified: e.opt("target_certified")?,
        };
        if params.n == 0 {
            return Err(e.err("n", "must be positive"));
        }
        match method {
            MethodKind::Ucgs => {
                for key in ["nu", "m_nu"] {
                    if e.has(key) {
                        return Err(e.err(key, "ucgs takes no smoothness parameters"));
                    }
                }
            }
            MethodKind::GugSliding => {
                let nu = params.nu.unwrap_or(instance_nu(&instance));
                if !(nu > 0.0 && nu < 1.0) {
                    let key = if e.has("nu") { "nu" } else { "method" };
                    return Err(e.err(key, format!("gug-sliding needs an exponent in (0, 1), got {nu}")));
                }
                if let Some(m) = params.m_nu {
                    if !(m > 0.0 && m.is_finite()) {
                        return Err(e.err("m_nu", "must be positive"));
                    }
                }
            }
            MethodKind::Cg => {
                for key in ["nu", "m_nu"] {
                    if e.has(key) {
                        return Err(e.err(key, "cg takes no smoothness parameters"));
                    }
                }
            }
        }

        if method != MethodKind::Cg && e.has("target_certified") {
            return Err(e.err("target_certified", "only cg carries a duality certificate"));
        }

        let methods = match e.raw("methods") {
            None => vec![MethodKind::Cg, MethodKind::Ucgs],
            Some((v, _)) => v
                .split(',')
                .map(|s| MethodKind::parse(s.trim()).ok_or_else(|| e.err("methods", format!("unknown method {s:?}"))))
                .collect::<Result<_, _>>()?,
        };
        let eps_grid = match e.raw("eps_grid") {
            None => default_eps_grid(),
            Some((v, _)) => {
                let grid: Vec<f64> = v
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|_| e.err("eps_grid", format!("cannot parse {s:?}"))))
                    .collect::<Result<_, _>>()?;
                if grid.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                    return Err(e.err("eps_grid", "values must be positive"));
                }
                grid
            }
        };
        let metric = match e.get("gap", "certified".to_string())?.as_str() {
            "certified" => GapMetric::Certified,
            "true" => GapMetric::True,
            other => return Err(e.err("gap", format!("expected certified or true, got {other:?}"))),
        };
        let compare = CompareSpec { methods, eps_grid, budget: e.get("budget", 1_000_000)?, metric };

        Ok(Self {
            instance,
            method,
            params,
            compare,
            out: e.opt::<String>("out")?.map(PathBuf::from),
            timing: e.get("timing", false)?,
            certify_samples: e.get("certify_samples", 200)?,
        })
    }

    pub fn ucgs_options(&self) -> UcgsOptions {
        let p = &self.params;
        UcgsOptions {
            epsilon: p.epsilon,
            sigma: p.sigma,
            sigma_cert: p.sigma_cert.unwrap_or(p.sigma),
            l0: p.l0,
            max_outer: p.max_outer,
            max_lmo_calls: p.max_lmo_calls,
            eta_scale: p.eta_scale,
            timing: self.timing,
            ..UcgsOptions::new(p.epsilon)
        }
    }
}

fn instance_nu(spec: &InstanceSpec) -> f64 {
    match spec.objective {
        ObjectiveSpec::Quadratic => 1.0,
        ObjectiveSpec::PNorm { p } => p - 1.0,
    }
}

fn split_assignment(s: &str, origin: Origin) -> Result<(String, String), ConfigError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(ConfigError { origin, key: None, message: format!("expected key = value, got {s:?}") }),
    }
}

fn positive(e: &Entries, key: &str, default: f64) -> Result<f64, ConfigError> {
    let v: f64 = e.get(key, default)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(e.err(key, format!("must be positive, got {v}")));
    }
    Ok(v)
}

fn nonnegative(e: &Entries, key: &str, default: f64) -> Result<f64, ConfigError> {
    let v: f64 = e.get(key, default)?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(e.err(key, format!("must be nonnegative, got {v}")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let c = RunConfig::parse("", &[]).unwrap();
        assert_eq!(c.method, MethodKind::Ucgs);
        assert_eq!(c.instance.dim, 50);
        assert_eq!(c.compare.eps_grid.len(), 13);
        assert!((c.compare.eps_grid[12] - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn overrides_replace_file_values() {
        let c = RunConfig::parse("method = cg\nn = 10 # short\n", &["n=20".into()]).unwrap();
        assert_eq!(c.method, MethodKind::Cg);
        assert_eq!(c.params.n, 20);
    }

    #[test]
    fn sliding_with_unit_exponent_names_the_line() {
        let err = RunConfig::parse("objective = pnorm\nmethod = gug-sliding\nnu = 1\n", &[]).unwrap_err();
        assert_eq!(err.origin, Origin::Line(3));
        assert_eq!(err.key.as_deref(), Some("nu"));
        let err = RunConfig::parse("method = gug-sliding\n", &[]).unwrap_err();
        assert_eq!(err.origin, Origin::Line(1));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(RunConfig::parse("bogus = 1", &[]).unwrap_err().origin, Origin::Line(1));
        assert!(RunConfig::parse("dim = 5\ndim = 6", &[]).is_err());
        assert!(RunConfig::parse("no equals sign", &[]).is_err());
        assert_eq!(RunConfig::parse("", &["epsilon=-1".into()]).unwrap_err().origin, Origin::Override(1));
        assert!(RunConfig::parse("method = ucgs\nnu = 0.5", &[]).is_err());
        assert!(RunConfig::parse("objective = pnorm\np = 2.5", &[]).is_err());
        assert!(RunConfig::parse("methods = cg,frank", &[]).is_err());
    }
}
