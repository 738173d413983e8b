//! Run configuration in a strict INI dialect.
//!
//! ```text
//! [model]
//! J = 1
//! Delta = 1
//! mu = critical        # or a number
//! L = 40000
//! range = short        # or long, with phi = ..., alpha = ... (alpha defaults to inf)
//!
//! [bath]
//! gamma = 0.01
//! delta = 1            # default 1
//! s = 1                # default 1
//! lambda_c = inf       # default inf
//!
//! [protocol]
//! Ti_grid = logspace(0.01, 100, 9)
//! v_over_gamma_grid = 0.081, 0.81, 8.1, 81
//! eta = 1              # default 1
//! Tf = 0               # default 0
//!
//! [run]
//! solver = exact       # ode | exact | both; default exact when eta = 1, else ode
//! tol = 1e-8
//! quad_tol = 1e-10
//! workers = 4
//! out = sweep.csv
//! seed = 0             # accepted and ignored
//! ```
//!
//! Grids are comma-separated lists, `logspace(a, b, n)` or `linspace(a, b, n)`
//! with inclusive endpoints given as values. Unknown sections or keys,
//! repeated keys and missing required entries are errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::model::{ChainModel, LowEnergyParams, Range};
use crate::ramp::{RampProtocol, DEFAULT_QUAD_TOL, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverChoice {
    Ode,
    Exact,
    Both,
}

impl std::str::FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ode" => Ok(SolverChoice::Ode),
            "exact" => Ok(SolverChoice::Exact),
            "both" => Ok(SolverChoice::Both),
            other => Err(Error::invalid(format!("unknown solver '{other}', expected ode, exact or both"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ChainModel,
    pub bath: BathSpec,
    pub ti_grid: Vec<f64>,
    pub v_over_gamma_grid: Vec<f64>,
    pub eta: f64,
    pub t_f: f64,
    pub solver: SolverChoice,
    pub tol: f64,
    pub quad_tol: f64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    /// Reserved; the dynamics is deterministic.
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Protocol for one grid point.
    pub fn protocol(&self, t_i: f64, v_over_gamma: f64) -> Result<RampProtocol> {
        RampProtocol::new(t_i, self.t_f, v_over_gamma * self.bath.gamma(), self.eta)
    }

    /// Checks the invariants that tie sections together.
    pub fn validate(&self) -> Result<()> {
        if self.ti_grid.is_empty() || self.v_over_gamma_grid.is_empty() {
            return Err(Error::invalid("grids must be nonempty"));
        }
        for &t_i in &self.ti_grid {
            for &vg in &self.v_over_gamma_grid {
                self.protocol(t_i, vg)?;
            }
        }
        if !(self.tol > 0.0) || !(self.quad_tol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers must be at least 1"));
        }
        if self.solver != SolverChoice::Ode && self.eta != 1.0 {
            return Err(Error::invalid(format!(
                "the exact solver needs a linear ramp, got eta = {}; use solver = ode",
                self.eta
            )));
        }
        if !self.bath.is_power_law() {
            let max = self.model.mode_energies().into_iter().fold(0.0, f64::max);
            self.bath.check_cutoff(max)?;
        }
        Ok(())
    }
}

/// Rejects models outside the domain of the noncritical asymptotics.
pub fn require_positive_curvature(model: &ChainModel) -> Result<(f64, f64)> {
    match model.low_energy_params() {
        Ok(LowEnergyParams::Gapped { lambda0, lambda1 }) => Ok((lambda0, lambda1)),
        Ok(LowEnergyParams::Critical { .. }) => {
            Err(Error::invalid("noncritical asymptotics need mu away from its critical value"))
        }
        Err(e) => Err(Error::invalid(format!("noncritical asymptotics need lambda1 > 0: {e}"))),
    }
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn required(&mut self, name: &str, key: &str) -> Result<(String, usize)> {
        self.take(key).ok_or_else(|| Error::Config {
            line: self.line,
            message: format!("[{name}] is missing required key '{key}'"),
        })
    }

    fn unused(&self) -> Option<(&str, usize)> {
        self.entries.iter().find(|(_, e)| !e.used).map(|(k, e)| (k.as_str(), e.line))
    }
}

const SECTIONS: [(&str, &[&str]); 4] = [
    ("model", &["J", "Delta", "mu", "L", "range", "phi", "alpha"]),
    ("bath", &["gamma", "delta", "s", "lambda_c"]),
    ("protocol", &["Ti_grid", "v_over_gamma_grid", "eta", "Tf"]),
    ("run", &["solver", "tol", "quad_tol", "workers", "out", "seed"]),
];

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| config_err(line, format!("malformed section header '{content}'")))?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(config_err(line, format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(config_err(line, format!("section [{name}] appears twice")));
            }
            sections.insert(name.to_string(), Section { line, entries: BTreeMap::new() });
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_err(line, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let name = current.as_deref().ok_or_else(|| config_err(line, "key outside of any section"))?;
        let allowed = SECTIONS.iter().find(|(s, _)| *s == name).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(config_err(line, format!("unknown key '{key}' in [{name}]")));
        }
        if value.is_empty() {
            return Err(config_err(line, format!("key '{key}' has no value")));
        }
        let section = sections.get_mut(name).expect("current section exists");
        if section.entries.contains_key(key) {
            return Err(config_err(line, format!("key '{key}' repeated in [{name}]")));
        }
        section.entries.insert(key.to_string(), Entry { value: value.to_string(), line, used: false });
    }
    Ok(sections)
}

fn number(value: &str, line: usize, key: &str) -> Result<f64> {
    let v: f64 = value.parse().map_err(|_| config_err(line, format!("'{key}' expects a number, got '{value}'")))?;
    if v.is_nan() {
        return Err(config_err(line, format!("'{key}' is NaN")));
    }
    Ok(v)
}

fn count(value: &str, line: usize, key: &str) -> Result<usize> {
    let v = number(value, line, key)?;
    if !(v >= 0.0) || v.fract() != 0.0 || v > 1e15 {
        return Err(config_err(line, format!("'{key}' expects a non-negative integer, got '{value}'")));
    }
    Ok(v as usize)
}

/// Parses a grid: `a, b, c`, `logspace(a, b, n)` or `linspace(a, b, n)`.
pub fn parse_grid(value: &str) -> std::result::Result<Vec<f64>, String> {
    let value = value.trim();
    let spaced = ["logspace", "linspace"].iter().find_map(|f| {
        value
            .strip_prefix(f)
            .map(|rest| (*f, rest.trim()))
            .and_then(|(f, rest)| rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).map(|inner| (f, inner)))
    });
    let grid = if let Some((kind, inner)) = spaced {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("{kind} takes (start, stop, count), got '{value}'"));
        }
        let a: f64 = parts[0].parse().map_err(|_| format!("bad start '{}'", parts[0]))?;
        let b: f64 = parts[1].parse().map_err(|_| format!("bad stop '{}'", parts[1]))?;
        let n: usize = parts[2].parse().map_err(|_| format!("bad count '{}'", parts[2]))?;
        if n == 0 || n > 100_000 {
            return Err(format!("grid count must be in 1..=100000, got {n}"));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(format!("{kind} endpoints must be finite"));
        }
        if n == 1 {
            vec![a]
        } else if kind == "logspace" {
            if !(a > 0.0) || !(b > 0.0) {
                return Err("logspace endpoints must be positive".to_string());
            }
            let (la, lb) = (a.ln(), b.ln());
            let mut g: Vec<f64> = (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect();
            g[0] = a;
            g[n - 1] = b;
            g
        } else {
            let mut g: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
            g[n - 1] = b;
            g
        }
    } else {
        value
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad grid entry '{}'", p.trim())))
            .collect::<std::result::Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err("grid is empty".to_string());
    }
    if grid.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err("grid values must be positive and finite".to_string());
    }
    Ok(grid)
}

fn opt(section: &mut Section, key: &str, default: f64) -> Result<f64> {
    match section.take(key) {
        Some((v, l)) => number(&v, l, key),
        None => Ok(default),
    }
}

fn grid(value: &str, line: usize, key: &str) -> Result<Vec<f64>> {
    parse_grid(value).map_err(|m| config_err(line, format!("'{key}': {m}")))
}

fn at(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Config { .. } => e,
        other => config_err(line, other.to_string()),
    }
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut sections = tokenize(text)?;
    let end = text.lines().count() + 1;
    for name in ["model", "bath", "protocol"] {
        if !sections.contains_key(name) {
            return Err(config_err(end, format!("missing required section [{name}]")));
        }
    }
    let mut run = sections.remove("run").unwrap_or(Section { line: end, entries: BTreeMap::new() });
    let mut m = sections.remove("model").expect("checked");
    let mut b = sections.remove("bath").expect("checked");
    let mut p = sections.remove("protocol").expect("checked");

    let (v, l) = m.required("model", "J")?;
    let j = number(&v, l, "J")?;
    let (v, l) = m.required("model", "Delta")?;
    let delta = number(&v, l, "Delta")?;
    let (v, l) = m.required("model", "L")?;
    let sites = count(&v, l, "L")?;
    let range = match m.take("range") {
        None => "short".to_string(),
        Some((v, _)) => v,
    };
    let range = match range.as_str() {
        "short" => {
            if let Some((_, l)) = m.take("phi").or_else(|| m.take("alpha")) {
                return Err(config_err(l, "phi/alpha only apply to range = long"));
            }
            Range::ShortRange
        }
        "long" => {
            let (v, l) = m.required("model", "phi")?;
            let phi = number(&v, l, "phi")?;
            let alpha = match m.take("alpha") {
                Some((v, l)) => number(&v, l, "alpha")?,
                None => f64::INFINITY,
            };
            Range::LongRange { phi, alpha }
        }
        other => return Err(config_err(m.line, format!("range must be short or long, got '{other}'"))),
    };
    let (mu_text, mu_line) = m.required("model", "mu")?;
    let model = ChainModel::new(j, delta, 0.0, sites, range).map_err(at(m.line))?;
    let model = if mu_text == "critical" {
        model.at_critical_point()
    } else {
        model.with_mu(number(&mu_text, mu_line, "mu")?).map_err(at(mu_line))?
    };

    let (v, l) = b.required("bath", "gamma")?;
    let gamma = number(&v, l, "gamma")?;
    let bath_delta = opt(&mut b, "delta", 1.0)?;
    let s = opt(&mut b, "s", 1.0)?;
    let lambda_c = opt(&mut b, "lambda_c", f64::INFINITY)?;
    let bath = BathSpec::with_cutoff(gamma, bath_delta, s, lambda_c).map_err(at(b.line))?;

    let (v, l) = p.required("protocol", "Ti_grid")?;
    let ti_grid = grid(&v, l, "Ti_grid")?;
    let (v, l) = p.required("protocol", "v_over_gamma_grid")?;
    let v_over_gamma_grid = grid(&v, l, "v_over_gamma_grid")?;
    let eta = opt(&mut p, "eta", 1.0)?;
    let t_f = opt(&mut p, "Tf", 0.0)?;

    let solver = match run.take("solver") {
        Some((v, l)) => v.parse().map_err(at(l))?,
        None if eta == 1.0 => SolverChoice::Exact,
        None => SolverChoice::Ode,
    };
    let tol = opt(&mut run, "tol", DEFAULT_TOL)?;
    let quad_tol = opt(&mut run, "quad_tol", DEFAULT_QUAD_TOL)?;
    let workers = match run.take("workers") {
        Some((v, l)) => count(&v, l, "workers")?,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let out = run.take("out").map(|(v, _)| PathBuf::from(v));
    let seed = match run.take("seed") {
        Some((v, l)) => {
            Some(v.parse::<u64>().map_err(|_| config_err(l, format!("'seed' expects an integer, got '{v}'")))?)
        }
        None => None,
    };

    for section in [&m, &b, &p, &run] {
        if let Some((key, line)) = section.unused() {
            return Err(config_err(line, format!("key '{key}' is not used with these settings")));
        }
    }

    let cfg =
        RunConfig { model, bath, ti_grid, v_over_gamma_grid, eta, t_f, solver, tol, quad_tol, workers, out, seed };
    cfg.validate().map_err(at(p.line))?;
    Ok(cfg)
}

/// Renders a configuration back to the file format.
pub fn render_config(cfg: &RunConfig) -> String {
    let model = &cfg.model;
    let mut text =
        format!("[model]\nJ = {}\nDelta = {}\nmu = {}\nL = {}\n", model.j(), model.delta(), model.mu(), model.sites());
    if let Range::LongRange { phi, alpha } = model.range() {
        text += &format!("range = long\nphi = {phi}\nalpha = {alpha}\n");
    }
    let bath = &cfg.bath;
    text += &format!(
        "\n[bath]\ngamma = {}\ndelta = {}\ns = {}\nlambda_c = {}\n",
        bath.gamma(),
        bath.delta(),
        bath.s(),
        bath.lambda_c()
    );
    let list = |g: &[f64]| g.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(", ");
    text += &format!(
        "\n[protocol]\nTi_grid = {}\nv_over_gamma_grid = {}\neta = {}\nTf = {}\n",
        list(&cfg.ti_grid),
        list(&cfg.v_over_gamma_grid),
        cfg.eta,
        cfg.t_f
    );
    let solver = match cfg.solver {
        SolverChoice::Ode => "ode",
        SolverChoice::Exact => "exact",
        SolverChoice::Both => "both",
    };
    text += &format!(
        "\n[run]\nsolver = {solver}\ntol = {}\nquad_tol = {}\nworkers = {}\n",
        cfg.tol, cfg.quad_tol, cfg.workers
    );
    if let Some(out) = &cfg.out {
        text += &format!("out = {}\n", out.display());
    }
    if let Some(seed) = cfg.seed {
        text += &format!("seed = {seed}\n");
    }
    text
}
