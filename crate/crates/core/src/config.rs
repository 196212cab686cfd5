//! Run configuration: a flat `key = value` (or `key: value`) document with
//! dotted namespaces.
//!
//! ```text
//! command = instability
//! model.sigma = 2
//! model.dim = 2
//! model.mass_ratio = 1.3   # multiple of the critical mass
//! grid.extent = 25.6
//! grid.points = 256
//! dynamics.horizon = 3
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::dynamics::EvolveConfig;
use crate::error::{Error, Result};
use crate::functionals::ModelParams;
use crate::grid::GridSpec;
use crate::ground_state::{SolverConfig, SolverTag};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    GnConstant,
    GroundState,
    GammaCurve,
    Evolve,
    GlobalExistence,
    Instability,
    Concentration,
    Threshold,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::GnConstant,
        Command::GroundState,
        Command::GammaCurve,
        Command::Evolve,
        Command::GlobalExistence,
        Command::Instability,
        Command::Concentration,
        Command::Threshold,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::GnConstant => "gn-constant",
            Command::GroundState => "ground-state",
            Command::GammaCurve => "gamma-curve",
            Command::Evolve => "evolve",
            Command::GlobalExistence => "global-existence",
            Command::Instability => "instability",
            Command::Concentration => "concentration",
            Command::Threshold => "threshold",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Command::ALL.iter().copied().find(|c| c.as_str() == s)
    }

    fn needs_critical(&self) -> bool {
        matches!(self, Command::GnConstant | Command::Concentration | Command::Threshold)
    }

    fn needs_mass(&self) -> bool {
        matches!(
            self,
            Command::GroundState | Command::GlobalExistence | Command::Instability
        )
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SeedSpec {
    Gaussian,
    Checkpoint(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub method: SolverTag,
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    pub petviashvili_exponent: Option<f64>,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub scan_points: usize,
    pub seed_profile: SeedSpec,
    pub descent_max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSettings {
            method: SolverTag::PetviashviliShooting,
            max_iterations: d.max_iterations,
            residual_tolerance: d.residual_tolerance,
            petviashvili_exponent: d.petviashvili_exponent,
            alpha_min: d.alpha_bracket.0,
            alpha_max: d.alpha_bracket.1,
            scan_points: d.scan_points,
            seed_profile: SeedSpec::Gaussian,
            descent_max_iterations: d.descent_max_iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsSettings {
    pub horizon: f64,
    pub tau: Option<f64>,
    pub virial_radius: f64,
    /// Dilation applied to the ground state to form the initial datum;
    /// `None` picks the command default.
    pub lambda: Option<f64>,
    /// Initial datum checkpoint for `evolve`.
    pub initial: Option<PathBuf>,
    pub evolve: EvolveConfig,
}

impl Default for DynamicsSettings {
    fn default() -> Self {
        DynamicsSettings {
            horizon: 10.0,
            tau: None,
            virial_radius: 2.0,
            lambda: None,
            initial: None,
            evolve: EvolveConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSettings {
    pub n_max: u32,
    pub masses: Vec<f64>,
    /// Masses as multiples of the critical mass (mass-critical case only).
    pub mass_ratios: Vec<f64>,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            n_max: 4,
            masses: Vec::new(),
            mass_ratios: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Unvalidated model; `mass_target` holds `model.mass`.
    pub model: ModelParams,
    pub mass_ratio: Option<f64>,
    pub extent: f64,
    pub points: usize,
    pub solver: SolverSettings,
    pub dynamics: DynamicsSettings,
    pub experiment: ExperimentSettings,
    pub output_dir: PathBuf,
    pub rng_seed: u64,
}

pub const DEFAULT_EXTENT: f64 = 32.0;
pub const DEFAULT_POINTS: usize = 512;
pub const DEFAULT_SEED: u64 = 20_240_601;

impl RunConfig {
    pub fn new(command: Command, sigma: f64, dim: usize) -> Self {
        RunConfig {
            command,
            model: ModelParams {
                gamma: 1.0,
                sigma,
                dim,
                mass_target: None,
            },
            mass_ratio: None,
            extent: DEFAULT_EXTENT,
            points: DEFAULT_POINTS,
            solver: SolverSettings::default(),
            dynamics: DynamicsSettings::default(),
            experiment: ExperimentSettings::default(),
            output_dir: PathBuf::from("out"),
            rng_seed: DEFAULT_SEED,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.model.dim, self.extent, self.points)
    }

    /// Solver configuration; a checkpoint seed is loaded from disk.
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let s = &self.solver;
        let seed_profile = match &s.seed_profile {
            SeedSpec::Gaussian => crate::ground_state::SeedProfile::Gaussian,
            SeedSpec::Checkpoint(path) => {
                let (f, _) = crate::io::read_checkpoint_on(path, &self.grid()?)?;
                crate::ground_state::SeedProfile::Checkpoint(f)
            }
        };
        Ok(SolverConfig {
            max_iterations: s.max_iterations,
            residual_tolerance: s.residual_tolerance,
            petviashvili_exponent: s.petviashvili_exponent,
            alpha_bracket: (s.alpha_min, s.alpha_max),
            scan_points: s.scan_points,
            seed_profile,
            descent_max_iterations: s.descent_max_iterations,
        })
    }

    /// Every violated constraint, in one list.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if let Err(e) = self.model.validate() {
            v.push(e.to_string());
        }
        if let Err(e) = self.grid() {
            v.push(e.to_string());
        }
        let s = &self.solver;
        let probe = SolverConfig {
            max_iterations: s.max_iterations,
            residual_tolerance: s.residual_tolerance,
            petviashvili_exponent: s.petviashvili_exponent,
            alpha_bracket: (s.alpha_min, s.alpha_max),
            scan_points: s.scan_points,
            seed_profile: crate::ground_state::SeedProfile::Gaussian,
            descent_max_iterations: s.descent_max_iterations,
        };
        if let Err(Error::Validation(list)) = probe.validate() {
            v.extend(list);
        }
        let d = &self.dynamics;
        if let Err(Error::Validation(list)) = d.evolve.validate() {
            v.extend(list);
        }
        if !(d.horizon > 0.0 && d.horizon.is_finite()) {
            v.push(format!("dynamics.horizon = {} must be positive", d.horizon));
        }
        if let Some(t) = d.tau {
            if !(t > 0.0 && t.is_finite()) {
                v.push(format!("dynamics.tau = {t} must be positive"));
            }
        }
        if !(d.virial_radius > 0.0 && d.virial_radius.is_finite()) {
            v.push(format!("dynamics.virial_radius = {} must be positive", d.virial_radius));
        }
        if let Some(l) = d.lambda {
            if !(l > 0.0 && l.is_finite()) {
                v.push(format!("dynamics.lambda = {l} must be positive"));
            }
        }
        if let Some(r) = self.mass_ratio {
            if !(r > 0.0 && r.is_finite()) {
                v.push(format!("model.mass_ratio = {r} must be positive"));
            }
        }
        if self.mass_ratio.is_some() && self.model.mass_target.is_some() {
            v.push("model.mass and model.mass_ratio are exclusive".to_string());
        }
        let critical = (self.model.sigma * self.model.dim as f64 - 4.0).abs() < 1e-12;
        if (self.command.needs_critical() || self.mass_ratio.is_some() || !self.experiment.mass_ratios.is_empty())
            && !critical
        {
            v.push(format!(
                "{} needs sigma * dim = 4 (got {})",
                if self.command.needs_critical() {
                    self.command.as_str()
                } else {
                    "a mass ratio"
                },
                self.model.sigma * self.model.dim as f64
            ));
        }
        if self.command.needs_mass() && self.mass_ratio.is_none() && self.model.mass_target.is_none() {
            v.push(format!("{} needs model.mass or model.mass_ratio", self.command));
        }
        if self.command == Command::Evolve
            && d.initial.is_none()
            && self.mass_ratio.is_none()
            && self.model.mass_target.is_none()
        {
            v.push("evolve needs dynamics.initial, model.mass or model.mass_ratio".to_string());
        }
        if self.command == Command::GammaCurve {
            let n = self.experiment.masses.len() + self.experiment.mass_ratios.len();
            if n == 0 {
                v.push("gamma-curve needs experiment.masses or experiment.mass_ratios".to_string());
            }
            if !self.experiment.masses.is_empty() && !self.experiment.mass_ratios.is_empty() {
                v.push("experiment.masses and experiment.mass_ratios are exclusive".to_string());
            }
            for list in [&self.experiment.masses, &self.experiment.mass_ratios] {
                if !list.windows(2).all(|w| w[0] < w[1]) {
                    v.push("mass list must be strictly ascending".to_string());
                }
                if list.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
                    v.push("masses must be positive".to_string());
                }
            }
        }
        if self.command == Command::Concentration && self.experiment.n_max < 3 {
            v.push(format!("experiment.n_max = {} must be at least 3", self.experiment.n_max));
        }
        if self.output_dir.as_os_str().is_empty() {
            v.push("output_dir is empty".to_string());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Canonical document; parsing it gives back an equal configuration.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        let list = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        put("command", self.command.to_string());
        put("model.gamma", self.model.gamma.to_string());
        put("model.sigma", self.model.sigma.to_string());
        put("model.dim", self.model.dim.to_string());
        if let Some(c) = self.model.mass_target {
            put("model.mass", c.to_string());
        }
        if let Some(r) = self.mass_ratio {
            put("model.mass_ratio", r.to_string());
        }
        put("grid.extent", self.extent.to_string());
        put("grid.points", self.points.to_string());
        let s = &self.solver;
        put("solver.method", s.method.as_str().to_string());
        put("solver.max_iterations", s.max_iterations.to_string());
        put("solver.residual_tolerance", s.residual_tolerance.to_string());
        if let Some(e) = s.petviashvili_exponent {
            put("solver.petviashvili_exponent", e.to_string());
        }
        put("solver.alpha_min", s.alpha_min.to_string());
        put("solver.alpha_max", s.alpha_max.to_string());
        put("solver.scan_points", s.scan_points.to_string());
        put(
            "solver.seed_profile",
            match &s.seed_profile {
                SeedSpec::Gaussian => "gaussian".to_string(),
                SeedSpec::Checkpoint(p) => format!("checkpoint:{}", p.display()),
            },
        );
        put("solver.descent_max_iterations", s.descent_max_iterations.to_string());
        let d = &self.dynamics;
        put("dynamics.horizon", d.horizon.to_string());
        if let Some(t) = d.tau {
            put("dynamics.tau", t.to_string());
        }
        put("dynamics.virial_radius", d.virial_radius.to_string());
        if let Some(l) = d.lambda {
            put("dynamics.lambda", l.to_string());
        }
        if let Some(p) = &d.initial {
            put("dynamics.initial", p.display().to_string());
        }
        let e = &d.evolve;
        put("dynamics.output_interval", e.output_interval.to_string());
        put("dynamics.blowup_factor", e.blowup_factor.to_string());
        put("dynamics.tail_threshold", e.tail_threshold.to_string());
        put("dynamics.tail_cutoff", e.tail_cutoff.to_string());
        put("dynamics.energy_tolerance", e.energy_tolerance.to_string());
        put("dynamics.max_halvings", e.max_halvings.to_string());
        put("experiment.n_max", self.experiment.n_max.to_string());
        if !self.experiment.masses.is_empty() {
            put("experiment.masses", list(&self.experiment.masses));
        }
        if !self.experiment.mass_ratios.is_empty() {
            put("experiment.mass_ratios", list(&self.experiment.mass_ratios));
        }
        put("output_dir", self.output_dir.display().to_string());
        put("rng_seed", self.rng_seed.to_string());
        out
    }
}

/// Bare keys accepted as shorthands.
fn canonical_key(key: &str) -> &str {
    match key {
        "sigma" => "model.sigma",
        "dim" => "model.dim",
        "gamma" => "model.gamma",
        "mass" => "model.mass",
        "mass_ratio" => "model.mass_ratio",
        "extent" | "L" => "grid.extent",
        "points" | "M" => "grid.points",
        "seed" => "rng_seed",
        "output" => "output_dir",
        k => k,
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn split_line(line: &str) -> Option<(&str, &str)> {
    let eq = line.find('=');
    let colon = line.find(':');
    let at = match (eq, colon) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return None,
    };
    Some((line[..at].trim(), line[at + 1..].trim()))
}

fn collect(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_line(line).ok_or_else(|| Error::Parse {
            line: i + 1,
            key: line.to_string(),
            message: "expected `key = value` or `key: value`".to_string(),
        })?;
        if k.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                key: String::new(),
                message: "empty key".to_string(),
            });
        }
        let key = canonical_key(k).to_string();
        if map.contains_key(&key) {
            return Err(Error::Parse {
                line: i + 1,
                key,
                message: "duplicate key".to_string(),
            });
        }
        map.insert(
            key,
            Entry {
                line: i + 1,
                value: v.to_string(),
            },
        );
    }
    Ok(map)
}

struct Reader {
    map: BTreeMap<String, Entry>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.map.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| Error::Parse {
                line: e.line,
                key: key.to_string(),
                message: format!("cannot parse `{}`", e.value),
            }),
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|_| Error::Parse {
                        line: e.line,
                        key: key.to_string(),
                        message: format!("cannot parse `{s}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[])
}

/// Like [`parse_config`], with `(key, value)` overrides applied on top of
/// the document (command-line flags).
pub fn parse_config_with(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut map = collect(text)?;
    for (k, v) in overrides {
        map.insert(
            canonical_key(k).to_string(),
            Entry {
                line: 0,
                value: v.clone(),
            },
        );
    }
    let mut r = Reader { map };
    let command = match r.take("command") {
        None => {
            return Err(Error::Parse {
                line: 0,
                key: "command".to_string(),
                message: "missing".to_string(),
            })
        }
        Some(e) => Command::parse(&e.value).ok_or_else(|| Error::Parse {
            line: e.line,
            key: "command".to_string(),
            message: format!("unknown command `{}`", e.value),
        })?,
    };
    let sigma = r.parse("model.sigma")?.ok_or_else(|| Error::Parse {
        line: 0,
        key: "model.sigma".to_string(),
        message: "missing".to_string(),
    })?;
    let dim = r.parse("model.dim")?.ok_or_else(|| Error::Parse {
        line: 0,
        key: "model.dim".to_string(),
        message: "missing".to_string(),
    })?;
    let mut cfg = RunConfig::new(command, sigma, dim);
    if let Some(g) = r.parse("model.gamma")? {
        cfg.model.gamma = g;
    }
    cfg.model.mass_target = r.parse("model.mass")?;
    cfg.mass_ratio = r.parse("model.mass_ratio")?;
    if let Some(x) = r.parse("grid.extent")? {
        cfg.extent = x;
    }
    if let Some(x) = r.parse("grid.points")? {
        cfg.points = x;
    }

    let s = &mut cfg.solver;
    if let Some(e) = r.take("solver.method") {
        s.method = SolverTag::parse(&e.value).ok_or_else(|| Error::Parse {
            line: e.line,
            key: "solver.method".to_string(),
            message: format!("unknown solver `{}`", e.value),
        })?;
    }
    if let Some(x) = r.parse("solver.max_iterations")? {
        s.max_iterations = x;
    }
    if let Some(x) = r.parse("solver.residual_tolerance")? {
        s.residual_tolerance = x;
    }
    if let Some(x) = r.parse("solver.petviashvili_exponent")? {
        s.petviashvili_exponent = Some(x);
    }
    if let Some(x) = r.parse("solver.alpha_min")? {
        s.alpha_min = x;
    }
    if let Some(x) = r.parse("solver.alpha_max")? {
        s.alpha_max = x;
    }
    if let Some(x) = r.parse("solver.scan_points")? {
        s.scan_points = x;
    }
    if let Some(e) = r.take("solver.seed_profile") {
        s.seed_profile = if e.value == "gaussian" {
            SeedSpec::Gaussian
        } else if let Some(path) = e.value.strip_prefix("checkpoint:") {
            SeedSpec::Checkpoint(PathBuf::from(path.trim()))
        } else {
            return Err(Error::Parse {
                line: e.line,
                key: "solver.seed_profile".to_string(),
                message: format!("expected `gaussian` or `checkpoint:<path>`, got `{}`", e.value),
            });
        };
    }
    if let Some(x) = r.parse("solver.descent_max_iterations")? {
        s.descent_max_iterations = x;
    }

    let d = &mut cfg.dynamics;
    if let Some(x) = r.parse("dynamics.horizon")? {
        d.horizon = x;
    }
    d.tau = r.parse("dynamics.tau")?;
    if let Some(x) = r.parse("dynamics.virial_radius")? {
        d.virial_radius = x;
    }
    d.lambda = r.parse("dynamics.lambda")?;
    d.initial = r.take("dynamics.initial").map(|e| PathBuf::from(e.value));
    let e = &mut d.evolve;
    if let Some(x) = r.parse("dynamics.output_interval")? {
        e.output_interval = x;
    }
    if let Some(x) = r.parse("dynamics.blowup_factor")? {
        e.blowup_factor = x;
    }
    if let Some(x) = r.parse("dynamics.tail_threshold")? {
        e.tail_threshold = x;
    }
    if let Some(x) = r.parse("dynamics.tail_cutoff")? {
        e.tail_cutoff = x;
    }
    if let Some(x) = r.parse("dynamics.energy_tolerance")? {
        e.energy_tolerance = x;
    }
    if let Some(x) = r.parse("dynamics.max_halvings")? {
        e.max_halvings = x;
    }

    if let Some(x) = r.parse("experiment.n_max")? {
        cfg.experiment.n_max = x;
    }
    if let Some(x) = r.list("experiment.masses")? {
        cfg.experiment.masses = x;
    }
    if let Some(x) = r.list("experiment.mass_ratios")? {
        cfg.experiment.mass_ratios = x;
    }
    if let Some(e) = r.take("output_dir") {
        cfg.output_dir = PathBuf::from(e.value);
    }
    if let Some(x) = r.parse("rng_seed")? {
        cfg.rng_seed = x;
    }

    if let Some((key, e)) = r.map.into_iter().next() {
        return Err(Error::Parse {
            line: e.line,
            key,
            message: "unknown key".to_string(),
        });
    }
    cfg.validate()?;
    Ok(cfg)
}
