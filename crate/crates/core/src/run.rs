//! Dispatch of a [`RunConfig`] to the experiment it names, with every
//! artifact written under the output directory.
//!
//! Each run leaves `report.txt`, one CSV per table, field checkpoints and a
//! `manifest.txt` (configuration echo, version, grid, seed, wall time and
//! file list). A failed run additionally leaves `error.txt`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{Command, RunConfig};
use crate::dynamics::{evolve, virial_check, VirialConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    self, compute_gn_constant, concentration_study, gamma_curve, global_existence_experiment,
    instability_experiment, threshold_experiment, DynamicsSetup,
};
use crate::functionals::ModelParams;
use crate::grid::{dilate, Field, GridSpec};
use crate::ground_state::{self, minimax_descent, normalized_ground_state, SolverConfig, SolverTag};
use crate::io;
use crate::report::{Record, Report, Table};

/// Outcome of [`run`].
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub error: Option<Error>,
    pub wall_seconds: f64,
}

struct Artifacts<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Artifacts<'_> {
    fn report(&mut self, rec: &Record, tables: &[Table]) -> Result<()> {
        let p = self.dir.join("report.txt");
        io::write_record(rec, &p)?;
        self.files.push(p);
        for t in tables {
            let p = self.dir.join(format!("{}.csv", t.name));
            io::write_csv(t, &p)?;
            self.files.push(p);
        }
        Ok(())
    }

    fn emit(&mut self, rep: &dyn Report, extra: Record) -> Result<()> {
        let mut rec = rep.record();
        rec.0.extend(extra.0);
        self.report(&rec, &rep.tables())
    }

    fn checkpoint(&mut self, name: &str, f: &Field, p: &ModelParams) -> Result<()> {
        let path = self.dir.join(name);
        io::write_checkpoint(f, p.gamma, p.sigma, &path)?;
        self.files.push(path);
        Ok(())
    }

    fn record(&mut self, name: &str, rec: &Record) -> Result<()> {
        let path = self.dir.join(name);
        io::write_record(rec, &path)?;
        self.files.push(path);
        Ok(())
    }
}

fn setup(cfg: &RunConfig) -> Result<DynamicsSetup> {
    Ok(DynamicsSetup {
        tau: cfg.dynamics.tau,
        virial: VirialConfig::new(cfg.dynamics.virial_radius)?,
        evolve: cfg.dynamics.evolve.clone(),
    })
}

/// Target mass: `model.mass`, or `model.mass_ratio` times the critical mass.
fn resolve_mass(cfg: &RunConfig, p: &ModelParams, grid: &GridSpec, scfg: &SolverConfig) -> Result<f64> {
    if let Some(c) = p.mass_target {
        return Ok(c);
    }
    let r = cfg
        .mass_ratio
        .ok_or_else(|| Error::Validation(vec!["no mass given".to_string()]))?;
    Ok(r * ground_state::critical_mass(p, grid, scfg)?.c_star)
}

fn dispatch(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let p = cfg.model;
    p.validate()?;
    let grid = cfg.grid()?;
    let scfg = cfg.solver_config()?;
    let seed = cfg.rng_seed;
    match cfg.command {
        Command::GnConstant => {
            let k = compute_gn_constant(&p, &grid, &scfg, seed)?;
            let sc = k.scaling_check(2.0, &p, &grid, &scfg)?;
            let mut extra = Record::new();
            extra
                .num("scaling_gamma", sc.gamma)
                .num("scaling_direct", sc.direct)
                .num("scaling_predicted", sc.predicted)
                .num("scaling_relative_error", sc.relative_error);
            art.emit(&k, extra)?;
            art.checkpoint("extremizer.bin", &k.extremizer, &p.with_gamma(1.0))?;
            k.check()
        }
        Command::Threshold => {
            let k = compute_gn_constant(&p, &grid, &scfg, seed)?;
            let th = threshold_experiment(&p, &grid, &k, seed.wrapping_add(1))?;
            let sub = normalized_ground_state(k.c_star, &p, &grid, &scfg);
            let mut extra = Record::new();
            extra.flag("subcritical_rejected", matches!(sub, Err(Error::SubcriticalMass { .. })));
            art.emit(&th, extra)?;
            th.check()
        }
        Command::GroundState => {
            let c = resolve_mass(cfg, &p, &grid, &scfg)?;
            let gs = match cfg.solver.method {
                SolverTag::PetviashviliShooting => normalized_ground_state(c, &p, &grid, &scfg)?,
                SolverTag::MinimaxDescent => minimax_descent(c, &p, &grid, &scfg)?,
            };
            let ids = gs.identity_residuals(&p);
            let mut rec = io::ground_state_record(&gs, &p);
            rec.num("nehari_residual", ids.nehari).num("identity_p_residual", ids.pohozaev_p);
            rec.num("identity_q_residual", ids.pohozaev_q);
            art.report(&rec, &[])?;
            let written = io::write_ground_state(&gs, &p, art.dir, "ground_state")?;
            art.files.extend(written);
            gs.check_invariants(&p)
        }
        Command::GammaCurve => {
            let masses = if cfg.experiment.masses.is_empty() {
                let cs = ground_state::critical_mass(&p, &grid, &scfg)?.c_star;
                cfg.experiment.mass_ratios.iter().map(|r| r * cs).collect()
            } else {
                cfg.experiment.masses.clone()
            };
            let curve = gamma_curve(&masses, &p, &grid, &scfg)?;
            art.emit(&curve, Record::new())?;
            curve.check(&p)
        }
        Command::Concentration => {
            let k = compute_gn_constant(&p, &grid, &scfg, seed)?;
            let rep = concentration_study(cfg.experiment.n_max, &p, &grid, &scfg, &k)?;
            art.emit(&rep, Record::new())?;
            for (i, w) in rep.rescaled_fields.iter().enumerate() {
                art.checkpoint(&format!("rescaled_{}.bin", i + 1), w, &p)?;
            }
            rep.check()
        }
        Command::GlobalExistence => {
            let c = resolve_mass(cfg, &p, &grid, &scfg)?;
            let lambda = cfg.dynamics.lambda.unwrap_or(experiments::GLOBAL_EXISTENCE_DILATION);
            let rep = global_existence_experiment(c, lambda, &p, &grid, cfg.dynamics.horizon, &scfg, &setup(cfg)?)?;
            art.emit(&rep, Record::new())?;
            finish_trace(art, &rep.trace.final_field, rep.trace.verdict.as_str(), &p)?;
            rep.check()
        }
        Command::Instability => {
            let c = resolve_mass(cfg, &p, &grid, &scfg)?;
            let lambda = cfg.dynamics.lambda.unwrap_or(experiments::INSTABILITY_DILATION);
            let rep = instability_experiment(c, lambda, &p, &grid, cfg.dynamics.horizon, &scfg, &setup(cfg)?)?;
            art.emit(&rep, Record::new())?;
            finish_trace(art, &rep.trace.final_field, rep.trace.verdict.as_str(), &p)?;
            rep.check()
        }
        Command::Evolve => {
            let st = setup(cfg)?;
            let psi0 = match &cfg.dynamics.initial {
                Some(path) => io::read_checkpoint_on(path, &grid)?.0,
                None => {
                    let c = resolve_mass(cfg, &p, &grid, &scfg)?;
                    normalized_ground_state(c, &p, &grid, &scfg)?.field
                }
            };
            let psi0 = match cfg.dynamics.lambda {
                Some(l) if l != 1.0 => dilate(&psi0, l)?.field,
                _ => psi0,
            };
            let trace = evolve(&psi0, cfg.dynamics.horizon, st.step(&grid, &p), &p, &st.virial, &st.evolve)?;
            let vc = virial_check(&trace, &p, &st.virial);
            let mut extra = Record::new();
            extra
                .num("virial_worst_excess", vc.worst_excess())
                .flag("virial_holds", vc.holds());
            art.emit(&trace, extra)?;
            finish_trace(art, &trace.final_field, trace.verdict.as_str(), &p)
        }
    }
}

fn finish_trace(art: &mut Artifacts, f: &Field, verdict: &str, p: &ModelParams) -> Result<()> {
    art.checkpoint("final.bin", f, p)?;
    let mut side = Record::new();
    side.text("verdict", verdict)
        .num("mass", f.norm_sq())
        .num("gamma", p.gamma)
        .num("sigma", p.sigma)
        .int("dim", p.dim);
    art.record("final.txt", &side)
}

fn manifest(cfg: &RunConfig, out: &RunOutcome) -> Record {
    let mut m = Record::new();
    m.text("package", env!("CARGO_PKG_NAME"))
        .text("version", env!("CARGO_PKG_VERSION"))
        .text("command", cfg.command.as_str())
        .int("rng_seed", cfg.rng_seed as usize)
        .int("grid_dim", cfg.model.dim)
        .int("grid_points", cfg.points)
        .num("grid_extent", cfg.extent)
        .flag("parallel", cfg!(feature = "parallel"))
        .num("wall_seconds", out.wall_seconds)
        .int("exit_code", out.exit_code as usize);
    if let Some(e) = &out.error {
        m.text("error_category", &e.category().to_string());
    }
    for (i, f) in out.files.iter().enumerate() {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        m.text(&format!("file.{i}"), &name);
    }
    for line in cfg.serialize().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            m.text(&format!("config.{k}"), v);
        }
    }
    m
}

/// Runs the configured command. Never panics on bad input; the exit code is
/// 0 on success and the error category code otherwise.
pub fn run(cfg: &RunConfig) -> RunOutcome {
    let start = Instant::now();
    let dir = cfg.output_dir.as_path();
    let mut art = Artifacts {
        dir,
        files: Vec::new(),
    };
    let result = cfg
        .validate()
        .and_then(|_| fs::create_dir_all(dir).map_err(Error::from))
        .and_then(|_| dispatch(cfg, &mut art));
    let mut out = RunOutcome {
        exit_code: 0,
        files: art.files,
        error: None,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    if let Err(e) = result {
        out.exit_code = e.exit_code();
        let mut rec = Record::new();
        rec.text("category", &e.category().to_string()).text("message", &e.to_string());
        let p = dir.join("error.txt");
        if io::write_record(&rec, &p).is_ok() {
            out.files.push(p);
        }
        out.error = Some(e);
    }
    let m = manifest(cfg, &out);
    let p = dir.join("manifest.txt");
    if io::write_record(&m, &p).is_ok() {
        out.files.push(p);
    }
    out
}
