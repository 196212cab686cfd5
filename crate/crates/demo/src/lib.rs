//! Browser front end for three one-dimensional computations: a normalized
//! ground-state profile, the ground-state energy curve and an evolution
//! trace of a dilated ground state.
//!
//! The plain functions do the work and are usable natively; the
//! `wasm_bindgen` wrappers only marshal arrays.

use binls::dynamics::{default_time_step, evolve, EvolveConfig, VirialConfig};
use binls::experiments::gamma_curve;
use binls::grid::dilate;
use binls::ground_state::{critical_mass, normalized_ground_state, SolverConfig};
use binls::{GridSpec, ModelParams, Result};
use wasm_bindgen::prelude::*;

pub const DEMO_EXTENT: f64 = 64.0;
pub const DEMO_POINTS: usize = 1024;

fn setup(gamma: f64, sigma: f64) -> Result<(ModelParams, GridSpec)> {
    Ok((
        ModelParams::new(gamma, sigma, 1)?,
        GridSpec::new(1, DEMO_EXTENT, DEMO_POINTS)?,
    ))
}

/// Mass `c = ratio * c*` in the mass-critical case, `c = ratio` otherwise.
fn mass_from_ratio(ratio: f64, p: &ModelParams, grid: &GridSpec, cfg: &SolverConfig) -> Result<f64> {
    if p.is_mass_critical() {
        Ok(ratio * critical_mass(p, grid, cfg)?.c_star)
    } else {
        Ok(ratio)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileData {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub mass: f64,
    pub alpha: f64,
    pub energy: f64,
    pub pohozaev_residual: f64,
}

pub fn profile(gamma: f64, sigma: f64, ratio: f64) -> Result<ProfileData> {
    let (p, grid) = setup(gamma, sigma)?;
    let cfg = SolverConfig::default();
    let c = mass_from_ratio(ratio, &p, &grid, &cfg)?;
    let gs = normalized_ground_state(c, &p, &grid, &cfg)?;
    Ok(ProfileData {
        x: grid.axis_nodes(),
        u: gs.field.values().iter().map(|v| v.re).collect(),
        mass: gs.mass,
        alpha: gs.alpha,
        energy: gs.energy,
        pohozaev_residual: gs.pohozaev_residual,
    })
}

/// `(mass, Gamma, alpha)` triples, flattened.
pub fn curve(gamma: f64, sigma: f64, ratios: &[f64]) -> Result<Vec<f64>> {
    let (p, grid) = setup(gamma, sigma)?;
    let cfg = SolverConfig::default();
    let masses = ratios
        .iter()
        .map(|r| mass_from_ratio(*r, &p, &grid, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let g = gamma_curve(&masses, &p, &grid, &cfg)?;
    Ok((0..g.masses.len())
        .flat_map(|i| [g.masses[i], g.gammas[i], g.alphas[i]])
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceData {
    pub t: Vec<f64>,
    pub bilap: Vec<f64>,
    pub q: Vec<f64>,
    pub energy: Vec<f64>,
    pub verdict: String,
}

/// Evolves `(u_c)_lambda` to `horizon`.
pub fn trace(gamma: f64, sigma: f64, ratio: f64, lambda: f64, horizon: f64) -> Result<TraceData> {
    let (p, grid) = setup(gamma, sigma)?;
    let cfg = SolverConfig::default();
    let c = mass_from_ratio(ratio, &p, &grid, &cfg)?;
    let gs = normalized_ground_state(c, &p, &grid, &cfg)?;
    let psi0 = dilate(&gs.field, lambda)?.field;
    let ecfg = EvolveConfig {
        output_interval: horizon / 200.0,
        max_halvings: 4,
        ..Default::default()
    };
    let tr = evolve(
        &psi0,
        horizon,
        default_time_step(&grid, &p),
        &p,
        &VirialConfig::new(4.0)?,
        &ecfg,
    )?;
    Ok(TraceData {
        t: tr.times.clone(),
        bilap: tr.bilap_norm_series.clone(),
        q: tr.q_series.clone(),
        energy: tr.energy_series.clone(),
        verdict: tr.verdict.as_str().to_string(),
    })
}

fn js_err(e: binls::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen]
pub struct Profile(ProfileData);

#[wasm_bindgen]
impl Profile {
    pub fn x(&self) -> Vec<f64> {
        self.0.x.clone()
    }
    pub fn u(&self) -> Vec<f64> {
        self.0.u.clone()
    }
    pub fn mass(&self) -> f64 {
        self.0.mass
    }
    pub fn alpha(&self) -> f64 {
        self.0.alpha
    }
    pub fn energy(&self) -> f64 {
        self.0.energy
    }
    pub fn pohozaev_residual(&self) -> f64 {
        self.0.pohozaev_residual
    }
}

#[wasm_bindgen]
pub struct Trace(TraceData);

#[wasm_bindgen]
impl Trace {
    pub fn t(&self) -> Vec<f64> {
        self.0.t.clone()
    }
    pub fn bilap(&self) -> Vec<f64> {
        self.0.bilap.clone()
    }
    pub fn q(&self) -> Vec<f64> {
        self.0.q.clone()
    }
    pub fn energy(&self) -> Vec<f64> {
        self.0.energy.clone()
    }
    pub fn verdict(&self) -> String {
        self.0.verdict.clone()
    }
}

#[wasm_bindgen]
pub fn ground_state_profile(gamma: f64, sigma: f64, ratio: f64) -> std::result::Result<Profile, JsValue> {
    profile(gamma, sigma, ratio).map(Profile).map_err(js_err)
}

#[wasm_bindgen]
pub fn energy_curve(gamma: f64, sigma: f64, ratios: Vec<f64>) -> std::result::Result<Vec<f64>, JsValue> {
    curve(gamma, sigma, &ratios).map_err(js_err)
}

#[wasm_bindgen]
pub fn evolution_trace(
    gamma: f64,
    sigma: f64,
    ratio: f64,
    lambda: f64,
    horizon: f64,
) -> std::result::Result<Trace, JsValue> {
    trace(gamma, sigma, ratio, lambda, horizon).map(Trace).map_err(js_err)
}
