//! Scripted studies: the sharp constant and critical mass, the threshold at
//! `c_N^*`, the ground-state energy curve, concentration as `c -> c_N^*`,
//! global existence below the ground state and blow-up above it.

use crate::dynamics::{
    classify_oc, default_time_step, evolve, virial_check, EvolveConfig, EvolutionTrace, Verdict, VirialCheck,
    VirialConfig,
};
use crate::error::{Error, Result};
use crate::functionals::{
    energy_along_dilation, energy_of_triple, multiplier_from_identities, nonlinearity, pohozaev_of_triple, triple,
    weinstein_quotient, ModelParams,
};
use crate::grid::{bilaplacian, dilate, mass_centroid, translate, Field, GridSpec};
use crate::ground_state::{
    self, critical_mass, gaussian_seed, normalized_ground_state, petviashvili, GroundState, LinearSymbol,
    SolverConfig,
};
use crate::random;
use crate::report::{trace_record, trace_table, Record, Report, Table};

#[cfg(feature = "parallel")]
fn par_map<T: Sync, U: Send>(xs: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    xs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, U: Send>(xs: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    xs.iter().map(f).collect()
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn violations(list: Vec<String>) -> Result<()> {
    if list.is_empty() {
        Ok(())
    } else {
        Err(Error::InvariantViolation(list.join("; ")))
    }
}

// ---------------------------------------------------------------------------
// sharp constant

pub const CERTIFICATION_SAMPLES: usize = 200;
pub const CERTIFICATION_SLACK: f64 = 1e-6;

/// Result of sampling the Weinstein quotient against the computed constant.
#[derive(Clone, Debug, PartialEq)]
pub struct Certification {
    pub samples: usize,
    /// Largest `W(f) / B_crit` seen.
    pub max_ratio: f64,
    pub violations: usize,
}

#[derive(Clone, Debug)]
pub struct CriticalConstants {
    pub gamma: f64,
    /// `B_N(4/N) = W(U)`.
    pub b_crit: f64,
    /// `C(N) = (N + 4) / (N B_N(4/N))`.
    pub c_of_n: f64,
    /// `c_N^* = (gamma C(N))^{N/4}`.
    pub c_star: f64,
    /// Solution of `Lap^2 U + U = |U|^{8/N} U`.
    pub extremizer: Field,
    pub unit_mass: f64,
    pub iterations: usize,
    /// Relative defect of `||U||_p^p = B ||U||_2^{8/N} ||Lap U||_2^2`.
    pub identity_residual: f64,
    /// `| ||U||_2^2 - C(N)^{N/4} | / ||U||_2^2`.
    pub mass_defect: f64,
    pub certification: Certification,
}

/// Random test fields for the certification: half band-limited fields on
/// the whole box, half localized perturbations of `base`.
fn certification_field<R: rand::Rng>(i: usize, base: &Field, rng: &mut R) -> Field {
    let grid = base.grid();
    if i % 2 == 0 {
        random::band_limited_field(grid, rng, 1.0)
    } else {
        let size = 1e-3 * (1 + i % 7) as f64 * base.norm_sq();
        let eta = random::localized_field(grid, rng, 2.0, size);
        base.add_scaled(&eta, 1.0).expect("same grid")
    }
}

pub fn compute_gn_constant(
    p: &ModelParams,
    grid: &GridSpec,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<CriticalConstants> {
    let cm = critical_mass(p, grid, cfg)?;
    let n = p.dim as f64;
    let b = cm.b_crit;
    let c_of_n = (n + 4.0) / (n * b);
    let u = &cm.extremizer;
    let t = triple(u, p);
    let lhs: f64 = grid.integrate(&u.values().iter().map(|v| v.norm().powf(p.power())).collect::<Vec<_>>());
    let rhs = b * cm.unit_mass.powf(4.0 / n) * t.lap_sq;

    let mut rng = random::rng_from_seed(seed);
    let mut max_ratio = 0.0f64;
    let mut bad = 0;
    for i in 0..CERTIFICATION_SAMPLES {
        let f = certification_field(i, u, &mut rng);
        let ratio = weinstein_quotient(&f, p)? / b;
        max_ratio = max_ratio.max(ratio);
        if ratio > 1.0 + CERTIFICATION_SLACK {
            bad += 1;
        }
    }
    Ok(CriticalConstants {
        gamma: p.gamma,
        b_crit: b,
        c_of_n,
        c_star: (p.gamma * c_of_n).powf(n / 4.0),
        unit_mass: cm.unit_mass,
        iterations: cm.iterations,
        identity_residual: (lhs - rhs).abs() / lhs,
        mass_defect: (cm.unit_mass - c_of_n.powf(n / 4.0)).abs() / cm.unit_mass,
        extremizer: cm.extremizer,
        certification: Certification {
            samples: CERTIFICATION_SAMPLES,
            max_ratio,
            violations: bad,
        },
    })
}

/// `||U_gamma||_2^2` for the solution of `gamma Lap^2 U + U = |U|^{8/N} U`,
/// solved directly at the given `gamma` rather than by scaling.
pub fn critical_mass_direct(gamma: f64, p: &ModelParams, grid: &GridSpec, cfg: &SolverConfig) -> Result<f64> {
    p.require_mass_critical()?;
    let q = p.with_gamma(gamma);
    q.validate()?;
    let seed = gaussian_seed(grid, 1.0, &q);
    let symbol = LinearSymbol {
        gamma,
        mu: 0.0,
        omega: 1.0,
    };
    Ok(petviashvili(&seed, symbol, p.sigma, cfg)?.field.norm_sq())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingCheck {
    pub gamma: f64,
    pub direct: f64,
    pub predicted: f64,
    pub relative_error: f64,
}

impl CriticalConstants {
    /// Recomputes the critical mass at `factor * gamma` from its own
    /// extremizer equation and compares with `factor^{N/4} c_star`.
    pub fn scaling_check(
        &self,
        factor: f64,
        p: &ModelParams,
        grid: &GridSpec,
        cfg: &SolverConfig,
    ) -> Result<ScalingCheck> {
        let gamma = factor * self.gamma;
        let direct = critical_mass_direct(gamma, p, grid, cfg)?;
        let predicted = factor.powf(p.dim as f64 / 4.0) * self.c_star;
        Ok(ScalingCheck {
            gamma,
            direct,
            predicted,
            relative_error: (direct - predicted).abs() / predicted,
        })
    }

    pub fn check(&self) -> Result<()> {
        let mut v = Vec::new();
        if self.identity_residual > 1e-6 {
            v.push(format!("extremizer identity residual {:.3e}", self.identity_residual));
        }
        if self.certification.violations > 0 {
            v.push(format!(
                "{} sampled fields exceed the constant (max ratio {})",
                self.certification.violations, self.certification.max_ratio
            ));
        }
        violations(v)
    }
}

impl Report for CriticalConstants {
    fn record(&self) -> Record {
        let mut r = Record::new();
        r.num("gamma", self.gamma)
            .num("b_crit", self.b_crit)
            .num("c_of_n", self.c_of_n)
            .num("c_star", self.c_star)
            .num("unit_mass", self.unit_mass)
            .num("mass_defect", self.mass_defect)
            .num("identity_residual", self.identity_residual)
            .int("iterations", self.iterations)
            .int("certification_samples", self.certification.samples)
            .num("certification_max_ratio", self.certification.max_ratio)
            .int("certification_violations", self.certification.violations);
        r
    }
}

// ---------------------------------------------------------------------------
// threshold

pub const THRESHOLD_SAMPLES: usize = 100;
/// Margin below which `E(u) - bound` (relative to the energy terms) counts
/// as a violation.
pub const THRESHOLD_SLACK: f64 = 1e-12;
pub const UNBOUNDED_LEVEL: f64 = -1e3;

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdReport {
    pub c_star: f64,
    pub subcritical_mass: f64,
    pub samples: usize,
    pub violations: usize,
    /// Smallest `(E(u) - bound) / (sum of |energy terms|)` over the samples.
    pub min_margin: f64,
    pub supercritical_mass: f64,
    pub lambda: f64,
    pub energy_at_lambda: f64,
    pub eventually_decreasing: bool,
    /// `1 - (c/c*)^{4/N}` at `c = c*`.
    pub critical_coefficient: f64,
    /// `lambda^2` coefficient of `E(w_lambda)` at `c = c*`, from the triple,
    /// divided by `gamma A / 2`.
    pub direct_coefficient: f64,
}

impl ThresholdReport {
    pub fn check(&self) -> Result<()> {
        let mut v = Vec::new();
        if self.violations > 0 {
            v.push(format!("{} fields below the energy bound", self.violations));
        }
        if !(self.energy_at_lambda < UNBOUNDED_LEVEL && self.eventually_decreasing) {
            v.push(format!("dilation ray reached only E = {}", self.energy_at_lambda));
        }
        if self.critical_coefficient.abs() > 1e-8 || self.direct_coefficient.abs() > 1e-8 {
            v.push(format!(
                "critical coefficient {} / {}",
                self.critical_coefficient, self.direct_coefficient
            ));
        }
        violations(v)
    }
}

impl Report for ThresholdReport {
    fn record(&self) -> Record {
        let mut r = Record::new();
        r.num("c_star", self.c_star)
            .num("subcritical_mass", self.subcritical_mass)
            .int("samples", self.samples)
            .int("violations", self.violations)
            .num("min_margin", self.min_margin)
            .num("supercritical_mass", self.supercritical_mass)
            .num("lambda", self.lambda)
            .num("energy_at_lambda", self.energy_at_lambda)
            .flag("eventually_decreasing", self.eventually_decreasing)
            .num("critical_coefficient", self.critical_coefficient)
            .num("direct_coefficient", self.direct_coefficient);
        r
    }
}

/// `lambda^2` and `lambda` coefficients of `E(u_lambda)` when `sigma N = 4`.
fn critical_ray(u: &Field, p: &ModelParams) -> (f64, f64) {
    let t = triple(u, p);
    (0.5 * p.gamma * t.lap_sq - t.power / p.power(), 0.5 * t.grad_sq)
}

pub fn threshold_experiment(
    p: &ModelParams,
    grid: &GridSpec,
    consts: &CriticalConstants,
    seed: u64,
) -> Result<ThresholdReport> {
    p.require_mass_critical()?;
    if consts.extremizer.grid() != grid {
        return Err(Error::DimensionMismatch(format!(
            "constants computed on {:?}, experiment grid {:?}",
            consts.extremizer.grid(),
            grid
        )));
    }
    let n = p.dim as f64;
    let c_star = consts.c_star;
    let u = &consts.extremizer;

    let c_sub = 0.9 * c_star;
    let mut rng = random::rng_from_seed(seed);
    let mut bad = 0;
    let mut min_margin = f64::INFINITY;
    for i in 0..THRESHOLD_SAMPLES {
        let f = random::with_mass(&certification_field(i, u, &mut rng), c_sub);
        let t = triple(&f, p);
        let e = energy_of_triple(&t, p);
        let bound = crate::functionals::critical_energy_bound(&t, c_sub, c_star, p);
        let scale = 0.5 * p.gamma * t.lap_sq + 0.5 * t.grad_sq + t.power / p.power();
        let margin = (e - bound) / scale;
        min_margin = min_margin.min(margin);
        if margin < -THRESHOLD_SLACK || bound < 0.0 {
            bad += 1;
        }
    }

    let c_sup = 1.1 * c_star;
    let w = u.scale((c_sup / u.norm_sq()).sqrt());
    let tw = triple(&w, p);
    let mut lambda = 1.0;
    let mut e = energy_along_dilation(&tw, lambda, p);
    while e >= UNBOUNDED_LEVEL && lambda < 1e18 {
        lambda *= 2.0;
        e = energy_along_dilation(&tw, lambda, p);
    }
    let (quad, lin) = critical_ray(&w, p);
    let eventually_decreasing = 2.0 * lambda * quad + lin < 0.0 && energy_along_dilation(&tw, 2.0 * lambda, p) < e;

    let w_star = u.scale((c_star / u.norm_sq()).sqrt());
    let (q_star, _) = critical_ray(&w_star, p);
    let a_star = triple(&w_star, p).lap_sq;
    Ok(ThresholdReport {
        c_star,
        subcritical_mass: c_sub,
        samples: THRESHOLD_SAMPLES,
        violations: bad,
        min_margin,
        supercritical_mass: c_sup,
        lambda,
        energy_at_lambda: e,
        eventually_decreasing,
        critical_coefficient: 1.0 - (c_star / c_star).powf(4.0 / n),
        direct_coefficient: q_star / (0.5 * p.gamma * a_star),
    })
}

// ---------------------------------------------------------------------------
// ground-state energy curve

pub const MONOTONE_SLACK: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GammaCurve {
    pub masses: Vec<f64>,
    pub gammas: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Multipliers recomputed from the integral identities.
    pub identity_alphas: Vec<f64>,
    pub pohozaev_residuals: Vec<f64>,
    pub monotone_ok: bool,
    pub strictly_decreasing: bool,
}

impl GammaCurve {
    /// Largest relative gap between the solver multiplier and the identity one.
    pub fn multiplier_agreement(&self) -> f64 {
        self.alphas
            .iter()
            .zip(&self.identity_alphas)
            .map(|(a, b)| (a - b).abs() / a.abs())
            .fold(0.0, f64::max)
    }

    /// Strict decrease is required in one and two dimensions.
    pub fn check(&self, p: &ModelParams) -> Result<()> {
        let mut v = Vec::new();
        if !self.monotone_ok {
            v.push("curve is not nonincreasing".to_string());
        }
        if p.dim <= 2 && !self.strictly_decreasing {
            v.push("curve is not strictly decreasing".to_string());
        }
        if self.gammas.iter().any(|g| !(*g > 0.0)) {
            v.push("nonpositive level".to_string());
        }
        if self.alphas.iter().any(|a| !(*a > 0.0)) {
            v.push("nonpositive multiplier".to_string());
        }
        violations(v)
    }
}

impl Report for GammaCurve {
    fn record(&self) -> Record {
        let mut r = Record::new();
        r.int("points", self.masses.len())
            .flag("monotone_ok", self.monotone_ok)
            .flag("strictly_decreasing", self.strictly_decreasing)
            .num("multiplier_agreement", self.multiplier_agreement());
        r
    }

    fn tables(&self) -> Vec<Table> {
        let mut t = Table::new("gamma_curve", &["mass", "gamma", "alpha", "alpha_identity", "pohozaev_residual"]);
        for i in 0..self.masses.len() {
            t.push(vec![
                self.masses[i],
                self.gammas[i],
                self.alphas[i],
                self.identity_alphas[i],
                self.pohozaev_residuals[i],
            ]);
        }
        vec![t]
    }
}

/// `c_N^* (1 + 2^{-n})` for `n = n_max, ..., 1`, ascending.
pub fn critical_approach_masses(c_star: f64, n_max: u32) -> Vec<f64> {
    (1..=n_max).rev().map(|n| c_star * (1.0 + 0.5f64.powi(n as i32))).collect()
}

pub fn gamma_curve(masses: &[f64], p: &ModelParams, grid: &GridSpec, cfg: &SolverConfig) -> Result<GammaCurve> {
    p.require_ground_state_regime()?;
    cfg.validate()?;
    if masses.is_empty() {
        return Err(Error::Validation(vec!["empty mass list".to_string()]));
    }
    if !masses.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Validation(vec!["masses must be strictly ascending".to_string()]));
    }
    let c0 = ground_state::admissible_mass_floor(p, grid, cfg)?;
    if let Some(&c) = masses.iter().find(|&&c| !(c > c0 * (1.0 + ground_state::MASS_TOLERANCE))) {
        return Err(Error::AtMass {
            mass: c,
            source: Box::new(Error::SubcriticalMass { mass: c, critical: c0 }),
        });
    }
    let states = par_map(masses, |&c| {
        ground_state::shooting(c, p, grid, cfg).map_err(|e| Error::AtMass {
            mass: c,
            source: Box::new(e),
        })
    });
    let mut curve = GammaCurve {
        masses: masses.to_vec(),
        gammas: Vec::new(),
        alphas: Vec::new(),
        identity_alphas: Vec::new(),
        pohozaev_residuals: Vec::new(),
        monotone_ok: true,
        strictly_decreasing: true,
    };
    for (gs, &c) in states.into_iter().zip(masses) {
        let gs = gs?;
        let t = triple(&gs.field, p);
        curve.gammas.push(gs.energy);
        curve.alphas.push(gs.alpha);
        curve.identity_alphas.push(multiplier_from_identities(&t, c, p)?);
        curve.pohozaev_residuals.push(gs.pohozaev_residual);
    }
    curve.monotone_ok = curve
        .gammas
        .windows(2)
        .all(|w| w[1] - w[0] <= MONOTONE_SLACK * w[0].abs());
    curve.strictly_decreasing = strictly_decreasing(&curve.gammas);
    Ok(curve)
}

// ---------------------------------------------------------------------------
// concentration

/// Grid points required across the characteristic width of `u_n`.
pub const MIN_POINTS_PER_WIDTH: f64 = 8.0;

#[derive(Clone, Debug)]
pub struct ConcentrationReport {
    pub c_sequence: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `eps_n` with `eps_n^{-4} = gamma ||Lap u_n||_2^2`.
    pub epsilons: Vec<f64>,
    /// Characteristic width `(gamma eps_n^4 c* N / 4)^{1/4}` of `u_n`.
    pub widths: Vec<f64>,
    /// Mass centroid of `|u_n|^2`, used as the recentering shift.
    pub centroids: Vec<[f64; 2]>,
    pub rescaled_fields: Vec<Field>,
    pub rescaled_masses: Vec<f64>,
    /// `||w_{n+1} - w_n||_2`.
    pub pairwise_l2: Vec<f64>,
    /// `||gamma Lap^2 w + w - |w|^{8/N} w|| / ||w||` at each `w_n`.
    pub limit_residuals: Vec<f64>,
}

impl ConcentrationReport {
    pub fn check(&self) -> Result<()> {
        let mut v = Vec::new();
        if !strictly_decreasing(&self.epsilons) {
            v.push("epsilons not strictly decreasing".to_string());
        }
        if !strictly_decreasing(&self.pairwise_l2) {
            v.push("pairwise distances not strictly decreasing".to_string());
        }
        if !strictly_decreasing(&self.limit_residuals) {
            v.push("limit residuals not strictly decreasing".to_string());
        }
        if let (Some(first), Some(last)) = (self.limit_residuals.first(), self.limit_residuals.last()) {
            if last > &(0.1 * first) {
                v.push(format!("final limit residual {last:.3e} above a tenth of the first {first:.3e}"));
            }
        }
        for (m, c) in self.rescaled_masses.iter().zip(&self.c_sequence) {
            if (m - c).abs() > 1e-8 * c {
                v.push(format!("rescaled mass {m} differs from {c}"));
            }
        }
        violations(v)
    }
}

impl Report for ConcentrationReport {
    fn record(&self) -> Record {
        let mut r = Record::new();
        r.int("n_max", self.c_sequence.len());
        if let (Some(a), Some(b)) = (self.limit_residuals.first(), self.limit_residuals.last()) {
            r.num("residual_ratio", b / a);
        }
        r
    }

    fn tables(&self) -> Vec<Table> {
        let mut t = Table::new(
            "concentration",
            &["n", "mass", "alpha", "epsilon", "width", "centroid_x", "centroid_y", "rescaled_mass", "limit_residual"],
        );
        for i in 0..self.c_sequence.len() {
            t.push(vec![
                (i + 1) as f64,
                self.c_sequence[i],
                self.alphas[i],
                self.epsilons[i],
                self.widths[i],
                self.centroids[i][0],
                self.centroids[i][1],
                self.rescaled_masses[i],
                self.limit_residuals[i],
            ]);
        }
        let mut d = Table::new("pairwise", &["n", "l2_distance"]);
        for (i, x) in self.pairwise_l2.iter().enumerate() {
            d.push(vec![(i + 1) as f64, *x]);
        }
        vec![t, d]
    }
}

fn limit_residual(w: &Field, p: &ModelParams) -> f64 {
    let nl = nonlinearity(w, p.sigma);
    let r = bilaplacian(w)
        .scale(p.gamma)
        .add_scaled(w, 1.0)
        .and_then(|r| r.add_scaled(&nl, -1.0))
        .expect("same grid");
    r.l2_norm() / w.l2_norm()
}

pub fn concentration_study(
    n_max: u32,
    p: &ModelParams,
    grid: &GridSpec,
    cfg: &SolverConfig,
    consts: &CriticalConstants,
) -> Result<ConcentrationReport> {
    p.require_mass_critical()?;
    if n_max < 3 {
        return Err(Error::Validation(vec![format!("n_max = {n_max} must be at least 3")]));
    }
    let n = p.dim as f64;
    let c_star = consts.c_star;
    let mut rep = ConcentrationReport {
        c_sequence: Vec::new(),
        alphas: Vec::new(),
        epsilons: Vec::new(),
        widths: Vec::new(),
        centroids: Vec::new(),
        rescaled_fields: Vec::new(),
        rescaled_masses: Vec::new(),
        pairwise_l2: Vec::new(),
        limit_residuals: Vec::new(),
    };
    for k in 1..=n_max {
        let c = c_star * (1.0 + 0.5f64.powi(k as i32));
        let gs = ground_state::shooting(c, p, grid, cfg).map_err(|e| Error::AtMass {
            mass: c,
            source: Box::new(e),
        })?;
        let t = triple(&gs.field, p);
        let eps = (p.gamma * t.lap_sq).powf(-0.25);
        let s = eps.powi(4) * c_star * n / 4.0;
        let width = (p.gamma * s).powf(0.25);
        if width / grid.dx() < MIN_POINTS_PER_WIDTH {
            return Err(Error::ResolutionLimit(format!(
                "profile width {width:.3e} at n = {k} spans {:.1} grid points (need {MIN_POINTS_PER_WIDTH})",
                width / grid.dx()
            )));
        }
        let y = mass_centroid(&gs.field);
        let centered = translate(&gs.field, y);
        let w = dilate(&centered, s.sqrt())?.field;
        if let Some(prev) = rep.rescaled_fields.last() {
            rep.pairwise_l2.push(w.l2_distance(prev)?);
        }
        rep.c_sequence.push(c);
        rep.alphas.push(gs.alpha);
        rep.epsilons.push(eps);
        rep.widths.push(width);
        rep.centroids.push(y);
        rep.rescaled_masses.push(w.norm_sq());
        rep.limit_residuals.push(limit_residual(&w, p));
        rep.rescaled_fields.push(w);
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// dynamics

/// Step, virial radius and evolution thresholds shared by the dynamics runs.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsSetup {
    /// `None` selects [`default_time_step`].
    pub tau: Option<f64>,
    pub virial: VirialConfig,
    pub evolve: EvolveConfig,
}

impl DynamicsSetup {
    pub fn step(&self, grid: &GridSpec, p: &ModelParams) -> f64 {
        self.tau.unwrap_or_else(|| default_time_step(grid, p))
    }
}

pub const GLOBAL_EXISTENCE_DILATION: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct GlobalExistenceReport {
    pub mass: f64,
    pub lambda: f64,
    pub ground_state_energy: f64,
    pub initial_energy: f64,
    pub initial_q: f64,
    pub initial_in_oc: bool,
    pub min_q: f64,
    /// `sup_t ||Lap psi(t)|| / ||Lap psi_0||`.
    pub bilap_ratio: f64,
    pub trace: EvolutionTrace,
}

impl GlobalExistenceReport {
    pub fn check(&self) -> Result<()> {
        let mut v = Vec::new();
        if !self.initial_in_oc {
            v.push("initial datum outside O_c".to_string());
        }
        if self.trace.verdict != Verdict::Completed {
            v.push(format!("verdict {}", self.trace.verdict.as_str()));
        }
        if !(self.min_q > 0.0) {
            v.push(format!("Q reached {}", self.min_q));
        }
        if !(self.bilap_ratio <= 2.0) {
            v.push(format!("||Lap psi|| grew by {}", self.bilap_ratio));
        }
        violations(v)
    }
}

impl Report for GlobalExistenceReport {
    fn record(&self) -> Record {
        let mut r = Record::new();
        r.num("mass", self.mass)
            .num("lambda", self.lambda)
            .num("ground_state_energy", self.ground_state_energy)
            .num("initial_energy", self.initial_energy)
            .num("initial_q", self.initial_q)
            .flag("initial_in_oc", self.initial_in_oc)
            .num("min_q", self.min_q)
            .num("bilap_ratio", self.bilap_ratio);
        r.0.extend(trace_record(&self.trace).0);
        r
    }

    fn tables(&self) -> Vec<Table> {
        vec![trace_table(&self.trace)]
    }
}

fn dilated_ground_state(
    c: f64,
    lambda: f64,
    p: &ModelParams,
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Result<(GroundState, Field)> {
    let gs = normalized_ground_state(c, p, grid, cfg)?;
    let psi0 = dilate(&gs.field, lambda)?.field;
    Ok((gs, psi0))
}

pub fn global_existence_experiment(
    c: f64,
    lambda: f64,
    p: &ModelParams,
    grid: &GridSpec,
    horizon: f64,
    cfg: &SolverConfig,
    setup: &DynamicsSetup,
) -> Result<GlobalExistenceReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Validation(vec![format!("dilation {lambda} must lie in (0, 1)")]));
    }
    let (gs, psi0) = dilated_ground_state(c, lambda, p, grid, cfg)?;
    let t0 = triple(&psi0, p);
    let trace = evolve(&psi0, horizon, setup.step(grid, p), p, &setup.virial, &setup.evolve)?;
    let b0 = trace.bilap_norm_series[0];
    Ok(GlobalExistenceReport {
        mass: c,
        lambda,
        ground_state_energy: gs.energy,
        initial_energy: energy_of_triple(&t0, p),
        initial_q: pohozaev_of_triple(&t0, p),
        initial_in_oc: classify_oc(&psi0, gs.energy, p),
        min_q: trace.q_series.iter().cloned().fold(f64::INFINITY, f64::min),
        bilap_ratio: trace.bilap_norm_series.iter().cloned().fold(0.0, f64::max) / b0,
        trace,
    })
}

pub const INSTABILITY_DILATION: f64 = 1.05;
pub const REQUIRED_GROWTH: f64 = 10.0;
/// Absolute slack added to the energy drift of the run in the bound
/// `Q(psi(t)) <= -beta + tol`.
pub const Q_ABSOLUTE_SLACK: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct InstabilityReport {
    pub mass: f64,
    pub lambda: f64,
    pub ground_state_energy: f64,
    pub initial_energy: f64,
    pub initial_q: f64,
    /// `E(u_c) - E(psi_0)`.
    pub beta: f64,
    /// Tolerance in `Q(psi(t)) <= -beta + tol`: energy drift of the run plus
    /// [`Q_ABSOLUTE_SLACK`].
    pub q_tolerance: f64,
    /// `max_t Q(psi(t)) + beta`.
    pub q_margin: f64,
    pub growth: f64,
    pub virial: VirialCheck,
    pub trace: EvolutionTrace,
}

impl InstabilityReport {
    pub fn check(&self) -> Result<()> {
        let mut v = Vec::new();
        if !(self.initial_energy < self.ground_state_energy && self.initial_q < 0.0) {
            v.push("perturbation does not lower E and make Q negative".to_string());
        }
        if !(self.beta > 0.0) {
            v.push(format!("beta = {}", self.beta));
        }
        if self.q_margin > self.q_tolerance {
            v.push(format!("Q rose to -beta + {:.3e}", self.q_margin));
        }
        if self.trace.verdict == Verdict::Completed {
            v.push("run completed without blow-up or loss of resolution".to_string());
        }
        if self.growth < REQUIRED_GROWTH {
            v.push(format!("||Lap psi|| grew only {:.2}x", self.growth));
        }
        if !self.virial.holds() {
            v.push(format!("virial bound exceeded by {:.3e}", self.virial.worst_excess()));
        }
        violations(v)
    }
}

impl Report for InstabilityReport {
    fn record(&self) -> Record {
        let mut r = Record::new();
        r.num("mass", self.mass)
            .num("lambda", self.lambda)
            .num("ground_state_energy", self.ground_state_energy)
            .num("initial_energy", self.initial_energy)
            .num("initial_q", self.initial_q)
            .num("beta", self.beta)
            .num("q_tolerance", self.q_tolerance)
            .num("q_margin", self.q_margin)
            .num("growth", self.growth)
            .num("virial_worst_excess", self.virial.worst_excess())
            .flag("virial_holds", self.virial.holds());
        r.0.extend(trace_record(&self.trace).0);
        r
    }

    fn tables(&self) -> Vec<Table> {
        let mut v = Table::new("virial", &["t", "dM_dt", "eight_Q", "budget"]);
        for i in 0..self.virial.times.len() {
            v.push(vec![
                self.virial.times[i],
                self.virial.derivative[i],
                self.virial.eight_q[i],
                self.virial.budget[i],
            ]);
        }
        vec![trace_table(&self.trace), v]
    }
}

pub fn instability_experiment(
    c: f64,
    lambda: f64,
    p: &ModelParams,
    grid: &GridSpec,
    horizon: f64,
    cfg: &SolverConfig,
    setup: &DynamicsSetup,
) -> Result<InstabilityReport> {
    if !(lambda > 1.0) {
        return Err(Error::Validation(vec![format!("dilation {lambda} must exceed 1")]));
    }
    let (gs, psi0) = dilated_ground_state(c, lambda, p, grid, cfg)?;
    let t0 = triple(&psi0, p);
    let e0 = energy_of_triple(&t0, p);
    let trace = evolve(&psi0, horizon, setup.step(grid, p), p, &setup.virial, &setup.evolve)?;
    let beta = gs.energy - e0;
    let q_max = trace.q_series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(InstabilityReport {
        mass: c,
        lambda,
        ground_state_energy: gs.energy,
        initial_energy: e0,
        initial_q: pohozaev_of_triple(&t0, p),
        beta,
        q_tolerance: trace.energy_deviation() + Q_ABSOLUTE_SLACK,
        q_margin: q_max + beta,
        growth: trace.bilap_growth(),
        virial: virial_check(&trace, p, &setup.virial),
        trace,
    })
}
