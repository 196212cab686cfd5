//! Normalized ground states by two independent routes.
//!
//! * Petviashvili shooting: solve `gamma Lap^2 u - Lap u + alpha u = |u|^{2s} u`
//!   at fixed `alpha`, then root-find `alpha` so that the mass hits `c`.
//! * Minimax descent: minimize `F(u) = max_lambda E(u_lambda)` over the mass
//!   sphere with a preconditioned tangential gradient and backtracking.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::{
    self, dilation_profile, energy_of_triple, multiplier_from_identities, nonlinearity,
    pohozaev_of_triple, triple, IdentityResiduals, ModelParams,
    ScalarTriple,
};
use crate::grid::{dilate, Field, GridSpec, SpectralField};
use crate::random::with_mass;

#[derive(Clone, Debug)]
pub enum SeedProfile {
    Gaussian,
    /// Seed taken from a loaded checkpoint.
    Checkpoint(Field),
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Relative stationary-equation residual at which iterations stop.
    pub residual_tolerance: f64,
    /// Petviashvili stabilizing exponent; `None` selects `p/(p-1)` with
    /// `p = 2 sigma + 1`.
    pub petviashvili_exponent: Option<f64>,
    /// Range scanned for the multiplier before root finding.
    pub alpha_bracket: (f64, f64),
    pub scan_points: usize,
    pub seed_profile: SeedProfile,
    /// Iteration cap for the minimax descent.
    pub descent_max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 20_000,
            residual_tolerance: 1e-10,
            petviashvili_exponent: None,
            alpha_bracket: (0.05, 200.0),
            scan_points: 16,
            seed_profile: SeedProfile::Gaussian,
            descent_max_iterations: 20_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.residual_tolerance > 0.0) {
            problems.push("residual_tolerance must be positive".to_string());
        }
        let (lo, hi) = self.alpha_bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            problems.push(format!("alpha bracket ({lo}, {hi}) must be positive and ordered"));
        }
        if self.scan_points < 2 {
            problems.push("scan_points must be at least 2".to_string());
        }
        if self.max_iterations == 0 || self.descent_max_iterations == 0 {
            problems.push("iteration caps must be positive".to_string());
        }
        if let Some(e) = self.petviashvili_exponent {
            if !(e > 0.0 && e.is_finite()) {
                problems.push(format!("petviashvili exponent {e} must be positive"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

/// Which route produced a [`GroundState`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverTag {
    PetviashviliShooting,
    MinimaxDescent,
}

impl SolverTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverTag::PetviashviliShooting => "petviashvili_shooting",
            SolverTag::MinimaxDescent => "minimax_descent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "petviashvili_shooting" => Some(SolverTag::PetviashviliShooting),
            "minimax_descent" => Some(SolverTag::MinimaxDescent),
            _ => None,
        }
    }
}

/// Thresholds every accepted ground state must meet.
pub const POHOZAEV_TOLERANCE: f64 = 1e-6;
pub const MULTIPLIER_TOLERANCE: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct GroundState {
    pub field: Field,
    pub alpha: f64,
    pub mass: f64,
    pub energy: f64,
    /// `|Q(u)| / (gamma ||Lap u||^2)`.
    pub pohozaev_residual: f64,
    pub solver_tag: SolverTag,
    pub iterations: usize,
    /// Number of disjoint multiplier brackets that contained the mass.
    pub brackets: usize,
}

impl GroundState {
    pub fn triple(&self, p: &ModelParams) -> ScalarTriple {
        triple(&self.field, p)
    }

    /// Nehari and Pohozaev identities with `mu = 1`, `omega = alpha`, `d = 1`.
    pub fn identity_residuals(&self, p: &ModelParams) -> IdentityResiduals {
        functionals::identity_residuals(&self.triple(p), self.mass, 1.0, self.alpha, 1.0, p)
    }

    /// Checks the four invariants of a converged ground state.
    pub fn check_invariants(&self, p: &ModelParams) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.pohozaev_residual <= POHOZAEV_TOLERANCE) {
            problems.push(format!("Pohozaev residual {:.3e}", self.pohozaev_residual));
        }
        if !(self.alpha > 0.0) {
            problems.push(format!("multiplier {} not positive", self.alpha));
        }
        if !(self.energy > 0.0) {
            problems.push(format!("energy {} not positive", self.energy));
        }
        let t = self.triple(p);
        match multiplier_from_identities(&t, self.mass, p) {
            Ok(a) if (a - self.alpha).abs() <= MULTIPLIER_TOLERANCE * self.alpha.abs() => {}
            Ok(a) => problems.push(format!(
                "identity multiplier {a} differs from solver multiplier {}",
                self.alpha
            )),
            Err(e) => problems.push(e.to_string()),
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvariantViolation(problems.join("; ")))
        }
    }
}

/// Symbol `gamma |k|^4 + mu |k|^2 + omega` of the linear part.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LinearSymbol {
    pub gamma: f64,
    pub mu: f64,
    pub omega: f64,
}

impl LinearSymbol {
    #[inline]
    fn at(&self, k2: f64) -> f64 {
        self.gamma * k2 * k2 + self.mu * k2 + self.omega
    }
}

/// Projects transform coefficients onto real fields, and onto fields even
/// under `x -> -x` when `even` is set.
fn project_spectrum(grid: &GridSpec, coeffs: &mut [Complex64], even: bool) {
    let n = coeffs.len();
    let orig = coeffs.to_vec();
    for i in 0..n {
        let j = grid.mirror_index(i);
        coeffs[i] = if even {
            Complex64::new(0.5 * (orig[i].re + orig[j].re), 0.0)
        } else {
            0.5 * (orig[i] + orig[j].conj())
        };
    }
}

fn is_even(f: &Field) -> bool {
    let scale = f.max_abs();
    let g = f.grid();
    (0..g.len()).all(|i| (f.values()[i] - f.values()[g.mirror_index(i)]).norm() <= 1e-12 * scale)
}

/// Fixed-multiplier solve outcome.
#[derive(Clone, Debug)]
pub struct FixedPointSolution {
    pub field: Field,
    pub iterations: usize,
    pub residual: f64,
}

/// Petviashvili iteration for `L u = |u|^{2 sigma} u`, iterating on the
/// transform coefficients so that the residual is not polluted by
/// round-off amplified through the `|k|^4` symbol.
pub(crate) fn petviashvili(
    seed: &Field,
    symbol: LinearSymbol,
    sigma: f64,
    cfg: &SolverConfig,
) -> Result<FixedPointSolution> {
    let grid = seed.grid().clone();
    if seed.max_abs() == 0.0 {
        return Err(Error::ZeroSeed);
    }
    if !(symbol.omega > 0.0) {
        return Err(Error::InvalidModel(format!(
            "multiplier {} must be positive",
            symbol.omega
        )));
    }
    let exponent = cfg.petviashvili_exponent.unwrap_or_else(|| {
        let p = 2.0 * sigma + 1.0;
        p / (p - 1.0)
    });
    let even = is_even(seed);
    let lsym: Vec<f64> = grid.k_squared().iter().map(|&k2| symbol.at(k2)).collect();
    let mut spec: Vec<Complex64> = seed.forward().coefficients().to_vec();
    project_spectrum(&grid, &mut spec, even);
    let mut residual = f64::INFINITY;
    for it in 0..=cfg.max_iterations {
        let u = SpectralField::new(&grid, spec.clone())?.inverse().real_part();
        let mass = u.norm_sq();
        if !(mass > 1e-12) {
            return Err(Error::DivergedToZero);
        }
        if !u.is_finite() {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: f64::NAN,
            });
        }
        let mut nl = nonlinearity(&u, sigma).forward().coefficients().to_vec();
        project_spectrum(&grid, &mut nl, even);
        let mut num = 0.0;
        let mut den = 0.0;
        let mut res2 = 0.0;
        let mut norm2 = 0.0;
        for ((s, n), l) in spec.iter().zip(&nl).zip(&lsym) {
            num += l * s.norm_sqr();
            den += (s.conj() * n).re;
            res2 += (s * l - n).norm_sqr();
            norm2 += s.norm_sqr();
        }
        residual = (res2 / norm2).sqrt();
        if residual <= cfg.residual_tolerance {
            return Ok(FixedPointSolution {
                field: u,
                iterations: it,
                residual,
            });
        }
        if it == cfg.max_iterations {
            break;
        }
        if !(den > 0.0) {
            return Err(Error::DivergedToZero);
        }
        let factor = (num / den).powf(exponent);
        for ((s, n), l) in spec.iter_mut().zip(&nl).zip(&lsym) {
            *s = n * (factor / l);
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        residual,
    })
}

/// Gaussian seed `a exp(-|x|^2 / (2 w^2))` with `w = (gamma/alpha)^{1/4}`.
pub fn gaussian_seed(grid: &GridSpec, alpha: f64, p: &ModelParams) -> Field {
    let w = (p.gamma / alpha).powf(0.25);
    let a = alpha.powf(0.5 / p.sigma);
    let s = 0.5 / (w * w);
    Field::from_real_fn(grid, |[x, y]| a * (-(x * x + y * y) * s).exp())
}

fn model_symbol(alpha: f64, p: &ModelParams) -> LinearSymbol {
    LinearSymbol {
        gamma: p.gamma,
        mu: 1.0,
        omega: alpha,
    }
}

/// Solves the stationary equation at fixed multiplier `alpha`.
pub fn solve_fixed_multiplier(
    alpha: f64,
    p: &ModelParams,
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Result<Field> {
    let seed = match &cfg.seed_profile {
        SeedProfile::Gaussian => gaussian_seed(grid, alpha, p),
        SeedProfile::Checkpoint(f) => {
            if f.grid() != grid {
                return Err(Error::DimensionMismatch(format!(
                    "seed on {:?}, solver on {:?}",
                    f.grid(),
                    grid
                )));
            }
            f.clone()
        }
    };
    solve_fixed_multiplier_from(&seed, alpha, p, cfg).map(|s| s.field)
}

pub fn solve_fixed_multiplier_from(
    seed: &Field,
    alpha: f64,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Result<FixedPointSolution> {
    p.validate()?;
    petviashvili(seed, model_symbol(alpha, p), p.sigma, cfg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub alpha: f64,
    pub mass: f64,
    pub energy: f64,
}

/// Mass and energy of fixed-multiplier solutions, continuation-seeded in
/// ascending `alpha` order. Output order matches the input.
pub fn mass_curve(
    alphas: &[f64],
    p: &ModelParams,
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Vec<Result<CurvePoint>> {
    mass_curve_with_fields(alphas, p, grid, cfg)
        .into_iter()
        .map(|r| r.map(|(pt, _)| pt))
        .collect()
}

fn mass_curve_with_fields(
    alphas: &[f64],
    p: &ModelParams,
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Vec<Result<(CurvePoint, Field)>> {
    let mut order: Vec<usize> = (0..alphas.len()).collect();
    order.sort_by(|&a, &b| alphas[a].partial_cmp(&alphas[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<Option<Result<(CurvePoint, Field)>>> = (0..alphas.len()).map(|_| None).collect();
    let mut previous: Option<Field> = None;
    let mut last: Option<(f64, Result<(CurvePoint, Field)>)> = None;
    for idx in order {
        let alpha = alphas[idx];
        if let Some((a, Ok(r))) = &last {
            if *a == alpha {
                out[idx] = Some(Ok(r.clone()));
                continue;
            }
        }
        let result = if !(alpha > 0.0) {
            Err(Error::InvalidModel(format!("multiplier {alpha} must be positive")))
        } else {
            let seed = match (&previous, &cfg.seed_profile) {
                (Some(f), _) => f.clone(),
                (None, SeedProfile::Checkpoint(f)) => f.clone(),
                (None, SeedProfile::Gaussian) => gaussian_seed(grid, alpha, p),
            };
            solve_fixed_multiplier_from(&seed, alpha, p, cfg).map(|s| {
                let t = triple(&s.field, p);
                let pt = CurvePoint {
                    alpha,
                    mass: s.field.norm_sq(),
                    energy: energy_of_triple(&t, p),
                };
                (pt, s.field)
            })
        };
        if let Ok((pt, f)) = &result {
            previous = Some(f.clone());
            last = Some((alpha, Ok((pt.clone(), f.clone()))));
        }
        out[idx] = Some(result);
    }
    out.into_iter().map(|r| r.expect("every slot filled")).collect()
}

/// Extremizer of the sharp Gagliardo–Nirenberg inequality at `sigma = 4/N`
/// and the associated critical mass.
#[derive(Clone, Debug)]
pub struct CriticalMass {
    /// Solution of `Lap^2 U + U = |U|^{8/N} U`.
    pub extremizer: Field,
    /// `||U||_2^2`, the critical mass at `gamma = 1`.
    pub unit_mass: f64,
    /// `c_N^* = gamma^{N/4} ||U||_2^2` for the model's `gamma`.
    pub c_star: f64,
    /// `W(U)`, the sharp constant `B_N(4/N)`.
    pub b_crit: f64,
    pub iterations: usize,
}

pub fn critical_mass(p: &ModelParams, grid: &GridSpec, cfg: &SolverConfig) -> Result<CriticalMass> {
    p.require_mass_critical()?;
    let unit = ModelParams {
        gamma: 1.0,
        ..*p
    };
    let seed = gaussian_seed(grid, 1.0, &unit);
    let symbol = LinearSymbol {
        gamma: 1.0,
        mu: 0.0,
        omega: 1.0,
    };
    let sol = petviashvili(&seed, symbol, p.sigma, cfg)?;
    let unit_mass = sol.field.norm_sq();
    let b_crit = functionals::weinstein_quotient(&sol.field, p)?;
    Ok(CriticalMass {
        extremizer: sol.field,
        unit_mass,
        c_star: p.gamma.powf(p.dim as f64 / 4.0) * unit_mass,
        b_crit,
        iterations: sol.iterations,
    })
}

/// Lower end `c_0` of the admissible masses: the critical mass when
/// `sigma N = 4`, zero otherwise.
pub fn admissible_mass_floor(p: &ModelParams, grid: &GridSpec, cfg: &SolverConfig) -> Result<f64> {
    if p.is_mass_critical() {
        Ok(critical_mass(p, grid, cfg)?.c_star)
    } else {
        Ok(0.0)
    }
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

struct Sample {
    alpha: f64,
    mass: f64,
    field: Field,
    iterations: usize,
}

fn sample_at(alpha: f64, seed: &Field, p: &ModelParams, cfg: &SolverConfig) -> Result<Sample> {
    let sol = solve_fixed_multiplier_from(seed, alpha, p, cfg)?;
    Ok(Sample {
        alpha,
        mass: sol.field.norm_sq(),
        iterations: sol.iterations,
        field: sol.field,
    })
}

/// Bracketed Illinois iteration in `ln alpha` on `mass(alpha) - c`.
fn refine_bracket(c: f64, a: Sample, b: Sample, p: &ModelParams, cfg: &SolverConfig) -> Result<Sample> {
    let target = 1e-12 * c;
    let mut a = a;
    let mut b = b;
    let mut fa = a.mass - c;
    let mut fb = b.mass - c;
    let mut iterations = a.iterations + b.iterations;
    if fa.abs() <= target {
        return Ok(a);
    }
    if fb.abs() <= target {
        return Ok(b);
    }
    for _ in 0..80 {
        let (xa, xb) = (a.alpha.ln(), b.alpha.ln());
        let mut x = xb - fb * (xb - xa) / (fb - fa);
        if !x.is_finite() || x <= xa.min(xb) || x >= xa.max(xb) {
            x = 0.5 * (xa + xb);
        }
        let seed = if (x - xa).abs() < (x - xb).abs() { &a.field } else { &b.field };
        let s = sample_at(x.exp(), seed, p, cfg)?;
        iterations += s.iterations;
        let fs = s.mass - c;
        if fs.abs() <= target || (xb - xa).abs() < 1e-15 {
            return Ok(Sample { iterations, ..s });
        }
        if fs * fb < 0.0 {
            a = std::mem::replace(&mut b, s);
            fa = fb;
        } else {
            b = s;
            fa *= 0.5;
        }
        fb = fs;
    }
    let best = if fa.abs() < fb.abs() { a } else { b };
    Ok(Sample { iterations, ..best })
}

/// Mass matching tolerance of the shooting route.
pub const MASS_TOLERANCE: f64 = 1e-8;

fn describe_ground_state(
    field: Field,
    alpha: f64,
    p: &ModelParams,
    tag: SolverTag,
    iterations: usize,
    brackets: usize,
) -> GroundState {
    let t = triple(&field, p);
    let q = pohozaev_of_triple(&t, p);
    GroundState {
        mass: field.norm_sq(),
        energy: energy_of_triple(&t, p),
        pohozaev_residual: q.abs() / (p.gamma * t.lap_sq),
        field,
        alpha,
        solver_tag: tag,
        iterations,
        brackets,
    }
}

/// Ground state at mass `c` by Petviashvili shooting on the multiplier.
pub fn normalized_ground_state(
    c: f64,
    p: &ModelParams,
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Result<GroundState> {
    p.require_ground_state_regime()?;
    cfg.validate()?;
    if p.is_mass_critical() {
        let crit = critical_mass(p, grid, cfg)?;
        // masses this close to c* are not distinguishable from it by shooting
        if c <= crit.c_star * (1.0 + MASS_TOLERANCE) {
            return Err(Error::SubcriticalMass {
                mass: c,
                critical: crit.c_star,
            });
        }
    }
    shooting(c, p, grid, cfg)
}

/// Shooting without the subcritical-mass guard; callers that already
/// know `c_0` use this directly.
pub(crate) fn shooting(c: f64, p: &ModelParams, grid: &GridSpec, cfg: &SolverConfig) -> Result<GroundState> {
    let (mut lo, mut hi) = cfg.alpha_bracket;
    let mut samples: Vec<Sample> = Vec::new();
    let mut extensions = 0;
    loop {
        let alphas = log_space(lo, hi, cfg.scan_points);
        let scanned = mass_curve_with_fields(&alphas, p, grid, cfg);
        for (alpha, r) in alphas.iter().zip(scanned) {
            if samples.iter().any(|s| s.alpha == *alpha) {
                continue;
            }
            if let Ok((pt, field)) = r {
                samples.push(Sample {
                    alpha: *alpha,
                    mass: pt.mass,
                    field,
                    iterations: 0,
                });
            }
        }
        samples.sort_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap());
        let straddles = samples.windows(2).any(|w| (w[0].mass - c) * (w[1].mass - c) <= 0.0);
        if straddles || extensions >= 4 || samples.is_empty() {
            break;
        }
        extensions += 1;
        let all_above = samples.iter().all(|s| s.mass > c);
        let ratio = (hi / lo).max(10.0);
        if all_above {
            lo = hi;
            hi *= ratio;
        } else {
            hi = lo;
            lo /= ratio;
        }
    }
    if samples.is_empty() {
        return Err(Error::BracketNotFound {
            mass: c,
            alpha_lo: lo,
            alpha_hi: hi,
            mass_lo: f64::NAN,
            mass_hi: f64::NAN,
        });
    }
    let mut pairs = Vec::new();
    for i in 0..samples.len() - 1 {
        if (samples[i].mass - c) * (samples[i + 1].mass - c) <= 0.0 {
            pairs.push(i);
        }
    }
    if pairs.is_empty() {
        let mass_lo = samples.iter().map(|s| s.mass).fold(f64::INFINITY, f64::min);
        let mass_hi = samples.iter().map(|s| s.mass).fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::BracketNotFound {
            mass: c,
            alpha_lo: samples[0].alpha,
            alpha_hi: samples[samples.len() - 1].alpha,
            mass_lo,
            mass_hi,
        });
    }
    let brackets = pairs.len();
    let mut best: Option<GroundState> = None;
    let mut rejected: Option<Error> = None;
    for i in pairs {
        let a = Sample {
            alpha: samples[i].alpha,
            mass: samples[i].mass,
            field: samples[i].field.clone(),
            iterations: 0,
        };
        let b = Sample {
            alpha: samples[i + 1].alpha,
            mass: samples[i + 1].mass,
            field: samples[i + 1].field.clone(),
            iterations: 0,
        };
        let s = refine_bracket(c, a, b, p, cfg)?;
        if (s.mass - c).abs() > MASS_TOLERANCE * c {
            continue;
        }
        let gs = describe_ground_state(
            s.field,
            s.alpha,
            p,
            SolverTag::PetviashviliShooting,
            s.iterations,
            brackets,
        );
        // constant states and box-limited profiles land here
        if let Err(e) = gs.check_invariants(p) {
            rejected = Some(e);
            continue;
        }
        if best.as_ref().is_none_or(|b| gs.energy < b.energy) {
            best = Some(gs);
        }
    }
    best.ok_or(rejected.unwrap_or(Error::NonConvergence {
        iterations: cfg.max_iterations,
        residual: f64::NAN,
    }))
}

/// Outcome of [`minimax_descent`], including the accepted `F` values.
#[derive(Clone, Debug)]
pub struct MinimaxOutcome {
    pub ground_state: GroundState,
    pub f_log: Vec<f64>,
    pub projected_gradient: f64,
}

/// Round-off slack, relative to the sum of the magnitudes of the three energy
/// terms, allowed between consecutive accepted values of `F` once the
/// predicted decrease is below what double precision can resolve.
pub const DESCENT_ROUNDOFF_SLACK: f64 = 16.0 * f64::EPSILON;

fn energy_scale(t: &ScalarTriple, p: &ModelParams) -> f64 {
    0.5 * p.gamma * t.lap_sq + 0.5 * t.grad_sq + t.power / p.power()
}

/// The finiteness condition for the fibering maximum at `sigma N = 4`.
pub fn within_critical_domain(t: &ScalarTriple, p: &ModelParams) -> bool {
    !p.is_mass_critical() || p.gamma * t.lap_sq < t.power / (p.sigma + 1.0)
}

pub fn minimax_descent(c: f64, p: &ModelParams, grid: &GridSpec, cfg: &SolverConfig) -> Result<GroundState> {
    minimax_descent_logged(c, p, grid, cfg).map(|o| o.ground_state)
}

pub fn minimax_descent_logged(
    c: f64,
    p: &ModelParams,
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Result<MinimaxOutcome> {
    p.require_ground_state_regime()?;
    cfg.validate()?;
    let seed = match &cfg.seed_profile {
        SeedProfile::Gaussian => Field::from_real_fn(grid, |[x, y]| (-0.5 * (x * x + y * y)).exp()),
        SeedProfile::Checkpoint(f) => {
            if f.grid() != grid {
                return Err(Error::DimensionMismatch(format!(
                    "seed on {:?}, solver on {:?}",
                    f.grid(),
                    grid
                )));
            }
            f.clone()
        }
    };
    if seed.max_abs() == 0.0 {
        return Err(Error::ZeroSeed);
    }
    let even = is_even(&seed);
    let u0 = with_mass(&seed.real_part(), c);
    let t0 = triple(&u0, p);
    if !within_critical_domain(&t0, p) {
        return Err(Error::SeedOutsideDomain);
    }
    let (mut v, mut current_f) = match onto_manifold(&u0, c, p, even)? {
        Some(x) => x,
        None => return Err(Error::SeedOutsideDomain),
    };
    let g = p.gamma;
    let vol = grid.cell_volume() / grid.len() as f64;
    let mut current_scale = energy_scale(&triple(&v, p), p);
    let mut f_log = vec![current_f];
    let mut step = 1.0f64;
    let mut last_pg = f64::INFINITY;
    for it in 0..=cfg.descent_max_iterations {
        let vs = v.forward().coefficients().to_vec();
        let mut ns = nonlinearity(&v, p.sigma).forward().coefficients().to_vec();
        project_spectrum(grid, &mut ns, even);
        let k2 = grid.k_squared();

        // alpha = -<grad E(v), v> / c
        let mut inner_gv = 0.0;
        let mut vv = 0.0;
        for ((s, n), &k) in vs.iter().zip(&ns).zip(k2) {
            let lin = s * (g * k * k + k);
            inner_gv += (s.conj() * (lin - n)).re;
            vv += s.norm_sqr();
        }
        let alpha = -inner_gv / vv;
        let lap_sq = v.forward().weighted_norm_sq(|k| k * k);
        let alpha_pre = alpha.max(0.01 * g * lap_sq / c).max(1e-8);

        let mut r = Vec::with_capacity(vs.len());
        let mut d = Vec::with_capacity(vs.len());
        for ((s, n), &k) in vs.iter().zip(&ns).zip(k2) {
            let ri = s * (g * k * k + k + alpha) - n;
            r.push(ri);
            d.push(ri / (g * k * k + k + alpha_pre));
        }
        let dv: f64 = d.iter().zip(&vs).map(|(a, b)| (b.conj() * a).re).sum();
        let beta = dv / vv;
        for (di, s) in d.iter_mut().zip(&vs) {
            *di -= s * beta;
        }
        let dd: f64 = d.iter().map(|x| x.norm_sqr()).sum();
        let pg = (dd / vv).sqrt();
        let rd: f64 = r.iter().zip(&d).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * vol;
        last_pg = pg;
        if pg <= cfg.residual_tolerance {
            let gs = describe_ground_state(v, alpha, p, SolverTag::MinimaxDescent, it, 1);
            return Ok(MinimaxOutcome {
                ground_state: gs,
                f_log,
                projected_gradient: pg,
            });
        }
        if it == cfg.descent_max_iterations {
            break;
        }

        // backtracking on F along -d; each trial is moved back onto M(c)
        let noise_regime = 1e-4 * rd <= DESCENT_ROUNDOFF_SLACK * current_scale;
        let mut tau = if noise_regime { 1.0 } else { (2.0 * step).min(1.0) };
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<Complex64> = vs.iter().zip(&d).map(|(s, di)| s - di * tau).collect();
            let w = SpectralField::new(grid, trial)?.inverse();
            if let Ok(Some((wv, f_new))) = onto_manifold(&w, c, p, even) {
                let decrease = 1e-4 * tau * rd;
                let floor = DESCENT_ROUNDOFF_SLACK * current_scale;
                let ok = f_new <= current_f - decrease || (decrease <= floor && f_new <= current_f + floor);
                if ok {
                    accepted = Some((wv, f_new));
                    break;
                }
            }
            tau *= 0.5;
        }
        match accepted {
            Some((wv, f_new)) => {
                current_scale = energy_scale(&triple(&wv, p), p);
                v = wv;
                current_f = f_new;
                f_log.push(f_new);
                step = tau;
            }
            None => break,
        }
    }
    Err(Error::NonConvergence {
        iterations: f_log.len(),
        residual: last_pg,
    })
}

/// Rescales to mass `c`, dilates onto `Q = 0` and returns the projected
/// field with its energy, which there equals `F(u)`. `None` when the
/// fibering maximum is infinite.
fn onto_manifold(u: &Field, c: f64, p: &ModelParams, even: bool) -> Result<Option<(Field, f64)>> {
    let u = with_mass(&u.real_part(), c);
    let prof = dilation_profile(&triple(&u, p), p)?;
    if !prof.exists {
        return Ok(None);
    }
    let v = dilate(&u, prof.lambda_star)?.field;
    let mut vs = v.forward().coefficients().to_vec();
    project_spectrum(u.grid(), &mut vs, even);
    let v = SpectralField::new(u.grid(), vs)?.inverse().real_part();
    let f = functionals::energy(&v, p);
    Ok(Some((v, f)))
}

/// `Gamma(c)` together with both solver outputs.
#[derive(Clone, Debug)]
pub struct GammaValue {
    pub gamma: f64,
    pub shooting: GroundState,
    pub descent: GroundState,
}

/// Relative agreement required between the two routes.
pub const CROSS_VALIDATION_TOLERANCE: f64 = 1e-4;

pub fn gamma_value(c: f64, p: &ModelParams, grid: &GridSpec, cfg: &SolverConfig) -> Result<f64> {
    gamma_value_detailed(c, p, grid, cfg).map(|g| g.gamma)
}

pub fn gamma_value_detailed(
    c: f64,
    p: &ModelParams,
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Result<GammaValue> {
    let shooting = normalized_ground_state(c, p, grid, cfg)?;
    let descent_cfg = SolverConfig {
        seed_profile: SeedProfile::Gaussian,
        ..cfg.clone()
    };
    let descent = minimax_descent(c, p, grid, &descent_cfg)?;
    let (a, b) = (shooting.energy, descent.energy);
    if (a - b).abs() > CROSS_VALIDATION_TOLERANCE * a.abs().max(b.abs()) {
        return Err(Error::CrossValidation {
            mass: c,
            first: a,
            second: b,
        });
    }
    Ok(GammaValue {
        gamma: a.min(b),
        shooting,
        descent,
    })
}
