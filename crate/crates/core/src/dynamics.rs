//! Split-step integration of `i psi_t - gamma Lap^2 psi + Lap psi + |psi|^{2 sigma} psi = 0`
//! with conservation tracking and localized-virial diagnostics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::{energy_of_triple, pohozaev_of_triple, triple_from_spectrum, ModelParams};
use crate::grid::{gradient, Field, GridSpec, SpectralField};

/// Radial virial weight: `phi(r) = r^2/2` on `[0, 1]`, a quintic blend on
/// `[1, 10]`, constant beyond. In `s = (r - 1)/9` the blend has
/// `phi'(r) = 1 + 9 s - 31 s^3 + 21 s^4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VirialConfig {
    pub radius: f64,
}

const BLEND_START: f64 = 1.0;
const BLEND_END: f64 = 10.0;
const BLEND_WIDTH: f64 = BLEND_END - BLEND_START;

impl VirialConfig {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidModel(format!("virial radius {radius} must be positive")));
        }
        Ok(VirialConfig { radius })
    }

    /// Unscaled profile `phi(r)`.
    pub fn phi(r: f64) -> f64 {
        if r <= BLEND_START {
            0.5 * r * r
        } else {
            let s = ((r - BLEND_START) / BLEND_WIDTH).min(1.0);
            let s2 = s * s;
            0.5 + BLEND_WIDTH * (s + 4.5 * s2 - 7.75 * s2 * s2 + 4.2 * s2 * s2 * s)
        }
    }

    pub fn phi_prime(r: f64) -> f64 {
        if r <= BLEND_START {
            r
        } else if r >= BLEND_END {
            0.0
        } else {
            let s = (r - BLEND_START) / BLEND_WIDTH;
            1.0 + 9.0 * s - 31.0 * s * s * s + 21.0 * s * s * s * s
        }
    }

    pub fn phi_second(r: f64) -> f64 {
        if r <= BLEND_START {
            1.0
        } else if r >= BLEND_END {
            0.0
        } else {
            let s = (r - BLEND_START) / BLEND_WIDTH;
            (9.0 - 93.0 * s * s + 84.0 * s * s * s) / BLEND_WIDTH
        }
    }

    /// `phi_R(r) = R^2 phi(r / R)`.
    pub fn weight(&self, r: f64) -> f64 {
        self.radius * self.radius * Self::phi(r / self.radius)
    }

    pub fn weight_prime(&self, r: f64) -> f64 {
        self.radius * Self::phi_prime(r / self.radius)
    }

    pub fn weight_second(&self, r: f64) -> f64 {
        Self::phi_second(r / self.radius)
    }
}

/// `M_{phi_R}[psi] = 2 Im int conj(psi) grad(phi_R) . grad(psi)`.
pub fn localized_virial(psi: &Field, vcfg: &VirialConfig) -> f64 {
    let grid = psi.grid();
    let grads = gradient(psi);
    let vals: Vec<f64> = (0..grid.len())
        .map(|i| {
            let r = grid.radius(i);
            if r == 0.0 {
                return 0.0;
            }
            let w = vcfg.weight_prime(r) / r;
            let x = grid.coords(i);
            let mut dot = Complex64::new(0.0, 0.0);
            for (axis, g) in grads.iter().enumerate() {
                dot += g.values()[i] * (w * x[axis]);
            }
            2.0 * (psi.values()[i].conj() * dot).im
        })
        .collect();
    grid.integrate(&vals)
}

/// True iff `E(psi) < gamma_c` and `Q(psi) > 0`.
pub fn classify_oc(psi: &Field, gamma_c: f64, p: &ModelParams) -> bool {
    let t = crate::functionals::triple(psi, p);
    energy_of_triple(&t, p) < gamma_c && pohozaev_of_triple(&t, p) > 0.0
}

/// Linear propagator `exp(-i tau (gamma |k|^4 + |k|^2))` on each mode.
fn linear_phases(grid: &GridSpec, tau: f64, gamma: f64) -> Vec<Complex64> {
    grid.k_squared()
        .iter()
        .map(|&k2| Complex64::from_polar(1.0, -tau * (gamma * k2 * k2 + k2)))
        .collect()
}

fn nonlinear_phase(values: &mut [Complex64], h: f64, sigma: f64) {
    for v in values.iter_mut() {
        let rho = v.norm_sqr();
        if rho > 0.0 {
            *v *= Complex64::from_polar(1.0, h * rho.powf(sigma));
        }
    }
}

/// One Strang step: half nonlinear phase, exact linear flow, half phase.
pub fn step_strang(psi: &Field, tau: f64, p: &ModelParams) -> Field {
    let mut s = Stepper::new(psi.grid(), tau, p);
    let mut v = psi.values().to_vec();
    s.step(&mut v);
    Field::from_raw(psi.grid(), v)
}

/// Strang stepper for the linear part only, used to test the linear flow.
pub fn step_linear(psi: &Field, tau: f64, gamma: f64) -> Field {
    let phases = linear_phases(psi.grid(), tau, gamma);
    let spec = psi.forward();
    let c: Vec<Complex64> = spec.coefficients().iter().zip(&phases).map(|(a, b)| a * b).collect();
    SpectralField::new(psi.grid(), c).expect("layout").inverse()
}

struct Stepper {
    grid: GridSpec,
    phases: Vec<Complex64>,
    half: f64,
    sigma: f64,
}

impl Stepper {
    fn new(grid: &GridSpec, tau: f64, p: &ModelParams) -> Self {
        Stepper {
            grid: grid.clone(),
            phases: linear_phases(grid, tau, p.gamma),
            half: 0.5 * tau,
            sigma: p.sigma,
        }
    }

    fn step(&mut self, v: &mut Vec<Complex64>) {
        nonlinear_phase(v, self.half, self.sigma);
        let f = Field::from_raw(&self.grid, std::mem::take(v));
        let spec = f.forward();
        let c: Vec<Complex64> = spec
            .coefficients()
            .iter()
            .zip(&self.phases)
            .map(|(a, b)| a * b)
            .collect();
        *v = SpectralField::new(&self.grid, c).expect("layout").inverse().into_values();
        nonlinear_phase(v, self.half, self.sigma);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Completed,
    BlowUpDetected,
    ResolutionExhausted,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Completed => "completed",
            Verdict::BlowUpDetected => "blow_up_detected",
            Verdict::ResolutionExhausted => "resolution_exhausted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "completed" => Some(Verdict::Completed),
            "blow_up_detected" => Some(Verdict::BlowUpDetected),
            "resolution_exhausted" => Some(Verdict::ResolutionExhausted),
            _ => None,
        }
    }
}

/// Thresholds and cadence of [`evolve`].
#[derive(Clone, Debug, PartialEq)]
pub struct EvolveConfig {
    /// Time between recorded diagnostics; rounded to a whole number of steps.
    pub output_interval: f64,
    /// Growth factor of `||Lap psi||_2` over its initial value that ends a
    /// run as blow-up.
    pub blowup_factor: f64,
    /// Spectral power fraction above `tail_cutoff * k_nyquist` that counts
    /// as lost resolution.
    pub tail_threshold: f64,
    pub tail_cutoff: f64,
    /// Energy deviation, relative to the initial sum of the magnitudes of
    /// the energy terms, that counts as lost time resolution.
    pub energy_tolerance: f64,
    /// Step halvings tried from the last snapshot before a resolution alarm
    /// is final.
    pub max_halvings: u32,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            output_interval: 0.1,
            blowup_factor: 50.0,
            tail_threshold: 1e-4,
            tail_cutoff: 5.0 / 6.0,
            energy_tolerance: 1e-3,
            max_halvings: 2,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.output_interval > 0.0) {
            problems.push("output interval must be positive".to_string());
        }
        if !(self.blowup_factor > 1.0) {
            problems.push("blow-up factor must exceed 1".to_string());
        }
        if !(self.tail_threshold > 0.0 && self.tail_threshold < 1.0) {
            problems.push("tail threshold must lie in (0, 1)".to_string());
        }
        if !(self.tail_cutoff > 0.0 && self.tail_cutoff < 1.0) {
            problems.push("tail cutoff must lie in (0, 1)".to_string());
        }
        if !(self.energy_tolerance > 0.0) {
            problems.push("energy tolerance must be positive".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

/// Default step `0.25 dx^2 / max(1, sqrt(gamma))`.
pub fn default_time_step(grid: &GridSpec, p: &ModelParams) -> f64 {
    0.25 * grid.dx() * grid.dx() / p.gamma.sqrt().max(1.0)
}

#[derive(Clone, Debug)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub mass_series: Vec<f64>,
    pub energy_series: Vec<f64>,
    pub bilap_norm_series: Vec<f64>,
    pub grad_norm_series: Vec<f64>,
    pub q_series: Vec<f64>,
    pub virial_series: Vec<f64>,
    pub tail_series: Vec<f64>,
    pub verdict: Verdict,
    pub final_field: Field,
    /// Step in use when the run ended.
    pub tau: f64,
    pub halvings: u32,
    pub steps: usize,
}

/// One row of diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct Diagnostics {
    pub mass: f64,
    pub energy: f64,
    pub bilap: f64,
    pub grad: f64,
    pub q: f64,
    pub virial: f64,
    pub tail: f64,
}

pub fn diagnostics(psi: &Field, p: &ModelParams, vcfg: &VirialConfig, tail_cutoff: f64) -> Diagnostics {
    let spec = psi.forward();
    let t = triple_from_spectrum(psi, &spec, p);
    Diagnostics {
        mass: psi.norm_sq(),
        energy: energy_of_triple(&t, p),
        bilap: t.lap_sq.sqrt(),
        grad: t.grad_sq.sqrt(),
        q: pohozaev_of_triple(&t, p),
        virial: localized_virial(psi, vcfg),
        tail: spec.tail_fraction(tail_cutoff),
    }
}

impl EvolutionTrace {
    fn push(&mut self, t: f64, d: &Diagnostics) {
        self.times.push(t);
        self.mass_series.push(d.mass);
        self.energy_series.push(d.energy);
        self.bilap_norm_series.push(d.bilap);
        self.grad_norm_series.push(d.grad);
        self.q_series.push(d.q);
        self.virial_series.push(d.virial);
        self.tail_series.push(d.tail);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest relative deviation of the mass from its initial value.
    pub fn mass_deviation(&self) -> f64 {
        let m0 = self.mass_series[0];
        self.mass_series
            .iter()
            .map(|m| ((m - m0) / m0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest absolute deviation of the energy from its initial value.
    pub fn energy_deviation(&self) -> f64 {
        let e0 = self.energy_series[0];
        self.energy_series
            .iter()
            .map(|e| (e - e0).abs())
            .fold(0.0, f64::max)
    }

    /// `max ||Lap psi|| / ||Lap psi_0||` over the recorded times.
    pub fn bilap_growth(&self) -> f64 {
        let b0 = self.bilap_norm_series[0];
        self.bilap_norm_series.iter().cloned().fold(0.0, f64::max) / b0
    }
}

/// Evolves `psi0` to `horizon`, recording diagnostics at each output time.
///
/// A resolution alarm (tail fraction or energy drift over threshold) restarts
/// from the last recorded state with half the step, up to
/// `ecfg.max_halvings` times; a persisting alarm ends the run as
/// `ResolutionExhausted`; the unresolved state is not recorded, so the
/// series and `final_field` describe the last resolved output. Crossing `ecfg.blowup_factor` ends it as
/// `BlowUpDetected`.
pub fn evolve(
    psi0: &Field,
    horizon: f64,
    tau: f64,
    p: &ModelParams,
    vcfg: &VirialConfig,
    ecfg: &EvolveConfig,
) -> Result<EvolutionTrace> {
    if !(horizon > 0.0 && tau > 0.0) {
        return Err(Error::InvalidModel(format!(
            "horizon {horizon} and step {tau} must be positive"
        )));
    }
    ecfg.validate()?;
    p.validate()?;
    let d0 = diagnostics(psi0, p, vcfg, ecfg.tail_cutoff);
    let mut trace = EvolutionTrace {
        times: Vec::new(),
        mass_series: Vec::new(),
        energy_series: Vec::new(),
        bilap_norm_series: Vec::new(),
        grad_norm_series: Vec::new(),
        q_series: Vec::new(),
        virial_series: Vec::new(),
        tail_series: Vec::new(),
        verdict: Verdict::Completed,
        final_field: psi0.clone(),
        tau,
        halvings: 0,
        steps: 0,
    };
    trace.push(0.0, &d0);
    let bilap0 = d0.bilap;
    let energy_scale = {
        let t = crate::functionals::triple(psi0, p);
        0.5 * p.gamma * t.lap_sq + 0.5 * t.grad_sq + t.power / p.power()
    };
    let n_out = (horizon / ecfg.output_interval).ceil().max(1.0) as usize;
    let interval = horizon / n_out as f64;

    let mut snapshot = psi0.values().to_vec();
    let mut out_index = 0usize;
    let mut per_interval = (interval / tau).ceil().max(1.0) as usize;
    let mut stepper = Stepper::new(psi0.grid(), interval / per_interval as f64, p);
    'outer: while out_index < n_out {
        let mut v = snapshot.clone();
        for _ in 0..per_interval {
            stepper.step(&mut v);
            trace.steps += 1;
        }
        let field = Field::from_raw(psi0.grid(), v);
        if !field.is_finite() {
            trace.verdict = Verdict::ResolutionExhausted;
            break;
        }
        let d = diagnostics(&field, p, vcfg, ecfg.tail_cutoff);
        let drift = (d.energy - d0.energy).abs() / energy_scale;
        if d.tail > ecfg.tail_threshold || drift > ecfg.energy_tolerance {
            if trace.halvings < ecfg.max_halvings {
                trace.halvings += 1;
                per_interval *= 2;
                stepper = Stepper::new(psi0.grid(), interval / per_interval as f64, p);
                continue 'outer;
            }
            trace.verdict = Verdict::ResolutionExhausted;
            break;
        }
        out_index += 1;
        trace.push(out_index as f64 * interval, &d);
        snapshot = field.values().to_vec();
        trace.final_field = field;
        if d.bilap > ecfg.blowup_factor * bilap0 {
            trace.verdict = Verdict::BlowUpDetected;
            break;
        }
    }
    trace.tau = interval / per_interval as f64;
    Ok(trace)
}

/// Constant multiplying the remainder terms in the virial budget.
pub const VIRIAL_BUDGET_CONSTANT: f64 = 0.25;

/// Per-output-time comparison of the centered difference of the virial
/// with `8 Q`.
#[derive(Clone, Debug)]
pub struct VirialCheck {
    pub times: Vec<f64>,
    pub derivative: Vec<f64>,
    pub eight_q: Vec<f64>,
    pub budget: Vec<f64>,
}

impl VirialCheck {
    /// Largest `dM/dt - 8Q - budget`; nonpositive when the check holds.
    pub fn worst_excess(&self) -> f64 {
        self.derivative
            .iter()
            .zip(&self.eight_q)
            .zip(&self.budget)
            .map(|((d, q), b)| d - q - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn holds(&self) -> bool {
        self.worst_excess() <= 0.0
    }
}

/// `O(B/R^2 + ||grad psi||^sigma / R^{sigma(N-1)} + 1/R^2 + 1/R^4)` budget
/// for the virial bound, scaled by [`VIRIAL_BUDGET_CONSTANT`], plus the
/// truncation error of the centered difference estimated from the third
/// difference of the virial series.
pub fn virial_check(trace: &EvolutionTrace, p: &ModelParams, vcfg: &VirialConfig) -> VirialCheck {
    let n = trace.len();
    let r = vcfg.radius;
    let big_n = p.dim as f64;
    let m = &trace.virial_series;
    let mut out = VirialCheck {
        times: Vec::new(),
        derivative: Vec::new(),
        eight_q: Vec::new(),
        budget: Vec::new(),
    };
    if n < 3 {
        return out;
    }
    for i in 1..n - 1 {
        let h = trace.times[i + 1] - trace.times[i - 1];
        let deriv = (m[i + 1] - m[i - 1]) / h;
        let g = trace.grad_norm_series[i];
        let remainder = g * g / (r * r) + g.powf(p.sigma) / r.powf(p.sigma * (big_n - 1.0)) + 1.0 / (r * r) + 1.0 / r.powi(4);
        let third = if i >= 2 && i + 2 < n {
            ((m[i + 2] - 2.0 * m[i + 1] + 2.0 * m[i - 1] - m[i - 2]) / (2.0 * (0.5 * h).powi(3))).abs()
        } else {
            0.0
        };
        let fd = third * (0.5 * h).powi(2) / 6.0;
        out.times.push(trace.times[i]);
        out.derivative.push(deriv);
        out.eight_q.push(8.0 * trace.q_series[i]);
        out.budget.push(VIRIAL_BUDGET_CONSTANT * remainder + fd);
    }
    out
}
