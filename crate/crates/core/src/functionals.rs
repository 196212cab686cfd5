//! Scalar functionals of a field and the dilation algebra on the reduction
//! `(A, B, C) = (||Lap u||^2, ||grad u||^2, ||u||_{2s+2}^{2s+2})`.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, SpectralField};

/// Relative slack used when deciding whether `sigma * N` equals 4.
const CRITICAL_SLACK: f64 = 1e-12;

/// Problem parameters: dispersion strength `gamma`, nonlinearity power
/// `sigma`, spatial dimension and optional mass target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub gamma: f64,
    pub sigma: f64,
    pub dim: usize,
    pub mass_target: Option<f64>,
}

impl ModelParams {
    pub fn new(gamma: f64, sigma: f64, dim: usize) -> Result<Self> {
        let p = ModelParams {
            gamma,
            sigma,
            dim,
            mass_target: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_mass(mut self, c: f64) -> Self {
        self.mass_target = Some(c);
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            problems.push(format!("gamma = {} must be positive", self.gamma));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            problems.push(format!("sigma = {} must be positive", self.sigma));
        }
        if !(1..=2).contains(&self.dim) {
            problems.push(format!("dimension {} not in {{1, 2}}", self.dim));
        }
        if let Some(c) = self.mass_target {
            if !(c.is_finite() && c > 0.0) {
                problems.push(format!("mass target {c} must be positive"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(problems.join("; ")))
        }
    }

    /// Ground states and blow-up workflows need `sigma * N >= 4`.
    pub fn require_ground_state_regime(&self) -> Result<()> {
        self.validate()?;
        if self.sigma_n() < 4.0 * (1.0 - CRITICAL_SLACK) {
            return Err(Error::InvalidModel(format!(
                "sigma*N = {} is below the mass-critical value 4",
                self.sigma_n()
            )));
        }
        Ok(())
    }

    pub fn require_mass_critical(&self) -> Result<()> {
        self.validate()?;
        if !self.is_mass_critical() {
            return Err(Error::InvalidModel(format!(
                "sigma*N = {} but the mass-critical case sigma*N = 4 is required",
                self.sigma_n()
            )));
        }
        Ok(())
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma * self.dim as f64
    }

    pub fn is_mass_critical(&self) -> bool {
        (self.sigma_n() - 4.0).abs() <= 4.0 * CRITICAL_SLACK
    }

    /// Lebesgue exponent of the nonlinear term, `2*sigma + 2`.
    pub fn power(&self) -> f64 {
        2.0 * self.sigma + 2.0
    }

    /// Coefficient `sigma*N / (2(2 sigma + 2))` of `C` in the Pohozaev functional.
    pub fn pohozaev_coefficient(&self) -> f64 {
        self.sigma_n() / (2.0 * self.power())
    }
}

/// The three integrals through which every dilation formula factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarTriple {
    /// `||Lap u||_2^2`
    pub lap_sq: f64,
    /// `||grad u||_2^2`
    pub grad_sq: f64,
    /// `||u||_{2 sigma+2}^{2 sigma+2}`
    pub power: f64,
}

impl ScalarTriple {
    /// `A * mass - B^2`, nonnegative by the interpolation inequality.
    pub fn interpolation_gap(&self, mass: f64) -> f64 {
        self.lap_sq * mass - self.grad_sq * self.grad_sq
    }

    /// Triple of `a * u` for a real amplitude `a`.
    pub fn scaled(&self, a: f64, p: &ModelParams) -> ScalarTriple {
        let a2 = a * a;
        ScalarTriple {
            lap_sq: a2 * self.lap_sq,
            grad_sq: a2 * self.grad_sq,
            power: a.abs().powf(p.power()) * self.power,
        }
    }
}

pub fn mass(u: &Field) -> f64 {
    u.norm_sq()
}

/// Pointwise `|u|^{2 sigma} u`.
pub fn nonlinearity(u: &Field, sigma: f64) -> Field {
    u.map(|v| v * v.norm_sqr().powf(sigma))
}

fn power_integral(u: &Field, p: &ModelParams) -> f64 {
    let e = p.sigma + 1.0;
    let vals: Vec<f64> = u.values().iter().map(|v| v.norm_sqr().powf(e)).collect();
    u.grid().integrate(&vals)
}

pub(crate) fn triple_from_spectrum(u: &Field, spec: &SpectralField, p: &ModelParams) -> ScalarTriple {
    ScalarTriple {
        lap_sq: spec.weighted_norm_sq(|k2| k2 * k2),
        grad_sq: spec.weighted_norm_sq(|k2| k2),
        power: power_integral(u, p),
    }
}

pub fn triple(u: &Field, p: &ModelParams) -> ScalarTriple {
    triple_from_spectrum(u, &u.forward(), p)
}

pub fn energy_of_triple(t: &ScalarTriple, p: &ModelParams) -> f64 {
    0.5 * p.gamma * t.lap_sq + 0.5 * t.grad_sq - t.power / p.power()
}

pub fn pohozaev_of_triple(t: &ScalarTriple, p: &ModelParams) -> f64 {
    p.gamma * t.lap_sq + 0.5 * t.grad_sq - p.pohozaev_coefficient() * t.power
}

pub fn energy(u: &Field, p: &ModelParams) -> f64 {
    energy_of_triple(&triple(u, p), p)
}

pub fn pohozaev(u: &Field, p: &ModelParams) -> f64 {
    pohozaev_of_triple(&triple(u, p), p)
}

/// `E(u_lambda) = (gamma lambda^2/2) A + (lambda/2) B - lambda^{sigma N/2} C/(2 sigma+2)`.
pub fn energy_along_dilation(t: &ScalarTriple, lambda: f64, p: &ModelParams) -> f64 {
    0.5 * p.gamma * lambda * lambda * t.lap_sq + 0.5 * lambda * t.grad_sq
        - lambda.powf(0.5 * p.sigma_n()) * t.power / p.power()
}

/// `Q(u_lambda) = lambda * d/dlambda E(u_lambda)`.
pub fn pohozaev_along_dilation(t: &ScalarTriple, lambda: f64, p: &ModelParams) -> f64 {
    p.gamma * lambda * lambda * t.lap_sq + 0.5 * lambda * t.grad_sq
        - p.pohozaev_coefficient() * lambda.powf(0.5 * p.sigma_n()) * t.power
}

/// `E(u) - (2/(sigma N)) Q(u)` evaluated from the right-hand side of the
/// identity, i.e. without the nonlinear term.
pub fn energy_minus_pohozaev(t: &ScalarTriple, p: &ModelParams) -> f64 {
    let sn = p.sigma_n();
    p.gamma * (sn - 4.0) / (2.0 * sn) * t.lap_sq + (sn - 2.0) / (2.0 * sn) * t.grad_sq
}

/// Maximizer of the fibering map `lambda -> E(u_lambda)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DilationResult {
    pub lambda_star: f64,
    pub max_energy: f64,
    pub exists: bool,
}

// q(lambda) = Q(u_lambda) / lambda
fn reduced_pohozaev(t: &ScalarTriple, lambda: f64, p: &ModelParams) -> f64 {
    p.gamma * lambda * t.lap_sq + 0.5 * t.grad_sq
        - p.pohozaev_coefficient() * lambda.powf(0.5 * p.sigma_n() - 1.0) * t.power
}

/// Like [`optimal_dilation`] but reports a missing maximizer through
/// `exists = false` (with `lambda_star = max_energy = inf`).
pub fn dilation_profile(t: &ScalarTriple, p: &ModelParams) -> Result<DilationResult> {
    if t.power <= 0.0 {
        return Err(Error::Degenerate("C = 0"));
    }
    if t.lap_sq <= 0.0 && t.grad_sq <= 0.0 {
        return Err(Error::Degenerate("A = B = 0"));
    }
    let unbounded = DilationResult {
        lambda_star: f64::INFINITY,
        max_energy: f64::INFINITY,
        exists: false,
    };
    if p.is_mass_critical() {
        let slope = p.gamma * t.lap_sq - t.power / (p.sigma + 1.0);
        if slope >= 0.0 || t.grad_sq <= 0.0 {
            return Ok(unbounded);
        }
    }
    let mut lo = 1e-8;
    if reduced_pohozaev(t, lo, p) <= 0.0 {
        // only possible when B is negligible against C at tiny lambda
        lo = f64::MIN_POSITIVE.sqrt();
        if reduced_pohozaev(t, lo, p) <= 0.0 {
            return Err(Error::Degenerate("q(lambda) <= 0 near lambda = 0"));
        }
    }
    let mut hi = 1.0f64.max(2.0 * lo);
    while reduced_pohozaev(t, hi, p) >= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Ok(unbounded);
        }
    }
    while hi / lo - 1.0 > 1e-13 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if reduced_pohozaev(t, mid, p) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda_star = 0.5 * (lo + hi);
    Ok(DilationResult {
        lambda_star,
        max_energy: energy_along_dilation(t, lambda_star, p),
        exists: true,
    })
}

/// Unique positive `lambda_u` with `Q(u_{lambda_u}) = 0`.
pub fn optimal_dilation(t: &ScalarTriple, p: &ModelParams) -> Result<DilationResult> {
    let r = dilation_profile(t, p)?;
    if r.exists {
        Ok(r)
    } else {
        Err(Error::NoMaximizer)
    }
}

/// `||u||_{2s+2}^{2s+2} / (||Lap u||^{sN/2} ||u||^{2+2s-sN/2})`.
pub fn weinstein_quotient(u: &Field, p: &ModelParams) -> Result<f64> {
    let t = triple(u, p);
    weinstein_of_triple(&t, mass(u), p)
}

pub fn weinstein_of_triple(t: &ScalarTriple, mass: f64, p: &ModelParams) -> Result<f64> {
    if mass <= 0.0 || t.lap_sq <= 0.0 {
        return Err(Error::ZeroField);
    }
    let sn = p.sigma_n();
    let mass_exp = 2.0 + 2.0 * p.sigma - 0.5 * sn;
    Ok(t.power / (t.lap_sq.powf(0.25 * sn) * mass.powf(0.5 * mass_exp)))
}

/// Lagrange multiplier of a stationary solution from the Pohozaev and
/// Nehari identities:
/// `c alpha = gamma((4s+4)/(sN) - 1) A + ((2s+2)/(sN) - 1) B`.
pub fn multiplier_from_identities(t: &ScalarTriple, c: f64, p: &ModelParams) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::ZeroMass);
    }
    let sn = p.sigma_n();
    let ca = p.gamma * ((4.0 * p.sigma + 4.0) / sn - 1.0) * t.lap_sq
        + ((2.0 * p.sigma + 2.0) / sn - 1.0) * t.grad_sq;
    Ok(ca / c)
}

/// GN lower bound `(gamma/2)(1 - (c/c*)^{4/N}) A` on the energy in the
/// mass-critical case.
pub fn critical_energy_bound(t: &ScalarTriple, c: f64, c_star: f64, p: &ModelParams) -> f64 {
    0.5 * p.gamma * (1.0 - (c / c_star).powf(4.0 / p.dim as f64)) * t.lap_sq
}

/// `L^2` gradient of the energy: `gamma Lap^2 u - Lap u - |u|^{2s} u`.
pub fn energy_gradient(u: &Field, p: &ModelParams) -> Field {
    let g = p.gamma;
    let lin = u.forward().map_symbol(|k2| g * k2 * k2 + k2).inverse();
    let nl = nonlinearity(u, p.sigma);
    lin.add_scaled(&nl, -1.0).expect("same grid")
}

/// `||gamma Lap^2 u - Lap u + alpha u - |u|^{2s} u|| / ||u||`.
pub fn stationary_residual(u: &Field, alpha: f64, p: &ModelParams) -> f64 {
    let g = energy_gradient(u, p);
    let r = g.add_scaled(u, alpha).expect("same grid");
    r.l2_norm() / u.l2_norm()
}

/// Residuals of the integral identities satisfied by solutions of
/// `gamma Lap^2 v - mu Lap v + omega v = d |v|^{2s} v`, each divided by the
/// sum of the absolute values of its terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityResiduals {
    pub nehari: f64,
    pub pohozaev_p: f64,
    pub pohozaev_q: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.nehari.max(self.pohozaev_p).max(self.pohozaev_q)
    }
}

pub fn identity_residuals(
    t: &ScalarTriple,
    mass: f64,
    mu: f64,
    omega: f64,
    d: f64,
    p: &ModelParams,
) -> IdentityResiduals {
    let rel = |terms: &[f64]| {
        let s: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|x| x.abs()).sum();
        if scale > 0.0 {
            s.abs() / scale
        } else {
            0.0
        }
    };
    let n = p.dim as f64;
    let g = p.gamma;
    let nehari = rel(&[g * t.lap_sq, mu * t.grad_sq, omega * mass, -d * t.power]);
    let pohozaev_p = rel(&[
        0.5 * (n - 4.0) * g * t.lap_sq,
        0.5 * (n - 2.0) * mu * t.grad_sq,
        0.5 * n * omega * mass,
        -d * n / p.power() * t.power,
    ]);
    let pohozaev_q = rel(&[
        g * t.lap_sq,
        0.5 * mu * t.grad_sq,
        -d * p.sigma_n() / (2.0 * p.power()) * t.power,
    ]);
    IdentityResiduals {
        nehari,
        pohozaev_p,
        pohozaev_q,
    }
}

/// Discrete Fourier rearrangement.
///
/// The multiset of coefficient moduli is sorted in descending order and
/// laid onto frequencies ordered by `|n|^2` ascending, ties broken by the
/// lexicographic order of the integer frequency tuple. Each `(n, -n)` pair
/// then receives the root-mean-square of its two moduli, which keeps the
/// result real and even while preserving `sum |F|^2`. Phases are zero
/// relative to the box center.
pub fn fourier_rearrangement(u: &Field) -> Field {
    let grid = u.grid().clone();
    let spec = u.forward();
    let mut mags: Vec<f64> = spec.coefficients().iter().map(|c| c.norm()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));

    let mut slots: Vec<usize> = (0..grid.len()).collect();
    slots.sort_by_key(|&i| {
        let n = grid.frequency_tuple(i);
        (n[0] * n[0] + n[1] * n[1], n[0], n[1])
    });
    let mut assigned = vec![0.0; grid.len()];
    for (rank, &slot) in slots.iter().enumerate() {
        assigned[slot] = mags[rank];
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 0..grid.len() {
        let j = grid.mirror_index(i);
        let a = assigned[i];
        let b = assigned[j];
        let rms = (0.5 * (a * a + b * b)).sqrt();
        let n = grid.frequency_tuple(i);
        // exp(-i k x_0) with x_0 = -L/2 is (-1)^n on each axis
        let sign = if (n[0] + n[1]).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        coeffs[i] = Complex64::new(sign * rms, 0.0);
    }
    SpectralField::new(&grid, coeffs).expect("same layout").inverse()
}
