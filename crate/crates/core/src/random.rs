//! Seeded random test fields.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::grid::{Field, GridSpec, SpectralField};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Spectral decay exponent of the sampled amplitudes, `|F_k| ~ |k|^-4`.
pub const SPECTRAL_DECAY: f64 = 4.0;

/// Band-limited Gaussian random field: independent complex normal
/// coefficients with amplitude `(1 + |k|^2)^(-decay/2)`, cut off above half
/// the Nyquist wavenumber, then scaled to the requested mass.
pub fn band_limited_field<R: Rng>(grid: &GridSpec, rng: &mut R, mass: f64) -> Field {
    let kc2 = (0.5 * grid.nyquist()).powi(2);
    let coeffs: Vec<Complex64> = grid
        .k_squared()
        .iter()
        .map(|&k2| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            if k2 > kc2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(re, im) * (1.0 + k2).powf(-0.5 * SPECTRAL_DECAY)
            }
        })
        .collect();
    let f = SpectralField::new(grid, coeffs).expect("layout").inverse();
    with_mass(&f, mass)
}

/// Random smooth field localized by a Gaussian envelope of the given width,
/// scaled to the requested mass. Used where the field must leave room for a
/// dilation inside the box.
pub fn localized_field<R: Rng>(grid: &GridSpec, rng: &mut R, width: f64, mass: f64) -> Field {
    let base = band_limited_field(grid, rng, 1.0);
    let s = 0.5 / (width * width);
    let f = Field::from_fn(grid, |[x, y]| Complex64::new((-(x * x + y * y) * s).exp(), 0.0));
    let values = base
        .values()
        .iter()
        .zip(f.values())
        .map(|(a, b)| a * b)
        .collect();
    with_mass(&Field::new(grid, values).expect("finite"), mass)
}

/// Real part of [`band_limited_field`], renormalized.
pub fn real_band_limited_field<R: Rng>(grid: &GridSpec, rng: &mut R, mass: f64) -> Field {
    with_mass(&band_limited_field(grid, rng, 1.0).real_part(), mass)
}

pub fn with_mass(f: &Field, mass: f64) -> Field {
    let m = f.norm_sq();
    if m > 0.0 {
        f.scale((mass / m).sqrt())
    } else {
        f.clone()
    }
}
