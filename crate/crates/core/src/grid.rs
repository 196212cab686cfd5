//! Periodic-box discretization with Fourier transforms.
//!
//! Nodes sit at `x_j = -L/2 + j*dx`, `j = 0..M`, on every axis. Values are
//! stored row-major (`index = i*M + j` in two dimensions, `i` along the first
//! axis). Transforms use the FFT frequency layout: slot `j` carries the
//! wavenumber `2*pi*j/L` for `j < M/2` and `2*pi*(j - M)/L` otherwise, so the
//! single unpaired (Nyquist) mode `-pi*M/L` lives in slot `M/2`.
//!
//! Normalization: the forward transform is unscaled and the inverse divides
//! by `M^dim`. With that convention
//! `sum |f|^2 * dx^dim == sum |F|^2 * dx^dim / M^dim`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct GridInner {
    dim: usize,
    extent: f64,
    points: usize,
    dx: f64,
    wavenumbers: Vec<f64>,
    k_squared: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// A square (or interval) periodic box together with its transform plans.
///
/// Cloning is cheap: the spec data and plans are shared.
#[derive(Clone)]
pub struct GridSpec(Arc<GridInner>);

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec")
            .field("dim", &self.0.dim)
            .field("extent", &self.0.extent)
            .field("points", &self.0.points)
            .field("dx", &self.0.dx)
            .finish()
    }
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.0.dim == other.0.dim
            && self.0.points == other.0.points
            && self.0.extent.to_bits() == other.0.extent.to_bits()
    }
}

impl GridSpec {
    pub fn new(dim: usize, extent: f64, points: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGrid(format!("extent {extent} must be positive")));
        }
        if points % 2 == 1 {
            return Err(Error::OddPointCount(points));
        }
        if points < 8 {
            return Err(Error::InvalidGrid(format!("{points} points per axis, need at least 8")));
        }
        let dx = extent / points as f64;
        let wavenumbers: Vec<f64> = (0..points)
            .map(|j| {
                let n = if j < points / 2 { j as isize } else { j as isize - points as isize };
                2.0 * PI * n as f64 / extent
            })
            .collect();
        let k_squared = match dim {
            1 => wavenumbers.iter().map(|k| k * k).collect(),
            _ => {
                let mut out = Vec::with_capacity(points * points);
                for kx in &wavenumbers {
                    for ky in &wavenumbers {
                        out.push(kx * kx + ky * ky);
                    }
                }
                out
            }
        };
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        Ok(GridSpec(Arc::new(GridInner {
            dim,
            extent,
            points,
            dx,
            wavenumbers,
            k_squared,
            forward,
            inverse,
        })))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn extent(&self) -> f64 {
        self.0.extent
    }

    pub fn points(&self) -> usize {
        self.0.points
    }

    pub fn dx(&self) -> f64 {
        self.0.dx
    }

    /// Total number of nodes, `M^dim`.
    pub fn len(&self) -> usize {
        self.0.points.pow(self.0.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis wavenumbers in transform order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.0.wavenumbers
    }

    /// `|k|^2` for every node of the transform layout.
    pub fn k_squared(&self) -> &[f64] {
        &self.0.k_squared
    }

    pub fn cell_volume(&self) -> f64 {
        self.0.dx.powi(self.0.dim as i32)
    }

    /// Largest wavenumber magnitude on one axis, `pi*M/L`.
    pub fn nyquist(&self) -> f64 {
        PI / self.0.dx
    }

    /// Node coordinates along one axis.
    pub fn axis_nodes(&self) -> Vec<f64> {
        (0..self.0.points).map(|j| self.node(j)).collect()
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        -0.5 * self.0.extent + j as f64 * self.0.dx
    }

    /// Coordinates of the node with flat index `idx` (unused axis is zero).
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let m = self.0.points;
        match self.0.dim {
            1 => [self.node(idx), 0.0],
            _ => [self.node(idx / m), self.node(idx % m)],
        }
    }

    /// Euclidean distance of node `idx` from the origin.
    pub fn radius(&self, idx: usize) -> f64 {
        let [x, y] = self.coords(idx);
        x.hypot(y)
    }

    /// Flat index of the mirror node under `x -> -x` (all axes).
    pub fn mirror_index(&self, idx: usize) -> usize {
        let m = self.0.points;
        let flip = |j: usize| (m - j) % m;
        match self.0.dim {
            1 => flip(idx),
            _ => flip(idx / m) * m + flip(idx % m),
        }
    }

    /// Integer frequency tuple of a transform slot.
    pub fn frequency_tuple(&self, idx: usize) -> [i64; 2] {
        let m = self.0.points;
        let n = |j: usize| if j < m / 2 { j as i64 } else { j as i64 - m as i64 };
        match self.0.dim {
            1 => [n(idx), 0],
            _ => [n(idx / m), n(idx % m)],
        }
    }

    /// True when a transform slot touches the Nyquist index on any axis.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let m = self.0.points;
        let h = m / 2;
        match self.0.dim {
            1 => idx == h,
            _ => idx / m == h || idx % m == h,
        }
    }

    /// Quadrature `sum g(x_j) * dx^dim`.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        g.iter().sum::<f64>() * self.cell_volume()
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.0.inverse } else { &self.0.forward };
        let m = self.0.points;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // rustfft processes consecutive chunks of length M
        plan.process_with_scratch(data, &mut scratch);
        if self.0.dim == 2 {
            transpose_square(data, m);
            plan.process_with_scratch(data, &mut scratch);
            transpose_square(data, m);
        }
        if inverse {
            let s = 1.0 / self.len() as f64;
            for v in data.iter_mut() {
                *v *= s;
            }
        }
    }
}

fn transpose_square(data: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

/// Complex grid function on a [`GridSpec`].
#[derive(Clone, Debug)]
pub struct Field {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl Field {
    pub fn new(grid: &GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    pub(crate) fn from_raw(grid: &GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self::from_raw(grid, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    /// Samples `f` at every node; the closure receives `[x, y]` (y = 0 in 1D).
    pub fn from_fn(grid: &GridSpec, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self::from_raw(grid, values)
    }

    pub fn from_real_fn(grid: &GridSpec, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn scale(&self, a: f64) -> Field {
        Field::from_raw(&self.grid, self.values.iter().map(|v| v * a).collect())
    }

    pub fn scale_complex(&self, a: Complex64) -> Field {
        Field::from_raw(&self.grid, self.values.iter().map(|v| v * a).collect())
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, other: &Field, a: f64) -> Result<Field> {
        self.ensure_same_grid(other)?;
        Ok(Field::from_raw(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| u + v * a)
                .collect(),
        ))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise `|u|^2`.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `integral of |u|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.grid.integrate(&self.density())
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `Re integral conj(self) * other`.
    pub fn inner(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn l2_distance(&self, other: &Field) -> Result<f64> {
        Ok(self.add_scaled(other, -1.0)?.l2_norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Drops imaginary parts.
    pub fn real_part(&self) -> Field {
        self.map(|v| Complex64::new(v.re, 0.0))
    }

    /// Average with the mirror image `u(-x)`.
    pub fn symmetrized(&self) -> Field {
        let values = (0..self.values.len())
            .map(|i| 0.5 * (self.values[i] + self.values[self.grid.mirror_index(i)]))
            .collect();
        Field::from_raw(&self.grid, values)
    }

    pub fn forward(&self) -> SpectralField {
        let mut data = self.values.clone();
        self.grid.transform(&mut data, false);
        SpectralField {
            grid: self.grid.clone(),
            coefficients: data,
        }
    }
}

/// Fourier coefficients of a [`Field`] in transform order.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: GridSpec,
    coefficients: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: &GridSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a grid of {} nodes",
                coefficients.len(),
                grid.len()
            )));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coefficients,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn inverse(&self) -> Field {
        let mut data = self.coefficients.clone();
        self.grid.transform(&mut data, true);
        Field::from_raw(&self.grid, data)
    }

    /// `integral of |f|^2` through Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.weighted_norm_sq(|_| 1.0)
    }

    /// `sum w(|k|^2) |F_k|^2` with the Parseval factor `dx^dim / M^dim`.
    pub fn weighted_norm_sq(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let k2 = self.grid.k_squared();
        let s: f64 = self
            .coefficients
            .iter()
            .zip(k2)
            .map(|(c, &k)| weight(k) * c.norm_sqr())
            .sum();
        s * self.grid.cell_volume() / self.grid.len() as f64
    }

    /// Multiplies each coefficient by `symbol(|k|^2)`.
    pub fn map_symbol(&self, symbol: impl Fn(f64) -> f64) -> SpectralField {
        let coefficients = self
            .coefficients
            .iter()
            .zip(self.grid.k_squared())
            .map(|(c, &k)| c * symbol(k))
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coefficients,
        }
    }

    pub fn map_complex_symbol(&self, symbol: impl Fn(f64) -> Complex64) -> SpectralField {
        let coefficients = self
            .coefficients
            .iter()
            .zip(self.grid.k_squared())
            .map(|(c, &k)| c * symbol(k))
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coefficients,
        }
    }

    pub fn zero_nyquist(mut self) -> SpectralField {
        for i in 0..self.coefficients.len() {
            if self.grid.is_nyquist(i) {
                self.coefficients[i] = Complex64::new(0.0, 0.0);
            }
        }
        self
    }

    /// Fraction of `sum |F|^2` carried by modes with `|k| >= cutoff * k_nyquist`.
    pub fn tail_fraction(&self, cutoff: f64) -> f64 {
        let kc2 = (cutoff * self.grid.nyquist()).powi(2);
        let mut total = 0.0;
        let mut tail = 0.0;
        for (c, &k2) in self.coefficients.iter().zip(self.grid.k_squared()) {
            let p = c.norm_sqr();
            total += p;
            if k2 >= kc2 {
                tail += p;
            }
        }
        if total > 0.0 {
            tail / total
        } else {
            0.0
        }
    }
}

/// Inverse transform of `symbol(|k|^2) * forward(f)`.
pub fn apply_symbol(f: &Field, symbol: impl Fn(f64) -> f64) -> Field {
    f.forward().map_symbol(symbol).inverse()
}

pub fn laplacian(f: &Field) -> Field {
    apply_symbol(f, |k2| -k2)
}

pub fn bilaplacian(f: &Field) -> Field {
    apply_symbol(f, |k2| k2 * k2)
}

/// Spectral gradient, one field per axis, Nyquist mode removed.
pub fn gradient(f: &Field) -> Vec<Field> {
    let grid = f.grid();
    let m = grid.points();
    let spec = f.forward().zero_nyquist();
    let ks = grid.wavenumbers();
    (0..grid.dim())
        .map(|axis| {
            let coefficients = spec
                .coefficients()
                .iter()
                .enumerate()
                .map(|(idx, c)| {
                    let k = match (grid.dim(), axis) {
                        (1, _) => ks[idx],
                        (_, 0) => ks[idx / m],
                        _ => ks[idx % m],
                    };
                    c * Complex64::new(0.0, k)
                })
                .collect();
            SpectralField {
                grid: grid.clone(),
                coefficients,
            }
            .inverse()
        })
        .collect()
}

/// `f(x + shift)` by a spectral phase shift; exact for band-limited periodic
/// data. The Nyquist mode is dropped.
pub fn translate(f: &Field, shift: [f64; 2]) -> Field {
    let grid = f.grid();
    let m = grid.points();
    let ks = grid.wavenumbers();
    let spec = f.forward().zero_nyquist();
    let coefficients = spec
        .coefficients()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let phase = match grid.dim() {
                1 => ks[idx] * shift[0],
                _ => ks[idx / m] * shift[0] + ks[idx % m] * shift[1],
            };
            c * Complex64::from_polar(1.0, phase)
        })
        .collect();
    SpectralField {
        grid: grid.clone(),
        coefficients,
    }
    .inverse()
}

/// Centroid of `|f|^2` (unused axis zero).
pub fn mass_centroid(f: &Field) -> [f64; 2] {
    let grid = f.grid();
    let dens = f.density();
    let total: f64 = dens.iter().sum();
    let mut c = [0.0, 0.0];
    for (idx, d) in dens.iter().enumerate() {
        let x = grid.coords(idx);
        c[0] += x[0] * d;
        c[1] += x[1] * d;
    }
    [c[0] / total, c[1] / total]
}

/// Output of [`dilate`].
#[derive(Clone, Debug)]
pub struct Dilation {
    pub field: Field,
    /// Real factor applied after resampling so that mass is preserved.
    pub renormalization: f64,
}

/// Mass fraction tolerated outside the region that a dilation maps into the box.
pub const DILATION_SUPPORT_TOLERANCE: f64 = 1e-8;

/// `lambda^(N/4) f(sqrt(lambda) x)` by evaluating the trigonometric
/// interpolant of `f` at the stretched nodes.
///
/// `f` is treated as zero more than one grid spacing outside the box, and
/// its Nyquist mode is dropped
/// before evaluation. The result is rescaled once so that its mass equals
/// the mass of `f`.
pub fn dilate(f: &Field, lambda: f64) -> Result<Dilation> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidModel(format!("dilation factor {lambda} must be positive")));
    }
    let grid = f.grid();
    let mass = f.norm_sq();
    if lambda == 1.0 {
        return Ok(Dilation {
            field: f.clone(),
            renormalization: 1.0,
        });
    }
    let s = lambda.sqrt();
    let half = 0.5 * grid.extent();
    if lambda < 1.0 && mass > 0.0 {
        // nodes beyond sqrt(lambda)*L/2 on any axis are never sampled
        let reach = s * half;
        let outside: f64 = (0..grid.len())
            .filter(|&i| {
                let [x, y] = grid.coords(i);
                x.abs() > reach || (grid.dim() == 2 && y.abs() > reach)
            })
            .map(|i| f.values()[i].norm_sqr())
            .sum::<f64>()
            * grid.cell_volume();
        let lost = outside / mass;
        if lost > DILATION_SUPPORT_TOLERANCE {
            return Err(Error::SupportOverflow { lost });
        }
    }

    let m = grid.points();
    let spec = f.forward().zero_nyquist();
    let basis = InterpolationBasis::new(grid, lambda);
    let mut values = match grid.dim() {
        1 => basis.apply(spec.coefficients()),
        _ => {
            // separable evaluation: rows first, then columns
            let c = spec.coefficients();
            let mut rows = vec![Complex64::new(0.0, 0.0); m * m];
            for a in 0..m {
                let out = basis.apply(&c[a * m..(a + 1) * m]);
                rows[a * m..(a + 1) * m].copy_from_slice(&out);
            }
            transpose_square(&mut rows, m);
            let mut out = vec![Complex64::new(0.0, 0.0); m * m];
            for j in 0..m {
                let col = basis.apply(&rows[j * m..(j + 1) * m]);
                out[j * m..(j + 1) * m].copy_from_slice(&col);
            }
            transpose_square(&mut out, m);
            out
        }
    };
    let amp = lambda.powf(grid.dim() as f64 / 4.0);
    for v in values.iter_mut() {
        *v *= amp;
    }
    let g = Field::from_raw(grid, values);
    let new_mass = g.norm_sq();
    let renormalization = if new_mass > 0.0 { (mass / new_mass).sqrt() } else { 1.0 };
    Ok(Dilation {
        field: g.scale(renormalization),
        renormalization,
    })
}

/// Dense evaluation matrix of the 1D trigonometric interpolant at the
/// stretched nodes `sqrt(lambda) x_i`, zero more than one spacing outside
/// the box.
///
/// Phases are split as `2 pi (q mod M)/M + 2 pi q delta/M` with the integer
/// `q = n (i - M/2)` and `delta = sqrt(lambda) - 1`, so near-identity
/// dilations carry no argument-reduction error.
struct InterpolationBasis {
    m: usize,
    // row-major [target][slot]
    entries: Vec<Complex64>,
}

impl InterpolationBasis {
    fn new(grid: &GridSpec, lambda: f64) -> Self {
        let m = grid.points();
        let mi = m as i64;
        let s = lambda.sqrt();
        let delta = (lambda - 1.0) / (s + 1.0);
        let inv_m = 1.0 / m as f64;
        let two_pi_over_m = 2.0 * PI / m as f64;
        let mut entries = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..m {
            let offset = i as i64 - mi / 2;
            // the edge node x = -L/2 keeps its periodic value so that the map
            // is continuous at lambda = 1
            if s * (offset.abs() as f64) > (mi / 2 + 1) as f64 {
                continue;
            }
            let row = &mut entries[i * m..(i + 1) * m];
            row[0] = Complex64::new(inv_m, 0.0);
            for n in 1..mi / 2 {
                let q = n * offset;
                let a = two_pi_over_m * q.rem_euclid(mi) as f64;
                let b = two_pi_over_m * q as f64 * delta;
                let sign = if n % 2 == 0 { inv_m } else { -inv_m };
                let e = Complex64::from_polar(sign, a) * Complex64::from_polar(1.0, b);
                row[n as usize] = e;
                row[m - n as usize] = e.conj();
            }
        }
        InterpolationBasis { m, entries }
    }

    fn apply(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        self.entries
            .chunks_exact(self.m)
            .map(|row| row.iter().zip(coeffs).map(|(e, c)| e * c).sum())
            .collect()
    }
}
