//! Reference computations that share no code with the library: their own
//! FFT plans, their own functionals and their own iterations.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Periodic 1D pseudospectral line on `[-L/2, L/2)`.
pub struct Line {
    pub extent: f64,
    pub points: usize,
    k2: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Line {
    pub fn new(extent: f64, points: usize) -> Self {
        let mut planner = FftPlanner::new();
        let k2 = (0..points)
            .map(|j| {
                let n = if j < points / 2 { j as f64 } else { j as f64 - points as f64 };
                let k = 2.0 * PI * n / extent;
                k * k
            })
            .collect();
        Line {
            extent,
            points,
            k2,
            fwd: planner.plan_fft_forward(points),
            inv: planner.plan_fft_inverse(points),
        }
    }

    pub fn dx(&self) -> f64 {
        self.extent / self.points as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|j| -0.5 * self.extent + j as f64 * self.dx()).collect()
    }

    pub fn integral(&self, g: &[f64]) -> f64 {
        g.iter().sum::<f64>() * self.dx()
    }

    /// Applies the Fourier multiplier `sym(k^2)` to a real array.
    pub fn apply(&self, u: &[f64], sym: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        for (b, &k2) in buf.iter_mut().zip(&self.k2) {
            *b *= sym(k2);
        }
        self.inv.process(&mut buf);
        let s = 1.0 / self.points as f64;
        buf.iter().map(|b| b.re * s).collect()
    }

    pub fn mass(&self, u: &[f64]) -> f64 {
        self.integral(&u.iter().map(|x| x * x).collect::<Vec<_>>())
    }

    /// `<sym(-Lap) u, u>`.
    pub fn quadratic(&self, u: &[f64], sym: impl Fn(f64) -> f64) -> f64 {
        let v = self.apply(u, sym);
        self.integral(&u.iter().zip(&v).map(|(a, b)| a * b).collect::<Vec<_>>())
    }

    pub fn power(&self, u: &[f64], p: f64) -> f64 {
        self.integral(&u.iter().map(|x| x.abs().powf(p)).collect::<Vec<_>>())
    }
}

fn scale(u: &mut [f64], a: f64) {
    u.iter_mut().for_each(|x| *x *= a);
}

/// Solution of `gamma u'''' - u'' + alpha u = |u|^{2 sigma} u` by a damped
/// preconditioned gradient flow, projected back onto the Nehari manifold
/// after every step. Returns the profile and the final residual.
pub fn nehari_flow(line: &Line, gamma: f64, sigma: f64, alpha: f64) -> (Vec<f64>, f64) {
    let sym = |k2: f64| gamma * k2 * k2 + k2 + alpha;
    let w = (gamma / alpha).powf(0.25);
    let mut u: Vec<f64> = line
        .nodes()
        .iter()
        .map(|x| alpha.powf(0.5 / sigma) / (x / w).cosh())
        .collect();
    let step = 0.5;
    let mut residual = f64::INFINITY;
    for _ in 0..50_000 {
        let t = (line.quadratic(&u, sym) / line.power(&u, 2.0 * sigma + 2.0)).powf(0.5 / sigma);
        scale(&mut u, t);
        let nl: Vec<f64> = u.iter().map(|x| x.abs().powf(2.0 * sigma) * x).collect();
        let lu = line.apply(&u, sym);
        let r2: f64 = lu.iter().zip(&nl).map(|(a, b)| (a - b) * (a - b)).sum();
        residual = (r2 / u.iter().map(|x| x * x).sum::<f64>()).sqrt();
        if residual < 1e-11 {
            break;
        }
        let v = line.apply(&nl, |k2| 1.0 / sym(k2));
        for (a, b) in u.iter_mut().zip(&v) {
            *a = (1.0 - step) * *a + step * b;
        }
    }
    (u, residual)
}

/// 1D Weinstein quotient `||u||_p^p / (||u''||^{sigma/2} ||u||^{2 + 2 sigma - sigma/2})`.
pub fn weinstein_1d(line: &Line, u: &[f64], sigma: f64) -> f64 {
    let a = line.quadratic(u, |k2| k2 * k2);
    let m = line.mass(u);
    line.power(u, 2.0 * sigma + 2.0) / (a.powf(0.25 * sigma) * m.powf(1.0 + sigma - 0.25 * sigma))
}

/// Supremum of the 1D Weinstein quotient by preconditioned ascent with
/// backtracking, the mass renormalized to one after each accepted step.
pub fn weinstein_ascent(line: &Line, sigma: f64) -> f64 {
    let p = 2.0 * sigma + 2.0;
    let me = 1.0 + sigma - 0.25 * sigma;
    let mut u: Vec<f64> = line.nodes().iter().map(|x| (-x * x).exp()).collect();
    let m = line.mass(&u);
    scale(&mut u, m.sqrt().recip());
    let mut w = weinstein_1d(line, &u, sigma);
    let mut h = 0.1;
    let mut stalls = 0;
    for _ in 0..20_000 {
        let a = line.quadratic(&u, |k2| k2 * k2);
        let c = line.power(&u, p);
        let m = line.mass(&u);
        let bl = line.apply(&u, |k2| k2 * k2);
        let g: Vec<f64> = u
            .iter()
            .zip(&bl)
            .map(|(x, b)| p * x.abs().powf(p - 2.0) * x / c - 0.5 * sigma * b / a - 2.0 * me * x / m)
            .collect();
        let d = line.apply(&g, |k2| 1.0 / (1.0 + k2 * k2));
        let dn = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        loop {
            let mut v: Vec<f64> = u.iter().zip(&d).map(|(x, y)| x + h * un / dn * y).collect();
            let mv = line.mass(&v);
            scale(&mut v, mv.sqrt().recip());
            let wv = weinstein_1d(line, &v, sigma);
            if wv > w {
                stalls = if (wv - w) < 1e-15 * w { stalls + 1 } else { 0 };
                u = v;
                w = wv;
                h *= 1.5;
                break;
            }
            h *= 0.5;
            if h < 1e-14 {
                return w;
            }
        }
        if stalls > 20 {
            break;
        }
    }
    w
}

/// Closed-form `(mass, ||grad u||^2, ||Lap u||^2, ||u||_p^p)` of
/// `u = a exp(-s |x|^2)` in `N` dimensions.
pub fn gaussian_integrals(a: f64, s: f64, n: usize, p: f64) -> [f64; 4] {
    let nf = n as f64;
    let m = a * a * (PI / (2.0 * s)).powf(0.5 * nf);
    [
        m,
        m * nf * s,
        m * s * s * nf * (nf + 2.0),
        a.abs().powf(p) * (PI / (p * s)).powf(0.5 * nf),
    ]
}
