//! Coupling functions of the generalized Pauli-Fierz transformation.
//!
//! Geometry: the particle position `x` is taken parallel to the polarization
//! vector `e_λ(k)`, so `k·x = 0` and the mollifier argument is
//! `s = |k|^{1/2} |x|`. This is the configuration maximizing `|s|` at given
//! `|k|, |x|`. With `e_λ ⊥ k`,
//! `|χ_{λ,x}(k)|² = χ(k)² [(1 − φ'(s))² + |k| φ(s)²]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mollifier {
    /// `φ(z) = tanh(scale · z)`
    Tanh { scale: f64 },
    /// `φ(z) = z`, the standard transformation.
    Identity,
}

impl Mollifier {
    pub fn value(&self, z: f64) -> f64 {
        match *self {
            Mollifier::Tanh { scale } => (scale * z).tanh(),
            Mollifier::Identity => z,
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        match *self {
            Mollifier::Tanh { scale } => {
                let t = (scale * z).tanh();
                scale * (1.0 - t * t)
            }
            Mollifier::Identity => 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let d0 = self.derivative(0.0);
        if (d0 - 1.0).abs() > 1e-10 {
            return Err(Error::Mollifier(format!("φ'(0) = {d0}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PFCouplingReport {
    pub x_grid: Vec<f64>,
    pub k_grid: Vec<f64>,
    /// `f_{x,λ}(k)`, x-major.
    pub f_values: Vec<f64>,
    /// `|χ_{λ,x}(k)|`, x-major.
    pub chi_abs: Vec<f64>,
    /// `|k| f_{x,λ}(k)`, the coupling function of `G(x)`, x-major.
    pub g_kernel: Vec<f64>,
    /// `(V_g − V)(x) / g²` per x point.
    pub vg_shift: Vec<f64>,
    /// `sup |χ_{λ,x}(k)| / min(1, √|k| ⟨x⟩)` over the grid.
    pub c1: f64,
    /// `sup_x Σ_λ ∫ d³k |χ_{λ,x}(k)|² / |k|`.
    pub c2: f64,
}

fn gaussian(k: f64, cutoff: f64) -> f64 {
    (-(k * k) / (cutoff * cutoff)).exp()
}

fn chi_sq(k: f64, s: f64, cutoff: f64, phi: Mollifier) -> f64 {
    let c = gaussian(k, cutoff);
    let a = 1.0 - phi.derivative(s);
    let b = phi.value(s);
    c * c * (a * a + k * b * b)
}

/// Evaluate the transformed coupling functions for a Gaussian ultraviolet
/// cutoff `χ(k) = exp(−k²/Λ²)` on an `(|x|, |k|)` grid.
pub fn pauli_fierz_transform(
    cutoff: f64,
    phi: Mollifier,
    x_grid: &[f64],
    k_grid: &[f64],
) -> Result<PFCouplingReport> {
    phi.validate()?;
    if !(cutoff > 0.0) {
        return Err(Error::Config(format!("cutoff {cutoff} must be positive")));
    }
    if k_grid.iter().any(|&k| !(k > 0.0)) || x_grid.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::Config("grid points must satisfy |k| > 0, |x| ≥ 0".into()));
    }
    let nk = k_grid.len();
    let mut f_values = Vec::with_capacity(x_grid.len() * nk);
    let mut chi_abs = Vec::with_capacity(x_grid.len() * nk);
    let mut g_kernel = Vec::with_capacity(x_grid.len() * nk);
    let mut c1 = 0.0f64;
    for &x in x_grid {
        let bracket = (1.0 + x * x).sqrt();
        for &k in k_grid {
            let s = k.sqrt() * x;
            let f = gaussian(k, cutoff) / k.sqrt() * phi.value(s);
            let c = chi_sq(k, s, cutoff, phi).sqrt();
            f_values.push(f);
            g_kernel.push(k * f);
            chi_abs.push(c);
            c1 = c1.max(c / (k.sqrt() * bracket).min(1.0));
        }
    }
    let (vg_shift, c2) = angular_integrals(cutoff, phi, x_grid);
    Ok(PFCouplingReport {
        x_grid: x_grid.to_vec(),
        k_grid: k_grid.to_vec(),
        f_values,
        chi_abs,
        g_kernel,
        vg_shift,
        c1,
        c2,
    })
}

// With x along the z-axis, one polarization has e·x = −|x| sin ϑ and the
// other is orthogonal to x. Integrates over |k| ∈ (0, 8Λ) and cos ϑ.
fn angular_integrals(cutoff: f64, phi: Mollifier, x_grid: &[f64]) -> (Vec<f64>, f64) {
    let (ks, kw) = gauss_legendre_on(96, 0.0, 8.0 * cutoff);
    let (cs, cw) = gauss_legendre_on(48, -1.0, 1.0);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut vg = Vec::with_capacity(x_grid.len());
    let mut c2 = 0.0f64;
    for &x in x_grid {
        let mut f_part = 0.0;
        let mut chi_part = 0.0;
        for (&k, &wk) in ks.iter().zip(&kw) {
            for (&ct, &wc) in cs.iter().zip(&cw) {
                let st = (1.0 - ct * ct).max(0.0).sqrt();
                let w = two_pi * wk * wc * k * k;
                let mut acc_f = 0.0;
                let mut acc_c = 0.0;
                for s in [k.sqrt() * x * st, 0.0] {
                    let fv = gaussian(k, cutoff) / k.sqrt() * phi.value(s);
                    acc_f += k * fv * fv;
                    acc_c += chi_sq(k, s, cutoff, phi) / k;
                }
                f_part += w * acc_f;
                chi_part += w * acc_c;
            }
        }
        vg.push(2.0 * f_part + chi_part);
        c2 = c2.max(chi_part);
    }
    (vg, c2)
}

/// `n` points `|k| = i/n`, `i = 1..n`, and `n` points `|x|` evenly on
/// `[0, x_max]`.
pub fn default_grids(n: usize, x_max: f64) -> (Vec<f64>, Vec<f64>) {
    let k = (1..=n).map(|i| i as f64 / n as f64).collect();
    let x = (0..n).map(|i| x_max * i as f64 / (n - 1).max(1) as f64).collect();
    (x, k)
}
