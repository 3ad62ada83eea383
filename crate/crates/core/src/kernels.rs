//! Discretized coupling-function sequences `w_{m,n}[r; k, k̃]`.
//!
//! A `Kernel` stores samples on a tensor grid: one field-energy axis `r` and
//! `m + n` radial momentum axes sharing `k_grid`. Values are laid out
//! row-major with `r` slowest, creation arguments next, annihilation
//! arguments fastest.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::ModeSet;
use crate::interp::{fd_derivative, hermite_eval, pchip_slopes};
use crate::quadrature::{chebyshev_points, merge_points};
use crate::C64;

/// Default upper end of the `w_{0,0}` energy domain.
pub const R_MAX: f64 = 4.0;

/// Default sequence weight ξ.
pub const XI: f64 = 0.25;

/// Smooth step: 1 on `[0, 0.9]`, 0 on `[1, ∞)`, C^∞ in between.
pub fn smooth_cutoff_chi1(r: f64) -> f64 {
    if r <= 0.9 {
        return 1.0;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let t = (1.0 - r) / 0.1;
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// `χ_ρ(r) = χ_1(r/ρ)`.
pub fn chi_rho(r: f64, rho: f64) -> f64 {
    smooth_cutoff_chi1(r / rho)
}

/// `χ̄_ρ(r)² = 1 − χ_ρ(r)²`.
pub fn chibar_sq(r: f64, rho: f64) -> f64 {
    let c = chi_rho(r, rho);
    1.0 - c * c
}

/// Sixteen Chebyshev points on `[0, 1]`.
pub fn default_r_grid() -> Vec<f64> {
    chebyshev_points(16, 0.0, 1.0)
}

/// Chebyshev points on `[0, 1]` plus a coarse affine tail up to `r_max`.
pub fn default_r_grid_00(r_max: f64) -> Vec<f64> {
    let mut pts = default_r_grid();
    let mut r = 1.5;
    while r < r_max + 1e-12 {
        pts.push(r);
        r += 0.5;
    }
    pts.push(r_max);
    merge_points(pts, 1e-12)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    m: usize,
    n: usize,
    r_grid: Vec<f64>,
    k_grid: Vec<f64>,
    values: Vec<C64>,
}

impl Kernel {
    pub fn new(m: usize, n: usize, r_grid: Vec<f64>, k_grid: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if r_grid.is_empty() {
            return Err(Error::InvalidKernel("empty r grid".into()));
        }
        if r_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidKernel("r grid must be increasing".into()));
        }
        let tuples = k_grid.len().pow((m + n) as u32);
        if values.len() != r_grid.len() * tuples {
            return Err(Error::InvalidKernel(format!(
                "expected {} values, got {}",
                r_grid.len() * tuples,
                values.len()
            )));
        }
        if values.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidKernel("non-finite value".into()));
        }
        Ok(Self { m, n, r_grid, k_grid, values })
    }

    pub fn zeros(m: usize, n: usize, r_grid: Vec<f64>, k_grid: Vec<f64>) -> Self {
        let len = r_grid.len() * k_grid.len().pow((m + n) as u32);
        Self { m, n, r_grid, k_grid, values: vec![C64::new(0.0, 0.0); len] }
    }

    /// Sample `f(r, [k_1..k_m, k̃_1..k̃_n])` on the grid.
    pub fn from_fn(
        m: usize,
        n: usize,
        r_grid: Vec<f64>,
        k_grid: Vec<f64>,
        f: impl Fn(f64, &[f64]) -> C64,
    ) -> Self {
        let mut out = Self::zeros(m, n, r_grid, k_grid);
        let mut ks = vec![0.0; m + n];
        for ri in 0..out.r_grid.len() {
            for flat in 0..out.n_tuples() {
                out.fill_momenta(flat, &mut ks);
                let v = f(out.r_grid[ri], &ks);
                let s = out.stride();
                out.values[ri * s + flat] = v;
            }
        }
        out
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.m + self.n
    }

    pub fn r_grid(&self) -> &[f64] {
        &self.r_grid
    }

    pub fn k_grid(&self) -> &[f64] {
        &self.k_grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn n_tuples(&self) -> usize {
        self.k_grid.len().pow(self.order() as u32)
    }

    /// Number of values per r-slice.
    pub fn stride(&self) -> usize {
        self.n_tuples()
    }

    pub fn get(&self, ri: usize, flat: usize) -> C64 {
        self.values[ri * self.stride() + flat]
    }

    pub fn set(&mut self, ri: usize, flat: usize, v: C64) {
        let s = self.stride();
        self.values[ri * s + flat] = v;
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        flat_index(self.k_grid.len(), idx)
    }

    pub fn tuple(&self, flat: usize) -> Vec<usize> {
        tuple_of(self.k_grid.len(), self.order(), flat)
    }

    fn fill_momenta(&self, flat: usize, ks: &mut [f64]) {
        let nk = self.k_grid.len();
        let mut f = flat;
        for a in (0..ks.len()).rev() {
            ks[a] = self.k_grid[f % nk];
            f /= nk;
        }
    }

    /// Smallest momentum of a grid tuple (1 for the `(0,0)` kernel).
    pub fn min_momentum(&self, flat: usize) -> f64 {
        if self.order() == 0 {
            return 1.0;
        }
        let mut ks = vec![0.0; self.order()];
        self.fill_momenta(flat, &mut ks);
        ks.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Samples along r at a fixed momentum tuple.
    pub fn r_fiber(&self, flat: usize) -> Vec<C64> {
        (0..self.r_grid.len()).map(|ri| self.get(ri, flat)).collect()
    }

    /// Monotone cubic interpolation in r at a fixed momentum tuple; affine
    /// continuation beyond the last node.
    pub fn eval_r(&self, r: f64, flat: usize) -> C64 {
        let y = self.r_fiber(flat);
        let d = complex_slopes(&self.r_grid, &y);
        hermite_eval(&self.r_grid, &y, &d, r)
    }

    /// Precomputed r-interpolants for every momentum tuple.
    pub fn r_interpolator(&self) -> RInterpolator {
        let nt = self.n_tuples();
        let mut y = Vec::with_capacity(nt);
        let mut d = Vec::with_capacity(nt);
        for flat in 0..nt {
            let f = self.r_fiber(flat);
            d.push(complex_slopes(&self.r_grid, &f));
            y.push(f);
        }
        RInterpolator { r: self.r_grid.clone(), y, d }
    }

    /// ∂_r by finite differences, same layout as `values`.
    pub fn derivative_r(&self) -> Vec<C64> {
        let nt = self.n_tuples();
        let mut out = vec![C64::new(0.0, 0.0); self.values.len()];
        for flat in 0..nt {
            let d = fd_derivative(&self.r_grid, &self.r_fiber(flat));
            for (ri, v) in d.into_iter().enumerate() {
                out[ri * nt + flat] = v;
            }
        }
        out
    }

    pub fn scale_values(&mut self, c: C64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from total symmetry within each argument group.
    pub fn symmetry_defect(&self) -> f64 {
        let s = symmetrize(self);
        self.values
            .iter()
            .zip(&s.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Values at arbitrary energies and per-axis momentum targets, by
    /// successive one-dimensional interpolation. Along each momentum axis the
    /// weighted function `k^{-μ} w` is interpolated and held constant below
    /// the first node, which continues `w` as a power law `k^μ`.
    pub fn resample(&self, r_targets: &[f64], k_targets: &[f64], mu: f64) -> Result<Vec<C64>> {
        for &q in k_targets {
            if !(q > 0.0 && q <= 1.0 + 1e-12) {
                return Err(Error::Range(format!("momentum {q} outside (0, 1]")));
            }
        }
        let nk = self.k_grid.len();
        let d = self.order();
        let nt = self.n_tuples();
        // r axis first: shape [r_targets][tuples]
        let mut data = vec![C64::new(0.0, 0.0); r_targets.len() * nt];
        for flat in 0..nt {
            let y = self.r_fiber(flat);
            let sl = complex_slopes(&self.r_grid, &y);
            for (ti, &r) in r_targets.iter().enumerate() {
                data[ti * nt + flat] = hermite_eval(&self.r_grid, &y, &sl, r);
            }
        }
        let mut shape: Vec<usize> = std::iter::once(r_targets.len())
            .chain(std::iter::repeat(nk).take(d))
            .collect();
        for axis in 1..=d {
            data = interp_axis(&data, &shape, axis, &self.k_grid, k_targets, mu);
            shape[axis] = k_targets.len();
        }
        Ok(data)
    }
}

fn complex_slopes(x: &[f64], y: &[C64]) -> Vec<C64> {
    let re: Vec<f64> = y.iter().map(|z| z.re).collect();
    let im: Vec<f64> = y.iter().map(|z| z.im).collect();
    let dr = pchip_slopes(x, &re);
    let di = pchip_slopes(x, &im);
    dr.iter().zip(&di).map(|(&a, &b)| C64::new(a, b)).collect()
}

fn interp_axis(
    data: &[C64],
    shape: &[usize],
    axis: usize,
    nodes: &[f64],
    targets: &[f64],
    mu: f64,
) -> Vec<C64> {
    let len = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let nt = targets.len();
    let mut out = vec![C64::new(0.0, 0.0); outer * nt * inner];
    let wn: Vec<f64> = nodes.iter().map(|k| k.powf(-mu)).collect();
    let mut fiber = vec![C64::new(0.0, 0.0); len];
    for o in 0..outer {
        for i in 0..inner {
            for a in 0..len {
                fiber[a] = data[(o * len + a) * inner + i] * wn[a];
            }
            let sl = complex_slopes(nodes, &fiber);
            for (t, &q) in targets.iter().enumerate() {
                let v = if q < nodes[0] {
                    fiber[0]
                } else {
                    hermite_eval(nodes, &fiber, &sl, q)
                };
                out[(o * nt + t) * inner + i] = v * q.powf(mu);
            }
        }
    }
    out
}

pub fn flat_index(nk: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * nk + i)
}

pub fn tuple_of(nk: usize, order: usize, mut flat: usize) -> Vec<usize> {
    let mut t = vec![0; order];
    for a in (0..order).rev() {
        t[a] = flat % nk;
        flat /= nk;
    }
    t
}

/// Per-tuple cubic Hermite data along r.
#[derive(Clone, Debug)]
pub struct RInterpolator {
    r: Vec<f64>,
    y: Vec<Vec<C64>>,
    d: Vec<Vec<C64>>,
}

impl RInterpolator {
    pub fn eval(&self, r: f64, flat: usize) -> C64 {
        hermite_eval(&self.r, &self.y[flat], &self.d[flat], r)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Average over permutations within the creation and within the annihilation
/// arguments.
pub fn symmetrize(kernel: &Kernel) -> Kernel {
    let (m, n) = (kernel.m, kernel.n);
    if m <= 1 && n <= 1 {
        return kernel.clone();
    }
    let pm = permutations(m);
    let pn = permutations(n);
    let norm = (pm.len() * pn.len()) as f64;
    let nk = kernel.k_grid.len();
    let nt = kernel.n_tuples();
    let mut out = kernel.clone();
    let mut perm_idx = vec![0usize; m + n];
    for flat in 0..nt {
        let t = tuple_of(nk, m + n, flat);
        for ri in 0..kernel.r_grid.len() {
            let mut acc = C64::new(0.0, 0.0);
            for a in &pm {
                for b in &pn {
                    for i in 0..m {
                        perm_idx[i] = t[a[i]];
                    }
                    for i in 0..n {
                        perm_idx[m + i] = t[m + b[i]];
                    }
                    acc += kernel.get(ri, flat_index(nk, &perm_idx));
                }
            }
            out.set(ri, flat, acc / norm);
        }
    }
    out
}

/// `‖w‖_{μ,s}`. For `m + n ≥ 1`: sup of `max_j |k_j|^{-μ} |w|` plus, for
/// `s = 1`, the same for `∂_r w`. For `(0,0)`: `|w(0)| + s · sup |∂_r w|`.
pub fn norm_mu_s(kernel: &Kernel, mu: f64, s: u32) -> Result<f64> {
    if s > 1 {
        return Err(Error::InvalidKernel(format!("smoothness index {s} not supported")));
    }
    if kernel.values.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidKernel("non-finite value".into()));
    }
    let deriv = if s == 1 { Some(kernel.derivative_r()) } else { None };
    if kernel.order() == 0 {
        let w0 = kernel.eval_r(0.0, 0).norm();
        let d = deriv
            .map(|d| d.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .unwrap_or(0.0);
        return Ok(w0 + d);
    }
    let nt = kernel.n_tuples();
    let mut sup0 = 0.0f64;
    let mut sup1 = 0.0f64;
    for flat in 0..nt {
        let wgt = kernel.min_momentum(flat).powf(-mu);
        for ri in 0..kernel.r_grid.len() {
            sup0 = sup0.max(wgt * kernel.get(ri, flat).norm());
            if let Some(d) = &deriv {
                sup1 = sup1.max(wgt * d[ri * nt + flat].norm());
            }
        }
    }
    Ok(sup0 + sup1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormWhich {
    Full,
    Interaction,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolydiscParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormReport {
    pub per_kernel: Vec<((usize, usize), f64)>,
    pub full: f64,
    pub interaction: f64,
    pub w00_at_0: f64,
    pub derivative_deviation: f64,
}

impl NormReport {
    pub fn params(&self) -> PolydiscParams {
        PolydiscParams {
            alpha: self.w00_at_0,
            beta: self.derivative_deviation,
            gamma: self.interaction,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KernelSequence {
    pub max_mn: usize,
    pub mu: f64,
    pub xi: f64,
    pub discarded_norm: f64,
    modes: ModeSet,
    kernels: BTreeMap<(usize, usize), Kernel>,
}

impl KernelSequence {
    /// Empty sequence (no kernels) over `modes`.
    pub fn new(modes: ModeSet, mu: f64, max_mn: usize) -> Self {
        Self { max_mn, mu, xi: XI, discarded_norm: 0.0, modes, kernels: BTreeMap::new() }
    }

    /// `w_{0,0}(r) = r` and nothing else.
    pub fn free_field(modes: ModeSet, mu: f64, max_mn: usize) -> Self {
        let mut s = Self::new(modes, mu, max_mn);
        let w00 = Kernel::from_fn(0, 0, default_r_grid_00(R_MAX), vec![], |r, _| C64::new(r, 0.0));
        s.kernels.insert((0, 0), w00);
        s
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn insert(&mut self, kernel: Kernel) -> Result<()> {
        if kernel.order() > self.max_mn {
            return Err(Error::InvalidKernel(format!(
                "kernel order {} exceeds max_mn {}",
                kernel.order(),
                self.max_mn
            )));
        }
        if kernel.order() > 0 && kernel.k_grid != self.modes.momenta() {
            return Err(Error::GridMismatch("kernel k-grid differs from the sequence modes".into()));
        }
        self.kernels.insert((kernel.m, kernel.n), kernel);
        Ok(())
    }

    pub fn get(&self, m: usize, n: usize) -> Option<&Kernel> {
        self.kernels.get(&(m, n))
    }

    pub fn get_mut(&mut self, m: usize, n: usize) -> Option<&mut Kernel> {
        self.kernels.get_mut(&(m, n))
    }

    pub fn kernels(&self) -> impl Iterator<Item = (&(usize, usize), &Kernel)> {
        self.kernels.iter()
    }

    pub fn interaction(&self) -> impl Iterator<Item = (&(usize, usize), &Kernel)> {
        self.kernels.iter().filter(|(k, _)| k.0 + k.1 > 0)
    }

    pub fn w00(&self) -> Option<&Kernel> {
        self.get(0, 0)
    }

    pub fn w00_at(&self, r: f64) -> C64 {
        self.w00().map(|k| k.eval_r(r, 0)).unwrap_or(C64::new(r, 0.0))
    }

    pub fn w00_at_0(&self) -> C64 {
        self.w00_at(0.0)
    }

    /// Subtract the constant `w_{0,0}(0)`.
    pub fn stable_part(&self) -> Self {
        let mut s = self.clone();
        let e = self.w00_at_0();
        if let Some(k) = s.kernels.get_mut(&(0, 0)) {
            for v in k.values_mut() {
                *v -= e;
            }
        }
        s
    }

    /// Add a constant to `w_{0,0}`.
    pub fn shift_w00(&mut self, c: C64) {
        if let Some(k) = self.kernels.get_mut(&(0, 0)) {
            for v in k.values_mut() {
                *v += c;
            }
        }
    }

    pub fn scale_all(&mut self, c: C64) {
        for k in self.kernels.values_mut() {
            k.scale_values(c);
        }
    }
}

pub fn seq_norm(seq: &KernelSequence, which: NormWhich, s: u32) -> Result<f64> {
    let mut total = 0.0;
    for (&(m, n), k) in &seq.kernels {
        if which == NormWhich::Interaction && m + n == 0 {
            continue;
        }
        total += seq.xi.powi(-((m + n) as i32)) * norm_mu_s(k, seq.mu, s)?;
    }
    Ok(total)
}

pub fn norm_report(seq: &KernelSequence) -> Result<NormReport> {
    let mut per = vec![];
    for (&key, k) in &seq.kernels {
        per.push((key, norm_mu_s(k, seq.mu, 1)?));
    }
    let (w0, dev) = match seq.w00() {
        Some(k) => {
            let d = k.derivative_r();
            let dev = d.iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max);
            (k.eval_r(0.0, 0).norm(), dev)
        }
        None => (0.0, 1.0),
    };
    Ok(NormReport {
        per_kernel: per,
        full: seq_norm(seq, NormWhich::Full, 1)?,
        interaction: seq_norm(seq, NormWhich::Interaction, 1)?,
        w00_at_0: w0,
        derivative_deviation: dev,
    })
}

pub fn polydisc_check(seq: &KernelSequence, p: PolydiscParams) -> Result<(bool, NormReport)> {
    let r = norm_report(seq)?;
    // finite differences of an affine w00 carry rounding noise
    let le = |x: f64, bound: f64| x <= bound * (1.0 + 1e-12) + 1e-13;
    let ok = le(r.w00_at_0, p.alpha) && le(r.derivative_deviation, p.beta) && le(r.interaction, p.gamma);
    Ok((ok, r))
}

/// Kernel of `ρ^{-1} S_ρ(H(w))`: `w_{m,n}[r; k] → ρ^{m+n−1} w_{m,n}[ρr; ρk]`.
pub fn scale_kernels(seq: &KernelSequence, rho: f64) -> Result<KernelSequence> {
    if !(rho > 0.0 && rho <= 0.5) {
        return Err(Error::Range(format!("scale {rho} outside (0, 1/2]")));
    }
    let mut out = seq.clone();
    for (&(m, n), k) in &seq.kernels {
        let rt: Vec<f64> = k.r_grid.iter().map(|r| rho * r).collect();
        let kt: Vec<f64> = k.k_grid.iter().map(|q| rho * q).collect();
        let mut vals = k.resample(&rt, &kt, seq.mu)?;
        let pref = rho.powi((m + n) as i32 - 1);
        for v in &mut vals {
            *v *= pref;
        }
        let nk = Kernel::new(m, n, k.r_grid.clone(), k.k_grid.clone(), vals)?;
        out.kernels.insert((m, n), nk);
    }
    Ok(out)
}

/// Largest allowed |Im θ| for complex dilation.
pub const THETA_STRIP: f64 = std::f64::consts::FRAC_PI_4;

pub fn check_theta(theta: C64) -> Result<()> {
    if theta.im.abs() >= THETA_STRIP || !theta.is_finite() {
        return Err(Error::Domain(format!("θ = {theta}")));
    }
    Ok(())
}

/// Dilated closed-form kernel sampled on a grid:
/// `w_θ[r; k] = e^{-(m+n)θ} w[e^{-θ} r; e^{-θ} k]`.
///
/// Per leg, `a^#` contributes `e^{-3θ/2}` and the `|k|^{-1/2}` measure
/// `e^{θ/2}`, which combine to the single factor `e^{-θ}`.
pub fn dilate_analytic(
    f: impl Fn(C64, &[C64]) -> C64,
    m: usize,
    n: usize,
    theta: C64,
    r_grid: Vec<f64>,
    k_grid: Vec<f64>,
) -> Result<Kernel> {
    check_theta(theta)?;
    let e = (-theta).exp();
    let pref = (-(theta * (m + n) as f64)).exp();
    Ok(Kernel::from_fn(m, n, r_grid, k_grid, |r, ks| {
        let args: Vec<C64> = ks.iter().map(|&k| e * k).collect();
        pref * f(e * r, &args)
    }))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelSnapshot {
    pub m: usize,
    pub n: usize,
    pub mu: f64,
    pub r_grid: Vec<f64>,
    pub k_grid: Vec<f64>,
    pub values: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SequenceSnapshot {
    pub xi: f64,
    pub mu: f64,
    pub max_mn: usize,
    pub discarded_norm: f64,
    pub k_grid: Vec<f64>,
    pub k_weights: Vec<f64>,
    pub kernels: Vec<KernelSnapshot>,
}

impl Kernel {
    pub fn snapshot(&self, mu: f64) -> KernelSnapshot {
        KernelSnapshot {
            m: self.m,
            n: self.n,
            mu,
            r_grid: self.r_grid.clone(),
            k_grid: self.k_grid.clone(),
            values: self.values.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn from_snapshot(s: &KernelSnapshot) -> Result<Self> {
        Self::new(
            s.m,
            s.n,
            s.r_grid.clone(),
            s.k_grid.clone(),
            s.values.iter().map(|v| C64::new(v[0], v[1])).collect(),
        )
    }
}

impl KernelSequence {
    pub fn snapshot(&self) -> SequenceSnapshot {
        SequenceSnapshot {
            xi: self.xi,
            mu: self.mu,
            max_mn: self.max_mn,
            discarded_norm: self.discarded_norm,
            k_grid: self.modes.momenta().to_vec(),
            k_weights: self.modes.weights().to_vec(),
            kernels: self.kernels.values().map(|k| k.snapshot(self.mu)).collect(),
        }
    }

    pub fn from_snapshot(s: &SequenceSnapshot) -> Result<Self> {
        let modes = if s.k_grid.is_empty() {
            ModeSet::empty()
        } else {
            ModeSet::new(s.k_grid.clone(), s.k_weights.clone())?
        };
        let mut seq = Self::new(modes, s.mu, s.max_mn);
        seq.xi = s.xi;
        seq.discarded_norm = s.discarded_norm;
        for k in &s.kernels {
            seq.insert(Kernel::from_snapshot(k)?)?;
        }
        Ok(seq)
    }
}
