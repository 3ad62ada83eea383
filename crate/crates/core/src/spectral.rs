//! Isolation of particle levels, the effective-energy map of a kernel
//! Hamiltonian, and the scalar fixed-point equation for ground states and
//! resonances.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::feshbach::{feshbach_map, q_pi, Decimation, FeshbachOptions, QWhich};
use crate::fock::build_basis;
use crate::hamiltonian::{assemble_kernel_hamiltonian, GHHamiltonian, ParticleModel};
use crate::kernels::{norm_report, KernelSequence};
use crate::linalg::{eig, smallest_singular_vector, vec_norm, OperatorMatrix};
use crate::rg::{first_decimation, WickConfig};
use crate::C64;

/// `Q_j`: the closed square of half-side `δ_j/3` around `λ_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralRegion {
    pub j: usize,
    pub lambda_j: C64,
    pub delta_j: f64,
    pub half_side: f64,
}

impl SpectralRegion {
    pub fn contains(&self, z: C64) -> bool {
        let d = z - self.lambda_j;
        d.re.abs() <= self.half_side && d.im.abs() <= self.half_side
    }

    /// `n` points per side along the boundary, counter-clockwise.
    pub fn boundary(&self, n: usize) -> Vec<C64> {
        let h = self.half_side;
        let corners = [C64::new(-h, -h), C64::new(h, -h), C64::new(h, h), C64::new(-h, h)];
        let mut out = Vec::with_capacity(4 * n);
        for s in 0..4 {
            let (a, b) = (corners[s], corners[(s + 1) % 4]);
            for i in 0..n {
                out.push(self.lambda_j + a + (b - a) * (i as f64 / n as f64));
            }
        }
        out
    }
}

/// Distance from `z` to the half-line `a + [0, ∞)`.
pub fn dist_to_ray(z: C64, a: C64) -> f64 {
    let d = z - a;
    if d.re >= 0.0 {
        d.im.abs()
    } else {
        d.norm()
    }
}

/// `δ_j = dist(λ_j, (σ(H_p) \ {λ_j}) + [0, ∞))`. Infinite for a
/// one-level particle.
pub fn gap_and_region(particle: &ParticleModel, j: usize) -> Result<SpectralRegion> {
    if j >= particle.dim() {
        return Err(Error::Config(format!("eigenvalue index {j} out of range")));
    }
    let lj = particle.eigenvalue(j);
    let delta = (0..particle.dim())
        .filter(|&i| i != j)
        .map(|i| dist_to_ray(lj, particle.eigenvalue(i)))
        .fold(f64::INFINITY, f64::min);
    if !(delta > 1e-12) {
        return Err(Error::Ungapped { j, delta });
    }
    Ok(SpectralRegion { j, lambda_j: lj, delta_j: delta, half_side: delta / 3.0 })
}

/// `κ_j` as the inverse of the largest `‖(H_p + s − λ)^{-1} P̄_j‖` over
/// 64 boundary points and the center of `Q_j`, maximized over field
/// energies `s ≥ 0`. Infinite for a one-level particle.
pub fn kappa_estimate(particle: &ParticleModel, region: &SpectralRegion) -> Result<f64> {
    let d = particle.dim();
    if d == 1 {
        return Ok(f64::INFINITY);
    }
    let cluster = particle.cluster(region.j, 1e-10);
    let others: Vec<(C64, OperatorMatrix)> = (0..d)
        .filter(|i| !cluster.contains(i))
        .map(|i| (particle.eigenvalue(i), particle.rank_one_projection(i)))
        .collect();
    let mut pts = region.boundary(16);
    pts.push(region.lambda_j);
    let mut sup = 0.0f64;
    for &lam in &pts {
        let mut shifts: Vec<f64> = (0..=64).map(|i| 4.0 * i as f64 / 64.0).collect();
        for (l, _) in &others {
            shifts.push((lam - l).re.max(0.0));
        }
        for s in shifts {
            let mut res = OperatorMatrix::zeros(d);
            for (l, p) in &others {
                let den = l + s - lam;
                if den.norm() < 1e-300 {
                    return Err(Error::RegionInvalid(format!("resolvent singular at {lam}")));
                }
                res = res.add(&p.scale(den.inv()));
            }
            sup = sup.max(res.op_norm());
        }
    }
    Ok(1.0 / sup)
}

/// Eigenvalue of the kernel Hamiltonian `H(w)` on the Fock space of
/// `seq.modes()` truncated at `n_max`, with the smallest real part among
/// those within `40·max(α, γ) + 1e-12` of 0 (α = |w_{0,0}(0)|, γ the
/// interaction norm). Without modes this is `w_{0,0}(0)`.
pub fn effective_energy(seq: &KernelSequence, n_max: usize) -> Result<C64> {
    if seq.modes().is_empty() {
        return Ok(seq.w00_at_0());
    }
    let basis = build_basis(seq.modes(), n_max)?;
    let h = assemble_kernel_hamiltonian(seq, &basis)?;
    let (vals, _) = eig(&h)?;
    let rep = norm_report(seq)?;
    let radius = 40.0 * rep.w00_at_0.max(rep.interaction) + 1e-12;
    vals.into_iter()
        .filter(|z| z.norm() <= radius)
        .min_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap())
        .ok_or_else(|| Error::StabilityRegion(format!("radius {radius:.3e}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Defaults to `min(κ_j, 1/2, √g)`.
    pub rho: Option<f64>,
    pub l_max: usize,
    pub max_mn: usize,
    /// Occupation cutoff of the kernel-Hamiltonian eigenproblem.
    pub n_max: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { rho: None, l_max: 4, max_mn: 2, n_max: 2, tol: 1e-10, max_iter: 50 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResonanceResult {
    pub j: usize,
    /// Eigenvalue of the physical (deformed) Hamiltonian.
    pub e: C64,
    /// The same in the normalized frame.
    pub z: C64,
    pub iterations: usize,
    pub residual: f64,
    pub rho: f64,
    pub theta: C64,
    /// Polydisc α of the first decimation at `λ = λ_j`.
    pub alpha: f64,
    pub delta_j: f64,
    /// `|z − λ_j| ≤ 15 α`.
    pub shift_bound_ok: bool,
    /// `|Δφ/Δz + 1|` between successive iterates.
    pub slope_defects: Vec<f64>,
}

/// Default scale `min(κ_j, 1/2, √g)`.
pub fn default_rho(h: &GHHamiltonian, j: usize) -> Result<f64> {
    let hn = h.normalized()?;
    let region = gap_and_region(&hn.particle, j)?;
    let kappa = kappa_estimate(&hn.particle, &region)?;
    let g = h.g();
    let mut rho = kappa.min(0.5);
    if g > 0.0 {
        rho = rho.min(g.sqrt());
    }
    Ok(rho)
}

/// `φ_j(z) = ρ [w_{0,0}(0; z) + e(H_s(z))]` where `H_s` is the stable part of
/// the decimated Hamiltonian at spectral parameter `z` (normalized frame).
pub fn phi(h: &GHHamiltonian, j: usize, z: C64, rho: f64, cfg: &SolverConfig) -> Result<C64> {
    let wc = WickConfig { l_max: cfg.l_max, lambda: z, rho, j, max_mn: cfg.max_mn, extra_r: vec![] };
    let seq = first_decimation(h, &wc)?;
    let e = effective_energy(&seq.stable_part(), cfg.n_max)?;
    Ok(rho * (seq.w00_at_0() + e))
}

/// Damped iteration `z ← z + s φ_j(z)` from `z = λ_j`, halving `s` whenever
/// the residual grows.
pub fn solve_phi(h: &GHHamiltonian, j: usize, cfg: &SolverConfig) -> Result<ResonanceResult> {
    let hn = h.normalized()?;
    let region = gap_and_region(&hn.particle, j)?;
    let rho = match cfg.rho {
        Some(r) => r,
        None => default_rho(h, j)?,
    };
    let lj = region.lambda_j;
    let seq0 = first_decimation(
        &hn,
        &WickConfig { l_max: cfg.l_max, lambda: lj, rho, j, max_mn: cfg.max_mn, extra_r: vec![] },
    )?;
    let alpha = seq0.w00_at_0().norm();
    let mut z = lj;
    let mut f = phi(&hn, j, z, rho, cfg)?;
    let mut res = f.norm();
    let mut s = 1.0;
    let mut it = 0;
    let mut slopes = vec![];
    while res > cfg.tol && it < cfg.max_iter {
        it += 1;
        let zn = z + f * s;
        if !region.contains(zn) {
            return Err(Error::OutsideRegion(format!("iterate {zn}")));
        }
        let fn_ = phi(&hn, j, zn, rho, cfg)?;
        if zn != z {
            slopes.push(((fn_ - f) / (zn - z) + 1.0).norm());
        }
        if fn_.norm() > res && s > 1e-3 {
            s *= 0.5;
            continue;
        }
        z = zn;
        f = fn_;
        res = f.norm();
    }
    if res > cfg.tol {
        return Err(Error::NonConvergence { iterations: it, residual: res });
    }
    // the normalized frame multiplies the spectrum by 1/field_factor
    let e = z * h.field_factor;
    Ok(ResonanceResult {
        j,
        e,
        z,
        iterations: it,
        residual: res,
        rho,
        theta: h.theta,
        alpha,
        delta_j: region.delta_j,
        shift_bound_ok: (z - lj).norm() <= 15.0 * alpha,
        slope_defects: slopes,
    })
}

/// Golden-rule width: `γ_j = π Σ_{i<j, 0<Δ≤1} Δ |φ_i A(Δ) ψ_j|²` with
/// `Δ = λ_j − λ_i` and `A(k)` the sum of emission terms `κ(k) M`, taken at
/// zero dilation. `Im e_j ≈ −g² γ_j`.
pub fn fgr_width(h: &GHHamiltonian, j: usize) -> Result<f64> {
    let p = h.particle.at_theta(C64::new(0.0, 0.0))?;
    if j >= p.dim() {
        return Err(Error::Config(format!("eigenvalue index {j} out of range")));
    }
    let lj = p.eigenvalue(j).re;
    let psi = p.psi(j);
    let mut gamma = 0.0;
    for i in 0..j {
        let delta = lj - p.eigenvalue(i).re;
        if !(delta > 0.0 && delta <= 1.0) {
            continue;
        }
        let phi_i = p.phi(i);
        let mut amp = C64::new(0.0, 0.0);
        for t in h.interaction.terms.iter().filter(|t| t.m == 1 && t.n == 0) {
            let mp = t.matrix.mul_vec(&psi);
            let el: C64 = phi_i.iter().zip(&mp).map(|(a, b)| a * b).sum();
            amp += t.profile.eval(C64::new(delta, 0.0)) * el;
        }
        gamma += std::f64::consts::PI * delta * amp.norm_sqr() * h.interaction.prefactor.norm_sqr();
    }
    Ok(gamma)
}

/// True iff every eigenvalue other than `e_j` (within `tol`) satisfies
/// `Re w ≥ 0` and `|Im w| ≤ ½ Re w` for `w = e^{θ}(z − e_j)`.
pub fn cone_check(eigs: &[C64], e_j: C64, theta: C64, tol: f64) -> bool {
    let rot = theta.exp();
    eigs.iter().filter(|z| (*z - e_j).norm() > tol).all(|&z| {
        let w = rot * (z - e_j);
        w.re >= -tol && w.im.abs() <= 0.5 * w.re + tol
    })
}

/// Null vector of the Feshbach block `(φ_j ⊗ 1) F(λ) (ψ_j ⊗ 1)` on the field
/// space, with its smallest singular value.
pub fn feshbach_null_vector(dec: &Decimation, lambda: C64, opts: FeshbachOptions) -> Result<(f64, Vec<C64>)> {
    let f = feshbach_map(dec, lambda, opts)?;
    let (d, nf) = (dec.particle_dim(), dec.field_dim());
    let (psi, phi_row) = dec.particle_vectors();
    let block = OperatorMatrix::from_fn(nf, |a, b| {
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..d {
            for q in 0..d {
                acc += phi_row[p] * f.matrix.get(p * nf + a, q * nf + b) * psi[q];
            }
        }
        acc
    });
    smallest_singular_vector(&block)
}

/// `Ψ = Q_π(λ) (ψ_j ⊗ η)` with its relative residual `‖(H − λ)Ψ‖ / ‖Ψ‖`.
pub fn reconstruct_eigenvector(
    dec: &Decimation,
    lambda: C64,
    field_vec: &[C64],
    opts: FeshbachOptions,
) -> Result<(Vec<C64>, f64)> {
    let nf = dec.field_dim();
    if field_vec.len() != nf {
        return Err(Error::GridMismatch("field vector length differs from the Fock basis".into()));
    }
    let (psi, _) = dec.particle_vectors();
    let mut x = vec![C64::new(0.0, 0.0); dec.dim()];
    for (p, &c) in psi.iter().enumerate() {
        for (a, &v) in field_vec.iter().enumerate() {
            x[p * nf + a] = c * v;
        }
    }
    let q = q_pi(dec, lambda, QWhich::Plain, opts)?;
    let out = q.mul_vec(&x);
    let n = vec_norm(&out);
    if !(n > 1e-300) {
        return Err(Error::Reconstruction("zero vector".into()));
    }
    let r = dec.h.shift(lambda).mul_vec(&out);
    Ok((out, vec_norm(&r) / n))
}
