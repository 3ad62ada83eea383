use crate::error::{Error, Result};
use crate::hamiltonian::GHHamiltonian;
use crate::kernels::{default_r_grid, default_r_grid_00, smooth_cutoff_chi1, Kernel, KernelSequence, R_MAX};
use crate::quadrature::merge_points;
use crate::spectral::gap_and_region;
use crate::C64;

use super::wick::{Resolvent, Vertex, VertexKind, WickEngine};
use super::WickConfig;

fn check_config(h: &GHHamiltonian, cfg: &WickConfig) -> Result<()> {
    if !(cfg.rho > 0.0 && cfg.rho <= 0.5) {
        return Err(Error::Range(format!("scale {} outside (0, 1/2]", cfg.rho)));
    }
    if cfg.l_max == 0 {
        return Err(Error::Config("Neumann depth must be at least 1".into()));
    }
    if cfg.j >= h.particle.dim() {
        return Err(Error::Config(format!("eigenvalue index {} out of range", cfg.j)));
    }
    if h.particle.cluster(cfg.j, 1e-10).len() != 1 {
        return Err(Error::Model(format!("eigenvalue {} is degenerate; only simple levels are decimated", cfg.j)));
    }
    Ok(())
}

fn engine(h: &GHHamiltonian, cfg: &WickConfig) -> WickEngine {
    let modes = &h.modes;
    let (low, _) = modes.low_scaled(cfg.rho);
    let int_k = modes.momenta().to_vec();
    let int_lw = (0..modes.len()).map(|i| modes.line_weight(i)).collect();
    let mut eng = WickEngine {
        int_k,
        int_lw,
        out_k: low.momenta().to_vec(),
        rho: cfg.rho,
        d: h.particle.dim(),
        j: cfg.j,
        vertices: vec![],
        resolvent: Resolvent::Particle {
            levels: h.particle.eigenvalues().to_vec(),
            lambda: cfg.lambda,
            j: cfg.j,
            rho: cfg.rho,
        },
        l_max: cfg.l_max,
        mu: h.interaction.mu,
    };
    let theta = h.interaction.theta;
    for (t, m) in h.terms_in_eigenbasis() {
        let leg = (0..eng.n_axes()).map(|a| t.profile.leg(eng.axis_k(a), theta)).collect();
        eng.vertices.push(Vertex { a: t.m, b: t.n, kind: VertexKind::Matrix { leg, matrix: m } });
    }
    eng
}

/// Rough ratio of consecutive Neumann terms: coupling size times the largest
/// insertion `|π̄²_i(E)/(λ_i + E − λ)|`. Expects a normalized Hamiltonian.
pub fn neumann_ratio_estimate(h: &GHHamiltonian, cfg: &WickConfig) -> f64 {
    let modes = &h.modes;
    let theta = h.interaction.theta;
    let mut coupling = 0.0;
    for (t, m) in h.terms_in_eigenbasis() {
        let s: f64 = (0..modes.len())
            .map(|i| modes.line_weight(i) * t.profile.leg(modes.momenta()[i], theta).norm_sqr())
            .sum();
        coupling += m.op_norm() * s.sqrt().powi((t.m + t.n) as i32);
    }
    let levels = h.particle.eigenvalues();
    let mut sup = 0.0f64;
    for s in 0..=800 {
        let e = R_MAX * s as f64 / 800.0;
        let c = smooth_cutoff_chi1(e / cfg.rho);
        for (i, l) in levels.iter().enumerate() {
            let pb = if i == cfg.j { 1.0 - c * c } else { 1.0 };
            if pb > 0.0 {
                sup = sup.max(pb / (l + e - cfg.lambda).norm());
            }
        }
    }
    coupling * sup
}

/// Kernels of the Wick-ordered Neumann series, rescaled by ρ: all orders
/// `1 ≤ M + N ≤ max_mn` together with the chain part of `w_{0,0}`,
/// `ρ^{-1} χ_1(r)² Σ_{L≥2} V(ρr)`. The free part `ρ^{-1}(λ_j + ρr − λ)` is
/// left to the caller.
pub fn wick_recombine(h: &GHHamiltonian, cfg: &WickConfig) -> Result<KernelSequence> {
    let hn = h.normalized()?;
    check_config(&hn, cfg)?;
    let eng = engine(&hn, cfg);
    let (low, _) = hn.modes.low_scaled(cfg.rho);
    let r00 = r_grid_00(&cfg.extra_r);
    let mut r_int = default_r_grid();
    r_int.extend(cfg.extra_r.iter().copied().filter(|r| (0.0..=1.0).contains(r)));
    let out = eng.run(&merge_points(r_int, 1e-13), &r00, cfg.max_mn)?;
    let mut seq = KernelSequence::new(low, hn.interaction.mu, cfg.max_mn);
    let vals: Vec<C64> = r00
        .iter()
        .zip(&out.vacuum)
        .map(|(&r, &v)| {
            let c = smooth_cutoff_chi1(r);
            v * (c * c / cfg.rho)
        })
        .collect();
    seq.insert(Kernel::new(0, 0, r00, vec![], vals)?)?;
    for k in out.kernels {
        seq.insert(k)?;
    }
    seq.discarded_norm = out.discarded;
    Ok(seq)
}

pub(crate) fn r_grid_00(extra: &[f64]) -> Vec<f64> {
    let mut pts = default_r_grid_00(R_MAX);
    pts.extend(extra.iter().copied().filter(|r| (0.0..=R_MAX).contains(r)));
    merge_points(pts, 1e-13)
}

/// Kernel sequence of the decimated, rescaled Hamiltonian at spectral
/// parameter `λ` near `λ_j`. The Hamiltonian is first brought to the frame
/// with unit field coefficient, and `λ` refers to that frame.
pub fn first_decimation(h: &GHHamiltonian, cfg: &WickConfig) -> Result<KernelSequence> {
    let hn = h.normalized()?;
    check_config(&hn, cfg)?;
    let region = gap_and_region(&hn.particle, cfg.j)?;
    if !region.contains(cfg.lambda) {
        return Err(Error::OutsideRegion(format!("{}", cfg.lambda)));
    }
    let b = neumann_ratio_estimate(&hn, cfg);
    if !(b < 1.0) {
        return Err(Error::NeumannDivergence { ratio: b });
    }
    let mut seq = wick_recombine(&hn, cfg)?;
    let lj = hn.particle.eigenvalue(cfg.j);
    let rho = cfg.rho;
    let w00 = seq.get_mut(0, 0).expect("w00 present");
    let rg = w00.r_grid().to_vec();
    for (v, r) in w00.values_mut().iter_mut().zip(rg) {
        *v += (lj + rho * r - cfg.lambda) / rho;
    }
    Ok(seq)
}
