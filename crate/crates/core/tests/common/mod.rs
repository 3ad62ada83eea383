#![allow(dead_code)]

use spectral_rg::fock::{build_basis, FockBasis};
use spectral_rg::hamiltonian::{assemble_monomial, GHHamiltonian};
use spectral_rg::kernels::{chi_rho, default_r_grid, Kernel};
use spectral_rg::linalg::OperatorMatrix;
use spectral_rg::C64;

pub fn basis_of(h: &GHHamiltonian, n_max: usize) -> FockBasis {
    build_basis(&h.modes, n_max).unwrap()
}

/// Two-level particle coupled to two modes, one deep inside `Ran χ_ρ` and
/// one near or past its edge, with a random Hermitian form factor.
pub struct Instance {
    pub h: GHHamiltonian,
    pub basis: FockBasis,
    pub rho: f64,
}

pub fn random_instance(seed: u64, n_max: usize) -> Instance {
    use rand::{Rng, SeedableRng};
    use spectral_rg::fock::ModeSet;
    use spectral_rg::hamiltonian::{build_nelson, Kappa, ParticleModel};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let rho = rng.gen_range(0.25..0.5);
    let k1 = rng.gen_range(0.05..0.3 * rho);
    let k2 = rng.gen_range(0.91 * rho..1.2 * rho);
    let w = [rng.gen_range(0.05..0.3), rng.gen_range(0.05..0.3)];
    let modes = ModeSet::new(vec![k1, k2], w.to_vec()).unwrap();
    let gap = rng.gen_range(0.6..1.2);
    let g = rng.gen_range(0.01..0.05);
    let (a, b, c, d) = (
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    let ff = OperatorMatrix::from_rows(&[
        vec![C64::new(a, 0.0), C64::new(b, c)],
        vec![C64::new(b, -c), C64::new(d, 0.0)],
    ]);
    let particle = ParticleModel::diagonal(&[0.0, gap]).unwrap();
    let h = build_nelson(particle, Kappa::SqrtGaussian { cutoff: 1.0 }, ff, g, 0.5, modes, 1.0).unwrap();
    let basis = build_basis(&h.modes, n_max).unwrap();
    Instance { h, basis, rho }
}

/// Number of singular values below `tol · max(1, σ_max)`.
pub fn kernel_dim(m: &OperatorMatrix, tol: f64) -> usize {
    let s = m.singular_values().unwrap();
    let top = s.iter().cloned().fold(1.0, f64::max);
    s.iter().filter(|&&x| x < tol * top).count()
}

/// `‖(H_f + λ)^{-m/2} W (H_f + λ)^{-n/2}‖` for the monomial of `k`.
pub fn sandwich_norm(k: &Kernel, b: &FockBasis, lambda: f64) -> f64 {
    let w = assemble_monomial(k, b, false).unwrap();
    let e = b.energies();
    let (m, n) = (k.m() as f64, k.n() as f64);
    OperatorMatrix::from_fn(b.dim(), |i, j| w.get(i, j) * (e[i] + lambda).powf(-m / 2.0) * (e[j] + lambda).powf(-n / 2.0))
        .op_norm()
}

/// `‖χ_ρ W χ_ρ‖` for the monomial of `k`.
pub fn chi_sandwich_norm(k: &Kernel, b: &FockBasis, rho: f64) -> f64 {
    let w = assemble_monomial(k, b, false).unwrap();
    let e = b.energies();
    let x = |r: f64| chi_rho(r, rho);
    OperatorMatrix::from_fn(b.dim(), |i, j| w.get(i, j) * x(e[i]) * x(e[j])).op_norm()
}

/// Smooth bounded kernel with a `|k|^μ` factor on every leg.
pub fn random_kernel(m: usize, n: usize, a: &[f64], kg: &[f64], mu: f64) -> Kernel {
    Kernel::from_fn(m, n, default_r_grid(), kg.to_vec(), |r, ks| {
        let ir: f64 = ks.iter().map(|k| k.powf(mu)).product();
        let s: f64 = ks.iter().enumerate().map(|(i, k)| (a[i] * 7.0 * k).sin()).sum();
        C64::new(ir * (a[2] + s).cos(), ir * (a[3] * r).sin())
    })
}
