use crate::error::Result;
use crate::feshbach::{build_decimation, truncated_feshbach};
use crate::fock::build_basis;
use crate::hamiltonian::{assemble_kernel_hamiltonian, GHHamiltonian};
use crate::linalg::OperatorMatrix;
use crate::C64;

use super::{first_decimation, WickConfig};

/// The decimated Hamiltonian computed twice: assembled from the kernels of
/// [`first_decimation`], and as a block of the truncated Feshbach matrix.
pub struct Equivalence {
    pub kernel_side: OperatorMatrix,
    pub matrix_side: OperatorMatrix,
}

impl Equivalence {
    pub fn relative_error(&self) -> f64 {
        self.kernel_side.sub(&self.matrix_side).max_abs() / self.matrix_side.max_abs()
    }
}

/// Kernel Hamiltonian of the first decimation next to the block
/// `ρ^{-1} (φ_j ⊗ 1) F (ψ_j ⊗ 1)` of the truncated Feshbach matrix,
/// restricted to states of the low modes with at most `n_s` bosons. The
/// matrix side lives on `n_s + L_max` bosons so no Neumann path hits the
/// occupation cutoff.
pub fn equivalence(h: &GHHamiltonian, j: usize, rho: f64, lambda: C64, l_max: usize, n_s: usize) -> Result<Equivalence> {
    let (low, idx) = h.modes.low_scaled(rho);
    let low_basis = build_basis(&low, n_s)?;
    let big = build_basis(&h.modes, n_s + l_max)?;
    let dec = build_decimation(h, &big, j, rho)?;
    let f = truncated_feshbach(&dec, lambda, l_max)?;
    let (psi, phi) = dec.particle_vectors();
    let (d, nf) = (dec.particle_dim(), dec.field_dim());
    let map: Vec<usize> = low_basis
        .states()
        .iter()
        .map(|occ| {
            let mut full = vec![0u8; h.modes.len()];
            for (a, &i) in idx.iter().enumerate() {
                full[i] = occ[a];
            }
            big.index_of(&full).expect("state in big basis")
        })
        .collect();
    let matrix_side = OperatorMatrix::from_fn(low_basis.dim(), |a, b| {
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..d {
            for q in 0..d {
                acc += phi[p] * f.get(p * nf + map[a], q * nf + map[b]) * psi[q];
            }
        }
        acc / rho
    });
    // w_{0,0} is sampled at the field energies of the low basis, so the
    // comparison does not see interpolation error
    let cfg = WickConfig {
        l_max,
        lambda,
        rho,
        j,
        max_mn: 2 * n_s,
        extra_r: low_basis.energies().to_vec(),
    };
    let seq = first_decimation(h, &cfg)?;
    let kernel_side = assemble_kernel_hamiltonian(&seq, &low_basis)?;
    Ok(Equivalence { kernel_side, matrix_side })
}
