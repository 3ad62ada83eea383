//! Smooth Feshbach-Schur map with the almost-projections
//! `π = P_j ⊗ χ_ρ(H_f)` and `π̄ = P_j ⊗ χ̄_ρ(H_f) + P̄_j ⊗ 1`.
//!
//! `P_j` is the Riesz projection of the particle Hamiltonian, which need not
//! be orthogonal after complex deformation.

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::hamiltonian::{assemble_gh, GHHamiltonian};
use crate::kernels::chi_rho;
use crate::linalg::OperatorMatrix;
use crate::C64;

#[derive(Clone, Debug)]
pub struct Decimation {
    pub j: usize,
    pub rho: f64,
    pub lambda_j: C64,
    pub pi_matrix: OperatorMatrix,
    pub pibar_matrix: OperatorMatrix,
    /// `P_j ⊗ 1[χ_ρ < 1] + P̄_j ⊗ 1`: the support of `π̄`.
    pub support: OperatorMatrix,
    /// Full Hamiltonian, its free part, and the interaction.
    pub h: OperatorMatrix,
    pub h0: OperatorMatrix,
    pub interaction: OperatorMatrix,
    particle_dim: usize,
    field_dim: usize,
    eigenvalues: Vec<C64>,
    projections: Vec<OperatorMatrix>,
    in_cluster: Vec<bool>,
    field_energies: Vec<f64>,
    field_factor: C64,
    chi: Vec<f64>,
    psi: Vec<C64>,
    phi: Vec<C64>,
}

impl Decimation {
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn field_dim(&self) -> usize {
        self.field_dim
    }

    pub fn particle_dim(&self) -> usize {
        self.particle_dim
    }

    /// `χ_ρ` of each field basis state.
    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    /// `(H_0 − λ)^{-1}` on the support of `π̄`, zero elsewhere.
    pub fn r0(&self, lambda: C64) -> Result<OperatorMatrix> {
        let d = self.particle_dim;
        let nf = self.field_dim;
        let mut out = OperatorMatrix::zeros(d * nf);
        for (i, p) in self.projections.iter().enumerate() {
            for f in 0..nf {
                if self.in_cluster[i] && self.chi[f] >= 1.0 {
                    continue;
                }
                let den = self.eigenvalues[i] + self.field_factor * self.field_energies[f] - lambda;
                if den.norm() < 1e-13 {
                    return Err(Error::Singular(format!(
                        "H_0 − λ vanishes on Ran π̄ (level {i}, field state {f})"
                    )));
                }
                let inv = den.inv();
                for a in 0..d {
                    for b in 0..d {
                        let v = p.get(a, b);
                        if v != C64::new(0.0, 0.0) {
                            out.add_at(a * nf + f, b * nf + f, v * inv);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `H_π̄ = H_0 + π̄ I π̄`.
    /// `(ψ_j, φ_j)`: right eigenvector and dual left row of level `j`.
    pub fn particle_vectors(&self) -> (Vec<C64>, Vec<C64>) {
        (self.psi.clone(), self.phi.clone())
    }

    pub fn h_pibar(&self) -> OperatorMatrix {
        self.h0.add(&self.pibar_matrix.matmul(&self.interaction).matmul(&self.pibar_matrix))
    }
}

pub fn build_decimation(h: &GHHamiltonian, basis: &FockBasis, j: usize, rho: f64) -> Result<Decimation> {
    let m = assemble_gh(h, basis)?;
    decimation_from_matrix(h, basis, m, j, rho)
}

/// Decimation for an already assembled Hamiltonian matrix of `h` on `basis`.
pub fn decimation_from_matrix(
    h: &GHHamiltonian,
    basis: &FockBasis,
    matrix: OperatorMatrix,
    j: usize,
    rho: f64,
) -> Result<Decimation> {
    if !(rho > 0.0 && rho <= 0.5) {
        return Err(Error::Range(format!("ρ = {rho} outside (0, 1/2]")));
    }
    let part = &h.particle;
    let d = part.dim();
    if j >= d {
        return Err(Error::Config(format!("eigenvalue index {j} ≥ particle dimension {d}")));
    }
    let nf = basis.dim();
    if matrix.dim() != d * nf {
        return Err(Error::GridMismatch("matrix size differs from particle ⊗ Fock".into()));
    }
    let pj = part.projection(j);
    let cluster = part.cluster(j, 1e-10);
    let id_p = OperatorMatrix::identity(d);
    let chi: Vec<f64> = basis.energies().iter().map(|&e| chi_rho(e, rho)).collect();
    let chibar: Vec<f64> = chi.iter().map(|c| (1.0 - c * c).max(0.0).sqrt()).collect();
    let supp: Vec<f64> = chi.iter().map(|&c| if c < 1.0 { 1.0 } else { 0.0 }).collect();
    let pbar = id_p.sub(&pj);
    let id_f = OperatorMatrix::identity(nf);
    let pi_matrix = pj.kron(&OperatorMatrix::diagonal_real(&chi));
    let pibar_matrix = pj.kron(&OperatorMatrix::diagonal_real(&chibar)).add(&pbar.kron(&id_f));
    let support = pj.kron(&OperatorMatrix::diagonal_real(&supp)).add(&pbar.kron(&id_f));
    let hf = OperatorMatrix::diagonal_real(basis.energies()).scale(h.field_factor);
    let h0 = part.h_p().kron(&id_f).add(&id_p.kron(&hf));
    let interaction = matrix.sub(&h0);
    Ok(Decimation {
        j,
        rho,
        lambda_j: part.eigenvalue(j),
        pi_matrix,
        pibar_matrix,
        support,
        h: matrix,
        h0,
        interaction,
        particle_dim: d,
        field_dim: nf,
        eigenvalues: part.eigenvalues().to_vec(),
        projections: (0..d).map(|i| part.rank_one_projection(i)).collect(),
        in_cluster: (0..d).map(|i| cluster.contains(&i)).collect(),
        field_energies: basis.energies().to_vec(),
        field_factor: h.field_factor,
        chi,
        psi: part.psi(j),
        phi: part.phi(j),
    })
}

#[derive(Clone, Debug)]
pub struct PibarInverse {
    /// `(H_π̄ − λ)^{-1}` on `Ran π̄`, zero on the complement of its support.
    pub matrix: OperatorMatrix,
    pub terms_used: usize,
    pub tail_bound: f64,
    /// `‖π̄ I π̄ R_0‖`.
    pub ratio: f64,
    /// `‖π̄ (H_π̄ − λ)^{-1} π̄‖`.
    pub pibar_norm: f64,
}

/// Neumann series `Σ_n R_0 (−π̄ I π̄ R_0)^n`, stopped once the geometric tail
/// bound `‖R_0‖ B^{n+1} / (1 − B)` drops below `tol`.
pub fn invert_h_pibar(dec: &Decimation, lambda: C64, l_max: usize, tol: f64) -> Result<PibarInverse> {
    let r0 = dec.r0(lambda)?;
    let v = dec.pibar_matrix.matmul(&dec.interaction).matmul(&dec.pibar_matrix);
    let step = v.matmul(&r0);
    let b = step.op_norm();
    if !(b < 1.0) {
        return Err(Error::NeumannDivergence { ratio: b });
    }
    let r0n = r0.op_norm();
    let neg = step.scale_real(-1.0);
    let mut sum = r0.clone();
    let mut term = r0;
    let mut used = 1;
    let mut tail = r0n * b / (1.0 - b);
    while tail > tol && used <= l_max {
        term = term.matmul(&neg);
        sum = sum.add(&term);
        used += 1;
        tail *= b;
    }
    if tail > tol {
        return Err(Error::NonConvergence { iterations: used, residual: tail });
    }
    let pibar_norm = dec.pibar_matrix.matmul(&sum).matmul(&dec.pibar_matrix).op_norm();
    Ok(PibarInverse { matrix: sum, terms_used: used, tail_bound: tail, ratio: b, pibar_norm })
}

/// Direct inverse of `H_π̄ − λ` on the support of `π̄`.
pub fn dense_pibar_inverse(dec: &Decimation, lambda: C64) -> Result<OperatorMatrix> {
    let s = &dec.support;
    let n = dec.dim();
    let a = dec
        .h_pibar()
        .shift(lambda)
        .matmul(s)
        .add(&OperatorMatrix::identity(n).sub(s));
    Ok(s.matmul(&a.inverse()?).matmul(s))
}

#[derive(Clone, Copy, Debug)]
pub struct FeshbachOptions {
    pub l_max: usize,
    pub tol: f64,
    /// Use the direct inverse instead of the Neumann series.
    pub dense: bool,
}

impl Default for FeshbachOptions {
    fn default() -> Self {
        Self { l_max: 40, tol: 1e-14, dense: false }
    }
}

#[derive(Clone, Debug)]
pub struct FeshbachResult {
    pub matrix: OperatorMatrix,
    pub terms_used: usize,
    pub tail_bound: f64,
    pub pibar_inverse: OperatorMatrix,
}

fn pibar_resolvent(dec: &Decimation, lambda: C64, opts: FeshbachOptions) -> Result<(OperatorMatrix, usize, f64)> {
    if opts.dense {
        Ok((dense_pibar_inverse(dec, lambda)?, 0, 0.0))
    } else {
        let inv = invert_h_pibar(dec, lambda, opts.l_max, opts.tol)?;
        Ok((inv.matrix, inv.terms_used, inv.tail_bound))
    }
}

/// `F = H_0 − λ + π I π − π I π̄ (H_π̄ − λ)^{-1} π̄ I π`.
pub fn feshbach_map(dec: &Decimation, lambda: C64, opts: FeshbachOptions) -> Result<FeshbachResult> {
    let (r, used, tail) = pibar_resolvent(dec, lambda, opts)?;
    let pi = &dec.pi_matrix;
    let pb = &dec.pibar_matrix;
    let ipi = dec.interaction.matmul(pi);
    let pii = pi.matmul(&dec.interaction);
    let corr = pii.matmul(pb).matmul(&r).matmul(pb).matmul(&ipi);
    let matrix = dec.h0.shift(lambda).add(&pi.matmul(&ipi)).sub(&corr);
    Ok(FeshbachResult { matrix, terms_used: used, tail_bound: tail, pibar_inverse: r })
}

/// `H_0 − λ + Σ_{L=1}^{L_max} (−1)^{L−1} π I (R_0 π̄² I)^{L−1} π`: the map with
/// the Neumann series cut after a fixed number of interaction vertices.
pub fn truncated_feshbach(dec: &Decimation, lambda: C64, l_max: usize) -> Result<OperatorMatrix> {
    let r0 = dec.r0(lambda)?;
    let pb2 = dec.pibar_matrix.matmul(&dec.pibar_matrix);
    let step = r0.matmul(&pb2).matmul(&dec.interaction);
    let pi = &dec.pi_matrix;
    let mut chain = pi.matmul(&dec.interaction);
    let mut out = dec.h0.shift(lambda);
    for l in 1..=l_max {
        let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
        out = out.add(&chain.matmul(pi).scale_real(sign));
        chain = chain.matmul(&step);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QWhich {
    Plain,
    Sharp,
}

/// `Q = π − π̄ R π̄ I π` or `Q^# = π − π I π̄ R π̄`.
pub fn q_pi(dec: &Decimation, lambda: C64, which: QWhich, opts: FeshbachOptions) -> Result<OperatorMatrix> {
    let (r, _, _) = pibar_resolvent(dec, lambda, opts)?;
    let pi = &dec.pi_matrix;
    let pb = &dec.pibar_matrix;
    Ok(match which {
        QWhich::Plain => pi.sub(&pb.matmul(&r).matmul(pb).matmul(&dec.interaction).matmul(pi)),
        QWhich::Sharp => pi.sub(&pi.matmul(&dec.interaction).matmul(pb).matmul(&r).matmul(pb)),
    })
}

/// `‖(H − λ)^{-1} − [Q F^{-1} Q^# + π̄ (H_π̄ − λ)^{-1} π̄]‖`.
pub fn resolvent_identity_check(dec: &Decimation, lambda: C64, opts: FeshbachOptions) -> Result<f64> {
    let f = feshbach_map(dec, lambda, opts)?;
    let q = q_pi(dec, lambda, QWhich::Plain, opts)?;
    let qs = q_pi(dec, lambda, QWhich::Sharp, opts)?;
    let lhs = dec.h.shift(lambda).inverse()?;
    let finv = f.matrix.inverse()?;
    let pb = &dec.pibar_matrix;
    let rhs = q.matmul(&finv).matmul(&qs).add(&pb.matmul(&f.pibar_inverse).matmul(pb));
    Ok(lhs.sub(&rhs).op_norm())
}
