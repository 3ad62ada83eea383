//! Particle-field Hamiltonians of the generalized class with radial
//! couplings, their complex deformation, and dense assembly on
//! particle ⊗ truncated Fock space.

pub mod pauli_fierz;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockBasis, ModeSet};
use crate::kernels::{check_theta, smooth_cutoff_chi1, Kernel, KernelSequence};
use crate::linalg::{eig, eigh, OperatorMatrix};
use crate::C64;

pub use pauli_fierz::{pauli_fierz_transform, Mollifier, PFCouplingReport};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Finite-dimensional particle Hamiltonian `H_p(θ) = V + e^{-2θ} T`, scaled
/// by an overall frame factor, together with its eigen-decomposition.
#[derive(Clone, Debug)]
pub struct ParticleModel {
    potential: OperatorMatrix,
    kinetic: OperatorMatrix,
    theta: C64,
    scale: C64,
    h_p: OperatorMatrix,
    eigenvalues: Vec<C64>,
    right: OperatorMatrix,
    left: OperatorMatrix,
    /// Coefficient of the kinetic term; bookkeeping only.
    pub kappa_par: C64,
}

impl ParticleModel {
    /// Dilation-invariant particle Hamiltonian.
    pub fn new(h_p: OperatorMatrix) -> Result<Self> {
        let d = h_p.dim();
        Self::with_kinetic(h_p, OperatorMatrix::zeros(d))
    }

    /// `H_p(θ) = potential + e^{-2θ} kinetic`.
    pub fn with_kinetic(potential: OperatorMatrix, kinetic: OperatorMatrix) -> Result<Self> {
        if potential.dim() == 0 || potential.dim() != kinetic.dim() {
            return Err(Error::Model("particle matrices must be square and of equal size".into()));
        }
        Self::build(potential, kinetic, ZERO, C64::new(1.0, 0.0))
    }

    pub fn diagonal(levels: &[f64]) -> Result<Self> {
        Self::new(OperatorMatrix::diagonal_real(levels))
    }

    /// Single level at energy 0.
    pub fn trivial() -> Self {
        Self::diagonal(&[0.0]).expect("1x1 particle")
    }

    fn build(potential: OperatorMatrix, kinetic: OperatorMatrix, theta: C64, scale: C64) -> Result<Self> {
        let h_p = potential.add(&kinetic.scale((-2.0 * theta).exp())).scale(scale);
        if !h_p.is_finite() {
            return Err(Error::Model("non-finite particle matrix".into()));
        }
        let (vals, right, left) = if h_p.is_hermitian(1e-14) {
            let (w, v) = eigh(&h_p)?;
            let vals = w.into_iter().map(|x| C64::new(x, 0.0)).collect::<Vec<_>>();
            let left = v.adjoint();
            (vals, v, left)
        } else {
            let (vals, v) = eig(&h_p)?;
            let mut order: Vec<usize> = (0..vals.len()).collect();
            order.sort_by(|&a, &b| {
                (vals[a].re, vals[a].im).partial_cmp(&(vals[b].re, vals[b].im)).unwrap()
            });
            let vals: Vec<C64> = order.iter().map(|&i| vals[i]).collect();
            let v = OperatorMatrix::from_fn(h_p.dim(), |i, j| v.get(i, order[j]));
            let left = v
                .inverse()
                .map_err(|_| Error::Model("particle matrix is not diagonalizable".into()))?;
            (vals, v, left)
        };
        let recon = OperatorMatrix::from_fn(h_p.dim(), |i, j| {
            (0..h_p.dim()).map(|a| right.get(i, a) * vals[a] * left.get(a, j)).sum()
        });
        let err = recon.sub(&h_p).max_abs();
        if err > 1e-10 * h_p.max_abs().max(1.0) {
            return Err(Error::Model(format!("eigen-decomposition defect {err:.2e}")));
        }
        Ok(Self {
            potential,
            kinetic,
            theta,
            scale,
            h_p,
            eigenvalues: vals,
            right,
            left,
            kappa_par: C64::new(1.0, 0.0),
        })
    }

    /// The family member at dilation `θ` (absolute).
    pub fn at_theta(&self, theta: C64) -> Result<Self> {
        Self::build(self.potential.clone(), self.kinetic.clone(), theta, self.scale)
    }

    /// Same family with every matrix multiplied by `c`.
    pub fn scaled(&self, c: C64) -> Result<Self> {
        Self::build(self.potential.clone(), self.kinetic.clone(), self.theta, self.scale * c)
    }

    pub fn dim(&self) -> usize {
        self.h_p.dim()
    }

    pub fn h_p(&self) -> &OperatorMatrix {
        &self.h_p
    }

    pub fn theta(&self) -> C64 {
        self.theta
    }

    pub fn is_hermitian(&self) -> bool {
        self.h_p.is_hermitian(1e-14)
    }

    /// Eigenvalues sorted by real part, then imaginary part.
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, j: usize) -> C64 {
        self.eigenvalues[j]
    }

    /// Right eigenvector ψ_j.
    pub fn psi(&self, j: usize) -> Vec<C64> {
        (0..self.dim()).map(|i| self.right.get(i, j)).collect()
    }

    /// Left eigen-row φ_j with `φ_j · ψ_i = δ_ij` (no conjugation).
    pub fn phi(&self, j: usize) -> Vec<C64> {
        (0..self.dim()).map(|i| self.left.get(j, i)).collect()
    }

    /// Indices of eigenvalues equal to λ_j within `tol`.
    pub fn cluster(&self, j: usize, tol: f64) -> Vec<usize> {
        let l = self.eigenvalues[j];
        (0..self.dim()).filter(|&i| (self.eigenvalues[i] - l).norm() <= tol).collect()
    }

    /// Riesz projection onto the eigenvalue cluster of λ_j.
    pub fn projection(&self, j: usize) -> OperatorMatrix {
        let idx = self.cluster(j, 1e-10);
        OperatorMatrix::from_fn(self.dim(), |a, b| {
            idx.iter().map(|&i| self.right.get(a, i) * self.left.get(i, b)).sum()
        })
    }

    /// Rank-one projection `ψ_j φ_j`.
    pub fn rank_one_projection(&self, j: usize) -> OperatorMatrix {
        OperatorMatrix::from_fn(self.dim(), |a, b| self.right.get(a, j) * self.left.get(j, b))
    }

    /// `V^{-1} M V`: matrix elements `φ_a M ψ_b`.
    pub fn to_eigenbasis(&self, m: &OperatorMatrix) -> OperatorMatrix {
        self.left.matmul(m).matmul(&self.right)
    }
}

/// Radial coupling profile κ(k), analytically continued in k.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum Kappa {
    /// `√k`
    Sqrt,
    /// `√k · exp(−k²/Λ²)`
    SqrtGaussian { cutoff: f64 },
    /// `k^p · exp(−k²/Λ²)`
    PowerGaussian { power: f64, cutoff: f64 },
    Constant { value: f64 },
}

impl Kappa {
    pub fn eval(&self, k: C64) -> C64 {
        match *self {
            Kappa::Sqrt => k.sqrt(),
            Kappa::SqrtGaussian { cutoff } => k.sqrt() * (-(k * k) / (cutoff * cutoff)).exp(),
            Kappa::PowerGaussian { power, cutoff } => {
                k.powf(power) * (-(k * k) / (cutoff * cutoff)).exp()
            }
            Kappa::Constant { value } => C64::new(value, 0.0),
        }
    }

    /// Dilated leg factor `e^{-θ} κ(e^{-θ} k)`.
    pub fn leg(&self, k: f64, theta: C64) -> C64 {
        let e = (-theta).exp();
        e * self.eval(e * k)
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Kappa::Sqrt => true,
            Kappa::SqrtGaussian { cutoff } => cutoff > 0.0 && cutoff.is_finite(),
            Kappa::PowerGaussian { power, cutoff } => power >= 0.0 && cutoff > 0.0 && cutoff.is_finite(),
            Kappa::Constant { value } => value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Model(format!("invalid coupling profile {self:?}")))
        }
    }
}

/// `∫ Π dk/|k|^{1/2} a*(k_1)..a*(k_m) [Π_legs κ_θ(k)] M a(k̃_1)..a(k̃_n)`.
#[derive(Clone, Debug)]
pub struct CouplingTerm {
    pub m: usize,
    pub n: usize,
    pub profile: Kappa,
    pub matrix: OperatorMatrix,
}

#[derive(Clone, Debug)]
pub struct GHInteraction {
    pub terms: Vec<CouplingTerm>,
    pub g: f64,
    pub mu: f64,
    pub theta: C64,
    /// Overall factor multiplying `g Σ W`.
    pub prefactor: C64,
}

impl GHInteraction {
    /// Product of dilated leg factors for a mode tuple.
    pub fn term_weight(&self, t: &CouplingTerm, modes: &ModeSet, tuple: &[usize]) -> C64 {
        tuple
            .iter()
            .map(|&i| t.profile.leg(modes.momenta()[i], self.theta))
            .product()
    }

    /// Σ over terms of `sup_k ‖w_{m,n}(k)‖ / min(⟨x⟩^{m+n} Π|k_j|^{1/2}, 1)^μ`
    /// with the model-supplied bound `x_weight` standing in for `⟨x⟩`.
    pub fn norm0(&self, modes: &ModeSet, x_weight: f64) -> f64 {
        let nk = modes.len();
        let mut total = 0.0;
        for t in &self.terms {
            let mn = t.m + t.n;
            let mat = t.matrix.op_norm();
            let mut sup = 0.0f64;
            for flat in 0..nk.pow(mn as u32) {
                let tuple = crate::kernels::tuple_of(nk, mn, flat);
                let kprod: f64 = tuple.iter().map(|&i| modes.momenta()[i].sqrt()).product();
                let denom = (x_weight.powi(mn as i32) * kprod).min(1.0).powf(self.mu);
                sup = sup.max(mat * self.term_weight(t, modes, &tuple).norm() / denom);
            }
            total += sup;
        }
        total * self.g * self.prefactor.norm()
    }
}

#[derive(Clone, Debug)]
pub struct GHHamiltonian {
    pub particle: ParticleModel,
    pub interaction: GHInteraction,
    pub modes: ModeSet,
    /// Coefficient of `1 ⊗ H_f`.
    pub field_factor: C64,
    pub theta: C64,
}

impl GHHamiltonian {
    pub fn g(&self) -> f64 {
        self.interaction.g
    }

    pub fn is_deformed(&self) -> bool {
        self.theta != ZERO
    }

    /// `e^{θ} H_θ`: field factor 1, particle `e^{θ} H_{pθ}`, coupling prefactor
    /// `e^{θ}`. Spectra map by `z → e^{θ} z`.
    pub fn normalized(&self) -> Result<Self> {
        if (self.field_factor - C64::new(1.0, 0.0)).norm() < 1e-15 {
            return Ok(self.clone());
        }
        let c = self.field_factor.inv();
        let mut out = self.clone();
        out.particle = self.particle.scaled(c)?;
        out.field_factor = C64::new(1.0, 0.0);
        out.interaction.prefactor = self.interaction.prefactor * c;
        Ok(out)
    }

    /// Same model at a different coupling constant.
    pub fn with_g(&self, g: f64) -> Self {
        let mut out = self.clone();
        out.interaction.g = g;
        out
    }

    /// Coupling terms expressed in the particle eigenbasis and multiplied by
    /// `g` and the prefactor.
    pub fn terms_in_eigenbasis(&self) -> Vec<(CouplingTerm, OperatorMatrix)> {
        let c = self.interaction.prefactor * self.interaction.g;
        self.interaction
            .terms
            .iter()
            .map(|t| (t.clone(), self.particle.to_eigenbasis(&t.matrix).scale(c)))
            .collect()
    }
}

/// Linear coupling `g ∫ κ(k)|k|^{-1/2} (E a*(k) + E* a(k))` of a particle to
/// a scalar field. The constant form factor `E` stands in for the matrix of
/// `e^{-ikx}` in the particle basis.
pub fn build_nelson(
    particle: ParticleModel,
    kappa: Kappa,
    form_factor: OperatorMatrix,
    g: f64,
    mu: f64,
    modes: ModeSet,
    c_max: f64,
) -> Result<GHHamiltonian> {
    kappa.validate()?;
    if form_factor.dim() != particle.dim() {
        return Err(Error::Model("form factor size differs from particle dimension".into()));
    }
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::Model(format!("coupling g = {g} must be nonnegative")));
    }
    if !(mu >= 0.0) {
        return Err(Error::Model(format!("μ = {mu} must be nonnegative")));
    }
    let mut ir = 0.0;
    for (&k, &w) in modes.momenta().iter().zip(modes.weights()) {
        let v = kappa.eval(C64::new(k, 0.0)).norm();
        if v > c_max * k.powf(mu).min(1.0) * (1.0 + 1e-12) {
            return Err(Error::Model(format!(
                "|κ({k})| = {v:.3e} exceeds {c_max}·min(1, k^μ)"
            )));
        }
        ir += w * v * v / k;
    }
    if !ir.is_finite() {
        return Err(Error::Model("κ is not square-integrable against 1/|k|".into()));
    }
    let terms = if g == 0.0 {
        vec![]
    } else {
        vec![
            CouplingTerm { m: 1, n: 0, profile: kappa, matrix: form_factor.clone() },
            CouplingTerm { m: 0, n: 1, profile: kappa, matrix: form_factor.adjoint() },
        ]
    };
    Ok(GHHamiltonian {
        particle,
        interaction: GHInteraction { terms, g, mu, theta: ZERO, prefactor: C64::new(1.0, 0.0) },
        modes,
        field_factor: C64::new(1.0, 0.0),
        theta: ZERO,
    })
}

/// Hamiltonian with arbitrary coupling terms of total degree ≤ 2.
pub fn build_custom(
    particle: ParticleModel,
    terms: Vec<CouplingTerm>,
    g: f64,
    mu: f64,
    modes: ModeSet,
) -> Result<GHHamiltonian> {
    for t in &terms {
        t.profile.validate()?;
        if t.m + t.n == 0 || t.m + t.n > 2 {
            return Err(Error::Model(format!("term ({}, {}) not supported", t.m, t.n)));
        }
        if t.matrix.dim() != particle.dim() {
            return Err(Error::Model("term matrix size differs from particle dimension".into()));
        }
    }
    Ok(GHHamiltonian {
        particle,
        interaction: GHInteraction { terms, g, mu, theta: ZERO, prefactor: C64::new(1.0, 0.0) },
        modes,
        field_factor: C64::new(1.0, 0.0),
        theta: ZERO,
    })
}

/// `U_θ H U_θ^{-1}` continued to complex θ. Dilations compose additively.
pub fn complex_deform(h: &GHHamiltonian, theta: C64) -> Result<GHHamiltonian> {
    let total = h.theta + theta;
    check_theta(total)?;
    let rot = (-theta).exp();
    let mut out = h.clone();
    out.particle = h.particle.at_theta(h.particle.theta() + theta)?;
    out.field_factor = h.field_factor * rot;
    out.interaction.theta = h.interaction.theta + theta;
    out.theta = total;
    Ok(out)
}

/// Visit every nonzero matrix element of the normal-ordered Fock monomial
/// `b*_{c_1}..b*_{c_m} b_{a_1}..b_{a_n}` summed over all mode tuples.
/// The callback receives `(row, col, tuple, amplitude, r_mid)` where `tuple`
/// lists creation modes then annihilation modes and `r_mid` is the free
/// energy between the annihilators and the creators.
pub fn for_each_monomial_element(
    basis: &FockBasis,
    m: usize,
    n: usize,
    mut f: impl FnMut(usize, usize, &[usize], f64, f64),
) {
    let nk = basis.modes().len();
    let n_ann = nk.pow(n as u32);
    let n_cre = nk.pow(m as u32);
    let mut tuple = vec![0usize; m + n];
    let mut occ_mid = vec![0u8; nk];
    let mut occ_out = vec![0u8; nk];
    for col in 0..basis.dim() {
        'ann: for fa in 0..n_ann {
            occ_mid.copy_from_slice(basis.state(col));
            let mut amp = 1.0;
            let mut t = fa;
            for a in (0..n).rev() {
                let i = t % nk;
                t /= nk;
                tuple[m + a] = i;
                match fock::annihilate(&mut occ_mid, i) {
                    Some(s) => amp *= s,
                    None => continue 'ann,
                }
            }
            let r_mid: f64 = occ_mid
                .iter()
                .zip(basis.modes().dispersion())
                .map(|(&c, &w)| c as f64 * w)
                .sum();
            for fc in 0..n_cre {
                occ_out.copy_from_slice(&occ_mid);
                let mut amp2 = amp;
                let mut t = fc;
                for a in (0..m).rev() {
                    let i = t % nk;
                    t /= nk;
                    tuple[a] = i;
                    amp2 *= fock::create(&mut occ_out, i);
                }
                if let Some(row) = basis.index_of(&occ_out) {
                    f(row, col, &tuple, amp2, r_mid);
                }
            }
        }
    }
}

/// Dense matrix of `H_p ⊗ 1 + c_f 1 ⊗ H_f + g Σ W_{m,n}`, particle index
/// outermost.
pub fn assemble_gh(h: &GHHamiltonian, basis: &FockBasis) -> Result<OperatorMatrix> {
    if !h.modes.matches(basis.modes(), 1e-14) {
        return Err(Error::GridMismatch("Hamiltonian and basis use different modes".into()));
    }
    let d = h.particle.dim();
    let nf = basis.dim();
    let hp = h.particle.h_p().kron(&OperatorMatrix::identity(nf));
    let hf = OperatorMatrix::identity(d)
        .kron(&fock::free_field_hamiltonian(basis))
        .scale(h.field_factor);
    let mut out = hp.add(&hf);
    let c = h.interaction.g * h.interaction.prefactor;
    if c == ZERO {
        return Ok(out);
    }
    let modes = basis.modes();
    for t in &h.interaction.terms {
        for_each_monomial_element(basis, t.m, t.n, |row, col, tuple, amp, _| {
            let leg: f64 = tuple.iter().map(|&i| modes.leg_factor(i)).product();
            let w = h.interaction.term_weight(t, modes, tuple) * (c * leg * amp);
            for p in 0..d {
                for q in 0..d {
                    let e = t.matrix.get(p, q);
                    if e != ZERO {
                        out.add_at(p * nf + row, q * nf + col, w * e);
                    }
                }
            }
        });
    }
    Ok(out)
}

/// Field-only matrix of a single monomial `W_{m,n}` with kernel evaluated at
/// `H_f` between annihilators and creators. With `cutoff`, the monomial is
/// sandwiched by `χ_1(H_f)` on both sides. For `m + n ≥ 1` the energy
/// argument is clamped to the kernel's r-grid.
pub fn assemble_monomial(kernel: &Kernel, basis: &FockBasis, cutoff: bool) -> Result<OperatorMatrix> {
    let nf = basis.dim();
    let mut out = OperatorMatrix::zeros(nf);
    if kernel.order() == 0 {
        for i in 0..nf {
            out.set(i, i, kernel.eval_r(basis.energy(i), 0));
        }
        return Ok(out);
    }
    if kernel.k_grid() != basis.modes().momenta() {
        return Err(Error::GridMismatch("kernel k-grid differs from the basis modes".into()));
    }
    let modes = basis.modes();
    let interp = kernel.r_interpolator();
    let rg = kernel.r_grid();
    let (r_lo, r_hi) = (rg[0], rg[rg.len() - 1]);
    let nk = modes.len();
    for_each_monomial_element(basis, kernel.m(), kernel.n(), |row, col, tuple, amp, r_mid| {
        let chi = if cutoff {
            smooth_cutoff_chi1(basis.energy(row)) * smooth_cutoff_chi1(basis.energy(col))
        } else {
            1.0
        };
        if chi == 0.0 {
            return;
        }
        let leg: f64 = tuple.iter().map(|&i| modes.leg_factor(i)).product();
        let flat = crate::kernels::flat_index(nk, tuple);
        let v = interp.eval(r_mid.clamp(r_lo, r_hi), flat);
        out.add_at(row, col, v * (chi * leg * amp));
    });
    Ok(out)
}

/// `w_{0,0}[H_f] + Σ_{m+n≥1} χ_1(H_f) W_{m,n} χ_1(H_f)` on the field space.
pub fn assemble_kernel_hamiltonian(seq: &KernelSequence, basis: &FockBasis) -> Result<OperatorMatrix> {
    let nf = basis.dim();
    let mut out = match seq.w00() {
        Some(k) => assemble_monomial(k, basis, false)?,
        None => fock::free_field_hamiltonian(basis),
    };
    let mut any = false;
    for (_, k) in seq.interaction() {
        if !any && !seq.modes().matches(basis.modes(), 1e-12) {
            return Err(Error::GridMismatch("sequence and basis use different modes".into()));
        }
        any = true;
        out = out.add(&assemble_monomial(k, basis, true)?);
    }
    debug_assert_eq!(out.dim(), nf);
    Ok(out)
}
