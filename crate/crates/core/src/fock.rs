//! Truncated bosonic Fock space over a finite set of radial field modes.
//!
//! A continuum field operator `a(k)` is represented by `b_i / sqrt(w_i)` at the
//! grid point `k_i`, so that `∫ dk |k|^{-1/2} f(k) a*(k)` becomes
//! `Σ_i sqrt(w_i / k_i) f(k_i) b_i*`. The weights carry the radial Jacobian of
//! the angle-averaged measure `k² dk` (the solid angle is normalized to one).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::OperatorMatrix;
use crate::quadrature::gauss_legendre_on;
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    momenta: Vec<f64>,
    weights: Vec<f64>,
}

impl ModeSet {
    pub fn new(momenta: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if momenta.len() != weights.len() {
            return Err(Error::Config(format!(
                "{} momenta but {} weights",
                momenta.len(),
                weights.len()
            )));
        }
        for (i, &k) in momenta.iter().enumerate() {
            if !(k > 0.0 && k <= 1.0) {
                return Err(Error::Config(format!("momentum {k} outside (0, 1]")));
            }
            if i > 0 && k <= momenta[i - 1] {
                return Err(Error::Config("momenta must be strictly increasing".into()));
            }
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::Config("weights must be positive and finite".into()));
        }
        Ok(Self { momenta, weights })
    }

    /// `count` Gauss-Legendre nodes in `u ∈ (0,1)` mapped by `k = u²`.
    pub fn gauss_radial(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("mode count must be positive".into()));
        }
        let (u, wu) = gauss_legendre_on(count, 0.0, 1.0);
        let momenta: Vec<f64> = u.iter().map(|x| x * x).collect();
        let weights = u
            .iter()
            .zip(&wu)
            .map(|(x, w)| {
                let k = x * x;
                k * k * 2.0 * x * w
            })
            .collect();
        Self::new(momenta, weights)
    }

    pub fn single(k: f64, weight: f64) -> Result<Self> {
        Self::new(vec![k], vec![weight])
    }

    pub fn empty() -> Self {
        Self { momenta: vec![], weights: vec![] }
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Massless dispersion: ω(k) = |k|.
    pub fn dispersion(&self) -> &[f64] {
        &self.momenta
    }

    /// Quadrature factor `sqrt(w_i / k_i)` attached to every field leg.
    pub fn leg_factor(&self, i: usize) -> f64 {
        (self.weights[i] / self.momenta[i]).sqrt()
    }

    /// Weight `w_i / k_i` of a contracted internal line.
    pub fn line_weight(&self, i: usize) -> f64 {
        self.weights[i] / self.momenta[i]
    }

    /// Modes with `k ≤ ρ`, relabeled `k → k/ρ` with weights `w → w/ρ³`,
    /// together with their indices in `self`.
    pub fn low_scaled(&self, rho: f64) -> (ModeSet, Vec<usize>) {
        let mut k = vec![];
        let mut w = vec![];
        let mut idx = vec![];
        for i in 0..self.len() {
            if self.momenta[i] <= rho * (1.0 + 1e-14) {
                k.push((self.momenta[i] / rho).min(1.0));
                w.push(self.weights[i] / rho.powi(3));
                idx.push(i);
            }
        }
        (ModeSet { momenta: k, weights: w }, idx)
    }

    pub fn matches(&self, other: &ModeSet, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .momenta
                .iter()
                .zip(&other.momenta)
                .all(|(a, b)| (a - b).abs() <= tol * a.abs().max(1.0))
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a - b).abs() <= tol * a.abs().max(1e-300))
    }
}

pub type Occupation = Vec<u8>;

#[derive(Clone, Debug)]
pub struct FockBasis {
    modes: ModeSet,
    n_max: usize,
    states: Vec<Occupation>,
    energies: Vec<f64>,
    totals: Vec<usize>,
    index: HashMap<Occupation, usize>,
}

impl FockBasis {
    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &Occupation {
        &self.states[i]
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Free-field energy Σ n_i ω_i of state `i`.
    pub fn energy(&self, i: usize) -> f64 {
        self.energies[i]
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn total(&self, i: usize) -> usize {
        self.totals[i]
    }
}

pub fn build_basis(modes: &ModeSet, n_max: usize) -> Result<FockBasis> {
    if modes.is_empty() {
        return Err(Error::Config("empty mode list".into()));
    }
    if n_max > u8::MAX as usize {
        return Err(Error::Config(format!("n_max {n_max} too large")));
    }
    let nm = modes.len();
    let mut states = Vec::new();
    for total in 0..=n_max {
        let mut cur = vec![0u8; nm];
        compositions(total, 0, &mut cur, &mut states);
    }
    let energies = states
        .iter()
        .map(|s| {
            s.iter()
                .zip(modes.dispersion())
                .map(|(&n, &w)| n as f64 * w)
                .sum()
        })
        .collect();
    let totals = states
        .iter()
        .map(|s| s.iter().map(|&n| n as usize).sum())
        .collect();
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(FockBasis { modes: modes.clone(), n_max, states, energies, totals, index })
}

// All occupation vectors with the given total, in lexicographic order.
fn compositions(rest: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Occupation>) {
    let last = cur.len() - 1;
    if pos == last {
        cur[pos] = rest as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for v in 0..=rest {
        cur[pos] = v as u8;
        compositions(rest - v, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderKind {
    Annihilate,
    Create,
}

/// Matrix of `b_i` or `b_i*` in the canonical basis.
pub fn ladder(basis: &FockBasis, mode_index: usize, kind: LadderKind) -> OperatorMatrix {
    assert!(mode_index < basis.modes.len(), "mode index out of range");
    let n = basis.dim();
    let mut a = OperatorMatrix::zeros(n);
    let mut occ = vec![0u8; basis.modes.len()];
    for (col, s) in basis.states.iter().enumerate() {
        let ni = s[mode_index];
        if ni == 0 {
            continue;
        }
        occ.copy_from_slice(s);
        occ[mode_index] -= 1;
        let row = basis.index[&occ];
        a.set(row, col, C64::new((ni as f64).sqrt(), 0.0));
    }
    match kind {
        LadderKind::Annihilate => a,
        LadderKind::Create => a.adjoint(),
    }
}

pub fn free_field_hamiltonian(basis: &FockBasis) -> OperatorMatrix {
    OperatorMatrix::diagonal_real(&basis.energies)
}

pub fn number_operator(basis: &FockBasis) -> OperatorMatrix {
    let d: Vec<f64> = basis.totals.iter().map(|&t| t as f64).collect();
    OperatorMatrix::diagonal_real(&d)
}

/// Apply `b_i` to an occupation vector in place; returns the `sqrt(n_i)` factor
/// or `None` when the result vanishes.
pub(crate) fn annihilate(occ: &mut [u8], i: usize) -> Option<f64> {
    let n = occ[i];
    if n == 0 {
        return None;
    }
    occ[i] = n - 1;
    Some((n as f64).sqrt())
}

/// Apply `b_i*`; returns `sqrt(n_i + 1)`. Truncation is handled by the caller's
/// index lookup.
pub(crate) fn create(occ: &mut [u8], i: usize) -> f64 {
    occ[i] += 1;
    (occ[i] as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    fn modes(k: &[f64]) -> ModeSet {
        ModeSet::new(k.to_vec(), vec![1.0; k.len()]).unwrap()
    }

    #[test]
    fn basis_dimensions() {
        assert_eq!(build_basis(&modes(&[0.5]), 0).unwrap().dim(), 1);
        let b = build_basis(&modes(&[0.5]), 3).unwrap();
        assert_eq!(b.dim(), 4);
        assert_eq!(b.states(), &[vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!(build_basis(&modes(&[0.2, 0.5, 0.9]), 2).unwrap().dim(), 10);
        assert!(build_basis(&ModeSet::empty(), 2).is_err());
    }

    #[test]
    fn canonical_order() {
        let b = build_basis(&modes(&[0.2, 0.5]), 2).unwrap();
        let expected: Vec<Occupation> =
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]];
        assert_eq!(b.states(), expected.as_slice());
        assert_eq!(b.index_of(&[0, 0]), Some(0));
    }

    #[test]
    fn two_level_ladder() {
        let b = build_basis(&modes(&[1.0]), 1).unwrap();
        let a = ladder(&b, 0, LadderKind::Annihilate);
        assert_eq!(a.get(0, 1), re(1.0));
        assert_eq!(a.get(0, 0), re(0.0));
        assert_eq!(a.get(1, 0), re(0.0));
        assert_eq!(a.get(1, 1), re(0.0));
    }

    #[test]
    fn free_field_spectrum() {
        let b = build_basis(&modes(&[0.3, 0.7]), 2).unwrap();
        let mut e = b.energies().to_vec();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [0.0, 0.3, 0.6, 0.7, 1.0, 1.4];
        for (x, y) in e.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        let one = build_basis(&modes(&[0.5]), 2).unwrap();
        assert_eq!(free_field_hamiltonian(&one).get(2, 2), re(1.0));
    }

    #[test]
    fn number_operator_trace() {
        let b = build_basis(&modes(&[0.5]), 3).unwrap();
        let n = number_operator(&b);
        let tr: f64 = n.diag().iter().map(|z| z.re).sum();
        assert_eq!(tr, 6.0);
        let b2 = build_basis(&modes(&[0.3, 0.4]), 2).unwrap();
        let i = b2.index_of(&[1, 1]).unwrap();
        assert_eq!(number_operator(&b2).get(i, i), re(2.0));
    }

    #[test]
    fn gauss_radial_measure() {
        let m = ModeSet::gauss_radial(12).unwrap();
        // Σ w/k² integrates 1 over (0,1]; Σ w integrates k² to 1/3.
        let s: f64 = (0..m.len()).map(|i| m.weights()[i] / m.momenta()[i].powi(2)).sum();
        assert!((s - 1.0).abs() < 1e-13);
        let t: f64 = m.weights().iter().sum();
        assert!((t - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn low_scaled_relabels() {
        let m = ModeSet::gauss_radial(6).unwrap();
        let (s, idx) = m.low_scaled(0.25);
        for (a, &i) in idx.iter().enumerate() {
            assert!((s.momenta()[a] * 0.25 - m.momenta()[i]).abs() < 1e-15);
            assert!((s.weights()[a] * 0.25f64.powi(3) - m.weights()[i]).abs() < 1e-15);
        }
    }
}
