//! Brute-force reference: dense eigendecomposition, eigenvalue tracking
//! along parameter paths, and closed-form benchmarks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::linalg::{column, eig, eigh, inner, vec_norm, OperatorMatrix};
use crate::C64;

/// Default largest matrix dimension handed to the dense solvers.
pub const DIM_CAP: usize = 4096;

#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Sorted by real part, then imaginary part.
    pub values: Vec<C64>,
    /// Right eigenvectors as columns, in the order of `values`.
    pub vectors: Option<OperatorMatrix>,
    /// `max ‖M v − λ v‖ / ‖M‖` over normalized eigenvectors.
    pub max_residual: f64,
}

impl Spectrum {
    /// Index and overlap of the eigenvector closest in angle to `target`.
    /// `None` without stored vectors.
    pub fn best_overlap(&self, target: &[C64]) -> Option<(usize, f64)> {
        let vecs = self.vectors.as_ref()?;
        (0..self.values.len())
            .map(|i| (i, overlap(target, &column(vecs, i))))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    }
}

pub fn exact_spectrum(m: &OperatorMatrix, hermitian: bool, vectors: bool) -> Result<Spectrum> {
    exact_spectrum_capped(m, hermitian, vectors, DIM_CAP)
}

pub fn exact_spectrum_capped(m: &OperatorMatrix, hermitian: bool, vectors: bool, cap: usize) -> Result<Spectrum> {
    let n = m.dim();
    if n > cap {
        return Err(Error::DimensionCap { dim: n, cap });
    }
    let (vals, vecs) = if hermitian {
        let (w, v) = eigh(m)?;
        (w.into_iter().map(|x| C64::new(x, 0.0)).collect::<Vec<_>>(), v)
    } else {
        eig(m)?
    };
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| (vals[a].re, vals[a].im).partial_cmp(&(vals[b].re, vals[b].im)).unwrap());
    let values: Vec<C64> = order.iter().map(|&i| vals[i]).collect();
    let sorted = OperatorMatrix::from_fn(n, |i, j| vecs.get(i, order[j]));
    let scale = m.op_norm().max(1e-300);
    let mut max_residual = 0.0f64;
    for (j, &l) in values.iter().enumerate() {
        let v = column(&sorted, j);
        let nv = vec_norm(&v);
        let mv = m.mul_vec(&v);
        let r: f64 = mv.iter().zip(&v).map(|(a, b)| (a - b * l).norm_sqr()).sum::<f64>().sqrt();
        max_residual = max_residual.max(r / (nv * scale));
    }
    Ok(Spectrum { values, vectors: vectors.then_some(sorted), max_residual })
}

#[derive(Clone, Debug, Serialize)]
pub struct Branch {
    pub params: Vec<f64>,
    pub values: Vec<C64>,
    /// Overlap of each eigenvector with its predecessor.
    pub overlaps: Vec<f64>,
    /// Path indices where the overlap match differs from the nearest
    /// eigenvalue.
    pub crossings: Vec<usize>,
}

fn overlap(a: &[C64], b: &[C64]) -> f64 {
    inner(a, b).norm() / (vec_norm(a) * vec_norm(b))
}

/// Follow an eigenpair along `path` by maximal eigenvector overlap.
pub fn track_eigenvalue(
    family: impl Fn(f64) -> Result<OperatorMatrix>,
    start: (C64, Vec<C64>),
    path: &[f64],
) -> Result<Branch> {
    let (mut val, mut vec) = start;
    let mut out = Branch { params: vec![], values: vec![], overlaps: vec![], crossings: vec![] };
    for (step, &p) in path.iter().enumerate() {
        let m = family(p)?;
        let (vals, vecs) = eig(&m)?;
        let ov: Vec<f64> = (0..vals.len()).map(|i| overlap(&vec, &column(&vecs, i))).collect();
        let best = (0..vals.len())
            .max_by(|&a, &b| ov[a].partial_cmp(&ov[b]).unwrap())
            .ok_or_else(|| Error::Eigen("empty spectrum".into()))?;
        if ov[best] < 0.5 {
            return Err(Error::BranchAmbiguity { param: p, overlap: ov[best] });
        }
        let nearest = (0..vals.len())
            .min_by(|&a, &b| (vals[a] - val).norm().partial_cmp(&(vals[b] - val).norm()).unwrap())
            .expect("nonempty");
        if nearest != best && (vals[nearest] - vals[best]).norm() > 1e-12 {
            out.crossings.push(step);
        }
        val = vals[best];
        vec = column(&vecs, best);
        out.params.push(p);
        out.values.push(val);
        out.overlaps.push(ov[best]);
    }
    Ok(out)
}

/// Weight of `v` (particle-major, index `p·D + f`) on field states with
/// exactly `n_max` bosons. Eigenvectors living there feel the truncation:
/// emission is blocked, so they miss the self-energy of the states below.
pub fn truncation_edge_weight(v: &[C64], basis: &FockBasis) -> f64 {
    let nf = basis.dim();
    let total: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let edge: f64 = v
        .iter()
        .enumerate()
        .filter(|(i, _)| basis.total(i % nf) == basis.n_max())
        .map(|(_, x)| x.norm_sqr())
        .sum();
    edge / total
}

/// Ground energy `−c²/ω` of `ω a*a + c(a + a*)`.
pub fn displaced_oscillator_energy(omega: f64, c: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Model(format!("ω = {omega} must be positive")));
    }
    Ok(-c * c / omega)
}
