//! Preset Hamiltonians used by the tests, the acceptance suite and the CLI.

use crate::error::Result;
use crate::fock::ModeSet;
use crate::hamiltonian::{build_nelson, GHHamiltonian, Kappa, ParticleModel};
use crate::linalg::{re, OperatorMatrix};

/// Form factor of the two-level toy.
pub fn two_level_form_factor() -> OperatorMatrix {
    OperatorMatrix::from_rows(&[vec![re(1.0), re(1.0)], vec![re(1.0), re(0.5)]])
}

/// Trivial particle coupled to one mode at `k = 1` with unit weight and
/// `κ = √k`: the Hamiltonian `a*a + g(a + a*)`, ground energy `−g²`.
pub fn displaced_oscillator(g: f64) -> Result<GHHamiltonian> {
    let modes = ModeSet::single(1.0, 1.0)?;
    build_nelson(ParticleModel::trivial(), Kappa::Sqrt, OperatorMatrix::identity(1), g, 0.5, modes, 1.0)
}

/// Levels `0, gap` coupled through [`two_level_form_factor`] with
/// `κ(k) = √k exp(−k²/Λ²)` on a radial Gauss grid.
pub fn two_level_nelson(g: f64, gap: f64, cutoff: f64, n_modes: usize) -> Result<GHHamiltonian> {
    let modes = ModeSet::gauss_radial(n_modes)?;
    build_nelson(
        ParticleModel::diagonal(&[0.0, gap])?,
        Kappa::SqrtGaussian { cutoff },
        two_level_form_factor(),
        g,
        0.5,
        modes,
        1.0,
    )
}

/// The toy used for resonance checks: gap 0.5, cutoff 0.35, 24 modes.
/// The coupling is negligible at the grid edge `k = 1`, so the dilated
/// mode sum stays a contour rotation and the resonance is θ-stable.
pub fn resonance_toy(g: f64) -> Result<GHHamiltonian> {
    two_level_nelson(g, 0.5, 0.35, 24)
}
