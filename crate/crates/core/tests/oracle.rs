use spectral_rg::error::Error;
use spectral_rg::fock::build_basis;
use spectral_rg::hamiltonian::assemble_gh;
use spectral_rg::linalg::{c, column, re, OperatorMatrix};
use spectral_rg::models::displaced_oscillator;
use spectral_rg::oracle::*;

// ω a*a + c(a + a*) on occupations 0..=n, built by hand
fn oscillator(omega: f64, cc: f64, n: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(n + 1, |i, j| {
        if i == j {
            re(omega * i as f64)
        } else if i + 1 == j || j + 1 == i {
            re(cc * (i.max(j) as f64).sqrt())
        } else {
            re(0.0)
        }
    })
}

#[test]
fn diagonal_spectrum_sorted() {
    let m = OperatorMatrix::diagonal(&[c(2.0, 0.0), c(-1.0, 0.5), c(-1.0, -0.5)]);
    let s = exact_spectrum(&m, false, true).unwrap();
    assert_eq!(s.values, vec![c(-1.0, -0.5), c(-1.0, 0.5), c(2.0, 0.0)]);
    assert!(s.max_residual < 1e-15);
    let h = exact_spectrum(&OperatorMatrix::diagonal_real(&[3.0, 1.0]), true, false).unwrap();
    assert_eq!(h.values, vec![re(1.0), re(3.0)]);
    assert!(h.vectors.is_none());
}

#[test]
fn dimension_cap() {
    let m = OperatorMatrix::identity(5);
    assert!(matches!(exact_spectrum_capped(&m, true, false, 4), Err(Error::DimensionCap { dim: 5, cap: 4 })));
}

#[test]
fn closed_form_oscillator() {
    for (omega, cc, want) in [(1.0, 0.1, -0.01), (1.0, 0.0, 0.0), (2.0, 0.2, -0.02)] {
        let e = displaced_oscillator_energy(omega, cc).unwrap();
        assert!((e - want).abs() < 1e-16);
        let s = exact_spectrum(&oscillator(omega, cc, 12), true, false).unwrap();
        assert!((s.values[0].re - e).abs() < 1e-12, "{} vs {e}", s.values[0].re);
    }
    assert!(displaced_oscillator_energy(0.0, 0.1).is_err());
}

#[test]
fn assembled_oscillator_matches_hand_matrix() {
    let h = displaced_oscillator(0.1).unwrap();
    let b = build_basis(&h.modes, 12).unwrap();
    let m = assemble_gh(&h, &b).unwrap();
    assert!(m.sub(&oscillator(1.0, 0.1, 12)).max_abs() < 1e-15);
}

#[test]
fn tracks_oscillator_branch() {
    let family = |g: f64| Ok(oscillator(1.0, g, 12));
    let s = exact_spectrum(&oscillator(1.0, 0.0, 12), true, true).unwrap();
    let start = (s.values[0], column(s.vectors.as_ref().unwrap(), 0));
    let path: Vec<f64> = (1..=10).map(|i| 0.01 * i as f64).collect();
    let b = track_eigenvalue(family, start, &path).unwrap();
    for (g, v) in b.params.iter().zip(&b.values) {
        assert!((v - re(-g * g)).norm() < 1e-12);
    }
    assert!(b.crossings.is_empty());
    assert!(b.overlaps.iter().all(|&o| o > 0.99));
}

#[test]
fn crossing_detector() {
    let family = |t: f64| Ok(OperatorMatrix::diagonal_real(&[t, -t]));
    let start = (re(-1.0), vec![re(1.0), re(0.0)]);
    let b = track_eigenvalue(family, start, &[-1.0, -0.5, -0.1, 0.1, 0.5]).unwrap();
    assert_eq!(b.crossings, vec![3]);
    assert_eq!(b.values[4], re(0.5));
}

#[test]
fn ambiguous_branch_rejected() {
    // equal weight on five levels: best overlap 1/√5 < 1/2
    let family = |_t: f64| Ok(OperatorMatrix::diagonal_real(&[0.0, 1.0, 2.0, 3.0, 4.0]));
    let start = (re(0.0), vec![re(1.0); 5]);
    assert!(matches!(track_eigenvalue(family, start, &[0.0]), Err(Error::BranchAmbiguity { .. })));
}

#[test]
fn truncation_edge_weight_examples() {
    let h = displaced_oscillator(0.0).unwrap();
    let b = build_basis(&h.modes, 3).unwrap();
    let mut v = vec![re(0.0); 4];
    v[3] = re(2.0);
    assert_eq!(truncation_edge_weight(&v, &b), 1.0);
    v[0] = re(2.0);
    assert_eq!(truncation_edge_weight(&v, &b), 0.5);
}
