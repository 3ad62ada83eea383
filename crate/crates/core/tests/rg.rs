
use spectral_rg::error::Error;
use spectral_rg::fock::ModeSet;
use spectral_rg::hamiltonian::ParticleModel;
use spectral_rg::kernels::{default_r_grid, Kernel, KernelSequence};
use spectral_rg::linalg::{c, re};
use spectral_rg::models::{displaced_oscillator, two_level_nelson};
use spectral_rg::rg::*;

#[test]
fn kernel_pipeline_matches_matrix_feshbach() {
    let h = two_level_nelson(0.05, 1.0, 1.0, 4).unwrap();
    let eq = equivalence(&h, 0, 0.25, c(-0.02, 0.0), 4, 2).unwrap();
    assert!(eq.relative_error() < 1e-6);
}

#[test]
fn pipeline_matches_at_each_depth() {
    let h = two_level_nelson(0.05, 1.0, 1.0, 4).unwrap();
    for l in 1..=3 {
        let eq = equivalence(&h, 0, 0.25, c(0.01, 0.01), l, 2).unwrap();
        assert!(eq.relative_error() < 1e-6, "L = {l}: {}", eq.relative_error());
    }
}

#[test]
fn zero_coupling_decimation_is_free() {
    let h = two_level_nelson(0.0, 1.0, 1.0, 6).unwrap();
    let (rho, lam) = (0.25, re(0.03));
    let seq = first_decimation(&h, &WickConfig::new(lam, rho, 0)).unwrap();
    for r in [0.0, 0.3, 0.9, 1.5] {
        let want = r - 0.03 / rho;
        assert!((seq.w00_at(r) - re(want)).norm() < 1e-12, "r = {r}");
    }
    assert!(seq.interaction().all(|(_, k)| k.max_abs() == 0.0));
}

#[test]
fn oscillator_vacuum_by_hand() {
    // the only mode sits at k = 1, outside Ran χ_ρ: the vacuum entry is the
    // scalar Neumann series over paths Ω → 1 → ... → Ω
    let g: f64 = 0.1;
    let h = displaced_oscillator(g).unwrap();
    let rho = 0.5;
    for lam in [0.0, -0.01, 0.02] {
        let d1 = 1.0 - lam;
        let d2 = 2.0 - lam;
        let cfg = WickConfig { l_max: 2, ..WickConfig::new(re(lam), rho, 0) };
        let w = rho * first_decimation(&h, &cfg).unwrap().w00_at_0();
        assert!((w - re(-lam - g * g / d1)).norm() < 1e-13, "{w}");
        let cfg = WickConfig { l_max: 4, ..cfg };
        let w = rho * first_decimation(&h, &cfg).unwrap().w00_at_0();
        let want = -lam - g * g / d1 - 2.0 * g.powi(4) / (d1 * d1 * d2);
        assert!((w - re(want)).norm() < 1e-13, "{w} vs {want}");
    }
}

#[test]
fn decimation_rejects_bad_input() {
    let h = two_level_nelson(0.01, 1.0, 1.0, 4).unwrap();
    assert!(matches!(first_decimation(&h, &WickConfig::new(re(0.0), 0.6, 0)), Err(Error::Range(_))));
    assert!(matches!(first_decimation(&h, &WickConfig::new(re(0.5), 0.25, 0)), Err(Error::OutsideRegion(_))));
    let mut h2 = h.clone();
    h2.particle = ParticleModel::diagonal(&[0.0, 0.0]).unwrap();
    assert!(first_decimation(&h2, &WickConfig::new(re(0.0), 0.25, 0)).is_err());
    let strong = two_level_nelson(20.0, 1.0, 1.0, 4).unwrap();
    assert!(matches!(
        first_decimation(&strong, &WickConfig::new(re(0.0), 0.25, 0)),
        Err(Error::NeumannDivergence { .. })
    ));
}

#[test]
fn produced_kernels_are_symmetric() {
    let h = two_level_nelson(0.05, 1.0, 1.0, 6).unwrap();
    let seq = first_decimation(&h, &WickConfig::new(re(0.0), 0.25, 0)).unwrap();
    assert!(seq.get(2, 0).is_some());
    for (_, k) in seq.interaction() {
        assert!(k.symmetry_defect() < 1e-12);
    }
}

fn free(n: usize) -> KernelSequence {
    KernelSequence::free_field(ModeSet::gauss_radial(n).unwrap(), 0.5, 2)
}

#[test]
fn free_field_is_a_fixed_point() {
    let s = free(6);
    let t = flow_step(&s, 0.25, 3).unwrap();
    for r in [0.0, 0.2, 0.7, 1.3] {
        assert!((t.w00_at(r) - re(r)).norm() < 1e-12);
    }
    assert!(t.interaction().all(|(_, k)| k.max_abs() == 0.0));
}

#[test]
fn constant_grows_by_inverse_scale() {
    let mut s = free(6);
    s.shift_w00(c(0.02, -0.01));
    for rho in [0.25, 0.5] {
        let t = flow_step(&s, rho, 3).unwrap();
        assert!((t.w00_at_0() - c(0.02, -0.01) / rho).norm() < 1e-12);
        assert!((t.w00_at(0.5) - t.w00_at_0() - re(0.5)).norm() < 1e-12);
    }
}

fn with_linear_coupling(g: f64, n: usize) -> KernelSequence {
    let mut s = free(n);
    let modes = ModeSet::gauss_radial(n).unwrap();
    let kg = modes.momenta().to_vec();
    for (m, nn) in [(1, 0), (0, 1)] {
        s.insert(Kernel::from_fn(m, nn, default_r_grid(), kg.clone(), |_, ks| re(g * ks[0].sqrt()))).unwrap();
    }
    s
}

#[test]
fn flow_contracts_small_interaction() {
    let h = two_level_nelson(0.01, 1.0, 1.0, 8).unwrap();
    let s = first_decimation(&h, &WickConfig::new(re(0.0), 0.25, 0)).unwrap();
    let out = flow(&s, &FlowConfig { steps: 3, l_max: 2, ..FlowConfig::default() }).unwrap();
    assert_eq!(out.trace.steps(), 3);
    for row in &out.trace.rows[1..] {
        assert!(row.ratio > 0.0 && row.ratio <= 0.5, "{row:?}");
    }
}

#[test]
fn flow_leaves_polydisc_at_strong_coupling() {
    let s = with_linear_coupling(0.25, 8);
    match flow(&s, &FlowConfig::default()) {
        Err(Error::FlowDivergence { trace, .. }) => assert!(trace.rows.len() >= 1),
        other => panic!("expected divergence, got {:?}", other.map(|r| r.trace)),
    }
}

#[test]
fn flow_rejects_bad_scale() {
    assert!(flow_step(&free(3), 0.7, 2).is_err());
}
