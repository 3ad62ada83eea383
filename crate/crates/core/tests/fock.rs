use proptest::prelude::*;
use spectral_rg::fock::{build_basis, free_field_hamiltonian, ladder, number_operator, LadderKind, ModeSet};
use spectral_rg::linalg::{c, OperatorMatrix};

fn modes(ks: &[f64]) -> ModeSet {
    ModeSet::new(ks.to_vec(), vec![1.0; ks.len()]).unwrap()
}

// multisets of size <= n drawn from m kinds, counted by brute force
fn count_states(m: usize, n: usize) -> usize {
    fn rec(m: usize, left: usize) -> usize {
        if m == 0 {
            return 1;
        }
        (0..=left).map(|t| rec(m - 1, left - t)).sum()
    }
    rec(m, n)
}

#[test]
fn basis_examples() {
    let b = build_basis(&modes(&[0.5]), 0).unwrap();
    assert_eq!(b.dim(), 1);
    assert_eq!(b.state(0), &[0u8][..]);

    let b = build_basis(&modes(&[0.5]), 3).unwrap();
    assert_eq!(b.dim(), 4);
    for i in 0..4 {
        assert_eq!(b.state(i), &[i as u8][..]);
    }

    let b = build_basis(&modes(&[0.2, 0.5, 0.9]), 2).unwrap();
    assert_eq!(b.dim(), 10);
    assert_eq!(count_states(3, 2), 10);
}

#[test]
fn empty_modes_rejected() {
    assert!(build_basis(&ModeSet::empty(), 2).is_err());
}

#[test]
fn vacuum_first_and_graded_order() {
    let b = build_basis(&modes(&[0.1, 0.4, 0.8]), 3).unwrap();
    assert!(b.state(0).iter().all(|&n| n == 0));
    for i in 1..b.dim() {
        assert!(b.total(i) >= b.total(i - 1));
    }
    let mut seen = std::collections::HashSet::new();
    for s in b.states() {
        assert!(seen.insert(s.clone()));
        assert_eq!(b.index_of(s), seen.len().checked_sub(1));
    }
}

#[test]
fn ladder_examples() {
    let b = build_basis(&modes(&[0.5]), 1).unwrap();
    let a = ladder(&b, 0, LadderKind::Annihilate);
    let want = OperatorMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]);
    assert_eq!(a.sub(&want).max_abs(), 0.0);

    let b = build_basis(&modes(&[0.3, 0.6]), 3).unwrap();
    let a = ladder(&b, 1, LadderKind::Annihilate);
    let mut vac = vec![c(0.0, 0.0); b.dim()];
    vac[0] = c(1.0, 0.0);
    assert!(a.mul_vec(&vac).iter().all(|z| z.norm() == 0.0));
}

#[test]
fn free_field_examples() {
    let b = build_basis(&modes(&[0.5]), 2).unwrap();
    let hf = free_field_hamiltonian(&b);
    assert_eq!(hf.get(0, 0).re, 0.0);
    assert!((hf.get(2, 2).re - 1.0).abs() < 1e-15);

    let b = build_basis(&modes(&[0.3, 0.7]), 2).unwrap();
    let mut d: Vec<f64> = free_field_hamiltonian(&b).diag().iter().map(|z| z.re).collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let want = [0.0, 0.3, 0.6, 0.7, 1.0, 1.4];
    for (x, y) in d.iter().zip(want) {
        assert!((x - y).abs() < 1e-14, "{d:?}");
    }
}

#[test]
fn number_operator_examples() {
    let b = build_basis(&modes(&[0.3, 0.7]), 2).unwrap();
    let n = number_operator(&b);
    assert_eq!(n.get(0, 0).re, 0.0);
    let i = b.index_of(&[1, 1]).unwrap();
    assert_eq!(n.get(i, i).re, 2.0);

    let b = build_basis(&modes(&[0.5]), 3).unwrap();
    let tr: f64 = number_operator(&b).diag().iter().map(|z| z.re).sum();
    assert_eq!(tr, 6.0);
}

#[test]
fn free_field_kernel_is_vacuum() {
    let b = build_basis(&modes(&[0.2, 0.5, 1.0]), 3).unwrap();
    let hf = free_field_hamiltonian(&b);
    let zeros = hf.diag().iter().filter(|z| z.norm() == 0.0).count();
    assert_eq!(zeros, 1);
    assert!(hf.diag().iter().all(|z| z.re >= 0.0));
    let n = number_operator(&b);
    assert_eq!(hf.commutator(&n).max_abs(), 0.0);
}

#[test]
fn gauss_radial_grid() {
    let m = ModeSet::gauss_radial(12).unwrap();
    assert!(m.momenta().windows(2).all(|w| w[0] < w[1]));
    assert!(m.momenta().iter().all(|&k| k > 0.0 && k <= 1.0));
    assert_eq!(m.dispersion(), m.momenta());
    // angle-averaged measure k² dk: ∫_0^1 k² dk = 1/3, ∫_0^1 k⁴ dk = 1/5
    let s2: f64 = m.weights().iter().sum();
    let s4: f64 = m.weights().iter().zip(m.momenta()).map(|(w, k)| w * k * k).sum();
    assert!((s2 - 1.0 / 3.0).abs() < 1e-13);
    assert!((s4 - 0.2).abs() < 1e-13);
}

#[test]
fn invalid_mode_sets() {
    assert!(ModeSet::new(vec![0.5, 0.4], vec![1.0, 1.0]).is_err());
    assert!(ModeSet::new(vec![0.0], vec![1.0]).is_err());
    assert!(ModeSet::new(vec![1.5], vec![1.0]).is_err());
    assert!(ModeSet::new(vec![0.5], vec![-1.0]).is_err());
    assert!(ModeSet::new(vec![0.5], vec![1.0, 2.0]).is_err());
}

fn ccr_defects(b: &spectral_rg::fock::FockBasis) -> (f64, f64, f64) {
    let nk = b.modes().len();
    let inner: Vec<usize> = (0..b.dim()).filter(|&i| b.total(i) < b.n_max()).collect();
    let mut adj: f64 = 0.0;
    let mut cross: f64 = 0.0;
    let mut diag: f64 = 0.0;
    for i in 0..nk {
        let a = ladder(b, i, LadderKind::Annihilate);
        let ad = ladder(b, i, LadderKind::Create);
        adj = adj.max(ad.sub(&a.adjoint()).max_abs());
        let comm = a.commutator(&ad);
        let block = comm.principal_submatrix(&inner);
        diag = diag.max(block.sub(&OperatorMatrix::identity(inner.len())).max_abs());
        for j in 0..nk {
            if i == j {
                continue;
            }
            let aj = ladder(b, j, LadderKind::Annihilate);
            let adj_j = ladder(b, j, LadderKind::Create);
            // a*_j leaves the space at the edge, so [a_i, a*_j] vanishes below it only
            let mixed = a.commutator(&adj_j).principal_submatrix(&inner).max_abs();
            cross = cross.max(a.commutator(&aj).max_abs()).max(mixed);
        }
    }
    (adj, cross, diag)
}

#[test]
fn ccr_two_modes_n3() {
    let b = build_basis(&modes(&[0.3, 0.6]), 3).unwrap();
    let (adj, cross, diag) = ccr_defects(&b);
    assert_eq!(adj, 0.0);
    assert_eq!(cross, 0.0);
    assert!(diag < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ccr_holds_below_truncation(nk in 1usize..4, n_max in 1usize..4) {
        let ks: Vec<f64> = (1..=nk).map(|i| i as f64 / nk as f64).collect();
        let b = build_basis(&modes(&ks), n_max).unwrap();
        prop_assert_eq!(b.dim(), count_states(nk, n_max));
        let (adj, cross, diag) = ccr_defects(&b);
        prop_assert_eq!(adj, 0.0);
        prop_assert_eq!(cross, 0.0);
        prop_assert!(diag < 1e-14);
    }

    #[test]
    fn free_field_is_additive(ws in prop::collection::vec(0.01f64..1.0, 1..4), n_max in 0usize..4) {
        let mut ks = ws.clone();
        ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ks.dedup();
        let b = build_basis(&modes(&ks), n_max).unwrap();
        let hf = free_field_hamiltonian(&b);
        for i in 0..b.dim() {
            let e: f64 = b.state(i).iter().zip(&ks).map(|(&n, k)| n as f64 * k).sum();
            prop_assert!((hf.get(i, i).re - e).abs() < 1e-14);
        }
    }
}
