//! Invariant suites for `srg verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spectral_rg::feshbach::{build_decimation, feshbach_map, q_pi, resolvent_identity_check, FeshbachOptions, QWhich};
use spectral_rg::fock::{build_basis, ladder, FockBasis, LadderKind, ModeSet};
use spectral_rg::hamiltonian::pauli_fierz::{default_grids, pauli_fierz_transform, Mollifier};
use spectral_rg::hamiltonian::{assemble_monomial, build_nelson, Kappa, ParticleModel};
use spectral_rg::kernels::{default_r_grid, norm_mu_s, Kernel};
use spectral_rg::linalg::{eigh, re, smallest_singular_vector, vec_norm, OperatorMatrix};
use spectral_rg::models::{displaced_oscillator, two_level_nelson};
use spectral_rg::rg::equivalence;
use spectral_rg::spectral::{fgr_width, solve_phi, SolverConfig};
use spectral_rg::C64;

use crate::commands::CliError;
use crate::output::write_json;
use crate::Common;

#[derive(Serialize)]
struct CheckRow {
    name: String,
    value: f64,
    limit: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    suite: String,
    seed: u64,
    pass: bool,
    checks: Vec<CheckRow>,
}

struct Checks(Vec<CheckRow>);

impl Checks {
    fn at_most(&mut self, name: &str, value: f64, limit: f64) {
        self.0.push(CheckRow { name: name.into(), value, limit, pass: value <= limit });
    }
}

pub fn run(suite: &str, c: &Common) -> Result<(), CliError> {
    let mut ch = Checks(vec![]);
    match suite {
        "ccr" => ccr(&mut ch),
        "feshbach" => feshbach(&mut ch, c.seed)?,
        "wick" => wick(&mut ch, c.tol.unwrap_or(1e-6))?,
        "norms" => norms(&mut ch, c.seed)?,
        "pf" => pf(&mut ch)?,
        "spectral" => spectral(&mut ch, c.tol.unwrap_or(1e-5))?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown suite {other:?} (expected ccr, feshbach, wick, norms, pf or spectral)"
            )))
        }
    }
    let pass = ch.0.iter().all(|r| r.pass);
    for r in &ch.0 {
        println!("{} {}: {:.3e} (limit {:.1e})", if r.pass { "PASS" } else { "FAIL" }, r.name, r.value, r.limit);
    }
    let rep = VerifyReport { command: "verify", suite: suite.into(), seed: c.seed, pass, checks: ch.0 };
    write_json(&c.out, "results.json", &rep)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed(format!("suite {suite} failed")))
    }
}

fn ccr(ch: &mut Checks) {
    let modes = ModeSet::new(vec![0.3, 0.6], vec![1.0, 1.0]).expect("valid modes");
    let b = build_basis(&modes, 3).expect("valid basis");
    let inner: Vec<usize> = (0..b.dim()).filter(|&i| b.total(i) < b.n_max()).collect();
    let (mut adj, mut same, mut mixed) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..modes.len() {
        let a = ladder(&b, i, LadderKind::Annihilate);
        let ad = ladder(&b, i, LadderKind::Create);
        adj = adj.max(ad.sub(&a.adjoint()).max_abs());
        let comm = a.commutator(&ad).principal_submatrix(&inner);
        same = same.max(comm.sub(&OperatorMatrix::identity(inner.len())).max_abs());
        for j in (0..modes.len()).filter(|&j| j != i) {
            let cross = a.commutator(&ladder(&b, j, LadderKind::Create)).principal_submatrix(&inner);
            mixed = mixed.max(cross.max_abs()).max(a.commutator(&ladder(&b, j, LadderKind::Annihilate)).max_abs());
        }
    }
    ch.at_most("a* is the adjoint of a", adj, 0.0);
    ch.at_most("[a_i, a*_i] = 1 below the cutoff", same, 1e-14);
    ch.at_most("[a_i, a*_j] = [a_i, a_j] = 0", mixed, 0.0);
}

fn random_decimation(rng: &mut ChaCha8Rng) -> Result<(spectral_rg::feshbach::Decimation, FockBasis), CliError> {
    let rho = rng.gen_range(0.25..0.5);
    let k1 = rng.gen_range(0.05..0.3 * rho);
    let k2 = rng.gen_range(0.91 * rho..1.2 * rho);
    let modes = ModeSet::new(vec![k1, k2], vec![rng.gen_range(0.05..0.3), rng.gen_range(0.05..0.3)])?;
    let (a, b, cc, d) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let ff = OperatorMatrix::from_rows(&[vec![C64::new(a, 0.0), C64::new(b, cc)], vec![C64::new(b, -cc), C64::new(d, 0.0)]]);
    let particle = ParticleModel::diagonal(&[0.0, rng.gen_range(0.6..1.2)])?;
    let g = rng.gen_range(0.01..0.05);
    let h = build_nelson(particle, Kappa::SqrtGaussian { cutoff: 1.0 }, ff, g, 0.5, modes, 1.0)?;
    let basis = build_basis(&h.modes, 3)?;
    Ok((build_decimation(&h, &basis, 0, rho)?, basis))
}

fn feshbach(ch: &mut Checks, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = FeshbachOptions::default();
    let (mut part, mut dims, mut transport, mut resolvent) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..5 {
        let (dec, _) = random_decimation(&mut rng)?;
        let n = dec.dim();
        let s = dec.pi_matrix.matmul(&dec.pi_matrix).add(&dec.pibar_matrix.matmul(&dec.pibar_matrix));
        part = part.max(s.sub(&OperatorMatrix::identity(n)).max_abs());
        let (vals, _) = eigh(&dec.h)?;
        for e in vals.into_iter().filter(|v| (v - dec.lambda_j.re).abs() < dec.rho / 2.0) {
            let lam = re(e);
            let f = feshbach_map(&dec, lam, opts)?;
            let kh = kernel_dim(&dec.h.shift(lam))?;
            let kf = kernel_dim(&f.matrix)?;
            dims = dims.max((kh as f64 - kf as f64).abs());
            let (_, v) = smallest_singular_vector(&f.matrix)?;
            let psi = q_pi(&dec, lam, QWhich::Plain, opts)?.mul_vec(&v);
            transport = transport.max(vec_norm(&dec.h.shift(lam).mul_vec(&psi)) / vec_norm(&psi));
        }
        resolvent = resolvent.max(resolvent_identity_check(&dec, dec.lambda_j - 0.1, opts)?);
    }
    ch.at_most("π² + π̄² = 1", part, 1e-13);
    ch.at_most("kernel dimension mismatch", dims, 0.0);
    ch.at_most("eigenvector transport residual", transport, 1e-9);
    ch.at_most("resolvent identity residual", resolvent, 1e-9);
    Ok(())
}

fn kernel_dim(m: &OperatorMatrix) -> Result<usize, CliError> {
    let s = m.singular_values()?;
    let top = s.iter().cloned().fold(1.0, f64::max);
    Ok(s.iter().filter(|&&x| x < 1e-10 * top).count())
}

fn wick(ch: &mut Checks, tol: f64) -> Result<(), CliError> {
    let h = two_level_nelson(0.05, 1.0, 1.0, 4)?;
    let rel = equivalence(&h, 0, 0.25, re(-0.02), 2, 2)?.relative_error();
    ch.at_most("kernel pipeline vs matrix Feshbach map (relative)", rel, tol);
    Ok(())
}

fn norms(ch: &mut Checks, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = ModeSet::gauss_radial(5)?;
    let b = build_basis(&modes, 3)?;
    let e = b.energies();
    let mut worst = 0.0f64;
    for (m, n) in [(1, 0), (0, 1), (1, 1), (2, 0), (0, 2)].into_iter().cycle().take(20) {
        let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let k = Kernel::from_fn(m, n, default_r_grid(), modes.momenta().to_vec(), |r, ks| {
            let s: f64 = ks.iter().enumerate().map(|(i, k)| (a[i] * 7.0 * k).sin()).sum();
            C64::new((a[2] + s).cos(), (a[3] * r).sin())
        });
        let w0 = norm_mu_s(&k, 0.0, 0)?;
        let w = assemble_monomial(&k, &b, false)?;
        let (mf, nf) = (m as f64, n as f64);
        let s = OperatorMatrix::from_fn(b.dim(), |i, j| {
            w.get(i, j) * (e[i] + 1.0).powf(-mf / 2.0) * (e[j] + 1.0).powf(-nf / 2.0)
        })
        .op_norm();
        worst = worst.max(s / w0 - 1.0);
    }
    ch.at_most("sandwiched norm / ‖w‖_0 − 1", worst, 1e-10);
    Ok(())
}

fn pf(ch: &mut Checks) -> Result<(), CliError> {
    let c1 = |n| -> Result<f64, CliError> {
        let (x, k) = default_grids(n, 10.0);
        Ok(pauli_fierz_transform(1.0, Mollifier::Tanh { scale: 1.0 }, &x, &k)?.c1)
    };
    let (a, b) = (c1(64)?, c1(128)?);
    ch.at_most("infrared constant on 64² grid", a, f64::MAX);
    ch.at_most("refinement ratio 64² → 128²", a.max(b) / a.min(b), 2.0);
    Ok(())
}

fn spectral(ch: &mut Checks, tol: f64) -> Result<(), CliError> {
    let g = 0.1;
    let r = solve_phi(&displaced_oscillator(g)?, 0, &SolverConfig::default())?;
    ch.at_most("oscillator |e_0 + g²|", (r.e - re(-g * g)).norm(), tol);
    ch.at_most("fixed-point residual", r.residual, 1e-10);
    let closed = fgr_width(&two_level_nelson(0.05, 1.5, 0.35, 8)?, 1)?;
    ch.at_most("golden-rule width with closed channel", closed, 0.0);
    Ok(())
}
