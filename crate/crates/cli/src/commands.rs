use std::fmt;

use serde::Serialize;
use spectral_rg::config::ModelConfig;
use spectral_rg::fock::build_basis;
use spectral_rg::hamiltonian::{assemble_gh, GHHamiltonian};
use spectral_rg::linalg::{column, re};
use spectral_rg::oracle::{exact_spectrum, truncation_edge_weight, DIM_CAP};
use spectral_rg::rg::{first_decimation, FlowConfig, FlowTrace, WickConfig};
use spectral_rg::spectral::{cone_check, fgr_width, gap_and_region, solve_phi, SolverConfig};
use spectral_rg::{Error, C64};

use crate::output::{write_json, write_kernels, write_trace};
use crate::Common;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or usage: exit 2.
    Usage(String),
    /// A check failed or the computation broke down: exit 1.
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(s) | CliError::Failed(s) => f.write_str(s),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Io(_) | Error::Domain(_) => CliError::Usage(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

pub fn load(c: &Common) -> Result<ModelConfig, CliError> {
    let path = c.config.as_ref().ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let cfg = ModelConfig::from_path(path).map_err(|e| match e {
        Error::Io(err) => CliError::Usage(format!("{}: {err}", path.display())),
        other => other.into(),
    })?;
    if let Some(r) = c.rho {
        if !(r > 0.0 && r <= 0.5) {
            return Err(CliError::Usage(format!("--rho {r} outside (0, 1/2]")));
        }
    }
    Ok(cfg)
}

fn solver(cfg: &ModelConfig, c: &Common) -> SolverConfig {
    let s = &cfg.solver;
    SolverConfig {
        rho: c.rho.or(s.rho),
        l_max: s.l_max,
        max_mn: s.max_mn,
        n_max: s.kernel_n_max,
        tol: s.tol,
        max_iter: s.max_iter,
    }
}

/// Oracle eigenvalue whose eigenvector is closest to `ψ_j ⊗ Ω`, with the
/// full spectrum and the basis. `None` above the dimension cap.
struct OracleLevel {
    value: C64,
    values: Vec<C64>,
    edge: Vec<f64>,
}

fn oracle_level(h: &GHHamiltonian, n_max: usize, j: usize, hermitian: bool) -> Result<Option<OracleLevel>, CliError> {
    let b = build_basis(&h.modes, n_max)?;
    let dim = b.dim() * h.particle.dim();
    if dim > DIM_CAP {
        log::warn!("oracle skipped: dimension {dim} above {DIM_CAP}");
        return Ok(None);
    }
    let sp = exact_spectrum(&assemble_gh(h, &b)?, hermitian, true)?;
    let psi = h.particle.psi(j);
    let mut target = vec![re(0.0); dim];
    for (p, v) in psi.iter().enumerate() {
        target[p * b.dim()] = *v;
    }
    let (i, _) = sp.best_overlap(&target).expect("vectors requested");
    let vecs = sp.vectors.as_ref().expect("vectors requested");
    let edge = (0..sp.values.len()).map(|k| truncation_edge_weight(&column(vecs, k), &b)).collect();
    Ok(Some(OracleLevel { value: sp.values[i], values: sp.values.clone(), edge }))
}

#[derive(Serialize)]
struct GroundStateReport {
    command: &'static str,
    j: usize,
    e_pipeline_re: f64,
    e_pipeline_im: f64,
    e_oracle_re: Option<f64>,
    e_oracle_im: Option<f64>,
    discrepancy: Option<f64>,
    tol: f64,
    pass: bool,
    iterations: usize,
    residual: f64,
    rho: f64,
}

pub fn ground_state(c: &Common) -> Result<(), CliError> {
    let cfg = load(c)?;
    let h = cfg.hamiltonian()?;
    let j = cfg.solver.j;
    let sc = solver(&cfg, c);
    let r = solve_phi(&h, j, &sc)?;
    let tol = c.tol.unwrap_or(1e-5);
    let oracle = oracle_level(&h, cfg.modes.n_max, j, true)?;
    let disc = oracle.as_ref().map(|o| (o.value - r.e).norm());
    let pass = disc.map_or(true, |d| d <= tol);
    let seq = first_decimation(&h, &WickConfig { l_max: sc.l_max, max_mn: sc.max_mn, ..WickConfig::new(h.particle.eigenvalue(j), r.rho, j) })?;
    write_kernels(&c.out, "first_decimation", &seq)?;
    let rep = GroundStateReport {
        command: "ground-state",
        j,
        e_pipeline_re: r.e.re,
        e_pipeline_im: r.e.im,
        e_oracle_re: oracle.as_ref().map(|o| o.value.re),
        e_oracle_im: oracle.as_ref().map(|o| o.value.im),
        discrepancy: disc,
        tol,
        pass,
        iterations: r.iterations,
        residual: r.residual,
        rho: r.rho,
    };
    write_json(&c.out, "results.json", &rep)?;
    println!(
        "{} e_pipeline = {:.12} e_oracle = {} discrepancy = {}",
        if pass { "PASS" } else { "FAIL" },
        r.e,
        oracle.as_ref().map_or("n/a".into(), |o| format!("{:.12}", o.value)),
        disc.map_or("n/a".into(), |d| format!("{d:.3e}")),
    );
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed(format!("discrepancy above {tol:e}")))
    }
}

#[derive(Serialize)]
struct ThetaRow {
    theta_re: f64,
    theta_im: f64,
    e_re: f64,
    e_im: f64,
    residual: f64,
    iterations: usize,
    rho: f64,
    oracle_re: Option<f64>,
    oracle_im: Option<f64>,
    cone_ok: Option<bool>,
}

#[derive(Serialize)]
struct ResonanceReport {
    command: &'static str,
    j: usize,
    e_re: f64,
    e_im: f64,
    residual: f64,
    iterations: usize,
    rho: f64,
    theta: [f64; 2],
    /// `γ_j`; the predicted `Im e_j` is `−g² γ_j`.
    fgr_gamma: f64,
    fgr_im: f64,
    cone_ok: Option<bool>,
    theta_spread: f64,
    tol: f64,
    pass: bool,
    per_theta: Vec<ThetaRow>,
}

pub fn resonance(c: &Common) -> Result<(), CliError> {
    let cfg = load(c)?;
    let j = cfg.solver.j;
    let thetas: Vec<C64> = if c.theta.is_empty() {
        vec![cfg.theta()]
    } else {
        c.theta.iter().map(|&(a, b)| C64::new(a, b)).collect()
    };
    let sc = solver(&cfg, c);
    let h0 = cfg.hamiltonian()?;
    let gamma = fgr_width(&h0, j)?;
    let g = h0.g();
    let mut rows = vec![];
    for &th in &thetas {
        let h = cfg.deformed(th)?;
        let r = solve_phi(&h, j, &sc)?;
        let oracle = oracle_level(&h, cfg.modes.n_max, j, false)?;
        let cone = match &oracle {
            Some(o) => {
                let region = gap_and_region(&h.normalized()?.particle, j)?;
                // states at the occupation cutoff miss the level shift and are set aside
                let inside: Vec<C64> = o
                    .values
                    .iter()
                    .zip(&o.edge)
                    .filter(|(z, &w)| w <= 0.5 && region.contains(**z / h.field_factor))
                    .map(|(z, _)| *z)
                    .collect();
                Some(cone_check(&inside, o.value, th, 1e-10))
            }
            None => None,
        };
        rows.push(ThetaRow {
            theta_re: th.re,
            theta_im: th.im,
            e_re: r.e.re,
            e_im: r.e.im,
            residual: r.residual,
            iterations: r.iterations,
            rho: r.rho,
            oracle_re: oracle.as_ref().map(|o| o.value.re),
            oracle_im: oracle.as_ref().map(|o| o.value.im),
            cone_ok: cone,
        });
    }
    let es: Vec<C64> = rows.iter().map(|r| C64::new(r.e_re, r.e_im)).collect();
    let mut spread = 0.0f64;
    for a in &es {
        for b in &es {
            spread = spread.max((a - b).norm());
        }
    }
    let tol = c.tol.unwrap_or(1e-4);
    let cone_ok = rows.iter().try_fold(true, |acc, r| r.cone_ok.map(|x| acc && x));
    let pass = spread <= tol && cone_ok.unwrap_or(true);
    let first = &rows[0];
    for r in &rows {
        println!(
            "θ = {}{:+}i: e = {:.10}{:+.6e}i (oracle {}), cone {}",
            r.theta_re,
            r.theta_im,
            r.e_re,
            r.e_im,
            r.oracle_re.map_or("n/a".into(), |x| format!("{x:.10}{:+.6e}i", r.oracle_im.unwrap_or(0.0))),
            r.cone_ok.map_or("n/a", |x| if x { "ok" } else { "violated" }),
        );
    }
    println!("{} θ spread {spread:.2e}, golden rule Im e = {:.6e}", if pass { "PASS" } else { "FAIL" }, -g * g * gamma);
    let rep = ResonanceReport {
        command: "resonance",
        j,
        e_re: first.e_re,
        e_im: first.e_im,
        residual: first.residual,
        iterations: first.iterations,
        rho: first.rho,
        theta: [first.theta_re, first.theta_im],
        fgr_gamma: gamma,
        fgr_im: -g * g * gamma,
        cone_ok,
        theta_spread: spread,
        tol,
        pass,
        per_theta: rows,
    };
    write_json(&c.out, "results.json", &rep)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed("θ spread or cone check failed".into()))
    }
}

#[derive(Serialize)]
struct FlowReport {
    command: &'static str,
    j: usize,
    rho: f64,
    steps: usize,
    completed: usize,
    diverged: Option<String>,
}

pub fn flow(c: &Common) -> Result<(), CliError> {
    let cfg = load(c)?;
    let h = cfg.hamiltonian()?.normalized()?;
    let j = cfg.solver.j;
    let rho = c.rho.or(cfg.solver.rho).unwrap_or(0.25);
    let wc = WickConfig {
        l_max: cfg.solver.l_max,
        max_mn: cfg.solver.max_mn,
        ..WickConfig::new(h.particle.eigenvalue(j), rho, j)
    };
    let fc = FlowConfig { rho, steps: cfg.solver.flow_steps, l_max: cfg.solver.flow_l_max, ..FlowConfig::default() };
    let seq = match first_decimation(&h, &wc) {
        Ok(s) => s.stable_part(),
        Err(e @ Error::NeumannDivergence { .. }) => {
            // no kernels to flow; still leave an (empty) trace behind
            write_trace(&c.out, &FlowTrace::default())?;
            let d = format!("first decimation: {e}");
            let rep = FlowReport { command: "flow", j, rho, steps: fc.steps, completed: 0, diverged: Some(d.clone()) };
            write_json(&c.out, "results.json", &rep)?;
            return Err(CliError::Failed(d));
        }
        Err(e) => return Err(e.into()),
    };
    write_kernels(&c.out, "step_0", &seq)?;
    let (trace, diverged) = match spectral_rg::rg::flow(&seq, &fc) {
        Ok(r) => {
            write_kernels(&c.out, &format!("step_{}", r.trace.steps()), &r.seq)?;
            (r.trace, None)
        }
        Err(Error::FlowDivergence { step, reason, trace }) => (*trace, Some(format!("step {step}: {reason}"))),
        Err(e) => return Err(e.into()),
    };
    write_trace(&c.out, &trace)?;
    for r in &trace.rows {
        println!("step {} γ = {:.6e} ratio {:.4} w00(0) = {:.6e}{:+.6e}i", r.step, r.gamma, r.ratio, r.w00_at_0_re, r.w00_at_0_im);
    }
    let rep = FlowReport {
        command: "flow",
        j,
        rho,
        steps: fc.steps,
        completed: trace.steps(),
        diverged: diverged.clone(),
    };
    write_json(&c.out, "results.json", &rep)?;
    match diverged {
        None => Ok(()),
        Some(d) => Err(CliError::Failed(format!("flow left the polydisc at {d}"))),
    }
}
