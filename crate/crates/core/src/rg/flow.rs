use crate::error::{Error, Result};
use crate::kernels::{default_r_grid, norm_report, smooth_cutoff_chi1, Kernel, KernelSequence, R_MAX};
use crate::C64;

use super::wick::{complex_slopes, Resolvent, Vertex, WickEngine};
use super::{FlowRow, FlowTrace};

#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig {
    pub rho: f64,
    pub steps: usize,
    pub l_max: usize,
    /// Stop when γ or β exceeds this.
    pub polydisc_limit: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { rho: 0.25, steps: 5, l_max: 3, polydisc_limit: 0.5 }
    }
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub trace: FlowTrace,
    pub seq: KernelSequence,
}

fn w00_data(seq: &KernelSequence) -> Result<(Vec<f64>, Vec<C64>)> {
    let k = seq
        .w00()
        .ok_or_else(|| Error::InvalidKernel("sequence has no w_{0,0}".into()))?;
    Ok((k.r_grid().to_vec(), k.values().to_vec()))
}

/// Size of the Neumann ratio for a field-only decimation at scale ρ.
pub fn flow_neumann_ratio(seq: &KernelSequence, rho: f64) -> Result<f64> {
    let (r, y) = w00_data(seq)?;
    let d = complex_slopes(&r, &y);
    let mut sup = 0.0f64;
    for s in 0..=800 {
        let e = R_MAX * s as f64 / 800.0;
        let c = smooth_cutoff_chi1(e / rho);
        let pb = 1.0 - c * c;
        if pb > 0.0 {
            sup = sup.max(pb / crate::interp::hermite_eval(&r, &y, &d, e).norm());
        }
    }
    let modes = seq.modes();
    let lines: f64 = (0..modes.len()).map(|i| modes.line_weight(i)).sum();
    let coupling: f64 = seq
        .interaction()
        .map(|(&(m, n), k)| k.max_abs() * lines.sqrt().powi((m + n) as i32))
        .sum();
    Ok(coupling * sup)
}

/// One field-only renormalization step `ρ^{-1} S_ρ F_{χ_ρ(H_f)}` on kernels.
pub fn flow_step(seq: &KernelSequence, rho: f64, l_max: usize) -> Result<KernelSequence> {
    if !(rho > 0.0 && rho <= 0.5) {
        return Err(Error::Range(format!("scale {rho} outside (0, 1/2]")));
    }
    let (r00, y00) = w00_data(seq)?;
    let modes = seq.modes().clone();
    let int_k = modes.momenta().to_vec();
    let mut eng = WickEngine {
        int_lw: (0..modes.len()).map(|i| modes.line_weight(i)).collect(),
        out_k: int_k.clone(),
        int_k,
        rho,
        d: 1,
        j: 0,
        vertices: vec![],
        resolvent: Resolvent::Field { d: complex_slopes(&r00, &y00), r: r00.clone(), y: y00.clone(), rho },
        l_max,
        mu: seq.mu,
    };
    let targets: Vec<f64> = (0..eng.n_axes()).map(|a| eng.axis_k(a)).collect();
    for (&(m, n), k) in seq.interaction() {
        let vals = k.resample(k.r_grid(), &targets, seq.mu)?;
        eng.vertices.push(Vertex::table(m, n, k.r_grid().to_vec(), &vals));
    }
    let out = eng.run(&default_r_grid(), &r00, seq.max_mn)?;
    let mut next = KernelSequence::new(modes, seq.mu, seq.max_mn);
    next.xi = seq.xi;
    let w00 = seq.w00().expect("checked above");
    let vals: Vec<C64> = r00
        .iter()
        .zip(&out.vacuum)
        .map(|(&r, &v)| {
            let c = smooth_cutoff_chi1(r);
            (w00.eval_r(rho * r, 0) + v * (c * c)) / rho
        })
        .collect();
    next.insert(Kernel::new(0, 0, r00, vec![], vals)?)?;
    for k in out.kernels {
        next.insert(k)?;
    }
    next.discarded_norm = seq.discarded_norm + out.discarded;
    Ok(next)
}

fn row(step: usize, seq: &KernelSequence, prev_gamma: Option<f64>) -> Result<FlowRow> {
    let rep = norm_report(seq)?;
    let p = rep.params();
    let w0 = seq.w00_at_0();
    let ratio = match prev_gamma {
        Some(g) if g > 0.0 => p.gamma / g,
        _ => 0.0,
    };
    Ok(FlowRow {
        step,
        alpha: p.alpha,
        beta: p.beta,
        gamma: p.gamma,
        w00_at_0_re: w0.re,
        w00_at_0_im: w0.im,
        interaction_norm: rep.interaction,
        discarded_norm: seq.discarded_norm,
        ratio,
    })
}

fn finite(r: &FlowRow) -> bool {
    [r.alpha, r.beta, r.gamma, r.w00_at_0_re, r.w00_at_0_im, r.discarded_norm, r.ratio]
        .iter()
        .all(|x| x.is_finite())
}

/// Iterate [`flow_step`]. Leaving the polydisc (γ or β above the limit,
/// Neumann ratio ≥ 1, non-finite values) ends the run with an error that
/// carries the trace so far.
pub fn flow(seq: &KernelSequence, cfg: &FlowConfig) -> Result<FlowResult> {
    let mut trace = FlowTrace::default();
    trace.rows.push(row(0, seq, None)?);
    let mut cur = seq.clone();
    let diverge = |step: usize, reason: String, trace: &FlowTrace| Error::FlowDivergence {
        step,
        reason,
        trace: Box::new(trace.clone()),
    };
    for step in 1..=cfg.steps {
        let b = flow_neumann_ratio(&cur, cfg.rho)?;
        if !(b < 1.0) {
            return Err(diverge(step, format!("Neumann ratio {b:.3e}"), &trace));
        }
        cur = flow_step(&cur, cfg.rho, cfg.l_max)?;
        let prev = trace.rows.last().map(|r| r.gamma);
        let r = row(step, &cur, prev)?;
        trace.rows.push(r.clone());
        if !finite(&r) {
            return Err(diverge(step, "non-finite kernel data".into(), &trace));
        }
        if r.gamma > cfg.polydisc_limit {
            return Err(diverge(step, format!("γ = {:.3e}", r.gamma), &trace));
        }
        if r.beta > cfg.polydisc_limit {
            return Err(diverge(step, format!("β = {:.3e}", r.beta), &trace));
        }
        if r.gamma > 0.0 && r.discarded_norm > 0.1 * r.gamma {
            log::warn!("step {step}: discarded norm {:.3e} exceeds 10% of γ", r.discarded_norm);
        }
    }
    Ok(FlowResult { trace, seq: cur })
}
