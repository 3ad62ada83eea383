//! Wick-ordered recombination of a Neumann chain
//! `F_0 W F_1 W ⋯ W F_L` into normal-ordered kernels.
//!
//! Everything here works in the units of the Hamiltonian being decimated.
//! External momenta of the output live on `ρ · out_k`; internal lines run
//! over the full input mode set with line weight `w_i / k_i`. Vertices are
//! processed right to left: a vertex first closes `q` open lines (all
//! injective pairings), then opens `p` new ones (independent mode sums).

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::Result;
use crate::interp::{hermite_eval, pchip_slopes};
use crate::kernels::{smooth_cutoff_chi1, symmetrize, tuple_of, Kernel, XI};
use crate::linalg::OperatorMatrix;
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Output point budget for kernels above the storage order.
const DISCARD_BUDGET: usize = 200_000;

pub(crate) enum VertexKind {
    /// `Π_legs leg[axis] · M` with an r-independent particle matrix.
    Matrix { leg: Vec<C64>, matrix: OperatorMatrix },
    /// Scalar kernel tabulated over the axis table, cubic in r, with
    /// `χ_1` applied on both sides of the vertex.
    Table { r: Vec<f64>, y: Vec<Vec<C64>>, d: Vec<Vec<C64>> },
}

pub(crate) struct Vertex {
    pub a: usize,
    pub b: usize,
    pub kind: VertexKind,
}

impl Vertex {
    /// Build a table vertex from samples `values[ri * n_tuples + flat]`.
    pub fn table(a: usize, b: usize, r: Vec<f64>, values: &[C64]) -> Self {
        let nr = r.len();
        let nt = values.len() / nr;
        let mut y = Vec::with_capacity(nt);
        let mut d = Vec::with_capacity(nt);
        for flat in 0..nt {
            let f: Vec<C64> = (0..nr).map(|ri| values[ri * nt + flat]).collect();
            d.push(complex_slopes(&r, &f));
            y.push(f);
        }
        Vertex { a, b, kind: VertexKind::Table { r, y, d } }
    }
}

pub(crate) enum Resolvent {
    /// `π̄²_i(E) / (λ_i + E − λ)` in the particle eigenbasis; `π̄²` is
    /// `1 − χ_ρ(E)²` on level `j` and 1 elsewhere.
    Particle { levels: Vec<C64>, lambda: C64, j: usize, rho: f64 },
    /// `(1 − χ_ρ(E)²) / w_{0,0}(E)`.
    Field { r: Vec<f64>, y: Vec<C64>, d: Vec<C64>, rho: f64 },
}

impl Resolvent {
    fn apply(&self, e: f64, v: &mut [C64]) {
        match self {
            Resolvent::Particle { levels, lambda, j, rho } => {
                let c = smooth_cutoff_chi1(e / rho);
                for (i, x) in v.iter_mut().enumerate() {
                    let pb = if i == *j { 1.0 - c * c } else { 1.0 };
                    *x = if pb == 0.0 { ZERO } else { *x * pb / (levels[i] + e - lambda) };
                }
            }
            Resolvent::Field { r, y, d, rho } => {
                let c = smooth_cutoff_chi1(e / rho);
                let pb = 1.0 - c * c;
                if pb == 0.0 {
                    v[0] = ZERO;
                } else {
                    v[0] *= pb / hermite_eval(r, y, d, e);
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Slot {
    v: usize,
    m: usize,
    p: usize,
    n: usize,
    q: usize,
}

#[derive(Clone, Debug)]
struct Composition {
    slots: Vec<Slot>,
    weight: f64,
}

pub(crate) fn complex_slopes(x: &[f64], y: &[C64]) -> Vec<C64> {
    let re: Vec<f64> = y.iter().map(|z| z.re).collect();
    let im: Vec<f64> = y.iter().map(|z| z.im).collect();
    let (dr, di) = (pchip_slopes(x, &re), pchip_slopes(x, &im));
    dr.iter().zip(&di).map(|(&p, &q)| C64::new(p, q)).collect()
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) struct WickEngine {
    pub int_k: Vec<f64>,
    pub int_lw: Vec<f64>,
    /// Output grid in rescaled units.
    pub out_k: Vec<f64>,
    pub rho: f64,
    pub d: usize,
    pub j: usize,
    pub vertices: Vec<Vertex>,
    pub resolvent: Resolvent,
    pub l_max: usize,
    pub mu: f64,
}

pub(crate) struct WickOutput {
    /// Rescaled, symmetrized kernels with `1 ≤ M + N ≤ max_mn`.
    pub kernels: Vec<Kernel>,
    /// `Σ_{L ≥ 2}` chain values at the `(0,0)` grid points, original units,
    /// before the `χ_1(r)²` factor.
    pub vacuum: Vec<C64>,
    /// `Σ ξ^{-(M+N)} ‖ŵ_{M,N}‖_{μ,1}` over orders above `max_mn`.
    pub discarded: f64,
}

impl WickEngine {
    pub fn axis_k(&self, ax: usize) -> f64 {
        let ni = self.int_k.len();
        if ax < ni {
            self.int_k[ax]
        } else {
            self.rho * self.out_k[ax - ni]
        }
    }

    pub fn n_axes(&self) -> usize {
        self.int_k.len() + self.out_k.len()
    }

    fn compositions(&self) -> BTreeMap<(usize, usize), Vec<Composition>> {
        let mut out: BTreeMap<(usize, usize), Vec<Composition>> = BTreeMap::new();
        let mut options = vec![];
        for (vi, v) in self.vertices.iter().enumerate() {
            for m in 0..=v.a {
                for n in 0..=v.b {
                    options.push(Slot { v: vi, m, p: v.a - m, n, q: v.b - n });
                }
            }
        }
        for l in 1..=self.l_max {
            let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
            let mut cur = vec![];
            enumerate(&options, l, &mut cur, &mut |slots| {
                // right to left: lines must be opened before they are closed
                let mut open = 0usize;
                for s in slots.iter().rev() {
                    if s.q > open {
                        return;
                    }
                    open = open - s.q + s.p;
                }
                if open != 0 {
                    return;
                }
                let mm: usize = slots.iter().map(|s| s.m).sum();
                let nn: usize = slots.iter().map(|s| s.n).sum();
                let w: f64 = slots
                    .iter()
                    .map(|s| binom(s.m + s.p, s.p) * binom(s.n + s.q, s.q))
                    .product();
                out.entry((mm, nn))
                    .or_default()
                    .push(Composition { slots: slots.to_vec(), weight: sign * w });
            });
        }
        out
    }

    /// Chain value `V(r; K)` in original units for one composition.
    /// `cre` and `ann` are axis indices of the external arguments.
    fn chain(&self, comp: &Composition, r: f64, cre: &[usize], ann: &[usize]) -> C64 {
        let l = comp.slots.len();
        let mut sc = vec![0.0; l];
        let mut sa = vec![0.0; l];
        let mut oc = vec![0usize; l];
        let mut oa = vec![0usize; l];
        let (mut pc, mut pa) = (0, 0);
        for (i, s) in comp.slots.iter().enumerate() {
            oc[i] = pc;
            oa[i] = pa;
            sc[i] = cre[pc..pc + s.m].iter().map(|&a| self.axis_k(a)).sum();
            sa[i] = ann[pa..pa + s.n].iter().map(|&a| self.axis_k(a)).sum();
            pc += s.m;
            pa += s.n;
        }
        // r_tilde[i]: external energy between vertex i and i+1 (0-based
        // vertex i sits between positions i and i+1)
        let mut r_tilde = vec![0.0; l + 1];
        for pos in 0..=l {
            let left: f64 = sa[..pos].iter().sum();
            let right: f64 = sc[pos..].iter().sum();
            r_tilde[pos] = left + right;
        }
        let ctx = ChainCtx { comp, r, cre, ann, sc: &sc, sa: &sa, oc: &oc, oa: &oa, r_tilde: &r_tilde };
        let mut v = vec![ZERO; self.d];
        v[self.j] = C64::new(1.0, 0.0);
        let mut open = Vec::with_capacity(2 * l);
        self.dfs(&ctx, l, &mut open, v)
    }

    fn dfs(&self, ctx: &ChainCtx, l: usize, open: &mut Vec<usize>, mut v: Vec<C64>) -> C64 {
        if l == 0 {
            return if open.is_empty() { v[self.j] } else { ZERO };
        }
        let total = ctx.comp.slots.len();
        let s = ctx.comp.slots[l - 1];
        let open_e: f64 = open.iter().map(|&a| self.int_k[a]).sum();
        if l < total {
            self.resolvent.apply(ctx.r + ctx.r_tilde[l] + open_e, &mut v);
            if v.iter().all(|z| *z == ZERO) {
                return ZERO;
            }
        }
        let vert = &self.vertices[s.v];
        let n_open = open.len();
        let mut acc = ZERO;
        let mut args = Vec::with_capacity(vert.a + vert.b);
        let mut chosen = vec![false; n_open];
        let mut closed = Vec::with_capacity(s.q);
        self.close_lines(ctx, l, s, open, &mut chosen, &mut closed, &v, &mut args, &mut acc);
        acc
    }

    #[allow(clippy::too_many_arguments)]
    fn close_lines(
        &self,
        ctx: &ChainCtx,
        l: usize,
        s: Slot,
        open: &mut Vec<usize>,
        chosen: &mut Vec<bool>,
        closed: &mut Vec<usize>,
        v: &[C64],
        args: &mut Vec<usize>,
        acc: &mut C64,
    ) {
        if closed.len() < s.q {
            for i in 0..open.len() {
                if chosen[i] {
                    continue;
                }
                chosen[i] = true;
                closed.push(open[i]);
                self.close_lines(ctx, l, s, open, chosen, closed, v, args, acc);
                closed.pop();
                chosen[i] = false;
            }
            return;
        }
        let remaining: Vec<usize> = open.iter().zip(chosen.iter()).filter(|(_, &c)| !c).map(|(&a, _)| a).collect();
        let lines: f64 = closed.iter().map(|&a| self.int_lw[a]).product();
        let e_mid = ctx.r + ctx.r_tilde[l - 1] - ctx.sc[l - 1] + remaining.iter().map(|&a| self.int_k[a]).sum::<f64>();
        let e_closed: f64 = closed.iter().map(|&a| self.int_k[a]).sum();
        let mut new = Vec::with_capacity(s.p);
        self.open_lines(ctx, l, s, &remaining, closed, e_mid, e_closed, lines, v, args, &mut new, acc);
    }

    #[allow(clippy::too_many_arguments)]
    fn open_lines(
        &self,
        ctx: &ChainCtx,
        l: usize,
        s: Slot,
        remaining: &[usize],
        closed: &[usize],
        e_mid: f64,
        e_closed: f64,
        lines: f64,
        v: &[C64],
        args: &mut Vec<usize>,
        new: &mut Vec<usize>,
        acc: &mut C64,
    ) {
        if new.len() < s.p {
            for i in 0..self.int_k.len() {
                new.push(i);
                self.open_lines(ctx, l, s, remaining, closed, e_mid, e_closed, lines, v, args, new, acc);
                new.pop();
            }
            return;
        }
        let i = l - 1;
        args.clear();
        args.extend_from_slice(&ctx.cre[ctx.oc[i]..ctx.oc[i] + s.m]);
        args.extend_from_slice(new);
        args.extend_from_slice(&ctx.ann[ctx.oa[i]..ctx.oa[i] + s.n]);
        args.extend_from_slice(closed);
        let e_new: f64 = new.iter().map(|&a| self.int_k[a]).sum();
        let e_left = e_mid + ctx.sc[i] + e_new;
        let e_right = e_mid + ctx.sa[i] + e_closed;
        let vert = &self.vertices[s.v];
        let out = match &vert.kind {
            VertexKind::Matrix { leg, matrix } => {
                let c: C64 = args.iter().map(|&a| leg[a]).product::<C64>() * lines;
                if c == ZERO {
                    return;
                }
                let mut w = vec![ZERO; self.d];
                for (row, wr) in w.iter_mut().enumerate() {
                    for (col, &x) in v.iter().enumerate() {
                        if x != ZERO {
                            *wr += matrix.get(row, col) * x;
                        }
                    }
                    *wr *= c;
                }
                w
            }
            VertexKind::Table { r, y, d } => {
                let chi = smooth_cutoff_chi1(e_left) * smooth_cutoff_chi1(e_right);
                if chi == 0.0 {
                    return;
                }
                let n_ax = self.n_axes();
                let flat = args.iter().fold(0, |acc, &a| acc * n_ax + a);
                let val = hermite_eval(r, &y[flat], &d[flat], e_mid) * (chi * lines);
                vec![v[0] * val]
            }
        };
        if out.iter().all(|z| *z == ZERO) {
            return;
        }
        let mut next: Vec<usize> = remaining.to_vec();
        next.extend_from_slice(new);
        *acc += self.dfs(ctx, l - 1, &mut next, out);
    }

    fn point_value(&self, comps: &[Composition], r: f64, cre: &[usize], ann: &[usize]) -> C64 {
        comps.iter().map(|c| self.chain(c, r, cre, ann) * c.weight).sum()
    }

    fn ext_axes(&self, m: usize, n: usize, flat: usize) -> (Vec<usize>, Vec<usize>) {
        let ni = self.int_k.len();
        let t = tuple_of(self.out_k.len(), m + n, flat);
        (t[..m].iter().map(|&i| ni + i).collect(), t[m..].iter().map(|&i| ni + i).collect())
    }

    /// Evaluate every order. `r_grid` holds rescaled energies for `M + N ≥ 1`
    /// and `r00` those of the `(0,0)` kernel.
    pub fn run(&self, r_grid: &[f64], r00: &[f64], max_mn: usize) -> Result<WickOutput> {
        let comps = self.compositions();
        let rho = self.rho;
        let nk = self.out_k.len();
        // vacuum part: L ≥ 2 chains with no external legs
        let vac_comps: Vec<Composition> = comps
            .get(&(0, 0))
            .map(|v| v.iter().filter(|c| c.slots.len() >= 2).cloned().collect())
            .unwrap_or_default();
        let vacuum: Vec<C64> = r00
            .par_iter()
            .map(|&r| {
                if smooth_cutoff_chi1(r) == 0.0 || vac_comps.is_empty() {
                    ZERO
                } else {
                    self.point_value(&vac_comps, rho * r, &[], &[])
                }
            })
            .collect();
        let mut kernels = vec![];
        let mut discarded = 0.0;
        for (&(m, n), cs) in &comps {
            let order = m + n;
            if order == 0 || nk == 0 {
                continue;
            }
            let nt = nk.pow(order as u32);
            let pref = rho.powi(order as i32 - 1);
            if order <= max_mn {
                let pts: Vec<(usize, usize)> =
                    (0..r_grid.len()).flat_map(|ri| (0..nt).map(move |f| (ri, f))).collect();
                let vals: Vec<C64> = pts
                    .par_iter()
                    .map(|&(ri, flat)| {
                        let (cre, ann) = self.ext_axes(m, n, flat);
                        self.point_value(cs, rho * r_grid[ri], &cre, &ann) * pref
                    })
                    .collect();
                let k = Kernel::new(m, n, r_grid.to_vec(), self.out_k.clone(), vals)?;
                kernels.push(symmetrize(&k));
            } else {
                let stride = ((nt * r_grid.len()) / DISCARD_BUDGET).max(1);
                let tuples: Vec<usize> = (0..nt).step_by(stride).collect();
                let sup = tuples
                    .par_iter()
                    .map(|&flat| {
                        let (cre, ann) = self.ext_axes(m, n, flat);
                        let fiber: Vec<C64> = r_grid
                            .iter()
                            .map(|&r| self.point_value(cs, rho * r, &cre, &ann) * pref)
                            .collect();
                        let kmin = cre
                            .iter()
                            .chain(&ann)
                            .map(|&a| self.out_k[a - self.int_k.len()])
                            .fold(f64::INFINITY, f64::min);
                        let der = crate::interp::fd_derivative(r_grid, &fiber);
                        let s0 = fiber.iter().map(|z| z.norm()).fold(0.0, f64::max);
                        let s1 = der.iter().map(|z| z.norm()).fold(0.0, f64::max);
                        (s0, s1, kmin.powf(-self.mu))
                    })
                    .collect::<Vec<_>>()
                    .into_iter()
                    .fold((0.0f64, 0.0f64), |(a, b), (s0, s1, w)| (a.max(w * s0), b.max(w * s1)));
                discarded += XI.powi(-(order as i32)) * (sup.0 + sup.1);
            }
        }
        Ok(WickOutput { kernels, vacuum, discarded })
    }
}

struct ChainCtx<'a> {
    comp: &'a Composition,
    r: f64,
    cre: &'a [usize],
    ann: &'a [usize],
    sc: &'a [f64],
    sa: &'a [f64],
    oc: &'a [usize],
    oa: &'a [usize],
    r_tilde: &'a [f64],
}

fn enumerate(options: &[Slot], l: usize, cur: &mut Vec<Slot>, f: &mut impl FnMut(&[Slot])) {
    if cur.len() == l {
        f(cur);
        return;
    }
    for s in options {
        cur.push(*s);
        enumerate(options, l, cur, f);
        cur.pop();
    }
}
