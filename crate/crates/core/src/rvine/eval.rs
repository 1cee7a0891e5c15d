//! Matrix recursions for the log-likelihood, the Rosenblatt transform and its inverse.
//!
//! All recursions run over the normalized structure and are vectorized across
//! observations: for every pair the whole column of arguments is processed at once.
//! Cell `(r, c)` of the work matrices holds `n` values.

use nalgebra::DMatrix;

use super::matrix::RVineMatrix;
use super::spec::RVineSpec;
use crate::data::SampleMatrix;
use crate::error::{Error, Result};
use crate::pair::{Family, PairCopula, UMAX, UMIN};

/// `ln(1e-300)`: floor applied to every pair log density.
pub const LN_DENSITY_FLOOR: f64 = -690.775_527_898_213_7;

/// One pair evaluation: cell `(r, c)` reads its second argument from column `cj`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Step {
    pub r: usize,
    pub c: usize,
    pub cj: usize,
    pub direct: bool,
}

/// Precomputed traversal of a structure matrix.
#[derive(Clone, Debug)]
pub(crate) struct Plan {
    pub d: usize,
    /// Data column of the variable on normalized diagonal cell `c`.
    pub var_col: Vec<usize>,
    pub steps: Vec<Step>,
    /// For every step: itself and all steps consuming its outputs, ascending.
    pub desc: Vec<Vec<usize>>,
    pub step_of_cell: Vec<usize>,
    labels: Vec<String>,
}

impl Plan {
    pub fn new(m: &RVineMatrix) -> Plan {
        let d = m.dim();
        let norm = m.normalized();
        let mt = m.max_matrix();
        let var_col = (0..d).map(|c| m.get(c, c) - 1).collect();
        let mut steps = Vec::with_capacity(d * (d - 1) / 2);
        let mut step_of_cell = vec![usize::MAX; d * d];
        let mut labels = Vec::new();
        for c in (0..d - 1).rev() {
            for r in (c + 1..d).rev() {
                let mx = mt[r][c];
                step_of_cell[r * d + c] = steps.len();
                steps.push(Step { r, c, cj: d - mx, direct: mx == norm[r][c] });
                labels.push(format!("tree {}, edge {}", m.tree_of(r), m.edge_label(r, c)));
            }
        }
        let mut children = vec![Vec::new(); steps.len()];
        for (i, s) in steps.iter().enumerate() {
            if s.r + 1 < d {
                children[step_of_cell[(s.r + 1) * d + s.c]].push(i);
                children[step_of_cell[(s.r + 1) * d + s.cj]].push(i);
            }
        }
        let mut desc: Vec<Vec<usize>> = vec![Vec::new(); steps.len()];
        for i in (0..steps.len()).rev() {
            let mut all = vec![i];
            for &ch in &children[i] {
                all.extend_from_slice(&desc[ch]);
            }
            all.sort_unstable();
            all.dedup();
            desc[i] = all;
        }
        Plan { d, var_col, steps, desc, step_of_cell, labels }
    }
}

/// Work matrices `V^direct`, `V^indirect` and the pair log densities.
#[derive(Clone, Debug)]
pub(crate) struct Workspace {
    pub n: usize,
    pub vd: Vec<f64>,
    pub vi: Vec<f64>,
    pub lc: Vec<f64>,
}

impl Workspace {
    pub fn new(d: usize, n: usize) -> Self {
        Workspace { n, vd: vec![0.0; d * d * n], vi: vec![0.0; d * d * n], lc: vec![0.0; d * d * n] }
    }

    pub(crate) fn load(&mut self, plan: &Plan, data: &SampleMatrix) {
        let (d, n) = (plan.d, self.n);
        for c in 0..d {
            let cell = ((d - 1) * d + c) * n;
            let col = data.column(plan.var_col[c]);
            for (dst, &x) in self.vd[cell..cell + n].iter_mut().zip(col) {
                *dst = x.clamp(UMIN, UMAX);
            }
            let (vd, vi) = (&self.vd, &mut self.vi);
            vi[cell..cell + n].copy_from_slice(&vd[cell..cell + n]);
        }
    }
}

/// Evaluate one step, writing `h(z1|z2)` and `h(z2|z1)` one row up. Returns the
/// number of floored densities.
pub(crate) fn run_step(plan: &Plan, si: usize, pair: &PairCopula, ws: &mut Workspace) -> Result<usize> {
    let s = plan.steps[si];
    let (d, n) = (plan.d, ws.n);
    let w = (s.r - 1) * d + s.c;
    let a = s.r * d + s.c;
    let b = s.r * d + s.cj;
    let off = (w + 1) * n;
    let Workspace { vd, vi, lc, .. } = ws;
    let (vd_lo, vd_hi) = vd.split_at_mut(off);
    let (vi_lo, vi_hi) = vi.split_at_mut(off);
    let z1 = &vd_hi[a * n - off..a * n - off + n];
    let z2 = if s.direct { &vd_hi[b * n - off..b * n - off + n] } else { &vi_hi[b * n - off..b * n - off + n] };
    let od = &mut vd_lo[w * n..];
    let oi = &mut vi_lo[w * n..];
    let l = &mut lc[a * n..a * n + n];
    if pair.family() == Family::Independence {
        l.fill(0.0);
        od.copy_from_slice(z1);
        oi.copy_from_slice(z2);
        return Ok(0);
    }
    let mut floored = 0;
    for t in 0..n {
        let (mut x, h1, h2) = pair.eval(z1[t], z2[t]);
        if !(x >= LN_DENSITY_FLOOR) {
            if x.is_nan() {
                return Err(Error::numerical(format!(
                    "pair density is not a number at {} ({pair})",
                    plan.labels[si]
                )));
            }
            x = LN_DENSITY_FLOOR;
            floored += 1;
        } else if x == f64::INFINITY {
            return Err(Error::numerical(format!("pair density overflow at {} ({pair})", plan.labels[si])));
        }
        l[t] = x;
        od[t] = h1.clamp(UMIN, UMAX);
        oi[t] = h2.clamp(UMIN, UMAX);
    }
    Ok(floored)
}

/// Forward recursion over all pairs.
pub(crate) fn forward(plan: &Plan, pairs: &[PairCopula], data: &SampleMatrix, ws: &mut Workspace) -> Result<usize> {
    ws.load(plan, data);
    let mut floored = 0;
    for (si, s) in plan.steps.iter().enumerate() {
        floored += run_step(plan, si, &pairs[s.r * plan.d + s.c], ws)?;
    }
    Ok(floored)
}

/// Sum of pair log densities per observation.
pub(crate) fn per_obs(plan: &Plan, ws: &Workspace) -> Vec<f64> {
    let (d, n) = (plan.d, ws.n);
    let mut out = vec![0.0; n];
    for s in &plan.steps {
        let a = (s.r * d + s.c) * n;
        for (o, &x) in out.iter_mut().zip(&ws.lc[a..a + n]) {
            *o += x;
        }
    }
    out
}

/// Log-likelihood of a model on a sample, kept alive for cheap re-evaluation
/// after changing a few parameters.
pub struct VineEvaluator<'a> {
    plan: Plan,
    data: &'a SampleMatrix,
    pairs: Vec<PairCopula>,
    index: Vec<(usize, usize)>,
    base: Workspace,
    scratch: Workspace,
    per_obs: Vec<f64>,
    floored: usize,
}

impl<'a> VineEvaluator<'a> {
    pub fn new(spec: &RVineSpec, data: &'a SampleMatrix) -> Result<Self> {
        check_dims(spec, data)?;
        let plan = Plan::new(spec.matrix());
        let mut base = Workspace::new(plan.d, data.nrows());
        let floored = forward(&plan, spec.pairs(), data, &mut base)?;
        let per_obs = per_obs(&plan, &base);
        let scratch = base.clone();
        Ok(VineEvaluator {
            plan,
            data,
            pairs: spec.pairs().to_vec(),
            index: spec.param_index().to_vec(),
            base,
            scratch,
            per_obs,
            floored,
        })
    }

    pub fn per_obs(&self) -> &[f64] {
        &self.per_obs
    }

    /// Total log-likelihood; independent of the row order.
    pub fn total(&self) -> f64 {
        crate::special::order_free_sum(self.per_obs.iter().copied())
    }

    /// Pair densities floored at `1e-300` during the base evaluation.
    pub fn floored(&self) -> usize {
        self.floored
    }

    pub fn nparams(&self) -> usize {
        self.index.len()
    }

    pub fn nobs(&self) -> usize {
        self.data.nrows()
    }

    /// Per-observation change of the log-likelihood when parameters `changes[k].0`
    /// take values `changes[k].1`. Only the affected pairs are re-evaluated.
    pub fn delta(&mut self, changes: &[(usize, f64)], out: &mut [f64]) -> Result<()> {
        let d = self.plan.d;
        let n = self.base.n;
        let mut local: Vec<(usize, PairCopula)> = Vec::with_capacity(changes.len());
        for &(j, x) in changes {
            let (cell, k) = self.index[j];
            let pos = local.iter().position(|(c, _)| *c == cell);
            let pc = match pos {
                Some(p) => &mut local[p].1,
                None => {
                    local.push((cell, self.pairs[cell]));
                    &mut local.last_mut().expect("just pushed").1
                }
            };
            let mut theta = [0.0; 2];
            theta[..pc.nparams()].copy_from_slice(pc.params());
            theta[k] = x;
            if !PairCopula::params_valid(pc.family(), &theta[..pc.nparams()]) {
                return Err(Error::numerical(format!(
                    "perturbed parameters {:?} leave the {} domain",
                    &theta[..pc.nparams()],
                    pc.family()
                )));
            }
            *pc = pc.with_params_unchecked(&theta[..pc.nparams()]);
        }
        let mut dirty = vec![false; self.plan.steps.len()];
        for (cell, _) in &local {
            for &s in &self.plan.desc[self.plan.step_of_cell[*cell]] {
                dirty[s] = true;
            }
        }
        out.fill(0.0);
        let mut result = Ok(());
        for si in (0..dirty.len()).filter(|&s| dirty[s]) {
            let s = self.plan.steps[si];
            let cell = s.r * d + s.c;
            let pair = local.iter().find(|(c, _)| *c == cell).map_or(self.pairs[cell], |x| x.1);
            if let Err(e) = run_step(&self.plan, si, &pair, &mut self.scratch) {
                result = Err(e);
                break;
            }
            let a = cell * n;
            for t in 0..n {
                out[t] += self.scratch.lc[a + t] - self.base.lc[a + t];
            }
        }
        for si in (0..dirty.len()).filter(|&s| dirty[s]) {
            let s = self.plan.steps[si];
            let w = ((s.r - 1) * d + s.c) * n;
            let a = (s.r * d + s.c) * n;
            self.scratch.vd[w..w + n].copy_from_slice(&self.base.vd[w..w + n]);
            self.scratch.vi[w..w + n].copy_from_slice(&self.base.vi[w..w + n]);
            self.scratch.lc[a..a + n].copy_from_slice(&self.base.lc[a..a + n]);
        }
        result
    }

    /// Rosenblatt transform of the data, columns in data order.
    pub fn pit(&self) -> DMatrix<f64> {
        let (d, n) = (self.plan.d, self.base.n);
        let mut y = DMatrix::zeros(n, d);
        for c in 0..d {
            let cell = (c * d + c) * n;
            let j = self.plan.var_col[c];
            for t in 0..n {
                y[(t, j)] = self.base.vd[cell + t].clamp(UMIN, UMAX);
            }
        }
        y
    }
}

pub(crate) fn check_dims(spec: &RVineSpec, data: &SampleMatrix) -> Result<()> {
    if spec.dim() != data.ncols() {
        return Err(Error::Format(format!(
            "data has {} columns but the model has dimension {}",
            data.ncols(),
            spec.dim()
        )));
    }
    Ok(())
}

/// Inverse Rosenblatt transform: maps independent uniforms `w` (data column order)
/// to a sample from the model.
pub(crate) fn inverse(spec: &RVineSpec, w: &SampleMatrix) -> Result<DMatrix<f64>> {
    check_dims(spec, w)?;
    let plan = Plan::new(spec.matrix());
    let (d, n) = (plan.d, w.nrows());
    let pairs = spec.pairs();
    let mut vd = vec![0.0; d * d * n];
    let mut vi = vec![0.0; d * d * n];
    let at = |r: usize, c: usize| (r * d + c) * n;
    for c in (0..d).rev() {
        let col = w.column(plan.var_col[c]);
        let diag = at(c, c);
        for t in 0..n {
            vd[diag + t] = col[t].clamp(UMIN, UMAX);
        }
        // steps of column c, top tree first
        let col_steps: Vec<Step> = plan.steps.iter().copied().filter(|s| s.c == c).collect();
        for s in col_steps.iter().rev() {
            let pair = &pairs[s.r * d + s.c];
            let (src, dst, z) = (at(s.r - 1, c), at(s.r, c), at(s.r, s.cj));
            let zsrc = if s.direct { &vd } else { &vi };
            let zcol: Vec<f64> = zsrc[z..z + n].to_vec();
            for t in 0..n {
                vd[dst + t] = pair.hinv_clamped(vd[src + t], zcol[t])?;
            }
        }
        let bottom = at(d - 1, c);
        let tmp: Vec<f64> = vd[bottom..bottom + n].to_vec();
        vi[bottom..bottom + n].copy_from_slice(&tmp);
        for s in &col_steps {
            let pair = &pairs[s.r * d + s.c];
            let (a, out, z) = (at(s.r, c), at(s.r - 1, c), at(s.r, s.cj));
            for t in 0..n {
                let z2 = if s.direct { vd[z + t] } else { vi[z + t] };
                let (_, _, h21) = pair.eval(vd[a + t], z2);
                vi[out + t] = h21.clamp(UMIN, UMAX);
            }
        }
    }
    let mut u = DMatrix::zeros(n, d);
    for c in 0..d {
        let bottom = at(d - 1, c);
        let j = plan.var_col[c];
        for t in 0..n {
            u[(t, j)] = vd[bottom + t];
        }
    }
    Ok(u)
}

/// Arguments `(z1, z2)` fed to the pair of step `si` after a forward pass.
pub(crate) fn pair_args(plan: &Plan, ws: &Workspace, si: usize) -> (Vec<f64>, Vec<f64>) {
    let s = plan.steps[si];
    let (d, n) = (plan.d, ws.n);
    let a = (s.r * d + s.c) * n;
    let b = (s.r * d + s.cj) * n;
    let src = if s.direct { &ws.vd } else { &ws.vi };
    (ws.vd[a..a + n].to_vec(), src[b..b + n].to_vec())
}
