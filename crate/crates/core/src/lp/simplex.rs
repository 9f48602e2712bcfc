//! Bounded-variable revised primal simplex.
//!
//! Rows are `A x + s = b` with one slack `s_i in [0, inf)` per row. The basis
//! inverse is kept dense and updated by eta pivots; refactorization exploits
//! the slack identity block so only the structural part of the basis is
//! inverted. Phase 1 minimizes the sum of basic bound violations, which also
//! makes any starting basis usable (warm starts after bound changes).

use crate::model::{BoundsBox, MipInstance};

use super::LpError;

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 100;
const MAX_REPAIRS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable sitting at zero.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

pub(crate) struct Simplex<'a> {
    inst: &'a MipInstance,
    n: usize,
    m: usize,
    cost: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Column-major `m x m` basis inverse: `binv[c * m + r] = (B^-1)[r][c]`.
    binv: Vec<f64>,
    since_refactor: usize,
    pub(crate) iterations: usize,
    bland: bool,
    degenerate_run: usize,
}

impl<'a> Simplex<'a> {
    /// Slack basis over the instance's own bounds.
    pub(crate) fn new(inst: &'a MipInstance) -> Self {
        let n = inst.num_vars();
        let m = inst.num_rows();
        let mut cost = inst.objective().to_vec();
        cost.resize(n + m, 0.0);
        let mut lo = inst.lower().to_vec();
        let mut up = inst.upper().to_vec();
        lo.resize(n + m, 0.0);
        up.resize(n + m, f64::INFINITY);
        let mut state = vec![VarState::AtLower; n + m];
        let basis: Vec<usize> = (n..n + m).collect();
        for &b in &basis {
            state[b] = VarState::Basic;
        }
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = 1.0;
        }
        let mut s = Self {
            inst,
            n,
            m,
            cost,
            lo,
            up,
            x: vec![0.0; n + m],
            state,
            basis,
            binv,
            since_refactor: 0,
            iterations: 0,
            bland: false,
            degenerate_run: 0,
        };
        for j in 0..n {
            s.place_nonbasic(j);
        }
        s.compute_basic_values();
        s
    }

    /// Replaces the structural bounds and moves nonbasic variables onto them.
    pub(crate) fn set_bounds(&mut self, bounds: &BoundsBox) {
        self.lo[..self.n].copy_from_slice(&bounds.lower);
        self.up[..self.n].copy_from_slice(&bounds.upper);
        for j in 0..self.n {
            if self.state[j] != VarState::Basic {
                self.place_nonbasic(j);
            }
        }
        self.compute_basic_values();
        self.bland = false;
        self.degenerate_run = 0;
    }

    pub(crate) fn states(&self) -> Vec<VarState> {
        self.state.clone()
    }

    /// Installs a basis given by per-variable states and refactorizes.
    pub(crate) fn load_states(&mut self, states: &[VarState]) -> Result<(), LpError> {
        debug_assert_eq!(states.len(), self.n + self.m);
        let basic: Vec<usize> = (0..self.n + self.m)
            .filter(|&j| states[j] == VarState::Basic)
            .collect();
        if basic.len() != self.m {
            return Err(LpError::SingularBasis);
        }
        self.state = states.to_vec();
        self.basis = basic;
        for j in 0..self.n + self.m {
            if self.state[j] != VarState::Basic {
                self.place_nonbasic(j);
            }
        }
        self.refactor()?;
        self.compute_basic_values();
        Ok(())
    }

    fn place_nonbasic(&mut self, j: usize) {
        let (lo, up) = (self.lo[j], self.up[j]);
        let st = match self.state[j] {
            VarState::AtUpper if up.is_finite() => VarState::AtUpper,
            _ if lo.is_finite() => VarState::AtLower,
            _ if up.is_finite() => VarState::AtUpper,
            _ => VarState::Free,
        };
        self.state[j] = st;
        self.x[j] = match st {
            VarState::AtLower => lo,
            VarState::AtUpper => up,
            _ => 0.0,
        };
    }

    pub(crate) fn structural_values(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| self.x[j].clamp(self.lo[j], self.up[j]))
            .collect()
    }

    #[inline]
    fn for_column(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            let (rows, vals) = self.inst.column(j);
            for (&i, &a) in rows.iter().zip(vals) {
                f(i, a);
            }
        } else {
            f(j - self.n, 1.0);
        }
    }

    fn compute_basic_values(&mut self) {
        let m = self.m;
        let mut r = self.inst.rhs().to_vec();
        for j in 0..self.n + m {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                self.for_column(j, |i, a| r[i] -= a * xj);
            }
        }
        let mut xb = vec![0.0; m];
        for (c, &rc) in r.iter().enumerate() {
            if rc != 0.0 {
                let col = &self.binv[c * m..(c + 1) * m];
                for (v, &b) in xb.iter_mut().zip(col) {
                    *v += b * rc;
                }
            }
        }
        for (p, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[p];
        }
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        self.for_column(j, |i, a| {
            let col = &self.binv[i * m..(i + 1) * m];
            for (v, &b) in alpha.iter_mut().zip(col) {
                *v += a * b;
            }
        });
        alpha
    }

    fn btran(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        let nz: Vec<usize> = (0..m).filter(|&r| cb[r] != 0.0).collect();
        (0..m)
            .map(|c| {
                let col = &self.binv[c * m..(c + 1) * m];
                nz.iter().map(|&r| cb[r] * col[r]).sum()
            })
            .collect()
    }

    /// Rebuilds the dense inverse from the current basis, repairing
    /// dependent structural columns with slacks when needed.
    fn refactor(&mut self) -> Result<(), LpError> {
        for _ in 0..MAX_REPAIRS {
            match self.try_refactor() {
                Ok(()) => {
                    self.since_refactor = 0;
                    return Ok(());
                }
                Err(pairs) => {
                    for (leave, row) in pairs {
                        self.state[leave] = VarState::AtLower;
                        self.place_nonbasic(leave);
                        let slack = self.n + row;
                        let pos = self.basis.iter().position(|&b| b == leave).expect("basic var");
                        self.basis[pos] = slack;
                        self.state[slack] = VarState::Basic;
                    }
                }
            }
        }
        Err(LpError::SingularBasis)
    }

    fn try_refactor(&mut self) -> Result<(), Vec<(usize, usize)>> {
        let (n, m) = (self.n, self.m);
        let mut row_has_slack = vec![false; m];
        let mut structural: Vec<(usize, usize)> = Vec::new(); // (position, var)
        for (p, &j) in self.basis.iter().enumerate() {
            if j >= n {
                row_has_slack[j - n] = true;
            } else {
                structural.push((p, j));
            }
        }
        let r2: Vec<usize> = (0..m).filter(|&i| !row_has_slack[i]).collect();
        let k = structural.len();
        debug_assert_eq!(k, r2.len());
        let mut rho = vec![usize::MAX; m];
        for (t, &i) in r2.iter().enumerate() {
            rho[i] = t;
        }
        // [M | I] with M = A[R2, S], row-major k x 2k
        let w = 2 * k;
        let mut aug = vec![0.0; k * w];
        for (t, &(_, j)) in structural.iter().enumerate() {
            let (rows, vals) = self.inst.column(j);
            for (&i, &a) in rows.iter().zip(vals) {
                if rho[i] != usize::MAX {
                    aug[rho[i] * w + t] = a;
                }
            }
        }
        for t in 0..k {
            aug[t * w + k + t] = 1.0;
        }
        let mut pivot_row_of_col = vec![usize::MAX; k];
        let mut row_used = vec![false; k];
        let mut dependent = Vec::new();
        for t in 0..k {
            let mut best = usize::MAX;
            let mut best_abs = 0.0;
            let mut col_max: f64 = 0.0;
            for r in 0..k {
                let v = aug[r * w + t].abs();
                col_max = col_max.max(v);
                if !row_used[r] && v > best_abs {
                    best_abs = v;
                    best = r;
                }
            }
            if best == usize::MAX || best_abs <= SINGULAR_TOL * col_max.max(1.0) {
                dependent.push(t);
                continue;
            }
            row_used[best] = true;
            pivot_row_of_col[t] = best;
            let inv = 1.0 / aug[best * w + t];
            for c in 0..w {
                aug[best * w + c] *= inv;
            }
            let (before, rest) = aug.split_at_mut(best * w);
            let (prow, after) = rest.split_at_mut(w);
            for chunk in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
                let f = chunk[t];
                if f != 0.0 {
                    for (v, &p) in chunk.iter_mut().zip(prow.iter()) {
                        *v -= f * p;
                    }
                }
            }
        }
        if !dependent.is_empty() {
            let free_rows: Vec<usize> = (0..k).filter(|&r| !row_used[r]).collect();
            return Err(dependent
                .iter()
                .zip(free_rows)
                .map(|(&t, r)| (structural[t].1, r2[r]))
                .collect());
        }
        // Minv[t][rho] = aug[pivot_row_of_col[t]][k + rho]
        let minv_row = |t: usize| &aug[pivot_row_of_col[t] * w + k..pivot_row_of_col[t] * w + w];
        let mut var_t = vec![usize::MAX; n];
        for (t, &(_, j)) in structural.iter().enumerate() {
            var_t[j] = t;
        }
        let mut binv = vec![0.0; m * m];
        for (t, &(p, _)) in structural.iter().enumerate() {
            let mr = minv_row(t);
            for (rr, &i) in r2.iter().enumerate() {
                binv[i * m + p] = mr[rr];
            }
        }
        let mut acc = vec![0.0; k];
        for (p, &j) in self.basis.iter().enumerate() {
            if j < n {
                continue;
            }
            let i = j - n;
            binv[i * m + p] = 1.0;
            acc.iter_mut().for_each(|v| *v = 0.0);
            let (cols, vals) = self.inst.row(i);
            let mut any = false;
            for (&c, &a) in cols.iter().zip(vals) {
                let t = var_t[c];
                if t != usize::MAX {
                    any = true;
                    for (v, &mv) in acc.iter_mut().zip(minv_row(t)) {
                        *v -= a * mv;
                    }
                }
            }
            if any {
                for (rr, &ri) in r2.iter().enumerate() {
                    binv[ri * m + p] = acc[rr];
                }
            }
        }
        self.binv = binv;
        Ok(())
    }

    fn pivot(&mut self, r: usize, alpha: &[f64]) {
        let m = self.m;
        let ar = alpha[r];
        for c in 0..m {
            let col = &mut self.binv[c * m..(c + 1) * m];
            let v = col[r];
            if v == 0.0 {
                continue;
            }
            let v = v / ar;
            for (x, &a) in col.iter_mut().zip(alpha) {
                *x -= a * v;
            }
            col[r] = v;
        }
    }

    fn tol(bound: f64) -> f64 {
        PRIMAL_TOL * bound.abs().max(1.0)
    }

    /// Phase-1 gradient on the basic positions; `None` when primal feasible.
    fn infeasibility_costs(&self) -> Option<Vec<f64>> {
        let mut cb = vec![0.0; self.m];
        let mut any = false;
        for (p, &j) in self.basis.iter().enumerate() {
            let v = self.x[j];
            if v < self.lo[j] - Self::tol(self.lo[j]) {
                cb[p] = -1.0;
                any = true;
            } else if v > self.up[j] + Self::tol(self.up[j]) {
                cb[p] = 1.0;
                any = true;
            }
        }
        any.then_some(cb)
    }

    pub(crate) fn solve(&mut self, iter_limit: usize) -> Result<Outcome, LpError> {
        let nm = self.n + self.m;
        let mut verified = false;
        loop {
            if self.iterations >= iter_limit {
                return Ok(Outcome::IterationLimit);
            }
            let phase1 = self.infeasibility_costs();
            let cb = match &phase1 {
                Some(cb) => cb.clone(),
                None => self.basis.iter().map(|&j| self.cost[j]).collect(),
            };
            let y = self.btran(&cb);

            // pricing
            let mut entering = None;
            let mut best = 0.0;
            for j in 0..nm {
                let st = self.state[j];
                if st == VarState::Basic || self.lo[j] == self.up[j] {
                    continue;
                }
                let mut d = if phase1.is_some() { 0.0 } else { self.cost[j] };
                self.for_column(j, |i, a| d -= y[i] * a);
                let eligible = match st {
                    VarState::AtLower => d < -DUAL_TOL,
                    VarState::AtUpper => d > DUAL_TOL,
                    VarState::Free => d.abs() > DUAL_TOL,
                    VarState::Basic => false,
                };
                if !eligible {
                    continue;
                }
                if self.bland {
                    entering = Some((j, d));
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = Some((j, d));
                }
            }

            let Some((q, dq)) = entering else {
                if self.since_refactor > 0 && !verified {
                    // confirm on a fresh factorization before declaring the result
                    self.refactor()?;
                    self.compute_basic_values();
                    verified = true;
                    continue;
                }
                return Ok(if phase1.is_some() {
                    Outcome::Infeasible
                } else {
                    Outcome::Optimal
                });
            };
            verified = false;
            let dir = if dq < 0.0 { 1.0 } else { -1.0 };
            let alpha = self.ftran(q);

            // ratio test: candidates (position, step, leaves_at_upper)
            let mut cands: Vec<(usize, f64, f64, bool)> = Vec::new(); // (p, dist, |delta|, to_upper)
            for (p, &j) in self.basis.iter().enumerate() {
                let delta = -dir * alpha[p];
                if delta.abs() <= PIVOT_TOL {
                    continue;
                }
                let v = self.x[j];
                let (lo, up) = (self.lo[j], self.up[j]);
                let below = phase1.is_some() && v < lo - Self::tol(lo);
                let above = phase1.is_some() && v > up + Self::tol(up);
                if below {
                    if delta > 0.0 {
                        cands.push((p, lo - v, delta, false));
                    }
                } else if above {
                    if delta < 0.0 {
                        cands.push((p, v - up, -delta, true));
                    }
                } else if delta < 0.0 {
                    if lo.is_finite() {
                        cands.push((p, (v - lo).max(0.0), -delta, false));
                    }
                } else if up.is_finite() {
                    cands.push((p, (up - v).max(0.0), delta, true));
                }
            }
            let range = self.up[q] - self.lo[q];
            let chosen = if cands.is_empty() {
                None
            } else if self.bland {
                let tmin = cands.iter().map(|c| c.1 / c.2).fold(f64::INFINITY, f64::min);
                cands
                    .iter()
                    .filter(|c| c.1 / c.2 <= tmin + 1e-12)
                    .min_by_key(|c| self.basis[c.0])
                    .copied()
            } else {
                let tmax = cands
                    .iter()
                    .map(|c| (c.1 + Self::tol(c.1)) / c.2)
                    .fold(f64::INFINITY, f64::min);
                cands
                    .iter()
                    .filter(|c| c.1 / c.2 <= tmax)
                    .max_by(|a, b| a.2.total_cmp(&b.2))
                    .copied()
            };
            let theta_basic = chosen.map_or(f64::INFINITY, |c| (c.1 / c.2).max(0.0));
            if theta_basic.is_infinite() && range.is_infinite() {
                if phase1.is_some() {
                    return Err(LpError::Numerical("unbounded phase-1 ray".into()));
                }
                return Ok(Outcome::Unbounded);
            }
            self.iterations += 1;
            let flip = range <= theta_basic;
            let theta = if flip { range } else { theta_basic };

            if theta > 0.0 {
                self.x[q] += dir * theta;
                for (p, &j) in self.basis.iter().enumerate() {
                    self.x[j] -= dir * theta * alpha[p];
                }
            }
            if theta <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run > 3 * nm {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }

            if flip {
                self.state[q] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                self.x[q] = if dir > 0.0 { self.up[q] } else { self.lo[q] };
                continue;
            }
            let (p, _, _, to_upper) = chosen.expect("bounded step has a leaving row");
            let leave = self.basis[p];
            self.state[leave] = if to_upper { VarState::AtUpper } else { VarState::AtLower };
            self.x[leave] = if to_upper { self.up[leave] } else { self.lo[leave] };
            self.pivot(p, &alpha);
            self.basis[p] = q;
            self.state[q] = VarState::Basic;
            self.since_refactor += 1;
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                self.compute_basic_values();
            }
        }
    }
}
