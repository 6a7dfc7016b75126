use super::{Direction, LinearProgram, LpError, LpSolution, Sense, Status, FEAS_TOL};

const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-7;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;
/// Bound violation the Harris ratio test may accept to pick a larger pivot.
const HARRIS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Place {
    Basic,
    Lower,
    Upper,
    /// Free nonbasic column sitting at zero.
    Zero,
}

pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded { col: usize, dir: f64 },
}

/// Dense bounded-variable simplex tableau.
///
/// Columns are the structural variables, one slack per row
/// (`a_i x + s_i = b_i`), then artificials for rows whose initial residual the
/// slack cannot absorb. Costs are held in minimization form.
#[derive(Clone)]
pub(crate) struct Tableau {
    m: usize,
    n: usize,
    ncols: usize,
    /// B^-1 A, row-major `m x ncols`.
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    place: Vec<Place>,
    /// Values of nonbasic columns.
    x: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    /// Original structural coefficients, row-major `m x n`.
    orig: Vec<f64>,
    rhs: Vec<f64>,
    /// Row and sign of each artificial column.
    art: Vec<(usize, f64)>,
    sign: f64,
    pub(crate) iterations: usize,
    bland: bool,
    degenerate_run: usize,
    since_reinvert: usize,
    /// Equilibration: the tableau works on `diag(row_scale) A diag(col_scale)`.
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl Tableau {
    fn row(&self, i: usize) -> &[f64] {
        &self.t[i * self.ncols..(i + 1) * self.ncols]
    }

    fn iteration_limit(&self) -> usize {
        50 * (self.m + self.ncols) + 10_000
    }

    /// Builds the phase-1 tableau. Returns `None` when some variable has
    /// crossed bounds, which makes the program trivially infeasible.
    fn new(lp: &LinearProgram) -> Option<Self> {
        let m = lp.rows.len();
        let n = lp.vars.len();
        let mut orig = vec![0.0; m * n];
        for (i, r) in lp.rows.iter().enumerate() {
            for &(j, a) in &r.terms {
                orig[i * n + j] += a;
            }
        }
        let (row_scale, col_scale) = equilibrate(&orig, m, n);
        for i in 0..m {
            for j in 0..n {
                orig[i * n + j] *= row_scale[i] * col_scale[j];
            }
        }
        let mut lo = Vec::with_capacity(n + 2 * m);
        let mut hi = Vec::with_capacity(n + 2 * m);
        let mut x = Vec::with_capacity(n + 2 * m);
        let mut place = Vec::with_capacity(n + 2 * m);
        for (v, &cs) in lp.vars.iter().zip(&col_scale) {
            if v.lower > v.upper + FEAS_TOL {
                return None;
            }
            let (lower, upper) = (v.lower / cs, v.upper.max(v.lower) / cs);
            lo.push(lower);
            hi.push(upper);
            if lower.is_finite() {
                x.push(lower);
                place.push(Place::Lower);
            } else if upper.is_finite() {
                x.push(upper);
                place.push(Place::Upper);
            } else {
                x.push(0.0);
                place.push(Place::Zero);
            }
        }
        let mut residual = Vec::with_capacity(m);
        for (i, r) in lp.rows.iter().enumerate() {
            let act: f64 = (0..n).map(|j| orig[i * n + j] * x[j]).sum();
            residual.push(r.rhs * row_scale[i] - act);
            let (slo, shi) = match r.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lo.push(slo);
            hi.push(shi);
            x.push(0.0);
            place.push(if slo == 0.0 { Place::Lower } else { Place::Upper });
        }
        let mut art = Vec::new();
        let mut basis = vec![0; m];
        let mut beta = vec![0.0; m];
        for i in 0..m {
            let s = n + i;
            if residual[i] >= lo[s] && residual[i] <= hi[s] {
                basis[i] = s;
                beta[i] = residual[i];
                place[s] = Place::Basic;
            } else {
                let sgn = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
                art.push((i, sgn));
                basis[i] = usize::MAX;
                beta[i] = residual[i].abs();
            }
        }
        let ncols = n + m + art.len();
        for (k, _) in art.iter().enumerate() {
            lo.push(0.0);
            hi.push(f64::INFINITY);
            x.push(0.0);
            place.push(Place::Basic);
            let (i, _) = art[k];
            basis[i] = n + m + k;
        }
        let mut row_sign = vec![1.0; m];
        for &(i, sgn) in &art {
            row_sign[i] = sgn;
        }
        let mut t = vec![0.0; m * ncols];
        for i in 0..m {
            let rs = row_sign[i];
            for j in 0..n {
                t[i * ncols + j] = rs * orig[i * n + j];
            }
            t[i * ncols + n + i] = rs;
        }
        for (k, &(i, sgn)) in art.iter().enumerate() {
            t[i * ncols + n + m + k] = sgn * row_sign[i];
        }
        let mut cost = vec![0.0; ncols];
        for c in cost.iter_mut().skip(n + m) {
            *c = 1.0;
        }
        let sign = match lp.direction {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        };
        let mut tab = Tableau {
            m,
            n,
            ncols,
            t,
            beta,
            basis,
            place,
            x,
            lo,
            hi,
            cost,
            d: vec![0.0; ncols],
            orig,
            rhs: lp.rows.iter().zip(&row_scale).map(|(r, s)| r.rhs * s).collect(),
            art,
            sign,
            iterations: 0,
            bland: false,
            degenerate_run: 0,
            since_reinvert: 0,
            row_scale,
            col_scale,
        };
        tab.recompute_reduced_costs();
        Some(tab)
    }

    fn recompute_reduced_costs(&mut self) {
        let mut d = self.cost.clone();
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.ncols..(i + 1) * self.ncols];
                for (dj, a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for i in 0..self.m {
            d[self.basis[i]] = 0.0;
        }
        self.d = d;
    }

    /// Recomputes basic values from B^-1 (the slack block of the tableau) and
    /// the original data, removing drift accumulated over pivots.
    fn refresh_values(&mut self) {
        let (m, n) = (self.m, self.n);
        let mut r = self.rhs.clone();
        for j in 0..self.ncols {
            if self.place[j] == Place::Basic {
                continue;
            }
            let xj = self.x[j];
            if xj == 0.0 {
                continue;
            }
            if j < n {
                for (i, ri) in r.iter_mut().enumerate() {
                    *ri -= self.orig[i * n + j] * xj;
                }
            } else if j < n + m {
                r[j - n] -= xj;
            } else {
                let (i, sgn) = self.art[j - n - m];
                r[i] -= sgn * xj;
            }
        }
        for i in 0..m {
            let row = self.row(i);
            self.beta[i] = (0..m).map(|k| row[n + k] * r[k]).sum();
        }
    }

    fn reinvert_interval(&self) -> usize {
        self.m.max(100)
    }

    /// Rebuilds B^-1 A from the original data for the current basis, then
    /// basic values and reduced costs, discarding accumulated pivot error.
    fn reinvert(&mut self) -> Result<(), LpError> {
        let (m, n, nc) = (self.m, self.n, self.ncols);
        self.since_reinvert = 0;
        if m == 0 {
            return Ok(());
        }
        // [B | I] in row-major, reduced by Gauss-Jordan with partial pivoting.
        let w = 2 * m;
        let mut g = vec![0.0; m * w];
        for (k, &b) in self.basis.iter().enumerate() {
            if b < n {
                for i in 0..m {
                    g[i * w + k] = self.orig[i * n + b];
                }
            } else if b < n + m {
                g[(b - n) * w + k] = 1.0;
            } else {
                let (i, sgn) = self.art[b - n - m];
                g[i * w + k] = sgn;
            }
        }
        for i in 0..m {
            g[i * w + m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&a, &b| g[a * w + c].abs().total_cmp(&g[b * w + c].abs()))
                .expect("nonempty range");
            let piv = g[p * w + c];
            if piv.abs() < 1e-12 {
                return Err(LpError::NumericFailure("singular basis on reinversion".into()));
            }
            if p != c {
                for k in 0..w {
                    g.swap(p * w + k, c * w + k);
                }
            }
            for k in 0..w {
                g[c * w + k] /= piv;
            }
            let (before, rest) = g.split_at_mut(c * w);
            let (prow, after) = rest.split_at_mut(w);
            for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
                let f = row[c];
                if f != 0.0 {
                    for (a, q) in row[c..].iter_mut().zip(&prow[c..]) {
                        *a -= f * q;
                    }
                }
            }
        }
        // Row k of B^-1 sits in g[k*w+m .. k*w+2m]; T = B^-1 [A | I | art].
        let mut t = vec![0.0; m * nc];
        for k in 0..m {
            let binv = &g[k * w + m..(k + 1) * w];
            let trow = &mut t[k * nc..(k + 1) * nc];
            for (i, &bi) in binv.iter().enumerate() {
                if bi == 0.0 {
                    continue;
                }
                let arow = &self.orig[i * n..(i + 1) * n];
                for (tj, a) in trow[..n].iter_mut().zip(arow) {
                    *tj += bi * a;
                }
                trow[n + i] = bi;
            }
            for (q, &(i, sgn)) in self.art.iter().enumerate() {
                trow[n + m + q] = sgn * binv[i];
            }
            trow[self.basis[k]] = 1.0;
        }
        for k in 0..m {
            for (k2, &b) in self.basis.iter().enumerate() {
                if k2 != k {
                    t[k * nc + b] = 0.0;
                }
            }
        }
        self.t = t;
        self.refresh_values();
        self.recompute_reduced_costs();
        Ok(())
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.ncols;
        let piv = self.t[r * nc + j];
        {
            let row = &mut self.t[r * nc..(r + 1) * nc];
            for a in row.iter_mut() {
                *a /= piv;
            }
            row[j] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for chunk in before.chunks_mut(nc).chain(after.chunks_mut(nc)) {
            let f = chunk[j];
            if f != 0.0 {
                for (a, p) in chunk.iter_mut().zip(prow.iter()) {
                    *a -= f * p;
                }
                chunk[j] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for (a, p) in self.d.iter_mut().zip(prow.iter()) {
                *a -= f * p;
            }
            self.d[j] = 0.0;
        }
        let leaving = self.basis[r];
        self.basis[r] = j;
        self.place[j] = Place::Basic;
        self.place[leaving] = Place::Lower;
    }

    /// Entering column and direction of motion, or `None` at optimality.
    fn choose_entering(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.ncols {
            let dj = self.d[j];
            let dir = match self.place[j] {
                Place::Basic => continue,
                _ if self.hi[j] - self.lo[j] <= 0.0 => continue,
                Place::Lower if dj < -OPT_TOL => 1.0,
                Place::Upper if dj > OPT_TOL => -1.0,
                Place::Zero if dj.abs() > OPT_TOL => -dj.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// One primal iteration loop. `Outcome::Infeasible` is never returned.
    fn primal(&mut self) -> Result<Outcome, LpError> {
        let limit = self.iterations + self.iteration_limit();
        loop {
            if self.iterations > limit {
                return Err(LpError::NumericFailure("primal simplex iteration limit reached".into()));
            }
            if self.since_reinvert >= self.reinvert_interval() {
                self.reinvert()?;
            }
            let Some((j, dir)) = self.choose_entering() else {
                return Ok(Outcome::Optimal);
            };
            self.since_reinvert += 1;
            self.iterations += 1;
            // Ratio test.
            let mut step = if self.lo[j].is_finite() && self.hi[j].is_finite() {
                self.hi[j] - self.lo[j]
            } else {
                f64::INFINITY
            };
            let mut leave: Option<(usize, bool)> = None;
            // Pass 1: largest step keeping every basic variable within its
            // bounds relaxed by HARRIS_TOL (or exactly, under Bland's rule).
            let slack = if self.bland { 0.0 } else { HARRIS_TOL };
            let mut bound = f64::INFINITY;
            for i in 0..self.m {
                let alpha = dir * self.t[i * self.ncols + j];
                let b = self.basis[i];
                if alpha > PIVOT_TOL && self.lo[b].is_finite() {
                    bound = bound.min(((self.beta[i] - self.lo[b]).max(0.0) + slack) / alpha);
                } else if alpha < -PIVOT_TOL && self.hi[b].is_finite() {
                    bound = bound.min(((self.hi[b] - self.beta[i]).max(0.0) + slack) / -alpha);
                }
            }
            if step <= bound {
                // Bound flip of the entering column.
            } else {
                // Pass 2: among rows blocking within the bound, the largest
                // pivot (Bland: the smallest basic index).
                let mut best_alpha = 0.0;
                let mut best_ratio = f64::INFINITY;
                for i in 0..self.m {
                    let alpha = dir * self.t[i * self.ncols + j];
                    let b = self.basis[i];
                    let (ratio, to_upper) = if alpha > PIVOT_TOL && self.lo[b].is_finite() {
                        (((self.beta[i] - self.lo[b]) / alpha).max(0.0), false)
                    } else if alpha < -PIVOT_TOL && self.hi[b].is_finite() {
                        (((self.hi[b] - self.beta[i]) / -alpha).max(0.0), true)
                    } else {
                        continue;
                    };
                    if ratio > bound {
                        continue;
                    }
                    let better = match leave {
                        None => true,
                        Some((li, _)) if self.bland => {
                            ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && b < self.basis[li])
                        }
                        Some(_) => alpha.abs() > best_alpha,
                    };
                    if better {
                        best_alpha = alpha.abs();
                        best_ratio = ratio;
                        leave = Some((i, to_upper));
                    }
                }
                step = best_ratio;
            }
            if step == f64::INFINITY {
                return Ok(Outcome::Unbounded { col: j, dir });
            }
            if step <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run > DEGENERATE_LIMIT {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
                self.bland = false;
            }
            for i in 0..self.m {
                let a = self.t[i * self.ncols + j];
                if a != 0.0 {
                    self.beta[i] -= dir * step * a;
                }
            }
            let entering_value = self.x[j] + dir * step;
            match leave {
                None => {
                    // Bound flip.
                    if dir > 0.0 {
                        self.x[j] = self.hi[j];
                        self.place[j] = Place::Upper;
                    } else {
                        self.x[j] = self.lo[j];
                        self.place[j] = Place::Lower;
                    }
                }
                Some((r, to_upper)) => {
                    let b = self.basis[r];
                    self.pivot(r, j);
                    self.beta[r] = entering_value;
                    if to_upper {
                        self.x[b] = self.hi[b];
                        self.place[b] = Place::Upper;
                    } else {
                        self.x[b] = self.lo[b];
                        self.place[b] = Place::Lower;
                    }
                }
            }
        }
    }

    /// Dual simplex from a dual-feasible basis after bounds changed.
    fn dual(&mut self) -> Result<Outcome, LpError> {
        let limit = self.iterations + self.iteration_limit();
        loop {
            if self.iterations > limit {
                return Err(LpError::NumericFailure("dual simplex iteration limit reached".into()));
            }
            if self.since_reinvert >= self.reinvert_interval() {
                self.reinvert()?;
            }
            self.since_reinvert += 1;
            let mut leave: Option<(usize, f64)> = None;
            let mut worst = FEAS_TOL;
            for i in 0..self.m {
                let b = self.basis[i];
                let (viol, target) = if self.beta[i] < self.lo[b] - FEAS_TOL {
                    (self.lo[b] - self.beta[i], self.lo[b])
                } else if self.beta[i] > self.hi[b] + FEAS_TOL {
                    (self.beta[i] - self.hi[b], self.hi[b])
                } else {
                    continue;
                };
                if viol > worst {
                    worst = viol;
                    leave = Some((i, target));
                }
            }
            let Some((r, target)) = leave else {
                return Ok(Outcome::Optimal);
            };
            self.iterations += 1;
            let increase = target > self.beta[r];
            let mut enter: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            let mut best_alpha = 0.0;
            for j in 0..self.ncols {
                let alpha = self.t[r * self.ncols + j];
                if alpha.abs() <= PIVOT_TOL || self.hi[j] - self.lo[j] <= 0.0 {
                    continue;
                }
                // x_Br moves by -alpha * dx_j.
                let ok = match self.place[j] {
                    Place::Basic => false,
                    Place::Lower => (alpha < 0.0) == increase,
                    Place::Upper => (alpha > 0.0) == increase,
                    Place::Zero => true,
                };
                if !ok {
                    continue;
                }
                let ratio = (self.d[j] / alpha).abs();
                if ratio < best_ratio - 1e-12
                    || (ratio <= best_ratio + 1e-12 && alpha.abs() > best_alpha)
                {
                    best_ratio = ratio;
                    best_alpha = alpha.abs();
                    enter = Some(j);
                }
            }
            let Some(j) = enter else {
                return Ok(Outcome::Infeasible);
            };
            let alpha = self.t[r * self.ncols + j];
            let dx = (self.beta[r] - target) / alpha;
            for i in 0..self.m {
                let a = self.t[i * self.ncols + j];
                if a != 0.0 {
                    self.beta[i] -= a * dx;
                }
            }
            let entering_value = self.x[j] + dx;
            let b = self.basis[r];
            self.pivot(r, j);
            self.beta[r] = entering_value;
            self.x[b] = target;
            self.place[b] = if target == self.lo[b] { Place::Lower } else { Place::Upper };
        }
    }

    /// Phase 1 followed by phase 2.
    fn run_two_phase(&mut self, lp: &LinearProgram) -> Result<Outcome, LpError> {
        if !self.art.is_empty() {
            if let Outcome::Unbounded { .. } = self.primal()? {
                return Err(LpError::NumericFailure("phase 1 reported an unbounded ray".into()));
            }
            self.reinvert()?;
            let infeas: f64 = (0..self.m)
                .filter(|&i| self.basis[i] >= self.n + self.m)
                .map(|i| self.beta[i].max(0.0))
                .sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if infeas > FEAS_TOL * scale {
                return Ok(Outcome::Infeasible);
            }
            self.drive_out_artificials();
        }
        for (j, v) in lp.vars.iter().enumerate() {
            self.cost[j] = self.sign * v.cost * self.col_scale[j];
        }
        for c in self.cost.iter_mut().skip(self.n) {
            *c = 0.0;
        }
        self.recompute_reduced_costs();
        self.bland = false;
        self.degenerate_run = 0;
        self.primal()
    }

    fn drive_out_artificials(&mut self) {
        let first_art = self.n + self.m;
        for r in 0..self.m {
            if self.basis[r] < first_art {
                continue;
            }
            let mut best: Option<usize> = None;
            let mut best_abs = 1e-7;
            for j in 0..first_art {
                if self.place[j] == Place::Basic {
                    continue;
                }
                let a = self.t[r * self.ncols + j].abs();
                if a > best_abs {
                    best_abs = a;
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                let art = self.basis[r];
                let value = self.x[j];
                self.pivot(r, j);
                self.beta[r] = value;
                self.x[art] = 0.0;
                self.place[art] = Place::Lower;
            }
        }
        for j in first_art..self.ncols {
            self.hi[j] = 0.0;
            if self.place[j] != Place::Basic {
                self.x[j] = 0.0;
                self.place[j] = Place::Lower;
            }
        }
        self.refresh_values();
    }

    /// Tightens the bounds of a structural column, keeping the basis.
    pub(crate) fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        let (lo, hi) = (lo / self.col_scale[j], hi / self.col_scale[j]);
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.place[j] == Place::Basic {
            return;
        }
        let new = if self.x[j] < lo || self.place[j] == Place::Lower || self.place[j] == Place::Zero {
            lo
        } else {
            hi
        };
        let new = if new.is_finite() { new } else { hi };
        let delta = new - self.x[j];
        if delta != 0.0 {
            for i in 0..self.m {
                let a = self.t[i * self.ncols + j];
                if a != 0.0 {
                    self.beta[i] -= a * delta;
                }
            }
        }
        self.x[j] = new;
        self.place[j] = if new == lo { Place::Lower } else { Place::Upper };
    }

    /// Re-optimizes after `set_bounds` calls.
    pub(crate) fn reoptimize(&mut self) -> Result<Outcome, LpError> {
        let out = self.dual()?;
        if let Outcome::Infeasible = out {
            return Ok(out);
        }
        // Clean up any reduced-cost sign drift.
        self.primal()
    }

    /// Structural values in the caller's units.
    pub(crate) fn structural_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.x[..self.n].to_vec();
        for i in 0..self.m {
            if self.basis[i] < self.n {
                v[self.basis[i]] = self.beta[i];
            }
        }
        for (vj, cs) in v.iter_mut().zip(&self.col_scale) {
            *vj *= cs;
        }
        v
    }

    pub(crate) fn solution(&mut self, lp: &LinearProgram, outcome: &Outcome) -> LpSolution {
        self.refresh_values();
        let x = self.structural_values();
        let (m, n) = (self.m, self.n);
        let mut y = vec![0.0; m];
        for i in 0..m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = self.row(i);
                for (k, yk) in y.iter_mut().enumerate() {
                    *yk += cb * row[n + k];
                }
            }
        }
        let mut reduced = vec![0.0; n];
        for (j, rj) in reduced.iter_mut().enumerate() {
            let col: f64 = (0..m).map(|i| y[i] * self.orig[i * n + j]).sum();
            *rj = self.sign * (self.cost[j] - col) / self.col_scale[j];
        }
        for i in 0..m {
            if self.place[self.basis[i]] == Place::Basic && self.basis[i] < n {
                reduced[self.basis[i]] = 0.0;
            }
        }
        let duals: Vec<f64> = y.iter().zip(&self.row_scale).map(|(v, rs)| self.sign * v * rs).collect();
        let status = match outcome {
            Outcome::Optimal => Status::Optimal,
            Outcome::Infeasible => Status::Infeasible,
            Outcome::Unbounded { .. } => Status::Unbounded,
        };
        let ray = if let Outcome::Unbounded { col, dir } = *outcome {
            let mut ray = vec![0.0; n];
            if col < n {
                ray[col] = dir;
            }
            for i in 0..m {
                if self.basis[i] < n {
                    ray[self.basis[i]] = -dir * self.t[i * self.ncols + col];
                }
            }
            for (r, cs) in ray.iter_mut().zip(&self.col_scale) {
                *r *= cs;
            }
            Some(ray)
        } else {
            None
        };
        let objective = lp.objective_value(&x);
        LpSolution {
            status,
            x,
            duals,
            reduced_costs: reduced,
            objective,
            basis: self.basis.clone(),
            ray,
            iterations: self.iterations,
            nodes: 0,
        }
    }

    /// Largest bound violation among basic variables.
    pub(crate) fn max_infeasibility(&self) -> f64 {
        (0..self.m)
            .map(|i| {
                let b = self.basis[i];
                (self.lo[b] - self.beta[i]).max(self.beta[i] - self.hi[b]).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Power-of-two row and column scales that bring the nonzeros of the
/// `m x n` row-major matrix `a` toward magnitude one (geometric mean passes).
fn equilibrate(a: &[f64], m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut r = vec![1.0; m];
    let mut c = vec![1.0; n];
    let pow2 = |v: f64| if v.is_finite() && v > 0.0 { v.log2().round().exp2() } else { 1.0 };
    for _ in 0..6 {
        for i in 0..m {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for j in 0..n {
                let v = (a[i * n + j] * c[j]).abs();
                if v > 0.0 {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            if hi > 0.0 {
                r[i] = pow2(1.0 / (lo * hi).sqrt());
            }
        }
        for j in 0..n {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for i in 0..m {
                let v = (a[i * n + j] * r[i]).abs();
                if v > 0.0 {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            if hi > 0.0 {
                c[j] = pow2(1.0 / (lo * hi).sqrt());
            }
        }
    }
    (r, c)
}

pub(crate) fn infeasible_solution(lp: &LinearProgram) -> LpSolution {
    LpSolution {
        status: Status::Infeasible,
        x: lp.vars.iter().map(|v| if v.lower.is_finite() { v.lower } else { 0.0 }).collect(),
        duals: vec![0.0; lp.rows.len()],
        reduced_costs: vec![0.0; lp.vars.len()],
        objective: f64::NAN,
        basis: Vec::new(),
        ray: None,
        iterations: 0,
        nodes: 0,
    }
}

/// Two-phase solve returning the final tableau for warm starts.
pub(crate) fn solve_with_tableau(
    lp: &LinearProgram,
) -> Result<(LpSolution, Option<Tableau>), LpError> {
    lp.validate()?;
    let Some(mut tab) = Tableau::new(lp) else {
        return Ok((infeasible_solution(lp), None));
    };
    let outcome = tab.run_two_phase(lp)?;
    let mut sol = tab.solution(lp, &outcome);
    if sol.status == Status::Infeasible {
        sol.objective = f64::NAN;
        return Ok((sol, None));
    }
    if sol.status == Status::Optimal {
        check_accuracy(lp, &sol)?;
    }
    Ok((sol, Some(tab)))
}

pub(crate) fn check_accuracy(lp: &LinearProgram, sol: &LpSolution) -> Result<(), LpError> {
    let scale = 1.0
        + lp.rows.iter().fold(0.0f64, |a, r| a.max(r.rhs.abs()))
        + sol.x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let res = lp.primal_residual(&sol.x);
    if res > 1e-7 * scale {
        return Err(LpError::NumericFailure(format!("primal residual {res:e} after solve")));
    }
    Ok(())
}

/// Solves `lp` with the two-phase bounded primal simplex.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_with_tableau(lp).map(|(sol, _)| sol)
}
