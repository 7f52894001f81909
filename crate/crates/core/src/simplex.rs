//! Dense two-phase simplex for small bounded LPs.
//!
//! Problems have the form `max c'x` subject to rows `a'x (<=|=|>=) r` and
//! box bounds `lo <= x <= hi` (infinite bounds allowed). Variables are
//! shifted / reflected / split into nonnegative columns internally.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Lp {
    pub objective: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Cmp, f64)>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpResult {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl Lp {
    /// `n` free variables, zero objective, no rows.
    pub fn new(n: usize) -> Self {
        Lp {
            objective: vec![0.0; n],
            rows: Vec::new(),
            lo: vec![f64::NEG_INFINITY; n],
            hi: vec![f64::INFINITY; n],
        }
    }

    pub fn nvars(&self) -> usize {
        self.objective.len()
    }

    pub fn row(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.nvars(), "row length mismatch");
        self.rows.push((coeffs, cmp, rhs));
        self
    }
}

#[derive(Clone, Copy)]
enum VarMap {
    Shift { col: usize, lo: f64 },
    Reflect { col: usize, hi: f64 },
    Split { pos: usize, neg: usize },
}

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

struct Tableau {
    m: usize,
    width: usize, // number of columns excluding rhs
    t: Vec<f64>,  // m rows of width+1
    obj: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.width + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width + 1;
        let p = self.t[pr * w + pc];
        for j in 0..w {
            self.t[pr * w + j] /= p;
        }
        self.t[pr * w + pc] = 1.0;
        let prow: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for i in 0..self.m {
            if i == pr {
                continue;
            }
            let f = self.t[i * w + pc];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for (r, v) in row.iter_mut().zip(&prow) {
                *r -= f * v;
            }
            row[pc] = 0.0;
        }
        let f = self.obj[pc];
        if f != 0.0 {
            for (r, v) in self.obj.iter_mut().zip(&prow) {
                *r -= f * v;
            }
            self.obj[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Maximizes with the objective row holding reduced costs. Columns with
    /// `allowed[j] == false` never enter. Returns `false` when unbounded.
    fn run(&mut self, allowed: &[bool]) -> Option<bool> {
        let mut degenerate = 0usize;
        for _ in 0..MAX_PIVOTS {
            let bland = degenerate > 30;
            let mut enter = None;
            let mut best = -COST_EPS;
            for j in 0..self.width {
                if !allowed[j] || self.obj[j] >= -COST_EPS {
                    continue;
                }
                if bland {
                    enter = Some(j);
                    break;
                }
                if self.obj[j] < best {
                    best = self.obj[j];
                    enter = Some(j);
                }
            }
            let Some(pc) = enter else {
                return Some(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, pc);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - 1e-14
                                || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = leave else {
                return Some(false);
            };
            if ratio <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(pr, pc);
        }
        None
    }
}

/// Solves `lp` to optimality. Returns `None` only if the pivot budget is
/// exhausted.
pub fn maximize(lp: &Lp) -> Option<LpResult> {
    let n = lp.nvars();
    assert_eq!(lp.lo.len(), n);
    assert_eq!(lp.hi.len(), n);

    // column layout for the nonnegative variables z
    let mut maps = Vec::with_capacity(n);
    let mut nz = 0usize;
    let mut rows: Vec<(Vec<(usize, f64)>, Cmp, f64)> = Vec::new();
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lp.lo[j], lp.hi[j]);
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: nz, lo });
            if hi.is_finite() {
                bound_rows.push((nz, hi - lo));
            }
            nz += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Reflect { col: nz, hi });
            nz += 1;
        } else {
            maps.push(VarMap::Split {
                pos: nz,
                neg: nz + 1,
            });
            nz += 2;
        }
    }
    let mut cz = vec![0.0; nz];
    for (j, map) in maps.iter().enumerate() {
        let c = lp.objective[j];
        match *map {
            VarMap::Shift { col, .. } => cz[col] += c,
            VarMap::Reflect { col, .. } => cz[col] -= c,
            VarMap::Split { pos, neg } => {
                cz[pos] += c;
                cz[neg] -= c;
            }
        }
    }
    for (a, cmp, r) in &lp.rows {
        let mut coeffs = Vec::new();
        let mut rhs = *r;
        for (j, map) in maps.iter().enumerate() {
            let v = a[j];
            if v == 0.0 {
                continue;
            }
            match *map {
                VarMap::Shift { col, lo } => {
                    coeffs.push((col, v));
                    rhs -= v * lo;
                }
                VarMap::Reflect { col, hi } => {
                    coeffs.push((col, -v));
                    rhs -= v * hi;
                }
                VarMap::Split { pos, neg } => {
                    coeffs.push((pos, v));
                    coeffs.push((neg, -v));
                }
            }
        }
        rows.push((coeffs, *cmp, rhs));
    }
    for (col, ub) in bound_rows {
        rows.push((vec![(col, 1.0)], Cmp::Le, ub));
    }

    // normalize and orient rows so that rhs >= 0
    let mut prepared = Vec::with_capacity(rows.len());
    for (coeffs, cmp, rhs) in rows {
        let scale = coeffs.iter().fold(0.0f64, |s, (_, v)| s.max(v.abs()));
        if scale == 0.0 {
            let ok = match cmp {
                Cmp::Le => rhs >= -1e-12,
                Cmp::Eq => rhs.abs() <= 1e-12,
                Cmp::Ge => rhs <= 1e-12,
            };
            if ok {
                continue;
            }
            return Some(LpResult::Infeasible);
        }
        let (mut coeffs, mut cmp, mut rhs) = (
            coeffs
                .into_iter()
                .map(|(c, v)| (c, v / scale))
                .collect::<Vec<_>>(),
            cmp,
            rhs / scale,
        );
        if rhs < 0.0 {
            coeffs.iter_mut().for_each(|(_, v)| *v = -*v);
            rhs = -rhs;
            cmp = match cmp {
                Cmp::Le => Cmp::Ge,
                Cmp::Ge => Cmp::Le,
                Cmp::Eq => Cmp::Eq,
            };
        }
        prepared.push((coeffs, cmp, rhs));
    }

    let m = prepared.len();
    let rhs_scale = prepared.iter().fold(1.0f64, |s, r| s.max(r.2));
    let n_slack = prepared.iter().filter(|r| r.1 != Cmp::Eq).count();
    let n_art = prepared.iter().filter(|r| r.1 != Cmp::Le).count();
    let width = nz + n_slack + n_art;
    let w = width + 1;
    let mut tab = Tableau {
        m,
        width,
        t: vec![0.0; m * w],
        obj: vec![0.0; w],
        basis: vec![0; m],
    };
    let mut is_art = vec![false; width];
    let (mut s_next, mut a_next) = (nz, nz + n_slack);
    for (i, (coeffs, cmp, rhs)) in prepared.iter().enumerate() {
        for (c, v) in coeffs {
            tab.t[i * w + c] += v;
        }
        tab.t[i * w + width] = *rhs;
        match cmp {
            Cmp::Le => {
                tab.t[i * w + s_next] = 1.0;
                tab.basis[i] = s_next;
                s_next += 1;
            }
            Cmp::Ge => {
                tab.t[i * w + s_next] = -1.0;
                s_next += 1;
                tab.t[i * w + a_next] = 1.0;
                tab.basis[i] = a_next;
                is_art[a_next] = true;
                a_next += 1;
            }
            Cmp::Eq => {
                tab.t[i * w + a_next] = 1.0;
                tab.basis[i] = a_next;
                is_art[a_next] = true;
                a_next += 1;
            }
        }
    }

    if n_art > 0 {
        // phase 1: maximize -sum(art)
        for i in 0..m {
            if is_art[tab.basis[i]] {
                for j in 0..w {
                    tab.obj[j] -= tab.t[i * w + j];
                }
            }
        }
        for j in 0..width {
            if is_art[j] {
                tab.obj[j] = 0.0;
            }
        }
        let all = vec![true; width];
        tab.run(&all)?;
        // obj[width] holds the phase-1 objective, minus the artificial sum
        if tab.obj[width] < -1e-9 * rhs_scale {
            return Some(LpResult::Infeasible);
        }
        for i in 0..m {
            if !is_art[tab.basis[i]] {
                continue;
            }
            let pc = (0..width).filter(|j| !is_art[*j]).max_by(|a, b| {
                tab.at(i, *a)
                    .abs()
                    .partial_cmp(&tab.at(i, *b).abs())
                    .unwrap()
            });
            if let Some(pc) = pc {
                if tab.at(i, pc).abs() > 1e-9 {
                    tab.pivot(i, pc);
                }
            }
        }
    }

    // phase 2
    let cscale = cz.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let cnorm: Vec<f64> = if cscale > 0.0 {
        cz.iter().map(|v| v / cscale).collect()
    } else {
        cz.clone()
    };
    tab.obj = vec![0.0; w];
    for j in 0..nz {
        tab.obj[j] = -cnorm[j];
    }
    for i in 0..m {
        let b = tab.basis[i];
        if b < nz && cnorm[b] != 0.0 {
            let cb = cnorm[b];
            for j in 0..w {
                tab.obj[j] += cb * tab.t[i * w + j];
            }
        }
    }
    let allowed: Vec<bool> = (0..width).map(|j| !is_art[j]).collect();
    if !tab.run(&allowed)? {
        return Some(LpResult::Unbounded);
    }

    let mut z = vec![0.0; width];
    for i in 0..m {
        z[tab.basis[i]] = tab.rhs(i).max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, lo } => lo + z[col],
            VarMap::Reflect { col, hi } => hi - z[col],
            VarMap::Split { pos, neg } => z[pos] - z[neg],
        })
        .collect();
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Some(LpResult::Optimal { x, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimum(r: Option<LpResult>) -> (Vec<f64>, f64) {
        match r {
            Some(LpResult::Optimal { x, value }) => (x, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18, x,y >= 0
        let mut lp = Lp::new(2);
        lp.objective = vec![3.0, 5.0];
        lp.lo = vec![0.0, 0.0];
        lp.row(vec![1.0, 0.0], Cmp::Le, 4.0)
            .row(vec![0.0, 2.0], Cmp::Le, 12.0)
            .row(vec![3.0, 2.0], Cmp::Le, 18.0);
        let (x, v) = optimum(maximize(&lp));
        assert!((v - 36.0).abs() < 1e-9);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_free_variables() {
        // max x - y, x + y = 1, x free, -2 <= y <= 3
        let mut lp = Lp::new(2);
        lp.objective = vec![1.0, -1.0];
        lp.lo[1] = -2.0;
        lp.hi[1] = 3.0;
        lp.row(vec![1.0, 1.0], Cmp::Eq, 1.0);
        let (x, v) = optimum(maximize(&lp));
        assert!((v - 5.0).abs() < 1e-9);
        assert!((x[1] + 2.0).abs() < 1e-9);
    }

    #[test]
    fn upper_bounded_only_variable() {
        let mut lp = Lp::new(1);
        lp.objective = vec![1.0];
        lp.hi[0] = -1.5;
        let (x, _) = optimum(maximize(&lp));
        assert!((x[0] + 1.5).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = Lp::new(1);
        lp.lo[0] = 0.0;
        lp.row(vec![1.0], Cmp::Le, -1.0);
        assert_eq!(maximize(&lp), Some(LpResult::Infeasible));

        let mut lp = Lp::new(2);
        lp.objective = vec![1.0, 0.0];
        lp.row(vec![1.0, -1.0], Cmp::Le, 0.0);
        assert_eq!(maximize(&lp), Some(LpResult::Unbounded));
    }

    #[test]
    fn ge_rows_and_redundant_equalities() {
        // min x + y (max -x - y) s.t. x + y >= 2, 2x + 2y = 4, x,y >= 0
        let mut lp = Lp::new(2);
        lp.objective = vec![-1.0, -1.0];
        lp.lo = vec![0.0, 0.0];
        lp.row(vec![1.0, 1.0], Cmp::Ge, 2.0)
            .row(vec![2.0, 2.0], Cmp::Eq, 4.0);
        let (x, v) = optimum(maximize(&lp));
        assert!((v + 2.0).abs() < 1e-9);
        assert!((x[0] + x[1] - 2.0).abs() < 1e-9);
    }
}
