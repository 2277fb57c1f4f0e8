//! Infeasible-start primal-dual interior point method (Mehrotra
//! predictor-corrector) for dense convex QPs, followed by an active-set
//! polish that solves the KKT equations on the identified active set.
//!
//! All inequality families are stacked into `C v + s = d, s >= 0` with
//! multipliers `w >= 0`. Rows of `A` are scaled to unit infinity norm and the
//! objective to unit magnitude before iterating.

use log::debug;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{kkt_residuals, QpDuals, QpError, QpInstance, QpSolution, QpSolver, QpStatus};
use crate::splitting::is_diagonal;

/// Interior-point backend. `tol` bounds every entry of the returned
/// [`super::KktResiduals`] when the status is optimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorPoint {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for InteriorPoint {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 20000,
        }
    }
}

const DENSE_LIMIT: usize = 300;
const POLISH_DENSE_LIMIT: usize = 800;
const STALL_WINDOW: usize = 40;

struct Scaled {
    n: usize,
    p: DMatrix<f64>,
    p_diag: Option<DVector<f64>>,
    q: DVector<f64>,
    a: DMatrix<f64>,
    row_map: Vec<usize>,
    row_scale: Vec<f64>,
    lower: Vec<usize>,
    upper: Vec<usize>,
    d: DVector<f64>,
    obj_scale: f64,
    m_orig: usize,
}

impl Scaled {
    /// Returns `None` when a zero row has a negative right-hand side.
    fn new(qp: &QpInstance) -> Option<Self> {
        let n = qp.dim();
        let obj_scale = 1.0f64.max(qp.p.abs().max()).max(qp.q.amax());
        let p = &qp.p / obj_scale;
        let q = &qp.q / obj_scale;
        let p_diag = is_diagonal(&p).then(|| p.diagonal());

        let mut row_map = Vec::new();
        let mut row_scale = Vec::new();
        for k in 0..qp.a.nrows() {
            let norm = qp.a.row(k).amax();
            if norm == 0.0 {
                if qp.b[k] < 0.0 {
                    return None;
                }
                continue;
            }
            row_map.push(k);
            row_scale.push(norm);
        }
        let m = row_map.len();
        let a = DMatrix::from_fn(m, n, |i, j| qp.a[(row_map[i], j)] / row_scale[i]);
        let lower: Vec<usize> = (0..n).filter(|&i| qp.lb[i].is_finite()).collect();
        let upper: Vec<usize> = (0..n).filter(|&i| qp.ub[i].is_finite()).collect();
        let mut d = DVector::zeros(m + lower.len() + upper.len());
        for i in 0..m {
            d[i] = qp.b[row_map[i]] / row_scale[i];
        }
        for (k, &i) in lower.iter().enumerate() {
            d[m + k] = -qp.lb[i];
        }
        for (k, &i) in upper.iter().enumerate() {
            d[m + lower.len() + k] = qp.ub[i];
        }
        Some(Self {
            n,
            p,
            p_diag,
            q,
            a,
            row_map,
            row_scale,
            lower,
            upper,
            d,
            obj_scale,
            m_orig: qp.a.nrows(),
        })
    }

    fn m(&self) -> usize {
        self.a.nrows()
    }

    fn rows(&self) -> usize {
        self.d.len()
    }

    fn c_mul(&self, v: &DVector<f64>) -> DVector<f64> {
        let m = self.m();
        let nl = self.lower.len();
        let mut out = DVector::zeros(self.rows());
        out.rows_mut(0, m).copy_from(&(&self.a * v));
        for (k, &i) in self.lower.iter().enumerate() {
            out[m + k] = -v[i];
        }
        for (k, &i) in self.upper.iter().enumerate() {
            out[m + nl + k] = v[i];
        }
        out
    }

    fn ct_mul(&self, w: &DVector<f64>) -> DVector<f64> {
        let m = self.m();
        let nl = self.lower.len();
        let mut out = self.a.tr_mul(&w.rows(0, m).into_owned());
        for (k, &i) in self.lower.iter().enumerate() {
            out[i] -= w[m + k];
        }
        for (k, &i) in self.upper.iter().enumerate() {
            out[i] += w[m + nl + k];
        }
        out
    }

    fn unscale(&self, v: &DVector<f64>, w: &DVector<f64>) -> (DVector<f64>, QpDuals) {
        let m = self.m();
        let nl = self.lower.len();
        let mut duals = QpDuals::zeros(self.n, self.m_orig);
        for k in 0..m {
            duals.ineq[self.row_map[k]] = self.obj_scale * w[k] / self.row_scale[k];
        }
        for (k, &i) in self.lower.iter().enumerate() {
            duals.lower[i] = self.obj_scale * w[m + k];
        }
        for (k, &i) in self.upper.iter().enumerate() {
            duals.upper[i] = self.obj_scale * w[m + nl + k];
        }
        (v.clone(), duals)
    }

    /// Diagonal contributed by the box rows for weights `wdiv = w / s`.
    fn box_diag(&self, wdiv: &DVector<f64>) -> DVector<f64> {
        let m = self.m();
        let nl = self.lower.len();
        let mut h = DVector::zeros(self.n);
        for (k, &i) in self.lower.iter().enumerate() {
            h[i] += wdiv[m + k];
        }
        for (k, &i) in self.upper.iter().enumerate() {
            h[i] += wdiv[m + nl + k];
        }
        h
    }

    fn factor(&self, wdiv: &DVector<f64>, delta: f64) -> Option<Newton> {
        let n = self.n;
        let m = self.m();
        let boxd = self.box_diag(wdiv);
        if let Some(pd) = &self.p_diag {
            if n > DENSE_LIMIT && m < n {
                let h0 = pd + &boxd + DVector::from_element(n, delta);
                let h0max = h0.amax();
                if h0.min() > 1e-12 * h0max.max(1.0) {
                    let h0_inv = h0.map(|v| 1.0 / v);
                    let mut b = self.a.clone();
                    for j in 0..n {
                        let s = h0_inv[j].sqrt();
                        b.column_mut(j).scale_mut(s);
                    }
                    let mut s = &b * b.transpose();
                    for k in 0..m {
                        s[(k, k)] += 1.0 / wdiv[k];
                    }
                    let chol = Cholesky::new(s)?;
                    return Some(Newton::Woodbury {
                        h0_inv,
                        a: self.a.clone(),
                        chol,
                    });
                }
            }
        }
        let mut h = self.p.clone();
        for i in 0..n {
            h[(i, i)] += boxd[i] + delta;
        }
        if m > 0 {
            let mut b = self.a.clone();
            for k in 0..m {
                b.row_mut(k).scale_mut(wdiv[k].sqrt());
            }
            h += b.tr_mul(&b);
        }
        Cholesky::new(h).map(Newton::Dense)
    }

    fn residual_norms(&self, v: &DVector<f64>, s: &DVector<f64>, w: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let rd = &self.p * v + &self.q + self.ct_mul(w);
        let rp = self.c_mul(v) + s - &self.d;
        (rd, rp)
    }
}

enum Newton {
    Dense(Cholesky<f64, Dyn>),
    Woodbury {
        h0_inv: DVector<f64>,
        a: DMatrix<f64>,
        chol: Cholesky<f64, Dyn>,
    },
}

impl Newton {
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            Newton::Dense(c) => c.solve(rhs),
            Newton::Woodbury { h0_inv, a, chol } => {
                let t = rhs.component_mul(h0_inv);
                let y = chol.solve(&(a * &t));
                t - a.tr_mul(&y).component_mul(h0_inv)
            }
        }
    }
}

fn max_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    let mut alpha = 1.0f64;
    for (xi, di) in x.iter().zip(dx.iter()) {
        if *di < 0.0 {
            alpha = alpha.min(-xi / di);
        }
    }
    alpha
}

struct Candidate {
    v: DVector<f64>,
    duals: QpDuals,
    kkt: super::KktResiduals,
}

impl InteriorPoint {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self { tol, max_iter }
    }

    fn candidate(&self, qp: &QpInstance, sc: &Scaled, v: &DVector<f64>, w: &DVector<f64>) -> Candidate {
        let (v, duals) = sc.unscale(v, w);
        let kkt = kkt_residuals(qp, &v, &duals);
        Candidate { v, duals, kkt }
    }

    /// Solves the equality-constrained QP on the rows with `w > s`.
    fn polish(&self, sc: &Scaled, s: &DVector<f64>, w: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let n = sc.n;
        let m = sc.m();
        let nl = sc.lower.len();
        let active: Vec<usize> = (0..sc.rows()).filter(|&k| w[k] > s[k]).collect();
        let na = active.len();
        let mut ca = DMatrix::zeros(na, n);
        let mut da = DVector::zeros(na);
        for (r, &k) in active.iter().enumerate() {
            da[r] = sc.d[k];
            if k < m {
                ca.row_mut(r).copy_from(&sc.a.row(k));
            } else if k < m + nl {
                ca[(r, sc.lower[k - m])] = -1.0;
            } else {
                ca[(r, sc.upper[k - m - nl])] = 1.0;
            }
        }
        let (v, y) = match &sc.p_diag {
            Some(pd) if pd.min() > 0.0 => {
                let pinv = pd.map(|x| 1.0 / x);
                let mut scaled = ca.clone();
                for j in 0..n {
                    scaled.column_mut(j).scale_mut(pinv[j]);
                }
                let schur = &scaled * ca.transpose();
                let rhs = -&da - &scaled * &sc.q;
                let y = if na > 0 { schur.lu().solve(&rhs)? } else { DVector::zeros(0) };
                let v = -(&sc.q + ca.tr_mul(&y)).component_mul(&pinv);
                (v, y)
            }
            _ => {
                if n + na > POLISH_DENSE_LIMIT {
                    return None;
                }
                let mut k = DMatrix::zeros(n + na, n + na);
                k.view_mut((0, 0), (n, n)).copy_from(&sc.p);
                k.view_mut((0, n), (n, na)).copy_from(&ca.transpose());
                k.view_mut((n, 0), (na, n)).copy_from(&ca);
                let mut rhs = DVector::zeros(n + na);
                rhs.rows_mut(0, n).copy_from(&(-&sc.q));
                rhs.rows_mut(n, na).copy_from(&da);
                let sol = k.lu().solve(&rhs)?;
                (sol.rows(0, n).into_owned(), sol.rows(n, na).into_owned())
            }
        };
        if !v.iter().chain(y.iter()).all(|x| x.is_finite()) {
            return None;
        }
        let ymax = y.amax();
        if y.iter().any(|&yi| yi < -1e-9 * (1.0 + ymax)) {
            return None;
        }
        let mut wfull = DVector::zeros(sc.rows());
        for (r, &k) in active.iter().enumerate() {
            wfull[k] = y[r].max(0.0);
        }
        Some((v, wfull))
    }

    /// Elastic feasibility problem `min Σt s.t. C v − t <= d, t >= 0`.
    fn is_infeasible(&self, qp: &QpInstance) -> bool {
        let n = qp.dim();
        let m = qp.a.nrows();
        let mut a = DMatrix::zeros(m + 2 * n, n + m + 2 * n);
        let mut b = DVector::zeros(m + 2 * n);
        let mut rows = 0;
        for k in 0..m {
            a.view_mut((rows, 0), (1, n)).copy_from(&qp.a.row(k));
            a[(rows, n + rows)] = -1.0;
            b[rows] = qp.b[k];
            rows += 1;
        }
        for i in 0..n {
            if qp.lb[i].is_finite() {
                a[(rows, i)] = -1.0;
                a[(rows, n + rows)] = -1.0;
                b[rows] = -qp.lb[i];
                rows += 1;
            }
            if qp.ub[i].is_finite() {
                a[(rows, i)] = 1.0;
                a[(rows, n + rows)] = -1.0;
                b[rows] = qp.ub[i];
                rows += 1;
            }
        }
        let dim = n + rows;
        let a = a.view((0, 0), (rows, dim)).into_owned();
        let b = b.rows(0, rows).into_owned();
        let mut q = DVector::zeros(dim);
        q.rows_mut(n, rows).fill(1.0);
        // a tiny proximal term keeps the free block bounded
        let mut p = DMatrix::zeros(dim, dim);
        for i in 0..n {
            p[(i, i)] = 1e-10;
        }
        let mut lb = DVector::from_element(dim, f64::NEG_INFINITY);
        lb.rows_mut(n, rows).fill(0.0);
        let ub = DVector::from_element(dim, f64::INFINITY);
        let elastic = QpInstance {
            p,
            q,
            a,
            b,
            lb,
            ub,
            constant: 0.0,
        };
        let scale = 1.0 + qp.b.amax().max(qp.a.amax());
        match self.run(&elastic, false) {
            Ok(sol) if sol.status == QpStatus::Optimal => {
                let total: f64 = sol.v.rows(n, rows).iter().sum();
                total > 1e-6 * scale
            }
            _ => false,
        }
    }

    fn run(&self, qp: &QpInstance, detect: bool) -> Result<QpSolution, QpError> {
        let n = qp.dim();
        let Some(sc) = Scaled::new(qp) else {
            return Ok(QpSolution {
                v: DVector::zeros(n),
                duals: QpDuals::zeros(n, qp.a.nrows()),
                status: QpStatus::Infeasible,
                kkt: Default::default(),
                iterations: 0,
            });
        };
        let rows = sc.rows();
        let target = 0.1 * self.tol;

        let mut v = DVector::from_fn(n, |i, _| {
            let (lb, ub) = (qp.lb[i], qp.ub[i]);
            if lb.is_finite() && ub.is_finite() {
                0.5 * (lb + ub)
            } else {
                0.0f64.clamp(lb, ub)
            }
        });
        let mut s = (&sc.d - sc.c_mul(&v)).map(|x| x.max(1.0));
        let mut w = DVector::from_element(rows, 1.0);

        let mut best = self.candidate(qp, &sc, &v, &w);
        let mut best_iter = 0;
        let mut last_polish = usize::MAX;
        let mut stalled = 0;
        let mut iterations = 0;
        let mut status = QpStatus::MaxIter;

        for it in 0..self.max_iter {
            iterations = it + 1;
            let current = self.candidate(qp, &sc, &v, &w);
            if current.kkt.max() < best.kkt.max() {
                if current.kkt.max() < 0.999 * best.kkt.max() {
                    best_iter = it;
                }
                best = current;
            }
            if best.kkt.within(target) {
                status = QpStatus::Optimal;
                break;
            }
            if best.kkt.max() < 1e-5 && last_polish.wrapping_add(5) <= it || (best.kkt.max() < 1e-5 && last_polish == usize::MAX) {
                last_polish = it;
                if let Some((pv, pw)) = self.polish(&sc, &s, &w) {
                    let cand = self.candidate(qp, &sc, &pv, &pw);
                    if cand.kkt.max() < best.kkt.max() {
                        best = cand;
                    }
                    if best.kkt.within(target) {
                        status = QpStatus::Optimal;
                        break;
                    }
                }
            }
            if it > best_iter + STALL_WINDOW {
                debug!("qp: no progress for {STALL_WINDOW} iterations at {it}");
                break;
            }

            let wn = w.amax();
            if detect && wn > 1e6 {
                let y = &w / wn;
                let cty = sc.ct_mul(&y);
                let dy = sc.d.dot(&y);
                if cty.amax() <= 1e-7 && dy < -1e-6 {
                    status = QpStatus::Infeasible;
                    break;
                }
            }
            let vn = v.amax();
            if detect && vn > 1e8 {
                let dir = &v / vn;
                let pd = (&sc.p * &dir).amax();
                let cd = sc.c_mul(&dir).max();
                if pd <= 1e-6 && cd <= 1e-6 && sc.q.dot(&dir) < -1e-9 {
                    status = QpStatus::Unbounded;
                    break;
                }
            }

            let (rd, rp) = sc.residual_norms(&v, &s, &w);
            let mu = if rows > 0 { s.dot(&w) / rows as f64 } else { 0.0 };
            let wdiv = w.component_div(&s);
            let mut delta = 1e-11;
            let newton = loop {
                match sc.factor(&wdiv, delta) {
                    Some(f) => break Some(f),
                    None if delta < 1e-2 => delta *= 100.0,
                    None => break None,
                }
            };
            let Some(newton) = newton else {
                debug!("qp: Newton system could not be factored at iteration {it}");
                break;
            };

            let direction = |rc: &DVector<f64>| {
                let inner = (w.component_mul(&rp) - rc).component_div(&s);
                let rhs = -&rd - sc.ct_mul(&inner);
                let dv = newton.solve(&rhs);
                let ds = -&rp - sc.c_mul(&dv);
                let dw = (-rc - w.component_mul(&ds)).component_div(&s);
                (dv, ds, dw)
            };

            let rc_aff = s.component_mul(&w);
            let (dv_a, ds_a, dw_a) = direction(&rc_aff);
            let (dv, ds, dw) = if rows > 0 {
                let alpha_aff = max_step(&s, &ds_a).min(max_step(&w, &dw_a));
                let mu_aff = (&s + &ds_a * alpha_aff).dot(&(&w + &dw_a * alpha_aff)) / rows as f64;
                let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);
                let rc = &rc_aff + ds_a.component_mul(&dw_a) - DVector::from_element(rows, sigma * mu);
                direction(&rc)
            } else {
                (dv_a, ds_a, dw_a)
            };
            let alpha = if rows > 0 {
                (0.99 * max_step(&s, &ds).min(max_step(&w, &dw))).min(1.0)
            } else {
                1.0
            };
            v += &dv * alpha;
            s += &ds * alpha;
            w += &dw * alpha;
            if rows > 0 {
                // keep strictly interior
                s.apply(|x| *x = x.max(1e-300));
                w.apply(|x| *x = x.max(1e-300));
            }
            if !v.iter().chain(s.iter()).chain(w.iter()).all(|x| x.is_finite()) {
                debug!("qp: non-finite iterate at {it}");
                break;
            }
            if alpha < 1e-12 {
                stalled += 1;
                if stalled > 5 {
                    break;
                }
            } else {
                stalled = 0;
            }
        }

        if status == QpStatus::MaxIter {
            if let Some((pv, pw)) = self.polish(&sc, &s, &w) {
                let cand = self.candidate(qp, &sc, &pv, &pw);
                if cand.kkt.max() < best.kkt.max() {
                    best = cand;
                }
            }
            if best.kkt.within(self.tol) {
                status = QpStatus::Optimal;
            } else if detect && best.kkt.primal_inf > self.tol.sqrt() && self.is_infeasible(qp) {
                status = QpStatus::Infeasible;
            }
        }
        Ok(QpSolution {
            v: best.v,
            duals: best.duals,
            status,
            kkt: best.kkt,
            iterations,
        })
    }
}

impl QpSolver for InteriorPoint {
    fn solve(&self, qp: &QpInstance) -> Result<QpSolution, QpError> {
        let n = qp.dim();
        if qp.p.shape() != (n, n)
            || qp.a.ncols() != n
            || qp.b.len() != qp.a.nrows()
            || qp.lb.len() != n
            || qp.ub.len() != n
        {
            return Err(QpError::Malformed(format!(
                "dimension {n}, P {:?}, A {:?}, b {}, lb {}, ub {}",
                qp.p.shape(),
                qp.a.shape(),
                qp.b.len(),
                qp.lb.len(),
                qp.ub.len()
            )));
        }
        self.run(qp, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unbounded_box(n: usize) -> (DVector<f64>, DVector<f64>) {
        (
            DVector::from_element(n, f64::NEG_INFINITY),
            DVector::from_element(n, f64::INFINITY),
        )
    }

    fn solve(qp: &QpInstance) -> QpSolution {
        InteriorPoint::default().solve(qp).unwrap()
    }

    #[test]
    fn interior_optimum() {
        // min (u - 2)^2 s.t. u <= 3
        let (lb, ub) = unbounded_box(1);
        let qp = QpInstance::new(
            DMatrix::from_element(1, 1, 2.0),
            DVector::from_element(1, -4.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 3.0),
            lb,
            ub,
        )
        .unwrap();
        let sol = solve(&qp);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert_abs_diff_eq!(sol.v[0], 2.0, epsilon = 1e-6);
        assert!(sol.kkt.within(1e-8));
    }

    #[test]
    fn active_lower_bound() {
        // min u^2 s.t. u >= 1/2 as a box bound and as a row
        let qp = QpInstance::new(
            DMatrix::from_element(1, 1, 2.0),
            DVector::zeros(1),
            DMatrix::zeros(0, 1),
            DVector::zeros(0),
            DVector::from_element(1, 0.5),
            DVector::from_element(1, f64::INFINITY),
        )
        .unwrap();
        let sol = solve(&qp);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert_abs_diff_eq!(sol.v[0], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.duals.lower[0], 1.0, epsilon = 1e-6);

        let (lb, ub) = unbounded_box(1);
        let qp = QpInstance::new(
            DMatrix::from_element(1, 1, 2.0),
            DVector::zeros(1),
            DMatrix::from_element(1, 1, -1.0),
            DVector::from_element(1, -0.5),
            lb,
            ub,
        )
        .unwrap();
        let sol = solve(&qp);
        assert_abs_diff_eq!(sol.v[0], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.duals.ineq[0], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn halfspace_projection() {
        // min ½‖v − [1, 1]‖² s.t. v1 + v2 <= 1
        let (lb, ub) = unbounded_box(2);
        let qp = QpInstance::new(
            DMatrix::identity(2, 2),
            DVector::from_element(2, -1.0),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DVector::from_element(1, 1.0),
            lb,
            ub,
        )
        .unwrap();
        let sol = solve(&qp);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert_abs_diff_eq!(sol.v[0], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.v[1], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.duals.ineq[0], 0.5, epsilon = 1e-6);
    }

    #[test]
    fn detects_infeasibility() {
        // u <= 0 and u >= 1
        let (lb, ub) = unbounded_box(1);
        let qp = QpInstance::new(
            DMatrix::from_element(1, 1, 1.0),
            DVector::zeros(1),
            DMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
            DVector::from_vec(vec![0.0, -1.0]),
            lb,
            ub,
        )
        .unwrap();
        assert_eq!(solve(&qp).status, QpStatus::Infeasible);

        // empty intersection of a halfspace and a box
        let qp = QpInstance::new(
            DMatrix::zeros(2, 2),
            DVector::from_element(2, 1.0),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DVector::from_element(1, 3.0),
            DVector::from_element(2, 2.0),
            DVector::from_element(2, 4.0),
        )
        .unwrap();
        assert_eq!(solve(&qp).status, QpStatus::Infeasible);
    }

    #[test]
    fn zero_row_with_negative_rhs_is_infeasible() {
        let (lb, ub) = unbounded_box(1);
        let qp = QpInstance::new(
            DMatrix::identity(1, 1),
            DVector::zeros(1),
            DMatrix::zeros(1, 1),
            DVector::from_element(1, -1.0),
            lb,
            ub,
        )
        .unwrap();
        assert_eq!(solve(&qp).status, QpStatus::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        // min -u s.t. u >= 0
        let qp = QpInstance::new(
            DMatrix::zeros(1, 1),
            DVector::from_element(1, -1.0),
            DMatrix::zeros(0, 1),
            DVector::zeros(0),
            DVector::zeros(1),
            DVector::from_element(1, f64::INFINITY),
        )
        .unwrap();
        assert_eq!(solve(&qp).status, QpStatus::Unbounded);
    }

    #[test]
    fn linear_program_vertex() {
        // min -x - y s.t. x + 2y <= 4, 3x + y <= 6, 0 <= x, y
        let qp = QpInstance::new(
            DMatrix::zeros(2, 2),
            DVector::from_element(2, -1.0),
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 1.0]),
            DVector::from_vec(vec![4.0, 6.0]),
            DVector::zeros(2),
            DVector::from_element(2, f64::INFINITY),
        )
        .unwrap();
        let sol = solve(&qp);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert_abs_diff_eq!(sol.v[0], 1.6, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.v[1], 1.2, epsilon = 1e-6);
    }

    #[test]
    fn equality_via_paired_rows() {
        // min (z - 1)^2 + u^2 s.t. z = u
        let (lb, ub) = unbounded_box(2);
        let qp = QpInstance::new(
            DMatrix::identity(2, 2) * 2.0,
            DVector::from_vec(vec![-2.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]),
            DVector::zeros(2),
            lb,
            ub,
        )
        .unwrap();
        let sol = solve(&qp);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert_abs_diff_eq!(sol.v[0], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.v[1], 0.5, epsilon = 1e-6);
    }

    #[test]
    fn large_diagonal_problem_uses_low_rank_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 600;
        let m = 20;
        let a = DMatrix::from_fn(m, n, |_, _| if rng.gen_bool(0.1) { rng.gen_range(0.0..5.0) } else { 0.0 });
        let (lb, ub) = unbounded_box(n);
        let qp = QpInstance::new(
            DMatrix::identity(n, n) * 1e6,
            DVector::from_fn(n, |_, _| -rng.gen_range(0.0..1e6)),
            a,
            DVector::from_element(m, 1.0),
            lb,
            ub,
        )
        .unwrap();
        let sol = solve(&qp);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!(sol.kkt.within(1e-8), "{:?}", sol.kkt);
    }
}
