//! The mixed-binary problem class.
//!
//! ```text
//!     minimize    xᵀQx + aᵀx + ½uᵀP_u u + r_uᵀu + c_u
//!     subject to  G_eq x  = b_eq
//!                 G_in x <= h_in
//!                 L_z x + L_u u <= h_l
//!                 u_lb <= u <= u_ub,      x ∈ {0,1}ⁿ
//! ```
//!
//! Problems are immutable once built; [`MboProblemBuilder`] validates
//! dimensions, symmetry of `Q`, and positive semidefiniteness of `P_u`.

mod json;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use json::{read_problem, write_problem};

/// Default absolute tolerance for [`MboProblem::is_feasible`].
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-6;

const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("problem must have at least one binary variable")]
    NoBinaries,
    #[error("{0} is not symmetric")]
    NotSymmetric(&'static str),
    #[error("P_u is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("empty box for continuous variable {index}: lb {lb} > ub {ub}")]
    EmptyBox { index: usize, lb: f64, ub: f64 },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("merit weight must be positive, got {0}")]
    NonPositiveMu(f64),
    #[error("binary vector entry {index} is {value}, expected 0 or 1")]
    NotBinary { index: usize, value: u8 },
    #[error("malformed problem document: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A candidate solution: binary part `x` and continuous part `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MboPoint {
    pub x: Vec<u8>,
    pub u: Vec<f64>,
}

impl MboPoint {
    pub fn new(x: Vec<u8>, u: Vec<f64>) -> Result<Self, ProblemError> {
        check_binary(&x)?;
        Ok(Self { x, u })
    }

    pub fn zeros(n_bin: usize, n_cont: usize) -> Self {
        Self {
            x: vec![0; n_bin],
            u: vec![0.0; n_cont],
        }
    }

    pub fn x_vector(&self) -> DVector<f64> {
        bits_to_vector(&self.x)
    }

    pub fn u_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.u)
    }
}

pub fn check_binary(bits: &[u8]) -> Result<(), ProblemError> {
    match bits.iter().position(|&b| b > 1) {
        Some(index) => Err(ProblemError::NotBinary {
            index,
            value: bits[index],
        }),
        None => Ok(()),
    }
}

pub fn bits_to_vector(bits: &[u8]) -> DVector<f64> {
    DVector::from_iterator(bits.len(), bits.iter().map(|&b| f64::from(b)))
}

/// Which splitting the residual refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockMode {
    TwoBlock,
    ThreeBlock,
}

/// `r` is the stopping residual, `rr` the restricted one `‖x − z‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub r: f64,
    pub rr: f64,
}

/// Consensus residuals of an iterate.
///
/// Three-block: `r = ‖x − z − y‖₂`, `rr = ‖x − z‖₂`. Two-block ignores `y`
/// and reports `r = rr = ‖x − z‖₂`.
pub fn residuals(
    x: &DVector<f64>,
    z: &DVector<f64>,
    y: &DVector<f64>,
    mode: BlockMode,
) -> Result<Residuals, ProblemError> {
    expect_len("residual z", x.len(), z.len())?;
    let diff = x - z;
    let rr = diff.norm();
    match mode {
        BlockMode::TwoBlock => Ok(Residuals { r: rr, rr }),
        BlockMode::ThreeBlock => {
            expect_len("residual y", x.len(), y.len())?;
            Ok(Residuals {
                r: (diff - y).norm(),
                rr,
            })
        }
    }
}

/// Selects which constraint families enter the merit violation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeritTerms {
    /// Adds `‖G_eq x − b_eq‖₁` to the inequality violation.
    pub equality: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MboProblem {
    n_bin: usize,
    n_cont: usize,
    q: DMatrix<f64>,
    a: DVector<f64>,
    p_u: DMatrix<f64>,
    r_u: DVector<f64>,
    c_u: f64,
    g_eq: DMatrix<f64>,
    b_eq: DVector<f64>,
    g_in: DMatrix<f64>,
    h_in: DVector<f64>,
    l_z: DMatrix<f64>,
    l_u: DMatrix<f64>,
    h_l: DVector<f64>,
    u_lb: DVector<f64>,
    u_ub: DVector<f64>,
}

impl MboProblem {
    pub fn builder(n_bin: usize, n_cont: usize) -> MboProblemBuilder {
        MboProblemBuilder::new(n_bin, n_cont)
    }

    pub fn n_bin(&self) -> usize {
        self.n_bin
    }
    pub fn n_cont(&self) -> usize {
        self.n_cont
    }
    pub fn n_eq(&self) -> usize {
        self.b_eq.len()
    }
    pub fn n_bin_ineq(&self) -> usize {
        self.h_in.len()
    }
    pub fn n_joint(&self) -> usize {
        self.h_l.len()
    }
    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }
    pub fn a(&self) -> &DVector<f64> {
        &self.a
    }
    pub fn p_u(&self) -> &DMatrix<f64> {
        &self.p_u
    }
    pub fn r_u(&self) -> &DVector<f64> {
        &self.r_u
    }
    pub fn c_u(&self) -> f64 {
        self.c_u
    }
    pub fn g_eq(&self) -> &DMatrix<f64> {
        &self.g_eq
    }
    pub fn b_eq(&self) -> &DVector<f64> {
        &self.b_eq
    }
    pub fn g_in(&self) -> &DMatrix<f64> {
        &self.g_in
    }
    pub fn h_in(&self) -> &DVector<f64> {
        &self.h_in
    }
    pub fn l_z(&self) -> &DMatrix<f64> {
        &self.l_z
    }
    pub fn l_u(&self) -> &DMatrix<f64> {
        &self.l_u
    }
    pub fn h_l(&self) -> &DVector<f64> {
        &self.h_l
    }
    pub fn u_lb(&self) -> &DVector<f64> {
        &self.u_lb
    }
    pub fn u_ub(&self) -> &DVector<f64> {
        &self.u_ub
    }

    fn check_point(&self, pt: &MboPoint) -> Result<(), ProblemError> {
        expect_len("point x", self.n_bin, pt.x.len())?;
        expect_len("point u", self.n_cont, pt.u.len())?;
        check_binary(&pt.x)
    }

    /// Binary part `xᵀQx + aᵀx`.
    pub fn binary_objective(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.q * x)) + self.a.dot(x)
    }

    /// Continuous part `½uᵀP_u u + r_uᵀu + c_u`.
    pub fn continuous_objective(&self, u: &DVector<f64>) -> f64 {
        0.5 * u.dot(&(&self.p_u * u)) + self.r_u.dot(u) + self.c_u
    }

    pub fn objective(&self, pt: &MboPoint) -> Result<f64, ProblemError> {
        self.check_point(pt)?;
        Ok(self.binary_objective(&pt.x_vector()) + self.continuous_objective(&pt.u_vector()))
    }

    /// Summed positive parts of the binary and joint inequality rows, with the
    /// joint rows evaluated at the binary `x` in place of `z`.
    pub fn violation(&self, pt: &MboPoint) -> Result<f64, ProblemError> {
        self.violation_with(pt, MeritTerms::default())
    }

    pub fn violation_with(&self, pt: &MboPoint, terms: MeritTerms) -> Result<f64, ProblemError> {
        self.check_point(pt)?;
        let x = pt.x_vector();
        let u = pt.u_vector();
        let bin = (&self.g_in * &x - &self.h_in).map(|v| v.max(0.0)).sum();
        let joint = (&self.l_z * &x + &self.l_u * &u - &self.h_l)
            .map(|v| v.max(0.0))
            .sum();
        let eq = if terms.equality {
            (&self.g_eq * &x - &self.b_eq).abs().sum()
        } else {
            0.0
        };
        Ok(bin + joint + eq)
    }

    pub fn merit(&self, pt: &MboPoint, mu: f64) -> Result<f64, ProblemError> {
        self.merit_with(pt, mu, MeritTerms::default())
    }

    pub fn merit_with(&self, pt: &MboPoint, mu: f64, terms: MeritTerms) -> Result<f64, ProblemError> {
        if !(mu > 0.0) {
            return Err(ProblemError::NonPositiveMu(mu));
        }
        Ok(self.objective(pt)? + mu * self.violation_with(pt, terms)?)
    }

    /// Checks every constraint of the original problem, equalities included,
    /// against an absolute tolerance. Dimension mismatches count as infeasible.
    pub fn is_feasible(&self, pt: &MboPoint, tol: f64) -> bool {
        if self.check_point(pt).is_err() {
            return false;
        }
        let x = pt.x_vector();
        let u = pt.u_vector();
        let eq_ok = (&self.g_eq * &x - &self.b_eq).iter().all(|v| v.abs() <= tol);
        let bin_ok = (&self.g_in * &x - &self.h_in).iter().all(|&v| v <= tol);
        let joint_ok = (&self.l_z * &x + &self.l_u * &u - &self.h_l)
            .iter()
            .all(|&v| v <= tol);
        let box_ok = u
            .iter()
            .zip(self.u_lb.iter().zip(self.u_ub.iter()))
            .all(|(&v, (&lb, &ub))| v >= lb - tol && v <= ub + tol);
        eq_ok && bin_ok && joint_ok && box_ok
    }
}

pub(crate) fn expect_len(what: &'static str, expected: usize, found: usize) -> Result<(), ProblemError> {
    if expected == found {
        Ok(())
    } else {
        Err(ProblemError::Dimension {
            what,
            expected,
            found,
        })
    }
}

fn expect_shape(
    what: &'static str,
    m: &DMatrix<f64>,
    rows: usize,
    cols: usize,
) -> Result<(), ProblemError> {
    expect_len(what, rows, m.nrows())?;
    expect_len(what, cols, m.ncols())
}

fn all_finite<'a>(what: &'static str, values: impl IntoIterator<Item = &'a f64>) -> Result<(), ProblemError> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ProblemError::NonFinite(what))
    }
}

/// Incremental constructor for [`MboProblem`]. Unset blocks default to zero
/// (objective terms), empty (constraint families) or unbounded (box).
#[derive(Debug, Clone)]
pub struct MboProblemBuilder {
    n_bin: usize,
    n_cont: usize,
    q: DMatrix<f64>,
    a: DVector<f64>,
    p_u: DMatrix<f64>,
    r_u: DVector<f64>,
    c_u: f64,
    eq_rows: Vec<(Vec<f64>, f64)>,
    bin_rows: Vec<(Vec<f64>, f64)>,
    joint_rows: Vec<(Vec<f64>, Vec<f64>, f64)>,
    u_lb: DVector<f64>,
    u_ub: DVector<f64>,
}

impl MboProblemBuilder {
    pub fn new(n_bin: usize, n_cont: usize) -> Self {
        Self {
            n_bin,
            n_cont,
            q: DMatrix::zeros(n_bin, n_bin),
            a: DVector::zeros(n_bin),
            p_u: DMatrix::zeros(n_cont, n_cont),
            r_u: DVector::zeros(n_cont),
            c_u: 0.0,
            eq_rows: Vec::new(),
            bin_rows: Vec::new(),
            joint_rows: Vec::new(),
            u_lb: DVector::from_element(n_cont, f64::NEG_INFINITY),
            u_ub: DVector::from_element(n_cont, f64::INFINITY),
        }
    }

    /// Sets `Q`, storing its symmetric part `(Q + Qᵀ)/2`.
    pub fn binary_quadratic(mut self, q: DMatrix<f64>) -> Self {
        if q.is_square() {
            self.q = (&q + q.transpose()) * 0.5;
        } else {
            self.q = q;
        }
        self
    }

    pub fn binary_linear(mut self, a: DVector<f64>) -> Self {
        self.a = a;
        self
    }

    pub fn continuous_quadratic(mut self, p_u: DMatrix<f64>) -> Self {
        self.p_u = p_u;
        self
    }

    pub fn continuous_linear(mut self, r_u: DVector<f64>) -> Self {
        self.r_u = r_u;
        self
    }

    pub fn constant(mut self, c_u: f64) -> Self {
        self.c_u = c_u;
        self
    }

    /// `gᵀx = rhs`.
    pub fn equality(mut self, g: &[f64], rhs: f64) -> Self {
        self.eq_rows.push((g.to_vec(), rhs));
        self
    }

    /// `gᵀx <= rhs`.
    pub fn binary_inequality(mut self, g: &[f64], rhs: f64) -> Self {
        self.bin_rows.push((g.to_vec(), rhs));
        self
    }

    /// `lzᵀx + luᵀu <= rhs`.
    pub fn joint_inequality(mut self, lz: &[f64], lu: &[f64], rhs: f64) -> Self {
        self.joint_rows.push((lz.to_vec(), lu.to_vec(), rhs));
        self
    }

    pub fn bounds(mut self, lb: DVector<f64>, ub: DVector<f64>) -> Self {
        self.u_lb = lb;
        self.u_ub = ub;
        self
    }

    pub fn build(self) -> Result<MboProblem, ProblemError> {
        let n = self.n_bin;
        let l = self.n_cont;
        let stack = |rows: &[(Vec<f64>, f64)], what| -> Result<(DMatrix<f64>, DVector<f64>), ProblemError> {
            for (g, _) in rows {
                expect_len(what, n, g.len())?;
            }
            let m = DMatrix::from_fn(rows.len(), n, |i, j| rows[i].0[j]);
            let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
            Ok((m, b))
        };
        let (g_eq, b_eq) = stack(&self.eq_rows, "equality row")?;
        let (g_in, h_in) = stack(&self.bin_rows, "binary inequality row")?;
        for (lz, lu, _) in &self.joint_rows {
            expect_len("joint row (binary part)", n, lz.len())?;
            expect_len("joint row (continuous part)", l, lu.len())?;
        }
        let nj = self.joint_rows.len();
        let l_z = DMatrix::from_fn(nj, n, |i, j| self.joint_rows[i].0[j]);
        let l_u = DMatrix::from_fn(nj, l, |i, j| self.joint_rows[i].1[j]);
        let h_l = DVector::from_iterator(nj, self.joint_rows.iter().map(|r| r.2));
        MboProblem::from_parts(ProblemParts {
            n_bin: n,
            n_cont: l,
            q: self.q,
            a: self.a,
            p_u: self.p_u,
            r_u: self.r_u,
            c_u: self.c_u,
            g_eq,
            b_eq,
            g_in,
            h_in,
            l_z,
            l_u,
            h_l,
            u_lb: self.u_lb,
            u_ub: self.u_ub,
        })
    }
}

/// Raw blocks of a problem, validated by [`MboProblem::from_parts`].
#[derive(Debug, Clone)]
pub struct ProblemParts {
    pub n_bin: usize,
    pub n_cont: usize,
    pub q: DMatrix<f64>,
    pub a: DVector<f64>,
    pub p_u: DMatrix<f64>,
    pub r_u: DVector<f64>,
    pub c_u: f64,
    pub g_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
    pub g_in: DMatrix<f64>,
    pub h_in: DVector<f64>,
    pub l_z: DMatrix<f64>,
    pub l_u: DMatrix<f64>,
    pub h_l: DVector<f64>,
    pub u_lb: DVector<f64>,
    pub u_ub: DVector<f64>,
}

impl MboProblem {
    pub fn from_parts(p: ProblemParts) -> Result<Self, ProblemError> {
        let (n, l) = (p.n_bin, p.n_cont);
        if n == 0 {
            return Err(ProblemError::NoBinaries);
        }
        expect_shape("Q", &p.q, n, n)?;
        expect_len("a", n, p.a.len())?;
        expect_shape("P_u", &p.p_u, l, l)?;
        expect_len("r_u", l, p.r_u.len())?;
        expect_shape("G_eq", &p.g_eq, p.b_eq.len(), n)?;
        expect_shape("G_in", &p.g_in, p.h_in.len(), n)?;
        expect_shape("L_z", &p.l_z, p.h_l.len(), n)?;
        expect_shape("L_u", &p.l_u, p.h_l.len(), l)?;
        expect_len("u_lb", l, p.u_lb.len())?;
        expect_len("u_ub", l, p.u_ub.len())?;

        all_finite("Q", p.q.iter())?;
        all_finite("a", p.a.iter())?;
        all_finite("P_u", p.p_u.iter())?;
        all_finite("r_u", p.r_u.iter())?;
        all_finite("c_u", [p.c_u].iter())?;
        all_finite("G_eq", p.g_eq.iter().chain(p.b_eq.iter()))?;
        all_finite("G_in", p.g_in.iter().chain(p.h_in.iter()))?;
        all_finite("L", p.l_z.iter().chain(p.l_u.iter()).chain(p.h_l.iter()))?;
        if p.u_lb.iter().chain(p.u_ub.iter()).any(|v| v.is_nan()) {
            return Err(ProblemError::NonFinite("u bounds"));
        }

        if p.q != p.q.transpose() {
            return Err(ProblemError::NotSymmetric("Q"));
        }
        if l > 0 {
            let norm = p.p_u.abs().max();
            let sym_err = (&p.p_u - p.p_u.transpose()).abs().max();
            if sym_err > PSD_TOL * norm.max(1.0) {
                return Err(ProblemError::NotSymmetric("P_u"));
            }
            if norm > 0.0 {
                let sym = (&p.p_u + p.p_u.transpose()) * 0.5;
                let min_eig = sym.symmetric_eigenvalues().min();
                if min_eig < -PSD_TOL * norm {
                    return Err(ProblemError::NotPsd(min_eig));
                }
            }
        }
        for i in 0..l {
            let (lb, ub) = (p.u_lb[i], p.u_ub[i]);
            if lb > ub {
                return Err(ProblemError::EmptyBox { index: i, lb, ub });
            }
        }
        Ok(Self {
            n_bin: n,
            n_cont: l,
            q: p.q,
            a: p.a,
            p_u: p.p_u,
            r_u: p.r_u,
            c_u: p.c_u,
            g_eq: p.g_eq,
            b_eq: p.b_eq,
            g_in: p.g_in,
            h_in: p.h_in,
            l_z: p.l_z,
            l_u: p.l_u,
            h_l: p.h_l,
            u_lb: p.u_lb,
            u_ub: p.u_ub,
        })
    }

    pub fn to_parts(&self) -> ProblemParts {
        ProblemParts {
            n_bin: self.n_bin,
            n_cont: self.n_cont,
            q: self.q.clone(),
            a: self.a.clone(),
            p_u: self.p_u.clone(),
            r_u: self.r_u.clone(),
            c_u: self.c_u,
            g_eq: self.g_eq.clone(),
            b_eq: self.b_eq.clone(),
            g_in: self.g_in.clone(),
            h_in: self.h_in.clone(),
            l_z: self.l_z.clone(),
            l_u: self.l_u.clone(),
            h_l: self.h_l.clone(),
            u_lb: self.u_lb.clone(),
            u_ub: self.u_ub.clone(),
        }
    }
}
