//! Per-iteration subproblems of the two- and three-block splittings.
//!
//! The consensus constraint is `x − z − y = 0`, where `x` is the binary
//! block, `x̄ = [z; u]` the convex block and `y` the slack block. Passing
//! `y = 0` gives the two-block subproblems.

use nalgebra::{DMatrix, DVector};

use crate::problem::{expect_len, MboProblem, ProblemError};

/// `sᵀ matrix s + linearᵀ s + offset` over bitstrings `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboInstance {
    matrix: DMatrix<f64>,
    linear: DVector<f64>,
    offset: f64,
}

impl QuboInstance {
    /// Builds an instance from a square matrix, keeping its symmetric part.
    pub fn new(matrix: DMatrix<f64>, linear: DVector<f64>, offset: f64) -> Result<Self, ProblemError> {
        expect_len("QUBO matrix columns", matrix.nrows(), matrix.ncols())?;
        expect_len("QUBO linear term", matrix.nrows(), linear.len())?;
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self {
            matrix,
            linear,
            offset,
        })
    }

    pub fn len(&self) -> usize {
        self.linear.len()
    }

    pub fn is_empty(&self) -> bool {
        self.linear.is_empty()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.linear
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn energy(&self, bits: &[u8]) -> f64 {
        debug_assert_eq!(bits.len(), self.len());
        let mut e = self.offset;
        for (i, &bi) in bits.iter().enumerate() {
            if bi == 0 {
                continue;
            }
            e += self.linear[i] + self.matrix[(i, i)];
            for (j, &bj) in bits.iter().enumerate().skip(i + 1) {
                if bj != 0 {
                    e += 2.0 * self.matrix[(i, j)];
                }
            }
        }
        e
    }
}

/// Convex QP over `v`:
///
/// ```text
///     minimize    ½vᵀPv + qᵀv + constant
///     subject to  A v <= b,   lb <= v <= ub
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct QpInstance {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub lb: DVector<f64>,
    pub ub: DVector<f64>,
    /// Objective constant, not used by the solver.
    pub constant: f64,
}

impl QpInstance {
    pub fn new(
        p: DMatrix<f64>,
        q: DVector<f64>,
        a: DMatrix<f64>,
        b: DVector<f64>,
        lb: DVector<f64>,
        ub: DVector<f64>,
    ) -> Result<Self, ProblemError> {
        let n = q.len();
        expect_len("QP P rows", n, p.nrows())?;
        expect_len("QP P columns", n, p.ncols())?;
        expect_len("QP A columns", n, a.ncols())?;
        expect_len("QP b", a.nrows(), b.len())?;
        expect_len("QP lb", n, lb.len())?;
        expect_len("QP ub", n, ub.len())?;
        if p.iter().chain(q.iter()).chain(a.iter()).chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(ProblemError::NonFinite("QP data"));
        }
        let norm = p.abs().max();
        if (&p - p.transpose()).abs().max() > 1e-9 * norm.max(1.0) {
            return Err(ProblemError::NotSymmetric("QP P"));
        }
        if norm > 0.0 && !is_diagonal(&p) {
            let min_eig = ((&p + p.transpose()) * 0.5).symmetric_eigenvalues().min();
            if min_eig < -1e-9 * norm {
                return Err(ProblemError::NotPsd(min_eig));
            }
        } else if p.diagonal().iter().any(|&d| d < -1e-9 * norm) {
            return Err(ProblemError::NotPsd(p.diagonal().min()));
        }
        for i in 0..n {
            if lb[i] > ub[i] || lb[i].is_nan() || ub[i].is_nan() {
                return Err(ProblemError::EmptyBox {
                    index: i,
                    lb: lb[i],
                    ub: ub[i],
                });
            }
        }
        Ok(Self {
            p,
            q,
            a,
            b,
            lb,
            ub,
            constant: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn objective(&self, v: &DVector<f64>) -> f64 {
        0.5 * v.dot(&(&self.p * v)) + self.q.dot(v) + self.constant
    }
}

pub(crate) fn is_diagonal(m: &DMatrix<f64>) -> bool {
    m.iter()
        .enumerate()
        .all(|(k, &v)| v == 0.0 || k / m.nrows() == k % m.nrows())
}

fn check_rho(rho: f64) -> Result<(), ProblemError> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(ProblemError::Format(format!("penalty rho must be positive, got {rho}")))
    }
}

/// First-block QUBO: `q(x) + (c/2)‖G_eq x − b_eq‖² + λᵀx + (ρ/2)‖x − z − y‖²`.
pub fn build_qubo(
    p: &MboProblem,
    z: &DVector<f64>,
    y: &DVector<f64>,
    lambda: &DVector<f64>,
    rho: f64,
    c: f64,
) -> Result<QuboInstance, ProblemError> {
    check_rho(rho)?;
    if !(c >= 0.0) {
        return Err(ProblemError::Format(format!("equality penalty c must be nonnegative, got {c}")));
    }
    let n = p.n_bin();
    expect_len("QUBO z", n, z.len())?;
    expect_len("QUBO y", n, y.len())?;
    expect_len("QUBO lambda", n, lambda.len())?;
    let g = p.g_eq();
    let b = p.b_eq();
    let target = z + y;

    let mut matrix = p.q() + (g.transpose() * g) * (0.5 * c);
    for i in 0..n {
        matrix[(i, i)] += 0.5 * rho;
    }
    let linear = p.a() + lambda - (g.transpose() * b) * c - &target * rho;
    let offset = 0.5 * c * b.norm_squared() + 0.5 * rho * target.norm_squared();
    Ok(QuboInstance {
        matrix,
        linear,
        offset,
    })
}

/// Second-block QP over `x̄ = [z; u]`:
/// `φ(u) − λᵀz + (ρ/2)‖x − z − y‖²` subject to the binary inequalities on
/// `z`, the joint inequalities and the box on `u`. `z` is otherwise free.
pub fn build_qp(
    p: &MboProblem,
    x: &DVector<f64>,
    y: &DVector<f64>,
    lambda: &DVector<f64>,
    rho: f64,
) -> Result<QpInstance, ProblemError> {
    check_rho(rho)?;
    let n = p.n_bin();
    let l = p.n_cont();
    expect_len("QP x", n, x.len())?;
    expect_len("QP y", n, y.len())?;
    expect_len("QP lambda", n, lambda.len())?;
    let dim = n + l;
    let target = x - y;

    let mut pm = DMatrix::zeros(dim, dim);
    for i in 0..n {
        pm[(i, i)] = rho;
    }
    pm.view_mut((n, n), (l, l)).copy_from(p.p_u());

    let mut q = DVector::zeros(dim);
    q.rows_mut(0, n).copy_from(&(-lambda - &target * rho));
    q.rows_mut(n, l).copy_from(p.r_u());

    let (ni, nj) = (p.n_bin_ineq(), p.n_joint());
    let mut a = DMatrix::zeros(ni + nj, dim);
    a.view_mut((0, 0), (ni, n)).copy_from(p.g_in());
    a.view_mut((ni, 0), (nj, n)).copy_from(p.l_z());
    a.view_mut((ni, n), (nj, l)).copy_from(p.l_u());
    let mut b = DVector::zeros(ni + nj);
    b.rows_mut(0, ni).copy_from(p.h_in());
    b.rows_mut(ni, nj).copy_from(p.h_l());

    let mut lb = DVector::from_element(dim, f64::NEG_INFINITY);
    let mut ub = DVector::from_element(dim, f64::INFINITY);
    lb.rows_mut(n, l).copy_from(p.u_lb());
    ub.rows_mut(n, l).copy_from(p.u_ub());

    Ok(QpInstance {
        p: pm,
        q,
        a,
        b,
        lb,
        ub,
        constant: p.c_u() + 0.5 * rho * target.norm_squared(),
    })
}

/// Closed-form third block: `y = (λ + ρ(x − z)) / (β + ρ)`.
pub fn update_y(
    x: &DVector<f64>,
    z: &DVector<f64>,
    lambda: &DVector<f64>,
    rho: f64,
    beta: f64,
) -> Result<DVector<f64>, ProblemError> {
    check_rho(rho)?;
    if !(beta > 0.0) {
        return Err(ProblemError::Format(format!("beta must be positive, got {beta}")));
    }
    expect_len("y-update z", x.len(), z.len())?;
    expect_len("y-update lambda", x.len(), lambda.len())?;
    Ok((lambda + (x - z) * rho) / (beta + rho))
}

/// `λ' = λ + ρ(x − z − y)`.
pub fn update_dual(
    lambda: &DVector<f64>,
    x: &DVector<f64>,
    z: &DVector<f64>,
    y: &DVector<f64>,
    rho: f64,
) -> Result<DVector<f64>, ProblemError> {
    check_rho(rho)?;
    expect_len("dual x", lambda.len(), x.len())?;
    expect_len("dual z", lambda.len(), z.len())?;
    expect_len("dual y", lambda.len(), y.len())?;
    Ok(lambda + (x - z - y) * rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_bitstrings(n: usize) -> impl Iterator<Item = Vec<u8>> {
        (0..1u32 << n).map(move |m| (0..n).map(|i| ((m >> i) & 1) as u8).collect())
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<f64> {
        DVector::from_fn(n, |_, _| rng.gen_range(-scale..scale))
    }

    fn random_problem(rng: &mut ChaCha8Rng, n: usize, l: usize) -> MboProblem {
        let q = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
        let half = DMatrix::from_fn(l, l, |_, _| rng.gen_range(-1.0..1.0));
        let mut b = MboProblem::builder(n, l)
            .binary_quadratic(q)
            .binary_linear(random_vec(rng, n, 2.0))
            .continuous_quadratic(&half * half.transpose())
            .continuous_linear(random_vec(rng, l, 1.0))
            .constant(rng.gen_range(-1.0..1.0));
        for _ in 0..rng.gen_range(0..3) {
            let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            b = b.equality(&g, rng.gen_range(-1.0..2.0));
        }
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        b = b.binary_inequality(&g, 1.0);
        let lz: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lu: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
        b.joint_inequality(&lz, &lu, 1.0).build().unwrap()
    }

    /// The first-block objective written out literally.
    fn first_block_literal(
        p: &MboProblem,
        s: &[u8],
        z: &DVector<f64>,
        y: &DVector<f64>,
        lambda: &DVector<f64>,
        rho: f64,
        c: f64,
    ) -> f64 {
        let x = crate::problem::bits_to_vector(s);
        let eq = p.g_eq() * &x - p.b_eq();
        let res = &x - z - y;
        p.binary_objective(&x) + 0.5 * c * eq.norm_squared() + lambda.dot(&x) + 0.5 * rho * res.norm_squared()
    }

    #[test]
    fn zero_data_gives_proximal_qubo() {
        let p = MboProblem::builder(3, 0).build().unwrap();
        let zero = DVector::zeros(3);
        let qubo = build_qubo(&p, &zero, &zero, &zero, 4.0, 10.0).unwrap();
        assert_eq!(qubo.matrix(), &(DMatrix::identity(3, 3) * 2.0));
        assert_eq!(qubo.linear(), &zero);
        assert_eq!(qubo.offset(), 0.0);
    }

    #[test]
    fn single_bit_qubo_prefers_one() {
        // f0(v) = -2v, z = 1, lambda = 0, rho = 100
        let p = MboProblem::builder(1, 0)
            .binary_linear(DVector::from_element(1, -2.0))
            .build()
            .unwrap();
        let one = DVector::from_element(1, 1.0);
        let zero = DVector::zeros(1);
        let qubo = build_qubo(&p, &one, &zero, &zero, 100.0, 0.0).unwrap();
        assert_abs_diff_eq!(qubo.energy(&[0]), 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(qubo.energy(&[1]), -2.0, epsilon = 1e-12);
    }

    #[test]
    fn equality_offset() {
        let p = MboProblem::builder(3, 0).equality(&[1.0, 1.0, 0.0], 1.0).build().unwrap();
        let zero = DVector::zeros(3);
        let qubo = build_qubo(&p, &zero, &zero, &zero, 1001.0, 900.0).unwrap();
        assert_abs_diff_eq!(qubo.offset(), 450.0, epsilon = 1e-12);
    }

    #[test]
    fn qubo_identity_over_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..120 {
            let n = rng.gen_range(1..=8);
            let ne = rng.gen_range(0..3);
            let p = random_problem(&mut rng, n, ne);
            let z = random_vec(&mut rng, n, 1.5);
            let y = random_vec(&mut rng, n, 0.5);
            let lambda = random_vec(&mut rng, n, 5.0);
            let rho = rng.gen_range(0.1..2000.0);
            let c = rng.gen_range(0.0..1000.0);
            let qubo = build_qubo(&p, &z, &y, &lambda, rho, c).unwrap();
            for s in all_bitstrings(n) {
                let lit = first_block_literal(&p, &s, &z, &y, &lambda, rho, c);
                assert!((qubo.energy(&s) - lit).abs() <= 1e-9 * (1.0 + lit.abs()), "{} vs {lit}", qubo.energy(&s));
            }
        }
    }

    #[test]
    fn qp_identity_over_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..120 {
            let n = rng.gen_range(1..=8);
            let l = rng.gen_range(0..4);
            let p = random_problem(&mut rng, n, l);
            let x = crate::problem::bits_to_vector(&(0..n).map(|_| rng.gen_range(0..2u8)).collect::<Vec<_>>());
            let y = random_vec(&mut rng, n, 0.5);
            let lambda = random_vec(&mut rng, n, 5.0);
            let rho = rng.gen_range(0.1..2000.0);
            let qp = build_qp(&p, &x, &y, &lambda, rho).unwrap();
            for _ in 0..5 {
                let z = random_vec(&mut rng, n, 2.0);
                let u = random_vec(&mut rng, l, 2.0);
                let mut v = DVector::zeros(n + l);
                v.rows_mut(0, n).copy_from(&z);
                v.rows_mut(n, l).copy_from(&u);
                let lit = p.continuous_objective(&u) - lambda.dot(&z) + 0.5 * rho * (&x - &z - &y).norm_squared();
                let got = qp.objective(&v);
                assert!((got - lit).abs() <= 1e-9 * (1.0 + lit.abs()), "{got} vs {lit}");
            }
        }
    }

    #[test]
    fn qp_layout() {
        let p = MboProblem::builder(2, 1)
            .continuous_quadratic(DMatrix::from_element(1, 1, 10.0))
            .binary_inequality(&[1.0, 2.0], 2.0)
            .joint_inequality(&[1.0, 1.0], &[1.0], 3.0)
            .bounds(DVector::from_element(1, 0.0), DVector::from_element(1, 4.0))
            .build()
            .unwrap();
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let zero = DVector::zeros(2);
        let qp = build_qp(&p, &x, &zero, &zero, 5.0).unwrap();
        assert_eq!(qp.p.diagonal().as_slice(), &[5.0, 5.0, 10.0]);
        assert_eq!(qp.q.as_slice(), &[-5.0, 0.0, 0.0]);
        assert_eq!(qp.a.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 2.0, 0.0]);
        assert_eq!(qp.a.row(1).iter().copied().collect::<Vec<_>>(), vec![1.0, 1.0, 1.0]);
        assert_eq!(qp.lb.as_slice(), &[f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0]);
        assert_eq!(qp.ub.as_slice(), &[f64::INFINITY, f64::INFINITY, 4.0]);
    }

    #[test]
    fn two_block_is_zero_y_specialization() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_problem(&mut rng, 5, 2);
        let z = random_vec(&mut rng, 5, 1.0);
        let lambda = random_vec(&mut rng, 5, 1.0);
        let zero = DVector::zeros(5);
        let a = build_qubo(&p, &z, &zero, &lambda, 10.0, 3.0).unwrap();
        let b = build_qubo(&p, &z, &(&zero * 1.0), &lambda, 10.0, 3.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(update_dual(&lambda, &z, &z, &zero, 10.0).unwrap(), lambda);
    }

    #[test]
    fn y_update_at_origin() {
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let y = update_y(&x, &x, &DVector::zeros(2), 1001.0, 1000.0).unwrap();
        assert_eq!(y, DVector::zeros(2));
    }

    #[test]
    fn y_update_first_order_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let x = random_vec(&mut rng, 4, 1.0);
            let z = random_vec(&mut rng, 4, 1.0);
            let lambda = random_vec(&mut rng, 4, 10.0);
            let rho = rng.gen_range(0.5..50.0);
            let beta = rng.gen_range(0.5..50.0);
            let y = update_y(&x, &z, &lambda, rho, beta).unwrap();
            let cond = &y * (beta + rho) - &lambda - (&x - &z) * rho;
            assert!(cond.amax() <= 1e-12 * (1.0 + lambda.amax() + rho + beta));

            // central finite differences of the third-block objective
            let obj = |y: &DVector<f64>| 0.5 * beta * y.norm_squared() - lambda.dot(y) + 0.5 * rho * (&x - &z - y).norm_squared();
            let h = 1e-5;
            for i in 0..4 {
                let mut up = y.clone();
                let mut dn = y.clone();
                up[i] += h;
                dn[i] -= h;
                let g = (obj(&up) - obj(&dn)) / (2.0 * h);
                assert!(g.abs() <= 1e-6, "gradient {g}");
            }
        }
    }

    #[test]
    fn y_update_fixed_point_of_slack_block() {
        // x = 0, z = [0.499, 0.5], lambda = -beta z at the slack fixed point
        let x = DVector::zeros(2);
        let z = DVector::from_vec(vec![0.4995, 0.4995]);
        let lambda = &z * -1000.0;
        let y = update_y(&x, &z, &lambda, 1001.0, 1000.0).unwrap();
        assert_abs_diff_eq!(y[0], -0.4995, epsilon = 1e-12);
    }

    #[test]
    fn dual_step() {
        let x = DVector::from_element(1, 0.3);
        let zero = DVector::zeros(1);
        let l = update_dual(&zero, &x, &zero, &zero, 100.0).unwrap();
        assert_abs_diff_eq!(l[0], 30.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_parameters() {
        let p = MboProblem::builder(2, 0).build().unwrap();
        let z = DVector::zeros(2);
        assert!(build_qubo(&p, &z, &z, &z, 0.0, 1.0).is_err());
        assert!(build_qubo(&p, &z, &z, &z, 1.0, -1.0).is_err());
        assert!(build_qubo(&p, &DVector::zeros(3), &z, &z, 1.0, 1.0).is_err());
        assert!(build_qp(&p, &z, &z, &z, -1.0).is_err());
        assert!(update_y(&z, &z, &z, 1.0, 0.0).is_err());
    }
}
