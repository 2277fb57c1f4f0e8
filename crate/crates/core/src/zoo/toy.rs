//! Small hand-sized problems with known ADMM behavior.
//!
//! Where the convex block carries its own objective (a term on `z` rather
//! than on a separate continuous variable), the term is moved onto a
//! continuous copy `u` tied to `z` by the two joint rows `z − u <= 0` and
//! `u − z <= 0`.

use nalgebra::{DMatrix, DVector};

use crate::problem::MboProblem;

/// `min −2v + w²` over `v ∈ {0,1}` with `v = w` as the splitting
/// constraint; `w_lb` adds `w >= w_lb`.
pub fn linear_vs_square(w_lb: Option<f64>) -> MboProblem {
    MboProblem::builder(1, 1)
        .binary_linear(DVector::from_element(1, -2.0))
        .continuous_quadratic(DMatrix::from_element(1, 1, 2.0))
        .joint_inequality(&[1.0], &[-1.0], 0.0)
        .joint_inequality(&[-1.0], &[1.0], 0.0)
        .bounds(
            DVector::from_element(1, w_lb.unwrap_or(f64::NEG_INFINITY)),
            DVector::from_element(1, f64::INFINITY),
        )
        .build()
        .expect("valid toy problem")
}

/// `min v + w` s.t. `2v + w <= 2`, `v + w >= 1`.
pub fn two_bit_cover() -> MboProblem {
    MboProblem::builder(2, 0)
        .binary_linear(DVector::from_element(2, 1.0))
        .binary_inequality(&[2.0, 1.0], 2.0)
        .binary_inequality(&[-1.0, -1.0], -1.0)
        .build()
        .expect("valid toy problem")
}

/// `min v + w + t` s.t. `2v + 10w + t <= 3`, `v + w + t >= b`.
pub fn three_bit_cover(b: f64) -> MboProblem {
    MboProblem::builder(3, 0)
        .binary_linear(DVector::from_element(3, 1.0))
        .binary_inequality(&[2.0, 10.0, 1.0], 3.0)
        .binary_inequality(&[-1.0, -1.0, -1.0], -b)
        .build()
        .expect("valid toy problem")
}

/// `min v + w + t` s.t. `2v + 2w + t <= 3`, `v + w + t >= 1`, `v + w = 1`.
pub fn three_bit_cover_with_equality() -> MboProblem {
    MboProblem::builder(3, 0)
        .binary_linear(DVector::from_element(3, 1.0))
        .binary_inequality(&[2.0, 2.0, 1.0], 3.0)
        .binary_inequality(&[-1.0, -1.0, -1.0], -1.0)
        .equality(&[1.0, 1.0, 0.0], 1.0)
        .build()
        .expect("valid toy problem")
}

/// `min v + w + t + 5(u − 2)²` s.t. `v + 2w + t + u <= 3`,
/// `v + w + t >= 1`, `v + w = 1`.
pub fn mixed_cover() -> MboProblem {
    MboProblem::builder(3, 1)
        .binary_linear(DVector::from_element(3, 1.0))
        .continuous_quadratic(DMatrix::from_element(1, 1, 10.0))
        .continuous_linear(DVector::from_element(1, -20.0))
        .constant(20.0)
        .joint_inequality(&[1.0, 2.0, 1.0], &[1.0], 3.0)
        .binary_inequality(&[-1.0, -1.0, -1.0], -1.0)
        .equality(&[1.0, 1.0, 0.0], 1.0)
        .build()
        .expect("valid toy problem")
}
