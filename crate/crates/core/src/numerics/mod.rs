//! Dense kernels, reverse-mode rules, Adam and dropout.

mod dropout;
mod gradcheck;
mod matrix;
mod ops;
mod params;

pub use dropout::{dropout, dropout_with_mask, DropoutMask};
pub use gradcheck::{check_gradients, GradCheckReport, ParamCheck, FD_STEP, REL_ERROR_FLOOR};
pub use matrix::{matmul, Matrix};
pub use ops::{
    cosine_rows, cosine_rows_backward, relu, relu_backward, row_softmax, row_softmax_backward,
    sigmoid, sigmoid_backward, sigmoid_scalar, softmax_in_place,
};
pub use params::{AdamConfig, Gradients, ParamId, ParamStore};

pub(crate) use matrix::{dot, matmul_acc, matmul_nt, matmul_tn_acc};
pub(crate) use ops::softmax_backward_slice;
