use alloc::string::String;

/// Errors raised by the pure-math layer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoreError {
    /// A caller handed in an argument that violates an operation's contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Two arrays that must agree in shape do not.
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    /// The source image is too small for the requested crop; callers are
    /// expected to resample a different image rather than abort.
    #[error("image {h}x{w} too small for a {need}x{need} crop")]
    ImageTooSmall { h: usize, w: usize, need: usize },
    /// Training produced a non-finite loss.
    #[error("non-finite loss at step {step}")]
    NonFiniteLoss { step: usize },
}

pub type CoreResult<T> = core::result::Result<T, CoreError>;

macro_rules! invalid_arg {
    ($($t:tt)*) => {
        crate::error::CoreError::InvalidArgument(alloc::format!($($t)*))
    };
}
pub(crate) use invalid_arg;

macro_rules! shape_mismatch {
    ($expected:expr, $got:expr) => {
        crate::error::CoreError::ShapeMismatch {
            expected: alloc::format!("{:?}", $expected),
            got: alloc::format!("{:?}", $got),
        }
    };
}
pub(crate) use shape_mismatch;
