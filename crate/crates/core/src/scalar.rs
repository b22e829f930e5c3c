use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type usable for model weights and metric arithmetic.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + LowerExp
    + Display
    + Debug
    + Sum
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant, panicking only if the type cannot hold it.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("constant representable in scalar type")
    }

    fn half() -> Self {
        Self::of(0.5)
    }

    fn two() -> Self {
        Self::of(2.0)
    }

    fn hundred() -> Self {
        Self::of(100.0)
    }

    /// Numerically stable `ln(1 + exp(-z))`.
    fn log1p_exp_neg(z: Self) -> Self {
        if z >= Self::zero() {
            (-z).exp().ln_1p()
        } else {
            -z + z.exp().ln_1p()
        }
    }

    /// Numerically stable logistic function.
    fn sigmoid(z: Self) -> Self {
        if z >= Self::zero() {
            Self::one() / (Self::one() + (-z).exp())
        } else {
            let e = z.exp();
            e / (Self::one() + e)
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_log_loss_matches_naive_in_safe_range() {
        for &z in &[-5.0f64, -1.0, 0.0, 0.5, 3.0] {
            let naive = (1.0 + (-z).exp()).ln();
            assert!((f64::log1p_exp_neg(z) - naive).abs() < 1e-12);
        }
        assert!(f64::log1p_exp_neg(-1000.0).is_finite());
        assert!((f64::log1p_exp_neg(-1000.0) - 1000.0).abs() < 1e-9);
        assert_eq!(f64::log1p_exp_neg(1000.0), 0.0);
    }

    #[test]
    fn sigmoid_is_symmetric() {
        for &z in &[-30.0f64, -2.0, 0.0, 1.5, 40.0] {
            assert!((f64::sigmoid(z) + f64::sigmoid(-z) - 1.0).abs() < 1e-15);
        }
        assert_eq!(f32::sigmoid(0.0), 0.5);
    }
}
