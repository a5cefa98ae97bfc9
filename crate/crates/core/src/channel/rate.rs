use super::matrix::ChannelMatrix;
use crate::scalar::Scalar;

/// Achievable rate `log2(1 + snr·‖H‖²)` in bits/s/Hz, with `‖H‖²` the
/// squared Euclidean norm of the effective gain (maximum-ratio combining).
pub fn data_rate<T: Scalar>(h: &ChannelMatrix<T>, snr_linear: T) -> T {
    (snr_linear * h.norm_sqr()).ln_1p() / T::LN_2()
}
