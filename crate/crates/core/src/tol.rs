//! Numerical tolerances shared across the crate.
//!
//! | Name | Value | Meaning |
//! |------|-------|---------|
//! | [`HERMITIAN`] | 1e-10 | relative ‖A − A†‖_F / ‖A‖_F accepted as Hermitian |
//! | [`psd`] | 1e-10 | eigenvalues in `[-psd, 0)` are clipped; `<= psd` counts as kernel |
//! | [`SPECTRAL`] | 1e-9 | reconstruction / orthonormality slack of eigendecompositions |
//! | [`DIVERGENCE`] | 1e-9 | values within this slack of zero are reported as 0 |
//!
//! The PSD threshold is the only runtime-adjustable value; the CLI sets it once
//! at start-up from `--psd-tol` or `QGAMMA_PSD_TOL`.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

pub const HERMITIAN: f64 = 1e-10;
pub const SPECTRAL: f64 = 1e-9;
pub const DIVERGENCE: f64 = 1e-9;
pub const DEFAULT_PSD: f64 = 1e-10;

static PSD_BITS: AtomicU64 = AtomicU64::new(0x3DDB_7CDF_D9D7_BDBB); // 1e-10

/// Current absolute PSD / support threshold.
#[inline]
pub fn psd() -> f64 {
    f64::from_bits(PSD_BITS.load(Ordering::Relaxed))
}

/// Override the PSD threshold. Rejects negative or non-finite values.
pub fn set_psd(value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "PSD tolerance must be finite and >= 0, got {value}"
        )));
    }
    PSD_BITS.store(value.to_bits(), Ordering::Relaxed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bits_encode_1e_minus_10() {
        assert_eq!(f64::from_bits(0x3DDB_7CDF_D9D7_BDBB), DEFAULT_PSD);
    }

    #[test]
    fn rejects_negative() {
        assert!(set_psd(-1.0).is_err());
        assert!(set_psd(f64::NAN).is_err());
    }
}
