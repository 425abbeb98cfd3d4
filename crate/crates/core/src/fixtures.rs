//! Embedded table of the first 100 zeta ordinates.

use crate::zerosets::{parse_zeros, ZeroFormat, ZeroSet};

pub const ZETA_ORDINATES_100: &str = include_str!("../data/zeta_zeros_100.txt");

/// γ₁₀₀ ≈ 236.524 and γ₁₀₁ ≈ 237.770, so the table is complete on (0, 237].
pub const FIXTURE_COMPLETE_TO: f64 = 237.0;

pub fn zeta_fixture() -> ZeroSet {
    parse_zeros(ZETA_ORDINATES_100, ZeroFormat::Ordinates)
        .expect("embedded table parses")
        .set
        .with_complete_range(0.0, FIXTURE_COMPLETE_TO)
        .expect("valid range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shape() {
        let zs = zeta_fixture();
        assert_eq!(zs.len(), 100);
        assert!((zs.zeros()[0].gamma - 14.134725142).abs() < 1e-9);
        assert!((zs.zeros()[99].gamma - 236.524229666).abs() < 1e-9);
        assert_eq!(zs.lines(), Some(&[0.5][..]));
    }
}
