use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Two-port beam splitter `B_{η,φ}` mixing the signal mode with a thermal mode.
///
/// Rows are (received, lost) and columns (signal, thermal):
///
/// ```text
/// [  √η e^{-iφ}   √(1-η)    ]
/// [ -√(1-η)       √η e^{iφ} ]
/// ```
pub fn siso_beam_splitter(eta: f64, phase: f64) -> Result<CMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain("eta", eta, "0 <= eta <= 1"));
    }
    if !phase.is_finite() {
        return Err(Error::domain("phase", phase, "finite"));
    }
    let t = eta.sqrt();
    let l = (1.0 - eta).sqrt();
    Ok(CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::from_polar(t, -phase),
            Complex64::new(l, 0.0),
            Complex64::new(-l, 0.0),
            Complex64::from_polar(t, phase),
        ],
    ))
}

/// Reader geometry and antenna parameters of a backscatter link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Reader antenna gain (linear).
    pub antenna_gain: f64,
    /// Carrier angular frequency (rad/s).
    pub angular_frequency: f64,
    /// Quantum radar cross section of the tag (m²).
    pub qrcs: f64,
    /// Transmitter to tag distance (m).
    pub dist_tx_tag: f64,
    /// Tag to receiver distance (m).
    pub dist_tag_rx: f64,
}

impl LinkBudget {
    pub fn new(
        antenna_gain: f64,
        angular_frequency: f64,
        qrcs: f64,
        dist_tx_tag: f64,
        dist_tag_rx: f64,
    ) -> Result<Self> {
        for (name, value) in [
            ("antenna_gain", antenna_gain),
            ("angular_frequency", angular_frequency),
            ("qrcs", qrcs),
            ("dist_tx_tag", dist_tx_tag),
            ("dist_tag_rx", dist_tag_rx),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(name, value, "finite and > 0"));
            }
        }
        Ok(Self {
            antenna_gain,
            angular_frequency,
            qrcs,
            dist_tx_tag,
            dist_tag_rx,
        })
    }
}

/// Round-trip transmissivity `η = G² c² σ_Q / (16π ω² R_t² R_r²)`.
pub fn round_trip_transmissivity(lb: &LinkBudget) -> Result<f64> {
    let lb = LinkBudget::new(
        lb.antenna_gain,
        lb.angular_frequency,
        lb.qrcs,
        lb.dist_tx_tag,
        lb.dist_tag_rx,
    )?;
    let num = lb.antenna_gain.powi(2) * SPEED_OF_LIGHT.powi(2) * lb.qrcs;
    let den = 16.0
        * PI
        * lb.angular_frequency.powi(2)
        * lb.dist_tx_tag.powi(2)
        * lb.dist_tag_rx.powi(2);
    let eta = num / den;
    if !eta.is_finite() || eta > 1.0 {
        return Err(Error::NonPhysicalLink(eta));
    }
    if eta <= 0.0 {
        return Err(Error::DegenerateLink);
    }
    Ok(eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_residual};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lossless_zero_phase_is_identity() {
        let b = siso_beam_splitter(1.0, 0.0).unwrap();
        assert_eq!(max_abs_diff(&b, &CMatrix::identity(2, 2)), 0.0);
    }

    #[test]
    fn zero_transmissivity_is_full_swap() {
        let b = siso_beam_splitter(0.0, 1.234).unwrap();
        let swap = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(-1., 0.), c(0., 0.)]);
        assert!(max_abs_diff(&b, &swap) < 1e-15);
    }

    #[test]
    fn quarter_transmissivity_quarter_turn() {
        let b = siso_beam_splitter(0.25, PI / 2.0).unwrap();
        let r = 0.75_f64.sqrt();
        let expected = CMatrix::from_row_slice(2, 2, &[c(0., -0.5), c(r, 0.), c(-r, 0.), c(0., 0.5)]);
        assert!(max_abs_diff(&b, &expected) < 1e-15);
        // explicit B B†
        let bbh = &b * b.adjoint();
        assert!(max_abs_diff(&bbh, &CMatrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(siso_beam_splitter(-0.1, 0.0).is_err());
        assert!(siso_beam_splitter(1.1, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn beam_splitter_is_unitary(eta in 0.0f64..=1.0, phase in 0.0f64..(2.0 * PI)) {
            let b = siso_beam_splitter(eta, phase).unwrap();
            prop_assert!(unitarity_residual(&b) <= 1e-12);
        }
    }

    #[test]
    fn cancelling_link_budget_gives_unity() {
        let lb = LinkBudget::new(1.0, SPEED_OF_LIGHT, 16.0 * PI, 1.0, 1.0).unwrap();
        assert_relative_eq!(round_trip_transmissivity(&lb).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn doubling_tx_distance_quarters_eta() {
        let a = LinkBudget::new(100.0, 2.0 * PI * 5e9, 0.01, 10.0, 10.0).unwrap();
        let b = LinkBudget { dist_tx_tag: 20.0, ..a };
        let ea = round_trip_transmissivity(&a).unwrap();
        let eb = round_trip_transmissivity(&b).unwrap();
        assert_relative_eq!(ea / eb, 4.0, max_relative = 1e-14);
    }

    #[test]
    fn radar_band_link_matches_high_precision_value() {
        // 40-digit evaluation of the transmissivity formula
        let expected = 1.811_639_599_627_927e-8;
        let lb = LinkBudget::new(100.0, 2.0 * PI * 5e9, 0.01, 10.0, 10.0).unwrap();
        assert_relative_eq!(round_trip_transmissivity(&lb).unwrap(), expected, max_relative = 1e-13);
    }

    #[test]
    fn link_budget_errors() {
        assert!(LinkBudget::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(LinkBudget::new(1.0, 1.0, -1.0, 1.0, 1.0).is_err());
        let big = LinkBudget::new(1e3, SPEED_OF_LIGHT, 16.0 * PI, 1.0, 1.0).unwrap();
        assert!(matches!(round_trip_transmissivity(&big), Err(Error::NonPhysicalLink(_))));
        let tiny = LinkBudget::new(1e-200, 1e200, 1e-200, 1e200, 1e200).unwrap();
        assert!(matches!(round_trip_transmissivity(&tiny), Err(Error::DegenerateLink)));
    }
}
