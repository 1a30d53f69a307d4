//! Steering-vector and clutter channel geometries.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::matrix::{decompose_channel, ChannelMatrix, DEFAULT_RANK_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

/// Uniform linear array seen from direction cosine `Ω = cos θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringGeometry {
    pub elements: usize,
    /// Element spacing in carrier wavelengths.
    pub spacing: f64,
    pub cosine: f64,
}

/// `e_N(Ω) = (1, e^{i2πΔΩ}, …, e^{i2π(N−1)ΔΩ})ᵀ / √N`.
///
/// Normalised to unit Euclidean norm for every `N`.
pub fn steering_vector(g: &SteeringGeometry) -> Result<CVector> {
    if g.elements == 0 {
        return Err(Error::Input("steering vector needs at least one element".into()));
    }
    if !(-1.0..=1.0).contains(&g.cosine) {
        return Err(Error::domain("cosine", g.cosine, "-1 <= cos <= 1"));
    }
    if !g.spacing.is_finite() {
        return Err(Error::domain("spacing", g.spacing, "finite"));
    }
    let norm = (g.elements as f64).sqrt();
    Ok(CVector::from_fn(g.elements, |n, _| {
        Complex64::from_polar(1.0 / norm, 2.0 * PI * g.spacing * g.cosine * n as f64)
    }))
}

fn check_transmissivity(name: &'static str, eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::domain(name, eta, "0 <= eta <= 1"))
    }
}

/// One tag antenna of a two-by-two link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPathComponent {
    pub transmissivity: f64,
    pub phase: f64,
    pub rx_cosine: f64,
    pub tx_cosine: f64,
}

/// `H = Σ_k √η'_k e^{−iφ'_k} e(Ω_{r,k}) e(Ω_{t,k})†` over exactly two tag antennas.
pub fn build_two_path_channel(paths: &[TwoPathComponent], spacing: f64) -> Result<ChannelMatrix> {
    if paths.len() != 2 {
        return Err(Error::Input(format!(
            "two-path channel needs exactly 2 paths, got {}",
            paths.len()
        )));
    }
    let mut h = CMatrix::zeros(2, 2);
    for p in paths {
        check_transmissivity("path transmissivity", p.transmissivity)?;
        let er = steering_vector(&SteeringGeometry {
            elements: 2,
            spacing,
            cosine: p.rx_cosine,
        })?;
        let et = steering_vector(&SteeringGeometry {
            elements: 2,
            spacing,
            cosine: p.tx_cosine,
        })?;
        h += er * et.adjoint() * Complex64::from_polar(p.transmissivity.sqrt(), -p.phase);
    }
    let cm = decompose_channel(h, DEFAULT_RANK_TOLERANCE)?;
    cm.require_physical()?;
    Ok(cm)
}

fn distinct_mod_period(a: f64, b: f64, spacing: f64) -> bool {
    // Ω_1 ≠ Ω_2 mod 1/Δ  ⇔  Δ(Ω_1 − Ω_2) is not an integer
    let x = spacing * (a - b);
    (x - x.round()).abs() > 1e-12
}

/// Whether two tag antennas are resolvable on both arrays, which is the
/// condition for a full-rank two-by-two channel with non-zero amplitudes.
pub fn two_path_full_rank_condition(paths: &[TwoPathComponent; 2], spacing: f64) -> bool {
    distinct_mod_period(paths[0].tx_cosine, paths[1].tx_cosine, spacing)
        && distinct_mod_period(paths[0].rx_cosine, paths[1].rx_cosine, spacing)
}

/// A scattering path through one clutter object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClutterPath {
    pub transmissivity: f64,
    pub phase: f64,
    /// Direction cosine seen from the tag array, `Ω_{b,c}`.
    pub tag_cosine: f64,
    /// Direction cosine seen from the reader array (transmit side for `H_t`,
    /// receive side for `H_r`).
    pub far_cosine: f64,
}

/// The two factors `(H_t, H_r)` of a clutter channel.
///
/// `H_t` (`N_b × N_t`) carries photons from the transmit array to the tag
/// array and `H_r` (`N_r × N_b`) from the tag array to the receive array.
pub fn clutter_factors(
    tx_paths: &[ClutterPath],
    rx_paths: &[ClutterPath],
    n_tx: usize,
    n_tag: usize,
    n_rx: usize,
    spacing: f64,
) -> Result<(CMatrix, CMatrix)> {
    if tx_paths.is_empty() || rx_paths.is_empty() {
        return Err(Error::Input("clutter path lists must be non-empty".into()));
    }
    if tx_paths.len() != rx_paths.len() {
        return Err(Error::Input(format!(
            "tx and rx clutter lists differ in length ({} vs {})",
            tx_paths.len(),
            rx_paths.len()
        )));
    }
    for (c, (t, r)) in tx_paths.iter().zip(rx_paths).enumerate() {
        if (t.tag_cosine - r.tag_cosine).abs() > 1e-12 {
            return Err(Error::Input(format!(
                "clutter {c}: tag-side cosines disagree ({} vs {})",
                t.tag_cosine, r.tag_cosine
            )));
        }
    }
    if n_tx == 0 || n_tag == 0 || n_rx == 0 {
        return Err(Error::Input("array sizes must be positive".into()));
    }

    let sv = |elements, cosine| {
        steering_vector(&SteeringGeometry {
            elements,
            spacing,
            cosine,
        })
    };
    let mut ht = CMatrix::zeros(n_tag, n_tx);
    for p in tx_paths {
        check_transmissivity("tx path transmissivity", p.transmissivity)?;
        let amp = Complex64::from_polar(p.transmissivity.sqrt(), -p.phase);
        ht += sv(n_tag, p.tag_cosine)? * sv(n_tx, p.far_cosine)?.adjoint() * amp;
    }
    let mut hr = CMatrix::zeros(n_rx, n_tag);
    for p in rx_paths {
        check_transmissivity("rx path transmissivity", p.transmissivity)?;
        let amp = Complex64::from_polar(p.transmissivity.sqrt(), -p.phase);
        hr += sv(n_rx, p.far_cosine)? * sv(n_tag, p.tag_cosine)?.adjoint() * amp;
    }
    Ok((ht, hr))
}

/// Clutter channel `H = H_r H_t` (`N_r × N_t`).
pub fn build_clutter_channel(
    tx_paths: &[ClutterPath],
    rx_paths: &[ClutterPath],
    n_tx: usize,
    n_tag: usize,
    n_rx: usize,
    spacing: f64,
) -> Result<ChannelMatrix> {
    let (ht, hr) = clutter_factors(tx_paths, rx_paths, n_tx, n_tag, n_rx, spacing)?;
    let cm = decompose_channel(hr * ht, DEFAULT_RANK_TOLERANCE)?;
    cm.require_physical()?;
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn single_element() {
        let v = steering_vector(&SteeringGeometry {
            elements: 1,
            spacing: 0.5,
            cosine: 0.3,
        })
        .unwrap();
        assert_eq!(v.len(), 1);
        assert_relative_eq!(v[0].re, 1.0);
        assert_relative_eq!(v[0].im, 0.0);
    }

    #[test]
    fn broadside_pair() {
        let v = steering_vector(&SteeringGeometry {
            elements: 2,
            spacing: 0.5,
            cosine: 0.0,
        })
        .unwrap();
        for z in v.iter() {
            assert_relative_eq!(z.re, 0.5_f64.sqrt(), max_relative = 1e-15);
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn endfire_alternates() {
        let v = steering_vector(&SteeringGeometry {
            elements: 4,
            spacing: 0.5,
            cosine: 1.0,
        })
        .unwrap();
        for (n, expected) in [0.5, -0.5, 0.5, -0.5].iter().enumerate() {
            assert!((v[n] - Complex64::new(*expected, 0.0)).norm() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn steering_vectors_have_unit_norm(
            elements in 1usize..32,
            spacing in 0.0f64..4.0,
            cosine in -1.0f64..=1.0,
        ) {
            let v = steering_vector(&SteeringGeometry { elements, spacing, cosine }).unwrap();
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    fn path(eta: f64, phase: f64, rx: f64, tx: f64) -> TwoPathComponent {
        TwoPathComponent {
            transmissivity: eta,
            phase,
            rx_cosine: rx,
            tx_cosine: tx,
        }
    }

    #[test]
    fn zero_amplitude_path_contributes_nothing() {
        let a = path(0.04, 0.3, 0.2, -0.4);
        let z = path(0.0, 1.0, 0.9, 0.1);
        let both = build_two_path_channel(&[a, z], 0.5).unwrap();
        let single = build_two_path_channel(&[a, path(0.0, 0.0, 0.0, 0.0)], 0.5).unwrap();
        assert!(max_abs_diff(both.entries(), single.entries()) < 1e-15);
        assert_eq!(both.rank(), 1);
    }

    #[test]
    fn coincident_steering_is_rank_one() {
        let cm = build_two_path_channel(&[path(0.01, 0.0, 0.3, 0.7), path(0.02, 1.1, 0.3, 0.7)], 0.5)
            .unwrap();
        assert_eq!(cm.rank(), 1);
    }

    #[test]
    fn resolvable_paths_are_full_rank() {
        let paths = [path(0.01, 0.0, 0.0, 0.0), path(0.01, 0.0, 1.0, 1.0)];
        assert!(two_path_full_rank_condition(&paths, 0.5));
        let cm = build_two_path_channel(&paths, 0.5).unwrap();
        assert_eq!(cm.rank(), 2);
        // 0.1 · (e(0)e(0)† + e(1)e(1)†) = 0.1 · ([[.5,.5],[.5,.5]] + [[.5,-.5],[-.5,.5]]) = 0.1 · I
        for s in cm.singular_values() {
            assert_relative_eq!(*s, 0.1, max_relative = 1e-14);
        }
    }

    #[test]
    fn aliased_cosines_are_not_resolvable() {
        // Δ = 0.5 ⇒ period 2 in Ω
        let paths = [path(0.01, 0.0, -1.0, -1.0), path(0.01, 0.0, 1.0, 1.0)];
        assert!(!two_path_full_rank_condition(&paths, 0.5));
        assert_eq!(build_two_path_channel(&paths, 0.5).unwrap().rank(), 1);
    }

    #[test]
    fn two_path_requires_two() {
        assert!(build_two_path_channel(&[path(0.1, 0.0, 0.0, 0.0)], 0.5).is_err());
    }

    fn clutter(eta: f64, phase: f64, tag: f64, far: f64) -> ClutterPath {
        ClutterPath {
            transmissivity: eta,
            phase,
            tag_cosine: tag,
            far_cosine: far,
        }
    }

    #[test]
    fn single_clutter_gives_rank_one() {
        let cm = build_clutter_channel(
            &[clutter(0.1, 0.2, 0.3, -0.5)],
            &[clutter(0.1, 0.7, 0.3, 0.6)],
            4,
            2,
            4,
            0.5,
        )
        .unwrap();
        assert_eq!(cm.rank(), 1);
        assert_eq!((cm.n_rx(), cm.n_tx()), (4, 4));
    }

    #[test]
    fn zero_rx_amplitudes_null_the_channel() {
        let tx = [clutter(0.1, 0.2, 0.3, -0.5), clutter(0.2, 0.0, -0.6, 0.1)];
        let rx = [clutter(0.0, 0.7, 0.3, 0.6), clutter(0.0, 0.1, -0.6, -0.2)];
        let cm = build_clutter_channel(&tx, &rx, 4, 2, 4, 0.5).unwrap();
        assert_eq!(cm.rank(), 0);
        assert_eq!(cm.trace_hh(), 0.0);
    }

    #[test]
    fn mismatched_tag_cosines_rejected() {
        let r = build_clutter_channel(
            &[clutter(0.1, 0.0, 0.3, 0.0)],
            &[clutter(0.1, 0.0, 0.4, 0.0)],
            2,
            1,
            2,
            0.5,
        );
        assert!(r.is_err());
    }
}
