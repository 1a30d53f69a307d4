//! Gaussian bosonic states and passive linear propagation.
//!
//! Quadratures follow `x = (a + a†)/√2`, `p = i(a† − a)/√2`, so the vacuum
//! has variance 1/2 in each quadrature and a thermal mode with `N` photons
//! has variance `N + 1/2`. Vectors and matrices use the interleaved ordering
//! `(x_1, p_1, x_2, p_2, …)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMatrix};

/// Commutator-preservation tolerance for [`LinearTransform::validate`].
pub const TRANSFORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub means: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianState {
    pub fn vacuum(modes: usize) -> Self {
        Self::thermal(&vec![0.0; modes])
    }

    pub fn thermal(occupancies: &[f64]) -> Self {
        let n = occupancies.len();
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        for (j, &occ) in occupancies.iter().enumerate() {
            cov[(2 * j, 2 * j)] = occ + 0.5;
            cov[(2 * j + 1, 2 * j + 1)] = occ + 0.5;
        }
        Self {
            means: DVector::zeros(2 * n),
            covariance: cov,
        }
    }

    /// Two-mode squeezed vacuum: mode 0 is the signal, mode 1 the idler.
    pub fn tmss(signal_photons: f64) -> Self {
        Self::tmss_bank(1, &[0], signal_photons)
    }

    /// `n_signal` signal modes followed by one idler per entry of `active`.
    ///
    /// Signal mode `active[k]` forms a TMSS with idler mode `n_signal + k`;
    /// signal modes not listed stay in vacuum.
    pub fn tmss_bank(n_signal: usize, active: &[usize], signal_photons: f64) -> Self {
        let modes = n_signal + active.len();
        let mut state = Self::vacuum(modes);
        let c = (signal_photons * (signal_photons + 1.0)).sqrt();
        for (k, &s) in active.iter().enumerate() {
            assert!(s < n_signal, "active signal mode {s} out of range");
            let i = n_signal + k;
            for j in [s, i] {
                state.covariance[(2 * j, 2 * j)] = signal_photons + 0.5;
                state.covariance[(2 * j + 1, 2 * j + 1)] = signal_photons + 0.5;
            }
            // x-x correlated, p-p anticorrelated
            for (a, b, v) in [(2 * s, 2 * i, c), (2 * s + 1, 2 * i + 1, -c)] {
                state.covariance[(a, b)] = v;
                state.covariance[(b, a)] = v;
            }
        }
        state
    }

    pub fn mode_count(&self) -> usize {
        self.means.len() / 2
    }

    fn mean_amplitude(&self, j: usize) -> Complex64 {
        Complex64::new(self.means[2 * j], self.means[2 * j + 1]) / std::f64::consts::SQRT_2
    }

    /// `⟨a_j† a_j⟩`.
    pub fn photon_number(&self, j: usize) -> f64 {
        let v = &self.covariance;
        let m = &self.means;
        (v[(2 * j, 2 * j)] + v[(2 * j + 1, 2 * j + 1)] + m[2 * j].powi(2) + m[2 * j + 1].powi(2))
            / 2.0
            - 0.5
    }

    /// `⟨a_j a_k⟩` (phase-sensitive correlation).
    pub fn moment_aa(&self, j: usize, k: usize) -> Complex64 {
        let v = &self.covariance;
        let (xj, pj, xk, pk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
        Complex64::new(v[(xj, xk)] - v[(pj, pk)], v[(xj, pk)] + v[(pj, xk)]) / 2.0
            + self.mean_amplitude(j) * self.mean_amplitude(k)
    }

    /// `⟨a_j† a_k⟩` for `j ≠ k`; the photon number for `j = k`.
    pub fn moment_adag_a(&self, j: usize, k: usize) -> Complex64 {
        if j == k {
            return Complex64::new(self.photon_number(j), 0.0);
        }
        let v = &self.covariance;
        let (xj, pj, xk, pk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
        Complex64::new(v[(xj, xk)] + v[(pj, pk)], v[(xj, pk)] - v[(pj, xk)]) / 2.0
            + self.mean_amplitude(j).conj() * self.mean_amplitude(k)
    }

    /// Largest entry of the 2×2 covariance block between modes `j` and `k`.
    pub fn block_max(&self, j: usize, k: usize) -> f64 {
        let mut worst = 0.0_f64;
        for a in 0..2 {
            for b in 0..2 {
                worst = worst.max(self.covariance[(2 * j + a, 2 * k + b)].abs());
            }
        }
        worst
    }

    /// Smallest eigenvalue of `V + (i/2) Ω`; non-negative for a physical state.
    pub fn uncertainty_margin(&self) -> f64 {
        let n = self.mode_count();
        let mut h = self.covariance.map(|x| Complex64::new(x, 0.0));
        for j in 0..n {
            h[(2 * j, 2 * j + 1)] += Complex64::new(0.0, 0.5);
            h[(2 * j + 1, 2 * j)] -= Complex64::new(0.0, 0.5);
        }
        h.symmetric_eigenvalues().min()
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        let v = &self.covariance;
        let asym = (v - v.transpose()).abs().max();
        asym <= tol && self.uncertainty_margin() >= -tol
    }
}

/// Passive map `a_out = A a_in + B a_noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTransform {
    /// `A`, `n_out × n_in`.
    pub signal_map: CMatrix,
    /// `B`, `n_out × n_noise`.
    pub noise_map: CMatrix,
}

impl LinearTransform {
    /// Max-entry `|A A† + B B† − I|`.
    pub fn commutator_residual(&self) -> f64 {
        let n = self.signal_map.nrows();
        let sum = &self.signal_map * self.signal_map.adjoint() + &self.noise_map * self.noise_map.adjoint();
        max_abs(&(sum - CMatrix::identity(n, n)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise_map.nrows() != self.signal_map.nrows() {
            return Err(Error::Input(format!(
                "signal map has {} outputs but noise map has {}",
                self.signal_map.nrows(),
                self.noise_map.nrows()
            )));
        }
        let r = self.commutator_residual();
        if r.is_nan() || r > TRANSFORM_TOLERANCE {
            return Err(Error::NonPhysicalTransform(r));
        }
        Ok(())
    }
}

/// Occupation of the thermal modes entering through the noise map.
#[derive(Debug, Clone, PartialEq)]
pub enum ThermalBath {
    /// Every noise mode holds the same mean photon number.
    Uniform(f64),
    /// One mean photon number per noise mode.
    PerMode(Vec<f64>),
}

impl ThermalBath {
    fn occupancies(&self, modes: usize) -> Result<Vec<f64>> {
        let occ = match self {
            ThermalBath::Uniform(n) => vec![*n; modes],
            ThermalBath::PerMode(v) if v.len() == modes => v.clone(),
            ThermalBath::PerMode(v) => {
                return Err(Error::Input(format!(
                    "bath lists {} occupancies for {modes} noise modes",
                    v.len()
                )))
            }
        };
        if let Some(&bad) = occ.iter().find(|n| !(n.is_finite() && **n >= 0.0)) {
            return Err(Error::domain("thermal occupancy", bad, "finite and >= 0"));
        }
        Ok(occ)
    }
}

/// Real quadrature matrix of a complex mode map.
fn quadrature_map(a: &CMatrix) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * a.nrows(), 2 * a.ncols());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let z = a[(i, j)];
            s[(2 * i, 2 * j)] = z.re;
            s[(2 * i, 2 * j + 1)] = -z.im;
            s[(2 * i + 1, 2 * j)] = z.im;
            s[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    s
}

/// Propagate the first `n_in` modes of `state` through `transform`.
///
/// The output holds the `n_out` transformed modes followed by the untouched
/// remaining modes of the input (idlers kept at the receiver).
pub fn gaussian_propagate(
    state: &GaussianState,
    transform: &LinearTransform,
    bath: &ThermalBath,
) -> Result<GaussianState> {
    transform.validate()?;
    let n_in = transform.signal_map.ncols();
    let n_out = transform.signal_map.nrows();
    let total = state.mode_count();
    if n_in > total {
        return Err(Error::Input(format!(
            "transform acts on {n_in} modes but the state has {total}"
        )));
    }
    let kept = total - n_in;
    let occ = bath.occupancies(transform.noise_map.ncols())?;

    let dim_out = 2 * (n_out + kept);
    let mut m = DMatrix::zeros(dim_out, 2 * total);
    m.view_mut((0, 0), (2 * n_out, 2 * n_in))
        .copy_from(&quadrature_map(&transform.signal_map));
    for k in 0..2 * kept {
        m[(2 * n_out + k, 2 * n_in + k)] = 1.0;
    }
    let mut noise = DMatrix::zeros(dim_out, 2 * occ.len());
    noise
        .view_mut((0, 0), (2 * n_out, 2 * occ.len()))
        .copy_from(&quadrature_map(&transform.noise_map));
    let bath_cov = GaussianState::thermal(&occ).covariance;

    let covariance = &m * &state.covariance * m.transpose() + &noise * bath_cov * noise.transpose();
    // exact symmetry
    let covariance = (&covariance + covariance.transpose()) * 0.5;
    Ok(GaussianState {
        means: &m * &state.means,
        covariance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::siso_beam_splitter;
    use crate::qi::tmss_moments;
    use approx::assert_relative_eq;

    #[test]
    fn tmss_moments_match_closed_forms() {
        let ns = 0.3;
        let s = GaussianState::tmss(ns);
        let m = tmss_moments(ns).unwrap();
        assert_relative_eq!(s.photon_number(0), m.signal_mean_photons, max_relative = 1e-14);
        assert_relative_eq!(s.photon_number(1), m.idler_mean_photons, max_relative = 1e-14);
        assert_relative_eq!(s.moment_aa(0, 1).re, m.cross_correlation, max_relative = 1e-14);
        assert_eq!(s.moment_aa(0, 1).im, 0.0);
        assert_eq!(s.moment_adag_a(0, 1), Complex64::new(0.0, 0.0));
        assert!(s.is_physical(1e-9));
    }

    #[test]
    fn over_correlated_state_is_unphysical() {
        let mut s = GaussianState::tmss(0.3);
        s.covariance[(0, 2)] *= 1.5;
        s.covariance[(2, 0)] *= 1.5;
        assert!(!s.is_physical(1e-9));
    }

    #[test]
    fn identity_at_zero_temperature_is_a_no_op() {
        let s = GaussianState::tmss_bank(2, &[0, 1], 0.2);
        let t = LinearTransform {
            signal_map: CMatrix::identity(2, 2),
            noise_map: CMatrix::zeros(2, 2),
        };
        let out = gaussian_propagate(&s, &t, &ThermalBath::Uniform(0.0)).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn siso_loss_scales_the_cross_correlation() {
        let (eta, ns, nz, phase) = (0.2, 0.05, 7.0, 0.4);
        let b = siso_beam_splitter(eta, phase).unwrap();
        let t = LinearTransform {
            signal_map: b.view((0, 0), (1, 1)).into_owned(),
            noise_map: b.view((0, 1), (1, 1)).into_owned(),
        };
        let out = gaussian_propagate(&GaussianState::tmss(ns), &t, &ThermalBath::Uniform(nz)).unwrap();
        let c = tmss_moments(ns).unwrap().cross_correlation;
        assert_relative_eq!(out.moment_aa(0, 1).norm(), eta.sqrt() * c, max_relative = 1e-13);
        assert_relative_eq!(out.moment_aa(0, 1).arg(), -phase, max_relative = 1e-13);
        assert_relative_eq!(out.photon_number(0), eta * ns + (1.0 - eta) * nz, max_relative = 1e-13);
        assert_relative_eq!(out.photon_number(1), ns, max_relative = 1e-13);
        assert!(out.is_physical(1e-9));
    }

    #[test]
    fn rejects_non_physical_transform() {
        let t = LinearTransform {
            signal_map: CMatrix::identity(1, 1) * Complex64::new(1.2, 0.0),
            noise_map: CMatrix::zeros(1, 1),
        };
        let r = gaussian_propagate(&GaussianState::vacuum(1), &t, &ThermalBath::Uniform(1.0));
        assert!(matches!(r, Err(Error::NonPhysicalTransform(_))));
    }

    #[test]
    fn bath_size_must_match() {
        let t = LinearTransform {
            signal_map: CMatrix::zeros(1, 1),
            noise_map: CMatrix::identity(1, 1),
        };
        let r = gaussian_propagate(&GaussianState::vacuum(1), &t, &ThermalBath::PerMode(vec![1.0, 2.0]));
        assert!(r.is_err());
    }
}
