use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, max_abs_diff, CMatrix};

/// Relative singular-value threshold used for the numerical rank.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-9;

/// Slack on the unit spectral-norm bound absorbing SVD roundoff.
pub const PHYSICALITY_SLACK: f64 = 1e-12;

/// A channel matrix together with its full SVD `H = U Σ V†`.
///
/// `U` is `N_r × N_r`, `V` is `N_t × N_t`, and the singular values are stored
/// in descending order. The squared singular values are the eigen-channel
/// transmissivities `η_k`.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    entries: CMatrix,
    u: CMatrix,
    singular_values: Vec<f64>,
    v: CMatrix,
    rank: usize,
    rank_tolerance: f64,
}

impl ChannelMatrix {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn n_rx(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.entries.ncols()
    }

    /// Receive-side unitary `U` (`N_r × N_r`).
    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    /// Transmit-side unitary `V` (`N_t × N_t`).
    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    /// Singular values `√η_1 ≥ √η_2 ≥ …`, `min(N_r, N_t)` of them.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Eigen-channel transmissivities `η_k = σ_k²`.
    pub fn transmissivities(&self) -> Vec<f64> {
        self.singular_values.iter().map(|s| s * s).collect()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    pub fn spectral_norm(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// A passive channel has spectral norm at most one.
    pub fn is_physical(&self) -> bool {
        self.spectral_norm() <= 1.0 + PHYSICALITY_SLACK
    }

    pub fn require_physical(&self) -> Result<()> {
        if self.is_physical() {
            Ok(())
        } else {
            Err(Error::NonPhysicalChannel(self.spectral_norm()))
        }
    }

    /// `trace[H H†]`, summed entry-wise.
    pub fn trace_hh(&self) -> f64 {
        self.entries.iter().map(|h| h.norm_sqr()).sum()
    }

    /// The `N_r × N_t` block-diagonal singular-value matrix `Σ`.
    pub fn sigma_matrix(&self) -> CMatrix {
        let mut s = CMatrix::zeros(self.n_rx(), self.n_tx());
        for (k, &sv) in self.singular_values.iter().enumerate() {
            s[(k, k)] = Complex64::new(sv, 0.0);
        }
        s
    }

    /// Max-entry `|U Σ V† − H|`.
    pub fn reconstruction_residual(&self) -> f64 {
        let rebuilt = &self.u * self.sigma_matrix() * self.v.adjoint();
        max_abs_diff(&rebuilt, &self.entries)
    }
}

/// Factorise a raw channel matrix.
pub fn decompose_channel(h: CMatrix, rank_tolerance: f64) -> Result<ChannelMatrix> {
    if h.nrows() == 0 || h.ncols() == 0 {
        return Err(Error::Input("channel matrix must be non-empty".into()));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("channel matrix has non-finite entries".into()));
    }
    if !(rank_tolerance.is_finite() && rank_tolerance >= 0.0) {
        return Err(Error::domain("rank_tolerance", rank_tolerance, "finite and >= 0"));
    }

    // nalgebra's complex SVD with singular vectors misconverges on some
    // rank-deficient inputs, so the factorisation goes through faer.
    let fh = faer::Mat::<Complex64>::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)]);
    let svd = fh
        .svd()
        .map_err(|e| Error::Input(format!("SVD did not converge: {e:?}")))?;
    let to_na = |m: faer::MatRef<'_, Complex64>| CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let u = to_na(svd.U());
    let v = to_na(svd.V());
    let singular_values: Vec<f64> = svd.S().column_vector().iter().map(|s| s.re).collect();

    let largest = singular_values.first().copied().unwrap_or(0.0);
    let rank = if largest > 0.0 {
        singular_values
            .iter()
            .filter(|&&s| s > rank_tolerance * largest)
            .count()
    } else {
        0
    };

    Ok(ChannelMatrix {
        entries: h,
        u,
        singular_values,
        v,
        rank,
        rank_tolerance,
    })
}

/// Loss coefficients `√(1 − η_k)` coupling each receive eigen-mode to its
/// thermal mode.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseLoading {
    pub coefficients: Vec<f64>,
}

impl NoiseLoading {
    /// Diagonal `S` (`N_r × N_r`).
    pub fn matrix(&self) -> CMatrix {
        let n = self.coefficients.len();
        let mut s = CMatrix::zeros(n, n);
        for (k, &c) in self.coefficients.iter().enumerate() {
            s[(k, k)] = Complex64::new(c, 0.0);
        }
        s
    }

    /// Max-entry `|Σ Σ† + S S† − I|` against the channel's `Σ`.
    pub fn completeness_residual(&self, cm: &ChannelMatrix) -> f64 {
        let sigma = cm.sigma_matrix();
        let s = self.matrix();
        let n = cm.n_rx();
        let sum = &sigma * sigma.adjoint() + &s * s.adjoint();
        max_abs(&(sum - CMatrix::identity(n, n)))
    }
}

/// Noise loading of a physical channel; `η_k = 0` beyond the numerical rank.
pub fn noise_loading(cm: &ChannelMatrix) -> Result<NoiseLoading> {
    cm.require_physical()?;
    let coefficients = (0..cm.n_rx())
        .map(|k| {
            let eta = if k < cm.rank() {
                cm.singular_values()[k].powi(2).min(1.0)
            } else {
                0.0
            };
            (1.0 - eta).sqrt()
        })
        .collect();
    Ok(NoiseLoading { coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_residual;
    use crate::rng::substream;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = substream(seed, 0);
        CMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn scaled_to_norm(h: CMatrix, target: f64) -> CMatrix {
        let norm = decompose_channel(h.clone(), DEFAULT_RANK_TOLERANCE)
            .unwrap()
            .spectral_norm();
        h * Complex64::new(target / norm, 0.0)
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let cm = decompose_channel(CMatrix::identity(2, 2), DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(cm.rank(), 2);
        for s in cm.singular_values() {
            assert_relative_eq!(*s, 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn scaled_identity_transmissivities() {
        let eta: f64 = 1e-5;
        let h = CMatrix::identity(2, 2) * Complex64::new(eta.sqrt(), 0.0);
        let cm = decompose_channel(h, DEFAULT_RANK_TOLERANCE).unwrap();
        for e in cm.transmissivities() {
            assert_relative_eq!(e, eta, max_relative = 1e-14);
        }
    }

    #[test]
    fn random_square_reconstruction() {
        let h = scaled_to_norm(random_matrix(8, 8, 1), 0.1);
        let cm = decompose_channel(h, DEFAULT_RANK_TOLERANCE).unwrap();
        assert!(cm.reconstruction_residual() <= 1e-10);
        assert!(unitarity_residual(cm.u()) <= 1e-10);
        assert!(unitarity_residual(cm.v()) <= 1e-10);
        assert!(cm.singular_values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rectangular_shapes_get_full_unitaries() {
        for (r, t) in [(3, 5), (5, 3), (1, 4), (4, 1)] {
            let cm = decompose_channel(random_matrix(r, t, 9), DEFAULT_RANK_TOLERANCE).unwrap();
            assert_eq!(cm.u().shape(), (r, r));
            assert_eq!(cm.v().shape(), (t, t));
            assert!(unitarity_residual(cm.u()) <= 1e-10);
            assert!(unitarity_residual(cm.v()) <= 1e-10);
            assert!(cm.reconstruction_residual() <= 1e-10);
            assert_eq!(cm.rank(), r.min(t));
        }
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let cm = decompose_channel(CMatrix::zeros(3, 3), DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(cm.rank(), 0);
        assert!(cm.is_physical());
        assert_eq!(noise_loading(&cm).unwrap().coefficients, vec![1.0; 3]);
    }

    #[test]
    fn rejects_non_finite() {
        let mut h = CMatrix::identity(2, 2);
        h[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            decompose_channel(h, DEFAULT_RANK_TOLERANCE),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn lossless_eigen_channel_has_zero_loss() {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 0)] = Complex64::new(1.0, 0.0);
        h[(1, 1)] = Complex64::new(0.5, 0.0);
        let cm = decompose_channel(h, DEFAULT_RANK_TOLERANCE).unwrap();
        let s = noise_loading(&cm).unwrap();
        assert_eq!(s.coefficients[0], 0.0);
        assert_relative_eq!(s.coefficients[1], 0.75_f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn completeness_holds_on_random_physical_channel() {
        let h = scaled_to_norm(random_matrix(6, 4, 3), 0.9);
        let cm = decompose_channel(h, DEFAULT_RANK_TOLERANCE).unwrap();
        let s = noise_loading(&cm).unwrap();
        // explicit Σ Σ† + S S† assembled entry by entry
        let n = cm.n_rx();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let sig = if i == j && i < cm.singular_values().len() {
                    cm.singular_values()[i].powi(2)
                } else {
                    0.0
                };
                let loss = if i == j { s.coefficients[i].powi(2) } else { 0.0 };
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((sig + loss - target).abs());
            }
        }
        assert!(worst <= 1e-10);
        assert!(s.completeness_residual(&cm) <= 1e-10);
    }

    #[test]
    fn non_physical_channel_is_rejected() {
        let h = CMatrix::identity(2, 2) * Complex64::new(1.5, 0.0);
        let cm = decompose_channel(h, DEFAULT_RANK_TOLERANCE).unwrap();
        assert!(!cm.is_physical());
        assert!(matches!(noise_loading(&cm), Err(Error::NonPhysicalChannel(_))));
    }
}
