//! Spin-wave eigenvalue spectrum of the periodic square lattice.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::{CompensatedSum, Real};

/// Eigenvalues of the discrete Laplacian on an L x L periodic lattice,
/// excluding the zero mode, plus the derived variance factor
/// S = (1 / 2N^2) * sum(1 / lambda_k^2) with N = L^2.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpectrum<T> {
    side: u32,
    sites: u32,
    eigenvalues: Vec<T>,
    variance_factor: T,
}

impl<T: Real> LatticeSpectrum<T> {
    /// Enumerates all Fourier modes (n1, n2) in {0..L-1}^2 except (0,0):
    /// lambda = 4 - 2 cos(2 pi n1 / L) - 2 cos(2 pi n2 / L).
    pub fn new(side: u32) -> Result<Self> {
        if side < 2 {
            return Err(Error::invalid(format!(
                "lattice side must be at least 2, got {side}"
            )));
        }
        let sites = side * side;
        let two = T::of(2.0);
        let four = T::of(4.0);
        let tau_over_side = T::TAU() / T::of(f64::from(side));
        let mut eigenvalues = Vec::with_capacity(sites as usize - 1);
        for n1 in 0..side {
            for n2 in 0..side {
                if n1 == 0 && n2 == 0 {
                    continue;
                }
                let a = (tau_over_side * T::of(f64::from(n1))).cos();
                let b = (tau_over_side * T::of(f64::from(n2))).cos();
                eigenvalues.push(four - two * a - two * b);
            }
        }
        let n = T::of(f64::from(sites));
        let mut sum = CompensatedSum::new();
        for &lam in &eigenvalues {
            sum.add((lam * lam).recip());
        }
        let variance_factor = sum.total() / (two * n * n);
        Ok(Self {
            side,
            sites,
            eigenvalues,
            variance_factor,
        })
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    /// N = L^2.
    pub fn sites(&self) -> u32 {
        self.sites
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// S, the variance of the unnormalized mode sum.
    pub fn variance_factor(&self) -> T {
        self.variance_factor
    }

    /// The mode-product part of the inversion integrand:
    /// prod_k exp(-i x / (2 N lambda_k)
    ///            + (i/2) arctan(x / (N lambda_k))
    ///            - (1/4) ln(1 + x^2 / (N lambda_k)^2)).
    ///
    /// Its magnitude is at most 1 and equals
    /// prod_k (1 + x^2 / (N lambda_k)^2)^(-1/4).
    pub fn characteristic_factor(&self, x: T) -> Complex<T> {
        let n = T::of(f64::from(self.sites));
        let half = T::of(0.5);
        let quarter = T::of(0.25);
        let mut log_magnitude = CompensatedSum::new();
        let mut phase = CompensatedSum::new();
        for &lam in &self.eigenvalues {
            let theta = x / (n * lam);
            log_magnitude.add(-quarter * theta.mul_add(theta, T::one()).ln());
            phase.add(half * (theta.atan() - theta));
        }
        Complex::from_polar(log_magnitude.total().exp(), phase.total())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn rejects_degenerate_lattice() {
        assert!(LatticeSpectrum::<f64>::new(1).is_err());
        assert!(LatticeSpectrum::<f64>::new(0).is_err());
    }

    #[test]
    fn l2_spectrum_is_4_4_8() {
        // cos(pi) = -1: modes (0,1) and (1,0) give 4, (1,1) gives 8.
        let spectrum = LatticeSpectrum::<f64>::new(2).unwrap();
        let mut eig = spectrum.eigenvalues().to_vec();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(eig.len(), 3);
        assert!((eig[0] - 4.0).abs() < 1e-12);
        assert!((eig[1] - 4.0).abs() < 1e-12);
        assert!((eig[2] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn l10_has_99_modes() {
        let spectrum = LatticeSpectrum::<f64>::new(10).unwrap();
        assert_eq!(spectrum.eigenvalues().len(), 99);
        assert_eq!(spectrum.sites(), 100);
    }

    #[test]
    fn variance_factor_matches_direct_enumeration() {
        // Independent brute-force loop over all modes, written without
        // reusing the spectrum's own eigenvalue list.
        let side = 10u32;
        let n = (side * side) as f64;
        let mut sum = 0.0f64;
        for n1 in 0..side {
            for n2 in 0..side {
                if n1 == 0 && n2 == 0 {
                    continue;
                }
                let lam = 4.0
                    - 2.0 * (2.0 * std::f64::consts::PI * f64::from(n1) / f64::from(side)).cos()
                    - 2.0 * (2.0 * std::f64::consts::PI * f64::from(n2) / f64::from(side)).cos();
                sum += 1.0 / (lam * lam);
            }
        }
        let expected = sum / (2.0 * n * n);
        let spectrum = LatticeSpectrum::<f64>::new(10).unwrap();
        assert!(
            (spectrum.variance_factor() - expected).abs() <= 1e-15 * expected,
            "S = {} vs brute force {}",
            spectrum.variance_factor(),
            expected
        );
    }

    #[test]
    fn characteristic_factor_is_one_at_zero() {
        let spectrum = LatticeSpectrum::<f64>::new(10).unwrap();
        let c = spectrum.characteristic_factor(0.0);
        assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn characteristic_factor_magnitude_matches_envelope() {
        let spectrum = LatticeSpectrum::<f64>::new(10).unwrap();
        let n = spectrum.sites() as f64;
        for &x in &[0.7, 5.0, 33.0, 120.0, 400.0] {
            let c = spectrum.characteristic_factor(x);
            let envelope: f64 = spectrum
                .eigenvalues()
                .iter()
                .map(|&lam| (1.0 + (x / (n * lam)).powi(2)).powf(-0.25))
                .product();
            assert!(
                (c.norm() - envelope).abs() <= 1e-12 * envelope,
                "x={x}: |C|={} envelope={}",
                c.norm(),
                envelope
            );
            assert!(c.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn per_mode_identity_holds_pointwise() {
        // (1 - i theta)^(-1/2) = (1 + theta^2)^(-1/4) e^{(i/2) arctan theta},
        // checked by direct complex arithmetic for 100 deterministic thetas.
        for i in 0..100 {
            let theta = -50.0 + (i as f64) * 1.01;
            let direct = Complex64::new(1.0, -theta).powf(-0.5);
            let stated = Complex64::from_polar(
                (1.0 + theta * theta).powf(-0.25),
                0.5 * theta.atan(),
            );
            assert!(
                (direct - stated).norm() < 1e-12,
                "theta={theta}: {direct} vs {stated}"
            );
        }
    }
}
