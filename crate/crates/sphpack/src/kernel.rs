use nalgebra::SVector;

use crate::error::{Error, Result};

/// Wendland C2 smoothing kernel with compact support of radius `2h`.
///
/// `W(q) = alpha_d (1 - q/2)^4 (2q + 1)` for `q = r/h` in `[0, 2]`, with
/// `alpha_2 = 7/(4 pi h^2)` and `alpha_3 = 21/(16 pi h^3)`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingKernel<const D: usize> {
    h: f64,
    alpha: f64,
}

impl<const D: usize> SmoothingKernel<D> {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::ShapeValidation(format!(
                "smoothing length must be positive, got {h}"
            )));
        }
        let alpha = match D {
            2 => 7.0 / (4.0 * std::f64::consts::PI * h * h),
            3 => 21.0 / (16.0 * std::f64::consts::PI * h * h * h),
            _ => {
                return Err(Error::ShapeValidation(format!(
                    "kernel dimension must be 2 or 3, got {D}"
                )))
            }
        };
        Ok(Self { h, alpha })
    }

    pub fn smoothing_length(&self) -> f64 {
        self.h
    }

    /// Support radius, exactly `2h`.
    pub fn cutoff(&self) -> f64 {
        2.0 * self.h
    }

    /// Kernel value at separation `r >= 0`.
    pub fn value(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        let q = r / self.h;
        if q >= 2.0 {
            return 0.0;
        }
        let t = 1.0 - 0.5 * q;
        let t2 = t * t;
        self.alpha * t2 * t2 * (2.0 * q + 1.0)
    }

    /// dW/dr at separation `r`.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        let q = r / self.h;
        if q >= 2.0 {
            return 0.0;
        }
        let t = 1.0 - 0.5 * q;
        -5.0 * q * self.alpha * t * t * t / self.h
    }

    /// Gradient with respect to the first argument of `W(|r_i - r_j|)`,
    /// evaluated at `rvec = r_i - r_j`. Zero at the origin and outside the
    /// support; antisymmetric under `rvec -> -rvec`.
    pub fn gradient(&self, rvec: SVector<f64, D>) -> SVector<f64, D> {
        let r = rvec.norm();
        let q = r / self.h;
        if q >= 2.0 || r == 0.0 {
            return SVector::zeros();
        }
        // dW/dq * (1/h) * rvec/r with dW/dq = -5 q alpha (1 - q/2)^3; the
        // q/r factor cancels the unit-vector division, removing the r = 0
        // singularity.
        let t = 1.0 - 0.5 * q;
        let coeff = -5.0 * self.alpha * t * t * t / (self.h * self.h);
        rvec * coeff
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector2;

    #[test]
    fn value_at_support_edge_is_zero() {
        let k = SmoothingKernel::<2>::new(0.7).unwrap();
        assert_eq!(k.value(1.4), 0.0);
        assert_eq!(k.value(2.0), 0.0);
    }

    #[test]
    fn value_at_origin_2d() {
        let k = SmoothingKernel::<2>::new(1.0).unwrap();
        assert_relative_eq!(k.value(0.0), 7.0 / (4.0 * std::f64::consts::PI), epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SmoothingKernel::<2>::new(0.0).is_err());
        assert!(SmoothingKernel::<2>::new(-1.0).is_err());
        assert!(SmoothingKernel::<4>::new(1.0).is_err());
    }

    /// Dense polar/spherical quadrature of the unit-mass normalization.
    fn quadrature_mass(dim: usize, h: f64) -> f64 {
        let n = 40_000;
        let dr = 2.0 * h / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            let r = (i as f64 + 0.5) * dr;
            let shell = match dim {
                2 => {
                    let k = SmoothingKernel::<2>::new(h).unwrap();
                    2.0 * std::f64::consts::PI * r * k.value(r)
                }
                3 => {
                    let k = SmoothingKernel::<3>::new(h).unwrap();
                    4.0 * std::f64::consts::PI * r * r * k.value(r)
                }
                _ => unreachable!(),
            };
            total += shell * dr;
        }
        total
    }

    #[test]
    fn normalization_2d_and_3d() {
        assert_relative_eq!(quadrature_mass(2, 0.65), 1.0, epsilon = 1e-4);
        assert_relative_eq!(quadrature_mass(3, 1.3), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn gradient_zero_at_origin_and_antisymmetric() {
        let k = SmoothingKernel::<2>::new(1.0).unwrap();
        assert_eq!(k.gradient(Vector2::zeros()), Vector2::zeros());
        let r = Vector2::new(0.3, -0.8);
        assert_eq!(k.gradient(-r), -k.gradient(r));
        assert_eq!(k.gradient(Vector2::new(3.0, 0.0)), Vector2::zeros());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = 0.9;
        let k = SmoothingKernel::<2>::new(h).unwrap();
        let delta = 1e-5 * h;
        for &r in &[0.1, 0.4, 0.9, 1.3, 1.7] {
            let r = r * h;
            let fd = (k.value(r + delta) - k.value(r - delta)) / (2.0 * delta);
            let grad = k.gradient(Vector2::new(r, 0.0));
            assert_relative_eq!(grad.x, fd, epsilon = 1e-6 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn radial_monotonicity() {
        let k = SmoothingKernel::<3>::new(1.0).unwrap();
        for i in 0..=200 {
            let r = 2.0 * i as f64 / 200.0;
            assert!(k.radial_derivative(r) <= 0.0);
        }
    }
}
