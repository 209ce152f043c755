//! Named analytic diffeomorphisms of the sphere with exact inverses.

use nalgebra::Vector3;

use crate::moebius::map::MoebiusMap;
use crate::moebius::rotation::Rotation3;

/// A caller-declared diffeomorphism of the sphere with an analytic inverse.
///
/// `Twist` rotates each latitude circle about the x³ axis by the angle
/// `amplitude · (1 − (x³)²)`; it is area preserving but not conformal.
#[derive(Debug, Clone, PartialEq)]
pub enum Diffeo {
    Rotation(Rotation3),
    Moebius(MoebiusMap),
    Twist { amplitude: f64 },
}

impl Diffeo {
    /// Image of a unit vector.
    pub fn apply(&self, x: &Vector3<f64>) -> Vector3<f64> {
        match self {
            Diffeo::Rotation(r) => r.apply(x),
            Diffeo::Moebius(m) => m.apply(x),
            Diffeo::Twist { amplitude } => {
                let a = amplitude * (1.0 - x.z * x.z);
                let (s, c) = a.sin_cos();
                Vector3::new(c * x.x - s * x.y, s * x.x + c * x.y, x.z)
            }
        }
    }

    /// The inverse diffeomorphism.
    pub fn inverse(&self) -> Diffeo {
        match self {
            Diffeo::Rotation(r) => Diffeo::Rotation(r.inverse()),
            Diffeo::Moebius(m) => Diffeo::Moebius(m.inverse()),
            Diffeo::Twist { amplitude } => Diffeo::Twist { amplitude: -amplitude },
        }
    }

    /// Area distortion |det dφ|(x) relative to the round metric.
    pub fn jacobian_det(&self, x: &Vector3<f64>) -> f64 {
        match self {
            Diffeo::Rotation(_) | Diffeo::Twist { .. } => 1.0,
            Diffeo::Moebius(m) => m.jacobian_det(x),
        }
    }

    /// True when the map is conformal for the round metric.
    pub fn is_conformal(&self) -> bool {
        !matches!(self, Diffeo::Twist { amplitude } if *amplitude != 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twist_inverse_and_area_preservation() {
        let d = Diffeo::Twist { amplitude: 0.4 };
        let inv = d.inverse();
        let h = 1e-5;
        for i in 0..30 {
            let z = -0.95 + 1.9 * i as f64 / 29.0;
            let r = (1.0 - z * z).sqrt();
            let t = 0.3 * i as f64;
            let x = Vector3::new(r * t.cos(), r * t.sin(), z);
            assert!((inv.apply(&d.apply(&x)) - x).norm() < 1e-14);
            // Finite-difference area element in (θ, φ): sinθ' dθ' dφ' / sinθ dθ dφ.
            let th = z.acos();
            let pt = |th: f64, ph: f64| d.apply(&Vector3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()));
            let dth = (pt(th + h, t) - pt(th - h, t)) / (2.0 * h);
            let dph = (pt(th, t + h) - pt(th, t - h)) / (2.0 * h);
            let area = dth.cross(&dph).norm() / th.sin();
            assert!((area - 1.0).abs() < 1e-8, "{area}");
        }
        assert!(!d.is_conformal());
    }
}
