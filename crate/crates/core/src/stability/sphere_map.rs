//! Self-maps of the sphere: exact compositions or grid samples.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::moebius::{Diffeo, MoebiusMap, Rotation3};
use crate::s2field::GridSpec;

/// One factor of an exact composition.
#[derive(Debug, Clone, PartialEq)]
pub enum MapFactor {
    Moebius(MoebiusMap),
    Diffeo(Diffeo),
}

impl MapFactor {
    fn apply(&self, x: &Vector3<f64>) -> Vector3<f64> {
        match self {
            MapFactor::Moebius(m) => m.apply(x),
            MapFactor::Diffeo(d) => d.apply(x),
        }
    }

    fn inverse(&self) -> MapFactor {
        match self {
            MapFactor::Moebius(m) => MapFactor::Moebius(m.inverse()),
            MapFactor::Diffeo(d) => MapFactor::Diffeo(d.inverse()),
        }
    }

    fn as_moebius(&self) -> Option<MoebiusMap> {
        match self {
            MapFactor::Moebius(m) => Some(*m),
            MapFactor::Diffeo(Diffeo::Moebius(m)) => Some(*m),
            MapFactor::Diffeo(Diffeo::Rotation(r)) => Some(MoebiusMap::from_rotation(r)),
            MapFactor::Diffeo(Diffeo::Twist { amplitude }) if *amplitude == 0.0 => Some(MoebiusMap::identity()),
            MapFactor::Diffeo(Diffeo::Twist { .. }) => None,
        }
    }
}

/// A self-map of the sphere.
///
/// `Composition(vec![A, B, C])` is A∘B∘C (C is applied first). Sampled maps
/// store the image of every node of a grid and are never inverted.
#[derive(Debug, Clone, PartialEq)]
pub enum SphereMap {
    Composition(Vec<MapFactor>),
    Sampled { grid: GridSpec, images: Vec<Vector3<f64>> },
}

impl SphereMap {
    /// The identity map.
    pub fn identity() -> Self {
        SphereMap::Composition(Vec::new())
    }

    /// A single Möbius map.
    pub fn moebius(m: MoebiusMap) -> Self {
        SphereMap::Composition(vec![MapFactor::Moebius(m)])
    }

    /// A single named diffeomorphism.
    pub fn diffeo(d: Diffeo) -> Self {
        SphereMap::Composition(vec![MapFactor::Diffeo(d)])
    }

    /// An orthogonal map.
    pub fn rotation(r: &Rotation3) -> Self {
        Self::diffeo(Diffeo::Rotation(*r))
    }

    /// Grid samples of a map; images must be unit vectors to 10⁻⁸.
    ///
    /// # Errors
    /// [`Error::Representation`] for a length mismatch or non-unit images.
    pub fn sampled(grid: &GridSpec, images: Vec<Vector3<f64>>) -> Result<Self> {
        if images.len() != grid.len() {
            return Err(Error::Representation(format!("{} images for a grid of {} nodes", images.len(), grid.len())));
        }
        if let Some(i) = images.iter().position(|p| !((p.norm() - 1.0).abs() <= 1e-8)) {
            return Err(Error::Representation(format!("image {i} is not a unit vector")));
        }
        Ok(SphereMap::Sampled { grid: grid.clone(), images })
    }

    /// True for sampled representations.
    pub fn is_sampled(&self) -> bool {
        matches!(self, SphereMap::Sampled { .. })
    }

    /// `self ∘ other` (apply `other` first).
    ///
    /// # Errors
    /// [`Error::Representation`] when either side is sampled.
    pub fn compose(&self, other: &SphereMap) -> Result<SphereMap> {
        match (self, other) {
            (SphereMap::Composition(a), SphereMap::Composition(b)) => {
                let mut f = a.clone();
                f.extend(b.iter().cloned());
                Ok(SphereMap::Composition(f))
            }
            _ => Err(Error::Representation("sampled maps cannot be composed".into())),
        }
    }

    /// Exact inverse of a composition.
    ///
    /// # Errors
    /// [`Error::Representation`] for sampled maps (never inverted numerically).
    pub fn inverse(&self) -> Result<SphereMap> {
        match self {
            SphereMap::Composition(f) => Ok(SphereMap::Composition(f.iter().rev().map(MapFactor::inverse).collect())),
            SphereMap::Sampled { .. } => Err(Error::Representation("sampled maps are not invertible".into())),
        }
    }

    /// Image of an arbitrary point.
    ///
    /// # Errors
    /// [`Error::Representation`] for sampled maps.
    pub fn apply(&self, x: &Vector3<f64>) -> Result<Vector3<f64>> {
        match self {
            SphereMap::Composition(f) => Ok(f.iter().rev().fold(*x, |p, m| m.apply(&p))),
            SphereMap::Sampled { .. } => Err(Error::Representation("sampled maps are only known at nodes".into())),
        }
    }

    /// Images of all nodes of `grid`.
    ///
    /// # Errors
    /// [`Error::Representation`] when a sampled map lives on another grid.
    pub fn images_on(&self, grid: &GridSpec) -> Result<Vec<Vector3<f64>>> {
        match self {
            SphereMap::Composition(_) => grid.nodes().iter().map(|x| self.apply(x)).collect(),
            SphereMap::Sampled { grid: g, images } => {
                if g.same_as(grid) {
                    Ok(images.clone())
                } else {
                    Err(Error::Representation("sampled map lives on a different grid".into()))
                }
            }
        }
    }

    /// The single Möbius map equal to this composition, if every factor is
    /// conformal.
    pub fn as_moebius(&self) -> Option<MoebiusMap> {
        match self {
            SphereMap::Composition(f) => {
                f.iter().try_fold(MoebiusMap::identity(), |acc, m| m.as_moebius().map(|mm| acc.compose(&mm)))
            }
            SphereMap::Sampled { .. } => None,
        }
    }

    /// Pushforward of the tangent vector `v` at `x`, by central differences
    /// with step `h` along the great circle through `x` in direction `v`,
    /// projected to the tangent plane at the image.
    ///
    /// # Errors
    /// [`Error::Representation`] for sampled maps.
    pub fn pushforward(&self, x: &Vector3<f64>, v: &Vector3<f64>, h: f64) -> Result<Vector3<f64>> {
        let fx = self.apply(x)?;
        let plus = self.apply(&(x * h.cos() + v * h.sin()))?;
        let minus = self.apply(&(x * h.cos() - v * h.sin()))?;
        let d = (plus - minus) / (2.0 * h.sin());
        Ok(d - fx * fx.dot(&d))
    }

    /// Sup-norm distance max_x |self(x) − R x| over the nodes of `grid`.
    ///
    /// # Errors
    /// As for [`SphereMap::images_on`].
    pub fn distance_to_rotation(&self, grid: &GridSpec, r: &Rotation3) -> Result<f64> {
        let imgs = self.images_on(grid)?;
        Ok(imgs.iter().enumerate().fold(0.0, |acc, (i, y)| acc.max((y - r.apply(&grid.node(i))).norm())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s2field::make_grid;

    #[test]
    fn composition_order_and_inverse() {
        let r = Rotation3::axis_angle(Vector3::z(), 0.5).unwrap();
        let s = MoebiusMap::scale(&Vector3::x(), 1.5).unwrap();
        let a = SphereMap::rotation(&r).compose(&SphereMap::moebius(s)).unwrap();
        let x = Vector3::new(0.0, 0.6, 0.8);
        assert!((a.apply(&x).unwrap() - r.apply(&s.apply(&x))).norm() < 1e-14);
        let back = a.inverse().unwrap().apply(&a.apply(&x).unwrap()).unwrap();
        assert!((back - x).norm() < 1e-12);
        let m = a.as_moebius().unwrap();
        assert!((m.apply(&x) - a.apply(&x).unwrap()).norm() < 1e-12);
        assert!(SphereMap::diffeo(Diffeo::Twist { amplitude: 0.1 }).as_moebius().is_none());
    }

    #[test]
    fn sampled_maps_refuse_inversion() {
        let g = make_grid(4).unwrap();
        let m = SphereMap::sampled(&g, g.nodes()).unwrap();
        assert!(matches!(m.inverse(), Err(Error::Representation(_))));
        assert!(SphereMap::sampled(&g, vec![Vector3::z(); 3]).is_err());
        assert_eq!(m.images_on(&g).unwrap(), g.nodes());
    }

    #[test]
    fn pushforward_of_rotation_is_exact_direction() {
        let r = Rotation3::axis_angle(Vector3::new(1.0, 2.0, 0.5), 0.9).unwrap();
        let m = SphereMap::rotation(&r);
        let d = m.pushforward(&Vector3::z(), &Vector3::x(), 1e-4).unwrap();
        assert!((d.normalize() - r.apply(&Vector3::x())).norm() < 1e-12);
    }
}
