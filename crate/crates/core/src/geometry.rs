//! Node placement, RIS element grid, link distances and angles.
//!
//! Frame: the RIS lies in the Y-Z plane facing +x; network nodes sit on the
//! X-Y plane (z = 0) with x ≥ 0. The elevation υ of a node is the angle between
//! the RIS-to-node vector and +x; the azimuth μ is the angle of its projection
//! on the Y-Z plane measured from +y towards +z.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Euclidean distance between two points.
pub fn link_distance<T: Real>(a: &Point3<T>, b: &Point3<T>) -> T {
    a.sub(b).norm()
}

/// Uniform planar RIS array of `n_z × n_y` elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisArray<T> {
    pub n_z: usize,
    pub n_y: usize,
    pub d_ye: T,
    pub d_ze: T,
    pub b_q: u32,
    /// Grid anchor; element `(m_z, m_y)` sits at `origin + (0, m_y·d_ye, m_z·d_ze)`.
    pub origin: Point3<T>,
}

impl<T: Real> RisArray<T> {
    pub fn new(n_z: usize, n_y: usize, d_ye: T, d_ze: T, b_q: u32) -> Result<Self> {
        Self::with_origin(n_z, n_y, d_ye, d_ze, b_q, Point3::origin())
    }

    pub fn with_origin(n_z: usize, n_y: usize, d_ye: T, d_ze: T, b_q: u32, origin: Point3<T>) -> Result<Self> {
        if n_z == 0 || n_y == 0 {
            return Err(domain("RIS dimensions must be positive"));
        }
        if !(d_ye > T::zero() && d_ze > T::zero() && d_ye.is_finite() && d_ze.is_finite()) {
            return Err(domain("RIS element spacing must be positive and finite"));
        }
        if b_q == 0 {
            return Err(domain("phase quantization needs at least one bit"));
        }
        if !origin.is_finite() || origin.x != T::zero() {
            return Err(domain("RIS origin must be finite and lie on the Y-Z plane"));
        }
        Ok(Self {
            n_z,
            n_y,
            d_ye,
            d_ze,
            b_q,
            origin,
        })
    }

    pub fn n_total(&self) -> usize {
        self.n_z * self.n_y
    }

    /// Position of element `(m_z, m_y)`, both 1-based.
    pub fn element_position(&self, m_z: usize, m_y: usize) -> Result<Point3<T>> {
        if m_z == 0 || m_z > self.n_z || m_y == 0 || m_y > self.n_y {
            return Err(domain(format!(
                "element ({m_z}, {m_y}) outside 1..={} × 1..={}",
                self.n_z, self.n_y
            )));
        }
        Ok(Point3::new(
            self.origin.x,
            self.origin.y + T::from_usize(m_y).unwrap() * self.d_ye,
            self.origin.z + T::from_usize(m_z).unwrap() * self.d_ze,
        ))
    }

    /// Geometric center of the element grid.
    pub fn center(&self) -> Point3<T> {
        let half = lit::<T>(0.5);
        Point3::new(
            self.origin.x,
            self.origin.y + (T::from_usize(self.n_y).unwrap() + T::one()) * half * self.d_ye,
            self.origin.z + (T::from_usize(self.n_z).unwrap() + T::one()) * half * self.d_ze,
        )
    }

    /// All element positions in row-major `(m_z, m_y)` order.
    pub fn elements(&self) -> Vec<Point3<T>> {
        let mut out = Vec::with_capacity(self.n_total());
        for m_z in 1..=self.n_z {
            for m_y in 1..=self.n_y {
                out.push(self.element_position(m_z, m_y).expect("indices in range"));
            }
        }
        out
    }
}

/// Positions of the five network nodes plus the RIS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout<T> {
    pub d_t: Point3<T>,
    pub d_r: Point3<T>,
    pub u_t: Point3<T>,
    pub u_r: Point3<T>,
    pub bs: Point3<T>,
    pub ris: RisArray<T>,
}

impl<T: Real> NetworkLayout<T> {
    pub fn new(
        d_t: Point3<T>,
        d_r: Point3<T>,
        u_t: Point3<T>,
        u_r: Point3<T>,
        bs: Point3<T>,
        ris: RisArray<T>,
    ) -> Result<Self> {
        let nodes = [("D_T", d_t), ("D_R", d_r), ("U_T", u_t), ("U_R", u_r), ("BS", bs)];
        for (name, p) in &nodes {
            if !p.is_finite() {
                return Err(domain(format!("{name} position is not finite")));
            }
            if p.z != T::zero() {
                return Err(domain(format!("{name} must lie on the X-Y plane (z = 0)")));
            }
            if p.x < T::zero() {
                return Err(domain(format!("{name} must satisfy x ≥ 0")));
            }
        }
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                if nodes[i].1 == nodes[j].1 {
                    return Err(Error::DegenerateGeometry(format!(
                        "{} and {} coincide",
                        nodes[i].0, nodes[j].0
                    )));
                }
            }
        }
        Ok(Self {
            d_t,
            d_r,
            u_t,
            u_r,
            bs,
            ris,
        })
    }
}

/// Elevation/azimuth pair of a node seen from the RIS.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Angles<T> {
    /// υ, radians from boresight (+x).
    pub elevation: T,
    /// μ, radians in (−π, π], from +y towards +z.
    pub azimuth: T,
}

/// Angles of `node` relative to the RIS reference point.
pub fn elevation_azimuth<T: Real>(node: &Point3<T>, ris_center: &Point3<T>) -> Result<Angles<T>> {
    let v = node.sub(ris_center);
    let r = v.norm();
    if !(r > T::zero()) {
        return Err(domain("angle of a zero-length vector is undefined"));
    }
    let c = (v.x / r).max(-T::one()).min(T::one());
    let azimuth = if v.y == T::zero() && v.z == T::zero() {
        T::zero()
    } else {
        v.z.atan2(v.y)
    };
    Ok(Angles {
        elevation: c.acos(),
        azimuth,
    })
}

/// Point on the RIS used for node-to-RIS distances and angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferencePoint {
    #[default]
    Center,
    Element { m_z: usize, m_y: usize },
}

/// Distances and angles consumed by the path-loss formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry<T> {
    pub d_dt_ris: T,
    pub d_ris_dr: T,
    pub d_ris_bs: T,
    pub d_ut_ris: T,
    /// Horizontal D_T–D_R distance of the direct link.
    pub d_direct: T,
    /// U_T–D_R and U_T–BS straight-line distances.
    pub d_ut_dr: T,
    pub d_ut_bs: T,
    /// D_T → RIS → D_R.
    pub d_d: T,
    /// D_T → RIS → BS.
    pub d_c1: T,
    /// BS → RIS → D_R.
    pub d_c2: T,
    pub angles_dt: Angles<T>,
    pub angles_dr: Angles<T>,
    pub angles_bs: Angles<T>,
    pub angles_ut: Angles<T>,
}

pub fn path_geometry<T: Real>(layout: &NetworkLayout<T>, reference: ReferencePoint) -> Result<PathGeometry<T>> {
    let r = match reference {
        ReferencePoint::Center => layout.ris.center(),
        ReferencePoint::Element { m_z, m_y } => layout.ris.element_position(m_z, m_y)?,
    };
    let leg = |name: &str, p: &Point3<T>| -> Result<T> {
        let d = link_distance(p, &r);
        if d > T::zero() {
            Ok(d)
        } else {
            Err(Error::DegenerateGeometry(format!(
                "{name} coincides with the RIS reference point"
            )))
        }
    };
    let d_dt_ris = leg("D_T", &layout.d_t)?;
    let d_ris_dr = leg("D_R", &layout.d_r)?;
    let d_ris_bs = leg("BS", &layout.bs)?;
    let d_ut_ris = leg("U_T", &layout.u_t)?;
    let dx = layout.d_t.x - layout.d_r.x;
    let dy = layout.d_t.y - layout.d_r.y;
    Ok(PathGeometry {
        d_dt_ris,
        d_ris_dr,
        d_ris_bs,
        d_ut_ris,
        d_direct: (dx * dx + dy * dy).sqrt(),
        d_ut_dr: link_distance(&layout.u_t, &layout.d_r),
        d_ut_bs: link_distance(&layout.u_t, &layout.bs),
        d_d: d_dt_ris + d_ris_dr,
        d_c1: d_dt_ris + d_ris_bs,
        d_c2: d_ris_bs + d_ris_dr,
        angles_dt: elevation_azimuth(&layout.d_t, &r)?,
        angles_dr: elevation_azimuth(&layout.d_r, &r)?,
        angles_bs: elevation_azimuth(&layout.bs, &r)?,
        angles_ut: elevation_azimuth(&layout.u_t, &r)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new(x, y, z)
    }

    #[test]
    fn element_positions() {
        let ris = RisArray::new(4, 4, 0.05f64, 0.05, 2).unwrap();
        let e = ris.element_position(1, 1).unwrap();
        assert!((e.y - 0.05).abs() < 1e-15 && (e.z - 0.05).abs() < 1e-15 && e.x == 0.0);
        let e = ris.element_position(2, 3).unwrap();
        assert!((e.y - 0.15).abs() < 1e-15 && (e.z - 0.10).abs() < 1e-15);
        assert!(ris.element_position(0, 1).is_err());
        assert!(ris.element_position(1, 5).is_err());
        assert_eq!(ris.elements().len(), 16);
    }

    #[test]
    fn rejects_bad_arrays() {
        assert!(RisArray::new(0, 4, 0.05, 0.05, 2).is_err());
        assert!(RisArray::new(4, 4, 0.0, 0.05, 2).is_err());
        assert!(RisArray::new(4, 4, 0.05, 0.05, 0).is_err());
        assert!(RisArray::with_origin(1, 1, 1.0, 1.0, 1, p(1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn distances() {
        assert_eq!(link_distance(&p(3.0, 4.0, 0.0), &p(0.0, 0.0, 0.0)), 5.0);
        assert_eq!(link_distance(&p(1.0, 1.0, 1.0), &p(1.0, 1.0, 1.0)), 0.0);
        assert!((link_distance(&p(1.0, 2.0, 0.0), &p(0.0, 2.0, 2.0)) - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn angles() {
        let o = p(0.0, 0.0, 0.0);
        assert_eq!(elevation_azimuth(&p(5.0, 0.0, 0.0), &o).unwrap().elevation, 0.0);
        let a = elevation_azimuth(&p(0.0, 3.0, 0.0), &o).unwrap();
        assert!((a.elevation - FRAC_PI_2).abs() < 1e-15);
        let a = elevation_azimuth(&p(1.0, 1.0, 0.0), &o).unwrap();
        assert!((a.elevation - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(a.azimuth, 0.0);
        assert!(elevation_azimuth(&o, &o).is_err());
    }

    fn centered_ris() -> RisArray<f64> {
        // 1×1 array whose only element (and center) is the origin.
        RisArray::with_origin(1, 1, 1.0, 1.0, 1, p(0.0, -1.0, -1.0)).unwrap()
    }

    #[test]
    fn path_lengths_through_center() {
        let layout = NetworkLayout::new(
            p(3.0, 4.0, 0.0),
            p(4.0, 3.0, 0.0),
            p(10.0, 10.0, 0.0),
            p(20.0, 5.0, 0.0),
            p(3.0, -4.0, 0.0),
            centered_ris(),
        )
        .unwrap();
        let g = path_geometry(&layout, ReferencePoint::Center).unwrap();
        assert!((g.d_d - 10.0).abs() < 1e-12);
        assert!((g.d_dt_ris - g.d_ris_bs).abs() < 1e-12);
        assert!((g.d_direct - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn layout_validation() {
        let ris = centered_ris();
        let a = p(1.0, 0.0, 0.0);
        let b = p(2.0, 0.0, 0.0);
        let c = p(3.0, 0.0, 0.0);
        let d = p(4.0, 0.0, 0.0);
        assert!(NetworkLayout::new(a, b, c, d, p(5.0, 0.0, 1.0), ris).is_err());
        assert!(NetworkLayout::new(a, b, c, d, p(-5.0, 0.0, 0.0), ris).is_err());
        assert!(matches!(
            NetworkLayout::new(a, b, c, d, a, ris),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn node_on_reference_point_is_degenerate() {
        // Single element at (0, 1, 0), which D_T occupies.
        let ris = RisArray::with_origin(1, 1, 1.0, 1.0, 1, p(0.0, 0.0, -1.0)).unwrap();
        let layout = NetworkLayout::new(
            p(0.0, 1.0, 0.0),
            p(1.0, 0.0, 0.0),
            p(2.0, 0.0, 0.0),
            p(3.0, 0.0, 0.0),
            p(4.0, 0.0, 0.0),
            ris,
        )
        .unwrap();
        assert!(matches!(
            path_geometry(&layout, ReferencePoint::Center),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    fn arb_node() -> impl Strategy<Value = Point3<f64>> {
        (0.1f64..300.0, -150.0f64..150.0).prop_map(|(x, y)| Point3::new(x, y, 0.0))
    }

    proptest! {
        #[test]
        fn composite_lengths(dt in arb_node(), dr in arb_node(), ut in arb_node(), ur in arb_node(), bs in arb_node()) {
            let ris = RisArray::new(10, 10, 0.0625, 0.0625, 2).unwrap();
            if let Ok(layout) = NetworkLayout::new(dt, dr, ut, ur, bs, ris) {
                let g = path_geometry(&layout, ReferencePoint::Center).unwrap();
                let c = ris.center();
                let bs_leg = link_distance(&bs, &c);
                let dr_leg = link_distance(&dr, &c);
                prop_assert!((g.d_c2 - (bs_leg + dr_leg)).abs() < 1e-9);
                prop_assert!(g.d_d + 1e-9 >= link_distance(&dt, &dr));
                for a in [g.angles_dt, g.angles_dr, g.angles_bs, g.angles_ut] {
                    prop_assert!(a.elevation >= 0.0 && a.elevation <= FRAC_PI_2 + 1e-12);
                }
            }
        }

        #[test]
        fn grid_span(n_z in 1usize..12, n_y in 1usize..12, d in 0.01f64..1.0) {
            let ris = RisArray::new(n_z, n_y, d, d, 1).unwrap();
            for e in ris.elements() {
                prop_assert!(e.y > 0.0 && e.y <= n_y as f64 * d + 1e-12);
                prop_assert!(e.z > 0.0 && e.z <= n_z as f64 * d + 1e-12);
            }
        }
    }
}
