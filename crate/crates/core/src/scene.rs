//! Room geometry, surface discretization and Lambertian primitives.
//!
//! Coordinates: origin at a floor corner, `x` along the room length, `y`
//! along the width, `z` up. All lengths are meters.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light used for path delays [m/s].
pub const SPEED_OF_LIGHT: f64 = 2.9979e8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const UP: Vec3 = Vec3::new(0.0, 0.0, 1.0);
    pub const DOWN: Vec3 = Vec3::new(0.0, 0.0, -1.0);

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction. Returns `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Vec3::new(v[0], v[1], v[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Empty rectangular room with per-surface reflectivities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Room {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub wall_reflectivity: f64,
    pub ceiling_reflectivity: f64,
    pub floor_reflectivity: f64,
}

impl Default for Room {
    fn default() -> Self {
        Room {
            length: 8.0,
            width: 4.0,
            height: 3.0,
            wall_reflectivity: 0.8,
            ceiling_reflectivity: 0.8,
            floor_reflectivity: 0.3,
        }
    }
}

impl Room {
    pub fn new(
        length: f64,
        width: f64,
        height: f64,
        wall_reflectivity: f64,
        ceiling_reflectivity: f64,
        floor_reflectivity: f64,
    ) -> Result<Room> {
        let room = Room {
            length,
            width,
            height,
            wall_reflectivity,
            ceiling_reflectivity,
            floor_reflectivity,
        };
        room.validate()?;
        Ok(room)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("room.length", self.length),
            ("room.width", self.width),
            ("room.height", self.height),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be a positive length, got {v}")));
            }
        }
        for (name, v) in [
            ("room.wall_reflectivity", self.wall_reflectivity),
            ("room.ceiling_reflectivity", self.ceiling_reflectivity),
            ("room.floor_reflectivity", self.floor_reflectivity),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.is_finite()
            && (0.0..=self.length).contains(&p.x)
            && (0.0..=self.width).contains(&p.y)
            && (0.0..=self.height).contains(&p.z)
    }

    pub fn centroid(&self) -> Vec3 {
        Vec3::new(self.length / 2.0, self.width / 2.0, self.height / 2.0)
    }

    pub fn reflectivity(&self, surface: Surface) -> f64 {
        match surface {
            Surface::Floor => self.floor_reflectivity,
            Surface::Ceiling => self.ceiling_reflectivity,
            _ => self.wall_reflectivity,
        }
    }

    /// The two in-plane extents of a surface, in the order it is tiled.
    pub fn surface_extent(&self, surface: Surface) -> (f64, f64) {
        match surface {
            Surface::Floor | Surface::Ceiling => (self.length, self.width),
            Surface::WallSouth | Surface::WallNorth => (self.length, self.height),
            Surface::WallWest | Surface::WallEast => (self.width, self.height),
        }
    }

    pub fn surface_area(&self, surface: Surface) -> f64 {
        let (a, b) = self.surface_extent(surface);
        a * b
    }
}

/// One of the six planar faces of the room.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Surface {
    Floor,
    Ceiling,
    /// Wall at `y = 0`.
    WallSouth,
    /// Wall at `y = width`.
    WallNorth,
    /// Wall at `x = 0`.
    WallWest,
    /// Wall at `x = length`.
    WallEast,
}

impl Surface {
    pub const ALL: [Surface; 6] = [
        Surface::Floor,
        Surface::Ceiling,
        Surface::WallSouth,
        Surface::WallNorth,
        Surface::WallWest,
        Surface::WallEast,
    ];

    /// Walls and ceiling only.
    pub const WITHOUT_FLOOR: [Surface; 5] = [
        Surface::Ceiling,
        Surface::WallSouth,
        Surface::WallNorth,
        Surface::WallWest,
        Surface::WallEast,
    ];

    /// Normal pointing into the room.
    pub fn inward_normal(self) -> Vec3 {
        match self {
            Surface::Floor => Vec3::UP,
            Surface::Ceiling => Vec3::DOWN,
            Surface::WallSouth => Vec3::new(0.0, 1.0, 0.0),
            Surface::WallNorth => Vec3::new(0.0, -1.0, 0.0),
            Surface::WallWest => Vec3::new(1.0, 0.0, 0.0),
            Surface::WallEast => Vec3::new(-1.0, 0.0, 0.0),
        }
    }

    fn point(self, room: &Room, u: f64, v: f64) -> Vec3 {
        match self {
            Surface::Floor => Vec3::new(u, v, 0.0),
            Surface::Ceiling => Vec3::new(u, v, room.height),
            Surface::WallSouth => Vec3::new(u, 0.0, v),
            Surface::WallNorth => Vec3::new(u, room.width, v),
            Surface::WallWest => Vec3::new(0.0, u, v),
            Surface::WallEast => Vec3::new(room.length, u, v),
        }
    }
}

/// A square (or edge-clipped rectangular) Lambertian reflector patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceElement {
    pub center: Vec3,
    pub normal: Vec3,
    pub area: f64,
    pub reflectivity: f64,
    pub lambertian_order: f64,
    pub surface: Surface,
}

/// Ceiling-mounted transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessPoint {
    pub position: Vec3,
    pub orientation: Vec3,
    pub lambertian_order: f64,
    pub transmit_power: f64,
    pub efficiency: f64,
}

impl AccessPoint {
    /// Downward-facing AP with a 60° half-power semiangle (m = 1) and unit efficiency.
    pub fn downward(position: Vec3, transmit_power: f64) -> AccessPoint {
        AccessPoint {
            position,
            orientation: Vec3::DOWN,
            lambertian_order: 1.0,
            transmit_power,
            efficiency: 1.0,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.transmit_power > 0.0 && self.transmit_power.is_finite()) {
            return Err(Error::invalid(
                format!("{field}.transmit_power"),
                format!("must be positive, got {}", self.transmit_power),
            ));
        }
        if !(self.lambertian_order > 0.0 && self.lambertian_order.is_finite()) {
            return Err(Error::invalid(
                format!("{field}.lambertian_order"),
                format!("must be positive, got {}", self.lambertian_order),
            ));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::invalid(
                format!("{field}.efficiency"),
                format!("must lie in (0, 1], got {}", self.efficiency),
            ));
        }
        if (self.orientation.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("{field}.orientation"), "must be a unit vector"));
        }
        Ok(())
    }
}

/// Lambertian order `m = -ln 2 / ln cos(semiangle)` for a half-power semiangle in degrees.
pub fn lambertian_order_from_semiangle(semiangle_deg: f64) -> Result<f64> {
    if !(semiangle_deg > 0.0 && semiangle_deg < 90.0) {
        return Err(Error::domain(format!(
            "half-power semiangle must lie in (0, 90) degrees, got {semiangle_deg}"
        )));
    }
    Ok(-std::f64::consts::LN_2 / semiangle_deg.to_radians().cos().ln())
}

/// Generalized Lambertian radiant intensity `(m+1)/(2π) cos^m φ` per steradian.
///
/// Zero in the back hemisphere (`φ > π/2`).
#[inline]
pub fn lambertian_intensity(m: f64, phi: f64) -> f64 {
    if !(0.0..=PI / 2.0).contains(&phi.abs()) {
        return 0.0;
    }
    (m + 1.0) / (2.0 * PI) * phi.cos().max(0.0).powf(m)
}

/// Unit direction from elevation (above the horizontal) and azimuth (from +x, counterclockwise).
pub fn orientation_from_angles(elevation_deg: f64, azimuth_deg: f64) -> Vec3 {
    let (el, az) = (elevation_deg.to_radians(), azimuth_deg.to_radians());
    Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
}

/// Recovers `(elevation, azimuth)` in degrees, azimuth wrapped to `[0, 360)`.
pub fn angles_from_orientation(dir: Vec3) -> (f64, f64) {
    let horizontal = dir.x.hypot(dir.y);
    let el = dir.z.atan2(horizontal).to_degrees();
    let mut az = dir.y.atan2(dir.x).to_degrees();
    if az < 0.0 {
        az += 360.0;
    }
    if az >= 360.0 {
        az -= 360.0;
    }
    (el, az)
}

/// Number of cells along a span. Exact multiples (up to rounding noise) do not
/// produce a sliver cell; anything else gets one clipped edge cell.
fn cell_count(span: f64, size: f64) -> usize {
    let q = span / size;
    let r = q.round();
    if r >= 1.0 && (q - r).abs() <= 1e-9 * r {
        r as usize
    } else {
        q.ceil().max(1.0) as usize
    }
}

pub(crate) fn cell_edges(span: f64, size: f64) -> Vec<(f64, f64)> {
    let n = cell_count(span, size);
    (0..n)
        .map(|i| {
            let lo = i as f64 * size;
            let hi = if i + 1 == n { span } else { ((i + 1) as f64 * size).min(span) };
            (lo, hi)
        })
        .collect()
}

/// Tiles the selected surfaces with elements of side `element_size`.
///
/// Edge elements are clipped when the size does not divide a surface
/// dimension. Elements reradiate with the given Lambertian order.
pub fn discretize(
    room: &Room,
    element_size: f64,
    surfaces: &[Surface],
    element_order: f64,
) -> Result<Vec<SurfaceElement>> {
    if !(element_size > 0.0 && element_size.is_finite()) {
        return Err(Error::domain(format!(
            "element size must be positive, got {element_size}"
        )));
    }
    let mut out = Vec::new();
    for &surface in surfaces {
        let (span_u, span_v) = room.surface_extent(surface);
        let us = cell_edges(span_u, element_size);
        let vs = cell_edges(span_v, element_size);
        let normal = surface.inward_normal();
        let reflectivity = room.reflectivity(surface);
        out.reserve(us.len() * vs.len());
        for &(u0, u1) in &us {
            for &(v0, v1) in &vs {
                out.push(SurfaceElement {
                    center: surface.point(room, 0.5 * (u0 + u1), 0.5 * (v0 + v1)),
                    normal,
                    area: (u1 - u0) * (v1 - v0),
                    reflectivity,
                    lambertian_order: element_order,
                    surface,
                });
            }
        }
    }
    Ok(out)
}
