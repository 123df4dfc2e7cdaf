//! Antenna array layouts, steering vectors and near-field limits.
//!
//! Arrays live in their own local frame: elements in the x–y plane and
//! boresight along +z. Positions are stored in meters so responses can be
//! evaluated at any frequency without rescaling.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::linalg::CVec;
use crate::{wavelength, Error, Result, C64, SPEED_OF_LIGHT};

/// A propagation direction.
///
/// Azimuth is measured in the x–y plane from the x-axis, elevation from that
/// plane towards +z, so the unit vector is
/// `(cos el · cos az, cos el · sin az, sin el)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Direction {
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        Direction { azimuth, elevation }
    }

    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Direction::new(azimuth_deg.to_radians(), elevation_deg.to_radians())
    }

    /// Local boresight (+z).
    pub fn broadside() -> Self {
        Direction::new(0.0, PI / 2.0)
    }

    /// Inverse of [`Direction::unit_vector`]; `v` need not be normalized.
    pub fn from_unit_vector(v: Vector3<f64>) -> Self {
        let v = v.normalize();
        let elevation = v.z.clamp(-1.0, 1.0).asin();
        let azimuth = if v.x == 0.0 && v.y == 0.0 { 0.0 } else { v.y.atan2(v.x) };
        Direction { azimuth, elevation }
    }

    pub fn unit_vector(&self) -> Vector3<f64> {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        Vector3::new(ce * ca, ce * sa, se)
    }
}

/// Plane that holds the lattice of a planar array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    #[default]
    Xy,
    Xz,
    Yz,
}

/// Element positions grouped into subarrays, with the carrier they were
/// laid out for.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<Vector3<f64>>,
    subarray_index: Vec<usize>,
    num_subarrays: usize,
    carrier_frequency: f64,
    pitch: f64,
    aperture: f64,
}

impl ArrayGeometry {
    /// Uniform planar array of `n_x × n_y` elements with `spacing` given in
    /// carrier wavelengths. Element `(m, n)` sits at `(m, n, 0) · pitch`,
    /// index `m` varying slowest.
    pub fn build_upa(n_x: usize, n_y: usize, spacing: f64, carrier_frequency: f64) -> Result<Self> {
        if n_x == 0 || n_y == 0 {
            return Err(Error::invalid("array dimensions must be at least 1"));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid(format!("element spacing must be positive, got {spacing}")));
        }
        if !(carrier_frequency > 0.0) || !carrier_frequency.is_finite() {
            return Err(Error::invalid(format!(
                "carrier frequency must be positive, got {carrier_frequency}"
            )));
        }
        let pitch = spacing * wavelength(carrier_frequency);
        let mut positions = Vec::with_capacity(n_x * n_y);
        for m in 0..n_x {
            for n in 0..n_y {
                positions.push(Vector3::new(m as f64 * pitch, n as f64 * pitch, 0.0));
            }
        }
        Ok(Self::assemble(positions, vec![0; n_x * n_y], 1, carrier_frequency, pitch))
    }

    /// `k` copies of a single-subarray layout, copy `s` shifted by
    /// `s · separation` along x.
    pub fn partition_wsms(base: &ArrayGeometry, k: usize, separation: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("subarray count must be at least 1"));
        }
        if base.num_subarrays != 1 {
            return Err(Error::invalid("partition base must be a single subarray"));
        }
        let (min_x, max_x) = base
            .positions
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
        let footprint = max_x - min_x + base.pitch;
        if k > 1 && separation < footprint * (1.0 - 1e-12) {
            return Err(Error::invalid(format!(
                "subarray separation {separation} m overlaps subarray width {footprint} m"
            )));
        }
        let n = base.positions.len();
        let mut positions = Vec::with_capacity(n * k);
        let mut index = Vec::with_capacity(n * k);
        for s in 0..k {
            let shift = s as f64 * separation;
            positions.extend(base.positions.iter().map(|p| Vector3::new(p.x + shift, p.y, p.z)));
            index.extend(std::iter::repeat_n(s, n));
        }
        if k == 1 {
            return Ok(base.clone());
        }
        Ok(Self::assemble(positions, index, k, base.carrier_frequency, base.pitch))
    }

    fn assemble(
        positions: Vec<Vector3<f64>>,
        subarray_index: Vec<usize>,
        num_subarrays: usize,
        carrier_frequency: f64,
        pitch: f64,
    ) -> Self {
        let aperture = max_pairwise_distance(&positions);
        ArrayGeometry {
            positions,
            subarray_index,
            num_subarrays,
            carrier_frequency,
            pitch,
            aperture,
        }
    }

    /// Same lattice mapped into another plane of the local frame.
    /// `Xz` sends `(x, y, 0)` to `(x, 0, y)`; `Yz` sends it to `(0, x, y)`.
    pub fn in_plane(&self, plane: Plane) -> Self {
        let positions = self
            .positions
            .iter()
            .map(|p| match plane {
                Plane::Xy => *p,
                Plane::Xz => Vector3::new(p.x, p.z, p.y),
                Plane::Yz => Vector3::new(p.z, p.x, p.y),
            })
            .collect();
        ArrayGeometry { positions, ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn subarray_index(&self) -> &[usize] {
        &self.subarray_index
    }

    pub fn num_subarrays(&self) -> usize {
        self.num_subarrays
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    /// Lattice pitch in meters.
    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    /// Largest distance between any two elements (meters).
    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    /// Element indices belonging to subarray `s`, in storage order.
    pub fn subarray_elements(&self, s: usize) -> Vec<usize> {
        self.subarray_index
            .iter()
            .enumerate()
            .filter_map(|(i, &k)| (k == s).then_some(i))
            .collect()
    }

    /// Centroid of subarray `s`.
    pub fn subarray_center(&self, s: usize) -> Vector3<f64> {
        let members = self.subarray_elements(s);
        let sum = members.iter().fold(Vector3::zeros(), |acc, &i| acc + self.positions[i]);
        sum / members.len().max(1) as f64
    }

    /// Smallest distance between two distinct elements of subarray `s`, or
    /// `None` for single-element subarrays.
    pub fn nearest_neighbor_spacing(&self, s: usize) -> Option<f64> {
        let members = self.subarray_elements(s);
        let mut best: Option<f64> = None;
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let d = (self.positions[i] - self.positions[j]).norm();
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }

    /// Response toward `dir` at frequency `f`: entry `n` is
    /// `exp(+j·2π·(f/c)·⟨pₙ, u⟩)`.
    pub fn steering_vector(&self, dir: &Direction, f: f64) -> CVec {
        self.steering_vector_toward(&dir.unit_vector(), f)
    }

    /// Steering vector for a raw (unit) direction vector.
    pub fn steering_vector_toward(&self, u: &Vector3<f64>, f: f64) -> CVec {
        let k = 2.0 * PI * f / SPEED_OF_LIGHT;
        CVec::from_iterator(
            self.positions.len(),
            self.positions.iter().map(|p| C64::from_polar(1.0, k * p.dot(u))),
        )
    }

    /// Projections `⟨pₙ, u⟩` in meters.
    pub fn projections(&self, dir: &Direction) -> Vec<f64> {
        let u = dir.unit_vector();
        self.positions.iter().map(|p| p.dot(&u)).collect()
    }
}

fn max_pairwise_distance(points: &[Vector3<f64>]) -> f64 {
    let mut best = 0.0_f64;
    for (a, p) in points.iter().enumerate() {
        for q in &points[a + 1..] {
            best = best.max((p - q).norm_squared());
        }
    }
    best.sqrt()
}

/// Boundary between the radiating near field and the far field:
/// `aperture² / (λ/2)`.
pub fn rayleigh_distance(aperture: f64, wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0) {
        return Err(Error::invalid(format!("wavelength must be positive, got {wavelength}")));
    }
    if aperture < 0.0 {
        return Err(Error::invalid(format!("aperture must be non-negative, got {aperture}")));
    }
    Ok(2.0 * aperture * aperture / wavelength)
}

/// Subarray separation that makes `k` widely-spaced subarrays per side of a
/// broadside link of length `distance` mutually orthogonal:
/// `sqrt(λ · distance / k)`.
pub fn orthogonal_separation(wavelength: f64, distance: f64, k: usize) -> f64 {
    (wavelength * distance / k.max(1) as f64).sqrt()
}
