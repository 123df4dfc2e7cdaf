//! Sparse terahertz multipath channel.
//!
//! A [`PathSet`] lists a handful of rays (line of sight plus reflections);
//! [`assemble_channel`] turns it into one complex matrix per subcarrier,
//! either with planar wavefronts across each whole array or with exact
//! center-to-center distances between every pair of subarrays.
//!
//! Directions are expressed in each array's local frame and point away from
//! the array along the ray (toward the next hop for the transmitter, back
//! toward the source for the receiver). With steering vectors
//! `a(u) = exp(+j·k·⟨p, u⟩)` on both sides, reciprocity gives
//! `H = Σ g · a_rx · a_txᵀ`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::exec::Exec;
use crate::geometry::{ArrayGeometry, Direction};
use crate::linalg::{CMat, Svd};
use crate::{Error, Result, C64, SPEED_OF_LIGHT};

/// Default extra loss of a ground reflection (dB).
pub const DEFAULT_REFLECTION_LOSS_DB: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Los,
    Reflection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub kind: PathKind,
    /// Unfolded ray length in meters.
    pub length: f64,
    /// `length / c`.
    pub delay: f64,
    /// Loss on top of free-space spreading (dB).
    pub extra_loss_db: f64,
    /// Phase added at the bounce (radians).
    pub phase: f64,
    pub departure: Direction,
    pub arrival: Direction,
}

impl Path {
    pub fn los(length: f64, departure: Direction, arrival: Direction) -> Self {
        Path {
            kind: PathKind::Los,
            length,
            delay: length / SPEED_OF_LIGHT,
            extra_loss_db: 0.0,
            phase: 0.0,
            departure,
            arrival,
        }
    }

    /// Reflected ray with a flat magnitude loss and a phase flip of π.
    pub fn reflection(length: f64, extra_loss_db: f64, departure: Direction, arrival: Direction) -> Self {
        Path {
            kind: PathKind::Reflection,
            length,
            delay: length / SPEED_OF_LIGHT,
            extra_loss_db,
            phase: PI,
            departure,
            arrival,
        }
    }
}

/// Placement of an array's local frame in the scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub origin: Vector3<f64>,
    /// Local-to-scene rotation; columns are the images of the local axes.
    pub rotation: Matrix3<f64>,
}

impl Pose {
    pub fn to_scene(&self, local: &Vector3<f64>) -> Vector3<f64> {
        self.origin + self.rotation * local
    }

    pub fn direction_to_local(&self, scene_dir: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * scene_dir
    }
}

/// Transmitter and receiver poses above a flat ground at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub tx: Pose,
    pub rx: Pose,
}

impl Link {
    /// Two arrays at `height` facing each other across `distance` along the
    /// scene x-axis. Each array's local x-axis is horizontal and its local
    /// y-axis points up, so subarrays partitioned along local x sit side by
    /// side, perpendicular to the link.
    pub fn facing(distance: f64, height: f64) -> Self {
        let tx = Pose {
            origin: Vector3::new(0.0, 0.0, height),
            rotation: Matrix3::from_columns(&[Vector3::y(), Vector3::z(), Vector3::x()]),
        };
        let rx = Pose {
            origin: Vector3::new(distance, 0.0, height),
            rotation: Matrix3::from_columns(&[-Vector3::y(), Vector3::z(), -Vector3::x()]),
        };
        Link { tx, rx }
    }

    /// Unfolded distance between two local points, bouncing off the ground
    /// for reflected rays (image method).
    pub fn distance(&self, kind: PathKind, tx_local: &Vector3<f64>, rx_local: &Vector3<f64>) -> f64 {
        let a = self.tx.to_scene(tx_local);
        let mut b = self.rx.to_scene(rx_local);
        if kind == PathKind::Reflection {
            b.z = -b.z;
        }
        (b - a).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    paths: Vec<Path>,
    link: Option<Link>,
}

impl PathSet {
    pub fn new(paths: Vec<Path>, link: Option<Link>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::invalid("a path set needs at least one path"));
        }
        if paths.iter().filter(|p| p.kind == PathKind::Los).count() > 1 {
            return Err(Error::invalid("at most one line-of-sight path"));
        }
        for p in &paths {
            if !(p.length > 0.0) {
                return Err(Error::invalid("path length must be positive"));
            }
            if p.extra_loss_db < 0.0 {
                return Err(Error::invalid("extra path loss must be non-negative"));
            }
        }
        Ok(PathSet { paths, link })
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn link(&self) -> Option<&Link> {
        self.link.as_ref()
    }

    /// Drops the line-of-sight ray (blocked link). Fails if nothing is left.
    pub fn without_los(&self) -> Result<Self> {
        PathSet::new(
            self.paths.iter().filter(|p| p.kind != PathKind::Los).cloned().collect(),
            self.link,
        )
    }
}

/// Free-space loss `20·log10(4π·d·f/c)` in dB.
pub fn friis_path_loss_db(distance: f64, f: f64) -> Result<f64> {
    if !(distance > 0.0) || !(f > 0.0) {
        return Err(Error::invalid(format!(
            "path loss needs positive distance and frequency, got d={distance}, f={f}"
        )));
    }
    Ok(friis_db(distance, f))
}

fn friis_db(distance: f64, f: f64) -> f64 {
    20.0 * (4.0 * PI * distance * f / SPEED_OF_LIGHT).log10()
}

fn amplitude(distance: f64, f: f64, extra_loss_db: f64) -> f64 {
    10f64.powf(-(friis_db(distance, f) + extra_loss_db) / 20.0)
}

/// Line of sight plus a ground bounce between two facing arrays at equal
/// height, with the default 15 dB reflection loss.
pub fn build_two_path_scenario(distance: f64, height: f64) -> Result<PathSet> {
    two_path_scenario(distance, height, DEFAULT_REFLECTION_LOSS_DB)
}

pub fn two_path_scenario(distance: f64, height: f64, reflection_loss_db: f64) -> Result<PathSet> {
    if !(distance > 0.0) || !(height > 0.0) {
        return Err(Error::invalid("distance and height must be positive"));
    }
    let link = Link::facing(distance, height);
    let tx0 = link.tx.origin;
    let rx0 = link.rx.origin;
    let los_dir = (rx0 - tx0).normalize();
    let los = Path::los(
        (rx0 - tx0).norm(),
        Direction::from_unit_vector(link.tx.direction_to_local(&los_dir)),
        Direction::from_unit_vector(link.rx.direction_to_local(&-los_dir)),
    );
    let image_rx = Vector3::new(rx0.x, rx0.y, -rx0.z);
    let image_tx = Vector3::new(tx0.x, tx0.y, -tx0.z);
    let dep = (image_rx - tx0).normalize();
    let arr = (image_tx - rx0).normalize();
    let bounce = Path::reflection(
        (image_rx - tx0).norm(),
        reflection_loss_db,
        Direction::from_unit_vector(link.tx.direction_to_local(&dep)),
        Direction::from_unit_vector(link.rx.direction_to_local(&arr)),
    );
    PathSet::new(vec![los, bounce], Some(link))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagation {
    #[default]
    Planar,
    Spherical,
}

/// `H = left · core · rightᴴ` with thin `left`/`right`.
#[derive(Debug, Clone)]
pub struct LowRankFactor {
    pub left: CMat,
    pub core: CMat,
    pub right: CMat,
}

impl LowRankFactor {
    pub fn dense(&self) -> CMat {
        &self.left * &self.core * self.right.adjoint()
    }

    /// Factor of `H · S` where `S` keeps only the listed transmit columns.
    pub fn select_tx(&self, columns: &[usize]) -> LowRankFactor {
        LowRankFactor {
            left: self.left.clone(),
            core: self.core.clone(),
            right: self.right.select_rows(columns),
        }
    }
}

/// Per-subcarrier channel matrices (`rx × tx`).
#[derive(Debug, Clone)]
pub struct Channel {
    subcarrier_frequencies: Vec<f64>,
    bandwidth: f64,
    matrices: Vec<CMat>,
    factors: Option<Vec<LowRankFactor>>,
    tx_geom: Option<ArrayGeometry>,
    rx_geom: Option<ArrayGeometry>,
    propagation: Propagation,
}

impl Channel {
    /// Wraps explicit matrices (no geometry, no factorization).
    pub fn from_matrices(subcarrier_frequencies: Vec<f64>, bandwidth: f64, matrices: Vec<CMat>) -> Result<Self> {
        if matrices.is_empty() || matrices.len() != subcarrier_frequencies.len() {
            return Err(Error::invalid("need one matrix per subcarrier"));
        }
        let (r, c) = matrices[0].shape();
        if r == 0 || c == 0 || matrices.iter().any(|m| m.shape() != (r, c)) {
            return Err(Error::invalid("channel matrices must be non-empty and equally sized"));
        }
        if subcarrier_frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("subcarrier frequencies must increase strictly"));
        }
        Ok(Channel {
            subcarrier_frequencies,
            bandwidth,
            matrices,
            factors: None,
            tx_geom: None,
            rx_geom: None,
            propagation: Propagation::Planar,
        })
    }

    /// Narrowband wrapper around a single matrix.
    pub fn narrowband(matrix: CMat) -> Result<Self> {
        Channel::from_matrices(vec![1.0], 0.0, vec![matrix])
    }

    /// Attaches a transmit geometry (needed by the subarray solvers).
    pub fn with_tx_geometry(mut self, geom: ArrayGeometry) -> Result<Self> {
        if geom.len() != self.num_tx() {
            return Err(Error::invalid("transmit geometry does not match channel width"));
        }
        self.tx_geom = Some(geom);
        Ok(self)
    }

    pub fn num_subcarriers(&self) -> usize {
        self.matrices.len()
    }

    pub fn num_rx(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn num_tx(&self) -> usize {
        self.matrices[0].ncols()
    }

    pub fn subcarrier_frequencies(&self) -> &[f64] {
        &self.subcarrier_frequencies
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn matrix(&self, k: usize) -> &CMat {
        &self.matrices[k]
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    pub fn factor(&self, k: usize) -> Option<&LowRankFactor> {
        self.factors.as_ref().map(|f| &f[k])
    }

    pub fn tx_geometry(&self) -> Option<&ArrayGeometry> {
        self.tx_geom.as_ref()
    }

    pub fn rx_geometry(&self) -> Option<&ArrayGeometry> {
        self.rx_geom.as_ref()
    }

    pub fn propagation(&self) -> Propagation {
        self.propagation
    }

    /// Subarray label of each transmit antenna (all zero without geometry).
    pub fn tx_subarray_index(&self) -> Vec<usize> {
        match &self.tx_geom {
            Some(g) => g.subarray_index().to_vec(),
            None => vec![0; self.num_tx()],
        }
    }

    /// SVD of subcarrier `k`, through the low-rank factor when available.
    pub fn svd(&self, k: usize) -> Svd {
        match self.factor(k) {
            Some(f) => Svd::low_rank(&f.left, &f.core, &f.right),
            None => Svd::dense(&self.matrices[k]),
        }
    }

    /// Numerical rank of subcarrier `k`.
    pub fn numerical_rank(&self, k: usize, threshold: f64) -> Result<usize> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::invalid("rank threshold must lie in (0, 1)"));
        }
        Ok(self.svd(k).rank(threshold))
    }
}

/// Uniform grid over `[f_c − B/2, f_c + B/2]`, band edges included.
pub fn subcarrier_grid(f_c: f64, bandwidth: f64, n_subcarriers: usize) -> Vec<f64> {
    if n_subcarriers <= 1 || bandwidth == 0.0 {
        return vec![f_c];
    }
    let step = bandwidth / (n_subcarriers - 1) as f64;
    (0..n_subcarriers)
        .map(|k| f_c - bandwidth / 2.0 + k as f64 * step)
        .collect()
}

/// Builds the per-subcarrier channel. See [`assemble_channel_with`].
#[allow(clippy::too_many_arguments)]
pub fn assemble_channel(
    paths: &PathSet,
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    f_c: f64,
    bandwidth: f64,
    n_subcarriers: usize,
    mode: Propagation,
) -> Result<Channel> {
    assemble_channel_with(paths, tx, rx, f_c, bandwidth, n_subcarriers, mode, Exec::default())
}

/// Builds the per-subcarrier channel.
///
/// Planar mode sums one rank-one term per ray with Friis amplitude and the
/// ray delay. Spherical mode splits every ray into one sub-ray per
/// (receive subarray, transmit subarray) pair, each with the exact unfolded
/// distance between the two subarray centers; wavefronts stay planar inside
/// a subarray.
#[allow(clippy::too_many_arguments)]
pub fn assemble_channel_with(
    paths: &PathSet,
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    f_c: f64,
    bandwidth: f64,
    n_subcarriers: usize,
    mode: Propagation,
    exec: Exec,
) -> Result<Channel> {
    if tx.is_empty() || rx.is_empty() {
        return Err(Error::invalid("array geometry has no elements"));
    }
    if n_subcarriers == 0 {
        return Err(Error::invalid("need at least one subcarrier"));
    }
    if bandwidth < 0.0 || !(f_c > 0.0) {
        return Err(Error::invalid("bandwidth must be non-negative and carrier positive"));
    }
    if bandwidth >= 2.0 * f_c {
        return Err(Error::invalid("band must stay above 0 Hz"));
    }
    let link = match mode {
        Propagation::Planar => None,
        Propagation::Spherical => Some(
            *paths
                .link()
                .ok_or_else(|| Error::invalid("spherical propagation needs link geometry"))?,
        ),
    };
    let freqs = subcarrier_grid(f_c, bandwidth, n_subcarriers);
    let factors = exec.map(&freqs, |&f| match link {
        None => planar_factor(paths, tx, rx, f),
        Some(link) => spherical_factor(paths, &link, tx, rx, f),
    });
    let matrices = exec.map(&factors, LowRankFactor::dense);
    Ok(Channel {
        subcarrier_frequencies: freqs,
        bandwidth,
        matrices,
        factors: Some(factors),
        tx_geom: Some(tx.clone()),
        rx_geom: Some(rx.clone()),
        propagation: mode,
    })
}

fn planar_factor(paths: &PathSet, tx: &ArrayGeometry, rx: &ArrayGeometry, f: f64) -> LowRankFactor {
    let l = paths.paths().len();
    let mut left = CMat::zeros(rx.len(), l);
    let mut right = CMat::zeros(tx.len(), l);
    let mut core = CMat::zeros(l, l);
    for (i, p) in paths.paths().iter().enumerate() {
        left.set_column(i, &rx.steering_vector(&p.arrival, f));
        right.set_column(i, &tx.steering_vector(&p.departure, f).map(|z| z.conj()));
        let g = amplitude(p.length, f, p.extra_loss_db);
        core[(i, i)] = C64::from_polar(g, p.phase - 2.0 * PI * f * p.delay);
    }
    LowRankFactor { left, core, right }
}

fn spherical_factor(
    paths: &PathSet,
    link: &Link,
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    f: f64,
) -> LowRankFactor {
    let kt = tx.num_subarrays();
    let kr = rx.num_subarrays();
    let l = paths.paths().len();
    let k = 2.0 * PI * f / SPEED_OF_LIGHT;
    let tx_centers: Vec<_> = (0..kt).map(|s| tx.subarray_center(s)).collect();
    let rx_centers: Vec<_> = (0..kr).map(|s| rx.subarray_center(s)).collect();

    let mut left = CMat::zeros(rx.len(), l * kr);
    let mut right = CMat::zeros(tx.len(), l * kt);
    let mut core = CMat::zeros(l * kr, l * kt);
    for (i, p) in paths.paths().iter().enumerate() {
        let ua = p.arrival.unit_vector();
        let ud = p.departure.unit_vector();
        for (n, pos) in rx.positions().iter().enumerate() {
            let s = rx.subarray_index()[n];
            left[(n, i * kr + s)] = C64::from_polar(1.0, k * (pos - rx_centers[s]).dot(&ua));
        }
        for (n, pos) in tx.positions().iter().enumerate() {
            let s = tx.subarray_index()[n];
            right[(n, i * kt + s)] = C64::from_polar(1.0, -k * (pos - tx_centers[s]).dot(&ud));
        }
        for (pr, cr) in rx_centers.iter().enumerate() {
            for (qt, ct) in tx_centers.iter().enumerate() {
                let d = link.distance(p.kind, ct, cr);
                let g = amplitude(d, f, p.extra_loss_db);
                core[(i * kr + pr, i * kt + qt)] = C64::from_polar(g, p.phase - k * d);
            }
        }
    }
    LowRankFactor { left, core, right }
}
