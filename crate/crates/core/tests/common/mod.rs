#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thz_hybrid::algorithms::altmin::{altmin_hybrid, AltMinOptions};
use thz_hybrid::algorithms::digital::fully_digital_baseline;
use thz_hybrid::architectures::{connectivity_for, Architecture, SwitchNetwork};
use thz_hybrid::channel::Channel;
use thz_hybrid::geometry::ArrayGeometry;
use thz_hybrid::linalg::{frob_sq, least_squares, CMat};
use thz_hybrid::metrics::spectral_efficiency;
use thz_hybrid::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circularly symmetric complex Gaussian entries with unit variance.
pub fn cgauss(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * s, im * s)
    })
}

/// Transmit layout of `k` contiguous subarrays of `m` elements in a line.
pub fn line_subarrays(k: usize, m: usize) -> ArrayGeometry {
    let base = ArrayGeometry::build_upa(m, 1, 0.5, 3e11).unwrap();
    ArrayGeometry::partition_wsms(&base, k, m as f64 * base.pitch()).unwrap()
}

/// Narrowband random channel whose transmit antennas are grouped into `k`
/// subarrays of `m` elements.
pub fn random_subarray_channel(rng: &mut ChaCha8Rng, n_rx: usize, k: usize, m: usize) -> Channel {
    let h = cgauss(rng, n_rx, k * m);
    Channel::from_matrices(vec![3e11], 1e9, vec![h])
        .unwrap()
        .with_tx_geometry(line_subarrays(k, m))
        .unwrap()
}

/// Uniform linear array responses at `count` angles spread over (−π/2, π/2).
pub fn ula_dictionary(n: usize, count: usize) -> CMat {
    CMat::from_fn(n, count, |i, g| {
        let theta = -std::f64::consts::FRAC_PI_2 + (g as f64 + 0.5) * std::f64::consts::PI / count as f64;
        C64::from_polar(1.0, std::f64::consts::PI * i as f64 * theta.sin())
    })
}

/// Smallest least-squares residual over every pair of dictionary atoms.
pub fn best_pair_residual(target: &CMat, dict: &CMat) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..dict.ncols() {
        for b in a + 1..dict.ncols() {
            let sub = dict.select_columns(&[a, b]);
            let d = least_squares(&sub, target);
            best = best.min(frob_sq(&(target - &sub * d)).sqrt());
        }
    }
    best
}

/// Best rate over switch sets with `closed` switches. With one switch per
/// chain only array-of-subarrays assignments (distinct subarrays) count.
pub fn exhaustive_daosa(ch: &Channel, n_rf: usize, n_sub: usize, closed: usize, p: f64, noise: f64) -> f64 {
    let fd = fully_digital_baseline(ch, p, noise, n_rf).unwrap();
    let targets = fd.hybrid_targets();
    let labels = ch.tx_subarray_index();
    let opts = AltMinOptions { allow_dark: true, ..Default::default() };
    let total = n_rf * n_sub;
    let mut best = f64::NEG_INFINITY;
    for bits in 0u32..(1 << total) {
        if bits.count_ones() as usize != closed {
            continue;
        }
        let pattern: Vec<bool> = (0..total).map(|i| bits >> i & 1 == 1).collect();
        let Ok(sw) = SwitchNetwork::new_allow_dark(n_rf, n_sub, pattern) else { continue };
        if closed == n_rf && (0..n_sub).any(|s| (0..n_rf).filter(|&r| sw.is_closed(r, s)).count() > 1) {
            continue;
        }
        let mask = connectivity_for(Architecture::Daosa, &labels, n_sub, n_rf, Some(&sw)).unwrap();
        let s = altmin_hybrid(&targets, &mask, n_rf, fd.power_per_subcarrier, &opts).unwrap();
        best = best.max(spectral_efficiency(ch, &s.beamformer, noise).unwrap());
    }
    best
}
