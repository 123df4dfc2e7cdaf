//! Beam codebooks built from phase shifters or true-time delays.

use std::f64::consts::PI;

use crate::architectures::{phase_response, quantize_delays, DeviceKind, PhaseDevice};
use crate::channel::subcarrier_grid;
use crate::exec::Exec;
use crate::geometry::{ArrayGeometry, Direction};
use crate::linalg::CVec;
use crate::metrics::array_gain_sweep;
use crate::{Error, Result, C64, SPEED_OF_LIGHT};

/// A carrier, a bandwidth and a subcarrier count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub f_c: f64,
    pub bandwidth: f64,
    pub n_subcarriers: usize,
}

impl Band {
    pub fn new(f_c: f64, bandwidth: f64, n_subcarriers: usize) -> Result<Self> {
        if !(f_c > 0.0) || !(bandwidth >= 0.0) || bandwidth >= 2.0 * f_c || n_subcarriers == 0 {
            return Err(Error::invalid("band needs a positive carrier, 0 ≤ B < 2·f_c and ≥1 subcarrier"));
        }
        Ok(Band { f_c, bandwidth, n_subcarriers })
    }

    /// Band edges included.
    pub fn frequencies(&self) -> Vec<f64> {
        subcarrier_grid(self.f_c, self.bandwidth, self.n_subcarriers)
    }
}

/// Per-antenna device settings steering toward one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookEntry {
    pub direction: Direction,
    pub device: DeviceKind,
    /// Radians (phase shifter) or seconds (delay line), one per antenna.
    pub settings: Vec<f64>,
}

impl CodebookEntry {
    /// Settings that align the array with `dir`. Phase shifters are matched
    /// at the carrier `f_c`; delay lines get the non-negative delays
    /// `(max_m⟨p_m,u⟩ − ⟨p_n,u⟩)/c`, optionally quantized to `bits`.
    pub fn steer(geom: &ArrayGeometry, dir: Direction, device: DeviceKind, f_c: f64, bits: Option<u32>) -> Result<Self> {
        if !(f_c > 0.0) {
            return Err(Error::invalid("carrier frequency must be positive"));
        }
        let proj = geom.projections(&dir);
        let settings = match device {
            DeviceKind::PhaseShifter => proj.iter().map(|x| 2.0 * PI * f_c / SPEED_OF_LIGHT * x).collect(),
            DeviceKind::Ttd => {
                let top = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let delays: Vec<f64> = proj.iter().map(|x| (top - x) / SPEED_OF_LIGHT).collect();
                match bits {
                    Some(b) => quantize_delays(&delays, b),
                    None => delays,
                }
            }
        };
        Ok(CodebookEntry { direction: dir, device, settings })
    }

    /// Unit-norm weight vector at frequency `f`.
    pub fn weights(&self, f: f64) -> CVec {
        let scale = 1.0 / (self.settings.len() as f64).sqrt();
        CVec::from_iterator(
            self.settings.len(),
            self.settings.iter().map(|&s| {
                let dev = PhaseDevice { kind: self.device, setting: s };
                phase_response(&dev, f, f).unwrap_or(C64::new(0.0, 0.0)) * scale
            }),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub entries: Vec<CodebookEntry>,
}

impl Codebook {
    pub fn new(geom: &ArrayGeometry, directions: &[Direction], device: DeviceKind, f_c: f64, bits: Option<u32>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::invalid("codebook needs at least one direction"));
        }
        let entries = directions
            .iter()
            .map(|&d| CodebookEntry::steer(geom, d, device, f_c, bits))
            .collect::<Result<_>>()?;
        Ok(Codebook { entries })
    }
}

/// Picks the entry whose worst-subcarrier gain toward `target` is highest
/// and returns it with its per-subcarrier gains (dB).
pub fn ttd_codebook_select(
    geom: &ArrayGeometry,
    band: &Band,
    codebook: &Codebook,
    target: &Direction,
) -> Result<(CodebookEntry, Vec<f64>)> {
    ttd_codebook_select_with(geom, band, codebook, target, Exec::default())
}

pub fn ttd_codebook_select_with(
    geom: &ArrayGeometry,
    band: &Band,
    codebook: &Codebook,
    target: &Direction,
    exec: Exec,
) -> Result<(CodebookEntry, Vec<f64>)> {
    if codebook.entries.is_empty() {
        return Err(Error::invalid("empty codebook"));
    }
    let sweeps = exec
        .map(&codebook.entries, |e| array_gain_sweep(geom, e, target, band))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let worst: Vec<f64> = sweeps.iter().map(|g| g.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    let best = (0..worst.len()).fold(0, |b, i| if worst[i] > worst[b] { i } else { b });
    Ok((codebook.entries[best].clone(), sweeps[best].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn geom() -> ArrayGeometry {
        ArrayGeometry::build_upa(16, 16, 0.5, 3e11).unwrap()
    }

    #[test]
    fn ttd_is_flat_and_ps_peaks_at_carrier() {
        let g = geom();
        let band = Band::new(3e11, 3e10, 9).unwrap();
        let dir = Direction::from_degrees(60.0, 10.0);
        let ttd = CodebookEntry::steer(&g, dir, DeviceKind::Ttd, 3e11, None).unwrap();
        assert!(ttd.settings.iter().all(|&t| t >= 0.0));
        for x in array_gain_sweep(&g, &ttd, &dir, &band).unwrap() {
            assert_abs_diff_eq!(x, 0.0, epsilon = 1e-9);
        }
        let ps = CodebookEntry::steer(&g, dir, DeviceKind::PhaseShifter, 3e11, None).unwrap();
        let gains = array_gain_sweep(&g, &ps, &dir, &band).unwrap();
        assert_abs_diff_eq!(gains[4], 0.0, epsilon = 1e-9);
        assert!(gains[0] < -0.5 && gains[8] < -0.5);
    }

    #[test]
    fn selection_prefers_the_matching_entry() {
        let g = geom();
        let band = Band::new(3e11, 1e10, 5).unwrap();
        let dirs = [Direction::from_degrees(0.0, 30.0), Direction::from_degrees(60.0, 10.0), Direction::broadside()];
        let cb = Codebook::new(&g, &dirs, DeviceKind::Ttd, 3e11, None).unwrap();
        let (e, gains) = ttd_codebook_select(&g, &band, &cb, &dirs[1]).unwrap();
        assert_eq!(e.direction, dirs[1]);
        assert_eq!(gains.len(), 5);
    }

    #[test]
    fn rejects_empty_inputs() {
        assert!(Band::new(3e11, 1e9, 0).is_err());
        assert!(Codebook::new(&geom(), &[], DeviceKind::Ttd, 3e11, None).is_err());
    }
}
