//! Rate, power, energy efficiency and array gain.

use serde::{Deserialize, Serialize};

use crate::algorithms::codebook::{Band, CodebookEntry};
use crate::architectures::{DeviceCensus, DeviceKind, HybridBeamformer};
use crate::channel::Channel;
use crate::geometry::{ArrayGeometry, Direction};
use crate::linalg::{log2_det_hpd, CMat};
use crate::{Error, Result, C64};

/// Per-device power draw in watts.
///
/// `p_pa` and `p_ps` are measured THz device figures; the remaining entries
/// are defaults chosen to keep array totals in the tens of watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerModel {
    pub p_pa: f64,
    pub p_ps: f64,
    pub p_rf: f64,
    pub p_sw: f64,
    pub p_bb: f64,
    pub p_ttd: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel { p_pa: 0.060, p_ps: 0.042, p_rf: 0.200, p_sw: 0.005, p_bb: 0.300, p_ttd: 0.080 }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_pa", self.p_pa),
            ("p_ps", self.p_ps),
            ("p_rf", self.p_rf),
            ("p_sw", self.p_sw),
            ("p_bb", self.p_bb),
            ("p_ttd", self.p_ttd),
        ];
        for (name, v) in fields {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config(format!("power_model.{name}"), "must be a non-negative number"));
            }
        }
        Ok(())
    }
}

/// Total consumed power (W) of a device census.
pub fn power_consumption(census: &DeviceCensus, model: &PowerModel, device: DeviceKind) -> f64 {
    let per_phase = match device {
        DeviceKind::PhaseShifter => model.p_ps,
        DeviceKind::Ttd => model.p_ttd,
    };
    census.power_amplifiers as f64 * model.p_pa
        + census.phase_devices_active as f64 * per_phase
        + census.rf_chains as f64 * model.p_rf
        + census.switches_closed as f64 * model.p_sw
        + model.p_bb
}

/// Thermal noise power (W) over `bandwidth` Hz: `kT = −174 dBm/Hz` plus the
/// receiver noise figure.
pub fn noise_power(noise_figure_db: f64, bandwidth: f64) -> f64 {
    10f64.powf((-174.0 + noise_figure_db) / 10.0) * 1e-3 * bandwidth
}

/// Anything that yields one composite precoder per subcarrier, with the
/// stream power split folded in.
pub trait Precoding {
    fn num_subcarriers(&self) -> usize;
    fn precoder(&self, k: usize) -> CMat;
}

impl Precoding for HybridBeamformer {
    fn num_subcarriers(&self) -> usize {
        self.digital.len()
    }

    fn precoder(&self, k: usize) -> CMat {
        self.composite(k)
    }
}

impl Precoding for [CMat] {
    fn num_subcarriers(&self) -> usize {
        self.len()
    }

    fn precoder(&self, k: usize) -> CMat {
        self[k].clone()
    }
}

impl Precoding for Vec<CMat> {
    fn num_subcarriers(&self) -> usize {
        self.len()
    }

    fn precoder(&self, k: usize) -> CMat {
        self[k].clone()
    }
}

/// `log2 det(I + H F Fᴴ Hᴴ / noise)` for one subcarrier, evaluated through
/// the smaller `Ns × Ns` Gram matrix.
pub fn log_det_rate(h: &CMat, f: &CMat, noise: f64) -> Result<f64> {
    if h.ncols() != f.nrows() {
        return Err(Error::invalid(format!(
            "channel has {} columns but precoder has {} rows",
            h.ncols(),
            f.nrows()
        )));
    }
    if !(noise > 0.0) {
        return Err(Error::invalid("noise power must be positive"));
    }
    if f.ncols() == 0 {
        return Ok(0.0);
    }
    let hf = h * f;
    let gram = hf.adjoint() * &hf * C64::new(1.0 / noise, 0.0);
    let m = CMat::identity(f.ncols(), f.ncols()) + gram;
    Ok(log2_det_hpd(&m).max(0.0))
}

/// Mean spectral efficiency over subcarriers (bits/s/Hz).
pub fn spectral_efficiency<P: Precoding + ?Sized>(channel: &Channel, precoding: &P, noise_per_subcarrier: f64) -> Result<f64> {
    let k = channel.num_subcarriers();
    if precoding.num_subcarriers() != k {
        return Err(Error::invalid(format!(
            "precoder covers {} subcarriers, channel has {k}",
            precoding.num_subcarriers()
        )));
    }
    let mut total = 0.0;
    for i in 0..k {
        total += log_det_rate(channel.matrix(i), &precoding.precoder(i), noise_per_subcarrier)?;
    }
    Ok(total / k as f64)
}

/// `se × bandwidth` in bits/s.
pub fn data_rate(se: f64, bandwidth: f64) -> f64 {
    se * bandwidth
}

/// Bits per joule.
pub fn energy_efficiency(rate: f64, power: f64) -> Result<f64> {
    if !(power > 0.0) {
        return Err(Error::invalid(format!("power must be positive, got {power}")));
    }
    Ok(rate / power)
}

/// One point on a rate/power trade-off curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePowerPoint {
    pub rate: f64,
    pub power: f64,
    pub energy_efficiency: f64,
    pub descriptor: String,
}

impl RatePowerPoint {
    pub fn new(rate: f64, power: f64, descriptor: impl Into<String>) -> Result<Self> {
        Ok(RatePowerPoint { rate, power, energy_efficiency: energy_efficiency(rate, power)?, descriptor: descriptor.into() })
    }
}

/// Normalized array gain (dB) of a codebook entry toward `target` on every
/// subcarrier of `band`: `10·log10(|a(f)ᴴ w(f)|² / N)` with `‖w(f)‖ = 1`.
pub fn array_gain_sweep(geom: &ArrayGeometry, entry: &CodebookEntry, target: &Direction, band: &Band) -> Result<Vec<f64>> {
    if band.n_subcarriers == 0 {
        return Err(Error::invalid("need at least one subcarrier"));
    }
    if entry.settings.len() != geom.len() {
        return Err(Error::invalid("codebook entry does not match the array"));
    }
    let n = geom.len() as f64;
    let u = target.unit_vector();
    Ok(band
        .frequencies()
        .into_iter()
        .map(|f| {
            let a = geom.steering_vector_toward(&u, f);
            let w = entry.weights(f);
            let g = a.dotc(&w).norm_sqr() / n;
            10.0 * g.log10()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::architectures::{device_census, Architecture, SwitchNetwork};
    use approx::assert_relative_eq;

    #[test]
    fn power_examples() {
        let m = PowerModel::default();
        let aosa = device_census(Architecture::Aosa, 1024, 4, 4, None).unwrap();
        assert_relative_eq!(power_consumption(&aosa, &m, DeviceKind::PhaseShifter), 105.548, max_relative = 1e-12);
        let fc = device_census(Architecture::Fc, 1024, 4, 1, None).unwrap();
        let p_fc = power_consumption(&fc, &m, DeviceKind::PhaseShifter);
        assert_relative_eq!(p_fc, 234.572, max_relative = 1e-12);
        let mut closed = vec![false; 16];
        for i in [0, 4, 5, 9, 10, 14, 15, 3] {
            closed[i] = true;
        }
        let sw = SwitchNetwork::new(4, 4, closed).unwrap();
        let d = device_census(Architecture::Daosa, 1024, 4, 4, Some(&sw)).unwrap();
        let p = power_consumption(&d, &m, DeviceKind::PhaseShifter);
        assert!(p > 105.548 && p < 234.572);
    }

    #[test]
    fn power_model_rejects_negative() {
        let m = PowerModel { p_sw: -1.0, ..Default::default() };
        assert!(m.validate().is_err());
    }

    #[test]
    fn identity_channel_two_bits() {
        let ch = Channel::narrowband(CMat::identity(2, 2)).unwrap();
        let f = vec![CMat::identity(2, 2)];
        assert_relative_eq!(spectral_efficiency(&ch, &f, 1.0).unwrap(), 2.0, max_relative = 1e-12);
        let zero = Channel::narrowband(CMat::zeros(2, 2)).unwrap();
        assert_eq!(spectral_efficiency(&zero, &f, 1.0).unwrap(), 0.0);
        let wrong = vec![CMat::identity(3, 2)];
        assert!(spectral_efficiency(&ch, &wrong, 1.0).is_err());
    }

    #[test]
    fn rate_and_efficiency() {
        assert_relative_eq!(data_rate(20.0, 5e9), 1e11);
        assert_eq!(data_rate(20.0, 0.0), 0.0);
        assert_relative_eq!(data_rate(8.0, 5e9), 4e10);
        assert_relative_eq!(energy_efficiency(1e11, 100.0).unwrap(), 1e9);
        assert_relative_eq!(energy_efficiency(2e11, 100.0).unwrap(), 2e9);
        assert!(energy_efficiency(1.0, 0.0).is_err());
        let p = RatePowerPoint::new(3e10, 7.0, "x").unwrap();
        assert_relative_eq!(p.energy_efficiency * p.power, p.rate, max_relative = 1e-12);
    }

    #[test]
    fn noise_is_independent_of_subcarrier_count() {
        let b = 5e9;
        let total = noise_power(10.0, b);
        let per = noise_power(10.0, b / 16.0);
        assert_relative_eq!(per * 16.0, total, max_relative = 1e-12);
        assert_relative_eq!(noise_power(0.0, 1.0), 10f64.powf(-17.4) * 1e-3, max_relative = 1e-12);
    }
}
