//! Hardware models for the hybrid beamforming architectures.
//!
//! * FC: every RF chain reaches every antenna through its own phase shifter.
//! * AoSA: RF chain `r` owns subarray `r` and nothing else.
//! * WSMS: widely-spaced subarrays, RF chains split evenly across them and
//!   fully connected inside their subarray.
//! * DAoSA: a switch between every (RF chain, subarray) pair; a full
//!   phase-shifter bank sits behind each switch but only draws power while
//!   the switch is closed.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{frob_sq, CMat};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Fc,
    Aosa,
    Wsms,
    Daosa,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Architecture::Fc => "fc",
            Architecture::Aosa => "aosa",
            Architecture::Wsms => "wsms",
            Architecture::Daosa => "daosa",
        };
        f.write_str(s)
    }
}

/// Which RF chain may drive which antenna (`antennas × rf_chains`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityMask {
    n_antennas: usize,
    n_rf: usize,
    allowed: Vec<bool>,
}

impl ConnectivityMask {
    pub fn from_fn(n_antennas: usize, n_rf: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut allowed = Vec::with_capacity(n_antennas * n_rf);
        for a in 0..n_antennas {
            for r in 0..n_rf {
                allowed.push(f(a, r));
            }
        }
        ConnectivityMask { n_antennas, n_rf, allowed }
    }

    pub fn full(n_antennas: usize, n_rf: usize) -> Self {
        Self::from_fn(n_antennas, n_rf, |_, _| true)
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn n_rf(&self) -> usize {
        self.n_rf
    }

    #[inline]
    pub fn get(&self, antenna: usize, rf: usize) -> bool {
        self.allowed[antenna * self.n_rf + rf]
    }

    pub fn count_ones(&self) -> usize {
        self.allowed.iter().filter(|&&b| b).count()
    }

    pub fn is_full(&self) -> bool {
        self.allowed.iter().all(|&b| b)
    }

    /// Antennas with no RF chain attached.
    pub fn dark_antennas(&self) -> Vec<usize> {
        (0..self.n_antennas)
            .filter(|&a| (0..self.n_rf).all(|r| !self.get(a, r)))
            .collect()
    }

    /// Restriction to a subset of antennas and chains.
    pub fn select(&self, antennas: &[usize], chains: &[usize]) -> Self {
        Self::from_fn(antennas.len(), chains.len(), |a, r| self.get(antennas[a], chains[r]))
    }
}

/// Closed/open state of every RF-chain-to-subarray switch (`rf × subarrays`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SwitchNetwork {
    n_rf: usize,
    n_subarrays: usize,
    closed: Vec<bool>,
}

impl SwitchNetwork {
    /// Every RF chain and every subarray must have a closed switch.
    pub fn new(n_rf: usize, n_subarrays: usize, closed: Vec<bool>) -> Result<Self> {
        let net = Self::new_allow_dark(n_rf, n_subarrays, closed)?;
        if let Some(s) = (0..n_subarrays).find(|&s| (0..n_rf).all(|r| !net.is_closed(r, s))) {
            return Err(Error::invalid(format!("subarray {s} has no closed switch")));
        }
        Ok(net)
    }

    /// Like [`SwitchNetwork::new`] but tolerates unconnected subarrays.
    pub fn new_allow_dark(n_rf: usize, n_subarrays: usize, closed: Vec<bool>) -> Result<Self> {
        if closed.len() != n_rf * n_subarrays {
            return Err(Error::invalid(format!(
                "switch matrix has {} entries, expected {n_rf}×{n_subarrays}",
                closed.len()
            )));
        }
        let net = SwitchNetwork { n_rf, n_subarrays, closed };
        if let Some(r) = (0..n_rf).find(|&r| (0..n_subarrays).all(|s| !net.is_closed(r, s))) {
            return Err(Error::invalid(format!("RF chain {r} has no closed switch")));
        }
        Ok(net)
    }

    pub fn all_closed(n_rf: usize, n_subarrays: usize) -> Self {
        SwitchNetwork { n_rf, n_subarrays, closed: vec![true; n_rf * n_subarrays] }
    }

    /// Chain `r` connected to subarray `r` only.
    pub fn identity(n: usize) -> Self {
        let mut closed = vec![false; n * n];
        for r in 0..n {
            closed[r * n + r] = true;
        }
        SwitchNetwork { n_rf: n, n_subarrays: n, closed }
    }

    pub fn n_rf(&self) -> usize {
        self.n_rf
    }

    pub fn n_subarrays(&self) -> usize {
        self.n_subarrays
    }

    #[inline]
    pub fn is_closed(&self, rf: usize, subarray: usize) -> bool {
        self.closed[rf * self.n_subarrays + subarray]
    }

    pub fn closed_count(&self) -> usize {
        self.closed.iter().filter(|&&c| c).count()
    }

    /// Copy with one more switch closed.
    pub fn with_closed(&self, rf: usize, subarray: usize) -> Self {
        let mut next = self.clone();
        next.closed[rf * self.n_subarrays + subarray] = true;
        next
    }

    /// Row-major `0/1` string, one row per RF chain separated by `|`.
    pub fn pattern(&self) -> String {
        (0..self.n_rf)
            .map(|r| {
                (0..self.n_subarrays)
                    .map(|s| if self.is_closed(r, s) { '1' } else { '0' })
                    .collect::<String>()
            })
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// Contiguous equal blocks: antenna `a` belongs to subarray `a / (N / k)`.
pub fn contiguous_subarrays(n_antennas: usize, n_subarrays: usize) -> Result<Vec<usize>> {
    if n_subarrays == 0 || !n_antennas.is_multiple_of(n_subarrays) {
        return Err(Error::invalid(format!(
            "{n_antennas} antennas do not split into {n_subarrays} equal subarrays"
        )));
    }
    let m = n_antennas / n_subarrays;
    Ok((0..n_antennas).map(|a| a / m).collect())
}

/// RF chains per WSMS subarray: even split, remainder to the first subarrays.
pub fn wsms_chain_split(n_rf: usize, n_subarrays: usize) -> Vec<std::ops::Range<usize>> {
    let base = n_rf / n_subarrays;
    let extra = n_rf % n_subarrays;
    let mut start = 0;
    (0..n_subarrays)
        .map(|s| {
            let count = base + usize::from(s < extra);
            let r = start..start + count;
            start += count;
            r
        })
        .collect()
}

/// Connectivity for antennas split into contiguous equal subarrays.
pub fn connectivity(
    arch: Architecture,
    n_antennas: usize,
    n_rf: usize,
    n_subarrays: usize,
    switches: Option<&SwitchNetwork>,
) -> Result<ConnectivityMask> {
    let labels = if arch == Architecture::Fc {
        vec![0; n_antennas]
    } else {
        contiguous_subarrays(n_antennas, n_subarrays)?
    };
    let n_sub = if arch == Architecture::Fc { n_subarrays.max(1) } else { n_subarrays };
    connectivity_for(arch, &labels, n_sub, n_rf, switches)
}

/// Connectivity for an explicit antenna-to-subarray labelling.
pub fn connectivity_for(
    arch: Architecture,
    subarray_of: &[usize],
    n_subarrays: usize,
    n_rf: usize,
    switches: Option<&SwitchNetwork>,
) -> Result<ConnectivityMask> {
    let n = subarray_of.len();
    if n_rf == 0 {
        return Err(Error::invalid("need at least one RF chain"));
    }
    if subarray_of.iter().any(|&s| s >= n_subarrays) {
        return Err(Error::invalid("subarray label out of range"));
    }
    match arch {
        Architecture::Fc => Ok(ConnectivityMask::full(n, n_rf)),
        Architecture::Aosa => {
            if n_rf != n_subarrays {
                return Err(Error::invalid(format!(
                    "AoSA needs one RF chain per subarray ({n_rf} chains, {n_subarrays} subarrays)"
                )));
            }
            Ok(ConnectivityMask::from_fn(n, n_rf, |a, r| subarray_of[a] == r))
        }
        Architecture::Wsms => {
            if n_rf < n_subarrays {
                return Err(Error::invalid("WSMS needs at least one RF chain per subarray"));
            }
            let split = wsms_chain_split(n_rf, n_subarrays);
            Ok(ConnectivityMask::from_fn(n, n_rf, |a, r| split[subarray_of[a]].contains(&r)))
        }
        Architecture::Daosa => {
            let sw = switches.ok_or_else(|| Error::invalid("DAoSA needs a switch network"))?;
            if sw.n_rf() != n_rf || sw.n_subarrays() != n_subarrays {
                return Err(Error::invalid(format!(
                    "switch network is {}×{}, expected {n_rf}×{n_subarrays}",
                    sw.n_rf(),
                    sw.n_subarrays()
                )));
            }
            Ok(ConnectivityMask::from_fn(n, n_rf, |a, r| sw.is_closed(r, subarray_of[a])))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    #[default]
    PhaseShifter,
    Ttd,
}

/// One phase-control device and its setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDevice {
    pub kind: DeviceKind,
    /// Radians for a phase shifter, seconds for a delay line.
    pub setting: f64,
}

impl PhaseDevice {
    pub fn phase_shifter(theta: f64) -> Self {
        PhaseDevice { kind: DeviceKind::PhaseShifter, setting: theta }
    }

    pub fn ttd(delay: f64) -> Self {
        PhaseDevice { kind: DeviceKind::Ttd, setting: delay }
    }
}

/// Complex response of a device at frequency `f`. A phase shifter applies the
/// same phase at every frequency; a delay line's phase grows linearly in `f`.
pub fn phase_response(device: &PhaseDevice, f: f64, _f_c: f64) -> Result<C64> {
    if !(f > 0.0) {
        return Err(Error::invalid(format!("frequency must be positive, got {f}")));
    }
    match device.kind {
        DeviceKind::PhaseShifter => Ok(C64::from_polar(1.0, device.setting)),
        DeviceKind::Ttd => {
            if device.setting < 0.0 {
                return Err(Error::invalid(format!("negative delay {}", device.setting)));
            }
            Ok(C64::from_polar(1.0, -2.0 * PI * f * device.setting))
        }
    }
}

/// Rounds delays onto a uniform grid of step `max_delay / 2^bits`.
pub fn quantize_delays(delays: &[f64], bits: u32) -> Vec<f64> {
    let max = delays.iter().copied().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return delays.to_vec();
    }
    let step = max / 2f64.powi(bits as i32);
    delays.iter().map(|&d| (d / step).round() * step).collect()
}

/// Hardware inventory used for power accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DeviceCensus {
    pub phase_devices_total: usize,
    pub phase_devices_active: usize,
    pub switches_total: usize,
    pub switches_closed: usize,
    pub rf_chains: usize,
    pub power_amplifiers: usize,
}

pub fn device_census(
    arch: Architecture,
    n_antennas: usize,
    n_rf: usize,
    n_subarrays: usize,
    switches: Option<&SwitchNetwork>,
) -> Result<DeviceCensus> {
    let mut c = DeviceCensus { rf_chains: n_rf, power_amplifiers: n_antennas, ..Default::default() };
    match arch {
        Architecture::Fc => {
            c.phase_devices_total = n_antennas * n_rf;
            c.phase_devices_active = c.phase_devices_total;
        }
        Architecture::Aosa => {
            if n_rf != n_subarrays {
                return Err(Error::invalid("AoSA needs one RF chain per subarray"));
            }
            contiguous_subarrays(n_antennas, n_subarrays)?;
            c.phase_devices_total = n_antennas;
            c.phase_devices_active = n_antennas;
        }
        Architecture::Wsms => {
            let labels = contiguous_subarrays(n_antennas, n_subarrays)?;
            if n_rf < n_subarrays {
                return Err(Error::invalid("WSMS needs at least one RF chain per subarray"));
            }
            let split = wsms_chain_split(n_rf, n_subarrays);
            c.phase_devices_total = labels.iter().map(|&s| split[s].len()).sum();
            c.phase_devices_active = c.phase_devices_total;
        }
        Architecture::Daosa => {
            contiguous_subarrays(n_antennas, n_subarrays)?;
            let sw = switches.ok_or_else(|| Error::invalid("DAoSA needs a switch network"))?;
            if sw.n_rf() != n_rf || sw.n_subarrays() != n_subarrays {
                return Err(Error::invalid("switch network shape mismatch"));
            }
            let per_bank = n_antennas / n_subarrays;
            c.phase_devices_total = n_antennas * n_rf;
            c.phase_devices_active = sw.closed_count() * per_bank;
            c.switches_total = n_rf * n_subarrays;
            c.switches_closed = sw.closed_count();
        }
    }
    Ok(c)
}

/// Analog matrix plus one digital matrix per subcarrier.
///
/// The analog matrix is unit modulus on the mask and exactly zero off it;
/// every `analog · digital[k]` has squared Frobenius norm equal to the stream
/// count, and `power` is the per-subcarrier transmit power spread over those
/// streams.
#[derive(Debug, Clone)]
pub struct HybridBeamformer {
    pub analog: CMat,
    pub digital: Vec<CMat>,
    pub device: DeviceKind,
    pub mask: ConnectivityMask,
    pub power: f64,
}

impl HybridBeamformer {
    pub fn streams(&self) -> usize {
        self.digital.first().map_or(0, |d| d.ncols())
    }

    pub fn n_rf(&self) -> usize {
        self.analog.ncols()
    }

    /// `sqrt(P/Ns) · analog · digital[k]`.
    pub fn composite(&self, k: usize) -> CMat {
        let ns = self.streams();
        if ns == 0 {
            return CMat::zeros(self.analog.nrows(), 0);
        }
        (&self.analog * &self.digital[k]) * C64::new((self.power / ns as f64).sqrt(), 0.0)
    }

    /// Checks support, unit modulus and the power normalization.
    pub fn validate(&self) -> Result<()> {
        let (n, r) = self.analog.shape();
        if self.mask.n_antennas() != n || self.mask.n_rf() != r {
            return Err(Error::invalid("analog matrix and mask shapes differ"));
        }
        for a in 0..n {
            for j in 0..r {
                let z = self.analog[(a, j)];
                if self.mask.get(a, j) {
                    if (z.norm() - 1.0).abs() > 1e-12 {
                        return Err(Error::invalid(format!(
                            "analog entry ({a},{j}) has modulus {}",
                            z.norm()
                        )));
                    }
                } else if z != C64::new(0.0, 0.0) {
                    return Err(Error::invalid(format!("analog entry ({a},{j}) lies off the mask")));
                }
            }
        }
        let ns = self.streams() as f64;
        for (k, d) in self.digital.iter().enumerate() {
            if d.nrows() != r {
                return Err(Error::invalid("digital matrix rows differ from RF chains"));
            }
            let p = frob_sq(&(&self.analog * d));
            if (p - ns).abs() > 1e-9 * ns.max(1.0) {
                return Err(Error::invalid(format!(
                    "subcarrier {k}: precoder power {p} differs from {ns} streams"
                )));
            }
        }
        Ok(())
    }
}
