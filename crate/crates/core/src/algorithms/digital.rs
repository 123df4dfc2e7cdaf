//! Fully digital SVD precoding with waterfilling.

use nalgebra::DVector;

use super::waterfilling::waterfilling;
use crate::channel::Channel;
use crate::exec::Exec;
use crate::linalg::CMat;
use crate::metrics::{data_rate, Precoding};
use crate::{Error, Result, C64};

/// Singular values below this fraction of the largest one are not used as
/// streams.
pub const RANK_THRESHOLD: f64 = 1e-3;

/// Per-subcarrier SVD precoders and their waterfilled powers.
///
/// The transmit power is split evenly over subcarriers; each subcarrier then
/// waterfills its share over the common stream count.
#[derive(Debug, Clone)]
pub struct FullyDigitalSolution {
    /// Unit-norm right singular vectors, `antennas × streams`.
    pub directions: Vec<CMat>,
    /// Watts per stream on each subcarrier.
    pub power_allocation: Vec<Vec<f64>>,
    pub power_per_subcarrier: f64,
    pub spectral_efficiency: f64,
    /// bits/s over the channel bandwidth.
    pub achievable_rate: f64,
}

impl FullyDigitalSolution {
    pub fn streams(&self) -> usize {
        self.directions.first().map_or(0, |v| v.ncols())
    }

    /// Precoder of subcarrier `k`: `V · diag(sqrt(p))`.
    pub fn precoder_matrix(&self, k: usize) -> CMat {
        scale_columns(&self.directions[k], self.power_allocation[k].iter().map(|p| p.sqrt()))
    }

    /// Targets for hybrid approximation: the precoder rescaled so that its
    /// squared Frobenius norm equals the stream count.
    pub fn hybrid_targets(&self) -> Vec<CMat> {
        let ns = self.streams() as f64;
        let p = self.power_per_subcarrier;
        (0..self.directions.len())
            .map(|k| {
                if p > 0.0 {
                    let w = self.power_allocation[k].iter().map(|&pi| (ns * pi / p).sqrt());
                    scale_columns(&self.directions[k], w)
                } else {
                    self.directions[k].clone()
                }
            })
            .collect()
    }
}

impl Precoding for FullyDigitalSolution {
    fn num_subcarriers(&self) -> usize {
        self.directions.len()
    }

    fn precoder(&self, k: usize) -> CMat {
        self.precoder_matrix(k)
    }
}

pub(crate) fn scale_columns(m: &CMat, weights: impl Iterator<Item = f64>) -> CMat {
    let w: Vec<C64> = weights.map(|x| C64::new(x, 0.0)).collect();
    m * CMat::from_diagonal(&DVector::from_vec(w))
}

/// Fully digital upper bound on the given channel.
///
/// `total_power` is spread evenly over subcarriers and `noise` is the noise
/// power of one subcarrier. The stream count is the smallest numerical rank
/// over subcarriers, capped by `max_streams`.
pub fn fully_digital_baseline(channel: &Channel, total_power: f64, noise: f64, max_streams: usize) -> Result<FullyDigitalSolution> {
    fully_digital_baseline_with(channel, total_power, noise, max_streams, Exec::default())
}

pub fn fully_digital_baseline_with(
    channel: &Channel,
    total_power: f64,
    noise: f64,
    max_streams: usize,
    exec: Exec,
) -> Result<FullyDigitalSolution> {
    let dims = channel.num_rx().min(channel.num_tx());
    if max_streams == 0 || max_streams > dims {
        return Err(Error::invalid(format!("max_streams must lie in 1..={dims}, got {max_streams}")));
    }
    if !(noise > 0.0) {
        return Err(Error::invalid("noise power must be positive"));
    }
    if !(total_power >= 0.0) {
        return Err(Error::invalid("total power must be non-negative"));
    }
    let kn = channel.num_subcarriers();
    let svds = exec.map_range(kn, |k| channel.svd(k));
    let ns = svds
        .iter()
        .map(|s| s.rank(RANK_THRESHOLD))
        .min()
        .unwrap_or(0)
        .min(max_streams);
    let p_k = total_power / kn as f64;
    let mut directions = Vec::with_capacity(kn);
    let mut power_allocation = Vec::with_capacity(kn);
    let mut se = 0.0;
    for svd in &svds {
        let gains: Vec<f64> = svd.singular_values[..ns].iter().map(|s| s * s).collect();
        let p = waterfilling(&gains, noise, p_k)?;
        se += gains.iter().zip(&p).map(|(g, p)| (1.0 + p * g / noise).log2()).sum::<f64>();
        directions.push(svd.v.columns(0, ns).into_owned());
        power_allocation.push(p);
    }
    let spectral_efficiency = se / kn as f64;
    Ok(FullyDigitalSolution {
        directions,
        power_allocation,
        power_per_subcarrier: p_k,
        spectral_efficiency,
        achievable_rate: data_rate(spectral_efficiency, channel.bandwidth()),
    })
}
