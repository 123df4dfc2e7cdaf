//! Successive interference cancellation for array-of-subarrays precoding.

use nalgebra::DVector;

use super::altmin::normalize_digital;
use super::digital::fully_digital_baseline_with;
use super::{SolveReport, Solved};
use crate::architectures::{connectivity_for, Architecture, DeviceKind, HybridBeamformer};
use crate::channel::Channel;
use crate::exec::Exec;
use crate::linalg::{dominant_eigenvector, log2_det_hpd, phase_of, CMat};
use crate::{Error, Result, C64};

#[derive(Debug, Clone)]
pub struct SicOutcome {
    pub solved: Solved,
    /// Equal-power rate (bits/s/Hz, averaged over subcarriers) after each
    /// subarray is added.
    pub partial_rates: Vec<f64>,
}

/// Designs one analog column per subarray in turn.
///
/// With the columns fixed so far collected in `P`, subarray `s` maximizes
/// the rate increment `log2(1 + c·pᴴ Q_s p)` where `Q_s` is the channel Gram
/// of its antennas after projecting out what `P` already delivers. The
/// unit-modulus column is the phase of the dominant eigenvector of `Q_s`.
/// Digital precoding is then SVD plus waterfilling on the effective channel.
pub fn sic_aosa(channel: &Channel, n_rf: usize, total_power: f64, noise: f64) -> Result<SicOutcome> {
    sic_aosa_with(channel, n_rf, total_power, noise, Exec::default())
}

pub fn sic_aosa_with(channel: &Channel, n_rf: usize, total_power: f64, noise: f64, exec: Exec) -> Result<SicOutcome> {
    let labels = channel.tx_subarray_index();
    let n_sub = labels.iter().copied().max().map_or(0, |m| m + 1);
    if n_sub != n_rf {
        return Err(Error::invalid(format!(
            "AoSA needs one RF chain per subarray ({n_rf} chains, {n_sub} subarrays)"
        )));
    }
    if !(noise > 0.0) || !(total_power > 0.0) {
        return Err(Error::invalid("noise and power must be positive"));
    }
    let n = channel.num_tx();
    let kn = channel.num_subcarriers();
    let rows: Vec<Vec<usize>> = (0..n_sub).map(|s| (0..n).filter(|&a| labels[a] == s).collect()).collect();
    if rows.iter().any(|r| r.is_empty()) {
        return Err(Error::invalid("every subarray needs at least one antenna"));
    }
    let p_k = total_power / kn as f64;
    let c = p_k / (n_rf as f64 * noise);

    let mut analog = CMat::zeros(n, n_rf);
    // H_k P for the columns placed so far.
    let mut hp: Vec<CMat> = vec![CMat::zeros(channel.num_rx(), 0); kn];
    let mut partial_rates = Vec::with_capacity(n_sub);
    for (s, idx) in rows.iter().enumerate() {
        let m = idx.len();
        let blocks = exec.map_range(kn, |k| {
            let hs = channel.matrix(k).select_columns(idx);
            let mut q = hs.adjoint() * &hs;
            if s > 0 {
                let g = hp[k].adjoint() * &hp[k] * C64::new(c, 0.0) + CMat::identity(s, s);
                let inner = g.try_inverse().expect("I + c·Gram is positive definite");
                let x = hs.adjoint() * &hp[k];
                q -= &x * inner * x.adjoint() * C64::new(c, 0.0);
            }
            q
        });
        let q = blocks.into_iter().fold(CMat::zeros(m, m), |acc, b| acc + b);
        let q = (&q + q.adjoint()) * C64::new(0.5, 0.0);
        let (_, v) = dominant_eigenvector(&q);
        let col: Vec<C64> = v.iter().map(|&z| phase_of(z)).collect();
        let p_col = DVector::from_iterator(m, col.iter().map(|z| z / (m as f64).sqrt()));
        for (r, &a) in idx.iter().enumerate() {
            analog[(a, s)] = col[r];
        }
        hp = exec.map_range(kn, |k| {
            let hs = channel.matrix(k).select_columns(idx);
            let mut next = CMat::zeros(channel.num_rx(), s + 1);
            next.columns_mut(0, s).copy_from(&hp[k]);
            next.set_column(s, &(&hs * &p_col));
            next
        });
        let rate = hp
            .iter()
            .map(|h| log2_det_hpd(&(CMat::identity(s + 1, s + 1) + h.adjoint() * h * C64::new(c, 0.0))))
            .sum::<f64>()
            / kn as f64;
        partial_rates.push(rate);
    }

    let inv_sqrt_m: Vec<f64> = rows.iter().map(|r| 1.0 / (r.len() as f64).sqrt()).collect();
    let scale = CMat::from_diagonal(&DVector::from_iterator(n_rf, inv_sqrt_m.iter().map(|&x| C64::new(x, 0.0))));
    let a_norm = &analog * &scale;
    let effective: Vec<CMat> = (0..kn).map(|k| channel.matrix(k) * &a_norm).collect();
    let eff = Channel::from_matrices(channel.subcarrier_frequencies().to_vec(), channel.bandwidth(), effective)?;
    let max_streams = n_rf.min(channel.num_rx());
    let fd = fully_digital_baseline_with(&eff, total_power, noise, max_streams, exec)?;
    let digital: Vec<CMat> = fd.hybrid_targets().into_iter().map(|t| &scale * t).collect();
    let digital = normalize_digital(&analog, digital)?;
    let mask = connectivity_for(Architecture::Aosa, &labels, n_sub, n_rf, None)?;
    Ok(SicOutcome {
        solved: Solved {
            beamformer: HybridBeamformer { analog, digital, device: DeviceKind::PhaseShifter, mask, power: p_k },
            report: SolveReport { iterations: n_sub, converged: true, objective_trace: partial_rates.clone() },
        },
        partial_rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ArrayGeometry;

    #[test]
    fn rate_grows_with_each_subarray() {
        let base = ArrayGeometry::build_upa(1, 4, 0.5, 3e11).unwrap();
        let g = ArrayGeometry::partition_wsms(&base, 4, 4.0 * base.pitch()).unwrap();
        let h = CMat::from_fn(3, 16, |i, j| C64::from_polar(1.0, ((i + 1) * (j * j + 1)) as f64 * 0.41));
        let ch = Channel::narrowband(h).unwrap().with_tx_geometry(g).unwrap();
        let out = sic_aosa(&ch, 4, 1.0, 0.1).unwrap();
        for w in out.partial_rates.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        out.solved.beamformer.validate().unwrap();
    }
}
