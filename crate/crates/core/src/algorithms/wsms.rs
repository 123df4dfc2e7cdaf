//! Widely spaced multi-subarray precoding.

use super::altmin::{altmin_block, normalize_digital, AltMinOptions};
use super::digital::fully_digital_baseline_with;
use super::{SolveReport, Solved};
use crate::architectures::{connectivity_for, wsms_chain_split, Architecture, ConnectivityMask, DeviceKind, HybridBeamformer};
use crate::channel::Channel;
use crate::exec::Exec;
use crate::linalg::CMat;
use crate::{Error, Result};

/// Hybrid precoder for a WSMS transmitter.
///
/// The fully digital precoder is split by subarray rows and each block is
/// approximated independently by alternating minimization with that
/// subarray's own RF chains. With a single subarray this is exactly the
/// fully connected solver.
pub fn wsms_solve(channel: &Channel, n_rf: usize, total_power: f64, noise: f64, opts: &AltMinOptions) -> Result<Solved> {
    wsms_solve_with(channel, n_rf, total_power, noise, opts, Exec::default())
}

pub fn wsms_solve_with(
    channel: &Channel,
    n_rf: usize,
    total_power: f64,
    noise: f64,
    opts: &AltMinOptions,
    exec: Exec,
) -> Result<Solved> {
    let labels = channel.tx_subarray_index();
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    if n_rf < k {
        return Err(Error::invalid(format!("{n_rf} RF chains cannot serve {k} subarrays")));
    }
    let max_streams = n_rf.min(channel.num_rx());
    let fd = fully_digital_baseline_with(channel, total_power, noise, max_streams, exec)?;
    let targets = fd.hybrid_targets();
    let ns = fd.streams();
    let n = channel.num_tx();
    let split = wsms_chain_split(n_rf, k);
    let rows: Vec<Vec<usize>> = (0..k).map(|s| (0..n).filter(|&a| labels[a] == s).collect()).collect();

    let blocks = exec.map_range(k, |s| {
        let chains = split[s].len();
        let block_targets: Vec<CMat> = targets.iter().map(|t| t.select_rows(&rows[s])).collect();
        let mask = ConnectivityMask::full(rows[s].len(), chains);
        altmin_block(&block_targets, &mask, chains, opts)
    });

    let mut analog = CMat::zeros(n, n_rf);
    let mut digital = vec![CMat::zeros(n_rf, ns); targets.len()];
    let mut report = SolveReport { iterations: 0, converged: true, objective_trace: Vec::new() };
    for (s, block) in blocks.into_iter().enumerate() {
        let block = block?;
        for (r, &a) in rows[s].iter().enumerate() {
            for (c, j) in split[s].clone().enumerate() {
                analog[(a, j)] = block.analog[(r, c)];
            }
        }
        for (d, bd) in digital.iter_mut().zip(&block.digital) {
            d.rows_mut(split[s].start, split[s].len()).copy_from(bd);
        }
        report.iterations = report.iterations.max(block.report.iterations);
        report.converged &= block.report.converged;
        report.objective_trace.push(*block.report.objective_trace.last().unwrap_or(&0.0));
    }
    let digital = normalize_digital(&analog, digital)?;
    let mask = connectivity_for(Architecture::Wsms, &labels, k, n_rf, None)?;
    Ok(Solved {
        beamformer: HybridBeamformer {
            analog,
            digital,
            device: DeviceKind::PhaseShifter,
            mask,
            power: fd.power_per_subcarrier,
        },
        report,
    })
}
