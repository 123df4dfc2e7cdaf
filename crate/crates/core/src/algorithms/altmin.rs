//! Alternating minimization of `Σ_k ‖T_k − A D_k‖_F` under a connectivity
//! mask and unit-modulus analog entries.

use std::f64::consts::PI;

use super::{SolveReport, Solved};
use crate::architectures::{ConnectivityMask, DeviceKind, HybridBeamformer};
use crate::linalg::{frob_sq, least_squares, phase_of, CMat};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltMinOptions {
    pub max_iterations: usize,
    /// Stop once one full iteration lowers the objective by less than this
    /// fraction of the target norm.
    pub tolerance: f64,
    /// Accept masks that leave some antennas unconnected.
    pub allow_dark: bool,
}

impl Default for AltMinOptions {
    fn default() -> Self {
        AltMinOptions { max_iterations: 500, tolerance: 1e-6, allow_dark: false }
    }
}

/// Unnormalized solver output.
#[derive(Debug, Clone)]
pub(crate) struct AltMinRaw {
    pub analog: CMat,
    pub digital: Vec<CMat>,
    pub report: SolveReport,
}

/// Approximates the per-subcarrier targets with one shared analog matrix.
///
/// The analog step updates one masked entry at a time to its exact
/// minimizer given the others, so the objective never increases. The
/// digital step is least squares. The returned digital matrices are scaled
/// so that `‖A D_k‖² = Ns`, and `power` is stored for the composite
/// precoder.
pub fn altmin_hybrid(
    targets: &[CMat],
    mask: &ConnectivityMask,
    n_rf: usize,
    power: f64,
    opts: &AltMinOptions,
) -> Result<Solved> {
    let raw = altmin_raw(targets, mask, n_rf, opts)?;
    let digital = normalize_digital(&raw.analog, raw.digital)?;
    Ok(Solved {
        beamformer: HybridBeamformer {
            analog: raw.analog,
            digital,
            device: DeviceKind::PhaseShifter,
            mask: mask.clone(),
            power,
        },
        report: raw.report,
    })
}

/// Scales each `D_k` so that `‖A D_k‖² = Ns`.
pub(crate) fn normalize_digital(analog: &CMat, digital: Vec<CMat>) -> Result<Vec<CMat>> {
    digital
        .into_iter()
        .enumerate()
        .map(|(k, d)| {
            let ns = d.ncols();
            if ns == 0 {
                return Ok(d);
            }
            let p = frob_sq(&(analog * &d));
            if !(p > 0.0) {
                return Err(Error::invalid(format!("subcarrier {k}: hybrid precoder vanished")));
            }
            Ok(d * C64::new((ns as f64 / p).sqrt(), 0.0))
        })
        .collect()
}

fn check_inputs(targets: &[CMat], mask: &ConnectivityMask, n_rf: usize, opts: &AltMinOptions, cap_streams: bool) -> Result<(usize, usize)> {
    let first = targets.first().ok_or_else(|| Error::invalid("need at least one target"))?;
    let (n, ns) = first.shape();
    if targets.iter().any(|t| t.shape() != (n, ns)) {
        return Err(Error::invalid("targets differ in shape"));
    }
    if mask.n_antennas() != n || mask.n_rf() != n_rf {
        return Err(Error::invalid(format!(
            "mask is {}×{}, expected {n}×{n_rf}",
            mask.n_antennas(),
            mask.n_rf()
        )));
    }
    if cap_streams && ns > n_rf {
        return Err(Error::invalid(format!("{ns} streams exceed {n_rf} RF chains")));
    }
    if !opts.allow_dark && !mask.dark_antennas().is_empty() {
        return Err(Error::invalid("mask leaves antennas unconnected"));
    }
    if opts.max_iterations == 0 || !(opts.tolerance >= 0.0) {
        return Err(Error::invalid("need a positive iteration cap and non-negative tolerance"));
    }
    Ok((n, ns))
}

/// Masked starting point: column `j` follows the phases of target column
/// `j mod Ns` on the middle subcarrier, tilted by a DFT ramp so that
/// repeated columns stay independent.
pub(crate) fn initial_analog(targets: &[CMat], mask: &ConnectivityMask, n_rf: usize) -> CMat {
    let t = &targets[targets.len() / 2];
    let (n, ns) = t.shape();
    CMat::from_fn(n, n_rf, |i, j| {
        if !mask.get(i, j) {
            return C64::new(0.0, 0.0);
        }
        if ns == 0 {
            return C64::new(1.0, 0.0);
        }
        let ramp = C64::from_polar(1.0, 2.0 * PI * (i * (j / ns)) as f64 / n as f64);
        phase_of(t[(i, j % ns)] * ramp)
    })
}

fn objective(residuals: &[CMat]) -> f64 {
    residuals.iter().map(frob_sq).sum::<f64>().sqrt()
}

pub(crate) fn altmin_raw(targets: &[CMat], mask: &ConnectivityMask, n_rf: usize, opts: &AltMinOptions) -> Result<AltMinRaw> {
    check_inputs(targets, mask, n_rf, opts, true)?;
    altmin_block(targets, mask, n_rf, opts)
}

/// Same iteration without the stream cap, for row blocks of a larger target
/// that may carry more streams than the block has chains.
pub(crate) fn altmin_block(targets: &[CMat], mask: &ConnectivityMask, n_rf: usize, opts: &AltMinOptions) -> Result<AltMinRaw> {
    let (n, ns) = check_inputs(targets, mask, n_rf, opts, false)?;
    let mut analog = initial_analog(targets, mask, n_rf);
    if ns == 0 {
        return Ok(AltMinRaw {
            analog,
            digital: vec![CMat::zeros(n_rf, 0); targets.len()],
            report: SolveReport { iterations: 0, converged: true, objective_trace: vec![0.0] },
        });
    }
    let scale = targets.iter().map(frob_sq).sum::<f64>().sqrt();
    let masked: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n_rf).map(move |j| (i, j))).filter(|&(i, j)| mask.get(i, j)).collect();

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut digital: Vec<CMat> = targets.iter().map(|t| least_squares(&analog, t)).collect();
    let mut residuals: Vec<CMat> = targets.iter().zip(&digital).map(|(t, d)| t - &analog * d).collect();
    let mut prev = objective(&residuals);
    trace.push(prev);

    while iterations < opts.max_iterations {
        iterations += 1;
        // Row energies of every D_k, summed over subcarriers.
        let row_energy: Vec<f64> = (0..n_rf)
            .map(|j| digital.iter().map(|d| d.row(j).norm_squared()).sum())
            .collect();
        for &(i, j) in &masked {
            let old = analog[(i, j)];
            let mut c = old * row_energy[j];
            for (r, d) in residuals.iter().zip(&digital) {
                for s in 0..ns {
                    c += r[(i, s)] * d[(j, s)].conj();
                }
            }
            let new = phase_of(c);
            let delta = new - old;
            if delta == C64::new(0.0, 0.0) {
                continue;
            }
            analog[(i, j)] = new;
            for (r, d) in residuals.iter_mut().zip(&digital) {
                for s in 0..ns {
                    r[(i, s)] -= delta * d[(j, s)];
                }
            }
        }
        trace.push(objective(&residuals));

        digital = targets.iter().map(|t| least_squares(&analog, t)).collect();
        residuals = targets.iter().zip(&digital).map(|(t, d)| t - &analog * d).collect();
        let cur = objective(&residuals);
        trace.push(cur);
        if prev - cur <= opts.tolerance * scale {
            converged = true;
            break;
        }
        prev = cur;
    }
    Ok(AltMinRaw { analog, digital, report: SolveReport { iterations, converged, objective_trace: trace } })
}
