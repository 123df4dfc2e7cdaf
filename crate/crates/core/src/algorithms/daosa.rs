//! Switch selection for the dynamic array-of-subarrays architecture.

use super::altmin::{altmin_hybrid, AltMinOptions};
use super::digital::fully_digital_baseline_with;
use super::Solved;
use crate::architectures::{connectivity_for, device_census, Architecture, DeviceKind, SwitchNetwork};
use crate::channel::Channel;
use crate::exec::Exec;
use crate::metrics::{data_rate, power_consumption, spectral_efficiency, PowerModel};
use crate::{Error, Result};

/// When to stop closing switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DaosaBudget {
    /// Stop at exactly this many closed switches.
    ClosedCount(usize),
    /// Cheapest configuration reaching this rate (bits/s).
    MinPowerForRate(f64),
    /// Configuration with the best bits per joule along the greedy path.
    MaxEnergyEfficiency,
}

/// One configuration on the greedy path.
#[derive(Debug, Clone, PartialEq)]
pub struct DaosaStep {
    pub closed: usize,
    pub pattern: String,
    pub spectral_efficiency: f64,
    pub rate: f64,
    pub power: f64,
    pub energy_efficiency: f64,
}

#[derive(Debug, Clone)]
pub struct DaosaOutcome {
    pub switches: SwitchNetwork,
    pub solved: Solved,
    /// Greedy path from the best one-subarray-per-chain start to the
    /// stopping point (or to all switches closed).
    pub trace: Vec<DaosaStep>,
    /// Index of the returned configuration in `trace`.
    pub selected: usize,
    /// False when a rate target was not reached even with every switch
    /// closed; the returned configuration is then the fully closed one.
    pub feasible: bool,
}

struct Candidate {
    switches: SwitchNetwork,
    solved: Solved,
    step: DaosaStep,
}

/// Greedy switch selection.
///
/// Starts from the best assignment of each RF chain to its own subarray,
/// then repeatedly closes the single switch that raises the rate most. Each
/// configuration is scored with alternating minimization toward the fully
/// digital precoder, so closing every switch reproduces the fully connected
/// design.
#[allow(clippy::too_many_arguments)]
pub fn daosa_select(
    channel: &Channel,
    n_rf: usize,
    budget: DaosaBudget,
    power_model: &PowerModel,
    total_power: f64,
    noise: f64,
    opts: &AltMinOptions,
) -> Result<DaosaOutcome> {
    daosa_select_with(channel, n_rf, budget, power_model, total_power, noise, opts, Exec::default())
}

#[allow(clippy::too_many_arguments)]
pub fn daosa_select_with(
    channel: &Channel,
    n_rf: usize,
    budget: DaosaBudget,
    power_model: &PowerModel,
    total_power: f64,
    noise: f64,
    opts: &AltMinOptions,
    exec: Exec,
) -> Result<DaosaOutcome> {
    power_model.validate()?;
    let labels = channel.tx_subarray_index();
    let n_sub = labels.iter().copied().max().map_or(0, |m| m + 1);
    if n_rf == 0 || n_rf > n_sub {
        return Err(Error::invalid(format!("need 1..={n_sub} RF chains, got {n_rf}")));
    }
    let total = n_rf * n_sub;
    match budget {
        DaosaBudget::ClosedCount(m) if m < n_rf || m > total => {
            return Err(Error::invalid(format!("closed switch count must lie in {n_rf}..={total}, got {m}")));
        }
        DaosaBudget::MinPowerForRate(r) if !(r >= 0.0) => {
            return Err(Error::invalid("rate target must be non-negative"));
        }
        _ => {}
    }
    let max_streams = n_rf.min(channel.num_rx());
    let fd = fully_digital_baseline_with(channel, total_power, noise, max_streams, exec)?;
    let targets = fd.hybrid_targets();
    let opts = AltMinOptions { allow_dark: true, ..*opts };
    let n = channel.num_tx();
    let eval = |sw: &SwitchNetwork| -> Result<Candidate> {
        let mask = connectivity_for(Architecture::Daosa, &labels, n_sub, n_rf, Some(sw))?;
        let solved = altmin_hybrid(&targets, &mask, n_rf, fd.power_per_subcarrier, &opts)?;
        let se = spectral_efficiency(channel, &solved.beamformer, noise)?;
        let census = device_census(Architecture::Daosa, n, n_rf, n_sub, Some(sw))?;
        let power = power_consumption(&census, power_model, DeviceKind::PhaseShifter);
        let rate = data_rate(se, channel.bandwidth());
        let step = DaosaStep {
            closed: sw.closed_count(),
            pattern: sw.pattern(),
            spectral_efficiency: se,
            rate,
            power,
            energy_efficiency: rate / power,
        };
        Ok(Candidate { switches: sw.clone(), solved, step })
    };

    let starts: Vec<SwitchNetwork> = combinations(n_sub, n_rf)
        .into_iter()
        .map(|subset| {
            let mut closed = vec![false; total];
            for (r, &s) in subset.iter().enumerate() {
                closed[r * n_sub + s] = true;
            }
            SwitchNetwork::new_allow_dark(n_rf, n_sub, closed)
        })
        .collect::<Result<_>>()?;
    let mut current = best(exec.map(&starts, |sw| eval(sw)))?;
    let mut path: Vec<Candidate> = Vec::new();

    loop {
        let closed = current.step.closed;
        let stop = match budget {
            DaosaBudget::ClosedCount(m) => closed >= m,
            DaosaBudget::MinPowerForRate(r) => current.step.rate >= r,
            DaosaBudget::MaxEnergyEfficiency => false,
        };
        let at_end = closed == total;
        let sw = current.switches.clone();
        path.push(current);
        if stop || at_end {
            break;
        }
        let moves: Vec<(usize, usize)> = (0..n_rf)
            .flat_map(|r| (0..n_sub).map(move |s| (r, s)))
            .filter(|&(r, s)| !sw.is_closed(r, s))
            .collect();
        current = best(exec.map(&moves, |&(r, s)| eval(&sw.with_closed(r, s))))?;
    }

    let (selected, feasible) = match budget {
        DaosaBudget::ClosedCount(_) => (path.len() - 1, true),
        DaosaBudget::MinPowerForRate(r) => (path.len() - 1, path.last().is_some_and(|c| c.step.rate >= r)),
        DaosaBudget::MaxEnergyEfficiency => {
            let i = (0..path.len())
                .fold(0, |b, i| if path[i].step.energy_efficiency > path[b].step.energy_efficiency { i } else { b });
            (i, true)
        }
    };
    let trace = path.iter().map(|c| c.step.clone()).collect();
    let chosen = path.swap_remove(selected);
    Ok(DaosaOutcome { switches: chosen.switches, solved: chosen.solved, trace, selected, feasible })
}

/// Highest rate; ties go to the earliest candidate.
fn best(candidates: Vec<Result<Candidate>>) -> Result<Candidate> {
    let mut out: Option<Candidate> = None;
    for c in candidates {
        let c = c?;
        if out.as_ref().is_none_or(|b| c.step.rate > b.step.rate || (c.step.rate == b.step.rate && c.step.spectral_efficiency > b.step.spectral_efficiency)) {
            out = Some(c);
        }
    }
    out.ok_or_else(|| Error::invalid("no candidate configuration"))
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}
