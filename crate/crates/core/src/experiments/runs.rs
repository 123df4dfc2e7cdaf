//! The sweeps behind each CLI subcommand.

use crate::algorithms::altmin::{altmin_hybrid, AltMinOptions};
use crate::algorithms::codebook::{Band, CodebookEntry};
use crate::algorithms::daosa::{daosa_select_with, DaosaBudget};
use crate::algorithms::digital::fully_digital_baseline_with;
use crate::algorithms::sic::sic_aosa_with;
use crate::algorithms::wsms::wsms_solve_with;
use crate::algorithms::Solved;
use crate::architectures::{connectivity_for, device_census, Architecture, ConnectivityMask, DeviceKind, SwitchNetwork};
use crate::channel::{assemble_channel_with, two_path_scenario, Channel, Propagation};
use crate::exec::Exec;
use crate::geometry::{orthogonal_separation, rayleigh_distance, ArrayGeometry, Direction};
use crate::metrics::{array_gain_sweep, data_rate, noise_power, power_consumption, spectral_efficiency};
use crate::{wavelength, Error, Result};

use super::config::{dbm_to_watts, AosaSolver, ScenarioConfig};
use super::output::{Cell, Metadata, SweepResult};

/// Relative tolerance for the DAoSA endpoint checks.
pub const ENDPOINT_TOLERANCE: f64 = 1e-6;

/// The full `n_x × n_y` array of one link end.
pub fn full_array(cfg: &ScenarioConfig) -> Result<ArrayGeometry> {
    let g = &cfg.geometry;
    ArrayGeometry::build_upa(g.n_x, g.n_y, g.spacing, cfg.channel.carrier_frequency)
}

/// The full array cut along x into `s` contiguous subarrays.
pub fn tiled_array(cfg: &ScenarioConfig, s: usize) -> Result<ArrayGeometry> {
    let g = &cfg.geometry;
    if s == 0 || !g.n_x.is_multiple_of(s) {
        return Err(Error::invalid(format!("{} rows do not split into {s} subarrays", g.n_x)));
    }
    let base = ArrayGeometry::build_upa(g.n_x / s, g.n_y, g.spacing, cfg.channel.carrier_frequency)?;
    ArrayGeometry::partition_wsms(&base, s, (g.n_x / s) as f64 * base.pitch())
}

/// WSMS layout: `k` subarrays of `n_x/k × n_y` elements spread along x.
pub fn wsms_array(cfg: &ScenarioConfig) -> Result<ArrayGeometry> {
    let g = &cfg.geometry;
    let k = g.wsms_subarrays;
    let base = ArrayGeometry::build_upa(g.n_x / k, g.n_y, g.spacing, cfg.channel.carrier_frequency)?;
    let sep = g.separation.unwrap_or_else(|| {
        orthogonal_separation(wavelength(cfg.channel.carrier_frequency), cfg.channel.distance, k)
    });
    ArrayGeometry::partition_wsms(&base, k, sep)
}

/// Two-path channel between identical arrays at both ends.
pub fn build_channel(cfg: &ScenarioConfig, geom: &ArrayGeometry, mode: Propagation, exec: Exec) -> Result<Channel> {
    let c = &cfg.channel;
    let paths = two_path_scenario(c.distance, c.height, c.reflection_loss_db)?;
    assemble_channel_with(&paths, geom, geom, c.carrier_frequency, c.bandwidth, c.subcarriers, mode, exec)
}

/// Channel and RF chain count used for one architecture in the rate sweep.
pub fn architecture_channel(cfg: &ScenarioConfig, arch: Architecture, exec: Exec) -> Result<Channel> {
    let n_rf = cfg.radio.rf_chains;
    let (geom, default_mode) = match arch {
        Architecture::Fc => (full_array(cfg)?, Propagation::Planar),
        Architecture::Aosa => (tiled_array(cfg, n_rf)?, Propagation::Planar),
        Architecture::Wsms => (wsms_array(cfg)?, Propagation::Spherical),
        Architecture::Daosa => (tiled_array(cfg, cfg.daosa.subarrays)?, Propagation::Planar),
    };
    build_channel(cfg, &geom, cfg.channel.propagation.unwrap_or(default_mode), exec)
}

/// Noise power on one subcarrier.
pub fn subcarrier_noise(cfg: &ScenarioConfig) -> Result<f64> {
    let c = &cfg.channel;
    if !(c.bandwidth > 0.0) {
        return Err(Error::config("channel.bandwidth", "rate experiments need a positive bandwidth"));
    }
    Ok(noise_power(cfg.radio.noise_figure_db, c.bandwidth / c.subcarriers as f64))
}

fn altmin_options(cfg: &ScenarioConfig) -> AltMinOptions {
    AltMinOptions {
        max_iterations: cfg.algorithm.max_iterations,
        tolerance: cfg.algorithm.tolerance,
        allow_dark: false,
    }
}

fn max_streams(cfg: &ScenarioConfig, n_rf: usize, ch: &Channel) -> usize {
    cfg.radio.max_streams.unwrap_or(n_rf).min(n_rf).min(ch.num_rx()).min(ch.num_tx())
}

/// Outcome of one architecture at one transmit power.
#[derive(Debug, Clone)]
pub struct RatePoint {
    pub architecture: Architecture,
    pub power_dbm: f64,
    pub solved: Solved,
    pub spectral_efficiency: f64,
    pub rate: f64,
    pub digital_rate: f64,
    pub consumed_power: f64,
}

/// Solves one architecture on its channel at one transmit power.
pub fn solve_point(cfg: &ScenarioConfig, arch: Architecture, ch: &Channel, power_dbm: f64, exec: Exec) -> Result<RatePoint> {
    let n_rf = cfg.radio.rf_chains;
    let p = dbm_to_watts(power_dbm);
    let noise = subcarrier_noise(cfg)?;
    let streams = max_streams(cfg, n_rf, ch);
    let opts = altmin_options(cfg);
    let fd = fully_digital_baseline_with(ch, p, noise, streams, exec)?;
    let labels = ch.tx_subarray_index();
    let n_sub = labels.iter().copied().max().map_or(1, |m| m + 1);
    let solved = match arch {
        Architecture::Fc => altmin_hybrid(&fd.hybrid_targets(), &ConnectivityMask::full(ch.num_tx(), n_rf), n_rf, fd.power_per_subcarrier, &opts)?,
        Architecture::Aosa => match cfg.algorithm.aosa_solver {
            AosaSolver::Sic => sic_aosa_with(ch, n_rf, p, noise, exec)?.solved,
            AosaSolver::Altmin => {
                let mask = connectivity_for(Architecture::Aosa, &labels, n_sub, n_rf, None)?;
                altmin_hybrid(&fd.hybrid_targets(), &mask, n_rf, fd.power_per_subcarrier, &opts)?
            }
        },
        Architecture::Wsms => wsms_solve_with(ch, n_rf, p, noise, &opts, exec)?,
        Architecture::Daosa => return Err(Error::invalid("daosa runs through the trade-off sweep")),
    };
    let se = spectral_efficiency(ch, &solved.beamformer, noise)?;
    let census = device_census(arch, ch.num_tx(), n_rf, n_sub, None)?;
    Ok(RatePoint {
        architecture: arch,
        power_dbm,
        spectral_efficiency: se,
        rate: data_rate(se, ch.bandwidth()),
        digital_rate: fd.achievable_rate,
        consumed_power: power_consumption(&census, &cfg.power_model, DeviceKind::PhaseShifter),
        solved,
    })
}

/// Rate of every requested architecture at every transmit power.
///
/// Rows come out power-major in sweep order. A point whose solver hit the
/// iteration cap or broke a hardware constraint is flagged; a point that
/// failed outright is kept with NaN values and its error as the flag.
pub fn run_rate_vs_power(cfg: &ScenarioConfig, powers_dbm: &[f64], archs: &[Architecture], exec: Exec) -> Result<SweepResult> {
    let channels = archs
        .iter()
        .map(|&a| architecture_channel(cfg, a, exec))
        .collect::<Result<Vec<_>>>()?;
    subcarrier_noise(cfg)?;
    let points: Vec<(f64, usize)> = powers_dbm.iter().flat_map(|&p| (0..archs.len()).map(move |a| (p, a))).collect();
    let results = exec.map(&points, |&(p, a)| solve_point(cfg, archs[a], &channels[a], p, exec));

    let mut meta = Metadata::new("rate-vs-power", cfg.hash(), cfg.algorithm.seed);
    meta.note("bandwidth_hz", cfg.channel.bandwidth);
    meta.note("noise_figure_db", cfg.radio.noise_figure_db);
    meta.note("rf_chains", cfg.radio.rf_chains);
    let mut out = SweepResult::new(
        meta,
        &[
            ("transmit_power", "dBm"),
            ("architecture", "-"),
            ("rate", "bit/s"),
            ("digital_rate", "bit/s"),
            ("streams", "-"),
            ("consumed_power", "W"),
            ("energy_efficiency", "bit/J"),
            ("iterations", "-"),
        ],
    );
    for (&(p, a), res) in points.iter().zip(results) {
        match res {
            Ok(pt) => {
                let flag = point_flag(&pt.solved);
                out.push(
                    vec![
                        p.into(),
                        archs[a].to_string().into(),
                        pt.rate.into(),
                        pt.digital_rate.into(),
                        pt.solved.beamformer.streams().into(),
                        pt.consumed_power.into(),
                        (pt.rate / pt.consumed_power).into(),
                        pt.solved.report.iterations.into(),
                    ],
                    flag,
                );
            }
            Err(e) => out.push(failed_row(p, archs[a].to_string(), 6), Some(format!("error: {e}"))),
        }
    }
    Ok(out)
}

fn failed_row(x: f64, label: String, nan_cells: usize) -> Vec<Cell> {
    let mut cells = vec![x.into(), label.into()];
    cells.extend(std::iter::repeat_n(Cell::Float(f64::NAN), nan_cells));
    cells
}

fn point_flag(solved: &Solved) -> Option<String> {
    if let Err(e) = solved.beamformer.validate() {
        return Some(format!("constraint: {e}"));
    }
    (!solved.report.converged).then(|| "not_converged".to_string())
}

/// Rate and consumed power along the greedy switch path, from one closed
/// switch per RF chain up to every switch closed.
///
/// The first and last rows are checked against stand-alone AoSA and FC
/// solves on the same channel; a mismatch beyond [`ENDPOINT_TOLERANCE`]
/// flags the row.
pub fn run_daosa_tradeoff(cfg: &ScenarioConfig, exec: Exec) -> Result<SweepResult> {
    let n_rf = cfg.daosa.rf_chains;
    let n_sub = cfg.daosa.subarrays;
    let geom = tiled_array(cfg, n_sub)?;
    let ch = build_channel(cfg, &geom, cfg.channel.propagation.unwrap_or(Propagation::Planar), exec)?;
    let noise = subcarrier_noise(cfg)?;
    let p = cfg.transmit_power_watts();
    let opts = altmin_options(cfg);
    let total = n_rf * n_sub;
    let outcome = daosa_select_with(&ch, n_rf, DaosaBudget::ClosedCount(total), &cfg.power_model, p, noise, &opts, exec)?;

    let streams = max_streams(cfg, n_rf, &ch);
    let fd = fully_digital_baseline_with(&ch, p, noise, streams, exec)?;
    let targets = fd.hybrid_targets();
    let labels = ch.tx_subarray_index();
    let rate_of = |sw: &SwitchNetwork| -> Result<f64> {
        let mask = connectivity_for(Architecture::Daosa, &labels, n_sub, n_rf, Some(sw))?;
        let o = AltMinOptions { allow_dark: true, ..opts };
        let s = altmin_hybrid(&targets, &mask, n_rf, fd.power_per_subcarrier, &o)?;
        Ok(data_rate(spectral_efficiency(&ch, &s.beamformer, noise)?, ch.bandwidth()))
    };
    let fc_rate = rate_of(&SwitchNetwork::all_closed(n_rf, n_sub))?;
    let aosa_rate = if n_rf == n_sub { Some(rate_of(&SwitchNetwork::identity(n_rf))?) } else { None };

    let mut meta = Metadata::new("daosa-tradeoff", cfg.hash(), cfg.algorithm.seed);
    meta.note("fc_rate_bps", fc_rate);
    if let Some(r) = aosa_rate {
        meta.note("aosa_rate_bps", r);
    }
    meta.note("digital_rate_bps", fd.achievable_rate);
    let best_ee = outcome
        .trace
        .iter()
        .fold(&outcome.trace[0], |b, s| if s.energy_efficiency > b.energy_efficiency { s } else { b });
    meta.note("max_energy_efficiency_closed", best_ee.closed);
    let mut out = SweepResult::new(
        meta,
        &[
            ("closed_switches", "-"),
            ("pattern", "-"),
            ("rate", "bit/s"),
            ("consumed_power", "W"),
            ("energy_efficiency", "bit/J"),
        ],
    );
    let last = outcome.trace.len() - 1;
    for (i, step) in outcome.trace.iter().enumerate() {
        let reference = match i {
            0 => aosa_rate,
            i if i == last => Some(fc_rate),
            _ => None,
        };
        let flag = reference.and_then(|r| {
            let rel = (step.rate - r).abs() / r.abs().max(f64::MIN_POSITIVE);
            (rel > ENDPOINT_TOLERANCE).then(|| format!("endpoint_mismatch: {rel:.3e}"))
        });
        out.push(
            vec![
                step.closed.into(),
                step.pattern.clone().into(),
                step.rate.into(),
                step.power.into(),
                step.energy_efficiency.into(),
            ],
            flag,
        );
    }
    Ok(out)
}

/// The steering direction and band of the array-gain experiment.
pub fn array_gain_setup(cfg: &ScenarioConfig) -> Result<(ArrayGeometry, Direction, Band)> {
    let c = &cfg.channel;
    if c.subcarriers < 2 {
        return Err(Error::config("channel.subcarriers", "array gain sweep needs at least 2 subcarriers"));
    }
    let geom = full_array(cfg)?.in_plane(cfg.array_gain.plane);
    let dir = Direction::from_degrees(cfg.array_gain.azimuth_deg, cfg.array_gain.elevation_deg);
    let band = Band::new(c.carrier_frequency, c.bandwidth, c.subcarriers)?;
    Ok((geom, dir, band))
}

/// Worst-subcarrier loss (positive dB) of carrier-matched phase shifters
/// over `link_ends` identical arrays.
pub fn ps_worst_loss_db(geom: &ArrayGeometry, dir: Direction, band: &Band, link_ends: usize) -> Result<f64> {
    let ps = CodebookEntry::steer(geom, dir, DeviceKind::PhaseShifter, band.f_c, None)?;
    let gains = array_gain_sweep(geom, &ps, &dir, band)?;
    Ok(-gains.iter().copied().fold(f64::INFINITY, f64::min) * link_ends as f64)
}

/// Phase-shifter and true-time-delay gain toward the steering direction on
/// every subcarrier, summed over the configured number of link ends.
pub fn run_array_gain(cfg: &ScenarioConfig) -> Result<SweepResult> {
    let (geom, dir, band) = array_gain_setup(cfg)?;
    let ends = cfg.array_gain.link_ends as f64;
    let ps = CodebookEntry::steer(&geom, dir, DeviceKind::PhaseShifter, band.f_c, None)?;
    let ttd = CodebookEntry::steer(&geom, dir, DeviceKind::Ttd, band.f_c, cfg.array_gain.ttd_bits)?;
    let ps_gain = array_gain_sweep(&geom, &ps, &dir, &band)?;
    let ttd_gain = array_gain_sweep(&geom, &ttd, &dir, &band)?;
    let ps_db: Vec<f64> = ps_gain.iter().map(|g| g * ends).collect();
    let ttd_db: Vec<f64> = ttd_gain.iter().map(|g| g * ends).collect();

    let mut meta = Metadata::new("array-gain", cfg.hash(), cfg.algorithm.seed);
    meta.note("plane", format!("{:?}", cfg.array_gain.plane).to_lowercase());
    meta.note("link_ends", cfg.array_gain.link_ends);
    meta.note("ps_worst_loss_db", -ps_db.iter().copied().fold(f64::INFINITY, f64::min));
    let (lo, hi) = ttd_db.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    meta.note("ttd_spread_db", hi - lo);
    let mut out = SweepResult::new(
        meta,
        &[("subcarrier", "-"), ("frequency", "Hz"), ("ps_gain", "dB"), ("ttd_gain", "dB")],
    );
    for (k, f) in band.frequencies().into_iter().enumerate() {
        out.push(vec![k.into(), f.into(), ps_db[k].into(), ttd_db[k].into()], None);
    }
    Ok(out)
}

/// Rayleigh distance of one aperture at several carriers.
pub fn run_rayleigh(aperture: f64, frequencies: &[f64], seed: u64) -> Result<SweepResult> {
    let tag = format!("aperture={aperture};frequencies={frequencies:?}");
    let hash = {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(tag.as_bytes()))[..16].to_string()
    };
    let mut out = SweepResult::new(
        Metadata::new("rayleigh", hash, seed),
        &[("aperture", "m"), ("frequency", "Hz"), ("wavelength", "m"), ("rayleigh_distance", "m")],
    );
    for &f in frequencies {
        if !(f > 0.0) {
            return Err(Error::invalid(format!("frequency must be positive, got {f}")));
        }
        let lam = wavelength(f);
        out.push(vec![aperture.into(), f.into(), lam.into(), rayleigh_distance(aperture, lam)?.into()], None);
    }
    Ok(out)
}

/// Device counts and consumed power of each architecture for `n_rf` chains.
/// DAoSA uses one subarray per chain, so its sparsest row matches AoSA.
pub fn run_power_budget(cfg: &ScenarioConfig, n_rf: usize) -> Result<SweepResult> {
    if n_rf == 0 {
        return Err(Error::invalid("power budget needs at least one RF chain"));
    }
    let n = cfg.geometry.n_x * cfg.geometry.n_y;
    let m = &cfg.power_model;
    let k = cfg.geometry.wsms_subarrays;
    let n_sub = n_rf;
    let daosa_min = SwitchNetwork::identity(n_rf);
    let daosa_max = SwitchNetwork::all_closed(n_rf, n_sub);
    let cases: Vec<(String, Architecture, usize, Option<&SwitchNetwork>)> = vec![
        ("fc".into(), Architecture::Fc, 1, None),
        ("aosa".into(), Architecture::Aosa, n_rf, None),
        ("wsms".into(), Architecture::Wsms, k, None),
        (format!("daosa:{}", daosa_min.closed_count()), Architecture::Daosa, n_sub, Some(&daosa_min)),
        (format!("daosa:{}", daosa_max.closed_count()), Architecture::Daosa, n_sub, Some(&daosa_max)),
    ];
    let mut out = SweepResult::new(
        Metadata::new("power-budget", cfg.hash(), cfg.algorithm.seed),
        &[
            ("architecture", "-"),
            ("antennas", "-"),
            ("rf_chains", "-"),
            ("phase_shifters", "-"),
            ("phase_shifter_power", "W"),
            ("amplifier_power", "W"),
            ("consumed_power", "W"),
            ("ttd_consumed_power", "W"),
        ],
    );
    for (label, arch, s, sw) in cases {
        match device_census(arch, n, n_rf, s, sw) {
            Ok(c) => out.push(
                vec![
                    label.into(),
                    n.into(),
                    n_rf.into(),
                    c.phase_devices_active.into(),
                    (c.phase_devices_active as f64 * m.p_ps).into(),
                    (c.power_amplifiers as f64 * m.p_pa).into(),
                    power_consumption(&c, m, DeviceKind::PhaseShifter).into(),
                    power_consumption(&c, m, DeviceKind::Ttd).into(),
                ],
                None,
            ),
            Err(e) => {
                let mut cells: Vec<Cell> = vec![label.into(), n.into(), n_rf.into()];
                cells.extend(std::iter::repeat_n(Cell::Float(f64::NAN), 5));
                out.push(cells, Some(format!("error: {e}")));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::backhaul;

    fn small() -> ScenarioConfig {
        ScenarioConfig::from_toml_str(
            super::super::config::BACKHAUL_TOML,
            &["geometry.n_x=8".into(), "geometry.n_y=4".into(), "radio.rf_chains=4".into()],
        )
        .unwrap()
    }

    #[test]
    fn tiled_array_matches_full_array() {
        let cfg = backhaul();
        let full = full_array(&cfg).unwrap();
        let tiled = tiled_array(&cfg, 8).unwrap();
        assert_eq!(full.positions(), tiled.positions());
        assert_eq!(tiled.num_subarrays(), 8);
    }

    #[test]
    fn power_budget_spot_values() {
        let r = run_power_budget(&backhaul(), 4).unwrap();
        let shifters = r.column("phase_shifters").unwrap();
        let power = r.column("phase_shifter_power").unwrap();
        assert_eq!(shifters[0], 4096.0);
        assert!((power[0] - 172.032).abs() < 1e-9);
        assert_eq!(shifters[1], 1024.0);
        assert!((power[1] - 43.008).abs() < 1e-9);
        assert_eq!(shifters[3], shifters[1]);
        assert_eq!(shifters[4], 4096.0);
        assert_eq!(r.flagged(), 0);
    }

    #[test]
    fn rate_sweep_is_deterministic_across_modes() {
        let cfg = small();
        let archs = [Architecture::Fc, Architecture::Aosa, Architecture::Wsms];
        let a = run_rate_vs_power(&cfg, &[0.0, 10.0], &archs, Exec::Sequential).unwrap();
        let b = run_rate_vs_power(&cfg, &[0.0, 10.0], &archs, Exec::Parallel).unwrap();
        assert_eq!(a.to_csv_string(), b.to_csv_string());
        assert_eq!(a.rows.len(), 6);
    }

    #[test]
    fn rayleigh_rows() {
        let r = run_rayleigh(0.1, &[6e9, 60e9, 1e12], 0).unwrap();
        let d = r.column("rayleigh_distance").unwrap();
        assert!((d[0] - 0.4).abs() < 1e-12 && (d[1] - 4.0).abs() < 1e-12);
        assert!((d[2] - 66.666_666_666_7).abs() < 1e-6);
    }
}
