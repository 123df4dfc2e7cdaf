//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

mod common;

use std::path::Path;
use std::time::Instant;

use common::{best_pair_residual, cgauss, exhaustive_daosa, random_subarray_channel, rng, ula_dictionary};
use thz_hybrid::algorithms::altmin::{altmin_hybrid, AltMinOptions};
use thz_hybrid::algorithms::codebook::Band;
use thz_hybrid::algorithms::daosa::{daosa_select, DaosaBudget};
use thz_hybrid::algorithms::digital::fully_digital_baseline;
use thz_hybrid::algorithms::omp::omp_hybrid;
use thz_hybrid::algorithms::sic::sic_aosa;
use thz_hybrid::algorithms::waterfilling::waterfilling;
use thz_hybrid::algorithms::wsms::wsms_solve;
use thz_hybrid::architectures::ConnectivityMask;
use thz_hybrid::exec::Exec;
use thz_hybrid::experiments::config::{load_config, backhaul, ScenarioConfig};
use thz_hybrid::experiments::output::Cell;
use thz_hybrid::experiments::runs::{array_gain_setup, ps_worst_loss_db};
use thz_hybrid::experiments::{run_array_gain, run_daosa_tradeoff, run_power_budget, run_rate_vs_power, run_rayleigh, SweepResult};
use thz_hybrid::metrics::{log_det_rate, spectral_efficiency, PowerModel};

/// Relative slack for "monotone non-decreasing" on the DAoSA rate trace once
/// it saturates at the fully-digital rate; equal to the endpoint tolerance.
const MONOTONE_TOLERANCE: f64 = 1e-6;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn config(name: &str) -> ScenarioConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn note(r: &SweepResult, key: &str) -> f64 {
    r.metadata.get_note(key).and_then(|v| v.parse().ok()).unwrap_or(f64::NAN)
}

fn text_column(r: &SweepResult, name: &str) -> Vec<String> {
    let i = r.column_index(name).unwrap();
    r.rows
        .iter()
        .map(|row| match &row.cells[i] {
            Cell::Text(s) => s.clone(),
            other => format!("{other:?}"),
        })
        .collect()
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rayleigh() -> Outcome {
    let r = run_rayleigh(0.1, &[6e9, 60e9, 1e12], 0).map_err(|e| e.to_string())?;
    let d = r.column("rayleigh_distance").unwrap();
    let sig3 = |x: f64| {
        let mag = 10f64.powi(x.abs().log10().floor() as i32 - 2);
        (x / mag).round() * mag
    };
    let expect = [0.4, 4.0, 66.7];
    let ok = d.iter().zip(expect).all(|(x, e)| (sig3(*x) - e).abs() < 1e-9 * e);
    verdict(ok, format!("{:.4} m, {:.4} m, {:.4} m", d[0], d[1], d[2]))
}

fn beam_squint() -> Outcome {
    let cfg = config("array_gain.toml");
    let r = run_array_gain(&cfg).map_err(|e| e.to_string())?;
    let spread = note(&r, "ttd_spread_db");
    let loss = note(&r, "ps_worst_loss_db");
    let ps = r.column("ps_gain").unwrap();
    let freqs = r.column("frequency").unwrap();
    let peak = (0..ps.len()).max_by(|&a, &b| ps[a].total_cmp(&ps[b])).unwrap();
    // Non-increasing moving away from the subcarrier nearest the carrier.
    let shaped = ps[..=peak].windows(2).all(|w| w[1] >= w[0] - 1e-12) && ps[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let centre = (freqs[peak] - cfg.channel.carrier_frequency).abs() <= cfg.channel.bandwidth / cfg.channel.subcarriers as f64;
    let ok = spread < 1e-9 && (4.5..=7.5).contains(&loss) && shaped && centre;
    verdict(
        ok,
        format!(
            "TTD spread {spread:.2e} dB, PS worst loss {loss:.3} dB (plane {}, {} link ends), PS peak at {:.4} THz",
            r.metadata.get_note("plane").unwrap_or("?"),
            cfg.array_gain.link_ends,
            freqs[peak] / 1e12
        ),
    )
}

fn fractional_bandwidth_threshold() -> Outcome {
    let cfg = config("array_gain.toml");
    let (geom, dir, band) = array_gain_setup(&cfg).map_err(|e| e.to_string())?;
    let ends = cfg.array_gain.link_ends;
    let loss_at = |frac: f64| {
        let b = Band::new(band.f_c, frac * band.f_c, band.n_subcarriers).unwrap();
        ps_worst_loss_db(&geom, dir, &b, ends).unwrap()
    };
    let at10 = loss_at(0.10);
    let (mut lo, mut hi) = (0.0, 0.10);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if loss_at(mid) > 5.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    verdict(at10 > 5.0, format!("loss {at10:.3} dB at 10%, 5 dB crossed at {:.2}%", 100.0 * hi))
}

fn rate_ordering() -> Outcome {
    let cfg = config("rate_vs_power.toml");
    let r = run_rate_vs_power(&cfg, &cfg.sweep.power_dbm, &cfg.sweep.architectures, Exec::Parallel).map_err(|e| e.to_string())?;
    let power = r.column("transmit_power").unwrap();
    let rate = r.column("rate").unwrap();
    let streams = r.column("streams").unwrap();
    let arch = text_column(&r, "architecture");
    let pick = |p: f64, a: &str, col: &[f64]| {
        (0..rate.len()).find(|&i| power[i] == p && arch[i] == a).map(|i| col[i]).unwrap_or(f64::NAN)
    };
    let mut order_ok = true;
    let mut worst = f64::INFINITY;
    for &p in &cfg.sweep.power_dbm {
        let (w, f, a) = (pick(p, "wsms", &rate), pick(p, "fc", &rate), pick(p, "aosa", &rate));
        order_ok &= w > f && f > a;
        worst = worst.min((w - f).min(f - a));
    }
    let streams_ok = cfg.sweep.power_dbm.iter().all(|&p| pick(p, "wsms", &streams) == 4.0 && pick(p, "fc", &streams) == 2.0);
    let g1 = (pick(20.0, "wsms", &rate) - pick(20.0, "fc", &rate)) / 1e9;
    let g2 = (pick(20.0, "wsms", &rate) - pick(20.0, "aosa", &rate)) / 1e9;
    let gaps_ok = (g1 - 40.0).abs() <= 20.0 && (g2 - 60.0).abs() <= 30.0;
    verdict(
        order_ok && streams_ok && gaps_ok,
        format!(
            "ordering {} (smallest margin {:.1} kbit/s), streams {}, at 20 dBm WSMS-FC {g1:.1} Gbit/s, WSMS-AoSA {g2:.1} Gbit/s (NF {} dB), {} flagged rows",
            if order_ok { "holds" } else { "violated" },
            worst / 1e3,
            if streams_ok { "WSMS 4 / FC 2" } else { "mismatch" },
            cfg.radio.noise_figure_db,
            r.flagged()
        ),
    )
}

fn daosa_endpoints() -> Outcome {
    let cfg = config("daosa_tradeoff.toml");
    let r = run_daosa_tradeoff(&cfg, Exec::Parallel).map_err(|e| e.to_string())?;
    let closed = r.column("closed_switches").unwrap();
    let rate = r.column("rate").unwrap();
    let power = r.column("consumed_power").unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let e4 = rel(rate[0], note(&r, "aosa_rate_bps"));
    let e16 = rel(*rate.last().unwrap(), note(&r, "fc_rate_bps"));
    let span_ok = closed.first() == Some(&4.0) && closed.last() == Some(&16.0) && closed.len() == 13;
    let rate_mono = rate.windows(2).all(|w| w[1] >= w[0] * (1.0 - MONOTONE_TOLERANCE));
    let worst_dip = rate.windows(2).map(|w| (w[0] - w[1]) / w[0]).fold(0.0, f64::max);
    let power_mono = power.windows(2).all(|w| w[1] > w[0]);
    verdict(
        span_ok && e4 <= 1e-6 && e16 <= 1e-6 && rate_mono && power_mono,
        format!(
            "rate(4) vs AoSA {e4:.1e}, rate(16) vs FC {e16:.1e}, largest rate dip {worst_dip:.1e} relative, power {}, EE best at {} closed",
            if power_mono { "strictly increasing" } else { "not monotone" },
            r.metadata.get_note("max_energy_efficiency_closed").unwrap_or("?")
        ),
    )
}

fn power_spot_values() -> Outcome {
    let r = run_power_budget(&backhaul(), 4).map_err(|e| e.to_string())?;
    let n = r.column("phase_shifters").unwrap();
    let p = r.column("phase_shifter_power").unwrap();
    let pa = r.column("amplifier_power").unwrap();
    let m = PowerModel::default();
    let ok = n[0] == 4096.0
        && (p[0] - 172.032).abs() < 1e-9
        && n[1] == 1024.0
        && (p[1] - 43.008).abs() < 1e-9
        && (pa[0] - 1024.0 * m.p_pa).abs() < 1e-9;
    verdict(ok, format!("FC {} shifters {:.3} W, AoSA {} shifters {:.3} W, PAs {:.3} W", n[0], p[0], n[1], p[1], pa[0]))
}

fn oracle_waterfilling() -> Outcome {
    let mut r = rng(11);
    let mut worst = 0.0_f64;
    for _ in 0..3 {
        let h = cgauss(&mut r, 4, 4);
        let gains: Vec<f64> = h.singular_values().iter().map(|s| s * s).collect();
        let (noise, total) = (0.5, 2.0);
        let rate = |p: &[f64]| -> f64 { gains.iter().zip(p).map(|(g, p)| (1.0 + p * g / noise).log2()).sum() };
        let wf = rate(&waterfilling(&gains, noise, total).unwrap());
        let steps = 1000;
        let step = total / steps as f64;
        let mut grid = 0.0_f64;
        for a in 0..=steps {
            for b in 0..=steps - a {
                for c in 0..=steps - a - b {
                    let d = steps - a - b - c;
                    grid = grid.max(rate(&[a, b, c, d].map(|x| x as f64 * step)));
                }
            }
        }
        worst = worst.max((grid - wf) / grid);
        if wf < grid * (1.0 - 1e-12) && (grid - wf) / grid > 1e-3 {
            return Err(format!("gap {:.3e}", (grid - wf) / grid));
        }
    }
    Ok(format!("largest grid advantage {worst:.1e} over 3 channels"))
}

fn oracle_omp() -> Outcome {
    let dict = ula_dictionary(4, 8);
    let mut r = rng(21);
    let n = 100;
    let mut ratios = Vec::with_capacity(n);
    for _ in 0..n {
        let t = cgauss(&mut r, 4, 2);
        let omp = omp_hybrid(std::slice::from_ref(&t), &dict, 2, 1.0).unwrap();
        ratios.push(omp.report.objective_trace.last().unwrap() / best_pair_residual(&t, &dict));
    }
    let misses = ratios.iter().filter(|&&x| x > 1.05).count();
    let mean = ratios.iter().sum::<f64>() / n as f64;
    let max = ratios.iter().copied().fold(0.0, f64::max);
    verdict(
        misses == 0,
        format!("{misses}/{n} Gaussian targets beyond 5% of the best atom pair (mean ratio {mean:.3}, max {max:.3})"),
    )
}

fn oracle_daosa() -> Outcome {
    let mut r = rng(31);
    let mut worst = f64::INFINITY;
    for _ in 0..3 {
        let ch = random_subarray_channel(&mut r, 3, 3, 3);
        let (p, noise) = (1.0, 0.1);
        for closed in 2..=6 {
            let out = daosa_select(&ch, 2, DaosaBudget::ClosedCount(closed), &PowerModel::default(), p, noise, &AltMinOptions::default())
                .map_err(|e| e.to_string())?;
            let greedy = out.trace.last().unwrap().spectral_efficiency;
            worst = worst.min(greedy / exhaustive_daosa(&ch, 2, 3, closed, p, noise));
        }
    }
    verdict(worst >= 0.95, format!("worst greedy/exhaustive rate {worst:.4} over 3 channels x 5 budgets"))
}

fn oracle_log_det() -> Outcome {
    let mut r = rng(8);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let h = cgauss(&mut r, 4, 6);
        let f = cgauss(&mut r, 6, 3);
        let hf = &h * &f;
        let eig = (&hf * hf.adjoint()).symmetric_eigen();
        let sum: f64 = eig.eigenvalues.iter().map(|l| (1.0 + l.max(0.0) / 0.3).log2()).sum();
        let ld = log_det_rate(&h, &f, 0.3).unwrap();
        worst = worst.max((ld - sum).abs() / sum.max(1.0));
    }
    verdict(worst <= 1e-9, format!("largest relative difference {worst:.1e}"))
}

fn non_increasing(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-14)
}

fn solver_invariants() -> Outcome {
    let dict = ula_dictionary(8, 16);
    let opts = AltMinOptions::default();
    let mut counts = [0usize; 4];
    for seed in 0..100u64 {
        let mut r = rng(1000 + seed);
        let ch = random_subarray_channel(&mut r, 4, 2, 4);
        let noise = 10f64.powf(-((seed % 5) as f64));
        let p = 1.0;
        let fail = |what: &str| Err(format!("seed {}: {what}", 1000 + seed));
        let fd = fully_digital_baseline(&ch, p, noise, 2).map_err(|e| e.to_string())?;
        let bound = fd.spectral_efficiency * (1.0 + 1e-9);
        let targets = fd.hybrid_targets();

        let fc = altmin_hybrid(&targets, &ConnectivityMask::full(8, 2), 2, fd.power_per_subcarrier, &opts).map_err(|e| e.to_string())?;
        let omp = omp_hybrid(&targets, &dict, 2, fd.power_per_subcarrier).map_err(|e| e.to_string())?;
        let sic = sic_aosa(&ch, 2, p, noise).map_err(|e| e.to_string())?.solved;
        let wsms = wsms_solve(&ch, 2, p, noise, &opts).map_err(|e| e.to_string())?;
        let daosa = daosa_select(&ch, 2, DaosaBudget::ClosedCount(4), &PowerModel::default(), p, noise, &opts)
            .map_err(|e| e.to_string())?;

        if !non_increasing(&fc.report.objective_trace) {
            return fail("altmin objective increased");
        }
        if !non_increasing(&omp.report.objective_trace) {
            return fail("OMP residual increased");
        }
        counts[0] += 2;
        for s in [&fc, &omp, &sic, &wsms, &daosa.solved] {
            if let Err(e) = s.beamformer.validate() {
                return fail(&format!("constraint violated: {e}"));
            }
            counts[1] += 1;
            let se = spectral_efficiency(&ch, &s.beamformer, noise).map_err(|e| e.to_string())?;
            if se > bound {
                return fail(&format!("hybrid {se} above fully digital {bound}"));
            }
            counts[2] += 1;
        }
        for step in &daosa.trace {
            if step.spectral_efficiency > bound {
                return fail("DAoSA step above fully digital");
            }
            counts[3] += 1;
        }
    }
    Ok(format!(
        "100 instances: {} monotone traces, {} feasible beamformers, {} hybrid and {} DAoSA-step rates within the fully-digital bound",
        counts[0], counts[1], counts[2], counts[3]
    ))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 rayleigh distance", rayleigh),
        ("2 beam squint", beam_squint),
        ("3 fractional bandwidth threshold", fractional_bandwidth_threshold),
        ("4 rate ordering", rate_ordering),
        ("5 daosa endpoints and monotonicity", daosa_endpoints),
        ("6 power model spot values", power_spot_values),
        ("7a waterfilling vs grid search", oracle_waterfilling),
        ("7b omp vs exhaustive atoms", oracle_omp),
        ("7c daosa greedy vs exhaustive", oracle_daosa),
        ("7d log-det vs eigenvalues", oracle_log_det),
        ("8 solver invariants", solver_invariants),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{name}] {detail} ({secs:.2} s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{name}] {detail} ({secs:.2} s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
