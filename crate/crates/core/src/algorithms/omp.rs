//! Orthogonal matching pursuit over a dictionary of unit-modulus atoms.

use std::f64::consts::PI;

use super::altmin::normalize_digital;
use super::{SolveReport, Solved};
use crate::architectures::{ConnectivityMask, DeviceKind, HybridBeamformer};
use crate::geometry::{ArrayGeometry, Direction};
use crate::linalg::{frob_sq, least_squares, CMat};
use crate::{Error, Result};

/// Transmit-side matched responses `conj(a(θ, φ))` on an azimuth/elevation
/// grid: `n_az` azimuths over `[−π, π)` and `n_el` elevations over `(0, π/2]`.
pub fn steering_dictionary(geom: &ArrayGeometry, n_az: usize, n_el: usize, f: f64) -> Result<CMat> {
    if n_az == 0 || n_el == 0 {
        return Err(Error::invalid("dictionary grid must be non-empty"));
    }
    let mut d = CMat::zeros(geom.len(), n_az * n_el);
    for e in 0..n_el {
        let el = (e + 1) as f64 * (PI / 2.0) / n_el as f64;
        for a in 0..n_az {
            let az = -PI + a as f64 * 2.0 * PI / n_az as f64;
            let v = geom.steering_vector(&Direction::new(az, el), f).map(|z| z.conj());
            d.set_column(e * n_az + a, &v);
        }
    }
    Ok(d)
}

/// Greedy fully connected hybrid precoder.
///
/// Each step picks the unused atom with the largest correlation to the
/// residual, summed over streams and subcarriers, then refits the digital
/// part by least squares. The trace holds the residual norm after each pick.
pub fn omp_hybrid(targets: &[CMat], dictionary: &CMat, n_rf: usize, power: f64) -> Result<Solved> {
    let first = targets.first().ok_or_else(|| Error::invalid("need at least one target"))?;
    let (n, ns) = first.shape();
    if targets.iter().any(|t| t.shape() != (n, ns)) {
        return Err(Error::invalid("targets differ in shape"));
    }
    if dictionary.nrows() != n {
        return Err(Error::invalid("dictionary rows differ from antennas"));
    }
    if n_rf == 0 || dictionary.ncols() < n_rf {
        return Err(Error::invalid(format!(
            "dictionary has {} atoms, need at least {n_rf}",
            dictionary.ncols()
        )));
    }
    if dictionary.iter().any(|z| (z.norm() - 1.0).abs() > 1e-9) {
        return Err(Error::invalid("dictionary atoms must be unit modulus"));
    }
    let mut selected: Vec<usize> = Vec::with_capacity(n_rf);
    let mut residuals: Vec<CMat> = targets.to_vec();
    let mut digital: Vec<CMat> = Vec::new();
    let mut trace = vec![residuals.iter().map(frob_sq).sum::<f64>().sqrt()];
    let dict_h = dictionary.adjoint();
    for _ in 0..n_rf {
        let mut score = vec![0.0; dictionary.ncols()];
        for r in &residuals {
            let corr = &dict_h * r;
            for (g, s) in score.iter_mut().enumerate() {
                *s += corr.row(g).norm_squared();
            }
        }
        let best = (0..score.len())
            .filter(|g| !selected.contains(g))
            .fold(None, |acc: Option<usize>, g| match acc {
                Some(b) if score[b] >= score[g] => Some(b),
                _ => Some(g),
            })
            .expect("enough atoms");
        selected.push(best);
        let a = dictionary.select_columns(&selected);
        digital = targets.iter().map(|t| least_squares(&a, t)).collect();
        residuals = targets.iter().zip(&digital).map(|(t, d)| t - &a * d).collect();
        trace.push(residuals.iter().map(frob_sq).sum::<f64>().sqrt());
    }
    let analog = dictionary.select_columns(&selected);
    let digital = normalize_digital(&analog, digital)?;
    Ok(Solved {
        beamformer: HybridBeamformer {
            analog,
            digital,
            device: DeviceKind::PhaseShifter,
            mask: ConnectivityMask::full(n, n_rf),
            power,
        },
        report: SolveReport { iterations: n_rf, converged: true, objective_trace: trace },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    #[test]
    fn recovers_target_spanned_by_atoms() {
        let g = ArrayGeometry::build_upa(8, 8, 0.5, 3e11).unwrap();
        let dict = steering_dictionary(&g, 16, 4, 3e11).unwrap();
        let a = dict.select_columns(&[3, 40]);
        let d = CMat::from_fn(2, 2, |i, j| C64::new(1.0 + i as f64, j as f64 - 0.5));
        let t = &a * d;
        let s = omp_hybrid(std::slice::from_ref(&t), &dict, 2, 1.0).unwrap();
        assert!(*s.report.objective_trace.last().unwrap() < 1e-8 * frob_sq(&t).sqrt());
        s.beamformer.validate().unwrap();
    }

    #[test]
    fn rejects_small_dictionary() {
        let dict = CMat::from_element(4, 1, C64::new(1.0, 0.0));
        let t = CMat::from_element(4, 1, C64::new(1.0, 0.0));
        assert!(omp_hybrid(&[t], &dict, 2, 1.0).is_err());
    }
}
