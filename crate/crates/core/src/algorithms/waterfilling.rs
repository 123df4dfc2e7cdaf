//! Power allocation over parallel Gaussian channels.

use crate::{Error, Result};

/// Capacity-optimal powers `p_i = max(0, μ − noise/g_i)` with `Σ p_i = P`.
///
/// `gains` are the squared singular values. The water level is found by
/// dropping the weakest active channel until every power is non-negative.
pub fn waterfilling(gains: &[f64], noise: f64, total_power: f64) -> Result<Vec<f64>> {
    if gains.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
        return Err(Error::invalid("channel gains must be positive and finite"));
    }
    if !(noise > 0.0) {
        return Err(Error::invalid("noise power must be positive"));
    }
    if !(total_power >= 0.0) || !total_power.is_finite() {
        return Err(Error::invalid("total power must be non-negative"));
    }
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
    let floors: Vec<f64> = order.iter().map(|&i| noise / gains[i]).collect();
    let mut out = vec![0.0; gains.len()];
    if gains.is_empty() || total_power == 0.0 {
        return Ok(out);
    }
    let mut active = floors.len();
    let mut mu;
    loop {
        mu = (total_power + floors[..active].iter().sum::<f64>()) / active as f64;
        if mu > floors[active - 1] || active == 1 {
            break;
        }
        active -= 1;
    }
    for (rank, &i) in order.iter().enumerate().take(active) {
        out[i] = (mu - floors[rank]).max(0.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weak_channel_is_shut_off() {
        let p = waterfilling(&[2.0, 0.5], 1.0, 1.0).unwrap();
        assert_relative_eq!(p[0], 1.0, max_relative = 1e-12);
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn equal_gains_split_evenly() {
        let p = waterfilling(&[1.0, 1.0, 1.0], 1.0, 3.0).unwrap();
        for x in p {
            assert_relative_eq!(x, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(waterfilling(&[1.0, 0.0], 1.0, 1.0).is_err());
        assert!(waterfilling(&[1.0], 0.0, 1.0).is_err());
        assert!(waterfilling(&[1.0], 1.0, -1.0).is_err());
    }

    #[test]
    fn empty_and_zero_power() {
        assert!(waterfilling(&[], 1.0, 1.0).unwrap().is_empty());
        assert_eq!(waterfilling(&[3.0, 1.0], 1.0, 0.0).unwrap(), vec![0.0, 0.0]);
    }
}
