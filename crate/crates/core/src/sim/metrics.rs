use serde::{Deserialize, Serialize};

use super::scenario::Trace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseMetrics {
    /// Time of the largest deviation from the baseline, measured from t0, s.
    pub peak_time: f64,
    /// Excursion past the target in the direction of the response, K.
    /// When target equals baseline (disturbance rejection) this is the
    /// largest deviation in either direction.
    pub peak_overshoot: f64,
    /// Time at which the response last re-enters the band, measured from t0, s.
    pub settling_time: f64,
    /// Mean of the final 10% of the window.
    pub steady_value: f64,
}

/// Settling band used for the controller experiments: 2% of the step, never
/// tighter than 0.1 K.
pub fn settling_band(step: f64) -> f64 {
    (0.02 * step.abs()).max(0.1)
}

/// Metrics of the T_E column over `t >= t0`.
pub fn response_metrics(
    tr: &Trace,
    t0: f64,
    baseline: f64,
    target: f64,
    band: f64,
) -> Result<ResponseMetrics> {
    series_metrics(&tr.times(), &tr.t_e(), t0, baseline, target, band)
}

/// Same as [`response_metrics`] over bare sample vectors.
pub fn series_metrics(
    t: &[f64],
    y: &[f64],
    t0: f64,
    baseline: f64,
    target: f64,
    band: f64,
) -> Result<ResponseMetrics> {
    if t.len() != y.len() {
        return Err(Error::Domain(
            "time and value series differ in length".into(),
        ));
    }
    if !(band > 0.0) {
        return Err(Error::Domain(format!("band must be > 0, got {band}")));
    }
    let start = t.partition_point(|&ti| ti < t0);
    let (t, y) = (&t[start..], &y[start..]);
    if t.is_empty() {
        return Err(Error::Domain(format!("no samples at or after t0 = {t0}")));
    }

    let dir = (target - baseline).signum();
    let mut peak_overshoot: f64 = 0.0;
    let mut peak_dev = f64::NEG_INFINITY;
    let mut peak_time = 0.0;
    let mut last_out = None;
    for (k, (&ti, &yi)) in t.iter().zip(y).enumerate() {
        let excess = if target == baseline {
            (yi - target).abs()
        } else {
            (yi - target) * dir
        };
        peak_overshoot = peak_overshoot.max(excess);
        let dev = (yi - baseline).abs();
        if dev > peak_dev {
            peak_dev = dev;
            peak_time = ti - t0;
        }
        if (yi - target).abs() > band {
            last_out = Some(k);
        }
    }
    let settling_time = match last_out {
        None => 0.0,
        Some(k) if k + 1 < t.len() => t[k + 1] - t0,
        Some(k) => t[k] - t0,
    };
    let tail = (t.len() / 10).max(1);
    let steady_value = y[y.len() - tail..].iter().sum::<f64>() / tail as f64;
    Ok(ResponseMetrics {
        peak_time,
        peak_overshoot,
        settling_time,
        steady_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sampled(dt: f64, t_end: f64, f: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let n = (t_end / dt).round() as usize;
        let t: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let y = t.iter().map(|&t| f(t)).collect();
        (t, y)
    }

    #[test]
    fn constant_at_target_is_settled() {
        let (t, y) = sampled(1.0, 100.0, |_| 151.0);
        let m = series_metrics(&t, &y, 0.0, 170.0, 151.0, 0.1).unwrap();
        assert_eq!(m.peak_overshoot, 0.0);
        assert_eq!(m.settling_time, 0.0);
        assert_eq!(m.steady_value, 151.0);
    }

    #[test]
    fn underdamped_second_order() {
        let (zeta, wn): (f64, f64) = (0.5, 1.0);
        let wd = wn * (1.0 - zeta * zeta).sqrt();
        let phi = zeta.acos();
        let dt = 0.01;
        let (t, y) = sampled(dt, 30.0, |t| {
            1.0 - (-zeta * wn * t).exp() / (1.0 - zeta * zeta).sqrt() * (wd * t + phi).sin()
        });
        let m = series_metrics(&t, &y, 0.0, 0.0, 1.0, 0.02).unwrap();
        let os = (-std::f64::consts::PI * zeta / (1.0 - zeta * zeta).sqrt()).exp();
        assert_relative_eq!(os, 0.1630, epsilon = 5e-5);
        assert!(
            (m.peak_overshoot - 0.1630).abs() <= 5e-4,
            "{}",
            m.peak_overshoot
        );
        assert!((m.peak_time - 3.628).abs() <= dt, "{}", m.peak_time);
    }

    #[test]
    fn first_order_two_percent_settling() {
        let tau = 10.0;
        let dt = 0.1;
        let (t, y) = sampled(dt, 100.0, |t| 1.0 - (-t / tau).exp());
        let m = series_metrics(&t, &y, 0.0, 0.0, 1.0, 0.02).unwrap();
        assert_eq!(m.peak_overshoot, 0.0);
        assert!(
            (m.settling_time - 3.912 * tau).abs() <= dt,
            "{}",
            m.settling_time
        );
    }

    #[test]
    fn downward_step_counts_undershoot_as_overshoot() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [170.0, 160.0, 150.0, 150.5, 151.0];
        let m = series_metrics(&t, &y, 1.0, 170.0, 151.0, 0.38).unwrap();
        assert_relative_eq!(m.peak_overshoot, 1.0);
        assert_eq!(m.peak_time, 1.0);
        assert_eq!(m.settling_time, 3.0);
    }

    #[test]
    fn disturbance_peak_is_two_sided() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let y = [151.0, 151.6, 150.9, 151.0];
        let m = series_metrics(&t, &y, 0.0, 151.0, 151.0, 0.1).unwrap();
        assert_relative_eq!(m.peak_overshoot, 0.6, max_relative = 1e-12);
        assert_eq!(m.peak_time, 1.0);
        assert_eq!(m.settling_time, 2.0);
    }

    #[test]
    fn bad_windows_are_domain_errors() {
        let t = [0.0, 1.0];
        let y = [1.0, 1.0];
        assert!(matches!(
            series_metrics(&t, &y, 5.0, 0.0, 1.0, 0.1),
            Err(Error::Domain(_))
        ));
        assert!(series_metrics(&t, &y, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(series_metrics(&t, &y[..1], 0.0, 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn band_floor() {
        assert_relative_eq!(settling_band(-19.0), 0.38);
        assert_eq!(settling_band(0.0), 0.1);
    }
}
