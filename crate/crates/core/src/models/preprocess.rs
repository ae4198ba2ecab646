use super::ModelError;

/// First differences: `out[k] = series[k + 1] − series[k]`.
///
/// Each difference belongs to the later of its two time points.
pub fn finite_difference(series: &[f64]) -> Result<Vec<f64>, ModelError> {
    if series.len() < 2 {
        return Err(ModelError::SeriesTooShort { len: series.len(), min: 2 });
    }
    Ok(series.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Trailing moving average over full windows only:
/// `out[k] = mean(series[k ..= k + window − 1])`, length `m − window + 1`.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>, ModelError> {
    if window == 0 || window > series.len() {
        return Err(ModelError::WindowTooLarge { window, len: series.len() });
    }
    let w = window as f64;
    Ok(series.windows(window).map(|chunk| chunk.iter().sum::<f64>() / w).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn differences() {
        assert_eq!(finite_difference(&[0.0, 5.0, 12.0, 20.0]).unwrap(), vec![5.0, 7.0, 8.0]);
        assert_eq!(finite_difference(&[3.0; 5]).unwrap(), vec![0.0; 4]);
        assert!(matches!(finite_difference(&[1.0]), Err(ModelError::SeriesTooShort { .. })));
    }

    #[test]
    fn moving_averages() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0], 3).unwrap(), vec![2.0, 3.0]);
        assert_eq!(moving_average(&[1.0, 7.0, -3.0], 1).unwrap(), vec![1.0, 7.0, -3.0]);
        assert_eq!(moving_average(&[2.5; 10], 7).unwrap(), vec![2.5; 4]);
        assert!(matches!(moving_average(&[1.0, 2.0], 3), Err(ModelError::WindowTooLarge { .. })));
        assert!(moving_average(&[1.0, 2.0], 0).is_err());
    }

    proptest! {
        #[test]
        fn difference_sums_telescope(xs in prop::collection::vec(-1e3f64..1e3, 2..50)) {
            let d = finite_difference(&xs).unwrap();
            let total: f64 = d.iter().sum();
            prop_assert!((total - (xs[xs.len() - 1] - xs[0])).abs() < 1e-9);
        }

        #[test]
        fn difference_inverts_cumulative_sum(xs in prop::collection::vec(-1e3f64..1e3, 1..50)) {
            let mut cum = vec![0.0];
            for x in &xs {
                cum.push(cum[cum.len() - 1] + x);
            }
            let d = finite_difference(&cum).unwrap();
            for (a, b) in d.iter().zip(&xs) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn moving_average_shift_and_scale(
            xs in prop::collection::vec(-1e3f64..1e3, 1..40),
            c in -1e3f64..1e3,
            s in 0.01f64..100.0,
            w in 1usize..8,
        ) {
            prop_assume!(w <= xs.len());
            let base = moving_average(&xs, w).unwrap();
            let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
            let scaled: Vec<f64> = xs.iter().map(|x| x * s).collect();
            let ms = moving_average(&shifted, w).unwrap();
            let mk = moving_average(&scaled, w).unwrap();
            prop_assert_eq!(base.len(), xs.len() - w + 1);
            for i in 0..base.len() {
                prop_assert!((ms[i] - (base[i] + c)).abs() < 1e-9);
                prop_assert!((mk[i] - base[i] * s).abs() < 1e-9 * (1.0 + base[i].abs() * s));
            }
        }
    }
}
