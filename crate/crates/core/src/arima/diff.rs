//! Differencing and its inverse.

use alloc::vec::Vec;

use super::ArimaError;

/// The `d`-th order difference; the result has `len - d` values.
pub fn difference(series: &[f64], d: usize) -> Result<Vec<f64>, ArimaError> {
    if series.len() <= d {
        return Err(ArimaError::SeriesTooShort { needed: d + 1, got: series.len() });
    }
    let mut out = series.to_vec();
    for _ in 0..d {
        for i in 0..out.len() - 1 {
            out[i] = out[i + 1] - out[i];
        }
        out.pop();
    }
    Ok(out)
}

/// Inverts [`difference`] given the `d` leading values of the original series.
pub fn integrate(diffed: &[f64], d: usize, seeds: &[f64]) -> Result<Vec<f64>, ArimaError> {
    if seeds.len() != d {
        return Err(ArimaError::SeedMismatch { expected: d, got: seeds.len() });
    }
    // heads[k] = first value of the k-th difference of the original series
    let mut heads = Vec::with_capacity(d);
    let mut level = seeds.to_vec();
    for _ in 0..d {
        heads.push(level[0]);
        for i in 0..level.len() - 1 {
            level[i] = level[i + 1] - level[i];
        }
        level.pop();
    }
    let mut out = diffed.to_vec();
    for &head in heads.iter().rev() {
        let mut acc = head;
        let mut next = Vec::with_capacity(out.len() + 1);
        next.push(acc);
        for v in &out {
            acc += v;
            next.push(acc);
        }
        out = next;
    }
    Ok(out)
}

/// Maps forecasts of the differenced series back to the original scale,
/// continuing from the end of `history`.
pub fn undifference_forecast(history: &[f64], d: usize, forecasts: &[f64]) -> Result<Vec<f64>, ArimaError> {
    if history.len() <= d {
        return Err(ArimaError::SeriesTooShort { needed: d + 1, got: history.len() });
    }
    // tails[k] = last value of the k-th difference of history
    let mut tails = Vec::with_capacity(d);
    let mut level = history[history.len() - (d + 1)..].to_vec();
    for _ in 0..d {
        tails.push(*level.last().unwrap());
        for i in 0..level.len() - 1 {
            level[i] = level[i + 1] - level[i];
        }
        level.pop();
    }
    let mut out = forecasts.to_vec();
    for &tail in tails.iter().rev() {
        let mut acc = tail;
        for v in out.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn first_and_second_differences() {
        assert_eq!(difference(&[1.0, 2.0, 4.0, 7.0], 1).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(difference(&[1.0, 2.0, 4.0, 7.0], 2).unwrap(), vec![1.0, 1.0]);
        assert_eq!(difference(&[3.0, 1.0], 0).unwrap(), vec![3.0, 1.0]);
        assert!(matches!(difference(&[1.0, 2.0], 2), Err(ArimaError::SeriesTooShort { .. })));
    }

    #[test]
    fn integrate_inverts_examples() {
        assert_eq!(integrate(&[1.0, 2.0, 3.0], 1, &[1.0]).unwrap(), vec![1.0, 2.0, 4.0, 7.0]);
        assert_eq!(integrate(&[1.0, 1.0], 2, &[1.0, 2.0]).unwrap(), vec![1.0, 2.0, 4.0, 7.0]);
        assert_eq!(integrate(&[5.0, 6.0], 0, &[]).unwrap(), vec![5.0, 6.0]);
        assert_eq!(integrate(&[1.0], 1, &[]), Err(ArimaError::SeedMismatch { expected: 1, got: 0 }));
    }

    #[test]
    fn undifference_continues_history() {
        // history 1,2,4,7 has differences 1,2,3 and second differences 1,1
        let h = [1.0, 2.0, 4.0, 7.0];
        assert_eq!(undifference_forecast(&h, 1, &[4.0, 5.0]).unwrap(), vec![11.0, 16.0]);
        assert_eq!(undifference_forecast(&h, 2, &[1.0, 1.0]).unwrap(), vec![11.0, 16.0]);
        assert_eq!(undifference_forecast(&h, 0, &[9.0]).unwrap(), vec![9.0]);
    }

    proptest! {
        #[test]
        fn round_trip(series in prop::collection::vec(-1e3f64..1e3, 3..120), d in 0usize..=2) {
            let diffed = difference(&series, d).unwrap();
            let back = integrate(&diffed, d, &series[..d]).unwrap();
            prop_assert_eq!(back.len(), series.len());
            for (a, b) in back.iter().zip(&series) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
            }
        }
    }
}
