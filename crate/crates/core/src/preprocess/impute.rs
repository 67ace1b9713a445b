use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ways to fill missing observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeMethod {
    LinearInterpolation,
    /// Last observation carried forward (next observation at the head).
    Locf,
    /// Next observation carried backward (last observation at the tail).
    Nocb,
    /// Mean of the observed values within `window` positions on either side,
    /// falling back to the nearest observation when the window is empty.
    MovingAverage(usize),
    Mean,
    Median,
}

fn previous_observed(seq: &[Option<f64>]) -> Vec<Option<(usize, f64)>> {
    let mut last = None;
    seq.iter()
        .enumerate()
        .map(|(i, v)| {
            if let Some(x) = v {
                last = Some((i, *x));
            }
            last
        })
        .collect()
}

fn next_observed(seq: &[Option<f64>]) -> Vec<Option<(usize, f64)>> {
    let mut next = None;
    let mut out: Vec<_> = seq
        .iter()
        .enumerate()
        .rev()
        .map(|(i, v)| {
            if let Some(x) = v {
                next = Some((i, *x));
            }
            next
        })
        .collect();
    out.reverse();
    out
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Replace every missing entry; observed values are returned untouched.
pub fn impute(seq: &[Option<f64>], method: ImputeMethod) -> Result<Vec<f64>> {
    let observed: Vec<f64> = seq.iter().flatten().copied().collect();
    if observed.is_empty() {
        return Err(if seq.is_empty() {
            Error::EmptyInput
        } else {
            Error::AllMissing
        });
    }
    if let ImputeMethod::MovingAverage(0) = method {
        return Err(Error::invalid("window", "moving-average window must be positive"));
    }
    let prev = previous_observed(seq);
    let next = next_observed(seq);
    let nearest = |i: usize| -> f64 {
        match (prev[i], next[i]) {
            (Some((a, x)), Some((b, y))) => {
                if i - a <= b - i {
                    x
                } else {
                    y
                }
            }
            (Some((_, x)), None) | (None, Some((_, x))) => x,
            (None, None) => unreachable!("at least one value is observed"),
        }
    };
    let fill = match method {
        ImputeMethod::Mean => Some(observed.iter().sum::<f64>() / observed.len() as f64),
        ImputeMethod::Median => Some(median(&mut observed.clone())),
        _ => None,
    };
    Ok(seq
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if let Some(x) = v {
                return *x;
            }
            if let Some(f) = fill {
                return f;
            }
            match method {
                ImputeMethod::LinearInterpolation => match (prev[i], next[i]) {
                    (Some((a, x)), Some((b, y))) => x + (y - x) * (i - a) as f64 / (b - a) as f64,
                    _ => nearest(i),
                },
                ImputeMethod::Locf => prev[i].or(next[i]).map(|p| p.1).unwrap(),
                ImputeMethod::Nocb => next[i].or(prev[i]).map(|p| p.1).unwrap(),
                ImputeMethod::MovingAverage(w) => {
                    let lo = i.saturating_sub(w);
                    let hi = (i + w + 1).min(seq.len());
                    let vals: Vec<f64> = seq[lo..hi].iter().flatten().copied().collect();
                    if vals.is_empty() {
                        nearest(i)
                    } else {
                        vals.iter().sum::<f64>() / vals.len() as f64
                    }
                }
                ImputeMethod::Mean | ImputeMethod::Median => unreachable!(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GAP: [Option<f64>; 3] = [Some(1.0), None, Some(3.0)];

    #[test]
    fn definitions() {
        assert_eq!(impute(&GAP, ImputeMethod::LinearInterpolation).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(impute(&GAP, ImputeMethod::Locf).unwrap(), vec![1.0, 1.0, 3.0]);
        assert_eq!(impute(&GAP, ImputeMethod::Nocb).unwrap(), vec![1.0, 3.0, 3.0]);
        assert_eq!(impute(&GAP, ImputeMethod::MovingAverage(1)).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(
            impute(&[None, Some(2.0), Some(4.0)], ImputeMethod::Mean).unwrap(),
            vec![3.0, 2.0, 4.0]
        );
        assert_eq!(
            impute(&[Some(1.0), None, Some(2.0), Some(10.0)], ImputeMethod::Median).unwrap(),
            vec![1.0, 2.0, 2.0, 10.0]
        );
    }

    #[test]
    fn boundary_fallbacks() {
        let head = [None, None, Some(5.0), Some(6.0)];
        assert_eq!(impute(&head, ImputeMethod::Locf).unwrap(), vec![5.0, 5.0, 5.0, 6.0]);
        let tail = [Some(5.0), Some(6.0), None];
        assert_eq!(impute(&tail, ImputeMethod::Nocb).unwrap(), vec![5.0, 6.0, 6.0]);
        assert_eq!(impute(&tail, ImputeMethod::LinearInterpolation).unwrap(), vec![5.0, 6.0, 6.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(impute(&[None, None], ImputeMethod::Mean), Err(Error::AllMissing)));
        assert!(impute(&GAP, ImputeMethod::MovingAverage(0)).is_err());
    }

    fn method() -> impl Strategy<Value = ImputeMethod> {
        prop_oneof![
            Just(ImputeMethod::LinearInterpolation),
            Just(ImputeMethod::Locf),
            Just(ImputeMethod::Nocb),
            (1usize..5).prop_map(ImputeMethod::MovingAverage),
            Just(ImputeMethod::Mean),
            Just(ImputeMethod::Median),
        ]
    }

    proptest! {
        #[test]
        fn idempotent_and_preserves_observed(
            seq in prop::collection::vec(prop::option::weighted(0.7, -100f64..100.0), 1..40),
            m in method(),
        ) {
            prop_assume!(seq.iter().any(Option::is_some));
            let once = impute(&seq, m).unwrap();
            for (o, s) in once.iter().zip(&seq) {
                if let Some(x) = s {
                    prop_assert_eq!(o, x);
                }
            }
            let twice = impute(&once.iter().copied().map(Some).collect::<Vec<_>>(), m).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
