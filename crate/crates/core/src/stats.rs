//! Brunner-Munzel test and Bonferroni correction.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmResult {
    /// Studentized rank statistic (infinite when degenerate and `p_hat != 0.5`).
    pub statistic: f64,
    /// Satterthwaite degrees of freedom (NaN when degenerate).
    pub df: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Relative effect `P(X < Y) + P(X = Y) / 2` with `X` from the first sample.
    pub p_hat: f64,
    /// Rank variance estimate is zero.
    pub degenerate: bool,
}

/// Midranks (1-based) of `values`, ties sharing their average rank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[idx[k]] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Relative effect by direct pair counting.
pub fn relative_effect(a: &[f64], b: &[f64]) -> f64 {
    let mut twice = 0u64;
    for x in a {
        for y in b {
            if x < y {
                twice += 2;
            } else if x == y {
                twice += 1;
            }
        }
    }
    twice as f64 / (2 * a.len() * b.len()) as f64
}

/// Two-sided Brunner-Munzel test with the t approximation.
///
/// A zero variance estimate (complete separation, or every value tied) is
/// flagged `degenerate`; the limiting p-value is reported: 0 when the effect
/// differs from 1/2, 1 when it is exactly 1/2.
pub fn brunner_munzel(a: &[f64], b: &[f64]) -> Result<BmResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::EmptySample(
            "Brunner-Munzel needs at least two values per sample".into(),
        ));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Malformed("non-finite sample value".into()));
    }
    let (nx, ny) = (a.len() as f64, b.len() as f64);
    let combined: Vec<f64> = a.iter().chain(b).copied().collect();
    let rc = midranks(&combined);
    let (rcx, rcy) = rc.split_at(a.len());
    let rx = midranks(a);
    let ry = midranks(b);
    let mean_x = rcx.iter().sum::<f64>() / nx;
    let mean_y = rcy.iter().sum::<f64>() / ny;

    let var = |rc: &[f64], r: &[f64], mean: f64, n: f64| {
        rc.iter()
            .zip(r)
            .map(|(c, w)| {
                let d = c - w - mean + (n + 1.0) / 2.0;
                d * d
            })
            .sum::<f64>()
            / (n - 1.0)
    };
    let sx = var(rcx, &rx, mean_x, nx);
    let sy = var(rcy, &ry, mean_y, ny);
    let p_hat = relative_effect(a, b);

    let pooled = nx * sx + ny * sy;
    if pooled <= 0.0 {
        let tied = p_hat == 0.5;
        return Ok(BmResult {
            statistic: if tied {
                0.0
            } else {
                f64::INFINITY.copysign(mean_y - mean_x)
            },
            df: f64::NAN,
            p_value: if tied { 1.0 } else { 0.0 },
            p_hat,
            degenerate: true,
        });
    }
    let statistic = nx * ny * (mean_y - mean_x) / ((nx + ny) * pooled.sqrt());
    let df = pooled * pooled / ((nx * sx).powi(2) / (nx - 1.0) + (ny * sy).powi(2) / (ny - 1.0));
    let t = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Malformed(e.to_string()))?;
    let tail = t.cdf(-statistic.abs());
    Ok(BmResult {
        statistic,
        df,
        p_value: (2.0 * tail).min(1.0),
        p_hat,
        degenerate: false,
    })
}

/// `min(1, p * m)` for each entry.
pub fn bonferroni(p: &[f64], m: usize) -> Vec<f64> {
    p.iter().map(|v| (v * m as f64).min(1.0)).collect()
}
