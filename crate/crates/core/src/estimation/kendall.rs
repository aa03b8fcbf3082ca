//! Tie-adjusted Kendall's tau (tau-b) in `O(n log n)`, using Knight's
//! merge-sort algorithm.

use crate::error::{Error, Result};

/// Kendall's tau-b between `x` and `y`.
pub fn empirical_kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Degenerate(format!(
            "coordinate lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewObservations {
            required: 2,
            actual: n,
        });
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Degenerate("NaN in Kendall tau input".into()));
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&i, &j| x[i].total_cmp(&x[j]).then(y[i].total_cmp(&y[j])));

    let total = pairs(n as u64);
    let mut x_ties = 0u64;
    let mut joint_ties = 0u64;
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        if x[a] == x[b] {
            run_x += 1;
            if y[a] == y[b] {
                run_xy += 1;
            } else {
                joint_ties += pairs(run_xy);
                run_xy = 1;
            }
        } else {
            x_ties += pairs(run_x);
            joint_ties += pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    x_ties += pairs(run_x);
    joint_ties += pairs(run_xy);

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut y_ties = 0u64;
    let mut run_y = 1u64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run_y += 1;
        } else {
            y_ties += pairs(run_y);
            run_y = 1;
        }
    }
    y_ties += pairs(run_y);

    if x_ties == total || y_ties == total {
        return Err(Error::Degenerate(
            "Kendall tau undefined for a constant coordinate".into(),
        ));
    }
    let numerator =
        total as i64 - x_ties as i64 - y_ties as i64 + joint_ties as i64 - 2 * swaps as i64;
    Ok(tau_b(numerator, total - x_ties, total - y_ties))
}

/// Final tau-b ratio, shared with the brute-force oracle in tests so both
/// paths round identically.
pub(crate) fn tau_b(concordance: i64, untied_x: u64, untied_y: u64) -> f64 {
    concordance as f64 / ((untied_x as f64) * (untied_y as f64)).sqrt()
}

fn pairs(k: u64) -> u64 {
    k * (k - 1) / 2
}

/// Stable merge sort returning the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (left, right) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(left, bl) + merge_count(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// O(n^2) pairwise count.
    fn brute_force(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let (mut conc, mut tx, mut ty) = (0i64, 0u64, 0u64);
        for i in 0..n {
            for j in i + 1..n {
                let dx = x[i].partial_cmp(&x[j]).unwrap() as i64;
                let dy = y[i].partial_cmp(&y[j]).unwrap() as i64;
                conc += dx * dy;
                tx += (dx == 0) as u64;
                ty += (dy == 0) as u64;
            }
        }
        let total = (n * (n - 1) / 2) as u64;
        tau_b(conc, total - tx, total - ty)
    }

    #[test]
    fn perfect_concordance_and_discordance() {
        assert_eq!(
            empirical_kendall_tau(&[1., 2., 3.], &[1., 2., 3.]).unwrap(),
            1.0
        );
        assert_eq!(
            empirical_kendall_tau(&[1., 2., 3.], &[3., 2., 1.]).unwrap(),
            -1.0
        );
    }

    #[test]
    fn degenerate_inputs() {
        assert!(empirical_kendall_tau(&[1.0], &[2.0]).is_err());
        assert!(empirical_kendall_tau(&[1., 1., 1.], &[1., 2., 3.]).is_err());
        assert!(empirical_kendall_tau(&[1., 2.], &[1.]).is_err());
    }

    #[test]
    fn matches_brute_force_with_ties() {
        let mut rng = crate::random::seeded_rng(17);
        for _ in 0..50 {
            let n = rng.random_range(2..=200);
            let levels = rng.random_range(2..=30) as f64;
            let x: Vec<f64> = (0..n)
                .map(|_| (rng.random::<f64>() * levels).floor())
                .collect();
            let y: Vec<f64> = x
                .iter()
                .map(|&v| (v + rng.random::<f64>() * levels).floor())
                .collect();
            match (empirical_kendall_tau(&x, &y), brute_force_checked(&x, &y)) {
                (Ok(a), Some(b)) => assert_eq!(a, b),
                (Err(_), None) => {}
                other => panic!("disagreement {other:?}"),
            }
        }
    }

    fn brute_force_checked(x: &[f64], y: &[f64]) -> Option<f64> {
        let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
        (!constant(x) && !constant(y)).then(|| brute_force(x, y))
    }
}
