//! Local linear smoothing (tricube weights) and monotone repair for the
//! threshold-cost calibration curve.

/// Degree-1 LOESS fit evaluated at each input point.
///
/// Neighborhood size is `max(2, floor(span * n))` nearest points; weights are
/// tricube in scaled distance. No robustness iterations.
pub fn loess_fit(xs: &[f64], ys: &[f64], span: f64) -> Vec<f64> {
    let n = xs.len();
    assert_eq!(n, ys.len());
    assert!(n >= 2, "loess needs at least two points");
    let k = ((span * n as f64).floor() as usize).clamp(2, n);
    let mut fitted = Vec::with_capacity(n);
    let mut dist: Vec<f64> = vec![0.0; n];
    for i in 0..n {
        let x0 = xs[i];
        for (j, d) in dist.iter_mut().enumerate() {
            *d = (xs[j] - x0).abs();
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]));
        let h = dist[order[k - 1]].max(1e-300);
        // weighted linear regression on (x - x0)
        let (mut sw, mut swx, mut swy, mut swxx, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &j in order.iter().take(k) {
            let u = dist[j] / h;
            if u >= 1.0 && dist[j] > 0.0 {
                continue;
            }
            let w = tricube(u.min(1.0));
            let dx = xs[j] - x0;
            sw += w;
            swx += w * dx;
            swy += w * ys[j];
            swxx += w * dx * dx;
            swxy += w * dx * ys[j];
        }
        let denom = sw * swxx - swx * swx;
        let value = if denom.abs() > 1e-12 * sw.max(1.0) {
            // intercept of the local line at x0
            (swxx * swy - swx * swxy) / denom
        } else {
            swy / sw
        };
        fitted.push(value);
    }
    fitted
}

fn tricube(u: f64) -> f64 {
    let t = 1.0 - u * u * u;
    t * t * t
}

/// Pool-adjacent-violators: least-squares non-decreasing fit.
pub fn pav_nondecreasing(ys: &[f64]) -> Vec<f64> {
    let n = ys.len();
    let mut level: Vec<f64> = Vec::with_capacity(n);
    let mut weight: Vec<f64> = Vec::with_capacity(n);
    let mut count: Vec<usize> = Vec::with_capacity(n);
    for &y in ys {
        level.push(y);
        weight.push(1.0);
        count.push(1);
        while level.len() > 1 && level[level.len() - 2] > level[level.len() - 1] {
            let (l1, w1, c1) = (level.pop().unwrap(), weight.pop().unwrap(), count.pop().unwrap());
            let last = level.len() - 1;
            let merged_w = weight[last] + w1;
            level[last] = (level[last] * weight[last] + l1 * w1) / merged_w;
            weight[last] = merged_w;
            count[last] += c1;
        }
    }
    let mut out = Vec::with_capacity(n);
    for (lv, c) in level.iter().zip(count.iter()) {
        out.extend(std::iter::repeat(*lv).take(*c));
    }
    out
}

/// Invert a non-decreasing piecewise-linear curve at `target`.
///
/// Returns `(x, clamped)`; when the target lies outside the curve range the
/// nearest endpoint is returned with `clamped = true`.
pub fn invert_monotone(xs: &[f64], ys: &[f64], target: f64) -> (f64, bool) {
    let n = xs.len();
    assert!(n >= 2);
    if target <= ys[0] {
        return (xs[0], target < ys[0]);
    }
    if target >= ys[n - 1] {
        return (xs[n - 1], target > ys[n - 1]);
    }
    for i in 0..n - 1 {
        let (y0, y1) = (ys[i], ys[i + 1]);
        if target >= y0 && target <= y1 {
            if y1 == y0 {
                return (0.5 * (xs[i] + xs[i + 1]), false);
            }
            let w = (target - y0) / (y1 - y0);
            return (xs[i] + w * (xs[i + 1] - xs[i]), false);
        }
    }
    (xs[n - 1], true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn loess_recovers_linear_data_exactly() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let fit = loess_fit(&xs, &ys, 0.75);
        for (f, y) in fit.iter().zip(ys.iter()) {
            assert_abs_diff_eq!(f, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn loess_smooths_noise_toward_trend() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        // alternating noise around a flat line
        let ys: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let fit = loess_fit(&xs, &ys, 0.75);
        let spread = fit.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!(spread < 0.7, "smoother should shrink alternation, got {spread}");
    }

    #[test]
    fn pav_fixes_violations_and_preserves_monotone_input() {
        let ys = vec![1.0, 2.0, 1.5, 3.0, 2.5, 4.0];
        let iso = pav_nondecreasing(&ys);
        for w in iso.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
        // mean preserved
        let m0: f64 = ys.iter().sum::<f64>() / 6.0;
        let m1: f64 = iso.iter().sum::<f64>() / 6.0;
        assert_abs_diff_eq!(m0, m1, epsilon = 1e-12);
        let sorted = vec![0.0, 1.0, 2.0, 3.0];
        assert_eq!(pav_nondecreasing(&sorted), sorted);
    }

    #[test]
    fn inversion_with_clamping() {
        let xs = vec![0.0, 1.0, 2.0];
        let ys = vec![3.0, 5.0, 9.0];
        let (x, clamped) = invert_monotone(&xs, &ys, 4.0);
        assert_abs_diff_eq!(x, 0.5, epsilon = 1e-12);
        assert!(!clamped);
        let (x, clamped) = invert_monotone(&xs, &ys, 2.0);
        assert_eq!((x, clamped), (0.0, true));
        let (x, clamped) = invert_monotone(&xs, &ys, 10.0);
        assert_eq!((x, clamped), (2.0, true));
    }
}
