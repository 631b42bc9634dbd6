//! Nelder-Mead simplex minimizer for low-dimensional smooth objectives.

/// Minimize `f` starting from `x0`. Returns the best point and value.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    for _ in 0..max_iters {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];
        if (fvals[worst] - fvals[best]).abs() < tol {
            break;
        }
        // centroid of all but worst
        let mut centroid = vec![0.0; n];
        for &i in order.iter().take(n) {
            for j in 0..n {
                centroid[j] += simplex[i][j] / n as f64;
            }
        }
        let reflect: Vec<f64> = (0..n)
            .map(|j| centroid[j] + ALPHA * (centroid[j] - simplex[worst][j]))
            .collect();
        let f_reflect = f(&reflect);
        if f_reflect < fvals[best] {
            let expand: Vec<f64> = (0..n)
                .map(|j| centroid[j] + GAMMA * (reflect[j] - centroid[j]))
                .collect();
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                fvals[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                fvals[worst] = f_reflect;
            }
        } else if f_reflect < fvals[second_worst] {
            simplex[worst] = reflect;
            fvals[worst] = f_reflect;
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|j| centroid[j] + RHO * (simplex[worst][j] - centroid[j]))
                .collect();
            let f_contract = f(&contract);
            if f_contract < fvals[worst] {
                simplex[worst] = contract;
                fvals[worst] = f_contract;
            } else {
                // shrink toward best
                let best_point = simplex[best].clone();
                for i in 0..=n {
                    if i == best {
                        continue;
                    }
                    for j in 0..n {
                        simplex[i][j] = best_point[j] + SIGMA * (simplex[i][j] - best_point[j]);
                    }
                    fvals[i] = f(&simplex[i]);
                }
            }
        }
    }
    let (argmin, _) = fvals
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_cmp(b))
        .unwrap();
    (simplex[argmin].clone(), fvals[argmin])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn minimizes_quadratic() {
        let (x, fx) = nelder_mead(
            |v| (v[0] - 2.0).powi(2) + 2.0 * (v[1] + 1.0).powi(2),
            &[0.0, 0.0],
            0.5,
            300,
            1e-12,
        );
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-4);
        assert_abs_diff_eq!(x[1], -1.0, epsilon = 1e-4);
        assert!(fx < 1e-7);
    }

    #[test]
    fn minimizes_rosenbrock_2d() {
        let (x, _) = nelder_mead(
            |v| (1.0 - v[0]).powi(2) + 100.0 * (v[1] - v[0] * v[0]).powi(2),
            &[-1.2, 1.0],
            0.5,
            2000,
            1e-14,
        );
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-3);
    }
}
