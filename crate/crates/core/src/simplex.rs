//! Nelder–Mead simplex minimization (unconstrained, derivative-free).

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in simplex.iter().enumerate() {
        for b in &simplex[i + 1..] {
            let dist = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            d = d.max(dist);
        }
    }
    d
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of the given
/// `steps`. Stops when the simplex diameter drops below `tol` or after
/// `max_evals` evaluations. The returned point is the best one evaluated.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], tol: f64, max_evals: usize) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(steps.len(), n);
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        sanitize(f(x))
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();
    let mut converged = false;

    loop {
        // Stable sort keeps the earlier vertex first on ties.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < tol {
            converged = true;
            break;
        }
        if evals >= max_evals {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(REFLECT);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(EXPAND);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(CONTRACT * REFLECT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = best
                .iter()
                .zip(&simplex[i])
                .map(|(b, x)| b + SHRINK * (x - b))
                .collect();
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    SimplexResult {
        x: simplex[best].clone(),
        value: values[best],
        evals,
        converged,
    }
}
