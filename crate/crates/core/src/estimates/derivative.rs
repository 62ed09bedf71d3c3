/// Derivative of a sampled series by three-point Lagrange stencils.
///
/// Interior points use their two neighbours (the centered difference on a
/// uniform grid); the endpoints use one-sided stencils of the same order.
/// Fewer than three samples fall back to a single slope.
pub fn time_derivative(times: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let n = times.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => {
            let slope = (values[1] - values[0]) / (times[1] - times[0]);
            vec![slope, slope]
        }
        _ => (0..n)
            .map(|i| {
                let c = i.clamp(1, n - 2);
                lagrange_slope(
                    [times[c - 1], times[c], times[c + 1]],
                    [values[c - 1], values[c], values[c + 1]],
                    times[i],
                )
            })
            .collect(),
    }
}

/// Derivative at `x` of the parabola through three points.
fn lagrange_slope(t: [f64; 3], f: [f64; 3], x: f64) -> f64 {
    let [t0, t1, t2] = t;
    let l0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
    let l1 = ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2));
    let l2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
    f[0] * l0 + f[1] * l1 + f[2] * l2
}
