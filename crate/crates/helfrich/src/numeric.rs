//! Small numerical kernels shared across modules: Hermite interpolation,
//! corrected-trapezoid and Simpson quadrature, dense least squares, and
//! Aitken sequence acceleration.

/// Cubic Hermite evaluation on one interval.
///
/// `t` is the normalized abscissa in `[0, 1]`, `h` the interval width,
/// `(y0, d0)` and `(y1, d1)` the endpoint values and derivatives.
pub(crate) fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Corrected-trapezoid (two-point Hermite) quadrature over one interval.
///
/// Exact for cubics; local error is O(h^5 f'''').
pub(crate) fn hermite_quad(g0: f64, gp0: f64, g1: f64, gp1: f64, h: f64) -> f64 {
    h * (g0 + g1) / 2.0 + h * h * (gp0 - gp1) / 12.0
}

/// Composite Simpson over uniformly spaced values.
///
/// Requires an odd number of points (even interval count); the last interval
/// falls back to trapezoid when the count is even.
pub(crate) fn simpson_uniform(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(n >= 2, "simpson needs at least two points");
    let mut end = n;
    let mut tail = 0.0;
    if n.is_multiple_of(2) {
        tail = h * (values[n - 2] + values[n - 1]) / 2.0;
        end = n - 1;
    }
    let mut sum = values[0] + values[end - 1];
    for (i, v) in values.iter().enumerate().take(end - 1).skip(1) {
        sum += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    sum * h / 3.0 + tail
}

/// Least squares fit of `y ≈ Σ c_k x^{powers[k]}` via normal equations.
///
/// The abscissae must already be scaled to O(1); intended for 3–4 term
/// constrained polynomial tails where the basis is well conditioned.
pub(crate) fn lstsq_monomials(xs: &[f64], ys: &[f64], powers: &[i32]) -> Option<Vec<f64>> {
    let k = powers.len();
    if xs.len() < k + 2 {
        return None;
    }
    let mut gram = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for (&x, &y) in xs.iter().zip(ys) {
        let basis: Vec<f64> = powers.iter().map(|&p| x.powi(p)).collect();
        for i in 0..k {
            rhs[i] += basis[i] * y;
            for j in 0..k {
                gram[i][j] += basis[i] * basis[j];
            }
        }
    }
    solve_dense(&mut gram, &mut rhs).then_some(rhs)
}

/// In-place Gaussian elimination with partial pivoting; solution lands in `b`.
#[allow(clippy::needless_range_loop)]
pub(crate) fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> bool {
    let n = b.len();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return false;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for j in col..n {
                a[row][j] -= f * a[col][j];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for j in col + 1..n {
            s -= a[col][j] * b[j];
        }
        b[col] = s / a[col][col];
    }
    true
}

/// Aitken Δ² acceleration of the last three terms of a sequence.
///
/// Falls back to the final term when the differences have already collapsed.
pub(crate) fn aitken_limit(seq: &[f64]) -> f64 {
    let n = seq.len();
    if n < 3 {
        return *seq.last().unwrap();
    }
    let (a, b, c) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let denom = c - 2.0 * b + a;
    if denom.abs() < 1e-14 * (a.abs() + b.abs() + c.abs() + 1e-300) {
        return c;
    }
    c - (c - b) * (c - b) / denom
}
