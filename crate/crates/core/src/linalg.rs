//! Small dense least-squares helpers used by the fitting routines.

/// Least-squares fit of `y ≈ Σ_j c_j·basis_j(x)` via the normal equations.
///
/// Returns the coefficients and the RMS residual, or `None` when the system
/// is singular or underdetermined.
pub fn least_squares<F>(xs: &[f64], ys: &[f64], n_basis: usize, basis: F) -> Option<(Vec<f64>, f64)>
where
    F: Fn(f64, usize) -> f64,
{
    if xs.len() != ys.len() || xs.len() < n_basis || n_basis == 0 {
        return None;
    }
    let mut ata = vec![vec![0.0; n_basis]; n_basis];
    let mut aty = vec![0.0; n_basis];
    for (&x, &y) in xs.iter().zip(ys) {
        let row: Vec<f64> = (0..n_basis).map(|j| basis(x, j)).collect();
        for i in 0..n_basis {
            aty[i] += row[i] * y;
            for j in 0..n_basis {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let coeffs = solve(ata, aty)?;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let fit: f64 = (0..n_basis).map(|j| coeffs[j] * basis(x, j)).sum();
            (y - fit).powi(2)
        })
        .sum();
    Some((coeffs, (ss / xs.len() as f64).sqrt()))
}

/// Straight-line fit `y ≈ c₀ + c₁ x`; returns `(intercept, slope, rms)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let (c, rms) = least_squares(xs, ys, 2, |x, j| if j == 0 { 1.0 } else { x })?;
    Some((c[0], c[1], rms))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolyFit {
    /// `c_j` of `Σ c_j x^j`.
    pub coeffs: Vec<f64>,
    /// `sqrt(diag((AᵀA)^{-1}) · RSS/(n − k))`.
    pub std_errors: Vec<f64>,
    pub rms: f64,
}

/// Polynomial least squares with ordinary standard errors; needs more
/// points than coefficients.
pub fn polynomial_fit(xs: &[f64], ys: &[f64], degree: usize) -> Option<PolyFit> {
    let k = degree + 1;
    if xs.len() <= k {
        return None;
    }
    let (coeffs, rms) = least_squares(xs, ys, k, |x, j| x.powi(j as i32))?;
    let mut ata = vec![vec![0.0; k]; k];
    for &x in xs {
        for i in 0..k {
            for j in 0..k {
                ata[i][j] += x.powi(i as i32) * x.powi(j as i32);
            }
        }
    }
    let dof = (xs.len() - k) as f64;
    let variance = rms * rms * xs.len() as f64 / dof;
    let std_errors = (0..k)
        .map(|i| {
            let e: Vec<f64> = (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
            solve(ata.clone(), e).map(|col| (col[i] * variance).max(0.0).sqrt())
        })
        .collect::<Option<Vec<_>>>()?;
    Some(PolyFit { coeffs, std_errors, rms })
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, Newton on `P_m`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

// (P_m(x), P_m'(x)) by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, m as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
