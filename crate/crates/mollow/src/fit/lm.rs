//! Damped Gauss–Newton least squares (Levenberg–Marquardt damping schedule)
//! with forward-difference Jacobians and covariance-based standard errors.
//!
//! All fit models in this crate have at most a handful of parameters, so the
//! normal equations are solved directly with partial-pivot elimination.

use crate::error::{Error, Result};
use crate::float::Real;

#[derive(Debug, Clone, Copy)]
pub struct LmOptions<T: Real> {
    pub max_iterations: usize,
    /// Stop when the relative cost decrease of an accepted step falls below this.
    pub cost_tol: T,
    /// Stop when the relative parameter step falls below this.
    pub step_tol: T,
    pub initial_lambda: T,
}

impl<T: Real> Default for LmOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            cost_tol: T::of(1e-12),
            step_tol: T::of(1e-10),
            initial_lambda: T::of(1e-3),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome<T: Real> {
    pub params: Vec<T>,
    /// 1σ parameter uncertainties from the covariance at the optimum, scaled
    /// by the reduced chi-square; absent when the Jacobian is rank deficient
    /// or there are no excess degrees of freedom.
    pub std_errors: Option<Vec<T>>,
    /// Σ r² at the optimum (weighted residuals).
    pub cost: T,
    pub residual_norm: T,
    pub n_iterations: usize,
    pub converged: bool,
    /// Cost after every accepted step (strictly non-increasing).
    pub cost_history: Vec<T>,
}

/// Minimize Σ rᵢ(x)² subject to box constraints. The closure fills the
/// weighted residual vector for a parameter vector.
pub fn least_squares<T, F>(
    mut residuals: F,
    n_residuals: usize,
    x0: &[T],
    lower: &[T],
    upper: &[T],
    opts: &LmOptions<T>,
) -> Result<LmOutcome<T>>
where
    T: Real,
    F: FnMut(&[T], &mut [T]) -> Result<()>,
{
    let p = x0.len();
    assert!(p > 0 && lower.len() == p && upper.len() == p);
    if n_residuals < p {
        return Err(Error::DegenerateData(format!(
            "{n_residuals} residuals cannot constrain {p} parameters"
        )));
    }

    let clamp = |x: &mut [T]| {
        for i in 0..p {
            x[i] = x[i].max(lower[i]).min(upper[i]);
        }
    };

    let mut x: Vec<T> = x0.to_vec();
    clamp(&mut x);
    let mut r = vec![T::zero(); n_residuals];
    residuals(&x, &mut r)?;
    let mut cost = dot(&r, &r);
    let mut lambda = opts.initial_lambda;
    let mut history = vec![cost];
    let mut converged = false;
    let mut iterations = 0;

    let mut jac = vec![vec![T::zero(); p]; n_residuals];
    let mut r_try = vec![T::zero(); n_residuals];

    for iter in 0..opts.max_iterations {
        iterations = iter + 1;
        forward_jacobian(&mut residuals, &x, &r, lower, upper, &mut jac)?;

        // normal equations: (JᵗJ + λ diag(JᵗJ)) δ = −Jᵗr
        let mut a = vec![vec![T::zero(); p]; p];
        let mut g = vec![T::zero(); p];
        for i in 0..n_residuals {
            for j in 0..p {
                g[j] += jac[i][j] * r[i];
                for k in j..p {
                    a[j][k] += jac[i][j] * jac[i][k];
                }
            }
        }
        for j in 0..p {
            for k in 0..j {
                a[j][k] = a[k][j];
            }
        }

        let gnorm = g.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
        if gnorm < T::of(1e-14) * (T::one() + cost) {
            converged = true;
            break;
        }

        let mut accepted = false;
        for _ in 0..40 {
            let mut damped = a.clone();
            for j in 0..p {
                let d = a[j][j];
                let floor = T::of(1e-30);
                damped[j][j] = d + lambda * d.max(floor);
            }
            let rhs: Vec<T> = g.iter().map(|&v| -v).collect();
            let delta = match solve(&mut damped, &rhs) {
                Some(d) => d,
                None => {
                    lambda *= T::of(4.0);
                    continue;
                }
            };
            let mut x_try: Vec<T> = x.iter().zip(&delta).map(|(&xi, &di)| xi + di).collect();
            clamp(&mut x_try);
            if residuals(&x_try, &mut r_try).is_err() {
                lambda *= T::of(4.0);
                continue;
            }
            let cost_try = dot(&r_try, &r_try);
            if cost_try.is_finite() && cost_try <= cost {
                let rel_step = x_try
                    .iter()
                    .zip(&x)
                    .map(|(&a, &b)| (a - b).abs() / (b.abs() + T::of(1e-12)))
                    .fold(T::zero(), T::max);
                let rel_drop = (cost - cost_try) / cost.max(T::of(1e-300));
                x = x_try;
                r.copy_from_slice(&r_try);
                cost = cost_try;
                history.push(cost);
                lambda = (lambda * T::of(0.33)).max(T::of(1e-12));
                accepted = true;
                if rel_drop < opts.cost_tol || rel_step < opts.step_tol || cost == T::zero() {
                    converged = true;
                }
                break;
            }
            lambda *= T::of(4.0);
        }
        if !accepted {
            // damping exhausted without an acceptable step: local optimum
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    // covariance at the optimum
    forward_jacobian(&mut residuals, &x, &r, lower, upper, &mut jac)?;
    let mut a = vec![vec![T::zero(); p]; p];
    for i in 0..n_residuals {
        for j in 0..p {
            for k in j..p {
                a[j][k] += jac[i][j] * jac[i][k];
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            a[j][k] = a[k][j];
        }
    }
    let std_errors = invert(&a).and_then(|c| {
        if n_residuals > p {
            let s2 = cost / T::of((n_residuals - p) as f64);
            Some((0..p).map(|j| (c[j][j] * s2).max(T::zero()).sqrt()).collect::<Vec<T>>())
        } else {
            None
        }
    });

    Ok(LmOutcome {
        residual_norm: cost.sqrt(),
        params: x,
        std_errors,
        cost,
        n_iterations: iterations,
        converged,
        cost_history: history,
    })
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn forward_jacobian<T, F>(
    residuals: &mut F,
    x: &[T],
    r0: &[T],
    lower: &[T],
    upper: &[T],
    jac: &mut [Vec<T>],
) -> Result<()>
where
    T: Real,
    F: FnMut(&[T], &mut [T]) -> Result<()>,
{
    let p = x.len();
    let n = r0.len();
    let sqrt_eps = T::epsilon().sqrt();
    let mut xh = x.to_vec();
    let mut rh = vec![T::zero(); n];
    for j in 0..p {
        let mut h = sqrt_eps * (x[j].abs() + sqrt_eps);
        // step backwards if the forward step would leave the feasible box
        if x[j] + h > upper[j] && x[j] - h >= lower[j] {
            h = -h;
        }
        xh[j] = x[j] + h;
        residuals(&xh, &mut rh)?;
        let inv_h = h.recip();
        for i in 0..n {
            jac[i][j] = (rh[i] - r0[i]) * inv_h;
        }
        xh[j] = x[j];
    }
    Ok(())
}

/// In-place partial-pivot Gaussian elimination; None if singular.
fn solve<T: Real>(a: &mut [Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    let mut x = b.to_vec();
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|p, q| p.1.partial_cmp(&q.1).unwrap())?;
        if pivot < T::of(1e-300) {
            return None;
        }
        a.swap(col, pivot_row);
        x.swap(col, pivot_row);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let xv = x[col];
            x[r] -= f * xv;
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for c in col + 1..n {
            acc -= a[col][c] * x[c];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Full inverse via column-wise solves; None when near-singular.
fn invert<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(T::zero(), T::max);
    if scale <= T::zero() {
        return None;
    }
    // condition screen on the pivots relative to the largest diagonal
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let mut m: Vec<Vec<T>> = a.to_vec();
        let mut e = vec![T::zero(); n];
        e[k] = T::one();
        let col = solve_checked(&mut m, &e, scale * T::of(1e-13))?;
        cols.push(col);
    }
    let mut inv = vec![vec![T::zero(); n]; n];
    for (k, col) in cols.iter().enumerate() {
        for i in 0..n {
            inv[i][k] = col[i];
        }
    }
    Some(inv)
}

fn solve_checked<T: Real>(a: &mut [Vec<T>], b: &[T], min_pivot: T) -> Option<Vec<T>> {
    let n = b.len();
    let mut x = b.to_vec();
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|p, q| p.1.partial_cmp(&q.1).unwrap())?;
        if pivot < min_pivot {
            return None;
        }
        a.swap(col, pivot_row);
        x.swap(col, pivot_row);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let xv = x[col];
            x[r] -= f * xv;
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for c in col + 1..n {
            acc -= a[col][c] * x[c];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}
