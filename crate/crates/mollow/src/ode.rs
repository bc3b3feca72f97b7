//! Adaptive embedded Runge–Kutta integration (Cash–Karp 4(5)) for small
//! fixed-size systems.
//!
//! The dynamics here are never stiff for physical parameter ranges (decay
//! rates and Rabi frequencies within a few orders of magnitude of each
//! other), so an explicit adaptive pair with error control is sufficient.

use crate::error::{Error, Result};
use crate::float::Real;
use crate::trace::ensure_strictly_increasing;

/// Integration tolerances. Defaults follow the library-wide choice of
/// absolute 1e-10, relative 1e-8.
#[derive(Debug, Clone, Copy)]
pub struct OdeTol<T: Real> {
    pub abs: T,
    pub rel: T,
}

impl<T: Real> Default for OdeTol<T> {
    fn default() -> Self {
        Self { abs: T::of(1e-10), rel: T::of(1e-8) }
    }
}

const CK_A: [[f64; 5]; 5] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0.0, 0.0],
    [-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0.0],
    [
        1631.0 / 55296.0,
        175.0 / 512.0,
        575.0 / 13824.0,
        44275.0 / 110592.0,
        253.0 / 4096.0,
    ],
];
const CK_B5: [f64; 6] = [37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0];
const CK_B4: [f64; 6] = [
    2825.0 / 27648.0,
    0.0,
    18575.0 / 48384.0,
    13525.0 / 55296.0,
    277.0 / 14336.0,
    1.0 / 4.0,
];

fn axpys<T: Real, const N: usize>(y: &[T; N], ks: &[[T; N]], coeffs: &[f64], h: T) -> [T; N] {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coeffs) {
        if c != 0.0 {
            let ch = h * T::of(c);
            for i in 0..N {
                out[i] += ch * k[i];
            }
        }
    }
    out
}

/// One adaptive Cash–Karp step attempt. Returns (y5, error_norm_vs_tolerance).
fn step<T: Real, const N: usize>(
    f: &impl Fn(T, &[T; N]) -> [T; N],
    t: T,
    y: &[T; N],
    h: T,
    tol: &OdeTol<T>,
) -> ([T; N], T) {
    let mut ks: Vec<[T; N]> = Vec::with_capacity(6);
    ks.push(f(t, y));
    for s in 0..5 {
        let ys = axpys(y, &ks, &CK_A[s][..=s], h);
        let cs: f64 = CK_A[s][..=s].iter().sum();
        ks.push(f(t + h * T::of(cs), &ys));
    }
    let y5 = axpys(y, &ks, &CK_B5, h);
    let y4 = axpys(y, &ks, &CK_B4, h);
    let mut err = T::zero();
    for i in 0..N {
        let scale = tol.abs + tol.rel * y[i].abs().max(y5[i].abs());
        let e = (y5[i] - y4[i]).abs() / scale;
        err = err.max(e);
    }
    (y5, err)
}

/// Integrate `dy/dt = f(t, y)` from `t_grid[0]`, returning the state at each
/// grid point (including the start). The grid must be strictly increasing.
pub fn integrate_to_grid<T: Real, const N: usize>(
    f: impl Fn(T, &[T; N]) -> [T; N],
    y0: [T; N],
    t_grid: &[T],
    tol: OdeTol<T>,
) -> Result<Vec<[T; N]>> {
    if t_grid.is_empty() {
        return Err(Error::BadGrid("empty time grid".into()));
    }
    ensure_strictly_increasing(t_grid)?;

    let mut out = Vec::with_capacity(t_grid.len());
    out.push(y0);
    let mut y = y0;
    let mut t = t_grid[0];
    let mut h = (t_grid[t_grid.len() - 1] - t_grid[0]) * T::of(1e-3);

    let safety = T::of(0.9);
    let min_shrink = T::of(0.2);
    let max_grow = T::of(5.0);

    for &target in &t_grid[1..] {
        while t < target {
            let mut h_try = h.min(target - t);
            loop {
                let (y_new, err) = step(&f, t, &y, h_try, &tol);
                if err <= T::one() || h_try <= (target - t) * T::of(1e-14) {
                    t += h_try;
                    y = y_new;
                    // grow conservatively for the next step
                    let factor = if err > T::zero() {
                        (safety * err.powf(T::of(-0.2))).min(max_grow)
                    } else {
                        max_grow
                    };
                    h = (h_try * factor).max(h_try * min_shrink);
                    break;
                }
                let factor = (safety * err.powf(T::of(-0.25))).max(min_shrink);
                h_try *= factor;
            }
        }
        out.push(y);
    }
    Ok(out)
}
