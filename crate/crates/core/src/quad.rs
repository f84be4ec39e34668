//! Quadrature rules: Gauss–Legendre and Gauss–Laguerre nodes and a globally
//! adaptive Gauss–Kronrod (7/15) integrator.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
///
/// Newton iteration on the three-term recurrence; accurate to a few ulps
/// for the orders used here (up to several thousand).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, root i counted from the right end.
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5);
        let mut x = theta.cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1e-300) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        // exact centre node
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-15,
            rel_tol: 1e-13,
            max_intervals: 4000,
        }
    }
}

/// Globally adaptive integration of `f` over the union of the panels
/// delimited by `breaks` (ascending). The panel with the largest error
/// estimate is bisected until the summed estimate meets the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], opts: QuadOptions) -> Result<f64> {
    if breaks.len() < 2 {
        return Ok(0.0);
    }
    let mut panels: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= opts.max_intervals {
            // Accept when the remaining error is dominated by roundoff.
            if err <= 1e-10 * total.abs().max(1e-300) {
                return Ok(total);
            }
            return Err(Error::Quadrature(format!(
                "error estimate {err:e} after {} panels",
                panels.len()
            )));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (a, b, _, _) = panels.swap_remove(idx);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // interval can no longer be split
            return Ok(total);
        }
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        panels.push((a, m, v1, e1));
        panels.push((m, b, v2, e2));
    }
}

/// Moments `ν_k = ∫₀^L σ^k e^{cσ} dσ` for `k = 0, 1, 2`.
///
/// These are the weights of product-integration rules for oscillatory
/// kernels: a power series for `|cL| ≤ 1`, the closed-form recursion
/// otherwise.
pub(crate) fn exp_moments(c: Complex64, len: f64) -> [Complex64; 3] {
    let z = c * len;
    let mut nu = [Complex64::new(0.0, 0.0); 3];
    if z.norm() <= 1.0 {
        // ν_k = L^{k+1} Σ_n zⁿ / (n! (n + k + 1))
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..40 {
            for (k, v) in nu.iter_mut().enumerate() {
                *v += term / (n + k + 1) as f64;
            }
            term *= z / (n + 1) as f64;
            if term.norm() < 1e-18 {
                break;
            }
        }
        for (k, v) in nu.iter_mut().enumerate() {
            *v *= len.powi(k as i32 + 1);
        }
    } else {
        let e = z.exp();
        nu[0] = (e - 1.0) / c;
        nu[1] = (len * e - nu[0]) / c;
        nu[2] = (len * len * e - 2.0 * nu[1]) / c;
    }
    nu
}

/// Gauss–Laguerre nodes and weights for `∫₀^∞ f(x) e^{−x} dx` (Golub–Welsch).
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (2 * i + 1) as f64
        } else if i.abs_diff(j) == 1 {
            i.max(j) as f64
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}
