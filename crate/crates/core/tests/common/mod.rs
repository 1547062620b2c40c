//! Independent oracles shared by the integration tests. Nothing here calls
//! into the spectral machinery of the library.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite 20-point Gauss-Legendre on [a, b] with `panels` panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(20);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let mid = lo + 0.5 * width;
        for (xi, wi) in x.iter().zip(&w) {
            total += wi * f(mid + 0.5 * width * xi);
        }
    }
    total * 0.5 * width
}

/// `int_0^pmax g(p) dp` with the substitution `p = t^3`, which smooths
/// algebraic singularities at the origin.
pub fn radial_integral(g: impl Fn(f64) -> f64, pmax: f64) -> f64 {
    let tmax = pmax.cbrt();
    integrate(|t| if t == 0.0 { 0.0 } else { g(t * t * t) * 3.0 * t * t }, 0.0, tmax, 400)
}

/// Minimizes a unimodal function on [a, b].
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Brute-force minimum of `f` over `[lo, hi]`: log-spaced scan, then golden
/// section around the best sample.
pub fn brute_minimum(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let samples = 2000;
    let ratio = (hi / lo).ln() / samples as f64;
    let mut best = 0usize;
    let mut best_val = f64::INFINITY;
    for i in 0..=samples {
        let v = f(lo * (ratio * i as f64).exp());
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    let a = lo * (ratio * best.saturating_sub(1) as f64).exp();
    let b = lo * (ratio * (best + 1).min(samples) as f64).exp();
    golden_section(f, a, b)
}

/// Periodic real-space convolution `h^3 sum_y h(x - y) g(y)` on an `n^3` grid
/// stored x-major, with node `i` at `-L/2 + i h`. The displacement
/// `x_i - x_j` therefore sits at node `i - j + n/2`.
pub fn periodic_convolution(h: &[f64], g: &[f64], n: usize, spacing: f64) -> Vec<f64> {
    let idx = |x: usize, y: usize, z: usize| (x * n + y) * n + z;
    let mut out = vec![0.0; n * n * n];
    let cell = spacing.powi(3);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            let d = idx((x + n + n / 2 - a) % n, (y + n + n / 2 - b) % n, (z + n + n / 2 - c) % n);
                            acc += h[d] * g[idx(a, b, c)];
                        }
                    }
                }
                out[idx(x, y, z)] = acc * cell;
            }
        }
    }
    out
}

/// Continuum transform of `A e^{-a|x|^2}` at `|p|`, unitary convention.
pub fn gaussian_hat(amplitude: f64, width: f64, p: f64) -> f64 {
    amplitude * (2.0 * width).powf(-1.5) * (-p * p / (4.0 * width)).exp()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Prints a one-line verdict and fails the test when `ok` is false.
pub fn verdict(label: &str, ok: bool, detail: &str) {
    println!("[{}] {label}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{label} failed: {detail}");
}
