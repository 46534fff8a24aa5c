//! Quadrature primitives shared by the kernel tables, the Duhamel integral and
//! the space-time norms.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..(order + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(order, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if order == 0 { 1.0 } else { p1 };
    let d = order as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Composite Gauss-Legendre rule over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(mid + 0.5 * h * xi);
        }
        total += 0.5 * h * s;
    }
    total
}

/// `phi1(z) = (1 - e^{-z}) / z`, stable near zero.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        // sum_k (-z)^k / (k+1)!
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..12 {
            term *= -z / (k as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        -(-z).exp_m1() / z
    }
}

/// `psi(z) = int_0^1 x e^{-z x} dx = (1 - e^{-z}(1 + z)) / z^2`, stable near zero.
pub fn psi(z: f64) -> f64 {
    if z.abs() < 1e-1 {
        // sum_k (-z)^k / (k! (k + 2))
        let mut fact = 1.0;
        let mut pow = 1.0;
        let mut sum = 0.5;
        for k in 1..16 {
            fact *= k as f64;
            pow *= -z;
            sum += pow / (fact * (k as f64 + 2.0));
        }
        sum
    } else {
        (1.0 - (-z).exp() * (1.0 + z)) / (z * z)
    }
}

/// Weights `W_i` with `int_0^upper f(t) t^{-w} dt = sum_i W_i f(t_i)` for the
/// piecewise-linear interpolant of `f` on `nodes` (`nodes[0] = 0`, increasing).
/// Cells beyond `upper` are truncated; `w < 1`.
pub fn power_weighted_hat_weights(nodes: &[f64], upper: f64, w: f64) -> Vec<f64> {
    let mut out = vec![0.0; nodes.len()];
    let m0 = |a: f64, b: f64| pow_moment(a, b, -w);
    let m1 = |a: f64, b: f64| pow_moment(a, b, 1.0 - w);
    for i in 0..nodes.len().saturating_sub(1) {
        let a = nodes[i];
        let b = nodes[i + 1];
        if a >= upper {
            break;
        }
        let c = b.min(upper);
        let h = b - a;
        let i0 = m0(a, c);
        let i1 = m1(a, c);
        // (b - t)/h and (t - a)/h against t^{-w}
        out[i] += (b * i0 - i1) / h;
        out[i + 1] += (i1 - a * i0) / h;
    }
    out
}

/// `int_a^b t^e dt` for `e > -1`, `0 <= a <= b`.
fn pow_moment(a: f64, b: f64, e: f64) -> f64 {
    let e1 = e + 1.0;
    (b.powf(e1) - a.powf(e1)) / e1
}

/// `int_0^t (t - s)^{-gamma} f(s) ds` for the piecewise-linear interpolant of
/// `f` on `nodes[..=upto]`, with `t = nodes[upto]`.
pub fn singular_convolution(nodes: &[f64], values: &[f64], upto: usize, gamma: f64) -> f64 {
    if upto == 0 {
        return 0.0;
    }
    let t = nodes[upto];
    // reflect: sigma = t - s, nodes sigma_j = t - s_{upto - j}
    let reflected: Vec<f64> = (0..=upto).rev().map(|j| t - nodes[j]).collect();
    let w = power_weighted_hat_weights(&reflected, t, gamma);
    w.iter()
        .enumerate()
        .map(|(j, wj)| wj * values[upto - j])
        .sum()
}
