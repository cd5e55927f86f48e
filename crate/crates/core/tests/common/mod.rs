//! Test-side numerics kept independent of the library's quadrature.
#![allow(dead_code)]

/// Composite Simpson rule with `n` (rounded up to even) panels.
pub fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Dawson's integral F(x) = e^{−x²} ∫₀ˣ e^{t²} dt.
pub fn dawson(x: f64) -> f64 {
    simpson(0.0, x, 4000, |t| (t * t - x * x).exp())
}

/// sin(x)/x with the removable point filled in.
pub fn sin_over(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Trapezoid integral of samples on an ascending grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Least-squares slope of y against x.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Local maxima of `y` at points with |x − centre| ≥ `inner`.
pub fn outer_maxima(x: &[f64], y: &[f64], centre: f64, inner: f64) -> Vec<(f64, f64)> {
    (1..y.len() - 1)
        .filter(|&i| (x[i] - centre).abs() >= inner && y[i] >= y[i - 1] && y[i] > y[i + 1] && y[i] > 0.0)
        .map(|i| ((x[i] - centre).abs(), y[i]))
        .collect()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}
