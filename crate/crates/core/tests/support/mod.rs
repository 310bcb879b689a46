#![allow(dead_code)]

use meshwalk::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
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
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `int_a^b f` with `panels` equal panels of 16-point Gauss-Legendre.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, panels: usize) -> Complex64 {
    let rule = gauss_legendre(16);
    let h = (b - a) / panels as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in &rule {
            sum += w * 0.5 * h * f(mid + 0.5 * h * x);
        }
    }
    sum
}

/// Fourier transform `int phi(x) e^{-iqx} dx` of `A / (x - x0)^h` by
/// quadrature on `[-L, L]` plus the two-term asymptotic tails.
pub fn pole_transform_by_quadrature(a: Complex64, x0: Complex64, h: i32, q: f64) -> Complex64 {
    let l = 4000.0;
    let f = |x: f64| a / (Complex64::new(x, 0.0) - x0).powi(h);
    let df = |x: f64| -(h as f64) * a / (Complex64::new(x, 0.0) - x0).powi(h + 1);
    let body = integrate(|x| f(x) * Complex64::from_polar(1.0, -q * x), -l, l, 40_000);
    let tails = if q == 0.0 {
        // int_L^inf + int_-inf^-L of (x - x0)^-h, exactly.
        let hh = (h - 1) as f64;
        a / hh * (Complex64::new(l, 0.0) - x0).powi(1 - h) - a / hh * (Complex64::new(-l, 0.0) - x0).powi(1 - h)
    } else {
        let iq = Complex64::new(0.0, q);
        let right = Complex64::from_polar(1.0, -q * l) * (f(l) / iq + df(l) / (iq * iq));
        let left = Complex64::from_polar(1.0, q * l) * (f(-l) / iq + df(-l) / (iq * iq));
        right - left
    };
    body + tails
}
