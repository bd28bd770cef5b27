//! Shared numerics: error function, Gauss-Legendre rules, adaptive
//! quadrature and a small deterministic generator for sampling.

use std::sync::OnceLock;

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Error function, accurate to ~1e-15 relative.
///
/// Small arguments use the Maclaurin series, large arguments the continued
/// fraction for `erfc` evaluated by modified Lentz.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x <= 2.5 {
        erf_series(x)
    } else {
        1.0 - erfc_cf(x)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x <= 2.5 {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = 2/sqrt(pi) * sum_n (-1)^n x^(2n+1) / (n! (2n+1))
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 1u32;
    loop {
        term *= -x2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs().max(1e-300) || n > 200 {
            break;
        }
        n += 1;
    }
    sum * (2.0 / std::f64::consts::PI.sqrt())
}

fn erfc_cf(x: f64) -> f64 {
    // erfc(x) = exp(-x^2)/(x sqrt(pi)) / G with
    // G = 1 + q1/(1 + q2/(1 + ...)), q_n = n / (2 x^2), by modified Lentz.
    let tiny = 1e-300;
    let two_x2 = 2.0 * x * x;
    let mut g = 1.0f64;
    let mut c = g;
    let mut d = 0.0f64;
    for n in 1..400 {
        let q = n as f64 / two_x2;
        d = 1.0 + q * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + q / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        g *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x * x).exp() / (x * std::f64::consts::PI.sqrt()) / g
}

/// Standard normal density.
pub fn normal_pdf(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * SQRT_2PI)
}

/// Standard normal upper tail `P(X > x)` for `X ~ N(0, sigma^2)`.
pub fn normal_tail(x: f64, sigma: f64) -> f64 {
    0.5 * erfc(x / (sigma * std::f64::consts::SQRT_2))
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gauss_cached(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static G8: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static G16: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static G32: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    match n {
        8 => G8.get_or_init(|| gauss_legendre(8)),
        16 => G16.get_or_init(|| gauss_legendre(16)),
        32 => G32.get_or_init(|| gauss_legendre(32)),
        _ => unreachable!("uncached rule size"),
    }
}

/// Fixed-order Gauss quadrature of `f` over `[a, b]`.
pub fn gauss_quad<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> f64 {
    let (xs, ws) = gauss_cached(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in xs.iter().zip(ws) {
        s += w * f(c + h * x);
    }
    s * h
}

/// Adaptive quadrature over `[a, b]`: compares G8 against G16 per panel and
/// bisects until the panel error estimate is below the local tolerance.
pub fn adaptive_quad<F: Fn(f64) -> f64>(a: f64, b: f64, tol: f64, f: &F) -> f64 {
    fn rec<F: Fn(f64) -> f64>(a: f64, b: f64, tol: f64, f: &F, whole16: f64, depth: u32) -> f64 {
        let mid = 0.5 * (a + b);
        let l = gauss_quad(a, mid, 16, f);
        let r = gauss_quad(mid, b, 16, f);
        let err = (l + r - whole16).abs();
        // the machine-noise floor keeps unreachable tolerances from
        // exploding the recursion tree
        let floor = 1e-16 * (l.abs() + r.abs() + 1e-300);
        if err < tol.max(floor) || depth >= 24 || (b - a) < 1e-14 * (1.0 + a.abs() + b.abs()) {
            l + r
        } else {
            rec(a, mid, 0.5 * tol, f, l, depth + 1) + rec(mid, b, 0.5 * tol, f, r, depth + 1)
        }
    }
    let whole = gauss_quad(a, b, 16, f);
    rec(a, b, tol, f, whole, 0)
}

/// Adaptive quadrature over `[a, inf)` for integrands with (at least)
/// exponential decay: integrates over doubling panels until the panel
/// contribution falls below `tol`.
pub fn adaptive_quad_to_inf<F: Fn(f64) -> f64>(a: f64, scale: f64, tol: f64, f: &F) -> f64 {
    let mut total = 0.0;
    let mut lo = a;
    let mut w = scale.max(1e-8);
    for _ in 0..200 {
        let part = adaptive_quad(lo, lo + w, tol * 0.1, f);
        total += part;
        lo += w;
        w *= 2.0;
        if part.abs() < tol && lo > a + 4.0 * scale {
            break;
        }
    }
    total
}

/// SplitMix64: a small deterministic generator for sample lattices.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
