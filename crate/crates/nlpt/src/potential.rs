//! Space-dependent double-well potentials with Hölder moving wells:
//! structural validation, Q/P inverse maps, transition maps, slab
//! restrictions and manufactured optimal-pair potentials.

use std::sync::Arc;

use crate::error::Error;
use crate::kernel::Kern1d;
use crate::profile::conjugate::{h_derivative_profile, invert_profile};
use crate::profile::MonotoneProfile;
use crate::Result;

pub type SpaceFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type WellFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// The two moving wells `z_1(x) < z_2(x)` with their Hölder metadata.
#[derive(Clone)]
pub struct WellPair {
    pub z1: SpaceFn,
    pub z2: SpaceFn,
    /// Hölder exponent of the wells, in (1/2, 1].
    pub alpha: f64,
    /// Declared bound on the Hölder seminorms of both wells.
    pub holder_const: f64,
    /// Separation parameter: `min |z1 - z2| > 8 delta` on the working box.
    pub delta: f64,
}

impl WellPair {
    pub fn constant(a: f64, b: f64) -> Self {
        assert!(a < b);
        Self {
            z1: Arc::new(move |_| a),
            z2: Arc::new(move |_| b),
            alpha: 1.0,
            holder_const: 0.0,
            delta: ((b - a) / 8.0 * 0.99).min(1.0),
        }
    }

    /// Affine wells `z_i(x) = c_i + g_i . x` (exact exponent 1).
    pub fn affine(c1: f64, g1: Vec<f64>, c2: f64, g2: Vec<f64>, delta: f64) -> Self {
        let n1 = g1.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n2 = g2.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self {
            z1: Arc::new(move |x| c1 + dot(&g1, x)),
            z2: Arc::new(move |x| c2 + dot(&g2, x)),
            alpha: 1.0,
            holder_const: n1.max(n2),
            delta,
        }
    }

    /// Wells `z_i(x) = base_i ± coef |x - x0|^alpha`, with exact exponent
    /// `alpha`; the modulus is attained on pairs straddling `x0`.
    pub fn holder_point(base1: f64, base2: f64, coef: f64, alpha: f64, x0: Vec<f64>, delta: f64) -> Self {
        assert!(alpha > 0.5 && alpha <= 1.0);
        let x0b = x0.clone();
        Self {
            z1: Arc::new(move |x| base1 - coef * dist(x, &x0).powf(alpha)),
            z2: Arc::new(move |x| base2 + coef * dist(x, &x0b).powf(alpha)),
            alpha,
            holder_const: coef,
            delta,
        }
    }

    pub fn separation(&self, x: &[f64]) -> f64 {
        (self.z2)(x) - (self.z1)(x)
    }
}

fn dot(g: &[f64], x: &[f64]) -> f64 {
    g.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// A double-well potential `W(x, t)` with its partial derivatives and the
/// structural data of H1-H5.
#[derive(Clone)]
pub struct PotentialSpec {
    pub wells: WellPair,
    pub w: WellFn,
    pub dw: WellFn,
    pub d2w: WellFn,
    /// Envelope `f` of H3: increasing, `f(0) = 0`, quadratic near zero.
    pub envelope: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Beyond `[-growth_m, growth_m]` the potential dominates its boundary
    /// values (consequence of H5).
    pub growth_m: f64,
}

impl PotentialSpec {
    /// Freeze the space variable: the autonomous view used by 1D solvers.
    pub fn at(&self, x: &[f64]) -> Potential1d {
        let xv = x.to_vec();
        let w = self.w.clone();
        let dw = self.dw.clone();
        let xv2 = xv.clone();
        Potential1d {
            a: (self.wells.z1)(x),
            b: (self.wells.z2)(x),
            w: Arc::new(move |t| w(&xv, t)),
            dw: Arc::new(move |t| dw(&xv2, t)),
        }
    }
}

/// Autonomous double-well potential on the line.
#[derive(Clone)]
pub struct Potential1d {
    pub a: f64,
    pub b: f64,
    pub w: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub dw: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Potential1d {
    pub fn w(&self, t: f64) -> f64 {
        (self.w)(t)
    }

    pub fn dw(&self, t: f64) -> f64 {
        (self.dw)(t)
    }

    /// `Q(t) = dW/dt + t`.
    pub fn q(&self, t: f64) -> f64 {
        self.dw(t) + t
    }

    /// Continuous left inverse `P` of `Q`, clamped to `[a, b]` outside the
    /// range of `Q`. Errors with a witness interval when `Q` decreases.
    pub fn p_inverse(&self, s: f64) -> Result<f64> {
        self.check_q_monotone()?;
        let (qa, qb) = (self.q(self.a), self.q(self.b));
        if s <= qa {
            return Ok(self.a);
        }
        if s >= qb {
            return Ok(self.b);
        }
        let (mut lo, mut hi) = (self.a, self.b);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.q(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * (1.0 + hi.abs()) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn check_q_monotone(&self) -> Result<()> {
        let n = running_q_checks();
        let mut prev = self.q(self.a);
        let mut prev_t = self.a;
        for i in 1..=n {
            let t = self.a + (self.b - self.a) * i as f64 / n as f64;
            let q = self.q(t);
            if q < prev - 1e-10 {
                return Err(Error::QNonInvertible { from: prev_t, to: t });
            }
            prev = q;
            prev_t = t;
        }
        Ok(())
    }
}

fn running_q_checks() -> usize {
    257
}

/// Canonical quartic family `W(x,t) = c(x) (t - z1)^2 (t - z2)^2`.
///
/// Satisfies H1-H5 on every compact box with a computable `delta`; the
/// envelope is `f(s) = s^2 (1 + s)^2`.
pub fn make_quartic_moving(wells: WellPair, scale: SpaceFn) -> PotentialSpec {
    let (z1, z2) = (wells.z1.clone(), wells.z2.clone());
    let (z1b, z2b, z1c, z2c) = (z1.clone(), z2.clone(), z1.clone(), z2.clone());
    let (s1, s2, s3) = (scale.clone(), scale.clone(), scale);
    let w: WellFn = Arc::new(move |x, t| {
        let (a, b) = (z1(x), z2(x));
        s1(x) * (t - a).powi(2) * (t - b).powi(2)
    });
    let dw: WellFn = Arc::new(move |x, t| {
        let (a, b) = (z1b(x), z2b(x));
        2.0 * s2(x) * (t - a) * (t - b) * (2.0 * t - a - b)
    });
    let d2w: WellFn = Arc::new(move |x, t| {
        let (a, b) = (z1c(x), z2c(x));
        2.0 * s3(x) * ((2.0 * t - a - b).powi(2) + 2.0 * (t - a) * (t - b))
    });
    PotentialSpec {
        wells,
        w,
        dw,
        d2w,
        envelope: Arc::new(|s| s * s * (1.0 + s) * (1.0 + s)),
        growth_m: 0.0, // computed by validate_assumptions; 0 means unset
    }
}

/// Axis-aligned box in R^m.
#[derive(Debug, Clone)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Self { lo: vec![lo], hi: vec![hi] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn lattice(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let mut pts = vec![vec![]];
        for ax in 0..self.dim() {
            let mut next = Vec::new();
            for base in &pts {
                for i in 0..per_axis {
                    let f = if per_axis == 1 { 0.5 } else { i as f64 / (per_axis - 1) as f64 };
                    let mut p = base.clone();
                    p.push(self.lo[ax] + f * (self.hi[ax] - self.lo[ax]));
                    next.push(p);
                }
            }
            pts = next;
        }
        pts
    }
}

/// Outcome of checking H1-H5 on a sampled box.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
    pub h4: bool,
    pub h5: bool,
    /// Largest feasible `delta` found for H2-H5 jointly.
    pub delta: f64,
    /// Growth bound `M` with `W(x, ±M) <= W(x, t)` for `|t| >= M`.
    pub growth_m: f64,
    /// Failure witnesses `(assumption, x, t)`.
    pub witnesses: Vec<(String, Vec<f64>, f64)>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.h1 && self.h2 && self.h3 && self.h4 && self.h5
    }
}

/// Sample H1-H5 on a box and report the largest feasible `delta`.
pub fn validate_assumptions(spec: &PotentialSpec, domain: &BoxDomain, samples: usize) -> AssumptionReport {
    let xs = domain.lattice(samples.max(3));
    let mut witnesses = Vec::new();
    let mut h1 = true;
    let mut min_sep = f64::INFINITY;
    let mut min_ratio = f64::INFINITY; // W / f(dist)
    let mut max_ratio = 0.0f64;
    let mut m_bound = 0.0f64;

    for x in &xs {
        let (a, b) = ((spec.wells.z1)(x), (spec.wells.z2)(x));
        if !(a < b) {
            h1 = false;
            min_sep = 0.0;
            witnesses.push(("H2".into(), x.clone(), 0.0));
            continue;
        }
        min_sep = min_sep.min(b - a);
        m_bound = m_bound.max(a.abs()).max(b.abs());
        // zeros exactly at the wells
        for (label, t) in [("z1", a), ("z2", b)] {
            let w = (spec.w)(x, t);
            if w.abs() > 1e-9 {
                h1 = false;
                witnesses.push((format!("H1({label})"), x.clone(), t));
            }
        }
        let span = 3.0 * (b - a);
        let nt = 80;
        for i in 0..=nt {
            let t = a - span + (2.0 * span + (b - a)) * i as f64 / nt as f64;
            let d = (t - a).abs().min((t - b).abs());
            let w = (spec.w)(x, t);
            if d > 1e-3 * (b - a) {
                if w <= 0.0 {
                    h1 = false;
                    witnesses.push(("H1".into(), x.clone(), t));
                } else {
                    let f = (spec.envelope)(d);
                    min_ratio = min_ratio.min(w / f);
                    max_ratio = max_ratio.max(w / f);
                }
            }
        }
    }

    let h2_delta = min_sep / 8.0 * 0.999;
    let h3_delta = min_ratio.min(1.0 / max_ratio);
    let mut delta = h2_delta.min(h3_delta).min(1.0);
    let h2 = min_sep > 0.0;
    let h3 = min_ratio > 0.0 && max_ratio.is_finite();

    // shrink delta until the curvature condition H4 holds in the
    // delta-neighborhoods of both wells
    let mut h4 = false;
    for _ in 0..60 {
        if delta <= 0.0 {
            break;
        }
        let mut min_curv = f64::INFINITY;
        for x in &xs {
            let (a, b) = ((spec.wells.z1)(x), (spec.wells.z2)(x));
            for well in [a, b] {
                for i in 0..=16 {
                    let t = well - delta + 2.0 * delta * i as f64 / 16.0;
                    min_curv = min_curv.min((spec.d2w)(x, t));
                }
            }
        }
        if min_curv >= delta {
            h4 = true;
            break;
        }
        delta *= 0.7;
    }
    if !h4 {
        witnesses.push(("H4".into(), xs.first().cloned().unwrap_or_default(), 0.0));
    }

    // H5: linear growth beyond 1/delta
    let mut h5 = delta > 0.0;
    if h5 {
        'outer: for x in &xs {
            let t_lo = 1.0 / delta;
            for i in 1..=24 {
                let t = t_lo * (1.0 + 0.5 * i as f64);
                for s in [t, -t] {
                    if (spec.w)(x, s) < delta * s.abs() {
                        h5 = false;
                        witnesses.push(("H5".into(), x.clone(), s));
                        break 'outer;
                    }
                }
            }
        }
    }

    let growth_m = m_bound + 1.0;
    AssumptionReport { h1, h2, h3, h4, h5, delta: delta.max(0.0), growth_m, witnesses }
}

/// Affine transition map between the well intervals at `x` and `x + rho x'`
/// (endpoints to endpoints, identity at `x' = 0`).
pub fn transition_map(wells: &WellPair, rho: f64, x: &[f64], xp: &[f64], t: f64) -> f64 {
    let (a, b) = ((wells.z1)(x), (wells.z2)(x));
    let shifted: Vec<f64> = x.iter().zip(xp).map(|(xi, xpi)| xi + rho * xpi).collect();
    let (a2, b2) = ((wells.z1)(&shifted), (wells.z2)(&shifted));
    let lam = (t - a) / (b - a);
    lam * b2 + (1.0 - lam) * a2
}

/// Restriction of the potential to a slab of width `rho` around the
/// hyperplane through `x` orthogonal to `xi`.
pub struct SlabPotential {
    spec: PotentialSpec,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub rho: f64,
    e_perp: Vec<f64>,
}

impl SlabPotential {
    /// Pointwise value `inf_{s in [-rho/2, rho/2]} W(x + y + s xi, t)`,
    /// with `y` the signed coordinate along the in-plane direction.
    pub fn value(&self, y: f64, t: f64) -> f64 {
        let spec = &self.spec;
        let f = |s: f64| {
            let p = self.point(y, s);
            (spec.w)(&p, t)
        };
        golden_min(&f, -self.rho / 2.0, self.rho / 2.0).1
    }

    /// Effective wells `a_x(y, rho) = max z1` and `b_x(y, rho) = min z2`
    /// over the slab segment.
    pub fn effective_wells(&self, y: f64) -> (f64, f64) {
        let z1 = |s: f64| -(self.spec.wells.z1)(&self.point(y, s));
        let z2 = |s: f64| (self.spec.wells.z2)(&self.point(y, s));
        let a = -golden_min(&z1, -self.rho / 2.0, self.rho / 2.0).1;
        let b = golden_min(&z2, -self.rho / 2.0, self.rho / 2.0).1;
        (a, b)
    }

    fn point(&self, y: f64, s: f64) -> Vec<f64> {
        self.x
            .iter()
            .enumerate()
            .map(|(i, xi)| xi + y * self.e_perp.get(i).copied().unwrap_or(0.0) + s * self.xi[i])
            .collect()
    }
}

/// Build the slab restriction, failing when the effective well sets overlap.
pub fn slab_potential(spec: &PotentialSpec, x: &[f64], xi: &[f64], rho: f64) -> Result<SlabPotential> {
    if rho <= 0.0 {
        return Err(Error::Domain("slab width must be positive".into()));
    }
    let e_perp = if x.len() == 2 { vec![-xi[1], xi[0]] } else { vec![0.0] };
    let slab = SlabPotential { spec: spec.clone(), x: x.to_vec(), xi: xi.to_vec(), rho, e_perp };
    for i in 0..=8 {
        let y = -0.5 + i as f64 / 8.0;
        let (a, b) = slab.effective_wells(y);
        if a >= b {
            return Err(Error::SlabTooWide { rho });
        }
    }
    Ok(slab)
}

/// Golden-section minimizer on `[lo, hi]`, ties resolved to smaller `s`.
fn golden_min(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-10 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

/// Build the unique potential for which `gamma0` is the optimal profile:
/// `W := H(gamma0^{-1})` on `[a, b]`, extended quadratically beyond the
/// wells. The input must be strictly increasing.
pub fn manufacture_potential(gamma0: &MonotoneProfile, kern: &Kern1d, table_len: usize) -> Result<PotentialSpec> {
    let vals = gamma0.values();
    for i in 1..vals.len() {
        if vals[i] <= vals[i - 1] {
            return Err(Error::FlatProfile { at: gamma0.node(i) });
        }
    }
    let (a, b) = (gamma0.tail_a(), gamma0.tail_b());
    let inv = invert_profile(gamma0);
    let n = table_len.max(64);
    // derivative of H on a uniform value table, then cumulative Simpson
    let eps_in = 1e-7 * (b - a);
    let grid: Vec<f64> = (0..=n).map(|j| a + (b - a) * j as f64 / n as f64).collect();
    let probes: Vec<f64> = grid
        .iter()
        .map(|&s| s.clamp(a + eps_in, b - eps_in))
        .collect();
    let dh = h_derivative_profile(&inv, kern, &probes);
    let mut w = vec![0.0; n + 1];
    for j in 1..=n {
        // Simpson on pairs of panels, trapezoid fallback on the last odd one
        if j % 2 == 0 {
            let h = grid[j] - grid[j - 2];
            w[j] = w[j - 2] + h / 6.0 * (dh[j - 2] + 4.0 * dh[j - 1] + dh[j]);
        } else {
            let h = grid[j] - grid[j - 1];
            w[j] = w[j - 1] + 0.5 * h * (dh[j - 1] + dh[j]);
        }
    }
    // H(b) = 0: spread the closure defect evenly so both wells are exact zeros
    let defect = w[n];
    for (j, wj) in w.iter_mut().enumerate() {
        *wj -= defect * j as f64 / n as f64;
        if *wj < 0.0 {
            *wj = 0.0;
        }
    }
    w[0] = 0.0;
    w[n] = 0.0;

    let w_tab = CubicTable::new(grid.clone(), w);
    let dw_tab = CubicTable::new(grid, dh);
    let (wa, wb) = (a, b);
    let w_fn: WellFn = Arc::new(move |_x, t| {
        if t < wa {
            (t - wa) * (t - wa) + w_tab.eval(wa)
        } else if t > wb {
            (t - wb) * (t - wb) + w_tab.eval(wb)
        } else {
            w_tab.eval(t).max(0.0)
        }
    });
    let (da, db) = (a, b);
    let dw_fn: WellFn = Arc::new(move |_x, t| {
        if t < da {
            2.0 * (t - da)
        } else if t > db {
            2.0 * (t - db)
        } else {
            dw_tab.eval(t)
        }
    });
    let dw_for_d2 = dw_fn.clone();
    let d2w: WellFn = Arc::new(move |x, t| {
        let h = 1e-5;
        (dw_for_d2(x, t + h) - dw_for_d2(x, t - h)) / (2.0 * h)
    });
    Ok(PotentialSpec {
        wells: WellPair::constant(a, b),
        w: w_fn,
        dw: dw_fn,
        d2w,
        envelope: Arc::new(|s| s * s),
        growth_m: a.abs().max(b.abs()) + 1.0,
    })
}

/// Monotonicity-limited cubic Hermite interpolation (Fritsch-Carlson
/// slopes) on a sorted table.
pub struct CubicTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl CubicTable {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        assert!(n >= 2 && n == ys.len());
        let mut d = vec![0.0; n - 1];
        for i in 0..n - 1 {
            d[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        }
        let mut slopes = vec![0.0; n];
        slopes[0] = d[0];
        slopes[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            if d[i - 1] * d[i] <= 0.0 {
                slopes[i] = 0.0;
            } else {
                // harmonic mean limits overshoot
                let w1 = 2.0 * (xs[i + 1] - xs[i]) + (xs[i] - xs[i - 1]);
                let w2 = (xs[i + 1] - xs[i]) + 2.0 * (xs[i] - xs[i - 1]);
                slopes[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        Self { xs, ys, slopes }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.slopes[0] * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.slopes[n - 1] * (x - self.xs[n - 1]);
        }
        let mut i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        i = i.min(n - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        y0 * (2.0 * s3 - 3.0 * s2 + 1.0) + m0 * (s3 - 2.0 * s2 + s) + y1 * (-2.0 * s3 + 3.0 * s2) + m1 * (s3 - s2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic_pm1() -> PotentialSpec {
        make_quartic_moving(WellPair::constant(-1.0, 1.0), Arc::new(|_| 0.25))
    }

    #[test]
    fn quartic_values() {
        let p = quartic_pm1();
        let x = [0.0];
        // W(0) = 1/4 for wells ∓1, c = 1/4
        assert!(((p.w)(&x, 0.0) - 0.25).abs() < 1e-15);
        assert!(((p.w)(&x, 1.0)).abs() < 1e-15);
        assert!(((p.w)(&x, -1.0)).abs() < 1e-15);
        // curvature 2 at the wells
        assert!(((p.d2w)(&x, 1.0) - 2.0).abs() < 1e-12);
        assert!(((p.d2w)(&x, -1.0) - 2.0).abs() < 1e-12);
        // dW check against finite differences
        for &t in &[-0.7, 0.0, 0.4, 1.3] {
            let h = 1e-6;
            let fd = ((p.w)(&x, t + h) - (p.w)(&x, t - h)) / (2.0 * h);
            assert!(((p.dw)(&x, t) - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn quartic_passes_assumptions() {
        let p = quartic_pm1();
        let rep = validate_assumptions(&p, &BoxDomain::interval(-1.0, 1.0), 5);
        assert!(rep.all_pass(), "report: {rep:?}");
        assert!(rep.delta > 0.0);
    }

    #[test]
    fn merged_wells_fail_h2() {
        // wells collide at the right edge of the box
        let wells = WellPair {
            z1: Arc::new(|x: &[f64]| -1.0 + 2.0 * x[0]),
            z2: Arc::new(|_| 1.0_f64),
            alpha: 1.0,
            holder_const: 2.0,
            delta: 0.1,
        };
        let p = make_quartic_moving(wells, Arc::new(|_| 1.0));
        let rep = validate_assumptions(&p, &BoxDomain::interval(0.0, 1.0), 5);
        assert!(!rep.h2);
        assert!(rep.witnesses.iter().any(|w| w.0.contains("H2")));
    }

    #[test]
    fn flat_zero_region_fails_h1() {
        let wells = WellPair::constant(-1.0, 1.0);
        let p = PotentialSpec {
            wells,
            w: Arc::new(|_, t| if t.abs() <= 1.0 { 0.0 } else { (t.abs() - 1.0).powi(2) }),
            dw: Arc::new(|_, _| 0.0),
            d2w: Arc::new(|_, _| 0.0),
            envelope: Arc::new(|s| s * s),
            growth_m: 2.0,
        };
        let rep = validate_assumptions(&p, &BoxDomain::interval(-1.0, 1.0), 3);
        assert!(!rep.h1);
    }

    #[test]
    fn q_inverse_roundtrip() {
        // W = (1 - t^2)^2 / 4 has dW = t^3 - t, so Q = t^3
        let p = quartic_pm1().at(&[0.0]);
        for &t in &[-0.9, -0.3, 0.0, 0.5, 0.99] {
            assert!((p.q(t) - t.powi(3)).abs() < 1e-12);
        }
        let t = p.p_inverse(p.q(0.5)).unwrap();
        assert!((t - 0.5).abs() < 1e-10);
        // clamp beyond the range of Q
        assert_eq!(p.p_inverse(10.0).unwrap(), 1.0);
        assert_eq!(p.p_inverse(-10.0).unwrap(), -1.0);
    }

    #[test]
    fn q_noninvertible_detected() {
        let wells = WellPair::constant(-1.0, 1.0);
        let p = PotentialSpec {
            wells,
            // dW = -4t makes Q = t - 4t strictly decreasing
            w: Arc::new(|_, t| 1.0 - 2.0 * t * t),
            dw: Arc::new(|_, t| -4.0 * t),
            d2w: Arc::new(|_, _| -4.0),
            envelope: Arc::new(|s| s * s),
            growth_m: 2.0,
        };
        assert!(matches!(p.at(&[0.0]).p_inverse(0.0), Err(Error::QNonInvertible { .. })));
    }

    #[test]
    fn transition_map_properties() {
        let wells = WellPair::affine(-1.0, vec![0.3], 1.0, vec![-0.2], 0.05);
        let x = [0.2];
        let xp = [1.0];
        let rho = 0.1;
        // identity at x' = 0
        for &t in &[-0.8, 0.1, 0.9] {
            assert!((transition_map(&wells, rho, &x, &[0.0], t) - t).abs() < 1e-14);
        }
        // endpoints to endpoints
        let a = (wells.z1)(&x);
        let b = (wells.z2)(&x);
        let shifted = [x[0] + rho * xp[0]];
        assert!((transition_map(&wells, rho, &x, &xp, a) - (wells.z1)(&shifted)).abs() < 1e-14);
        assert!((transition_map(&wells, rho, &x, &xp, b) - (wells.z2)(&shifted)).abs() < 1e-14);
        // affine slope equals the ratio of separations
        let slope = (transition_map(&wells, rho, &x, &xp, 0.5) - transition_map(&wells, rho, &x, &xp, 0.0)) / 0.5;
        let expect = wells.separation(&shifted) / wells.separation(&x);
        assert!((slope - expect).abs() < 1e-12);
        // composition x -> x' -> x is the identity
        let t0 = 0.37;
        let fwd = transition_map(&wells, rho, &x, &xp, t0);
        let back = transition_map(&wells, 1.0, &shifted, &[x[0] - shifted[0]], fwd);
        assert!((back - t0).abs() < 1e-12);
    }

    #[test]
    fn slab_monotone_in_rho() {
        let wells = WellPair::affine(-1.0, vec![0.2], 1.0, vec![0.2], 0.05);
        let p = make_quartic_moving(wells, Arc::new(|_| 1.0));
        let x = [0.0];
        let xi = [1.0];
        let narrow = slab_potential(&p, &x, &xi, 0.05).unwrap();
        let wide = slab_potential(&p, &x, &xi, 0.5).unwrap();
        for &t in &[-0.5, 0.0, 0.4] {
            assert!(wide.value(0.0, t) <= narrow.value(0.0, t) + 1e-9);
        }
        // rho -> 0 recovers the pointwise potential
        let tiny = slab_potential(&p, &x, &xi, 1e-9).unwrap();
        for &t in &[-0.5, 0.2] {
            assert!((tiny.value(0.0, t) - (p.w)(&x, t)).abs() < 1e-6);
        }
        // constant wells give a = z1, b = z2 at any admissible width
        let pc = make_quartic_moving(WellPair::constant(-1.0, 1.0), Arc::new(|_| 1.0));
        let slab = slab_potential(&pc, &x, &xi, 0.3).unwrap();
        let (a, b) = slab.effective_wells(0.1);
        assert!((a + 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_table_reproduces_smooth_function() {
        let xs: Vec<f64> = (0..=400).map(|i| i as f64 / 400.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| (x * 2.0).sin()).collect();
        let tab = CubicTable::new(xs, ys);
        // third-order away from extrema; the limited slopes cost accuracy
        // near the maximum at pi/4
        for &x in &[0.123, 0.35, 0.6] {
            assert!((tab.eval(x) - (x * 2.0).sin()).abs() < 2e-7, "x = {x}");
        }
        assert!((tab.eval(0.785) - (0.785f64 * 2.0).sin()).abs() < 1e-4);
    }
}
