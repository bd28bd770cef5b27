//! The conjugate side of the 1D problem: generalized inverses, the convex
//! functional `F°`, the operator `H` and the optimality certificate.

use crate::error::Error;
use crate::kernel::Kern1d;
use crate::num;
use crate::potential::Potential1d;
use crate::profile::MonotoneProfile;
use crate::Result;

/// One linear piece of a generalized inverse: values `(v_lo, v_hi)` are
/// taken on times `[t_lo, t_hi]`; `t_lo == t_hi` encodes a jump of the
/// profile (zero density).
#[derive(Debug, Clone, Copy)]
pub struct InvCell {
    pub v_lo: f64,
    pub v_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl InvCell {
    /// dt/dv on the cell.
    pub fn density(&self) -> f64 {
        (self.t_hi - self.t_lo) / (self.v_hi - self.v_lo)
    }

    pub fn mass(&self) -> f64 {
        self.t_hi - self.t_lo
    }

    fn time_at(&self, v: f64) -> f64 {
        self.t_lo + (v - self.v_lo) / (self.v_hi - self.v_lo) * (self.t_hi - self.t_lo)
    }
}

/// Generalized inverse `v(t) = inf { s : gamma(s) >= t }` of a monotone
/// profile, carrying the measure `dv` as cell densities plus atoms (one
/// atom per interior plateau of the profile).
#[derive(Debug, Clone)]
pub struct InverseProfile {
    pub a: f64,
    pub b: f64,
    pub cells: Vec<InvCell>,
    /// `(value, mass)`; masses are plateau widths of the profile.
    pub atoms: Vec<(f64, f64)>,
}

impl InverseProfile {
    /// Left-continuous evaluation with the `inf` tie-break.
    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t > self.a && t < self.b);
        let mut lo = 0usize;
        let mut hi = self.cells.len();
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if self.cells[mid].v_lo < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = &self.cells[lo];
        c.time_at(t.clamp(c.v_lo, c.v_hi))
    }

    /// Total mass of `dv` over `(a, b)` (the truncated transition width).
    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.mass()).sum::<f64>() + self.atoms.iter().map(|a| a.1).sum::<f64>()
    }

    /// Build from strictly increasing samples `(value, time)`.
    pub fn from_samples(a: f64, b: f64, samples: &[(f64, f64)]) -> Self {
        let mut cells = Vec::new();
        for w in samples.windows(2) {
            let (v0, t0) = w[0];
            let (v1, t1) = w[1];
            if v1 > v0 {
                cells.push(InvCell { v_lo: v0, v_hi: v1, t_lo: t0, t_hi: t1 });
            }
        }
        Self { a, b, cells, atoms: Vec::new() }
    }
}

/// Generalized inverse of a profile; plateaus become atoms, jumps become
/// zero-density cells.
pub fn invert_profile(gamma: &MonotoneProfile) -> InverseProfile {
    let v = gamma.values();
    let n = v.len();
    let (a, b) = (gamma.tail_a(), gamma.tail_b());
    // runs of equal values
    let mut runs: Vec<(f64, f64, f64)> = Vec::new(); // (value, t_first, t_last)
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && v[j + 1] == v[i] {
            j += 1;
        }
        runs.push((v[i], gamma.node(i), gamma.node(j)));
        i = j + 1;
    }
    let mut cells = Vec::new();
    let mut atoms = Vec::new();
    if runs[0].0 > a {
        cells.push(InvCell { v_lo: a, v_hi: runs[0].0, t_lo: runs[0].1, t_hi: runs[0].1 });
    }
    for w in runs.windows(2) {
        let (v0, _, t0_last) = w[0];
        let (v1, t1_first, _) = w[1];
        cells.push(InvCell { v_lo: v0, v_hi: v1, t_lo: t0_last, t_hi: t1_first });
    }
    for &(val, t_first, t_last) in &runs {
        if t_last > t_first && val > a && val < b {
            atoms.push((val, t_last - t_first));
        }
    }
    let last = runs[runs.len() - 1];
    if last.0 < b {
        cells.push(InvCell { v_lo: last.0, v_hi: b, t_lo: last.2, t_hi: last.2 });
    }
    InverseProfile { a, b, cells, atoms }
}

fn require_integrable(kern: &Kern1d) -> Result<f64> {
    kern.total_mass()
        .ok_or_else(|| Error::Domain("the conjugate functional needs an integrable kernel".into()))
}

/// The conjugate functional
/// `F°(v) = int int_{a<t<t'<b} K(v(t)-v(t')) dt dt' + int_(a,b) W dv`,
/// with exact atom sums and per-cell Gauss quadrature.
pub fn conjugate_energy(inv: &InverseProfile, kern: &Kern1d, w: &dyn Fn(f64) -> f64) -> Result<f64> {
    require_integrable(kern)?;
    // K sees the nonnegative spread v(t') - v(t) for t < t', so the
    // integrand decays off the diagonal and the triangle integral is the
    // interaction part of F
    let k = |x: f64| kern.conjugate(x);
    let (g4x, g4w) = gauss(4);
    let (g2x, g2w) = gauss(2);
    let mut interaction = 0.0;
    let nc = inv.cells.len();
    for i in 0..nc {
        let ci = &inv.cells[i];
        // triangle within one cell: reduce to 1D
        let wdt = ci.v_hi - ci.v_lo;
        let dens = ci.density();
        let (gx, gw) = gauss(8);
        let mut tri = 0.0;
        for (x, wq) in gx.iter().zip(gw) {
            let u = 0.5 * wdt * (x + 1.0);
            tri += wq * (wdt - u) * k(dens * u);
        }
        interaction += tri * 0.5 * wdt;
        let (g8x, g8w) = gauss(8);
        for (j, cj) in inv.cells.iter().enumerate().skip(i + 1) {
            // K has curvature J concentrated at small arguments; resolve
            // the diagonal band harder
            let (qx, qw): (&[f64], &[f64]) = if j - i <= 3 {
                (&g8x, &g8w)
            } else if j - i <= 12 {
                (&g4x, &g4w)
            } else {
                (&g2x, &g2w)
            };
            let mut acc = 0.0;
            for (xi, wi) in qx.iter().zip(qw) {
                let tau = ci.v_lo + 0.5 * (ci.v_hi - ci.v_lo) * (xi + 1.0);
                let vt = ci.time_at(tau);
                for (xj, wj) in qx.iter().zip(qw) {
                    let tau2 = cj.v_lo + 0.5 * (cj.v_hi - cj.v_lo) * (xj + 1.0);
                    acc += wi * wj * k(cj.time_at(tau2) - vt);
                }
            }
            interaction += acc * 0.25 * (ci.v_hi - ci.v_lo) * (cj.v_hi - cj.v_lo);
        }
    }
    let mut potential = 0.0;
    for c in &inv.cells {
        let dens = c.density();
        if dens == 0.0 {
            continue;
        }
        let mut cw = 0.0;
        for (x, wq) in g4x.iter().zip(&g4w) {
            let tau = c.v_lo + 0.5 * (c.v_hi - c.v_lo) * (x + 1.0);
            cw += wq * w(tau);
        }
        potential += dens * cw * 0.5 * (c.v_hi - c.v_lo);
    }
    for &(val, mass) in &inv.atoms {
        potential += mass * w(val);
    }
    Ok(interaction + potential)
}

fn gauss(n: usize) -> (Vec<f64>, Vec<f64>) {
    num::gauss_legendre(n)
}

/// The operator
/// `Hv(s) = int_{s<t<b} int_{a<t'<s} T(v(t) - v(t')) dt' dt`
/// by tensor Gauss quadrature over value cells clipped at `s`, with
/// refinement of the corner cells (where the tail mass may blow up for
/// singular kernels).
pub fn apply_h(inv: &InverseProfile, kern: &Kern1d, s: f64) -> f64 {
    let upper = clip_cells(&inv.cells, s, inv.b);
    let lower = clip_cells(&inv.cells, inv.a, s);
    let (gx, gw) = gauss(8);
    let mut total = 0.0;
    for cu in &upper {
        for cl in &lower {
            let corner = cu.v_lo <= s + 1e-14 && cl.v_hi >= s - 1e-14;
            let splits = if corner && kern.is_singular() { 4 } else { 1 };
            total += h_cell_pair(cu, cl, kern, &gx, &gw, splits);
        }
    }
    total
}

fn h_cell_pair(cu: &InvCell, cl: &InvCell, kern: &Kern1d, gx: &[f64], gw: &[f64], splits: usize) -> f64 {
    if splits > 1 {
        // geometric refinement toward the shared corner (cu.v_lo, cl.v_hi)
        let mut acc = 0.0;
        let mut u_hi = cu.v_hi;
        let mut frac = 0.5f64;
        for lvl in 0..splits {
            let u_lo = if lvl + 1 == splits { cu.v_lo } else { cu.v_lo + (u_hi - cu.v_lo) * frac };
            let sub_u = subcell(cu, u_lo, u_hi);
            let mut l_lo = cl.v_lo;
            let mut frac2 = 0.5f64;
            let mut l_hi_cur = cl.v_hi;
            let _ = &mut l_hi_cur;
            for lvl2 in 0..splits {
                let l_hi = if lvl2 + 1 == splits { cl.v_hi } else { cl.v_hi - (cl.v_hi - l_lo) * frac2 };
                let sub_l = subcell(cl, l_lo, l_hi);
                acc += h_cell_pair(&sub_u, &sub_l, kern, gx, gw, 1);
                l_lo = l_hi;
                frac2 *= 0.5;
            }
            u_hi = u_lo;
            frac *= 0.5;
        }
        return acc;
    }
    let mut acc = 0.0;
    for (xi, wi) in gx.iter().zip(gw) {
        let tau = cu.v_lo + 0.5 * (cu.v_hi - cu.v_lo) * (xi + 1.0);
        let vt = cu.time_at(tau);
        for (xj, wj) in gx.iter().zip(gw) {
            let tau2 = cl.v_lo + 0.5 * (cl.v_hi - cl.v_lo) * (xj + 1.0);
            acc += wi * wj * kern.tail_mass(vt - cl.time_at(tau2));
        }
    }
    acc * 0.25 * (cu.v_hi - cu.v_lo) * (cl.v_hi - cl.v_lo)
}

fn subcell(c: &InvCell, v_lo: f64, v_hi: f64) -> InvCell {
    InvCell { v_lo, v_hi, t_lo: c.time_at(v_lo), t_hi: c.time_at(v_hi) }
}

fn clip_cells(cells: &[InvCell], lo: f64, hi: f64) -> Vec<InvCell> {
    let mut out = Vec::new();
    for c in cells {
        let v_lo = c.v_lo.max(lo);
        let v_hi = c.v_hi.min(hi);
        if v_lo < v_hi {
            out.push(subcell(c, v_lo, v_hi));
        }
    }
    out
}

/// Cubic lookup of the tail mass over the argument range a profile can
/// produce; exact tails outside the table.
struct TailLut {
    table: crate::potential::CubicTable,
    lo: f64,
    hi: f64,
}

impl TailLut {
    fn new(kern: &Kern1d, inv: &InverseProfile) -> Option<Self> {
        if kern.is_singular() {
            return None;
        }
        let t_min = inv.cells.iter().map(|c| c.t_lo).fold(f64::INFINITY, f64::min);
        let t_max = inv.cells.iter().map(|c| c.t_hi).fold(f64::NEG_INFINITY, f64::max);
        let span = (t_max - t_min).abs().max(1e-6);
        let (lo, hi) = (-span, span);
        let n = 16_384;
        let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&u| kern.tail_mass(u)).collect();
        Some(Self { table: crate::potential::CubicTable::new(xs, ys), lo, hi })
    }
}

enum Tail<'a> {
    Exact(&'a Kern1d),
    Lut(&'a Kern1d, TailLut),
}

impl Tail<'_> {
    #[inline]
    fn t(&self, u: f64) -> f64 {
        match self {
            Tail::Exact(k) => k.tail_mass(u),
            Tail::Lut(k, lut) => {
                if u < lut.lo || u > lut.hi {
                    k.tail_mass(u)
                } else {
                    lut.table.eval(u)
                }
            }
        }
    }
}

fn h_derivative_impl(inv: &InverseProfile, tail: &Tail, s: f64) -> f64 {
    let vs = inv.eval(s);
    let (gx, gw) = gauss(8);
    let mut plus = 0.0;
    for c in clip_cells(&inv.cells, s, inv.b) {
        let mut acc = 0.0;
        for (x, w) in gx.iter().zip(&gw) {
            let tau = c.v_lo + 0.5 * (c.v_hi - c.v_lo) * (x + 1.0);
            acc += w * tail.t(c.time_at(tau) - vs);
        }
        plus += acc * 0.5 * (c.v_hi - c.v_lo);
    }
    let mut minus = 0.0;
    for c in clip_cells(&inv.cells, inv.a, s) {
        let mut acc = 0.0;
        for (x, w) in gx.iter().zip(&gw) {
            let tau = c.v_lo + 0.5 * (c.v_hi - c.v_lo) * (x + 1.0);
            acc += w * tail.t(vs - c.time_at(tau));
        }
        minus += acc * 0.5 * (c.v_hi - c.v_lo);
    }
    plus - minus
}

/// `d/ds Hv(s) = int_s^b T(v(t) - v(s)) dt - int_a^s T(v(s) - v(t')) dt'`.
pub fn h_derivative_on(inv: &InverseProfile, kern: &Kern1d, s: f64) -> f64 {
    h_derivative_impl(inv, &Tail::Exact(kern), s)
}

/// `Hv` on a sorted sample set by cumulative Gauss integration of its
/// derivative (H(a) = 0); the tail mass runs through a cubic lookup for
/// integrable kernels.
pub fn h_profile(inv: &InverseProfile, kern: &Kern1d, samples: &[f64]) -> Vec<f64> {
    let tail = match TailLut::new(kern, inv) {
        Some(lut) => Tail::Lut(kern, lut),
        None => Tail::Exact(kern),
    };
    let (gx, gw) = gauss(3);
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    let mut prev = inv.a;
    for &s in samples {
        let mut panel = 0.0;
        for (x, w) in gx.iter().zip(&gw) {
            let u = prev + 0.5 * (s - prev) * (x + 1.0);
            panel += w * h_derivative_impl(inv, &tail, u);
        }
        acc += panel * 0.5 * (s - prev);
        out.push(acc);
        prev = s;
    }
    out
}

/// `Hv` derivative on a sorted sample set with the shared lookup.
pub fn h_derivative_profile(inv: &InverseProfile, kern: &Kern1d, samples: &[f64]) -> Vec<f64> {
    let tail = match TailLut::new(kern, inv) {
        Some(lut) => Tail::Lut(kern, lut),
        None => Tail::Exact(kern),
    };
    samples.iter().map(|&s| h_derivative_impl(inv, &tail, s)).collect()
}

/// Certificate that a profile minimizes: `W >= H sigma` everywhere and
/// `W = H sigma` on the support of `d sigma`.
#[derive(Debug, Clone)]
pub struct OptimalityCertificate {
    /// `max (H sigma - W)_+` over the sample set.
    pub sup_gap: f64,
    /// `max |W - H sigma|` over samples in the support of `d sigma`.
    pub support_gap: f64,
    pub pass: bool,
    pub tol: f64,
    pub samples: usize,
}

/// Evaluate the two-sided optimality conditions on the value grid of the
/// profile's inverse.
pub fn certify_optimality(
    gamma: &MonotoneProfile,
    kern: &Kern1d,
    pot: &Potential1d,
    tol: f64,
) -> Result<OptimalityCertificate> {
    require_integrable(kern)?;
    let inv = invert_profile(gamma);
    let total_mass = inv.total_mass();
    let support_floor = 1e-12 * total_mass;
    // sample set: cell boundaries and midpoints, plus atoms
    let stride = (inv.cells.len() * 4 / 1400).max(1);
    let mut samples: Vec<(f64, bool)> = Vec::new();
    let margin = 1e-9 * (inv.b - inv.a);
    for (ci, c) in inv.cells.iter().enumerate().step_by(stride) {
        let in_support = c.mass() > support_floor;
        for f in [0.25, 0.5, 0.75, 1.0] {
            let v = c.v_lo + f * (c.v_hi - c.v_lo);
            if v > inv.a + margin && v < inv.b - margin {
                samples.push((v, in_support));
            }
        }
        let _ = ci;
    }
    for &(v, mass) in &inv.atoms {
        samples.push((v, mass > support_floor));
    }
    samples.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    samples.dedup_by(|p, q| {
        if (p.0 - q.0).abs() < 1e-15 {
            q.1 |= p.1;
            true
        } else {
            false
        }
    });
    let pts: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let hs = h_profile(&inv, kern, &pts);
    let mut sup_gap = 0.0f64;
    let mut support_gap = 0.0f64;
    for ((v, in_support), h) in samples.iter().zip(&hs) {
        let w = pot.w(*v);
        sup_gap = sup_gap.max(h - w);
        if *in_support {
            support_gap = support_gap.max((w - h).abs());
        }
    }
    Ok(OptimalityCertificate {
        sup_gap,
        support_gap,
        pass: sup_gap < tol && support_gap < tol,
        tol,
        samples: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;

    fn tanh_profile(r: f64, n: usize) -> MonotoneProfile {
        MonotoneProfile::from_fn(r, n, -1.0, 1.0, |t| t.tanh()).unwrap()
    }

    #[test]
    fn inverse_of_strictly_increasing() {
        let g = tanh_profile(6.0, 201);
        let inv = invert_profile(&g);
        assert!(inv.atoms.is_empty());
        // v(gamma(t_i)) = t_i at the nodes
        for i in (5..g.len() - 5).step_by(13) {
            let t = g.node(i);
            let v = inv.eval(g.values()[i]);
            assert!((v - t).abs() < 1e-10, "node {i}");
        }
        // total mass is the grid width where gamma is interior
        assert!((inv.total_mass() - 12.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_of_sign_profile() {
        let s = MonotoneProfile::sign(4.0, 81).unwrap();
        let inv = invert_profile(&s);
        // v is (close to) 0 on (-1, 1): the two jump cells are steep
        for &t in &[-0.7, -0.2, 0.3, 0.8] {
            assert!(inv.eval(t).abs() <= s.dt() + 1e-12, "v({t}) = {}", inv.eval(t));
        }
    }

    #[test]
    fn flats_become_atoms_roundtrip() {
        let mut vals = Vec::new();
        let n = 101;
        for i in 0..n {
            let t = -2.0 + 4.0 * i as f64 / (n - 1) as f64;
            let v = if t < -0.5 {
                (t + 0.5) / 1.5 * 0.8 - 0.2
            } else if t < 0.5 {
                -0.2
            } else {
                (t - 0.5) / 1.5 * 1.2 - 0.2
            };
            vals.push(v.clamp(-1.0, 1.0));
        }
        let g = MonotoneProfile::new(2.0, vals, -1.0, 1.0).unwrap();
        let inv = invert_profile(&g);
        assert_eq!(inv.atoms.len(), 1);
        assert!((inv.atoms[0].0 + 0.2).abs() < 1e-12);
        assert!((inv.atoms[0].1 - 1.0).abs() < 0.1);
        // round trip at continuity points
        for i in (3..g.len() - 3).step_by(7) {
            let t = g.node(i);
            let v = g.values()[i];
            if v > -1.0 + 1e-6 && v < 1.0 - 1e-6 && (v + 0.2).abs() > 1e-9 {
                let back = inv.eval(v);
                assert!((back - t).abs() <= g.dt() + 1e-9, "t = {t}");
            }
        }
    }

    #[test]
    fn h_of_flat_inverse_is_parabola() {
        // v ≡ 0 on (-1, 1), unit-mass even kernel: Hv(s) = T(0)(1-s)(1+s)
        let k = KernelSpec::gaussian(1, 1.0).to_kern1d().unwrap();
        let ideal = InverseProfile {
            a: -1.0,
            b: 1.0,
            cells: vec![InvCell { v_lo: -1.0, v_hi: 1.0, t_lo: 0.0, t_hi: 0.0 }],
            atoms: Vec::new(),
        };
        for &s in &[-0.6, -0.1, 0.3, 0.8] {
            let h = apply_h(&ideal, &k, s);
            let expect = 0.5 * (1.0 - s * s);
            assert!((h - expect).abs() < 1e-12, "s = {s}: {h} vs {expect}");
        }
        // the discrete sign profile approximates it at O(dt)
        let g = MonotoneProfile::sign(6.0, 1201).unwrap();
        let inv = invert_profile(&g);
        for &s in &[-0.6, 0.3] {
            let h = apply_h(&inv, &k, s);
            let expect = 0.5 * (1.0 - s * s);
            assert!((h - expect).abs() < 6e-3, "s = {s}: {h} vs {expect}");
        }
        assert!(apply_h(&ideal, &k, -0.999) < 2e-3);
    }

    #[test]
    fn h_respects_parabolic_bound() {
        let k = KernelSpec::gaussian(1, 1.0).to_kern1d().unwrap();
        let g = tanh_profile(6.0, 301);
        let inv = invert_profile(&g);
        for i in 1..20 {
            let s = -1.0 + 2.0 * i as f64 / 20.0;
            let h = apply_h(&inv, &k, s);
            let bound = (1.0 - s * s) * 1.0; // ||J||_1 = 1, wells ∓1
            assert!(h <= bound + 1e-8, "s = {s}: {h} > {bound}");
        }
    }

    #[test]
    fn h_profile_matches_direct_quadrature() {
        let k = KernelSpec::gaussian(1, 1.0).to_kern1d().unwrap();
        let g = tanh_profile(6.0, 301);
        let inv = invert_profile(&g);
        // dense cumulative panels, checked against the 2D route at a few s
        let m = 400;
        let pts: Vec<f64> = (1..m).map(|i| -1.0 + 2.0 * i as f64 / m as f64).collect();
        let fast = h_profile(&inv, &k, &pts);
        for probe in [40usize, 120, 200, 320] {
            let s = pts[probe];
            let direct = apply_h(&inv, &k, s);
            assert!((fast[probe] - direct).abs() < 1e-7, "s = {s}: {} vs {direct}", fast[probe]);
        }
    }

    #[test]
    fn conjugate_energy_convexity() {
        let k = KernelSpec::gaussian(1, 1.0).to_kern1d().unwrap();
        let w = |t: f64| 0.25 * (1.0 - t * t) * (1.0 - t * t);
        let g1 = tanh_profile(6.0, 201);
        let g2 = MonotoneProfile::from_fn(6.0, 201, -1.0, 1.0, |t| (0.6 * t).tanh()).unwrap();
        let i1 = invert_profile(&g1);
        let i2 = invert_profile(&g2);
        // midpoint inverse on a common value grid
        let m = 400;
        let samples: Vec<(f64, f64)> = (1..m)
            .map(|j| {
                let v = -1.0 + 2.0 * j as f64 / m as f64;
                (v, 0.5 * (i1.eval(v) + i2.eval(v)))
            })
            .collect();
        let mid = InverseProfile::from_samples(-1.0, 1.0, &samples);
        let f1 = conjugate_energy(&i1, &k, &w).unwrap();
        let f2 = conjugate_energy(&i2, &k, &w).unwrap();
        let fm = conjugate_energy(&mid, &k, &w).unwrap();
        assert!(fm <= 0.5 * (f1 + f2) + 1e-4, "fm = {fm}, avg = {}", 0.5 * (f1 + f2));
    }

    #[test]
    fn conjugate_rejects_singular_kernels() {
        let k = KernelSpec::fractional(1, 0.5, 1.0, 1.0, 2.0).to_kern1d().unwrap();
        let g = tanh_profile(6.0, 101);
        let inv = invert_profile(&g);
        assert!(conjugate_energy(&inv, &k, &|_| 0.0).is_err());
    }
}
