//! Independent references for the test suite: exhaustive monotone-path
//! search on tiny instances and Richardson-extrapolated quadrature.

use crate::error::Error;
use crate::kernel::LatticeKernel;
use crate::potential::Potential1d;
use crate::profile::MonotoneProfile;
use crate::Result;

/// A desk-size instance: at most 24 nodes and 17 value levels.
pub struct TinyInstance<'a> {
    pub r: f64,
    pub n: usize,
    pub levels: Vec<f64>,
    pub lat: &'a LatticeKernel,
    pub pot: &'a Potential1d,
}

impl<'a> TinyInstance<'a> {
    pub fn new(r: f64, n: usize, levels: Vec<f64>, lat: &'a LatticeKernel, pot: &'a Potential1d) -> Result<Self> {
        if n > 24 || levels.len() > 17 || levels.len() < 2 {
            return Err(Error::Domain("tiny instance limits: n <= 24, 2 <= levels <= 17".into()));
        }
        let mut levels = levels;
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { r, n, levels, lat, pot })
    }

    /// Number of nondecreasing level paths `C(n + L - 1, L - 1)`.
    pub fn search_space(&self) -> f64 {
        let l = self.levels.len();
        let mut c = 1.0f64;
        for i in 0..l - 1 {
            c = c * (self.n + i + 1) as f64 / (i + 1) as f64;
        }
        c
    }
}

/// Result of the exhaustive search.
#[derive(Debug, Clone)]
pub struct BruteResult {
    pub profile: MonotoneProfile,
    pub energy: f64,
    pub paths: u64,
}

const BRUTE_BUDGET: f64 = 1e8;

/// Exact global minimizer over nondecreasing lattice paths with the given
/// value levels, by depth-first enumeration with incremental energies.
pub fn brute_profile(inst: &TinyInstance) -> Result<BruteResult> {
    let states = inst.search_space();
    if states > BRUTE_BUDGET {
        return Err(Error::BudgetExceeded { states, budget: BRUTE_BUDGET });
    }
    let n = inst.n;
    let lat = inst.lat;
    let dt = lat.dt;
    let (a, b) = (inst.pot.a, inst.pot.b);
    let levels = &inst.levels;
    let nlev = levels.len();

    // per-node incremental contributions, restored on pop
    let mut values = vec![0.0f64; n];
    let mut contrib = vec![0.0f64; n];
    let mut acc = 0.0f64;
    let mut best = f64::INFINITY;
    let mut best_vals = vec![levels[0]; n];
    let mut paths = 0u64;

    // stack of (depth, level index)
    let mut stack: Vec<(usize, usize)> = (0..nlev).rev().map(|l| (0, l)).collect();
    let mut depth_level: Vec<usize> = vec![0; n];
    let mut cur_depth = 0usize;

    let cross = (b - a) * (b - a) * lat.cross_tail(n);

    while let Some((depth, lev)) = stack.pop() {
        // unwind to the parent depth
        while cur_depth > depth {
            cur_depth -= 1;
            acc -= contrib[cur_depth];
        }
        let v = levels[lev];
        // incremental energy of node `depth` against the prefix and tails
        let mut c = 2.0 * ((v - a) * (v - a) * lat.hat_tail_from(depth + 1)
            + (v - b) * (v - b) * lat.hat_tail_from(n - depth));
        for j in 0..depth {
            let d = v - values[j];
            c += 2.0 * lat.hat[depth - j] * d * d;
        }
        // potential in pair-sum units (divided out at the leaf)
        c += 4.0 * inst.pot.w(v);
        values[depth] = v;
        contrib[depth] = c;
        depth_level[depth] = lev;
        acc += c;
        cur_depth = depth + 1;

        if depth + 1 == n {
            paths += 1;
            let e = 0.25 * dt * (acc + 2.0 * cross);
            if e < best {
                best = e;
                best_vals.copy_from_slice(&values);
            }
        } else {
            for l in (lev..nlev).rev() {
                stack.push((depth + 1, l));
            }
        }
    }

    let profile = MonotoneProfile::new(inst.r, best_vals, a, b)?;
    Ok(BruteResult { profile, energy: best, paths })
}

/// Richardson-extrapolated quadrature with an a-posteriori error estimate;
/// trapezoid and midpoint ladders must agree within combined estimates.
pub fn reference_quadrature(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, levels: usize) -> Result<(f64, f64)> {
    let trap = ladder(f, lo, hi, levels, false);
    let midp = ladder(f, lo, hi, levels, true);
    let (vt, et) = richardson(&trap)?;
    let (vm, em) = richardson(&midp)?;
    let spread = (vt - vm).abs();
    if spread > 10.0 * (et + em) + 1e-13 * vt.abs().max(1.0) {
        return Err(Error::NonConvergent(format!(
            "trapezoid and midpoint ladders disagree: {vt} vs {vm}"
        )));
    }
    Ok((0.5 * (vt + vm), spread.max(et).max(em)))
}

fn ladder(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, levels: usize, midpoint: bool) -> Vec<f64> {
    let mut out = Vec::with_capacity(levels);
    for lvl in 0..levels {
        let n = 16usize << lvl;
        let h = (hi - lo) / n as f64;
        let mut s = 0.0;
        if midpoint {
            for i in 0..n {
                s += f(lo + (i as f64 + 0.5) * h);
            }
        } else {
            s += 0.5 * (f(lo) + f(hi));
            for i in 1..n {
                s += f(lo + i as f64 * h);
            }
        }
        out.push(s * h);
    }
    out
}

fn richardson(ladder: &[f64]) -> Result<(f64, f64)> {
    if ladder.len() < 3 {
        return Err(Error::NonConvergent("need at least 3 ladder levels".into()));
    }
    let mut rows: Vec<Vec<f64>> = vec![ladder.to_vec()];
    for k in 1..ladder.len() {
        let prev = &rows[k - 1];
        let fac = 4.0f64.powi(k as i32);
        let row: Vec<f64> = prev.windows(2).map(|w| (fac * w[1] - w[0]) / (fac - 1.0)).collect();
        rows.push(row);
    }
    let last = *rows.last().unwrap().last().unwrap();
    let prev = *rows[rows.len() - 2].last().unwrap();
    let err = (last - prev).abs();
    Ok((last, err))
}

/// 2D reference quadrature on a rectangle (tensor trapezoid ladder).
pub fn reference_quadrature_2d(
    f: &dyn Fn(f64, f64) -> f64,
    lo: (f64, f64),
    hi: (f64, f64),
    levels: usize,
) -> Result<(f64, f64)> {
    let mut vals = Vec::with_capacity(levels);
    for lvl in 0..levels {
        let n = 8usize << lvl;
        let hx = (hi.0 - lo.0) / n as f64;
        let hy = (hi.1 - lo.1) / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let wx = if i == 0 || i == n { 0.5 } else { 1.0 };
            for j in 0..=n {
                let wy = if j == 0 || j == n { 0.5 } else { 1.0 };
                s += wx * wy * f(lo.0 + i as f64 * hx, lo.1 + j as f64 * hy);
            }
        }
        vals.push(s * hx * hy);
    }
    richardson(&vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::num;
    use crate::potential::{make_quartic_moving, WellPair};
    use std::sync::Arc;

    #[test]
    fn quadrature_gaussian_first_moment() {
        // int |h| phi(h) dh = sqrt(2/pi)
        let f = |h: f64| h * num::FRAC_1_SQRT_2PI * (-h * h / 2.0).exp();
        let (v, e) = reference_quadrature(&f, 0.0, 14.0, 7).unwrap();
        let expect = 0.5 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((v - expect).abs() < 1e-10, "v = {v}");
        assert!(e < 1e-8);
    }

    #[test]
    fn quadrature_tail_symmetry() {
        // T(0) = 1/2 for even unit-mass kernels
        let f = |h: f64| num::FRAC_1_SQRT_2PI * (-h * h / 2.0).exp();
        let (v, _) = reference_quadrature(&f, 0.0, 14.0, 7).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn brute_two_levels_is_a_step() {
        let k = KernelSpec::gaussian(1, 1.0).to_kern1d().unwrap();
        let n = 12;
        let r = 1.5;
        let dt = 2.0 * r / (n - 1) as f64;
        let lat = k.lattice(dt, n + 2);
        let pot = make_quartic_moving(WellPair::constant(-1.0, 1.0), Arc::new(|_| 0.25)).at(&[0.0]);
        let inst = TinyInstance::new(r, n, vec![-1.0, 1.0], &lat, &pot).unwrap();
        let out = brute_profile(&inst).unwrap();
        assert_eq!(out.paths, 13); // n + 1 step positions
        // minimizer is a step: strictly two-valued
        for &v in out.profile.values() {
            assert!(v == -1.0 || v == 1.0);
        }
        // energy agrees with the library evaluation of the same profile
        let e = crate::profile::energy_1d(&out.profile, &lat, &pot).unwrap();
        assert!((e - out.energy).abs() < 1e-12);
    }

    #[test]
    fn brute_symmetric_minimizer_is_antisymmetric() {
        let k = KernelSpec::gaussian(1, 1.0).to_kern1d().unwrap();
        let n = 9;
        let r = 2.0;
        let dt = 2.0 * r / (n - 1) as f64;
        let lat = k.lattice(dt, n + 2);
        let pot = make_quartic_moving(WellPair::constant(-1.0, 1.0), Arc::new(|_| 0.25)).at(&[0.0]);
        let levels: Vec<f64> = (0..9).map(|i| -1.0 + 0.25 * i as f64).collect();
        let inst = TinyInstance::new(r, n, levels, &lat, &pot).unwrap();
        let out = brute_profile(&inst).unwrap();
        // the mirrored candidate is also a minimizer: the energy of the
        // flipped profile matches to machine precision
        let v = out.profile.values();
        let mirrored: Vec<f64> = (0..n).map(|i| -v[n - 1 - i]).collect();
        let mg = MonotoneProfile::new(r, mirrored, -1.0, 1.0).unwrap();
        let me = crate::profile::energy_1d(&mg, &lat, &pot).unwrap();
        assert!((me - out.energy).abs() < 1e-12, "mirror energy gap {}", (me - out.energy).abs());
    }

    #[test]
    fn budget_guard() {
        let k = KernelSpec::gaussian(1, 1.0).to_kern1d().unwrap();
        let lat = k.lattice(0.2, 30);
        let pot = make_quartic_moving(WellPair::constant(-1.0, 1.0), Arc::new(|_| 0.25)).at(&[0.0]);
        let levels: Vec<f64> = (0..17).map(|i| -1.0 + 0.125 * i as f64).collect();
        let inst = TinyInstance::new(2.0, 24, levels, &lat, &pot).unwrap();
        assert!(matches!(brute_profile(&inst), Err(Error::BudgetExceeded { .. })));
    }
}
