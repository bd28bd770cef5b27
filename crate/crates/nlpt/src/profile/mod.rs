//! 1D optimal transition profiles: energies, the integro-difference
//! operator, centering, distances, surface tensions and Hölder scans.

pub mod conjugate;
pub mod solve;

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::Error;
use crate::kernel::{Kern1d, KernelSpec, LatticeKernel};
use crate::potential::{Potential1d, PotentialSpec};
use crate::Result;

pub use conjugate::{
    apply_h, certify_optimality, conjugate_energy, invert_profile, InverseProfile, OptimalityCertificate,
};
pub use solve::{solve_profile_descent, solve_profile_picard, DescentOutput, PicardOutput};

/// A nondecreasing piecewise-linear profile on a uniform grid with constant
/// tails `a` (left) and `b` (right).
#[derive(Debug, Clone)]
pub struct MonotoneProfile {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
    a: f64,
    b: f64,
}

impl MonotoneProfile {
    /// Build from node values on `[-r, r]` with `n` nodes. Equal tails
    /// encode a constant profile.
    pub fn new(r: f64, values: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        let n = values.len();
        if n < 3 || r <= 0.0 || !(a <= b) {
            return Err(Error::Domain("profile needs n >= 3 nodes, r > 0, a <= b".into()));
        }
        for i in 1..n {
            if values[i] < values[i - 1] - 1e-12 {
                return Err(Error::Domain(format!("values decrease at node {i}")));
            }
        }
        let mut values = values;
        // remove representation noise so flats are exact ties
        for i in 1..n {
            if values[i] < values[i - 1] {
                values[i] = values[i - 1];
            }
        }
        for v in values.iter_mut() {
            *v = v.clamp(a, b);
        }
        let dt = 2.0 * r / (n - 1) as f64;
        Ok(Self { t0: -r, dt, values, a, b })
    }

    pub fn from_fn(r: f64, n: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dt = 2.0 * r / (n - 1) as f64;
        let values: Vec<f64> = (0..n).map(|i| f(-r + i as f64 * dt)).collect();
        Self::new(r, values, a, b)
    }

    /// The centered step: `a` left of zero, `b` right of it.
    pub fn step(r: f64, n: usize, a: f64, b: f64) -> Result<Self> {
        Self::from_fn(r, n, a, b, |t| if t < 0.0 { a } else { b })
    }

    /// The odd sign-like profile with a zero node at `t = 0` (n odd).
    pub fn sign(r: f64, n: usize) -> Result<Self> {
        Self::from_fn(r, n, -1.0, 1.0, |t| {
            if t < 0.0 {
                -1.0
            } else if t > 0.0 {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn node(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn first_node(&self) -> f64 {
        self.t0
    }

    pub fn last_node(&self) -> f64 {
        self.node(self.values.len() - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn tail_a(&self) -> f64 {
        self.a
    }

    pub fn tail_b(&self) -> f64 {
        self.b
    }

    /// Piecewise-linear evaluation with constant tails.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.values.len();
        if t <= self.t0 {
            return if t < self.t0 { self.a } else { self.values[0] };
        }
        let last = self.node(n - 1);
        if t >= last {
            return if t > last { self.b } else { self.values[n - 1] };
        }
        let s = (t - self.t0) / self.dt;
        let i = (s.floor() as usize).min(n - 2);
        let frac = s - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Total variation of the grid part.
    pub fn total_variation(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }

    /// Translate by a whole number of grid cells (grid re-anchored).
    pub fn shift_nodes(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.t0 += k as f64 * self.dt;
        out
    }

    /// Resample onto `[-r, r]` with `n` nodes by linear interpolation.
    pub fn resample(&self, r: f64, n: usize) -> Result<Self> {
        Self::from_fn(r, n, self.a, self.b, |t| self.eval(t))
    }
}

// ---------------------------------------------------------------------------
// Energies and the integro-difference operator
// ---------------------------------------------------------------------------

fn check_lattice(gamma: &MonotoneProfile, lat: &LatticeKernel) -> Result<()> {
    if (gamma.dt - lat.dt).abs() > 1e-12 * gamma.dt {
        return Err(Error::Domain("profile and lattice spacings differ".into()));
    }
    if lat.k_max + 1 < gamma.len() {
        return Err(Error::Domain("lattice too short for the profile grid".into()));
    }
    Ok(())
}

fn check_tails(gamma: &MonotoneProfile, pot: &Potential1d) -> Result<()> {
    let scale = pot.w(0.5 * (gamma.a + gamma.b)).abs().max(1.0);
    if pot.w(gamma.a).abs() > 1e-8 * scale || pot.w(gamma.b).abs() > 1e-8 * scale {
        return Err(Error::InfiniteEnergy(format!(
            "tails ({}, {}) are not zeros of the potential",
            gamma.a, gamma.b
        )));
    }
    Ok(())
}

/// The 1D energy
/// `F(g) = 1/4 int int J(t'-t)(g(t')-g(t))^2 dt' dt + int W(g(t)) dt`,
/// as an infinite-lattice pair sum with analytic tail closure. Exactly
/// invariant under whole-cell translations.
pub fn energy_1d(gamma: &MonotoneProfile, lat: &LatticeKernel, pot: &Potential1d) -> Result<f64> {
    check_lattice(gamma, lat)?;
    check_tails(gamma, pot)?;
    let v = &gamma.values;
    let n = v.len();
    let (a, b) = (gamma.a, gamma.b);
    let mut pair = 0.0;
    for d in 1..n {
        let w = lat.hat[d];
        if d > 4 && w * (b - a) * (b - a) * (n as f64) < 1e-18 {
            break;
        }
        if w == 0.0 {
            continue;
        }
        let mut s = 0.0;
        for i in 0..n - d {
            let df = v[i + d] - v[i];
            s += df * df;
        }
        pair += 2.0 * w * s;
    }
    let mut tails = 0.0;
    for (i, &vi) in v.iter().enumerate() {
        let da = vi - a;
        let db = vi - b;
        tails += da * da * lat.hat_tail_from(i + 1) + db * db * lat.hat_tail_from(n - i);
    }
    let cross = (b - a) * (b - a) * lat.cross_tail(n);
    let nonlocal = 0.25 * gamma.dt * (pair + 2.0 * tails + 2.0 * cross);
    let potential: f64 = gamma.dt * v.iter().map(|&t| pot.w(t)).sum::<f64>();
    Ok(nonlocal + potential)
}

/// The nonlocal part of the gradient field `-L g + tail terms`, shared by
/// the descent gradient; `out[i] = sum_j hat[|i-j|](g_i - g_j) + tails`.
pub(crate) fn hat_interaction_field(gamma: &MonotoneProfile, lat: &LatticeKernel, out: &mut [f64]) {
    let v = &gamma.values;
    let n = v.len();
    let (a, b) = (gamma.a, gamma.b);
    for o in out.iter_mut() {
        *o = 0.0;
    }
    for d in 1..n {
        let w = lat.hat[d];
        if d > 4 && w * (b - a) < 1e-18 {
            // hat decays in d for decreasing kernels; the neglected terms
            // are below 1e-18 (b-a) each
            break;
        }
        if w == 0.0 {
            continue;
        }
        for i in 0..n - d {
            let df = v[i] - v[i + d];
            out[i] += w * df;
            out[i + d] -= w * df;
        }
    }
    for i in 0..n {
        out[i] += (v[i] - a) * lat.hat_tail_from(i + 1) + (v[i] - b) * lat.hat_tail_from(n - i);
    }
}

/// Integro-difference operator
/// `L g(t0) = 1/2 int (g(t0 + s) + g(t0 - s) - 2 g(t0)) J(s) ds`
/// with cell-aggregated weights attributed to the outer node and constant
/// tails closed analytically; folding the even symmetry onto the positive
/// half-line absorbs the 1/2. First-order consistent with the continuum
/// operator; the origin-adjacent cell is a first-moment average, so
/// power-law singular kernels are integrated exactly there.
pub fn apply_lj(gamma: &MonotoneProfile, lat: &LatticeKernel, i: usize) -> f64 {
    let v = &gamma.values;
    let n = v.len();
    let (a, b) = (gamma.a, gamma.b);
    let gi = v[i];
    let mut acc = 0.0;
    // beyond k_hi the suffix weight is below 1e-18, so closing with the
    // constant tails there is exact to rounding
    let k_hi = n.min(lat.k_max + 1).min(lat.k_eff);
    for k in 1..k_hi {
        let w = lat.inner[k];
        let up = if i + k < n { v[i + k] } else { b };
        let dn = if i >= k { v[i - k] } else { a };
        acc += w * (up + dn - 2.0 * gi);
    }
    acc += (lat.inner_suffix_from(k_hi) + lat.inner_tail_beyond) * (a + b - 2.0 * gi);
    acc
}

/// Sup-norm Euler-Lagrange residual `|L g - dW(g)|` over interior nodes.
pub fn el_residual(gamma: &MonotoneProfile, lat: &LatticeKernel, pot: &Potential1d) -> f64 {
    let n = gamma.len();
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        let r = apply_lj(gamma, lat, i) - pot.dw(gamma.values[i]);
        worst = worst.max(r.abs());
    }
    worst
}

// ---------------------------------------------------------------------------
// Centering, weights, distances
// ---------------------------------------------------------------------------

/// Center a profile at its midpoint crossing: returns the translated
/// profile and the detected translation `k` (snapped to the grid).
pub fn center_profile(gamma: &MonotoneProfile) -> (MonotoneProfile, f64) {
    let mid = 0.5 * (gamma.a + gamma.b);
    let n = gamma.len();
    // k = sup { k : gamma(t) <= mid for all t <= k }
    let mut crossing = gamma.last_node();
    for i in 0..n {
        if gamma.values[i] > mid {
            if i == 0 {
                crossing = gamma.first_node();
            } else {
                let (v0, v1) = (gamma.values[i - 1], gamma.values[i]);
                let f = if v1 > v0 { (mid - v0) / (v1 - v0) } else { 0.0 };
                crossing = gamma.node(i - 1) + f * gamma.dt;
            }
            break;
        }
    }
    let k_cells = (crossing / gamma.dt).round() as i64;
    let k = k_cells as f64 * gamma.dt;
    (gamma.shift_nodes(-k_cells), k)
}

/// The weight `sigma_J(t) = min(1, inf_{|t0| <= 2 R'} J(t - t0))`, computed
/// by minimization over a `t0` grid.
#[derive(Clone)]
pub struct WeightFunction {
    kern: Kern1d,
    pub r_prime: f64,
    grid: usize,
}

impl WeightFunction {
    pub fn eval(&self, t: f64) -> f64 {
        let lo = -2.0 * self.r_prime;
        let hi = 2.0 * self.r_prime;
        let mut best = f64::INFINITY;
        for i in 0..=self.grid {
            let t0 = lo + (hi - lo) * i as f64 / self.grid as f64;
            let j = self.kern.eval(t - t0);
            if j < best {
                best = j;
            }
        }
        best.min(1.0)
    }
}

pub fn weight_sigma(kern: &Kern1d, r_prime: f64) -> WeightFunction {
    WeightFunction { kern: kern.clone(), r_prime, grid: 512 }
}

/// Weighted L^1 distance `int |g1 - g2| w dt` by trapezoid on the common
/// refinement, extended until the weighted tail mismatch is negligible.
pub fn profile_distance(g1: &MonotoneProfile, g2: &MonotoneProfile, w: &dyn Fn(f64) -> f64) -> f64 {
    let dt = g1.dt.min(g2.dt);
    let mut lo = g1.first_node().min(g2.first_node());
    let mut hi = g1.last_node().max(g2.last_node());
    // widen while the weighted well mismatch can still contribute
    let tail_gap = (g1.a - g2.a).abs().max((g1.b - g2.b).abs());
    if tail_gap > 0.0 {
        while w(lo) * tail_gap > 1e-14 && lo > -1e4 {
            lo -= 1.0;
        }
        while w(hi) * tail_gap > 1e-14 && hi < 1e4 {
            hi += 1.0;
        }
    }
    let n = ((hi - lo) / dt).ceil() as usize + 1;
    let mut acc = 0.0;
    for i in 0..n {
        let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let f = (g1.eval(t) - g2.eval(t)).abs() * w(t);
        let coef = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        acc += coef * f;
    }
    acc * (hi - lo) / (n - 1) as f64
}

/// Truncated squared-L^2 distance over `[-r, r]`.
pub fn profile_distance_l2(g1: &MonotoneProfile, g2: &MonotoneProfile, r: f64) -> f64 {
    let dt = g1.dt.min(g2.dt);
    let n = (2.0 * r / dt).ceil() as usize + 1;
    let mut acc = 0.0;
    for i in 0..n {
        let t = -r + 2.0 * r * i as f64 / (n - 1) as f64;
        let d = g1.eval(t) - g2.eval(t);
        let coef = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        acc += coef * d * d;
    }
    acc * 2.0 * r / (n - 1) as f64
}

/// Discrete Hölder seminorms of a profile over a window, one per exponent.
#[derive(Debug, Clone)]
pub struct HolderEstimate {
    pub alpha: f64,
    pub seminorm: f64,
    pub discontinuity_suspected: bool,
}

pub fn measure_holder_in_t(gamma: &MonotoneProfile, window: f64, alphas: &[f64]) -> Vec<HolderEstimate> {
    let mut idx = Vec::new();
    for i in 0..gamma.len() {
        let t = gamma.node(i);
        if t.abs() <= window {
            idx.push(i);
        }
    }
    // thin out to keep the pair scan quadratic in at most ~1500 nodes
    let stride = (idx.len() / 1500).max(1);
    let idx: Vec<usize> = idx.into_iter().step_by(stride).collect();
    alphas
        .iter()
        .map(|&alpha| {
            let mut semi = 0.0f64;
            for (ii, &i) in idx.iter().enumerate() {
                for &j in &idx[ii + 1..] {
                    let dv = (gamma.values[j] - gamma.values[i]).abs();
                    let dtij = (gamma.node(j) - gamma.node(i)).abs();
                    semi = semi.max(dv / dtij.powf(alpha));
                }
            }
            // a single-cell quotient at jump scale marks a discontinuity
            let jump_scale = gamma.total_variation() / 2.0 / gamma.dt.powf(alpha);
            HolderEstimate { alpha, seminorm: semi, discontinuity_suspected: semi > 0.5 * jump_scale }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Surface tension
// ---------------------------------------------------------------------------

/// Options shared by the profile solvers.
#[derive(Debug, Clone)]
pub struct SolveOpts {
    /// Half-width of the grid; `None` doubles adaptively from `r_start`.
    pub r: Option<f64>,
    pub r_start: f64,
    /// Nodes per unit half-width when resolving automatically.
    pub n: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub picard_tol: f64,
    pub damping: f64,
    /// Attempt a Picard polish after descent when the kernel is integrable.
    pub polish: bool,
}

impl Default for SolveOpts {
    fn default() -> Self {
        Self {
            r: None,
            r_start: 6.0,
            n: 1025,
            max_iter: 20_000,
            grad_tol: 1e-8,
            picard_tol: 1e-10,
            damping: 0.5,
            polish: true,
        }
    }
}

/// Result of the orchestrated 1D solve.
#[derive(Debug, Clone)]
pub struct SolvedProfile {
    pub profile: MonotoneProfile,
    pub energy: f64,
    pub projected_grad: f64,
    pub el_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub lattice: LatticeKernel,
}

/// Solve the 1D problem for a kernel/potential pair, doubling the grid
/// half-width until the boundary values sit on the wells.
pub fn solve_profile(kern: &Kern1d, pot: &Potential1d, opts: &SolveOpts) -> Result<SolvedProfile> {
    let (a, b) = (pot.a, pot.b);
    let mut r = opts.r.unwrap_or(opts.r_start);
    let mut init: Option<MonotoneProfile> = None;
    let max_r = 64.0;
    loop {
        let n = if opts.r.is_some() {
            opts.n
        } else {
            ((opts.n - 1) as f64 * (r / opts.r_start)) as usize + 1
        };
        let lat = kern.lattice(2.0 * r / (n - 1) as f64, n + 2);
        let start = match &init {
            Some(g) => g.resample(r, n)?,
            None => MonotoneProfile::step(r, n, a, b)?,
        };
        // Picard polishes to the same stationary points much faster than
        // the projected descent, so keep the descent phase short whenever
        // the kernel qualifies
        let can_polish = opts.polish
            && !kern.is_singular()
            && lat.mass.map(|m| (m - 1.0).abs() < 1e-6).unwrap_or(false);
        let mut descent_opts = opts.clone();
        if can_polish {
            descent_opts.max_iter = opts.max_iter.min(1200);
        }
        let out = solve::solve_profile_descent(&lat, pot, &start, &descent_opts)?;
        let mut profile = out.profile;
        let mut iterations = out.iterations;
        let mut converged = out.converged;
        if can_polish {
            if let Ok(p) = solve::solve_profile_picard(&lat, pot, &profile, opts) {
                if p.converged {
                    profile = p.profile;
                    iterations += p.iterations;
                    converged = true;
                }
            }
        }
        let boundary_ok = (profile.values()[0] - a).abs() < 1e-4 * (b - a)
            && (profile.values()[profile.len() - 1] - b).abs() < 1e-4 * (b - a);
        if boundary_ok || opts.r.is_some() || r >= max_r {
            let energy = energy_1d(&profile, &lat, pot)?;
            let pg = solve::projected_grad_norm(&profile, &lat, pot);
            let res = el_residual(&profile, &lat, pot);
            return Ok(SolvedProfile {
                profile,
                energy,
                projected_grad: pg,
                el_residual: res,
                iterations,
                converged,
                lattice: lat,
            });
        }
        init = Some(profile);
        r *= 2.0;
    }
}

/// Surface-tension evaluator for one kernel/potential pair, cached by
/// `(x, xi)`.
pub struct TensionProblem<'a> {
    pub kernel: &'a KernelSpec,
    pub potential: &'a PotentialSpec,
    pub opts: SolveOpts,
    cache: Mutex<HashMap<Vec<u64>, f64>>,
}

impl<'a> TensionProblem<'a> {
    pub fn new(kernel: &'a KernelSpec, potential: &'a PotentialSpec, opts: SolveOpts) -> Self {
        Self { kernel, potential, opts, cache: Mutex::new(HashMap::new()) }
    }

    /// `sigma(x, xi) = inf F^xi_x` over profiles joining the wells at `x`.
    pub fn tension(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        let key: Vec<u64> = x.iter().chain(xi).map(|v| v.to_bits()).collect();
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let kern = self.kernel.directional(xi)?;
        let pot = self.potential.at(x);
        let solved = solve_profile(&kern, &pot, &self.opts)?;
        self.cache.lock().unwrap().insert(key, solved.energy);
        Ok(solved.energy)
    }
}

// ---------------------------------------------------------------------------
// Hölder scan and continuous dependence
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct HolderScan {
    /// `(|x - x'|, d(x, x'))` for every sampled pair.
    pub pairs: Vec<(f64, f64)>,
    /// Least-squares slope of `log d` against `log |x - x'|`.
    pub beta_hat: f64,
    /// Fitted constant.
    pub l_hat: f64,
    /// All distances vanished (x-independent data).
    pub degenerate: bool,
}

/// Solve, center and compare profiles across base points; fit the
/// selection exponent from pairwise weighted-L^1 distances.
pub fn holder_scan(
    potential: &PotentialSpec,
    kernel: &KernelSpec,
    xi: &[f64],
    xs: &[Vec<f64>],
    opts: &SolveOpts,
) -> Result<HolderScan> {
    if xs.len() < 6 {
        return Err(Error::Domain("holder scan needs at least 6 sample points".into()));
    }
    let kern = kernel.directional(xi)?;
    let mut profiles = Vec::with_capacity(xs.len());
    for x in xs {
        let pot = potential.at(x);
        let solved = solve_profile(&kern, &pot, opts)
            .map_err(|e| Error::Domain(format!("solver failed at x = {x:?}: {e}")))?;
        let (centered, _) = center_profile(&solved.profile);
        profiles.push(centered);
    }
    // centering radius: profiles are within delta/2 of the wells beyond it
    let mut r_prime = 1.0f64;
    for g in &profiles {
        let tol = 0.25 * (g.tail_b() - g.tail_a()) * 0.5;
        for i in 0..g.len() {
            let t = g.node(i);
            let v = g.values()[i];
            if (v - g.tail_a()).abs() > tol && (v - g.tail_b()).abs() > tol {
                r_prime = r_prime.max(t.abs());
            }
        }
    }
    let sigma = weight_sigma(&kern, r_prime);
    let mut pairs = Vec::new();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let dx = xs[i].iter().zip(&xs[j]).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            let d = profile_distance(&profiles[i], &profiles[j], &|t| sigma.eval(t));
            pairs.push((dx, d));
        }
    }
    let degenerate = pairs.iter().all(|&(_, d)| d < 1e-12);
    if degenerate {
        return Ok(HolderScan { pairs, beta_hat: 0.0, l_hat: 0.0, degenerate });
    }
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|&&(dx, d)| dx > 0.0 && d > 1e-14)
        .map(|&(dx, d)| (dx.ln(), d.ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let beta_hat = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let l_hat = ((sy - beta_hat * sx) / n).exp();
    Ok(HolderScan { pairs, beta_hat, l_hat, degenerate })
}

/// One row of the continuous-dependence table.
#[derive(Debug, Clone)]
pub struct ContDepRow {
    pub rho: f64,
    pub energy: f64,
}

/// Solve along a family `rho -> W_rho` and report energies together with
/// the limit minimum at `rho = 0`.
pub fn continuous_dependence_sweep(
    kern: &Kern1d,
    family: &dyn Fn(f64) -> Potential1d,
    rhos: &[f64],
    opts: &SolveOpts,
) -> Result<(Vec<ContDepRow>, f64)> {
    let base = solve_profile(kern, &family(0.0), opts)?;
    let mut rows = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let solved = solve_profile(kern, &family(rho), opts)?;
        rows.push(ContDepRow { rho, energy: solved.energy });
    }
    Ok((rows, base.energy))
}
