//! Two-dimensional phase fields on rectangles: scaled energies, polyhedral
//! interfaces and the limit functional, locality defect, eps-traces,
//! recovery fields and sharp-interface sweeps.

use crate::error::Error;
use crate::kernel::{HatKernel, KernelSpec};
use crate::num;
use crate::potential::PotentialSpec;
use crate::profile::{center_profile, solve_profile, MonotoneProfile, SolveOpts, TensionProblem};
use crate::Result;

/// Axis-aligned rectangle with square cells.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn unit() -> Self {
        Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] }
    }
}

/// A grid function on cell centers, clamped to `[-m_bound, m_bound]`.
#[derive(Debug, Clone)]
pub struct PhaseField {
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub m_bound: f64,
}

impl PhaseField {
    pub fn new(rect: Rect, nx: usize, ny: usize, m_bound: f64) -> Result<Self> {
        let dx = (rect.hi[0] - rect.lo[0]) / nx as f64;
        let dy = (rect.hi[1] - rect.lo[1]) / ny as f64;
        if (dx - dy).abs() > 1e-12 * dx {
            return Err(Error::Domain("cells must be square".into()));
        }
        Ok(Self { rect, nx, ny, values: vec![0.0; nx * ny], m_bound })
    }

    pub fn from_fn(rect: Rect, nx: usize, ny: usize, m_bound: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut field = Self::new(rect, nx, ny, m_bound)?;
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = field.center(i, j);
                field.values[j * nx + i] = f(x, y).clamp(-m_bound, m_bound);
            }
        }
        Ok(field)
    }

    pub fn dx(&self) -> f64 {
        (self.rect.hi[0] - self.rect.lo[0]) / self.nx as f64
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        let dx = self.dx();
        (self.rect.lo[0] + (i as f64 + 0.5) * dx, self.rect.lo[1] + (j as f64 + 0.5) * dx)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Bilinear evaluation at a point of the rectangle (cell-center data,
    /// clamped coordinates).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let dx = self.dx();
        let fx = ((x - self.rect.lo[0]) / dx - 0.5).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((y - self.rect.lo[1]) / dx - 0.5).clamp(0.0, (self.ny - 1) as f64);
        let (i0, j0) = (fx.floor() as usize, fy.floor() as usize);
        let (i1, j1) = ((i0 + 1).min(self.nx - 1), (j0 + 1).min(self.ny - 1));
        let (sx, sy) = (fx - i0 as f64, fy - j0 as f64);
        let v00 = self.get(i0, j0);
        let v10 = self.get(i1, j0);
        let v01 = self.get(i0, j1);
        let v11 = self.get(i1, j1);
        v00 * (1.0 - sx) * (1.0 - sy) + v10 * sx * (1.0 - sy) + v01 * (1.0 - sx) * sy + v11 * sx * sy
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.rect.lo[0] && x <= self.rect.hi[0] && y >= self.rect.lo[1] && y <= self.rect.hi[1]
    }

    pub fn l1_distance(&self, other: &PhaseField) -> f64 {
        let dx = self.dx();
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * dx
            * dx
    }
}

/// A union of cells, used to restrict energies and defects.
#[derive(Debug, Clone)]
pub struct CellSet {
    pub mask: Vec<bool>,
}

impl CellSet {
    pub fn from_pred(field: &PhaseField, pred: impl Fn(f64, f64) -> bool) -> Self {
        let mut mask = vec![false; field.nx * field.ny];
        for j in 0..field.ny {
            for i in 0..field.nx {
                let (x, y) = field.center(i, j);
                mask[j * field.nx + i] = pred(x, y);
            }
        }
        Self { mask }
    }

    pub fn all(field: &PhaseField) -> Self {
        Self { mask: vec![true; field.nx * field.ny] }
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        CellSet { mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect() }
    }

    pub fn is_disjoint(&self, other: &CellSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !(*a && *b))
    }
}

// ---------------------------------------------------------------------------
// Pair weights
// ---------------------------------------------------------------------------

/// Cell-pair kernel weights for the rescaled kernel on a square grid:
/// `wt(d) ~ int_{C_0 x C_d} J_eps(x' - x)`, with exact (tent-convolved)
/// integrals near the diagonal where singular kernels concentrate, and a
/// support cutoff whose neglected first moment is below 1e-6 relative.
pub struct PairWeights {
    pub dx: f64,
    pub eps: f64,
    pub radius: i64,
    /// weight per offset, indexed by (di + radius) + (dj + radius) * side
    weights: Vec<f64>,
    side: usize,
}

impl PairWeights {
    pub fn build(kernel: &KernelSpec, eps: f64, dx: f64) -> Result<Self> {
        if kernel.dim != 2 {
            return Err(Error::Domain("pair weights need a 2D kernel".into()));
        }
        let keps = kernel.rescale(eps)?;
        // cutoff: K2 tail below 1e-6 relative
        let total_fm = keps.first_moment()?;
        let mut rc = eps;
        loop {
            let tail = radial_first_moment_tail(&keps, rc);
            if tail < 1e-6 * total_fm || rc > 1e3 {
                break;
            }
            rc *= 1.3;
        }
        let radius = (rc / dx).ceil() as i64;
        let side = (2 * radius + 1) as usize;
        let mut weights = vec![0.0; side * side];
        for dj in -radius..=radius {
            for di in -radius..=radius {
                if di == 0 && dj == 0 {
                    continue;
                }
                let cx = di as f64 * dx;
                let cy = dj as f64 * dx;
                let r2 = cx * cx + cy * cy;
                if r2.sqrt() > rc + dx {
                    continue;
                }
                let w = if di.abs() <= 2 && dj.abs() <= 2 {
                    tent_conv(&keps, cx, cy, dx) * dx * dx
                } else {
                    keps.eval_radial(r2.sqrt()) * dx * dx * dx * dx
                };
                weights[(di + radius) as usize + (dj + radius) as usize * side] = w;
            }
        }
        Ok(Self { dx, eps, radius, weights, side })
    }

    #[inline]
    pub fn get(&self, di: i64, dj: i64) -> f64 {
        self.weights[(di + self.radius) as usize + (dj + self.radius) as usize * self.side]
    }
}

fn radial_first_moment_tail(k: &KernelSpec, r: f64) -> f64 {
    2.0 * std::f64::consts::PI
        * num::adaptive_quad_to_inf(r, r.max(1e-3), 1e-10, &|s| s * s * k.eval_radial(s))
}

/// `int J(u) T((u - c)/dx) du` with `T` the 2D unit tent; polar panels when
/// the tent support touches a singular origin.
fn tent_conv(k: &KernelSpec, cx: f64, cy: f64, dx: f64) -> f64 {
    let tent = |x: f64, y: f64| {
        let tx = 1.0 - ((x - cx) / dx).abs();
        let ty = 1.0 - ((y - cy) / dx).abs();
        if tx > 0.0 && ty > 0.0 {
            tx * ty
        } else {
            0.0
        }
    };
    let touches_origin = cx.abs() < dx && cy.abs() < dx;
    if touches_origin && k.is_singular() {
        // polar panels: J_rad(r) r is integrable at the origin
        let rmax = (cx.abs() + dx).hypot(cy.abs() + dx);
        let (gx, gw) = num::gauss_legendre(32);
        let angular = |r: f64| -> f64 {
            let mut s = 0.0;
            for (x, w) in gx.iter().zip(&gw) {
                let th = std::f64::consts::PI * (x + 1.0);
                s += w * tent(r * th.cos(), r * th.sin());
            }
            s * std::f64::consts::PI
        };
        let mut total = 0.0f64;
        let mut hi = rmax;
        for _ in 0..60 {
            let lo = 0.5 * hi;
            total += num::adaptive_quad(lo, hi, 1e-11 * (1.0 + total.abs()), &|r| {
                k.eval_radial(r) * r * angular(r)
            });
            hi = lo;
            if hi < 1e-12 {
                break;
            }
        }
        total
    } else {
        let (gx, gw) = num::gauss_legendre(16);
        let mut total = 0.0;
        for (xi, wi) in gx.iter().zip(&gw) {
            let x = cx + dx * xi;
            for (yj, wj) in gx.iter().zip(&gw) {
                let y = cy + dx * yj;
                total += wi * wj * k.eval_radial(x.hypot(y)) * tent(x, y);
            }
        }
        total * dx * dx
    }
}

// ---------------------------------------------------------------------------
// Energies and the locality defect
// ---------------------------------------------------------------------------

/// `F_eps(u; A)` for a cell union `A`: pairwise sum plus potential term.
pub fn energy_eps_on(
    u: &PhaseField,
    set: &CellSet,
    weights: &PairWeights,
    potential: &PotentialSpec,
    eps: f64,
) -> f64 {
    let nonlocal = pair_sum(u, set, set, weights) / (4.0 * eps);
    let dx = u.dx();
    let mut pot = 0.0;
    for j in 0..u.ny {
        for i in 0..u.nx {
            if set.mask[j * u.nx + i] {
                let (x, y) = u.center(i, j);
                pot += (potential.w)(&[x, y], u.get(i, j));
            }
        }
    }
    nonlocal + pot * dx * dx / eps
}

/// `F_eps(u; Omega)` over the whole rectangle.
pub fn energy_eps(u: &PhaseField, weights: &PairWeights, potential: &PotentialSpec, eps: f64) -> f64 {
    energy_eps_on(u, &CellSet::all(u), weights, potential, eps)
}

/// Nonlocal and potential parts reported separately.
pub fn energy_eps_split(
    u: &PhaseField,
    weights: &PairWeights,
    potential: &PotentialSpec,
    eps: f64,
) -> (f64, f64) {
    let all = CellSet::all(u);
    let nl = pair_sum(u, &all, &all, weights) / (4.0 * eps);
    let dx = u.dx();
    let mut pot = 0.0;
    for j in 0..u.ny {
        for i in 0..u.nx {
            let (x, y) = u.center(i, j);
            pot += (potential.w)(&[x, y], u.get(i, j));
        }
    }
    (nl, pot * dx * dx / eps)
}

/// Ordered pair sum `sum_{p in A, q in B} wt(q - p) (u_p - u_q)^2`.
fn pair_sum(u: &PhaseField, a: &CellSet, b: &CellSet, weights: &PairWeights) -> f64 {
    let (nx, ny) = (u.nx as i64, u.ny as i64);
    let r = weights.radius;
    let mut acc = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            if !a.mask[(j * nx + i) as usize] {
                continue;
            }
            let up = u.values[(j * nx + i) as usize];
            for dj in -r..=r {
                let jj = j + dj;
                if jj < 0 || jj >= ny {
                    continue;
                }
                for di in -r..=r {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ii = i + di;
                    if ii < 0 || ii >= nx {
                        continue;
                    }
                    if !b.mask[(jj * nx + ii) as usize] {
                        continue;
                    }
                    let w = weights.get(di, dj);
                    if w != 0.0 {
                        let d = up - u.values[(jj * nx + ii) as usize];
                        acc += w * d * d;
                    }
                }
            }
        }
    }
    acc
}

/// Locality defect `Lambda_eps(u; A, B) = (1/4 eps) sum_{A x B} ...`,
/// symmetric and additive in each argument.
pub fn locality_defect(
    u: &PhaseField,
    a: &CellSet,
    b: &CellSet,
    weights: &PairWeights,
    eps: f64,
) -> f64 {
    pair_sum(u, a, b, weights) / (4.0 * eps)
}

// ---------------------------------------------------------------------------
// eps-traces
// ---------------------------------------------------------------------------

/// A segment of a line (a face of a polyhedral interface).
#[derive(Debug, Clone, Copy)]
pub struct Face {
    pub p0: [f64; 2],
    pub p1: [f64; 2],
    /// `z1` is taken on the side the normal points away from.
    pub z1_on_negative_side: bool,
}

impl Face {
    pub fn length(&self) -> f64 {
        (self.p1[0] - self.p0[0]).hypot(self.p1[1] - self.p0[1])
    }

    /// Unit normal (left of the direction p0 -> p1).
    pub fn normal(&self) -> [f64; 2] {
        let tx = (self.p1[0] - self.p0[0]) / self.length();
        let ty = (self.p1[1] - self.p0[1]) / self.length();
        [-ty, tx]
    }

    pub fn point_at(&self, s: f64) -> [f64; 2] {
        [self.p0[0] + s * (self.p1[0] - self.p0[0]), self.p0[1] + s * (self.p1[1] - self.p0[1])]
    }

    /// Signed distance of `x` from the face line along the normal.
    pub fn signed_dist(&self, x: f64, y: f64) -> f64 {
        let n = self.normal();
        (x - self.p0[0]) * n[0] + (y - self.p0[1]) * n[1]
    }

    /// Arc-length coordinate of the projection of `(x, y)` on the face.
    pub fn tangent_coord(&self, x: f64, y: f64) -> f64 {
        let len = self.length();
        let tx = (self.p1[0] - self.p0[0]) / len;
        let ty = (self.p1[1] - self.p0[1]) / len;
        (x - self.p0[0]) * tx + (y - self.p0[1]) * ty
    }
}

/// An exact interface description: faces plus the side assignment.
#[derive(Debug, Clone)]
pub struct PolyhedralPhase {
    pub faces: Vec<Face>,
}

/// The eps-trace gap
/// `int_Sigma int_{h : y + eps h in Omega} hatJ(h) |u(y + eps h) - v(y)| dh dy`.
pub fn eps_trace_gap(
    u: &PhaseField,
    sigma: &Face,
    v: &dyn Fn(f64, f64) -> f64,
    hat: &HatKernel,
    eps: f64,
) -> f64 {
    let (gy, gwy) = num::gauss_legendre(32);
    let (ga, gwa) = num::gauss_legendre(32);
    let len = sigma.length();
    let mut total = 0.0;
    for (sy, wy) in gy.iter().zip(&gwy) {
        let s = 0.5 * (sy + 1.0);
        let p = sigma.point_at(s);
        let vy = v(p[0], p[1]);
        // polar integral in h, radial panels toward the singular origin
        let mut inner = 0.0f64;
        let mut hi = 40.0f64;
        for _ in 0..40 {
            let lo = 0.5 * hi;
            inner += num::adaptive_quad(lo, hi, 1e-9 * (1.0 + inner.abs()), &|r| {
                let jr = hat.eval_radial(r);
                if jr <= 0.0 {
                    return 0.0;
                }
                let mut ang = 0.0;
                for (a, wa) in ga.iter().zip(&gwa) {
                    let th = std::f64::consts::PI * (a + 1.0);
                    let (hx, hy) = (r * th.cos(), r * th.sin());
                    let (qx, qy) = (p[0] + eps * hx, p[1] + eps * hy);
                    if u.contains(qx, qy) {
                        ang += wa * (u.eval(qx, qy) - vy).abs();
                    }
                }
                jr * r * ang * std::f64::consts::PI
            });
            hi = lo;
            if hi < 1e-9 {
                break;
            }
        }
        total += wy * inner;
    }
    total * 0.5 * len
}

// ---------------------------------------------------------------------------
// Limit functional and recovery fields
// ---------------------------------------------------------------------------

/// `F_0(u) = int_{J_u} sigma(x, nu(x)) dH^1(x)` by per-face Gauss
/// quadrature of the surface tension.
pub fn limit_energy(phase: &PolyhedralPhase, tension: &TensionProblem, order: usize) -> Result<f64> {
    let (gx, gw) = num::gauss_legendre(order.max(2));
    let mut total = 0.0;
    for face in &phase.faces {
        let nu = face.normal();
        let mut acc = 0.0;
        for (x, w) in gx.iter().zip(&gw) {
            let s = 0.5 * (x + 1.0);
            let p = face.point_at(s);
            acc += w * tension.tension(&p, &nu)?;
        }
        total += acc * 0.5 * face.length();
    }
    Ok(total)
}

/// A family of optimal profiles along a face, solved at Chebyshev nodes in
/// the normalized frame and centered per node.
pub struct RecoveryFamily {
    pub face: Face,
    /// arc-length positions of the solved profiles
    pub nodes: Vec<f64>,
    /// centered profiles in the normalized frame `X_{-1}^{1}`
    pub profiles: Vec<MonotoneProfile>,
}

impl RecoveryFamily {
    /// Solve the directional problem at Chebyshev nodes along the face.
    pub fn build(
        kernel: &KernelSpec,
        potential: &PotentialSpec,
        face: Face,
        n_nodes: usize,
        opts: &SolveOpts,
    ) -> Result<Self> {
        let nu = face.normal();
        let kern = kernel.directional(&nu)?;
        let len = face.length();
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut profiles = Vec::with_capacity(n_nodes);
        for k in 0..n_nodes {
            // Chebyshev points on (0, 1)
            let s = 0.5 - 0.5 * (std::f64::consts::PI * (2.0 * k as f64 + 1.0) / (2.0 * n_nodes as f64)).cos();
            let p = face.point_at(s);
            let pot = potential.at(&p);
            let solved = solve_profile(&kern, &pot, opts).map_err(|_| Error::MissingProfile { node: s * len })?;
            let (centered, _) = center_profile(&solved.profile);
            // normalize to X_{-1}^{1} on a symmetric grid covering the shift
            let (a, b) = (pot.a, pot.b);
            let r = centered.first_node().abs().max(centered.last_node().abs());
            let n_sym = (2.0 * r / centered.dt()).round() as usize + 1;
            let normalized = MonotoneProfile::from_fn(r, n_sym, -1.0, 1.0, |t| {
                (2.0 * centered.eval(t) - a - b) / (b - a)
            })?;
            nodes.push(s);
            profiles.push(normalized);
        }
        Ok(Self { face, nodes, profiles })
    }

    /// Normalized profile value at arc fraction `s`, linear between nodes.
    fn eval(&self, s: f64, t: f64) -> f64 {
        let n = self.nodes.len();
        if n == 1 || s <= self.nodes[0] {
            return self.profiles[0].eval(t);
        }
        if s >= self.nodes[n - 1] {
            return self.profiles[n - 1].eval(t);
        }
        let mut k = 0;
        while k + 1 < n && self.nodes[k + 1] < s {
            k += 1;
        }
        let f = (s - self.nodes[k]) / (self.nodes[k + 1] - self.nodes[k]);
        (1.0 - f) * self.profiles[k].eval(t) + f * self.profiles[k + 1].eval(t)
    }

    /// Half-width beyond which every node profile is within `omega/2` of
    /// its asymptotic values.
    pub fn centering_radius(&self, omega: f64) -> f64 {
        let mut r = 0.0f64;
        for g in &self.profiles {
            for i in 0..g.len() {
                let v = g.values()[i];
                if v > -1.0 + omega / 2.0 && v < 1.0 - omega / 2.0 {
                    r = r.max(g.node(i).abs());
                }
            }
        }
        r + 2.0 * self.profiles[0].dt()
    }
}

/// Glue scaled optimal profiles across one face: outside a layer of width
/// `eps R'(omega)` the field equals the wells exactly; inside, the
/// stretched-clamped profile is transported by the affine transition map.
pub fn build_recovery(
    family: &RecoveryFamily,
    potential: &PotentialSpec,
    rect: Rect,
    n: usize,
    eps: f64,
    omega: f64,
) -> Result<PhaseField> {
    if eps <= 0.0 || omega <= 0.0 || omega >= 2.0 {
        return Err(Error::Domain("recovery needs eps > 0, omega in (0, 2)".into()));
    }
    let a_omega = 1.0 / (1.0 - omega / 2.0);
    let face = &family.face;
    let len = face.length();
    let flip = if face.z1_on_negative_side { 1.0 } else { -1.0 };
    let mut field = PhaseField::new(rect, n, n, potential.growth_m.max(10.0))?;
    for j in 0..n {
        for i in 0..n {
            let (x, y) = field.center(i, j);
            let t = face.signed_dist(x, y) * flip;
            let s = (face.tangent_coord(x, y) / len).clamp(0.0, 1.0);
            let p = face.point_at(s);
            // normalized, stretched, clamped profile value at the face foot
            let g = family.eval(s, t / eps);
            let stretched = (a_omega * g).clamp(-1.0, 1.0);
            let (z1, z2) = ((potential.wells.z1)(&p), (potential.wells.z2)(&p));
            let val = 0.5 * (z2 - z1) * stretched + 0.5 * (z1 + z2);
            // transport along the normal by the affine transition map
            let xp = [(x - p[0]), (y - p[1])];
            let v = crate::potential::transition_map(&potential.wells, 1.0, &p, &xp, val);
            field.values[j * n + i] = v;
        }
    }
    Ok(field)
}

/// One row of a sharp-interface sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub eps: f64,
    pub omega: f64,
    pub f_eps: f64,
    pub f0: f64,
    pub gap: f64,
    pub nonlocal: f64,
    pub potential: f64,
}

/// Recovery-field energies against the limit functional across an eps
/// schedule (`omega = sqrt(eps)` by default).
pub fn gamma_sweep(
    phase: &PolyhedralPhase,
    kernel: &KernelSpec,
    potential: &PotentialSpec,
    rect: Rect,
    n: usize,
    eps_list: &[f64],
    omega_of_eps: &dyn Fn(f64) -> f64,
    opts: &SolveOpts,
) -> Result<Vec<SweepRow>> {
    if eps_list.is_empty() {
        return Err(Error::Domain("gamma sweep needs a nonempty eps list".into()));
    }
    if phase.faces.len() != 1 {
        return Err(Error::Domain("the recovery construction runs one face per sweep".into()));
    }
    let tension = TensionProblem::new(kernel, potential, opts.clone());
    let f0 = limit_energy(phase, &tension, 8)?;
    let family = RecoveryFamily::build(kernel, potential, phase.faces[0], 7, opts)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let omega = omega_of_eps(eps);
        let u = build_recovery(&family, potential, rect, n, eps, omega)?;
        let weights = PairWeights::build(kernel, eps, u.dx())?;
        let (nl, pot) = energy_eps_split(&u, &weights, potential, eps);
        let f_eps = nl + pot;
        rows.push(SweepRow { eps, omega, f_eps, f0, gap: f_eps - f0, nonlocal: nl, potential: pot });
    }
    Ok(rows)
}

/// Project to `[z1(x), z2(x)]`, then threshold to the nearer well with the
/// `delta` rule of the compactness argument; returns the two-valued field
/// and the L^1 gap.
pub fn extract_phase(u: &PhaseField, potential: &PotentialSpec, delta: f64) -> (PhaseField, f64) {
    let mut cp = u.clone();
    for j in 0..u.ny {
        for i in 0..u.nx {
            let (x, y) = u.center(i, j);
            let (z1, z2) = ((potential.wells.z1)(&[x, y]), (potential.wells.z2)(&[x, y]));
            let projected = u.get(i, j).clamp(z1, z2);
            cp.values[j * u.nx + i] = if (projected - z2).abs() <= delta { z2 } else { z1 };
        }
    }
    let gap = u.l1_distance(&cp);
    (cp, gap)
}
