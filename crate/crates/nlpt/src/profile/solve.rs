//! Profile solvers: projected descent onto the isotone cone and the
//! damped Picard fixed-point iteration for integrable unit-mass kernels.

use crate::error::Error;
use crate::kernel::LatticeKernel;
use crate::potential::Potential1d;
use crate::profile::{energy_1d, hat_interaction_field, MonotoneProfile, SolveOpts};
use crate::Result;

/// Euclidean projection onto nondecreasing sequences (pool adjacent
/// violators), followed by clamping to `[lo, hi]`.
pub fn isotone_project(v: &mut [f64], lo: f64, hi: f64) {
    let n = v.len();
    // blocks as (mean, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(n);
    for &x in v.iter() {
        let mut mean = x;
        let mut count = 1usize;
        while let Some(&(pm, pc)) = blocks.last() {
            if pm <= mean {
                break;
            }
            blocks.pop();
            mean = (pm * pc as f64 + mean * count as f64) / (pc + count) as f64;
            count += pc;
        }
        blocks.push((mean, count));
    }
    let mut i = 0;
    for (mean, count) in blocks {
        let m = mean.clamp(lo, hi);
        for _ in 0..count {
            v[i] = m;
            i += 1;
        }
    }
}

/// Gradient field of the energy per unit measure: `-L_hat g + dW(g)`,
/// which vanishes at interior stationary points.
fn gradient_field(gamma: &MonotoneProfile, lat: &LatticeKernel, pot: &Potential1d, out: &mut [f64]) {
    hat_interaction_field(gamma, lat, out);
    for (o, &v) in out.iter_mut().zip(gamma.values()) {
        *o += pot.dw(v);
    }
}

/// Sup-norm of the unit-step projected gradient mapping
/// `|g - P(g - r)|_inf` with `r` the gradient field; equals the stationarity
/// defect with active monotonicity constraints accounted for.
pub fn projected_grad_norm(gamma: &MonotoneProfile, lat: &LatticeKernel, pot: &Potential1d) -> f64 {
    let n = gamma.len();
    let mut r = vec![0.0; n];
    gradient_field(gamma, lat, pot, &mut r);
    let mut cand: Vec<f64> = gamma.values().iter().zip(&r).map(|(v, g)| v - g).collect();
    isotone_project(&mut cand, gamma.tail_a(), gamma.tail_b());
    cand.iter()
        .zip(gamma.values())
        .map(|(c, v)| (c - v).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct DescentOutput {
    pub profile: MonotoneProfile,
    pub energy_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub projected_grad: f64,
}

/// Projected gradient descent with Nesterov acceleration, monotone
/// restarts and Armijo backtracking; every accepted step is an isotone
/// projection, so iterates stay in the cone.
pub fn solve_profile_descent(
    lat: &LatticeKernel,
    pot: &Potential1d,
    init: &MonotoneProfile,
    opts: &SolveOpts,
) -> Result<DescentOutput> {
    let n = init.len();
    let (a, b) = (init.tail_a(), init.tail_b());
    let mut gamma = init.clone();
    isotone_project(gamma.values_mut(), a, b);
    let mut energy = energy_1d(&gamma, lat, pot)?;
    let mut trace = vec![energy];

    // Lipschitz estimate for the gradient field
    let hat_sum: f64 = lat.hat[1..].iter().sum::<f64>() + lat.hat_tail_from(lat.k_max + 1);
    let mut curv: f64 = 0.0;
    for i in 0..=32 {
        let t = a + (b - a) * i as f64 / 32.0;
        let h = 1e-6 * (b - a);
        curv = curv.max(((pot.dw(t + h) - pot.dw(t - h)) / (2.0 * h)).abs());
    }
    let lip = 2.0 * hat_sum + 2.0 + curv;
    let mut step = 1.0 / lip;

    let mut r = vec![0.0; n];
    let mut prev = gamma.clone();
    let mut momentum = 0.0f64;
    let mut iterations = 0usize;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        // accelerated trial point
        let mut y = gamma.clone();
        if momentum > 0.0 {
            for i in 0..n {
                let v = gamma.values()[i] + momentum * (gamma.values()[i] - prev.values()[i]);
                y.values_mut()[i] = v;
            }
            isotone_project(y.values_mut(), a, b);
        }
        gradient_field(&y, lat, pot, &mut r);
        let mut accepted = false;
        let mut s = step;
        for _ in 0..40 {
            let mut cand = y.clone();
            for i in 0..n {
                cand.values_mut()[i] = y.values()[i] - s * r[i];
            }
            isotone_project(cand.values_mut(), a, b);
            let e_cand = energy_1d(&cand, lat, pot)?;
            let dd: f64 = cand
                .values()
                .iter()
                .zip(y.values())
                .map(|(c, v)| (c - v) * (c - v))
                .sum();
            if e_cand <= energy - 0.25 * cand.dt() * dd / s.max(1e-300) || dd == 0.0 {
                if e_cand <= energy {
                    prev = std::mem::replace(&mut gamma, cand);
                    energy = e_cand;
                    trace.push(energy);
                    accepted = true;
                    momentum = (momentum.mul_add(momentum, 1.0).sqrt() * 0.5 + 0.5).min(0.95);
                    step = (s * 1.3).min(4.0 / lip);
                }
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            if momentum > 0.0 {
                // momentum restart, retry plainly from gamma
                momentum = 0.0;
                prev = gamma.clone();
                continue;
            }
            step = (step * 0.5).max(1e-6 / lip);
        }
        if iterations % 8 == 0 || !accepted {
            let pg = projected_grad_norm(&gamma, lat, pot);
            if pg < opts.grad_tol {
                converged = true;
                break;
            }
            if !accepted && step <= 1e-6 / lip {
                break;
            }
        }
    }
    let projected_grad = projected_grad_norm(&gamma, lat, pot);
    if projected_grad < opts.grad_tol {
        converged = true;
    }
    Ok(DescentOutput { profile: gamma, energy_trace: trace, iterations, converged, projected_grad })
}

#[derive(Debug, Clone)]
pub struct PicardOutput {
    pub profile: MonotoneProfile,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub damping_used: f64,
}

/// Damped Picard iteration `g <- (1-theta) g + theta P(J * g)` for
/// integrable kernels of unit mass and invertible `Q`; the wells are fixed
/// points and monotonicity is preserved by construction.
pub fn solve_profile_picard(
    lat: &LatticeKernel,
    pot: &Potential1d,
    init: &MonotoneProfile,
    opts: &SolveOpts,
) -> Result<PicardOutput> {
    let mass = lat.mass.ok_or_else(|| Error::Domain("Picard needs an integrable kernel".into()))?;
    if (mass - 1.0).abs() > 1e-6 {
        return Err(Error::Domain(format!("Picard needs unit kernel mass, got {mass}")));
    }
    let n = init.len();
    let (a, b) = (init.tail_a(), init.tail_b());
    let mut gamma = init.clone();
    let mut theta = opts.damping;
    let mut residual = f64::INFINITY;
    let mut iterations = 0usize;
    let mut conv = vec![0.0; n];

    while iterations < 10_000 {
        iterations += 1;
        convolve(&gamma, lat, &mut conv);
        let mut worst = 0.0f64;
        let mut next = gamma.clone();
        for i in 0..n {
            let target = pot.p_inverse(conv[i])?;
            worst = worst.max((target - gamma.values()[i]).abs());
            next.values_mut()[i] = (1.0 - theta) * gamma.values()[i] + theta * target;
        }
        isotone_project(next.values_mut(), a, b);
        if worst > residual * (1.0 + 1e-12) && theta > 1e-3 {
            // oscillation: halve the damping and retry from the old iterate
            theta *= 0.5;
            continue;
        }
        residual = worst;
        gamma = next;
        if residual < opts.picard_tol {
            return Ok(PicardOutput { profile: gamma, residual, iterations, converged: true, damping_used: theta });
        }
    }
    Ok(PicardOutput { profile: gamma, residual, iterations, converged: false, damping_used: theta })
}

/// Lattice convolution `(J * g)(t_i)` against the tent weights (exactly
/// the integral of `J` times the piecewise-linear interpolation of `g`),
/// with constant-tail closure. Its fixed points under `P` coincide with
/// the stationary points of the descent energy: for unit mass,
/// `J * g - g = L_hat g`.
fn convolve(gamma: &MonotoneProfile, lat: &LatticeKernel, out: &mut [f64]) {
    let v = gamma.values();
    let n = v.len();
    let (a, b) = (gamma.tail_a(), gamma.tail_b());
    // beyond k_hi the suffix weight is below 1e-18: close with the tails
    let k_hi = n.min(lat.k_max + 1).min(lat.k_eff);
    let all_tail = lat.hat_tail_from(k_hi);
    for i in 0..n {
        let mut acc = lat.conv_w0 * v[i] + (a + b) * all_tail;
        for k in 1..k_hi {
            let w = lat.hat[k];
            let up = if i + k < n { v[i + k] } else { b };
            let dn = if i >= k { v[i - k] } else { a };
            acc += w * (up + dn);
        }
        out[i] = acc;
    }
}
