use nlpt::kernel::KernelSpec;
use nlpt::potential::{make_quartic_moving, manufacture_potential, WellPair};
use nlpt::profile::*;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    // --- conjugate identity: F(g) vs F°(g^{-1}) ---
    let kern = KernelSpec::gaussian(1, 1.0).to_kern1d().unwrap();
    let pot = make_quartic_moving(WellPair::constant(-1.0, 1.0), Arc::new(|_| 0.25)).at(&[0.0]);
    for n in [513usize, 1025] {
        let r = 7.0;
        let lat = kern.lattice(2.0 * r / (n - 1) as f64, n + 2);
        let g = MonotoneProfile::from_fn(r, n, -1.0, 1.0, |t| (0.8_f64 * t).tanh()).unwrap();
        let f = energy_1d(&g, &lat, &pot).unwrap();
        let inv = invert_profile(&g);
        let fo = conjugate_energy(&inv, &kern, &|t| pot.w(t)).unwrap();
        println!("n={n}: F = {f:.9}, F° = {fo:.9}, rel gap = {:.3e}", (f - fo).abs() / f);
    }

    // --- manufactured pair ---
    let r = 7.0;
    let n = 2049usize;
    let gamma0 = MonotoneProfile::from_fn(r, n, -1.0, 1.0, |t| (0.9_f64 * t).tanh()).unwrap();
    let manu = manufacture_potential(&gamma0, &kern, 3000).unwrap();
    let pot_m = manu.at(&[0.0]);
    println!("[{:?}] manufactured: W(0) = {:.6}, W(-1) = {:.2e}, W(1) = {:.2e}", t0.elapsed(), pot_m.w(0.0), pot_m.w(-1.0), pot_m.w(1.0));

    // certificate of the exact profile
    let cert = certify_optimality(&gamma0, &kern, &pot_m, 1e-6).unwrap();
    println!("[{:?}] certificate(gamma0): sup_gap = {:.3e}, support_gap = {:.3e}, pass = {}", t0.elapsed(), cert.sup_gap, cert.support_gap, cert.pass);

    // EL consistency residual of apply_lj on the exact profile, two grids
    let mut residuals = Vec::new();
    for nn in [4097usize, 8193] {
        let dt = 2.0 * r / (nn - 1) as f64;
        let lat = kern.lattice(dt, nn + 2);
        let gs = MonotoneProfile::from_fn(r, nn, -1.0, 1.0, |t| (0.9_f64 * t).tanh()).unwrap();
        let mut worst = 0.0f64;
        for i in 1..nn - 1 {
            let lhs = apply_lj(&gs, &lat, i);
            let rhs = pot_m.dw(gs.values()[i]);
            worst = worst.max((lhs - rhs).abs());
        }
        println!("[{:?}] n={nn}: EL residual = {:.4e}", t0.elapsed(), worst);
        residuals.push(worst);
    }
    println!("ratio = {:.3}", residuals[1] / residuals[0]);

    // solve from step and compare
    let mut opts = SolveOpts::default();
    opts.r = Some(r);
    opts.n = 1025;
    let solved = solve_profile(&kern, &pot_m, &opts).unwrap();
    println!("[{:?}] solved: energy = {:.9}, pg = {:.2e}, el = {:.2e}, iters = {}, conv = {}",
        t0.elapsed(), solved.energy, solved.projected_grad, solved.el_residual, solved.iterations, solved.converged);
    let (cs, _) = center_profile(&solved.profile);
    let (c0, _) = center_profile(&gamma0);
    let sig = weight_sigma(&kern, 2.0);
    let d = profile_distance(&cs, &c0, &|t| sig.eval(t));
    let dl1 = profile_distance(&cs, &c0, &|_| 1.0);
    println!("weighted-L1 dist = {:.3e}, plain L1 = {:.3e}", d, dl1);
    let cert2 = certify_optimality(&solved.profile, &kern, &pot_m, 1e-6).unwrap();
    println!("[{:?}] certificate(solved): sup_gap = {:.3e}, support_gap = {:.3e}", t0.elapsed(), cert2.sup_gap, cert2.support_gap);
}
