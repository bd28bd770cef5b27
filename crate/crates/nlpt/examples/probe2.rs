use nlpt::kernel::KernelSpec;
use nlpt::potential::manufacture_potential;
use nlpt::profile::*;

fn main() {
    let kern = KernelSpec::gaussian(1, 1.0).to_kern1d().unwrap();
    let r = 10.0;
    let gamma0 = MonotoneProfile::from_fn(r, 8193, -1.0, 1.0, |t| (0.5 * t).tanh()).unwrap();
    let manu = manufacture_potential(&gamma0, &kern, 4000).unwrap();
    let pot = manu.at(&[0.0]);
    for n in [8193usize, 32769] {
        let dt = 2.0 * r / (n - 1) as f64;
        let lat = kern.lattice(dt, n + 2);
        let gs = MonotoneProfile::from_fn(r, n, -1.0, 1.0, |t| (0.5 * t).tanh()).unwrap();
        let mut worst = (0.0f64, 0usize);
        for i in 1..n - 1 {
            let res = (apply_lj(&gs, &lat, i) - pot.dw(gs.values()[i])).abs();
            if res > worst.0 { worst = (res, i); }
        }
        let t = gs.node(worst.1);
        println!("n={n}: sup residual {:.4e} at t = {t:.3} (gamma = {:.6})", worst.0, gs.values()[worst.1]);
        // profile of the residual along t
        for &tt in &[-9.0, -6.0, -3.0, -1.0, 0.5, 2.0, 5.0, 8.0, 9.5] {
            let i = ((tt + r) / dt).round() as usize;
            let res = apply_lj(&gs, &lat, i) - pot.dw(gs.values()[i]);
            println!("   t={tt:5.1}: res = {res:+.3e}");
        }
    }
}
