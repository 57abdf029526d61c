//! Placing N points with density g by solving df/du = N / g(f).

use kspace::numerics::{integrate, solve_cdf_ode, SampledFunction};

fn main() -> kspace::Result<()> {
    let g = SampledFunction::from_fn(0.0, std::f64::consts::PI, 4097, |phi| 200.0 * phi.sin())?;
    let n = integrate(&g, 0.0, std::f64::consts::PI)?;
    let sol = solve_cdf_ode(&g, 0.0, std::f64::consts::PI)?;
    println!("N = {n:.4} (exact 400)");
    for i in [1, 10, 100, 200, 300, 390, 399] {
        let u = (i as f64 + 0.5) / 400.0;
        println!("  u {u:.5}  phi {:.5}  acos(1 - 2u) {:.5}", sol.f_of_u.eval(u), (1.0 - 2.0 * u).acos());
    }
    Ok(())
}
