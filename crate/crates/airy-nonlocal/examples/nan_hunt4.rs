use airy_nonlocal::funcspec::{Domain, FunctionSpec};
use airy_nonlocal::spectral::PairedCtx;
use airy_nonlocal::verify::make_manufactured_invp;
use num_complex::Complex64;

fn main() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let k_one = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
    let case = make_manufactured_invp(&[(c(1.0, 0.0), c(1.0, 0.0))], &k_one);
    let ctx = PairedCtx::new(&case.problem, 0.5, 0.5);
    // end coefficients at lam^3 for s = 424.8
    let lam = c(424.8, 0.0);
    let lam3 = lam * lam * lam;
    let il3 = Complex64::i() * lam3;
    for (name, h) in [("h0", &case.problem.boundary0), ("h1", &case.problem.boundary1), ("h2", &case.problem.nonlocal)] {
        let v = h.value(0.5);
        let d = h.derivative(0.5);
        let e = -(v / il3 + d / (il3 * il3));
        println!("{name}: value={v} deriv={d} end={e}");
    }
    let r = ctx.rc_end(lam);
    println!("rc_end = {r:?}");
}
