use airy_nonlocal::funcspec::{Domain, FunctionSpec};
use airy_nonlocal::spectral::PairedCtx;
use airy_nonlocal::verify::make_manufactured_invp;
use airy_nonlocal::invp::debug_fitted_tail;
use num_complex::Complex64;

fn main() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let k_one = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
    let case = make_manufactured_invp(&[(c(1.0, 0.0), c(1.0, 0.0))], &k_one);
    let ctx = PairedCtx::new(&case.problem, 0.5, 0.5);
    // rc_end values along the ray
    for i in 0..8 {
        let s = 30.0 * (1.0 + 0.11 * i as f64);
        let v = ctx.rc_end(c(s, 0.0));
        println!("rc_end({s:.2}) = {v:?}");
    }
    let t = debug_fitted_tail(&ctx, 0.0, 30.0, -0.5);
    println!("tail = {t}");
}
