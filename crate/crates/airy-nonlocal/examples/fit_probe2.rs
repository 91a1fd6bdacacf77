use airy_nonlocal::funcspec::{Domain, FunctionSpec};
use airy_nonlocal::spectral::PairedCtx;
use airy_nonlocal::verify::make_manufactured_invp;
use airy_nonlocal::invp::debug_fit_probe;
use num_complex::Complex64;

fn main() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let k_one = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
    let case = make_manufactured_invp(&[(c(1.0, 0.0), c(1.0, 0.0))], &k_one);
    let ctx = PairedCtx::new(&case.problem, 0.5, 0.5);
    let pi = std::f64::consts::PI;
    let theta = pi;
    let dir = Complex64::from_polar(1.0, theta);
    let l = 26.0;
    let ss: Vec<f64> = (0..40).map(|i| l * (1.0 + 0.05 * i as f64)).collect();
    let (resid, model) = debug_fit_probe(&ctx, theta, l, &ss);
    println!("fit rms residual = {resid:.3e}");
    let mut worst = (0.0f64, 0.0f64);
    for (&s, m) in ss.iter().zip(&model) {
        let truth = ctx.rc_end(dir * s).unwrap();
        let d = (truth - m).norm();
        if d > worst.1 { worst = (s, d); }
    }
    println!("worst |model - rc_end| = {:.3e} at s = {:.2}", worst.1, worst.0);
    for &s in &[26.0, 35.0, 50.0] {
        let truth = ctx.rc_end(dir * s).unwrap();
        println!("s={s}: rc_end(-s) = {:+.4e}{:+.4e}i", truth.re, truth.im);
    }
}
