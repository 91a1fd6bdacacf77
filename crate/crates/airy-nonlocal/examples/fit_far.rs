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
    let ss: Vec<f64> = vec![26.0, 40.0, 77.0, 120.0, 200.0, 400.0, 650.0];
    let (_, model) = debug_fit_probe(&ctx, theta, l, &ss);
    for (&s, m) in ss.iter().zip(&model) {
        let truth = ctx.rc_end(dir * s).unwrap();
        println!("s={s:>5}: rc_end={:+.5e}{:+.5e}i model={:+.5e}{:+.5e}i |d|={:.2e} |d|*s={:.3}",
            truth.re, truth.im, m.re, m.im, (truth - m).norm(), (truth - m).norm() * s);
    }
}
