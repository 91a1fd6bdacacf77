// theta = pi real-ray W+ endpoint tail vs brute
use airy_nonlocal::funcspec::{Domain, FunctionSpec};
use airy_nonlocal::oscint::gl_panels;
use airy_nonlocal::spectral::PairedCtx;
use airy_nonlocal::verify::make_manufactured_invp;
use airy_nonlocal::invp::debug_fitted_tail_plus;
use num_complex::Complex64;

fn main() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let k_one = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
    let case = make_manufactured_invp(&[(c(1.0, 0.0), c(1.0, 0.0))], &k_one);
    let ctx = PairedCtx::new(&case.problem, 0.5, 0.5);
    let pi = std::f64::consts::PI;
    let theta = pi;
    let dir = Complex64::from_polar(1.0, theta);
    let (l, l2) = (26.0f64, 200.0f64);
    for x in [0.2, 0.5, 0.8] {
        // brute: int over the outward ray of e^{i lam x} e^{-i lam} rc_end
        let brute = gl_panels(
            &|s| {
                let lam = dir * s;
                let amp = (-Complex64::i() * lam).exp() * ctx.rc_end(lam).unwrap();
                (Complex64::i() * lam * x).exp() * amp * dir
            },
            l, l2, 8000,
        );
        let t1 = debug_fitted_tail_plus(&ctx, theta, l, x);
        let t2 = debug_fitted_tail_plus(&ctx, theta, l2, x);
        let mine = t1 - t2;
        println!("x={x}: brute={:+.6e}{:+.6e}i mine={:+.6e}{:+.6e}i |diff|={:.2e}",
            brute.re, brute.im, mine.re, mine.im, (brute - mine).norm());
    }
}
