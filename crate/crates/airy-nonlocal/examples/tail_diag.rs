// diagnostic: fitted endpoint tail vs brute quadrature of rc_end on [L, L2]
use airy_nonlocal::funcspec::{Domain, FunctionSpec};
use airy_nonlocal::oscint::gl_panels;
use airy_nonlocal::spectral::PairedCtx;
use airy_nonlocal::verify::make_manufactured_invp;
use airy_nonlocal::invp::debug_fitted_tail;
use num_complex::Complex64;

fn main() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let k_one = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
    let case = make_manufactured_invp(&[(c(1.0, 0.0), c(1.0, 0.0))], &k_one);
    let t = 0.5;
    let ctx = PairedCtx::new(&case.problem, t, t);
    let (l, l2) = (30.0f64, 240.0f64);
    for x in [0.2, 0.5, 0.8] {
        let xi = x - 1.0;
        // brute: int_L^{L2} e^{i l xi} rc_end(l) dl on the real ray
        let brute = gl_panels(
            &|s| (Complex64::i() * s * xi).exp() * ctx.rc_end(c(s, 0.0)).unwrap(),
            l, l2, 4000,
        );
        let t1 = debug_fitted_tail(&ctx, 0.0, l, xi);   // fit at L, tail integral with Xi
        let t2 = debug_fitted_tail(&ctx, 0.0, l2, xi);
        let mine = t1 - t2;
        println!("x={x}: brute={:+.6e}{:+.6e}i mine={:+.6e}{:+.6e}i |diff|={:.2e}",
            brute.re, brute.im, mine.re, mine.im, (brute - mine).norm());
    }
}
