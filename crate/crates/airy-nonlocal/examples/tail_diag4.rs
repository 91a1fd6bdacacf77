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
    let l = 26.0f64;
    let x = 0.2f64;
    let xi: f64 = x - 1.0;
    // Cesaro-style tail: average truncations over one oscillation period to
    // damp the conditional tail; integrand amplitude ~ c/s so the averaged
    // truncation error is ~ c/S^2-level
    let period = 2.0 * pi / xi.abs();
    let s_big = 700.0f64;
    let n_avg = 16;
    let mut avg = c(0.0, 0.0);
    let base = gl_panels(
        &|s| {
            let lam = dir * s;
            let amp = (-Complex64::i() * lam).exp() * ctx.rc_end(lam).unwrap();
            (Complex64::i() * lam * x).exp() * amp * dir
        },
        l, s_big, 40000,
    );
    for k in 0..n_avg {
        let extra = period * k as f64 / n_avg as f64;
        let seg = gl_panels(
            &|s| {
                let lam = dir * s;
                let amp = (-Complex64::i() * lam).exp() * ctx.rc_end(lam).unwrap();
                (Complex64::i() * lam * x).exp() * amp * dir
            },
            s_big, s_big + extra, 400,
        );
        avg += base + seg;
    }
    avg /= n_avg as f64;
    let t1 = debug_fitted_tail_plus(&ctx, theta, l, x);
    println!("averaged brute tail  = {:+.6e}{:+.6e}i", avg.re, avg.im);
    println!("fitted tail          = {:+.6e}{:+.6e}i", t1.re, t1.im);
    println!("|diff| = {:.3e}", (avg - t1).norm());
}
