// diagnostic: is W-minus == (cubic-oscillatory) + rc_end on the real ray?
use airy_nonlocal::funcspec::{Domain, FunctionSpec};
use airy_nonlocal::spectral::PairedCtx;
use airy_nonlocal::verify::make_manufactured_invp;
use num_complex::Complex64;

fn main() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let k_one = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
    let case = make_manufactured_invp(&[(c(1.0, 0.0), c(1.0, 0.0))], &k_one);
    let t = 0.5;
    let ctx = PairedCtx::new(&case.problem, t, t);
    // average W over one cubic-phase period around s0: the e^{i l^3 t}
    // families average out, leaving the phaseless endpoint part
    for s0 in [20.0f64, 30.0, 45.0] {
        let s1 = (s0.powi(3) + 2.0 * std::f64::consts::PI / t).cbrt();
        let n = 400;
        let mut mean = c(0.0, 0.0);
        for k in 0..n {
            // uniform in the cubic phase variable
            let ph = (k as f64 + 0.5) / n as f64;
            let s = (s0.powi(3) * (1.0 - ph) + s1.powi(3) * ph).cbrt();
            mean += ctx.w_minus(c(s, 0.0)).unwrap().value;
        }
        mean /= n as f64;
        let smid = (0.5 * (s0.powi(3) + s1.powi(3))).cbrt();
        let re = ctx.rc_end(c(smid, 0.0)).unwrap();
        println!(
            "s0={s0:>4}: mean(W)={:+.5e}{:+.5e}i  rc_end={:+.5e}{:+.5e}i  |diff|={:.2e}",
            mean.re, mean.im, re.re, re.im, (mean - re).norm()
        );
    }
}
