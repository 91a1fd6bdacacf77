// phase-average check of the endpoint split on the upper ray (W+)
// and the E- ray (W-)
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
    let pi = std::f64::consts::PI;
    for (name, theta) in [("upper pi/3 (W+)", pi / 3.0), ("lower -pi/3 (W-)", -pi / 3.0)] {
        let dir = Complex64::from_polar(1.0, theta);
        for s0 in [18.0f64, 24.0] {
            let s1 = (s0.powi(3) + 2.0 * pi / t).cbrt();
            let n = 400;
            let mut mean = c(0.0, 0.0);
            for k in 0..n {
                let ph = (k as f64 + 0.5) / n as f64;
                let s = (s0.powi(3) * (1.0 - ph) + s1.powi(3) * ph).cbrt();
                let lam = dir * s;
                let v = if theta > 0.0 {
                    ctx.w_plus(lam).unwrap().value
                } else {
                    ctx.w_minus(lam).unwrap().value
                };
                mean += v;
            }
            mean /= n as f64;
            let smid = (0.5 * (s0.powi(3) + s1.powi(3))).cbrt();
            let lam_mid = dir * smid;
            let e = if theta > 0.0 {
                ctx.n0_end(lam_mid).unwrap()
            } else {
                ctx.rc_end(lam_mid).unwrap()
            };
            println!(
                "{name} s0={s0}: mean={:+.4e}{:+.4e}i end={:+.4e}{:+.4e}i |diff|={:.2e}",
                mean.re, mean.im, e.re, e.im, (mean - e).norm()
            );
        }
    }
}
