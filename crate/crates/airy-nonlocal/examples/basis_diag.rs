// per-basis-function check: rotated tail vs brute along-the-ray integration
use airy_nonlocal::invp::debug_basis_tail;
use airy_nonlocal::oscint::gl_panels;
use airy_nonlocal::ALPHA;
use num_complex::Complex64;

fn main() {
    let pi = std::f64::consts::PI;
    let theta = pi / 3.0;
    let dir = Complex64::from_polar(1.0, theta);
    let l = 26.0f64;
    let z0 = dir * l;
    let x = 0.2f64;
    for p in 0..4i32 {
        for live in [false, true] {
            if live && p == 0 { continue; }
            // brute: int_L^{B} e^{i lam x} phi(lam) dlam along the ray
            let brute = gl_panels(
                &|s| {
                    let lam = dir * s;
                    let mut phi: Complex64 = (l / s).powi(p).into();
                    if live {
                        phi *= (-Complex64::i() * ALPHA * (lam - z0)).exp();
                    }
                    (Complex64::i() * lam * x).exp() * phi * dir
                },
                l, 900.0, 20000,
            );
            let mine = debug_basis_tail(z0, dir, x, p, l, if live { Some(ALPHA) } else { None });
            println!("p={p} live={live}: brute={:+.6e}{:+.6e}i mine={:+.6e}{:+.6e}i diff={:.2e}",
                brute.re, brute.im, mine.re, mine.im, (brute - mine).norm());
        }
    }
}
