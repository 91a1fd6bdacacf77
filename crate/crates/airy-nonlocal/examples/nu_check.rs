// scratch: is rc - oracle == e^{-i l^3 t'} (1/Delta) sum a^j nu1(a^j l)?
use airy_nonlocal::funcspec::{Domain, FunctionSpec};
use airy_nonlocal::invp::right_combination;
use airy_nonlocal::oscint::gl_panels;
use airy_nonlocal::verify::make_manufactured_invp;
use airy_nonlocal::{alpha_pow, ALPHA, ALPHA2};
use num_complex::Complex64;

fn main() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let k_one = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
    let case = make_manufactured_invp(&[(c(1.0, 0.0), c(1.0, 0.0))], &k_one);
    let lam = c(1.7, 0.0);
    let tp = 0.9;
    let got = right_combination(&case.problem, lam, tp).unwrap().value;
    let i = Complex64::i();
    // oracle: time transform of the exact right-trace combination
    let exact_trace = |j: u32, s: f64| (i).powu(j) * (i * (1.0 + s)).exp();
    let oracle = gl_panels(&|s| {
        let combo = exact_trace(2, s) + i*lam*exact_trace(1, s) - lam*lam*exact_trace(0, s);
        (-i*lam*lam*lam*s).exp() * combo
    }, 0.0, tp, 400);
    // nu1 term
    let u = |x: f64, t: f64| (i*(x + t)).exp();
    let nu1 = |mu: Complex64| -> Complex64 {
        gl_panels(&|y| {
            let inner = gl_panels(&|z| u(z, tp) * (-i*mu*z).exp(), y, 1.0, 200);
            (i*mu*y).exp() * inner
        }, 0.0, 1.0, 200)
    };
    let kh = |mu: Complex64| gl_panels(&|y| (-i*mu*y).exp(), 0.0, 1.0, 200);
    let dl = kh(lam) + ALPHA*kh(ALPHA*lam) + ALPHA2*kh(ALPHA2*lam);
    let nsum: Complex64 = (0..3).map(|j| alpha_pow(j)*nu1(alpha_pow(j)*lam)).sum();
    let nu_term = (-i*lam*lam*lam*tp).exp() / dl * nsum;
    println!("got          = {got}");
    println!("oracle       = {oracle}");
    println!("oracle+nu    = {}", oracle + nu_term);
    println!("diff         = {:.3e}", (got - (oracle + nu_term)).norm());
}
