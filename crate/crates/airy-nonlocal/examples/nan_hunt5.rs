use airy_nonlocal::funcspec::{Domain, FunctionSpec};
use airy_nonlocal::spectral::{kappa_hat, reflected_terms, kappa_hat_rotated};
use airy_nonlocal::{ALPHA, ALPHA2};
use num_complex::Complex64;

fn main() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let k_one = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
    let lam = c(424.8, 0.0);
    let terms = reflected_terms(&k_one);
    let kh = kappa_hat_rotated(&terms, lam);
    println!("kh[0] = {}", kh[0]);
    println!("kh[1] = {}", kh[1]);
    println!("kh[2] = {}", kh[2]);
    let one = c(1.0, 0.0);
    let e0 = c(-1.3e-8, 0.9e-9);
    let l2 = lam * lam;
    let num = l2 * e0 * ((one - ALPHA) * kh[1] + (one - ALPHA2) * kh[2]);
    println!("num piece = {num}");
    let dl = ALPHA * kh[1] + ALPHA2 * kh[2] + kh[0];
    println!("dl = {dl}");
    println!("ratio = {}", num / dl);
    // compare engine vs kappa_hat()
    let v = kappa_hat(&k_one, ALPHA * lam).unwrap().value;
    println!("kappa_hat(a l) = {v}");
}
