use airy_nonlocal::funcspec::{Domain, FunctionSpec};
use airy_nonlocal::spectral::{kappa_hat, delta};
use airy_nonlocal::{ALPHA, ALPHA2};
use num_complex::Complex64;

fn main() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let k_one = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
    let lam = c(424.8, 0.0);
    for (name, mu) in [("l", lam), ("a*l", ALPHA * lam), ("a2*l", ALPHA2 * lam)] {
        let v = kappa_hat(&k_one, mu).unwrap();
        println!("kappa_hat({name}) = {} (|.|={:.3e})", v.value, v.value.norm());
    }
    let d = delta(&k_one, lam).unwrap();
    println!("Delta = {} (|.|={:.3e})", d.value, d.value.norm());
    // closed form check: kappa_hat(mu) = (1 - e^{-i mu})/(i mu)
    let mu = ALPHA * lam;
    let want = (c(1.0, 0.0) - (-Complex64::i() * mu).exp()) / (Complex64::i() * mu);
    println!("closed form a*l: {want}");
}
