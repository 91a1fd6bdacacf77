// diagnostic: equal-t error vs truncation radius
use airy_nonlocal::funcspec::{Domain, FunctionSpec};
use airy_nonlocal::invp::{solve_invp, SolverConfig, TPrimePolicy, ContourVariant};
use airy_nonlocal::verify::make_manufactured_invp;
use num_complex::Complex64;

fn main() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let k_one = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
    let case = make_manufactured_invp(&[(c(1.0, 0.0), c(1.0, 0.0))], &k_one);
    let pts = vec![(0.2, 0.5), (0.5, 0.5), (0.8, 0.5)];
    for variant in [ContourVariant::CorollaryE, ContourVariant::TheoremD] {
        for l in [0.0, 40.0, 80.0, 160.0] {
            let mut cfg = SolverConfig { t_prime: TPrimePolicy::EqualToT, variant, ..Default::default() };
            cfg.quad.truncation_l = l;
            let f = solve_invp(&case.problem, &cfg, &pts).unwrap();
            let errs: Vec<String> = pts.iter().enumerate()
                .map(|(i, &(x, t))| format!("{:.2e}", (f.values[i] - case.exact(x, t)).norm()))
                .collect();
            println!("{variant:?} L={l:>5}: errs = {errs:?}  est = {:.2e}", f.max_est_error());
        }
    }
}
