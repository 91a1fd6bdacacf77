use airy_nonlocal::contour::QuadratureSpec;
use airy_nonlocal::funcspec::{Domain, FunctionSpec, InterpOrder};
use airy_nonlocal::invp::SolverConfig;
use airy_nonlocal::longtime::solve_homogeneous;
use airy_nonlocal::periodic::eval_periodic;
use airy_nonlocal::verify::make_manufactured_periodic;
use num_complex::Complex64;
use std::time::Instant;

fn main() {
    let k_one = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
    let case = make_manufactured_periodic(&[(8, 0)], 1.0, &k_one);
    let quad = QuadratureSpec::default();

    let t0 = Instant::now();
    let n_fine = 513;
    let pts: Vec<(f64, f64)> = (0..n_fine).map(|i| (i as f64 / 512.0, 0.0)).collect();
    let q0 = eval_periodic(&case.problem, 16, &quad, &pts).unwrap();
    println!("eval_periodic x513: {:?}", t0.elapsed());

    let mut q0v = q0.values.clone();
    q0v[0] = 4.0 * q0v[1] - 6.0 * q0v[2] + 4.0 * q0v[3] - q0v[4];
    q0v[512] = 4.0 * q0v[511] - 6.0 * q0v[510] + 4.0 * q0v[509] - q0v[508];
    let vals: Vec<Complex64> = (0..n_fine)
        .map(|i| case.problem.initial.value(i as f64 / 512.0) - q0v[i])
        .collect();
    let v = FunctionSpec::samples(Domain::Space, vals, (0.0, 1.0), InterpOrder::Cubic).unwrap();
    let cfg = SolverConfig::default();
    let t0 = Instant::now();
    let f = solve_homogeneous(&v, &k_one, &cfg, &[(0.35, 0.8), (0.6, 1.6)]).unwrap();
    println!("v-solve (sampled, ~zero): {:?}  evals={}", t0.elapsed(), f.diagnostics.integrand_evals);

    // an O(1)-magnitude sampled datum
    let vals2: Vec<Complex64> = (0..n_fine)
        .map(|i| {
            let x = i as f64 / 512.0;
            Complex64::new((1.0 - x) * (1.0 - x) * (1.0 - 4.0 * x), 0.0)
        })
        .collect();
    let v2 = FunctionSpec::samples(Domain::Space, vals2, (0.0, 1.0), InterpOrder::Cubic).unwrap();
    let t0 = Instant::now();
    let f2 = solve_homogeneous(&v2, &k_one, &cfg, &[(0.35, 1.0)]).unwrap();
    println!("sampled O(1) datum solve: {:?} evals={}", t0.elapsed(), f2.diagnostics.integrand_evals);
}
