use airy_nonlocal::contour::QuadratureSpec;
use airy_nonlocal::funcspec::{Domain, FunctionSpec};
use airy_nonlocal::periodic::eval_periodic;
use airy_nonlocal::verify::make_manufactured_periodic;

fn main() {
    let k_one = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
    let case = make_manufactured_periodic(&[(8, 0)], 1.0, &k_one);
    let quad = QuadratureSpec::default();
    let t = 0.4;
    for x in [0.5, 0.9, 0.99, 0.999, 1.0] {
        let f = eval_periodic(&case.problem, 16, &quad, &[(x, t)]).unwrap();
        let want = case.exact(x, t);
        println!("x={x}: got={:+.6e}{:+.6e}i want={:+.6e}{:+.6e}i err={:.2e}",
            f.values[0].re, f.values[0].im, want.re, want.im,
            (f.values[0] - want).norm());
    }
}
