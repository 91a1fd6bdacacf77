fn main() {
    for z in [0.5f64, 2.0, 4.0, 4.1, 10.0, 50.0, 200.0] {
        println!("{z}: Si = {:.15}", airy_nonlocal::periodic::sine_integral(z));
    }
}
