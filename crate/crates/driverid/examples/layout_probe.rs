use ndarray::Array2;
fn main() {
    for (m, k, n) in [(1usize, 1usize, 4usize), (2, 1, 4), (1, 3, 12), (2, 2, 8), (64, 32, 128)] {
        let a = Array2::<f64>::zeros((m, k));
        let b = Array2::<f64>::zeros((n, k));
        let c = a.dot(&b.t());
        println!("({m},{k},{n}): std={} strides={:?}", c.is_standard_layout(), c.strides());
    }
}
