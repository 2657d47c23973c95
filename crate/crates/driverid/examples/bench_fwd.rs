use driverid::ndcore::*;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::time::Instant;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let (t, feat, hidden, b) = (33usize, 12usize, 32usize, 64usize);
    let disc = LstmParams::init(feat, hidden, &mut rng);
    let x = Array2::from_shape_fn((t * b, feat), |_| rng.random_range(0.0..1.0f64));
    let input = SeqBatch::new(x, b).unwrap();
    let h0 = Array2::zeros((b, hidden));
    let n = 500;
    for round in 0..3 {
        let start = Instant::now();
        for _ in 0..n { let _ = lstm_forward(&disc, &input, &h0, &h0.clone()).unwrap(); }
        let fwd = start.elapsed().as_secs_f64() / n as f64;
        let start = Instant::now();
        for _ in 0..n { let _ = lstm_forward_nocache(&disc, &input, &h0, &h0.clone()).unwrap(); }
        let nc = start.elapsed().as_secs_f64() / n as f64;
        let (h, cache) = lstm_forward(&disc, &input, &h0, &h0.clone()).unwrap();
        let gh = SeqBatch::new(h.data().clone(), b).unwrap();
        let start = Instant::now();
        for _ in 0..n { let _ = lstm_backward(&disc, &cache, &gh).unwrap(); }
        let bwd = start.elapsed().as_secs_f64() / n as f64;
        println!("round {round}: fwd {:.3} ms | nocache {:.3} ms | bwd {:.3} ms", fwd * 1e3, nc * 1e3, bwd * 1e3);
    }
}
