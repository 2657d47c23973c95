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

    // raw gemm at recurrent shape
    let a = Array2::from_shape_fn((b, hidden), |_| rng.random_range(-1.0..1.0f64));
    let u = Array2::from_shape_fn((hidden, 4 * hidden), |_| rng.random_range(-1.0..1.0f64));
    let n = 20000;
    let start = Instant::now();
    let mut acc = 0.0;
    for _ in 0..n {
        let c = a.dot(&u);
        acc += c[[0, 0]];
    }
    let el = start.elapsed().as_secs_f64();
    let flops = 2.0 * (b * hidden * 4 * hidden) as f64 * n as f64;
    println!("recurrent gemm {b}x{hidden} * {hidden}x{}: {:.2} GFLOP/s (acc {acc:.1})", 4*hidden, flops / el / 1e9);

    // big gemm
    let bigx = Array2::from_shape_fn((t * b, hidden), |_| rng.random_range(-1.0..1.0f64));
    let w = Array2::from_shape_fn((hidden, 4 * hidden), |_| rng.random_range(-1.0..1.0f64));
    let n2 = 2000;
    let start = Instant::now();
    let mut acc2 = 0.0;
    for _ in 0..n2 {
        let c = bigx.dot(&w);
        acc2 += c[[0, 0]];
    }
    let el2 = start.elapsed().as_secs_f64();
    let flops2 = 2.0 * (t * b * hidden * 4 * hidden) as f64 * n2 as f64;
    println!("stacked gemm {}x{hidden} * {hidden}x{}: {:.2} GFLOP/s (acc {acc2:.1})", t*b, 4*hidden, flops2 / el2 / 1e9);

    // forward
    let n3 = 200;
    let start = Instant::now();
    for _ in 0..n3 {
        let _ = lstm_forward(&disc, &input, &h0, &h0.clone()).unwrap();
    }
    let fwd = start.elapsed().as_secs_f64() / n3 as f64;
    println!("disc forward (B={b}, T={t}): {:.3} ms", fwd * 1e3);

    // backward
    let (h, cache) = lstm_forward(&disc, &input, &h0, &h0.clone()).unwrap();
    let gh = SeqBatch::new(h.data().clone(), b).unwrap();
    let start = Instant::now();
    for _ in 0..n3 {
        let _ = lstm_backward(&disc, &cache, &gh).unwrap();
    }
    let bwd = start.elapsed().as_secs_f64() / n3 as f64;
    println!("disc backward: {:.3} ms", bwd * 1e3);

    // exp throughput
    let mut v = vec![0.5f64; t * b * 4 * hidden];
    let start = Instant::now();
    for _ in 0..100 {
        for x in v.iter_mut() { *x = 1.0 / (1.0 + (-*x).exp()); }
    }
    let el = start.elapsed().as_secs_f64();
    println!("sigmoid: {:.1} M/s (v0 {})", 100.0 * v.len() as f64 / el / 1e6, v[0]);
}
