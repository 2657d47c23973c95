// Throwaway perf probe for one epoch of adversarial training at default scale.
use driverid::ndcore::*;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::time::Instant;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let (t, feat, hidden, noise_dim, b) = (33usize, 12usize, 32usize, 8usize, 32usize);
    let disc = LstmParams::init(feat, hidden, &mut rng);
    let disc_proj = DenseParams::init(hidden, 1, 0.2, &mut rng);
    let gen = LstmParams::init(noise_dim, hidden, &mut rng);
    let gen_proj = DenseParams::init(hidden, feat, 0.2, &mut rng);

    let mk = |rows: usize, cols: usize, rng: &mut ChaCha12Rng| {
        Array2::from_shape_fn((rows, cols), |_| rng.random_range(0.0..1.0))
    };

    let batches = 61;
    let start = Instant::now();
    for _ in 0..batches {
        // disc step: gen fwd B, disc fwd 2B full bwd
        let noise = SeqBatch::new(mk(t * b, noise_dim, &mut rng), b).unwrap();
        let h0g = Array2::zeros((b, hidden));
        let (hg, _cg) = lstm_forward(&gen, &noise, &h0g, &h0g.clone()).unwrap();
        let fake = gen_proj.forward(hg.data()).mapv(sigmoid);
        let real = mk(t * 2 * b, feat, &mut rng); // stand-in for stacking
        let _ = fake;
        let big = SeqBatch::new(real, 2 * b).unwrap();
        let h0d = Array2::zeros((2 * b, hidden));
        let (hd, cd) = lstm_forward(&disc, &big, &h0d, &h0d.clone()).unwrap();
        let pre = disc_proj.forward(hd.data());
        let s = pre.mapv(sigmoid);
        let ds = &s * 1e-3;
        let (_pg, dh) = disc_proj.backward(hd.data(), &ds);
        let _ = lstm_backward(&disc, &cd, &SeqBatch::new(dh, 2 * b).unwrap()).unwrap();

        // 3 gen steps
        for _ in 0..3 {
            let noise = SeqBatch::new(mk(t * b, noise_dim, &mut rng), b).unwrap();
            let h0g = Array2::zeros((b, hidden));
            let (hg, cg) = lstm_forward(&gen, &noise, &h0g, &h0g.clone()).unwrap();
            let preg = gen_proj.forward(hg.data());
            let fake = preg.mapv(sigmoid);
            let fb = SeqBatch::new(fake.clone(), b).unwrap();
            let h0d = Array2::zeros((b, hidden));
            let (hd, cd) = lstm_forward(&disc, &fb, &h0d, &h0d.clone()).unwrap();
            let pre = disc_proj.forward(hd.data());
            let s = pre.mapv(sigmoid);
            let ds = &s * 1e-3;
            let (_pg, dh) = disc_proj.backward(hd.data(), &ds);
            let (dx, _, _) = lstm_backward_inputs(&disc, &cd, &SeqBatch::new(dh, b).unwrap()).unwrap();
            let dpre = &dx * &fake.mapv(|v| v * (1.0 - v));
            let (_gg, dhg) = gen_proj.backward(hg.data(), &dpre);
            let _ = lstm_backward(&gen, &cg, &SeqBatch::new(dhg, b).unwrap()).unwrap();
        }
    }
    let per_epoch = start.elapsed().as_secs_f64();
    println!("one epoch ({batches} batches): {per_epoch:.2} s; 200 epochs ~ {:.1} min", per_epoch * 200.0 / 60.0);
}
