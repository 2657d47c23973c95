use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::time::Instant;

#[inline]
fn sigmoid(x: f64) -> f64 { 1.0 / (1.0 + (-x).exp()) }
#[inline]
fn tanh_exp(x: f64) -> f64 { 2.0 / (1.0 + (-2.0 * x).exp()) - 1.0 }

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let (t, feat, hd, b) = (33usize, 12usize, 32usize, 64usize);
    let rows = t * b;
    let x = Array2::from_shape_fn((rows, feat), |_| rng.random_range(0.0..1.0f64));
    let w = Array2::from_shape_fn((4 * hd, feat), |_| rng.random_range(-0.2..0.2f64));
    let u = Array2::from_shape_fn((4 * hd, hd), |_| rng.random_range(-0.2..0.2f64));
    let h = Array2::from_shape_fn((b, hd), |_| rng.random_range(-0.5..0.5f64));
    let n = 300;

    // phase 1: px gemm
    let mut gates = Array2::zeros((rows, 4 * hd));
    let start = Instant::now();
    for _ in 0..n { general_mat_mul(1.0, &x, &w.t(), 0.0, &mut gates); }
    println!("px gemm: {:.3} ms", start.elapsed().as_secs_f64() / n as f64 * 1e3);

    // phase 2: recurrent gemms into block views
    let start = Instant::now();
    for _ in 0..n {
        for step in 0..t {
            let mut blk = gates.slice_mut(s![step * b..(step + 1) * b, ..]);
            general_mat_mul(1.0, &h, &u.t(), 1.0, &mut blk);
        }
    }
    println!("rec gemms into views: {:.3} ms", start.elapsed().as_secs_f64() / n as f64 * 1e3);

    // phase 2b: recurrent gemms into owned
    let start = Instant::now();
    let mut acc = 0.0;
    for _ in 0..n {
        for _step in 0..t {
            let mut out = Array2::zeros((b, 4 * hd));
            general_mat_mul(1.0, &h, &u.t(), 0.0, &mut out);
            acc += out[[0, 0]];
        }
    }
    println!("rec gemms into owned: {:.3} ms (acc {acc:.1})", start.elapsed().as_secs_f64() / n as f64 * 1e3);

    // phase 3: activation sweep
    let mut c = vec![0.1f64; b * hd];
    let mut hbuf = vec![0.0f64; b * hd];
    let mut tc = vec![0.0f64; b * hd];
    let start = Instant::now();
    for _ in 0..n {
        let gs = gates.as_slice_mut().unwrap();
        for step in 0..t {
            let base = step * b * 4 * hd;
            for r in 0..b {
                let row = &mut gs[base + r * 4 * hd..base + (r + 1) * 4 * hd];
                let (gi, rest) = row.split_at_mut(hd);
                let (gf, rest) = rest.split_at_mut(hd);
                let (gc, go) = rest.split_at_mut(hd);
                let cp = &mut c[r * hd..(r + 1) * hd];
                let hn = &mut hbuf[r * hd..(r + 1) * hd];
                let tcr = &mut tc[r * hd..(r + 1) * hd];
                for k in 0..hd {
                    gi[k] = sigmoid(gi[k]);
                    gf[k] = sigmoid(gf[k]);
                    gc[k] = tanh_exp(gc[k]);
                    go[k] = sigmoid(go[k]);
                    let cv = gf[k] * cp[k] + gi[k] * gc[k];
                    let tv = tanh_exp(cv);
                    cp[k] = cv;
                    tcr[k] = tv;
                    hn[k] = go[k] * tv;
                }
            }
        }
    }
    println!("activation sweep: {:.3} ms (h0 {})", start.elapsed().as_secs_f64() / n as f64 * 1e3, hbuf[0]);
}
// appended: direct comparison in the same process
#[allow(dead_code)]
fn compare() {}
