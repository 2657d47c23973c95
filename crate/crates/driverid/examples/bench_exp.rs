use driverid::ndcore::{exp_fast, sigmoid};
use std::time::Instant;

fn main() {
    let v: Vec<f64> = (0..1_000_000).map(|i| (i as f64 % 14.0) - 7.0).collect();
    let mut out = vec![0.0f64; v.len()];
    for _ in 0..3 {
        let start = Instant::now();
        for _ in 0..20 { for (o, x) in out.iter_mut().zip(&v) { *o = x.exp(); } }
        let libm = 20.0 * v.len() as f64 / start.elapsed().as_secs_f64() / 1e6;
        let start = Instant::now();
        for _ in 0..20 { for (o, x) in out.iter_mut().zip(&v) { *o = exp_fast(*x); } }
        let fast = 20.0 * v.len() as f64 / start.elapsed().as_secs_f64() / 1e6;
        let start = Instant::now();
        for _ in 0..20 { for (o, x) in out.iter_mut().zip(&v) { *o = sigmoid(*x); } }
        let sig = 20.0 * v.len() as f64 / start.elapsed().as_secs_f64() / 1e6;
        println!("libm exp {libm:.0} M/s | exp_fast {fast:.0} M/s | sigmoid {sig:.0} M/s  (out0 {})", out[0]);
    }
}
