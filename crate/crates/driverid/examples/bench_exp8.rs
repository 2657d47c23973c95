use std::time::Instant;

const LOG2_E: f64 = std::f64::consts::LOG2_E;
const LN_2: f64 = std::f64::consts::LN_2;
const SHIFT: f64 = 6_755_399_441_055_744.0;

#[inline]
fn exp8(x: [f64; 8]) -> [f64; 8] {
    let mut y = [0.0f64; 8];
    let mut n = [0.0f64; 8];
    let mut t = [0.0f64; 8];
    let mut p = [0.0f64; 8];
    let mut sc = [0.0f64; 8];
    for l in 0..8 { y[l] = x[l].clamp(-708.0, 708.0) * LOG2_E; }
    for l in 0..8 { n[l] = (y[l] + SHIFT) - SHIFT; }
    for l in 0..8 { t[l] = (y[l] - n[l]) * LN_2; }
    const C: [f64; 11] = [
        1.0 / 3_628_800.0, 1.0 / 362_880.0, 1.0 / 40_320.0, 1.0 / 5_040.0,
        1.0 / 720.0, 1.0 / 120.0, 1.0 / 24.0, 1.0 / 6.0, 0.5, 1.0, 1.0,
    ];
    for l in 0..8 { p[l] = C[0]; }
    for c in &C[1..] {
        for l in 0..8 { p[l] = p[l] * t[l] + c; }
    }
    for l in 0..8 { sc[l] = f64::from_bits((((n[l] as i64) + 1023) as u64) << 52); }
    let mut out = [0.0f64; 8];
    for l in 0..8 { out[l] = p[l] * sc[l]; }
    out
}

fn main() {
    let v: Vec<f64> = (0..1_000_000).map(|i| (i as f64 % 14.0) - 7.0).collect();
    let mut out = vec![0.0f64; v.len()];
    for _ in 0..3 {
        let start = Instant::now();
        for _ in 0..20 {
            for (oc, xc) in out.chunks_exact_mut(8).zip(v.chunks_exact(8)) {
                let mut lanes = [0.0f64; 8];
                lanes.copy_from_slice(xc);
                oc.copy_from_slice(&exp8(lanes));
            }
        }
        let fast = 20.0 * v.len() as f64 / start.elapsed().as_secs_f64() / 1e6;
        println!("exp8 {fast:.0} M/s (out0 {} vs libm {})", out[0], v[0].exp());
    }
}
