//! Unpacked multiply-accumulate for the per-timestep recurrent products.
//!
//! matrixmultiply packs both operands on every call, which dominates at the
//! small per-step shapes (batch x hidden times hidden x 4*hidden). These
//! kernels stream rows directly: `out[i, :] += lhs[i, k] * rhs[k, :]`. The
//! big stacked products (input weights, parameter gradients) stay on
//! matrixmultiply where packing amortizes.

/// `out (m x n) += lhs (m x k) . rhs (k x n)`, all row-major contiguous.
pub(crate) fn gemm_acc(out: &mut [f64], lhs: &[f64], rhs: &[f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(out.len(), m * n);
    debug_assert_eq!(lhs.len(), m * k);
    debug_assert_eq!(rhs.len(), k * n);

    #[cfg(target_arch = "x86_64")]
    {
        if n >= 4 && fma_available() {
            // Safety: feature presence checked at runtime.
            unsafe { gemm_acc_fma(out, lhs, rhs, m, k, n) };
            return;
        }
    }
    gemm_acc_scalar(out, lhs, rhs, m, k, n);
}

fn gemm_acc_scalar(out: &mut [f64], lhs: &[f64], rhs: &[f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let out_row = &mut out[i * n..(i + 1) * n];
        for kk in 0..k {
            let a = lhs[i * k + kk];
            let rhs_row = &rhs[kk * n..(kk + 1) * n];
            for j in 0..n {
                out_row[j] += a * rhs_row[j];
            }
        }
    }
}

#[cfg(target_arch = "x86_64")]
fn fma_available() -> bool {
    use std::sync::OnceLock;
    static AVAILABLE: OnceLock<bool> = OnceLock::new();
    *AVAILABLE.get_or_init(|| {
        std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma")
    })
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn gemm_acc_fma(out: &mut [f64], lhs: &[f64], rhs: &[f64], m: usize, k: usize, n: usize) {
    use std::arch::x86_64::*;

    // Register-blocked 2 x 16 micro-kernel: accumulators stay in ymm
    // registers across the whole k loop, rhs rows are streamed from L1.
    let m_main = m - m % 2;
    let n_main = n - n % 16;

    let mut i = 0;
    while i < m_main {
        let lhs0 = lhs.as_ptr().add(i * k);
        let lhs1 = lhs.as_ptr().add((i + 1) * k);
        let out0 = out.as_mut_ptr().add(i * n);
        let out1 = out.as_mut_ptr().add((i + 1) * n);
        let mut j = 0;
        while j < n_main {
            let mut acc00 = _mm256_loadu_pd(out0.add(j));
            let mut acc01 = _mm256_loadu_pd(out0.add(j + 4));
            let mut acc02 = _mm256_loadu_pd(out0.add(j + 8));
            let mut acc03 = _mm256_loadu_pd(out0.add(j + 12));
            let mut acc10 = _mm256_loadu_pd(out1.add(j));
            let mut acc11 = _mm256_loadu_pd(out1.add(j + 4));
            let mut acc12 = _mm256_loadu_pd(out1.add(j + 8));
            let mut acc13 = _mm256_loadu_pd(out1.add(j + 12));
            for kk in 0..k {
                let r = rhs.as_ptr().add(kk * n + j);
                let r0 = _mm256_loadu_pd(r);
                let r1 = _mm256_loadu_pd(r.add(4));
                let r2 = _mm256_loadu_pd(r.add(8));
                let r3 = _mm256_loadu_pd(r.add(12));
                let a0 = _mm256_set1_pd(*lhs0.add(kk));
                acc00 = _mm256_fmadd_pd(a0, r0, acc00);
                acc01 = _mm256_fmadd_pd(a0, r1, acc01);
                acc02 = _mm256_fmadd_pd(a0, r2, acc02);
                acc03 = _mm256_fmadd_pd(a0, r3, acc03);
                let a1 = _mm256_set1_pd(*lhs1.add(kk));
                acc10 = _mm256_fmadd_pd(a1, r0, acc10);
                acc11 = _mm256_fmadd_pd(a1, r1, acc11);
                acc12 = _mm256_fmadd_pd(a1, r2, acc12);
                acc13 = _mm256_fmadd_pd(a1, r3, acc13);
            }
            _mm256_storeu_pd(out0.add(j), acc00);
            _mm256_storeu_pd(out0.add(j + 4), acc01);
            _mm256_storeu_pd(out0.add(j + 8), acc02);
            _mm256_storeu_pd(out0.add(j + 12), acc03);
            _mm256_storeu_pd(out1.add(j), acc10);
            _mm256_storeu_pd(out1.add(j + 4), acc11);
            _mm256_storeu_pd(out1.add(j + 8), acc12);
            _mm256_storeu_pd(out1.add(j + 12), acc13);
            j += 16;
        }
        // n remainder for this row pair
        for j in n_main..n {
            let mut s0 = *out0.add(j);
            let mut s1 = *out1.add(j);
            for kk in 0..k {
                let r = *rhs.get_unchecked(kk * n + j);
                s0 += *lhs0.add(kk) * r;
                s1 += *lhs1.add(kk) * r;
            }
            *out0.add(j) = s0;
            *out1.add(j) = s1;
        }
        i += 2;
    }
    // odd final row
    for i in m_main..m {
        let lhs_row = lhs.as_ptr().add(i * k);
        let out_row = out.as_mut_ptr().add(i * n);
        for j in 0..n {
            let mut s = *out_row.add(j);
            for kk in 0..k {
                s += *lhs_row.add(kk) * *rhs.get_unchecked(kk * n + j);
            }
            *out_row.add(j) = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn matches_reference_product() {
        for (m, k, n) in [(1, 1, 1), (2, 3, 5), (4, 7, 4), (8, 32, 128), (3, 5, 6)] {
            let lhs = Array2::from_shape_fn((m, k), |(i, j)| (i * k + j) as f64 * 0.1 - 0.7);
            let rhs = Array2::from_shape_fn((k, n), |(i, j)| (i * n + j) as f64 * 0.01 + 0.2);
            let expected = lhs.dot(&rhs);

            let mut out = vec![0.0; m * n];
            gemm_acc(
                &mut out,
                lhs.as_slice().unwrap(),
                rhs.as_slice().unwrap(),
                m,
                k,
                n,
            );
            for (a, b) in out.iter().zip(expected.iter()) {
                let tol = 1e-12 * b.abs().max(1.0);
                assert!((a - b).abs() < tol, "({m},{k},{n}): {a} vs {b}");
            }

            // scalar path agrees with the dispatched path
            let mut out2 = vec![0.0; m * n];
            gemm_acc_scalar(
                &mut out2,
                lhs.as_slice().unwrap(),
                rhs.as_slice().unwrap(),
                m,
                k,
                n,
            );
            // fused vs separate multiply-add rounding differs by ulps only
            for (a, b) in out.iter().zip(out2.iter()) {
                let tol = 1e-12 * b.abs().max(1.0);
                assert!((a - b).abs() < tol, "({m},{k},{n}) fma/scalar: {a} vs {b}");
            }
        }
    }
}
