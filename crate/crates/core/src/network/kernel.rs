//! Dense matrix products used by the batched evaluator.
//!
//! All matrices are row-major `f64`. Two shapes occur:
//!
//! * [`gemm_nn`]: `C = A·B` (optionally `C += A·B`) with a short inner
//!   dimension (a layer width) and many columns (jet slots times points).
//! * [`gemm_nt`]: `G += D·Aᵀ` where both operands are wide, which is the
//!   weight gradient of a layer.
//!
//! On x86-64 machines with AVX-512 the products run on hand-written
//! register-tiled kernels; elsewhere they go through `matrixmultiply`.
//! Either way the summation order is fixed for given shapes, so repeated
//! runs on one machine are bit-identical.

/// Strided view of a read-only matrix: `data[i * rs + j * cs]`.
#[derive(Clone, Copy)]
pub struct MatRef<'a> {
    pub data: &'a [f64],
    pub rs: usize,
    pub cs: usize,
}

impl<'a> MatRef<'a> {
    pub fn row_major(data: &'a [f64], cols: usize) -> Self {
        Self { data, rs: cols, cs: 1 }
    }

    /// The transpose of a row-major `rows × cols` matrix.
    pub fn transposed(data: &'a [f64], cols: usize) -> Self {
        Self { data, rs: 1, cs: cols }
    }

    fn fits(&self, rows: usize, cols: usize) -> bool {
        rows == 0 || cols == 0 || self.data.len() > (rows - 1) * self.rs + (cols - 1) * self.cs
    }
}

/// `C[m×n] = A[m×k]·B[k×n]`, or `C += A·B` when `accumulate` is set.
/// `B` and `C` are row-major with `n` columns.
pub fn gemm_nn(m: usize, k: usize, n: usize, a: MatRef, b: &[f64], accumulate: bool, c: &mut [f64]) {
    assert!(a.fits(m, k), "A is too small");
    assert!(b.len() >= k * n, "B is too small");
    assert!(c.len() >= m * n, "C is too small");
    if m == 0 || n == 0 {
        return;
    }
    #[cfg(target_arch = "x86_64")]
    if avx512::available() {
        // SAFETY: the CPU supports the enabled features and the asserts
        // above bound every access.
        unsafe { avx512::nn(m, k, n, a, b, accumulate, c) };
        return;
    }
    // SAFETY: same bounds; `c` is a distinct mutable borrow.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            a.rs as isize,
            a.cs as isize,
            b.as_ptr(),
            n as isize,
            1,
            if accumulate { 1.0 } else { 0.0 },
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// `G[m×k] += D[m×n]·A[k×n]ᵀ` with all three matrices row-major.
pub fn gemm_nt(m: usize, k: usize, n: usize, d: &[f64], a: &[f64], g: &mut [f64]) {
    assert!(d.len() >= m * n, "D is too small");
    assert!(a.len() >= k * n, "A is too small");
    assert!(g.len() >= m * k, "G is too small");
    if m == 0 || k == 0 {
        return;
    }
    #[cfg(target_arch = "x86_64")]
    if avx512::available() {
        // SAFETY: as in `gemm_nn`.
        unsafe { avx512::nt(m, k, n, d, a, g) };
        return;
    }
    // SAFETY: bounds asserted above.
    unsafe {
        matrixmultiply::dgemm(
            m,
            n,
            k,
            1.0,
            d.as_ptr(),
            n as isize,
            1,
            a.as_ptr(),
            1,
            n as isize,
            1.0,
            g.as_mut_ptr(),
            k as isize,
            1,
        );
    }
}

#[cfg(target_arch = "x86_64")]
#[allow(clippy::needless_range_loop)]
mod avx512 {
    use super::MatRef;
    use std::arch::x86_64::*;

    pub fn available() -> bool {
        std::arch::is_x86_feature_detected!("avx512f")
    }

    /// Columns per tile in `nn`, as four 8-lane vectors.
    const NR: usize = 32;

    #[target_feature(enable = "avx512f")]
    pub unsafe fn nn(m: usize, k: usize, n: usize, a: MatRef, b: &[f64], acc: bool, c: &mut [f64]) {
        let (ap, bp, cp) = (a.data.as_ptr(), b.as_ptr(), c.as_mut_ptr());
        let mut j = 0;
        while j + NR <= n {
            let mut i = 0;
            while i + 4 <= m {
                tile_nn::<4>(i, j, k, n, ap, a.rs, a.cs, bp, acc, cp);
                i += 4;
            }
            match m - i {
                3 => tile_nn::<3>(i, j, k, n, ap, a.rs, a.cs, bp, acc, cp),
                2 => tile_nn::<2>(i, j, k, n, ap, a.rs, a.cs, bp, acc, cp),
                1 => tile_nn::<1>(i, j, k, n, ap, a.rs, a.cs, bp, acc, cp),
                _ => {}
            }
            j += NR;
        }
        while j < n {
            let width = (n - j).min(8);
            let mask: __mmask8 = if width == 8 { 0xff } else { (1u8 << width) - 1 };
            for i in 0..m {
                let mut s = _mm512_setzero_pd();
                for p in 0..k {
                    let av = _mm512_set1_pd(*ap.add(i * a.rs + p * a.cs));
                    let bv = _mm512_maskz_loadu_pd(mask, bp.add(p * n + j));
                    s = _mm512_fmadd_pd(av, bv, s);
                }
                let dst = cp.add(i * n + j);
                if acc {
                    s = _mm512_add_pd(s, _mm512_maskz_loadu_pd(mask, dst));
                }
                _mm512_mask_storeu_pd(dst, mask, s);
            }
            j += width;
        }
    }

    #[allow(clippy::too_many_arguments)]
    #[inline]
    #[target_feature(enable = "avx512f")]
    unsafe fn tile_nn<const MR: usize>(
        i: usize,
        j: usize,
        k: usize,
        n: usize,
        ap: *const f64,
        rsa: usize,
        csa: usize,
        bp: *const f64,
        acc: bool,
        cp: *mut f64,
    ) {
        let mut s = [[_mm512_setzero_pd(); 4]; MR];
        for p in 0..k {
            let row = bp.add(p * n + j);
            let bv = [
                _mm512_loadu_pd(row),
                _mm512_loadu_pd(row.add(8)),
                _mm512_loadu_pd(row.add(16)),
                _mm512_loadu_pd(row.add(24)),
            ];
            for r in 0..MR {
                let av = _mm512_set1_pd(*ap.add((i + r) * rsa + p * csa));
                for v in 0..4 {
                    s[r][v] = _mm512_fmadd_pd(av, bv[v], s[r][v]);
                }
            }
        }
        for r in 0..MR {
            let dst = cp.add((i + r) * n + j);
            for v in 0..4 {
                let mut x = s[r][v];
                if acc {
                    x = _mm512_add_pd(x, _mm512_loadu_pd(dst.add(8 * v)));
                }
                _mm512_storeu_pd(dst.add(8 * v), x);
            }
        }
    }

    #[target_feature(enable = "avx512f")]
    pub unsafe fn nt(m: usize, k: usize, n: usize, d: &[f64], a: &[f64], g: &mut [f64]) {
        let (dp, ap, gp) = (d.as_ptr(), a.as_ptr(), g.as_mut_ptr());
        macro_rules! dispatch {
            ($i:expr, $j:expr, $mi:expr, $mj:expr) => {
                match ($mi, $mj) {
                    (4, 4) => tile_nt::<4, 4>($i, $j, k, n, dp, ap, gp),
                    (4, 3) => tile_nt::<4, 3>($i, $j, k, n, dp, ap, gp),
                    (4, 2) => tile_nt::<4, 2>($i, $j, k, n, dp, ap, gp),
                    (4, 1) => tile_nt::<4, 1>($i, $j, k, n, dp, ap, gp),
                    (3, 4) => tile_nt::<3, 4>($i, $j, k, n, dp, ap, gp),
                    (3, 3) => tile_nt::<3, 3>($i, $j, k, n, dp, ap, gp),
                    (3, 2) => tile_nt::<3, 2>($i, $j, k, n, dp, ap, gp),
                    (3, 1) => tile_nt::<3, 1>($i, $j, k, n, dp, ap, gp),
                    (2, 4) => tile_nt::<2, 4>($i, $j, k, n, dp, ap, gp),
                    (2, 3) => tile_nt::<2, 3>($i, $j, k, n, dp, ap, gp),
                    (2, 2) => tile_nt::<2, 2>($i, $j, k, n, dp, ap, gp),
                    (2, 1) => tile_nt::<2, 1>($i, $j, k, n, dp, ap, gp),
                    (1, 4) => tile_nt::<1, 4>($i, $j, k, n, dp, ap, gp),
                    (1, 3) => tile_nt::<1, 3>($i, $j, k, n, dp, ap, gp),
                    (1, 2) => tile_nt::<1, 2>($i, $j, k, n, dp, ap, gp),
                    (1, 1) => tile_nt::<1, 1>($i, $j, k, n, dp, ap, gp),
                    _ => unreachable!(),
                }
            };
        }
        let mut i = 0;
        while i < m {
            let mi = (m - i).min(4);
            let mut j = 0;
            while j < k {
                let mj = (k - j).min(4);
                dispatch!(i, j, mi, mj);
                j += mj;
            }
            i += mi;
        }
    }

    #[inline]
    #[target_feature(enable = "avx512f")]
    unsafe fn tile_nt<const MI: usize, const MJ: usize>(
        i: usize,
        j: usize,
        k: usize,
        n: usize,
        dp: *const f64,
        ap: *const f64,
        gp: *mut f64,
    ) {
        let mut s = [[_mm512_setzero_pd(); MJ]; MI];
        let full = n / 8 * 8;
        let mut c = 0;
        while c < full {
            let mut dv = [_mm512_setzero_pd(); MI];
            for r in 0..MI {
                dv[r] = _mm512_loadu_pd(dp.add((i + r) * n + c));
            }
            for q in 0..MJ {
                let av = _mm512_loadu_pd(ap.add((j + q) * n + c));
                for r in 0..MI {
                    s[r][q] = _mm512_fmadd_pd(dv[r], av, s[r][q]);
                }
            }
            c += 8;
        }
        if c < n {
            let mask: __mmask8 = (1u8 << (n - c)) - 1;
            for r in 0..MI {
                let dv = _mm512_maskz_loadu_pd(mask, dp.add((i + r) * n + c));
                for q in 0..MJ {
                    let av = _mm512_maskz_loadu_pd(mask, ap.add((j + q) * n + c));
                    s[r][q] = _mm512_fmadd_pd(dv, av, s[r][q]);
                }
            }
        }
        for r in 0..MI {
            for q in 0..MJ {
                *gp.add((i + r) * k + j + q) += _mm512_reduce_add_pd(s[r][q]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(len: usize, seed: u64) -> Vec<f64> {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..len)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    fn naive_nn(m: usize, k: usize, n: usize, a: MatRef, b: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                c[i * n + j] = (0..k).map(|p| a.data[i * a.rs + p * a.cs] * b[p * n + j]).sum();
            }
        }
        c
    }

    #[test]
    fn nn_matches_naive_on_awkward_shapes() {
        for &(m, k, n) in &[(1, 1, 1), (3, 2, 7), (30, 30, 2048), (40, 3, 1568), (1, 40, 45), (5, 7, 33)] {
            let a = filled(m * k, 1);
            let b = filled(k * n, 2);
            for am in [MatRef::row_major(&a, k), MatRef::transposed(&a, m)] {
                let want = naive_nn(m, k, n, am, &b);
                let mut c = vec![f64::NAN; m * n];
                gemm_nn(m, k, n, am, &b, false, &mut c);
                for (x, y) in c.iter().zip(&want) {
                    assert!((x - y).abs() < 1e-12, "{m}x{k}x{n}: {x} vs {y}");
                }
                gemm_nn(m, k, n, am, &b, true, &mut c);
                for (x, y) in c.iter().zip(&want) {
                    assert!((x - 2.0 * y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn nt_matches_naive_on_awkward_shapes() {
        for &(m, k, n) in &[(1, 1, 1), (3, 2, 7), (40, 40, 2048), (30, 2, 1568), (1, 40, 13), (6, 5, 9)] {
            let d = filled(m * n, 3);
            let a = filled(k * n, 4);
            let mut g = vec![1.0; m * k];
            gemm_nt(m, k, n, &d, &a, &mut g);
            for i in 0..m {
                for j in 0..k {
                    let want: f64 = 1.0 + (0..n).map(|c| d[i * n + c] * a[j * n + c]).sum::<f64>();
                    assert!((g[i * k + j] - want).abs() < 1e-11, "{m}x{k}x{n}");
                }
            }
        }
    }
}
