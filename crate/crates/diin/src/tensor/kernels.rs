//! Raw array kernels shared by the forward and backward passes.
//!
//! All tensors are dense row-major `&[Real]` slices; shapes travel separately.
//! Kernels are plain loops: deterministic for a fixed input, no threading.

use super::Real;

/// C[m,n] = A[m,k] * B[k,n]
pub fn matmul(a: &[Real], b: &[Real], m: usize, k: usize, n: usize, out: &mut [Real]) {
    debug_assert_eq!(out.len(), m * n);
    out.fill(0.0);
    for i in 0..m {
        for p in 0..k {
            let av = a[i * k + p];
            if av == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] += av * brow[j];
            }
        }
    }
}

pub fn transpose(x: &[Real], rows: usize, cols: usize, out: &mut [Real]) {
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = x[i * cols + j];
        }
    }
}

/// 2-D convolution, stride 1, zero ("same") padding. `x` is [h,w,ci],
/// `kernel` is [kh,kw,ci,co], `out` is [h,w,co]. Kernel extents must be odd.
pub fn conv2d_same(
    x: &[Real],
    kernel: &[Real],
    h: usize,
    w: usize,
    ci: usize,
    kh: usize,
    kw: usize,
    co: usize,
    out: &mut [Real],
) {
    let (ph, pw) = (kh / 2, kw / 2);
    out.fill(0.0);
    for i in 0..h {
        for j in 0..w {
            let orow = &mut out[(i * w + j) * co..(i * w + j + 1) * co];
            for di in 0..kh {
                let si = (i + di).wrapping_sub(ph);
                if si >= h {
                    continue;
                }
                for dj in 0..kw {
                    let sj = (j + dj).wrapping_sub(pw);
                    if sj >= w {
                        continue;
                    }
                    let xrow = &x[(si * w + sj) * ci..(si * w + sj + 1) * ci];
                    let kbase = (di * kw + dj) * ci * co;
                    for c in 0..ci {
                        let xv = xrow[c];
                        if xv == 0.0 {
                            continue;
                        }
                        let krow = &kernel[kbase + c * co..kbase + (c + 1) * co];
                        for o in 0..co {
                            orow[o] += xv * krow[o];
                        }
                    }
                }
            }
        }
    }
}

/// Gradient of `conv2d_same` w.r.t. the input.
#[allow(clippy::too_many_arguments)]
pub fn conv2d_same_dx(
    grad: &[Real],
    kernel: &[Real],
    h: usize,
    w: usize,
    ci: usize,
    kh: usize,
    kw: usize,
    co: usize,
    dx: &mut [Real],
) {
    let (ph, pw) = (kh / 2, kw / 2);
    dx.fill(0.0);
    for i in 0..h {
        for j in 0..w {
            let grow = &grad[(i * w + j) * co..(i * w + j + 1) * co];
            for di in 0..kh {
                let si = (i + di).wrapping_sub(ph);
                if si >= h {
                    continue;
                }
                for dj in 0..kw {
                    let sj = (j + dj).wrapping_sub(pw);
                    if sj >= w {
                        continue;
                    }
                    let xbase = (si * w + sj) * ci;
                    let kbase = (di * kw + dj) * ci * co;
                    for c in 0..ci {
                        let krow = &kernel[kbase + c * co..kbase + (c + 1) * co];
                        let mut acc = 0.0;
                        for o in 0..co {
                            acc += grow[o] * krow[o];
                        }
                        dx[xbase + c] += acc;
                    }
                }
            }
        }
    }
}

/// Gradient of `conv2d_same` w.r.t. the kernel (accumulates into `dk`).
#[allow(clippy::too_many_arguments)]
pub fn conv2d_same_dk(
    grad: &[Real],
    x: &[Real],
    h: usize,
    w: usize,
    ci: usize,
    kh: usize,
    kw: usize,
    co: usize,
    dk: &mut [Real],
) {
    let (ph, pw) = (kh / 2, kw / 2);
    for i in 0..h {
        for j in 0..w {
            let grow = &grad[(i * w + j) * co..(i * w + j + 1) * co];
            for di in 0..kh {
                let si = (i + di).wrapping_sub(ph);
                if si >= h {
                    continue;
                }
                for dj in 0..kw {
                    let sj = (j + dj).wrapping_sub(pw);
                    if sj >= w {
                        continue;
                    }
                    let xrow = &x[(si * w + sj) * ci..(si * w + sj + 1) * ci];
                    let kbase = (di * kw + dj) * ci * co;
                    for c in 0..ci {
                        let xv = xrow[c];
                        if xv == 0.0 {
                            continue;
                        }
                        let krow = &mut dk[kbase + c * co..kbase + (c + 1) * co];
                        for o in 0..co {
                            krow[o] += xv * grow[o];
                        }
                    }
                }
            }
        }
    }
}

/// 1-D convolution with no padding. `x` is [len,ci], `kernel` is [k,ci,co],
/// `out` is [len-k+1,co].
pub fn conv1d_valid(
    x: &[Real],
    kernel: &[Real],
    len: usize,
    ci: usize,
    k: usize,
    co: usize,
    out: &mut [Real],
) {
    let out_len = len + 1 - k;
    out.fill(0.0);
    for t in 0..out_len {
        let orow = &mut out[t * co..(t + 1) * co];
        for dt in 0..k {
            let xrow = &x[(t + dt) * ci..(t + dt + 1) * ci];
            let kbase = dt * ci * co;
            for c in 0..ci {
                let xv = xrow[c];
                if xv == 0.0 {
                    continue;
                }
                let krow = &kernel[kbase + c * co..kbase + (c + 1) * co];
                for o in 0..co {
                    orow[o] += xv * krow[o];
                }
            }
        }
    }
}

pub fn conv1d_valid_dx(
    grad: &[Real],
    kernel: &[Real],
    len: usize,
    ci: usize,
    k: usize,
    co: usize,
    dx: &mut [Real],
) {
    let out_len = len + 1 - k;
    dx.fill(0.0);
    for t in 0..out_len {
        let grow = &grad[t * co..(t + 1) * co];
        for dt in 0..k {
            let xbase = (t + dt) * ci;
            let kbase = dt * ci * co;
            for c in 0..ci {
                let krow = &kernel[kbase + c * co..kbase + (c + 1) * co];
                let mut acc = 0.0;
                for o in 0..co {
                    acc += grow[o] * krow[o];
                }
                dx[xbase + c] += acc;
            }
        }
    }
}

pub fn conv1d_valid_dk(
    grad: &[Real],
    x: &[Real],
    len: usize,
    ci: usize,
    k: usize,
    co: usize,
    dk: &mut [Real],
) {
    let out_len = len + 1 - k;
    for t in 0..out_len {
        let grow = &grad[t * co..(t + 1) * co];
        for dt in 0..k {
            let xrow = &x[(t + dt) * ci..(t + dt + 1) * ci];
            let kbase = dt * ci * co;
            for c in 0..ci {
                let xv = xrow[c];
                if xv == 0.0 {
                    continue;
                }
                let krow = &mut dk[kbase + c * co..kbase + (c + 1) * co];
                for o in 0..co {
                    krow[o] += xv * grow[o];
                }
            }
        }
    }
}

/// Softmax along `axis`, numerically stabilized. Lanes with a shared max are
/// shift-invariant by construction.
pub fn softmax_axis(x: &[Real], shape: &[usize], axis: usize, out: &mut [Real]) {
    let len = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    for o in 0..outer {
        for i in 0..inner {
            let base = o * len * inner + i;
            let mut max = Real::NEG_INFINITY;
            for t in 0..len {
                max = max.max(x[base + t * inner]);
            }
            let mut sum = 0.0;
            for t in 0..len {
                let e = (x[base + t * inner] - max).exp();
                out[base + t * inner] = e;
                sum += e;
            }
            for t in 0..len {
                out[base + t * inner] /= sum;
            }
        }
    }
}

/// Backward of softmax: dx = s * (g - sum(g * s)) per lane.
pub fn softmax_axis_backward(
    softmax: &[Real],
    grad: &[Real],
    shape: &[usize],
    axis: usize,
    dx: &mut [Real],
) {
    let len = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    for o in 0..outer {
        for i in 0..inner {
            let base = o * len * inner + i;
            let mut dot = 0.0;
            for t in 0..len {
                let idx = base + t * inner;
                dot += grad[idx] * softmax[idx];
            }
            for t in 0..len {
                let idx = base + t * inner;
                dx[idx] += softmax[idx] * (grad[idx] - dot);
            }
        }
    }
}

/// Output extent of one ceil-halving 2x2/stride-2 pool step.
pub fn pooled_extent(n: usize) -> usize {
    n.div_ceil(2)
}
