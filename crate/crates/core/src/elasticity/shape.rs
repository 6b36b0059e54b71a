//! Q1 (multilinear) shape functions on axis-aligned boxes.

/// Values of the `2^dim` corner shape functions at `x` inside the box
/// `[lo, hi]`. Corner `a` has bit `k` set when it sits on the upper side of
/// axis `k`.
pub fn values(dim: usize, lo: &[f64; 3], hi: &[f64; 3], x: &[f64; 3]) -> [f64; 8] {
    let (t, _) = local(dim, lo, hi, x);
    let mut out = [0.0; 8];
    for (a, slot) in out.iter_mut().enumerate().take(1 << dim) {
        let mut v = 1.0;
        for k in 0..dim {
            v *= if (a >> k) & 1 == 1 { t[k] } else { 1.0 - t[k] };
        }
        *slot = v;
    }
    out
}

/// Cartesian gradients of the corner shape functions at `x`.
pub fn gradients(dim: usize, lo: &[f64; 3], hi: &[f64; 3], x: &[f64; 3]) -> [[f64; 3]; 8] {
    let (t, h) = local(dim, lo, hi, x);
    let mut out = [[0.0; 3]; 8];
    for (a, g) in out.iter_mut().enumerate().take(1 << dim) {
        for k in 0..dim {
            let mut v = if (a >> k) & 1 == 1 { 1.0 / h[k] } else { -1.0 / h[k] };
            for m in 0..dim {
                if m != k {
                    v *= if (a >> m) & 1 == 1 { t[m] } else { 1.0 - t[m] };
                }
            }
            g[k] = v;
        }
    }
    out
}

fn local(dim: usize, lo: &[f64; 3], hi: &[f64; 3], x: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let mut t = [0.0; 3];
    let mut h = [1.0; 3];
    for k in 0..dim {
        h[k] = hi[k] - lo[k];
        t[k] = (x[k] - lo[k]) / h[k];
    }
    (t, h)
}
