//! Separable filtering primitives for the dual-tree transform.
//!
//! Level 1 filters without decimation using zero-phase symmetric filters and
//! mirror-without-repeat extension; the quad-to-complex step performs the
//! decimation. Levels >= 2 use the interleaved two-tree decimator: even
//! output samples come from one tree's filter and odd samples from the
//! other's, with repeated-edge symmetric extension. That composite operator
//! is orthogonal for the embedded q-shift tables, so synthesis is its
//! adjoint.

use crate::image::{mirror_index, Plane};

/// Repeated-edge (half-point) symmetric index.
#[inline]
fn edge_index(p: isize, n: usize) -> usize {
    let mut p = p;
    let n = n as isize;
    while p < 0 || p >= n {
        if p < 0 {
            p = -1 - p;
        }
        if p >= n {
            p = 2 * n - 1 - p;
        }
    }
    p as usize
}

pub(crate) fn transpose(p: &Plane) -> Plane {
    let mut out = Plane::zeros(p.height, p.width);
    for y in 0..p.height {
        for x in 0..p.width {
            out.data[x * p.height + y] = p.data[y * p.width + x];
        }
    }
    out
}

/// Undecimated zero-phase filtering down each column.
pub(crate) fn filt_cols_sym(p: &Plane, f: &[f64]) -> Plane {
    let (w, h) = (p.width, p.height);
    let c = (f.len() - 1) / 2;
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        let orow = y * w;
        for (m, &wt) in f.iter().enumerate() {
            let sy = mirror_index(y as isize + m as isize - c as isize, h);
            let srow = sy * w;
            for x in 0..w {
                out.data[orow + x] += wt * p.data[srow + x];
            }
        }
    }
    out
}

pub(crate) fn filt_rows_sym(p: &Plane, f: &[f64]) -> Plane {
    transpose(&filt_cols_sym(&transpose(p), f))
}

/// Index plan shared by the decimator and its adjoint.
struct DownPlan {
    xe: Vec<usize>,
    t: Vec<usize>,
    half: usize,
    swap_phase: bool,
}

fn down_plan(r: usize, fa: &[f64], fb: &[f64]) -> DownPlan {
    let m = fa.len();
    debug_assert!(m % 2 == 0, "q-shift filters must be even length");
    debug_assert_eq!(r % 4, 0, "decimator input length must be a multiple of 4");
    let xe: Vec<usize> = (-(m as isize)..(r + m) as isize)
        .map(|p| edge_index(p, r))
        .collect();
    let t: Vec<usize> = (5..r + 2 * m - 2).step_by(4).collect();
    let dot: f64 = fa.iter().zip(fb).map(|(a, b)| a * b).sum();
    DownPlan {
        xe,
        t,
        half: m / 2,
        swap_phase: dot <= 0.0,
    }
}

/// One level of interleaved two-tree decimation along a vector.
/// `fa` lands on one output phase, `fb` on the other.
pub(crate) fn down_1d(x: &[f64], fa: &[f64], fb: &[f64]) -> Vec<f64> {
    let r = x.len();
    let plan = down_plan(r, fa, fb);
    let k = plan.half;
    let fa_o: Vec<f64> = fa.iter().copied().step_by(2).collect();
    let fa_e: Vec<f64> = fa.iter().copied().skip(1).step_by(2).collect();
    let fb_o: Vec<f64> = fb.iter().copied().step_by(2).collect();
    let fb_e: Vec<f64> = fb.iter().copied().skip(1).step_by(2).collect();
    let r2 = r / 2;
    let mut y = vec![0.0; r2];
    let nout = plan.t.len() + 1 - k;
    let (p1, p2) = if plan.swap_phase { (1, 0) } else { (0, 1) };
    for o in 0..nout {
        let mut acc1 = 0.0;
        let mut acc2 = 0.0;
        for i in 0..k {
            let ti = plan.t[o + i];
            acc1 += fa_o[k - 1 - i] * x[plan.xe[ti - 1]] + fa_e[k - 1 - i] * x[plan.xe[ti - 3]];
            acc2 += fb_o[k - 1 - i] * x[plan.xe[ti]] + fb_e[k - 1 - i] * x[plan.xe[ti - 2]];
        }
        y[2 * o + p1] = acc1;
        y[2 * o + p2] = acc2;
    }
    y
}

/// Adjoint of [`down_1d`]; exact inverse once lowpass and highpass adjoints
/// are summed, because the stacked operator is orthogonal.
pub(crate) fn down_adjoint_1d(y: &[f64], fa: &[f64], fb: &[f64]) -> Vec<f64> {
    let r = y.len() * 2;
    let plan = down_plan(r, fa, fb);
    let k = plan.half;
    let fa_o: Vec<f64> = fa.iter().copied().step_by(2).collect();
    let fa_e: Vec<f64> = fa.iter().copied().skip(1).step_by(2).collect();
    let fb_o: Vec<f64> = fb.iter().copied().step_by(2).collect();
    let fb_e: Vec<f64> = fb.iter().copied().skip(1).step_by(2).collect();
    let mut x = vec![0.0; r];
    let nout = plan.t.len() + 1 - k;
    let (p1, p2) = if plan.swap_phase { (1, 0) } else { (0, 1) };
    for o in 0..nout {
        let v1 = y[2 * o + p1];
        let v2 = y[2 * o + p2];
        for i in 0..k {
            let ti = plan.t[o + i];
            x[plan.xe[ti - 1]] += fa_o[k - 1 - i] * v1;
            x[plan.xe[ti - 3]] += fa_e[k - 1 - i] * v1;
            x[plan.xe[ti]] += fb_o[k - 1 - i] * v2;
            x[plan.xe[ti - 2]] += fb_e[k - 1 - i] * v2;
        }
    }
    x
}

/// Column-wise decimation of a plane (halves the height).
pub(crate) fn down_cols(p: &Plane, fa: &[f64], fb: &[f64]) -> Plane {
    let (w, h) = (p.width, p.height);
    let plan = down_plan(h, fa, fb);
    let k = plan.half;
    let fa_o: Vec<f64> = fa.iter().copied().step_by(2).collect();
    let fa_e: Vec<f64> = fa.iter().copied().skip(1).step_by(2).collect();
    let fb_o: Vec<f64> = fb.iter().copied().step_by(2).collect();
    let fb_e: Vec<f64> = fb.iter().copied().skip(1).step_by(2).collect();
    let mut out = Plane::zeros(w, h / 2);
    let nout = plan.t.len() + 1 - k;
    let (p1, p2) = if plan.swap_phase { (1, 0) } else { (0, 1) };
    for o in 0..nout {
        let (row1, row2) = ((2 * o + p1) * w, (2 * o + p2) * w);
        for i in 0..k {
            let ti = plan.t[o + i];
            let (w1o, w1e) = (fa_o[k - 1 - i], fa_e[k - 1 - i]);
            let (w2o, w2e) = (fb_o[k - 1 - i], fb_e[k - 1 - i]);
            let (s1o, s1e) = (plan.xe[ti - 1] * w, plan.xe[ti - 3] * w);
            let (s2o, s2e) = (plan.xe[ti] * w, plan.xe[ti - 2] * w);
            for x in 0..w {
                out.data[row1 + x] += w1o * p.data[s1o + x] + w1e * p.data[s1e + x];
                out.data[row2 + x] += w2o * p.data[s2o + x] + w2e * p.data[s2e + x];
            }
        }
    }
    out
}

pub(crate) fn down_rows(p: &Plane, fa: &[f64], fb: &[f64]) -> Plane {
    transpose(&down_cols(&transpose(p), fa, fb))
}

/// Column-wise adjoint (doubles the height).
pub(crate) fn down_cols_adjoint(p: &Plane, fa: &[f64], fb: &[f64]) -> Plane {
    let (w, h2) = (p.width, p.height);
    let h = h2 * 2;
    let plan = down_plan(h, fa, fb);
    let k = plan.half;
    let fa_o: Vec<f64> = fa.iter().copied().step_by(2).collect();
    let fa_e: Vec<f64> = fa.iter().copied().skip(1).step_by(2).collect();
    let fb_o: Vec<f64> = fb.iter().copied().step_by(2).collect();
    let fb_e: Vec<f64> = fb.iter().copied().skip(1).step_by(2).collect();
    let mut out = Plane::zeros(w, h);
    let nout = plan.t.len() + 1 - k;
    let (p1, p2) = if plan.swap_phase { (1, 0) } else { (0, 1) };
    for o in 0..nout {
        let (row1, row2) = ((2 * o + p1) * w, (2 * o + p2) * w);
        for i in 0..k {
            let ti = plan.t[o + i];
            let (w1o, w1e) = (fa_o[k - 1 - i], fa_e[k - 1 - i]);
            let (w2o, w2e) = (fb_o[k - 1 - i], fb_e[k - 1 - i]);
            let (s1o, s1e) = (plan.xe[ti - 1] * w, plan.xe[ti - 3] * w);
            let (s2o, s2e) = (plan.xe[ti] * w, plan.xe[ti - 2] * w);
            for x in 0..w {
                out.data[s1o + x] += w1o * p.data[row1 + x];
                out.data[s1e + x] += w1e * p.data[row1 + x];
                out.data[s2o + x] += w2o * p.data[row2 + x];
                out.data[s2e + x] += w2e * p.data[row2 + x];
            }
        }
    }
    out
}

pub(crate) fn down_rows_adjoint(p: &Plane, fa: &[f64], fb: &[f64]) -> Plane {
    transpose(&down_cols_adjoint(&transpose(p), fa, fb))
}
