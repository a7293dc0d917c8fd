//! Embedded wavelet filter tables and the filter-bank constructor.
//!
//! Level 1 uses an odd-length near-symmetric biorthogonal pair (13-tap
//! analysis lowpass, 19-tap synthesis lowpass) stored as exact rationals.
//! The 19-tap side is the half-band complement of the 13-tap side, so the
//! product filter is half-band by construction and the pair reconstructs
//! perfectly. Levels >= 2 use a 14-tap quarter-sample-shift prototype whose
//! even-lag autocorrelations are zero to machine precision; tree B is the
//! time reverse of tree A and the highpasses follow by conjugate quadrature
//! mirroring, so the interleaved two-tree operator is orthogonal.

use crate::error::{Error, Result};

/// 13-tap analysis lowpass, zero phase, numerators over 5120.
const LEVEL1_LO13_NUM: [f64; 13] = [
    -9.0, 0.0, 114.0, -240.0, -247.0, 1520.0, 2844.0, 1520.0, -247.0, -240.0, 114.0, 0.0, -9.0,
];
const LEVEL1_LO13_DEN: f64 = 5120.0;

/// Half coefficients (center outward) of the 19-tap synthesis lowpass as
/// exact rationals; index 0 is the outermost tap.
const LEVEL1_LO19_HALF: [(f64, f64); 10] = [
    (333.0, 5734400.0),
    (0.0, 1.0),
    (-8871.0, 5734400.0),
    (-111.0, 71680.0),
    (991.0, 89600.0),
    (161.0, 5120.0),
    (-60107.0, 716800.0),
    (-7569.0, 71680.0),
    (329317.0, 573440.0),
    (20633.0, 17920.0),
];

/// 14-tap quarter-shift lowpass prototype (tree A). Orthonormalized so that
/// sum h[n] h[n-2k] = delta(k) and H(pi) = 0 hold to f64 precision.
#[allow(clippy::excessive_precision)]
const QSHIFT14: [f64; 14] = [
    3.25314226087050021e-3,
    -3.88322095390097009e-3,
    3.46602687250011296e-2,
    -3.88728660994544575e-2,
    -1.17204081742057806e-1,
    2.75295347775265153e-1,
    7.56145672801044388e-1,
    5.68810465958694556e-1,
    1.18659226380815799e-2,
    -1.06711281563980229e-1,
    2.38253147446265308e-2,
    1.70252056609577589e-2,
    -5.43945824101877036e-3,
    -4.55686959103428040e-3,
];

/// Zero-phase filters for the undecimated first level.
#[derive(Debug, Clone)]
pub struct Level1Filters {
    pub analysis_lo: Vec<f64>,
    pub analysis_hi: Vec<f64>,
    pub synthesis_lo: Vec<f64>,
    pub synthesis_hi: Vec<f64>,
}

/// Quarter-shift filters for levels >= 2. Tree B is the reverse of tree A.
#[derive(Debug, Clone)]
pub struct QshiftFilters {
    pub lo_a: Vec<f64>,
    pub lo_b: Vec<f64>,
    pub hi_a: Vec<f64>,
    pub hi_b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FilterBank {
    pub level1: Level1Filters,
    pub qshift: QshiftFilters,
    pub level1_kind: String,
    pub qshift_kind: String,
}

fn modulate_centered(f: &[f64]) -> Vec<f64> {
    let c = (f.len() - 1) / 2;
    f.iter()
        .enumerate()
        .map(|(i, &v)| {
            if (i as isize - c as isize) % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect()
}

fn level1_nearsym() -> Level1Filters {
    let sq2 = std::f64::consts::SQRT_2;
    let base13: Vec<f64> = LEVEL1_LO13_NUM
        .iter()
        .map(|&n| n / LEVEL1_LO13_DEN)
        .collect();
    let mut base19 = Vec::with_capacity(19);
    for &(n, d) in LEVEL1_LO19_HALF.iter() {
        base19.push(n / d);
    }
    for i in (0..9).rev() {
        let (n, d) = LEVEL1_LO19_HALF[i];
        base19.push(n / d);
    }
    // Gains balanced at sqrt(2); the alias-cancelled highpasses are the
    // modulated complements, also zero phase.
    Level1Filters {
        analysis_lo: base13.iter().map(|&v| v * sq2).collect(),
        analysis_hi: modulate_centered(&base19)
            .iter()
            .map(|&v| v / sq2)
            .collect(),
        synthesis_lo: base19.iter().map(|&v| v / sq2).collect(),
        synthesis_hi: modulate_centered(&base13)
            .iter()
            .map(|&v| v * sq2)
            .collect(),
    }
}

fn level1_delta() -> Level1Filters {
    Level1Filters {
        analysis_lo: vec![1.0],
        analysis_hi: vec![1.0],
        synthesis_lo: vec![1.0],
        synthesis_hi: vec![1.0],
    }
}

fn qshift_from_prototype(proto: &[f64]) -> QshiftFilters {
    let m = proto.len();
    let lo_a = proto.to_vec();
    let lo_b: Vec<f64> = proto.iter().rev().copied().collect();
    // conjugate quadrature mirror: hi[n] = (-1)^n lo[m-1-n]
    let hi_a: Vec<f64> = (0..m)
        .map(|n| {
            if n % 2 == 0 {
                proto[m - 1 - n]
            } else {
                -proto[m - 1 - n]
            }
        })
        .collect();
    let hi_b: Vec<f64> = hi_a.iter().rev().copied().collect();
    QshiftFilters {
        lo_a,
        lo_b,
        hi_a,
        hi_b,
    }
}

/// Build a filter bank from named tap tables and validate perfect
/// reconstruction on 1-D impulse round trips.
///
/// Known level-1 kinds: `nearsym-13-19` (default), `delta` (test only).
/// Known q-shift kinds: `qshift-14` (default).
pub fn build_filter_bank(level1_kind: &str, qshift_kind: &str) -> Result<FilterBank> {
    let level1 = match level1_kind {
        "nearsym-13-19" => level1_nearsym(),
        "delta" => level1_delta(),
        other => {
            return Err(Error::arg(format!(
                "unknown level-1 filter kind '{other}' (expected nearsym-13-19 or delta)"
            )))
        }
    };
    let qshift = match qshift_kind {
        "qshift-14" => qshift_from_prototype(&QSHIFT14),
        other => {
            return Err(Error::arg(format!(
                "unknown q-shift filter kind '{other}' (expected qshift-14)"
            )))
        }
    };
    let fb = FilterBank {
        level1,
        qshift,
        level1_kind: level1_kind.to_string(),
        qshift_kind: qshift_kind.to_string(),
    };
    let err = fb.impulse_roundtrip_error();
    if err > 1e-10 {
        return Err(Error::Consistency(format!(
            "filter tables fail perfect reconstruction: impulse round-trip error {err:.3e}"
        )));
    }
    Ok(fb)
}

impl Default for FilterBank {
    fn default() -> Self {
        build_filter_bank("nearsym-13-19", "qshift-14").expect("embedded tables are valid")
    }
}

impl FilterBank {
    /// Worst 1-D impulse round-trip error over both filter stages.
    pub fn impulse_roundtrip_error(&self) -> f64 {
        let e1 = level1_impulse_error(&self.level1);
        let e2 = qshift_impulse_error(&self.qshift);
        e1.max(e2)
    }
}

fn level1_impulse_error(f: &Level1Filters) -> f64 {
    // Undecimated analysis then synthesis on a centered impulse must halve
    // to the impulse: (g0*h0 + g1*h1)/2 = delta.
    let n = 64usize;
    let mut x = vec![0.0; n];
    x[n / 2] = 1.0;
    let lo = conv_sym_1d(&x, &f.analysis_lo);
    let hi = conv_sym_1d(&x, &f.analysis_hi);
    let rlo = conv_sym_1d(&lo, &f.synthesis_lo);
    let rhi = conv_sym_1d(&hi, &f.synthesis_hi);
    (0..n)
        .map(|i| ((rlo[i] + rhi[i]) / 2.0 - x[i]).abs())
        .fold(0.0, f64::max)
}

fn qshift_impulse_error(f: &QshiftFilters) -> f64 {
    // The interleaved lowpass+highpass operator must be orthogonal, so
    // analyze-then-adjoint returns each impulse exactly.
    let n = 32usize;
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut x = vec![0.0; n];
        x[i] = 1.0;
        let lo = super::transform::down_1d(&x, &f.lo_b, &f.lo_a);
        let hi = super::transform::down_1d(&x, &f.hi_b, &f.hi_a);
        let mut rec = super::transform::down_adjoint_1d(&lo, &f.lo_b, &f.lo_a);
        let rec_hi = super::transform::down_adjoint_1d(&hi, &f.hi_b, &f.hi_a);
        for (r, rh) in rec.iter_mut().zip(&rec_hi) {
            *r += rh;
        }
        for (j, &r) in rec.iter().enumerate() {
            worst = worst.max((r - x[j]).abs());
        }
    }
    worst
}

/// Zero-phase 1-D convolution with mirror-without-repeat extension.
pub(crate) fn conv_sym_1d(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let c = (f.len() - 1) / 2;
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (m, &w) in f.iter().enumerate() {
            let p = i as isize + m as isize - c as isize;
            acc += w * x[crate::image::mirror_index(p, n)];
        }
        *o = acc;
    }
    out
}
