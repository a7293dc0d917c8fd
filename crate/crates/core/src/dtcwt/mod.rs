//! Multi-level Dual-Tree Complex Wavelet Transform.
//!
//! Forward decomposition yields six oriented complex subbands per level plus
//! one real lowpass plane. Coefficients are stored at half the tight-frame
//! scale so the summed squared energy of a pyramid tracks the input energy.

mod filters;
mod transform;

pub use filters::{build_filter_bank, FilterBank, Level1Filters, QshiftFilters};

use crate::error::{Error, Result};
use crate::image::{Image, Plane};
use transform::{
    down_cols, down_cols_adjoint, down_rows, down_rows_adjoint, filt_cols_sym, filt_rows_sym,
};

/// Subband orientation, ascending; all downstream band indices refer to this
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Deg15,
    Deg45,
    Deg75,
    Deg105,
    Deg135,
    Deg165,
}

impl Orientation {
    pub const ALL: [Orientation; 6] = [
        Orientation::Deg15,
        Orientation::Deg45,
        Orientation::Deg75,
        Orientation::Deg105,
        Orientation::Deg135,
        Orientation::Deg165,
    ];

    pub fn degrees(self) -> u32 {
        match self {
            Orientation::Deg15 => 15,
            Orientation::Deg45 => 45,
            Orientation::Deg75 => 75,
            Orientation::Deg105 => 105,
            Orientation::Deg135 => 135,
            Orientation::Deg165 => 165,
        }
    }

    pub fn index(self) -> usize {
        Orientation::ALL.iter().position(|&o| o == self).unwrap()
    }
}

/// One oriented complex coefficient plane.
#[derive(Debug, Clone)]
pub struct ComplexSubband {
    pub width: usize,
    pub height: usize,
    pub re: Plane,
    pub im: Plane,
    pub orientation: Orientation,
    pub level: usize,
}

impl ComplexSubband {
    fn new(re: Plane, im: Plane, orientation: Orientation, level: usize) -> Self {
        assert_eq!((re.width, re.height), (im.width, im.height));
        ComplexSubband {
            width: re.width,
            height: re.height,
            re,
            im,
            orientation,
            level,
        }
    }
}

/// Elementwise sqrt(re^2 + im^2).
pub fn magnitude(sb: &ComplexSubband) -> Plane {
    let data = sb
        .re
        .data
        .iter()
        .zip(&sb.im.data)
        .map(|(&r, &i)| (r * r + i * i).sqrt())
        .collect();
    Plane::new(sb.width, sb.height, data)
}

/// Pad bookkeeping for the exact inverse. Level 1 mirrors one row/column at
/// the bottom/right to reach even dims; deeper levels duplicate one edge
/// row/column on both sides to reach multiple-of-4 dims.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PadRec {
    rows: bool,
    cols: bool,
}

#[derive(Debug, Clone)]
pub struct DtcwtPyramid {
    pub levels: usize,
    /// `subbands[level][k]` is orientation `Orientation::ALL[k]` at
    /// `level + 1`.
    pub subbands: Vec<Vec<ComplexSubband>>,
    pub lowpass: Plane,
    pub orig_width: usize,
    pub orig_height: usize,
    pads: Vec<PadRec>,
}

impl DtcwtPyramid {
    pub fn subband(&self, level: usize, orientation: Orientation) -> &ComplexSubband {
        &self.subbands[level - 1][orientation.index()]
    }

    /// Total energy of all stored coefficients.
    pub fn energy(&self) -> f64 {
        let mut e: f64 = self.lowpass.data.iter().map(|v| v * v).sum();
        for level in &self.subbands {
            for sb in level {
                e += sb.re.data.iter().map(|v| v * v).sum::<f64>();
                e += sb.im.data.iter().map(|v| v * v).sum::<f64>();
            }
        }
        e
    }
}

/// Largest decomposition depth supported for a given image size.
pub fn max_levels(width: usize, height: usize) -> usize {
    let mut n = 0usize;
    let mut w = width + width % 2;
    let mut h = height + height % 2;
    if w >= 2 && h >= 2 {
        n = 1;
        // the level-1 lowpass stays at padded full resolution
        loop {
            let wp = w + 2 * ((w % 4) / 2);
            let hp = h + 2 * ((h % 4) / 2);
            if wp < 4 || hp < 4 || (1usize << (n + 1)) > wp.min(hp) {
                break;
            }
            w = wp / 2;
            h = hp / 2;
            n += 1;
        }
    }
    n
}

const STORED_SCALE: f64 = 0.5;

/// Quad-to-complex: split a filtered plane's 2x2 polyphase quads into the
/// two oriented complex subbands they carry.
fn q2c(y: &Plane) -> (Plane, Plane, Plane, Plane) {
    let (w2, h2) = (y.width / 2, y.height / 2);
    let k = STORED_SCALE * std::f64::consts::FRAC_1_SQRT_2;
    let mut re1 = Plane::zeros(w2, h2);
    let mut im1 = Plane::zeros(w2, h2);
    let mut re2 = Plane::zeros(w2, h2);
    let mut im2 = Plane::zeros(w2, h2);
    for j in 0..h2 {
        for i in 0..w2 {
            let a = y.at(2 * i, 2 * j);
            let b = y.at(2 * i + 1, 2 * j);
            let c = y.at(2 * i, 2 * j + 1);
            let d = y.at(2 * i + 1, 2 * j + 1);
            re1.set(i, j, (a - d) * k);
            im1.set(i, j, (b + c) * k);
            re2.set(i, j, (a + d) * k);
            im2.set(i, j, (b - c) * k);
        }
    }
    (re1, im1, re2, im2)
}

/// Inverse of [`q2c`].
fn c2q(s1: &ComplexSubband, s2: &ComplexSubband) -> Plane {
    let (w2, h2) = (s1.width, s1.height);
    let k = std::f64::consts::FRAC_1_SQRT_2 / STORED_SCALE;
    let mut y = Plane::zeros(w2 * 2, h2 * 2);
    for j in 0..h2 {
        for i in 0..w2 {
            let (z1r, z1i) = (s1.re.at(i, j), s1.im.at(i, j));
            let (z2r, z2i) = (s2.re.at(i, j), s2.im.at(i, j));
            y.set(2 * i, 2 * j, (z1r + z2r) * k);
            y.set(2 * i + 1, 2 * j, (z1i + z2i) * k);
            y.set(2 * i, 2 * j + 1, (z1i - z2i) * k);
            y.set(2 * i + 1, 2 * j + 1, (z2r - z1r) * k);
        }
    }
    y
}

fn pad_even_mirror(p: &Plane) -> (Plane, PadRec) {
    let pad = PadRec {
        rows: p.height % 2 == 1,
        cols: p.width % 2 == 1,
    };
    if !pad.rows && !pad.cols {
        return (p.clone(), pad);
    }
    let (w, h) = (p.width + pad.cols as usize, p.height + pad.rows as usize);
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        let sy = if y == p.height { p.height - 2 } else { y };
        for x in 0..w {
            let sx = if x == p.width { p.width - 2 } else { x };
            out.set(x, y, p.at(sx, sy));
        }
    }
    (out, pad)
}

fn pad_mult4_duplicate(p: &Plane) -> (Plane, PadRec) {
    let pad = PadRec {
        rows: p.height % 4 != 0,
        cols: p.width % 4 != 0,
    };
    if !pad.rows && !pad.cols {
        return (p.clone(), pad);
    }
    let (w, h) = (
        p.width + 2 * pad.cols as usize,
        p.height + 2 * pad.rows as usize,
    );
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        let sy = (y as isize - pad.rows as isize).clamp(0, p.height as isize - 1) as usize;
        for x in 0..w {
            let sx = (x as isize - pad.cols as isize).clamp(0, p.width as isize - 1) as usize;
            out.set(x, y, p.at(sx, sy));
        }
    }
    (out, pad)
}

fn crop(p: &Plane, pad: PadRec, both_sides: bool) -> Plane {
    if !pad.rows && !pad.cols {
        return p.clone();
    }
    let (x0, y0) = if both_sides {
        (pad.cols as usize, pad.rows as usize)
    } else {
        (0, 0)
    };
    let w = p.width - pad.cols as usize * if both_sides { 2 } else { 1 };
    let h = p.height - pad.rows as usize * if both_sides { 2 } else { 1 };
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            out.set(x, y, p.at(x + x0, y + y0));
        }
    }
    out
}

/// Assemble the six oriented subbands of one level from the three highpass
/// planes (vertical, horizontal, diagonal).
fn assemble_level(lohi: &Plane, hilo: &Plane, hihi: &Plane, level: usize) -> Vec<ComplexSubband> {
    use Orientation::*;
    let (re75, im75, re105, im105) = q2c(lohi);
    let (re15, im15, re165, im165) = q2c(hilo);
    let (re45, im45, re135, im135) = q2c(hihi);
    vec![
        ComplexSubband::new(re15, im15, Deg15, level),
        ComplexSubband::new(re45, im45, Deg45, level),
        ComplexSubband::new(re75, im75, Deg75, level),
        ComplexSubband::new(re105, im105, Deg105, level),
        ComplexSubband::new(re135, im135, Deg135, level),
        ComplexSubband::new(re165, im165, Deg165, level),
    ]
}

/// Forward transform of a single-channel image.
pub fn forward(img: &Image, levels: usize, fb: &FilterBank) -> Result<DtcwtPyramid> {
    if img.channels != 1 {
        return Err(Error::arg("dtcwt forward expects a single-channel image"));
    }
    if levels < 1 {
        return Err(Error::arg("decomposition depth must be >= 1"));
    }
    let feasible = max_levels(img.width, img.height);
    if levels > feasible {
        return Err(Error::arg(format!(
            "image {}x{} supports at most {} levels, requested {}",
            img.width, img.height, feasible, levels
        )));
    }
    forward_plane(&img.plane_copy(0), levels, fb)
}

pub(crate) fn forward_plane(input: &Plane, levels: usize, fb: &FilterBank) -> Result<DtcwtPyramid> {
    let (x, pad1) = pad_even_mirror(input);
    let mut pads = vec![pad1];
    let lo = filt_cols_sym(&x, &fb.level1.analysis_lo);
    let hi = filt_cols_sym(&x, &fb.level1.analysis_hi);
    let mut lolo = filt_rows_sym(&lo, &fb.level1.analysis_lo);
    let lohi = filt_rows_sym(&hi, &fb.level1.analysis_lo);
    let hilo = filt_rows_sym(&lo, &fb.level1.analysis_hi);
    let hihi = filt_rows_sym(&hi, &fb.level1.analysis_hi);
    let mut subbands = vec![assemble_level(&lohi, &hilo, &hihi, 1)];

    let q = &fb.qshift;
    for level in 2..=levels {
        let (padded, pad) = pad_mult4_duplicate(&lolo);
        pads.push(pad);
        let lo = down_cols(&padded, &q.lo_b, &q.lo_a);
        let hi = down_cols(&padded, &q.hi_b, &q.hi_a);
        lolo = down_rows(&lo, &q.lo_b, &q.lo_a);
        let lohi = down_rows(&hi, &q.lo_b, &q.lo_a);
        let hilo = down_rows(&lo, &q.hi_b, &q.hi_a);
        let hihi = down_rows(&hi, &q.hi_b, &q.hi_a);
        subbands.push(assemble_level(&lohi, &hilo, &hihi, level));
    }

    let lowpass = Plane::new(
        lolo.width,
        lolo.height,
        lolo.data.iter().map(|&v| v * STORED_SCALE).collect(),
    );
    Ok(DtcwtPyramid {
        levels,
        subbands,
        lowpass,
        orig_width: input.width,
        orig_height: input.height,
        pads,
    })
}

/// Inverse transform; reconstructs the image the pyramid was built from.
pub fn inverse(pyr: &DtcwtPyramid, fb: &FilterBank) -> Result<Image> {
    let plane = inverse_plane(pyr, fb)?;
    Image::new(plane.width, plane.height, 1, plane.data)
}

pub(crate) fn inverse_plane(pyr: &DtcwtPyramid, fb: &FilterBank) -> Result<Plane> {
    if pyr.subbands.len() != pyr.levels || pyr.pads.len() != pyr.levels {
        return Err(Error::arg("pyramid level bookkeeping is inconsistent"));
    }
    for (li, level) in pyr.subbands.iter().enumerate() {
        if level.len() != 6 {
            return Err(Error::arg(format!(
                "level {} has {} subbands, expected 6",
                li + 1,
                level.len()
            )));
        }
        let (w, h) = (level[0].width, level[0].height);
        if level.iter().any(|sb| sb.width != w || sb.height != h) {
            return Err(Error::arg(format!(
                "level {} subband dims disagree",
                li + 1
            )));
        }
    }

    let mut lolo = Plane::new(
        pyr.lowpass.width,
        pyr.lowpass.height,
        pyr.lowpass.data.iter().map(|&v| v / STORED_SCALE).collect(),
    );
    let q = &fb.qshift;
    for level in (2..=pyr.levels).rev() {
        let bands = &pyr.subbands[level - 1];
        let lohi = c2q(
            &bands[Orientation::Deg75.index()],
            &bands[Orientation::Deg105.index()],
        );
        let hilo = c2q(
            &bands[Orientation::Deg15.index()],
            &bands[Orientation::Deg165.index()],
        );
        let hihi = c2q(
            &bands[Orientation::Deg45.index()],
            &bands[Orientation::Deg135.index()],
        );
        if lolo.width != lohi.width || lolo.height != lohi.height {
            return Err(Error::arg(format!(
                "lowpass {}x{} does not match level-{} subband grid {}x{}",
                lolo.width,
                lolo.height,
                level,
                lohi.width / 2,
                lohi.height / 2
            )));
        }
        let lo = {
            let mut p = down_rows_adjoint(&lolo, &q.lo_b, &q.lo_a);
            let ph = down_rows_adjoint(&hilo, &q.hi_b, &q.hi_a);
            for (a, b) in p.data.iter_mut().zip(&ph.data) {
                *a += b;
            }
            p
        };
        let hi = {
            let mut p = down_rows_adjoint(&lohi, &q.lo_b, &q.lo_a);
            let ph = down_rows_adjoint(&hihi, &q.hi_b, &q.hi_a);
            for (a, b) in p.data.iter_mut().zip(&ph.data) {
                *a += b;
            }
            p
        };
        let mut x = down_cols_adjoint(&lo, &q.lo_b, &q.lo_a);
        let xh = down_cols_adjoint(&hi, &q.hi_b, &q.hi_a);
        for (a, b) in x.data.iter_mut().zip(&xh.data) {
            *a += b;
        }
        lolo = crop(&x, pyr.pads[level - 1], true);
    }

    let bands = &pyr.subbands[0];
    let lohi = c2q(
        &bands[Orientation::Deg75.index()],
        &bands[Orientation::Deg105.index()],
    );
    let hilo = c2q(
        &bands[Orientation::Deg15.index()],
        &bands[Orientation::Deg165.index()],
    );
    let hihi = c2q(
        &bands[Orientation::Deg45.index()],
        &bands[Orientation::Deg135.index()],
    );
    if lolo.width != lohi.width || lolo.height != lohi.height {
        return Err(Error::arg(
            "lowpass does not match level-1 subband grid".to_string(),
        ));
    }
    let f = &fb.level1;
    let lo = {
        let mut p = filt_rows_sym(&lolo, &f.synthesis_lo);
        let ph = filt_rows_sym(&hilo, &f.synthesis_hi);
        for (a, b) in p.data.iter_mut().zip(&ph.data) {
            *a += b;
        }
        p
    };
    let hi = {
        let mut p = filt_rows_sym(&lohi, &f.synthesis_lo);
        let ph = filt_rows_sym(&hihi, &f.synthesis_hi);
        for (a, b) in p.data.iter_mut().zip(&ph.data) {
            *a += b;
        }
        p
    };
    let mut z = filt_cols_sym(&lo, &f.synthesis_lo);
    let zh = filt_cols_sym(&hi, &f.synthesis_hi);
    for (a, b) in z.data.iter_mut().zip(&zh.data) {
        *a = (*a + b) / 4.0;
    }
    Ok(crop(&z, pyr.pads[0], false))
}

/// Std of stored level-1 diagonal-band coefficients (real or imaginary
/// parts, pooled) produced by unit-variance white noise at the input. Used
/// to convert wavelet-domain spread estimates back to image scale.
pub fn noise_gain_level1_diagonal(fb: &FilterBank) -> f64 {
    let h2: f64 = fb.level1.analysis_hi.iter().map(|v| v * v).sum();
    STORED_SCALE * h2
}

/// Expected subband grid dims per level for a given input size, following
/// the per-level padding rules.
pub fn subband_dims(width: usize, height: usize, level: usize) -> (usize, usize) {
    let mut w = width + width % 2;
    let mut h = height + height % 2;
    if level == 1 {
        return (w / 2, h / 2);
    }
    for _ in 2..=level {
        w += 2 * ((w % 4) / 2);
        h += 2 * ((h % 4) / 2);
        w /= 2;
        h /= 2;
    }
    (w / 2, h / 2)
}

/// Serialize pyramid magnitudes to a directory: one normalized 16-bit PGM
/// per plane for viewing, raw little-endian f64 sidecars, and a JSON
/// manifest recording layout and normalization.
pub fn dump_pyramid(pyr: &DtcwtPyramid, dir: &std::path::Path) -> Result<()> {
    use serde_json::json;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut planes = Vec::new();
    let write_plane = |name: &str, p: &Plane| -> Result<serde_json::Value> {
        let lo = p.data.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = p.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let norm = Plane::new(
            p.width,
            p.height,
            p.data.iter().map(|&v| (v - lo) / span).collect(),
        );
        let pgm = crate::image::encode_pgm(&norm, 16);
        let pgm_path = dir.join(format!("{name}.pgm"));
        std::fs::write(&pgm_path, pgm).map_err(|e| Error::io(&pgm_path, e))?;
        let raw: Vec<u8> = p.data.iter().flat_map(|v| v.to_le_bytes()).collect();
        let raw_path = dir.join(format!("{name}.f64"));
        std::fs::write(&raw_path, raw).map_err(|e| Error::io(&raw_path, e))?;
        Ok(json!({
            "name": name,
            "width": p.width,
            "height": p.height,
            "min": lo,
            "max": hi,
            "pgm": format!("{name}.pgm"),
            "raw": format!("{name}.f64"),
        }))
    };
    for level in &pyr.subbands {
        for sb in level {
            let name = format!("L{}_{}deg_mag", sb.level, sb.orientation.degrees());
            planes.push(write_plane(&name, &magnitude(sb))?);
        }
    }
    planes.push(write_plane("lowpass", &pyr.lowpass)?);
    let manifest = json!({
        "schema_version": 1,
        "kind": "dtcwt",
        "width": pyr.orig_width,
        "height": pyr.orig_height,
        "levels": pyr.levels,
        "orientations": Orientation::ALL.iter().map(|o| o.degrees()).collect::<Vec<_>>(),
        "planes": planes,
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&manifest).unwrap())
        .map_err(|e| Error::io(&path, e))?;
    Ok(())
}
