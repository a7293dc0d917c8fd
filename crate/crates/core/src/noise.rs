//! Patch-level noise and texture statistics over the level-1 dual-tree
//! subbands inside a segment, and robust flagging of inconsistent patches.

use std::collections::BTreeSet;

use crate::dtcwt::{self, DtcwtPyramid, FilterBank, Orientation};
use crate::error::{Error, Result};

/// Converts a Gaussian MAD to a standard deviation.
const MAD_TO_SIGMA: f64 = 1.0 / 0.6745;

/// Robust sigma: median absolute deviation about the median, rescaled for
/// Gaussian consistency.
pub fn estimate_noise_sigma(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::arg(format!(
            "noise estimation needs >= 2 samples, got {}",
            samples.len()
        )));
    }
    let med = median(samples);
    let dev: Vec<f64> = samples.iter().map(|&s| (s - med).abs()).collect();
    Ok(median(&dev) * MAD_TO_SIGMA)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Rectangular grid of analysis cells in subband coordinates.
#[derive(Debug, Clone, Copy)]
pub struct PatchGrid {
    pub grid_cols: usize,
    pub grid_rows: usize,
    /// A cell with fewer in-segment subband pixels than this is invalid.
    pub min_cell_pixels: usize,
}

impl Default for PatchGrid {
    fn default() -> Self {
        PatchGrid {
            grid_cols: 8,
            grid_rows: 8,
            min_cell_pixels: 16,
        }
    }
}

/// Half-open rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl PatchGrid {
    pub fn cell_count(&self) -> usize {
        self.grid_cols * self.grid_rows
    }

    /// Cell rectangle on a `w x h` grid; cells tile it exactly.
    pub fn cell_rect(&self, cell: usize, w: usize, h: usize) -> CellRect {
        let (i, j) = (cell % self.grid_cols, cell / self.grid_cols);
        CellRect {
            x0: i * w / self.grid_cols,
            x1: (i + 1) * w / self.grid_cols,
            y0: j * h / self.grid_rows,
            y1: (j + 1) * h / self.grid_rows,
        }
    }

    /// The same cell mapped to image coordinates (subband grid is half
    /// resolution).
    pub fn cell_rect_image(
        &self,
        cell: usize,
        sub_w: usize,
        sub_h: usize,
        img_w: usize,
        img_h: usize,
    ) -> CellRect {
        let r = self.cell_rect(cell, sub_w, sub_h);
        CellRect {
            x0: (r.x0 * 2).min(img_w),
            y0: (r.y0 * 2).min(img_h),
            x1: (r.x1 * 2).min(img_w),
            y1: (r.y1 * 2).min(img_h),
        }
    }
}

/// Per-cell statistics over the six level-1 bands.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PatchStats {
    pub cell: usize,
    pub valid: bool,
    pub in_segment_pixels: usize,
    pub band_mag_mean: [f64; 6],
    pub band_mag_std: [f64; 6],
    pub band_re_mean: [f64; 6],
    pub noise_sigma: f64,
}

impl PatchStats {
    fn invalid(cell: usize, pixels: usize) -> Self {
        PatchStats {
            cell,
            valid: false,
            in_segment_pixels: pixels,
            band_mag_mean: [0.0; 6],
            band_mag_std: [0.0; 6],
            band_re_mean: [0.0; 6],
            noise_sigma: 0.0,
        }
    }
}

/// Statistic family that triggered a flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum StatKind {
    MagnitudeMean,
    MagnitudeStd,
    NoiseSigma,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagRecord {
    pub cell: usize,
    /// Band index in orientation order for per-band families.
    pub band: Option<usize>,
    pub kind: StatKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlagSet {
    pub threshold: f64,
    /// True when fewer than 3 valid cells made flagging meaningless.
    pub inconclusive: bool,
    pub records: Vec<FlagRecord>,
}

impl FlagSet {
    pub fn flagged_cells(&self) -> BTreeSet<usize> {
        self.records.iter().map(|r| r.cell).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Majority-rule downsampling of an image-resolution pixel set to the
/// level-1 subband grid.
pub fn downsample_mask_majority(
    mask: &[bool],
    img_w: usize,
    img_h: usize,
    sub_w: usize,
    sub_h: usize,
) -> Vec<bool> {
    let mut out = vec![false; sub_w * sub_h];
    for sy in 0..sub_h {
        for sx in 0..sub_w {
            let mut total = 0usize;
            let mut set = 0usize;
            for dy in 0..2 {
                for dx in 0..2 {
                    let (x, y) = (2 * sx + dx, 2 * sy + dy);
                    if x < img_w && y < img_h {
                        total += 1;
                        if mask[y * img_w + x] {
                            set += 1;
                        }
                    }
                }
            }
            out[sy * sub_w + sx] = total > 0 && 2 * set >= total;
        }
    }
    out
}

/// Per-cell statistics of the level-1 bands restricted to a segment.
///
/// `segment_mask` is an image-resolution pixel set (true = in segment); it
/// is reduced to subband resolution by majority rule.
pub fn patch_statistics(
    pyr: &DtcwtPyramid,
    fb: &FilterBank,
    segment_mask: &[bool],
    grid: &PatchGrid,
) -> Result<Vec<PatchStats>> {
    if segment_mask.len() != pyr.orig_width * pyr.orig_height {
        return Err(Error::arg("segment mask does not match the image"));
    }
    let bands: Vec<&dtcwt::ComplexSubband> = Orientation::ALL
        .iter()
        .map(|&o| pyr.subband(1, o))
        .collect();
    let (sw, sh) = (bands[0].width, bands[0].height);
    let sub_mask = downsample_mask_majority(segment_mask, pyr.orig_width, pyr.orig_height, sw, sh);
    let gain = dtcwt::noise_gain_level1_diagonal(fb);
    let diag = Orientation::Deg45.index();

    let mut out = Vec::with_capacity(grid.cell_count());
    for cell in 0..grid.cell_count() {
        let r = grid.cell_rect(cell, sw, sh);
        let mut idx = Vec::new();
        for y in r.y0..r.y1 {
            for x in r.x0..r.x1 {
                if sub_mask[y * sw + x] {
                    idx.push(y * sw + x);
                }
            }
        }
        if idx.len() < grid.min_cell_pixels.max(2) {
            out.push(PatchStats::invalid(cell, idx.len()));
            continue;
        }
        let mut stats = PatchStats {
            cell,
            valid: true,
            in_segment_pixels: idx.len(),
            band_mag_mean: [0.0; 6],
            band_mag_std: [0.0; 6],
            band_re_mean: [0.0; 6],
            noise_sigma: 0.0,
        };
        for (b, sb) in bands.iter().enumerate() {
            let n = idx.len() as f64;
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            let mut sum_re = 0.0;
            for &i in &idx {
                let (re, im) = (sb.re.data[i], sb.im.data[i]);
                let m = (re * re + im * im).sqrt();
                sum += m;
                sum2 += m * m;
                sum_re += re;
            }
            let mean = sum / n;
            stats.band_mag_mean[b] = mean;
            stats.band_mag_std[b] = (sum2 / n - mean * mean).max(0.0).sqrt();
            stats.band_re_mean[b] = sum_re / n;
        }
        // wavelet-domain MAD over the diagonal band, back at image scale
        let mut samples = Vec::with_capacity(2 * idx.len());
        for &i in &idx {
            samples.push(bands[diag].re.data[i]);
            samples.push(bands[diag].im.data[i]);
        }
        stats.noise_sigma = estimate_noise_sigma(&samples)? / gain;
        out.push(stats);
    }
    Ok(out)
}

/// Noise sigma of a whole image region from the finest diagonal band.
pub fn estimate_image_noise(
    pyr: &DtcwtPyramid,
    fb: &FilterBank,
    segment_mask: Option<&[bool]>,
) -> Result<f64> {
    let sb = pyr.subband(1, Orientation::Deg45);
    let (sw, sh) = (sb.width, sb.height);
    let keep: Vec<bool> = match segment_mask {
        Some(m) => downsample_mask_majority(m, pyr.orig_width, pyr.orig_height, sw, sh),
        None => vec![true; sw * sh],
    };
    let mut samples = Vec::new();
    for i in 0..sw * sh {
        if keep[i] {
            samples.push(sb.re.data[i]);
            samples.push(sb.im.data[i]);
        }
    }
    Ok(estimate_noise_sigma(&samples)? / dtcwt::noise_gain_level1_diagonal(fb))
}

/// Robust z-score flagging across valid cells. For each statistic family
/// the median and MAD over cells define the corridor; any family with
/// |stat - median| > k * 1.4826 * MAD flags the cell. Zero-MAD families are
/// skipped.
pub fn flag_inconsistent_patches(stats: &[PatchStats], k: f64) -> FlagSet {
    let valid: Vec<&PatchStats> = stats.iter().filter(|s| s.valid).collect();
    if valid.len() < 3 {
        return FlagSet {
            threshold: k,
            inconclusive: true,
            records: Vec::new(),
        };
    }
    let mut records = Vec::new();
    let run_family = |records: &mut Vec<FlagRecord>,
                      kind: StatKind,
                      band: Option<usize>,
                      get: &dyn Fn(&PatchStats) -> f64| {
        let vals: Vec<f64> = valid.iter().map(|s| get(s)).collect();
        let med = median(&vals);
        let dev: Vec<f64> = vals.iter().map(|v| (v - med).abs()).collect();
        let mad = median(&dev);
        if mad == 0.0 {
            return;
        }
        let cut = k * 1.4826 * mad;
        for (s, &v) in valid.iter().zip(&vals) {
            if (v - med).abs() > cut {
                records.push(FlagRecord {
                    cell: s.cell,
                    band,
                    kind,
                });
            }
        }
    };
    for b in 0..6 {
        run_family(&mut records, StatKind::MagnitudeMean, Some(b), &move |s| {
            s.band_mag_mean[b]
        });
    }
    for b in 0..6 {
        run_family(&mut records, StatKind::MagnitudeStd, Some(b), &move |s| {
            s.band_mag_std[b]
        });
    }
    run_family(&mut records, StatKind::NoiseSigma, None, &|s| s.noise_sigma);
    records.sort_by_key(|r| r.cell);
    FlagSet {
        threshold: k,
        inconclusive: false,
        records,
    }
}
