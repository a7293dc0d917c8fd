//! Candidate-mask providers: a strict file loader and a classical baseline
//! scorer so the fusion stage can run end to end without any trained model.

use std::path::{Path, PathBuf};

use crate::dtcwt::FilterBank;
use crate::error::{Error, Result};
use crate::image::{decode_image, to_grayscale, Image, ProbabilityMask};
use crate::scattering::{scatter_order1, ScatteringConfig};

/// Where a candidate mask comes from.
#[derive(Debug, Clone)]
pub enum CandidateSource {
    File(PathBuf),
    Baseline(BaselineParams),
}

impl CandidateSource {
    /// Produce the probability mask for an image.
    pub fn resolve(&self, img: &Image, fb: &FilterBank) -> Result<ProbabilityMask> {
        match self {
            CandidateSource::File(path) => load_candidate(path, img.width, img.height),
            CandidateSource::Baseline(params) => baseline_score(img, params, fb),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BaselineParams {
    /// Box half-width (in output-grid cells) used to pool anomaly scores.
    pub window_radius: usize,
    /// Robust-z value mapped to score 0.5 by the logistic squash.
    pub z_center: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            window_radius: 4,
            z_center: 2.5,
        }
    }
}

/// Load a probability mask from a gray image file; dimensions must match
/// the image exactly (no silent resizing).
pub fn load_candidate(path: &Path, img_width: usize, img_height: usize) -> Result<ProbabilityMask> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let img = decode_image(&bytes)?;
    if img.channels != 1 {
        return Err(Error::arg(format!(
            "{}: candidate mask must be single-channel, got {} channels",
            path.display(),
            img.channels
        )));
    }
    if img.width != img_width || img.height != img_height {
        return Err(Error::arg(format!(
            "{}: candidate mask is {}x{} but the image is {}x{}",
            path.display(),
            img.width,
            img.height,
            img_width,
            img_height
        )));
    }
    Ok(ProbabilityMask::new(
        img.width,
        img.height,
        img.plane(0).to_vec(),
    ))
}

/// Score each pixel by how anomalous its order-1 scattering vector is
/// against the image-global per-channel statistics, squashed into the
/// unit interval.
pub fn baseline_score(
    img: &Image,
    params: &BaselineParams,
    fb: &FilterBank,
) -> Result<ProbabilityMask> {
    let gray = to_grayscale(img);
    let cfg = ScatteringConfig {
        include_order2: false,
        ..Default::default()
    };
    let map = scatter_order1(&gray, &cfg, fb)?;
    let (gw, gh) = (map.width, map.height);
    let cells = gw * gh;
    let nchan = map.channel_count();

    // global per-channel median and MAD
    let mut med = vec![0.0f64; nchan];
    let mut mad = vec![0.0f64; nchan];
    for (c, plane) in map.channels.iter().enumerate() {
        med[c] = median(&plane.data);
        let dev: Vec<f64> = plane.data.iter().map(|&v| (v - med[c]).abs()).collect();
        mad[c] = median(&dev);
    }

    // mean robust z over channels with spread
    let mut z = vec![0.0f64; cells];
    for i in 0..cells {
        let mut acc = 0.0;
        let mut used = 0usize;
        for c in 0..nchan {
            if mad[c] > 0.0 {
                acc += (map.channels[c].data[i] - med[c]).abs() / (1.4826 * mad[c]);
                used += 1;
            }
        }
        z[i] = if used > 0 { acc / used as f64 } else { 0.0 };
    }

    // pool over a box window of output cells for spatial coherence
    let r = params.window_radius as isize;
    let mut pooled = vec![0.0f64; cells];
    for y in 0..gh {
        for x in 0..gw {
            let mut acc = 0.0;
            let mut count = 0usize;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (sx, sy) = (x as isize + dx, y as isize + dy);
                    if sx >= 0 && sx < gw as isize && sy >= 0 && sy < gh as isize {
                        acc += z[sy as usize * gw + sx as usize];
                        count += 1;
                    }
                }
            }
            pooled[y * gw + x] = acc / count as f64;
        }
    }

    // logistic squash centered at z_center, then nearest upsample
    let (w, h) = (img.width, img.height);
    let mut values = vec![0.0f64; w * h];
    for y in 0..h {
        let gy = (y * gh / h).min(gh - 1);
        for x in 0..w {
            let gx = (x * gw / w).min(gw - 1);
            let s = 1.0 / (1.0 + (-(pooled[gy * gw + gx] - params.z_center)).exp());
            values[y * w + x] = s;
        }
    }
    Ok(ProbabilityMask::new(w, h, values))
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
