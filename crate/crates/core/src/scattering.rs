//! Second-order scattering transform over the dual-tree wavelet: cascaded
//! transform, modulus, Gaussian smoothing, decimation to a common output
//! grid. The lowpass band never enters the feature stack.

use crate::dtcwt::{self, FilterBank, Orientation};
use crate::error::{Error, Result};
use crate::image::{mirror_index, Image, Plane};

#[derive(Debug, Clone, Copy)]
pub struct ScatteringConfig {
    /// Decomposition depth n of the first wavelet stage.
    pub levels: usize,
    /// Gaussian smoothing std in pixels at the output grid.
    pub smoothing_sigma: f64,
    pub include_order2: bool,
}

impl ScatteringConfig {
    pub fn with_levels(levels: usize) -> Self {
        ScatteringConfig {
            levels,
            smoothing_sigma: (1usize << levels) as f64 / 2.0,
            include_order2: true,
        }
    }
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        ScatteringConfig::with_levels(2)
    }
}

/// Provenance of one channel in the stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelInfo {
    pub order: u8,
    pub color_channel: usize,
    /// Scale of the first wavelet stage (1-based level).
    pub level1: usize,
    pub orientation1: Orientation,
    /// Scale and orientation of the second stage for order-2 channels.
    pub level2: Option<usize>,
    pub orientation2: Option<Orientation>,
}

/// Stack of smoothed nonnegative coefficient planes on the /2^n grid.
#[derive(Debug, Clone)]
pub struct ScatteringMap {
    pub width: usize,
    pub height: usize,
    pub channels: Vec<Plane>,
    pub layout: Vec<ChannelInfo>,
}

impl ScatteringMap {
    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Per-pixel feature vector at an output-grid position.
    pub fn vector_at(&self, x: usize, y: usize) -> Vec<f64> {
        self.channels.iter().map(|c| c.at(x, y)).collect()
    }

    fn append(&mut self, other: ScatteringMap) {
        assert_eq!((self.width, self.height), (other.width, other.height));
        self.channels.extend(other.channels);
        self.layout.extend(other.layout);
    }
}

/// Truncated (+-3 sigma) normalized Gaussian taps.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "smoothing sigma must be positive");
    let r = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian smoothing with mirror-without-repeat extension.
fn smooth(p: &Plane, sigma: f64) -> Plane {
    let k = gaussian_kernel(sigma);
    let c = (k.len() - 1) / 2;
    let (w, h) = (p.width, p.height);
    let mut tmp = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (m, &wt) in k.iter().enumerate() {
                acc += wt * p.at(mirror_index(x as isize + m as isize - c as isize, w), y);
            }
            tmp.set(x, y, acc);
        }
    }
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (m, &wt) in k.iter().enumerate() {
                acc += wt * tmp.at(x, mirror_index(y as isize + m as isize - c as isize, h));
            }
            out.set(x, y, acc);
        }
    }
    out
}

/// Stride-sample a plane down to exactly `target` dims.
fn decimate_to(p: &Plane, step: usize, tw: usize, th: usize) -> Plane {
    let mut out = Plane::zeros(tw, th);
    for y in 0..th {
        let sy = (y * step).min(p.height - 1);
        for x in 0..tw {
            let sx = (x * step).min(p.width - 1);
            out.set(x, y, p.at(sx, sy));
        }
    }
    out
}

fn output_grid(width: usize, height: usize, n: usize) -> (usize, usize) {
    dtcwt::subband_dims(width, height, n)
}

/// First-order scattering of a single-channel image: per level and
/// orientation, the smoothed subband magnitude on the common /2^n grid.
pub fn scatter_order1(
    img: &Image,
    cfg: &ScatteringConfig,
    fb: &FilterBank,
) -> Result<ScatteringMap> {
    if img.channels != 1 {
        return Err(Error::arg("scatter_order1 expects a single-channel image"));
    }
    scatter_order1_plane(&img.plane_copy(0), 0, cfg, fb)
}

fn scatter_order1_plane(
    plane: &Plane,
    color_channel: usize,
    cfg: &ScatteringConfig,
    fb: &FilterBank,
) -> Result<ScatteringMap> {
    let n = cfg.levels;
    let pyr = dtcwt::forward_plane(plane, n, fb)?;
    let (ow, oh) = output_grid(plane.width, plane.height, n);
    let mut channels = Vec::with_capacity(6 * n);
    let mut layout = Vec::with_capacity(6 * n);
    for level in 1..=n {
        let step = 1usize << (n - level);
        let sigma = cfg.smoothing_sigma * step as f64;
        for &orientation in Orientation::ALL.iter() {
            let m = dtcwt::magnitude(pyr.subband(level, orientation));
            let s = smooth(&m, sigma);
            channels.push(decimate_to(&s, step, ow, oh));
            layout.push(ChannelInfo {
                order: 1,
                color_channel,
                level1: level,
                orientation1: orientation,
                level2: None,
                orientation2: None,
            });
        }
    }
    Ok(ScatteringMap {
        width: ow,
        height: oh,
        channels,
        layout,
    })
}

/// Second-order channels: one further wavelet stage over each order-1
/// magnitude plane whose next scale stays within the n-scale budget
/// (second scale coarser than the first), then modulus, smoothing, and
/// decimation to the common grid.
pub fn scatter_order2(
    img: &Image,
    cfg: &ScatteringConfig,
    fb: &FilterBank,
) -> Result<ScatteringMap> {
    if img.channels != 1 {
        return Err(Error::arg("scatter_order2 expects a single-channel image"));
    }
    if !cfg.include_order2 {
        return Err(Error::arg(
            "scatter_order2 called with include_order2 = false",
        ));
    }
    scatter_order2_plane(&img.plane_copy(0), 0, cfg, fb)
}

fn scatter_order2_plane(
    plane: &Plane,
    color_channel: usize,
    cfg: &ScatteringConfig,
    fb: &FilterBank,
) -> Result<ScatteringMap> {
    let n = cfg.levels;
    let pyr = dtcwt::forward_plane(plane, n, fb)?;
    let (ow, oh) = output_grid(plane.width, plane.height, n);
    let mut channels = Vec::new();
    let mut layout = Vec::new();
    // level-j magnitudes admit one deeper stage at scale j+1; retain only
    // paths whose second scale still fits the budget (j + 1 <= n)
    for level in 1..n {
        let second_scale = level + 1;
        let step = 1usize << (n - second_scale);
        let sigma = cfg.smoothing_sigma * step as f64;
        for &o1 in Orientation::ALL.iter() {
            let m1 = dtcwt::magnitude(pyr.subband(level, o1));
            let pyr2 = dtcwt::forward_plane(&m1, 1, fb)?;
            for &o2 in Orientation::ALL.iter() {
                let m2 = dtcwt::magnitude(pyr2.subband(1, o2));
                let s = smooth(&m2, sigma);
                channels.push(decimate_to(&s, step, ow, oh));
                layout.push(ChannelInfo {
                    order: 2,
                    color_channel,
                    level1: level,
                    orientation1: o1,
                    level2: Some(second_scale),
                    orientation2: Some(o2),
                });
            }
        }
    }
    Ok(ScatteringMap {
        width: ow,
        height: oh,
        channels,
        layout,
    })
}

/// Full scattering of a 1- or 3-channel image: order-1 (and order-2 when
/// configured) per color channel, concatenated channel-major.
pub fn scatter_image(
    img: &Image,
    cfg: &ScatteringConfig,
    fb: &FilterBank,
) -> Result<ScatteringMap> {
    let mut out: Option<ScatteringMap> = None;
    for c in 0..img.channels {
        let plane = img.plane_copy(c);
        let mut map = scatter_order1_plane(&plane, c, cfg, fb)?;
        if cfg.include_order2 {
            map.append(scatter_order2_plane(&plane, c, cfg, fb)?);
        }
        match &mut out {
            None => out = Some(map),
            Some(acc) => acc.append(map),
        }
    }
    Ok(out.expect("image has at least one channel"))
}

/// Serialize a scattering map: normalized PGM per channel, raw f64 sidecars,
/// JSON layout manifest.
pub fn dump_scattering(map: &ScatteringMap, dir: &std::path::Path) -> Result<()> {
    use serde_json::json;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::new();
    for (i, (plane, info)) in map.channels.iter().zip(&map.layout).enumerate() {
        let lo = plane.data.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = plane.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let norm = Plane::new(
            plane.width,
            plane.height,
            plane.data.iter().map(|&v| (v - lo) / span).collect(),
        );
        let name = format!("ch{:03}", i);
        let pgm_path = dir.join(format!("{name}.pgm"));
        std::fs::write(&pgm_path, crate::image::encode_pgm(&norm, 16))
            .map_err(|e| Error::io(&pgm_path, e))?;
        let raw_path = dir.join(format!("{name}.f64"));
        let raw: Vec<u8> = plane.data.iter().flat_map(|v| v.to_le_bytes()).collect();
        std::fs::write(&raw_path, raw).map_err(|e| Error::io(&raw_path, e))?;
        entries.push(json!({
            "index": i,
            "order": info.order,
            "color_channel": info.color_channel,
            "level1": info.level1,
            "orientation1": info.orientation1.degrees(),
            "level2": info.level2,
            "orientation2": info.orientation2.map(|o| o.degrees()),
            "min": lo,
            "max": hi,
            "pgm": format!("{name}.pgm"),
            "raw": format!("{name}.f64"),
        }));
    }
    let manifest = json!({
        "schema_version": 1,
        "kind": "scattering",
        "width": map.width,
        "height": map.height,
        "channels": entries,
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&manifest).unwrap())
        .map_err(|e| Error::io(&path, e))?;
    Ok(())
}
