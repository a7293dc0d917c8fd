//! Image representation, PNG/NetPBM codecs, color conversion, and the
//! post-processing perturbations (resize, box blur) used for robustness runs.

use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

/// Planar floating-point raster with samples in `[0,1]`.
///
/// Data is stored plane-major: all of channel 0 row by row, then channel 1,
/// and so on. `channels` is 1 (gray) or 3 (RGB).
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    data: Vec<f64>,
}

/// A single real-valued plane. Used for wavelet coefficients, masks of
/// confidences, and intermediate per-channel work.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "plane data length mismatch");
        Plane {
            width,
            height,
            data,
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Plane {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }
}

/// Per-pixel boolean verdict (true = forged).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width * height, "mask length mismatch");
        BinaryMask {
            width,
            height,
            bits,
        }
    }

    pub fn empty(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Per-pixel forgery confidence in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMask {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl ProbabilityMask {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), width * height, "mask length mismatch");
        ProbabilityMask {
            width,
            height,
            values,
        }
    }
}

impl Image {
    /// Construct from planar data; validates dimensions and channel count.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::arg(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::arg(format!(
                "data length {} does not match {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn from_plane(plane: Plane) -> Self {
        Image {
            width: plane.width,
            height: plane.height,
            channels: 1,
            data: plane.data,
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Borrow one color plane.
    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_copy(&self, c: usize) -> Plane {
        Plane::new(self.width, self.height, self.plane(c).to_vec())
    }

    #[inline]
    pub fn sample(&self, c: usize, x: usize, y: usize) -> f64 {
        self.data[c * self.width * self.height + y * self.width + x]
    }
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

/// Decode a PNG or NetPBM (P2/P3/P5/P6) stream into a planar `[0,1]` image.
pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    if bytes.len() >= 8 && bytes[..8] == [0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'] {
        decode_png(bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && matches!(bytes[1], b'2' | b'3' | b'5' | b'6')
    {
        decode_netpbm(bytes)
    } else {
        Err(Error::decode(0, "not a PNG or NetPBM stream"))
    }
}

/// Read and decode an image file.
pub fn load_image(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|e| match e {
        Error::Decode { offset, reason } => Error::Decode {
            offset,
            reason: format!("{}: {}", path.display(), reason),
        },
        other => other,
    })
}

/// Decode a single-channel image as a binary mask (nonzero = forged).
pub fn decode_binary_mask(bytes: &[u8]) -> Result<BinaryMask> {
    let img = decode_image(bytes)?;
    let img = to_grayscale(&img);
    Ok(BinaryMask::new(
        img.width,
        img.height,
        img.plane(0).iter().map(|&v| v > 0.0).collect(),
    ))
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::decode(0, format!("png: {e}")))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::decode(0, format!("png: {e}")))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => {
            return Err(Error::decode(
                0,
                format!("png: unsupported color type {other:?} (gray or RGB only)"),
            ))
        }
    };
    let data = &buf[..info.buffer_size()];
    let mut planes = vec![0.0f64; w * h * channels];
    match info.bit_depth {
        png::BitDepth::Eight => {
            for (i, px) in data.chunks_exact(channels).enumerate() {
                for (c, &b) in px.iter().enumerate() {
                    planes[c * w * h + i] = b as f64 / 255.0;
                }
            }
        }
        png::BitDepth::Sixteen => {
            for (i, px) in data.chunks_exact(2 * channels).enumerate() {
                for c in 0..channels {
                    let v = u16::from_be_bytes([px[2 * c], px[2 * c + 1]]);
                    planes[c * w * h + i] = v as f64 / 65535.0;
                }
            }
        }
        other => {
            return Err(Error::decode(
                0,
                format!("png: unsupported bit depth {other:?} (8 or 16 only)"),
            ))
        }
    }
    Image::new(w, h, channels, planes)
}

/// Incremental NetPBM token scanner that tracks its byte offset for errors.
struct PbmScanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PbmScanner<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_uint(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::decode(start, format!("expected {what}")));
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        s.parse::<u32>()
            .map_err(|_| Error::decode(start, format!("{what} out of range")))
    }
}

fn decode_netpbm(bytes: &[u8]) -> Result<Image> {
    let kind = bytes[1];
    let channels = if kind == b'3' || kind == b'6' { 3 } else { 1 };
    let ascii = kind == b'2' || kind == b'3';
    let mut sc = PbmScanner { bytes, pos: 2 };
    let w = sc.next_uint("width")? as usize;
    let h = sc.next_uint("height")? as usize;
    let maxval = sc.next_uint("maxval")?;
    if w == 0 || h == 0 {
        return Err(Error::decode(2, "zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::decode(sc.pos, format!("bad maxval {maxval}")));
    }
    let count = w * h * channels;
    let mut planes = vec![0.0f64; count];
    let maxval_f = maxval as f64;
    if ascii {
        for i in 0..count {
            let at = sc.pos;
            let v = sc.next_uint("sample")?;
            if v > maxval {
                return Err(Error::decode(at, format!("sample {v} exceeds maxval")));
            }
            let (pix, c) = (i / channels, i % channels);
            planes[c * w * h + pix] = v as f64 / maxval_f;
        }
    } else {
        // single whitespace byte separates header from raster
        if sc.pos >= bytes.len() || !bytes[sc.pos].is_ascii_whitespace() {
            return Err(Error::decode(sc.pos, "missing raster separator"));
        }
        sc.pos += 1;
        let wide = maxval > 255;
        let bytes_per = if wide { 2 } else { 1 };
        let need = count * bytes_per;
        if bytes.len() - sc.pos < need {
            return Err(Error::decode(
                bytes.len(),
                format!(
                    "truncated raster: need {need} bytes, have {}",
                    bytes.len() - sc.pos
                ),
            ));
        }
        for i in 0..count {
            let at = sc.pos + i * bytes_per;
            let v = if wide {
                u16::from_be_bytes([bytes[at], bytes[at + 1]]) as u32
            } else {
                bytes[at] as u32
            };
            if v > maxval {
                return Err(Error::decode(at, format!("sample {v} exceeds maxval")));
            }
            let (pix, c) = (i / channels, i % channels);
            planes[c * w * h + pix] = v as f64 / maxval_f;
        }
    }
    Image::new(w, h, channels, planes)
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

/// Encode a gray image as binary PGM (P5). `bits` is 8 or 16.
pub fn encode_pgm(plane: &Plane, bits: u32) -> Vec<u8> {
    let maxval: u32 = if bits == 16 { 65535 } else { 255 };
    let mut out = format!("P5\n{} {}\n{}\n", plane.width, plane.height, maxval).into_bytes();
    for &v in &plane.data {
        let q = (v.clamp(0.0, 1.0) * maxval as f64).round() as u32;
        if bits == 16 {
            out.extend_from_slice(&(q as u16).to_be_bytes());
        } else {
            out.push(q as u8);
        }
    }
    out
}

/// Encode an RGB image as binary PPM (P6, 8-bit).
pub fn encode_ppm(img: &Image) -> Vec<u8> {
    assert_eq!(img.channels, 3);
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    let n = img.width * img.height;
    for i in 0..n {
        for c in 0..3 {
            out.push((img.data[c * n + i].clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    out
}

/// Encode an image losslessly. Gray goes to PGM, RGB to PPM; 1-channel data
/// may request 16-bit depth.
pub fn encode_image(img: &Image, bits: u32) -> Vec<u8> {
    if img.channels == 1 {
        encode_pgm(
            &Plane::new(img.width, img.height, img.plane(0).to_vec()),
            bits,
        )
    } else {
        encode_ppm(img)
    }
}

pub fn mask_to_plane(mask: &BinaryMask) -> Plane {
    Plane::new(
        mask.width,
        mask.height,
        mask.bits
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Color conversion and perturbations
// ---------------------------------------------------------------------------

/// ITU-R BT.601 luma: 0.299 R + 0.587 G + 0.114 B. Identity on gray input.
pub fn to_grayscale(img: &Image) -> Image {
    if img.channels == 1 {
        return img.clone();
    }
    let n = img.width * img.height;
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let data: Vec<f64> = (0..n)
        .map(|i| 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i])
        .collect();
    Image::new(img.width, img.height, 1, data).unwrap()
}

/// Bilinear resize by `factor` with half-pixel-center sampling.
/// Output dimensions are `round(dim * factor)`.
pub fn resize_bilinear(img: &Image, factor: f64) -> Result<Image> {
    if !(factor > 0.0) {
        return Err(Error::arg(format!(
            "resize factor must be > 0, got {factor}"
        )));
    }
    let ow = (img.width as f64 * factor).round() as usize;
    let oh = (img.height as f64 * factor).round() as usize;
    if ow == 0 || oh == 0 {
        return Err(Error::arg(format!(
            "resize factor {factor} yields zero dimension from {}x{}",
            img.width, img.height
        )));
    }
    if factor == 1.0 {
        return Ok(img.clone());
    }
    let sx = img.width as f64 / ow as f64;
    let sy = img.height as f64 / oh as f64;
    let mut data = vec![0.0f64; ow * oh * img.channels];
    for c in 0..img.channels {
        let src = img.plane(c);
        let dst = &mut data[c * ow * oh..(c + 1) * ow * oh];
        for oy in 0..oh {
            // half-pixel centers: output center maps into input coordinates
            let fy = ((oy as f64 + 0.5) * sy - 0.5).clamp(0.0, (img.height - 1) as f64);
            let y0 = fy.floor() as usize;
            let y1 = (y0 + 1).min(img.height - 1);
            let wy = fy - y0 as f64;
            for ox in 0..ow {
                let fx = ((ox as f64 + 0.5) * sx - 0.5).clamp(0.0, (img.width - 1) as f64);
                let x0 = fx.floor() as usize;
                let x1 = (x0 + 1).min(img.width - 1);
                let wx = fx - x0 as f64;
                let top = src[y0 * img.width + x0] * (1.0 - wx) + src[y0 * img.width + x1] * wx;
                let bot = src[y1 * img.width + x0] * (1.0 - wx) + src[y1 * img.width + x1] * wx;
                dst[oy * ow + ox] = top * (1.0 - wy) + bot * wy;
            }
        }
    }
    Image::new(ow, oh, img.channels, data)
}

/// Mirror-without-repeat index for out-of-range positions.
#[inline]
pub(crate) fn mirror_index(p: isize, n: usize) -> usize {
    debug_assert!(n > 0);
    if n == 1 {
        return 0;
    }
    let mut p = p;
    let last = (n - 1) as isize;
    while p < 0 || p > last {
        if p < 0 {
            p = -p;
        }
        if p > last {
            p = 2 * last - p;
        }
    }
    p as usize
}

/// Box blur with window `(2r+1)^2` and mirror-without-repeat extension.
/// Radius 0 is the identity.
pub fn box_blur(img: &Image, radius: usize) -> Image {
    if radius == 0 {
        return img.clone();
    }
    let (w, h) = (img.width, img.height);
    let win = 2 * radius + 1;
    let inv = 1.0 / win as f64;
    let mut data = vec![0.0f64; w * h * img.channels];
    for c in 0..img.channels {
        let src = img.plane(c);
        // horizontal pass
        let mut tmp = vec![0.0f64; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut s = 0.0;
                for d in -(radius as isize)..=(radius as isize) {
                    s += src[y * w + mirror_index(x as isize + d, w)];
                }
                tmp[y * w + x] = s * inv;
            }
        }
        // vertical pass
        let dst = &mut data[c * w * h..(c + 1) * w * h];
        for y in 0..h {
            for x in 0..w {
                let mut s = 0.0;
                for d in -(radius as isize)..=(radius as isize) {
                    s += tmp[mirror_index(y as isize + d, h) * w + x];
                }
                dst[y * w + x] = s * inv;
            }
        }
    }
    Image::new(w, h, img.channels, data).unwrap()
}

/// Threshold a probability mask; strictly greater-than so an all-0.5 mask
/// binarized at 0.5 comes out empty.
pub fn binarize(mask: &ProbabilityMask, threshold: f64) -> BinaryMask {
    BinaryMask::new(
        mask.width,
        mask.height,
        mask.values.iter().map(|&v| v > threshold).collect(),
    )
}

/// Convenience used by the CLI for reading config-like text files.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(f).lines() {
        out.push(line.map_err(|e| Error::io(path, e))?);
    }
    Ok(out)
}
