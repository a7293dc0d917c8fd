//! Shared generators and oracles for the integration and acceptance suites.
#![allow(dead_code)]

use inpaint_forensics::dtcwt::FilterBank;
use inpaint_forensics::image::{box_blur, BinaryMask, Image, Plane, ProbabilityMask};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = rng.random::<f64>().max(1e-12f64);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn noise_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
    let data = (0..w * h).map(|_| rng.random::<f64>()).collect();
    Image::new(w, h, 1, data).unwrap()
}

/// Band-limited texture: white noise smoothed by two box passes.
pub fn textured_image(rng: &mut ChaCha8Rng, size: usize) -> Image {
    let img = noise_image(rng, size, size);
    box_blur(&box_blur(&img, 1), 1)
}

pub fn circular_shift(img: &Image, dx: usize, dy: usize) -> Image {
    let (w, h) = (img.width, img.height);
    let src = img.plane(0);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[((y + dy) % h) * w + (x + dx) % w] = src[y * w + x];
        }
    }
    Image::new(w, h, 1, out).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn iou(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let mut inter = 0usize;
    let mut uni = 0usize;
    for (x, y) in a.bits.iter().zip(&b.bits) {
        if *x && *y {
            inter += 1;
        }
        if *x || *y {
            uni += 1;
        }
    }
    if uni == 0 {
        1.0
    } else {
        inter as f64 / uni as f64
    }
}

/// Synthetic inpainting forgery: a blurred (noise-free) rectangle pasted
/// into a noisy texture, with the candidate mask dilated 8 px beyond the
/// true rectangle.
pub struct Forgery {
    pub img: Image,
    pub truth: BinaryMask,
    pub candidate: ProbabilityMask,
}

pub fn make_forgery(seed: u64) -> Forgery {
    let mut rng = rng(seed);
    let n = 128usize;
    let base = noise_image(&mut rng, n, n);
    let img0 = box_blur(&base, 1);
    let mut data: Vec<f64> = img0.data().to_vec();
    for v in data.iter_mut() {
        *v = (*v * 0.5 + 0.25 + 0.12 * gaussian(&mut rng)).clamp(0.0, 1.0);
    }
    let noisy = Image::new(n, n, 1, data).unwrap();
    let rw = 48 + (rng.random::<u32>() % 17) as usize;
    let rh = 48 + (rng.random::<u32>() % 17) as usize;
    let rx = 12 + (rng.random::<u32>() as usize) % (n - rw - 24);
    let ry = 12 + (rng.random::<u32>() as usize) % (n - rh - 24);
    let blurred = box_blur(&noisy, 3);
    let mut data = noisy.data().to_vec();
    let mut truth = BinaryMask::empty(n, n);
    for y in ry..ry + rh {
        for x in rx..rx + rw {
            data[y * n + x] = blurred.data()[y * n + x];
            truth.set(x, y, true);
        }
    }
    let mut cand = vec![0.0f64; n * n];
    for y in ry - 8..(ry + rh + 8).min(n) {
        for x in rx - 8..(rx + rw + 8).min(n) {
            cand[y * n + x] = 1.0;
        }
    }
    Forgery {
        img: Image::new(n, n, 1, data).unwrap(),
        truth,
        candidate: ProbabilityMask::new(n, n, cand),
    }
}

/// Critically sampled two-level real DWT oracle built from the same filter
/// taps but with plain convolve-and-decimate filtering, independent of the
/// dual-tree implementation. Returns the three level-2 detail magnitudes.
pub fn dwt2_level2_magnitudes(img: &Image, fb: &FilterBank) -> Vec<Plane> {
    fn mirror(p: isize, n: usize) -> usize {
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
    // zero-phase filter + phase-0 decimation along columns
    fn filt_down_cols(p: &Plane, f: &[f64]) -> Plane {
        let (w, h) = (p.width, p.height);
        let c = (f.len() - 1) / 2;
        let h2 = h / 2;
        let mut out = Plane::zeros(w, h2);
        for oy in 0..h2 {
            for x in 0..w {
                let mut acc = 0.0;
                for (m, &wt) in f.iter().enumerate() {
                    let sy = mirror(2 * oy as isize + m as isize - c as isize, h);
                    acc += wt * p.at(x, sy);
                }
                out.set(x, oy, acc);
            }
        }
        out
    }
    fn transpose(p: &Plane) -> Plane {
        let mut out = Plane::zeros(p.height, p.width);
        for y in 0..p.height {
            for x in 0..p.width {
                out.set(y, x, p.at(x, y));
            }
        }
        out
    }
    fn filt_down_rows(p: &Plane, f: &[f64]) -> Plane {
        transpose(&filt_down_cols(&transpose(p), f))
    }
    // even-length filters for level 2: decimate with the same helper
    fn filt_down_cols_even(p: &Plane, f: &[f64]) -> Plane {
        let (w, h) = (p.width, p.height);
        let h2 = h / 2;
        let mut out = Plane::zeros(w, h2);
        for oy in 0..h2 {
            for x in 0..w {
                let mut acc = 0.0;
                for (m, &wt) in f.iter().enumerate() {
                    let sy = mirror(2 * oy as isize + m as isize - (f.len() / 2) as isize, h);
                    acc += wt * p.at(x, sy);
                }
                out.set(x, oy, acc);
            }
        }
        out
    }
    fn filt_down_rows_even(p: &Plane, f: &[f64]) -> Plane {
        transpose(&filt_down_cols_even(&transpose(p), f))
    }

    let plane = Plane::new(img.width, img.height, img.plane(0).to_vec());
    let lo = &fb.level1.analysis_lo;
    let l = filt_down_cols(&plane, lo);
    let ll = filt_down_rows(&l, lo);
    let lo2 = &fb.qshift.lo_a;
    let hi2 = &fb.qshift.hi_a;
    let l2 = filt_down_cols_even(&ll, lo2);
    let h2 = filt_down_cols_even(&ll, hi2);
    let lh = filt_down_rows_even(&l2, hi2);
    let hl = filt_down_rows_even(&h2, lo2);
    let hh = filt_down_rows_even(&h2, hi2);
    [lh, hl, hh]
        .into_iter()
        .map(|p| Plane::new(p.width, p.height, p.data.iter().map(|v| v.abs()).collect()))
        .collect()
}

/// Pooled relative L2 distance between two equal stacks of planes.
pub fn rel_l2(stack_a: &[Plane], stack_b: &[Plane]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in stack_a.iter().zip(stack_b) {
        for (x, y) in a.data.iter().zip(&b.data) {
            num += (x - y) * (x - y);
            den += x * x;
        }
    }
    (num / den.max(1e-300)).sqrt()
}
