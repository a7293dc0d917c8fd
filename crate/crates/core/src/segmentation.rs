//! Texture/color segmentation: SLIC superpixels followed by hierarchical
//! mean-color region merging, plus the small-segment filter that excludes
//! tiny regions from downstream noise analysis.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::image::Image;

/// Integer label partition of the pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub k: usize,
    pub areas: Vec<usize>,
}

impl SegmentMap {
    #[inline]
    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Check the partition invariant: every label in [0,k), areas consistent.
    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.width * self.height {
            return Err(Error::arg("label buffer does not match dimensions"));
        }
        let mut areas = vec![0usize; self.k];
        for &l in &self.labels {
            let l = l as usize;
            if l >= self.k {
                return Err(Error::arg(format!("label {l} out of range 0..{}", self.k)));
            }
            areas[l] += 1;
        }
        if areas != self.areas {
            return Err(Error::arg("recorded areas disagree with labels"));
        }
        if areas.iter().any(|&a| a == 0) {
            return Err(Error::arg("empty segment id (labels not compacted)"));
        }
        Ok(())
    }

    /// Pixel indices of one segment, row-major order.
    pub fn segment_pixels(&self, id: u32) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == id)
            .map(|(i, _)| i)
            .collect()
    }

    fn recompact(width: usize, height: usize, labels: Vec<u32>) -> SegmentMap {
        let mut remap = std::collections::HashMap::new();
        let mut next = 0u32;
        let mut out = Vec::with_capacity(labels.len());
        for &l in &labels {
            let id = *remap.entry(l).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            out.push(id);
        }
        let k = next as usize;
        let mut areas = vec![0usize; k];
        for &l in &out {
            areas[l as usize] += 1;
        }
        SegmentMap {
            width,
            height,
            labels: out,
            k,
            areas,
        }
    }
}

// ---------------------------------------------------------------------------
// Color space
// ---------------------------------------------------------------------------

fn srgb_to_linear(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const D: f64 = 6.0 / 29.0;
    if t > D * D * D {
        t.cbrt()
    } else {
        t / (3.0 * D * D) + 4.0 / 29.0
    }
}

/// sRGB (D65) to CIELAB. Gray inputs land on the L axis.
pub(crate) fn rgb_to_lab(r: f64, g: f64, b: f64) -> [f64; 3] {
    let (rl, gl, bl) = (srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b));
    let x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
    let y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
    let z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
    let (xn, yn, zn) = (0.95047, 1.0, 1.08883);
    let (fx, fy, fz) = (lab_f(x / xn), lab_f(y / yn), lab_f(z / zn));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

fn image_to_lab(img: &Image) -> Vec<[f64; 3]> {
    let n = img.width * img.height;
    let mut out = Vec::with_capacity(n);
    if img.channels == 1 {
        let p = img.plane(0);
        for i in 0..n {
            out.push(rgb_to_lab(p[i], p[i], p[i]));
        }
    } else {
        let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
        for i in 0..n {
            out.push(rgb_to_lab(r[i], g[i], b[i]));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// SLIC
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct Cluster {
    l: f64,
    a: f64,
    b: f64,
    x: f64,
    y: f64,
}

/// SLIC superpixels: localized k-means over (L,a,b,x,y) with deterministic
/// grid initialization, fixed 10 iterations, and connectivity enforcement.
/// `seed` is accepted for interface stability; the algorithm is
/// deterministic and does not consume randomness.
pub fn slic_superpixels(
    img: &Image,
    count: usize,
    compactness: f64,
    _seed: u64,
) -> Result<SegmentMap> {
    let n = img.width * img.height;
    if count == 0 {
        return Err(Error::arg("superpixel count must be >= 1"));
    }
    if count > n {
        return Err(Error::arg(format!(
            "superpixel count {count} exceeds pixel count {n}"
        )));
    }
    let (w, h) = (img.width, img.height);
    let lab = image_to_lab(img);

    // exactly `count` seeds on a near-square staggered grid
    let ny = ((count as f64 * h as f64 / w as f64).sqrt().round() as usize).clamp(1, count);
    let nx = count.div_ceil(ny);
    let rows = count.div_ceil(nx);
    let mut clusters = Vec::with_capacity(count);
    for i in 0..count {
        let (row, col) = (i / nx, i % nx);
        let cx = ((col as f64 + 0.5) * w as f64 / nx as f64).min(w as f64 - 0.5);
        let cy = ((row as f64 + 0.5) * h as f64 / rows as f64).min(h as f64 - 0.5);
        let (px, py) = (cx as usize, cy as usize);
        let c = lab[py * w + px];
        clusters.push(Cluster {
            l: c[0],
            a: c[1],
            b: c[2],
            x: cx,
            y: cy,
        });
    }

    let step = ((n as f64) / count as f64).sqrt().max(1.0);
    let sw = compactness / step; // spatial weight
    let sw2 = sw * sw;
    let reach = (2.0 * step).ceil() as isize;

    let mut assign = vec![u32::MAX; n];
    let mut best = vec![f64::INFINITY; n];
    for _ in 0..10 {
        best.iter_mut().for_each(|d| *d = f64::INFINITY);
        for (ci, c) in clusters.iter().enumerate() {
            let x0 = ((c.x as isize) - reach).max(0) as usize;
            let x1 = ((c.x as isize) + reach).min(w as isize - 1) as usize;
            let y0 = ((c.y as isize) - reach).max(0) as usize;
            let y1 = ((c.y as isize) + reach).min(h as isize - 1) as usize;
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let i = y * w + x;
                    let p = lab[i];
                    let dl = p[0] - c.l;
                    let da = p[1] - c.a;
                    let db = p[2] - c.b;
                    let dx = x as f64 - c.x;
                    let dy = y as f64 - c.y;
                    let d = dl * dl + da * da + db * db + sw2 * (dx * dx + dy * dy);
                    if d < best[i] {
                        best[i] = d;
                        assign[i] = ci as u32;
                    }
                }
            }
        }
        // any pixel outside every search window joins the nearest seed
        for i in 0..n {
            if assign[i] == u32::MAX {
                let (x, y) = ((i % w) as f64, (i / w) as f64);
                let mut bd = f64::INFINITY;
                for (ci, c) in clusters.iter().enumerate() {
                    let d = (x - c.x).powi(2) + (y - c.y).powi(2);
                    if d < bd {
                        bd = d;
                        assign[i] = ci as u32;
                    }
                }
            }
        }
        // recompute centers
        let mut sums = vec![[0.0f64; 6]; count];
        for i in 0..n {
            let ci = assign[i] as usize;
            let s = &mut sums[ci];
            s[0] += lab[i][0];
            s[1] += lab[i][1];
            s[2] += lab[i][2];
            s[3] += (i % w) as f64;
            s[4] += (i / w) as f64;
            s[5] += 1.0;
        }
        for (c, s) in clusters.iter_mut().zip(&sums) {
            if s[5] > 0.0 {
                c.l = s[0] / s[5];
                c.a = s[1] / s[5];
                c.b = s[2] / s[5];
                c.x = s[3] / s[5];
                c.y = s[4] / s[5];
            }
        }
    }

    let labels = enforce_connectivity(&assign, w, h);
    let seg = SegmentMap::recompact(w, h, labels);
    debug_assert!(seg.validate().is_ok());
    Ok(seg)
}

/// Reassign disconnected fragments of each cluster: every component that is
/// not the largest component of its label is absorbed into the largest
/// adjacent segment.
fn enforce_connectivity(assign: &[u32], w: usize, h: usize) -> Vec<u32> {
    let n = w * h;
    // component labeling (4-neighborhood) of equal-assignment regions
    let mut comp = vec![usize::MAX; n];
    let mut comp_area = Vec::new();
    let mut comp_label = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = comp_area.len();
        comp_area.push(0usize);
        comp_label.push(assign[start]);
        stack.push(start);
        comp[start] = id;
        while let Some(i) = stack.pop() {
            comp_area[id] += 1;
            let (x, y) = (i % w, i / w);
            let mut push = |j: usize| {
                if comp[j] == usize::MAX && assign[j] == assign[start] {
                    comp[j] = id;
                    stack.push(j);
                }
            };
            if x > 0 {
                push(i - 1);
            }
            if x + 1 < w {
                push(i + 1);
            }
            if y > 0 {
                push(i - w);
            }
            if y + 1 < h {
                push(i + w);
            }
        }
    }
    let ncomp = comp_area.len();
    // keep the largest component per label
    let mut keeper: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
    for id in 0..ncomp {
        let e = keeper.entry(comp_label[id]).or_insert(id);
        if comp_area[id] > comp_area[*e] || (comp_area[id] == comp_area[*e] && id < *e) {
            *e = id;
        }
    }
    let kept: Vec<bool> = (0..ncomp).map(|id| keeper[&comp_label[id]] == id).collect();
    let mut pixels_of: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for (i, &id) in comp.iter().enumerate() {
        pixels_of[id].push(i);
    }
    // host[id] = the kept component this one was absorbed into
    let mut host: Vec<usize> = (0..ncomp).collect();
    let mut area: Vec<usize> = comp_area.clone();
    // passes: orphans touching a kept region join the largest adjacent one;
    // nested orphans resolve outward in later passes
    let mut pending: Vec<usize> = (0..ncomp).filter(|&id| !kept[id]).collect();
    while !pending.is_empty() {
        let mut next = Vec::new();
        let mut progressed = false;
        for &id in &pending {
            let mut best: Option<(usize, usize)> = None; // (area, host comp)
            for &j in &pixels_of[id] {
                let (x, y) = (j % w, j / w);
                for nb in neighbors4(x, y, w, h) {
                    let hc = host[comp[nb]];
                    if hc == id || !kept[hc] {
                        continue;
                    }
                    let cand = (area[hc], hc);
                    let better = match best {
                        None => true,
                        Some((ba, bh)) => cand.0 > ba || (cand.0 == ba && cand.1 < bh),
                    };
                    if better {
                        best = Some(cand);
                    }
                }
            }
            if let Some((_, hc)) = best {
                host[id] = hc;
                area[hc] += area[id];
                progressed = true;
            } else {
                next.push(id);
            }
        }
        assert!(progressed, "orphan absorption must make progress");
        pending = next;
    }
    (0..n)
        .map(|i| assign[pixels_of[host[comp[i]]][0]])
        .collect()
}

fn neighbors4(x: usize, y: usize, w: usize, h: usize) -> Vec<usize> {
    let mut v = Vec::with_capacity(4);
    if x > 0 {
        v.push(y * w + x - 1);
    }
    if x + 1 < w {
        v.push(y * w + x + 1);
    }
    if y > 0 {
        v.push((y - 1) * w + x);
    }
    if y + 1 < h {
        v.push((y + 1) * w + x);
    }
    v
}

/// Iteratively merge adjacent segments whose mean-Lab distance is below the
/// threshold, smallest distance first; labels recompacted.
pub fn merge_regions(seg: &SegmentMap, img: &Image, color_threshold: f64) -> Result<SegmentMap> {
    if seg.width != img.width || seg.height != img.height {
        return Err(Error::arg("segment map does not partition this image"));
    }
    let lab = image_to_lab(img);
    let k = seg.k;
    // union-find over segment ids
    let mut parent: Vec<u32> = (0..k as u32).collect();
    fn find(parent: &mut [u32], i: u32) -> u32 {
        let mut i = i;
        while parent[i as usize] != i {
            parent[i as usize] = parent[parent[i as usize] as usize];
            i = parent[i as usize];
        }
        i
    }
    let mut sums = vec![[0.0f64; 4]; k];
    for (i, &l) in seg.labels.iter().enumerate() {
        let s = &mut sums[l as usize];
        s[0] += lab[i][0];
        s[1] += lab[i][1];
        s[2] += lab[i][2];
        s[3] += 1.0;
    }
    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); k];
    for y in 0..seg.height {
        for x in 0..seg.width {
            let a = seg.label(x, y);
            if x + 1 < seg.width {
                let b = seg.label(x + 1, y);
                if a != b {
                    adj[a as usize].insert(b);
                    adj[b as usize].insert(a);
                }
            }
            if y + 1 < seg.height {
                let b = seg.label(x, y + 1);
                if a != b {
                    adj[a as usize].insert(b);
                    adj[b as usize].insert(a);
                }
            }
        }
    }

    let dist = |sums: &Vec<[f64; 4]>, a: u32, b: u32| -> f64 {
        let (sa, sb) = (&sums[a as usize], &sums[b as usize]);
        let d0 = sa[0] / sa[3] - sb[0] / sb[3];
        let d1 = sa[1] / sa[3] - sb[1] / sb[3];
        let d2 = sa[2] / sa[3] - sb[2] / sb[3];
        (d0 * d0 + d1 * d1 + d2 * d2).sqrt()
    };

    loop {
        // smallest qualifying pair among current roots
        let mut best: Option<(f64, u32, u32)> = None;
        let roots: BTreeSet<u32> = (0..k as u32).map(|i| find(&mut parent, i)).collect();
        for &a in &roots {
            for &b in adj[a as usize].clone().iter() {
                let rb = find(&mut parent, b);
                if rb == a {
                    continue;
                }
                let (lo, hi) = if a < rb { (a, rb) } else { (rb, a) };
                let d = dist(&sums, lo, hi);
                if d < color_threshold {
                    let better = match best {
                        None => true,
                        Some((bd, ba, bb)) => d < bd || (d == bd && (lo, hi) < (ba, bb)),
                    };
                    if better {
                        best = Some((d, lo, hi));
                    }
                }
            }
        }
        let Some((_, a, b)) = best else { break };
        // merge b into a
        parent[b as usize] = a;
        let sb = sums[b as usize];
        let sa = &mut sums[a as usize];
        sa[0] += sb[0];
        sa[1] += sb[1];
        sa[2] += sb[2];
        sa[3] += sb[3];
        let bn: Vec<u32> = adj[b as usize].iter().copied().collect();
        for nb in bn {
            let r = find(&mut parent, nb);
            if r != a {
                adj[a as usize].insert(r);
                adj[r as usize].insert(a);
            }
        }
    }

    let labels: Vec<u32> = seg.labels.iter().map(|&l| find(&mut parent, l)).collect();
    Ok(SegmentMap::recompact(seg.width, seg.height, labels))
}

/// Mark segments smaller than `min_fraction` of the image area as discarded.
/// Labels are untouched; the returned set lists the discarded ids.
pub fn filter_small_segments(seg: &SegmentMap, min_fraction: f64) -> (SegmentMap, BTreeSet<u32>) {
    let cutoff = min_fraction * (seg.width * seg.height) as f64;
    let discarded: BTreeSet<u32> = (0..seg.k as u32)
        .filter(|&id| (seg.areas[id as usize] as f64) < cutoff)
        .collect();
    (seg.clone(), discarded)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(w: usize, h: usize) -> Image {
        Image::new(w, h, 1, vec![0.5; w * h]).unwrap()
    }

    #[test]
    fn uniform_count_gives_grid() {
        let img = uniform(64, 64);
        let seg = slic_superpixels(&img, 32, 10.0, 0).unwrap();
        seg.validate().unwrap();
        assert_eq!(seg.k, 32);
    }

    #[test]
    fn count_one_single_segment() {
        let img = uniform(16, 16);
        let seg = slic_superpixels(&img, 1, 10.0, 0).unwrap();
        assert_eq!(seg.k, 1);
        assert_eq!(seg.areas, vec![256]);
    }

    #[test]
    fn count_over_pixels_errors() {
        let img = uniform(4, 4);
        assert!(slic_superpixels(&img, 17, 10.0, 0).is_err());
    }

    #[test]
    fn deterministic_rerun() {
        let data: Vec<f64> = (0..64 * 64)
            .map(|i| ((i * 37) % 251) as f64 / 250.0)
            .collect();
        let img = Image::new(64, 64, 1, data).unwrap();
        let a = slic_superpixels(&img, 24, 10.0, 7).unwrap();
        let b = slic_superpixels(&img, 24, 10.0, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn merge_uniform_to_one() {
        let img = uniform(64, 64);
        let seg = slic_superpixels(&img, 32, 10.0, 0).unwrap();
        let merged = merge_regions(&seg, &img, 12.0).unwrap();
        merged.validate().unwrap();
        assert_eq!(merged.k, 1);
    }

    #[test]
    fn merge_two_tone_to_two() {
        let (w, h) = (64, 64);
        let data: Vec<f64> = (0..w * h)
            .map(|i| if i % w < w / 2 { 0.0 } else { 1.0 })
            .collect();
        let img = Image::new(w, h, 1, data).unwrap();
        let seg = slic_superpixels(&img, 32, 10.0, 0).unwrap();
        let merged = merge_regions(&seg, &img, 12.0).unwrap();
        merged.validate().unwrap();
        assert_eq!(merged.k, 2);
        // the two segments split exactly along the tone boundary
        for y in 0..h {
            for x in 0..w {
                let same_side = merged.label(x, y) == merged.label(0, 0);
                assert_eq!(same_side, x < w / 2, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn merge_threshold_zero_is_identity() {
        let img = uniform(32, 32);
        let seg = slic_superpixels(&img, 16, 10.0, 0).unwrap();
        let merged = merge_regions(&seg, &img, 0.0).unwrap();
        assert_eq!(seg.k, merged.k);
        assert_eq!(seg.labels, merged.labels);
    }

    #[test]
    fn merge_monotone_in_threshold() {
        let data: Vec<f64> = (0..64 * 64)
            .map(|i| (((i % 64) / 16) as f64) * 0.25 + ((i / 64 / 16) as f64) * 0.05)
            .collect();
        let img = Image::new(64, 64, 1, data).unwrap();
        let seg = slic_superpixels(&img, 32, 10.0, 0).unwrap();
        let mut prev_k = usize::MAX;
        for t in [0.0, 2.0, 6.0, 15.0, 40.0] {
            let m = merge_regions(&seg, &img, t).unwrap();
            assert!(m.k <= prev_k, "k grew from {prev_k} to {} at {t}", m.k);
            prev_k = m.k;
        }
    }

    #[test]
    fn filter_small_by_area_fraction() {
        // 100x100 with areas 9000, 900, 100
        let mut labels = vec![0u32; 10000];
        for i in 0..900 {
            labels[i] = 1;
        }
        for i in 900..1000 {
            labels[i] = 2;
        }
        let seg = SegmentMap::recompact(100, 100, labels);
        // recompact assigns ids row-major: 900-pixel run first
        let (out, discarded) = filter_small_segments(&seg, 0.1);
        assert_eq!(out.labels, seg.labels);
        let discarded_areas: Vec<usize> =
            discarded.iter().map(|&d| seg.areas[d as usize]).collect();
        assert_eq!(discarded_areas, vec![900, 100]);
    }

    #[test]
    fn filter_zero_fraction_keeps_all() {
        let img = uniform(32, 32);
        let seg = slic_superpixels(&img, 8, 10.0, 0).unwrap();
        let (_, discarded) = filter_small_segments(&seg, 0.0);
        assert!(discarded.is_empty());
        let single = slic_superpixels(&img, 1, 10.0, 0).unwrap();
        let (_, discarded) = filter_small_segments(&single, 0.1);
        assert!(discarded.is_empty());
    }

    #[test]
    fn partition_invariant_after_all_ops() {
        let data: Vec<f64> = (0..48 * 48)
            .map(|i| ((i * 13) % 101) as f64 / 100.0)
            .collect();
        let img = Image::new(48, 48, 1, data).unwrap();
        let seg = slic_superpixels(&img, 20, 10.0, 0).unwrap();
        seg.validate().unwrap();
        let merged = merge_regions(&seg, &img, 8.0).unwrap();
        merged.validate().unwrap();
        assert!(merged.k <= seg.k);
        let (kept, _) = filter_small_segments(&merged, 0.05);
        kept.validate().unwrap();
        assert_eq!(kept.labels, merged.labels);
    }
}
