//! Library-side implementations of the CLI commands, kept callable from
//! integration tests.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use crate::candidate::{baseline_score, load_candidate, CandidateSource};
use crate::config::RunConfig;
use crate::dataset::{self, DatasetTriple, SkippedEntry};
use crate::dtcwt::{self, FilterBank};
use crate::error::{Error, Result};
use crate::fusion::detect;
use crate::image::{
    self, box_blur, decode_binary_mask, encode_image, encode_pgm, load_image,
    resize_bilinear, BinaryMask, Image, Plane, ProbabilityMask,
};
use crate::metrics::{aggregate, confusion, image_level_verdict, metric_suite, ImageReport};
use crate::scattering::{dump_scattering, scatter_image};
use crate::segmentation::{merge_regions, slic_superpixels, SegmentMap};

/// Candidate selection for detect/evaluate.
#[derive(Debug, Clone)]
pub enum CandidateArg {
    File(PathBuf),
    Dir(PathBuf),
    Baseline,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn mask_pgm(mask: &BinaryMask) -> Vec<u8> {
    encode_pgm(&image::mask_to_plane(mask), 8)
}

fn candidate_for_image(
    img: &Image,
    arg: &CandidateArg,
    cfg: &RunConfig,
    fb: &FilterBank,
) -> Result<ProbabilityMask> {
    let source = match arg {
        CandidateArg::File(path) => CandidateSource::File(path.clone()),
        CandidateArg::Baseline => CandidateSource::Baseline(cfg.baseline()),
        CandidateArg::Dir(_) => {
            return Err(Error::arg(
                "a candidate directory only applies to evaluate runs",
            ))
        }
    };
    source.resolve(img, fb)
}

/// `detect`: refine one candidate mask and write the outputs.
pub fn cmd_detect(
    image_path: &Path,
    candidate: &CandidateArg,
    cfg: &RunConfig,
    out_dir: &Path,
    explain: bool,
) -> Result<Vec<PathBuf>> {
    let fb = FilterBank::default();
    let img = load_image(image_path)?;
    let cand = candidate_for_image(&img, candidate, cfg, &fb)?;
    let (refined, explanation) = detect(&img, &cand, &cfg.detect_params(), &fb)?;
    let mut written = Vec::new();
    let mask_path = out_dir.join("refined.pgm");
    write_file(&mask_path, &mask_pgm(&refined))?;
    written.push(mask_path);
    if explain {
        let path = out_dir.join("explanation.json");
        write_file(&path, &serde_json::to_vec_pretty(&explanation).unwrap())?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, serde::Serialize)]
pub struct SplitReport {
    pub split: String,
    pub threshold: f64,
    pub per_image: Vec<ImageReport>,
    pub aggregate: crate::metrics::SplitAggregate,
}

#[derive(Debug, serde::Serialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub threshold: f64,
    pub splits: Vec<SplitReport>,
    pub skipped: Vec<SkippedEntry>,
}

enum TripleOutcome {
    Ok(Box<ImageReport>),
    Skip(SkippedEntry),
}

fn evaluate_triple(
    triple: &DatasetTriple,
    candidate: &CandidateArg,
    cfg: &RunConfig,
    fb: &FilterBank,
) -> TripleOutcome {
    let skip = |reason: String| {
        TripleOutcome::Skip(SkippedEntry {
            split: triple.split.clone(),
            stem: triple.stem.clone(),
            reason,
        })
    };
    let img = match load_image(&triple.inpainted) {
        Ok(i) => i,
        Err(e) => return skip(format!("inpainted: {e}")),
    };
    let truth_bytes = match std::fs::read(&triple.mask) {
        Ok(b) => b,
        Err(e) => return skip(format!("mask: {e}")),
    };
    let truth = match decode_binary_mask(&truth_bytes) {
        Ok(t) => t,
        Err(e) => return skip(format!("mask: {e}")),
    };
    if truth.width != img.width || truth.height != img.height {
        return skip(format!(
            "mask is {}x{} but inpainted image is {}x{}",
            truth.width, truth.height, img.width, img.height
        ));
    }
    let cand = match candidate {
        CandidateArg::Dir(dir) => match dataset::candidate_path_for(dir, triple) {
            Some(p) => match load_candidate(&p, img.width, img.height) {
                Ok(c) => c,
                Err(e) => return skip(format!("candidate: {e}")),
            },
            None => return skip("candidate: no file for this stem".to_string()),
        },
        CandidateArg::Baseline => match baseline_score(&img, &cfg.baseline(), fb) {
            Ok(c) => c,
            Err(e) => return skip(format!("baseline: {e}")),
        },
        CandidateArg::File(p) => match load_candidate(p, img.width, img.height) {
            Ok(c) => c,
            Err(e) => return skip(format!("candidate: {e}")),
        },
    };
    let (refined, _) = match detect(&img, &cand, &cfg.detect_params(), fb) {
        Ok(r) => r,
        Err(e) => return skip(format!("detect: {e}")),
    };
    let conf = match confusion(&refined, &truth) {
        Ok(c) => c,
        Err(e) => return skip(format!("metrics: {e}")),
    };
    TripleOutcome::Ok(Box::new(ImageReport {
        name: format!("{}/{}", triple.split, triple.stem),
        confusion: conf,
        metrics: metric_suite(&conf),
        image_level_pred: image_level_verdict(&refined, cfg.image_level_fraction),
        image_level_truth: image_level_verdict(&truth, cfg.image_level_fraction),
    }))
}

/// `evaluate`: run the detector over a dataset and aggregate per split.
/// Worker count comes from `INPAINT_FORENSICS_THREADS` when set; results
/// are ordered by (split, stem) regardless of worker count.
pub fn cmd_evaluate(
    root: &Path,
    candidate: &CandidateArg,
    cfg: &RunConfig,
) -> Result<EvaluationReport> {
    let fb = FilterBank::default();
    let (triples, mut skipped) = dataset::discover(root)?;
    if triples.is_empty() && skipped.is_empty() {
        return Err(Error::arg(format!(
            "no images found under {}",
            root.display()
        )));
    }
    let pool = thread_pool()?;
    let outcomes: Vec<TripleOutcome> = pool.install(|| {
        triples
            .par_iter()
            .map(|t| evaluate_triple(t, candidate, cfg, &fb))
            .collect()
    });
    let mut by_split: Vec<(String, Vec<ImageReport>)> = Vec::new();
    for outcome in outcomes {
        match outcome {
            TripleOutcome::Ok(report) => {
                let split = report.name.split('/').next().unwrap_or("").to_string();
                match by_split.last_mut() {
                    Some((s, v)) if *s == split => v.push(*report),
                    _ => by_split.push((split, vec![*report])),
                }
            }
            TripleOutcome::Skip(s) => skipped.push(s),
        }
    }
    if by_split.is_empty() {
        return Err(Error::arg(format!(
            "no evaluable images under {} ({} skipped)",
            root.display(),
            skipped.len()
        )));
    }
    let mut splits = Vec::new();
    for (split, reports) in by_split {
        let agg = aggregate(&reports, &split)?;
        splits.push(SplitReport {
            split,
            threshold: cfg.binarize_threshold,
            per_image: reports,
            aggregate: agg,
        });
    }
    Ok(EvaluationReport {
        schema_version: 1,
        threshold: cfg.binarize_threshold,
        splits,
        skipped,
    })
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("INPAINT_FORENSICS_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Config(format!("INPAINT_FORENSICS_THREADS: bad value '{v}'")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbOp {
    Resize,
    Blur,
    Both,
}

/// `perturb`: apply the robustness perturbations and write the result as
/// NetPBM (PGM for gray, PPM for RGB).
pub fn cmd_perturb(
    image_path: &Path,
    op: PerturbOp,
    factor: f64,
    radius: usize,
    out_path: &Path,
) -> Result<Image> {
    let img = load_image(image_path)?;
    let out = match op {
        PerturbOp::Resize => resize_bilinear(&img, factor)?,
        PerturbOp::Blur => box_blur(&img, radius),
        PerturbOp::Both => box_blur(&resize_bilinear(&img, factor)?, radius),
    };
    write_file(out_path, &encode_image(&out, 8))?;
    Ok(out)
}

fn segment_image(img: &Image, cfg: &RunConfig) -> Result<SegmentMap> {
    let seg = slic_superpixels(img, cfg.slic_count, cfg.slic_compactness, cfg.seed)?;
    merge_regions(&seg, img, cfg.merge_color_threshold)
}

/// Write a label map as 16-bit PGM plus a JSON area table.
pub fn write_segments(seg: &SegmentMap, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let denom = (seg.k.max(2) - 1) as f64;
    let plane = Plane::new(
        seg.width,
        seg.height,
        seg.labels.iter().map(|&l| l as f64 / denom).collect(),
    );
    let pgm_path = out_dir.join("labels.pgm");
    write_file(&pgm_path, &encode_pgm(&plane, 16))?;
    let table = json!({
        "schema_version": 1,
        "segments": seg.k,
        "areas": seg.areas,
    });
    let json_path = out_dir.join("areas.json");
    write_file(&json_path, &serde_json::to_vec_pretty(&table).unwrap())?;
    Ok(vec![pgm_path, json_path])
}

/// `segment`: SLIC + merge, label map artifacts.
pub fn cmd_segment(image_path: &Path, cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let img = load_image(image_path)?;
    let seg = segment_image(&img, cfg)?;
    write_segments(&seg, out_dir)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpKind {
    Dtcwt,
    Scatter,
    Segments,
}

/// `dump`: diagnostic planes plus manifest for one image.
pub fn cmd_dump(image_path: &Path, what: DumpKind, cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let fb = FilterBank::default();
    let img = load_image(image_path)?;
    match what {
        DumpKind::Dtcwt => {
            let gray = image::to_grayscale(&img);
            let pyr = dtcwt::forward(&gray, cfg.scattering_levels, &fb)?;
            dtcwt::dump_pyramid(&pyr, out_dir)
        }
        DumpKind::Scatter => {
            let map = scatter_image(&img, &cfg.scattering(), &fb)?;
            dump_scattering(&map, out_dir)
        }
        DumpKind::Segments => {
            let seg = segment_image(&img, cfg)?;
            write_segments(&seg, out_dir)?;
            Ok(())
        }
    }
}
