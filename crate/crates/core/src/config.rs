//! Flat key = value run configuration with closed parsing: unknown keys are
//! hard errors. Precedence: command-line overrides > config file > defaults.

use std::path::Path;

use crate::candidate::BaselineParams;
use crate::error::{Error, Result};
use crate::fusion::{DetectParams, FusionConfig};
use crate::noise::PatchGrid;
use crate::scattering::ScatteringConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub scattering_levels: usize,
    pub smoothing_sigma: f64,
    pub include_order2: bool,
    pub slic_count: usize,
    pub slic_compactness: f64,
    pub merge_color_threshold: f64,
    pub min_segment_fraction: f64,
    pub grid_cols: usize,
    pub grid_rows: usize,
    pub min_cell_pixels: usize,
    pub flag_k: f64,
    pub t_none: f64,
    pub t_full: f64,
    pub keep_full: bool,
    pub keep_unsegmented: bool,
    pub binarize_threshold: f64,
    pub image_level_fraction: f64,
    pub baseline_window_radius: usize,
    pub baseline_z_center: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scattering_levels: 2,
            smoothing_sigma: 2.0,
            include_order2: true,
            slic_count: 32,
            slic_compactness: 10.0,
            merge_color_threshold: 12.0,
            min_segment_fraction: 0.1,
            grid_cols: 8,
            grid_rows: 8,
            min_cell_pixels: 16,
            flag_k: 2.5,
            t_none: 0.01,
            t_full: 0.95,
            keep_full: true,
            keep_unsegmented: true,
            binarize_threshold: 0.5,
            image_level_fraction: 0.001,
            baseline_window_radius: 4,
            baseline_z_center: 2.5,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        for (lineno, line) in crate::image::read_lines(path)?.iter().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                )));
            };
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        }
        self.validate()
    }

    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for item in overrides {
            let Some((key, value)) = item.split_once('=') else {
                return Err(Error::Config(format!(
                    "override '{item}': expected key=value"
                )));
            };
            self.set(key.trim(), value.trim())?;
        }
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn p<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value '{v}' for {key}")))
        }
        match key {
            "scattering_levels" => self.scattering_levels = p(key, value)?,
            "smoothing_sigma" => self.smoothing_sigma = p(key, value)?,
            "include_order2" => self.include_order2 = p(key, value)?,
            "slic_count" => self.slic_count = p(key, value)?,
            "slic_compactness" => self.slic_compactness = p(key, value)?,
            "merge_color_threshold" => self.merge_color_threshold = p(key, value)?,
            "min_segment_fraction" => self.min_segment_fraction = p(key, value)?,
            "grid_cols" => self.grid_cols = p(key, value)?,
            "grid_rows" => self.grid_rows = p(key, value)?,
            "min_cell_pixels" => self.min_cell_pixels = p(key, value)?,
            "flag_k" => self.flag_k = p(key, value)?,
            "t_none" => self.t_none = p(key, value)?,
            "t_full" => self.t_full = p(key, value)?,
            "keep_full" => self.keep_full = p(key, value)?,
            "keep_unsegmented" => self.keep_unsegmented = p(key, value)?,
            "binarize_threshold" => self.binarize_threshold = p(key, value)?,
            "image_level_fraction" => self.image_level_fraction = p(key, value)?,
            "baseline_window_radius" => self.baseline_window_radius = p(key, value)?,
            "baseline_z_center" => self.baseline_z_center = p(key, value)?,
            "seed" => self.seed = p(key, value)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.scattering_levels == 0 {
            return Err(Error::Config("scattering_levels must be >= 1".into()));
        }
        if !(self.smoothing_sigma > 0.0) {
            return Err(Error::Config("smoothing_sigma must be > 0".into()));
        }
        if self.slic_count == 0 {
            return Err(Error::Config("slic_count must be >= 1".into()));
        }
        if !(0.0 <= self.t_none && self.t_none < self.t_full && self.t_full <= 1.0) {
            return Err(Error::Config("need 0 <= t_none < t_full <= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.binarize_threshold) {
            return Err(Error::Config("binarize_threshold must be in [0,1]".into()));
        }
        if !(0.0..=1.0).contains(&self.min_segment_fraction) {
            return Err(Error::Config(
                "min_segment_fraction must be in [0,1]".into(),
            ));
        }
        if self.grid_cols == 0 || self.grid_rows == 0 {
            return Err(Error::Config("grid dimensions must be >= 1".into()));
        }
        Ok(())
    }

    pub fn fusion(&self) -> FusionConfig {
        FusionConfig {
            t_none: self.t_none,
            t_full: self.t_full,
            flag_k: self.flag_k,
            grid: PatchGrid {
                grid_cols: self.grid_cols,
                grid_rows: self.grid_rows,
                min_cell_pixels: self.min_cell_pixels,
            },
            min_segment_fraction: self.min_segment_fraction,
            keep_full: self.keep_full,
            keep_unsegmented: self.keep_unsegmented,
        }
    }

    pub fn detect_params(&self) -> DetectParams {
        DetectParams {
            binarize_threshold: self.binarize_threshold,
            slic_count: self.slic_count,
            slic_compactness: self.slic_compactness,
            merge_color_threshold: self.merge_color_threshold,
            seed: self.seed,
            fusion: self.fusion(),
        }
    }

    pub fn scattering(&self) -> ScatteringConfig {
        ScatteringConfig {
            levels: self.scattering_levels,
            smoothing_sigma: self.smoothing_sigma,
            include_order2: self.include_order2,
        }
    }

    pub fn baseline(&self) -> BaselineParams {
        BaselineParams {
            window_radius: self.baseline_window_radius,
            z_center: self.baseline_z_center,
        }
    }
}
