//! Per-frame sequence report: asymmetry scores, emotion labels and overlays.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dface_core::action_units::{classify_with_order, Classification};
use dface_core::face_model::{FaceFrame, FrameSequence};
use dface_core::symmetry::{
    estimate_midline, format_score, movement_asymmetry, overlay_svg, structural_asymmetry,
    MidlineAxis,
};
use dface_core::Error;

use crate::config::{Config, ReportFormat};
use crate::CliError;

pub const ASYMMETRY_FILE: &str = "asymmetry.csv";
pub const CLASSIFICATION_FILE: &str = "classification.csv";

/// In-memory report; [`Report::write`] puts it on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub asymmetry_csv: String,
    pub classification_csv: String,
    pub overlays: Vec<String>,
}

pub fn overlay_name(index: usize) -> String {
    format!("overlay_{index}.svg")
}

fn sub_sequence(seq: &FrameSequence, end: usize) -> Result<FrameSequence, Error> {
    FrameSequence::new(seq.frames()[..end].to_vec(), Some(seq.interocular_ref()))
}

fn classification_row(
    out: &mut String,
    index: usize,
    frame: &FaceFrame,
    c: &Classification,
    aus: &[u8],
) {
    let aus: Vec<String> = aus.iter().map(u8::to_string).collect();
    let aus = aus.join(" ");
    match c.top() {
        Some(top) => {
            let _ = writeln!(
                out,
                "{index},{},{},{:.3},{},{aus}",
                frame.timestamp(),
                top.emotion,
                top.score,
                top.rank
            );
        }
        None => {
            let _ = writeln!(out, "{index},{},Neutral,,,{aus}", frame.timestamp());
        }
    }
}

/// Builds all report artifacts. `neutral` indexes the reference frame for
/// action-unit detection.
pub fn build_report(
    seq: &FrameSequence,
    neutral: usize,
    config: &Config,
) -> Result<Report, CliError> {
    if neutral >= seq.len() {
        return Err(CliError::Usage(format!(
            "--neutral {neutral} out of range for {} frames",
            seq.len()
        )));
    }
    let frames = seq.frames();
    let axes: Vec<MidlineAxis> = frames
        .iter()
        .map(estimate_midline)
        .collect::<Result<_, _>>()?;

    let mut asymmetry = String::from("frame,timestamp,structural,movement\n");
    for (i, (frame, axis)) in frames.iter().zip(&axes).enumerate() {
        let structural = structural_asymmetry(frame, axis)?;
        let movement = if i == 0 {
            String::new()
        } else {
            format_score(movement_asymmetry(&sub_sequence(seq, i + 1)?, &axes[..=i])?)
        };
        let _ = writeln!(
            asymmetry,
            "{i},{},{},{movement}",
            frame.timestamp(),
            format_score(structural)
        );
    }

    let detector = config.detector();
    let reference = &frames[neutral];
    let axis = &axes[neutral];
    let mut classification = String::from("frame,timestamp,emotion,score,rank,aus\n");
    for (i, frame) in frames.iter().enumerate() {
        let activations = detector.detect(reference, frame, axis)?;
        let active: Vec<u8> = activations
            .iter()
            .filter(|a| a.active)
            .map(|a| a.au)
            .collect();
        let c = classify_with_order(&activations, &config.tie_order);
        classification_row(&mut classification, i, frame, &c, &active);
    }

    let overlays = frames
        .iter()
        .zip(&axes)
        .map(|(f, a)| overlay_svg(f, a))
        .collect();
    Ok(Report {
        asymmetry_csv: asymmetry,
        classification_csv: classification,
        overlays,
    })
}

impl Report {
    /// Writes the requested artifacts and returns their file names in
    /// writing order.
    pub fn write(&self, out_dir: &Path, format: ReportFormat) -> Result<Vec<String>, CliError> {
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let mut files: Vec<(String, &str)> = Vec::new();
        if format.wants_csv() {
            files.push((ASYMMETRY_FILE.into(), &self.asymmetry_csv));
            files.push((CLASSIFICATION_FILE.into(), &self.classification_csv));
        }
        if format.wants_svg() {
            for (i, svg) in self.overlays.iter().enumerate() {
                files.push((overlay_name(i), svg));
            }
        }
        for (name, body) in &files {
            let path = out_dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(files.into_iter().map(|(n, _)| n).collect())
    }
}
