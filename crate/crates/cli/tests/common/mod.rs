#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use dface_core::face_model::{ids, serialize_frame, FaceFrame};
use dface_core::synthetic::mirrored_face;
use dface_core::Point2;

/// Output of one CLI invocation.
pub struct Outcome {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl Outcome {
    pub fn text(&self) -> String {
        String::from_utf8(self.stdout.clone()).expect("utf-8 stdout")
    }
}

pub fn dface(args: &[&str]) -> Outcome {
    dface_env(args, None)
}

pub fn dface_env(args: &[&str], env_config: Option<&Path>) -> Outcome {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let argv = std::iter::once("dface").chain(args.iter().copied());
    let code = dface_cli::run_with_env(
        argv,
        env_config.map(PathBuf::from),
        &mut stdout,
        &mut stderr,
    );
    Outcome {
        code,
        stdout,
        stderr: String::from_utf8(stderr).expect("utf-8 stderr"),
    }
}

pub fn neutral_face() -> FaceFrame {
    FaceFrame::from_positions(0.0, &mirrored_face(Point2::from_raster(100.0, 100.0), 40.0)).unwrap()
}

/// Both lip corners raised by a tenth of the interocular distance.
pub fn smiling_face() -> FaceFrame {
    let mut pts = mirrored_face(Point2::from_raster(100.0, 100.0), 40.0);
    pts[ids::LEFT_LIP_CORNER].y += 4.0;
    pts[ids::RIGHT_LIP_CORNER].y += 4.0;
    FaceFrame::from_positions(1.0, &pts).unwrap()
}

pub fn write_frame(path: &Path, frame: &FaceFrame) -> String {
    fs::write(path, serialize_frame(frame)).unwrap();
    path.to_str().unwrap().to_string()
}

/// `frame_0.csv` neutral, `frame_1.csv` smiling.
pub fn smile_sequence(dir: &Path) {
    write_frame(&dir.join("frame_0.csv"), &neutral_face());
    write_frame(&dir.join("frame_1.csv"), &smiling_face());
}
