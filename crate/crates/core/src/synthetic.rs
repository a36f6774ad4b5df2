//! Synthetic faces with known geometry, for tests, demos and calibration.

use crate::face_model::{ids, POINT_COUNT};
use crate::geometry::Point2;

/// Offsets of the subject's left-side points, in units of interocular
/// distance, relative to the face center. x grows toward the subject's left.
const LEFT_LAYOUT: [(usize, f64, f64); 10] = [
    (ids::LEFT_BROW_INNER, 0.20, 0.45),
    (ids::LEFT_BROW_MIDDLE, 0.50, 0.55),
    (ids::LEFT_BROW_OUTER, 0.80, 0.45),
    (ids::LEFT_EYE[0], 0.30, 0.25),
    (ids::LEFT_EYE[1], 0.50, 0.32),
    (ids::LEFT_EYE[2], 0.70, 0.25),
    (ids::LEFT_EYE[3], 0.50, 0.18),
    (ids::LEFT_LIP_CORNER, 0.35, -0.60),
    (ids::LEFT_LIP_UPPER, 0.20, -0.52),
    (ids::LEFT_LIP_LOWER, 0.20, -0.68),
];

const MIDLINE_LAYOUT: [(usize, f64); 4] = [
    (ids::LIP_TOP, -0.50),
    (ids::LIP_UPPER_INNER, -0.58),
    (ids::LIP_LOWER_INNER, -0.62),
    (ids::LIP_BOTTOM, -0.72),
];

/// An exactly mirror-symmetric face about the vertical line through
/// `center`, in the y-up frame, with interocular distance `iod`.
///
/// Coordinates are computed as `center ± offset`, so each pair's x values
/// are symmetric about `center.x` up to one rounding of each sum.
pub fn mirrored_face(center: Point2, iod: f64) -> [Point2; POINT_COUNT] {
    let mut out = [Point2::default(); POINT_COUNT];
    for &(id, dx, dy) in &LEFT_LAYOUT {
        let right = crate::face_model::counterpart(id).expect("canonical id");
        out[id] = Point2::new(center.x + dx * iod, center.y + dy * iod);
        out[right] = Point2::new(center.x - dx * iod, center.y + dy * iod);
    }
    for &(id, dy) in &MIDLINE_LAYOUT {
        out[id] = Point2::new(center.x, center.y + dy * iod);
    }
    out
}
