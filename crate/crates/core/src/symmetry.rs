//! Facial midline estimation, mirror reflection, asymmetry scores and
//! reconstruction of occluded points.
//!
//! All scores are divided by an interocular distance, which makes them
//! dimensionless and invariant under rigid motion and uniform scaling.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::face_model::{
    counterpart, interocular_distance, mirror_pairs, FaceFrame, FrameSequence, Laterality,
    Presence, Region, POINT_COUNT,
};
use crate::geometry::{centroid, Point2};

/// Pairs needed before a midline is fitted.
pub const MIN_MIDLINE_PAIRS: usize = 3;

/// A line of mirror symmetry in the y-up frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidlineAxis {
    point: Point2,
    direction: Point2,
    fit_residual: f64,
    degenerate: bool,
}

impl MidlineAxis {
    /// A line through `point` along `direction` (any nonzero length).
    ///
    /// The stored direction is normalized and oriented with a positive
    /// y-component (positive x when horizontal).
    pub fn new(point: Point2, direction: Point2) -> Result<Self> {
        let len = direction.norm();
        if !point.is_finite() || !len.is_finite() || len == 0.0 {
            return Err(Error::InvalidParameter(
                "axis needs a finite point and nonzero direction".into(),
            ));
        }
        let mut d = direction * (1.0 / len);
        if d.y < 0.0 || (d.y == 0.0 && d.x < 0.0) {
            d = -d;
        }
        Ok(MidlineAxis {
            point,
            direction: d,
            fit_residual: 0.0,
            degenerate: false,
        })
    }

    /// The vertical line `x = x0`.
    pub fn vertical(x0: f64) -> Self {
        MidlineAxis {
            point: Point2::new(x0, 0.0),
            direction: Point2::new(0.0, 1.0),
            fit_residual: 0.0,
            degenerate: false,
        }
    }

    pub fn point(&self) -> Point2 {
        self.point
    }

    /// Unit direction, pointing up the face.
    pub fn direction(&self) -> Point2 {
        self.direction
    }

    /// Unit normal, pointing toward the subject's left for an upright face.
    pub fn normal(&self) -> Point2 {
        Point2::new(self.direction.y, -self.direction.x)
    }

    /// RMS distance of pair midpoints to the line, over interocular distance.
    pub fn fit_residual(&self) -> f64 {
        self.fit_residual
    }

    /// Set when every pair midpoint coincided and the direction was assumed.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Unsigned perpendicular distance from `p` to the line.
    pub fn distance_to(&self, p: Point2) -> f64 {
        (p - self.point).dot(self.normal()).abs()
    }
}

fn complete_pairs(frame: &FaceFrame) -> Vec<(usize, Point2, Point2)> {
    mirror_pairs()
        .filter_map(|(l, r)| Some((l, frame.position(l)?, frame.position(r)?)))
        .collect()
}

/// Normalization length for a single frame: the interocular distance when
/// both eyes are complete, else the mean left/right pair separation.
fn frame_scale(frame: &FaceFrame) -> Result<f64> {
    match interocular_distance(frame) {
        Ok(d) => Ok(d),
        Err(Error::InsufficientData(msg)) => {
            let pairs = complete_pairs(frame);
            let mean = pairs.iter().map(|(_, l, r)| l.distance(*r)).sum::<f64>()
                / pairs.len().max(1) as f64;
            if mean > 0.0 && mean.is_finite() {
                Ok(mean)
            } else {
                Err(Error::InsufficientData(msg))
            }
        }
        Err(e) => Err(e),
    }
}

/// Vector from the mouth toward the brows and eyes, when both are visible.
fn upward_hint(frame: &FaceFrame) -> Option<Point2> {
    let gather = |upper: bool| {
        let pts: Vec<Point2> = frame
            .points()
            .iter()
            .filter(|p| matches!(p.region, Region::Eyebrow | Region::Eye) == upper)
            .filter_map(|p| p.position())
            .collect();
        centroid(&pts)
    };
    let hint = gather(true)? - gather(false)?;
    (hint.norm() > 0.0).then_some(hint)
}

/// Total-least-squares line through the midpoints of all complete pairs,
/// directed from the mouth toward the brows.
pub fn estimate_midline(frame: &FaceFrame) -> Result<MidlineAxis> {
    let pairs = complete_pairs(frame);
    if pairs.len() < MIN_MIDLINE_PAIRS {
        return Err(Error::InsufficientPairs {
            needed: MIN_MIDLINE_PAIRS,
            found: pairs.len(),
        });
    }
    let mids: Vec<Point2> = pairs.iter().map(|(_, l, r)| l.midpoint(*r)).collect();
    let c = centroid(&mids).expect("non-empty");
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for m in &mids {
        let d = *m - c;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    if sxx + syy == 0.0 {
        let mut axis = MidlineAxis::vertical(c.x);
        axis.point = c;
        axis.degenerate = true;
        return Ok(axis);
    }
    // principal eigenvector of the 2×2 scatter matrix
    let half_diff = 0.5 * (sxx - syy);
    let lambda = 0.5 * (sxx + syy) + half_diff.hypot(sxy);
    let v1 = Point2::new(sxy, lambda - sxx);
    let v2 = Point2::new(lambda - syy, sxy);
    let dir = if v1.norm() >= v2.norm() { v1 } else { v2 };
    let mut axis = MidlineAxis::new(c, dir)?;
    if let Some(up) = upward_hint(frame) {
        if axis.direction.dot(up) < 0.0 {
            axis.direction = -axis.direction;
        }
    }

    let scale = frame_scale(frame)?;
    let mean_sq = mids
        .iter()
        .map(|m| axis.distance_to(*m).powi(2))
        .sum::<f64>()
        / mids.len() as f64;
    axis.fit_residual = mean_sq.sqrt() / scale;
    Ok(axis)
}

/// Mirror image of `p` across the axis.
pub fn reflect_about(axis: &MidlineAxis, p: Point2) -> Point2 {
    let q = p - axis.point;
    let along = q.dot(axis.direction);
    axis.point + axis.direction * (2.0 * along) - q
}

/// Reflects every point across the axis and relabels each point with its
/// counterpart id, so the result is again a canonical frame.
pub fn mirror_frame(frame: &FaceFrame, axis: &MidlineAxis) -> FaceFrame {
    frame.map_positions(|p| reflect_about(axis, p)).swap_sides()
}

/// Per-term structural contributions, already normalized.
fn structural_terms(frame: &FaceFrame, axis: &MidlineAxis) -> Result<Vec<(Region, f64)>> {
    let pairs = complete_pairs(frame);
    if pairs.is_empty() {
        return Err(Error::InsufficientPairs {
            needed: 1,
            found: 0,
        });
    }
    let scale = interocular_distance(frame)?;
    let mut terms: Vec<(Region, f64)> = pairs
        .iter()
        .map(|&(l, left, right)| {
            let region = frame.points()[l].region;
            (region, reflect_about(axis, left).distance(right) / scale)
        })
        .collect();
    terms.extend(
        frame
            .points()
            .iter()
            .filter(|p| p.laterality == Laterality::Midline)
            .filter_map(|p| Some((p.region, axis.distance_to(p.position()?) / scale))),
    );
    Ok(terms)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Mean mirror mismatch over complete pairs and present midline points.
///
/// A pair contributes `‖reflect(left) − right‖`, a midline point its
/// distance to the axis; the mean is divided by the interocular distance.
pub fn structural_asymmetry(frame: &FaceFrame, axis: &MidlineAxis) -> Result<f64> {
    let terms = structural_terms(frame, axis)?;
    Ok(mean(terms.iter().map(|t| t.1)).expect("at least one pair"))
}

fn movement_terms(seq: &FrameSequence, axes: &[MidlineAxis]) -> Result<Vec<(Region, f64)>> {
    let frames = seq.frames();
    if frames.len() < 2 {
        return Err(Error::InsufficientFrames(frames.len()));
    }
    if axes.len() != frames.len() {
        return Err(Error::InvalidParameter(format!(
            "{} axes supplied for {} frames",
            axes.len(),
            frames.len()
        )));
    }
    let scale = seq.interocular_ref();
    let mut terms = Vec::new();
    for t in 1..frames.len() {
        let (prev, cur) = (&frames[t - 1], &frames[t]);
        for (l, r) in mirror_pairs() {
            let (Some(l0), Some(l1), Some(r0), Some(r1)) = (
                prev.position(l),
                cur.position(l),
                prev.position(r),
                cur.position(r),
            ) else {
                continue;
            };
            let left_motion = l1 - l0;
            let mirrored_motion = reflect_about(&axes[t], r1) - reflect_about(&axes[t - 1], r0);
            let region = cur.points()[l].region;
            terms.push((region, (left_motion - mirrored_motion).norm() / scale));
        }
    }
    Ok(terms)
}

/// Mean difference between each left point's motion and the mirrored
/// motion of its right counterpart, over consecutive frames.
///
/// For every step and every pair present in both frames the term is
/// `‖Δleft − Δreflect(right)‖ / interocular_ref`; the score is the mean of
/// all terms. Symmetric motion scores 0.
pub fn movement_asymmetry(seq: &FrameSequence, axes: &[MidlineAxis]) -> Result<f64> {
    let terms = movement_terms(seq, axes)?;
    mean(terms.iter().map(|t| t.1)).ok_or(Error::InsufficientPairs {
        needed: 1,
        found: 0,
    })
}

/// Fills each occluded lateral point with the reflection of its counterpart.
pub fn reconstruct_occluded(frame: &FaceFrame, axis: &MidlineAxis) -> Result<FaceFrame> {
    let mut unrecoverable = Vec::new();
    let mut fills = Vec::new();
    for p in frame.points() {
        if p.position().is_some() {
            continue;
        }
        let partner = counterpart(p.id)?;
        match frame.position(partner) {
            Some(q) if partner != p.id => fills.push((p.id, reflect_about(axis, q))),
            _ => unrecoverable.push(p.id),
        }
    }
    if !unrecoverable.is_empty() {
        return Err(Error::Unrecoverable(unrecoverable));
    }
    fills.into_iter().try_fold(frame.clone(), |f, (id, p)| {
        f.with_presence(id, Presence::Reconstructed(p))
    })
}

/// Structural and movement scores for one region.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionScores {
    pub structural: Option<f64>,
    pub movement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetryReport {
    /// Mean over frames of the per-frame structural score.
    pub structural: f64,
    /// `None` for a single frame.
    pub movement: Option<f64>,
    pub per_region: BTreeMap<Region, RegionScores>,
    pub frames_used: usize,
}

impl AsymmetryReport {
    /// `metric,region,value` rows; overall scores use region `all`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,region,value\n");
        let _ = writeln!(out, "structural,all,{}", format_score(self.structural));
        if let Some(m) = self.movement {
            let _ = writeln!(out, "movement,all,{}", format_score(m));
        }
        for (region, scores) in &self.per_region {
            if let Some(s) = scores.structural {
                let _ = writeln!(out, "structural,{region},{}", format_score(s));
            }
            if let Some(m) = scores.movement {
                let _ = writeln!(out, "movement,{region},{}", format_score(m));
            }
        }
        let _ = writeln!(out, "frames,all,{}", self.frames_used);
        out
    }
}

/// Fixed-precision formatting shared by every score file.
pub fn format_score(v: f64) -> String {
    let s = format!("{v:.9}");
    // never print "-0.000000000"
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn per_region_means(terms: &[(Region, f64)]) -> BTreeMap<Region, f64> {
    let mut acc: BTreeMap<Region, (f64, usize)> = BTreeMap::new();
    for &(region, v) in terms {
        let e = acc.entry(region).or_default();
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(r, (s, n))| (r, s / n as f64))
        .collect()
}

/// Scores a whole sequence, fitting a midline to every frame.
///
/// With a single frame only the structural score is reported.
pub fn asymmetry_report(seq: &FrameSequence) -> Result<AsymmetryReport> {
    let axes = seq
        .frames()
        .iter()
        .map(estimate_midline)
        .collect::<Result<Vec<_>>>()?;
    let mut structural_scores = Vec::with_capacity(seq.len());
    let mut region_structural: BTreeMap<Region, Vec<f64>> = BTreeMap::new();
    for (frame, axis) in seq.frames().iter().zip(&axes) {
        let terms = structural_terms(frame, axis)?;
        structural_scores.push(mean(terms.iter().map(|t| t.1)).expect("non-empty"));
        for (region, v) in per_region_means(&terms) {
            region_structural.entry(region).or_default().push(v);
        }
    }
    let mut per_region: BTreeMap<Region, RegionScores> = region_structural
        .into_iter()
        .map(|(region, values)| {
            let scores = RegionScores {
                structural: mean(values.into_iter()),
                movement: None,
            };
            (region, scores)
        })
        .collect();
    let movement = if seq.len() >= 2 {
        let terms = movement_terms(seq, &axes)?;
        for (region, v) in per_region_means(&terms) {
            per_region.entry(region).or_default().movement = Some(v);
        }
        mean(terms.iter().map(|t| t.1))
    } else {
        None
    };
    Ok(AsymmetryReport {
        structural: mean(structural_scores.into_iter()).expect("non-empty sequence"),
        movement,
        per_region,
        frames_used: seq.len(),
    })
}

/// SVG overlay of one frame: present points, their mirror images and the
/// axis, drawn in raster coordinates.
pub fn overlay_svg(frame: &FaceFrame, axis: &MidlineAxis) -> String {
    let mut raster: Vec<(usize, (f64, f64), bool)> = Vec::with_capacity(POINT_COUNT);
    let mut mirrored: Vec<(f64, f64)> = Vec::new();
    for p in frame.points() {
        let Some(pos) = p.position() else { continue };
        raster.push((
            p.id,
            pos.to_raster(),
            matches!(p.presence, Presence::Reconstructed(_)),
        ));
        if p.laterality != Laterality::Midline {
            mirrored.push(reflect_about(axis, pos).to_raster());
        }
    }
    let all = raster.iter().map(|r| r.1).chain(mirrored.iter().copied());
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for (x, y) in all {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    if raster.is_empty() {
        (min_x, min_y, max_x, max_y) = (0.0, 0.0, 1.0, 1.0);
    }
    let margin = 0.1 * (max_x - min_x).max(max_y - min_y).max(1.0);
    let (vx, vy) = (min_x - margin, min_y - margin);
    let (vw, vh) = (max_x - min_x + 2.0 * margin, max_y - min_y + 2.0 * margin);
    let radius = 0.01 * vw.max(vh);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx:.3} {vy:.3} {vw:.3} {vh:.3}">"#
    );
    // axis clipped to the view box diagonal length on either side
    let half = vw.hypot(vh);
    let (ax, ay) = axis.point().to_raster();
    let d = axis.direction();
    let _ = writeln!(
        svg,
        r#"  <line class="axis" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="green" stroke-width="{:.3}"/>"#,
        ax - d.x * half,
        ay + d.y * half,
        ax + d.x * half,
        ay - d.y * half,
        radius * 0.5
    );
    for (x, y) in &mirrored {
        let _ = writeln!(
            svg,
            r#"  <circle class="mirrored" cx="{x:.3}" cy="{y:.3}" r="{radius:.3}" fill="none" stroke="red" stroke-width="{:.3}"/>"#,
            radius * 0.4
        );
    }
    for (id, (x, y), reconstructed) in &raster {
        let color = if *reconstructed { "orange" } else { "blue" };
        let _ = writeln!(
            svg,
            r#"  <circle class="point" data-id="{id}" cx="{x:.3}" cy="{y:.3}" r="{radius:.3}" fill="{color}"/>"#
        );
    }
    svg.push_str("</svg>\n");
    svg
}
