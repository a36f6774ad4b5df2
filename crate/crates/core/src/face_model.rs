//! The 24-point facial key-point schema.
//!
//! Canonical id layout (sides are the subject's own left and right):
//!
//! | ids     | region       | side    |
//! |---------|--------------|---------|
//! | 0–2     | eyebrow      | left    | inner, middle, outer
//! | 3–5     | eyebrow      | right   | inner, middle, outer
//! | 6–9     | eye          | left    | inner corner, top, outer corner, bottom
//! | 10–13   | eye          | right   | same order
//! | 14–16   | lip corner   | left    | corner, upper, lower
//! | 17–19   | lip corner   | right   | same order
//! | 20–23   | lip middle   | midline | top to bottom
//!
//! Files use raster coordinates (y down). Parsing converts to the internal
//! y-up frame through [`Point2::from_raster`]; serialization converts back.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{centroid, Point2};

pub const POINT_COUNT: usize = 24;
pub const PAIR_COUNT: usize = 10;
pub const CSV_HEADER: &str = "id,region,laterality,state,x,y,present";

/// Named canonical ids.
pub mod ids {
    pub const LEFT_BROW_INNER: usize = 0;
    pub const LEFT_BROW_MIDDLE: usize = 1;
    pub const LEFT_BROW_OUTER: usize = 2;
    pub const RIGHT_BROW_INNER: usize = 3;
    pub const RIGHT_BROW_MIDDLE: usize = 4;
    pub const RIGHT_BROW_OUTER: usize = 5;
    pub const LEFT_EYE: [usize; 4] = [6, 7, 8, 9];
    pub const RIGHT_EYE: [usize; 4] = [10, 11, 12, 13];
    pub const LEFT_LIP_CORNER: usize = 14;
    pub const LEFT_LIP_UPPER: usize = 15;
    pub const LEFT_LIP_LOWER: usize = 16;
    pub const RIGHT_LIP_CORNER: usize = 17;
    pub const RIGHT_LIP_UPPER: usize = 18;
    pub const RIGHT_LIP_LOWER: usize = 19;
    pub const LIP_TOP: usize = 20;
    pub const LIP_UPPER_INNER: usize = 21;
    pub const LIP_LOWER_INNER: usize = 22;
    pub const LIP_BOTTOM: usize = 23;
    pub const MIDLINE: [usize; 4] = [20, 21, 22, 23];
    pub const LEFT_BROW: [usize; 3] = [0, 1, 2];
    pub const RIGHT_BROW: [usize; 3] = [3, 4, 5];
}

macro_rules! token_enum {
    ($name:ident { $($variant:ident => $token:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn token(self) -> &'static str {
                match self {
                    $($name::$variant => $token),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.token())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($token => Ok($name::$variant),)+
                    other => Err(format!(
                        concat!("unknown ", stringify!($name), " token {:?}"),
                        other
                    )),
                }
            }
        }
    };
}

token_enum!(Region {
    Eyebrow => "eyebrow",
    Eye => "eye",
    LipCorner => "lip_corner",
    LipMiddle => "lip_middle",
});

token_enum!(Laterality {
    Left => "left",
    Right => "right",
    Midline => "midline",
});

token_enum!(PointState {
    Stable => "stable",
    Active => "active",
    Passive => "passive",
});

impl Laterality {
    pub fn mirrored(self) -> Laterality {
        match self {
            Laterality::Left => Laterality::Right,
            Laterality::Right => Laterality::Left,
            Laterality::Midline => Laterality::Midline,
        }
    }
}

pub fn canonical_region(id: usize) -> Result<Region> {
    Ok(match id {
        0..=5 => Region::Eyebrow,
        6..=13 => Region::Eye,
        14..=19 => Region::LipCorner,
        20..=23 => Region::LipMiddle,
        _ => return Err(Error::PointIdOutOfRange(id)),
    })
}

pub fn canonical_laterality(id: usize) -> Result<Laterality> {
    Ok(match id {
        0..=2 | 6..=9 | 14..=16 => Laterality::Left,
        3..=5 | 10..=13 | 17..=19 => Laterality::Right,
        20..=23 => Laterality::Midline,
        _ => return Err(Error::PointIdOutOfRange(id)),
    })
}

/// Eye points are stable, everything else tracked here is active.
pub fn default_state(id: usize) -> Result<PointState> {
    Ok(match canonical_region(id)? {
        Region::Eye => PointState::Stable,
        Region::Eyebrow | Region::LipCorner | Region::LipMiddle => PointState::Active,
    })
}

/// Mirror partner of a point; midline points are their own partner.
pub fn counterpart(id: usize) -> Result<usize> {
    Ok(match id {
        0..=2 => id + 3,
        3..=5 => id - 3,
        6..=9 => id + 4,
        10..=13 => id - 4,
        14..=16 => id + 3,
        17..=19 => id - 3,
        20..=23 => id,
        _ => return Err(Error::PointIdOutOfRange(id)),
    })
}

/// The ten `(left, right)` id pairs in ascending left-id order.
pub fn mirror_pairs() -> impl Iterator<Item = (usize, usize)> {
    (0..POINT_COUNT)
        .filter(|&id| canonical_laterality(id) == Ok(Laterality::Left))
        .map(|id| (id, counterpart(id).expect("canonical id")))
}

/// Whether a point's coordinates were observed, inferred, or are missing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Presence {
    Observed(Point2),
    Reconstructed(Point2),
    Occluded,
}

impl Presence {
    pub fn position(self) -> Option<Point2> {
        match self {
            Presence::Observed(p) | Presence::Reconstructed(p) => Some(p),
            Presence::Occluded => None,
        }
    }

    fn token(self) -> &'static str {
        match self {
            Presence::Observed(_) => "1",
            Presence::Reconstructed(_) => "r",
            Presence::Occluded => "0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyPoint {
    pub id: usize,
    pub region: Region,
    pub laterality: Laterality,
    pub state: PointState,
    pub presence: Presence,
}

impl KeyPoint {
    /// A point with canonical labels and default state.
    pub fn canonical(id: usize, presence: Presence) -> Result<Self> {
        Ok(KeyPoint {
            id,
            region: canonical_region(id)?,
            laterality: canonical_laterality(id)?,
            state: default_state(id)?,
            presence,
        })
    }

    pub fn position(&self) -> Option<Point2> {
        self.presence.position()
    }

    fn validate(&self) -> Result<()> {
        let schema = |message: String| Error::Schema {
            id: self.id,
            message,
        };
        let region = canonical_region(self.id)?;
        let laterality = canonical_laterality(self.id)?;
        if (self.laterality == Laterality::Midline) != (self.region == Region::LipMiddle) {
            return Err(schema(format!(
                "laterality {} is incompatible with region {}",
                self.laterality, self.region
            )));
        }
        if self.region != region || self.laterality != laterality {
            return Err(schema(format!(
                "expected {region}/{laterality}, found {}/{}",
                self.region, self.laterality
            )));
        }
        if let Some(p) = self.position() {
            if !p.is_finite() {
                return Err(schema("non-finite coordinate".to_string()));
            }
        }
        Ok(())
    }
}

/// One 24-point observation of a face.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFrame {
    timestamp: f64,
    points: Vec<KeyPoint>,
}

impl FaceFrame {
    /// Validates and sorts the points by id.
    pub fn new(timestamp: f64, mut points: Vec<KeyPoint>) -> Result<Self> {
        if !timestamp.is_finite() {
            return Err(Error::Sequence("timestamp must be finite".into()));
        }
        if points.len() != POINT_COUNT {
            return Err(Error::InsufficientData(format!(
                "expected {POINT_COUNT} points, found {}",
                points.len()
            )));
        }
        points.sort_by_key(|p| p.id);
        for (expected, p) in points.iter().enumerate() {
            p.validate()?;
            if p.id != expected {
                return Err(Error::Schema {
                    id: p.id,
                    message: "duplicate id".into(),
                });
            }
        }
        Ok(FaceFrame { timestamp, points })
    }

    /// Builds a fully observed frame from 24 positions in the y-up frame.
    pub fn from_positions(timestamp: f64, positions: &[Point2; POINT_COUNT]) -> Result<Self> {
        let points = positions
            .iter()
            .enumerate()
            .map(|(id, &p)| KeyPoint::canonical(id, Presence::Observed(p)))
            .collect::<Result<Vec<_>>>()?;
        FaceFrame::new(timestamp, points)
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    pub fn with_timestamp(mut self, timestamp: f64) -> Self {
        self.timestamp = timestamp;
        self
    }

    pub fn points(&self) -> &[KeyPoint] {
        &self.points
    }

    pub fn point(&self, id: usize) -> Result<&KeyPoint> {
        self.points.get(id).ok_or(Error::PointIdOutOfRange(id))
    }

    /// Position of a present (observed or reconstructed) point.
    pub fn position(&self, id: usize) -> Option<Point2> {
        self.points.get(id).and_then(KeyPoint::position)
    }

    pub fn is_present(&self, id: usize) -> bool {
        self.position(id).is_some()
    }

    /// Per-id presence flags.
    pub fn present_mask(&self) -> [bool; POINT_COUNT] {
        std::array::from_fn(|id| self.is_present(id))
    }

    pub fn count_by_laterality(&self, side: Laterality) -> usize {
        self.points.iter().filter(|p| p.laterality == side).count()
    }

    /// Replaces one point's presence, keeping its labels.
    pub fn with_presence(mut self, id: usize, presence: Presence) -> Result<Self> {
        let point = self
            .points
            .get_mut(id)
            .ok_or(Error::PointIdOutOfRange(id))?;
        point.presence = presence;
        point.validate()?;
        Ok(self)
    }

    /// Applies `f` to every present position.
    pub fn map_positions(&self, mut f: impl FnMut(Point2) -> Point2) -> FaceFrame {
        let points = self
            .points
            .iter()
            .map(|p| {
                let presence = match p.presence {
                    Presence::Observed(q) => Presence::Observed(f(q)),
                    Presence::Reconstructed(q) => Presence::Reconstructed(f(q)),
                    Presence::Occluded => Presence::Occluded,
                };
                KeyPoint { presence, ..*p }
            })
            .collect();
        FaceFrame {
            timestamp: self.timestamp,
            points,
        }
    }

    /// Moves every point to its counterpart's id, carrying state and presence.
    ///
    /// Used after a reflection, which turns the subject's left side into the
    /// right side of the transformed face.
    pub fn swap_sides(&self) -> FaceFrame {
        let mut points = self.points.clone();
        for p in &self.points {
            let target = counterpart(p.id).expect("canonical id");
            points[target] = KeyPoint {
                id: target,
                region: p.region,
                laterality: p.laterality.mirrored(),
                state: p.state,
                presence: p.presence,
            };
        }
        FaceFrame {
            timestamp: self.timestamp,
            points,
        }
    }
}

fn parse_token<T: FromStr<Err = String>>(line: usize, field: &str) -> Result<T> {
    field.parse().map_err(|m: String| Error::parse(line, m))
}

fn parse_coordinate(line: usize, name: &str, field: &str) -> Result<f64> {
    let value: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {name} coordinate {field:?}")))?;
    if !value.is_finite() {
        return Err(Error::parse(line, format!("non-finite {name} coordinate")));
    }
    Ok(value)
}

/// Parses a key-point CSV document.
pub fn parse_frame(text: &str) -> Result<FaceFrame> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let Some((header_line, header)) = lines.next() else {
        return Err(Error::parse(
            1,
            format!("expected {POINT_COUNT} rows, found 0"),
        ));
    };
    if header != CSV_HEADER {
        return Err(Error::parse(
            header_line,
            format!("expected header {CSV_HEADER:?}"),
        ));
    }
    let mut slots: [Option<KeyPoint>; POINT_COUNT] = [None; POINT_COUNT];
    let mut rows = 0;
    let mut last_line = header_line;
    for (line, record) in lines {
        rows += 1;
        last_line = line;
        let fields: Vec<&str> = record.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(Error::parse(
                line,
                format!("expected 7 fields, found {}", fields.len()),
            ));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid id {:?}", fields[0])))?;
        if id >= POINT_COUNT {
            return Err(Error::parse(line, format!("id {id} out of range 0..24")));
        }
        let region: Region = parse_token(line, fields[1])?;
        let laterality: Laterality = parse_token(line, fields[2])?;
        let state: PointState = parse_token(line, fields[3])?;
        let presence = match fields[6] {
            "0" => Presence::Occluded,
            flag @ ("1" | "r") => {
                let p = Point2::from_raster(
                    parse_coordinate(line, "x", fields[4])?,
                    parse_coordinate(line, "y", fields[5])?,
                );
                if flag == "1" {
                    Presence::Observed(p)
                } else {
                    Presence::Reconstructed(p)
                }
            }
            other => {
                return Err(Error::parse(
                    line,
                    format!("present must be 0, 1 or r, found {other:?}"),
                ))
            }
        };
        let point = KeyPoint {
            id,
            region,
            laterality,
            state,
            presence,
        };
        point
            .validate()
            .map_err(|e| Error::parse(line, e.to_string()))?;
        if slots[id].replace(point).is_some() {
            return Err(Error::parse(line, format!("duplicate id {id}")));
        }
    }
    if rows != POINT_COUNT {
        return Err(Error::parse(
            last_line,
            format!("expected {POINT_COUNT} rows, found {rows}"),
        ));
    }
    let points = slots
        .into_iter()
        .map(|p| p.expect("24 unique ids"))
        .collect();
    FaceFrame::new(0.0, points)
}

/// Writes the frame as key-point CSV, rows ordered by id.
///
/// Coordinates use the shortest representation that parses back to the same
/// `f64`, so `parse_frame(serialize_frame(f))` reproduces every bit.
pub fn serialize_frame(frame: &FaceFrame) -> String {
    let mut out = String::with_capacity(64 * POINT_COUNT);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in frame.points() {
        let (x, y) = match p.position() {
            Some(q) => {
                let (x, y) = q.to_raster();
                (x.to_string(), y.to_string())
            }
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.id,
            p.region,
            p.laterality,
            p.state,
            x,
            y,
            p.presence.token()
        ));
    }
    out
}

/// Mean position of an eye's four points.
pub fn eye_centroid(frame: &FaceFrame, side: Laterality) -> Result<Point2> {
    let eye = match side {
        Laterality::Left => ids::LEFT_EYE,
        Laterality::Right => ids::RIGHT_EYE,
        Laterality::Midline => {
            return Err(Error::InvalidParameter("eyes are lateral".into()));
        }
    };
    let points: Vec<Point2> = eye.iter().filter_map(|&id| frame.position(id)).collect();
    if points.len() != eye.len() {
        let missing: Vec<String> = eye
            .iter()
            .filter(|&&id| !frame.is_present(id))
            .map(ToString::to_string)
            .collect();
        return Err(Error::InsufficientData(format!(
            "{side} eye points missing: {}",
            missing.join(",")
        )));
    }
    Ok(centroid(&points).expect("four points"))
}

/// Distance between the two eye centroids.
pub fn interocular_distance(frame: &FaceFrame) -> Result<f64> {
    let left = eye_centroid(frame, Laterality::Left)?;
    let right = eye_centroid(frame, Laterality::Right)?;
    let d = left.distance(right);
    let scale = left.norm().max(right.norm()).max(1.0);
    if !d.is_finite() || d <= 1e-12 * scale {
        return Err(Error::DegenerateFace("eye centroids coincide".to_string()));
    }
    Ok(d)
}

/// Time-ordered frames sharing one normalization length.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<FaceFrame>,
    interocular_ref: f64,
}

impl FrameSequence {
    /// `interocular_ref` defaults to the first frame's interocular distance.
    pub fn new(frames: Vec<FaceFrame>, interocular_ref: Option<f64>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Sequence("sequence has no frames".into()))?;
        for w in frames.windows(2) {
            if w[1].timestamp().partial_cmp(&w[0].timestamp()) != Some(std::cmp::Ordering::Greater)
            {
                return Err(Error::Sequence(format!(
                    "timestamps not strictly increasing: {} then {}",
                    w[0].timestamp(),
                    w[1].timestamp()
                )));
            }
        }
        let interocular_ref = match interocular_ref {
            Some(v) if v.is_finite() && v > 0.0 => v,
            Some(v) => {
                return Err(Error::Sequence(format!(
                    "interocular_ref must be positive, got {v}"
                )))
            }
            None => interocular_distance(first)?,
        };
        Ok(FrameSequence {
            frames,
            interocular_ref,
        })
    }

    pub fn frames(&self) -> &[FaceFrame] {
        &self.frames
    }

    pub fn interocular_ref(&self) -> f64 {
        self.interocular_ref
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Reads a directory of `frame_<index>.csv` files plus optional
/// `sequence.ini`.
///
/// `sequence.ini` keys: `timestamps` (comma-separated seconds, one per frame
/// in index order) and `interocular_ref`. Without timestamps each frame's
/// index is used as its time in seconds.
pub fn load_sequence(dir: &Path) -> Result<FrameSequence> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut indexed = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        let Some(index) = name
            .strip_prefix("frame_")
            .and_then(|rest| rest.strip_suffix(".csv"))
            .and_then(|digits| digits.parse::<u64>().ok())
        else {
            continue;
        };
        if indexed.insert(index, entry.path()).is_some() {
            return Err(Error::Sequence(format!("duplicate frame index {index}")));
        }
    }
    if indexed.is_empty() {
        return Err(Error::Sequence(format!(
            "no frame_<index>.csv files in {}",
            dir.display()
        )));
    }

    let ini_path = dir.join("sequence.ini");
    let (timestamps, interocular_ref) = if ini_path.exists() {
        read_sequence_ini(&ini_path)?
    } else {
        (None, None)
    };
    if let Some(ts) = &timestamps {
        if ts.len() != indexed.len() {
            return Err(Error::Sequence(format!(
                "sequence.ini lists {} timestamps for {} frames",
                ts.len(),
                indexed.len()
            )));
        }
    }

    let mut frames = Vec::with_capacity(indexed.len());
    for (pos, (index, path)) in indexed.into_iter().enumerate() {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let frame = parse_frame(&text).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })?;
        let t = timestamps.as_ref().map_or(index as f64, |ts| ts[pos]);
        frames.push(frame.with_timestamp(t));
    }
    FrameSequence::new(frames, interocular_ref)
}

fn read_sequence_ini(path: &Path) -> Result<(Option<Vec<f64>>, Option<f64>)> {
    let ini = ini::Ini::load_from_file(path)
        .map_err(|e| Error::Sequence(format!("{}: {e}", path.display())))?;
    let get = |key: &str| {
        ini.general_section()
            .get(key)
            .or_else(|| ini.section(Some("sequence")).and_then(|s| s.get(key)))
    };
    let number = |key: &str, v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| Error::Sequence(format!("invalid {key} value {v:?}")))
    };
    let timestamps = get("timestamps")
        .map(|v| {
            v.split(',')
                .map(|t| number("timestamps", t))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let interocular_ref = get("interocular_ref")
        .map(|v| number("interocular_ref", v))
        .transpose()?;
    Ok((timestamps, interocular_ref))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric_positions() -> [Point2; POINT_COUNT] {
        crate::synthetic::mirrored_face(Point2::new(100.0, -80.0), 60.0)
    }

    fn frame() -> FaceFrame {
        FaceFrame::from_positions(0.0, &symmetric_positions()).unwrap()
    }

    #[test]
    fn schema_cardinalities() {
        let f = frame();
        assert_eq!(f.count_by_laterality(Laterality::Left), 10);
        assert_eq!(f.count_by_laterality(Laterality::Right), 10);
        assert_eq!(f.count_by_laterality(Laterality::Midline), 4);
        let count = |r: Region, l: Laterality| {
            f.points()
                .iter()
                .filter(|p| p.region == r && p.laterality == l)
                .count()
        };
        for side in [Laterality::Left, Laterality::Right] {
            assert_eq!(count(Region::Eyebrow, side), 3);
            assert_eq!(count(Region::Eye, side), 4);
            assert_eq!(count(Region::LipCorner, side), 3);
        }
        assert_eq!(count(Region::LipMiddle, Laterality::Midline), 4);
        assert_eq!(mirror_pairs().count(), PAIR_COUNT);
    }

    #[test]
    fn parse_well_formed() {
        let parsed = parse_frame(&serialize_frame(&frame())).unwrap();
        assert_eq!(parsed, frame());
        assert_eq!(parsed.count_by_laterality(Laterality::Left), 10);
    }

    #[test]
    fn empty_input() {
        let err = parse_frame("").unwrap_err();
        assert!(
            err.to_string().contains("expected 24 rows, found 0"),
            "{err}"
        );
        let err = parse_frame(&format!("{CSV_HEADER}\n")).unwrap_err();
        assert!(
            err.to_string().contains("expected 24 rows, found 0"),
            "{err}"
        );
    }

    #[test]
    fn region_laterality_cross_check() {
        // every region × laterality combination against the midline rule
        for &region in Region::ALL {
            for &lat in Laterality::ALL {
                let ok = (lat == Laterality::Midline) == (region == Region::LipMiddle);
                let id = match (region, lat) {
                    (Region::Eyebrow, Laterality::Right) => 3,
                    (Region::Eye, Laterality::Left) => 6,
                    (Region::Eye, Laterality::Right) => 10,
                    (Region::LipCorner, Laterality::Left) => 14,
                    (Region::LipCorner, Laterality::Right) => 17,
                    (Region::LipMiddle, _) => 20,
                    _ => 0,
                };
                let text = serialize_frame(&frame());
                let mut lines: Vec<String> = text.lines().map(String::from).collect();
                let mut fields: Vec<String> = lines[id + 1].split(',').map(String::from).collect();
                fields[1] = region.to_string();
                fields[2] = lat.to_string();
                lines[id + 1] = fields.join(",");
                let result = parse_frame(&lines.join("\n"));
                assert_eq!(result.is_ok(), ok, "{region}/{lat}: {result:?}");
                if !ok {
                    let msg = result.unwrap_err().to_string();
                    assert!(msg.contains(&format!("line {}", id + 2)), "{msg}");
                }
            }
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let good = serialize_frame(&frame());
        let lines: Vec<String> = good.lines().map(String::from).collect();

        let mut dup = lines.clone();
        dup[5] = dup[4].clone();
        let err = parse_frame(&dup.join("\n")).unwrap_err();
        assert_eq!(err.code(), "E-PARSE");
        assert!(err.to_string().contains("line 6"), "{err}");
        assert!(err.to_string().contains("duplicate"), "{err}");

        let mut bad_enum = lines.clone();
        bad_enum[3] = bad_enum[3].replace("active", "sleepy");
        assert!(parse_frame(&bad_enum.join("\n"))
            .unwrap_err()
            .to_string()
            .contains("line 4"));

        let mut fields: Vec<&str> = lines[7].split(',').collect();
        fields[4] = "NaN";
        let nan_line = fields.join(",");
        let mut nan = lines.clone();
        nan[7] = nan_line;
        let err = parse_frame(&nan.join("\n")).unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");

        let short = lines[..10].join("\n");
        assert!(parse_frame(&short)
            .unwrap_err()
            .to_string()
            .contains("expected 24 rows, found 9"));
    }

    #[test]
    fn occluded_row_format() {
        let f = frame().with_presence(5, Presence::Occluded).unwrap();
        let text = serialize_frame(&f);
        let row = text.lines().nth(6).unwrap();
        assert_eq!(row, "5,eyebrow,right,active,,,0");
        let back = parse_frame(&text).unwrap();
        assert_eq!(back, f);
        assert!(!back.present_mask()[5]);
    }

    #[test]
    fn rows_sorted_by_id() {
        let text = serialize_frame(&frame());
        let ids: Vec<usize> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(ids, (0..24).collect::<Vec<_>>());
    }

    #[test]
    fn counterpart_is_involution_fixing_midline() {
        assert_eq!(
            counterpart(ids::LEFT_BROW_INNER).unwrap(),
            ids::RIGHT_BROW_INNER
        );
        assert_eq!(counterpart(ids::LIP_BOTTOM).unwrap(), ids::LIP_BOTTOM);
        let mut fixed = Vec::new();
        for id in 0..POINT_COUNT {
            let c = counterpart(id).unwrap();
            assert_eq!(counterpart(c).unwrap(), id);
            assert_eq!(canonical_region(c).unwrap(), canonical_region(id).unwrap());
            if c == id {
                fixed.push(id);
            }
        }
        assert_eq!(fixed, ids::MIDLINE);
        assert_eq!(counterpart(24), Err(Error::PointIdOutOfRange(24)));
    }

    #[test]
    fn interocular() {
        let mut pos = symmetric_positions();
        for (i, &id) in ids::LEFT_EYE.iter().enumerate() {
            let d = [(-5.0, 0.0), (0.0, 3.0), (5.0, 0.0), (0.0, -3.0)][i];
            pos[id] = Point2::new(-50.0 + d.0, d.1);
            pos[ids::RIGHT_EYE[i]] = Point2::new(50.0 - d.0, d.1);
        }
        let f = FaceFrame::from_positions(0.0, &pos).unwrap();
        assert_eq!(interocular_distance(&f).unwrap(), 100.0);

        let mut occluded = f.clone();
        for id in ids::LEFT_EYE {
            occluded = occluded.with_presence(id, Presence::Occluded).unwrap();
        }
        assert!(matches!(
            interocular_distance(&occluded),
            Err(Error::InsufficientData(_))
        ));

        let mut degenerate = pos;
        for id in ids::RIGHT_EYE {
            degenerate[id] = pos[ids::LEFT_EYE[0] + (id - ids::RIGHT_EYE[0])];
        }
        let f = FaceFrame::from_positions(0.0, &degenerate).unwrap();
        assert!(matches!(
            interocular_distance(&f),
            Err(Error::DegenerateFace(_))
        ));
    }

    #[test]
    fn sequence_requires_increasing_time() {
        let f = frame();
        let seq = FrameSequence::new(vec![f.clone(), f.clone().with_timestamp(1.0)], None).unwrap();
        assert!(seq.interocular_ref() > 0.0);
        assert!(FrameSequence::new(vec![f.clone(), f.clone()], None).is_err());
        assert!(FrameSequence::new(vec![], None).is_err());
        assert!(FrameSequence::new(vec![f], Some(-1.0)).is_err());
    }

    #[test]
    fn swap_sides_moves_points_to_counterparts() {
        let f = frame();
        let swapped = f.swap_sides();
        for id in 0..POINT_COUNT {
            let c = counterpart(id).unwrap();
            assert_eq!(swapped.position(c), f.position(id));
            assert_eq!(
                swapped.points()[c].laterality,
                canonical_laterality(c).unwrap()
            );
        }
        assert_eq!(swapped.swap_sides(), f);
    }
}
