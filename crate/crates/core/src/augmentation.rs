//! D4 acting on raster images, key-point frames and square convolution
//! kernels, plus orbit generation and directory-level augmentation.
//!
//! All three actions use the same convention: `(T_g X)(p) = X(g⁻¹ p)` in
//! centered y-up coordinates. Pixel indices are mapped through doubled
//! coordinates `U = 2·col − (w − 1)`, `V = (h − 1) − 2·row`, which keeps
//! half-integer centers of even-sized images exact.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::dihedral::{elements, inverse, matrix_of, GroupElement, MatrixLabel, TransformMatrix};
use crate::error::{Error, Result};
use crate::face_model::{parse_frame, serialize_frame, FaceFrame};
use crate::geometry::Point2;
use crate::imaging::{read_image, write_image, RasterImage};

/// Parses a D4 element by canonical name (`sr2`) or matrix label (`H`).
pub fn parse_d4(name: &str) -> Result<GroupElement> {
    match MatrixLabel::from_str(name) {
        Ok(label) => Ok(label.element()),
        Err(_) => GroupElement::parse(4, name),
    }
}

fn d4_matrix(g: GroupElement) -> Result<TransformMatrix> {
    matrix_of(g)
}

fn swaps_axes(m: &TransformMatrix) -> bool {
    m.entries()[0][0] == 0
}

/// Output dimensions of `g` acting on a `width × height` grid.
pub fn transformed_dims(g: GroupElement, width: usize, height: usize) -> Result<(usize, usize)> {
    let m = d4_matrix(g)?;
    Ok(if swaps_axes(&m) {
        (height, width)
    } else {
        (width, height)
    })
}

/// For each output cell in row-major order, the row-major source index.
fn index_map(g: GroupElement, width: usize, height: usize) -> Result<(usize, usize, Vec<usize>)> {
    let (out_w, out_h) = transformed_dims(g, width, height)?;
    let back = d4_matrix(inverse(g))?;
    let (w, h) = (width as i64, height as i64);
    let (ow, oh) = (out_w as i64, out_h as i64);
    let mut map = Vec::with_capacity(out_w * out_h);
    for row in 0..oh {
        for col in 0..ow {
            let (u, v) = back.apply_i64(2 * col - (ow - 1), (oh - 1) - 2 * row);
            let src_col = (u + w - 1) / 2;
            let src_row = ((h - 1) - v) / 2;
            debug_assert!((0..w).contains(&src_col) && (0..h).contains(&src_row));
            map.push((src_row * w + src_col) as usize);
        }
    }
    Ok((out_w, out_h, map))
}

/// Lossless pixel permutation `(T_g I)(p) = I(g⁻¹ p)`.
pub fn act_on_image(g: GroupElement, img: &RasterImage) -> Result<RasterImage> {
    let (out_w, out_h, map) = index_map(g, img.width(), img.height())?;
    let c = img.channels();
    let src = img.pixels();
    let mut pixels = Vec::with_capacity(src.len());
    for &i in &map {
        pixels.extend_from_slice(&src[i * c..(i + 1) * c]);
    }
    RasterImage::new(out_w, out_h, c, pixels)
}

/// `p' = M(g)(p − center) + center` for every present point. Reflections
/// also move each point to its counterpart id so left and right labels
/// stay attached to the correct side of the face.
pub fn act_on_keypoints(g: GroupElement, frame: &FaceFrame, center: Point2) -> Result<FaceFrame> {
    act_between_centers(g, frame, center, center)
}

/// Like [`act_on_keypoints`] but lands on a different output center, as
/// needed when a non-square image changes shape under the action.
pub fn act_between_centers(
    g: GroupElement,
    frame: &FaceFrame,
    from: Point2,
    to: Point2,
) -> Result<FaceFrame> {
    if !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidParameter(
            "transform center must be finite".into(),
        ));
    }
    let m = d4_matrix(g)?;
    if g.is_identity() && from == to {
        return Ok(frame.clone());
    }
    let moved = frame.map_positions(|p| {
        let (x, y) = m.apply(p.x - from.x, p.y - from.y);
        Point2::new(x + to.x, y + to.y)
    });
    Ok(if m.determinant() < 0 {
        moved.swap_sides()
    } else {
        moved
    })
}

/// Image center of a `width × height` raster, in y-up key-point coordinates.
pub fn image_center(width: usize, height: usize) -> Point2 {
    Point2::from_raster((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0)
}

/// Key points of `frame` (given in the raster of a `width × height` image)
/// moved along with the pixels under `g`.
pub fn act_on_image_keypoints(
    g: GroupElement,
    frame: &FaceFrame,
    width: usize,
    height: usize,
) -> Result<FaceFrame> {
    let (ow, oh) = transformed_dims(g, width, height)?;
    act_between_centers(g, frame, image_center(width, height), image_center(ow, oh))
}

/// Square, odd-sized real convolution kernel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    values: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, values: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) {
            return Err(Error::Kernel(format!(
                "kernel size must be odd, got {size}"
            )));
        }
        if values.len() != size * size {
            return Err(Error::Kernel(format!(
                "{size}x{size} kernel needs {} values, got {}",
                size * size,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Kernel("kernel values must be finite".into()));
        }
        Ok(Kernel { size, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let size = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != size) {
            return Err(Error::Kernel(format!(
                "kernel must be square: {size} rows but a row of {}",
                bad.len()
            )));
        }
        Self::new(size, rows.concat())
    }

    /// One row per line, values separated by commas or whitespace; blank
    /// lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::parse(n + 1, format!("bad kernel value {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Kernel("empty kernel".into()));
        }
        Self::from_rows(&rows)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.size + col]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.size) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// The kernel rearranged by the same index map as [`act_on_image`].
pub fn transform_kernel(g: GroupElement, kernel: &Kernel) -> Result<Kernel> {
    let (_, _, map) = index_map(g, kernel.size, kernel.size)?;
    Ok(Kernel {
        size: kernel.size,
        values: map.iter().map(|&i| kernel.values[i]).collect(),
    })
}

/// All eight transformed kernels in canonical element order.
pub fn filter_bank(kernel: &Kernel) -> Result<Vec<(GroupElement, Kernel)>> {
    elements(4)?
        .into_iter()
        .map(|g| Ok((g, transform_kernel(g, kernel)?)))
        .collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// The eight images `T_g img` in canonical element order.
pub fn orbit_images(img: &RasterImage) -> Result<Vec<(GroupElement, RasterImage)>> {
    if !img.is_square() {
        return Err(Error::NotSquare {
            width: img.width(),
            height: img.height(),
        });
    }
    elements(4)?
        .into_iter()
        .map(|g| Ok((g, act_on_image(g, img)?)))
        .collect()
}

/// Number of distinct images in an orbit, by content hash.
pub fn distinct_count(images: &[(GroupElement, RasterImage)]) -> usize {
    images
        .iter()
        .map(|(_, im)| sha256_hex(&write_image(im)))
        .collect::<BTreeSet<_>>()
        .len()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ManifestEntry {
    pub source: String,
    pub element: String,
    pub path: String,
    pub sha256: String,
}

pub const MANIFEST_HEADER: &str = "source,element,path,sha256";

pub fn manifest_csv(entries: &[ManifestEntry]) -> String {
    let mut out = format!("{MANIFEST_HEADER}\n");
    for e in entries {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.source, e.element, e.path, e.sha256
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitManifest {
    pub source_id: String,
    pub entries: Vec<ManifestEntry>,
    pub distinct_count: usize,
}

impl OrbitManifest {
    pub fn to_csv(&self) -> String {
        manifest_csv(&self.entries)
    }
}

fn image_extension(img: &RasterImage) -> &'static str {
    if img.channels() == 1 {
        "pgm"
    } else {
        "ppm"
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `<source_id>__<element>.pgm` (or `.ppm`) for all eight elements
/// into `out_dir`. Manifest paths are relative to `out_dir`.
pub fn write_orbit(img: &RasterImage, source_id: &str, out_dir: &Path) -> Result<OrbitManifest> {
    let images = orbit_images(img)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut entries = Vec::with_capacity(images.len());
    for (g, im) in &images {
        let bytes = write_image(im);
        let name = format!("{source_id}__{g}.{}", image_extension(im));
        write_file(&out_dir.join(&name), &bytes)?;
        entries.push(ManifestEntry {
            source: source_id.to_string(),
            element: g.to_string(),
            path: name,
            sha256: sha256_hex(&bytes),
        });
    }
    Ok(OrbitManifest {
        source_id: source_id.to_string(),
        entries,
        distinct_count: distinct_count(&images),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentOptions {
    /// Elements to emit, in output order.
    pub elements: Vec<GroupElement>,
    /// Fixed key-point center; `None` follows the image pixels.
    pub center: Option<Point2>,
    pub require_square: bool,
}

impl Default for AugmentOptions {
    fn default() -> Self {
        AugmentOptions {
            elements: elements(4).expect("D4 exists"),
            center: None,
            require_square: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AugmentSummary {
    pub processed: usize,
    pub written: usize,
    /// `(file name, message)` for every input that failed.
    pub errors: Vec<(String, String)>,
    pub manifest: Vec<ManifestEntry>,
}

pub const DATASET_MANIFEST: &str = "manifest.csv";

fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("ppm"));
        if is_image && path.is_file() {
            found.push(path);
        }
    }
    found.sort();
    Ok(found)
}

fn augment_one(
    path: &Path,
    out_dir: &Path,
    options: &AugmentOptions,
) -> Result<Vec<ManifestEntry>> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Image(format!("unusable file name {}", path.display())))?
        .to_string();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let img = read_image(&bytes)?;
    if options.require_square && !img.is_square() {
        return Err(Error::NotSquare {
            width: img.width(),
            height: img.height(),
        });
    }
    let csv_path = path.with_extension("csv");
    let frame = if csv_path.is_file() {
        let text = fs::read_to_string(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        Some(parse_frame(&text)?)
    } else {
        None
    };

    // build everything before touching the output so a failure leaves nothing behind
    let mut outputs: Vec<(String, String, Vec<u8>)> = Vec::new();
    for &g in &options.elements {
        let out = act_on_image(g, &img)?;
        outputs.push((
            g.to_string(),
            format!("{stem}__{g}.{}", image_extension(&out)),
            write_image(&out),
        ));
        if let Some(frame) = &frame {
            let moved = match options.center {
                Some(c) => act_on_keypoints(g, frame, c)?,
                None => act_on_image_keypoints(g, frame, img.width(), img.height())?,
            };
            outputs.push((
                g.to_string(),
                format!("{stem}__{g}.csv"),
                serialize_frame(&moved).into_bytes(),
            ));
        }
    }
    let mut entries = Vec::with_capacity(outputs.len());
    for (element, name, data) in outputs {
        write_file(&out_dir.join(&name), &data)?;
        entries.push(ManifestEntry {
            source: stem.clone(),
            element,
            path: name,
            sha256: sha256_hex(&data),
        });
    }
    Ok(entries)
}

/// Writes the orbit of every PGM/PPM in `in_dir` (and of its `<stem>.csv`
/// key points, when present) to `out_dir`, followed by `manifest.csv`.
/// Per-file failures are collected in the summary.
pub fn augment_dataset(
    in_dir: &Path,
    out_dir: &Path,
    options: &AugmentOptions,
) -> Result<AugmentSummary> {
    if options.elements.iter().any(|g| g.order() != 4) {
        return Err(Error::InvalidParameter(
            "augmentation elements must belong to D4".into(),
        ));
    }
    let inputs = list_images(in_dir)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut summary = AugmentSummary::default();
    for path in &inputs {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        match augment_one(path, out_dir, options) {
            Ok(entries) => {
                summary.processed += 1;
                summary.written += entries.len();
                summary.manifest.extend(entries);
            }
            Err(e) => summary.errors.push((name, e.to_string())),
        }
    }
    let manifest_path = out_dir.join(DATASET_MANIFEST);
    write_file(&manifest_path, manifest_csv(&summary.manifest).as_bytes())?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dihedral::compose;
    use crate::face_model::{ids, Presence};
    use crate::synthetic::mirrored_face;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn el(name: &str) -> GroupElement {
        parse_d4(name).unwrap()
    }

    fn gray(w: usize, h: usize, values: &[u8]) -> RasterImage {
        RasterImage::new(w, h, 1, values.to_vec()).unwrap()
    }

    fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, c: usize) -> RasterImage {
        let px = (0..w * h * c).map(|_| rng.random()).collect();
        RasterImage::new(w, h, c, px).unwrap()
    }

    #[test]
    fn element_names() {
        assert_eq!(el("R1"), el("r"));
        assert_eq!(el("V"), el("s"));
        assert_eq!(el("D1"), el("sr"));
        assert_eq!(el("H"), el("sr2"));
        assert!(parse_d4("r4").is_err());
    }

    #[test]
    fn two_by_two_fixture() {
        let (a, b, c, d) = (1, 2, 3, 4);
        let img = gray(2, 2, &[a, b, c, d]);
        assert_eq!(act_on_image(el("e"), &img).unwrap(), img);
        assert_eq!(
            act_on_image(el("R1"), &img).unwrap().pixels(),
            &[b, d, a, c]
        );
        let half = act_on_image(el("R2"), &img).unwrap();
        assert_eq!(half.pixels(), &[d, c, b, a]);
        let twice = act_on_image(el("R1"), &act_on_image(el("R1"), &img).unwrap()).unwrap();
        assert_eq!(twice, half);
        assert_eq!(
            act_on_image(el("D1"), &img).unwrap().pixels(),
            &[d, b, c, a]
        );
    }

    #[test]
    fn vertical_reflection_reverses_rows() {
        let img = gray(3, 2, &[1, 2, 3, 4, 5, 6]);
        let flipped = act_on_image(el("V"), &img).unwrap();
        let brute: Vec<u8> = img
            .pixels()
            .chunks(3)
            .flat_map(|row| row.iter().rev().copied())
            .collect();
        assert_eq!(flipped.pixels(), brute.as_slice());
        let h = act_on_image(el("H"), &img).unwrap();
        assert_eq!(h.pixels(), &[4, 5, 6, 1, 2, 3]);
    }

    #[test]
    fn rectangular_rotation_transposes() {
        let img = gray(3, 2, &[1, 2, 3, 4, 5, 6]);
        let r = act_on_image(el("R1"), &img).unwrap();
        assert_eq!((r.width(), r.height()), (2, 3));
        // counterclockwise: the right column becomes the top row
        assert_eq!(r.pixels(), &[3, 6, 2, 5, 1, 4]);
    }

    #[test]
    fn action_laws_on_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let group = elements(4).unwrap();
        for (w, h, c) in [(1, 1, 1), (4, 4, 1), (5, 3, 3), (2, 7, 1)] {
            let img = random_image(&mut rng, w, h, c);
            for &g in &group {
                let tg = act_on_image(g, &img).unwrap();
                let mut a = tg.pixels().to_vec();
                let mut b = img.pixels().to_vec();
                a.sort_unstable();
                b.sort_unstable();
                assert_eq!(a, b);
                assert_eq!(act_on_image(inverse(g), &tg).unwrap(), img);
                for &k in &group {
                    let lhs = act_on_image(g, &act_on_image(k, &img).unwrap()).unwrap();
                    let rhs = act_on_image(compose(g, k).unwrap(), &img).unwrap();
                    assert_eq!(lhs, rhs, "{g}·{k} on {w}x{h}");
                }
            }
        }
    }

    #[test]
    fn non_d4_elements_are_rejected() {
        let img = gray(1, 1, &[0]);
        let g = GroupElement::rotation(5, 1).unwrap();
        assert_eq!(act_on_image(g, &img), Err(Error::UnsupportedOrder(5)));
    }

    #[test]
    fn keypoint_action_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let positions: [Point2; 24] = std::array::from_fn(|_| {
            Point2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0))
        });
        let frame = FaceFrame::from_positions(0.0, &positions).unwrap();
        let center = Point2::new(0.3, -1.7);
        let group = elements(4).unwrap();
        assert_eq!(act_on_keypoints(el("e"), &frame, center).unwrap(), frame);
        for &g in &group {
            for &k in &group {
                let lhs =
                    act_on_keypoints(g, &act_on_keypoints(k, &frame, center).unwrap(), center)
                        .unwrap();
                let rhs = act_on_keypoints(compose(g, k).unwrap(), &frame, center).unwrap();
                for id in 0..24 {
                    let (a, b) = (lhs.position(id).unwrap(), rhs.position(id).unwrap());
                    assert!(a.distance(b) <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn mirror_about_midline_is_relabeling() {
        let face = mirrored_face(Point2::new(2.5, 1.0), 3.0);
        let frame = FaceFrame::from_positions(0.0, &face).unwrap();
        let axis = crate::symmetry::estimate_midline(&frame).unwrap();
        let out = act_on_keypoints(el("V"), &frame, axis.point()).unwrap();
        for id in 0..24 {
            assert!(
                out.position(id)
                    .unwrap()
                    .distance(frame.position(id).unwrap())
                    <= 1e-9
            );
            assert_eq!(
                out.point(id).unwrap().laterality,
                frame.point(id).unwrap().laterality
            );
        }
    }

    #[test]
    fn occluded_points_stay_occluded() {
        let face = mirrored_face(Point2::new(0.0, 0.0), 1.0);
        let frame = FaceFrame::from_positions(0.0, &face)
            .unwrap()
            .with_presence(ids::LEFT_BROW_INNER, Presence::Occluded)
            .unwrap();
        let out = act_on_keypoints(el("V"), &frame, Point2::default()).unwrap();
        assert!(!out.is_present(ids::RIGHT_BROW_INNER));
        assert!(out.is_present(ids::LEFT_BROW_INNER));
    }

    #[test]
    fn keypoints_track_pixels() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for (w, h) in [(6, 6), (7, 4)] {
            let img = random_image(&mut rng, w, h, 1);
            let positions: [Point2; 24] = std::array::from_fn(|_| {
                Point2::from_raster(rng.random_range(0..w) as f64, rng.random_range(0..h) as f64)
            });
            let frame = FaceFrame::from_positions(0.0, &positions).unwrap();
            for g in elements(4).unwrap() {
                let out_img = act_on_image(g, &img).unwrap();
                let out = act_on_image_keypoints(g, &frame, w, h).unwrap();
                let moved_back =
                    act_on_image_keypoints(inverse(g), &out, out_img.width(), out_img.height())
                        .unwrap();
                for id in 0..24 {
                    let (x0, y0) = frame.position(id).unwrap().to_raster();
                    let dest = out
                        .position(crate::face_model::counterpart(id).unwrap())
                        .filter(|_| matrix_of(g).unwrap().determinant() < 0)
                        .or_else(|| out.position(id))
                        .unwrap();
                    let (x1, y1) = dest.to_raster();
                    assert_eq!(
                        out_img.get(x1.round() as usize, y1.round() as usize, 0),
                        img.get(x0 as usize, y0 as usize, 0)
                    );
                    assert!(
                        moved_back
                            .position(id)
                            .unwrap()
                            .distance(frame.position(id).unwrap())
                            < 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn sobel_rotates_to_vertical() {
        let sobel_x = Kernel::from_rows(&[
            vec![-1.0, 0.0, 1.0],
            vec![-2.0, 0.0, 2.0],
            vec![-1.0, 0.0, 1.0],
        ])
        .unwrap();
        let up = Kernel::from_rows(&[
            vec![1.0, 2.0, 1.0],
            vec![0.0, 0.0, 0.0],
            vec![-1.0, -2.0, -1.0],
        ])
        .unwrap();
        assert_eq!(transform_kernel(el("R1"), &sobel_x).unwrap(), up);
        for g in elements(4).unwrap() {
            let t = transform_kernel(g, &sobel_x).unwrap();
            assert_eq!(transform_kernel(inverse(g), &t).unwrap(), sobel_x);
            assert_eq!(t.values().iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn symmetric_kernel_is_fixed() {
        let g = |i: f64| (-i * i / 2.0).exp();
        let rows: Vec<Vec<f64>> = (-2..=2)
            .map(|y| (-2..=2).map(|x| g(x as f64) * g(y as f64)).collect())
            .collect();
        let k = Kernel::from_rows(&rows).unwrap();
        for (_, t) in filter_bank(&k).unwrap() {
            assert_eq!(t, k);
        }
    }

    #[test]
    fn kernel_validation_and_parsing() {
        assert!(Kernel::new(2, vec![0.0; 4]).is_err());
        assert!(Kernel::from_rows(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).is_err());
        let k = Kernel::parse("# sobel\n-1, 0, 1\n-2 0 2\n\n-1,0,1\n").unwrap();
        assert_eq!(k.size(), 3);
        assert_eq!(k.get(1, 0), -2.0);
        assert_eq!(Kernel::parse(&k.to_csv()).unwrap(), k);
        assert!(Kernel::parse("1,x,2").is_err());
        assert!(Kernel::parse("").is_err());
    }

    #[test]
    fn orbit_sizes() {
        let constant = RasterImage::filled(5, 5, 1, 77).unwrap();
        assert_eq!(distinct_count(&orbit_images(&constant).unwrap()), 1);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let half: Vec<Vec<u8>> = (0..6)
            .map(|_| (0..3).map(|_| rng.random()).collect())
            .collect();
        let mirror = RasterImage::from_fn(6, 6, |x, y| half[y][x.min(5 - x)]).unwrap();
        assert_eq!(act_on_image(el("V"), &mirror).unwrap(), mirror);
        assert_eq!(distinct_count(&orbit_images(&mirror).unwrap()), 4);

        let generic = random_image(&mut rng, 6, 6, 1);
        assert_eq!(distinct_count(&orbit_images(&generic).unwrap()), 8);

        let rect = RasterImage::filled(4, 3, 1, 0).unwrap();
        assert_eq!(
            orbit_images(&rect).unwrap_err(),
            Error::NotSquare {
                width: 4,
                height: 3
            }
        );
    }

    #[test]
    fn orbit_manifest_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let img = random_image(&mut ChaCha8Rng::seed_from_u64(2), 4, 4, 3);
        let m = write_orbit(&img, "face", dir.path()).unwrap();
        assert_eq!(m.entries.len(), 8);
        assert_eq!(m.distinct_count, 8);
        assert_eq!(m.entries[5].path, "face__sr.ppm");
        let bytes = fs::read(dir.path().join("face__sr.ppm")).unwrap();
        assert_eq!(sha256_hex(&bytes), m.entries[5].sha256);
        assert!(m
            .to_csv()
            .starts_with("source,element,path,sha256\nface,e,face__e.ppm,"));
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn dataset_augmentation() {
        let input = tempfile::tempdir().unwrap();
        let output = tempfile::tempdir().unwrap();
        let empty =
            augment_dataset(input.path(), output.path(), &AugmentOptions::default()).unwrap();
        assert_eq!((empty.processed, empty.errors.len()), (0, 0));

        let img = RasterImage::from_fn(5, 5, |x, y| (x * 50 + y) as u8).unwrap();
        fs::write(input.path().join("b.pgm"), write_image(&img)).unwrap();
        let face = mirrored_face(Point2::from_raster(2.0, 2.0), 1.0);
        let frame = FaceFrame::from_positions(0.0, &face).unwrap();
        fs::write(input.path().join("b.csv"), serialize_frame(&frame)).unwrap();
        fs::write(input.path().join("a.pgm"), b"P5\n2 2\n255\n\x00").unwrap();

        let summary =
            augment_dataset(input.path(), output.path(), &AugmentOptions::default()).unwrap();
        assert_eq!(summary.processed, 1);
        assert_eq!(summary.written, 16);
        assert_eq!(summary.errors.len(), 1);
        assert_eq!(summary.errors[0].0, "a.pgm");
        let manifest = fs::read_to_string(output.path().join(DATASET_MANIFEST)).unwrap();
        assert_eq!(manifest.lines().count(), 17);
        let turned =
            parse_frame(&fs::read_to_string(output.path().join("b__r.csv")).unwrap()).unwrap();
        let expected = act_on_keypoints(el("r"), &frame, Point2::from_raster(2.0, 2.0)).unwrap();
        assert_eq!(turned, expected);

        let again = tempfile::tempdir().unwrap();
        augment_dataset(input.path(), again.path(), &AugmentOptions::default()).unwrap();
        assert_eq!(
            fs::read_to_string(again.path().join(DATASET_MANIFEST)).unwrap(),
            manifest
        );
    }

    #[test]
    fn require_square_rejects_rectangles() {
        let input = tempfile::tempdir().unwrap();
        let output = tempfile::tempdir().unwrap();
        fs::write(
            input.path().join("wide.pgm"),
            write_image(&RasterImage::filled(3, 2, 1, 9).unwrap()),
        )
        .unwrap();
        let opts = AugmentOptions {
            require_square: true,
            ..AugmentOptions::default()
        };
        let s = augment_dataset(input.path(), output.path(), &opts).unwrap();
        assert_eq!(s.processed, 0);
        assert_eq!(s.errors.len(), 1);
        let loose =
            augment_dataset(input.path(), output.path(), &AugmentOptions::default()).unwrap();
        assert_eq!(loose.processed, 1);
    }
}
