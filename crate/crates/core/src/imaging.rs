//! Minimal raster stack: binary PGM/PPM I/O, luma conversion, Gaussian
//! smoothing, Canny edges, bounding rectangles, cropping and square padding.
//!
//! Every filter accumulates in `f64` with a fixed summation order and rounds
//! half away from zero, so results are bit-reproducible.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

/// Row-major 8-bit image with one (gray) or three (RGB) channels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Image(format!("empty dimensions {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Image(format!(
                "unsupported channel count {channels}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Error::Image("dimensions overflow".into()))?;
        if pixels.len() != expected {
            return Err(Error::Image(format!(
                "buffer holds {} samples, expected {expected}",
                pixels.len()
            )));
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    /// Grayscale image from a per-pixel function of `(x, y)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, 1, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }

    /// Samples of pixel `(x, y)`, one per channel.
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let start = (y * self.width + x) * self.channels;
        &self.pixels[start..start + self.channels]
    }

    pub fn get(&self, x: usize, y: usize, channel: usize) -> u8 {
        self.pixels[(y * self.width + x) * self.channels + channel]
    }

    pub fn set(&mut self, x: usize, y: usize, channel: usize, value: u8) {
        self.pixels[(y * self.width + x) * self.channels + channel] = value;
    }

    fn require_gray(&self, what: &str) -> Result<()> {
        if self.channels != 1 {
            return Err(Error::InvalidParameter(format!(
                "{what} needs a single-channel image, got {} channels",
                self.channels
            )));
        }
        Ok(())
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Image(format!("missing {what} in header")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::Image(format!("{what} out of range")))
    }
}

/// Decodes a binary PGM (`P5`) or PPM (`P6`) with maxval 255.
pub fn read_image(bytes: &[u8]) -> Result<RasterImage> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(Error::Image("expected P5 or P6 magic number".into())),
    };
    let mut cursor = HeaderCursor { bytes, pos: 2 };
    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    let maxval = cursor.number("maxval")?;
    if maxval != 255 {
        return Err(Error::Image(format!(
            "unsupported maxval {maxval}, only 255"
        )));
    }
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => {
            return Err(Error::Image(
                "header must end with one whitespace byte".into(),
            ))
        }
    }
    if width == 0 || height == 0 {
        return Err(Error::Image(format!("empty dimensions {width}x{height}")));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::Image("dimensions overflow".into()))?;
    let payload = &bytes[cursor.pos..];
    if payload.len() < expected {
        return Err(Error::Image(format!(
            "truncated payload: {} of {expected} bytes",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(Error::Image(format!(
            "{} trailing bytes after payload",
            payload.len() - expected
        )));
    }
    RasterImage::new(width, height, channels, payload.to_vec())
}

/// Encodes with the canonical header `P5\n<w> <h>\n255\n` (or `P6`).
pub fn write_image(img: &RasterImage) -> Vec<u8> {
    let magic = if img.channels == 1 { "P5" } else { "P6" };
    let header = format!("{magic}\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

/// Integer luma `round(0.299 R + 0.587 G + 0.114 B)`.
pub fn to_grayscale(img: &RasterImage) -> RasterImage {
    if img.channels == 1 {
        return img.clone();
    }
    let pixels = img
        .pixels
        .chunks_exact(3)
        .map(|p| {
            let weighted = 299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32;
            ((weighted + 500) / 1000) as u8
        })
        .collect();
    RasterImage {
        width: img.width,
        height: img.height,
        channels: 1,
        pixels,
    }
}

/// Symmetric border: `… c b a | a b c … x y z | z y x …`, valid for any offset.
fn reflect_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let m = i.rem_euclid(2 * n);
    (if m < n { m } else { 2 * n - 1 - m }) as usize
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Separable Gaussian of a gray image, unrounded.
fn smooth_f64(img: &RasterImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width, img.height);
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let mut horizontal = vec![0.0; w * h];
    for y in 0..h {
        let row = &img.pixels[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, weight) in kernel.iter().enumerate() {
                let sx = reflect_index(x as isize + k as isize - radius, w);
                acc += weight * row[sx] as f64;
            }
            horizontal[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, weight) in kernel.iter().enumerate() {
                let sy = reflect_index(y as isize + k as isize - radius, h);
                acc += weight * horizontal[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

fn round_sample(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Gaussian smoothing with kernel radius `ceil(3σ)` and symmetric borders.
pub fn gaussian_smooth(img: &RasterImage, sigma: f64) -> Result<RasterImage> {
    img.require_gray("gaussian_smooth")?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let pixels = smooth_f64(img, sigma)
        .into_iter()
        .map(round_sample)
        .collect();
    RasterImage::new(img.width, img.height, 1, pixels)
}

/// Canny thresholds (fractions of the strongest gradient) and pre-blur.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub low: f64,
    pub high: f64,
    pub sigma: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        CannyParams {
            low: 0.1,
            high: 0.3,
            sigma: 1.4,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.low > 0.0 && self.low < self.high && self.high <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Canny thresholds need 0 < low < high <= 1, got low={} high={}",
                self.low, self.high
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Canny sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Sobel gradients `(gx, gy)` of a float image, raster orientation (y down).
pub fn sobel(values: &[f64], width: usize, height: usize) -> (Vec<f64>, Vec<f64>) {
    let at =
        |x: isize, y: isize| values[reflect_index(y, height) * width + reflect_index(x, width)];
    let mut gx = vec![0.0; width * height];
    let mut gy = vec![0.0; width * height];
    for y in 0..height as isize {
        for x in 0..width as isize {
            let i = y as usize * width + x as usize;
            gx[i] = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            gy[i] = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
        }
    }
    (gx, gy)
}

/// Canny edges with the default σ = 1.4.
pub fn canny_edges(img: &RasterImage, low: f64, high: f64) -> Result<RasterImage> {
    canny_with(
        img,
        &CannyParams {
            low,
            high,
            ..CannyParams::default()
        },
    )
}

/// Gaussian blur, Sobel gradients, 4-direction non-maximum suppression and
/// hysteresis. Output samples are 0 or 255; the one-pixel frame is always 0.
pub fn canny_with(img: &RasterImage, params: &CannyParams) -> Result<RasterImage> {
    img.require_gray("canny_edges")?;
    params.validate()?;
    let (w, h) = (img.width, img.height);
    let smoothed = smooth_f64(img, params.sigma);
    let (gx, gy) = sobel(&smoothed, w, h);
    let magnitude: Vec<f64> = gx.iter().zip(&gy).map(|(x, y)| x.hypot(*y)).collect();
    let max = magnitude.iter().copied().fold(0.0, f64::max);
    let mut out = vec![0u8; w * h];
    if max == 0.0 || w < 3 || h < 3 {
        return RasterImage::new(w, h, 1, out);
    }

    // thin: a pixel survives when it is ≥ its predecessor and > its successor
    // along the quantized gradient direction, so plateaus keep one pixel
    let mut thin = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = magnitude[i];
            if m == 0.0 {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (dx, dy): (isize, isize) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let idx =
                |ox: isize, oy: isize| (y as isize + oy) as usize * w + (x as isize + ox) as usize;
            let before = magnitude[idx(-dx, -dy)];
            let after = magnitude[idx(dx, dy)];
            if m >= before && m > after {
                thin[i] = m;
            }
        }
    }

    let high = params.high * max;
    let low = params.low * max;
    let mut queue = VecDeque::new();
    for (i, &m) in thin.iter().enumerate() {
        if m >= high {
            out[i] = 255;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for oy in -1..=1 {
            for ox in -1..=1 {
                let (nx, ny) = (x + ox, y + oy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if out[j] == 0 && thin[j] >= low {
                    out[j] = 255;
                    queue.push_back(j);
                }
            }
        }
    }
    RasterImage::new(w, h, 1, out)
}

/// Half-open pixel rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    pub fn to_csv(&self) -> String {
        format!("{},{},{},{}", self.x0, self.y0, self.x1, self.y1)
    }

    fn check(&self, img: &RasterImage) -> Result<()> {
        if self.x0 >= self.x1 || self.y0 >= self.y1 || self.x1 > img.width || self.y1 > img.height {
            return Err(Error::RectOutOfBounds {
                x0: self.x0,
                y0: self.y0,
                x1: self.x1,
                y1: self.y1,
                width: img.width,
                height: img.height,
            });
        }
        Ok(())
    }
}

/// Tightest rectangle containing every pixel with a nonzero sample.
pub fn bounding_rect(edges: &RasterImage) -> Result<Rect> {
    let mut rect: Option<Rect> = None;
    for y in 0..edges.height {
        for x in 0..edges.width {
            if edges.pixel(x, y).iter().all(|&s| s == 0) {
                continue;
            }
            let r = rect.get_or_insert(Rect {
                x0: x,
                y0: y,
                x1: x + 1,
                y1: y + 1,
            });
            r.x0 = r.x0.min(x);
            r.x1 = r.x1.max(x + 1);
            r.y1 = y + 1;
        }
    }
    rect.ok_or(Error::EmptyEdgeMap)
}

pub fn crop(img: &RasterImage, rect: Rect) -> Result<RasterImage> {
    rect.check(img)?;
    let c = img.channels;
    let mut pixels = Vec::with_capacity(rect.width() * rect.height() * c);
    for y in rect.y0..rect.y1 {
        let start = (y * img.width + rect.x0) * c;
        pixels.extend_from_slice(&img.pixels[start..start + rect.width() * c]);
    }
    RasterImage::new(rect.width(), rect.height(), c, pixels)
}

/// A padded image and where the original's top-left corner landed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Padded {
    pub image: RasterImage,
    pub offset_x: usize,
    pub offset_y: usize,
}

/// Centers the image on a `max(w, h)` square canvas filled with `fill`.
pub fn pad_to_square(img: &RasterImage, fill: u8) -> Padded {
    let side = img.width.max(img.height);
    let offset_x = (side - img.width) / 2;
    let offset_y = (side - img.height) / 2;
    let c = img.channels;
    let mut pixels = vec![fill; side * side * c];
    for y in 0..img.height {
        let src = &img.pixels[y * img.width * c..(y + 1) * img.width * c];
        let start = ((y + offset_y) * side + offset_x) * c;
        pixels[start..start + src.len()].copy_from_slice(src);
    }
    Padded {
        image: RasterImage {
            width: side,
            height: side,
            channels: c,
            pixels,
        },
        offset_x,
        offset_y,
    }
}

/// Output of [`preprocess`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preprocessed {
    pub rect: Rect,
    pub image: RasterImage,
    pub offset_x: usize,
    pub offset_y: usize,
}

impl Preprocessed {
    /// Maps a raster coordinate of the input into the square output.
    pub fn remap(&self, x: f64, y: f64) -> (f64, f64) {
        (
            x - self.rect.x0 as f64 + self.offset_x as f64,
            y - self.rect.y0 as f64 + self.offset_y as f64,
        )
    }
}

/// Grayscale, Canny, bounding rectangle of the edges, crop of the gray
/// image to that rectangle, and padding to a square with black.
pub fn preprocess(img: &RasterImage, params: &CannyParams) -> Result<Preprocessed> {
    let gray = to_grayscale(img);
    let edges = canny_with(&gray, params)?;
    let rect = bounding_rect(&edges)?;
    let padded = pad_to_square(&crop(&gray, rect)?, 0);
    Ok(Preprocessed {
        rect,
        image: padded.image,
        offset_x: padded.offset_x,
        offset_y: padded.offset_y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pgm_single_pixel_round_trip() {
        let bytes = b"P5\n1 1\n255\n\x00".to_vec();
        let img = read_image(&bytes).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (1, 1, 1));
        assert_eq!(write_image(&img), bytes);
    }

    #[test]
    fn ppm_round_trip() {
        let mut bytes = b"P6\n3 2\n255\n".to_vec();
        bytes.extend((0..18u8).map(|v| v * 13));
        let img = read_image(&bytes).unwrap();
        assert_eq!(img.channels(), 3);
        assert_eq!(img.pixel(2, 1), &[195, 208, 221]);
        assert_eq!(write_image(&img), bytes);
    }

    #[test]
    fn header_comments_are_accepted() {
        let img = read_image(b"P5 # made by hand\n2 # width\n1\n255\n\x07\x08").unwrap();
        assert_eq!(img.pixels(), &[7, 8]);
    }

    #[test]
    fn malformed_inputs() {
        let mut truncated = b"P5\n4 4\n255\n".to_vec();
        truncated.extend([0u8; 15]);
        let err = read_image(&truncated).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
        assert!(read_image(b"P5\n1 1\n65535\n\x00\x00")
            .unwrap_err()
            .to_string()
            .contains("maxval"));
        assert!(read_image(b"P2\n1 1\n255\n0").is_err());
        assert!(read_image(b"P5\n1\n").is_err());
        assert!(read_image(b"P5\n1 1\n255\n\x00\x00")
            .unwrap_err()
            .to_string()
            .contains("trailing"));
        assert!(read_image(b"P5\n0 1\n255\n").is_err());
    }

    #[test]
    fn luma() {
        let gray =
            |r, g, b| to_grayscale(&RasterImage::new(1, 1, 3, vec![r, g, b]).unwrap()).pixels()[0];
        assert_eq!(gray(255, 0, 0), 76);
        assert_eq!(gray(0, 255, 0), 150);
        assert_eq!(gray(0, 0, 255), 29);
        for v in [0u8, 1, 127, 128, 254, 255] {
            assert_eq!(gray(v, v, v), v);
        }
        let g = RasterImage::from_fn(3, 2, |x, y| (x * 40 + y) as u8).unwrap();
        assert_eq!(to_grayscale(&g), g);
    }

    #[test]
    fn reflect_border_indices() {
        let got: Vec<usize> = (-4..8).map(|i| reflect_index(i, 4)).collect();
        assert_eq!(got, [3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0]);
        assert!((-10..10).all(|i| reflect_index(i, 1) == 0));
    }

    #[test]
    fn smoothing_constant_image() {
        let img = RasterImage::filled(7, 5, 1, 93).unwrap();
        assert_eq!(gaussian_smooth(&img, 1.7).unwrap(), img);
        assert!(gaussian_smooth(&img, 0.0).is_err());
        assert!(gaussian_smooth(&RasterImage::filled(2, 2, 3, 0).unwrap(), 1.0).is_err());
    }

    /// Direct 2D convolution with the outer-product kernel.
    fn convolve_oracle(img: &RasterImage, sigma: f64) -> Vec<f64> {
        let radius = (3.0 * sigma).ceil() as isize;
        let g = |i: isize| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp();
        let norm: f64 = (-radius..=radius).map(g).sum();
        let (w, h) = (img.width() as isize, img.height() as isize);
        let mut out = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for dy in -radius..=radius {
                    for dx in -radius..=radius {
                        let sx = reflect_index(x + dx, w as usize);
                        let sy = reflect_index(y + dy, h as usize);
                        acc += g(dx) * g(dy) / (norm * norm) * img.get(sx, sy, 0) as f64;
                    }
                }
                out.push(acc);
            }
        }
        out
    }

    #[test]
    fn impulse_response_matches_oracle() {
        let img =
            RasterImage::from_fn(15, 15, |x, y| if (x, y) == (7, 7) { 255 } else { 0 }).unwrap();
        let smoothed = gaussian_smooth(&img, 1.0).unwrap();
        let oracle = convolve_oracle(&img, 1.0);
        for (got, want) in smoothed.pixels().iter().zip(&oracle) {
            assert!((*got as f64 - want).abs() <= 0.5 + 1e-9);
        }
        let oracle_mass: f64 = oracle.iter().sum();
        assert!((oracle_mass - 255.0).abs() < 1e-9);
        // peak at the impulse, symmetric under the D4 moves of the grid
        let p = |x, y| smoothed.get(x, y, 0);
        assert_eq!(p(6, 7), p(8, 7));
        assert_eq!(p(7, 6), p(8, 7));
        assert!(p(7, 7) > p(6, 7));
    }

    #[test]
    fn huge_sigma_flattens_and_keeps_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let img = RasterImage::from_fn(4, 3, |_, _| rng.random()).unwrap();
        let smoothed = gaussian_smooth(&img, 50.0).unwrap();
        let mean = |im: &RasterImage| im.pixels().iter().map(|&v| v as f64).sum::<f64>() / 12.0;
        assert!((mean(&smoothed) - mean(&img)).abs() <= 1.0);
        let (lo, hi) = smoothed
            .pixels()
            .iter()
            .fold((255u8, 0u8), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        assert!(hi - lo <= 2, "{lo}..{hi}");
    }

    #[test]
    fn smoothing_preserves_mass_within_rounding() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let (w, h) = (rng.random_range(1..20), rng.random_range(1..20));
            let img = RasterImage::from_fn(w, h, |_, _| rng.random()).unwrap();
            let sigma = rng.random_range(0.3..4.0);
            let s = gaussian_smooth(&img, sigma).unwrap();
            let before: i64 = img.pixels().iter().map(|&v| v as i64).sum();
            let after: i64 = s.pixels().iter().map(|&v| v as i64).sum();
            assert!((before - after).unsigned_abs() as usize <= w * h);
        }
    }

    #[test]
    fn canny_constant_is_empty() {
        let img = RasterImage::filled(12, 9, 1, 200).unwrap();
        let edges = canny_edges(&img, 0.1, 0.3).unwrap();
        assert!(edges.pixels().iter().all(|&v| v == 0));
    }

    #[test]
    fn canny_threshold_order() {
        let img = RasterImage::filled(4, 4, 1, 0).unwrap();
        assert!(canny_edges(&img, 0.3, 0.1).is_err());
        assert!(canny_edges(&img, 0.0, 0.1).is_err());
        assert!(canny_edges(&img, 0.1, 1.5).is_err());
    }

    #[test]
    fn canny_vertical_step() {
        let (w, h) = (16, 12);
        let img = RasterImage::from_fn(w, h, |x, _| if x < w / 2 { 0 } else { 255 }).unwrap();
        let edges = canny_edges(&img, 0.1, 0.3).unwrap();
        let columns: Vec<usize> = (0..w)
            .filter(|&x| (0..h).any(|y| edges.get(x, y, 0) != 0))
            .collect();
        assert_eq!(columns.len(), 1, "{columns:?}");
        let c = columns[0];
        assert!((7..=8).contains(&c));
        for y in 0..h {
            let expected = if y == 0 || y == h - 1 { 0 } else { 255 };
            assert_eq!(edges.get(c, y, 0), expected, "row {y}");
        }

        // brute-force Sobel on the blurred step: the strongest response per
        // interior row sits on the surviving column or its tied neighbour
        let blurred = smooth_f64(&img, 1.4);
        for y in 1..h - 1 {
            let gx = |x: usize| {
                let v = |xx: usize, yy: usize| blurred[yy * w + xx];
                (v(x + 1, y - 1) + 2.0 * v(x + 1, y) + v(x + 1, y + 1))
                    - (v(x - 1, y - 1) + 2.0 * v(x - 1, y) + v(x - 1, y + 1))
            };
            let best = (1..w - 1).map(gx).fold(f64::MIN, f64::max);
            assert!((gx(c) - best).abs() <= 1e-9 * best);
        }
    }

    #[test]
    fn canny_square_contour_is_closed() {
        let n = 24;
        let img = RasterImage::from_fn(n, n, |x, y| {
            if (6..18).contains(&x) && (6..18).contains(&y) {
                255
            } else {
                0
            }
        })
        .unwrap();
        let edges = canny_edges(&img, 0.1, 0.3).unwrap();
        let on = |x: usize, y: usize| edges.get(x, y, 0) != 0;
        // every edge pixel hugs the square boundary
        for y in 0..n {
            for x in 0..n {
                if on(x, y) {
                    let dist_x = (x as isize - 5).abs().min((x as isize - 18).abs());
                    let dist_y = (y as isize - 5).abs().min((y as isize - 18).abs());
                    let near_vertical = dist_x <= 1 && (4..=19).contains(&y);
                    let near_horizontal = dist_y <= 1 && (4..=19).contains(&x);
                    assert!(near_vertical || near_horizontal, "stray edge at ({x},{y})");
                }
            }
        }
        // every row and column crossing the square meets the contour twice
        for t in 7..17 {
            assert!(
                (4..8).any(|x| on(x, t)) && (16..20).any(|x| on(x, t)),
                "row {t}"
            );
            assert!(
                (4..8).any(|y| on(t, y)) && (16..20).any(|y| on(t, y)),
                "col {t}"
            );
        }
        // single 8-connected component
        let pixels: Vec<(usize, usize)> = (0..n)
            .flat_map(|y| (0..n).map(move |x| (x, y)))
            .filter(|&(x, y)| on(x, y))
            .collect();
        let mut seen = vec![false; n * n];
        let mut stack = vec![pixels[0]];
        seen[pixels[0].1 * n + pixels[0].0] = true;
        let mut reached = 0;
        while let Some((x, y)) = stack.pop() {
            reached += 1;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || ny < 0 || nx >= n as isize || ny >= n as isize {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    if on(nx, ny) && !seen[ny * n + nx] {
                        seen[ny * n + nx] = true;
                        stack.push((nx, ny));
                    }
                }
            }
        }
        assert_eq!(reached, pixels.len());
    }

    #[test]
    fn bounding_rects() {
        let mut img = RasterImage::filled(10, 10, 1, 0).unwrap();
        img.set(3, 7, 0, 255);
        assert_eq!(
            bounding_rect(&img).unwrap(),
            Rect {
                x0: 3,
                y0: 7,
                x1: 4,
                y1: 8
            }
        );
        img.set(0, 0, 0, 1);
        img.set(9, 9, 0, 1);
        assert_eq!(
            bounding_rect(&img).unwrap(),
            Rect {
                x0: 0,
                y0: 0,
                x1: 10,
                y1: 10
            }
        );
        assert_eq!(
            bounding_rect(&RasterImage::filled(3, 3, 1, 0).unwrap()),
            Err(Error::EmptyEdgeMap)
        );
    }

    #[test]
    fn cropping_and_padding() {
        let img = RasterImage::from_fn(4, 4, |x, y| (y * 4 + x) as u8).unwrap();
        let full = Rect {
            x0: 0,
            y0: 0,
            x1: 4,
            y1: 4,
        };
        assert_eq!(crop(&img, full).unwrap(), img);
        let c = crop(
            &img,
            Rect {
                x0: 1,
                y0: 2,
                x1: 3,
                y1: 4,
            },
        )
        .unwrap();
        assert_eq!(c.pixels(), &[9, 10, 13, 14]);
        assert!(crop(
            &img,
            Rect {
                x0: 2,
                y0: 0,
                x1: 5,
                y1: 1
            }
        )
        .is_err());
        assert!(crop(
            &img,
            Rect {
                x0: 2,
                y0: 0,
                x1: 2,
                y1: 1
            }
        )
        .is_err());

        let narrow = RasterImage::filled(3, 5, 1, 9).unwrap();
        let padded = pad_to_square(&narrow, 0);
        assert_eq!((padded.image.width(), padded.image.height()), (5, 5));
        assert_eq!((padded.offset_x, padded.offset_y), (1, 0));
        for y in 0..5 {
            assert_eq!(padded.image.get(0, y, 0), 0);
            assert_eq!(padded.image.get(4, y, 0), 0);
            assert!((1..4).all(|x| padded.image.get(x, y, 0) == 9));
        }
    }

    #[test]
    fn preprocess_finds_the_bright_block() {
        let img = RasterImage::from_fn(30, 20, |x, y| {
            if (8..20).contains(&x) && (5..15).contains(&y) {
                220
            } else {
                10
            }
        })
        .unwrap();
        let out = preprocess(&img, &CannyParams::default()).unwrap();
        assert!(out.image.is_square());
        let r = out.rect;
        assert!(r.x0 >= 6 && r.x0 <= 9 && r.x1 >= 19 && r.x1 <= 22, "{r:?}");
        assert!(r.y0 >= 3 && r.y0 <= 6 && r.y1 >= 14 && r.y1 <= 17, "{r:?}");
        assert_eq!(
            out.remap(r.x0 as f64, r.y0 as f64),
            (out.offset_x as f64, out.offset_y as f64)
        );
    }
}
