//! Dataset ingestion: IDX image/label pairs, CSV, and seeded synthetic sets.
//!
//! Inputs always land in `[0, 1]` and targets are exact one-hot vectors.
//!
//! Synthetic sets draw from a ChaCha8 stream (`rand_chacha`) seeded with
//! `seed_from_u64(seed)`. For every sample `i` in order, the x jitter is
//! drawn before the y jitter, each uniform on `[-noise, noise]` via
//! `random_range`. Only integer and basic float arithmetic is involved, so
//! the bytes are the same on every platform.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backprop::LabeledSample;
use crate::error::{Error, Result};
use crate::tensor::Vector;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
pub const DIGIT_CLASSES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
    pub input_dim: usize,
    pub num_classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(LabeledSample::label).collect()
    }

    fn from_rows(rows: Vec<(Vec<f64>, usize)>, input_dim: usize, num_classes: usize) -> Result<Self> {
        let samples = rows
            .into_iter()
            .map(|(x, label)| Ok(LabeledSample::new(Vector::new(x), one_hot(label, num_classes)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            samples,
            input_dim,
            num_classes,
        })
    }
}

/// 1.0 at `label`, 0.0 elsewhere.
pub fn one_hot(label: usize, num_classes: usize) -> Result<Vector> {
    if label >= num_classes {
        return Err(Error::LabelOutOfRange { label, num_classes });
    }
    let mut v = Vector::zeros(num_classes);
    v[label] = 1.0;
    Ok(v)
}

/// Raw contents of an IDX image file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// `count * rows * cols` bytes, image after image, row-major.
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn count(&self) -> usize {
        self.pixels.len() / (self.rows * self.cols).max(1)
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.rows * self.cols;
        &self.pixels[i * n..(i + 1) * n]
    }
}

fn read_u32(bytes: &[u8], at: usize, file: &'static str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or(Error::IdxTruncated {
            file,
            expected: at + 4,
            found: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32, file: &'static str) -> Result<()> {
    let found = read_u32(bytes, 0, file)?;
    if found != expected {
        return Err(Error::IdxBadMagic {
            file,
            expected,
            found,
        });
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    const FILE: &str = "images";
    check_magic(bytes, IDX_IMAGES_MAGIC, FILE)?;
    let count = read_u32(bytes, 4, FILE)? as usize;
    let rows = read_u32(bytes, 8, FILE)? as usize;
    let cols = read_u32(bytes, 12, FILE)? as usize;
    let payload = count * rows * cols;
    let body = &bytes[16..];
    if body.len() < payload {
        return Err(Error::IdxTruncated {
            file: FILE,
            expected: 16 + payload,
            found: bytes.len(),
        });
    }
    Ok(IdxImages {
        rows,
        cols,
        pixels: body[..payload].to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    const FILE: &str = "labels";
    check_magic(bytes, IDX_LABELS_MAGIC, FILE)?;
    let count = read_u32(bytes, 4, FILE)? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(Error::IdxTruncated {
            file: FILE,
            expected: 8 + count,
            found: bytes.len(),
        });
    }
    Ok(body[..count].to_vec())
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.count() as u32).to_be_bytes());
    out.extend_from_slice(&(images.rows as u32).to_be_bytes());
    out.extend_from_slice(&(images.cols as u32).to_be_bytes());
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Pixels scaled by 1/255, labels one-hot over `num_classes`.
pub fn dataset_from_idx(images: &IdxImages, labels: &[u8], num_classes: usize) -> Result<Dataset> {
    if images.count() != labels.len() {
        return Err(Error::IdxCountMismatch {
            images: images.count(),
            labels: labels.len(),
        });
    }
    let rows = (0..labels.len())
        .map(|i| {
            let x = images.image(i).iter().map(|&p| p as f64 / 255.0).collect();
            (x, labels[i] as usize)
        })
        .collect();
    Dataset::from_rows(rows, images.rows * images.cols, num_classes)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn load_idx(images: &Path, labels: &Path) -> Result<Dataset> {
    load_idx_with_classes(images, labels, DIGIT_CLASSES)
}

pub fn load_idx_with_classes(images: &Path, labels: &Path, num_classes: usize) -> Result<Dataset> {
    let imgs = parse_idx_images(&read_file(images)?)?;
    let labs = parse_idx_labels(&read_file(labels)?)?;
    dataset_from_idx(&imgs, &labs, num_classes)
}

pub fn write_idx(images: &IdxImages, labels: &[u8], images_path: &Path, labels_path: &Path) -> Result<()> {
    std::fs::write(images_path, encode_idx_images(images)).map_err(|e| Error::io(images_path, e))?;
    std::fs::write(labels_path, encode_idx_labels(labels)).map_err(|e| Error::io(labels_path, e))
}

/// Reads `label,feature1,...,featureN` rows. When any feature exceeds 1,
/// all features are divided by the largest absolute value in the file.
/// `num_classes` defaults to the largest label plus one.
pub fn load_csv(path: &Path, num_classes: Option<usize>) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, num_classes)
}

pub fn read_csv(reader: impl std::io::Read, num_classes: Option<usize>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut rows: Vec<(Vec<f64>, usize)> = Vec::new();
    let mut width: Option<usize> = None;
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected || expected < 2 {
            return Err(Error::CsvRagged {
                line,
                expected: expected.max(2),
                found: record.len(),
            });
        }
        let label = record[0].parse::<usize>().map_err(|_| Error::CsvNonNumeric {
            line,
            field: record[0].to_owned(),
        })?;
        let features = record
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::CsvNonNumeric {
                        line,
                        field: f.to_owned(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((features, label));
        lines.push(line);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let max_abs = rows
        .iter()
        .flat_map(|(x, _)| x.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let needs_scaling = rows.iter().flat_map(|(x, _)| x.iter()).any(|&x| x > 1.0);
    for ((x, _), &line) in rows.iter_mut().zip(&lines) {
        if let Some(&value) = x.iter().find(|&&v| v < 0.0) {
            return Err(Error::CsvNegativeFeature { line, value });
        }
        if needs_scaling {
            x.iter_mut().for_each(|v| *v /= max_abs);
        }
    }

    let classes = num_classes.unwrap_or_else(|| rows.iter().map(|r| r.1).max().unwrap() + 1);
    let input_dim = width.unwrap() - 1;
    Dataset::from_rows(rows, input_dim, classes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// Points around (0.25, 0.25) (class 0) and (0.75, 0.75) (class 1).
    TwoClusters,
    /// The unit-square corners, labelled by coordinate parity.
    Xor,
}

impl SynthKind {
    pub fn name(self) -> &'static str {
        match self {
            SynthKind::TwoClusters => "two-clusters",
            SynthKind::Xor => "xor",
        }
    }

    pub fn default_noise(self) -> f64 {
        match self {
            SynthKind::TwoClusters => 0.08,
            SynthKind::Xor => 0.05,
        }
    }
}

impl FromStr for SynthKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-clusters" => Ok(SynthKind::TwoClusters),
            "xor" => Ok(SynthKind::Xor),
            other => Err(Error::UnknownDataSource(other.to_owned())),
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn synth(kind: SynthKind, n: usize, seed: u64) -> Result<Dataset> {
    synth_with_noise(kind, n, seed, kind.default_noise())
}

/// Sample `i` belongs to cluster `i % 2` (two-clusters) or corner `i % 4`
/// (xor); coordinates are jittered uniformly by up to `noise` and clamped
/// into `[0, 1]`.
pub fn synth_with_noise(kind: SynthKind, n: usize, seed: u64, noise: f64) -> Result<Dataset> {
    if n < 4 {
        return Err(Error::InvalidConfig(format!(
            "synthetic datasets need at least 4 samples, got {n}"
        )));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::InvalidConfig(format!("noise must be >= 0, got {noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jitter = |c: f64| {
        let d = if noise > 0.0 {
            rng.random_range(-noise..=noise)
        } else {
            0.0
        };
        (c + d).clamp(0.0, 1.0)
    };
    let rows = (0..n)
        .map(|i| match kind {
            SynthKind::TwoClusters => {
                let label = i % 2;
                let c = if label == 0 { 0.25 } else { 0.75 };
                let x = jitter(c);
                let y = jitter(c);
                (vec![x, y], label)
            }
            SynthKind::Xor => {
                let corner = i % 4;
                let (cx, cy) = ((corner >> 1) as f64, (corner & 1) as f64);
                let x = jitter(cx);
                let y = jitter(cy);
                (vec![x, y], (corner >> 1) ^ (corner & 1))
            }
        })
        .collect();
    Dataset::from_rows(rows, 2, 2)
}

/// Where a dataset comes from, as written on the command line:
/// `idx:<images>,<labels>`, `csv:<path>`, or
/// `synth:<kind>:<n>[:seed=<s>][:noise=<x>]`.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Idx { images: PathBuf, labels: PathBuf },
    Csv { path: PathBuf },
    Synth { kind: SynthKind, n: usize, seed: u64, noise: f64 },
}

impl FromStr for DataSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownDataSource(s.to_owned());
        let (scheme, rest) = s.split_once(':').ok_or_else(bad)?;
        match scheme {
            "idx" => {
                let (images, labels) = rest.split_once(',').ok_or_else(bad)?;
                Ok(DataSource::Idx {
                    images: images.into(),
                    labels: labels.into(),
                })
            }
            "csv" if !rest.is_empty() => Ok(DataSource::Csv { path: rest.into() }),
            "synth" => {
                let mut parts = rest.split(':');
                let kind: SynthKind = parts.next().ok_or_else(bad)?.parse()?;
                let n = parts
                    .next()
                    .and_then(|p| p.parse().ok())
                    .ok_or_else(bad)?;
                let mut seed = 0;
                let mut noise = kind.default_noise();
                for opt in parts {
                    match opt.split_once('=') {
                        Some(("seed", v)) => seed = v.parse().map_err(|_| bad())?,
                        Some(("noise", v)) => noise = v.parse().map_err(|_| bad())?,
                        _ => return Err(bad()),
                    }
                }
                Ok(DataSource::Synth { kind, n, seed, noise })
            }
            _ => Err(bad()),
        }
    }
}

impl DataSource {
    /// `num_classes` applies to IDX (default 10) and CSV (default inferred).
    pub fn load(&self, num_classes: Option<usize>) -> Result<Dataset> {
        match self {
            DataSource::Idx { images, labels } => {
                load_idx_with_classes(images, labels, num_classes.unwrap_or(DIGIT_CLASSES))
            }
            DataSource::Csv { path } => load_csv(path, num_classes),
            DataSource::Synth { kind, n, seed, noise } => synth_with_noise(*kind, *n, *seed, *noise),
        }
    }
}
