//! Pattern storage for the ADC driver.
//!
//! A `.crsp` image is a 16-byte big-endian header followed by the pattern's
//! grid indices at a fixed width of `ceil(log2(k_grid) / 8)` bytes each:
//!
//! | offset | size | field                      |
//! |--------|------|----------------------------|
//! | 0      | 4    | magic `CRSP`               |
//! | 4      | 1    | format version (1)         |
//! | 5      | 1    | bytes per index            |
//! | 6      | 2    | reserved, zero             |
//! | 8      | 4    | `k_grid`                   |
//! | 12     | 4    | number of indices          |
//!
//! Several images form an archive by prefixing each with its byte length as a
//! big-endian `u32`.

use serde::Serialize;
use thiserror::Error;

use crate::config::SamplingConfig;
use crate::evaluation::{MetricAccumulator, UniqueTracking};
use crate::generators::{params_for, Generator, GeneratorKind};
use crate::pattern::{validate_pattern, Pattern};

pub const MAGIC: [u8; 4] = *b"CRSP";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RomError {
    #[error("image shorter than its {HEADER_LEN}-byte header ({0} bytes)")]
    TruncatedHeader(usize),
    #[error("bad magic {0:02x?}; not a CRSP image")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("declared index width {declared} does not match {expected} for k_grid {k_grid}")]
    WidthMismatch { declared: u8, expected: u8, k_grid: u32 },
    #[error("payload truncated: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("{0} unexpected bytes after payload")]
    TrailingBytes(usize),
    #[error("non-monotonic indices at position {pos}: {prev} then {next}")]
    NonMonotonic { pos: usize, prev: u32, next: u32 },
    #[error("index {index} at position {pos} outside grid 1..={k_grid}")]
    OutOfRange { pos: usize, index: u32, k_grid: u32 },
    #[error("grid of {0} points is too small for a ROM image (need at least 2)")]
    GridTooSmall(u32),
    #[error("index {index} does not fit {width} byte(s)")]
    IndexNotRepresentable { index: u32, width: u8 },
    #[error("clock divider must be at least 1")]
    ZeroClockDivider,
    #[error("archive truncated at byte {0}")]
    TruncatedArchive(usize),
}

/// Bytes per stored index, `ceil(log2(k_grid) / 8)`.
pub fn index_width(k_grid: u32) -> u8 {
    if k_grid < 2 {
        return 0;
    }
    let bits = 32 - (k_grid - 1).leading_zeros();
    bits.div_ceil(8) as u8
}

/// Bytes needed to store `k_s` indices on a grid of `k_grid` points.
pub fn memory_footprint(k_s: u64, k_grid: u32) -> u64 {
    k_s * index_width(k_grid) as u64
}

/// One pattern in its stored form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RomImage {
    width: u8,
    k_grid: u32,
    count: u32,
    payload: Vec<u8>,
}

impl RomImage {
    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn k_grid(&self) -> u32 {
        self.k_grid
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Raw stored value at position `i`.
    pub fn index(&self, i: usize) -> u32 {
        let w = self.width as usize;
        self.payload[i * w..(i + 1) * w].iter().fold(0u32, |acc, &b| (acc << 8) | b as u32)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        out.push(self.width);
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&self.k_grid.to_be_bytes());
        out.extend_from_slice(&self.count.to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses the header and checks the payload length. Index order is
    /// checked by [`decode_rom`].
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, RomError> {
        if bytes.len() < HEADER_LEN {
            return Err(RomError::TruncatedHeader(bytes.len()));
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(RomError::BadMagic(magic));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(RomError::UnsupportedVersion(bytes[4]));
        }
        let width = bytes[5];
        let k_grid = u32::from_be_bytes(bytes[8..12].try_into().unwrap());
        let count = u32::from_be_bytes(bytes[12..16].try_into().unwrap());
        if k_grid < 2 {
            return Err(RomError::GridTooSmall(k_grid));
        }
        let expected_width = index_width(k_grid);
        if width != expected_width {
            return Err(RomError::WidthMismatch { declared: width, expected: expected_width, k_grid });
        }
        let expected = count as usize * width as usize;
        let found = bytes.len() - HEADER_LEN;
        if found < expected {
            return Err(RomError::TruncatedPayload { expected, found });
        }
        if found > expected {
            return Err(RomError::TrailingBytes(found - expected));
        }
        Ok(RomImage { width, k_grid, count, payload: bytes[HEADER_LEN..].to_vec() })
    }
}

/// Stores a pattern. Indices are written as-is (1-based), big-endian.
///
/// When `k_grid` is an exact power of 256 the last grid index needs one more
/// byte than the footprint formula grants; such patterns are rejected.
pub fn encode_rom(p: &Pattern) -> Result<RomImage, RomError> {
    let k_grid = p.k_grid();
    if k_grid < 2 {
        return Err(RomError::GridTooSmall(k_grid));
    }
    let width = index_width(k_grid);
    let limit = if width >= 4 { u32::MAX as u64 } else { (1u64 << (8 * width as u32)) - 1 };
    let mut payload = Vec::with_capacity(p.len() * width as usize);
    for &index in p.indices() {
        if index as u64 > limit {
            return Err(RomError::IndexNotRepresentable { index, width });
        }
        payload.extend_from_slice(&index.to_be_bytes()[4 - width as usize..]);
    }
    Ok(RomImage { width, k_grid, count: p.len() as u32, payload })
}

/// Recovers the pattern, rejecting zero, out-of-grid and non-increasing
/// indices. The image does not carry the grid period, so it is supplied.
pub fn decode_rom(img: &RomImage, t_grid: f64) -> Result<Pattern, RomError> {
    check_indices(img)?;
    let indices = (0..img.count as usize).map(|i| img.index(i)).collect();
    Ok(Pattern::from_raw(indices, img.k_grid, t_grid))
}

fn check_indices(img: &RomImage) -> Result<(), RomError> {
    let expected = img.count as usize * img.width as usize;
    if img.payload.len() != expected {
        return Err(RomError::TruncatedPayload { expected, found: img.payload.len() });
    }
    let mut prev = 0u32;
    for pos in 0..img.count as usize {
        let index = img.index(pos);
        if index == 0 || index > img.k_grid {
            return Err(RomError::OutOfRange { pos, index, k_grid: img.k_grid });
        }
        if pos > 0 && index <= prev {
            return Err(RomError::NonMonotonic { pos, prev, next: index });
        }
        prev = index;
    }
    Ok(())
}

/// Length-prefixed concatenation of images.
pub fn write_archive<'a, I: IntoIterator<Item = &'a RomImage>>(images: I) -> Vec<u8> {
    let mut out = Vec::new();
    for img in images {
        let bytes = img.to_bytes();
        out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
        out.extend_from_slice(&bytes);
    }
    out
}

pub fn read_archive(bytes: &[u8]) -> Result<Vec<RomImage>, RomError> {
    let mut images = Vec::new();
    let mut at = 0usize;
    while at < bytes.len() {
        if bytes.len() - at < 4 {
            return Err(RomError::TruncatedArchive(at));
        }
        let len = u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        at += 4;
        if bytes.len() - at < len {
            return Err(RomError::TruncatedArchive(at));
        }
        images.push(RomImage::from_bytes(&bytes[at..at + len])?);
        at += len;
    }
    Ok(images)
}

/// Reads either a single image or an archive, telling them apart by the
/// leading magic.
pub fn read_images(bytes: &[u8]) -> Result<Vec<RomImage>, RomError> {
    if bytes.starts_with(&MAGIC) {
        Ok(vec![RomImage::from_bytes(bytes)?])
    } else {
        read_archive(bytes)
    }
}

/// Input-clock cycles at which the driver asserted "sample now".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TriggerTrace {
    pub events: Vec<u64>,
}

/// Cycle-level model of the trigger logic: a prescaler divides the input
/// clock by `clock_div` to advance a grid counter, and whenever the counter
/// equals the index fetched from the ROM the driver fires and fetches the
/// next index. Cycles are numbered from 1.
pub fn simulate_driver(img: &RomImage, clock_div: u32) -> Result<TriggerTrace, RomError> {
    if clock_div == 0 {
        return Err(RomError::ZeroClockDivider);
    }
    check_indices(img)?;
    let count = img.count as usize;
    let mut events = Vec::with_capacity(count);
    if count == 0 {
        return Ok(TriggerTrace { events });
    }
    let mut ptr = 0usize;
    let mut target = img.index(0);
    let mut prescaler = 0u32;
    let mut grid_counter = 0u32;
    let mut cycle = 0u64;
    while ptr < count {
        cycle += 1;
        prescaler += 1;
        if prescaler < clock_div {
            continue;
        }
        prescaler = 0;
        grid_counter += 1;
        if grid_counter == target {
            events.push(cycle);
            ptr += 1;
            if ptr < count {
                target = img.index(ptr);
            }
        }
    }
    Ok(TriggerTrace { events })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryPoint {
    pub bytes: u64,
    pub patterns: u64,
    pub e_p: Option<f64>,
}

/// Uniformity of grid usage against ROM size: for each budget, `e_p` over
/// the first `budget / n_m` patterns of one bag.
pub fn memory_study(
    kind: GeneratorKind,
    cfg: &SamplingConfig,
    budgets: &[u64],
    seed: u64,
) -> Result<Vec<MemoryPoint>, crate::Error> {
    let d = params_for(kind, cfg)?;
    let generator = Generator::prepare(kind, &d, cfg.sigma2)?;
    let per_pattern = memory_footprint(d.k_req as u64, d.k_grid).max(1);
    let mut sorted: Vec<u64> = budgets.to_vec();
    sorted.sort_unstable();
    let mut acc = MetricAccumulator::new(&d).with_tracking(UniqueTracking::Off);
    let mut out = Vec::with_capacity(sorted.len());
    let mut generated = 0u64;
    for bytes in sorted {
        let patterns = bytes / per_pattern;
        while generated < patterns {
            let p = generator.generate_nth(seed, generated);
            acc.accumulate(&p, &validate_pattern(&p, &d))?;
            generated += 1;
        }
        let e_p = if patterns == 0 { None } else { acc.finalize()?.e_p };
        out.push(MemoryPoint { bytes, patterns, e_p });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(idx: Vec<u32>, k_grid: u32) -> Pattern {
        Pattern::new(idx, k_grid, 1e-6).unwrap()
    }

    #[test]
    fn footprint_by_hand() {
        assert_eq!(memory_footprint(50, 1000), 100);
        assert_eq!(memory_footprint(100, 256), 100);
        assert_eq!(memory_footprint(0, 1000), 0);
        assert_eq!(memory_footprint(10, 257), 20);
        assert_eq!(memory_footprint(10, 65_536), 20);
        assert_eq!(memory_footprint(10, 65_537), 30);
        assert_eq!(memory_footprint(1, 2), 1);
    }

    #[test]
    fn encodes_big_endian_fixed_width() {
        let img = encode_rom(&pat(vec![3, 7], 1000)).unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.payload(), &[0x00, 0x03, 0x00, 0x07]);
        let bytes = img.to_bytes();
        assert_eq!(&bytes[..16], &[b'C', b'R', b'S', b'P', 1, 2, 0, 0, 0, 0, 0x03, 0xE8, 0, 0, 0, 2]);
        assert_eq!(bytes.len(), HEADER_LEN + memory_footprint(2, 1000) as usize);
        assert_eq!(decode_rom(&RomImage::from_bytes(&bytes).unwrap(), 1e-6).unwrap(), pat(vec![3, 7], 1000));
    }

    #[test]
    fn decode_errors_are_distinct() {
        let good = encode_rom(&pat(vec![3, 7], 1000)).unwrap().to_bytes();

        let mut desc = good.clone();
        desc[HEADER_LEN + 1] = 9; // 9 then 7
        let img = RomImage::from_bytes(&desc).unwrap();
        assert_eq!(decode_rom(&img, 1.0), Err(RomError::NonMonotonic { pos: 1, prev: 9, next: 7 }));

        let mut far = good.clone();
        far[HEADER_LEN + 2] = 0x04; // 0x0407 = 1031 > 1000
        let img = RomImage::from_bytes(&far).unwrap();
        assert!(matches!(decode_rom(&img, 1.0), Err(RomError::OutOfRange { pos: 1, index: 1031, .. })));

        let mut zero = good.clone();
        zero[HEADER_LEN + 1] = 0;
        assert!(matches!(decode_rom(&RomImage::from_bytes(&zero).unwrap(), 1.0), Err(RomError::OutOfRange { pos: 0, .. })));

        assert_eq!(RomImage::from_bytes(&good[..19]), Err(RomError::TruncatedPayload { expected: 4, found: 3 }));
        assert_eq!(RomImage::from_bytes(&good[..10]), Err(RomError::TruncatedHeader(10)));
        let mut long = good.clone();
        long.push(0);
        assert_eq!(RomImage::from_bytes(&long), Err(RomError::TrailingBytes(1)));
        let mut magic = good.clone();
        magic[0] = b'X';
        assert!(matches!(RomImage::from_bytes(&magic), Err(RomError::BadMagic(_))));
        let mut version = good.clone();
        version[4] = 2;
        assert_eq!(RomImage::from_bytes(&version), Err(RomError::UnsupportedVersion(2)));
        let mut width = good;
        width[5] = 3;
        assert!(matches!(RomImage::from_bytes(&width), Err(RomError::WidthMismatch { declared: 3, expected: 2, .. })));
    }

    #[test]
    fn power_of_256_edge() {
        assert!(encode_rom(&pat(vec![1, 255], 256)).is_ok());
        assert_eq!(
            encode_rom(&pat(vec![1, 256], 256)),
            Err(RomError::IndexNotRepresentable { index: 256, width: 1 })
        );
        assert_eq!(encode_rom(&pat(vec![1], 1)), Err(RomError::GridTooSmall(1)));
    }

    #[test]
    fn archive_round_trip() {
        let imgs = vec![encode_rom(&pat(vec![3, 7], 1000)).unwrap(), encode_rom(&pat(vec![1, 2, 300], 300)).unwrap()];
        let bytes = write_archive(&imgs);
        assert_eq!(read_images(&bytes).unwrap(), imgs);
        assert_eq!(read_archive(&bytes[..bytes.len() - 1]), Err(RomError::TruncatedArchive(28)));
        let single = imgs[0].to_bytes();
        assert_eq!(read_images(&single).unwrap(), vec![imgs[0].clone()]);
    }

    #[test]
    fn driver_trace_by_hand() {
        let img = encode_rom(&pat(vec![3, 7], 1000)).unwrap();
        assert_eq!(simulate_driver(&img, 8).unwrap().events, vec![24, 56]);
        assert_eq!(simulate_driver(&img, 1).unwrap().events, vec![3, 7]);
        assert_eq!(simulate_driver(&img, 0), Err(RomError::ZeroClockDivider));
        let empty = encode_rom(&pat(vec![], 1000)).unwrap();
        assert!(simulate_driver(&empty, 8).unwrap().events.is_empty());
    }

    #[test]
    fn memory_study_shape() {
        let cfg = SamplingConfig::new(1e-3, 1e-6, 1e5).with_t_min(5e-6).with_sigma2(1e-2);
        let pts = memory_study(GeneratorKind::Angie, &cfg, &[100, 200, 2000], 1).unwrap();
        assert_eq!(pts.iter().map(|p| p.patterns).collect::<Vec<_>>(), vec![0, 1, 10]);
        assert_eq!(pts[0].e_p, None);
    }
}
