//! Greyscale images of space-time configurations.
//!
//! Rows are time steps, columns are sites. Excited cells are black (0),
//! resting cells white (255).

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::state::{Chain, SpaceTimeRecord};

pub const BLACK: u8 = 0;
pub const WHITE: u8 = 255;

/// A row-major 8-bit image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn pixel(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Binary PGM (P5, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<GrayImage> {
        let bad = |msg: &str| Error::Malformed { path: "<pgm>".into(), msg: msg.into() };
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header is not ASCII"))?);
        }
        if fields[0] != "P5" || fields[3] != "255" {
            return Err(bad("expected P5 with maxval 255"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad dimension"));
        let (width, height) = (num(fields[1])?, num(fields[2])?);
        let pixels = bytes.get(pos + 1..).ok_or_else(|| bad("missing raster"))?.to_vec();
        if pixels.len() != width * height {
            return Err(bad("raster size does not match header"));
        }
        Ok(GrayImage { width, height, pixels })
    }
}

fn shade(excited: bool) -> u8 {
    if excited {
        BLACK
    } else {
        WHITE
    }
}

/// `(tau+1) × n` image of one chain.
pub fn render_chain(record: &SpaceTimeRecord, chain: Chain) -> GrayImage {
    let pixels = record
        .rows(chain)
        .iter()
        .flat_map(|row| row.cells().iter().map(|&c| shade(c == 1)))
        .collect();
    GrayImage { width: record.n, height: record.tau + 1, pixels }
}

/// Black where the two chains disagree.
pub fn render_incoherence(record: &SpaceTimeRecord) -> GrayImage {
    let pixels = record
        .rows(Chain::X)
        .iter()
        .zip(record.rows(Chain::Y))
        .flat_map(|(x, y)| x.cells().iter().zip(y.cells()).map(|(a, b)| shade(a != b)))
        .collect();
    GrayImage { width: record.n, height: record.tau + 1, pixels }
}

/// What to draw for a rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layer {
    Chain(Chain),
    Incoherence,
}

impl Layer {
    pub fn name(self) -> &'static str {
        match self {
            Layer::Chain(c) => c.name(),
            Layer::Incoherence => "xor",
        }
    }

    pub fn render(self, record: &SpaceTimeRecord) -> GrayImage {
        match self {
            Layer::Chain(c) => render_chain(record, c),
            Layer::Incoherence => render_incoherence(record),
        }
    }
}

impl std::str::FromStr for Layer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xor" | "incoherence" => Ok(Layer::Incoherence),
            other => other.parse().map(Layer::Chain),
        }
    }
}

/// `rule_<c0>_<c1>_<layer>.pgm`
pub fn image_file_name(record: &SpaceTimeRecord, layer: Layer) -> String {
    format!("rule_{}_{}_{}.pgm", record.rule.code0(), record.rule.code1(), layer.name())
}

pub fn write_pgm(image: &GrayImage, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&image.to_pgm())?;
    f.flush()?;
    Ok(())
}

/// Renders `layer` into `dir` under its conventional name and returns the path.
pub fn write_layer(record: &SpaceTimeRecord, layer: Layer, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(image_file_name(record, layer));
    write_pgm(&layer.render(record), &path)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::Rule;
    use crate::state::ChainState;

    fn rec() -> SpaceTimeRecord {
        let p = |rows: &[&str]| rows.iter().map(|r| r.parse::<ChainState>().unwrap()).collect();
        SpaceTimeRecord::from_rows(Rule::decode(7, 20).unwrap(), p(&["1000", "0110"]), p(&["1001", "0000"])).unwrap()
    }

    #[test]
    fn chain_pixels() {
        let img = render_chain(&rec(), Chain::X);
        assert_eq!((img.width, img.height), (4, 2));
        assert_eq!(img.pixels, vec![0, 255, 255, 255, 255, 0, 0, 255]);
        let xor = render_incoherence(&rec());
        assert_eq!(xor.pixels, vec![255, 255, 255, 0, 255, 0, 0, 255]);
    }

    #[test]
    fn pgm_roundtrip_and_header() {
        let img = render_chain(&rec(), Chain::Y);
        let bytes = img.to_pgm();
        assert!(bytes.starts_with(b"P5\n4 2\n255\n"));
        assert_eq!(bytes.len(), 11 + 8);
        assert_eq!(GrayImage::from_pgm(&bytes).unwrap(), img);
        assert!(GrayImage::from_pgm(b"P2\n1 1\n255\n\x00").is_err());
        assert!(GrayImage::from_pgm(b"P5\n2 2\n255\n\x00").is_err());
    }

    #[test]
    fn file_names() {
        assert_eq!(image_file_name(&rec(), Layer::Chain(Chain::X)), "rule_7_20_x.pgm");
        assert_eq!(image_file_name(&rec(), "xor".parse().unwrap()), "rule_7_20_xor.pgm");
    }
}
