//! Text and binary sparse-vector files.
//!
//! Text: one record per line, `<ext_id> <coord>:<value> <coord>:<value> ...`
//! separated by single spaces, values in shortest round-trip decimal form.
//!
//! Binary (`SPVEC1`): the 8 magic bytes `SPVEC1\0\0`, a little-endian `u64`
//! record count, then per record a `u64` ext id, a `u32` entry count and that
//! many `(u32 coord, f32 value)` pairs, all little-endian.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::vector::SparseVector;

pub const BINARY_MAGIC: [u8; 8] = *b"SPVEC1\0\0";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorFormat {
    Text,
    Binary,
}

impl std::str::FromStr for VectorFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "text" => Ok(VectorFormat::Text),
            "binary" => Ok(VectorFormat::Binary),
            other => Err(format!("unknown vector format `{other}` (expected text|binary)")),
        }
    }
}

/// Where in a file a problem was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Header,
    /// 1-based line number of a text file.
    Line(u64),
    /// 0-based record number of a binary file.
    Record(u64),
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Header => write!(f, "header"),
            Position::Line(n) => write!(f, "line {n}"),
            Position::Record(n) => write!(f, "record {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FormatErrorKind {
    DuplicateCoordinate(u32),
    UnsortedCoordinates { prev: u32, next: u32 },
    NonFiniteValue { coord: u32 },
    ZeroValue { coord: u32 },
    Truncated,
    BadMagic,
    Malformed(String),
}

impl fmt::Display for FormatErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatErrorKind::DuplicateCoordinate(c) => write!(f, "duplicate coordinate {c}"),
            FormatErrorKind::UnsortedCoordinates { prev, next } => {
                write!(f, "coordinates not increasing ({prev} then {next})")
            }
            FormatErrorKind::NonFiniteValue { coord } => write!(f, "non-finite value at coordinate {coord}"),
            FormatErrorKind::ZeroValue { coord } => write!(f, "zero value at coordinate {coord}"),
            FormatErrorKind::Truncated => write!(f, "truncated record"),
            FormatErrorKind::BadMagic => write!(f, "bad magic bytes"),
            FormatErrorKind::Malformed(msg) => write!(f, "{msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{position}: {kind}")]
pub struct FormatError {
    pub position: Position,
    pub kind: FormatErrorKind,
}

fn fail<T>(position: Position, kind: FormatErrorKind) -> Result<T> {
    Err(Error::Format(FormatError { position, kind }))
}

fn validate(position: Position, ext_id: u64, coords: Vec<u32>, values: Vec<f32>) -> Result<SparseVector> {
    for w in coords.windows(2) {
        if w[0] == w[1] {
            return fail(position, FormatErrorKind::DuplicateCoordinate(w[0]));
        }
        if w[0] > w[1] {
            return fail(position, FormatErrorKind::UnsortedCoordinates { prev: w[0], next: w[1] });
        }
    }
    for (&coord, &v) in coords.iter().zip(&values) {
        if !v.is_finite() {
            return fail(position, FormatErrorKind::NonFiniteValue { coord });
        }
        if v == 0.0 {
            return fail(position, FormatErrorKind::ZeroValue { coord });
        }
    }
    SparseVector::new(ext_id, coords, values)
}

/// Streaming reader for the text format.
pub struct TextReader<R> {
    lines: io::Lines<R>,
    line_no: u64,
}

impl<R: BufRead> TextReader<R> {
    pub fn new(reader: R) -> Self {
        Self { lines: reader.lines(), line_no: 0 }
    }

    fn parse_line(&self, line: &str) -> Result<SparseVector> {
        let pos = Position::Line(self.line_no);
        let mut fields = line.split(' ');
        let head = fields.next().unwrap_or_default();
        let ext_id: u64 = head
            .parse()
            .map_err(|_| Error::Format(FormatError { position: pos, kind: FormatErrorKind::Malformed(format!("bad ext id `{head}`")) }))?;
        let mut coords = Vec::new();
        let mut values = Vec::new();
        for field in fields {
            let Some((c, v)) = field.split_once(':') else {
                return fail(pos, FormatErrorKind::Malformed(format!("expected coord:value, got `{field}`")));
            };
            let Ok(c) = c.parse::<u32>() else {
                return fail(pos, FormatErrorKind::Malformed(format!("bad coordinate `{c}`")));
            };
            let Ok(v) = v.parse::<f32>() else {
                return fail(pos, FormatErrorKind::Malformed(format!("bad value `{v}`")));
            };
            coords.push(c);
            values.push(v);
        }
        validate(pos, ext_id, coords, values)
    }
}

impl<R: BufRead> Iterator for TextReader<R> {
    type Item = Result<SparseVector>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            return Some(self.parse_line(line));
        }
    }
}

/// Streaming reader for the `SPVEC1` binary format.
pub struct BinaryReader<R> {
    reader: R,
    remaining: u64,
    record: u64,
    started: bool,
}

impl<R: Read> BinaryReader<R> {
    pub fn new(reader: R) -> Self {
        Self { reader, remaining: 0, record: 0, started: false }
    }

    /// Declared record count; reads the header on first call.
    fn header(&mut self) -> Result<bool> {
        let mut magic = [0u8; 8];
        match read_exact_or_eof(&mut self.reader, &mut magic)? {
            Fill::Empty => return Ok(false),
            Fill::Partial => return fail(Position::Header, FormatErrorKind::Truncated),
            Fill::Full => {}
        }
        if magic != BINARY_MAGIC {
            return fail(Position::Header, FormatErrorKind::BadMagic);
        }
        let mut count = [0u8; 8];
        if read_exact_or_eof(&mut self.reader, &mut count)? != Fill::Full {
            return fail(Position::Header, FormatErrorKind::Truncated);
        }
        self.remaining = u64::from_le_bytes(count);
        Ok(true)
    }

    fn read_record(&mut self) -> Result<SparseVector> {
        let pos = Position::Record(self.record);
        let mut head = [0u8; 12];
        if read_exact_or_eof(&mut self.reader, &mut head)? != Fill::Full {
            return fail(pos, FormatErrorKind::Truncated);
        }
        let ext_id = u64::from_le_bytes(head[..8].try_into().unwrap());
        let nnz = u32::from_le_bytes(head[8..].try_into().unwrap()) as usize;
        let mut coords = Vec::with_capacity(nnz.min(1 << 20));
        let mut values = Vec::with_capacity(nnz.min(1 << 20));
        let mut pair = [0u8; 8];
        for _ in 0..nnz {
            if read_exact_or_eof(&mut self.reader, &mut pair)? != Fill::Full {
                return fail(pos, FormatErrorKind::Truncated);
            }
            coords.push(u32::from_le_bytes(pair[..4].try_into().unwrap()));
            values.push(f32::from_le_bytes(pair[4..].try_into().unwrap()));
        }
        validate(pos, ext_id, coords, values)
    }
}

impl<R: Read> Iterator for BinaryReader<R> {
    type Item = Result<SparseVector>;

    fn next(&mut self) -> Option<Self::Item> {
        if !self.started {
            self.started = true;
            match self.header() {
                Ok(true) => {}
                Ok(false) => return None,
                Err(e) => {
                    self.remaining = 0;
                    return Some(Err(e));
                }
            }
        }
        if self.remaining == 0 {
            return None;
        }
        let out = self.read_record();
        self.record += 1;
        self.remaining = if out.is_err() { 0 } else { self.remaining - 1 };
        Some(out)
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Fill {
    Empty,
    Partial,
    Full,
}

fn read_exact_or_eof(reader: &mut impl Read, buf: &mut [u8]) -> io::Result<Fill> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(match filled {
        0 => Fill::Empty,
        n if n == buf.len() => Fill::Full,
        _ => Fill::Partial,
    })
}

/// Shortest decimal that parses back to the same `f32`.
pub(crate) fn format_value(v: f32) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_text<'a>(mut out: impl Write, vectors: impl Iterator<Item = &'a SparseVector>) -> Result<()> {
    for v in vectors {
        write!(out, "{}", v.ext_id())?;
        for (c, x) in v.iter() {
            write!(out, " {c}:{}", format_value(x))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_binary<'a>(mut out: impl Write, vectors: impl ExactSizeIterator<Item = &'a SparseVector>) -> Result<()> {
    out.write_all(&BINARY_MAGIC)?;
    out.write_all(&(vectors.len() as u64).to_le_bytes())?;
    for v in vectors {
        out.write_all(&v.ext_id().to_le_bytes())?;
        out.write_all(&(v.nnz() as u32).to_le_bytes())?;
        for (c, x) in v.iter() {
            out.write_all(&c.to_le_bytes())?;
            out.write_all(&x.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a whole vector file. Readers for streaming use are
/// [`TextReader`] and [`BinaryReader`].
pub fn read_vectors(path: &Path, format: VectorFormat) -> Result<Vec<SparseVector>> {
    let file = BufReader::new(File::open(path)?);
    match format {
        VectorFormat::Text => TextReader::new(file).collect(),
        VectorFormat::Binary => BinaryReader::new(file).collect(),
    }
}

pub fn write_vectors<'a>(
    path: &Path,
    format: VectorFormat,
    vectors: impl ExactSizeIterator<Item = &'a SparseVector>,
) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    match format {
        VectorFormat::Text => write_text(file, vectors),
        VectorFormat::Binary => write_binary(file, vectors),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn parse_text(s: &str) -> Result<Vec<SparseVector>> {
        TextReader::new(s.as_bytes()).collect()
    }

    fn kind_of(r: Result<Vec<SparseVector>>) -> (Position, FormatErrorKind) {
        match r {
            Err(Error::Format(FormatError { position, kind })) => (position, kind),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn text_example() {
        let v = parse_text("7 3:0.5 10:-1.25\n").unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].ext_id(), 7);
        assert_eq!(v[0].iter().collect::<Vec<_>>(), vec![(3, 0.5), (10, -1.25)]);
        assert!(parse_text("").unwrap().is_empty());
        assert_eq!(parse_text("4\n").unwrap()[0].nnz(), 0);
    }

    #[test]
    fn text_diagnostics_are_distinct_and_positioned() {
        let (p, k) = kind_of(parse_text("1 2:1\n2 3:1 3:2\n"));
        assert_eq!((p, k), (Position::Line(2), FormatErrorKind::DuplicateCoordinate(3)));
        let (_, k) = kind_of(parse_text("1 5:1 3:2\n"));
        assert_eq!(k, FormatErrorKind::UnsortedCoordinates { prev: 5, next: 3 });
        let (_, k) = kind_of(parse_text("1 5:inf\n"));
        assert_eq!(k, FormatErrorKind::NonFiniteValue { coord: 5 });
        let (_, k) = kind_of(parse_text("1 5:NaN\n"));
        assert_eq!(k, FormatErrorKind::NonFiniteValue { coord: 5 });
        let (_, k) = kind_of(parse_text("1 5:0\n"));
        assert_eq!(k, FormatErrorKind::ZeroValue { coord: 5 });
        assert!(matches!(kind_of(parse_text("x 5:1\n")).1, FormatErrorKind::Malformed(_)));
        assert!(matches!(kind_of(parse_text("1 5-1\n")).1, FormatErrorKind::Malformed(_)));
    }

    #[test]
    fn binary_truncation_and_magic() {
        let v = vec![SparseVector::new(1, vec![1, 2], vec![0.5, 2.0]).unwrap()];
        let mut bytes = Vec::new();
        write_binary(&mut bytes, v.iter()).unwrap();
        let back: Vec<_> = BinaryReader::new(&bytes[..]).collect::<Result<_>>().unwrap();
        assert_eq!(back, v);

        let cut = &bytes[..bytes.len() - 3];
        let err = BinaryReader::new(cut).collect::<Result<Vec<_>>>();
        assert_eq!(kind_of(err), (Position::Record(0), FormatErrorKind::Truncated));

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(kind_of(BinaryReader::new(&bad[..]).collect()).1, FormatErrorKind::BadMagic);
        assert_eq!(kind_of(BinaryReader::new(&bytes[..10]).collect()).1, FormatErrorKind::Truncated);
        assert!(BinaryReader::new(&[][..]).next().is_none());
    }

    fn random_vectors(seed: u64, count: usize) -> Vec<SparseVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|i| {
                let nnz = rng.random_range(0..12);
                let mut coords: Vec<u32> = (0..nnz).map(|_| rng.random_range(0..5000)).collect();
                coords.sort_unstable();
                coords.dedup();
                let values = coords
                    .iter()
                    .map(|_| loop {
                        let v = f32::from_bits(rng.random::<u32>());
                        if v.is_finite() && v != 0.0 {
                            break v;
                        }
                    })
                    .collect();
                SparseVector::new(i as u64 * 3 + 1, coords, values).unwrap()
            })
            .collect()
    }

    #[test]
    fn binary_roundtrip_is_bit_identical() {
        let vectors = random_vectors(42, 100_000);
        let mut bytes = Vec::new();
        write_binary(&mut bytes, vectors.iter()).unwrap();
        let back: Vec<SparseVector> = BinaryReader::new(&bytes[..]).collect::<Result<_>>().unwrap();
        let mut again = Vec::new();
        write_binary(&mut again, back.iter()).unwrap();
        assert_eq!(bytes, again);
        for (a, b) in vectors.iter().zip(&back) {
            assert_eq!(a.ext_id(), b.ext_id());
            assert_eq!(a.coords(), b.coords());
            let bits = |v: &SparseVector| v.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a), bits(b));
        }
    }

    proptest! {
        #[test]
        fn text_binary_cross_conversion(seed in any::<u64>()) {
            let vectors = random_vectors(seed, 30);
            let mut text = Vec::new();
            write_text(&mut text, vectors.iter()).unwrap();
            let from_text: Vec<SparseVector> = TextReader::new(&text[..]).collect::<Result<_>>().unwrap();
            let mut bin = Vec::new();
            write_binary(&mut bin, from_text.iter()).unwrap();
            let from_bin: Vec<SparseVector> = BinaryReader::new(&bin[..]).collect::<Result<_>>().unwrap();
            prop_assert_eq!(&from_bin, &vectors);
        }
    }
}
