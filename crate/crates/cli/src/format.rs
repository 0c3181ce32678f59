//! Text tensor files.
//!
//! ```text
//! GETT-TENSOR 1
//! dtype: d
//! rank: 2
//! extents: 2 3
//! increments: 1 2
//! offset: 0
//! buffer: 6
//! 1
//! 2
//! ...
//! ```
//!
//! Values follow the header in buffer order, whitespace separated. Complex
//! values are written as a real and an imaginary part. Reals are printed in
//! the shortest form that parses back to the same bits.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gett::{checked_extents, Complex32, Complex64, Element, ElementType, Operand, TensorView};
use thiserror::Error;

pub const MAGIC: &str = "GETT-TENSOR 1";

const KEYS: [&str; 6] = ["dtype", "rank", "extents", "increments", "offset", "buffer"];

/// Buffer contents, one variant per element type.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    S(Vec<f32>),
    D(Vec<f64>),
    C(Vec<Complex32>),
    Z(Vec<Complex64>),
}

impl TensorData {
    pub fn zeros(dtype: ElementType, len: usize) -> Self {
        match dtype {
            ElementType::S => TensorData::S(vec![0.0; len]),
            ElementType::D => TensorData::D(vec![0.0; len]),
            ElementType::C => TensorData::C(vec![Complex32::new(0.0, 0.0); len]),
            ElementType::Z => TensorData::Z(vec![Complex64::new(0.0, 0.0); len]),
        }
    }

    pub fn dtype(&self) -> ElementType {
        match self {
            TensorData::S(_) => ElementType::S,
            TensorData::D(_) => ElementType::D,
            TensorData::C(_) => ElementType::C,
            TensorData::Z(_) => ElementType::Z,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TensorData::S(v) => v.len(),
            TensorData::D(v) => v.len(),
            TensorData::C(v) => v.len(),
            TensorData::Z(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<Vec<f32>> for TensorData {
    fn from(v: Vec<f32>) -> Self {
        TensorData::S(v)
    }
}

impl From<Vec<f64>> for TensorData {
    fn from(v: Vec<f64>) -> Self {
        TensorData::D(v)
    }
}

impl From<Vec<Complex32>> for TensorData {
    fn from(v: Vec<Complex32>) -> Self {
        TensorData::C(v)
    }
}

impl From<Vec<Complex64>> for TensorData {
    fn from(v: Vec<Complex64>) -> Self {
        TensorData::Z(v)
    }
}

/// A view and the whole buffer it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFile {
    pub view: TensorView,
    pub data: TensorData,
}

impl TensorFile {
    /// # Panics
    ///
    /// If the view does not describe `data`.
    pub fn new(view: TensorView, data: impl Into<TensorData>) -> Self {
        let data = data.into();
        assert!(
            view.buffer_len == data.len() && view.fits_buffer(),
            "view does not fit its buffer"
        );
        TensorFile { view, data }
    }

    pub fn dtype(&self) -> ElementType {
        self.data.dtype()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected {MAGIC:?}")]
    BadMagic,
    #[error("expected \"{0}:\"")]
    MissingKey(&'static str),
    #[error("{key}: cannot parse {token:?}")]
    BadField { key: &'static str, token: String },
    #[error("{key}: expected {expected} entries for rank {expected}, found {actual}")]
    RankMismatch {
        key: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("bad value {0:?}")]
    BadValue(String),
    #[error("buffer: {expected} values declared, {actual} found")]
    ValueCount { expected: usize, actual: usize },
    #[error("complex value needs an imaginary part")]
    OddComplexCount,
    #[error("invalid view: {0}")]
    Invariant(String),
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

/// Real scalars that appear in files.
trait Part: Copy + FromStr + fmt::Display {}
impl Part for f32 {}
impl Part for f64 {}

fn parse_part<P: Part>(token: &str, line: usize) -> Result<P, ParseError> {
    token
        .parse()
        .map_err(|_| err(line, ParseErrorKind::BadValue(token.to_string())))
}

/// Element types with a text form.
trait FileValue: Element {
    const PARTS: usize;
    fn write(self, out: &mut String);
    fn parse(tokens: &[(usize, &str)]) -> Result<Self, ParseError>;
}

impl FileValue for f32 {
    const PARTS: usize = 1;
    fn write(self, out: &mut String) {
        let _ = writeln!(out, "{self}");
    }
    fn parse(t: &[(usize, &str)]) -> Result<Self, ParseError> {
        parse_part(t[0].1, t[0].0)
    }
}

impl FileValue for f64 {
    const PARTS: usize = 1;
    fn write(self, out: &mut String) {
        let _ = writeln!(out, "{self}");
    }
    fn parse(t: &[(usize, &str)]) -> Result<Self, ParseError> {
        parse_part(t[0].1, t[0].0)
    }
}

impl FileValue for Complex32 {
    const PARTS: usize = 2;
    fn write(self, out: &mut String) {
        let _ = writeln!(out, "{} {}", self.re, self.im);
    }
    fn parse(t: &[(usize, &str)]) -> Result<Self, ParseError> {
        Ok(Complex32::new(
            parse_part(t[0].1, t[0].0)?,
            parse_part(t[1].1, t[1].0)?,
        ))
    }
}

impl FileValue for Complex64 {
    const PARTS: usize = 2;
    fn write(self, out: &mut String) {
        let _ = writeln!(out, "{} {}", self.re, self.im);
    }
    fn parse(t: &[(usize, &str)]) -> Result<Self, ParseError> {
        Ok(Complex64::new(
            parse_part(t[0].1, t[0].0)?,
            parse_part(t[1].1, t[1].0)?,
        ))
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| format!(" {v}")).collect()
}

/// Serializes `tensor`.
pub fn to_text(tensor: &TensorFile) -> String {
    let view = &tensor.view;
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "dtype: {}", tensor.dtype().prefix());
    let _ = writeln!(out, "rank: {}", view.rank());
    let _ = writeln!(out, "extents:{}", join(&view.extents));
    let _ = writeln!(out, "increments:{}", join(&view.increments));
    let _ = writeln!(out, "offset: {}", view.base_offset);
    let _ = writeln!(out, "buffer: {}", view.buffer_len);
    fn values<T: FileValue>(v: &[T], out: &mut String) {
        for &x in v {
            x.write(out);
        }
    }
    match &tensor.data {
        TensorData::S(v) => values(v, &mut out),
        TensorData::D(v) => values(v, &mut out),
        TensorData::C(v) => values(v, &mut out),
        TensorData::Z(v) => values(v, &mut out),
    }
    out
}

fn field<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &'static str,
    last: usize,
) -> Result<(usize, &'a str), ParseError> {
    let (n, line) = lines
        .next()
        .ok_or_else(|| err(last + 1, ParseErrorKind::MissingKey(key)))?;
    match line
        .trim()
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(':'))
    {
        Some(rest) => Ok((n, rest.trim())),
        None => Err(err(n, ParseErrorKind::MissingKey(key))),
    }
}

fn numbers<N: FromStr>(key: &'static str, line: usize, text: &str) -> Result<Vec<N>, ParseError> {
    text.split_whitespace()
        .map(|t| {
            t.parse().map_err(|_| {
                err(
                    line,
                    ParseErrorKind::BadField {
                        key,
                        token: t.to_string(),
                    },
                )
            })
        })
        .collect()
}

fn single<N: FromStr>(key: &'static str, line: usize, text: &str) -> Result<N, ParseError> {
    text.parse().map_err(|_| {
        err(
            line,
            ParseErrorKind::BadField {
                key,
                token: text.to_string(),
            },
        )
    })
}

fn values<T: FileValue>(
    tokens: &[(usize, &str)],
    expected: usize,
    buffer_line: usize,
) -> Result<Vec<T>, ParseError> {
    if tokens.len() % T::PARTS != 0 {
        let line = tokens.last().map_or(buffer_line, |t| t.0);
        return Err(err(line, ParseErrorKind::OddComplexCount));
    }
    let actual = tokens.len() / T::PARTS;
    if actual != expected {
        return Err(err(
            buffer_line,
            ParseErrorKind::ValueCount { expected, actual },
        ));
    }
    tokens.chunks(T::PARTS).map(T::parse).collect()
}

/// Parses a tensor file. Line numbers in errors are 1-based.
pub fn parse_tensor(text: &str) -> Result<TensorFile, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(err(1, ParseErrorKind::BadMagic)),
    }

    let mut at = [0usize; KEYS.len()];
    let mut raw = [""; KEYS.len()];
    let mut last = 1;
    for (i, key) in KEYS.into_iter().enumerate() {
        let (n, rest) = field(&mut lines, key, last)?;
        at[i] = n;
        raw[i] = rest;
        last = n;
    }

    let dtype = {
        let mut chars = raw[0].chars();
        match (
            chars.next().and_then(ElementType::from_prefix),
            chars.next(),
        ) {
            (Some(t), None) => t,
            _ => {
                return Err(err(
                    at[0],
                    ParseErrorKind::BadField {
                        key: "dtype",
                        token: raw[0].to_string(),
                    },
                ))
            }
        }
    };
    let rank: usize = single("rank", at[1], raw[1])?;
    let raw_extents: Vec<i64> = numbers("extents", at[2], raw[2])?;
    let increments: Vec<isize> = numbers("increments", at[3], raw[3])?;
    for (i, len) in [(2, raw_extents.len()), (3, increments.len())] {
        if len != rank {
            return Err(err(
                at[i],
                ParseErrorKind::RankMismatch {
                    key: KEYS[i],
                    expected: rank,
                    actual: len,
                },
            ));
        }
    }
    let extents = checked_extents(Operand::A, &raw_extents)
        .map_err(|e| err(at[2], ParseErrorKind::Invariant(e.to_string())))?;
    let offset: usize = single("offset", at[4], raw[4])?;
    let buffer: usize = single("buffer", at[5], raw[5])?;

    let view = TensorView::new(extents, increments, offset, buffer);
    if !view.fits_buffer() {
        let fp = view.footprint();
        return Err(err(
            at[5],
            ParseErrorKind::Invariant(format!(
                "offsets {}..={} from base {offset} leave a buffer of {buffer}",
                fp.min, fp.max
            )),
        ));
    }

    let tokens: Vec<(usize, &str)> = lines
        .flat_map(|(n, l)| l.split_whitespace().map(move |t| (n, t)))
        .collect();
    let data = match dtype {
        ElementType::S => TensorData::S(values(&tokens, buffer, at[5])?),
        ElementType::D => TensorData::D(values(&tokens, buffer, at[5])?),
        ElementType::C => TensorData::C(values(&tokens, buffer, at[5])?),
        ElementType::Z => TensorData::Z(values(&tokens, buffer, at[5])?),
    };
    Ok(TensorFile { view, data })
}

pub fn read_tensor(path: &Path) -> Result<TensorFile, ReadError> {
    let text = std::fs::read_to_string(path).map_err(|source| ReadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_tensor(&text).map_err(|source| ReadError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_tensor(path: &Path, tensor: &TensorFile) -> std::io::Result<()> {
    std::fs::write(path, to_text(tensor))
}
