//! `MPIR1` container: a six byte magic `MPIR1\n`, ASCII `key=value` header
//! lines closed by an empty line, then little-endian `f64` values in
//! row-major order. `c64` values are stored as interleaved `(re, im)` pairs.
//!
//! The first three header keys are always `kind`, `dtype` and `dims`; any
//! further keys are metadata and keep their order, so reading and writing a
//! file reproduces it byte for byte.

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use num_complex::Complex64;

use super::IoError;
use crate::grid::ImageGrid;
use crate::solvers::SystemMatrix;

pub const MAGIC: &[u8; 6] = b"MPIR1\n";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Matrix,
    Image,
    Vector,
    Report,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Matrix => "matrix",
            Kind::Image => "image",
            Kind::Vector => "vector",
            Kind::Report => "report",
        }
    }

    fn parse(s: &str) -> Result<Self, IoError> {
        match s {
            "matrix" => Ok(Kind::Matrix),
            "image" => Ok(Kind::Image),
            "vector" => Ok(Kind::Vector),
            "report" => Ok(Kind::Report),
            _ => Err(IoError::BadHeader(format!("unknown kind '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    F64(Vec<f64>),
    C64(Vec<Complex64>),
}

impl Payload {
    pub fn dtype(&self) -> &'static str {
        match self {
            Payload::F64(_) => "f64",
            Payload::C64(_) => "c64",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Payload::F64(v) => v.len(),
            Payload::C64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Container {
    pub kind: Kind,
    pub dims: Vec<usize>,
    meta: Vec<(String, String)>,
    pub payload: Payload,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

fn format_dims(dims: &[usize]) -> String {
    dims.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_dims(s: &str) -> Result<Vec<usize>, IoError> {
    if s.is_empty() {
        return Err(IoError::BadHeader("empty dims".into()));
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| IoError::BadHeader(format!("bad dims '{s}'")))
        })
        .collect()
}

fn encode_f64s(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

fn decode_f64s(s: &str) -> Result<Vec<f64>, IoError> {
    let bytes = STANDARD
        .decode(s)
        .map_err(|e| IoError::BadHeader(format!("bad base64 block: {e}")))?;
    if bytes.len() % 8 != 0 {
        return Err(IoError::BadHeader(
            "base64 block is not a whole number of f64".into(),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

impl Container {
    /// Checks that the payload matches `dims`.
    pub fn new(kind: Kind, dims: Vec<usize>, payload: Payload) -> Result<Self, IoError> {
        let expected: usize = dims.iter().product();
        if dims.is_empty() || payload.len() != expected {
            return Err(IoError::PayloadLength {
                expected: expected
                    * 8
                    * if matches!(payload, Payload::C64(_)) {
                        2
                    } else {
                        1
                    },
                got: payload.len()
                    * 8
                    * if matches!(payload, Payload::C64(_)) {
                        2
                    } else {
                        1
                    },
            });
        }
        Ok(Self {
            kind,
            dims,
            meta: Vec::new(),
            payload,
        })
    }

    pub fn dtype(&self) -> &'static str {
        self.payload.dtype()
    }

    pub fn meta(&self) -> &[(String, String)] {
        &self.meta
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Adds a metadata line. Keys are `[a-z0-9_]+`, unique, and may not
    /// shadow the fixed keys; values may not contain line breaks.
    pub fn push_meta(&mut self, key: &str, value: impl Into<String>) -> Result<(), IoError> {
        let value = value.into();
        if !valid_key(key) {
            return Err(IoError::BadHeader(format!("invalid key '{key}'")));
        }
        if value.contains(['\n', '\r']) {
            return Err(IoError::BadHeader(format!(
                "value of '{key}' contains a line break"
            )));
        }
        if matches!(key, "kind" | "dtype" | "dims") || self.get_meta(key).is_some() {
            return Err(IoError::DuplicateKey(key.into()));
        }
        self.meta.push((key.into(), value));
        Ok(())
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Result<Self, IoError> {
        self.push_meta(key, value)?;
        Ok(self)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        let mut header = format!(
            "kind={}\ndtype={}\ndims={}\n",
            self.kind.name(),
            self.dtype(),
            format_dims(&self.dims)
        );
        for (k, v) in &self.meta {
            header.push_str(&format!("{k}={v}\n"));
        }
        header.push('\n');
        out.extend_from_slice(header.as_bytes());
        match &self.payload {
            Payload::F64(v) => v
                .iter()
                .for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            Payload::C64(v) => v.iter().for_each(|c| {
                out.extend_from_slice(&c.re.to_le_bytes());
                out.extend_from_slice(&c.im.to_le_bytes());
            }),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IoError> {
        let rest = bytes
            .strip_prefix(MAGIC.as_slice())
            .ok_or(IoError::BadMagic)?;
        let mut pos = 0;
        let mut lines = Vec::new();
        loop {
            let end = rest[pos..]
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| {
                    IoError::BadHeader("header is not terminated by an empty line".into())
                })?;
            let line = &rest[pos..pos + end];
            pos += end + 1;
            if line.is_empty() {
                break;
            }
            let line = std::str::from_utf8(line)
                .map_err(|_| IoError::BadHeader("header is not ASCII".into()))?;
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| IoError::BadHeader(format!("line without '=': '{line}'")))?;
            if lines.iter().any(|(key, _): &(String, String)| key == k) {
                return Err(IoError::DuplicateKey(k.into()));
            }
            lines.push((k.to_string(), v.to_string()));
        }
        let fixed = |i: usize, key: &str| -> Result<String, IoError> {
            match lines.get(i) {
                Some((k, v)) if k == key => Ok(v.clone()),
                _ => Err(IoError::BadHeader(format!(
                    "header line {} must be '{key}='",
                    i + 1
                ))),
            }
        };
        let kind = Kind::parse(&fixed(0, "kind")?)?;
        let dtype = fixed(1, "dtype")?;
        let dims = parse_dims(&fixed(2, "dims")?)?;
        let count: usize = dims.iter().product();
        let width = match dtype.as_str() {
            "f64" => 1,
            "c64" => 2,
            _ => return Err(IoError::BadHeader(format!("unknown dtype '{dtype}'"))),
        };
        let data = &rest[pos..];
        let expected = 8 * width * count;
        if data.len() != expected {
            return Err(IoError::PayloadLength {
                expected,
                got: data.len(),
            });
        }
        let values: Vec<f64> = data
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        let payload = if width == 1 {
            Payload::F64(values)
        } else {
            Payload::C64(
                values
                    .chunks_exact(2)
                    .map(|p| Complex64::new(p[0], p[1]))
                    .collect(),
            )
        };
        let mut out = Container::new(kind, dims, payload)?;
        for (k, v) in lines.into_iter().skip(3) {
            out.push_meta(&k, v)?;
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        Self::from_bytes(&fs::read(path)?)
    }

    fn expect_kind(&self, kind: Kind) -> Result<(), IoError> {
        if self.kind != kind {
            return Err(IoError::WrongKind {
                expected: kind.name(),
                got: self.kind.name(),
            });
        }
        Ok(())
    }

    /// `dims=rows,cols`, `grid=` the image shape, plus `row_freq_hz`,
    /// `row_snr` (base64 little-endian f64 blocks) and `op_norm` when known.
    pub fn from_matrix(a: &SystemMatrix) -> Self {
        let mut c = Container::new(
            Kind::Matrix,
            vec![a.rows(), a.cols()],
            Payload::C64(a.entries().to_vec()),
        )
        .expect("matrix shape is consistent");
        c.push_meta("grid", format_dims(a.grid_dims()))
            .expect("fresh key");
        if let Some(f) = a.row_freq_hz() {
            c.push_meta("row_freq_hz", encode_f64s(f))
                .expect("fresh key");
        }
        if let Some(s) = a.row_snr() {
            c.push_meta("row_snr", encode_f64s(s)).expect("fresh key");
        }
        if let Some(r) = a.op_norm() {
            c.push_meta("op_norm", format!("{r:?}")).expect("fresh key");
        }
        c
    }

    pub fn to_matrix(&self) -> Result<SystemMatrix, IoError> {
        self.expect_kind(Kind::Matrix)?;
        let Payload::C64(entries) = &self.payload else {
            return Err(IoError::WrongDtype {
                expected: "c64",
                got: self.dtype(),
            });
        };
        if self.dims.len() != 2 {
            return Err(IoError::BadHeader("matrix dims must be rows,cols".into()));
        }
        let grid = match self.get_meta("grid") {
            Some(g) => parse_dims(g)?,
            None => vec![self.dims[1]],
        };
        let mut a = SystemMatrix::new(self.dims[0], entries.clone(), &grid)?;
        if let Some(f) = self.get_meta("row_freq_hz") {
            a = a.with_row_freq_hz(decode_f64s(f)?)?;
        }
        if let Some(s) = self.get_meta("row_snr") {
            a = a.with_row_snr(decode_f64s(s)?)?;
        }
        if let Some(r) = self.get_meta("op_norm") {
            let r: f64 = r
                .parse()
                .map_err(|_| IoError::BadHeader(format!("bad op_norm '{r}'")))?;
            a.set_op_norm(Some(r));
        }
        Ok(a)
    }

    pub fn from_image(img: &ImageGrid) -> Self {
        Container::new(
            Kind::Image,
            img.dims().to_vec(),
            Payload::F64(img.values().to_vec()),
        )
        .expect("grid shape is consistent")
    }

    pub fn to_image(&self) -> Result<ImageGrid, IoError> {
        self.expect_kind(Kind::Image)?;
        match &self.payload {
            Payload::F64(v) => Ok(ImageGrid::new(&self.dims, v.clone())?),
            Payload::C64(_) => Err(IoError::WrongDtype {
                expected: "f64",
                got: "c64",
            }),
        }
    }

    pub fn from_vector(b: &[Complex64]) -> Self {
        Container::new(Kind::Vector, vec![b.len()], Payload::C64(b.to_vec()))
            .expect("vector shape is consistent")
    }

    /// Complex vector; a real `f64` vector is widened.
    pub fn to_vector(&self) -> Result<Vec<Complex64>, IoError> {
        self.expect_kind(Kind::Vector)?;
        Ok(match &self.payload {
            Payload::C64(v) => v.clone(),
            Payload::F64(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        })
    }

    /// A report table: `dims=rows,columns` of f64 with a `columns=` key
    /// naming the columns.
    pub fn report(columns: &[&str], rows: &[Vec<f64>]) -> Result<Self, IoError> {
        if rows.iter().any(|r| r.len() != columns.len()) {
            return Err(IoError::BadHeader(
                "report row width differs from the column count".into(),
            ));
        }
        let values = rows.iter().flatten().copied().collect();
        Container::new(
            Kind::Report,
            vec![rows.len(), columns.len()],
            Payload::F64(values),
        )?
        .with_meta("columns", columns.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let img = ImageGrid::new(&[1, 2], vec![1.0, -0.5]).unwrap();
        let bytes = Container::from_image(&img).to_bytes();
        let head = b"MPIR1\nkind=image\ndtype=f64\ndims=1,2\n\n";
        assert_eq!(&bytes[..head.len()], head);
        assert_eq!(bytes.len(), head.len() + 16);
        assert_eq!(&bytes[head.len()..head.len() + 8], &1.0f64.to_le_bytes());
    }

    #[test]
    fn complex_payload_is_interleaved() {
        let c = Container::from_vector(&[Complex64::new(1.5, -2.0)]);
        let bytes = c.to_bytes();
        let tail = &bytes[bytes.len() - 16..];
        assert_eq!(&tail[..8], &1.5f64.to_le_bytes());
        assert_eq!(&tail[8..], &(-2.0f64).to_le_bytes());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Container::from_bytes(b"MPIR2\n"),
            Err(IoError::BadMagic)
        ));
        let dup = b"MPIR1\nkind=vector\ndtype=f64\ndims=1\nx=1\nx=2\n\n\0\0\0\0\0\0\0\0";
        assert!(matches!(
            Container::from_bytes(dup),
            Err(IoError::DuplicateKey(_))
        ));
        let short = b"MPIR1\nkind=vector\ndtype=f64\ndims=2\n\n\0\0\0\0\0\0\0\0";
        assert!(matches!(
            Container::from_bytes(short),
            Err(IoError::PayloadLength {
                expected: 16,
                got: 8
            })
        ));
        let order = b"MPIR1\ndtype=f64\nkind=vector\ndims=1\n\n\0\0\0\0\0\0\0\0";
        assert!(matches!(
            Container::from_bytes(order),
            Err(IoError::BadHeader(_))
        ));
        let mut c = Container::from_vector(&[]);
        assert!(c.push_meta("dims", "3").is_err());
        assert!(c.push_meta("Bad", "3").is_err());
        assert!(c.push_meta("ok", "a\nb").is_err());
    }

    #[test]
    fn matrix_metadata_survives() {
        let a = SystemMatrix::from_real(2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[3])
            .unwrap()
            .with_row_freq_hz(vec![1e5, 2e5])
            .unwrap()
            .with_row_snr(vec![0.1, 7.25])
            .unwrap()
            .with_op_norm(Some(1.0 / 3.0));
        let c = Container::from_matrix(&a);
        let back = Container::from_bytes(&c.to_bytes())
            .unwrap()
            .to_matrix()
            .unwrap();
        assert_eq!(back, a);
        assert!(Container::from_matrix(&a).to_image().is_err());
    }

    #[test]
    fn report_table() {
        let r = Container::report(&["a", "b"], &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(r.dims, vec![2, 2]);
        assert_eq!(r.get_meta("columns"), Some("a,b"));
        assert!(Container::report(&["a"], &[vec![1.0, 2.0]]).is_err());
    }
}
