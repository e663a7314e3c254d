//! Embedding matrices, vocabularies and word counts in the whitespace-separated
//! text interchange format.
//!
//! An embedding file starts with a `"<count> <dim>"` header, followed by one
//! `"<token> <f1> ... <f_dim>"` line per row. Values are written with nine
//! significant digits.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, OnceLock};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::numfmt::format_significant;

const SERIALIZED_DIGITS: usize = 9;

/// Ordered list of unique tokens with a reverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::invalid("vocabulary must contain at least one token"));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, token) in tokens.iter().enumerate() {
            if index.insert(token.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate token {token:?}")));
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// A `|V| x e` matrix of token vectors. Immutable once constructed.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    vocab: Arc<Vocabulary>,
    data: Array2<f64>,
    fingerprint: OnceLock<u64>,
}

impl EmbeddingMatrix {
    pub fn new(vocab: Vocabulary, data: Array2<f64>) -> Result<Self> {
        Self::with_shared_vocab(Arc::new(vocab), data)
    }

    pub fn from_rows<S: Into<String>>(rows: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let dim = rows.first().map(|(_, v)| v.len()).unwrap_or(0);
        let mut tokens = Vec::with_capacity(rows.len());
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for (token, values) in rows {
            if values.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: values.len(),
                });
            }
            tokens.push(token.into());
            flat.extend(values);
        }
        let n = tokens.len();
        let data = Array2::from_shape_vec((n, dim), flat)
            .map_err(|e| Error::invalid(e.to_string()))?;
        Self::new(Vocabulary::new(tokens)?, data)
    }

    fn with_shared_vocab(vocab: Arc<Vocabulary>, data: Array2<f64>) -> Result<Self> {
        if data.nrows() != vocab.len() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                actual: data.nrows(),
            });
        }
        if data.ncols() == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            let (row, col) = (pos / data.ncols(), pos % data.ncols());
            return Err(Error::invalid(format!(
                "non-finite value at row {row}, column {col}"
            )));
        }
        Ok(Self {
            vocab,
            data,
            fingerprint: OnceLock::new(),
        })
    }

    /// Builds a matrix over the same vocabulary with new row data.
    pub fn with_data(&self, data: Array2<f64>) -> Result<Self> {
        Self::with_shared_vocab(Arc::clone(&self.vocab), data)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn row(&self, idx: usize) -> ArrayView1<'_, f64> {
        self.data.row(idx)
    }

    pub fn vector(&self, token: &str) -> Option<ArrayView1<'_, f64>> {
        self.vocab.get(token).map(|i| self.data.row(i))
    }

    pub fn rows(&self) -> impl Iterator<Item = ArrayView1<'_, f64>> {
        self.data.axis_iter(Axis(0))
    }

    /// 64-bit FNV-1a over the bytes this matrix was loaded from, or over its
    /// serialized form when it was built in memory.
    pub fn fingerprint(&self) -> u64 {
        *self.fingerprint.get_or_init(|| fnv1a64(self.to_text().as_bytes()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| Error::invalid(format!("{}: not UTF-8: {e}", path.display())))?;
        let matrix = Self::parse(text)?;
        let _ = matrix.fingerprint.set(fnv1a64(&bytes));
        Ok(matrix)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (count, dim) = match lines.next() {
            Some((_, header)) => parse_header(header)?,
            None => return Err(Error::parse(1, "malformed header: empty file")),
        };

        let mut tokens = Vec::with_capacity(count);
        let mut index = HashMap::with_capacity(count);
        let mut flat = Vec::with_capacity(count * dim);
        for (line_no, line) in lines {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if tokens.len() == count {
                return Err(Error::parse(
                    line_no,
                    format!("more rows than the {count} declared in header"),
                ));
            }
            let mut fields = split_fields(line);
            let token = fields.next().expect("non-empty line has a field");
            let start = flat.len();
            for field in fields {
                let value: f64 = field
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("invalid number {field:?}")))?;
                if !value.is_finite() {
                    return Err(Error::parse(line_no, "non-finite value"));
                }
                flat.push(value);
            }
            if flat.len() - start != dim {
                return Err(Error::parse(line_no, "row length mismatch"));
            }
            if index.insert(token.to_string(), tokens.len()).is_some() {
                return Err(Error::parse(line_no, format!("duplicate token {token:?}")));
            }
            tokens.push(token.to_string());
        }
        if tokens.len() != count {
            return Err(Error::parse(
                text.lines().count(),
                format!("header declares {count} rows but file has {}", tokens.len()),
            ));
        }
        let data = Array2::from_shape_vec((count, dim), flat).expect("shape checked per row");
        Ok(Self {
            vocab: Arc::new(Vocabulary { tokens, index }),
            data,
            fingerprint: OnceLock::new(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = Vec::with_capacity(self.len() * self.dim() * 12);
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("serialized text is UTF-8")
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim())?;
        for (token, row) in self.vocab.tokens.iter().zip(self.rows()) {
            w.write_all(token.as_bytes())?;
            for &x in row.iter() {
                write!(w, " {}", format_significant(x, SERIALIZED_DIGITS))?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

fn split_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split([' ', '\t']).filter(|f| !f.is_empty())
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let fields: Vec<&str> = split_fields(line.trim_end_matches('\r')).collect();
    let parsed = match fields.as_slice() {
        [count, dim] => count.parse::<usize>().ok().zip(dim.parse::<usize>().ok()),
        _ => None,
    };
    match parsed {
        Some((count, dim)) if count >= 1 && dim >= 1 => Ok((count, dim)),
        _ => Err(Error::parse(1, "malformed header, expected \"<count> <dim>\"")),
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

pub fn norm(v: ArrayView1<'_, f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Returns `v / ||v||`.
pub fn normalize(v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v.mapv(|x| x / n))
}

/// Corpus counts per token. Every count is at least 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
}

impl FrequencyTable {
    pub fn from_counts<I, S>(iter: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut counts = HashMap::new();
        for (token, count) in iter {
            if count == 0 {
                return Err(Error::invalid("count must be ≥ 1"));
            }
            counts.insert(token.into(), count);
        }
        Ok(Self { counts })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut counts = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = split_fields(line).collect();
            let [token, count] = fields.as_slice() else {
                return Err(Error::parse(line_no, "malformed line, expected \"<token> <count>\""));
            };
            let count: i64 = count
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid count {count:?}")))?;
            if count < 1 {
                return Err(Error::parse(line_no, "count must be ≥ 1"));
            }
            counts.insert(token.to_string(), count as u64);
        }
        Ok(Self { counts })
    }

    pub fn get(&self, token: &str) -> Option<u64> {
        self.counts.get(token).copied()
    }

    pub fn log_count(&self, token: &str) -> Option<f64> {
        self.get(token).map(|c| (c as f64).ln())
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}
