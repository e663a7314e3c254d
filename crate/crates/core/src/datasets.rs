//! Parsers for word-similarity, analogy and STS datasets, and the dataset
//! manifest that describes where they live and how they are laid out.
//!
//! Tokens are lowercased at parse time.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::trainer::{scale_annotations, LabeledPair, LabeledPairSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    #[default]
    Tab,
    Comma,
    /// Any run of spaces or tabs.
    Whitespace,
}

impl Delimiter {
    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            Delimiter::Tab => line.split('\t').map(str::trim).collect(),
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        }
    }
}

/// Column layout of a delimited dataset file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableFormat {
    pub delimiter: Delimiter,
    pub header: bool,
    /// Zero-based columns of (first, second, score) for similarity files or
    /// (score, sentence a, sentence b) for STS files.
    pub columns: [usize; 3],
}

impl TableFormat {
    pub fn similarity(delimiter: Delimiter, header: bool) -> Self {
        Self {
            delimiter,
            header,
            columns: [0, 1, 2],
        }
    }

    /// Named presets: `tsv`, `csv`, `ssv` (space separated), each with an
    /// optional `-header` suffix.
    pub fn from_tag(tag: &str) -> Result<Self> {
        let (base, header) = match tag.strip_suffix("-header") {
            Some(b) => (b, true),
            None => (tag, false),
        };
        let delimiter = match base {
            "tsv" => Delimiter::Tab,
            "csv" => Delimiter::Comma,
            "ssv" => Delimiter::Whitespace,
            other => return Err(Error::Manifest(format!("unknown format tag {other:?}"))),
        };
        Ok(Self::similarity(delimiter, header))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleRange {
    pub min: f64,
    pub max: f64,
}

impl ScaleRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if min.partial_cmp(&max) != Some(std::cmp::Ordering::Less) {
            return Err(Error::invalid(format!("scale range [{min}, {max}] is empty")));
        }
        Ok(Self { min, max })
    }

    /// Nominal annotation ranges of the common word-similarity datasets.
    pub fn known(name: &str) -> Option<Self> {
        let key: String = name
            .to_ascii_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        let (min, max) = match key.as_str() {
            "rg65" | "rg" => (0.0, 4.0),
            "ws353" | "wordsim353" | "ws" | "wordsim" => (0.0, 10.0),
            "rw" | "rw2034" | "rarewords" => (0.0, 10.0),
            "men" | "men3000" => (0.0, 50.0),
            "mturk287" | "mturk771" => (1.0, 5.0),
            "simlex999" | "simlex" => (0.0, 10.0),
            "simverb3500" | "simverb" => (0.0, 10.0),
            _ if key.starts_with("sts") => (0.0, 5.0),
            _ => return None,
        };
        Some(Self { min, max })
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Data lines with their 1-based line numbers, skipping blank lines and the
/// header when the format declares one.
fn data_lines(text: &str, header: bool) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .skip(usize::from(header))
}

pub fn parse_similarity_dataset(
    path: impl AsRef<Path>,
    name: &str,
    format: &TableFormat,
    scale: ScaleRange,
) -> Result<LabeledPairSet> {
    parse_similarity_str(&read(path.as_ref())?, name, format, scale)
}

pub fn parse_similarity_str(
    text: &str,
    name: &str,
    format: &TableFormat,
    scale: ScaleRange,
) -> Result<LabeledPairSet> {
    let [ca, cb, cs] = format.columns;
    let needed = ca.max(cb).max(cs) + 1;
    let mut pairs = Vec::new();
    let mut data_seen = 0usize;
    let mut multiword = 0usize;
    for (line_no, line) in data_lines(text, format.header) {
        data_seen += 1;
        let fields = format.delimiter.split(line);
        if fields.len() < needed {
            return Err(Error::parse(
                line_no,
                format!("expected at least {needed} fields, found {}", fields.len()),
            ));
        }
        let raw: f64 = fields[cs]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid score {:?}", fields[cs])))?;
        let (a, b) = (fields[ca].to_lowercase(), fields[cb].to_lowercase());
        if a.is_empty() || b.is_empty() {
            return Err(Error::parse(line_no, "empty token"));
        }
        if a.contains(char::is_whitespace) || b.contains(char::is_whitespace) {
            multiword += 1;
            continue;
        }
        let target = scale_annotations(raw, scale.min, scale.max)
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
        pairs.push(LabeledPair {
            a,
            b,
            target,
            source: name.to_string(),
        });
    }
    if data_seen == 0 {
        return Err(Error::InsufficientData(format!("{name}: no data lines")));
    }
    if multiword > 0 {
        log::warn!("{name}: dropped {multiword} multi-word entries");
    }
    LabeledPairSet::new(pairs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    pub c: String,
    pub expected: String,
    pub category: String,
    pub is_semantic: bool,
}

pub fn parse_analogy_dataset(path: impl AsRef<Path>) -> Result<Vec<AnalogyQuestion>> {
    parse_analogy_str(&read(path.as_ref())?)
}

/// Google analogy layout: `": <category>"` section headers followed by lines
/// of four tokens. Categories starting with `gram` are syntactic.
pub fn parse_analogy_str(text: &str) -> Result<Vec<AnalogyQuestion>> {
    let mut category: Option<String> = None;
    let mut out = Vec::new();
    for (line_no, line) in data_lines(text, false) {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix(':') {
            let name = rest.trim();
            if name.is_empty() {
                return Err(Error::parse(line_no, "empty category name"));
            }
            category = Some(name.to_string());
            continue;
        }
        let Some(cat) = &category else {
            return Err(Error::parse(line_no, "question before any category header"));
        };
        let tokens: Vec<String> = trimmed.split_whitespace().map(str::to_lowercase).collect();
        let [a, b, c, expected] = <[String; 4]>::try_from(tokens).map_err(|t| {
            Error::parse(line_no, format!("expected 4 tokens, found {}", t.len()))
        })?;
        out.push(AnalogyQuestion {
            a,
            b,
            c,
            expected,
            category: cat.clone(),
            is_semantic: !cat.starts_with("gram"),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StsPair {
    pub sentence_a: String,
    pub sentence_b: String,
    pub target: f64,
    pub year_tag: String,
}

pub fn parse_sts_dataset(
    path: impl AsRef<Path>,
    year_tag: &str,
    format: &TableFormat,
    scale: ScaleRange,
) -> Result<Vec<StsPair>> {
    parse_sts_str(&read(path.as_ref())?, year_tag, format, scale)
}

/// Default layout is `score<TAB>sentence1<TAB>sentence2`.
pub fn parse_sts_str(
    text: &str,
    year_tag: &str,
    format: &TableFormat,
    scale: ScaleRange,
) -> Result<Vec<StsPair>> {
    let [cs, ca, cb] = format.columns;
    let needed = ca.max(cb).max(cs) + 1;
    let mut out = Vec::new();
    for (line_no, line) in data_lines(text, format.header) {
        let fields = format.delimiter.split(line);
        if fields.len() < needed {
            return Err(Error::parse(
                line_no,
                format!("expected at least {needed} columns, found {}", fields.len()),
            ));
        }
        let raw: f64 = fields[cs]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid score {:?}", fields[cs])))?;
        let (a, b) = (fields[ca].trim(), fields[cb].trim());
        if a.is_empty() || b.is_empty() {
            return Err(Error::parse(line_no, "empty sentence"));
        }
        out.push(StsPair {
            sentence_a: a.to_string(),
            sentence_b: b.to_string(),
            target: scale_annotations(raw, scale.min, scale.max)
                .map_err(|e| Error::parse(line_no, e.to_string()))?,
            year_tag: year_tag.to_string(),
        });
    }
    if out.is_empty() {
        return Err(Error::InsufficientData(format!("{year_tag}: no data lines")));
    }
    Ok(out)
}

/// TOML manifest listing every evaluation dataset.
///
/// ```toml
/// [[similarity]]
/// name = "rg65"
/// path = "rg65.tsv"
/// format = "tsv"
/// scale = [0.0, 4.0]
///
/// [[analogy]]
/// name = "google"
/// path = "questions-words.txt"
///
/// [[sts]]
/// name = "2012"
/// path = "sts2012.tsv"
/// pretokenized = "sts2012.wp.tsv"
/// ```
///
/// Relative paths resolve against the manifest's directory. `scale` may be
/// omitted for datasets with a known nominal range.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub similarity: Vec<DatasetEntry>,
    #[serde(default)]
    pub analogy: Vec<DatasetEntry>,
    #[serde(default)]
    pub sts: Vec<DatasetEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
    /// Preset from [`TableFormat::from_tag`].
    pub format: Option<String>,
    pub delimiter: Option<Delimiter>,
    pub header: Option<bool>,
    pub scale: Option<[f64; 2]>,
    pub columns: Option<[usize; 3]>,
    /// STS only: same layout with sentences already split into wordpieces.
    pub pretokenized: Option<PathBuf>,
}

impl DatasetEntry {
    pub fn table_format(&self) -> Result<TableFormat> {
        let mut fmt = match &self.format {
            Some(tag) => TableFormat::from_tag(tag)?,
            None => TableFormat::similarity(Delimiter::Tab, false),
        };
        if let Some(d) = self.delimiter {
            fmt.delimiter = d;
        }
        if let Some(h) = self.header {
            fmt.header = h;
        }
        if let Some(c) = self.columns {
            fmt.columns = c;
        }
        Ok(fmt)
    }

    pub fn scale_range(&self) -> Result<ScaleRange> {
        match self.scale {
            Some([min, max]) => ScaleRange::new(min, max),
            None => ScaleRange::known(&self.name).ok_or_else(|| {
                Error::Manifest(format!("{}: no scale given and no known default", self.name))
            }),
        }
    }
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut manifest = Self::parse(&read(path)?)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for entry in manifest
            .similarity
            .iter_mut()
            .chain(&mut manifest.analogy)
            .chain(&mut manifest.sts)
        {
            if entry.path.is_relative() {
                entry.path = base.join(&entry.path);
            }
            if let Some(p) = &mut entry.pretokenized {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(manifest)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))
    }

    /// Every similarity dataset pooled into one set.
    pub fn load_similarity(&self) -> Result<LabeledPairSet> {
        let mut all = LabeledPairSet::default();
        for entry in &self.similarity {
            all.extend(parse_similarity_dataset(
                &entry.path,
                &entry.name,
                &entry.table_format()?,
                entry.scale_range()?,
            )?);
        }
        Ok(all)
    }

    pub fn load_analogy(&self) -> Result<Vec<AnalogyQuestion>> {
        let mut all = Vec::new();
        for entry in &self.analogy {
            all.extend(parse_analogy_dataset(&entry.path)?);
        }
        Ok(all)
    }

    /// STS pairs from every entry, reading the pretokenized file instead of
    /// the raw one when `pretokenized` is set and available.
    pub fn load_sts(&self, prefer_pretokenized: bool) -> Result<Vec<StsPair>> {
        let mut all = Vec::new();
        for entry in &self.sts {
            let path = match (&entry.pretokenized, prefer_pretokenized) {
                (Some(p), true) => p,
                _ => &entry.path,
            };
            let scale = ScaleRange::known("sts").expect("sts default");
            let scale = entry.scale.map_or(Ok(scale), |[a, b]| ScaleRange::new(a, b))?;
            let mut fmt = entry.table_format()?;
            if entry.columns.is_none() {
                fmt.columns = [0, 1, 2];
            }
            all.extend(parse_sts_dataset(path, &entry.name, &fmt, scale)?);
        }
        Ok(all)
    }
}
