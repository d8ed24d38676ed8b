//! Delimited result files and fixed-width text tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// First line of every emitted CSV file:
/// `# hdp kind=<kind> classifier=<lr|rf|none> config_hash=<hex> seed=<n>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileHeader {
    pub kind: String,
    pub classifier: String,
    pub config_hash: String,
    pub seed: u64,
}

impl FileHeader {
    pub fn line(&self) -> String {
        format!(
            "# hdp kind={} classifier={} config_hash={} seed={}",
            self.kind, self.classifier, self.config_hash, self.seed
        )
    }

    pub fn parse(line: &str) -> Option<Self> {
        let rest = line.strip_prefix("# hdp ")?;
        let (mut kind, mut classifier, mut hash, mut seed) = (None, None, None, None);
        for tok in rest.split_whitespace() {
            let (k, v) = tok.split_once('=')?;
            match k {
                "kind" => kind = Some(v.to_string()),
                "classifier" => classifier = Some(v.to_string()),
                "config_hash" => hash = Some(v.to_string()),
                "seed" => seed = v.parse().ok(),
                _ => {}
            }
        }
        Some(Self {
            kind: kind?,
            classifier: classifier?,
            config_hash: hash?,
            seed: seed?,
        })
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".into(), fmt_f64)
}

/// Rounded for human-readable tables.
pub fn fmt_short(v: Option<f64>, decimals: usize) -> String {
    match v {
        Some(x) if !x.is_nan() => format!("{x:.decimals$}"),
        _ => "NaN".into(),
    }
}

pub fn csv_bytes(header: &FileHeader, columns: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut out = header.line().into_bytes();
    out.push(b'\n');
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn write_csv(path: &Path, header: &FileHeader, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let bytes = csv_bytes(header, columns, rows)?;
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// A parsed result file.
#[derive(Debug, Clone)]
pub struct ResultFile {
    pub header: FileHeader,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ResultFile {
    pub fn read(path: &Path) -> Result<Option<Self>> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let Some((first, body)) = text.split_once('\n') else {
            return Ok(None);
        };
        let Some(header) = FileHeader::parse(first) else {
            return Ok(None);
        };
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let columns = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.with_context(|| format!("parsing {}", path.display()))?;
            rows.push(rec.iter().map(String::from).collect());
        }
        Ok(Some(Self { header, columns, rows }))
    }

    pub fn col(&self, name: &str) -> Result<usize> {
        match self.columns.iter().position(|c| c == name) {
            Some(i) => Ok(i),
            None => bail!("{} file has no column {name}", self.header.kind),
        }
    }
}

pub fn parse_opt(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| !v.is_nan())
}

/// Fixed-width table: first column left-aligned, the rest right-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct TextTable {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new(title: impl Into<String>, headers: Vec<String>) -> Self {
        Self {
            title: title.into(),
            headers,
            rows: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let n = self.headers.len();
        let mut width: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (i, c) in r.iter().enumerate().take(n) {
                width[i] = width[i].max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (i, c) in cells.iter().enumerate().take(n) {
                if i > 0 {
                    s.push_str("  ");
                }
                if i == 0 {
                    let _ = write!(s, "{c:<w$}", w = width[i]);
                } else {
                    let _ = write!(s, "{c:>w$}", w = width[i]);
                }
            }
            s.trim_end().to_string()
        };
        let mut out = format!("{}\n", self.title);
        out.push_str(&line(&self.headers));
        out.push('\n');
        out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * n.saturating_sub(1)));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self, header: &FileHeader) -> Result<Vec<u8>> {
        let cols: Vec<&str> = self.headers.iter().map(String::as_str).collect();
        csv_bytes(header, &cols, &self.rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> FileHeader {
        FileHeader {
            kind: "hdp-grid".into(),
            classifier: "lr".into(),
            config_hash: "abc123".into(),
            seed: 42,
        }
    }

    #[test]
    fn header_round_trips() {
        let h = header();
        assert_eq!(FileHeader::parse(&h.line()), Some(h));
        assert_eq!(FileHeader::parse("source,target"), None);
    }

    #[test]
    fn missing_is_nan() {
        assert_eq!(fmt_opt(None), "NaN");
        assert_eq!(fmt_opt(Some(0.25)), "0.25");
        assert_eq!(fmt_short(Some(0.8125), 2), "0.81");
        assert_eq!(parse_opt("NaN"), None);
        assert_eq!(parse_opt("0.5"), Some(0.5));
    }

    #[test]
    fn csv_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        let rows = vec![
            vec!["a".to_string(), "x; y".to_string()],
            vec!["b".into(), "NaN".into()],
        ];
        write_csv(&p, &header(), &["name", "value"], &rows).unwrap();
        let f = ResultFile::read(&p).unwrap().unwrap();
        assert_eq!(f.header, header());
        assert_eq!(f.columns, vec!["name", "value"]);
        assert_eq!(f.rows, rows);
        assert_eq!(f.col("value").unwrap(), 1);
        assert!(f.col("nope").is_err());
    }

    #[test]
    fn text_table_alignment() {
        let mut t = TextTable::new("T", vec!["project".into(), "auc".into()]);
        t.rows.push(vec!["JDT".into(), "0.81".into()]);
        t.rows.push(vec!["XN2.6".into(), "NaN".into()]);
        assert_eq!(
            t.render(),
            "T\nproject   auc\n-------------\nJDT      0.81\nXN2.6     NaN\n"
        );
        let empty = TextTable::new("E", vec!["a".into(), "b".into()]);
        assert_eq!(empty.render(), "E\na  b\n----\n");
    }
}
