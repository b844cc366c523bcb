//! CSV and JSON emission. Files are written to a temporary sibling and
//! renamed into place, so a failed run leaves nothing behind.

use std::io::Write;
use std::path::Path;

use crate::error::CliError;

pub const TOOL_VERSION: &str = concat!("pointtrap ", env!("CARGO_PKG_VERSION"));

/// Writes `contents` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(contents.as_bytes())?;
        return Ok(out.flush()?);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| CliError::config(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// Builds a CSV document: one `#` comment line, a header, then rows.
pub struct Csv {
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    pub fn new(config_sha256: Option<&str>, header: &[&str]) -> Self {
        let mut comment = format!("# {TOOL_VERSION}");
        if let Some(h) = config_sha256 {
            comment.push_str(&format!(" config_sha256={h}"));
        }
        comment.push('\n');
        let mut writer = csv::WriterBuilder::new().from_writer(comment.into_bytes());
        writer.write_record(header).expect("in-memory write");
        Csv { writer }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.writer.write_record(cells).expect("row length matches header");
    }

    pub fn finish(self) -> String {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("utf-8 cells")
    }
}

/// Shortest round-tripping scientific form; empty for `None`.
pub fn num(x: impl Into<Option<f64>>) -> String {
    match x.into() {
        Some(v) => format!("{v:e}"),
        None => String::new(),
    }
}

pub fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(Some("abc"), &["x_m", "label"]);
        c.row(&[num(1.5e-6), "a,b".into()]);
        c.row(&[num(None), "say \"hi\"".into()]);
        let text = c.finish();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# {TOOL_VERSION} config_sha256=abc"));
        assert_eq!(lines[1], "x_m,label");
        assert_eq!(lines[2], "1.5e-6,\"a,b\"");
        assert_eq!(lines[3], ",\"say \"\"hi\"\"\"");
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1 + 0.2, -3.3e-19, 0.0, 1e300] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn file_written_atomically() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        emit(Some(&p), "hello\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "hello\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        let bad = dir.path().join("missing").join("out.csv");
        assert!(emit(Some(&bad), "x").is_err());
    }
}
