//! Reading raw samples from one-column CSV files.

use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{Result, RiskError};
use crate::estimators::EmpiricalSample;

/// A row that could not be turned into a finite real.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowWarning {
    /// 1-based line number in the input.
    pub line: u64,
    pub content: String,
    pub reason: String,
}

/// A parsed sample and the rows that were skipped.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub sample: EmpiricalSample,
    pub warnings: Vec<RowWarning>,
    /// Text of the first row when it was taken as a header.
    pub header: Option<String>,
}

/// Parses one value per row. A non-numeric first row is taken as a header;
/// any later bad row becomes a warning. Fails only when no row parses.
pub fn read_sample<R: Read>(reader: R) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut values = Vec::new();
    let mut warnings = Vec::new();
    let mut header = None;
    let mut first = true;
    for record in rdr.records() {
        let record = record.map_err(|e| RiskError::Io(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let content = record.iter().collect::<Vec<_>>().join(",");
        let parsed = match record.len() {
            1 => record[0]
                .parse::<f64>()
                .map_err(|e| e.to_string())
                .and_then(|x| if x.is_finite() { Ok(x) } else { Err("not finite".to_string()) }),
            k => Err(format!("expected one column, found {k}")),
        };
        match parsed {
            Ok(x) => values.push(x),
            Err(_) if first && record.len() == 1 => header = Some(content),
            Err(reason) => warnings.push(RowWarning { line, content, reason }),
        }
        first = false;
    }
    if values.is_empty() {
        return Err(RiskError::Parse {
            what: "sample",
            input: format!("no numeric rows ({} rejected)", warnings.len() + header.iter().count()),
        });
    }
    Ok(Ingested {
        sample: EmpiricalSample::new(values)?,
        warnings,
        header,
    })
}

pub fn read_sample_file(path: &Path) -> Result<Ingested> {
    let file = std::fs::File::open(path).map_err(|e| RiskError::Io(format!("{}: {e}", path.display())))?;
    read_sample(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_optional() {
        let with = read_sample("loss\n1.5\n2\n3e0\n".as_bytes()).unwrap();
        assert_eq!(with.sample.values(), &[1.5, 2.0, 3.0]);
        assert_eq!(with.header.as_deref(), Some("loss"));
        assert!(with.warnings.is_empty());

        let without = read_sample("1.5\n2\n".as_bytes()).unwrap();
        assert_eq!(without.sample.len(), 2);
        assert!(without.header.is_none());
    }

    #[test]
    fn bad_rows_become_warnings() {
        let got = read_sample("x\n1\nabc\n2\n3,4\ninf\n".as_bytes()).unwrap();
        assert_eq!(got.sample.values(), &[1.0, 2.0]);
        let lines: Vec<u64> = got.warnings.iter().map(|w| w.line).collect();
        assert_eq!(lines, vec![3, 5, 6]);
    }

    #[test]
    fn all_rows_failing_is_an_error() {
        assert!(matches!(read_sample("a\nb\n".as_bytes()), Err(RiskError::Parse { .. })));
        assert!(matches!(read_sample("".as_bytes()), Err(RiskError::Parse { .. })));
    }
}
