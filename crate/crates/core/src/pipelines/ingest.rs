use std::path::Path;

use chrono::NaiveDate;

use super::PipelineError;

/// Daily values with their calendar dates.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl RealSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Read a `date,value` CSV (ISO-8601 dates, optional header) whose dates
/// advance by exactly one day per row.
pub fn ingest_real_csv(path: &Path) -> Result<RealSeries, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::FileError { path: path.into(), source })?;
    let parse_err = |line: usize, message: String| PipelineError::ParseError { path: path.into(), line, message };
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut values = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(k + 1, e.to_string()))?;
        let line = record.position().map_or(k + 1, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(parse_err(line, format!("expected 2 fields, found {}", record.len())));
        }
        if k == 0 && record[0].eq_ignore_ascii_case("date") {
            continue;
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| parse_err(line, format!("bad date `{}`: {e}", &record[0])))?;
        let value: f64 = record[1].parse().map_err(|e| parse_err(line, format!("bad value `{}`: {e}", &record[1])))?;
        if !value.is_finite() {
            return Err(parse_err(line, format!("non-finite value `{}`", &record[1])));
        }
        if value < 0.0 {
            return Err(PipelineError::NegativeCaseCount { path: path.into(), line, value });
        }
        if let Some(prev) = dates.last() {
            if prev.succ_opt() != Some(date) {
                return Err(PipelineError::NonContiguousDates {
                    path: path.into(),
                    line,
                    previous: prev.to_string(),
                    found: date.to_string(),
                });
            }
        }
        dates.push(date);
        values.push(value);
    }
    if values.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    Ok(RealSeries { dates, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn well_formed_file() {
        let f = file("date,value\n2020-02-28,5\n2020-02-29,7\n2020-03-01,12\n");
        let s = ingest_real_csv(f.path()).unwrap();
        assert_eq!(s.values, vec![5.0, 7.0, 12.0]);
        assert_eq!(s.dates[2].to_string(), "2020-03-01");
        let f = file("2020-01-01,1.5\n2020-01-02,0\n");
        assert_eq!(ingest_real_csv(f.path()).unwrap().len(), 2);
    }

    #[test]
    fn duplicated_or_missing_dates() {
        let f = file("date,value\n2020-03-01,5\n2020-03-01,7\n");
        assert!(matches!(ingest_real_csv(f.path()), Err(PipelineError::NonContiguousDates { line: 3, .. })));
        let f = file("date,value\n2020-03-01,5\n2020-03-03,7\n");
        assert!(matches!(ingest_real_csv(f.path()), Err(PipelineError::NonContiguousDates { .. })));
        let f = file("date,value\n2020-03-02,5\n2020-03-01,7\n");
        assert!(matches!(ingest_real_csv(f.path()), Err(PipelineError::NonContiguousDates { .. })));
    }

    #[test]
    fn bad_values() {
        let f = file("date,value\n2020-03-01,5\n2020-03-02,-5\n");
        assert!(matches!(ingest_real_csv(f.path()), Err(PipelineError::NegativeCaseCount { value, .. }) if value == -5.0));
        let f = file("date,value\n2020-03-01,five\n");
        assert!(matches!(ingest_real_csv(f.path()), Err(PipelineError::ParseError { line: 2, .. })));
        let f = file("date,value\n03/01/2020,5\n");
        assert!(matches!(ingest_real_csv(f.path()), Err(PipelineError::ParseError { .. })));
        assert!(matches!(ingest_real_csv(Path::new("/nonexistent/x.csv")), Err(PipelineError::FileError { .. })));
    }
}
