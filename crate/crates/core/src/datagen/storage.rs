//! On-disk dataset layout: `manifest.json` plus one `series_<i>.csv` per
//! series with header `t,<col1>,<col2>,...`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatagenError, Dataset, GenerationConfig, Series};

const MANIFEST: &str = "manifest.json";
const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    schema: u32,
    master_seed: u64,
    config: GenerationConfig,
    series: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    index: usize,
    file: String,
    seed: u64,
    parameters: BTreeMap<String, f64>,
    initial_conditions: BTreeMap<String, f64>,
    columns: Vec<String>,
    length: usize,
}

fn series_file(index: usize) -> String {
    format!("series_{index}.csv")
}

/// Shortest decimal representation that parses back to the same `f64`.
pub(crate) fn format_float(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv(dataset: &Dataset, directory: &Path) -> Result<(), DatagenError> {
    fs::create_dir_all(directory)?;
    let mut entries = Vec::with_capacity(dataset.series.len());
    for s in &dataset.series {
        let file = series_file(s.index);
        let mut writer = csv::Writer::from_path(directory.join(&file))?;
        let mut header = vec!["t".to_string()];
        header.extend(s.columns.iter().cloned());
        writer.write_record(&header)?;
        for (k, t) in s.times.iter().enumerate() {
            let mut row = vec![format_float(*t)];
            row.extend(s.values.iter().map(|col| format_float(col[k])));
            writer.write_record(&row)?;
        }
        writer.flush()?;
        entries.push(ManifestEntry {
            index: s.index,
            file,
            seed: s.seed,
            parameters: s.parameters.clone(),
            initial_conditions: s.initial_conditions.clone(),
            columns: s.columns.clone(),
            length: s.len(),
        });
    }
    let manifest = Manifest {
        schema: SCHEMA_VERSION,
        master_seed: dataset.master_seed(),
        config: dataset.config.clone(),
        series: entries,
    };
    fs::write(directory.join(MANIFEST), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

pub fn read_csv(directory: &Path) -> Result<Dataset, DatagenError> {
    let text = fs::read_to_string(directory.join(MANIFEST))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.schema != SCHEMA_VERSION {
        return Err(DatagenError::SchemaMismatch(format!("unsupported manifest schema {}", manifest.schema)));
    }
    let mut series = Vec::with_capacity(manifest.series.len());
    for entry in manifest.series {
        let path = directory.join(&entry.file);
        if !path.is_file() {
            return Err(DatagenError::SchemaMismatch(format!("series file {} listed in manifest is missing", entry.file)));
        }
        let mut reader = csv::Reader::from_path(&path)?;
        let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
        let mut expected = vec!["t".to_string()];
        expected.extend(entry.columns.iter().cloned());
        if header != expected {
            return Err(DatagenError::SchemaMismatch(format!(
                "{}: header {header:?} does not match manifest columns {expected:?}",
                entry.file
            )));
        }
        let mut times = Vec::with_capacity(entry.length);
        let mut values = vec![Vec::with_capacity(entry.length); entry.columns.len()];
        for record in reader.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64, DatagenError> {
                record[i].parse::<f64>().map_err(|e| {
                    DatagenError::SchemaMismatch(format!("{}: bad number `{}`: {e}", entry.file, &record[i]))
                })
            };
            times.push(parse(0)?);
            for (c, col) in values.iter_mut().enumerate() {
                col.push(parse(c + 1)?);
            }
        }
        if times.len() != entry.length {
            return Err(DatagenError::SchemaMismatch(format!(
                "{}: {} rows, manifest says {}",
                entry.file,
                times.len(),
                entry.length
            )));
        }
        series.push(Series {
            index: entry.index,
            seed: entry.seed,
            parameters: entry.parameters,
            initial_conditions: entry.initial_conditions,
            times,
            columns: entry.columns,
            values,
        });
    }
    Ok(Dataset { config: manifest.config, series })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate, NoiseSpec, SigmaScale, SparsifierSpec};

    fn dataset() -> Dataset {
        let json = r#"{
            "system": "sir",
            "parameters": {
                "beta": {"kind": "uniform", "low": 0.32, "high": 0.35},
                "gamma": {"kind": "uniform", "low": 0.123, "high": 0.125},
                "N": {"kind": "constant", "value": 1000}
            },
            "initial_conditions": {
                "S": {"kind": "constant", "value": 990},
                "I": {"kind": "uniform", "low": 1, "high": 10},
                "R": {"kind": "constant", "value": 0}
            },
            "grid": {"kind": "uniform", "start": 0, "step": 0.5, "count": 30},
            "n_series": 4,
            "master_seed": 99
        }"#;
        let mut cfg = GenerationConfig::from_json(json).unwrap();
        cfg.noise = NoiseSpec::AdditiveGaussian { sigma: 0.01, scale: SigmaScale::SeriesMax, targets: vec![] };
        cfg.sparsifier = Some(SparsifierSpec { keep_fraction: 0.7 });
        generate(&cfg).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let ds = dataset();
        let dir = tempfile::tempdir().unwrap();
        write_csv(&ds, dir.path()).unwrap();
        assert_eq!(read_csv(dir.path()).unwrap(), ds);
    }

    #[test]
    fn manifest_records_seeds() {
        let ds = dataset();
        let dir = tempfile::tempdir().unwrap();
        write_csv(&ds, dir.path()).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(manifest["master_seed"], 99);
        for (entry, s) in manifest["series"].as_array().unwrap().iter().zip(&ds.series) {
            assert_eq!(entry["seed"].as_u64().unwrap(), s.seed);
        }
        let header = fs::read_to_string(dir.path().join("series_0.csv")).unwrap();
        assert!(header.starts_with("t,S,I,R\n"));
    }

    #[test]
    fn missing_series_file_is_schema_mismatch() {
        let ds = dataset();
        let dir = tempfile::tempdir().unwrap();
        write_csv(&ds, dir.path()).unwrap();
        fs::remove_file(dir.path().join("series_2.csv")).unwrap();
        assert!(matches!(read_csv(dir.path()), Err(DatagenError::SchemaMismatch(_))));
    }

    #[test]
    fn header_mismatch_is_detected() {
        let ds = dataset();
        let dir = tempfile::tempdir().unwrap();
        write_csv(&ds, dir.path()).unwrap();
        let path = dir.path().join("series_1.csv");
        let text = fs::read_to_string(&path).unwrap().replacen("t,S,I,R", "t,S,I,X", 1);
        fs::write(&path, text).unwrap();
        assert!(matches!(read_csv(dir.path()), Err(DatagenError::SchemaMismatch(_))));
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 83_166_611.0, 1e-300, -2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }
}
