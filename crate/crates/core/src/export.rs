//! Dictionary file formats.
//!
//! CSV: header `theta_1,…,theta_p,n,power`, one row per entry in key order,
//! decoded values and power at six decimals.
//!
//! JSON (schema version 1): run metadata plus every entry with its grid
//! indices, decoded values and exact power.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{GaConfig, PowerDictionary};
use crate::oracle::OracleConfig;
use crate::space::{Chromosome, SearchSpace};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportKind {
    Ga,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportEntry {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryExport {
    pub schema_version: u32,
    pub kind: ExportKind,
    pub space: SearchSpace,
    pub oracle: OracleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ga: Option<GaConfig>,
    pub master_seed: u64,
    pub oracle_queries: u64,
    pub entries: Vec<ExportEntry>,
}

impl DictionaryExport {
    pub fn new(
        kind: ExportKind,
        space: &SearchSpace,
        oracle: &OracleConfig,
        ga: Option<&GaConfig>,
        master_seed: u64,
        dictionary: &PowerDictionary,
    ) -> Self {
        let entries = dictionary
            .iter()
            .map(|(c, power)| ExportEntry {
                indices: c.genes().to_vec(),
                values: space.decode_unchecked(c),
                power,
            })
            .collect();
        DictionaryExport {
            schema_version: SCHEMA_VERSION,
            kind,
            space: space.clone(),
            oracle: oracle.clone(),
            ga: ga.cloned(),
            master_seed,
            oracle_queries: dictionary.len() as u64,
            entries,
        }
    }

    /// Rebuilds the dictionary, checking every entry against the space.
    pub fn dictionary(&self) -> Result<PowerDictionary> {
        let mut d = PowerDictionary::new();
        for (i, e) in self.entries.iter().enumerate() {
            let c = Chromosome::new(e.indices.clone());
            self.space.check(&c).map_err(|err| Error::Format {
                line: i + 1,
                detail: format!("entry {i}: {err}"),
            })?;
            if !(0.0..=1.0).contains(&e.power) {
                return Err(Error::Format {
                    line: i + 1,
                    detail: format!("entry {i}: power {} outside [0, 1]", e.power),
                });
            }
            if !d.insert(c, e.power) {
                return Err(Error::Format {
                    line: i + 1,
                    detail: format!("entry {i}: duplicate chromosome"),
                });
            }
        }
        Ok(d)
    }

    pub fn to_writer<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn from_reader<R: Read>(r: R) -> Result<Self> {
        let export: DictionaryExport = serde_json::from_reader(r)?;
        if export.schema_version != SCHEMA_VERSION {
            return Err(Error::Structure(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                export.schema_version
            )));
        }
        Ok(export)
    }
}

pub fn csv_header(space: &SearchSpace) -> Vec<String> {
    (0..space.dims())
        .map(|d| space.dim_name(d))
        .chain(std::iter::once("power".to_string()))
        .collect()
}

pub fn write_csv<W: Write>(dictionary: &PowerDictionary, space: &SearchSpace, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(csv_header(space))?;
    let p = space.num_coefficients();
    for (c, power) in dictionary.iter() {
        let values = space.decode(c)?;
        let mut record: Vec<String> = values[..p].iter().map(|v| format!("{v:.6}")).collect();
        record.push(format!("{}", values[p] as u64));
        record.push(format!("{power:.6}"));
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a dictionary CSV, snapping decoded values back onto the grid.
pub fn read_csv<R: Read>(space: &SearchSpace, r: R) -> Result<PowerDictionary> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != csv_header(space) {
        return Err(Error::Format {
            line: 1,
            detail: format!("expected header {:?}, got {header:?}", csv_header(space).join(",")),
        });
    }
    let mut d = PowerDictionary::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fields = parse_floats(&record, line)?;
        let (point, power) = fields.split_at(space.dims());
        let c = space.snap(point).map_err(|e| Error::Format {
            line,
            detail: e.to_string(),
        })?;
        let power = power[0];
        if !(0.0..=1.0).contains(&power) {
            return Err(Error::Format {
                line,
                detail: format!("power {power} outside [0, 1]"),
            });
        }
        if !d.insert(c, power) {
            return Err(Error::Format {
                line,
                detail: "duplicate grid point".into(),
            });
        }
    }
    Ok(d)
}

pub(crate) fn parse_floats(record: &csv::StringRecord, line: usize) -> Result<Vec<f64>> {
    record
        .iter()
        .map(|f| {
            f.trim().parse::<f64>().map_err(|_| Error::Format {
                line,
                detail: format!("`{f}` is not a number"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ParameterRange;
    use crate::stats::{RegressorScheme, TestSpec};

    fn space() -> SearchSpace {
        SearchSpace::new(
            vec![
                ParameterRange::new(0.10, 0.30, 0.05).unwrap(),
                ParameterRange::new(0.30, 0.90, 0.05).unwrap(),
            ],
            ParameterRange::new(50.0, 200.0, 5.0).unwrap(),
        )
        .unwrap()
    }

    fn oracle() -> OracleConfig {
        OracleConfig {
            nsim: 200,
            alpha: 0.05,
            sigma2: 1.0,
            test: TestSpec::t_single(1),
            scheme: RegressorScheme::Normal,
        }
    }

    fn sample_dict() -> PowerDictionary {
        [
            (Chromosome::new(vec![0, 0, 0]), 0.125),
            (Chromosome::new(vec![4, 12, 30]), 1.0),
            (Chromosome::new(vec![2, 5, 7]), 0.335),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&sample_dict(), &space(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "theta_1,theta_2,n,power");
        assert_eq!(lines[1], "0.100000,0.300000,50,0.125000");
        assert_eq!(lines[2], "0.200000,0.550000,85,0.335000");
        assert_eq!(lines[3], "0.300000,0.900000,200,1.000000");
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_csv(&sample_dict(), &space(), &mut buf).unwrap();
        let back = read_csv(&space(), buf.as_slice()).unwrap();
        assert_eq!(back, sample_dict());
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let text = "theta_1,theta_2,n,power\n0.1,0.3,50,0.2\n0.1,abc,50,0.2\n";
        match read_csv(&space(), text.as_bytes()).unwrap_err() {
            Error::Format { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        let text = "theta_1,theta_2,n,power\n0.1,0.3,50,1.2\n";
        assert!(read_csv(&space(), text.as_bytes()).is_err());
        let text = "a,b,c,d\n";
        assert!(read_csv(&space(), text.as_bytes()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let export = DictionaryExport::new(ExportKind::Ga, &space(), &oracle(), None, 17, &sample_dict());
        let mut buf = Vec::new();
        export.to_writer(&mut buf).unwrap();
        let back = DictionaryExport::from_reader(buf.as_slice()).unwrap();
        assert_eq!(back, export);
        assert_eq!(back.dictionary().unwrap(), sample_dict());
        assert_eq!(back.entries[0].values, vec![0.1, 0.3, 50.0]);
    }

    #[test]
    fn json_rejects_other_versions_and_bad_entries() {
        let mut export = DictionaryExport::new(ExportKind::BruteForce, &space(), &oracle(), None, 1, &sample_dict());
        export.schema_version = 2;
        let mut buf = Vec::new();
        export.to_writer(&mut buf).unwrap();
        assert!(DictionaryExport::from_reader(buf.as_slice()).is_err());

        export.schema_version = 1;
        export.entries[0].indices = vec![9, 0, 0];
        assert!(export.dictionary().is_err());
    }
}
