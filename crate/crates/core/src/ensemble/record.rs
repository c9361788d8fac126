//! Per-realization records and their JSON-Lines persistence.
//!
//! One object per realization with exactly the documented field set:
//! `realization_id, T, beta, log_Z_T, O_T, M_T, qv_T, residual_T,
//! fixed_T_overlap, boundary_mass, failed`. Every float is serialized with
//! 17 significant digits so records round-trip bit-exactly. The file opens
//! with a header object carrying the config hash, master seed, and tool
//! version.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar observables of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub realization_id: u64,
    #[serde(rename = "T")]
    pub t: f64,
    pub beta: f64,
    #[serde(rename = "log_Z_T")]
    pub log_z_t: Option<f64>,
    #[serde(rename = "O_T")]
    pub o_t: Option<f64>,
    #[serde(rename = "M_T")]
    pub m_t: Option<f64>,
    #[serde(rename = "qv_T")]
    pub qv_t: Option<f64>,
    #[serde(rename = "residual_T")]
    pub residual_t: Option<f64>,
    #[serde(rename = "fixed_T_overlap")]
    pub fixed_t_overlap: Option<f64>,
    pub boundary_mass: Option<f64>,
    pub failed: bool,
    /// Step at which a numerical failure occurred (not part of the wire
    /// schema).
    #[serde(skip)]
    pub failed_step: Option<usize>,
}

/// Leading header object of a records file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordsHeader {
    pub schema: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub tool_version: String,
}

pub const RECORDS_SCHEMA: &str = "polymerlab.records.v1";

/// 17-significant-digit float formatting (`null` for absent/non-finite).
fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:.16e}"),
        _ => "null".to_string(),
    }
}

impl RunRecord {
    /// One JSON line in the documented field order.
    pub fn to_json_line(&self) -> String {
        format!(
            "{{\"realization_id\":{},\"T\":{},\"beta\":{},\"log_Z_T\":{},\"O_T\":{},\"M_T\":{},\"qv_T\":{},\"residual_T\":{},\"fixed_T_overlap\":{},\"boundary_mass\":{},\"failed\":{}}}",
            self.realization_id,
            format!("{:.16e}", self.t),
            format!("{:.16e}", self.beta),
            fmt_opt(self.log_z_t),
            fmt_opt(self.o_t),
            fmt_opt(self.m_t),
            fmt_opt(self.qv_t),
            fmt_opt(self.residual_t),
            fmt_opt(self.fixed_t_overlap),
            fmt_opt(self.boundary_mass),
            self.failed,
        )
    }
}

/// Write a records file: header line then one record per line.
pub fn write_records<W: Write>(
    w: &mut W,
    header: &RecordsHeader,
    records: &[RunRecord],
) -> Result<()> {
    let head = serde_json::to_string(header).map_err(|e| Error::io(e.to_string()))?;
    writeln!(w, "{head}")?;
    for r in records {
        writeln!(w, "{}", r.to_json_line())?;
    }
    Ok(())
}

/// Read a records file, reporting the byte offset of any malformed line.
pub fn read_records<R: BufRead>(r: &mut R) -> Result<(RecordsHeader, Vec<RunRecord>)> {
    let mut offset: u64 = 0;
    let mut line = String::new();
    let n = r.read_line(&mut line)?;
    if n == 0 {
        return Err(Error::io("records file is empty (missing header)"));
    }
    let header: RecordsHeader = serde_json::from_str(line.trim_end())
        .map_err(|e| Error::io(format!("bad records header at byte offset {offset}: {e}")))?;
    if header.schema != RECORDS_SCHEMA {
        return Err(Error::io(format!(
            "unsupported records schema '{}'",
            header.schema
        )));
    }
    offset += n as u64;
    let mut records = Vec::new();
    loop {
        line.clear();
        let n = r.read_line(&mut line)?;
        if n == 0 {
            break;
        }
        let trimmed = line.trim_end_matches('\n');
        if trimmed.is_empty() {
            offset += n as u64;
            continue;
        }
        if !line.ends_with('\n') {
            return Err(Error::io(format!(
                "records file truncated mid-line at byte offset {offset}"
            )));
        }
        let rec: RunRecord = serde_json::from_str(trimmed)
            .map_err(|e| Error::io(format!("bad record at byte offset {offset}: {e}")))?;
        records.push(rec);
        offset += n as u64;
    }
    Ok((header, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::BufReader;

    fn sample_record(id: u64) -> RunRecord {
        RunRecord {
            realization_id: id,
            t: 2.0,
            beta: 0.5,
            log_z_t: Some(-0.123456789012345678),
            o_t: Some(0.7311111111111111),
            m_t: Some(0.011),
            qv_t: Some(0.18277777777777776),
            residual_t: Some(1.5e-5),
            fixed_t_overlap: None,
            boundary_mass: Some(0.0),
            failed: false,
            failed_step: None,
        }
    }

    fn header() -> RecordsHeader {
        RecordsHeader {
            schema: RECORDS_SCHEMA.to_string(),
            config_hash: "abc123".into(),
            master_seed: 42,
            tool_version: "0.1.0".into(),
        }
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let recs: Vec<RunRecord> = (0..5).map(sample_record).collect();
        let mut buf = Vec::new();
        write_records(&mut buf, &header(), &recs).unwrap();
        let (h, back) = read_records(&mut BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(h, header());
        assert_eq!(back, recs);
    }

    #[test]
    fn line_has_exactly_documented_fields() {
        let line = sample_record(3).to_json_line();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        let obj = v.as_object().unwrap();
        let expected = [
            "realization_id",
            "T",
            "beta",
            "log_Z_T",
            "O_T",
            "M_T",
            "qv_T",
            "residual_T",
            "fixed_T_overlap",
            "boundary_mass",
            "failed",
        ];
        assert_eq!(obj.len(), expected.len());
        // field order is part of the documented layout; check raw positions
        let mut last = 0;
        for key in expected {
            assert!(obj.contains_key(key), "missing {key}");
            let pos = line.find(&format!("\"{key}\":")).unwrap();
            assert!(
                pos > last || key == "realization_id",
                "order broken at {key}"
            );
            last = pos;
        }
        assert!(obj["fixed_T_overlap"].is_null());
    }

    #[test]
    fn truncated_line_reports_byte_offset() {
        let recs: Vec<RunRecord> = (0..3).map(sample_record).collect();
        let mut buf = Vec::new();
        write_records(&mut buf, &header(), &recs).unwrap();
        // chop the trailing newline and some bytes
        buf.truncate(buf.len() - 10);
        let err = read_records(&mut BufReader::new(buf.as_slice())).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("byte offset"), "{msg}");
    }

    #[test]
    fn corrupt_line_is_an_io_error() {
        let mut buf = Vec::new();
        write_records(&mut buf, &header(), &[sample_record(0)]).unwrap();
        buf.extend_from_slice(b"{not json}\n");
        assert!(read_records(&mut BufReader::new(buf.as_slice())).is_err());
    }

    #[test]
    fn failed_record_serializes_nulls() {
        let mut r = sample_record(9);
        r.failed = true;
        r.log_z_t = None;
        r.o_t = Some(f64::NAN);
        let line = r.to_json_line();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert!(v["log_Z_T"].is_null());
        assert!(v["O_T"].is_null());
        assert_eq!(v["failed"], serde_json::Value::Bool(true));
    }
}
