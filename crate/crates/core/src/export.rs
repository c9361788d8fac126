//! CSV and binary output formats.
//!
//! CSV files open with comment lines embedding the master seed and config
//! hash, then a header row; floats carry 17 significant digits. Field dumps
//! use a 32-byte binary header (magic, version, d, n, step, dt) followed by
//! row-major little-endian f64 values.

use std::io::{Read, Write};

use crate::ensemble::TestReport;
use crate::error::{Error, Result};

pub const FIELD_MAGIC: u32 = 0x504c_4644; // "PLFD"
pub const FIELD_VERSION: u32 = 1;

/// Write the provenance comment lines and a header row.
pub fn csv_preamble<W: Write>(
    w: &mut W,
    master_seed: u64,
    config_hash: &str,
    tool_version: &str,
    header: &str,
) -> Result<()> {
    writeln!(w, "# master_seed={master_seed}")?;
    writeln!(w, "# config_hash={config_hash}")?;
    writeln!(w, "# tool_version={tool_version}")?;
    writeln!(w, "{header}")?;
    Ok(())
}

pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

/// Summaries CSV: one row per (T, observable accumulator).
pub fn write_summary_rows<W: Write>(
    w: &mut W,
    rows: &[(f64, &str, crate::stats::Accumulator)],
) -> Result<()> {
    for (t, name, acc) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_float(*t),
            name,
            acc.count,
            fmt_float(acc.mean),
            fmt_float(acc.variance()),
            fmt_float(acc.min),
            fmt_float(acc.max),
        )?;
    }
    Ok(())
}

pub const SUMMARY_HEADER: &str = "T,observable,count,mean,variance,min,max";
pub const REPORT_HEADER: &str =
    "name,statistic,threshold,passed,degenerate,sample_size,master_seed,details";

/// Test-report CSV rows.
pub fn write_report_rows<W: Write>(w: &mut W, reports: &[TestReport]) -> Result<()> {
    for r in reports {
        let details = r.details.replace(',', ";").replace('\n', " ");
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.name,
            fmt_float(r.statistic),
            fmt_float(r.threshold),
            r.passed,
            r.degenerate,
            r.sample_size,
            r.master_seed,
            details,
        )?;
    }
    Ok(())
}

/// Dump one field: 32-byte header then `n^d` little-endian f64 values.
pub fn write_field<W: Write>(
    w: &mut W,
    d: u32,
    n: u32,
    step: u64,
    dt: f64,
    values: &[f64],
) -> Result<()> {
    if values.len() != (n as usize).pow(d) {
        return Err(Error::usage("field length does not match header"));
    }
    w.write_all(&FIELD_MAGIC.to_le_bytes())?;
    w.write_all(&FIELD_VERSION.to_le_bytes())?;
    w.write_all(&d.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&step.to_le_bytes())?;
    w.write_all(&dt.to_le_bytes())?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Read one field dump written by [`write_field`]; returns
/// `(d, n, step, dt, values)`.
pub fn read_field<R: Read>(r: &mut R) -> Result<(u32, u32, u64, f64, Vec<f64>)> {
    let mut u32buf = [0u8; 4];
    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u32buf)?;
    if u32::from_le_bytes(u32buf) != FIELD_MAGIC {
        return Err(Error::io("bad field magic"));
    }
    r.read_exact(&mut u32buf)?;
    if u32::from_le_bytes(u32buf) != FIELD_VERSION {
        return Err(Error::io("unsupported field version"));
    }
    r.read_exact(&mut u32buf)?;
    let d = u32::from_le_bytes(u32buf);
    r.read_exact(&mut u32buf)?;
    let n = u32::from_le_bytes(u32buf);
    r.read_exact(&mut u64buf)?;
    let step = u64::from_le_bytes(u64buf);
    r.read_exact(&mut u64buf)?;
    let dt = f64::from_le_bytes(u64buf);
    let len = (n as usize).pow(d);
    let mut values = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut u64buf)?;
        values.push(f64::from_le_bytes(u64buf));
    }
    Ok((d, n, step, dt, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_dump_roundtrip() {
        let values: Vec<f64> = (0..64).map(|i| (i as f64).sin()).collect();
        let mut buf = Vec::new();
        write_field(&mut buf, 2, 8, 123, 0.01, &values).unwrap();
        assert_eq!(buf.len(), 32 + 64 * 8);
        let (d, n, step, dt, back) = read_field(&mut buf.as_slice()).unwrap();
        assert_eq!((d, n, step), (2, 8, 123));
        assert_eq!(dt, 0.01);
        assert_eq!(back, values);
    }

    #[test]
    fn field_header_is_32_bytes() {
        let mut buf = Vec::new();
        write_field(&mut buf, 1, 2, 0, 0.5, &[1.0, 2.0]).unwrap();
        assert_eq!(buf.len(), 32 + 16);
    }

    #[test]
    fn float_formatting_has_17_significant_digits() {
        let s = fmt_float(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        let parsed: f64 = s.parse().unwrap();
        assert_eq!(parsed, std::f64::consts::PI);
    }
}
