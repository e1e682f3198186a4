use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlerRecord {
    pub ebn0_db: f64,
    pub frames: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub decoder: String,
    pub seed: u64,
    /// Not persisted; wall time varies from run to run.
    #[serde(skip)]
    pub wallclock_s: f64,
}

impl BlerRecord {
    pub fn new(
        ebn0_db: f64,
        frames: u64,
        block_errors: u64,
        decoder: &str,
        seed: u64,
        wallclock_s: f64,
    ) -> Self {
        assert!(block_errors <= frames && frames > 0);
        BlerRecord {
            ebn0_db,
            frames,
            block_errors,
            bler: block_errors as f64 / frames as f64,
            decoder: decoder.to_string(),
            seed,
            wallclock_s,
        }
    }
}

/// Writes records as CSV, replacing `path` atomically.
pub fn write_csv(path: &Path, records: &[BlerRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to write".into()));
    }
    let tmp = path.with_extension("csv.partial");
    {
        let mut w = csv::Writer::from_path(&tmp)?;
        for r in records {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<BlerRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let records = r
        .deserialize()
        .collect::<std::result::Result<Vec<BlerRecord>, _>>()?;
    for rec in &records {
        if rec.block_errors > rec.frames {
            return Err(Error::Config(format!(
                "inconsistent record at {} dB",
                rec.ebn0_db
            )));
        }
    }
    Ok(records)
}

/// `ebn0 bler` blocks, one per decoder in order of first appearance, each
/// headed by `# <decoder>` and separated by two blank lines.
pub fn format_plotdata(records: &[BlerRecord]) -> String {
    let mut decoders: Vec<&str> = Vec::new();
    for r in records {
        if !decoders.contains(&r.decoder.as_str()) {
            decoders.push(&r.decoder);
        }
    }
    let mut out = String::new();
    for (i, d) in decoders.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        writeln!(out, "# {d}").unwrap();
        for r in records.iter().filter(|r| r.decoder == *d) {
            writeln!(out, "{} {}", r.ebn0_db, r.bler).unwrap();
        }
    }
    out
}

pub fn write_plotdata(path: &Path, records: &[BlerRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to write".into()));
    }
    std::fs::write(path, format_plotdata(records))?;
    Ok(())
}
