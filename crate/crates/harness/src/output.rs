//! CSV emission. Headers are written explicitly so an empty result is still a valid file.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

pub fn write_csv<T: Serialize, W: Write>(out: W, header: &[&str], rows: &[T]) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<T: Serialize>(header: &[&str], rows: &[T]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit<T: Serialize>(path: Option<&Path>, header: &[&str], rows: &[T]) -> anyhow::Result<()> {
    match path {
        Some(p) => write_csv(File::create(p)?, header, rows),
        None => write_csv(io::stdout().lock(), header, rows),
    }
}
