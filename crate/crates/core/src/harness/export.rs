use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::study::ConvergenceRecord;

pub const CSV_HEADER: [&str; 7] = ["s", "tau", "N", "theta", "seed", "l2_error", "wall_time"];

fn writer_for<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

pub(crate) fn write_header<W: Write>(w: &mut csv::Writer<W>) -> Result<()> {
    w.write_record(CSV_HEADER)?;
    Ok(())
}

/// Writes a header row plus `records` in the given order, replacing `path`
/// atomically.
pub fn write_records(path: &Path, records: &[ConvergenceRecord]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("csv.tmp");
    {
        let mut w = writer_for(fs::File::create(&tmp)?);
        write_header(&mut w)?;
        for r in records {
            w.serialize(r)?;
        }
        w.flush()?;
        w.into_inner().map_err(|e| Error::Io(e.into_error()))?.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Appends one row and flushes it to disk.
pub(crate) fn append_record(file: &mut fs::File, record: &ConvergenceRecord) -> Result<()> {
    let mut w = writer_for(Vec::new());
    w.serialize(record)?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    file.write_all(&bytes)?;
    file.sync_data()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ConvergenceRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::input(format!(
            "{path:?} does not have the columns {}",
            CSV_HEADER.join(",")
        )));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Two whitespace-separated columns `log2_theta log2_median_error`, preceded
/// by a `#` comment naming them.
pub fn write_plot_data(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut text = String::from("# log2_theta log2_median_error\n");
    for (x, y) in points {
        text.push_str(&format!("{x} {y}\n"));
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn read_plot_data(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let mut cols = line.split_whitespace().map(str::parse::<f64>);
        match (cols.next(), cols.next(), cols.next()) {
            (Some(Ok(x)), Some(Ok(y)), None) => out.push((x, y)),
            _ => return Err(Error::input(format!("bad plot-data line '{line}' in {path:?}"))),
        }
    }
    Ok(out)
}
