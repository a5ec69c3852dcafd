use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::records::ResultSet;

pub const COMPUTE_FILE: &str = "compute.csv";
pub const LINK_FILE: &str = "link.csv";
pub const DROP_FILE: &str = "drop.csv";
pub const CONTROL_FILE: &str = "control.csv";

const COMPUTE_HEADER: [&str; 15] = [
    "id",
    "type",
    "app",
    "module",
    "message",
    "DES.src",
    "DES.dst",
    "TOPO.src",
    "TOPO.dst",
    "module.src",
    "service",
    "time_in",
    "time_out",
    "time_emit",
    "time_reception",
];
const LINK_HEADER: [&str; 10] = [
    "id", "type", "src", "dst", "app", "latency", "message", "ctime", "size", "buffer",
];
const DROP_HEADER: [&str; 4] = ["id", "reason", "ctime", "context"];
const CONTROL_HEADER: [&str; 7] = ["time", "event", "des", "node", "name", "value", "detail"];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: unexpected header {found:?}")]
    Header { path: PathBuf, found: Vec<String> },
}

fn write_file<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), CsvError> {
    let csv_err = |source| CsvError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(|source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file<T: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<T>, CsvError> {
    let csv_err = |source| CsvError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(|source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut r = csv::Reader::from_reader(BufReader::new(file));
    let found = r.headers().map_err(csv_err)?;
    if found.iter().ne(header.iter().copied()) {
        return Err(CsvError::Header {
            path: path.to_path_buf(),
            found: found.iter().map(str::to_string).collect(),
        });
    }
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

/// Writes the compute, link, drop and control files into `dir`.
pub fn write_results(dir: &Path, results: &ResultSet) -> Result<(), CsvError> {
    write_file(&dir.join(COMPUTE_FILE), &COMPUTE_HEADER, &results.compute)?;
    write_file(&dir.join(LINK_FILE), &LINK_HEADER, &results.links)?;
    write_file(&dir.join(DROP_FILE), &DROP_HEADER, &results.drops)?;
    write_file(&dir.join(CONTROL_FILE), &CONTROL_HEADER, &results.control)
}

/// Reads back a results directory. Missing drop or control files are
/// treated as empty; failure reports and link traces are not persisted.
pub fn read_results(dir: &Path) -> Result<ResultSet, CsvError> {
    let optional = |name: &str| dir.join(name).exists();
    Ok(ResultSet {
        compute: read_file(&dir.join(COMPUTE_FILE), &COMPUTE_HEADER)?,
        links: read_file(&dir.join(LINK_FILE), &LINK_HEADER)?,
        drops: if optional(DROP_FILE) {
            read_file(&dir.join(DROP_FILE), &DROP_HEADER)?
        } else {
            Vec::new()
        },
        control: if optional(CONTROL_FILE) {
            read_file(&dir.join(CONTROL_FILE), &CONTROL_HEADER)?
        } else {
            Vec::new()
        },
        ..ResultSet::default()
    })
}
