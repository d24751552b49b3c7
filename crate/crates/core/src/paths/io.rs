use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Grid, SampledPath};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathFormat {
    #[default]
    Csv,
    Bin,
}

impl PathFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            PathFormat::Csv => "csv",
            PathFormat::Bin => "bin",
        }
    }
}

impl FromStr for PathFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(PathFormat::Csv),
            "bin" => Ok(PathFormat::Bin),
            other => Err(Error::Parse(format!("unknown path format `{other}`"))),
        }
    }
}

/// Writes `time,v_1,..,v_d` rows. Floats use the shortest representation
/// that round-trips.
pub fn write_csv<W: Write>(path: &SampledPath, out: W) -> Result<()> {
    let names: Vec<String> = (1..=path.dim()).map(|j| format!("v_{j}")).collect();
    write_csv_with_header(path, &names, out)
}

pub(crate) fn write_csv_with_header<W: Write>(path: &SampledPath, names: &[String], mut out: W) -> Result<()> {
    let mut buf = String::from("time");
    for n in names {
        buf.push(',');
        buf.push_str(n);
    }
    buf.push('\n');
    for (k, t) in path.grid().times().enumerate() {
        write!(buf, "{t}").unwrap();
        for v in path.row(k) {
            write!(buf, ",{v}").unwrap();
        }
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<SampledPath> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))??;
    let dim = header.split(',').count().saturating_sub(1);
    if dim == 0 || !header.starts_with("time") {
        return Err(Error::Parse(format!("bad CSV header `{header}`")));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::Parse(format!("row {}: expected {} fields, got {}", row + 1, dim + 1, fields.len())));
        }
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {}: `{s}`: {e}", row + 1)))
        };
        times.push(parse(fields[0])?);
        for f in &fields[1..] {
            values.push(parse(f)?);
        }
    }
    if times.len() < 2 {
        return Err(Error::Parse("CSV needs at least 2 rows".into()));
    }
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    for (k, &t) in times.iter().enumerate() {
        if (t - (times[0] + k as f64 * dt)).abs() > 1e-6 * dt {
            return Err(Error::Parse(format!("non-uniform time column at row {}", k + 1)));
        }
    }
    SampledPath::new(Grid::new(times[0], dt, n)?, dim, values)
}

/// Little-endian `f64` stream: `d, n, t0, dt`, then the values row-major.
pub fn write_bin<W: Write>(path: &SampledPath, mut out: W) -> Result<()> {
    let g = path.grid();
    let mut buf = Vec::with_capacity(8 * (4 + path.values().len()));
    for h in [path.dim() as f64, g.len() as f64, g.t0(), g.dt()] {
        buf.extend_from_slice(&h.to_le_bytes());
    }
    for v in path.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_bin<R: Read>(mut input: R) -> Result<SampledPath> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 32 || bytes.len() % 8 != 0 {
        return Err(Error::Parse("truncated binary path".into()));
    }
    let floats: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let (dim, n) = (floats[0], floats[1]);
    if dim.fract() != 0.0 || n.fract() != 0.0 || dim < 1.0 || n < 2.0 {
        return Err(Error::Parse(format!("bad binary header d = {dim}, n = {n}")));
    }
    let (dim, n) = (dim as usize, n as usize);
    if floats.len() != 4 + dim * n {
        return Err(Error::Parse(format!("expected {} values, found {}", dim * n, floats.len() - 4)));
    }
    SampledPath::new(Grid::new(floats[2], floats[3], n)?, dim, floats[4..].to_vec())
}
