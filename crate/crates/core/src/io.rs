//! CSV and JSON readers and writers. Numbers are written with 12
//! significant digits.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::cohomology::{Barcode, Cochain, Coefficients};
use crate::complex::{DistanceMatrix, PointCloud};
use crate::error::{Error, Result};
use crate::mapping::CoordinateTable;
use crate::optimizer::RunReport;
use crate::synth::Truth;

/// `%.12g`-style formatting.
pub fn g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_row(record: &csv::StringRecord) -> Option<Vec<f64>> {
    record
        .iter()
        .map(|f| f.trim().parse::<f64>().ok())
        .collect()
}

/// Numeric CSV rows; a first row that does not parse is taken as a header.
pub fn read_numeric_rows(r: impl Read) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r);
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        match parse_row(&rec) {
            Some(row) => rows.push(row),
            None if i == 0 => {}
            None => {
                return Err(Error::invalid(format!(
                    "non-numeric value on line {}",
                    i + 1
                )))
            }
        }
    }
    Ok(rows)
}

pub fn read_point_cloud(r: impl Read) -> Result<PointCloud> {
    PointCloud::new(read_numeric_rows(r)?)
}

pub fn read_distance_matrix(r: impl Read) -> Result<DistanceMatrix> {
    DistanceMatrix::new(read_numeric_rows(r)?)
}

fn writer(w: impl Write) -> csv::Writer<impl Write> {
    csv::WriterBuilder::new().from_writer(w)
}

pub fn write_point_cloud(pc: &PointCloud, w: impl Write) -> Result<()> {
    let mut out = writer(w);
    for p in pc.points() {
        out.write_record(p.iter().map(|x| g12(*x)))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_coordinates(table: &CoordinateTable, w: impl Write) -> Result<()> {
    let mut out = writer(w);
    match table {
        CoordinateTable::Spherical(rows) => {
            out.write_record(["vertex_id", "azimuth", "elevation"])?;
            for &(id, az, el) in rows {
                out.write_record([id.to_string(), g12(az), g12(el)])?;
            }
        }
        CoordinateTable::Circular(rows) => {
            out.write_record(["vertex_id", "angle"])?;
            for &(id, a) in rows {
                out.write_record([id.to_string(), g12(a)])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a table written by [`write_coordinates`] or [`write_truth`]; the
/// number of columns decides the kind.
pub fn read_coordinates(r: impl Read) -> Result<CoordinateTable> {
    let rows = read_numeric_rows(r)?;
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != width) {
        return Err(Error::invalid("coordinate rows differ in length"));
    }
    let id = |x: f64| -> Result<usize> {
        if x >= 0.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(Error::invalid(format!("bad vertex id {x}")))
        }
    };
    match width {
        2 => Ok(CoordinateTable::Circular(
            rows.iter()
                .map(|r| Ok((id(r[0])?, r[1])))
                .collect::<Result<_>>()?,
        )),
        3 => Ok(CoordinateTable::Spherical(
            rows.iter()
                .map(|r| Ok((id(r[0])?, r[1], r[2])))
                .collect::<Result<_>>()?,
        )),
        0 => Err(Error::invalid("empty coordinate table")),
        n => Err(Error::invalid(format!("expected 2 or 3 columns, got {n}"))),
    }
}

pub fn truth_table(truth: &Truth) -> CoordinateTable {
    match truth {
        Truth::Angles(v) => CoordinateTable::Circular(v.iter().copied().enumerate().collect()),
        Truth::AzEl(v) => {
            CoordinateTable::Spherical(v.iter().enumerate().map(|(i, &(a, e))| (i, a, e)).collect())
        }
    }
}

pub fn write_truth(truth: &Truth, w: impl Write) -> Result<()> {
    write_coordinates(&truth_table(truth), w)
}

pub fn write_labels(labels: &[usize], w: impl Write) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["point_id", "label"])?;
    for (i, l) in labels.iter().enumerate() {
        out.write_record([i.to_string(), l.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_barcode(b: &Barcode, w: impl Write) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["index", "dimension", "birth", "death"])?;
    for (i, bar) in b.bars.iter().enumerate() {
        out.write_record([
            i.to_string(),
            bar.dimension.to_string(),
            g12(bar.birth),
            g12(bar.death),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RepresentativeDoc {
    pub index: usize,
    pub dimension: usize,
    pub prime: u32,
    pub birth: f64,
    /// `None` for essential bars.
    pub death: Option<f64>,
    pub cocycle: std::collections::BTreeMap<String, i64>,
}

pub fn representatives_json(b: &Barcode) -> Result<String> {
    let docs: Vec<RepresentativeDoc> = b
        .bars
        .iter()
        .enumerate()
        .map(|(i, bar)| RepresentativeDoc {
            index: i,
            dimension: bar.dimension,
            prime: b.prime,
            birth: bar.birth,
            death: bar.death.is_finite().then_some(bar.death),
            cocycle: bar.representative.to_json_map(),
        })
        .collect();
    Ok(serde_json::to_string_pretty(&docs)?)
}

pub fn cochain_json(c: &Cochain) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a> {
        degree: usize,
        coefficients: &'a Coefficients,
        values: std::collections::BTreeMap<String, i64>,
    }
    Ok(serde_json::to_string_pretty(&Doc {
        degree: c.degree(),
        coefficients: &c.domain(),
        values: c.to_json_map(),
    })?)
}

pub fn write_energy_trace(r: &RunReport, w: impl Write) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["iteration", "energy", "center_norm"])?;
    for (i, (e, c)) in r.energy_trace.iter().zip(&r.center_trace).enumerate() {
        out.write_record([i.to_string(), g12(*e), g12(*c)])?;
    }
    out.flush()?;
    Ok(())
}
