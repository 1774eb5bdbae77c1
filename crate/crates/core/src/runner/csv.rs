//! CSV emission and parsing for the sampled series.
//!
//! Header: `t,E,Etilde,p,speed,dist_V,gradnorm_Vp`, then one `I_nu_<nu>`
//! column per configured nu. Values use the shortest decimal form that
//! parses back to the same bits; lines end with LF.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::diagnostics::EnergyRecord;
use crate::{Error, Result};

pub const BASE_HEADER: &[&str] = &["t", "E", "Etilde", "p", "speed", "dist_V", "gradnorm_Vp"];

pub fn header(nu_list: &[f64]) -> String {
    let mut h = BASE_HEADER.join(",");
    for nu in nu_list {
        // Debug float formatting keeps the trailing `.0` on integral rates.
        h.push_str(&format!(",I_nu_{nu:?}"));
    }
    h
}

pub fn write_csv<W: Write>(record: &EnergyRecord, mut out: W) -> Result<()> {
    writeln!(out, "{}", header(&record.nu_list))?;
    for k in 0..record.len() {
        write!(
            out,
            "{},{},{},{},{},{},{}",
            record.t[k],
            record.energy[k],
            record.etilde[k],
            record.anchor[k],
            record.speed[k],
            record.dist_v[k],
            record.gradnorm_vp[k]
        )?;
        for series in &record.velocity_integrals {
            write!(out, ",{}", series[k])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn emit_csv(record: &EnergyRecord, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut writer = std::io::BufWriter::new(file);
    write_csv(record, &mut writer)?;
    writer.flush()?;
    Ok(())
}

/// Parsed CSV series (diagnostic columns only; snapshots are not persisted).
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSeries {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub etilde: Vec<f64>,
    pub anchor: Vec<f64>,
    pub speed: Vec<f64>,
    pub dist_v: Vec<f64>,
    pub gradnorm_vp: Vec<f64>,
    pub nu_list: Vec<f64>,
    pub velocity_integrals: Vec<Vec<f64>>,
}

pub fn parse_csv<R: BufRead>(reader: R) -> Result<CsvSeries> {
    let mut lines = reader.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::invalid("empty CSV"))??;
    let cols: Vec<&str> = header_line.trim_end().split(',').collect();
    if cols.len() < BASE_HEADER.len() || cols[..BASE_HEADER.len()] != *BASE_HEADER {
        return Err(Error::invalid(format!("unexpected CSV header `{header_line}`")));
    }
    let mut nu_list = Vec::new();
    for col in &cols[BASE_HEADER.len()..] {
        let nu = col
            .strip_prefix("I_nu_")
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| Error::invalid(format!("unexpected CSV column `{col}`")))?;
        nu_list.push(nu);
    }
    let mut series = CsvSeries {
        t: Vec::new(),
        energy: Vec::new(),
        etilde: Vec::new(),
        anchor: Vec::new(),
        speed: Vec::new(),
        dist_v: Vec::new(),
        gradnorm_vp: Vec::new(),
        velocity_integrals: vec![Vec::new(); nu_list.len()],
        nu_list,
    };
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::invalid(format!(
                "row {} has {} fields, header has {}",
                idx + 2,
                fields.len(),
                cols.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::invalid(format!("row {}: bad number `{s}`", idx + 2)))
        };
        series.t.push(parse(fields[0])?);
        series.energy.push(parse(fields[1])?);
        series.etilde.push(parse(fields[2])?);
        series.anchor.push(parse(fields[3])?);
        series.speed.push(parse(fields[4])?);
        series.dist_v.push(parse(fields[5])?);
        series.gradnorm_vp.push(parse(fields[6])?);
        for (j, f) in fields[BASE_HEADER.len()..].iter().enumerate() {
            series.velocity_integrals[j].push(parse(f)?);
        }
    }
    Ok(series)
}
