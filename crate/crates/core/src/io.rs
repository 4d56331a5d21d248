//! CSV readers and writers for edge lists, GDP tables, fitted vectors and
//! metric tables. Floats are written with Rust's shortest round-trip
//! formatting; undefined values are written as empty fields.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::ensembles::{Ensemble, ExpectedProperties, FitnessVectors};
use crate::error::{Error, Result};
use crate::graph::{DirectedFlow, WeightedGraph};
use crate::metrics::NodeProperties;

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input)
}

fn header(rdr: &mut csv::Reader<impl Read>) -> Result<Vec<String>> {
    Ok(rdr.headers()?.iter().map(str::to_owned).collect())
}

fn parse_f64(field: &str, what: &str, line: u64) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: {what} {field:?} is not a number")))
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Reads directed flows from a `source,target,volume` table. Undirected
/// `i,j,w` tables (as written by [`write_graph`]) are accepted as well.
pub fn read_flows<R: Read>(input: R) -> Result<Vec<DirectedFlow>> {
    let mut rdr = reader(input);
    let cols = header(&mut rdr)?;
    if cols.is_empty() {
        return Ok(Vec::new());
    }
    if cols != ["source", "target", "volume"] && cols != ["i", "j", "w"] {
        return Err(Error::Parse(format!(
            "edge header must be source,target,volume, got {}",
            cols.join(",")
        )));
    }
    let mut flows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        flows.push(DirectedFlow::new(
            &record[0],
            &record[1],
            parse_f64(&record[2], "volume", line)?,
        ));
    }
    Ok(flows)
}

/// Reads a `country,gdp` table, keeping file order.
pub fn read_gdp<R: Read>(input: R) -> Result<Vec<(String, f64)>> {
    let mut rdr = reader(input);
    let cols = header(&mut rdr)?;
    if cols != ["country", "gdp"] {
        return Err(Error::Parse(format!(
            "GDP header must be country,gdp, got {}",
            cols.join(",")
        )));
    }
    let mut rows: Vec<(String, f64)> = Vec::new();
    let mut seen = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        let country = record[0].to_owned();
        if seen.insert(country.clone(), line).is_some() {
            return Err(Error::Parse(format!("line {line}: duplicate country {country:?}")));
        }
        rows.push((country, parse_f64(&record[1], "gdp", line)?));
    }
    Ok(rows)
}

/// Raw GDP values in the order of `labels`.
pub fn align_gdp(rows: &[(String, f64)], labels: &[String]) -> Result<Vec<f64>> {
    let map: HashMap<&str, f64> = rows.iter().map(|(c, g)| (c.as_str(), *g)).collect();
    labels
        .iter()
        .map(|l| map.get(l.as_str()).copied().ok_or_else(|| Error::UnknownNode(l.clone())))
        .collect()
}

/// Undirected edge list `i,j,w` with node labels, one row per linked pair.
pub fn write_graph<W: Write>(output: W, graph: &WeightedGraph) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(output);
    wtr.write_record(["i", "j", "w"])?;
    for (i, j, w) in graph.edges() {
        wtr.write_record([graph.label(i), graph.label(j), &w.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_metrics<W: Write>(output: W, labels: &[String], rows: &[NodeProperties]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(output);
    wtr.write_record(["node", "k", "s", "annd", "clustering", "anns", "wclustering"])?;
    for (label, r) in labels.iter().zip(rows) {
        wtr.write_record([
            label.clone(),
            r.k.to_string(),
            r.s.to_string(),
            opt(r.annd),
            opt(r.clustering),
            opt(r.anns),
            opt(r.wclustering),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Metrics schema with a leading `model` column.
pub fn write_expected<W: Write>(
    output: W,
    model: &str,
    labels: &[String],
    rows: &[ExpectedProperties],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(output);
    wtr.write_record([
        "model",
        "node",
        "k",
        "s",
        "annd",
        "clustering",
        "anns",
        "wclustering",
    ])?;
    for (label, r) in labels.iter().zip(rows) {
        wtr.write_record([
            model.to_owned(),
            label.clone(),
            r.k.to_string(),
            r.s.to_string(),
            opt(r.annd),
            opt(r.clustering),
            opt(r.anns),
            opt(r.wclustering),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `i,j,p,expected_w` for every unordered pair.
pub fn write_pairs<W, M>(output: W, labels: &[String], model: &M) -> Result<()>
where
    W: Write,
    M: Ensemble + ?Sized,
{
    let mut wtr = csv::Writer::from_writer(output);
    wtr.write_record(["i", "j", "p", "expected_w"])?;
    for i in 0..model.n() {
        for j in (i + 1)..model.n() {
            let pair = model.pair(i, j);
            wtr.write_record([
                labels[i].clone(),
                labels[j].clone(),
                pair.p.to_string(),
                pair.expected_w.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Fitted vectors: `node,z` (BCM), `node,x,y,xy` (ECM) or `node,z,y` (TS).
/// The ECM `xy` column is the stored link propensity; `x` is empty where
/// `y = 0` on a linked node.
pub fn write_fitness<W: Write>(output: W, labels: &[String], fit: &FitnessVectors) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(output);
    match fit {
        FitnessVectors::Bcm { z } => {
            wtr.write_record(["node", "z"])?;
            for (l, v) in labels.iter().zip(z) {
                wtr.write_record([l.clone(), v.to_string()])?;
            }
        }
        FitnessVectors::Ecm { xy, y } => {
            wtr.write_record(["node", "x", "y", "xy"])?;
            let x = fit.ecm_x().unwrap_or_default();
            for (i, l) in labels.iter().enumerate() {
                wtr.write_record([l.clone(), opt(x[i]), y[i].to_string(), xy[i].to_string()])?;
            }
        }
        FitnessVectors::Ts { z, y } => {
            wtr.write_record(["node", "z", "y"])?;
            for (i, l) in labels.iter().enumerate() {
                wtr.write_record([l.clone(), z[i].to_string(), y[i].to_string()])?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a table written by [`write_fitness`]; the model is inferred from
/// the header. Values are validated.
pub fn read_fitness<R: Read>(input: R) -> Result<(Vec<String>, FitnessVectors)> {
    let mut rdr = reader(input);
    let cols = header(&mut rdr)?;
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut labels = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); 2];
    let picks: &[usize] = match cols.as_slice() {
        ["node", "z"] => &[1],
        ["node", "x", "y", "xy"] => &[3, 2],
        ["node", "z", "y"] => &[1, 2],
        _ => {
            return Err(Error::Parse(format!(
                "unrecognized fitness header {}",
                cols.join(",")
            )))
        }
    };
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        labels.push(record[0].to_owned());
        for (slot, &col) in picks.iter().enumerate() {
            columns[slot].push(parse_f64(&record[col], cols[col], line)?);
        }
    }
    let [first, second]: [Vec<f64>; 2] = columns.try_into().expect("two columns");
    let fit = match cols.as_slice() {
        ["node", "z"] => FitnessVectors::Bcm { z: first },
        ["node", "x", "y", "xy"] => FitnessVectors::Ecm {
            xy: first,
            y: second,
        },
        _ => FitnessVectors::Ts {
            z: first,
            y: second,
        },
    };
    fit.validate()?;
    Ok((labels, fit))
}
