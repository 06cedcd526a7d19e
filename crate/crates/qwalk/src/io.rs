//! Plain-text formats.
//!
//! * Adjacency: first line `n_vertices`, then one `u v` pair per line
//!   (0-based, `u < v`); the writer sorts edges lexicographically.
//! * Distribution: CSV with header `label,probability`; lattice labels are
//!   coordinates joined by `:`.
//! * Samples: CSV with a single `outcome` column holding labels, plus a JSON
//!   sidecar with the seed and the source descriptor.

use std::io::{BufRead, Write};

use qwalk_core::analysis::{Distribution, SampleSet};
use qwalk_core::substrate::from_adjacency;
use qwalk_core::Substrate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn read_adjacency(reader: impl BufRead) -> Result<Substrate> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::Parse("adjacency: empty input".into()))?;
    let first = first.map_err(|e| Error::Parse(format!("adjacency: {e}")))?;
    let n: usize = first
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("adjacency line 1: expected vertex count, got {first:?}")))?;
    let mut edges = Vec::new();
    for (lineno, line) in lines {
        let line = line.map_err(|e| Error::Parse(format!("adjacency: {e}")))?;
        let mut fields = line.split_whitespace().map(str::parse::<usize>);
        match (fields.next(), fields.next(), fields.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
            _ => {
                return Err(Error::Parse(format!(
                    "adjacency line {lineno}: expected `u v`, got {line:?}"
                )))
            }
        }
    }
    Ok(from_adjacency(&edges, n)?)
}

pub fn write_adjacency(mut w: impl Write, substrate: &Substrate) -> std::io::Result<()> {
    writeln!(w, "{}", substrate.n_vertices())?;
    for (u, v) in substrate.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

pub fn write_distribution(w: impl Write, dist: &Distribution) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["label", "probability"])?;
    for (i, p) in dist.probabilities().iter().enumerate() {
        csv.write_record([dist.labels().label(i), p.to_string()])?;
    }
    csv.flush()
}

/// Labels and probabilities of a distribution file, in file order.
pub fn read_distribution(r: impl std::io::Read) -> Result<Vec<(String, f64)>> {
    let mut csv = csv::Reader::from_reader(r);
    let headers = csv
        .headers()
        .map_err(|e| Error::Parse(format!("distribution: {e}")))?;
    if headers != vec!["label", "probability"] {
        return Err(Error::Parse(format!("distribution: unexpected header {headers:?}")));
    }
    csv.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Parse(format!("distribution: {e}")))?;
            let p = rec[1]
                .parse()
                .map_err(|_| Error::Parse(format!("distribution: bad probability {:?}", &rec[1])))?;
            Ok((rec[0].to_string(), p))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub seed: u64,
    pub source: String,
    pub count: usize,
}

/// Writes the outcome CSV and returns the sidecar describing it.
pub fn write_samples(w: impl Write, samples: &SampleSet, dist: &Distribution) -> std::io::Result<SampleSidecar> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["outcome"])?;
    for &i in &samples.outcomes {
        csv.write_record([dist.labels().label(i)])?;
    }
    csv.flush()?;
    Ok(SampleSidecar {
        seed: samples.seed,
        source: samples.source.clone(),
        count: samples.outcomes.len(),
    })
}
