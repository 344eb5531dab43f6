use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::{LabeledDataset, Provenance, Record, Split};
use crate::corpus::io::{join_ids, parse_field, parse_ids, TsvLines};
use crate::corpus::{Corpus, Intent};
use crate::error::{Error, Result};

pub const DATASET_HEADER: &str = "record_id\tquery_id\tsplit\tintent\tcategory_ids";

pub fn write_dataset(path: &Path, ds: &LabeledDataset) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{DATASET_HEADER}")?;
    for r in &ds.records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            r.record_id,
            r.query_id,
            r.split,
            r.intent,
            join_ids(&r.categories)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `dataset.tsv`, taking tokens from `corpus`. Provenance is not
/// persisted in the table and reads back as [`Provenance::Seed`].
pub fn read_dataset(path: &Path, corpus: &Corpus) -> Result<LabeledDataset> {
    let text = fs::read_to_string(path)?;
    let mut r = TsvLines::new(path, &text);
    r.expect_header(DATASET_HEADER)?;
    let mut records = Vec::new();
    while let Some((line, fields)) = r.next_record() {
        let f = r.fields(line, &fields, 5)?;
        let record_id = parse_field(f[0], "record id").map_err(|m| r.err(line, m))?;
        let query_id = parse_field(f[1], "query id").map_err(|m| r.err(line, m))?;
        let split: Split = f[2].trim().parse().map_err(|m: String| r.err(line, m))?;
        let intent: Intent = f[3].trim().parse().map_err(|m: String| r.err(line, m))?;
        let categories = parse_ids(f[4]).map_err(|m| r.err(line, m))?;
        let q = corpus
            .query(query_id)
            .ok_or_else(|| r.err(line, format!("query {query_id} is not in the corpus")))?;
        records.push(Record {
            record_id,
            query_id,
            tokens: q.tokens.clone(),
            intent,
            categories,
            split,
            provenance: Provenance::Seed,
        });
    }
    let mut ids: Vec<usize> = records.iter().map(|r| r.record_id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Format(format!("duplicate record id in {}", path.display())));
    }
    Ok(LabeledDataset::new(records))
}

pub fn write_provenance<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}
