use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{tokenize, Category, ClickLog, ClickRecord, Corpus, Intent, Product, Query, Taxonomy};
use crate::error::{Error, Result};

pub const TAXONOMY_FILE: &str = "taxonomy.tsv";
pub const QUERIES_FILE: &str = "queries.tsv";
pub const CLICKS_FILE: &str = "clicks.tsv";

const CATEGORY_HEADER: &str = "category_id\tname";
const PRODUCT_HEADER: &str = "pid\ttokens\tcategory_ids";
const QUERY_HEADER: &str = "query_id\ttext\tintent\tcategory_ids";
const CLICK_HEADER: &str = "query_id\tpid\tcount";

pub(crate) fn join_ids(ids: &[usize]) -> String {
    if ids.is_empty() {
        return "-".to_string();
    }
    ids.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Parses a comma-separated id list; `-` and the empty string are the
/// empty set. Output is sorted and deduplicated.
pub(crate) fn parse_ids(field: &str) -> std::result::Result<Vec<usize>, String> {
    let field = field.trim();
    if field.is_empty() || field == "-" {
        return Ok(Vec::new());
    }
    let mut ids = field
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad id '{s}' in list '{field}'"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

pub(crate) fn parse_field<T: std::str::FromStr>(
    field: &str,
    what: &str,
) -> std::result::Result<T, String> {
    field
        .trim()
        .parse::<T>()
        .map_err(|_| format!("bad {what} '{field}'"))
}

/// Line-oriented TSV reader. Line numbers are 1-based.
pub(crate) struct TsvLines<'a> {
    path: PathBuf,
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> TsvLines<'a> {
    pub(crate) fn new(path: &Path, text: &'a str) -> Self {
        Self {
            path: path.to_path_buf(),
            lines: text.lines().enumerate(),
        }
    }

    pub(crate) fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn expect_header(&mut self, header: &str) -> Result<()> {
        match self.lines.next() {
            Some((_, l)) if l.trim_end_matches('\r') == header => Ok(()),
            Some((i, l)) => Err(self.err(i + 1, format!("expected header '{header}', found '{l}'"))),
            None => Err(self.err(1, format!("missing header '{header}'"))),
        }
    }

    /// Next non-empty line split on tabs, with its line number.
    pub(crate) fn next_record(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, l) in self.lines.by_ref() {
            let l = l.trim_end_matches('\r');
            if l.is_empty() {
                continue;
            }
            return Some((i + 1, l.split('\t').collect()));
        }
        None
    }

    pub(crate) fn fields<'b>(
        &self,
        line: usize,
        fields: &'b [&'a str],
        n: usize,
    ) -> Result<&'b [&'a str]> {
        if fields.len() != n {
            return Err(self.err(line, format!("expected {n} fields, found {}", fields.len())));
        }
        Ok(fields)
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn check_text(s: &str) -> Result<()> {
    if s.contains(['\t', '\n', '\r']) {
        return Err(Error::Format(format!("field '{s}' contains a tab or newline")));
    }
    Ok(())
}

pub fn write_taxonomy(path: &Path, taxonomy: &Taxonomy) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{CATEGORY_HEADER}")?;
    for c in &taxonomy.categories {
        check_text(&c.name)?;
        writeln!(w, "{}\t{}", c.id, c.name)?;
    }
    writeln!(w, "{PRODUCT_HEADER}")?;
    for p in &taxonomy.products {
        let tokens = p.tokens.join(" ");
        check_text(&tokens)?;
        writeln!(w, "{}\t{}\t{}", p.pid, tokens, join_ids(&p.categories))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_queries(path: &Path, queries: &[Query]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{QUERY_HEADER}")?;
    for q in queries {
        check_text(&q.text)?;
        writeln!(w, "{}\t{}\t{}\t{}", q.id, q.text, q.intent, join_ids(&q.categories))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_clicks(path: &Path, clicks: &ClickLog) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{CLICK_HEADER}")?;
    for r in &clicks.records {
        writeln!(w, "{}\t{}\t{}", r.query_id, r.pid, r.count)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the three corpus files into `dir`, creating it if needed.
pub fn write_corpus(dir: &Path, corpus: &Corpus) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_taxonomy(&dir.join(TAXONOMY_FILE), &corpus.taxonomy)?;
    write_queries(&dir.join(QUERIES_FILE), &corpus.queries)?;
    write_clicks(&dir.join(CLICKS_FILE), &corpus.clicks)
}

pub fn read_taxonomy(path: &Path) -> Result<Taxonomy> {
    let text = fs::read_to_string(path)?;
    let mut r = TsvLines::new(path, &text);
    r.expect_header(CATEGORY_HEADER)?;
    let mut taxonomy = Taxonomy::default();
    let mut in_products = false;
    while let Some((line, fields)) = r.next_record() {
        if !in_products {
            if fields.join("\t") == PRODUCT_HEADER {
                in_products = true;
                continue;
            }
            let f = r.fields(line, &fields, 2)?;
            let id = parse_field(f[0], "category id").map_err(|m| r.err(line, m))?;
            taxonomy.categories.push(Category {
                id,
                name: f[1].to_string(),
            });
        } else {
            let f = r.fields(line, &fields, 3)?;
            let pid = parse_field(f[0], "pid").map_err(|m| r.err(line, m))?;
            let categories = parse_ids(f[2]).map_err(|m| r.err(line, m))?;
            taxonomy.products.push(Product {
                pid,
                tokens: tokenize(f[1]),
                categories,
            });
        }
    }
    if !in_products {
        return Err(r.err(text.lines().count().max(1), format!("missing header '{PRODUCT_HEADER}'")));
    }
    Ok(taxonomy)
}

pub fn read_queries(path: &Path) -> Result<Vec<Query>> {
    let text = fs::read_to_string(path)?;
    let mut r = TsvLines::new(path, &text);
    r.expect_header(QUERY_HEADER)?;
    let mut out = Vec::new();
    while let Some((line, fields)) = r.next_record() {
        let f = r.fields(line, &fields, 4)?;
        let id = parse_field(f[0], "query id").map_err(|m| r.err(line, m))?;
        let intent: Intent = f[2].trim().parse().map_err(|m: String| r.err(line, m))?;
        let categories = parse_ids(f[3]).map_err(|m| r.err(line, m))?;
        let tokens = tokenize(f[1]);
        if tokens.is_empty() {
            return Err(r.err(line, "empty query text"));
        }
        out.push(Query {
            id,
            text: f[1].to_string(),
            tokens,
            intent,
            categories,
            ambiguous: false,
        });
    }
    Ok(out)
}

pub fn read_clicks(path: &Path) -> Result<ClickLog> {
    let text = fs::read_to_string(path)?;
    let mut r = TsvLines::new(path, &text);
    r.expect_header(CLICK_HEADER)?;
    let mut records = Vec::new();
    while let Some((line, fields)) = r.next_record() {
        let f = r.fields(line, &fields, 3)?;
        records.push(ClickRecord {
            query_id: parse_field(f[0], "query id").map_err(|m| r.err(line, m))?,
            pid: parse_field(f[1], "pid").map_err(|m| r.err(line, m))?,
            count: parse_field(f[2], "click count").map_err(|m| r.err(line, m))?,
        });
    }
    Ok(ClickLog { records })
}

/// Reads a corpus written by [`write_corpus`]. The generator's ambiguity
/// flags are not persisted and come back as `false`.
pub fn read_corpus(dir: &Path) -> Result<Corpus> {
    let taxonomy = read_taxonomy(&dir.join(TAXONOMY_FILE))?;
    let queries = read_queries(&dir.join(QUERIES_FILE))?;
    let clicks = read_clicks(&dir.join(CLICKS_FILE))?;
    Corpus::new(taxonomy, queries, clicks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_corpus, CorpusConfig};

    #[test]
    fn round_trip() {
        let corpus = generate_corpus(&CorpusConfig {
            n_queries: 500,
            ..CorpusConfig::desk(11)
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &corpus).unwrap();
        let back = read_corpus(dir.path()).unwrap();
        assert_eq!(back.taxonomy, corpus.taxonomy);
        assert_eq!(back.clicks, corpus.clicks);
        assert_eq!(back.queries.len(), corpus.queries.len());
        for (a, b) in back.queries.iter().zip(&corpus.queries) {
            assert_eq!((a.id, &a.text, &a.tokens, a.intent), (b.id, &b.text, &b.tokens, b.intent));
            assert_eq!(a.categories, b.categories);
        }
        let raw = fs::read_to_string(dir.path().join(QUERIES_FILE)).unwrap();
        assert!(raw.starts_with(QUERY_HEADER));
        assert!(!raw.contains('\r'));
    }

    #[test]
    fn parse_error_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("clicks.tsv");
        fs::write(&p, "query_id\tpid\tcount\n0\t1\t3\n1\tx\t2\n").unwrap();
        match read_clicks(&p) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("pid"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_header_is_line_one() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("queries.tsv");
        fs::write(&p, "id\ttext\n").unwrap();
        assert!(matches!(read_queries(&p), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn id_lists() {
        assert_eq!(parse_ids("-").unwrap(), Vec::<usize>::new());
        assert_eq!(parse_ids("3,1,3").unwrap(), vec![1, 3]);
        assert!(parse_ids("1,a").is_err());
        assert_eq!(join_ids(&[]), "-");
        assert_eq!(join_ids(&[0, 2]), "0,2");
    }
}
