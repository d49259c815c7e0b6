//! Article records, corpus files and label matrices.
//!
//! A corpus is an ordered collection of literature records, each carrying a
//! title, an abstract and a set of topic labels drawn from a fixed space of
//! seven categories. Corpora are read from and written to CSV or JSONL files
//! with the schema
//!
//! ```text
//! pmid,journal,title,abstract,keywords,pub_type,authors,doi,label
//! ```
//!
//! where `keywords`, `authors` and `label` hold `;`-separated lists. The JSONL
//! form mirrors the same field names, one object per line.

use std::collections::BTreeSet;
use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The seven topic categories, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Topic {
    Mechanism,
    Transmission,
    Diagnosis,
    Treatment,
    Prevention,
    CaseReport,
    EpidemicForecasting,
}

impl Topic {
    /// All topics in canonical order. Column `j` of a [`LabelMatrix`] refers
    /// to `Topic::ALL[j]`.
    pub const ALL: [Topic; 7] = [
        Topic::Mechanism,
        Topic::Transmission,
        Topic::Diagnosis,
        Topic::Treatment,
        Topic::Prevention,
        Topic::CaseReport,
        Topic::EpidemicForecasting,
    ];

    /// Canonical display form, as used in corpus files.
    pub fn as_str(&self) -> &'static str {
        match self {
            Topic::Mechanism => "Mechanism",
            Topic::Transmission => "Transmission",
            Topic::Diagnosis => "Diagnosis",
            Topic::Treatment => "Treatment",
            Topic::Prevention => "Prevention",
            Topic::CaseReport => "Case Report",
            Topic::EpidemicForecasting => "Epidemic Forecasting",
        }
    }

    /// Lowercase, underscore-joined form for file names and CLI flags.
    pub fn slug(&self) -> &'static str {
        match self {
            Topic::Mechanism => "mechanism",
            Topic::Transmission => "transmission",
            Topic::Diagnosis => "diagnosis",
            Topic::Treatment => "treatment",
            Topic::Prevention => "prevention",
            Topic::CaseReport => "case_report",
            Topic::EpidemicForecasting => "epidemic_forecasting",
        }
    }

    /// Position in [`Topic::ALL`].
    pub fn index(&self) -> usize {
        Topic::ALL.iter().position(|t| t == self).unwrap()
    }

    fn valid_names() -> String {
        Topic::ALL
            .iter()
            .map(|t| t.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topic {
    type Err = Error;

    /// Case-insensitive parse; internal whitespace is collapsed and
    /// underscores are treated as spaces, so `Case Report`, `case_report`
    /// and `CASE  REPORT` all name the same topic. `CaseReport` (no
    /// separator) is accepted as well.
    fn from_str(s: &str) -> Result<Topic> {
        let norm: String = s
            .replace('_', " ")
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase();
        match norm.as_str() {
            "mechanism" => Ok(Topic::Mechanism),
            "transmission" => Ok(Topic::Transmission),
            "diagnosis" => Ok(Topic::Diagnosis),
            "treatment" => Ok(Topic::Treatment),
            "prevention" => Ok(Topic::Prevention),
            "case report" | "casereport" => Ok(Topic::CaseReport),
            "epidemic forecasting" | "epidemicforecasting" => Ok(Topic::EpidemicForecasting),
            _ => Err(Error::UnknownLabel {
                label: s.to_string(),
                valid: Topic::valid_names(),
            }),
        }
    }
}

impl Serialize for Topic {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Topic {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Topic, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One literature record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Article {
    /// PMID or DOI; unique within a corpus.
    pub id: String,
    pub journal: String,
    pub title: String,
    /// May be empty; encoded downstream as an empty second sentence.
    pub abstract_text: String,
    pub keywords: Vec<String>,
    pub pub_types: Vec<String>,
    pub authors: Vec<String>,
    pub doi: String,
    pub labels: BTreeSet<Topic>,
}

impl Article {
    /// Minimal constructor for fixtures and tests: id, title, abstract, labels.
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        abstract_text: impl Into<String>,
        labels: impl IntoIterator<Item = Topic>,
    ) -> Article {
        Article {
            id: id.into(),
            journal: String::new(),
            title: title.into(),
            abstract_text: abstract_text.into(),
            keywords: Vec::new(),
            pub_types: Vec::new(),
            authors: Vec::new(),
            doi: String::new(),
            labels: labels.into_iter().collect(),
        }
    }
}

/// Flat on-disk form shared by the CSV and JSONL schemas.
#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    pmid: String,
    #[serde(default)]
    journal: String,
    #[serde(default)]
    title: String,
    #[serde(default, rename = "abstract")]
    abstract_text: String,
    #[serde(default)]
    keywords: String,
    #[serde(default)]
    pub_type: String,
    #[serde(default)]
    authors: String,
    #[serde(default)]
    doi: String,
    /// `;`-separated topic names; may be empty or absent for unlabeled records.
    #[serde(default)]
    label: String,
}

fn split_list(s: &str) -> Vec<String> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(str::to_string)
        .collect()
}

fn join_list(items: &[String]) -> String {
    items.join(";")
}

impl RawRecord {
    fn into_article(self) -> std::result::Result<Article, String> {
        if self.pmid.trim().is_empty() {
            return Err("empty id (pmid)".to_string());
        }
        if self.title.split_whitespace().next().is_none() {
            return Err(format!("article `{}` has an empty title", self.pmid));
        }
        let mut labels = BTreeSet::new();
        for part in split_list(&self.label) {
            let topic: Topic = part.parse().map_err(|e: Error| e.to_string())?;
            labels.insert(topic);
        }
        Ok(Article {
            id: self.pmid,
            journal: self.journal,
            title: self.title,
            abstract_text: self.abstract_text,
            keywords: split_list(&self.keywords),
            pub_types: split_list(&self.pub_type),
            authors: split_list(&self.authors),
            doi: self.doi,
            labels,
        })
    }

    fn from_article(article: &Article) -> RawRecord {
        RawRecord {
            pmid: article.id.clone(),
            journal: article.journal.clone(),
            title: article.title.clone(),
            abstract_text: article.abstract_text.clone(),
            keywords: join_list(&article.keywords),
            pub_type: join_list(&article.pub_types),
            authors: join_list(&article.authors),
            doi: article.doi.clone(),
            label: article
                .labels
                .iter()
                .map(|t| t.as_str())
                .collect::<Vec<_>>()
                .join(";"),
        }
    }
}

/// Corpus file format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<CorpusFormat> {
        match s.to_lowercase().as_str() {
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::InvalidInput(format!(
                "unknown corpus format `{other}` (expected csv or jsonl)"
            ))),
        }
    }
}

impl CorpusFormat {
    /// Guess from a file extension; defaults to CSV.
    pub fn from_path(path: &Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") | Some("json") => CorpusFormat::Jsonl,
            _ => CorpusFormat::Csv,
        }
    }
}

/// An ordered, id-unique collection of articles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub articles: Vec<Article>,
    /// Source file paths, in load order.
    pub provenance: Vec<PathBuf>,
}

impl Corpus {
    /// Build a corpus from in-memory articles, enforcing id uniqueness and
    /// non-emptiness.
    pub fn from_articles(articles: Vec<Article>) -> Result<Corpus> {
        if articles.is_empty() {
            return Err(Error::EmptyCorpus(0));
        }
        let mut seen = HashSet::new();
        for a in &articles {
            if !seen.insert(a.id.clone()) {
                return Err(Error::DuplicateId {
                    id: a.id.clone(),
                    path: PathBuf::from("<memory>"),
                });
            }
        }
        Ok(Corpus {
            articles,
            provenance: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    /// True if at least one article carries a label.
    pub fn has_labels(&self) -> bool {
        self.articles.iter().any(|a| !a.labels.is_empty())
    }
}

/// N×7 binary label matrix aligned to corpus order and [`Topic::ALL`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMatrix {
    rows: Vec<[u8; 7]>,
}

impl LabelMatrix {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[u8; 7] {
        &self.rows[i]
    }

    /// Binary target column for one topic, aligned to corpus order.
    pub fn column(&self, topic: Topic) -> Vec<u8> {
        let j = topic.index();
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn column_sum(&self, topic: Topic) -> usize {
        let j = topic.index();
        self.rows.iter().map(|r| r[j] as usize).sum()
    }
}

/// Per-topic support counts plus the total number of articles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    /// Count of articles carrying each topic, in [`Topic::ALL`] order.
    pub per_topic: [usize; 7],
    /// Number of articles (not label occurrences).
    pub total: usize,
}

/// Load one or more corpus files, concatenated in file order.
///
/// All files must share `format`. With `require_labels` set, any article with
/// an empty label set is an error; otherwise empty label sets are kept (test
/// corpora may omit the label column entirely).
pub fn load_corpus(paths: &[PathBuf], format: CorpusFormat, require_labels: bool) -> Result<Corpus> {
    let mut articles: Vec<Article> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for path in paths {
        let file_articles = match format {
            CorpusFormat::Csv => read_csv(path)?,
            CorpusFormat::Jsonl => read_jsonl(path)?,
        };
        for a in file_articles {
            if !seen.insert(a.id.clone()) {
                return Err(Error::DuplicateId {
                    id: a.id,
                    path: path.clone(),
                });
            }
            if require_labels && a.labels.is_empty() {
                return Err(Error::MissingLabels { id: a.id });
            }
            articles.push(a);
        }
    }
    if articles.is_empty() {
        return Err(Error::EmptyCorpus(paths.len()));
    }
    Ok(Corpus {
        articles,
        provenance: paths.to_vec(),
    })
}

fn read_csv(path: &Path) -> Result<Vec<Article>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file));
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<RawRecord>().enumerate() {
        // Data rows start at line 2, after the header.
        let line = i as u64 + 2;
        let raw = row.map_err(|e| Error::MalformedRecord {
            path: path.to_path_buf(),
            location: e.position().map(|p| p.line()).unwrap_or(line),
            reason: e.to_string(),
        })?;
        let article = raw.into_article().map_err(|reason| Error::MalformedRecord {
            path: path.to_path_buf(),
            location: line,
            reason,
        })?;
        out.push(article);
    }
    Ok(out)
}

fn read_jsonl(path: &Path) -> Result<Vec<Article>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            path: path.to_path_buf(),
            location: line_no,
            reason: e.to_string(),
        })?;
        let article = raw.into_article().map_err(|reason| Error::MalformedRecord {
            path: path.to_path_buf(),
            location: line_no,
            reason,
        })?;
        out.push(article);
    }
    Ok(out)
}

/// Write a corpus back out in the shared schema. A load→write→load round trip
/// is field-identical.
pub fn write_corpus(corpus: &Corpus, path: &Path, format: CorpusFormat) -> Result<()> {
    match format {
        CorpusFormat::Csv => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut writer = csv::Writer::from_writer(BufWriter::new(file));
            for article in &corpus.articles {
                writer
                    .serialize(RawRecord::from_article(article))
                    .map_err(|e| Error::InvalidInput(format!("CSV write failed: {e}")))?;
            }
            writer
                .flush()
                .map_err(|e| Error::io(path, e))?;
        }
        CorpusFormat::Jsonl => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut writer = BufWriter::new(file);
            for article in &corpus.articles {
                let raw = RawRecord::from_article(article);
                let line = serde_json::to_string(&raw)
                    .map_err(|e| Error::InvalidInput(format!("JSON write failed: {e}")))?;
                writeln!(writer, "{line}").map_err(|e| Error::io(path, e))?;
            }
            writer.flush().map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

/// Binary membership matrix: row `i`, column `j` is 1 iff `Topic::ALL[j]` is
/// in the label set of article `i`.
pub fn label_matrix(corpus: &Corpus) -> LabelMatrix {
    let rows = corpus
        .articles
        .iter()
        .map(|a| {
            let mut row = [0u8; 7];
            for topic in &a.labels {
                row[topic.index()] = 1;
            }
            row
        })
        .collect();
    LabelMatrix { rows }
}

/// Per-topic support counts (equal to the column sums of [`label_matrix`]).
pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut per_topic = [0usize; 7];
    for a in &corpus.articles {
        for topic in &a.labels {
            per_topic[topic.index()] += 1;
        }
    }
    CorpusStats {
        per_topic,
        total: corpus.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn toy_two_doc_corpus() -> Corpus {
        Corpus::from_articles(vec![
            Article::new("d1", "virus treatment", "", [Topic::Treatment]),
            Article::new(
                "d2",
                "testing treatment",
                "",
                [Topic::Treatment, Topic::Diagnosis],
            ),
        ])
        .unwrap()
    }

    #[test]
    fn topic_parse_accepts_export_variants() {
        assert_eq!("Treatment".parse::<Topic>().unwrap(), Topic::Treatment);
        assert_eq!("treatment".parse::<Topic>().unwrap(), Topic::Treatment);
        assert_eq!("Case Report".parse::<Topic>().unwrap(), Topic::CaseReport);
        assert_eq!("case_report".parse::<Topic>().unwrap(), Topic::CaseReport);
        assert_eq!("CaseReport".parse::<Topic>().unwrap(), Topic::CaseReport);
        assert_eq!(
            "EPIDEMIC   FORECASTING".parse::<Topic>().unwrap(),
            Topic::EpidemicForecasting
        );
    }

    #[test]
    fn topic_parse_rejects_unknown_and_names_valid_set() {
        let err = "NotATopic".parse::<Topic>().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("NotATopic"));
        assert!(msg.contains("Case Report"));
        assert!(msg.contains("Epidemic Forecasting"));
    }

    #[test]
    fn canonical_order_is_stable() {
        let names: Vec<&str> = Topic::ALL.iter().map(|t| t.as_str()).collect();
        assert_eq!(
            names,
            [
                "Mechanism",
                "Transmission",
                "Diagnosis",
                "Treatment",
                "Prevention",
                "Case Report",
                "Epidemic Forecasting"
            ]
        );
        for (j, t) in Topic::ALL.iter().enumerate() {
            assert_eq!(t.index(), j);
        }
    }

    #[test]
    fn jsonl_toy_three_records_round_trip() {
        // Field-by-field check of the documented JSONL schema, including an
        // unlabeled third record.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.jsonl");
        let mut f = File::create(&path).unwrap();
        writeln!(
            f,
            r#"{{"pmid":"a1","journal":"J","title":"virus treatment","abstract":"corona","keywords":"covid;vaccine","pub_type":"Journal Article","authors":"A. One;B. Two","doi":"10.1/x","label":"Treatment;Diagnosis"}}"#
        )
        .unwrap();
        writeln!(
            f,
            r#"{{"pmid":"a2","title":"mask study","abstract":"","label":"Prevention"}}"#
        )
        .unwrap();
        writeln!(f, r#"{{"pmid":"a3","title":"case data","label":""}}"#).unwrap();
        drop(f);

        let corpus = load_corpus(&[path], CorpusFormat::Jsonl, false).unwrap();
        assert_eq!(corpus.len(), 3);
        let a1 = &corpus.articles[0];
        assert_eq!(a1.id, "a1");
        assert_eq!(a1.journal, "J");
        assert_eq!(a1.title, "virus treatment");
        assert_eq!(a1.abstract_text, "corona");
        assert_eq!(a1.keywords, vec!["covid", "vaccine"]);
        assert_eq!(a1.pub_types, vec!["Journal Article"]);
        assert_eq!(a1.authors, vec!["A. One", "B. Two"]);
        assert_eq!(a1.doi, "10.1/x");
        assert_eq!(
            a1.labels.iter().copied().collect::<Vec<_>>(),
            vec![Topic::Diagnosis, Topic::Treatment]
        );
        assert!(corpus.articles[2].labels.is_empty());
    }

    #[test]
    fn empty_file_is_an_empty_corpus_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        File::create(&path).unwrap();
        let err = load_corpus(&[path], CorpusFormat::Csv, false).unwrap_err();
        assert!(err.to_string().contains("empty corpus"));
    }

    #[test]
    fn require_labels_rejects_unlabeled_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.jsonl");
        let mut f = File::create(&path).unwrap();
        writeln!(f, r#"{{"pmid":"a1","title":"virus","label":""}}"#).unwrap();
        drop(f);
        let err = load_corpus(&[path], CorpusFormat::Jsonl, true).unwrap_err();
        assert!(matches!(err, Error::MissingLabels { .. }));
    }

    #[test]
    fn unknown_label_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.jsonl");
        let mut f = File::create(&path).unwrap();
        writeln!(f, r#"{{"pmid":"a1","title":"virus","label":"Mystery"}}"#).unwrap();
        drop(f);
        let err = load_corpus(&[path], CorpusFormat::Jsonl, false).unwrap_err();
        assert!(err.to_string().contains("Mystery"));
    }

    #[test]
    fn duplicate_id_across_files_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("one.jsonl");
        let p2 = dir.path().join("two.jsonl");
        std::fs::write(&p1, "{\"pmid\":\"a1\",\"title\":\"virus\"}\n").unwrap();
        std::fs::write(&p2, "{\"pmid\":\"a1\",\"title\":\"other virus\"}\n").unwrap();
        let err = load_corpus(&[p1, p2.clone()], CorpusFormat::Jsonl, false).unwrap_err();
        match err {
            Error::DuplicateId { id, path } => {
                assert_eq!(id, "a1");
                assert_eq!(path, p2);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn malformed_row_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let mut f = File::create(&path).unwrap();
        writeln!(f, r#"{{"pmid":"a1","title":"virus"}}"#).unwrap();
        writeln!(f, "{{not json").unwrap();
        drop(f);
        let err = load_corpus(&[path], CorpusFormat::Jsonl, false).unwrap_err();
        match err {
            Error::MalformedRecord { location, .. } => assert_eq!(location, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn whitespace_only_title_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"pmid\":\"a1\",\"title\":\"   \"}\n").unwrap();
        let err = load_corpus(&[path], CorpusFormat::Jsonl, false).unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { .. }));
    }

    #[test]
    fn label_matrix_full_and_empty_rows() {
        let corpus = Corpus::from_articles(vec![
            Article::new("all", "everything", "", Topic::ALL),
            Article::new("none", "nothing", "", []),
        ])
        .unwrap();
        let m = label_matrix(&corpus);
        assert_eq!(m.row(0), &[1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(m.row(1), &[0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn label_matrix_marks_exact_columns() {
        let m = label_matrix(&toy_two_doc_corpus());
        let mut expected_d1 = [0u8; 7];
        expected_d1[Topic::Treatment.index()] = 1;
        let mut expected_d2 = [0u8; 7];
        expected_d2[Topic::Treatment.index()] = 1;
        expected_d2[Topic::Diagnosis.index()] = 1;
        assert_eq!(m.row(0), &expected_d1);
        assert_eq!(m.row(1), &expected_d2);
    }

    #[test]
    fn label_matrix_row_sums_equal_label_set_sizes() {
        let corpus = toy_two_doc_corpus();
        let m = label_matrix(&corpus);
        for (i, article) in corpus.articles.iter().enumerate() {
            let row_sum: u8 = m.row(i).iter().sum();
            assert_eq!(row_sum as usize, article.labels.len());
        }
    }

    #[test]
    fn corpus_stats_hand_count() {
        let stats = corpus_stats(&toy_two_doc_corpus());
        assert_eq!(stats.per_topic[Topic::Treatment.index()], 2);
        assert_eq!(stats.per_topic[Topic::Diagnosis.index()], 1);
        assert_eq!(
            stats.per_topic.iter().sum::<usize>(),
            3,
            "only Treatment and Diagnosis occur"
        );
        assert_eq!(stats.total, 2);
    }

    #[test]
    fn corpus_stats_all_zero_for_unlabeled() {
        let corpus = Corpus::from_articles(vec![
            Article::new("a", "one", "", []),
            Article::new("b", "two", "", []),
        ])
        .unwrap();
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.per_topic, [0; 7]);
        assert_eq!(stats.total, 2);
    }

    #[test]
    fn corpus_stats_single_article_single_label() {
        let corpus =
            Corpus::from_articles(vec![Article::new("a", "one", "", [Topic::Mechanism])]).unwrap();
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.per_topic[Topic::Mechanism.index()], 1);
        assert_eq!(stats.total, 1);
    }

    #[test]
    fn corpus_stats_equal_label_matrix_column_sums() {
        let corpus = toy_two_doc_corpus();
        let stats = corpus_stats(&corpus);
        let m = label_matrix(&corpus);
        for topic in Topic::ALL {
            assert_eq!(stats.per_topic[topic.index()], m.column_sum(topic));
        }
    }

    #[test]
    fn csv_round_trip_is_field_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let corpus = Corpus::from_articles(vec![
            Article {
                id: "p1".into(),
                journal: "Journal, with comma".into(),
                title: "virus \"quoted\" study".into(),
                abstract_text: "line one\nline two".into(),
                keywords: vec!["covid".into(), "mask".into()],
                pub_types: vec!["Journal Article".into()],
                authors: vec!["A. One".into(), "B. Two".into()],
                doi: "10.1/x".into(),
                labels: [Topic::Prevention, Topic::CaseReport].into_iter().collect(),
            },
            Article::new("p2", "plain title", "", []),
        ])
        .unwrap();
        write_corpus(&corpus, &path, CorpusFormat::Csv).unwrap();
        let reloaded = load_corpus(&[path], CorpusFormat::Csv, false).unwrap();
        assert_eq!(reloaded.articles, corpus.articles);
    }

    #[test]
    fn jsonl_round_trip_is_field_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.jsonl");
        let corpus = toy_two_doc_corpus();
        write_corpus(&corpus, &path, CorpusFormat::Jsonl).unwrap();
        let reloaded = load_corpus(&[path], CorpusFormat::Jsonl, false).unwrap();
        assert_eq!(reloaded.articles, corpus.articles);
    }
}
