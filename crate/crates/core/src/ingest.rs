//! Parsing, validation and monthly windowing of post archives.
//!
//! Two input encodings are accepted, both carrying the same six fields:
//!
//! - json-lines: one object per line with keys `post_id`, `community_id`,
//!   `author_id`, `parent_post_id` (string or null), `timestamp` (ISO 8601,
//!   e.g. `2010-03-14T09:26:53Z`) and `text`;
//! - csv: the same six columns with a header row, RFC-4180 quoting.
//!
//! Record-level problems never abort parsing. They are collected as
//! [`Diagnostic`]s carrying the 1-based line number of the offending record.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::IngestError;
use crate::month::YearMonth;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: String,
    pub community_id: String,
    pub author_id: String,
    pub parent_post_id: Option<String>,
    #[serde(with = "iso_seconds")]
    pub timestamp: DateTime<Utc>,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchiveFormat {
    JsonLines,
    Csv,
}

impl FromStr for ArchiveFormat {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json-lines" | "jsonlines" | "ndjson" => Ok(Self::JsonLines),
            "csv" => Ok(Self::Csv),
            other => Err(IngestError::UnknownFormat(other.to_string())),
        }
    }
}

/// A non-fatal problem found while ingesting a single record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// 1-based line of the record in the source; `None` for archive-level checks.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}, line {}", self.message, line),
            None => f.write_str(&self.message),
        }
    }
}

/// Validated posts, sorted by timestamp (ties keep input order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Archive {
    posts: Vec<PostRecord>,
    communities: BTreeSet<String>,
    span: (DateTime<Utc>, DateTime<Utc>),
}

impl Archive {
    /// Builds an archive from already-validated posts. Returns `None` when
    /// `posts` is empty.
    pub fn from_posts(mut posts: Vec<PostRecord>) -> Option<Self> {
        if posts.is_empty() {
            return None;
        }
        posts.sort_by_key(|p| p.timestamp);
        let communities = posts.iter().map(|p| p.community_id.clone()).collect();
        let span = (posts[0].timestamp, posts[posts.len() - 1].timestamp);
        Some(Self {
            posts,
            communities,
            span,
        })
    }

    pub fn posts(&self) -> &[PostRecord] {
        &self.posts
    }

    pub fn communities(&self) -> &BTreeSet<String> {
        &self.communities
    }

    pub fn span(&self) -> (DateTime<Utc>, DateTime<Utc>) {
        self.span
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    /// Lookup table from post id to record.
    pub fn index(&self) -> PostIndex<'_> {
        PostIndex(self.posts.iter().map(|p| (p.post_id.as_str(), p)).collect())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for post in &self.posts {
            serde_json::to_writer(&mut out, post)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(FIELDS)?;
        for p in &self.posts {
            let ts = iso_seconds::format(&p.timestamp);
            writer.write_record([
                p.post_id.as_str(),
                p.community_id.as_str(),
                p.author_id.as_str(),
                p.parent_post_id.as_deref().unwrap_or(""),
                ts.as_str(),
                p.text.as_str(),
            ])?;
        }
        writer.flush()
    }
}

/// Post id → record lookup.
#[derive(Debug, Clone)]
pub struct PostIndex<'a>(HashMap<&'a str, &'a PostRecord>);

impl<'a> PostIndex<'a> {
    pub fn get(&self, post_id: &str) -> Option<&'a PostRecord> {
        self.0.get(post_id).copied()
    }

    /// Author of the post `parent` replies to, if resolvable.
    pub fn parent_author(&self, post: &PostRecord) -> Option<&'a str> {
        post.parent_post_id
            .as_deref()
            .and_then(|id| self.get(id))
            .map(|p| p.author_id.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct ParsedArchive {
    pub archive: Archive,
    pub diagnostics: Vec<Diagnostic>,
    /// Number of records read from the source, valid or not.
    pub records_read: usize,
}

const FIELDS: [&str; 6] = [
    "post_id",
    "community_id",
    "author_id",
    "parent_post_id",
    "timestamp",
    "text",
];

struct RawRecord {
    line: usize,
    post: PostRecord,
}

/// Parses an archive, dropping ill-formed records with a diagnostic each.
pub fn parse_archive<R: Read>(
    source: R,
    format: ArchiveFormat,
) -> Result<ParsedArchive, IngestError> {
    let mut diagnostics = Vec::new();
    let (raw, records_read) = match format {
        ArchiveFormat::JsonLines => read_jsonl(source, &mut diagnostics)?,
        ArchiveFormat::Csv => read_csv(source, &mut diagnostics)?,
    };

    let mut seen = HashSet::new();
    let mut kept = Vec::with_capacity(raw.len());
    for rec in raw {
        if seen.insert(rec.post.post_id.clone()) {
            kept.push(rec);
        } else {
            diagnostics.push(Diagnostic {
                line: Some(rec.line),
                message: format!("duplicate post_id `{}` ignored", rec.post.post_id),
            });
        }
    }

    let lines: HashMap<String, usize> = kept
        .iter()
        .map(|r| (r.post.post_id.clone(), r.line))
        .collect();
    let times: HashMap<String, DateTime<Utc>> = kept
        .iter()
        .map(|r| (r.post.post_id.clone(), r.post.timestamp))
        .collect();
    for rec in &mut kept {
        let Some(parent) = rec.post.parent_post_id.clone() else {
            continue;
        };
        match times.get(&parent) {
            None => {
                diagnostics.push(Diagnostic {
                    line: Some(rec.line),
                    message: format!(
                        "unresolved parent_post_id `{parent}`; treated as thread start"
                    ),
                });
                rec.post.parent_post_id = None;
            }
            Some(&parent_time) if parent_time > rec.post.timestamp => {
                diagnostics.push(Diagnostic {
                    line: Some(rec.line),
                    message: format!(
                        "reply predates its parent `{parent}` (line {})",
                        lines[&parent]
                    ),
                });
            }
            Some(_) => {}
        }
    }

    diagnostics.sort_by_key(|d| d.line);
    let archive = Archive::from_posts(kept.into_iter().map(|r| r.post).collect())
        .ok_or(IngestError::EmptyArchive)?;
    Ok(ParsedArchive {
        archive,
        diagnostics,
        records_read,
    })
}

fn read_jsonl<R: Read>(
    source: R,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<(Vec<RawRecord>, usize), IngestError> {
    let mut reader = BufReader::new(source);
    let mut records = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    let mut read = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf).map_err(|_| IngestError::Encoding { line: line_no })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        read += 1;
        let value: serde_json::Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => {
                diagnostics.push(Diagnostic {
                    line: Some(line_no),
                    message: format!("invalid json: {e}"),
                });
                continue;
            }
        };
        let Some(obj) = value.as_object() else {
            diagnostics.push(Diagnostic {
                line: Some(line_no),
                message: "record is not a json object".into(),
            });
            continue;
        };
        let field = |name: &str| -> Result<Option<&str>, String> {
            match obj.get(name) {
                None | Some(serde_json::Value::Null) => Ok(None),
                Some(serde_json::Value::String(s)) => Ok(Some(s.as_str())),
                Some(_) => Err(format!("field {name} must be a string")),
            }
        };
        let fields: Result<Vec<Option<&str>>, String> = FIELDS.iter().map(|f| field(f)).collect();
        match fields.and_then(|f| build_record(&f)) {
            Ok(post) => records.push(RawRecord {
                line: line_no,
                post,
            }),
            Err(message) => diagnostics.push(Diagnostic {
                line: Some(line_no),
                message,
            }),
        }
    }
    Ok((records, read))
}

fn read_csv<R: Read>(
    source: R,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<(Vec<RawRecord>, usize), IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(source);
    let headers = reader.headers().map_err(csv_error)?.clone();
    let positions: Vec<Option<usize>> = FIELDS
        .iter()
        .map(|f| headers.iter().position(|h| h.trim() == *f))
        .collect();
    for (name, pos) in FIELDS.iter().zip(&positions) {
        if pos.is_none() && *name != "parent_post_id" {
            return Err(IngestError::Csv(format!("header is missing column `{name}`")));
        }
    }
    let mut records = Vec::new();
    let mut read = 0;
    for result in reader.records() {
        let rec = match result {
            Ok(r) => r,
            Err(e) => {
                if let csv::ErrorKind::Utf8 { pos, .. } = e.kind() {
                    let line = pos.as_ref().map_or(0, |p| p.line() as usize);
                    return Err(IngestError::Encoding { line });
                }
                read += 1;
                diagnostics.push(Diagnostic {
                    line: e.position().map(|p| p.line() as usize),
                    message: format!("malformed csv record: {e}"),
                });
                continue;
            }
        };
        read += 1;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<Option<&str>> = positions
            .iter()
            .enumerate()
            .map(|(i, pos)| {
                let v = pos.and_then(|p| rec.get(p));
                // Empty cells are missing, except for text where empty is legal.
                match (FIELDS[i], v) {
                    ("text", v) => v,
                    (_, Some("")) => None,
                    (_, v) => v,
                }
            })
            .collect();
        match build_record(&fields) {
            Ok(post) => records.push(RawRecord { line, post }),
            Err(message) => diagnostics.push(Diagnostic {
                line: Some(line),
                message,
            }),
        }
    }
    Ok((records, read))
}

fn csv_error(e: csv::Error) -> IngestError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        csv::ErrorKind::Utf8 { pos, .. } => IngestError::Encoding {
            line: pos.map_or(0, |p| p.line() as usize),
        },
        other => IngestError::Csv(format!("{other:?}")),
    }
}

/// `fields` follows the order of [`FIELDS`].
fn build_record(fields: &[Option<&str>]) -> Result<PostRecord, String> {
    let required = |i: usize| fields[i].ok_or_else(|| format!("missing field: {}", FIELDS[i]));
    let post_id = required(0)?;
    let community_id = required(1)?;
    let author_id = required(2)?;
    let timestamp = required(4)?;
    let text = required(5)?;
    for (i, v) in [(0, post_id), (1, community_id), (2, author_id)] {
        if v.trim().is_empty() {
            return Err(format!("missing field: {}", FIELDS[i]));
        }
    }
    let timestamp = iso_seconds::parse(timestamp)
        .map_err(|e| format!("invalid timestamp `{timestamp}`: {e}"))?;
    Ok(PostRecord {
        post_id: post_id.to_string(),
        community_id: community_id.to_string(),
        author_id: author_id.to_string(),
        parent_post_id: fields[3].map(str::to_string),
        timestamp,
        text: text.to_string(),
    })
}

/// All posts of one community within one calendar month (UTC).
#[derive(Debug, Clone)]
pub struct MonthWindow<'a> {
    pub community_id: &'a str,
    pub month: YearMonth,
    /// Posts in timestamp order.
    pub posts: Vec<&'a PostRecord>,
}

/// Splits the archive into per-community monthly windows.
///
/// Every community gets one window per calendar month from its first to its
/// last posting month, silent months included. Windows are ordered by
/// community id, then month.
pub fn window_by_month(archive: &Archive) -> Vec<MonthWindow<'_>> {
    let mut buckets: BTreeMap<&str, BTreeMap<YearMonth, Vec<&PostRecord>>> = BTreeMap::new();
    for post in archive.posts() {
        buckets
            .entry(post.community_id.as_str())
            .or_default()
            .entry(YearMonth::of(post.timestamp))
            .or_default()
            .push(post);
    }
    let mut windows = Vec::new();
    for (community_id, mut months) in buckets {
        let first = *months.keys().next().expect("non-empty bucket");
        let last = *months.keys().next_back().expect("non-empty bucket");
        for month in YearMonth::range(first, last) {
            windows.push(MonthWindow {
                community_id,
                month,
                posts: months.remove(&month).unwrap_or_default(),
            });
        }
    }
    windows
}

/// Groups windows by community, preserving month order.
pub fn by_community<'w, 'a>(
    windows: &'w [MonthWindow<'a>],
) -> BTreeMap<&'a str, &'w [MonthWindow<'a>]> {
    let mut out = BTreeMap::new();
    let mut start = 0;
    while start < windows.len() {
        let id = windows[start].community_id;
        let end = start
            + windows[start..]
                .iter()
                .take_while(|w| w.community_id == id)
                .count();
        out.insert(id, &windows[start..end]);
        start = end;
    }
    out
}

pub(crate) mod iso_seconds {
    use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn format(t: &DateTime<Utc>) -> String {
        t.to_rfc3339_opts(SecondsFormat::Secs, true)
    }

    pub fn parse(s: &str) -> Result<DateTime<Utc>, chrono::ParseError> {
        DateTime::parse_from_rfc3339(s.trim()).map(|t| t.with_timezone(&Utc).trunc_subsecs(0))
    }

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jsonl(lines: &[&str]) -> ParsedArchive {
        parse_archive(lines.join("\n").as_bytes(), ArchiveFormat::JsonLines).unwrap()
    }

    #[test]
    fn single_record() {
        let parsed = jsonl(&[
            r#"{"post_id":"p1","community_id":"c","author_id":"a","parent_post_id":null,"timestamp":"2010-03-14T09:26:53Z","text":"hello"}"#,
        ]);
        assert_eq!(parsed.archive.len(), 1);
        assert!(parsed.diagnostics.is_empty());
        let p = &parsed.archive.posts()[0];
        assert_eq!(p.post_id, "p1");
        assert_eq!(p.parent_post_id, None);
        assert_eq!(iso_seconds::format(&p.timestamp), "2010-03-14T09:26:53Z");
    }

    #[test]
    fn missing_timestamp_is_dropped_with_line() {
        let parsed = jsonl(&[
            r#"{"post_id":"p1","community_id":"c","author_id":"a","parent_post_id":null,"timestamp":"2010-03-14T09:26:53Z","text":""}"#,
            r#"{"post_id":"p2","community_id":"c","author_id":"a","parent_post_id":null,"text":"x"}"#,
        ]);
        assert_eq!(parsed.archive.len(), 1);
        assert_eq!(parsed.diagnostics.len(), 1);
        assert_eq!(
            parsed.diagnostics[0].to_string(),
            "missing field: timestamp, line 2"
        );
    }

    #[test]
    fn unresolved_parent_becomes_thread_start() {
        let parsed = jsonl(&[
            r#"{"post_id":"p1","community_id":"c","author_id":"a","parent_post_id":"gone","timestamp":"2010-03-14T09:26:53Z","text":"x"}"#,
        ]);
        assert_eq!(parsed.archive.len(), 1);
        assert_eq!(parsed.archive.posts()[0].parent_post_id, None);
        assert!(parsed.diagnostics[0].message.contains("unresolved parent_post_id"));
    }

    #[test]
    fn duplicate_keeps_first() {
        let parsed = jsonl(&[
            r#"{"post_id":"p1","community_id":"c","author_id":"a","parent_post_id":null,"timestamp":"2010-03-14T09:26:53Z","text":"first"}"#,
            r#"{"post_id":"p1","community_id":"c","author_id":"b","parent_post_id":null,"timestamp":"2010-03-14T09:26:50Z","text":"second"}"#,
        ]);
        assert_eq!(parsed.archive.len(), 1);
        assert_eq!(parsed.archive.posts()[0].text, "first");
        assert_eq!(parsed.diagnostics[0].line, Some(2));
    }

    #[test]
    fn reply_before_parent_is_flagged_not_fatal() {
        let parsed = jsonl(&[
            r#"{"post_id":"p1","community_id":"c","author_id":"a","parent_post_id":null,"timestamp":"2010-03-14T09:26:53Z","text":""}"#,
            r#"{"post_id":"p2","community_id":"c","author_id":"b","parent_post_id":"p1","timestamp":"2010-03-13T09:26:53Z","text":""}"#,
        ]);
        assert_eq!(parsed.archive.len(), 2);
        assert_eq!(parsed.archive.posts()[0].post_id, "p2");
        assert!(parsed.diagnostics[0].message.contains("predates"));
    }

    #[test]
    fn empty_archive_is_fatal() {
        let err = parse_archive(&b"\n{\"post_id\":1}\n"[..], ArchiveFormat::JsonLines).unwrap_err();
        assert!(matches!(err, IngestError::EmptyArchive));
    }

    #[test]
    fn invalid_utf8_is_fatal() {
        let err = parse_archive(&b"\xff\xfe\n"[..], ArchiveFormat::JsonLines).unwrap_err();
        assert!(matches!(err, IngestError::Encoding { line: 1 }));
    }

    #[test]
    fn csv_with_quoting() {
        let src = "post_id,community_id,author_id,parent_post_id,timestamp,text\n\
                   p1,c,a,,2010-01-01T00:00:00Z,\"hello, \"\"world\"\"\"\n\
                   p2,c,b,p1,2010-01-02T00:00:00Z,\n\
                   p3,c,b,p1,,oops\n";
        let parsed = parse_archive(src.as_bytes(), ArchiveFormat::Csv).unwrap();
        assert_eq!(parsed.archive.len(), 2);
        assert_eq!(parsed.archive.posts()[0].text, "hello, \"world\"");
        assert_eq!(parsed.archive.posts()[1].parent_post_id.as_deref(), Some("p1"));
        assert_eq!(parsed.diagnostics[0].to_string(), "missing field: timestamp, line 4");
    }

    fn post(id: &str, community: &str, ts: &str) -> PostRecord {
        PostRecord {
            post_id: id.into(),
            community_id: community.into(),
            author_id: "a".into(),
            parent_post_id: None,
            timestamp: iso_seconds::parse(ts).unwrap(),
            text: String::new(),
        }
    }

    #[test]
    fn windows_fill_silent_months() {
        let archive = Archive::from_posts(vec![
            post("1", "c", "2010-01-05T00:00:00Z"),
            post("2", "c", "2010-03-31T23:59:59Z"),
            post("3", "d", "2011-06-01T00:00:00Z"),
        ])
        .unwrap();
        let windows = window_by_month(&archive);
        let labels: Vec<String> = windows
            .iter()
            .map(|w| format!("{}:{}:{}", w.community_id, w.month, w.posts.len()))
            .collect();
        assert_eq!(labels, ["c:2010-01:1", "c:2010-02:0", "c:2010-03:1", "d:2011-06:1"]);
        let grouped = by_community(&windows);
        assert_eq!(grouped["c"].len(), 3);
        assert_eq!(grouped["d"].len(), 1);
    }
}
