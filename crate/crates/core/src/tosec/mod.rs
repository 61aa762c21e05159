//! TOSEC filename parsing.
//!
//! Grammar handled here:
//! `Title[, Article][ version][ (demo)] (date)(publisher){(field)}{[flag]}[.ext]`
//! Parsing is lossless: a name is accepted only if the parsed record
//! serializes back to exactly the same bytes.

mod ingest;

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ingest::{ingest_batch, ingest_filename, BatchFailure, BatchSummary, IngestError, TosecIngest};

pub const FLAG_CODES: &[&str] = &["cr", "f", "h", "m", "p", "t", "tr", "o", "u", "v", "b", "a", "!"];

const ARTICLES: &[&str] = &[
    "The", "A", "An", "Le", "La", "Les", "L'", "Der", "Die", "Das", "El", "Il", "Los", "Las", "De", "Het", "Een",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    System,
    Video,
    Country,
    Language,
    Copyright,
    Devstatus,
    Media,
    Unknown,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::System => "system",
            FieldKind::Video => "video",
            FieldKind::Country => "country",
            FieldKind::Language => "language",
            FieldKind::Copyright => "copyright",
            FieldKind::Devstatus => "devstatus",
            FieldKind::Media => "media",
            FieldKind::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionalField {
    pub kind: FieldKind,
    pub raw: String,
}

/// A square-bracket dump flag. The argument is written glued to the code
/// when it starts with a digit (`a2`) and after a space otherwise (`h Fairlight`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpFlag {
    pub code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argument: Option<String>,
}

impl fmt::Display for DumpFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)?;
        match &self.argument {
            Some(arg) if arg.starts_with(|c: char| c.is_ascii_digit()) => f.write_str(arg),
            Some(arg) => write!(f, " {arg}"),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TosecRecord {
    pub title: String,
    pub article_suffix: Option<String>,
    pub version: Option<String>,
    pub demo_marker: Option<String>,
    pub date: String,
    pub publisher: String,
    pub positional_fields: Vec<PositionalField>,
    pub dump_flags: Vec<DumpFlag>,
    /// Without the dot; empty when the name has no extension.
    pub extension: String,
}

impl TosecRecord {
    pub fn has_known_publisher(&self) -> bool {
        self.publisher != "-"
    }

    /// The date as a closed interval, widening placeholders:
    /// `19xx` is `1900/1999`, `1982-xx` is `1982/1982`.
    pub fn date_timespan(&self) -> String {
        let mut parts = self.date.split('-');
        let year = parts.next().unwrap_or_default();
        if year.contains('x') {
            return format!("{}/{}", year.replace('x', "0"), year.replace('x', "9"));
        }
        let mut point = year.to_string();
        for part in parts {
            if part.contains('x') {
                break;
            }
            point.push('-');
            point.push_str(part);
        }
        format!("{point}/{point}")
    }
}

impl fmt::Display for TosecRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.title)?;
        if let Some(article) = &self.article_suffix {
            write!(f, ", {article}")?;
        }
        if let Some(version) = &self.version {
            write!(f, " {version}")?;
        }
        if let Some(demo) = &self.demo_marker {
            write!(f, " ({demo})")?;
        }
        write!(f, " ({})({})", self.date, self.publisher)?;
        for field in &self.positional_fields {
            write!(f, "({})", field.raw)?;
        }
        for flag in &self.dump_flags {
            write!(f, "[{flag}]")?;
        }
        if !self.extension.is_empty() {
            write!(f, ".{}", self.extension)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TosecError {
    #[error("filename is empty")]
    Empty,
    #[error("missing title")]
    MissingTitle,
    #[error("missing (date)(publisher) pair")]
    MissingDatePublisher,
    #[error("unbalanced brackets at byte {position}")]
    Unbalanced { position: usize },
    #[error("unknown dump flag [{flag}]")]
    UnknownFlag { flag: String },
    #[error("invalid date {date:?}")]
    InvalidDate { date: String },
    #[error("name does not follow the canonical layout (would be written as {canonical:?})")]
    NonCanonical { canonical: String },
}

impl TosecError {
    pub fn code(&self) -> &'static str {
        match self {
            TosecError::Empty => "empty",
            TosecError::MissingTitle => "missing-title",
            TosecError::MissingDatePublisher => "missing-date-publisher",
            TosecError::Unbalanced { .. } => "unbalanced-brackets",
            TosecError::UnknownFlag { .. } => "unknown-flag",
            TosecError::InvalidDate { .. } => "invalid-date",
            TosecError::NonCanonical { .. } => "non-canonical",
        }
    }
}

fn date_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(19|20)[0-9x]{2}(-([0-9]{2}|xx)(-([0-9]{2}|xx))?)?$").unwrap())
}

fn version_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(v[0-9][0-9A-Za-z.\-]*|Rev [0-9A-Za-z.]+)$").unwrap())
}

fn media_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(Disk|Disc|File|Part|Side|Tape) [0-9A-Za-z]+( of [0-9A-Za-z]+)?$").unwrap())
}

fn language_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([a-z]{2}(-[a-z]{2})*|M[0-9])$").unwrap())
}

const SYSTEMS: &[&str] = &[
    "+2", "+2a", "+3", "16K", "48K", "64K", "128K", "130XE", "400", "800", "800XL", "XE", "XL", "A500", "A500+",
    "A600", "A1000", "A1200", "A3000", "A4000", "AGA", "ECS", "OCS", "CD32", "CDTV", "MSX2", "MSX2+", "STe",
    "Falcon", "TT", "Mac", "ZX81", "C128", "C16", "Plus4", "VIC20",
];
const VIDEO: &[&str] = &[
    "CGA", "EGA", "HGC", "MCGA", "MDA", "NTSC", "NTSC-PAL", "PAL", "PAL-NTSC", "SVGA", "VGA", "XGA", "PAL60",
];
const COUNTRIES: &[&str] = &[
    "AE", "AL", "AS", "AT", "AU", "BA", "BE", "BG", "BR", "CA", "CH", "CL", "CN", "CS", "CY", "CZ", "DE", "DK",
    "EE", "EG", "ES", "EU", "FI", "FR", "GB", "GR", "HK", "HR", "HU", "ID", "IE", "IL", "IN", "IR", "IS", "IT",
    "JO", "JP", "KR", "LT", "LU", "LV", "MN", "MX", "MY", "NL", "NO", "NP", "NZ", "OM", "PE", "PH", "PL", "PT",
    "QA", "RO", "RU", "SE", "SG", "SI", "SK", "TH", "TR", "TW", "US", "VN", "YU", "ZA",
];
const COPYRIGHT: &[&str] = &["CW", "CW-R", "FW", "GW", "GW-R", "LW", "PD", "SW", "SW-R"];
const DEVSTATUS: &[&str] = &["alpha", "beta", "preview", "pre-release", "proto"];

/// Infers the kind of a parenthesized field from a fixed keyword table.
pub fn field_kind(raw: &str) -> FieldKind {
    if VIDEO.contains(&raw) {
        FieldKind::Video
    } else if SYSTEMS.contains(&raw) {
        FieldKind::System
    } else if raw.split('-').all(|c| COUNTRIES.contains(&c)) {
        FieldKind::Country
    } else if COPYRIGHT.contains(&raw) {
        FieldKind::Copyright
    } else if DEVSTATUS.contains(&raw) {
        FieldKind::Devstatus
    } else if language_re().is_match(raw) {
        FieldKind::Language
    } else if media_re().is_match(raw) {
        FieldKind::Media
    } else {
        FieldKind::Unknown
    }
}

fn parse_flag(text: &str) -> Result<DumpFlag, TosecError> {
    let unknown = || TosecError::UnknownFlag { flag: text.to_string() };
    if text == "!" {
        return Ok(DumpFlag { code: "!".into(), argument: None });
    }
    let split = text.find(|c: char| !c.is_ascii_lowercase()).unwrap_or(text.len());
    let (code, rest) = text.split_at(split);
    if !FLAG_CODES.contains(&code) || code == "!" {
        return Err(unknown());
    }
    let argument = if rest.is_empty() {
        None
    } else if let Some(spaced) = rest.strip_prefix(' ') {
        Some(spaced.to_string())
    } else if rest.starts_with(|c: char| c.is_ascii_digit()) {
        Some(rest.to_string())
    } else {
        return Err(unknown());
    };
    Ok(DumpFlag { code: code.to_string(), argument })
}

fn check_date(date: &str) -> Result<(), TosecError> {
    let bad = || TosecError::InvalidDate { date: date.to_string() };
    if !date_re().is_match(date) {
        return Err(bad());
    }
    let mut parts = date.split('-').skip(1);
    let in_range = |p: Option<&str>, max: u32| match p {
        None | Some("xx") => true,
        Some(n) => n.parse::<u32>().map(|v| (1..=max).contains(&v)).unwrap_or(false),
    };
    if !in_range(parts.next(), 12) || !in_range(parts.next(), 31) {
        return Err(bad());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bracket {
    Paren,
    Square,
}

struct Group<'a> {
    kind: Bracket,
    text: &'a str,
}

/// Splits `s` (which starts at byte `offset` of the full name) into bracket groups.
fn groups(s: &str, offset: usize) -> Result<Vec<Group<'_>>, TosecError> {
    let mut out = Vec::new();
    let mut rest = s;
    let mut pos = offset;
    while !rest.is_empty() {
        let trimmed = rest.trim_start_matches(' ');
        pos += rest.len() - trimmed.len();
        rest = trimmed;
        let (kind, close) = match rest.chars().next() {
            Some('(') => (Bracket::Paren, ')'),
            Some('[') => (Bracket::Square, ']'),
            Some(_) => return Err(TosecError::Unbalanced { position: pos }),
            None => break,
        };
        let body = &rest[1..];
        let end = body
            .find(['(', ')', '[', ']'])
            .filter(|&i| body[i..].starts_with(close))
            .ok_or(TosecError::Unbalanced { position: pos })?;
        out.push(Group { kind, text: &body[..end] });
        pos += end + 2;
        rest = &body[end + 1..];
    }
    Ok(out)
}

fn split_extension(name: &str) -> (&str, &str) {
    if let Some(dot) = name.rfind('.') {
        let (stem, ext) = (&name[..dot], &name[dot + 1..]);
        if (stem.ends_with(')') || stem.ends_with(']'))
            && !ext.is_empty()
            && ext.chars().all(|c| c.is_ascii_alphanumeric())
        {
            return (stem, ext);
        }
    }
    (name, "")
}

fn split_title(part: &str) -> (String, Option<String>, Option<String>) {
    let mut title = part;
    let mut version = None;
    if let Some(space) = title.rfind(' ') {
        // "Rev 2" spans two tokens
        let candidates = [title[..space].rfind(' '), Some(space)];
        for cut in candidates.into_iter().flatten() {
            let tail = &title[cut + 1..];
            if version_re().is_match(tail) {
                version = Some(tail.to_string());
                title = &title[..cut];
                break;
            }
        }
    }
    let mut article = None;
    if let Some(comma) = title.rfind(", ") {
        let tail = &title[comma + 2..];
        if ARTICLES.contains(&tail) {
            article = Some(tail.to_string());
            title = &title[..comma];
        }
    }
    (title.to_string(), article, version)
}

/// Parses one TOSEC filename.
pub fn parse_tosec(filename: &str) -> Result<TosecRecord, TosecError> {
    if filename.trim().is_empty() {
        return Err(TosecError::Empty);
    }
    let (stem, extension) = split_extension(filename);
    let Some(open) = stem.find(['(', '[']) else {
        if stem.contains([')', ']']) {
            return Err(TosecError::Unbalanced {
                position: stem.find([')', ']']).unwrap_or(0),
            });
        }
        return Err(TosecError::MissingDatePublisher);
    };
    let title_part = stem[..open].trim_end_matches(' ');
    if title_part.contains([')', ']']) {
        return Err(TosecError::Unbalanced {
            position: stem.find([')', ']']).unwrap_or(0),
        });
    }
    let groups = groups(&stem[open..], open)?;
    let (title, article_suffix, version) = split_title(title_part);
    if title.trim().is_empty() {
        return Err(TosecError::MissingTitle);
    }

    let mut idx = 0;
    let mut demo_marker = None;
    let is_paren = |i: usize| groups.get(i).is_some_and(|g| g.kind == Bracket::Paren);
    if is_paren(0) && groups[0].text.starts_with("demo") && is_paren(1) {
        demo_marker = Some(groups[0].text.to_string());
        idx = 1;
    }
    if !(is_paren(idx) && is_paren(idx + 1)) {
        return Err(match groups.get(idx) {
            Some(g) if g.kind == Bracket::Paren && g.text.starts_with(|c: char| c.is_ascii_digit()) => {
                TosecError::InvalidDate { date: g.text.to_string() }
            }
            _ => TosecError::MissingDatePublisher,
        });
    }
    let date = groups[idx].text;
    if !date.starts_with(|c: char| c.is_ascii_digit()) {
        return Err(TosecError::MissingDatePublisher);
    }
    check_date(date)?;
    let publisher = groups[idx + 1].text;
    if publisher.is_empty() {
        return Err(TosecError::MissingDatePublisher);
    }

    let mut positional_fields = Vec::new();
    let mut dump_flags = Vec::new();
    for g in &groups[idx + 2..] {
        match g.kind {
            Bracket::Paren => positional_fields.push(PositionalField {
                kind: field_kind(g.text),
                raw: g.text.to_string(),
            }),
            Bracket::Square => dump_flags.push(parse_flag(g.text)?),
        }
    }

    let record = TosecRecord {
        title,
        article_suffix,
        version,
        demo_marker,
        date: date.to_string(),
        publisher: publisher.to_string(),
        positional_fields,
        dump_flags,
        extension: extension.to_string(),
    };
    let canonical = record.to_string();
    if canonical != filename {
        return Err(TosecError::NonCanonical { canonical });
    }
    Ok(record)
}
