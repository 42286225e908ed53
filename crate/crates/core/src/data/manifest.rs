//! Manifest CSV: one row per sample linking id, feature file, labels, split.
//!
//! Header is `sample_id,path,labels,split`. Blank lines and `#` comments are
//! skipped. The writer emits labels as semicolon-separated class indices;
//! the reader also accepts fixed-width 0/1 bitmask fields (all non-empty
//! fields binary-looking and of one shared length ≥ 2).

use std::collections::HashSet;

use crate::error::{Error, Result};

pub const HEADER: &str = "sample_id,path,labels,split";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Eval,
}

impl SplitTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Eval => "eval",
        }
    }
}

/// One parsed manifest row, labels still in raw text form.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    /// 1-based line number in the manifest file.
    pub line: usize,
    pub sample_id: u64,
    pub path: String,
    pub labels: String,
    pub split: SplitTag,
}

/// Parses the manifest structure: header, field counts, ids, split tags.
pub fn parse_manifest(text: &str) -> Result<Vec<RawRow>> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    let mut ids: HashSet<u64> = HashSet::new();
    for (index, raw_line) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw_line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if !seen_header {
            if content != HEADER {
                return Err(Error::ManifestRow {
                    row: line,
                    detail: format!("expected header `{HEADER}`, found `{content}`"),
                });
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::ManifestRow {
                row: line,
                detail: format!("expected 4 comma-separated fields, found {}", fields.len()),
            });
        }
        let sample_id: u64 = fields[0].parse().map_err(|_| Error::ManifestRow {
            row: line,
            detail: format!("sample_id `{}` is not an unsigned integer", fields[0]),
        })?;
        if !ids.insert(sample_id) {
            return Err(Error::ManifestDuplicateId {
                row: line,
                id: sample_id,
            });
        }
        if fields[1].is_empty() {
            return Err(Error::ManifestRow {
                row: line,
                detail: "path field is empty".into(),
            });
        }
        let split = match fields[3] {
            "train" => SplitTag::Train,
            "eval" => SplitTag::Eval,
            other => {
                return Err(Error::ManifestRow {
                    row: line,
                    detail: format!("split `{other}` is neither `train` nor `eval`"),
                })
            }
        };
        rows.push(RawRow {
            line,
            sample_id,
            path: fields[1].to_string(),
            labels: fields[2].to_string(),
            split,
        });
    }
    if !seen_header && !text.trim().is_empty() {
        return Err(Error::ManifestRow {
            row: 1,
            detail: format!("expected header `{HEADER}`"),
        });
    }
    Ok(rows)
}

fn looks_like_bitmask(field: &str) -> bool {
    field.len() >= 2 && field.bytes().all(|b| b == b'0' || b == b'1')
}

/// Decodes every row's label field, inferring the class count: the shared
/// bitmask width, or max class index + 1 for index lists.
pub fn decode_labels(rows: &[RawRow]) -> Result<(usize, Vec<Vec<bool>>)> {
    let nonempty: Vec<&RawRow> = rows.iter().filter(|r| !r.labels.is_empty()).collect();
    let bitmask_mode = !nonempty.is_empty()
        && nonempty.iter().all(|r| looks_like_bitmask(&r.labels))
        && nonempty
            .iter()
            .all(|r| r.labels.len() == nonempty[0].labels.len());

    if bitmask_mode {
        let classes = nonempty[0].labels.len();
        let decoded = rows
            .iter()
            .map(|row| {
                if row.labels.is_empty() {
                    Ok(vec![false; classes])
                } else {
                    Ok(row.labels.bytes().map(|b| b == b'1').collect())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok((classes, decoded));
    }

    let mut indices: Vec<Vec<usize>> = Vec::with_capacity(rows.len());
    let mut classes = 0usize;
    for row in rows {
        let mut parsed = Vec::new();
        if !row.labels.is_empty() {
            for token in row.labels.split(';') {
                if token.len() > 1 && token.starts_with('0') {
                    return Err(Error::ManifestLabel {
                        row: row.line,
                        detail: format!("ambiguous zero-padded class index `{token}`"),
                    });
                }
                let class: usize = token.parse().map_err(|_| Error::ManifestLabel {
                    row: row.line,
                    detail: format!("`{token}` is not a class index"),
                })?;
                if parsed.contains(&class) {
                    return Err(Error::ManifestLabel {
                        row: row.line,
                        detail: format!("class index {class} repeats"),
                    });
                }
                parsed.push(class);
                classes = classes.max(class + 1);
            }
        }
        indices.push(parsed);
    }
    let decoded = indices
        .into_iter()
        .map(|list| {
            let mut labels = vec![false; classes];
            for class in list {
                labels[class] = true;
            }
            labels
        })
        .collect();
    Ok((classes, decoded))
}

/// Renders one manifest line (labels as sorted class indices).
pub fn render_row(sample_id: u64, path: &str, labels: &[bool], split: SplitTag) -> String {
    let indices: Vec<String> = labels
        .iter()
        .enumerate()
        .filter(|(_, &y)| y)
        .map(|(j, _)| j.to_string())
        .collect();
    format!("{sample_id},{path},{},{}", indices.join(";"), split.as_str())
}
