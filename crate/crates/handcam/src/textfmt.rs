//! Line-oriented text files: label spaces, label sequences, candidate tables
//! and video manifests. `#` starts a comment line; blank lines are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use handcam_core::change::CandidateSet;
use handcam_core::{LabelSpace, StateSequence, Task};

use crate::{Error, Result};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses a label-space declaration:
///
/// ```text
/// task: object_category
/// free: free
/// label: free
/// label: cup
/// ...
/// ```
///
/// Label order is declaration order. `free` names the free-hand label.
pub fn parse_label_space(path: &Path, text: &str) -> Result<LabelSpace> {
    let mut task = None;
    let mut free = None;
    let mut labels = Vec::new();
    for (line, l) in content_lines(text) {
        let (key, value) = l
            .split_once(':')
            .ok_or_else(|| Error::parse(path, line, "expected `key: value`"))?;
        let value = value.trim().to_string();
        match key.trim() {
            "task" if task.is_none() => task = Some((line, value)),
            "free" if free.is_none() => free = Some(value),
            "label" => labels.push(value),
            "task" | "free" => {
                return Err(Error::parse(path, line, format!("duplicate key {key:?}")))
            }
            other => return Err(Error::parse(path, line, format!("unknown key {other:?}"))),
        }
    }
    let (line, task_name) = task.ok_or_else(|| Error::parse(path, 0, "missing `task`"))?;
    let task = Task::from_name(&task_name, labels.len())
        .ok_or_else(|| Error::parse(path, line, format!("unknown task {task_name:?}")))?;
    let free = free.ok_or_else(|| Error::parse(path, 0, "missing `free`"))?;
    let free_index = labels
        .iter()
        .position(|l| *l == free)
        .ok_or_else(|| Error::parse(path, 0, format!("free label {free:?} is not declared")))?;
    LabelSpace::new(task, labels, free_index).map_err(|e| Error::file(path, e))
}

pub fn format_label_space(space: &LabelSpace) -> String {
    let mut out = format!("task: {}\n", space.task().name());
    let free = space.name(space.free_label_index()).unwrap_or_default();
    let _ = writeln!(out, "free: {free}");
    for l in space.labels() {
        let _ = writeln!(out, "label: {l}");
    }
    out
}

pub fn read_label_space(path: &Path) -> Result<LabelSpace> {
    parse_label_space(path, &read_text(path)?)
}

/// One label name per frame, one per line.
pub fn parse_labels(path: &Path, text: &str, space: &LabelSpace) -> Result<StateSequence> {
    let mut states = Vec::new();
    for (line, l) in content_lines(text) {
        states.push(
            space
                .index_of(l)
                .map_err(|_| Error::parse(path, line, format!("unknown label {l:?}")))?,
        );
    }
    StateSequence::new(space.clone(), states).map_err(|e| Error::file(path, e))
}

pub fn format_labels(seq: &StateSequence) -> String {
    let mut out = String::with_capacity(seq.len() * 8);
    for name in seq.names() {
        out.push_str(name);
        out.push('\n');
    }
    out
}

pub fn read_labels(path: &Path, space: &LabelSpace) -> Result<StateSequence> {
    parse_labels(path, &read_text(path)?, space)
}

pub fn format_candidates(set: &CandidateSet) -> String {
    let mut out = String::from("# frame_index\tconfidence\n");
    for &(i, c) in set.entries() {
        let _ = writeln!(out, "{i}\t{c:?}");
    }
    out
}

pub fn parse_candidates(path: &Path, text: &str) -> Result<CandidateSet> {
    let mut entries: Vec<(usize, f64)> = Vec::new();
    for (line, l) in content_lines(text) {
        let mut parts = l.split_whitespace();
        let (Some(i), Some(c), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(
                path,
                line,
                "expected `frame_index confidence`",
            ));
        };
        let i: usize = i
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad frame index {i:?}")))?;
        let c: f64 = c
            .parse()
            .ok()
            .filter(|c: &f64| c.is_finite())
            .ok_or_else(|| Error::parse(path, line, format!("bad confidence {c:?}")))?;
        if entries.last().is_some_and(|&(p, _)| p >= i) {
            return Err(Error::parse(path, line, "frame indices must increase"));
        }
        entries.push((i, c));
    }
    Ok(CandidateSet::from_entries(entries))
}

pub fn read_candidates(path: &Path) -> Result<CandidateSet> {
    parse_candidates(path, &read_text(path)?)
}

/// Video directories listed one per line, relative to the manifest's folder.
/// The directory name is the video id.
pub fn read_manifest(path: &Path) -> Result<Vec<(String, PathBuf)>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out: Vec<(String, PathBuf)> = Vec::new();
    for (line, l) in content_lines(&read_text(path)?) {
        let dir = base.join(l);
        let id = dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::parse(path, line, "entry has no directory name"))?
            .to_string();
        if out.iter().any(|(other, _)| *other == id) {
            return Err(Error::parse(
                path,
                line,
                format!("duplicate video id {id:?}"),
            ));
        }
        out.push((id, dir));
    }
    if out.is_empty() {
        return Err(Error::parse(path, 0, "manifest lists no videos"));
    }
    Ok(out)
}
