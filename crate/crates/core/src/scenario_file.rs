//! Plain-text scenario files.
//!
//! ```text
//! # reference scenario
//! user1.h = 0.8
//! user1.g = 0.5
//! user1.p_max = 2
//! user1.p_circuit = 0.3
//! user2.h = 0.4
//! user2.g = 0.3
//! user2.p_max = 2
//! user2.p_circuit = 0.3
//! sigma_h_sq = 0     # optional, defaults to 0
//! block_t = 1        # optional, defaults to 1
//! ```
//!
//! One `key = value` pair per line in any order. `#` starts a comment, blank
//! lines are ignored. Values are decimal numbers in SI units.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Scenario, UserLink};

const USER_FIELDS: [&str; 4] = ["h", "g", "p_max", "p_circuit"];

/// A parsed scenario together with the comment lines that preceded the first
/// key, so that files written back keep their description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub scenario: Scenario,
    /// Header comment lines without the leading `#` and one optional space.
    pub comments: Vec<String>,
}

impl ScenarioFile {
    pub fn new(scenario: Scenario) -> Self {
        ScenarioFile {
            scenario,
            comments: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse(text)
    }

    /// Canonical text form; [`parse`] reads it back to an identical value.
    pub fn to_text(&self) -> String {
        format(self)
    }
}

fn all_keys() -> Vec<String> {
    let mut keys = Vec::with_capacity(10);
    for user in 1..=2 {
        for field in USER_FIELDS {
            keys.push(format!("user{user}.{field}"));
        }
    }
    keys.push("sigma_h_sq".into());
    keys.push("block_t".into());
    keys
}

fn parse_error(line: Option<usize>, field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        field: field.into(),
        message: message.into(),
    }
}

pub fn parse(text: &str) -> Result<ScenarioFile> {
    let known = all_keys();
    let mut values: HashMap<String, (f64, usize)> = HashMap::new();
    let mut comments = Vec::new();
    let mut header = true;

    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let (content, comment) = match raw.split_once('#') {
            Some((content, comment)) => (content.trim(), Some(comment)),
            None => (raw.trim(), None),
        };
        if content.is_empty() {
            if let (true, Some(comment)) = (header, comment) {
                comments.push(comment.strip_prefix(' ').unwrap_or(comment).to_string());
            }
            continue;
        }
        header = false;
        let Some((key, value)) = content.split_once('=') else {
            return Err(parse_error(
                Some(line_no),
                content,
                "expected `key = value`",
            ));
        };
        let key = key.trim();
        let value = value.trim();
        if !known.iter().any(|k| k == key) {
            return Err(parse_error(Some(line_no), key, "unknown key"));
        }
        if let Some((_, first)) = values.get(key) {
            return Err(parse_error(
                Some(line_no),
                key,
                format!("duplicate key, first set on line {first}"),
            ));
        }
        let number: f64 = value
            .parse()
            .map_err(|_| parse_error(Some(line_no), key, format!("`{value}` is not a number")))?;
        values.insert(key.to_string(), (number, line_no));
    }

    let get = |key: &str| -> Result<f64> {
        values
            .get(key)
            .map(|&(v, _)| v)
            .ok_or_else(|| parse_error(None, key, "missing required key"))
    };
    let mut users = Vec::with_capacity(2);
    for user in 1..=2 {
        let field = |name: &str| get(&format!("user{user}.{name}"));
        users.push(UserLink {
            h: field("h")?,
            g: field("g")?,
            p_max: field("p_max")?,
            p_circuit: field("p_circuit")?,
        });
    }
    let sigma = values.get("sigma_h_sq").map_or(0.0, |&(v, _)| v);
    let block_t = values.get("block_t").map_or(1.0, |&(v, _)| v);

    let scenario = Scenario::new([users[0], users[1]], sigma, block_t).map_err(|e| match e {
        Error::InvalidParameter { field, reason } => {
            let line = values.get(&field).map(|&(_, l)| l);
            parse_error(line, &field, reason)
        }
        other => other,
    })?;
    Ok(ScenarioFile { scenario, comments })
}

pub fn format(file: &ScenarioFile) -> String {
    let mut out = String::new();
    for comment in &file.comments {
        if comment.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {comment}");
        }
    }
    let s = &file.scenario;
    for (i, user) in s.users().iter().enumerate() {
        let values = [user.h, user.g, user.p_max, user.p_circuit];
        for (name, value) in USER_FIELDS.iter().zip(values) {
            let _ = writeln!(out, "user{}.{name} = {value}", i + 1);
        }
    }
    let _ = writeln!(out, "sigma_h_sq = {}", s.sigma_h_sq());
    let _ = writeln!(out, "block_t = {}", s.block_t());
    out
}
