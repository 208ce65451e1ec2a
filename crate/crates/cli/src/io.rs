use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rankcot::domain::{FunctionTable, Word};
use rankcot::trees::DecisionTree;
use serde::de::DeserializeOwned;
use serde_json::Value;

/// Reads a file, or standard input for `-`.
pub fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading standard input")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_json(path: &Path) -> Result<Value> {
    serde_json::from_str(&read_text(path)?).with_context(|| format!("parsing JSON in {}", path.display()))
}

pub fn read_as<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_value(read_json(path)?).with_context(|| format!("decoding {}", path.display()))
}

/// A function given either as a table or as a tree to tabulate.
pub fn read_function(path: &Path, budget: usize) -> Result<FunctionTable> {
    let v = read_json(path)?;
    if v.get("outputs").is_some() {
        Ok(serde_json::from_value(v)?)
    } else if v.get("root").is_some() {
        let tree: DecisionTree = serde_json::from_value(v)?;
        Ok(tree.to_table(budget)?)
    } else {
        bail!("{} is neither a function table nor a tree", path.display())
    }
}

/// `0110` for binary words, otherwise comma-separated 0-based letters.
pub fn parse_word(text: &str) -> Result<Word> {
    let text = text.trim();
    if text.contains(',') {
        let letters = text
            .split(',')
            .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad letter {s:?}")))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Word(letters));
    }
    Ok(Word::from_bits(text)?)
}

/// Writes to `path` or standard output, always ending with a newline.
pub struct Sink(Option<PathBuf>);

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Sink(path)
    }

    pub fn text(&self, body: &str) -> Result<()> {
        let mut body = body.to_string();
        if !body.ends_with('\n') {
            body.push('\n');
        }
        match &self.0 {
            Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(body.as_bytes())?;
                Ok(out.flush()?)
            }
        }
    }

    pub fn json(&self, v: &impl serde::Serialize) -> Result<()> {
        self.text(&serde_json::to_string_pretty(v)?)
    }
}
