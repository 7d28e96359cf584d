use std::path::PathBuf;

use anyhow::{Context, Result};

pub struct Sink {
    pub json: bool,
    pub output: Option<PathBuf>,
}

/// Renders a header-plus-rows table as CSV (quoting fields that need it) or
/// as a JSON array of header-keyed objects, and writes it to the sink.
pub fn emit(sink: &Sink, table: &[Vec<String>]) -> Result<()> {
    let text = if sink.json {
        let (header, rows) = table.split_first().context("table needs a header")?;
        let mut out = serde_json::Value::Array(
            rows.iter()
                .map(|row| {
                    header
                        .iter()
                        .zip(row)
                        .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                        .collect::<serde_json::Map<_, _>>()
                        .into()
                })
                .collect(),
        );
        // render deterministically with trailing newline
        let rendered = serde_json::to_string_pretty(&out)?;
        out.take();
        format!("{rendered}\n")
    } else {
        let mut out = String::new();
        for row in table {
            let line: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    };
    write_text(sink, &text)
}

pub fn write_text(sink: &Sink, text: &str) -> Result<()> {
    match &sink.output {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_field(f: &str) -> String {
    if f.contains(',') || f.contains('"') || f.contains('\n') {
        format!("\"{}\"", f.replace('"', "\"\""))
    } else {
        f.to_string()
    }
}
