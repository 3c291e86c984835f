//! CSV and ARFF readers, and the CSV writer used for generated streams.
//!
//! Nominal attributes are one-hot encoded: ARFF in declaration order, CSV in
//! order of first appearance. Missing values are rejected.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{ClassLabel, FeatureVector, LabeledInstance, Schema};

/// A fully materialized stream.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub schema: Schema,
    pub instances: Vec<LabeledInstance>,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "?"
}

#[derive(Default)]
struct Interner {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    fn from_values(values: &[String]) -> Self {
        let mut i = Interner::default();
        for v in values {
            i.intern(v);
        }
        i
    }

    fn intern(&mut self, value: &str) -> u32 {
        if let Some(&id) = self.ids.get(value) {
            return id;
        }
        let id = self.names.len() as u32;
        self.ids.insert(value.to_owned(), id);
        self.names.push(value.to_owned());
        id
    }

    fn get(&self, value: &str) -> Option<u32> {
        self.ids.get(value).copied()
    }
}

enum Column {
    Numeric,
    Nominal(Interner),
}

impl Column {
    fn width(&self) -> usize {
        match self {
            Column::Numeric => 1,
            Column::Nominal(values) => values.names.len(),
        }
    }

    fn feature_names(&self, name: &str, out: &mut Vec<String>) {
        match self {
            Column::Numeric => out.push(name.to_owned()),
            Column::Nominal(values) => out.extend(values.names.iter().map(|v| format!("{name}={v}"))),
        }
    }
}

fn parse_number(path: &Path, line: usize, cell: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(parse_err(path, line, format!("non-finite value {cell:?}"))),
        Err(_) => Err(parse_err(path, line, format!("not a number: {cell:?}"))),
    }
}

fn encode_row(
    path: &Path,
    line: usize,
    columns: &[(usize, Column)],
    cells: &[&str],
    dim: usize,
) -> Result<Vec<f64>> {
    let mut x = Vec::with_capacity(dim);
    for (idx, col) in columns {
        let cell = cells[*idx];
        match col {
            Column::Numeric => x.push(parse_number(path, line, cell)?),
            Column::Nominal(values) => {
                let v = values
                    .get(cell)
                    .ok_or_else(|| parse_err(path, line, format!("undeclared nominal value {cell:?}")))?;
                x.extend((0..values.names.len()).map(|i| if i == v as usize { 1.0 } else { 0.0 }));
            }
        }
    }
    Ok(x)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Reads a CSV stream. The label column defaults to the last one. A column
/// where every cell is a number is numeric; any other column is nominal.
pub fn read_csv(path: impl AsRef<Path>, label_column: Option<usize>, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };

    let header: Option<Vec<String>> = if has_header {
        Some(reader.headers().map_err(csv_err)?.iter().map(str::to_owned).collect())
    } else {
        None
    };
    let mut rows: Vec<(usize, csv::StringRecord)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        rows.push((line, record));
    }

    let width = header
        .as_ref()
        .map(Vec::len)
        .or_else(|| rows.first().map(|(_, r)| r.len()))
        .ok_or_else(|| parse_err(path, 1, "file has no columns"))?;
    if width < 2 {
        return Err(parse_err(path, 1, "need at least one feature column and a label column"));
    }
    let label_col = label_column.unwrap_or(width - 1);
    if label_col >= width {
        return Err(Error::config(format!(
            "label column {label_col} is out of range for {width} columns"
        )));
    }
    for (line, r) in &rows {
        if r.len() != width {
            return Err(parse_err(
                path,
                *line,
                format!("expected {width} fields, found {}", r.len()),
            ));
        }
        if let Some(i) = r.iter().position(is_missing) {
            return Err(parse_err(path, *line, format!("missing value in column {i}")));
        }
    }

    let names: Vec<String> = header.unwrap_or_else(|| (0..width).map(|i| format!("x{i}")).collect());
    let mut columns = Vec::with_capacity(width - 1);
    for c in (0..width).filter(|&c| c != label_col) {
        let numeric = rows.iter().all(|(_, r)| r[c].parse::<f64>().is_ok());
        let col = if numeric {
            Column::Numeric
        } else {
            let mut values = Interner::default();
            for (_, r) in &rows {
                values.intern(&r[c]);
            }
            Column::Nominal(values)
        };
        columns.push((c, col));
    }
    let dim = columns.iter().map(|(_, c)| c.width()).sum();

    let mut labels = Interner::default();
    let mut instances = Vec::with_capacity(rows.len());
    for (seq, (line, r)) in rows.iter().enumerate() {
        let cells: Vec<&str> = r.iter().collect();
        let x = encode_row(path, *line, &columns, &cells, dim)?;
        let y = labels.intern(cells[label_col]);
        instances.push(LabeledInstance::new(FeatureVector::new(x)?, ClassLabel(y), seq as u64));
    }

    let mut feature_names = Vec::with_capacity(dim);
    for (c, col) in &columns {
        col.feature_names(&names[*c], &mut feature_names);
    }
    Ok(Dataset {
        schema: Schema {
            name: stem(path),
            attribute_count: width - 1,
            feature_names,
            label_names: labels.names,
        },
        instances,
    })
}

/// Splits one comma-separated ARFF line, honouring single and double quotes.
fn split_fields(line: &str) -> std::result::Result<Vec<String>, String> {
    let mut fields = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let mut field = String::new();
        match chars.peek().copied() {
            Some(q @ ('\'' | '"')) => {
                chars.next();
                loop {
                    match chars.next() {
                        Some('\\') => field.extend(chars.next()),
                        Some(c) if c == q => break,
                        Some(c) => field.push(c),
                        None => return Err("unterminated quote".into()),
                    }
                }
                while chars.peek().is_some_and(|c| c.is_whitespace()) {
                    chars.next();
                }
                if !matches!(chars.peek(), None | Some(',')) {
                    return Err("unexpected text after quoted value".into());
                }
            }
            _ => {
                while let Some(&c) = chars.peek() {
                    if c == ',' {
                        break;
                    }
                    field.push(c);
                    chars.next();
                }
                field.truncate(field.trim_end().len());
            }
        }
        fields.push(field);
        match chars.next() {
            Some(',') => continue,
            None => return Ok(fields),
            Some(c) => return Err(format!("unexpected character {c:?}")),
        }
    }
}

/// Next whitespace-delimited or quoted token and the rest of the line.
fn next_token(s: &str) -> Option<(String, &str)> {
    let s = s.trim_start();
    let mut chars = s.char_indices();
    match chars.next()? {
        (_, q @ ('\'' | '"')) => {
            let end = s[1..].find(q)? + 1;
            Some((s[1..end].to_owned(), &s[end + 1..]))
        }
        _ => {
            let end = s.find(char::is_whitespace).unwrap_or(s.len());
            Some((s[..end].to_owned(), &s[end..]))
        }
    }
}

/// Reads an ARFF stream; the last attribute is the class and must be nominal.
pub fn read_arff(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;

    let mut relation = stem(path);
    let mut attributes: Vec<(String, Column)> = Vec::new();
    let mut in_data = false;
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if in_data {
            if line.starts_with('{') {
                return Err(parse_err(path, line_no, "sparse ARFF rows are not supported"));
            }
            let fields = split_fields(line).map_err(|m| parse_err(path, line_no, m))?;
            rows.push((line_no, fields));
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            if let Some((name, _)) = next_token(&line["@relation".len()..]) {
                relation = name;
            }
        } else if lower.starts_with("@attribute") {
            let rest = &line["@attribute".len()..];
            let (name, ty) = next_token(rest)
                .ok_or_else(|| parse_err(path, line_no, "attribute without a name"))?;
            let ty = ty.trim();
            let column = if let Some(inner) = ty.strip_prefix('{') {
                let inner = inner
                    .strip_suffix('}')
                    .ok_or_else(|| parse_err(path, line_no, "unterminated nominal value list"))?;
                let values = split_fields(inner).map_err(|m| parse_err(path, line_no, m))?;
                if values.is_empty() || values.iter().any(String::is_empty) {
                    return Err(parse_err(path, line_no, "empty nominal value"));
                }
                Column::Nominal(Interner::from_values(&values))
            } else {
                match ty.to_ascii_lowercase().as_str() {
                    "numeric" | "real" | "integer" => Column::Numeric,
                    other => {
                        return Err(parse_err(
                            path,
                            line_no,
                            format!("unsupported attribute type {other:?}"),
                        ))
                    }
                }
            };
            attributes.push((name, column));
        } else if lower.starts_with("@data") {
            in_data = true;
        } else {
            return Err(parse_err(path, line_no, format!("unexpected header line {line:?}")));
        }
    }

    if !in_data {
        return Err(parse_err(path, text.lines().count(), "missing @data section"));
    }
    let Some((_, Column::Nominal(labels))) = attributes.pop() else {
        return Err(Error::config(format!(
            "{}: the last attribute must be a nominal class",
            path.display()
        )));
    };
    if attributes.is_empty() {
        return Err(Error::config(format!("{}: no feature attributes", path.display())));
    }
    let width = attributes.len() + 1;
    let columns: Vec<(usize, Column)> = attributes
        .iter_mut()
        .enumerate()
        .map(|(i, (_, c))| (i, std::mem::replace(c, Column::Numeric)))
        .collect();
    let dim = columns.iter().map(|(_, c)| c.width()).sum();

    let mut instances = Vec::with_capacity(rows.len());
    for (seq, (line_no, fields)) in rows.iter().enumerate() {
        if fields.len() != width {
            return Err(parse_err(
                path,
                *line_no,
                format!("expected {width} values, found {}", fields.len()),
            ));
        }
        if let Some(i) = fields.iter().position(|f| is_missing(f)) {
            return Err(parse_err(path, *line_no, format!("missing value for attribute {i}")));
        }
        let cells: Vec<&str> = fields.iter().map(String::as_str).collect();
        let x = encode_row(path, *line_no, &columns, &cells, dim)?;
        let y = labels
            .get(cells[width - 1])
            .ok_or_else(|| parse_err(path, *line_no, format!("undeclared class {:?}", cells[width - 1])))?;
        instances.push(LabeledInstance::new(FeatureVector::new(x)?, ClassLabel(y), seq as u64));
    }

    let mut feature_names = Vec::with_capacity(dim);
    for ((name, _), (_, col)) in attributes.iter().zip(&columns) {
        col.feature_names(name, &mut feature_names);
    }
    Ok(Dataset {
        schema: Schema {
            name: relation,
            attribute_count: width - 1,
            feature_names,
            label_names: labels.names,
        },
        instances,
    })
}

/// Writes instances as CSV: one column per encoded feature, then `class`
/// holding the label name.
pub fn write_csv<W: Write>(
    out: W,
    schema: &Schema,
    instances: impl IntoIterator<Item = LabeledInstance>,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = schema.feature_names.iter().map(String::as_str).collect();
    header.push("class");
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for inst in instances {
        row.clear();
        row.extend(inst.features.iter().map(|v| v.to_string()));
        row.push(
            schema
                .label_name(inst.label)
                .map_or_else(|| inst.label.to_string(), str::to_owned),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
