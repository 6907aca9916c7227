//! Typed classification datasets loaded from CSV plus a JSON schema sidecar.
//!
//! Schema format: `{"target":"class","columns":{"sepal":"numeric","class":"categorical"}}`.
//! Every CSV header column must be declared. Empty cells, `?` and `NA` are
//! treated as missing values and rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

/// One cell value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Cat(String),
}

/// Column storage. Categorical levels are sorted so codes do not depend on row order.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical { levels: Vec<String>, codes: Vec<u32> },
}

impl Column {
    pub fn kind(&self) -> AttributeKind {
        match self {
            Column::Numeric(_) => AttributeKind::Numeric,
            Column::Categorical { .. } => AttributeKind::Categorical,
        }
    }

    fn categorical(values: Vec<String>) -> Column {
        let levels: Vec<String> = values.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<&str, u32> = levels.iter().enumerate().map(|(i, l)| (l.as_str(), i as u32)).collect();
        let codes = values.iter().map(|v| index[v.as_str()]).collect();
        Column::Categorical { levels, codes }
    }

    /// Number of occurrences of each level, in level order.
    pub fn level_counts(&self) -> Option<Vec<usize>> {
        match self {
            Column::Numeric(_) => None,
            Column::Categorical { levels, codes } => {
                let mut counts = vec![0usize; levels.len()];
                for &c in codes {
                    counts[c as usize] += 1;
                }
                Some(counts)
            }
        }
    }
}

/// Counts that decide which algorithms may process a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub n_numeric: usize,
    pub n_categorical: usize,
    pub n_classes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    attributes: Vec<Attribute>,
    target_index: usize,
    columns: Vec<Column>,
    n_rows: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Schema {
    target: String,
    columns: BTreeMap<String, AttributeKind>,
}

fn is_missing(token: &str) -> bool {
    matches!(token.trim(), "" | "?" | "NA")
}

impl Dataset {
    /// Builds a dataset from row tuples, enforcing every invariant.
    pub fn new(name: impl Into<String>, attributes: Vec<Attribute>, target_index: usize, rows: Vec<Vec<Value>>) -> Result<Self> {
        let width = attributes.len();
        let mut raw: Vec<Vec<Value>> = vec![Vec::with_capacity(rows.len()); width];
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::Dataset(format!(
                    "row {} has {} values, expected {width}",
                    r + 1,
                    row.len()
                )));
            }
            for (c, v) in row.into_iter().enumerate() {
                raw[c].push(v);
            }
        }
        let mut columns = Vec::with_capacity(width);
        for (attr, values) in attributes.iter().zip(raw) {
            let col = match attr.kind {
                AttributeKind::Numeric => Column::Numeric(
                    values
                        .into_iter()
                        .enumerate()
                        .map(|(r, v)| match v {
                            Value::Num(x) if x.is_finite() => Ok(x),
                            other => Err(Error::Dataset(format!(
                                "column `{}` row {}: expected a finite number, got {other:?}",
                                attr.name,
                                r + 1
                            ))),
                        })
                        .collect::<Result<_>>()?,
                ),
                AttributeKind::Categorical => Column::categorical(
                    values
                        .into_iter()
                        .map(|v| match v {
                            Value::Cat(s) => s,
                            Value::Num(x) => x.to_string(),
                        })
                        .collect(),
                ),
            };
            columns.push(col);
        }
        Self::from_columns(name, attributes, target_index, columns)
    }

    /// Builds a dataset from columns, enforcing every invariant.
    pub fn from_columns(name: impl Into<String>, attributes: Vec<Attribute>, target_index: usize, columns: Vec<Column>) -> Result<Self> {
        if attributes.len() != columns.len() {
            return Err(Error::Dataset("attribute and column counts differ".into()));
        }
        let target = attributes
            .get(target_index)
            .ok_or_else(|| Error::Dataset(format!("target index {target_index} out of bounds")))?;
        if target.kind != AttributeKind::Categorical {
            return Err(Error::Dataset(format!("target `{}` must be categorical", target.name)));
        }
        let mut names = BTreeSet::new();
        for a in &attributes {
            if !names.insert(a.name.as_str()) {
                return Err(Error::Dataset(format!("duplicate attribute `{}`", a.name)));
            }
        }
        let n_rows = match &columns[target_index] {
            Column::Categorical { codes, .. } => codes.len(),
            Column::Numeric(v) => v.len(),
        };
        for (a, c) in attributes.iter().zip(&columns) {
            let len = match c {
                Column::Numeric(v) => v.len(),
                Column::Categorical { codes, .. } => codes.len(),
            };
            if len != n_rows || c.kind() != a.kind {
                return Err(Error::Dataset(format!("column `{}` is inconsistent with the schema", a.name)));
            }
        }
        if n_rows < 2 {
            return Err(Error::Dataset(format!("need at least 2 rows, got {n_rows}")));
        }
        let ds = Dataset {
            name: name.into(),
            attributes,
            target_index,
            columns,
            n_rows,
        };
        if ds.n_classes() < 2 {
            return Err(Error::Dataset("target has fewer than 2 distinct classes".into()));
        }
        Ok(ds)
    }

    /// Parses CSV text against a schema.
    pub fn from_csv(name: impl Into<String>, csv_data: impl Read, schema_json: &str) -> Result<Self> {
        let schema: Schema = serde_json::from_str(schema_json).map_err(|e| Error::Dataset(format!("schema: {e}")))?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(csv_data);
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Dataset(format!("header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        for declared in schema.columns.keys() {
            if !header.contains(declared) {
                return Err(Error::Dataset(format!("schema column `{declared}` not in CSV header")));
            }
        }
        let mut attributes = Vec::with_capacity(header.len());
        for h in &header {
            let kind = *schema
                .columns
                .get(h)
                .ok_or_else(|| Error::Dataset(format!("column `{h}` missing from schema")))?;
            attributes.push(Attribute { name: h.clone(), kind });
        }
        let target_index = header
            .iter()
            .position(|h| *h == schema.target)
            .ok_or_else(|| Error::Dataset(format!("target `{}` not in CSV header", schema.target)))?;

        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            // header is line 1
            let line = i + 2;
            let record = record.map_err(|e| Error::Dataset(format!("line {line}: {e}")))?;
            if record.len() != header.len() {
                return Err(Error::Dataset(format!(
                    "line {line}: arity mismatch ({} values, expected {})",
                    record.len(),
                    header.len()
                )));
            }
            let mut row = Vec::with_capacity(header.len());
            for (token, attr) in record.iter().zip(&attributes) {
                if is_missing(token) {
                    return Err(Error::Dataset(format!("line {line}: missing value in column `{}`", attr.name)));
                }
                row.push(match attr.kind {
                    AttributeKind::Numeric => {
                        let x: f64 = token.parse().map_err(|_| {
                            Error::Dataset(format!(
                                "line {line}: non-numeric token `{token}` in numeric column `{}`",
                                attr.name
                            ))
                        })?;
                        Value::Num(x)
                    }
                    AttributeKind::Categorical => Value::Cat(token.to_string()),
                });
            }
            rows.push(row);
        }
        Dataset::new(name, attributes, target_index, rows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn target_index(&self) -> usize {
        self.target_index
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    /// Indices of the non-target ("common") attributes, in column order.
    pub fn common_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.attributes.len()).filter(move |&i| i != self.target_index)
    }

    pub fn target_levels(&self) -> &[String] {
        match &self.columns[self.target_index] {
            Column::Categorical { levels, .. } => levels,
            Column::Numeric(_) => unreachable!("target is categorical"),
        }
    }

    pub fn target_codes(&self) -> &[u32] {
        match &self.columns[self.target_index] {
            Column::Categorical { codes, .. } => codes,
            Column::Numeric(_) => unreachable!("target is categorical"),
        }
    }

    pub fn n_classes(&self) -> usize {
        self.target_levels().len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        self.columns[self.target_index].level_counts().expect("categorical target")
    }

    pub fn profile(&self) -> DatasetProfile {
        let (mut n_numeric, mut n_categorical) = (0, 0);
        for i in self.common_indices() {
            match self.attributes[i].kind {
                AttributeKind::Numeric => n_numeric += 1,
                AttributeKind::Categorical => n_categorical += 1,
            }
        }
        DatasetProfile {
            n_numeric,
            n_categorical,
            n_classes: self.n_classes(),
        }
    }

    /// The value at (`row`, `col`).
    pub fn value(&self, row: usize, col: usize) -> Value {
        match &self.columns[col] {
            Column::Numeric(v) => Value::Num(v[row]),
            Column::Categorical { levels, codes } => Value::Cat(levels[codes[row] as usize].clone()),
        }
    }

    pub fn row(&self, row: usize) -> Vec<Value> {
        (0..self.columns.len()).map(|c| self.value(row, c)).collect()
    }

    /// A new dataset made of the given rows (repetition allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let data = rows.iter().map(|&r| self.row(r)).collect();
        Dataset::new(self.name.clone(), self.attributes.clone(), self.target_index, data)
    }
}

impl Dataset {
    /// The schema sidecar describing this dataset.
    pub fn schema_json(&self) -> String {
        let columns: BTreeMap<&str, AttributeKind> = self.attributes.iter().map(|a| (a.name.as_str(), a.kind)).collect();
        serde_json::json!({
            "target": self.attributes[self.target_index].name,
            "columns": columns,
        })
        .to_string()
    }

    /// CSV text with a header row; numbers use their shortest round-trip form.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Dataset(format!("csv write: {e}"));
        w.write_record(self.attributes.iter().map(|a| a.name.as_str())).map_err(io)?;
        for r in 0..self.n_rows {
            let cells: Vec<String> = self
                .row(r)
                .into_iter()
                .map(|v| match v {
                    Value::Num(x) => x.to_string(),
                    Value::Cat(s) => s,
                })
                .collect();
            w.write_record(&cells).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Dataset(format!("csv write: {e}")))?;
        Ok(String::from_utf8(bytes).expect("utf-8 input"))
    }

    /// Writes the CSV and its schema sidecar.
    pub fn write_files(&self, data_path: impl AsRef<Path>, schema_path: impl AsRef<Path>) -> Result<()> {
        let (d, s) = (data_path.as_ref(), schema_path.as_ref());
        std::fs::write(d, self.to_csv()?).map_err(|e| Error::io(d, e))?;
        std::fs::write(s, self.schema_json()).map_err(|e| Error::io(s, e))
    }
}

/// Loads a dataset from a CSV file and its schema file.
pub fn load_dataset(data_path: impl AsRef<Path>, schema_path: impl AsRef<Path>) -> Result<Dataset> {
    let data_path = data_path.as_ref();
    let schema_path = schema_path.as_ref();
    let schema = std::fs::read_to_string(schema_path).map_err(|e| Error::io(schema_path, e))?;
    let file = File::open(data_path).map_err(|e| Error::io(data_path, e))?;
    let name = data_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Dataset::from_csv(name, file, &schema)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &str = r#"{"target":"class","columns":{"a":"numeric","b":"numeric","c":"categorical","class":"categorical"}}"#;

    #[test]
    fn loads_typed_columns() {
        let csv = "a,b,c,class\n1.0,2,x,yes\n3.5,4,y,no\n";
        let ds = Dataset::from_csv("t", csv.as_bytes(), SCHEMA).unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert_eq!(ds.target_index(), 3);
        assert_eq!(ds.common_indices().count(), 3);
        assert_eq!(
            ds.profile(),
            DatasetProfile {
                n_numeric: 2,
                n_categorical: 1,
                n_classes: 2
            }
        );
        assert_eq!(ds.target_levels(), ["no", "yes"]);
        assert_eq!(ds.value(1, 0), Value::Num(3.5));
    }

    #[test]
    fn empty_cell_is_missing() {
        let csv = "a,b,c,class\n1.0,,x,yes\n3.5,4,y,no\n";
        let err = Dataset::from_csv("t", csv.as_bytes(), SCHEMA).unwrap_err();
        assert!(err.to_string().contains("missing value"), "{err}");
    }

    #[test]
    fn non_numeric_token_names_column() {
        let csv = "a,b,c,class\nabc,1,x,yes\n3.5,4,y,no\n";
        let err = Dataset::from_csv("t", csv.as_bytes(), SCHEMA).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`a`") && msg.contains("abc"), "{msg}");
    }

    #[test]
    fn arity_mismatch_reports_line() {
        let csv = "a,b,c,class\n1,2,x,yes\n3.5,4,no\n";
        let err = Dataset::from_csv("t", csv.as_bytes(), SCHEMA).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn numeric_target_rejected() {
        let schema = r#"{"target":"class","columns":{"a":"numeric","class":"numeric"}}"#;
        let csv = "a,class\n1,0\n2,1\n";
        let err = Dataset::from_csv("t", csv.as_bytes(), schema).unwrap_err();
        assert!(err.to_string().contains("categorical"), "{err}");
    }

    #[test]
    fn single_class_rejected() {
        let csv = "a,b,c,class\n1,2,x,yes\n3.5,4,y,yes\n";
        assert!(Dataset::from_csv("t", csv.as_bytes(), SCHEMA).is_err());
    }

    #[test]
    fn undeclared_column_rejected() {
        let csv = "a,b,c,d,class\n1,2,x,1,yes\n3.5,4,y,1,no\n";
        assert!(Dataset::from_csv("t", csv.as_bytes(), SCHEMA).is_err());
    }
}
