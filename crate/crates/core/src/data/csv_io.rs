use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Column, ColumnKind, Dataset};
use crate::error::{Error, Result};

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

impl LabelColumn {
    /// Parses a user-supplied reference: an integer is an index, anything
    /// else a header name.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        }
    }
}

/// Column kinds for the feature columns (label excluded), in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schema {
    Infer,
    Explicit(Vec<ColumnKind>),
}

/// Integer-valued numeric columns with at most this many distinct values are
/// inferred as categorical.
const MAX_INTEGER_LEVELS: usize = 32;

pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, label, schema)
}

pub fn read_csv<R: Read>(reader: R, label: &LabelColumn, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(e, "<header>"))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() {
        return Err(Error::Parse {
            row: 1,
            column: "<header>".into(),
            message: "empty header".into(),
        });
    }

    let label_idx = match label {
        LabelColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingLabel(name.clone()))?,
        LabelColumn::Index(i) if *i < header.len() => *i,
        LabelColumn::Index(i) => return Err(Error::MissingLabel(format!("#{i}"))),
        LabelColumn::Last => header.len() - 1,
    };

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(e, ""))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        for (j, field) in record.iter().enumerate() {
            if field.trim().is_empty() {
                return Err(Error::Parse {
                    row: line,
                    column: header[j].clone(),
                    message: "missing value".into(),
                });
            }
            raw[j].push(field.to_string());
        }
        lines.push(line);
    }
    if lines.is_empty() {
        return Err(Error::InvalidDataset("csv has a header but no rows".into()));
    }

    let feature_cols: Vec<usize> = (0..header.len()).filter(|&j| j != label_idx).collect();
    let kinds: Vec<ColumnKind> = match schema {
        Schema::Explicit(kinds) => {
            if kinds.len() != feature_cols.len() {
                return Err(Error::InvalidArgument(format!(
                    "schema lists {} kinds for {} feature columns",
                    kinds.len(),
                    feature_cols.len()
                )));
            }
            kinds.clone()
        }
        Schema::Infer => feature_cols
            .iter()
            .map(|&j| infer_kind(&raw[j], &lines, &header[j]))
            .collect::<Result<_>>()?,
    };

    let mut columns = Vec::with_capacity(feature_cols.len());
    let mut levels = Vec::with_capacity(feature_cols.len());
    for (&j, kind) in feature_cols.iter().zip(&kinds) {
        match kind {
            ColumnKind::Categorical => {
                let (codes, lv) = recode(&raw[j]);
                columns.push(Column::Categorical {
                    codes,
                    cardinality: lv.len(),
                });
                levels.push(Some(lv));
            }
            ColumnKind::Continuous => {
                let mut values = Vec::with_capacity(raw[j].len());
                for (s, &line) in raw[j].iter().zip(&lines) {
                    values.push(parse_finite(s, line, &header[j])?);
                }
                columns.push(Column::Continuous(values));
                levels.push(None);
            }
        }
    }

    let (labels, class_names) = recode(&raw[label_idx]);
    let n_classes = class_names.len();
    let names = feature_cols.iter().map(|&j| header[j].clone()).collect();
    Dataset::new(columns, labels, n_classes, names)?
        .with_label_name(header[label_idx].clone())
        .with_class_names(class_names)?
        .with_levels(levels)
}

/// Writes the dataset back in its original encoding. Sample weights are not
/// serialized.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.push(ds.label_name());
    wtr.write_record(&header).map_err(|e| Error::Serialize(e.to_string()))?;

    let mut row = Vec::with_capacity(header.len());
    for k in 0..ds.n_samples() {
        row.clear();
        for (i, col) in ds.columns().iter().enumerate() {
            row.push(match col {
                Column::Categorical { codes, .. } => match ds.levels(i) {
                    Some(lv) => lv[codes[k] as usize].clone(),
                    None => codes[k].to_string(),
                },
                Column::Continuous(values) => values[k].to_string(),
            });
        }
        row.push(ds.class_names()[ds.labels()[k] as usize].clone());
        wtr.write_record(&row).map_err(|e| Error::Serialize(e.to_string()))?;
    }
    wtr.flush().map_err(|e| Error::Serialize(e.to_string()))?;
    Ok(())
}

/// First-appearance recoding.
fn recode(values: &[String]) -> (Vec<u32>, Vec<String>) {
    let mut index: HashMap<&str, u32> = HashMap::new();
    let mut levels = Vec::new();
    let codes = values
        .iter()
        .map(|v| {
            *index.entry(v.as_str()).or_insert_with(|| {
                levels.push(v.clone());
                (levels.len() - 1) as u32
            })
        })
        .collect();
    (codes, levels)
}

fn infer_kind(values: &[String], lines: &[usize], column: &str) -> Result<ColumnKind> {
    let mut numeric = true;
    let mut integral = true;
    for (s, &line) in values.iter().zip(lines) {
        match s.trim().parse::<f64>() {
            Ok(v) if !v.is_finite() => {
                return Err(Error::NonFinite {
                    row: line,
                    column: column.to_string(),
                    value: s.clone(),
                })
            }
            Ok(v) => integral &= v.fract() == 0.0,
            Err(_) => {
                numeric = false;
                break;
            }
        }
    }
    if !numeric {
        return Ok(ColumnKind::Categorical);
    }
    let mut distinct: Vec<&str> = values.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() <= 1 || (integral && distinct.len() <= MAX_INTEGER_LEVELS) {
        Ok(ColumnKind::Categorical)
    } else {
        Ok(ColumnKind::Continuous)
    }
}

fn parse_finite(s: &str, line: usize, column: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(Error::NonFinite {
            row: line,
            column: column.to_string(),
            value: s.to_string(),
        }),
        Err(e) => Err(Error::Parse {
            row: line,
            column: column.to_string(),
            message: format!("{s:?} is not a number ({e})"),
        }),
    }
}

fn csv_error(e: csv::Error, column: &str) -> Error {
    let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("row has {len} fields but the header has {expected_len}")
        }
        _ => e.to_string(),
    };
    Error::Parse {
        row,
        column: column.to_string(),
        message,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<Dataset> {
        read_csv(s.as_bytes(), &LabelColumn::Name("y".into()), &Schema::Infer)
    }

    #[test]
    fn recodes_labels_by_first_appearance() {
        let ds = read("a,b,y\nu,1.5,p\nv,2.5,p\nu,0.1,q\nw,9.25,q\n").unwrap();
        assert_eq!(ds.n_classes(), 2);
        assert_eq!(ds.labels(), &[0, 0, 1, 1]);
        assert_eq!(ds.column(0).codes(), Some(&[0, 1, 0, 2][..]));
        assert_eq!(ds.column(1).kind(), ColumnKind::Continuous);
        assert_eq!(ds.class_names(), &["p".to_string(), "q".to_string()]);
    }

    #[test]
    fn first_appearance_not_lexicographic() {
        let ds = read("a,y\nz,q\na,p\n").unwrap();
        assert_eq!(ds.labels(), &[0, 1]);
        assert_eq!(ds.levels(0).unwrap(), &["z".to_string(), "a".to_string()]);
    }

    #[test]
    fn single_row_is_all_categorical_one() {
        let ds = read("a,b,y\n0.5,x,p\n").unwrap();
        assert_eq!(ds.n_samples(), 1);
        for i in 0..2 {
            assert_eq!(ds.column(i).cardinality(), Some(1));
        }
        assert_eq!(ds.n_classes(), 1);
    }

    #[test]
    fn malformed_row_names_the_row() {
        let err = read("a,b,c,y\n1,2,3,p\n1,2,p\n").unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_value_is_parse_error() {
        assert!(matches!(read("a,y\n,p\n1,q\n"), Err(Error::Parse { row: 2, .. })));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(read("a,y\n1.5,p\nNaN,q\n"), Err(Error::NonFinite { row: 3, .. })));
        let explicit = read_csv(
            "a,y\n1.5,p\ninf,q\n".as_bytes(),
            &LabelColumn::Last,
            &Schema::Explicit(vec![ColumnKind::Continuous]),
        );
        assert!(matches!(explicit, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn missing_label_column() {
        assert!(matches!(read("a,b\n1,2\n"), Err(Error::MissingLabel(_))));
        let by_index = read_csv("a,b\n1,2\n".as_bytes(), &LabelColumn::Index(5), &Schema::Infer);
        assert!(matches!(by_index, Err(Error::MissingLabel(_))));
    }

    #[test]
    fn label_by_index_and_explicit_schema() {
        let ds = read_csv(
            "y,a,b\np,1,2\nq,3,4\n".as_bytes(),
            &LabelColumn::Index(0),
            &Schema::Explicit(vec![ColumnKind::Continuous, ColumnKind::Categorical]),
        )
        .unwrap();
        assert_eq!(ds.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(ds.column(0).values(), Some(&[1.0, 3.0][..]));
        assert_eq!(ds.column(1).cardinality(), Some(2));
    }

    #[test]
    fn small_integer_columns_are_categorical() {
        let ds = read("a,y\n1,p\n2,q\n1,q\n").unwrap();
        assert_eq!(ds.column(0).kind(), ColumnKind::Categorical);
    }

    #[test]
    fn write_then_read_is_identity() {
        let text = "a,b,y\nu,1.5,p\nv,-2.25,p\nu,0.1,q\nw,1e-7,q\n";
        let ds = read(text).unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let again = read(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(ds, again);
    }
}
