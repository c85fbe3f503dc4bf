use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::matlin::Matrix;
use crate::zsl::PrototypeSet;

use super::ClassId;

const LABEL_HEADERS: [&str; 4] = ["label", "labels", "class", "class_id"];

fn open(path: &Path) -> Result<csv::Reader<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file)))
}

fn records(path: &Path) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut out = Vec::new();
    for rec in open(path)?.records() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(out.len() as u64 + 1, |p| p.line());
        out.push((line, rec));
    }
    Ok(out)
}

fn parse_cell(path: &Path, line: u64, col: usize, cell: &str) -> Result<f64> {
    let v: f64 = cell.parse().map_err(|_| {
        Error::parse(path, format!("row {line}, col {col}: non-numeric cell '{cell}'"))
    })?;
    if !v.is_finite() {
        return Err(Error::parse(path, format!("row {line}, col {col}: non-finite value '{cell}'")));
    }
    Ok(v)
}

fn is_numeric(cell: &str) -> bool {
    cell.parse::<f64>().is_ok()
}

/// Reads a sample-major numeric CSV and returns it as a `d × N` matrix.
///
/// A first row containing any non-numeric cell is taken as a header. Row and
/// column numbers in errors are 1-based file positions.
pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let mut recs = records(path)?;
    if recs.first().is_some_and(|(_, r)| !r.iter().all(is_numeric)) {
        recs.remove(0);
    }
    let Some((_, first)) = recs.first() else {
        return Err(Error::parse(path, "no data rows"));
    };
    let d = first.len();
    let mut data = Vec::with_capacity(d * recs.len());
    for (line, rec) in &recs {
        if rec.len() != d {
            return Err(Error::parse(
                path,
                format!("row {line}: expected {d} columns, found {}", rec.len()),
            ));
        }
        for (j, cell) in rec.iter().enumerate() {
            data.push(parse_cell(path, *line, j + 1, cell)?);
        }
    }
    // row-major samples are exactly the column-major d×N layout
    Ok(Matrix::from_col_major(d, recs.len(), data)?)
}

/// Writes a `d × N` matrix as N rows of d values, shortest round-trip
/// decimal form.
pub fn save_matrix_csv(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let mut out = String::with_capacity(m.rows() * m.cols() * 20);
    for col in m.columns() {
        push_row(&mut out, col.iter().map(|v| format!("{v:?}")));
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

fn push_row(out: &mut String, cells: impl Iterator<Item = String>) {
    for (i, c) in cells.enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&c);
    }
    out.push('\n');
}

/// Reads one class id per row from the first column; a header named
/// `label`, `class` or `class_id` is skipped.
pub fn load_labels_csv(path: impl AsRef<Path>) -> Result<Vec<ClassId>> {
    let path = path.as_ref();
    let mut recs = records(path)?;
    if recs
        .first()
        .is_some_and(|(_, r)| LABEL_HEADERS.contains(&r[0].to_ascii_lowercase().as_str()))
    {
        recs.remove(0);
    }
    if recs.is_empty() {
        return Err(Error::parse(path, "no labels"));
    }
    Ok(recs.iter().map(|(_, r)| ClassId::new(&r[0])).collect())
}

pub fn save_labels_csv(path: impl AsRef<Path>, labels: &[ClassId]) -> Result<()> {
    let mut out = String::from("label\n");
    for l in labels {
        out.push_str(l.as_str());
        out.push('\n');
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

/// Reads rows `class_id, v1, …, vk` into a prototype set.
pub fn load_semantics_csv(path: impl AsRef<Path>) -> Result<PrototypeSet> {
    let path = path.as_ref();
    let mut recs = records(path)?;
    if recs
        .first()
        .is_some_and(|(_, r)| !r.iter().skip(1).all(is_numeric))
    {
        recs.remove(0);
    }
    let Some((_, first)) = recs.first() else {
        return Err(Error::parse(path, "no semantic rows"));
    };
    let k = first.len().saturating_sub(1);
    if k == 0 {
        return Err(Error::parse(path, "semantic rows need a class id and at least one value"));
    }
    let mut ids = Vec::with_capacity(recs.len());
    let mut data = Vec::with_capacity(k * recs.len());
    for (line, rec) in &recs {
        if rec.len() != k + 1 {
            return Err(Error::parse(
                path,
                format!(
                    "row {line}: semantic dimension {} differs from {k}",
                    rec.len() - 1
                ),
            ));
        }
        ids.push(ClassId::new(&rec[0]));
        for (j, cell) in rec.iter().enumerate().skip(1) {
            data.push(parse_cell(path, *line, j + 1, cell)?);
        }
    }
    PrototypeSet::new(ids, Matrix::from_col_major(k, recs.len(), data)?)
        .map_err(|e| Error::parse(path, e.to_string()))
}

pub fn save_semantics_csv(path: impl AsRef<Path>, protos: &PrototypeSet) -> Result<()> {
    let mut out = String::new();
    for (id, col) in protos.class_ids().iter().zip(protos.protos().columns()) {
        push_row(
            &mut out,
            std::iter::once(id.to_string()).chain(col.iter().map(|v| format!("{v:?}"))),
        );
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn two_by_three_csv_is_three_by_two() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "m.csv", "1,2,3\n4,5,6\n");
        let m = load_matrix_csv(&p).unwrap();
        assert_eq!(m.shape(), (3, 2));
        assert_eq!(m.column(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn header_row_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "m.csv", "a,b\n1,2\n");
        assert_eq!(load_matrix_csv(&p).unwrap().shape(), (2, 1));
    }

    #[test]
    fn inf_cell_names_its_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "m.csv", "1,inf,3\n");
        let msg = load_matrix_csv(&p).unwrap_err().to_string();
        assert!(msg.contains("row 1, col 2"), "{msg}");
    }

    #[test]
    fn malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let ragged = write(dir.path(), "r.csv", "1,2\n3\n");
        assert!(load_matrix_csv(&ragged).unwrap_err().to_string().contains("row 2"));
        let text = write(dir.path(), "t.csv", "1,2\n3,x\n");
        assert!(load_matrix_csv(&text).unwrap_err().to_string().contains("col 2"));
        let empty = write(dir.path(), "e.csv", "");
        assert!(load_matrix_csv(&empty).is_err());
        assert!(load_matrix_csv(dir.path().join("missing.csv")).is_err());
    }

    #[test]
    fn matrix_round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let m = Matrix::from_fn(4, 5, |i, j| ((i * 7 + j) as f64).sin() * 10f64.powi(j as i32 * 40 - 80));
        let p = dir.path().join("m.csv");
        save_matrix_csv(&p, &m).unwrap();
        let back = load_matrix_csv(&p).unwrap();
        assert_eq!(back.shape(), m.shape());
        for (a, b) in back.as_slice().iter().zip(m.as_slice()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn labels_and_semantics_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let labels: Vec<ClassId> = ["cat", "dog", "cat"].iter().map(|&s| s.into()).collect();
        let lp = dir.path().join("l.csv");
        save_labels_csv(&lp, &labels).unwrap();
        assert_eq!(load_labels_csv(&lp).unwrap(), labels);

        let protos = PrototypeSet::new(
            vec!["cat".into(), "dog".into()],
            Matrix::from_rows(&[[0.1, -2.5], [1e-300, 3.0]]),
        )
        .unwrap();
        let sp = dir.path().join("s.csv");
        save_semantics_csv(&sp, &protos).unwrap();
        assert_eq!(load_semantics_csv(&sp).unwrap(), protos);
    }

    #[test]
    fn semantic_dimension_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "s.csv", "a,1,2\nb,3\n");
        assert!(load_semantics_csv(&p).unwrap_err().to_string().contains("dimension"));
    }
}
