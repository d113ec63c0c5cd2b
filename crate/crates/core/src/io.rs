//! File helpers. Outputs are written to a temporary file in the target
//! directory and renamed into place, so a failed command leaves no partial
//! files behind.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{AgcError, Result};
use crate::features::{read_labels, FeatureMatrix};
use crate::graph::{load_edge_list, SparseGraph};
use crate::partition::ClusterPartition;

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| AgcError::from(e).in_file(path))
}

pub fn read_graph(path: &Path, n_hint: Option<usize>) -> Result<SparseGraph> {
    load_edge_list(open(path)?, n_hint).map_err(|e| e.in_file(path))
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    FeatureMatrix::read_csv(open(path)?).map_err(|e| e.in_file(path))
}

pub fn read_raw_labels(path: &Path) -> Result<Vec<i64>> {
    read_labels(open(path)?).map_err(|e| e.in_file(path))
}

pub fn read_partition(path: &Path) -> Result<ClusterPartition> {
    Ok(ClusterPartition::from_raw_labels(&read_raw_labels(path)?))
}

/// Writes `path` atomically via a sibling temporary file.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| AgcError::from(e).in_file(path))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path)
        .map_err(|e| AgcError::from(e.error).in_file(path))?;
    Ok(())
}

/// Atomically writes several files: every body is rendered to its own
/// temporary file first and the renames happen only once all succeeded.
pub fn write_all_atomic(files: Vec<(&Path, Vec<u8>)>) -> Result<()> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp =
            tempfile::NamedTempFile::new_in(dir).map_err(|e| AgcError::from(e).in_file(path))?;
        tmp.write_all(&bytes)?;
        tmp.flush()?;
        staged.push((path, tmp));
    }
    for (path, tmp) in staged {
        tmp.persist(path)
            .map_err(|e| AgcError::from(e.error).in_file(path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_body_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out.txt");
        let res = write_atomic(&target, |w| {
            w.write_all(b"partial")?;
            Err(AgcError::validation("boom"))
        });
        assert!(res.is_err());
        assert!(!target.exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn missing_input_names_the_file() {
        let err = read_features(Path::new("/definitely/not/here.csv")).unwrap_err();
        assert!(err.to_string().contains("here.csv"));
        assert!(err.is_user_error());
    }
}
