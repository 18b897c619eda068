//! JSON manifold definition files.
//!
//! Every tensor component is an expression string over the chart's
//! coordinate names. The metric may be given as its lower triangle (row `i`
//! holds `i + 1` entries) or as a full grid, which must be symmetric.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sewcell_core::{Chart, DomainConstraint, Expr, ParseError, Structure, TensorField, Valence};

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{} is not a manifold file: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("malformed manifold file: {0}")]
    Shape(String),
    #[error("metric is not symmetric: {}", .0.join("; "))]
    AsymmetricMetric(Vec<String>),
    #[error("cannot parse {field} = `{source_text}`: {source}")]
    Expression {
        field: String,
        source_text: String,
        source: ParseError,
    },
    #[error(transparent)]
    Core(#[from] sewcell_core::Error),
}

/// Where a definition came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sewn_from: Option<SewnFrom>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SewnFrom {
    pub cell: String,
    /// SHA-256 of the cell file, when sewn from one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
    pub copies: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldFile {
    pub name: String,
    pub coords: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub domain: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adapted: Option<String>,
    pub metric: Vec<Vec<String>>,
    /// `phi[i][j]` is `φ^i_j`.
    pub phi: Vec<Vec<String>>,
    pub xi: Vec<String>,
    pub eta: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{:02x}", b)).collect()
}

fn parse_field(chart: &Chart, field: String, src: &str) -> Result<Expr, FileError> {
    chart.parse(src).map_err(|source| FileError::Expression {
        field,
        source_text: src.to_string(),
        source,
    })
}

impl ManifoldFile {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, FileError> {
        serde_json::from_str(text).map_err(|source| FileError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifold files always serialize");
        s.push('\n');
        s
    }

    pub fn chart(&self) -> Result<Chart, FileError> {
        let mut chart = Chart::new(self.coords.iter().cloned())?;
        let constraints = self
            .domain
            .iter()
            .map(|src| DomainConstraint::parse(src, &self.coords))
            .collect::<Result<Vec<_>, _>>()?;
        chart = chart.with_constraints(constraints)?;
        if let Some(a) = &self.adapted {
            chart = chart.with_adapted(a)?;
        }
        Ok(chart)
    }

    fn check_shapes(&self) -> Result<(), FileError> {
        let n = self.coords.len();
        let full = self.metric.iter().all(|r| r.len() == n);
        let lower = self.metric.iter().enumerate().all(|(i, r)| r.len() == i + 1);
        if self.metric.len() != n || !(full || lower) {
            return Err(FileError::Shape(format!(
                "metric must have {} rows holding either the lower triangle or all {} entries",
                n, n
            )));
        }
        if self.phi.len() != n || self.phi.iter().any(|r| r.len() != n) {
            return Err(FileError::Shape(format!("phi must be a {}x{} grid", n, n)));
        }
        for (label, v) in [("xi", &self.xi), ("eta", &self.eta)] {
            if v.len() != n {
                return Err(FileError::Shape(format!("{} must have {} entries, got {}", label, n, v.len())));
            }
        }
        Ok(())
    }

    pub fn to_structure(&self) -> Result<Structure, FileError> {
        self.check_shapes()?;
        let chart = self.chart()?;
        let n = chart.dim();
        let name = |i: usize| chart.name(i).to_string();
        let mut metric = vec![vec![None; n]; n];
        for (i, row) in self.metric.iter().enumerate() {
            for (j, src) in row.iter().enumerate() {
                metric[i][j] = Some(parse_field(&chart, format!("metric[{}][{}]", name(i), name(j)), src)?);
            }
        }
        let mut asymmetric = Vec::new();
        for i in 0..n {
            for j in 0..i {
                match (&metric[i][j], &metric[j][i]) {
                    (Some(a), Some(b)) if a != b => asymmetric.push(format!(
                        "metric[{}][{}] = `{}` but metric[{}][{}] = `{}`",
                        name(i),
                        name(j),
                        self.metric[i][j],
                        name(j),
                        name(i),
                        self.metric[j][i]
                    )),
                    (Some(a), None) => metric[j][i] = Some(a.clone()),
                    _ => {}
                }
            }
        }
        if !asymmetric.is_empty() {
            return Err(FileError::AsymmetricMetric(asymmetric));
        }
        let metric = TensorField::new(
            Valence::BILINEAR,
            n,
            metric.into_iter().flatten().map(|e| e.expect("filled above")).collect(),
        )?;
        let mut phi = Vec::with_capacity(n * n);
        for (i, row) in self.phi.iter().enumerate() {
            for (j, src) in row.iter().enumerate() {
                phi.push(parse_field(&chart, format!("phi[{}][{}]", name(i), name(j)), src)?);
            }
        }
        let vector = |label: &str, v: &[String]| -> Result<Vec<Expr>, FileError> {
            v.iter()
                .enumerate()
                .map(|(i, src)| parse_field(&chart, format!("{}[{}]", label, name(i)), src))
                .collect()
        };
        let xi = vector("xi", &self.xi)?;
        let eta = vector("eta", &self.eta)?;
        Ok(Structure::new(
            self.name.clone(),
            chart.clone(),
            metric,
            TensorField::new(Valence::AFFINOR, n, phi)?,
            TensorField::new(Valence::VECTOR, n, xi)?,
            TensorField::new(Valence::COVECTOR, n, eta)?,
        )?)
    }

    /// Metric is written as its lower triangle.
    pub fn from_structure(structure: &Structure, provenance: Option<Provenance>) -> Self {
        let chart = structure.chart();
        let n = structure.dim();
        let render = |e: &Expr| chart.render(e);
        let grid = |f: &TensorField, lower: bool| -> Vec<Vec<String>> {
            (0..n)
                .map(|i| (0..if lower { i + 1 } else { n }).map(|j| render(f.get(&[i, j]))).collect())
                .collect()
        };
        let list = |f: &TensorField| (0..n).map(|i| render(f.get(&[i]))).collect();
        ManifoldFile {
            name: structure.name().to_string(),
            coords: chart.names().to_vec(),
            domain: chart.constraints().iter().map(|c| c.to_source(chart.names())).collect(),
            adapted: chart.adapted().map(|t| chart.name(t).to_string()),
            metric: grid(structure.metric(), true),
            phi: grid(structure.phi(), false),
            xi: list(structure.xi()),
            eta: list(structure.eta()),
            provenance,
        }
    }

    pub fn save(&self, path: &Path) -> Result<String, FileError> {
        let text = self.to_json();
        fs::write(path, &text).map_err(|source| FileError::Write {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(sha256_hex(text.as_bytes()))
    }
}

/// A file read from disk together with its digest and parsed structure.
#[derive(Debug, Clone)]
pub struct LoadedFile {
    pub path: PathBuf,
    pub sha256: String,
    pub file: ManifoldFile,
    pub structure: Structure,
}

pub fn load(path: &Path) -> Result<LoadedFile, FileError> {
    let bytes = fs::read(path).map_err(|source| FileError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|e| FileError::Shape(format!("{} is not UTF-8: {}", path.display(), e)))?;
    let file = ManifoldFile::from_json(&text, path)?;
    let structure = file.to_structure()?;
    Ok(LoadedFile {
        path: path.to_path_buf(),
        sha256: sha256_hex(text.as_bytes()),
        file,
        structure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sewcell_core::catalog::{example3_cell, model_cosymplectic_cell};

    fn model_file() -> ManifoldFile {
        ManifoldFile::from_structure(model_cosymplectic_cell(1.0).unwrap().structure(), None)
    }

    #[test]
    fn structure_round_trips_through_json() {
        for s in [model_cosymplectic_cell(0.7).unwrap().into_structure(), example3_cell().into_structure()] {
            let f = ManifoldFile::from_structure(&s, None);
            let back = ManifoldFile::from_json(&f.to_json(), Path::new("mem")).unwrap();
            assert_eq!(back, f);
            let t = back.to_structure().unwrap();
            let p = [0.3, -0.2, 0.9];
            assert_eq!(t.metric().matrix(&p).unwrap(), s.metric().matrix(&p).unwrap());
            assert_eq!(t.phi().matrix(&p).unwrap(), s.phi().matrix(&p).unwrap());
            assert_eq!(t.chart().adapted(), s.chart().adapted());
            assert_eq!(t.chart().constraints().len(), s.chart().constraints().len());
        }
    }

    #[test]
    fn full_metric_grid_is_accepted_when_symmetric() {
        let mut f = model_file();
        f.metric = vec![
            vec!["1".into(), "0".into(), "0".into()],
            vec!["0".into(), "exp(2*t)".into(), "0".into()],
            vec!["0".into(), "0".into(), "exp(-2*t)".into()],
        ];
        assert!(f.to_structure().is_ok());
        f.metric[0][1] = "x".into();
        match f.to_structure() {
            Err(FileError::AsymmetricMetric(e)) => {
                assert_eq!(e.len(), 1);
                assert!(e[0].contains("metric[x][t]") && e[0].contains("metric[t][x]"), "{}", e[0]);
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        let mut f = model_file();
        f.xi.pop();
        assert!(matches!(f.to_structure(), Err(FileError::Shape(_))));
        let mut f = model_file();
        f.phi[1][2] = "exp(2*w)".into();
        match f.to_structure() {
            Err(FileError::Expression { field, .. }) => assert_eq!(field, "phi[x][y]"),
            other => panic!("{:?}", other),
        }
        assert!(matches!(
            ManifoldFile::from_json("{\"name\": 1}", Path::new("bad.json")),
            Err(FileError::Json { .. })
        ));
    }
}
