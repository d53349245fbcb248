use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

/// Mesh node: position in the fundamental domain, sheet of the cover and quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshNode {
    pub x: f64,
    pub y: f64,
    pub sheet: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenHeader {
    pub surface_id: String,
    pub n_mesh: usize,
    pub n_modes: usize,
    pub ortho_tol: f64,
    pub residual_tol: f64,
    pub residuals: Vec<f64>,
    pub volume: f64,
}

/// Sampled eigenpairs; `eigenvectors[j]` holds ψ_j at every mesh node.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenData {
    pub surface_id: String,
    pub mesh: Vec<MeshNode>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub ortho_tol: f64,
    pub residual_tol: f64,
    pub residuals: Vec<f64>,
    pub volume: f64,
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_err(file: &str, e: impl std::fmt::Display) -> Error {
    Error::FormatError(format!("{file}: {e}"))
}

fn read_rows(dir: &Path, file: &str) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(dir.join(file))
        .map_err(|e| format_err(file, e))?;
    rdr.records().map(|r| r.map_err(|e| format_err(file, e))).collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, file: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let s = rec.get(i).ok_or_else(|| format_err(file, format!("row has {} fields, need {}", rec.len(), i + 1)))?;
    s.trim().parse().map_err(|e| format_err(file, format!("{s:?}: {e}")))
}

impl EigenData {
    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn header(&self) -> EigenHeader {
        EigenHeader {
            surface_id: self.surface_id.clone(),
            n_mesh: self.mesh.len(),
            n_modes: self.n_modes(),
            ortho_tol: self.ortho_tol,
            residual_tol: self.residual_tol,
            residuals: self.residuals.clone(),
            volume: self.volume,
        }
    }

    /// Largest entry of |G − I| with G_jk = Σ w ψ_j ψ_k.
    pub fn gram_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for (j, u) in self.eigenvectors.iter().enumerate() {
            for (k, v) in self.eigenvectors.iter().enumerate().skip(j) {
                let g: f64 = self.mesh.iter().zip(u.iter().zip(v)).map(|(m, (a, b))| m.weight * a * b).sum();
                dev = dev.max((g - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
        dev
    }

    /// Enforces shape, ordering, orthonormality and the declared residual bounds.
    pub fn validate(&self) -> Result<()> {
        let n = self.mesh.len();
        if self.eigenvectors.len() != self.eigenvalues.len() || self.residuals.len() != self.eigenvalues.len() {
            return Err(Error::FormatError(format!(
                "{} eigenvalues, {} eigenvectors, {} residuals",
                self.eigenvalues.len(),
                self.eigenvectors.len(),
                self.residuals.len()
            )));
        }
        if let Some((j, v)) = self.eigenvectors.iter().enumerate().find(|(_, v)| v.len() != n) {
            return Err(Error::FormatError(format!("eigenvector {j} has {} samples for {n} mesh nodes", v.len())));
        }
        if self.mesh.iter().any(|m| !(m.weight > 0.0) || !m.x.is_finite() || !m.y.is_finite()) {
            return Err(Error::FormatError("mesh nodes need finite positions and positive weights".into()));
        }
        if self.eigenvalues.iter().chain(self.eigenvectors.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::FormatError("non-finite eigen-data".into()));
        }
        if self.eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::FormatError("eigenvalues are not ascending".into()));
        }
        let dev = self.gram_deviation();
        if !(dev <= self.ortho_tol) {
            return Err(Error::OrthonormalityViolation { deviation: dev, tol: self.ortho_tol });
        }
        if let Some((mode, &r)) = self.residuals.iter().enumerate().find(|(_, r)| !(**r <= self.residual_tol)) {
            return Err(Error::ResidualViolation { mode, residual: r, tol: self.residual_tol });
        }
        Ok(())
    }

    /// Writes header.json, mesh.csv, eigenvalues.csv and eigenvectors.csv into `dir`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let header = serde_json::to_string_pretty(&self.header()).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(dir.join("header.json"), header + "\n")?;
        let mut mesh = String::from("x,y,sheet,weight\n");
        for m in &self.mesh {
            mesh += &format!("{},{},{},{}\n", fmt(m.x), fmt(m.y), m.sheet, fmt(m.weight));
        }
        fs::write(dir.join("mesh.csv"), mesh)?;
        let mut vals = String::from("nu\n");
        for v in &self.eigenvalues {
            vals += &fmt(*v);
            vals.push('\n');
        }
        fs::write(dir.join("eigenvalues.csv"), vals)?;
        let mut vecs = (0..self.mesh.len()).map(|i| format!("n{i}")).collect::<Vec<_>>().join(",");
        vecs.push('\n');
        for v in &self.eigenvectors {
            vecs += &v.iter().map(|x| fmt(*x)).collect::<Vec<_>>().join(",");
            vecs.push('\n');
        }
        fs::write(dir.join("eigenvectors.csv"), vecs)?;
        Ok(())
    }

    /// Reads a directory written by `export` without validating it.
    pub fn read(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join("header.json")).map_err(|e| format_err("header.json", e))?;
        let h: EigenHeader = serde_json::from_str(&text).map_err(|e| format_err("header.json", e))?;
        let mesh = read_rows(dir, "mesh.csv")?
            .iter()
            .map(|r| {
                Ok(MeshNode {
                    x: field(r, 0, "mesh.csv")?,
                    y: field(r, 1, "mesh.csv")?,
                    sheet: field(r, 2, "mesh.csv")?,
                    weight: field(r, 3, "mesh.csv")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let eigenvalues = read_rows(dir, "eigenvalues.csv")?.iter().map(|r| field(r, 0, "eigenvalues.csv")).collect::<Result<Vec<f64>>>()?;
        let eigenvectors = read_rows(dir, "eigenvectors.csv")?
            .iter()
            .map(|r| (0..r.len()).map(|i| field(r, i, "eigenvectors.csv")).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        if mesh.len() != h.n_mesh || eigenvalues.len() != h.n_modes {
            return Err(Error::FormatError(format!(
                "header declares {} nodes and {} modes, files hold {} and {}",
                h.n_mesh,
                h.n_modes,
                mesh.len(),
                eigenvalues.len()
            )));
        }
        Ok(Self {
            surface_id: h.surface_id,
            mesh,
            eigenvalues,
            eigenvectors,
            ortho_tol: h.ortho_tol,
            residual_tol: h.residual_tol,
            residuals: h.residuals,
            volume: h.volume,
        })
    }
}

/// Reads and validates an eigendata directory.
pub fn ingest_eigendata(dir: &Path) -> Result<EigenData> {
    let d = EigenData::read(dir)?;
    d.validate()?;
    Ok(d)
}
