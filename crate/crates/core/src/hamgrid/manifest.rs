use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    fcidump::{parse_fcidump, write_fcidump},
    standard_atomic_weight, Atom, DisplacementLabel, Geometry, HamiltonianGrid,
};
use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestAtom {
    pub symbol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_amu: Option<f64>,
    pub xyz_bohr: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestPoint {
    /// Signed 1-based coordinate indices, one per step.
    pub label: Vec<i64>,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub molecule: String,
    pub atoms: Vec<ManifestAtom>,
    pub step_bohr: f64,
    pub points: Vec<ManifestPoint>,
}

impl Manifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn geometry(&self, path: &Path) -> Result<Geometry> {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let mass = match a.mass_amu {
                Some(m) => m,
                None => standard_atomic_weight(&a.symbol).ok_or_else(|| Error::Manifest {
                    path: path.to_path_buf(),
                    message: format!("no mass given and no standard weight for {:?}", a.symbol),
                })?,
            };
            atoms.push(Atom {
                symbol: a.symbol.clone(),
                mass_amu: mass,
                position: a.xyz_bohr,
            });
        }
        Geometry::new(atoms)
    }
}

pub fn load_grid(manifest_path: impl AsRef<Path>) -> Result<HamiltonianGrid> {
    load_grid_with(manifest_path, Exec::default())
}

/// Loads a manifest and its FCIDUMP files; files are parsed under `exec`.
pub fn load_grid_with(manifest_path: impl AsRef<Path>, exec: Exec) -> Result<HamiltonianGrid> {
    let path = manifest_path.as_ref();
    let manifest = Manifest::read(path)?;
    let geometry = manifest.geometry(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let n_coords = geometry.n_coords();

    let mut labelled: Vec<(DisplacementLabel, PathBuf)> = Vec::with_capacity(manifest.points.len());
    for p in &manifest.points {
        let label = DisplacementLabel::from_signed(&p.label, n_coords).map_err(|message| Error::Manifest {
            path: path.to_path_buf(),
            message,
        })?;
        labelled.push((label, dir.join(&p.file)));
    }
    if !labelled.iter().any(|(l, _)| l.is_base()) {
        return Err(Error::BaseGeometryAbsent);
    }
    let sets = exec.try_map(&labelled, |(_, file)| parse_fcidump(file))?;
    let mut points = BTreeMap::new();
    for ((label, _), ints) in labelled.into_iter().zip(sets) {
        if points.contains_key(&label) {
            return Err(Error::Manifest {
                path: path.to_path_buf(),
                message: format!("duplicate label {label}"),
            });
        }
        points.insert(label, ints);
    }
    HamiltonianGrid::new(manifest.molecule, geometry, manifest.step_bohr, points)
}

fn file_stem(label: &DisplacementLabel) -> String {
    if label.is_base() {
        return "base".into();
    }
    label
        .to_signed()
        .iter()
        .map(|&e| format!("{}{}", if e > 0 { 'p' } else { 'm' }, e.abs()))
        .collect::<Vec<_>>()
        .join("_")
}

/// Writes `dir/<name>.json` and one FCIDUMP per point under `dir/<name>/`.
pub fn write_grid(dir: impl AsRef<Path>, name: &str, grid: &HamiltonianGrid) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let sub = dir.join(name);
    std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
    let mut points = Vec::new();
    for label in grid.labels() {
        let rel = format!("{name}/{}.fcidump", file_stem(label));
        write_fcidump(dir.join(&rel), grid.integrals(label)?)?;
        points.push(ManifestPoint {
            label: label.to_signed(),
            file: rel,
        });
    }
    let manifest = Manifest {
        molecule: grid.molecule().to_string(),
        atoms: grid
            .geometry()
            .atoms
            .iter()
            .map(|a| ManifestAtom {
                symbol: a.symbol.clone(),
                mass_amu: Some(a.mass_amu),
                xyz_bohr: a.position,
            })
            .collect(),
        step_bohr: grid.step(),
        points,
    };
    let path = dir.join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
