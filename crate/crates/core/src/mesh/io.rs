use serde::{Deserialize, Serialize};

use super::{MarkedDisk, MeshError, TriangulatedDisk};

/// JSON form of a mesh: `{"vertices": [[x, y] | null], "faces": [[i, j, k]], "markers": [p, q, r]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<Option<[f64; 2]>>,
    pub faces: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markers: Option<[usize; 3]>,
}

impl MeshFile {
    pub fn from_mesh(
        mesh: &TriangulatedDisk,
        coords: Option<&[[f64; 2]]>,
        markers: Option<[usize; 3]>,
    ) -> Self {
        let vertices = match coords {
            Some(c) => c.iter().map(|&p| Some(p)).collect(),
            None => vec![None; mesh.n_vertices()],
        };
        Self {
            vertices,
            faces: mesh.faces().to_vec(),
            markers,
        }
    }

    pub fn to_mesh(&self) -> Result<TriangulatedDisk, MeshError> {
        let mesh = TriangulatedDisk::build_from_faces(&self.faces)?;
        if mesh.n_vertices() != self.vertices.len() {
            return Err(MeshError::NotADisk(format!(
                "{} vertices listed but faces use {}",
                self.vertices.len(),
                mesh.n_vertices()
            )));
        }
        Ok(mesh)
    }

    pub fn to_marked(&self) -> Result<MarkedDisk, MeshError> {
        let markers = self
            .markers
            .ok_or_else(|| MeshError::InvalidMarkers("no markers in file".into()))?;
        MarkedDisk::new(self.to_mesh()?, markers)
    }

    /// Vertex positions, if every vertex has one.
    pub fn coords(&self) -> Option<Vec<[f64; 2]>> {
        self.vertices.iter().copied().collect()
    }
}
