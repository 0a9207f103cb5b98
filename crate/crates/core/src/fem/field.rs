use crate::geometry::Vec2;
use crate::mesh::{AnnularMesh, MeshId};
use crate::{Error, Result};

/// One scalar per node of a specific mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalScalarField {
    mesh: MeshId,
    values: Vec<f64>,
}

impl NodalScalarField {
    pub fn new(mesh: &AnnularMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::FieldMismatch(format!("{} values for {} nodes", values.len(), mesh.num_nodes())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at node {i}")));
        }
        Ok(NodalScalarField { mesh: mesh.id(), values })
    }

    pub fn zeros(mesh: &AnnularMesh) -> Self {
        NodalScalarField { mesh: mesh.id(), values: vec![0.0; mesh.num_nodes()] }
    }

    pub fn from_fn(mesh: &AnnularMesh, f: impl Fn(Vec2) -> f64) -> Result<Self> {
        Self::new(mesh, mesh.nodes().iter().map(|&p| f(p)).collect())
    }

    pub fn mesh_id(&self) -> MeshId {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Fails unless this field was built on `mesh`.
    pub fn check_mesh(&self, mesh: &AnnularMesh) -> Result<()> {
        if self.mesh == mesh.id() {
            Ok(())
        } else {
            Err(Error::FieldMismatch(format!("field bound to {:?}, used on {:?}", self.mesh, mesh.id())))
        }
    }

    /// Carries the nodal values over to a mesh with the same node numbering,
    /// such as the output of [`AnnularMesh::deform`].
    pub fn rebind(&self, mesh: &AnnularMesh) -> Result<Self> {
        Self::new(mesh, self.values.clone())
    }

    /// Values at the given node indices.
    pub fn restrict(&self, nodes: &[usize]) -> Vec<f64> {
        nodes.iter().map(|&i| self.values[i]).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        NodalScalarField { mesh: self.mesh, values: self.values.iter().map(|v| c * v).collect() }
    }
}

/// One 2-vector per node of a specific mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalVectorField {
    mesh: MeshId,
    values: Vec<Vec2>,
}

impl NodalVectorField {
    pub fn new(mesh: &AnnularMesh, values: Vec<Vec2>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::FieldMismatch(format!("{} vectors for {} nodes", values.len(), mesh.num_nodes())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite vector at node {i}")));
        }
        Ok(NodalVectorField { mesh: mesh.id(), values })
    }

    pub fn zeros(mesh: &AnnularMesh) -> Self {
        NodalVectorField { mesh: mesh.id(), values: vec![Vec2::ZERO; mesh.num_nodes()] }
    }

    pub fn from_fn(mesh: &AnnularMesh, f: impl Fn(Vec2) -> Vec2) -> Result<Self> {
        Self::new(mesh, mesh.nodes().iter().map(|&p| f(p)).collect())
    }

    pub fn mesh_id(&self) -> MeshId {
        self.mesh
    }

    pub fn values(&self) -> &[Vec2] {
        &self.values
    }

    pub fn check_mesh(&self, mesh: &AnnularMesh) -> Result<()> {
        if self.mesh == mesh.id() {
            Ok(())
        } else {
            Err(Error::FieldMismatch(format!("field bound to {:?}, used on {:?}", self.mesh, mesh.id())))
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        NodalVectorField { mesh: self.mesh, values: self.values.iter().map(|&v| v * c).collect() }
    }
}
