//! Algorithms factored through a fixed basis transformation:
//! `U = U_phi * phi`, `V = V_phi * phi`, `W = W_phi * phi`.

use crate::algorithm::{BilinearAlgorithm, Certificate, Dims, RowTag};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecomposedAlgorithm {
    n0: usize,
    phi: SparseMatrix,
    u_phi: SparseMatrix,
    v_phi: SparseMatrix,
    w_phi: SparseMatrix,
    tags: Vec<RowTag>,
    certificate: Option<Certificate>,
}

impl DecomposedAlgorithm {
    pub fn new(
        n0: usize,
        phi: SparseMatrix,
        u_phi: SparseMatrix,
        v_phi: SparseMatrix,
        w_phi: SparseMatrix,
        tags: Vec<RowTag>,
    ) -> Result<Self> {
        let s0 = phi.nrows();
        if phi.ncols() != n0 * n0 {
            return Err(Error::Dimension(format!(
                "transformation has {} columns, expected {}",
                phi.ncols(),
                n0 * n0
            )));
        }
        let t = u_phi.nrows();
        for (name, m) in [("U_phi", &u_phi), ("V_phi", &v_phi), ("W_phi", &w_phi)] {
            if m.nrows() != t || m.ncols() != s0 {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {t}x{s0}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if tags.len() != t {
            return Err(Error::Dimension(format!("{} tags for {t} rows", tags.len())));
        }
        Ok(DecomposedAlgorithm {
            n0,
            phi,
            u_phi,
            v_phi,
            w_phi,
            tags,
            certificate: None,
        })
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn dims(&self) -> Dims {
        Dims::square(self.n0)
    }

    pub fn t(&self) -> usize {
        self.u_phi.nrows()
    }

    pub fn s0(&self) -> usize {
        self.phi.nrows()
    }

    pub fn phi(&self) -> &SparseMatrix {
        &self.phi
    }

    pub fn u_phi(&self) -> &SparseMatrix {
        &self.u_phi
    }

    pub fn v_phi(&self) -> &SparseMatrix {
        &self.v_phi
    }

    pub fn w_phi(&self) -> &SparseMatrix {
        &self.w_phi
    }

    pub fn tags(&self) -> &[RowTag] {
        &self.tags
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    pub(crate) fn set_certificate(&mut self, c: Option<Certificate>) {
        self.certificate = c;
    }

    /// Multiplies the factors back together.
    pub fn to_full(&self) -> Result<BilinearAlgorithm> {
        let mut alg = BilinearAlgorithm::with_tags(
            self.dims(),
            self.u_phi.matmul(&self.phi)?,
            self.v_phi.matmul(&self.phi)?,
            self.w_phi.matmul(&self.phi)?,
            self.tags.clone(),
        )?;
        alg.set_certificate(Certificate::derive("expand", &[self.certificate()]));
        Ok(alg)
    }
}
