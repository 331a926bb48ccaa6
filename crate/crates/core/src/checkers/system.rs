use std::fmt;
use std::sync::Arc;

use crate::numerics::Matrix;

/// Right-hand side `f(t, x)` of a general system.
pub type VectorField = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// `ẋ = f(t, x)`, either linear and autonomous or given by an evaluator.
#[derive(Clone)]
pub enum DynamicalSystem {
    Linear(Matrix),
    General { dim: usize, field: VectorField },
}

impl fmt::Debug for DynamicalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicalSystem::Linear(a) => f.debug_tuple("Linear").field(a).finish(),
            DynamicalSystem::General { dim, .. } => f.debug_struct("General").field("dim", dim).finish_non_exhaustive(),
        }
    }
}

impl DynamicalSystem {
    pub fn linear(a: Matrix) -> Result<Self, crate::numerics::NumericsError> {
        if !a.is_square() {
            return Err(crate::numerics::NumericsError::DimensionMismatch(format!(
                "system matrix must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        Ok(DynamicalSystem::Linear(a))
    }

    pub fn general<F>(dim: usize, field: F) -> Self
    where
        F: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        DynamicalSystem::General {
            dim,
            field: Arc::new(field),
        }
    }

    /// Wraps a matrix as an opaque evaluator, hiding its linearity.
    pub fn opaque(a: Matrix) -> Self {
        let dim = a.rows();
        Self::general(dim, move |_, x| a.matvec(x))
    }

    pub fn dim(&self) -> usize {
        match self {
            DynamicalSystem::Linear(a) => a.rows(),
            DynamicalSystem::General { dim, .. } => *dim,
        }
    }

    pub fn matrix(&self) -> Option<&Matrix> {
        match self {
            DynamicalSystem::Linear(a) => Some(a),
            DynamicalSystem::General { .. } => None,
        }
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        match self {
            DynamicalSystem::Linear(a) => a.matvec(x),
            DynamicalSystem::General { field, .. } => field(t, x),
        }
    }
}
