use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::PsychmParams;

/// Row-major feature matrix with annotation flags `l` and, when known, the
/// ground-truth classes `y`.
///
/// Every annotated row is a true positive: `l[i]` implies `y[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    x: Vec<f64>,
    l: Vec<bool>,
    y: Option<Vec<bool>>,
    /// Parameters of the generating process, when the data is synthetic.
    pub true_params: Option<PsychmParams>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, dim: usize, l: Vec<bool>, y: Option<Vec<bool>>) -> Result<Self> {
        if l.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("feature dimension must be at least 1".into()));
        }
        if x.len() != l.len() * dim {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: l.len() * dim,
            });
        }
        if let Some(y) = &y {
            if y.len() != l.len() {
                return Err(Error::LengthMismatch {
                    left: y.len(),
                    right: l.len(),
                });
            }
            if l.iter().zip(y).any(|(&li, &yi)| li && !yi) {
                return Err(Error::InvalidParameter(
                    "annotated example with negative class".into(),
                ));
            }
        }
        Ok(Self {
            dim,
            x,
            l,
            y,
            true_params: None,
        })
    }

    pub fn with_true_params(mut self, params: PsychmParams) -> Self {
        self.true_params = Some(params);
        self
    }

    pub fn len(&self) -> usize {
        self.l.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.x.chunks_exact(self.dim)
    }

    pub fn features(&self) -> &[f64] {
        &self.x
    }

    pub fn labels(&self) -> &[bool] {
        &self.l
    }

    pub fn truth(&self) -> Option<&[bool]> {
        self.y.as_deref()
    }

    pub fn require_truth(&self) -> Result<&[bool]> {
        self.truth().ok_or(Error::MissingTruth)
    }

    /// Rows at `indices`, in that order (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut x = Vec::with_capacity(indices.len() * self.dim);
        let mut l = Vec::with_capacity(indices.len());
        let mut y = self.y.as_ref().map(|_| Vec::with_capacity(indices.len()));
        for &i in indices {
            x.extend_from_slice(self.row(i));
            l.push(self.l[i]);
            if let (Some(dst), Some(src)) = (y.as_mut(), self.y.as_ref()) {
                dst.push(src[i]);
            }
        }
        Self {
            dim: self.dim,
            x,
            l,
            y,
            true_params: self.true_params.clone(),
        }
    }

    /// The dataset stacked `times` times.
    pub fn repeated(&self, times: usize) -> Self {
        let idx: Vec<usize> = (0..times).flat_map(|_| 0..self.len()).collect();
        self.select(&idx)
    }
}
