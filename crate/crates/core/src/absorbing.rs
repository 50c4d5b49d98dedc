//! Absorbing chains in canonical form `P = (Q R; 0 I)`.

use crate::chain::{reachability, StochasticMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingDecomposition<T> {
    /// Original indices in canonical order: transient states, then absorbing.
    pub ordering: Vec<usize>,
    pub transient: Vec<usize>,
    pub absorbing: Vec<usize>,
    pub q: Matrix<T>,
    pub r: Matrix<T>,
}

impl<T: Scalar> AbsorbingDecomposition<T> {
    pub fn n_transient(&self) -> usize {
        self.transient.len()
    }

    pub fn n_absorbing(&self) -> usize {
        self.absorbing.len()
    }
}

/// Reorders states stably: non-absorbing first, absorbing last.
pub fn canonical_form<T: Scalar>(p: &StochasticMatrix<T>) -> Result<AbsorbingDecomposition<T>> {
    let n = p.n();
    let (absorbing, transient): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| p.is_absorbing_state(i));
    if absorbing.is_empty() {
        return Err(Error::NotAbsorbing { state: 0 });
    }
    let reach = reachability(&p.support_graph());
    if let Some(&bad) = transient.iter().find(|&&i| !absorbing.iter().any(|&a| reach[i][a])) {
        return Err(Error::NotAbsorbing { state: bad });
    }
    let q = Matrix::from_fn(transient.len(), transient.len(), |i, j| {
        p.get(transient[i], transient[j]).clone()
    });
    let r = Matrix::from_fn(transient.len(), absorbing.len(), |i, k| {
        p.get(transient[i], absorbing[k]).clone()
    });
    let ordering = transient.iter().chain(&absorbing).copied().collect();
    Ok(AbsorbingDecomposition { ordering, transient, absorbing, q, r })
}

/// `F = (I - Q)^{-1}`; `f_ij` is the expected number of visits to `j` from `i`.
pub fn fundamental_matrix<T: Scalar>(dec: &AbsorbingDecomposition<T>) -> Result<Matrix<T>> {
    let k = dec.n_transient();
    if k == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    Matrix::identity(k).sub(&dec.q)?.inverse()
}

/// `B = F R`; `b_ik` is the probability of ending in absorbing state `k` from `i`.
pub fn absorption_probabilities<T: Scalar>(dec: &AbsorbingDecomposition<T>, f: &Matrix<T>) -> Result<Matrix<T>> {
    if dec.n_transient() == 0 {
        return Ok(Matrix::zeros(0, dec.n_absorbing()));
    }
    f.mul(&dec.r)
}

/// `E_i[τ]` for each transient state: the row sums of `F`.
pub fn expected_absorption_times<T: Scalar>(f: &Matrix<T>) -> Vec<T> {
    (0..f.rows())
        .map(|i| f.row(i).iter().cloned().fold(T::zero(), |a, b| a + b))
        .collect()
}

/// Averages transient-state values under `nu`. `nu` may cover the transient
/// states only or the whole chain; absorbing starts then contribute zero.
pub fn averaged<T: Scalar>(dec: &AbsorbingDecomposition<T>, values: &[T], nu: &[T]) -> Result<T> {
    let weights: Vec<T> = if nu.len() == dec.n_transient() {
        nu.to_vec()
    } else if nu.len() == dec.ordering.len() {
        dec.transient.iter().map(|&i| nu[i].clone()).collect()
    } else {
        return Err(Error::DimensionMismatch { expected: dec.n_transient(), found: nu.len() });
    };
    Ok(weights.into_iter().zip(values).fold(T::zero(), |acc, (w, v)| acc + w * v.clone()))
}

/// Everything the canonical form yields, computed in one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingAnalysis<T> {
    pub decomposition: AbsorbingDecomposition<T>,
    pub fundamental: Matrix<T>,
    pub absorption: Matrix<T>,
    pub expected_times: Vec<T>,
}

pub fn analyze<T: Scalar>(p: &StochasticMatrix<T>) -> Result<AbsorbingAnalysis<T>> {
    let decomposition = canonical_form(p)?;
    let fundamental = fundamental_matrix(&decomposition)?;
    let absorption = absorption_probabilities(&decomposition, &fundamental)?;
    let expected_times = expected_absorption_times(&fundamental);
    Ok(AbsorbingAnalysis { decomposition, fundamental, absorption, expected_times })
}
