//! Problem instance and the stacked smoothing matrices.
//!
//! The system is
//!
//! ```text
//! x_{k+1} = A x_k + w_k,    w_k ~ N(0, W)
//! y_k     = C x_k + v_k,    v_k ~ N(0, V),  V = diag(σ²_{v,1}, …, σ²_{v,p})
//! x_0 ~ N(·, X0)
//! ```
//!
//! observed over `k = 0..ℓ-1`. Stacking `z̄ = [x_0; w_0; …; w_{ℓ-2}]` gives the
//! state trajectory `x̄ = Φ z̄` with prior covariance `Z = diag(X0, W, …, W)`.
//! Sensor `i` contributes the information matrix
//! `U_i = σ_{v,i}⁻² Σ_k g_{i,k}ᵀ g_{i,k}`, where `g_{i,k}` is row `i` of `C`
//! applied to block row `k` of `Φ`.

use std::fmt;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, sym_extreme_eigenvalues, symmetrize};

const SYMMETRY_RTOL: f64 = 1e-10;

/// A time-invariant linear-Gaussian system observed over a finite horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    a: DMatrix<f64>,
    c: DMatrix<f64>,
    x0: DMatrix<f64>,
    w: DMatrix<f64>,
    v_diag: DVector<f64>,
    ell: usize,
}

impl SystemModel {
    /// Validates dimensions, symmetry and positivity.
    pub fn new(
        a: DMatrix<f64>,
        c: DMatrix<f64>,
        x0: DMatrix<f64>,
        w: DMatrix<f64>,
        v_diag: DVector<f64>,
        ell: usize,
    ) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::validation(format!(
                "A must be square with n > 0, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let p = c.nrows();
        if p == 0 || c.ncols() != n {
            return Err(Error::validation(format!(
                "C must be p x n with p > 0 and n = {n}, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        if ell == 0 {
            return Err(Error::validation("ell must be at least 1"));
        }
        if v_diag.len() != p {
            return Err(Error::validation(format!(
                "v_diag has {} entries, expected p = {p}",
                v_diag.len()
            )));
        }
        for (name, m) in [("A", &a), ("C", &c), ("X0", &x0), ("W", &w)] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(format!("{name} must be finite")));
            }
        }
        for (k, v) in v_diag.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::validation(format!("v_diag[{k}] must be positive, got {v}")));
            }
        }
        check_covariance("X0", &x0, n)?;
        check_covariance("W", &w, n)?;
        Ok(Self {
            a,
            c,
            x0,
            w,
            v_diag,
            ell,
        })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn x0(&self) -> &DMatrix<f64> {
        &self.x0
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Output-noise variances `σ²_{v,i}`.
    pub fn v_diag(&self) -> &DVector<f64> {
        &self.v_diag
    }

    /// Dimension `nℓ` of the stacked vector `z̄`.
    pub fn stacked_dim(&self) -> usize {
        self.n() * self.ell
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            Error::Validation(message) => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Writes the model through a temporary file renamed into place.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = self.to_json_string();
        crate::io::write_atomic(path.as_ref(), text.as_bytes())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: Default::default(),
            message: e.to_string(),
        })?;
        raw.into_model()
    }

    pub fn to_json_string(&self) -> String {
        let raw = ModelFile {
            n: self.n(),
            p: self.p(),
            ell: self.ell,
            a: rows_of(&self.a),
            c: rows_of(&self.c),
            x0: rows_of(&self.x0),
            w: rows_of(&self.w),
            v_diag: self.v_diag.iter().copied().collect(),
            v: None,
        };
        serde_json::to_string_pretty(&raw).expect("model serialization is infallible")
    }
}

fn check_covariance(name: &str, m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::validation(format!(
            "{name} must be {n}x{n}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_RTOL * scale {
        return Err(Error::validation(format!(
            "{name} must be symmetric (max |{name} - {name}ᵀ| = {asym:e})"
        )));
    }
    let (min_eig, _) = sym_extreme_eigenvalues(m);
    if min_eig <= 0.0 {
        return Err(Error::validation(format!(
            "{name} must be positive definite (minimum eigenvalue {min_eig:e})"
        )));
    }
    Ok(())
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_from_rows(name: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    if rows.len() != nrows {
        return Err(Error::validation(format!(
            "{name} has {} rows, expected {nrows}",
            rows.len()
        )));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(Error::validation(format!(
                "{name} row {i} has {} entries, expected {ncols}",
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// On-disk layout of a model: row-major nested arrays.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    n: usize,
    p: usize,
    ell: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "X0")]
    x0: Vec<Vec<f64>>,
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    v_diag: Vec<f64>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    v: Option<serde_json::Value>,
}

impl ModelFile {
    fn into_model(self) -> Result<SystemModel> {
        if self.v.is_some() {
            return Err(Error::validation(
                "a general noise covariance \"V\" is not supported; give its diagonal as \"v_diag\"",
            ));
        }
        let (n, p) = (self.n, self.p);
        if n == 0 || p == 0 {
            return Err(Error::validation("n and p must be positive"));
        }
        let a = matrix_from_rows("A", &self.a, n, n)?;
        let c = matrix_from_rows("C", &self.c, p, n)?;
        let x0 = matrix_from_rows("X0", &self.x0, n, n)?;
        let w = matrix_from_rows("W", &self.w, n, n)?;
        SystemModel::new(a, c, x0, w, DVector::from_vec(self.v_diag), self.ell)
    }
}

/// A set of selected outputs, stored as strictly increasing 1-based indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SensorSet(Vec<usize>);

impl SensorSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// All sensors `{1, …, p}`.
    pub fn full(p: usize) -> Self {
        Self((1..=p).collect())
    }

    /// Sorts the indices; rejects duplicates and members outside `1..=p`.
    pub fn new(indices: impl IntoIterator<Item = usize>, p: usize) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::validation(format!("sensor {} listed twice", w[0])));
        }
        if let Some(&bad) = v.iter().find(|&&i| i == 0 || i > p) {
            return Err(Error::validation(format!("sensor index {bad} outside 1..={p}")));
        }
        Ok(Self(v))
    }

    pub fn singleton(i: usize) -> Self {
        Self(vec![i])
    }

    /// Members of the bitmask, bit `k` standing for sensor `k + 1`.
    pub fn from_mask(mask: u64) -> Self {
        Self((0..64).filter(|k| mask >> k & 1 == 1).map(|k| k + 1).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0, |m, &i| m | 1 << (i - 1))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn with(&self, i: usize) -> Self {
        let mut out = self.clone();
        if let Err(pos) = out.0.binary_search(&i) {
            out.0.insert(pos, i);
        }
        out
    }

    pub fn without(&self, i: usize) -> Self {
        Self(self.0.iter().copied().filter(|&j| j != i).collect())
    }

    pub fn union(&self, other: &SensorSet) -> Self {
        let mut v: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn difference(&self, other: &SensorSet) -> Self {
        Self(self.0.iter().copied().filter(|&i| !other.contains(i)).collect())
    }

    pub fn is_subset(&self, other: &SensorSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }
}

impl fmt::Display for SensorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Block lower-triangular `Φ` with block `(i, j) = A^{i-j}` for `i ≥ j`.
pub fn build_phi(a: &DMatrix<f64>, ell: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let mut powers = Vec::with_capacity(ell);
    powers.push(DMatrix::<f64>::identity(n, n));
    for k in 1..ell {
        let next = a * &powers[k - 1];
        powers.push(next);
    }
    let mut phi = DMatrix::zeros(n * ell, n * ell);
    for i in 0..ell {
        for j in 0..=i {
            phi.view_mut((i * n, j * n), (n, n)).copy_from(&powers[i - j]);
        }
    }
    phi
}

/// The `ℓ × nℓ` matrix whose row `k` is `σ_{v,i}⁻¹ · C_i · Φ_k`, so that
/// `U_i = Bᵀ B`. `i` is 1-based.
pub fn sensor_rows(model: &SystemModel, phi: &DMatrix<f64>, i: usize) -> Result<DMatrix<f64>> {
    let (n, p, ell) = (model.n(), model.p(), model.ell());
    if i == 0 || i > p {
        return Err(Error::validation(format!("sensor index {i} outside 1..={p}")));
    }
    let c_row = model.c.row(i - 1);
    let scale = model.v_diag[i - 1].sqrt().recip();
    let mut rows = DMatrix::zeros(ell, n * ell);
    for k in 0..ell {
        let g = c_row * phi.rows(k * n, n);
        rows.row_mut(k).copy_from(&(g * scale));
    }
    Ok(rows)
}

/// Information matrix `U_i` of sensor `i` (1-based).
pub fn sensor_info_matrix(model: &SystemModel, phi: &DMatrix<f64>, i: usize) -> Result<DMatrix<f64>> {
    let rows = sensor_rows(model, phi, i)?;
    Ok(symmetrize(&(rows.transpose() * rows)))
}

/// Everything needed to evaluate the smoothing MSE of any sensor subset.
#[derive(Debug, Clone)]
pub struct StackedModel {
    model: SystemModel,
    phi: DMatrix<f64>,
    z: DMatrix<f64>,
    l: DMatrix<f64>,
    sensor_rows: Vec<DMatrix<f64>>,
    sensor_info: Vec<DMatrix<f64>>,
    j_empty: f64,
}

impl StackedModel {
    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    pub fn p(&self) -> usize {
        self.model.p()
    }

    pub fn ell(&self) -> usize {
        self.model.ell()
    }

    pub fn dim(&self) -> usize {
        self.model.stacked_dim()
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    /// Prior covariance `Z = diag(X0, W, …, W)`.
    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    /// Prior information `L = Z⁻¹`.
    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// `U_i` for 1-based `i`.
    pub fn sensor_info(&self, i: usize) -> &DMatrix<f64> {
        &self.sensor_info[i - 1]
    }

    pub fn sensor_infos(&self) -> &[DMatrix<f64>] {
        &self.sensor_info
    }

    /// Factor `B_i` with `U_i = B_iᵀ B_i`, for 1-based `i`.
    pub fn sensor_factor(&self, i: usize) -> &DMatrix<f64> {
        &self.sensor_rows[i - 1]
    }

    /// `J(∅) = tr(Z) = tr(X0) + (ℓ - 1) tr(W)`.
    pub fn j_empty(&self) -> f64 {
        self.j_empty
    }

    /// Rejects sets with members outside `1..=p`.
    pub fn check_set(&self, s: &SensorSet) -> Result<()> {
        match s.max_index() {
            Some(m) if m > self.p() => Err(Error::validation(format!("sensor index {m} outside 1..={}", self.p()))),
            _ => Ok(()),
        }
    }
}

pub fn build_stacked(model: &SystemModel) -> Result<StackedModel> {
    let (n, ell) = (model.n(), model.ell());
    let dim = n * ell;
    let phi = build_phi(&model.a, ell);

    let x0_inv = cholesky(&model.x0, "X0 block of Z")?.inverse();
    let w_inv = if ell > 1 {
        Some(cholesky(&model.w, "W block of Z")?.inverse())
    } else {
        None
    };
    let mut z = DMatrix::zeros(dim, dim);
    let mut l = DMatrix::zeros(dim, dim);
    z.view_mut((0, 0), (n, n)).copy_from(&symmetrize(&model.x0));
    l.view_mut((0, 0), (n, n)).copy_from(&symmetrize(&x0_inv));
    if let Some(w_inv) = &w_inv {
        let w_sym = symmetrize(&model.w);
        let w_inv = symmetrize(w_inv);
        for k in 1..ell {
            z.view_mut((k * n, k * n), (n, n)).copy_from(&w_sym);
            l.view_mut((k * n, k * n), (n, n)).copy_from(&w_inv);
        }
    }

    let sensor_rows = (1..=model.p())
        .map(|i| sensor_rows(model, &phi, i))
        .collect::<Result<Vec<_>>>()?;
    let sensor_info = sensor_rows.iter().map(|b| symmetrize(&(b.transpose() * b))).collect();
    let j_empty = model.x0.trace() + (ell as f64 - 1.0) * model.w.trace();

    Ok(StackedModel {
        model: model.clone(),
        phi,
        z,
        l,
        sensor_rows,
        sensor_info,
        j_empty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_model(c: &[f64], v: &[f64], ell: usize) -> SystemModel {
        SystemModel::new(
            DMatrix::from_element(1, 1, 0.5),
            DMatrix::from_column_slice(c.len(), 1, c),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_column_slice(v),
            ell,
        )
        .unwrap()
    }

    #[test]
    fn phi_scalar_powers() {
        let a = DMatrix::from_element(1, 1, 3.0);
        let phi = build_phi(&a, 3);
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 3.0, 1.0, 0.0, 9.0, 3.0, 1.0]);
        assert_eq!(phi, expected);
    }

    #[test]
    fn phi_single_block_is_identity() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(build_phi(&a, 1), DMatrix::identity(2, 2));
    }

    #[test]
    fn phi_zero_dynamics() {
        let a = DMatrix::zeros(2, 2);
        assert_eq!(build_phi(&a, 2), DMatrix::identity(4, 4));
    }

    #[test]
    fn scalar_info_matrices() {
        let m = scalar_model(&[1.0, 0.0], &[1.0, 1.0], 1);
        let phi = build_phi(m.a(), 1);
        assert_eq!(sensor_info_matrix(&m, &phi, 1).unwrap()[(0, 0)], 1.0);
        assert_eq!(sensor_info_matrix(&m, &phi, 2).unwrap()[(0, 0)], 0.0);
        assert!(sensor_info_matrix(&m, &phi, 3).is_err());
        assert!(sensor_info_matrix(&m, &phi, 0).is_err());
    }

    #[test]
    fn stacked_scalar() {
        let m = scalar_model(&[1.0], &[1.0], 1);
        let st = build_stacked(&m).unwrap();
        assert_eq!(st.z()[(0, 0)], 1.0);
        assert_eq!(st.l()[(0, 0)], 1.0);
        assert_eq!(st.j_empty(), 1.0);
    }

    #[test]
    fn j_empty_trace_arithmetic() {
        let m = SystemModel::new(
            DMatrix::zeros(2, 2),
            DMatrix::identity(1, 2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2) * 2.0,
            DVector::from_element(1, 1.0),
            3,
        )
        .unwrap();
        let st = build_stacked(&m).unwrap();
        assert_eq!(st.j_empty(), 10.0);
        assert_eq!(st.z().trace(), 10.0);
    }

    #[test]
    fn rejects_nonpositive_noise() {
        let err = SystemModel::new(
            DMatrix::zeros(1, 1),
            DMatrix::from_element(2, 1, 1.0),
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DVector::from_vec(vec![1.0, 0.0]),
            1,
        )
        .unwrap_err();
        assert!(err.to_string().contains("v_diag[1] must be positive"), "{err}");
    }

    #[test]
    fn rejects_asymmetric_x0() {
        let err = SystemModel::new(
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]),
            DMatrix::identity(2, 2),
            DVector::from_element(2, 1.0),
            1,
        )
        .unwrap_err();
        assert!(err.to_string().contains("X0 must be symmetric"), "{err}");
    }

    #[test]
    fn rejects_indefinite_w() {
        let err = SystemModel::new(
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]),
            DVector::from_element(2, 1.0),
            2,
        )
        .unwrap_err();
        assert!(err.to_string().contains("W must be positive definite"), "{err}");
    }

    #[test]
    fn sensor_set_normalizes_and_validates() {
        let s = SensorSet::new([3, 1, 2], 3).unwrap();
        assert_eq!(s.indices(), &[1, 2, 3]);
        assert!(SensorSet::new([1, 1], 3).is_err());
        assert!(SensorSet::new([0], 3).is_err());
        assert!(SensorSet::new([4], 3).is_err());
        assert_eq!(SensorSet::from_mask(s.to_mask()), s);
        assert_eq!(s.without(2).with(2), s);
    }

    #[test]
    fn general_v_rejected() {
        let text = r#"{"n":1,"p":1,"ell":1,"A":[[0]],"C":[[1]],"X0":[[1]],"W":[[1]],"v_diag":[1],"V":[[1]]}"#;
        let err = SystemModel::from_json_str(text).unwrap_err();
        assert!(err.to_string().contains("v_diag"), "{err}");
    }

    #[test]
    fn ragged_rows_rejected() {
        let text =
            r#"{"n":2,"p":1,"ell":1,"A":[[0,0],[0]],"C":[[1,0]],"X0":[[1,0],[0,1]],"W":[[1,0],[0,1]],"v_diag":[1]}"#;
        let err = SystemModel::from_json_str(text).unwrap_err();
        assert!(err.to_string().contains("A row 1"), "{err}");
    }
}
