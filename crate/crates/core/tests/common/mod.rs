#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sensor_select::experiments::{derive_seed, random_instance};
use sensor_select::{build_stacked, mse, SensorSet, StackedModel, SystemModel};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn scalar_model(p: usize) -> SystemModel {
    SystemModel::new(
        DMatrix::zeros(1, 1),
        DMatrix::from_element(p, 1, 1.0),
        DMatrix::identity(1, 1),
        DMatrix::identity(1, 1),
        DVector::from_element(p, 1.0),
        1,
    )
    .unwrap()
}

pub fn scalar_two_sensor() -> StackedModel {
    build_stacked(&scalar_model(2)).unwrap()
}

/// One member of a small random test fleet.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub n: usize,
    pub ell: usize,
    pub p: usize,
    pub s: usize,
    pub stacked: StackedModel,
}

/// `count` instances with `n ≤ 3`, `ℓ ≤ 3`, `p ∈ {4..=8}`, `s ∈ {1..=3}`.
pub fn small_fleet(count: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let n = rng.random_range(1..=3);
            let ell = rng.random_range(1..=3);
            let p = rng.random_range(4..=8);
            let s = rng.random_range(1..=3);
            let inst_seed = derive_seed(seed, k as u64);
            let model = random_instance(n, p, ell, inst_seed).unwrap();
            Instance {
                seed: inst_seed,
                n,
                ell,
                p,
                s,
                stacked: build_stacked(&model).unwrap(),
            }
        })
        .collect()
}

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// `A^k` by repeated multiplication.
pub fn mat_pow(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let mut out = DMatrix::identity(a.nrows(), a.ncols());
    for _ in 0..k {
        out = &out * a;
    }
    out
}

/// Sensor information written literally with Kronecker products:
/// `σ⁻² Φᵀ (I⊗C)ᵀ (I⊗I⁽ⁱ⁾) (I⊗C) Φ`.
pub fn kronecker_info(model: &SystemModel, phi: &DMatrix<f64>, i: usize) -> DMatrix<f64> {
    let (p, ell) = (model.p(), model.ell());
    let eye_l = DMatrix::identity(ell, ell);
    let ic = kron(&eye_l, model.c());
    let mut pick = DMatrix::zeros(p, p);
    pick[(i - 1, i - 1)] = 1.0;
    let ip = kron(&eye_l, &pick);
    (phi.transpose() * ic.transpose() * ip * ic * phi) / model.v_diag()[i - 1]
}

/// Every subset of `{1..p}`, built by recursion (include-first order).
pub fn all_subsets(p: usize) -> Vec<SensorSet> {
    fn rec(i: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<SensorSet>) {
        if i > p {
            out.push(SensorSet::new(cur.iter().copied(), p).unwrap());
            return;
        }
        cur.push(i);
        rec(i + 1, p, cur, out);
        cur.pop();
        rec(i + 1, p, cur, out);
    }
    let mut out = Vec::new();
    rec(1, p, &mut Vec::new(), &mut out);
    out
}

pub fn f_table(stacked: &StackedModel) -> HashMap<SensorSet, f64> {
    all_subsets(stacked.p())
        .into_iter()
        .map(|s| {
            let f = mse(stacked, &s).unwrap().f;
            (s, f)
        })
        .collect()
}

/// Exact (γ, α, β) straight from the definitions, iterating set pairs in
/// reverse recursive order and recomputing nothing from bitmasks.
pub fn reference_ratios(stacked: &StackedModel) -> (f64, f64, f64) {
    let table = f_table(stacked);
    let f = |s: &SensorSet| table[s];
    let rho = |omega: &SensorSet, s: &SensorSet| f(&s.union(omega)) - f(s);
    let eps = 1e-12 * (1.0 + stacked.j_empty());
    let mut subsets = all_subsets(stacked.p());
    subsets.reverse();

    let mut gamma = 1.0f64;
    let mut alpha_ratio = 1.0f64;
    let mut beta = 1.0f64;
    for s in &subsets {
        for omega in &subsets {
            let joint = rho(omega, s);
            if joint > eps {
                let summed: f64 = omega
                    .difference(s)
                    .iter()
                    .map(|w| rho(&SensorSet::singleton(w), s))
                    .sum();
                gamma = gamma.min(summed / joint);
            }
            for j in s.difference(omega).iter() {
                let js = SensorSet::singleton(j);
                let base = s.without(j);
                let reference = rho(&js, &base);
                if reference > eps {
                    alpha_ratio = alpha_ratio.min(rho(&js, &base.union(omega)) / reference);
                }
            }
        }
    }
    for s2 in &subsets {
        for s1 in subsets.iter().filter(|s1| s1.is_subset(s2)) {
            for w in 1..=stacked.p() {
                if s2.contains(w) {
                    continue;
                }
                let ws = SensorSet::singleton(w);
                let larger = rho(&ws, s2);
                if larger > eps {
                    beta = beta.min(rho(&ws, s1) / larger);
                }
            }
        }
    }
    (gamma, 1.0 - alpha_ratio, beta)
}
