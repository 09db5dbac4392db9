use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SensorSet, StackedModel};
use crate::objective::{info_sum, mse, score_from_info, ScoreValue};

/// Maximum number of subsets the exhaustive optimum may visit.
pub const BRUTE_FORCE_BUDGET: u128 = 2_000_000;

/// Largest `p` for which the exact ratios are enumerated.
pub const EXACT_RATIOS_MAX_P: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub set: SensorSet,
    pub score: ScoreValue,
    pub evaluated: usize,
}

/// `Σ_{k ≤ s} C(p, k)`.
pub fn subset_count(p: usize, s: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for k in 0..=s.min(p) {
        total += binom;
        binom = binom * (p - k) as u128 / (k + 1) as u128;
    }
    total
}

/// Maximizes `f` over every subset with at most `s` members.
///
/// Subsets are visited in lexicographic order of their sorted index lists and
/// only a strictly larger `f` replaces the incumbent, so ties resolve to the
/// lexicographically first subset.
pub fn brute_force_optimum(stacked: &StackedModel, s: usize) -> Result<BruteForceResult> {
    let p = stacked.p();
    let count = subset_count(p, s);
    if count > BRUTE_FORCE_BUDGET {
        return Err(Error::Budget(format!(
            "{count} subsets of size <= {s} from p = {p} exceed {BRUTE_FORCE_BUDGET}"
        )));
    }
    let mut best = BruteForceResult {
        set: SensorSet::empty(),
        score: mse(stacked, &SensorSet::empty())?,
        evaluated: 1,
    };
    let mut prefix = Vec::with_capacity(s);
    let running = info_sum(stacked, &SensorSet::empty());
    visit(stacked, s, &mut prefix, &running, &mut best)?;
    Ok(best)
}

fn visit(
    stacked: &StackedModel,
    s: usize,
    prefix: &mut Vec<usize>,
    running: &nalgebra::DMatrix<f64>,
    best: &mut BruteForceResult,
) -> Result<()> {
    if prefix.len() == s {
        return Ok(());
    }
    let start = prefix.last().map_or(1, |&i| i + 1);
    for i in start..=stacked.p() {
        let info = running + stacked.sensor_info(i);
        let score = score_from_info(stacked, &info)?;
        prefix.push(i);
        best.evaluated += 1;
        if score.f > best.score.f {
            best.set = SensorSet::from_mask(prefix.iter().fold(0, |m, &k| m | 1 << (k - 1)));
            best.score = score;
        }
        visit(stacked, s, prefix, &info, best)?;
        prefix.pop();
    }
    Ok(())
}

/// Sets attaining an extremum: `omega` and `s` for every ratio, plus the
/// element `j` for the curvature and `s2` for β (`s` is then the smaller set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioWitness {
    pub omega: SensorSet,
    pub s: SensorSet,
    pub j: Option<usize>,
    pub s2: Option<SensorSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRatios {
    /// Submodularity ratio: largest `γ` with `Σ_{ω ∈ Ω\S} ρ_ω(S) ≥ γ ρ_Ω(S)` for all `Ω, S`.
    pub gamma_exact: f64,
    /// Curvature: smallest `α` with `ρ_j(S\{j} ∪ Ω) ≥ (1 - α) ρ_j(S\{j})` for all `Ω, S, j ∈ S\Ω`.
    pub alpha_exact: f64,
    /// Largest `β` with `ρ_ω(S1) ≥ β ρ_ω(S2)` for all `S1 ⊆ S2`, `ω ∉ S2`.
    pub beta_exact: f64,
    pub gamma_witness: Option<RatioWitness>,
    pub alpha_witness: Option<RatioWitness>,
    pub beta_witness: Option<RatioWitness>,
    /// Increments at or below this are treated as zero and skipped.
    pub epsilon: f64,
}

/// Exact `γ`, `α`, `β` by enumerating every constraint of their definitions.
///
/// Constraints whose reference increment is at most `ε = 1e-12 (1 + J(∅))`
/// are vacuous and skipped. With no binding constraint `γ` and `β` default
/// to 1 and `α` to 0.
pub fn exact_ratios(stacked: &StackedModel) -> Result<ExactRatios> {
    let p = stacked.p();
    if p > EXACT_RATIOS_MAX_P {
        return Err(Error::Budget(format!(
            "exact ratios need p <= {EXACT_RATIOS_MAX_P}, got p = {p}"
        )));
    }
    let full = (1usize << p) - 1;
    let f = (0..=full)
        .map(|m| mse(stacked, &SensorSet::from_mask(m as u64)).map(|v| v.f))
        .collect::<Result<Vec<f64>>>()?;
    let eps = 1e-12 * (1.0 + stacked.j_empty());
    let rho = |omega: usize, s: usize| f[s | omega] - f[s];
    let set = |m: usize| SensorSet::from_mask(m as u64);

    let mut gamma = 1.0;
    let mut gamma_witness = None;
    let mut alpha_ratio = 1.0;
    let mut alpha_witness = None;
    for s in 0..=full {
        for omega in 0..=full {
            let joint = rho(omega, s);
            if joint > eps {
                let fresh = omega & !s;
                let summed: f64 = bits(fresh).map(|w| rho(1 << w, s)).sum();
                let ratio = summed / joint;
                if ratio < gamma {
                    gamma = ratio;
                    gamma_witness = Some(RatioWitness {
                        omega: set(omega),
                        s: set(s),
                        j: None,
                        s2: None,
                    });
                }
            }
            for j in bits(s & !omega) {
                let jm = 1 << j;
                let base = s & !jm;
                let reference = rho(jm, base);
                if reference > eps {
                    let ratio = rho(jm, base | omega) / reference;
                    if ratio < alpha_ratio {
                        alpha_ratio = ratio;
                        alpha_witness = Some(RatioWitness {
                            omega: set(omega),
                            s: set(s),
                            j: Some(j + 1),
                            s2: None,
                        });
                    }
                }
            }
        }
    }

    let mut beta = 1.0;
    let mut beta_witness = None;
    for s2 in 0..=full {
        for w in bits(full & !s2) {
            let wm = 1 << w;
            let larger = rho(wm, s2);
            if larger <= eps {
                continue;
            }
            // every submask of s2, including s2 and the empty set
            let mut s1 = s2;
            loop {
                let ratio = rho(wm, s1) / larger;
                if ratio < beta {
                    beta = ratio;
                    beta_witness = Some(RatioWitness {
                        omega: set(wm),
                        s: set(s1),
                        j: None,
                        s2: Some(set(s2)),
                    });
                }
                if s1 == 0 {
                    break;
                }
                s1 = (s1 - 1) & s2;
            }
        }
    }

    Ok(ExactRatios {
        gamma_exact: gamma,
        alpha_exact: 1.0 - alpha_ratio,
        beta_exact: beta,
        gamma_witness,
        alpha_witness,
        beta_witness,
        epsilon: eps,
    })
}

fn bits(mask: usize) -> impl Iterator<Item = usize> {
    (0..usize::BITS as usize).filter(move |b| mask >> b & 1 == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_stacked, SystemModel};
    use nalgebra::{DMatrix, DVector};

    fn scalar(p: usize) -> StackedModel {
        let m = SystemModel::new(
            DMatrix::zeros(1, 1),
            DMatrix::from_element(p, 1, 1.0),
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DVector::from_element(p, 1.0),
            1,
        )
        .unwrap();
        build_stacked(&m).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(subset_count(4, 2), 1 + 4 + 6);
        assert_eq!(subset_count(3, 5), 8);
        assert_eq!(subset_count(30, 30), 1 << 30);
    }

    #[test]
    fn scalar_brute_force() {
        let st = scalar(2);
        let r = brute_force_optimum(&st, 1).unwrap();
        assert_eq!(r.set.indices(), &[1]);
        assert!((r.score.f - 0.5).abs() < 1e-15);
        assert_eq!(r.evaluated, 3);
        let r = brute_force_optimum(&st, 2).unwrap();
        assert_eq!(r.set, SensorSet::full(2));
    }

    #[test]
    fn budget_enforced() {
        let st = scalar(2);
        assert!(brute_force_optimum(&st, 2).is_ok());
        let big = scalar(9);
        assert!(matches!(exact_ratios(&big), Err(Error::Budget(_))));
    }

    #[test]
    fn single_sensor_defaults() {
        let r = exact_ratios(&scalar(1)).unwrap();
        assert_eq!((r.gamma_exact, r.alpha_exact, r.beta_exact), (1.0, 0.0, 1.0));
    }

    #[test]
    fn scalar_two_sensor_ratios() {
        // f(∅) = 0, f({i}) = 1/2, f({1,2}) = 2/3.
        // γ: Ω = {1,2}, S = ∅ gives (1/2 + 1/2) / (2/3) = 3/2, capped by singletons at 1.
        // α: ρ_2({1}) / ρ_2(∅) = (1/6) / (1/2) = 1/3, so α = 2/3.
        // β: ρ_ω(∅) / ρ_ω({other}) = 3 ≥ 1, so β = 1.
        let r = exact_ratios(&scalar(2)).unwrap();
        assert!((r.gamma_exact - 1.0).abs() < 1e-12);
        assert!((r.alpha_exact - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.beta_exact - 1.0).abs() < 1e-12);
        assert!(r.gamma_exact >= 1.0 / 3.0 && r.alpha_exact <= 8.0 / 9.0);
        assert!(r.beta_exact <= r.gamma_exact + 1e-9);
    }
}
