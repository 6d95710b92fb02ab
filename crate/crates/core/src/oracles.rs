//! Ground-truth solvers used to validate everything else: subset scans,
//! Bellman tables and the solution DAG. Written for obviousness, not speed.

use crate::error::{check_budget, Error, Result};
use crate::modmath::factorize;
use crate::reductions::UbssumInstance;
use crate::simulsum::SimulInstance;
use crate::solution_enum::SolutionSet;
use crate::ssum_hamming::{SsumInstance, WeightProfile};
use crate::subset_product::ProductInstance;

/// Largest `n` accepted by the subset scans.
pub const MAX_BRUTE_FORCE_ITEMS: usize = 24;

/// Default cell limit for the dynamic-programming tables.
pub const DEFAULT_ORACLE_BUDGET: u128 = 1 << 28;

fn subsets(n: usize) -> Result<impl Iterator<Item = Vec<usize>>> {
    if n > MAX_BRUTE_FORCE_ITEMS {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << n.min(127),
            budget: 1u128 << MAX_BRUTE_FORCE_ITEMS,
        });
    }
    Ok((0u32..1 << n).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect()))
}

pub fn brute_force_enumerate(inst: &SsumInstance) -> Result<SolutionSet> {
    Ok(SolutionSet::new(subsets(inst.n())?.filter(|s| inst.is_solution(s)).collect()))
}

/// Histogram of solution sizes.
pub fn brute_force_weights(inst: &SsumInstance) -> Result<WeightProfile> {
    Ok(WeightProfile::from_weights(
        brute_force_enumerate(inst)?.sets.iter().map(Vec::len),
    ))
}

/// Solution index sets in lexicographic order.
pub fn brute_force_simul(inst: &SimulInstance) -> Result<Vec<Vec<usize>>> {
    let mut out: Vec<_> = subsets(inst.n())?.filter(|s| inst.is_solution(s)).collect();
    out.sort();
    Ok(out)
}

pub fn brute_force_product(inst: &ProductInstance) -> Result<Vec<Vec<usize>>> {
    let mut out: Vec<_> = subsets(inst.n())?.filter(|s| inst.is_solution(s)).collect();
    out.sort();
    Ok(out)
}

/// Every multiplicity vector of an unbounded instance, sorted, by depth-first
/// search over the items; the target bounds the search to `t` levels per item.
pub fn brute_force_ubssum(inst: &UbssumInstance) -> Result<Vec<Vec<u64>>> {
    fn go(a: &[u64], i: usize, rest: u64, beta: &mut Vec<u64>, out: &mut Vec<Vec<u64>>, budget: &mut u64) -> Result<()> {
        if *budget == 0 {
            return Err(Error::BudgetExceeded {
                needed: DEFAULT_ORACLE_BUDGET + 1,
                budget: DEFAULT_ORACLE_BUDGET,
            });
        }
        *budget -= 1;
        if i == a.len() {
            if rest == 0 {
                out.push(beta.clone());
            }
            return Ok(());
        }
        for b in 0..=rest / a[i] {
            beta.push(b);
            go(a, i + 1, rest - b * a[i], beta, out, budget)?;
            beta.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    let mut budget = DEFAULT_ORACLE_BUDGET as u64;
    go(&inst.a, 0, inst.t, &mut Vec::new(), &mut out, &mut budget)?;
    out.sort();
    Ok(out)
}

/// Reachability of `t` with unlimited copies of every item.
pub fn dp_ubssum_decide(inst: &UbssumInstance, budget: u128) -> Result<bool> {
    check_budget(inst.t as u128 + 1, budget)?;
    let t = inst.t as usize;
    let mut reach = vec![false; t + 1];
    reach[0] = true;
    for r in 1..=t {
        reach[r] = inst.a.iter().any(|&a| a as usize <= r && reach[r - a as usize]);
    }
    Ok(reach[t])
}

/// Bellman reachability table: node `(i, r)` is live when some subset of the
/// first `i` items sums to `r`. Out-edges are "skip" to `(i-1, r)` and "take"
/// to `(i-1, r-a_i)`, kept only between live nodes, so every path from
/// `(n, t)` reaches the sink `(0, 0)`.
#[derive(Debug, Clone)]
pub struct SolutionDag {
    a: Vec<u64>,
    t: u64,
    width: usize,
    live: Vec<bool>,
}

impl SolutionDag {
    pub fn build(inst: &SsumInstance, budget: u128) -> Result<Self> {
        let n = inst.n();
        let width = inst.t as usize + 1;
        check_budget((n as u128 + 1) * width as u128, budget)?;
        let mut live = vec![false; (n + 1) * width];
        live[0] = true;
        for i in 1..=n {
            let a = inst.a[i - 1] as usize;
            let (prev, cur) = live.split_at_mut(i * width);
            let prev = &prev[(i - 1) * width..];
            for r in 0..width {
                cur[r] = prev[r] || (r >= a && prev[r - a]);
            }
        }
        Ok(SolutionDag {
            a: inst.a.clone(),
            t: inst.t,
            width,
            live,
        })
    }

    pub fn is_live(&self, i: usize, r: u64) -> bool {
        r < self.width as u64 && self.live[i * self.width + r as usize]
    }

    /// Child nodes of `(i, r)` for `i >= 1`: skip first, then take.
    pub fn edges(&self, i: usize, r: u64) -> impl Iterator<Item = (usize, u64, bool)> + '_ {
        let skip = self.is_live(i - 1, r).then_some((i - 1, r, false));
        let a = self.a[i - 1];
        let take = (r >= a && self.is_live(i - 1, r - a)).then(|| (i - 1, r - a, true));
        skip.into_iter().chain(take)
    }

    /// All source-to-sink paths as index sets; each step of the walk extends a
    /// path that is guaranteed to finish.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let n = self.a.len();
        let mut out = Vec::new();
        if !self.is_live(n, self.t) {
            return out;
        }
        let mut chosen = Vec::new();
        self.walk(n, self.t, &mut chosen, &mut out);
        out
    }

    fn walk(&self, i: usize, r: u64, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == 0 {
            let mut set = chosen.clone();
            set.reverse();
            out.push(set);
            return;
        }
        let edges: Vec<_> = self.edges(i, r).collect();
        for (j, rest, take) in edges {
            if take {
                chosen.push(i - 1);
            }
            self.walk(j, rest, chosen, out);
            if take {
                chosen.pop();
            }
        }
    }
}

pub fn dp_enumerate(inst: &SsumInstance, budget: u128) -> Result<SolutionSet> {
    Ok(SolutionSet::new(SolutionDag::build(inst, budget)?.paths()))
}

/// Multidimensional Bellman table over `prod_j (t_j + 1)` cells.
pub fn dp_simul_decide(inst: &SimulInstance, budget: u128) -> Result<bool> {
    let cells: u128 = inst.targets.iter().map(|&t| t as u128 + 1).product();
    check_budget(cells * (inst.n() as u128 + 1), budget)?;
    let dims: Vec<usize> = inst.targets.iter().map(|&t| t as usize + 1).collect();
    let mut strides = vec![1usize; dims.len()];
    for j in (0..dims.len().saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * dims[j + 1];
    }
    let mut reach = vec![false; cells as usize];
    reach[0] = true;
    for row in &inst.rows {
        if row.iter().zip(&inst.targets).any(|(&a, &t)| a > t) || row.iter().all(|&a| a == 0) {
            continue;
        }
        let shift: usize = row.iter().zip(&strides).map(|(&a, &s)| a as usize * s).sum();
        // descending order so each row is used at most once
        for idx in (shift..reach.len()).rev() {
            if reach[idx] || !reach[idx - shift] {
                continue;
            }
            let fits = (0..dims.len()).all(|j| (idx / strides[j]) % dims[j] >= row[j] as usize);
            if fits {
                reach[idx] = true;
            }
        }
    }
    Ok(reach[cells as usize - 1])
}

/// Bellman table in the exponent space of `t`'s prime factorization.
pub fn dp_product_decide(inst: &ProductInstance, budget: u128) -> Result<bool> {
    let primes: Vec<u64> = factorize(inst.t).into_keys().collect();
    let exps = |mut x: u64| -> Vec<u64> {
        primes
            .iter()
            .map(|&p| {
                let mut e = 0;
                while x % p == 0 {
                    x /= p;
                    e += 1;
                }
                e
            })
            .collect()
    };
    let rows = inst
        .a
        .iter()
        .filter(|&&x| inst.t % x == 0)
        .map(|&x| exps(x))
        .collect();
    dp_simul_decide(&SimulInstance::new(rows, exps(inst.t))?, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ssum(a: &[u64], t: u64) -> SsumInstance {
        SsumInstance { a: a.to_vec(), t }
    }

    #[test]
    fn enumerate_examples() {
        for f in [brute_force_enumerate, |i: &SsumInstance| dp_enumerate(i, DEFAULT_ORACLE_BUDGET)] {
            assert_eq!(f(&ssum(&[3, 1, 2], 3)).unwrap().sets, vec![vec![0], vec![1, 2]]);
            assert_eq!(f(&ssum(&[], 0)).unwrap().sets, vec![Vec::<usize>::new()]);
            assert!(f(&ssum(&[1], 2)).unwrap().is_empty());
        }
    }

    #[test]
    fn simul_examples() {
        let b = DEFAULT_ORACLE_BUDGET;
        let s = |t: &[u64]| SimulInstance::new(vec![vec![1, 2], vec![2, 1]], t.to_vec()).unwrap();
        assert!(dp_simul_decide(&s(&[3, 3]), b).unwrap());
        assert!(!dp_simul_decide(&s(&[1, 1]), b).unwrap());
        assert!(dp_simul_decide(&SimulInstance::new(vec![vec![4, 2]], vec![4, 2]).unwrap(), b).unwrap());
    }

    #[test]
    fn product_examples() {
        let b = DEFAULT_ORACLE_BUDGET;
        let p = |a: &[u64], t| ProductInstance::new(a.to_vec(), t).unwrap();
        assert!(dp_product_decide(&p(&[2, 3, 6, 5], 30), b).unwrap());
        assert!(!dp_product_decide(&p(&[2, 2], 8), b).unwrap());
        assert!(dp_product_decide(&p(&[7], 1), b).unwrap());
    }

    #[test]
    fn unbounded_dp() {
        let u = |a: &[u64], t| UbssumInstance::new(a.to_vec(), t).unwrap();
        assert!(dp_ubssum_decide(&u(&[1, 3], 5), DEFAULT_ORACLE_BUDGET).unwrap());
        assert!(!dp_ubssum_decide(&u(&[2, 4], 3), DEFAULT_ORACLE_BUDGET).unwrap());
        assert_eq!(brute_force_ubssum(&u(&[1, 3], 5)).unwrap(), vec![vec![2, 1], vec![5, 0]]);
    }

    #[test]
    fn guards_are_typed() {
        let big = ssum(&[1; 25], 3);
        assert!(matches!(brute_force_enumerate(&big), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(
            dp_enumerate(&ssum(&[1], 1 << 40), 1 << 20),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    proptest! {
        #[test]
        fn dag_matches_scan(a in prop::collection::vec(0u64..=20, 0..=12), t in 0u64..=60) {
            let inst = ssum(&a, t);
            prop_assert_eq!(dp_enumerate(&inst, DEFAULT_ORACLE_BUDGET).unwrap(), brute_force_enumerate(&inst).unwrap());
        }

        #[test]
        fn simul_dp_matches_scan(
            rows in prop::collection::vec(prop::collection::vec(0u64..=5, 2), 0..=10),
            targets in prop::collection::vec(0u64..=8, 2),
        ) {
            let inst = SimulInstance::new(rows, targets).unwrap();
            prop_assert_eq!(
                dp_simul_decide(&inst, DEFAULT_ORACLE_BUDGET).unwrap(),
                !brute_force_simul(&inst).unwrap().is_empty()
            );
        }

        #[test]
        fn product_dp_matches_scan(a in prop::collection::vec(1u64..=40, 0..=10), t in 1u64..=2000) {
            let inst = ProductInstance::new(a, t).unwrap();
            prop_assert_eq!(
                dp_product_decide(&inst, DEFAULT_ORACLE_BUDGET).unwrap(),
                !brute_force_product(&inst).unwrap().is_empty()
            );
        }
    }
}
