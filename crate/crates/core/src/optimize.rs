//! Cardinality-constrained selection: greedy, lazy greedy, exhaustive search
//! and a random baseline.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{rng, EnvironmentPoints};
use crate::error::{Error, Result};
use crate::objective::{quality_of_counts, regularized_objective, GainCache, QualityFunction, Regularizer, Solution};
use crate::visibility::{VisCounts, VisibilityMatrix};

pub const DEFAULT_BRUTE_FORCE_BUDGET: u128 = 2_000_000;

/// Below this many candidates a greedy step is evaluated serially.
const PARALLEL_THRESHOLD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerMethod {
    Greedy,
    #[default]
    LazyGreedy,
    BruteForce,
    Random,
}

impl std::str::FromStr for OptimizerMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(OptimizerMethod::Greedy),
            "lazy_greedy" | "lazy" => Ok(OptimizerMethod::LazyGreedy),
            "brute_force" => Ok(OptimizerMethod::BruteForce),
            "random" => Ok(OptimizerMethod::Random),
            other => Err(Error::invalid(format!("unknown optimizer method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: OptimizerMethod,
    pub k: usize,
    #[serde(default = "default_budget")]
    pub budget: u128,
    #[serde(default)]
    pub seed: u64,
}

fn default_budget() -> u128 {
    DEFAULT_BRUTE_FORCE_BUDGET
}

impl OptimizerConfig {
    pub fn new(method: OptimizerMethod, k: usize) -> Self {
        OptimizerConfig { method, k, budget: DEFAULT_BRUTE_FORCE_BUDGET, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub method: OptimizerMethod,
    pub solution: Solution,
    /// Marginal gain of each selection step, in selection order.
    pub gains: Vec<f64>,
    /// Objective value of the final solution, evaluated from scratch.
    pub value: f64,
    /// Number of marginal-gain (or full objective) evaluations.
    pub evaluations: u64,
    pub wall_time_s: f64,
    /// Set when the (1 − 1/e) bound does not apply (active regularizer).
    pub guarantee_void: bool,
    pub warnings: Vec<String>,
}

impl OptimizerReport {
    /// Same report modulo wall time.
    pub fn same_result(&self, other: &OptimizerReport) -> bool {
        let mut a = self.clone();
        a.wall_time_s = other.wall_time_s;
        a == *other
    }
}

fn check_k(k: usize, m: usize) -> Result<()> {
    if k == 0 || k > m {
        return Err(Error::invalid(format!("k = {k} out of range 1..={m}")));
    }
    Ok(())
}

fn prepare(matrix: &VisibilityMatrix, points: &EnvironmentPoints, k: usize, reg: &Regularizer) -> Result<Vec<String>> {
    check_k(k, matrix.m_cameras())?;
    if matrix.n_points() != points.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but there are {} points",
            matrix.n_points(),
            points.len()
        )));
    }
    reg.check_size(matrix.m_cameras())?;
    let mut warnings = Vec::new();
    if !reg.is_inactive() {
        warnings.push("regularizer active: objective is not monotone submodular, approximation guarantee void".into());
    }
    Ok(warnings)
}

/// Best unselected candidate: maximal gain, lowest id on ties.
fn pick(gains: &[Option<f64>]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (v, g) in gains.iter().enumerate() {
        if let Some(g) = *g {
            if best.is_none_or(|(_, b)| g > b) {
                best = Some((v, g));
            }
        }
    }
    best
}

pub fn greedy(
    matrix: &VisibilityMatrix,
    points: &EnvironmentPoints,
    k: usize,
    q: &QualityFunction,
    reg: &Regularizer,
) -> Result<OptimizerReport> {
    let start = Instant::now();
    let warnings = prepare(matrix, points, k, reg)?;
    let m = matrix.m_cameras();
    let mut cache = GainCache::new(matrix, points, q)?;
    let mut gains = Vec::with_capacity(k);
    let mut evaluations = 0u64;
    for _ in 0..k {
        let eval = |v: usize| {
            if cache.contains(v) {
                None
            } else {
                Some(cache.gain(v) - reg.added(cache.selected(), v))
            }
        };
        let step: Vec<Option<f64>> = if m >= PARALLEL_THRESHOLD {
            (0..m).into_par_iter().map(eval).collect()
        } else {
            (0..m).map(eval).collect()
        };
        evaluations += step.iter().filter(|g| g.is_some()).count() as u64;
        let (v, g) = pick(&step).expect("k ≤ m leaves a candidate");
        cache.insert(v)?;
        gains.push(g);
    }
    finish(
        OptimizerMethod::Greedy,
        matrix,
        points,
        k,
        q,
        reg,
        cache.selected().to_vec(),
        gains,
        evaluations,
        warnings,
        start,
    )
}

#[derive(Debug, PartialEq)]
struct Entry {
    bound: f64,
    id: usize,
    stamp: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy with stale upper bounds in a priority queue.
///
/// Gains only shrink as the selection grows, so a candidate whose refreshed gain
/// still tops the queue is the greedy choice. The queue orders by (gain desc, id
/// asc), so the lowest-id tie rule carries over and the result equals [`greedy`].
pub fn lazy_greedy(
    matrix: &VisibilityMatrix,
    points: &EnvironmentPoints,
    k: usize,
    q: &QualityFunction,
    reg: &Regularizer,
) -> Result<OptimizerReport> {
    let start = Instant::now();
    let mut warnings = prepare(matrix, points, k, reg)?;
    if !reg.is_inactive() {
        warnings.push("lazy evaluation with an active regularizer".into());
    }
    let m = matrix.m_cameras();
    let mut cache = GainCache::new(matrix, points, q)?;
    let initial: Vec<f64> = if m >= PARALLEL_THRESHOLD {
        (0..m).into_par_iter().map(|v| cache.gain(v)).collect()
    } else {
        (0..m).map(|v| cache.gain(v)).collect()
    };
    let mut evaluations = m as u64;
    let mut heap: BinaryHeap<Entry> =
        initial.into_iter().enumerate().map(|(id, bound)| Entry { bound, id, stamp: 0 }).collect();
    let mut gains = Vec::with_capacity(k);
    for step in 0..k {
        loop {
            let top = heap.pop().expect("k ≤ m leaves a candidate");
            if top.stamp == step {
                cache.insert(top.id)?;
                gains.push(top.bound);
                break;
            }
            let g = cache.gain(top.id) - reg.added(cache.selected(), top.id);
            evaluations += 1;
            heap.push(Entry { bound: g, id: top.id, stamp: step });
        }
    }
    finish(
        OptimizerMethod::LazyGreedy,
        matrix,
        points,
        k,
        q,
        reg,
        cache.selected().to_vec(),
        gains,
        evaluations,
        warnings,
        start,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    method: OptimizerMethod,
    matrix: &VisibilityMatrix,
    points: &EnvironmentPoints,
    k: usize,
    q: &QualityFunction,
    reg: &Regularizer,
    ids: Vec<usize>,
    gains: Vec<f64>,
    evaluations: u64,
    warnings: Vec<String>,
    start: Instant,
) -> Result<OptimizerReport> {
    let value = regularized_objective(matrix, points, &ids, q, reg)?;
    Ok(OptimizerReport {
        method,
        solution: Solution::new(ids, k)?,
        gains,
        value,
        evaluations,
        wall_time_s: start.elapsed().as_secs_f64(),
        guarantee_void: !reg.is_inactive(),
        warnings,
    })
}

pub fn binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((m - i) as u128) / (i + 1) as u128;
    }
    c
}

/// Exhaustive search over all k-subsets in lexicographic order; the first
/// maximal subset wins.
pub fn brute_force(
    matrix: &VisibilityMatrix,
    points: &EnvironmentPoints,
    k: usize,
    q: &QualityFunction,
    reg: &Regularizer,
    budget: u128,
) -> Result<OptimizerReport> {
    let start = Instant::now();
    let warnings = prepare(matrix, points, k, reg)?;
    let m = matrix.m_cameras();
    let required = binomial(m, k);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let table = q.table();
    let mut counts = VisCounts::zeros(matrix.n_points());
    let mut combo = Vec::with_capacity(k);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluations = 0u64;

    struct Search<'a> {
        matrix: &'a VisibilityMatrix,
        points: &'a EnvironmentPoints,
        table: &'a crate::objective::QualityTable,
        reg: &'a Regularizer,
        k: usize,
        m: usize,
    }

    fn recurse(
        s: &Search,
        from: usize,
        counts: &mut VisCounts,
        combo: &mut Vec<usize>,
        best: &mut Option<(f64, Vec<usize>)>,
        evaluations: &mut u64,
    ) {
        if combo.len() == s.k {
            let value = quality_of_counts(counts, s.points, s.table) - s.reg.total(combo);
            *evaluations += 1;
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                *best = Some((value, combo.clone()));
            }
            return;
        }
        let remaining = s.k - combo.len();
        for v in from..=s.m - remaining {
            counts.add_column(s.matrix.column(v));
            combo.push(v);
            recurse(s, v + 1, counts, combo, best, evaluations);
            combo.pop();
            counts.sub_column(s.matrix.column(v));
        }
    }

    let search = Search { matrix, points, table: &table, reg, k, m };
    recurse(&search, 0, &mut counts, &mut combo, &mut best, &mut evaluations);
    let (_, ids) = best.expect("at least one subset");

    // Per-step gains along the lexicographic order of the optimum.
    let mut cache = GainCache::new(matrix, points, q)?;
    let mut gains = Vec::with_capacity(k);
    for &v in &ids {
        gains.push(cache.gain(v) - reg.added(cache.selected(), v));
        cache.insert(v)?;
    }
    finish(OptimizerMethod::BruteForce, matrix, points, k, q, reg, ids, gains, evaluations, warnings, start)
}

/// Uniform k-subset of `0..m`, deterministic per seed.
pub fn random_solution(m: usize, k: usize, rng_seed: u64) -> Result<Solution> {
    if k > m {
        return Err(Error::invalid(format!("k = {k} exceeds m = {m}")));
    }
    let mut r = rng(rng_seed);
    let ids = index::sample(&mut r, m, k).into_vec();
    Solution::new(ids, k)
}

pub fn run_optimizer(
    matrix: &VisibilityMatrix,
    points: &EnvironmentPoints,
    config: &OptimizerConfig,
    q: &QualityFunction,
    reg: &Regularizer,
) -> Result<OptimizerReport> {
    match config.method {
        OptimizerMethod::Greedy => greedy(matrix, points, config.k, q, reg),
        OptimizerMethod::LazyGreedy => lazy_greedy(matrix, points, config.k, q, reg),
        OptimizerMethod::BruteForce => brute_force(matrix, points, config.k, q, reg, config.budget),
        OptimizerMethod::Random => {
            let start = Instant::now();
            let warnings = prepare(matrix, points, config.k, reg)?;
            let solution = random_solution(matrix.m_cameras(), config.k, config.seed)?;
            let mut cache = GainCache::new(matrix, points, q)?;
            let mut gains = Vec::with_capacity(config.k);
            for &v in &solution.ids {
                gains.push(cache.gain(v) - reg.added(cache.selected(), v));
                cache.insert(v)?;
            }
            finish(OptimizerMethod::Random, matrix, points, config.k, q, reg, solution.ids, gains, 0, warnings, start)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{g_eval, QualityWeights};
    use crate::Point3;
    use rand::Rng;

    fn abc() -> (VisibilityMatrix, EnvironmentPoints) {
        // A{1,2}, B{2,3}, C{3,4}
        let rows =
            vec![vec![true, false, false], vec![true, true, false], vec![false, true, true], vec![false, false, true]];
        (VisibilityMatrix::from_rows(&rows, 3).unwrap(), EnvironmentPoints::new(vec![Point3::origin(); 4]))
    }

    fn random_instance(seed: u64, n: usize, m: usize, density: f64) -> (VisibilityMatrix, EnvironmentPoints) {
        let mut r = rng(seed);
        let rows: Vec<Vec<bool>> = (0..n).map(|_| (0..m).map(|_| r.gen_bool(density)).collect()).collect();
        (VisibilityMatrix::from_rows(&rows, m).unwrap(), EnvironmentPoints::new(vec![Point3::origin(); n]))
    }

    #[test]
    fn abc_greedy_picks_a_then_c() {
        let (mat, pts) = abc();
        let r = greedy(&mat, &pts, 2, &QualityFunction::Scp, &Regularizer::none()).unwrap();
        assert_eq!(r.solution.ids, vec![0, 2]);
        assert_eq!(r.gains, vec![2.0, 2.0]);
        assert_eq!(r.value, 4.0);
        let l = lazy_greedy(&mat, &pts, 2, &QualityFunction::Scp, &Regularizer::none()).unwrap();
        assert_eq!(l.solution, r.solution);
        let b = brute_force(&mat, &pts, 2, &QualityFunction::Scp, &Regularizer::none(), 100).unwrap();
        assert_eq!(b.solution.ids, vec![0, 2]);
        assert_eq!(b.value, 4.0);
        assert_eq!(b.evaluations, 3);
    }

    #[test]
    fn k_bounds() {
        let (mat, pts) = abc();
        for k in [0, 4] {
            assert!(greedy(&mat, &pts, k, &QualityFunction::Scp, &Regularizer::none()).is_err());
            assert!(lazy_greedy(&mat, &pts, k, &QualityFunction::Scp, &Regularizer::none()).is_err());
        }
        let all = greedy(&mat, &pts, 3, &QualityFunction::Scp, &Regularizer::none()).unwrap();
        let mut ids = all.solution.ids.clone();
        ids.sort();
        assert_eq!(ids, vec![0, 1, 2]);
        let bf = brute_force(&mat, &pts, 3, &QualityFunction::Scp, &Regularizer::none(), 10).unwrap();
        assert_eq!(bf.solution.ids, vec![0, 1, 2]);
    }

    #[test]
    fn k1_is_best_column() {
        let (mat, pts) = random_instance(3, 40, 9, 0.3);
        let q = QualityFunction::Scp;
        let r = greedy(&mat, &pts, 1, &q, &Regularizer::none()).unwrap();
        let best = (0..9).map(|v| (g_eval(&mat, &pts, &[v], &q).unwrap(), v)).fold((f64::MIN, 0), |acc, (g, v)| {
            if g > acc.0 {
                (g, v)
            } else {
                acc
            }
        });
        assert_eq!(r.solution.ids, vec![best.1]);
    }

    #[test]
    fn budget_exceeded() {
        let (mat, pts) = random_instance(1, 10, 20, 0.5);
        let err = brute_force(&mat, &pts, 10, &QualityFunction::Scp, &Regularizer::none(), 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { required: 184_756, budget: 1000 }));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(600, 0), 1);
        assert_eq!(binomial(12, 3), 220);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(14, 4), 1001);
    }

    #[test]
    fn brute_force_dominates_greedy() {
        for seed in 0..30 {
            let (mat, pts) = random_instance(seed, 30, 12, 0.25);
            let q = QualityFunction::redundancy(QualityWeights::sample(seed, 6).unwrap());
            let g = greedy(&mat, &pts, 3, &q, &Regularizer::none()).unwrap();
            let b = brute_force(&mat, &pts, 3, &q, &Regularizer::none(), DEFAULT_BRUTE_FORCE_BUDGET).unwrap();
            assert!(b.value >= g.value);
        }
    }

    #[test]
    fn lazy_matches_greedy_and_saves_work() {
        for seed in 0..10 {
            let (mat, pts) = random_instance(seed, 200, 120, 0.05);
            let q = QualityFunction::redundancy(QualityWeights::sample(seed, 6).unwrap());
            let g = greedy(&mat, &pts, 10, &q, &Regularizer::none()).unwrap();
            let l = lazy_greedy(&mat, &pts, 10, &q, &Regularizer::none()).unwrap();
            assert_eq!(g.solution, l.solution);
            assert_eq!(g.gains, l.gains);
            assert!(l.evaluations < g.evaluations, "{} vs {}", l.evaluations, g.evaluations);
            assert!(g.gains.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn regularized_greedy_flags_guarantee() {
        let (mat, pts) = abc();
        let reg = Regularizer::proximity_from_positions(
            10.0,
            2.0,
            vec![Point3::new(0.0, 0.0, 0.0), Point3::new(5.0, 0.0, 0.0), Point3::new(0.5, 0.0, 0.0)],
        )
        .unwrap();
        let r = greedy(&mat, &pts, 2, &QualityFunction::Scp, &reg).unwrap();
        assert!(r.guarantee_void);
        assert!(!r.warnings.is_empty());
        // C is close to A and heavily penalized, so B follows A.
        assert_eq!(r.solution.ids, vec![0, 1]);
        assert_eq!(r.value, 3.0);
        let l = lazy_greedy(&mat, &pts, 2, &QualityFunction::Scp, &reg).unwrap();
        assert_eq!(l.solution, r.solution);
        let b = brute_force(&mat, &pts, 2, &QualityFunction::Scp, &reg, 10).unwrap();
        assert_eq!(b.solution.ids, vec![0, 1]);
    }

    #[test]
    fn random_solution_properties() {
        let full = random_solution(5, 5, 9).unwrap();
        let mut ids = full.ids.clone();
        ids.sort();
        assert_eq!(ids, vec![0, 1, 2, 3, 4]);
        assert_eq!(random_solution(50, 7, 3).unwrap(), random_solution(50, 7, 3).unwrap());
        assert!(random_solution(3, 4, 0).is_err());
    }

    #[test]
    fn random_pair_frequencies() {
        let mut freq = std::collections::HashMap::new();
        let draws = 10_000;
        for seed in 0..draws {
            let mut s = random_solution(5, 2, seed).unwrap().ids;
            s.sort();
            *freq.entry(s).or_insert(0usize) += 1;
        }
        assert_eq!(freq.len(), 10);
        for (_, c) in freq {
            let f = c as f64 / draws as f64;
            assert!((f - 0.1).abs() <= 0.01, "{f}");
        }
    }

    #[test]
    fn reports_are_deterministic_and_serialize() {
        let (mat, pts) = random_instance(5, 100, 80, 0.1);
        let q = QualityFunction::threshold(2).unwrap();
        let a = lazy_greedy(&mat, &pts, 5, &q, &Regularizer::none()).unwrap();
        let b = lazy_greedy(&mat, &pts, 5, &q, &Regularizer::none()).unwrap();
        assert!(a.same_result(&b));
        let json = serde_json::to_string(&a).unwrap();
        let back: OptimizerReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }
}
