//! Coverage objectives.
//!
//! A quality function `t` maps a point's view count to a value; the network
//! quality is `G(U) = Σ_e w_e · t(f(e, U))`. Every constructible `t` has
//! `t(0) = 0` and nonnegative, nonincreasing increments, which makes `G`
//! monotone submodular. The optional pairwise regularizer subtracts
//! `α · Σ r(u, u')` over unordered pairs and carries no such guarantee.
//!
//! Increments are stored explicitly rather than derived as differences of `t`,
//! so marginal gains are exactly nonincreasing in floating point as well.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discretize::{rng, CandidateSet, EnvironmentPoints};
use crate::error::{Error, Result};
use crate::visibility::{VisCounts, VisibilityMatrix};
use crate::Point3;

pub const DEFAULT_LEVELS: usize = 6;

/// Nonincreasing, nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QualityWeights(Vec<f64>);

impl TryFrom<Vec<f64>> for QualityWeights {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        QualityWeights::new(v)
    }
}

impl From<QualityWeights> for Vec<f64> {
    fn from(w: QualityWeights) -> Self {
        w.0
    }
}

impl QualityWeights {
    pub fn new(s: Vec<f64>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::invalid("quality weights need at least one level"));
        }
        if s.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::invalid(format!("quality weights must be nonnegative, got {s:?}")));
        }
        if s.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid(format!("quality weights must be nonincreasing, got {s:?}")));
        }
        let sum: f64 = s.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("quality weights must sum to 1, got {sum}")));
        }
        Ok(QualityWeights(s))
    }

    /// `levels` iid uniforms, sorted descending, normalized.
    pub fn sample(rng_seed: u64, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::invalid("levels must be at least 1"));
        }
        let mut r = rng(rng_seed);
        let mut s: Vec<f64> = (0..levels).map(|_| r.gen::<f64>()).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        let sum: f64 = s.iter().sum();
        if !(sum > 0.0) {
            // Only reachable if every draw is exactly zero.
            s = vec![1.0 / levels as f64; levels];
        } else {
            for x in &mut s {
                *x /= sum;
            }
        }
        // Absorb normalization rounding so the sum invariant holds tightly.
        let drift: f64 = 1.0 - s.iter().sum::<f64>();
        s[0] += drift;
        QualityWeights::new(s)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn levels(&self) -> usize {
        self.0.len()
    }
}

pub fn sample_quality_weights(rng_seed: u64, levels: usize) -> Result<QualityWeights> {
    QualityWeights::sample(rng_seed, levels)
}

/// `t(1), t(2), …, t(L)`; `t(0) = 0` is implicit and `t` stays at `t(L)` beyond `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CustomTable {
    values: Vec<f64>,
    increments: Vec<f64>,
}

impl TryFrom<Vec<f64>> for CustomTable {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        CustomTable::new(v)
    }
}

impl From<CustomTable> for Vec<f64> {
    fn from(t: CustomTable) -> Self {
        t.values
    }
}

impl CustomTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("custom quality table needs at least one value"));
        }
        let mut increments = Vec::with_capacity(values.len());
        let mut prev = 0.0;
        for &v in &values {
            if !v.is_finite() {
                return Err(Error::invalid("custom quality table values must be finite"));
            }
            increments.push(v - prev);
            prev = v;
        }
        if increments.iter().any(|&d| d < 0.0) {
            return Err(Error::invalid(format!("custom quality table must be nondecreasing, got {values:?}")));
        }
        if increments.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid(format!(
                "custom quality table increments must be nonincreasing (concave), got {values:?}"
            )));
        }
        Ok(CustomTable { values, increments })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QualityFunction {
    /// Set cover: a point counts once it is seen at all.
    Scp,
    /// `t(c) = s_1 + … + s_min(c, L)`.
    Redundancy {
        weights: QualityWeights,
    },
    /// `t(c) = min(c, cap)`.
    ThresholdCount {
        cap: u32,
    },
    CustomTable {
        table: CustomTable,
    },
}

impl QualityFunction {
    pub fn redundancy(weights: QualityWeights) -> Self {
        QualityFunction::Redundancy { weights }
    }

    pub fn threshold(cap: u32) -> Result<Self> {
        if cap == 0 {
            return Err(Error::invalid("threshold cap must be at least 1"));
        }
        Ok(QualityFunction::ThresholdCount { cap })
    }

    /// Count after which `t` is constant.
    pub fn saturation(&self) -> u32 {
        match self {
            QualityFunction::Scp => 1,
            QualityFunction::Redundancy { weights } => weights.levels() as u32,
            QualityFunction::ThresholdCount { cap } => *cap,
            QualityFunction::CustomTable { table } => table.values.len() as u32,
        }
    }

    /// `t(c + 1) − t(c)`.
    #[inline]
    pub fn increment(&self, count: u32) -> f64 {
        match self {
            QualityFunction::Scp => (count == 0) as u8 as f64,
            QualityFunction::Redundancy { weights } => weights.0.get(count as usize).copied().unwrap_or(0.0),
            QualityFunction::ThresholdCount { cap } => (count < *cap) as u8 as f64,
            QualityFunction::CustomTable { table } => table.increments.get(count as usize).copied().unwrap_or(0.0),
        }
    }

    pub fn t(&self, count: u32) -> f64 {
        match self {
            QualityFunction::Scp => count.min(1) as f64,
            // An empty f64 sum is -0.0; fold from +0.0 so t(0) = 0 exactly.
            QualityFunction::Redundancy { weights } => weights.0.iter().take(count as usize).fold(0.0, |a, b| a + b),
            QualityFunction::ThresholdCount { cap } => count.min(*cap) as f64,
            QualityFunction::CustomTable { table } => {
                if count == 0 {
                    0.0
                } else {
                    table.values[(count as usize).min(table.values.len()) - 1]
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            QualityFunction::Scp => "scp".into(),
            QualityFunction::Redundancy { weights } => format!("redundancy{:?}", weights.as_slice()),
            QualityFunction::ThresholdCount { cap } => format!("threshold_count({cap})"),
            QualityFunction::CustomTable { table } => format!("custom_table{:?}", table.values()),
        }
    }

    /// Tabulated `t` and increments up to saturation, for the inner loops.
    pub fn table(&self) -> QualityTable {
        let sat = self.saturation();
        QualityTable { t: (0..=sat).map(|c| self.t(c)).collect(), inc: (0..sat).map(|c| self.increment(c)).collect() }
    }
}

pub fn t_eval(q: &QualityFunction, count: u32) -> f64 {
    q.t(count)
}

#[derive(Debug, Clone)]
pub struct QualityTable {
    t: Vec<f64>,
    inc: Vec<f64>,
}

impl QualityTable {
    #[inline]
    pub fn t(&self, c: u32) -> f64 {
        let c = c as usize;
        if c < self.t.len() {
            self.t[c]
        } else {
            *self.t.last().unwrap()
        }
    }

    #[inline]
    pub fn increment(&self, c: u32) -> f64 {
        self.inc.get(c as usize).copied().unwrap_or(0.0)
    }
}

/// Pairwise penalty over viewpoints.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Penalty {
    #[default]
    None,
    /// `r(u, u') = max(0, min_separation − ‖p_u − p_u'‖)`.
    Proximity { min_separation: f64, positions: Vec<Point3> },
    /// Explicit symmetric nonnegative `m × m` matrix.
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Regularizer {
    alpha: f64,
    penalty: Penalty,
}

impl Regularizer {
    pub fn none() -> Self {
        Regularizer::default()
    }

    pub fn proximity(alpha: f64, min_separation: f64, candidates: &CandidateSet) -> Result<Self> {
        Self::proximity_from_positions(
            alpha,
            min_separation,
            candidates.viewpoints().iter().map(|v| v.pose.position).collect(),
        )
    }

    pub fn proximity_from_positions(alpha: f64, min_separation: f64, positions: Vec<Point3>) -> Result<Self> {
        check_alpha(alpha)?;
        if !(min_separation >= 0.0) {
            return Err(Error::invalid("min_separation must be nonnegative"));
        }
        Ok(Regularizer { alpha, penalty: Penalty::Proximity { min_separation, positions } })
    }

    pub fn matrix(alpha: f64, r: Vec<Vec<f64>>) -> Result<Self> {
        check_alpha(alpha)?;
        let m = r.len();
        for (i, row) in r.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Dimension(format!("penalty row {i} has {} entries, expected {m}", row.len())));
            }
            for (j, &x) in row.iter().enumerate() {
                if !(x >= 0.0) || x != r[j][i] {
                    return Err(Error::invalid(format!(
                        "penalty matrix must be symmetric and nonnegative at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Regularizer { alpha, penalty: Penalty::Matrix(r) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn penalty(&self) -> &Penalty {
        &self.penalty
    }

    /// Whether the regularized objective is still plain `G` (and so monotone submodular).
    pub fn is_inactive(&self) -> bool {
        self.alpha == 0.0 || matches!(self.penalty, Penalty::None)
    }

    pub fn r(&self, u: usize, v: usize) -> f64 {
        match &self.penalty {
            Penalty::None => 0.0,
            Penalty::Proximity { min_separation, positions } => {
                let d = (positions[u] - positions[v]).norm();
                (min_separation - d).max(0.0)
            }
            Penalty::Matrix(r) => r[u][v],
        }
    }

    /// `α Σ r(u, u')` over unordered pairs of `ids`.
    pub fn total(&self, ids: &[usize]) -> f64 {
        if self.is_inactive() {
            return 0.0;
        }
        let mut s = 0.0;
        for (i, &u) in ids.iter().enumerate() {
            for &v in &ids[i + 1..] {
                s += self.r(u, v);
            }
        }
        self.alpha * s
    }

    /// Penalty added by inserting `v` into `ids`.
    pub fn added(&self, ids: &[usize], v: usize) -> f64 {
        if self.is_inactive() {
            return 0.0;
        }
        self.alpha * ids.iter().map(|&u| self.r(u, v)).sum::<f64>()
    }

    pub(crate) fn check_size(&self, m: usize) -> Result<()> {
        let len = match &self.penalty {
            Penalty::None => return Ok(()),
            Penalty::Proximity { positions, .. } => positions.len(),
            Penalty::Matrix(r) => r.len(),
        };
        if len != m {
            return Err(Error::Dimension(format!("regularizer covers {len} viewpoints, matrix has {m}")));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be nonnegative, got {alpha}")));
    }
    Ok(())
}

/// Selected camera ids in selection order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Solution {
    pub ids: Vec<usize>,
    pub k: usize,
}

impl Solution {
    pub fn new(ids: Vec<usize>, k: usize) -> Result<Self> {
        if ids.len() > k {
            return Err(Error::invalid(format!("{} ids exceed k = {k}", ids.len())));
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("solution ids must be distinct"));
        }
        Ok(Solution { ids, k })
    }

    pub fn from_ids(ids: Vec<usize>) -> Result<Self> {
        let k = ids.len();
        Self::new(ids, k)
    }

    pub fn empty() -> Self {
        Solution::default()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

fn check_points(matrix: &VisibilityMatrix, points: &EnvironmentPoints) -> Result<()> {
    if matrix.n_points() != points.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but there are {} points",
            matrix.n_points(),
            points.len()
        )));
    }
    Ok(())
}

/// `Σ_e w_e · t(counts[e])`.
pub fn quality_of_counts(counts: &VisCounts, points: &EnvironmentPoints, q: &QualityTable) -> f64 {
    counts.as_slice().iter().zip(points.weights()).fold(0.0, |acc, (&c, &w)| acc + w * q.t(c))
}

/// `G(U)`.
pub fn g_eval(
    matrix: &VisibilityMatrix,
    points: &EnvironmentPoints,
    solution: &[usize],
    q: &QualityFunction,
) -> Result<f64> {
    check_points(matrix, points)?;
    let counts = matrix.f_counts(solution)?;
    Ok(quality_of_counts(&counts, points, &q.table()))
}

/// Caller-owned incremental state: counts for the current set and its value.
#[derive(Debug, Clone)]
pub struct GainCache<'a> {
    matrix: &'a VisibilityMatrix,
    points: &'a EnvironmentPoints,
    table: QualityTable,
    counts: VisCounts,
    selected: Vec<usize>,
    member: Vec<bool>,
    value: f64,
}

impl<'a> GainCache<'a> {
    pub fn new(matrix: &'a VisibilityMatrix, points: &'a EnvironmentPoints, q: &QualityFunction) -> Result<Self> {
        check_points(matrix, points)?;
        Ok(GainCache {
            matrix,
            points,
            table: q.table(),
            counts: VisCounts::zeros(matrix.n_points()),
            selected: Vec::new(),
            member: vec![false; matrix.m_cameras()],
            value: 0.0,
        })
    }

    pub fn with_solution(
        matrix: &'a VisibilityMatrix,
        points: &'a EnvironmentPoints,
        q: &QualityFunction,
        ids: &[usize],
    ) -> Result<Self> {
        matrix.check_ids(ids)?;
        let mut cache = Self::new(matrix, points, q)?;
        for &v in ids {
            cache.insert(v)?;
        }
        Ok(cache)
    }

    /// `G(U ∪ {v}) − G(U)` from the cached counts.
    #[inline]
    pub fn gain(&self, v: usize) -> f64 {
        let weights = self.points.weights();
        let counts = self.counts.as_slice();
        let mut g = 0.0;
        for e in self.matrix.column(v).iter_ones() {
            g += weights[e] * self.table.increment(counts[e]);
        }
        g
    }

    pub fn checked_gain(&self, v: usize) -> Result<f64> {
        if v >= self.member.len() {
            return Err(Error::IdOutOfRange { id: v, m: self.member.len() });
        }
        if self.member[v] {
            return Err(Error::AlreadySelected(v));
        }
        Ok(self.gain(v))
    }

    pub fn insert(&mut self, v: usize) -> Result<f64> {
        let g = self.checked_gain(v)?;
        self.counts.add_column(self.matrix.column(v));
        self.member[v] = true;
        self.selected.push(v);
        self.value += g;
        Ok(g)
    }

    pub fn contains(&self, v: usize) -> bool {
        self.member.get(v).copied().unwrap_or(false)
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn counts(&self) -> &VisCounts {
        &self.counts
    }

    /// Running sum of gains; equals `G` of the selection up to summation order.
    pub fn value(&self) -> f64 {
        self.value
    }
}

pub fn marginal_gain(
    matrix: &VisibilityMatrix,
    points: &EnvironmentPoints,
    solution: &[usize],
    v: usize,
    q: &QualityFunction,
) -> Result<f64> {
    GainCache::with_solution(matrix, points, q, solution)?.checked_gain(v)
}

/// `G(U) − α Σ r(u, u')`.
pub fn regularized_objective(
    matrix: &VisibilityMatrix,
    points: &EnvironmentPoints,
    solution: &[usize],
    q: &QualityFunction,
    reg: &Regularizer,
) -> Result<f64> {
    reg.check_size(matrix.m_cameras())?;
    Ok(g_eval(matrix, points, solution, q)? - reg.total(solution))
}

/// Weighted fraction of points seen by at least one camera of `solution`.
pub fn coverage(matrix: &VisibilityMatrix, points: &EnvironmentPoints, solution: &[usize]) -> Result<f64> {
    check_points(matrix, points)?;
    let counts = matrix.f_counts(solution)?;
    Ok(covered_fraction(&counts, points))
}

pub fn covered_fraction(counts: &VisCounts, points: &EnvironmentPoints) -> f64 {
    let total = points.total_weight();
    if total == 0.0 {
        return 0.0;
    }
    let covered: f64 = counts.as_slice().iter().zip(points.weights()).filter(|(&c, _)| c > 0).map(|(_, &w)| w).sum();
    covered / total
}
