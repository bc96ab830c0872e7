//! P-models: explicit matrices `P₁..P_m` (each `t × n`) such that row `i` of
//! a structured matrix is `gᵀ P_i` for one Gaussian budget `g`, together with
//! the structural constants that control how well `g` is recycled.
//!
//! Rows and columns are 0-indexed throughout.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::features::{sample_dense_generators, sample_sparse_generators, stream_rng, support_size, Family};
use crate::structured::DenseMatrix;

/// Largest `n` and `m` accepted by the brute-force diagnostics.
pub const DIAGNOSTIC_LIMIT: usize = 128;
/// Magnitude below which an inner product counts as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;
/// Monte-Carlo resamples used for uni-coherence of random models.
pub const UNI_COHERENCE_RESAMPLES: usize = 1000;
/// Largest graph handled by [`exact_chromatic_number`].
pub const EXACT_COLORING_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    Circulant,
    Toeplitz,
    Hankel,
    Fastfood,
    ToeplitzLikeSparse,
    ToeplitzLikeDense,
}

impl FamilyTag {
    /// Whether the matrices `P_i` themselves are random.
    pub fn is_random(self) -> bool {
        matches!(
            self,
            FamilyTag::Fastfood | FamilyTag::ToeplitzLikeSparse | FamilyTag::ToeplitzLikeDense
        )
    }

    pub fn family(self) -> Family {
        match self {
            FamilyTag::Circulant => Family::Circulant,
            FamilyTag::Toeplitz => Family::Toeplitz,
            FamilyTag::Hankel => Family::Hankel,
            FamilyTag::Fastfood => Family::Fastfood,
            FamilyTag::ToeplitzLikeSparse => Family::ToeplitzLikeSparse,
            FamilyTag::ToeplitzLikeDense => Family::ToeplitzLikeDense,
        }
    }
}

impl TryFrom<Family> for FamilyTag {
    type Error = Error;

    fn try_from(f: Family) -> Result<Self> {
        Ok(match f {
            Family::Circulant => FamilyTag::Circulant,
            Family::Toeplitz => FamilyTag::Toeplitz,
            Family::Hankel => FamilyTag::Hankel,
            Family::Fastfood => FamilyTag::Fastfood,
            Family::ToeplitzLikeSparse => FamilyTag::ToeplitzLikeSparse,
            Family::ToeplitzLikeDense => FamilyTag::ToeplitzLikeDense,
            Family::Dense => return Err(Error::invalid("dense Gaussian matrices have no P-model")),
        })
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family().name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PModelParams {
    pub r: usize,
    pub alpha: usize,
}

impl Default for PModelParams {
    fn default() -> Self {
        Self { r: 1, alpha: 1 }
    }
}

/// Nonzeros of one column as `(row, value)`, sorted by row.
pub type SparseColumn = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct PModel {
    t: usize,
    n: usize,
    m: usize,
    family: FamilyTag,
    params: PModelParams,
    seed: u64,
    /// `matrices[i][c]` is column `c` of `P_i`.
    matrices: Vec<Vec<SparseColumn>>,
    generators: Option<Vec<Vec<f64>>>,
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::Empty);
    }
    if m > n {
        return Err(Error::invalid(format!("m={m} exceeds n={n}")));
    }
    for (what, value) in [("n", n), ("m", m)] {
        if value > DIAGNOSTIC_LIMIT {
            return Err(Error::SizeGuard {
                what,
                value,
                limit: DIAGNOSTIC_LIMIT,
            });
        }
    }
    Ok(())
}

fn unit(row: usize) -> SparseColumn {
    vec![(row, 1.0)]
}

fn hadamard_entry(i: usize, c: usize) -> f64 {
    if (i & c).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn toeplitz_like_columns(h: &[Vec<f64>], n: usize, i: usize) -> Vec<SparseColumn> {
    (0..n)
        .map(|c| {
            let mut col = Vec::new();
            for (b, hb) in h.iter().enumerate() {
                for (q, &v) in hb.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    // scirc[h][a, c] = ±h[(a - c) mod n]
                    let a = (q + c) % n;
                    let p = (i + n - a) % n;
                    let s = if a < c { -v } else { v };
                    col.push((b * n + p, s));
                }
            }
            col.sort_by_key(|e| e.0);
            col
        })
        .collect()
}

impl PModel {
    /// Builds the P-model of `family` with `m` rows. Random families draw
    /// their skew-circulant generators from `seed`.
    pub fn build(family: FamilyTag, n: usize, m: usize, params: PModelParams, seed: u64) -> Result<Self> {
        check_sizes(n, m)?;
        let mut rng = stream_rng(seed, 0, 0);
        let generators = match family {
            FamilyTag::ToeplitzLikeSparse => Some(sample_sparse_generators(n, params.r, params.alpha, &mut rng)?),
            FamilyTag::ToeplitzLikeDense => Some(sample_dense_generators(n, params.r, &mut rng)?),
            _ => None,
        };
        let mut model = Self::assemble(family, n, m, params, generators)?;
        model.seed = seed;
        Ok(model)
    }

    /// Toeplitz-like model for the given skew-circulant generators.
    pub fn toeplitz_like(n: usize, m: usize, h: Vec<Vec<f64>>, sparse: bool) -> Result<Self> {
        check_sizes(n, m)?;
        if h.is_empty() || h.len() > n {
            return Err(Error::invalid(format!("rank {} must be in 1..={n}", h.len())));
        }
        for v in &h {
            check_len(n, v.len())?;
        }
        let family = if sparse {
            FamilyTag::ToeplitzLikeSparse
        } else {
            FamilyTag::ToeplitzLikeDense
        };
        let alpha = h.iter().map(|v| v.iter().filter(|x| **x != 0.0).count()).max().unwrap_or(0);
        let params = PModelParams { r: h.len(), alpha };
        Self::assemble(family, n, m, params, Some(h))
    }

    fn assemble(
        family: FamilyTag,
        n: usize,
        m: usize,
        params: PModelParams,
        generators: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let (t, matrices): (usize, Vec<Vec<SparseColumn>>) = match family {
            FamilyTag::Circulant => (n, (0..m).map(|i| (0..n).map(|c| unit((i + n - c) % n)).collect()).collect()),
            FamilyTag::Toeplitz => (
                2 * n - 1,
                (0..m).map(|i| (0..n).map(|c| unit(n - 1 + i - c)).collect()).collect(),
            ),
            FamilyTag::Hankel => (2 * n - 1, (0..m).map(|i| (0..n).map(|c| unit(i + c)).collect()).collect()),
            FamilyTag::Fastfood => {
                if !n.is_power_of_two() {
                    return Err(Error::NotPowerOfTwo(n));
                }
                (
                    n,
                    (0..m)
                        .map(|i| (0..n).map(|c| vec![(c, hadamard_entry(i, c))]).collect())
                        .collect(),
                )
            }
            FamilyTag::ToeplitzLikeSparse | FamilyTag::ToeplitzLikeDense => {
                let h = generators.as_ref().ok_or_else(|| Error::invalid("missing generators"))?;
                (n * h.len(), (0..m).map(|i| toeplitz_like_columns(h, n, i)).collect())
            }
        };
        Ok(Self {
            t,
            n,
            m,
            family,
            params,
            seed: 0,
            matrices,
            generators,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn family(&self) -> FamilyTag {
        self.family
    }

    pub fn params(&self) -> PModelParams {
        self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Skew-circulant generators of a Toeplitz-like model.
    pub fn generators(&self) -> Option<&[Vec<f64>]> {
        self.generators.as_deref()
    }

    /// Number of coordinates used by at least one generator.
    pub fn kappa(&self) -> Option<usize> {
        self.generators.as_deref().map(support_size)
    }

    pub fn column(&self, i: usize, c: usize) -> &SparseColumn {
        &self.matrices[i][c]
    }

    /// `P_i` as a dense `t × n` matrix.
    pub fn dense(&self, i: usize) -> Result<DenseMatrix> {
        if i >= self.m {
            return Err(Error::IndexOutOfRange(format!("row {i} of {}", self.m)));
        }
        let mut p = DenseMatrix::zeros(self.t, self.n);
        for (c, col) in self.matrices[i].iter().enumerate() {
            for &(k, v) in col {
                p[(k, c)] = v;
            }
        }
        Ok(p)
    }

    /// `S[P]`: the `m × n` matrix with rows `gᵀ P_i`.
    pub fn apply(&self, g: &[f64]) -> Result<DenseMatrix> {
        check_len(self.t, g.len())?;
        Ok(DenseMatrix::from_fn(self.m, self.n, |i, c| {
            self.matrices[i][c].iter().map(|&(k, v)| g[k] * v).sum()
        }))
    }

    fn rows_of(&self, j: usize) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.t];
        for (c, col) in self.matrices[j].iter().enumerate() {
            for &(k, v) in col {
                rows[k].push((c, v));
            }
        }
        rows
    }

    /// Cross-correlations `C[n₁·n + n₂] = P_{i,n₁}ᵀ P_{j,n₂}`.
    fn correlations(&self, i: usize, rows_j: &[Vec<(usize, f64)>]) -> Vec<f64> {
        let n = self.n;
        let mut c = vec![0.0; n * n];
        for (n1, col) in self.matrices[i].iter().enumerate() {
            for &(k, v) in col {
                for &(n2, w) in &rows_j[k] {
                    c[n1 * n + n2] += v * w;
                }
            }
        }
        c
    }

    fn pair_stats(&self, i: usize, j: usize, rows_j: &[Vec<(usize, f64)>]) -> PairStats {
        let n = self.n;
        let c = self.correlations(i, rows_j);
        let mut cross_sq = 0.0;
        let mut vertices = Vec::new();
        for n1 in 0..n {
            for n2 in n1 + 1..n {
                let a = c[n1 * n + n2];
                cross_sq += a * a;
                if a.abs() > ZERO_THRESHOLD || c[n2 * n + n1].abs() > ZERO_THRESHOLD {
                    vertices.push((n1, n2));
                }
            }
        }
        let diag = (0..n).map(|d| c[d * n + d]);
        PairStats {
            i,
            j,
            mu: (cross_sq / n as f64).sqrt(),
            same_abs: diag.map(f64::abs).sum(),
            graph: CoherenceGraph::from_vertices(vertices),
        }
    }

    fn all_pairs(&self) -> Vec<PairStats> {
        let rows: Vec<_> = (0..self.m).map(|j| self.rows_of(j)).collect();
        let pairs: Vec<_> = (0..self.m).flat_map(|i| (i..self.m).map(move |j| (i, j))).collect();
        pairs
            .into_par_iter()
            .map(|(i, j)| self.pair_stats(i, j, &rows[j]))
            .collect()
    }
}

/// Free-function form of [`PModel::build`] taking the feature family.
pub fn build_pmodel(family: Family, n: usize, m: usize, params: PModelParams, seed: u64) -> Result<PModel> {
    PModel::build(FamilyTag::try_from(family)?, n, m, params, seed)
}

pub fn apply_pmodel(model: &PModel, g: &[f64]) -> Result<DenseMatrix> {
    model.apply(g)
}

#[derive(Debug, Clone)]
struct PairStats {
    i: usize,
    j: usize,
    mu: f64,
    same_abs: f64,
    graph: CoherenceGraph,
}

/// Coherence split by whether the row pair is a self-pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    /// `μ[P]`, the maximum over all `i ≤ j`.
    pub mu: f64,
    /// Maximum over `i = j` only.
    pub mu_self: f64,
    /// Maximum over `i < j` only (0 when `m = 1`).
    pub mu_cross: f64,
}

fn coherence_from(stats: &[PairStats]) -> CoherenceReport {
    let max = |f: &dyn Fn(&PairStats) -> bool| stats.iter().filter(|s| f(s)).map(|s| s.mu).fold(0.0, f64::max);
    CoherenceReport {
        mu: max(&|_| true),
        mu_self: max(&|s| s.i == s.j),
        mu_cross: max(&|s| s.i < s.j),
    }
}

pub fn coherence_report(model: &PModel) -> CoherenceReport {
    coherence_from(&model.all_pairs())
}

/// `μ[P] = max_{i≤j} √(Σ_{n₁<n₂} (P_{i,n₁}ᵀ P_{j,n₂})² / n)`.
pub fn coherence(model: &PModel) -> f64 {
    coherence_report(model).mu
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniCoherence {
    pub value: f64,
    /// Standard error of the Monte-Carlo mean at the maximizing pair.
    pub stderr: Option<f64>,
    pub resamples: usize,
}

fn deterministic_uni(stats: &[PairStats]) -> f64 {
    stats.iter().filter(|s| s.i < s.j).map(|s| s.same_abs).fold(0.0, f64::max)
}

/// `max_{i<j} E|Σ_{n₁} P_{i,n₁}ᵀ P_{j,n₁}|` over `resamples` independent
/// draws of the model's random structure.
pub fn uni_coherence_monte_carlo(model: &PModel, resamples: usize) -> Result<UniCoherence> {
    if !model.family.is_random() {
        return Err(Error::Deterministic("uni-coherence expectation"));
    }
    let m = model.m;
    if m < 2 || resamples == 0 {
        return Ok(UniCoherence {
            value: 0.0,
            stderr: Some(0.0),
            resamples,
        });
    }
    let npairs = m * (m - 1) / 2;
    let (sum, sum_sq) = (0..resamples)
        .into_par_iter()
        .map(|s| -> Result<(Vec<f64>, Vec<f64>)> {
            let draw = PModel::build(model.family, model.n, m, model.params, model.seed.wrapping_add(1 + s as u64))?;
            let mut vals = Vec::with_capacity(npairs);
            for i in 0..m {
                for j in i + 1..m {
                    let v: f64 = (0..model.n)
                        .map(|c| sparse_dot(&draw.matrices[i][c], &draw.matrices[j][c]))
                        .sum();
                    vals.push(v.abs());
                }
            }
            let sq = vals.iter().map(|v| v * v).collect();
            Ok((vals, sq))
        })
        .try_reduce(
            || (vec![0.0; npairs], vec![0.0; npairs]),
            |mut a, b| {
                for (x, y) in a.0.iter_mut().zip(&b.0) {
                    *x += y;
                }
                for (x, y) in a.1.iter_mut().zip(&b.1) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    let r = resamples as f64;
    let (best, mean) = sum
        .iter()
        .map(|s| s / r)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    let var = if resamples > 1 {
        ((sum_sq[best] / r - mean * mean) * r / (r - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(UniCoherence {
        value: mean,
        stderr: Some((var / r).sqrt()),
        resamples,
    })
}

/// Uni-coherence `μ̃[P]`: exact for deterministic families, a Monte-Carlo
/// estimate of the expectation form for random ones.
pub fn uni_coherence(model: &PModel) -> Result<UniCoherence> {
    if model.family.is_random() {
        uni_coherence_monte_carlo(model, UNI_COHERENCE_RESAMPLES)
    } else if model.m < 2 {
        Ok(UniCoherence {
            value: 0.0,
            stderr: None,
            resamples: 0,
        })
    } else {
        let rows: Vec<_> = (0..model.m).map(|j| model.rows_of(j)).collect();
        let value = (0..model.m)
            .into_par_iter()
            .flat_map_iter(|i| (i + 1..model.m).map(move |j| (i, j)))
            .map(|(i, j)| model.pair_stats(i, j, &rows[j]).same_abs)
            .reduce(|| 0.0, f64::max);
        Ok(UniCoherence {
            value,
            stderr: None,
            resamples: 0,
        })
    }
}

fn sparse_dot(a: &SparseColumn, b: &SparseColumn) -> f64 {
    let (mut x, mut y, mut acc) = (0, 0, 0.0);
    while x < a.len() && y < b.len() {
        match a[x].0.cmp(&b[y].0) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                acc += a[x].1 * b[y].1;
                x += 1;
                y += 1;
            }
        }
    }
    acc
}

/// Graph on unordered column pairs `{n₁, n₂}` with nonzero cross-correlation;
/// two pairs are adjacent when they share an index.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoherenceGraph {
    /// Vertices `(n₁, n₂)` with `n₁ < n₂`, in lexicographic order.
    pub vertices: Vec<(usize, usize)>,
    /// Neighbor lists by vertex index, each sorted.
    pub adjacency: Vec<Vec<usize>>,
}

impl CoherenceGraph {
    pub fn from_vertices(mut vertices: Vec<(usize, usize)>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        let top = vertices.iter().map(|v| v.1 + 1).max().unwrap_or(0);
        let mut by_index = vec![Vec::new(); top];
        for (id, &(a, b)) in vertices.iter().enumerate() {
            by_index[a].push(id);
            by_index[b].push(id);
        }
        let mut adjacency = vec![BTreeSet::new(); vertices.len()];
        for group in &by_index {
            for (x, &u) in group.iter().enumerate() {
                for &v in &group[x + 1..] {
                    adjacency[u].insert(v);
                    adjacency[v].insert(u);
                }
            }
        }
        Self {
            vertices,
            adjacency: adjacency.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest number of vertices sharing one column index. Those vertices
    /// form a clique, so this is a lower bound on the chromatic number.
    pub fn max_index_degree(&self) -> usize {
        let mut count = std::collections::HashMap::new();
        for &(a, b) in &self.vertices {
            *count.entry(a).or_insert(0) += 1;
            *count.entry(b).or_insert(0) += 1;
        }
        count.into_values().max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Colors used by greedy coloring in vertex order.
    pub fn greedy_colors(&self) -> usize {
        let mut color = vec![usize::MAX; self.len()];
        let mut used = 0;
        for v in 0..self.len() {
            let taken: BTreeSet<_> = self.adjacency[v].iter().map(|&u| color[u]).collect();
            let c = (0..).find(|c| !taken.contains(c)).unwrap_or(0);
            color[v] = c;
            used = used.max(c + 1);
        }
        used
    }

    pub fn is_bipartite(&self) -> bool {
        let mut side = vec![None; self.len()];
        for start in 0..self.len() {
            if side[start].is_some() {
                continue;
            }
            side[start] = Some(false);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                let s = side[v].unwrap_or(false);
                for &u in &self.adjacency[v] {
                    match side[u] {
                        None => {
                            side[u] = Some(!s);
                            stack.push(u);
                        }
                        Some(t) if t == s => return false,
                        _ => {}
                    }
                }
            }
        }
        true
    }

    /// Sizes of the connected components.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut k = 0;
            while k < comp.len() {
                for &u in &self.adjacency[comp[k]] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
                k += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Coherence graph `𝒢_{i,j}`.
pub fn coherence_graph(model: &PModel, i: usize, j: usize) -> Result<CoherenceGraph> {
    for idx in [i, j] {
        if idx >= model.m {
            return Err(Error::IndexOutOfRange(format!("row {idx} of {}", model.m)));
        }
    }
    let rows = model.rows_of(j);
    Ok(model.pair_stats(i, j, &rows).graph)
}

/// Upper bound on the chromatic number: the smallest of the greedy color
/// count, `d_max + 1` and Vizing's `Δ + 1` (a coherence graph is the line
/// graph of the graph whose edges are its vertices), tightened to 2 for
/// bipartite graphs with edges.
pub fn chromatic_bound(graph: &CoherenceGraph) -> usize {
    if graph.is_empty() {
        return 0;
    }
    let mut bound = graph
        .greedy_colors()
        .min(graph.max_degree() + 1)
        .min(graph.max_index_degree() + 1);
    if graph.edge_count() > 0 && graph.is_bipartite() {
        bound = bound.min(2);
    }
    bound
}

/// Exact chromatic number by backtracking, for graphs of at most
/// [`EXACT_COLORING_LIMIT`] vertices.
pub fn exact_chromatic_number(graph: &CoherenceGraph) -> Option<usize> {
    let n = graph.len();
    if n > EXACT_COLORING_LIMIT {
        return None;
    }
    if n == 0 {
        return Some(0);
    }
    fn colorable(g: &CoherenceGraph, k: usize, v: usize, colors: &mut [usize]) -> bool {
        if v == colors.len() {
            return true;
        }
        for c in 0..k {
            if g.adjacency[v].iter().all(|&u| u >= v || colors[u] != c) {
                colors[v] = c;
                if colorable(g, k, v + 1, colors) {
                    return true;
                }
            }
        }
        false
    }
    let mut colors = vec![0; n];
    (1..=n).find(|&k| colorable(graph, k, 0, &mut colors))
}

/// Largest chromatic bound over all coherence graphs, `χ[P]`.
pub fn chromatic_bound_model(model: &PModel) -> usize {
    model.all_pairs().iter().map(|s| chromatic_bound(&s.graph)).max().unwrap_or(0)
}

/// Largest clique lower bound over all coherence graphs.
pub fn chromatic_lower_bound_model(model: &PModel) -> usize {
    model.all_pairs().iter().map(|s| s.graph.max_index_degree()).max().unwrap_or(0)
}

/// `χ(i, j)` bounds for every `i ≤ j`.
pub fn chromatic_table(model: &PModel) -> Vec<ChiEntry> {
    model
        .all_pairs()
        .iter()
        .map(|s| ChiEntry {
            i: s.i,
            j: s.j,
            chi: chromatic_bound(&s.graph),
        })
        .collect()
}

// Largest |S ∩ (S + s)| over α-subsets S of Z_n and shifts 0 < s < m.
fn max_cyclic_overlap(n: usize, alpha: usize, m: usize) -> Option<usize> {
    const ENUMERATION_LIMIT: f64 = 2e5;
    let count = (0..alpha).fold(1.0, |acc, k| acc * (n - k) as f64 / (k + 1) as f64);
    if count > ENUMERATION_LIMIT || n > 64 {
        return None;
    }
    let shifts: Vec<usize> = (1..m.min(n)).collect();
    if shifts.is_empty() {
        return Some(0);
    }
    let mut best = 0;
    let mut subset: Vec<usize> = (0..alpha).collect();
    loop {
        let mask: u64 = subset.iter().fold(0, |m, &k| m | 1 << k);
        for &s in &shifts {
            let rotated = subset.iter().fold(0u64, |m, &k| m | 1 << ((k + s) % n));
            best = best.max((mask & rotated).count_ones() as usize);
        }
        // next combination in lexicographic order
        let mut k = alpha;
        while k > 0 && subset[k - 1] == n - alpha + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        subset[k - 1] += 1;
        for x in k..alpha {
            subset[x] = subset[x - 1] + 1;
        }
    }
    Some(best)
}

/// `η[P]`: the largest value `(P_{i,n₁}ᵀ P_{j,n₁})²` can take for `i < j`.
pub fn eta(model: &PModel) -> Result<f64> {
    match model.family {
        FamilyTag::Fastfood | FamilyTag::ToeplitzLikeDense => Ok(1.0),
        FamilyTag::ToeplitzLikeSparse => {
            let PModelParams { alpha, .. } = model.params;
            if model.m < 2 || alpha == 0 {
                return Ok(0.0);
            }
            Ok(match max_cyclic_overlap(model.n, alpha, model.m) {
                Some(o) => (o as f64 / alpha as f64).powi(2),
                None => 1.0,
            })
        }
        _ => Err(Error::Deterministic("eta")),
    }
}

/// Structural constants of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub family: FamilyTag,
    pub n: usize,
    pub m: usize,
    pub mu: f64,
    pub mu_self: f64,
    pub mu_cross: f64,
    pub mu_tilde: f64,
    pub mu_tilde_stderr: Option<f64>,
    pub chi_bound: usize,
    pub chi_lower: usize,
    pub max_degree: usize,
    pub eta: Option<f64>,
    pub kappa: Option<usize>,
    pub r: usize,
    pub alpha: usize,
    pub seed: u64,
}

pub fn diagnose(model: &PModel) -> Result<DiagnosticsReport> {
    let stats = model.all_pairs();
    let coh = coherence_from(&stats);
    let uni = if model.family.is_random() {
        uni_coherence(model)?
    } else {
        UniCoherence {
            value: deterministic_uni(&stats),
            stderr: None,
            resamples: 0,
        }
    };
    let chi_bound = stats.iter().map(|s| chromatic_bound(&s.graph)).max().unwrap_or(0);
    let chi_lower = stats.iter().map(|s| s.graph.max_index_degree()).max().unwrap_or(0);
    let max_degree = stats.iter().map(|s| s.graph.max_degree()).max().unwrap_or(0);
    Ok(DiagnosticsReport {
        family: model.family,
        n: model.n,
        m: model.m,
        mu: coh.mu,
        mu_self: coh.mu_self,
        mu_cross: coh.mu_cross,
        mu_tilde: uni.value,
        mu_tilde_stderr: uni.stderr,
        chi_bound,
        chi_lower,
        max_degree,
        eta: model.family.is_random().then(|| eta(model)).transpose()?,
        kappa: model.kappa(),
        r: model.params.r,
        alpha: model.params.alpha,
        seed: model.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChiEntry {
    pub i: usize,
    pub j: usize,
    pub chi: usize,
}

/// Inputs to the deviation bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs {
    pub n: usize,
    pub m: usize,
    /// Moment order.
    pub d: usize,
    pub t: f64,
    pub eps: f64,
    pub mu: f64,
    /// `χ(i, j)` for `i ≤ j`; missing pairs count as 0.
    pub chi: Vec<ChiEntry>,
    /// `η[P]` for random models.
    pub eta: Option<f64>,
    /// Number of features, for the variance gap.
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p_gen: f64,
    pub p_struct: f64,
    pub p_wrong: Option<f64>,
    /// `p_gen + p_struct + ε`.
    pub delta: f64,
    /// `(m − 1)/(2k) · Δ`.
    pub variance_gap: Option<f64>,
}

/// `4d/√(2πT)·e^{−T/2} + 4n·e^{−ln²n/8}`.
pub fn p_gen(n: usize, d: usize, t: f64) -> f64 {
    let ln = (n as f64).ln();
    4.0 * d as f64 / (2.0 * std::f64::consts::PI * t).sqrt() * (-t / 2.0).exp() + 4.0 * n as f64 * (-ln * ln / 8.0).exp()
}

/// Structural failure probability; zero when `μ·χ = 0`.
pub fn p_struct(n: usize, t: f64, eps: f64, mu: f64, chi: &[ChiEntry]) -> f64 {
    let chi_max = chi.iter().map(|c| c.chi).max().unwrap_or(0) as f64;
    let scale = 8.0 * mu * mu * chi_max * chi_max;
    if scale == 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    let ln = nf.ln();
    let self_term = (-nf / (scale * ln.powi(6))).exp();
    let cross_term = (-eps * eps * nf.sqrt() / (scale * t * ln.powi(4))).exp();
    let self_sum: f64 = chi.iter().filter(|c| c.i == c.j).map(|c| c.chi as f64).sum();
    let all_sum: f64 = chi.iter().map(|c| c.chi as f64).sum();
    4.0 * self_sum * self_term + 2.0 * all_sum * cross_term
}

/// `2·Σ_{i<j} e^{−n/(8 ln⁶n · η)}`.
pub fn p_wrong(n: usize, m: usize, eta: f64) -> f64 {
    if eta <= 0.0 || m < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let pairs = (m * (m - 1) / 2) as f64;
    2.0 * pairs * (-nf / (8.0 * nf.ln().powi(6) * eta)).exp()
}

pub fn evaluate_bounds(inputs: &BoundInputs) -> Result<BoundReport> {
    let BoundInputs {
        n,
        m,
        d,
        t,
        eps,
        mu,
        ref chi,
        eta,
        k,
    } = *inputs;
    if n < 2 {
        return Err(Error::invalid(format!("bounds need n >= 2, got {n}")));
    }
    if !(t > 0.0) {
        return Err(Error::invalid(format!("T must be positive, got {t}")));
    }
    if !(eps > 0.0) || mu < 0.0 || m == 0 {
        return Err(Error::invalid("eps must be positive, mu nonnegative and m positive"));
    }
    if eta.is_some_and(|e| e < 0.0) || k == Some(0) {
        return Err(Error::invalid("eta must be nonnegative and k positive"));
    }
    let pg = p_gen(n, d, t);
    let ps = p_struct(n, t, eps, mu, chi);
    let delta = pg + ps + eps;
    Ok(BoundReport {
        p_gen: pg,
        p_struct: ps,
        p_wrong: eta.map(|e| p_wrong(n, m, e)),
        delta,
        variance_gap: k.map(|k| (m as f64 - 1.0) / (2.0 * k as f64) * delta),
    })
}

/// Structural guarantees for sparse Toeplitz-like models with support `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseLdrGuarantee {
    pub chi_bound: usize,
    pub mu_bound: f64,
    /// Whether `r ≥ 3·ln⁵ n`.
    pub rank_condition: bool,
}

pub fn sparse_ldr_guarantee(kappa: usize, r: usize, n: usize) -> SparseLdrGuarantee {
    SparseLdrGuarantee {
        chi_bound: kappa * kappa + 1,
        mu_bound: kappa as f64,
        rank_condition: r as f64 >= 3.0 * (n as f64).ln().powi(5),
    }
}

/// Tail bound `4n²·e^{−τ²αr/(Cκ²)}` on `P[μ > τ]`, with the unspecified
/// constant `C` supplied by the caller.
pub fn coherence_tail_bound(n: usize, tau: f64, alpha: usize, r: usize, kappa: usize, c: f64) -> f64 {
    let nf = n as f64;
    4.0 * nf * nf * (-tau * tau * (alpha * r) as f64 / (c * (kappa * kappa) as f64)).exp()
}

/// Draws a fresh generator set for a Toeplitz-like model; handy for
/// sampling `μ` across realizations.
pub fn resample<R: Rng + ?Sized>(model: &PModel, rng: &mut R) -> Result<PModel> {
    let h = match model.family {
        FamilyTag::ToeplitzLikeSparse => sample_sparse_generators(model.n, model.params.r, model.params.alpha, rng)?,
        FamilyTag::ToeplitzLikeDense => sample_dense_generators(model.n, model.params.r, rng)?,
        _ => return Ok(model.clone()),
    };
    let mut out = PModel::assemble(model.family, model.n, model.m, model.params, Some(h))?;
    out.seed = model.seed;
    Ok(out)
}
