//! Phase-shift pilots and pilot allocation.
//!
//! All pilots share one unit-modulus base sequence; pilot `s` additionally
//! carries the linear phase ramp `exp(−j2π φ_s r/N_pe)`, which shifts its
//! footprint by `φ_s` taps on the extended delay grid. Allocation assigns UTs
//! to pilots so that co-pilot UTs have nearly orthogonal steering vectors.

use rand::Rng;

use crate::channel::DelayGrid;
use crate::dsp::{dot_h, C64};
use crate::error::{Error, Result};

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Zadoff-Chu sequence of length `np`: `exp(−jπ·u·n²/N)` for even `N`,
/// `exp(−jπ·u·n(n+1)/N)` for odd `N`.
pub fn zadoff_chu(np: usize, root: usize) -> Result<Vec<C64>> {
    if np == 0 || root == 0 || gcd(root, np) != 1 {
        return Err(Error::Parameter(format!("Zadoff-Chu root {root} must be coprime with length {np}")));
    }
    let odd = np % 2 == 1;
    Ok((0..np)
        .map(|n| {
            let k = if odd { n * (n + 1) } else { n * n };
            // reduce the exponent mod 2N before converting to keep phases accurate
            let e = (root as u128 * k as u128) % (2 * np as u128);
            C64::from_polar(1.0, -std::f64::consts::PI * e as f64 / np as f64)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotSet {
    /// Tap offsets `φ_s` on the extended grid.
    pub phases: Vec<usize>,
    pub base: Vec<C64>,
    pub npe: usize,
    pub nd: usize,
}

impl PilotSet {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn max_pilots(grid: &DelayGrid) -> usize {
        grid.npe / grid.nd
    }

    /// Pilot symbol of pilot `s` on subcarrier `r` (absolute index), with `n = r − r_p`.
    pub fn symbol(&self, s: usize, r: usize, n: usize) -> C64 {
        let ramp = ((self.phases[s] * r) % self.npe) as f64 / self.npe as f64;
        crate::dsp::cis_neg(ramp) * self.base[n]
    }
}

pub fn build_pilot_set(grid: &DelayGrid, s_count: usize, base: Vec<C64>) -> Result<PilotSet> {
    let max = PilotSet::max_pilots(grid);
    if s_count == 0 || s_count > max {
        return Err(Error::PilotCapacity { requested: s_count, max });
    }
    if base.iter().any(|x| (x.norm() - 1.0).abs() > 1e-12) {
        return Err(Error::Parameter("base pilot must have unit-modulus entries".into()));
    }
    Ok(PilotSet { phases: (0..s_count).map(|s| s * grid.nd).collect(), base, npe: grid.npe, nd: grid.nd })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub groups: Vec<Vec<usize>>,
    pub pilot_of: Vec<usize>,
}

impl Allocation {
    pub fn from_groups(groups: Vec<Vec<usize>>, k: usize) -> Result<Self> {
        let mut pilot_of = vec![usize::MAX; k];
        for (s, group) in groups.iter().enumerate() {
            for &ut in group {
                if ut >= k || pilot_of[ut] != usize::MAX {
                    return Err(Error::Parameter(format!("UT {ut} missing from range or assigned twice")));
                }
                pilot_of[ut] = s;
            }
        }
        if pilot_of.contains(&usize::MAX) {
            return Err(Error::Parameter("allocation does not cover every UT".into()));
        }
        Ok(Self { groups, pilot_of })
    }

    pub fn from_labels(pilot_of: Vec<usize>, s_count: usize) -> Result<Self> {
        let mut groups = vec![Vec::new(); s_count];
        for (k, &s) in pilot_of.iter().enumerate() {
            if s >= s_count {
                return Err(Error::Parameter(format!("UT {k} assigned to pilot {s} >= {s_count}")));
            }
            groups[s].push(k);
        }
        Ok(Self { groups, pilot_of })
    }

    pub fn num_uts(&self) -> usize {
        self.pilot_of.len()
    }

    pub fn num_pilots(&self) -> usize {
        self.groups.len()
    }

    /// Position of UT `k` inside its pilot group.
    pub fn index_in_group(&self, k: usize) -> usize {
        self.groups[self.pilot_of[k]].iter().position(|&i| i == k).expect("UT in its group")
    }
}

/// Symmetric interference weights `W_ik = β_i β_k |g_iᴴ g_k|²`, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightGraph {
    k: usize,
    w: Vec<f64>,
}

impl WeightGraph {
    pub fn from_fn(k: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut w = vec![0.0; k * k];
        for i in 0..k {
            for j in i + 1..k {
                let v = f(i, j);
                w[i * k + j] = v;
                w[j * k + i] = v;
            }
        }
        Self { k, w }
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.k + j]
    }

    pub fn total(&self) -> f64 {
        (0..self.k).flat_map(|i| (i + 1..self.k).map(move |j| (i, j))).map(|(i, j)| self.get(i, j)).sum()
    }

    /// Sum of edge weights with both endpoints in `group`.
    pub fn intra(&self, group: &[usize]) -> f64 {
        let mut acc = 0.0;
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                acc += self.get(i, j);
            }
        }
        acc
    }
}

pub fn weight_graph(betas: &[f64], steering: &[Vec<C64>]) -> Result<WeightGraph> {
    if betas.len() != steering.len() {
        return Err(Error::Dimension(format!("{} gains vs {} steering vectors", betas.len(), steering.len())));
    }
    Ok(WeightGraph::from_fn(betas.len(), |i, k| betas[i] * betas[k] * dot_h(&steering[i], &steering[k]).norm_sqr()))
}

/// Order in which the greedy allocator visits UTs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GreedyOrder {
    /// Ascending UT index; the first `S` UTs seed the groups.
    #[default]
    Index,
    /// Descending large-scale gain (stable on ties).
    DescendingBeta,
}

/// Greedy max-S-cut pilot allocation.
///
/// Groups are seeded with one UT each; every remaining UT joins the group that
/// minimizes that group's resulting intra-group weight, ties going to the
/// lowest pilot index. `O(K²)`.
pub fn greedy_allocate(w: &WeightGraph, s_count: usize) -> Result<Allocation> {
    greedy_allocate_ordered(w, s_count, &(0..w.len()).collect::<Vec<_>>())
}

pub fn greedy_allocate_with(w: &WeightGraph, s_count: usize, order: GreedyOrder, betas: &[f64]) -> Result<Allocation> {
    let mut visit: Vec<usize> = (0..w.len()).collect();
    if order == GreedyOrder::DescendingBeta {
        if betas.len() != w.len() {
            return Err(Error::Dimension("one gain per UT required for beta ordering".into()));
        }
        visit.sort_by(|&a, &b| betas[b].total_cmp(&betas[a]));
    }
    greedy_allocate_ordered(w, s_count, &visit)
}

fn greedy_allocate_ordered(w: &WeightGraph, s_count: usize, visit: &[usize]) -> Result<Allocation> {
    let k = w.len();
    if s_count == 0 || k < s_count {
        return Err(Error::Parameter(format!("need K >= S >= 1, got K={k}, S={s_count}")));
    }
    let mut groups: Vec<Vec<usize>> = visit[..s_count].iter().map(|&ut| vec![ut]).collect();
    let mut intra = vec![0.0; s_count];
    for &ut in &visit[s_count..] {
        let mut best = (f64::INFINITY, 0, 0.0);
        for (s, group) in groups.iter().enumerate() {
            let added: f64 = group.iter().map(|&i| w.get(i, ut)).sum();
            let cost = intra[s] + added;
            if cost < best.0 {
                best = (cost, s, added);
            }
        }
        let (_, s, added) = best;
        intra[s] += added;
        groups[s].push(ut);
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    Allocation::from_groups(groups, k)
}

/// Total weight of edges whose endpoints use different pilots.
pub fn cut_value(w: &WeightGraph, alloc: &Allocation) -> f64 {
    let k = w.len();
    let mut acc = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            if alloc.pilot_of[i] != alloc.pilot_of[j] {
                acc += w.get(i, j);
            }
        }
    }
    acc
}

/// Uniform random labels, then every empty group takes one UT from the largest group.
pub fn random_allocate<R: Rng + ?Sized>(rng: &mut R, k: usize, s_count: usize) -> Result<Allocation> {
    if s_count == 0 || k < s_count {
        return Err(Error::Parameter(format!("need K >= S >= 1, got K={k}, S={s_count}")));
    }
    let mut labels: Vec<usize> = (0..k).map(|_| rng.random_range(0..s_count)).collect();
    loop {
        let mut sizes = vec![0usize; s_count];
        labels.iter().for_each(|&s| sizes[s] += 1);
        let Some(empty) = sizes.iter().position(|&n| n == 0) else { break };
        let largest = (0..s_count).max_by_key(|&s| (sizes[s], std::cmp::Reverse(s))).unwrap();
        let donor = labels.iter().rposition(|&s| s == largest).unwrap();
        labels[donor] = empty;
    }
    Allocation::from_labels(labels, s_count)
}
