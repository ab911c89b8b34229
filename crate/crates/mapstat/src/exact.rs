//! Exhaustive ground truth: iterate all `n^n` mappings for small `n` and
//! aggregate every statistic the estimators target, in exact integer
//! arithmetic. Everything downstream (Monte Carlo, series extraction) is
//! checked against this module.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::mapping::{decompose, extremal_stats, Mapping};

/// Default exhaustive-enumeration cap: `7^7` decompositions.
pub const DEFAULT_CAP: usize = 7;
/// Hard cap with the long-run override: `8^8 ~ 1.7e7` decompositions.
pub const OVERRIDE_CAP: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnumError {
    #[error("n = {n} exceeds the enumeration cap {cap}; `8^8` runs need the override, larger n is out of reach")]
    CapExceeded { n: usize, cap: usize },
}

/// An exact rational, serialized as `{"num": "...", "den": "..."}` strings so
/// downstream tooling never loses precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactRatio(pub BigRational);

impl ExactRatio {
    pub fn from_counts(num: u64, den: u64) -> Self {
        ExactRatio(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        ExactRatio(BigRational::zero())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl Serialize for ExactRatio {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("ExactRatio", 2)?;
        st.serialize_field("num", &self.0.numer().to_string())?;
        st.serialize_field("den", &self.0.denom().to_string())?;
        st.end()
    }
}

/// Exact distribution of one ranked statistic: `pmf[m] = P(stat = m)` and
/// `cdf[m] = P(stat <= m)` for `m = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistTable {
    pub rank: usize,
    pub pmf: Vec<ExactRatio>,
    pub cdf: Vec<ExactRatio>,
}

/// Exact pair-sampling statistics for the two-large-trees question.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairExact {
    /// `E(tau_1 tau_2 1[t_1 and t_2 both in the largest component])`.
    pub mean_tau1_tau2_in_largest: ExactRatio,
    /// `E(mu (mu - 1))`.
    pub mean_mu_times_mu_minus_one: ExactRatio,
    /// Conditional probability that a uniform unordered pair hits the two
    /// largest trees given both its vertices lie in the largest component.
    pub conditional: ExactRatio,
}

/// Every exact statistic for one `n`, with denominators dividing `n^n`
/// (times `n` for vertex-level probabilities).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactTable {
    pub n: usize,
    pub s_max: usize,
    pub r_max: usize,
    pub total_mappings: u64,
    pub mean_mu: ExactRatio,
    pub mean_mu_sq: ExactRatio,
    /// `E(tau_{n,s})` for s = 1..=s_max.
    pub mean_tau: Vec<ExactRatio>,
    /// `E(tau_{n,s} 1[t_{n,s} in largest component])`.
    pub mean_tau_in_largest: Vec<ExactRatio>,
    /// `q_{n,s} = P(t_{n,s} in largest component)`.
    pub subgraph_prob: Vec<ExactRatio>,
    /// `P(v in s-th largest tree | v in largest component)` under the
    /// two-step product measure; equals `E(tau_s 1)/E(mu)`.
    pub conditional_ps: Vec<ExactRatio>,
    pub mu_dist: Vec<DistTable>,
    pub tau_dist: Vec<DistTable>,
    /// Mappings whose digraph is connected; a by-product cross-checking the
    /// log-composition of the series module.
    pub connected_count: u64,
    pub pair: Option<PairExact>,
}

impl ExactTable {
    pub fn cdf_mu(&self, r: usize, m: usize) -> &ExactRatio {
        &self.mu_dist[r - 1].cdf[m]
    }

    pub fn cdf_tau(&self, s: usize, m: usize) -> &ExactRatio {
        &self.tau_dist[s - 1].cdf[m]
    }
}

#[derive(Clone)]
struct Tally {
    n: usize,
    s_max: usize,
    r_max: usize,
    mappings: u64,
    sum_mu: u64,
    sum_mu_sq: u64,
    sum_tau: Vec<u64>,
    sum_tau_in: Vec<u64>,
    count_in: Vec<u64>,
    dist_mu: Vec<Vec<u64>>,
    dist_tau: Vec<Vec<u64>>,
    connected: u64,
    sum_t1t2_in: u64,
    sum_mu_mu1: u64,
}

impl Tally {
    fn new(n: usize, s_max: usize, r_max: usize) -> Self {
        Self {
            n,
            s_max,
            r_max,
            mappings: 0,
            sum_mu: 0,
            sum_mu_sq: 0,
            sum_tau: vec![0; s_max],
            sum_tau_in: vec![0; s_max],
            count_in: vec![0; s_max],
            dist_mu: vec![vec![0; n + 1]; r_max],
            dist_tau: vec![vec![0; n + 1]; s_max],
            connected: 0,
            sum_t1t2_in: 0,
            sum_mu_mu1: 0,
        }
    }

    fn record(&mut self, mapping: &Mapping) {
        let st = extremal_stats(&decompose(mapping));
        let mu = st.mu(1) as u64;
        self.mappings += 1;
        self.sum_mu += mu;
        self.sum_mu_sq += mu * mu;
        for s in 1..=self.s_max {
            let tau = st.tau(s) as u64;
            self.sum_tau[s - 1] += tau;
            if st.in_largest(s) {
                self.sum_tau_in[s - 1] += tau;
                self.count_in[s - 1] += 1;
            }
            self.dist_tau[s - 1][tau as usize] += 1;
        }
        for r in 1..=self.r_max {
            self.dist_mu[r - 1][st.mu(r)] += 1;
        }
        if st.component_sizes_desc.len() == 1 {
            self.connected += 1;
        }
        if self.n >= 2 {
            if st.in_largest(1) && st.in_largest(2) {
                self.sum_t1t2_in += st.tau(1) as u64 * st.tau(2) as u64;
            }
            self.sum_mu_mu1 += mu * (mu - 1);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.mappings += other.mappings;
        self.sum_mu += other.sum_mu;
        self.sum_mu_sq += other.sum_mu_sq;
        for s in 0..self.s_max {
            self.sum_tau[s] += other.sum_tau[s];
            self.sum_tau_in[s] += other.sum_tau_in[s];
            self.count_in[s] += other.count_in[s];
            for m in 0..=self.n {
                self.dist_tau[s][m] += other.dist_tau[s][m];
            }
        }
        for r in 0..self.r_max {
            for m in 0..=self.n {
                self.dist_mu[r][m] += other.dist_mu[r][m];
            }
        }
        self.connected += other.connected;
        self.sum_t1t2_in += other.sum_t1t2_in;
        self.sum_mu_mu1 += other.sum_mu_mu1;
        self
    }
}

fn dist_table(rank: usize, counts: &[u64], total: u64) -> DistTable {
    let pmf: Vec<ExactRatio> = counts
        .iter()
        .map(|&c| ExactRatio::from_counts(c, total))
        .collect();
    let mut running = 0u64;
    let cdf: Vec<ExactRatio> = counts
        .iter()
        .map(|&c| {
            running += c;
            ExactRatio::from_counts(running, total)
        })
        .collect();
    DistTable { rank, pmf, cdf }
}

/// Iterates all `n^n` mappings in odometer order (rightmost image fastest)
/// and returns the exact statistics table.
///
/// `n` is capped at 7 by default; passing `allow_large = true` admits 8.
/// Workers split the tuple space by leading image; exact partial sums merge
/// associatively, so the result is independent of the partitioning.
pub fn enumerate_all(
    n: usize,
    s_max: usize,
    r_max: usize,
    allow_large: bool,
) -> Result<ExactTable, EnumError> {
    let cap = if allow_large { OVERRIDE_CAP } else { DEFAULT_CAP };
    if n == 0 || n > cap {
        return Err(EnumError::CapExceeded { n, cap });
    }

    let suffix_count = (n as u64).pow(n as u32 - 1);
    let tally = (0..n as u32)
        .into_par_iter()
        .map(|lead| {
            let mut tally = Tally::new(n, s_max, r_max);
            let mut images = vec![0u32; n];
            images[0] = lead;
            for _ in 0..suffix_count {
                tally.record(&Mapping::from_internal(images.clone()));
                for pos in (1..n).rev() {
                    images[pos] += 1;
                    if images[pos] < n as u32 {
                        break;
                    }
                    images[pos] = 0;
                }
            }
            tally
        })
        .reduce(|| Tally::new(n, s_max, r_max), Tally::merge);

    let total = tally.mappings;
    debug_assert_eq!(total, (n as u64).pow(n as u32));

    let mean_mu = ExactRatio::from_counts(tally.sum_mu, total);
    let conditional_ps: Vec<ExactRatio> = tally
        .sum_tau_in
        .iter()
        .map(|&x| ExactRatio(BigRational::new(BigInt::from(x), BigInt::from(tally.sum_mu))))
        .collect();

    let pair = if n >= 2 {
        let num = BigInt::from(2u64) * BigInt::from(tally.sum_t1t2_in);
        let den = BigInt::from(tally.sum_mu_mu1);
        Some(PairExact {
            mean_tau1_tau2_in_largest: ExactRatio::from_counts(tally.sum_t1t2_in, total),
            mean_mu_times_mu_minus_one: ExactRatio::from_counts(tally.sum_mu_mu1, total),
            conditional: ExactRatio(BigRational::new(num, den)),
        })
    } else {
        None
    };

    Ok(ExactTable {
        n,
        s_max,
        r_max,
        total_mappings: total,
        mean_mu,
        mean_mu_sq: ExactRatio::from_counts(tally.sum_mu_sq, total),
        mean_tau: tally
            .sum_tau
            .iter()
            .map(|&x| ExactRatio::from_counts(x, total))
            .collect(),
        mean_tau_in_largest: tally
            .sum_tau_in
            .iter()
            .map(|&x| ExactRatio::from_counts(x, total))
            .collect(),
        subgraph_prob: tally
            .count_in
            .iter()
            .map(|&x| ExactRatio::from_counts(x, total))
            .collect(),
        conditional_ps,
        mu_dist: (1..=r_max)
            .map(|r| dist_table(r, &tally.dist_mu[r - 1], total))
            .collect(),
        tau_dist: (1..=s_max)
            .map(|s| dist_table(s, &tally.dist_tau[s - 1], total))
            .collect(),
        connected_count: tally.connected,
        pair,
    })
}
