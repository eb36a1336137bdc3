//! Butterfly (signed 4-cycle) census.
//!
//! A butterfly is a pair of buyers linked to the same pair of sellers — the
//! smallest cycle a bipartite graph admits. Walking the cycle
//! `b_i → s_j → b_k → s_l → b_i` and reading off the four edge signs, exactly
//! seven arrangements survive up to isomorphism. Five have an even number of
//! negative edges (balanced, in the balance-theory sense), two are
//! unbalanced:
//!
//! | class | cycle signs  | balanced | null multiplicity |
//! |-------|--------------|----------|-------------------|
//! | A     | (+,+,+,+)    | yes      | 1                 |
//! | B     | (+,−,−,+)    | yes      | 2                 |
//! | C     | (+,+,−,−)    | yes      | 2                 |
//! | D     | (+,−,+,−)    | yes      | 2                 |
//! | E     | (−,−,−,−)    | yes      | 1                 |
//! | F     | (+,+,+,−)    | no       | 4                 |
//! | G     | (+,−,−,−)    | no       | 4                 |
//!
//! The multiplicities (summing to the 2⁴ = 16 labeled sign assignments) give
//! the expected class shares under a null model that keeps the topology and
//! redraws each sign independently positive with probability `p`:
//! `E%(A) = p⁴`, `E%(E) = q⁴`, `E%(F) = 4p³q`, `E%(G) = 4pq³`, and
//! `E%(B) = E%(C) = E%(D) = 2p²q²` with `q = 1 − p`. The *surprise* of a class
//! standardizes the observed count against that null:
//!
//! ```text
//! s = (observed − total·E%) / sqrt(total·E%·(1−E%))
//! ```
//!
//! [`count_butterflies`] aggregates wedges (paths of length 2) per node pair,
//! so it never materializes individual butterflies; the quartic
//! [`enumerate_butterflies_bruteforce`] exists as its oracle and for spot
//! checks on small graphs.

use std::io::Write;

use crate::graph::{Sign, SignedBipartiteGraph};
use crate::{Error, Result};

/// The seven sign-isomorphism classes, named by the edge signs met walking
/// the 4-cycle. `P` is positive, `N` negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ButterflyClass {
    /// (+,+,+,+) — class A, all agreement.
    Pppp,
    /// (+,−,−,+) — class B, one buyer all-positive, the other all-negative.
    Pnnp,
    /// (+,+,−,−) — class C, one seller all-positive, the other all-negative.
    Ppnn,
    /// (+,−,+,−) — class D, alternating; every node has one + and one −.
    Pnpn,
    /// (−,−,−,−) — class E, all disagreement.
    Nnnn,
    /// (+,+,+,−) — class F, a single negative edge (unbalanced).
    Pppn,
    /// (+,−,−,−) — class G, a single positive edge (unbalanced).
    Pnnn,
}

impl ButterflyClass {
    pub const ALL: [ButterflyClass; 7] = [
        ButterflyClass::Pppp,
        ButterflyClass::Pnnp,
        ButterflyClass::Ppnn,
        ButterflyClass::Pnpn,
        ButterflyClass::Nnnn,
        ButterflyClass::Pppn,
        ButterflyClass::Pnnn,
    ];

    /// Single-letter label, A through G.
    pub fn label(self) -> &'static str {
        match self {
            ButterflyClass::Pppp => "A",
            ButterflyClass::Pnnp => "B",
            ButterflyClass::Ppnn => "C",
            ButterflyClass::Pnpn => "D",
            ButterflyClass::Nnnn => "E",
            ButterflyClass::Pppn => "F",
            ButterflyClass::Pnnn => "G",
        }
    }

    /// Cycle sign tuple, e.g. `"(+,-,-,+)"`.
    pub fn sign_tuple(self) -> &'static str {
        match self {
            ButterflyClass::Pppp => "(+,+,+,+)",
            ButterflyClass::Pnnp => "(+,-,-,+)",
            ButterflyClass::Ppnn => "(+,+,-,-)",
            ButterflyClass::Pnpn => "(+,-,+,-)",
            ButterflyClass::Nnnn => "(-,-,-,-)",
            ButterflyClass::Pppn => "(+,+,+,-)",
            ButterflyClass::Pnnn => "(+,-,-,-)",
        }
    }

    /// Balanced iff the cycle has an even number of negative edges.
    pub fn is_balanced(self) -> bool {
        !matches!(self, ButterflyClass::Pppn | ButterflyClass::Pnnn)
    }

    /// Number of labeled sign assignments of the 4-cycle that fall in this
    /// class; the seven multiplicities sum to 16.
    pub fn null_multiplicity(self) -> u64 {
        match self {
            ButterflyClass::Pppp | ButterflyClass::Nnnn => 1,
            ButterflyClass::Pnnp | ButterflyClass::Ppnn | ButterflyClass::Pnpn => 2,
            ButterflyClass::Pppn | ButterflyClass::Pnnn => 4,
        }
    }

    fn index(self) -> usize {
        match self {
            ButterflyClass::Pppp => 0,
            ButterflyClass::Pnnp => 1,
            ButterflyClass::Ppnn => 2,
            ButterflyClass::Pnpn => 3,
            ButterflyClass::Nnnn => 4,
            ButterflyClass::Pppn => 5,
            ButterflyClass::Pnnn => 6,
        }
    }
}

/// Census of a graph's butterflies: per-class counts plus the positive
/// fraction used for the null model. Fractions, expected fractions, and
/// surprise are derived on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct ButterflyCensus {
    counts: [u64; 7],
    positive_fraction: f64,
}

impl ButterflyCensus {
    fn new(counts: [u64; 7], positive_fraction: f64) -> Self {
        Self {
            counts,
            positive_fraction,
        }
    }

    pub fn count(&self, class: ButterflyClass) -> u64 {
        self.counts[class.index()]
    }

    /// Class counts in A..G order.
    pub fn counts(&self) -> [u64; 7] {
        self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn balanced_total(&self) -> u64 {
        ButterflyClass::ALL
            .iter()
            .filter(|c| c.is_balanced())
            .map(|c| self.count(*c))
            .sum()
    }

    pub fn unbalanced_total(&self) -> u64 {
        self.total() - self.balanced_total()
    }

    /// Observed share of one class; `0.0` when the graph has no butterflies.
    pub fn fraction(&self, class: ButterflyClass) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.count(class) as f64 / total as f64
        }
    }

    /// Positive-edge fraction the null model is parameterized by.
    pub fn positive_fraction(&self) -> f64 {
        self.positive_fraction
    }

    /// Expected share of one class under the sign-shuffled null model.
    pub fn expected_fraction(&self, class: ButterflyClass) -> f64 {
        expected_fractions(self.positive_fraction)
            .map(|e| e[class.index()])
            .unwrap_or(f64::NAN)
    }

    /// Surprise of one class; errors when the null model is degenerate
    /// (no butterflies, or an expected fraction of exactly 0 or 1).
    pub fn surprise_of(&self, class: ButterflyClass) -> Result<f64> {
        surprise(
            self.count(class),
            self.total(),
            self.expected_fraction(class),
        )
    }

    /// Surprise of the balanced-classes total against the summed balanced
    /// expected fraction.
    pub fn balanced_surprise(&self) -> Result<f64> {
        let expected: f64 = ButterflyClass::ALL
            .iter()
            .filter(|c| c.is_balanced())
            .map(|c| self.expected_fraction(*c))
            .sum();
        surprise(self.balanced_total(), self.total(), expected)
    }
}

/// Counts all butterflies by class without enumerating them.
///
/// For every unordered pair of same-side nodes, the common neighbors split
/// into four sign patterns; binomial combinations of those tallies yield the
/// per-class counts. Work is done from whichever side generates fewer wedges.
/// All accumulation is in `u64`.
pub fn count_butterflies(graph: &SignedBipartiteGraph) -> ButterflyCensus {
    // Wedge cost when pairing buyers is Σ_s d(s)²; when pairing sellers,
    // Σ_b d(b)². Pick the cheaper orientation; B and C swap roles under the
    // transpose (the "one homogeneous buyer" class becomes the "one
    // homogeneous seller" class), the other five are side-symmetric.
    let buyer_side_cost: u64 = (0..graph.n_sellers() as u32)
        .map(|s| {
            let d = graph.seller_neighbors(s).len() as u64;
            d * d
        })
        .sum();
    let seller_side_cost: u64 = (0..graph.n_buyers() as u32)
        .map(|b| {
            let d = graph.buyer_neighbors(b).len() as u64;
            d * d
        })
        .sum();

    let counts = if buyer_side_cost <= seller_side_cost {
        pair_tally(graph.n_buyers(), graph.n_sellers(), |b| {
            graph.buyer_neighbors(b)
        }, |s| graph.seller_neighbors(s))
    } else {
        let mut c = pair_tally(graph.n_sellers(), graph.n_buyers(), |s| {
            graph.seller_neighbors(s)
        }, |b| graph.buyer_neighbors(b));
        c.swap(ButterflyClass::Pnnp.index(), ButterflyClass::Ppnn.index());
        c
    };

    ButterflyCensus::new(counts, graph.positive_fraction())
}

/// Core tally: for each unordered pair of *primary*-side nodes, classify
/// their common secondary neighbors by the sign pair and combine.
fn pair_tally<'a>(
    n_primary: usize,
    _n_secondary: usize,
    primary_neighbors: impl Fn(u32) -> &'a [(u32, Sign)],
    secondary_neighbors: impl Fn(u32) -> &'a [(u32, Sign)],
) -> [u64; 7] {
    let mut counts = [0u64; 7];
    // Per-pair tallies of common neighbors by (sign at i, sign at k):
    // [ (+,+), (+,−), (−,+), (−,−) ].
    let mut scratch: Vec<[u32; 4]> = vec![[0; 4]; n_primary];
    let mut touched: Vec<u32> = Vec::new();

    for i in 0..n_primary as u32 {
        for &(mid, sign_i) in primary_neighbors(i) {
            for &(k, sign_k) in secondary_neighbors(mid) {
                if k <= i {
                    continue;
                }
                let slot = match (sign_i, sign_k) {
                    (Sign::Positive, Sign::Positive) => 0,
                    (Sign::Positive, Sign::Negative) => 1,
                    (Sign::Negative, Sign::Positive) => 2,
                    (Sign::Negative, Sign::Negative) => 3,
                };
                let cell = &mut scratch[k as usize];
                if cell.iter().all(|&c| c == 0) {
                    touched.push(k);
                }
                cell[slot] += 1;
            }
        }
        for &k in &touched {
            let [a, b, c, d] = scratch[k as usize];
            let (a, b, c, d) = (a as u64, b as u64, c as u64, d as u64);
            counts[ButterflyClass::Pppp.index()] += choose2(a);
            counts[ButterflyClass::Nnnn.index()] += choose2(d);
            counts[ButterflyClass::Ppnn.index()] += a * d;
            counts[ButterflyClass::Pnnp.index()] += choose2(b) + choose2(c);
            counts[ButterflyClass::Pnpn.index()] += b * c;
            counts[ButterflyClass::Pppn.index()] += a * (b + c);
            counts[ButterflyClass::Pnnn.index()] += d * (b + c);
            scratch[k as usize] = [0; 4];
        }
        touched.clear();
    }
    counts
}

fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Quartic reference implementation: checks every (buyer pair, seller pair)
/// quadruple for the four cycle edges and classifies the cycle directly.
/// Exists as the oracle for [`count_butterflies`]; use only on small graphs.
pub fn enumerate_butterflies_bruteforce(graph: &SignedBipartiteGraph) -> ButterflyCensus {
    let mut counts = [0u64; 7];
    let n_b = graph.n_buyers() as u32;
    let n_s = graph.n_sellers() as u32;
    for i in 0..n_b {
        for k in (i + 1)..n_b {
            for j in 0..n_s {
                for l in (j + 1)..n_s {
                    let (Some(e1), Some(e2), Some(e3), Some(e4)) = (
                        graph.sign_of(i, j),
                        graph.sign_of(k, j),
                        graph.sign_of(k, l),
                        graph.sign_of(i, l),
                    ) else {
                        continue;
                    };
                    counts[classify_cycle(e1, e2, e3, e4).index()] += 1;
                }
            }
        }
    }
    ButterflyCensus::new(counts, graph.positive_fraction())
}

/// Classifies a 4-cycle from its edge signs in cycle order
/// `(b_i–s_j, s_j–b_k, b_k–s_l, s_l–b_i)`.
///
/// With exactly two negatives the arrangement decides the class: both on one
/// buyer (edges 1&4 vs 2&3 homogeneous) → B; both on one seller (edges 1&2 vs
/// 3&4) → C; across the diagonal → D.
pub fn classify_cycle(e1: Sign, e2: Sign, e3: Sign, e4: Sign) -> ButterflyClass {
    let negatives = [e1, e2, e3, e4]
        .iter()
        .filter(|s| !s.is_positive())
        .count();
    match negatives {
        0 => ButterflyClass::Pppp,
        4 => ButterflyClass::Nnnn,
        1 => ButterflyClass::Pppn,
        3 => ButterflyClass::Pnnn,
        _ => {
            if e1 == e4 && e2 == e3 {
                ButterflyClass::Pnnp
            } else if e1 == e2 && e3 == e4 {
                ButterflyClass::Ppnn
            } else {
                ButterflyClass::Pnpn
            }
        }
    }
}

/// Expected class fractions (A..G order) under the independent sign-shuffle
/// null with positive probability `p`. Always sums to 1.
pub fn expected_fractions(p: f64) -> Result<[f64; 7]> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "positive fraction must lie in [0, 1], got {p}"
        )));
    }
    let q = 1.0 - p;
    Ok([
        p.powi(4),
        2.0 * p * p * q * q,
        2.0 * p * p * q * q,
        2.0 * p * p * q * q,
        q.powi(4),
        4.0 * p.powi(3) * q,
        4.0 * p * q.powi(3),
    ])
}

/// Standardized deviation of an observed class count from the null model:
/// `(observed − total·e) / sqrt(total·e·(1−e))`.
///
/// Errors when `total` is zero or `e` leaves no variance (`e ≤ 0` or
/// `e ≥ 1`).
pub fn surprise(observed: u64, total: u64, expected_fraction: f64) -> Result<f64> {
    if total == 0 {
        return Err(Error::DegenerateNull(
            "no butterflies to compare against the null".to_string(),
        ));
    }
    let e = expected_fraction;
    if !e.is_finite() || e <= 0.0 || e >= 1.0 {
        return Err(Error::DegenerateNull(format!(
            "expected fraction {e} admits no variance"
        )));
    }
    let total = total as f64;
    let mean = total * e;
    let sd = (total * e * (1.0 - e)).sqrt();
    Ok((observed as f64 - mean) / sd)
}

/// Writes the census as tab-separated records: one row per class plus
/// `balanced` / `unbalanced` summary rows. Undefined surprise renders as
/// `NA`.
pub fn write_census_records(census: &ButterflyCensus, mut writer: impl Write) -> Result<()> {
    writeln!(
        writer,
        "# class\tsigns\tcount\tfraction\texpected_fraction\tsurprise"
    )?;
    for class in ButterflyClass::ALL {
        writeln!(
            writer,
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{}",
            class.label(),
            class.sign_tuple(),
            census.count(class),
            census.fraction(class),
            census.expected_fraction(class),
            format_surprise(census.surprise_of(class)),
        )?;
    }
    let total = census.total();
    let balanced_expected: f64 = ButterflyClass::ALL
        .iter()
        .filter(|c| c.is_balanced())
        .map(|c| census.expected_fraction(*c))
        .sum();
    writeln!(
        writer,
        "balanced\t-\t{}\t{:.6}\t{:.6}\t{}",
        census.balanced_total(),
        if total == 0 {
            0.0
        } else {
            census.balanced_total() as f64 / total as f64
        },
        balanced_expected,
        format_surprise(census.balanced_surprise()),
    )?;
    writeln!(
        writer,
        "unbalanced\t-\t{}\t{:.6}\t{:.6}\t{}",
        census.unbalanced_total(),
        if total == 0 {
            0.0
        } else {
            census.unbalanced_total() as f64 / total as f64
        },
        1.0 - balanced_expected,
        format_surprise(
            census
                .balanced_surprise()
                .map(|s| -s)
        ),
    )?;
    Ok(())
}

fn format_surprise(s: Result<f64>) -> String {
    match s {
        Ok(v) => format!("{v:.3}"),
        Err(_) => "NA".to_string(),
    }
}
