//! Lossy-reconstruction search: a pluggable distortion measure, the exact
//! minimum parse complexity within a distortion budget (small spaces only),
//! and a budgeted local search yielding upper bounds at lengths the exact
//! scan cannot reach.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::alphabet::{Alphabet, Sequence};
use crate::error::{Error, Result};
use crate::lz78::lz_complexity;

/// Exact-scan guard: candidate spaces beyond this are rejected.
pub const RD_SPACE_LIMIT: u64 = 1 << 24;

/// Float slack when testing `cost <= n * distortion`; absorbs decimal
/// budgets like `1/3` without reopening the closed inequality for real
/// violations.
const COST_EPS: f64 = 1e-9;

/// Per-pair distortion `d(x, reproduction)` with an optional whole-sequence
/// override. The per-pair table always exists; it fixes `d_max` and drives
/// additive costs. Sequence cost is the per-symbol sum unless a callback
/// replaces it.
#[derive(Clone)]
pub struct DistortionMeasure {
    source: Alphabet,
    repro: Alphabet,
    /// Row-major `[source symbol][reproduction symbol]`.
    table: Vec<f64>,
    d_max: f64,
    callback: Option<Arc<dyn Fn(&[u8], &[u8]) -> f64 + Send + Sync>>,
    hamming: bool,
}

impl std::fmt::Debug for DistortionMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DistortionMeasure")
            .field("source", &self.source.size())
            .field("repro", &self.repro.size())
            .field("d_max", &self.d_max)
            .field("additive", &self.callback.is_none())
            .finish()
    }
}

impl DistortionMeasure {
    /// Additive measure from a per-pair cost table.
    pub fn additive(source: Alphabet, repro: Alphabet, table: Vec<f64>) -> Result<Self> {
        let want = source.size() as usize * repro.size() as usize;
        if table.len() != want {
            return Err(Error::InvalidParameter(format!(
                "cost table has {} entries, need {}",
                table.len(),
                want
            )));
        }
        if table.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::InvalidParameter("cost entries must be finite and >= 0".into()));
        }
        let d_max = table.iter().cloned().fold(0.0, f64::max);
        Ok(DistortionMeasure { source, repro, table, d_max, callback: None, hamming: false })
    }

    /// Non-additive measure: the callback prices whole sequences; the table
    /// still supplies `d_max` and per-pair costs.
    pub fn with_callback(
        source: Alphabet,
        repro: Alphabet,
        table: Vec<f64>,
        cost: impl Fn(&[u8], &[u8]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let mut m = DistortionMeasure::additive(source, repro, table)?;
        m.callback = Some(Arc::new(cost));
        Ok(m)
    }

    /// Substitution count: 0 on the diagonal, 1 elsewhere, reproduction
    /// alphabet equal to the source.
    pub fn hamming(alphabet: Alphabet) -> Self {
        let a = alphabet.size() as usize;
        let mut table = vec![1.0; a * a];
        for i in 0..a {
            table[i * a + i] = 0.0;
        }
        let mut m = DistortionMeasure::additive(alphabet, alphabet, table)
            .expect("square table is well formed");
        m.hamming = true;
        m
    }

    pub fn source_alphabet(&self) -> Alphabet {
        self.source
    }

    pub fn repro_alphabet(&self) -> Alphabet {
        self.repro
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn is_additive(&self) -> bool {
        self.callback.is_none()
    }

    pub fn pair_cost(&self, x: u8, repro: u8) -> f64 {
        self.table[x as usize * self.repro.size() as usize + repro as usize]
    }

    /// Whole-sequence cost; additive sum or the callback.
    pub fn cost(&self, x: &Sequence, repro: &Sequence) -> Result<f64> {
        if x.len() != repro.len() {
            return Err(Error::LengthMismatch(x.len(), repro.len()));
        }
        if x.alphabet() != self.source || repro.alphabet() != self.repro {
            return Err(Error::InvalidParameter("alphabet mismatch".into()));
        }
        Ok(self.cost_raw(x.symbols(), repro.symbols()))
    }

    fn cost_raw(&self, x: &[u8], repro: &[u8]) -> f64 {
        match &self.callback {
            Some(f) => f(x, repro),
            None => {
                x.iter().zip(repro).map(|(&a, &b)| self.pair_cost(a, b)).sum()
            }
        }
    }
}

/// One point of the minimum-complexity-within-budget curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RdPoint {
    /// Per-symbol budget `D`; the constraint is `cost <= n * D`.
    pub distortion: f64,
    /// Parse complexity of the witness, bits per symbol.
    pub value: f64,
    pub witness: Sequence,
    /// Exact scan vs budgeted search.
    pub exact: bool,
}

impl RdPoint {
    pub const CSV_HEADER: &'static str = "n,distortion,value,exact,witness_hex";

    pub fn csv_row(&self) -> String {
        let hex: String =
            self.witness.symbols().iter().map(|s| format!("{:02x}", s)).collect();
        format!(
            "{},{},{:.6},{},{}",
            self.witness.len(),
            self.distortion,
            self.value,
            self.exact,
            hex
        )
    }
}

fn validate_inputs(x: &Sequence, distortion: f64, d: &DistortionMeasure) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x.alphabet() != d.source_alphabet() {
        return Err(Error::InvalidParameter("sequence alphabet differs from measure".into()));
    }
    if !distortion.is_finite() || distortion < 0.0 {
        return Err(Error::InvalidParameter(format!("bad distortion budget {}", distortion)));
    }
    Ok(())
}

/// Candidate count of the radius-`r` substitution ball, saturating at the
/// guard.
fn ball_size(n: usize, radius: usize, alpha: u64) -> u64 {
    let mut total: u128 = 0;
    let mut choose: u128 = 1;
    let mut pow: u128 = 1;
    for k in 0..=radius {
        if k > 0 {
            choose = choose * (n - k + 1) as u128 / k as u128;
            pow *= (alpha - 1) as u128;
        }
        total += choose * pow;
        if total > RD_SPACE_LIMIT as u128 {
            return u64::MAX;
        }
    }
    total as u64
}

fn better(value: f64, witness: &[u8], best: &Option<(f64, Vec<u8>)>) -> bool {
    match best {
        None => true,
        Some((bv, bw)) => value < *bv || (value == *bv && witness < bw.as_slice()),
    }
}

/// Exact minimum of the parse complexity over reproductions within the
/// budget: `min { complexity(r) : cost(x, r) <= n * D }`. Ties go to the
/// lexicographically smallest witness. Substitution (Hamming) measures scan
/// only the feasible ball around `x`; anything else scans the whole
/// reproduction space, subject to [`RD_SPACE_LIMIT`].
pub fn rd_oracle(x: &Sequence, distortion: f64, d: &DistortionMeasure) -> Result<RdPoint> {
    validate_inputs(x, distortion, d)?;
    let n = x.len();
    let allowance = distortion * n as f64 + COST_EPS;
    let mut best: Option<(f64, Vec<u8>)> = None;

    if d.hamming {
        let radius = (allowance.floor() as usize).min(n);
        let count = ball_size(n, radius, d.repro.size() as u64);
        if count > RD_SPACE_LIMIT {
            return Err(Error::GuardExceeded {
                work: count as u128,
                limit: RD_SPACE_LIMIT as u128,
            });
        }
        let mut buf = vec![0u8; n];
        enum_ball(x.symbols(), d.repro, 0, radius, &mut buf, &mut |cand| {
            let value = complexity_of(d.repro, cand);
            if better(value, cand, &best) {
                best = Some((value, cand.to_vec()));
            }
        });
    } else {
        let count = d
            .repro
            .sequence_count(n)
            .filter(|&c| c <= RD_SPACE_LIMIT)
            .ok_or(Error::GuardExceeded {
                work: u128::MAX,
                limit: RD_SPACE_LIMIT as u128,
            })?;
        for i in 0..count {
            let cand = Sequence::from_index(d.repro, n, i)?;
            if d.cost_raw(x.symbols(), cand.symbols()) > allowance {
                continue;
            }
            let value = complexity_of(d.repro, cand.symbols());
            if better(value, cand.symbols(), &best) {
                best = Some((value, cand.to_bytes()));
            }
        }
    }

    let (value, witness) = best.ok_or_else(|| {
        Error::InvalidParameter("no reproduction satisfies the distortion budget".into())
    })?;
    Ok(RdPoint {
        distortion,
        value,
        witness: Sequence::new(d.repro, witness)?,
        exact: true,
    })
}

fn complexity_of(alphabet: Alphabet, syms: &[u8]) -> f64 {
    lz_complexity(&Sequence::new(alphabet, syms.to_vec()).expect("symbols in range"))
        .expect("nonempty")
}

/// Every sequence differing from `x` in at most `edits_left` positions at
/// or after `pos`; each candidate visited exactly once.
fn enum_ball(
    x: &[u8],
    repro: Alphabet,
    pos: usize,
    edits_left: usize,
    buf: &mut Vec<u8>,
    visit: &mut impl FnMut(&[u8]),
) {
    if pos == x.len() {
        visit(buf);
        return;
    }
    buf[pos] = x[pos];
    enum_ball(x, repro, pos + 1, edits_left, buf, visit);
    if edits_left > 0 {
        for sym in repro.symbols() {
            if sym != x[pos] {
                buf[pos] = sym;
                enum_ball(x, repro, pos + 1, edits_left - 1, buf, visit);
            }
        }
        buf[pos] = x[pos];
    }
}

/// Budgeted upper-bound search: first-improvement descent over
/// single-symbol edits, restarting from random feasible points when stuck.
/// Every reported witness is feasible; the value can only overshoot the
/// exact minimum. `budget` counts candidate evaluations.
pub fn rd_heuristic(
    x: &Sequence,
    distortion: f64,
    d: &DistortionMeasure,
    budget: u64,
    seed: u64,
) -> Result<RdPoint> {
    validate_inputs(x, distortion, d)?;
    let n = x.len();
    let allowance = distortion * n as f64 + COST_EPS;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let feasible = |cand: &[u8]| d.cost_raw(x.symbols(), cand) <= allowance;
    let start = starting_point(x, d, allowance)?;

    let mut best = (complexity_of(d.repro, &start), start.clone());
    let mut current = start.clone();
    let mut current_value = best.0;
    let mut remaining = budget;

    'outer: while remaining > 0 {
        let mut improved = false;
        'scan: for i in 0..n {
            let orig = current[i];
            for sym in d.repro.symbols() {
                if sym == orig {
                    continue;
                }
                current[i] = sym;
                if remaining == 0 {
                    current[i] = orig;
                    break 'outer;
                }
                remaining -= 1;
                if feasible(&current) {
                    let value = complexity_of(d.repro, &current);
                    if better(value, &current, &Some(best.clone())) {
                        best = (value, current.clone());
                    }
                    if value < current_value {
                        current_value = value;
                        improved = true;
                        break 'scan;
                    }
                }
                current[i] = orig;
            }
        }
        if !improved {
            // Random restart: perturb the start point and keep it only if
            // feasible.
            let mut cand = start.clone();
            let edits = rng.gen_range(0..=n);
            for _ in 0..edits {
                let i = rng.gen_range(0..n);
                cand[i] = rng.gen_range(0..d.repro.size()) as u8;
            }
            if feasible(&cand) {
                current_value = complexity_of(d.repro, &cand);
                current = cand;
                remaining = remaining.saturating_sub(1);
                if better(current_value, &current, &Some(best.clone())) {
                    best = (current_value, current.clone());
                }
            } else {
                remaining = remaining.saturating_sub(1);
            }
        }
    }

    Ok(RdPoint {
        distortion,
        value: best.0,
        witness: Sequence::new(d.repro, best.1)?,
        exact: false,
    })
}

/// A feasible starting reproduction: `x` itself when the measure allows it,
/// otherwise the per-symbol cheapest reproduction (additive measures).
fn starting_point(x: &Sequence, d: &DistortionMeasure, allowance: f64) -> Result<Vec<u8>> {
    if d.source_alphabet() == d.repro_alphabet()
        && d.cost_raw(x.symbols(), x.symbols()) <= allowance
    {
        return Ok(x.symbols().to_vec());
    }
    let cheapest: Vec<u8> = x
        .symbols()
        .iter()
        .map(|&sym| {
            (0..d.repro.size() as u8)
                .min_by(|&a, &b| {
                    d.pair_cost(sym, a).partial_cmp(&d.pair_cost(sym, b)).unwrap()
                })
                .unwrap()
        })
        .collect();
    if d.cost_raw(x.symbols(), &cheapest) <= allowance {
        return Ok(cheapest);
    }
    Err(Error::InvalidParameter(
        "no reproduction satisfies the distortion budget".into(),
    ))
}

/// Finite-length uncertainty rate of a near-lossless decoder:
/// `log2(max ambiguity-set size) / n`, where entry `i` is the worst-case
/// number of inputs mapped to one observable at window `i + 1`.
pub fn nil_uncertainty_rate(set_sizes: &[u64]) -> Result<f64> {
    if set_sizes.is_empty() {
        return Err(Error::EmptyInput);
    }
    if set_sizes.contains(&0) {
        return Err(Error::InvalidParameter("ambiguity set sizes must be >= 1".into()));
    }
    let max = *set_sizes.iter().max().unwrap();
    Ok((max as f64).log2() / set_sizes.len() as f64)
}
