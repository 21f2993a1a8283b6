//! Exhaustive verification of the two defining properties: information
//! losslessness (the quadruple of initial state, key words, cryptogram
//! words, and final state pins down the plain-text) and perfect secrecy
//! (the distribution of any cryptogram-word window is the same for every
//! plain-text).
//!
//! Key words at distinct steps are disjoint fresh tape segments, so given
//! the plain-text the output words are independent across steps and the
//! window distribution is exactly the product of per-step word
//! distributions. Equal per-step factors give equal products, and any
//! difference between two window distributions shows up in some per-step
//! marginal. The secrecy checker therefore compares per-step distributions,
//! which is both exact and exponentially cheaper than enumerating whole
//! tapes; `window_distribution` computes the product form directly for
//! small cases, and the test suite cross-checks the two against a literal
//! whole-tape enumeration.
//!
//! All probabilities are dyadic rationals represented exactly as
//! `count / 2^exp`; no floating point is involved in any verdict.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::alphabet::Sequence;
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::fsm::{EncrypterSpec, State, Word};

/// Cap on total enumeration work (key-tape evaluations plus bookkeeping).
pub const WORK_LIMIT: u128 = 1 << 30;

/// Cap on the number of plain-texts enumerated.
pub const SPACE_LIMIT: u64 = 1 << 20;

/// Exact probability `num / 2^exp`.
#[derive(Debug, Clone, Copy)]
pub struct Dyadic {
    pub num: u64,
    pub exp: u8,
}

impl Dyadic {
    pub fn new(num: u64, exp: u8) -> Dyadic {
        debug_assert!(exp <= 63);
        Dyadic { num, exp }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / (1u64 << self.exp) as f64
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        (self.num as u128) << other.exp == (other.num as u128) << self.exp
    }
}

impl Eq for Dyadic {}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

/// Two plain-texts whose cryptogram-word distributions differ at one step.
#[derive(Debug, Clone)]
pub struct SecrecyWitness {
    /// 1-based step index.
    pub step: usize,
    pub x1: Sequence,
    pub x2: Sequence,
    /// A word whose probability differs.
    pub word: Word,
    /// Probability of `word` at `step` under `x1`.
    pub p1: Dyadic,
    /// Probability under `x2`.
    pub p2: Dyadic,
}

impl fmt::Display for SecrecyWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {}: P(Y={} | x={}) = {} but P(Y={} | x={}) = {}",
            self.step, self.word, self.x1, self.p1, self.word, self.x2, self.p2
        )
    }
}

#[derive(Debug, Clone)]
pub enum SecrecyVerdict {
    Secure,
    Insecure(SecrecyWitness),
}

impl SecrecyVerdict {
    pub fn is_secure(&self) -> bool {
        matches!(self, SecrecyVerdict::Secure)
    }
}

/// Two plain-texts sharing initial state, key words, cryptogram, and final
/// state.
#[derive(Debug, Clone)]
pub struct IlWitness {
    pub n: usize,
    pub x1: Sequence,
    pub x2: Sequence,
    /// Raw tape bits realizing the collision.
    pub tape: BitString,
}

impl fmt::Display for IlWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n = {}: x = {} and x' = {} collide under tape {}",
            self.n,
            self.x1,
            self.x2,
            if self.tape.len() == 0 { "-".to_string() } else { self.tape.to_string() }
        )
    }
}

#[derive(Debug, Clone)]
pub enum IlVerdict {
    Lossless,
    NotLossless(IlWitness),
}

impl IlVerdict {
    pub fn is_lossless(&self) -> bool {
        matches!(self, IlVerdict::Lossless)
    }
}

/// Per-step word distribution as exact tape counts; dense when the step's
/// words share one short length, sparse otherwise.
enum StepDist {
    Dense { len: u8, counts: Vec<u64> },
    Sparse(HashMap<Word, u64>),
}

impl StepDist {
    fn pairs(&self) -> Vec<(Word, u64)> {
        match self {
            StepDist::Dense { len, counts } => counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (Word::new(*len, i as u64), c))
                .collect(),
            StepDist::Sparse(map) => {
                let mut v: Vec<(Word, u64)> = map.iter().map(|(&w, &c)| (w, c)).collect();
                v.sort_unstable();
                v
            }
        }
    }
}

fn step_dist(spec: &EncrypterSpec, z: State, x: u8, demand: u8) -> StepDist {
    let total: u64 = 1u64 << demand;
    let first = spec.output(z, x, Word::new(demand, 0));
    if first.len() <= 20 {
        let len = first.len();
        let mut counts = vec![0u64; 1usize << len];
        counts[first.bits() as usize] = 1;
        let mut k = 1u64;
        while k < total {
            let w = spec.output(z, x, Word::new(demand, k));
            if w.len() != len {
                break;
            }
            counts[w.bits() as usize] += 1;
            k += 1;
        }
        if k == total {
            return StepDist::Dense { len, counts };
        }
    }
    let mut map: HashMap<Word, u64> = HashMap::new();
    for k in 0..total {
        *map.entry(spec.output(z, x, Word::new(demand, k))).or_insert(0) += 1;
    }
    StepDist::Sparse(map)
}

fn prob_eq(c1: u64, d1: u8, c2: u64, d2: u8) -> bool {
    (c1 as u128) << d2 == (c2 as u128) << d1
}

/// First word whose probability differs, with both probabilities.
fn dist_difference(
    a: &StepDist,
    da: u8,
    b: &StepDist,
    db: u8,
) -> Option<(Word, Dyadic, Dyadic)> {
    if let (StepDist::Dense { len: la, counts: ca }, StepDist::Dense { len: lb, counts: cb }) =
        (a, b)
    {
        if la == lb {
            for (i, (&x, &y)) in ca.iter().zip(cb).enumerate() {
                if !prob_eq(x, da, y, db) {
                    return Some((
                        Word::new(*la, i as u64),
                        Dyadic::new(x, da),
                        Dyadic::new(y, db),
                    ));
                }
            }
            return None;
        }
    }
    let pa = a.pairs();
    let pb = b.pairs();
    let mb: HashMap<Word, u64> = pb.iter().copied().collect();
    for &(w, ca) in &pa {
        let cb = mb.get(&w).copied().unwrap_or(0);
        if !prob_eq(ca, da, cb, db) {
            return Some((w, Dyadic::new(ca, da), Dyadic::new(cb, db)));
        }
    }
    let ma: HashMap<Word, u64> = pa.iter().copied().collect();
    for &(w, cb) in &pb {
        if !ma.contains_key(&w) && cb > 0 {
            return Some((w, Dyadic::new(0, da), Dyadic::new(cb, db)));
        }
    }
    None
}

fn space(spec: &EncrypterSpec, n: usize) -> Result<u64> {
    let count = spec
        .alphabet()
        .sequence_count(n)
        .filter(|&c| c <= SPACE_LIMIT)
        .ok_or(Error::GuardExceeded {
            work: spec.alphabet().sequence_count(n).map(u128::from).unwrap_or(u128::MAX),
            limit: SPACE_LIMIT as u128,
        })?;
    Ok(count)
}

/// Demands along the state path of every plain-text, with the total
/// enumeration work for steps `lo..=hi` (1-based, inclusive).
fn demand_profiles(
    spec: &EncrypterSpec,
    n: usize,
    lo: usize,
    hi: usize,
) -> Result<(u64, u128)> {
    let count = space(spec, n)?;
    let mut work: u128 = count as u128 * n as u128;
    for idx in 0..count {
        let x = Sequence::from_index(spec.alphabet(), n, idx)?;
        let mut z = spec.initial_state();
        for (i, &xi) in x.symbols().iter().enumerate() {
            if i + 1 >= lo && i + 1 <= hi {
                work += 1u128 << spec.key_demand(z, xi);
            }
            z = spec.next_state(z, xi);
        }
        if work > WORK_LIMIT {
            return Err(Error::GuardExceeded { work, limit: WORK_LIMIT });
        }
    }
    Ok((count, work))
}

/// Checks steps `lo..=hi` across all plain-texts of length `n`; entry `i`
/// is a witness that step `lo + i` leaks.
fn step_witnesses(
    spec: &EncrypterSpec,
    n: usize,
    lo: usize,
    hi: usize,
) -> Result<Vec<Option<SecrecyWitness>>> {
    let (count, _work) = demand_profiles(spec, n, lo, hi)?;
    let steps = hi - lo + 1;
    let mut refs: Vec<Option<(u8, StepDist)>> = (0..steps).map(|_| None).collect();
    let mut witnesses: Vec<Option<SecrecyWitness>> = vec![None; steps];
    let reference_x = Sequence::from_index(spec.alphabet(), n, 0)?;
    for idx in 0..count {
        let x = Sequence::from_index(spec.alphabet(), n, idx)?;
        let mut z = spec.initial_state();
        for (i, &xi) in x.symbols().iter().enumerate() {
            let step = i + 1;
            if step >= lo && step <= hi {
                let si = step - lo;
                if witnesses[si].is_none() {
                    let d = spec.key_demand(z, xi);
                    let dist = step_dist(spec, z, xi, d);
                    match &refs[si] {
                        None => refs[si] = Some((d, dist)),
                        Some((dref, rdist)) => {
                            if let Some((w, p1, p2)) = dist_difference(rdist, *dref, &dist, d) {
                                witnesses[si] = Some(SecrecyWitness {
                                    step,
                                    x1: reference_x.clone(),
                                    x2: x.clone(),
                                    word: w,
                                    p1,
                                    p2,
                                });
                            }
                        }
                    }
                }
            }
            z = spec.next_state(z, xi);
        }
    }
    Ok(witnesses)
}

/// Exhaustively decides whether the distribution of cryptogram words
/// `Y_a..Y_b` is identical for every plain-text of length `n`.
pub fn check_perfect_secrecy(
    spec: &EncrypterSpec,
    n: usize,
    window: (usize, usize),
) -> Result<SecrecyVerdict> {
    let (a, b) = window;
    if !(1 <= a && a <= b && b <= n) {
        return Err(Error::InvalidParameter(format!(
            "window ({}, {}) not within 1..={}",
            a, b, n
        )));
    }
    let witnesses = step_witnesses(spec, n, a, b)?;
    Ok(match witnesses.into_iter().flatten().next() {
        Some(w) => SecrecyVerdict::Insecure(w),
        None => SecrecyVerdict::Secure,
    })
}

/// Verdicts for every window `(a, b)` with `1 <= a <= b <= n`, computed
/// from one pass of per-step checks.
pub fn secrecy_sweep(
    spec: &EncrypterSpec,
    n: usize,
) -> Result<Vec<((usize, usize), SecrecyVerdict)>> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let steps = step_witnesses(spec, n, 1, n)?;
    let mut out = Vec::new();
    for a in 1..=n {
        for b in a..=n {
            let hit = steps[a - 1..b].iter().flatten().next();
            out.push((
                (a, b),
                match hit {
                    Some(w) => SecrecyVerdict::Insecure(w.clone()),
                    None => SecrecyVerdict::Secure,
                },
            ));
        }
    }
    Ok(out)
}

/// Exact distribution of the word tuple `Y_a..Y_b` for one plain-text, as
/// the product of per-step distributions; for small windows only.
pub fn window_distribution(
    spec: &EncrypterSpec,
    x: &Sequence,
    window: (usize, usize),
) -> Result<Vec<(Vec<Word>, Dyadic)>> {
    let (a, b) = window;
    if !(1 <= a && a <= b && b <= x.len()) {
        return Err(Error::InvalidParameter(format!(
            "window ({}, {}) not within 1..={}",
            a,
            b,
            x.len()
        )));
    }
    let path = spec.state_path(x)?;
    let mut exp_total: u32 = 0;
    let mut tuples: Vec<(Vec<Word>, u64)> = vec![(Vec::new(), 1)];
    for i in a..=b {
        let z = path[i - 1];
        let xi = x.symbols()[i - 1];
        let d = spec.key_demand(z, xi);
        exp_total += d as u32;
        if exp_total > 63 {
            return Err(Error::GuardExceeded { work: 1u128 << exp_total, limit: 1 << 63 });
        }
        let pairs = step_dist(spec, z, xi, d).pairs();
        let mut next = Vec::with_capacity(tuples.len() * pairs.len());
        for (tuple, c) in &tuples {
            for &(w, cw) in &pairs {
                let mut t = tuple.clone();
                t.push(w);
                next.push((t, c * cw));
            }
        }
        if next.len() > 1 << 16 {
            return Err(Error::GuardExceeded { work: next.len() as u128, limit: 1 << 16 });
        }
        tuples = next;
    }
    tuples.sort();
    Ok(tuples
        .into_iter()
        .map(|(t, c)| (t, Dyadic::new(c, exp_total as u8)))
        .collect())
}

/// Exhaustively checks that (initial state, key words, cryptogram words,
/// final state) determine the plain-text, for every length in
/// `n_min..=n_max`.
///
/// Plain-texts with different key-demand profiles can never collide (their
/// key-word sequences differ as words), so the search groups by profile and
/// enumerates tapes within each group.
pub fn check_information_lossless(
    spec: &EncrypterSpec,
    n_min: usize,
    n_max: usize,
) -> Result<IlVerdict> {
    if !(1 <= n_min && n_min <= n_max) {
        return Err(Error::InvalidParameter(format!(
            "bad length range {}..={}",
            n_min, n_max
        )));
    }
    let mut work: u128 = 0;
    for n in n_min..=n_max {
        let count = space(spec, n)?;
        work += count as u128 * n as u128;
        // Group plain-texts by demand profile.
        let mut groups: BTreeMap<Vec<u8>, Vec<u64>> = BTreeMap::new();
        for idx in 0..count {
            let x = Sequence::from_index(spec.alphabet(), n, idx)?;
            let mut profile = Vec::with_capacity(n);
            let mut z = spec.initial_state();
            for &xi in x.symbols() {
                profile.push(spec.key_demand(z, xi));
                z = spec.next_state(z, xi);
            }
            groups.entry(profile).or_default().push(idx);
        }
        for (profile, group) in &groups {
            if group.len() < 2 {
                continue;
            }
            let total: u32 = profile.iter().map(|&d| d as u32).sum();
            if total > 63 {
                return Err(Error::GuardExceeded { work: 1u128 << 64, limit: WORK_LIMIT });
            }
            work += (group.len() as u128) << total;
            if work > WORK_LIMIT {
                return Err(Error::GuardExceeded { work, limit: WORK_LIMIT });
            }
            let members: Vec<(Sequence, Vec<State>)> = group
                .iter()
                .map(|&idx| {
                    let x = Sequence::from_index(spec.alphabet(), n, idx)?;
                    let path = spec.state_path(&x)?;
                    Ok((x, path))
                })
                .collect::<Result<_>>()?;
            for u in 0..1u64 << total {
                let mut seen: HashMap<(Vec<Word>, State), usize> = HashMap::new();
                for (mi, (x, path)) in members.iter().enumerate() {
                    let mut words = Vec::with_capacity(n);
                    let mut used: u32 = 0;
                    for (i, &xi) in x.symbols().iter().enumerate() {
                        let d = profile[i] as u32;
                        used += d;
                        let k = (u >> (total - used)) & ((1u64 << d) - 1).max(0);
                        words.push(spec.output(path[i], xi, Word::new(d as u8, k)));
                    }
                    let sig = (words, path[n]);
                    if let Some(&prev) = seen.get(&sig) {
                        return Ok(IlVerdict::NotLossless(IlWitness {
                            n,
                            x1: members[prev].0.clone(),
                            x2: x.clone(),
                            tape: BitString::from_uint(u, total),
                        }));
                    }
                    seen.insert(sig, mi);
                }
            }
        }
    }
    Ok(IlVerdict::Lossless)
}
