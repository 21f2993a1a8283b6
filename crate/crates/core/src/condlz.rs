//! Joint parsing of a (sequence, side-information) pair and a conditional
//! codec whose decoder knows the side sequence.
//!
//! The pair sequence `((x_1, s_1), ..., (x_n, s_n))` is parsed incrementally
//! over the product alphabet. Grouping the joint phrases by their
//! side-sequence projection gives per-group counts `c_l`; the conditional
//! complexity is `(1/n) * sum_l c_l * log2(c_l)`.
//!
//! Codec layout, per joint phrase: an optional completeness flag (present
//! only when the side-trie walk could also explain an incomplete final
//! phrase), the new literal `x` symbol, then an index into the list of
//! candidate parent nodes. Candidates are dictionary nodes whose side
//! projection matches the upcoming side symbols and which the literal would
//! exit into a fresh dictionary slot; both ends enumerate them identically
//! (deepest first, then insertion order), so the index width adapts to the
//! group sizes and no phrase-boundary field is ever transmitted. When every
//! group is a singleton the candidate list collapses and the index costs
//! zero bits.

use std::collections::HashMap;

use crate::alphabet::{ceil_log2, Alphabet, Sequence};
use crate::bits::{BitReader, BitString};
use crate::error::{Error, Result};

/// Outcome of jointly parsing `(x, s)`.
#[derive(Debug, Clone)]
pub struct JointParseResult {
    /// Joint phrases as (x-projection, s-projection) pairs, parse order.
    pub joint_phrases: Vec<(Vec<u8>, Vec<u8>)>,
    /// Joint phrase count `c(x, s)`, incomplete final phrase included.
    pub c_xs: usize,
    /// Number of distinct s-projections `c(s)`.
    pub c_s: usize,
    /// `c_l` per distinct s-phrase, ordered by first occurrence; sums to
    /// `c_xs`.
    pub group_counts: Vec<usize>,
    /// Whether the final joint phrase ended as a new dictionary entry.
    pub last_complete: bool,
    /// `(1/n) * sum_l c_l * log2(c_l)`.
    pub conditional_complexity: f64,
}

#[derive(Debug, Clone, Copy)]
struct JNode {
    parent: u32,
    xsym: u8,
    depth: u32,
    snode: u32,
}

/// Joint-phrase trie plus the trie of side projections. Every joint node is
/// a member of exactly one side node; member lists keep insertion order.
struct JointDict {
    children: HashMap<(u32, u8, u8), u32>,
    nodes: Vec<JNode>,
    s_children: HashMap<(u32, u8), u32>,
    s_members: Vec<Vec<u32>>,
}

impl JointDict {
    fn new() -> Self {
        JointDict {
            children: HashMap::new(),
            nodes: vec![JNode { parent: 0, xsym: 0, depth: 0, snode: 0 }],
            s_children: HashMap::new(),
            s_members: vec![vec![0]],
        }
    }

    fn child(&self, node: u32, xsym: u8, ssym: u8) -> Option<u32> {
        self.children.get(&(node, xsym, ssym)).copied()
    }

    fn insert(&mut self, node: u32, xsym: u8, ssym: u8) -> u32 {
        let id = self.nodes.len() as u32;
        let parent_snode = self.nodes[node as usize].snode;
        let snode = match self.s_children.get(&(parent_snode, ssym)) {
            Some(&sn) => sn,
            None => {
                let sn = self.s_members.len() as u32;
                self.s_children.insert((parent_snode, ssym), sn);
                self.s_members.push(Vec::new());
                sn
            }
        };
        self.s_members[snode as usize].push(id);
        self.nodes.push(JNode {
            parent: node,
            xsym,
            depth: self.nodes[node as usize].depth + 1,
            snode,
        });
        self.children.insert((node, xsym, ssym), id);
        id
    }

    /// Side-trie walk from the root along `s[i..]`, at most `max_depth`
    /// steps. `path[k]` is the side node at depth `k + 1`.
    fn s_path(&self, s: &[u8], i: usize, max_depth: usize) -> Vec<u32> {
        let mut path = Vec::new();
        let mut sn = 0u32;
        for k in 0..max_depth {
            match self.s_children.get(&(sn, s[i + k])) {
                Some(&c) => {
                    sn = c;
                    path.push(c);
                }
                None => break,
            }
        }
        path
    }

    /// Parent candidates for a complete phrase starting at `i` with literal
    /// `a`: nodes on the side-compatible path from which the pair
    /// `(a, s[i + depth])` exits the dictionary. Deepest first.
    fn candidates(&self, s: &[u8], i: usize, path: &[u32], r: usize, a: u8) -> Vec<(usize, u32)> {
        let mut v = Vec::new();
        let top = path.len().min(r - 1);
        for depth in (0..=top).rev() {
            let sn = if depth == 0 { 0 } else { path[depth - 1] };
            for &w in &self.s_members[sn as usize] {
                if self.child(w, a, s[i + depth]).is_none() {
                    v.push((depth, w));
                }
            }
        }
        v
    }

    fn x_string(&self, mut node: u32) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.nodes[node as usize].depth as usize);
        while node != 0 {
            let n = self.nodes[node as usize];
            out.push(n.xsym);
            node = n.parent;
        }
        out.reverse();
        out
    }
}

fn check_pair(x: &Sequence, s: &Sequence) -> Result<()> {
    if x.len() != s.len() {
        return Err(Error::LengthMismatch(x.len(), s.len()));
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Parses the pair sequence and reports the group structure.
pub fn joint_parse(x: &Sequence, s: &Sequence) -> Result<JointParseResult> {
    check_pair(x, s)?;
    let xs = x.symbols();
    let ss = s.symbols();
    let n = xs.len();

    let mut dict = JointDict::new();
    let mut joint_phrases = Vec::new();
    let mut last_complete = true;
    let mut incomplete_snode: Option<u32> = None;

    let mut i = 0;
    while i < n {
        let mut u = 0u32;
        let mut j = 0usize;
        while i + j < n {
            match dict.child(u, xs[i + j], ss[i + j]) {
                Some(c) => {
                    u = c;
                    j += 1;
                }
                None => break,
            }
        }
        if i + j == n {
            // Input exhausted mid-walk: incomplete final phrase at node u.
            joint_phrases.push((xs[i..].to_vec(), ss[i..].to_vec()));
            last_complete = false;
            incomplete_snode = Some(dict.nodes[u as usize].snode);
            break;
        }
        dict.insert(u, xs[i + j], ss[i + j]);
        joint_phrases.push((xs[i..=i + j].to_vec(), ss[i..=i + j].to_vec()));
        i += j + 1;
    }

    let mut group_counts: Vec<usize> =
        dict.s_members.iter().skip(1).map(|m| m.len()).collect();
    if let Some(sn) = incomplete_snode {
        group_counts[sn as usize - 1] += 1;
    }
    let c_s = group_counts.len();
    let c_xs = joint_phrases.len();
    debug_assert_eq!(group_counts.iter().sum::<usize>(), c_xs);

    let sum: f64 = group_counts
        .iter()
        .map(|&c| if c > 1 { c as f64 * (c as f64).log2() } else { 0.0 })
        .sum();
    Ok(JointParseResult {
        joint_phrases,
        c_xs,
        c_s,
        group_counts,
        last_complete,
        conditional_complexity: sum / n as f64,
    })
}

/// `(1/n) * sum_l c_l * log2(c_l)`.
pub fn conditional_complexity(x: &Sequence, s: &Sequence) -> Result<f64> {
    Ok(joint_parse(x, s)?.conditional_complexity)
}

/// Encodes `x` so that a decoder holding `s` can reconstruct it.
pub fn cond_encode(x: &Sequence, s: &Sequence) -> Result<BitString> {
    check_pair(x, s)?;
    let xs = x.symbols();
    let ss = s.symbols();
    let n = xs.len();
    let sym_width = x.alphabet().symbol_width();

    let mut dict = JointDict::new();
    let mut out = BitString::new();

    let mut i = 0;
    while i < n {
        let r = n - i;
        let path = dict.s_path(ss, i, r);
        let may_be_incomplete = path.len() == r;

        let mut u = 0u32;
        let mut j = 0usize;
        while i + j < n {
            match dict.child(u, xs[i + j], ss[i + j]) {
                Some(c) => {
                    u = c;
                    j += 1;
                }
                None => break,
            }
        }

        if i + j == n {
            // Incomplete final phrase: identified by its slot in the member
            // list of the side node covering the whole remainder.
            debug_assert!(may_be_incomplete && j == r);
            out.push(true);
            let members = &dict.s_members[path[r - 1] as usize];
            let idx = members.iter().position(|&m| m == u).expect("member");
            out.push_uint(idx as u64, ceil_log2(members.len() as u64));
            break;
        }

        if may_be_incomplete {
            out.push(false);
        }
        let a = xs[i + j];
        out.push_uint(a as u64, sym_width);
        let cands = dict.candidates(ss, i, &path, r, a);
        let idx = cands
            .iter()
            .position(|&(d, w)| d == j && w == u)
            .expect("true parent is a candidate");
        out.push_uint(idx as u64, ceil_log2(cands.len() as u64));
        dict.insert(u, a, ss[i + j]);
        i += j + 1;
    }
    Ok(out)
}

/// Inverse of [`cond_encode`] given the same side sequence.
pub fn cond_decode(
    bits: &BitString,
    s: &Sequence,
    x_alphabet: Alphabet,
    n: usize,
) -> Result<Sequence> {
    if s.len() != n {
        return Err(Error::LengthMismatch(n, s.len()));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let ss = s.symbols();
    let sym_width = x_alphabet.symbol_width();

    let mut dict = JointDict::new();
    let mut reader = BitReader::new(bits);
    let mut out: Vec<u8> = Vec::with_capacity(n);

    let mut i = 0;
    while i < n {
        let r = n - i;
        let path = dict.s_path(ss, i, r);
        let may_be_incomplete = path.len() == r;

        if may_be_incomplete && reader.read_bit()? {
            let members = &dict.s_members[path[r - 1] as usize];
            let idx = reader.read_uint(ceil_log2(members.len() as u64))? as usize;
            if idx >= members.len() {
                return Err(Error::MalformedStream(format!(
                    "final-phrase index {} of {}",
                    idx,
                    members.len()
                )));
            }
            out.extend_from_slice(&dict.x_string(members[idx]));
            break;
        }

        let a = reader.read_uint(sym_width)? as u8;
        x_alphabet
            .check(a)
            .map_err(|_| Error::MalformedStream(format!("literal {} out of range", a)))?;
        let cands = dict.candidates(ss, i, &path, r, a);
        if cands.is_empty() {
            return Err(Error::MalformedStream(
                "no candidate parent matches the side sequence".into(),
            ));
        }
        let idx = reader.read_uint(ceil_log2(cands.len() as u64))? as usize;
        if idx >= cands.len() {
            return Err(Error::MalformedStream(format!(
                "candidate index {} of {}",
                idx,
                cands.len()
            )));
        }
        let (j, u) = cands[idx];
        out.extend_from_slice(&dict.x_string(u));
        out.push(a);
        dict.insert(u, a, ss[i + j]);
        i += j + 1;
    }

    if reader.remaining() > 0 {
        return Err(Error::MalformedStream(format!(
            "{} unconsumed bits",
            reader.remaining()
        )));
    }
    Sequence::new(x_alphabet, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bseq(s: &str) -> Sequence {
        Sequence::binary_str(s).unwrap()
    }

    /// Independent oracle: quadratic pair parser plus string-keyed grouping.
    fn oracle_groups(x: &[u8], s: &[u8]) -> (usize, Vec<(Vec<u8>, usize)>) {
        let mut phrases: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
        let mut cur: (Vec<u8>, Vec<u8>) = (vec![], vec![]);
        for (&a, &b) in x.iter().zip(s) {
            cur.0.push(a);
            cur.1.push(b);
            if !phrases.contains(&cur) {
                phrases.push(std::mem::take(&mut cur));
            }
        }
        if !cur.0.is_empty() {
            phrases.push(cur);
        }
        let c_xs = phrases.len();
        let mut order: Vec<Vec<u8>> = Vec::new();
        let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
        for (_, sp) in &phrases {
            if !counts.contains_key(sp) {
                order.push(sp.clone());
            }
            *counts.entry(sp.clone()).or_insert(0) += 1;
        }
        (c_xs, order.into_iter().map(|sp| { let c = counts[&sp]; (sp, c) }).collect())
    }

    #[test]
    fn worked_pair_example() {
        let x = bseq("010001");
        let s = bseq("010101");
        let r = joint_parse(&x, &s).unwrap();
        let want: Vec<(Vec<u8>, Vec<u8>)> = vec![
            (vec![0], vec![0]),
            (vec![1], vec![1]),
            (vec![0, 0], vec![0, 1]),
            (vec![0, 1], vec![0, 1]),
        ];
        assert_eq!(r.joint_phrases, want);
        assert_eq!(r.c_xs, 4);
        assert_eq!(r.c_s, 3);
        assert_eq!(r.group_counts, vec![1, 1, 2]);
        assert!(r.last_complete);
        // 2 * log2(2) / 6, exact in binary floating point.
        assert_eq!(r.conditional_complexity, 2.0 / 6.0);
    }

    #[test]
    fn worked_pair_example_codec() {
        let x = bseq("010001");
        let s = bseq("010101");
        let bits = cond_encode(&x, &s).unwrap();
        // Four 1-bit literals, one completeness flag, one 1-bit candidate
        // index (frozen from the token accounting).
        assert_eq!(bits.len(), 6);
        assert_eq!(cond_decode(&bits, &s, Alphabet::BINARY, 6).unwrap(), x);
    }

    #[test]
    fn zero_complexity_for_symbolwise_functions_of_side() {
        // When x is a symbolwise function of s, every complete phrase sits
        // alone in its group. An incomplete final phrase duplicates one
        // group member, contributing exactly 2*log2(2)/n.
        for n in 1..=32usize {
            let x: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
            let seq = Sequence::binary(&x).unwrap();
            let compl =
                Sequence::binary(&x.iter().map(|&b| 1 - b).collect::<Vec<_>>()).unwrap();
            let zeros = Sequence::binary(&vec![0u8; n]).unwrap();
            for v in [&seq, &compl, &zeros] {
                let r = joint_parse(v, &seq).unwrap();
                let want = if r.last_complete { 0.0 } else { 2.0 / n as f64 };
                assert_eq!(r.conditional_complexity, want, "n = {}", n);
            }
        }
    }

    #[test]
    fn constant_input_with_full_side_information_costs_only_literals() {
        // Candidate indices are all width zero here, so each complete
        // phrase costs one literal; an incomplete final phrase costs one
        // flag bit instead of a literal.
        let expect = |alpha: Alphabet, x: &Sequence| {
            let r = joint_parse(x, x).unwrap();
            let w = alpha.symbol_width() as usize;
            if r.last_complete {
                r.c_xs * w
            } else {
                (r.c_xs - 1) * w + 1
            }
        };
        for n in 1..=16usize {
            let x = Sequence::binary(&vec![0u8; n]).unwrap();
            let bits = cond_encode(&x, &x).unwrap();
            assert_eq!(bits.len(), expect(Alphabet::BINARY, &x), "n = {}", n);
            assert_eq!(cond_decode(&bits, &x, Alphabet::BINARY, n).unwrap(), x);
        }
        let a4 = Alphabet::new(4).unwrap();
        for n in 1..=16usize {
            let x = Sequence::new(a4, vec![3; n]).unwrap();
            let bits = cond_encode(&x, &x).unwrap();
            assert_eq!(bits.len(), expect(a4, &x), "n = {}", n);
            assert_eq!(cond_decode(&bits, &x, a4, n).unwrap(), x);
        }
    }

    #[test]
    fn full_side_information_cost_envelope() {
        // With s = x every group is a singleton; the candidate index can
        // still cost bits where shallower exits stay plausible, but never
        // more than one extra bit per phrase at these sizes.
        for n in 1..=10usize {
            for v in 0u32..1 << n {
                let x = Sequence::binary(
                    &(0..n).map(|i| ((v >> (n - 1 - i)) & 1) as u8).collect::<Vec<_>>(),
                )
                .unwrap();
                let r = joint_parse(&x, &x).unwrap();
                let bits = cond_encode(&x, &x).unwrap();
                assert!(bits.len() <= 2 * r.c_xs + 1, "x = {}", x);
                assert_eq!(cond_decode(&bits, &x, Alphabet::BINARY, n).unwrap(), x);
            }
        }
    }

    #[test]
    fn exhaustive_pair_round_trips() {
        for n in 1..=7usize {
            for xv in 0u32..1 << n {
                let x = Sequence::binary(
                    &(0..n).map(|i| ((xv >> (n - 1 - i)) & 1) as u8).collect::<Vec<_>>(),
                )
                .unwrap();
                for sv in 0u32..1 << n {
                    let s = Sequence::binary(
                        &(0..n).map(|i| ((sv >> (n - 1 - i)) & 1) as u8).collect::<Vec<_>>(),
                    )
                    .unwrap();
                    let r = joint_parse(&x, &s).unwrap();
                    assert_eq!(r.group_counts.iter().sum::<usize>(), r.c_xs);
                    // Log-sum bound.
                    let lhs: f64 = r
                        .group_counts
                        .iter()
                        .map(|&c| c as f64 * (c as f64).max(1.0).log2())
                        .sum();
                    let rhs = r.c_xs as f64 * (r.c_xs as f64).log2();
                    assert!(lhs <= rhs + 1e-9);
                    // Oracle agreement.
                    let (oc, ogroups) = oracle_groups(x.symbols(), s.symbols());
                    assert_eq!(r.c_xs, oc);
                    assert_eq!(r.c_s, ogroups.len());
                    assert_eq!(
                        r.group_counts,
                        ogroups.iter().map(|&(_, c)| c).collect::<Vec<_>>()
                    );
                    // Codec identity.
                    let bits = cond_encode(&x, &s).unwrap();
                    assert_eq!(cond_decode(&bits, &s, Alphabet::BINARY, n).unwrap(), x);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = bseq("010");
        let s = bseq("01");
        assert!(matches!(joint_parse(&x, &s), Err(Error::LengthMismatch(3, 2))));
        assert!(matches!(cond_encode(&x, &s), Err(Error::LengthMismatch(3, 2))));
        let e = Sequence::binary(&[]).unwrap();
        assert!(matches!(joint_parse(&e, &e), Err(Error::EmptyInput)));
    }

    #[test]
    fn decode_rejects_corrupt_streams() {
        let x = bseq("01000110");
        let s = bseq("01010101");
        let bits = cond_encode(&x, &s).unwrap();
        let cut = bits.slice(0, bits.len() - 1);
        assert!(cond_decode(&cut, &s, Alphabet::BINARY, 8).is_err());
        let mut extended = bits.clone();
        extended.push(false);
        assert!(cond_decode(&extended, &s, Alphabet::BINARY, 8).is_err());
        assert!(cond_decode(&bits, &bseq("0101010"), Alphabet::BINARY, 8).is_err());
    }

    proptest! {
        #[test]
        fn prop_pair_round_trip(
            pairs in proptest::collection::vec((0u8..2, 0u8..2), 1..250)
        ) {
            let x = Sequence::binary(&pairs.iter().map(|p| p.0).collect::<Vec<_>>()).unwrap();
            let s = Sequence::binary(&pairs.iter().map(|p| p.1).collect::<Vec<_>>()).unwrap();
            let bits = cond_encode(&x, &s).unwrap();
            prop_assert_eq!(cond_decode(&bits, &s, Alphabet::BINARY, x.len()).unwrap(), x);
        }

        #[test]
        fn prop_mixed_alphabet_round_trip(
            pairs in proptest::collection::vec((0u8..5, 0u8..3), 1..150)
        ) {
            let a5 = Alphabet::new(5).unwrap();
            let a3 = Alphabet::new(3).unwrap();
            let x = Sequence::new(a5, pairs.iter().map(|p| p.0).collect()).unwrap();
            let s = Sequence::new(a3, pairs.iter().map(|p| p.1).collect()).unwrap();
            let bits = cond_encode(&x, &s).unwrap();
            prop_assert_eq!(cond_decode(&bits, &s, a5, x.len()).unwrap(), x);
        }

        #[test]
        fn prop_group_counts_sum(
            pairs in proptest::collection::vec((0u8..2, 0u8..2), 1..200)
        ) {
            let x = Sequence::binary(&pairs.iter().map(|p| p.0).collect::<Vec<_>>()).unwrap();
            let s = Sequence::binary(&pairs.iter().map(|p| p.1).collect::<Vec<_>>()).unwrap();
            let r = joint_parse(&x, &s).unwrap();
            prop_assert_eq!(r.group_counts.iter().sum::<usize>(), r.c_xs);
            prop_assert!(r.conditional_complexity >= 0.0);
            let rho_x = crate::lz78::lz_complexity(&x).unwrap();
            // Conditioning never looks worse than the log-sum bound allows.
            let joint_bound = r.c_xs as f64 * (r.c_xs as f64).log2() / (x.len() as f64);
            prop_assert!(r.conditional_complexity <= joint_bound + 1e-9);
            let _ = rho_x;
        }
    }
}
