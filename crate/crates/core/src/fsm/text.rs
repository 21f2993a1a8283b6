//! Line-based text format for table-backed encrypter machines.
//!
//! ```text
//! # comments and blank lines are ignored
//! alpha 2
//! states 1
//! initial 0
//! trans 0 0 -> 0 1        # state symbol -> next-state key-demand
//! trans 0 1 -> 0 1
//! out 0 0 0 -> 1          # state symbol key-word -> output-word
//! out 0 0 1 -> 0
//! out 0 1 0 -> 0
//! out 0 1 1 -> 1
//! ```
//!
//! Words are written MSB-first as 0/1 runs, with `-` for the null word.
//! Every (state, symbol) needs one `trans` line, and every (state, symbol,
//! key word of the demanded length) one `out` line; totality is validated
//! on load.

use std::collections::HashMap;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::fsm::{EncrypterSpec, State, Word, MAX_WORD_BITS};

fn spec_err(line: usize, msg: impl Into<String>) -> Error {
    Error::InvalidSpec { line, msg: msg.into() }
}

fn parse_word(tok: &str, line: usize) -> Result<Word> {
    if tok == "-" {
        return Ok(Word::NULL);
    }
    if tok.is_empty() || tok.len() > MAX_WORD_BITS as usize {
        return Err(spec_err(line, format!("bad word {:?}", tok)));
    }
    let mut bits = 0u64;
    for ch in tok.chars() {
        match ch {
            '0' => bits <<= 1,
            '1' => bits = bits << 1 | 1,
            _ => return Err(spec_err(line, format!("bad word {:?}", tok))),
        }
    }
    Ok(Word::new(tok.len() as u8, bits))
}

fn word_text(w: Word) -> String {
    w.to_string()
}

/// Parses the text format; errors carry 1-based line numbers.
pub fn parse(input: &str) -> Result<EncrypterSpec> {
    let mut alpha: Option<(usize, u32)> = None;
    let mut states: Option<(usize, u32)> = None;
    let mut initial: Option<(usize, State)> = None;
    let mut trans: Vec<(usize, State, u8, State, u8)> = Vec::new();
    let mut outs: Vec<(usize, State, u8, Word, Word)> = Vec::new();

    for (lineno, raw) in input.lines().enumerate() {
        let line = lineno + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let parse_num = |tok: &str, what: &str| -> Result<u64> {
            tok.parse::<u64>()
                .ok()
                .filter(|&v| v < 1 << 31)
                .ok_or_else(|| spec_err(line, format!("bad {} {:?}", what, tok)))
        };
        match toks[0] {
            "alpha" | "states" | "initial" => {
                if toks.len() != 2 {
                    return Err(spec_err(line, format!("{} takes one value", toks[0])));
                }
                let v = parse_num(toks[1], toks[0])? as u32;
                let slot = match toks[0] {
                    "alpha" => &mut alpha,
                    "states" => &mut states,
                    _ => &mut initial,
                };
                if slot.is_some() {
                    return Err(spec_err(line, format!("duplicate {}", toks[0])));
                }
                *slot = Some((line, v));
            }
            "trans" => {
                if toks.len() != 6 || toks[3] != "->" {
                    return Err(spec_err(line, "expected: trans z x -> z' delta"));
                }
                trans.push((
                    line,
                    parse_num(toks[1], "state")? as State,
                    parse_num(toks[2], "symbol")? as u8,
                    parse_num(toks[4], "next state")? as State,
                    parse_num(toks[5], "key demand")? as u8,
                ));
            }
            "out" => {
                if toks.len() != 6 || toks[4] != "->" {
                    return Err(spec_err(line, "expected: out z x k -> y"));
                }
                outs.push((
                    line,
                    parse_num(toks[1], "state")? as State,
                    parse_num(toks[2], "symbol")? as u8,
                    parse_word(toks[3], line)?,
                    parse_word(toks[5], line)?,
                ));
            }
            other => return Err(spec_err(line, format!("unknown directive {:?}", other))),
        }
    }

    let (alpha_line, alpha) = alpha.ok_or_else(|| spec_err(0, "missing alpha"))?;
    let (_, state_count) = states.ok_or_else(|| spec_err(0, "missing states"))?;
    let (_, initial_state) = initial.ok_or_else(|| spec_err(0, "missing initial"))?;
    let alphabet = u16::try_from(alpha)
        .ok()
        .map(Alphabet::new)
        .transpose()?
        .ok_or_else(|| spec_err(alpha_line, format!("bad alpha {}", alpha)))?;
    if state_count == 0 {
        return Err(spec_err(0, "states must be positive"));
    }

    let a = alphabet.size() as usize;
    let cells = state_count as usize * a;
    let mut next = vec![None; cells];
    let mut demand = vec![None; cells];
    for (line, z, x, nz, d) in trans {
        if z >= state_count || x as u16 >= alphabet.size() {
            return Err(spec_err(line, "state or symbol out of range"));
        }
        let cell = z as usize * a + x as usize;
        if next[cell].is_some() {
            return Err(spec_err(line, format!("duplicate trans for state {} symbol {}", z, x)));
        }
        next[cell] = Some(nz);
        demand[cell] = Some(d);
    }
    let missing = next.iter().position(|v| v.is_none());
    if let Some(cell) = missing {
        return Err(spec_err(
            0,
            format!("missing trans for state {} symbol {}", cell / a, cell % a),
        ));
    }
    let next: Vec<State> = next.into_iter().map(|v| v.unwrap()).collect();
    let demand: Vec<u8> = demand.into_iter().map(|v| v.unwrap()).collect();

    let mut table: HashMap<(State, u8, Word), Word> = HashMap::new();
    for (line, z, x, k, y) in outs {
        if z >= state_count || x as u16 >= alphabet.size() {
            return Err(spec_err(line, "state or symbol out of range"));
        }
        let want = demand[z as usize * a + x as usize];
        if k.len() != want {
            return Err(spec_err(
                line,
                format!("key word {} has length {}, demand is {}", k, k.len(), want),
            ));
        }
        if table.insert((z, x, k), y).is_some() {
            return Err(spec_err(line, "duplicate out entry"));
        }
    }
    EncrypterSpec::from_table(alphabet, state_count, initial_state, next, demand, table)
}

/// Renders a machine in the text format; computed outputs are tabulated
/// first when feasible.
pub fn to_text(spec: &EncrypterSpec) -> Result<String> {
    let spec = spec.tabulate()?;
    let a = spec.alphabet().size() as u8;
    let mut out = String::new();
    out.push_str(&format!("alpha {}\n", spec.alphabet().size()));
    out.push_str(&format!("states {}\n", spec.state_count()));
    out.push_str(&format!("initial {}\n", spec.initial_state()));
    for z in 0..spec.state_count() {
        for x in 0..a {
            out.push_str(&format!(
                "trans {} {} -> {} {}\n",
                z,
                x,
                spec.next_state(z, x),
                spec.key_demand(z, x)
            ));
        }
    }
    for z in 0..spec.state_count() {
        for x in 0..a {
            let d = spec.key_demand(z, x);
            for k in 0u64..1 << d {
                let kw = Word::new(d, k);
                out.push_str(&format!(
                    "out {} {} {} -> {}\n",
                    z,
                    x,
                    word_text(kw),
                    word_text(spec.output(z, x, kw))
                ));
            }
        }
    }
    Ok(out)
}
