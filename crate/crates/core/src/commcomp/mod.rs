//! Two-party protocols for functions whose input positions are split
//! between Alice and Bob.
//!
//! A [`Protocol`] fixes who speaks first, the exact length of every message
//! and how each message splits into fixed-width big-endian fields (used only
//! to decode transcripts). Speakers alternate; a message depends on the
//! transcript so far and the speaker's own letters. The output is read off
//! the full transcript.

mod chase;
mod compile;

pub use chase::{embed_pointer_chasing, one_k_two_round, pointer_chase};
pub use compile::{full_disclosure, tree_to_protocol, tree_to_protocols};

use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use crate::domain::{Domain, Word};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        })
    }
}

/// Alice holds the positions in `S`, Bob the rest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PositionSplit {
    alice: Vec<bool>,
}

impl PositionSplit {
    /// `alice` lists 0-based positions below `n`.
    pub fn new(n: usize, alice: &[usize]) -> Result<Self> {
        let mut mask = vec![false; n];
        for &p in alice {
            *mask
                .get_mut(p)
                .ok_or_else(|| Error::invalid(format!("position {} outside 1..={n}", p + 1)))? = true;
        }
        Ok(PositionSplit { alice: mask })
    }

    /// Alice gets positions `1..=k`.
    pub fn prefix(n: usize, k: usize) -> Result<Self> {
        PositionSplit::new(n, &(0..k.min(n)).collect::<Vec<_>>())
    }

    /// Comma-separated 1-based positions, e.g. `"1,3,4"`; empty means Bob
    /// holds everything.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let positions = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s.parse::<usize>() {
                Ok(p) if p >= 1 => Ok(p - 1),
                _ => Err(Error::Parse(format!("bad position {s:?} in split"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PositionSplit::new(n, &positions)
    }

    pub fn n(&self) -> usize {
        self.alice.len()
    }

    pub fn owner(&self, position: usize) -> Party {
        if self.alice[position] {
            Party::Alice
        } else {
            Party::Bob
        }
    }

    pub fn positions(&self, party: Party) -> Vec<usize> {
        (0..self.n()).filter(|&p| self.owner(p) == party).collect()
    }

    /// What `party` sees of `w`.
    pub fn view(&self, party: Party, w: &Word) -> PartyView {
        PartyView {
            party,
            letters: w
                .0
                .iter()
                .enumerate()
                .map(|(p, &l)| (self.owner(p) == party).then_some(l))
                .collect(),
        }
    }
}

/// One party's half of the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyView {
    pub party: Party,
    /// Letter at each position the party owns, `None` elsewhere.
    pub letters: Vec<Option<usize>>,
}

impl PartyView {
    pub fn own(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.letters.iter().enumerate().filter_map(|(p, l)| l.map(|l| (p, l)))
    }
}

type MessageFn = dyn Fn(usize, &[bool], &PartyView) -> Result<Vec<bool>> + Send + Sync;
type OutputFn = dyn Fn(&[bool]) -> Result<usize> + Send + Sync;

pub struct Protocol {
    domain: Domain,
    split: PositionSplit,
    first: Party,
    /// Field widths of every round; a round's length is their sum.
    fields: Vec<Vec<usize>>,
    message: Box<MessageFn>,
    output: Box<OutputFn>,
}

impl fmt::Debug for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Protocol")
            .field("first", &self.first)
            .field("fields", &self.fields)
            .finish_non_exhaustive()
    }
}

impl Protocol {
    pub fn new(
        domain: Domain,
        split: PositionSplit,
        first: Party,
        fields: Vec<Vec<usize>>,
        message: impl Fn(usize, &[bool], &PartyView) -> Result<Vec<bool>> + Send + Sync + 'static,
        output: impl Fn(&[bool]) -> Result<usize> + Send + Sync + 'static,
    ) -> Result<Self> {
        if split.n() != domain.n() {
            return Err(Error::invalid("split and domain have different lengths"));
        }
        Ok(Protocol {
            domain,
            split,
            first,
            fields,
            message: Box::new(message),
            output: Box::new(output),
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn split(&self) -> &PositionSplit {
        &self.split
    }

    pub fn first(&self) -> Party {
        self.first
    }

    pub fn rounds(&self) -> usize {
        self.fields.len()
    }

    pub fn speaker(&self, round: usize) -> Party {
        if round.is_multiple_of(2) {
            self.first
        } else {
            self.first.other()
        }
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.fields.iter().map(|f| f.iter().sum()).collect()
    }

    pub fn total_bits(&self) -> usize {
        self.lengths().iter().sum()
    }

    pub fn describe(&self) -> Value {
        json!({
            "sigma_sizes": self.domain.sigma_sizes(),
            "alice": self.split.positions(Party::Alice).iter().map(|p| p + 1).collect::<Vec<_>>(),
            "first": self.first,
            "rounds": (0..self.rounds()).map(|r| json!({
                "speaker": self.speaker(r),
                "bits": self.lengths()[r],
                "fields": self.fields[r],
            })).collect::<Vec<_>>(),
            "total_bits": self.total_bits(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundMessage {
    pub speaker: Party,
    pub bits: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Transcript {
    pub rounds: Vec<RoundMessage>,
}

impl Transcript {
    pub fn bits(&self) -> Vec<bool> {
        self.rounds.iter().flat_map(|m| m.bits.iter().copied()).collect()
    }

    pub fn bit_count(&self) -> usize {
        self.rounds.iter().map(|m| m.bits.len()).sum()
    }

    /// Per round: speaker, bits as hex (left-aligned, zero-padded), and the
    /// decoded field values.
    pub fn dump(&self, p: &Protocol) -> Value {
        let rounds: Vec<Value> = self
            .rounds
            .iter()
            .enumerate()
            .map(|(r, m)| {
                let mut at = 0;
                let fields: Vec<u64> = p.fields[r]
                    .iter()
                    .map(|&w| {
                        let v = read_uint(&m.bits, at, w);
                        at += w;
                        v
                    })
                    .collect();
                json!({"round": r + 1, "speaker": m.speaker, "bits": m.bits.len(), "hex": to_hex(&m.bits), "fields": fields})
            })
            .collect();
        json!({"rounds": rounds, "total_bits": self.bit_count()})
    }
}

/// Runs `p` on `w`, checking every message length.
pub fn run_protocol(p: &Protocol, w: &Word) -> Result<(usize, Transcript)> {
    p.domain.check_word(w)?;
    let views = [p.split.view(Party::Alice, w), p.split.view(Party::Bob, w)];
    let mut transcript = Transcript::default();
    let mut so_far = Vec::new();
    for (r, expect) in p.lengths().into_iter().enumerate() {
        let speaker = p.speaker(r);
        let view = &views[usize::from(speaker == Party::Bob)];
        let bits = (p.message)(r, &so_far, view)?;
        if bits.len() != expect {
            return Err(Error::ProtocolFault(format!(
                "round {} message from {speaker} has {} bits, expected {expect}",
                r + 1,
                bits.len()
            )));
        }
        so_far.extend_from_slice(&bits);
        transcript.rounds.push(RoundMessage { speaker, bits });
    }
    let out = (p.output)(&so_far)?;
    Ok((out, transcript))
}

/// Smallest `b` with `2^b ≥ x`.
pub fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

pub(crate) fn push_uint(bits: &mut Vec<bool>, value: u64, width: usize) {
    debug_assert!(width >= 64 || value < 1 << width, "{value} does not fit {width} bits");
    bits.extend((0..width).rev().map(|i| i < 64 && value >> i & 1 == 1));
}

pub(crate) fn read_uint(bits: &[bool], at: usize, width: usize) -> u64 {
    bits[at..at + width].iter().fold(0, |acc, &b| acc << 1 | u64::from(b))
}

fn to_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|c| {
            let v = c.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | u32::from(b) << (3 - i));
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}
