use std::sync::Arc;

use super::{ceil_log2, push_uint, read_uint, Party, PartyView, PositionSplit, Protocol};
use crate::domain::{Assignment, FunctionTable, Word};
use crate::error::{Error, Result};
use crate::trees::{key_to_string, DecisionTree, Node};

/// Both orders of the protocol simulating `tree`: Alice first, then Bob
/// first.
pub fn tree_to_protocols(tree: &DecisionTree, split: &PositionSplit) -> Result<(Protocol, Protocol)> {
    Ok((
        tree_to_protocol(tree, split, Party::Alice)?,
        tree_to_protocol(tree, split, Party::Bob)?,
    ))
}

/// Simulates `tree` query by query. For each a-query both parties send, per
/// head, the canonical index of their highest-ranked assignment consistent
/// with their own letters (`⌈log₂|A|⌉` bits each); the answer is whichever
/// of the two ranks higher. The party answering second on query `j` opens
/// query `j + 1` in the same message, so depth `r` takes `r + 1` rounds.
/// A party holding no positions sends zeros, which the receiver ignores
/// because the split is public. Paths that reach a leaf early are padded.
pub fn tree_to_protocol(tree: &DecisionTree, split: &PositionSplit, first: Party) -> Result<Protocol> {
    let domain = tree.domain().clone();
    if split.n() != domain.n() {
        return Err(Error::invalid("split and tree have different lengths"));
    }
    let width = ceil_log2(domain.num_assignments());
    let heads = tree.heads();
    let r = tree.depth();
    let mut rounds: Vec<Vec<Segment>> = Vec::new();
    for j in 0..r {
        let opener = if j % 2 == 0 { first } else { first.other() };
        for party in [opener, opener.other()] {
            let seg = Segment { query: j, party };
            match rounds.last_mut() {
                Some(round) if round[0].party == party => round.push(seg),
                _ => rounds.push(vec![seg]),
            }
        }
    }
    let fields = rounds.iter().map(|round| vec![width; round.len() * heads]).collect();
    let sim = Arc::new(Simulation {
        tree: tree.clone(),
        holds: [Party::Alice, Party::Bob].map(|p| !split.positions(p).is_empty()),
        width,
        rounds,
    });
    let out = Arc::clone(&sim);
    Protocol::new(
        domain,
        split.clone(),
        first,
        fields,
        move |round, so_far, view| sim.message(round, so_far, view),
        move |bits| out.output(bits),
    )
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    query: usize,
    party: Party,
}

struct Simulation {
    tree: DecisionTree,
    /// Whether Alice, Bob hold any position.
    holds: [bool; 2],
    width: usize,
    rounds: Vec<Vec<Segment>>,
}

/// Indices sent for each query, per party.
type Sent = Vec<[Option<Vec<usize>>; 2]>;

fn slot(p: Party) -> usize {
    usize::from(p == Party::Bob)
}

impl Simulation {
    fn seg_bits(&self) -> usize {
        self.width * self.tree.heads()
    }

    fn parse(&self, rounds: usize, bits: &[bool]) -> Result<Sent> {
        let heads = self.tree.heads();
        let na = self.tree.domain().num_assignments() as u64;
        let mut sent: Sent = vec![[None, None]; self.tree.depth()];
        let mut at = 0;
        for seg in self.rounds[..rounds].iter().flatten() {
            let mut values = Vec::with_capacity(heads);
            for _ in 0..heads {
                let v = read_uint(bits, at, self.width);
                at += self.width;
                if self.holds[slot(seg.party)] && v >= na {
                    return Err(Error::ProtocolFault(format!("assignment index {v} out of range")));
                }
                values.push(v as usize);
            }
            sent[seg.query][slot(seg.party)] = Some(values);
        }
        Ok(sent)
    }

    /// Node reached after the first `j` queries, or the leaf hit earlier.
    fn node_after(&self, sent: &Sent, j: usize) -> Result<&Node> {
        let mut node = self.tree.root();
        for pair in sent.iter().take(j) {
            let Node::Internal { query, children } = node else {
                return Ok(node);
            };
            let [a, b] = pair;
            let (a, b) = (a.as_ref().expect("sent"), b.as_ref().expect("sent"));
            let key: Vec<usize> = query
                .parts()
                .iter()
                .enumerate()
                .map(|(h, q)| match self.holds {
                    [false, _] => b[h],
                    [true, false] => a[h],
                    [true, true] => {
                        if q.rank_of(a[h]) < q.rank_of(b[h]) {
                            a[h]
                        } else {
                            b[h]
                        }
                    }
                })
                .collect();
            node = children.get(&key).ok_or_else(|| Error::MalformedTree {
                node: format!("depth {}", j),
                key: key_to_string(self.tree.domain(), &key),
            })?;
        }
        Ok(node)
    }

    fn message(&self, round: usize, so_far: &[bool], view: &PartyView) -> Result<Vec<bool>> {
        let mut sent = self.parse(round, so_far)?;
        let domain = self.tree.domain();
        let own: Vec<(usize, usize)> = view.own().collect();
        let mut bits = Vec::with_capacity(self.seg_bits() * self.rounds[round].len());
        for seg in &self.rounds[round] {
            let node = self.node_after(&sent, seg.query)?;
            let values: Vec<usize> = match node {
                Node::Internal { query, .. } if !own.is_empty() => query
                    .parts()
                    .iter()
                    .map(|q| {
                        own.iter()
                            .map(|&(p, l)| domain.assignment_index(Assignment::new(p, l)))
                            .min_by_key(|&a| q.rank_of(a))
                            .expect("non-empty")
                    })
                    .collect(),
                _ => vec![0; self.tree.heads()],
            };
            for &v in &values {
                push_uint(&mut bits, v as u64, self.width);
            }
            sent[seg.query][slot(seg.party)] = Some(values);
        }
        Ok(bits)
    }

    fn output(&self, bits: &[bool]) -> Result<usize> {
        let sent = self.parse(self.rounds.len(), bits)?;
        match self.node_after(&sent, sent.len())? {
            Node::Leaf(o) => Ok(*o),
            Node::Internal { .. } => Err(Error::ProtocolFault("tree deeper than the schedule".into())),
        }
    }
}

/// `first` sends all its letters (`⌈log₂|Σᵢ|⌉` bits each, the widest over
/// its positions); the other party now knows `w` and replies with `f(w)`.
pub fn full_disclosure(f: &FunctionTable, split: &PositionSplit, first: Party) -> Result<Protocol> {
    let domain = f.domain().clone();
    let sender = split.positions(first);
    let width = sender.iter().map(|&p| ceil_log2(domain.sigma_size(p))).max().unwrap_or(0);
    let out_width = ceil_log2(domain.out_size());
    let fields = vec![vec![width; sender.len()], vec![out_width]];
    let table = f.clone();
    let n = domain.n();
    Protocol::new(
        domain,
        split.clone(),
        first,
        fields,
        move |round, so_far, view| {
            let mut bits = Vec::new();
            if round == 0 {
                for (_, l) in view.own() {
                    push_uint(&mut bits, l as u64, width);
                }
            } else {
                let mut letters: Vec<usize> = view.letters.iter().map(|l| l.unwrap_or(0)).collect();
                for (i, &p) in sender.iter().enumerate() {
                    letters[p] = read_uint(so_far, i * width, width) as usize;
                }
                let w = Word(letters);
                table.domain().check_word(&w).map_err(|e| Error::ProtocolFault(e.to_string()))?;
                debug_assert_eq!(w.len(), n);
                push_uint(&mut bits, table.eval(&w) as u64, out_width);
            }
            Ok(bits)
        },
        move |bits| Ok(read_uint(bits, bits.len() - out_width, out_width) as usize),
    )
}
