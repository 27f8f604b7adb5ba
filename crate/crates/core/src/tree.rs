//! Rooted finite window of the homogeneous tree of order `q`.
//!
//! Nodes are words over the alphabet `{1, ..., q}`; the root is the empty
//! word and appending a letter moves one level deeper.  The window holds
//! every word of length at most `depth`, enumerated level-major and
//! lexicographically within a level, so that serialized operators are
//! bit-reproducible.  The boundary orientation is encoded by the parent
//! direction (dropping the last letter); horocycles are the level sets.

use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the number of window nodes.
pub const DEFAULT_NODE_CAP: usize = 10_000;

/// Element of the free semigroup on `q` letters; letters are `1..=q`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u8>);

impl Word {
    /// The empty word (unit of concatenation).
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: &[u8]) -> Self {
        Word(letters.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn first(&self) -> Option<u8> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Appends a single letter.
    pub fn child(&self, letter: u8) -> Word {
        let mut letters = self.0.clone();
        letters.push(letter);
        Word(letters)
    }

    /// Drops the last letter; `None` on the empty word.
    pub fn parent(&self) -> Option<Word> {
        if self.0.is_empty() {
            None
        } else {
            Word(self.0[..self.0.len() - 1].to_vec()).into()
        }
    }

    /// Length of the longest common prefix.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> Word {
        Word(self.0[start..].to_vec())
    }

    /// Serializes over alphabet `1..=q`: digits run together for `q <= 9`,
    /// comma-separated otherwise; the empty word is the empty string.
    pub fn encode(&self, q: usize) -> String {
        if q <= 9 {
            self.0.iter().map(|l| l.to_string()).collect()
        } else {
            self.0
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }

    /// Inverse of [`Word::encode`].
    pub fn parse(s: &str, q: usize) -> Result<Word> {
        let bad = || Error::BadWord {
            word: s.to_string(),
            q,
        };
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let letters: Vec<u8> = if q <= 9 {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad))
                .collect::<Result<_>>()?
        } else {
            s.split(',')
                .map(|part| part.parse::<u8>().map_err(|_| bad()))
                .collect::<std::result::Result<_, _>>()?
        };
        if letters.iter().any(|&l| l == 0 || l as usize > q) {
            return Err(bad());
        }
        Ok(Word(letters))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "Word(\u{2205})")
        } else {
            write!(f, "Word({})", self.encode(9))
        }
    }
}

/// True iff both words are nonempty and share the same first letter, i.e.
/// the pair `(w1, w2)` can be shortened by a common leading shift.
pub fn is_reducible(w1: &Word, w2: &Word) -> bool {
    match (w1.first(), w2.first()) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

/// Index of a node in the canonical level-major, lexicographic enumeration.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Relative position of two nodes under the level order induced by the
/// boundary orientation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OrderRel {
    Precedes,
    Succeeds,
    Equivalent,
}

/// All words of length `<= depth` over `q` letters, with the canonical
/// node enumeration and the meet/distance/order structure.
#[derive(Clone, Debug)]
pub struct TreeWindow {
    q: usize,
    depth: usize,
    words: Vec<Word>,
    /// `level_offsets[k]` is the index of the first node of level `k`;
    /// a sentinel entry at the end holds the node count.
    level_offsets: Vec<usize>,
}

impl TreeWindow {
    /// Builds the window for tree order `q` and depth `depth` under the
    /// default node cap.
    pub fn new(q: usize, depth: usize) -> Result<Self> {
        Self::with_cap(q, depth, DEFAULT_NODE_CAP)
    }

    pub fn with_cap(q: usize, depth: usize, cap: usize) -> Result<Self> {
        if q < 1 || depth < 1 {
            return Err(Error::BadWindowParams { q, depth });
        }
        let mut level_offsets = Vec::with_capacity(depth + 2);
        let mut total = 0usize;
        let mut level_size = 1usize;
        for _ in 0..=depth {
            level_offsets.push(total);
            total = total
                .checked_add(level_size)
                .ok_or(Error::WindowTooLarge { nodes: usize::MAX, cap })?;
            if total > cap {
                return Err(Error::WindowTooLarge { nodes: total, cap });
            }
            level_size = level_size.saturating_mul(q);
        }
        level_offsets.push(total);

        let mut words = Vec::with_capacity(total);
        words.push(Word::empty());
        let mut level_start = 0;
        for _ in 1..=depth {
            let level_end = words.len();
            for i in level_start..level_end {
                let w = words[i].clone();
                for letter in 1..=q as u8 {
                    words.push(w.child(letter));
                }
            }
            level_start = level_end;
        }
        debug_assert_eq!(words.len(), total);

        Ok(TreeWindow {
            q,
            depth,
            words,
            level_offsets,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        *self.level_offsets.last().unwrap()
    }

    /// Number of nodes on level `k` (the `k`-th horocycle of the window).
    pub fn level_size(&self, k: usize) -> usize {
        self.level_offsets[k + 1] - self.level_offsets[k]
    }

    pub fn level_start(&self, k: usize) -> usize {
        self.level_offsets[k]
    }

    /// Node index range of level `k`.
    pub fn level_range(&self, k: usize) -> std::ops::Range<usize> {
        self.level_offsets[k]..self.level_offsets[k + 1]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId)
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn word(&self, node: NodeId) -> &Word {
        &self.words[node.0]
    }

    pub fn level(&self, node: NodeId) -> usize {
        self.words[node.0].len()
    }

    /// Level of the node with the given index (avoids a word lookup).
    pub fn level_of_index(&self, index: usize) -> usize {
        self.level_offsets[1..].partition_point(|&off| off <= index)
    }

    /// The canonical index of a word, if the word fits in the window.
    pub fn node_id(&self, w: &Word) -> Option<NodeId> {
        let k = w.len();
        if k > self.depth || w.letters().iter().any(|&l| l == 0 || l as usize > self.q) {
            return None;
        }
        let mut within = 0usize;
        for &letter in w.letters() {
            within = within * self.q + (letter as usize - 1);
        }
        Some(NodeId(self.level_offsets[k] + within))
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        let w = self.word(node).parent()?;
        self.node_id(&w)
    }

    pub fn child(&self, node: NodeId, letter: u8) -> Option<NodeId> {
        if letter == 0 || letter as usize > self.q {
            return None;
        }
        self.node_id(&self.word(node).child(letter))
    }

    /// `node · w`, when the result stays inside the window.
    pub fn append(&self, node: NodeId, w: &Word) -> Option<NodeId> {
        self.node_id(&self.word(node).concat(w))
    }

    /// Longest common prefix of the two node words; the first common node
    /// on the paths toward the boundary point.
    pub fn meet(&self, t: NodeId, s: NodeId) -> NodeId {
        let k = self.word(t).common_prefix_len(self.word(s));
        self.node_id(&self.word(t).prefix(k))
            .expect("prefix of a window word is a window word")
    }

    /// Path distance through the meet.
    pub fn dist(&self, t: NodeId, s: NodeId) -> usize {
        let m = self.meet(t, s);
        (self.level(t) - self.level(m)) + (self.level(s) - self.level(m))
    }

    /// Order relation of `t` against `s`, computed from the meet.
    pub fn order_rel(&self, t: NodeId, s: NodeId) -> OrderRel {
        let m = self.meet(t, s);
        let dt = self.level(t) - self.level(m);
        let ds = self.level(s) - self.level(m);
        match dt.cmp(&ds) {
            std::cmp::Ordering::Less => OrderRel::Precedes,
            std::cmp::Ordering::Greater => OrderRel::Succeeds,
            std::cmp::Ordering::Equal => OrderRel::Equivalent,
        }
    }

    /// Unique triple `(m, w1, w2)` with `t = m·w1`, `s = m·w2` and
    /// `(w1, w2)` irreducible; `m` is the meet.
    pub fn decompose(&self, t: NodeId, s: NodeId) -> (NodeId, Word, Word) {
        let m = self.meet(t, s);
        let k = self.level(m);
        let w1 = self.word(t).suffix_from(k);
        let w2 = self.word(s).suffix_from(k);
        (m, w1, w2)
    }

    /// Words of a given length, in lexicographic order.
    pub fn words_of_len(&self, len: usize) -> impl Iterator<Item = &Word> {
        self.level_range(len).map(move |i| &self.words[i])
    }
}
