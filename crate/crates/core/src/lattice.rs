//! Lattice points and paths in `Z_{>=0}^s`, the correspondence between
//! paths with distinct directions and permutations, reduced words and the
//! braid/commutation moves connecting them.
//!
//! A swap at position `k` exchanges letters `k` and `k + 1` of a word. A
//! reduced word is a shortest sequence of swaps taking the identity
//! arrangement `(0, 1, ..., s-1)` to the one-line form of a permutation.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(pub Vec<usize>);

impl LatticePoint {
    pub fn origin(s: usize) -> Self {
        LatticePoint(vec![0; s])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn unit(s: usize, i: usize) -> Self {
        let mut v = vec![0; s];
        v[i] = 1;
        LatticePoint(v)
    }

    pub fn step(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v[i] += 1;
        LatticePoint(v)
    }

    pub fn le(&self, other: &LatticePoint) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Directions sorted ascending: `e_0^{n_0} e_1^{n_1} ...`.
    pub fn canonical_word(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| std::iter::repeat_n(i, n))
            .collect()
    }

    /// Canonical word of `other - self`.
    pub fn word_to(&self, other: &LatticePoint) -> Result<Vec<usize>> {
        if !self.le(other) {
            return Err(Error::PointMismatch(format!(
                "{:?} is not below {:?}",
                self.0, other.0
            )));
        }
        Ok(
            LatticePoint(other.0.iter().zip(&self.0).map(|(a, b)| a - b).collect())
                .canonical_word(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePath {
    pub start: LatticePoint,
    pub word: Vec<usize>,
}

impl LatticePath {
    pub fn new(start: LatticePoint, word: Vec<usize>) -> Result<Self> {
        if let Some(&d) = word.iter().find(|&&d| d >= start.dim()) {
            return Err(Error::InvalidPath(format!(
                "direction {d} out of range for s = {}",
                start.dim()
            )));
        }
        Ok(LatticePath { start, word })
    }

    /// Path from the origin of `Z^s`.
    pub fn from_origin(s: usize, word: Vec<usize>) -> Result<Self> {
        Self::new(LatticePoint::origin(s), word)
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn end(&self) -> LatticePoint {
        self.word.iter().fold(self.start.clone(), |p, &d| p.step(d))
    }
}

/// `sigma` with `sigma(k) = word[k]`; the word must use each of `0..s` once.
pub fn path_permutation(path: &LatticePath) -> Result<Vec<usize>> {
    let s = path.start.dim();
    let mut seen = vec![false; s];
    if path.word.len() != s {
        return Err(Error::InvalidPath(format!(
            "word has {} letters, expected {s}",
            path.word.len()
        )));
    }
    for &d in &path.word {
        if seen[d] {
            return Err(Error::InvalidPath(format!("direction {d} repeats")));
        }
        seen[d] = true;
    }
    Ok(path.word.clone())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedWord {
    pub positions: Vec<usize>,
    pub target: Vec<usize>,
}

impl ReducedWord {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

pub fn apply_swaps<T: Clone>(word: &[T], positions: &[usize]) -> Result<Vec<T>> {
    let mut w = word.to_vec();
    for &k in positions {
        if k + 1 >= w.len() {
            return Err(Error::InvalidMoves(format!(
                "swap position {k} out of range for a word of length {}",
                w.len()
            )));
        }
        w.swap(k, k + 1);
    }
    Ok(w)
}

pub fn inversions(sigma: &[usize]) -> usize {
    (0..sigma.len())
        .flat_map(|i| (i + 1..sigma.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| sigma[i] > sigma[j])
        .count()
}

fn check_permutation(sigma: &[usize]) -> Result<()> {
    let mut seen = vec![false; sigma.len()];
    for &x in sigma {
        if x >= sigma.len() || seen[x] {
            return Err(Error::InvalidPath(format!(
                "{sigma:?} is not a permutation"
            )));
        }
        seen[x] = true;
    }
    Ok(())
}

/// All reduced words of `sigma` (one-line form), lexicographic in positions.
pub fn enumerate_reduced_words(sigma: &[usize]) -> Vec<ReducedWord> {
    check_permutation(sigma).expect("enumerate_reduced_words needs a permutation");
    let mut pos = vec![0; sigma.len()];
    for (i, &x) in sigma.iter().enumerate() {
        pos[x] = i;
    }
    let mut out = Vec::new();
    let mut arr: Vec<usize> = (0..sigma.len()).collect();
    let mut prefix = Vec::new();
    fn dfs(
        arr: &mut Vec<usize>,
        pos: &[usize],
        prefix: &mut Vec<usize>,
        target: &[usize],
        out: &mut Vec<ReducedWord>,
    ) {
        if arr.as_slice() == target {
            out.push(ReducedWord {
                positions: prefix.clone(),
                target: target.to_vec(),
            });
            return;
        }
        for k in 0..arr.len().saturating_sub(1) {
            let (a, b) = (arr[k], arr[k + 1]);
            if a < b && pos[a] > pos[b] {
                arr.swap(k, k + 1);
                prefix.push(k);
                dfs(arr, pos, prefix, target, out);
                prefix.pop();
                arr.swap(k, k + 1);
            }
        }
    }
    dfs(&mut arr, &pos, &mut prefix, sigma, &mut out);
    out
}

/// Tags each letter of `to` with the position of the matching occurrence
/// in `from` (k-th occurrence to k-th occurrence).
fn tag_permutation(from: &[usize], to: &[usize]) -> Result<Vec<usize>> {
    let mut slots: HashMap<usize, VecDeque<usize>> = HashMap::new();
    for (i, &d) in from.iter().enumerate() {
        slots.entry(d).or_default().push_back(i);
    }
    let mut tags = Vec::with_capacity(to.len());
    for &d in to {
        match slots.get_mut(&d).and_then(|q| q.pop_front()) {
            Some(t) => tags.push(t),
            None => return Err(Error::InvalidPath("direction multisets differ".into())),
        }
    }
    if from.len() != to.len() {
        return Err(Error::InvalidPath("direction multisets differ".into()));
    }
    Ok(tags)
}

fn check_same_ends(a: &LatticePath, b: &LatticePath) -> Result<Vec<usize>> {
    if a.start != b.start {
        return Err(Error::InvalidPath("paths start at different points".into()));
    }
    tag_permutation(&a.word, &b.word)
}

/// A shortest sequence of swaps of distinct adjacent letters turning
/// `word(from)` into `word(to)`; the lexicographically first one.
pub fn sorting_moves(from: &LatticePath, to: &LatticePath) -> Result<Vec<usize>> {
    let tags = check_same_ends(from, to)?;
    let mut arr: Vec<usize> = (0..tags.len()).collect();
    let mut pos = vec![0; tags.len()];
    for (i, &t) in tags.iter().enumerate() {
        pos[t] = i;
    }
    let mut moves = Vec::new();
    while arr != tags {
        let k = (0..arr.len() - 1)
            .find(|&k| arr[k] < arr[k + 1] && pos[arr[k]] > pos[arr[k + 1]])
            .expect("an inverted adjacent pair exists until sorted");
        arr.swap(k, k + 1);
        moves.push(k);
    }
    Ok(moves)
}

/// Every shortest swap sequence from `word(from)` to `word(to)`.
pub fn all_sorting_moves(from: &LatticePath, to: &LatticePath) -> Result<Vec<Vec<usize>>> {
    let tags = check_same_ends(from, to)?;
    Ok(enumerate_reduced_words(&tags)
        .into_iter()
        .map(|w| w.positions)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    /// `s_a s_b -> s_b s_a` at letters `p, p+1`, `|a - b| >= 2`.
    Commute(usize),
    /// `s_a s_b s_a -> s_b s_a s_b` at letters `p..p+3`, `|a - b| = 1`.
    Braid(usize),
}

pub fn apply_move(word: &[usize], mv: Move) -> Result<Vec<usize>> {
    let mut w = word.to_vec();
    match mv {
        Move::Commute(p) if p + 1 < w.len() && w[p].abs_diff(w[p + 1]) >= 2 => w.swap(p, p + 1),
        Move::Braid(p) if p + 2 < w.len() && w[p] == w[p + 2] && w[p].abs_diff(w[p + 1]) == 1 => {
            let (a, b) = (w[p], w[p + 1]);
            w[p] = b;
            w[p + 1] = a;
            w[p + 2] = b;
        }
        _ => {
            return Err(Error::InvalidMoves(format!(
                "{mv:?} does not apply to {word:?}"
            )))
        }
    }
    Ok(w)
}

fn neighbours(w: &[usize]) -> Vec<(Move, Vec<usize>)> {
    let mut out = Vec::new();
    for p in 0..w.len() {
        for mv in [Move::Commute(p), Move::Braid(p)] {
            if let Ok(n) = apply_move(w, mv) {
                out.push((mv, n));
            }
        }
    }
    out
}

/// Shortest sequence of commutation and braid moves from `a` to `b`.
pub fn connect_words(a: &ReducedWord, b: &ReducedWord) -> Result<Vec<Move>> {
    if a.target != b.target {
        return Err(Error::InvalidMoves(
            "words reduce different permutations".into(),
        ));
    }
    let mut parent: HashMap<Vec<usize>, Option<(Vec<usize>, Move)>> = HashMap::new();
    parent.insert(a.positions.clone(), None);
    let mut queue = VecDeque::from([a.positions.clone()]);
    while let Some(w) = queue.pop_front() {
        if w == b.positions {
            let mut moves = Vec::new();
            let mut cur = w;
            while let Some(Some((prev, mv))) = parent.get(&cur) {
                moves.push(*mv);
                cur = prev.clone();
            }
            moves.reverse();
            return Ok(moves);
        }
        for (mv, n) in neighbours(&w) {
            if !parent.contains_key(&n) {
                parent.insert(n.clone(), Some((w.clone(), mv)));
                queue.push_back(n);
            }
        }
    }
    Err(Error::InvalidMoves(
        "no move sequence connects the words".into(),
    ))
}

/// Component size of `a` in the move graph (equals the number of reduced
/// words when the graph is connected) and the largest BFS distance from `a`.
pub fn move_component(a: &ReducedWord) -> (usize, usize) {
    let mut dist: HashMap<Vec<usize>, usize> = HashMap::new();
    dist.insert(a.positions.clone(), 0);
    let mut queue = VecDeque::from([a.positions.clone()]);
    let mut far = 0;
    while let Some(w) = queue.pop_front() {
        let d = dist[&w];
        far = far.max(d);
        for (_, n) in neighbours(&w) {
            if !dist.contains_key(&n) {
                dist.insert(n.clone(), d + 1);
                queue.push_back(n);
            }
        }
    }
    (dist.len(), far)
}

/// Diameter of the move graph on the reduced words of `sigma`.
pub fn move_graph_diameter(sigma: &[usize]) -> usize {
    enumerate_reduced_words(sigma)
        .iter()
        .map(|w| move_component(w).1)
        .max()
        .unwrap_or(0)
}

/// All permutations of `0..s` in lexicographic order.
pub fn permutations(s: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; s], &mut out);
    out
}

/// The longest element `(s-1, ..., 1, 0)`.
pub fn longest_element(s: usize) -> Vec<usize> {
    (0..s).rev().collect()
}
