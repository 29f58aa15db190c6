//! Semiautomata and flat automata.
//!
//! Transition and output functions are stored as dense tables indexed by
//! `state * letters + letter`. Letters of a [`FlatAutomaton`] are the letter
//! indices of its [`FactoredAlphabet`].

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Domain, FactoredAlphabet};
use crate::error::{Error, Result};

/// `D = ⟨Π, Q, δ, q_init⟩` over a flat letter list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Semiautomaton {
    letters: Vec<String>,
    states: Vec<String>,
    delta: Vec<u32>,
    init: u32,
}

impl Semiautomaton {
    /// `delta[q * letters.len() + a]` is the successor of `q` on letter `a`.
    pub fn new(letters: Vec<String>, states: Vec<String>, delta: Vec<u32>, init: usize) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidAutomaton("a semiautomaton needs at least one state".into()));
        }
        if letters.is_empty() {
            return Err(Error::InvalidAutomaton("a semiautomaton needs at least one letter".into()));
        }
        unique(&letters, "letter")?;
        unique(&states, "state")?;
        if delta.len() != states.len() * letters.len() {
            return Err(Error::InvalidAutomaton(format!(
                "transition table has {} entries, expected {}",
                delta.len(),
                states.len() * letters.len()
            )));
        }
        if delta.iter().any(|&q| q as usize >= states.len()) {
            return Err(Error::InvalidAutomaton("transition to an unknown state".into()));
        }
        if init >= states.len() {
            return Err(Error::InvalidAutomaton("initial state is not a state".into()));
        }
        Ok(Semiautomaton {
            letters,
            states,
            delta,
            init: init as u32,
        })
    }

    /// Builds the table from a transition closure over positions.
    pub fn from_fn<L, S>(
        letters: impl IntoIterator<Item = L>,
        states: impl IntoIterator<Item = S>,
        init: usize,
        delta: impl Fn(usize, usize) -> usize,
    ) -> Result<Self>
    where
        L: Into<String>,
        S: Into<String>,
    {
        let letters: Vec<String> = letters.into_iter().map(Into::into).collect();
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        let table = (0..states.len())
            .flat_map(|q| (0..letters.len()).map(move |a| (q, a)))
            .map(|(q, a)| delta(q, a) as u32)
            .collect();
        Self::new(letters, states, table, init)
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn init(&self) -> usize {
        self.init as usize
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_letters(&self) -> usize {
        self.letters.len()
    }

    pub fn letter_position(&self, name: &str) -> Option<usize> {
        self.letters.iter().position(|l| l == name)
    }

    pub fn state_position(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    #[inline]
    pub fn next(&self, q: usize, a: usize) -> usize {
        self.delta[q * self.letters.len() + a] as usize
    }

    pub fn table(&self) -> &[u32] {
        &self.delta
    }

    /// `δ(q, s)` by the recursive extension; the empty string leaves `q` unchanged.
    pub fn run_from(&self, q: usize, s: &[usize]) -> Result<usize> {
        s.iter().enumerate().try_fold(q, |q, (pos, &a)| {
            if a >= self.letters.len() {
                return Err(Error::UnknownLetter {
                    letter: format!("#{a}"),
                    position: pos,
                });
            }
            Ok(self.next(q, a))
        })
    }

    /// `D(s) = δ(q_init, s)`.
    pub fn run(&self, s: &[usize]) -> Result<usize> {
        self.run_from(self.init(), s)
    }

    /// Runs on letter names, reporting the first unknown name.
    pub fn run_names(&self, s: &[&str]) -> Result<usize> {
        let idx = s
            .iter()
            .enumerate()
            .map(|(pos, name)| {
                self.letter_position(name).ok_or_else(|| Error::UnknownLetter {
                    letter: name.to_string(),
                    position: pos,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.run(&idx)
    }

    pub fn transition_monoid(&self, cap: u64) -> Result<TransitionMonoid> {
        TransitionMonoid::generate(self.states.len(), self.letters.len(), &self.delta, cap)
    }

    /// Aperiodicity of the transition monoid of this semiautomaton.
    ///
    /// The check is structural: star-freeness of a recognised language is
    /// decided by the monoid of its minimal acceptor, so minimise first when
    /// the language, not the machine, is of interest.
    pub fn is_aperiodic(&self, cap: u64) -> Result<AperiodicityReport> {
        TransitionMonoid::aperiodicity_search(self.states.len(), self.letters.len(), &self.delta, cap)
    }
}

fn unique(names: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(Error::InvalidAutomaton(format!("{what} `{n}` is repeated")));
        }
    }
    Ok(())
}

/// The set of state transformations induced by strings.
#[derive(Debug, Clone)]
pub struct TransitionMonoid {
    elements: Vec<Vec<u32>>,
    words: Vec<Vec<usize>>,
}

impl TransitionMonoid {
    /// Breadth-first closure of the letter transformations under composition,
    /// starting from the identity.
    pub fn generate(states: usize, letters: usize, delta: &[u32], cap: u64) -> Result<Self> {
        Ok(Self::closure(states, letters, delta, cap, |_| false)?.0)
    }

    /// Aperiodicity decided during generation: the search stops at the first
    /// element whose powers never stabilise.
    pub fn aperiodicity_search(states: usize, letters: usize, delta: &[u32], cap: u64) -> Result<AperiodicityReport> {
        let (monoid, stopped) = Self::closure(states, letters, delta, cap, |f| !stabilises(f))?;
        Ok(match stopped {
            Some(i) => AperiodicityReport {
                aperiodic: false,
                monoid_size: None,
                witness: Some(monoid.words[i].clone()),
            },
            None => AperiodicityReport {
                aperiodic: true,
                monoid_size: Some(monoid.len()),
                witness: None,
            },
        })
    }

    // Stops early, returning the index of the first element for which `stop` holds.
    fn closure(
        states: usize,
        letters: usize,
        delta: &[u32],
        cap: u64,
        mut stop: impl FnMut(&[u32]) -> bool,
    ) -> Result<(Self, Option<usize>)> {
        let identity: Vec<u32> = (0..states as u32).collect();
        let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut elements = vec![identity.clone()];
        let mut words = vec![Vec::new()];
        index.insert(identity, 0);
        let mut head = 0;
        while head < elements.len() {
            for a in 0..letters {
                // apply the element, then the letter
                let next: Vec<u32> = elements[head]
                    .iter()
                    .map(|&q| delta[q as usize * letters + a])
                    .collect();
                if !index.contains_key(&next) {
                    if elements.len() as u64 >= cap {
                        return Err(Error::cap("transition monoid", format!("more than {}", elements.len()), cap));
                    }
                    if (elements.len() as u64 + 1).saturating_mul(states as u64) > MONOID_CELLS {
                        return Err(Error::cap(
                            "transition monoid table",
                            format!("more than {} elements of {states} states", elements.len()),
                            MONOID_CELLS,
                        ));
                    }
                    let mut w = words[head].clone();
                    w.push(a);
                    let halt = stop(&next);
                    index.insert(next.clone(), elements.len());
                    elements.push(next);
                    words.push(w);
                    if halt {
                        let at = elements.len() - 1;
                        return Ok((TransitionMonoid { elements, words }, Some(at)));
                    }
                }
            }
            head += 1;
        }
        Ok((TransitionMonoid { elements, words }, None))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Vec<u32>] {
        &self.elements
    }

    /// A shortest word inducing each element.
    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    /// Every element must satisfy `f^k = f^(k+1)` for some `k ≤ |Q|`.
    pub fn aperiodicity(&self) -> AperiodicityReport {
        match self.elements.iter().position(|f| !stabilises(f)) {
            Some(i) => AperiodicityReport {
                aperiodic: false,
                monoid_size: Some(self.len()),
                witness: Some(self.words[i].clone()),
            },
            None => AperiodicityReport {
                aperiodic: true,
                monoid_size: Some(self.len()),
                witness: None,
            },
        }
    }
}

/// Upper limit on `|monoid| · |Q|`, the size of the stored transformations.
pub const MONOID_CELLS: u64 = 50_000_000;

// f^k = f^(k+1) for some k ≤ |Q|
fn stabilises(f: &[u32]) -> bool {
    let mut power = f.to_vec();
    for _ in 0..f.len().max(1) {
        let next: Vec<u32> = power.iter().map(|&q| f[q as usize]).collect();
        if next == power {
            return true;
        }
        power = next;
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AperiodicityReport {
    pub aperiodic: bool,
    /// `None` when the search stopped at the witness before closing the monoid.
    pub monoid_size: Option<usize>,
    /// A word whose transformation never stabilises under powers.
    pub witness: Option<Vec<usize>>,
}

/// `A = ⟨Σ, Q, δ, q_init, Γ, θ⟩`, deterministic and complete.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatAutomaton {
    alphabet: FactoredAlphabet,
    states: Vec<String>,
    delta: Vec<u32>,
    init: u32,
    outputs: Vec<String>,
    theta: Vec<u32>,
}

/// Outcome of an equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// A shortest (exact path) or first (bounded path) distinguishing string,
    /// as letter indices of the first automaton, with both outputs.
    Counterexample {
        word: Vec<usize>,
        left: String,
        right: String,
    },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

impl FlatAutomaton {
    pub fn new(
        alphabet: FactoredAlphabet,
        states: Vec<String>,
        delta: Vec<u32>,
        init: usize,
        outputs: Vec<String>,
        theta: Vec<u32>,
    ) -> Result<Self> {
        let k = alphabet.size();
        if states.is_empty() {
            return Err(Error::InvalidAutomaton("an automaton needs at least one state".into()));
        }
        if outputs.is_empty() {
            return Err(Error::InvalidAutomaton("output alphabet is empty".into()));
        }
        unique(&states, "state")?;
        unique(&outputs, "output")?;
        if delta.len() != states.len() * k || theta.len() != states.len() * k {
            return Err(Error::InvalidAutomaton("tables do not cover every state and letter".into()));
        }
        if delta.iter().any(|&q| q as usize >= states.len()) {
            return Err(Error::InvalidAutomaton("transition to an unknown state".into()));
        }
        if theta.iter().any(|&o| o as usize >= outputs.len()) {
            return Err(Error::InvalidAutomaton("output outside the output alphabet".into()));
        }
        if init >= states.len() {
            return Err(Error::InvalidAutomaton("initial state is not a state".into()));
        }
        Ok(FlatAutomaton {
            alphabet,
            states,
            delta,
            init: init as u32,
            outputs,
            theta,
        })
    }

    /// Builds the tables from closures over state and letter positions.
    pub fn from_fn(
        alphabet: FactoredAlphabet,
        states: Vec<String>,
        init: usize,
        outputs: Vec<String>,
        delta: impl Fn(usize, usize) -> usize,
        theta: impl Fn(usize, usize) -> usize,
    ) -> Result<Self> {
        let k = alphabet.size();
        let n = states.len();
        let mut d = Vec::with_capacity(n * k);
        let mut t = Vec::with_capacity(n * k);
        for q in 0..n {
            for a in 0..k {
                d.push(delta(q, a) as u32);
                t.push(theta(q, a) as u32);
            }
        }
        Self::new(alphabet, states, d, init, outputs, t)
    }

    pub fn alphabet(&self) -> &FactoredAlphabet {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_letters(&self) -> usize {
        self.alphabet.size()
    }

    pub fn init(&self) -> usize {
        self.init as usize
    }

    #[inline]
    pub fn next(&self, q: usize, a: usize) -> usize {
        self.delta[q * self.alphabet.size() + a] as usize
    }

    #[inline]
    pub fn output(&self, q: usize, a: usize) -> usize {
        self.theta[q * self.alphabet.size() + a] as usize
    }

    fn check_word(&self, s: &[usize]) -> Result<()> {
        if let Some(pos) = s.iter().position(|&a| a >= self.alphabet.size()) {
            return Err(Error::UnknownLetter {
                letter: format!("#{}", s[pos]),
                position: pos,
            });
        }
        Ok(())
    }

    /// `D_A(s)`.
    pub fn state_after(&self, s: &[usize]) -> Result<usize> {
        self.check_word(s)?;
        Ok(s.iter().fold(self.init(), |q, &a| self.next(q, a)))
    }

    /// `A(σ1…σm) = θ(D_A(σ1…σm−1), σm)`; undefined on the empty string.
    pub fn run(&self, s: &[usize]) -> Result<usize> {
        let (&last, prefix) = s.split_last().ok_or(Error::EmptyString)?;
        self.check_word(s)?;
        let q = prefix.iter().fold(self.init(), |q, &a| self.next(q, a));
        Ok(self.output(q, last))
    }

    /// Output name of [`FlatAutomaton::run`].
    pub fn run_output(&self, s: &[usize]) -> Result<&str> {
        Ok(&self.outputs[self.run(s)?])
    }

    /// The core semiautomaton, lettered by rendered letters.
    pub fn core(&self) -> Semiautomaton {
        Semiautomaton {
            letters: (0..self.alphabet.size()).map(|i| self.alphabet.render_index(i)).collect(),
            states: self.states.clone(),
            delta: self.delta.clone(),
            init: self.init,
        }
    }

    pub fn transition_monoid(&self, cap: u64) -> Result<TransitionMonoid> {
        TransitionMonoid::generate(self.states.len(), self.alphabet.size(), &self.delta, cap)
    }

    pub fn is_aperiodic(&self, cap: u64) -> Result<AperiodicityReport> {
        TransitionMonoid::aperiodicity_search(self.states.len(), self.alphabet.size(), &self.delta, cap)
    }

    /// States reachable from the initial state, in breadth-first order.
    pub fn reachable(&self) -> Vec<usize> {
        let k = self.alphabet.size();
        let mut seen = vec![false; self.states.len()];
        let mut order = vec![self.init()];
        seen[self.init()] = true;
        let mut head = 0;
        while head < order.len() {
            let q = order[head];
            head += 1;
            for a in 0..k {
                let p = self.next(q, a);
                if !seen[p] {
                    seen[p] = true;
                    order.push(p);
                }
            }
        }
        order
    }

    /// Restriction to the reachable states, renumbered in breadth-first order.
    pub fn trim(&self) -> FlatAutomaton {
        let order = self.reachable();
        self.renumber(&order, |q| q)
    }

    // Keeps the states in `keep` (old ids) and maps old successor ids through `class`.
    fn renumber(&self, keep: &[usize], class: impl Fn(usize) -> usize) -> FlatAutomaton {
        let k = self.alphabet.size();
        let mut new_id = HashMap::new();
        for (i, &q) in keep.iter().enumerate() {
            new_id.insert(class(q), i as u32);
        }
        let mut delta = Vec::with_capacity(keep.len() * k);
        let mut theta = Vec::with_capacity(keep.len() * k);
        for &q in keep {
            for a in 0..k {
                delta.push(new_id[&class(self.next(q, a))]);
                theta.push(self.output(q, a) as u32);
            }
        }
        FlatAutomaton {
            alphabet: self.alphabet.clone(),
            states: keep.iter().map(|&q| self.states[q].clone()).collect(),
            delta,
            init: new_id[&class(self.init())],
            outputs: self.outputs.clone(),
            theta,
        }
    }

    /// Minimal automaton implementing the same string function.
    ///
    /// Unreachable states are dropped, then Hopcroft partition refinement runs
    /// from the partition induced by output rows `σ ↦ θ(q, σ)`. Each state of
    /// the result is named after the lowest-numbered state of its block, and
    /// states are numbered in breadth-first order from the initial state.
    pub fn minimize(&self) -> FlatAutomaton {
        let trimmed = self.trim();
        let block_of = trimmed.hopcroft_blocks();
        let blocks = block_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut representative = vec![usize::MAX; blocks];
        for (q, &b) in block_of.iter().enumerate() {
            representative[b] = representative[b].min(q);
        }
        // breadth-first order over blocks
        let k = trimmed.alphabet.size();
        let mut seen = vec![false; blocks];
        let mut order = vec![representative[block_of[trimmed.init()]]];
        seen[block_of[trimmed.init()]] = true;
        let mut head = 0;
        while head < order.len() {
            let q = order[head];
            head += 1;
            for a in 0..k {
                let b = block_of[trimmed.next(q, a)];
                if !seen[b] {
                    seen[b] = true;
                    order.push(representative[b]);
                }
            }
        }
        trimmed.renumber(&order, |q| representative[block_of[q]])
    }

    fn hopcroft_blocks(&self) -> Vec<usize> {
        let n = self.states.len();
        let k = self.alphabet.size();

        // inverse transitions in compressed rows: inv[a] lists predecessors grouped by target
        let mut inv_start = vec![vec![0usize; n + 1]; k];
        let mut inv = vec![vec![0u32; n]; k];
        for a in 0..k {
            let starts = &mut inv_start[a];
            for q in 0..n {
                starts[self.next(q, a) + 1] += 1;
            }
            for i in 0..n {
                starts[i + 1] += starts[i];
            }
            let mut fill = starts.clone();
            for q in 0..n {
                let t = self.next(q, a);
                inv[a][fill[t]] = q as u32;
                fill[t] += 1;
            }
        }

        let mut row_block: HashMap<&[u32], usize> = HashMap::new();
        let mut block_of = vec![0usize; n];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (q, slot) in block_of.iter_mut().enumerate() {
            let row = &self.theta[q * k..(q + 1) * k];
            let b = *row_block.entry(row).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            *slot = b;
            blocks[b].push(q);
        }

        let mut pending: VecDeque<(usize, usize)> = VecDeque::new();
        let mut queued: HashSet<(usize, usize)> = HashSet::new();
        for b in 0..blocks.len() {
            for a in 0..k {
                pending.push_back((b, a));
                queued.insert((b, a));
            }
        }

        let mut marked = vec![false; n];
        let mut touched_blocks: Vec<usize> = Vec::new();
        let mut marked_in: HashMap<usize, Vec<usize>> = HashMap::new();
        while let Some((splitter, a)) = pending.pop_front() {
            queued.remove(&(splitter, a));
            for &t in &blocks[splitter] {
                for &p in &inv[a][inv_start[a][t]..inv_start[a][t + 1]] {
                    let p = p as usize;
                    if !marked[p] {
                        marked[p] = true;
                        let b = block_of[p];
                        marked_in.entry(b).or_insert_with(|| {
                            touched_blocks.push(b);
                            Vec::new()
                        });
                        marked_in.get_mut(&b).unwrap().push(p);
                    }
                }
            }
            for b in touched_blocks.drain(..) {
                let inside = marked_in.remove(&b).unwrap();
                for &p in &inside {
                    marked[p] = false;
                }
                if inside.len() == blocks[b].len() {
                    continue;
                }
                let inside_set: HashSet<usize> = inside.iter().copied().collect();
                let outside: Vec<usize> = blocks[b].iter().copied().filter(|q| !inside_set.contains(q)).collect();
                let new_b = blocks.len();
                // the marked part moves to the new block
                for &p in &inside {
                    block_of[p] = new_b;
                }
                blocks[b] = outside;
                blocks.push(inside);
                for c in 0..k {
                    if queued.contains(&(b, c)) {
                        pending.push_back((new_b, c));
                        queued.insert((new_b, c));
                    } else {
                        let smaller = if blocks[new_b].len() < blocks[b].len() { new_b } else { b };
                        pending.push_back((smaller, c));
                        queued.insert((smaller, c));
                    }
                }
            }
        }
        block_of
    }

    /// Checks that both automata implement the same function.
    ///
    /// With identical alphabets the reachable part of the product is explored
    /// exactly and a shortest counterexample is returned. Otherwise letters are
    /// matched by their rendering and all strings up to `max_len` are compared.
    pub fn equivalent(&self, other: &FlatAutomaton, max_len: usize) -> Result<Equivalence> {
        if self.alphabet == other.alphabet {
            return Ok(self.equivalent_exact(other));
        }
        let mapping = (0..self.alphabet.size())
            .map(|a| {
                let name = self.alphabet.render_index(a);
                other
                    .alphabet
                    .parse_letter(&name)
                    .map(|l| other.alphabet.index_of(&l))
                    .map_err(|_| Error::UnknownLetter { letter: name, position: 0 })
            })
            .collect::<Result<Vec<_>>>()?;
        let k = self.alphabet.size();
        let mut frontier: Vec<(Vec<usize>, usize, usize)> = vec![(Vec::new(), self.init(), other.init())];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(frontier.len() * k);
            for (word, p, q) in &frontier {
                for a in 0..k {
                    let b = mapping[a];
                    let left = &self.outputs[self.output(*p, a)];
                    let right = &other.outputs[other.output(*q, b)];
                    let mut w = word.clone();
                    w.push(a);
                    if left != right {
                        return Ok(Equivalence::Counterexample {
                            word: w,
                            left: left.clone(),
                            right: right.clone(),
                        });
                    }
                    next.push((w, self.next(*p, a), other.next(*q, b)));
                }
            }
            frontier = next;
        }
        Ok(Equivalence::Equivalent)
    }

    fn equivalent_exact(&self, other: &FlatAutomaton) -> Equivalence {
        let k = self.alphabet.size();
        let start = (self.init(), other.init());
        let mut parent: HashMap<(usize, usize), Option<((usize, usize), usize)>> = HashMap::new();
        parent.insert(start, None);
        let mut queue = VecDeque::from([start]);
        while let Some((p, q)) = queue.pop_front() {
            for a in 0..k {
                let left = &self.outputs[self.output(p, a)];
                let right = &other.outputs[other.output(q, a)];
                if left != right {
                    let mut word = vec![a];
                    let mut cur = (p, q);
                    while let Some(Some((prev, letter))) = parent.get(&cur) {
                        word.push(*letter);
                        cur = *prev;
                    }
                    word.reverse();
                    return Equivalence::Counterexample {
                        word,
                        left: left.clone(),
                        right: right.clone(),
                    };
                }
                let succ = (self.next(p, a), other.next(q, a));
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(succ) {
                    e.insert(Some(((p, q), a)));
                    queue.push_back(succ);
                }
            }
        }
        Equivalence::Equivalent
    }

    pub fn to_file(&self) -> FlatAutomatonFile {
        let k = self.alphabet.size();
        let mut transitions = Vec::with_capacity(self.states.len() * k);
        for q in 0..self.states.len() {
            for a in 0..k {
                transitions.push(TransitionEntry {
                    from: self.states[q].clone(),
                    letter: self.alphabet.render_index(a),
                    to: self.states[self.next(q, a)].clone(),
                    output: self.outputs[self.output(q, a)].clone(),
                });
            }
        }
        FlatAutomatonFile {
            alphabet: self.alphabet.coords().to_vec(),
            states: self.states.clone(),
            init: self.states[self.init()].clone(),
            outputs: self.outputs.clone(),
            transitions,
        }
    }

    pub fn from_file(file: &FlatAutomatonFile) -> Result<Self> {
        let alphabet = FactoredAlphabet::new(file.alphabet.clone())?;
        let k = alphabet.size();
        let n = file.states.len();
        let state = |name: &str| {
            file.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::Parse(format!("unknown state `{name}`")))
        };
        let output = |name: &str| {
            file.outputs
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::Parse(format!("unknown output `{name}`")))
        };
        let mut delta = vec![u32::MAX; n * k];
        let mut theta = vec![u32::MAX; n * k];
        for t in &file.transitions {
            let q = state(&t.from)?;
            let a = alphabet
                .parse_letter(&t.letter)
                .map_err(|e| Error::Parse(format!("letter `{}`: {e}", t.letter)))?;
            let a = alphabet.index_of(&a);
            delta[q * k + a] = state(&t.to)? as u32;
            theta[q * k + a] = output(&t.output)? as u32;
        }
        if delta.contains(&u32::MAX) {
            return Err(Error::Parse("transition table is not total".into()));
        }
        Self::new(alphabet, file.states.clone(), delta, state(&file.init)?, file.outputs.clone(), theta)
    }

    /// Plain-text listing: header lines, then one `from letter -> to / output` line per transition.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alphabet {}", self.alphabet);
        let _ = writeln!(out, "states {}", self.states.len());
        let _ = writeln!(out, "init {}", self.states[self.init()]);
        let _ = writeln!(out, "outputs {}", self.outputs.join(" "));
        let k = self.alphabet.size();
        for q in 0..self.states.len() {
            for a in 0..k {
                let _ = writeln!(
                    out,
                    "{} {} -> {} / {}",
                    self.states[q],
                    self.alphabet.render_index(a),
                    self.states[self.next(q, a)],
                    self.outputs[self.output(q, a)]
                );
            }
        }
        out
    }

    /// Graphviz rendering. Edges are labelled `letter/output`; for `{0,1}`
    /// outputs, a state whose incoming transitions all output 1 is drawn with
    /// a double circle.
    pub fn to_dot(&self) -> String {
        let k = self.alphabet.size();
        let n = self.states.len();
        let binary = self.outputs.len() <= 2 && self.outputs.iter().all(|o| o == "0" || o == "1");
        let mut accepting = vec![None::<bool>; n];
        if binary {
            for q in 0..n {
                for a in 0..k {
                    let t = self.next(q, a);
                    let one = self.outputs[self.output(q, a)] == "1";
                    accepting[t] = Some(accepting[t].unwrap_or(true) && one);
                }
            }
        }
        let mut out = String::from("digraph automaton {\n  rankdir=LR;\n  __start [shape=point];\n");
        for q in 0..n {
            let shape = if accepting[q] == Some(true) { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  s{q} [label=\"{}\", shape={shape}];", escape(&self.states[q]));
        }
        let _ = writeln!(out, "  __start -> s{};", self.init());
        for q in 0..n {
            let mut edges: Vec<((usize, usize), Vec<String>)> = Vec::new();
            for a in 0..k {
                let key = (self.next(q, a), self.output(q, a));
                let label = self.alphabet.render_index(a);
                match edges.iter_mut().find(|(e, _)| *e == key) {
                    Some((_, labels)) => labels.push(label),
                    None => edges.push((key, vec![label])),
                }
            }
            for ((t, o), labels) in edges {
                let _ = writeln!(
                    out,
                    "  s{q} -> s{t} [label=\"{}/{}\"];",
                    escape(&labels.join(", ")),
                    escape(&self.outputs[o])
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// JSON form of a flat automaton.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatAutomatonFile {
    pub alphabet: Vec<Domain>,
    pub states: Vec<String>,
    pub init: String,
    pub outputs: Vec<String>,
    pub transitions: Vec<TransitionEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionEntry {
    pub from: String,
    pub letter: String,
    pub to: String,
    pub output: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn random_flat(n: usize, k: usize, outs: usize, delta: &[usize], theta: &[usize]) -> FlatAutomaton {
        let alphabet = FactoredAlphabet::flat("x", names("a", k)).unwrap();
        FlatAutomaton::from_fn(
            alphabet,
            names("q", n),
            0,
            names("o", outs),
            |q, a| delta[(q * k + a) % delta.len()] % n,
            |q, a| theta[(q * k + a) % theta.len()] % outs,
        )
        .unwrap()
    }

    fn all_words(k: usize, max_len: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut layer = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for a in 0..k {
                    let mut v: Vec<usize> = w.clone();
                    v.push(a);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    // Oracle: two states are equivalent when they agree on every word up to length n.
    fn nerode_brute_force_count(a: &FlatAutomaton) -> usize {
        let trimmed = a.trim();
        let n = trimmed.num_states();
        let words = all_words(trimmed.num_letters(), n);
        let signature = |q: usize| -> Vec<usize> {
            words
                .iter()
                .map(|w| {
                    let (last, prefix) = w.split_last().unwrap();
                    let s = prefix.iter().fold(q, |s, &x| trimmed.next(s, x));
                    trimmed.output(s, *last)
                })
                .collect()
        };
        (0..n).map(signature).collect::<HashSet<_>>().len()
    }

    #[test]
    fn empty_string_is_rejected() {
        let a = random_flat(2, 2, 2, &[1, 0], &[0, 1]);
        assert_eq!(a.run(&[]), Err(Error::EmptyString));
        assert!(matches!(a.run(&[5]), Err(Error::UnknownLetter { position: 0, .. })));
    }

    #[test]
    fn single_letter_reads_initial_state() {
        let a = random_flat(3, 2, 3, &[1, 2, 0, 1], &[2, 1, 0]);
        for x in 0..2 {
            assert_eq!(a.run(&[x]).unwrap(), a.output(a.init(), x));
        }
    }

    #[test]
    fn semiautomaton_unknown_letter_is_named() {
        let d = Semiautomaton::from_fn(["a", "b"], ["0", "1"], 0, |q, a| (q + a) % 2).unwrap();
        assert_eq!(d.run_names(&[]).unwrap(), 0);
        match d.run_names(&["a", "c"]) {
            Err(Error::UnknownLetter { letter, position }) => {
                assert_eq!(letter, "c");
                assert_eq!(position, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn minimize_merges_identical_states() {
        // q1 and q2 have identical rows and successors
        let alphabet = FactoredAlphabet::flat("x", ["a", "b"]).unwrap();
        let a = FlatAutomaton::new(
            alphabet,
            names("q", 3),
            vec![1, 2, 1, 2, 1, 2],
            0,
            vec!["0".into(), "1".into()],
            vec![0, 0, 1, 0, 1, 0],
        )
        .unwrap();
        let m = a.minimize();
        assert_eq!(m.num_states(), 2);
        assert!(a.equivalent(&m, 0).unwrap().is_equivalent());
        assert_eq!(m.minimize().num_states(), 2);
    }

    #[test]
    fn minimize_drops_unreachable_states() {
        let alphabet = FactoredAlphabet::flat("x", ["a"]).unwrap();
        let a = FlatAutomaton::new(alphabet, names("q", 2), vec![0, 0], 0, vec!["0".into(), "1".into()], vec![0, 1])
            .unwrap();
        assert_eq!(a.minimize().num_states(), 1);
    }

    #[test]
    fn counterexample_is_shortest() {
        let alphabet = FactoredAlphabet::flat("x", ["a", "b"]).unwrap();
        let outs = vec!["0".to_string(), "1".to_string()];
        // outputs 1 on b after at least one a
        let left = FlatAutomaton::from_fn(alphabet.clone(), names("q", 2), 0, outs.clone(), |q, a| if a == 0 { 1 } else { q }, |q, a| usize::from(q == 1 && a == 1)).unwrap();
        let right = FlatAutomaton::from_fn(alphabet, names("q", 1), 0, outs, |_, _| 0, |_, _| 0).unwrap();
        match left.equivalent(&right, 0).unwrap() {
            Equivalence::Counterexample { word, left, right } => {
                assert_eq!(word, vec![0, 1]);
                assert_eq!((left.as_str(), right.as_str()), ("1", "0"));
            }
            Equivalence::Equivalent => panic!("expected a counterexample"),
        }
    }

    #[test]
    fn bounded_equivalence_across_factorings() {
        let flat = FactoredAlphabet::flat("x", ["a", "b"]).unwrap();
        let other = FactoredAlphabet::flat("y", ["b", "a"]).unwrap();
        let outs = vec!["0".to_string(), "1".to_string()];
        let left = FlatAutomaton::from_fn(flat, names("q", 1), 0, outs.clone(), |_, _| 0, |_, a| a).unwrap();
        // same function once letters are matched by name
        let right = FlatAutomaton::from_fn(other, names("p", 1), 0, outs, |_, _| 0, |_, a| 1 - a).unwrap();
        assert!(left.equivalent(&right, 4).unwrap().is_equivalent());
    }

    #[test]
    fn file_round_trip() {
        let a = random_flat(3, 2, 2, &[1, 2, 0, 0, 2, 1], &[0, 1, 1]);
        let back = FlatAutomaton::from_file(&a.to_file()).unwrap();
        assert_eq!(a, back);
        let json = serde_json::to_string(&a.to_file()).unwrap();
        let parsed: FlatAutomatonFile = serde_json::from_str(&json).unwrap();
        assert_eq!(FlatAutomaton::from_file(&parsed).unwrap(), a);
        assert!(a.to_dot().starts_with("digraph"));
        assert!(a.to_text().contains("->"));
    }

    #[test]
    fn dot_marks_accepting_targets() {
        let alphabet = FactoredAlphabet::flat("x", ["a", "b"]).unwrap();
        let outs = vec!["0".to_string(), "1".to_string()];
        // entering q1 always outputs 1
        let a = FlatAutomaton::from_fn(alphabet, names("q", 2), 0, outs, |_, x| x, |_, x| x).unwrap();
        let dot = a.to_dot();
        assert!(dot.contains("label=\"q1\", shape=doublecircle"));
        assert!(dot.contains("label=\"q0\", shape=circle"));
    }

    // Oracle: brute force over all powers of every monoid element.
    fn brute_aperiodic(d: &Semiautomaton) -> bool {
        let n = d.num_states();
        let k = d.num_letters();
        let mut all: HashSet<Vec<u32>> = HashSet::new();
        all.insert((0..n as u32).collect());
        loop {
            let snapshot: Vec<Vec<u32>> = all.iter().cloned().collect();
            let before = all.len();
            for f in &snapshot {
                for a in 0..k {
                    all.insert(f.iter().map(|&q| d.table()[q as usize * k + a]).collect());
                }
            }
            if all.len() == before {
                break;
            }
        }
        all.iter().all(|f| {
            let mut powers = vec![f.clone()];
            for _ in 0..2 * n + 2 {
                let last = powers.last().unwrap();
                powers.push(last.iter().map(|&q| f[q as usize]).collect());
            }
            // the eventual cycle of powers has length one
            let tail = &powers[n + 1..];
            tail.windows(2).all(|w| w[0] == w[1])
        })
    }

    #[test]
    fn counter_is_not_aperiodic() {
        let d = Semiautomaton::from_fn(["inc", "read"], names("", 5), 0, |q, a| if a == 0 { (q + 1) % 5 } else { q }).unwrap();
        let report = d.is_aperiodic(100).unwrap();
        assert!(!report.aperiodic);
        assert_eq!(report.monoid_size, None);
        assert_eq!(report.witness, Some(vec![0]));
        let full = d.transition_monoid(100).unwrap().aperiodicity();
        assert_eq!(full.monoid_size, Some(5));
        assert!(!full.aperiodic);
    }

    #[test]
    fn monoid_cap_is_enforced() {
        let d = Semiautomaton::from_fn(["inc"], names("", 7), 0, |q, _| (q + 1) % 7).unwrap();
        assert!(d.transition_monoid(3).unwrap_err().is_cap());
    }

    proptest! {
        #[test]
        fn run_composes(delta in proptest::collection::vec(0usize..4, 12), s in proptest::collection::vec(0usize..3, 0..8), t in proptest::collection::vec(0usize..3, 0..8)) {
            let d = Semiautomaton::from_fn(["a", "b", "c"], names("q", 4), 0, |q, a| delta[q * 3 + a]).unwrap();
            let mut st = s.clone();
            st.extend(&t);
            let mid = d.run(&s).unwrap();
            prop_assert_eq!(d.run(&st).unwrap(), d.run_from(mid, &t).unwrap());
        }

        #[test]
        fn minimize_preserves_function(n in 1usize..7, k in 1usize..4, delta in proptest::collection::vec(0usize..7, 28), theta in proptest::collection::vec(0usize..3, 28), words in proptest::collection::vec(proptest::collection::vec(0usize..4, 1..7), 20)) {
            let a = random_flat(n, k, 2, &delta, &theta);
            let m = a.minimize();
            prop_assert!(m.num_states() <= a.num_states());
            prop_assert_eq!(m.num_states(), nerode_brute_force_count(&a));
            for w in words {
                let w: Vec<usize> = w.into_iter().map(|x| x % k).collect();
                prop_assert_eq!(a.run(&w).unwrap(), m.run(&w).unwrap());
            }
            prop_assert!(a.equivalent(&m, 0).unwrap().is_equivalent());
            prop_assert_eq!(m.minimize().num_states(), m.num_states());
        }

        #[test]
        fn aperiodicity_matches_brute_force(n in 1usize..5, k in 1usize..3, delta in proptest::collection::vec(0usize..4, 8)) {
            let d = Semiautomaton::from_fn(names("a", k), names("q", n), 0, |q, a| delta[q * k + a] % n).unwrap();
            prop_assert_eq!(d.is_aperiodic(100_000).unwrap().aperiodic, brute_aperiodic(&d));
        }

        #[test]
        fn equivalence_is_reflexive_and_symmetric(n in 1usize..5, delta in proptest::collection::vec(0usize..5, 10), t1 in proptest::collection::vec(0usize..2, 10), t2 in proptest::collection::vec(0usize..2, 10)) {
            let a = random_flat(n, 2, 2, &delta, &t1);
            let b = random_flat(n, 2, 2, &delta, &t2);
            prop_assert!(a.equivalent(&a, 0).unwrap().is_equivalent());
            prop_assert_eq!(a.equivalent(&b, 0).unwrap().is_equivalent(), b.equivalent(&a, 0).unwrap().is_equivalent());
        }
    }
}
