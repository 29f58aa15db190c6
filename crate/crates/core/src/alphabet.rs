//! Factored alphabets, letters, projections and finite classes of letter
//! functions.
//!
//! A factored alphabet is a list of named coordinates, each with its own finite
//! domain. A letter holds one value per coordinate, stored as the position of
//! the value inside its domain. Letters are numbered in mixed radix with the
//! first coordinate most significant, so tables indexed by letter number can
//! be built for any alphabet.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named finite domain of symbolic values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub name: String,
    pub values: Vec<String>,
}

impl Domain {
    pub fn new<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Result<Self> {
        let domain = Domain {
            name: name.into(),
            values: values.into_iter().map(Into::into).collect(),
        };
        domain.validate()?;
        Ok(domain)
    }

    /// The domain `{0, 1}`; coordinates over it count as one propositional variable.
    pub fn boolean(name: impl Into<String>) -> Self {
        Domain {
            name: name.into(),
            values: vec!["0".into(), "1".into()],
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidAlphabet(format!("domain `{}` is empty", self.name)));
        }
        let mut seen = HashSet::new();
        for v in &self.values {
            if !seen.insert(v.as_str()) {
                return Err(Error::InvalidAlphabet(format!(
                    "value `{v}` appears twice in domain `{}`",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn position(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }

    pub fn value(&self, pos: usize) -> &str {
        &self.values[pos]
    }

    pub fn is_boolean(&self) -> bool {
        self.values.len() == 2 && self.values[0] == "0" && self.values[1] == "1"
    }
}

/// A tuple of values, one per coordinate of its alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub Vec<u32>);

impl Letter {
    pub fn new(values: Vec<u32>) -> Self {
        Letter(values)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }
}

/// The factored alphabet `X^a`: an ordered list of coordinate domains.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredAlphabet {
    coords: Vec<Domain>,
    size: usize,
}

impl FactoredAlphabet {
    /// Builds an alphabet of arity at least one.
    pub fn new(coords: Vec<Domain>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidAlphabet("arity must be at least 1".into()));
        }
        Self::with_coords(coords)
    }

    /// A single-coordinate alphabet.
    pub fn flat<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(vec![Domain::new(name, values)?])
    }

    // Arity zero is only reachable through the empty projection; it has one letter.
    fn with_coords(coords: Vec<Domain>) -> Result<Self> {
        let mut names = HashSet::new();
        let mut size: usize = 1;
        for c in &coords {
            c.validate()?;
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidAlphabet(format!("coordinate name `{}` is repeated", c.name)));
            }
            size = size
                .checked_mul(c.len())
                .ok_or_else(|| Error::InvalidAlphabet("alphabet too large to index".into()))?;
        }
        Ok(FactoredAlphabet { coords, size })
    }

    pub fn arity(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Domain] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &Domain {
        &self.coords[i]
    }

    /// Number of letters.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Appends a coordinate, as happens when a cascade component adds its output.
    pub fn extend(&self, domain: Domain) -> Result<Self> {
        let mut coords = self.coords.clone();
        coords.push(domain);
        Self::with_coords(coords)
    }

    /// The alphabet of the letters `project(p, x)`.
    pub fn project(&self, p: &Projection) -> Result<Self> {
        self.check_arity(p.source_arity)?;
        Self::with_coords(p.indices.iter().map(|&i| self.coords[i - 1].clone()).collect())
    }

    fn check_arity(&self, arity: usize) -> Result<()> {
        if arity != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                actual: arity,
            });
        }
        Ok(())
    }

    pub fn letter(&self, values: &[&str]) -> Result<Letter> {
        self.check_arity(values.len())?;
        values
            .iter()
            .zip(&self.coords)
            .map(|(v, c)| {
                c.position(v).map(|p| p as u32).ok_or_else(|| Error::UnknownValue {
                    coord: c.name.clone(),
                    value: v.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Letter)
    }

    /// Checks arity and value ranges.
    pub fn check(&self, letter: &Letter) -> Result<()> {
        self.check_arity(letter.arity())?;
        for (v, c) in letter.0.iter().zip(&self.coords) {
            if *v as usize >= c.len() {
                return Err(Error::UnknownValue {
                    coord: c.name.clone(),
                    value: format!("#{v}"),
                });
            }
        }
        Ok(())
    }

    pub fn contains(&self, letter: &Letter) -> bool {
        self.check(letter).is_ok()
    }

    /// Mixed-radix number of a letter, first coordinate most significant.
    pub fn index_of(&self, letter: &Letter) -> usize {
        self.index_of_values(&letter.0)
    }

    pub fn index_of_values(&self, values: &[u32]) -> usize {
        values
            .iter()
            .zip(&self.coords)
            .fold(0, |acc, (v, c)| acc * c.len() + *v as usize)
    }

    pub fn letter_at(&self, mut index: usize) -> Letter {
        let mut values = vec![0u32; self.arity()];
        for (slot, c) in values.iter_mut().zip(&self.coords).rev() {
            *slot = (index % c.len()) as u32;
            index /= c.len();
        }
        Letter(values)
    }

    /// All letters in index order.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.size).map(move |i| self.letter_at(i))
    }

    /// Renders a letter as its value names joined by commas.
    pub fn render(&self, letter: &Letter) -> String {
        if self.arity() == 0 {
            return "()".into();
        }
        letter
            .0
            .iter()
            .zip(&self.coords)
            .map(|(v, c)| c.values.get(*v as usize).map(String::as_str).unwrap_or("?"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn render_index(&self, index: usize) -> String {
        self.render(&self.letter_at(index))
    }

    /// Parses the rendering produced by [`FactoredAlphabet::render`].
    pub fn parse_letter(&self, text: &str) -> Result<Letter> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        self.letter(&parts)
    }

    /// Parses whitespace-separated letters into letter indices.
    pub fn parse_word(&self, text: &str) -> Result<Vec<usize>> {
        text.split_whitespace()
            .enumerate()
            .map(|(position, tok)| {
                self.parse_letter(tok)
                    .map(|l| self.index_of(&l))
                    .map_err(|_| Error::UnknownLetter {
                        letter: tok.to_string(),
                        position,
                    })
            })
            .collect()
    }

    /// Inverse of [`FactoredAlphabet::parse_word`].
    pub fn render_word(&self, word: &[usize]) -> String {
        word.iter().map(|&a| self.render_index(a)).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Display for FactoredAlphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .map(|c| format!("{}:{{{}}}", c.name, c.values.join(",")))
            .collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// The projection `π_J` onto a set `J` of 1-based coordinate indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Projection {
    indices: Vec<usize>,
    source_arity: usize,
}

impl Projection {
    /// Indices are 1-based; they are sorted, and duplicates or out-of-range
    /// indices are rejected.
    pub fn new(mut indices: Vec<usize>, source_arity: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidProjection(format!("repeated index in {indices:?}")));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > source_arity) {
            return Err(Error::InvalidProjection(format!(
                "index {bad} outside [1, {source_arity}]"
            )));
        }
        Ok(Projection { indices, source_arity })
    }

    pub fn identity(arity: usize) -> Self {
        Projection {
            indices: (1..=arity).collect(),
            source_arity: arity,
        }
    }

    /// All projections of degree `m` on arity `a`, in lexicographic order.
    pub fn all(a: usize, m: usize) -> Result<Vec<Projection>> {
        if m > a {
            return Err(Error::InvalidProjection(format!("degree {m} exceeds arity {a}")));
        }
        let mut out = Vec::new();
        let mut combo: Vec<usize> = (1..=m).collect();
        loop {
            out.push(Projection {
                indices: combo.clone(),
                source_arity: a,
            });
            // advance to the next m-combination of [1, a]
            let mut i = m;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                if combo[i] < a - (m - 1 - i) {
                    combo[i] += 1;
                    for j in i + 1..m {
                        combo[j] = combo[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn source_arity(&self) -> usize {
        self.source_arity
    }

    pub fn degree(&self) -> usize {
        self.indices.len()
    }

    pub fn apply(&self, x: &Letter) -> Result<Letter> {
        project(self, x)
    }
}

/// Returns the values of `x` at the indices of `p`, in ascending index order.
pub fn project(p: &Projection, x: &Letter) -> Result<Letter> {
    if x.arity() != p.source_arity {
        return Err(Error::ArityMismatch {
            expected: p.source_arity,
            actual: x.arity(),
        });
    }
    Ok(Letter(p.indices.iter().map(|&i| x.0[i - 1]).collect()))
}

/// `|π_m^a|`, the number of dependency sets of degree `m` over arity `a`.
pub fn projection_class_size(a: usize, m: usize) -> Result<BigUint> {
    if m > a {
        return Err(Error::InvalidProjection(format!("degree {m} exceeds arity {a}")));
    }
    Ok(binomial(a as u64, m as u64))
}

pub(crate) fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// A propositional variable of the boolean view of an alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolVar {
    pub coord: usize,
    /// `None` for a `{0,1}` coordinate, otherwise the indicated value.
    pub value: Option<u32>,
    pub name: String,
}

/// Propositional reading of letters used by monotone DNF functions.
///
/// A coordinate over `{0,1}` is one variable named after the coordinate; any
/// other coordinate contributes one indicator variable `coord=value` per
/// domain value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanView {
    vars: Vec<BoolVar>,
}

impl BooleanView {
    pub const MAX_VARIABLES: usize = 64;

    pub fn of(signature: &FactoredAlphabet) -> Result<Self> {
        let mut vars = Vec::new();
        for (ci, c) in signature.coords().iter().enumerate() {
            if c.is_boolean() {
                vars.push(BoolVar {
                    coord: ci,
                    value: None,
                    name: c.name.clone(),
                });
            } else {
                for (vi, v) in c.values.iter().enumerate() {
                    vars.push(BoolVar {
                        coord: ci,
                        value: Some(vi as u32),
                        name: format!("{}={}", c.name, v),
                    });
                }
            }
        }
        if vars.len() > Self::MAX_VARIABLES {
            return Err(Error::InvalidClass(format!(
                "boolean view has {} variables, at most {} supported",
                vars.len(),
                Self::MAX_VARIABLES
            )));
        }
        Ok(BooleanView { vars })
    }

    pub fn vars(&self) -> &[BoolVar] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Bit `i` is set when variable `i` holds on the letter.
    pub fn assignment(&self, values: &[u32]) -> u64 {
        self.vars.iter().enumerate().fold(0u64, |acc, (i, var)| {
            let v = values[var.coord];
            let holds = match var.value {
                None => v == 1,
                Some(x) => v == x,
            };
            if holds {
                acc | (1 << i)
            } else {
                acc
            }
        })
    }
}

/// A single comparison inside a guarded function.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Guard {
    /// Coordinate equals the value at the given domain position.
    Eq { coord: usize, value: u32 },
    /// Coordinate sits at or after the given domain position.
    Ge { coord: usize, value: u32 },
}

impl Guard {
    fn holds(&self, values: &[u32]) -> bool {
        match *self {
            Guard::Eq { coord, value } => values[coord] == value,
            Guard::Ge { coord, value } => values[coord] >= value,
        }
    }

    fn coord(&self) -> usize {
        match *self {
            Guard::Eq { coord, .. } | Guard::Ge { coord, .. } => coord,
        }
    }
}

/// A total function from the letters of a signature to a codomain.
///
/// Codomain values are positions in a codomain list supplied by the caller
/// (for input functions, the internal alphabet of the core).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LetterFn {
    /// Explicit value for every letter, by letter index.
    Table(Vec<u32>),
    /// Monotone DNF over the boolean view. An empty term is the constant true.
    MonoDnf {
        terms: Vec<Vec<usize>>,
        on_true: u32,
        on_false: u32,
    },
    /// Conjunction of `x_i ≥ t_i`, with `t_i` a domain position; position 0
    /// places no constraint on the coordinate.
    Threshold {
        thresholds: Vec<u32>,
        on_true: u32,
        on_false: u32,
    },
    /// Disjunction of conjunctions of guards.
    Guards {
        clauses: Vec<Vec<Guard>>,
        on_true: u32,
        on_false: u32,
    },
    /// The letter itself; the codomain is the signature's letter list.
    Identity,
}

impl LetterFn {
    /// Builds the lookup table over all letters of `signature`.
    pub fn compile(&self, signature: &FactoredAlphabet, codomain: usize) -> Result<Vec<u32>> {
        let check_out = |v: u32| -> Result<()> {
            if v as usize >= codomain {
                return Err(Error::InvalidClass(format!(
                    "output position {v} outside codomain of size {codomain}"
                )));
            }
            Ok(())
        };
        match self {
            LetterFn::Table(table) => {
                if table.len() != signature.size() {
                    return Err(Error::InvalidClass(format!(
                        "table has {} entries, signature has {} letters",
                        table.len(),
                        signature.size()
                    )));
                }
                for &v in table {
                    check_out(v)?;
                }
                Ok(table.clone())
            }
            LetterFn::MonoDnf { terms, on_true, on_false } => {
                check_out(*on_true)?;
                check_out(*on_false)?;
                let view = BooleanView::of(signature)?;
                let masks = terms
                    .iter()
                    .map(|t| {
                        t.iter().try_fold(0u64, |acc, &v| {
                            if v >= view.len() {
                                Err(Error::InvalidClass(format!("variable {v} outside boolean view")))
                            } else {
                                Ok(acc | (1 << v))
                            }
                        })
                    })
                    .collect::<Result<Vec<u64>>>()?;
                Ok(signature
                    .letters()
                    .map(|l| {
                        let a = view.assignment(&l.0);
                        if masks.iter().any(|&m| a & m == m) {
                            *on_true
                        } else {
                            *on_false
                        }
                    })
                    .collect())
            }
            LetterFn::Threshold { thresholds, on_true, on_false } => {
                check_out(*on_true)?;
                check_out(*on_false)?;
                if thresholds.len() != signature.arity() {
                    return Err(Error::ArityMismatch {
                        expected: signature.arity(),
                        actual: thresholds.len(),
                    });
                }
                for (t, c) in thresholds.iter().zip(signature.coords()) {
                    if *t as usize >= c.len() {
                        return Err(Error::InvalidClass(format!("threshold outside domain `{}`", c.name)));
                    }
                }
                Ok(signature
                    .letters()
                    .map(|l| {
                        if l.0.iter().zip(thresholds).all(|(v, t)| v >= t) {
                            *on_true
                        } else {
                            *on_false
                        }
                    })
                    .collect())
            }
            LetterFn::Guards { clauses, on_true, on_false } => {
                check_out(*on_true)?;
                check_out(*on_false)?;
                for g in clauses.iter().flatten() {
                    if g.coord() >= signature.arity() {
                        return Err(Error::InvalidClass(format!("guard coordinate {} out of range", g.coord())));
                    }
                }
                Ok(signature
                    .letters()
                    .map(|l| {
                        if clauses.iter().any(|c| c.iter().all(|g| g.holds(&l.0))) {
                            *on_true
                        } else {
                            *on_false
                        }
                    })
                    .collect())
            }
            LetterFn::Identity => {
                if codomain != signature.size() {
                    return Err(Error::InvalidClass(format!(
                        "identity needs a codomain of {} letters, got {codomain}",
                        signature.size()
                    )));
                }
                Ok((0..signature.size() as u32).collect())
            }
        }
    }
}

/// The shape of a finite function class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ClassKind {
    /// Every function from the signature to the outputs.
    Table,
    /// Monotone DNFs with at most `terms` terms, over the given boolean-view
    /// variables (all of them when `None`).
    MonoDnf { terms: usize, variables: Option<Vec<usize>> },
    /// Conjunctions of per-coordinate thresholds.
    Threshold,
}

/// A finite, enumerable class of letter functions.
///
/// For the DNF and threshold kinds, `outputs` has exactly two values: the first
/// is returned when the formula holds, the second otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteFunctionClass {
    kind: ClassKind,
    signature: FactoredAlphabet,
    outputs: Domain,
}

impl FiniteFunctionClass {
    pub fn new(kind: ClassKind, signature: FactoredAlphabet, outputs: Domain) -> Result<Self> {
        outputs.validate()?;
        match &kind {
            ClassKind::Table => {}
            ClassKind::MonoDnf { terms, variables } => {
                if outputs.len() != 2 {
                    return Err(Error::InvalidClass("DNF classes need exactly two outputs".into()));
                }
                if *terms == 0 {
                    return Err(Error::InvalidClass("DNF classes need at least one term".into()));
                }
                let view = BooleanView::of(&signature)?;
                if let Some(vars) = variables {
                    let mut sorted = vars.clone();
                    sorted.sort_unstable();
                    sorted.dedup();
                    if sorted.len() != vars.len() || sorted.iter().any(|&v| v >= view.len()) {
                        return Err(Error::InvalidClass("DNF variable list is invalid".into()));
                    }
                }
            }
            ClassKind::Threshold => {
                if outputs.len() != 2 {
                    return Err(Error::InvalidClass("threshold classes need exactly two outputs".into()));
                }
            }
        }
        Ok(FiniteFunctionClass { kind, signature, outputs })
    }

    /// `k`-term monotone DNFs over all variables of the signature.
    pub fn mono_dnf(terms: usize, signature: FactoredAlphabet, outputs: Domain) -> Result<Self> {
        Self::new(ClassKind::MonoDnf { terms, variables: None }, signature, outputs)
    }

    pub fn kind(&self) -> &ClassKind {
        &self.kind
    }

    pub fn signature(&self) -> &FactoredAlphabet {
        &self.signature
    }

    pub fn outputs(&self) -> &Domain {
        &self.outputs
    }

    /// The variables a DNF class ranges over, as boolean-view positions.
    pub fn dnf_variables(&self) -> Result<Vec<usize>> {
        match &self.kind {
            ClassKind::MonoDnf { variables, .. } => Ok(match variables {
                Some(v) => {
                    let mut v = v.clone();
                    v.sort_unstable();
                    v
                }
                None => (0..BooleanView::of(&self.signature)?.len()).collect(),
            }),
            _ => Err(Error::InvalidClass("not a DNF class".into())),
        }
    }

    /// Number of distinct functions in the class.
    pub fn cardinality(&self) -> Result<BigUint> {
        match &self.kind {
            ClassKind::Table => Ok(BigUint::from(self.outputs.len()).pow(self.signature.size() as u32)),
            ClassKind::Threshold => Ok(self
                .signature
                .coords()
                .iter()
                .fold(BigUint::one(), |acc, c| acc * BigUint::from(c.len()))),
            ClassKind::MonoDnf { terms, .. } => {
                let n = self.dnf_variables()?.len() as u32;
                let two_n = BigUint::from(2u32).pow(n);
                let nonempty = &two_n - BigUint::one();
                match terms {
                    1 => Ok(two_n),
                    _ if *terms >= 2 && n <= 1 => {
                        // no two non-empty terms are incomparable
                        Ok(two_n)
                    }
                    2 => {
                        let pairs = &nonempty * (&nonempty - BigUint::one()) / BigUint::from(2u32);
                        // ordered pairs A ⊊ B with A non-empty
                        let comparable = BigUint::from(3u32).pow(n) + BigUint::one() - BigUint::from(2u32) * &two_n;
                        Ok(BigUint::one() + nonempty + pairs - comparable)
                    }
                    _ => {
                        // no closed form implemented beyond two terms; count by streaming
                        let mut count = BigUint::zero();
                        for _ in self.dnf_members()? {
                            count += 1u32;
                        }
                        Ok(count)
                    }
                }
            }
        }
    }

    fn check_cap(&self, cap: u64) -> Result<BigUint> {
        let card = self.cardinality()?;
        if card > BigUint::from(cap) {
            return Err(Error::cap("function class enumeration", &card, cap));
        }
        Ok(card)
    }

    /// All members in canonical order; errors when the class exceeds `cap`.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<LetterFn>> {
        Ok(self.members(cap)?.collect())
    }

    /// Lazily yields the members in canonical order.
    pub fn members(&self, cap: u64) -> Result<Box<dyn Iterator<Item = LetterFn> + '_>> {
        let card = self.check_cap(cap)?;
        match &self.kind {
            ClassKind::Table => {
                let radix = vec![self.outputs.len() as u32; self.signature.size()];
                let total = card.to_u64().unwrap_or(u64::MAX);
                Ok(Box::new(MixedRadix::new(radix, total).map(LetterFn::Table)))
            }
            ClassKind::Threshold => {
                let radix: Vec<u32> = self.signature.coords().iter().map(|c| c.len() as u32).collect();
                let total = card.to_u64().unwrap_or(u64::MAX);
                Ok(Box::new(MixedRadix::new(radix, total).map(|t| LetterFn::Threshold {
                    thresholds: t,
                    on_true: 0,
                    on_false: 1,
                })))
            }
            ClassKind::MonoDnf { .. } => Ok(Box::new(self.dnf_members()?)),
        }
    }

    fn dnf_members(&self) -> Result<DnfMembers> {
        let ClassKind::MonoDnf { terms, .. } = &self.kind else {
            return Err(Error::InvalidClass("not a DNF class".into()));
        };
        let vars = self.dnf_variables()?;
        let n = vars.len();
        let mut all_terms: Vec<Vec<usize>> = (1u64..(1u64 << n))
            .map(|bits| (0..n).filter(|i| bits >> i & 1 == 1).map(|i| vars[i]).collect())
            .collect();
        all_terms.sort();
        let masks = all_terms
            .iter()
            .map(|t| t.iter().fold(0u64, |acc, &v| acc | (1 << v)))
            .collect();
        Ok(DnfMembers {
            terms: all_terms,
            masks,
            max_terms: *terms,
            stack: Vec::new(),
            emitted_true: false,
            done: false,
        })
    }

    /// Whether `f` is, syntactically, a canonical member of this class.
    pub fn contains(&self, f: &LetterFn) -> bool {
        match (&self.kind, f) {
            (ClassKind::Table, LetterFn::Table(t)) => {
                t.len() == self.signature.size() && t.iter().all(|&v| (v as usize) < self.outputs.len())
            }
            (ClassKind::Threshold, LetterFn::Threshold { thresholds, on_true: 0, on_false: 1 }) => {
                thresholds.len() == self.signature.arity()
                    && thresholds.iter().zip(self.signature.coords()).all(|(t, c)| (*t as usize) < c.len())
            }
            (ClassKind::MonoDnf { terms: k, .. }, LetterFn::MonoDnf { terms, on_true: 0, on_false: 1 }) => {
                let Ok(vars) = self.dnf_variables() else { return false };
                if terms == &vec![Vec::<usize>::new()] {
                    return true;
                }
                if terms.is_empty() || terms.len() > *k {
                    return false;
                }
                let ok_term = |t: &Vec<usize>| {
                    !t.is_empty() && t.windows(2).all(|w| w[0] < w[1]) && t.iter().all(|v| vars.contains(v))
                };
                if !terms.iter().all(ok_term) || !terms.windows(2).all(|w| w[0] < w[1]) {
                    return false;
                }
                let masks: Vec<u64> = terms.iter().map(|t| t.iter().fold(0, |a, &v| a | (1u64 << v))).collect();
                masks.iter().enumerate().all(|(i, &a)| {
                    masks[i + 1..].iter().all(|&b| a & b != a && a & b != b)
                })
            }
            _ => false,
        }
    }
}

/// Counts through all vectors below `radix`, last position fastest.
struct MixedRadix {
    radix: Vec<u32>,
    current: Vec<u32>,
    remaining: u64,
}

impl MixedRadix {
    fn new(radix: Vec<u32>, total: u64) -> Self {
        let current = vec![0; radix.len()];
        MixedRadix {
            radix,
            current,
            remaining: total,
        }
    }
}

impl Iterator for MixedRadix {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let out = self.current.clone();
        for i in (0..self.radix.len()).rev() {
            self.current[i] += 1;
            if self.current[i] < self.radix[i] {
                break;
            }
            self.current[i] = 0;
        }
        Some(out)
    }
}

/// Depth-first enumeration of antichains of terms, after the constant true.
struct DnfMembers {
    terms: Vec<Vec<usize>>,
    masks: Vec<u64>,
    max_terms: usize,
    stack: Vec<usize>,
    emitted_true: bool,
    done: bool,
}

impl DnfMembers {
    fn compatible(&self, candidate: usize, upto: usize) -> bool {
        let a = self.masks[candidate];
        self.stack[..upto].iter().all(|&s| {
            let b = self.masks[s];
            a & b != a && a & b != b
        })
    }

    fn next_compatible(&self, from: usize, upto: usize) -> Option<usize> {
        (from..self.terms.len()).find(|&c| self.compatible(c, upto))
    }

    fn current(&self) -> LetterFn {
        LetterFn::MonoDnf {
            terms: self.stack.iter().map(|&i| self.terms[i].clone()).collect(),
            on_true: 0,
            on_false: 1,
        }
    }
}

impl Iterator for DnfMembers {
    type Item = LetterFn;

    fn next(&mut self) -> Option<LetterFn> {
        if self.done {
            return None;
        }
        if !self.emitted_true {
            self.emitted_true = true;
            return Some(LetterFn::MonoDnf {
                terms: vec![Vec::new()],
                on_true: 0,
                on_false: 1,
            });
        }
        if self.stack.is_empty() {
            if self.terms.is_empty() || self.max_terms == 0 {
                self.done = true;
                return None;
            }
            self.stack.push(0);
            return Some(self.current());
        }
        // extend
        if self.stack.len() < self.max_terms {
            let last = *self.stack.last().unwrap();
            if let Some(c) = self.next_compatible(last + 1, self.stack.len()) {
                self.stack.push(c);
                return Some(self.current());
            }
        }
        // advance the last position, backtracking as needed
        while let Some(last) = self.stack.pop() {
            let depth = self.stack.len();
            if let Some(c) = self.next_compatible(last + 1, depth) {
                self.stack.push(c);
                return Some(self.current());
            }
        }
        self.done = true;
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bools(n: usize) -> FactoredAlphabet {
        FactoredAlphabet::new((0..n).map(|i| Domain::boolean(format!("v{}", i + 1))).collect()).unwrap()
    }

    fn set_read() -> Domain {
        Domain::new("pi", ["set", "read"]).unwrap()
    }

    fn truth_table(f: &LetterFn, sig: &FactoredAlphabet) -> Vec<u32> {
        f.compile(sig, 2).unwrap()
    }

    #[test]
    fn project_examples() {
        let abc = FactoredAlphabet::new(vec![
            Domain::new("x", ["a", "z"]).unwrap(),
            Domain::new("y", ["b", "z"]).unwrap(),
            Domain::new("w", ["c", "z"]).unwrap(),
        ])
        .unwrap();
        let x = abc.letter(&["a", "b", "c"]).unwrap();
        let p = Projection::new(vec![1, 3], 3).unwrap();
        let y = project(&p, &x).unwrap();
        assert_eq!(abc.project(&p).unwrap().render(&y), "a,c");
        assert_eq!(project(&Projection::identity(3), &x).unwrap(), x);

        let sig = FactoredAlphabet::new(vec![
            Domain::new("x", ["blank", "wood"]).unwrap(),
            Domain::boolean("wood_out"),
        ])
        .unwrap();
        let l = sig.letter(&["wood", "1"]).unwrap();
        let p2 = Projection::new(vec![2], 2).unwrap();
        assert_eq!(sig.project(&p2).unwrap().render(&project(&p2, &l).unwrap()), "1");
    }

    #[test]
    fn project_arity_mismatch() {
        let p = Projection::new(vec![1], 2).unwrap();
        let err = project(&p, &Letter(vec![0, 0, 0])).unwrap_err();
        assert_eq!(err, Error::ArityMismatch { expected: 2, actual: 3 });
    }

    #[test]
    fn projection_rejects_bad_indices() {
        assert!(Projection::new(vec![0], 2).is_err());
        assert!(Projection::new(vec![3], 2).is_err());
        assert!(Projection::new(vec![1, 1], 2).is_err());
        assert_eq!(Projection::new(vec![2, 1], 2).unwrap().indices(), &[1, 2]);
    }

    #[test]
    fn projection_class_sizes() {
        assert_eq!(projection_class_size(5, 2).unwrap(), BigUint::from(10u32));
        assert_eq!(projection_class_size(7, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(projection_class_size(9, 5).unwrap(), BigUint::from(126u32));
        assert!(projection_class_size(2, 3).is_err());
        assert_eq!(Projection::all(5, 2).unwrap().len(), 10);
        assert_eq!(Projection::all(3, 0).unwrap().len(), 1);
    }

    #[test]
    fn alphabet_invariants() {
        assert!(FactoredAlphabet::new(vec![]).is_err());
        assert!(Domain::new("x", Vec::<String>::new()).is_err());
        assert!(Domain::new("x", ["a", "a"]).is_err());
        let a = bools(2);
        assert_eq!(a.size(), 4);
        assert!(a.letter(&["0", "2"]).is_err());
        assert!(a.letter(&["0"]).is_err());
    }

    #[test]
    fn letter_index_round_trip() {
        let a = FactoredAlphabet::new(vec![
            Domain::new("x", ["p", "q", "r"]).unwrap(),
            Domain::boolean("b"),
        ])
        .unwrap();
        for (i, l) in a.letters().enumerate() {
            assert_eq!(a.index_of(&l), i);
            assert_eq!(a.parse_letter(&a.render(&l)).unwrap(), l);
        }
    }

    #[test]
    fn table_class_cardinality_and_enumeration() {
        let c = FiniteFunctionClass::new(ClassKind::Table, bools(2), Domain::new("y", ["0", "1"]).unwrap()).unwrap();
        assert_eq!(c.cardinality().unwrap(), BigUint::from(16u32));
        let members = c.enumerate(1000).unwrap();
        assert_eq!(members.len(), 16);
        let distinct: HashSet<Vec<u32>> = members.iter().map(|f| f.compile(c.signature(), 2).unwrap()).collect();
        assert_eq!(distinct.len(), 16);
    }

    #[test]
    fn enumeration_cap_reports_cardinality() {
        let c = FiniteFunctionClass::new(ClassKind::Table, bools(3), set_read()).unwrap();
        match c.enumerate(100) {
            Err(Error::CapExceeded { size, .. }) => assert_eq!(size, "256"),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    // Oracle: every set of at most k terms (comparable ones included), deduplicated by truth table.
    fn dnf_truth_table_count(n: usize, k: usize) -> usize {
        let sig = bools(n);
        let subsets: Vec<Vec<usize>> = (0u64..(1 << n))
            .map(|b| (0..n).filter(|i| b >> i & 1 == 1).collect())
            .collect();
        let mut seen = HashSet::new();
        let mut pick = |terms: Vec<Vec<usize>>| {
            let f = LetterFn::MonoDnf { terms, on_true: 0, on_false: 1 };
            seen.insert(truth_table(&f, &sig));
        };
        for a in 0..subsets.len() {
            pick(vec![subsets[a].clone()]);
            if k >= 2 {
                for b in a + 1..subsets.len() {
                    pick(vec![subsets[a].clone(), subsets[b].clone()]);
                }
            }
        }
        seen.len()
    }

    #[test]
    fn one_term_dnf_over_three_variables() {
        assert_eq!(dnf_truth_table_count(3, 1), 8);
        let c = FiniteFunctionClass::mono_dnf(1, bools(3), set_read()).unwrap();
        assert_eq!(c.cardinality().unwrap(), BigUint::from(8u32));
        assert_eq!(c.enumerate(100).unwrap().len(), 8);
    }

    #[test]
    fn one_term_dnf_over_two_variables_members() {
        let sig = bools(2);
        let c = FiniteFunctionClass::mono_dnf(1, sig.clone(), set_read()).unwrap();
        let tables: Vec<Vec<u32>> = c.enumerate(100).unwrap().iter().map(|f| truth_table(f, &sig)).collect();
        // letters 00, 01, 10, 11 ; 0 = true, 1 = false
        let expected: HashSet<Vec<u32>> = [
            vec![0, 0, 0, 0], // true
            vec![1, 1, 0, 0], // v1
            vec![1, 0, 1, 0], // v2
            vec![1, 1, 1, 0], // v1 ∧ v2
        ]
        .into_iter()
        .collect();
        assert_eq!(tables.iter().cloned().collect::<HashSet<_>>(), expected);
        assert_eq!(tables.len(), 4);
    }

    #[test]
    fn two_term_dnf_counts_match_truth_table_oracle() {
        for n in 1..=6 {
            let oracle = dnf_truth_table_count(n, 2);
            let c = FiniteFunctionClass::mono_dnf(2, bools(n), set_read()).unwrap();
            assert_eq!(c.cardinality().unwrap(), BigUint::from(oracle), "n = {n}");
            assert_eq!(c.enumerate(1 << 20).unwrap().len(), oracle, "n = {n}");
        }
    }

    #[test]
    fn three_term_dnf_streams_distinct_functions() {
        let sig = bools(3);
        let c = FiniteFunctionClass::mono_dnf(3, sig.clone(), set_read()).unwrap();
        let members = c.enumerate(10_000).unwrap();
        let distinct: HashSet<Vec<u32>> = members.iter().map(|f| truth_table(f, &sig)).collect();
        assert_eq!(distinct.len(), members.len());
        assert_eq!(c.cardinality().unwrap(), BigUint::from(members.len()));
        // monotone functions on 3 variables minus constant false
        assert_eq!(members.len(), 19);
    }

    #[test]
    fn threshold_class_is_duplicate_free() {
        let sig = FactoredAlphabet::new(vec![
            Domain::new("a", ["0", "1", "2"]).unwrap(),
            Domain::new("b", ["0", "1"]).unwrap(),
        ])
        .unwrap();
        let c = FiniteFunctionClass::new(ClassKind::Threshold, sig.clone(), set_read()).unwrap();
        assert_eq!(c.cardinality().unwrap(), BigUint::from(6u32));
        let members = c.enumerate(100).unwrap();
        let distinct: HashSet<Vec<u32>> = members.iter().map(|f| truth_table(f, &sig)).collect();
        assert_eq!(distinct.len(), 6);
        assert!(members.iter().all(|f| c.contains(f)));
    }

    #[test]
    fn enumeration_is_deterministic() {
        let c = FiniteFunctionClass::mono_dnf(2, bools(4), set_read()).unwrap();
        assert_eq!(c.enumerate(10_000).unwrap(), c.enumerate(10_000).unwrap());
        assert!(c.enumerate(10_000).unwrap().iter().all(|f| c.contains(f)));
    }

    #[test]
    fn restricted_dnf_variables() {
        let sig = FactoredAlphabet::flat("x", ["blank", "wood", "iron"]).unwrap();
        let view = BooleanView::of(&sig).unwrap();
        assert_eq!(view.len(), 3);
        let vars = vec![view.position("x=wood").unwrap(), view.position("x=iron").unwrap()];
        let c = FiniteFunctionClass::new(ClassKind::MonoDnf { terms: 1, variables: Some(vars) }, sig, set_read()).unwrap();
        assert_eq!(c.cardinality().unwrap(), BigUint::from(4u32));
    }

    proptest! {
        #[test]
        fn projection_preserves_values(values in proptest::collection::vec(0u32..3, 1..6), mask in 0u32..64) {
            let a = values.len();
            let indices: Vec<usize> = (1..=a).filter(|i| mask >> (i - 1) & 1 == 1).collect();
            let p = Projection::new(indices.clone(), a).unwrap();
            let y = project(&p, &Letter(values.clone())).unwrap();
            prop_assert_eq!(y.arity(), indices.len());
            for (k, i) in indices.iter().enumerate() {
                prop_assert_eq!(y.0[k], values[i - 1]);
            }
        }

        #[test]
        fn binomial_symmetry(a in 0usize..40, m in 0usize..40) {
            prop_assume!(m <= a);
            prop_assert_eq!(projection_class_size(a, m).unwrap(), projection_class_size(a, a - m).unwrap());
        }
    }
}
