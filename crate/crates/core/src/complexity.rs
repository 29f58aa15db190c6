//! Cardinality, growth, dimension and sample-size bounds, together with exact
//! pattern counting used to check them on small classes.
//!
//! Logarithms are base 2 except inside the explicit constants of the sample
//! bounds, which use natural logarithms. Both sample bounds are concrete
//! instantiations of asymptotic statements:
//!
//! - finite classes: `ℓ = ⌈ln(2|F|/η) / (2ε²)⌉` (Hoeffding plus a union bound);
//! - dimension-based: `ℓ = ⌈8 (dim · ln|Y| + ln(1/η)) / ε²⌉`.

use std::collections::HashSet;
use std::f64::consts::E;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{binomial, LetterFn};
use crate::automaton::FlatAutomaton;
use crate::error::{Error, Result};
use crate::family::CascadeClass;

/// Multiplier of the dimension-based sample bound.
pub const DIMENSION_CONSTANT: f64 = 8.0;

/// `log₂ n` for arbitrarily large `n`; `-∞` for zero.
pub fn log2_big(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    // keep the top 64 bits
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(0.0);
    top.log2() + shift as f64
}

// ---------------------------------------------------------------------------
// Closed-form bounds

/// How much is known about a class `Φ` or `Θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassMeasure {
    /// Exact number of functions, as a decimal string.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cardinality: Option<String>,
    /// Graph dimension, or an upper bound on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<f64>,
    /// Size of the codomain `Y`.
    pub outputs: u64,
}

impl ClassMeasure {
    pub fn finite(cardinality: impl Into<BigUint>, outputs: u64) -> Self {
        ClassMeasure {
            cardinality: Some(cardinality.into().to_string()),
            dimension: None,
            outputs,
        }
    }

    pub fn with_dimension(dimension: f64, outputs: u64) -> Self {
        ClassMeasure {
            cardinality: None,
            dimension: Some(dimension),
            outputs,
        }
    }

    pub fn singleton(outputs: u64) -> Self {
        Self::finite(1u32, outputs)
    }

    pub fn cardinality(&self) -> Result<Option<BigUint>> {
        match &self.cardinality {
            None => Ok(None),
            Some(s) => s
                .trim()
                .parse::<BigUint>()
                .map(Some)
                .map_err(|_| Error::Parse(format!("cardinality `{s}` is not a non-negative integer"))),
        }
    }

    /// The given dimension, else `log₂|F|`, which bounds it from above.
    pub fn dimension_bound(&self) -> Result<f64> {
        if let Some(d) = self.dimension {
            return Ok(d);
        }
        match self.cardinality()? {
            Some(c) if !c.is_zero() => Ok(log2_big(&c)),
            _ => Err(Error::InvalidParameter("a class needs a positive cardinality or a dimension".into())),
        }
    }

    /// Upper bound on `G(F, ℓ)`: the least of `|F|`, `|Y|^ℓ` and `(e·ℓ·|Y|)^dim`.
    pub fn growth_bound(&self, ell: u64) -> Result<f64> {
        let y = self.outputs.max(1) as f64;
        let mut best = y.powf(ell as f64);
        if let Some(c) = self.cardinality()? {
            best = best.min(c.to_f64().unwrap_or(f64::INFINITY));
        }
        if let Some(d) = self.dimension {
            best = best.min(haussler_bound(d, ell, self.outputs));
        }
        Ok(best)
    }
}

/// `(e · ℓ · |Y|)^dim`.
pub fn haussler_bound(dim: f64, ell: u64, outputs: u64) -> f64 {
    (E * ell as f64 * outputs as f64).powf(dim)
}

/// One component of a class `𝒜(Φ, Δ, Θ; a, m, Π, Γ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDescriptor {
    /// Arity `a` of the component's input alphabet.
    pub arity: usize,
    /// Dependency degree `m`.
    pub degree: usize,
    /// Overrides `C(a, m)` when only some dependency sets are admissible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projections: Option<u64>,
    pub phi: ClassMeasure,
    /// `|Δ|`.
    pub cores: String,
    pub theta: ClassMeasure,
    /// `|Π|`.
    pub internal_letters: u64,
    /// `|Γ|`.
    pub output_letters: u64,
}

/// A class of automata (one component) or cascades, with learning parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassDescriptor {
    pub components: Vec<ComponentDescriptor>,
    /// Maximum string length `M`.
    pub max_len: u64,
    pub epsilon: f64,
    pub eta: f64,
    /// Sample sizes at which growth bounds are reported.
    #[serde(default = "default_ells")]
    pub ells: Vec<u64>,
    /// Alphabet size `k` and state count `n` for the display-only comparison row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<(u64, u64)>,
}

fn default_ells() -> Vec<u64> {
    vec![1, 2, 3]
}

impl ComponentDescriptor {
    pub fn projection_count(&self) -> Result<BigUint> {
        if self.degree > self.arity {
            return Err(Error::InvalidProjection(format!("degree {} exceeds arity {}", self.degree, self.arity)));
        }
        Ok(match self.projections {
            Some(p) => BigUint::from(p),
            None => binomial(self.arity as u64, self.degree as u64),
        })
    }

    pub fn core_count(&self) -> Result<BigUint> {
        self.cores
            .trim()
            .parse::<BigUint>()
            .map_err(|_| Error::Parse(format!("core count `{}` is not a non-negative integer", self.cores)))
    }

    /// `|π_m^a| · |Φ| · |Δ| · |Θ|`.
    pub fn cardinality_bound(&self) -> Result<BigUint> {
        let phi = self.phi.cardinality()?;
        let theta = self.theta.cardinality()?;
        match (phi, theta) {
            (Some(phi), Some(theta)) => Ok(self.projection_count()? * phi * self.core_count()? * theta),
            _ => Err(Error::InvalidParameter(
                "an input or output class is only described by its dimension; use the dimension bounds".into(),
            )),
        }
    }

    /// `w = log|π_m^a| + log|Δ| + dim(Φ) + dim(Θ)`.
    pub fn w(&self) -> Result<f64> {
        Ok(log2_big(&self.projection_count()?)
            + log2_big(&self.core_count()?)
            + self.phi.dimension_bound()?
            + self.theta.dimension_bound()?)
    }
}

impl ClassDescriptor {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidParameter("a class needs at least one component".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0 && self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidParameter("ε and η must lie in (0, 1)".into()));
        }
        if self.max_len == 0 {
            return Err(Error::InvalidParameter("maximum length must be at least 1".into()));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.components.len()
    }

    /// Product of the per-component cardinality bounds.
    pub fn cardinality_bound(&self) -> Result<BigUint> {
        self.components
            .iter()
            .try_fold(BigUint::one(), |acc, c| Ok(acc * c.cardinality_bound()?))
    }

    /// For one component: `|π|·|Δ|·G(Φ, ℓM)·G(Θ, ℓ)`. For cascades:
    /// `∏ |π_i|·|Δ_i|·G(Φ_i, ℓM)·G(Θ_i, ℓM)`.
    pub fn growth_bound(&self, ell: u64) -> Result<f64> {
        let cascade = self.depth() > 1;
        self.components.iter().try_fold(1.0, |acc, c| {
            let theta_len = if cascade { ell * self.max_len } else { ell };
            Ok(acc
                * c.projection_count()?.to_f64().unwrap_or(f64::INFINITY)
                * c.core_count()?.to_f64().unwrap_or(f64::INFINITY)
                * c.phi.growth_bound(ell * self.max_len)?
                * c.theta.growth_bound(theta_len)?)
        })
    }

    /// Largest `w`, `|Π|` and `|Γ|` over components.
    pub fn maxima(&self) -> Result<(f64, u64, u64)> {
        let mut w = f64::NEG_INFINITY;
        let (mut pi, mut gamma) = (0, 0);
        for c in &self.components {
            w = w.max(c.w()?);
            pi = pi.max(c.internal_letters);
            gamma = gamma.max(c.output_letters);
        }
        Ok((w, pi, gamma))
    }

    pub fn dimension_bound(&self) -> Result<f64> {
        let (w, pi, gamma) = self.maxima()?;
        if self.depth() == 1 {
            dimension_bound_automata(w, self.max_len, pi, gamma)
        } else {
            dimension_bound_cascade(self.depth(), w, self.max_len, pi, gamma)
        }
    }

    /// Output alphabet of the whole class: that of the last component.
    pub fn output_letters(&self) -> u64 {
        self.components.last().map_or(1, |c| c.output_letters)
    }
}

/// `2w · log₂(w · e · M · |Π| · |Γ|)`, defined for `w ≥ 2`.
pub fn dimension_bound_automata(w: f64, max_len: u64, pi: u64, gamma: u64) -> Result<f64> {
    if w.is_nan() || w < 2.0 {
        return Err(Error::Hypothesis(format!("the dimension bound requires w ≥ 2, got w = {w:.4}")));
    }
    Ok(2.0 * w * (w * E * max_len as f64 * pi as f64 * gamma as f64).log2())
}

/// `2dw · log₂(dw · e · M · |Π| · |Γ|)`, defined for `d·w ≥ 2`.
pub fn dimension_bound_cascade(d: usize, w: f64, max_len: u64, pi: u64, gamma: u64) -> Result<f64> {
    let dw = d as f64 * w;
    if dw.is_nan() || dw < 2.0 {
        return Err(Error::Hypothesis(format!("the dimension bound requires d·w ≥ 2, got d·w = {dw:.4}")));
    }
    Ok(2.0 * dw * (dw * E * max_len as f64 * pi as f64 * gamma as f64).log2())
}

fn check_accuracy(epsilon: f64, eta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0 && eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter("ε and η must lie in (0, 1)".into()));
    }
    Ok(())
}

/// `⌈ln(2|F|/η) / (2ε²)⌉`.
pub fn sample_bound_finite(cardinality: &BigUint, epsilon: f64, eta: f64) -> Result<u64> {
    check_accuracy(epsilon, eta)?;
    if cardinality.is_zero() {
        return Err(Error::InvalidParameter("the class is empty".into()));
    }
    let ln_card = log2_big(cardinality) * std::f64::consts::LN_2;
    let value = ((2.0f64).ln() + ln_card - eta.ln()) / (2.0 * epsilon * epsilon);
    Ok(value.ceil() as u64)
}

/// `⌈8 (dim · ln|Y| + ln(1/η)) / ε²⌉`.
pub fn sample_bound_dimension(dim: f64, outputs: u64, epsilon: f64, eta: f64) -> Result<u64> {
    check_accuracy(epsilon, eta)?;
    if dim.is_nan() || dim < 0.0 || outputs == 0 {
        return Err(Error::InvalidParameter("dimension must be non-negative and |Y| positive".into()));
    }
    let value = DIMENSION_CONSTANT * (dim * (outputs as f64).ln() - eta.ln()) / (epsilon * epsilon);
    Ok(value.ceil() as u64)
}

/// `k · n · log₂ n`, for display next to the other bounds.
pub fn comparison_sample_size(k: u64, n: u64) -> f64 {
    k as f64 * n as f64 * (n as f64).log2()
}

/// `n^(k·n) · 2^n`, the number of `n`-state acceptors over `k` letters.
pub fn acceptor_count(k: u64, n: u64) -> BigUint {
    BigUint::from(n).pow((k * n) as u32) * BigUint::from(2u32).pow(n as u32)
}

/// One line of a bounds table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub quantity: String,
    pub value: String,
    pub note: String,
}

fn row(quantity: impl Into<String>, value: impl Into<String>, note: impl Into<String>) -> BoundRow {
    BoundRow {
        quantity: quantity.into(),
        value: value.into(),
        note: note.into(),
    }
}

/// All bounds of a descriptor; rows whose hypotheses fail read `N/A`.
pub fn bounds_table(desc: &ClassDescriptor) -> Result<Vec<BoundRow>> {
    desc.validate()?;
    let mut rows = Vec::new();
    for (i, c) in desc.components.iter().enumerate() {
        let name = format!("component {}", i + 1);
        if let Ok(Some(phi)) = c.phi.cardinality() {
            rows.push(row(format!("{name} log2|Phi|"), format!("{:.4}", log2_big(&phi)), ""));
        }
        match c.cardinality_bound() {
            Ok(b) => rows.push(row(format!("{name} cardinality"), b.to_string(), "|pi|*|Phi|*|Delta|*|Theta|")),
            Err(e) => rows.push(row(format!("{name} cardinality"), "N/A", e.to_string())),
        }
        match c.w() {
            Ok(w) => rows.push(row(format!("{name} w"), format!("{w:.4}"), "log|pi| + log|Delta| + dim Phi + dim Theta")),
            Err(e) => rows.push(row(format!("{name} w"), "N/A", e.to_string())),
        }
    }
    let card = desc.cardinality_bound();
    match &card {
        Ok(b) => {
            rows.push(row("cardinality", b.to_string(), "product over components"));
            rows.push(row("log2 cardinality", format!("{:.4}", log2_big(b)), ""));
        }
        Err(e) => rows.push(row("cardinality", "N/A", e.to_string())),
    }
    for &ell in &desc.ells {
        match desc.growth_bound(ell) {
            Ok(g) => rows.push(row(format!("growth bound l={ell}"), format!("{g:.6e}"), "")),
            Err(e) => rows.push(row(format!("growth bound l={ell}"), "N/A", e.to_string())),
        }
    }
    let dim = desc.dimension_bound();
    match &dim {
        Ok(d) => rows.push(row("dimension bound", format!("{d:.4}"), "")),
        Err(e) => rows.push(row("dimension bound", "N/A", e.to_string())),
    }
    match &card {
        Ok(b) => match sample_bound_finite(b, desc.epsilon, desc.eta) {
            Ok(l) => rows.push(row("sample size (finite class)", l.to_string(), "instantiation: ceil(ln(2|F|/eta)/(2 eps^2)), not a stated constant")),
            Err(e) => rows.push(row("sample size (finite class)", "N/A", e.to_string())),
        },
        Err(_) => rows.push(row("sample size (finite class)", "N/A", "class is not finite")),
    }
    match &dim {
        Ok(d) => match sample_bound_dimension(*d, desc.output_letters(), desc.epsilon, desc.eta) {
            Ok(l) => rows.push(row("sample size (dimension)", l.to_string(), "instantiation: ceil(8(dim ln|Y| + ln(1/eta))/eps^2), a bound-shaped estimate")),
            Err(e) => rows.push(row("sample size (dimension)", "N/A", e.to_string())),
        },
        Err(e) => rows.push(row("sample size (dimension)", "N/A", e.to_string())),
    }
    if let Some((k, n)) = desc.compare {
        rows.push(row(
            format!("comparison k*n*log n (k={k}, n={n})"),
            format!("{:.4}", comparison_sample_size(k, n)),
            "display only",
        ));
        rows.push(row(
            format!("comparison log2 |acceptors| (k={k}, n={n})"),
            format!("{:.4}", log2_big(&acceptor_count(k, n))),
            "display only",
        ));
    }
    Ok(rows)
}

pub fn render_rows_text(rows: &[BoundRow]) -> String {
    let wq = rows.iter().map(|r| r.quantity.len()).max().unwrap_or(0);
    let wv = rows.iter().map(|r| r.value.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in rows {
        let line = format!("{:<wq$}  {:>wv$}  {}", r.quantity, r.value, r.note);
        let _ = writeln!(out, "{}", line.trim_end());
    }
    out
}

pub fn render_rows_csv(rows: &[BoundRow]) -> String {
    let quote = |s: &str| {
        if s.contains(',') || s.contains('"') {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    let mut out = String::from("quantity,value,note\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", quote(&r.quantity), quote(&r.value), quote(&r.note));
    }
    out
}

// ---------------------------------------------------------------------------
// Pattern tables

/// Outputs of finitely many functions on finitely many points:
/// `rows[f][x]`, with values below `outputs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTable {
    rows: Vec<Vec<u32>>,
    points: usize,
    outputs: usize,
}

impl PatternTable {
    pub fn new(rows: Vec<Vec<u32>>, outputs: usize) -> Result<Self> {
        let points = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != points) {
            return Err(Error::InvalidParameter("pattern rows differ in length".into()));
        }
        if rows.iter().flatten().any(|&v| v as usize >= outputs) {
            return Err(Error::InvalidParameter("pattern value outside the output range".into()));
        }
        Ok(PatternTable { rows, points, outputs })
    }

    /// Outputs of each automaton on each string; output names are unified across automata.
    pub fn from_automata(hyps: &[FlatAutomaton], universe: &[Vec<usize>]) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut rows = Vec::with_capacity(hyps.len());
        for h in hyps {
            let ids: Vec<u32> = h
                .outputs()
                .iter()
                .map(|o| match names.iter().position(|n| n == o) {
                    Some(i) => i as u32,
                    None => {
                        names.push(o.clone());
                        (names.len() - 1) as u32
                    }
                })
                .collect();
            rows.push(universe.iter().map(|s| h.run(s).map(|o| ids[o])).collect::<Result<Vec<_>>>()?);
        }
        Self::new(rows, names.len().max(1))
    }

    /// Compiled letter functions over a signature, all points being letters.
    pub fn from_letter_fns(fns: &[LetterFn], signature: &crate::alphabet::FactoredAlphabet, outputs: usize) -> Result<Self> {
        let rows = fns.iter().map(|f| f.compile(signature, outputs)).collect::<Result<Vec<_>>>()?;
        Self::new(rows, outputs)
    }

    pub fn functions(&self) -> usize {
        self.rows.len()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// The same class with duplicate functions removed.
    pub fn dedup(&self) -> PatternTable {
        let mut seen = HashSet::new();
        let rows = self.rows.iter().filter(|r| seen.insert((*r).clone())).cloned().collect();
        PatternTable {
            rows,
            points: self.points,
            outputs: self.outputs,
        }
    }

    /// `N(F, X)`: distinct output patterns on the points of `sample`.
    pub fn count(&self, sample: &[usize]) -> usize {
        let mut seen: HashSet<Vec<u32>> = HashSet::with_capacity(self.rows.len());
        for r in &self.rows {
            seen.insert(sample.iter().map(|&x| r[x]).collect());
        }
        seen.len()
    }

    /// `f_bin(x, y) = 1[f(x) = y]`; point `(x, y)` has index `x · |Y| + y`.
    pub fn binarize(&self) -> PatternTable {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .flat_map(|&v| (0..self.outputs as u32).map(move |y| u32::from(v == y)))
                    .collect()
            })
            .collect();
        PatternTable {
            rows,
            points: self.points * self.outputs,
            outputs: 2,
        }
    }
}

/// Result of a growth computation.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub ell: usize,
    /// `N(F, X_ℓ)` on the witness; equal to `G(F, ℓ)` on this universe when `exact`.
    pub count: usize,
    pub bound: Option<f64>,
    pub witness: Vec<usize>,
    /// False when the search was heuristic and `count` is only a lower bound.
    pub exact: bool,
}

impl GrowthReport {
    pub fn within_bound(&self) -> bool {
        self.bound.is_none_or(|b| self.count as f64 <= b * (1.0 + 1e-9))
    }
}

fn combinations_count(n: usize, r: usize) -> BigUint {
    binomial(n as u64, r as u64)
}

/// Calls `visit` on every `r`-subset of `0..n` in lexicographic order.
fn for_each_combination(n: usize, r: usize, mut visit: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        visit(&idx);
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
            if i == 0 {
                return;
            }
        }
        if idx[i] == i + n - r {
            return;
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `G(F, ℓ)` restricted to the table's points.
///
/// Repeated points never add patterns, so it suffices to scan subsets of
/// size `min(ℓ, points)`. When their number exceeds `cap`, random restarts
/// with single-point swaps stand in, and the report is flagged inexact.
pub fn growth(table: &PatternTable, ell: usize, cap: u64, seed: u64) -> GrowthReport {
    let table = table.dedup();
    let r = ell.min(table.points());
    if table.functions() <= 1 || r == 0 {
        return GrowthReport {
            ell,
            count: table.functions().min(1),
            bound: None,
            witness: (0..r).collect(),
            exact: true,
        };
    }
    let ceiling = table.functions().min(table.outputs().saturating_pow(r as u32).max(1));
    if combinations_count(table.points(), r) <= BigUint::from(cap) {
        let mut best = 0;
        let mut witness = Vec::new();
        let mut done = false;
        for_each_combination(table.points(), r, |s| {
            if done {
                return;
            }
            let n = table.count(s);
            if n > best {
                best = n;
                witness = s.to_vec();
                done = n == ceiling;
            }
        });
        return GrowthReport {
            ell,
            count: best,
            bound: None,
            witness,
            exact: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    let mut witness = Vec::new();
    let mut budget = cap.max(1);
    while budget > 0 && best < ceiling {
        let mut s: Vec<usize> = sample_indices(&mut rng, table.points(), r).into_vec();
        let mut n = table.count(&s);
        budget -= 1;
        let mut improved = true;
        while improved && budget > 0 {
            improved = false;
            for _ in 0..(4 * r).max(8) {
                if budget == 0 {
                    break;
                }
                let pos = rng.gen_range(0..r);
                let cand = rng.gen_range(0..table.points());
                if s.contains(&cand) {
                    continue;
                }
                let old = s[pos];
                s[pos] = cand;
                let m = table.count(&s);
                budget -= 1;
                if m > n {
                    n = m;
                    improved = true;
                } else {
                    s[pos] = old;
                }
            }
        }
        if n > best {
            best = n;
            s.sort_unstable();
            witness = s;
        }
    }
    GrowthReport {
        ell,
        count: best,
        bound: None,
        witness,
        exact: best == ceiling,
    }
}

/// Largest shattered set found, with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionReport {
    pub dimension: usize,
    pub witness: Vec<usize>,
    /// False when the search stopped at the cap; `dimension` is then a lower bound.
    pub exact: bool,
}

/// VC dimension of a class with outputs in `{0, 1}`.
///
/// Shattered sets are closed under subsets, so sets are grown one point at a
/// time from the shattered sets of the previous size.
pub fn vc_dimension(table: &PatternTable, cap: u64) -> Result<DimensionReport> {
    if table.outputs() > 2 {
        return Err(Error::InvalidParameter(
            "VC dimension needs outputs in {0,1}; use the graph dimension".into(),
        ));
    }
    let table = table.dedup();
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    let mut witness = Vec::new();
    let mut checks = 0u64;
    loop {
        let h = level[0].len() + 1;
        if table.functions() < (1usize << h.min(63)) {
            return Ok(DimensionReport {
                dimension: h - 1,
                witness,
                exact: true,
            });
        }
        let previous: HashSet<Vec<usize>> = level.iter().cloned().collect();
        let mut next = Vec::new();
        for s in &level {
            let start = s.last().map_or(0, |&x| x + 1);
            for x in start..table.points() {
                let mut cand = s.clone();
                cand.push(x);
                // every subset obtained by dropping one point must be shattered
                let closed = (0..cand.len() - 1).all(|i| {
                    let mut sub = cand.clone();
                    sub.remove(i);
                    previous.contains(&sub)
                });
                if !closed {
                    continue;
                }
                checks += 1;
                if checks > cap {
                    return Ok(DimensionReport {
                        dimension: h - 1,
                        witness,
                        exact: false,
                    });
                }
                if table.count(&cand) == 1 << h {
                    next.push(cand);
                }
            }
        }
        match next.first() {
            None => {
                return Ok(DimensionReport {
                    dimension: h - 1,
                    witness,
                    exact: true,
                })
            }
            Some(first) => witness = first.clone(),
        }
        level = next;
    }
}

/// VC dimension of the binarised class; witness points are `x · |Y| + y`.
pub fn graph_dimension(table: &PatternTable, cap: u64) -> Result<DimensionReport> {
    vc_dimension(&table.binarize(), cap)
}

/// Every string of length `1..=max_len` over `letters` symbols, shortest first.
pub fn all_strings(letters: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * letters);
        for s in &layer {
            for a in 0..letters {
                let mut t = s.clone();
                t.push(a);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

// ---------------------------------------------------------------------------
// Bounds for enumerable cascade classes

/// Exact growth of a letter-function class on its whole (finite) domain.
pub fn letter_class_growth(fns: &[LetterFn], signature: &crate::alphabet::FactoredAlphabet, outputs: usize, ell: usize, cap: u64) -> Result<usize> {
    let t = PatternTable::from_letter_fns(fns, signature, outputs)?;
    let g = growth(&t, ell, cap, 0);
    if !g.exact {
        return Err(Error::cap("letter-class growth search", "too many samples", cap));
    }
    Ok(g.count)
}

/// Growth bound of an enumerable cascade class at sample size `ℓ`, with
/// exact growth of each `Φ_i` (maximised over dependency sets) and `|Θ_i|`
/// as the growth of `Θ_i`.
pub fn class_growth_bound(class: &CascadeClass, ell: usize, max_len: usize, cap: u64) -> Result<f64> {
    let cascade = class.depth() > 1;
    let mut bound = 1.0;
    for (i, c) in class.components().iter().enumerate() {
        let projections = class.projections(i).len() as f64;
        let mut g_phi = 0usize;
        for j in 0..class.projections(i).len() {
            let g = match class.phi_class(i, j) {
                None => 1,
                Some(k) => letter_class_growth(&k.enumerate(cap)?, k.signature(), k.outputs().len(), ell * max_len, cap)?,
            };
            g_phi = g_phi.max(g);
        }
        let theta_len = if cascade { ell * max_len } else { ell };
        let theta_outputs = class.component_gamma(i).len() as f64;
        let g_theta = (c.outputs.len() as f64).min(theta_outputs.powf(theta_len as f64));
        bound *= projections * c.cores.len() as f64 * g_phi as f64 * g_theta;
    }
    Ok(bound)
}

/// Descriptor of an enumerable class with exact cardinalities.
///
/// With `exact_dimension_cap`, the graph dimension of each `Φ_i` is computed
/// exactly (maximised over dependency sets, the search bounded by the cap);
/// otherwise `log₂|Φ_i|` stands in for it.
pub fn class_descriptor(class: &CascadeClass, max_len: u64, epsilon: f64, eta: f64, exact_dimension_cap: Option<u64>) -> Result<ClassDescriptor> {
    let mut components = Vec::with_capacity(class.depth());
    for (i, c) in class.components().iter().enumerate() {
        let input = class.component_input(i);
        let gamma = class.component_gamma(i).len() as u64;
        let pi = c.cores[0].num_letters() as u64;
        let mut phi_card = BigUint::zero();
        let mut phi_dim = 0usize;
        for j in 0..class.projections(i).len() {
            phi_card += class.phi_cardinality(i, j);
            if let (Some(k), Some(cap)) = (class.phi_class(i, j), exact_dimension_cap) {
                let t = PatternTable::from_letter_fns(&k.enumerate(cap)?, k.signature(), k.outputs().len())?;
                let d = graph_dimension(&t, cap)?;
                if !d.exact {
                    return Err(Error::cap("graph dimension search", "too many candidate sets", cap));
                }
                phi_dim = phi_dim.max(d.dimension);
            }
        }
        let degree = class.projections(i)[0].degree();
        components.push(ComponentDescriptor {
            arity: input.arity(),
            degree,
            projections: Some(class.projections(i).len() as u64),
            phi: ClassMeasure {
                cardinality: Some(phi_card.to_string()),
                dimension: exact_dimension_cap.map(|_| phi_dim as f64),
                outputs: pi,
            },
            cores: c.cores.len().to_string(),
            theta: ClassMeasure {
                cardinality: Some(c.outputs.len().to_string()),
                dimension: Some(if c.outputs.len() > 1 { (c.outputs.len() as f64).log2() } else { 0.0 }),
                outputs: gamma,
            },
            internal_letters: pi,
            output_letters: gamma,
        });
    }
    Ok(ClassDescriptor {
        components,
        max_len,
        epsilon,
        eta,
        ells: default_ells(),
        compare: None,
    })
}

// ---------------------------------------------------------------------------
// Growth propositions

/// One measured inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct PropositionCheck {
    pub name: String,
    pub ell: usize,
    pub measured: f64,
    pub bound: f64,
    pub holds: bool,
}

fn check(name: &str, ell: usize, measured: f64, bound: f64) -> PropositionCheck {
    PropositionCheck {
        name: name.to_string(),
        ell,
        measured,
        bound,
        holds: measured <= bound * (1.0 + 1e-9),
    }
}

fn exact_growth(t: &PatternTable, ell: usize, cap: u64) -> Result<usize> {
    let g = growth(t, ell, cap, 0);
    if g.exact {
        Ok(g.count)
    } else {
        Err(Error::cap("exact growth", "too many samples", cap))
    }
}

/// Small classes on which the growth propositions are measured.
///
/// - `first`: functions `X → Y`; `then`: functions `Y → Z`.
/// - `other`: functions `X → Y'` for the cross product with `first`.
/// - `strings`: string functions on every string of length `1..=max_len`
///   over `letters` symbols, in the order of [`all_strings`].
/// - `letter_class`: functions on the `letters` symbols, lifted to strings
///   by reading the last letter.
#[derive(Debug, Clone)]
pub struct PropositionInputs {
    pub first: PatternTable,
    pub then: PatternTable,
    pub other: PatternTable,
    pub strings: PatternTable,
    pub letter_class: PatternTable,
    pub letters: usize,
    pub max_len: usize,
}

/// Checks composition, cross product, binarisation, prefix map, last-letter
/// lift and the `(e·ℓ·|Y|)^dim` bound at each sample size.
pub fn verify_growth_propositions(inputs: &PropositionInputs, ells: &[usize], cap: u64) -> Result<Vec<PropositionCheck>> {
    let PropositionInputs {
        first,
        then,
        other,
        strings,
        letter_class,
        letters,
        max_len,
    } = inputs;
    if then.points() != first.outputs() {
        return Err(Error::InvalidParameter("`then` must be defined on the outputs of `first`".into()));
    }
    if other.points() != first.points() {
        return Err(Error::InvalidParameter("`other` must share the domain of `first`".into()));
    }
    let universe = all_strings(*letters, *max_len);
    if strings.points() != universe.len() || letter_class.points() != *letters {
        return Err(Error::InvalidParameter("string and letter classes do not match the universe".into()));
    }

    let composed = PatternTable::new(
        first
            .rows()
            .iter()
            .flat_map(|f| then.rows().iter().map(move |g| f.iter().map(|&y| g[y as usize]).collect()))
            .collect(),
        then.outputs(),
    )?;
    let crossed = PatternTable::new(
        first
            .rows()
            .iter()
            .flat_map(|f| {
                other.rows().iter().map(move |g| {
                    f.iter()
                        .zip(g)
                        .map(|(&a, &b)| a * other.outputs() as u32 + b)
                        .collect()
                })
            })
            .collect(),
        first.outputs() * other.outputs(),
    )?;
    // prefix map: the output on s is the sequence of outputs on its prefixes
    let index_of = |s: &[usize]| -> usize {
        // strings are listed by length, then lexicographically
        let mut offset = 0;
        let mut width = 1;
        for _ in 1..s.len() {
            width *= letters;
            offset += width;
        }
        offset + s.iter().fold(0, |acc, &a| acc * letters + a)
    };
    let mut seq_ids: Vec<Vec<u32>> = Vec::new();
    let barred_rows: Vec<Vec<u32>> = strings
        .rows()
        .iter()
        .map(|f| {
            universe
                .iter()
                .map(|s| {
                    let seq: Vec<u32> = (1..=s.len()).map(|k| f[index_of(&s[..k])]).collect();
                    match seq_ids.iter().position(|q| *q == seq) {
                        Some(i) => i as u32,
                        None => {
                            seq_ids.push(seq);
                            (seq_ids.len() - 1) as u32
                        }
                    }
                })
                .collect()
        })
        .collect();
    let barred = PatternTable::new(barred_rows, seq_ids.len().max(1))?;
    let starred = PatternTable::new(
        letter_class
            .rows()
            .iter()
            .map(|f| universe.iter().map(|s| f[*s.last().expect("non-empty")]).collect())
            .collect(),
        letter_class.outputs(),
    )?;
    let binarized = first.binarize();

    let mut out = Vec::new();
    for &ell in ells {
        let g = |t: &PatternTable, l: usize| exact_growth(t, l, cap).map(|v| v as f64);
        out.push(check("composition", ell, g(&composed, ell)?, g(first, ell)? * g(then, ell)?));
        out.push(check("cross product", ell, g(&crossed, ell)?, g(first, ell)? * g(other, ell)?));
        out.push(check("binarization", ell, g(&binarized, ell)?, g(first, ell)?));
        out.push(check("prefix map", ell, g(&barred, ell)?, g(strings, ell * max_len)?));
        out.push(check("last-letter lift", ell, g(&starred, ell)?, g(letter_class, ell)?));
        for (name, t) in [("first", first), ("then", then), ("other", other), ("strings", strings), ("letters", letter_class)] {
            let dim = graph_dimension(t, cap)?;
            if !dim.exact {
                return Err(Error::cap("graph dimension search", "too many candidate sets", cap));
            }
            out.push(check(
                &format!("dimension bound ({name})"),
                ell,
                g(t, ell)?,
                haussler_bound(dim.dimension as f64, ell as u64, t.outputs() as u64),
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{Domain, FactoredAlphabet, FiniteFunctionClass, ClassKind};
    use proptest::prelude::*;

    fn all_tables(points: usize, outputs: u32) -> PatternTable {
        let mut rows = vec![Vec::new()];
        for _ in 0..points {
            rows = rows
                .into_iter()
                .flat_map(|r: Vec<u32>| {
                    (0..outputs).map(move |v| {
                        let mut r = r.clone();
                        r.push(v);
                        r
                    })
                })
                .collect();
        }
        PatternTable::new(rows, outputs as usize).unwrap()
    }

    #[test]
    fn sample_bound_values() {
        assert_eq!(sample_bound_finite(&BigUint::from(1024u32), 0.1, 0.1).unwrap(), 497);
        assert_eq!(sample_bound_finite(&BigUint::from(1u32), 0.1, 0.1).unwrap(), 150);
        let half = sample_bound_finite(&BigUint::from(1024u32), 0.05, 0.1).unwrap();
        assert!((half as f64 / 497.0 - 4.0).abs() < 0.01);
        assert_eq!(sample_bound_dimension(10.0, 2, 0.1, 0.1).unwrap(), 7388);
        let d2 = sample_bound_dimension(10.0, 2, 0.1, 0.1).unwrap() as f64;
        let d4 = sample_bound_dimension(10.0, 4, 0.1, 0.1).unwrap() as f64;
        // the dim term doubles, the confidence term does not
        let conf = 8.0 * (10f64).ln() / 0.01;
        assert!(((d4 - conf) / (d2 - conf) - 2.0).abs() < 0.01);
        assert!(sample_bound_finite(&BigUint::from(1u32), 0.0, 0.1).is_err());
    }

    #[test]
    fn dimension_bound_values() {
        let b = dimension_bound_automata(4.0, 8, 3, 2).unwrap();
        assert!((b - 72.22).abs() < 0.01, "{b}");
        assert!(matches!(dimension_bound_automata(1.99, 8, 3, 2), Err(Error::Hypothesis(_))));
        let c = dimension_bound_cascade(2, 4.0, 8, 3, 2).unwrap();
        assert!((c - 16.0 * (8.0 * E * 48.0).log2()).abs() < 1e-9);
        assert!(dimension_bound_cascade(1, 1.0, 8, 3, 2).is_err());
    }

    fn simple_component(phi: u64, delta: u64, theta: u64) -> ComponentDescriptor {
        ComponentDescriptor {
            arity: 2,
            degree: 1,
            projections: None,
            phi: ClassMeasure::finite(phi, 2),
            cores: delta.to_string(),
            theta: ClassMeasure::finite(theta, 2),
            internal_letters: 2,
            output_letters: 2,
        }
    }

    #[test]
    fn cardinality_bounds() {
        assert_eq!(simple_component(3, 1, 1).cardinality_bound().unwrap(), BigUint::from(6u32));
        let desc = ClassDescriptor {
            components: vec![simple_component(3, 1, 1), simple_component(5, 2, 1)],
            max_len: 3,
            epsilon: 0.1,
            eta: 0.1,
            ells: vec![1],
            compare: Some((2, 3)),
        };
        assert_eq!(desc.cardinality_bound().unwrap(), BigUint::from(6u32 * 20));
        let ones = ClassDescriptor {
            components: vec![ComponentDescriptor {
                arity: 1,
                degree: 1,
                projections: None,
                phi: ClassMeasure::singleton(2),
                cores: "1".into(),
                theta: ClassMeasure::singleton(2),
                internal_letters: 2,
                output_letters: 2,
            }],
            max_len: 4,
            epsilon: 0.1,
            eta: 0.1,
            ells: vec![1, 2, 3],
            compare: None,
        };
        assert_eq!(ones.cardinality_bound().unwrap(), BigUint::one());
        for l in 1..4 {
            assert_eq!(ones.growth_bound(l).unwrap(), 1.0);
        }
        assert!(ones.dimension_bound().is_err());
        let rows = bounds_table(&desc).unwrap();
        assert!(rows.iter().any(|r| r.quantity.starts_with("comparison k*n*log n")));
        assert!(render_rows_csv(&rows).starts_with("quantity,value,note\n"));
        assert!(render_rows_text(&rows).contains("cardinality"));
    }

    #[test]
    fn acceptor_count_specialisation() {
        // single projection, identity input, n^(kn) cores, 2^n outputs
        let (k, n) = (2u64, 3u64);
        let c = ComponentDescriptor {
            arity: 1,
            degree: 1,
            projections: None,
            phi: ClassMeasure::singleton(k),
            cores: BigUint::from(n).pow((k * n) as u32).to_string(),
            theta: ClassMeasure::finite(BigUint::from(2u32).pow(n as u32), 2),
            internal_letters: k,
            output_letters: 2,
        };
        assert_eq!(c.cardinality_bound().unwrap(), acceptor_count(k, n));
    }

    #[test]
    fn growth_of_simple_classes() {
        let single = PatternTable::new(vec![vec![0, 1, 0]], 2).unwrap();
        for l in 1..4 {
            assert_eq!(growth(&single, l, 1000, 0).count, 1);
        }
        let full = all_tables(2, 2);
        assert_eq!(growth(&full, 2, 1000, 0).count, 4);
        assert_eq!(vc_dimension(&all_tables(3, 2), 1000).unwrap().dimension, 3);
        assert_eq!(vc_dimension(&single, 1000).unwrap().dimension, 0);
    }

    #[test]
    fn graph_dimension_two_paths() {
        // every table from 3 points to 3 values, restricted to a subset of functions
        let t = all_tables(3, 3);
        let some = PatternTable::new(t.rows().iter().step_by(5).cloned().collect(), 3).unwrap();
        let direct = graph_dimension(&some, 100_000).unwrap();
        // independent path: shattering in the binarised table by brute force over all point subsets
        let bin = some.binarize();
        let mut best = 0;
        for mask in 0u32..(1 << bin.points()) {
            let pts: Vec<usize> = (0..bin.points()).filter(|i| mask >> i & 1 == 1).collect();
            if bin.count(&pts) == 1 << pts.len() {
                best = best.max(pts.len());
            }
        }
        assert_eq!(direct.dimension, best);
    }

    #[test]
    fn heuristic_growth_is_a_lower_bound() {
        let t = all_tables(4, 2);
        let exact = growth(&t, 3, 1_000_000, 0);
        let heuristic = growth(&t, 3, 2, 7);
        assert!(exact.exact);
        assert!(heuristic.count <= exact.count);
        assert_eq!(t.count(&heuristic.witness), heuristic.count);
    }

    #[test]
    fn strings_listing() {
        let s = all_strings(2, 3);
        assert_eq!(s.len(), 2 + 4 + 8);
        assert_eq!(s[0], vec![0]);
        assert_eq!(s[2], vec![0, 0]);
    }

    #[test]
    fn propositions_hold_on_small_classes() {
        let x = FactoredAlphabet::flat("x", ["a", "b", "c"]).unwrap();
        let bool_out = Domain::new("y", ["1", "0"]).unwrap();
        let dnf = FiniteFunctionClass::new(ClassKind::MonoDnf { terms: 1, variables: None }, x.clone(), bool_out).unwrap();
        let first = PatternTable::from_letter_fns(&dnf.enumerate(100).unwrap(), &x, 2).unwrap();
        let then = all_tables(2, 2);
        let other = PatternTable::new(vec![vec![0, 1, 2], vec![2, 2, 0], vec![1, 0, 0]], 3).unwrap();
        let universe = all_strings(2, 2);
        let parity: Vec<Vec<u32>> = vec![
            universe.iter().map(|s| (s.iter().sum::<usize>() % 2) as u32).collect(),
            universe.iter().map(|s| s[0] as u32).collect(),
            universe.iter().map(|s| (s.len() % 2) as u32).collect(),
        ];
        let inputs = PropositionInputs {
            first,
            then,
            other,
            strings: PatternTable::new(parity, 2).unwrap(),
            letter_class: all_tables(2, 2),
            letters: 2,
            max_len: 2,
        };
        let report = verify_growth_propositions(&inputs, &[1, 2, 3], 1_000_000).unwrap();
        assert!(report.iter().all(|c| c.holds), "{report:?}");
        assert_eq!(report.len(), 3 * 10);
    }

    proptest! {
        #[test]
        fn sample_bound_is_monotone(a in 1u64..1_000_000, b in 1u64..1_000_000) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(sample_bound_finite(&lo.into(), 0.1, 0.1).unwrap() <= sample_bound_finite(&hi.into(), 0.1, 0.1).unwrap());
        }

        #[test]
        fn cardinality_is_monotone(phi in 1u64..50, delta in 1u64..50, theta in 1u64..50) {
            let base = simple_component(phi, delta, theta).cardinality_bound().unwrap();
            prop_assert!(base <= simple_component(phi + 1, delta, theta).cardinality_bound().unwrap());
            prop_assert!(base <= simple_component(phi, delta + 1, theta).cardinality_bound().unwrap());
            prop_assert!(base <= simple_component(phi, delta, theta + 1).cardinality_bound().unwrap());
        }

        #[test]
        fn growth_matches_subset_brute_force(rows in proptest::collection::vec(proptest::collection::vec(0u32..3, 5), 1..8), ell in 1usize..4) {
            let t = PatternTable::new(rows, 3).unwrap();
            let mut best = 0;
            for mask in 0u32..32 {
                if mask.count_ones() as usize == ell {
                    let pts: Vec<usize> = (0..5).filter(|i| mask >> i & 1 == 1).collect();
                    best = best.max(t.count(&pts));
                }
            }
            prop_assert_eq!(growth(&t, ell, 1_000_000, 0).count, best);
        }
    }
}
