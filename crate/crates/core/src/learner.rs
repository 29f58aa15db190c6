//! Sampling, empirical risk minimisation and risk estimates.
//!
//! Strings are letter-index vectors over a flat alphabet of `letters` symbols.
//! Every random procedure takes an explicit seed and uses ChaCha8.

use std::fmt::Write as _;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::FlatAutomaton;
use crate::error::{Error, Result};

/// A string function on letter-index strings.
pub type StringFn<'a> = dyn Fn(&[usize]) -> usize + 'a;

/// Length uniform on `[1, max_len]`, then i.i.d. letters.
#[derive(Debug, Clone)]
pub struct StringDistribution {
    max_len: usize,
    probs: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl StringDistribution {
    pub fn uniform(letters: usize, max_len: usize) -> Result<Self> {
        Self::weighted(vec![1.0; letters], max_len)
    }

    /// Weights are normalised; they must be non-negative with a positive sum.
    pub fn weighted(weights: Vec<f64>, max_len: usize) -> Result<Self> {
        if max_len == 0 {
            return Err(Error::InvalidParameter("maximum length must be at least 1".into()));
        }
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter("letter weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("letter weights sum to zero".into()));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let sampler = WeightedIndex::new(&probs).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(StringDistribution { max_len, probs, sampler })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn letters(&self) -> usize {
        self.probs.len()
    }

    /// Probability of each letter at each position.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let len = rng.gen_range(1..=self.max_len);
        (0..len).map(|_| self.sampler.sample(rng)).collect()
    }

    /// `n` strings from a fresh generator seeded with `seed`.
    pub fn sample_many(&self, n: usize, seed: u64) -> Vec<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }
}

/// `z_1 … z_ℓ` with `z_i = ⟨x_i, f_0(x_i)⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSample {
    pub entries: Vec<(Vec<usize>, usize)>,
}

impl LabeledSample {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pairs strings with labels, rejecting empty strings and count mismatches.
    pub fn from_parts(strings: Vec<Vec<usize>>, labels: Vec<usize>) -> Result<Self> {
        if strings.len() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} strings but {} labels",
                strings.len(),
                labels.len()
            )));
        }
        if strings.iter().any(Vec::is_empty) {
            return Err(Error::EmptyString);
        }
        Ok(LabeledSample {
            entries: strings.into_iter().zip(labels).collect(),
        })
    }
}

/// `ℓ` i.i.d. strings labelled by `target`.
pub fn draw_sample(dist: &StringDistribution, target: &StringFn<'_>, ell: usize, seed: u64) -> LabeledSample {
    let entries = dist
        .sample_many(ell, seed)
        .into_iter()
        .map(|x| {
            let y = target(&x);
            (x, y)
        })
        .collect();
    LabeledSample { entries }
}

/// Mean 0-1 loss of `f` on the sample; 0 for an empty sample.
pub fn empirical_risk(f: &StringFn<'_>, sample: &LabeledSample) -> f64 {
    if sample.is_empty() {
        return 0.0;
    }
    let errors = sample.entries.iter().filter(|(x, y)| f(x) != *y).count();
    errors as f64 / sample.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErmResult {
    /// Position of the first minimiser in enumeration order.
    pub index: usize,
    pub errors: usize,
    pub empirical_risk: f64,
    /// Number of hypotheses sharing the minimum.
    pub ties: usize,
}

/// Empirical risk minimisation over automata whose outputs are compared by
/// position with the sample labels. Ties go to the earliest hypothesis.
pub fn erm_select(hypotheses: &[FlatAutomaton], sample: &LabeledSample) -> Result<ErmResult> {
    if hypotheses.is_empty() {
        return Err(Error::InvalidParameter("the hypothesis class is empty".into()));
    }
    let mut best = usize::MAX;
    let mut index = 0;
    let mut ties = 0;
    for (i, h) in hypotheses.iter().enumerate() {
        let mut errors = 0;
        for (x, y) in &sample.entries {
            if h.run(x)? != *y {
                errors += 1;
                if errors > best {
                    break;
                }
            }
        }
        if errors < best {
            best = errors;
            index = i;
            ties = 1;
        } else if errors == best {
            ties += 1;
        }
    }
    Ok(ErmResult {
        index,
        errors: best,
        empirical_risk: if sample.is_empty() { 0.0 } else { best as f64 / sample.len() as f64 },
        ties,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub draws: usize,
}

/// Monte-Carlo estimate of `P(f(x) ≠ target(x))`.
pub fn estimate_risk(f: &StringFn<'_>, target: &StringFn<'_>, dist: &StringDistribution, n_mc: usize, seed: u64) -> Result<RiskEstimate> {
    if n_mc == 0 {
        return Err(Error::InvalidParameter("at least one draw is needed".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..n_mc {
        let x = dist.sample(&mut rng);
        if f(&x) != target(&x) {
            hits += 1;
        }
    }
    let p = hits as f64 / n_mc as f64;
    Ok(RiskEstimate {
        mean: p,
        stderr: (p * (1.0 - p) / n_mc as f64).sqrt(),
        draws: n_mc,
    })
}

/// Exact risk of `h` against `target` under `dist`, by dynamic programming
/// over pairs of states. Outputs are compared by name.
pub fn exact_risk(h: &FlatAutomaton, target: &FlatAutomaton, dist: &StringDistribution) -> Result<f64> {
    let k = dist.letters();
    if h.num_letters() != k || target.num_letters() != k {
        return Err(Error::InvalidParameter(format!(
            "distribution has {k} letters, automata have {} and {}",
            h.num_letters(),
            target.num_letters()
        )));
    }
    let map: Vec<Option<usize>> = h
        .outputs()
        .iter()
        .map(|o| target.outputs().iter().position(|t| t == o))
        .collect();
    let nh = h.num_states();
    let nt = target.num_states();
    let probs = dist.probs();
    // per state pair, the probability that the next letter is misclassified
    let mut miss = vec![0.0; nh * nt];
    for p in 0..nh {
        for q in 0..nt {
            miss[p * nt + q] = (0..k)
                .filter(|&a| map[h.output(p, a)] != Some(target.output(q, a)))
                .map(|a| probs[a])
                .sum();
        }
    }
    let mut mass = vec![0.0; nh * nt];
    mass[h.init() * nt + target.init()] = 1.0;
    let mut risk = 0.0;
    let len_prob = 1.0 / dist.max_len() as f64;
    for step in 0..dist.max_len() {
        risk += len_prob * mass.iter().zip(&miss).map(|(m, e)| m * e).sum::<f64>();
        if step + 1 == dist.max_len() {
            break;
        }
        let mut next = vec![0.0; nh * nt];
        for p in 0..nh {
            for q in 0..nt {
                let m = mass[p * nt + q];
                if m == 0.0 {
                    continue;
                }
                for (a, pa) in probs.iter().enumerate() {
                    next[h.next(p, a) * nt + target.next(q, a)] += m * pa;
                }
            }
        }
        mass = next;
    }
    Ok(risk)
}

/// Seed of the `t`-th trial of an experiment seeded with `seed`.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    seed.wrapping_add(t.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub ell: usize,
    pub trials: usize,
    /// Trials whose risk gap was at most `ε`.
    pub successes: usize,
    pub mean_gap: f64,
}

/// Outcome of one ERM trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub erm: ErmResult,
    pub risk: f64,
    pub gap: f64,
}

/// A finite hypothesis class with exact risks precomputed against one target.
#[derive(Debug, Clone)]
pub struct Experiment<'a> {
    pub hypotheses: &'a [FlatAutomaton],
    pub target: &'a FlatAutomaton,
    pub dist: &'a StringDistribution,
    risks: Vec<f64>,
    min_risk: f64,
}

impl<'a> Experiment<'a> {
    pub fn new(hypotheses: &'a [FlatAutomaton], target: &'a FlatAutomaton, dist: &'a StringDistribution) -> Result<Self> {
        let risks = hypotheses
            .iter()
            .map(|h| exact_risk(h, target, dist))
            .collect::<Result<Vec<_>>>()?;
        let min_risk = risks.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Experiment {
            hypotheses,
            target,
            dist,
            risks,
            min_risk,
        })
    }

    /// `min_f R(f)` over the class.
    pub fn min_risk(&self) -> f64 {
        self.min_risk
    }

    pub fn risk(&self, i: usize) -> f64 {
        self.risks[i]
    }

    /// Draws `ell` labelled strings and runs ERM on them.
    pub fn trial(&self, ell: usize, seed: u64) -> Result<Trial> {
        let target = |x: &[usize]| self.target.run(x).expect("sampled strings are non-empty");
        let sample = draw_sample(self.dist, &target, ell, seed);
        let erm = erm_select(self.hypotheses, &sample)?;
        let risk = self.risks[erm.index];
        Ok(Trial {
            risk,
            gap: risk - self.min_risk,
            erm,
        })
    }

    pub fn learning_curve(&self, grid: &[usize], trials: usize, epsilon: f64, seed: u64) -> Result<Vec<CurveRow>> {
        grid.iter()
            .map(|&ell| {
                let mut successes = 0;
                let mut total_gap = 0.0;
                for t in 0..trials {
                    let trial = self.trial(ell, trial_seed(seed, t as u64))?;
                    // tolerance for floating-point noise in the exact risks
                    if trial.gap <= epsilon + 1e-12 {
                        successes += 1;
                    }
                    total_gap += trial.gap;
                }
                Ok(CurveRow {
                    ell,
                    trials,
                    successes,
                    mean_gap: if trials == 0 { 0.0 } else { total_gap / trials as f64 },
                })
            })
            .collect()
    }
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("ell,trials,successes,mean_gap\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{:.6}", r.ell, r.trials, r.successes, r.mean_gap);
    }
    out
}
