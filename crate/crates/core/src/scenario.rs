//! The crafting task: collect materials, then use the factory.
//!
//! Traces are strings over `blank, wood, iron, fire, steel, factory`. The
//! task is complete once the factory has been used with either wood, iron and
//! fire, or steel, collected beforehand.

use crate::alphabet::{FactoredAlphabet, Guard, LetterFn};
use crate::cascade::{Cascade, OutputFn};
use crate::error::{Error, Result};
use crate::family::{CascadeClass, ComponentClass, DepSpec, PhiTemplate};
use crate::learner::StringDistribution;
use crate::primes::{make_counter, make_flipflop};

pub const TASK_LETTERS: [&str; 6] = ["blank", "wood", "iron", "fire", "steel", "factory"];

/// Letter weights used by the experiments: factory and steel are boosted so
/// that completed traces are common at length 10.
pub const DEFAULT_WEIGHTS: [f64; 6] = [0.10, 0.15, 0.15, 0.15, 0.20, 0.25];

const WOOD: u32 = 1;
const IRON: u32 = 2;
const FIRE: u32 = 3;
const STEEL: u32 = 4;
const FACTORY: u32 = 5;

/// The one-coordinate alphabet `x ∈ TASK_LETTERS`.
pub fn task_alphabet() -> FactoredAlphabet {
    FactoredAlphabet::flat("x", TASK_LETTERS).expect("fixed alphabet")
}

/// Parses a whitespace-separated trace into letter indices.
pub fn parse_trace(trace: &str) -> Result<Vec<usize>> {
    task_alphabet().parse_word(trace)
}

// ---------------------------------------------------------------------------
// Temporal rules

/// `pred(t + offset)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub pred: String,
    pub offset: i64,
}

/// `body → head`, all atoms over one time variable `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub body: Vec<Atom>,
    pub head: Atom,
}

fn atom(pred: &str, offset: i64) -> Atom {
    Atom {
        pred: pred.into(),
        offset,
    }
}

fn rule(body: &[(&str, i64)], head: (&str, i64)) -> Rule {
    Rule {
        body: body.iter().map(|&(p, o)| atom(p, o)).collect(),
        head: atom(head.0, head.1),
    }
}

/// A set of rules over unary predicates of time points `1..=τ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
    preds: Vec<String>,
}

/// Facts derived from an input trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    preds: Vec<String>,
    horizon: usize,
    // holds[p][t - 1]
    holds: Vec<Vec<bool>>,
}

impl Model {
    /// Truth of `pred(t)` for `t` in `1..=τ`; unknown predicates are false.
    pub fn holds(&self, pred: &str, t: usize) -> bool {
        match self.preds.iter().position(|p| p == pred) {
            Some(p) if (1..=self.horizon).contains(&t) => self.holds[p][t - 1],
            _ => false,
        }
    }

    pub fn series(&self, pred: &str) -> Vec<bool> {
        (1..=self.horizon).map(|t| self.holds(pred, t)).collect()
    }
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        let mut preds: Vec<String> = Vec::new();
        for r in &rules {
            for a in r.body.iter().chain(std::iter::once(&r.head)) {
                if !preds.contains(&a.pred) {
                    preds.push(a.pred.clone());
                }
            }
        }
        Program { rules, preds }
    }

    /// The eleven rules of the crafting task.
    pub fn crafting() -> Self {
        Program::new(vec![
            rule(&[("wood", 0)], ("getWood", 0)),
            rule(&[("getWood", 0)], ("getWood", 1)),
            rule(&[("iron", 0)], ("getIron", 0)),
            rule(&[("getIron", 0)], ("getIron", 1)),
            rule(&[("fire", 0)], ("getFire", 0)),
            rule(&[("getFire", 0)], ("getFire", 1)),
            rule(&[("steel", 0)], ("getSteel", 0)),
            rule(&[("getSteel", 0)], ("getSteel", 1)),
            rule(&[("getSteel", -1), ("factory", 0)], ("useFactory", 0)),
            rule(
                &[("getWood", -1), ("getIron", -1), ("getFire", -1), ("factory", 0)],
                ("useFactory", 0),
            ),
            rule(&[("useFactory", 0)], ("useFactory", 1)),
        ])
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Forward chaining to the least fixpoint. `facts[t - 1]` lists the
    /// predicates true at time `t`.
    pub fn evaluate(&self, facts: &[Vec<&str>]) -> Model {
        let horizon = facts.len();
        let mut preds = self.preds.clone();
        for f in facts.iter().flatten() {
            if !preds.iter().any(|p| p == f) {
                preds.push(f.to_string());
            }
        }
        let id = |name: &str| preds.iter().position(|p| p == name).expect("collected above");
        let mut holds = vec![vec![false; horizon]; preds.len()];
        for (t, fs) in facts.iter().enumerate() {
            for f in fs {
                holds[id(f)][t] = true;
            }
        }
        let compiled: Vec<(Vec<(usize, i64)>, (usize, i64))> = self
            .rules
            .iter()
            .map(|r| {
                (
                    r.body.iter().map(|a| (id(&a.pred), a.offset)).collect(),
                    (id(&r.head.pred), r.head.offset),
                )
            })
            .collect();
        let at = |holds: &Vec<Vec<bool>>, p: usize, t: i64| t >= 1 && t <= horizon as i64 && holds[p][t as usize - 1];
        loop {
            let mut changed = false;
            for (body, (hp, ho)) in &compiled {
                for t in 1..=horizon as i64 {
                    let ht = t + ho;
                    if ht < 1 || ht > horizon as i64 || holds[*hp][ht as usize - 1] {
                        continue;
                    }
                    if body.iter().all(|&(p, o)| at(&holds, p, t + o)) {
                        holds[*hp][ht as usize - 1] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Model { preds, horizon, holds }
    }
}

/// `useFactory(t)` for every time point of a trace of letter indices.
pub fn datalog_oracle(trace: &[usize]) -> Vec<bool> {
    let facts: Vec<Vec<&str>> = trace
        .iter()
        .map(|&a| if a == 0 { vec![] } else { vec![TASK_LETTERS[a]] })
        .collect();
    Program::crafting().evaluate(&facts).series("useFactory")
}

/// The counting variant with unbounded integer counts: the factory works
/// after 13 wood, 5 iron and fire, or after 7 steel.
pub fn counting_oracle(trace: &[usize]) -> Vec<bool> {
    let (mut wood, mut iron, mut steel, mut fire, mut used) = (0u64, 0u64, 0u64, false, false);
    trace
        .iter()
        .map(|&a| {
            let a = a as u32;
            if a == FACTORY && ((wood >= 13 && iron >= 5 && fire) || steel >= 7) {
                used = true;
            }
            match a {
                WOOD => wood += 1,
                IRON => iron += 1,
                STEEL => steel += 1,
                FIRE => fire = true,
                _ => {}
            }
            used
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Cascades

fn on_letter(letter: u32) -> LetterFn {
    // first internal letter (set or inc) on the given task letter, read otherwise
    LetterFn::Table((0..TASK_LETTERS.len() as u32).map(|a| u32::from(a != letter)).collect())
}

/// Five write-once flip-flops; the last one is set when the factory is used
/// with the required materials and outputs the state it moves to.
pub fn example3_flipflop_cascade() -> Cascade {
    let ff = || make_flipflop(false, 0).expect("valid flip-flop");
    let set_when = LetterFn::Guards {
        clauses: vec![
            vec![
                Guard::Eq { coord: 0, value: FACTORY },
                Guard::Eq { coord: 1, value: 1 },
                Guard::Eq { coord: 2, value: 1 },
                Guard::Eq { coord: 3, value: 1 },
            ],
            vec![Guard::Eq { coord: 0, value: FACTORY }, Guard::Eq { coord: 4, value: 1 }],
        ],
        on_true: 0,
        on_false: 1,
    };
    Cascade::builder(task_alphabet())
        .component("wood", vec![1], on_letter(WOOD), ff(), OutputFn::State)
        .and_then(|b| b.component("iron", vec![1], on_letter(IRON), ff(), OutputFn::State))
        .and_then(|b| b.component("fire", vec![1], on_letter(FIRE), ff(), OutputFn::State))
        .and_then(|b| b.component("steel", vec![1], on_letter(STEEL), ff(), OutputFn::State))
        .and_then(|b| b.component("factory", vec![1, 2, 3, 4, 5], set_when, ff(), OutputFn::NextState))
        .and_then(|b| b.build())
        .expect("fixed cascade")
}

/// Wood, iron and steel become 16-counters and the factory condition counts.
pub fn example3_counter_cascade() -> Cascade {
    let ff = || make_flipflop(false, 0).expect("valid flip-flop");
    let counter = || make_counter(16, 0).expect("valid counter");
    let set_when = LetterFn::Guards {
        clauses: vec![
            vec![
                Guard::Eq { coord: 0, value: FACTORY },
                Guard::Ge { coord: 1, value: 13 },
                Guard::Ge { coord: 2, value: 5 },
                Guard::Eq { coord: 3, value: 1 },
            ],
            vec![Guard::Eq { coord: 0, value: FACTORY }, Guard::Ge { coord: 4, value: 7 }],
        ],
        on_true: 0,
        on_false: 1,
    };
    Cascade::builder(task_alphabet())
        .component("wood", vec![1], on_letter(WOOD), counter(), OutputFn::State)
        .and_then(|b| b.component("iron", vec![1], on_letter(IRON), counter(), OutputFn::State))
        .and_then(|b| b.component("fire", vec![1], on_letter(FIRE), ff(), OutputFn::State))
        .and_then(|b| b.component("steel", vec![1], on_letter(STEEL), counter(), OutputFn::State))
        .and_then(|b| b.component("factory", vec![1, 2, 3, 4, 5], set_when, ff(), OutputFn::NextState))
        .and_then(|b| b.build())
        .expect("fixed cascade")
}

/// Letter names of the `d`-task family: the crafting letters for `d = 5`,
/// otherwise `t1 … t(d-1), goal`. `blank` always comes first.
pub fn example4_letters(d: usize) -> Vec<String> {
    if d == 5 {
        return TASK_LETTERS.iter().map(|s| s.to_string()).collect();
    }
    std::iter::once("blank".to_string())
        .chain((1..d).map(|i| format!("t{i}")))
        .chain(std::iter::once("goal".to_string()))
        .collect()
}

/// Cascades of `d` write-once flip-flops. Components `1..d-1` read the
/// letter through a 1-term monotone DNF over the `d` task-letter
/// indicators; the last reads everything through a 2-term monotone DNF over
/// the `d` indicators and the `d-1` component outputs.
pub fn example4_class(d: usize) -> Result<CascadeClass> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("the family needs d ≥ 2, got {d}")));
    }
    let letters = example4_letters(d);
    let external = FactoredAlphabet::flat("x", letters.iter().cloned())?;
    let ff = make_flipflop(false, 0)?;
    let exclude = vec!["x=blank".to_string()];
    let mut components: Vec<ComponentClass> = letters[1..d]
        .iter()
        .map(|name| ComponentClass {
            name: name.clone(),
            deps: DepSpec::Fixed(vec![1]),
            phi: PhiTemplate::MonoDnf {
                terms: 1,
                exclude: exclude.clone(),
            },
            cores: vec![ff.clone()],
            outputs: vec![OutputFn::State],
        })
        .collect();
    components.push(ComponentClass {
        name: letters[d].clone(),
        deps: DepSpec::Fixed((1..=d).collect()),
        phi: PhiTemplate::MonoDnf { terms: 2, exclude },
        cores: vec![ff],
        outputs: vec![OutputFn::NextState],
    });
    CascadeClass::new(external, components)
}

/// The member of the `d = 5` family that encodes the flip-flop crafting cascade.
pub fn example4_crafting_member() -> Result<Cascade> {
    let class = example4_class(5)?;
    let dnf = |terms: Vec<Vec<usize>>| LetterFn::MonoDnf {
        terms,
        on_true: 0,
        on_false: 1,
    };
    // boolean view of the last signature: x=blank..x=factory are 0..5, then wood, iron, fire, steel
    class.build(&[
        (vec![1], dnf(vec![vec![1]]), 0, 0),
        (vec![1], dnf(vec![vec![2]]), 0, 0),
        (vec![1], dnf(vec![vec![3]]), 0, 0),
        (vec![1], dnf(vec![vec![4]]), 0, 0),
        (vec![1, 2, 3, 4, 5], dnf(vec![vec![5, 6, 7, 8], vec![5, 9]]), 0, 0),
    ])
}

/// `n` seeded traces with lengths uniform on `[1, max_len]`.
pub fn generate_traces(weights: &[f64], n: usize, max_len: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if weights.len() != TASK_LETTERS.len() {
        return Err(Error::InvalidParameter(format!(
            "expected {} letter weights, got {}",
            TASK_LETTERS.len(),
            weights.len()
        )));
    }
    Ok(StringDistribution::weighted(weights.to_vec(), max_len)?.sample_many(n, seed))
}
