//! String functions built from a few constructors, and the descriptions of
//! components and cascades in those terms.
//!
//! Three kinds of function appear:
//!
//! - letter functions `Σ → Γ`;
//! - string functions `Σ⁺ → Γ` (some also accept the empty string);
//! - prefix transductions `Σ* → Γ*`, mapping `σ₁…σₙ` to `γ₁…γₙ` where `γₖ`
//!   depends on `σ₁…σₖ` only.
//!
//! Composition is diagrammatic: `f.then(g)` applies `f` first.
//!
//! Evaluation streams the input once. Every node keeps a small state and
//! emits one letter per input letter; a string function's value on `s` is
//! the last letter emitted on `s`, a transduction's value is all of them.

use std::fmt;
use std::rc::Rc;

use crate::alphabet::{FactoredAlphabet, Letter};
use crate::automaton::Semiautomaton;
use crate::cascade::{Cascade, ComponentAutomaton};
use crate::error::{Error, Result};

/// A letter: an atom, or a tuple of letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Atom(u32),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn atom(&self) -> Result<u32> {
        match self {
            Value::Atom(a) => Ok(*a),
            Value::Tuple(_) => Err(Error::Eval(format!("expected an atom, got {self}"))),
        }
    }

    pub fn tuple(&self) -> Result<&[Value]> {
        match self {
            Value::Tuple(t) => Ok(t),
            Value::Atom(_) => Err(Error::Eval(format!("expected a tuple, got {self}"))),
        }
    }

    /// Coordinate values of a letter of a factored alphabet.
    pub fn of_letter(letter: &Letter) -> Value {
        Value::Tuple(letter.values().iter().map(|&v| Value::Atom(v)).collect())
    }

    /// Flat atom coordinates of a tuple of atoms.
    pub fn atoms(&self) -> Result<Vec<u32>> {
        self.tuple()?.iter().map(Value::atom).collect()
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(a) => write!(f, "{a}"),
            Value::Tuple(t) => {
                write!(f, "(")?;
                for (i, v) in t.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Letters of a word over a factored alphabet, given by letter indices.
pub fn word_values(alphabet: &FactoredAlphabet, word: &[usize]) -> Result<Vec<Value>> {
    word.iter()
        .enumerate()
        .map(|(position, &i)| {
            if i >= alphabet.size() {
                return Err(Error::UnknownLetter {
                    letter: i.to_string(),
                    position,
                });
            }
            Ok(Value::of_letter(&alphabet.letter_at(i)))
        })
        .collect()
}

type LetterClosure = dyn Fn(&Value) -> Result<Value>;

/// A named letter function.
#[derive(Clone)]
pub struct LetterMap {
    name: String,
    f: Rc<LetterClosure>,
}

impl LetterMap {
    pub fn new(name: impl Into<String>, f: impl Fn(&Value) -> Result<Value> + 'static) -> Self {
        LetterMap {
            name: name.into(),
            f: Rc::new(f),
        }
    }

    /// A function on atoms `0..table.len()`.
    pub fn table(name: impl Into<String>, table: Vec<u32>) -> Self {
        let name = name.into();
        let label = name.clone();
        LetterMap::new(name, move |v| {
            let a = v.atom()? as usize;
            table
                .get(a)
                .map(|&b| Value::Atom(b))
                .ok_or_else(|| Error::Eval(format!("{label} is undefined on {a}")))
        })
    }

    /// `π_J` on tuples; `indices` are 1-based.
    pub fn projection(indices: Vec<usize>) -> Self {
        let name = format!("pi_{{{}}}", indices.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
        LetterMap::new(name, move |v| {
            let t = v.tuple()?;
            indices
                .iter()
                .map(|&i| {
                    t.get(i.wrapping_sub(1))
                        .cloned()
                        .ok_or_else(|| Error::Eval(format!("coordinate {i} missing in {v}")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Value::Tuple)
        })
    }

    /// `((x₁…xₖ), y) ↦ (x₁…xₖ, y)`.
    pub fn widen() -> Self {
        LetterMap::new("widen", |v| match v.tuple()? {
            [Value::Tuple(xs), y] => {
                let mut out = xs.clone();
                out.push(y.clone());
                Ok(Value::Tuple(out))
            }
            _ => Err(Error::Eval(format!("cannot widen {v}"))),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, v: &Value) -> Result<Value> {
        (self.f)(v)
    }
}

impl fmt::Debug for LetterMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LetterMap({})", self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Letter,
    String,
    Transduction,
}

#[derive(Debug, Clone)]
enum Node {
    Letter(LetterMap),
    Identity,
    /// Reads atoms as letter indices; its value is the state reached.
    Semiautomaton(Semiautomaton),
    /// `f*(σ₁…σₙ) = f(σₙ)`.
    LiftStar(Box<StringFunction>),
    /// `f̄(σ₁…σₙ) = f(σ₁) f(σ₁σ₂) … f(σ₁…σₙ)`.
    PrefixMap(Box<StringFunction>),
    /// `f^◁(σ₁…σₙ) = f(σ₁…σₙ₋₁)`.
    Pop(Box<StringFunction>),
    Compose(Box<StringFunction>, Box<StringFunction>),
    /// `(f × g)(s) = (f(s), g(s))`, letterwise for transductions.
    Cross(Box<StringFunction>, Box<StringFunction>),
}

/// A letter function, string function or prefix transduction.
#[derive(Debug, Clone)]
pub struct StringFunction {
    node: Node,
    kind: Kind,
    accepts_empty: bool,
}

impl StringFunction {
    pub fn letter(map: LetterMap) -> Self {
        StringFunction {
            node: Node::Letter(map),
            kind: Kind::Letter,
            accepts_empty: false,
        }
    }

    pub fn identity() -> Self {
        StringFunction {
            node: Node::Identity,
            kind: Kind::Letter,
            accepts_empty: false,
        }
    }

    /// `D(s)`, the state reached on `s`; defined on the empty string.
    pub fn semiautomaton(core: Semiautomaton) -> Self {
        StringFunction {
            node: Node::Semiautomaton(core),
            kind: Kind::String,
            accepts_empty: true,
        }
    }

    pub fn lift_star(f: StringFunction) -> Result<Self> {
        if f.kind != Kind::Letter {
            return Err(Error::Shape(format!("lifting needs a letter function, got {:?}", f.kind)));
        }
        Ok(StringFunction {
            node: Node::LiftStar(Box::new(f)),
            kind: Kind::String,
            accepts_empty: false,
        })
    }

    pub fn prefix_map(f: StringFunction) -> Result<Self> {
        if f.kind != Kind::String {
            return Err(Error::Shape(format!("the prefix map needs a string function, got {:?}", f.kind)));
        }
        Ok(StringFunction {
            node: Node::PrefixMap(Box::new(f)),
            kind: Kind::Transduction,
            accepts_empty: true,
        })
    }

    pub fn pop(f: StringFunction) -> Result<Self> {
        if f.kind != Kind::String || !f.accepts_empty {
            return Err(Error::Shape(
                "dropping the last letter needs a string function defined on the empty string".into(),
            ));
        }
        Ok(StringFunction {
            node: Node::Pop(Box::new(f)),
            kind: Kind::String,
            accepts_empty: false,
        })
    }

    /// `self` first, then `g`.
    pub fn then(self, g: StringFunction) -> Result<Self> {
        let (kind, accepts_empty) = match (self.kind, g.kind) {
            (Kind::Letter, Kind::Letter) => (Kind::Letter, false),
            (Kind::String, Kind::Letter) => (Kind::String, self.accepts_empty),
            (Kind::Transduction, Kind::String) => (Kind::String, g.accepts_empty),
            (Kind::Transduction, Kind::Transduction) => (Kind::Transduction, true),
            (a, b) => return Err(Error::Shape(format!("cannot compose {a:?} with {b:?}"))),
        };
        Ok(StringFunction {
            node: Node::Compose(Box::new(self), Box::new(g)),
            kind,
            accepts_empty,
        })
    }

    pub fn cross(self, g: StringFunction) -> Result<Self> {
        if self.kind != g.kind {
            return Err(Error::Shape(format!("cannot pair {:?} with {:?}", self.kind, g.kind)));
        }
        let (kind, accepts_empty) = (self.kind, self.accepts_empty && g.accepts_empty);
        Ok(StringFunction {
            node: Node::Cross(Box::new(self), Box::new(g)),
            kind,
            accepts_empty,
        })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn accepts_empty(&self) -> bool {
        self.accepts_empty
    }

    /// Value of a letter function.
    pub fn apply_letter(&self, x: &Value) -> Result<Value> {
        if self.kind != Kind::Letter {
            return Err(Error::Shape(format!("{:?} is not a letter function", self.kind)));
        }
        Stream::new(self).push(x)
    }

    /// Value of a string function.
    pub fn apply(&self, s: &[Value]) -> Result<Value> {
        if self.kind != Kind::String {
            return Err(Error::Shape(format!("{:?} is not a string function", self.kind)));
        }
        if s.is_empty() {
            return self.empty_value();
        }
        let mut stream = Stream::new(self);
        let mut last = None;
        for x in s {
            last = Some(stream.push(x)?);
        }
        Ok(last.expect("non-empty"))
    }

    /// Value of a transduction.
    pub fn transduce(&self, s: &[Value]) -> Result<Vec<Value>> {
        if self.kind != Kind::Transduction {
            return Err(Error::Shape(format!("{:?} is not a transduction", self.kind)));
        }
        self.prefix_values(s)
    }

    /// The letter emitted after each prefix: for a string function `f`,
    /// the values of `f̄`. Linear in `|s|`.
    pub fn prefix_values(&self, s: &[Value]) -> Result<Vec<Value>> {
        let mut stream = Stream::new(self);
        s.iter().map(|x| stream.push(x)).collect()
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator(Stream::new(self))
    }

    fn empty_value(&self) -> Result<Value> {
        if !self.accepts_empty {
            return Err(Error::EmptyString);
        }
        match &self.node {
            Node::Semiautomaton(d) => Ok(Value::Atom(d.init() as u32)),
            Node::Compose(f, g) => match (f.kind, g.kind) {
                (Kind::String, Kind::Letter) => g.apply_letter(&f.empty_value()?),
                _ => g.empty_value(),
            },
            Node::Cross(f, g) => Ok(Value::Tuple(vec![f.empty_value()?, g.empty_value()?])),
            _ => Err(Error::EmptyString),
        }
    }
}

/// Incremental evaluation: one output letter per letter pushed. Cloning
/// forks the evaluation, which lets callers walk a tree of strings.
#[derive(Clone)]
pub struct Evaluator<'a>(Stream<'a>);

impl Evaluator<'_> {
    pub fn push(&mut self, x: &Value) -> Result<Value> {
        self.0.push(x)
    }
}

// Slots of a stream in pre-order; the root is slot 0. Cloning copies one vector.
#[derive(Clone)]
struct Stream<'a> {
    slots: Vec<Slot<'a>>,
}

#[derive(Clone)]
enum Slot<'a> {
    Letter(&'a LetterMap),
    Identity,
    Semiautomaton { core: &'a Semiautomaton, q: usize },
    // lifts and prefix maps emit the child's letter unchanged
    Pass(usize),
    Pop { child: usize, previous: Result<Value> },
    Compose(usize, usize),
    Cross(usize, usize),
}

impl<'a> Stream<'a> {
    fn new(f: &'a StringFunction) -> Self {
        let mut slots = Vec::new();
        Self::build(f, &mut slots);
        Stream { slots }
    }

    fn build(f: &'a StringFunction, slots: &mut Vec<Slot<'a>>) -> usize {
        let at = slots.len();
        slots.push(Slot::Identity);
        let slot = match &f.node {
            Node::Letter(m) => Slot::Letter(m),
            Node::Identity => Slot::Identity,
            Node::Semiautomaton(core) => Slot::Semiautomaton { core, q: core.init() },
            Node::LiftStar(g) | Node::PrefixMap(g) => Slot::Pass(Self::build(g, slots)),
            Node::Pop(g) => Slot::Pop {
                child: Self::build(g, slots),
                previous: g.empty_value(),
            },
            Node::Compose(g, h) => {
                let g = Self::build(g, slots);
                Slot::Compose(g, Self::build(h, slots))
            }
            Node::Cross(g, h) => {
                let g = Self::build(g, slots);
                Slot::Cross(g, Self::build(h, slots))
            }
        };
        slots[at] = slot;
        at
    }

    fn push(&mut self, x: &Value) -> Result<Value> {
        self.push_at(0, x)
    }

    fn push_at(&mut self, i: usize, x: &Value) -> Result<Value> {
        match &mut self.slots[i] {
            Slot::Letter(m) => m.apply(x),
            Slot::Identity => Ok(x.clone()),
            Slot::Semiautomaton { core, q } => {
                let a = x.atom()? as usize;
                if a >= core.num_letters() {
                    return Err(Error::Eval(format!("letter {a} outside a semiautomaton with {} letters", core.num_letters())));
                }
                *q = core.next(*q, a);
                Ok(Value::Atom(*q as u32))
            }
            &mut Slot::Pass(g) => self.push_at(g, x),
            &mut Slot::Pop { child, .. } => {
                let next = self.push_at(child, x);
                match &mut self.slots[i] {
                    Slot::Pop { previous, .. } => std::mem::replace(previous, next),
                    _ => unreachable!("slot kinds do not change"),
                }
            }
            &mut Slot::Compose(g, h) => {
                let y = self.push_at(g, x)?;
                self.push_at(h, &y)
            }
            &mut Slot::Cross(g, h) => Ok(Value::Tuple(vec![self.push_at(g, x)?, self.push_at(h, x)?])),
        }
    }
}

/// A component as `π̄*_J ∘ ((φ̄* ∘ D^◁) × I*) ∘ θ` on letters `Value::of_letter`.
pub fn component_function(component: &ComponentAutomaton) -> Result<StringFunction> {
    let signature = component.signature().clone();
    let index = move |v: &Value| -> Result<usize> {
        let xs = v.atoms()?;
        if xs.len() != signature.arity() || xs.iter().zip(signature.coords()).any(|(&x, d)| x as usize >= d.len()) {
            return Err(Error::Eval(format!("{v} is not a letter of the component's signature")));
        }
        Ok(signature.index_of_values(&xs))
    };
    let phi_index = index.clone();
    let phi_table = component.phi_table().to_vec();
    let phi = LetterMap::new("phi", move |v| Ok(Value::Atom(phi_table[phi_index(v)?])));
    let c = component.clone();
    let theta = LetterMap::new("theta", move |v| match v.tuple()? {
        [q, x] => {
            let q = q.atom()? as usize;
            if q >= c.core().num_states() {
                return Err(Error::Eval(format!("state {q} out of range")));
            }
            Ok(Value::Atom(c.theta(q, index(x)?) as u32))
        }
        _ => Err(Error::Eval(format!("theta expects (state, letter), got {v}"))),
    });

    let project = StringFunction::prefix_map(StringFunction::lift_star(StringFunction::letter(LetterMap::projection(
        component.deps().indices().to_vec(),
    )))?)?;
    let state_before = StringFunction::prefix_map(StringFunction::lift_star(StringFunction::letter(phi))?)?
        .then(StringFunction::pop(StringFunction::semiautomaton(component.core().clone()))?)?;
    let last = StringFunction::lift_star(StringFunction::identity())?;
    project
        .then(state_before.cross(last)?)?
        .then(StringFunction::letter(theta))
}

/// A cascade as `(I* × A₁)‾ ∘ … ∘ (I* × A_{d-1})‾ ∘ A_d`, letters widening
/// by one coordinate at each stage.
pub fn cascade_function(cascade: &Cascade) -> Result<StringFunction> {
    let (last, front) = cascade.components().split_last().expect("non-empty cascade");
    let mut pipeline: Option<StringFunction> = None;
    for c in front {
        let stage = StringFunction::prefix_map(
            StringFunction::lift_star(StringFunction::identity())?
                .cross(component_function(c)?)?
                .then(StringFunction::letter(LetterMap::widen()))?,
        )?;
        pipeline = Some(match pipeline {
            None => stage,
            Some(p) => p.then(stage)?,
        });
    }
    let tail = component_function(last)?;
    match pipeline {
        None => Ok(tail),
        Some(p) => p.then(tail),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{Domain, LetterFn, Projection};
    use crate::cascade::OutputFn;
    use crate::complexity::all_strings;
    use crate::primes::{make_counter, make_flipflop};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    // Direct recursive reading of the definitions, quadratic in |s|.
    fn naive(f: &StringFunction, s: &[Value]) -> Result<Value> {
        match &f.node {
            Node::Letter(m) => m.apply(&s[0]),
            Node::Identity => Ok(s[0].clone()),
            Node::Semiautomaton(d) => {
                let mut q = d.init();
                for x in s {
                    q = d.next(q, x.atom()? as usize);
                }
                Ok(Value::Atom(q as u32))
            }
            Node::LiftStar(g) => naive(g, &s[s.len() - 1..]),
            Node::PrefixMap(g) => Ok(Value::Tuple(naive_seq(g, s)?)),
            Node::Pop(g) => naive(g, &s[..s.len() - 1]),
            Node::Compose(g, h) => match (g.kind, h.kind) {
                (Kind::Transduction, _) => {
                    let inner = naive_transduce(g, s)?;
                    if h.kind == Kind::Transduction {
                        Ok(Value::Tuple(naive_transduce(h, &inner)?))
                    } else if inner.is_empty() {
                        h.empty_value()
                    } else {
                        naive(h, &inner)
                    }
                }
                _ => naive(h, &[naive(g, s)?]),
            },
            Node::Cross(g, h) => Ok(Value::Tuple(vec![naive(g, s)?, naive(h, s)?])),
        }
    }

    fn naive_seq(g: &StringFunction, s: &[Value]) -> Result<Vec<Value>> {
        (1..=s.len()).map(|k| naive(g, &s[..k])).collect()
    }

    fn naive_transduce(f: &StringFunction, s: &[Value]) -> Result<Vec<Value>> {
        match &f.node {
            Node::PrefixMap(g) => naive_seq(g, s),
            Node::Compose(g, h) => naive_transduce(h, &naive_transduce(g, s)?),
            Node::Cross(g, h) => Ok(naive_transduce(g, s)?
                .into_iter()
                .zip(naive_transduce(h, s)?)
                .map(|(a, b)| Value::Tuple(vec![a, b]))
                .collect()),
            _ => unreachable!("not a transduction"),
        }
    }

    fn atoms(s: &[usize]) -> Vec<Value> {
        s.iter().map(|&a| Value::Atom(a as u32)).collect()
    }

    fn random_semi(rng: &mut ChaCha8Rng) -> StringFunction {
        let table: Vec<u32> = (0..9).map(|_| rng.gen_range(0..3)).collect();
        StringFunction::semiautomaton(
            Semiautomaton::new(vec!["a".into(), "b".into(), "c".into()], vec!["p".into(), "q".into(), "r".into()], table, 0).unwrap(),
        )
    }

    fn random_letter(rng: &mut ChaCha8Rng) -> StringFunction {
        StringFunction::letter(LetterMap::table("t", (0..3).map(|_| rng.gen_range(0..3)).collect()))
    }

    // A random string function from atom strings over {0,1,2} to atoms in {0,1,2}.
    fn random_string_fn(rng: &mut ChaCha8Rng, depth: usize) -> StringFunction {
        let choice = if depth == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..6) };
        match choice {
            0 => random_semi(rng),
            1 => StringFunction::lift_star(random_letter(rng)).unwrap(),
            2 => random_string_fn(rng, depth - 1).then(random_letter(rng)).unwrap(),
            3 => StringFunction::prefix_map(random_string_fn(rng, depth - 1))
                .unwrap()
                .then(random_string_fn(rng, depth - 1))
                .unwrap(),
            4 => {
                let inner = StringFunction::prefix_map(random_string_fn(rng, depth - 1))
                    .unwrap()
                    .then(random_semi(rng))
                    .unwrap();
                StringFunction::pop(inner).unwrap()
            }
            _ => {
                let table: Vec<u32> = (0..9).map(|_| rng.gen_range(0..3)).collect();
                let pair = LetterMap::new("pair", move |v| {
                    let t = v.tuple()?;
                    Ok(Value::Atom(table[(t[0].atom()? * 3 + t[1].atom()?) as usize]))
                });
                random_string_fn(rng, depth - 1)
                    .cross(random_string_fn(rng, depth - 1))
                    .unwrap()
                    .then(StringFunction::letter(pair))
                    .unwrap()
            }
        }
    }

    fn random_cascade(rng: &mut ChaCha8Rng) -> Cascade {
        let external = FactoredAlphabet::new(vec![
            Domain::new("u", ["a", "b"]).unwrap(),
            Domain::new("v", ["x", "y", "z"]).unwrap(),
        ])
        .unwrap();
        let mut builder = Cascade::builder(external);
        for i in 0..rng.gen_range(1..4) {
            let arity = builder.next_input().arity();
            let mut deps: Vec<usize> = (1..=arity).filter(|_| rng.gen_bool(0.5)).collect();
            if deps.is_empty() {
                deps.push(rng.gen_range(1..=arity));
            }
            let size = builder
                .next_input()
                .project(&Projection::new(deps.clone(), arity).unwrap())
                .unwrap()
                .size();
            let core = if rng.gen_bool(0.5) {
                make_flipflop(true, 0).unwrap()
            } else {
                make_counter(3, 0).unwrap()
            };
            let phi = LetterFn::Table((0..size).map(|_| rng.gen_range(0..core.num_letters() as u32)).collect());
            let output = if rng.gen_bool(0.5) { OutputFn::State } else { OutputFn::NextState };
            builder = builder.component(format!("c{i}"), deps, phi, core, output).unwrap();
        }
        builder.build().unwrap()
    }

    #[test]
    fn shapes_are_checked() {
        let semi = make_flipflop(true, 0).unwrap();
        assert!(matches!(StringFunction::pop(StringFunction::lift_star(StringFunction::identity()).unwrap()), Err(Error::Shape(_))));
        assert!(StringFunction::prefix_map(StringFunction::identity()).is_err());
        assert!(StringFunction::lift_star(StringFunction::semiautomaton(semi.clone())).is_err());
        assert!(StringFunction::identity().then(StringFunction::semiautomaton(semi.clone())).is_err());
        assert!(StringFunction::identity().cross(StringFunction::semiautomaton(semi)).is_err());
    }

    #[test]
    fn semiautomaton_on_empty_string() {
        let d = StringFunction::semiautomaton(make_flipflop(true, 1).unwrap());
        assert_eq!(d.apply(&[]).unwrap(), Value::Atom(1));
        let popped = StringFunction::pop(d).unwrap();
        assert_eq!(popped.apply(&atoms(&[1])).unwrap(), Value::Atom(1));
        assert_eq!(popped.apply(&atoms(&[1, 2])).unwrap(), Value::Atom(0));
        assert!(matches!(popped.apply(&[]), Err(Error::EmptyString)));
    }

    #[test]
    fn streaming_matches_naive_on_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let words = all_strings(3, 4);
        for _ in 0..150 {
            let f = random_string_fn(&mut rng, 3);
            for w in &words {
                let s = atoms(w);
                assert_eq!(f.apply(&s).unwrap(), naive(&f, &s).unwrap());
                assert_eq!(f.prefix_values(&s).unwrap(), naive_seq(&f, &s).unwrap());
            }
        }
    }

    #[test]
    fn bar_of_composition_with_letter_function() {
        // (f₁ ∘ f₂)‾ = f̄₁ ∘ f̄₂* when f₂ is a letter function
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let f1 = random_string_fn(&mut rng, 2);
            let f2 = random_letter(&mut rng);
            let left = StringFunction::prefix_map(f1.clone().then(f2.clone()).unwrap()).unwrap();
            let right = StringFunction::prefix_map(f1)
                .unwrap()
                .then(StringFunction::prefix_map(StringFunction::lift_star(f2).unwrap()).unwrap())
                .unwrap();
            for w in all_strings(3, 4) {
                let s = atoms(&w);
                assert_eq!(left.transduce(&s).unwrap(), right.transduce(&s).unwrap());
            }
        }
    }

    #[test]
    fn parallel_prefix_maps_have_equal_pattern_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fs: Vec<StringFunction> = (0..4).map(|_| random_string_fn(&mut rng, 1)).collect();
        let gs: Vec<StringFunction> = (0..4).map(|_| random_string_fn(&mut rng, 1)).collect();
        let sample: Vec<Vec<Value>> = all_strings(3, 3).iter().step_by(4).map(|w| atoms(w)).collect();
        let mut joint = HashSet::new();
        let mut separate = HashSet::new();
        for f in &fs {
            for g in &gs {
                let fg = StringFunction::prefix_map(f.clone().cross(g.clone()).unwrap()).unwrap();
                joint.insert(sample.iter().map(|s| fg.transduce(s).unwrap()).collect::<Vec<_>>());
                let fb = StringFunction::prefix_map(f.clone()).unwrap();
                let gb = StringFunction::prefix_map(g.clone()).unwrap();
                separate.insert(
                    sample
                        .iter()
                        .map(|s| (fb.transduce(s).unwrap(), gb.transduce(s).unwrap()))
                        .collect::<Vec<_>>(),
                );
            }
        }
        assert_eq!(joint.len(), separate.len());
    }

    #[test]
    fn unknown_letters_are_reported() {
        let c = random_cascade(&mut ChaCha8Rng::seed_from_u64(1));
        let f = cascade_function(&c).unwrap();
        assert!(matches!(f.apply(&[Value::Atom(0)]), Err(Error::Eval(_))));
        assert!(matches!(f.apply(&[Value::Tuple(vec![Value::Atom(5), Value::Atom(5)])]), Err(Error::Eval(_))));
        assert!(matches!(word_values(c.external(), &[99]), Err(Error::UnknownLetter { position: 0, .. })));
    }

    proptest! {
        #[test]
        fn component_function_matches_induced_automaton(seed in any::<u64>(), word in proptest::collection::vec(0usize..6, 1..9)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cascade = random_cascade(&mut rng);
            let first = &cascade.components()[0];
            let f = component_function(first).unwrap();
            let s = word_values(cascade.external(), &word).unwrap();
            prop_assert_eq!(f.apply(&s).unwrap(), Value::Atom(first.induce().run(&word).unwrap() as u32));
            prop_assert_eq!(naive(&f, &s).unwrap(), f.apply(&s).unwrap());
        }

        #[test]
        fn cascade_function_matches_cascade(seed in any::<u64>(), word in proptest::collection::vec(0usize..6, 1..9)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cascade = random_cascade(&mut rng);
            let f = cascade_function(&cascade).unwrap();
            let s = word_values(cascade.external(), &word).unwrap();
            prop_assert_eq!(f.apply(&s).unwrap(), Value::Atom(cascade.run(&word).unwrap() as u32));
            prop_assert_eq!(naive(&f, &s).unwrap(), f.apply(&s).unwrap());
        }
    }
}
