//! JSON documents read and written by the command-line tool.
//!
//! Coordinates, values, internal letters and states are referred to by
//! name; dependency indices are 1-based positions in the component's input
//! alphabet (external coordinates first, then one coordinate per earlier
//! component, named after it).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::alphabet::{BooleanView, Domain, FactoredAlphabet, Guard, LetterFn, Projection};
use crate::automaton::Semiautomaton;
use crate::cascade::{Cascade, ComponentAutomaton, OutputFn};
use crate::error::{Error, Result};
use crate::family::{CascadeClass, ComponentClass, DepSpec, PhiTemplate};
use crate::primes::{make_counter, make_flipflop, validate_prime_identities, PrimeKind};

/// A cascade: external alphabet and components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeSpec {
    pub alphabet: Vec<Domain>,
    pub components: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub name: String,
    pub dependencies: Vec<usize>,
    pub input_fn: InputFnSpec,
    pub core: CoreSpec,
    pub output_fn: OutputFnSpec,
}

/// An input function over the projected signature, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputFnSpec {
    /// Either `values` for every letter in index order, or `entries` keyed by
    /// the comma-joined letter with a `default` for the rest.
    Table {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        entries: BTreeMap<String, String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        default: Option<String>,
    },
    /// Terms are lists of boolean-view variables (`coord=value`, or the
    /// coordinate name for a `{0,1}` coordinate).
    MonoDnf {
        terms: Vec<Vec<String>>,
        on_true: String,
        on_false: String,
    },
    /// Conjunction of `coord ≥ value`, by coordinate name.
    Threshold {
        thresholds: BTreeMap<String, String>,
        on_true: String,
        on_false: String,
    },
    /// Disjunction of conjunctions of guards.
    Guards {
        clauses: Vec<Vec<GuardSpec>>,
        on_true: String,
        on_false: String,
    },
    /// The projected letter itself; internal letters are rendered letters.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuardSpec {
    pub coord: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ge: Option<String>,
}

/// `"flipflop"`, `"flipflop_wo"`, `"counter:n"` (or `"counter(n)"`), or an
/// inline transition table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Json", into = "Json")]
pub enum CoreSpec {
    Named(String),
    Inline(InlineCore),
}

/// `transitions[state][letter]` is the successor state's name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineCore {
    pub letters: Vec<String>,
    pub states: Vec<String>,
    #[serde(default)]
    pub init: Option<String>,
    pub transitions: Vec<Vec<String>>,
}

impl TryFrom<Json> for CoreSpec {
    type Error = String;

    fn try_from(v: Json) -> std::result::Result<Self, String> {
        match v {
            Json::String(s) => Ok(CoreSpec::Named(s)),
            Json::Object(_) => serde_json::from_value(v).map(CoreSpec::Inline).map_err(|e| format!("inline core: {e}")),
            other => Err(format!("core must be a name or an inline table, got {other}")),
        }
    }
}

impl From<CoreSpec> for Json {
    fn from(c: CoreSpec) -> Json {
        match c {
            CoreSpec::Named(s) => Json::String(s),
            CoreSpec::Inline(t) => serde_json::to_value(t).expect("plain data"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OutputFnSpec {
    /// The current state.
    State,
    /// The state entered on the current letter.
    NextState,
    Constant { outputs: Vec<String>, value: String },
    /// `values[q · |letters| + x]`, by state and projected letter index.
    Table { outputs: Vec<String>, values: Vec<String> },
}

fn position(list: &[String], name: &str, what: &str) -> Result<u32> {
    list.iter()
        .position(|v| v == name)
        .map(|i| i as u32)
        .ok_or_else(|| Error::Parse(format!("unknown {what} `{name}` (expected one of: {})", list.join(", "))))
}

fn coord_position(sig: &FactoredAlphabet, name: &str) -> Result<usize> {
    sig.coords()
        .iter()
        .position(|c| c.name == name)
        .ok_or_else(|| Error::Parse(format!("unknown coordinate `{name}`")))
}

impl CoreSpec {
    pub fn build(&self) -> Result<Semiautomaton> {
        match self {
            CoreSpec::Named(name) => match name.as_str() {
                "flipflop" => make_flipflop(true, 0),
                "flipflop_wo" => make_flipflop(false, 0),
                other => {
                    let n = other
                        .strip_prefix("counter:")
                        .or_else(|| other.strip_prefix("counter(").and_then(|s| s.strip_suffix(')')))
                        .and_then(|n| n.trim().parse::<usize>().ok())
                        .ok_or_else(|| {
                            Error::Parse(format!("unknown core `{other}` (expected flipflop, flipflop_wo, counter:n or a table)"))
                        })?;
                    make_counter(n, 0)
                }
            },
            CoreSpec::Inline(t) => {
                if t.transitions.len() != t.states.len() {
                    return Err(Error::Parse(format!(
                        "transitions has {} rows for {} states",
                        t.transitions.len(),
                        t.states.len()
                    )));
                }
                let mut delta = Vec::with_capacity(t.states.len() * t.letters.len());
                for row in &t.transitions {
                    if row.len() != t.letters.len() {
                        return Err(Error::Parse(format!("a transition row has {} entries for {} letters", row.len(), t.letters.len())));
                    }
                    for s in row {
                        delta.push(position(&t.states, s, "state")?);
                    }
                }
                let init = match &t.init {
                    None => 0,
                    Some(s) => position(&t.states, s, "state")? as usize,
                };
                Semiautomaton::new(t.letters.clone(), t.states.clone(), delta, init)
            }
        }
    }

    /// A prime name when `core` is one of the standard primes started in `0`.
    pub fn describe(core: &Semiautomaton) -> CoreSpec {
        if core.init() == 0 {
            for (kind, name) in [
                (PrimeKind::FlipFlop, "flipflop".to_string()),
                (PrimeKind::WriteOnceFlipFlop, "flipflop_wo".to_string()),
                (PrimeKind::Counter(core.num_states()), format!("counter:{}", core.num_states())),
            ] {
                if validate_prime_identities(core, kind).is_ok() && core.letters() == standard_letters(kind) {
                    return CoreSpec::Named(name);
                }
            }
        }
        CoreSpec::Inline(InlineCore {
            letters: core.letters().to_vec(),
            states: core.states().to_vec(),
            init: Some(core.states()[core.init()].clone()),
            transitions: (0..core.num_states())
                .map(|q| (0..core.num_letters()).map(|a| core.states()[core.next(q, a)].clone()).collect())
                .collect(),
        })
    }
}

fn standard_letters(kind: PrimeKind) -> Vec<String> {
    let core = match kind {
        PrimeKind::FlipFlop => make_flipflop(true, 0),
        PrimeKind::WriteOnceFlipFlop => make_flipflop(false, 0),
        PrimeKind::Counter(n) => make_counter(n.max(2), 0),
    };
    core.map(|c| c.letters().to_vec()).unwrap_or_default()
}

impl InputFnSpec {
    /// The letter function over `sig` with values in the core letters `pi`.
    pub fn build(&self, sig: &FactoredAlphabet, pi: &[String]) -> Result<LetterFn> {
        match self {
            InputFnSpec::Table { values, entries, default } => {
                if let Some(values) = values {
                    if !entries.is_empty() || default.is_some() {
                        return Err(Error::Parse("a table gives either `values` or `entries` with `default`".into()));
                    }
                    if values.len() != sig.size() {
                        return Err(Error::Parse(format!("table has {} values for {} letters", values.len(), sig.size())));
                    }
                    return Ok(LetterFn::Table(
                        values.iter().map(|v| position(pi, v, "internal letter")).collect::<Result<_>>()?,
                    ));
                }
                let mut table = vec![None; sig.size()];
                for (letter, v) in entries {
                    let l = sig.parse_letter(letter).map_err(|_| Error::Parse(format!("unknown letter `{letter}` in table")))?;
                    table[sig.index_of(&l)] = Some(position(pi, v, "internal letter")?);
                }
                let fallback = default.as_deref().map(|d| position(pi, d, "internal letter")).transpose()?;
                table
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.or(fallback)
                            .ok_or_else(|| Error::Parse(format!("table misses letter `{}` and has no default", sig.render_index(i))))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(LetterFn::Table)
            }
            InputFnSpec::MonoDnf { terms, on_true, on_false } => {
                let view = BooleanView::of(sig)?;
                let terms = terms
                    .iter()
                    .map(|t| {
                        t.iter()
                            .map(|v| view.position(v).ok_or_else(|| Error::Parse(format!("unknown variable `{v}`"))))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LetterFn::MonoDnf {
                    terms,
                    on_true: position(pi, on_true, "internal letter")?,
                    on_false: position(pi, on_false, "internal letter")?,
                })
            }
            InputFnSpec::Threshold { thresholds, on_true, on_false } => {
                let mut t = vec![0u32; sig.arity()];
                for (coord, value) in thresholds {
                    let c = coord_position(sig, coord)?;
                    t[c] = position(&sig.coord(c).values, value, "value")?;
                }
                Ok(LetterFn::Threshold {
                    thresholds: t,
                    on_true: position(pi, on_true, "internal letter")?,
                    on_false: position(pi, on_false, "internal letter")?,
                })
            }
            InputFnSpec::Guards { clauses, on_true, on_false } => {
                let clauses = clauses
                    .iter()
                    .map(|c| {
                        c.iter()
                            .map(|g| {
                                let coord = coord_position(sig, &g.coord)?;
                                let values = &sig.coord(coord).values;
                                match (&g.eq, &g.ge) {
                                    (Some(v), None) => Ok(Guard::Eq {
                                        coord,
                                        value: position(values, v, "value")?,
                                    }),
                                    (None, Some(v)) => Ok(Guard::Ge {
                                        coord,
                                        value: position(values, v, "value")?,
                                    }),
                                    _ => Err(Error::Parse(format!("guard on `{}` needs exactly one of `eq`, `ge`", g.coord))),
                                }
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LetterFn::Guards {
                    clauses,
                    on_true: position(pi, on_true, "internal letter")?,
                    on_false: position(pi, on_false, "internal letter")?,
                })
            }
            InputFnSpec::Identity => {
                let rendered: Vec<String> = (0..sig.size()).map(|i| sig.render_index(i)).collect();
                if rendered.as_slice() != pi {
                    return Err(Error::Parse("an identity input function needs the core letters to be the rendered letters".into()));
                }
                Ok(LetterFn::Identity)
            }
        }
    }

    pub fn describe(f: &LetterFn, sig: &FactoredAlphabet, pi: &[String]) -> Result<InputFnSpec> {
        let name = |v: u32| pi[v as usize].clone();
        Ok(match f {
            LetterFn::Table(t) => InputFnSpec::Table {
                values: Some(t.iter().map(|&v| name(v)).collect()),
                entries: BTreeMap::new(),
                default: None,
            },
            LetterFn::MonoDnf { terms, on_true, on_false } => {
                let view = BooleanView::of(sig)?;
                InputFnSpec::MonoDnf {
                    terms: terms
                        .iter()
                        .map(|t| t.iter().map(|&v| view.vars()[v].name.clone()).collect())
                        .collect(),
                    on_true: name(*on_true),
                    on_false: name(*on_false),
                }
            }
            LetterFn::Threshold { thresholds, on_true, on_false } => InputFnSpec::Threshold {
                thresholds: thresholds
                    .iter()
                    .enumerate()
                    .filter(|(_, &t)| t > 0)
                    .map(|(c, &t)| (sig.coord(c).name.clone(), sig.coord(c).values[t as usize].clone()))
                    .collect(),
                on_true: name(*on_true),
                on_false: name(*on_false),
            },
            LetterFn::Guards { clauses, on_true, on_false } => InputFnSpec::Guards {
                clauses: clauses
                    .iter()
                    .map(|c| {
                        c.iter()
                            .map(|g| match *g {
                                Guard::Eq { coord, value } => GuardSpec {
                                    coord: sig.coord(coord).name.clone(),
                                    eq: Some(sig.coord(coord).values[value as usize].clone()),
                                    ge: None,
                                },
                                Guard::Ge { coord, value } => GuardSpec {
                                    coord: sig.coord(coord).name.clone(),
                                    eq: None,
                                    ge: Some(sig.coord(coord).values[value as usize].clone()),
                                },
                            })
                            .collect()
                    })
                    .collect(),
                on_true: name(*on_true),
                on_false: name(*on_false),
            },
            LetterFn::Identity => InputFnSpec::Identity,
        })
    }
}

impl OutputFnSpec {
    pub fn build(&self, name: &str) -> Result<OutputFn> {
        Ok(match self {
            OutputFnSpec::State => OutputFn::State,
            OutputFnSpec::NextState => OutputFn::NextState,
            OutputFnSpec::Constant { outputs, value } => OutputFn::Constant {
                outputs: Domain::new(name, outputs.iter().cloned())?,
                value: position(outputs, value, "output")?,
            },
            OutputFnSpec::Table { outputs, values } => OutputFn::Table {
                outputs: Domain::new(name, outputs.iter().cloned())?,
                table: values.iter().map(|v| position(outputs, v, "output")).collect::<Result<_>>()?,
            },
        })
    }

    pub fn describe(f: &OutputFn) -> OutputFnSpec {
        match f {
            OutputFn::State => OutputFnSpec::State,
            OutputFn::NextState => OutputFnSpec::NextState,
            OutputFn::Constant { outputs, value } => OutputFnSpec::Constant {
                outputs: outputs.values.clone(),
                value: outputs.values[*value as usize].clone(),
            },
            OutputFn::Table { outputs, table } => OutputFnSpec::Table {
                outputs: outputs.values.clone(),
                values: table.iter().map(|&v| outputs.values[v as usize].clone()).collect(),
            },
        }
    }
}

fn in_component<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Component { .. } => e,
        other => Error::component(name.to_string(), other.to_string()),
    })
}

impl CascadeSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn build(&self) -> Result<Cascade> {
        let external = FactoredAlphabet::new(self.alphabet.clone())?;
        if self.components.is_empty() {
            return Err(Error::Parse("`components` is empty".into()));
        }
        let mut builder = Cascade::builder(external);
        for c in &self.components {
            let core = in_component(&c.name, c.core.build())?;
            let input = builder.next_input();
            let deps = in_component(&c.name, Projection::new(c.dependencies.clone(), input.arity()))?;
            let sig = in_component(&c.name, input.project(&deps))?;
            let phi = in_component(&c.name, c.input_fn.build(&sig, core.letters()))?;
            let output = in_component(&c.name, c.output_fn.build(&c.name))?;
            builder = builder.component(c.name.clone(), c.dependencies.clone(), phi, core, output)?;
        }
        builder.build()
    }

    pub fn describe(cascade: &Cascade) -> Result<Self> {
        Ok(CascadeSpec {
            alphabet: cascade.external().coords().to_vec(),
            components: cascade.components().iter().map(describe_component).collect::<Result<_>>()?,
        })
    }
}

fn describe_component(c: &ComponentAutomaton) -> Result<ComponentSpec> {
    Ok(ComponentSpec {
        name: c.name().to_string(),
        dependencies: c.deps().indices().to_vec(),
        input_fn: InputFnSpec::describe(c.phi_fn(), c.signature(), c.core().letters())?,
        core: CoreSpec::describe(c.core()),
        output_fn: OutputFnSpec::describe(c.output_fn()),
    })
}

/// `[1, 2]` for fixed dependencies or `{"degree": m}` for every `m`-subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DependencySpec {
    Fixed(Vec<usize>),
    Degree { degree: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputClassSpec {
    Table,
    MonoDnf {
        terms: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        exclude: Vec<String>,
    },
    Threshold,
    Fixed { input_fn: InputFnSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentClassSpec {
    pub name: String,
    pub dependencies: DependencySpec,
    pub input_class: InputClassSpec,
    pub cores: Vec<CoreSpec>,
    pub outputs: Vec<OutputFnSpec>,
}

/// An enumerable class of cascades.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeClassSpec {
    pub alphabet: Vec<Domain>,
    pub components: Vec<ComponentClassSpec>,
}

impl CascadeClassSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn build(&self) -> Result<CascadeClass> {
        let external = FactoredAlphabet::new(self.alphabet.clone())?;
        let mut components = Vec::with_capacity(self.components.len());
        let mut input = external.clone();
        for c in &self.components {
            let cores = in_component(&c.name, c.cores.iter().map(CoreSpec::build).collect::<Result<Vec<_>>>())?;
            if cores.is_empty() {
                return Err(Error::component(c.name.clone(), "`cores` is empty"));
            }
            let outputs = in_component(&c.name, c.outputs.iter().map(|o| o.build(&c.name)).collect::<Result<Vec<_>>>())?;
            let deps = match &c.dependencies {
                DependencySpec::Fixed(j) => DepSpec::Fixed(j.clone()),
                DependencySpec::Degree { degree } => DepSpec::Degree(*degree),
            };
            let phi = match &c.input_class {
                InputClassSpec::Table => PhiTemplate::Table,
                InputClassSpec::Threshold => PhiTemplate::Threshold,
                InputClassSpec::MonoDnf { terms, exclude } => PhiTemplate::MonoDnf {
                    terms: *terms,
                    exclude: exclude.clone(),
                },
                InputClassSpec::Fixed { input_fn } => {
                    let j = match &c.dependencies {
                        DependencySpec::Fixed(j) => j.clone(),
                        DependencySpec::Degree { .. } => {
                            return Err(Error::component(c.name.clone(), "a fixed input function needs fixed dependencies"))
                        }
                    };
                    let p = in_component(&c.name, Projection::new(j, input.arity()))?;
                    let sig = input.project(&p)?;
                    PhiTemplate::Fixed(in_component(&c.name, input_fn.build(&sig, cores[0].letters()))?)
                }
            };
            let class = ComponentClass {
                name: c.name.clone(),
                deps,
                phi,
                cores,
                outputs,
            };
            // the next component reads this one's output coordinate
            let probe = CascadeClass::new(input.clone(), vec![class.clone()])?;
            input = input.extend(probe.component_gamma(0).clone())?;
            components.push(class);
        }
        CascadeClass::new(external, components)
    }

    pub fn describe(class: &CascadeClass) -> Result<Self> {
        let components = class
            .components()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let input_class = match &c.phi {
                    PhiTemplate::Table => InputClassSpec::Table,
                    PhiTemplate::Threshold => InputClassSpec::Threshold,
                    PhiTemplate::MonoDnf { terms, exclude } => InputClassSpec::MonoDnf {
                        terms: *terms,
                        exclude: exclude.clone(),
                    },
                    PhiTemplate::Fixed(f) => {
                        let sig = class.component_input(i).project(&class.projections(i)[0])?;
                        InputClassSpec::Fixed {
                            input_fn: InputFnSpec::describe(f, &sig, c.cores[0].letters())?,
                        }
                    }
                };
                Ok(ComponentClassSpec {
                    name: c.name.clone(),
                    dependencies: match &c.deps {
                        DepSpec::Fixed(j) => DependencySpec::Fixed(j.clone()),
                        DepSpec::Degree(m) => DependencySpec::Degree { degree: *m },
                    },
                    input_class,
                    cores: c.cores.iter().map(CoreSpec::describe).collect(),
                    outputs: c.outputs.iter().map(OutputFnSpec::describe).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CascadeClassSpec {
            alphabet: class.external().coords().to_vec(),
            components,
        })
    }
}

/// Settings of a learning experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub epsilon: f64,
    pub eta: f64,
    pub max_len: usize,
    /// One weight per external letter in index order; uniform when absent.
    /// Normalised on use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Sample size; the finite-class bound when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<u64>,
    /// Target cascade labelling generated samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<CascadeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caps: Option<CapsSpec>,
}

fn default_trials() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsSpec {
    pub enumeration: Option<u64>,
    pub product_states: Option<u64>,
    pub monoid: Option<u64>,
    pub growth_samples: Option<u64>,
}

impl CapsSpec {
    pub fn apply(&self, caps: crate::Caps) -> crate::Caps {
        crate::Caps {
            enumeration: self.enumeration.unwrap_or(caps.enumeration),
            product_states: self.product_states.unwrap_or(caps.product_states),
            monoid: self.monoid.unwrap_or(caps.monoid),
            growth_samples: self.growth_samples.unwrap_or(caps.growth_samples),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0 && self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidParameter("epsilon and eta must lie in (0, 1)".into()));
        }
        if self.max_len == 0 {
            return Err(Error::InvalidParameter("max_len must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if let Some(w) = &self.weights {
            if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) || w.iter().sum::<f64>() <= 0.0 {
                return Err(Error::InvalidParameter("weights must be non-negative with a positive sum".into()));
            }
        }
        Ok(())
    }

    /// Weights scaled to sum to one.
    pub fn normalized_weights(&self, letters: usize) -> Result<Vec<f64>> {
        match &self.weights {
            None => Ok(vec![1.0 / letters as f64; letters]),
            Some(w) if w.len() != letters => Err(Error::InvalidParameter(format!(
                "{} weights for {letters} letters",
                w.len()
            ))),
            Some(w) => {
                let total: f64 = w.iter().sum();
                Ok(w.iter().map(|x| x / total).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::all_strings;
    use crate::scenario::{example3_counter_cascade, example3_flipflop_cascade, example4_class, task_alphabet};

    const FLIPFLOP: &str = r#"{
      "alphabet": [{"name": "x", "values": ["blank", "wood", "iron", "fire", "steel", "factory"]}],
      "components": [
        {"name": "wood", "dependencies": [1], "core": "flipflop_wo", "output_fn": {"kind": "state"},
         "input_fn": {"kind": "table", "entries": {"wood": "set"}, "default": "read"}},
        {"name": "iron", "dependencies": [1], "core": "flipflop_wo", "output_fn": {"kind": "state"},
         "input_fn": {"kind": "mono_dnf", "terms": [["x=iron"]], "on_true": "set", "on_false": "read"}},
        {"name": "fire", "dependencies": [1], "core": "flipflop_wo", "output_fn": {"kind": "state"},
         "input_fn": {"kind": "table", "entries": {"fire": "set"}, "default": "read"}},
        {"name": "steel", "dependencies": [1], "core": "flipflop_wo", "output_fn": {"kind": "state"},
         "input_fn": {"kind": "table", "entries": {"steel": "set"}, "default": "read"}},
        {"name": "factory", "dependencies": [1, 2, 3, 4, 5], "core": "flipflop_wo", "output_fn": {"kind": "next_state"},
         "input_fn": {"kind": "mono_dnf", "terms": [["x=factory", "wood", "iron", "fire"], ["x=factory", "steel"]],
                      "on_true": "set", "on_false": "read"}}
      ]
    }"#;

    fn same_behaviour(a: &Cascade, b: &Cascade, letters: usize, len: usize) {
        for w in all_strings(letters, len) {
            assert_eq!(a.run(&w).unwrap(), b.run(&w).unwrap(), "{w:?}");
        }
    }

    #[test]
    fn parses_and_matches_scenario() {
        let spec = CascadeSpec::parse(FLIPFLOP).unwrap();
        let c = spec.build().unwrap();
        assert_eq!(c.run_trace("steel factory").unwrap(), "1");
        same_behaviour(&c, &example3_flipflop_cascade(), 6, 4);
    }

    #[test]
    fn round_trip_preserves_behaviour() {
        for c in [example3_flipflop_cascade(), example3_counter_cascade()] {
            let spec = CascadeSpec::describe(&c).unwrap();
            let again = CascadeSpec::parse(&spec.to_json()).unwrap();
            assert_eq!(spec, again);
            let rebuilt = again.build().unwrap();
            same_behaviour(&c, &rebuilt, 6, 4);
        }
        let parsed = CascadeSpec::parse(FLIPFLOP).unwrap();
        let rebuilt = CascadeSpec::describe(&parsed.build().unwrap()).unwrap();
        assert_eq!(CascadeSpec::parse(&rebuilt.to_json()).unwrap(), rebuilt);
    }

    #[test]
    fn unknown_fields_are_named() {
        let bad = FLIPFLOP.replacen("\"core\": \"flipflop_wo\"", "\"core\": \"flipflop_wo\", \"colour\": 1", 1);
        let err = CascadeSpec::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
        let err = CascadeSpec::parse(&FLIPFLOP.replacen("\"kind\": \"table\"", "\"kind\": \"tabel\"", 1))
            .unwrap_err()
            .to_string();
        assert!(err.contains("tabel"), "{err}");
    }

    #[test]
    fn build_errors_name_the_component() {
        let bad = FLIPFLOP.replace("\"dependencies\": [1, 2, 3, 4, 5]", "\"dependencies\": [1, 7]");
        let err = CascadeSpec::parse(&bad).unwrap().build().unwrap_err();
        assert!(matches!(&err, Error::Component { component, .. } if component == "factory"), "{err}");
        let bad = FLIPFLOP.replacen("\"core\": \"flipflop_wo\"", "\"core\": \"counter:x\"", 1);
        let err = CascadeSpec::parse(&bad).unwrap().build().unwrap_err();
        assert!(matches!(&err, Error::Component { component, .. } if component == "wood"), "{err}");
    }

    #[test]
    fn core_forms() {
        let a = CoreSpec::Named("counter(5)".into()).build().unwrap();
        let b = CoreSpec::Named("counter:5".into()).build().unwrap();
        assert_eq!(a, b);
        let inline: CoreSpec = serde_json::from_str(
            r#"{"letters": ["a", "b"], "states": ["p", "q"], "init": "q", "transitions": [["q", "p"], ["q", "q"]]}"#,
        )
        .unwrap();
        let core = inline.build().unwrap();
        assert_eq!(core.init(), 1);
        assert_eq!(core.next(0, 0), 1);
        assert_eq!(CoreSpec::describe(&core), inline);
        assert_eq!(CoreSpec::describe(&b), CoreSpec::Named("counter:5".into()));
        assert!(serde_json::from_str::<CoreSpec>("3").is_err());
    }

    #[test]
    fn class_round_trip() {
        let class = example4_class(3).unwrap();
        let spec = CascadeClassSpec::describe(&class).unwrap();
        let again = CascadeClassSpec::parse(&spec.to_json()).unwrap();
        assert_eq!(spec, again);
        assert_eq!(again.build().unwrap().cardinality(), class.cardinality());
        let degree: CascadeClassSpec = serde_json::from_str(
            r#"{"alphabet": [{"name": "x", "values": ["a", "b"]}, {"name": "y", "values": ["0", "1"]}],
                "components": [{"name": "c", "dependencies": {"degree": 1}, "input_class": {"kind": "table"},
                                "cores": ["flipflop"], "outputs": [{"kind": "state"}]}]}"#,
        )
        .unwrap();
        // two projections, 3^2 tables each
        assert_eq!(degree.build().unwrap().cardinality(), 18u32.into());
    }

    #[test]
    fn experiment_config() {
        let c = ExperimentConfig::parse(r#"{"seed": 1, "epsilon": 0.1, "eta": 0.1, "max_len": 10, "weights": [1, 1, 2]}"#).unwrap();
        assert_eq!(c.trials, 1);
        assert_eq!(c.normalized_weights(3).unwrap(), vec![0.25, 0.25, 0.5]);
        assert!(c.normalized_weights(6).is_err());
        assert!(ExperimentConfig::parse(r#"{"seed": 1, "epsilon": 1.5, "eta": 0.1, "max_len": 10}"#).is_err());
        assert!(ExperimentConfig::parse(r#"{"seed": 1, "epsilon": 0.1, "eta": 0.1, "max_len": 10, "extra": 0}"#).is_err());
        let _ = task_alphabet();
    }
}
