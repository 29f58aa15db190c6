//! Component automata and cascades.

use std::collections::HashMap;

use crate::alphabet::{Domain, FactoredAlphabet, Letter, LetterFn, Projection};
use crate::automaton::{FlatAutomaton, Semiautomaton};
use crate::error::{Error, Result};

/// The output function `θ` of a component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputFn {
    /// `θ(q, x) = q`; the output alphabet is the state set.
    State,
    /// `θ(q, x) = δ(q, φ(x))`, the state the component moves to.
    NextState,
    /// A fixed output.
    Constant { outputs: Domain, value: u32 },
    /// Explicit outputs indexed by `q * |projected letters| + x`.
    Table { outputs: Domain, table: Vec<u32> },
}

/// `⟨X^a, J, Π, φ, Q, δ, q_init, Γ, θ⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentAutomaton {
    name: String,
    input: FactoredAlphabet,
    deps: Projection,
    signature: FactoredAlphabet,
    // (coordinate, stride) pairs computing the projected letter index
    strides: Vec<(usize, usize)>,
    phi_fn: LetterFn,
    phi: Vec<u32>,
    core: Semiautomaton,
    output_fn: OutputFn,
    gamma: Domain,
    theta: Vec<u32>,
}

impl ComponentAutomaton {
    pub fn new(
        name: impl Into<String>,
        input: FactoredAlphabet,
        deps: Projection,
        phi: LetterFn,
        core: Semiautomaton,
        output_fn: OutputFn,
    ) -> Result<Self> {
        let name = name.into();
        let fail = |reason: String| Error::component(name.clone(), reason);
        if deps.source_arity() != input.arity() {
            return Err(fail(format!(
                "dependency set is over arity {}, input alphabet has arity {}",
                deps.source_arity(),
                input.arity()
            )));
        }
        let signature = input.project(&deps).map_err(|e| fail(e.to_string()))?;
        let mut strides = Vec::with_capacity(deps.degree());
        let mut stride = 1;
        for &j in deps.indices().iter().rev() {
            strides.push((j - 1, stride));
            stride *= input.coord(j - 1).len();
        }
        strides.reverse();
        let compiled = phi
            .compile(&signature, core.num_letters())
            .map_err(|e| fail(format!("input function: {e}")))?;
        let k = signature.size();
        let n = core.num_states();
        let state_domain = || Domain {
            name: name.clone(),
            values: core.states().to_vec(),
        };
        let (gamma, theta) = match &output_fn {
            OutputFn::State => (state_domain(), (0..n).flat_map(|q| std::iter::repeat_n(q as u32, k)).collect()),
            OutputFn::NextState => (
                state_domain(),
                (0..n)
                    .flat_map(|q| compiled.iter().map(move |&a| (q, a)))
                    .map(|(q, a)| core.next(q, a as usize) as u32)
                    .collect(),
            ),
            OutputFn::Constant { outputs, value } => {
                outputs.validate().map_err(|e| fail(e.to_string()))?;
                if *value as usize >= outputs.len() {
                    return Err(fail("constant output outside the output alphabet".into()));
                }
                (outputs.clone(), vec![*value; n * k])
            }
            OutputFn::Table { outputs, table } => {
                outputs.validate().map_err(|e| fail(e.to_string()))?;
                if table.len() != n * k {
                    return Err(fail(format!("output table has {} entries, expected {}", table.len(), n * k)));
                }
                if table.iter().any(|&o| o as usize >= outputs.len()) {
                    return Err(fail("output table leaves the output alphabet".into()));
                }
                (outputs.clone(), table.clone())
            }
        };
        Ok(ComponentAutomaton {
            name,
            input,
            deps,
            signature,
            strides,
            phi_fn: phi,
            phi: compiled,
            core,
            output_fn,
            gamma,
            theta,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input(&self) -> &FactoredAlphabet {
        &self.input
    }

    pub fn deps(&self) -> &Projection {
        &self.deps
    }

    /// The projected alphabet `π_J(X^a)` read by `φ` and `θ`.
    pub fn signature(&self) -> &FactoredAlphabet {
        &self.signature
    }

    pub fn phi_fn(&self) -> &LetterFn {
        &self.phi_fn
    }

    /// `φ` as a table over projected letter indices.
    pub fn phi_table(&self) -> &[u32] {
        &self.phi
    }

    pub fn core(&self) -> &Semiautomaton {
        &self.core
    }

    pub fn output_fn(&self) -> &OutputFn {
        &self.output_fn
    }

    /// The output alphabet `Γ`.
    pub fn gamma(&self) -> &Domain {
        &self.gamma
    }

    #[inline]
    pub fn project_values(&self, values: &[u32]) -> usize {
        self.strides.iter().map(|&(c, s)| values[c] as usize * s).sum()
    }

    /// `φ(x)` for a projected letter index.
    #[inline]
    pub fn phi(&self, x: usize) -> usize {
        self.phi[x] as usize
    }

    /// `θ(q, x)` for a projected letter index.
    #[inline]
    pub fn theta(&self, q: usize, x: usize) -> usize {
        self.theta[q * self.signature.size() + x] as usize
    }

    /// One step on a full input letter: `(δ(q, φ(π_J(σ))), θ(q, π_J(σ)))`.
    #[inline]
    pub fn step_values(&self, q: usize, values: &[u32]) -> (usize, usize) {
        let x = self.project_values(values);
        (self.core.next(q, self.phi(x)), self.theta(q, x))
    }

    /// The induced automaton over the full input alphabet.
    pub fn induce(&self) -> FlatAutomaton {
        let values: Vec<Letter> = self.input.letters().collect();
        FlatAutomaton::from_fn(
            self.input.clone(),
            self.core.states().to_vec(),
            self.core.init(),
            self.gamma.values.clone(),
            |q, a| self.step_values(q, &values[a].0).0,
            |q, a| self.step_values(q, &values[a].0).1,
        )
        .expect("component tables are total")
    }

    /// True when `θ(q, x) = q` for every state and projected letter.
    pub fn outputs_state(&self) -> bool {
        (0..self.core.num_states()).all(|q| {
            (0..self.signature.size()).all(|x| self.gamma.values[self.theta(q, x)] == self.core.states()[q])
        })
    }

    /// The same component reading a different input alphabet of equal shape.
    fn rebase(&self, input: FactoredAlphabet) -> Result<Self> {
        Self::new(
            self.name.clone(),
            input,
            self.deps.clone(),
            self.phi_fn.clone(),
            self.core.clone(),
            self.output_fn.clone(),
        )
    }
}

/// `A_1 ⋉ … ⋉ A_d`; component `i` reads the external letter and the outputs of components before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cascade {
    external: FactoredAlphabet,
    components: Vec<ComponentAutomaton>,
}

/// Result of one cascade step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub state: Vec<usize>,
    /// The final component's output.
    pub output: usize,
    /// Every component's output, computed from the states before the step.
    pub outputs: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlattenOptions {
    /// Keep only states reachable from the initial tuple.
    pub reachable_only: bool,
    /// Maximum number of product states.
    pub cap: u64,
}

impl Default for FlattenOptions {
    fn default() -> Self {
        FlattenOptions {
            reachable_only: true,
            cap: crate::Caps::default().product_states,
        }
    }
}

impl Cascade {
    /// Checks that every component's input alphabet is the external alphabet
    /// followed by the output alphabets of the earlier components.
    pub fn new(external: FactoredAlphabet, components: Vec<ComponentAutomaton>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("a cascade needs at least one component".into()));
        }
        let mut expected = external.clone();
        for c in &components {
            if c.input() != &expected {
                return Err(Error::component(
                    c.name(),
                    format!(
                        "input alphabet has arity {}, expected the {}-ary chained alphabet {}",
                        c.input().arity(),
                        expected.arity(),
                        expected
                    ),
                ));
            }
            expected = expected.extend(c.gamma().clone()).map_err(|e| Error::component(c.name(), e.to_string()))?;
        }
        Ok(Cascade { external, components })
    }

    pub fn builder(external: FactoredAlphabet) -> CascadeBuilder {
        CascadeBuilder {
            current: external.clone(),
            external,
            components: Vec::new(),
        }
    }

    pub fn external(&self) -> &FactoredAlphabet {
        &self.external
    }

    pub fn components(&self) -> &[ComponentAutomaton] {
        &self.components
    }

    pub fn depth(&self) -> usize {
        self.components.len()
    }

    /// The output alphabet of the cascade.
    pub fn gamma(&self) -> &Domain {
        self.components.last().expect("non-empty").gamma()
    }

    pub fn initial_state(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.core().init()).collect()
    }

    /// Number of product states `∏|Q_i|`, saturating.
    pub fn product_size(&self) -> u64 {
        self.components
            .iter()
            .fold(1u64, |acc, c| acc.saturating_mul(c.core().num_states() as u64))
    }

    /// Steps in place. `values` holds the external letter on entry and the
    /// full letter `σ_{d+1}` on exit. Returns the final output.
    #[inline]
    pub fn step_in_place(&self, state: &mut [usize], values: &mut Vec<u32>) -> usize {
        let mut out = 0;
        for (i, c) in self.components.iter().enumerate() {
            let (next, o) = c.step_values(state[i], values);
            state[i] = next;
            values.push(o as u32);
            out = o;
        }
        out
    }

    pub fn step(&self, state: &[usize], letter: &Letter) -> Result<Step> {
        self.external.check(letter)?;
        if state.len() != self.depth() {
            return Err(Error::ArityMismatch {
                expected: self.depth(),
                actual: state.len(),
            });
        }
        for (c, &q) in self.components.iter().zip(state) {
            if q >= c.core().num_states() {
                return Err(Error::component(c.name(), format!("state {q} out of range")));
            }
        }
        let mut next = state.to_vec();
        let mut values = letter.0.clone();
        let output = self.step_in_place(&mut next, &mut values);
        Ok(Step {
            state: next,
            output,
            outputs: values[self.external.arity()..].iter().map(|&v| v as usize).collect(),
        })
    }

    /// Output on a non-empty string of external letter indices.
    pub fn run(&self, word: &[usize]) -> Result<usize> {
        if word.is_empty() {
            return Err(Error::EmptyString);
        }
        if let Some(pos) = word.iter().position(|&a| a >= self.external.size()) {
            return Err(Error::UnknownLetter {
                letter: format!("#{}", word[pos]),
                position: pos,
            });
        }
        let mut state = self.initial_state();
        let mut values = Vec::with_capacity(self.external.arity() + self.depth());
        let mut out = 0;
        for &a in word {
            values.clear();
            values.extend(self.external.letter_at(a).0);
            out = self.step_in_place(&mut state, &mut values);
        }
        Ok(out)
    }

    /// [`Cascade::run`] on a whitespace-separated trace, returning the output name.
    pub fn run_trace(&self, trace: &str) -> Result<String> {
        let word = self.external.parse_word(trace)?;
        Ok(self.gamma().values[self.run(&word)?].clone())
    }

    /// The product automaton over the external alphabet.
    pub fn flatten(&self, options: FlattenOptions) -> Result<FlatAutomaton> {
        let k = self.external.size();
        let letters: Vec<Letter> = self.external.letters().collect();
        let product = self.product_size();
        if !options.reachable_only && product > options.cap {
            return Err(Error::cap("product automaton", product, options.cap));
        }
        let radices: Vec<usize> = self.components.iter().map(|c| c.core().num_states()).collect();
        let mut tuples: Vec<Vec<usize>> = Vec::new();
        let mut delta: Vec<u32> = Vec::new();
        let mut theta: Vec<u32> = Vec::new();
        let mut values = Vec::with_capacity(self.external.arity() + self.depth());

        let successor = |tuple: &[usize], a: usize, values: &mut Vec<u32>| {
            let mut next = tuple.to_vec();
            values.clear();
            values.extend_from_slice(&letters[a].0);
            let out = self.step_in_place(&mut next, values);
            (next, out)
        };

        let init;
        if options.reachable_only {
            let mut id: HashMap<Vec<usize>, u32> = HashMap::new();
            let start = self.initial_state();
            id.insert(start.clone(), 0);
            tuples.push(start);
            init = 0;
            let mut head = 0;
            while head < tuples.len() {
                for a in 0..k {
                    let (next, out) = successor(&tuples[head], a, &mut values);
                    let fresh = id.len() as u32;
                    let target = *id.entry(next.clone()).or_insert(fresh);
                    if target == fresh {
                        if tuples.len() as u64 >= options.cap {
                            return Err(Error::cap("reachable product automaton", format!("more than {}", tuples.len()), options.cap));
                        }
                        tuples.push(next);
                    }
                    delta.push(target);
                    theta.push(out as u32);
                }
                head += 1;
            }
        } else {
            let encode = |t: &[usize]| t.iter().zip(&radices).fold(0usize, |acc, (q, r)| acc * r + q);
            for mut i in 0..product as usize {
                let mut t = vec![0; radices.len()];
                for (slot, r) in t.iter_mut().zip(&radices).rev() {
                    *slot = i % r;
                    i /= r;
                }
                tuples.push(t);
            }
            for t in &tuples {
                for a in 0..k {
                    let (next, out) = successor(t, a, &mut values);
                    delta.push(encode(&next) as u32);
                    theta.push(out as u32);
                }
            }
            init = encode(&self.initial_state()) as u32;
        }
        let names = tuples
            .iter()
            .map(|t| {
                let parts: Vec<&str> = t
                    .iter()
                    .zip(&self.components)
                    .map(|(&q, c)| c.core().states()[q].as_str())
                    .collect();
                format!("({})", parts.join(","))
            })
            .collect();
        FlatAutomaton::new(
            self.external.clone(),
            names,
            delta,
            init as usize,
            self.gamma().values.clone(),
            theta,
        )
    }

    /// Every non-final component outputs its current state.
    pub fn is_simple(&self) -> bool {
        self.components[..self.depth() - 1].iter().all(ComponentAutomaton::outputs_state)
    }

    /// The same cascade over a renamed external alphabet of identical shape.
    pub fn with_external(&self, external: FactoredAlphabet) -> Result<Self> {
        let mut b = Cascade::builder(external);
        for c in &self.components {
            let input = b.current.clone();
            let rebuilt = c.rebase(input)?;
            b.current = b.current.extend(rebuilt.gamma().clone())?;
            b.components.push(rebuilt);
        }
        b.build()
    }
}

/// Adds components one at a time, chaining input alphabets.
#[derive(Debug, Clone)]
pub struct CascadeBuilder {
    external: FactoredAlphabet,
    current: FactoredAlphabet,
    components: Vec<ComponentAutomaton>,
}

impl CascadeBuilder {
    /// The input alphabet the next component will read.
    pub fn next_input(&self) -> &FactoredAlphabet {
        &self.current
    }

    /// Adds a component reading the 1-based coordinates `deps`.
    pub fn component(
        mut self,
        name: impl Into<String>,
        deps: Vec<usize>,
        phi: LetterFn,
        core: Semiautomaton,
        output: OutputFn,
    ) -> Result<Self> {
        let name = name.into();
        let deps = Projection::new(deps, self.current.arity()).map_err(|e| Error::component(name.clone(), e.to_string()))?;
        let c = ComponentAutomaton::new(name.clone(), self.current.clone(), deps, phi, core, output)?;
        self.current = self
            .current
            .extend(c.gamma().clone())
            .map_err(|e| Error::component(name, e.to_string()))?;
        self.components.push(c);
        Ok(self)
    }

    pub fn build(self) -> Result<Cascade> {
        Cascade::new(self.external, self.components)
    }
}
