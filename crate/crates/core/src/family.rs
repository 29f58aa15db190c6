//! Enumerable classes of cascades.
//!
//! A class fixes, for every component, the admissible dependency sets, a
//! template for the input-function class `Φ`, a list of cores `Δ` and a list
//! of output functions `Θ`. Members are enumerated in mixed-radix order with
//! the last component varying fastest; within a component the order is
//! dependency set, then input function, then core, then output function.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::alphabet::{BooleanView, ClassKind, Domain, FactoredAlphabet, FiniteFunctionClass, LetterFn, Projection};
use crate::automaton::{FlatAutomaton, Semiautomaton};
use crate::cascade::{Cascade, ComponentAutomaton, FlattenOptions, OutputFn};
use crate::error::{Error, Result};

/// Admissible dependency sets of a component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DepSpec {
    /// One fixed set of 1-based coordinates.
    Fixed(Vec<usize>),
    /// Every subset of the given size, in lexicographic order.
    Degree(usize),
}

/// `Φ` before the projected signature is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PhiTemplate {
    Table,
    /// `terms`-term monotone DNFs over the boolean view, minus the named variables.
    MonoDnf { terms: usize, exclude: Vec<String> },
    Threshold,
    /// A single fixed function.
    Fixed(LetterFn),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentClass {
    pub name: String,
    pub deps: DepSpec,
    pub phi: PhiTemplate,
    pub cores: Vec<Semiautomaton>,
    pub outputs: Vec<OutputFn>,
}

// Per-component data fixed once the alphabets are chained.
#[derive(Debug, Clone)]
struct Prepared {
    input: FactoredAlphabet,
    projections: Vec<Projection>,
    // one entry per projection; None for fixed input functions
    phi_classes: Vec<Option<FiniteFunctionClass>>,
    phi_counts: Vec<BigUint>,
    gamma: Domain,
}

/// `𝒞` as a product of per-component classes.
#[derive(Debug, Clone)]
pub struct CascadeClass {
    external: FactoredAlphabet,
    components: Vec<ComponentClass>,
    prepared: Vec<Prepared>,
}

impl CascadeClass {
    pub fn new(external: FactoredAlphabet, components: Vec<ComponentClass>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidClass("a cascade class needs at least one component".into()));
        }
        let mut input = external.clone();
        let mut prepared = Vec::with_capacity(components.len());
        for c in &components {
            let fail = |reason: String| Error::component(c.name.clone(), reason);
            if c.cores.is_empty() || c.outputs.is_empty() {
                return Err(fail("core and output lists must be non-empty".into()));
            }
            let letters = c.cores[0].letters();
            if c.cores.iter().any(|d| d.letters() != letters) {
                return Err(fail("all cores must share one internal alphabet".into()));
            }
            let pi = Domain::new("pi", letters.iter().cloned())?;
            let projections = match &c.deps {
                DepSpec::Fixed(j) => vec![Projection::new(j.clone(), input.arity()).map_err(|e| fail(e.to_string()))?],
                DepSpec::Degree(m) => Projection::all(input.arity(), *m).map_err(|e| fail(e.to_string()))?,
            };
            let mut phi_classes = Vec::with_capacity(projections.len());
            let mut phi_counts = Vec::with_capacity(projections.len());
            for p in &projections {
                let signature = input.project(p)?;
                let class = match &c.phi {
                    PhiTemplate::Fixed(f) => {
                        f.compile(&signature, pi.len()).map_err(|e| fail(e.to_string()))?;
                        None
                    }
                    PhiTemplate::Table => Some(FiniteFunctionClass::new(ClassKind::Table, signature, pi.clone())?),
                    PhiTemplate::Threshold => Some(FiniteFunctionClass::new(ClassKind::Threshold, signature, pi.clone())?),
                    PhiTemplate::MonoDnf { terms, exclude } => {
                        let view = BooleanView::of(&signature)?;
                        let variables = (0..view.len())
                            .filter(|&v| !exclude.contains(&view.vars()[v].name))
                            .collect();
                        Some(FiniteFunctionClass::new(
                            ClassKind::MonoDnf {
                                terms: *terms,
                                variables: Some(variables),
                            },
                            signature,
                            pi.clone(),
                        )?)
                    }
                };
                phi_counts.push(match &class {
                    Some(k) => k.cardinality()?,
                    None => BigUint::one(),
                });
                phi_classes.push(class);
            }
            // every core/output pair must produce the same output alphabet
            let mut gamma: Option<Domain> = None;
            for core in &c.cores {
                for out in &c.outputs {
                    let probe = ComponentAutomaton::new(
                        c.name.clone(),
                        input.clone(),
                        projections[0].clone(),
                        LetterFn::Table(vec![0; input.project(&projections[0])?.size()]),
                        core.clone(),
                        out.clone(),
                    )?;
                    match &gamma {
                        None => gamma = Some(probe.gamma().clone()),
                        Some(g) if g != probe.gamma() => {
                            return Err(fail("every core and output function must share one output alphabet".into()))
                        }
                        _ => {}
                    }
                }
            }
            let gamma = gamma.expect("non-empty lists");
            let next = input.extend(gamma.clone())?;
            prepared.push(Prepared {
                input,
                projections,
                phi_classes,
                phi_counts,
                gamma,
            });
            input = next;
        }
        Ok(CascadeClass {
            external,
            components,
            prepared,
        })
    }

    pub fn external(&self) -> &FactoredAlphabet {
        &self.external
    }

    pub fn components(&self) -> &[ComponentClass] {
        &self.components
    }

    pub fn depth(&self) -> usize {
        self.components.len()
    }

    /// Input alphabet of component `i` (0-based).
    pub fn component_input(&self, i: usize) -> &FactoredAlphabet {
        &self.prepared[i].input
    }

    /// Output alphabet `Γ` of component `i`.
    pub fn component_gamma(&self, i: usize) -> &Domain {
        &self.prepared[i].gamma
    }

    pub fn projections(&self, i: usize) -> &[Projection] {
        &self.prepared[i].projections
    }

    /// The `Φ` class of component `i` under its `j`-th dependency set; `None` for a fixed function.
    pub fn phi_class(&self, i: usize, j: usize) -> Option<&FiniteFunctionClass> {
        self.prepared[i].phi_classes[j].as_ref()
    }

    /// `|Φ_i|` for dependency set `j`.
    pub fn phi_cardinality(&self, i: usize, j: usize) -> &BigUint {
        &self.prepared[i].phi_counts[j]
    }

    /// Number of members contributed by component `i`.
    pub fn component_cardinality(&self, i: usize) -> BigUint {
        let c = &self.components[i];
        let phi: BigUint = self.prepared[i].phi_counts.iter().sum();
        phi * BigUint::from(c.cores.len()) * BigUint::from(c.outputs.len())
    }

    /// Number of members, counted syntactically (distinct members may implement the same function).
    pub fn cardinality(&self) -> BigUint {
        (0..self.depth()).map(|i| self.component_cardinality(i)).product()
    }

    /// Member lists per component, enumerated once.
    pub fn enumerate_components(&self, cap: u64) -> Result<Vec<Vec<ComponentAutomaton>>> {
        let total = self.cardinality();
        if total > BigUint::from(cap) {
            return Err(Error::cap("cascade class enumeration", &total, cap));
        }
        let mut out = Vec::with_capacity(self.depth());
        for (i, c) in self.components.iter().enumerate() {
            let p = &self.prepared[i];
            let mut list = Vec::new();
            for (j, proj) in p.projections.iter().enumerate() {
                let phis: Vec<LetterFn> = match (&p.phi_classes[j], &c.phi) {
                    (Some(k), _) => k.enumerate(cap)?,
                    (None, PhiTemplate::Fixed(f)) => vec![f.clone()],
                    (None, _) => unreachable!("only fixed templates have no class"),
                };
                for phi in phis {
                    for core in &c.cores {
                        for out in &c.outputs {
                            list.push(ComponentAutomaton::new(
                                c.name.clone(),
                                p.input.clone(),
                                proj.clone(),
                                phi.clone(),
                                core.clone(),
                                out.clone(),
                            )?);
                        }
                    }
                }
            }
            out.push(list);
        }
        Ok(out)
    }

    /// Every member, in canonical order.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<Cascade>> {
        let lists = self.enumerate_components(cap)?;
        let total = self.cardinality().to_usize().unwrap_or(usize::MAX);
        let mut members = Vec::with_capacity(total);
        let mut digits = vec![0usize; lists.len()];
        if lists.iter().any(Vec::is_empty) {
            return Ok(members);
        }
        loop {
            let comps = digits.iter().zip(&lists).map(|(&d, l)| l[d].clone()).collect();
            members.push(Cascade::new(self.external.clone(), comps)?);
            // last component fastest
            let mut pos = lists.len();
            loop {
                if pos == 0 {
                    return Ok(members);
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < lists[pos].len() {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }

    /// Every member flattened (reachable part only).
    pub fn enumerate_flat(&self, cap: u64, product_cap: u64) -> Result<Vec<FlatAutomaton>> {
        self.enumerate(cap)?
            .iter()
            .map(|c| {
                c.flatten(FlattenOptions {
                    reachable_only: true,
                    cap: product_cap,
                })
            })
            .collect()
    }

    /// Builds the member with the given per-component input functions.
    ///
    /// `parts[i]` is `(dependency set, input function, core index, output index)`.
    pub fn build(&self, parts: &[(Vec<usize>, LetterFn, usize, usize)]) -> Result<Cascade> {
        if parts.len() != self.depth() {
            return Err(Error::ArityMismatch {
                expected: self.depth(),
                actual: parts.len(),
            });
        }
        let mut comps = Vec::with_capacity(parts.len());
        for (i, (deps, phi, core, out)) in parts.iter().enumerate() {
            let c = &self.components[i];
            let p = &self.prepared[i];
            let proj = Projection::new(deps.clone(), p.input.arity())?;
            let core = c.cores.get(*core).ok_or_else(|| Error::component(c.name.clone(), "core index out of range"))?;
            let out = c.outputs.get(*out).ok_or_else(|| Error::component(c.name.clone(), "output index out of range"))?;
            comps.push(ComponentAutomaton::new(c.name.clone(), p.input.clone(), proj, phi.clone(), core.clone(), out.clone())?);
        }
        let cascade = Cascade::new(self.external.clone(), comps)?;
        if !self.contains(&cascade) {
            return Err(Error::InvalidClass("the requested parts are not members of the class".into()));
        }
        Ok(cascade)
    }

    /// Syntactic membership: each component uses an admissible dependency
    /// set, input function, core and output function.
    pub fn contains(&self, cascade: &Cascade) -> bool {
        if cascade.external() != &self.external || cascade.depth() != self.depth() {
            return false;
        }
        cascade.components().iter().enumerate().all(|(i, comp)| {
            let c = &self.components[i];
            let p = &self.prepared[i];
            let Some(j) = p.projections.iter().position(|q| q == comp.deps()) else {
                return false;
            };
            let phi_ok = match (&p.phi_classes[j], &c.phi) {
                (Some(k), _) => k.contains(comp.phi_fn()),
                (None, PhiTemplate::Fixed(f)) => f == comp.phi_fn(),
                _ => false,
            };
            phi_ok && c.cores.contains(comp.core()) && c.outputs.contains(comp.output_fn()) && comp.gamma() == &p.gamma
        })
    }
}

/// Exact count as `u64`, when it fits.
pub fn count_u64(n: &BigUint) -> Option<u64> {
    if n.is_zero() {
        return Some(0);
    }
    n.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::make_flipflop;
    use std::collections::HashSet;

    fn toy() -> CascadeClass {
        let x = FactoredAlphabet::flat("x", ["a", "b"]).unwrap();
        CascadeClass::new(
            x,
            vec![
                ComponentClass {
                    name: "c1".into(),
                    deps: DepSpec::Fixed(vec![1]),
                    phi: PhiTemplate::Table,
                    cores: vec![make_flipflop(false, 0).unwrap()],
                    outputs: vec![OutputFn::State],
                },
                ComponentClass {
                    name: "c2".into(),
                    deps: DepSpec::Degree(1),
                    phi: PhiTemplate::MonoDnf {
                        terms: 1,
                        exclude: vec!["x=a".into()],
                    },
                    cores: vec![make_flipflop(false, 0).unwrap()],
                    outputs: vec![OutputFn::State, OutputFn::NextState],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn counts_match_enumeration() {
        let c = toy();
        // c1: 4 tables; c2: J={1} gives 2 DNFs over {x=b}, J={2} gives 2 over {c1}; 2 outputs
        assert_eq!(c.component_cardinality(0), BigUint::from(4u32));
        assert_eq!(c.component_cardinality(1), BigUint::from(8u32));
        let members = c.enumerate(1000).unwrap();
        assert_eq!(members.len(), 32);
        assert!(members.iter().all(|m| c.contains(m)));
        let distinct: HashSet<String> = members.iter().map(|m| format!("{m:?}")).collect();
        assert_eq!(distinct.len(), 32);
        assert!(c.enumerate(31).unwrap_err().is_cap());
    }

    #[test]
    fn enumeration_is_deterministic() {
        let c = toy();
        assert_eq!(c.enumerate(1000).unwrap(), c.enumerate(1000).unwrap());
    }

    #[test]
    fn build_checks_membership() {
        let c = toy();
        let ok = c.build(&[
            (vec![1], LetterFn::Table(vec![0, 1]), 0, 0),
            (vec![2], LetterFn::MonoDnf { terms: vec![vec![0]], on_true: 0, on_false: 1 }, 0, 1),
        ]);
        assert!(ok.is_ok());
        // x=a is excluded
        let bad = c.build(&[
            (vec![1], LetterFn::Table(vec![0, 1]), 0, 0),
            (vec![1], LetterFn::MonoDnf { terms: vec![vec![0]], on_true: 0, on_false: 1 }, 0, 0),
        ]);
        assert!(bad.is_err());
    }

    #[test]
    fn mismatched_output_alphabets_are_rejected() {
        let x = FactoredAlphabet::flat("x", ["a", "b"]).unwrap();
        let err = CascadeClass::new(
            x,
            vec![ComponentClass {
                name: "c".into(),
                deps: DepSpec::Fixed(vec![1]),
                phi: PhiTemplate::Table,
                cores: vec![make_flipflop(false, 0).unwrap()],
                outputs: vec![
                    OutputFn::State,
                    OutputFn::Constant {
                        outputs: Domain::boolean("k"),
                        value: 0,
                    },
                ],
            }],
        );
        assert!(err.is_err());
    }
}
