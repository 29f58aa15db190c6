//! Helpers shared by the integration tests: random cascades and a reference
//! evaluator written directly from the component definitions.
#![allow(dead_code)]

use cascata::alphabet::{Domain, FactoredAlphabet, LetterFn, Projection};
use cascata::automaton::Semiautomaton;
use cascata::cascade::{Cascade, OutputFn};
use cascata::primes::{make_counter, make_flipflop};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub enum Cores {
    /// Primes and random semiautomata with at most three states.
    Any,
    /// Flip-flops only, every component outputting its state.
    SimpleFlipFlops,
    /// One 5-counter somewhere, flip-flops elsewhere.
    WithFiveCounter,
}

pub fn random_external(rng: &mut ChaCha8Rng, max_arity: usize, max_domain: usize) -> FactoredAlphabet {
    let arity = rng.gen_range(1..=max_arity);
    FactoredAlphabet::new(
        (0..arity)
            .map(|i| {
                let size = rng.gen_range(2..=max_domain);
                Domain::new(format!("u{i}"), (0..size).map(|v| format!("v{v}"))).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

fn random_semiautomaton(rng: &mut ChaCha8Rng) -> Semiautomaton {
    let states = rng.gen_range(1..=3);
    let letters = rng.gen_range(2..=3);
    let delta = (0..states * letters).map(|_| rng.gen_range(0..states as u32)).collect();
    Semiautomaton::new(
        (0..letters).map(|a| format!("l{a}")).collect(),
        (0..states).map(|q| format!("s{q}")).collect(),
        delta,
        rng.gen_range(0..states),
    )
    .unwrap()
}

fn random_core(rng: &mut ChaCha8Rng, cores: Cores, counter_here: bool) -> Semiautomaton {
    match cores {
        Cores::Any => match rng.gen_range(0..5) {
            0 => make_flipflop(true, rng.gen_range(0..2)).unwrap(),
            1 => make_flipflop(false, 0).unwrap(),
            2 => make_counter(rng.gen_range(2..=3), 0).unwrap(),
            _ => random_semiautomaton(rng),
        },
        Cores::SimpleFlipFlops => make_flipflop(rng.gen_bool(0.5), 0).unwrap(),
        Cores::WithFiveCounter if counter_here => make_counter(5, 0).unwrap(),
        Cores::WithFiveCounter => make_flipflop(rng.gen_bool(0.5), 0).unwrap(),
    }
}

fn random_output(rng: &mut ChaCha8Rng, name: &str, states: usize, letters: usize, cores: Cores, last: bool) -> OutputFn {
    if !matches!(cores, Cores::Any) {
        // a simple cascade constrains every output but the last
        return if last && rng.gen_bool(0.5) { OutputFn::NextState } else { OutputFn::State };
    }
    match rng.gen_range(0..6) {
        0 | 1 => OutputFn::State,
        2 | 3 => OutputFn::NextState,
        4 => {
            let size = rng.gen_range(2..=3);
            OutputFn::Table {
                outputs: Domain::new(name, (0..size).map(|v| format!("o{v}"))).unwrap(),
                table: (0..states * letters).map(|_| rng.gen_range(0..size as u32)).collect(),
            }
        }
        _ => OutputFn::Constant {
            outputs: Domain::new(name, ["k0", "k1"]).unwrap(),
            value: rng.gen_range(0..2),
        },
    }
}

/// A random cascade with at most `max_depth` components over an external
/// alphabet of arity at most `max_arity` and domains of at most `max_domain` values.
pub fn random_cascade(rng: &mut ChaCha8Rng, max_depth: usize, max_arity: usize, max_domain: usize, cores: Cores) -> Cascade {
    let external = random_external(rng, max_arity, max_domain);
    let depth = rng.gen_range(1..=max_depth);
    let counter_at = rng.gen_range(0..depth);
    let mut builder = Cascade::builder(external);
    for i in 0..depth {
        let name = format!("c{}", i + 1);
        let arity = builder.next_input().arity();
        let mut deps: Vec<usize> = (1..=arity).filter(|_| rng.gen_bool(0.5)).collect();
        if deps.is_empty() {
            deps.push(rng.gen_range(1..=arity));
        }
        let signature = builder
            .next_input()
            .project(&Projection::new(deps.clone(), arity).unwrap())
            .unwrap();
        let core = random_core(rng, cores, i == counter_at);
        let phi = LetterFn::Table(
            (0..signature.size())
                .map(|_| rng.gen_range(0..core.num_letters() as u32))
                .collect(),
        );
        let output = random_output(rng, &name, core.num_states(), signature.size(), cores, i + 1 == depth);
        builder = builder.component(name, deps, phi, core, output).unwrap();
    }
    builder.build().unwrap()
}

/// One step computed from the definitions: every component reads the
/// letter extended by the outputs of the components before it, all outputs
/// use the states before the step. Returns the last output.
pub fn reference_step(cascade: &Cascade, state: &mut [usize], letter: &[u32]) -> usize {
    let mut values = letter.to_vec();
    let mut out = 0;
    for (i, c) in cascade.components().iter().enumerate() {
        let projected: Vec<u32> = c.deps().indices().iter().map(|&j| values[j - 1]).collect();
        let x = c.signature().index_of_values(&projected);
        out = c.theta(state[i], x);
        state[i] = c.core().next(state[i], c.phi(x));
        values.push(out as u32);
    }
    out
}

pub fn letter_values(alphabet: &FactoredAlphabet) -> Vec<Vec<u32>> {
    (0..alphabet.size()).map(|a| alphabet.letter_at(a).values().to_vec()).collect()
}
