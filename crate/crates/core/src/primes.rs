//! Prime building blocks: flip-flops and `n`-counters.

use std::fmt;

use crate::automaton::Semiautomaton;
use crate::error::{Error, Result};

pub const SET: &str = "set";
pub const RESET: &str = "reset";
pub const READ: &str = "read";
pub const INC: &str = "inc";

/// Which identity list a core is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimeKind {
    /// Letters `set, reset, read`.
    FlipFlop,
    /// Letters `set, read`; a bit that can be written once.
    WriteOnceFlipFlop,
    /// Letters `inc, read` over states `0..n`.
    Counter(usize),
}

impl fmt::Display for PrimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeKind::FlipFlop => write!(f, "flipflop"),
            PrimeKind::WriteOnceFlipFlop => write!(f, "flipflop_wo"),
            PrimeKind::Counter(n) => write!(f, "counter:{n}"),
        }
    }
}

/// A flip-flop core with states `0` and `1`.
pub fn make_flipflop(with_reset: bool, q_init: usize) -> Result<Semiautomaton> {
    if q_init > 1 {
        return Err(Error::InvalidParameter(format!("flip-flop initial state must be 0 or 1, got {q_init}")));
    }
    let letters: &[&str] = if with_reset { &[SET, RESET, READ] } else { &[SET, READ] };
    Semiautomaton::from_fn(letters.iter().copied(), ["0", "1"], q_init, |q, a| match letters[a] {
        SET => 1,
        RESET => 0,
        _ => q,
    })
}

/// An `n`-counter core with states `0..n`.
pub fn make_counter(n: usize, q_init: usize) -> Result<Semiautomaton> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("a counter needs n ≥ 2, got {n}")));
    }
    if q_init >= n {
        return Err(Error::InvalidParameter(format!("counter initial state {q_init} is not below {n}")));
    }
    Semiautomaton::from_fn([INC, READ], (0..n).map(|i| i.to_string()), q_init, |q, a| {
        if a == 0 {
            (q + 1) % n
        } else {
            q
        }
    })
}

pub fn is_prime_counter(core: &Semiautomaton) -> bool {
    validate_prime_identities(core, PrimeKind::Counter(core.num_states())).is_ok() && is_prime(core.num_states())
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Checks every identity of `kind` on every state.
///
/// The error names the first violated identity, e.g. `δ(3,inc) = 4`.
pub fn validate_prime_identities(core: &Semiautomaton, kind: PrimeKind) -> Result<(), String> {
    let expected_letters: Vec<&str> = match kind {
        PrimeKind::FlipFlop => vec![SET, RESET, READ],
        PrimeKind::WriteOnceFlipFlop => vec![SET, READ],
        PrimeKind::Counter(_) => vec![INC, READ],
    };
    let mut have: Vec<&str> = core.letters().iter().map(String::as_str).collect();
    have.sort_unstable();
    let mut want = expected_letters.clone();
    want.sort_unstable();
    if have != want {
        return Err(format!("letters are {{{}}}, expected {{{}}}", have.join(", "), want.join(", ")));
    }
    let states = match kind {
        PrimeKind::Counter(n) => n,
        _ => 2,
    };
    if core.num_states() != states {
        return Err(format!("{} states, expected {states}", core.num_states()));
    }
    // state positions are the state values
    let value = |name: &str| name.parse::<usize>().ok();
    if let Some(bad) = core.states().iter().enumerate().find(|(i, s)| value(s) != Some(*i)) {
        return Err(format!("state `{}` at position {} should be named {}", bad.1, bad.0, bad.0));
    }
    let letter = |name: &str| core.letter_position(name).expect("letter set checked above");
    for q in 0..states {
        let check = |name: &str, want: usize| -> Result<(), String> {
            let got = core.next(q, letter(name));
            if got == want {
                Ok(())
            } else {
                Err(format!("δ({q},{name}) = {want} violated: got {got}"))
            }
        };
        check(READ, q)?;
        match kind {
            PrimeKind::FlipFlop => {
                check(SET, 1)?;
                check(RESET, 0)?;
            }
            PrimeKind::WriteOnceFlipFlop => check(SET, 1)?,
            PrimeKind::Counter(n) => check(INC, (q + 1) % n)?,
        }
    }
    Ok(())
}
