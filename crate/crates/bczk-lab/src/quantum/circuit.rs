//! Gate-list circuits and their text format.
//!
//! One gate per line: the gate name followed by its parameters and qubit
//! indices, whitespace-separated. `#` starts a comment. An optional leading
//! `qubits N` line pins the register width (otherwise it is inferred from
//! the highest index used). Gates:
//!
//! ```text
//! h T | x T | z T | ry THETA T | cx C T | cz C T | ccx C1 C2 T
//! swap A B | mcx C1 [C2 ...] T
//! ```

use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::state::StateVector;

pub mod gates {
    use num::complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    pub fn h() -> [[Complex64; 2]; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [[c(s), c(s)], [c(s), c(-s)]]
    }

    pub fn x() -> [[Complex64; 2]; 2] {
        [[c(0.0), c(1.0)], [c(1.0), c(0.0)]]
    }

    pub fn z() -> [[Complex64; 2]; 2] {
        [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]]
    }

    pub fn ry(theta: f64) -> [[Complex64; 2]; 2] {
        let (s, co) = (theta / 2.0).sin_cos();
        [[c(co), c(-s)], [c(s), c(co)]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    Ry(f64, usize),
    Cx(usize, usize),
    Cz(usize, usize),
    Ccx(usize, usize, usize),
    Swap(usize, usize),
    Mcx(Vec<usize>, usize),
}

impl Gate {
    pub fn max_index(&self) -> usize {
        match self {
            Gate::H(t) | Gate::X(t) | Gate::Z(t) | Gate::Ry(_, t) => *t,
            Gate::Cx(c, t) | Gate::Cz(c, t) | Gate::Swap(c, t) => (*c).max(*t),
            Gate::Ccx(a, b, t) => (*a).max(*b).max(*t),
            Gate::Mcx(cs, t) => cs.iter().copied().max().unwrap_or(0).max(*t),
        }
    }

    /// Whether the gate permutes computational basis states.
    pub fn is_classical(&self) -> bool {
        matches!(
            self,
            Gate::X(_) | Gate::Cx(_, _) | Gate::Ccx(_, _, _) | Gate::Swap(_, _) | Gate::Mcx(_, _)
        )
    }

    pub fn to_line(&self) -> String {
        match self {
            Gate::H(t) => format!("h {t}"),
            Gate::X(t) => format!("x {t}"),
            Gate::Z(t) => format!("z {t}"),
            Gate::Ry(a, t) => format!("ry {a} {t}"),
            Gate::Cx(c, t) => format!("cx {c} {t}"),
            Gate::Cz(c, t) => format!("cz {c} {t}"),
            Gate::Ccx(a, b, t) => format!("ccx {a} {b} {t}"),
            Gate::Swap(a, b) => format!("swap {a} {b}"),
            Gate::Mcx(cs, t) => {
                let cs: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
                format!("mcx {} {t}", cs.join(" "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, g: Gate) {
        self.n_qubits = self.n_qubits.max(g.max_index() + 1);
        self.gates.push(g);
    }

    pub fn parse(text: &str) -> Result<Circuit> {
        let mut c = Circuit::new(0);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let name = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            let bad = |msg: &str| {
                Error::Protocol(format!("circuit line {}: {msg}: {raw}", lineno + 1))
            };
            let idx = |s: &str| -> Result<usize> {
                s.parse::<usize>()
                    .map_err(|_| bad("bad qubit index"))
            };
            let gate = match (name, rest.as_slice()) {
                ("qubits", [n]) => {
                    c.n_qubits = c.n_qubits.max(idx(n)?);
                    continue;
                }
                ("h", [t]) => Gate::H(idx(t)?),
                ("x", [t]) => Gate::X(idx(t)?),
                ("z", [t]) => Gate::Z(idx(t)?),
                ("ry", [theta, t]) => Gate::Ry(
                    theta.parse::<f64>().map_err(|_| bad("bad angle"))?,
                    idx(t)?,
                ),
                ("cx", [a, b]) => Gate::Cx(idx(a)?, idx(b)?),
                ("cz", [a, b]) => Gate::Cz(idx(a)?, idx(b)?),
                ("ccx", [a, b, t]) => Gate::Ccx(idx(a)?, idx(b)?, idx(t)?),
                ("swap", [a, b]) => Gate::Swap(idx(a)?, idx(b)?),
                ("mcx", parts) if parts.len() >= 2 => {
                    let controls = parts[..parts.len() - 1]
                        .iter()
                        .map(|s| idx(s))
                        .collect::<Result<Vec<usize>>>()?;
                    Gate::Mcx(controls, idx(parts[parts.len() - 1])?)
                }
                _ => return Err(bad("unknown gate or arity")),
            };
            c.push(gate);
        }
        if c.n_qubits == 0 {
            return Err(Error::Protocol("empty circuit".into()));
        }
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for g in &self.gates {
            out.push_str(&g.to_line());
            out.push('\n');
        }
        out
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.n_qubits() < self.n_qubits {
            return Err(Error::LengthMismatch(format!(
                "circuit needs {} qubits, state has {}",
                self.n_qubits,
                state.n_qubits()
            )));
        }
        for g in &self.gates {
            apply_gate(g, state);
        }
        Ok(())
    }

    /// Inverse circuit: gates reversed, Ry angles negated (all other gates
    /// here are involutions).
    pub fn apply_inverse(&self, state: &mut StateVector) -> Result<()> {
        if state.n_qubits() < self.n_qubits {
            return Err(Error::LengthMismatch(format!(
                "circuit needs {} qubits, state has {}",
                self.n_qubits,
                state.n_qubits()
            )));
        }
        for g in self.gates.iter().rev() {
            match g {
                Gate::Ry(theta, t) => {
                    state.apply_single(&gates::ry(-theta), *t);
                }
                other => apply_gate(other, state),
            }
        }
        Ok(())
    }

    pub fn is_classical(&self) -> bool {
        self.gates.iter().all(Gate::is_classical)
    }

    /// Evaluates a reversible classical circuit on a bit array in place.
    pub fn eval_classical(&self, bits: &mut [bool]) -> Result<()> {
        if bits.len() < self.n_qubits {
            return Err(Error::LengthMismatch(format!(
                "circuit needs {} wires, got {}",
                self.n_qubits,
                bits.len()
            )));
        }
        for g in &self.gates {
            match g {
                Gate::X(t) => bits[*t] = !bits[*t],
                Gate::Cx(c, t) => {
                    if bits[*c] {
                        bits[*t] = !bits[*t];
                    }
                }
                Gate::Ccx(a, b, t) => {
                    if bits[*a] && bits[*b] {
                        bits[*t] = !bits[*t];
                    }
                }
                Gate::Swap(a, b) => bits.swap(*a, *b),
                Gate::Mcx(cs, t) => {
                    if cs.iter().all(|&c| bits[c]) {
                        bits[*t] = !bits[*t];
                    }
                }
                other => {
                    return Err(Error::Protocol(format!(
                        "gate {:?} is not classical",
                        other
                    )))
                }
            }
        }
        Ok(())
    }
}

fn apply_gate(g: &Gate, state: &mut StateVector) {
    match g {
        Gate::H(t) => state.apply_single(&gates::h(), *t),
        Gate::X(t) => state.apply_single(&gates::x(), *t),
        Gate::Z(t) => state.apply_single(&gates::z(), *t),
        Gate::Ry(theta, t) => state.apply_single(&gates::ry(*theta), *t),
        Gate::Cx(c, t) => state.apply_controlled(&gates::x(), *c, *t),
        Gate::Cz(c, t) => state.apply_controlled(&gates::z(), *c, *t),
        Gate::Ccx(a, b, t) => state.apply_mcx(&[*a, *b], *t),
        Gate::Swap(a, b) => state.apply_swap(*a, *b),
        Gate::Mcx(cs, t) => state.apply_mcx(cs, *t),
    }
}

/// Convenience for tests and docs.
pub fn single_qubit_rotation(theta: f64) -> Circuit {
    let mut c = Circuit::new(1);
    c.push(Gate::Ry(theta, 0));
    c
}

#[allow(unused_imports)]
use num::Zero;
#[allow(dead_code)]
fn _complex_type_anchor() -> Complex64 {
    Complex64::zero()
}
