//! Trellis space-time codes loaded from a line-oriented code-definition file.
//!
//! ```text
//! # comment
//! trellis <n_states> <bits_per_step> <lt> <constellation>
//! <state> <input-bits> <next_state> <idx_antenna1> ... <idx_antenna_lt>
//! ```

use num_complex::Complex64;

use super::{CodeError, CodewordMatrix};
use crate::mathcore::{ComplexMatrix, Constellation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub next_state: usize,
    /// Offset into the code's output table.
    outputs_at: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrellisCode {
    n_states: usize,
    bits_per_step: usize,
    lt: usize,
    constellation: Constellation,
    transitions: Vec<Transition>,
    outputs: Vec<usize>,
    /// Length of the fixed tail that returns any state to state 0.
    termination_len: usize,
    /// Per-state tail inputs, each `termination_len` long.
    termination_inputs: Vec<Vec<usize>>,
}

impl TrellisCode {
    /// Builds and validates a code from a dense `(state, input) → (next, outputs)` table.
    pub fn from_table(
        n_states: usize,
        bits_per_step: usize,
        lt: usize,
        constellation: Constellation,
        table: &[(usize, Vec<usize>)],
    ) -> Result<Self, CodeError> {
        if n_states == 0 || lt == 0 || bits_per_step == 0 || bits_per_step > 16 {
            return Err(CodeError::Validation(
                "n_states, bits_per_step and lt must be positive (bits_per_step ≤ 16)".into(),
            ));
        }
        let n_inputs = 1usize << bits_per_step;
        if table.len() != n_states * n_inputs {
            return Err(CodeError::Validation(format!(
                "expected {} transitions, found {}",
                n_states * n_inputs,
                table.len()
            )));
        }
        let mut transitions = Vec::with_capacity(table.len());
        let mut outputs = Vec::with_capacity(table.len() * lt);
        for (idx, (next, outs)) in table.iter().enumerate() {
            if *next >= n_states {
                return Err(CodeError::Validation(format!(
                    "transition {idx}: next state {next} ≥ n_states {n_states}"
                )));
            }
            if outs.len() != lt {
                return Err(CodeError::Validation(format!(
                    "transition {idx}: {} outputs for {lt} antennas",
                    outs.len()
                )));
            }
            if let Some(bad) = outs.iter().find(|&&o| o >= constellation.size()) {
                return Err(CodeError::Validation(format!(
                    "transition {idx}: point index {bad} outside {} (size {})",
                    constellation.name(),
                    constellation.size()
                )));
            }
            transitions.push(Transition {
                next_state: *next,
                outputs_at: outputs.len(),
            });
            outputs.extend_from_slice(outs);
        }
        let mut code = Self {
            n_states,
            bits_per_step,
            lt,
            constellation,
            transitions,
            outputs,
            termination_len: 0,
            termination_inputs: Vec::new(),
        };
        code.compute_termination()?;
        Ok(code)
    }

    /// Smallest tail length `T` such that every state can reach state 0 in
    /// exactly `T` steps; each state's tail is the lexicographically smallest
    /// input sequence doing so.
    fn compute_termination(&mut self) -> Result<(), CodeError> {
        let n = self.n_states;
        let mut reach: Vec<Vec<bool>> = vec![(0..n).map(|s| s == 0).collect()];
        let limit = 2 * n + 1;
        loop {
            let last = reach.last().expect("non-empty");
            if last.iter().all(|&r| r) {
                break;
            }
            if reach.len() > limit {
                return Err(CodeError::Validation(
                    "code cannot be driven back to state 0 from every state".into(),
                ));
            }
            let next: Vec<bool> = (0..n)
                .map(|s| (0..self.n_inputs()).any(|u| last[self.next_state(s, u)]))
                .collect();
            reach.push(next);
        }
        let t = reach.len() - 1;
        self.termination_len = t;
        self.termination_inputs = (0..n)
            .map(|start| {
                let mut state = start;
                (0..t)
                    .map(|j| {
                        let remaining = t - j - 1;
                        let u = (0..self.n_inputs())
                            .find(|&u| reach[remaining][self.next_state(state, u)])
                            .expect("reachability table guarantees a path");
                        state = self.next_state(state, u);
                        u
                    })
                    .collect()
            })
            .collect();
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_inputs(&self) -> usize {
        1 << self.bits_per_step
    }

    pub fn bits_per_step(&self) -> usize {
        self.bits_per_step
    }

    pub fn lt(&self) -> usize {
        self.lt
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn termination_len(&self) -> usize {
        self.termination_len
    }

    pub fn termination_inputs(&self, state: usize) -> &[usize] {
        &self.termination_inputs[state]
    }

    pub fn transition(&self, state: usize, input: usize) -> Transition {
        self.transitions[state * self.n_inputs() + input]
    }

    pub fn next_state(&self, state: usize, input: usize) -> usize {
        self.transition(state, input).next_state
    }

    /// Per-antenna point indices emitted on `(state, input)`.
    pub fn output_indices(&self, state: usize, input: usize) -> &[usize] {
        let at = self.transition(state, input).outputs_at;
        &self.outputs[at..at + self.lt]
    }

    /// Transmitted column for `(state, input)`, scaled by 1/√lt.
    pub fn output_symbols(&self, state: usize, input: usize) -> Vec<Complex64> {
        let scale = 1.0 / (self.lt as f64).sqrt();
        self.output_indices(state, input)
            .iter()
            .map(|&i| self.constellation.point(i) * scale)
            .collect()
    }

    /// Channel uses occupied by a frame carrying `steps` data steps.
    pub fn frame_uses(&self, steps: usize) -> usize {
        steps + self.termination_len
    }

    /// Total transition count.
    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }
}

/// Parses and validates a code-definition document.
pub fn load_trellis(text: &str) -> Result<TrellisCode, CodeError> {
    let mut header: Option<(usize, usize, usize, Constellation)> = None;
    let mut table: Vec<Option<(usize, Vec<usize>)>> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let parse_err = |message: String| CodeError::Parse { line, message };
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(format!("expected a non-negative integer, found `{s}`")))
        };

        match &header {
            None => {
                if fields[0] != "trellis" || fields.len() != 5 {
                    return Err(parse_err(
                        "expected header `trellis <n_states> <bits_per_step> <lt> <constellation>`"
                            .into(),
                    ));
                }
                let n_states = num(fields[1])?;
                let bits = num(fields[2])?;
                let lt = num(fields[3])?;
                let constellation = fields[4]
                    .parse()
                    .map(Constellation::new)
                    .map_err(|e| parse_err(format!("{e}")))?;
                if n_states == 0 || bits == 0 || bits > 16 || lt == 0 {
                    return Err(parse_err("header counts must be positive (bits ≤ 16)".into()));
                }
                table = vec![None; n_states << bits];
                header = Some((n_states, bits, lt, constellation));
            }
            Some((n_states, bits, lt, _)) => {
                if fields.len() != 3 + lt {
                    return Err(parse_err(format!(
                        "expected {} fields (state, input, next, {lt} outputs), found {}",
                        3 + lt,
                        fields.len()
                    )));
                }
                let state = num(fields[0])?;
                let input_str = fields[1];
                if input_str.len() != *bits || !input_str.chars().all(|ch| ch == '0' || ch == '1') {
                    return Err(parse_err(format!(
                        "input `{input_str}` is not a {bits}-bit binary pattern"
                    )));
                }
                let input = usize::from_str_radix(input_str, 2).expect("validated binary");
                let next = num(fields[2])?;
                let outs = fields[3..].iter().map(|s| num(s)).collect::<Result<Vec<_>, _>>()?;
                if state >= *n_states {
                    return Err(CodeError::Validation(format!(
                        "line {line}: state {state} ≥ n_states {n_states}"
                    )));
                }
                let slot = &mut table[(state << bits) | input];
                if slot.is_some() {
                    return Err(CodeError::Validation(format!(
                        "line {line}: duplicate transition for state {state}, input {input_str}"
                    )));
                }
                *slot = Some((next, outs));
            }
        }
    }

    let (n_states, bits, lt, constellation) = header.ok_or(CodeError::Parse {
        line: text.lines().count().max(1),
        message: "missing `trellis` header".into(),
    })?;
    if let Some(missing) = table.iter().position(Option::is_none) {
        return Err(CodeError::Validation(format!(
            "missing transition for state {}, input {:0width$b}",
            missing >> bits,
            missing & ((1 << bits) - 1),
            width = bits
        )));
    }
    let table: Vec<(usize, Vec<usize>)> = table.into_iter().map(|t| t.expect("checked")).collect();
    TrellisCode::from_table(n_states, bits, lt, constellation, &table)
}

/// Encodes `bits` and appends the tail back to state 0.
pub fn encode_trellis(bits: &[u8], code: &TrellisCode) -> Result<CodewordMatrix, CodeError> {
    let k = code.bits_per_step();
    if bits.len() % k != 0 {
        return Err(CodeError::LengthMismatch {
            what: "trellis input bits",
            multiple_of: k,
            got: bits.len(),
        });
    }
    let inputs: Vec<usize> = bits
        .chunks(k)
        .map(|c| c.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b & 1)))
        .collect();
    Ok(encode_inputs(&inputs, code).0)
}

/// Encodes data input patterns and appends the tail. Returns the codeword and final state.
pub(crate) fn encode_inputs(inputs: &[usize], code: &TrellisCode) -> (CodewordMatrix, usize) {
    let mut x = ComplexMatrix::zeros(code.lt(), code.frame_uses(inputs.len()));
    let mut state = 0;
    let tail = |s: usize| code.termination_inputs(s).to_vec();
    let mut col = 0;
    for &u in inputs {
        x.set_column(col, &code.output_symbols(state, u));
        state = code.next_state(state, u);
        col += 1;
    }
    for u in tail(state) {
        x.set_column(col, &code.output_symbols(state, u));
        state = code.next_state(state, u);
        col += 1;
    }
    (x, state)
}

/// The 4-state QPSK delay-diversity code for two antennas: antenna 1 sends the
/// current symbol, antenna 2 the previous one.
pub const DELAY_DIVERSITY_4STATE: &str = include_str!("../../codes/delay_diversity_4state.trellis");
