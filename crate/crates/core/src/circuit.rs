//! Reversible circuits over a classical bit register.
//!
//! The gate set is NOT / CNOT / Toffoli. Circuits here serve as an
//! independent oracle for the encoded-permutation families: an adder circuit
//! acting on the packed bit layout must agree pointwise with the family's
//! encoded permutation. Simulation is basis-state only; coset values that a
//! quantum circuit would hold in superposition are enumerated classically by
//! the callers.

use std::fmt::Write as _;
use std::ops::Range;

use crate::aep::Decoded;
use crate::error::{domain, Result};
use crate::rep::{make_multi_runway_aep, LayoutParams};

/// A reversible gate. All indices address bits of one register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Not { target: usize },
    Cnot { control: usize, target: usize },
    Toffoli { control0: usize, control1: usize, target: usize },
}

impl Gate {
    fn indices(&self) -> [Option<usize>; 3] {
        match *self {
            Gate::Not { target } => [Some(target), None, None],
            Gate::Cnot { control, target } => [Some(control), Some(target), None],
            Gate::Toffoli { control0, control1, target } => {
                [Some(control0), Some(control1), Some(target)]
            }
        }
    }

    fn validate(&self, num_bits: usize) -> Result<()> {
        let idx: Vec<usize> = self.indices().iter().flatten().copied().collect();
        for &i in &idx {
            if i >= num_bits {
                return Err(domain(format!("gate index {i} out of range [0, {num_bits})")));
            }
        }
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                if idx[a] == idx[b] {
                    return Err(domain(format!("gate touches bit {} twice", idx[a])));
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn apply(&self, bits: &mut [bool]) {
        match *self {
            Gate::Not { target } => bits[target] = !bits[target],
            Gate::Cnot { control, target } => {
                if bits[control] {
                    bits[target] = !bits[target];
                }
            }
            Gate::Toffoli { control0, control1, target } => {
                if bits[control0] && bits[control1] {
                    bits[target] = !bits[target];
                }
            }
        }
    }
}

/// An ordered gate list over a fixed-width bit register, with named bit
/// ranges for inspection.
#[derive(Clone, Debug, Default)]
pub struct Circuit {
    num_bits: usize,
    gates: Vec<Gate>,
    labels: Vec<(String, Range<usize>)>,
}

impl Circuit {
    pub fn new(num_bits: usize) -> Self {
        Self { num_bits, gates: Vec::new(), labels: Vec::new() }
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn labels(&self) -> &[(String, Range<usize>)] {
        &self.labels
    }

    pub fn find_label(&self, name: &str) -> Option<Range<usize>> {
        self.labels.iter().find(|(n, _)| n == name).map(|(_, r)| r.clone())
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_bits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn label(&mut self, name: impl Into<String>, range: Range<usize>) -> Result<()> {
        if range.end > self.num_bits {
            return Err(domain(format!(
                "label range {range:?} exceeds register width {}",
                self.num_bits
            )));
        }
        self.labels.push((name.into(), range));
        Ok(())
    }

    /// Applies every gate in order to a copy of `state`.
    pub fn apply(&self, state: &[bool]) -> Result<Vec<bool>> {
        let mut out = state.to_vec();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, state: &mut [bool]) -> Result<()> {
        if state.len() != self.num_bits {
            return Err(domain(format!(
                "state has {} bits, circuit expects {}",
                state.len(),
                self.num_bits
            )));
        }
        for g in &self.gates {
            g.apply(state);
        }
        Ok(())
    }

    /// The gate-wise reverse. Every gate in this set is self-inverse, so this
    /// is the inverse circuit.
    pub fn reversed(&self) -> Circuit {
        Circuit {
            num_bits: self.num_bits,
            gates: self.gates.iter().rev().copied().collect(),
            labels: self.labels.clone(),
        }
    }

    /// Line-oriented text export: a `bits N` header, then one gate per line
    /// (`NOT t`, `CNOT c t`, `CCX c1 c2 t`).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "bits {}", self.num_bits).unwrap();
        for g in &self.gates {
            match *g {
                Gate::Not { target } => writeln!(out, "NOT {target}").unwrap(),
                Gate::Cnot { control, target } => writeln!(out, "CNOT {control} {target}").unwrap(),
                Gate::Toffoli { control0, control1, target } => {
                    writeln!(out, "CCX {control0} {control1} {target}").unwrap()
                }
            }
        }
        out
    }

    /// Parses the text format produced by [`Circuit::to_text`].
    pub fn parse_text(text: &str) -> Result<Circuit> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| domain("empty circuit text".to_string()))?;
        let num_bits = header
            .strip_prefix("bits ")
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| domain(format!("bad header line: {header:?}")))?;
        let mut circuit = Circuit::new(num_bits);
        for line in lines {
            let mut parts = line.split_whitespace();
            let op = parts.next().unwrap_or("");
            let mut arg = || -> Result<usize> {
                parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| domain(format!("bad gate line: {line:?}")))
            };
            let gate = match op {
                "NOT" => Gate::Not { target: arg()? },
                "CNOT" => Gate::Cnot { control: arg()?, target: arg()? },
                "CCX" => Gate::Toffoli { control0: arg()?, control1: arg()?, target: arg()? },
                _ => return Err(domain(format!("unknown gate {op:?}"))),
            };
            circuit.push(gate)?;
        }
        Ok(circuit)
    }
}

/// Toffoli count and greedy-layered Toffoli depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostTally {
    pub toffoli_count: u64,
    /// Longest chain of bit-overlapping Toffolis when every gate commutes
    /// into the earliest layer where its bits are free. Reported for
    /// information; the cost model uses closed-form depth formulas.
    pub toffoli_depth: u64,
}

/// Tallies Toffolis in a circuit. Non-Toffoli gates propagate dependencies
/// between bits but do not add depth.
pub fn count_costs(circuit: &Circuit) -> CostTally {
    let mut toffoli_count = 0u64;
    let mut depth_at = vec![0u64; circuit.num_bits()];
    let mut max_depth = 0u64;
    for g in circuit.gates() {
        let idx: Vec<usize> = g.indices().iter().flatten().copied().collect();
        let here = idx.iter().map(|&i| depth_at[i]).max().unwrap_or(0);
        let is_toffoli = matches!(g, Gate::Toffoli { .. });
        let layer = here + u64::from(is_toffoli);
        if is_toffoli {
            toffoli_count += 1;
            max_depth = max_depth.max(layer);
        }
        for &i in &idx {
            depth_at[i] = layer;
        }
    }
    CostTally { toffoli_count, toffoli_depth: max_depth }
}

/// Reads the little-endian value of a bit range.
pub fn read_bits_value(state: &[bool], range: Range<usize>) -> u64 {
    range.rev().fold(0u64, |acc, i| (acc << 1) | u64::from(state[i]))
}

/// Writes `value` into a bit range, little-endian.
pub fn write_bits_value(state: &mut [bool], range: Range<usize>, value: u64) {
    for (offset, i) in range.enumerate() {
        state[i] = (value >> offset) & 1 == 1;
    }
}

/// MAJ block of the ripple-carry adder: computes the majority (next carry)
/// into `a`, leaving partial sums behind.
fn emit_maj(gates: &mut Vec<Gate>, c: usize, b: usize, a: usize) {
    gates.push(Gate::Cnot { control: a, target: b });
    gates.push(Gate::Cnot { control: a, target: c });
    gates.push(Gate::Toffoli { control0: c, control1: b, target: a });
}

/// UnMaj-and-Add block: undoes the carry and deposits the sum bit in `b`.
fn emit_uma(gates: &mut Vec<Gate>, c: usize, b: usize, a: usize) {
    gates.push(Gate::Toffoli { control0: c, control1: b, target: a });
    gates.push(Gate::Cnot { control: a, target: c });
    gates.push(Gate::Cnot { control: c, target: b });
}

/// Ripple-carry addition `target += addend + carry_in`, wrapping modulo
/// `2^target.len()`. `addend` and `carry` are restored. Requires equal
/// register widths; 2 Toffolis per bit.
fn emit_add_registers(gates: &mut Vec<Gate>, addend: &[usize], target: &[usize], carry: usize) {
    let n = addend.len();
    assert_eq!(n, target.len(), "addend and target widths must match");
    if n == 0 {
        return;
    }
    for i in 0..n {
        let c = if i == 0 { carry } else { addend[i - 1] };
        emit_maj(gates, c, target[i], addend[i]);
    }
    for i in (0..n).rev() {
        let c = if i == 0 { carry } else { addend[i - 1] };
        emit_uma(gates, c, target[i], addend[i]);
    }
}

/// Ripple-carry adder mapping `(a, b, 0) -> (a, (a+b) mod 2^n, 0)`.
///
/// Layout: `a` in bits `[0, n)`, `b` in `[n, 2n)`, one carry ancilla at `2n`.
/// Toffoli count is exactly `2n`.
pub fn build_ripple_adder(n: usize) -> Circuit {
    let mut circuit = Circuit::new(2 * n + 1);
    circuit.label("a", 0..n).unwrap();
    circuit.label("b", n..2 * n).unwrap();
    circuit.label("carry", 2 * n..2 * n + 1).unwrap();
    let a: Vec<usize> = (0..n).collect();
    let b: Vec<usize> = (n..2 * n).collect();
    let mut gates = Vec::with_capacity(6 * n);
    emit_add_registers(&mut gates, &a, &b, 2 * n);
    for g in gates {
        circuit.push(g).unwrap();
    }
    circuit
}

/// Loads `constant` into a scratch register with NOTs, ripple-adds it into
/// the piece at `target`, then clears the NOTs. Scratch is restored to zero.
fn emit_add_constant(
    gates: &mut Vec<Gate>,
    constant: u64,
    target: &[usize],
    scratch: &[usize],
    carry: usize,
) {
    let w = target.len();
    assert_eq!(w, scratch.len());
    let load: Vec<usize> =
        (0..w).filter(|&i| (constant >> i) & 1 == 1).map(|i| scratch[i]).collect();
    for &i in &load {
        gates.push(Gate::Not { target: i });
    }
    emit_add_registers(gates, scratch, target, carry);
    for &i in &load {
        gates.push(Gate::Not { target: i });
    }
}

/// Constant adder mapping `(b, 0) -> ((b + k) mod 2^n, 0)`.
///
/// Layout: `b` in `[0, n)`, a constant register in `[n, 2n)`, carry at `2n`.
/// The constant is loaded with NOTs, ripple-added, and unloaded, so the
/// Toffoli count equals the plain ripple adder's.
pub fn build_constant_adder(n: usize, k: u64) -> Result<Circuit> {
    if n < 64 && k >> n != 0 {
        return Err(domain(format!("constant {k} does not fit in {n} bits")));
    }
    let mut circuit = Circuit::new(2 * n + 1);
    circuit.label("b", 0..n)?;
    circuit.label("constant", n..2 * n)?;
    circuit.label("carry", 2 * n..2 * n + 1)?;
    let target: Vec<usize> = (0..n).collect();
    let scratch: Vec<usize> = (n..2 * n).collect();
    let mut gates = Vec::new();
    emit_add_constant(&mut gates, k, &target, &scratch, 2 * n);
    for g in gates {
        circuit.push(g)?;
    }
    Ok(circuit)
}

/// Subtracts the value held in `runway` from `target` (mod `2^target.len()`)
/// via two's complement: copy into scratch, negate, add with carry-in 1.
/// `runway` may be narrower than `target`; scratch and carry are restored.
fn emit_subtract_runway(
    gates: &mut Vec<Gate>,
    runway: &[usize],
    target: &[usize],
    scratch: &[usize],
    carry: usize,
) {
    let w = target.len();
    assert_eq!(w, scratch.len());
    assert!(runway.len() <= w);
    if w == 0 {
        return;
    }
    let copy_pairs: Vec<(usize, usize)> =
        runway.iter().copied().zip(scratch.iter().copied()).collect();
    for &(r, s) in &copy_pairs {
        gates.push(Gate::Cnot { control: r, target: s });
    }
    for &s in scratch {
        gates.push(Gate::Not { target: s });
    }
    gates.push(Gate::Not { target: carry });
    emit_add_registers(gates, scratch, target, carry);
    gates.push(Gate::Not { target: carry });
    for &s in scratch {
        gates.push(Gate::Not { target: s });
    }
    for &(r, s) in &copy_pairs {
        gates.push(Gate::Cnot { control: r, target: s });
    }
}

/// Builds the runway-attachment circuit for a register of `n` bits with an
/// `m`-bit runway at position `p`.
///
/// Input layout: the low `p` bits of the value in `[0, p)`, the runway value
/// in `[p, p+m)` (stands in for the superposed runway register), and the
/// high `n-p` bits in `[p+m, n+m)`. The circuit subtracts the runway from
/// the high part, after which bits `[0, n+m)` read the packed encoding.
pub fn build_runway_init(n: usize, p: usize, m: usize) -> Result<Circuit> {
    validate_runway_shape(n, p, m)?;
    let high = n - p;
    let width = n + m + high + 1;
    let mut circuit = Circuit::new(width);
    circuit.label("low", 0..p)?;
    circuit.label("runway", p..p + m)?;
    circuit.label("high", p + m..n + m)?;
    circuit.label("scratch", n + m..n + m + high)?;
    circuit.label("carry", width - 1..width)?;
    if m == 0 || high == 0 {
        return Ok(circuit);
    }
    let runway: Vec<usize> = (p..p + m).collect();
    let target: Vec<usize> = (p + m..n + m).collect();
    let scratch: Vec<usize> = (n + m..n + m + high).collect();
    let mut gates = Vec::new();
    emit_subtract_runway(&mut gates, &runway, &target, &scratch, width - 1);
    for g in gates {
        circuit.push(g)?;
    }
    Ok(circuit)
}

fn validate_runway_shape(n: usize, p: usize, m: usize) -> Result<()> {
    if n < 1 || p < 1 || p > n || (m >= 1 && p > n - m) {
        return Err(domain(format!(
            "invalid runway shape: n={n}, p={p}, m={m}"
        )));
    }
    Ok(())
}

/// Piece spans of a layout in the packed bit register: each runway sits
/// immediately above its piece's data bits.
fn piece_spans(layout: &LayoutParams) -> Vec<Range<usize>> {
    let widths = layout.piece_widths();
    let mut spans = Vec::with_capacity(widths.len());
    let mut start = 0usize;
    for w in widths {
        spans.push(start..start + w as usize);
        start += w as usize;
    }
    spans
}

/// Piecewise constant adder: adds the matching slice of `k` into every piece
/// of the packed register, with no gate spanning two pieces.
///
/// Layout: packed data in `[0, n + r*m)`, then per-piece scratch blocks
/// (`piece{i}` / `piece{i}_scratch` labels). Acts on packed encodings
/// exactly as the multi-runway family's encoded permutation.
pub fn build_piecewise_adder(layout: &LayoutParams, k: u64) -> Result<Circuit> {
    layout.validate()?;
    let spans = piece_spans(layout);
    let data_bits = layout.encoded_bits() as usize;
    let scratch_bits: usize = spans.iter().map(|s| s.len() + 1).sum();
    let mut circuit = Circuit::new(data_bits + scratch_bits);
    circuit.label("data", 0..data_bits)?;
    let slices = layout.constant_slices(k);
    let mut scratch_start = data_bits;
    let mut gates = Vec::new();
    for (i, (span, slice)) in spans.iter().zip(&slices).enumerate() {
        let w = span.len();
        circuit.label(format!("piece{i}"), span.clone())?;
        circuit.label(format!("piece{i}_scratch"), scratch_start..scratch_start + w + 1)?;
        if *slice != 0 {
            let target: Vec<usize> = span.clone().collect();
            let scratch: Vec<usize> = (scratch_start..scratch_start + w).collect();
            emit_add_constant(&mut gates, *slice, &target, &scratch, scratch_start + w);
        }
        scratch_start += w + 1;
    }
    for g in gates {
        circuit.push(g)?;
    }
    Ok(circuit)
}

/// Runs the full encoded-addition pipeline on basis states: attach every
/// runway (highest position first), apply one piecewise addition per
/// constant, then decode the packed result.
///
/// A run whose runway saturates mid-sequence returns a wrong `Value`;
/// callers compare against an integer oracle.
pub fn simulate_addition_sequence(
    layout: &LayoutParams,
    constants: &[u64],
    value: u64,
    coset: u64,
) -> Result<Decoded> {
    layout.validate()?;
    let aep = make_multi_runway_aep(layout, 0)?;
    if value >= 1u64 << layout.register_bits {
        return Err(domain(format!(
            "value {value} out of range [0, 2^{})",
            layout.register_bits
        )));
    }
    if coset >= aep.coset_size() {
        return Err(domain(format!("coset {coset} out of range [0, {})", aep.coset_size())));
    }

    let n = layout.register_bits as usize;
    let m = layout.runway_bits as usize;
    let r = layout.positions.len();
    let data_bits = layout.encoded_bits() as usize;
    let spans = piece_spans(layout);

    // Scratch sized for the largest single phase; every phase restores it.
    let init_scratch = spans.iter().skip(1).map(|s| s.len() + 1).max().unwrap_or(0);
    let adder_scratch: usize = spans.iter().map(|s| s.len() + 1).sum();
    let scratch = init_scratch.max(adder_scratch);
    let width = data_bits + scratch;
    let mut state = vec![false; width];

    // Place the value's data bits and the per-runway coset values.
    let digits = layout.split_coset(coset);
    let mut prev = 0usize;
    for (i, span) in spans.iter().enumerate() {
        let data_w = if i < r { layout.positions[i] as usize - prev } else { n - prev };
        let data_slice = (value >> prev) & if data_w >= 64 { u64::MAX } else { (1 << data_w) - 1 };
        write_bits_value(&mut state, span.start..span.start + data_w, data_slice);
        if i < r {
            write_bits_value(&mut state, span.start + data_w..span.end, digits[i]);
            prev = layout.positions[i] as usize;
        }
    }

    // Attach runways from the highest position down; runway i's subtraction
    // targets the next piece up (which contains the next runway's bits).
    for i in (0..r).rev() {
        let runway_range = spans[i].end - m..spans[i].end;
        let target_range = spans[i + 1].clone();
        let mut gates = Vec::new();
        let runway: Vec<usize> = runway_range.collect();
        let target: Vec<usize> = target_range.collect();
        let scratch_bits: Vec<usize> = (data_bits..data_bits + target.len()).collect();
        emit_subtract_runway(&mut gates, &runway, &target, &scratch_bits, data_bits + target.len());
        let mut phase = Circuit::new(width);
        for g in gates {
            phase.push(g)?;
        }
        phase.apply_in_place(&mut state)?;
    }

    for &k in constants {
        let adder = build_piecewise_adder(layout, k)?;
        let mut padded = Circuit::new(width);
        for g in adder.gates() {
            padded.push(*g)?;
        }
        padded.apply_in_place(&mut state)?;
    }

    let packed = read_bits_value(&state, 0..data_bits);
    aep.decode(packed)
}
