//! Closed-form cost model for large adders.
//!
//! Costs are computed from formulas, never from gate lists: a register of
//! `n` bits with runways every `s` bits has `r = ceil(n/s) - 1` runways, and
//! `k` piecewise additions cost `2*(n + m*r)*k` Toffolis with a measurement
//! depth between `2*(s+m)*k` and `2*(2s+m)*k` (the last piece can be up to
//! `2s + m` bits long). The trace-distance bound for the whole sequence is
//! `2*sqrt(k * r * 2^-m)`, one more runway's worth in the modular variant.
//!
//! Physical quantities (duration, average space, spacetime volume) follow a
//! deliberately simple factory model: duration is measurement depth times
//! the control system's reaction time, the Toffoli rate fixes the average
//! number of magic-state factories, and volume is average space times
//! duration. The factory constants are configuration, not outputs; the
//! defaults below reproduce orderings between adder kinds, not absolute
//! figures.

use std::io::{self, Write};

use crate::error::{domain, Result};

/// Adder families the model can cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AdderKind {
    /// Plain ripple-carry adder, 2n Toffolis and 2n depth per addition.
    RippleCarry,
    /// Carry-lookahead adder: linear Toffolis, logarithmic depth, more space.
    CarryLookahead,
    /// Ripple adder built from temporary logical-AND pairs: n Toffolis,
    /// 2n depth, n scratch qubits.
    TemporaryAndRipple,
    /// Piecewise additions over carry runways spaced every `spacing` bits.
    Runway { spacing: u64 },
}

impl AdderKind {
    pub fn token(&self) -> &'static str {
        match self {
            AdderKind::RippleCarry => "ripple",
            AdderKind::CarryLookahead => "lookahead",
            AdderKind::TemporaryAndRipple => "temp-and",
            AdderKind::Runway { .. } => "runway",
        }
    }

    pub fn spacing(&self) -> Option<u64> {
        match self {
            AdderKind::Runway { spacing } => Some(*spacing),
            _ => None,
        }
    }

    /// Parses `ripple`, `lookahead`, `temp-and`, or `runway:<spacing>`.
    pub fn parse(token: &str) -> Result<AdderKind> {
        match token {
            "ripple" => Ok(AdderKind::RippleCarry),
            "lookahead" => Ok(AdderKind::CarryLookahead),
            "temp-and" => Ok(AdderKind::TemporaryAndRipple),
            _ => {
                if let Some(s) = token.strip_prefix("runway:") {
                    let spacing = s
                        .parse::<u64>()
                        .map_err(|_| domain(format!("bad runway spacing in {token:?}")))?;
                    if spacing == 0 {
                        return Err(domain("runway spacing must be positive".to_string()));
                    }
                    return Ok(AdderKind::Runway { spacing });
                }
                Err(domain(format!(
                    "unknown adder kind {token:?} (expected ripple, lookahead, temp-and, or runway:<spacing>)"
                )))
            }
        }
    }
}

/// Modular adders built from non-modular ones cost about this many plain
/// additions each.
pub const MODULAR_OVERHEAD: u64 = 5;

/// Physical-model configuration. All defaults are documented approximations
/// external to the cost formulas themselves.
#[derive(Clone, Copy, Debug)]
pub struct CostParams {
    /// Control-system reaction time in microseconds.
    pub reaction_time_us: f64,
    /// Surface-code distance of the computation.
    pub code_distance: u32,
    /// Multiplier covering routing and Clifford overhead.
    pub routing_overhead_factor: f64,
    /// Footprint of one magic-state factory, in logical-qubit patches.
    pub factory_footprint_qubits: f64,
    /// Time for one factory to produce one magic state, in microseconds.
    pub factory_period_us: f64,
    /// Trace-distance budget for a whole sweep entry.
    pub trace_distance_budget: f64,
    /// Number of additions modeled as `k = n^exponent`.
    pub additions_exponent: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            reaction_time_us: 10.0,
            code_distance: 31,
            routing_overhead_factor: 1.5,
            factory_footprint_qubits: 72.0,
            factory_period_us: 165.0,
            trace_distance_budget: 0.01,
            additions_exponent: 2.0,
        }
    }
}

impl CostParams {
    /// Physical qubits per logical patch: `2 d^2`.
    pub fn qubits_per_logical(&self) -> f64 {
        2.0 * (self.code_distance as f64) * (self.code_distance as f64)
    }

    /// Addition count for a register size under the `k = n^exponent` rule.
    pub fn additions_for(&self, n: u64) -> u64 {
        (n as f64).powf(self.additions_exponent).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("reaction_time_us", self.reaction_time_us),
            ("routing_overhead_factor", self.routing_overhead_factor),
            ("factory_footprint_qubits", self.factory_footprint_qubits),
            ("factory_period_us", self.factory_period_us),
            ("additions_exponent", self.additions_exponent),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        if self.code_distance == 0 {
            return Err(domain("code_distance must be positive".to_string()));
        }
        if !(self.trace_distance_budget > 0.0 && self.trace_distance_budget < 1.0) {
            return Err(domain(format!(
                "trace_distance_budget must lie in (0, 1), got {}",
                self.trace_distance_budget
            )));
        }
        Ok(())
    }
}

/// Costs of one adder configuration. Logical counts are exact integers;
/// physical quantities are filled in by [`physical_costs`].
#[derive(Clone, Copy, Debug)]
pub struct CostReport {
    pub n: u64,
    pub kind: AdderKind,
    pub modular: bool,
    /// Runway count `r` (0 for baseline kinds).
    pub runways: u64,
    /// Runway length `m` (0 for baseline kinds).
    pub runway_length: u32,
    /// Addition count `k`.
    pub additions: u64,
    pub toffoli: u128,
    /// Measurement-depth interval across all additions.
    pub depth_low: u128,
    pub depth_high: u128,
    /// Trace-distance bound for the whole sequence (0 for exact adders).
    pub trace_bound: f64,
    /// Logical data+ancilla qubits, before factories and routing.
    pub logical_qubits: f64,
    pub duration_s: f64,
    pub space_qubits: f64,
    pub volume_qubit_s: f64,
}

/// `2 * sqrt(k * r * 2^-m)`: the trace-distance bound for `k` additions over
/// `r` runways of length `m`.
pub fn runway_trace_bound(additions: u64, runways: u64, runway_length: u32) -> f64 {
    2.0 * ((additions as f64) * (runways as f64) * 0.5f64.powi(runway_length as i32)).sqrt()
}

/// Smallest runway length `m` whose trace-distance bound for `k` additions
/// over `r` runways stays within `budget`. Zero when there is nothing to pad.
pub fn required_runway_length(additions: u64, runways: u64, budget: f64) -> Result<u32> {
    if !(budget > 0.0 && budget < 1.0) {
        return Err(domain(format!("budget must lie in (0, 1), got {budget}")));
    }
    if additions == 0 || runways == 0 {
        return Ok(0);
    }
    // m = ceil(lg(4 k r / budget^2)), then nudge for float edges.
    let raw = (4.0 * additions as f64 * runways as f64 / (budget * budget)).log2();
    let mut m = raw.ceil().max(0.0) as u32;
    while m > 0 && runway_trace_bound(additions, runways, m - 1) <= budget {
        m -= 1;
    }
    while runway_trace_bound(additions, runways, m) > budget {
        m += 1;
    }
    Ok(m)
}

/// Runway count for a register of `n` bits with runways every `spacing`
/// bits: `ceil(n / spacing) - 1`.
pub fn runway_count(n: u64, spacing: u64) -> u64 {
    n.div_ceil(spacing).saturating_sub(1)
}

/// Logical costs of `k` piecewise additions into an `n`-bit register with
/// runways of length `m` every `spacing` bits. The modular variant nests the
/// runways in the coset representation, which costs one extra runway.
pub fn runway_costs(
    n: u64,
    spacing: u64,
    runway_length: u32,
    additions: u64,
    modular: bool,
) -> Result<CostReport> {
    runway_costs_with_options(n, spacing, runway_length, additions, modular, false)
}

/// Like [`runway_costs`]; `literal_modular_toffoli` selects the alternate
/// modular Toffoli reading `n + m*(r+1)` without the `2 * ... * k` factors
/// instead of the default symmetric `2 * (n + m*(r+1)) * k`.
pub fn runway_costs_with_options(
    n: u64,
    spacing: u64,
    runway_length: u32,
    additions: u64,
    modular: bool,
    literal_modular_toffoli: bool,
) -> Result<CostReport> {
    if spacing < 1 {
        return Err(domain("spacing must be at least 1".to_string()));
    }
    if n <= spacing {
        return Err(domain(format!("register size {n} must exceed the spacing {spacing}")));
    }
    let r = runway_count(n, spacing);
    let r_eff = r + u64::from(modular);
    let (m, k, s) = (runway_length as u128, additions as u128, spacing as u128);
    let toffoli = if modular && literal_modular_toffoli {
        n as u128 + m * (r_eff as u128)
    } else {
        2 * (n as u128 + m * r_eff as u128) * k
    };
    Ok(CostReport {
        n,
        kind: AdderKind::Runway { spacing },
        modular,
        runways: r,
        runway_length,
        additions,
        toffoli,
        depth_low: 2 * (s + m) * k,
        depth_high: 2 * (2 * s + m) * k,
        trace_bound: runway_trace_bound(additions, r_eff, runway_length),
        logical_qubits: 2.0 * (n as f64 + runway_length as f64 * r_eff as f64),
        duration_s: 0.0,
        space_qubits: 0.0,
        volume_qubit_s: 0.0,
    })
}

/// Logical costs of `k` additions with one of the baseline adders. Formula
/// table (per addition, documented approximations for the non-ripple kinds):
/// ripple `2n` Toffoli and `2n` depth; lookahead `10n` Toffoli and
/// `8 ceil(lg n)` depth; temporary-AND ripple `n` Toffoli and `2n` depth.
/// Modular variants multiply per-addition costs by [`MODULAR_OVERHEAD`].
pub fn baseline_costs(kind: AdderKind, n: u64, additions: u64, modular: bool) -> Result<CostReport> {
    if n == 0 {
        return Err(domain("register size must be positive".to_string()));
    }
    let (toffoli_per_add, depth_per_add, logical): (u128, u128, f64) = match kind {
        AdderKind::RippleCarry => (2 * n as u128, 2 * n as u128, 2.0 * n as f64 + 1.0),
        AdderKind::CarryLookahead => {
            (10 * n as u128, 8 * ceil_lg_u64(n) as u128, 4.0 * n as f64)
        }
        AdderKind::TemporaryAndRipple => (n as u128, 2 * n as u128, 3.0 * n as f64),
        AdderKind::Runway { .. } => {
            return Err(domain("runway costs come from runway_costs, not the baseline table".to_string()))
        }
    };
    let overhead = if modular { MODULAR_OVERHEAD as u128 } else { 1 };
    let k = additions as u128;
    let depth = depth_per_add * overhead * k;
    Ok(CostReport {
        n,
        kind,
        modular,
        runways: 0,
        runway_length: 0,
        additions,
        toffoli: toffoli_per_add * overhead * k,
        depth_low: depth,
        depth_high: depth,
        trace_bound: 0.0,
        logical_qubits: logical,
        duration_s: 0.0,
        space_qubits: 0.0,
        volume_qubit_s: 0.0,
    })
}

fn ceil_lg_u64(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Fills in duration, average space, and spacetime volume.
///
/// Duration is the conservative end of the depth interval times the reaction
/// time. The Toffoli rate times the factory period gives the average factory
/// count; data, ancilla, and factories (scaled by the routing overhead and
/// the physical qubits per logical patch) give the average space.
pub fn physical_costs(mut report: CostReport, params: &CostParams) -> CostReport {
    let duration_s = report.depth_high as f64 * params.reaction_time_us * 1e-6;
    let factory_count = if duration_s > 0.0 {
        report.toffoli as f64 / duration_s * params.factory_period_us * 1e-6
    } else {
        0.0
    };
    let space = (report.logical_qubits + factory_count * params.factory_footprint_qubits)
        * params.routing_overhead_factor
        * params.qubits_per_logical();
    report.duration_s = duration_s;
    report.space_qubits = space;
    report.volume_qubit_s = space * duration_s;
    report
}

/// One report per `(n, kind)`, with the runway length auto-sized to keep the
/// whole addition sequence within the trace-distance budget. Combinations
/// whose preconditions fail (a runway spacing at least as large as the
/// register) are skipped. Output is sorted by `n`, then kind.
pub fn sweep(
    n_values: &[u64],
    kinds: &[AdderKind],
    modular: bool,
    params: &CostParams,
) -> Result<Vec<CostReport>> {
    params.validate()?;
    let mut reports = Vec::new();
    for &n in n_values {
        let k = params.additions_for(n);
        for &kind in kinds {
            let report = match kind {
                AdderKind::Runway { spacing } => {
                    if n <= spacing {
                        continue;
                    }
                    let r_eff = runway_count(n, spacing) + u64::from(modular);
                    let m = required_runway_length(k, r_eff, params.trace_distance_budget)?;
                    runway_costs(n, spacing, m, k, modular)?
                }
                _ => baseline_costs(kind, n, k, modular)?,
            };
            reports.push(physical_costs(report, params));
        }
    }
    reports.sort_by(|a, b| {
        (a.n, a.kind.token(), a.kind.spacing()).cmp(&(b.n, b.kind.token(), b.kind.spacing()))
    });
    Ok(reports)
}

/// Six significant digits, enough to reproduce every reported figure.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.5e}")
    }
}

pub const CSV_HEADER: &str =
    "n,kind,modular,spacing,r,m,k,toffoli,depth_low,depth_high,trace_bound,duration_s,space_qubits,volume_qubit_s";

/// Writes sweep rows in the documented CSV schema.
pub fn write_csv<W: Write>(reports: &[CostReport], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.kind.token(),
            r.modular,
            r.kind.spacing().unwrap_or(0),
            r.runways,
            r.runway_length,
            r.additions,
            r.toffoli,
            r.depth_low,
            r.depth_high,
            format_sig6(r.trace_bound),
            format_sig6(r.duration_s),
            format_sig6(r.space_qubits),
            format_sig6(r.volume_qubit_s),
        )?;
    }
    Ok(())
}
