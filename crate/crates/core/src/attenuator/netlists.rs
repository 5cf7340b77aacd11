//! Element-level netlists of the attenuation units and the chip, for the
//! nodal-analysis oracle.
//!
//! These builders describe the same circuits as the chain-matrix
//! evaluators in the parent module, but element by element, so the two can
//! be checked against each other. Transmission lines become LC ladders.

use super::{AttenuatorChipSpec, AttenuatorState, BitState, ContinuousUnitSpec, LineSpec};
use super::{SimplifiedTUnitSpec, TTypeUnitSpec};
use crate::devices::{fet_resistance, ResistorModel, SwitchModel, SwitchState};
use crate::error::Result;
use crate::mna::{Netlist, NetlistBuilder};

/// Sections used when a line is replaced by a lumped ladder.
pub const LADDER_SECTIONS: usize = 16;

const GND: usize = 0;

fn resistor_pi(b: &mut NetlistBuilder, name: &str, n1: usize, n2: usize, m: &ResistorModel) {
    b.r(name, n1, n2, m.r)
        .c(format!("{name}_cp1"), n1, GND, m.c_par / 2.0)
        .c(format!("{name}_cp2"), n2, GND, m.c_par / 2.0);
}

fn switch(b: &mut NetlistBuilder, name: &str, n1: usize, n2: usize, m: &SwitchModel, state: SwitchState) {
    match state {
        SwitchState::On => {
            b.r(format!("{name}_ron"), n1, n2, m.r_on)
                .c(format!("{name}_cpar"), n1, n2, m.c_par_on);
        }
        SwitchState::Off => {
            b.c(format!("{name}_coff"), n1, n2, m.c_off);
        }
    }
}

/// Shunt stack `mid -(R2 ∥ Ccomp)- b -M2- gnd`.
fn shunt_stack(
    b: &mut NetlistBuilder,
    prefix: &str,
    mid: usize,
    r2: &ResistorModel,
    c_comp: f64,
    sw: &SwitchModel,
    state: BitState,
) {
    let bottom = b.node();
    resistor_pi(b, &format!("{prefix}_r2"), mid, bottom, r2);
    b.c(format!("{prefix}_ccomp"), mid, bottom, c_comp);
    let st = match state {
        BitState::Ref => SwitchState::Off,
        BitState::Att => SwitchState::On,
    };
    switch(b, &format!("{prefix}_m2"), bottom, GND, sw, st);
}

fn ttype_into(b: &mut NetlistBuilder, spec: &TTypeUnitSpec, state: BitState, input: usize) -> usize {
    let mid = b.node();
    let out = b.node();
    resistor_pi(b, "u4_r1a", input, mid, &spec.r1);
    resistor_pi(b, "u4_r1b", mid, out, &spec.r1);
    shunt_stack(b, "u4", mid, &spec.r2, spec.c_comp, &spec.shunt_switch, state);
    let series_state = match state {
        BitState::Ref => SwitchState::On,
        BitState::Att => SwitchState::Off,
    };
    switch(b, "u4_m1", input, out, &spec.series_switch, series_state);
    out
}

fn simplified_into(b: &mut NetlistBuilder, spec: &SimplifiedTUnitSpec, state: BitState, input: usize) -> usize {
    let mid = b.node();
    let out = b.node();
    resistor_pi(b, "u2_r1a", input, mid, &spec.r1);
    resistor_pi(b, "u2_r1b", mid, out, &spec.r1);
    shunt_stack(b, "u2", mid, &spec.r2, spec.c_comp, &spec.shunt_switch, state);
    out
}

fn continuous_into(b: &mut NetlistBuilder, spec: &ContinuousUnitSpec, vc: f64, node: usize) -> Result<usize> {
    let r_fet = fet_resistance(&spec.fet, vc)?;
    let bottom = b.node();
    resistor_pi(b, "uc_r2", node, bottom, &spec.r2);
    b.r("uc_fet", bottom, GND, r_fet);
    Ok(node)
}

/// Symmetric LC ladder (L/2 – C – L/2 per section) with the line's
/// total delay `θ_ref / ω_ref`. A zero-length line is a plain wire.
fn ladder_into(b: &mut NetlistBuilder, name: &str, line: &LineSpec, sections: usize, input: usize) -> usize {
    if line.theta_ref == 0.0 || sections == 0 {
        return input;
    }
    let delay = line.theta_ref / (2.0 * std::f64::consts::PI * line.f_ref);
    let l_sec = line.z_c * delay / sections as f64;
    let c_sec = delay / line.z_c / sections as f64;
    let mut node = input;
    for k in 0..sections {
        let mid = b.node();
        let next = b.node();
        b.l(format!("{name}_l{k}a"), node, mid, l_sec / 2.0)
            .c(format!("{name}_c{k}"), mid, GND, c_sec)
            .l(format!("{name}_l{k}b"), mid, next, l_sec / 2.0);
        node = next;
    }
    node
}

pub fn ttype_netlist(spec: &TTypeUnitSpec, state: BitState) -> Result<Netlist> {
    let mut b = NetlistBuilder::new();
    let input = b.node();
    let out = ttype_into(&mut b, spec, state, input);
    b.build((input, GND), (out, GND))
}

pub fn simplified_netlist(spec: &SimplifiedTUnitSpec, state: BitState) -> Result<Netlist> {
    let mut b = NetlistBuilder::new();
    let input = b.node();
    let out = simplified_into(&mut b, spec, state, input);
    b.build((input, GND), (out, GND))
}

pub fn continuous_netlist(spec: &ContinuousUnitSpec, vc: f64) -> Result<Netlist> {
    let mut b = NetlistBuilder::new();
    let node = b.node();
    continuous_into(&mut b, spec, vc, node)?;
    b.build((node, GND), (node, GND))
}

pub fn line_ladder_netlist(line: &LineSpec, sections: usize) -> Result<Netlist> {
    let mut b = NetlistBuilder::new();
    let input = b.node();
    let out = ladder_into(&mut b, "tl", line, sections, input);
    b.build((input, GND), (out, GND))
}

/// Full chip with each line replaced by a [`LADDER_SECTIONS`]-section
/// ladder.
pub fn chip_netlist(chip: &AttenuatorChipSpec, state: &AttenuatorState) -> Result<Netlist> {
    let mut b = NetlistBuilder::new();
    let input = b.node();
    let n = ttype_into(&mut b, &chip.unit4, state.bit4, input);
    let n = ladder_into(&mut b, "tla", &chip.tl_a, LADDER_SECTIONS, n);
    let n = simplified_into(&mut b, &chip.unit2, state.bit2, n);
    let n = ladder_into(&mut b, "tlb", &chip.tl_b, LADDER_SECTIONS, n);
    let out = continuous_into(&mut b, &chip.cont, state.vc, n)?;
    b.build((input, GND), (out, GND))
}

/// Netlist of the closed-form equivalent circuit: ideal series arms `r1`,
/// shunt `(r2 ∥ c_comp)` on top of `r_on2`.
pub fn eq1_netlist(r1: f64, r2: f64, r_on2: f64, c_comp: f64) -> Result<Netlist> {
    let mut b = NetlistBuilder::new();
    let (input, mid, out, bottom) = (b.node(), b.node(), b.node(), b.node());
    b.r("r1a", input, mid, r1)
        .r("r1b", mid, out, r1)
        .r("r2", mid, bottom, r2)
        .c("ccomp", mid, bottom, c_comp)
        .r("ron2", bottom, GND, r_on2);
    b.build((input, GND), (out, GND))
}
