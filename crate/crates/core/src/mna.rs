//! Modified nodal analysis for linear RLC two-ports.
//!
//! This solver shares nothing with the chain-matrix path in
//! [`crate::netcore`] beyond the [`SParams2`] result type: circuits are
//! described as element lists, stamped into a dense complex system and
//! solved by LU with partial pivoting. It is the reference every
//! closed-form and cascaded result is checked against.
//!
//! Netlist text format, one statement per line:
//!
//! ```text
//! * comment (also `#`)
//! R r1 1 2 11.3127
//! C ccomp 2 3 2e-14
//! L l1 3 0 1e-9
//! PORT1 1 0
//! PORT2 4 0
//! ```
//!
//! Node 0 is ground. Values are plain SI numbers (ohms, farads, henries).

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::netcore::{Complex, SParams2};

/// Growth factor above which a solve is flagged as poorly conditioned.
pub const GROWTH_WARN: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Resistor,
    Capacitor,
    Inductor,
}

impl ElementKind {
    fn letter(self) -> char {
        match self {
            ElementKind::Resistor => 'R',
            ElementKind::Capacitor => 'C',
            ElementKind::Inductor => 'L',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub kind: ElementKind,
    pub name: String,
    pub value: f64,
    pub nodes: (usize, usize),
}

impl Element {
    pub fn new(kind: ElementKind, name: impl Into<String>, n1: usize, n2: usize, value: f64) -> Self {
        Self {
            kind,
            name: name.into(),
            value,
            nodes: (n1, n2),
        }
    }
}

pub type Port = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    elements: Vec<Element>,
    node_count: usize,
    port1: Port,
    port2: Port,
}

impl Netlist {
    pub fn new(elements: Vec<Element>, node_count: usize, port1: Port, port2: Port) -> Result<Self> {
        let net = Self {
            elements,
            node_count,
            port1,
            port2,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn port1(&self) -> Port {
        self.port1
    }

    pub fn port2(&self) -> Port {
        self.port2
    }

    fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::InvalidInput("netlist needs at least one non-ground node".into()));
        }
        let in_range = |n: usize| n < self.node_count;
        for e in &self.elements {
            if !(e.value > 0.0) || !e.value.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "element {} has non-positive value {}",
                    e.name, e.value
                )));
            }
            if !in_range(e.nodes.0) || !in_range(e.nodes.1) {
                return Err(Error::InvalidInput(format!(
                    "element {} references a node >= {}",
                    e.name, self.node_count
                )));
            }
            if e.nodes.0 == e.nodes.1 {
                return Err(Error::InvalidInput(format!("element {} is shorted on itself", e.name)));
            }
        }
        for (p, label) in [(self.port1, "port1"), (self.port2, "port2")] {
            if !in_range(p.0) || !in_range(p.1) || p.0 == p.1 {
                return Err(Error::InvalidInput(format!("{label} has invalid nodes {p:?}")));
            }
        }

        // Every node must reach ground through elements or port terminations.
        let mut adj = vec![Vec::new(); self.node_count];
        let edges = self
            .elements
            .iter()
            .map(|e| e.nodes)
            .chain([self.port1, self.port2]);
        for (a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = HashSet::from([0usize]);
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            for &m in &adj[n] {
                if seen.insert(m) {
                    stack.push(m);
                }
            }
        }
        if let Some(floating) = (0..self.node_count).find(|n| !seen.contains(n)) {
            return Err(Error::InvalidInput(format!(
                "node {floating} has no path to ground"
            )));
        }
        Ok(())
    }
}

impl FromStr for Netlist {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut elements = Vec::new();
        let mut port1 = None;
        let mut port2 = None;
        let mut max_node = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('*') || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let node = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("line {line_no}: bad node '{s}'")))
            };
            match fields[0].to_ascii_uppercase().as_str() {
                kind @ ("R" | "C" | "L") => {
                    if fields.len() != 5 {
                        return Err(Error::InvalidInput(format!(
                            "line {line_no}: expected `{kind} name n1 n2 value`"
                        )));
                    }
                    let kind = match kind {
                        "R" => ElementKind::Resistor,
                        "C" => ElementKind::Capacitor,
                        _ => ElementKind::Inductor,
                    };
                    let (n1, n2) = (node(fields[2])?, node(fields[3])?);
                    let value: f64 = fields[4].parse().map_err(|_| {
                        Error::InvalidInput(format!("line {line_no}: bad value '{}'", fields[4]))
                    })?;
                    max_node = max_node.max(n1).max(n2);
                    elements.push(Element::new(kind, fields[1], n1, n2, value));
                }
                which @ ("PORT1" | "PORT2") => {
                    if fields.len() != 3 {
                        return Err(Error::InvalidInput(format!(
                            "line {line_no}: expected `{which} n+ n-`"
                        )));
                    }
                    let p = (node(fields[1])?, node(fields[2])?);
                    max_node = max_node.max(p.0).max(p.1);
                    if which == "PORT1" {
                        port1 = Some(p);
                    } else {
                        port2 = Some(p);
                    }
                }
                other => {
                    return Err(Error::InvalidInput(format!(
                        "line {line_no}: unknown statement '{other}'"
                    )))
                }
            }
        }
        let port1 = port1.ok_or_else(|| Error::InvalidInput("missing PORT1".into()))?;
        let port2 = port2.ok_or_else(|| Error::InvalidInput("missing PORT2".into()))?;
        Netlist::new(elements, max_node + 1, port1, port2)
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.elements {
            writeln!(
                f,
                "{} {} {} {} {:e}",
                e.kind.letter(),
                e.name,
                e.nodes.0,
                e.nodes.1,
                e.value
            )?;
        }
        writeln!(f, "PORT1 {} {}", self.port1.0, self.port1.1)?;
        writeln!(f, "PORT2 {} {}", self.port2.0, self.port2.1)
    }
}

/// Incremental netlist construction with automatic node numbering.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    elements: Vec<Element>,
    next_node: usize,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self {
            elements: Vec::new(),
            next_node: 1,
        }
    }

    pub fn node(&mut self) -> usize {
        let n = self.next_node;
        self.next_node += 1;
        n
    }

    /// Adds an element; zero-valued capacitors and inductors are skipped
    /// since they are respectively an open and a short that the caller
    /// should not need to special-case.
    pub fn add(&mut self, kind: ElementKind, name: impl Into<String>, n1: usize, n2: usize, value: f64) -> &mut Self {
        if kind == ElementKind::Capacitor && value == 0.0 {
            return self;
        }
        self.elements.push(Element::new(kind, name, n1, n2, value));
        self
    }

    pub fn r(&mut self, name: impl Into<String>, n1: usize, n2: usize, ohms: f64) -> &mut Self {
        self.add(ElementKind::Resistor, name, n1, n2, ohms)
    }

    pub fn c(&mut self, name: impl Into<String>, n1: usize, n2: usize, farads: f64) -> &mut Self {
        self.add(ElementKind::Capacitor, name, n1, n2, farads)
    }

    pub fn l(&mut self, name: impl Into<String>, n1: usize, n2: usize, henries: f64) -> &mut Self {
        self.add(ElementKind::Inductor, name, n1, n2, henries)
    }

    pub fn build(self, port1: Port, port2: Port) -> Result<Netlist> {
        Netlist::new(self.elements, self.next_node, port1, port2)
    }
}

/// How inductors enter the nodal system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InductorStamp {
    /// Extra branch-current unknown per inductor; valid down to DC.
    #[default]
    Branch,
    /// Plain admittance `1/(jωL)`; rejected at ω = 0.
    Admittance,
}

/// Stamped system `Y·x = i` for one angular frequency, without port
/// terminations. Unknowns are node voltages 1..node_count followed by one
/// branch current per inductor when [`InductorStamp::Branch`] is used.
#[derive(Debug, Clone)]
pub struct MnaSystem {
    pub matrix: Vec<Vec<Complex>>,
    pub node_unknowns: usize,
}

impl MnaSystem {
    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    fn add_admittance(&mut self, n1: usize, n2: usize, y: Complex) {
        let (i, j) = (n1.checked_sub(1), n2.checked_sub(1));
        if let Some(i) = i {
            self.matrix[i][i] += y;
        }
        if let Some(j) = j {
            self.matrix[j][j] += y;
        }
        if let (Some(i), Some(j)) = (i, j) {
            self.matrix[i][j] -= y;
            self.matrix[j][i] -= y;
        }
    }

    /// Right-hand side injecting `amps` into node `p` and out of node `n`.
    pub fn injection(&self, port: Port, amps: f64) -> Vec<Complex> {
        let mut rhs = vec![Complex::new(0.0, 0.0); self.size()];
        if let Some(i) = port.0.checked_sub(1) {
            rhs[i] += amps;
        }
        if let Some(j) = port.1.checked_sub(1) {
            rhs[j] -= amps;
        }
        rhs
    }

    fn voltage(&self, x: &[Complex], port: Port) -> Complex {
        let v = |n: usize| n.checked_sub(1).map_or(Complex::new(0.0, 0.0), |i| x[i]);
        v(port.0) - v(port.1)
    }
}

pub fn stamp_system(net: &Netlist, omega: f64) -> Result<MnaSystem> {
    stamp_system_with(net, omega, InductorStamp::Branch)
}

pub fn stamp_system_with(net: &Netlist, omega: f64, inductors: InductorStamp) -> Result<MnaSystem> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::InvalidInput(format!("omega must be >= 0, got {omega}")));
    }
    let n_ind = net
        .elements
        .iter()
        .filter(|e| e.kind == ElementKind::Inductor)
        .count();
    if omega == 0.0 && n_ind > 0 && inductors == InductorStamp::Admittance {
        return Err(Error::UnsupportedDc);
    }
    let nodes = net.node_count - 1;
    let size = match inductors {
        InductorStamp::Branch => nodes + n_ind,
        InductorStamp::Admittance => nodes,
    };
    let mut sys = MnaSystem {
        matrix: vec![vec![Complex::new(0.0, 0.0); size]; size],
        node_unknowns: nodes,
    };
    let mut branch = nodes;
    for e in &net.elements {
        let (n1, n2) = e.nodes;
        match e.kind {
            ElementKind::Resistor => sys.add_admittance(n1, n2, Complex::new(1.0 / e.value, 0.0)),
            ElementKind::Capacitor => sys.add_admittance(n1, n2, Complex::new(0.0, omega * e.value)),
            ElementKind::Inductor => match inductors {
                InductorStamp::Admittance => {
                    sys.add_admittance(n1, n2, 1.0 / Complex::new(0.0, omega * e.value))
                }
                InductorStamp::Branch => {
                    // KCL: +I leaves n1, enters n2; branch row: v1 - v2 - jωL·I = 0
                    let k = branch;
                    branch += 1;
                    if let Some(i) = n1.checked_sub(1) {
                        sys.matrix[i][k] += 1.0;
                        sys.matrix[k][i] += 1.0;
                    }
                    if let Some(j) = n2.checked_sub(1) {
                        sys.matrix[j][k] -= 1.0;
                        sys.matrix[k][j] -= 1.0;
                    }
                    sys.matrix[k][k] -= Complex::new(0.0, omega * e.value);
                }
            },
        }
    }
    Ok(sys)
}

/// Dense LU factorization with partial (row) pivoting, `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Vec<Vec<Complex>>,
    perm: Vec<usize>,
    growth: f64,
}

impl LuFactors {
    pub fn factor(mut a: Vec<Vec<Complex>>) -> Result<Self> {
        let n = a.len();
        if a.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("LU needs a square matrix".into()));
        }
        let max_a = a
            .iter()
            .flat_map(|r| r.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if max_a == 0.0 {
            return Err(Error::Degenerate("zero system matrix".into()));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut max_u = max_a;
        for k in 0..n {
            let (p, pivot_mag) = (k..n)
                .map(|i| (i, a[i][k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mag <= f64::EPSILON * max_a * n as f64 {
                return Err(Error::Degenerate(format!(
                    "singular nodal system (pivot {pivot_mag:e} at column {k})"
                )));
            }
            if p != k {
                a.swap(p, k);
                perm.swap(p, k);
            }
            let pivot = a[k][k];
            for i in (k + 1)..n {
                let factor = a[i][k] / pivot;
                if factor == Complex::new(0.0, 0.0) {
                    continue;
                }
                a[i][k] = factor;
                let (upper, lower) = a.split_at_mut(i);
                for (x, &u) in lower[0][k + 1..].iter_mut().zip(&upper[k][k + 1..]) {
                    *x -= factor * u;
                    max_u = max_u.max(x.norm());
                }
            }
        }
        Ok(Self {
            lu: a,
            perm,
            growth: max_u / max_a,
        })
    }

    /// Element growth `max|U| / max|A|` observed during elimination.
    pub fn growth_factor(&self) -> f64 {
        self.growth
    }

    pub fn solve(&self, b: &[Complex]) -> Vec<Complex> {
        let n = self.lu.len();
        let mut x: Vec<Complex> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[i][j];
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = self.lu[i][j];
                x[i] = x[i] - u * x[j];
            }
            x[i] /= self.lu[i][i];
        }
        x
    }
}

/// S-parameters from one nodal solve, with conditioning diagnostics.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub s: SParams2,
    pub growth_factor: f64,
    pub warning: Option<String>,
}

/// Terminates both ports in `z0`, drives each in turn with a unit
/// Thevenin source, and reads the 2×2 S-matrix from the port voltages.
pub fn solve_sparams(net: &Netlist, omega: f64, z0: f64) -> Result<OracleSolution> {
    if !(z0 > 0.0) || !z0.is_finite() {
        return Err(Error::InvalidInput(format!("z0 must be positive, got {z0}")));
    }
    let mut sys = stamp_system(net, omega)?;
    let g0 = Complex::new(1.0 / z0, 0.0);
    sys.add_admittance(net.port1.0, net.port1.1, g0);
    sys.add_admittance(net.port2.0, net.port2.1, g0);

    // 1 V behind z0 is a 1/z0 Norton injection; incident wave is 0.5 V.
    let rhs1 = sys.injection(net.port1, 1.0 / z0);
    let rhs2 = sys.injection(net.port2, 1.0 / z0);
    let lu = LuFactors::factor(sys.matrix.clone())?;
    let x1 = lu.solve(&rhs1);
    let x2 = lu.solve(&rhs2);

    let s = SParams2 {
        s11: 2.0 * sys.voltage(&x1, net.port1) - 1.0,
        s21: 2.0 * sys.voltage(&x1, net.port2),
        s12: 2.0 * sys.voltage(&x2, net.port1),
        s22: 2.0 * sys.voltage(&x2, net.port2) - 1.0,
        z0_ohms: z0,
    };
    if !s.is_finite() {
        return Err(Error::Degenerate("non-finite nodal solution".into()));
    }
    let growth = lu.growth_factor();
    let warning = (growth > GROWTH_WARN)
        .then(|| format!("LU growth factor {growth:e} exceeds {GROWTH_WARN:e}"));
    Ok(OracleSolution {
        s,
        growth_factor: growth,
        warning,
    })
}
