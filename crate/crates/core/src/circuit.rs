//! The kicked-Ising Trotter step and the observables measured on it.
//!
//! One step is `U(θ) = Π_edges exp(iπ/4 Z_i Z_j) · Π_sites exp(-iθ/2 X_i)`:
//! the X layer acts first, then every ZZ gate. The ZZ angle is fixed, so
//! `θ` (the kick angle) is the only free parameter of the circuit.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::lattice::{Device, Graph, SystemSize};
use crate::tensor::{C64, ONE, ZERO};

pub type Matrix2 = [[C64; 2]; 2];
/// Two-qubit gate in the basis `|00>, |01>, |10>, |11>`; the first qubit is
/// the more significant bit.
pub type Matrix4 = [[C64; 4]; 4];

/// Hamiltonian metadata. Only `theta_h` enters the circuit; `coupling` and
/// `field` are carried along for bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KickedIsingParams {
    pub theta_h: f64,
    pub coupling: f64,
    pub field: f64,
}

impl KickedIsingParams {
    pub fn new(theta_h: f64) -> Self {
        Self { theta_h, coupling: 1.0, field: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    Forward,
    Adjoint,
}

/// `exp(iπ/4 Z⊗Z)`.
pub fn zz_gate() -> Matrix4 {
    let plus = C64::from_polar(1.0, FRAC_PI_4);
    let minus = plus.conj();
    let mut g = [[ZERO; 4]; 4];
    for (i, phase) in [plus, minus, minus, plus].into_iter().enumerate() {
        g[i][i] = phase;
    }
    g
}

/// `exp(-iθ/2 X) = cos(θ/2) I - i sin(θ/2) X`.
pub fn x_rotation(theta: f64) -> Matrix2 {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(theta / 2.0).sin());
    [[c, s], [s, c]]
}

pub fn adjoint2(g: &Matrix2) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = g[j][i].conj();
        }
    }
    out
}

pub fn adjoint4(g: &Matrix4) -> Matrix4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = g[j][i].conj();
        }
    }
    out
}

/// Largest elementwise deviation of `G†G` from the identity.
pub fn unitarity_defect<const N: usize>(g: &[[C64; N]; N]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..N {
        for j in 0..N {
            let mut acc = ZERO;
            for k in 0..N {
                acc += g[k][i].conj() * g[k][j];
            }
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((acc - target).norm());
        }
    }
    worst
}

/// A gate of the schedule, borrowed in application order.
#[derive(Clone, Copy, Debug)]
pub enum GateRef<'a> {
    Single(usize, &'a Matrix2),
    Pair((usize, usize), &'a Matrix4),
}

/// Gate layers of one Trotter step on a graph.
#[derive(Clone, Debug)]
pub struct TrotterSchedule {
    pub x_layer: Vec<(usize, Matrix2)>,
    /// Sorted by `(min vertex, max vertex)`.
    pub zz_layer: Vec<((usize, usize), Matrix4)>,
    pub direction: Direction,
}

impl TrotterSchedule {
    /// Every gate in the order it acts on the state.
    pub fn gates(&self) -> Vec<GateRef<'_>> {
        let xs = self.x_layer.iter().map(|(s, g)| GateRef::Single(*s, g));
        let zzs = self.zz_layer.iter().map(|(e, g)| GateRef::Pair(*e, g));
        match self.direction {
            Direction::Forward => xs.chain(zzs).collect(),
            Direction::Adjoint => zzs.chain(xs).collect(),
        }
    }
}

/// One Trotter step. Forward applies the X layer then the ZZ layer; the
/// adjoint step applies the conjugated ZZ layer first, then the conjugated
/// X layer.
pub fn build_schedule(g: &Graph, theta_h: f64, direction: Direction) -> TrotterSchedule {
    let (x, zz) = match direction {
        Direction::Forward => (x_rotation(theta_h), zz_gate()),
        Direction::Adjoint => (adjoint2(&x_rotation(theta_h)), adjoint4(&zz_gate())),
    };
    TrotterSchedule {
        x_layer: (0..g.num_vertices()).map(|s| (s, x)).collect(),
        zz_layer: g.edges().iter().map(|&e| (e, zz)).collect(),
        direction,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix2 {
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -i], [i, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-site Paulis, keyed by site.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PauliString(BTreeMap<usize, Pauli>);

impl PauliString {
    pub fn new(ops: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (site, p) in ops {
            if map.insert(site, p).is_some() {
                return invalid(format!("site {site} appears twice in Pauli string"));
            }
        }
        if map.is_empty() {
            return invalid("Pauli string must act on at least one site");
        }
        Ok(Self(map))
    }

    fn from_groups(groups: &[(Pauli, &[usize])]) -> Self {
        let ops = groups.iter().flat_map(|(p, sites)| sites.iter().map(move |&s| (s, *p)));
        Self::new(ops).expect("static Pauli strings are well formed")
    }

    pub fn weight(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, site: usize) -> Option<Pauli> {
        self.0.get(&site).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        self.0.iter().map(|(&s, &p)| (s, p))
    }

    pub fn max_site(&self) -> usize {
        *self.0.keys().next_back().expect("nonempty")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(s, p)| format!("{}{s}", p.letter())).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `X13,Y9,Z8`.
    fn from_str(s: &str) -> Result<Self> {
        let mut ops = Vec::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (head, site) = tok.split_at(1);
            let pauli = match head {
                "X" | "x" => Pauli::X,
                "Y" | "y" => Pauli::Y,
                "Z" | "z" => Pauli::Z,
                _ => return invalid(format!("bad Pauli factor {tok:?}")),
            };
            let site = site
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad site in Pauli factor {tok:?}")))?;
            ops.push((site, pauli));
        }
        Self::new(ops)
    }
}

/// The weight-10 and weight-17 observables measured on the 127-qubit chip.
pub fn w_observables_127() -> (PauliString, PauliString) {
    let w10 = PauliString::from_groups(&[
        (Pauli::X, &[13, 29, 31]),
        (Pauli::Y, &[9, 30]),
        (Pauli::Z, &[8, 12, 17, 28, 32]),
    ]);
    let w17 = PauliString::from_groups(&[
        (Pauli::X, &[37, 41, 52, 56, 57, 58, 62, 79]),
        (Pauli::Y, &[75]),
        (Pauli::Z, &[38, 40, 42, 63, 72, 80, 90, 91]),
    ]);
    (w10, w17)
}

/// Site whose back-propagated `Z` gives the weight-10 (`P`) or weight-17
/// (`Q`) observable on each lattice size.
pub fn anchor_site(size: SystemSize, weight: usize) -> Result<usize> {
    let site = match (size, weight) {
        (SystemSize::Device(Device::Eagle127), 10) => 13,
        (SystemSize::Device(Device::Osprey433), 10) => 25,
        (SystemSize::Device(Device::Condor1121), 10) => 41,
        (SystemSize::Device(Device::Eagle127), 17) => 62,
        (SystemSize::Device(Device::Osprey433), 17) => 181,
        (SystemSize::Device(Device::Condor1121), 17) => 505,
        (SystemSize::Infinite, 17) => 2,
        _ => return Err(Error::UndefinedObservable(format!("weight-{weight} observable on {size}"))),
    };
    Ok(site)
}

/// A measurement request, resolved against a lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observable {
    SingleZ(usize),
    AverageZ,
    PauliString(PauliString),
    /// `<ψ| U^n(π/2) Z_anchor U†^n(π/2) |ψ>`, evaluated by back-evolving the
    /// state `back_steps` adjoint steps at the Clifford point.
    CliffordWeightN { anchor: usize, back_steps: usize },
}

impl Observable {
    /// Site recorded alongside the value, if the observable has one.
    pub fn site(&self) -> Option<usize> {
        match self {
            Observable::SingleZ(s) => Some(*s),
            Observable::CliffordWeightN { anchor, .. } => Some(*anchor),
            _ => None,
        }
    }

    pub fn validate(&self, num_sites: usize) -> Result<()> {
        let max = match self {
            Observable::SingleZ(s) => *s,
            Observable::CliffordWeightN { anchor, .. } => *anchor,
            Observable::PauliString(p) => p.max_site(),
            Observable::AverageZ => return Ok(()),
        };
        if max >= num_sites {
            return invalid(format!("site {max} out of range for {num_sites} sites"));
        }
        Ok(())
    }
}

/// Observable as written on the command line: `avg_z`, `z@62`, `w17@n5`,
/// `w10`, `omega@13@n5`, `pauli:X13,Y9,Z8`. A missing `@n` means "as many
/// back steps as forward steps".
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObservableSpec {
    AverageZ,
    SingleZ(usize),
    Pauli(PauliString),
    Weight { weight: usize, back_steps: Option<usize> },
    Omega { anchor: usize, back_steps: Option<usize> },
}

fn parse_back_steps(rest: &str, whole: &str) -> Result<Option<usize>> {
    if rest.is_empty() {
        return Ok(None);
    }
    rest.strip_prefix("@n")
        .and_then(|n| n.parse().ok())
        .map(Some)
        .ok_or_else(|| Error::InvalidArgument(format!("bad observable {whole:?}")))
}

impl FromStr for ObservableSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("bad observable {s:?}"));
        if s == "avg_z" {
            return Ok(ObservableSpec::AverageZ);
        }
        if let Some(site) = s.strip_prefix("z@") {
            return site.parse().map(ObservableSpec::SingleZ).map_err(|_| bad());
        }
        if let Some(body) = s.strip_prefix("pauli:") {
            return body.parse().map(ObservableSpec::Pauli);
        }
        for (prefix, weight) in [("w10", 10), ("w17", 17)] {
            if let Some(rest) = s.strip_prefix(prefix) {
                return Ok(ObservableSpec::Weight { weight, back_steps: parse_back_steps(rest, s)? });
            }
        }
        if let Some(rest) = s.strip_prefix("omega@") {
            let split = rest.find('@').unwrap_or(rest.len());
            let anchor = rest[..split].parse().map_err(|_| bad())?;
            return Ok(ObservableSpec::Omega { anchor, back_steps: parse_back_steps(&rest[split..], s)? });
        }
        Err(bad())
    }
}

impl fmt::Display for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = |b: &Option<usize>| b.map(|n| format!("@n{n}")).unwrap_or_default();
        match self {
            ObservableSpec::AverageZ => f.write_str("avg_z"),
            ObservableSpec::SingleZ(s) => write!(f, "z@{s}"),
            ObservableSpec::Pauli(p) => write!(f, "pauli:{p}"),
            ObservableSpec::Weight { weight, back_steps } => write!(f, "w{weight}{}", n(back_steps)),
            ObservableSpec::Omega { anchor, back_steps } => write!(f, "omega@{anchor}{}", n(back_steps)),
        }
    }
}

impl ObservableSpec {
    /// Fills in defaults (back steps = `steps`), looks up anchors, and
    /// checks sites against the lattice. Returns the observable and its
    /// canonical id. Without a named size, weight observables are undefined.
    pub fn resolve(&self, size: Option<SystemSize>, steps: usize, num_sites: usize) -> Result<(Observable, String)> {
        let filled = match self {
            ObservableSpec::Weight { weight, back_steps } => {
                ObservableSpec::Weight { weight: *weight, back_steps: Some(back_steps.unwrap_or(steps)) }
            }
            ObservableSpec::Omega { anchor, back_steps } => {
                ObservableSpec::Omega { anchor: *anchor, back_steps: Some(back_steps.unwrap_or(steps)) }
            }
            other => other.clone(),
        };
        let obs = match &filled {
            ObservableSpec::AverageZ => Observable::AverageZ,
            ObservableSpec::SingleZ(s) => Observable::SingleZ(*s),
            ObservableSpec::Pauli(p) => Observable::PauliString(p.clone()),
            ObservableSpec::Weight { weight, back_steps } => Observable::CliffordWeightN {
                anchor: match size {
                    Some(size) => anchor_site(size, *weight)?,
                    None => return Err(Error::UndefinedObservable(format!("weight-{weight} observable on a custom graph"))),
                },
                back_steps: back_steps.unwrap_or(steps),
            },
            ObservableSpec::Omega { anchor, back_steps } => Observable::CliffordWeightN {
                anchor: *anchor,
                back_steps: back_steps.unwrap_or(steps),
            },
        };
        obs.validate(num_sites)?;
        Ok((obs, filled.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_heavy_hex, Fixture};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn close2(a: &Matrix2, b: &Matrix2, tol: f64) -> bool {
        a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn zz_gate_entries() {
        let g = zz_gate();
        assert!((g[0][0] - C64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-16);
        assert!((g[1][1] - C64::from_polar(1.0, -FRAC_PI_4)).norm() < 1e-16);
        assert!((g[2][2] - g[1][1]).norm() == 0.0 && (g[3][3] - g[0][0]).norm() == 0.0);
        assert!(unitarity_defect(&g) <= 1e-15);
    }

    #[test]
    fn x_rotation_special_angles() {
        let id = [[ONE, ZERO], [ZERO, ONE]];
        assert!(close2(&x_rotation(0.0), &id, 0.0));
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let mh = C64::new(0.0, -FRAC_1_SQRT_2);
        assert!(close2(&x_rotation(FRAC_PI_2), &[[h, mh], [mh, h]], 1e-15));
        let mi = C64::new(0.0, -1.0);
        assert!(close2(&x_rotation(PI), &[[ZERO, mi], [mi, ZERO]], 1e-15));
        for theta in [0.1, 0.7, 1.3, 3.0] {
            assert!(unitarity_defect(&x_rotation(theta)) <= 1e-12);
        }
    }

    #[test]
    fn schedule_structure() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let s = build_schedule(&g, 0.4, Direction::Forward);
        let gates = s.gates();
        assert_eq!(gates.len(), 3);
        assert!(matches!(gates[0], GateRef::Single(0, _)));
        assert!(matches!(gates[1], GateRef::Single(1, _)));
        assert!(matches!(gates[2], GateRef::Pair((0, 1), _)));

        let adj = build_schedule(&g, 0.4, Direction::Adjoint);
        assert!(matches!(adj.gates()[0], GateRef::Pair((0, 1), _)));
        assert!(close2(&adj.x_layer[0].1, &adjoint2(&x_rotation(0.4)), 0.0));
    }

    #[test]
    fn schedule_covers_graph_once() {
        let g = build_heavy_hex(Device::Eagle127);
        let s = build_schedule(&g, 0.0, Direction::Forward);
        assert_eq!(s.x_layer.len(), 127);
        assert_eq!(s.zz_layer.len(), g.num_edges());
        let edges: Vec<_> = s.zz_layer.iter().map(|(e, _)| *e).collect();
        assert_eq!(edges, g.edges());
        let id = [[ONE, ZERO], [ZERO, ONE]];
        assert!(s.x_layer.iter().all(|(_, x)| close2(x, &id, 0.0)));
        assert!(s.zz_layer.iter().all(|(_, zz)| unitarity_defect(zz) <= 1e-12));
    }

    #[test]
    fn w_strings_as_printed() {
        let (w10, w17) = w_observables_127();
        assert_eq!(w10.weight(), 10);
        assert_eq!(w17.weight(), 17);
        assert_eq!(w10.get(9), Some(Pauli::Y));
        assert_eq!(w17.get(75), Some(Pauli::Y));
        assert_eq!(w10.to_string(), "Z8,Y9,Z12,X13,Z17,Z28,X29,Y30,X31,Z32");
    }

    #[test]
    fn anchor_table() {
        let eagle = SystemSize::Device(Device::Eagle127);
        assert_eq!(anchor_site(eagle, 17).unwrap(), 62);
        assert_eq!(anchor_site(eagle, 10).unwrap(), 13);
        assert_eq!(anchor_site(SystemSize::Device(Device::Condor1121), 10).unwrap(), 41);
        assert_eq!(anchor_site(SystemSize::Device(Device::Osprey433), 17).unwrap(), 181);
        assert_eq!(anchor_site(SystemSize::Infinite, 17).unwrap(), 2);
        assert!(matches!(anchor_site(SystemSize::Infinite, 10), Err(Error::UndefinedObservable(_))));
        assert!(anchor_site(SystemSize::Fixture(Fixture::Path8), 17).is_err());
    }

    #[test]
    fn observable_strings() {
        let eagle = SystemSize::Device(Device::Eagle127);
        let cases = [
            ("avg_z", Observable::AverageZ, "avg_z"),
            ("z@62", Observable::SingleZ(62), "z@62"),
            ("w17@n5", Observable::CliffordWeightN { anchor: 62, back_steps: 5 }, "w17@n5"),
            ("w10", Observable::CliffordWeightN { anchor: 13, back_steps: 4 }, "w10@n4"),
            ("omega@58", Observable::CliffordWeightN { anchor: 58, back_steps: 4 }, "omega@58@n4"),
        ];
        for (text, expected, id) in cases {
            let spec: ObservableSpec = text.parse().unwrap();
            let (obs, canon) = spec.resolve(Some(eagle), 4, 127).unwrap();
            assert_eq!(obs, expected, "{text}");
            assert_eq!(canon, id);
        }
        let spec: ObservableSpec = "pauli:X13,Y9,Z8".parse().unwrap();
        assert_eq!(spec.to_string(), "pauli:Z8,Y9,X13");
        for bad in ["avg", "z@", "z@x", "w12", "w17@5", "pauli:", "pauli:Q3", "pauli:X1,Z1", "omega@"] {
            assert!(bad.parse::<ObservableSpec>().is_err(), "{bad}");
        }
        assert!("z@127".parse::<ObservableSpec>().unwrap().resolve(Some(eagle), 1, 127).is_err());
        assert!(matches!(
            "w10".parse::<ObservableSpec>().unwrap().resolve(Some(SystemSize::Infinite), 5, 10),
            Err(Error::UndefinedObservable(_))
        ));
    }

    /// Heisenberg-picture conjugation `O -> U(π/2) O U(π/2)†` of a Pauli
    /// string, tracked symbolically. Used as an independent check of the
    /// lattice labelling against the printed weight-N strings.
    mod clifford {
        use super::*;
        use std::collections::BTreeMap;

        // (phase exponent of i, product) for single-site a*b
        fn mul(a: Pauli, b: Pauli) -> (u8, Option<Pauli>) {
            use Pauli::*;
            match (a, b) {
                _ if a == b => (0, None),
                (X, Y) => (1, Some(Z)),
                (Y, X) => (3, Some(Z)),
                (Y, Z) => (1, Some(X)),
                (Z, Y) => (3, Some(X)),
                (Z, X) => (1, Some(Y)),
                (X, Z) => (3, Some(Y)),
                _ => unreachable!(),
            }
        }

        pub fn conjugate(ops: &BTreeMap<usize, Pauli>, sign: i8, g: &Graph) -> (BTreeMap<usize, Pauli>, i8) {
            // X layer: Z -> -Y, Y -> Z
            let mut sign = sign;
            let mut cur: BTreeMap<usize, Pauli> = BTreeMap::new();
            for (&s, &p) in ops {
                let q = match p {
                    Pauli::X => Pauli::X,
                    Pauli::Y => Pauli::Z,
                    Pauli::Z => {
                        sign = -sign;
                        Pauli::Y
                    }
                };
                cur.insert(s, q);
            }
            // ZZ layer: anticommuting P -> i Z_a Z_b P
            for &(a, b) in g.edges() {
                let anti = |s: usize| matches!(cur.get(&s), Some(Pauli::X | Pauli::Y));
                if anti(a) ^ anti(b) {
                    let mut phase = 1u8;
                    for s in [a, b] {
                        match cur.get(&s).copied() {
                            None => {
                                cur.insert(s, Pauli::Z);
                            }
                            Some(p) => {
                                let (ph, r) = mul(Pauli::Z, p);
                                phase += ph;
                                match r {
                                    Some(r) => cur.insert(s, r),
                                    None => cur.remove(&s),
                                };
                            }
                        }
                    }
                    match phase % 4 {
                        0 => {}
                        2 => sign = -sign,
                        _ => unreachable!("Hermitian strings stay Hermitian"),
                    }
                }
            }
            (cur, sign)
        }
    }

    fn back_propagate(g: &Graph, anchor: usize, n: usize) -> BTreeMap<usize, Pauli> {
        let mut ops = BTreeMap::from([(anchor, Pauli::Z)]);
        let mut sign = 1;
        for _ in 0..n {
            (ops, sign) = clifford::conjugate(&ops, sign, g);
        }
        ops
    }

    #[test]
    fn weight_10_is_back_propagated_z13() {
        let g = build_heavy_hex(Device::Eagle127);
        let (w10, _) = w_observables_127();
        assert_eq!(back_propagate(&g, 13, 5), w10.0);
    }

    #[test]
    fn printed_weight_17_string_comes_from_z58() {
        let g = build_heavy_hex(Device::Eagle127);
        let (_, w17) = w_observables_127();
        assert_eq!(back_propagate(&g, 58, 5), w17.0);
        let from_62 = back_propagate(&g, 62, 5);
        assert_eq!(from_62.len(), 19);
        assert_ne!(from_62, w17.0);
    }
}
