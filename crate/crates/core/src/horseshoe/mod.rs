//! Horseshoes subordinate to constraint sets: construction through the
//! partition `P_n(η)` and the uniform scale search, verification, and the
//! free-energy lower bound they certify. Also the Katok-type blocks used for
//! lower bounds.

mod build;
mod katok;

pub use build::{build_horseshoe, default_rho, BuildTrace, HorseshoeParams, Route};
pub use katok::{katok_blocks, KatokBlocks, KatokTarget};

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{birkhoff_unchecked, Interval, MapSpec, Observable, ObservableSpec, SmoothMap};
use crate::pullback::{distortion, fold_witness, image_iter};

/// Tolerance on `f^q(L_i) = B` at the endpoints.
pub const IMAGE_TOL: f64 = 1e-6;
/// Sample points per branch for the average clause.
pub const CLAUSE_SAMPLES: usize = 17;

/// `S_nφ(x)/n ≥ α`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub phi: Observable,
    pub alpha: f64,
    /// Config form of `phi`, needed to export certificates.
    pub spec: Option<ObservableSpec>,
}

impl Constraint {
    pub fn new(phi: Observable, alpha: f64) -> Self {
        Constraint {
            phi,
            alpha,
            spec: None,
        }
    }

    pub fn from_spec(map: &SmoothMap, spec: ObservableSpec, alpha: f64) -> Self {
        Constraint {
            phi: spec.build(map),
            alpha,
            spec: Some(spec),
        }
    }
}

/// `H_n = {x : S_nφ_j(x)/n ≥ α_j for all j}`.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
    pub n: usize,
}

impl ConstraintSet {
    /// No constraints, so `H_n` is the whole interval.
    pub fn trivial(n: usize) -> Self {
        ConstraintSet {
            constraints: Vec::new(),
            n,
        }
    }

    pub fn single(phi: Observable, alpha: f64, n: usize) -> Self {
        ConstraintSet {
            constraints: vec![Constraint::new(phi, alpha)],
            n,
        }
    }

    pub fn contains(&self, map: &SmoothMap, x: f64) -> bool {
        let n = self.n as f64;
        self.constraints
            .iter()
            .all(|c| birkhoff_unchecked(map, &c.phi, x, self.n) / n >= c.alpha)
    }
}

/// Disjoint closed intervals `L_i ⊂ B` that `f^q` maps diffeomorphically
/// onto `B`.
#[derive(Debug, Clone)]
pub struct Horseshoe {
    pub base: Interval,
    pub q: usize,
    pub branches: Vec<Interval>,
    /// Δ: the largest measured distortion of `f^q` over the branches.
    pub distortion_bound: f64,
    pub constraints: ConstraintSet,
    /// Constants the clauses are checked against: `q − n ≤ c·ln n` and the
    /// averaging slack `(1 + Lip φ)ε`.
    pub c: f64,
    pub epsilon: f64,
    /// Element `W ∈ Q_n` each branch was pulled back inside, when known.
    pub sources: Vec<Option<Interval>>,
    /// `Σ_{W ∈ Q_n} |W|`, when known.
    pub q_n_mass: Option<f64>,
    pub trace: Option<BuildTrace>,
    certified: Option<u64>,
}

impl Horseshoe {
    pub fn new(
        base: Interval,
        q: usize,
        branches: Vec<Interval>,
        distortion_bound: f64,
        constraints: ConstraintSet,
        c: f64,
        epsilon: f64,
    ) -> Self {
        let sources = vec![None; branches.len()];
        Horseshoe {
            base,
            q,
            branches,
            distortion_bound,
            constraints,
            c,
            epsilon,
            sources,
            q_n_mass: None,
            trace: None,
            certified: None,
        }
    }

    pub fn n(&self) -> usize {
        self.constraints.n
    }

    pub fn total_length(&self) -> f64 {
        self.branches.iter().map(Interval::len).sum()
    }

    fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.q.hash(&mut h);
        self.constraints.n.hash(&mut h);
        for v in [self.base.lo, self.base.hi, self.distortion_bound, self.c, self.epsilon] {
            v.to_bits().hash(&mut h);
        }
        for b in &self.branches {
            b.lo.to_bits().hash(&mut h);
            b.hi.to_bits().hash(&mut h);
        }
        for c in &self.constraints.constraints {
            c.alpha.to_bits().hash(&mut h);
        }
        h.finish()
    }

    /// Runs [`verify_horseshoe`] and marks the horseshoe as verified when
    /// every clause passes.
    pub fn certify(mut self, map: &SmoothMap) -> Result<(Self, VerifyReport)> {
        let report = verify_horseshoe(map, &self);
        if !report.passed() {
            return Err(Error::ConstructionRejected(report.summary()));
        }
        self.certified = Some(self.fingerprint());
        Ok((self, report))
    }

    pub fn is_certified(&self) -> bool {
        self.certified == Some(self.fingerprint())
    }
}

/// One clause with the first failing witness, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub pass: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Offending branch, if the clause is per branch.
    pub branch: Option<usize>,
    pub x: f64,
    pub value: f64,
    pub message: String,
}

impl Clause {
    fn ok() -> Self {
        Clause {
            pass: true,
            witness: None,
        }
    }

    fn fail(branch: Option<usize>, x: f64, value: f64, message: String) -> Self {
        Clause {
            pass: false,
            witness: Some(Witness {
                branch,
                x,
                value,
                message,
            }),
        }
    }
}

/// Outcome of [`verify_horseshoe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// (a) `n ≤ q ≤ n + c·ln n`.
    pub time: Clause,
    /// (b) every branch maps diffeomorphically onto the base with
    /// distortion at most Δ.
    pub diffeomorphic: Clause,
    pub disjoint: Clause,
    /// Every branch lies in the base.
    pub contained: Clause,
    /// (c) `S_qφ_j(x)/q > α_j − (1 + Lip φ_j)ε` at sampled points.
    pub averages: Clause,
    /// Largest measured distortion over the branches.
    pub measured_distortion: f64,
    /// Recorded, not required: `Δ ≤ e^{εn}`.
    pub distortion_within_growth: bool,
    /// Recorded, not required: `|L_i| ≥ e^{−(3/4)εn}|W|` for branches with
    /// a known source `W`. `None` when no source is known.
    pub branch_mass: Option<Clause>,
    /// Recorded, not required: `Σ_{Q_n}|W| ≤ e^{εn} Σ|L_i|`.
    pub total_mass: Option<bool>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.time.pass
            && self.diffeomorphic.pass
            && self.disjoint.pass
            && self.contained.pass
            && self.averages.pass
    }

    pub fn summary(&self) -> String {
        let mut out = Vec::new();
        for (name, c) in [
            ("a", &self.time),
            ("b", &self.diffeomorphic),
            ("disjoint", &self.disjoint),
            ("contained", &self.contained),
            ("c", &self.averages),
        ] {
            if let Some(w) = &c.witness {
                out.push(format!("clause {name} failed: {}", w.message));
            }
        }
        if out.is_empty() {
            "all clauses pass".into()
        } else {
            out.join("; ")
        }
    }
}

pub fn verify_horseshoe(map: &SmoothMap, hs: &Horseshoe) -> VerifyReport {
    let n = hs.n();
    let q = hs.q;
    let budget = hs.c * (n as f64).ln();
    let time = if q >= n && (q - n) as f64 <= budget + 1e-12 {
        Clause::ok()
    } else {
        Clause::fail(
            None,
            f64::NAN,
            q as f64,
            format!("q = {q} outside [{n}, {n} + {budget:.3}]"),
        )
    };

    let mut diffeomorphic = Clause::ok();
    let mut measured: f64 = 1.0;
    for (i, l) in hs.branches.iter().enumerate() {
        if let Some((k, t)) = fold_witness(map, l, q) {
            diffeomorphic = Clause::fail(
                Some(i),
                t,
                k as f64,
                format!("f^{k}(L_{i}) contains the fold {t}"),
            );
            break;
        }
        let img = image_iter(map, l, q);
        let (elo, ehi) = ((img.lo - hs.base.lo).abs(), (img.hi - hs.base.hi).abs());
        if elo > IMAGE_TOL || ehi > IMAGE_TOL {
            let x = if elo >= ehi {
                if map.iterate(l.lo, q) <= map.iterate(l.hi, q) { l.lo } else { l.hi }
            } else if map.iterate(l.lo, q) <= map.iterate(l.hi, q) {
                l.hi
            } else {
                l.lo
            };
            diffeomorphic = Clause::fail(
                Some(i),
                x,
                map.iterate(x, q),
                format!("f^q(L_{i}) = {img} is not the base {}", hs.base),
            );
            break;
        }
        match distortion(map, l, q, CLAUSE_SAMPLES) {
            Ok(d) => {
                measured = measured.max(d);
                if d > hs.distortion_bound * (1.0 + 1e-9) {
                    diffeomorphic = Clause::fail(
                        Some(i),
                        l.mid(),
                        d,
                        format!("distortion {d:.4} on L_{i} exceeds Δ = {}", hs.distortion_bound),
                    );
                    break;
                }
            }
            Err(Error::NotDiffeomorphic { witness }) => {
                diffeomorphic = Clause::fail(
                    Some(i),
                    witness,
                    0.0,
                    format!("f^q is not a diffeomorphism on L_{i}"),
                );
                break;
            }
            Err(e) => {
                diffeomorphic = Clause::fail(Some(i), l.mid(), f64::NAN, e.to_string());
                break;
            }
        }
    }

    let mut order: Vec<usize> = (0..hs.branches.len()).collect();
    order.sort_by(|&a, &b| hs.branches[a].lo.total_cmp(&hs.branches[b].lo));
    let mut disjoint = Clause::ok();
    for w in order.windows(2) {
        let (a, b) = (&hs.branches[w[0]], &hs.branches[w[1]]);
        if b.lo <= a.hi {
            disjoint = Clause::fail(
                Some(w[1]),
                b.lo,
                a.hi - b.lo,
                format!("L_{} and L_{} intersect", w[0], w[1]),
            );
            break;
        }
    }

    let contained = match hs
        .branches
        .iter()
        .position(|l| !hs.base.contains_interval(l, 0.0))
    {
        None => Clause::ok(),
        Some(i) => Clause::fail(
            Some(i),
            hs.branches[i].mid(),
            0.0,
            format!("L_{i} = {} is not inside the base", hs.branches[i]),
        ),
    };

    let mut averages = Clause::ok();
    'outer: for (i, l) in hs.branches.iter().enumerate() {
        for c in &hs.constraints.constraints {
            let slack = (1.0 + c.phi.lip_bound()) * hs.epsilon;
            for x in l.linspace(CLAUSE_SAMPLES) {
                let avg = birkhoff_unchecked(map, &c.phi, x, q) / q as f64;
                if !(avg > c.alpha - slack) {
                    averages = Clause::fail(
                        Some(i),
                        x,
                        avg,
                        format!("S_qφ/q = {avg:.5} ≤ {:.5} at {x}", c.alpha - slack),
                    );
                    break 'outer;
                }
            }
        }
    }

    let growth = (hs.epsilon * n as f64).exp();
    let branch_mass = if hs.sources.iter().any(Option::is_some) {
        let factor = (-0.75 * hs.epsilon * n as f64).exp();
        let bad = hs
            .branches
            .iter()
            .zip(&hs.sources)
            .enumerate()
            .find(|(_, (l, w))| w.is_some_and(|w| l.len() < factor * w.len() * (1.0 - 1e-9)));
        Some(match bad {
            None => Clause::ok(),
            Some((i, (l, w))) => Clause::fail(
                Some(i),
                l.mid(),
                l.len() / w.unwrap().len(),
                format!("|L_{i}|/|W| below e^(-3εn/4) = {factor:.3e}"),
            ),
        })
    } else {
        None
    };
    let total_mass = hs.q_n_mass.map(|m| m <= growth * hs.total_length());

    VerifyReport {
        time,
        diffeomorphic,
        disjoint,
        contained,
        averages,
        measured_distortion: measured,
        distortion_within_growth: measured <= growth,
        branch_mass,
        total_mass,
    }
}

/// `(1/q) log(Σ|L_i| / (Δ|B|))`.
pub fn horseshoe_bound(total_length: f64, delta: f64, base_length: f64, q: usize) -> Result<f64> {
    if q == 0 || !(delta >= 1.0) || !(base_length > 0.0) || !(total_length > 0.0) {
        return Err(Error::arg(
            "bound needs q >= 1, delta >= 1 and positive lengths",
        ));
    }
    Ok((total_length / (delta * base_length)).ln() / q as f64)
}

/// Lower bound on the free energy of some invariant measure supported on
/// the horseshoe's invariant set.
pub fn free_energy_lower_bound(hs: &Horseshoe) -> Result<f64> {
    if !hs.is_certified() {
        return Err(Error::Precondition(
            "free_energy_lower_bound needs a verified horseshoe".into(),
        ));
    }
    horseshoe_bound(hs.total_length(), hs.distortion_bound, hs.base.len(), hs.q)
}

/// JSON form of a horseshoe: enough to rebuild and re-verify it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HorseshoeCertificate {
    pub map: MapSpec,
    pub base: Interval,
    pub q: usize,
    pub n: usize,
    pub branches: Vec<Interval>,
    pub delta: f64,
    pub c: f64,
    pub epsilon: f64,
    pub constraints: Vec<ConstraintRecord>,
    pub checks: Option<VerifyReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub observable: ObservableSpec,
    pub alpha: f64,
}

impl HorseshoeCertificate {
    pub fn new(map: &SmoothMap, hs: &Horseshoe, checks: Option<VerifyReport>) -> Result<Self> {
        let constraints = hs
            .constraints
            .constraints
            .iter()
            .map(|c| {
                c.spec
                    .clone()
                    .map(|observable| ConstraintRecord {
                        observable,
                        alpha: c.alpha,
                    })
                    .ok_or_else(|| Error::arg("a constraint without a config form cannot be exported"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HorseshoeCertificate {
            map: map.spec().clone(),
            base: hs.base,
            q: hs.q,
            n: hs.n(),
            branches: hs.branches.clone(),
            delta: hs.distortion_bound,
            c: hs.c,
            epsilon: hs.epsilon,
            constraints,
            checks,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The map and an unverified horseshoe, ready for [`verify_horseshoe`].
    pub fn load(&self) -> Result<(SmoothMap, Horseshoe)> {
        let map = SmoothMap::from_spec(&self.map)?;
        let constraints = ConstraintSet {
            constraints: self
                .constraints
                .iter()
                .map(|r| Constraint::from_spec(&map, r.observable.clone(), r.alpha))
                .collect(),
            n: self.n,
        };
        let hs = Horseshoe::new(
            self.base,
            self.q,
            self.branches.clone(),
            self.delta,
            constraints,
            self.c,
            self.epsilon,
        );
        Ok((map, hs))
    }
}
