//! The four convergence modes AE, AU, AUM and AUM′.
//!
//! On finite probability models with eventually-constant sequences all four
//! hold and are computed directly. The three built-in families live on `ℕ`
//! with counting measure, where the modes separate. Their bad sets have
//! closed forms (see [`NatSet`]); each reported status carries a certificate
//! that is checked against direct evaluation on a finite window.
//!
//! A report instantiates the outer `∀λ, ε` of each mode at the given values.
//! For the metastable modes the `∀F` is checked over a fixed probe family of
//! `F`, and a failure names the `F` that witnesses it.

mod family;
mod natset;

use std::collections::BTreeSet;

use num_traits::Signed;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use family::Family;
pub use natset::{ExtMeasure, NatSet};

use crate::derived::TotalFn;
use crate::measure::{bad_set, measure, FiniteProbSpace, FuncSeq, MeasureError, PointSet};
use crate::num::{fmt_rational, nat_to_usize, Nat, Rational};
use family::deviates;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModesError {
    #[error("window must be positive")]
    ZeroWindow,
    #[error("epsilon and lambda must be positive")]
    NonPositive,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Ae,
    Au,
    Aum,
    AumPrime,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Ae => "AE",
            Mode::Au => "AU",
            Mode::Aum => "AUM",
            Mode::AumPrime => "AUM'",
        }
    }
}

impl Serialize for Mode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeStatus {
    Holds,
    Fails,
    HoldsOnFiniteModel,
    /// Neither a bound nor a failure was found within the window.
    Unresolved,
}

impl ModeStatus {
    pub fn holds(self) -> bool {
        matches!(self, ModeStatus::Holds | ModeStatus::HoldsOnFiniteModel)
    }

    pub fn fails(self) -> bool {
        self == ModeStatus::Fails
    }
}

fn ser_rat<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(r))
}

fn ser_fn<S: Serializer>(f: &TotalFn, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(f)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeBound {
    #[serde(rename = "F", serialize_with = "ser_fn")]
    pub f: TotalFn,
    #[serde(rename = "M")]
    pub m: u64,
    pub measure: ExtMeasure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `f_n(x) = 0` for `n > x`, so every point converges to `0`.
    PointwiseZero { mode: Mode, window: u64 },
    /// The uniform bad set from index `m` has measure below `λ`.
    UniformIndex {
        mode: Mode,
        #[serde(serialize_with = "ser_rat")]
        epsilon: Rational,
        #[serde(serialize_with = "ser_rat")]
        lambda: Rational,
        m: u64,
        measure: ExtMeasure,
    },
    /// The uniform bad set has measure `≥ λ` for every `m ≤ window`.
    UniformFailure {
        mode: Mode,
        #[serde(serialize_with = "ser_rat")]
        epsilon: Rational,
        #[serde(serialize_with = "ser_rat")]
        lambda: Rational,
        window: u64,
        measures: Vec<ExtMeasure>,
    },
    /// For each probe `F`, a bound `M` whose metastable bad set is below `λ`.
    MetastableBounds {
        mode: Mode,
        #[serde(serialize_with = "ser_rat")]
        epsilon: Rational,
        #[serde(serialize_with = "ser_rat")]
        lambda: Rational,
        bounds: Vec<ProbeBound>,
    },
    /// For this `F` the metastable bad set has measure `≥ λ` for every `M ≤ window`.
    MetastableFailure {
        mode: Mode,
        #[serde(serialize_with = "ser_rat")]
        epsilon: Rational,
        #[serde(serialize_with = "ser_rat")]
        lambda: Rational,
        #[serde(rename = "F", serialize_with = "ser_fn")]
        f: TotalFn,
        window: u64,
        measures: Vec<ExtMeasure>,
    },
    /// Least uniform index on a finite model; for AE one index per point.
    FiniteWitness { mode: Mode, indices: Vec<usize> },
}

impl Certificate {
    pub fn mode(&self) -> Mode {
        match self {
            Certificate::PointwiseZero { mode, .. }
            | Certificate::UniformIndex { mode, .. }
            | Certificate::UniformFailure { mode, .. }
            | Certificate::MetastableBounds { mode, .. }
            | Certificate::MetastableFailure { mode, .. }
            | Certificate::FiniteWitness { mode, .. } => *mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Family(Family),
    Finite { space: FiniteProbSpace, fs: FuncSeq },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModeReport {
    pub family: String,
    #[serde(serialize_with = "ser_rat")]
    pub epsilon: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub lambda: Rational,
    pub window: u64,
    pub ae: ModeStatus,
    pub au: ModeStatus,
    pub aum: ModeStatus,
    pub aum_prime: ModeStatus,
    pub certificates: Vec<Certificate>,
    #[serde(skip)]
    pub source: Source,
}

impl ModeReport {
    pub fn status(&self, mode: Mode) -> ModeStatus {
        match mode {
            Mode::Ae => self.ae,
            Mode::Au => self.au,
            Mode::Aum => self.aum,
            Mode::AumPrime => self.aum_prime,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// `AU → AUM′ → AUM → AE`
    pub fn chain_violations(&self) -> Vec<String> {
        let chain = [Mode::Au, Mode::AumPrime, Mode::Aum, Mode::Ae];
        chain
            .windows(2)
            .filter(|w| self.status(w[0]).holds() && !self.status(w[1]).holds())
            .map(|w| format!("{}: {} without {}", self.family, w[0].label(), w[1].label()))
            .collect()
    }

    /// Re-checks every certificate from scratch.
    pub fn verify(&self) -> bool {
        self.certificates.iter().all(|c| match &self.source {
            Source::Family(fam) => verify_family_certificate(*fam, c),
            Source::Finite { space, fs } => {
                verify_finite_certificate(space, fs, &self.epsilon, &self.lambda, c).unwrap_or(false)
            }
        })
    }
}

/// `F` values tried for the metastable modes.
pub fn probe_functions() -> Vec<TotalFn> {
    let mut v: Vec<TotalFn> = (0..=4).map(|k| TotalFn::affine(1, k)).collect();
    v.push(TotalFn::affine(2, 1));
    v
}

fn at(f: &TotalFn, m: u64) -> u64 {
    let v = f.value(&Nat::from(m));
    nat_to_usize(&v).map(|v| v as u64).expect("probe values are small")
}

/// `⋂_{m ≤ M} ⋃_{n, n′ ∈ [m, F(m)]} {|f_n − f_{n′}| ≥ ε}`, or with the
/// limit `0` in place of `f_{n′}` for AUM′.
fn metastable_bad_set(fam: Family, mode: Mode, f: &TotalFn, big_m: u64, epsilon: &Rational) -> NatSet {
    let mut acc: Option<NatSet> = None;
    for m in 0..=big_m {
        let top = at(f, m);
        let mut term = NatSet::empty();
        for n in m..=top {
            if mode == Mode::AumPrime {
                term = term.union(&fam.limit_bad_set(n, epsilon));
            } else {
                for n2 in n + 1..=top {
                    term = term.union(&fam.pair_bad_set(n, n2, epsilon));
                }
            }
        }
        acc = Some(acc.map_or(term.clone(), |a| a.intersection(&term)));
    }
    acc.expect("m = 0 present")
}

fn direct_metastable_bad_set(fam: Family, mode: Mode, f: &TotalFn, big_m: u64, epsilon: &Rational, w: u64) -> BTreeSet<u64> {
    (0..=w)
        .filter(|&x| {
            (0..=big_m).all(|m| {
                let top = at(f, m);
                (m..=top).any(|n| {
                    if mode == Mode::AumPrime {
                        deviates(fam.value(n, x), 0, epsilon)
                    } else {
                        (m..=top).any(|n2| deviates(fam.value(n, x), fam.value(n2, x), epsilon))
                    }
                })
            })
        })
        .collect()
}

/// For `x ≤ w` every `f_n(x)` with `n > w + 1` equals `f_{w+1}(x)`.
fn direct_uniform_bad_set(fam: Family, m: u64, epsilon: &Rational, w: u64) -> BTreeSet<u64> {
    let top = (w + 1).max(m);
    (0..=w)
        .filter(|&x| (m..=top).any(|n| (m..=top).any(|n2| deviates(fam.value(n, x), fam.value(n2, x), epsilon))))
        .collect()
}

fn metastable_mode(fam: Family, mode: Mode, epsilon: &Rational, lambda: &Rational, window: u64) -> (ModeStatus, Certificate) {
    let mut bounds = Vec::new();
    for f in probe_functions() {
        let found = (0..=window).find_map(|big_m| {
            let measure = metastable_bad_set(fam, mode, &f, big_m, epsilon).measure();
            measure.lt(lambda).then_some((big_m, measure))
        });
        match found {
            Some((m, measure)) => bounds.push(ProbeBound { f, m, measure }),
            None => {
                let measures =
                    (0..=window).map(|big_m| metastable_bad_set(fam, mode, &f, big_m, epsilon).measure()).collect();
                let cert = Certificate::MetastableFailure {
                    mode,
                    epsilon: epsilon.clone(),
                    lambda: lambda.clone(),
                    f,
                    window,
                    measures,
                };
                return (ModeStatus::Fails, cert);
            }
        }
    }
    let cert = Certificate::MetastableBounds { mode, epsilon: epsilon.clone(), lambda: lambda.clone(), bounds };
    (ModeStatus::Holds, cert)
}

fn check_params(epsilon: &Rational, lambda: &Rational) -> Result<(), ModesError> {
    if !epsilon.is_positive() || !lambda.is_positive() {
        return Err(ModesError::NonPositive);
    }
    Ok(())
}

/// Classifies a built-in family at `(ε, λ)` with certificates checked on `[0, window]`.
pub fn classify_family(fam: Family, epsilon: &Rational, lambda: &Rational, window: u64) -> Result<ModeReport, ModesError> {
    if window == 0 {
        return Err(ModesError::ZeroWindow);
    }
    check_params(epsilon, lambda)?;
    let mut certificates = vec![Certificate::PointwiseZero { mode: Mode::Ae, window }];

    let au_found = (0..=window).find_map(|m| {
        let measure = fam.uniform_bad_set(m, epsilon).measure();
        measure.lt(lambda).then_some((m, measure))
    });
    let au = match au_found {
        Some((m, measure)) => {
            certificates.push(Certificate::UniformIndex {
                mode: Mode::Au,
                epsilon: epsilon.clone(),
                lambda: lambda.clone(),
                m,
                measure,
            });
            ModeStatus::Holds
        }
        None => {
            let measures = (0..=window).map(|m| fam.uniform_bad_set(m, epsilon).measure()).collect();
            certificates.push(Certificate::UniformFailure {
                mode: Mode::Au,
                epsilon: epsilon.clone(),
                lambda: lambda.clone(),
                window,
                measures,
            });
            ModeStatus::Fails
        }
    };
    let (aum, c) = metastable_mode(fam, Mode::Aum, epsilon, lambda, window);
    certificates.push(c);
    let (aum_prime, c) = metastable_mode(fam, Mode::AumPrime, epsilon, lambda, window);
    certificates.push(c);

    let report = ModeReport {
        family: fam.name().to_string(),
        epsilon: epsilon.clone(),
        lambda: lambda.clone(),
        window,
        ae: ModeStatus::Holds,
        au,
        aum,
        aum_prime,
        certificates,
        source: Source::Family(fam),
    };
    let unresolved = |s: ModeStatus, ok: bool| if ok { s } else { ModeStatus::Unresolved };
    let verified: Vec<(Mode, bool)> =
        report.certificates.iter().map(|c| (c.mode(), verify_family_certificate(fam, c))).collect();
    let ok = |mode: Mode| verified.iter().filter(|(m, _)| *m == mode).all(|(_, v)| *v);
    Ok(ModeReport {
        ae: unresolved(report.ae, ok(Mode::Ae)),
        au: unresolved(report.au, ok(Mode::Au)),
        aum: unresolved(report.aum, ok(Mode::Aum)),
        aum_prime: unresolved(report.aum_prime, ok(Mode::AumPrime)),
        ..report
    })
}

fn verify_family_certificate(fam: Family, cert: &Certificate) -> bool {
    match cert {
        Certificate::PointwiseZero { window, .. } => (0..=*window).all(|x| {
            (x + 1..=*window + 1).all(|n| fam.value(n, x) == 0)
                && (0..=*window).all(|n| fam.limit_bad_set(n, &Rational::from_integer(1.into())).restrict(*window).iter().all(|&y| y >= n))
        }),
        Certificate::UniformIndex { epsilon, lambda, m, measure, .. } => {
            let closed = fam.uniform_bad_set(*m, epsilon);
            closed.measure() == *measure
                && measure.lt(lambda)
                && closed.restrict(*m + 20) == direct_uniform_bad_set(fam, *m, epsilon, *m + 20)
        }
        Certificate::UniformFailure { epsilon, lambda, window, measures, .. } => {
            measures.len() as u64 == window + 1
                && (0..=*window).all(|m| {
                    let closed = fam.uniform_bad_set(m, epsilon);
                    closed.measure() == measures[m as usize]
                        && !measures[m as usize].lt(lambda)
                        && closed.restrict(*window) == direct_uniform_bad_set(fam, m, epsilon, *window)
                })
        }
        Certificate::MetastableBounds { mode, epsilon, lambda, bounds } => bounds.iter().all(|b| {
            let closed = metastable_bad_set(fam, *mode, &b.f, b.m, epsilon);
            let w = at(&b.f, b.m) + 1;
            closed.measure() == b.measure
                && b.measure.lt(lambda)
                && closed.restrict(w) == direct_metastable_bad_set(fam, *mode, &b.f, b.m, epsilon, w)
        }),
        Certificate::MetastableFailure { mode, epsilon, lambda, f, window, measures } => {
            measures.len() as u64 == window + 1
                && (0..=*window).all(|m| {
                    let closed = metastable_bad_set(fam, *mode, f, m, epsilon);
                    closed.measure() == measures[m as usize]
                        && !measures[m as usize].lt(lambda)
                        && closed.restrict(*window) == direct_metastable_bad_set(fam, *mode, f, m, epsilon, *window)
                })
        }
        Certificate::FiniteWitness { .. } => false,
    }
}

/// `{x : ∃n ∈ [m, b]. |f_n(x) − f_N(x)| ≥ ε}` with the tail `f_N` as limit.
fn deviation_set(fs: &FuncSeq, epsilon: &Rational, m: usize, b: usize) -> PointSet {
    let stab = fs.stab_index();
    if b < m {
        return PointSet::empty();
    }
    let hi = b.min(stab);
    let lo = m.min(stab);
    (0..fs.arity())
        .filter(|&x| (lo..=hi).any(|n| (&fs.get(n)[x] - &fs.tail()[x]).abs() >= *epsilon))
        .collect()
}

/// Worst-case metastable bad set for the uniform bound `M`: each term is
/// largest at `F(m) = max(m, N)`.
fn finite_metastable_bad(fs: &FuncSeq, epsilon: &Rational, mode: Mode, big_m: usize) -> PointSet {
    let stab = fs.stab_index();
    let mut acc: Option<PointSet> = None;
    for m in 0..=big_m {
        let b = m.max(stab);
        let term = match mode {
            Mode::AumPrime => deviation_set(fs, epsilon, m, b),
            _ => bad_set(fs, epsilon, &Nat::from(m), &Nat::from(b)),
        };
        acc = Some(acc.map_or(term.clone(), |a| a.intersection(&term)));
    }
    acc.expect("m = 0 present")
}

fn finite_index(space: &FiniteProbSpace, fs: &FuncSeq, epsilon: &Rational, lambda: &Rational, mode: Mode) -> Result<Option<usize>, MeasureError> {
    let stab = fs.stab_index();
    for m in 0..=stab {
        let set = match mode {
            Mode::Au => bad_set(fs, epsilon, &Nat::from(m), &Nat::from(stab.max(m))),
            _ => finite_metastable_bad(fs, epsilon, mode, m),
        };
        if &measure(space, &set)? < lambda {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

fn pointwise_indices(fs: &FuncSeq, epsilon: &Rational) -> Vec<usize> {
    let stab = fs.stab_index();
    (0..fs.arity())
        .map(|x| {
            (0..=stab)
                .find(|&m| !bad_set(fs, epsilon, &Nat::from(m), &Nat::from(stab.max(m))).contains(x))
                .expect("m = N works")
        })
        .collect()
}

/// Direct classification on a finite probability model, where all four modes coincide.
pub fn classify_finite(
    space: &FiniteProbSpace,
    fs: &FuncSeq,
    epsilon: &Rational,
    lambda: &Rational,
) -> Result<ModeReport, ModesError> {
    check_params(epsilon, lambda)?;
    fs.validate(space)?;
    let mut certificates = vec![Certificate::FiniteWitness { mode: Mode::Ae, indices: pointwise_indices(fs, epsilon) }];
    let mut statuses = Vec::new();
    for mode in [Mode::Au, Mode::Aum, Mode::AumPrime] {
        match finite_index(space, fs, epsilon, lambda, mode)? {
            Some(m) => {
                certificates.push(Certificate::FiniteWitness { mode, indices: vec![m] });
                statuses.push(ModeStatus::HoldsOnFiniteModel);
            }
            None => statuses.push(ModeStatus::Unresolved),
        }
    }
    Ok(ModeReport {
        family: "finite".to_string(),
        epsilon: epsilon.clone(),
        lambda: lambda.clone(),
        window: fs.stab_index() as u64,
        ae: ModeStatus::HoldsOnFiniteModel,
        au: statuses[0],
        aum: statuses[1],
        aum_prime: statuses[2],
        certificates,
        source: Source::Finite { space: space.clone(), fs: fs.clone() },
    })
}

fn verify_finite_certificate(
    space: &FiniteProbSpace,
    fs: &FuncSeq,
    epsilon: &Rational,
    lambda: &Rational,
    cert: &Certificate,
) -> Result<bool, MeasureError> {
    let stab = fs.stab_index();
    let Certificate::FiniteWitness { mode, indices } = cert else { return Ok(false) };
    match mode {
        Mode::Ae => Ok(indices.len() == fs.arity()
            && indices
                .iter()
                .enumerate()
                .all(|(x, &m)| !bad_set(fs, epsilon, &Nat::from(m), &Nat::from(stab.max(m))).contains(x))),
        Mode::Au => {
            let m = indices[0];
            Ok(&measure(space, &bad_set(fs, epsilon, &Nat::from(m), &Nat::from(stab.max(m))))? < lambda)
        }
        _ => Ok(&measure(space, &finite_metastable_bad(fs, epsilon, *mode, indices[0]))? < lambda),
    }
}

/// Outcome of checking the implication chain over a set of reports.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SuiteVerdict {
    pub reports: usize,
    pub violations: Vec<String>,
    pub unverified: Vec<String>,
    /// Families witnessing `AUM′ ∧ ¬AU`, `AUM ∧ ¬AUM′` and `AE ∧ ¬AUM`.
    pub gap_witnesses: [Vec<String>; 3],
}

impl SuiteVerdict {
    pub fn chain_holds(&self) -> bool {
        self.violations.is_empty() && self.unverified.is_empty()
    }

    pub fn gaps_witnessed(&self) -> bool {
        self.gap_witnesses.iter().all(|g| !g.is_empty())
    }
}

/// Checks `AU → AUM′ → AUM → AE` on every report and collects the
/// families separating each pair.
pub fn implication_suite(reports: &[ModeReport]) -> SuiteVerdict {
    let mut v = SuiteVerdict { reports: reports.len(), ..SuiteVerdict::default() };
    let pairs = [(Mode::AumPrime, Mode::Au), (Mode::Aum, Mode::AumPrime), (Mode::Ae, Mode::Aum)];
    for r in reports {
        v.violations.extend(r.chain_violations());
        if !r.verify() {
            v.unverified.push(r.family.clone());
        }
        for (i, (weak, strong)) in pairs.iter().enumerate() {
            if r.status(*weak).holds() && r.status(*strong).fails() && !v.gap_witnesses[i].contains(&r.family) {
                v.gap_witnesses[i].push(r.family.clone());
            }
        }
    }
    v
}
