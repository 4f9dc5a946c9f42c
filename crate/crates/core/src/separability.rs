//! Separability patterns, their Fourier-side tests, and the canonical
//! decompositions obtained from restricted inverse transforms.
//!
//! A potential is `(s,t)`-separable exactly when every Fourier coefficient
//! with `l_s ≠ 0` and `l_t ≠ 0` vanishes. Block and shared-block (`⊕`)
//! patterns reduce to a conjunction of such pair conditions.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{unit_root, BlockPartition};
use crate::potential::{FourierTable, Potential};

/// Coordinates are 0-based; the textual form is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// `V = V_s(n without n_t) + V_t(n without n_s)`, `s < t`.
    Pair(usize, usize),
    /// `V = Σ_m V_m(ñ_m)` over contiguous blocks.
    Blocks(Vec<usize>),
    /// `V = Σ_{j<r} V_j(ñ_j, ñ_r)`: every summand shares the final block.
    OPlus(Vec<usize>, usize),
}

impl Pattern {
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            Pattern::Pair(s, t) => {
                if !(s < t && *t < d) {
                    return Err(Error::BadPattern(format!("pair {self} needs 1 ≤ s < t ≤ {d}")));
                }
            }
            Pattern::Blocks(sizes) => {
                BlockPartition::new(sizes)?;
                if sizes.len() < 2 || sizes.iter().sum::<usize>() != d {
                    return Err(Error::BadPattern(format!(
                        "{self} needs at least 2 blocks summing to {d}"
                    )));
                }
            }
            Pattern::OPlus(sizes, shared) => {
                BlockPartition::new(sizes)?;
                if sizes.len() < 2 || *shared == 0 || sizes.iter().sum::<usize>() + shared != d {
                    return Err(Error::BadPattern(format!(
                        "{self} needs at least 2 summand blocks plus a non-empty shared block, summing to {d}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Coordinate groups that must not interact, plus the shared coordinates
    /// every component may depend on.
    fn groups(&self, d: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
        match self {
            Pattern::Pair(s, t) => (
                vec![vec![*s], vec![*t]],
                (0..d).filter(|c| c != s && c != t).collect(),
            ),
            Pattern::Blocks(sizes) => (contiguous(sizes, 0), Vec::new()),
            Pattern::OPlus(sizes, shared) => {
                let lead: usize = sizes.iter().sum();
                (contiguous(sizes, 0), (lead..lead + shared).collect())
            }
        }
    }

    /// The coordinate support of each component, sorted.
    pub fn supports(&self, d: usize) -> Vec<Vec<usize>> {
        let (groups, shared) = self.groups(d);
        groups
            .into_iter()
            .map(|g| {
                let mut s: Vec<usize> = g.into_iter().chain(shared.iter().copied()).collect();
                s.sort_unstable();
                s
            })
            .collect()
    }

    /// Every `(s, t)` whose pair separability is equivalent, jointly, to this
    /// pattern.
    pub fn required_pairs(&self, d: usize) -> Vec<(usize, usize)> {
        let (groups, _) = self.groups(d);
        let mut pairs = Vec::new();
        for i in 0..groups.len() {
            for m in i + 1..groups.len() {
                for &s in &groups[i] {
                    for &t in &groups[m] {
                        pairs.push((s.min(t), s.max(t)));
                    }
                }
            }
        }
        pairs
    }

    /// Index of the component that absorbs the inclusion–exclusion correction.
    fn correction_carrier(&self) -> usize {
        match self {
            Pattern::Pair(..) => 1,
            _ => 0,
        }
    }
}

fn contiguous(sizes: &[usize], start: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut at = start;
    for &s in sizes {
        out.push((at..at + s).collect());
        at += s;
    }
    out
}

fn join(xs: &[usize], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Pair(s, t) => write!(f, "pair:{},{}", s + 1, t + 1),
            Pattern::Blocks(sizes) => write!(f, "blocks:{}", join(sizes, "+")),
            Pattern::OPlus(sizes, shared) => write!(f, "oplus:{}|{shared}", join(sizes, "+")),
        }
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadPattern(format!("cannot parse pattern {s:?}"));
        let sizes = |body: &str| -> Result<Vec<usize>> {
            body.split('+')
                .map(|x| x.trim().parse::<usize>().map_err(|_| bad()))
                .collect()
        };
        let (kind, body) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "pair" => {
                let (a, b) = body.split_once(',').ok_or_else(bad)?;
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a == 0 || b == 0 {
                    return Err(bad());
                }
                Ok(Pattern::Pair(a - 1, b - 1))
            }
            "blocks" => Ok(Pattern::Blocks(sizes(body)?)),
            "oplus" => {
                let (lead, shared) = body.split_once('|').ok_or_else(bad)?;
                Ok(Pattern::OPlus(
                    sizes(lead)?,
                    shared.trim().parse().map_err(|_| bad())?,
                ))
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SepCheck {
    pub pass: bool,
    /// Largest `|V̂(l)|` among coefficients the pattern requires to vanish.
    pub worst: f64,
    /// `worst / ‖V̂‖_∞` (zero for the zero potential).
    pub worst_rel: f64,
    /// Where `worst` was attained.
    pub worst_at: Option<Vec<usize>>,
    pub pairs_checked: usize,
}

/// Fourier-side separability test; the tolerance is relative to `‖V̂‖_∞`.
pub fn check(table: &FourierTable, pattern: &Pattern, tol: f64) -> Result<SepCheck> {
    let lat = table.lattice();
    let d = lat.dim();
    pattern.validate(d)?;
    let pairs = pattern.required_pairs(d);
    let norm = table.max_abs();
    let mut worst = 0.0;
    let mut worst_at = None;
    for (l, coeff) in lat.points().zip(table.coeffs()) {
        if pairs.iter().any(|&(s, t)| l[s] != 0 && l[t] != 0) && coeff.norm() > worst {
            worst = coeff.norm();
            worst_at = Some(l);
        }
    }
    let worst_rel = if norm > 0.0 { worst / norm } else { 0.0 };
    Ok(SepCheck {
        pass: worst <= tol * norm,
        worst,
        worst_rel,
        worst_at,
        pairs_checked: pairs.len(),
    })
}

/// One summand of a decomposition: a function of the `coords` of `n` only.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub coords: Vec<usize>,
    pub values: Potential,
}

impl Component {
    pub fn evaluate(&self, n: &[usize]) -> Complex64 {
        let proj: Vec<usize> = self.coords.iter().map(|&c| n[c]).collect();
        self.values.values()[self.values.lattice().index_unchecked(&proj)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub pattern: Pattern,
    pub components: Vec<Component>,
}

/// Canonical decomposition built from restricted inverse transforms.
///
/// Component `j` collects the coefficients whose non-shared groups other than
/// `j` are all zero. The coefficients with every group zero are then counted
/// once per component, and the surplus is subtracted from a single carrier:
/// the `t` component for pairs (giving `V_t = Σ_{l_s=0, l_t≠0}` and
/// `V_s = Σ_{l_t=0}`), the first component otherwise.
pub fn decompose(v: &Potential, pattern: &Pattern, tol: f64) -> Result<Decomposition> {
    let table = v.dft();
    let verdict = check(&table, pattern, tol)?;
    if !verdict.pass {
        return Err(Error::NotSeparable {
            pattern: pattern.to_string(),
            worst: verdict.worst_rel,
        });
    }
    let lat = v.lattice();
    let d = lat.dim();
    let (groups, _) = pattern.groups(d);
    let extra = groups.len() as f64 - 1.0;
    let carrier = pattern.correction_carrier();
    let zero_on = |l: &[usize], g: &[usize]| g.iter().all(|&c| l[c] == 0);

    let q_total = lat.volume();
    let roots: Vec<Complex64> = (0..q_total as i64).map(|r| unit_root(q_total, r)).collect();
    let weights: Vec<usize> = lat.periods().iter().map(|q| q_total / q).collect();
    let ls: Vec<Vec<usize>> = lat.points().collect();

    let mut components = Vec::with_capacity(groups.len());
    for (j, coords) in pattern.supports(d).into_iter().enumerate() {
        let terms: Vec<(&Vec<usize>, Complex64)> = ls
            .iter()
            .zip(table.coeffs())
            .filter_map(|(l, &c)| {
                let own = groups
                    .iter()
                    .enumerate()
                    .all(|(i, g)| i == j || zero_on(l, g));
                let mut w = if own { 1.0 } else { 0.0 };
                if j == carrier && groups.iter().all(|g| zero_on(l, g)) {
                    w -= extra;
                }
                (w != 0.0).then_some((l, c * w))
            })
            .collect();
        let sub = lat.sub_lattice(&coords)?;
        let values: Vec<Complex64> = sub
            .points()
            .map(|m| {
                let mut n = vec![0usize; d];
                for (&c, &x) in coords.iter().zip(&m) {
                    n[c] = x;
                }
                terms
                    .iter()
                    .map(|(l, c)| {
                        let r = (0..d).fold(0, |acc, i| {
                            (acc + l[i] * n[i] % lat.period(i) * weights[i]) % q_total
                        });
                        c * roots[r]
                    })
                    .sum()
            })
            .collect();
        components.push(Component {
            coords,
            values: Potential::new(sub, values)?,
        });
    }
    Ok(Decomposition {
        pattern: pattern.clone(),
        components,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructionCheck {
    pub pass: bool,
    pub max_error: f64,
}

/// PASS iff `max_n |V(n) − Σ components(n)| ≤ tol·(1 + ‖V‖_∞)`.
pub fn verify_decomposition(
    v: &Potential,
    dec: &Decomposition,
    tol: f64,
) -> Result<ReconstructionCheck> {
    let lat = v.lattice();
    for comp in &dec.components {
        let expected: Option<Vec<usize>> = comp
            .coords
            .iter()
            .map(|&c| (c < lat.dim()).then(|| lat.period(c)))
            .collect();
        if expected.as_deref() != Some(comp.values.lattice().periods()) {
            return Err(Error::SupportMismatch(format!(
                "component on coordinates {:?} with periods {:?}",
                comp.coords,
                comp.values.lattice().periods()
            )));
        }
    }
    let max_error = lat
        .points()
        .zip(v.values())
        .map(|(n, x)| {
            let sum: Complex64 = dec.components.iter().map(|c| c.evaluate(&n)).sum();
            (x - sum).norm()
        })
        .fold(0.0, f64::max);
    Ok(ReconstructionCheck {
        pass: max_error <= tol * (1.0 + v.max_abs()),
        max_error,
    })
}

/// Block partition of a pattern with the shared block last (possibly empty).
pub fn partition_of(pattern: &Pattern) -> Result<BlockPartition> {
    match pattern {
        Pattern::Blocks(sizes) => BlockPartition::new(sizes),
        Pattern::OPlus(sizes, shared) => {
            let mut all = sizes.clone();
            all.push(*shared);
            BlockPartition::new(&all)
        }
        Pattern::Pair(..) => Err(Error::BadPattern("pair patterns have no block partition".into())),
    }
}
