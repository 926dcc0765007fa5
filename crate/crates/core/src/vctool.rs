//! Shattering checks for sparse hemispheres and wedges, and the closed-form
//! bounds that go with them.
//!
//! A point set `B` is shattered by the hemispheres `H_p = {b : <p, b> > 0}`
//! with `s`-sparse `p` when every labeling of `B` is cut out by some such
//! `p`. Feasibility of one labeling on one support is a homogeneous linear
//! program, decided here by margin maximization; every returned direction is
//! re-verified through the embedding's sign quantizer before it is trusted.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::embedding::{embed_batch, SensingMatrix};
use crate::error::{invalid, Error, Result};
use crate::geometry::{lift, sample_sparse_unit, NoiseModel, UnitVector};
use crate::lp::{maximize, LpOutcome};
use crate::par::Execution;
use crate::stochastics::RngStream;

/// Largest point set for which `2^k` labelings are enumerated.
pub const MAX_POINTS: usize = 20;

/// Supports are enumerated exhaustively only up to this many.
pub const MAX_EXHAUSTIVE_SUPPORTS: u64 = 100_000;

/// Supports sampled when exhaustive enumeration is refused.
pub const SAMPLED_SUPPORTS: usize = 2_000;

/// Margin above which a labeling is declared feasible.
pub const DEFAULT_TOL: f64 = 1e-9;

// Cap on hemisphere-label pairs examined when certifying a wedge set in search.
const MAX_WEDGE_PAIRS: u64 = 20_000_000;

// Random directions tried per support before falling back to linear programs.
const PRESCREEN_DIRECTIONS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<UnitVector>,
}

impl PointSet {
    pub fn new(points: Vec<UnitVector>) -> Result<Self> {
        if points.is_empty() {
            return invalid("point set must contain at least one point");
        }
        let n = points[0].dim();
        if points.iter().any(|p| p.dim() != n) {
            return invalid("all points must share one dimension");
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i].coords() == points[j].coords() {
                    return invalid(format!("points {j} and {i} coincide"));
                }
            }
        }
        Ok(PointSet { points })
    }

    /// `{e_1, ..., e_k}` in `R^n`.
    pub fn standard_basis(n: usize, k: usize) -> Result<Self> {
        PointSet::new((0..k).map(|j| UnitVector::basis(n, j)).collect::<Result<_>>()?)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    fn with(&self, extra: UnitVector) -> Result<PointSet> {
        let mut pts = self.points.clone();
        pts.push(extra);
        PointSet::new(pts)
    }
}

/// A labeling of a `k`-point set: bit `i` set means point `i` is labeled `+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Dichotomy {
    pub mask: u32,
    pub k: usize,
}

impl Dichotomy {
    pub fn new(mask: u32, k: usize) -> Result<Self> {
        if k == 0 || k > MAX_POINTS {
            return Err(Error::ResourceLimit(format!(
                "dichotomies are limited to 1..={MAX_POINTS} points, got {k}"
            )));
        }
        if u64::from(mask) >> k != 0 {
            return invalid(format!("mask {mask:#b} wider than {k} bits"));
        }
        Ok(Dichotomy { mask, k })
    }

    pub fn is_plus(self, i: usize) -> bool {
        self.mask >> i & 1 == 1
    }

    /// Renders as a `+`/`-` string, point 0 first.
    pub fn signs(self) -> String {
        (0..self.k).map(|i| if self.is_plus(i) { '+' } else { '-' }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetClass {
    Hemisphere,
    Wedge,
}

/// A sparse direction `p` realizing a labeling as `B ∩ H_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub support: Vec<usize>,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    Hemisphere(Direction),
    /// The labeling is the symmetric difference of the two hemisphere labelings.
    Wedge(Direction, Direction),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterResult {
    pub shattered: bool,
    pub achieved_count: u64,
    /// `false` when supports were sampled rather than enumerated, in which
    /// case `achieved_count` is only a lower bound.
    pub exhaustive: bool,
    pub witnesses: Option<BTreeMap<Dichotomy, Witness>>,
}

fn check_k(k: usize) -> Result<()> {
    if k > MAX_POINTS {
        return Err(Error::ResourceLimit(format!(
            "{k} points exceed the enumeration guard of {MAX_POINTS}"
        )));
    }
    Ok(())
}

/// Labels each point by the sign of `<p, b>` using the embedding's quantizer.
///
/// The points are embedded through the one-row matrix `p`, so the labeling is
/// exactly what `sgn` produces, ties at zero included.
pub fn labeling_of(points: &PointSet, p: &[f64]) -> Result<Dichotomy> {
    check_k(points.len())?;
    let a = SensingMatrix::from_row_major(1, points.dim(), p.to_vec())?;
    let codes = embed_batch(&a, None, points.points(), Execution::Sequential)?;
    let mask = codes
        .iter()
        .enumerate()
        .fold(0u32, |m, (i, c)| if c.is_plus(0) { m | 1 << i } else { m });
    Dichotomy::new(mask, points.len())
}

/// Labelings produced by many directions at once (one per matrix row).
fn labelings_of_rows(points: &PointSet, dirs: &SensingMatrix) -> Result<Vec<u32>> {
    let codes = embed_batch(dirs, None, points.points(), Execution::Sequential)?;
    Ok((0..dirs.m())
        .map(|r| {
            codes
                .iter()
                .enumerate()
                .fold(0u32, |m, (i, c)| if c.is_plus(r) { m | 1 << i } else { m })
        })
        .collect())
}

/// Finds `p` supported on `support` with `<p, b_i> > 0` exactly on the
/// `+`-labeled points, or `None` when the labeling is infeasible on it.
///
/// The returned `p` satisfies `||p||_inf <= 1`, `<p, b_i> >= tol ||p||_inf`
/// on positives and `<p, b_i> <= 0` on negatives, and reproduces `dich`
/// under the sign quantizer (directions that fail that check are dropped).
pub fn achievable(points: &PointSet, dich: Dichotomy, support: &[usize], tol: f64) -> Result<Option<Vec<f64>>> {
    if support.is_empty() {
        return invalid("support must not be empty");
    }
    if let Some(&j) = support.iter().find(|&&j| j >= points.dim()) {
        return invalid(format!("support index {j} out of range"));
    }
    if dich.k != points.len() {
        return invalid(format!("dichotomy width {} differs from {} points", dich.k, points.len()));
    }
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let mut support = support.to_vec();
    support.sort_unstable();
    support.dedup();

    // Restrict every point to the support: row i = (b_i)_S.
    let proj: Vec<Vec<f64>> = points
        .points()
        .iter()
        .map(|b| support.iter().map(|&j| b.coords()[j]).collect())
        .collect();
    let Some(q) = feasibility_candidate(&proj, dich, tol) else {
        return Ok(None);
    };
    let mut p = vec![0.0; points.dim()];
    for (idx, &j) in support.iter().enumerate() {
        p[j] = if q[idx].abs() <= 1e-12 { 0.0 } else { q[idx] };
    }
    // A negative point held exactly on the boundary by the LP can land on
    // the positive side after rounding. Such labelings are reported as not
    // realized, so rounding can only undercount, never certify falsely.
    if labeling_of(points, &p)? != dich {
        return Ok(None);
    }
    Ok(Some(p))
}

/// Margin LPs over `p = u - v`, `0 <= u, v <= 1`. Returns the first direction
/// (in support coordinates) whose margin exceeds `tol`, if any.
fn feasibility_candidate(proj: &[Vec<f64>], dich: Dichotomy, tol: f64) -> Option<Vec<f64>> {
    let s = proj[0].len();
    let vars = 2 * s + 1; // u, v, margin
    let bounds = |rows: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>| {
        for j in 0..vars {
            let mut r = vec![0.0; vars];
            r[j] = 1.0;
            rows.push(r);
            rhs.push(1.0);
        }
    };
    // coefficient row for +/-<u - v, b> with optional margin coefficient
    let inner = |b: &[f64], sign: f64, margin: f64| {
        let mut r = vec![0.0; vars];
        for j in 0..s {
            r[j] = sign * b[j];
            r[s + j] = -sign * b[j];
        }
        r[2 * s] = margin;
        r
    };
    let solve = |rows: &[Vec<f64>], rhs: &[f64], obj: &[f64]| match maximize(rows, rhs, obj) {
        LpOutcome::Optimal { value, x } if value > tol => {
            Some((0..s).map(|j| x[j] - x[s + j]).collect::<Vec<f64>>())
        }
        _ => None,
    };
    let mut margin_obj = vec![0.0; vars];
    margin_obj[2 * s] = 1.0;
    let any_plus = (0..dich.k).any(|i| dich.is_plus(i));

    // Strict margin on both sides: <p,b> >= mu on +, <p,b> <= -mu on -.
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (i, b) in proj.iter().enumerate() {
        rows.push(if dich.is_plus(i) { inner(b, -1.0, 1.0) } else { inner(b, 1.0, 1.0) });
        rhs.push(0.0);
    }
    bounds(&mut rows, &mut rhs);
    if let Some(p) = solve(&rows, &rhs, &margin_obj) {
        return Some(p);
    }

    if any_plus {
        // Margin on positives only; negatives may sit on the boundary.
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (i, b) in proj.iter().enumerate() {
            rows.push(if dich.is_plus(i) { inner(b, -1.0, 1.0) } else { inner(b, 1.0, 0.0) });
            rhs.push(0.0);
        }
        bounds(&mut rows, &mut rhs);
        return solve(&rows, &rhs, &margin_obj);
    }

    // All negative: need any nonzero p with <p, b_i> <= 0. Push one coordinate.
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for b in proj {
        rows.push(inner(b, 1.0, 0.0));
        rhs.push(0.0);
    }
    bounds(&mut rows, &mut rhs);
    for j in 0..s {
        for sign in [1.0, -1.0] {
            let mut obj = vec![0.0; vars];
            obj[j] = sign;
            obj[s + j] = -sign;
            if let Some(p) = solve(&rows, &rhs, &obj) {
                return Some(p);
            }
        }
    }
    None
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// All `s`-subsets of `[n]` when there are few enough, else a random sample.
/// Supports smaller than `s` are subsumed by their supersets.
fn supports(n: usize, s: usize, stream: &mut RngStream) -> (Vec<Vec<usize>>, bool) {
    let s = s.min(n);
    if binomial(n, s) <= MAX_EXHAUSTIVE_SUPPORTS {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..s).collect();
        loop {
            out.push(cur.clone());
            let Some(i) = (0..s).rev().find(|&i| cur[i] != i + n - s) else {
                break;
            };
            cur[i] += 1;
            for j in i + 1..s {
                cur[j] = cur[j - 1] + 1;
            }
        }
        (out, true)
    } else {
        let set: BTreeSet<Vec<usize>> = (0..SAMPLED_SUPPORTS)
            .map(|_| {
                let mut v = rand::seq::index::sample(stream, n, s).into_vec();
                v.sort_unstable();
                v
            })
            .collect();
        (set.into_iter().collect(), false)
    }
}

fn random_directions(stream: &mut RngStream, n: usize, support: &[usize], count: usize) -> Result<SensingMatrix> {
    let mut data = vec![0.0; count * n];
    for r in 0..count {
        for &j in support {
            data[r * n + j] = stream.standard_normal();
        }
    }
    SensingMatrix::from_row_major(count, n, data)
}

/// Labelings realized by sparse hemispheres, each with a verified direction.
#[derive(Debug, Clone, PartialEq)]
pub struct HemisphereEnumeration {
    pub k: usize,
    pub witnesses: BTreeMap<Dichotomy, Direction>,
    pub exhaustive: bool,
}

/// How hard [`collect_hemispheres`] tries before giving up on a labeling.
#[derive(Debug, Clone, Copy)]
struct Effort {
    /// Cap on LP-backed supports tried per missing labeling (`None` = all).
    lp_supports: Option<usize>,
    /// Stop at the first labeling no support realizes.
    stop_on_miss: bool,
}

struct Collected {
    witnesses: BTreeMap<Dichotomy, Direction>,
    exhaustive: bool,
    lp_calls: u64,
    missed: bool,
}

fn collect_hemispheres(
    points: &PointSet,
    s: usize,
    stream: &mut RngStream,
    effort: Effort,
    want_all: bool,
) -> Result<Collected> {
    let k = points.len();
    check_k(k)?;
    if s == 0 {
        return invalid("sparsity must be at least 1");
    }
    let n = points.dim();
    let (sups, exhaustive) = supports(n, s, stream);
    let mut witnesses = BTreeMap::new();

    // Cheap pass: random directions on each support.
    for sup in &sups {
        let dirs = random_directions(stream, n, sup, PRESCREEN_DIRECTIONS)?;
        for (r, mask) in labelings_of_rows(points, &dirs)?.into_iter().enumerate() {
            let d = Dichotomy::new(mask, k)?;
            witnesses.entry(d).or_insert_with(|| Direction {
                support: sup.clone(),
                p: dirs.row(r).to_vec(),
            });
        }
    }

    let mut lp_calls = 0;
    let mut missed = false;
    let mut order: Vec<usize> = (0..sups.len()).collect();
    for mask in 0..(1u64 << k) as u32 {
        let d = Dichotomy::new(mask, k)?;
        if witnesses.contains_key(&d) {
            continue;
        }
        let limit = effort.lp_supports.unwrap_or(usize::MAX).min(sups.len());
        let mut found = None;
        for pos in 0..limit {
            let si = order[pos];
            lp_calls += 1;
            if let Some(p) = achievable(points, d, &sups[si], DEFAULT_TOL)? {
                found = Some((si, p));
                // Successful supports move to the front for later labelings.
                order.remove(pos);
                order.insert(0, si);
                break;
            }
        }
        match found {
            Some((si, p)) => {
                witnesses.insert(d, Direction { support: sups[si].clone(), p });
            }
            None => {
                missed = true;
                if effort.stop_on_miss && !want_all {
                    break;
                }
            }
        }
    }
    Ok(Collected {
        witnesses,
        exhaustive: exhaustive && effort.lp_supports.is_none(),
        lp_calls,
        missed,
    })
}

const ENUMERATION_SEED: u64 = 0x005E_ED0F_5EED;

/// Every labeling of `points` realized by some `H_p` with `p` `s`-sparse.
pub fn hemisphere_enumeration(points: &PointSet, s: usize) -> Result<HemisphereEnumeration> {
    let mut stream = RngStream::new(ENUMERATION_SEED, points.len() as u64);
    let c = collect_hemispheres(
        points,
        s,
        &mut stream,
        Effort {
            lp_supports: None,
            stop_on_miss: false,
        },
        true,
    )?;
    Ok(HemisphereEnumeration {
        k: points.len(),
        witnesses: c.witnesses,
        exhaustive: c.exhaustive,
    })
}

pub fn hemisphere_dichotomies(points: &PointSet, s: usize) -> Result<BTreeSet<Dichotomy>> {
    Ok(hemisphere_enumeration(points, s)?.witnesses.into_keys().collect())
}

/// Pairs `(a, b)` of hemisphere labelings whose XOR covers each wedge
/// labeling, found with a `2^k` table. Stops early once every labeling is
/// covered.
fn xor_cover(hemi: &[Dichotomy], k: usize) -> Vec<Option<(usize, usize)>> {
    let full = 1usize << k;
    let mut cover = vec![None; full];
    let mut index = vec![usize::MAX; full];
    for (i, d) in hemi.iter().enumerate() {
        index[d.mask as usize] = i;
    }
    let mut covered = 0;
    'outer: for (i, a) in hemi.iter().enumerate() {
        for b in hemi {
            let d = (a.mask ^ b.mask) as usize;
            if cover[d].is_none() {
                cover[d] = Some((i, index[b.mask as usize]));
                covered += 1;
                if covered == full {
                    break 'outer;
                }
            }
        }
    }
    cover
}

fn xor_closure(hemi: &BTreeMap<Dichotomy, Direction>, k: usize) -> Result<BTreeMap<Dichotomy, Witness>> {
    let (labels, dirs): (Vec<Dichotomy>, Vec<&Direction>) = hemi.iter().map(|(d, w)| (*d, w)).unzip();
    let mut out = BTreeMap::new();
    for (mask, pair) in xor_cover(&labels, k).into_iter().enumerate() {
        if let Some((i, j)) = pair {
            out.insert(
                Dichotomy::new(mask as u32, k)?,
                Witness::Wedge(dirs[i].clone(), dirs[j].clone()),
            );
        }
    }
    Ok(out)
}

/// `{a XOR b}` over pairs of hemisphere labelings: the wedge labelings.
pub fn wedge_dichotomies(points: &PointSet, s: usize) -> Result<BTreeSet<Dichotomy>> {
    let e = hemisphere_enumeration(points, s)?;
    Ok(xor_closure(&e.witnesses, e.k)?.into_keys().collect())
}

pub fn is_shattered(points: &PointSet, s: usize, class: SetClass) -> Result<ShatterResult> {
    let e = hemisphere_enumeration(points, s)?;
    let witnesses: BTreeMap<Dichotomy, Witness> = match class {
        SetClass::Hemisphere => e
            .witnesses
            .into_iter()
            .map(|(d, w)| (d, Witness::Hemisphere(w)))
            .collect(),
        SetClass::Wedge => xor_closure(&e.witnesses, e.k)?,
    };
    let achieved_count = witnesses.len() as u64;
    Ok(ShatterResult {
        shattered: achieved_count == 1u64 << e.k,
        achieved_count,
        exhaustive: e.exhaustive,
        witnesses: Some(witnesses),
    })
}

/// Re-derives every witness's labeling through the sign quantizer.
pub fn verify_witnesses(points: &PointSet, result: &ShatterResult) -> Result<bool> {
    let Some(w) = &result.witnesses else {
        return Ok(false);
    };
    for (d, witness) in w {
        let got = match witness {
            Witness::Hemisphere(dir) => labeling_of(points, &dir.p)?.mask,
            Witness::Wedge(a, b) => labeling_of(points, &a.p)?.mask ^ labeling_of(points, &b.p)?.mask,
        };
        let sparse = |dir: &Direction| {
            dir.p
                .iter()
                .enumerate()
                .all(|(j, v)| *v == 0.0 || dir.support.contains(&j))
        };
        let supported = match witness {
            Witness::Hemisphere(a) => sparse(a),
            Witness::Wedge(a, b) => sparse(a) && sparse(b),
        };
        if got != d.mask || !supported {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of a randomized search for a large shattered set.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Size of the largest certified shattered set; a lower bound on the VC dimension.
    pub size: usize,
    pub points: Option<PointSet>,
    pub result: Option<ShatterResult>,
    /// Feasibility units spent (LP solves plus one per random-direction batch).
    pub spent: u64,
}

/// Certifies a candidate set, spending at most a bounded number of LPs.
/// Giving up early only weakens the lower bound, never its validity.
fn quick_shatter(
    points: &PointSet,
    s: usize,
    class: SetClass,
    stream: &mut RngStream,
) -> Result<(Option<ShatterResult>, u64)> {
    let k = points.len();
    let n_supports = supports(points.dim(), s, &mut stream.clone()).0.len() as u64;
    let effort = match class {
        SetClass::Hemisphere => Effort {
            lp_supports: Some(16),
            stop_on_miss: true,
        },
        SetClass::Wedge => Effort {
            lp_supports: Some(0),
            stop_on_miss: false,
        },
    };
    let c = collect_hemispheres(points, s, stream, effort, false)?;
    let spent = c.lp_calls + n_supports;
    let witnesses: BTreeMap<Dichotomy, Witness> = match class {
        SetClass::Hemisphere => {
            if c.missed {
                return Ok((None, spent));
            }
            c.witnesses.into_iter().map(|(d, w)| (d, Witness::Hemisphere(w))).collect()
        }
        SetClass::Wedge => {
            // Too few hemisphere labelings to cover the cube, or too many to
            // pair up within the effort limit: reject without certifying.
            let h = c.witnesses.len() as u64;
            if h * h < 1u64 << k || h * h > MAX_WEDGE_PAIRS {
                return Ok((None, spent));
            }
            xor_closure(&c.witnesses, k)?
        }
    };
    if witnesses.len() as u64 != 1u64 << k {
        return Ok((None, spent));
    }
    Ok((
        Some(ShatterResult {
            shattered: true,
            achieved_count: witnesses.len() as u64,
            exhaustive: false,
            witnesses: Some(witnesses),
        }),
        spent,
    ))
}

fn random_candidate(stream: &mut RngStream, n: usize, s: usize) -> Result<UnitVector> {
    match (stream.next_u64_raw() % 3, n) {
        (0, _) => sample_sparse_unit(stream, n, n),
        (1, _) => sample_sparse_unit(stream, n, s.min(n)),
        _ => {
            let signs: Vec<f64> = (0..n)
                .map(|_| if stream.uniform() < 0.5 { 1.0 } else { -1.0 })
                .collect();
            UnitVector::normalized(signs)
        }
    }
}

/// Randomized restarts with greedy point insertion.
///
/// The first restart starts from the standard basis of the first `min(s, n)`
/// coordinates; later restarts start empty. Each restart adds random points
/// while the enlarged set stays certifiably shattered and stops after a run of
/// rejected insertions. The returned size is a lower bound on the VC
/// dimension of the class.
pub fn vc_lower_bound_search(
    n: usize,
    s: usize,
    class: SetClass,
    budget: u64,
    stream: &mut RngStream,
) -> Result<SearchOutcome> {
    if budget == 0 {
        return invalid("search budget must be at least 1");
    }
    if s == 0 || s > n {
        return invalid(format!("need 1 <= s <= n, got s={s}, n={n}"));
    }
    const PATIENCE: usize = 12;
    let mut best = SearchOutcome {
        size: 0,
        points: None,
        result: None,
        spent: 0,
    };
    let mut restart = 0usize;
    while best.spent < budget {
        let mut current: Option<(PointSet, ShatterResult)> = None;
        if restart == 0 {
            let basis = PointSet::standard_basis(n, s.min(n))?;
            let (r, spent) = quick_shatter(&basis, s, class, stream)?;
            best.spent += spent;
            current = r.map(|r| (basis, r));
        }
        let mut failures = 0;
        while failures < PATIENCE && best.spent < budget {
            let cand = random_candidate(stream, n, s)?;
            let trial = match &current {
                Some((pts, _)) => match pts.with(cand) {
                    Ok(p) => p,
                    Err(_) => {
                        failures += 1;
                        continue;
                    }
                },
                None => PointSet::new(vec![cand])?,
            };
            if trial.len() > MAX_POINTS {
                break;
            }
            let (r, spent) = quick_shatter(&trial, s, class, stream)?;
            best.spent += spent;
            match r {
                Some(r) => {
                    current = Some((trial, r));
                    failures = 0;
                }
                None => failures += 1,
            }
        }
        if let Some((pts, r)) = current {
            if pts.len() > best.size {
                best.size = pts.len();
                best.points = Some(pts);
                best.result = Some(r);
            }
        }
        restart += 1;
    }
    Ok(best)
}

/// `(2 / ln 2) · s · ln(n e^2 / (s ln 2))`.
pub fn vc_upper_bound(n: usize, s: usize) -> Result<f64> {
    if s == 0 || s > n {
        return invalid(format!("need 1 <= s <= n, got s={s}, n={n}"));
    }
    let (n, s) = (n as f64, s as f64);
    let ln2 = std::f64::consts::LN_2;
    Ok(2.0 / ln2 * s * (n * E * E / (s * ln2)).ln())
}

/// Sauer's growth bound `(e k / d)^d`.
pub fn sauer_bound(k: u64, d: u64) -> Result<f64> {
    if d == 0 || k < d {
        return invalid(format!("need k >= d >= 1, got k={k}, d={d}"));
    }
    Ok((E * k as f64 / d as f64).powf(d as f64))
}

/// Lower real branch of the Lambert W function on `[-1/e, 0)`.
///
/// Bisection on `w e^w = x` over `[ln(x^2) - 1, -1]` (where `w e^w` is
/// monotone) down to width `1e-10`, then Newton steps kept inside the bracket.
pub fn lambert_w_minus1(x: f64) -> Result<f64> {
    let branch = -(-1.0f64).exp();
    if x.is_nan() || x >= 0.0 || x < branch - 4.0 * f64::EPSILON {
        return invalid(format!("lambert_w_minus1 is defined on [-1/e, 0), got {x}"));
    }
    if x <= branch {
        return Ok(-1.0);
    }
    let f = |w: f64| w * w.exp() - x;
    // f is increasing in -w: f(lo) > 0 >= f(hi)
    let mut lo = (x * x).ln() - 1.0;
    let mut hi = -1.0;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut w = 0.5 * (lo + hi);
    for _ in 0..8 {
        let d = (1.0 + w) * w.exp();
        if d == 0.0 {
            break;
        }
        let next = w - f(w) / d;
        if !(next.is_finite() && next <= -1.0) {
            break;
        }
        if next == w {
            break;
        }
        w = next;
    }
    Ok(w)
}

/// Greedy packing of sparse wedges under an empirical Gaussian measure.
///
/// `empirical_points` Gaussian points (in `R^{n+1}` when `sigma > 0`, for the
/// lifted wedges) fix the measure. Candidate wedges come from iid sparse
/// pairs; a candidate is kept when its symmetric difference with every kept
/// wedge has empirical measure above `t^2`. The count is a lower bound on the
/// packing number under that measure.
pub fn packing_estimate(
    n: usize,
    s: usize,
    noise: NoiseModel,
    t: f64,
    candidates: usize,
    empirical_points: usize,
    stream: &RngStream,
) -> Result<usize> {
    if !(t > 0.0 && t < 1.0) {
        return invalid(format!("t must lie in (0, 1), got {t}"));
    }
    if candidates == 0 || empirical_points == 0 {
        return invalid("candidates and empirical_points must be positive");
    }
    if s == 0 || s > n {
        return invalid(format!("need 1 <= s <= n, got s={s}, n={n}"));
    }
    let lifted = !noise.is_noiseless();
    let dim = if lifted { n + 1 } else { n };
    let cloud = SensingMatrix::gaussian(&mut stream.fork(0), empirical_points, dim)?;
    let mut pool = stream.fork(1);
    let mut signals = Vec::with_capacity(2 * candidates);
    for _ in 0..2 * candidates {
        let x = sample_sparse_unit(&mut pool, n, s)?;
        signals.push(if lifted { lift(&x, noise) } else { x });
    }
    let codes = embed_batch(&cloud, None, &signals, Execution::Sequential)?;
    let wedges: Vec<Vec<u64>> = codes
        .chunks(2)
        .map(|c| c[0].words().iter().zip(c[1].words()).map(|(a, b)| a ^ b).collect())
        .collect();
    let threshold = t * t * empirical_points as f64;
    let mut kept: Vec<&Vec<u64>> = Vec::new();
    for w in &wedges {
        let separated = kept.iter().all(|k| {
            let diff: u32 = k.iter().zip(w.iter()).map(|(a, b)| (a ^ b).count_ones()).sum();
            f64::from(diff) > threshold
        });
        if separated {
            kept.push(w);
        }
    }
    Ok(kept.len())
}
