//! Group presentations and double cosets by the axis stabilizer.
//!
//! A presentation is a finite generator list for a discrete cocompact group
//! together with the translation parameter m of the cyclic subgroup
//! H = ⟨diag(m, 1/m)⟩ stabilizing the imaginary axis. Double cosets HγH are
//! reduced to a canonical representative by sliding the axis-minimizing
//! point of γ into a fixed fundamental window, and inventories of
//! representatives with bounded invariant B = |ad+bc| are built by a
//! breadth-first search over the coset graph: from a representative r the
//! neighbors are reduce(r·Pⁿ·g) over generators g and bounded diagonal
//! powers Pⁿ. Every coset reachable by a word of length L is reached within
//! L such steps, so depth plays the role of word length; completeness is
//! heuristic (pruned by a B bound) and reported through a stability flag.

use crate::geometry::{GeometryError, MoebiusElement};
use rayon::prelude::*;
use std::collections::HashMap;
use thiserror::Error;

/// Relative dedup tolerance on canonicalized entries.
const DEDUP_TOL: f64 = 1e-9;

/// Band around B = 1 in which a non-identity element is flagged rather than
/// classified (regular and exceptional classes are separated by B = 1).
const TORSION_BAND: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("element has a zero diagonal entry; the counting assumptions exclude it")]
    DiagonalZeroEntry,
    #[error("element with B within {TORSION_BAND:e} of 1: torsion or misdeclared subgroup suspected")]
    TorsionSuspected,
    #[error("diagonal element is not an integer power of the declared subgroup generator")]
    ForeignDiagonal,
    #[error("enumeration exceeded the cap of {0} elements")]
    ExplosionGuard(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("group file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Finite presentation data: generators of Γ plus the axis subgroup scale.
#[derive(Debug, Clone)]
pub struct GroupPresentation {
    generators: Vec<MoebiusElement>,
    labels: Vec<String>,
    m: f64,
    /// optional relator words, carried for documentation only
    pub relations: Vec<String>,
}

impl GroupPresentation {
    pub fn new(generators: Vec<MoebiusElement>, m: f64) -> Result<Self, GroupError> {
        let labels = (1..=generators.len()).map(|i| format!("g{i}")).collect();
        Self::with_labels(generators, labels, m)
    }

    pub fn with_labels(
        generators: Vec<MoebiusElement>,
        labels: Vec<String>,
        m: f64,
    ) -> Result<Self, GroupError> {
        if !(m > 1.0) {
            return Err(GroupError::Parse {
                line: 0,
                message: format!("subgroup parameter m must exceed 1, got {m}"),
            });
        }
        for (g, label) in generators.iter().zip(&labels) {
            let scale = g.entry_scale();
            if g.a().abs() < 1e-12 * scale || g.d().abs() < 1e-12 * scale {
                return Err(GroupError::Parse {
                    line: 0,
                    message: format!("generator {label} has a zero diagonal entry"),
                });
            }
        }
        Ok(GroupPresentation {
            generators,
            labels,
            m,
            relations: Vec::new(),
        })
    }

    /// Parses the group file format: `m <value>` once, one
    /// `gen <a> <b> <c> <d> [label]` per generator, optional
    /// `axis_word <label>...` asserting a word equal to diag(m, 1/m),
    /// `#` comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, GroupError> {
        let mut m: Option<f64> = None;
        let mut generators = Vec::new();
        let mut labels: Vec<String> = Vec::new();
        let mut axis_word: Option<(usize, Vec<String>)> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let head = tokens.next().unwrap();
            let parse_f = |tok: Option<&str>, what: &str| -> Result<f64, GroupError> {
                let tok = tok.ok_or(GroupError::Parse {
                    line: line_no,
                    message: format!("missing {what}"),
                })?;
                tok.parse::<f64>().map_err(|_| GroupError::Parse {
                    line: line_no,
                    message: format!("cannot parse {what} from {tok:?}"),
                })
            };
            match head {
                "m" => {
                    if m.is_some() {
                        return Err(GroupError::Parse {
                            line: line_no,
                            message: "duplicate m line".into(),
                        });
                    }
                    m = Some(parse_f(tokens.next(), "subgroup parameter")?);
                }
                "gen" => {
                    let a = parse_f(tokens.next(), "entry a")?;
                    let b = parse_f(tokens.next(), "entry b")?;
                    let c = parse_f(tokens.next(), "entry c")?;
                    let d = parse_f(tokens.next(), "entry d")?;
                    let g = MoebiusElement::new(a, b, c, d).map_err(|e| GroupError::Parse {
                        line: line_no,
                        message: e.to_string(),
                    })?;
                    let label = tokens
                        .next()
                        .map(str::to_owned)
                        .unwrap_or_else(|| format!("g{}", generators.len() + 1));
                    generators.push(g);
                    labels.push(label);
                }
                "axis_word" => {
                    axis_word = Some((line_no, tokens.map(str::to_owned).collect()));
                }
                other => {
                    return Err(GroupError::Parse {
                        line: line_no,
                        message: format!("unknown directive {other:?}"),
                    });
                }
            }
        }
        let m = m.ok_or(GroupError::Parse {
            line: 0,
            message: "missing m line".into(),
        })?;
        let pres = Self::with_labels(generators, labels, m)?;
        if let Some((line, word)) = axis_word {
            let mut prod = MoebiusElement::identity();
            for token in &word {
                let i = pres
                    .labels
                    .iter()
                    .position(|l| l == token)
                    .ok_or(GroupError::Parse {
                        line,
                        message: format!("axis_word references unknown generator {token:?}"),
                    })?;
                prod = prod.compose(&pres.generators[i]);
            }
            let axis = MoebiusElement::diagonal(m).map_err(GroupError::Geometry)?;
            if prod.distance_mod_sign(&axis) > 1e-6 * axis.entry_scale() {
                return Err(GroupError::Parse {
                    line,
                    message: "axis_word product does not equal diag(m, 1/m)".into(),
                });
            }
        }
        Ok(pres)
    }

    pub fn generators(&self) -> &[MoebiusElement] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Length of the closed geodesic stabilized by ⟨diag(m, 1/m)⟩.
    pub fn geodesic_length(&self) -> f64 {
        2.0 * self.m.ln()
    }

    fn generators_with_inverses(&self) -> Vec<MoebiusElement> {
        let mut gens: Vec<MoebiusElement> = self.generators.clone();
        gens.extend(self.generators.iter().map(MoebiusElement::inverse));
        gens
    }

    /// All distinct elements expressible as words of length ≤ `max_word_len`
    /// in the generators and their inverses.
    pub fn enumerate_ball(
        &self,
        max_word_len: usize,
        cap: usize,
    ) -> Result<Vec<MoebiusElement>, GroupError> {
        let gens = self.generators_with_inverses();
        let mut catalog = ElementCatalog::new();
        catalog.insert(MoebiusElement::identity());
        let mut frontier = vec![MoebiusElement::identity()];
        for _ in 0..max_word_len {
            let mut next = Vec::new();
            for r in &frontier {
                for g in &gens {
                    let cand = r.compose(g);
                    if catalog.insert(cand) {
                        next.push(cand);
                        if catalog.len() > cap {
                            return Err(GroupError::ExplosionGuard(cap));
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(catalog.into_elements())
    }
}

/// Coset classification by the invariant B and the sign of abcd.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CosetClass {
    /// The coset of the stabilizer itself.
    Identity,
    /// abcd > 0, B > 1: the image axis is disjoint from the imaginary axis.
    Regular,
    /// abcd < 0, B < 1: the image axis crosses the imaginary axis.
    Exceptional,
}

impl CosetClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            CosetClass::Identity => "identity",
            CosetClass::Regular => "regular",
            CosetClass::Exceptional => "exceptional",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CosetRepresentative {
    pub element: MoebiusElement,
    pub b_value: f64,
    pub class: CosetClass,
    /// BFS depth (≤ word length) at which the coset was first seen.
    pub word_depth: usize,
}

/// Two-sided reduction into the canonical window. Left diagonal powers use
/// `m_left`, right powers `m_right`; the single-geodesic case has both equal
/// to the presentation's m.
pub fn reduce_two_sided(
    g: &MoebiusElement,
    m_left: f64,
    m_right: f64,
) -> Result<(CosetClass, MoebiusElement), GroupError> {
    let (a, b, c, d) = (g.a(), g.b(), g.c(), g.d());
    // classify through ad and bc: both are invariant under the two-sided
    // diagonal action, so the tests cannot be fooled by skewed entry scales
    let ad = a * d;
    let bc = b * c;
    if bc.abs() <= 1e-16 * ad.abs().max(1.0) {
        // off-diagonal part vanishes: an axis-stabilizing element. Its
        // double coset is determined by log_m|a| mod 1 (the skew shifts it
        // by integers), and only integer values belong to ⟨diag(m, 1/m)⟩.
        let ratio = a.abs().ln() / m_right.ln();
        if (ratio - ratio.round()).abs() < 1e-6 {
            return Ok((CosetClass::Identity, MoebiusElement::identity()));
        }
        return Err(GroupError::ForeignDiagonal);
    }
    if ad.abs() <= 1e-16 * bc.abs().max(1.0) {
        return Err(GroupError::DiagonalZeroEntry);
    }
    // axis-minimizing point: x² = |bd/ac|, y² = |ab/cd|; the window
    // x², y² ∈ [1, m⁴) pins the diagonal powers uniquely. The 1e-9 nudge
    // keeps boundary cases (symmetric elements land exactly on x² = 1)
    // consistent across drifted copies of the same coset.
    let lg_right = 4.0 * m_right.ln();
    let lg_left = 4.0 * m_left.ln();
    let x2 = (b * d / (a * c)).abs();
    let y2 = (a * b / (c * d)).abs();
    let k = (x2.ln() / lg_right + 1e-9).floor();
    let j = -((y2.ln() / lg_left + 1e-9).floor());
    let reduced = g.two_sided_diagonal_scale(m_left.powf(j), m_right.powf(k));
    let bv = reduced.b_invariant();
    if (bv - 1.0).abs() < TORSION_BAND {
        return Err(GroupError::TorsionSuspected);
    }
    let abcd = reduced.a() * reduced.b() * reduced.c() * reduced.d();
    let class = if abcd > 0.0 {
        CosetClass::Regular
    } else {
        CosetClass::Exceptional
    };
    Ok((class, reduced))
}

/// Canonical representative of H g H for the presentation's own subgroup.
pub fn reduce_double_coset(
    pres: &GroupPresentation,
    g: &MoebiusElement,
) -> Result<CosetRepresentative, GroupError> {
    let (class, element) = reduce_two_sided(g, pres.m(), pres.m())?;
    Ok(CosetRepresentative {
        element,
        b_value: element.b_invariant(),
        class,
        word_depth: 0,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct InventoryOptions {
    /// The BFS keeps cosets with B below `prune_margin` times the requested
    /// coverage; stepping stones above that are cut. Completeness degrades
    /// gracefully as the margin shrinks.
    pub prune_margin: f64,
    pub max_states: usize,
}

impl Default for InventoryOptions {
    fn default() -> Self {
        InventoryOptions {
            prune_margin: 16.0,
            max_states: 2_000_000,
        }
    }
}

/// Inventory of double-coset representatives with B below a coverage bound.
#[derive(Debug, Clone)]
pub struct Inventory {
    reps: Vec<CosetRepresentative>,
    coverage: f64,
    stable: bool,
    depth_used: usize,
    prune_bound: f64,
    pub rejected_zero_diagonal: usize,
    pub torsion_suspects: usize,
    pub foreign_diagonals: usize,
}

impl Inventory {
    pub fn representatives(&self) -> &[CosetRepresentative] {
        &self.reps
    }

    /// Largest B up to which the inventory claims completeness.
    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    pub fn is_stable(&self) -> bool {
        self.stable
    }

    pub fn depth_used(&self) -> usize {
        self.depth_used
    }

    pub fn prune_bound(&self) -> f64 {
        self.prune_bound
    }

    pub fn count_strictly_below(&self, x: f64) -> usize {
        self.reps.iter().filter(|r| r.b_value < x).count()
    }

    pub fn regular_count_below(&self, x: f64) -> usize {
        self.reps
            .iter()
            .filter(|r| r.class == CosetClass::Regular && r.b_value < x)
            .count()
    }

    pub fn exceptional_count(&self) -> usize {
        self.reps
            .iter()
            .filter(|r| r.class == CosetClass::Exceptional)
            .count()
    }

    /// Sorted B values of non-identity cosets below the coverage bound;
    /// these are exactly the jump locations of the counting function.
    pub fn jump_locations(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .reps
            .iter()
            .filter(|r| r.class != CosetClass::Identity)
            .map(|r| r.b_value)
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Representative catalog with tolerance-based identity: bucketed by a
/// log-scaled quantization of B, compared entrywise modulo the PSL sign.
struct RepCatalog {
    buckets: HashMap<i64, Vec<usize>>,
    reps: Vec<CosetRepresentative>,
}

fn b_bucket_key(b: f64) -> i64 {
    ((1.0 + b).ln() * 1e8).round() as i64
}

impl RepCatalog {
    fn new() -> Self {
        RepCatalog {
            buckets: HashMap::new(),
            reps: Vec::new(),
        }
    }

    fn contains(&self, class: CosetClass, elem: &MoebiusElement, b: f64) -> bool {
        let key = b_bucket_key(b);
        for k in key - 1..=key + 1 {
            if let Some(bucket) = self.buckets.get(&k) {
                for &i in bucket {
                    let r = &self.reps[i];
                    if r.class == class {
                        let tol = DEDUP_TOL * r.element.entry_scale().max(elem.entry_scale());
                        if r.element.distance_mod_sign(elem) <= tol {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    fn insert(&mut self, rep: CosetRepresentative) -> bool {
        if self.contains(rep.class, &rep.element, rep.b_value) {
            return false;
        }
        let key = b_bucket_key(rep.b_value);
        self.buckets.entry(key).or_default().push(self.reps.len());
        self.reps.push(rep);
        true
    }
}

/// Element catalog for ball enumeration, same tolerance scheme keyed on the
/// entry scale.
struct ElementCatalog {
    buckets: HashMap<i64, Vec<usize>>,
    elems: Vec<MoebiusElement>,
}

impl ElementCatalog {
    fn new() -> Self {
        ElementCatalog {
            buckets: HashMap::new(),
            elems: Vec::new(),
        }
    }

    fn key(e: &MoebiusElement) -> i64 {
        let s: f64 = e.entries().iter().map(|v| v.abs()).sum();
        ((1.0 + s).ln() * 1e8).round() as i64
    }

    fn insert(&mut self, e: MoebiusElement) -> bool {
        let key = Self::key(&e);
        for k in key - 1..=key + 1 {
            if let Some(bucket) = self.buckets.get(&k) {
                for &i in bucket {
                    let tol = DEDUP_TOL * self.elems[i].entry_scale().max(e.entry_scale());
                    if self.elems[i].distance_mod_sign(&e) <= tol {
                        return false;
                    }
                }
            }
        }
        self.buckets.entry(key).or_default().push(self.elems.len());
        self.elems.push(e);
        true
    }

    fn len(&self) -> usize {
        self.elems.len()
    }

    fn into_elements(self) -> Vec<MoebiusElement> {
        self.elems
    }
}

/// Breadth-first inventory over the double-coset graph of H\Γ/H, covering
/// every coset with B < `coverage` that is reachable through cosets with
/// B below `prune_margin · coverage`.
pub fn coset_inventory(
    pres: &GroupPresentation,
    coverage: f64,
    max_depth: usize,
    opts: InventoryOptions,
) -> Result<Inventory, GroupError> {
    coset_inventory_between(pres, pres.m(), &MoebiusElement::identity(), coverage, max_depth, opts)
}

/// The same search started at τ⁻¹ with a possibly different left subgroup
/// scale: inventories of H₂\Γ/H₁ keyed by B(τ⁻¹γ).
pub fn coset_inventory_between(
    pres: &GroupPresentation,
    m_left: f64,
    start: &MoebiusElement,
    coverage: f64,
    max_depth: usize,
    opts: InventoryOptions,
) -> Result<Inventory, GroupError> {
    assert!(coverage > 1.0, "coverage bound must exceed 1");
    let m_right = pres.m();
    let prune = opts.prune_margin.max(1.0) * coverage;
    let n_max = ((2.0 * prune).ln() / (2.0 * m_right.ln())).ceil() as i32 + 2;
    let gens = pres.generators_with_inverses();

    let mut catalog = RepCatalog::new();
    let mut rejected_zero_diagonal = 0usize;
    let mut torsion_suspects = 0usize;
    let mut foreign_diagonals = 0usize;

    let (start_class, start_elem) = reduce_two_sided(start, m_left, m_right)?;
    let start_rep = CosetRepresentative {
        element: start_elem,
        b_value: start_elem.b_invariant(),
        class: start_class,
        word_depth: 0,
    };
    catalog.insert(start_rep);
    let mut frontier = vec![start_rep.element];
    let mut depth_used = 0;
    let mut exhausted = false;
    let mut last_new_below: Vec<usize> = Vec::new();

    for depth in 1..=max_depth {
        // parallel expansion of the frontier, serial deterministic insertion
        let mut produced: Vec<(CosetClass, MoebiusElement, f64)> = frontier
            .par_iter()
            .flat_map_iter(|r| {
                let gens = &gens;
                (-n_max..=n_max).flat_map(move |n| {
                    let shifted = scale_right_diagonal(r, m_right, n);
                    gens.iter().map(move |g| shifted.compose(g))
                })
            })
            .filter_map(|cand| match reduce_two_sided(&cand, m_left, m_right) {
                Ok((class, elem)) => {
                    let b = elem.b_invariant();
                    if class != CosetClass::Identity && b >= prune {
                        None
                    } else {
                        Some(Ok((class, elem, b)))
                    }
                }
                Err(e) => Some(Err(e)),
            })
            .collect::<Vec<Result<_, GroupError>>>()
            .into_iter()
            .filter_map(|r| match r {
                Ok(t) => Some(t),
                Err(GroupError::DiagonalZeroEntry) => {
                    rejected_zero_diagonal += 1;
                    None
                }
                Err(GroupError::TorsionSuspected) => {
                    torsion_suspects += 1;
                    None
                }
                Err(GroupError::ForeignDiagonal) => {
                    foreign_diagonals += 1;
                    None
                }
                Err(_) => None,
            })
            .collect();
        produced.sort_by(|p, q| {
            p.2.total_cmp(&q.2)
                .then_with(|| p.1.entries()[0].total_cmp(&q.1.entries()[0]))
                .then_with(|| p.1.entries()[1].total_cmp(&q.1.entries()[1]))
        });

        let mut next = Vec::new();
        let mut new_below = 0usize;
        for (class, elem, b) in produced {
            let rep = CosetRepresentative {
                element: elem,
                b_value: b,
                class,
                word_depth: depth,
            };
            if catalog.insert(rep) {
                next.push(elem);
                if b < coverage {
                    new_below += 1;
                }
                if catalog.reps.len() > opts.max_states {
                    return Err(GroupError::ExplosionGuard(opts.max_states));
                }
            }
        }
        depth_used = depth;
        last_new_below.push(new_below);
        if next.is_empty() {
            exhausted = true;
            break;
        }
        frontier = next;
    }

    let converged = exhausted && depth_used > 0;
    let tail_quiet = last_new_below.len() >= 2
        && last_new_below[last_new_below.len() - 1] == 0
        && last_new_below[last_new_below.len() - 2] == 0;
    let mut reps = catalog.reps;
    reps.sort_by(|p, q| {
        p.b_value
            .total_cmp(&q.b_value)
            .then_with(|| p.element.entries()[0].total_cmp(&q.element.entries()[0]))
    });
    Ok(Inventory {
        reps,
        coverage,
        stable: converged || tail_quiet,
        depth_used,
        prune_bound: prune,
        rejected_zero_diagonal,
        torsion_suspects,
        foreign_diagonals,
    })
}

fn scale_right_diagonal(g: &MoebiusElement, m: f64, n: i32) -> MoebiusElement {
    if n == 0 {
        return *g;
    }
    g.two_sided_diagonal_scale(1.0, m.powi(n))
}
