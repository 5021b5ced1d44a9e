//! Stratified nilpotent Lie algebras over the rationals.
//!
//! A stratification fixes layer dimensions `(m_1, ..., m_r)` and rational
//! structure constants on basis pairs. Building one validates everything a
//! Carnot group needs: antisymmetry, the graded bracket rule
//! `[g_i, g_j] ⊆ g_{i+j}`, the Jacobi identity, and the generation of each
//! layer by brackets with the first one. Consumers hold the result behind an
//! `Arc`; the same object doubles as the group via exponential coordinates.

use crate::scalar::{format_rational, parse_rational, Rational};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

pub type Group = Arc<Stratification>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("bad layer dimensions: {0}")]
    BadLayers(String),
    #[error("basis index out of range: {0}")]
    BadIndex(String),
    #[error("bracket table violates antisymmetry on basis pair ({}, {})", .pair.0 + 1, .pair.1 + 1)]
    AntisymmetryViolation { pair: (usize, usize) },
    #[error("bracket of basis pair ({}, {}) leaves its graded layer", .pair.0 + 1, .pair.1 + 1)]
    NotGraded { pair: (usize, usize) },
    #[error("Jacobi identity fails on basis triple ({}, {}, {})", .triple.0 + 1, .triple.1 + 1, .triple.2 + 1)]
    JacobiViolation { triple: (usize, usize, usize) },
    #[error("layer {layer} is not generated by brackets with the first layer")]
    NotStratified { layer: usize },
    #[error("elements belong to different algebras")]
    Mismatch,
    #[error("unknown group name `{0}`")]
    UnknownGroup(String),
    #[error("malformed group definition: {0}")]
    Malformed(String),
}

/// Coefficients the bilinear bracket can act on: exact scalars for concrete
/// elements, polynomials for the symbolic group law.
pub trait BracketCoeff: Clone {
    fn zero_like(proto: &Self) -> Self;
    fn coeff_is_zero(&self) -> bool;
    fn coeff_mul(&self, other: &Self) -> Self;
    fn coeff_scale(&self, k: &Rational) -> Self;
    fn coeff_add_assign(&mut self, other: &Self);
}

impl BracketCoeff for Rational {
    fn zero_like(_proto: &Self) -> Self {
        Rational::zero()
    }
    fn coeff_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn coeff_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn coeff_scale(&self, k: &Rational) -> Self {
        self * k
    }
    fn coeff_add_assign(&mut self, other: &Self) {
        *self += other;
    }
}

/// Write-once caches derived from the structure constants.
#[derive(Default)]
pub(crate) struct Caches {
    pub(crate) group_law: OnceLock<crate::poly::GroupLawMap>,
    pub(crate) left_fields: OnceLock<Vec<crate::diffop::VectorField>>,
}

// The cached values hold the group back, so recursing into them from the
// group's own Debug would never terminate.
impl fmt::Debug for Caches {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Caches")
            .field("group_law", &self.group_law.get().map(|_| ".."))
            .field("left_fields", &self.left_fields.get().map(|_| ".."))
            .finish()
    }
}

#[derive(Debug)]
pub struct Stratification {
    name: String,
    layer_dims: Vec<usize>,
    /// Structure constants on ordered basis pairs `a < b` (flat indices);
    /// the other orientation follows by antisymmetry.
    brackets: BTreeMap<(usize, usize), Vec<(usize, Rational)>>,
    layer_of: Vec<usize>,
    layer_start: Vec<usize>,
    aliases: BTreeMap<String, usize>,
    pub(crate) caches: Caches,
}

impl PartialEq for Stratification {
    fn eq(&self, other: &Self) -> bool {
        self.layer_dims == other.layer_dims && self.brackets == other.brackets
    }
}
impl Eq for Stratification {}

impl Stratification {
    /// Builds and validates a stratification from flat-index bracket rules.
    pub fn build(
        name: &str,
        layer_dims: &[usize],
        bracket_table: &[((usize, usize), Vec<(usize, Rational)>)],
    ) -> Result<Group, AlgebraError> {
        if layer_dims.is_empty() || layer_dims.contains(&0) {
            return Err(AlgebraError::BadLayers(format!("{layer_dims:?}")));
        }
        let n: usize = layer_dims.iter().sum();
        let mut layer_of = Vec::with_capacity(n);
        let mut layer_start = Vec::with_capacity(layer_dims.len());
        for (j, &m) in layer_dims.iter().enumerate() {
            layer_start.push(layer_of.len());
            layer_of.extend(std::iter::repeat(j + 1).take(m));
        }

        let mut brackets: BTreeMap<(usize, usize), Vec<(usize, Rational)>> = BTreeMap::new();
        let mut seen: BTreeMap<(usize, usize), Vec<(usize, Rational)>> = BTreeMap::new();
        for ((a, b), terms) in bracket_table {
            let (a, b) = (*a, *b);
            if a >= n || b >= n || terms.iter().any(|(c, _)| *c >= n) {
                return Err(AlgebraError::BadIndex(format!("bracket rule on pair ({a}, {b})")));
            }
            let mut combined: BTreeMap<usize, Rational> = BTreeMap::new();
            for (c, k) in terms {
                *combined.entry(*c).or_insert_with(Rational::zero) += k;
            }
            combined.retain(|_, k| !k.is_zero());
            let normalized: Vec<(usize, Rational)> = combined.into_iter().collect();
            if a == b {
                if !normalized.is_empty() {
                    return Err(AlgebraError::AntisymmetryViolation { pair: (a, b) });
                }
                continue;
            }
            if seen.contains_key(&(a, b)) {
                return Err(AlgebraError::Malformed(format!(
                    "duplicate bracket rule for basis pair ({}, {})",
                    a + 1,
                    b + 1
                )));
            }
            seen.insert((a, b), normalized.clone());
            // Check consistency with a previously given opposite orientation.
            if let Some(opp) = seen.get(&(b, a)) {
                let negated: Vec<(usize, Rational)> =
                    normalized.iter().map(|(c, k)| (*c, -k.clone())).collect();
                if *opp != negated {
                    return Err(AlgebraError::AntisymmetryViolation { pair: (a.min(b), a.max(b)) });
                }
            }
            let (lo, hi) = (a.min(b), a.max(b));
            let oriented: Vec<(usize, Rational)> = if a < b {
                normalized
            } else {
                normalized.into_iter().map(|(c, k)| (c, -k)).collect()
            };
            if !oriented.is_empty() {
                brackets.insert((lo, hi), oriented);
            } else {
                brackets.remove(&(lo, hi));
            }
        }

        let strat = Stratification {
            name: name.to_string(),
            layer_dims: layer_dims.to_vec(),
            brackets,
            layer_of,
            layer_start,
            aliases: BTreeMap::new(),
            caches: Caches::default(),
        };
        strat.check_graded()?;
        strat.check_jacobi()?;
        strat.check_stratified()?;
        Ok(Arc::new(strat))
    }

    fn check_graded(&self) -> Result<(), AlgebraError> {
        let r = self.step();
        for (&(a, b), terms) in &self.brackets {
            let target = self.layer_of[a] + self.layer_of[b];
            if target > r && !terms.is_empty() {
                return Err(AlgebraError::NotGraded { pair: (a, b) });
            }
            if terms.iter().any(|(c, _)| self.layer_of[*c] != target) {
                return Err(AlgebraError::NotGraded { pair: (a, b) });
            }
        }
        Ok(())
    }

    fn check_jacobi(&self) -> Result<(), AlgebraError> {
        let n = self.dimension();
        let basis: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut v = vec![Rational::zero(); n];
                v[i] = Rational::from_integer(1.into());
                v
            })
            .collect();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let ab = self.bracket_coords(&basis[a], &basis[b]);
                    let bc = self.bracket_coords(&basis[b], &basis[c]);
                    let ca = self.bracket_coords(&basis[c], &basis[a]);
                    let mut sum = self.bracket_coords(&ab, &basis[c]);
                    for (s, t) in sum.iter_mut().zip(self.bracket_coords(&bc, &basis[a])) {
                        *s += t;
                    }
                    for (s, t) in sum.iter_mut().zip(self.bracket_coords(&ca, &basis[b])) {
                        *s += t;
                    }
                    if sum.iter().any(|v| !v.is_zero()) {
                        return Err(AlgebraError::JacobiViolation { triple: (a, b, c) });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_stratified(&self) -> Result<(), AlgebraError> {
        for j in 1..self.step() {
            let rows: Vec<Vec<Rational>> = self
                .layer_range(1)
                .flat_map(|i| {
                    self.layer_range(j).map(move |b| {
                        let mut u = vec![Rational::zero(); self.dimension()];
                        u[i] = Rational::from_integer(1.into());
                        let mut v = vec![Rational::zero(); self.dimension()];
                        v[b] = Rational::from_integer(1.into());
                        let w = self.bracket_coords(&u, &v);
                        self.layer_range(j + 1).map(|c| w[c].clone()).collect()
                    })
                })
                .collect();
            let mat = crate::linalg::Mat::from_rows(rows);
            if crate::linalg::rank(&mat) != self.layer_dims[j] {
                return Err(AlgebraError::NotStratified { layer: j + 1 });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Total dimension `N`.
    pub fn dimension(&self) -> usize {
        self.layer_of.len()
    }

    /// Nilpotency step `r`.
    pub fn step(&self) -> usize {
        self.layer_dims.len()
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    /// Horizontal dimension `m = dim g_1`.
    pub fn horizontal_dim(&self) -> usize {
        self.layer_dims[0]
    }

    /// Homogeneous dimension `Q = sum_j j * m_j`.
    pub fn homogeneous_dimension(&self) -> usize {
        self.layer_dims.iter().enumerate().map(|(j, m)| (j + 1) * m).sum()
    }

    /// 1-based layer of a flat basis index; also its dilation weight.
    pub fn weight(&self, index: usize) -> usize {
        self.layer_of[index]
    }

    /// Flat indices of layer `j` (1-based).
    pub fn layer_range(&self, j: usize) -> std::ops::Range<usize> {
        let start = self.layer_start[j - 1];
        start..start + self.layer_dims[j - 1]
    }

    /// Flat index of the 1-based (layer, slot) pair.
    pub fn flat_index(&self, layer: usize, slot: usize) -> Result<usize, AlgebraError> {
        if layer == 0 || layer > self.step() || slot == 0 || slot > self.layer_dims[layer - 1] {
            return Err(AlgebraError::BadIndex(format!("(layer {layer}, slot {slot})")));
        }
        Ok(self.layer_start[layer - 1] + slot - 1)
    }

    /// 1-based (layer, slot) of a flat index.
    pub fn layer_slot(&self, index: usize) -> (usize, usize) {
        let j = self.layer_of[index];
        (j, index - self.layer_start[j - 1] + 1)
    }

    /// Index of the distinguished last horizontal coordinate `x_m`.
    pub fn xm_index(&self) -> usize {
        self.horizontal_dim() - 1
    }

    /// Canonical coordinate names: `x1..xm` on the first layer, `y{j}_{s}`
    /// above.
    pub fn coordinate_names(&self) -> Vec<String> {
        (0..self.dimension())
            .map(|i| {
                let (j, s) = self.layer_slot(i);
                if j == 1 {
                    format!("x{s}")
                } else {
                    format!("y{j}_{s}")
                }
            })
            .collect()
    }

    /// Resolves a coordinate name, canonical or alias.
    pub fn coordinate_index(&self, name: &str) -> Option<usize> {
        if let Some(&i) = self.aliases.get(name) {
            return Some(i);
        }
        self.coordinate_names().iter().position(|n| n == name)
    }

    pub fn structure_constants(
        &self,
    ) -> impl Iterator<Item = (&(usize, usize), &Vec<(usize, Rational)>)> {
        self.brackets.iter()
    }

    /// Bilinear bracket on coordinate vectors, generic over the coefficient
    /// ring.
    pub fn bracket_generic<T: BracketCoeff>(&self, u: &[T], v: &[T]) -> Vec<T> {
        assert_eq!(u.len(), self.dimension());
        assert_eq!(v.len(), self.dimension());
        let mut out: Vec<T> = (0..self.dimension()).map(|_| T::zero_like(&u[0])).collect();
        for (&(a, b), terms) in &self.brackets {
            let mut w = u[a].coeff_mul(&v[b]);
            let cross = u[b].coeff_mul(&v[a]);
            w.coeff_add_assign(&cross.coeff_scale(&-Rational::from_integer(1.into())));
            if w.coeff_is_zero() {
                continue;
            }
            for (c, k) in terms {
                let term = w.coeff_scale(k);
                out[*c].coeff_add_assign(&term);
            }
        }
        out
    }

    fn bracket_coords(&self, u: &[Rational], v: &[Rational]) -> Vec<Rational> {
        self.bracket_generic(u, v)
    }

    fn with_aliases(self: Arc<Self>, pairs: &[(&str, usize)]) -> Arc<Self> {
        // Builders call this before the Arc is shared, so the mutation is safe.
        let mut inner = Arc::try_unwrap(self).unwrap_or_else(|_| panic!("alias after sharing"));
        inner.aliases = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Arc::new(inner)
    }
}

/// Heisenberg group of dimension `2n + 1`: layers `(2n, 1)` with
/// `[e_i, e_{n+i}] = e_{2n+1}`.
pub fn heisenberg(n: usize) -> Group {
    assert!(n >= 1, "heisenberg needs n >= 1");
    let table: Vec<((usize, usize), Vec<(usize, Rational)>)> = (0..n)
        .map(|i| ((i, n + i), vec![(2 * n, Rational::from_integer(1.into()))]))
        .collect();
    let g = Stratification::build(&format!("heisenberg({n})"), &[2 * n, 1], &table)
        .expect("heisenberg is a valid stratification");
    if n == 1 {
        g.with_aliases(&[("x", 0), ("y", 1), ("t", 2)])
    } else {
        g.with_aliases(&[("t", 2 * n)])
    }
}

/// Engel group: layers `(2, 1, 1)` with `[e1, e2] = e3`, `[e1, e3] = e4`.
pub fn engel() -> Group {
    let one = || Rational::from_integer(1.into());
    let g = Stratification::build(
        "engel",
        &[2, 1, 1],
        &[((0, 1), vec![(2, one())]), ((0, 2), vec![(3, one())])],
    )
    .expect("engel is a valid stratification");
    g.with_aliases(&[("x", 0), ("y", 1), ("z", 2), ("t", 3)])
}

/// Free step-two group on `m` generators: layers `(m, m(m-1)/2)` with
/// `[e_i, e_j] = e_{ij}` for `i < j`, second-layer slots in lexicographic
/// pair order.
pub fn free_step2(m: usize) -> Group {
    assert!(m >= 2, "free_step2 needs m >= 2");
    let mut table = Vec::new();
    let mut slot = m;
    for i in 0..m {
        for j in i + 1..m {
            table.push(((i, j), vec![(slot, Rational::from_integer(1.into()))]));
            slot += 1;
        }
    }
    Stratification::build(&format!("free_step2({m})"), &[m, m * (m - 1) / 2], &table)
        .expect("free step-two is a valid stratification")
}

/// Resolves builtin names: `heisenberg`, `heisenberg(n)`, `engel`,
/// `free_step2(m)`.
pub fn builtin(name: &str) -> Result<Group, AlgebraError> {
    let s = name.trim();
    let (head, arg) = match s.split_once('(') {
        Some((h, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| AlgebraError::UnknownGroup(name.to_string()))?;
            let v: usize =
                inner.trim().parse().map_err(|_| AlgebraError::UnknownGroup(name.to_string()))?;
            (h.trim(), Some(v))
        }
        None => (s, None),
    };
    match (head, arg) {
        ("heisenberg", None) => Ok(heisenberg(1)),
        ("heisenberg", Some(n)) if n >= 1 => Ok(heisenberg(n)),
        ("engel", None) => Ok(engel()),
        ("free_step2", Some(m)) if m >= 2 => Ok(free_step2(m)),
        _ => Err(AlgebraError::UnknownGroup(name.to_string())),
    }
}

/// An element of the Lie algebra in basis coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    group: Group,
    coords: Vec<Rational>,
}

impl AlgebraElement {
    pub fn new(group: &Group, coords: Vec<Rational>) -> Result<Self, AlgebraError> {
        if coords.len() != group.dimension() {
            return Err(AlgebraError::BadIndex(format!(
                "element has {} coordinates, algebra has dimension {}",
                coords.len(),
                group.dimension()
            )));
        }
        Ok(AlgebraElement { group: group.clone(), coords })
    }

    pub fn zero(group: &Group) -> Self {
        AlgebraElement { group: group.clone(), coords: vec![Rational::zero(); group.dimension()] }
    }

    pub fn basis(group: &Group, index: usize) -> Result<Self, AlgebraError> {
        if index >= group.dimension() {
            return Err(AlgebraError::BadIndex(format!("basis index {index}")));
        }
        let mut e = Self::zero(group);
        e.coords[index] = Rational::from_integer(1.into());
        Ok(e)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    fn check_same(&self, other: &Self) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.group, &other.group) || self.group == other.group {
            Ok(())
        } else {
            Err(AlgebraError::Mismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect();
        Ok(AlgebraElement { group: self.group.clone(), coords })
    }

    pub fn scale(&self, k: &Rational) -> Self {
        AlgebraElement {
            group: self.group.clone(),
            coords: self.coords.iter().map(|c| c * k).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::from_integer(1.into()))
    }

    pub fn bracket(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        Ok(AlgebraElement {
            group: self.group.clone(),
            coords: self.group.bracket_coords(&self.coords, &other.coords),
        })
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(format_rational).collect();
        write!(f, "{}", parts.join(","))
    }
}

// ---------------------------------------------------------------------------
// Group definition files
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct GroupFile {
    name: String,
    layers: Vec<usize>,
    brackets: Vec<BracketRule>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BracketRule {
    left: [usize; 2],
    right: [usize; 2],
    result: Vec<BasisTerm>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BasisTerm {
    basis: [usize; 2],
    coeff: String,
}

/// Parses the JSON group-definition format: layer dimensions plus bracket
/// rules addressed by 1-based `[layer, slot]` pairs with `num/den`
/// coefficients.
pub fn from_json_str(text: &str) -> Result<Group, AlgebraError> {
    let file: GroupFile =
        serde_json::from_str(text).map_err(|e| AlgebraError::Malformed(e.to_string()))?;
    if file.layers.is_empty() || file.layers.contains(&0) {
        return Err(AlgebraError::BadLayers(format!("{:?}", file.layers)));
    }
    let flat = |pair: [usize; 2]| -> Result<usize, AlgebraError> {
        let (layer, slot) = (pair[0], pair[1]);
        if layer == 0 || layer > file.layers.len() || slot == 0 || slot > file.layers[layer - 1] {
            return Err(AlgebraError::BadIndex(format!("(layer {layer}, slot {slot})")));
        }
        Ok(file.layers[..layer - 1].iter().sum::<usize>() + slot - 1)
    };
    let mut table = Vec::new();
    for rule in &file.brackets {
        let a = flat(rule.left)?;
        let b = flat(rule.right)?;
        let mut terms = Vec::new();
        for t in &rule.result {
            let c = flat(t.basis)?;
            let k = parse_rational(&t.coeff).map_err(|e| AlgebraError::Malformed(e.to_string()))?;
            terms.push((c, k));
        }
        table.push(((a, b), terms));
    }
    Stratification::build(&file.name, &file.layers, &table)
}

/// Serializes a group to the JSON definition format.
pub fn to_json_string(group: &Group) -> String {
    let brackets = group
        .structure_constants()
        .map(|(&(a, b), terms)| {
            let ls = |i: usize| {
                let (j, s) = group.layer_slot(i);
                [j, s]
            };
            BracketRule {
                left: ls(a),
                right: ls(b),
                result: terms
                    .iter()
                    .map(|(c, k)| BasisTerm { basis: ls(*c), coeff: format_rational(k) })
                    .collect(),
            }
        })
        .collect();
    let file = GroupFile {
        name: group.name().to_string(),
        layers: group.layer_dims().to_vec(),
        brackets,
    };
    serde_json::to_string_pretty(&file).expect("group file serializes")
}
