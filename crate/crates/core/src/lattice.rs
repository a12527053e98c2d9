//! The group `V = (Z/nZ)^m`: points, pairing, convolution sets and the
//! spanning test.
//!
//! Points are enumerated lexicographically with the first coordinate most
//! significant; that order is used for every per-agent array in the crate.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Upper bound on `N = n^m` accepted by [`GroupParams::new`].
pub const MAX_ORDER: usize = 1 << 24;

/// Modulus `n`, rank `m` and order `N = n^m` of the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGroupParams", into = "RawGroupParams")]
pub struct GroupParams {
    n: u32,
    m: u32,
    order: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGroupParams {
    n: u32,
    m: u32,
}

impl TryFrom<RawGroupParams> for GroupParams {
    type Error = Error;

    fn try_from(raw: RawGroupParams) -> Result<Self> {
        GroupParams::new(raw.n, raw.m)
    }
}

impl From<GroupParams> for RawGroupParams {
    fn from(g: GroupParams) -> Self {
        RawGroupParams { n: g.n, m: g.m }
    }
}

impl GroupParams {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("modulus n must be at least 2, got {n}")));
        }
        if m < 1 {
            return Err(invalid("rank m must be at least 1"));
        }
        let mut order: usize = 1;
        for _ in 0..m {
            order = order
                .checked_mul(n as usize)
                .filter(|&o| o <= MAX_ORDER)
                .ok_or_else(|| invalid(format!("group order {n}^{m} exceeds {MAX_ORDER}")))?;
        }
        Ok(GroupParams { n, m, order })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `N = n^m`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn origin(&self) -> LatticePoint {
        LatticePoint(vec![0; self.m as usize])
    }

    /// Builds a point from arbitrary integer coordinates, reducing each mod `n`.
    pub fn point(&self, coords: &[i64]) -> Result<LatticePoint> {
        if coords.len() != self.m as usize {
            return Err(invalid(format!(
                "point has {} coordinates, expected {}",
                coords.len(),
                self.m
            )));
        }
        let n = self.n as i64;
        Ok(LatticePoint(
            coords.iter().map(|&c| c.rem_euclid(n) as u32).collect(),
        ))
    }

    /// Lexicographic index of a point.
    pub fn index_of(&self, v: &LatticePoint) -> usize {
        debug_assert_eq!(v.0.len(), self.m as usize);
        v.0.iter()
            .fold(0usize, |acc, &c| acc * self.n as usize + c as usize)
    }

    /// Inverse of [`GroupParams::index_of`].
    pub fn point_at(&self, mut index: usize) -> LatticePoint {
        let n = self.n as usize;
        let mut coords = vec![0u32; self.m as usize];
        for c in coords.iter_mut().rev() {
            *c = (index % n) as u32;
            index /= n;
        }
        LatticePoint(coords)
    }

    /// All `N` points in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..self.order).map(move |i| self.point_at(i))
    }

    pub fn add(&self, u: &LatticePoint, v: &LatticePoint) -> LatticePoint {
        LatticePoint(
            u.0.iter()
                .zip(&v.0)
                .map(|(&a, &b)| (a + b) % self.n)
                .collect(),
        )
    }

    pub fn neg(&self, v: &LatticePoint) -> LatticePoint {
        LatticePoint(v.0.iter().map(|&a| (self.n - a) % self.n).collect())
    }

    /// Index of `-v` given the index of `v`.
    pub fn neg_index(&self, index: usize) -> usize {
        self.index_of(&self.neg(&self.point_at(index)))
    }

    /// Coordinates in the symmetric range `(-n/2, n/2]`, handy for display.
    pub fn signed_coords(&self, v: &LatticePoint) -> Vec<i64> {
        let n = self.n as i64;
        v.0.iter()
            .map(|&c| {
                let c = c as i64;
                if 2 * c > n {
                    c - n
                } else {
                    c
                }
            })
            .collect()
    }

    fn check(&self, v: &LatticePoint) -> Result<()> {
        if v.0.len() != self.m as usize {
            return Err(invalid(format!(
                "point {v} has dimension {}, expected {}",
                v.0.len(),
                self.m
            )));
        }
        if v.0.iter().any(|&c| c >= self.n) {
            return Err(invalid(format!("point {v} is not reduced mod {}", self.n)));
        }
        Ok(())
    }
}

/// A point of `(Z/nZ)^m` with coordinates reduced to `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint(Vec<u32>);

impl LatticePoint {
    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The pairing `<u, v> = sum_i u_i v_i mod n`.
pub fn inner_product(u: &LatticePoint, v: &LatticePoint, g: &GroupParams) -> Result<u32> {
    g.check(u)?;
    g.check(v)?;
    Ok(pairing(u.coords(), v.coords(), g.n))
}

#[inline]
pub(crate) fn pairing(u: &[u32], v: &[u32], n: u32) -> u32 {
    let n = n as u64;
    (u.iter()
        .zip(v)
        .map(|(&a, &b)| a as u64 * b as u64 % n)
        .sum::<u64>()
        % n) as u32
}

/// A nonempty set of distinct nonzero offsets, stored in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvolutionSet {
    elements: Vec<LatticePoint>,
}

impl ConvolutionSet {
    pub fn new(g: &GroupParams, mut elements: Vec<LatticePoint>) -> Result<Self> {
        if elements.is_empty() {
            return Err(invalid("convolution set is empty"));
        }
        for e in &elements {
            g.check(e)?;
            if e.is_origin() {
                return Err(invalid("convolution set must not contain the origin"));
            }
        }
        elements.sort();
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("convolution set contains duplicate offsets"));
        }
        Ok(ConvolutionSet { elements })
    }

    /// Builds a set from integer coordinates (reduced mod `n`).
    pub fn from_coords(g: &GroupParams, coords: &[Vec<i64>]) -> Result<Self> {
        let pts = coords
            .iter()
            .map(|c| g.point(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(g, pts)
    }

    /// Parses `"(1,0);(0,1);(-1,0)"`.
    pub fn parse(g: &GroupParams, text: &str) -> Result<Self> {
        Self::from_coords(g, &parse_points(text)?)
    }

    pub fn elements(&self) -> &[LatticePoint] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Formats the set in the same syntax accepted by [`ConvolutionSet::parse`],
    /// using signed coordinates.
    pub fn to_text(&self, g: &GroupParams) -> String {
        self.elements
            .iter()
            .map(|e| {
                let c: Vec<String> = g.signed_coords(e).iter().map(|x| x.to_string()).collect();
                format!("({})", c.join(","))
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Parses a `;`-separated list of parenthesised integer tuples.
pub fn parse_points(text: &str) -> Result<Vec<Vec<i64>>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(invalid("empty point list"));
    }
    text.split(';')
        .map(|item| {
            let item = item.trim();
            let inner = item
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| invalid(format!("malformed point `{item}`")))?;
            inner
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<i64>()
                        .map_err(|_| invalid(format!("malformed coordinate in `{item}`")))
                })
                .collect()
        })
        .collect()
}

/// Size of the subgroup generated by `c`, found by breadth-first closure
/// from the origin along the edges `v -> v + h`.
pub fn closure_size(c: &ConvolutionSet, g: &GroupParams) -> usize {
    let offsets: Vec<usize> = c.elements.iter().map(|h| g.index_of(h)).collect();
    let n = g.n as usize;
    let m = g.m as usize;
    let mut seen = vec![false; g.order];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    let mut digits = vec![0usize; m];
    while let Some(v) = queue.pop_front() {
        for &h in &offsets {
            let w = add_indices(v, h, n, &mut digits);
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count
}

/// True iff `c` generates all of `V`, equivalently iff the Cayley graph is
/// strongly connected.
pub fn spans(c: &ConvolutionSet, g: &GroupParams) -> bool {
    closure_size(c, g) == g.order
}

/// Adds two lexicographic indices digit-wise mod `n`.
fn add_indices(a: usize, b: usize, n: usize, digits: &mut [usize]) -> usize {
    let (mut a, mut b) = (a, b);
    for d in digits.iter_mut().rev() {
        *d = (a % n + b % n) % n;
        a /= n;
        b /= n;
    }
    digits.iter().fold(0, |acc, &d| acc * n + d)
}

/// Neighbour table: row `v` holds the indices of `v + h` for `h` in the set,
/// in the set's sorted order.
#[derive(Debug, Clone)]
pub struct Stencil {
    width: usize,
    table: Vec<usize>,
}

impl Stencil {
    pub fn new(c: &ConvolutionSet, g: &GroupParams) -> Self {
        let n = g.n as usize;
        let offsets: Vec<usize> = c.elements.iter().map(|h| g.index_of(h)).collect();
        let mut digits = vec![0usize; g.m as usize];
        let mut table = Vec::with_capacity(g.order * offsets.len());
        for v in 0..g.order {
            for &h in &offsets {
                table.push(add_indices(v, h, n, &mut digits));
            }
        }
        Stencil {
            width: offsets.len(),
            table,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.table[v * self.width..(v + 1) * self.width]
    }
}
