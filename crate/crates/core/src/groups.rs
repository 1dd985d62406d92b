//! Finitely generated abelian groups and integer linear algebra.
//!
//! Groups are presented as direct sums of cyclic groups. Homomorphisms are
//! integer matrices acting on generator coordinates. Homology and subgroup
//! comparisons reduce to Smith normal forms of relation matrices.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::invalid("ragged matrix"));
        }
        let data = rows.iter().flat_map(|x| x.iter().cloned().map(Into::into)).collect();
        Ok(IntMatrix { rows: r, cols: c, data })
    }

    /// A matrix with `rows` rows built from columns.
    pub fn from_cols(rows: usize, cols: &[Vec<BigInt>]) -> Self {
        let mut m = IntMatrix::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn diagonal(entries: &[BigInt]) -> Self {
        let mut m = IntMatrix::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }

    /// Columns of `self` followed by columns of `other`.
    pub fn hstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = IntMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    pub fn select_cols(&self, idx: &[usize]) -> IntMatrix {
        let cols: Vec<Vec<BigInt>> = idx.iter().map(|&j| self.col(j)).collect();
        IntMatrix::from_cols(self.rows, &cols)
    }

    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        let mut out = IntMatrix::zeros(idx.len(), self.cols);
        for (r, &i) in idx.iter().enumerate() {
            for j in 0..self.cols {
                out.set(r, j, self.get(i, j).clone());
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += q * row[src]
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(src, j) * q;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += q * col[src]
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, src) * q;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let k = i * self.cols + j;
            self.data[k] = -&self.data[k];
        }
    }

    /// Exact determinant by fraction-free elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a.get(i, k).is_zero()) else {
                    return BigInt::zero();
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self.to_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
        write!(f, "{}x{} {:?}", self.rows, self.cols, rows)
    }
}

/// `d = u * m * v` with `d` diagonal, nonnegative and divisibility-ordered.
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl Snf {
    /// Diagonal entries `d_0 | d_1 | ...`, length `min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

/// Smith normal form, pivoting on the entry of least absolute value
/// (ties broken by lowest row, then column).
pub fn smith_normal_form(m: &IntMatrix) -> Snf {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = a.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| x.abs() < a.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(a, u, v);
            };
            a.swap_rows(t, pi);
            u.swap_rows(t, pi);
            a.swap_cols(t, pj);
            v.swap_cols(t, pj);
            let p = a.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..rows {
                if a.get(i, t).is_zero() {
                    continue;
                }
                let q = -(a.get(i, t) / &p);
                a.add_row(i, t, &q);
                u.add_row(i, t, &q);
                clean &= a.get(i, t).is_zero();
            }
            for j in t + 1..cols {
                if a.get(t, j).is_zero() {
                    continue;
                }
                let q = -(a.get(t, j) / &p);
                a.add_col(j, t, &q);
                v.add_col(j, t, &q);
                clean &= a.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a.get(i, j).is_multiple_of(&p)));
            if let Some(i) = bad {
                a.add_row(t, i, &BigInt::one());
                u.add_row(t, i, &BigInt::one());
                continue;
            }
            break;
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    finish(a, u, v)
}

fn finish(d: IntMatrix, u: IntMatrix, v: IntMatrix) -> Snf {
    Snf { u, d, v }
}

/// Unimodularity by determinant for small matrices, by an exact inverse otherwise.
pub fn is_unimodular(m: &IntMatrix) -> bool {
    if m.rows != m.cols {
        return false;
    }
    if m.rows <= 8 {
        return m.determinant().abs().is_one();
    }
    let s = smith_normal_form(m);
    s.diagonal().iter().all(|x| x.is_one())
}

/// Inverse of a unimodular matrix.
pub fn unimodular_inverse(m: &IntMatrix) -> Result<IntMatrix> {
    let s = smith_normal_form(m);
    if !s.diagonal().iter().all(|x| x.is_one()) || m.rows != m.cols {
        return Err(Error::pre("matrix is not unimodular"));
    }
    // d = u m v = I, so m^-1 = v u
    Ok(s.v.mul(&s.u))
}

/// A basis (as columns) of the integer kernel `{x : m x = 0}`.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let s = smith_normal_form(m);
    let r = s.rank();
    let idx: Vec<usize> = (r..m.cols).collect();
    s.v.select_cols(&idx)
}

/// An integer solution of `m x = b`, if one exists.
pub fn solve(m: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    solve_with(&smith_normal_form(m), m.cols, b)
}

fn solve_with(s: &Snf, ncols: usize, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let c = s.u.mul_vec(b);
    let diag = s.diagonal();
    let mut z = vec![BigInt::zero(); ncols];
    for (i, ci) in c.iter().enumerate() {
        let d = diag.get(i).cloned().unwrap_or_default();
        if d.is_zero() {
            if !ci.is_zero() {
                return None;
            }
        } else {
            let (q, r) = ci.div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            z[i] = q;
        }
    }
    Some(s.v.mul_vec(&z))
}

/// A direct sum of cyclic groups; order 0 stands for an infinite cyclic summand.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CyclicSum {
    pub orders: Vec<BigInt>,
}

impl CyclicSum {
    pub fn new(orders: Vec<BigInt>) -> Self {
        CyclicSum { orders }
    }

    pub fn trivial() -> Self {
        CyclicSum { orders: vec![] }
    }

    pub fn ngens(&self) -> usize {
        self.orders.len()
    }

    pub fn direct_sum(parts: &[CyclicSum]) -> CyclicSum {
        CyclicSum { orders: parts.iter().flat_map(|p| p.orders.iter().cloned()).collect() }
    }

    /// Relation columns `n_i e_i` for the generators of finite order.
    pub fn relations(&self) -> IntMatrix {
        let cols: Vec<Vec<BigInt>> = self
            .orders
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.is_zero())
            .map(|(i, n)| {
                let mut c = vec![BigInt::zero(); self.ngens()];
                c[i] = n.clone();
                c
            })
            .collect();
        IntMatrix::from_cols(self.ngens(), &cols)
    }

    pub fn reduce(&self, x: &mut [BigInt]) {
        for (v, n) in x.iter_mut().zip(&self.orders) {
            if !n.is_zero() {
                *v = v.mod_floor(n);
            }
        }
    }

    pub fn is_zero_elem(&self, x: &[BigInt]) -> bool {
        x.iter().zip(&self.orders).all(|(v, n)| if n.is_zero() { v.is_zero() } else { v.is_multiple_of(n) })
    }

    pub fn invariants(&self) -> FgAbelianGroup {
        FgAbelianGroup::from_relation_matrix(self.ngens(), &self.relations())
    }
}

/// Canonical form: free rank plus invariant factors `t_0 | t_1 | ...`, each `>= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FgAbelianGroup {
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

impl FgAbelianGroup {
    pub fn new(rank: usize, torsion: Vec<BigInt>) -> Result<Self> {
        for t in &torsion {
            if *t < BigInt::from(2) {
                return Err(Error::invalid(format!("invariant factor {t} is below 2")));
            }
        }
        for w in torsion.windows(2) {
            if !w[1].is_multiple_of(&w[0]) {
                return Err(Error::invalid(format!("invariant factors {} and {} are not in divisibility order", w[0], w[1])));
            }
        }
        Ok(FgAbelianGroup { rank, torsion })
    }

    pub fn free(rank: usize) -> Self {
        FgAbelianGroup { rank, torsion: vec![] }
    }

    pub fn z() -> Self {
        FgAbelianGroup::free(1)
    }

    pub fn cyclic(n: u64) -> Self {
        if n == 0 {
            return FgAbelianGroup::z();
        }
        FgAbelianGroup::from_orders(&[BigInt::from(n)])
    }

    pub fn trivial() -> Self {
        FgAbelianGroup::default()
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    /// Normalizes any list of cyclic orders (0 meaning infinite).
    pub fn from_orders(orders: &[BigInt]) -> Self {
        CyclicSum::new(orders.to_vec()).invariants()
    }

    /// `Z^n / span(relation columns)`.
    pub fn from_relation_matrix(n: usize, rel: &IntMatrix) -> Self {
        let s = smith_normal_form(rel);
        let diag = s.diagonal();
        let r = s.rank();
        let torsion: Vec<BigInt> = diag.into_iter().filter(|d| *d > BigInt::one()).collect();
        FgAbelianGroup { rank: n - r, torsion }
    }

    pub fn direct_sum(parts: &[FgAbelianGroup]) -> Self {
        let orders: Vec<BigInt> = parts.iter().flat_map(|g| g.cyclic_sum().orders).collect();
        FgAbelianGroup::from_orders(&orders)
    }

    /// Generator orders: `rank` zeros followed by the invariant factors.
    pub fn cyclic_sum(&self) -> CyclicSum {
        let mut o = vec![BigInt::zero(); self.rank];
        o.extend(self.torsion.iter().cloned());
        CyclicSum::new(o)
    }

    pub fn ngens(&self) -> usize {
        self.rank + self.torsion.len()
    }

    pub fn zero(&self) -> GroupElem {
        GroupElem(vec![BigInt::zero(); self.ngens()])
    }

    pub fn reduce(&self, mut x: Vec<BigInt>) -> GroupElem {
        for (i, t) in self.torsion.iter().enumerate() {
            let v = &mut x[self.rank + i];
            *v = v.mod_floor(t);
        }
        GroupElem(x)
    }

    pub fn elem(&self, coords: &[i64]) -> Result<GroupElem> {
        if coords.len() != self.ngens() {
            return Err(Error::invalid(format!("element has {} coordinates, group has {} generators", coords.len(), self.ngens())));
        }
        Ok(self.reduce(coords.iter().map(|&c| BigInt::from(c)).collect()))
    }

    pub fn check(&self, x: &GroupElem) -> Result<GroupElem> {
        if x.0.len() != self.ngens() {
            return Err(Error::invalid(format!("element has {} coordinates, group has {} generators", x.0.len(), self.ngens())));
        }
        Ok(self.reduce(x.0.clone()))
    }

    pub fn add(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        self.reduce(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect())
    }

    pub fn sub(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        self.reduce(a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect())
    }

    pub fn neg(&self, a: &GroupElem) -> GroupElem {
        self.reduce(a.0.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, a: &GroupElem, k: &BigInt) -> GroupElem {
        self.reduce(a.0.iter().map(|x| x * k).collect())
    }

    /// The first generator, or zero in the trivial group.
    pub fn generator(&self) -> GroupElem {
        let mut z = self.zero();
        if let Some(x) = z.0.first_mut() {
            *x = BigInt::one();
        }
        z
    }
}

impl fmt::Display for FgAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Coordinates of a group element, reduced modulo the torsion orders.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GroupElem(pub Vec<BigInt>);

impl GroupElem {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// A homomorphism between cyclic sums, `codomain x domain` generator matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupHom {
    pub domain: CyclicSum,
    pub codomain: CyclicSum,
    pub matrix: IntMatrix,
}

impl GroupHom {
    /// Validates well-definedness and reduces entries modulo codomain orders.
    pub fn new(domain: CyclicSum, codomain: CyclicSum, matrix: IntMatrix) -> Result<Self> {
        if matrix.rows != codomain.ngens() || matrix.cols != domain.ngens() {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, expected {}x{}",
                matrix.rows,
                matrix.cols,
                codomain.ngens(),
                domain.ngens()
            )));
        }
        for (j, n) in domain.orders.iter().enumerate() {
            if n.is_zero() {
                continue;
            }
            let img: Vec<BigInt> = matrix.col(j).iter().map(|x| x * n).collect();
            if !codomain.is_zero_elem(&img) {
                return Err(Error::invalid(format!("generator {j} of order {n} maps to an element of different order")));
            }
        }
        Ok(GroupHom::new_unchecked(domain, codomain, matrix))
    }

    pub(crate) fn new_unchecked(domain: CyclicSum, codomain: CyclicSum, mut matrix: IntMatrix) -> Self {
        for i in 0..matrix.rows {
            let n = &codomain.orders[i];
            if !n.is_zero() {
                for j in 0..matrix.cols {
                    let v = matrix.get(i, j).mod_floor(n);
                    matrix.set(i, j, v);
                }
            }
        }
        GroupHom { domain, codomain, matrix }
    }

    pub fn zero(domain: CyclicSum, codomain: CyclicSum) -> Self {
        let m = IntMatrix::zeros(codomain.ngens(), domain.ngens());
        GroupHom { domain, codomain, matrix: m }
    }

    pub fn identity(g: CyclicSum) -> Self {
        let m = IntMatrix::identity(g.ngens());
        GroupHom::new_unchecked(g.clone(), g, m)
    }

    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        let mut y = self.matrix.mul_vec(x);
        self.codomain.reduce(&mut y);
        y
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &GroupHom) -> Result<GroupHom> {
        if first.codomain != self.domain {
            return Err(Error::invalid("composition of homomorphisms with mismatched groups"));
        }
        Ok(GroupHom::new_unchecked(first.domain.clone(), self.codomain.clone(), self.matrix.mul(&first.matrix)))
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    pub fn sub(&self, other: &GroupHom) -> Result<GroupHom> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::invalid("difference of homomorphisms with mismatched groups"));
        }
        Ok(GroupHom::new_unchecked(self.domain.clone(), self.codomain.clone(), self.matrix.sub(&other.matrix)))
    }

    /// A preimage of `y`, if `y` lies in the image.
    pub fn lift(&self, y: &[BigInt]) -> Option<Vec<BigInt>> {
        let rel = self.codomain.relations();
        let m = self.matrix.hstack(&rel);
        let x = solve(&m, y)?;
        let mut x = x[..self.domain.ngens()].to_vec();
        self.domain.reduce(&mut x);
        Some(x)
    }

    /// Whether the homomorphism is bijective.
    pub fn is_isomorphism(&self) -> Result<bool> {
        let ker = homology_at(&GroupHom::zero(CyclicSum::trivial(), self.domain.clone()), self)?;
        let coker = homology_at(self, &GroupHom::zero(self.codomain.clone(), CyclicSum::trivial()))?;
        Ok(ker.is_trivial() && coker.is_trivial())
    }
}

/// `ker g / im f` at the middle of `A -f-> B -g-> C`.
pub fn homology_at(f: &GroupHom, g: &GroupHom) -> Result<FgAbelianGroup> {
    Ok(Subquotient::new(f, g)?.group())
}

/// `ker g / im f` with a chosen basis, for computing induced maps.
#[derive(Clone, Debug)]
pub struct Subquotient {
    pub ambient: CyclicSum,
    cycles: IntMatrix,
    cycles_snf: Snf,
    u: IntMatrix,
    u_inv: IntMatrix,
    diag: Vec<BigInt>,
    keep: Vec<usize>,
}

impl Subquotient {
    pub fn new(f: &GroupHom, g: &GroupHom) -> Result<Self> {
        if f.codomain != g.domain {
            return Err(Error::invalid("middle groups of the two maps differ"));
        }
        let gf = g.compose(f)?;
        if !gf.is_zero() {
            return Err(Error::NotExact(format!("{:?}", gf.matrix)));
        }
        let b = f.codomain.clone();
        let nb = b.ngens();
        // x in ker g  iff  (x, y) in ker [G | R_C] for some y
        let big = g.matrix.hstack(&g.codomain.relations());
        let kb = kernel_basis(&big);
        let rows: Vec<usize> = (0..nb).collect();
        let cycles = kb.select_rows(&rows);
        let cycles_snf = smith_normal_form(&cycles);
        let k = cycles.cols;
        let rel = f.matrix.hstack(&b.relations());
        let mut ycols = Vec::with_capacity(rel.cols);
        for j in 0..rel.cols {
            let y = solve_with(&cycles_snf, k, &rel.col(j)).expect("boundaries lie in the cycles");
            ycols.push(y);
        }
        let y = IntMatrix::from_cols(k, &ycols);
        let s = smith_normal_form(&y);
        let mut diag = s.diagonal();
        diag.resize(k, BigInt::zero());
        let keep: Vec<usize> = (0..k).filter(|&i| !diag[i].is_one()).collect();
        let u_inv = unimodular_inverse(&s.u)?;
        Ok(Subquotient { ambient: b, cycles, cycles_snf, u: s.u, u_inv, diag, keep })
    }

    /// Generator orders of the chosen basis (torsion first, then free).
    pub fn cyclic_sum(&self) -> CyclicSum {
        CyclicSum::new(self.keep.iter().map(|&i| self.diag[i].clone()).collect())
    }

    pub fn group(&self) -> FgAbelianGroup {
        let torsion: Vec<BigInt> = self.keep.iter().map(|&i| self.diag[i].clone()).filter(|d| !d.is_zero()).collect();
        let rank = self.keep.iter().filter(|&&i| self.diag[i].is_zero()).count();
        FgAbelianGroup { rank, torsion }
    }

    /// A cycle representing basis element `i`.
    pub fn representative(&self, i: usize) -> Vec<BigInt> {
        let e = self.u_inv.col(self.keep[i]);
        let mut x = self.cycles.mul_vec(&e);
        self.ambient.reduce(&mut x);
        x
    }

    pub fn is_cycle(&self, z: &[BigInt]) -> bool {
        solve_with(&self.cycles_snf, self.cycles.cols, z).is_some()
    }

    /// Coordinates of the class of a cycle.
    pub fn coords(&self, z: &[BigInt]) -> Result<Vec<BigInt>> {
        let y = solve_with(&self.cycles_snf, self.cycles.cols, z).ok_or_else(|| Error::pre("element is not a cycle"))?;
        let w = self.u.mul_vec(&y);
        Ok(self
            .keep
            .iter()
            .map(|&i| if self.diag[i].is_zero() { w[i].clone() } else { w[i].mod_floor(&self.diag[i]) })
            .collect())
    }

    /// The map on subquotients induced by `phi`, which must carry cycles to cycles.
    pub fn induced(&self, target: &Subquotient, phi: &GroupHom) -> Result<GroupHom> {
        let mut cols = Vec::new();
        for i in 0..self.keep.len() {
            let img = phi.apply(&self.representative(i));
            cols.push(target.coords(&img)?);
        }
        let m = IntMatrix::from_cols(target.keep.len(), &cols);
        Ok(GroupHom::new_unchecked(self.cyclic_sum(), target.cyclic_sum(), m))
    }
}

pub mod bigint_json {
    //! Integers as JSON numbers when they fit in `i64`, strings otherwise.
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::de::Error as _;
    use serde_json::Value;

    pub fn to_value(x: &BigInt) -> Value {
        match x.to_i64() {
            Some(v) => Value::from(v),
            None => Value::from(x.to_string()),
        }
    }

    pub fn from_value(v: &Value) -> Result<BigInt, serde_json::Error> {
        match v {
            Value::Number(n) => n
                .as_i64()
                .map(BigInt::from)
                .ok_or_else(|| serde_json::Error::custom(format!("{n} is not an integer"))),
            Value::String(s) => s.parse().map_err(|_| serde_json::Error::custom(format!("'{s}' is not an integer"))),
            other => Err(serde_json::Error::custom(format!("expected an integer, got {other}"))),
        }
    }

    pub fn vec_to_value(xs: &[BigInt]) -> Value {
        Value::Array(xs.iter().map(to_value).collect())
    }

    pub fn vec_from_value(v: &Value) -> Result<Vec<BigInt>, serde_json::Error> {
        match v {
            Value::Array(a) => a.iter().map(from_value).collect(),
            other => Ok(vec![from_value(other)?]),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GroupWire {
    rank: usize,
    #[serde(default)]
    torsion: Vec<serde_json::Value>,
}

impl Serialize for FgAbelianGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupWire { rank: self.rank, torsion: self.torsion.iter().map(bigint_json::to_value).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FgAbelianGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = GroupWire::deserialize(d)?;
        let torsion = w
            .torsion
            .iter()
            .map(bigint_json::from_value)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        FgAbelianGroup::new(w.rank, torsion).map_err(D::Error::custom)
    }
}

impl Serialize for GroupElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        bigint_json::vec_to_value(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(d)?;
        Ok(GroupElem(bigint_json::vec_from_value(&v).map_err(D::Error::custom)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    fn bi(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn z() -> CyclicSum {
        CyclicSum::new(bi(&[0]))
    }

    #[test]
    fn snf_of_diag_2_3() {
        let a = m(&[vec![2, 0], vec![0, 3]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.diagonal(), bi(&[1, 6]));
        assert_eq!(s.u.mul(&a).mul(&s.v), s.d);
        assert!(is_unimodular(&s.u) && is_unimodular(&s.v));
    }

    #[test]
    fn snf_rectangular_and_zero() {
        let a = m(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.diagonal(), bi(&[2, 6, 12]));
        assert_eq!(s.u.mul(&a).mul(&s.v), s.d);
        let zero = IntMatrix::zeros(2, 3);
        assert!(smith_normal_form(&zero).d.is_zero());
    }

    #[test]
    fn determinant_values() {
        assert_eq!(m(&[vec![1, 2], vec![3, 4]]).determinant(), BigInt::from(-2));
        assert_eq!(m(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 5]]).determinant(), BigInt::from(-5));
        assert_eq!(IntMatrix::identity(0).determinant(), BigInt::one());
    }

    #[test]
    fn canonical_groups() {
        assert_eq!(FgAbelianGroup::from_orders(&bi(&[2, 3])), FgAbelianGroup::cyclic(6));
        assert_eq!(FgAbelianGroup::from_orders(&bi(&[4, 6, 0])).torsion, bi(&[2, 12]));
        assert_eq!(FgAbelianGroup::from_orders(&bi(&[1, 0])), FgAbelianGroup::z());
        assert!(FgAbelianGroup::new(0, bi(&[4, 6])).is_err());
        assert_eq!(FgAbelianGroup::new(1, bi(&[6])).unwrap().to_string(), "Z + Z/6");
    }

    #[test]
    fn homology_examples() {
        let zero_in = GroupHom::zero(CyclicSum::trivial(), z());
        let zero_out = GroupHom::zero(z(), CyclicSum::trivial());
        assert_eq!(homology_at(&zero_in, &zero_out).unwrap(), FgAbelianGroup::z());
        let times2 = GroupHom::new(z(), z(), m(&[vec![2]])).unwrap();
        assert_eq!(homology_at(&times2, &zero_out).unwrap(), FgAbelianGroup::cyclic(2));
        let z2 = CyclicSum::new(bi(&[0, 0]));
        let diff = GroupHom::new(z2.clone(), z(), m(&[vec![1, -1]])).unwrap();
        assert_eq!(homology_at(&GroupHom::zero(CyclicSum::trivial(), z2), &diff).unwrap(), FgAbelianGroup::z());
        assert!(matches!(homology_at(&times2, &times2), Err(Error::NotExact(_))));
    }

    #[test]
    fn homology_with_torsion() {
        // Z/4 --x2--> Z/4 --x2--> Z/4 : ker = {0,2}, im = {0,2}
        let z4 = CyclicSum::new(bi(&[4]));
        let f = GroupHom::new(z4.clone(), z4.clone(), m(&[vec![2]])).unwrap();
        assert!(homology_at(&f, &f).unwrap().is_trivial());
        // Z --1--> Z/6 is onto; kernel of Z/6 -> 0 is Z/6
        let z6 = CyclicSum::new(bi(&[6]));
        let onto = GroupHom::new(z(), z6.clone(), m(&[vec![1]])).unwrap();
        assert!(homology_at(&onto, &GroupHom::zero(z6.clone(), CyclicSum::trivial())).unwrap().is_trivial());
        assert!(GroupHom::new(z6, z(), m(&[vec![1]])).is_err());
    }

    #[test]
    fn induced_maps_and_isomorphisms() {
        let z6 = CyclicSum::new(bi(&[6]));
        let five = GroupHom::new(z6.clone(), z6.clone(), m(&[vec![5]])).unwrap();
        assert!(five.is_isomorphism().unwrap());
        let two = GroupHom::new(z6.clone(), z6, m(&[vec![2]])).unwrap();
        assert!(!two.is_isomorphism().unwrap());
    }

    #[test]
    fn lifting() {
        let z6 = CyclicSum::new(bi(&[6]));
        let onto = GroupHom::new(z(), z6, m(&[vec![5]])).unwrap();
        let x = onto.lift(&bi(&[1])).unwrap();
        assert_eq!(onto.apply(&x), bi(&[1]));
    }
}
