//! Exact sparse linear algebra over the rationals.

use std::collections::{BTreeMap, HashMap};

use num::{BigInt, BigRational, One, Signed, Zero};

pub type Q = BigRational;

/// Sparse vector: strictly increasing indices, no stored zeros.
pub type SVec = Vec<(usize, Q)>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qfrac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        Some(Q::new(a, b))
    } else {
        let a: BigInt = s.parse().ok()?;
        Some(Q::from_integer(a))
    }
}

pub fn q_to_string(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// `a + c * b` for sparse vectors.
pub fn axpy(a: &SVec, c: &Q, b: &SVec) -> SVec {
    if c.is_zero() {
        return a.clone();
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, c * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + c * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn scale(v: &SVec, c: &Q) -> SVec {
    if c.is_zero() {
        return Vec::new();
    }
    v.iter().map(|(i, x)| (*i, x * c)).collect()
}

pub fn svec_get(v: &SVec, i: usize) -> Q {
    match v.binary_search_by_key(&i, |e| e.0) {
        Ok(p) => v[p].1.clone(),
        Err(_) => Q::zero(),
    }
}

/// Accumulator for building sparse vectors out of many contributions.
#[derive(Default, Clone, Debug)]
pub struct Acc(pub BTreeMap<usize, Q>);

impl Acc {
    pub fn new() -> Self {
        Acc(BTreeMap::new())
    }
    pub fn add(&mut self, i: usize, c: &Q) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(i).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&i);
        }
    }
    pub fn add_vec(&mut self, v: &SVec, c: &Q) {
        for (i, x) in v {
            self.add(*i, &(x * c));
        }
    }
    pub fn into_svec(self) -> SVec {
        self.0.into_iter().filter(|(_, x)| !x.is_zero()).collect()
    }
}

/// Sparse matrix stored by columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub col: Vec<SVec>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, col: vec![Vec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        Mat { rows: n, cols: n, col: (0..n).map(|i| vec![(i, Q::one())]).collect() }
    }

    pub fn from_cols(rows: usize, col: Vec<SVec>) -> Self {
        Mat { rows, cols: col.len(), col }
    }

    pub fn from_triplets(rows: usize, cols: usize, t: &[(usize, usize, Q)]) -> Self {
        let mut acc = vec![Acc::new(); cols];
        for (i, j, x) in t {
            acc[*j].add(*i, x);
        }
        Mat { rows, cols, col: acc.into_iter().map(|a| a.into_svec()).collect() }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Q)> {
        let mut out = Vec::new();
        for (j, c) in self.col.iter().enumerate() {
            for (i, x) in c {
                out.push((*i, j, x.clone()));
            }
        }
        out.sort_by_key(|t| (t.0, t.1));
        out
    }

    pub fn get(&self, i: usize, j: usize) -> Q {
        svec_get(&self.col[j], i)
    }

    pub fn apply(&self, v: &SVec) -> SVec {
        let mut acc = Acc::new();
        for (j, x) in v {
            acc.add_vec(&self.col[*j], x);
        }
        acc.into_svec()
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        Mat { rows: self.rows, cols: other.cols, col: other.col.iter().map(|c| self.apply(c)).collect() }
    }

    pub fn transpose(&self) -> Mat {
        let mut acc: Vec<Vec<(usize, Q)>> = vec![Vec::new(); self.rows];
        for (j, c) in self.col.iter().enumerate() {
            for (i, x) in c {
                acc[*i].push((j, x.clone()));
            }
        }
        Mat { rows: self.cols, cols: self.rows, col: acc }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        self.axpy(&Q::one(), other)
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.axpy(&-Q::one(), other)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: &Q, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            col: self.col.iter().zip(&other.col).map(|(a, b)| axpy(a, c, b)).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Mat {
        Mat { rows: self.rows, cols: self.cols, col: self.col.iter().map(|v| scale(v, c)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.col.iter().all(|c| c.is_empty())
    }

    pub fn nnz(&self) -> usize {
        self.col.iter().map(|c| c.len()).sum()
    }

    /// First nonzero entry in row-major order.
    pub fn leading_entry(&self) -> Option<(usize, usize, Q)> {
        let mut best: Option<(usize, usize, Q)> = None;
        for (j, c) in self.col.iter().enumerate() {
            if let Some((i, x)) = c.first() {
                if best.as_ref().map_or(true, |b| (*i, j) < (b.0, b.1)) {
                    best = Some((*i, j, x.clone()));
                }
            }
        }
        best
    }

    /// Restriction to the given rows and columns (re-indexed in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat {
        let mut pos = HashMap::new();
        for (k, r) in rows.iter().enumerate() {
            pos.insert(*r, k);
        }
        let col = cols
            .iter()
            .map(|j| {
                let mut v: SVec = self.col[*j].iter().filter_map(|(i, x)| pos.get(i).map(|k| (*k, x.clone()))).collect();
                v.sort_by_key(|e| e.0);
                v
            })
            .collect();
        Mat { rows: rows.len(), cols: cols.len(), col }
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new();
        for c in &self.col {
            e.insert(c.clone());
        }
        e.rank()
    }

    /// Kernel basis (vectors in the column space of the domain).
    pub fn kernel(&self) -> Vec<SVec> {
        nullspace(&self.transpose().col, self.cols)
    }

    /// Basis of the column space in semi-echelon form.
    pub fn image_basis(&self) -> Vec<SVec> {
        let mut e = Echelon::new();
        for c in &self.col {
            e.insert(c.clone());
        }
        e.into_rows()
    }
}

/// Incrementally built echelon basis of a subspace.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<SVec>,
    pivot: HashMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon { rows: Vec::new(), pivot: HashMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[SVec] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<SVec> {
        self.rows
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r[0].0).collect()
    }

    pub fn is_pivot(&self, c: usize) -> bool {
        self.pivot.contains_key(&c)
    }

    /// Reduce `v` against the stored rows, eliminating every pivot column.
    pub fn reduce(&self, v: &SVec) -> SVec {
        let mut r = v.clone();
        loop {
            let mut best: Option<(usize, usize)> = None;
            for (c, _) in &r {
                if let Some(&ri) = self.pivot.get(c) {
                    if best.map_or(true, |b| ri < b.0) {
                        best = Some((ri, *c));
                    }
                }
            }
            match best {
                None => return r,
                Some((ri, c)) => {
                    let coef = -svec_get(&r, c);
                    r = axpy(&r, &coef, &self.rows[ri]);
                }
            }
        }
    }

    /// Insert `v`; returns true when it enlarged the span.
    pub fn insert(&mut self, v: SVec) -> bool {
        let r = self.reduce(&v);
        if r.is_empty() {
            return false;
        }
        let lead = r[0].1.clone();
        let r = scale(&r, &(Q::one() / lead));
        self.pivot.insert(r[0].0, self.rows.len());
        self.rows.push(r);
        true
    }

    pub fn contains(&self, v: &SVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Fully reduce so that every row vanishes on the other pivot columns.
    pub fn make_reduced(&mut self) {
        for i in (0..self.rows.len()).rev() {
            let mut r = self.rows[i].clone();
            loop {
                let mut hit = None;
                for (c, _) in r.iter().skip(1) {
                    if let Some(&ri) = self.pivot.get(c) {
                        if ri != i {
                            hit = Some((ri, *c));
                            break;
                        }
                    }
                }
                match hit {
                    None => break,
                    Some((ri, c)) => {
                        let coef = -svec_get(&r, c);
                        r = axpy(&r, &coef, &self.rows[ri]);
                    }
                }
            }
            self.rows[i] = r;
        }
    }

    /// Coordinates of `v` (assumed in the span) relative to the fully reduced rows.
    pub fn coords(&self, v: &SVec) -> Option<SVec> {
        let mut acc = Acc::new();
        let mut r = v.clone();
        loop {
            let hit = r
                .iter()
                .filter_map(|(c, x)| self.pivot.get(c).map(|ri| (*ri, x.clone())))
                .min_by_key(|h| h.0);
            match hit {
                None => break,
                Some((ri, x)) => {
                    acc.add(ri, &x);
                    r = axpy(&r, &-x, &self.rows[ri]);
                }
            }
        }
        if r.is_empty() {
            Some(acc.into_svec())
        } else {
            None
        }
    }
}

/// Basis of `{u : <row, u> = 0 for every row}` in a space of dimension `n`.
pub fn nullspace(rows: &[SVec], n: usize) -> Vec<SVec> {
    let mut e = Echelon::new();
    for r in rows {
        if !r.is_empty() {
            e.insert(r.clone());
        }
    }
    e.make_reduced();
    let pivots: HashMap<usize, usize> = e.rows().iter().enumerate().map(|(k, r)| (r[0].0, k)).collect();
    // column -> list of (pivot row, coefficient)
    let mut by_col: HashMap<usize, Vec<(usize, Q)>> = HashMap::new();
    for r in e.rows() {
        let p = r[0].0;
        for (c, x) in r.iter().skip(1) {
            by_col.entry(*c).or_default().push((p, x.clone()));
        }
    }
    let mut out = Vec::new();
    for f in 0..n {
        if pivots.contains_key(&f) {
            continue;
        }
        let mut v: SVec = vec![(f, Q::one())];
        if let Some(list) = by_col.get(&f) {
            for (p, x) in list {
                v.push((*p, -x));
            }
        }
        v.sort_by_key(|e| e.0);
        out.push(v);
    }
    out
}

/// Scale a nonzero vector so that its first entry is 1.
pub fn normalize_leading(v: &SVec) -> SVec {
    match v.first() {
        None => Vec::new(),
        Some((_, x)) => scale(v, &(Q::one() / x.clone())),
    }
}

pub fn is_nonneg_integer(x: &Q) -> bool {
    x.is_integer() && !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_rank_one() {
        let m = Mat::from_triplets(2, 3, &[(0, 0, q(1)), (0, 1, q(2)), (1, 0, q(2)), (1, 1, q(4))]);
        assert_eq!(m.rank(), 1);
        let k = m.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.apply(v).is_empty());
        }
    }

    #[test]
    fn echelon_coords_roundtrip() {
        let mut e = Echelon::new();
        e.insert(vec![(0, q(1)), (2, q(3))]);
        e.insert(vec![(1, q(2)), (2, q(1))]);
        e.make_reduced();
        let v = vec![(0, q(2)), (1, q(4)), (2, q(8))];
        let c = e.coords(&v).unwrap();
        let mut acc = Acc::new();
        for (k, x) in &c {
            acc.add_vec(&e.rows()[*k], x);
        }
        assert_eq!(acc.into_svec(), v);
        assert!(e.coords(&vec![(2, q(1))]).is_none());
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_q("-3/6").unwrap(), qfrac(-1, 2));
        assert_eq!(q_to_string(&qfrac(4, 2)), "2");
        assert!(parse_q("1/0").is_none());
    }
}
