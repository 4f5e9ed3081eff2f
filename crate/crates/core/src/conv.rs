//! Convolution products `F_1 ∘ ... ∘ F_r` built by straightening `tau_k tau_c` against the relations.
//!
//! Basis: `(c, v)` with `c` a minimal left coset representative (multi-shuffle) and `v` a basis
//! vector of `F_1 ⊗ ... ⊗ F_r`; `(c, v) = tau_{can(c)} (1 ⊗ v)` for a fixed reduced word `can(c)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::{One, Zero};

use crate::klr::Klr;
use crate::linalg::{Acc, Mat, SVec, Q};
use crate::module::{solve_homs, GradedHom, GradedModule, Labelled, ModuleError};

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum ConvError {
    #[error("straightening exceeded the rewriting depth bound")]
    Depth,
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error("factor weights use different ranks")]
    Rank,
}

#[derive(Clone, Debug)]
pub struct Coset {
    /// block label of the strand at each final position
    pub lab: Vec<u8>,
    /// strand -> final position
    pub p: Vec<usize>,
    /// final position -> strand
    pub pinv: Vec<usize>,
    /// canonical reduced word, leftmost letter first
    pub can: Vec<usize>,
}

/// Multi-shuffles of the given block heights, lexicographic in the label sequence.
pub fn shuffles(heights: &[usize]) -> Vec<Vec<u8>> {
    let mut lab: Vec<u8> = Vec::new();
    for (b, &h) in heights.iter().enumerate() {
        lab.extend(std::iter::repeat(b as u8).take(h));
    }
    let mut out = vec![lab.clone()];
    // next lexicographic permutation of a multiset
    loop {
        let n = lab.len();
        if n < 2 {
            break;
        }
        let mut i = n - 1;
        while i > 0 && lab[i - 1] >= lab[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = n - 1;
        while lab[j] <= lab[i - 1] {
            j -= 1;
        }
        lab.swap(i - 1, j);
        lab[i..].reverse();
        out.push(lab.clone());
    }
    out
}

fn canonical_word(lab: &[u8]) -> Vec<usize> {
    let mut l = lab.to_vec();
    let mut w = Vec::new();
    while let Some(k) = (0..l.len().saturating_sub(1)).find(|&k| l[k] > l[k + 1]) {
        w.push(k);
        l.swap(k, k + 1);
    }
    w
}

impl Coset {
    fn new(lab: Vec<u8>, offsets: &[usize]) -> Self {
        let n = lab.len();
        let mut p = vec![0; n];
        let mut seen = vec![0usize; offsets.len()];
        for (pos, &b) in lab.iter().enumerate() {
            let b = b as usize;
            p[offsets[b] + seen[b]] = pos;
            seen[b] += 1;
        }
        let mut pinv = vec![0; n];
        for (i, &x) in p.iter().enumerate() {
            pinv[x] = i;
        }
        let can = canonical_word(&lab);
        Coset { lab, p, pinv, can }
    }
}

/// Permutation (strand -> position) of the word `w[0] w[1] ...` read as a product of `s_k`.
pub fn perm_of_word(n: usize, w: &[usize]) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for &k in w {
        p.swap(k, k + 1);
    }
    p
}

/// Reduced word by repeatedly peeling the smallest left descent.
pub fn reduced_word_of_perm(p: &[usize]) -> Vec<usize> {
    let n = p.len();
    let mut pinv = vec![0; n];
    for (i, &x) in p.iter().enumerate() {
        pinv[x] = i;
    }
    let mut w = Vec::new();
    while let Some(k) = (0..n.saturating_sub(1)).find(|&k| pinv[k] > pinv[k + 1]) {
        w.push(k);
        pinv.swap(k, k + 1);
    }
    w
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Move {
    Commute,
    /// (k+1, k, k+1) -> (k, k+1, k)
    Up(usize),
    /// (k, k+1, k) -> (k+1, k, k+1)
    Down(usize),
}

/// A sequence of braid moves `(position, move)` turning reduced word `a` into `b`.
fn braid_moves(a: &[usize], b: &[usize], offset: usize, n: usize, out: &mut Vec<(usize, Move)>) {
    if a.is_empty() {
        return;
    }
    if a[0] == b[0] {
        braid_moves(&a[1..], &b[1..], offset + 1, n, out);
        return;
    }
    let (x, y) = (a[0], b[0]);
    let far = x.abs_diff(y) >= 2;
    let m = if far { 2 } else { 3 };
    let alt = |s: usize, t: usize| -> Vec<usize> { (0..m).map(|i| if i % 2 == 0 { s } else { t }).collect() };
    let px = alt(x, y);
    let py = alt(y, x);
    // R with w = w0(x,y) R
    let w = perm_of_word(n, a);
    let w0 = perm_of_word(n, &px);
    let mut w0inv = vec![0; n];
    for (i, &v) in w0.iter().enumerate() {
        w0inv[v] = i;
    }
    let r: Vec<usize> = (0..n).map(|i| w0inv[w[i]]).collect();
    let rw = reduced_word_of_perm(&r);
    let mut ax = px.clone();
    ax.extend(&rw);
    let mut ay = py.clone();
    ay.extend(&rw);
    braid_moves(&a[1..], &ax[1..], offset + 1, n, out);
    let mv = if far {
        Move::Commute
    } else if x > y {
        Move::Up(y)
    } else {
        Move::Down(x)
    };
    out.push((offset, mv));
    braid_moves(&ay[1..], &b[1..], offset + 1, n, out);
}

/// The straightening engine for one multi-convolution.
pub struct Conv<'a> {
    klr: &'a Klr,
    pub factors: Vec<GradedModule>,
    pub heights: Vec<usize>,
    pub offsets: Vec<usize>,
    pub n: usize,
    pub dim_v: usize,
    strides: Vec<usize>,
    pub cosets: Vec<Coset>,
    coset_index: HashMap<Vec<u8>, usize>,
    vwords: Vec<Vec<u8>>,
    vdegs: Vec<i64>,
    memo_x: HashMap<(usize, usize), SVec>,
    memo_t: HashMap<(usize, usize), SVec>,
    depth: usize,
}

const MAX_DEPTH: usize = 100_000;

impl<'a> Conv<'a> {
    pub fn new(klr: &'a Klr, factors: &[GradedModule]) -> Self {
        let heights: Vec<usize> = factors.iter().map(|f| f.height()).collect();
        let mut offsets = Vec::new();
        let mut n = 0;
        for h in &heights {
            offsets.push(n);
            n += h;
        }
        let r = factors.len();
        let mut strides = vec![1usize; r];
        for b in (0..r.saturating_sub(1)).rev() {
            strides[b] = strides[b + 1] * factors[b + 1].dim();
        }
        let dim_v: usize = factors.iter().map(|f| f.dim()).product();
        let cosets: Vec<Coset> = shuffles(&heights).into_iter().map(|l| Coset::new(l, &offsets)).collect();
        let coset_index = cosets.iter().enumerate().map(|(i, c)| (c.lab.clone(), i)).collect();
        let mut vwords = Vec::with_capacity(dim_v);
        let mut vdegs = Vec::with_capacity(dim_v);
        for v in 0..dim_v {
            let mut w = Vec::with_capacity(n);
            let mut d = 0;
            for b in 0..r {
                let vb = (v / strides[b]) % factors[b].dim();
                w.extend_from_slice(&factors[b].words[vb]);
                d += factors[b].degs[vb];
            }
            vwords.push(w);
            vdegs.push(d);
        }
        Conv {
            klr,
            factors: factors.to_vec(),
            heights,
            offsets,
            n,
            dim_v,
            strides,
            cosets,
            coset_index,
            vwords,
            vdegs,
            memo_x: HashMap::new(),
            memo_t: HashMap::new(),
            depth: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.cosets.len() * self.dim_v
    }

    pub fn index(&self, c: usize, v: usize) -> usize {
        c * self.dim_v + v
    }

    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx / self.dim_v, idx % self.dim_v)
    }

    /// Index of the tensor of basis vectors `vs[b]`.
    pub fn v_index(&self, vs: &[usize]) -> usize {
        vs.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn v_parts(&self, v: usize) -> Vec<usize> {
        (0..self.factors.len()).map(|b| (v / self.strides[b]) % self.factors[b].dim()).collect()
    }

    fn block_of(&self, j: usize) -> usize {
        self.offsets.iter().rposition(|&o| o <= j).unwrap()
    }

    pub fn word(&self, idx: usize) -> Vec<u8> {
        let (c, v) = self.split(idx);
        let cs = &self.cosets[c];
        cs.pinv.iter().map(|&s| self.vwords[v][s]).collect()
    }

    pub fn degree(&self, idx: usize) -> i64 {
        let (c, v) = self.split(idx);
        let cs = &self.cosets[c];
        let w = &self.vwords[v];
        let mut d = self.vdegs[v];
        for i in 0..self.n {
            for j in i + 1..self.n {
                if cs.lab[cs.p[i]] != cs.lab[cs.p[j]] && cs.p[i] > cs.p[j] {
                    d -= self.klr.cartan.sym(w[i] as usize, w[j] as usize);
                }
            }
        }
        d
    }

    fn par_gen(&self, is_x: bool, j: usize, v: usize) -> SVec {
        let b = self.block_of(j);
        let f = &self.factors[b];
        let vb = (v / self.strides[b]) % f.dim();
        let local = j - self.offsets[b];
        let mat = if is_x { &f.x[local] } else { &f.tau[local] };
        let base = v - vb * self.strides[b];
        let mut out: SVec = mat.col[vb].iter().map(|(i, x)| (base + i * self.strides[b], x.clone())).collect();
        out.sort_by_key(|e| e.0);
        out
    }

    fn coset_swap(&self, c: usize, k: usize) -> usize {
        let mut l = self.cosets[c].lab.clone();
        l.swap(k, k + 1);
        self.coset_index[&l]
    }

    fn enter(&mut self) -> Result<(), ConvError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ConvError::Depth);
        }
        Ok(())
    }

    pub fn act_x(&mut self, j: usize, idx: usize) -> Result<SVec, ConvError> {
        if let Some(r) = self.memo_x.get(&(j, idx)) {
            return Ok(r.clone());
        }
        self.enter()?;
        let (c, v) = self.split(idx);
        let res = if self.cosets[c].can.is_empty() {
            self.par_gen(true, j, v).into_iter().map(|(w, x)| (self.index(c, w), x)).collect()
        } else {
            let k = self.cosets[c].can[0];
            let c1 = self.coset_swap(c, k);
            let sj = if j == k { k + 1 } else if j == k + 1 { k } else { j };
            let i1 = self.index(c1, v);
            let inner = self.act_x(sj, i1)?;
            let mut r = self.act_t_vec(k, &inner)?;
            let w = self.word(i1);
            if w[k] == w[k + 1] && (j == k || j == k + 1) {
                let s = if j == k + 1 { Q::one() } else { -Q::one() };
                r = crate::linalg::axpy(&r, &s, &vec![(i1, Q::one())]);
            }
            r
        };
        self.depth -= 1;
        self.memo_x.insert((j, idx), res.clone());
        Ok(res)
    }

    pub fn act_x_vec(&mut self, j: usize, v: &SVec) -> Result<SVec, ConvError> {
        let mut acc = Acc::new();
        for (i, x) in v {
            let r = self.act_x(j, *i)?;
            acc.add_vec(&r, x);
        }
        Ok(acc.into_svec())
    }

    pub fn act_t_vec(&mut self, k: usize, v: &SVec) -> Result<SVec, ConvError> {
        let mut acc = Acc::new();
        for (i, x) in v {
            let r = self.act_t(k, *i)?;
            acc.add_vec(&r, x);
        }
        Ok(acc.into_svec())
    }

    /// `tau_{w[0]} ... tau_{w[last]} u`
    fn apply_word(&mut self, w: &[usize], u: &SVec) -> Result<SVec, ConvError> {
        let mut r = u.clone();
        for &k in w.iter().rev() {
            if r.is_empty() {
                break;
            }
            r = self.act_t_vec(k, &r)?;
        }
        Ok(r)
    }

    fn apply_x_pow(&mut self, j: usize, p: u32, u: &SVec) -> Result<SVec, ConvError> {
        let mut r = u.clone();
        for _ in 0..p {
            if r.is_empty() {
                break;
            }
            r = self.act_x_vec(j, &r)?;
        }
        Ok(r)
    }

    /// `Q_{nu_k, nu_{k+1}}(x_k, x_{k+1})` applied to a word-homogeneous vector with word `nu`.
    fn apply_q(&mut self, k: usize, nu: &[u8], u: &SVec) -> Result<SVec, ConvError> {
        let terms = self.klr.params.terms(nu[k] as usize, nu[k + 1] as usize).to_vec();
        let mut acc = Acc::new();
        for t in terms {
            let a = self.apply_x_pow(k, t.p, u)?;
            let b = self.apply_x_pow(k + 1, t.q, &a)?;
            acc.add_vec(&b, &t.t);
        }
        Ok(acc.into_svec())
    }

    /// `tau_A (1 ⊗ v) - tau_B (1 ⊗ v)` for reduced words `A`, `B` of the same permutation.
    fn rewrite_error(&mut self, a: &[usize], b: &[usize], v: usize) -> Result<SVec, ConvError> {
        let mut moves = Vec::new();
        braid_moves(a, b, 0, self.n, &mut moves);
        let mut cur = a.to_vec();
        let mut acc = Acc::new();
        let base = vec![(self.index(0, v), Q::one())];
        for (pos, mv) in moves {
            match mv {
                Move::Commute => cur.swap(pos, pos + 1),
                Move::Up(k) | Move::Down(k) => {
                    let suffix = cur[pos + 3..].to_vec();
                    let mut nu = self.vwords[v].clone();
                    for &l in suffix.iter().rev() {
                        nu.swap(l, l + 1);
                    }
                    if nu[k] == nu[k + 2] {
                        let bb = self.klr.params.bbar(nu[k] as usize, nu[k + 1] as usize);
                        if !bb.is_empty() {
                            let u = self.apply_word(&suffix, &base)?;
                            let mut poly = Acc::new();
                            for (e0, e1, e2, t) in bb {
                                let r0 = self.apply_x_pow(k, e0, &u)?;
                                let r1 = self.apply_x_pow(k + 1, e1, &r0)?;
                                let r2 = self.apply_x_pow(k + 2, e2, &r1)?;
                                poly.add_vec(&r2, &t);
                            }
                            let prefix = cur[..pos].to_vec();
                            let err = self.apply_word(&prefix, &poly.into_svec())?;
                            let sign = if matches!(mv, Move::Up(_)) { Q::one() } else { -Q::one() };
                            acc.add_vec(&err, &sign);
                        }
                    }
                    let rep = if matches!(mv, Move::Up(_)) { [k, k + 1, k] } else { [k + 1, k, k + 1] };
                    cur[pos..pos + 3].copy_from_slice(&rep);
                }
            }
        }
        debug_assert_eq!(cur, b);
        Ok(acc.into_svec())
    }

    pub fn act_t(&mut self, k: usize, idx: usize) -> Result<SVec, ConvError> {
        if let Some(r) = self.memo_t.get(&(k, idx)) {
            return Ok(r.clone());
        }
        self.enter()?;
        let (c, v) = self.split(idx);
        let cs = self.cosets[c].clone();
        let res = if cs.lab[k] == cs.lab[k + 1] {
            // s_k c = c s_j inside one block
            let j = cs.pinv[k];
            let main: SVec = self.par_gen(false, j, v).into_iter().map(|(w, x)| (self.index(c, w), x)).collect();
            if cs.can.is_empty() {
                main
            } else {
                let mut a = vec![k];
                a.extend(&cs.can);
                let mut b = cs.can.clone();
                b.push(j);
                let err = self.rewrite_error(&a, &b, v)?;
                crate::linalg::axpy(&main, &Q::one(), &err)
            }
        } else if cs.pinv[k] < cs.pinv[k + 1] {
            let c2 = self.coset_swap(c, k);
            let main = vec![(self.index(c2, v), Q::one())];
            let mut a = vec![k];
            a.extend(&cs.can);
            let b = self.cosets[c2].can.clone();
            if a == b {
                main
            } else {
                let err = self.rewrite_error(&a, &b, v)?;
                crate::linalg::axpy(&main, &Q::one(), &err)
            }
        } else {
            let c1 = self.coset_swap(c, k);
            let i1 = self.index(c1, v);
            let nu = self.word(i1);
            let qv = self.apply_q(k, &nu, &vec![(i1, Q::one())])?;
            if cs.can[0] == k {
                qv
            } else {
                let mut b = vec![k];
                b.extend(self.cosets[c1].can.clone());
                let err = self.rewrite_error(&cs.can, &b, v)?;
                let terr = self.act_t_vec(k, &err)?;
                crate::linalg::axpy(&qv, &Q::one(), &terr)
            }
        };
        self.depth -= 1;
        self.memo_t.insert((k, idx), res.clone());
        Ok(res)
    }

    /// Build the convolution module.
    pub fn build(&mut self) -> Result<GradedModule, ConvError> {
        let d = self.dim();
        let mut x = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let mut cols = Vec::with_capacity(d);
            for i in 0..d {
                cols.push(self.act_x(j, i)?);
            }
            x.push(Mat::from_cols(d, cols));
        }
        let mut tau = Vec::with_capacity(self.n.saturating_sub(1));
        for k in 0..self.n.saturating_sub(1) {
            let mut cols = Vec::with_capacity(d);
            for i in 0..d {
                cols.push(self.act_t(k, i)?);
            }
            tau.push(Mat::from_cols(d, cols));
        }
        let rank = self.klr.rank();
        let mut beta = vec![0i64; rank];
        for f in &self.factors {
            for (b, x) in beta.iter_mut().zip(&f.beta) {
                *b += x;
            }
        }
        let name = self.factors.iter().map(|f| paren(&f.name)).collect::<Vec<_>>().join("∘");
        Ok(GradedModule {
            name,
            beta,
            words: (0..d).map(|i| self.word(i)).collect(),
            degs: (0..d).map(|i| self.degree(i)).collect(),
            x,
            tau,
        })
    }
}

fn paren(s: &str) -> String {
    if s.contains('∘') || s.contains('+') {
        format!("({s})")
    } else {
        s.to_string()
    }
}

fn run_big_stack<T: Send, F: FnOnce() -> T + Send>(f: F) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(s, f)
            .expect("spawn straightening thread")
            .join()
            .expect("straightening thread panicked")
    })
}

/// Predicted dimension of a convolution.
pub fn conv_dim(factors: &[GradedModule]) -> usize {
    let heights: Vec<usize> = factors.iter().map(|f| f.height()).collect();
    let mut n = 0usize;
    let mut mult: u128 = 1;
    for h in heights {
        for i in 1..=h {
            n += 1;
            mult = mult * n as u128 / i as u128;
        }
    }
    let d: u128 = factors.iter().map(|f| f.dim() as u128).product::<u128>() * mult;
    d.min(usize::MAX as u128) as usize
}

/// `F_1 ∘ ... ∘ F_r`, refusing outputs above `cap`.
pub fn convolution_multi(klr: &Klr, factors: &[GradedModule], cap: usize) -> Result<GradedModule, ConvError> {
    if factors.iter().any(|f| f.rank() != klr.rank()) {
        return Err(ConvError::Rank);
    }
    let dim = conv_dim(factors);
    if dim > cap {
        return Err(ModuleError::Cap { cap, dim }.into());
    }
    if factors.is_empty() {
        return Ok(GradedModule::unit(klr.rank()));
    }
    run_big_stack(|| Conv::new(klr, factors).build())
}

pub fn convolution(klr: &Klr, m: &GradedModule, n: &GradedModule) -> Result<GradedModule, ConvError> {
    convolution_multi(klr, &[m.clone(), n.clone()], crate::module::DEFAULT_CAP)
}

/// The map out of an induced module determined by its values on `1 ⊗ V`:
/// column `(c, v)` is `tau_{can(c)} f0(v)` in `target`. `f0` has one column per `v`.
pub fn lift(conv_cosets: &[Coset], dim_v: usize, target: &GradedModule, f0: &Mat) -> Mat {
    let idx: HashMap<&[u8], usize> = conv_cosets.iter().enumerate().map(|(i, c)| (c.lab.as_slice(), i)).collect();
    let mut cols: Vec<SVec> = vec![Vec::new(); conv_cosets.len() * dim_v];
    // cosets come in an order where s_k c (k = can[0]) may appear later, so resolve recursively
    let mut done = vec![false; conv_cosets.len()];
    fn resolve(c: usize, cs: &[Coset], idx: &HashMap<&[u8], usize>, dim_v: usize, t: &GradedModule, f0: &Mat, cols: &mut Vec<SVec>, done: &mut Vec<bool>) {
        if done[c] {
            return;
        }
        if cs[c].can.is_empty() {
            for v in 0..dim_v {
                cols[c * dim_v + v] = f0.col[v].clone();
            }
        } else {
            let k = cs[c].can[0];
            let mut l = cs[c].lab.clone();
            l.swap(k, k + 1);
            let c1 = idx[l.as_slice()];
            resolve(c1, cs, idx, dim_v, t, f0, cols, done);
            for v in 0..dim_v {
                cols[c * dim_v + v] = t.tau[k].apply(&cols[c1 * dim_v + v]);
            }
        }
        done[c] = true;
    }
    for c in 0..conv_cosets.len() {
        resolve(c, conv_cosets, &idx, dim_v, target, f0, &mut cols, &mut done);
    }
    Mat::from_cols(target.dim(), cols)
}

/// Coset data for a given list of block heights (shared by every convolution with those heights).
pub fn coset_table(heights: &[usize]) -> Vec<Coset> {
    let mut offsets = Vec::new();
    let mut n = 0;
    for h in heights {
        offsets.push(n);
        n += h;
    }
    shuffles(heights).into_iter().map(|l| Coset::new(l, &offsets)).collect()
}

/// Index of `(c, v)` in a convolution with the given block heights.
pub fn conv_index(dim_v: usize, c: usize, v: usize) -> usize {
    c * dim_v + v
}

/// `f_1 ∘ ... ∘ f_r` for maps between factors of the same heights.
pub fn conv_maps(maps: &[&Mat], dom_dims: &[usize], cod_dims: &[usize], heights: &[usize]) -> Mat {
    let ncos = shuffles(heights).len();
    let dv: usize = dom_dims.iter().product();
    let cv: usize = cod_dims.iter().product();
    let r = maps.len();
    let mut dstr = vec![1usize; r];
    let mut cstr = vec![1usize; r];
    for b in (0..r.saturating_sub(1)).rev() {
        dstr[b] = dstr[b + 1] * dom_dims[b + 1];
        cstr[b] = cstr[b + 1] * cod_dims[b + 1];
    }
    let mut tens: Vec<SVec> = Vec::with_capacity(dv);
    for v in 0..dv {
        let mut cur: Vec<(usize, Q)> = vec![(0, Q::one())];
        for b in 0..r {
            let vb = (v / dstr[b]) % dom_dims[b];
            let mut next = Vec::new();
            for (base, x) in &cur {
                for (i, y) in &maps[b].col[vb] {
                    next.push((base + i * cstr[b], x * y));
                }
            }
            cur = next;
        }
        let mut acc = Acc::new();
        for (i, x) in cur {
            acc.add(i, &x);
        }
        tens.push(acc.into_svec());
    }
    let mut cols = Vec::with_capacity(ncos * dv);
    for c in 0..ncos {
        for v in 0..dv {
            cols.push(tens[v].iter().map(|(i, x)| (c * cv + i, x.clone())).collect());
        }
    }
    Mat::from_cols(ncos * cv, cols)
}

/// Tensor of identity-free maps is zero only if a factor is zero.
pub fn is_identity(m: &Mat) -> bool {
    m.rows == m.cols && m.col.iter().enumerate().all(|(j, c)| c.len() == 1 && c[0].0 == j && c[0].1.is_one())
}

/// The isomorphism `(A_1∘..∘A_p)∘(B_1∘..∘B_q) -> A_1∘..∘A_p∘B_1∘..∘B_q` (and similar regroupings).
///
/// `groups` lists how many flat factors each outer factor contains; `outer` are the grouped
/// modules, already built, whose bases are the flat convolutions of their members.
pub fn flatten_map(klr: &Klr, flat_factors: &[GradedModule], groups: &[usize], flat: &GradedModule) -> Result<Mat, ConvError> {
    let mut inner_cosets = Vec::new();
    let mut inner_dimv = Vec::new();
    let mut inner_dims = Vec::new();
    let mut start = 0;
    for &g in groups {
        let fs = &flat_factors[start..start + g];
        let hs: Vec<usize> = fs.iter().map(|f| f.height()).collect();
        inner_cosets.push(coset_table(&hs));
        let dv: usize = fs.iter().map(|f| f.dim()).product();
        inner_dimv.push(dv);
        inner_dims.push(inner_cosets.last().unwrap().len() * dv);
        start += g;
    }
    let _ = klr;
    let flat_heights: Vec<usize> = flat_factors.iter().map(|f| f.height()).collect();
    let flat_cosets = coset_table(&flat_heights);
    let flat_index: HashMap<Vec<u8>, usize> = flat_cosets.iter().enumerate().map(|(i, c)| (c.lab.clone(), i)).collect();
    let flat_dimv: usize = flat_factors.iter().map(|f| f.dim()).product();
    // flat strides
    let r = flat_factors.len();
    let mut fstr = vec![1usize; r];
    for b in (0..r.saturating_sub(1)).rev() {
        fstr[b] = fstr[b + 1] * flat_factors[b + 1].dim();
    }
    let ng = groups.len();
    let mut ostr = vec![1usize; ng];
    for b in (0..ng.saturating_sub(1)).rev() {
        ostr[b] = ostr[b + 1] * inner_dims[b + 1];
    }
    let outer_dimv: usize = inner_dims.iter().product();
    // f0: outer V -> flat, (c_1, v_1) ⊗ ... ⊗ (c_g, v_g) -> (c_1 ⊕ ... ⊕ c_g, v_1 ⊗ ... ⊗ v_g)
    let mut cols = Vec::with_capacity(outer_dimv);
    for ov in 0..outer_dimv {
        let mut lab: Vec<u8> = Vec::new();
        let mut fv = 0usize;
        let mut first_factor = 0usize;
        for gi in 0..ng {
            let part = (ov / ostr[gi]) % inner_dims[gi];
            let (c, v) = (part / inner_dimv[gi], part % inner_dimv[gi]);
            lab.extend(inner_cosets[gi][c].lab.iter().map(|l| l + first_factor as u8));
            // split v into the group's flat factors
            let g = groups[gi];
            let mut rem = v;
            let dims: Vec<usize> = flat_factors[first_factor..first_factor + g].iter().map(|f| f.dim()).collect();
            for t in (0..g).rev() {
                let vb = rem % dims[t];
                rem /= dims[t];
                fv += vb * fstr[first_factor + t];
            }
            first_factor += g;
        }
        let c = flat_index[&lab];
        cols.push(vec![(c * flat_dimv + fv, Q::one())]);
    }
    let f0 = Mat::from_cols(flat.dim(), cols);
    let outer_heights: Vec<usize> = {
        let mut s = 0;
        groups
            .iter()
            .map(|&g| {
                let h = flat_heights[s..s + g].iter().sum();
                s += g;
                h
            })
            .collect()
    };
    let outer_cosets = coset_table(&outer_heights);
    Ok(lift(&outer_cosets, outer_dimv, flat, &f0))
}

/// Inverse of a homogeneous invertible map, computed block by block.
pub fn invert(dom: &GradedModule, cod: &GradedModule, f: &Mat, degree: i64) -> Option<Mat> {
    if dom.dim() != cod.dim() {
        return None;
    }
    let db = dom.blocks();
    let cb = cod.blocks();
    let mut trip: Vec<(usize, usize, Q)> = Vec::new();
    for ((w, d), dcols) in &db {
        let crows = cb.get(&(w.clone(), d + degree))?;
        if crows.len() != dcols.len() {
            return None;
        }
        let sub = f.submatrix(crows, dcols);
        let inv = invert_square(&sub)?;
        for (j, c) in inv.col.iter().enumerate() {
            for (i, x) in c {
                trip.push((dcols[*i], crows[j], x.clone()));
            }
        }
    }
    Some(Mat::from_triplets(dom.dim(), cod.dim(), &trip))
}

/// Dense Gauss-Jordan inverse of a small square matrix.
pub fn invert_square(m: &Mat) -> Option<Mat> {
    let n = m.rows;
    if m.cols != n {
        return None;
    }
    let mut a: Vec<Vec<Q>> = vec![vec![Q::zero(); 2 * n]; n];
    for (j, c) in m.col.iter().enumerate() {
        for (i, x) in c {
            a[*i][j] = x.clone();
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[n + i] = Q::one();
    }
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = Q::one() / a[col][col].clone();
        for x in a[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(pivot_row.iter()) {
                    if !p.is_zero() {
                        *x = &*x - &f * p;
                    }
                }
            }
        }
    }
    let mut trip = Vec::new();
    for (i, row) in a.iter().enumerate() {
        for j in 0..n {
            if !row[n + j].is_zero() {
                trip.push((i, j, row[n + j].clone()));
            }
        }
    }
    Some(Mat::from_triplets(n, n, &trip))
}

/// `F_1 ⊗ ... ⊗ F_r` as a module over the parabolic subalgebra: words, degrees, and the
/// matrices of every `x_j` followed by every non-boundary `tau_j`.
pub struct Tensor {
    pub words: Vec<Vec<u8>>,
    pub degs: Vec<i64>,
    pub gens: Vec<Mat>,
    /// generator labels, `(false, j)` for `x_j` and `(true, j)` for `tau_j`
    pub labels: Vec<(bool, usize)>,
    pub blocks: Vec<Vec<i64>>,
}

pub fn tensor(factors: &[GradedModule]) -> Tensor {
    let r = factors.len();
    let dims: Vec<usize> = factors.iter().map(|f| f.dim()).collect();
    let mut strides = vec![1usize; r];
    for b in (0..r.saturating_sub(1)).rev() {
        strides[b] = strides[b + 1] * dims[b + 1];
    }
    let dim_v: usize = dims.iter().product();
    let mut words = Vec::with_capacity(dim_v);
    let mut degs = Vec::with_capacity(dim_v);
    for v in 0..dim_v {
        let mut w = Vec::new();
        let mut d = 0;
        for b in 0..r {
            let vb = (v / strides[b]) % dims[b];
            w.extend_from_slice(&factors[b].words[vb]);
            d += factors[b].degs[vb];
        }
        words.push(w);
        degs.push(d);
    }
    let mut gens = Vec::new();
    let mut labels = Vec::new();
    let mut offset = 0;
    let mut xs = Vec::new();
    let mut ts = Vec::new();
    for b in 0..r {
        let f = &factors[b];
        let lift = |m: &Mat| -> Mat {
            let cols = (0..dim_v)
                .map(|v| {
                    let vb = (v / strides[b]) % dims[b];
                    let base = v - vb * strides[b];
                    let mut c: SVec = m.col[vb].iter().map(|(i, x)| (base + i * strides[b], x.clone())).collect();
                    c.sort_by_key(|e| e.0);
                    c
                })
                .collect();
            Mat::from_cols(dim_v, cols)
        };
        for (k, m) in f.x.iter().enumerate() {
            xs.push(((false, offset + k), lift(m)));
        }
        for (k, m) in f.tau.iter().enumerate() {
            ts.push(((true, offset + k), lift(m)));
        }
        offset += f.height();
    }
    for (l, m) in xs.into_iter().chain(ts) {
        labels.push(l);
        gens.push(m);
    }
    Tensor { words, degs, gens, labels, blocks: factors.iter().map(|f| f.beta.clone()).collect() }
}

/// Basis indices of `e(beta_1, ..., beta_r) Y`.
pub fn parabolic_indices(y: &GradedModule, blocks: &[Vec<i64>]) -> Vec<usize> {
    (0..y.dim())
        .filter(|&i| {
            let w = &y.words[i];
            let mut pos = 0;
            blocks.iter().all(|b| {
                let h: i64 = b.iter().sum();
                let mut c = vec![0i64; b.len()];
                for &l in &w[pos..pos + h as usize] {
                    c[l as usize] += 1;
                }
                pos += h as usize;
                &c == b
            })
        })
        .collect()
}

/// Degree-`d` homs `F_1 ∘ ... ∘ F_r -> Y`, found by solving on `F_1 ⊗ ... ⊗ F_r` and inducing.
pub fn hom_from_conv(factors: &[GradedModule], y: &GradedModule, d: i64) -> Vec<Mat> {
    hom_from_conv_degrees(factors, y, Some(d)).into_iter().map(|h| h.mat).collect()
}

/// Every homogeneous hom `F_1 ∘ ... ∘ F_r -> Y`, by degree.
pub fn hom_from_conv_all(factors: &[GradedModule], y: &GradedModule) -> Vec<GradedHom> {
    hom_from_conv_degrees(factors, y, None)
}

fn hom_from_conv_degrees(factors: &[GradedModule], y: &GradedModule, only: Option<i64>) -> Vec<GradedHom> {
    let t = tensor(factors);
    let idx = parabolic_indices(y, &t.blocks);
    let sub_words: Vec<Vec<u8>> = idx.iter().map(|&i| y.words[i].clone()).collect();
    let sub_degs: Vec<i64> = idx.iter().map(|&i| y.degs[i]).collect();
    let sub_gens: Vec<Mat> = t
        .labels
        .iter()
        .map(|(is_t, j)| {
            let m = if *is_t { &y.tau[*j] } else { &y.x[*j] };
            m.submatrix(&idx, &idx)
        })
        .collect();
    let src = Labelled { words: &t.words, degs: &t.degs, gens: t.gens.iter().collect() };
    let dst = Labelled { words: &sub_words, degs: &sub_degs, gens: sub_gens.iter().collect() };
    let heights: Vec<usize> = factors.iter().map(|f| f.height()).collect();
    let cosets = coset_table(&heights);
    let emb = |m: &Mat| -> Mat {
        Mat::from_cols(y.dim(), m.col.iter().map(|c| c.iter().map(|(i, x)| (idx[*i], x.clone())).collect()).collect())
    };
    // degrees at which some source word meets the same target word
    let mut tgt: BTreeMap<&[u8], BTreeSet<i64>> = BTreeMap::new();
    for (w, d) in sub_words.iter().zip(&sub_degs) {
        tgt.entry(w.as_slice()).or_default().insert(*d);
    }
    let mut degrees: BTreeSet<i64> = BTreeSet::new();
    for (w, d) in t.words.iter().zip(&t.degs) {
        if let Some(ds) = tgt.get(w.as_slice()) {
            degrees.extend(ds.iter().map(|e| e - d));
        }
    }
    if let Some(d) = only {
        degrees.retain(|e| *e == d);
    }
    let mut out = Vec::new();
    for d in degrees {
        for f0 in solve_homs(&src, &dst, d) {
            out.push(GradedHom { degree: d, mat: lift(&cosets, t.words.len(), y, &emb(&f0)) });
        }
    }
    out
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::klr::check_relations;

    #[test]
    fn shuffles_count_and_order() {
        let s = shuffles(&[2, 1]);
        assert_eq!(s, vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
        assert_eq!(shuffles(&[2, 2, 1]).len(), 30);
    }

    #[test]
    fn nilhecke_square() {
        let k = Klr::preset("A1");
        let l = GradedModule::letter(1, 0);
        let m = convolution(&k, &l, &l).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.degs, vec![0, -2]);
        assert!(check_relations(&k, &m).unwrap().all_pass());
    }

    #[test]
    fn relations_hold_on_small_products() {
        for (p, letters) in [("A2", vec![0usize, 1, 0]), ("A2", vec![1, 0, 1, 0]), ("B2", vec![0, 1, 1]), ("G2", vec![1, 0, 1]), ("A3", vec![0, 2, 1, 0])] {
            let k = Klr::preset(p);
            let fs: Vec<GradedModule> = letters.iter().map(|&i| GradedModule::letter(k.rank(), i)).collect();
            let m = convolution_multi(&k, &fs, 100000).unwrap();
            let rep = check_relations(&k, &m).unwrap();
            assert!(rep.all_pass(), "{p} {letters:?}: {:?}", rep.checks);
        }
    }

    #[test]
    fn nested_products_satisfy_relations() {
        let k = Klr::preset("A2");
        let a = convolution(&k, &GradedModule::letter(2, 0), &GradedModule::letter(2, 1)).unwrap();
        let b = convolution(&k, &a, &a).unwrap();
        assert_eq!(b.dim(), 6 * 4);
        assert!(check_relations(&k, &b).unwrap().all_pass());
    }
}
