//! Criterion checks shared by the acceptance target and the invariant tests.
//! Every oracle here is independent of the code under test: exact rational
//! arithmetic, brute-force suprema, finite differences and dense scans.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use kshopf::interval::{ComplexInterval, ScalarInterval};
use kshopf::operators::{block_norms, BlockNormMatrix};
use kshopf::par::Execution;
use kshopf::sequence::{conv1d, conv2d, Seq1D, Seq2D, Truncation, Weights, XIndex, XVector};
use kshopf::system::{d2h_blocks, d3h_blocks, dh_apply, eval_h, AnchorPoint};
use kshopf::tail::{tail_norm_bound, DiagonalDenominator, RationalDiagonalSymbol, TailSpace};

pub type C = Complex64;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- intervals

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn contains(iv: ScalarInterval, x: &BigRational) -> bool {
    q(iv.lo()) <= *x && *x <= q(iv.hi())
}

/// Random finite double with a spread of exponents and signs.
pub fn random_double(r: &mut impl Rng) -> f64 {
    let m: f64 = r.random_range(0.5..1.0);
    let e: i32 = r.random_range(-30..30);
    let s = if r.random_bool(0.5) { 1.0 } else { -1.0 };
    if r.random_bool(0.05) {
        return 0.0;
    }
    s * m * 2f64.powi(e)
}

pub fn random_interval(r: &mut impl Rng) -> ScalarInterval {
    let a = random_double(r);
    let w = if r.random_bool(0.3) { 0.0 } else { a.abs().max(1e-300) * r.random_range(0.0..1e-3) };
    ScalarInterval::new(a, a + w).unwrap()
}

/// Endpoints and an interior point.
fn samples(iv: ScalarInterval, r: &mut impl Rng) -> [f64; 3] {
    let t: f64 = r.random_range(0.0..1.0);
    let mid = (iv.lo() + t * (iv.hi() - iv.lo())).clamp(iv.lo(), iv.hi());
    [iv.lo(), iv.hi(), mid]
}

fn cq(z: (f64, f64)) -> (BigRational, BigRational) {
    (q(z.0), q(z.1))
}

fn cmul(a: &(BigRational, BigRational), b: &(BigRational, BigRational)) -> (BigRational, BigRational) {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

fn ccontains(iv: &ComplexInterval, z: &(BigRational, BigRational)) -> bool {
    contains(iv.re, &z.0) && contains(iv.im, &z.1)
}

/// Randomized containment tests over the interval operations. Returns the
/// number of checks and the first failure, if any.
pub fn interval_containment(n_checks: usize, seed: u64) -> (usize, Option<String>) {
    let mut r = rng(seed);
    let mut done = 0;
    while done < n_checks {
        let a = random_interval(&mut r);
        let b = random_interval(&mut r);
        let (sa, sb) = (samples(a, &mut r), samples(b, &mut r));
        let (x, y) = (sa[r.random_range(0..3)], sb[r.random_range(0..3)]);
        let (qx, qy) = (q(x), q(y));
        let op = r.random_range(0..16);
        let ok = match op {
            0 => contains(a + b, &(&qx + &qy)),
            1 => contains(a - b, &(&qx - &qy)),
            2 => contains(a * b, &(&qx * &qy)),
            3 => match a.div(&b) {
                Ok(d) => contains(d, &(&qx / &qy)),
                Err(_) => b.contains_zero(),
            },
            4 => contains(a.sqr(), &(&qx * &qx)),
            5 => {
                let p = r.random_range(0..7u32);
                let mut e = q(1.0);
                for _ in 0..p {
                    e = &e * &qx;
                }
                contains(a.pow_int(p), &e)
            }
            6 => {
                let s = a.abs().sqrt();
                let x2 = q(x.abs());
                (s.lo() <= 0.0 || q(s.lo()) * q(s.lo()) <= x2) && q(s.hi()) * q(s.hi()) >= x2
            }
            7 => contains(a.scale(y), &(&qx * &qy)),
            8 => contains(-a, &(-qx.clone())),
            9 => match a.recip() {
                Ok(d) if x != 0.0 => contains(d, &(q(1.0) / &qx)),
                Ok(_) => false,
                Err(_) => a.contains_zero(),
            },
            10..=15 => {
                let c = random_interval(&mut r);
                let d = random_interval(&mut r);
                let (za, zb) = (ComplexInterval::new(a, c), ComplexInterval::new(b, d));
                let (u, v) = (cq((x, samples(c, &mut r)[2])), cq((y, samples(d, &mut r)[2])));
                match op {
                    10 => ccontains(&(za + zb), &(&u.0 + &v.0, &u.1 + &v.1)),
                    11 => ccontains(&(za - zb), &(&u.0 - &v.0, &u.1 - &v.1)),
                    12 => ccontains(&(za * zb), &cmul(&u, &v)),
                    13 => match za.div(&zb) {
                        Ok(w) => {
                            let den = &v.0 * &v.0 + &v.1 * &v.1;
                            let num = cmul(&u, &(v.0.clone(), -v.1.clone()));
                            ccontains(&w, &(&num.0 / &den, &num.1 / &den))
                        }
                        Err(_) => zb.magnitude_lower() <= 0.0,
                    },
                    14 => {
                        let m2 = &u.0 * &u.0 + &u.1 * &u.1;
                        let (lo, hi) = (q(za.magnitude_lower()), q(za.magnitude_upper()));
                        &lo * &lo <= m2 && m2 <= &hi * &hi
                    }
                    _ => ccontains(&za.mul_i(), &(-u.1.clone(), u.0.clone())) && ccontains(&za.conj(), &(u.0.clone(), -u.1.clone())),
                }
            }
            _ => unreachable!(),
        };
        if !ok {
            return (done, Some(format!("op {op} failed for a={a:?} b={b:?} x={x:e} y={y:e}")));
        }
        done += 1;
    }
    (done, None)
}

// ---------------------------------------------------------------- sequences

pub fn random_c(r: &mut impl Rng, s: f64) -> C {
    C::new(r.random_range(-1.0..1.0) * s, r.random_range(-1.0..1.0) * s)
}

pub fn random_seq1(r: &mut impl Rng, n: usize) -> Seq1D<ComplexInterval> {
    Seq1D::from_fn(n, |_| ComplexInterval::point(random_c(r, 1.0)))
}

pub fn random_seq2(r: &mut impl Rng, m: usize, n: usize) -> Seq2D<ComplexInterval> {
    Seq2D::from_fn(m, n, |_, _| ComplexInterval::point(random_c(r, 1.0)))
}

/// ‖u*v‖ ≤ ‖u‖‖v‖ and exact support growth for `pairs` random pairs in one
/// and two dimensions.
pub fn banach_algebra(pairs: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for i in 0..pairs {
        let w = Weights::new(r.random_range(1.0..1.3), r.random_range(1.0..1.3));
        let (n1, n2) = (r.random_range(1..12), r.random_range(1..12));
        let (u, v) = (random_seq1(&mut r, n1), random_seq1(&mut r, n2));
        let uv = conv1d(&u, &v);
        if uv.n() != n1 + n2 {
            return Err(format!("1D support {} != {}", uv.n(), n1 + n2));
        }
        let corner = uv.get((n1 + n2) as i64);
        if !(corner.contains((u.get(n1 as i64) * v.get(n2 as i64)).mid())) {
            return Err("1D extreme coefficient".into());
        }
        let (a, b, c) = (uv.norm(&w), u.norm(&w), v.norm(&w));
        if a > b * c * (1.0 + 1e-12) {
            return Err(format!("pair {i}: 1D ‖u*v‖ = {a} > {}", b * c));
        }
        let (m1, m2) = (r.random_range(1..5), r.random_range(1..5));
        let (u, v) = (random_seq2(&mut r, m1, n1), random_seq2(&mut r, m2, n2));
        let uv = conv2d(&u, &v);
        if (uv.m(), uv.n()) != (m1 + m2, n1 + n2) {
            return Err(format!("2D support ({}, {})", uv.m(), uv.n()));
        }
        let (a, b, c) = (uv.norm(&w), u.norm(&w), v.norm(&w));
        if a > b * c * (1.0 + 1e-12) {
            return Err(format!("pair {i}: 2D ‖u*v‖ = {a} > {}", b * c));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- block norms

/// Weight of a column or row index.
fn weight(idx: XIndex, w: &Weights) -> f64 {
    match idx {
        XIndex::Scalar(_) => 1.0,
        XIndex::Y(k) => w.nu2.powi(k.abs() as i32),
        XIndex::Z(j, k) => w.nu1.powi(j.abs() as i32) * w.nu2.powi(k.abs() as i32),
    }
}

fn block_of(idx: XIndex) -> usize {
    match idx {
        XIndex::Scalar(_) => 0,
        XIndex::Y(_) => 1,
        XIndex::Z(..) => 2,
    }
}

/// Component norms of a real vector laid out by `t`.
fn components(v: &[f64], t: Truncation, w: &Weights) -> [f64; 3] {
    let mut c = [0.0; 3];
    for (p, x) in v.iter().enumerate() {
        let idx = t.index(p);
        let b = block_of(idx);
        if b == 0 {
            c[0] = f64::max(c[0], x.abs());
        } else {
            c[b] += x.abs() * weight(idx, w);
        }
    }
    c
}

/// Brute-force block norms: suprema over weighted basis vectors for the
/// sequence blocks and over sign vectors for the scalar block.
pub fn brute_block_norms(abs: &DMatrix<f64>, rows: Truncation, cols: Truncation, w: &Weights) -> [[f64; 3]; 3] {
    let mut b = [[0.0f64; 3]; 3];
    for c in 0..cols.dim() {
        let idx = cols.index(c);
        let bj = block_of(idx);
        if bj == 0 {
            continue;
        }
        let v: Vec<f64> = abs.column(c).iter().map(|x| x / weight(idx, w)).collect();
        let comp = components(&v, rows, w);
        for i in 0..3 {
            b[i][bj] = b[i][bj].max(comp[i]);
        }
    }
    for signs in 0..8u32 {
        let x: Vec<f64> = (0..3).map(|i| if signs >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let v: Vec<f64> = (0..rows.dim()).map(|r| (0..3).map(|c| abs[(r, c)] * x[c]).sum()).collect();
        let comp = components(&v, rows, w);
        for i in 0..3 {
            b[i][0] = b[i][0].max(comp[i]);
        }
    }
    b
}

pub fn random_truncation(r: &mut impl Rng) -> Truncation {
    // Blocks of at most 23 entries: y has 2N+1 ≤ 23, z has (2M+1)(2N+1) ≤ 21.
    let cands = [(1, 1), (1, 2), (1, 3), (2, 1), (3, 1)];
    let (m, n) = cands[r.random_range(0..cands.len())];
    Truncation::new(m, n)
}

pub fn random_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<C> {
    let density: f64 = r.random_range(0.3..1.0);
    DMatrix::from_fn(rows, cols, |_, _| if r.random_bool(density) { random_c(r, 1.0) } else { C::new(0.0, 0.0) })
}

/// Block-norm fidelity on `ops` random operators and op-norm domination on
/// `samples` random vectors. Returns the largest relative deviation.
pub fn norm_fidelity(ops: usize, samples: usize, seed: u64) -> Result<f64, String> {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    let mut kept = Vec::new();
    for i in 0..ops {
        // Every other operator is square so the domination check has work.
        let rows = random_truncation(&mut r);
        let cols = if i % 2 == 0 { rows } else { random_truncation(&mut r) };
        let w = Weights::new(r.random_range(1.0..1.2), r.random_range(1.0..1.2));
        let m = random_matrix(&mut r, rows.dim(), cols.dim());
        let abs = m.map(|z| z.norm());
        let got = block_norms(&abs, rows, cols, &w, Execution::Sequential);
        let want = brute_block_norms(&abs, rows, cols, &w);
        for bi in 0..3 {
            for bj in 0..3 {
                let (g, e) = (got.get(bi, bj), want[bi][bj]);
                let rel = (g - e).abs() / e.max(1e-300);
                if e == 0.0 && g == 0.0 {
                    continue;
                }
                worst = worst.max(rel);
                if rel > 1e-10 {
                    return Err(format!("operator {i} block ({bi},{bj}): {g} vs brute force {e}"));
                }
            }
        }
        if rows == cols {
            kept.push((rows, w, m, got));
        }
    }
    for s in 0..samples {
        let (t, w, m, bn) = &kept[s % kept.len()];
        let x: Vec<C> = (0..t.dim()).map(|_| random_c(&mut r, 1.0)).collect();
        let bx: Vec<C> = (0..t.dim()).map(|i| (0..t.dim()).map(|j| m[(i, j)] * x[j]).sum()).collect();
        let nx = XVector::from_slice(*t, &x).norm(w);
        let nbx = XVector::from_slice(*t, &bx).norm(w);
        if nbx / nx > bn.op_norm_bound() * (1.0 + 1e-12) {
            return Err(format!("sample {s}: ratio {} > op_norm_bound {}", nbx / nx, bn.op_norm_bound()));
        }
    }
    Ok(worst)
}

pub fn op_norm_of(b: &BlockNormMatrix) -> f64 {
    b.op_norm_bound()
}

// ---------------------------------------------------------------- derivatives

pub fn random_x(r: &mut impl Rng, t: Truncation, decay: f64) -> XVector<C> {
    let mut x = XVector::<C>::zeros(t);
    x.lambda1 = random_c(r, 1.0);
    x.lambda2 = random_c(r, 1.0);
    x.a = random_c(r, 1.0);
    for k in -(t.n as i64)..=(t.n as i64) {
        x.y.set(k, random_c(r, decay.powi(k.abs() as i32)));
    }
    for j in -(t.m as i64)..=(t.m as i64) {
        for k in -(t.n as i64)..=(t.n as i64) {
            x.z.set(j, k, random_c(r, decay.powi((j.abs() + k.abs()) as i32)));
        }
    }
    x.symmetrize()
}

fn max_diff(a: &XVector<C>, b: &XVector<C>) -> f64 {
    let t = a.support().max(&b.support());
    a.to_vec(t).iter().zip(b.to_vec(t)).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max)
}

fn max_abs(a: &XVector<C>) -> f64 {
    a.to_vec(a.support()).iter().map(|u| u.norm()).fold(0.0, f64::max)
}

/// Largest relative error of DH, D²H and D³H against central differences
/// with step `h` over `points` random points.
pub fn derivative_fidelity(points: usize, h: f64, seed: u64) -> [f64; 3] {
    let mut r = rng(seed);
    let t = Truncation::new(2, 4);
    let mut worst = [0.0f64; 3];
    for _ in 0..points {
        let x = random_x(&mut r, t, 0.5);
        let u = random_x(&mut r, t, 0.5);
        let c = random_x(&mut r, t, 0.5);
        let anc = AnchorPoint { xhat: random_x(&mut r, t, 0.5), q: random_x(&mut r, t, 0.5), c: random_c(&mut r, 1.0) };
        let fd1 = eval_h(&x.add(&u.scale(h)), &anc).sub(&eval_h(&x.sub(&u.scale(h)), &anc)).scale(0.5 / h);
        let d1 = dh_apply(&x, &anc, &u);
        let fd2 = dh_apply(&x.add(&u.scale(h)), &anc, &c).sub(&dh_apply(&x.sub(&u.scale(h)), &anc, &c)).scale(0.5 / h);
        let d2 = d2h_blocks(&x, &u).apply(&c);
        let fd3 = d2h_blocks(&x.add(&u.scale(h)), &u).apply(&c).sub(&d2h_blocks(&x.sub(&u.scale(h)), &u).apply(&c)).scale(0.5 / h);
        let d3 = d3h_blocks(&x, &u).apply(&c);
        for (k, (fd, d)) in [(fd1, d1), (fd2, d2), (fd3, d3)].iter().enumerate() {
            worst[k] = worst[k].max(max_diff(fd, d) / max_abs(d).max(1e-300));
        }
    }
    worst
}

// ---------------------------------------------------------------- tails

/// Symbol classes used by the validator, drawn with random coefficients.
pub fn random_symbols(r: &mut impl Rng) -> Vec<(String, RationalDiagonalSymbol)> {
    let l1 = ComplexInterval::point(C::new(r.random_range(0.2..0.4), 0.0));
    let l2 = ComplexInterval::point(C::new(r.random_range(0.08..0.3), 0.0));
    let l2b = ComplexInterval::point(C::new(l2.mid().re * r.random_range(0.9..1.1), 0.0));
    let l1b = ComplexInterval::point(C::new(l1.mid().re * r.random_range(0.9..1.1), 0.0));
    let t = Truncation::new(r.random_range(3..10), r.random_range(6..16));
    let p1 = DiagonalDenominator::p1(l2);
    let p2 = DiagonalDenominator::p2(l1, l2);
    let p1b = DiagonalDenominator::p1(l2b);
    let p2b = DiagonalDenominator::p2(l1b, l2b);
    let one = ComplexInterval::ONE;
    let mut out = vec![
        ("1/P1".to_string(), RationalDiagonalSymbol::recip(p1, t, TailSpace::Y)),
        ("1/P2".to_string(), RationalDiagonalSymbol::recip(p2, t, TailSpace::Z)),
    ];
    for p in 1..=4 {
        out.push((format!("K^{p}/P1"), RationalDiagonalSymbol::monomial(one, p, p1, t, TailSpace::Y)));
        out.push((format!("K^{p}/P2"), RationalDiagonalSymbol::monomial(one, p, p2, t, TailSpace::Z)));
    }
    // A_Δ fractions (P(0) − P(1)) / P(1).
    let mut num = [ComplexInterval::ZERO; 5];
    num[4] = p1.alpha - p1b.alpha;
    num[2] = p1.beta - p1b.beta;
    out.push(("dP1/P1".to_string(), RationalDiagonalSymbol::new(num, p1b, t, TailSpace::Y)));
    let mut num = [ComplexInterval::ZERO; 5];
    num[4] = p2.alpha - p2b.alpha;
    num[2] = p2.beta - p2b.beta;
    out.push(("dP2/P2".to_string(), RationalDiagonalSymbol::new(num, p2b, t, TailSpace::Z)));
    out
}

/// Numerator and j-free denominator of an entry at wavenumber k, in floats.
fn float_parts(sym: &RationalDiagonalSymbol, k: i64) -> (C, C) {
    let kf = k as f64;
    let mut n = C::new(0.0, 0.0);
    for c in sym.num.iter().rev() {
        n = n * kf + c.mid();
    }
    let d = &sym.den;
    let k2 = kf * kf;
    (n, (d.alpha.mid() * k2 + d.beta.mid()) * k2 + d.gamma.mid())
}

/// |entry|² given the parts at k, adding i·j to the denominator when the
/// symbol carries it.
fn entry_sq(ij: bool, n: C, p: C, j: i64) -> f64 {
    let im = if ij { p.im + j as f64 } else { p.im };
    n.norm_sqr() / (p.re * p.re + im * im)
}

/// Dense scan of |entry| over the tail out to index `reach`: whole lines in
/// k and in j plus a box near the threshold.
pub fn dense_tail_sup(sym: &RationalDiagonalSymbol, reach: i64) -> f64 {
    let t = sym.threshold;
    let (m, n) = (t.m as i64, t.n as i64);
    let ij = sym.den.ij;
    let entry = |j: i64, k: i64| {
        let (nk, pk) = float_parts(sym, k);
        entry_sq(ij, nk, pk, j)
    };
    let mut best = 0.0f64;
    match sym.space {
        TailSpace::Y => {
            for k in n + 1..=reach {
                best = best.max(entry(0, k)).max(entry(0, -k));
            }
        }
        TailSpace::Z => {
            for k in 0..=reach {
                for sk in [k, -k] {
                    let (nk, pk) = float_parts(sym, sk);
                    for j in [0, 1, m, m + 1] {
                        let j = if sk < 0 { -j } else { j };
                        if !t.contains_z(j, sk) {
                            best = best.max(entry_sq(ij, nk, pk, j));
                        }
                    }
                }
            }
            if ij {
                for k in [0, 1, n / 2, n, n + 1] {
                    let (nk, pk) = float_parts(sym, k);
                    for j in m + 1..=reach {
                        best = best.max(entry_sq(ij, nk, pk, j)).max(entry_sq(ij, nk, pk, -j));
                    }
                }
                for j in -(4 * m)..=(4 * m) {
                    for k in -(4 * n)..=(4 * n) {
                        if !t.contains_z(j, k) {
                            best = best.max(entry(j, k));
                        }
                    }
                }
            }
        }
    }
    best.sqrt()
}

/// tail_norm_bound ≥ dense scan for every symbol class on `draws` draws.
/// Returns the smallest bound/scan ratio seen.
pub fn tail_soundness(draws: usize, reach: i64, seed: u64) -> Result<f64, String> {
    let mut r = rng(seed);
    let mut min_ratio = f64::INFINITY;
    for d in 0..draws {
        for (name, sym) in random_symbols(&mut r) {
            let bound = tail_norm_bound(&sym).map_err(|e| format!("draw {d} {name}: {e}"))?;
            let scan = dense_tail_sup(&sym, reach);
            if scan > bound * (1.0 + 1e-12) {
                return Err(format!("draw {d} {name}: scan {scan:e} > bound {bound:e}"));
            }
            if scan > 0.0 {
                min_ratio = min_ratio.min(bound / scan);
            }
        }
    }
    Ok(min_ratio)
}

// ---------------------------------------------------------------- paths

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}
