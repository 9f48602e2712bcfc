//! Independent reference implementations used as test oracles, plus random
//! instance generators. Nothing here calls the solver code under test.
#![allow(dead_code)]

use fixprop::model::{InstanceBuilder, MipInstance, RowSense};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Dense `<=` system kept next to the instance so oracles never read the
/// normalized sparse storage.
#[derive(Debug, Clone)]
pub struct Dense {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub lo: Vec<f64>,
    pub up: Vec<f64>,
    pub int: Vec<bool>,
}

impl Dense {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn feasible(&self, x: &[f64], tol: f64) -> bool {
        x.iter().zip(&self.lo).all(|(v, l)| *v >= l - tol)
            && x.iter().zip(&self.up).all(|(v, u)| *v <= u + tol)
            && self
                .a
                .iter()
                .zip(&self.b)
                .all(|(row, b)| row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() <= b + tol)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Builds the instance from a dense `<=` system. A `Ge` sense writes the row
/// negated, which normalizes back to the same `<=` row.
pub fn to_instance(d: &Dense, senses: &[RowSense]) -> MipInstance {
    let mut bld = InstanceBuilder::new();
    for j in 0..d.n() {
        bld.add_var(format!("x{j}"), d.c[j], d.lo[j], d.up[j], d.int[j]);
    }
    for (i, row) in d.a.iter().enumerate() {
        let entries: Vec<(usize, f64)> = row.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(j, a)| (j, *a)).collect();
        match senses.get(i).copied().unwrap_or(RowSense::Le) {
            RowSense::Le => bld.add_row(format!("r{i}"), entries, RowSense::Le, d.b[i]),
            RowSense::Ge => bld.add_row(
                format!("r{i}"),
                entries.into_iter().map(|(j, a)| (j, -a)).collect(),
                RowSense::Ge,
                -d.b[i],
            ),
            RowSense::Eq => panic!("dense oracle systems hold inequalities only"),
        }
    }
    bld.build().expect("valid dense system")
}

fn random_senses(r: &mut Rng8, m: usize) -> Vec<RowSense> {
    (0..m).map(|_| if r.gen_bool(0.5) { RowSense::Le } else { RowSense::Ge }).collect()
}

/// Pure binary system with small integer coefficients.
pub fn random_binary(r: &mut Rng8, max_vars: usize, max_rows: usize) -> (Dense, MipInstance) {
    let n = r.gen_range(2..=max_vars);
    let m = r.gen_range(1..=max_rows);
    let mut a = vec![vec![0.0; n]; m];
    let mut b = vec![0.0; m];
    for i in 0..m {
        for j in 0..n {
            if r.gen_bool(0.5) {
                a[i][j] = r.gen_range(-5..=5) as f64;
            }
        }
        let pos: f64 = a[i].iter().filter(|v| **v > 0.0).sum();
        let neg: f64 = a[i].iter().filter(|v| **v < 0.0).sum();
        b[i] = (neg + r.gen_range(0.0..=1.0) * (pos - neg)).round();
    }
    let c = (0..n).map(|_| r.gen_range(-10..=10) as f64).collect();
    let d = Dense {
        c,
        a,
        b,
        lo: vec![0.0; n],
        up: vec![1.0; n],
        int: vec![true; n],
    };
    let senses = random_senses(r, m);
    let inst = to_instance(&d, &senses);
    (d, inst)
}

/// Mixed system: binaries, small general integers and up to two bounded
/// continuous variables; at most 4096 integer points.
pub fn random_mip(r: &mut Rng8, max_ints: usize, max_rows: usize) -> (Dense, MipInstance) {
    let nz = r.gen_range(1..=max_ints);
    let nc = r.gen_range(0..=2usize);
    let n = nz + nc;
    let mut lo = vec![0.0; n];
    let mut up = vec![1.0; n];
    let mut points = 1usize;
    for j in 0..nz {
        if points * 4 <= 4096 && r.gen_bool(0.3) {
            lo[j] = r.gen_range(-1..=0) as f64;
            up[j] = lo[j] + 3.0;
            points *= 4;
        } else {
            points *= 2;
        }
    }
    for j in nz..n {
        lo[j] = r.gen_range(-2.0..0.0);
        up[j] = r.gen_range(0.5..3.0);
    }
    let mut int = vec![true; n];
    int[nz..].iter_mut().for_each(|v| *v = false);
    let m = r.gen_range(1..=max_rows);
    let mut a = vec![vec![0.0; n]; m];
    let mut b = vec![0.0; m];
    for i in 0..m {
        for j in 0..n {
            if r.gen_bool(0.6) {
                a[i][j] = if int[j] {
                    r.gen_range(-6..=6) as f64
                } else {
                    (r.gen_range(-4.0..4.0_f64) * 4.0).round() / 4.0
                };
            }
        }
        // rhs between the row's min and max over the box
        let (mut mn, mut mx) = (0.0, 0.0);
        for j in 0..n {
            let (p, q) = (a[i][j] * lo[j], a[i][j] * up[j]);
            mn += p.min(q);
            mx += p.max(q);
        }
        b[i] = ((mn + r.gen_range(0.2..=1.0) * (mx - mn)) * 2.0).round() / 2.0;
    }
    let c = (0..n)
        .map(|j| {
            if int[j] {
                r.gen_range(-9..=9) as f64
            } else {
                (r.gen_range(-5.0..5.0_f64) * 4.0).round() / 4.0
            }
        })
        .collect();
    let d = Dense { c, a, b, lo, up, int };
    let senses = random_senses(r, m);
    let inst = to_instance(&d, &senses);
    (d, inst)
}

/// Continuous LP with finite bounds, `n, m <= max`.
pub fn random_lp(r: &mut Rng8, max: usize) -> (Dense, MipInstance) {
    let n = r.gen_range(1..=max);
    let m = r.gen_range(1..=max);
    let lo: Vec<f64> = (0..n).map(|_| r.gen_range(-3.0..1.0)).collect();
    let up: Vec<f64> = lo.iter().map(|l| l + r.gen_range(0.5..5.0)).collect();
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| if r.gen_bool(0.8) { r.gen_range(-5.0..5.0) } else { 0.0 }).collect())
        .collect();
    let b = (0..m)
        .map(|i| {
            let (mut mn, mut mx) = (0.0, 0.0);
            for j in 0..n {
                let (p, q) = (a[i][j] * lo[j], a[i][j] * up[j]);
                mn += p.min(q);
                mx += p.max(q);
            }
            // occasionally below the minimum, which makes the LP infeasible
            let t = if r.gen_bool(0.05) { r.gen_range(-0.2..0.0) } else { r.gen_range(0.0..=1.0) };
            mn + t * (mx - mn)
        })
        .collect();
    let c = (0..n).map(|_| r.gen_range(-5.0..5.0)).collect();
    let d = Dense {
        c,
        a,
        b,
        lo,
        up,
        int: vec![false; n],
    };
    let senses = random_senses(r, m);
    let inst = to_instance(&d, &senses);
    (d, inst)
}

/// Solves the square system by Gaussian elimination with partial pivoting.
fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[r][k] -= f * m[col][k];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    Some(x)
}

fn combinations(k: usize, n: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, k: usize, n: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, k, n, cur, f);
            cur.pop();
        }
    }
    rec(0, k, n, &mut Vec::with_capacity(k), f);
}

/// Minimum of `c x` over `A x <= b, lo <= x <= up` (all bounds finite) by
/// enumerating basic solutions. `None` when the polytope is empty.
pub fn lp_by_vertices(c: &[f64], a: &[Vec<f64>], b: &[f64], lo: &[f64], up: &[f64]) -> Option<(f64, Vec<f64>)> {
    let n = c.len();
    if n == 0 {
        let ok = b.iter().all(|v| *v >= -1e-9);
        return ok.then(|| (0.0, Vec::new()));
    }
    // constraint list: rows, then x_j <= up_j, then -x_j <= -lo_j
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e.clone(), up[j]));
        e[j] = -1.0;
        rows.push((e, -lo[j]));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    combinations(n, rows.len(), &mut |idx| {
        let m: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let r: Vec<f64> = idx.iter().map(|&i| rows[i].1).collect();
        if let Some(x) = solve_square(m, r) {
            let feas = rows
                .iter()
                .all(|(row, rhs)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= rhs + 1e-7 * (1.0 + rhs.abs()));
            if feas {
                let obj: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                if best.as_ref().is_none_or(|(o, _)| obj < *o) {
                    best = Some((obj, x));
                }
            }
        }
    });
    best
}

/// Calls `f` on every integer point of the box of the integer variables.
pub fn for_each_integer_point(d: &Dense, lo: &[f64], up: &[f64], mut f: impl FnMut(&[f64])) {
    let ints: Vec<usize> = (0..d.n()).filter(|&j| d.int[j]).collect();
    let mut x: Vec<f64> = (0..d.n()).map(|j| if d.int[j] { lo[j] } else { 0.0 }).collect();
    if ints.iter().any(|&j| lo[j] > up[j]) {
        return;
    }
    loop {
        f(&x);
        let mut k = 0;
        loop {
            if k == ints.len() {
                return;
            }
            let j = ints[k];
            if x[j] < up[j] {
                x[j] += 1.0;
                break;
            }
            x[j] = lo[j];
            k += 1;
        }
    }
}

/// Brute-force MIP optimum: enumerate integer points, solve the continuous
/// remainder by vertex enumeration.
pub fn mip_brute_force(d: &Dense) -> Option<f64> {
    let cont: Vec<usize> = (0..d.n()).filter(|&j| !d.int[j]).collect();
    let mut best: Option<f64> = None;
    for_each_integer_point(d, &d.lo, &d.up, |x| {
        let value = if cont.is_empty() {
            d.feasible(x, 1e-9).then(|| d.objective(x))
        } else {
            let fixed: f64 = (0..d.n()).filter(|&j| d.int[j]).map(|j| d.c[j] * x[j]).sum();
            let a: Vec<Vec<f64>> = d.a.iter().map(|row| cont.iter().map(|&j| row[j]).collect()).collect();
            let b: Vec<f64> = d
                .a
                .iter()
                .zip(&d.b)
                .map(|(row, b)| b - (0..d.n()).filter(|&j| d.int[j]).map(|j| row[j] * x[j]).sum::<f64>())
                .collect();
            let c: Vec<f64> = cont.iter().map(|&j| d.c[j]).collect();
            let lo: Vec<f64> = cont.iter().map(|&j| d.lo[j]).collect();
            let up: Vec<f64> = cont.iter().map(|&j| d.up[j]).collect();
            lp_by_vertices(&c, &a, &b, &lo, &up).map(|(o, _)| o + fixed)
        };
        if let Some(v) = value {
            if best.is_none_or(|b| v < b) {
                best = Some(v);
            }
        }
    });
    best
}

/// Inferred objective by the prose rule on a dense matrix: a zero-score
/// variable inherits the score of every row partner that its coefficient
/// pushes against (`a_ij * s_k > 0`), using the previous round's scores.
pub fn inferred_by_prose(c: &[f64], a: &[Vec<f64>], max_rounds: usize) -> Vec<f64> {
    let n = c.len();
    let mut s: Vec<f64> = c.iter().map(|v| if *v > 0.0 { 1.0 } else if *v < 0.0 { -1.0 } else { 0.0 }).collect();
    for _ in 0..max_rounds {
        let prev = s.clone();
        let mut changed = false;
        for j in 0..n {
            if prev[j] != 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for row in a {
                if row[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    if k != j && row[k] != 0.0 && row[j] * prev[k] > 0.0 {
                        acc += prev[k];
                    }
                }
            }
            if acc != 0.0 {
                s[j] = acc;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    s
}
