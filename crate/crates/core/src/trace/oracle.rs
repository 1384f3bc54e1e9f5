//! Brute-force reference implementations used to cross-check the domain.
//!
//! These work on plain constraint lists with no certificates and no
//! redundancy removal, and are only practical in a handful of dimensions.

use crate::constraint::{combine, Cmp, Constraint, ConstraintId};
use crate::domain::Polyhedron;
use crate::numeric::{Rational, SparseVector, Var};
use crate::simplex::SimplexProblem;

/// Replaces every equality by its two inequalities.
pub fn split_equalities(cs: &[Constraint]) -> Vec<Constraint> {
    cs.iter()
        .flat_map(|c| {
            if c.cmp() == Cmp::Eq {
                let (a, b) = c.split_eq();
                vec![a, b]
            } else {
                vec![c.clone()]
            }
        })
        .collect()
}

pub fn closure(cs: &[Constraint]) -> Vec<Constraint> {
    cs.iter().map(|c| c.closure()).collect()
}

/// Textbook Fourier–Motzkin: every positive/negative pair, exact duplicates
/// removed, nothing else pruned.
pub fn naive_project(cs: &[Constraint], vars: &[Var]) -> Vec<Constraint> {
    let mut work = split_equalities(cs);
    for &v in vars {
        let mut next = Vec::new();
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for c in work {
            let a = c.term().get(v);
            if a.is_positive() {
                pos.push((a, c));
            } else if a.is_negative() {
                neg.push((a, c));
            } else {
                next.push(c);
            }
        }
        for (ap, p) in &pos {
            for (an, n) in &neg {
                next.push(combine(&an.abs(), p, ap, n).expect("positive coefficients"));
            }
        }
        next.retain(|c| !c.is_trivially_true());
        next.sort();
        next.dedup();
        work = next;
    }
    work
}

/// Assignment by fresh variables and naive projection, applied one
/// assignment at a time over a snapshot of the old values.
pub fn naive_assign(cs: &[Constraint], dim: usize, assigns: &[(Var, crate::domain::LinExpr)]) -> Vec<Constraint> {
    let mut work = cs.to_vec();
    for (i, (_, e)) in assigns.iter().enumerate() {
        let mut term = e.coeffs.neg();
        term.set(dim + i, Rational::one());
        work.push(Constraint::eq(term, e.constant.clone()));
    }
    let olds: Vec<Var> = assigns.iter().map(|(x, _)| *x).collect();
    naive_project(&work, &olds)
        .iter()
        .map(|c| c.rename(|v| if v >= dim { olds[v - dim] } else { v }))
        .collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Basis of `{z : rows·z = 0}` in `d` dimensions.
fn nullspace(rows: &[Vec<Rational>], d: usize) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..d {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][col].recip();
        for x in m[r].iter_mut().take(d) {
            *x = &*x * &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row).take(d) {
                    *x -= &(&f * p);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    (0..d)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut z = vec![Rational::zero(); d];
            z[free] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                z[pc] = -&m[row][free];
            }
            z
        })
        .collect()
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Generators of the homogenized cone `{(x, t) : a·x <= b·t, t >= 0}` of the
/// closure of `cs`: extreme rays of its pointed part and a basis of its
/// lineality space. Rays are found by trying every choice of tight rows.
pub fn cone_generators(cs: &[Constraint], dim: usize) -> (Vec<Vec<Rational>>, Vec<Vec<Rational>>) {
    let d = dim + 1;
    let mut m: Vec<Vec<Rational>> = closure(&split_equalities(cs))
        .iter()
        .map(|c| (0..dim).map(|j| c.term().get(j)).chain([-c.bound()]).collect())
        .collect();
    let mut t_row = vec![Rational::zero(); d];
    t_row[dim] = -Rational::one();
    m.push(t_row);
    let lines = nullspace(&m, d);
    let mut rays: Vec<Vec<Rational>> = Vec::new();
    let need = d - 1 - lines.len();
    for pick in subsets(m.len(), need) {
        let mut eqs: Vec<Vec<Rational>> = pick.iter().map(|&i| m[i].clone()).collect();
        eqs.extend(lines.iter().cloned());
        let null = nullspace(&eqs, d);
        if null.len() != 1 {
            continue;
        }
        for sign in [Rational::one(), -Rational::one()] {
            let r: Vec<Rational> = null[0].iter().map(|x| x * &sign).collect();
            if m.iter().all(|row| !dot(row, &r).is_positive()) {
                // Normalize so duplicates compare equal.
                let lead = r.iter().find(|x| !x.is_zero()).expect("nonzero").abs();
                let r: Vec<Rational> = r.iter().map(|x| x / &lead).collect();
                if !rays.contains(&r) {
                    rays.push(r);
                }
            }
        }
    }
    (rays, lines)
}

/// Is `z` a nonnegative combination of `rays` plus any combination of
/// `lines`?
fn in_cone(z: &[Rational], rays: &[Vec<Rational>], lines: &[Vec<Rational>]) -> bool {
    // Variables: one per ray (nonnegative), one per line (free).
    let gens: Vec<&Vec<Rational>> = rays.iter().chain(lines).collect();
    let mut cs: Vec<Constraint> = (0..z.len())
        .map(|k| {
            let term = SparseVector::from_entries(gens.iter().enumerate().map(|(i, g)| (i, g[k].clone())));
            Constraint::new(term, Cmp::Eq, z[k].clone())
        })
        .collect();
    cs.extend((0..rays.len()).map(|i| Constraint::le(SparseVector::from_ints(&[(i, -1)]), Rational::zero())));
    feasible(&cs)
}

/// Checks `r` against the hull of `p1` and `p2` through cone generators.
/// The closure of `r` must equal the closed hull: every operand generator
/// satisfies `r`, and every generator of `r` is a combination of operand
/// generators. Strictness must be maximal: an inequality of `r` is strict
/// exactly when both non-empty operands satisfy it strictly.
pub fn check_hull(p1: &Polyhedron, p2: &Polyhedron, r: &Polyhedron) -> Result<(), String> {
    let dim = r.dim();
    let ops: Vec<Vec<Constraint>> = [p1, p2].iter().filter(|p| !p.is_bot()).map(|p| p.constraints()).collect();
    if r.is_bot() {
        return if ops.is_empty() { Ok(()) } else { Err("hull is empty".into()) };
    }
    if ops.is_empty() {
        return Err("hull of empty operands is non-empty".into());
    }
    let (mut rays, mut lines) = (Vec::new(), Vec::new());
    for cs in &ops {
        let (rs, ls) = cone_generators(cs, dim);
        rays.extend(rs);
        lines.extend(ls);
    }
    let rc = closure(&split_equalities(&r.constraints()));
    let holds = |g: &[Rational], c: &Constraint, line: bool| {
        let v = (0..dim).map(|j| c.term().get(j) * &g[j]).sum::<Rational>() - c.bound() * &g[dim];
        if line {
            v.is_zero()
        } else {
            !v.is_positive()
        }
    };
    for c in &rc {
        if rays.iter().any(|g| !holds(g, c, false)) || lines.iter().any(|g| !holds(g, c, true)) {
            return Err(format!("hull constraint {c} cuts an operand"));
        }
    }
    let (rrays, rlines) = cone_generators(&r.constraints(), dim);
    for g in rrays.iter().chain(&rlines).chain(rlines.iter().map(|l| l.iter().map(|x| -x).collect::<Vec<_>>()).collect::<Vec<_>>().iter()) {
        if !in_cone(g, &rays, &lines) {
            return Err(format!("hull generator {g:?} is outside the operands' hull"));
        }
    }
    for c in split_equalities(&r.constraints()) {
        let strict_everywhere = ops.iter().all(|cs| raw_entails(cs, &c.with_cmp(Cmp::Lt)));
        match c.cmp() {
            Cmp::Lt if !strict_everywhere => return Err(format!("{c} is strict but an operand reaches its boundary")),
            Cmp::Le if strict_everywhere => return Err(format!("{c} could be strict")),
            _ => {}
        }
    }
    Ok(())
}

/// Is the raw system `cs` satisfiable?
pub fn feasible(cs: &[Constraint]) -> bool {
    SimplexProblem::build(cs.iter().enumerate().map(|(k, c)| (ConstraintId(k as u64), c)))
        .solve()
        .is_feasible()
}

/// Does the raw system `cs` entail `c`?
pub fn raw_entails(cs: &[Constraint], c: &Constraint) -> bool {
    split_equalities(std::slice::from_ref(c)).iter().all(|h| {
        let mut with = cs.to_vec();
        with.push(h.complement().expect("inequality"));
        !feasible(&with)
    })
}

/// Checks `r` against a minimization of the raw system `input`: same set,
/// and no constraint of `r` is implied by the others.
pub fn check_minimized(input: &[Constraint], r: &Polyhedron) -> Result<(), String> {
    if r.is_bot() {
        return if feasible(input) {
            Err("result is empty but the input is satisfiable".into())
        } else {
            Ok(())
        };
    }
    let out = r.constraints();
    for c in &out {
        if !raw_entails(input, c) {
            return Err(format!("input does not entail result constraint {c}"));
        }
    }
    for c in input {
        if !raw_entails(&out, c) {
            return Err(format!("result does not entail input constraint {c}"));
        }
    }
    for (i, c) in out.iter().enumerate() {
        let rest: Vec<Constraint> = out.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| c.clone()).collect();
        if raw_entails(&rest, c) {
            return Err(format!("redundant constraint {c}"));
        }
    }
    Ok(())
}

/// Double inclusion between `r` and the polyhedron described by `cs`.
pub fn same_set(r: &Polyhedron, cs: Vec<Constraint>) -> bool {
    let o = Polyhedron::from_constraints(r.dim(), cs);
    r.same_as(&o)
}
