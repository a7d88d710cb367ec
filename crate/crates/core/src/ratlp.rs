//! Exact rational linear programming.
//!
//! A dense two-phase tableau simplex with Bland's rule over arbitrary
//! precision rationals. Infeasible problems come back with Farkas
//! multipliers read off the phase-one duals; feasible ones with an exact
//! point. No floating point is involved anywhere.

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

/// Exact rational number.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("malformed rational {0:?}")]
    BadRational(String),
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `p/q` with `q > 0` and the fraction reduced; zero is `0/1`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`. Rejects zero denominators.
pub fn parse_rational(s: &str) -> Result<Rational, LpError> {
    let bad = || LpError::BadRational(s.to_string());
    let s_trim = s.trim();
    if s_trim.is_empty() || s_trim.len() > 4096 {
        return Err(bad());
    }
    let (p, q) = match s_trim.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s_trim, "1"),
    };
    let valid = |t: &str| {
        let digits = t.strip_prefix('-').unwrap_or(t);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(p) || !valid(q) {
        return Err(bad());
    }
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// `equalities: a·x = b`, `inequalities: a·x >= b`, optional objective.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub equalities: Vec<(Vec<Rational>, Rational)>,
    pub inequalities: Vec<(Vec<Rational>, Rational)>,
    pub nonneg: Vec<bool>,
    pub objective: Option<(Vec<Rational>, Sense)>,
}

impl LinearProgram {
    /// `num_vars` nonnegative variables, no constraints.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            nonneg: vec![true; num_vars],
            objective: None,
        }
    }

    pub fn eq(mut self, row: Vec<Rational>, rhs: Rational) -> Self {
        self.equalities.push((row, rhs));
        self
    }

    pub fn ge(mut self, row: Vec<Rational>, rhs: Rational) -> Self {
        self.inequalities.push((row, rhs));
        self
    }

    /// `row·x <= rhs`, stored as `-row·x >= -rhs`.
    pub fn le(mut self, row: Vec<Rational>, rhs: Rational) -> Self {
        self.inequalities
            .push((row.into_iter().map(|v| -v).collect(), -rhs));
        self
    }

    pub fn with_objective(mut self, c: Vec<Rational>, sense: Sense) -> Self {
        self.objective = Some((c, sense));
        self
    }

    pub fn free(mut self, var: usize) -> Self {
        self.nonneg[var] = false;
        self
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars;
        if self.nonneg.len() != n {
            return Err(LpError::Dimension("nonnegativity flags".into()));
        }
        for (row, _) in self.equalities.iter().chain(&self.inequalities) {
            if row.len() != n {
                return Err(LpError::Dimension(format!(
                    "row of length {} for {n} variables",
                    row.len()
                )));
            }
        }
        if let Some((c, _)) = &self.objective {
            if c.len() != n {
                return Err(LpError::Dimension("objective".into()));
            }
        }
        Ok(())
    }

    /// Every constraint holds exactly at `x`.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        let dot = |row: &[Rational]| row.iter().zip(x).map(|(a, b)| a * b).sum::<Rational>();
        self.nonneg
            .iter()
            .zip(x)
            .all(|(&nn, v)| !nn || !v.is_negative())
            && self.equalities.iter().all(|(r, b)| dot(r) == *b)
            && self.inequalities.iter().all(|(r, b)| dot(r) >= *b)
    }
}

/// Infeasibility proof: `multipliers[i] >= 0` per inequality and a free
/// `lambda[j]` per equality such that the combined row is `<= 0` on
/// nonnegative variables, `= 0` on free ones, and the combined right-hand
/// side is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rational>,
    pub lambda: Vec<Rational>,
}

impl FarkasCertificate {
    pub fn verify(&self, p: &LinearProgram) -> bool {
        if self.multipliers.len() != p.inequalities.len() || self.lambda.len() != p.equalities.len()
        {
            return false;
        }
        if self.multipliers.iter().any(Signed::is_negative) {
            return false;
        }
        let mut combo = vec![Rational::zero(); p.num_vars];
        let mut rhs = Rational::zero();
        let rows = p
            .inequalities
            .iter()
            .zip(&self.multipliers)
            .chain(p.equalities.iter().zip(&self.lambda));
        for ((row, b), y) in rows {
            for (c, a) in combo.iter_mut().zip(row) {
                *c += a * y;
            }
            rhs += b * y;
        }
        rhs.is_positive()
            && combo.iter().zip(&p.nonneg).all(
                |(c, &nn)| {
                    if nn {
                        !c.is_positive()
                    } else {
                        c.is_zero()
                    }
                },
            )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Feasible(Vec<Rational>),
    /// `duals` has one entry per equality, then one per inequality: an
    /// optimal solution of the dual of the problem written as a
    /// minimization (`>=` rows get nonnegative duals).
    Optimal {
        point: Vec<Rational>,
        value: Rational,
        duals: Vec<Rational>,
    },
    Infeasible(FarkasCertificate),
    Unbounded {
        point: Vec<Rational>,
        ray: Vec<Rational>,
    },
}

struct Tableau {
    rows: Vec<Vec<Rational>>, // last entry is the rhs
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        if !piv.is_one() {
            for v in self.rows[r].iter_mut() {
                *v /= &piv;
            }
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs `d_j = c_j - c_B^T B^{-1} A_j` for all columns.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d: Vec<Rational> = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(row.iter()) {
                if !a.is_zero() {
                    *dj -= cb * a;
                }
            }
        }
        d.truncate(self.ncols);
        d
    }

    /// Bland's rule minimization restricted to columns `allowed`. Returns
    /// `Err(col)` if column `col` is an unbounded direction.
    fn minimize(&mut self, cost: &[Rational], allowed: &[bool]) -> Result<(), usize> {
        loop {
            let d = self.reduced_costs(cost);
            let Some(enter) = (0..self.ncols).find(|&j| allowed[j] && d[j].is_negative()) else {
                return Ok(());
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &row[self.ncols] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Err(enter),
            }
        }
    }

    fn column_values(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.ncols];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            v[b] = row[self.ncols].clone();
        }
        v
    }
}

/// Solves `p` exactly.
pub fn lp_solve(p: &LinearProgram) -> Result<LpOutcome, LpError> {
    p.check()?;
    let n = p.num_vars;
    // structural columns: x_j (or x_j^+, x_j^-), then surplus per inequality
    let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
    let mut ncols = 0;
    for j in 0..n {
        if p.nonneg[j] {
            var_cols.push((ncols, None));
            ncols += 1;
        } else {
            var_cols.push((ncols, Some(ncols + 1)));
            ncols += 2;
        }
    }
    let n_eq = p.equalities.len();
    let n_ge = p.inequalities.len();
    let surplus0 = ncols;
    ncols += n_ge;
    let art0 = ncols;
    let m = n_eq + n_ge;
    ncols += m;

    let mut signs = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    let all_rows = p.equalities.iter().chain(&p.inequalities).enumerate();
    for (r, (coef, rhs)) in all_rows {
        let mut row = vec![Rational::zero(); ncols + 1];
        for (j, a) in coef.iter().enumerate() {
            let (pc, nc) = var_cols[j];
            row[pc] = a.clone();
            if let Some(nc) = nc {
                row[nc] = -a;
            }
        }
        if r >= n_eq {
            row[surplus0 + (r - n_eq)] = -Rational::one();
        }
        row[ncols] = rhs.clone();
        let sign = if rhs.is_negative() { -1 } else { 1 };
        if sign < 0 {
            for v in row.iter_mut() {
                *v = -&*v;
            }
        }
        row[art0 + r] = Rational::one();
        signs.push(sign);
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (art0..art0 + m).collect(),
        ncols,
    };

    let mut phase1_cost = vec![Rational::zero(); ncols];
    for c in phase1_cost.iter_mut().skip(art0) {
        *c = Rational::one();
    }
    let all = vec![true; ncols];
    t.minimize(&phase1_cost, &all)
        .expect("phase one is bounded below by zero");
    let infeas: Rational = t
        .rows
        .iter()
        .zip(&t.basis)
        .filter(|(_, &b)| b >= art0)
        .map(|(row, _)| row[ncols].clone())
        .sum();
    if infeas.is_positive() {
        // u_r = 1 - d_{art_r}; undo the row sign flips
        let d = t.reduced_costs(&phase1_cost);
        let u: Vec<Rational> = (0..m)
            .map(|r| (Rational::one() - &d[art0 + r]) * int(signs[r]))
            .collect();
        let cert = FarkasCertificate {
            lambda: u[..n_eq].to_vec(),
            multipliers: u[n_eq..].to_vec(),
        };
        debug_assert!(
            cert.verify(p),
            "phase-one duals must form a Farkas certificate"
        );
        return Ok(LpOutcome::Infeasible(cert));
    }

    // drive zero-level artificials out of the basis where possible
    for r in 0..m {
        if t.basis[r] >= art0 {
            if let Some(c) = (0..art0).find(|&c| !t.rows[r][c].is_zero()) {
                t.pivot(r, c);
            }
        }
    }

    let extract = |vals: &[Rational]| -> Vec<Rational> {
        var_cols
            .iter()
            .map(|&(pc, nc)| match nc {
                Some(nc) => &vals[pc] - &vals[nc],
                None => vals[pc].clone(),
            })
            .collect()
    };

    let Some((obj, sense)) = &p.objective else {
        return Ok(LpOutcome::Feasible(extract(&t.column_values())));
    };
    let mut cost = vec![Rational::zero(); ncols];
    for (j, c) in obj.iter().enumerate() {
        let c = match sense {
            Sense::Minimize => c.clone(),
            Sense::Maximize => -c,
        };
        let (pc, nc) = var_cols[j];
        if let Some(nc) = nc {
            cost[nc] = -&c;
        }
        cost[pc] = c;
    }
    let mut allowed = vec![true; ncols];
    for a in allowed.iter_mut().skip(art0) {
        *a = false;
    }
    match t.minimize(&cost, &allowed) {
        Ok(()) => {
            let vals = t.column_values();
            let point = extract(&vals);
            let value: Rational = obj.iter().zip(&point).map(|(c, x)| c * x).sum();
            let d = t.reduced_costs(&cost);
            let duals: Vec<Rational> = (0..m).map(|r| -&d[art0 + r] * int(signs[r])).collect();
            Ok(LpOutcome::Optimal {
                point,
                value,
                duals,
            })
        }
        Err(enter) => {
            let vals = t.column_values();
            let mut dir = vec![Rational::zero(); ncols];
            dir[enter] = Rational::one();
            for (row, &b) in t.rows.iter().zip(&t.basis) {
                dir[b] = -&row[enter];
            }
            Ok(LpOutcome::Unbounded {
                point: extract(&vals),
                ray: extract(&dir),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn unique_point() {
        let p = LinearProgram::new(2)
            .eq(r(&[1, 1]), int(1))
            .ge(r(&[2, 0]), int(1))
            .ge(r(&[0, 2]), int(1));
        assert_eq!(
            lp_solve(&p).unwrap(),
            LpOutcome::Feasible(vec![rat(1, 2), rat(1, 2)])
        );
    }

    #[test]
    fn infeasible_with_farkas() {
        let p = LinearProgram::new(2)
            .eq(r(&[1, 1]), int(1))
            .ge(r(&[1, 0]), rat(2, 3))
            .ge(r(&[0, 1]), rat(2, 3));
        let LpOutcome::Infeasible(cert) = lp_solve(&p).unwrap() else {
            panic!("expected infeasible");
        };
        assert!(cert.verify(&p));
        // the hand-derived certificate also verifies
        let hand = FarkasCertificate {
            multipliers: r(&[1, 1]),
            lambda: r(&[-1]),
        };
        assert!(hand.verify(&p));
        let bad = FarkasCertificate {
            multipliers: r(&[-1, 1]),
            lambda: r(&[-1]),
        };
        assert!(!bad.verify(&p));
    }

    #[test]
    fn simple_optimum() {
        let p = LinearProgram::new(1)
            .le(r(&[1]), int(3))
            .with_objective(r(&[1]), Sense::Maximize);
        match lp_solve(&p).unwrap() {
            LpOutcome::Optimal { point, value, .. } => {
                assert_eq!(point, r(&[3]));
                assert_eq!(value, int(3));
            }
            o => panic!("unexpected {o:?}"),
        }
    }

    #[test]
    fn unbounded_ray() {
        let p = LinearProgram::new(2)
            .ge(r(&[1, -1]), int(0))
            .with_objective(r(&[1, 1]), Sense::Maximize);
        match lp_solve(&p).unwrap() {
            LpOutcome::Unbounded { point, ray } => {
                assert!(p.is_feasible_point(&point));
                let shifted: Vec<Rational> = point.iter().zip(&ray).map(|(a, b)| a + b).collect();
                assert!(p.is_feasible_point(&shifted));
                let gain: Rational = ray.iter().sum();
                assert!(gain.is_positive());
            }
            o => panic!("unexpected {o:?}"),
        }
    }

    #[test]
    fn free_variables() {
        // minimize x s.t. x >= -5, x free
        let p = LinearProgram::new(1)
            .free(0)
            .ge(r(&[1]), int(-5))
            .with_objective(r(&[1]), Sense::Minimize);
        match lp_solve(&p).unwrap() {
            LpOutcome::Optimal { point, .. } => assert_eq!(point, r(&[-5])),
            o => panic!("unexpected {o:?}"),
        }
    }

    #[test]
    fn dimension_mismatch() {
        let p = LinearProgram::new(2).ge(r(&[1]), int(0));
        assert!(matches!(lp_solve(&p), Err(LpError::Dimension(_))));
    }

    #[test]
    fn rational_text() {
        assert_eq!(format_rational(&rat(2, 6)), "1/3");
        assert_eq!(format_rational(&int(0)), "0/1");
        assert_eq!(format_rational(&rat(3, -4)), "-3/4");
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("-4/8").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        for bad in ["1/0", "", "a/2", "1/-", "1//2", "+1/2", "1.5"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }
}
