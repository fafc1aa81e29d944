//! Dense two-phase tableau simplex over any ordered field.
//!
//! Bland's rule is used for both the entering and the leaving variable, so
//! the method terminates on degenerate problems; with [`BigRational`]
//! scalars the result is exact.
//!
//! [`BigRational`]: num_rational::BigRational

use thiserror::Error;

use crate::scalar::LpScalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("infeasible")]
    Infeasible,
    #[error("unbounded")]
    Unbounded,
    #[error("constraint has {found} coefficients, expected {expected}")]
    Dimension { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

/// `minimize cᵀx` subject to the constraints and `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
}

impl<T: LpScalar> LinearProgram<T> {
    pub fn new(objective: Vec<T>) -> Self {
        Self {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn solve(&self) -> Result<LpSolution<T>, LpError> {
        let nv = self.num_vars();
        for c in &self.constraints {
            if c.coeffs.len() != nv {
                return Err(LpError::Dimension {
                    expected: nv,
                    found: c.coeffs.len(),
                });
            }
        }
        let mut tab = Tableau::build(self);
        tab.phase_one()?;
        tab.phase_two(&self.objective)?;
        let x = tab.primal(nv);
        let objective = self
            .objective
            .iter()
            .zip(&x)
            .fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
        Ok(LpSolution { x, objective })
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    /// Reduced-cost row; the last entry is minus the objective value.
    z: Vec<T>,
    ncols: usize,
    first_artificial: usize,
}

impl<T: LpScalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let nv = lp.num_vars();
        let normalized: Vec<(Vec<T>, Relation, T)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (
                        c.coeffs.iter().map(|v| -v.clone()).collect(),
                        flipped,
                        -c.rhs.clone(),
                    )
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();

        let n_slack = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Eq)
            .count();
        let n_art = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Le)
            .count();
        let first_artificial = nv + n_slack;
        let ncols = first_artificial + n_art;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut next_slack, mut next_art) = (nv, first_artificial);
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![T::zero(); ncols + 1];
            for (k, v) in coeffs.into_iter().enumerate() {
                row[k] = v;
            }
            row[ncols] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = T::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -T::one();
                    next_slack += 1;
                    row[next_art] = T::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = T::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }

        Self {
            rows,
            basis,
            z: vec![T::zero(); ncols + 1],
            ncols,
            first_artificial,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
            row[c] = T::zero();
        }
        let f = self.z[c].clone();
        if !f.is_zero() {
            for (v, pv) in self.z.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
            self.z[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Run simplex iterations over columns `< limit`.
    fn iterate(&mut self, limit: usize) -> Result<(), LpError> {
        loop {
            let Some(enter) = (0..limit).find(|&j| self.z[j].is_negative_strict()) else {
                return Ok(());
            };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive_strict() {
                    continue;
                }
                let ratio = row[self.ncols].clone() / row[enter].clone();
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let (r, _) = leave.ok_or(LpError::Unbounded)?;
            self.pivot(r, enter);
        }
    }

    fn phase_one(&mut self) -> Result<(), LpError> {
        if self.first_artificial == self.ncols {
            return Ok(());
        }
        self.z = vec![T::zero(); self.ncols + 1];
        for j in self.first_artificial..self.ncols {
            self.z[j] = T::one();
        }
        for (i, row) in self.rows.iter().enumerate() {
            if self.basis[i] >= self.first_artificial {
                for (zv, v) in self.z.iter_mut().zip(row) {
                    *zv = zv.clone() - v.clone();
                }
            }
        }
        self.iterate(self.ncols)?;
        let infeasibility = -self.z[self.ncols].clone();
        if infeasibility.is_positive_strict() {
            return Err(LpError::Infeasible);
        }

        // Drive remaining (zero-level) artificials out of the basis.
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.first_artificial {
                i += 1;
                continue;
            }
            match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_negligible()) {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    // redundant row
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
        Ok(())
    }

    fn phase_two(&mut self, cost: &[T]) -> Result<(), LpError> {
        self.z = vec![T::zero(); self.ncols + 1];
        for (j, c) in cost.iter().enumerate() {
            self.z[j] = c.clone();
        }
        for (i, row) in self.rows.iter().enumerate() {
            let b = self.basis[i];
            let cb = if b < cost.len() {
                cost[b].clone()
            } else {
                T::zero()
            };
            if cb.is_zero() {
                continue;
            }
            for (zv, v) in self.z.iter_mut().zip(row) {
                *zv = zv.clone() - cb.clone() * v.clone();
            }
        }
        self.iterate(self.first_artificial)
    }

    fn primal(&self, nv: usize) -> Vec<T> {
        let mut x = vec![T::zero(); nv];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < nv {
                x[b] = self.rows[i][self.ncols].clone();
            }
        }
        x
    }
}
