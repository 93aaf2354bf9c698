//! Dense bounded-variable primal simplex.
//!
//! Solves `max c·x  s.t.  A x ≤ b,  0 ≤ x ≤ u` with `b ≥ 0`, so the all-slack
//! basis is feasible and no phase one is needed. Upper bounds are handled
//! implicitly: a nonbasic variable sits at either bound and may flip between
//! them without a pivot.

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STREAK_FOR_BLAND: usize = 50;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Default)]
pub(crate) struct LinearProgram {
    pub cost: Vec<f64>,
    /// `f64::INFINITY` for an unbounded column.
    pub upper: Vec<f64>,
    /// Sparse rows `(entries, rhs)`.
    pub rows: Vec<(Vec<(usize, f64)>, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct LpOutcome {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SimplexError {
    Unbounded,
    PivotLimit,
}

impl LinearProgram {
    pub fn add_column(&mut self, cost: f64, upper: f64) -> usize {
        self.cost.push(cost);
        self.upper.push(upper);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, entries: Vec<(usize, f64)>, rhs: f64) {
        debug_assert!(rhs >= 0.0);
        self.rows.push((entries, rhs));
    }

    pub fn solve(&self) -> Result<LpOutcome, SimplexError> {
        Tableau::new(self).run()
    }
}

struct Tableau {
    m: usize,
    nv: usize,
    width: usize,
    t: Vec<f64>,
    /// Reduced costs `c_j − z_j`.
    d: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    value: Vec<f64>,
    at_upper: Vec<bool>,
    d_tol: f64,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let nv = lp.cost.len();
        let m = lp.rows.len();
        let width = nv + m;
        let mut t = vec![0.0; m * width];
        let mut value = Vec::with_capacity(m);
        for (r, (entries, rhs)) in lp.rows.iter().enumerate() {
            for &(j, a) in entries {
                t[r * width + j] += a;
            }
            t[r * width + nv + r] = 1.0;
            value.push(rhs.max(0.0));
        }
        let mut cost = lp.cost.clone();
        cost.resize(width, 0.0);
        let mut upper = lp.upper.clone();
        upper.resize(width, f64::INFINITY);
        let scale = cost.iter().fold(1.0f64, |s, c| s.max(c.abs()));
        Tableau {
            m,
            nv,
            width,
            t,
            d: cost.clone(),
            upper,
            cost,
            basis: (nv..width).collect(),
            value,
            at_upper: vec![false; width],
            d_tol: 1e-10 * scale,
        }
    }

    #[inline]
    fn at(&self, r: usize, j: usize) -> f64 {
        self.t[r * self.width + j]
    }

    fn choose_entering(&self, is_basic: &[bool], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (j, &basic) in is_basic.iter().enumerate() {
            if basic {
                continue;
            }
            let dj = self.d[j];
            let sigma = if !self.at_upper[j] && dj > self.d_tol {
                1.0
            } else if self.at_upper[j] && dj < -self.d_tol {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, sigma));
            }
            if best.is_none_or(|(b, _)| dj.abs() > self.d[b].abs()) {
                best = Some((j, sigma));
            }
        }
        best
    }

    fn run(mut self) -> Result<LpOutcome, SimplexError> {
        let mut is_basic = vec![false; self.width];
        for &b in &self.basis {
            is_basic[b] = true;
        }
        let mut pivots = 0;
        let mut degenerate = 0;
        loop {
            let bland = degenerate >= DEGENERATE_STREAK_FOR_BLAND;
            let Some((q, sigma)) = self.choose_entering(&is_basic, bland) else {
                break;
            };
            if pivots >= MAX_PIVOTS {
                return Err(SimplexError::PivotLimit);
            }

            // Ratio test. The entering column moves by sigma * step; basic
            // variable r moves by -sigma * step * t[r][q].
            let mut step = self.upper[q];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_mag = 0.0;
            for r in 0..self.m {
                let a = sigma * self.at(r, q);
                let b = self.basis[r];
                let (limit, to_upper) = if a > PIVOT_TOL {
                    (self.value[r].max(0.0) / a, false)
                } else if a < -PIVOT_TOL && self.upper[b].is_finite() {
                    ((self.upper[b] - self.value[r]).max(0.0) / -a, true)
                } else {
                    continue;
                };
                let better = match leave {
                    _ if limit < step - 1e-12 => true,
                    Some((lr, _)) if limit <= step + 1e-12 => {
                        if bland {
                            b < self.basis[lr]
                        } else {
                            a.abs() > leave_mag
                        }
                    }
                    _ => false,
                };
                if better {
                    step = limit;
                    leave = Some((r, to_upper));
                    leave_mag = a.abs();
                }
            }
            if step.is_infinite() {
                return Err(SimplexError::Unbounded);
            }
            degenerate = if step <= 1e-12 { degenerate + 1 } else { 0 };

            for r in 0..self.m {
                let a = self.at(r, q);
                if a != 0.0 {
                    self.value[r] -= sigma * step * a;
                }
            }
            let Some((r, to_upper)) = leave else {
                // Bound flip, basis unchanged.
                self.at_upper[q] = !self.at_upper[q];
                continue;
            };

            let entering_value = if self.at_upper[q] {
                self.upper[q] - step
            } else {
                step
            };
            let leaving = self.basis[r];
            self.pivot(r, q);
            self.basis[r] = q;
            self.value[r] = entering_value;
            is_basic[q] = true;
            is_basic[leaving] = false;
            self.at_upper[q] = false;
            self.at_upper[leaving] = to_upper;
            pivots += 1;
        }

        let mut x = vec![0.0; self.width];
        for j in 0..self.width {
            if !is_basic[j] && self.at_upper[j] {
                x[j] = self.upper[j];
            }
        }
        for (r, &b) in self.basis.iter().enumerate() {
            x[b] = self.value[r].clamp(0.0, self.upper[b]);
        }
        x.truncate(self.nv);
        let objective = x.iter().zip(&self.cost).map(|(v, c)| v * c).sum();
        Ok(LpOutcome { x, objective })
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let inv = 1.0 / self.t[r * w + q];
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v *= inv;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[q];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (v, p) in self.d.iter_mut().zip(prow.iter()) {
                *v -= f * p;
            }
            self.d[q] = 0.0;
        }
    }
}
