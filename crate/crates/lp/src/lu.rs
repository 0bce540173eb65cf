//! Sparse LU factorization of simplex bases with product-form updates.
//!
//! Elimination is right-looking with Markowitz pivot selection under threshold partial
//! pivoting. Column and row singletons are taken first, which covers most of a basis made of
//! logical columns and network-like structural columns.

/// A sparse column: (row, value) pairs.
pub type SparseCol = Vec<(usize, f64)>;

const PIVOT_THRESHOLD: f64 = 0.1;
const ABS_PIVOT_TOL: f64 = 1e-11;
/// Number of lowest-count columns inspected per Markowitz search.
const SEARCH_COLS: usize = 4;

#[derive(Debug, Clone)]
struct Step {
    row: usize,
    pos: usize,
    diag: f64,
    /// Multipliers (row, l): `b[row] -= l * b[self.row]`.
    lower: Vec<(usize, f64)>,
    /// Off-diagonal entries of the pivot row, keyed by basis position.
    upper: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

/// Outcome of a factorization that could not pivot every column.
#[derive(Debug, Clone)]
pub struct Singular {
    /// Basis positions left without a pivot.
    pub positions: Vec<usize>,
    /// Rows left without a pivot (same length as `positions`).
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct LuFactors {
    m: usize,
    steps: Vec<Step>,
    etas: Vec<Eta>,
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    /// Factorize the `m × m` matrix whose column at basis position `k` is `cols[k]`.
    pub fn factorize(m: usize, cols: &[SparseCol]) -> Result<LuFactors, Singular> {
        assert_eq!(cols.len(), m);
        let mut active = ActiveMatrix::new(m, cols);
        let mut steps = Vec::with_capacity(m);

        while steps.len() < m {
            let pivot = active
                .pop_column_singleton()
                .or_else(|| active.pop_row_singleton())
                .or_else(|| active.markowitz());
            match pivot {
                Some((row, pos)) => steps.push(active.eliminate(row, pos)),
                None => break,
            }
        }

        if steps.len() < m {
            let positions: Vec<usize> = (0..m).filter(|&c| active.col_active[c]).collect();
            let rows: Vec<usize> = (0..m).filter(|&r| active.row_active[r]).collect();
            debug_assert_eq!(positions.len(), rows.len());
            return Err(Singular { positions, rows });
        }
        Ok(LuFactors {
            m,
            steps,
            etas: Vec::new(),
        })
    }

    /// Solve `B z = b`. `rhs` is row-indexed and is consumed as scratch; the result is
    /// written into `out`, indexed by basis position.
    pub fn ftran(&self, rhs: &mut [f64], out: &mut [f64]) {
        for s in &self.steps {
            let br = rhs[s.row];
            if br != 0.0 {
                for &(r, l) in &s.lower {
                    rhs[r] -= l * br;
                }
            }
        }
        for s in self.steps.iter().rev() {
            let mut v = rhs[s.row];
            for &(k, u) in &s.upper {
                v -= u * out[k];
            }
            out[s.pos] = v / s.diag;
        }
        for e in &self.etas {
            let zr = out[e.pos];
            if zr != 0.0 {
                let zr = zr / e.pivot;
                out[e.pos] = zr;
                for &(k, w) in &e.entries {
                    out[k] -= w * zr;
                }
            }
        }
    }

    /// Solve `Bᵀ y = c`. `rhs` is indexed by basis position and is consumed as scratch; the
    /// result is written into `out`, indexed by row.
    pub fn btran(&self, rhs: &mut [f64], out: &mut [f64]) {
        for e in self.etas.iter().rev() {
            let mut v = rhs[e.pos];
            for &(k, w) in &e.entries {
                v -= w * rhs[k];
            }
            rhs[e.pos] = v / e.pivot;
        }
        for s in &self.steps {
            let w = rhs[s.pos] / s.diag;
            out[s.row] = w;
            if w != 0.0 {
                for &(k, u) in &s.upper {
                    rhs[k] -= u * w;
                }
            }
        }
        for s in self.steps.iter().rev() {
            let mut v = out[s.row];
            for &(r, l) in &s.lower {
                v -= l * out[r];
            }
            out[s.row] = v;
        }
    }

    /// Record that the column at basis position `pos` was replaced by a column whose
    /// FTRAN image (w.r.t. the current factors) is `w`.
    pub fn push_eta(&mut self, pos: usize, w: &[f64]) {
        let entries = w
            .iter()
            .enumerate()
            .filter(|&(k, &v)| k != pos && v != 0.0)
            .map(|(k, &v)| (k, v))
            .collect();
        self.etas.push(Eta {
            pos,
            pivot: w[pos],
            entries,
        });
    }
}

struct ActiveMatrix {
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<usize>>,
    col_count: Vec<usize>,
    row_count: Vec<usize>,
    col_active: Vec<bool>,
    row_active: Vec<bool>,
    col_singletons: Vec<usize>,
    row_singletons: Vec<usize>,
}

impl ActiveMatrix {
    fn new(m: usize, input: &[SparseCol]) -> Self {
        let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (k, col) in input.iter().enumerate() {
            let mut c: Vec<(usize, f64)> = Vec::with_capacity(col.len());
            for &(r, v) in col {
                if v == 0.0 {
                    continue;
                }
                if let Some(e) = c.iter_mut().find(|e| e.0 == r) {
                    e.1 += v;
                } else {
                    c.push((r, v));
                }
            }
            for &(r, _) in &c {
                rows[r].push(k);
            }
            cols.push(c);
        }
        let col_count: Vec<usize> = cols.iter().map(Vec::len).collect();
        let row_count: Vec<usize> = rows.iter().map(Vec::len).collect();
        let col_singletons = (0..m).rev().filter(|&k| col_count[k] == 1).collect();
        let row_singletons = (0..m).rev().filter(|&r| row_count[r] == 1).collect();
        Self {
            m,
            cols,
            rows,
            col_count,
            row_count,
            col_active: vec![true; m],
            row_active: vec![true; m],
            col_singletons,
            row_singletons,
        }
    }

    fn active_entries(&self, pos: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.cols[pos]
            .iter()
            .copied()
            .filter(move |&(r, _)| self.row_active[r])
    }

    fn pop_column_singleton(&mut self) -> Option<(usize, usize)> {
        while let Some(pos) = self.col_singletons.pop() {
            if !self.col_active[pos] || self.col_count[pos] != 1 {
                continue;
            }
            if let Some((row, v)) = self.active_entries(pos).next() {
                if v.abs() > ABS_PIVOT_TOL {
                    return Some((row, pos));
                }
            }
        }
        None
    }

    fn pop_row_singleton(&mut self) -> Option<(usize, usize)> {
        while let Some(row) = self.row_singletons.pop() {
            if !self.row_active[row] || self.row_count[row] != 1 {
                continue;
            }
            let pos = self.rows[row].iter().copied().find(|&k| self.col_active[k]);
            if let Some(pos) = pos {
                let v = self.cols[pos]
                    .iter()
                    .find(|e| e.0 == row)
                    .map_or(0.0, |e| e.1);
                let colmax = self
                    .active_entries(pos)
                    .map(|e| e.1.abs())
                    .fold(0.0, f64::max);
                if v.abs() > ABS_PIVOT_TOL && v.abs() >= PIVOT_THRESHOLD * colmax {
                    return Some((row, pos));
                }
            }
        }
        None
    }

    fn markowitz(&self) -> Option<(usize, usize)> {
        let mut candidates: Vec<usize> = (0..self.m)
            .filter(|&k| self.col_active[k] && self.col_count[k] > 0)
            .collect();
        candidates.sort_by_key(|&k| (self.col_count[k], k));
        let mut best: Option<(usize, usize, usize, f64)> = None;
        let mut inspected = 0;
        for &pos in &candidates {
            let colmax = self
                .active_entries(pos)
                .map(|e| e.1.abs())
                .fold(0.0, f64::max);
            if colmax <= ABS_PIVOT_TOL {
                continue;
            }
            for (row, v) in self.active_entries(pos) {
                if v.abs() < PIVOT_THRESHOLD * colmax || v.abs() <= ABS_PIVOT_TOL {
                    continue;
                }
                let cost = (self.row_count[row] - 1) * (self.col_count[pos] - 1);
                let better = match best {
                    None => true,
                    Some((_, _, bc, bv)) => cost < bc || (cost == bc && v.abs() > bv),
                };
                if better {
                    best = Some((row, pos, cost, v.abs()));
                }
            }
            inspected += 1;
            if inspected >= SEARCH_COLS && best.is_some() {
                break;
            }
        }
        best.map(|(r, k, _, _)| (r, k))
    }

    fn eliminate(&mut self, row: usize, pos: usize) -> Step {
        let diag = self.cols[pos]
            .iter()
            .find(|e| e.0 == row)
            .map(|e| e.1)
            .expect("pivot entry present");

        // Pivot row entries in other active columns.
        let mut upper = Vec::new();
        for &k in &self.rows[row] {
            if k == pos || !self.col_active[k] {
                continue;
            }
            if let Some(idx) = self.cols[k].iter().position(|e| e.0 == row) {
                let v = self.cols[k][idx].1;
                self.cols[k].swap_remove(idx);
                self.col_count[k] -= 1;
                if self.col_count[k] == 1 {
                    self.col_singletons.push(k);
                }
                if v != 0.0 {
                    upper.push((k, v));
                }
            }
        }

        // Multipliers for the remaining rows of the pivot column.
        let mut lower = Vec::new();
        for &(r, v) in &self.cols[pos] {
            if r == row || !self.row_active[r] {
                continue;
            }
            lower.push((r, v / diag));
        }
        self.col_active[pos] = false;
        self.row_active[row] = false;
        for &(r, _) in &lower {
            self.row_count[r] -= 1;
        }

        // Schur complement update.
        for &(r, l) in &lower {
            for &(k, u) in &upper {
                let delta = -l * u;
                if let Some(e) = self.cols[k].iter_mut().find(|e| e.0 == r) {
                    e.1 += delta;
                } else {
                    self.cols[k].push((r, delta));
                    self.col_count[k] += 1;
                    self.rows[r].push(k);
                    self.row_count[r] += 1;
                }
            }
        }
        for &(r, _) in &lower {
            if self.row_count[r] == 1 {
                self.row_singletons.push(r);
            }
        }
        for &(k, _) in &upper {
            if self.col_count[k] == 1 {
                self.col_singletons.push(k);
            }
        }
        self.cols[pos].clear();

        Step {
            row,
            pos,
            diag,
            lower,
            upper,
        }
    }
}
