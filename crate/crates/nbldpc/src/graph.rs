//! Sparse GF(q) parity-check matrices: progressive edge-growth construction
//! from integer degree sequences, random edge labeling, girth measurement,
//! a text serialization, and a dense-elimination encoder.

use crate::galois::{GField, Symbol};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    /// Variable and check degree sequences disagree on the edge count.
    DegreeMismatch { var_edges: usize, chk_edges: usize },
    /// The sequences cannot be realized without parallel edges.
    Unrealizable(String),
    /// Malformed matrix file.
    Parse { line: usize, message: String },
    /// Message length does not match the encoder's free positions.
    BadMessageLength { expected: usize, got: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::DegreeMismatch { var_edges, chk_edges } => {
                write!(f, "edge-count mismatch: variables want {var_edges}, checks {chk_edges}")
            }
            GraphError::Unrealizable(m) => write!(f, "unrealizable degree sequence: {m}"),
            GraphError::Parse { line, message } => write!(f, "line {line}: {message}"),
            GraphError::BadMessageLength { expected, got } => {
                write!(f, "message has {got} symbols, encoder expects {expected}")
            }
        }
    }
}

impl std::error::Error for GraphError {}

/// Sparse m x n parity-check matrix over GF(q) with per-edge nonzero labels.
///
/// Both adjacency directions are stored; they are kept consistent by
/// construction and the matrix is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityCheckMatrix {
    q: usize,
    n: usize,
    m: usize,
    rows: Vec<Vec<(u32, Symbol)>>,
    cols: Vec<Vec<(u32, Symbol)>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-check adjacency lists of `(variable, label)`.
    pub fn from_rows(
        q: usize,
        n: usize,
        rows: Vec<Vec<(u32, Symbol)>>,
    ) -> Result<Self, GraphError> {
        let m = rows.len();
        let mut cols: Vec<Vec<(u32, Symbol)>> = vec![Vec::new(); n];
        for (c, row) in rows.iter().enumerate() {
            let mut seen: Vec<u32> = Vec::with_capacity(row.len());
            for &(v, label) in row {
                if v as usize >= n {
                    return Err(GraphError::Unrealizable(format!(
                        "variable index {v} out of range (n = {n})"
                    )));
                }
                if label == 0 || label as usize >= q {
                    return Err(GraphError::Unrealizable(format!(
                        "label {label} outside 1..{q}"
                    )));
                }
                if seen.contains(&v) {
                    return Err(GraphError::Unrealizable(format!(
                        "parallel edge at check {c}, variable {v}"
                    )));
                }
                seen.push(v);
                cols[v as usize].push((c as u32, label));
            }
        }
        let mut rows = rows;
        for row in &mut rows {
            row.sort_unstable_by_key(|e| e.0);
        }
        Ok(ParityCheckMatrix { q, n, m, rows, cols })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of variable nodes (codeword symbols).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of check nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `(variable, label)` pairs of one check, ascending by variable.
    pub fn row(&self, check: usize) -> &[(u32, Symbol)] {
        &self.rows[check]
    }

    /// `(check, label)` pairs of one variable.
    pub fn col(&self, var: usize) -> &[(u32, Symbol)] {
        &self.cols[var]
    }

    pub fn row_degrees(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn col_degrees(&self) -> Vec<usize> {
        self.cols.iter().map(Vec::len).collect()
    }

    /// Evaluates every check on `symbols`.
    pub fn syndrome(&self, field: &GField, symbols: &[Symbol]) -> Vec<Symbol> {
        self.rows
            .iter()
            .map(|row| {
                row.iter().fold(0, |acc, &(v, h)| {
                    field.add(acc, field.mul(h, symbols[v as usize]))
                })
            })
            .collect()
    }

    pub fn is_codeword(&self, field: &GField, symbols: &[Symbol]) -> bool {
        self.rows.iter().all(|row| {
            row.iter().fold(0, |acc, &(v, h)| field.add(acc, field.mul(h, symbols[v as usize])))
                == 0
        })
    }

    /// Replaces every edge label with an independent uniform draw from the
    /// nonzero field elements. For q = 2 all labels stay 1.
    pub fn assign_labels(&self, field: &GField, seed: u64) -> ParityCheckMatrix {
        let q = field.order();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = self.rows.clone();
        for row in &mut rows {
            for e in row {
                e.1 = if q == 2 { 1 } else { rng.random_range(1..q) as Symbol };
            }
        }
        ParityCheckMatrix::from_rows(q, self.n, rows).expect("relabeling preserves structure")
    }
}

/// Progressive edge growth: places each variable's edges one at a time,
/// attaching to a check at maximum graph distance from the variable's
/// current subtree. Ties break toward the lightest check, then the lowest
/// index, so construction is fully deterministic. Variables are processed in
/// nondecreasing degree order. Labels are all 1; see
/// [`ParityCheckMatrix::assign_labels`].
pub fn peg_construct(var_seq: &[usize], chk_seq: &[usize]) -> Result<ParityCheckMatrix, GraphError> {
    let var_edges: usize = var_seq.iter().sum();
    let chk_edges: usize = chk_seq.iter().sum();
    if var_edges != chk_edges {
        return Err(GraphError::DegreeMismatch { var_edges, chk_edges });
    }
    let n = var_seq.len();
    let m = chk_seq.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (var_seq[v], v));

    let mut chk_load = vec![0usize; m];
    let chk_capacity: Vec<usize> = chk_seq.to_vec();
    let mut var_adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut chk_adj: Vec<Vec<u32>> = vec![Vec::new(); m];

    // BFS scratch.
    let mut chk_dist = vec![u32::MAX; m];
    let mut var_dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();

    for &v in &order {
        for edge_idx in 0..var_seq[v] {
            let pick = if edge_idx == 0 {
                // Lightest check with remaining capacity.
                best_check(&chk_load, &chk_capacity, |_| true)
            } else {
                // Distances from v's current subtree.
                chk_dist.fill(u32::MAX);
                var_dist.fill(u32::MAX);
                queue.clear();
                var_dist[v] = 0;
                queue.push_back(v as u32);
                while let Some(u) = queue.pop_front() {
                    for &c in &var_adj[u as usize] {
                        if chk_dist[c as usize] == u32::MAX {
                            chk_dist[c as usize] = var_dist[u as usize] + 1;
                            for &w in &chk_adj[c as usize] {
                                if var_dist[w as usize] == u32::MAX {
                                    var_dist[w as usize] = chk_dist[c as usize] + 1;
                                    queue.push_back(w);
                                }
                            }
                        }
                    }
                }
                // Maximum distance, treating unreached as infinite; skip
                // checks already adjacent to v (distance 1).
                let mut best: Option<(u32, usize)> = None;
                for c in 0..m {
                    if chk_load[c] >= chk_capacity[c] || chk_dist[c] == 1 {
                        continue;
                    }
                    let d = chk_dist[c];
                    match best {
                        Some((bd, bc)) => {
                            if d > bd
                                || (d == bd
                                    && (chk_load[c], c) < (chk_load[bc], bc))
                            {
                                best = Some((d, c));
                            }
                        }
                        None => best = Some((d, c)),
                    }
                }
                best.map(|(_, c)| c)
            };
            let c = match pick {
                Some(c) => c,
                // Capacity enforcement can strand the last placements: every
                // check with spare capacity is already adjacent. Free one up
                // by relocating someone else's edge.
                None => match swap_repair(v, &mut var_adj, &mut chk_adj, &mut chk_load, &chk_capacity) {
                    Some(c) => c,
                    None => {
                        return Err(GraphError::Unrealizable(format!(
                            "variable {v} cannot place edge {edge_idx} without a parallel edge"
                        )))
                    }
                },
            };
            chk_load[c] += 1;
            var_adj[v].push(c as u32);
            chk_adj[c].push(v as u32);
        }
    }

    let rows = chk_adj
        .iter()
        .map(|vars| vars.iter().map(|&v| (v, 1 as Symbol)).collect())
        .collect();
    ParityCheckMatrix::from_rows(2, n, rows)
}

/// Moves one edge `(u, donor)` onto a check with spare capacity so that the
/// donor check can accept an edge from `v`. Returns the freed check.
fn swap_repair(
    v: usize,
    var_adj: &mut [Vec<u32>],
    chk_adj: &mut [Vec<u32>],
    chk_load: &mut [usize],
    chk_capacity: &[usize],
) -> Option<usize> {
    let m = chk_load.len();
    for donor in 0..m {
        if var_adj[v].contains(&(donor as u32)) {
            continue;
        }
        // Donor is full (otherwise it would have been picked directly); find
        // one of its variables that can move to a check with spare room.
        for slot in 0..chk_adj[donor].len() {
            let u = chk_adj[donor][slot] as usize;
            for dest in 0..m {
                if chk_load[dest] < chk_capacity[dest]
                    && dest != donor
                    && !var_adj[u].contains(&(dest as u32))
                {
                    chk_adj[donor].remove(slot);
                    let pos = var_adj[u].iter().position(|&c| c == donor as u32).unwrap();
                    var_adj[u][pos] = dest as u32;
                    chk_adj[dest].push(u as u32);
                    chk_load[donor] -= 1;
                    chk_load[dest] += 1;
                    return Some(donor);
                }
            }
        }
    }
    None
}

fn best_check(
    load: &[usize],
    capacity: &[usize],
    admit: impl Fn(usize) -> bool,
) -> Option<usize> {
    let mut best: Option<usize> = None;
    for c in 0..load.len() {
        if load[c] >= capacity[c] || !admit(c) {
            continue;
        }
        match best {
            Some(b) if (load[c], c) >= (load[b], b) => {}
            _ => best = Some(c),
        }
    }
    best
}

/// Uniformly random stub matching with the same degree sequences, retrying
/// until no parallel edges remain. Used as the quality baseline for the PEG
/// construction.
pub fn random_construct(
    var_seq: &[usize],
    chk_seq: &[usize],
    seed: u64,
) -> Result<ParityCheckMatrix, GraphError> {
    let var_edges: usize = var_seq.iter().sum();
    let chk_edges: usize = chk_seq.iter().sum();
    if var_edges != chk_edges {
        return Err(GraphError::DegreeMismatch { var_edges, chk_edges });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut var_stubs: Vec<u32> = Vec::with_capacity(var_edges);
    for (v, &d) in var_seq.iter().enumerate() {
        var_stubs.extend(std::iter::repeat(v as u32).take(d));
    }
    let mut chk_stubs: Vec<u32> = Vec::with_capacity(chk_edges);
    for (c, &d) in chk_seq.iter().enumerate() {
        chk_stubs.extend(std::iter::repeat(c as u32).take(d));
    }
    'attempt: for _ in 0..1000 {
        // Fisher-Yates on the variable stubs.
        for i in (1..var_stubs.len()).rev() {
            let j = rng.random_range(0..=i);
            var_stubs.swap(i, j);
        }
        let mut rows: Vec<Vec<(u32, Symbol)>> = vec![Vec::new(); chk_seq.len()];
        for (&v, &c) in var_stubs.iter().zip(&chk_stubs) {
            if rows[c as usize].iter().any(|&(w, _)| w == v) {
                continue 'attempt;
            }
            rows[c as usize].push((v, 1));
        }
        return ParityCheckMatrix::from_rows(2, var_seq.len(), rows);
    }
    Err(GraphError::Unrealizable("no parallel-edge-free matching found".into()))
}

/// Girth of the Tanner graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Girth {
    Finite(usize),
    /// The graph is a forest.
    Infinite,
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => write!(f, "inf"),
        }
    }
}

/// Length of the shortest cycle, via BFS from every variable node. The
/// Tanner graph is bipartite, so any finite girth is even and at least 4.
pub fn girth(h: &ParityCheckMatrix) -> Girth {
    // Node ids: variables 0..n, checks n..n+m.
    let n = h.n();
    let m = h.m();
    let total = n + m;
    let neighbors = |u: usize| -> Vec<usize> {
        if u < n {
            h.col(u).iter().map(|&(c, _)| n + c as usize).collect()
        } else {
            h.row(u - n).iter().map(|&(v, _)| v as usize).collect()
        }
    };
    let mut best = usize::MAX;
    let mut dist = vec![u32::MAX; total];
    let mut parent = vec![usize::MAX; total];
    for start in 0..n {
        dist.fill(u32::MAX);
        parent.fill(usize::MAX);
        dist[start] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] as usize >= best {
                break;
            }
            for w in neighbors(u) {
                if w == parent[u] {
                    continue;
                }
                if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else {
                    // Non-tree edge: cycle through the BFS root region.
                    let len = (dist[u] + dist[w] + 1) as usize;
                    if len < best {
                        best = len;
                    }
                }
            }
        }
    }
    if best == usize::MAX {
        Girth::Infinite
    } else {
        Girth::Finite(best)
    }
}

/// Writes the q-ary alist-style text format:
///
/// ```text
/// q n m
/// max_col_wt max_row_wt
/// <n column weights>
/// <m row weights>
/// <n lines of "row:label" pairs, 1-indexed, padded with 0:0>
/// ```
pub fn write_matrix(h: &ParityCheckMatrix) -> String {
    use fmt::Write;
    let col_w = h.col_degrees();
    let row_w = h.row_degrees();
    let max_col = col_w.iter().copied().max().unwrap_or(0);
    let max_row = row_w.iter().copied().max().unwrap_or(0);
    let mut out = String::new();
    writeln!(out, "{} {} {}", h.q(), h.n(), h.m()).unwrap();
    writeln!(out, "{max_col} {max_row}").unwrap();
    writeln!(out, "{}", join(&col_w)).unwrap();
    writeln!(out, "{}", join(&row_w)).unwrap();
    for v in 0..h.n() {
        let mut entries: Vec<(u32, Symbol)> = h.col(v).to_vec();
        entries.sort_unstable_by_key(|e| e.0);
        let mut parts: Vec<String> =
            entries.iter().map(|&(c, l)| format!("{}:{}", c + 1, l)).collect();
        while parts.len() < max_col {
            parts.push("0:0".into());
        }
        writeln!(out, "{}", parts.join(" ")).unwrap();
    }
    out
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parses the format produced by [`write_matrix`]. Round-trips bit-exactly
/// against the writer.
pub fn read_matrix(text: &str) -> Result<ParityCheckMatrix, GraphError> {
    let mut lines = text.lines().enumerate();
    let mut next_line = |what: &str| -> Result<(usize, &str), GraphError> {
        for (idx, raw) in lines.by_ref() {
            if !raw.trim().is_empty() && !raw.trim_start().starts_with('#') {
                return Ok((idx + 1, raw));
            }
        }
        Err(GraphError::Parse { line: 0, message: format!("missing {what}") })
    };
    let parse_ints = |line: usize, raw: &str, what: &str| -> Result<Vec<usize>, GraphError> {
        raw.split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|e| GraphError::Parse {
                    line,
                    message: format!("bad {what} {t:?}: {e}"),
                })
            })
            .collect()
    };

    let (l1, raw) = next_line("header")?;
    let header = parse_ints(l1, raw, "header field")?;
    if header.len() != 3 {
        return Err(GraphError::Parse { line: l1, message: "header must be `q n m`".into() });
    }
    let (q, n, m) = (header[0], header[1], header[2]);
    if q < 2 || q > 256 || !q.is_power_of_two() {
        return Err(GraphError::Parse { line: l1, message: format!("bad field order {q}") });
    }

    let (l2, raw) = next_line("weight bounds")?;
    let bounds = parse_ints(l2, raw, "weight bound")?;
    if bounds.len() != 2 {
        return Err(GraphError::Parse { line: l2, message: "expected two weight bounds".into() });
    }
    let max_col = bounds[0];

    let (l3, raw) = next_line("column weights")?;
    let col_w = parse_ints(l3, raw, "column weight")?;
    if col_w.len() != n {
        return Err(GraphError::Parse {
            line: l3,
            message: format!("expected {n} column weights, got {}", col_w.len()),
        });
    }
    let (l4, raw) = next_line("row weights")?;
    let row_w = parse_ints(l4, raw, "row weight")?;
    if row_w.len() != m {
        return Err(GraphError::Parse {
            line: l4,
            message: format!("expected {m} row weights, got {}", row_w.len()),
        });
    }

    let mut rows: Vec<Vec<(u32, Symbol)>> = vec![Vec::new(); m];
    for v in 0..n {
        let (ln, raw) = next_line("column entries")?;
        let mut real = 0usize;
        for tok in raw.split_whitespace() {
            let (r, l) = tok.split_once(':').ok_or_else(|| GraphError::Parse {
                line: ln,
                message: format!("entry {tok:?} is not `row:label`"),
            })?;
            let r: usize = r.parse().map_err(|e| GraphError::Parse {
                line: ln,
                message: format!("bad row index in {tok:?}: {e}"),
            })?;
            let l: usize = l.parse().map_err(|e| GraphError::Parse {
                line: ln,
                message: format!("bad label in {tok:?}: {e}"),
            })?;
            if r == 0 && l == 0 {
                continue; // padding
            }
            if r == 0 || r > m {
                return Err(GraphError::Parse {
                    line: ln,
                    message: format!("row index {r} outside 1..={m}"),
                });
            }
            if l == 0 || l >= q {
                return Err(GraphError::Parse {
                    line: ln,
                    message: format!("label {l} outside 1..{q}"),
                });
            }
            rows[r - 1].push((v as u32, l as Symbol));
            real += 1;
        }
        if real != col_w[v] {
            return Err(GraphError::Parse {
                line: ln,
                message: format!("column {v} has {real} entries, weight line says {}", col_w[v]),
            });
        }
        if real > max_col {
            return Err(GraphError::Parse {
                line: ln,
                message: format!("column {v} exceeds declared max weight {max_col}"),
            });
        }
    }
    let h = ParityCheckMatrix::from_rows(q, n, rows)
        .map_err(|e| GraphError::Parse { line: 0, message: e.to_string() })?;
    for (c, want) in row_w.iter().enumerate() {
        if h.row(c).len() != *want {
            return Err(GraphError::Parse {
                line: l4,
                message: format!("row {c} has {} entries, weight line says {want}", h.row(c).len()),
            });
        }
    }
    Ok(h)
}

/// Systematic encoder built by Gauss-Jordan elimination over GF(q).
///
/// Free columns carry the message; pivot columns are solved from the reduced
/// rows. A rank-deficient matrix just yields more free positions, i.e. a
/// realized rate above the design rate.
pub struct Encoder {
    field: GField,
    n: usize,
    rank: usize,
    pivot_cols: Vec<usize>,
    free_cols: Vec<usize>,
    /// Reduced rows, one per pivot, dense over the free columns.
    reduced: Vec<Vec<Symbol>>,
}

impl Encoder {
    pub fn new(h: &ParityCheckMatrix, field: &GField) -> Encoder {
        let (n, m) = (h.n(), h.m());
        let mut dense: Vec<Vec<Symbol>> = vec![vec![0; n]; m];
        for c in 0..m {
            for &(v, l) in h.row(c) {
                dense[c][v as usize] = l;
            }
        }
        let mut pivot_cols = Vec::new();
        let mut row = 0usize;
        for col in 0..n {
            // Find a pivot at or below `row`.
            let Some(p) = (row..m).find(|&r| dense[r][col] != 0) else { continue };
            dense.swap(row, p);
            let inv = field.inv(dense[row][col]).expect("pivot is nonzero");
            for x in &mut dense[row] {
                *x = field.mul(*x, inv);
            }
            for r in 0..m {
                if r != row && dense[r][col] != 0 {
                    let factor = dense[r][col];
                    for c2 in col..n {
                        let sub = field.mul(factor, dense[row][c2]);
                        dense[r][c2] = field.add(dense[r][c2], sub);
                    }
                }
            }
            pivot_cols.push(col);
            row += 1;
            if row == m {
                break;
            }
        }
        let rank = row;
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; n];
            for &c in &pivot_cols {
                v[c] = true;
            }
            v
        };
        let free_cols: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let reduced = dense.into_iter().take(rank).collect();
        Encoder { field: field.clone(), n, rank, pivot_cols, free_cols, reduced }
    }

    /// Information symbols per codeword.
    pub fn message_len(&self) -> usize {
        self.n - self.rank
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `1 - rank/n`; at least the design rate.
    pub fn realized_rate(&self) -> f64 {
        1.0 - self.rank as f64 / self.n as f64
    }

    /// Positions of the message symbols inside the codeword.
    pub fn message_positions(&self) -> &[usize] {
        &self.free_cols
    }

    pub fn encode(&self, message: &[Symbol]) -> Result<Vec<Symbol>, GraphError> {
        if message.len() != self.message_len() {
            return Err(GraphError::BadMessageLength {
                expected: self.message_len(),
                got: message.len(),
            });
        }
        let mut cw = vec![0 as Symbol; self.n];
        for (&pos, &sym) in self.free_cols.iter().zip(message) {
            cw[pos] = sym;
        }
        // Each reduced row reads pivot = sum of label * free-symbol
        // (characteristic 2 makes the sign irrelevant).
        for (r, &pcol) in self.pivot_cols.iter().enumerate() {
            let mut acc = 0 as Symbol;
            for &fcol in &self.free_cols {
                let coeff = self.reduced[r][fcol];
                if coeff != 0 && cw[fcol] != 0 {
                    acc = self.field.add(acc, self.field.mul(coeff, cw[fcol]));
                }
            }
            cw[pcol] = acc;
        }
        Ok(cw)
    }
}
