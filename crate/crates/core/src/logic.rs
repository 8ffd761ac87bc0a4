//! Semi-tensor product (STP) algebra over canonical Boolean vectors.
//!
//! Boolean values are encoded as `1 ↦ δ₂¹`, `0 ↦ δ₂²`. A logical matrix is a
//! matrix whose columns are canonical vectors; it is stored as the vector of
//! 0-based row indices of the nonzero entry of each column, so products of
//! logical matrices never materialize dense storage.
//!
//! Multi-argument functions use the iterated-STP ordering: the first argument
//! is the most significant factor and value 1 precedes value 0. For arity `d`
//! the 0-based column `s` corresponds to the assignment with
//! `s = Σ_j (1 − x_j)·2^{d−1−j}`.

use crate::error::{check_cap, Error, Result};
use serde::Serialize;
use std::fmt;

/// Default cap on the number of stored entries produced by a single product.
pub const DEFAULT_DIM_CAP: u128 = 1 << 30;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// The canonical vector δ_dim^index (1-based index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalVector {
    dim: usize,
    index: usize,
}

impl CanonicalVector {
    pub fn new(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 || index == 0 || index > dim {
            return Err(Error::Dimension(format!("δ_{dim}^{index} is not a canonical vector")));
        }
        Ok(CanonicalVector { dim, index })
    }

    pub fn from_bool(value: bool) -> Self {
        CanonicalVector { dim: 2, index: if value { 1 } else { 2 } }
    }

    /// The canonical vector ⋉ᵢ xᵢ of a Boolean assignment.
    pub fn from_bits(bits: &[bool]) -> Self {
        let d = bits.len();
        CanonicalVector { dim: 1 << d, index: column_of(bits) + 1 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn to_bool(&self) -> Option<bool> {
        match (self.dim, self.index) {
            (2, 1) => Some(true),
            (2, 2) => Some(false),
            _ => None,
        }
    }

    pub fn to_matrix(&self) -> LogicalMatrix {
        LogicalMatrix { rows: self.dim, col_index: vec![self.index - 1] }
    }
}

impl fmt::Display for CanonicalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "δ_{}^{}", self.dim, self.index)
    }
}

/// Column index of an assignment under the canonical ordering.
pub fn column_of(bits: &[bool]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(!b))
}

/// Assignment encoded by a column index of a `2^arity`-column matrix.
pub fn bits_of(arity: usize, column: usize) -> Vec<bool> {
    (0..arity).map(|j| (column >> (arity - 1 - j)) & 1 == 0).collect()
}

/// A logical matrix stored column-wise as 0-based row indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LogicalMatrix {
    rows: usize,
    col_index: Vec<usize>,
}

impl LogicalMatrix {
    /// Builds from 0-based row indices.
    pub fn new(rows: usize, col_index: Vec<usize>) -> Result<Self> {
        if rows == 0 || col_index.is_empty() {
            return Err(Error::Dimension("logical matrices need at least one row and column".into()));
        }
        if let Some(bad) = col_index.iter().find(|&&r| r >= rows) {
            return Err(Error::Dimension(format!("row index {bad} out of range for {rows} rows")));
        }
        Ok(LogicalMatrix { rows, col_index })
    }

    /// Builds `δ_rows[i₁, …, i_q]` from 1-based indices.
    pub fn from_delta(rows: usize, delta: &[usize]) -> Result<Self> {
        if delta.contains(&0) {
            return Err(Error::Dimension("δ indices are 1-based".into()));
        }
        Self::new(rows, delta.iter().map(|&i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        LogicalMatrix { rows: n, col_index: (0..n).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.col_index.len()
    }

    /// 0-based row of the nonzero entry in 0-based column `j`.
    pub fn col(&self, j: usize) -> usize {
        self.col_index[j]
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_index
    }

    /// 1-based `δ` index list, as printed in the literature.
    pub fn delta(&self) -> Vec<usize> {
        self.col_index.iter().map(|&i| i + 1).collect()
    }

    pub fn entry(&self, i: usize, j: usize) -> u8 {
        u8::from(self.col_index[j] == i)
    }

    pub fn apply(&self, v: CanonicalVector) -> Result<CanonicalVector> {
        if v.dim != self.cols() {
            return Err(Error::Dimension(format!("{}-column matrix applied to {v}", self.cols())));
        }
        Ok(CanonicalVector { dim: self.rows, index: self.col_index[v.index - 1] + 1 })
    }

    pub fn kron(&self, other: &LogicalMatrix) -> Result<LogicalMatrix> {
        self.kron_capped(other, DEFAULT_DIM_CAP)
    }

    pub fn kron_capped(&self, other: &LogicalMatrix, cap: u128) -> Result<LogicalMatrix> {
        let cols = self.cols() as u128 * other.cols() as u128;
        let rows = self.rows as u128 * other.rows as u128;
        check_cap("matrix dimension", cols, cap)?;
        check_cap("matrix dimension", rows, usize::MAX as u128)?;
        let mut col_index = Vec::with_capacity(cols as usize);
        for &a in &self.col_index {
            for &b in &other.col_index {
                col_index.push(a * other.rows + b);
            }
        }
        Ok(LogicalMatrix { rows: rows as usize, col_index })
    }

    /// Ordinary matrix product; requires `self.cols() == other.rows()`.
    pub fn mul(&self, other: &LogicalMatrix) -> Result<LogicalMatrix> {
        if self.cols() != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols(),
                other.rows,
                other.cols()
            )));
        }
        Ok(LogicalMatrix {
            rows: self.rows,
            col_index: other.col_index.iter().map(|&r| self.col_index[r]).collect(),
        })
    }

    /// Transpose of a permutation matrix (its inverse).
    pub fn permutation_inverse(&self) -> Result<LogicalMatrix> {
        if self.rows != self.cols() {
            return Err(Error::Dimension("not square".into()));
        }
        let mut inv = vec![usize::MAX; self.rows];
        for (j, &r) in self.col_index.iter().enumerate() {
            if inv[r] != usize::MAX {
                return Err(Error::Dimension("not a permutation matrix".into()));
            }
            inv[r] = j;
        }
        Ok(LogicalMatrix { rows: self.rows, col_index: inv })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols());
        for (j, &r) in self.col_index.iter().enumerate() {
            m.set(r, j, 1.0);
        }
        m
    }
}

impl fmt::Display for LogicalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "δ_{}[", self.rows)?;
        for (k, i) in self.col_index.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "]")
    }
}

/// Semi-tensor product `P ⋉ Q = (P ⊗ I_{l/b})(Q ⊗ I_{l/c})`, `l = lcm(b, c)`.
pub fn stp(p: &LogicalMatrix, q: &LogicalMatrix) -> Result<LogicalMatrix> {
    stp_capped(p, q, DEFAULT_DIM_CAP)
}

pub fn stp_capped(p: &LogicalMatrix, q: &LogicalMatrix, cap: u128) -> Result<LogicalMatrix> {
    let b = p.cols();
    let c = q.rows;
    let l = lcm(b, c);
    let (tp, tq) = (l / b, l / c);
    let cols = q.cols() as u128 * tq as u128;
    let rows = p.rows as u128 * tp as u128;
    check_cap("matrix dimension", cols, cap)?;
    check_cap("matrix dimension", rows, usize::MAX as u128)?;
    let mut col_index = Vec::with_capacity(cols as usize);
    for &qr in &q.col_index {
        for k in 0..tq {
            // column of Q ⊗ I_tq, then the matching column of P ⊗ I_tp
            let r = qr * tq + k;
            col_index.push(p.col_index[r / tp] * tp + r % tp);
        }
    }
    Ok(LogicalMatrix { rows: rows as usize, col_index })
}

/// Left-to-right STP of a list of factors.
pub fn stp_chain(factors: &[&LogicalMatrix]) -> Result<LogicalMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::Dimension("empty STP chain".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, m| stp(&acc, m))
}

/// Swap matrix `W_{[v,u]} = [I_v ⊗ δ_u¹, …, I_v ⊗ δ_u^u]`.
///
/// It satisfies `W_{[v,u]} ⋉ X ⋉ Y = Y ⋉ X` for `X ∈ Δ_u`, `Y ∈ Δ_v`.
pub fn swap_matrix(v: usize, u: usize) -> Result<LogicalMatrix> {
    if v == 0 || u == 0 {
        return Err(Error::Dimension("swap matrix needs positive sizes".into()));
    }
    check_cap("matrix dimension", v as u128 * u as u128, DEFAULT_DIM_CAP)?;
    let mut col_index = Vec::with_capacity(v * u);
    for i in 0..u {
        for a in 0..v {
            col_index.push(a * u + i);
        }
    }
    Ok(LogicalMatrix { rows: v * u, col_index })
}

/// Power-reducing matrix `Φ_u = [δ_u^i ⊗ δ_u^i]`.
pub fn power_reducing_matrix(u: usize) -> Result<LogicalMatrix> {
    if u == 0 {
        return Err(Error::Dimension("power-reducing matrix needs u ≥ 1".into()));
    }
    check_cap("matrix dimension", u as u128 * u as u128, DEFAULT_DIM_CAP)?;
    Ok(LogicalMatrix { rows: u * u, col_index: (0..u).map(|i| i * u + i).collect() })
}

/// Left dummy matrix `Ψ = 𝟏₂ᵀ ⊗ I₂ = δ₂[1,2,1,2]`.
pub fn dummy_matrix() -> LogicalMatrix {
    LogicalMatrix { rows: 2, col_index: vec![0, 1, 0, 1] }
}

/// Logical matrix `P` with `P ⋉ (⋉ᵢ x_i) = ⋉ₖ x_{order[k]}` for Boolean `x`.
pub fn permutation_matrix(order: &[usize]) -> Result<LogicalMatrix> {
    let d = order.len();
    let mut seen = vec![false; d];
    for &o in order {
        if o >= d || seen[o] {
            return Err(Error::Dimension(format!("{order:?} is not a permutation")));
        }
        seen[o] = true;
    }
    check_cap("matrix dimension", 1u128 << d, DEFAULT_DIM_CAP)?;
    let col_index = (0..1usize << d)
        .map(|s| {
            let x = bits_of(d, s);
            let y: Vec<bool> = order.iter().map(|&o| x[o]).collect();
            column_of(&y)
        })
        .collect();
    Ok(LogicalMatrix { rows: 1 << d, col_index })
}

/// Dense real matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged or empty dense matrix".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dense matrices hold finite entries only"));
        }
        Ok(DenseMatrix { rows: r, cols: c, data: rows.concat() })
    }

    /// `J₁ = [1, 0]`.
    pub fn j1() -> Self {
        DenseMatrix { rows: 1, cols: 2, data: vec![1.0, 0.0] }
    }

    /// Column vector `𝟏_n`.
    pub fn ones(n: usize) -> Self {
        DenseMatrix { rows: n, cols: 1, data: vec![1.0; n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, k: f64) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * k).collect() }
    }

    /// Entry-wise maximum.
    pub fn max(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip(other, f64::max)
    }

    fn zip(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Result<DenseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("shape mismatch".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(DenseMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension("inner dimensions differ".into()));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn kron(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        check_cap("matrix dimension", r as u128 * c as u128, DEFAULT_DIM_CAP)?;
        let mut out = Self::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Semi-tensor product of dense matrices.
pub fn stp_dense(p: &DenseMatrix, q: &DenseMatrix) -> Result<DenseMatrix> {
    let l = lcm(p.cols, q.rows);
    let (tp, tq) = (l / p.cols, l / q.rows);
    let size = (p.rows * tp) as u128 * (q.cols * tq) as u128;
    check_cap("matrix dimension", size, DEFAULT_DIM_CAP)?;
    let pe = if tp == 1 { p.clone() } else { p.kron(&DenseMatrix::identity(tp))? };
    let qe = if tq == 1 { q.clone() } else { q.kron(&DenseMatrix::identity(tq))? };
    pe.matmul(&qe)
}

/// A Boolean function stored as a truth table in canonical column order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BooleanFunction {
    arity: usize,
    table: Vec<bool>,
}

/// Hard limit on stored truth tables.
pub const MAX_ARITY: usize = 24;

impl BooleanFunction {
    pub fn new(arity: usize, table: Vec<bool>) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::CapExceeded { what: "arity", size: arity as u128, cap: MAX_ARITY as u128 });
        }
        if table.len() != 1 << arity {
            return Err(Error::Dimension(format!(
                "truth table of length {} for arity {arity}",
                table.len()
            )));
        }
        Ok(BooleanFunction { arity, table })
    }

    pub fn from_fn(arity: usize, f: impl Fn(&[bool]) -> bool) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::CapExceeded { what: "arity", size: arity as u128, cap: MAX_ARITY as u128 });
        }
        let table = (0..1usize << arity).map(|s| f(&bits_of(arity, s))).collect();
        Ok(BooleanFunction { arity, table })
    }

    pub fn constant(arity: usize, value: bool) -> Self {
        BooleanFunction { arity, table: vec![value; 1 << arity] }
    }

    pub fn projection(arity: usize, j: usize) -> Self {
        Self::from_fn(arity, |x| x[j]).expect("projection arity within cap")
    }

    pub fn not() -> Self {
        BooleanFunction { arity: 1, table: vec![false, true] }
    }

    pub fn and() -> Self {
        BooleanFunction { arity: 2, table: vec![true, false, false, false] }
    }

    pub fn or() -> Self {
        BooleanFunction { arity: 2, table: vec![true, true, true, false] }
    }

    pub fn xor() -> Self {
        BooleanFunction { arity: 2, table: vec![false, true, true, false] }
    }

    /// Conjunction of all arguments (constant 1 when `arity == 0`).
    pub fn positive_conjunction(arity: usize) -> Self {
        let mut table = vec![false; 1 << arity];
        table[0] = true;
        BooleanFunction { arity, table }
    }

    /// All 16 binary operators, ordered by truth table.
    pub fn binary_operators() -> Vec<BooleanFunction> {
        (0..16u8)
            .map(|code| BooleanFunction { arity: 2, table: (0..4).map(|s| code >> (3 - s) & 1 == 1).collect() })
            .collect()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn eval(&self, args: &[bool]) -> bool {
        debug_assert_eq!(args.len(), self.arity);
        self.table[column_of(args)]
    }

    pub fn eval_column(&self, column: usize) -> bool {
        self.table[column]
    }

    pub fn is_constant(&self) -> Option<bool> {
        let first = self.table[0];
        self.table.iter().all(|&v| v == first).then_some(first)
    }

    /// Positions (0-based) whose flip changes the output for some assignment.
    pub fn essential_positions(&self) -> Vec<usize> {
        let d = self.arity;
        (0..d)
            .filter(|&j| {
                let bit = 1usize << (d - 1 - j);
                (0..self.table.len()).any(|s| s & bit == 0 && self.table[s] != self.table[s | bit])
            })
            .collect()
    }

    pub fn is_minimal(&self) -> bool {
        self.essential_positions().len() == self.arity
    }

    /// Restriction to the given argument positions, assuming every other
    /// argument is non-essential.
    pub fn project(&self, keep: &[usize]) -> BooleanFunction {
        let d = self.arity;
        let k = keep.len();
        let table = (0..1usize << k)
            .map(|s| {
                let sub = bits_of(k, s);
                let mut full = vec![true; d];
                for (i, &p) in keep.iter().enumerate() {
                    full[p] = sub[i];
                }
                self.eval(&full)
            })
            .collect();
        BooleanFunction { arity: k, table }
    }

    /// Extension to `new_arity` arguments where old argument `i` sits at
    /// position `positions[i]`.
    pub fn embed(&self, new_arity: usize, positions: &[usize]) -> Result<BooleanFunction> {
        BooleanFunction::from_fn(new_arity, |x| {
            let sub: Vec<bool> = positions.iter().map(|&p| x[p]).collect();
            self.eval(&sub)
        })
    }

    pub fn negate(&self) -> BooleanFunction {
        BooleanFunction { arity: self.arity, table: self.table.iter().map(|v| !v).collect() }
    }

    /// Pointwise combination `op(self(x), other(x))` of same-arity functions.
    pub fn combine(&self, op: &BooleanFunction, other: &BooleanFunction) -> Result<BooleanFunction> {
        if self.arity != other.arity || op.arity != 2 {
            return Err(Error::Dimension("combine needs equal arities and a binary operator".into()));
        }
        let table = self.table.iter().zip(&other.table).map(|(&a, &b)| op.eval(&[a, b])).collect();
        Ok(BooleanFunction { arity: self.arity, table })
    }

    pub fn structure_matrix(&self) -> LogicalMatrix {
        LogicalMatrix { rows: 2, col_index: self.table.iter().map(|&v| usize::from(!v)).collect() }
    }

    pub fn from_structure_matrix(m: &LogicalMatrix) -> Result<Self> {
        let cols = m.cols();
        if m.rows() != 2 || !cols.is_power_of_two() {
            return Err(Error::Dimension(format!("{}x{cols} is not a structure matrix", m.rows())));
        }
        Self::new(cols.trailing_zeros() as usize, m.col_indices().iter().map(|&r| r == 0).collect())
    }

    /// Sum-of-products rendering with the given argument names.
    pub fn to_dnf(&self, names: &[String]) -> String {
        if let Some(c) = self.is_constant() {
            return if c { "1".into() } else { "0".into() };
        }
        let terms: Vec<String> = (0..self.table.len())
            .filter(|&s| self.table[s])
            .map(|s| {
                let lits: Vec<String> = bits_of(self.arity, s)
                    .iter()
                    .zip(names)
                    .map(|(&b, n)| if b { n.clone() } else { format!("!{n}") })
                    .collect();
                lits.join(" & ")
            })
            .collect();
        if terms.len() == 1 {
            terms[0].clone()
        } else {
            terms.iter().map(|t| format!("({t})")).collect::<Vec<_>>().join(" | ")
        }
    }

    pub fn operator_name(&self) -> Option<&'static str> {
        if self.arity != 2 {
            return None;
        }
        match self.table.as_slice() {
            [true, false, false, false] => Some("and"),
            [true, true, true, false] => Some("or"),
            [false, true, true, false] => Some("xor"),
            [true, false, false, true] => Some("xnor"),
            _ => None,
        }
    }
}

/// Structure matrix `L_f` of a Boolean function.
pub fn structure_matrix(f: &BooleanFunction) -> LogicalMatrix {
    f.structure_matrix()
}

/// Essential arguments (1-based), computed block-wise on `L_f ⋉ W`.
///
/// Argument `j` is essential iff the two column blocks of `L_f ⋉ W_{[2^{j−1},2]}`
/// differ; `W` brings `x_j` to the front of the argument product.
pub fn essential_variables(f: &BooleanFunction) -> Vec<usize> {
    let d = f.arity();
    let lf = f.structure_matrix();
    (1..=d)
        .filter(|&j| {
            let w = swap_matrix(1 << (j - 1), 2).expect("swap matrix within cap");
            let m = stp(&lf, &w).expect("same column count as L_f");
            let half = m.cols() / 2;
            m.col_indices()[..half] != m.col_indices()[half..]
        })
        .collect()
}

/// Which family of solutions `solve_pinning_equation` returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PinningSolveMode {
    /// `⊕ = XOR`, `g = F XOR f`; total and unique.
    Xor,
    /// Try ∧, then ∨, then XOR, then the remaining operators.
    Search,
}

/// Solves `L_⊕ ⋉ L_g ⋉ (I_{2^d} ⊗ L_f) ⋉ Φ_{2^d} = F` for `(⊕, g)`.
pub fn solve_pinning_equation(
    f_target: &LogicalMatrix,
    l_f: &LogicalMatrix,
    mode: PinningSolveMode,
) -> Result<(BooleanFunction, BooleanFunction)> {
    let big_f = BooleanFunction::from_structure_matrix(f_target)?;
    let f = BooleanFunction::from_structure_matrix(l_f)?;
    if big_f.arity() != f.arity() {
        return Err(Error::Dimension("F_k and L_f must have the same shape".into()));
    }
    let xor = BooleanFunction::xor();
    let mut candidates = vec![xor.clone()];
    if mode == PinningSolveMode::Search {
        let mut ops = vec![BooleanFunction::and(), BooleanFunction::or(), xor];
        let rest: Vec<_> = BooleanFunction::binary_operators().into_iter().filter(|o| !ops.contains(o)).collect();
        ops.extend(rest);
        candidates = ops;
    }
    for op in candidates {
        if let Some(g) = solve_for_operator(&op, &big_f, &f) {
            return Ok((op, g));
        }
    }
    unreachable!("the XOR decomposition always solves the pinning equation")
}

/// Pointwise choice of `g(x)` with `op(g(x), f(x)) = F(x)`, preferring 0.
fn solve_for_operator(op: &BooleanFunction, big_f: &BooleanFunction, f: &BooleanFunction) -> Option<BooleanFunction> {
    let table = (0..big_f.table.len())
        .map(|s| {
            let (fv, target) = (f.table[s], big_f.table[s]);
            [false, true].into_iter().find(|&a| op.eval(&[a, fv]) == target)
        })
        .collect::<Option<Vec<bool>>>()?;
    Some(BooleanFunction { arity: f.arity, table })
}

/// Left-hand side of the pinning equation, evaluated through STP products.
pub fn pinning_equation_lhs(op: &BooleanFunction, g: &BooleanFunction, l_f: &LogicalMatrix) -> Result<LogicalMatrix> {
    let n = 1usize << g.arity();
    let i_lf = LogicalMatrix::identity(n).kron(l_f)?;
    let phi = power_reducing_matrix(n)?;
    stp_chain(&[&op.structure_matrix(), &g.structure_matrix(), &i_lf, &phi])
}
