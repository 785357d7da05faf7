//! Square matrices over `F`, the hermitian form `J = diag(-π, 1, ..., 1)`,
//! and the invariants used to match elements across the two sides.

use std::fmt;

use crate::error::{AflError, Result};
use crate::padic::{PrecisionContext, QuadExtScalar, Valuation};

#[derive(Clone, PartialEq)]
pub struct MatrixF {
    ctx: PrecisionContext,
    n: usize,
    data: Vec<QuadExtScalar>,
}

/// The four spaces an element can be tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Unitary group: `x* J x = J`.
    U,
    /// Its Lie algebra: `x* J + J x = 0`.
    LieU,
    /// Symmetric space: `x x̄ = 1`.
    S,
    /// Its tangent space: `x + x̄ = 0`.
    LieS,
}

impl MatrixF {
    pub fn zero(ctx: &PrecisionContext, n: usize) -> Self {
        MatrixF { ctx: *ctx, n, data: vec![ctx.qzero(); n * n] }
    }

    pub fn identity(ctx: &PrecisionContext, n: usize) -> Self {
        Self::scalar(ctx, n, ctx.qone())
    }

    pub fn scalar(ctx: &PrecisionContext, n: usize, c: QuadExtScalar) -> Self {
        let mut m = Self::zero(ctx, n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn diag(ctx: &PrecisionContext, entries: &[QuadExtScalar]) -> Self {
        let n = entries.len();
        let mut m = Self::zero(ctx, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = *e;
        }
        m
    }

    pub fn from_rows(ctx: &PrecisionContext, rows: Vec<Vec<QuadExtScalar>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(AflError::DimensionMismatch);
        }
        Ok(MatrixF { ctx: *ctx, n, data: rows.into_iter().flatten().collect() })
    }

    /// `J = diag(-π, 1, ..., 1)`.
    pub fn hermitian_form(ctx: &PrecisionContext, n: usize) -> Self {
        let mut j = Self::identity(ctx, n);
        j.set(0, 0, ctx.embed(-ctx.pi()));
        j
    }

    pub fn ctx(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> QuadExtScalar {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: QuadExtScalar) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[QuadExtScalar] {
        &self.data
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(AflError::DimensionMismatch)
        } else {
            Ok(())
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(QuadExtScalar, QuadExtScalar) -> QuadExtScalar) -> Self {
        assert_eq!(self.n, other.n, "matrix dimensions differ");
        MatrixF {
            ctx: self.ctx,
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    fn map(&self, f: impl Fn(QuadExtScalar) -> QuadExtScalar) -> Self {
        MatrixF { ctx: self.ctx, n: self.n, data: self.data.iter().map(|a| f(*a)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a)
    }

    pub fn scale(&self, c: QuadExtScalar) -> Self {
        self.map(|a| c * a)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matrix dimensions differ");
        let n = self.n;
        let mut out = Self::zero(&self.ctx, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = self.ctx.qzero();
                for k in 0..n {
                    acc = acc + self.get(i, k) * other.get(k, j);
                }
                out.data[i * n + j] = acc;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[QuadExtScalar]) -> Vec<QuadExtScalar> {
        (0..self.n)
            .map(|i| (0..self.n).fold(self.ctx.qzero(), |acc, k| acc + self.get(i, k) * v[k]))
            .collect()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(&self.ctx, self.n);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Entrywise Galois conjugate `x̄`.
    pub fn conj(&self) -> Self {
        self.map(|a| a.conj())
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zero(&self.ctx, n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.get(i, j);
            }
        }
        out
    }

    /// `x* = ᵗx̄`.
    pub fn conj_transpose(&self) -> Self {
        self.transpose().conj()
    }

    pub fn trace(&self) -> QuadExtScalar {
        (0..self.n).fold(self.ctx.qzero(), |acc, i| acc + self.get(i, i))
    }

    pub fn is_integral(&self) -> Result<bool> {
        for e in &self.data {
            if !e.is_integral()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn min_valuation(&self) -> Valuation {
        self.data.iter().fold(Valuation::Infinite, |acc, e| acc.min(e.valuation()))
    }

    pub fn eq_at_precision(&self, other: &Self) -> Result<bool> {
        self.check_dim(other)?;
        for (a, b) in self.data.iter().zip(&other.data) {
            if !a.eq_at_precision(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_zero_at_precision(&self) -> bool {
        self.data.iter().all(|e| e.is_zero_at_precision())
    }

    /// `diag(h, 1)` for an `(n-1) × (n-1)` block `h`.
    pub fn embed_block(h: &MatrixF) -> MatrixF {
        let n = h.n + 1;
        let mut out = MatrixF::identity(&h.ctx, n);
        for i in 0..h.n {
            for j in 0..h.n {
                out.set(i, j, h.get(i, j));
            }
        }
        out
    }

    /// Determinant by elimination with minimal-valuation pivots.
    pub fn det(&self) -> Result<QuadExtScalar> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = self.ctx.qone();
        for col in 0..n {
            let Some(piv) = pivot_row(&a, n, col, col) else {
                return Ok(degenerate_det(&self.ctx, &a, n, col, det));
            };
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                }
                det = -det;
            }
            let pv = a[col * n + col];
            det = det * pv;
            let inv = pv.inverse()?;
            for r in col + 1..n {
                let f = a[r * n + col] * inv;
                if f.is_exact_zero() {
                    continue;
                }
                for j in col..n {
                    a[r * n + j] = a[r * n + j] - f * a[col * n + j];
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<MatrixF> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut b = MatrixF::identity(&self.ctx, n).data;
        for col in 0..n {
            let piv = match pivot_row(&a, n, col, col) {
                Some(p) => p,
                None if (col..n).all(|r| a[r * n + col].is_exact_zero()) => return Err(AflError::SingularMatrix),
                None => return Err(AflError::PrecisionExhausted("inverse of nearly singular matrix")),
            };
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
                b.swap(piv * n + j, col * n + j);
            }
            let inv = a[col * n + col].inverse()?;
            for j in 0..n {
                a[col * n + j] = a[col * n + j] * inv;
                b[col * n + j] = b[col * n + j] * inv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f.is_exact_zero() {
                    continue;
                }
                for j in 0..n {
                    a[r * n + j] = a[r * n + j] - f * a[col * n + j];
                    b[r * n + j] = b[r * n + j] - f * b[col * n + j];
                }
            }
        }
        Ok(MatrixF { ctx: self.ctx, n, data: b })
    }

    /// Coefficients `c_0, ..., c_n` of `det(T - x)`, with `c_n = 1`.
    pub fn charpoly(&self) -> Result<Vec<QuadExtScalar>> {
        let n = self.n;
        if n as u32 >= self.ctx.p() {
            return Err(AflError::InvalidInput("charpoly needs n < p"));
        }
        let mut coeffs = vec![self.ctx.qzero(); n + 1];
        coeffs[n] = self.ctx.qone();
        let mut m = MatrixF::zero(&self.ctx, n);
        for k in 1..=n {
            m = self.mul(&m).add(&MatrixF::scalar(&self.ctx, n, coeffs[n - k + 1]));
            let tr = self.mul(&m).trace();
            let kinv = self.ctx.qint(k as i64).inverse()?;
            coeffs[n - k] = -(tr * kinv);
        }
        Ok(coeffs)
    }

    /// Columns `e, xe, ..., x^{n-1}e` with `e` the last basis vector.
    pub fn krylov_columns(&self) -> MatrixF {
        let n = self.n;
        let mut v: Vec<QuadExtScalar> = (0..n).map(|i| if i == n - 1 { self.ctx.qone() } else { self.ctx.qzero() }).collect();
        let mut out = MatrixF::zero(&self.ctx, n);
        for c in 0..n {
            for r in 0..n {
                out.set(r, c, v[r]);
            }
            v = self.mul_vec(&v);
        }
        out
    }

    /// Rows `ᵗe, ᵗe x, ..., ᵗe x^{n-1}`.
    pub fn krylov_rows(&self) -> MatrixF {
        self.transpose().krylov_columns().transpose()
    }
}

fn pivot_row(a: &[QuadExtScalar], n: usize, col: usize, start: usize) -> Option<usize> {
    (start..n)
        .filter_map(|r| a[r * n + col].valuation().finite().map(|v| (v, r)))
        .min()
        .map(|(_, r)| r)
}

/// Determinant once a column has no entry of known valuation left: either
/// exactly zero, or a zero known to a conservative precision.
fn degenerate_det(ctx: &PrecisionContext, a: &[QuadExtScalar], n: usize, col: usize, det: QuadExtScalar) -> QuadExtScalar {
    if (col..n).all(|r| a[r * n + col].is_exact_zero()) {
        return ctx.qzero();
    }
    let mut bound = 0i64;
    for c in col..n {
        let low = (col..n).map(|r| a[r * n + c].valuation().lower_bound()).min().unwrap_or(i32::MAX);
        if low == i32::MAX {
            return ctx.qzero();
        }
        bound += low as i64;
    }
    let prec = bound + det.valuation().lower_bound() as i64;
    let z = crate::padic::PadicScalar::approx_zero(ctx.p(), prec as i32);
    ctx.quad(z, z)
}

impl fmt::Debug for MatrixF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Tests membership of `x` in one of the four spaces.
pub fn membership(x: &MatrixF, space: Space) -> Result<bool> {
    let ctx = x.ctx();
    let n = x.n();
    match space {
        Space::U => {
            let j = MatrixF::hermitian_form(ctx, n);
            x.conj_transpose().mul(&j).mul(x).eq_at_precision(&j)
        }
        Space::LieU => {
            let j = MatrixF::hermitian_form(ctx, n);
            let lhs = x.conj_transpose().mul(&j).add(&j.mul(x));
            lhs.eq_at_precision(&MatrixF::zero(ctx, n))
        }
        Space::S => x.mul(&x.conj()).eq_at_precision(&MatrixF::identity(ctx, n)),
        Space::LieS => x.add(&x.conj()).eq_at_precision(&MatrixF::zero(ctx, n)),
    }
}

fn det_nonzero(m: &MatrixF) -> Result<Option<QuadExtScalar>> {
    let d = m.det()?;
    match d.valuation() {
        Valuation::Finite(_) => Ok(Some(d)),
        Valuation::Infinite => Ok(None),
        Valuation::AtLeast(_) => Err(AflError::PrecisionExhausted("cannot decide regular semisimplicity")),
    }
}

/// Regular semisimple in the relative sense: both Krylov determinants of
/// the last basis vector are nonzero.
pub fn is_regular_semisimple(x: &MatrixF) -> Result<bool> {
    Ok(det_nonzero(&x.krylov_columns())?.is_some() && det_nonzero(&x.krylov_rows())?.is_some())
}

/// `η(det(e, xe, ..., x^{n-1}e))`.
pub fn transfer_factor(x: &MatrixF) -> Result<i8> {
    if !is_regular_semisimple(x)? {
        return Err(AflError::NotRegularSemisimple);
    }
    x.krylov_columns().det()?.eta()
}

/// Group-side transfer factor `Ω(γ)`.
pub fn transfer_factor_big_omega(gamma: &MatrixF) -> Result<i8> {
    transfer_factor(gamma)
}

/// Lie-algebra transfer factor `ω(y)`.
pub fn transfer_factor_omega(y: &MatrixF) -> Result<i8> {
    transfer_factor(y)
}

/// Complete invariants for the `GL_{n-1}`-conjugation action on regular
/// semisimple elements: the characteristic polynomial and the corner
/// entries `(x^i)_{nn}` for `1 <= i <= 2n-2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingInvariants {
    pub charpoly: Vec<QuadExtScalar>,
    pub corner_moments: Vec<QuadExtScalar>,
}

pub fn matching_invariants(x: &MatrixF) -> Result<MatchingInvariants> {
    if !is_regular_semisimple(x)? {
        return Err(AflError::NotRegularSemisimple);
    }
    let n = x.n();
    let mut power = x.clone();
    let mut corner_moments = Vec::with_capacity(2 * n - 2);
    for _ in 1..=2 * n - 2 {
        corner_moments.push(power.get(n - 1, n - 1));
        power = power.mul(x);
    }
    Ok(MatchingInvariants { charpoly: x.charpoly()?, corner_moments })
}

pub fn matches(x: &MatrixF, y: &MatrixF) -> Result<bool> {
    if x.n() != y.n() {
        return Err(AflError::DimensionMismatch);
    }
    let (a, b) = (matching_invariants(x)?, matching_invariants(y)?);
    for (u, v) in a.charpoly.iter().chain(&a.corner_moments).zip(b.charpoly.iter().chain(&b.corner_moments)) {
        if !u.eq_at_precision(v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Expresses `target` in the span of `I, x, x², ...` (stopping at the first
/// dependent power). Returns `None` when `target` is outside the span.
pub fn solve_in_powers(x: &MatrixF, target: &MatrixF) -> Result<Option<Vec<QuadExtScalar>>> {
    let n = x.n();
    let ctx = *x.ctx();
    let mut basis: Vec<MatrixF> = Vec::new();
    let mut power = MatrixF::identity(&ctx, n);
    for _ in 0..n {
        if independent_of(&basis, &power)? {
            basis.push(power.clone());
            power = power.mul(x);
        } else {
            break;
        }
    }
    // Pivot rows are chosen among the n² flattened entries.
    let d = basis.len();
    let rows = n * n;
    let mut a: Vec<Vec<QuadExtScalar>> = (0..rows)
        .map(|r| {
            let mut row: Vec<QuadExtScalar> = basis.iter().map(|b| b.data[r]).collect();
            row.push(target.data[r]);
            row
        })
        .collect();
    let mut pivots = Vec::with_capacity(d);
    let mut used = vec![false; rows];
    for c in 0..d {
        let best = (0..rows)
            .filter(|r| !used[*r])
            .filter_map(|r| a[r][c].valuation().finite().map(|v| (v, r)))
            .min();
        let Some((_, pr)) = best else {
            return Err(AflError::PrecisionExhausted("power basis degenerate"));
        };
        used[pr] = true;
        pivots.push(pr);
        let inv = a[pr][c].inverse()?;
        for r in 0..rows {
            if r == pr || a[r][c].is_exact_zero() {
                continue;
            }
            let f = a[r][c] * inv;
            for j in c..=d {
                let t = a[pr][j];
                a[r][j] = a[r][j] - f * t;
            }
        }
    }
    let mut coeffs = vec![ctx.qzero(); d];
    for (c, &pr) in pivots.iter().enumerate() {
        coeffs[c] = a[pr][d].checked_div(&a[pr][c])?;
    }
    let mut recon = MatrixF::zero(&ctx, n);
    for (c, b) in coeffs.iter().zip(&basis) {
        recon = recon.add(&b.scale(*c));
    }
    if !recon.eq_at_precision(target)? {
        return Ok(None);
    }
    Ok(Some(coeffs))
}

fn independent_of(basis: &[MatrixF], m: &MatrixF) -> Result<bool> {
    if basis.is_empty() {
        return Ok(!m.is_zero_at_precision());
    }
    let n = m.n();
    let mut stack = basis.to_vec();
    stack.push(m.clone());
    // Rank test through elimination on the n² × k matrix of flattened powers.
    let k = stack.len();
    let rows = n * n;
    let mut a: Vec<Vec<QuadExtScalar>> = (0..rows).map(|r| stack.iter().map(|b| b.data[r]).collect()).collect();
    let mut used = vec![false; rows];
    for c in 0..k {
        let best = (0..rows)
            .filter(|r| !used[*r])
            .filter_map(|r| a[r][c].valuation().finite().map(|v| (v, r)))
            .min();
        let Some((_, pr)) = best else {
            return Ok(false);
        };
        used[pr] = true;
        let inv = a[pr][c].inverse()?;
        for r in 0..rows {
            if r == pr || a[r][c].is_exact_zero() {
                continue;
            }
            let f = a[r][c] * inv;
            for j in c..k {
                let t = a[pr][j];
                a[r][j] = a[r][j] - f * t;
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(5, 20).unwrap()
    }

    fn m(ctx: &PrecisionContext, rows: &[[i64; 3]]) -> MatrixF {
        MatrixF::from_rows(ctx, rows.iter().map(|r| r.iter().map(|&v| ctx.qint(v)).collect()).collect()).unwrap()
    }

    #[test]
    fn det_and_inverse() {
        let c = ctx();
        let a = m(&c, &[[2, 1, 0], [1, 3, 5], [0, 1, 4]]);
        assert!(a.det().unwrap().eq_at_precision(&c.qint(2 * 7 - 1 * 4)).unwrap());
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).eq_at_precision(&MatrixF::identity(&c, 3)).unwrap());
        let sing = m(&c, &[[1, 2, 3], [2, 4, 6], [0, 0, 0]]);
        assert!(sing.det().unwrap().is_zero_at_precision());
        assert!(sing.inverse().is_err());
    }

    #[test]
    fn charpoly_of_companion() {
        let c = ctx();
        // companion of T^3 - 2T^2 + 3T - 7
        let a = m(&c, &[[0, 0, 7], [1, 0, -3], [0, 1, 2]]);
        let cp = a.charpoly().unwrap();
        for (got, want) in cp.iter().zip([-7, 3, -2, 1]) {
            assert!(got.eq_at_precision(&c.qint(want)).unwrap());
        }
    }

    #[test]
    fn diagonal_is_not_regular_semisimple() {
        let c = ctx();
        let d = m(&c, &[[1, 0, 0], [0, 2, 0], [0, 0, 3]]);
        assert!(!is_regular_semisimple(&d).unwrap());
        assert_eq!(transfer_factor(&d), Err(AflError::NotRegularSemisimple));
        assert!(!is_regular_semisimple(&MatrixF::zero(&c, 3)).unwrap());
    }

    #[test]
    fn form_is_in_u() {
        let c = ctx();
        assert!(membership(&MatrixF::identity(&c, 3), Space::U).unwrap());
        assert!(membership(&MatrixF::zero(&c, 3), Space::LieU).unwrap());
        let t = MatrixF::scalar(&c, 3, c.tau());
        assert!(membership(&t, Space::LieS).unwrap());
        assert!(!membership(&t, Space::S).unwrap());
    }

    #[test]
    fn zero_matrix_powers() {
        let c = ctx();
        let z = MatrixF::zero(&c, 3);
        let target = MatrixF::scalar(&c, 3, c.qint(-1));
        let coeffs = solve_in_powers(&z, &target).unwrap().unwrap();
        assert_eq!(coeffs.len(), 1);
        assert!(coeffs[0].eq_at_precision(&c.qint(-1)).unwrap());
    }
}
