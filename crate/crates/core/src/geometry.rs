//! Leader polytopes: exact Euclidean projection, the stacked distance
//! function `d_xi`, and hull membership.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Upper bound on the number of leaders; projection enumerates `2^k - 1`
/// vertex subsets.
pub const MAX_LEADERS: usize = 12;

/// Weights at or above this value count as feasible in the subset search.
pub const WEIGHT_FLOOR: f64 = -1e-12;

/// Relative pivot below which a vertex subset is treated as affinely
/// dependent and skipped.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    NoLeaders,
    TooManyLeaders {
        k: usize,
    },
    ZeroDimension,
    NonFinite,
    /// Flat coordinate buffer does not split into points of dimension `m`.
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoLeaders => f.write_str("at least one leader is required"),
            Self::TooManyLeaders { k } => {
                write!(f, "{k} leaders exceeds the supported maximum of {MAX_LEADERS}")
            }
            Self::ZeroDimension => f.write_str("space dimension must be at least 1"),
            Self::NonFinite => f.write_str("coordinates must be finite"),
            Self::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} coordinates, got {got}")
            }
        }
    }
}

impl core::error::Error for GeometryError {}

/// Static leader positions `x0^1, ..., x0^k` in `R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderSet {
    m: usize,
    positions: Vec<f64>,
}

impl LeaderSet {
    /// `positions` holds the `k` points back to back (`k * m` values).
    pub fn new(m: usize, positions: Vec<f64>) -> Result<Self, GeometryError> {
        if m == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        if !positions.len().is_multiple_of(m) {
            return Err(GeometryError::DimensionMismatch {
                expected: positions.len().div_ceil(m) * m,
                got: positions.len(),
            });
        }
        let k = positions.len() / m;
        if k == 0 {
            return Err(GeometryError::NoLeaders);
        }
        if k > MAX_LEADERS {
            return Err(GeometryError::TooManyLeaders { k });
        }
        if positions.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self { m, positions })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self, GeometryError> {
        let m = points.first().map_or(0, |p| p.as_ref().len());
        let mut flat = Vec::with_capacity(points.len() * m);
        for p in points {
            let p = p.as_ref();
            if p.len() != m {
                return Err(GeometryError::DimensionMismatch {
                    expected: m,
                    got: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        if points.is_empty() {
            return Err(GeometryError::NoLeaders);
        }
        Self::new(m, flat)
    }

    pub fn k(&self) -> usize {
        self.positions.len() / self.m
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn position(&self, q: usize) -> &[f64] {
        &self.positions[q * self.m..(q + 1) * self.m]
    }

    pub fn positions(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks_exact(self.m)
    }

    /// Stacked `x0` in `R^{km}`.
    pub fn as_flat(&self) -> &[f64] {
        &self.positions
    }

    /// Leader set shifted by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Result<Self, GeometryError> {
        if offset.len() != self.m {
            return Err(GeometryError::DimensionMismatch {
                expected: self.m,
                got: offset.len(),
            });
        }
        let positions = self
            .positions
            .chunks_exact(self.m)
            .flat_map(|p| p.iter().zip(offset).map(|(a, b)| a + b))
            .collect();
        Self::new(self.m, positions)
    }

    /// Closest point of the leader polytope to `x`.
    pub fn project(&self, x: &[f64]) -> Result<PolytopeProjection, GeometryError> {
        project(x, self)
    }
}

/// Closest point in the leader polytope, its convex weights, and
/// `sq_dist = ½‖x − closest‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeProjection {
    pub closest: Vec<f64>,
    pub weights: Vec<f64>,
    pub sq_dist: f64,
}

impl PolytopeProjection {
    /// `max_v ⟨x − closest, v − closest⟩` over the leader vertices; non-positive
    /// (up to round-off) exactly when `closest` is the projection of `x`.
    pub fn optimality_gap(&self, x: &[f64], leaders: &LeaderSet) -> f64 {
        leaders
            .positions()
            .map(|v| {
                x.iter()
                    .zip(&self.closest)
                    .zip(v)
                    .map(|((xi, ci), vi)| (xi - ci) * (vi - ci))
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Exact projection of `x` onto `co{leaders}`.
///
/// Enumerates every nonempty vertex subset, solves the equality-constrained
/// least-squares problem on its affine hull and keeps the closest candidate
/// whose weights are all nonnegative. Affinely dependent subsets are skipped:
/// the optimum always lies in the relative interior of the hull of some
/// affinely independent subset, whose affine projection reproduces it.
pub fn project(x: &[f64], leaders: &LeaderSet) -> Result<PolytopeProjection, GeometryError> {
    let m = leaders.m();
    if x.len() != m {
        return Err(GeometryError::DimensionMismatch {
            expected: m,
            got: x.len(),
        });
    }
    let k = leaders.k();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut members = Vec::with_capacity(k);
    let mut scratch = SubsetScratch::new(k, m);

    for mask in 1u32..(1u32 << k) {
        members.clear();
        members.extend((0..k).filter(|&q| mask & (1 << q) != 0));
        if members.len() > m + 1 {
            continue;
        }
        let Some(local) = scratch.affine_weights(x, leaders, &members) else {
            continue;
        };
        if local.iter().any(|&w| w < WEIGHT_FLOOR) {
            continue;
        }
        let mut point = vec![0.0; m];
        for (&q, &w) in members.iter().zip(local) {
            for (p, v) in point.iter_mut().zip(leaders.position(q)) {
                *p += w * v;
            }
        }
        let d = half_sq_dist(x, &point);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            let mut weights = vec![0.0; k];
            for (&q, &w) in members.iter().zip(local) {
                weights[q] = w;
            }
            best = Some((d, weights));
        }
    }

    // Singletons always pass, so a candidate exists.
    let (_, weights) = best.expect("singleton subsets are always feasible");
    let mut closest = vec![0.0; m];
    for (q, &w) in weights.iter().enumerate() {
        for (c, v) in closest.iter_mut().zip(leaders.position(q)) {
            *c += w * v;
        }
    }
    let sq_dist = half_sq_dist(x, &closest);
    Ok(PolytopeProjection {
        closest,
        weights,
        sq_dist,
    })
}

fn half_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>()
}

/// Buffers reused across subsets.
struct SubsetScratch {
    diffs: Vec<f64>,
    gram: Vec<f64>,
    rhs: Vec<f64>,
    weights: Vec<f64>,
}

impl SubsetScratch {
    fn new(k: usize, m: usize) -> Self {
        Self {
            diffs: vec![0.0; k * m],
            gram: vec![0.0; k * k],
            rhs: vec![0.0; k],
            weights: vec![0.0; k],
        }
    }

    /// Weights of the projection of `x` onto the affine hull of `members`,
    /// or `None` when the members are affinely dependent.
    fn affine_weights(&mut self, x: &[f64], leaders: &LeaderSet, members: &[usize]) -> Option<&[f64]> {
        let m = leaders.m();
        let base = leaders.position(members[0]);
        let r = members.len() - 1;
        // Columns d_s = v_s - v_0; solve (DᵀD) g = Dᵀ(x - v_0).
        for (s, &q) in members[1..].iter().enumerate() {
            for (d, (v, b)) in self.diffs[s * m..(s + 1) * m]
                .iter_mut()
                .zip(leaders.position(q).iter().zip(base))
            {
                *d = v - b;
            }
        }
        let mut scale: f64 = 0.0;
        for a in 0..r {
            let da = &self.diffs[a * m..(a + 1) * m];
            for b in 0..=a {
                let db = &self.diffs[b * m..(b + 1) * m];
                let g: f64 = da.iter().zip(db).map(|(u, v)| u * v).sum();
                self.gram[a * r + b] = g;
                self.gram[b * r + a] = g;
            }
            scale = scale.max(self.gram[a * r + a]);
            self.rhs[a] = da
                .iter()
                .zip(x.iter().zip(base))
                .map(|(d, (xi, bi))| d * (xi - bi))
                .sum();
        }
        if r > 0 && !cholesky_solve_in_place(&mut self.gram[..r * r], &mut self.rhs[..r], r, scale) {
            return None;
        }
        let tail: f64 = self.rhs[..r].iter().sum();
        self.weights[0] = 1.0 - tail;
        self.weights[1..=r].copy_from_slice(&self.rhs[..r]);
        Some(&self.weights[..=r])
    }
}

/// In-place Cholesky solve of the `r x r` system; false if a pivot falls
/// below `RANK_TOLERANCE * scale`.
fn cholesky_solve_in_place(a: &mut [f64], b: &mut [f64], r: usize, scale: f64) -> bool {
    let floor = RANK_TOLERANCE * scale;
    for j in 0..r {
        let mut d = a[j * r + j];
        for l in 0..j {
            d -= a[j * r + l] * a[j * r + l];
        }
        if d <= floor {
            return false;
        }
        let d = libm::sqrt(d);
        a[j * r + j] = d;
        for i in (j + 1)..r {
            let mut v = a[i * r + j];
            for l in 0..j {
                v -= a[i * r + l] * a[j * r + l];
            }
            a[i * r + j] = v / d;
        }
    }
    for i in 0..r {
        let mut v = b[i];
        for l in 0..i {
            v -= a[i * r + l] * b[l];
        }
        b[i] = v / a[i * r + i];
    }
    for i in (0..r).rev() {
        let mut v = b[i];
        for l in (i + 1)..r {
            v -= a[l * r + i] * b[l];
        }
        b[i] = v / a[i * r + i];
    }
    true
}

/// `d_xi(x) = ½ inf_{xi in Xi} ‖x − xi‖²` for a stacked state.
///
/// `Xi` is a Cartesian product of copies of the leader polytope, so the
/// infimum splits into one projection per agent.
pub fn d_xi(x: &[f64], leaders: &LeaderSet) -> Result<f64, GeometryError> {
    let m = leaders.m();
    if !x.len().is_multiple_of(m) {
        return Err(GeometryError::DimensionMismatch {
            expected: x.len().div_ceil(m) * m,
            got: x.len(),
        });
    }
    let mut total = 0.0;
    for xi in x.chunks_exact(m) {
        total += project(xi, leaders)?.sq_dist;
    }
    Ok(total)
}

/// True iff `x` lies within Euclidean distance `tol` of the leader polytope.
pub fn in_hull(x: &[f64], leaders: &LeaderSet, tol: f64) -> Result<bool, GeometryError> {
    Ok(project(x, leaders)?.sq_dist <= 0.5 * tol * tol)
}
