//! Second-order centered difference operators with homogeneous Dirichlet data.
//!
//! Neighbors outside the interior contribute the boundary value zero, so no
//! one-sided stencil is ever needed.

use super::grid::{Grid, ScalarGridField, VectorGridField};

fn neighbor(f: &ScalarGridField, p: usize, idx_along: usize, axis: usize, forward: bool) -> f64 {
    let g = f.grid;
    let s = g.stride(axis);
    if forward {
        if idx_along + 1 < g.n {
            f.data[p + s]
        } else {
            0.0
        }
    } else if idx_along > 0 {
        f.data[p - s]
    } else {
        0.0
    }
}

/// Centered first difference `(u_{+} - u_{-})/(2h)` along `axis`.
pub fn diff(f: &ScalarGridField, axis: usize) -> ScalarGridField {
    let g = f.grid;
    let inv = 0.5 / g.h();
    ScalarGridField::from_index_fn(g, |i, j, k| {
        let p = g.idx(i, j, k);
        let a = [i, j, k][axis];
        (neighbor(f, p, a, axis, true) - neighbor(f, p, a, axis, false)) * inv
    })
}

/// Second difference `(u_{+} - 2u + u_{-})/h²` along `axis`.
pub fn diff2(f: &ScalarGridField, axis: usize) -> ScalarGridField {
    let g = f.grid;
    let inv = 1.0 / (g.h() * g.h());
    ScalarGridField::from_index_fn(g, |i, j, k| {
        let p = g.idx(i, j, k);
        let a = [i, j, k][axis];
        (neighbor(f, p, a, axis, true) - 2.0 * f.data[p] + neighbor(f, p, a, axis, false)) * inv
    })
}

/// Seven-point Laplacian.
pub fn laplacian(f: &ScalarGridField) -> ScalarGridField {
    let g = f.grid;
    let inv = 1.0 / (g.h() * g.h());
    ScalarGridField::from_index_fn(g, |i, j, k| {
        let p = g.idx(i, j, k);
        let mut acc = -6.0 * f.data[p];
        for (axis, a) in [i, j, k].into_iter().enumerate() {
            acc += neighbor(f, p, a, axis, true) + neighbor(f, p, a, axis, false);
        }
        acc * inv
    })
}

pub fn gradient(f: &ScalarGridField) -> VectorGridField {
    VectorGridField::new(std::array::from_fn(|axis| diff(f, axis)))
}

pub fn divergence(v: &VectorGridField) -> ScalarGridField {
    let g = v.grid();
    let (d0, d1, d2) = (diff(&v.c[0], 0), diff(&v.c[1], 1), diff(&v.c[2], 2));
    ScalarGridField::from_index_fn(g, |i, j, k| {
        let p = g.idx(i, j, k);
        d0.data[p] + d1.data[p] + d2.data[p]
    })
}

pub fn vector_laplacian(v: &VectorGridField) -> VectorGridField {
    v.map(laplacian)
}

/// Centered curl.
pub fn curl(v: &VectorGridField) -> VectorGridField {
    let d = |c: usize, axis: usize| diff(&v.c[c], axis);
    VectorGridField::new([&d(2, 1) - &d(1, 2), &d(0, 2) - &d(2, 0), &d(1, 0) - &d(0, 1)])
}

/// Jacobian `J[i][j] = ∂_j v_i`.
pub fn jacobian(v: &VectorGridField) -> [[ScalarGridField; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| diff(&v.c[i], j)))
}

/// `h³ Σ |forward difference|²` over all `n+1` links of every grid line,
/// counting the links to the zero boundary. Equals `-⟨u, Δ_h u⟩`.
pub fn forward_gradient_energy(f: &ScalarGridField) -> f64 {
    let g: Grid = f.grid;
    let inv = 1.0 / g.h();
    let mut acc = 0.0;
    for axis in 0..3 {
        for p in 0..g.len() {
            let a = g.ijk(p)[axis];
            let here = f.data[p];
            let fwd = neighbor(f, p, a, axis, true);
            let d = (fwd - here) * inv;
            acc += d * d;
            if a == 0 {
                let d0 = here * inv;
                acc += d0 * d0;
            }
        }
    }
    acc * g.cell_volume()
}
