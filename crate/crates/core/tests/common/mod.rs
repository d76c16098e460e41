//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use jgap::{HPolytope, Point};
use num_bigint::BigUint;

/// Vertices of a bounded polytope in dimension 2 or 3, by solving every
/// `n x n` subsystem of active rows with Cramer's rule.
pub fn vertices(p: &HPolytope) -> Vec<Point> {
    let n = p.dim();
    let rows = p.num_facets();
    let mut out = Vec::new();
    let feasible = |x: &[f64]| {
        p.normals().iter().zip(p.offsets()).all(|(a, &b)| a.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() <= b + 1e-9)
    };
    match n {
        2 => {
            for i in 0..rows {
                for j in i + 1..rows {
                    let (a, b) = (&p.normals()[i][..], &p.normals()[j][..]);
                    let det = a[0] * b[1] - a[1] * b[0];
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let (c, d) = (p.offsets()[i], p.offsets()[j]);
                    let x = [(c * b[1] - a[1] * d) / det, (a[0] * d - c * b[0]) / det];
                    if feasible(&x) {
                        out.push(Point(x.to_vec()));
                    }
                }
            }
        }
        3 => {
            for i in 0..rows {
                for j in i + 1..rows {
                    for l in j + 1..rows {
                        let m = [&p.normals()[i][..], &p.normals()[j][..], &p.normals()[l][..]];
                        let rhs = [p.offsets()[i], p.offsets()[j], p.offsets()[l]];
                        let det3 = |c: [[f64; 3]; 3]| {
                            c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
                                - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
                                + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
                        };
                        let base = [
                            [m[0][0], m[0][1], m[0][2]],
                            [m[1][0], m[1][1], m[1][2]],
                            [m[2][0], m[2][1], m[2][2]],
                        ];
                        let det = det3(base);
                        if det.abs() < 1e-12 {
                            continue;
                        }
                        let mut x = [0.0; 3];
                        for (col, xc) in x.iter_mut().enumerate() {
                            let mut c = base;
                            for r in 0..3 {
                                c[r][col] = rhs[r];
                            }
                            *xc = det3(c) / det;
                        }
                        if feasible(&x) {
                            out.push(Point(x.to_vec()));
                        }
                    }
                }
            }
        }
        _ => panic!("vertex enumeration oracle supports n = 2, 3"),
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `max_v <d, v>` over the enumerated vertices.
pub fn support_by_vertices(verts: &[Point], d: &[f64]) -> f64 {
    verts.iter().map(|v| dot(v, d)).fold(f64::NEG_INFINITY, f64::max)
}

/// `max_j (h_inner(a_j) - scale b_j)` over the facets of `outer`.
pub fn inclusion_margin_by_vertices(inner: &HPolytope, outer: &HPolytope, scale: f64) -> f64 {
    let verts = vertices(inner);
    outer
        .normals()
        .iter()
        .zip(outer.offsets())
        .map(|(a, &b)| support_by_vertices(&verts, a) - scale * b)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Overlap counts of every `k`-subset of `[n]` with the fixed set `{0..k-1}`:
/// `counts[l]` is the number of subsets meeting it in `l` elements.
pub fn overlap_counts(n: usize, k: usize) -> Vec<u64> {
    let mut counts = vec![0u64; k + 1];
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize == k {
            let l = (mask & ((1u32 << k) - 1)).count_ones() as usize;
            counts[l] += 1;
        }
    }
    counts
}

/// `C0 = (56/15)(3 sqrt 7 + 4 sqrt 3)` to `digits` decimal places, as a
/// decimal string, using integer square roots.
pub fn c0_decimal(digits: u32) -> String {
    // extra guard digits absorb the truncation of the two square roots
    let guard = 10;
    let scale = BigUint::from(10u32).pow(2 * (digits + guard));
    let s7 = (BigUint::from(7u32) * &scale).sqrt();
    let s3 = (BigUint::from(3u32) * &scale).sqrt();
    let num = BigUint::from(56u32) * (BigUint::from(3u32) * s7 + BigUint::from(4u32) * s3);
    let v = num / BigUint::from(15u32) / BigUint::from(10u32).pow(guard);
    let s = v.to_string();
    let (int, frac) = s.split_at(s.len() - digits as usize);
    format!("{int}.{frac}")
}
