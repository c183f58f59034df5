//! Curvature from numeric metric evaluations only.
//!
//! First and second metric derivatives come from fourth-order central
//! stencils; everything else is plain arithmetic on the sampled values.
//! Nothing here touches the symbolic differentiation engine, which makes
//! this an independent check of [`christoffel`](super::christoffel) and
//! friends. Index layouts match the symbolic tensors.

use nalgebra::DMatrix;

use super::curvature::{christoffel, ricci, riemann, scalar_curvature};
use super::metric::MetricField;
use crate::error::Result;
use crate::expr::EvalPoint;

/// Default step; balances `O(h⁴)` truncation against `ε/h²` roundoff.
pub const ORACLE_STEP: f64 = 1e-3;

const W1: [(f64, f64); 4] = [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)];

/// Numeric curvature at one point, flattened row-major like [`TensorField`](super::TensorField).
#[derive(Clone, Debug)]
pub struct FdCurvature {
    /// `Γ^k_ij` at `(k, i, j)`.
    pub christoffel: Vec<f64>,
    /// `R(X,Y,Z,T) = g(R(X,Y)T, Z)` at `(i, j, k, l)`.
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
}

pub fn fd_curvature(g: &MetricField, p: &EvalPoint, h: f64) -> Result<FdCurvature> {
    let d = g.dim();
    let coords = g.chart().coords().to_vec();
    let at = |shifts: &[(usize, f64)]| -> Result<DMatrix<f64>> {
        let mut q = p.clone();
        for &(a, s) in shifts {
            q = q.shifted(&coords[a], s * h);
        }
        g.matrix_at(&q)
    };

    let g0 = g.matrix_at(p)?;
    let ginv = g0.clone().try_inverse().ok_or_else(|| crate::Error::Sampling(format!("singular metric at {p}")))?;

    // dg[a] = ∂_a g, ddg[a][b] = ∂_a ∂_b g
    let mut dg = Vec::with_capacity(d);
    for a in 0..d {
        let mut acc = DMatrix::zeros(d, d);
        for (s, w) in W1 {
            acc += w * at(&[(a, s)])?;
        }
        dg.push(acc / (12.0 * h));
    }
    let mut ddg = vec![vec![DMatrix::zeros(d, d); d]; d];
    for a in 0..d {
        for b in a..d {
            let m = if a == b {
                let mut acc = -30.0 * &g0;
                for (s, w) in [(2.0, -1.0), (1.0, 16.0), (-1.0, 16.0), (-2.0, -1.0)] {
                    acc += w * at(&[(a, s)])?;
                }
                acc / (12.0 * h * h)
            } else {
                let mut acc = DMatrix::zeros(d, d);
                for (sa, wa) in W1 {
                    for (sb, wb) in W1 {
                        acc += wa * wb * at(&[(a, sa), (b, sb)])?;
                    }
                }
                acc / (144.0 * h * h)
            };
            ddg[b][a] = m.clone();
            ddg[a][b] = m;
        }
    }

    let dginv: Vec<DMatrix<f64>> = dg.iter().map(|m| -(&ginv * m * &ginv)).collect();
    let idx3 = |k: usize, i: usize, j: usize| (k * d + i) * d + j;

    // first kind [l; i j] and its derivatives
    let first = |l: usize, i: usize, j: usize| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
    let dfirst =
        |m: usize, l: usize, i: usize, j: usize| 0.5 * (ddg[m][i][(j, l)] + ddg[m][j][(i, l)] - ddg[m][l][(i, j)]);

    let mut gamma = vec![0.0; d * d * d];
    let mut dgamma = vec![0.0; d * d * d * d]; // (m, k, i, j) = ∂_m Γ^k_ij
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                gamma[idx3(k, i, j)] = (0..d).map(|l| ginv[(k, l)] * first(l, i, j)).sum();
                for m in 0..d {
                    dgamma[m * d * d * d + idx3(k, i, j)] =
                        (0..d).map(|l| dginv[m][(k, l)] * first(l, i, j) + ginv[(k, l)] * dfirst(m, l, i, j)).sum();
                }
            }
        }
    }
    let gm = |k: usize, i: usize, j: usize| gamma[idx3(k, i, j)];
    let dgm = |m: usize, k: usize, i: usize, j: usize| dgamma[m * d * d * d + idx3(k, i, j)];

    let idx4 = |a: usize, b: usize, c: usize, e: usize| ((a * d + b) * d + c) * d + e;
    let mut op = vec![0.0; d.pow(4)];
    for l in 0..d {
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut v = dgm(i, l, j, k) - dgm(j, l, i, k);
                    for m in 0..d {
                        v += gm(l, i, m) * gm(m, j, k) - gm(l, j, m) * gm(m, i, k);
                    }
                    op[idx4(l, k, i, j)] = v;
                }
            }
        }
    }
    let mut riem = vec![0.0; d.pow(4)];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    riem[idx4(i, j, k, l)] = (0..d).map(|m| g0[(k, m)] * op[idx4(m, l, i, j)]).sum();
                }
            }
        }
    }
    let mut ric = vec![0.0; d * d];
    for j in 0..d {
        for k in 0..d {
            ric[j * d + k] = (0..d).map(|i| op[idx4(i, k, i, j)]).sum();
        }
    }
    let scalar = (0..d).flat_map(|j| (0..d).map(move |k| (j, k))).map(|(j, k)| ginv[(j, k)] * ric[j * d + k]).sum();
    Ok(FdCurvature { christoffel: gamma, riemann: riem, ricci: ric, scalar })
}

/// Worst relative disagreement between symbolic and numeric curvature.
///
/// Per point and quantity: `max |symbolic − numeric| / max(1, max |symbolic|)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OracleDeviation {
    pub christoffel: f64,
    pub riemann: f64,
    pub ricci: f64,
    pub scalar: f64,
}

impl OracleDeviation {
    pub fn max(&self) -> f64 {
        self.christoffel.max(self.riemann).max(self.ricci).max(self.scalar)
    }
}

fn relative(sym: &[f64], num: &[f64]) -> f64 {
    let scale = sym.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    sym.iter().zip(num).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())) / scale
}

pub fn oracle_deviation(g: &MetricField, points: &[EvalPoint], h: f64) -> Result<OracleDeviation> {
    let (gamma, riem, ric, tau) = (christoffel(g), riemann(g), ricci(g), scalar_curvature(g));
    let mut out = OracleDeviation::default();
    for p in points {
        let fd = fd_curvature(g, p, h)?;
        out.christoffel = out.christoffel.max(relative(&gamma.eval(p)?, &fd.christoffel));
        out.riemann = out.riemann.max(relative(&riem.eval(p)?, &fd.riemann));
        out.ricci = out.ricci.max(relative(&ric.eval(p)?, &fd.ricci));
        out.scalar = out.scalar.max(relative(&[tau.eval(p)?], &[fd.scalar]));
    }
    Ok(out)
}
