//! Rectangular beam-splitter meshes realising arbitrary unitaries.
//!
//! Every element is the two-port unitary
//!
//! ```text
//! T(θ, φ) = [ e^{iφ} cos θ   −sin θ ]
//!           [ e^{iφ} sin θ    cos θ ]
//! ```
//!
//! acting on adjacent ports `(i, i+1)` with `θ ∈ [0, π/2]` and `φ ∈ [0, 2π)`.
//! A mesh stores its elements in application order, so the realised unitary
//! is `D · T_K ⋯ T_2 T_1` with `D` the diagonal of output phases.
//!
//! The decomposition nulls the lower anti-diagonals of the target alternately
//! from the right (column operations) and from the left (row operations),
//! then commutes the left operations through the residual diagonal.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, unitarity_residual, CMatrix};

/// Input unitarity gate for [`clements_decompose`].
pub const UNITARITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshElement {
    /// Lower port index; the element acts on ports `(port, port + 1)`.
    pub port: usize,
    pub theta: f64,
    pub phi: f64,
}

impl MeshElement {
    fn block(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        let e = Complex64::from_polar(1.0, self.phi);
        [
            [e * c, Complex64::new(-s, 0.0)],
            [e * s, Complex64::new(c, 0.0)],
        ]
    }

    /// The element embedded as an `n × n` unitary.
    pub fn embed(&self, n: usize) -> CMatrix {
        let mut m = CMatrix::identity(n, n);
        let b = self.block();
        let (i, j) = (self.port, self.port + 1);
        m[(i, i)] = b[0][0];
        m[(i, j)] = b[0][1];
        m[(j, i)] = b[1][0];
        m[(j, j)] = b[1][1];
        m
    }

    /// `m ← T m`.
    fn apply_left(&self, m: &mut CMatrix) {
        let b = self.block();
        let (i, j) = (self.port, self.port + 1);
        for col in 0..m.ncols() {
            let (a, c) = (m[(i, col)], m[(j, col)]);
            m[(i, col)] = b[0][0] * a + b[0][1] * c;
            m[(j, col)] = b[1][0] * a + b[1][1] * c;
        }
    }

    /// `m ← m T†`.
    fn apply_right_adjoint(&self, m: &mut CMatrix) {
        let b = self.block();
        let (i, j) = (self.port, self.port + 1);
        for row in 0..m.nrows() {
            let (a, c) = (m[(row, i)], m[(row, j)]);
            m[(row, i)] = a * b[0][0].conj() + c * b[0][1].conj();
            m[(row, j)] = a * b[1][0].conj() + c * b[1][1].conj();
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamSplitterMesh {
    pub dimension: usize,
    pub elements: Vec<MeshElement>,
    pub output_phases: Vec<f64>,
}

impl BeamSplitterMesh {
    pub fn expected_elements(dimension: usize) -> usize {
        dimension * dimension.saturating_sub(1) / 2
    }

    /// Text form: one `port theta phi` line per element, then a line of the
    /// `N` output phases.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.elements {
            let _ = writeln!(out, "{} {:.16e} {:.16e}", e.port, e.theta, e.phi);
        }
        let phases: Vec<String> = self.output_phases.iter().map(|p| format!("{p:.16e}")).collect();
        let _ = writeln!(out, "{}", phases.join(" "));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        let ((last_no, last), body) = lines.split_last().ok_or(Error::Parse {
            line: 1,
            message: "empty mesh file".into(),
        })?;
        let bad = |line: usize, message: String| Error::Parse {
            line: line + 1,
            message,
        };
        let output_phases: Vec<f64> = last
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| bad(*last_no, format!("bad phase `{t}`: {e}"))))
            .collect::<Result<_>>()?;
        let dimension = output_phases.len();
        let mut elements = Vec::with_capacity(body.len());
        for (no, line) in body {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let [p, t, f] = toks[..] else {
                return Err(bad(*no, "element line must be `port theta phi`".into()));
            };
            let port: usize = p.parse().map_err(|e| bad(*no, format!("bad port `{p}`: {e}")))?;
            if port + 1 >= dimension {
                return Err(bad(*no, format!("port {port} out of range for N = {dimension}")));
            }
            let theta = t.parse().map_err(|e| bad(*no, format!("bad theta `{t}`: {e}")))?;
            let phi = f.parse().map_err(|e| bad(*no, format!("bad phi `{f}`: {e}")))?;
            elements.push(MeshElement { port, theta, phi });
        }
        if elements.len() != Self::expected_elements(dimension) {
            return Err(Error::Parse {
                line: *last_no + 1,
                message: format!(
                    "N = {dimension} mesh needs {} elements, found {}",
                    Self::expected_elements(dimension),
                    elements.len()
                ),
            });
        }
        Ok(Self {
            dimension,
            elements,
            output_phases,
        })
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Element nulling `u[row, col]` by `u ← u T†` on columns `(col, col+1)`.
fn right_nulling(u: &CMatrix, row: usize, col: usize) -> MeshElement {
    let a = u[(row, col)];
    let b = u[(row, col + 1)];
    if a.norm() == 0.0 {
        return MeshElement { port: col, theta: 0.0, phi: 0.0 };
    }
    MeshElement {
        port: col,
        theta: a.norm().atan2(b.norm()),
        phi: wrap_phase(a.arg() - b.arg()),
    }
}

/// Element nulling `u[row, col]` by `u ← T u` on rows `(row-1, row)`.
fn left_nulling(u: &CMatrix, row: usize, col: usize) -> MeshElement {
    let a = u[(row - 1, col)];
    let b = u[(row, col)];
    if b.norm() == 0.0 {
        return MeshElement { port: row - 1, theta: 0.0, phi: 0.0 };
    }
    MeshElement {
        port: row - 1,
        theta: b.norm().atan2(a.norm()),
        phi: wrap_phase((-b).arg() - a.arg()),
    }
}

/// Factor the 2×2 unitary `w = diag(a, b) · T(θ, φ)`; returns `(a, b, element)`.
fn factor_diag_left(w: [[Complex64; 2]; 2], port: usize) -> (Complex64, Complex64, MeshElement) {
    let unit = |z: Complex64| {
        let n = z.norm();
        if n > 0.0 {
            z / n
        } else {
            Complex64::new(1.0, 0.0)
        }
    };
    let c = w[1][1].norm().min(1.0);
    let s = w[0][1].norm().min(1.0);
    let theta = s.atan2(c);
    let (a, b, e) = if c >= s {
        let b = unit(w[1][1]);
        let a = if s > 0.0 { unit(-w[0][1]) } else { unit(w[0][0]) };
        (a, b, unit(w[0][0] * a.conj()))
    } else {
        let a = unit(-w[0][1]);
        let b = if c > 0.0 { unit(w[1][1]) } else { unit(w[1][0]) };
        (a, b, unit(w[1][0] * b.conj()))
    };
    let elem = MeshElement {
        port,
        theta: theta.clamp(0.0, FRAC_PI_2),
        phi: wrap_phase(e.arg()),
    };
    (a, b, elem)
}

/// Decompose an `N × N` unitary into a rectangular mesh of `N(N−1)/2`
/// beam-splitters plus output phases.
pub fn clements_decompose(target: &CMatrix) -> Result<BeamSplitterMesh> {
    if !target.is_square() || target.nrows() == 0 {
        return Err(Error::Input(format!(
            "mesh target must be a non-empty square matrix, got {}x{}",
            target.nrows(),
            target.ncols()
        )));
    }
    let residual = unitarity_residual(target);
    if residual.is_nan() || residual > UNITARITY_TOLERANCE {
        return Err(Error::NotUnitary(residual));
    }

    let n = target.nrows();
    let mut u = target.clone();
    let mut right = Vec::new();
    let mut left = Vec::new();

    for i in 0..n.saturating_sub(1) {
        if i % 2 == 0 {
            for j in 0..=i {
                let (row, col) = (n - 1 - j, i - j);
                let e = right_nulling(&u, row, col);
                e.apply_right_adjoint(&mut u);
                right.push(e);
            }
        } else {
            for j in 1..=i + 1 {
                let (row, col) = (n + j - i - 2, j - 1);
                let e = left_nulling(&u, row, col);
                e.apply_left(&mut u);
                left.push(e);
            }
        }
    }

    // u is now the diagonal D with  L_k ⋯ L_1 · target · R_1† ⋯ R_m† = D,
    // so target = L_1† ⋯ L_k† D R_m ⋯ R_1. Push each L† through D.
    let mut diag: Vec<Complex64> = (0..n).map(|k| u[(k, k)]).collect();
    let mut pushed = Vec::with_capacity(left.len());
    for l in left.iter().rev() {
        let (i, j) = (l.port, l.port + 1);
        let b = l.block();
        // L† restricted to the block, times diag(d_i, d_j)
        let w = [
            [b[0][0].conj() * diag[i], b[1][0].conj() * diag[j]],
            [b[0][1].conj() * diag[i], b[1][1].conj() * diag[j]],
        ];
        let (a, bb, e) = factor_diag_left(w, l.port);
        diag[i] = a;
        diag[j] = bb;
        pushed.push(e);
    }

    let mut elements = right;
    elements.extend(pushed);
    let output_phases = diag.iter().map(|d| wrap_phase(d.arg())).collect();
    Ok(BeamSplitterMesh {
        dimension: n,
        elements,
        output_phases,
    })
}

/// Rebuild the unitary realised by a mesh.
pub fn reconstruct(mesh: &BeamSplitterMesh) -> CMatrix {
    let n = mesh.dimension;
    let mut m = CMatrix::identity(n, n);
    for e in &mesh.elements {
        e.apply_left(&mut m);
    }
    for (k, &p) in mesh.output_phases.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, p);
        m.row_mut(k).iter_mut().for_each(|z| *z *= phase);
    }
    m
}

/// Max-entry `|reconstruct(mesh) − target|`.
pub fn reconstruction_residual(mesh: &BeamSplitterMesh, target: &CMatrix) -> f64 {
    max_abs_diff(&reconstruct(mesh), target)
}
