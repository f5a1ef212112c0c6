//! Differential and singular-integral operators as Fourier multipliers.
//!
//! Conventions at `xi = 0`: inverse-Laplacian-type symbols vanish, the Leray
//! projector passes the mode through, the heat semigroup keeps it.

use rustfft::num_complex::Complex64;

use super::fft::Spectrum;
use super::multiplier::Wavevectors;
use crate::error::{Error, Result};
use crate::field::{ScalarField, TensorField, VectorField};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub fn spectra(u: &VectorField) -> Vec<Spectrum> {
    u.components().iter().map(Spectrum::forward).collect()
}

pub fn from_spectra(s: &[Spectrum]) -> VectorField {
    VectorField::new(s.iter().map(Spectrum::inverse).collect()).expect("spectra share one grid")
}

fn filtered(f: &ScalarField, m: impl Fn([f64; 3], Complex64) -> Complex64 + Sync) -> ScalarField {
    let mut s = Spectrum::forward(f);
    let wv = Wavevectors::new(f.grid());
    s.map_modes(|i, c| m(wv.xi(i), c));
    s.inverse()
}

fn check_axis(axis: usize, dim: usize) -> Result<()> {
    if axis >= dim {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range for dimension {dim}")));
    }
    Ok(())
}

fn norm2(xi: [f64; 3]) -> f64 {
    xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
}

/// Symbol `-|xi|^2`.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    filtered(f, |xi, c| c * -norm2(xi))
}

/// Symbol `i xi_axis`.
pub fn partial(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    check_axis(axis, f.grid().dim())?;
    Ok(filtered(f, |xi, c| c * I * xi[axis]))
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let s = Spectrum::forward(f);
    let wv = Wavevectors::new(f.grid());
    let comps = (0..f.grid().dim())
        .map(|d| {
            let mut sd = s.clone();
            sd.map_modes(|i, c| c * I * wv.xi(i)[d]);
            sd.inverse()
        })
        .collect();
    VectorField::new(comps).expect("components share one grid")
}

pub fn divergence(u: &VectorField) -> ScalarField {
    let grid = *u.grid();
    let wv = Wavevectors::new(&grid);
    let mut acc = Spectrum::zeros(grid);
    for (d, c) in u.components().iter().enumerate() {
        let s = Spectrum::forward(c);
        let src = s.data();
        acc.map_modes(|i, a| a + src[i] * I * wv.xi(i)[d]);
    }
    acc.inverse()
}

/// Row divergence `(div F)_i = sum_j d_j F_ij`.
pub fn tensor_divergence(f: &TensorField) -> VectorField {
    let grid = *f.grid();
    let d = f.dim();
    let wv = Wavevectors::new(&grid);
    let comps = (0..d)
        .map(|i| {
            let mut acc = Spectrum::zeros(grid);
            for j in 0..d {
                let s = Spectrum::forward(f.get(i, j));
                let src = s.data();
                acc.map_modes(|m, a| a + src[m] * I * wv.xi(m)[j]);
            }
            acc.inverse()
        })
        .collect();
    VectorField::new(comps).expect("components share one grid")
}

pub fn curl(u: &VectorField) -> Result<VectorField> {
    if u.dim() != 3 {
        return Err(Error::InvalidParameter("curl needs a three-dimensional field".into()));
    }
    let s = spectra(u);
    let wv = Wavevectors::new(u.grid());
    let comps = (0..3)
        .map(|c| {
            let (a, b) = ((c + 1) % 3, (c + 2) % 3);
            let mut out = Spectrum::zeros(*u.grid());
            let (sa, sb) = (s[a].data(), s[b].data());
            // (curl u)_c = d_a u_b - d_b u_a
            out.map_modes(|i, _| {
                let xi = wv.xi(i);
                I * (sb[i] * xi[a] - sa[i] * xi[b])
            });
            out.inverse()
        })
        .collect();
    VectorField::new(comps)
}

/// All second derivatives `d_i d_j f`, row-major.
pub fn hessian(f: &ScalarField) -> TensorField {
    let d = f.grid().dim();
    let s = Spectrum::forward(f);
    let wv = Wavevectors::new(f.grid());
    let mut comps: Vec<Option<ScalarField>> = vec![None; d * d];
    for i in 0..d {
        for j in i..d {
            let mut sij = s.clone();
            sij.map_modes(|m, c| {
                let xi = wv.xi(m);
                c * -(xi[i] * xi[j])
            });
            let field = sij.inverse();
            comps[j * d + i] = Some(field.clone());
            comps[i * d + j] = Some(field);
        }
    }
    TensorField::new(comps.into_iter().map(|c| c.expect("filled above")).collect()).expect("square tensor")
}

fn check_heat_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "heat semigroup is only defined forward in time, got t = {t}"
        )));
    }
    Ok(())
}

/// `e^{t Δ}`, symbol `e^{-t |xi|^2}`; `t < 0` is rejected.
pub fn heat(f: &ScalarField, t: f64) -> Result<ScalarField> {
    check_heat_time(t)?;
    Ok(filtered(f, |xi, c| c * (-t * norm2(xi)).exp()))
}

pub fn heat_vector(u: &VectorField, t: f64) -> Result<VectorField> {
    check_heat_time(t)?;
    VectorField::new(u.components().iter().map(|c| heat(c, t)).collect::<Result<_>>()?)
}

/// Applies `I - xi xi^T / |xi|^2` to a set of component spectra in place.
pub fn leray_in_place(s: &mut [Spectrum]) {
    let d = s.len();
    let grid = *s[0].grid();
    let wv = Wavevectors::new(&grid);
    let len = s[0].data().len();
    for i in 0..len {
        let xi = wv.xi(i);
        let k2 = norm2(xi);
        if k2 == 0.0 {
            continue;
        }
        let mut dot = ZERO;
        for (c, sc) in s.iter().enumerate() {
            dot += sc.data()[i] * xi[c];
        }
        let dot = dot / k2;
        for (c, sc) in s.iter_mut().enumerate().take(d) {
            sc.data_mut()[i] -= dot * xi[c];
        }
    }
}

pub fn leray(u: &VectorField) -> VectorField {
    let mut s = spectra(u);
    leray_in_place(&mut s);
    from_spectra(&s)
}

/// `(-Δ)^{-1} d_i d_j`, symbol `xi_i xi_j / |xi|^2`, zero at `xi = 0`.
pub fn riesz_second(i: usize, j: usize, f: &ScalarField) -> Result<ScalarField> {
    check_axis(i, f.grid().dim())?;
    check_axis(j, f.grid().dim())?;
    Ok(filtered(f, |xi, c| {
        let k2 = norm2(xi);
        if k2 == 0.0 {
            ZERO
        } else {
            c * (xi[i] * xi[j] / k2)
        }
    }))
}

/// `(-Δ)^{-1}`, symbol `1 / |xi|^2`, zero at `xi = 0`.
pub fn inverse_neg_laplacian(f: &ScalarField) -> ScalarField {
    filtered(f, |xi, c| {
        let k2 = norm2(xi);
        if k2 == 0.0 {
            ZERO
        } else {
            c / k2
        }
    })
}

/// `∇(-Δ)^{-1} ∇·(∇·F)`, symbol `-i xi_i xi_j xi_l / |xi|^2` acting on `F_jl`.
pub fn cz_divergence(f: &TensorField) -> VectorField {
    let d = f.dim();
    let grid = *f.grid();
    let wv = Wavevectors::new(&grid);
    // contracted = sum_jl xi_j xi_l F_jl / |xi|^2
    let mut contracted = Spectrum::zeros(grid);
    for j in 0..d {
        for l in 0..d {
            let s = Spectrum::forward(f.get(j, l));
            let src = s.data();
            contracted.map_modes(|m, a| {
                let xi = wv.xi(m);
                let k2 = norm2(xi);
                if k2 == 0.0 {
                    ZERO
                } else {
                    a + src[m] * (xi[j] * xi[l] / k2)
                }
            });
        }
    }
    let comps = (0..d)
        .map(|i| {
            let mut out = contracted.clone();
            out.map_modes(|m, c| c * -I * wv.xi(m)[i]);
            out.inverse()
        })
        .collect();
    VectorField::new(comps).expect("components share one grid")
}

/// `∇p` with `p = (-Δ)^{-1}(d_i d_j (u_i u_j) - ∇·f)` and `f = ∇·F`.
pub fn pressure_gradient(u: &VectorField, forcing: Option<&TensorField>) -> Result<VectorField> {
    let mut t = TensorField::outer(u, u)?;
    if let Some(big_f) = forcing {
        if big_f.grid() != u.grid() || big_f.dim() != u.dim() {
            return Err(Error::ShapeMismatch("forcing potential and velocity differ in shape".into()));
        }
        t = t.sub(big_f)?;
    }
    Ok(cz_divergence(&t))
}

/// Discrete L² pairing evaluated on the spectral side.
pub fn spectral_inner(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::ShapeMismatch("fields on different grids".into()));
    }
    Ok(Spectrum::forward(f).pairing(&Spectrum::forward(g)))
}
