use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::kernel::SmoothingKernel;
use crate::Vect;

/// Smoothed Heaviside volume fraction with half-width `eps`:
/// 0 below `-eps`, 1 above `+eps`, sine-smoothed in between.
pub fn heaviside(phi: f64, eps: f64) -> f64 {
    debug_assert!(eps > 0.0);
    if phi < -eps {
        0.0
    } else if phi > eps {
        1.0
    } else {
        0.5 + 0.5 * phi / eps
            + 0.5 / std::f64::consts::PI * (std::f64::consts::PI * phi / eps).sin()
    }
}

/// Signed-distance samples of one body on a Cartesian background mesh,
/// plus the precomputed static-confinement integrals on a narrow band of
/// cells around the surface.
///
/// Immutable after construction (`build` + `precompute_confinement`); safe
/// to share across worker threads.
#[derive(Debug, Clone)]
pub struct LevelSetField<const D: usize> {
    origin: Vect<D>,
    cell: f64,
    dims: [usize; D],
    strides: [usize; D],
    phi: Vec<f64>,
    band: HashMap<usize, Vect<D>>,
    band_cutoff: f64,
}

impl<const D: usize> LevelSetField<D> {
    /// Sample `shape`'s signed distance at every cell center of a grid with
    /// spacing `l_f` covering `bounds`. The bounds must enclose the shape's
    /// bounding box with a margin of at least `4 l_f` per side.
    pub fn build(shape: &Shape<D>, bounds: (Vect<D>, Vect<D>), l_f: f64) -> Result<Self> {
        if !(l_f > 0.0) || !l_f.is_finite() {
            return Err(Error::ShapeValidation(format!(
                "level-set cell size must be positive, got {l_f}"
            )));
        }
        let (bmin, bmax) = bounds;
        let (smin, smax) = shape.bounding_box();
        let margin = 4.0 * l_f * (1.0 - 1e-12);
        for k in 0..D {
            if smin[k] - bmin[k] < margin || bmax[k] - smax[k] < margin {
                return Err(Error::InsufficientPadding(format!(
                    "axis {k}: bounds [{}, {}] leave less than 4*l_f = {} around the shape \
                     bounding box [{}, {}]",
                    bmin[k],
                    bmax[k],
                    4.0 * l_f,
                    smin[k],
                    smax[k]
                )));
            }
        }

        let mut dims = [0usize; D];
        for k in 0..D {
            dims[k] = (((bmax[k] - bmin[k]) / l_f) - 1e-9).ceil().max(1.0) as usize;
        }
        let strides = strides_of(&dims);
        let total: usize = dims.iter().product();

        let mut field = Self {
            origin: bmin,
            cell: l_f,
            dims,
            strides,
            phi: Vec::new(),
            band: HashMap::new(),
            band_cutoff: 0.0,
        };
        field.phi = (0..total)
            .into_par_iter()
            .map(|i| shape.signed_distance(field.cell_center(i)))
            .collect();
        Ok(field)
    }

    pub fn origin(&self) -> Vect<D> {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn dims(&self) -> [usize; D] {
        self.dims
    }

    pub fn cell_count(&self) -> usize {
        self.phi.len()
    }

    pub fn phi_values(&self) -> &[f64] {
        &self.phi
    }

    pub fn band_len(&self) -> usize {
        self.band.len()
    }

    pub fn band_cutoff(&self) -> f64 {
        self.band_cutoff
    }

    pub fn band_value(&self, linear: usize) -> Option<Vect<D>> {
        self.band.get(&linear).copied()
    }

    pub fn phi_at(&self, linear: usize) -> f64 {
        self.phi[linear]
    }

    pub fn unravel(&self, mut linear: usize) -> [usize; D] {
        let mut ix = [0usize; D];
        for k in (0..D).rev() {
            ix[k] = linear % self.dims[k];
            linear /= self.dims[k];
        }
        ix
    }

    pub fn ravel(&self, ix: &[usize; D]) -> usize {
        let mut linear = 0;
        for k in 0..D {
            linear += ix[k] * self.strides[k];
        }
        linear
    }

    pub fn cell_center(&self, linear: usize) -> Vect<D> {
        let ix = self.unravel(linear);
        Vect::<D>::from_fn(|k, _| self.origin[k] + (ix[k] as f64 + 0.5) * self.cell)
    }

    fn corner_setup(&self, p: Vect<D>) -> Result<([usize; D], [f64; D])> {
        let mut base = [0usize; D];
        let mut frac = [0.0f64; D];
        for k in 0..D {
            let u = (p[k] - self.origin[k]) / self.cell - 0.5;
            let hi = (self.dims[k] - 1) as f64;
            if !(0.0..=hi).contains(&u) {
                return Err(Error::OutOfDomain(p.iter().copied().collect()));
            }
            let b = (u.floor() as usize).min(self.dims[k] - 2);
            base[k] = b;
            frac[k] = u - b as f64;
        }
        Ok((base, frac))
    }

    /// Multilinear interpolation of the cell-center samples; exact at cell
    /// centers and continuous everywhere inside the cell-center hull.
    pub fn interpolate_phi(&self, p: Vect<D>) -> Result<f64> {
        let (base, frac) = self.corner_setup(p)?;
        let mut value = 0.0;
        for corner in 0..(1usize << D) {
            let mut w = 1.0;
            let mut linear = 0;
            for k in 0..D {
                let up = (corner >> k) & 1;
                w *= if up == 1 { frac[k] } else { 1.0 - frac[k] };
                linear += (base[k] + up) * self.strides[k];
            }
            value += w * self.phi[linear];
        }
        Ok(value)
    }

    /// Outward unit normal `grad(phi)/|grad(phi)|` from central differences
    /// of the interpolated field with step `l_f/2`.
    pub fn normal_at(&self, p: Vect<D>) -> Result<Vect<D>> {
        let step = 0.5 * self.cell;
        let mut grad = Vect::<D>::zeros();
        for k in 0..D {
            let mut hi = p;
            let mut lo = p;
            hi[k] += step;
            lo[k] -= step;
            grad[k] = (self.interpolate_phi(hi)? - self.interpolate_phi(lo)?) / (2.0 * step);
        }
        let mag = grad.norm();
        if mag <= 1e-8 {
            return Err(Error::UndefinedNormal(p.iter().copied().collect()));
        }
        Ok(grad / mag)
    }

    /// Precompute the confinement integrals `I(c)` on the narrow band of
    /// cells around the surface: exterior cells within `cutoff + l_f` of it
    /// and interior cells within `cutoff` of it. Each stores the
    /// Heaviside-weighted kernel-gradient sum over exterior cell centers
    /// within the kernel support.
    pub fn precompute_confinement(
        &mut self,
        kernel: &SmoothingKernel<D>,
        eps: f64,
    ) -> Result<()> {
        let cutoff = kernel.cutoff();
        if cutoff < 2.0 * self.cell * (1.0 - 1e-12) {
            return Err(Error::ShapeValidation(format!(
                "kernel cutoff {cutoff} must be at least 2 level-set cells ({})",
                2.0 * self.cell
            )));
        }
        if !(eps > 0.0) {
            return Err(Error::ShapeValidation(format!("heaviside eps must be positive, got {eps}")));
        }

        let reach = (cutoff / self.cell).ceil() as i64;
        let candidates: Vec<usize> = (0..self.phi.len())
            .filter(|&i| -cutoff < self.phi[i] && self.phi[i] < cutoff + self.cell)
            .collect();
        for &i in &candidates {
            let ix = self.unravel(i);
            for k in 0..D {
                if (ix[k] as i64) < reach || ix[k] as i64 + reach >= self.dims[k] as i64 {
                    return Err(Error::BandOverflow(format!(
                        "band cell at {:?} needs {reach} cells of kernel support inside the \
                         field; enlarge the bounds",
                        self.cell_center(i).as_slice()
                    )));
                }
            }
        }

        // The kernel gradient only depends on the cell offset; tabulate the
        // in-support offsets once.
        let mut offsets: Vec<(i64, Vect<D>)> = Vec::new();
        let vol = self.cell.powi(D as i32);
        for_each_offset::<D>(reach, |off| {
            let rvec = Vect::<D>::from_fn(|k, _| -(off[k] as f64) * self.cell);
            let g = kernel.gradient(rvec) * vol;
            if g != Vect::<D>::zeros() {
                let mut dlin = 0i64;
                for k in 0..D {
                    dlin += off[k] * self.strides[k] as i64;
                }
                offsets.push((dlin, g));
            }
        });

        let phi = &self.phi;
        let entries: Vec<(usize, Vect<D>)> = candidates
            .par_iter()
            .map(|&i| {
                let mut acc = Vect::<D>::zeros();
                for &(dlin, g) in &offsets {
                    let j = (i as i64 + dlin) as usize;
                    let phi_j = phi[j];
                    if phi_j > 0.0 {
                        acc += g * heaviside(phi_j, eps);
                    }
                }
                (i, acc)
            })
            .collect();
        self.band = entries.into_iter().collect();
        self.band_cutoff = cutoff;
        Ok(())
    }

    /// Multilinear interpolation of the precomputed confinement integrals;
    /// cells outside the band contribute zero, so the result vanishes deep
    /// in the interior.
    pub fn confinement_gradient(&self, p: Vect<D>) -> Result<Vect<D>> {
        if self.band_cutoff == 0.0 {
            return Err(Error::ShapeValidation("confinement band not precomputed".into()));
        }
        let (base, frac) = self.corner_setup(p)?;
        let mut value = Vect::<D>::zeros();
        for corner in 0..(1usize << D) {
            let mut w = 1.0;
            let mut linear = 0;
            for k in 0..D {
                let up = (corner >> k) & 1;
                w *= if up == 1 { frac[k] } else { 1.0 - frac[k] };
                linear += (base[k] + up) * self.strides[k];
            }
            if let Some(i_vec) = self.band.get(&linear) {
                value += i_vec * w;
            }
        }
        Ok(value)
    }

    /// Count near-surface interior-sample cells whose central-difference
    /// gradient magnitude leaves `[0.8, 1.2]`. Cells within two cells of the
    /// grid edge and cells farther than `phi_band` from the surface are not
    /// checked (medial-axis cells of a true signed-distance field fail the
    /// check by construction).
    pub fn eikonal_violations(&self, phi_band: f64) -> usize {
        let mut violations = 0;
        for i in 0..self.phi.len() {
            if self.phi[i].abs() > phi_band {
                continue;
            }
            let ix = self.unravel(i);
            if (0..D).any(|k| ix[k] < 2 || ix[k] + 2 >= self.dims[k]) {
                continue;
            }
            let mut g2 = 0.0;
            for k in 0..D {
                let d = (self.phi[i + self.strides[k]] - self.phi[i - self.strides[k]])
                    / (2.0 * self.cell);
                g2 += d * d;
            }
            let mag = g2.sqrt();
            if !(0.8..=1.2).contains(&mag) {
                violations += 1;
            }
        }
        violations
    }
}

fn strides_of<const D: usize>(dims: &[usize; D]) -> [usize; D] {
    let mut strides = [1usize; D];
    for k in (0..D.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

fn for_each_offset<const D: usize>(reach: i64, mut f: impl FnMut(&[i64; D])) {
    let mut off = [-reach; D];
    loop {
        f(&off);
        let mut k = 0;
        loop {
            off[k] += 1;
            if off[k] <= reach {
                break;
            }
            off[k] = -reach;
            k += 1;
            if k == D {
                return;
            }
        }
    }
}

/// Interface-consistency scan between the level sets of two bodies that
/// share a surface. At every near-surface cell center of either grid the
/// two fields must carry opposite signs (a point is in exactly one body);
/// cells where both are positive (a gap) or both negative (an overlap) are
/// returned. Cells outside the computational `domain` interior or outside
/// the other field's interpolation hull are skipped.
pub fn sign_disagreement_cells<const D: usize>(
    outer: &LevelSetField<D>,
    inner: &LevelSetField<D>,
    domain: &Shape<D>,
) -> Vec<Vect<D>> {
    let mut cells = Vec::new();
    scan_disagreements(inner, outer, domain, &mut cells);
    scan_disagreements(outer, inner, domain, &mut cells);
    cells
}

fn scan_disagreements<const D: usize>(
    own: &LevelSetField<D>,
    other: &LevelSetField<D>,
    domain: &Shape<D>,
    out: &mut Vec<Vect<D>>,
) {
    let band = 4.0 * own.cell;
    let deadband = 1e-9 * own.cell;
    for i in 0..own.cell_count() {
        let phi_own = own.phi_at(i);
        if phi_own.abs() > band || phi_own.abs() < deadband {
            continue;
        }
        let c = own.cell_center(i);
        if domain.signed_distance(c) >= -own.cell {
            continue;
        }
        let Ok(phi_other) = other.interpolate_phi(c) else {
            continue;
        };
        if phi_other.abs() < deadband {
            continue;
        }
        if phi_own * phi_other > 0.0 {
            out.push(c);
        }
    }
}
