use crate::error::{Error, Result};
use crate::geometry::LevelSetField;
use crate::Vect;

/// Role of a body in a multi-body system. Inner bodies are the solids; the
/// outer body is the fluid domain that surrounds them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyRole {
    InnerSolid,
    OuterFluid,
}

impl BodyRole {
    /// Default smoothing-length multiple of the particle spacing.
    pub fn default_h_factor(self) -> f64 {
        match self {
            BodyRole::InnerSolid => 1.05,
            BodyRole::OuterFluid => 1.3,
        }
    }
}

/// Per-body particle arrays. Masses satisfy `m = rho0 * volume` and volumes
/// are `spacing^D` for every particle.
#[derive(Debug, Clone)]
pub struct ParticleSet<const D: usize> {
    pub body_id: usize,
    pub role: BodyRole,
    pub positions: Vec<Vect<D>>,
    /// Background-pressure accelerations of the current step.
    pub accelerations: Vec<Vect<D>>,
    pub volume: Vec<f64>,
    pub mass: Vec<f64>,
    pub spacing: f64,
    pub smoothing_length: f64,
    pub rho0: f64,
    pub p0: f64,
}

impl<const D: usize> ParticleSet<D> {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn kernel_cutoff(&self) -> f64 {
        2.0 * self.smoothing_length
    }
}

/// Seed particles at the cubic-lattice sites `origin + (i + 1/2) dx` of the
/// field's grid whose interpolated signed distance is strictly negative.
pub fn lattice_seed<const D: usize>(
    field: &LevelSetField<D>,
    dx: f64,
    role: BodyRole,
) -> Result<ParticleSet<D>> {
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(Error::ShapeValidation(format!("particle spacing must be positive, got {dx}")));
    }
    let origin = field.origin();
    let dims = field.dims();
    let cell = field.cell_size();
    let mut counts = [0usize; D];
    for k in 0..D {
        let extent = dims[k] as f64 * cell;
        counts[k] = (extent / dx - 0.5).floor().max(0.0) as usize + 1;
    }

    let mut positions = Vec::new();
    let mut idx = [0usize; D];
    'sites: loop {
        let site = Vect::<D>::from_fn(|k, _| origin[k] + (idx[k] as f64 + 0.5) * dx);
        if let Ok(phi) = field.interpolate_phi(site) {
            if phi < 0.0 {
                positions.push(site);
            }
        }
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == D {
                break 'sites;
            }
        }
    }
    if positions.is_empty() {
        return Err(Error::RegionUnresolved);
    }

    let n = positions.len();
    let vol = dx.powi(D as i32);
    let rho0 = 1.0;
    Ok(ParticleSet {
        body_id: 0,
        role,
        accelerations: vec![Vect::<D>::zeros(); n],
        volume: vec![vol; n],
        mass: vec![rho0 * vol; n],
        positions,
        spacing: dx,
        smoothing_length: role.default_h_factor() * dx,
        rho0,
        p0: 1.0,
    })
}

/// Uniform-grid bucket index over particle positions; the cell size equals
/// the search cutoff so a one-ring scan covers every candidate.
#[derive(Debug, Clone)]
pub struct CellList<const D: usize> {
    cutoff: f64,
    origin: Vect<D>,
    dims: [usize; D],
    buckets: Vec<Vec<u32>>,
}

pub fn build_cell_list<const D: usize>(set: &ParticleSet<D>, cutoff: f64) -> CellList<D> {
    debug_assert!(cutoff >= set.kernel_cutoff() * (1.0 - 1e-12));
    let mut min = set.positions[0];
    let mut max = set.positions[0];
    for p in &set.positions {
        min = min.inf(p);
        max = max.sup(p);
    }
    let mut dims = [1usize; D];
    for k in 0..D {
        dims[k] = ((max[k] - min[k]) / cutoff).floor() as usize + 1;
    }
    let total: usize = dims.iter().product();
    let mut list = CellList { cutoff, origin: min, dims, buckets: vec![Vec::new(); total] };
    for (i, p) in set.positions.iter().enumerate() {
        let b = list.bucket_of(*p);
        list.buckets[b].push(i as u32);
    }
    list
}

impl<const D: usize> CellList<D> {
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    fn cell_coords(&self, p: Vect<D>) -> [i64; D] {
        let mut c = [0i64; D];
        for k in 0..D {
            c[k] = ((p[k] - self.origin[k]) / self.cutoff).floor() as i64;
        }
        c
    }

    fn bucket_of(&self, p: Vect<D>) -> usize {
        let c = self.cell_coords(p);
        let mut linear = 0usize;
        for k in 0..D {
            let v = c[k].clamp(0, self.dims[k] as i64 - 1) as usize;
            linear = linear * self.dims[k] + v;
        }
        linear
    }

    /// Visit every particle within `radius` of `p` (including one at `p`
    /// itself); requires `radius <= cutoff`.
    pub fn for_each_within(
        &self,
        positions: &[Vect<D>],
        p: Vect<D>,
        radius: f64,
        mut f: impl FnMut(usize, Vect<D>, f64),
    ) {
        debug_assert!(radius <= self.cutoff * (1.0 + 1e-12));
        let center = self.cell_coords(p);
        let mut off = [-1i64; D];
        loop {
            let mut linear = 0usize;
            let mut valid = true;
            for k in 0..D {
                let v = center[k].clamp(0, self.dims[k] as i64 - 1) + off[k];
                if v < 0 || v >= self.dims[k] as i64 {
                    valid = false;
                    break;
                }
                linear = linear * self.dims[k] + v as usize;
            }
            if valid {
                for &j in &self.buckets[linear] {
                    let j = j as usize;
                    let rvec = p - positions[j];
                    let r = rvec.norm();
                    if r < radius {
                        f(j, rvec, r);
                    }
                }
            }
            let mut k = 0;
            loop {
                off[k] += 1;
                if off[k] <= 1 {
                    break;
                }
                off[k] = -1;
                k += 1;
                if k == D {
                    return;
                }
            }
        }
    }

    /// Indices of all particles `j != i` with `|r_i - r_j| < cutoff`.
    /// Deterministic for a fixed list; stale after any position update.
    pub fn neighbors_within(&self, set: &ParticleSet<D>, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(&set.positions, set.positions[i], self.cutoff, |j, _, _| {
            if j != i {
                out.push(j);
            }
        });
        out
    }

    /// Particles of this list's body within `radius` of an arbitrary query
    /// point (cross-body search); requires `radius <= cutoff`.
    pub fn cross_neighbors(
        &self,
        set: &ParticleSet<D>,
        p: Vect<D>,
        radius: f64,
    ) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(&set.positions, p, radius, |j, _, _| out.push(j));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use nalgebra::Vector2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field_for(shape: &Shape<2>, pad: f64, l_f: f64) -> LevelSetField<2> {
        let (min, max) = shape.bounding_box();
        LevelSetField::build(
            shape,
            (min - Vector2::repeat(pad), max + Vector2::repeat(pad)),
            l_f,
        )
        .unwrap()
    }

    fn cloud(n: usize, seed: u64) -> ParticleSet<2> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions: Vec<Vector2<f64>> =
            (0..n).map(|_| Vector2::new(rng.gen::<f64>() * 4.0, rng.gen::<f64>() * 4.0)).collect();
        ParticleSet {
            body_id: 0,
            role: BodyRole::OuterFluid,
            accelerations: vec![Vector2::zeros(); n],
            volume: vec![1.0; n],
            mass: vec![1.0; n],
            positions,
            spacing: 0.1,
            smoothing_length: 0.13,
            rho0: 1.0,
            p0: 1.0,
        }
    }

    #[test]
    fn seeds_box_with_half_spacing_offsets() {
        // Padding of exactly 4 cells keeps the lattice aligned with the box.
        let shape = Shape::cuboid(Vector2::new(0.0, 0.0), Vector2::new(1.0, 1.0)).unwrap();
        let field = field_for(&shape, 1.0, 0.25);
        let set = lattice_seed(&field, 0.5, BodyRole::OuterFluid).unwrap();
        let mut got: Vec<(f64, f64)> = set.positions.iter().map(|p| (p.x, p.y)).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, vec![(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)]);
        assert!(set.accelerations.iter().all(|a| *a == Vector2::zeros()));
    }

    #[test]
    fn seeds_full_box_volume() {
        let shape = Shape::cuboid(Vector2::new(0.0, 0.0), Vector2::new(1.0, 1.0)).unwrap();
        let field = field_for(&shape, 0.4, 0.05);
        let set = lattice_seed(&field, 0.1, BodyRole::OuterFluid).unwrap();
        assert_eq!(set.len(), 100);
        let total: f64 = set.volume.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(set.mass.iter().zip(&set.volume).all(|(m, v)| *m == set.rho0 * *v));
    }

    #[test]
    fn unresolvable_region_errors() {
        // Disk radius 0.4 dx centered on a lattice corner: every site is at
        // least dx/sqrt(2) > 0.4 dx away.
        let dx = 0.1;
        let shape = Shape::circle(Vector2::new(0.0, 0.0), 0.4 * dx).unwrap();
        let field = LevelSetField::build(
            &shape,
            (Vector2::new(-2.0 * dx, -2.0 * dx), Vector2::new(2.0 * dx, 2.0 * dx)),
            dx / 4.0,
        )
        .unwrap();
        assert!(matches!(
            lattice_seed(&field, dx, BodyRole::InnerSolid),
            Err(Error::RegionUnresolved)
        ));
    }

    #[test]
    fn single_particle_and_far_pair() {
        let mut set = cloud(1, 1);
        set.positions[0] = Vector2::new(0.5, 0.5);
        let list = build_cell_list(&set, 0.3);
        assert!(list.neighbors_within(&set, 0).is_empty());

        let mut pair = cloud(2, 2);
        pair.positions[0] = Vector2::new(0.0, 0.0);
        pair.positions[1] = Vector2::new(0.63, 0.0); // 2.1 x cutoff
        let list = build_cell_list(&pair, 0.3);
        assert!(list.neighbors_within(&pair, 0).is_empty());
        assert!(list.neighbors_within(&pair, 1).is_empty());
    }

    fn brute_neighbors(set: &ParticleSet<2>, i: usize, cutoff: f64) -> Vec<usize> {
        (0..set.len())
            .filter(|&j| j != i && (set.positions[i] - set.positions[j]).norm() < cutoff)
            .collect()
    }

    #[test]
    fn matches_brute_force_on_random_cloud() {
        let set = cloud(500, 42);
        let cutoff = 0.35;
        let list = build_cell_list(&set, cutoff);
        for i in 0..set.len() {
            let mut got = list.neighbors_within(&set, i);
            got.sort_unstable();
            assert_eq!(got, brute_neighbors(&set, i, cutoff), "particle {i}");
        }
    }

    #[test]
    fn neighbor_symmetry_and_determinism() {
        let set = cloud(200, 7);
        let list = build_cell_list(&set, 0.4);
        for i in 0..set.len() {
            for j in list.neighbors_within(&set, i) {
                assert!(list.neighbors_within(&set, j).contains(&i));
            }
        }
        let again = build_cell_list(&set, 0.4);
        for i in 0..set.len() {
            assert_eq!(list.neighbors_within(&set, i), again.neighbors_within(&set, i));
        }
    }

    #[test]
    fn cross_neighbors_against_brute_force() {
        let set = cloud(300, 11);
        let cutoff = 0.3;
        let list = build_cell_list(&set, cutoff);
        assert!(list.cross_neighbors(&set, Vector2::new(50.0, 50.0), cutoff).is_empty());
        let on_top = set.positions[17];
        assert!(list.cross_neighbors(&set, on_top, cutoff).contains(&17));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let q = Vector2::new(rng.gen::<f64>() * 5.0 - 0.5, rng.gen::<f64>() * 5.0 - 0.5);
            let mut got = list.cross_neighbors(&set, q, cutoff);
            got.sort_unstable();
            let want: Vec<usize> = (0..set.len())
                .filter(|&j| (q - set.positions[j]).norm() < cutoff)
                .collect();
            assert_eq!(got, want);
        }
    }
}
