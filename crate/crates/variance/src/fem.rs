use crate::eigendata::{EigenData, MeshNode};
use crate::error::{Error, Result};
use crate::lanczos::{lowest_eigenpairs, EigenOptions};
use hqe_core::geometry::{hyp_distance, DiscPoint, GroupElement};
use hqe_fuchsian::cover::CoverSurface;
use hqe_fuchsian::group::bolza_circumradius;
use serde::{Deserialize, Serialize};
use sprs::{CsMat, TriMat};
use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;

/// Pairing tolerance as a fraction of h.
pub const PAIRING_TOL: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// dx² + dy² on ℝ²/ℤ².
    Flat,
    /// 4|dz|²/(1 − |z|²)².
    Hyperbolic,
}

/// Closed surfaces the solver can mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum FemSurface {
    FlatTorus,
    /// A finite cover of the Bolza surface; degree 1 is the surface itself.
    BolzaCover(CoverSurface),
}

impl FemSurface {
    pub fn id(&self) -> String {
        match self {
            Self::FlatTorus => "flat_torus".into(),
            Self::BolzaCover(c) if c.degree == 1 => "bolza".into(),
            Self::BolzaCover(c) => format!("bolza_cover_d{}_seed{}", c.degree, c.seed),
        }
    }

    pub fn volume(&self) -> Option<f64> {
        match self {
            Self::FlatTorus => Some(1.0),
            Self::BolzaCover(c) => c.volume(),
        }
    }
}

/// Triangulated fundamental domain(s) with paired boundary vertices merged into degrees of freedom.
#[derive(Debug, Clone)]
pub struct FemMesh {
    pub surface_id: String,
    pub metric: Metric,
    pub h: f64,
    /// Chart coordinates of every raw vertex.
    pub vertices: Vec<[f64; 2]>,
    pub sheet: Vec<usize>,
    pub triangles: Vec<[usize; 3]>,
    /// Raw vertex → degree of freedom.
    pub dof: Vec<usize>,
    /// Degree of freedom → a representative raw vertex.
    pub representative: Vec<usize>,
    /// Whether the inverse sheet-gluing convention was needed.
    pub inverse_gluing: bool,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    fn classes(&mut self) -> (Vec<usize>, Vec<usize>) {
        let mut id = HashMap::new();
        let mut dof = Vec::with_capacity(self.0.len());
        let mut rep = Vec::new();
        for v in 0..self.0.len() {
            let r = self.find(v);
            let next = id.len();
            let d = *id.entry(r).or_insert(next);
            if d == rep.len() {
                rep.push(v);
            }
            dof.push(d);
        }
        (dof, rep)
    }
}

impl FemMesh {
    pub fn n_dof(&self) -> usize {
        self.representative.len()
    }

    pub fn dof_point(&self, d: usize) -> [f64; 2] {
        self.vertices[self.representative[d]]
    }

    pub fn dof_sheet(&self, d: usize) -> usize {
        self.sheet[self.representative[d]]
    }

    pub fn build(surface: &FemSurface, h: f64) -> Result<Self> {
        if !(0.01..=0.2).contains(&h) {
            return Err(Error::InvalidInput(format!("h must lie in [0.01, 0.2], got {h}")));
        }
        match surface {
            FemSurface::FlatTorus => Ok(torus_mesh(h)),
            FemSurface::BolzaCover(c) => bolza_mesh(c, h, &surface.id()),
        }
    }

    /// Cotangent stiffness over the degrees of freedom and the lumped mass vector.
    pub fn assemble(&self) -> (CsMat<f64>, Vec<f64>) {
        let n = self.n_dof();
        let mut k = TriMat::new((n, n));
        let mut m = vec![0.0; n];
        for tri in &self.triangles {
            let p = tri.map(|v| self.vertices[v]);
            let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
            for c in 0..3 {
                let (i, j) = ((c + 1) % 3, (c + 2) % 3);
                let e1 = [p[i][0] - p[c][0], p[i][1] - p[c][1]];
                let e2 = [p[j][0] - p[c][0], p[j][1] - p[c][1]];
                let w = 0.5 * (e1[0] * e2[0] + e1[1] * e2[1]) / (e1[0] * e2[1] - e1[1] * e2[0]).abs();
                let (di, dj) = (self.dof[tri[i]], self.dof[tri[j]]);
                k.add_triplet(di, di, w);
                k.add_triplet(dj, dj, w);
                k.add_triplet(di, dj, -w);
                k.add_triplet(dj, di, -w);
            }
            for c in 0..3 {
                let share = match self.metric {
                    Metric::Flat => area / 3.0,
                    Metric::Hyperbolic => {
                        let density = |q: [f64; 2]| {
                            let mid = [0.5 * (p[c][0] + q[0]), 0.5 * (p[c][1] + q[1])];
                            let s = 1.0 - mid[0] * mid[0] - mid[1] * mid[1];
                            4.0 / (s * s)
                        };
                        area / 6.0 * (density(p[(c + 1) % 3]) + density(p[(c + 2) % 3]))
                    }
                };
                m[self.dof[tri[c]]] += share;
            }
        }
        (k.to_csr(), m)
    }
}

/// Unit square cut into right triangles with opposite edges identified.
fn torus_mesh(h: f64) -> FemMesh {
    let n = (1.0 / h).round() as usize;
    let step = 1.0 / n as f64;
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for i in 0..=n {
        for j in 0..=n {
            vertices.push([i as f64 * step, j as f64 * step]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let mut uf = UnionFind::new(vertices.len());
    for t in 0..=n {
        uf.union(idx(0, t), idx(n, t));
        uf.union(idx(t, 0), idx(t, n));
    }
    let (dof, representative) = uf.classes();
    FemMesh {
        surface_id: "flat_torus".into(),
        metric: Metric::Flat,
        h,
        sheet: vec![0; vertices.len()],
        vertices,
        triangles,
        dof,
        representative,
        inverse_gluing: false,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum NodeKey {
    Center,
    /// Layer i on the ray to octagon vertex r.
    Ray(usize, usize),
    /// Sector k, layer i, position j with 0 < j < i.
    Inner(usize, usize, usize),
}

/// One octagon: 8 sectors of n layers. Returns vertices, triangles and, per sector, the
/// outer-side vertices ordered from V_{k−1} to V_k.
fn octagon(n: usize) -> (Vec<[f64; 2]>, Vec<[usize; 3]>, Vec<Vec<usize>>) {
    let rv = bolza_circumradius();
    let vertex = |r: usize| DiscPoint::polar(rv, r as f64 * FRAC_PI_4 + FRAC_PI_4 / 2.0);
    let mut index: HashMap<NodeKey, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut sides = Vec::with_capacity(8);
    for k in 0..8 {
        let (va, vb) = (vertex((k + 7) % 8), vertex(k));
        let g = GroupElement::boost_to(&va);
        let w = g.inverse().apply(&vb);
        let (dir, len) = (w.im.atan2(w.re), hyp_distance(&va, &vb));
        let outer = |s: f64| g.apply(&DiscPoint::polar(s * len, dir));
        let mut node = |i: usize, j: usize| -> usize {
            let key = match (i, j) {
                (0, _) => NodeKey::Center,
                (_, 0) => NodeKey::Ray((k + 7) % 8, i),
                _ if j == i => NodeKey::Ray(k, i),
                _ => NodeKey::Inner(k, i, j),
            };
            *index.entry(key).or_insert_with(|| {
                let p = match key {
                    NodeKey::Center => DiscPoint::origin(),
                    NodeKey::Ray(r, i) => DiscPoint::polar(rv * i as f64 / n as f64, r as f64 * FRAC_PI_4 + FRAC_PI_4 / 2.0),
                    NodeKey::Inner(_, i, j) => {
                        let a = outer(j as f64 / i as f64);
                        let d = hyp_distance(&DiscPoint::origin(), &a);
                        DiscPoint::polar(d * i as f64 / n as f64, a.im.atan2(a.re))
                    }
                };
                vertices.push([p.re, p.im]);
                vertices.len() - 1
            })
        };
        for i in 0..n {
            for j in 0..=i {
                let t = [node(i, j), node(i + 1, j), node(i + 1, j + 1)];
                triangles.push(t);
                if j < i {
                    let t = [node(i, j), node(i + 1, j + 1), node(i, j + 1)];
                    triangles.push(t);
                }
            }
        }
        sides.push((0..=n).map(|j| node(n, j)).collect());
    }
    (vertices, triangles, sides)
}

/// Raw-vertex pairs (on side k, on side k+4) with g_k mapping the second onto the first.
fn side_pairs(cover: &CoverSurface, vertices: &[[f64; 2]], sides: &[Vec<usize>], tol: f64) -> Result<Vec<(usize, usize, usize)>> {
    let mut pairs = Vec::new();
    let mut unmatched = 0;
    for k in 0..4 {
        let g = cover.base.generators[k];
        for &q in &sides[k + 4] {
            let img = g.apply(&DiscPoint { re: vertices[q][0], im: vertices[q][1] });
            let best = sides[k]
                .iter()
                .map(|&p| (p, (vertices[p][0] - img.re).hypot(vertices[p][1] - img.im)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((p, d)) if d <= tol => pairs.push((k, p, q)),
                _ => unmatched += 1,
            }
        }
    }
    if unmatched > 0 {
        return Err(Error::MeshPairingFailure { unmatched, tol });
    }
    Ok(pairs)
}

fn bolza_mesh(cover: &CoverSurface, h: f64, id: &str) -> Result<FemMesh> {
    if cover.base.rank() != 4 || cover.base.label != "bolza" {
        return Err(Error::InvalidInput(format!("the mesher needs a cover of the Bolza group, got {}", cover.base.label)));
    }
    let n = (bolza_circumradius() / (2.0 * h)).ceil() as usize;
    let (base, tris, sides) = octagon(n);
    let tol = PAIRING_TOL * h;
    let pairs = side_pairs(cover, &base, &sides, tol)?;
    let nv = base.len();
    let d = cover.degree;
    let corners: Vec<usize> = sides.iter().flat_map(|s| [s[0], s[s.len() - 1]]).collect();
    let glue = |inverse: bool| -> Option<(Vec<usize>, Vec<usize>)> {
        let mut uf = UnionFind::new(nv * d);
        for &(k, p, q) in &pairs {
            let sigma = &cover.permutations[k];
            for s in 0..d {
                let (sp, sq) = if inverse { (sigma[s], s) } else { (s, sigma[s]) };
                uf.union(p + nv * sp, q + nv * sq);
            }
        }
        let (dof, rep) = uf.classes();
        let mut size = vec![0usize; rep.len()];
        dof.iter().for_each(|&c| size[c] += 1);
        let ok = (0..d).all(|s| corners.iter().all(|&c| size[dof[c + nv * s]] == 8))
            && pairs.iter().all(|&(_, p, q)| corners.contains(&p) || (0..d).all(|s| size[dof[p + nv * s]] == 2 && size[dof[q + nv * s]] == 2));
        ok.then_some((dof, rep))
    };
    let (inverse, (dof, representative)) = match glue(false) {
        Some(c) => (false, c),
        None => (true, glue(true).ok_or(Error::MeshPairingFailure { unmatched: corners.len(), tol })?),
    };
    let mut vertices = Vec::with_capacity(nv * d);
    let mut sheet = Vec::with_capacity(nv * d);
    let mut triangles = Vec::with_capacity(tris.len() * d);
    for s in 0..d {
        vertices.extend_from_slice(&base);
        sheet.extend(std::iter::repeat_n(s, nv));
        triangles.extend(tris.iter().map(|t| t.map(|v| v + nv * s)));
    }
    Ok(FemMesh {
        surface_id: id.to_string(),
        metric: Metric::Hyperbolic,
        h,
        vertices,
        sheet,
        triangles,
        dof,
        representative,
        inverse_gluing: inverse,
    })
}

/// Orthonormality tolerance declared for solver output.
pub const SOLVER_ORTHO_TOL: f64 = 1e-8;

/// Lowest `n_modes` eigenpairs of the discrete Laplace–Beltrami operator on the surface.
pub fn fem_eigensolve(surface: &FemSurface, h: f64, n_modes: usize, opts: EigenOptions) -> Result<EigenData> {
    let mesh = FemMesh::build(surface, h)?;
    solve_mesh(&mesh, surface.volume(), n_modes, opts)
}

pub fn solve_mesh(mesh: &FemMesh, volume: Option<f64>, n_modes: usize, opts: EigenOptions) -> Result<EigenData> {
    let (k, m) = mesh.assemble();
    let pairs = lowest_eigenpairs(&k, &m, n_modes, opts)?;
    let nodes = (0..mesh.n_dof())
        .map(|d| {
            let [x, y] = mesh.dof_point(d);
            MeshNode { x, y, sheet: mesh.dof_sheet(d), weight: m[d] }
        })
        .collect();
    let top = pairs.iter().map(|p| p.nu.abs()).fold(0.0, f64::max);
    Ok(EigenData {
        surface_id: mesh.surface_id.clone(),
        mesh: nodes,
        eigenvalues: pairs.iter().map(|p| p.nu).collect(),
        residuals: pairs.iter().map(|p| p.residual).collect(),
        eigenvectors: pairs.into_iter().map(|p| p.vector).collect(),
        ortho_tol: SOLVER_ORTHO_TOL,
        residual_tol: opts.tol * (1.0 + top),
        volume: volume.unwrap_or_else(|| m.iter().sum()),
    })
}

/// Solves with growing mode counts until the largest eigenvalue exceeds `nu_min`.
pub fn fem_eigensolve_above(surface: &FemSurface, h: f64, nu_min: f64, opts: EigenOptions) -> Result<EigenData> {
    let mesh = FemMesh::build(surface, h)?;
    let volume = surface.volume();
    let area = volume.unwrap_or(1.0);
    let mut n_modes = ((area * nu_min / (4.0 * std::f64::consts::PI)) * 1.3).ceil() as usize + 8;
    loop {
        n_modes = n_modes.min(mesh.n_dof());
        let data = solve_mesh(&mesh, volume, n_modes, opts)?;
        if data.eigenvalues.last().is_some_and(|&v| v > nu_min) || n_modes == mesh.n_dof() {
            return Ok(data);
        }
        n_modes = n_modes * 3 / 2 + 1;
    }
}
