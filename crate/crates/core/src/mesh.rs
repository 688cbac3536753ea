//! Simplicial meshes: triangles in 2D, tetrahedra in 3D.
//!
//! A [`SimplicialMesh`] is validated on construction: indices in range, no
//! degenerate cells (cells are reoriented to positive signed measure),
//! conforming facet sharing and boundary faces covering the hull exactly once.
//! Meshes are immutable afterwards.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Matrix2, Matrix3};

use crate::{Error, Point, Result};

/// Relative degeneracy threshold: a cell is rejected when its measure is
/// below `DEGENERACY_TOL * diam^dim`, `diam` the bounding-box diagonal.
pub const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Dirichlet,
    /// Neumann part with `b . n > 0`; carries the flux datum `g`.
    NeumannIn,
    /// Neumann part with `b . n <= 0`; contributes `-int b.n u v`.
    NeumannOut,
}

impl BoundaryTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::Dirichlet => "dirichlet",
            BoundaryTag::NeumannIn => "neumann_in",
            BoundaryTag::NeumannOut => "neumann_out",
        }
    }
}

impl FromStr for BoundaryTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dirichlet" => Ok(BoundaryTag::Dirichlet),
            "neumann_in" => Ok(BoundaryTag::NeumannIn),
            "neumann_out" => Ok(BoundaryTag::NeumannOut),
            other => Err(format!("unknown boundary tag `{other}`")),
        }
    }
}

/// Axis-aligned box `[lo, hi]` used by the structured generators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Domain {
    pub fn unit() -> Self {
        Domain {
            lo: [0.0; 3],
            hi: [1.0; 3],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialMesh {
    dim: usize,
    vertices: Vec<Point>,
    /// Flat, `dim + 1` indices per cell.
    cells: Vec<usize>,
    /// Flat, `dim` indices per boundary face.
    faces: Vec<usize>,
    tags: Vec<BoundaryTag>,
    /// Cell owning each boundary face.
    face_cell: Vec<usize>,
}

/// Geometric data of one boundary face.
#[derive(Clone, Debug)]
pub struct FaceInfo<'a> {
    pub index: usize,
    pub vertices: &'a [usize],
    pub tag: BoundaryTag,
    pub barycenter: Point,
    /// Unit outward normal.
    pub normal: Point,
    pub measure: f64,
}

/// An undirected edge `(lo, hi)` with `lo < hi` and the cells containing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalEdge {
    pub lo: usize,
    pub hi: usize,
    pub cells: Vec<usize>,
}

fn sorted_key(ix: &[usize]) -> [usize; 3] {
    let mut k = [usize::MAX; 3];
    k[..ix.len()].copy_from_slice(ix);
    k[..ix.len()].sort_unstable();
    k
}

fn signed_measure(dim: usize, q: &[Point]) -> f64 {
    if dim == 2 {
        let m = Matrix2::new(
            q[1][0] - q[0][0],
            q[2][0] - q[0][0],
            q[1][1] - q[0][1],
            q[2][1] - q[0][1],
        );
        m.determinant() / 2.0
    } else {
        let m = Matrix3::from_columns(&[q[1] - q[0], q[2] - q[0], q[3] - q[0]]);
        m.determinant() / 6.0
    }
}

fn bounding_diameter(vertices: &[Point]) -> f64 {
    if vertices.is_empty() {
        return 0.0;
    }
    let mut lo = vertices[0];
    let mut hi = vertices[0];
    for v in vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (hi - lo).norm()
}

impl SimplicialMesh {
    /// Builds and validates a mesh. `cells` holds `dim + 1` vertex indices
    /// per entry, `boundary` holds `dim` indices per face plus its tag.
    pub fn new(
        dim: usize,
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        boundary: Vec<(Vec<usize>, BoundaryTag)>,
    ) -> Result<Self> {
        check_dim(dim)?;
        let mut flat_cells = Vec::with_capacity(cells.len() * (dim + 1));
        for (k, c) in cells.iter().enumerate() {
            if c.len() != dim + 1 {
                return Err(Error::InvalidMesh(format!(
                    "cell {k} has {} vertices, expected {}",
                    c.len(),
                    dim + 1
                )));
            }
            flat_cells.extend_from_slice(c);
        }
        let mut faces = Vec::with_capacity(boundary.len() * dim);
        let mut tags = Vec::with_capacity(boundary.len());
        for (k, (f, t)) in boundary.iter().enumerate() {
            if f.len() != dim {
                return Err(Error::InvalidMesh(format!(
                    "boundary face {k} has {} vertices, expected {dim}",
                    f.len()
                )));
            }
            faces.extend_from_slice(f);
            tags.push(*t);
        }
        Self::from_flat(dim, vertices, flat_cells, faces, tags)
    }

    /// Builds a mesh whose boundary faces are all hull facets, each tagged
    /// `tag`, in order of first appearance.
    pub fn with_hull_boundary(
        dim: usize,
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        tag: BoundaryTag,
    ) -> Result<Self> {
        check_dim(dim)?;
        let hull = hull_facets(dim, cells.iter().map(|c| c.as_slice()));
        let boundary = hull.into_iter().map(|f| (f, tag)).collect();
        Self::new(dim, vertices, cells, boundary)
    }

    fn from_flat(
        dim: usize,
        mut vertices: Vec<Point>,
        mut cells: Vec<usize>,
        faces: Vec<usize>,
        tags: Vec<BoundaryTag>,
    ) -> Result<Self> {
        let nv = vertices.len();
        if dim == 2 {
            for v in vertices.iter_mut() {
                v[2] = 0.0;
            }
        }
        if let Some(bad) = cells.iter().chain(faces.iter()).find(|&&i| i >= nv) {
            return Err(Error::InvalidMesh(format!(
                "vertex index {bad} out of range (mesh has {nv} vertices)"
            )));
        }
        if vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh("non-finite vertex coordinate".into()));
        }
        let nc = cells.len() / (dim + 1);
        if nc == 0 {
            return Err(Error::InvalidMesh("mesh has no cells".into()));
        }

        // orientation and degeneracy
        let threshold = DEGENERACY_TOL * bounding_diameter(&vertices).powi(dim as i32);
        for k in 0..nc {
            let c = &mut cells[k * (dim + 1)..(k + 1) * (dim + 1)];
            let q: Vec<Point> = c.iter().map(|&i| vertices[i]).collect();
            let m = signed_measure(dim, &q);
            if !(m.abs() > threshold) {
                return Err(Error::DegenerateElement {
                    cell: k,
                    measure: m.abs(),
                    threshold,
                });
            }
            if m < 0.0 {
                c.swap(dim - 1, dim);
            }
        }

        // facet incidence
        let mut facet_cells: HashMap<[usize; 3], Vec<usize>> = HashMap::new();
        for k in 0..nc {
            let c = &cells[k * (dim + 1)..(k + 1) * (dim + 1)];
            for skip in 0..=dim {
                let f: Vec<usize> = (0..=dim).filter(|&l| l != skip).map(|l| c[l]).collect();
                facet_cells.entry(sorted_key(&f)).or_default().push(k);
            }
        }
        if let Some((f, cs)) = facet_cells.iter().find(|(_, cs)| cs.len() > 2) {
            return Err(Error::InvalidMesh(format!(
                "facet {:?} shared by {} cells",
                &f[..dim],
                cs.len()
            )));
        }

        let nbf = tags.len();
        let mut seen: HashMap<[usize; 3], usize> = HashMap::new();
        let mut face_cell = Vec::with_capacity(nbf);
        for k in 0..nbf {
            let f = &faces[k * dim..(k + 1) * dim];
            let key = sorted_key(f);
            if let Some(prev) = seen.insert(key, k) {
                return Err(Error::InvalidMesh(format!(
                    "boundary faces {prev} and {k} coincide"
                )));
            }
            match facet_cells.get(&key) {
                Some(cs) if cs.len() == 1 => face_cell.push(cs[0]),
                Some(_) => {
                    return Err(Error::InvalidMesh(format!(
                        "boundary face {k} {f:?} is an interior facet"
                    )))
                }
                None => {
                    return Err(Error::InvalidMesh(format!(
                        "boundary face {k} {f:?} is not a facet of any cell"
                    )))
                }
            }
        }
        let mut uncovered: Vec<[usize; 3]> = facet_cells
            .iter()
            .filter(|(key, cs)| cs.len() == 1 && !seen.contains_key(*key))
            .map(|(key, _)| *key)
            .collect();
        uncovered.sort_unstable();
        if let Some(f) = uncovered.first() {
            return Err(Error::BoundaryNotCovered(f[..dim].to_vec()));
        }

        Ok(SimplicialMesh {
            dim,
            vertices,
            cells,
            faces,
            tags,
            face_cell,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.tags.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i]
    }

    pub fn cell(&self, k: usize) -> &[usize] {
        let s = self.dim + 1;
        &self.cells[k * s..(k + 1) * s]
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.cells.chunks_exact(self.dim + 1)
    }

    pub fn face(&self, k: usize) -> &[usize] {
        &self.faces[k * self.dim..(k + 1) * self.dim]
    }

    pub fn face_tag(&self, k: usize) -> BoundaryTag {
        self.tags[k]
    }

    /// Vertices of the `k`-th cell.
    pub fn cell_points(&self, k: usize) -> Vec<Point> {
        self.cell(k).iter().map(|&i| self.vertices[i]).collect()
    }

    /// Barycenter, outward unit normal and measure of boundary face `k`.
    pub fn face_info(&self, k: usize) -> FaceInfo<'_> {
        let f = self.face(k);
        let q: Vec<Point> = f.iter().map(|&i| self.vertices[i]).collect();
        let barycenter = q.iter().sum::<Point>() / self.dim as f64;
        let (mut normal, measure) = if self.dim == 2 {
            let t = q[1] - q[0];
            (Point::new(t[1], -t[0], 0.0), t.norm())
        } else {
            let n = (q[1] - q[0]).cross(&(q[2] - q[0]));
            let a = n.norm();
            (n, 0.5 * a)
        };
        normal /= normal.norm();
        let cell = self.cell(self.face_cell[k]);
        let opposite = cell.iter().find(|i| !f.contains(i)).copied().unwrap();
        if (self.vertices[opposite] - q[0]).dot(&normal) > 0.0 {
            normal = -normal;
        }
        FaceInfo {
            index: k,
            vertices: f,
            tag: self.tags[k],
            barycenter,
            normal,
            measure,
        }
    }

    /// Vertices lying on at least one Dirichlet face.
    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_vertices()];
        for k in 0..self.n_boundary_faces() {
            if self.tags[k] == BoundaryTag::Dirichlet {
                for &i in self.face(k) {
                    mask[i] = true;
                }
            }
        }
        mask
    }

    /// Returns a copy with every boundary tag replaced by `rule(face)`.
    pub fn retag_boundary<F>(&self, rule: F) -> SimplicialMesh
    where
        F: Fn(&FaceInfo<'_>) -> BoundaryTag,
    {
        let tags = (0..self.n_boundary_faces())
            .map(|k| rule(&self.face_info(k)))
            .collect();
        SimplicialMesh {
            tags,
            ..self.clone()
        }
    }

    /// Indices of faces whose tag disagrees with the sign of `b . n` at the
    /// face barycenter (`NeumannIn` needs `b.n > 0`, `NeumannOut` needs
    /// `b.n <= 0`). Dirichlet faces are never reported.
    pub fn flow_tag_violations<B>(&self, b: B) -> Vec<usize>
    where
        B: Fn(&Point) -> Point,
    {
        (0..self.n_boundary_faces())
            .filter(|&k| {
                let fi = self.face_info(k);
                let bn = b(&fi.barycenter).dot(&fi.normal);
                match fi.tag {
                    BoundaryTag::Dirichlet => false,
                    BoundaryTag::NeumannIn => !(bn > 0.0),
                    BoundaryTag::NeumannOut => bn > 0.0,
                }
            })
            .collect()
    }

    /// Geometry (measure, barycentric gradients, local edges) of cell `k`.
    pub fn element_geometry(&self, k: usize) -> Result<ElementGeometry> {
        if k >= self.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "cell index {k} out of range ({} cells)",
                self.n_cells()
            )));
        }
        let scale = bounding_diameter(&self.vertices);
        ElementGeometry::from_vertices(self.dim, &self.cell_points(k), k, scale)
    }

    /// Maximum cell diameter (longest edge).
    pub fn max_diameter(&self) -> f64 {
        self.cells()
            .map(|c| {
                let mut d: f64 = 0.0;
                for a in 0..c.len() {
                    for b in a + 1..c.len() {
                        d = d.max((self.vertices[c[a]] - self.vertices[c[b]]).norm());
                    }
                }
                d
            })
            .fold(0.0, f64::max)
    }

    /// Every undirected edge once, ordered by `(lo, hi)`, with its cells.
    pub fn edge_list(&self) -> Vec<GlobalEdge> {
        let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (k, c) in self.cells().enumerate() {
            for a in 0..c.len() {
                for b in a + 1..c.len() {
                    let key = (c[a].min(c[b]), c[a].max(c[b]));
                    map.entry(key).or_default().push(k);
                }
            }
        }
        map.into_iter()
            .map(|((lo, hi), cells)| GlobalEdge { lo, hi, cells })
            .collect()
    }

    /// Number of facets shared by two cells.
    pub fn n_interior_facets(&self) -> usize {
        (self.n_cells() * (self.dim + 1) - self.n_boundary_faces()) / 2
    }

    /// Serializes to the plain-text mesh format (1-based indices).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let d = self.dim;
        writeln!(
            s,
            "{} {} {} {}",
            d,
            self.n_vertices(),
            self.n_cells(),
            self.n_boundary_faces()
        )
        .unwrap();
        for v in &self.vertices {
            let coords: Vec<String> = (0..d).map(|i| format!("{}", v[i])).collect();
            writeln!(s, "{}", coords.join(" ")).unwrap();
        }
        for c in self.cells() {
            let ix: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            writeln!(s, "{}", ix.join(" ")).unwrap();
        }
        for k in 0..self.n_boundary_faces() {
            let ix: Vec<String> = self.face(k).iter().map(|i| (i + 1).to_string()).collect();
            writeln!(s, "{} {}", ix.join(" "), self.tags[k].as_str()).unwrap();
        }
        s
    }

    /// Parses the plain-text mesh format. Blank lines and lines starting
    /// with `#` are skipped; errors carry 1-based line numbers.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let perr = |line: usize, message: String| Error::Parse { line, message };

        let (hl, header) = lines
            .next()
            .ok_or_else(|| perr(1, "empty mesh file".into()))?;
        let h: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| perr(hl, format!("malformed header: {e}")))?;
        if h.len() != 4 {
            return Err(perr(hl, "malformed header: expected `dim nv nc nbf`".into()));
        }
        let (dim, nv, nc, nbf) = (h[0], h[1], h[2], h[3]);
        if !(dim == 2 || dim == 3) {
            return Err(perr(hl, format!("malformed header: dim {dim} not in {{2, 3}}")));
        }

        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| perr(0, format!("unexpected end of file while reading {what}")))
        };

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = next("vertices")?;
            let xs: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| perr(ln, format!("bad coordinate: {e}")))?;
            if xs.len() != dim {
                return Err(perr(ln, format!("expected {dim} coordinates, got {}", xs.len())));
            }
            let mut p = Point::zeros();
            for (i, x) in xs.into_iter().enumerate() {
                p[i] = x;
            }
            vertices.push(p);
        }

        let parse_indices = |ln: usize, toks: &[&str]| -> Result<Vec<usize>> {
            toks.iter()
                .map(|t| {
                    let i: usize = t
                        .parse()
                        .map_err(|e| perr(ln, format!("bad index `{t}`: {e}")))?;
                    if i == 0 || i > nv {
                        return Err(perr(
                            ln,
                            format!("vertex index {i} out of range 1..={nv}"),
                        ));
                    }
                    Ok(i - 1)
                })
                .collect()
        };

        let mut cells = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (ln, l) = next("cells")?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != dim + 1 {
                return Err(perr(ln, format!("expected {} cell indices", dim + 1)));
            }
            cells.push(parse_indices(ln, &toks)?);
        }

        let mut boundary = Vec::with_capacity(nbf);
        for _ in 0..nbf {
            let (ln, l) = next("boundary faces")?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != dim + 1 {
                return Err(perr(ln, format!("expected {dim} face indices and a tag")));
            }
            let ix = parse_indices(ln, &toks[..dim])?;
            let tag = toks[dim].parse::<BoundaryTag>().map_err(|e| perr(ln, e))?;
            boundary.push((ix, tag));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(perr(ln, "trailing data after boundary faces".into()));
        }

        SimplicialMesh::new(dim, vertices, cells, boundary)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("dimension {dim} not in {{2, 3}}")))
    }
}

/// Facets belonging to exactly one cell, in order of first appearance.
fn hull_facets<'a>(dim: usize, cells: impl Iterator<Item = &'a [usize]>) -> Vec<Vec<usize>> {
    let mut order: Vec<(Vec<usize>, [usize; 3])> = Vec::new();
    let mut count: HashMap<[usize; 3], usize> = HashMap::new();
    for c in cells {
        for skip in 0..=dim {
            let f: Vec<usize> = (0..=dim).filter(|&l| l != skip).map(|l| c[l]).collect();
            let key = sorted_key(&f);
            let n = count.entry(key).or_insert(0);
            if *n == 0 {
                order.push((f, key));
            }
            *n += 1;
        }
    }
    order
        .into_iter()
        .filter(|(_, key)| count[key] == 1)
        .map(|(f, _)| f)
        .collect()
}

/// Reads a mesh in the plain-text format.
pub fn read_mesh(path: impl AsRef<Path>) -> Result<SimplicialMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    SimplicialMesh::from_text(&text).map_err(|e| e.context(path.display().to_string()))
}

pub fn write_mesh(mesh: &SimplicialMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, mesh.to_text()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Structured mesh of an axis-aligned box with `n` subdivisions per axis.
///
/// In 2D each sub-square is cut along its `(0,0)-(1,1)` diagonal; in 3D each
/// sub-cube is split into the six Kuhn tetrahedra sharing its main diagonal.
/// All boundary faces are tagged Dirichlet.
pub fn generate_structured(dim: usize, n: usize, domain: Domain) -> Result<SimplicialMesh> {
    check_dim(dim)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if (0..dim).any(|a| !(domain.hi[a] > domain.lo[a])) {
        return Err(Error::InvalidArgument("box must have positive side lengths".into()));
    }
    let m = n + 1;
    let coord = |a: usize, i: usize| {
        domain.lo[a] + (domain.hi[a] - domain.lo[a]) * (i as f64 / n as f64)
    };
    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    if dim == 2 {
        for j in 0..m {
            for i in 0..m {
                vertices.push(Point::new(coord(0, i), coord(1, j), 0.0));
            }
        }
        let id = |i: usize, j: usize| j * m + i;
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
                cells.push(vec![v00, v10, v11]);
                cells.push(vec![v00, v11, v01]);
            }
        }
    } else {
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    vertices.push(Point::new(coord(0, i), coord(1, j), coord(2, k)));
                }
            }
        }
        let id = |i: usize, j: usize, k: usize| (k * m + j) * m + i;
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for p in PERMS {
                        let mut c = [i, j, k];
                        let mut tet = vec![id(c[0], c[1], c[2])];
                        for axis in p {
                            c[axis] += 1;
                            tet.push(id(c[0], c[1], c[2]));
                        }
                        cells.push(tet);
                    }
                }
            }
        }
    }
    SimplicialMesh::with_hull_boundary(dim, vertices, cells, BoundaryTag::Dirichlet)
}

/// A local edge `(i, j)`, `i < j` in local order, with `tau = q_i - q_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalEdge {
    pub i: usize,
    pub j: usize,
    pub tau: Point,
}

/// Affine data of one simplex.
#[derive(Clone, Debug)]
pub struct ElementGeometry {
    pub cell: usize,
    pub dim: usize,
    pub measure: f64,
    vertices: [Point; 4],
    grad_lambda: [Point; 4],
    edges: [LocalEdge; 6],
}

impl ElementGeometry {
    /// Geometry of the simplex spanned by `q` (`dim + 1` points). `scale` is
    /// the length scale for the degeneracy test.
    pub fn from_vertices(dim: usize, q: &[Point], cell: usize, scale: f64) -> Result<Self> {
        check_dim(dim)?;
        if q.len() != dim + 1 {
            return Err(Error::InvalidArgument(format!(
                "a {dim}-simplex needs {} vertices",
                dim + 1
            )));
        }
        let threshold = DEGENERACY_TOL * scale.powi(dim as i32);
        let signed = signed_measure(dim, q);
        let measure = signed.abs();
        let degenerate = Error::DegenerateElement {
            cell,
            measure,
            threshold,
        };
        if !(measure > threshold) {
            return Err(degenerate);
        }
        let mut grad_lambda = [Point::zeros(); 4];
        if dim == 2 {
            let b = Matrix2::new(
                q[1][0] - q[0][0],
                q[2][0] - q[0][0],
                q[1][1] - q[0][1],
                q[2][1] - q[0][1],
            );
            let inv = b.try_inverse().ok_or(degenerate)?;
            for k in 1..=2 {
                grad_lambda[k] = Point::new(inv[(k - 1, 0)], inv[(k - 1, 1)], 0.0);
            }
        } else {
            let b = Matrix3::from_columns(&[q[1] - q[0], q[2] - q[0], q[3] - q[0]]);
            let inv = b.try_inverse().ok_or(degenerate)?;
            for k in 1..=3 {
                grad_lambda[k] = inv.row(k - 1).transpose();
            }
        }
        grad_lambda[0] = -(1..=dim).map(|k| grad_lambda[k]).sum::<Point>();

        let mut vertices = [Point::zeros(); 4];
        vertices[..=dim].copy_from_slice(q);
        let mut edges = [LocalEdge {
            i: 0,
            j: 0,
            tau: Point::zeros(),
        }; 6];
        let mut e = 0;
        for i in 0..=dim {
            for j in i + 1..=dim {
                edges[e] = LocalEdge {
                    i,
                    j,
                    tau: q[i] - q[j],
                };
                e += 1;
            }
        }
        Ok(ElementGeometry {
            cell,
            dim,
            measure,
            vertices,
            grad_lambda,
            edges,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.dim + 1
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices[..=self.dim]
    }

    pub fn grad_lambda(&self) -> &[Point] {
        &self.grad_lambda[..=self.dim]
    }

    pub fn edges(&self) -> &[LocalEdge] {
        &self.edges[..self.dim * (self.dim + 1) / 2]
    }

    /// Physical point with barycentric coordinates `bary`.
    pub fn point(&self, bary: &[f64]) -> Point {
        self.vertices()
            .iter()
            .zip(bary)
            .map(|(q, &l)| q * l)
            .sum()
    }

    /// Barycentric coordinates of `x` reconstructed from the gradients.
    pub fn barycentric(&self, x: &Point) -> Vec<f64> {
        let q0 = self.vertices[0];
        let mut l: Vec<f64> = (0..=self.dim)
            .map(|k| if k == 0 { 0.0 } else { self.grad_lambda[k].dot(&(x - q0)) })
            .collect();
        l[0] = 1.0 - l[1..].iter().sum::<f64>();
        l
    }
}
