use rayon::prelude::*;

use super::local::{edge_data_with, local_matrix_from, LocalMatrix, Rules};
use super::AssemblyOptions;
use crate::coeff::CoefficientSet;
use crate::linalg::CsrMatrix;
use crate::mesh::{BoundaryTag, SimplicialMesh};
use crate::{Error, Point, Result};

type Triplets = Vec<(usize, usize, f64)>;

/// Global matrix and right-hand side, one unknown per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dirichlet_mask: Vec<bool>,
    pub dirichlet_values: Vec<f64>,
    /// Whether Dirichlet rows have been eliminated.
    pub constrained: bool,
}

impl SparseSystem {
    pub fn n(&self) -> usize {
        self.rhs.len()
    }

    /// Eliminates Dirichlet unknowns: their columns are moved to the
    /// right-hand side and their rows become identity rows with the
    /// prescribed value. `values` is indexed by vertex; only masked entries
    /// are read.
    pub fn apply_dirichlet(&mut self, values: &[f64]) -> Result<()> {
        if self.constrained {
            return Err(Error::InvalidArgument("Dirichlet conditions already applied".into()));
        }
        let n = self.n();
        if values.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} Dirichlet values for {n} vertices",
                values.len()
            )));
        }
        let mask = &self.dirichlet_mask;
        for r in 0..n {
            let (cols, vals) = self.matrix.row_mut(r);
            if mask[r] {
                for (c, v) in cols.iter().zip(vals.iter_mut()) {
                    *v = if *c == r { 1.0 } else { 0.0 };
                }
                self.rhs[r] = values[r];
            } else {
                for (c, v) in cols.iter().zip(vals.iter_mut()) {
                    if mask[*c] {
                        self.rhs[r] -= *v * values[*c];
                        *v = 0.0;
                    }
                }
            }
        }
        self.dirichlet_values = (0..n).map(|i| if mask[i] { values[i] } else { 0.0 }).collect();
        self.constrained = true;
        Ok(())
    }
}

struct ElementContribution {
    cell: usize,
    matrix: LocalMatrix,
    rhs: [f64; 4],
}

fn element_contribution(
    mesh: &SimplicialMesh,
    coeffs: &CoefficientSet,
    opts: &AssemblyOptions,
    rules: &Rules,
    cell: usize,
) -> Result<ElementContribution> {
    let geom = mesh.element_geometry(cell)?;
    let n = geom.n_vertices();
    let edges = edge_data_with(&geom, coeffs, opts, rules)?;
    let mut matrix = local_matrix_from(n, &edges);
    let mut rhs = [0.0; 4];
    let reaction_zero = matches!(coeffs.reaction, crate::coeff::Field::Constant(g) if g == 0.0);
    for (bary, w) in &rules.mass.points {
        let x = geom.point(&bary[..n]);
        let f = coeffs.scalar_at(&coeffs.source, "f", &x)?;
        let wm = w * geom.measure;
        for a in 0..n {
            rhs[a] += wm * f * bary[a];
        }
        if !reaction_zero {
            let gamma = coeffs.scalar_at(&coeffs.reaction, "gamma", &x)?;
            for a in 0..n {
                for b in 0..n {
                    matrix.a[a][b] += wm * gamma * bary[a] * bary[b];
                }
            }
        }
    }
    Ok(ElementContribution { cell, matrix, rhs })
}

/// Assembles the scheme without imposing Dirichlet conditions. The mask of
/// Dirichlet vertices is filled in; values are zero.
pub fn assemble_unconstrained(
    mesh: &SimplicialMesh,
    coeffs: &CoefficientSet,
    opts: &AssemblyOptions,
) -> Result<SparseSystem> {
    if coeffs.dim != mesh.dim() {
        return Err(Error::InvalidArgument(format!(
            "coefficients are {}D, mesh is {}D",
            coeffs.dim,
            mesh.dim()
        )));
    }
    let dim = mesh.dim();
    let nv = mesh.n_vertices();
    let rules = Rules::new(dim, opts);
    let work = |cell: usize| {
        element_contribution(mesh, coeffs, opts, &rules, cell).map_err(|e| e.context(format!("element {cell}")))
    };

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(mesh.n_cells() * (dim + 1) * (dim + 1));
    let mut rhs = vec![0.0; nv];
    let push = |c: &ElementContribution, triplets: &mut Vec<(usize, usize, f64)>, rhs: &mut [f64]| {
        let verts = mesh.cell(c.cell);
        for (a, &ga) in verts.iter().enumerate() {
            rhs[ga] += c.rhs[a];
            for (b, &gb) in verts.iter().enumerate() {
                triplets.push((ga, gb, c.matrix.a[a][b]));
            }
        }
    };
    if opts.deterministic {
        let contributions: Vec<ElementContribution> =
            (0..mesh.n_cells()).into_par_iter().map(work).collect::<Result<_>>()?;
        for c in &contributions {
            push(c, &mut triplets, &mut rhs);
        }
    } else {
        let parts: Vec<(Triplets, Vec<f64>)> = (0..mesh.n_cells())
            .into_par_iter()
            .fold(
                || Ok((Vec::new(), vec![0.0; nv])),
                |acc: Result<(Vec<_>, Vec<f64>)>, cell| {
                    let (mut t, mut r) = acc?;
                    let c = work(cell)?;
                    let verts = mesh.cell(c.cell);
                    for (a, &ga) in verts.iter().enumerate() {
                        r[ga] += c.rhs[a];
                        for (b, &gb) in verts.iter().enumerate() {
                            t.push((ga, gb, c.matrix.a[a][b]));
                        }
                    }
                    Ok((t, r))
                },
            )
            .collect::<Result<_>>()?;
        for (t, r) in parts {
            triplets.extend(t);
            for (x, y) in rhs.iter_mut().zip(r) {
                *x += y;
            }
        }
    }

    boundary_terms(mesh, coeffs, opts, &mut triplets, &mut rhs)?;

    Ok(SparseSystem {
        matrix: CsrMatrix::from_triplets(nv, &triplets)?,
        rhs,
        dirichlet_mask: mesh.dirichlet_vertices(),
        dirichlet_values: vec![0.0; nv],
        constrained: false,
    })
}

fn boundary_terms(
    mesh: &SimplicialMesh,
    coeffs: &CoefficientSet,
    opts: &AssemblyOptions,
    triplets: &mut Vec<(usize, usize, f64)>,
    rhs: &mut [f64],
) -> Result<()> {
    let dim = mesh.dim();
    let rule = crate::quadrature::SimplexRule::new(dim - 1, opts.face_degree);
    for k in 0..mesh.n_boundary_faces() {
        let tag = mesh.face_tag(k);
        if tag == BoundaryTag::Dirichlet {
            continue;
        }
        let fi = mesh.face_info(k);
        let q: Vec<Point> = fi.vertices.iter().map(|&i| *mesh.vertex(i)).collect();
        let mut local = [[0.0; 3]; 3];
        let mut load = [0.0; 3];
        for (bary, w) in &rule.points {
            let x: Point = q.iter().zip(bary).map(|(p, l)| p * *l).sum();
            let wm = w * fi.measure;
            match tag {
                BoundaryTag::NeumannOut => {
                    let bn = coeffs
                        .velocity_at(&x)
                        .map_err(|e| e.context(format!("boundary face {k}")))?
                        .dot(&fi.normal);
                    for a in 0..dim {
                        for b in 0..dim {
                            local[a][b] -= wm * bn * bary[a] * bary[b];
                        }
                    }
                }
                BoundaryTag::NeumannIn => {
                    let g = coeffs
                        .scalar_at(&coeffs.neumann_flux, "g", &x)
                        .map_err(|e| e.context(format!("boundary face {k}")))?;
                    for a in 0..dim {
                        load[a] += wm * g * bary[a];
                    }
                }
                BoundaryTag::Dirichlet => unreachable!(),
            }
        }
        for (a, &ga) in fi.vertices.iter().enumerate() {
            rhs[ga] += load[a];
            if tag == BoundaryTag::NeumannOut {
                for (b, &gb) in fi.vertices.iter().enumerate() {
                    triplets.push((ga, gb, local[a][b]));
                }
            }
        }
    }
    Ok(())
}

/// Assembles and imposes the Dirichlet data `coeffs.dirichlet` at vertices.
pub fn assemble(mesh: &SimplicialMesh, coeffs: &CoefficientSet, opts: &AssemblyOptions) -> Result<SparseSystem> {
    let mut sys = assemble_unconstrained(mesh, coeffs, opts)?;
    let mut values = vec![0.0; mesh.n_vertices()];
    for (i, v) in values.iter_mut().enumerate() {
        if sys.dirichlet_mask[i] {
            *v = coeffs.scalar_at(&coeffs.dirichlet, "dirichlet value", mesh.vertex(i))?;
        }
    }
    sys.apply_dirichlet(&values)?;
    Ok(sys)
}

/// Nodal values of `u` (the Lagrange interpolant).
pub fn interpolate<F: Fn(&Point) -> f64>(mesh: &SimplicialMesh, u: F) -> Vec<f64> {
    mesh.vertices().iter().map(u).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Field;
    use crate::mesh::{generate_structured, Domain};

    #[test]
    fn interpolation_examples() {
        let m = generate_structured(2, 2, Domain::unit()).unwrap();
        assert!(interpolate(&m, |_| 1.0).iter().all(|&v| v == 1.0));
        let ux = interpolate(&m, |x| x[0]);
        for (v, p) in ux.iter().zip(m.vertices()) {
            assert_eq!(*v, p[0]);
        }
        let u2 = interpolate(&m, |x| x[0] * x[0]);
        assert_eq!(u2[4], 0.25);
    }

    #[test]
    fn column_sums_vanish_without_reaction_or_outflow() {
        let m = generate_structured(2, 6, Domain::unit()).unwrap();
        let m = m.retag_boundary(|f| {
            if f.barycenter[1] == 1.0 {
                BoundaryTag::NeumannIn
            } else {
                BoundaryTag::Dirichlet
            }
        });
        let c = CoefficientSet::new(2)
            .with_velocity(Field::function(|x: &Point| Point::new(1.0 + x[1], -2.0 * x[0], 0.0)))
            .with_neumann_flux(Field::Constant(3.0));
        for constant_beta in [None, Some(true)] {
            let opts = AssemblyOptions { constant_beta, ..Default::default() };
            let s = assemble_unconstrained(&m, &c, &opts).unwrap();
            let norm = s.matrix.norm_inf();
            for cs in s.matrix.column_sums() {
                assert!(cs.abs() <= 1e-11 * norm);
            }
        }
    }

    #[test]
    fn outflow_term_breaks_column_sums_by_the_boundary_integral() {
        let m = generate_structured(2, 4, Domain::unit()).unwrap();
        let m = m.retag_boundary(|f| {
            if f.barycenter[0] == 0.0 {
                BoundaryTag::NeumannOut
            } else {
                BoundaryTag::Dirichlet
            }
        });
        let c = CoefficientSet::new(2).with_velocity(Field::Constant(Point::new(1.0, 0.0, 0.0)));
        let s = assemble_unconstrained(&m, &c, &AssemblyOptions::default()).unwrap();
        // a_h(1, 1) = -int_{x=0} b.n = -(-1) * 1
        let total: f64 = s.matrix.column_sums().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_rows_are_identity() {
        let m = generate_structured(2, 3, Domain::unit()).unwrap();
        let c = CoefficientSet::new(2)
            .with_velocity(Field::Constant(Point::new(2.0, 1.0, 0.0)))
            .with_dirichlet(Field::function(|x: &Point| x[0] + 2.0 * x[1]));
        let s = assemble(&m, &c, &AssemblyOptions::default()).unwrap();
        for r in 0..s.n() {
            if s.dirichlet_mask[r] {
                let (cols, vals) = s.matrix.row(r);
                for (c, v) in cols.iter().zip(vals) {
                    assert_eq!(*v, if *c == r { 1.0 } else { 0.0 });
                }
                let p = m.vertex(r);
                assert_eq!(s.rhs[r], p[0] + 2.0 * p[1]);
            }
        }
        let mut again = s.clone();
        assert!(again.apply_dirichlet(&vec![0.0; s.n()]).is_err());
    }

    #[test]
    fn no_entries_between_unconnected_vertices() {
        let m = generate_structured(3, 2, Domain::unit()).unwrap();
        let c = CoefficientSet::new(3).with_reaction(Field::Constant(1.0));
        let s = assemble(&m, &c, &AssemblyOptions::default()).unwrap();
        let edges: std::collections::HashSet<(usize, usize)> =
            m.edge_list().iter().map(|e| (e.lo, e.hi)).collect();
        for r in 0..s.n() {
            for &col in s.matrix.row(r).0 {
                if col != r {
                    assert!(edges.contains(&(r.min(col), r.max(col))));
                }
            }
        }
    }

    #[test]
    fn deterministic_assembly_is_bit_identical() {
        let m = generate_structured(2, 10, Domain::unit()).unwrap();
        let c = CoefficientSet::new(2)
            .with_velocity(Field::function(|x: &Point| Point::new(x[1], -x[0], 0.0) * 20.0))
            .with_reaction(Field::Constant(0.5))
            .with_source(Field::function(|x: &Point| x[0].sin()));
        let a = assemble(&m, &c, &AssemblyOptions::default()).unwrap();
        let b = assemble(&m, &c, &AssemblyOptions::default()).unwrap();
        assert_eq!(a, b);
        let nd = assemble(&m, &c, &AssemblyOptions { deterministic: false, ..Default::default() }).unwrap();
        for (x, y) in a.matrix.values().iter().zip(nd.matrix.values()) {
            assert!((x - y).abs() <= 1e-13 * x.abs().max(1.0));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let m = generate_structured(2, 2, Domain::unit()).unwrap();
        assert!(assemble(&m, &CoefficientSet::new(3), &AssemblyOptions::default()).is_err());
    }

    #[test]
    fn kernel_errors_carry_element_provenance() {
        let m = generate_structured(2, 2, Domain::unit()).unwrap();
        let c = CoefficientSet::new(2)
            .with_diffusion(Field::function(|x: &Point| {
                if x[0] > 0.6 {
                    -crate::Tensor::identity()
                } else {
                    crate::Tensor::identity()
                }
            }))
            .with_velocity(Field::Constant(Point::new(1.0, 0.0, 0.0)));
        let err = assemble(&m, &c, &AssemblyOptions::default()).unwrap_err();
        assert!(err.to_string().contains("element"), "{err}");
    }
}
