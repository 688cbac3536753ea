use std::sync::Arc;

use eafe_core::coeff::expr::{parse_expr, parse_matrix, parse_vector, Expr};
use eafe_core::coeff::{check_spd, CoefficientSet, DispersionParams, Field};
use eafe_core::{Point, Tensor};

use crate::config::CoefficientSection;
use crate::CliError;

fn bad(key: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("[coefficients] {key}: {err}"))
}

fn checked(key: &str, e: Expr, dim: usize) -> Result<Expr, CliError> {
    e.check_dim(dim).map_err(|err| bad(key, err))?;
    Ok(e)
}

fn scalar(key: &str, text: &str, dim: usize) -> Result<Field<f64>, CliError> {
    let e = checked(key, parse_expr(text).map_err(|err| bad(key, err))?, dim)?;
    Ok(if e.is_constant() {
        Field::Constant(e.eval(&Point::zeros()))
    } else {
        Field::function(move |x| e.eval(x))
    })
}

fn vector(key: &str, text: &str, dim: usize) -> Result<Field<Point>, CliError> {
    let parts = parse_vector(text).map_err(|err| bad(key, err))?;
    if parts.len() != dim {
        return Err(bad(key, format!("expected {dim} components, found {}", parts.len())));
    }
    let parts: Vec<Expr> = parts.into_iter().map(|e| checked(key, e, dim)).collect::<Result<_, _>>()?;
    let constant = parts.iter().all(Expr::is_constant);
    let eval = move |x: &Point| {
        let mut p = Point::zeros();
        for (k, e) in parts.iter().enumerate() {
            p[k] = e.eval(x);
        }
        p
    };
    Ok(if constant {
        Field::Constant(eval(&Point::zeros()))
    } else {
        Field::function(eval)
    })
}

fn tensor(key: &str, text: &str, dim: usize) -> Result<Field<Tensor>, CliError> {
    let rows = parse_matrix(text).map_err(|err| bad(key, err))?;
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(bad(key, format!("expected a {dim}x{dim} matrix")));
    }
    let rows: Vec<Vec<Expr>> = rows
        .into_iter()
        .map(|r| r.into_iter().map(|e| checked(key, e, dim)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let constant = rows.iter().flatten().all(Expr::is_constant);
    let rows = Arc::new(rows);
    let eval = move |x: &Point| {
        let mut t = Tensor::identity();
        for (i, r) in rows.iter().enumerate() {
            for (j, e) in r.iter().enumerate() {
                t[(i, j)] = e.eval(x);
            }
        }
        t
    };
    if constant {
        let t = eval(&Point::zeros());
        check_spd(dim, &t, &Point::zeros()).map_err(|err| bad(key, err))?;
        Ok(Field::Constant(t))
    } else {
        Ok(Field::function(eval))
    }
}

/// `dispersion(k_d, k_t, k_l)` with numeric arguments.
fn dispersion_params(text: &str) -> Option<Result<DispersionParams, CliError>> {
    let inner = text.trim().strip_prefix("dispersion")?.trim();
    let inner = inner.strip_prefix('(').and_then(|s| s.strip_suffix(')'));
    let parse = || -> Result<DispersionParams, CliError> {
        let inner = inner.ok_or_else(|| bad("D", "expected dispersion(k_d, k_t, k_l)"))?;
        let v: Vec<f64> = inner
            .split(',')
            .map(|s| {
                let e = parse_expr(s).map_err(|err| bad("D", err))?;
                if !e.is_constant() {
                    return Err(bad("D", "dispersion parameters must be numbers"));
                }
                Ok(e.eval(&Point::zeros()))
            })
            .collect::<Result<_, _>>()?;
        match v[..] {
            [k_d, k_t, k_l] => Ok(DispersionParams { k_d, k_t, k_l }),
            _ => Err(bad("D", format!("dispersion takes 3 parameters, found {}", v.len()))),
        }
    };
    Some(parse())
}

pub fn build_coefficients(dim: usize, c: &CoefficientSection) -> Result<CoefficientSet, CliError> {
    let mut set = CoefficientSet::new(dim);
    if let Some(b) = &c.b {
        set = set.with_velocity(vector("b", b, dim)?);
    }
    if let Some(g) = &c.gamma {
        set = set.with_reaction(scalar("gamma", g, dim)?);
    }
    if let Some(f) = &c.f {
        set = set.with_source(scalar("f", f, dim)?);
    }
    if let Some(g) = &c.g {
        set = set.with_neumann_flux(scalar("g", g, dim)?);
    }
    if let Some(u) = &c.u_d {
        set = set.with_dirichlet(scalar("u_d", u, dim)?);
    }
    if let Some(d) = &c.d {
        set = match dispersion_params(d) {
            Some(p) => set.with_dispersion(p?).map_err(|err| bad("D", err))?,
            None => set.with_diffusion(tensor("D", d, dim)?),
        };
    }
    Ok(set)
}
