//! Partition expansion of the nested integral with unit shift:
//!
//! `μ_k = ∮⋯∮ ∏_{A<B} (z_A−z_B)/(z_A−z_B−1) ∏ f(z_j) dz_j/(2πi) = k! Σ_{λ⊢k} I_λ`,
//!
//! `I_λ = (1/∏ mᵢ!) ∮⋯∮ det[1/(λᵢ+wᵢ−wⱼ)] ∏ⱼ f(wⱼ)f(wⱼ+1)⋯f(wⱼ+λⱼ−1) dwⱼ/(2πi)`
//!
//! with every `w` on one common contour around 0. The measure carries no
//! `1/z`; callers wanting the one-sided moments pass `f(z) = F(z)/z`.

use crate::error::{PamError, Result};
use crate::lyapunov::gamma_k_onesided;
use crate::mathcore::{enumerate_partitions, Contour, ContourKind, LogComplex, MomentResult, Partition, Route};
use crate::quadrature::{log_rel_change, next_nodes, roundoff_floor, LEAF_BUDGET};
use num_complex::Complex64;

pub const MAX_K_EXPANSION: usize = 5;
pub const EXPANSION_TOL: f64 = 1e-10;
const CAP: usize = 1 << 12;

pub type Weight<'a> = dyn Fn(Complex64) -> LogComplex + Sync + 'a;

/// One term `I_λ` of the expansion.
#[derive(Debug, Clone)]
pub struct ExpansionTerm {
    pub lambda: Partition,
    /// `I_λ` including the `1/∏ mᵢ!` prefactor.
    pub value: LogComplex,
    pub symmetry_factor: f64,
    pub contour: Contour,
    pub rel_error: f64,
    pub nodes: usize,
}

/// Checks that the common contour is a circle enclosing 0, none of
/// `−1, …, −(λ₁−1)`, and (for `ℓ ≥ 2`) of diameter below `min λᵢ` so that
/// no determinant entry is singular.
pub fn check_contour(lambda: &Partition, contour: &Contour) -> Result<()> {
    let (centre, radius) = match contour.kind {
        ContourKind::Circle { center, radius } => (center, radius),
        ContourKind::VerticalLine { .. } => {
            return Err(PamError::Contour("the partition expansion needs a circle".into()))
        }
    };
    if !contour.encloses(Complex64::new(0.0, 0.0)) {
        return Err(PamError::Contour("common contour must enclose 0".into()));
    }
    let top = lambda.parts()[0];
    for j in 1..top {
        let p = Complex64::new(-(j as f64), 0.0);
        if (p - centre).norm() <= radius {
            return Err(PamError::Contour(format!(
                "common contour encloses the string singularity at −{j}"
            )));
        }
    }
    let smallest = *lambda.parts().last().expect("partitions are non-empty") as f64;
    if lambda.len() >= 2 && 2.0 * radius >= smallest {
        return Err(PamError::Contour(format!(
            "contour diameter {:.3} reaches the determinant poles at distance {smallest}",
            2.0 * radius
        )));
    }
    Ok(())
}

struct Axis {
    z: Vec<Complex64>,
    v: Vec<Complex64>,
    shift: f64,
}

fn det(m: &mut [Complex64], n: usize) -> Complex64 {
    match n {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            let mut d = Complex64::new(1.0, 0.0);
            for col in 0..n {
                let piv = (col..n)
                    .max_by(|&a, &b| m[a * n + col].norm().total_cmp(&m[b * n + col].norm()))
                    .unwrap_or(col);
                if m[piv * n + col] == Complex64::new(0.0, 0.0) {
                    return Complex64::new(0.0, 0.0);
                }
                if piv != col {
                    for c in 0..n {
                        m.swap(piv * n + c, col * n + c);
                    }
                    d = -d;
                }
                let p = m[col * n + col];
                d *= p;
                for r in col + 1..n {
                    let f = m[r * n + col] / p;
                    if f != Complex64::new(0.0, 0.0) {
                        for c in col + 1..n {
                            let v = m[col * n + c];
                            m[r * n + c] -= f * v;
                        }
                    }
                }
            }
            d
        }
    }
}

/// Trapezoid sum of the `I_λ` integrand at a fixed node count, returned with
/// the log of `Σ |terms|`.
fn lambda_sum(f: &Weight<'_>, lambda: &Partition, contour: &Contour) -> Result<(LogComplex, f64)> {
    let parts = lambda.parts();
    let l = parts.len();
    let n = contour.node_count();
    if (n as f64).powi(l as i32) > LEAF_BUDGET {
        return Err(PamError::NonConvergence {
            nodes: n,
            last: f64::NAN,
            prev: f64::NAN,
        });
    }
    let axes: Vec<Axis> = parts
        .iter()
        .enumerate()
        .map(|(j, &len)| {
            let nodes = contour.with_offset(j as f64 / l as f64).nodes();
            let logs: Vec<LogComplex> = nodes
                .iter()
                .map(|&(z, w)| {
                    let mut acc = LogComplex::from_complex(w);
                    for r in 0..len {
                        acc = acc.mul(&f(z + r as f64));
                    }
                    acc
                })
                .collect();
            let shift = logs.iter().map(|x| x.log_abs).fold(f64::NEG_INFINITY, f64::max);
            let shift = if shift.is_finite() { shift } else { 0.0 };
            Axis {
                z: nodes.iter().map(|p| p.0).collect(),
                v: logs.iter().map(|x| x.scaled(shift)).collect(),
                shift,
            }
        })
        .collect();
    let shift: f64 = axes.iter().map(|a| a.shift).sum();
    // entry tables: table[i * l + j][a * n + b] = 1/(λᵢ + wᵢ[a] − wⱼ[b])
    let mut tables = vec![Vec::new(); l * l];
    for i in 0..l {
        for j in 0..l {
            if i == j {
                continue;
            }
            let t = &mut tables[i * l + j];
            t.reserve(n * n);
            for &wi in &axes[i].z {
                for &wj in &axes[j].z {
                    t.push((parts[i] as f64 + wi - wj).inv());
                }
            }
        }
    }
    let branch = |a0: usize| -> (Complex64, f64) {
        let mut idx = vec![0usize; l];
        idx[0] = a0;
        let mut m = vec![Complex64::new(0.0, 0.0); l * l];
        let mut s = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        loop {
            let mut weight = Complex64::new(1.0, 0.0);
            for (j, &a) in idx.iter().enumerate() {
                weight *= axes[j].v[a];
            }
            if weight != Complex64::new(0.0, 0.0) {
                for i in 0..l {
                    for j in 0..l {
                        m[i * l + j] = if i == j {
                            Complex64::new(1.0 / parts[i] as f64, 0.0)
                        } else {
                            tables[i * l + j][idx[i] * n + idx[j]]
                        };
                    }
                }
                let term = weight * det(&mut m, l);
                s += term;
                abs += term.norm();
            }
            // odometer over the trailing indices
            let mut pos = l;
            loop {
                if pos == 1 {
                    return (s, abs);
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < n {
                    break;
                }
                idx[pos] = 0;
            }
        }
    };
    let parts_sum: Vec<(Complex64, f64)> = if l == 1 {
        (0..n)
            .map(|a| {
                let v = axes[0].v[a] / parts[0] as f64;
                (v, v.norm())
            })
            .collect()
    } else {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(branch).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n).map(branch).collect()
        }
    };
    let (s, abs) = parts_sum
        .into_iter()
        .fold((Complex64::new(0.0, 0.0), 0.0), |(a, b), (x, y)| (a + x, b + y));
    let sym = lambda.symmetry_factor();
    let value = LogComplex::from_scaled(s / sym, shift);
    let log_l1 = if abs > 0.0 { shift + (abs / sym).ln() } else { f64::NEG_INFINITY };
    Ok((value, log_l1))
}

/// `I_λ` on a common circle, growing the node count from the contour's
/// own until successive sums agree to `tol`.
pub fn i_lambda(f: &Weight<'_>, lambda: &Partition, contour: &Contour, tol: f64) -> Result<ExpansionTerm> {
    check_contour(lambda, contour)?;
    let mut n = contour.node_count().max(16);
    let (mut prev, _) = lambda_sum(f, lambda, &contour.with_nodes(n)?)?;
    loop {
        if next_nodes(n) > CAP {
            return Err(PamError::NonConvergence {
                nodes: n,
                last: prev.log_abs,
                prev: f64::NAN,
            });
        }
        n = next_nodes(n);
        let c = contour.with_nodes(n)?;
        let (cur, log_l1) = lambda_sum(f, lambda, &c)?;
        let rel = log_rel_change(&cur, &prev);
        let floor = roundoff_floor(log_l1, &cur);
        if rel <= tol || rel <= floor {
            return Ok(ExpansionTerm {
                lambda: lambda.clone(),
                value: cur,
                symmetry_factor: lambda.symmetry_factor(),
                contour: c,
                rel_error: rel.max(floor),
                nodes: n,
            });
        }
        prev = cur;
    }
}

/// `k! Σ_λ I_λ` together with the individual terms.
pub fn mu_via_partitions(
    f: &Weight<'_>,
    k: usize,
    contour: &Contour,
    tol: f64,
) -> Result<(MomentResult, Vec<ExpansionTerm>)> {
    if k == 0 || k > MAX_K_EXPANSION {
        return Err(PamError::Precondition(format!(
            "partition expansion supports 1 ≤ k ≤ {MAX_K_EXPANSION}, got {k}"
        )));
    }
    let terms = enumerate_partitions(k)?
        .iter()
        .map(|lambda| i_lambda(f, lambda, contour, tol))
        .collect::<Result<Vec<_>>>()?;
    let sum = LogComplex::sum(&terms.iter().map(|t| t.value).collect::<Vec<_>>());
    let log_fact: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
    let total = LogComplex::new(sum.log_abs + log_fact, sum.arg);
    let err = terms
        .iter()
        .map(|t| t.rel_error * (t.value.log_abs - sum.log_abs).exp())
        .sum::<f64>();
    let nodes = terms.iter().map(|t| t.nodes).max().unwrap_or(0);
    Ok((MomentResult::from_log(total, Route::Partition, err, nodes), terms))
}

/// `γ_λ = Σⱼ γ_{λⱼ}(1; ν)`.
pub fn gamma_lambda(lambda: &Partition, nu: f64) -> Result<f64> {
    lambda
        .parts()
        .iter()
        .map(|&p| gamma_k_onesided(p, nu).map(|r| r.value))
        .sum()
}

/// `f(z) = e^{t(z−1)} z^{−n−1}`: the one-sided integrand with its measure.
pub fn onesided_weight(t: f64, n: i64) -> impl Fn(Complex64) -> LogComplex + Sync {
    move |z: Complex64| LogComplex::exp_of(z * t - t - z.ln() * (n + 1) as f64)
}

/// Small circle admissible for every partition.
pub fn default_contour() -> Contour {
    Contour::centered_circle(0.25, 16).expect("valid circle")
}

/// Circle through the real saddle `z⁰` of the ground-state string for
/// `λ = (k)`: centred at 0 when `z⁰ < 1`, otherwise with its left-most point
/// at `−1/2`.
pub fn ground_state_contour(k: usize, nu: f64) -> Result<Contour> {
    let z0 = gamma_k_onesided(k, nu)?
        .critical_point
        .ok_or_else(|| PamError::Degenerate("no critical point".into()))?;
    if z0 < 1.0 {
        Contour::centered_circle(z0, 16)
    } else {
        Contour::circle(Complex64::new(0.5 * (z0 - 0.5), 0.0), 0.5 * (z0 + 0.5), 16)
    }
}

/// Common circle for a general `λ`: through the saddle of its longest string
/// when that is admissible, otherwise shrunk to `0.45·min λᵢ` so the
/// determinant stays regular.
pub fn partition_contour(lambda: &Partition, nu: f64) -> Result<Contour> {
    if lambda.len() == 1 {
        return ground_state_contour(lambda.parts()[0], nu);
    }
    let z0 = gamma_k_onesided(lambda.parts()[0], nu)?
        .critical_point
        .ok_or_else(|| PamError::Degenerate("no critical point".into()))?;
    let smallest = *lambda.parts().last().expect("partitions are non-empty") as f64;
    Contour::centered_circle(z0.min(0.45 * smallest).min(0.95), 16)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(p: &[usize]) -> Partition {
        Partition::new(p.to_vec()).unwrap()
    }

    #[test]
    fn single_part_terms() {
        let f = |z: Complex64| LogComplex::from_complex((z * 0.7).exp() / (z * z));
        let c = Contour::centered_circle(0.3, 16).unwrap();
        // λ = (1): ∮ e^{0.7z}/z² = 0.7
        let t = i_lambda(&f, &part(&[1]), &c, 1e-12).unwrap();
        assert!((t.value.to_complex() - 0.7).norm() < 1e-12);
        // λ = (2): ½ ∮ f(w) f(w+1) = ½ · Res_0 of e^{0.7(2w+1)}/(w²(w+1)²)
        let t = i_lambda(&f, &part(&[2]), &c, 1e-12).unwrap();
        let expect = 0.5 * 0.7f64.exp() * (1.4 - 2.0);
        assert!((t.value.to_complex() - expect).norm() < 1e-12);
    }

    #[test]
    fn two_by_two_determinant() {
        for u in [Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.4)] {
            let mut m = [
                Complex64::new(1.0, 0.0),
                (1.0 + u).inv(),
                (1.0 - u).inv(),
                Complex64::new(1.0, 0.0),
            ];
            let d = det(&mut m, 2);
            assert!((d - u * u / (u * u - 1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn lu_determinant_matches_cofactors() {
        let m0: Vec<Complex64> = (0..9)
            .map(|i| Complex64::new((i as f64 * 1.3).sin(), (i as f64 * 0.7).cos()))
            .collect();
        let cof = m0[0] * (m0[4] * m0[8] - m0[5] * m0[7]) - m0[1] * (m0[3] * m0[8] - m0[5] * m0[6])
            + m0[2] * (m0[3] * m0[7] - m0[4] * m0[6]);
        let mut m = m0.clone();
        assert!((det(&mut m, 3) - cof).norm() < 1e-14);
    }

    #[test]
    fn contour_preconditions() {
        let big = Contour::centered_circle(1.5, 16).unwrap();
        assert!(check_contour(&part(&[2]), &big).is_err());
        assert!(check_contour(&part(&[1]), &big).is_ok());
        let mid = Contour::centered_circle(0.6, 16).unwrap();
        assert!(check_contour(&part(&[1, 1]), &mid).is_err());
        assert!(check_contour(&part(&[2, 2]), &mid).is_ok());
        let off = Contour::circle(Complex64::new(2.0, 0.0), 0.5, 16).unwrap();
        assert!(check_contour(&part(&[1]), &off).is_err());
    }

    #[test]
    fn gamma_lambda_sums_parts() {
        assert!(gamma_lambda(&part(&[1, 1]), 1.0).unwrap().abs() < 1e-14);
        let g2 = gamma_k_onesided(2, 1.0).unwrap().value;
        assert!((gamma_lambda(&part(&[2, 1]), 1.0).unwrap() - g2).abs() < 1e-14);
    }
}
