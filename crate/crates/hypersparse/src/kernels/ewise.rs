//! Pointwise addition, masked elementwise multiplication, and column scaling
//! over DCSC operands. All run in time proportional to the operand nonzero
//! counts by merging the stored-column streams.

use crate::dcsc::DcscMatrix;
use crate::error::{Error, Result};
use crate::semiring::Semiring;

fn check_same_dims<T: Copy + PartialEq + std::fmt::Debug>(a: &DcscMatrix<T>, b: &DcscMatrix<T>, context: &'static str) -> Result<()> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::dims(
            format!("{}x{}", a.rows(), a.cols()),
            format!("{}x{}", b.rows(), b.cols()),
            context,
        ));
    }
    Ok(())
}

/// `C = A + B` entrywise; collisions combine as `add(a, b)` and entries equal
/// to the semiring zero are dropped.
pub fn sparse_add<T, S>(a: &DcscMatrix<T>, b: &DcscMatrix<T>, sr: &S) -> Result<DcscMatrix<T>>
where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
{
    check_same_dims(a, b, "pointwise addition")?;
    let mut entries: Vec<(usize, usize, T)> = Vec::new();
    let (mut ka, mut kb) = (0usize, 0usize);
    while ka < a.nzc() || kb < b.nzc() {
        let ja = a.jc().get(ka).copied();
        let jb = b.jc().get(kb).copied();
        match (ja, jb) {
            (Some(j), Some(j2)) if j == j2 => {
                let (ar, av) = a.stored_col(ka);
                let (br, bv) = b.stored_col(kb);
                merge_columns(j, ar, av, br, bv, sr, &mut entries);
                ka += 1;
                kb += 1;
            }
            (Some(j), Some(j2)) if j < j2 => {
                copy_column(j, a, ka, &mut entries);
                ka += 1;
            }
            (Some(_), Some(_)) => {
                copy_column(jb.unwrap(), b, kb, &mut entries);
                kb += 1;
            }
            (Some(j), None) => {
                copy_column(j, a, ka, &mut entries);
                ka += 1;
            }
            (None, Some(j)) => {
                copy_column(j, b, kb, &mut entries);
                kb += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(DcscMatrix::from_sorted_entries(a.rows(), a.cols(), entries))
}

fn copy_column<T: Copy + PartialEq + std::fmt::Debug>(
    j: usize,
    m: &DcscMatrix<T>,
    k: usize,
    out: &mut Vec<(usize, usize, T)>,
) {
    let (rs, vs) = m.stored_col(k);
    out.extend(rs.iter().zip(vs).map(|(&r, &v)| (r, j, v)));
}

fn merge_columns<T, S>(
    j: usize,
    ar: &[usize],
    av: &[T],
    br: &[usize],
    bv: &[T],
    sr: &S,
    out: &mut Vec<(usize, usize, T)>,
) where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
{
    let (mut ia, mut ib) = (0usize, 0usize);
    while ia < ar.len() || ib < br.len() {
        match (ar.get(ia), br.get(ib)) {
            (Some(&r), Some(&r2)) if r == r2 => {
                let v = sr.add(av[ia], bv[ib]);
                if !sr.is_zero(v) {
                    out.push((r, j, v));
                }
                ia += 1;
                ib += 1;
            }
            (Some(&r), Some(&r2)) if r < r2 => {
                out.push((r, j, av[ia]));
                ia += 1;
            }
            (Some(_), Some(&r2)) => {
                out.push((r2, j, bv[ib]));
                ib += 1;
            }
            (Some(&r), None) => {
                out.push((r, j, av[ia]));
                ia += 1;
            }
            (None, Some(&r)) => {
                out.push((r, j, bv[ib]));
                ib += 1;
            }
            (None, None) => unreachable!(),
        }
    }
}

/// Generalized elementwise multiply.
///
/// With `negate_b == false`: `C(i,j) = A(i,j) * B(i,j)` on the pattern
/// intersection. With `negate_b == true`: keeps `A(i,j)` exactly where `B` has
/// no entry — the implicit negation of the mask (zeros become one, nonzeros
/// become zero) without ever materializing that dense matrix, so no additive
/// inverses are needed.
pub fn ewise_mult<T, S>(a: &DcscMatrix<T>, b: &DcscMatrix<T>, negate_b: bool, sr: &S) -> Result<DcscMatrix<T>>
where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
{
    check_same_dims(a, b, "elementwise multiplication")?;
    let mut entries: Vec<(usize, usize, T)> = Vec::new();
    let mut kb = 0usize;
    for ka in 0..a.nzc() {
        let j = a.jc()[ka];
        while kb < b.nzc() && b.jc()[kb] < j {
            kb += 1;
        }
        let (ar, av) = a.stored_col(ka);
        if kb < b.nzc() && b.jc()[kb] == j {
            let (br, bv) = b.stored_col(kb);
            let mut ib = 0usize;
            for (ia, &r) in ar.iter().enumerate() {
                while ib < br.len() && br[ib] < r {
                    ib += 1;
                }
                let hit = ib < br.len() && br[ib] == r;
                if negate_b {
                    if !hit {
                        entries.push((r, j, av[ia]));
                    }
                } else if hit {
                    let v = sr.mul(av[ia], bv[ib]);
                    if !sr.is_zero(v) {
                        entries.push((r, j, v));
                    }
                }
            }
        } else if negate_b {
            entries.extend(ar.iter().zip(av).map(|(&r, &v)| (r, j, v)));
        }
    }
    Ok(DcscMatrix::from_sorted_entries(a.rows(), a.cols(), entries))
}

/// Scales column `j` of `a` by `diag`'s entry for `j` (absent entries scale to
/// zero, dropping the column). `diag` must be sorted by index. Computes the
/// product with a diagonal matrix on the right without forming it.
pub fn scale_columns<T, S>(a: &DcscMatrix<T>, diag: &[(usize, T)], sr: &S) -> DcscMatrix<T>
where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
{
    debug_assert!(diag.windows(2).all(|w| w[0].0 < w[1].0));
    let mut entries: Vec<(usize, usize, T)> = Vec::new();
    let mut kd = 0usize;
    for ka in 0..a.nzc() {
        let j = a.jc()[ka];
        while kd < diag.len() && diag[kd].0 < j {
            kd += 1;
        }
        if kd < diag.len() && diag[kd].0 == j {
            let d = diag[kd].1;
            let (rs, vs) = a.stored_col(ka);
            for (&r, &v) in rs.iter().zip(vs) {
                let scaled = sr.mul(v, d);
                if !sr.is_zero(scaled) {
                    entries.push((r, j, scaled));
                }
            }
        }
    }
    DcscMatrix::from_sorted_entries(a.rows(), a.cols(), entries)
}
