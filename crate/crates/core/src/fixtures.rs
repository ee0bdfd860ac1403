//! Small short sums with known counts, used by tests, benchmarks and the
//! shipped data files.

use crate::mpa::{DenFactor, NumMonomial, ShortSum, ShortSumTerm};

fn unit(z: Vec<i64>) -> NumMonomial {
    NumMonomial { c: 1, t: 0, z }
}

fn den(t: i64, z: Vec<i64>) -> DenFactor {
    DenFactor { t, z }
}

/// Lattice points of `[0, n]^2` by Brion's vertex-cone decomposition, as a
/// sum in two variables with no `t`. Evaluates to `(n + 1)^2`.
pub fn unit_square_qn(n: i64) -> ShortSum {
    let mut ss = ShortSum::new(0, 2);
    for (vx, vy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        let sx = if vx == 0 { 1 } else { -1 };
        let sy = if vy == 0 { 1 } else { -1 };
        ss.terms.push(ShortSumTerm {
            num: vec![unit(vec![vx * n, vy * n])],
            den: vec![den(0, vec![sx, 0]), den(0, vec![0, sy])],
        });
    }
    ss
}

/// Dilations of the unit square: `sum_k #(k[0,1]^2 ∩ Z^2) t^k`.
pub fn unit_square_series() -> ShortSum {
    box_series(&[1, 1])
}

/// Dilations of the box `prod [0, a_i]`, one term per vertex.
pub fn box_series(sides: &[i64]) -> ShortSum {
    let dim = sides.len();
    let mut ss = ShortSum::new(1, dim);
    for mask in 0u32..(1 << dim) {
        let vertex: Vec<i64> = (0..dim)
            .map(|i| if mask >> i & 1 == 1 { sides[i] } else { 0 })
            .collect();
        let mut dens = vec![den(1, vertex)];
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] = if mask >> i & 1 == 1 { -1 } else { 1 };
            dens.push(den(0, e));
        }
        ss.terms.push(ShortSumTerm {
            num: vec![unit(vec![0; dim])],
            den: dens,
        });
    }
    ss
}

/// 3x3 magic squares by magic sum. Every such square is
/// `[c-u, c+u+v, c-v; c-u+v, c, c+u-v; c+v, c-u-v, c+u]` with magic sum
/// `3c` and `|u| + |v| <= c`, so the series runs over dilations of a
/// diamond in `(u, v)` with `t^3` per dilation step.
pub fn ms3_series() -> ShortSum {
    // (vertex, edge directions, lattice points of the half-open parallelogram)
    let cones: [([i64; 2], [[i64; 2]; 2], [[i64; 2]; 2]); 4] = [
        ([1, 0], [[-1, 1], [-1, -1]], [[0, 0], [-1, 0]]),
        ([-1, 0], [[1, 1], [1, -1]], [[0, 0], [1, 0]]),
        ([0, 1], [[1, -1], [-1, -1]], [[0, 0], [0, -1]]),
        ([0, -1], [[1, 1], [-1, 1]], [[0, 0], [0, 1]]),
    ];
    let mut ss = ShortSum::new(1, 2);
    for (v, w, pts) in cones {
        ss.terms.push(ShortSumTerm {
            num: pts.iter().map(|u| unit(u.to_vec())).collect(),
            den: vec![den(3, v.to_vec()), den(0, w[0].to_vec()), den(0, w[1].to_vec())],
        });
    }
    ss
}

/// Exhaustive count of 3x3 nonnegative integer magic squares with the given
/// line sum (rows, columns and both diagonals).
pub fn count_magic_squares(sum: u64) -> u64 {
    let s = sum as i64;
    let mut count = 0;
    for a in 0..=s {
        for b in 0..=s - a {
            let c = s - a - b;
            for d in 0..=s {
                for e in 0..=s - d {
                    let f = s - d - e;
                    let (g, h, i) = (s - a - d, s - b - e, s - c - f);
                    if g < 0 || h < 0 || i < 0 || g + h + i != s {
                        continue;
                    }
                    if a + e + i == s && c + e + g == s {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magic_square_counts() {
        let counts: Vec<u64> = (0..=9).map(count_magic_squares).collect();
        assert_eq!(counts, vec![1, 0, 0, 5, 0, 0, 13, 0, 0, 25]);
    }

    #[test]
    fn fixtures_validate() {
        for ss in [unit_square_qn(3), unit_square_series(), ms3_series(), box_series(&[2, 1, 3])] {
            ss.validate().unwrap();
        }
    }
}
