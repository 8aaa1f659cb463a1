/// Orders points lexicographically by coordinate, `priority[0]` slowest.
/// Returns `perm` with `perm[new] = old`. Ties keep the original order, so
/// interleaved unknown families stay grouped by position.
pub fn order_by_coords(coords: &[[f64; 3]], priority: [usize; 3]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..coords.len()).collect();
    perm.sort_by(|&a, &b| {
        let (pa, pb) = (&coords[a], &coords[b]);
        for &ax in &priority {
            match pa[ax].partial_cmp(&pb[ax]) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        std::cmp::Ordering::Equal
    });
    perm
}

/// Axis priority placing the longest physical extent slowest, so the
/// bandwidth scales with the shorter axes.
pub fn priority_for_extents(extent: [usize; 3], dim: usize) -> [usize; 3] {
    let mut axes: Vec<usize> = (0..dim).collect();
    axes.sort_by(|&a, &b| extent[b].cmp(&extent[a]).then(b.cmp(&a)));
    let mut p = [0, 1, 2];
    for (slot, &ax) in axes.iter().enumerate() {
        p[slot] = ax;
    }
    if dim == 2 {
        p[2] = 2;
    }
    p
}

/// Inverse of a permutation.
pub fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}
