use helmstack::discretize::build_gradient;
use helmstack::grid::Grid;
use helmstack::io::EhGrid;
use helmstack::media::{apply_abc, AbcParams, MediaModel};
use helmstack::multigrid::{build_restriction_1d, Restriction1d};
use helmstack::sparse::CsrMatrix;
use helmstack::C64;
use proptest::prelude::*;

fn close(a: &[C64], b: &[C64]) -> bool {
    let scale = 1.0 + b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= 1e-12 * scale)
}

prop_compose! {
    fn sparse(rows: usize, cols: usize)(trips in prop::collection::vec((0..rows, 0..cols, -2.0..2.0f64, -2.0..2.0f64), 0..60)) -> CsrMatrix {
        CsrMatrix::from_triplets(rows, cols, trips.into_iter().map(|(i, j, re, im)| (i, j, C64::new(re, im))).collect())
    }
}

prop_compose! {
    fn vector(n: usize)(v in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)) -> Vec<C64> {
        v.into_iter().map(|(re, im)| C64::new(re, im)).collect()
    }
}

proptest! {
    #[test]
    fn csr_products_agree_with_matvecs(a in sparse(9, 7), b in sparse(7, 11), c in sparse(9, 7), x in vector(11), y in vector(7)) {
        let ab = a.matmul(&b).unwrap();
        prop_assert!(close(&ab.mul_vec(&x), &a.mul_vec(&b.mul_vec(&x))));
        prop_assert!(close(&a.add(&c).unwrap().mul_vec(&y), &a.mul_vec(&y).iter().zip(c.mul_vec(&y)).map(|(p, q)| p + q).collect::<Vec<_>>()));
        prop_assert_eq!(a.transpose().transpose(), a.clone());
        let mut seq = vec![C64::new(0.0, 0.0); 9];
        let mut par = seq.clone();
        a.spmv_seq(&y, &mut seq);
        a.spmv_into(&y, &mut par);
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn periodic_restrictions_preserve_constants(half in 1usize..40, kind in prop_oneof![Just(Restriction1d::Nodal121), Just(Restriction1d::Cell1331), Just(Restriction1d::Cell11)]) {
        let r = build_restriction_1d(kind, 2 * half, true).unwrap();
        let ones = vec![C64::new(1.0, 0.0); r.ncols()];
        for v in r.mul_vec(&ones) {
            prop_assert!((v - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn odd_cell_counts_do_not_coarsen(half in 1usize..40) {
        prop_assert!(build_restriction_1d(Restriction1d::Cell11, 2 * half + 1, false).is_err());
    }

    #[test]
    fn periodic_gradient_annihilates_constants(nx in 4usize..12, ny in 4usize..12, h in 0.05..2.0f64) {
        let g = Grid::new(&[nx, ny], &[h, h]).unwrap().with_periodic(true);
        let grad = build_gradient(&g);
        let ones = vec![C64::new(1.0, 0.0); g.n_cells()];
        prop_assert!(grad.mul_vec(&ones).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn sponge_decays_into_the_interior(nx in 12usize..40, ny in 12usize..40, width in 1usize..6, g0 in 0.0..0.1f64, gmax in 0.0..7.0f64) {
        let grid = Grid::new(&[nx, ny], &[1.0, 1.0]).unwrap();
        let m = MediaModel::homogeneous(grid, 1.0, 2.0, 1.0).unwrap();
        let abc = AbcParams { width, gamma0: g0, gamma_max: gmax, ..Default::default() };
        let out = apply_abc(&m, &abc).unwrap();
        prop_assert!(out.gamma.iter().all(|&g| g >= g0 && g <= g0 + gmax + 1e-12));
        let row = ny / 2;
        for i in 1..nx / 2 {
            prop_assert!(out.gamma[i + nx * row] <= out.gamma[i - 1 + nx * row]);
        }
        prop_assert_eq!(out.gamma[nx / 2 + nx * row], g0);
    }

    #[test]
    fn ehgrid_roundtrip(nx in 1usize..9, ny in 1usize..9, hx in 0.01..10.0f64, hy in 0.01..10.0f64, seed in prop::collection::vec(1.0..6.0f64, 64)) {
        let grid = Grid::small(&[nx, ny], &[hx, hy]).unwrap();
        let n = nx * ny;
        let vp: Vec<f64> = seed[..n].to_vec();
        let e = EhGrid::new(grid, vp.iter().map(|v| 0.3 * v + 1.0).collect(), vp.clone(), vp.iter().map(|v| 0.4 * v).collect()).unwrap();
        prop_assert_eq!(EhGrid::parse(&e.to_bytes()).unwrap(), e);
    }
}
