use landau_core::snapshot::{
    read_coefficients, read_distribution, read_fields, write_coefficients, write_distribution,
    write_fields,
};
use landau_core::{profiles, CoefficientSolver, LandauError, VelocityGrid};
use proptest::prelude::*;

#[test]
fn header_layout() {
    let grid = VelocityGrid::new(4, 2.5).unwrap();
    let f = profiles::unit_maxwellian(&grid).with_time(0.75);
    let mut buf = Vec::new();
    write_distribution(&mut buf, &f).unwrap();
    assert_eq!(buf.len(), 24 + 8 * 64);
    assert_eq!(&buf[0..8], &4u64.to_le_bytes());
    assert_eq!(&buf[8..16], &2.5f64.to_le_bytes());
    assert_eq!(&buf[16..24], &0.75f64.to_le_bytes());
    let idx = grid.index(1, 2, 3);
    let at = 24 + 8 * idx;
    assert_eq!(&buf[at..at + 8], &f.values()[idx].to_le_bytes());
}

#[test]
fn distribution_roundtrip_is_bitwise() {
    let grid = VelocityGrid::new(8, 6.0).unwrap();
    let f = profiles::bimodal(&grid).with_time(1.25);
    let mut buf = Vec::new();
    write_distribution(&mut buf, &f).unwrap();
    let g = read_distribution(&mut buf.as_slice()).unwrap();
    assert_eq!(g.values(), f.values());
    assert_eq!(g.time(), 1.25);
    assert!(g.grid().same_as(f.grid()));
}

#[test]
fn coefficient_roundtrip_is_bitwise() {
    let grid = VelocityGrid::new(8, 6.0).unwrap();
    let c = CoefficientSolver::new(&grid)
        .compute(&profiles::unit_maxwellian(&grid))
        .unwrap();
    let mut buf = Vec::new();
    write_coefficients(&mut buf, &c, 0.5).unwrap();
    assert_eq!(buf.len(), 24 + 10 * 8 * grid.len());
    let (back, t) = read_coefficients(&mut buf.as_slice()).unwrap();
    assert_eq!(back, c);
    assert_eq!(t, 0.5);
}

#[test]
fn malformed_files_are_rejected() {
    let grid = VelocityGrid::new(4, 2.0).unwrap();
    let f = profiles::unit_maxwellian(&grid);
    let mut buf = Vec::new();
    write_distribution(&mut buf, &f).unwrap();
    for cut in [0, 10, 24, buf.len() - 1] {
        assert!(
            matches!(read_fields(&mut &buf[..cut]), Err(LandauError::Snapshot(_))),
            "cut {cut}"
        );
    }
    let mut odd = buf.clone();
    odd[0..8].copy_from_slice(&3u64.to_le_bytes());
    assert!(read_fields(&mut odd.as_slice()).is_err());
    let mut two = Vec::new();
    write_fields(&mut two, &grid, 0.0, &[f.values(), f.values()]).unwrap();
    assert!(read_distribution(&mut two.as_slice()).is_err());
    assert!(matches!(
        write_fields(&mut Vec::new(), &grid, 0.0, &[&[1.0, 2.0]]),
        Err(LandauError::GridMismatch(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn arbitrary_values_roundtrip(values in proptest::collection::vec(-1e300f64..1e300, 64), t in -1e9f64..1e9) {
        let grid = VelocityGrid::new(4, 3.0).unwrap();
        let mut buf = Vec::new();
        write_fields(&mut buf, &grid, t, &[&values]).unwrap();
        let (g, time, fields) = read_fields(&mut buf.as_slice()).unwrap();
        prop_assert!(g.same_as(&grid));
        prop_assert_eq!(time, t);
        prop_assert_eq!(&fields[0], &values);
    }
}
