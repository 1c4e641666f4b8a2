use malab::convex::NodeTag;
use malab::io::{
    fmt12, read_frame_csv, read_profile_csv, read_singular_csv, read_solution_csv, write_frame_csv, write_profile_csv,
    write_singular_csv, write_solution_csv, FrameRow, ProfileRow, SegmentRow, SolutionRow,
};
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-11 * a.abs().max(b.abs())
}

fn num() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3f64..1e3, -1e-6f64..1e-6, Just(0.0)]
}

fn text<T>(write: impl Fn(&mut Vec<u8>) -> malab::Result<T>) -> String {
    let mut buf = Vec::new();
    write(&mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

proptest! {
    #[test]
    fn fmt12_parses_back_within_twelve_digits(v in prop::num::f64::NORMAL) {
        let back: f64 = fmt12(v).parse().unwrap();
        prop_assert!(close(back, v));
        prop_assert_eq!(fmt12(back), fmt12(v));
    }

    #[test]
    fn frames_round_trip(rows in prop::collection::vec((num(), num(), 0usize..5000), 0..40)) {
        let rows: Vec<FrameRow> = rows.into_iter().map(|(x, y, cell)| FrameRow { x: [x, y], cell }).collect();
        let first = text(|b| write_frame_csv(&rows, b));
        let back = read_frame_csv(&first).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert!(close(a.x[0], b.x[0]) && close(a.x[1], b.x[1]) && a.cell == b.cell);
        }
        prop_assert_eq!(text(|b| write_frame_csv(&back, b)), first);
    }

    #[test]
    fn singular_edges_round_trip(rows in prop::collection::vec((num(), num(), num(), num(), 0.0f64..1e3), 0..40)) {
        let rows: Vec<SegmentRow> = rows.into_iter().map(|(a, b, c, d, f)| SegmentRow { a: [a, b], b: [c, d], f }).collect();
        let first = text(|b| write_singular_csv(&rows, b));
        let back = read_singular_csv(&first).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert!(close(a.a[0], b.a[0]) && close(a.b[1], b.b[1]) && close(a.f, b.f));
        }
        prop_assert_eq!(text(|b| write_singular_csv(&back, b)), first);
    }

    #[test]
    fn profiles_round_trip(dim in 1usize..=2, rows in prop::collection::vec((num(), num(), num(), 0.0f64..1.0, num()), 1..30)) {
        let rows: Vec<ProfileRow> = rows
            .into_iter()
            .map(|(s1, s2, excess, cell, f)| ProfileRow { s: if dim == 1 { vec![s1] } else { vec![s1, s2] }, excess, cell, f })
            .collect();
        let first = text(|b| write_profile_csv(&rows, b));
        let back = read_profile_csv(&first).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!(a.s.len(), b.s.len());
            prop_assert!(close(a.f, b.f) && close(a.excess, b.excess));
        }
        prop_assert_eq!(text(|b| write_profile_csv(&back, b)), first);
    }

    #[test]
    fn solutions_round_trip(dim in 2usize..=3, rows in prop::collection::vec((num(), num(), num(), num(), num(), any::<bool>(), any::<bool>()), 1..30)) {
        let rows: Vec<SolutionRow> = rows
            .into_iter()
            .map(|(x, y, z, u, atom, boundary, contact)| SolutionRow {
                x: [x, y, if dim == 3 { z } else { 0.0 }],
                u,
                atom: atom.abs(),
                mu: atom.abs(),
                tag: if boundary { NodeTag::Boundary } else { NodeTag::Interior },
                contact,
            })
            .collect();
        let first = text(|b| write_solution_csv(dim, &rows, b));
        let (d, back) = read_solution_csv(&first).unwrap();
        prop_assert_eq!(d, dim);
        for (a, b) in rows.iter().zip(&back) {
            prop_assert!(close(a.u, b.u) && a.tag == b.tag && a.contact == b.contact);
        }
        prop_assert_eq!(text(|b| write_solution_csv(dim, &back, b)), first);
    }

    #[test]
    fn readers_reject_garbage_without_panicking(s in "\\PC{0,200}") {
        let _ = read_frame_csv(&s);
        let _ = read_singular_csv(&s);
        let _ = read_profile_csv(&s);
        let _ = read_solution_csv(&s);
        let _ = malab::io::read_pl_csv(&s);
        let _ = malab::config::RunConfig::from_toml(&s);
    }
}
