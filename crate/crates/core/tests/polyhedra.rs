#[path = "common/laws.rs"]
mod laws;

use laws::{eq, gamma, law, le, lin, points, poly, same, P};
use num_bigint::BigInt;
use unilab::numeric::Interval;

#[test]
fn assume_examples() {
    let top = P::top(["x", "y"]);
    let p = top.assume(&le(&[(1, "x"), (-1, "y")], 0)).unwrap();
    assert_eq!(p.render_lines(|v| v.to_string()), vec!["x - y ≤ 0"]);
    let p = poly(&["x"], vec![le(&[(-1, "x")], -1)]);
    assert!(p.assume(&le(&[(1, "x")], 0)).unwrap().is_bottom());
    let p = poly(&["x", "y"], vec![eq(&[(1, "x"), (-1, "y")], 0)]);
    let r = p.assume(&le(&[(1, "x")], 3)).unwrap();
    assert!(same(&r, &poly(&["x", "y"], vec![eq(&[(1, "x"), (-1, "y")], 0), le(&[(1, "x")], 3)])));
}

#[test]
fn unknown_dimension_is_an_error() {
    let p = P::top(["x"]);
    assert!(p.assume(&le(&[(1, "z")], 0)).is_err());
    assert!(p.assign(&"z", &lin(&[], 1)).is_err());
    assert!(p.join(&P::top(["y"])).is_err());
}

#[test]
fn assign_examples() {
    let p = poly(&["x", "y"], vec![le(&[(1, "x"), (-1, "y")], 0)]);
    let r = p.assign(&"y", &lin(&[(1, "y")], 1)).unwrap();
    // oracle: image of the box points under y := y + 1
    for pt in points(&["x", "y"]) {
        if p.contains(&pt) {
            let mut img = pt.clone();
            img.insert("y", &pt["y"] + 1);
            assert!(r.contains(&img));
        }
    }
    assert!(same(&r, &poly(&["x", "y"], vec![le(&[(1, "x"), (-1, "y")], -1)])));

    let p = poly(&["x"], vec![eq(&[(1, "x")], 2)]);
    let r = p.assign(&"x", &lin(&[(1, "x")], 3)).unwrap();
    assert!(same(&r, &poly(&["x"], vec![eq(&[(1, "x")], 5)])));

    let r = poly(&["x"], vec![eq(&[(1, "x")], 2)]).forget(&"x");
    assert!(r.is_top());
}

#[test]
fn join_examples() {
    let a = poly(&["x", "y"], vec![eq(&[(1, "x")], 0), eq(&[(1, "y")], 0)]);
    let b = poly(&["x", "y"], vec![eq(&[(1, "x")], 1), eq(&[(1, "y")], 1)]);
    let h = a.join(&b).unwrap();
    let expect = poly(
        &["x", "y"],
        vec![le(&[(-1, "x")], 0), le(&[(1, "x")], 1), eq(&[(1, "x"), (-1, "y")], 0)],
    );
    assert!(same(&h, &expect));
    assert!(same(&P::bottom(["x", "y"]).join(&a).unwrap(), &a));

    let a = poly(&["len", "i"], vec![eq(&[(1, "len")], 1), eq(&[(1, "i")], 1)]);
    let b = poly(&["len", "i"], vec![eq(&[(1, "len")], 2), eq(&[(1, "i")], 2)]);
    let expect = poly(
        &["len", "i"],
        vec![le(&[(-1, "i")], -1), le(&[(1, "i")], 2), eq(&[(1, "len"), (-1, "i")], 0)],
    );
    assert!(same(&a.join(&b).unwrap(), &expect));
}

#[test]
fn widen_examples() {
    let a = poly(&["x"], vec![le(&[(-1, "x")], 0), le(&[(1, "x")], 1)]);
    let b = poly(&["x"], vec![le(&[(-1, "x")], 0), le(&[(1, "x")], 2)]);
    assert!(same(&a.widen(&b, &[]).unwrap(), &poly(&["x"], vec![le(&[(-1, "x")], 0)])));
    assert_eq!(a.widen(&a, &[]).unwrap(), a);

    let base = |hi: i64| {
        poly(
            &["len", "i"],
            vec![eq(&[(1, "len"), (-1, "i")], 0), le(&[(-1, "i")], -1), le(&[(1, "i")], hi)],
        )
    };
    let w = base(2).widen(&base(3), &[]).unwrap();
    let expect = poly(&["len", "i"], vec![eq(&[(1, "len"), (-1, "i")], 0), le(&[(-1, "i")], -1)]);
    assert!(same(&w, &expect));

    let w = a.widen(&b, &[BigInt::from(10)]).unwrap();
    assert_eq!(w.bounds(&lin(&[(1, "x")], 0)), Interval::of(0, 10));
}

#[test]
fn project_examples() {
    let p = poly(&["x", "y"], vec![eq(&[(1, "x"), (-1, "y")], 0), le(&[(-1, "y")], 0), le(&[(1, "y")], 3)]);
    let r = p.project(&["x"].into_iter().collect());
    assert!(same(&r, &poly(&["x"], vec![le(&[(-1, "x")], 0), le(&[(1, "x")], 3)])));
    assert!(P::top(["x", "y"]).project(&["x"].into_iter().collect()).is_top());
    let p = poly(&["x", "y", "z"], vec![le(&[(1, "x"), (-1, "y")], 0), le(&[(1, "y"), (-1, "z")], 0)]);
    let r = p.project(&["x", "z"].into_iter().collect());
    assert!(same(&r, &poly(&["x", "z"], vec![le(&[(1, "x"), (-1, "z")], 0)])));
}

#[test]
fn expand_examples() {
    let p = poly(&["v"], vec![eq(&[(1, "v")], 3)]);
    let r = p.expand(&"v", "v2").unwrap();
    assert!(same(&r, &poly(&["v", "v2"], vec![eq(&[(1, "v")], 3), eq(&[(1, "v2")], 3)])));
    assert!(P::top(["v"]).expand(&"v", "v2").unwrap().is_top());
    assert!(p.expand(&"v", "v").is_err());

    let p = poly(&["v", "w"], vec![le(&[(-1, "v")], -1), le(&[(1, "v")], 2), le(&[(1, "v"), (-1, "w")], 0)]);
    let r = p.expand(&"v", "v2").unwrap();
    let dims = ["v", "v2", "w"];
    for pt in points(&dims) {
        let mut a = pt.clone();
        a.remove("v2");
        let mut b = pt.clone();
        b.remove("v");
        let bv = b.remove("v2").unwrap();
        b.insert("v", bv);
        assert_eq!(r.contains(&pt), p.contains(&a) && p.contains(&b));
    }
}

#[test]
fn fold_examples() {
    let p = poly(&["v", "v2"], vec![eq(&[(1, "v")], 1), eq(&[(1, "v2")], 2)]);
    let r = p.fold(&["v", "v2"], "v").unwrap();
    assert!(same(&r, &poly(&["v"], vec![le(&[(-1, "v")], -1), le(&[(1, "v")], 2)])));

    let p = poly(&["v", "v2", "w"], vec![le(&[(1, "v"), (-1, "w")], 0), le(&[(1, "v2"), (-1, "w")], 0)]);
    let r = p.fold(&["v", "v2"], "v").unwrap();
    assert!(same(&r, &poly(&["v", "w"], vec![le(&[(1, "v"), (-1, "w")], 0)])));
    assert!(p.fold(&[], "v").is_err());
}

#[test]
fn leq_examples() {
    let a = poly(&["x"], vec![eq(&[(1, "x")], 2)]);
    let b = poly(&["x"], vec![le(&[(-1, "x")], 0), le(&[(1, "x")], 5)]);
    assert!(a.leq(&b).unwrap());
    assert!(P::bottom(["x"]).leq(&a).unwrap());
    assert!(!b.leq(&a).unwrap());
}

#[test]
fn render_alphabet_style() {
    let p = poly(
        &["i", "len(s)", "ord(s)"],
        vec![
            eq(&[(1, "len(s)"), (-1, "i")], 0),
            le(&[(-1, "ord(s)")], -97),
            le(&[(1, "ord(s)"), (-1, "len(s)")], 96),
            le(&[(1, "i")], 26),
        ],
    );
    let lines = p.render_lines(|v| v.to_string());
    assert!(lines.contains(&"len(s) - i = 0".to_string()), "{lines:?}");
    assert!(lines.contains(&"ord(s) - len(s) ≤ 96".to_string()), "{lines:?}");
}

#[test]
fn gamma_helper_sanity() {
    let p = poly(&["x"], vec![le(&[(-1, "x")], 0), le(&[(1, "x")], 2)]);
    assert_eq!(gamma(&p, &["x"]).len(), 3);
}

#[test]
fn join_and_meet_bounds() {
    law("polyhedra join and meet bounds").unwrap();
}

#[test]
fn operations_contain_point_images() {
    law("polyhedra point images").unwrap();
}

#[test]
fn projection_matches_point_enumeration() {
    law("polyhedra projection vs enumeration").unwrap();
}

#[test]
fn hull_of_points_matches_vertex_oracle() {
    law("polyhedra hull vs vertex oracle").unwrap();
}

#[test]
fn fold_expand_identity() {
    law("polyhedra fold expand identity").unwrap();
}

#[test]
fn widening_terminates() {
    law("polyhedra widening termination").unwrap();
}

#[test]
fn results_are_canonical() {
    law("polyhedra canonical results").unwrap();
}

#[test]
fn meet_is_below_both_arguments_after_tightening() {
    let d = ["x", "y", "z"];
    let a = poly(&d, vec![le(&[(1, "x"), (2, "y"), (1, "z")], -1)]);
    let b = poly(
        &d,
        vec![
            eq(&[(1, "x"), (2, "y"), (-1, "z")], -1),
            le(&[(-3, "y"), (4, "z")], 4),
            le(&[(4, "y"), (1, "z")], -1),
        ],
    );
    let m = a.meet(&b).unwrap();
    assert!(m.leq(&a).unwrap());
    assert!(m.leq(&b).unwrap());
    for c in a.constraints().into_iter().chain(b.constraints()) {
        assert!(m.entails(c));
    }
}

#[test]
fn join_is_above_both_arguments_with_parity() {
    let d = ["x", "y", "z"];
    let a = poly(&d, vec![le(&[(1, "x"), (1, "y")], 0)]);
    let b = poly(&d, vec![eq(&[(2, "x"), (2, "y"), (1, "z")], 3), le(&[(-1, "z")], -2)]);
    let j = a.join(&b).unwrap();
    assert!(a.leq(&j).unwrap());
    assert!(b.leq(&j).unwrap());
}
