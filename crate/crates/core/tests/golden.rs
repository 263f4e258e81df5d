mod common;

#[test]
fn scale() {
    let (want, got) = common::golden("scale");
    assert_eq!(got, want);
    assert_eq!(
        got.lines()
            .filter(|l| l.trim_start().starts_with("for "))
            .count(),
        1
    );
}

#[test]
fn dot() {
    let (want, got) = common::golden("dot");
    assert_eq!(got, want);
    assert!(got.contains("while "));
    assert_eq!(got.matches("advance ").count(), 2);
}

#[test]
fn spmspm() {
    let (want, got) = common::golden("spmspm");
    assert_eq!(got, want);
    assert!(got.contains("ws = expand(5)") && got.contains("compress ws into C(i,:)"));
}
