use super::*;
use crate::syntax::{parse_program, parse_term, TopFormKind};

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

/// Loads definitions and proofs, returning the outcome of each proof.
fn run(src: &str) -> Vec<(String, ProofOutcome)> {
    let mut db = RuleDb::with_axioms();
    let mut env = DefEnv::new();
    let mut out = Vec::new();
    for f in parse_program(src).unwrap() {
        match f.kind {
            TopFormKind::DefEquations(d) => {
                env.define_equations(&d).unwrap();
                db.add_definition(&d);
                db.infer_naturals(&env);
            }
            TopFormKind::Proof(p) => out.push((p.name.clone(), check_and_record(&p, &mut db, &env))),
            _ => {}
        }
    }
    out
}

const BOOLEAN: &str = "
(defproof and-def :goal (equal (and x y) (not (or (not x) (not y))))
  (chain (and x y)
    (= (and (not (not x)) y) double-negation)
    (= (and (not (not x)) (not (not y))) double-negation)
    (= (not (or (not x) (not y))) or-demorgan)))
(defproof not-false :goal (equal (not nil) t)
  (chain (not nil)
    (= (or (not nil) nil) or-identity)
    (= (implies nil nil) implication)
    (= t self-implication)))
(defproof not-true :goal (equal (not t) nil)
  (chain (not t)
    (= (not (not nil)) not-false)
    (= nil double-negation)))
(defproof and-null :goal (equal (and x nil) nil)
  (chain (and x nil)
    (= (not (or (not x) (not nil))) and-def)
    (= (not (or (not x) t)) not-false)
    (= (not t) or-null)
    (= nil not-true)))
";

#[test]
fn boolean_lemmas_and_absorption() {
    let src = format!(
        "{BOOLEAN}
(defproof absorption :goal (equal (and (or x y) y) y)
  (chain (and (or x y) y)
    (= (and (or x y) (or y nil)) or-identity)
    (= (and (or y x) (or y nil)) or-commutative)
    (= (or y (and x nil)) or-distributive)
    (= (or y nil) and-null)
    (= y or-identity)))"
    );
    for (name, o) in run(&src) {
        assert_eq!(o, ProofOutcome::Accepted, "{name}");
    }
}

#[test]
fn rejections() {
    let bad_label = format!(
        "{BOOLEAN}
(defproof absorption :goal (equal (and (or x y) y) y)
  (chain (and (or x y) y)
    (= (and (or x y) (or y nil)) or-identity)
    (= (and (or y x) (or y nil)) or-associative)
    (= (or y (and x nil)) or-distributive)))"
    );
    let (_, o) = run(&bad_label).pop().unwrap();
    assert!(matches!(o, ProofOutcome::RejectedAt { step: 2, reason: StepError::NoMatchingPosition, .. }), "{o:?}");

    let unknown = "(defproof p :goal (equal (or x nil) x) (chain (or x nil) (= x no-such-rule)))";
    let (_, o) = run(unknown).pop().unwrap();
    assert!(matches!(o, ProofOutcome::RejectedAt { step: 1, reason: StepError::UnknownLabel(_), .. }));

    let short = "(defproof p :goal (equal (or x nil) y) (chain (or x nil) (= x or-identity)))";
    let (_, o) = run(short).pop().unwrap();
    assert!(matches!(o, ProofOutcome::RejectedAt { step: 1, reason: StepError::ChainEndpointsWrong(_), .. }));
}

const APPEND: &str = "
(defequations append (xs ys) :sig (list any)
  (app0 (append nil ys) = ys)
  (app1 (append (cons x xs) ys) = (cons x (append xs ys))))
(defequations len (xs) :sig (list)
  (len0 (len nil) = 0)
  (len1 (len (cons x xs)) = (1+ (len xs))))
(defequations true-listp (xs) :sig (any)
  (tl0 (true-listp nil) = t)
  (tl1 (true-listp (cons x xs)) = (true-listp xs)))
(defequations prefix (n xs) :sig (nat list)
  (pfx0 (prefix 0 xs) = nil)
  (pfx- (prefix n nil) = nil)
  (pfx1 (prefix (1+ n) (cons x xs)) = (cons x (prefix n xs))))
";

fn app_assoc(ind_step: &str) -> String {
    format!(
        "{APPEND}
(defproof app-assoc
  :goal (equal (append xs (append ys zs)) (append (append xs ys) zs))
  :induct (list xs x1)
  (base (append nil (append ys zs))
    (= (append ys zs) app0)
    (= (append (append nil ys) zs) app0))
  (step (append (cons x1 xs) (append ys zs))
    (= (append (cons x1 xs) (append ys zs)) cons)
    (= (cons x1 (append xs (append ys zs))) app1)
    (= {ind_step} ind-hyp)
    (= (append (cons x1 (append xs ys)) zs) app1)
    (= (append (append (cons x1 xs) ys) zs) app1)
    (= (append (append (cons x1 xs) ys) zs) cons)))"
    )
}

#[test]
fn induction_on_lists() {
    let (_, o) = run(&app_assoc("(cons x1 (append (append xs ys) zs))")).pop().unwrap();
    assert_eq!(o, ProofOutcome::Accepted);
    let (_, o) = run(&app_assoc("(cons x1 (append (append xs zs) ys))")).pop().unwrap();
    assert!(matches!(o, ProofOutcome::RejectedAt { ref case, step: 3, .. } if case == "step"), "{o:?}");
}

#[test]
fn conditions_from_hypotheses() {
    let src = format!(
        "{APPEND}
(defproof app-pfx
  :goal (implies (true-listp xs) (equal (prefix (len xs) (append xs ys)) xs))
  :induct (list xs)
  (base (prefix (len nil) (append nil ys))
    (= (prefix 0 (append nil ys)) len0)
    (= (prefix 0 ys) app0)
    (= nil pfx0))
  (step (prefix (len (cons x0 xs)) (append (cons x0 xs) ys))
    (= (prefix (1+ (len xs)) (append (cons x0 xs) ys)) len1)
    (= (prefix (1+ (len xs)) (cons x0 (append xs ys))) app1)
    (= (cons x0 (prefix (len xs) (append xs ys))) pfx1)
    (= (cons x0 xs) ind-hyp)))"
    );
    let (_, o) = run(&src).pop().unwrap();
    assert_eq!(o, ProofOutcome::Accepted);

    // Without the hypothesis the inductive step cannot be applied.
    let weak = src.replace(
        "(implies (true-listp xs) (equal (prefix (len xs) (append xs ys)) xs))",
        "(equal (prefix (len xs) (append xs ys)) xs)",
    );
    let (_, o) = run(&weak).pop().unwrap();
    assert_eq!(o, ProofOutcome::Accepted);
}

#[test]
fn guarded_rule_needs_its_condition() {
    let rule = RewriteRule {
        label: "pos".into(),
        lhs: t("(f x)"),
        rhs: t("x"),
        condition: Some(t("(natp x)")),
        source: RuleSource::Axiom,
    };
    assert_eq!(rewrite_step(&t("(g (f 3))"), &t("(g 3)"), &rule, None, None), Ok(()));
    assert!(matches!(
        rewrite_step(&t("(g (f -3))"), &t("(g -3)"), &rule, None, None),
        Err(StepError::ConditionUnmet(_))
    ));
    assert!(matches!(rewrite_step(&t("(g (f y))"), &t("(g y)"), &rule, None, None), Err(StepError::ConditionUnmet(_))));
}

#[test]
fn positions_and_directions() {
    let rule = RewriteRule {
        label: "comm".into(),
        lhs: t("(or x y)"),
        rhs: t("(or y x)"),
        condition: None,
        source: RuleSource::Axiom,
    };
    let cur = t("(and (or a b) (or a b))");
    let next = t("(and (or b a) (or a b))");
    assert_eq!(rewrite_step(&cur, &next, &rule, Some(Direction::Forward), None), Ok(()));
    assert_eq!(rewrite_step(&cur, &next, &rule, None, Some(&[1])), Err(StepError::NoMatchingPosition));
    let same = t("(and (or a a) (or a a))");
    assert_eq!(rewrite_step(&same, &same, &rule, None, None), Err(StepError::AmbiguousWithoutPosition));
    assert_eq!(rewrite_step(&same, &same, &rule, None, Some(&[0])), Ok(()));

    let rule = RewriteRule {
        label: "id".into(),
        lhs: t("(or x nil)"),
        rhs: t("x"),
        condition: None,
        source: RuleSource::Axiom,
    };
    assert_eq!(
        rewrite_step(&t("y"), &t("(or y nil)"), &rule, Some(Direction::Forward), None),
        Err(StepError::NoMatchingPosition)
    );
    assert_eq!(rewrite_step(&t("y"), &t("(or y nil)"), &rule, Some(Direction::Reverse), None), Ok(()));
}

#[test]
fn arithmetic_steps() {
    let ctx = StepContext::default();
    let db = RuleDb::empty();
    let env = DefEnv::new();
    assert_eq!(check_step(&t("(f (+ 2 3))"), &t("(f 5)"), "arith", None, None, &ctx, &db, &env), Ok(()));
    assert!(check_step(&t("(f (+ 2 3))"), &t("(f 6)"), "arith", None, None, &ctx, &db, &env).is_err());
    assert!(check_step(&t("(f (+ n 0))"), &t("(f n)"), "arith", None, None, &ctx, &db, &env).is_err());
}
