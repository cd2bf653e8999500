//! External scorer client against small shell-script scorers.

use std::sync::Arc;
use std::time::Duration;

use interplay_core::scorer::protocol::{ExternalGame, ExternalScorer, ScorerEndpoint};
use interplay_core::{Coalition, Error, Game};

const HELLO: &str = r#"echo '{"protocol":1,"n":3,"input_ids":["x"]}'"#;

fn scorer(script: &str, timeout_ms: u64) -> interplay_core::Result<ExternalScorer> {
    let ep = ScorerEndpoint { command: vec!["sh".into(), "-c".into(), script.into()], batch_limit: 4, timeout_ms };
    ExternalScorer::spawn(ep)
}

fn coalitions(count: u64) -> Vec<Coalition> {
    (0..count).map(|b| Coalition::from_bits(3, b % 8).unwrap()).collect()
}

/// Answers each request with its id as the score, reading ids with sed.
const ECHO_IDS: &str = r#"while read line; do id=$(echo "$line" | sed 's/.*"id":\([0-9]*\).*/\1/'); echo "{\"id\":$id,\"score\":$id.5}"; done"#;

#[test]
fn scores_are_matched_by_id_across_batches() {
    let s = scorer(&format!("{HELLO}; {ECHO_IDS}"), 5000).unwrap();
    assert_eq!(s.handshake().input_ids, vec!["x".to_string()]);
    let scores = s.evaluate("x", 0, &coalitions(10)).unwrap();
    assert_eq!(scores, (0..10).map(|k| k as f64 + 0.5).collect::<Vec<_>>());
    // ids keep increasing across calls
    assert_eq!(s.evaluate("x", 0, &coalitions(1)).unwrap(), vec![10.5]);
}

#[test]
fn out_of_order_responses_are_reassembled() {
    // reads a full batch of four, answers in reverse order
    let script = format!(
        r#"{HELLO}; while read a && read b && read c && read d; do for l in "$d" "$c" "$b" "$a"; do id=$(echo "$l" | sed 's/.*"id":\([0-9]*\).*/\1/'); echo "{{\"id\":$id,\"score\":$id}}"; done; done"#
    );
    let s = scorer(&script, 5000).unwrap();
    assert_eq!(s.evaluate("x", 0, &coalitions(8)).unwrap(), (0..8).map(f64::from).collect::<Vec<_>>());
}

#[test]
fn external_game_checks_input_ids() {
    let s = Arc::new(scorer(&format!("{HELLO}; {ECHO_IDS}"), 5000).unwrap());
    assert!(ExternalGame::new(s.clone(), "nope", 0).is_err());
    let g = ExternalGame::new(s, "x", 0).unwrap();
    assert_eq!(g.n(), 3);
    assert_eq!(g.evaluate(Coalition::empty(3)).unwrap(), 0.5);
}

#[test]
fn silent_scorer_times_out() {
    let s = scorer(&format!("{HELLO}; sleep 5"), 200).unwrap();
    assert!(matches!(s.evaluate("x", 0, &coalitions(1)), Err(Error::Timeout(d)) if d == Duration::from_millis(200)));
}

#[test]
fn malformed_and_unexpected_responses_are_violations() {
    let garbage = scorer(&format!("{HELLO}; read l; echo 'not json'"), 5000).unwrap();
    assert!(matches!(garbage.evaluate("x", 0, &coalitions(1)), Err(Error::ProtocolViolation(_))));

    let wrong_id = scorer(&format!(r#"{HELLO}; read l; echo '{{"id":99,"score":1}}'"#), 5000).unwrap();
    assert!(matches!(wrong_id.evaluate("x", 0, &coalitions(1)), Err(Error::ProtocolViolation(_))));

    let bad_handshake = scorer("echo '{\"protocol\":2,\"n\":3,\"input_ids\":[]}'", 5000);
    assert!(matches!(bad_handshake, Err(Error::ProtocolViolation(_))));
}

#[test]
fn error_responses_and_early_exit() {
    let failing = scorer(&format!(r#"{HELLO}; read l; echo '{{"id":0,"error":"model crashed"}}'; cat >/dev/null"#), 5000).unwrap();
    assert!(matches!(failing.evaluate("x", 0, &coalitions(1)), Err(Error::EvaluationFailed(m)) if m.contains("model crashed")));

    let quitter = scorer(&format!("{HELLO}; exit 0"), 5000).unwrap();
    assert!(matches!(quitter.evaluate("x", 0, &coalitions(1)), Err(Error::ScorerUnavailable(_))));
}
