mod common;

use common::*;
use proptest::prelude::*;
use threadlint::classmodel::ClassModel;
use threadlint::config::{AnalysisConfig, Rule};
use threadlint::frontend::*;
use threadlint::hboracle::trace::{format_execution, parse_execution, parse_program};
use threadlint::hboracle::*;
use threadlint::raceanalysis::analyze_class;

#[test]
fn example_trace_races() {
    let text = std::fs::read_to_string(fixture("traces/example1.trace")).unwrap();
    let e = parse_execution(&text).unwrap();
    let hb = hb_closure(&e).unwrap();
    // t1 read (1) and t2 write (6); t2 read (2) and t1 write (5)
    assert!(!hb.ordered(1, 6) && !hb.ordered(6, 1));
    assert!(!hb.ordered(2, 5) && !hb.ordered(5, 2));
    let races = detect_races(&e).unwrap();
    assert!(races.contains(&(1, 6)) && races.contains(&(6, 1)));
}

#[test]
fn locked_trace_orders_through_unlock() {
    let text = std::fs::read_to_string(fixture("traces/counter_ts.trace")).unwrap();
    let e = parse_execution(&text).unwrap();
    let hb = hb_closure(&e).unwrap();
    let write1 = e.actions.iter().position(|a| a.thread == 1 && a.op == Op::Write).unwrap();
    let read2 = e.actions.iter().position(|a| a.thread == 2 && a.op == Op::Read).unwrap();
    assert!(hb.ordered(write1, read2));
    assert!(detect_races(&e).unwrap().is_empty());
    let p = parse_program(&text).unwrap();
    let r = program_races(&p, None).unwrap();
    assert_eq!((r.executions, r.racy), (2, false));
}

#[test]
fn volatile_only_class_has_no_races() {
    let src = "@ThreadSafe public class V { private volatile int v;\n public void set() { v = 1; }\n public int get() { return v; } }";
    let ast = parse_compilation_unit(&SourceFile::new("V.java", src)).unwrap();
    let cfg = AnalysisConfig::default();
    let cm = ClassModel::build(&ast, &ast.classes[0], &cfg);
    let d = driver_from_class(&cm).unwrap();
    assert_eq!(d.programs.len(), 3);
    for dp in &d.programs {
        for t in &dp.program.threads[1..] {
            assert!(t.iter().all(|a| matches!(a.op, Op::VolatileRead | Op::VolatileWrite)));
        }
        assert!(!program_races(&dp.program, None).unwrap().racy);
    }
}

#[test]
fn larger_random_corpus_agrees() {
    let cfg = AnalysisConfig::default();
    for (name, text) in oracle_corpus(99, 120) {
        let ast = parse_compilation_unit(&SourceFile::new(format!("{name}.java"), text.as_str())).unwrap();
        let cm = ClassModel::build(&ast, &ast.classes[0], &cfg);
        let alerts = analyze_class(&cm, &Rule::ALL).alerts;
        let d = driver_from_class(&cm).unwrap();
        let racy = d.programs.iter().any(|dp| program_races(&dp.program, Some(1_000_000)).unwrap().racy);
        assert!(!alerts.is_empty() || !racy, "{name} has no alerts but races:\n{text}");
    }
}

#[test]
fn reassigned_thread_safe_field_is_a_known_miss() {
    // fields of allowlisted types need no synchronization, but replacing
    // the object itself is still a race
    let src = "import java.util.concurrent.ConcurrentHashMap;\n@ThreadSafe public class M {\n\
               private ConcurrentHashMap<String, String> m;\n\
               public void reset() { m = new ConcurrentHashMap<>(); } }";
    let ast = parse_compilation_unit(&SourceFile::new("M.java", src)).unwrap();
    let cfg = AnalysisConfig::default();
    let cm = ClassModel::build(&ast, &ast.classes[0], &cfg);
    assert!(analyze_class(&cm, &Rule::ALL).alerts.is_empty());
    let d = driver_from_class(&cm).unwrap();
    assert!(program_races(&d.programs[0].program, None).unwrap().racy);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn races_are_symmetric_and_never_involve_init(seed in any::<u64>()) {
        let e = random_execution(&mut rng(seed), 12);
        let races = detect_races(&e).unwrap();
        for &(a, b) in &races {
            prop_assert!(races.contains(&(b, a)));
            prop_assert!(e.actions[a].thread != e.actions[b].thread);
            prop_assert!(!e.actions[a].op.is_init());
        }
    }

    #[test]
    fn trace_text_round_trips(seed in any::<u64>()) {
        let e = random_execution(&mut rng(seed), 12);
        let back = parse_execution(&format_execution(&e)).unwrap();
        let strip = |e: &Execution| e.actions.iter().map(|a| (a.thread, a.op, a.target.clone(), a.seq)).collect::<Vec<_>>();
        prop_assert_eq!(strip(&back), strip(&e));
    }

    #[test]
    fn every_enumerated_execution_is_well_formed(seed in any::<u64>()) {
        let e = random_execution(&mut rng(seed), 10);
        let text = format_execution(&e);
        let p = parse_program(&text).unwrap();
        let mut count = 0;
        for exec in enumerate_executions(&p, None).unwrap() {
            let exec = exec.unwrap();
            if !exec.deadlocked {
                prop_assert_eq!(exec.actions.len(), e.actions.len());
            }
            prop_assert!(check_well_formed(&exec).is_ok());
            count += 1;
        }
        prop_assert!(count >= 1);
    }
}
