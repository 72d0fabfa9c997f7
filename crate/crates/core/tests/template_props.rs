mod common;

use common::*;
use llmtd_core::template::{
    is_constant_specialization, is_word_atomic_generalization, language_subset, strict_subset,
    Template,
};
use llmtd_core::LogMessage;
use proptest::prelude::*;

fn t(s: &str) -> Template {
    Template::parse(s).unwrap()
}

#[test]
fn publickey_example_agrees_with_regex_oracle() {
    let tpl = t("sshd[<*>]: Accepted publickey for <*> from <*> port <*> ssh2");
    let text = "sshd[12992]: Accepted publickey for john from 10.1.1.1 port 53323 ssh2";
    let expected = oracle_regex(&tpl).is_match(text);
    assert!(expected);
    assert_eq!(tpl.matches(text), expected);
}

#[test]
fn prefix_suffix_pair_by_enumeration() {
    let (x, y) = (t("<*> b"), t("a <*>"));
    let strings = all_strings(6);
    let (mx, my) = (membership(&x, &strings), membership(&y, &strings));
    // frozen from the enumeration: neither includes the other
    assert!(!bitmap_subset(&mx, &my));
    assert!(!bitmap_subset(&my, &mx));
    assert!(!language_subset(&x, &y));
    assert!(!language_subset(&y, &x));
}

#[test]
fn inclusion_is_a_preorder_on_small_templates() {
    let ts = all_templates(&all_literals(1), 4);
    let n = ts.len();
    let rel: Vec<Vec<bool>> = ts
        .iter()
        .map(|a| ts.iter().map(|b| language_subset(a, b)).collect())
        .collect();
    for i in 0..n {
        assert!(rel[i][i]);
        for j in 0..n {
            if !rel[i][j] {
                continue;
            }
            for k in 0..n {
                if rel[j][k] {
                    assert!(rel[i][k], "{} <= {} <= {}", ts[i], ts[j], ts[k]);
                }
            }
        }
    }
}

#[test]
fn distinct_normal_forms_have_distinct_languages() {
    let ts = all_templates(&all_literals(2), 3);
    for a in &ts {
        for b in &ts {
            if a != b {
                assert!(
                    !(language_subset(a, b) && language_subset(b, a)),
                    "{a} and {b} denote the same language"
                );
            }
        }
    }
}

fn template_strategy() -> impl Strategy<Value = Template> {
    // small alphabet plus a non-ASCII character and one the other templates never use
    let lit = "[ab é:-]{1,3}";
    prop::collection::vec(prop_oneof![lit.prop_map(Some), Just(None)], 1..6).prop_filter_map(
        "whitespace-only",
        |parts| {
            let text: String = parts
                .iter()
                .map(|p| p.as_deref().unwrap_or("<*>"))
                .collect();
            Template::parse(&text).ok()
        },
    )
}

/// Strings that are likely to hit a template: instantiate it with short fillers.
fn instance(tpl: &Template, fillers: &[String]) -> String {
    let mut k = 0;
    tpl.tokens()
        .iter()
        .map(|tok| match tok.literal() {
            Some(s) => s.to_owned(),
            None => {
                k += 1;
                fillers[k % fillers.len()].clone()
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn matches_agrees_with_regex(tpl in template_strategy(), text in "[ab é:-]{0,10}",
                                 fillers in prop::collection::vec("[ab é:z-]{0,3}", 1..4)) {
        let re = oracle_regex(&tpl);
        prop_assert_eq!(tpl.matches(&text), re.is_match(&text));
        let inst = instance(&tpl, &fillers);
        prop_assert_eq!(tpl.matches(&inst), re.is_match(&inst));
    }

    #[test]
    fn roundtrip(tpl in template_strategy()) {
        let again = Template::parse(&tpl.to_string()).unwrap();
        prop_assert_eq!(again.tokens(), tpl.tokens());
    }

    #[test]
    fn literal_only_template_matches_itself_only(text in "[ab:]{1,6}", other in "[ab:]{0,7}") {
        let tpl = Template::parse(&text).unwrap();
        prop_assert!(tpl.matches(&text));
        prop_assert_eq!(tpl.matches(&other), other == text);
    }

    #[test]
    fn inclusion_is_coherent_with_match_sets(a in template_strategy(), b in template_strategy(),
                                             fillers in prop::collection::vec("[ab é:z-]{1,3}", 1..4)) {
        let texts = [instance(&a, &fillers), instance(&b, &fillers), "a".into(), "ab:b".into()];
        let log: Vec<LogMessage> = texts.iter().enumerate().map(|(i, s)| LogMessage::bare(i, s)).collect();
        if language_subset(&a, &b) {
            prop_assert!(a.match_set(&log).is_subset(&b.match_set(&log)));
        }
        if strict_subset(&a, &b) {
            prop_assert!(!language_subset(&b, &a));
        }
    }

    #[test]
    fn structural_relations_are_sound(v in template_strategy(), picks in prop::collection::vec(any::<Option<u8>>(), 8)) {
        // constant specialization: replace some wildcards with constants
        let mut k = 0;
        let specialized: String = v.tokens().iter().map(|tok| match tok.literal() {
            Some(s) => s.to_owned(),
            None => {
                k += 1;
                match picks[k % picks.len()] {
                    Some(c) => ["x", "ab", "é é", ":"][c as usize % 4].to_owned(),
                    None => "<*>".to_owned(),
                }
            }
        }).collect();
        let tc = Template::parse(&specialized).unwrap();
        prop_assert!(is_constant_specialization(&tc, &v), "{} from {}", tc, v);
        prop_assert!(language_subset(&tc, &v));

        // word-atomic generalization: wildcard some eligible words
        let mut w = 0;
        let gen: String = v.as_str().split(' ').map(|word| {
            w += 1;
            let eligible = word.contains("<*>") && word != "<*>";
            if eligible && picks[w % picks.len()].is_some() { "<*>".to_owned() } else { word.to_owned() }
        }).collect::<Vec<_>>().join(" ");
        if let Ok(tg) = Template::parse(&gen) {
            if is_word_atomic_generalization(&tg, &v) {
                prop_assert!(language_subset(&v, &tg), "{} vs {}", v, tg);
            }
        }
    }
}
