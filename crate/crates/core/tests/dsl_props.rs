use proptest::prelude::*;
use steer_core::geometry::GraspApproachClass;
use steer_core::language::{parse_rendered, ReorientDirection, RenderedSkill};
use steer_core::orchestrator::{parse_plan, Plan};
use steer_core::skill::SkillCall;

fn object() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::collection::vec("[a-z]{1,8}", 1..4).prop_map(|w| w.join(" ")),
        "[a-zA-Z0-9 \"\\\\#();,'-]{1,16}".prop_filter("non-blank", |s| !s.trim().is_empty()),
    ]
}

fn call() -> impl Strategy<Value = SkillCall> {
    let approach = prop_oneof![
        Just(GraspApproachClass::TopDown),
        Just(GraspApproachClass::Side),
        Just(GraspApproachClass::Diagonal)
    ];
    let direction = prop_oneof![Just(ReorientDirection::ToHorizontal), Just(ReorientDirection::ToUpright)];
    prop_oneof![
        (object(), approach).prop_map(|(o, a)| SkillCall::grasp(o, a)),
        (object(), direction).prop_map(|(o, d)| SkillCall::reorient(o, d)),
        object().prop_map(SkillCall::lift),
        object().prop_map(SkillCall::place),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parse_inverts_render(calls in prop::collection::vec(call(), 1..8)) {
        let plan = Plan::from_calls(calls.clone());
        prop_assert_eq!(parse_plan(&plan.source_text).unwrap().calls, calls);
    }

    #[test]
    fn rendered_language_parses_back(call in call()) {
        let parsed = parse_rendered(&call.render_language()).unwrap();
        prop_assert_eq!(parsed.kind(), call.kind());
        prop_assert_eq!(parsed.object(), call.object());
        match (&parsed, &call) {
            (RenderedSkill::Grasp { approach: a, .. }, SkillCall::Grasp { approach: b, .. }) => prop_assert_eq!(a, b),
            (RenderedSkill::Reorient { direction: a, .. }, SkillCall::Reorient { direction: b, .. }) => prop_assert_eq!(a, b),
            _ => {}
        }
    }

    #[test]
    fn json_form_round_trips(call in call()) {
        let json = serde_json::to_string(&call).unwrap();
        prop_assert_eq!(serde_json::from_str::<SkillCall>(&json).unwrap(), call);
    }
}
