#![allow(dead_code)]

use imlab::*;

pub fn skew() -> SkewMap64 {
    let base = AnosovBase64::new(8, 7, 1, 1).unwrap();
    let prof = make_profile(&base, &ProfileParams::default()).unwrap();
    SkewMap::new_unchecked(base, prof)
}

pub fn map(stage: Stage) -> LayeredMap64 {
    let da = (stage >= Stage::F1).then(DAParams::default);
    let push = (stage >= Stage::F).then(PushParams::default);
    LayeredMap::new(skew(), da, push, stage).unwrap()
}

pub fn quick_classify() -> ClassifyParams {
    ClassifyParams {
        n_transient: 2_000,
        window: 500,
        n_max: 20_000,
        ..ClassifyParams::default()
    }
}
