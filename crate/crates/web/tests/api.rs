use ztids_web::{regions, score, smote, ModelChoice, Points, RegionRequest, ScoreRequest, SmoteRequest};

fn two_clusters() -> Points {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for i in 0..20 {
        let t = i as f64 / 20.0;
        points.push([0.1 + 0.2 * t, 0.2 + 0.1 * (t * 7.0).sin().abs()]);
        labels.push(0);
    }
    for i in 0..5 {
        let t = i as f64 / 5.0;
        points.push([0.7 + 0.1 * t, 0.8 - 0.1 * t]);
        labels.push(1);
    }
    Points { points, labels }
}

fn region_request(model: ModelChoice) -> RegionRequest {
    RegionRequest {
        data: two_clusters(),
        model,
        max_depth: None,
        n_trees: 10,
        smote: false,
        grid: 20,
        bounds: [0.0, 1.0, 0.0, 1.0],
        seed: 1,
    }
}

#[test]
fn smote_fills_the_minority() {
    let req = SmoteRequest { data: two_clusters(), k: 3, seed: 9 };
    let resp = smote(&req).unwrap();
    assert_eq!(resp.points.len(), 15);
    assert!(resp.labels.iter().all(|&c| c == 1));
    for p in &resp.points {
        assert!((0.7..=0.8).contains(&p[0]) && (0.7..=0.8).contains(&p[1]), "{p:?}");
    }
}

#[test]
fn every_model_separates_two_clusters() {
    for model in [ModelChoice::DecisionTree, ModelChoice::RandomForest, ModelChoice::Svm] {
        let resp = regions(&region_request(model)).unwrap();
        assert_eq!(resp.cells.len(), 400);
        assert_eq!(resp.train_metrics.accuracy, 1.0, "{model:?}");
        assert_eq!(resp.cells[0], 0);
        assert_eq!(resp.cells[399], 1);
        assert_eq!(resp.rules.is_some(), model == ModelChoice::DecisionTree);
    }
}

#[test]
fn tree_rules_use_input_coordinates() {
    let resp = regions(&region_request(ModelChoice::DecisionTree)).unwrap();
    let rules = resp.rules.unwrap();
    let first = rules.lines().next().unwrap();
    let t: f64 = first.split("<= ").nth(1).unwrap().trim_end_matches('?').parse().unwrap();
    assert!((0.3..0.8).contains(&t), "{rules}");
    assert!(rules.contains("class class1 (5 rows)"), "{rules}");
}

#[test]
fn smote_option_grows_the_training_set() {
    let mut req = region_request(ModelChoice::RandomForest);
    req.smote = true;
    assert_eq!(regions(&req).unwrap().rows_trained_on, 40);
}

#[test]
fn rejects_bad_requests() {
    let mut req = region_request(ModelChoice::Svm);
    req.grid = 0;
    assert!(regions(&req).is_err());
    let empty = SmoteRequest { data: Points { points: vec![], labels: vec![] }, k: 5, seed: 0 };
    assert!(smote(&empty).is_err());
}

#[test]
fn scores_label_lists() {
    let req = ScoreRequest {
        truth: vec![0, 0, 1, 1, 2],
        predicted: vec![0, 1, 1, 1, 2],
        classes: vec!["A".into(), "B".into(), "C".into()],
    };
    let m = score(&req).unwrap();
    assert!((m.accuracy - 0.8).abs() < 1e-12);
    assert_eq!(format!("{:.6}", m.weighted_f1), "0.786667");
}

#[test]
fn json_entry_points_round_trip() {
    let out = ztids_web::smote_points(r#"{"points": [[0,0],[1,1],[0,1],[5,5],[5,6],[6,5],[6,6]], "labels": [0,0,0,1,1,1,1]}"#)
        .ok()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["labels"].as_array().unwrap().len(), 1);
}
