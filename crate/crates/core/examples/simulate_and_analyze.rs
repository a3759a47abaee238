//! Seeded population, strategy-method dataset, CSV round trip and the
//! treatment comparisons.

use tpp_core::game::TreatmentId;
use tpp_core::simulate::{
    sample_population, simulate_dataset, AllocationRule, ChoiceDataset, ParamDist, PopulationSpec,
    RunManifest,
};
use tpp_core::stats::{analyze, format_summary, format_tests, Measure, RankSumMethod};

pub fn main() {
    let spec = PopulationSpec {
        c_material: ParamDist::uniform(0.2, 0.5),
        shared_concavity: true,
        ..PopulationSpec::point_mass(40, 7)
    };
    let treatments = [TreatmentId::P, TreatmentId::PI0, TreatmentId::I0];
    let agents = sample_population(&spec).unwrap();
    let data =
        simulate_dataset(&agents, &treatments, AllocationRule::MultinomialTokens, 0).unwrap();

    let dir = std::env::temp_dir().join(format!("tpp-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("choices.csv");
    data.write_csv(std::fs::File::create(&path).unwrap())
        .unwrap();
    let manifest = RunManifest::new(&spec, &treatments, AllocationRule::MultinomialTokens, false);
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).unwrap(),
    )
    .unwrap();

    let back = ChoiceDataset::read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, data);

    let report = analyze(&back, RankSumMethod::Auto).unwrap();
    print!("{}", format_summary(&report.summary, 2));
    println!();
    print!("{}", format_tests(&report.tests[..4], 4));

    let avg = |t, m| report.average(t, m).unwrap();
    println!();
    println!(
        "mean punishment P {:.2} > PI0 {:.2}; mean investment PI0 {:.2} >= I0 {:.2}",
        avg(TreatmentId::P, Measure::MeanPunishment),
        avg(TreatmentId::PI0, Measure::MeanPunishment),
        avg(TreatmentId::PI0, Measure::MeanInvestment),
        avg(TreatmentId::I0, Measure::MeanInvestment)
    );
    std::fs::remove_dir_all(&dir).ok();
}
