mod common;

use common::toy::{toy, toy_design_matches_hand_enumeration, toy_dir};

use chrono::{Datelike, NaiveDate, Weekday};
use proptest::prelude::*;
use sv_calendar::data::*;

#[test]
fn toy_fixture_design() {
    assert!(toy_design_matches_hand_enumeration());
    let ing = toy();
    assert_eq!(ing.returns.len(), 14);
    assert_eq!(ing.design.dates[0], NaiveDate::from_ymd_opt(2017, 7, 2).unwrap());
    assert_eq!(ing.design.dates[14], NaiveDate::from_ymd_opt(2017, 7, 16).unwrap());
    assert_eq!(ing.design.labels, design_labels());
    let data = ing.dataset::<f64>().unwrap();
    assert_eq!(data.n_obs(), 14);
    assert_eq!(data.n_covariates(), 19);
}

#[test]
fn toy_fixture_groups() {
    let ing = toy();
    let weekdays = slice_by_weekday(&ing.returns, &ing.return_dates);
    assert!(weekdays.iter().all(|(_, g)| g.len() == 2));
    let groups =
        slice_by_holiday_class(&ing.returns, &ing.return_dates, &ing.calendars, DesignOptions::default()).unwrap();
    let us: Vec<usize> = groups
        .iter()
        .filter(|g| g.country == Country::UnitedStates)
        .map(|g| g.values.len())
        .collect();
    assert_eq!(us, vec![1, 1, 1]);
    assert!(groups
        .iter()
        .filter(|g| g.country != Country::UnitedStates)
        .all(|g| g.values.is_empty()));
    // the US holiday-class returns are those dated 07-03, 07-04, 07-05
    let idx = |day: u32| {
        ing.return_dates
            .iter()
            .position(|d| *d == NaiveDate::from_ymd_opt(2017, 7, day).unwrap())
            .unwrap()
    };
    let us_groups: Vec<&HolidayGroup> = groups.iter().filter(|g| g.country == Country::UnitedStates).collect();
    assert_eq!(us_groups[0].values, vec![ing.returns[idx(3)]]);
    assert_eq!(us_groups[1].values, vec![ing.returns[idx(4)]]);
    assert_eq!(us_groups[2].values, vec![ing.returns[idx(5)]]);

    let report = weekday_report(&ing.returns, &ing.return_dates);
    assert_eq!(report.len(), 8);
    assert_eq!(report[0].group, "All");
    assert_eq!(report[0].obs, 14);
}

#[test]
fn toy_returns_match_log_ratio() {
    let ing = toy();
    let p = ing.series.prices();
    for (t, y) in ing.returns.iter().enumerate() {
        let expected = 100.0 * (p[t + 1] / p[t]).ln();
        assert!((y - expected).abs() < 1e-12);
    }
}

#[test]
fn missing_holiday_file_names_the_path() {
    let dir = toy_dir();
    let missing = dir.join("no_such_file.txt");
    let p = dir.join("jp.txt");
    let err = ingest(&dir.join("prices.csv"), [&p, &p, &p, &missing], DesignOptions::default()).unwrap_err();
    assert!(err.is_data_error());
    assert!(err.to_string().contains("no_such_file.txt"), "{err}");
}

#[test]
fn design_and_returns_files_round_trip() {
    let ing = toy();
    let dir = tempfile::tempdir().unwrap();
    let (r, d) = (dir.path().join("returns.csv"), dir.path().join("design.csv"));
    write_returns(&r, &ing.return_dates, &ing.returns).unwrap();
    write_design(&d, &ing.design).unwrap();
    let (dates, data) = load_dataset::<f64>(&r, &d).unwrap();
    assert_eq!(dates, ing.design.dates);
    assert_eq!(data.returns(), ing.returns.as_slice());
    assert_eq!(data, ing.dataset::<f64>().unwrap());
}

fn date_strategy() -> impl Strategy<Value = NaiveDate> {
    (0i64..2000).prop_map(|off| NaiveDate::from_ymd_opt(2013, 1, 1).unwrap() + chrono::Days::new(off as u64))
}

proptest! {
    #[test]
    fn returns_invert_cumulative_exponentiation(returns in prop::collection::vec(-30.0f64..30.0, 2..200)) {
        let series = PriceSeries::from_returns(NaiveDate::from_ymd_opt(2015, 3, 1).unwrap(), 250.0, &returns).unwrap();
        let back = compute_returns(&series).unwrap();
        for (a, b) in returns.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn design_indicator_structure(
        start in date_strategy(),
        len in 2usize..120,
        holidays in prop::collection::vec((0usize..4, 0i64..130), 0..40),
        weekend_rule in any::<bool>(),
    ) {
        let dates = consecutive_dates(start, len).unwrap();
        let mut cals: Vec<HolidayCalendar> = Country::ALL.iter().map(|&c| HolidayCalendar::empty(c)).collect();
        for (c, off) in holidays {
            cals[c].holidays.insert(start + chrono::Days::new(off as u64));
        }
        let options = DesignOptions { weekend_rule };
        let m = build_design_matrix(&dates, &cals, options).unwrap();
        for (i, date) in dates.iter().enumerate() {
            prop_assert_eq!(m.values[(i, 0)], 1.0);
            for j in 1..19 {
                let v = m.values[(i, j)];
                prop_assert!(v == 0.0 || v == 1.0);
            }
            let dow: f64 = (1..7).map(|j| m.values[(i, j)]).sum();
            prop_assert_eq!(dow, if date.weekday() == Weekday::Wed { 0.0 } else { 1.0 });
            for c in 0..4 {
                let (pre, hol, post) = (m.values[(i, 7 + c)], m.values[(i, 11 + c)], m.values[(i, 15 + c)]);
                if hol == 1.0 {
                    prop_assert_eq!(pre, 0.0);
                    prop_assert_eq!(post, 0.0);
                }
                if weekend_rule && matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
                    prop_assert_eq!(pre, 0.0);
                    prop_assert_eq!(post, 0.0);
                }
            }
        }
        // slices partition consistently with the design
        let returns: Vec<f64> = (0..len).map(|i| i as f64).collect();
        let groups = slice_by_holiday_class(&returns, &dates, &cals, options).unwrap();
        for (g_idx, g) in groups.iter().enumerate() {
            let col = 7 + g_idx;
            let count = (0..len).filter(|&i| m.values[(i, col)] == 1.0).count();
            prop_assert_eq!(g.values.len(), count);
        }
        let weekday_total: usize = slice_by_weekday(&returns, &dates).iter().map(|(_, g)| g.len()).sum();
        prop_assert_eq!(weekday_total, len);
    }
}

#[test]
fn window_keeps_matching_rows() {
    let ing = toy();
    let d = |day| NaiveDate::from_ymd_opt(2017, 7, day).unwrap();
    let full = ing.design.clone();
    let w = toy().window(d(4), d(9)).unwrap();
    assert_eq!(w.return_dates, consecutive_dates(d(4), 6).unwrap());
    assert_eq!(w.returns, ing.returns[2..8].to_vec());
    assert_eq!(w.design.dates, consecutive_dates(d(4), 7).unwrap());
    for i in 0..7 {
        assert_eq!(w.design.row(i), full.row(i + 2));
    }
    assert_eq!(compute_returns(&w.series).unwrap(), w.returns);
    assert!(toy().window(d(20), d(25)).is_err());
}
