use lppl::supply_demand::{agency_discrepancy, gap_series, load_flows, regime_flag, Quarter};

fn fixture() -> Vec<lppl::supply_demand::QuarterlyFlow> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/supply_demand_reconstructed.csv");
    load_flows(path).unwrap()
}

fn q(s: &str) -> Quarter {
    s.parse().unwrap()
}

#[test]
fn eia_demand_exceeds_supply_in_last_five_quarters() {
    let gaps = gap_series(&fixture(), "EIA").unwrap();
    assert_eq!(gaps.len(), 17);
    let positive_tail = gaps.iter().rev().take_while(|g| g.gap_mbd > 0.0).count();
    assert_eq!(positive_tail, 5);
}

#[test]
fn eia_supply_about_one_below_iea_since_2006() {
    let d = agency_discrepancy(&fixture(), "IEA", "EIA").unwrap();
    for x in d.iter().filter(|x| x.quarter >= q("2006Q1")) {
        assert!((x.supply_mbd - 1.0).abs() < 1e-9, "{}: {}", x.quarter, x.supply_mbd);
    }
    for x in &d {
        assert!(x.demand_mbd.abs() <= 0.3 + 1e-9, "{}: {}", x.quarter, x.demand_mbd);
    }
    for x in d.iter().filter(|x| x.quarter < q("2006Q1")) {
        assert!(x.supply_mbd.abs() <= 0.2 + 1e-9);
    }
}

#[test]
fn supply_exceeded_demand_before_2006() {
    let flows = fixture();
    for agency in ["EIA", "IEA"] {
        let r = regime_flag(&flows, agency, q("2006Q1")).unwrap();
        assert_eq!(r.pre, 1.0);
        assert_eq!(r.n_pre, 8);
    }
    let eia = regime_flag(&flows, "EIA", q("2006Q1")).unwrap();
    // 2006 surplus, 2007Q1..2008Q1 deficit
    assert!((eia.post - 4.0 / 9.0).abs() < 1e-12);
}
