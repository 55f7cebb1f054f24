use super::{achieved_rate, required_power, AdmissionProblem, AdmissionResult};

/// Index of the selected entry minimizing `key`, ties to the lowest index.
fn argmin_selected(selected: &[bool], key: impl Fn(usize) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for k in (0..selected.len()).filter(|&k| selected[k]) {
        let value = key(k);
        if best.is_none_or(|(_, b)| value < b) {
            best = Some((k, value));
        }
    }
    best.map(|(k, _)| k)
}

/// Equal split of `P⁰` without redistribution after interference drops.
pub fn equal_power_allocate(problem: &AdmissionProblem) -> AdmissionResult {
    equal_power_allocate_with(problem, false)
}

/// Equal-power scheme.
///
/// Every remaining UE gets `P⁰ / n`; while some UE misses `R⁰` the one with
/// the lowest rate is dropped and the budget re-split. Interference control
/// then runs with the powers frozen. With `redistribute` set, the budget is
/// re-split among survivors after interference drops and both phases repeat
/// until nothing changes.
pub fn equal_power_allocate_with(problem: &AdmissionProblem, redistribute: bool) -> AdmissionResult {
    let c = &problem.constraints;
    let k = problem.num_ues();
    let mut selected = vec![true; k];
    loop {
        let mut share = 0.0;
        loop {
            let n = selected.iter().filter(|s| **s).count();
            if n == 0 {
                break;
            }
            share = c.total_power / n as f64;
            let rate = |i: usize| achieved_rate(share, problem.gamma[i], c.noise);
            if (0..k).any(|i| selected[i] && rate(i) < c.min_rate) {
                let worst = argmin_selected(&selected, rate).expect("n > 0");
                selected[worst] = false;
            } else {
                break;
            }
        }
        let power: Vec<f64> = selected.iter().map(|s| if *s { share } else { 0.0 }).collect();
        let before = selected.iter().filter(|s| **s).count();
        let result = interference_control(AdmissionResult::new(problem, selected, power), problem);
        if !redistribute || result.admitted == before || result.admitted == 0 {
            return result;
        }
        selected = result.selected;
    }
}

/// Equal-rate scheme.
///
/// Each UE gets exactly the power for `R⁰`; while the total exceeds `P⁰` the
/// most expensive UE is dropped (unservable UEs first). Interference control
/// follows.
pub fn equal_rate_allocate(problem: &AdmissionProblem) -> AdmissionResult {
    let c = &problem.constraints;
    let power: Vec<f64> = problem.gamma.iter().map(|g| required_power(*g, c)).collect();
    let mut selected = vec![true; problem.num_ues()];
    loop {
        let total: f64 = (0..power.len()).filter(|&k| selected[k]).map(|k| power[k]).sum();
        if total <= c.total_power {
            break;
        }
        let costliest = argmin_selected(&selected, |k| -power[k]).expect("non-empty while over budget");
        selected[costliest] = false;
    }
    interference_control(AdmissionResult::new(problem, selected, power), problem)
}

/// Drops UEs until both estimated interference constraints hold.
///
/// For PU-1 then PU-2, while the constraint is violated the selected UE
/// angularly closest to that PU's estimated direction is dropped. Powers of
/// the survivors are kept.
pub fn interference_control(result: AdmissionResult, problem: &AdmissionProblem) -> AdmissionResult {
    let limit = problem.constraints.interference;
    let AdmissionResult {
        mut selected, power, ..
    } = result;
    loop {
        for j in 0..2 {
            while problem.estimated_interference(j, &selected, &power) > limit {
                let pu = problem.pu_phi_hat[j];
                let closest = argmin_selected(&selected, |k| (problem.ue_phi[k] - pu).abs())
                    .expect("interference is zero once nobody is selected");
                selected[closest] = false;
            }
        }
        let ok = (0..2).all(|j| problem.estimated_interference(j, &selected, &power) <= limit);
        if ok {
            return AdmissionResult::new(problem, selected, power);
        }
    }
}
