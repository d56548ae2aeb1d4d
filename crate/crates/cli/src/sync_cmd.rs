//! `petsync sync`: target resolution, method dispatch and the final replay.

use std::io::Write;
use std::time::Duration;

use petsync::net::{token_distributions, PlaceId};
use petsync::rg_sync::solve_on_rg;
use petsync::sm_structure::{decompose, ComponentClass};
use petsync::sts::{find_sts_until, k_ss_from_sts, DEFAULT_VERIFY_BUDGET};
use petsync::sync::verify_from;
use petsync::subnet::ss_via_subnets_with_budget;
use petsync::{
    build_rg_seeded, count_reachable_sm, ss_single_ergodic, Deadline, Error, Marking, NetDocument, SearchMode,
    SyncMethod, SyncResult, SynchronizedNet,
};
use serde_json::json;

use crate::{load, write_out, CliError, CliResult, MethodArg, SyncArgs};

struct Request<'a> {
    net: &'a SynchronizedNet,
    doc: &'a NetDocument,
    /// Set when every target token sits in one place.
    place: Option<PlaceId>,
    target: Marking,
    k: u32,
    m0: Option<Marking>,
    budget: usize,
    deadline: Deadline,
    mode: SearchMode,
}

pub fn run(out: &mut dyn Write, args: &SyncArgs) -> CliResult<()> {
    let (doc, net) = load(&args.file)?;
    let m0 = doc.marking(&net)?;
    let deadline = args
        .timeout
        .map_or(Deadline::none(), |s| Deadline::after(Duration::from_secs_f64(s.max(0.0))));
    let has_target = args.target_place.is_some()
        || args.target_marking.is_some()
        || doc.target_place.is_some()
        || doc.target_marking.is_some();
    // subnet targets live in the file's `subnets`
    if args.method == MethodArg::Subnet || (args.method == MethodArg::Auto && doc.subnets.is_some() && !has_target) {
        let res = subnet(&net, &doc, m0.as_ref(), args.budget, deadline)?;
        return print_result(out, &net, &res, args.json);
    }
    let (place, target, k) = resolve_target(&net, &doc, args, m0.as_ref())?;
    let req = Request {
        net: &net,
        doc: &doc,
        place,
        target,
        k,
        m0,
        budget: args.budget,
        deadline,
        mode: if args.bfs { SearchMode::BreadthFirst } else { SearchMode::DepthFirst },
    };

    let result = match args.method {
        MethodArg::Auto => auto(&req)?,
        MethodArg::Rg => rg(&req)?,
        MethodArg::Sts => sts(&req)?,
        MethodArg::Condensed => condensed(&req)?,
        MethodArg::Subnet => unreachable!("handled above"),
    };
    print_result(out, &net, &result, args.json)
}

/// Command-line targets override the file's; a place target carries `k`
/// tokens, a marking target fixes `k` as its total.
fn resolve_target(
    net: &SynchronizedNet,
    doc: &NetDocument,
    args: &SyncArgs,
    m0: Option<&Marking>,
) -> CliResult<(Option<PlaceId>, Marking, u32)> {
    let from_cli = args.target_place.is_some() || args.target_marking.is_some();
    let marking = match &args.target_marking {
        Some(spec) => Some(petsync::document::parse_marking_spec(net, spec)?),
        None if !from_cli => doc.target_marking(net)?,
        None => None,
    };
    if let Some(target) = marking {
        let total = u32::try_from(target.total()).map_err(|_| Error::Arithmetic("token count".into()))?;
        if args.k.is_some_and(|k| k != total) {
            return Err(CliError::Usage(format!("--k {} disagrees with the target's {total} tokens", args.k.unwrap_or(0))));
        }
        let place = concentrated_place(&target);
        return Ok((place, target, total));
    }
    let place = match &args.target_place {
        Some(name) => Some(net.net().place_id(name)?),
        None if !from_cli => doc.target_place(net)?,
        None => None,
    };
    let Some(place) = place else {
        return Err(CliError::Usage("no target: pass --target-place or --target-marking".into()));
    };
    let k = match (args.k, m0) {
        (Some(k), _) => k,
        (None, Some(m)) => u32::try_from(m.total()).map_err(|_| Error::Arithmetic("token count".into()))?,
        (None, None) => 1,
    };
    if k == 0 {
        return Err(CliError::Usage("a place target needs at least one token".into()));
    }
    Ok((Some(place), Marking::concentrated(net.place_count(), place, k), k))
}

fn concentrated_place(m: &Marking) -> Option<PlaceId> {
    let mut nonzero = m.counts().iter().enumerate().filter(|(_, &c)| c > 0);
    let (p, _) = nonzero.next()?;
    nonzero.next().is_none().then_some(PlaceId(p))
}

/// Structural search first, then the reachability graph.
fn auto(req: &Request) -> CliResult<SyncResult> {
    let pt = req.net.net();
    if pt.is_state_machine() {
        let partition = decompose(pt)?;
        let eta = partition.ergodic().count();
        // with the token-count uncertainty every ergodic component keeps its tokens
        if eta > 1 && req.m0.is_none() {
            return Err(Error::Obstruction { ergodic: eta }.into());
        }
        if req.place.is_some() && partition.is_strongly_connected() {
            match sts(req) {
                Ok(res) => return Ok(res),
                Err(CliError::Insufficient(why)) => log::info!("structural method failed ({why}), using the reachability graph"),
                Err(e) => return Err(e),
            }
        } else if req.place.is_some() && eta == 1 && req.k == 1 && req.m0.is_none() {
            match condensed(req) {
                Ok(res) => return Ok(res),
                Err(CliError::Insufficient(why)) => log::info!("condensed method failed ({why}), using the reachability graph"),
                Err(e) => return Err(e),
            }
        }
    } else if req.doc.subnets.is_some() {
        match subnet(req.net, req.doc, req.m0.as_ref(), req.budget, req.deadline) {
            // a certificate with unknown places cannot vouch for a full target
            Ok(res) if res.unknown_places.is_empty() && res.target == req.target => return Ok(res),
            Ok(res) => log::info!("subnet certificate {} differs from the target", res.target_display()),
            Err(CliError::Insufficient(why)) => log::info!("subnet method failed ({why}), using the reachability graph"),
            Err(CliError::Net(Error::NotApplicable(why))) => {
                log::info!("subnet method not applicable ({why}), using the reachability graph")
            }
            Err(e) => return Err(e),
        }
    }
    rg(req)
}

/// Uncertainty: everything reachable from the file's marking, or for a state
/// machine without one, every marking with the target's token count.
fn rg(req: &Request) -> CliResult<SyncResult> {
    let starts: Vec<Marking> = match &req.m0 {
        Some(m0) => vec![m0.clone()],
        None if req.net.net().is_state_machine() => token_distributions(req.net.place_count(), req.k).collect(),
        None => {
            return Err(CliError::Usage(
                "the reachability method needs a `marking` in the file for nets that are not state machines".into(),
            ))
        }
    };
    let solution = solve_on_rg(req.net, &starts, &req.target, req.budget, req.deadline)?;
    let Some(sequence) = solution.sequence else {
        return Err(CliError::NoSequence(format!(
            "some pair of the {} reachable markings never merges into {}",
            solution.graph.node_count(),
            req.target
        )));
    };
    let verified_from = verify_from(req.net, solution.graph.nodes().iter().cloned(), &sequence, &req.target)?;
    Ok(SyncResult {
        sequence,
        target: req.target.clone(),
        unknown_places: Vec::new(),
        method: SyncMethod::Rg,
        verified_from,
    })
}

fn sts(req: &Request) -> CliResult<SyncResult> {
    let place = req
        .place
        .ok_or_else(|| CliError::Usage("the structural method needs all target tokens in one place".into()))?;
    let Some(found) = find_sts_until(req.net, place, req.mode, req.deadline)? else {
        return Err(CliError::Insufficient(format!(
            "no synchronizing transition sequence ends at {}",
            req.net.net().place_name(place)
        )));
    };
    let res = k_ss_from_sts(req.net, &found, req.k)?;
    let m = req.net.place_count();
    // the library samples above the budget; replay here only when exhaustive is affordable
    let states = count_reachable_sm(m as u64, u64::from(req.k)).unwrap_or(u128::MAX);
    if states <= DEFAULT_VERIFY_BUDGET {
        verify_from(req.net, token_distributions(m, req.k), &res.sequence, &res.target)?;
    }
    Ok(res)
}

fn condensed(req: &Request) -> CliResult<SyncResult> {
    let place = req
        .place
        .ok_or_else(|| CliError::Usage("the condensed method needs a target place".into()))?;
    if req.k != 1 {
        return Err(CliError::Usage("the condensed method handles one token".into()));
    }
    let pt = req.net.net();
    if !pt.is_state_machine() {
        return Err(Error::NotStateMachine("the condensed method needs a state machine".into()).into());
    }
    let partition = decompose(pt)?;
    let eta = partition.ergodic().count();
    if eta != 1 {
        return Err(Error::Obstruction { ergodic: eta }.into());
    }
    if partition.components[partition.component_of(place)].class != ComponentClass::Ergodic {
        return Err(CliError::NoSequence(format!(
            "{} lies in a transient component; a token in the ergodic component never reaches it",
            pt.place_name(place)
        )));
    }
    let Some(res) = ss_single_ergodic(req.net, place)? else {
        return Err(CliError::Insufficient("component composition did not verify".into()));
    };
    verify_from(req.net, token_distributions(req.net.place_count(), 1), &res.sequence, &res.target)?;
    Ok(res)
}

fn subnet(
    net: &SynchronizedNet,
    doc: &NetDocument,
    m0: Option<&Marking>,
    budget: usize,
    deadline: Deadline,
) -> CliResult<SyncResult> {
    let (d, targets) = doc
        .subnets(net)?
        .ok_or_else(|| CliError::Usage("the subnet method needs `subnets` in the file".into()))?;
    let targets = targets.ok_or_else(|| CliError::Usage("every subnet needs a `target`".into()))?;
    let Some(res) = ss_via_subnets_with_budget(net, &d, &targets, budget)? else {
        return Err(CliError::Insufficient("some subnet has no synchronizing sequence".into()));
    };

    // subnets keep their token counts and share the alphabet with the net,
    // so the word replays unchanged on each isolated subnet
    for (i, sub) in d.subnets.iter().enumerate() {
        let isolated = d.isolated(net, i)?;
        let k = u32::try_from(targets[i].total()).map_err(|_| Error::Arithmetic("token count".into()))?;
        let want = d.project(i, &res.target);
        verify_from(&isolated, token_distributions(sub.places.len(), k), &res.sequence, &want)?;
    }
    if let Some(m0) = m0 {
        let graph = build_rg_seeded(net, std::slice::from_ref(m0), budget, deadline)?;
        for m in graph.nodes() {
            let end = net.apply_sequence(m, &res.sequence)?;
            let agrees = (0..net.place_count())
                .filter(|p| !res.unknown_places.contains(&PlaceId(*p)))
                .all(|p| end.get(PlaceId(p)) == res.target.get(PlaceId(p)));
            if !agrees {
                return Err(Error::Consistency(format!("{m} ends at {end}, certified {}", res.target_display())).into());
            }
        }
    }
    Ok(res)
}

fn print_result(out: &mut dyn Write, net: &SynchronizedNet, res: &SyncResult, as_json: bool) -> CliResult<()> {
    let names = res.sequence.names(net);
    let text = if as_json {
        let target: Vec<serde_json::Value> = res
            .target
            .counts()
            .iter()
            .enumerate()
            .map(|(p, &c)| if res.unknown_places.contains(&PlaceId(p)) { json!(null) } else { json!(c) })
            .collect();
        let places: Vec<&str> = net.net().places().map(|p| net.net().place_name(p)).collect();
        let doc = json!({
            "sequence": names,
            "target": target,
            "places": places,
            "method": res.method.as_str(),
            "verified_from": res.verified_from,
        });
        format!("{doc}\n")
    } else {
        let line = if names.is_empty() { "(empty)".to_string() } else { names.join(" ") };
        format!(
            "{line}\ntarget: {}\nmethod: {}\nverified from: {} markings\n",
            res.target_display(),
            res.method,
            res.verified_from
        )
    };
    write_out(out, &text)
}
