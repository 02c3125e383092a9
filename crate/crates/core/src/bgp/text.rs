use super::{AsId, BetaAttrs, Origin, Prefix, Rib, Route};
use crate::graph::Topology;
use crate::text::{lines, number};
use crate::{Error, Result};

/// Parses a RIB file, one route per line:
///
/// ```text
/// route <prefix> <gateway> lp=<n> aspath=<n> origin=<0|1|2> [med=<n>] as=<asn> [rid=<n>] [ebgp-local]
/// ```
///
/// Gateways must be nodes of `topology`; the router-id defaults to the
/// gateway's node id.
pub fn parse_rib(input: &str, topology: &Topology) -> Result<Rib> {
    let mut rib = Rib::new();
    for (line, tokens) in lines(input) {
        let route = parse_route_tokens(&tokens, topology, "rib", line)?;
        rib.insert(route).map_err(|e| Error::parse("rib", line, e.to_string()))?;
    }
    Ok(rib)
}

/// Parses one route declaration. The leading `route` keyword is optional.
pub fn parse_route_tokens(tokens: &[&str], topology: &Topology, src: &str, line: usize) -> Result<Route> {
    let tokens = match tokens {
        ["route", rest @ ..] => rest,
        other => other,
    };
    let [prefix, gateway, attrs @ ..] = tokens else {
        return Err(Error::parse(src, line, "expected `route <prefix> <gateway> <attributes>`"));
    };
    let gateway = topology
        .lookup(gateway)
        .ok_or_else(|| Error::parse(src, line, format!("unknown gateway `{gateway}`")))?;

    let (mut lp, mut aspath, mut origin, mut med, mut asn, mut rid) = (None, None, None, None, None, None);
    let mut ebgp_local = false;
    for attr in attrs {
        if *attr == "ebgp-local" {
            ebgp_local = true;
            continue;
        }
        let Some((key, value)) = attr.split_once('=') else {
            return Err(Error::parse(src, line, format!("unexpected token `{attr}`")));
        };
        let slot = match key {
            "lp" => &mut lp,
            "aspath" => &mut aspath,
            "med" => &mut med,
            "as" => &mut asn,
            "rid" => &mut rid,
            "origin" => {
                let code: u8 = number(src, line, "origin", value)?;
                origin = Some(
                    Origin::from_code(code)
                        .ok_or_else(|| Error::parse(src, line, "origin must be 0, 1 or 2"))?,
                );
                continue;
            }
            _ => return Err(Error::parse(src, line, format!("unknown attribute `{key}`"))),
        };
        if slot.is_some() {
            return Err(Error::parse(src, line, format!("attribute `{key}` given twice")));
        }
        *slot = Some(number::<u32>(src, line, key, value)?);
    }
    let missing = |what: &str| Error::parse(src, line, format!("missing `{what}=`"));
    Ok(Route {
        prefix: Prefix::new(*prefix),
        gateway,
        beta: BetaAttrs {
            local_pref: lp.ok_or_else(|| missing("lp"))?,
            as_path_len: aspath.ok_or_else(|| missing("aspath"))?,
            origin: origin.ok_or_else(|| missing("origin"))?,
            med,
            origin_as: AsId(asn.ok_or_else(|| missing("as"))?),
        },
        ebgp_local,
        router_id: rid.unwrap_or(gateway.0),
    })
}

/// Renders a route in the RIB file syntax.
pub fn format_route(route: &Route, topology: &Topology) -> String {
    let b = &route.beta;
    let mut line = format!(
        "route {} {} lp={} aspath={} origin={}",
        route.prefix,
        topology.name(route.gateway),
        b.local_pref,
        b.as_path_len,
        b.origin.code()
    );
    if let Some(med) = b.med {
        line.push_str(&format!(" med={med}"));
    }
    line.push_str(&format!(" as={}", b.origin_as.0));
    if route.router_id != route.gateway.0 {
        line.push_str(&format!(" rid={}", route.router_id));
    }
    if route.ebgp_local {
        line.push_str(" ebgp-local");
    }
    line
}
