use super::{Link, Node, NodeId, Topology, Weight};
use crate::text::{lines, number};
use crate::{Error, Result};

/// Parses the line-oriented topology format:
///
/// ```text
/// node <id> [external]
/// edge <u> <v> <weight> [directed]
/// vantage <id>
/// ```
///
/// `#` starts a comment. Weights default to 1 when omitted.
pub fn parse_topology(input: &str) -> Result<Topology> {
    parse_named(input, "topology")
}

pub(crate) fn parse_named(input: &str, src: &str) -> Result<Topology> {
    let mut nodes: Vec<Node> = Vec::new();
    let mut links = Vec::new();
    let mut vantage: Option<(usize, String)> = None;
    let find = |nodes: &[Node], name: &str| nodes.iter().position(|n| n.name == name);

    for (line, tokens) in lines(input) {
        match tokens.as_slice() {
            ["node", name, rest @ ..] => {
                let external = match rest {
                    [] => false,
                    ["external"] => true,
                    _ => return Err(Error::parse(src, line, "expected `node <id> [external]`")),
                };
                if find(&nodes, name).is_some() {
                    return Err(Error::parse(src, line, format!("duplicate node `{name}`")));
                }
                nodes.push(Node {
                    name: name.to_string(),
                    external,
                    up: true,
                });
            }
            ["edge", u, v, rest @ ..] => {
                let (weight, directed) = match rest {
                    [] => (1, false),
                    ["directed"] => (1, true),
                    [w] => (number::<u32>(src, line, "weight", w)?, false),
                    [w, "directed"] => (number::<u32>(src, line, "weight", w)?, true),
                    _ => return Err(Error::parse(src, line, "expected `edge <u> <v> <weight> [directed]`")),
                };
                if weight == 0 {
                    return Err(Error::parse(src, line, "weights must be >= 1"));
                }
                let endpoint = |name: &str| {
                    find(&nodes, name)
                        .map(|i| NodeId(i as u32))
                        .ok_or_else(|| Error::parse(src, line, format!("unknown node `{name}`")))
                };
                let link = Link {
                    from: endpoint(u)?,
                    to: endpoint(v)?,
                    weight: Weight::Finite(weight),
                    directed,
                };
                if link.from == link.to {
                    return Err(Error::parse(src, line, "self-loops are not allowed"));
                }
                if links.iter().any(|o| super::clashes(o, &link)) {
                    return Err(Error::parse(src, line, format!("duplicate edge {u} - {v}")));
                }
                links.push(link);
            }
            ["vantage", name] => {
                if vantage.is_some() {
                    return Err(Error::parse(src, line, "vantage declared twice"));
                }
                vantage = Some((line, name.to_string()));
            }
            [keyword, ..] => {
                return Err(Error::parse(src, line, format!("unknown declaration `{keyword}`")));
            }
            [] => unreachable!(),
        }
    }

    let (line, name) = vantage.ok_or_else(|| Error::parse(src, 0, "missing `vantage` declaration"))?;
    let idx = find(&nodes, &name).ok_or_else(|| Error::parse(src, line, format!("unknown vantage `{name}`")))?;
    if nodes[idx].external {
        return Err(Error::parse(src, line, "the vantage must be an internal node"));
    }
    Topology::from_parts(nodes, links, NodeId(idx as u32))
}
