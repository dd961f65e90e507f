use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use super::{rules, OrgStructure};
use crate::ident::Ident;
use crate::violation::Violation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoleType {
    Line,
    Staff,
    FunctionalAuthority,
}

impl RoleType {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "line" => Some(RoleType::Line),
            "staff" => Some(RoleType::Staff),
            "functional_authority" => Some(RoleType::FunctionalAuthority),
            _ => None,
        }
    }
}

impl fmt::Display for RoleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoleType::Line => "line",
            RoleType::Staff => "staff",
            RoleType::FunctionalAuthority => "functional_authority",
        })
    }
}

/// Formal-structure annotations on roles: role types, superiority,
/// delegation of tasks, and authority/responsibility for tasks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuthorityAnnotations {
    pub tasks: BTreeSet<Ident>,
    pub role_of_type: BTreeMap<Ident, RoleType>,
    /// `(superior, subordinate)`
    pub superior_of: BTreeSet<(Ident, Ident)>,
    /// `(from, task, to)`
    pub delegates_task_to: BTreeSet<(Ident, Ident, Ident)>,
    /// `(role, task)`
    pub authorised_for: BTreeSet<(Ident, Ident)>,
    pub responsible_for: BTreeSet<(Ident, Ident)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuthorityError {
    #[error("superior_of contains a cycle through {}", fmt_cycle(.cycle))]
    SuperiorCycle { cycle: Vec<Ident> },
}

fn fmt_cycle(cycle: &[Ident]) -> String {
    cycle
        .iter()
        .map(Ident::as_str)
        .collect::<Vec<_>>()
        .join(" -> ")
}

impl AuthorityAnnotations {
    pub fn is_line(&self, role: &Ident) -> bool {
        self.role_of_type.get(role) == Some(&RoleType::Line)
    }

    pub fn fact_count(&self) -> usize {
        self.authorised_for.len() + self.responsible_for.len()
    }

    /// Finds one cycle in `superior_of`, if any (a self-loop counts).
    pub fn superior_cycle(&self) -> Option<Vec<Ident>> {
        let mut succ: BTreeMap<&Ident, Vec<&Ident>> = BTreeMap::new();
        for (a, b) in &self.superior_of {
            succ.entry(a).or_default().push(b);
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&Ident, u8> = BTreeMap::new();
        let mut stack: Vec<&Ident> = Vec::new();

        fn dfs<'a>(
            node: &'a Ident,
            succ: &BTreeMap<&'a Ident, Vec<&'a Ident>>,
            state: &mut BTreeMap<&'a Ident, u8>,
            stack: &mut Vec<&'a Ident>,
        ) -> Option<Vec<Ident>> {
            state.insert(node, 1);
            stack.push(node);
            for &next in succ.get(node).map(Vec::as_slice).unwrap_or(&[]) {
                match state.get(next).copied().unwrap_or(0) {
                    1 => {
                        let start = stack.iter().position(|n| *n == next).unwrap_or(0);
                        let mut cycle: Vec<Ident> =
                            stack[start..].iter().map(|n| (*n).clone()).collect();
                        cycle.push(next.clone());
                        return Some(cycle);
                    }
                    0 => {
                        if let Some(c) = dfs(next, succ, state, stack) {
                            return Some(c);
                        }
                    }
                    _ => {}
                }
            }
            stack.pop();
            state.insert(node, 2);
            None
        }

        let roots: Vec<&Ident> = succ.keys().copied().collect();
        for root in roots {
            if state.get(root).copied().unwrap_or(0) == 0 {
                if let Some(c) = dfs(root, &succ, &mut state, &mut stack) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// Checks the annotation invariants against the structure.
    pub fn validate(&self, org: &OrgStructure) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut roles: BTreeSet<&Ident> = BTreeSet::new();
        let mut tasks: BTreeSet<&Ident> = BTreeSet::new();
        roles.extend(self.role_of_type.keys());
        for (a, b) in &self.superior_of {
            roles.insert(a);
            roles.insert(b);
        }
        for (a, t, b) in &self.delegates_task_to {
            roles.insert(a);
            roles.insert(b);
            tasks.insert(t);
        }
        for (r, t) in self.authorised_for.iter().chain(&self.responsible_for) {
            roles.insert(r);
            tasks.insert(t);
        }
        for r in roles {
            if !org.roles.contains(r) {
                out.push(Violation::error(
                    rules::UNDECLARED_ROLE,
                    vec![r.clone()],
                    format!("authority annotation refers to undeclared role `{r}`"),
                ));
            }
        }
        for t in tasks {
            if !self.tasks.contains(t) {
                out.push(Violation::error(
                    rules::UNDECLARED_TASK,
                    vec![t.clone()],
                    format!("authority annotation refers to undeclared task `{t}`"),
                ));
            }
        }
        if let Some(cycle) = self.superior_cycle() {
            out.push(Violation::error(
                rules::SUPERIOR_CYCLE,
                cycle.clone(),
                format!("superior_of is cyclic: {}", fmt_cycle(&cycle)),
            ));
        }
        out
    }
}

/// Closes the annotations under the line-authority rule: when line role `a`
/// is superior of line role `b`, delegates task `t` to `b`, and is itself
/// authorised for and responsible for `t`, then `b` becomes authorised for
/// and responsible for `t`. Input facts are kept.
///
/// The fixpoint is always computed; a cyclic `superior_of` is still reported
/// as an error because it breaks the annotation invariant.
pub fn line_authority_closure(
    ann: &AuthorityAnnotations,
) -> Result<AuthorityAnnotations, AuthorityError> {
    if let Some(cycle) = ann.superior_cycle() {
        return Err(AuthorityError::SuperiorCycle { cycle });
    }
    Ok(close(ann))
}

fn close(ann: &AuthorityAnnotations) -> AuthorityAnnotations {
    let mut out = ann.clone();
    // delegations indexed by delegating role
    let mut by_source: BTreeMap<&Ident, Vec<(&Ident, &Ident)>> = BTreeMap::new();
    for (from, task, to) in &ann.delegates_task_to {
        if ann.is_line(from)
            && ann.is_line(to)
            && ann.superior_of.contains(&(from.clone(), to.clone()))
        {
            by_source.entry(from).or_default().push((task, to));
        }
    }

    let mut queue: VecDeque<(Ident, Ident)> = out
        .authorised_for
        .intersection(&out.responsible_for)
        .cloned()
        .collect();
    while let Some((role, task)) = queue.pop_front() {
        let Some(delegations) = by_source.get(&role) else {
            continue;
        };
        for &(t, to) in delegations {
            if *t != task {
                continue;
            }
            let fact = (to.clone(), task.clone());
            let newly_auth = out.authorised_for.insert(fact.clone());
            let newly_resp = out.responsible_for.insert(fact.clone());
            if newly_auth || newly_resp {
                queue.push_back(fact);
            }
        }
    }
    out
}
