"""Graph analyses: reachability, strongly connected components, and
maximal end component decomposition.

The SCC computation is an iterative Tarjan so that deep models cannot
hit the interpreter recursion limit.
"""


def reachable_from(start, successors):
    """Forward reachable set from `start` (iterable) under `successors`."""
    seen = set()
    stack = list(start)
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        for nxt in successors(node):
            if nxt not in seen:
                stack.append(nxt)
    return seen


def backward_reachable(targets, nodes, successors):
    """States in `nodes` from which some target is reachable (targets included
    when they belong to `nodes`)."""
    preds = {n: set() for n in nodes}
    for n in nodes:
        for m in successors(n):
            if m in preds:
                preds[m].add(n)
    seen = set(t for t in targets if t in preds)
    stack = list(seen)
    while stack:
        node = stack.pop()
        for p in preds[node]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def sccs(nodes, successors):
    """Strongly connected components, iteratively (Tarjan).

    Returns a list of sets; components are returned in reverse
    topological order (successors before predecessors).
    """
    nodes = list(nodes)
    index = {}
    low = {}
    on_stack = set()
    stack = []
    components = []
    counter = [0]

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(successors(nxt))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = set()
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.add(member)
                    if member == node:
                        break
                components.append(comp)
    return components


class SubModel:
    """Duck-typed restricted model view, enough for mec_decompose."""

    def __init__(self, states, actions_of, successors_of):
        self.states = tuple(states)
        self._actions = actions_of
        self._successors = successors_of

    def is_terminal(self, s):
        return not self._actions(s)

    def actions(self, s):
        return self._actions(s)

    def successors(self, s, a):
        return self._successors(s, a)


class Mec:
    """A maximal end component: a state set plus the state-action pairs
    whose transitions stay inside it."""

    def __init__(self, states, state_actions):
        self.states = frozenset(states)
        self.state_actions = frozenset(state_actions)

    def __repr__(self):
        return "Mec(states=%s)" % sorted(self.states)

    def actions_of(self, state):
        return sorted(a for (s, a) in self.state_actions if s == state)


def mec_decompose(m):
    """Maximal end components of the MDP `m`.

    Terminal states belong to no MEC; a trivial SCC only survives if it
    carries a self-loop action.
    """
    acts = {s: [a for a in m.actions(s)] for s in m.states if not m.is_terminal(s)}
    current = set(acts)
    changed = True
    while changed:
        changed = False

        def succ(s):
            out = set()
            for a in acts[s]:
                for t in m.successors(s, a):
                    if t in current:
                        out.add(t)
            return out

        comps = sccs(current, succ)
        comp_of = {}
        for comp in comps:
            for s in comp:
                comp_of[s] = comp
        for s in list(current):
            kept = []
            for a in acts[s]:
                if all(t in comp_of.get(s, ()) and comp_of.get(t) is comp_of[s]
                       for t in m.successors(s, a)):
                    kept.append(a)
            if len(kept) != len(acts[s]):
                acts[s] = kept
                changed = True
            if not kept:
                current.discard(s)
                del acts[s]
                changed = True

    def succ_final(s):
        out = set()
        for a in acts[s]:
            out.update(t for t in m.successors(s, a) if t in current)
        return out

    result = []
    for comp in sccs(current, succ_final):
        pairs = set()
        for s in comp:
            for a in acts[s]:
                pairs.add((s, a))
        if pairs:
            result.append(Mec(comp, pairs))
    return result
