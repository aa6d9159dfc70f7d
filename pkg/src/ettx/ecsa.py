"""Persistent DAG representing bags of valuations.

Nodes are append-only.  A node is one of

* ``nu``: a valuation (no children);
* ``sigma``: a non-relabel assignment over its left child;
* ``gamma``: a relabel (register renaming) over its left child;
* ``union``: the bag union of its two children.

The bag of a sigma or gamma node is ``{ v ∘ label | v in bag(left) }``.
Operations keep every returned node *safe*, which bounds the left
"output depth" by 4 and gives enumeration with delay linear in the sizes
of consecutive outputs.

Register contents are built as ropes (a ``str`` or a tuple of ropes) so
that composing with an assignment costs O(|assignment|) no matter how
long the contents are; flattening is linear in the output.
"""

from __future__ import annotations

from .core import Bag
from .errors import PreconditionViolation
from .sst import Assignment, Reg

NU, SIGMA, GAMMA, UNION = "nu", "sigma", "gamma", "union"


def flatten(rope) -> str:
    if isinstance(rope, str):
        return rope
    out = []
    stack = [rope]
    while stack:
        r = stack.pop()
        if isinstance(r, str):
            out.append(r)
        else:
            stack.extend(reversed(r))
    return "".join(out)


def rope_apply(cur: dict, sigma: Assignment) -> dict:
    """The rope valuation ``cur ∘ sigma``; registers that cannot be built are dropped."""
    res = {}
    for x, w in sigma.items():
        parts = []
        for it in w:
            if isinstance(it, Reg):
                r = cur.get(it.name)
                if r is None:
                    break
                parts.append(r)
            else:
                parts.append(it)
        else:
            res[x] = parts[0] if len(parts) == 1 else ("" if not parts else tuple(parts))
    return res


def rope_template(cur: dict, template):
    parts = []
    for it in template:
        if isinstance(it, Reg):
            r = cur.get(it.name)
            if r is None:
                return None
            parts.append(r)
        else:
            parts.append(it)
    return tuple(parts)


class Ecsa:
    def __init__(self, debug=False):
        self.kind = []
        self.label = []
        self.left = []
        self.right = []
        self.depth = []
        self._dom = []
        self.debug = debug
        self.steps = 0

    def __len__(self):
        return len(self.kind)

    def _new(self, kind, label, left=None, right=None, dom=None):
        self.steps += 1
        n = len(self.kind)
        self.kind.append(kind)
        self.label.append(label)
        self.left.append(left)
        self.right.append(right)
        if kind in (NU, SIGMA):
            d = 0
        else:
            d = self.depth[left] + 1
        self.depth.append(d)
        self._dom.append(dom)
        return n

    # -- operations --------------------------------------------------------

    def add(self, valuation: Assignment) -> int:
        if self.debug and not valuation.is_valuation():
            raise PreconditionViolation(f"{valuation} is not a valuation")
        return self._new(NU, valuation, dom=valuation.dom)

    def extend(self, n: int, sigma: Assignment) -> int:
        if self.debug:
            self._check_extend(n, sigma)
        if not sigma.is_relabel():
            return self._new(SIGMA, sigma, n, dom=sigma.dom)
        if self.kind[n] == GAMMA:
            return self._new(GAMMA, self.label[n].compose(sigma), self.left[n], dom=sigma.dom)
        return self._new(GAMMA, sigma, n, dom=sigma.dom)

    def union(self, n1: int, n2: int) -> int:
        if self.debug:
            if self._dom[n1] != self._dom[n2]:
                raise PreconditionViolation(
                    f"union of nodes with domains {sorted(self._dom[n1])} and {sorted(self._dom[n2])}")
            for n in (n1, n2):
                if not self.is_safe(n):
                    raise PreconditionViolation(f"node {n} is not safe")
        P1, M1 = self._piece(n1)
        P2, M2 = self._piece(n2)
        dom = self._dom[n1]
        if M1 is not None and M2 is not None:
            rest = self._new(UNION, None, M1, M2, dom)
            rest = self._new(UNION, None, P2, rest, dom)
        elif M1 is not None or M2 is not None:
            rest = self._new(UNION, None, P2, M1 if M1 is not None else M2, dom)
        else:
            rest = P2
        return self._new(UNION, None, P1, rest, dom)

    def _is_output(self, n):
        return self.kind[n] in (NU, SIGMA)

    def _relabel(self, gamma, n):
        """A node for ``bag(n) ∘ gamma``, fusing with n when n is a relabel node."""
        if self.kind[n] == GAMMA:
            return self._new(GAMMA, self.label[n].compose(gamma), self.left[n], dom=gamma.dom)
        return self._new(GAMMA, gamma, n, dom=gamma.dom)

    def _piece(self, n):
        """Split a safe node into a safe output node and an optional rest."""
        k = self.kind[n]
        if k == UNION:
            return self.left[n], self.right[n]
        if k == GAMMA and self.kind[self.left[n]] == UNION:
            g = self.label[n]
            u = self.left[n]
            return self._relabel(g, self.left[u]), self._relabel(g, self.right[u])
        return n, None

    # -- diagnostics -------------------------------------------------------

    def odepth(self, n: int) -> int:
        return self.depth[n]

    def shape(self, n: int):
        """Which safe shape (1..6) the node has, or None."""
        k = self.kind[n]
        if k in (NU, SIGMA):
            return 1
        if k == GAMMA:
            c = self.left[n]
            if self._is_output(c):
                return 2
            if self.kind[c] == UNION:
                s = self._union_shape(c)
                return s + 2 if s else None
            return None
        return self._union_shape(n)

    def _union_shape(self, n):
        le = self.left[n]
        if self.depth[self.right[n]] > 2:
            return None
        if self._is_output(le):
            return 3
        if self.kind[le] == GAMMA and self._is_output(self.left[le]):
            return 4
        return None

    def is_safe(self, n: int) -> bool:
        return self.shape(n) is not None

    def domain(self, n: int) -> frozenset:
        return self._dom[n]

    def _check_extend(self, n, sigma):
        saved = self.steps
        sample = next(self._enumerate_ropes(n), None)
        self.steps = saved
        if sample is not None and frozenset(sample) != sigma.reg:
            raise PreconditionViolation(
                f"extend of a node holding registers {sorted(sample)} by {sigma}")
        if not self.is_safe(n):
            raise PreconditionViolation(f"node {n} is not safe")

    # -- enumeration -------------------------------------------------------

    def _traverse(self, st):
        """Expand the stack until its top holds an output node."""
        kind, left, right, label = self.kind, self.left, self.right, self.label
        while kind[st[-1][0]] in (UNION, GAMMA):
            m, g = st.pop()
            self.steps += 1
            if kind[m] == GAMMA:
                st.append((left[m], label[m] if g is None else label[m].compose(g)))
            else:
                st.append((right[m], g))
                st.append((left[m], g))

    def _descend(self, n, frames):
        kind, left = self.kind, self.left
        while True:
            k = kind[n]
            self.steps += 1
            if k == NU:
                frames.append((NU, n, None))
                return
            if k == SIGMA:
                frames.append((SIGMA, n, None))
                n = left[n]
                continue
            st = [(n, None)]
            self._traverse(st)
            frames.append((UNION, n, st))
            n = st[-1][0]

    def _enumerate_ropes(self, n):
        frames = []
        self._descend(n, frames)
        label = self.label
        while True:
            cur = None
            for kind, m, st in reversed(frames):
                self.steps += 1
                if kind == NU:
                    cur = {x: "".join(w) for x, w in label[m].items()}
                elif kind == SIGMA:
                    cur = rope_apply(cur, label[m])
                else:
                    g = st[-1][1]
                    if g is not None:
                        cur = rope_apply(cur, g)
            yield cur
            # advance the deepest union frame with alternatives left
            i = len(frames) - 1
            while i >= 0 and not (frames[i][0] == UNION and len(frames[i][2]) > 1):
                i -= 1
            if i < 0:
                break
            _, m, st = frames[i]
            del frames[i + 1:]
            st.pop()
            self._traverse(st)
            self._descend(st[-1][0], frames)

    def enumerate_ropes(self, n):
        """Valuations of the bag of n as dicts register -> rope."""
        return self._enumerate_ropes(n)

    def enumerate(self, n):
        for cur in self._enumerate_ropes(n):
            yield Assignment({x: flatten(r) for x, r in cur.items()})

    def materialize(self, n) -> Bag:
        """The bag of n, computed directly from the definition."""
        memo = {}
        stack = [(n, False)]
        while stack:
            m, ready = stack.pop()
            if m in memo:
                continue
            if not ready:
                stack.append((m, True))
                for c in (self.left[m], self.right[m]):
                    if c is not None and c not in memo:
                        stack.append((c, False))
                continue
            k = self.kind[m]
            if k == NU:
                memo[m] = [self.label[m]]
            elif k == UNION:
                memo[m] = memo[self.left[m]] + memo[self.right[m]]
            else:
                lab = self.label[m]
                memo[m] = [v.compose(lab) for v in memo[self.left[m]]]
        return Bag(memo[n])

    def dump(self, nodes=None) -> str:
        """One line per node: id, kind, left, right, label ("-" when absent)."""
        lines = []
        ids = range(len(self.kind)) if nodes is None else sorted(nodes)
        for i in ids:
            lab = "-" if self.label[i] is None else str(self.label[i])
            le = "-" if self.left[i] is None else str(self.left[i])
            ri = "-" if self.right[i] is None else str(self.right[i])
            lines.append(f"{i} {self.kind[i]} {le} {ri} {lab}")
        return "\n".join(lines)

    def reachable(self, n) -> set:
        seen = set()
        stack = [n]
        while stack:
            m = stack.pop()
            if m is None or m in seen:
                continue
            seen.add(m)
            stack.append(self.left[m])
            stack.append(self.right[m])
        return seen
