"""Action-filtered chain complexes with integer differentials."""

from __future__ import annotations

import bisect
import json
import random
import threading
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .linalg import Matrix
from .rings import format_rational, parse_rational

INF = float("inf")


class ComplexFormatError(ValueError):
    """A complex file does not follow the documented format."""


class InvalidComplex(ValueError):
    pass


@dataclass(frozen=True)
class Generator:
    id: str
    degree: int
    action: Fraction

    def __post_init__(self):
        object.__setattr__(self, "action", Fraction(self.action))


class FilteredComplex:
    """A finite chain complex over Z with a strictly decreasing action filtration.

    ``differential`` maps a generator id to a list of ``(id, coefficient)``
    pairs. Construction does not validate; call :func:`validate` (or
    :meth:`require_valid`) before computing anything.
    """

    def __init__(self, top_degree: int, generators, differential=None):
        self.top_degree = int(top_degree)
        self.generators = tuple(
            g if isinstance(g, Generator) else Generator(*g) for g in generators
        )
        diff = {}
        for key, terms in (differential or {}).items():
            merged = {}
            for tid, coeff in terms:
                merged[tid] = merged.get(tid, 0) + int(coeff)
            diff[key] = merged
        order = {g.id: i for i, g in enumerate(self.generators)}
        canon = {}
        for g in self.generators:
            terms = diff.pop(g.id, None)
            if terms:
                items = [(t, c) for t, c in terms.items() if c != 0]
                items.sort(key=lambda tc: (order.get(tc[0], len(order)), tc[0]))
                if items:
                    canon[g.id] = tuple(items)
        for key, terms in diff.items():
            items = tuple((t, c) for t, c in terms.items() if c != 0)
            if items:
                canon[key] = items
        self.differential = canon
        self._index = order
        self._valid = None
        self._lock = threading.RLock()
        self._cache = {}

    # -- structure ---------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, FilteredComplex):
            return NotImplemented
        return (
            self.top_degree == other.top_degree
            and self.generators == other.generators
            and self.differential == other.differential
        )

    def __hash__(self):
        return hash((self.top_degree, self.generators, tuple(sorted(self.differential.items()))))

    def __repr__(self):
        return (
            f"FilteredComplex(top_degree={self.top_degree}, "
            f"{len(self.generators)} generators, degrees {self.degrees})"
        )

    def generator(self, gid: str) -> Generator:
        return self.generators[self._index[gid]]

    def boundary(self, gid: str) -> tuple:
        return self.differential.get(gid, ())

    @property
    def degrees(self) -> list[int]:
        """Degrees that carry at least one generator."""
        return sorted({g.degree for g in self.generators})

    @property
    def critical_values(self) -> list[Fraction]:
        return sorted({g.action for g in self.generators})

    def require_valid(self):
        if self._valid is None:
            self._valid = not validate(self)
        if not self._valid:
            raise InvalidComplex("; ".join(validate(self)))

    def cached(self, key, compute):
        """Memoize ``compute()`` under ``key``; safe under concurrent use."""
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = compute()
        with self._lock:
            return self._cache.setdefault(key, value)

    # -- degree-wise bases ------------------------------------------------

    def basis(self, degree: int) -> list[Generator]:
        """Generators of one degree, ordered by (action, position)."""

        def compute():
            gens = [(g.action, i, g) for i, g in enumerate(self.generators) if g.degree == degree]
            gens.sort(key=lambda t: (t[0], t[1]))
            return [g for _, _, g in gens]

        return self.cached(("basis", degree), compute)

    def _positions(self, degree: int) -> dict:
        return self.cached(
            ("pos", degree), lambda: {g.id: i for i, g in enumerate(self.basis(degree))}
        )

    def position(self, gid: str) -> int:
        g = self.generator(gid)
        return self._positions(g.degree)[gid]

    def boundary_matrix(self, degree: int) -> Matrix:
        """Matrix of the differential from ``degree`` to ``degree - 1``."""

        def compute():
            src = self.basis(degree)
            tgt = self._positions(degree - 1)
            M = [[0] * len(src) for _ in range(len(tgt))]
            for j, g in enumerate(src):
                for tid, c in self.boundary(g.id):
                    M[tgt[tid]][j] += c
            return Matrix(M, len(src))

        return self.cached(("bd", degree), compute)

    def prefix(self, degree: int, level) -> int:
        """How many degree-``degree`` generators have action <= ``level``."""
        actions = self.cached(("actions", degree), lambda: [g.action for g in self.basis(degree)])
        if level == INF:
            return len(actions)
        return bisect.bisect_right(actions, level)

    def chain_vector(self, degree: int, chain: dict) -> list:
        """Coordinates of ``{id: coeff}`` in :meth:`basis` order."""
        pos = self._positions(degree)
        vec = [0] * len(pos)
        for gid, c in chain.items():
            if gid not in self._index:
                raise KeyError(f"unknown generator id {gid!r}")
            g = self.generator(gid)
            if g.degree != degree:
                raise ValueError(f"generator {gid!r} has degree {g.degree}, not {degree}")
            vec[pos[gid]] += c
        return vec

    def chain_dict(self, degree: int, vec) -> dict:
        return {g.id: c for g, c in zip(self.basis(degree), vec) if c != 0}

    def action_of(self, degree: int, vec):
        """Max action over the support of a chain (``-inf`` for the zero chain)."""
        best = -INF
        for g, c in zip(self.basis(degree), vec):
            if c != 0 and g.action > best:
                best = g.action
        return best

    def dual(self) -> "FilteredComplex":
        return self.cached("dual", lambda: dual_complex(self))


# -- operations ----------------------------------------------------------


def validate(C: FilteredComplex) -> list[str]:
    """All invariant violations of ``C`` (empty list means valid)."""
    problems = []
    seen = set()
    for g in C.generators:
        if g.id in seen:
            problems.append(f"duplicate generator id {g.id!r}")
        seen.add(g.id)
    by_id = {g.id: g for g in C.generators}
    structural_ok = not problems
    for src, terms in C.differential.items():
        if src not in by_id:
            problems.append(f"differential of unknown generator {src!r}")
            structural_ok = False
            continue
        x = by_id[src]
        for tid, c in terms:
            if tid not in by_id:
                problems.append(f"boundary of {src!r} references unknown generator {tid!r}")
                structural_ok = False
                continue
            y = by_id[tid]
            if y.degree != x.degree - 1:
                problems.append(
                    f"boundary of {src!r} (degree {x.degree}) hits {tid!r} of degree {y.degree}"
                )
                structural_ok = False
            if y.action >= x.action:
                problems.append(
                    f"non-decreasing action: {src!r} ({x.action}) -> {tid!r} ({y.action})"
                )
    if structural_ok:
        for k in C.degrees:
            A = C.boundary_matrix(k - 1)
            B = C.boundary_matrix(k)
            if A.ncols and B.nrows and not (A @ B).is_zero():
                problems.append(f"square nonzero: d o d != 0 from degree {k} to {k - 2}")
    return problems


def sublevel(C: FilteredComplex, level) -> FilteredComplex:
    """Subcomplex spanned by generators with action <= ``level``."""
    keep = [g for g in C.generators if g.action <= level]
    ids = {g.id for g in keep}
    diff = {
        src: [(t, c) for t, c in terms if t in ids]
        for src, terms in C.differential.items()
        if src in ids
    }
    return FilteredComplex(C.top_degree, keep, diff)


def dual_id(gid: str) -> str:
    return gid[:-1] if gid.endswith("*") else gid + "*"


def dual_complex(C: FilteredComplex) -> FilteredComplex:
    """Opposite complex: degrees reflected through the top degree, actions
    negated, differential transposed."""
    D = C.top_degree
    gens = [Generator(dual_id(g.id), D - g.degree, -g.action) for g in C.generators]
    diff: dict = {}
    for src, terms in C.differential.items():
        for tid, c in terms:
            diff.setdefault(dual_id(tid), []).append((dual_id(src), c))
    return FilteredComplex(D, gens, diff)


def shifted(C: FilteredComplex, amount) -> FilteredComplex:
    """Same complex with every action moved by ``amount``."""
    amount = Fraction(amount)
    gens = [Generator(g.id, g.degree, g.action + amount) for g in C.generators]
    return FilteredComplex(C.top_degree, gens, {k: list(v) for k, v in C.differential.items()})


def with_action(C: FilteredComplex, gid: str, action) -> FilteredComplex:
    gens = [
        Generator(g.id, g.degree, Fraction(action)) if g.id == gid else g for g in C.generators
    ]
    return FilteredComplex(C.top_degree, gens, {k: list(v) for k, v in C.differential.items()})


# -- file format -----------------------------------------------------------

_TOP_KEYS = {"top_degree", "generators", "differential"}
_GEN_KEYS = {"id", "degree", "action"}


def to_json_obj(C: FilteredComplex) -> dict:
    return {
        "top_degree": C.top_degree,
        "generators": [
            {"id": g.id, "degree": g.degree, "action": format_rational(g.action)}
            for g in C.generators
        ],
        "differential": {
            src: [[t, c] for t, c in terms] for src, terms in C.differential.items()
        },
    }


def dumps(C: FilteredComplex) -> str:
    """Canonical text form; ``dumps(loads(dumps(C))) == dumps(C)``."""
    obj = to_json_obj(C)
    lines = ["{", f'  "top_degree": {json.dumps(obj["top_degree"])},', '  "generators": [']
    gens = [json.dumps(g, ensure_ascii=False) for g in obj["generators"]]
    lines += [f"    {g}," for g in gens[:-1]] + [f"    {g}" for g in gens[-1:]]
    lines.append("  ],")
    items = [
        f"    {json.dumps(k, ensure_ascii=False)}: {json.dumps(v, ensure_ascii=False)}"
        for k, v in obj["differential"].items()
    ]
    if items:
        lines.append('  "differential": {')
        lines += [i + "," for i in items[:-1]] + items[-1:]
        lines.append("  }")
    else:
        lines.append('  "differential": {}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def from_json_obj(obj) -> FilteredComplex:
    if not isinstance(obj, dict):
        raise ComplexFormatError("top level: expected a JSON object")
    unknown = set(obj) - _TOP_KEYS
    if unknown:
        raise ComplexFormatError(f"unknown field(s): {', '.join(sorted(unknown))}")
    for key in ("top_degree", "generators"):
        if key not in obj:
            raise ComplexFormatError(f"missing field {key!r}")
    if not _is_int(obj["top_degree"]):
        raise ComplexFormatError("top_degree: expected an integer")
    if not isinstance(obj["generators"], list):
        raise ComplexFormatError("generators: expected a list")
    gens = []
    for i, g in enumerate(obj["generators"]):
        where = f"generators[{i}]"
        if not isinstance(g, dict):
            raise ComplexFormatError(f"{where}: expected an object")
        unknown = set(g) - _GEN_KEYS
        if unknown:
            raise ComplexFormatError(f"{where}: unknown field(s): {', '.join(sorted(unknown))}")
        missing = _GEN_KEYS - set(g)
        if missing:
            raise ComplexFormatError(f"{where}: missing field(s): {', '.join(sorted(missing))}")
        if not isinstance(g["id"], str) or not g["id"]:
            raise ComplexFormatError(f"{where}.id: expected a non-empty string")
        if not _is_int(g["degree"]):
            raise ComplexFormatError(f"{where}.degree: expected an integer")
        if not isinstance(g["action"], str):
            raise ComplexFormatError(f"{where}.action: expected a string such as \"3/2\"")
        try:
            action = parse_rational(g["action"])
        except ValueError as exc:
            raise ComplexFormatError(f"{where}.action: {exc}") from None
        gens.append(Generator(g["id"], g["degree"], action))
    diff_obj = obj.get("differential", {})
    if not isinstance(diff_obj, dict):
        raise ComplexFormatError("differential: expected an object")
    diff = {}
    for src, terms in diff_obj.items():
        where = f"differential[{src!r}]"
        if not isinstance(terms, list):
            raise ComplexFormatError(f"{where}: expected a list of [id, coefficient] pairs")
        parsed = []
        for j, term in enumerate(terms):
            if (
                not isinstance(term, list)
                or len(term) != 2
                or not isinstance(term[0], str)
                or not _is_int(term[1])
            ):
                raise ComplexFormatError(f"{where}[{j}]: expected [id, integer]")
            parsed.append((term[0], term[1]))
        diff[src] = parsed
    return FilteredComplex(obj["top_degree"], gens, diff)


def loads(text: str) -> FilteredComplex:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ComplexFormatError(f"invalid JSON: {exc}") from None
    return from_json_obj(obj)


def load(path) -> FilteredComplex:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dump(C: FilteredComplex, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(C))


# -- fixtures ---------------------------------------------------------------


def fixture_e1() -> FilteredComplex:
    """u (deg 0, act 0), v (deg 0, act 1), x (deg 1, act 3) with dx = u - 2v."""
    return FilteredComplex(
        1,
        [Generator("u", 0, 0), Generator("v", 0, 1), Generator("x", 1, 3)],
        {"x": [("u", 1), ("v", -2)]},
    )


def fixture_e2() -> FilteredComplex:
    """y (deg 0, act 0), x (deg 1, act 2) with dx = 2y, w (deg 1, act 5) with dw = y."""
    return FilteredComplex(
        1,
        [Generator("y", 0, 0), Generator("x", 1, 2), Generator("w", 1, 5)],
        {"x": [("y", 2)], "w": [("y", 1)]},
    )


FIXTURES = {"e1": fixture_e1, "e2": fixture_e2}


# -- random complexes -------------------------------------------------------


@dataclass(frozen=True)
class RandomParams:
    """Knobs for :func:`random_complex`.

    ``closed`` keeps the homology of the full complex torsion-free (every
    torsion class eventually dies), the situation of a closed manifold such
    as CP^n. With ``closed=False`` pieces with permanent torsion may occur.
    """

    max_degree: int = 2
    gens_per_degree: int = 4
    action_range: int = 12
    torsion_bias: float = 0.35
    closed: bool = True
    basis_changes: int = 6

    def __post_init__(self):
        if self.max_degree < 1 or self.gens_per_degree < 1 or self.action_range < 2:
            raise ValueError("random complex parameters must be positive")
        if not 0 <= self.torsion_bias <= 1:
            raise ValueError("torsion_bias must lie in [0, 1]")


_TORSION_COEFFS = (2, 3, 2, 4, 6, 5, 7)


def random_complex(seed: int, params: RandomParams = RandomParams()) -> FilteredComplex:
    """Deterministic random valid complex.

    Built as a direct sum of elementary pieces, then scrambled by
    unimodular basis changes that only add lower (or equal, earlier) action
    generators to higher ones, which keeps both the filtration and d o d = 0.
    """
    rng = random.Random(seed)
    top = params.max_degree
    half = Fraction(1, 2)

    def act(lo=0):
        hi = 2 * params.action_range
        return Fraction(rng.randint(2 * lo, hi), 2) if lo * 2 <= hi else Fraction(lo)

    def coeff():
        if rng.random() < params.torsion_bias:
            return rng.choice(_TORSION_COEFFS) * rng.choice((1, -1))
        return rng.choice((1, -1))

    gens: list[list] = []  # [degree, action]
    diff: dict[int, dict[int, int]] = {}

    def new(degree, action):
        gens.append([degree, action])
        return len(gens) - 1

    def above(a):
        # an action strictly above a, within reach of the range
        return a + half * rng.randint(1, max(2, 2 * params.action_range - int(2 * a) + 2))

    target = params.gens_per_degree * (top + 1)
    kinds = ["lone", "pair", "fork", "capped"]
    if not params.closed:
        kinds.append("torsion_pair")
    while len(gens) < target:
        kind = rng.choice(kinds)
        if kind == "lone":
            new(rng.randint(0, top), act())
            continue
        k = rng.randint(0, top - 1)
        if kind == "pair":
            ay = act()
            y = new(k, ay)
            x = new(k + 1, above(ay))
            diff[x] = {y: rng.choice((1, -1))}
        elif kind == "torsion_pair":
            ay = act()
            y = new(k, ay)
            x = new(k + 1, above(ay))
            d = rng.choice(_TORSION_COEFFS) * rng.choice((1, -1))
            diff[x] = {y: d if rng.random() < max(params.torsion_bias, 0.5) else 1}
        elif kind == "fork":
            au, av = act(), act()
            u, v = new(k, au), new(k, av)
            x = new(k + 1, above(max(au, av)))
            d1, d2 = coeff(), coeff()
            g = gcd(d1, d2)
            d1, d2 = d1 // g, d2 // g
            diff[x] = {u: d1, v: d2}
        else:
            ay = act()
            y = new(k, ay)
            x = new(k + 1, above(ay))
            w = new(k + 1, above(ay))
            diff[x] = {y: coeff()}
            diff[w] = {y: rng.choice((1, -1))}

    n = len(gens)
    # boundary as dict of dicts: column (source) -> {row (target): coeff}
    cols = {j: dict(diff.get(j, {})) for j in range(n)}
    order = sorted(range(n), key=lambda i: (gens[i][1], i))
    rank_of = {g: r for r, g in enumerate(order)}

    for _ in range(params.basis_changes * (top + 1)):
        deg = rng.randint(0, top)
        members = [i for i in range(n) if gens[i][0] == deg]
        if len(members) < 2:
            continue
        i, j = rng.sample(members, 2)
        if rank_of[j] > rank_of[i]:
            i, j = j, i
        c = rng.choice((1, -1, 2, -2))
        # new basis element b_i = e_i + c e_j with e_j earlier in (action, index)
        # column i += c * column j
        for t, v in cols[j].items():
            cols[i][t] = cols[i].get(t, 0) + c * v
            if cols[i][t] == 0:
                del cols[i][t]
        # rows: coordinates of e_i become b_i, so row j -= c * row i
        for s in range(n):
            col = cols[s]
            if i in col:
                col[j] = col.get(j, 0) - c * col[i]
                if col[j] == 0:
                    del col[j]

    for i in range(n):
        if rng.random() < 0.3:
            for s in range(n):
                if i in cols[s]:
                    cols[s][i] = -cols[s][i]
            cols[i] = {t: -v for t, v in cols[i].items()}

    ids = [f"g{i}" for i in range(n)]
    generators = [Generator(ids[i], gens[i][0], gens[i][1]) for i in range(n)]
    differential = {
        ids[j]: [(ids[t], v) for t, v in sorted(cols[j].items())] for j in range(n) if cols[j]
    }
    return FilteredComplex(top, generators, differential)
