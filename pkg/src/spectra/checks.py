"""Theorem checkers producing JSON-ready reports.

Every checker returns a dict ``{check, inputs, status, witness, values}``
with ``status`` one of ``pass``, ``fail`` or ``inconclusive``. Exact values
are rendered as ``p/q`` strings and infinities as ``inf`` / ``-inf``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .abelian import FgAbelianGroup, hom_cokernel
from .complex import INF, FilteredComplex, shifted, with_action
from .homology import (
    HomologyClass,
    change_ring_class,
    class_of_vector,
    generator_classes,
    homology,
    induced_map,
    pad,
)
from .linalg import Matrix
from .rings import QQ, ZZ, Ring, Zmod, format_rational, is_prime, prime_factors
from .spectral import (
    NEG_INF,
    c,
    cokernel_order,
    pair_chains,
    pairing_threshold,
    spectral_depth,
    torsion_depth,
    torsion_depth_all,
)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


def jsonable(value):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, float):
        return format_rational(value)
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, Ring):
        return value.name
    if isinstance(value, HomologyClass):
        return describe_class(value)
    if isinstance(value, dict):
        return {str(jsonable(k)) if not isinstance(k, str) else k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    raise TypeError(f"cannot render {type(value).__name__}")


def describe_class(a: HomologyClass) -> dict:
    return {
        "ring": a.ring.name,
        "degree": a.degree,
        "level": format_rational(a.level),
        "cycle": {k: format_rational(v) for k, v in a.chain().items()},
    }


def report(check, inputs, status, witness=None, values=None) -> dict:
    return {
        "check": check,
        "inputs": jsonable(inputs),
        "status": status,
        "witness": jsonable(witness or {}),
        "values": jsonable(values or {}),
    }


# -- coefficient comparison ---------------------------------------------------


def check_coeff_monotone(a: HomologyClass, ring: Ring) -> dict:
    """c over ``ring`` of the image of an integral class never exceeds c over Z."""
    cz = c(a)
    cr = c(change_ring_class(a, ring))
    status = PASS if cr <= cz else FAIL
    return report(
        "coeff-mono",
        {"class": a, "target_ring": ring},
        status,
        values={"c_Z": cz, f"c_{ring.name}": cr},
    )


def check_z_vs_q(a: HomologyClass) -> dict:
    """inf over multiples of c_Z equals c_Q, and the infimum is attained."""
    inputs = {"class": a}
    if a.is_zero():
        return report("zq", inputs, INCONCLUSIVE, values={"reason": "zero class"})
    cq = c(change_ring_class(a, QQ))
    if a.is_torsion():
        n = a.order()
        attained = c(a.scale(n))
        status = PASS if attained == NEG_INF and cq == NEG_INF else FAIL
        return report("zq", inputs, status, {"k": n}, {"c_Q": cq, "inf_k c_Z(ka)": attained})
    d = spectral_depth(a)
    attained = c(a.scale(d.witness))
    ok = d.infimum == cq and attained == cq
    return report(
        "zq",
        inputs,
        PASS if ok else FAIL,
        {"k": d.witness, "bound": d.bound},
        {"c_Z": d.c_z, "c_Q": cq, "inf_k c_Z(ka)": d.infimum, "c_Z(k a)": attained, "beta_spec": d.beta},
    )


def envelope_primes(a: HomologyClass) -> tuple[list[int], int]:
    """Primes where the Z/p invariant of ``a`` may differ from the Q invariant,
    and the least prime outside that set."""
    C = a.complex
    k = a.degree
    found = set()
    for d in (k - 1, k):
        for level in list(C.critical_values) + [INF]:
            for t in homology(C, ZZ, d, level).torsion:
                found.update(prime_factors(t))
    for level in C.critical_values:
        found.update(prime_factors(cokernel_order(a, level)))
        coker = hom_cokernel(induced_map(C, ZZ, k, level, INF)).group
        found.update(prime_factors(coker.free_content(a.coords)))
    full = FgAbelianGroup.from_orders(homology(C, ZZ, k, INF).orders)
    found.update(prime_factors(full.free_content(a.coords)))
    found.discard(0)
    p = 2
    while p in found or not is_prime(p):
        p += 1
    return sorted(found), p


def check_prime_envelope(a: HomologyClass) -> dict:
    """inf_p c_{Z/p} <= c_Q <= sup_p c_{Z/p} <= c_Z over the envelope primes."""
    inputs = {"class": a}
    if a.is_zero():
        return report("primes", inputs, INCONCLUSIVE, values={"reason": "zero class"})
    support, generic = envelope_primes(a)
    primes = sorted(support + [generic])
    cp = {p: c(change_ring_class(a, Zmod(p))) for p in primes}
    cz = c(a)
    cq = c(change_ring_class(a, QQ))
    lo, hi = min(cp.values()), max(cp.values())
    ok = lo <= cq <= hi <= cz
    return report(
        "primes",
        inputs,
        PASS if ok else FAIL,
        {"primes": primes, "generic_prime": generic},
        {"c_Z": cz, "c_Q": cq, "inf_p": lo, "sup_p": hi, "c_p": cp},
    )


def multiple_infima(a: HomologyClass, p: int):
    """``(inf over all k, inf over k not divisible by p)`` of ``c_Z(k a)``.

    ``k a`` lies in the image at level tau exactly when the order ``n_tau`` of
    ``a`` in the cokernel of ``i_tau`` is finite and divides ``k``.
    """
    inf_all = INF
    inf_coprime = INF
    for tau in a.complex.critical_values:
        n = cokernel_order(a, tau)
        if n == 0:
            continue
        inf_all = min(inf_all, tau)
        if n % p:
            inf_coprime = min(inf_coprime, tau)
    return inf_all, inf_coprime


def check_refinement(a: HomologyClass, p: int) -> dict:
    """Strict comparisons between c_{Z/p}, c_Q and infima over multiples."""
    inputs = {"class": a, "p": p}
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if a.is_zero() or a.is_torsion():
        return report("refine", inputs, INCONCLUSIVE, values={"reason": "zero or torsion class"})
    cp = c(change_ring_class(a, Zmod(p)))
    cq = c(change_ring_class(a, QQ))
    inf_all, inf_coprime = multiple_infima(a, p)
    values = {"c_Z/p": cp, "c_Q": cq, "inf_k": inf_all, "inf_k_not_in_pN": inf_coprime}
    if cp < cq:
        status = PASS if cp < inf_coprime else FAIL
        case = "c_Z/p < c_Q"
    elif cp > cq:
        status = PASS if inf_all < inf_coprime else FAIL
        case = "c_Z/p > c_Q"
    else:
        status, case = INCONCLUSIVE, "c_Z/p = c_Q"
    values["case"] = case
    return report("refine", inputs, status, values=values)


# -- duality ----------------------------------------------------------------


def check_field_pd(C: FilteredComplex, a: HomologyClass) -> dict:
    """-c_K(dual, a) = least level where pairing with ``a`` is nonzero."""
    field = a.ring
    inputs = {"dual_class": a, "field": field}
    if not field.is_field:
        raise ValueError(f"{field} is not a field")
    if a.is_zero():
        return report("pd-field", inputs, INCONCLUSIVE, values={"reason": "zero class"})
    lhs = -c(a)
    rhs = pairing_threshold(C, field, a.cycle, C.top_degree - a.degree)
    return report(
        "pd-field", inputs, PASS if lhs == rhs else FAIL, values={"-c(dual,a)": lhs, "inf_b c(b)": rhs}
    )


def check_corrected_pd(C: FilteredComplex, a: HomologyClass) -> dict:
    """0 <= c_Z(dual, a) + inf{c_Z(b) : <a, b> != 0} <= beta_tor (and its
    degree-refined version).

    The upper bound relies on the full homology one degree below ``b``
    having no torsion; when that fails and the bound is violated the
    status is ``inconclusive`` rather than ``fail``.
    """
    inputs = {"dual_class": a}
    if not a.ring.is_integers:
        raise ValueError("the corrected duality check works over Z")
    if a.is_zero() or a.is_torsion():
        return report("pd-z", inputs, INCONCLUSIVE, values={"reason": "zero or torsion class"})
    D = C.top_degree
    bdeg = D - a.degree
    cd = c(a)
    inf_b = pairing_threshold(C, ZZ, a.cycle, bdeg)
    total = cd + inf_b
    beta, table = torsion_depth_all(C)
    beta_k = torsion_depth(C, bdeg - 1).beta
    hypothesis = not homology(C, ZZ, bdeg - 1, INF).torsion
    ok = 0 <= total <= beta and total <= beta_k
    if ok:
        status = PASS
    elif 0 <= total and not hypothesis:
        status = INCONCLUSIVE
    else:
        status = FAIL
    return report(
        "pd-z",
        inputs,
        status,
        values={
            "c_Z(dual,a)": cd,
            "inf_b c_Z(b)": inf_b,
            "sum": total,
            "beta_tor": beta,
            "beta_refined": beta_k,
            "refined_degree": bdeg - 1,
            "torsion_free_below": hypothesis,
        },
    )


def _threshold_cycle(C: FilteredComplex, ring: Ring, z_cycle, degree: int):
    """A sublevel generator cycle realizing :func:`pairing_threshold`."""
    tau = pairing_threshold(C, ring, z_cycle, degree)
    if tau == INF:
        return None
    for cyc in homology(C, ring, degree, tau).cycles:
        if not ring.is_zero(pair_chains(C, degree, z_cycle, cyc)):
            return cyc
    return None


def check_depth_identity(a: HomologyClass, a_dual: HomologyClass) -> dict:
    """gamma_Z - gamma_Q = beta_spec(a) + beta_spec(a_dual); plus
    inf_k c_Z(k b) = -inf_k c_Z(dual, k a_dual) for a class ``b`` realizing the
    rational duality infimum against ``a_dual``."""
    C = a.complex
    inputs = {"class": a, "dual_class": a_dual}
    if a.is_zero() or a.is_torsion() or a_dual.is_zero() or a_dual.is_torsion():
        return report("depth-id", inputs, INCONCLUSIVE, values={"reason": "zero or torsion class"})
    da = spectral_depth(a)
    dd = spectral_depth(a_dual)
    gz = c(a) + c(a_dual)
    gq = c(change_ring_class(a, QQ)) + c(change_ring_class(a_dual, QQ))
    first = gz - gq == da.beta + dd.beta
    values = {
        "gamma_Z": gz,
        "gamma_Q": gq,
        "beta_spec": da.beta,
        "beta_spec_dual": dd.beta,
        "witness": da.witness,
        "witness_dual": dd.witness,
    }
    second = True
    bdeg = C.top_degree - a_dual.degree
    cyc = _threshold_cycle(C, QQ, a_dual.cycle, bdeg)
    if cyc is not None:
        b = class_of_vector(C, ZZ, bdeg, pad(cyc, C.prefix(bdeg, INF)))
        if not b.is_torsion():
            inf_b = spectral_depth(b).infimum
            inf_dual = dd.infimum
            second = inf_b == -inf_dual
            values.update({"b": b, "inf_k c_Z(kb)": inf_b, "inf_k c_Z(dual,k a_dual)": inf_dual})
    return report("depth-id", inputs, PASS if first and second else FAIL, values=values)


# -- interleavings ------------------------------------------------------------


class InvalidInterleaving(ValueError):
    pass


@dataclass(frozen=True)
class Interleaving:
    """Chain maps ``forward: F -> G`` and ``backward: G -> F`` shifting action
    by at most ``s1`` and ``s2``. Maps are given per degree as matrices in
    :meth:`FilteredComplex.basis` order (rows: target, columns: source)."""

    F: FilteredComplex
    G: FilteredComplex
    forward: dict
    backward: dict
    s1: Fraction
    s2: Fraction

    def problems(self) -> list[str]:
        out = []
        if self.s1 < 0 or self.s2 < 0:
            out.append("shifts must be nonnegative")
        for name, X, Y, maps, s in (
            ("forward", self.F, self.G, self.forward, self.s1),
            ("backward", self.G, self.F, self.backward, self.s2),
        ):
            out += _chain_map_problems(name, X, Y, maps, s)
        if out:
            return out
        s = self.s1 + self.s2
        for name, X, first, second, Y in (
            ("backward o forward", self.F, self.forward, self.backward, self.G),
            ("forward o backward", self.G, self.backward, self.forward, self.F),
        ):
            comp = {k: second[k] @ first[k] for k in first}
            out += _homotopy_problems(name, X, comp, s)
        return out

    def check(self):
        issues = self.problems()
        if issues:
            raise InvalidInterleaving("; ".join(issues))


def _map_matrix(maps: dict, k: int, X: FilteredComplex, Y: FilteredComplex) -> Matrix:
    if k in maps:
        return maps[k]
    return Matrix.zeros(len(Y.basis(k)), len(X.basis(k)))


def _chain_map_problems(name, X, Y, maps, s) -> list[str]:
    out = []
    degrees = sorted(set(X.degrees) | set(Y.degrees))
    for k in degrees:
        M = _map_matrix(maps, k, X, Y)
        if M.shape != (len(Y.basis(k)), len(X.basis(k))):
            out.append(f"{name}: matrix in degree {k} has shape {M.shape}")
            continue
        for j, gx in enumerate(X.basis(k)):
            for i, gy in enumerate(Y.basis(k)):
                if M[i, j] and gy.action > gx.action + s:
                    out.append(f"{name}: {gx.id} -> {gy.id} raises action by more than {s}")
    if out:
        return out
    for k in degrees:
        lhs = Y.boundary_matrix(k) @ _map_matrix(maps, k, X, Y)
        rhs = _map_matrix(maps, k - 1, X, Y) @ X.boundary_matrix(k)
        if lhs != rhs:
            out.append(f"{name}: does not commute with the differential in degree {k}")
    return out


def _homotopy_problems(name, X: FilteredComplex, comp: dict, s) -> list[str]:
    """The composite must act on homology as the inclusion into level + s."""
    out = []
    for k in X.degrees:
        M = _map_matrix(comp, k, X, X)
        for tau in X.critical_values:
            H = homology(X, ZZ, k, tau)
            target_level = tau + s
            H2 = homology(X, ZZ, k, target_level)
            incl = induced_map(X, ZZ, k, tau, target_level)
            n = len(X.basis(k))
            for j, z in enumerate(H.cycles):
                image = M @ pad(z, n)
                if any(image[i] for i in range(H2.size, n)):
                    out.append(f"{name}: image leaves level {tau} + {s} in degree {k}")
                    continue
                got = H2.coordinates(image[: H2.size])
                want = incl.matrix.column(j)
                if not H2.group.elements_equal(got, want):
                    out.append(f"{name}: differs from the shift inclusion at level {tau}, degree {k}")
    return out


def identity_interleaving(F: FilteredComplex, G: FilteredComplex) -> Interleaving:
    """Interleaving by the identity on generator ids; shifts are read off the actions."""
    ids_f = [g.id for g in F.generators]
    if sorted(ids_f) != sorted(g.id for g in G.generators):
        raise InvalidInterleaving("complexes have different generator ids")
    s1 = max((G.generator(i).action - F.generator(i).action for i in ids_f), default=Fraction(0))
    s2 = max((F.generator(i).action - G.generator(i).action for i in ids_f), default=Fraction(0))
    s1, s2 = max(s1, Fraction(0)), max(s2, Fraction(0))
    forward, backward = {}, {}
    for k in sorted(set(F.degrees) | set(G.degrees)):
        bf = [g.id for g in F.basis(k)]
        bg = [g.id for g in G.basis(k)]
        pos_g = {gid: i for i, gid in enumerate(bg)}
        P = [[0] * len(bf) for _ in bg]
        for j, gid in enumerate(bf):
            P[pos_g[gid]][j] = 1
        forward[k] = Matrix(P, len(bf))
        backward[k] = forward[k].transpose()
    return Interleaving(F, G, forward, backward, Fraction(s1), Fraction(s2))


def check_tor_lipschitz(I: Interleaving) -> dict:
    """|beta_tor(F) - beta_tor(G)| <= s1 + s2 for a valid interleaving."""
    issues = I.problems()
    inputs = {"s1": I.s1, "s2": I.s2}
    if issues:
        return report("lipschitz", inputs, INCONCLUSIVE, values={"invalid_interleaving": issues})
    bf, _ = torsion_depth_all(I.F)
    bg, _ = torsion_depth_all(I.G)
    ok = abs(bf - bg) <= I.s1 + I.s2
    return report(
        "lipschitz",
        inputs,
        PASS if ok else FAIL,
        values={"beta_tor_F": bf, "beta_tor_G": bg, "difference": abs(bf - bg), "shift_sum": I.s1 + I.s2},
    )


def check_dual_torsion(C: FilteredComplex) -> dict:
    """Compare beta_tor of ``C`` and of its dual.

    No theorem relates the two, so a difference is recorded as a finding
    with status ``inconclusive`` and never fails.
    """
    bc, table_c = torsion_depth_all(C)
    bd, table_d = torsion_depth_all(C.dual())
    finding = bc != bd
    return report(
        "dual-tor",
        {"top_degree": C.top_degree},
        INCONCLUSIVE if finding else PASS,
        values={"beta_tor": bc, "beta_tor_dual": bd, "per_degree": table_c, "per_degree_dual": table_d, "finding": finding},
    )


def movable_range(C: FilteredComplex, gid: str):
    """Open interval of actions ``gid`` may take while the complex stays valid."""
    lo, hi = None, None
    for t, _ in C.boundary(gid):
        a = C.generator(t).action
        lo = a if lo is None else max(lo, a)
    for src, terms in C.differential.items():
        if any(t == gid for t, _ in terms):
            a = C.generator(src).action
            hi = a if hi is None else min(hi, a)
    return lo, hi


def perturbations(C: FilteredComplex, rng, count: int) -> list[Interleaving]:
    """Uniform shifts and single-generator moves of ``C`` with identity maps."""
    out = []
    for i in range(count):
        if i % 2 == 0:
            amount = Fraction(rng.randint(-6, 6), 2)
            out.append(identity_interleaving(C, shifted(C, amount)))
            continue
        g = rng.choice(C.generators)
        lo, hi = movable_range(C, g.id)
        lo = g.action - 4 if lo is None else lo
        hi = g.action + 4 if hi is None else hi
        # pick a multiple of 1/4 strictly inside (lo, hi)
        choices = [Fraction(n, 4) for n in range(int(4 * lo) + 1, int(4 * hi) + 1) if lo < Fraction(n, 4) < hi]
        new = rng.choice(choices) if choices else g.action
        out.append(identity_interleaving(C, with_action(C, g.id, new)))
    return out


# -- suite over one complex ----------------------------------------------------

FIELD_PRIMES = (2, 3, 7)
MONO_MODULI = (2, 3, 4, 7, 14)
CHECK_NAMES = ("coeff-mono", "zq", "pd-field", "pd-z", "primes", "refine", "depth-id", "lipschitz", "dual-tor")


def integral_classes(C: FilteredComplex) -> list[HomologyClass]:
    return [a for k in C.degrees for a in generator_classes(C, ZZ, k)]


def run_checks(C: FilteredComplex, names=CHECK_NAMES, rng=None) -> list[dict]:
    """Run the named checks on every generator class of ``C`` and its dual."""
    C.require_valid()
    rng = rng or random.Random(0)
    Dc = C.dual()
    out = []
    ints = integral_classes(C)
    for name in names:
        if name == "coeff-mono":
            for a in ints:
                out.append(check_coeff_monotone(a, QQ))
                out += [check_coeff_monotone(a, Zmod(m)) for m in MONO_MODULI]
        elif name == "zq":
            out += [check_z_vs_q(a) for a in ints]
        elif name == "pd-field":
            for field in [QQ] + [Zmod(p) for p in FIELD_PRIMES]:
                for k in Dc.degrees:
                    out += [check_field_pd(C, a) for a in generator_classes(Dc, field, k)]
        elif name == "pd-z":
            for k in Dc.degrees:
                out += [check_corrected_pd(C, a) for a in generator_classes(Dc, ZZ, k)]
        elif name == "primes":
            out += [check_prime_envelope(a) for a in ints]
        elif name == "refine":
            for a in ints:
                out += [check_refinement(a, p) for p in (2, 3)]
        elif name == "depth-id":
            for a in ints:
                if a.is_torsion():
                    continue
                for b in generator_classes(Dc, ZZ, C.top_degree - a.degree):
                    if not b.is_torsion():
                        out.append(check_depth_identity(a, b))
        elif name == "lipschitz":
            out += [check_tor_lipschitz(I) for I in perturbations(C, rng, 2)]
        elif name == "dual-tor":
            out.append(check_dual_torsion(C))
        else:
            raise ValueError(f"unknown check {name!r}")
    return out


def summarize(check: str, inputs: dict, reports: list[dict]) -> dict:
    """Fold many reports into one record; any failure makes the record fail.

    Reports flagged as findings are listed in the witness but do not fail.
    """
    counts = {PASS: 0, FAIL: 0, INCONCLUSIVE: 0}
    per_check: dict = {}
    for r in reports:
        counts[r["status"]] += 1
        entry = per_check.setdefault(r["check"], {PASS: 0, FAIL: 0, INCONCLUSIVE: 0})
        entry[r["status"]] += 1
    status = FAIL if counts[FAIL] else PASS
    failures = [r for r in reports if r["status"] == FAIL]
    findings = [r for r in reports if r["values"].get("finding") is True]
    return report(
        check,
        inputs,
        status,
        witness={"failures": failures, "findings": findings},
        values={"counts": counts, "per_check": per_check},
    )
