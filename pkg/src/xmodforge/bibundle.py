"""Generalized morphisms (bibundles) and Morita equivalences of groupoids,
the division function g^Z, the induced morphism Phi^Z, and the bullet
composition of bibundles."""

from .errors import EmptyComposite, ValidationFailure, Violation
from .fingrpd import (Groupoid, GroupoidMorphism, pullback_groupoid,
                      validate_groupoid_morphism)
from .util import UnionFind, cls_label, pair, search_bijection


class Bibundle:
    """Space with commuting left M-action (moment lmom) and right N-action
    (moment rmom), right-principal along lmom."""

    def __init__(self, left, right, space, lmom, rmom, lact, ract):
        self.left = left
        self.right = right
        self.space = sorted(set(space))
        self.lmom = dict(lmom)
        self.rmom = dict(rmom)
        self.lact = dict(lact)
        self.ract = dict(ract)

    def lfiber(self, x):
        return [z for z in self.space if self.lmom[z] == x]

    def rfiber(self, y):
        return [z for z in self.space if self.rmom[z] == y]

    def __repr__(self):
        return f"Bibundle(|Z|={len(self.space)})"


def check_bibundle(zb):
    violations = []
    left, right = zb.left, zb.right
    for z in zb.space:
        if zb.lmom.get(z) not in left.objects or zb.rmom.get(z) not in right.objects:
            violations.append(Violation("BadMoment", (z,)))
    if violations:
        return violations

    # left action axioms (moment lmom): m.z defined when s(m)=lmom(z)
    for z in zb.space:
        for m in left.arrows:
            defined = (m, z) in zb.lact
            wants = left.src[m] == zb.lmom[z]
            if wants and not defined:
                violations.append(Violation("MissingActionEntry", ("left", m, z)))
            elif defined and not wants:
                violations.append(Violation("SpuriousActionEntry", ("left", m, z)))
            elif defined:
                mz = zb.lact[(m, z)]
                if mz not in set(zb.space) or zb.lmom[mz] != left.tgt[m]:
                    violations.append(Violation("BadActionImage", ("left", m, z)))
    for z in zb.space:
        for n in right.arrows:
            defined = (z, n) in zb.ract
            wants = zb.rmom[z] == right.tgt[n]
            if wants and not defined:
                violations.append(Violation("MissingActionEntry", ("right", z, n)))
            elif defined and not wants:
                violations.append(Violation("SpuriousActionEntry", ("right", z, n)))
            elif defined:
                zn = zb.ract[(z, n)]
                if zn not in set(zb.space) or zb.rmom[zn] != right.src[n]:
                    violations.append(Violation("BadActionImage", ("right", z, n)))
    if violations:
        return violations

    for z in zb.space:
        if zb.lact[(left.unit[zb.lmom[z]], z)] != z:
            violations.append(Violation("BadUnitAction", ("left", z)))
        if zb.ract[(z, right.unit[zb.rmom[z]])] != z:
            violations.append(Violation("BadUnitAction", ("right", z)))
    for m1, m2 in left.composable_pairs():
        for z in zb.space:
            if left.src[m2] == zb.lmom[z]:
                if zb.lact[(left.comp[(m1, m2)], z)] != zb.lact[(m1, zb.lact[(m2, z)])]:
                    violations.append(Violation("NotAction", ("left", m1, m2, z)))
    for n1, n2 in right.composable_pairs():
        for z in zb.space:
            if zb.rmom[z] == right.tgt[n1]:
                if zb.ract[(z, right.comp[(n1, n2)])] != zb.ract[(zb.ract[(z, n1)], n2)]:
                    violations.append(Violation("NotAction", ("right", z, n1, n2)))
    # commuting: (m.z).n = m.(z.n); moments cross-invariant
    for z in zb.space:
        for m in left.arrows_from(zb.lmom[z]):
            mz = zb.lact[(m, z)]
            if zb.rmom[mz] != zb.rmom[z]:
                violations.append(Violation("NonCommuting", (m, z), "rmom moved by left action"))
        for n in right.arrows_to(zb.rmom[z]):
            zn = zb.ract[(z, n)]
            if zb.lmom[zn] != zb.lmom[z]:
                violations.append(Violation("NonCommuting", (z, n), "lmom moved by right action"))
    if violations:
        return violations
    for z in zb.space:
        for m in left.arrows_from(zb.lmom[z]):
            for n in right.arrows_to(zb.rmom[z]):
                if zb.ract[(zb.lact[(m, z)], n)] != zb.lact[(m, zb.ract[(z, n)])]:
                    violations.append(Violation("NonCommuting", (m, z, n)))
    if violations:
        return violations

    # right-principal along lmom: free + fiberwise transitive
    reach = {z: {} for z in zb.space}
    for (z, n), z2 in zb.ract.items():
        reach[z].setdefault(z2, []).append(n)
    for z in zb.space:
        for n in reach[z].get(z, ()):
            if not right.is_unit(n):
                violations.append(Violation("NotFree", (z, n, right.unit[zb.rmom[z]])))
    for x in left.objects:
        fiber = zb.lfiber(x)
        for z in fiber:
            for z2 in fiber:
                sols = reach[z].get(z2, ())
                if not sols:
                    violations.append(Violation("NotTransitive", (z, z2)))
                elif len(sols) > 1:
                    violations.append(Violation("NotFree", (z, sols[0], sols[1])))
    return violations


def validate_bibundle(left, right, space, lmom, rmom, lact, ract):
    zb = Bibundle(left, right, space, lmom, rmom, lact, ract)
    violations = check_bibundle(zb)
    if violations:
        raise ValidationFailure(violations)
    return zb


def morita_failures(zb):
    """Left-principality violations (NotFree / NotTransitive witnesses)."""
    violations = []
    reach = {z: {} for z in zb.space}
    for (m, z), z2 in zb.lact.items():
        reach[z].setdefault(z2, []).append(m)
    for y in zb.right.objects:
        fiber = zb.rfiber(y)
        for z in fiber:
            for z2 in fiber:
                sols = reach[z].get(z2, ())
                if not sols:
                    violations.append(Violation("NotTransitive", (z, z2), "left"))
                elif len(sols) > 1:
                    violations.append(Violation("NotFree", (z, sols[0], sols[1]), "left"))
    return violations


def is_morita(zb):
    """(bool, witnesses): whether the validated bibundle is also
    left-principal along rmom."""
    violations = morita_failures(zb)
    return (not violations), violations


def identity_bibundle(m):
    """Z = M with left/right translation; the trivial Morita equivalence."""
    return validate_bibundle(
        m, m, m.arrows,
        {z: m.tgt[z] for z in m.arrows},
        {z: m.src[z] for z in m.arrows},
        {(g, z): m.comp[(g, z)] for z in m.arrows for g in m.arrows_from(m.tgt[z])},
        {(z, n): m.comp[(z, n)] for z in m.arrows for n in m.arrows_to(m.src[z])})


def bibundle_from_hom(f):
    """Z_f = M^0 x_{f,t} N for a strict morphism f: M -> N."""
    m, n = f.dom, f.cod
    space = [pair(x, nn) for x in sorted(m.objects) for nn in n.arrows_to(f.omap[x])]
    lmom, rmom, lact, ract = {}, {}, {}, {}
    for z in space:
        x, nn = _parts(z)
        lmom[z] = x
        rmom[z] = n.src[nn]
    for z in space:
        x, nn = _parts(z)
        for g in m.arrows_from(x):
            lact[(g, z)] = pair(m.tgt[g], n.comp[(f.amap[g], nn)])
        for n2 in n.arrows_to(n.src[nn]):
            ract[(z, n2)] = pair(x, n.comp[(nn, n2)])
    return validate_bibundle(m, n, space, lmom, rmom, lact, ract)


def _parts(label):
    from .fingrpd import unpair
    return unpair(label)


def g_function(zb):
    """g^Z(z,z') = the unique right-groupoid arrow with z' = z.g^Z(z,z')."""
    reach = {z: {} for z in zb.space}
    for (z, n), z2 in zb.ract.items():
        reach[z].setdefault(z2, []).append(n)
    table = {}
    for x in zb.left.objects:
        fiber = zb.lfiber(x)
        for z in fiber:
            for z2 in fiber:
                sols = reach[z].get(z2, ())
                assert len(sols) == 1, (z, z2, sols)
                table[(z, z2)] = sols[0]
    return table


def phi_Z(zb):
    """The strict morphism M[Z] -> N[Z], (z, m, z') -> (z, g^Z(z, m.z'), z').

    Returns (morphism, pulled_back_domain, pulled_back_codomain).
    """
    g = g_function(zb)
    dom = pullback_groupoid(zb.left, zb.space, zb.lmom)
    cod = pullback_groupoid(zb.right, zb.space, zb.rmom)
    amap = {}
    for a in dom.arrows:
        z, m, z2 = _parts3(a)
        mz2 = zb.lact[(m, z2)]
        amap[a] = pair(z, g[(z, mz2)], z2)
    f = validate_groupoid_morphism(dom, cod, {z: z for z in dom.objects}, amap)
    return f, dom, cod


def _parts3(label):
    from .fingrpd import _unpair3
    return _unpair3(label)


def phi_Z_bijective(f):
    """Phi^Z is a groupoid isomorphism iff Z is a Morita equivalence; report
    injectivity/surjectivity witnesses instead of a bare bool."""
    seen = {}
    not_injective = []
    for a, b in f.amap.items():
        if b in seen:
            not_injective.append((seen[b], a))
        seen[b] = a
    not_surjective = sorted(set(f.cod.arrows) - set(seen))
    return (not not_injective and not not_surjective, not_injective, not_surjective)


def compose_bibundles(z1, z2):
    """Z1 . Z2 = (Z1 x_{N^0} Z2)/N with (z1 n, z2) ~ (z1, n z2).

    Canonical class labels come from union-find representatives. The composite
    g-function identity g^{Z1.Z2}([a,b],[a',b']) = g^{Z2}(b, g^{Z1}(a,a').b')
    is checked exhaustively before returning.
    """
    if z1.right is not z2.left and set(z1.right.arrows) != set(z2.left.arrows):
        raise ValidationFailure([Violation("MiddleMismatch", None)])
    n = z1.right
    pairs = [pair(a, b) for a in z1.space for b in z2.space
             if z1.rmom[a] == z2.lmom[b]]
    if not pairs:
        raise EmptyComposite("fibered product of bibundle spaces is empty")
    uf = UnionFind(pairs)
    for a in z1.space:
        for nn in n.arrows_to(z1.rmom[a]):
            an = z1.ract[(a, nn)]
            for b in z2.space:
                if z2.lmom[b] == n.src[nn]:
                    # (a.n, b) ~ (a, n.b)
                    uf.union(pair(an, b), pair(a, z2.lact[(nn, b)]))
    cmap = uf.class_map()

    def cl(a, b):
        return cls_label(cmap[pair(a, b)])

    space = sorted({cls_label(rep) for rep in cmap.values()})
    reps = {cls_label(rep): _parts(rep) for rep in set(cmap.values())}
    lmom = {c: z1.lmom[reps[c][0]] for c in space}
    rmom = {c: z2.rmom[reps[c][1]] for c in space}
    lact, ract = {}, {}
    for c in space:
        a, b = reps[c]
        for m in z1.left.arrows_from(lmom[c]):
            lact[(m, c)] = cl(z1.lact[(m, a)], b)
        for nn in z2.right.arrows_to(rmom[c]):
            ract[(c, nn)] = cl(a, z2.ract[(b, nn)])
    out = validate_bibundle(z1.left, z2.right, space, lmom, rmom, lact, ract)
    out.pair_class = {p: cls_label(r) for p, r in cmap.items()}

    g1, g2, gc = g_function(z1), g_function(z2), g_function(out)
    for c in space:
        a, b = reps[c]
        for c2 in space:
            if lmom[c] != lmom[c2]:
                continue
            a2, b2 = reps[c2]
            # move a2 into a's N-orbit slot: lmom equal guarantees g1 solves it
            nmid = g1[(a, a2)]
            rhs = g2[(b, z2.lact[(nmid, b2)])]
            assert gc[(c, c2)] == rhs, (c, c2)
    return out


def search_equivariant_iso(za, zb, node_cap=10**6):
    """Bijection of bibundle spaces commuting with moments and both actions.
    Assumes the two bibundles share left/right groupoids."""
    def candidates(z):
        return [w for w in zb.space
                if zb.lmom[w] == za.lmom[z] and zb.rmom[w] == za.rmom[z]]

    def consistent(partial, z, w):
        for z2, w2 in partial.items():
            for m in za.left.arrows_from(za.lmom[z2]):
                if za.lact[(m, z2)] == z and zb.lact[(m, w2)] != w:
                    return False
            for nn in za.right.arrows_to(za.rmom[z2]):
                if za.ract[(z2, nn)] == z and zb.ract[(w2, nn)] != w:
                    return False
        return True

    return search_bijection(za.space, zb.space, candidates, consistent,
                            node_cap=node_cap)


def morita_witness(g, h, node_cap=10**6):
    """A Morita bibundle between groupoids g and h, or None.

    Matches orbits by brute-forced isotropy isomorphism, then glues the
    standard (arrows into x) x_theta (arrows out of y) torsor per orbit.
    """
    from .fingrpd import iso_maps, as_group_bundle, inertia

    gorbs = _orbits(g)
    horbs = _orbits(h)
    if len(gorbs) != len(horbs):
        return None
    gb, _ = inertia(g)
    hb, _ = inertia(h)

    matched = _match_orbits(g, h, gorbs, horbs, gb, hb)
    if matched is None:
        return None
    space, lmom, rmom, lact, ract = [], {}, {}, {}, {}
    for (x, y, theta) in matched:
        # classes [gg, hh] with gg: x -> *, hh: * -> y, modulo isotropy at x via theta
        members = [pair(gg, hh) for gg in g.arrows_from(x) for hh in h.arrows_to(y)]
        uf = UnionFind(members)
        for gg in g.arrows_from(x):
            for hh in h.arrows_to(y):
                for s in gb.fiber(x):
                    uf.union(pair(g.comp[(gg, s)], hh),
                             pair(gg, h.comp[(hh, theta[s])]))
        cmap = uf.class_map()
        reps = {}
        for rep in set(cmap.values()):
            lab = cls_label(rep)
            reps[lab] = _parts(rep)
            space.append(lab)
            gg, hh = reps[lab]
            lmom[lab] = g.tgt[gg]
            rmom[lab] = h.src[hh]
        for lab, (gg, hh) in reps.items():
            for m in g.arrows_from(g.tgt[gg]):
                lact[(m, lab)] = cls_label(cmap[pair(g.comp[(m, gg)], hh)])
            for nn in h.arrows_to(h.src[hh]):
                ract[(lab, nn)] = cls_label(cmap[pair(gg, h.comp[(hh, nn)])])
    try:
        zb = validate_bibundle(g, h, space, lmom, rmom, lact, ract)
    except ValidationFailure:
        return None
    ok, _ = is_morita(zb)
    return zb if ok else None


def _orbits(g):
    uf = UnionFind(sorted(g.objects))
    for a in g.arrows:
        uf.union(g.src[a], g.tgt[a])
    return uf.classes()


def _match_orbits(g, h, gorbs, horbs, gb, hb):
    """Greedy-with-backtracking orbit matching by isotropy isomorphism.
    Returns [(x, y, theta: iso fiber_g(x) -> fiber_h(y))] or None."""
    from .fingrpd import iso_maps

    gitems = sorted(gorbs.items())
    hitems = sorted(horbs.items())

    def extend(i, used):
        if i == len(gitems):
            return []
        _, gmembers = gitems[i]
        x = gmembers[0]
        for j, (_, hmembers) in enumerate(hitems):
            if j in used:
                continue
            if len(gmembers) and len(hmembers):
                y = hmembers[0]
                isos = _cross_isos(gb, hb, x, y)
                for theta in isos:
                    rest = extend(i + 1, used | {j})
                    if rest is not None:
                        return [(x, y, theta)] + rest
        return None

    return extend(0, frozenset())


def _cross_isos(gb, hb, x, y):
    """Group isomorphisms fiber_g(x) -> fiber_h(y) by brute force."""
    fx, fy = gb.fiber(x), hb.fiber(y)
    if len(fx) != len(fy):
        return []
    out = []
    ex, ey = gb.unit[x], hb.unit[y]

    def extend(partial):
        if len(partial) == len(fx):
            out.append(dict(partial))
            return
        a = sorted(fx)[len(partial)]
        for b in sorted(fy):
            if b in partial.values():
                continue
            if (a == ex) != (b == ey):
                continue
            ok = True
            for a2, b2 in partial.items():
                p = partial.get(gb.comp[(a, a2)])
                if p is not None and hb.comp[(b, b2)] != p:
                    ok = False
                    break
                p = partial.get(gb.comp[(a2, a)])
                if p is not None and hb.comp[(b2, b)] != p:
                    ok = False
                    break
            if ok:
                partial[a] = b
                extend(partial)
                del partial[a]

    extend({})
    return [t for t in out if _hom_ok(gb, hb, t)]


def _hom_ok(gb, hb, t):
    dom = list(t)
    return all(hb.comp[(t[a], t[b])] == t[gb.comp[(a, b)]]
               for a in dom for b in dom)


def inverse_bibundle(zb):
    """For a Morita bibundle Z: M -> N, the flipped bibundle N -> M with
    n.zbar = z n^-1 and zbar.m = m^-1 z."""
    ok, wit = is_morita(zb)
    if not ok:
        raise ValidationFailure(wit)
    lact = {}
    ract = {}
    for z in zb.space:
        for n in zb.right.arrows_from(zb.rmom[z]):
            lact[(n, z)] = zb.ract[(z, zb.right.inv[n])]
        for m in zb.left.arrows_to(zb.lmom[z]):
            ract[(z, m)] = zb.lact[(zb.left.inv[m], z)]
    return validate_bibundle(zb.right, zb.left, zb.space, dict(zb.rmom),
                             dict(zb.lmom), lact, ract)
