"""Independent re-checking of chirality certificates.

The verifier recomputes every claim from the data stored in the
certificate (and, for wall systems, by re-running the root search) and
never trusts stored verdict fields.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Dict, Union

from . import linalg
from .chirality import (Certificate, ChiralityError, block_sum_matrix, check_automorphism, check_extension_summand,
                        delta3, delta3_by_six_root, induced_map, linear_map_from_images,
                        no_small_roots_by_congruence, reduction_step, sheet_preserving, spans_lattice)
from .coxeter import build_graph, graph_symmetries, is_symmetry
from .discriminant import DiscriminantError, class_invariants
from .expr import build_lattice
from .lattice import Lattice, LatticeError
from .roots import RootConfig, RootError, is_root, reflection, run_vinberg


class VerificationError(Exception):
    pass


def _fail(msg):
    raise VerificationError(msg)


def _lattice_for(cert: Certificate) -> Lattice:
    """Lattice of the certificate, with block metadata when the Gram is literal."""
    try:
        L = build_lattice(cert.lattice)
    except LatticeError:
        L = None
    gram = [list(r) for r in cert.gram]
    if L is not None and [list(r) for r in L.gram] == gram:
        return L
    M = None
    model = cert.data.get("model")
    if model:
        # the model carries the block layout that orders level-0 walls
        try:
            M = build_lattice(model)
        except LatticeError as exc:
            _fail(f"invalid model expression: {exc}")
        if [list(r) for r in M.gram] != gram:
            _fail("Gram differs from that of the stated model")
    if M is None:
        try:
            M = Lattice(gram)
        except LatticeError as exc:
            _fail(f"invalid Gram matrix: {exc}")
    if L is not None:
        try:
            a, b = class_invariants(M).as_tuple(), class_invariants(L).as_tuple()
        except DiscriminantError as exc:
            _fail(f"cannot identify lattice: {exc}")
        if a != b:
            _fail(f"Gram has invariants {a}, expression {cert.lattice} has {b}")
    return M


def _config(d: Dict) -> RootConfig:
    return RootConfig(tuple(d["base_point"]), tuple(d["squares"]), Fraction(d["max_level"]), int(d["max_roots"]))


def _delta(L, M, six=()):
    d = delta3(L, M)
    for v in six:
        if delta3_by_six_root(L, M, v) != d:
            _fail("the two Z/3 tests disagree")
    return d


class Verifier:
    """Checks certificates; results are memoised by content."""

    def __init__(self, rerun: bool = True):
        self.rerun = rerun
        self._seen: Dict[str, str] = {}
        self._runs: Dict = {}

    def _vinberg(self, L, cfg):
        key = (tuple(map(tuple, L.gram)), cfg)
        if key not in self._runs:
            self._runs[key] = run_vinberg(L, cfg)
        return self._runs[key]

    def verify(self, cert: Union[Certificate, Dict, str]) -> str:
        """Return the verified claim or raise ``VerificationError``."""
        if isinstance(cert, str):
            try:
                cert = json.loads(cert)
            except json.JSONDecodeError as exc:
                _fail(f"certificate is not valid JSON: {exc}")
        if isinstance(cert, dict):
            try:
                cert = Certificate.from_json(cert)
            except (KeyError, TypeError) as exc:
                _fail(f"malformed certificate: {exc}")
        key = json.dumps(cert.to_json(), sort_keys=True)
        if key in self._seen:
            return self._seen[key]
        handler = getattr(self, f"_check_{cert.kind}", None)
        if handler is None:
            _fail(f"unknown certificate kind {cert.kind!r}")
        try:
            handler(cert)
        except VerificationError:
            raise
        except (ChiralityError, LatticeError, RootError, DiscriminantError, ValueError, KeyError, IndexError,
                TypeError, ArithmeticError) as exc:
            _fail(f"{cert.kind} certificate for {cert.lattice}: {type(exc).__name__}: {exc}")
        self._seen[key] = cert.claim
        return cert.claim

    # -- kinds -----------------------------------------------------------

    def _check_symmetry(self, cert):
        if cert.claim != "achiral":
            _fail("symmetry certificates claim achirality")
        L = _lattice_for(cert)
        d = cert.data
        roots = [tuple(int(x) for x in r) for r in d["roots"]]
        cfg = _config(d["vinberg"]) if "vinberg" in d else None
        squares = cfg.allowed_squares if cfg else (2, 6)
        for r in roots:
            if is_root(L, r, squares) is None:
                _fail(f"{r} is not a root")
        if cfg is not None and self.rerun:
            seq = self._vinberg(L, cfg)
            walls = set(seq.vectors)
            if not all(r in walls for r in roots):
                _fail("roots are not walls found by the root search")
        if not spans_lattice(L, roots):
            _fail("roots do not span the lattice over Z")
        sigma = [int(i) for i in d["sigma"]]
        if not is_symmetry(build_graph(L, roots), sigma):
            _fail("sigma is not a symmetry of the Coxeter graph")
        M = linear_map_from_images(L, roots, [roots[sigma[i]] for i in range(len(roots))])
        if M is None or [[Fraction(x) for x in r] for r in M] != [[Fraction(x) for x in r] for r in d["matrix"]]:
            _fail("stored matrix is not the map induced by sigma")
        check_automorphism(L, d["matrix"])
        p = tuple(d["base_point"])
        if any(L.ip(p, r) > 0 for r in roots):
            _fail("base point is not on the negative side of every wall")
        if not sheet_preserving(L, d["matrix"], p):
            _fail("automorphism swaps the sheets")
        if _delta(L, d["matrix"], [r for r in roots if L.norm(r) == 6]) != -1:
            _fail("automorphism is Z/3-direct")
        if d.get("delta3") != -1:
            _fail("stored character disagrees with the recomputed one")

    def _check_group(self, cert, extended):
        if cert.claim != "chiral":
            _fail("wall-system certificates claim chirality")
        L = _lattice_for(cert)
        d = cert.data
        cfg = _config(d["vinberg"])
        if (4 in cfg.allowed_squares) != extended:
            _fail("root squares do not match the certificate kind")
        roots = [tuple(int(x) for x in r) for r in d["roots"]]
        if self.rerun:
            seq = self._vinberg(L, cfg)
            if seq.status != "complete":
                _fail("root search does not terminate with a finite-volume certificate")
            if seq.vectors != roots:
                _fail("stored walls differ from the recomputed ones")
        G = build_graph(L, roots)
        perms = sorted(tuple(s.perm) for s in graph_symmetries(G))
        stored = sorted(tuple(int(i) for i in row["sigma"]) for row in d["symmetries"])
        if perms != stored:
            _fail("stored symmetry group differs from the recomputed one")
        six = [r for r in roots if L.norm(r) == 6]
        for row in d["symmetries"]:
            g = induced_map(L, roots, row["sigma"])
            if g is None:
                if row["matrix"] is not None:
                    _fail("a symmetry without an induced automorphism carries a matrix")
                continue
            if [list(r) for r in g.matrix] != row["matrix"]:
                _fail("stored matrix of a symmetry is wrong")
            dd = _delta(L, g.matrix, six)
            if dd != 1 or row["delta3"] != dd:
                _fail("a symmetry induces a Z/3-reversing automorphism")
        if extended:
            walls = {tuple(w["root"]) for w in d["four_root_walls"]}
            fours = {r for r in roots if L.norm(r) == 4}
            if walls != fours:
                _fail("4-root walls do not match the wall system")
            for r in fours:
                R = reflection(L, r)
                M = [[linalg.to_int(x) for x in row] for row in R]
                check_automorphism(L, M)
                if delta3(L, M) != 1:
                    _fail("a 4-root reflection is Z/3-reversing")

    def _check_complete(self, cert):
        self._check_group(cert, extended=False)

    def _check_extended_group(self, cert):
        self._check_group(cert, extended=True)

    def _check_rootless(self, cert):
        if cert.claim != "achiral":
            _fail("rootless certificates claim achirality")
        L = _lattice_for(cert)
        if not no_small_roots_by_congruence(L):
            _fail("congruence test does not exclude 2- and 6-roots")
        M = cert.data["matrix"]
        check_automorphism(L, M)
        if not sheet_preserving(L, M, cert.data["test_point"]):
            _fail("automorphism swaps the sheets")
        if delta3(L, M) != -1:
            _fail("automorphism is Z/3-direct")

    def _check_extension(self, cert):
        if len(cert.premises) != 1:
            _fail("extension needs exactly one premise")
        base = cert.premises[0]
        claim = self.verify(base)
        if claim != cert.claim:
            _fail("extension must keep the claim of its premise")
        Le = Lattice(cert.data["summand_gram"])
        check_extension_summand(Le)
        if claim == "achiral":
            L = _lattice_for(cert)
            if [list(r) for r in L.gram] != block_sum_matrix(base.gram, Le.gram):
                _fail("Gram is not the direct sum of the premise and the summand")
            M = cert.data["matrix"]
            if M != block_sum_matrix(base.data["matrix"], linalg.identity(Le.rank)):
                _fail("matrix is not the premise automorphism extended by the identity")
            check_automorphism(L, M)
            if delta3(L, M) != -1:
                _fail("extended automorphism is Z/3-direct")
        else:
            L = _lattice_for(cert)
            big = Lattice(block_sum_matrix(L.gram, Le.gram))
            if class_invariants(big).as_tuple() != class_invariants(Lattice(base.gram)).as_tuple():
                _fail("target plus summand is not the chiral premise")

    def _check_reduction(self, cert):
        if cert.claim != "achiral":
            _fail("reduction certificates claim achirality")
        if len(cert.premises) != 1:
            _fail("reduction needs exactly one premise")
        base = cert.premises[0]
        if self.verify(base) != "achiral":
            _fail("reduction premise is not achiral")
        redo = reduction_step(base, cert.data["J"], cert.lattice)
        if redo.gram != [list(r) for r in cert.gram] or redo.data["matrix"] != cert.data["matrix"]:
            _fail("stored complement or restriction differs from the recomputed one")
        _lattice_for(cert)


def verify_certificate(cert, rerun: bool = True) -> str:
    """Re-check ``cert`` (object, dict or JSON text) and return its claim."""
    return Verifier(rerun).verify(cert)


def verify_file(path: str, rerun: bool = True) -> str:
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "certificates" in data:
        claims = {Verifier(rerun).verify(c) for c in data["certificates"]}
        if len(claims) != 1:
            _fail("certificates in one verdict disagree")
        return claims.pop()
    return verify_certificate(data, rerun)
