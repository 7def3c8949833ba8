import copy
import json

import pytest

from latchiral.verify import VerificationError, Verifier, verify_certificate, verify_file


def _mutate(d, path, fn):
    d = copy.deepcopy(d)
    obj = d
    for k in path[:-1]:
        obj = obj[k]
    obj[path[-1]] = fn(obj[path[-1]])
    return d


def _bump(x):
    return x + 1


def _swap01(xs):
    xs = list(xs)
    xs[0], xs[1] = xs[1], xs[0]
    return xs


def _flip(claim):
    return "chiral" if claim == "achiral" else "achiral"


# mutations per certificate kind; each must be rejected
MUTATIONS = {
    "symmetry": [
        ("matrix entry", ("data", "matrix", 0, 0), _bump),
        ("sigma", ("data", "sigma"), _swap01),
        ("root", ("data", "roots", 0, 0), _bump),
        ("stored character", ("data", "delta3"), lambda d: -d),
        ("base point", ("data", "base_point"), lambda p: [-x for x in p]),
    ],
    "complete": [
        ("dropped symmetry", ("data", "symmetries"), lambda s: s[:-1]),
        ("root", ("data", "roots", -1, 0), _bump),
        ("character", ("data", "symmetries", 0, "delta3"), lambda d: -d),
    ],
    "extended_group": [
        ("dropped 4-root wall", ("data", "four_root_walls"), lambda w: w[1:]),
        ("root", ("data", "roots", -1, 0), _bump),
    ],
    "rootless": [
        ("matrix", ("data", "matrix"), lambda M: [[1 if i == j else 0 for j in range(len(M))] for i in range(len(M))]),
    ],
    "extension": [
        ("summand", ("data", "summand_gram"), lambda G: [[4 if i == j else 0 for j in range(len(G))]
                                                         for i in range(len(G))]),
        ("premise", ("premises",), lambda p: []),
        ("premise claim", ("premises", 0, "claim"), _flip),
    ],
    "reduction": [
        ("J", ("data", "J"), lambda J: J[:-1] if len(J) > 1 else [J[0] + 1]),
        ("matrix entry", ("data", "matrix", 0, 0), _bump),
        ("premise", ("premises",), lambda p: []),
    ],
}

COMMON = [
    ("claim", ("claim",), _flip),
    ("gram entry", ("gram", 0, 0), lambda x: x + 2),
    ("kind", ("kind",), lambda k: "rootless" if k != "rootless" else "symmetry"),
]


@pytest.fixture(scope="module")
def verifier(classification):
    v = Verifier(rerun=True)
    v._runs.update({(tuple(map(tuple, s.lattice.gram)), s.config): s for s in classification.runs.values()})
    return v


def _one_per_kind(classification):
    seen = {}
    for e in classification.entries:
        c = e.certificate
        if c is None:
            continue
        key = (c.kind, c.claim, c.data.get("direction"))
        seen.setdefault(key, c)
    return seen


def test_every_certificate_is_accepted(classification):
    fresh = Verifier(rerun=True)
    for e in classification.entries:
        assert e.certificate is not None, e.expr
        assert fresh.verify(e.certificate.to_json()) == e.status


def test_all_certificate_kinds_occur(classification):
    kinds = {k[0] for k in _one_per_kind(classification)}
    assert kinds == set(MUTATIONS)


def test_mutations_are_rejected(classification, verifier):
    rejected = 0
    accepted = []
    for (kind, claim, direction), cert in _one_per_kind(classification).items():
        d = cert.to_json()
        muts = MUTATIONS[kind] + COMMON
        for label, path, fn in muts:
            try:
                bad = _mutate(d, path, fn)
            except (KeyError, IndexError, TypeError):
                continue
            try:
                verifier.verify(bad)
            except VerificationError:
                rejected += 1
            else:
                accepted.append((kind, direction, label))
    assert not accepted
    assert rejected >= 30


def test_claim_flip_is_rejected_everywhere(classification, verifier):
    for e in classification.entries:
        bad = e.certificate.to_json()
        bad["claim"] = _flip(bad["claim"])
        with pytest.raises(VerificationError):
            verifier.verify(bad)


def test_malformed_input(verifier):
    with pytest.raises(VerificationError):
        verifier.verify("{not json")
    with pytest.raises(VerificationError):
        verifier.verify({"kind": "symmetry"})
    with pytest.raises(VerificationError):
        verifier.verify({"kind": "magic", "claim": "achiral", "lattice": "U+A2", "gram": [[0]]})


def test_files_and_verdicts(classification, tmp_path):
    cert = classification.entry("U(2)+E6(2)").certificate
    p = tmp_path / "cert.json"
    p.write_text(json.dumps(cert.to_json()))
    assert verify_file(str(p)) == "achiral"
    verdict = classification.verdict("U(2)+E6(2)").to_json()
    q = tmp_path / "verdict.json"
    q.write_text(json.dumps(verdict))
    assert verify_file(str(q)) == "achiral"
    assert verify_certificate(cert) == "achiral"
