"""Shared command layer behind the service endpoints and the CLI.

Each handler takes a typed payload dict, runs the corresponding core
computation, and returns ``(report, passed, notes)``.  ``run_command``
wraps that in a ReportRecord, converting domain errors into structured
failure records: input-shape problems are flagged as usage failures,
math-level breakdowns are not.
"""

from __future__ import annotations

import random

from .errors import (
    DegenerateTorus,
    IndexOutOfRange,
    InsufficientSmoothness,
    NotCompleteIntersection,
    ParseError,
    ResiduaError,
    UnsupportedRank,
    VariableMismatch,
)
from .exponents import ExponentMatrix, Weights, limit_agreement_check
from .parsing import (
    factor_width,
    form_width,
    monomial_width,
    parse_factor,
    parse_fraction,
    parse_monomial,
    parse_sigma,
    parse_test_form,
)
from .products import (
    FactorSpec,
    ProductSpec,
    annihilation_test,
    ch_product,
    evaluate_product,
    m_product,
)
from .profiles import RadialProfile
from .quad import Cutoff, EpsilonPath, convergence_study, lambda_sample
from .reports import FailureRecord, ReportRecord

COMMANDS = ("gamma-check", "ch-eval", "product-eval", "m-eval", "duality", "quad-compare")

# fixable by changing the request, so they map to exit code 2
_USAGE_ERRORS = (
    ParseError,
    ValueError,
    UnsupportedRank,
    NotCompleteIntersection,
    IndexOutOfRange,
    VariableMismatch,
    DegenerateTorus,
    InsufficientSmoothness,
)


def random_gamma_instance(rng: random.Random) -> dict:
    """One randomized agreement instance within the desk-scale bounds."""
    r = rng.randint(1, 4)
    n = rng.randint(1, 4)
    alpha = [[rng.randint(0, 3) for _ in range(n)] for _ in range(r)]
    p = rng.randint(0, min(r, n))
    sigma = list(range(1, r + 1))
    rng.shuffle(sigma)
    mu = sorted(rng.sample(range(1, 10), r), reverse=True)
    k = [rng.randint(1, 3) for _ in range(r)]
    return {"alpha": alpha, "k": k, "p": p, "sigma": sigma, "mu": mu}


def _check_one_gamma(instance: dict, exploratory: bool = False):
    alpha = ExponentMatrix(tuple(tuple(int(v) for v in row) for row in instance["alpha"]))
    r = alpha.nrows
    k = tuple(int(v) for v in instance.get("k") or (1,) * r)
    mu_raw = instance.get("mu")
    if mu_raw is None:
        raise ValueError("gamma-check needs curve weights (--mu)")
    weights = Weights(tuple(int(v) for v in mu_raw))
    sigma = instance.get("sigma")
    if isinstance(sigma, str):
        sigma = parse_sigma(sigma, r)
    elif sigma is not None:
        sigma = tuple(int(v) for v in sigma)
        if sorted(sigma) != list(range(1, r + 1)):
            raise ValueError(f"sigma must be a permutation of 1..{r}")
    p = instance.get("p")
    if p is None:
        raise ValueError("gamma-check needs the column count --p")
    return limit_agreement_check(alpha, k, int(p), sigma, weights, exploratory)


def _gamma_check(payload: dict):
    count = payload.get("random")
    if count:
        rng = random.Random(int(payload.get("seed") or 0))
        failures = []
        samples = []
        for i in range(int(count)):
            instance = random_gamma_instance(rng)
            report = _check_one_gamma(instance)
            if not (report.ok and report.equal):
                failures.append({"instance": instance, "report": report.to_jsonable()})
            elif i < 3:
                samples.append({"instance": instance, "report": report.to_jsonable()})
        summary = {
            "instances": int(count),
            "seed": int(payload.get("seed") or 0),
            "failures": failures,
            "samples": samples,
        }
        return summary, not failures, ()
    if payload.get("alpha") is None:
        raise ValueError("gamma-check needs --alpha or --random")
    report = _check_one_gamma(payload, bool(payload.get("exploratory")))
    return report.to_jsonable(), report.ok and report.equal, ()


def _shared_width(factor_texts, testform: str, kinded: bool) -> int:
    width = form_width(testform)
    for text in factor_texts:
        width = max(width, factor_width(text) if kinded else monomial_width(text))
    return max(width, 1)


def _profile(payload: dict) -> RadialProfile:
    return RadialProfile.bump(int(payload.get("profile") or 4))


def _weights(payload: dict, nfactors: int) -> Weights | None:
    raw = payload.get("weights")
    if not raw:
        return None
    values = tuple(int(v) for v in raw)
    if len(values) != nfactors:
        raise ValueError(f"need {nfactors} weights, got {len(values)}")
    return Weights(values)


def _ch_eval(payload: dict):
    factors = payload.get("factors") or ()
    if not factors:
        raise ValueError("ch-eval needs at least one factor monomial")
    testform = payload.get("testform")
    if not testform:
        raise ValueError("ch-eval needs a test form")
    ncoords = _shared_width(factors, testform, kinded=False)
    monomials = [parse_monomial(text, ncoords) for text in factors]
    test = parse_test_form(testform, ncoords, _profile(payload))
    units = None
    if payload.get("units"):
        units = [parse_fraction(str(u)) for u in payload["units"]]
        if len(units) != len(monomials):
            raise ValueError("need one unit per factor")
    report = ch_product(
        monomials,
        test,
        _weights(payload, len(monomials)),
        units,
        bool(payload.get("exploratory")),
    )
    return report.to_jsonable(), report.equal, report.notes


def _product_eval(payload: dict):
    factors = payload.get("factors") or ()
    if not factors:
        raise ValueError("product-eval needs at least one KIND:monomial factor")
    testform = payload.get("testform")
    if not testform:
        raise ValueError("product-eval needs a test form")
    ncoords = _shared_width(factors, testform, kinded=True)
    spec = ProductSpec(
        tuple(parse_factor(text, ncoords) for text in factors),
        _weights(payload, len(factors)),
    )
    test = parse_test_form(testform, ncoords, _profile(payload))
    report = evaluate_product(spec, test, bool(payload.get("exploratory")))
    return report.to_jsonable(), report.equal, report.notes


def _m_eval(payload: dict):
    factors = payload.get("factors") or ()
    if not factors:
        raise ValueError("m-eval needs at least one factor monomial")
    testform = payload.get("testform")
    if not testform:
        raise ValueError("m-eval needs a test form")
    ncoords = _shared_width(factors, testform, kinded=False)
    spec = ProductSpec(
        tuple(
            FactorSpec("M", parse_monomial(text, ncoords)) for text in factors
        ),
        _weights(payload, len(factors)),
    )
    test = parse_test_form(testform, ncoords, _profile(payload))
    report = m_product(spec, test, bool(payload.get("exploratory")))
    return report.to_jsonable(), report.equal, report.notes


def _duality(payload: dict):
    ci = payload.get("ci") or ()
    if not ci:
        raise ValueError("duality needs a complete intersection --ci")
    g_text = payload.get("g")
    if not g_text:
        raise ValueError("duality needs a monomial --g")
    ncoords = max(
        max(monomial_width(text) for text in ci), monomial_width(g_text), 1
    )
    spec = ProductSpec(
        tuple(FactorSpec("R", parse_monomial(text, ncoords)) for text in ci)
    )
    extra = parse_monomial(g_text, ncoords)
    annihilated = annihilation_test(spec, extra)
    report = {
        "factors": [list(f.exponents) for f in spec.factors],
        "g": list(extra),
        "annihilated": annihilated,
    }
    return report, annihilated, ()


def _quad_factor(text: str, ncoords: int) -> FactorSpec:
    if ":" in text:
        return parse_factor(text, ncoords)
    return FactorSpec("R", parse_monomial(text, ncoords))


def _quad_compare(payload: dict):
    factors = payload.get("factors") or ()
    if not factors:
        raise ValueError("quad-compare needs at least one factor")
    testform = payload.get("testform")
    if not testform:
        raise ValueError("quad-compare needs a test form")
    width = form_width(testform)
    for text in factors:
        width = max(width, factor_width(text) if ":" in text else monomial_width(text))
    ncoords = max(width, 1)
    spec = ProductSpec(
        tuple(_quad_factor(text, ncoords) for text in factors),
        _weights(payload, len(factors)),
    )
    test = parse_test_form(testform, ncoords, _profile(payload))
    cutoff = Cutoff(
        kind=str(payload.get("cutoff") or "smoothstep"),
        order=int(payload.get("order") or 2),
    )
    nu = payload.get("nu")
    deltas = payload.get("deltas")
    if not nu or not deltas:
        raise ValueError("quad-compare needs path weights --nu and a --deltas grid")
    path = EpsilonPath(tuple(int(v) for v in nu), tuple(float(v) for v in deltas))
    rtol = float(payload.get("rtol") or 1e-6)
    tolerance = float(payload.get("tolerance") or 5e-3)
    study = convergence_study(spec, test, path, cutoff, rtol, tolerance)
    lambda_tol = float(payload.get("lambda_tol") or 1e-6)
    samples = []
    lambda_ok = True
    for lam in payload.get("lambdas") or ():
        values = tuple(float(v) for v in lam)
        _, record = lambda_sample(spec, test, values)
        samples.append(record.to_jsonable())
        lambda_ok = lambda_ok and record.rel_error <= lambda_tol
    report = {"study": study.to_jsonable(), "lambdaSamples": samples}
    return report, study.converged and lambda_ok, ()


_HANDLERS = {
    "gamma-check": _gamma_check,
    "ch-eval": _ch_eval,
    "product-eval": _product_eval,
    "m-eval": _m_eval,
    "duality": _duality,
    "quad-compare": _quad_compare,
}


def run_command(command: str, payload: dict) -> ReportRecord | FailureRecord:
    """Execute one command and always return a structured record."""
    handler = _HANDLERS.get(command)
    if handler is None:
        return FailureRecord(
            command, payload, "UnknownCommand", f"no such command {command!r}", usage=True
        )
    try:
        report, passed, notes = handler(payload)
    except _USAGE_ERRORS as exc:
        return FailureRecord(command, payload, type(exc).__name__, str(exc), usage=True)
    except ResiduaError as exc:
        return FailureRecord(command, payload, type(exc).__name__, str(exc), usage=False)
    return ReportRecord(command, payload, report, passed, tuple(notes))
