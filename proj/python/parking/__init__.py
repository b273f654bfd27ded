"""Parking process on lattices: simulation, exact oracles and statistics.

Topologies are given as dicts such as
``{"family": "unoriented_torus", "dimension": 2, "side": 100}``.
Exact rational results are returned as :class:`fractions.Fraction`.
"""

import json as _json
import os as _os
import secrets as _secrets
from fractions import Fraction

from . import _core
from ._core import BudgetExceeded, ConfigError, Topology as _Topology

__all__ = [
    "BudgetExceeded",
    "ConfigError",
    "Topology",
    "run",
    "run_to_absorption",
    "couple",
    "simulate",
    "sweep",
    "verify",
    "running_max",
    "running_max_exact",
    "oriented1d",
    "exit_time",
    "f_partial",
    "threshold",
    "lattice_threshold",
    "binomial_busy",
    "fit_power_law",
]


def _frac(x):
    return str(Fraction(x))


def Topology(spec):
    return _Topology(_json.dumps(spec))


def run(topology, p, seed, t_max, track_nearest=False):
    """One run; returns metadata plus per-time columns under "rows"."""
    return _json.loads(_core.run(_json.dumps(topology), p, seed, t_max, track_nearest))


def run_to_absorption(topology, p, seed, t_cap):
    return _json.loads(_core.run_to_absorption(_json.dumps(topology), p, seed, t_cap))


def couple(topology, p_low, p_high, seed, t_max):
    return _json.loads(_core.couple(_json.dumps(topology), p_low, p_high, seed, t_max))


def _command(fn, config, write):
    summary, files = fn(_json.dumps(config), _secrets.randbits(63))
    summary = _json.loads(summary)
    if write:
        out = summary["config"].get("output_dir", ".")
        _os.makedirs(out, exist_ok=True)
        for name, content in files.items():
            with open(_os.path.join(out, name), "w", encoding="utf-8") as fh:
                fh.write(content)
    return summary, files


def simulate(config, write=False):
    """Returns (summary dict, {file name: content}); writes into output_dir when asked."""
    return _command(_core.simulate, config, write)


def sweep(config, write=False):
    return _command(_core.sweep, config, write)


def verify(suite="all", workers=1):
    return _json.loads(_core.verify(suite, workers))


def running_max(t, q=0.5):
    mean, variance, dist = _core.running_max(t, q)
    return {"mean": mean, "variance": variance, "distribution": dist}


def running_max_exact(t, q=Fraction(1, 2)):
    return [Fraction(x) for x in _core.running_max_exact(t, _frac(q))]


def oriented1d(L, t, p):
    mean, dist = _core.oriented1d(L, t, _frac(p))
    return {"mean": Fraction(mean), "distribution": [Fraction(x) for x in dist]}


def exit_time(family, dimension, radius, monte_carlo=False, samples=0, seed=0):
    mean, se, n = _core.exit_time(family, dimension, radius, monte_carlo, samples, seed)
    return {"mean": mean, "standard_error": se, "samples": n}


def f_partial(family, dimension, s, j_max):
    terms, sums, diverging = _core.f_partial(family, dimension, s, j_max)
    return {"terms": terms, "partial_sums": sums, "apparent_divergence": diverging}


def threshold(max_degree, k_min):
    c, p_star, ok = _core.threshold(max_degree, k_min)
    return {"c": c, "p_star": p_star, "root_bounds_ok": ok}


def lattice_threshold(dimension, oriented=False):
    return _core.lattice_threshold(dimension, oriented)


def binomial_busy(j, p):
    tail, chernoff, holds = _core.binomial_busy(j, _frac(p))
    return {"exact": Fraction(tail), "chernoff": chernoff, "holds": holds}


def fit_power_law(t, vbar, window):
    slope, intercept, rss, points = _core.fit_power_law(list(t), list(vbar), window[0], window[1])
    return {"slope": slope, "intercept": intercept, "rss": rss, "points": points}
