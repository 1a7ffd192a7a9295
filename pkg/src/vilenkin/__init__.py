"""Harmonic analysis on bounded Vilenkin groups truncated at a finite level."""

from __future__ import annotations

from .errors import VilenkinError
from .group import GroupSpec, Point, cyclic_group, load_group, make_group, point, walsh
from .kernels import dirichlet, fejer, kernel_tables
from .spaces import Atom, MartingaleSeq, hp_norm, martingale, random_atom, weak_lp_norm
from .system import Signal, Spectrum, fejer_mean, forward, forward_fast, forward_naive, inverse, partial_sum

__all__ = [
    "Atom",
    "GroupSpec",
    "MartingaleSeq",
    "Point",
    "Signal",
    "Spectrum",
    "VilenkinError",
    "cyclic_group",
    "dirichlet",
    "fejer",
    "fejer_mean",
    "forward",
    "forward_fast",
    "forward_naive",
    "hp_norm",
    "inverse",
    "kernel_tables",
    "load_group",
    "make_group",
    "martingale",
    "partial_sum",
    "point",
    "random_atom",
    "walsh",
    "weak_lp_norm",
]
