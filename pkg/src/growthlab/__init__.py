"""Exact-arithmetic checks for measure-supporting subalgebras of P(ω)/fin.

Modules: ``cantor`` (clopen sets of 2^ω), ``density`` (periodic sets and
staged unions), ``ad`` (block constructions over almost disjoint
families), ``slalom`` (slalom generators modulo finite), ``kelley``
(intersection numbers), ``bell`` (the Bell-tree measure) and ``cli``.
"""
__version__ = "0.1.0"
